//! Checks the Russian stemmer against the compiled Snowball reference.

use lexnet_core::scorer::{stem, stem_to_fixpoint, tokenize};
use proptest::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};

const VECTORS: [(&str, &str); 20] = [
    ("вавиловка", "вавиловк"),
    ("вагнера", "вагнер"),
    ("важная", "важн"),
    ("важнейшие", "важн"),
    ("важного", "важн"),
    ("противоестественном", "противоестествен"),
    ("героина", "героин"),
    ("кокаином", "кокаин"),
    ("таблетками", "таблетк"),
    ("колесами", "колес"),
    ("вмазать", "вмаза"),
    ("вмазался", "вмаза"),
    ("уколов", "укол"),
    ("иглы", "игл"),
    ("красивейшая", "красив"),
    ("бегавшими", "бега"),
    ("радостью", "радост"),
    ("нежностью", "нежност"),
    ("читающий", "чита"),
    ("стали", "стал"),
];

#[test]
fn reference_vectors() {
    let reference = Stemmer::create(Algorithm::Russian);
    for (word, expected) in VECTORS {
        assert_eq!(reference.stem(word), expected, "reference disagrees on {word}");
        assert_eq!(stem(word), expected, "{word}");
    }
}

const ENDINGS: &[&str] = &[
    "", "а", "я", "и", "ы", "е", "о", "у", "ю", "ь", "й", "в", "вши", "вшись", "ив", "ившись",
    "ыв", "ее", "ие", "ые", "ое", "ими", "ыми", "ей", "ий", "ый", "ой", "ем", "им", "ым", "ом",
    "его", "ого", "ему", "ому", "их", "ых", "ую", "юю", "ая", "яя", "ою", "ею", "нн", "вш", "ющ",
    "щ", "ивш", "ывш", "ующ", "ся", "сь", "ла", "на", "ете", "йте", "ли", "л", "н", "ло", "но",
    "ет", "ют", "ны", "ть", "ешь", "нно", "ила", "ыла", "ена", "ейте", "уйте", "ите", "или", "ят",
    "ует", "уют", "ит", "ыт", "ены", "ить", "ыть", "ишь", "ев", "ов", "ье", "иями", "ями", "ами",
    "еи", "ии", "ией", "ам", "ах", "иях", "ях", "ию", "ью", "ия", "ья", "ост", "ость", "ейш",
    "ейше",
];

fn cyrillic_word() -> impl Strategy<Value = String> {
    let letters: Vec<char> = ('а'..='я').filter(|&c| c != 'ё').collect();
    (
        proptest::collection::vec(proptest::sample::select(letters), 0..8),
        proptest::collection::vec(proptest::sample::select(ENDINGS.to_vec()), 0..3),
    )
        .prop_map(|(base, endings)| {
            let mut w: String = base.into_iter().collect();
            for e in endings {
                w.push_str(e);
            }
            w
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn matches_reference_implementation(word in cyrillic_word()) {
        let reference = Stemmer::create(Algorithm::Russian);
        prop_assert_eq!(stem(&word), reference.stem(&word).into_owned());
    }

    #[test]
    fn fixpoint_is_idempotent(word in cyrillic_word()) {
        let once = stem_to_fixpoint(&word);
        prop_assert_eq!(stem_to_fixpoint(&once), once.clone());
    }

    #[test]
    fn deterministic_and_never_longer(word in cyrillic_word()) {
        let s = stem(&word);
        prop_assert_eq!(&s, &stem(&word));
        prop_assert!(s.chars().count() <= word.chars().count());
        prop_assert!(word.starts_with(&s));
    }

    #[test]
    fn latin_tokens_unchanged(word in "[a-z0-9]{0,12}") {
        prop_assert_eq!(stem(&word), word);
    }
}

#[test]
fn own_stem_is_fixed() {
    for word in ["героин", "кокаин", "игл", "укол"] {
        assert_eq!(stem(word), word);
    }
}

#[test]
fn tokens_then_stems() {
    let stems: Vec<String> = tokenize("Героина, ГЕРОИНОМ и героин!")
        .iter()
        .map(|t| stem(t))
        .collect();
    assert_eq!(stems, vec!["героин", "героин", "и", "героин"]);
}
