//! Snowball stemmer for Russian.
//!
//! Follows the published Snowball Russian algorithm: four suffix-stripping
//! steps, each restricted to the region after the first vowel (RV), with
//! derivational endings further restricted to R2. The letter `ё` is folded
//! to `е` first.

use serde::{Deserialize, Serialize};

const VOWELS: [char; 9] = ['а', 'е', 'и', 'о', 'у', 'ы', 'э', 'ю', 'я'];

const PERFECTIVE_GERUND_1: &[&str] = &["в", "вши", "вшись"];
const PERFECTIVE_GERUND_2: &[&str] = &["ив", "ивши", "ившись", "ыв", "ывши", "ывшись"];

const ADJECTIVE: &[&str] = &[
    "ее", "ие", "ые", "ое", "ими", "ыми", "ей", "ий", "ый", "ой", "ем", "им", "ым", "ом", "его",
    "ого", "ему", "ому", "их", "ых", "ую", "юю", "ая", "яя", "ою", "ею",
];

const PARTICIPLE_1: &[&str] = &["ем", "нн", "вш", "ющ", "щ"];
const PARTICIPLE_2: &[&str] = &["ивш", "ывш", "ующ"];

const REFLEXIVE: &[&str] = &["ся", "сь"];

const VERB_1: &[&str] = &[
    "ла", "на", "ете", "йте", "ли", "й", "л", "ем", "н", "ло", "но", "ет", "ют", "ны", "ть", "ешь",
    "нно",
];
const VERB_2: &[&str] = &[
    "ила", "ыла", "ена", "ейте", "уйте", "ите", "или", "ыли", "ей", "уй", "ил", "ыл", "им", "ым",
    "ен", "ило", "ыло", "ено", "ят", "ует", "уют", "ит", "ыт", "ены", "ить", "ыть", "ишь", "ую",
    "ю",
];

const NOUN: &[&str] = &[
    "а", "ев", "ов", "ие", "ье", "е", "иями", "ями", "ами", "еи", "ии", "и", "ией", "ей", "ой",
    "ий", "й", "иям", "ям", "ием", "ем", "ам", "ом", "о", "у", "ах", "иях", "ях", "ы", "ь", "ию",
    "ью", "ю", "ия", "ья", "я",
];

const SUPERLATIVE: &[&str] = &["ейш", "ейше"];
const DERIVATIONAL: &[&str] = &["ост", "ость"];

/// Which stemming routine the scorer applies to tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stemmer {
    /// One Snowball pass, as published.
    #[default]
    Russian,
    /// Snowball passes repeated to a fixed point.
    RussianFixpoint,
    Identity,
}

impl Stemmer {
    pub fn stem(self, token: &str) -> String {
        match self {
            Stemmer::Russian => stem(token),
            Stemmer::RussianFixpoint => stem_to_fixpoint(token),
            Stemmer::Identity => token.to_owned(),
        }
    }
}

fn is_vowel(c: char) -> bool {
    VOWELS.contains(&c)
}

fn is_cyrillic(c: char) -> bool {
    matches!(c, '\u{0400}'..='\u{04FF}')
}

/// Stems a case-folded token with one pass of the Snowball algorithm.
/// Tokens without Cyrillic letters pass through unchanged.
///
/// A single pass is not always idempotent (`вмазать` → `вмаза` → `вмаз`);
/// see [`stem_to_fixpoint`].
pub fn stem(token: &str) -> String {
    if !token.chars().any(is_cyrillic) {
        return token.to_owned();
    }
    let mut word = fold_yo(token);
    snowball_pass(&mut word);
    word.into_iter().collect()
}

/// Repeats the Snowball pass until nothing more is stripped, which makes
/// the result idempotent.
pub fn stem_to_fixpoint(token: &str) -> String {
    if !token.chars().any(is_cyrillic) {
        return token.to_owned();
    }
    let mut word = fold_yo(token);
    loop {
        let before = word.len();
        snowball_pass(&mut word);
        if word.len() == before {
            break;
        }
    }
    word.into_iter().collect()
}

fn fold_yo(token: &str) -> Vec<char> {
    token
        .chars()
        .map(|c| if c == 'ё' { 'е' } else { c })
        .collect()
}

struct Regions {
    rv: usize,
    r2: usize,
}

fn regions(word: &[char]) -> Regions {
    let len = word.len();
    let mut rv = len;
    let mut r2 = len;
    let mut i = 0;
    // gopast vowel
    while i < len && !is_vowel(word[i]) {
        i += 1;
    }
    if i < len {
        rv = i + 1;
        i += 1;
        // gopast non-vowel (start of R1), then gopast vowel, gopast non-vowel
        let mut steps = 0;
        let mut want_vowel = false;
        while i < len {
            if is_vowel(word[i]) == want_vowel {
                steps += 1;
                want_vowel = !want_vowel;
                if steps == 3 {
                    r2 = i + 1;
                    break;
                }
            }
            i += 1;
        }
    }
    Regions { rv, r2 }
}

fn suffix_matches(word: &[char], limit: usize, suffix: &str) -> bool {
    let n = suffix.chars().count();
    if n > word.len() || word.len() - n < limit {
        return false;
    }
    word[word.len() - n..].iter().copied().eq(suffix.chars())
}

/// Longest suffix from `groups` lying entirely at or after `limit`.
/// Returns its char length and the group index.
fn longest_match(word: &[char], limit: usize, groups: &[&[&str]]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (g, list) in groups.iter().enumerate() {
        for s in list.iter() {
            if suffix_matches(word, limit, s) {
                let n = s.chars().count();
                if best.is_none_or(|(len, _)| n > len) {
                    best = Some((n, g));
                }
            }
        }
    }
    best
}

/// Removes the longest suffix of `groups`. Group 0 endings must be preceded
/// by `а` or `я` inside the region when `group0_needs_a` is set; a failed
/// condition fails the whole step.
fn strip(word: &mut Vec<char>, limit: usize, groups: &[&[&str]], group0_needs_a: bool) -> bool {
    let Some((n, g)) = longest_match(word, limit, groups) else {
        return false;
    };
    if g == 0 && group0_needs_a {
        let at = word.len() - n;
        if at == 0 || at - 1 < limit || !matches!(word[at - 1], 'а' | 'я') {
            return false;
        }
    }
    let new_len = word.len() - n;
    word.truncate(new_len);
    true
}

fn snowball_pass(word: &mut Vec<char>) {
    let Regions { rv, r2 } = regions(word);
    if rv >= word.len() {
        return;
    }

    // Step 1
    if !strip(word, rv, &[PERFECTIVE_GERUND_1, PERFECTIVE_GERUND_2], true) {
        strip(word, rv, &[REFLEXIVE], false);
        let adjectival = if strip(word, rv, &[ADJECTIVE], false) {
            strip(word, rv, &[PARTICIPLE_1, PARTICIPLE_2], true);
            true
        } else {
            false
        };
        if !adjectival && !strip(word, rv, &[VERB_1, VERB_2], true) {
            strip(word, rv, &[NOUN], false);
        }
    }

    // Step 2
    if suffix_matches(word, rv, "и") {
        word.pop();
    }

    // Step 3
    if let Some((n, _)) = longest_match(word, rv, &[DERIVATIONAL]) {
        if word.len() - n >= r2 {
            let new_len = word.len() - n;
            word.truncate(new_len);
        }
    }

    // Step 4
    match longest_match(word, rv, &[SUPERLATIVE, &["н"], &["ь"]]) {
        Some((n, 0)) => {
            let new_len = word.len() - n;
            word.truncate(new_len);
            if suffix_matches(word, rv, "нн") {
                word.pop();
            }
        }
        Some((_, 1)) => {
            if suffix_matches(word, rv, "нн") {
                word.pop();
            }
        }
        Some((_, _)) => {
            word.pop();
        }
        None => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_latin_pass_through() {
        assert_eq!(stem(""), "");
        assert_eq!(stem("kokain"), "kokain");
        assert_eq!(stem("tabletki"), "tabletki");
        assert_eq!(stem("2012"), "2012");
    }

    #[test]
    fn identity_mode() {
        assert_eq!(Stemmer::Identity.stem("героина"), "героина");
        assert_eq!(Stemmer::Russian.stem("героина"), "героин");
    }

    #[test]
    fn regions_of_known_word() {
        // "противоестественном": RV starts after "про", R2 after "противо"... checked
        // against the worked example of the algorithm description.
        let w: Vec<char> = "противоестественном".chars().collect();
        let r = regions(&w);
        assert_eq!(w[r.rv..].iter().collect::<String>(), "тивоестественном");
        assert_eq!(w[r.r2..].iter().collect::<String>(), "оестественном");
    }

    #[test]
    fn yo_is_folded() {
        assert_eq!(stem("ёлка"), stem("елка"));
    }

    #[test]
    fn single_pass_is_not_always_idempotent() {
        assert_eq!(stem("вмазать"), "вмаза");
        assert_eq!(stem("вмаза"), "вмаз");
        assert_eq!(stem_to_fixpoint("вмазать"), "вмаз");
        assert_eq!(Stemmer::RussianFixpoint.stem("вмаз"), "вмаз");
    }
}
