use std::collections::BTreeSet;

use lexnet_core::corpus::{Corpus, CorpusMeta, UserProfile};
use lexnet_core::scorer::Labels;
use lexnet_core::susceptibility::{fit_nb, tri_partition, Group, NbModel, Polarity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FEATURES: [&str; 3] = ["f0", "f1", "f2"];

fn fixture(seed: u64) -> (Corpus, Labels, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..14);
    let k = rng.random_range(0..=3);
    let mut flags = Vec::with_capacity(n);
    let users = (0..n)
        .map(|i| {
            let mut u = UserProfile::new(format!("u{i}"));
            for name in FEATURES.iter().chain(&["other"]) {
                if rng.random_bool(0.4) {
                    u.interests.insert(name.to_string());
                }
            }
            flags.push(rng.random_bool(0.4));
            u
        })
        .collect();
    // Guarantee both classes among interest-bearing users.
    let mut users: Vec<UserProfile> = users;
    users[0].interests.insert("other".into());
    users[1].interests.insert("other".into());
    flags[0] = true;
    flags[1] = false;
    let corpus = Corpus::new(users, CorpusMeta::default()).unwrap();
    let features = FEATURES[..k].iter().map(|s| s.to_string()).collect();
    (corpus, Labels::from_flags(flags), features)
}

/// Joint probabilities P(class, F) evaluated by multiplying the smoothed
/// class-conditional probabilities of every feature value.
fn joint(corpus: &Corpus, labels: &Labels, features: &[String], held: &BTreeSet<String>, alpha: f64) -> (f64, f64) {
    let mut size = [0f64; 2];
    let mut counts = vec![[0f64; 2]; features.len()];
    for (i, u) in corpus.users().iter().enumerate() {
        if u.interests.is_empty() {
            continue;
        }
        let class = usize::from(!labels.is_infectious(i));
        size[class] += 1.0;
        for (f, name) in features.iter().enumerate() {
            if u.interests.contains(name) {
                counts[f][class] += 1.0;
            }
        }
    }
    let total = size[0] + size[1];
    let mut out = [size[0] / total, size[1] / total];
    for (f, name) in features.iter().enumerate() {
        for class in 0..2 {
            let p_true = (counts[f][class] + alpha) / (size[class] + 2.0 * alpha);
            out[class] *= if held.contains(name) { p_true } else { 1.0 - p_true };
        }
    }
    (out[0], out[1])
}

fn subsets(features: &[String]) -> Vec<BTreeSet<String>> {
    (0..1usize << features.len())
        .map(|mask| {
            features
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f.clone())
                .chain(["other".to_string()])
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn score_agrees_with_exhaustive_evaluation(seed in any::<u64>(), alpha in 0.1..3.0f64) {
        let (corpus, labels, features) = fixture(seed);
        let model = fit_nb(&corpus, &labels, &features, alpha, Polarity::Both).unwrap();
        for held in subsets(&features) {
            let (pd, pr) = joint(&corpus, &labels, &features, &held, alpha);
            let score = model.llr_score(&held);
            prop_assert!((score - (pd.ln() - pr.ln())).abs() < 1e-9);
            if (pd - pr).abs() > 1e-12 * pd.max(pr) {
                prop_assert_eq!(score > 0.0, pd > pr);
            }
        }
    }

    #[test]
    fn uninformative_feature_changes_nothing(seed in any::<u64>(), p in 0.01..0.99f64) {
        let (corpus, labels, features) = fixture(seed);
        let model = fit_nb(&corpus, &labels, &features, 1.0, Polarity::Both).unwrap();
        let mut extended = model.clone();
        let flat = NbModel::from_probabilities(0.5, &[("flat".into(), p, p)], 1.0, Polarity::Both);
        extended.features.extend(flat.features);
        for mut held in subsets(&features) {
            let before = model.llr_score(&held);
            prop_assert_eq!(extended.llr_score(&held), before);
            held.insert("flat".into());
            prop_assert_eq!(extended.llr_score(&held), before);
        }
    }

    #[test]
    fn labels_partition_users(seed in any::<u64>()) {
        let (corpus, labels, features) = fixture(seed);
        let model = fit_nb(&corpus, &labels, &features, 1.0, Polarity::Both).unwrap();
        let tri = tri_partition(&corpus, &labels, &model);
        prop_assert_eq!(tri.len(), corpus.len());
        for (i, (t, u)) in tri.iter().zip(corpus.users()).enumerate() {
            prop_assert_eq!(&t.user_id, &u.user_id);
            let expected = if labels.is_infectious(i) {
                Group::Infectious
            } else if !u.interests.is_empty() && model.llr_score(&u.interests) > 0.0 {
                Group::Susceptible
            } else {
                Group::Immune
            };
            prop_assert_eq!(t.label, expected);
        }
    }
}
