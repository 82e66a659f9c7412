use std::collections::BTreeSet;

use lexnet_core::corpus::{validate_corpus, DrugLexicon};
use lexnet_core::interest_stats::{test_interests, InterestOptions};
use lexnet_core::netmetrics::{fit_power_law, SocialGraph};
use lexnet_core::scorer::{label_population, ScoreOptions, Scorer};
use lexnet_core::susceptibility::{fit_nb, tri_partition, Group, Polarity};
use lexnet_core::synthgen::{generate, preferential_attachment, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(seed: u64) -> GenConfig {
    GenConfig {
        n_users: 1500,
        seed,
        ..GenConfig::default()
    }
}

#[test]
fn same_seed_same_bytes() {
    let lex = DrugLexicon::toy();
    let (a, ta) = generate(&small(7), &lex).unwrap();
    let (b, tb) = generate(&small(7), &lex).unwrap();
    assert_eq!(a.to_lines().unwrap(), b.to_lines().unwrap());
    assert_eq!(ta.to_csv(), tb.to_csv());
    let (c, _) = generate(&small(8), &lex).unwrap();
    assert_ne!(a.to_lines().unwrap(), c.to_lines().unwrap());
}

#[test]
fn output_is_valid() {
    let (corpus, _) = generate(&small(1), &DrugLexicon::toy()).unwrap();
    let report = validate_corpus(&corpus);
    assert!(report.issues.is_empty(), "{:?}", report.issues);
    assert_eq!(report.dangling_ids, 0);
    assert!(report.users_with_age > 0);
    assert!(report.users_with_interests < corpus.len());
}

#[test]
fn planted_infectious_cross_threshold() {
    let lex = DrugLexicon::toy();
    let config = small(3);
    let (corpus, truth) = generate(&config, &lex).unwrap();
    let scorer = Scorer::new(&lex, ScoreOptions::default());
    let planted = truth.ids_in(Group::Infectious);
    for user in corpus.users() {
        let s = scorer.score_user(user);
        if planted.contains(user.user_id.as_str()) {
            assert!(s.total_weight >= config.threshold, "{} scores {}", user.user_id, s.total_weight);
        }
    }
}

#[test]
fn graph_recount_matches_edges() {
    // Every arrival after the first m adds exactly m edges.
    let (n, m) = (2000, 3);
    let adj = preferential_attachment(n, m, &mut ChaCha8Rng::seed_from_u64(5));
    let expected: usize = (1..n).map(|i| m.min(i)).sum();
    let half_degree: usize = adj.iter().map(|s| s.len()).sum::<usize>() / 2;
    assert_eq!(half_degree, expected);

    let config = GenConfig {
        n_users: n,
        attachment_m: m,
        seed: 5,
        ..GenConfig::default()
    };
    let (corpus, _) = generate(&config, &DrugLexicon::toy()).unwrap();
    assert_eq!(SocialGraph::from_corpus(&corpus).edge_count(), expected);
}

#[test]
fn preferential_attachment_exponent() {
    let adj = preferential_attachment(50_000, 3, &mut ChaCha8Rng::seed_from_u64(11));
    let degrees: Vec<u64> = adj.iter().map(|s| s.len() as u64).collect();
    let fit = fit_power_law(&degrees).unwrap();
    assert!((fit.gamma - 3.0).abs() <= 0.15, "gamma {}", fit.gamma);
}

#[test]
fn pipeline_recovers_planted_groups() {
    let lex = DrugLexicon::toy();
    let config = GenConfig {
        n_users: 3000,
        seed: 21,
        ..GenConfig::default()
    };
    let (corpus, truth) = generate(&config, &lex).unwrap();
    let labels = label_population(&corpus, &lex, ScoreOptions::default());
    let found: BTreeSet<&str> = labels.infectious_ids(&corpus).collect();
    let planted = truth.ids_in(Group::Infectious);
    let hits = found.intersection(&planted).count() as f64;
    assert!(hits / found.len() as f64 >= 0.95);
    assert!(hits / planted.len() as f64 >= 0.95);

    let tests = test_interests(&corpus, &labels, &InterestOptions::default());
    let significant: Vec<String> = tests
        .iter()
        .filter(|t| t.significant)
        .map(|t| t.interest.clone())
        .collect();
    let indicative: BTreeSet<String> = config.indicative_interests().into_iter().collect();
    assert!(indicative.iter().all(|i| significant.contains(i)));

    let model = fit_nb(&corpus, &labels, &significant, 1.0, Polarity::Both).unwrap();
    let tri = tri_partition(&corpus, &labels, &model);
    let predicted: BTreeSet<&str> = tri
        .iter()
        .filter(|t| t.label == Group::Susceptible)
        .map(|t| t.user_id.as_str())
        .collect();
    let planted_sus = truth.ids_in(Group::Susceptible);
    let hits = predicted.intersection(&planted_sus).count() as f64;
    assert!(hits / predicted.len() as f64 >= 0.8, "precision {}", hits / predicted.len() as f64);
    assert!(hits / planted_sus.len() as f64 >= 0.6);
}
