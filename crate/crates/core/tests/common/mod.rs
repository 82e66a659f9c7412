//! Independent reference implementations and seeded fixture builders shared
//! by the property tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use lexnet_core::corpus::{DrugLexicon, TermKind};
use lexnet_core::interest_stats::ContingencyTable;
use lexnet_core::themes::{ClusterOptions, Linkage};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

// ---------------------------------------------------------------- Fisher

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Two-sided Fisher p-value by exact enumeration of every table with the
/// observed margins. A table counts as "as extreme" when its probability is
/// at most the observed one, allowing a relative slack of 1e-7.
pub fn fisher_enumerate(t: &ContingencyTable) -> f64 {
    let (r1, r2, c1) = (t.a + t.b, t.c + t.d, t.a + t.c);
    let total = binom(r1 + r2, c1);
    let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
    let observed = weight(t.a);
    let slack = observed / 10_000_000;
    let lo = c1.saturating_sub(r2);
    let hi = c1.min(r1);
    let extreme: u128 = (lo..=hi)
        .map(weight)
        .filter(|&w| w <= observed + slack)
        .sum();
    (extreme as f64 / total as f64).min(1.0)
}

pub fn random_table<R: Rng>(rng: &mut R, max_n: u64) -> ContingencyTable {
    let n = rng.random_range(0..=max_n);
    let mut cells = [0u64; 4];
    for _ in 0..n {
        // Skewed cell probabilities make lopsided tables common.
        let u: f64 = rng.random();
        let i = if u < 0.1 {
            0
        } else if u < 0.4 {
            1
        } else if u < 0.55 {
            2
        } else {
            3
        };
        cells[i] += 1;
    }
    cells.shuffle(rng);
    ContingencyTable::new(cells[0], cells[1], cells[2], cells[3])
}

// ---------------------------------------------------------------- BH

/// Step-up rule written directly from its definition: find the largest k
/// with p_(k) <= k q / m and reject every p-value not above p_(k).
pub fn bh_naive(p: &[f64], q: f64) -> Vec<bool> {
    let m = p.len();
    let mut sorted = p.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cutoff = None;
    for k in 1..=m {
        if sorted[k - 1] <= k as f64 * q / m as f64 {
            cutoff = Some(sorted[k - 1]);
        }
    }
    p.iter().map(|&x| cutoff.is_some_and(|c| x <= c)).collect()
}

pub fn random_pvalues<R: Rng>(rng: &mut R, max_m: usize) -> Vec<f64> {
    let m = rng.random_range(1..=max_m);
    let mut v: Vec<f64> = (0..m)
        .map(|_| match rng.random_range(0..4) {
            0 => rng.random::<f64>() * 1e-3,
            1 => rng.random::<f64>() * 0.05,
            _ => rng.random::<f64>(),
        })
        .collect();
    // Inject ties.
    for _ in 0..rng.random_range(0..=m / 4) {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
        v[i] = v[j];
    }
    v
}

// ---------------------------------------------------------------- Clustering

pub fn ochiai_ref(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.iter().filter(|x| b.contains(x)).count();
    shared as f64 / ((a.len() * b.len()) as f64).sqrt()
}

pub struct ClusterFixture {
    pub interests: Vec<String>,
    pub supporters: BTreeMap<String, BTreeSet<usize>>,
}

pub fn random_cluster_fixture<R: Rng>(rng: &mut R, max_k: usize, max_users: usize) -> ClusterFixture {
    let k = rng.random_range(1..=max_k);
    let users = rng.random_range(1..=max_users);
    let mut interests: Vec<String> = (0..k).map(|i| format!("i{i:02}")).collect();
    let density = rng.random_range(0.05..0.6);
    let supporters = interests
        .iter()
        .map(|name| {
            let set: BTreeSet<usize> = (0..users).filter(|_| rng.random::<f64>() < density).collect();
            (name.clone(), set)
        })
        .collect();
    interests.shuffle(rng);
    ClusterFixture {
        interests,
        supporters,
    }
}

#[derive(Debug, PartialEq)]
pub struct RefMerge {
    pub left: String,
    pub right: String,
    pub similarity: f64,
}

/// Agglomerative clustering recomputing every cluster-pair similarity from
/// scratch at each step. Ties go to the pair whose (first member, first
/// member) keys are lexicographically smallest.
pub fn cluster_reference(
    fixture: &ClusterFixture,
    options: &ClusterOptions,
) -> (Vec<Vec<String>>, Vec<RefMerge>) {
    let support = |c: &[String]| -> BTreeSet<usize> {
        c.iter().flat_map(|m| fixture.supporters[m].iter().copied()).collect()
    };
    let similarity = |x: &[String], y: &[String]| -> f64 {
        match options.linkage {
            Linkage::Eq1 => ochiai_ref(&support(x), &support(y)),
            Linkage::Complete => {
                let mut worst = f64::INFINITY;
                for a in x {
                    for b in y {
                        worst = worst.min(ochiai_ref(&fixture.supporters[a], &fixture.supporters[b]));
                    }
                }
                worst
            }
        }
    };
    let mut clusters: Vec<Vec<String>> = {
        let set: BTreeSet<&String> = fixture.interests.iter().collect();
        set.into_iter().map(|s| vec![s.clone()]).collect()
    };
    let mut merges = Vec::new();
    loop {
        if clusters.len() < 2 || options.target_count.is_some_and(|t| clusters.len() <= t) {
            break;
        }
        let mut best: Option<(f64, String, String, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in 0..clusters.len() {
                if i == j {
                    continue;
                }
                let (ki, kj) = (clusters[i][0].clone(), clusters[j][0].clone());
                if ki > kj {
                    continue;
                }
                let s = similarity(&clusters[i], &clusters[j]);
                let better = match &best {
                    None => true,
                    Some((bs, bi, bj, _, _)) => s > *bs || (s == *bs && (&ki, &kj) < (bi, bj)),
                };
                if better {
                    best = Some((s, ki, kj, i, j));
                }
            }
        }
        let (s, ki, kj, i, j) = best.unwrap();
        if options.target_count.is_none() && s < options.cut {
            break;
        }
        merges.push(RefMerge {
            left: ki,
            right: kj,
            similarity: s,
        });
        let absorbed = clusters[j].clone();
        clusters[i].extend(absorbed);
        clusters[i].sort();
        clusters.remove(j);
        clusters.sort();
    }
    (clusters, merges)
}

// ---------------------------------------------------------------- Scoring

/// Inflected forms sharing a handful of stems, plus Latin transliterations.
pub const WORD_POOL: &[&str] = &[
    "героин", "героина", "героином", "кокаин", "кокаина", "колеса", "колесами", "травка", "травку",
    "травкой", "шприц", "шприцы", "доза", "дозы", "дозой", "укол", "уколы", "игла", "иглой",
    "вмазать", "ширка", "закладка", "закладки", "kokain", "geroin", "tabletki", "kolesa", "vmazat",
    "mariguana",
];

pub const FILLER_POOL: &[&str] = &[
    "сегодня", "город", "погода", "книга", "музыка", "друзья", "хорошо", "вечером", "дом", "and",
    "the", "photo", "2012", "пятница", "кошка",
];

pub fn random_lexicon<R: Rng>(rng: &mut R) -> DrugLexicon {
    let mut pool: Vec<&str> = WORD_POOL.to_vec();
    pool.shuffle(rng);
    let n_terms = rng.random_range(1..=10);
    let terms: Vec<(String, TermKind, Option<f64>)> = pool[..n_terms]
        .iter()
        .map(|s| {
            let kind = if rng.random::<bool>() {
                TermKind::Official
            } else {
                TermKind::Slang
            };
            let weight = match rng.random_range(0..3) {
                0 => None,
                1 => Some(rng.random_range(1..=6) as f64),
                _ => Some(rng.random_range(0.05..10.0)),
            };
            (s.to_string(), kind, weight)
        })
        .collect();
    let mut phrases = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let len = rng.random_range(2..=3);
        let words: Vec<String> = WORD_POOL
            .choose_multiple(rng, len)
            .map(|s| s.to_string())
            .collect();
        let weight = rng.random_bool(0.3).then(|| 100.0 + rng.random::<f64>());
        phrases.push((words, weight));
    }
    // Phrases whose words fold to one distinct form are rejected; drop them.
    phrases.retain(|(w, _)| w.iter().collect::<BTreeSet<_>>().len() >= 2);
    DrugLexicon::new(terms, phrases).expect("generated lexicon is valid")
}

pub fn random_text<R: Rng>(rng: &mut R, max_words: usize) -> String {
    let n = rng.random_range(0..=max_words);
    let seps = [" ", ", ", "! ", "\n", " - ", "... "];
    let mut out = String::new();
    for i in 0..n {
        let word = if rng.random::<f64>() < 0.4 {
            *WORD_POOL.choose(rng).unwrap()
        } else {
            *FILLER_POOL.choose(rng).unwrap()
        };
        let word = if rng.random::<f64>() < 0.2 {
            word.to_uppercase()
        } else {
            word.to_owned()
        };
        if i > 0 {
            out.push_str(seps.choose(rng).unwrap());
        }
        out.push_str(&word);
    }
    out
}

fn reference_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(current.to_lowercase());
            current.clear();
        }
    }
    if !current.is_empty() {
        tokens.push(current.to_lowercase());
    }
    tokens
}

pub fn reference_stem(token: &str) -> String {
    if token.chars().any(|c| ('\u{0400}'..='\u{04FF}').contains(&c)) {
        rust_stemmers::Stemmer::create(rust_stemmers::Algorithm::Russian)
            .stem(token)
            .into_owned()
    } else {
        token.to_owned()
    }
}

/// Quadratic matcher: every term is compared against every token, every
/// phrase word is searched for among all tokens.
pub fn brute_force_entry(text: &str, lexicon: &DrugLexicon) -> f64 {
    let stems: Vec<String> = reference_tokens(text).iter().map(|t| reference_stem(t)).collect();
    let mut total = 0.0;
    for term in lexicon.terms() {
        let target = reference_stem(&term.surface);
        let count = stems.iter().filter(|s| **s == target).count();
        if count > 0 {
            total += term.weight * count as f64;
        }
    }
    let mut phrase_total = 0.0;
    for phrase in lexicon.phrases() {
        let all = phrase
            .words
            .iter()
            .all(|w| stems.iter().any(|s| *s == reference_stem(w)));
        if all {
            phrase_total += phrase.weight;
        }
    }
    total + phrase_total
}
