//! Per-interest contingency tables, two-sided Fisher exact tests and
//! Benjamini–Hochberg false discovery rate control.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::scorer::Labels;

pub const DEFAULT_MIN_COUNT: usize = 10;
pub const DEFAULT_Q: f64 = 0.05;

/// Relative slack when comparing point probabilities against the observed
/// table, so that exact ties survive floating-point noise.
const TIE_TOLERANCE: f64 = 1e-7;

/// 2×2 table. Columns: infectious / rest. Rows: interested / not interested.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Swaps the infectious and rest columns.
    pub fn relabeled(&self) -> Self {
        ContingencyTable::new(self.b, self.a, self.d, self.c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterestTable {
    pub interest: String,
    pub table: ContingencyTable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterestTest {
    pub interest: String,
    pub table: ContingencyTable,
    pub p_value: f64,
    pub significant: bool,
    pub indicativeness: Option<f64>,
}

/// One table per interest held by more than `min_count` infectious users.
/// The population is restricted to users with at least one interest.
pub fn build_tables(corpus: &Corpus, labels: &Labels, min_count: usize) -> Vec<InterestTable> {
    let mut infectious_total = 0u64;
    let mut rest_total = 0u64;
    // interest -> (infectious holders, rest holders)
    let mut holders: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for (i, user) in corpus.users().iter().enumerate() {
        if !user.has_interests() {
            continue;
        }
        let infectious = labels.is_infectious(i);
        if infectious {
            infectious_total += 1;
        } else {
            rest_total += 1;
        }
        for interest in &user.interests {
            let e = holders.entry(interest.as_str()).or_default();
            if infectious {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    holders
        .into_iter()
        .filter(|(_, (a, _))| *a > min_count as u64)
        .map(|(interest, (a, b))| InterestTable {
            interest: interest.to_owned(),
            table: ContingencyTable::new(a, b, infectious_total - a, rest_total - b),
        })
        .collect()
}

/// Table of `ln k!` for `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct LogFactorials(Vec<f64>);

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let mut v = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        v.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            v.push(acc);
        }
        LogFactorials(v)
    }

    pub fn capacity(&self) -> usize {
        self.0.len() - 1
    }

    fn get(&self, k: u64) -> f64 {
        self.0[k as usize]
    }

    fn ln_choose(&self, n: u64, k: u64) -> f64 {
        self.get(n) - self.get(k) - self.get(n - k)
    }

    /// Two-sided Fisher exact p-value by the point-probability method.
    /// Panics if the table total exceeds the table capacity.
    pub fn fisher_two_sided(&self, t: &ContingencyTable) -> f64 {
        let n = t.n();
        if n == 0 {
            return 1.0;
        }
        assert!(n as usize <= self.capacity(), "table larger than factorial cache");
        let row1 = t.a + t.b;
        let col1 = t.a + t.c;
        let lo = (row1 + col1).saturating_sub(n);
        let hi = row1.min(col1);
        let denom = self.ln_choose(n, col1);
        let ln_p = |x: u64| self.ln_choose(row1, x) + self.ln_choose(n - row1, col1 - x) - denom;

        let observed = ln_p(t.a);
        let cutoff = observed + TIE_TOLERANCE.ln_1p();
        let selected: Vec<f64> = (lo..=hi).map(ln_p).filter(|&lp| lp <= cutoff).collect();
        let max = selected.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = selected.iter().map(|lp| (lp - max).exp()).sum();
        (max.exp() * sum).clamp(0.0, 1.0)
    }
}

pub fn fisher_two_sided(table: &ContingencyTable) -> f64 {
    LogFactorials::new(table.n() as usize).fisher_two_sided(table)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BhRule {
    /// `p_(k) <= (k/m) q`
    #[default]
    Standard,
    /// `p_(k) <= k q`, the variant without the division by m.
    Literal,
}

/// Benjamini–Hochberg step-up procedure. Returns the rejection mask in input
/// order.
pub fn bh_fdr(p_values: &[f64], q: f64) -> Vec<bool> {
    bh_fdr_with(p_values, q, BhRule::Standard)
}

pub fn bh_fdr_with(p_values: &[f64], q: f64, rule: BhRule) -> Vec<bool> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let bound = |k: usize| match rule {
        BhRule::Standard => k as f64 / m as f64 * q,
        BhRule::Literal => k as f64 * q,
    };
    let cutoff = (1..=m).rev().find(|&k| sorted[k - 1] <= bound(k)).map(|k| sorted[k - 1]);
    match cutoff {
        Some(c) => p_values.iter().map(|&p| p <= c).collect(),
        None => vec![false; m],
    }
}

/// `P(D | I) = a / (a + b)`, absent when nobody holds the interest.
pub fn indicativeness(table: &ContingencyTable) -> Option<f64> {
    let holders = table.a + table.b;
    (holders > 0).then(|| table.a as f64 / holders as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterestOptions {
    pub min_count: usize,
    pub q: f64,
    pub rule: BhRule,
}

impl Default for InterestOptions {
    fn default() -> Self {
        InterestOptions {
            min_count: DEFAULT_MIN_COUNT,
            q: DEFAULT_Q,
            rule: BhRule::Standard,
        }
    }
}

/// Builds the tables, tests each one and applies FDR control. Output is
/// sorted by ascending p-value, then by interest.
pub fn test_interests(
    corpus: &Corpus,
    labels: &Labels,
    options: &InterestOptions,
) -> Vec<InterestTest> {
    let tables = build_tables(corpus, labels, options.min_count);
    let n = tables.first().map_or(0, |t| t.table.n() as usize);
    let cache = LogFactorials::new(n);
    let p_values: Vec<f64> = tables
        .par_iter()
        .map(|t| cache.fisher_two_sided(&t.table))
        .collect();
    let mask = bh_fdr_with(&p_values, options.q, options.rule);
    let mut tests: Vec<InterestTest> = tables
        .into_iter()
        .zip(p_values)
        .zip(mask)
        .map(|((t, p_value), significant)| InterestTest {
            indicativeness: indicativeness(&t.table),
            interest: t.interest,
            table: t.table,
            p_value,
            significant,
        })
        .collect();
    tests.sort_by(|x, y| {
        x.p_value
            .total_cmp(&y.p_value)
            .then_with(|| x.interest.cmp(&y.interest))
    });
    tests
}
