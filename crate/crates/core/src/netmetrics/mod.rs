//! Social graph construction, induced subnetworks, degree and age
//! statistics, and power-law summaries per group.

pub mod powerlaw;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use powerlaw::{
    fit_power_law, gof_pvalue, hurwitz_zeta, DiscretePowerLaw, PowerLawFit, DEFAULT_REPS,
};

use crate::corpus::{age_on, Corpus};
use crate::susceptibility::{Group, TriLabel};

/// Undirected graph over crawled users. Vertex `i` is corpus position `i`
/// (or the `i`-th member for induced subgraphs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SocialGraph {
    ids: Vec<String>,
    adjacency: Vec<Vec<u32>>,
}

impl SocialGraph {
    /// Neighbors are the union of followers and following in both
    /// directions, restricted to crawled users.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let n = corpus.len();
        let mut sets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        for (i, user) in corpus.users().iter().enumerate() {
            for other in user.followers.iter().chain(&user.following) {
                if let Some(j) = corpus.position(other) {
                    if j != i {
                        sets[i].insert(j as u32);
                        sets[j].insert(i as u32);
                    }
                }
            }
        }
        SocialGraph {
            ids: corpus.users().iter().map(|u| u.user_id.clone()).collect(),
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<u64> {
        self.adjacency.iter().map(|a| a.len() as u64).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.adjacency.iter().map(Vec::len).max()
    }

    /// Subgraph on `members` (vertex indices of this graph), keeping the
    /// given order.
    pub fn induced(&self, members: &[usize]) -> SocialGraph {
        let remap: HashMap<u32, u32> = members
            .iter()
            .enumerate()
            .map(|(new, &old)| (old as u32, new as u32))
            .collect();
        SocialGraph {
            ids: members.iter().map(|&m| self.ids[m].clone()).collect(),
            adjacency: members
                .iter()
                .map(|&m| {
                    let mut adj: Vec<u32> = self.adjacency[m]
                        .iter()
                        .filter_map(|v| remap.get(v).copied())
                        .collect();
                    adj.sort_unstable();
                    adj
                })
                .collect(),
        }
    }
}

pub fn induced_subnetwork(graph: &SocialGraph, members: &[usize]) -> SocialGraph {
    graph.induced(members)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    /// Distinct crawled neighbors, whichever side listed the tie.
    #[default]
    Union,
    /// Crawled followers plus crawled following from the user's own lists;
    /// mutual ties count twice.
    Sum,
}

/// Degree per user in corpus order.
pub fn degree_sequence(corpus: &Corpus, mode: DegreeMode) -> Vec<(String, u64)> {
    match mode {
        DegreeMode::Union => {
            let g = SocialGraph::from_corpus(corpus);
            g.ids.iter().cloned().zip(g.degrees()).collect()
        }
        DegreeMode::Sum => corpus
            .users()
            .iter()
            .map(|u| {
                let crawled = |set: &BTreeSet<String>| {
                    set.iter().filter(|id| corpus.contains(id)).count() as u64
                };
                (u.user_id.clone(), crawled(&u.followers) + crawled(&u.following))
            })
            .collect(),
    }
}

/// Number of users mentioning each distinct interest, largest first.
pub fn interest_frequency_distribution(corpus: &Corpus) -> Vec<u64> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for user in corpus.users() {
        for i in &user.interests {
            *counts.entry(i.as_str()).or_default() += 1;
        }
    }
    let mut v: Vec<u64> = counts.into_values().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// `(rank, value)` pairs with values sorted in decreasing order.
pub fn rank_frequency(values: &[u64]) -> Vec<(usize, u64)> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AgeStats {
    pub count: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation.
    pub std: Option<f64>,
    pub histogram: BTreeMap<u32, usize>,
}

impl AgeStats {
    fn from_ages(ages: &[u32]) -> Self {
        let mut histogram = BTreeMap::new();
        for &a in ages {
            *histogram.entry(a).or_default() += 1;
        }
        let count = ages.len();
        let mean = (count > 0).then(|| ages.iter().map(|&a| a as f64).sum::<f64>() / count as f64);
        let std = mean.filter(|_| count > 1).map(|m| {
            let ss: f64 = ages.iter().map(|&a| (a as f64 - m).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        });
        AgeStats {
            count,
            mean,
            std,
            histogram,
        }
    }
}

/// Row label for the whole network in per-group tables.
pub const TOTAL: &str = "total";

fn group_members(labels: &[TriLabel], group: Option<Group>) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, l)| group.is_none_or(|g| l.label == g))
        .map(|(i, _)| i)
        .collect()
}

fn row_groups() -> [(&'static str, Option<Group>); 4] {
    [
        (Group::Infectious.as_str(), Some(Group::Infectious)),
        (Group::Susceptible.as_str(), Some(Group::Susceptible)),
        (Group::Immune.as_str(), Some(Group::Immune)),
        (TOTAL, None),
    ]
}

/// Age statistics per group and for the total, measured at `on` (the crawl
/// date). Missing birth dates and ages above 80 are excluded.
pub fn cohort_age_stats(
    corpus: &Corpus,
    labels: &[TriLabel],
    on: Option<NaiveDate>,
) -> Vec<(String, AgeStats)> {
    let ages: Vec<Option<u32>> = corpus
        .users()
        .iter()
        .map(|u| match (u.birth_date, on) {
            (Some(b), Some(d)) => age_on(b, d),
            _ => None,
        })
        .collect();
    row_groups()
        .into_iter()
        .map(|(name, group)| {
            let group_ages: Vec<u32> = group_members(labels, group)
                .into_iter()
                .filter_map(|i| ages[i])
                .collect();
            (name.to_owned(), AgeStats::from_ages(&group_ages))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub network: String,
    pub size: usize,
    pub edges: Option<usize>,
    pub age_mean: Option<f64>,
    pub age_std: Option<f64>,
    pub max_degree: Option<usize>,
    pub gamma: Option<f64>,
    pub x_min: Option<u64>,
    pub p_value: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Bootstrap repetitions; `None` skips the goodness-of-fit test.
    pub gof_reps: Option<usize>,
    pub seed: u64,
}

/// Per-row seed so rows do not share bootstrap streams.
pub fn derive_seed(root: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = root ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Structural characteristics of each group's induced subnetwork and of the
/// whole network.
pub fn network_summary(
    corpus: &Corpus,
    labels: &[TriLabel],
    options: &SummaryOptions,
) -> crate::Result<Vec<SummaryRow>> {
    let graph = SocialGraph::from_corpus(corpus);
    let ages = cohort_age_stats(corpus, labels, corpus.meta().crawl_date);
    let mut rows = Vec::with_capacity(4);
    for (tag, ((name, group), (_, age))) in row_groups().into_iter().zip(ages).enumerate() {
        let members = group_members(labels, group);
        if members.is_empty() {
            rows.push(SummaryRow {
                network: name.to_owned(),
                size: 0,
                edges: None,
                age_mean: None,
                age_std: None,
                max_degree: None,
                gamma: None,
                x_min: None,
                p_value: None,
            });
            continue;
        }
        let sub = graph.induced(&members);
        let positive: Vec<u64> = sub.degrees().into_iter().filter(|&d| d > 0).collect();
        let fit = fit_power_law(&positive).ok();
        let p_value = match (&fit, options.gof_reps) {
            (Some(f), Some(reps)) => Some(gof_pvalue(
                &positive,
                f,
                reps,
                derive_seed(options.seed, tag as u64),
            )?),
            _ => None,
        };
        rows.push(SummaryRow {
            network: name.to_owned(),
            size: members.len(),
            edges: Some(sub.edge_count()),
            age_mean: age.mean,
            age_std: age.std,
            max_degree: sub.max_degree(),
            gamma: fit.as_ref().map(|f| f.gamma),
            x_min: fit.as_ref().map(|f| f.x_min),
            p_value,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusMeta, UserProfile};

    fn corpus(edges: &[(&str, &str)], ids: &[&str]) -> Corpus {
        let mut users: Vec<UserProfile> = ids.iter().map(|&i| UserProfile::new(i)).collect();
        for &(from, to) in edges {
            let u = users.iter_mut().find(|u| u.user_id == from).unwrap();
            u.following.insert(to.to_string());
        }
        Corpus::new(users, CorpusMeta::default()).unwrap()
    }

    #[test]
    fn isolated_and_mutual() {
        let c = corpus(&[("a", "b"), ("b", "a")], &["a", "b", "c"]);
        let d = degree_sequence(&c, DegreeMode::Union);
        assert_eq!(d, vec![("a".into(), 1), ("b".into(), 1), ("c".into(), 0)]);
        let s = degree_sequence(&c, DegreeMode::Sum);
        assert_eq!(s[0].1, 1);
        let g = SocialGraph::from_corpus(&c);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn follower_and_following_of_same_user_count_once() {
        let mut a = UserProfile::new("a");
        a.followers.insert("b".into());
        a.following.insert("b".into());
        let c = Corpus::new(vec![a, UserProfile::new("b")], CorpusMeta::default()).unwrap();
        assert_eq!(degree_sequence(&c, DegreeMode::Union)[0].1, 1);
        assert_eq!(degree_sequence(&c, DegreeMode::Sum)[0].1, 2);
    }

    #[test]
    fn boundary_ids_are_not_vertices() {
        let c = corpus(&[("a", "ghost"), ("a", "b")], &["a", "b"]);
        let g = SocialGraph::from_corpus(&c);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn induced_identity_and_single() {
        let c = corpus(&[("a", "b"), ("b", "c"), ("c", "a")], &["a", "b", "c"]);
        let g = SocialGraph::from_corpus(&c);
        assert_eq!(g.induced(&[0, 1, 2]), g);
        let single = g.induced(&[1]);
        assert_eq!(single.vertex_count(), 1);
        assert_eq!(single.edge_count(), 0);
        let pair = g.induced(&[0, 2]);
        assert_eq!(pair.edge_count(), 1);
    }

    #[test]
    fn interest_frequencies() {
        let empty = corpus(&[], &["a"]);
        assert!(interest_frequency_distribution(&empty).is_empty());
        let users = (0..3)
            .map(|i| {
                let mut u = UserProfile::new(format!("u{i}"));
                u.interests.insert("x".into());
                u
            })
            .collect();
        let c = Corpus::new(users, CorpusMeta::default()).unwrap();
        assert_eq!(interest_frequency_distribution(&c), vec![3]);
    }

    #[test]
    fn ages_exclude_missing_and_implausible() {
        let on = NaiveDate::from_ymd_opt(2012, 9, 9);
        let mut users = Vec::new();
        for (i, birth) in [None, Some((1931, 1, 1)), Some((1980, 1, 1)), Some((1990, 1, 1))]
            .into_iter()
            .enumerate()
        {
            let mut u = UserProfile::new(format!("u{i}"));
            u.birth_date = birth.and_then(|(y, m, d)| NaiveDate::from_ymd_opt(y, m, d));
            users.push(u);
        }
        let c = Corpus::new(users, CorpusMeta::default()).unwrap();
        let labels: Vec<TriLabel> = c
            .users()
            .iter()
            .map(|u| TriLabel {
                user_id: u.user_id.clone(),
                label: Group::Immune,
                score: Some(-1.0),
            })
            .collect();
        let stats = cohort_age_stats(&c, &labels, on);
        let total = &stats.iter().find(|(n, _)| n == TOTAL).unwrap().1;
        assert_eq!(total.count, 2);
        assert_eq!(total.mean, Some(27.0));
        assert_eq!(total.histogram.get(&32), Some(&1));
        let infectious = &stats[0].1;
        assert_eq!(infectious.count, 0);
        assert_eq!(infectious.mean, None);
    }

    #[test]
    fn summary_empty_group_row() {
        let c = corpus(&[("a", "b")], &["a", "b"]);
        let labels: Vec<TriLabel> = c
            .users()
            .iter()
            .map(|u| TriLabel {
                user_id: u.user_id.clone(),
                label: Group::Immune,
                score: Some(-1.0),
            })
            .collect();
        let rows = network_summary(
            &c,
            &labels,
            &SummaryOptions {
                gof_reps: None,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].size, 0);
        assert_eq!(rows[0].edges, None);
        assert_eq!(rows[2].size, 2);
        assert_eq!(rows[3].edges, Some(1));
        assert_eq!(rows.iter().take(3).map(|r| r.size).sum::<usize>(), c.len());
    }
}
