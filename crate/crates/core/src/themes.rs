//! Agglomerative clustering of significant interests into themes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, UserProfile};
use crate::scorer::Labels;

pub const DEFAULT_CUT: f64 = 0.1;

/// Ochiai coefficient `|A ∩ B| / sqrt(|A| |B|)`; zero when either set is
/// empty.
pub fn ochiai<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let shared = small.iter().filter(|x| large.contains(x)).count();
    shared as f64 / ((a.len() as f64) * (b.len() as f64)).sqrt()
}

/// How the similarity of two clusters is derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    /// Ochiai on the union of each cluster's supporter sets.
    #[default]
    Eq1,
    /// Minimum pairwise Ochiai between member interests.
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterOptions {
    pub cut: f64,
    pub linkage: Linkage,
    /// Merge down to exactly this many clusters, ignoring `cut`.
    pub target_count: Option<usize>,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            cut: DEFAULT_CUT,
            linkage: Linkage::Eq1,
            target_count: None,
        }
    }
}

/// One merge step; clusters are named by their lexicographically smallest
/// member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Merge {
    pub left: String,
    pub right: String,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Clustering {
    /// Member lists sorted internally, clusters sorted by first member.
    pub clusters: Vec<Vec<String>>,
    pub merges: Vec<Merge>,
}

struct Cluster<'a> {
    members: Vec<&'a str>,
    supporters: BTreeSet<usize>,
}

pub fn cluster_interests(
    significant: &[String],
    supporters_of: &BTreeMap<String, BTreeSet<usize>>,
    options: &ClusterOptions,
) -> Clustering {
    let empty = BTreeSet::new();
    let names: BTreeSet<&str> = significant.iter().map(String::as_str).collect();
    let mut clusters: Vec<Cluster> = names
        .iter()
        .map(|&name| Cluster {
            members: vec![name],
            supporters: supporters_of.get(name).unwrap_or(&empty).clone(),
        })
        .collect();
    let k = clusters.len();

    // Pairwise interest similarities, kept for complete linkage.
    let base: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| ochiai(&clusters[i].supporters, &clusters[j].supporters))
                .collect()
        })
        .collect();
    let mut sim = base;
    let mut merges = Vec::new();

    loop {
        let n = clusters.len();
        if n < 2 || options.target_count.is_some_and(|t| n <= t) {
            break;
        }
        // Clusters stay ordered by first member, so the first maximum in
        // row-major order is the lexicographically smallest pair.
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                if best.is_none_or(|(_, _, s)| sim[i][j] > s) {
                    best = Some((i, j, sim[i][j]));
                }
            }
        }
        let (i, j, s) = best.expect("at least two clusters");
        if options.target_count.is_none() && s < options.cut {
            break;
        }
        merges.push(Merge {
            left: clusters[i].members[0].to_owned(),
            right: clusters[j].members[0].to_owned(),
            similarity: s,
        });

        let absorbed = clusters.remove(j);
        let row_j = sim.remove(j);
        for row in &mut sim {
            row.remove(j);
        }
        let target = &mut clusters[i];
        target.members.extend(absorbed.members);
        target.members.sort_unstable();
        target.supporters.extend(absorbed.supporters);

        for x in 0..clusters.len() {
            if x == i {
                continue;
            }
            let updated = match options.linkage {
                Linkage::Eq1 => ochiai(&clusters[i].supporters, &clusters[x].supporters),
                Linkage::Complete => {
                    let jx = if x < j { row_j[x] } else { row_j[x + 1] };
                    sim[i][x].min(jx)
                }
            };
            sim[i][x] = updated;
            sim[x][i] = updated;
        }
    }

    Clustering {
        clusters: clusters
            .into_iter()
            .map(|c| c.members.into_iter().map(str::to_owned).collect())
            .collect(),
        merges,
    }
}

/// Percentage of `group` holding at least one of `interests`; absent for an
/// empty group.
pub fn theme_prevalence<'u>(
    interests: &BTreeSet<String>,
    group: impl IntoIterator<Item = &'u UserProfile>,
) -> Option<f64> {
    let mut size = 0usize;
    let mut hits = 0usize;
    for user in group {
        size += 1;
        if user.interests.iter().any(|i| interests.contains(i)) {
            hits += 1;
        }
    }
    (size > 0).then(|| 100.0 * hits as f64 / size as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theme {
    pub theme_id: usize,
    pub interests: BTreeSet<String>,
    pub supporters: usize,
    pub prevalence_infectious: Option<f64>,
    pub prevalence_rest: Option<f64>,
}

/// Supporter sets (corpus positions) for each of `interests`.
pub fn supporters(corpus: &Corpus, interests: &[String]) -> BTreeMap<String, BTreeSet<usize>> {
    let mut map: BTreeMap<String, BTreeSet<usize>> = interests
        .iter()
        .map(|i| (i.clone(), BTreeSet::new()))
        .collect();
    for (idx, user) in corpus.users().iter().enumerate() {
        for interest in &user.interests {
            if let Some(set) = map.get_mut(interest) {
                set.insert(idx);
            }
        }
    }
    map
}

/// Clusters the significant interests and measures theme prevalence among
/// interest-bearing infectious users and the interest-bearing rest.
pub fn build_themes(
    corpus: &Corpus,
    labels: &Labels,
    significant: &[String],
    options: &ClusterOptions,
) -> (Vec<Theme>, Clustering) {
    let support = supporters(corpus, significant);
    let clustering = cluster_interests(significant, &support, options);
    let users = corpus.users();
    let themes = clustering
        .clusters
        .iter()
        .enumerate()
        .map(|(idx, members)| {
            let interests: BTreeSet<String> = members.iter().cloned().collect();
            let supporter_count = members
                .iter()
                .flat_map(|m| support[m].iter())
                .collect::<BTreeSet<_>>()
                .len();
            let infectious = users
                .iter()
                .enumerate()
                .filter(|(i, u)| u.has_interests() && labels.is_infectious(*i))
                .map(|(_, u)| u);
            let rest = users
                .iter()
                .enumerate()
                .filter(|(i, u)| u.has_interests() && !labels.is_infectious(*i))
                .map(|(_, u)| u);
            Theme {
                theme_id: idx + 1,
                supporters: supporter_count,
                prevalence_infectious: theme_prevalence(&interests, infectious),
                prevalence_rest: theme_prevalence(&interests, rest),
                interests,
            }
        })
        .collect();
    (themes, clustering)
}
