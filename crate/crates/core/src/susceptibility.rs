//! Naive Bayes susceptibility model over significant-interest features.
//!
//! A non-infectious user is susceptible when
//! `log P(D)/P(¬D) + Σ_i log P(F_i | D)/P(F_i | ¬D) > 0`, with the sum over
//! every feature in the model.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, UserProfile};
use crate::error::{Error, Result};
use crate::scorer::Labels;

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Which feature values enter the score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Held features use the true-ratio, missing ones the false-ratio.
    #[default]
    Both,
    /// Only held features contribute.
    HeldOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureRatios {
    pub interest: String,
    pub p_true_given_d: f64,
    pub p_true_given_rest: f64,
    /// `ln P(F=1|D) - ln P(F=1|¬D)`
    pub log_ratio_true: f64,
    /// `ln P(F=0|D) - ln P(F=0|¬D)`
    pub log_ratio_false: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NbModel {
    pub features: Vec<FeatureRatios>,
    pub log_prior_ratio: f64,
    pub alpha: f64,
    pub polarity: Polarity,
}

impl NbModel {
    /// Builds a model from already-estimated probabilities.
    pub fn from_probabilities(
        prior_d: f64,
        features: &[(String, f64, f64)],
        alpha: f64,
        polarity: Polarity,
    ) -> Self {
        NbModel {
            log_prior_ratio: prior_d.ln() - (1.0 - prior_d).ln(),
            features: features
                .iter()
                .map(|(name, pd, pr)| ratios(name.clone(), *pd, *pr))
                .collect(),
            alpha,
            polarity,
        }
    }

    pub fn k(&self) -> usize {
        self.features.len()
    }

    /// Left-hand side of the decision inequality.
    pub fn llr_score(&self, interests: &BTreeSet<String>) -> f64 {
        self.log_prior_ratio
            + self
                .features
                .iter()
                .map(|f| {
                    if interests.contains(&f.interest) {
                        f.log_ratio_true
                    } else {
                        match self.polarity {
                            Polarity::Both => f.log_ratio_false,
                            Polarity::HeldOnly => 0.0,
                        }
                    }
                })
                .sum::<f64>()
    }
}

fn ratios(interest: String, p_d: f64, p_rest: f64) -> FeatureRatios {
    FeatureRatios {
        interest,
        p_true_given_d: p_d,
        p_true_given_rest: p_rest,
        log_ratio_true: p_d.ln() - p_rest.ln(),
        log_ratio_false: (1.0 - p_d).ln() - (1.0 - p_rest).ln(),
    }
}

/// Fits on users with at least one interest. Feature probabilities use
/// add-`alpha` smoothing: `(count + α) / (class size + 2α)`.
pub fn fit_nb(
    corpus: &Corpus,
    labels: &Labels,
    significant: &[String],
    alpha: f64,
    polarity: Polarity,
) -> Result<NbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("smoothing alpha must be > 0, got {alpha}")));
    }
    let features: Vec<String> = significant
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut d_size = 0u64;
    let mut rest_size = 0u64;
    let mut d_counts = vec![0u64; features.len()];
    let mut rest_counts = vec![0u64; features.len()];
    for (i, user) in corpus.users().iter().enumerate() {
        if !user.has_interests() {
            continue;
        }
        let (size, counts) = if labels.is_infectious(i) {
            (&mut d_size, &mut d_counts)
        } else {
            (&mut rest_size, &mut rest_counts)
        };
        *size += 1;
        for (f, name) in features.iter().enumerate() {
            if user.interests.contains(name) {
                counts[f] += 1;
            }
        }
    }
    if d_size == 0 || rest_size == 0 {
        return Err(Error::Model(format!(
            "need interest-bearing users in both classes (infectious {d_size}, rest {rest_size})"
        )));
    }
    let n = (d_size + rest_size) as f64;
    let smooth = |count: u64, size: u64| (count as f64 + alpha) / (size as f64 + 2.0 * alpha);
    let prior_d = d_size as f64 / n;
    Ok(NbModel {
        log_prior_ratio: prior_d.ln() - (1.0 - prior_d).ln(),
        features: features
            .into_iter()
            .enumerate()
            .map(|(f, name)| {
                ratios(
                    name,
                    smooth(d_counts[f], d_size),
                    smooth(rest_counts[f], rest_size),
                )
            })
            .collect(),
        alpha,
        polarity,
    })
}

pub fn llr_score(model: &NbModel, interests: &BTreeSet<String>) -> f64 {
    model.llr_score(interests)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Infectious,
    Susceptible,
    Immune,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Infectious, Group::Susceptible, Group::Immune];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Infectious => "infectious",
            Group::Susceptible => "susceptible",
            Group::Immune => "immune",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "infectious" => Ok(Group::Infectious),
            "susceptible" => Ok(Group::Susceptible),
            "immune" => Ok(Group::Immune),
            other => Err(Error::Config(format!("unknown group `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriLabel {
    pub user_id: String,
    pub label: Group,
    pub score: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GroupSizes {
    pub infectious: usize,
    pub susceptible: usize,
    pub immune: usize,
}

impl GroupSizes {
    pub fn of(labels: &[TriLabel]) -> Self {
        let mut s = GroupSizes::default();
        for l in labels {
            match l.label {
                Group::Infectious => s.infectious += 1,
                Group::Susceptible => s.susceptible += 1,
                Group::Immune => s.immune += 1,
            }
        }
        s
    }
}

fn classify(model: &NbModel, user: &UserProfile, infectious: bool) -> TriLabel {
    if infectious {
        return TriLabel {
            user_id: user.user_id.clone(),
            label: Group::Infectious,
            score: None,
        };
    }
    let score = model.llr_score(&user.interests);
    let label = if user.has_interests() && score > 0.0 {
        Group::Susceptible
    } else {
        Group::Immune
    };
    TriLabel {
        user_id: user.user_id.clone(),
        label,
        score: Some(score),
    }
}

/// Infectious users pass through; the others are susceptible when their
/// score is strictly positive. Users without interests are immune.
pub fn tri_partition(corpus: &Corpus, labels: &Labels, model: &NbModel) -> Vec<TriLabel> {
    corpus
        .users()
        .par_iter()
        .enumerate()
        .map(|(i, u)| classify(model, u, labels.is_infectious(i)))
        .collect()
}
