//! Lexicon scoring of blog entries and threshold labelling of users.

mod stem;

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stem::{stem, stem_to_fixpoint, Stemmer};

use crate::corpus::{Corpus, DrugLexicon, UserProfile};

pub const DEFAULT_THRESHOLD: f64 = 8.0;

/// Splits text into maximal runs of letters and digits, lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub threshold: f64,
    /// Require `total > threshold` instead of `total >= threshold`.
    pub strict: bool,
    pub stemmer: Stemmer,
    /// When set, a matched phrase cancels the contributions of its own words.
    pub phrase_suppresses_words: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            threshold: DEFAULT_THRESHOLD,
            strict: false,
            stemmer: Stemmer::Russian,
            phrase_suppresses_words: false,
        }
    }
}

impl ScoreOptions {
    pub fn crosses(&self, total: f64) -> bool {
        if self.strict {
            total > self.threshold
        } else {
            total >= self.threshold
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermHit {
    pub surface: String,
    pub occurrences: usize,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhraseHit {
    pub phrase_id: usize,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryScore {
    pub entry_index: usize,
    pub term_hits: Vec<TermHit>,
    pub phrase_hits: Vec<PhraseHit>,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UserScore {
    pub user_id: String,
    pub entry_scores: Vec<EntryScore>,
    pub total_weight: f64,
    pub is_infectious: bool,
}

/// A lexicon compiled against a stemmer.
pub struct Scorer<'a> {
    lexicon: &'a DrugLexicon,
    options: ScoreOptions,
    term_stems: Vec<String>,
    by_stem: HashMap<String, Vec<usize>>,
    phrase_stems: Vec<Vec<String>>,
}

impl<'a> Scorer<'a> {
    pub fn new(lexicon: &'a DrugLexicon, options: ScoreOptions) -> Self {
        let stemmer = options.stemmer;
        let term_stems: Vec<String> = lexicon
            .terms()
            .iter()
            .map(|t| stemmer.stem(&t.surface))
            .collect();
        let mut by_stem: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, s) in term_stems.iter().enumerate() {
            by_stem.entry(s.clone()).or_default().push(i);
        }
        let phrase_stems = lexicon
            .phrases()
            .iter()
            .map(|p| {
                let mut stems: Vec<String> = p.words.iter().map(|w| stemmer.stem(w)).collect();
                stems.sort();
                stems.dedup();
                stems
            })
            .collect();
        Scorer {
            lexicon,
            options,
            term_stems,
            by_stem,
            phrase_stems,
        }
    }

    pub fn options(&self) -> &ScoreOptions {
        &self.options
    }

    pub fn score_entry(&self, entry_index: usize, text: &str) -> EntryScore {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for token in tokenize(text) {
            *counts.entry(self.options.stemmer.stem(&token)).or_default() += 1;
        }

        let mut phrase_hits = Vec::new();
        let mut suppressed: HashSet<&str> = HashSet::new();
        for (id, stems) in self.phrase_stems.iter().enumerate() {
            if stems.iter().all(|s| counts.contains_key(s)) {
                phrase_hits.push(PhraseHit {
                    phrase_id: id,
                    contribution: self.lexicon.phrases()[id].weight,
                });
                if self.options.phrase_suppresses_words {
                    suppressed.extend(stems.iter().map(String::as_str));
                }
            }
        }

        let mut matched: Vec<(usize, usize)> = counts
            .iter()
            .filter(|(s, _)| !suppressed.contains(s.as_str()))
            .filter_map(|(s, &n)| self.by_stem.get(s).map(|ids| (ids, n)))
            .flat_map(|(ids, n)| ids.iter().map(move |&i| (i, n)))
            .collect();
        matched.sort_unstable();
        let term_hits: Vec<TermHit> = matched
            .into_iter()
            .map(|(i, n)| {
                let term = &self.lexicon.terms()[i];
                TermHit {
                    surface: term.surface.clone(),
                    occurrences: n,
                    contribution: term.weight * n as f64,
                }
            })
            .collect();

        let total = term_hits.iter().map(|h| h.contribution).sum::<f64>()
            + phrase_hits.iter().map(|h| h.contribution).sum::<f64>();
        EntryScore {
            entry_index,
            term_hits,
            phrase_hits,
            total,
        }
    }

    pub fn score_user(&self, profile: &UserProfile) -> UserScore {
        let entry_scores: Vec<EntryScore> = profile
            .entries
            .iter()
            .enumerate()
            .map(|(i, text)| self.score_entry(i, text))
            .collect();
        let total_weight = entry_scores.iter().map(|e| e.total).sum();
        UserScore {
            user_id: profile.user_id.clone(),
            entry_scores,
            total_weight,
            is_infectious: self.options.crosses(total_weight),
        }
    }

    /// Scores every user, in corpus order.
    pub fn score_corpus(&self, corpus: &Corpus) -> Vec<UserScore> {
        corpus
            .users()
            .par_iter()
            .map(|u| self.score_user(u))
            .collect()
    }

    /// Stem of term `i`; exposed for generators that must avoid collisions.
    pub fn term_stem(&self, i: usize) -> &str {
        &self.term_stems[i]
    }

    pub fn is_lexicon_stem(&self, stem: &str) -> bool {
        self.by_stem.contains_key(stem)
    }
}

pub fn score_entry(text: &str, lexicon: &DrugLexicon) -> EntryScore {
    Scorer::new(lexicon, ScoreOptions::default()).score_entry(0, text)
}

pub fn score_user(profile: &UserProfile, lexicon: &DrugLexicon, options: ScoreOptions) -> UserScore {
    Scorer::new(lexicon, options).score_user(profile)
}

/// Infectious / unlabeled flags aligned with corpus order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    infectious: Vec<bool>,
}

impl Labels {
    pub fn from_flags(infectious: Vec<bool>) -> Self {
        Labels { infectious }
    }

    pub fn from_scores(scores: &[UserScore]) -> Self {
        Labels {
            infectious: scores.iter().map(|s| s.is_infectious).collect(),
        }
    }

    /// Marks the given ids as infectious; unknown ids are ignored.
    pub fn from_ids<'s>(corpus: &Corpus, ids: impl IntoIterator<Item = &'s str>) -> Self {
        let mut infectious = vec![false; corpus.len()];
        for id in ids {
            if let Some(i) = corpus.position(id) {
                infectious[i] = true;
            }
        }
        Labels { infectious }
    }

    pub fn is_infectious(&self, index: usize) -> bool {
        self.infectious[index]
    }

    pub fn flags(&self) -> &[bool] {
        &self.infectious
    }

    pub fn len(&self) -> usize {
        self.infectious.len()
    }

    pub fn is_empty(&self) -> bool {
        self.infectious.is_empty()
    }

    pub fn infectious_count(&self) -> usize {
        self.infectious.iter().filter(|&&f| f).count()
    }

    pub fn infectious_fraction(&self) -> f64 {
        if self.infectious.is_empty() {
            0.0
        } else {
            self.infectious_count() as f64 / self.infectious.len() as f64
        }
    }

    pub fn infectious_ids<'c>(&'c self, corpus: &'c Corpus) -> impl Iterator<Item = &'c str> {
        corpus
            .users()
            .iter()
            .zip(&self.infectious)
            .filter(|(_, &f)| f)
            .map(|(u, _)| u.user_id.as_str())
    }
}

pub fn label_population(corpus: &Corpus, lexicon: &DrugLexicon, options: ScoreOptions) -> Labels {
    Labels::from_scores(&Scorer::new(lexicon, options).score_corpus(corpus))
}

/// User counts per integer weight bucket `floor(total)`, dense from 0 to the
/// largest observed bucket.
pub fn weight_histogram(scores: &[UserScore]) -> Vec<(u64, usize)> {
    let mut buckets: BTreeMap<u64, usize> = BTreeMap::new();
    for s in scores {
        *buckets.entry(s.total_weight.floor() as u64).or_default() += 1;
    }
    let Some(&max) = buckets.keys().next_back() else {
        return Vec::new();
    };
    (0..=max)
        .map(|b| (b, buckets.get(&b).copied().unwrap_or(0)))
        .collect()
}
