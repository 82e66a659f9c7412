//! Data model and line formats for crawled profiles and drug lexicons.
//!
//! A profile file is UTF-8 JSON Lines: one user object per line with the
//! exact lowercase keys `id`, `entries`, `interests`, `followers`,
//! `following` and the optional `birth_date` (ISO-8601) and `location`.
//! An optional first line `{"corpus_meta": {...}}` carries the crawl date
//! and source label.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ENTRIES: usize = 25;

/// Reported ages above this are treated as false and dropped.
pub const MAX_PLAUSIBLE_AGE: u32 = 80;

pub const DEFAULT_OFFICIAL_WEIGHT: f64 = 5.0;
pub const DEFAULT_SLANG_WEIGHT: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    #[serde(rename = "id")]
    pub user_id: String,
    /// Blog entries in posting order, oldest first.
    pub entries: Vec<String>,
    pub interests: BTreeSet<String>,
    pub followers: BTreeSet<String>,
    pub following: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>) -> Self {
        UserProfile {
            user_id: user_id.into(),
            entries: Vec::new(),
            interests: BTreeSet::new(),
            followers: BTreeSet::new(),
            following: BTreeSet::new(),
            birth_date: None,
            location: None,
        }
    }

    pub fn has_interests(&self) -> bool {
        !self.interests.is_empty()
    }

    /// Case-folds interests, truncates entries to the newest `max_entries`
    /// and drops self-loops. Returns the number of self-loops removed.
    fn normalize(&mut self, max_entries: usize) -> usize {
        self.interests = std::mem::take(&mut self.interests)
            .into_iter()
            .filter_map(|i| normalize_interest(&i))
            .collect();
        if self.entries.len() > max_entries {
            let excess = self.entries.len() - max_entries;
            self.entries.drain(..excess);
        }
        let mut loops = 0;
        if self.followers.remove(&self.user_id) {
            loops += 1;
        }
        if self.following.remove(&self.user_id) {
            loops += 1;
        }
        loops
    }
}

pub fn normalize_interest(raw: &str) -> Option<String> {
    let folded = raw.trim().to_lowercase();
    if folded.is_empty() {
        None
    } else {
        Some(folded)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crawl_date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CorpusMeta {
    fn is_empty(&self) -> bool {
        self.crawl_date.is_none() && self.source.is_none()
    }
}

/// Counters for repairs applied while loading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub self_loops_removed: usize,
    pub users_truncated: usize,
}

/// A loaded, normalized and immutable collection of profiles.
#[derive(Clone, Debug)]
pub struct Corpus {
    users: Vec<UserProfile>,
    index: HashMap<String, usize>,
    meta: CorpusMeta,
    load_stats: LoadStats,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.users == other.users && self.meta == other.meta
    }
}

impl Corpus {
    pub fn new(users: Vec<UserProfile>, meta: CorpusMeta) -> Result<Self> {
        Self::with_max_entries(users, meta, DEFAULT_MAX_ENTRIES)
    }

    pub fn with_max_entries(
        mut users: Vec<UserProfile>,
        meta: CorpusMeta,
        max_entries: usize,
    ) -> Result<Self> {
        let mut stats = LoadStats::default();
        let mut index = HashMap::with_capacity(users.len());
        for (i, user) in users.iter_mut().enumerate() {
            if user.user_id.is_empty() {
                return Err(Error::MalformedRecord {
                    line: i + 1,
                    message: "empty user id".into(),
                });
            }
            if user.entries.len() > max_entries {
                stats.users_truncated += 1;
            }
            stats.self_loops_removed += user.normalize(max_entries);
            if index.insert(user.user_id.clone(), i).is_some() {
                return Err(Error::DuplicateUser(user.user_id.clone()));
            }
        }
        Ok(Corpus {
            users,
            index,
            meta,
            load_stats: stats,
        })
    }

    pub fn users(&self) -> &[UserProfile] {
        &self.users
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn meta(&self) -> &CorpusMeta {
        &self.meta
    }

    pub fn load_stats(&self) -> LoadStats {
        self.load_stats
    }

    pub fn get(&self, user_id: &str) -> Option<&UserProfile> {
        self.index.get(user_id).map(|&i| &self.users[i])
    }

    pub fn position(&self, user_id: &str) -> Option<usize> {
        self.index.get(user_id).copied()
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.index.contains_key(user_id)
    }

    /// Users with at least one interest; the population for the interest
    /// statistics and the classifier.
    pub fn interest_bearing(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.iter().filter(|u| u.has_interests())
    }

    /// Serializes to the profile line format.
    pub fn to_lines(&self) -> Result<String> {
        let mut out = String::new();
        if !self.meta.is_empty() {
            let header = MetaLine {
                corpus_meta: self.meta.clone(),
            };
            out.push_str(&serde_json::to_string(&header)?);
            out.push('\n');
        }
        for user in &self.users {
            out.push_str(&serde_json::to_string(user)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_lines(text: &str, max_entries: usize) -> Result<Self> {
        let mut meta = CorpusMeta::default();
        let mut users = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if users.is_empty() && trimmed.contains("\"corpus_meta\"") {
                if let Ok(header) = serde_json::from_str::<MetaLine>(trimmed) {
                    meta = header.corpus_meta;
                    continue;
                }
            }
            let user: UserProfile =
                serde_json::from_str(trimmed).map_err(|e| Error::MalformedRecord {
                    line: line_no,
                    message: e.to_string(),
                })?;
            if user.user_id.is_empty() {
                return Err(Error::MalformedRecord {
                    line: line_no,
                    message: "empty user id".into(),
                });
            }
            if !seen.insert(user.user_id.clone()) {
                return Err(Error::DuplicateUser(user.user_id));
            }
            users.push(user);
        }
        Corpus::with_max_entries(users, meta, max_entries)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    corpus_meta: CorpusMeta,
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Corpus> {
    load_profiles_with(path, DEFAULT_MAX_ENTRIES)
}

pub fn load_profiles_with(path: impl AsRef<Path>, max_entries: usize) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_lines(&text, max_entries)
}

pub fn save_profiles(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus.to_lines()?).map_err(|e| Error::io(path, e))
}

/// Whole years between `birth` and `on`, or `None` when the birth date is
/// after `on` or the age exceeds [`MAX_PLAUSIBLE_AGE`].
pub fn age_on(birth: NaiveDate, on: NaiveDate) -> Option<u32> {
    if birth > on {
        return None;
    }
    let mut years = on.year() - birth.year();
    if (on.month(), on.day()) < (birth.month(), birth.day()) {
        years -= 1;
    }
    let years = u32::try_from(years).ok()?;
    (years <= MAX_PLAUSIBLE_AGE).then_some(years)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub users: usize,
    pub users_with_interests: usize,
    pub users_with_age: usize,
    /// Distinct follower/following ids that are not crawled users.
    pub dangling_ids: usize,
    pub issues: Vec<String>,
}

pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    validate_corpus_with(corpus, DEFAULT_MAX_ENTRIES)
}

pub fn validate_corpus_with(corpus: &Corpus, max_entries: usize) -> ValidationReport {
    let mut report = ValidationReport {
        users: corpus.len(),
        ..Default::default()
    };
    let mut dangling = HashSet::new();
    for user in corpus.users() {
        if user.has_interests() {
            report.users_with_interests += 1;
        }
        if let (Some(birth), Some(crawl)) = (user.birth_date, corpus.meta().crawl_date) {
            if age_on(birth, crawl).is_some() {
                report.users_with_age += 1;
            }
        }
        for id in user.followers.iter().chain(&user.following) {
            if !corpus.contains(id) {
                dangling.insert(id.as_str());
            }
        }
        if user.entries.len() > max_entries {
            report.issues.push(format!(
                "{}: {} entries exceed limit {max_entries}",
                user.user_id,
                user.entries.len()
            ));
        }
        if user.followers.contains(&user.user_id) || user.following.contains(&user.user_id) {
            report.issues.push(format!("{}: self-loop", user.user_id));
        }
        if user
            .interests
            .iter()
            .any(|i| normalize_interest(i).as_deref() != Some(i.as_str()))
        {
            report
                .issues
                .push(format!("{}: interest not case-folded", user.user_id));
        }
    }
    report.dangling_ids = dangling.len();
    report
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "users                {}", self.users);
        let _ = writeln!(s, "with interests       {}", self.users_with_interests);
        let _ = writeln!(s, "with plausible age   {}", self.users_with_age);
        let _ = writeln!(s, "dangling neighbor ids {}", self.dangling_ids);
        let _ = write!(s, "issues               {}", self.issues.len());
        f.write_str(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Official,
    Slang,
}

impl TermKind {
    pub fn default_weight(self) -> f64 {
        match self {
            TermKind::Official => DEFAULT_OFFICIAL_WEIGHT,
            TermKind::Slang => DEFAULT_SLANG_WEIGHT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub surface: String,
    pub weight: f64,
    pub kind: TermKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phrase {
    /// Distinct, case-folded surface forms, sorted.
    pub words: Vec<String>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrugLexicon {
    terms: Vec<Term>,
    phrases: Vec<Phrase>,
}

#[derive(Deserialize)]
struct RawLexicon {
    #[serde(default)]
    terms: Vec<RawTerm>,
    #[serde(default)]
    phrases: Vec<RawPhrase>,
}

#[derive(Deserialize)]
struct RawTerm {
    surface: String,
    kind: TermKind,
    weight: Option<f64>,
}

#[derive(Deserialize)]
struct RawPhrase {
    words: Vec<String>,
    weight: Option<f64>,
}

const TOY_LEXICON: &str = include_str!("../data/toy_lexicon.json");

impl DrugLexicon {
    /// Validates and applies weight defaults.
    pub fn new(
        terms: Vec<(String, TermKind, Option<f64>)>,
        phrases: Vec<(Vec<String>, Option<f64>)>,
    ) -> Result<Self> {
        let mut out_terms: Vec<Term> = Vec::with_capacity(terms.len());
        let mut by_surface: HashMap<String, f64> = HashMap::new();
        for (surface, kind, weight) in terms {
            let surface = surface.trim().to_lowercase();
            if surface.is_empty() {
                return Err(Error::Lexicon("empty term surface form".into()));
            }
            let weight = weight.unwrap_or_else(|| kind.default_weight());
            check_weight(&surface, weight)?;
            if by_surface.insert(surface.clone(), weight).is_some() {
                return Err(Error::Lexicon(format!("duplicate term `{surface}`")));
            }
            out_terms.push(Term {
                surface,
                weight,
                kind,
            });
        }

        let mut out_phrases = Vec::with_capacity(phrases.len());
        for (words, weight) in phrases {
            let mut folded = Vec::with_capacity(words.len());
            for w in words {
                let w = w.trim().to_lowercase();
                if w.is_empty() {
                    return Err(Error::Lexicon("empty phrase word".into()));
                }
                folded.push(w);
            }
            folded.sort();
            folded.dedup();
            if folded.len() < 2 {
                return Err(Error::Lexicon(format!(
                    "phrase {folded:?} needs at least two distinct words"
                )));
            }
            let component_sum: f64 = folded.iter().filter_map(|w| by_surface.get(w)).sum();
            let weight = weight.unwrap_or(component_sum + 1.0);
            let label = folded.join(" ");
            check_weight(&label, weight)?;
            if weight <= component_sum {
                return Err(Error::Lexicon(format!(
                    "phrase `{label}` weight {weight} does not exceed its component sum {component_sum}"
                )));
            }
            out_phrases.push(Phrase {
                words: folded,
                weight,
            });
        }
        Ok(DrugLexicon {
            terms: out_terms,
            phrases: out_phrases,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawLexicon =
            serde_json::from_str(text).map_err(|e| Error::Lexicon(e.to_string()))?;
        DrugLexicon::new(
            raw.terms
                .into_iter()
                .map(|t| (t.surface, t.kind, t.weight))
                .collect(),
            raw.phrases
                .into_iter()
                .map(|p| (p.words, p.weight))
                .collect(),
        )
    }

    /// The small sample lexicon shipped with the crate.
    pub fn toy() -> Self {
        DrugLexicon::from_json(TOY_LEXICON).expect("shipped lexicon is valid")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    /// A copy with every weight multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Self {
        DrugLexicon {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    weight: t.weight * factor,
                    ..t.clone()
                })
                .collect(),
            phrases: self
                .phrases
                .iter()
                .map(|p| Phrase {
                    weight: p.weight * factor,
                    ..p.clone()
                })
                .collect(),
        }
    }
}

fn check_weight(label: &str, weight: f64) -> Result<()> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(Error::Lexicon(format!(
            "`{label}` has nonpositive weight {weight}"
        )))
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<DrugLexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DrugLexicon::from_json(&text)
}
