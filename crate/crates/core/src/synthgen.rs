//! Seeded synthetic corpora with planted ground truth.
//!
//! Friendships grow by preferential attachment, interest popularity follows
//! a Zipf law, planted infectious users write lexicon terms until their
//! score clears the threshold, and planted infectious and susceptible users
//! adopt a designated set of indicative interests with boosted probability.

use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusMeta, DrugLexicon, TermKind, UserProfile, DEFAULT_MAX_ENTRIES};
use crate::error::{Error, Result};
use crate::scorer::{tokenize, ScoreOptions, Scorer, DEFAULT_THRESHOLD};
use crate::susceptibility::Group;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_users: usize,
    /// Edges added per arriving vertex.
    pub attachment_m: usize,
    pub n_interests: usize,
    /// Popularity of the interest at rank r is proportional to r^-exponent.
    pub interest_exponent: f64,
    pub infectious_fraction: f64,
    /// Non-infectious users planted with the indicative interests.
    pub susceptible_fraction: f64,
    /// Expected lexicon weight written by a planted infectious user.
    pub drug_text_rate: f64,
    /// Probability that a planted user adopts each indicative interest.
    pub overlap_boost: f64,
    pub indicative_count: usize,
    /// Popularity rank (0-based) of the first indicative interest.
    pub indicative_offset: usize,
    pub mean_interests: f64,
    pub no_interest_fraction: f64,
    /// Chance that an entry of an unplanted user carries one slang term.
    pub stray_rate: f64,
    pub birth_date_fraction: f64,
    pub max_entries: usize,
    pub threshold: f64,
    pub crawl_date: NaiveDate,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_users: 1000,
            attachment_m: 3,
            n_interests: 400,
            interest_exponent: 1.0,
            infectious_fraction: 0.2,
            susceptible_fraction: 0.05,
            drug_text_rate: 15.0,
            overlap_boost: 0.5,
            indicative_count: 10,
            indicative_offset: 10,
            mean_interests: 6.0,
            no_interest_fraction: 0.35,
            stray_rate: 0.02,
            birth_date_fraction: 0.25,
            max_entries: DEFAULT_MAX_ENTRIES,
            threshold: DEFAULT_THRESHOLD,
            crawl_date: NaiveDate::from_ymd_opt(2012, 9, 9).expect("valid date"),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            ("infectious_fraction", self.infectious_fraction),
            ("susceptible_fraction", self.susceptible_fraction),
            ("overlap_boost", self.overlap_boost),
            ("no_interest_fraction", self.no_interest_fraction),
            ("stray_rate", self.stray_rate),
            ("birth_date_fraction", self.birth_date_fraction),
        ];
        for (name, v) in fractions {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.infectious_fraction + self.susceptible_fraction > 1.0 {
            return Err(Error::Config(
                "infectious and susceptible fractions exceed 1".into(),
            ));
        }
        if self.n_users == 0 {
            return Err(Error::Config("n_users must be positive".into()));
        }
        if self.attachment_m > 0 && self.attachment_m >= self.n_users {
            return Err(Error::Config(format!(
                "attachment_m {} needs more than {} users",
                self.attachment_m, self.n_users
            )));
        }
        if self.drug_text_rate <= self.threshold {
            return Err(Error::Config(format!(
                "drug_text_rate {} must exceed the threshold {}",
                self.drug_text_rate, self.threshold
            )));
        }
        if self.indicative_count > 0
            && self.indicative_offset + self.indicative_count > self.n_interests
        {
            return Err(Error::Config(
                "indicative interests fall outside the interest vocabulary".into(),
            ));
        }
        if !(self.interest_exponent >= 0.0) || !(self.mean_interests >= 1.0) {
            return Err(Error::Config(
                "interest_exponent must be >= 0 and mean_interests >= 1".into(),
            ));
        }
        if self.max_entries == 0 {
            return Err(Error::Config("max_entries must be positive".into()));
        }
        Ok(())
    }

    /// Names of the indicative interests.
    pub fn indicative_interests(&self) -> Vec<String> {
        (self.indicative_offset..self.indicative_offset + self.indicative_count)
            .map(interest_name)
            .collect()
    }
}

pub fn interest_name(rank: usize) -> String {
    format!("topic{rank:04}")
}

pub fn user_id(index: usize) -> String {
    format!("u{index:07}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Planted group per user, corpus order.
    pub planted: Vec<(String, Group)>,
}

impl GroundTruth {
    pub fn ids_in(&self, group: Group) -> BTreeSet<&str> {
        self.planted
            .iter()
            .filter(|(_, g)| *g == group)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_id,planted_label\n");
        for (id, g) in &self.planted {
            out.push_str(id);
            out.push(',');
            out.push_str(g.as_str());
            out.push('\n');
        }
        out
    }
}

/// Undirected preferential-attachment graph: each arriving vertex links to
/// `min(m, i)` distinct earlier vertices chosen proportionally to degree.
pub fn preferential_attachment<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * n * m);
    for i in 1..n {
        let k = m.min(i);
        let mut targets = BTreeSet::new();
        while targets.len() < k {
            let t = if endpoints.is_empty() {
                rng.random_range(0..i)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            adj[i].insert(t);
            adj[t].insert(i);
            endpoints.push(i);
            endpoints.push(t);
        }
    }
    adj
}

const FILLER: &[&str] = &[
    "сегодня", "вчера", "завтра", "утром", "вечером", "город", "дом", "работа", "работы", "друзья",
    "друзей", "погода", "солнце", "дождь", "снег", "море", "лето", "зима", "весна", "осень", "книга",
    "книги", "фильм", "музыка", "песня", "концерт", "кошка", "собака", "машина", "дорога", "поезд",
    "метро", "кофе", "чай", "обед", "ужин", "праздник", "подарок", "семья", "мама", "папа", "сестра",
    "брат", "школа", "университет", "экзамен", "отпуск", "поездка", "фотографии", "новости",
    "интернет", "компьютер", "телефон", "магазин", "деньги", "время", "жизнь", "любовь", "счастье",
    "мысли", "идея", "проект", "встреча", "разговор", "история", "природа", "лес", "река", "парк",
    "улица", "красивый", "хороший", "новый", "старый", "большой", "маленький", "интересный",
    "читать", "писать", "гулять", "думать", "смотреть", "слушать", "играть", "готовить", "и", "в",
    "на", "с", "не", "что", "как", "это", "мы", "я", "он", "она", "они", "очень", "просто",
    "today", "weekend", "photo", "blog", "music", "post", "friends", "travel", "life", "moscow",
];

const CITIES: &[&str] = &[
    "Moscow",
    "Saint Petersburg",
    "Novosibirsk",
    "Yekaterinburg",
    "Kazan",
    "Samara",
    "Omsk",
    "Magadan",
];

/// Cumulative Zipf weights over ranks 0..n.
fn zipf_cumulative(n: usize, exponent: f64) -> Vec<f64> {
    let mut acc = 0.0;
    (0..n)
        .map(|r| {
            acc += ((r + 1) as f64).powf(-exponent);
            acc
        })
        .collect()
}

fn draw_rank<R: Rng>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("nonempty");
    let u = rng.random::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn filler_entry<R: Rng>(vocab: &[&str], rng: &mut R) -> Vec<String> {
    let len = rng.random_range(8..40);
    (0..len)
        .map(|_| vocab[rng.random_range(0..vocab.len())].to_owned())
        .collect()
}

fn insert_word<R: Rng>(entry: &mut Vec<String>, word: &str, rng: &mut R) {
    let at = rng.random_range(0..=entry.len());
    entry.insert(at, word.to_owned());
}

/// Generates a corpus and its planted labels. Identical configurations give
/// identical corpora.
pub fn generate(config: &GenConfig, lexicon: &DrugLexicon) -> Result<(Corpus, GroundTruth)> {
    config.validate()?;
    if lexicon.terms().is_empty() {
        return Err(Error::Config("the lexicon has no terms to plant".into()));
    }
    let n = config.n_users;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let score_options = ScoreOptions {
        threshold: config.threshold,
        ..ScoreOptions::default()
    };
    let scorer = Scorer::new(lexicon, score_options);
    let stemmer = score_options.stemmer;
    let vocab: Vec<&str> = FILLER
        .iter()
        .copied()
        .filter(|w| {
            tokenize(w)
                .iter()
                .all(|t| !scorer.is_lexicon_stem(&stemmer.stem(t)))
        })
        .collect();
    let slang: Vec<&str> = lexicon
        .terms()
        .iter()
        .filter(|t| t.kind == TermKind::Slang)
        .map(|t| t.surface.as_str())
        .collect();

    let ids: Vec<String> = (0..n).map(user_id).collect();
    let adjacency = preferential_attachment(n, config.attachment_m, &mut rng);
    let mut users: Vec<UserProfile> = ids.iter().map(UserProfile::new).collect();
    for (u, neighbors) in adjacency.iter().enumerate() {
        for &v in neighbors.range(u + 1..) {
            let r: f64 = rng.random();
            let (u_follows_v, v_follows_u) = if r < 0.25 {
                (true, true)
            } else if r < 0.625 {
                (true, false)
            } else {
                (false, true)
            };
            if u_follows_v {
                users[u].following.insert(ids[v].clone());
                users[v].followers.insert(ids[u].clone());
            }
            if v_follows_u {
                users[v].following.insert(ids[u].clone());
                users[u].followers.insert(ids[v].clone());
            }
        }
    }

    let n_infectious = (config.infectious_fraction * n as f64).round() as usize;
    let n_susceptible = ((config.susceptible_fraction * n as f64).round() as usize)
        .min(n - n_infectious);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut planted = vec![Group::Immune; n];
    for &i in &order[..n_infectious] {
        planted[i] = Group::Infectious;
    }
    for &i in &order[n_infectious..n_infectious + n_susceptible] {
        planted[i] = Group::Susceptible;
    }

    let cumulative = zipf_cumulative(config.n_interests.max(1), config.interest_exponent);
    let indicative = config.indicative_interests();
    let geometric_p = 1.0 / config.mean_interests;
    for (i, user) in users.iter_mut().enumerate() {
        let is_planted = planted[i] != Group::Immune;
        if config.n_interests > 0
            && (is_planted || rng.random::<f64>() >= config.no_interest_fraction)
        {
            let mut count = 1;
            while count < config.n_interests && rng.random::<f64>() >= geometric_p {
                count += 1;
            }
            for _ in 0..count {
                user.interests.insert(interest_name(draw_rank(&cumulative, &mut rng)));
            }
        }
        if is_planted {
            for name in &indicative {
                if rng.random::<f64>() < config.overlap_boost {
                    user.interests.insert(name.clone());
                }
            }
        }
    }

    for (i, user) in users.iter_mut().enumerate() {
        let n_entries = if rng.random::<f64>() < 0.05 {
            0
        } else {
            rng.random_range(1..=config.max_entries)
        };
        let mut entries: Vec<Vec<String>> =
            (0..n_entries).map(|_| filler_entry(&vocab, &mut rng)).collect();
        if planted[i] == Group::Infectious {
            if entries.is_empty() {
                entries.push(filler_entry(&vocab, &mut rng));
            }
            let target = (config.drug_text_rate * rng.random_range(0.8..1.2)).max(config.threshold);
            let mut scores: Vec<f64> = entries
                .iter()
                .enumerate()
                .map(|(k, e)| scorer.score_entry(k, &e.join(" ")).total)
                .collect();
            while scores.iter().sum::<f64>() < target {
                let k = rng.random_range(0..entries.len());
                let term = &lexicon.terms()[rng.random_range(0..lexicon.terms().len())];
                insert_word(&mut entries[k], &term.surface, &mut rng);
                scores[k] = scorer.score_entry(k, &entries[k].join(" ")).total;
            }
        } else if !slang.is_empty() {
            for entry in entries.iter_mut() {
                if rng.random::<f64>() < config.stray_rate {
                    let word = slang[rng.random_range(0..slang.len())];
                    insert_word(entry, word, &mut rng);
                }
            }
        }
        user.entries = entries.into_iter().map(|e| e.join(" ")).collect();

        if rng.random::<f64>() < config.birth_date_fraction {
            let age: u64 = if rng.random::<f64>() < 0.02 {
                rng.random_range(81..100)
            } else {
                rng.random_range(16..60)
            };
            let days = age * 365 + age / 4 + rng.random_range(0..365);
            user.birth_date = config.crawl_date.checked_sub_days(Days::new(days));
        }
        if rng.random::<f64>() < 0.5 {
            user.location = Some(CITIES[rng.random_range(0..CITIES.len())].to_owned());
        }
    }

    let meta = CorpusMeta {
        crawl_date: Some(config.crawl_date),
        source: Some(format!("synthetic seed={}", config.seed)),
    };
    let corpus = Corpus::with_max_entries(users, meta, config.max_entries)?;
    let truth = GroundTruth {
        planted: ids.into_iter().zip(planted).collect(),
    };
    Ok((corpus, truth))
}
