//! End-to-end run: score → label → interest tests → themes →
//! susceptibility → network summary, with CSV reports and a manifest of
//! content digests.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_lexicon, load_profiles_with, Corpus, DrugLexicon, DEFAULT_MAX_ENTRIES};
use crate::error::{Error, Result};
use crate::interest_stats::{test_interests, InterestOptions, InterestTest};
use crate::netmetrics::{
    cohort_age_stats, degree_sequence, fit_power_law, interest_frequency_distribution,
    network_summary, rank_frequency, DegreeMode, PowerLawFit, SocialGraph, SummaryOptions,
    SummaryRow, TOTAL,
};
use crate::scorer::{weight_histogram, Labels, ScoreOptions, Scorer, UserScore};
use crate::susceptibility::{
    fit_nb, tri_partition, Group, GroupSizes, Polarity, TriLabel, DEFAULT_ALPHA,
};
use crate::themes::{build_themes, ClusterOptions, Theme};

pub const MANIFEST: &str = "manifest.json";
pub const SCORES: &str = "scores.csv";
pub const WEIGHT_HISTOGRAM: &str = "weight_histogram.csv";
pub const INTERESTS: &str = "interests.csv";
pub const THEMES: &str = "themes.csv";
pub const TRILABELS: &str = "trilabels.csv";
pub const NETWORK_SUMMARY: &str = "network_summary.csv";
pub const AGE_HISTOGRAM: &str = "age_histogram.csv";
pub const RANK_FREQUENCY: &str = "rank_frequency.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Score,
    Interests,
    Themes,
    Classify,
    Netstats,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Score,
        Stage::Interests,
        Stage::Themes,
        Stage::Classify,
        Stage::Netstats,
    ];

    fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Score => &[],
            Stage::Interests => &[Stage::Score],
            Stage::Themes | Stage::Classify => &[Stage::Score, Stage::Interests],
            Stage::Netstats => &[Stage::Score, Stage::Interests, Stage::Classify],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    /// The bundled toy lexicon is used when absent.
    pub lexicon: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub max_entries: usize,
    pub score: ScoreOptions,
    pub interests: InterestOptions,
    pub clusters: ClusterOptions,
    pub alpha: f64,
    pub polarity: Polarity,
    pub degree_mode: DegreeMode,
    /// Bootstrap repetitions for the goodness-of-fit test; `None` skips it.
    pub gof_reps: Option<usize>,
    pub seed: u64,
    pub stages: BTreeSet<Stage>,
    pub svg: bool,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            corpus: corpus.into(),
            lexicon: None,
            output_dir: output_dir.into(),
            max_entries: DEFAULT_MAX_ENTRIES,
            score: ScoreOptions::default(),
            interests: InterestOptions::default(),
            clusters: ClusterOptions::default(),
            alpha: DEFAULT_ALPHA,
            polarity: Polarity::Both,
            degree_mode: DegreeMode::Union,
            gof_reps: None,
            seed: 0,
            stages: Stage::ALL.into_iter().collect(),
            svg: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.score.threshold.is_finite() && self.score.threshold >= 0.0) {
            return bad(format!("threshold must be finite and >= 0, got {}", self.score.threshold));
        }
        if !(self.interests.q > 0.0 && self.interests.q <= 1.0) {
            return bad(format!("q must lie in (0, 1], got {}", self.interests.q));
        }
        if !(0.0..=1.0).contains(&self.clusters.cut) {
            return bad(format!("cut must lie in [0, 1], got {}", self.clusters.cut));
        }
        if self.clusters.target_count == Some(0) {
            return bad("target cluster count must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.gof_reps == Some(0) {
            return bad("bootstrap repetitions must be positive".into());
        }
        if self.max_entries == 0 {
            return bad("max_entries must be positive".into());
        }
        if self.stages.is_empty() {
            return bad("no stage selected".into());
        }
        Ok(())
    }

    /// Selected stages plus everything they depend on.
    pub fn required_stages(&self) -> BTreeSet<Stage> {
        self.stages
            .iter()
            .flat_map(|s| s.upstream().iter().copied().chain([*s]))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub users: usize,
    pub interest_bearing: usize,
    pub infectious: Option<usize>,
    pub interests_tested: Option<usize>,
    pub significant_interests: Option<usize>,
    pub themes: Option<usize>,
    pub group_sizes: Option<GroupSizesRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSizesRecord {
    pub infectious: usize,
    pub susceptible: usize,
    pub immune: usize,
}

impl From<GroupSizes> for GroupSizesRecord {
    fn from(g: GroupSizes) -> Self {
        GroupSizesRecord {
            infectious: g.infectious,
            susceptible: g.susceptible,
            immune: g.immune,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub error: Option<String>,
    pub seed: u64,
    pub config: PipelineConfig,
    pub files: Vec<FileDigest>,
    pub summary: RunSummary,
}

impl Manifest {
    pub fn digest_of(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.path == name)
            .map(|f| f.sha256.as_str())
    }
}

struct Emitter<'a> {
    dir: &'a Path,
    files: Vec<FileDigest>,
}

impl Emitter<'_> {
    fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push(FileDigest {
            path: name.to_owned(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))
}

pub fn scores_csv(scores: &[UserScore]) -> Result<Vec<u8>> {
    csv_bytes(
        &["user_id", "total_weight", "is_infectious"],
        scores.iter().map(|s| {
            vec![
                s.user_id.clone(),
                num(s.total_weight),
                s.is_infectious.to_string(),
            ]
        }),
    )
}

pub fn weight_histogram_csv(scores: &[UserScore]) -> Result<Vec<u8>> {
    csv_bytes(
        &["weight_bucket", "user_count"],
        weight_histogram(scores)
            .into_iter()
            .map(|(b, c)| vec![b.to_string(), c.to_string()]),
    )
}

pub fn interests_csv(tests: &[InterestTest]) -> Result<Vec<u8>> {
    csv_bytes(
        &["interest", "a", "b", "c", "d", "p_value", "significant", "indicativeness"],
        tests.iter().map(|t| {
            vec![
                t.interest.clone(),
                t.table.a.to_string(),
                t.table.b.to_string(),
                t.table.c.to_string(),
                t.table.d.to_string(),
                num(t.p_value),
                t.significant.to_string(),
                opt_num(t.indicativeness),
            ]
        }),
    )
}

pub fn themes_csv(themes: &[Theme]) -> Result<Vec<u8>> {
    csv_bytes(
        &["theme_id", "interests", "supporters", "prevalence_infectious", "prevalence_rest"],
        themes.iter().map(|t| {
            vec![
                t.theme_id.to_string(),
                t.interests.iter().cloned().collect::<Vec<_>>().join(";"),
                t.supporters.to_string(),
                opt_num(t.prevalence_infectious),
                opt_num(t.prevalence_rest),
            ]
        }),
    )
}

pub fn trilabels_csv(labels: &[TriLabel]) -> Result<Vec<u8>> {
    csv_bytes(
        &["user_id", "label", "score"],
        labels.iter().map(|l| {
            vec![
                l.user_id.clone(),
                l.label.as_str().to_owned(),
                opt_num(l.score),
            ]
        }),
    )
}

pub fn network_summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &[
            "network", "size", "edges", "age_mean", "age_std", "max_degree", "gamma", "x_min",
            "p_value",
        ],
        rows.iter().map(|r| {
            vec![
                r.network.clone(),
                r.size.to_string(),
                r.edges.map(|e| e.to_string()).unwrap_or_default(),
                opt_num(r.age_mean),
                opt_num(r.age_std),
                r.max_degree.map(|e| e.to_string()).unwrap_or_default(),
                opt_num(r.gamma),
                r.x_min.map(|e| e.to_string()).unwrap_or_default(),
                opt_num(r.p_value),
            ]
        }),
    )
}

/// Positive degrees of each group's induced subnetwork; the total network
/// follows `mode`.
fn degree_series(corpus: &Corpus, tri: &[TriLabel], mode: DegreeMode) -> Vec<(String, Vec<u64>)> {
    let graph = SocialGraph::from_corpus(corpus);
    let mut series: Vec<(String, Vec<u64>)> = Group::ALL
        .iter()
        .map(|&g| {
            let members: Vec<usize> = tri
                .iter()
                .enumerate()
                .filter(|(_, l)| l.label == g)
                .map(|(i, _)| i)
                .collect();
            let degrees = graph.induced(&members).degrees();
            (format!("degree:{g}"), degrees)
        })
        .collect();
    let total = degree_sequence(corpus, mode).into_iter().map(|(_, d)| d).collect();
    series.push((format!("degree:{TOTAL}"), total));
    for (_, d) in series.iter_mut() {
        d.retain(|&x| x > 0);
    }
    series
}

fn rank_frequency_csv(series: &[(String, Vec<u64>)]) -> Result<Vec<u8>> {
    let rows = series.iter().flat_map(|(name, values)| {
        rank_frequency(values)
            .into_iter()
            .map(move |(r, f)| vec![name.clone(), r.to_string(), f.to_string()])
    });
    csv_bytes(&["series", "rank", "frequency"], rows)
}

fn age_histogram_csv(corpus: &Corpus, tri: &[TriLabel]) -> Result<Vec<u8>> {
    let stats = cohort_age_stats(corpus, tri, corpus.meta().crawl_date);
    let rows = stats.iter().flat_map(|(group, s)| {
        s.histogram
            .iter()
            .map(move |(age, count)| vec![group.clone(), age.to_string(), count.to_string()])
    });
    csv_bytes(&["group", "age", "count"], rows)
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Paired bars per theme: infectious prevalence beside the rest.
pub fn themes_svg(themes: &[Theme]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}">"#
    );
    let plot_w = SVG_W - 2.0 * MARGIN;
    let plot_h = SVG_H - 2.0 * MARGIN;
    let slot = plot_w / themes.len().max(1) as f64;
    let bar = slot * 0.35;
    for (i, t) in themes.iter().enumerate() {
        let x0 = MARGIN + i as f64 * slot + slot * 0.15;
        for (k, (value, color)) in [
            (t.prevalence_infectious, "#c0392b"),
            (t.prevalence_rest, "#7f8c8d"),
        ]
        .into_iter()
        .enumerate()
        {
            let h = value.unwrap_or(0.0) / 100.0 * plot_h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                x0 + k as f64 * bar,
                SVG_H - MARGIN - h,
                bar,
                h
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            x0 + bar,
            SVG_H - MARGIN + 14.0,
            t.theme_id
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        SVG_H - MARGIN,
        SVG_W - MARGIN
    );
    s.push_str("</svg>\n");
    s
}

/// Log-log rank/frequency points with the fitted law as a dashed segment
/// from `x_min` upward.
pub fn rank_frequency_svg(values: &[u64], fit: Option<&PowerLawFit>) -> String {
    let points = rank_frequency(values);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}">"#
    );
    if let Some(&(max_rank, _)) = points.last() {
        let max_x = (max_rank as f64).ln().max(1e-9);
        let max_y = (points[0].1 as f64).ln().max(1e-9);
        let px = |r: f64| MARGIN + r.ln() / max_x * (SVG_W - 2.0 * MARGIN);
        let py = |f: f64| SVG_H - MARGIN - f.ln() / max_y * (SVG_H - 2.0 * MARGIN);
        for &(r, f) in &points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="black"/>"#,
                px(r as f64),
                py(f as f64)
            );
        }
        if let Some(fit) = fit.filter(|f| f.gamma > 1.0 && f.n_tail > 0) {
            let n_tail = fit.n_tail as f64;
            let at = |r: f64| fit.x_min as f64 * (r / n_tail).powf(-1.0 / (fit.gamma - 1.0));
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#2980b9" stroke-dasharray="6,4"/>"##,
                px(n_tail),
                py(at(n_tail)),
                px(1.0),
                py(at(1.0))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn execute(
    config: &PipelineConfig,
    out: &mut Emitter<'_>,
    summary: &mut RunSummary,
) -> Result<()> {
    config.validate()?;
    let stages = config.required_stages();
    let emit = |s: Stage| config.stages.contains(&s);

    let corpus = load_profiles_with(&config.corpus, config.max_entries)?;
    let lexicon = match &config.lexicon {
        Some(p) => load_lexicon(p)?,
        None => DrugLexicon::toy(),
    };
    summary.users = corpus.len();
    summary.interest_bearing = corpus.interest_bearing().count();

    let scores = Scorer::new(&lexicon, config.score).score_corpus(&corpus);
    let labels = Labels::from_scores(&scores);
    summary.infectious = Some(labels.infectious_count());
    if emit(Stage::Score) {
        out.emit(SCORES, &scores_csv(&scores)?)?;
        out.emit(WEIGHT_HISTOGRAM, &weight_histogram_csv(&scores)?)?;
    }
    if !stages.contains(&Stage::Interests) {
        return Ok(());
    }

    let tests = test_interests(&corpus, &labels, &config.interests);
    let significant: Vec<String> = tests
        .iter()
        .filter(|t| t.significant)
        .map(|t| t.interest.clone())
        .collect();
    summary.interests_tested = Some(tests.len());
    summary.significant_interests = Some(significant.len());
    if emit(Stage::Interests) {
        out.emit(INTERESTS, &interests_csv(&tests)?)?;
    }

    if stages.contains(&Stage::Themes) {
        let (themes, _) = build_themes(&corpus, &labels, &significant, &config.clusters);
        summary.themes = Some(themes.len());
        if emit(Stage::Themes) {
            out.emit(THEMES, &themes_csv(&themes)?)?;
            if config.svg {
                out.emit("themes.svg", themes_svg(&themes).as_bytes())?;
            }
        }
    }

    if !stages.contains(&Stage::Classify) {
        return Ok(());
    }
    let model = fit_nb(&corpus, &labels, &significant, config.alpha, config.polarity)?;
    let tri = tri_partition(&corpus, &labels, &model);
    summary.group_sizes = Some(GroupSizes::of(&tri).into());
    if emit(Stage::Classify) {
        out.emit(TRILABELS, &trilabels_csv(&tri)?)?;
    }

    if emit(Stage::Netstats) {
        let options = SummaryOptions {
            gof_reps: config.gof_reps,
            seed: config.seed,
        };
        let rows = network_summary(&corpus, &tri, &options)?;
        out.emit(NETWORK_SUMMARY, &network_summary_csv(&rows)?)?;
        out.emit(AGE_HISTOGRAM, &age_histogram_csv(&corpus, &tri)?)?;
        let mut series = degree_series(&corpus, &tri, config.degree_mode);
        series.push(("interests".to_owned(), interest_frequency_distribution(&corpus)));
        out.emit(RANK_FREQUENCY, &rank_frequency_csv(&series)?)?;
        if config.svg {
            let total = &series[Group::ALL.len()].1;
            let fit = fit_power_law(total).ok();
            out.emit(
                "rank_frequency.svg",
                rank_frequency_svg(total, fit.as_ref()).as_bytes(),
            )?;
        }
    }
    Ok(())
}

/// Runs the selected stages and writes reports plus `manifest.json` into the
/// output directory. On failure the reports written so far are kept and the
/// manifest is marked incomplete.
pub fn run(config: &PipelineConfig) -> Result<Manifest> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Emitter {
        dir,
        files: Vec::new(),
    };
    let mut summary = RunSummary::default();
    let outcome = execute(config, &mut out, &mut summary);
    let manifest = Manifest {
        complete: outcome.is_ok(),
        error: outcome.as_ref().err().map(ToString::to_string),
        seed: config.seed,
        config: config.clone(),
        files: out.files,
        summary,
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    outcome.map(|()| manifest)
}
