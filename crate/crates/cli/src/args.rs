use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lexnet_core::corpus::DEFAULT_MAX_ENTRIES;
use lexnet_core::interest_stats::{BhRule, DEFAULT_MIN_COUNT, DEFAULT_Q};
use lexnet_core::netmetrics::{DegreeMode, DEFAULT_REPS};
use lexnet_core::scorer::{Stemmer, DEFAULT_THRESHOLD};
use lexnet_core::susceptibility::{Polarity, DEFAULT_ALPHA};
use lexnet_core::themes::{Linkage, DEFAULT_CUT};

pub const OUT_DIR_ENV: &str = "LEXNET_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lexnet", version, about = "Find and characterize a drug community in a crawled social network")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic corpus with planted ground truth.
    Gen(GenArgs),
    /// Score every user against the lexicon.
    Score(ScoreCmd),
    /// Test which interests separate the infectious group from the rest.
    Interests(InterestsCmd),
    /// Cluster significant interests into themes.
    Themes(ThemesCmd),
    /// Split the non-infectious users into susceptible and immune.
    Classify(ClassifyCmd),
    /// Network, degree and age statistics per group.
    Netstats(NetstatsCmd),
    /// Run every stage and write all reports.
    Run(RunCmd),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Profile file, one JSON record per line.
    pub corpus: PathBuf,
    /// Lexicon file; the bundled toy lexicon when omitted.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Directory for reports and the manifest.
    #[arg(long, env = OUT_DIR_ENV, default_value = "lexnet-out")]
    pub out_dir: PathBuf,
    /// Blog entries kept per user, newest first.
    #[arg(long, default_value_t = DEFAULT_MAX_ENTRIES)]
    pub max_entries: usize,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Infectious threshold on summed weight.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub theta: f64,
    /// Require the total to exceed the threshold strictly.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = StemmerArg::Russian)]
    pub stemmer: StemmerArg,
    /// A matched phrase replaces the weights of its own words.
    #[arg(long)]
    pub phrase_suppresses_words: bool,
}

#[derive(Debug, Args)]
pub struct InterestArgs {
    /// Keep interests held by more than this many infectious users.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT)]
    pub min_count: usize,
    /// False discovery rate.
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = BhRuleArg::Standard)]
    pub bh_rule: BhRuleArg,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Stop merging once the best similarity falls below this.
    #[arg(long, default_value_t = DEFAULT_CUT)]
    pub cut: f64,
    #[arg(long, value_enum, default_value_t = LinkageArg::Eq1)]
    pub linkage: LinkageArg,
    /// Merge down to this many clusters instead of using the cut.
    #[arg(long)]
    pub target_count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NbArgs {
    /// Additive smoothing.
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = PolarityArg::Both)]
    pub polarity: PolarityArg,
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// Run the bootstrap goodness-of-fit test.
    #[arg(long)]
    pub gof: bool,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    pub reps: usize,
    /// Root seed for every random stream.
    #[arg(long, required_if_eq("gof", "true"))]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = DegreeModeArg::Union)]
    pub degree_mode: DegreeModeArg,
}

#[derive(Debug, Args)]
pub struct ScoreCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
}

#[derive(Debug, Args)]
pub struct InterestsCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    pub interests: InterestArgs,
}

#[derive(Debug, Args)]
pub struct ThemesCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    pub interests: InterestArgs,
    #[command(flatten)]
    pub clusters: ClusterArgs,
    /// Also write an SVG chart.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    pub interests: InterestArgs,
    #[command(flatten)]
    pub nb: NbArgs,
}

#[derive(Debug, Args)]
pub struct NetstatsCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    pub interests: InterestArgs,
    #[command(flatten)]
    pub nb: NbArgs,
    #[command(flatten)]
    pub net: NetArgs,
    /// Also write an SVG rank/frequency plot.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct RunCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub score: ScoreArgs,
    #[command(flatten)]
    pub interests: InterestArgs,
    #[command(flatten)]
    pub clusters: ClusterArgs,
    #[command(flatten)]
    pub nb: NbArgs,
    #[command(flatten)]
    pub net: NetArgs,
    /// Also write SVG charts.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    /// Directory for corpus.jsonl and ground_truth.csv.
    #[arg(long, env = OUT_DIR_ENV, default_value = "lexnet-out")]
    pub out_dir: PathBuf,
    /// Lexicon whose terms are planted; the bundled toy lexicon when omitted.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub users: usize,
    #[arg(long, default_value_t = 3)]
    pub attachment_m: usize,
    #[arg(long, default_value_t = 400)]
    pub interests: usize,
    #[arg(long, default_value_t = 1.0)]
    pub interest_exponent: f64,
    #[arg(long, default_value_t = 0.2)]
    pub infectious_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    pub susceptible_fraction: f64,
    #[arg(long, default_value_t = 15.0)]
    pub drug_text_rate: f64,
    #[arg(long, default_value_t = 0.5)]
    pub overlap_boost: f64,
    #[arg(long, default_value_t = 10)]
    pub indicative_count: usize,
    #[arg(long, default_value_t = 0.02)]
    pub stray_rate: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub theta: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StemmerArg {
    Russian,
    RussianFixpoint,
    Identity,
}

impl From<StemmerArg> for Stemmer {
    fn from(s: StemmerArg) -> Self {
        match s {
            StemmerArg::Russian => Stemmer::Russian,
            StemmerArg::RussianFixpoint => Stemmer::RussianFixpoint,
            StemmerArg::Identity => Stemmer::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BhRuleArg {
    Standard,
    Literal,
}

impl From<BhRuleArg> for BhRule {
    fn from(r: BhRuleArg) -> Self {
        match r {
            BhRuleArg::Standard => BhRule::Standard,
            BhRuleArg::Literal => BhRule::Literal,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LinkageArg {
    Eq1,
    Complete,
}

impl From<LinkageArg> for Linkage {
    fn from(l: LinkageArg) -> Self {
        match l {
            LinkageArg::Eq1 => Linkage::Eq1,
            LinkageArg::Complete => Linkage::Complete,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolarityArg {
    Both,
    HeldOnly,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Both => Polarity::Both,
            PolarityArg::HeldOnly => Polarity::HeldOnly,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DegreeModeArg {
    Union,
    Sum,
}

impl From<DegreeModeArg> for DegreeMode {
    fn from(m: DegreeModeArg) -> Self {
        match m {
            DegreeModeArg::Union => DegreeMode::Union,
            DegreeModeArg::Sum => DegreeMode::Sum,
        }
    }
}
