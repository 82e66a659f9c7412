mod args;

use std::fs;

use anyhow::{Context, Result};
use clap::Parser;
use lexnet_core::corpus::{load_lexicon, save_profiles, DrugLexicon};
use lexnet_core::pipeline::{self, PipelineConfig, Stage, MANIFEST};
use lexnet_core::scorer::ScoreOptions;
use lexnet_core::synthgen::{self, GenConfig};

use args::{
    ClusterArgs, Cli, Command, Common, GenArgs, InterestArgs, NbArgs, NetArgs, ScoreArgs,
};

fn base(common: Common, score: &ScoreArgs, stages: &[Stage]) -> PipelineConfig {
    let mut c = PipelineConfig::new(common.corpus, common.out_dir);
    c.lexicon = common.lexicon;
    c.max_entries = common.max_entries;
    c.score = ScoreOptions {
        threshold: score.theta,
        strict: score.strict,
        stemmer: score.stemmer.into(),
        phrase_suppresses_words: score.phrase_suppresses_words,
    };
    c.stages = stages.iter().copied().collect();
    c
}

fn with_interests(c: &mut PipelineConfig, a: &InterestArgs) {
    c.interests.min_count = a.min_count;
    c.interests.q = a.q;
    c.interests.rule = a.bh_rule.into();
}

fn with_clusters(c: &mut PipelineConfig, a: &ClusterArgs) {
    c.clusters.cut = a.cut;
    c.clusters.linkage = a.linkage.into();
    c.clusters.target_count = a.target_count;
}

fn with_nb(c: &mut PipelineConfig, a: &NbArgs) {
    c.alpha = a.alpha;
    c.polarity = a.polarity.into();
}

fn with_net(c: &mut PipelineConfig, a: &NetArgs) {
    c.gof_reps = a.gof.then_some(a.reps);
    c.seed = a.seed.unwrap_or(0);
    c.degree_mode = a.degree_mode.into();
}

fn config_for(command: Command) -> PipelineConfig {
    match command {
        Command::Gen(_) => unreachable!("gen does not run the pipeline"),
        Command::Score(cmd) => base(cmd.common, &cmd.score, &[Stage::Score]),
        Command::Interests(cmd) => {
            let mut c = base(cmd.common, &cmd.score, &[Stage::Interests]);
            with_interests(&mut c, &cmd.interests);
            c
        }
        Command::Themes(cmd) => {
            let mut c = base(cmd.common, &cmd.score, &[Stage::Themes]);
            with_interests(&mut c, &cmd.interests);
            with_clusters(&mut c, &cmd.clusters);
            c.svg = cmd.svg;
            c
        }
        Command::Classify(cmd) => {
            let mut c = base(cmd.common, &cmd.score, &[Stage::Classify]);
            with_interests(&mut c, &cmd.interests);
            with_nb(&mut c, &cmd.nb);
            c
        }
        Command::Netstats(cmd) => {
            let mut c = base(cmd.common, &cmd.score, &[Stage::Netstats]);
            with_interests(&mut c, &cmd.interests);
            with_nb(&mut c, &cmd.nb);
            with_net(&mut c, &cmd.net);
            c.svg = cmd.svg;
            c
        }
        Command::Run(cmd) => {
            let mut c = base(cmd.common, &cmd.score, &Stage::ALL);
            with_interests(&mut c, &cmd.interests);
            with_clusters(&mut c, &cmd.clusters);
            with_nb(&mut c, &cmd.nb);
            with_net(&mut c, &cmd.net);
            c.svg = cmd.svg;
            c
        }
    }
}

fn generate(a: GenArgs) -> Result<()> {
    let lexicon = match &a.lexicon {
        Some(p) => load_lexicon(p).with_context(|| format!("loading lexicon {}", p.display()))?,
        None => DrugLexicon::toy(),
    };
    let config = GenConfig {
        n_users: a.users,
        attachment_m: a.attachment_m,
        n_interests: a.interests,
        interest_exponent: a.interest_exponent,
        infectious_fraction: a.infectious_fraction,
        susceptible_fraction: a.susceptible_fraction,
        drug_text_rate: a.drug_text_rate,
        overlap_boost: a.overlap_boost,
        indicative_count: a.indicative_count,
        stray_rate: a.stray_rate,
        threshold: a.theta,
        seed: a.seed,
        ..GenConfig::default()
    };
    let (corpus, truth) = synthgen::generate(&config, &lexicon)?;
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let corpus_path = a.out_dir.join("corpus.jsonl");
    save_profiles(&corpus, &corpus_path)?;
    let truth_path = a.out_dir.join("ground_truth.csv");
    fs::write(&truth_path, truth.to_csv())
        .with_context(|| format!("writing {}", truth_path.display()))?;
    println!("{}", corpus_path.display());
    println!("{}", truth_path.display());
    Ok(())
}

fn run(config: PipelineConfig) -> Result<()> {
    log::info!("running stages {:?}", config.stages);
    let manifest = pipeline::run(&config).with_context(|| {
        format!(
            "pipeline failed; partial outputs in {}",
            config.output_dir.display()
        )
    })?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, config.output_dir.join(&f.path).display());
    }
    println!("{}", config.output_dir.join(MANIFEST).display());
    log::info!("{:?}", manifest.summary);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Gen(a) => generate(a),
        command => run(config_for(command)),
    }
}
