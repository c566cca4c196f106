use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use fakescope::config::{BackendKind, FeatureKind, RunConfig};
use fakescope::detect::DetectorKind;
use fakescope::pipeline::Pipeline;
use fakescope::synth::{synth_corpus, SynthConfig};
use fakescope::Error;
use tracing_subscriber::EnvFilter;

/// Detect machine-generated restaurant reviews and compare them with
/// human-written ones.
#[derive(Debug, Parser)]
#[command(name = "fakescope", version)]
struct Cli {
    /// JSON run configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "out-dir", global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,
    #[arg(long, global = true, value_enum)]
    detector: Option<Detector>,
    #[arg(long, global = true, value_enum)]
    features: Option<Features>,
    /// Log filter, e.g. `info` or `fakescope=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Detector {
    Nb,
    Lr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Features {
    Words,
    Bpe,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus.
    Synth {
        #[arg(long, default_value = "data/reviews.jsonl")]
        output: PathBuf,
        #[arg(long, default_value_t = 7)]
        synth_seed: u64,
    },
    /// Validate a JSONL or CSV corpus and copy it into the output directory.
    Ingest { input: Option<PathBuf> },
    /// Produce one generated review per elite review.
    Generate,
    /// Split, grid-search and fit both detectors.
    Train,
    /// Pick the decision threshold on the validation split.
    Calibrate,
    /// Score and flag the inference pool.
    Infer,
    /// Writing-style metrics for the inference pool.
    Metrics,
    /// Human versus AI comparison across thresholds.
    Analyze,
    #[command(subcommand)]
    Survey(SurveyCommand),
    /// Every stage from ingest to analyze.
    Run { input: Option<PathBuf> },
}

#[derive(Debug, Subcommand)]
enum SurveyCommand {
    /// Build the paired-review survey form.
    Build,
    /// Score a CSV of responses against the form.
    Score { responses: PathBuf },
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out_dir {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(b) = cli.backend {
        cfg.gen.backend = match b {
            Backend::Mock => BackendKind::Mock,
            Backend::Http => BackendKind::Http,
        };
    }
    if let Some(d) = cli.detector {
        cfg.detector = match d {
            Detector::Nb => DetectorKind::NaiveBayes,
            Detector::Lr => DetectorKind::LogisticRegression,
        };
    }
    if let Some(f) = cli.features {
        cfg.features = match f {
            Features::Words => FeatureKind::Words,
            Features::Bpe => FeatureKind::Bpe,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli, cfg: RunConfig) -> fakescope::Result<Vec<PathBuf>> {
    if let Command::Synth { output, synth_seed } = &cli.command {
        let set = synth_corpus(&SynthConfig {
            seed: *synth_seed,
            ..SynthConfig::default()
        });
        set.save(output, fakescope::corpus::Format::from_path(output))?;
        return Ok(vec![output.clone()]);
    }
    let p = Pipeline::new(cfg)?;
    match cli.command {
        Command::Synth { .. } => unreachable!("handled above"),
        Command::Ingest { input } => p.ingest(input.as_deref()),
        Command::Generate => p.generate(),
        Command::Train => p.train(),
        Command::Calibrate => p.calibrate(None),
        Command::Infer => p.infer(),
        Command::Metrics => p.metrics(),
        Command::Analyze => p.analyze(),
        Command::Survey(SurveyCommand::Build) => p.survey_build(),
        Command::Survey(SurveyCommand::Score { responses }) => p.survey_score(&responses),
        Command::Run { input } => p.run_all(input.as_deref()),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Generation(_) => 3,
        Error::InvalidArgument(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_new(&cli.log).unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cfg = match load_config(&cli).context("invalid configuration") {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match run(cli, cfg) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
