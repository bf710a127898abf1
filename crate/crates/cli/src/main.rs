use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use auditboard::commands::{cmd_eval, cmd_generate, cmd_match, cmd_synth, ignore_path, print_summary, GenerateOptions};
use auditboard::server::cmd_serve;
use auditboard_core::capture::SimilarityMode;
use auditboard_core::config::PipelineConfig;
use auditboard_core::matching::MatchStrategy;
use auditboard_core::synth::{SynthSpec, VariationWeights};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "auditboard", version, about = "Summarized accessibility reports from app audit captures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Similarity {
    Embedding,
    Pixel,
    Structural,
}

impl From<Similarity> for SimilarityMode {
    fn from(s: Similarity) -> Self {
        match s {
            Similarity::Embedding => SimilarityMode::Embedding,
            Similarity::Pixel => SimilarityMode::Pixel,
            Similarity::Structural => SimilarityMode::Structural,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Heuristics,
    TemplateOnly,
}

#[derive(Subcommand)]
enum Command {
    /// Build a report directory from a capture bundle.
    Generate {
        bundle: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// TOML pipeline settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        similarity: Option<Similarity>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Ignore file; defaults to <out>/ignores.jsonl.
        #[arg(long)]
        ignores: Option<PathBuf>,
    },
    /// Serve a report directory over HTTP.
    Serve {
        report_dir: PathBuf,
        #[arg(long)]
        ignores: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of UI assets served at /.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Score predictions (a report, a partition or match predictions) against gold.json.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Match every gold correspondence of a bundle and write the predictions.
    Match {
        bundle: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value = "heuristics")]
        strategy: Strategy,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Write a synthetic corpus of bundles with gold.json files.
    Synth {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        apps: usize,
        #[arg(long, default_value_t = 30)]
        captures: usize,
        #[arg(long, default_value_t = 8)]
        screen_types: usize,
        #[arg(long, default_value_t = 2)]
        dialog_types: usize,
        /// Weight of every variation relative to a plain revisit.
        #[arg(long, default_value_t = 0.0)]
        variation_weight: f64,
        #[arg(long, default_value_t = 0.15)]
        issue_rate: f64,
        #[arg(long, default_value_t = 0.2)]
        false_positive_rate: f64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            bundle,
            out,
            config,
            similarity,
            threshold,
            ignores,
        } => {
            let opts = GenerateOptions {
                config,
                similarity: similarity.map(Into::into),
                threshold,
                ignores,
                generated_at: None,
            };
            let report = cmd_generate(&bundle, &out, &opts)?;
            print_summary(&report, &mut std::io::stdout())?;
            println!("wrote {}", out.join("report.json").display());
        }
        Command::Serve {
            report_dir,
            ignores,
            port,
            static_dir,
        } => {
            let ignores = ignore_path(&report_dir, ignores.as_deref());
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(cmd_serve(&report_dir, &ignores, port, static_dir.as_deref()))?;
        }
        Command::Eval { pred, gold, json } => {
            let outcome = cmd_eval(&pred, &gold)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&outcome)?);
            } else {
                print!("{}", outcome.table());
            }
        }
        Command::Match {
            bundle,
            gold,
            strategy,
            config,
            out,
        } => {
            let cfg = match config {
                Some(p) => PipelineConfig::load(&p)?,
                None => PipelineConfig::default(),
            };
            let strategy = match strategy {
                Strategy::Heuristics => MatchStrategy::Heuristics,
                Strategy::TemplateOnly => MatchStrategy::TemplateOnly,
            };
            let preds = cmd_match(&bundle, &gold, strategy, &cfg)?;
            let mean = preds.iter().map(|p| p.seconds).sum::<f64>() / preds.len().max(1) as f64;
            std::fs::write(&out, serde_json::to_vec_pretty(&preds)?)?;
            println!("{} templates matched, mean {:.2} ms each; wrote {}", preds.len(), mean * 1e3, out.display());
        }
        Command::Synth {
            seed,
            out,
            apps,
            captures,
            screen_types,
            dialog_types,
            variation_weight,
            issue_rate,
            false_positive_rate,
        } => {
            let spec = SynthSpec {
                seed,
                app_count: apps,
                screens_per_app: captures,
                screen_types,
                dialog_types,
                variations: VariationWeights::uniform(variation_weight),
                planted_issue_rate: issue_rate,
                planted_false_positive_rate: false_positive_rate,
            };
            let n = cmd_synth(&spec, &out)?;
            println!("wrote {apps} apps, {n} captures to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
