//! `reactmotion`: data import, training, synthesis, evaluation and export.
//!
//! Errors go to stderr as one line, `error[usage]: ...` (exit 2) or
//! `error[runtime]: ...` (exit 1).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{usage, FileConfig, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "reactmotion",
    version,
    about = "Reactive two-person motion synthesis"
)]
#[command(subcommand_required = true)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Import raw SBU takes, normalize and window them into canonical clips.
    ImportSbu(ImportSbuArgs),
    /// Generate the two-class synthetic dataset.
    SynthData(SynthDataArgs),
    /// Train the generator and discriminator.
    Train(TrainArgs),
    /// Replace B in every clip with the trained generator's reaction.
    Synthesize(SynthesizeArgs),
    /// Average frame distance between predicted and ground-truth B.
    EvalAfd(EvalAfdArgs),
    /// Train the action recognizer on real clips and score test clips.
    EvalRecognition(EvalRecognitionArgs),
    /// Nearest-neighbour retrieval baseline.
    BaselineNn(BaselineNnArgs),
    /// Train and evaluate generator or loss ablations on one LOSO fold.
    Ablate(AblateArgs),
    /// Write the attention matrix of one synthesized clip.
    ExportAttention(ExportAttentionArgs),
    /// Write one clip (optionally synthesized) and a per-frame CSV table.
    ExportMotion(ExportMotionArgs),
    /// Compare analytic and finite-difference gradients on a tiny pipeline.
    GradCheck(GradCheckArgs),
}

#[derive(Debug, Args)]
struct ImportSbuArgs {
    /// Dataset root with `<category>/<pair>/<take>/*.txt` (default: $REACTMOTION_DATA).
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    /// Keep the raw coordinates.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct SynthDataArgs {
    #[arg(long)]
    classes: Option<usize>,
    /// Clips per class.
    #[arg(long)]
    clips: Option<usize>,
    /// Frames per clip.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Standard deviation of per-coordinate Gaussian noise.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Subset {
    Adv,
    AdvSkl,
    AdvSklCon,
    Full,
}

/// Training flags shared by `train` and `ablate`.
#[derive(Debug, Args)]
struct TrainFlags {
    /// Starting hyperparameters: sbu, hhoi or synthetic.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Width per body part; also sets the decoder and attention widths.
    #[arg(long)]
    h_part: Option<usize>,
    #[arg(long)]
    h_disc: Option<usize>,
    #[arg(long)]
    num_classes: Option<usize>,
    #[arg(long)]
    no_attention: bool,
    #[arg(long)]
    no_parts: bool,
    /// Drop the multi-class discriminator head.
    #[arg(long)]
    no_multiclass: bool,
    #[arg(long, value_enum)]
    loss_subset: Option<Subset>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Canonical clip file or directory.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Train without the clips involving this subject.
    #[arg(long)]
    holdout: Option<u32>,
    #[command(flatten)]
    flags: TrainFlags,
}

#[derive(Debug, Args)]
struct SynthesizeArgs {
    /// Training output directory or generator checkpoint.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Only the clips involving this subject.
    #[arg(long)]
    holdout: Option<u32>,
}

#[derive(Debug, Args)]
struct EvalAfdArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Normalize by joint count.
    #[arg(long)]
    per_joint: bool,
    #[arg(long)]
    by_class: bool,
}

/// Recognizer flags shared by `eval-recognition` and `ablate`.
#[derive(Debug, Args)]
struct RecognizerFlags {
    /// Feed only B to the recognizer instead of A and B stacked.
    #[arg(long)]
    b_only: bool,
    #[arg(long)]
    rec_hidden: Option<usize>,
    #[arg(long)]
    rec_epochs: Option<usize>,
    #[arg(long)]
    rec_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalRecognitionArgs {
    /// Real clips to train the recognizer on.
    #[arg(long)]
    train: PathBuf,
    /// Clips to classify (real or synthesized).
    #[arg(long)]
    test: PathBuf,
    #[command(flatten)]
    rec: RecognizerFlags,
}

#[derive(Debug, Args)]
struct BaselineNnArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AblationKind {
    Generator,
    Loss,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[arg(long, value_enum)]
    kind: AblationKind,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    holdout: u32,
    /// Output table (tab-separated).
    #[arg(long)]
    out: PathBuf,
    /// Also train a recognizer on the training fold and report accuracy.
    #[arg(long)]
    recognizer: bool,
    #[command(flatten)]
    flags: TrainFlags,
    #[command(flatten)]
    rec: RecognizerFlags,
}

#[derive(Debug, Args)]
struct ExportAttentionArgs {
    #[arg(long)]
    model: PathBuf,
    /// Clip file or directory.
    #[arg(long)]
    clip: PathBuf,
    /// Clip index when `--clip` is a directory.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExportMotionArgs {
    #[arg(long)]
    clip: PathBuf,
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Replace B with this model's reaction.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Per-frame CSV with one column per coordinate.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check a random subset of entries instead of all.
    #[arg(long)]
    samples: Option<usize>,
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::ImportSbu(a) => commands::import_sbu(&file, a),
        Command::SynthData(a) => commands::synth_data(&file, a),
        Command::Train(a) => commands::train(&file, a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::EvalAfd(a) => commands::eval_afd(a),
        Command::EvalRecognition(a) => commands::eval_recognition(&file, a),
        Command::BaselineNn(a) => commands::baseline_nn(a),
        Command::Ablate(a) => commands::ablate(&file, a),
        Command::ExportAttention(a) => commands::export_attention(a),
        Command::ExportMotion(a) => commands::export_motion(a),
        Command::GradCheck(a) => commands::grad_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            eprintln!("error[usage]: missing command (see --help)");
            return ExitCode::from(2);
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!(
                "error[usage]: {}",
                one_line(first.trim_start_matches("error:"))
            );
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (tag, code) = if e.downcast_ref::<UsageError>().is_some() {
                ("usage", 2)
            } else {
                ("runtime", 1)
            };
            eprintln!("error[{tag}]: {}", one_line(&format!("{e:#}")));
            ExitCode::from(code)
        }
    }
}
