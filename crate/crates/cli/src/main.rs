// SPDX-License-Identifier: MIT OR Apache-2.0

//! `chatterkit`: synthesize data, extract features, and run the repeated-split,
//! k-fold and transfer protocols from the command line.
//!
//! Data goes to `--out` (or standard output); progress and errors go to
//! standard error. Exit status is 0 on success, 1 on any error and 2 when a
//! `--check` threshold is not met.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chatterkit::ClassifierKind;

#[derive(Debug, Parser)]
#[command(name = "chatterkit", version, about = "Chatter detection from accelerometer signals")]
pub struct Cli {
    /// Root seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; `.csv` selects CSV where a command supports both.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a two-configuration synthetic dataset and its manifest.
    Synth(SynthArgs),
    /// Extract the peak-coordinate feature matrix as CSV.
    Features(FeaturesArgs),
    /// Repeated stratified train/test splits.
    Eval(EvalArgs),
    /// Stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Train on one configuration, test on another.
    Transfer(TransferArgs),
    /// Per-feature selection counts across repeated RFE runs.
    RankReport(RankArgs),
    /// Write one record's FFT, PSD or ACF sequence as CSV.
    DumpTransform(DumpArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 800.0)]
    pub freq_a: f64,
    #[arg(long, default_value_t = 1600.0)]
    pub freq_b: f64,
    /// Records per class and configuration.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,
    #[arg(long, default_value_t = 0.25)]
    pub noise: f64,
    #[arg(long, default_value_t = 1.0)]
    pub duration_s: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub sample_rate_hz: f64,
}

/// Loading, decimation and feature settings shared by the data commands.
#[derive(Debug, Args, Clone)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = chatterkit::preprocess::DEFAULT_TARGET_RATE_HZ)]
    pub target_rate_hz: f64,
    /// Anti-alias cutoff (default: 0.9 x target Nyquist).
    #[arg(long)]
    pub cutoff_hz: Option<f64>,
    #[arg(long, default_value_t = chatterkit::preprocess::DEFAULT_FILTER_ORDER)]
    pub filter_order: usize,
    #[arg(long, default_value_t = chatterkit::peaks::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = chatterkit::peaks::DEFAULT_MPD_FFT)]
    pub mpd_fft: usize,
    #[arg(long, default_value_t = chatterkit::peaks::DEFAULT_MPD_PSD)]
    pub mpd_psd: usize,
    #[arg(long, default_value_t = chatterkit::peaks::DEFAULT_MPD_ACF)]
    pub mpd_acf: usize,
    #[arg(long, default_value_t = 2)]
    pub n_peaks: usize,
    /// ACF lag cap (default: min(N - 1, 5000)).
    #[arg(long)]
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
    Both,
}

impl Toggle {
    pub fn settings(self) -> Vec<bool> {
        match self {
            Toggle::On => vec![true],
            Toggle::Off => vec![false],
            Toggle::Both => vec![false, true],
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// svm, lr, rf, gb or all.
    #[arg(long, default_value = "all")]
    pub classifier: String,
    #[arg(long, value_enum, default_value_t = Toggle::Both)]
    pub rfe: Toggle,
}

impl ModelArgs {
    pub fn kinds(&self) -> Result<Vec<ClassifierKind>, String> {
        if self.classifier.eq_ignore_ascii_case("all") {
            Ok(ClassifierKind::all().to_vec())
        } else {
            self.classifier
                .split(',')
                .map(|s| s.trim().parse())
                .collect()
        }
    }
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Restrict to one overhang group, e.g. `5.08`.
    #[arg(long)]
    pub config_id: Option<String>,
    /// Alternative to `--out`.
    #[arg(long)]
    pub features_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Overhang group to evaluate (default: every group).
    #[arg(long)]
    pub config_id: Option<String>,
    #[arg(long, default_value_t = chatterkit::evaluate::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = chatterkit::evaluate::DEFAULT_TEST_FRAC)]
    pub test_frac: f64,
    /// Exit with status 2 if any mean test accuracy falls below this.
    #[arg(long)]
    pub check: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub config_id: Option<String>,
    /// Fold count (default: 10 for 5.08 and 11.43 cm, 5 otherwise).
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub check: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub source_config: String,
    #[arg(long)]
    pub target_config: String,
    /// Exit with status 2 if any transfer accuracy falls below this.
    #[arg(long)]
    pub check: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub config_id: Option<String>,
    #[arg(long, default_value = "svm")]
    pub classifier: String,
    #[arg(long, default_value_t = chatterkit::evaluate::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = chatterkit::evaluate::DEFAULT_TEST_FRAC)]
    pub test_frac: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Fft,
    Psd,
    Acf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Record id as listed in the manifest.
    #[arg(long)]
    pub record: String,
    #[arg(long, value_enum)]
    pub kind: KindArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
