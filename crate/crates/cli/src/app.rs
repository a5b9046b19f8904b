//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use illumaug::augment::Sign;
use illumaug::scenes::Scenario;

use crate::commands::*;
use crate::error::{CmdResult, Failure};

#[derive(Debug, Parser)]
#[command(
    name = "illumaug",
    version,
    about = "Illumination augmentation for background subtraction"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic darkening or light-switch sequence.
    Synth(SynthArgs),
    /// Augment every frame of a sequence with a preset.
    Augment(AugmentArgs),
    /// Train a segmenter on a sequence.
    Train(TrainArgs),
    /// Evaluate a model over a threshold sweep.
    Eval(EvalArgs),
    /// Render the disc mask, its attenuation map and the before/after frames.
    DemoMask(DemoMaskArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScenarioArg {
    Darkening,
    Lightswitch,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Darkening => Scenario::Darkening,
            ScenarioArg::Lightswitch => Scenario::Lightswitch,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SignArg {
    #[value(alias = "+")]
    Plus,
    #[value(alias = "-")]
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once([',', 'x'])
        .ok_or_else(|| format!("expected two numbers like 128,96, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub scenario: ScenarioArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    /// Frame size as WIDTH,HEIGHT.
    #[arg(long, value_parser = parse_pair)]
    pub dims: Option<(usize, usize)>,
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training sequence manifest.
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub reference_frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Test sequence manifest.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated thresholds (default 0.05..0.95 step 0.05).
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct DemoMaskArgs {
    /// Frame to modify; a synthetic texture is used when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_pair, default_value = "800,600")]
    pub dims: (usize, usize),
    #[arg(long, value_parser = parse_pair, default_value = "322,265")]
    pub center: (usize, usize),
    /// Disc radius in pixels.
    #[arg(long, default_value_t = 179)]
    pub d: usize,
    #[arg(long, default_value_t = 120)]
    pub z: u32,
    #[arg(long, value_enum, default_value = "plus")]
    pub sign: SignArg,
    #[arg(long)]
    pub out: PathBuf,
}

fn dispatch(command: Command) -> CmdResult<()> {
    match command {
        Command::Synth(a) => {
            let path = cmd_synth(&SynthOptions {
                scenario: a.scenario.into(),
                out: a.out,
                seed: a.seed,
                dims: a.dims,
                n_frames: a.frames,
            })?;
            println!("{}", path.display());
        }
        Command::Augment(a) => {
            let s = cmd_augment(&AugmentOptions {
                manifest: a.manifest,
                preset: a.preset,
                out: a.out,
                seed: a.seed,
            })?;
            println!(
                "{} ({} of {} frames augmented)",
                s.manifest.display(),
                s.applied,
                s.frames
            );
        }
        Command::Train(a) => {
            let s = cmd_train(&TrainOptions {
                config: a.config,
                train: a.train,
                out: a.out,
                preset: a.preset,
                seed: a.seed,
                max_epochs: a.epochs,
                lr: a.lr,
                reference_frames: a.reference_frames,
            })?;
            if let Some(last) = s.epochs.last() {
                println!("{} epochs, final loss {:.6}", last.epoch, last.loss);
            }
            println!("{}", s.model.display());
        }
        Command::Eval(a) => {
            let r = cmd_eval(&EvalOptions {
                config: a.config,
                model: a.model,
                test: a.test,
                out: a.out,
                thresholds: a.thresholds,
            })?;
            let m = &r.best.metrics;
            println!(
                "best threshold {:.2}: recall {:.4} specificity {:.4} fpr {:.4} fnr {:.4} pwc {:.4} fm {:.4} precision {:.4} iou {:.4} matthews {:.4}",
                r.best.threshold, m.recall, m.specificity, m.fpr, m.fnr, m.pwc, m.fm, m.precision, m.iou, m.matthews
            );
        }
        Command::DemoMask(a) => {
            let o = cmd_demo_mask(&DemoMaskOptions {
                input: a.input,
                dims: a.dims,
                center: a.center,
                d: a.d,
                z: a.z,
                sign: a.sign.into(),
                out: a.out,
            })?;
            for p in [o.m1, o.m2, o.original, o.after] {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Failure::usage("--jobs must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Runtime(e.into())),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}
