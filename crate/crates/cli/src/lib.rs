//! Command-line driver: argument parsing, configuration merging and the
//! subcommands behind the `qosd` binary.

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qosd::bp::{alpha_sequence, Schedule};
use qosd::osd::ReliabilityMetric;
use qosd::sim::Pipeline;

use config::{Provenance, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "qosd", version, about = "Quaternary BP and ordered statistics decoding for stabilizer codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Logical error rate curve: one CSV row per (code, error rate) point.
    DecodeCurve(RunArgs),
    /// LER table over an error-rate grid and the crossings of adjacent distances.
    Threshold(RunArgs),
    /// Build, export or verify code files.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Per-call timing of BP iterations, ADOSD and OSD-2.
    TimingProbe {
        #[command(flatten)]
        run: RunArgs,
        /// Decoded but untimed trials before measuring.
        #[arg(long, default_value_t = 200)]
        warmup: u64,
    },
    /// Runs the invariant suites.
    Selftest {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Run one suite only.
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CodeCommand {
    /// Writes a built-in code as a QCODE v1 file.
    Build(CodeArgs),
    /// Writes a code as QCODE or JSON.
    Export {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, value_enum, default_value_t = ExportFormat::Json)]
        format: ExportFormat,
    },
    /// Checks every code invariant of a QCODE file and reports each failure.
    Verify { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Qcode,
    Json,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// `surface`, `toric`, `bb:<preset>` or `file:<path>`.
    #[arg(long, default_value = "surface")]
    pub code: String,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// `surface`, `toric`, `bb:<preset>` or `file:<path>`.
    #[arg(long)]
    pub code: Option<String>,
    /// Comma-separated distances.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Comma-separated depolarizing error rates.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub pipeline: Option<Pipeline>,
    /// BP step size.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Step sizes for the adaptive pipelines.
    #[arg(long = "alpha-seq", value_name = "START,STEP,STOP")]
    pub alpha_seq: Option<String>,
    /// Maximum BP iterations.
    #[arg(long = "T")]
    pub max_iter: Option<usize>,
    /// Soft reliability threshold of the reduction.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Candidate budget.
    #[arg(long)]
    pub gamma: Option<u64>,
    /// Explicit OSD order for `bp+osdw`.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub schedule: Option<Schedule>,
    #[arg(long)]
    pub metric: Option<ReliabilityMetric>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub target_logical_errors: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; `QOSD_THREADS` takes precedence.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV log.
    #[arg(long)]
    pub trial_log: Option<PathBuf>,
}

fn parse_alpha_seq(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::anyhow!("--alpha-seq {s:?}: {e}"))?;
    let [start, step, stop] = parts[..] else {
        anyhow::bail!("--alpha-seq expects START,STEP,STOP, got {s:?}");
    };
    Ok(alpha_sequence(start, step, stop)?)
}

impl Overrides {
    /// Applies every flag that was given and returns the keys it touched.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<Vec<&'static str>> {
        let mut set = Vec::new();
        macro_rules! take {
            ($field:ident, $key:literal, $target:expr) => {
                if let Some(v) = &self.$field {
                    $target = v.clone().into();
                    set.push($key);
                }
            };
        }
        take!(code, "code", cfg.code);
        take!(d, "d", cfg.d);
        take!(eps, "eps", cfg.eps);
        take!(pipeline, "decoder", cfg.decoder.pipeline);
        take!(alpha, "decoder", cfg.decoder.alpha);
        take!(max_iter, "decoder", cfg.decoder.max_iter);
        take!(theta, "decoder", cfg.decoder.theta);
        take!(gamma, "decoder", cfg.decoder.gamma);
        take!(order, "decoder", cfg.decoder.order);
        take!(schedule, "decoder", cfg.decoder.schedule);
        take!(metric, "decoder", cfg.decoder.metric);
        take!(trials, "trials", cfg.trials);
        take!(target_logical_errors, "target_logical_errors", cfg.target_logical_errors);
        take!(seed, "seed", cfg.seed);
        take!(workers, "workers", cfg.workers);
        take!(out, "out", cfg.out);
        take!(trial_log, "trial_log", cfg.trial_log);
        if let Some(s) = &self.alpha_seq {
            cfg.decoder.alpha_sequence = parse_alpha_seq(s)?;
            set.push("decoder");
        }
        Ok(set)
    }
}

impl RunArgs {
    /// File, then flags, then `QOSD_THREADS`; validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut prov = Provenance::default();
        let mut cfg = match &self.config {
            Some(path) => {
                let (cfg, text) = RunConfig::load(path)?;
                prov.file = Some((path.clone(), text));
                cfg
            }
            None => RunConfig::default(),
        };
        prov.flags = self.overrides.apply(&mut cfg)?;
        if let Some(t) = config::threads_from_env()? {
            cfg.workers = t;
        }
        cfg.validate(&prov)?;
        Ok(cfg)
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::DecodeCurve(args) => commands::decode_curve(&args.resolve()?),
        Command::Threshold(args) => commands::threshold(&args.resolve()?),
        Command::TimingProbe { run, warmup } => commands::timing(&run.resolve()?, warmup),
        Command::Code(CodeCommand::Build(args)) => commands::code_build(&args),
        Command::Code(CodeCommand::Export { code, format }) => commands::code_export(&code, format),
        Command::Code(CodeCommand::Verify { path }) => commands::code_verify(&path),
        Command::Selftest { seed, suite } => commands::selftest(seed, suite.as_deref()),
    }
}
