//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or range error,
//! 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::fixedpoint::{FxError, Fx, QFormat, Rounding};
use crate::oracle::sigmoid_ref;
use crate::pipeline::{latency_report, sigmoid_eval, PipelineConfig, PipelineError};
use crate::sweep::{run_sweep, SweepError, TARGET_MAE};
use crate::verify::run_verification;

#[derive(Debug, Parser)]
#[command(name = "mrhrc", version, about = "Bit-accurate mixed-radix CORDIC sigmoid model")]
pub struct Cli {
    #[command(flatten)]
    pub datapath: DatapathArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct DatapathArgs {
    /// Total bits of the I/O word.
    #[arg(long, global = true, default_value_t = 16)]
    pub bits: u32,
    /// Fraction bits of the I/O word.
    #[arg(long, global = true, default_value_t = 14)]
    pub frac: u32,
    /// Extra fraction bits carried inside the CORDIC stages.
    #[arg(long, global = true, default_value_t = 2)]
    pub guard: u32,
    #[arg(long, global = true, value_enum, default_value_t = RoundingArg::Rne)]
    pub rounding: RoundingArg,
    /// Linear vectoring stages (default: frac + 1).
    #[arg(long = "lvc-stages", global = true)]
    pub lvc_stages: Option<u32>,
    /// Clamp inputs to [-1, 1] instead of rejecting them.
    #[arg(long, global = true)]
    pub clamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoundingArg {
    Trunc,
    Rne,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the fixed-point sigmoid at one point.
    Eval {
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
    /// Sweep a uniform grid and report MAE and max error.
    Sweep {
        #[arg(allow_negative_numbers = true)]
        start: f64,
        #[arg(allow_negative_numbers = true)]
        end: f64,
        count: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check convergence ranges, handoff residual and digit thresholds.
    Verify {
        /// Write the digit-threshold checks as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Export the constant tables as `name index hex decimal` lines.
    Tables {
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the pipeline stage counts.
    Latency,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FxError> for CliError {
    fn from(e: FxError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io { path: "<stdout>".into(), source }
}

impl DatapathArgs {
    pub fn config(&self) -> Result<PipelineConfig, CliError> {
        let rounding = match self.rounding {
            RoundingArg::Trunc => Rounding::Truncate,
            RoundingArg::Rne => Rounding::NearestEven,
        };
        let format = QFormat::new(self.bits, self.frac)?.with_rounding(rounding);
        let stages = self.lvc_stages.unwrap_or(self.frac + 1);
        Ok(PipelineConfig::new(format, self.guard, stages)?.with_clamp(self.clamp))
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = cli.datapath.config()?;
    match &cli.command {
        Command::Eval { x } => cmd_eval(*x, &cfg, out),
        Command::Sweep { start, end, count, csv, json } => {
            cmd_sweep(*start, *end, *count, csv.as_deref(), json.as_deref(), &cfg, out)
        }
        Command::Verify { json } => cmd_verify(json.as_deref(), &cfg, out),
        Command::Tables { out: path } => cmd_tables(path.as_deref(), &cfg, out),
        Command::Latency => {
            let r = latency_report(&cfg);
            let text = serde_json::to_string_pretty(&r).expect("report serializes");
            writeln!(out, "{text}").map_err(stdout_err)
        }
    }
}

pub fn cmd_eval(x: f64, cfg: &PipelineConfig, out: &mut dyn Write) -> Result<(), CliError> {
    if !x.is_finite() {
        return Err(CliError::Usage(format!("input {x} is not finite")));
    }
    if !cfg.clamp() && x.abs() > 1.0 {
        return Err(CliError::Usage(format!(
            "input {x} outside the normalized range [-1, 1] (use --clamp)"
        )));
    }
    let effective = x.clamp(-1.0, 1.0);
    let input = Fx::from_real(effective, cfg.format());
    let y = sigmoid_eval(input, cfg)?;
    let reference = sigmoid_ref(effective);
    writeln!(
        out,
        "format    {}\ninput     {:.10} (mantissa {} 0x{})\noutput    {:.10} (mantissa {} 0x{})\nreference {:.10}\nabs_err   {:.3e}",
        cfg.format(),
        input.to_real(),
        input.mantissa(),
        input.to_hex(),
        y.to_real(),
        y.mantissa(),
        y.to_hex(),
        reference,
        (y.to_real() - reference).abs()
    )
    .map_err(stdout_err)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    start: f64,
    end: f64,
    count: usize,
    csv: Option<&Path>,
    json: Option<&Path>,
    cfg: &PipelineConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let report = run_sweep(start, end, count, cfg, csv.is_some())?;
    if let Some(path) = csv {
        write_file(path, |w| report.write_csv(w))?;
    }
    if let Some(path) = json {
        write_file(path, |w| writeln!(w, "{}", report.summary_json()))?;
    }
    writeln!(
        out,
        "samples   {}\nformat    {}\nmae       {:.6e} (target {:.2e})\nmax_err   {:.6e} at x = {:.6}",
        report.n_samples, report.format, report.mae, TARGET_MAE, report.max_abs_err, report.argmax_input
    )
    .map_err(stdout_err)
}

pub fn cmd_verify(json: Option<&Path>, cfg: &PipelineConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let report = run_verification(cfg);
    write!(out, "{}", report.render()).map_err(stdout_err)?;
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&report.overlap).expect("checks serialize");
        write_file(path, |w| writeln!(w, "{text}"))?;
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(CliError::Verification(report.failures().join(", ")))
    }
}

pub fn cmd_tables(path: Option<&Path>, cfg: &PipelineConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let text = cfg.tables().to_text();
    match path {
        Some(p) => write_file(p, |w| w.write_all(text.as_bytes())),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}
