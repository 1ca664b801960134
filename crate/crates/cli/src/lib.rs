//! `reacsynth`: synthesize controllers from Lustre assume-guarantee contracts.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reacsynth_core::encode::EncodeError;
use reacsynth_core::engine::{CertifyError, EngineError};
use reacsynth_core::runtime::{NumMode, RuntimeError};
use reacsynth_core::smt::{SmtError, SolverConfig};

pub mod bench;
pub mod check;
pub mod report;
pub mod synth;

pub use report::{RunReport, SimStats, Summary, Verdict, SCHEMA_VERSION};
pub use synth::{run_synth, SynthOptions};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Read(String, String),
    #[error("cannot write {0}: {1}")]
    Write(String, String),
    #[error("{0}: {1}")]
    Lustre(String, String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Smt(#[from] SmtError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("controller failed certification: {0}")]
    NotCertified(String),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("query file: {0}")]
    Query(String),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "reacsynth", version, about = "Controller synthesis from assume-guarantee contracts")]
pub struct Cli {
    /// More logging on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide realizability of one contract and build a controller.
    Synth {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        /// Write the controller as C99.
        #[arg(long, value_name = "FILE")]
        emit_c: Option<PathBuf>,
        /// Write the controller as JSON.
        #[arg(long, value_name = "FILE")]
        save_controller: Option<PathBuf>,
        /// Write the engine trace as JSON lines.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Print (A, G_I, G_T) as SMT-LIB on stderr.
        #[arg(long)]
        dump_ts: bool,
    },
    /// Run `synth` on every .lus file of a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        /// Contracts solved at once.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Compare the engine with explicit enumeration on a finite contract.
    OracleCheck {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide a ∀∃ query given as define-funs S and T.
    Aeval {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// SMT solver binary; falls back to $REACSYNTH_SOLVER, then z3.
    #[arg(long)]
    pub solver_path: Option<PathBuf>,
    /// Replaces the default solver arguments (whitespace separated).
    #[arg(long, allow_hyphen_values = true)]
    pub solver_args: Option<String>,
    /// Dump every query as a numbered .smt2 file here.
    #[arg(long, value_name = "DIR")]
    pub query_log: Option<PathBuf>,
}

impl SolverArgs {
    pub fn config(&self, seed: u64) -> Result<SolverConfig, CliError> {
        let mut cfg = match &self.solver_path {
            Some(p) => SolverConfig::new(p),
            None => SolverConfig::from_env()?,
        };
        if let Some(a) = &self.solver_args {
            cfg = cfg.with_args(a);
        }
        cfg.query_log = self.query_log.clone();
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CMode {
    Double,
    Rational,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Wall-clock budget of the engine, in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    /// Closed-loop simulation steps against random admissible inputs.
    #[arg(long, value_name = "STEPS")]
    pub simulate: Option<usize>,
    /// Seed of the solver and of input sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Arithmetic of emitted C.
    #[arg(long, value_enum, default_value = "double")]
    pub c_mode: CMode,
}

impl Common {
    pub fn options(&self) -> Result<SynthOptions, CliError> {
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(CliError::Usage(format!("--timeout must be positive, got {}", self.timeout)));
        }
        let mut o = SynthOptions::new(self.solver.config(self.seed)?);
        o.timeout = Duration::from_secs_f64(self.timeout);
        o.max_iterations = self.max_iterations;
        o.simulate = self.simulate;
        o.seed = self.seed;
        o.c_mode = match self.c_mode {
            CMode::Double => NumMode::Double,
            CMode::Rational => NumMode::Rational,
        };
        Ok(o)
    }
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// JSON output (default for synth).
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// CSV output (default for bench).
    #[arg(long)]
    pub csv: bool,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

impl Output {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Write(p.display().to_string(), e.to_string())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn pretty<T: serde::Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("plain data") + "\n"
}

#[derive(serde::Serialize)]
struct BenchJson<'a> {
    schema_version: u32,
    reports: &'a [RunReport],
    summary: &'a Summary,
}

fn describe(s: &Summary) -> String {
    format!(
        "contracts {} solved {} (realizable {}, unrealizable {}) unknown {} errors {}; time avg {:.3}s max {:.3}s; LoC avg {:.1} max {}",
        s.contracts, s.solved, s.realizable, s.unrealizable, s.unknown, s.errors, s.avg_time_s, s.max_time_s, s.avg_loc, s.max_loc
    )
}

fn synth_cmd(path: &Path, opts: SynthOptions, output: &Output) -> Result<i32, CliError> {
    let report = run_synth(path, &opts);
    if let Some(r) = &report.reason {
        if report.verdict == Verdict::Error {
            eprintln!("error: {r}");
        }
    }
    let text = if output.csv { report::to_csv(std::slice::from_ref(&report)) } else { pretty(&report) };
    output.emit(&text)?;
    Ok(report.verdict.exit_code())
}

/// Execute a parsed command line; the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Synth { path, common, output, emit_c, save_controller, trace, dump_ts } => {
            let mut opts = common.options()?;
            opts.emit_c = emit_c;
            opts.save_controller = save_controller;
            opts.trace = trace;
            opts.dump_ts = dump_ts;
            synth_cmd(&path, opts, &output)
        }
        Command::Bench { dir, common, output, jobs } => {
            let opts = common.options()?;
            let (reports, summary) = bench::run_bench(&dir, &opts, jobs.max(1))?;
            if output.json {
                output.emit(&pretty(&BenchJson { schema_version: SCHEMA_VERSION, reports: &reports, summary: &summary }))?;
            } else {
                output.emit(&report::to_csv(&reports))?;
            }
            eprintln!("{}", describe(&summary));
            Ok(0)
        }
        Command::OracleCheck { path, common } => {
            let cmp = check::oracle_check(&path, &common.options()?)?;
            print!("{}", pretty(&cmp));
            eprintln!("{}", if cmp.agree { "agree" } else { "disagree" });
            Ok(cmp.exit_code())
        }
        Command::Aeval { path, solver } => {
            let (text, code) = check::aeval_file(&path, solver.config(0)?)?;
            print!("{text}");
            Ok(code)
        }
    }
}
