//! The `synth` pipeline: load, encode, synthesize, certify, then emit and
//! simulate on request.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use reacsynth_core::encode::{encode, TransitionSystem};
use reacsynth_core::engine::{certify, synthesize, EngineConfig, SynthesisOutcome, SynthesisRun};
use reacsynth_core::lustre::load;
use reacsynth_core::runtime::{emit_c, loc, simulate, Controller, NumMode};
use reacsynth_core::smt::{Solver, SolverConfig};

use crate::report::{RunReport, SimStats, Verdict};
use crate::CliError;

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub solver: SolverConfig,
    pub timeout: Duration,
    pub max_iterations: usize,
    pub emit_c: Option<PathBuf>,
    pub c_mode: NumMode,
    /// Compute the LoC of the emitted code even when not writing it.
    pub measure_loc: bool,
    pub simulate: Option<usize>,
    pub seed: u64,
    pub dump_ts: bool,
    /// JSON lines, one per engine iteration.
    pub trace: Option<PathBuf>,
    pub save_controller: Option<PathBuf>,
}

impl SynthOptions {
    pub fn new(solver: SolverConfig) -> SynthOptions {
        SynthOptions {
            solver,
            timeout: Duration::from_secs(600),
            max_iterations: EngineConfig::default().max_iterations,
            emit_c: None,
            c_mode: NumMode::Double,
            measure_loc: false,
            simulate: None,
            seed: 0,
            dump_ts: false,
            trace: None,
            save_controller: None,
        }
    }

    fn engine(&self) -> EngineConfig {
        EngineConfig { max_iterations: self.max_iterations, time_budget: self.timeout, ..EngineConfig::default() }
    }
}

pub fn load_contract(path: &Path) -> Result<TransitionSystem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read(path.display().to_string(), e.to_string()))?;
    let contract = load(&text).map_err(|e| CliError::Lustre(path.display().to_string(), e.to_string()))?;
    Ok(encode(&contract)?)
}

fn write_trace(path: &Path, run: &SynthesisRun) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Write(path.display().to_string(), e.to_string());
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for r in &run.trace {
        writeln!(f, "{}", serde_json::to_string(r).expect("plain data")).map_err(io)?;
    }
    f.flush().map_err(io)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Write(path.display().to_string(), e.to_string()))
}

/// Run the whole pipeline. Failures land in the report as an error verdict.
pub fn run_synth(path: &Path, opts: &SynthOptions) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(&path.display().to_string(), opts.seed);
    let mut queries = 0;
    let result = pipeline(path, opts, &mut report, &mut queries);
    report.time_s = start.elapsed().as_secs_f64();
    report.solver_queries = queries;
    match result {
        Ok(()) => report,
        Err(e) => report.failed(e),
    }
}

fn pipeline(path: &Path, opts: &SynthOptions, report: &mut RunReport, queries: &mut u64) -> Result<(), CliError> {
    let ts = load_contract(path)?;
    if opts.dump_ts {
        eprintln!("{}", ts.to_smtlib());
    }
    let mut solver = Solver::new(opts.solver.clone())?;
    let run = synthesize(&mut solver, &ts, &opts.engine());
    *queries = solver.stats().queries;
    let run = run?;
    if let Some(p) = &opts.trace {
        write_trace(p, &run)?;
    }
    report.iterations = run.iterations;
    report.region_disjuncts = run.trace.last().map(|r| r.region_disjuncts).unwrap_or(0);
    match &run.outcome {
        SynthesisOutcome::Unrealizable { .. } => report.verdict = Verdict::Unrealizable,
        SynthesisOutcome::Unknown { reason } => {
            report.verdict = Verdict::Unknown;
            report.reason = Some(reason.clone());
        }
        SynthesisOutcome::Realizable { skolem, fixpoint, .. } => {
            report.skolem_cases = skolem.cases.len();
            let cert = certify(&mut solver, &ts, &run.outcome);
            *queries = solver.stats().queries;
            let cert = cert?;
            report.certified = Some(cert.certified());
            if !cert.certified() {
                let why: Vec<String> = cert.failures().map(|o| format!("{}: {:?}", o.name, o.verdict)).collect();
                return Err(CliError::NotCertified(why.join("; ")));
            }
            let c = Controller::from_outcome(&ts, &run.outcome)?;
            if let Some(p) = &opts.save_controller {
                write(p, &c.to_json())?;
            }
            if opts.emit_c.is_some() || opts.measure_loc {
                let src = emit_c(&c, &ts, opts.c_mode)?;
                report.emitted_loc = Some(loc(&src));
                if let Some(p) = &opts.emit_c {
                    write(p, &src)?;
                }
            }
            if let Some(steps) = opts.simulate {
                let sim = simulate(&mut solver, &ts, &c, Some(fixpoint), steps, opts.seed);
                *queries = solver.stats().queries;
                let sim = sim?;
                report.simulation = Some(SimStats {
                    steps: sim.steps,
                    violations: sim.violations,
                    fixpoint_violations: sim.fixpoint_violations,
                    stalled: sim.stalled,
                });
            }
            report.verdict = Verdict::Realizable;
        }
    }
    Ok(())
}
