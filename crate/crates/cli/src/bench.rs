//! Run `synth` over a directory of contracts.

use std::path::{Path, PathBuf};

use crate::report::{RunReport, Summary};
use crate::synth::{run_synth, SynthOptions};
use crate::CliError;

/// Every `.lus` file directly under `dir`, sorted by name.
pub fn contracts(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let read = |e: std::io::Error| CliError::Read(dir.display().to_string(), e.to_string());
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(read)? {
        let p = entry.map_err(read)?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "lus") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

fn options_for(opts: &SynthOptions, path: &Path) -> SynthOptions {
    let mut o = opts.clone();
    o.measure_loc = true;
    // per-contract query logs so parallel workers do not interleave
    if let Some(dir) = &opts.solver.query_log {
        let stem = path.file_stem().unwrap_or_default();
        o.solver.query_log = Some(dir.join(stem));
    }
    o
}

/// One worker per contract, at most `jobs` at a time; reports keep the
/// order of [`contracts`].
pub fn run_bench(dir: &Path, opts: &SynthOptions, jobs: usize) -> Result<(Vec<RunReport>, Summary), CliError> {
    let files = contracts(dir)?;
    let one = |p: &PathBuf| {
        log::info!("bench: {}", p.display());
        run_synth(p, &options_for(opts, p))
    };
    let reports = fan_out(&files, jobs, one)?;
    let summary = Summary::of(&reports);
    Ok((reports, summary))
}

#[cfg(feature = "parallel")]
fn fan_out<F>(files: &[PathBuf], jobs: usize, f: F) -> Result<Vec<RunReport>, CliError>
where
    F: Fn(&PathBuf) -> RunReport + Sync + Send,
{
    use rayon::prelude::*;
    if jobs <= 1 {
        return Ok(files.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| files.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn fan_out<F>(files: &[PathBuf], _jobs: usize, f: F) -> Result<Vec<RunReport>, CliError>
where
    F: Fn(&PathBuf) -> RunReport,
{
    Ok(files.iter().map(f).collect())
}
