//! Machine-readable run reports.

use serde::{Deserialize, Serialize};

/// Bumped whenever a field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Realizable,
    Unrealizable,
    Unknown,
    Error,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Realizable => 0,
            Verdict::Unrealizable => 10,
            Verdict::Unknown => 20,
            Verdict::Error => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Realizable => "realizable",
            Verdict::Unrealizable => "unrealizable",
            Verdict::Unknown => "unknown",
            Verdict::Error => "error",
        }
    }

    pub fn solved(self) -> bool {
        matches!(self, Verdict::Realizable | Verdict::Unrealizable)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    pub steps: usize,
    pub violations: usize,
    pub fixpoint_violations: usize,
    pub stalled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub contract: String,
    pub name: String,
    pub verdict: Verdict,
    /// Why the run is unknown or failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub iterations: usize,
    pub time_s: f64,
    /// Disjuncts of the last region of validity.
    pub region_disjuncts: usize,
    pub skolem_cases: usize,
    pub certified: Option<bool>,
    pub emitted_loc: Option<usize>,
    pub simulation: Option<SimStats>,
    pub solver_queries: u64,
    pub seed: u64,
}

impl RunReport {
    pub fn new(contract: &str, seed: u64) -> RunReport {
        let name = std::path::Path::new(contract)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| contract.to_string());
        RunReport {
            schema_version: SCHEMA_VERSION,
            contract: contract.to_string(),
            name,
            verdict: Verdict::Error,
            reason: None,
            iterations: 0,
            time_s: 0.0,
            region_disjuncts: 0,
            skolem_cases: 0,
            certified: None,
            emitted_loc: None,
            simulation: None,
            solver_queries: 0,
            seed,
        }
    }

    pub fn failed(mut self, reason: impl ToString) -> RunReport {
        self.verdict = Verdict::Error;
        self.reason = Some(reason.to_string());
        self
    }
}

pub const CSV_COLUMNS: [&str; 9] =
    ["name", "verdict", "iterations", "time_s", "skolem_cases", "emitted_loc", "certified", "sim_steps", "sim_violations"];

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// The reports as CSV with a header row.
pub fn to_csv(reports: &[RunReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        let sim = r.simulation.as_ref();
        w.write_record([
            r.name.clone(),
            r.verdict.as_str().to_string(),
            r.iterations.to_string(),
            format!("{:.3}", r.time_s),
            r.skolem_cases.to_string(),
            opt(&r.emitted_loc),
            opt(&r.certified),
            opt(&sim.map(|s| s.steps)),
            opt(&sim.map(|s| s.violations)),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
}

/// Aggregate over a benchmark run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub contracts: usize,
    pub solved: usize,
    pub realizable: usize,
    pub unrealizable: usize,
    pub unknown: usize,
    pub errors: usize,
    pub avg_time_s: f64,
    pub max_time_s: f64,
    pub avg_loc: f64,
    pub max_loc: usize,
}

impl Summary {
    pub fn of(reports: &[RunReport]) -> Summary {
        let mut s = Summary { contracts: reports.len(), ..Summary::default() };
        let solved: Vec<&RunReport> = reports.iter().filter(|r| r.verdict.solved()).collect();
        for r in reports {
            match r.verdict {
                Verdict::Realizable => s.realizable += 1,
                Verdict::Unrealizable => s.unrealizable += 1,
                Verdict::Unknown => s.unknown += 1,
                Verdict::Error => s.errors += 1,
            }
        }
        s.solved = solved.len();
        if !solved.is_empty() {
            s.avg_time_s = solved.iter().map(|r| r.time_s).sum::<f64>() / solved.len() as f64;
            s.max_time_s = solved.iter().map(|r| r.time_s).fold(0.0, f64::max);
        }
        let locs: Vec<usize> = reports.iter().filter_map(|r| r.emitted_loc).collect();
        if !locs.is_empty() {
            s.avg_loc = locs.iter().sum::<usize>() as f64 / locs.len() as f64;
            s.max_loc = locs.iter().copied().max().unwrap_or(0);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_has_only_the_header() {
        assert_eq!(to_csv(&[]).trim(), CSV_COLUMNS.join(","));
        assert_eq!(Summary::of(&[]), Summary::default());
    }

    #[test]
    fn report_json_round_trips() {
        let mut r = RunReport::new("dir/x.lus", 3);
        r.verdict = Verdict::Unknown;
        r.reason = Some("budget".into());
        let back: RunReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.name, "x");
    }
}
