//! Monte-Carlo experiments and their CSV reports.
//!
//! Replicate `i` of an experiment with master seed `s` draws its randomness
//! from `replicate_seed(s, i)`. Replicates are processed in fixed-size chunks
//! whose aggregates are merged in chunk order, so reports do not depend on
//! the number of worker threads.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::GraphError;
use crate::lattice::BoxSpec;
use crate::moments::MomentError;
use crate::params::{ModelParams, RegimeLabel};
use crate::stats::StatsError;

mod adjacent;
mod bridge;
mod coupling;
mod degree;
mod distance;
mod fkg;

pub use adjacent::{adjacent_estimate, run_adjacent_mc, run_adjacent_sweep, SweepMode};
#[doc(hidden)]
pub use adjacent::run_adjacent_mc_hooked;
pub use bridge::{bridge_estimate, bridge_geometry, run_bridge_experiment, BridgeGeometry};
pub use coupling::{run_coupling_check, CouplingOptions};
pub use degree::{run_degree_experiment, DegreeOptions};
pub use distance::{dyadic_list, run_distance_experiment, DistanceOptions};
pub use fkg::{fkg_cuts, run_fkg_check, CutEstimate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Replicates per parallel work unit.
pub const CHUNK: u64 = 1 << 14;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("replicates must be at least 1")]
    ZeroReplicates,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("tau = {0} must lie in (2, 3)")]
    TauOutOfRange(f64),
    #[error("beta = {0} must lie in (0, 1)")]
    BetaOutOfRange(f64),
    #[error("path has {0} edges; at most 6 are supported")]
    PathTooLong(usize),
    #[error("path has {0} edges; at least 2 are needed")]
    PathTooShort(usize),
    #[error("path is not self-avoiding")]
    PathNotSelfAvoiding,
    #[error("no sampled pair lies in the largest cluster")]
    NoPairsInLargestCluster,
    #[error("regime {0} is not polylogarithmic")]
    RegimeNotPolylog(RegimeLabel),
    #[error("alpha must exceed d for finite degrees")]
    InfiniteDegrees,
    #[error("invalid setting: {0}")]
    InvalidKnob(String),
    #[error("dimension mismatch: parameters have d = {params}, box has d = {spec}")]
    DimensionMismatch { params: u32, spec: u32 },
}

/// Parameters shared by all experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub spec: BoxSpec,
    pub seed: u64,
    pub replicates: u64,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, spec: BoxSpec, seed: u64, replicates: u64) -> Result<Self, ExperimentError> {
        if replicates == 0 {
            return Err(ExperimentError::ZeroReplicates);
        }
        if params.d() != spec.d() {
            return Err(ExperimentError::DimensionMismatch { params: params.d(), spec: spec.d() });
        }
        Ok(ExperimentConfig { params, spec, seed, replicates })
    }

    fn header(&self, name: &str) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("experiment".into(), name.into()),
            ("version".into(), VERSION.into()),
            ("d".into(), p.d().to_string()),
            ("alpha".into(), fmt_real(p.alpha())),
            ("tau".into(), fmt_real(p.tau())),
            ("lambda".into(), fmt_real(p.lambda())),
            ("model".into(), p.kind().to_string()),
            ("side".into(), self.spec.side().to_string()),
            ("seed".into(), self.seed.to_string()),
            ("replicates".into(), self.replicates.to_string()),
            ("seed_rule".into(), "replicate i uses replicate_seed(seed, i)".into()),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not judged.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub rule: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub verdicts: Vec<Verdict>,
    pub flags: Vec<String>,
    pub wallclock_secs: f64,
}

impl ExperimentReport {
    pub fn new(name: &str, header: Vec<(String, String)>, columns: &[&str]) -> Self {
        ExperimentReport {
            name: name.to_string(),
            header,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            verdicts: Vec::new(),
            flags: Vec::new(),
            wallclock_secs: 0.0,
        }
    }

    pub fn knob(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn verdict(&mut self, rule: &str, status: Status, detail: impl Into<String>) {
        self.verdicts.push(Verdict { rule: rule.to_string(), status, detail: detail.into() });
    }

    pub fn flag(&mut self, flag: &str) {
        self.flags.push(flag.to_string());
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// No verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn verdict_status(&self, rule: &str) -> Option<Status> {
        self.verdicts.iter().find(|v| v.rule == rule).map(|v| v.status)
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Everything except the `#wallclock` line.
    pub fn body(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k}={v}");
        }
        for f in &self.flags {
            let _ = writeln!(s, "#flag {f}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        for v in &self.verdicts {
            let _ = writeln!(s, "#verdict {} {} {}", v.rule, v.status.as_str(), v.detail);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.body().as_bytes())?;
        writeln!(out, "#wallclock {:.3}s", self.wallclock_secs)?;
        out.flush()
    }
}

/// Shortest round-trip decimal.
pub fn fmt_real(x: f64) -> String {
    format!("{x}")
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Timer(Instant::now())
    }

    pub fn secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Runs `f` on consecutive replicate ranges of length [`CHUNK`] in parallel
/// and returns the per-chunk results in order.
pub(crate) fn chunked<T: Send>(replicates: u64, f: impl Fn(std::ops::Range<u64>) -> T + Sync) -> Vec<T> {
    let chunks = replicates.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(replicates)))
        .collect()
}

pub(crate) fn require_tau_2_3(p: &ModelParams) -> Result<(), ExperimentError> {
    if p.tau() > 2.0 && p.tau() < 3.0 {
        Ok(())
    } else {
        Err(ExperimentError::TauOutOfRange(p.tau()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelKind;

    #[test]
    fn report_layout() {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 8).unwrap(), 3, 10).unwrap();
        let mut r = ExperimentReport::new("demo", cfg.header("demo"), &["a", "b"]);
        r.row(vec![fmt_real(0.1), fmt_real(f64::INFINITY)]);
        r.verdict("rule_x", Status::Pass, "ok");
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# experiment=demo\n"));
        assert!(text.contains("# seed=3\n"));
        assert!(text.contains("\na,b\n0.1,inf\n#verdict rule_x PASS ok\n#wallclock "));
        assert!(r.passed());
        assert_eq!(r.column("b").unwrap(), vec!["inf"]);
        assert!(matches!(ExperimentConfig::new(p, BoxSpec::new(1, 8).unwrap(), 0, 0), Err(ExperimentError::ZeroReplicates)));
    }

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = chunked(2 * CHUNK + 5, |r| (r.start, r.end));
        assert_eq!(parts, vec![(0, CHUNK), (CHUNK, 2 * CHUNK), (2 * CHUNK, 2 * CHUNK + 5)]);
    }
}
