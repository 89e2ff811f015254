//! Tail index of interior degrees.

use super::{fmt_real, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::{degree_sequence, generate_box};
use crate::rng::replicate_seed;
use crate::stats::{hill_estimator, loglog_slope};

/// Minimum number of positive degrees and of tail samples for a verdict.
const MIN_SAMPLES: usize = 1000;
const MIN_TAIL: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DegreeOptions {
    /// Vertices within this sup-distance of the boundary are skipped.
    pub margin: u64,
    /// Hill order statistic count; `None` picks `n / 100` (at least `sqrt n`).
    pub k: Option<usize>,
}

/// Simulates `replicates` boxes, pools interior degrees, and compares the
/// Hill estimate and the survival-function slope with `alpha (tau - 1) / d`.
pub fn run_degree_experiment(cfg: &ExperimentConfig, opts: DegreeOptions) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = &cfg.params;
    if !(p.alpha() > p.d() as f64) {
        return Err(ExperimentError::InfiniteDegrees);
    }
    let gamma = p.exponents().gamma;
    let mut degrees: Vec<u32> = Vec::new();
    for i in 0..cfg.replicates {
        let r = generate_box(p, replicate_seed(cfg.seed, i), &cfg.spec)?;
        degrees.extend(degree_sequence(&r, opts.margin)?);
    }
    let mut rep = ExperimentReport::new("degrees", cfg.header("degrees"), &["degree_at_least", "count", "survival"]);
    rep.knob("margin", opts.margin);
    rep.knob("gamma", fmt_real(gamma));
    rep.knob("tolerance", "hill +- 0.3");

    let n_all = degrees.len();
    let positive: Vec<f64> = degrees.iter().filter(|&&d| d > 0).map(|&d| d as f64).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    // Survival at dyadic thresholds; the slope uses the upper tail only.
    let mut surv = Vec::new();
    let mut thr = 1u32;
    while thr <= max.max(1) {
        let c = degrees.iter().filter(|&&d| d >= thr).count();
        let s = c as f64 / n_all.max(1) as f64;
        rep.row(vec![thr.to_string(), c.to_string(), fmt_real(s)]);
        if c >= 10 && s <= 0.1 {
            surv.push((thr as f64, s));
        }
        thr *= 2;
    }
    let n = positive.len();
    let k = opts.k.unwrap_or_else(|| (n / 100).max((n as f64).sqrt() as usize));
    rep.knob("samples", n_all);
    rep.knob("k", k);
    if n < MIN_SAMPLES || k < MIN_TAIL || k >= n {
        rep.flag("InsufficientTail");
        rep.wallclock_secs = t.secs();
        return Ok(rep);
    }
    match hill_estimator(&positive, k) {
        Ok(h) => rep.verdict(
            "degree_hill",
            Status::from_bool((h.mean - gamma).abs() <= 0.3),
            format!("hill={} stderr={} target={}", fmt_real(h.mean), fmt_real(h.stderr), fmt_real(gamma)),
        ),
        Err(_) => rep.flag("InsufficientTail"),
    }
    if let Ok(s) = loglog_slope(&surv) {
        rep.verdict(
            "degree_survival_slope",
            Status::Info,
            format!("slope={} stderr={} target={}", fmt_real(s.mean), fmt_real(s.stderr), fmt_real(-gamma)),
        );
    }
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::params::{ModelKind, ModelParams};

    #[test]
    fn tiny_box_is_flagged() {
        let p = ModelParams::new(1, 1.5, 1.0, 3.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 4).unwrap(), 0, 1).unwrap();
        let r = run_degree_experiment(&cfg, DegreeOptions::default()).unwrap();
        assert!(r.has_flag("InsufficientTail"));
        assert!(r.verdicts.is_empty());

        let p = ModelParams::new(1, 0.8, 1.0, 3.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 4).unwrap(), 0, 1).unwrap();
        assert!(matches!(run_degree_experiment(&cfg, DegreeOptions::default()), Err(ExperimentError::InfiniteDegrees)));
    }
}
