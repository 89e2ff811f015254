//! Monte-Carlo estimates of `P(x ~ y ~ z)` for a collinear triple.
//!
//! Each replicate draws the three weights and scores `p_xy p_yz`, the
//! conditional probability given the weights. The middle weight is drawn
//! from an equal mixture of its own law and a Pareto tail with index
//! `tau - 2` starting at `|y - z|^alpha / lambda`, and reweighted by the
//! likelihood ratio.

use super::{chunked, fmt_real, require_tau_2_3, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::connection_probability;
use crate::moments::adjacent_expectation_exact;
use crate::params::ModelParams;
use crate::rng::{replicate_seed, ReplicateStream};
use crate::stats::{loglog_slope, EstimateWithCI, Running};

/// Estimate of `P(x ~ y ~ z)` with `|x - y| = r_xy`, `|y - z| = r_yz`.
pub fn adjacent_estimate(
    p: &ModelParams,
    r_xy: f64,
    r_yz: f64,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI, ExperimentError> {
    if replicates == 0 {
        return Err(ExperimentError::ZeroReplicates);
    }
    if !(r_xy > 0.0 && r_yz > 0.0) {
        return Err(ExperimentError::InvalidKnob("distances must be positive".into()));
    }
    let lam = p.lambda();
    let c_xy = lam * r_xy.powf(-p.alpha());
    let c_yz = lam * r_yz.powf(-p.alpha());
    if !p.kind().has_weights() {
        let v = connection_probability(c_xy) * connection_probability(c_yz);
        return Ok(EstimateWithCI { mean: v, stderr: 0.0, n: replicates });
    }
    let tau = p.tau();
    if !(tau > 2.0) {
        return Err(ExperimentError::TauOutOfRange(tau));
    }
    let s = tau - 1.0;
    let kappa = tau - 2.0;
    let w0 = (1.0 / c_yz).max(1.0);
    let parts = chunked(replicates, |range| {
        let mut acc = Running::new();
        for i in range {
            let mut st = ReplicateStream::new(replicate_seed(seed, i));
            let wx = st.next_pareto(tau);
            let wz = st.next_pareto(tau);
            let branch = st.next_unit();
            let v = st.next_unit();
            let wy = if branch < 0.5 { v.powf(-1.0 / s) } else { w0 * v.powf(-1.0 / kappa) };
            // f / (f/2 + g/2) with f the Pareto(s) density and g the tail density.
            let f = s * wy.powf(-s - 1.0);
            let g = if wy >= w0 { kappa * w0.powf(kappa) * wy.powf(-kappa - 1.0) } else { 0.0 };
            let lr = f / (0.5 * f + 0.5 * g);
            acc.push(lr * connection_probability(c_xy * wx * wy) * connection_probability(c_yz * wy * wz));
        }
        acc
    });
    let mut all = Running::new();
    parts.iter().for_each(|r| all.merge(r));
    Ok(all.estimate())
}

pub fn run_adjacent_mc(cfg: &ExperimentConfig, r_xy: f64, r_yz: f64) -> Result<ExperimentReport, ExperimentError> {
    run_adjacent_mc_hooked(cfg, r_xy, r_yz, 1.0)
}

/// As [`run_adjacent_mc`], with the sandwich bounds multiplied by
/// `bound_scale` (a failure-injection hook; 1 in normal use).
#[doc(hidden)]
pub fn run_adjacent_mc_hooked(
    cfg: &ExperimentConfig,
    r_xy: f64,
    r_yz: f64,
    bound_scale: f64,
) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = &cfg.params;
    require_tau_2_3(p)?;
    let sw = adjacent_expectation_exact(p, r_xy, r_yz)?;
    let est = adjacent_estimate(p, r_xy, r_yz, cfg.replicates, cfg.seed)?;
    let mut rep = ExperimentReport::new(
        "adjacent",
        cfg.header("adjacent"),
        &["r_xy", "r_yz", "estimate", "stderr", "middle", "lower", "upper"],
    );
    rep.knob("tolerance", "sandwich +- 3 stderr");
    let (lo, hi) = (sw.lower * bound_scale, sw.upper * bound_scale);
    rep.row(vec![
        fmt_real(r_xy),
        fmt_real(r_yz),
        fmt_real(est.mean),
        fmt_real(est.stderr),
        fmt_real(sw.middle_expectation),
        fmt_real(lo),
        fmt_real(hi),
    ]);
    let ok = est.mean >= lo - 3.0 * est.stderr && est.mean <= hi + 3.0 * est.stderr;
    rep.verdict(
        "adjacent_sandwich",
        Status::from_bool(ok),
        format!("lower={} estimate={} upper={} stderr={}", fmt_real(lo), fmt_real(est.mean), fmt_real(hi), fmt_real(est.stderr)),
    );
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

/// How `|x - y|` follows `|y - z|` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    /// `|x - y|` held fixed; expected slope `-alpha (tau - 2)`.
    FixedXy(f64),
    /// `|x - y| = ratio |y - z|`; expected slope `-alpha (tau - 1)`.
    FixedRatio(f64),
}

impl SweepMode {
    fn r_xy(self, r_yz: f64) -> f64 {
        match self {
            SweepMode::FixedXy(r) => r,
            SweepMode::FixedRatio(q) => q * r_yz,
        }
    }

    pub fn target_slope(self, p: &ModelParams) -> f64 {
        match self {
            SweepMode::FixedXy(_) => -p.alpha() * (p.tau() - 2.0),
            SweepMode::FixedRatio(_) => -p.alpha() * (p.tau() - 1.0),
        }
    }
}

/// Estimates along `r_yz_list` with common random numbers, then fits the
/// slope of `log P` against `log r_yz`.
pub fn run_adjacent_sweep(
    cfg: &ExperimentConfig,
    mode: SweepMode,
    r_yz_list: &[f64],
) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = &cfg.params;
    require_tau_2_3(p)?;
    let mut rep = ExperimentReport::new("adjacent_sweep", cfg.header("adjacent_sweep"), &["r_xy", "r_yz", "estimate", "stderr"]);
    match mode {
        SweepMode::FixedXy(r) => rep.knob("mode", format!("fixed_xy:{}", fmt_real(r))),
        SweepMode::FixedRatio(q) => rep.knob("mode", format!("fixed_ratio:{}", fmt_real(q))),
    }
    rep.knob("tolerance", "slope +- 0.3");
    let mut pts = Vec::with_capacity(r_yz_list.len());
    for &r_yz in r_yz_list {
        let r_xy = mode.r_xy(r_yz);
        let est = adjacent_estimate(p, r_xy, r_yz, cfg.replicates, cfg.seed)?;
        rep.row(vec![fmt_real(r_xy), fmt_real(r_yz), fmt_real(est.mean), fmt_real(est.stderr)]);
        pts.push((r_yz, est.mean));
    }
    let slope = loglog_slope(&pts)?;
    let target = mode.target_slope(p);
    rep.verdict(
        "adjacent_slope",
        Status::from_bool((slope.mean - target).abs() <= 0.3),
        format!("slope={} stderr={} target={}", fmt_real(slope.mean), fmt_real(slope.stderr), fmt_real(target)),
    );
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::moments::adjacent_expectation_quadrature;
    use crate::params::ModelKind;

    fn cfg(reps: u64) -> ExperimentConfig {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        ExperimentConfig::new(p, BoxSpec::new(1, 2).unwrap(), 11, reps).unwrap()
    }

    /// The estimator targets the three-weight expectation; compare with a
    /// nested quadrature over the two outer weights.
    #[test]
    fn estimate_matches_nested_quadrature() {
        let p = cfg(1).params;
        let (r_xy, r_yz) = (8.0f64, 3.0f64);
        let (a, b) = (r_xy.powf(1.5), r_yz.powf(1.5));
        // E over W_x of p(W_x w / A) with W_x Pareto(1.5), then over W_y and W_z.
        let e1 = |c: f64| crate::moments::pareto_expectation(|u| connection_probability(c * u), 1.5, &[]).unwrap().value;
        let inner = |w: f64| e1(w / a) * e1(w / b);
        let exact = crate::moments::pareto_expectation(inner, 1.5, &[a, b]).unwrap().value;
        let est = adjacent_estimate(&p, r_xy, r_yz, 200_000, 5).unwrap();
        assert!(est.within(exact, 4.0), "{est:?} vs {exact}");
        assert!(adjacent_expectation_quadrature(&p, r_xy, r_yz).unwrap() < exact);
    }

    #[test]
    fn lrp_is_deterministic() {
        let p = cfg(1).params.with_kind(ModelKind::Lrp);
        let e = adjacent_estimate(&p, 2.0, 1.0, 10, 0).unwrap();
        let want = (1.0 - (-(2f64.powf(-1.5))).exp()) * (1.0 - (-1f64).exp());
        assert!((e.mean - want).abs() < 1e-15 && e.stderr == 0.0);
    }

    #[test]
    fn sandwich_and_errors() {
        let c = cfg(50_000);
        let r = run_adjacent_mc(&c, 100f64.powf(2.0 / 3.0), 10f64.powf(2.0 / 3.0)).unwrap();
        assert!(r.passed(), "{}", r.body());
        let bad = run_adjacent_mc_hooked(&c, 100f64.powf(2.0 / 3.0), 10f64.powf(2.0 / 3.0), 1e-3).unwrap();
        assert!(!bad.passed());
        let p35 = c.params.with_kind(ModelKind::Sfp);
        let c35 = ExperimentConfig { params: ModelParams::new(1, 1.5, 1.0, 3.5, p35.kind()).unwrap(), ..c.clone() };
        assert!(matches!(run_adjacent_mc(&c35, 10.0, 2.0), Err(ExperimentError::TauOutOfRange(_))));
        assert!(matches!(adjacent_estimate(&c.params, 1.0, 1.0, 0, 0), Err(ExperimentError::ZeroReplicates)));
    }
}
