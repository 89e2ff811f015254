//! The acceptance suite, at full size or as a quick smoke run.

use std::collections::BTreeSet;

use crate::experiments::{
    self, dyadic_list, fmt_real, run_adjacent_mc_hooked, run_adjacent_sweep, run_bridge_experiment,
    run_coupling_check, run_degree_experiment, run_distance_experiment, run_fkg_check, CouplingOptions,
    DegreeOptions, DistanceOptions, ExperimentConfig, ExperimentError, ExperimentReport, Status, SweepMode,
};
use crate::hierarchy::fixtures::{figure2, figure2_expected_paths, figure2_mutations, figure2_realization, figure3};
use crate::hierarchy::{check_gap_paths_condition, decompose_paths, edge_set, gap_path_report, validate_hierarchy, HierarchyError};
use crate::graph::GraphError;
use crate::lattice::{BoxSpec, Vertex};
use crate::moments::{adjacent_expectation_exact, adjacent_expectation_quadrature, single_edge_second_moment};
use crate::params::{DeltaValue, ModelKind, ModelParams};
use crate::rng::ReplicateStream;

pub const CRITERIA: u8 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub scale: Scale,
    pub seed: u64,
    /// Criteria to run; empty means all.
    pub only: Vec<u8>,
    /// Failure-injection hook: shrinks the adjacent-edge sandwich.
    pub inject_failure: bool,
}

impl VerifyOptions {
    pub fn new(scale: Scale, seed: u64) -> Self {
        VerifyOptions { scale, seed, only: Vec::new(), inject_failure: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub value: String,
    pub target: String,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, pass: bool, value: impl Into<String>, target: impl Into<String>) -> Self {
        CriterionResult { id, name, pass, value: value.into(), target: target.into(), detail: String::new() }
    }

    fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    fn error(id: u8, name: &'static str, e: impl std::fmt::Display) -> Self {
        CriterionResult::new(id, name, false, "error", "").with_detail(e.to_string())
    }

    /// `criterion N: PASS|FAIL name value=... target=...`
    pub fn line(&self) -> String {
        let mut s = format!(
            "criterion {:>2}: {} {} value={} target={}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target
        );
        if !self.detail.is_empty() {
            s.push_str(" (");
            s.push_str(&self.detail);
            s.push(')');
        }
        s
    }
}

pub const NAMES: [&str; 12] = [
    "exponent_identities",
    "adjacent_closed_form",
    "adjacent_mc_sandwich",
    "adjacent_decay_exponent",
    "coupling_domination",
    "degree_tail",
    "bridging_slope",
    "fkg_inequality",
    "hierarchy_machinery",
    "second_moment_shape",
    "distance_properties",
    "determinism",
];

fn sfp(d: u32, alpha: f64, lambda: f64, tau: f64) -> ModelParams {
    ModelParams::new(d, alpha, lambda, tau, ModelKind::Sfp).expect("valid parameters")
}

fn cfg(p: ModelParams, side: u64, seed: u64, replicates: u64) -> Result<ExperimentConfig, ExperimentError> {
    ExperimentConfig::new(p, BoxSpec::new(p.d(), side).map_err(GraphError::from)?, seed, replicates)
}

fn detail_of(r: &ExperimentReport, rule: &str) -> String {
    r.verdicts.iter().find(|v| v.rule == rule).map(|v| v.detail.clone()).unwrap_or_default()
}

fn field(detail: &str, key: &str) -> String {
    detail
        .split_whitespace()
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or("")
        .to_string()
}

/// Runs criterion `id`.
pub fn criterion(id: u8, opts: &VerifyOptions) -> CriterionResult {
    let name = NAMES[id as usize - 1];
    let quick = opts.scale == Scale::Quick;
    let seed = opts.seed;
    let res = match id {
        1 => Ok(exponent_identities(10_000, seed)),
        2 => Ok(closed_form_grid()),
        3 => adjacent_sandwich(if quick { 100_000 } else { 1_000_000 }, seed, opts.inject_failure),
        4 => adjacent_decay(if quick { 100_000 } else { 1_000_000 }, seed),
        5 => coupling(if quick { 20 } else { 100 }, seed),
        6 => degree_tail(100_000, seed),
        7 => bridging(if quick { 100_000 } else { 10_000_000 }, seed),
        8 => fkg(if quick { 10_000 } else { 1_000_000 }, seed),
        9 => Ok(hierarchy_machinery()),
        10 => Ok(second_moment_shape()),
        11 => distances(quick, seed),
        12 => determinism(seed),
        _ => return CriterionResult::error(id, "unknown", format!("no criterion {id}")),
    };
    match res {
        Ok(mut r) => {
            r.id = id;
            r.name = name;
            r
        }
        Err(e) => CriterionResult::error(id, name, e),
    }
}

/// Runs the selected criteria and tabulates them.
pub fn run_verify(opts: &VerifyOptions) -> (Vec<CriterionResult>, ExperimentReport) {
    let t = experiments::Timer::start();
    let ids: Vec<u8> = if opts.only.is_empty() { (1..=CRITERIA).collect() } else { opts.only.clone() };
    let results: Vec<CriterionResult> = ids.iter().map(|&i| criterion(i, opts)).collect();
    let header = vec![
        ("experiment".to_string(), "verify".to_string()),
        ("version".to_string(), experiments::VERSION.to_string()),
        ("scale".to_string(), if opts.scale == Scale::Quick { "quick" } else { "full" }.to_string()),
        ("seed".to_string(), opts.seed.to_string()),
        ("criteria".to_string(), ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")),
    ];
    let mut rep = ExperimentReport::new("verify", header, &["criterion", "name", "status", "value", "target"]);
    if opts.inject_failure {
        rep.knob("inject_failure", true);
    }
    for r in &results {
        rep.row(vec![
            r.id.to_string(),
            r.name.to_string(),
            if r.pass { "PASS" } else { "FAIL" }.to_string(),
            csv_cell(&r.value),
            csv_cell(&r.target),
        ]);
        rep.verdict(&format!("criterion_{}", r.id), Status::from_bool(r.pass), r.detail.clone());
    }
    rep.wallclock_secs = t.secs();
    (results, rep)
}

fn csv_cell(s: &str) -> String {
    if s.contains(',') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

fn exponent_identities(points: usize, seed: u64) -> CriterionResult {
    let mut st = ReplicateStream::new(seed);
    let mut bad = 0usize;
    let mut first_bad = String::new();
    for _ in 0..points {
        let d = 1 + (st.next_unit() * 3.0) as u32 % 3;
        let df = d as f64;
        let alpha = df * (1.0 + st.next_unit());
        if !(alpha > df && alpha < 2.0 * df) {
            continue;
        }
        // gamma > 2  <=>  tau > 1 + 2d / alpha
        let tau = 1.0 + 2.0 * df / alpha + 3.0 * st.next_unit();
        let Ok(p) = ModelParams::new(d, alpha, 1.0, tau, ModelKind::Sfp) else { continue };
        let e = p.exponents();
        if !(e.gamma > 2.0) {
            continue;
        }
        let (dl, d1, d2) = (e.delta.value(), e.delta1.value(), e.delta2.value());
        let mut ok = df < e.alpha1 && e.alpha1 <= e.alpha2 && e.alpha2 <= alpha;
        ok &= d1 <= d2 && d2 <= dl;
        if tau >= 3.0 {
            ok &= e.delta1 == e.delta && e.delta2 == e.delta;
        }
        if alpha * (tau - 2.0) >= df && tau < 3.0 {
            ok &= e.delta2 == e.delta;
        }
        ok &= matches!(e.delta, DeltaValue::Finite(_));
        if !ok {
            bad += 1;
            if first_bad.is_empty() {
                first_bad = format!("d={d} alpha={alpha} tau={tau}");
            }
        }
    }
    CriterionResult::new(0, "", bad == 0, format!("violations={bad}"), "violations=0").with_detail(format!("points={points} {first_bad}"))
}

fn closed_form_grid() -> CriterionResult {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    let mut fail = String::new();
    let mut check = |tau: f64, lambda: f64, a: f64, b: f64| -> f64 {
        let alpha = 1.5;
        let p = sfp(1, alpha, lambda, tau);
        let (r_xy, r_yz) = (a.powf(1.0 / alpha), b.powf(1.0 / alpha));
        match (adjacent_expectation_exact(&p, r_xy, r_yz), adjacent_expectation_quadrature(&p, r_xy, r_yz)) {
            (Ok(e), Ok(q)) => {
                worst = worst.max((e.middle_expectation - q).abs() / q.abs());
                count += 1;
                e.middle_expectation
            }
            (e, q) => {
                fail = format!("tau={tau} lambda={lambda} A={a} B={b}: {e:?} {q:?}");
                f64::NAN
            }
        }
    };
    let reference = check(2.5, 1.0, 100.0, 10.0);
    let taus: Vec<f64> = (0..11).map(|i| 2.05 + 0.09 * i as f64).collect();
    for &lambda in &[0.5, 1.0, 2.0] {
        for &ratio in &[1.0, 10.0, 100.0] {
            for &tau in &taus {
                check(tau, lambda, 10.0 * ratio, 10.0);
            }
        }
    }
    let ref_ok = (reference - 0.0139737).abs() < 5e-7;
    let pass = fail.is_empty() && worst <= 1e-9 && ref_ok && count == 100;
    CriterionResult::new(
        0,
        "",
        pass,
        format!("max_rel_err={} reference={}", fmt_real(worst), fmt_real(reference)),
        "max_rel_err<=1e-9 reference~0.0139737",
    )
    .with_detail(format!("points={count} {fail}"))
}

fn adjacent_sandwich(reps: u64, seed: u64, inject: bool) -> Result<CriterionResult, ExperimentError> {
    let c = cfg(sfp(1, 1.5, 1.0, 2.5), 2, seed, reps)?;
    let scale = if inject { 1e-3 } else { 1.0 };
    let r = run_adjacent_mc_hooked(&c, 100f64.powf(2.0 / 3.0), 10f64.powf(2.0 / 3.0), scale)?;
    let d = detail_of(&r, "adjacent_sandwich");
    Ok(CriterionResult::new(
        0,
        "",
        r.passed(),
        format!("estimate={} stderr={}", field(&d, "estimate"), field(&d, "stderr")),
        format!("[{}, {}]", field(&d, "lower"), field(&d, "upper")),
    )
    .with_detail(format!("replicates={reps}")))
}

fn adjacent_decay(reps: u64, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let c = cfg(sfp(1, 1.5, 1.0, 2.5), 2, seed, reps)?;
    let r = run_adjacent_sweep(&c, SweepMode::FixedXy(4096.0), &[16.0, 32.0, 64.0, 128.0, 256.0])?;
    let d = detail_of(&r, "adjacent_slope");
    Ok(CriterionResult::new(0, "", r.passed(), format!("slope={}", field(&d, "slope")), "-0.75+-0.3")
        .with_detail(format!("r_xy=4096 r_yz=16..256 replicates={reps}")))
}

fn coupling(seeds: u64, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let c = cfg(sfp(1, 1.5, 1.0, 2.5), 256, seed, seeds)?;
    let r = run_coupling_check(&c, CouplingOptions::default())?;
    let d = detail_of(&r, "coupling_inclusion");
    Ok(CriterionResult::new(0, "", r.passed(), d, "violations=0").with_detail(format!("seeds={seeds} L=256")))
}

fn degree_tail(side: u64, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let mut vals = Vec::new();
    let mut pass = true;
    for (tau, gamma) in [(3.5, 3.75), (2.5, 2.25)] {
        let c = cfg(sfp(1, 1.5, 1.0, tau), side, seed, 1)?;
        let r = run_degree_experiment(&c, DegreeOptions { margin: side / 100, k: None })?;
        let ok = r.verdict_status("degree_hill") == Some(Status::Pass);
        pass &= ok;
        let h = field(&detail_of(&r, "degree_hill"), "hill");
        vals.push(format!("hill(tau={tau})={} target={gamma}", if h.is_empty() { "none".into() } else { h }));
    }
    Ok(CriterionResult::new(0, "", pass, vals.join(" "), "+-0.3").with_detail(format!("L={side}")))
}

fn bridging(reps: u64, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let c = cfg(sfp(1, 1.5, 1.0, 2.5), 2, seed, reps)?;
    let r = run_bridge_experiment(&c, 0.5, &[64, 128, 256, 512, 1024])?;
    let d = detail_of(&r, "bridge_slope");
    Ok(CriterionResult::new(0, "", r.passed(), format!("slope={}", field(&d, "slope")), "-1.75+-0.3")
        .with_detail(format!("replicates={reps}")))
}

/// Twenty self-avoiding paths with 2 to 4 edges and steps of 1 to 4.
pub fn random_short_paths(seed: u64, count: usize) -> Vec<Vec<Vertex>> {
    let mut st = ReplicateStream::new(seed ^ 0x5eed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let edges = 2 + (st.next_unit() * 3.0) as usize % 3;
        let mut pts = vec![0i64];
        for _ in 0..edges {
            let step = 1 + (st.next_unit() * 4.0) as i64 % 4;
            let sign = if st.next_unit() < 0.5 { -1 } else { 1 };
            pts.push(pts.last().copied().unwrap_or(0) + sign * step);
        }
        let distinct: BTreeSet<i64> = pts.iter().copied().collect();
        if distinct.len() == pts.len() {
            out.push(pts.into_iter().map(|x| Vertex::new(&[x])).collect());
        }
    }
    out
}

fn fkg(reps: u64, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let paths = random_short_paths(seed, 20);
    let mut fails = 0usize;
    let mut lrp_fails = 0usize;
    let mut min_z = f64::INFINITY;
    for (i, path) in paths.iter().enumerate() {
        let c = cfg(sfp(1, 1.5, 1.0, 2.5), 2, seed.wrapping_add(i as u64), reps)?;
        let r = run_fkg_check(&c, path)?;
        if r.verdict_status("fkg_inequality") != Some(Status::Pass) {
            fails += 1;
        }
        let z: f64 = field(&detail_of(&r, "fkg_inequality"), "min_z").parse().unwrap_or(f64::NAN);
        min_z = min_z.min(z);
        let cl = ExperimentConfig { params: c.params.with_kind(ModelKind::Lrp), ..c };
        let rl = run_fkg_check(&cl, path)?;
        if rl.verdict_status("fkg_lrp_equality") != Some(Status::Pass) {
            lrp_fails += 1;
        }
    }
    Ok(CriterionResult::new(
        0,
        "",
        fails == 0 && lrp_fails == 0,
        format!("sfp_failures={fails} lrp_failures={lrp_fails} min_z={}", fmt_real(min_z)),
        "failures=0",
    )
    .with_detail(format!("paths=20 replicates={reps}")))
}

fn hierarchy_machinery() -> CriterionResult {
    let h = figure2();
    let r = figure2_realization(&h);
    let valid = validate_hierarchy(&h, &r).is_ok();
    let paths = decompose_paths(&h).unwrap_or_default();
    let got: BTreeSet<_> = paths.iter().map(|p| edge_set(p)).collect();
    let want: BTreeSet<_> = figure2_expected_paths().iter().map(|p| edge_set(p)).collect();
    let decomposed = paths.len() == 5 && got == want;
    let mut mutation_ok = Vec::new();
    for (cond, hm, rm) in figure2_mutations() {
        let ok = matches!(validate_hierarchy(&hm, &rm), Err(HierarchyError::Violation(v)) if v.condition() == cond);
        mutation_ok.push(format!("c{cond}={ok}"));
    }
    let mutations = mutation_ok.iter().all(|s| s.ends_with("true"));
    let (h3, gp) = figure3();
    let total = gap_path_report(&h3, &gp).map(|r| r.total_length).unwrap_or(0);
    let fig3 = total == 7 && check_gap_paths_condition(&h3, &gp) == Ok(false);
    CriterionResult::new(
        0,
        "",
        valid && decomposed && mutations && fig3,
        format!("valid={valid} paths={} {} fig3_total={total}", paths.len(), mutation_ok.join(" ")),
        "valid=true paths=5 all mutations rejected fig3_total=7",
    )
}

fn second_moment_shape() -> CriterionResult {
    let p = sfp(1, 1.5, 1.0, 2.5);
    let two_a1 = 2.0 * p.exponents().alpha1;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for k in 4..=64 {
        let r = 2f64.powf(k as f64 / 4.0);
        match single_edge_second_moment(&p, r) {
            Ok(m) => {
                let v = m * r.powf(two_a1) / (1.0 + r.ln());
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Err(e) => return CriterionResult::error(10, "", e),
        }
    }
    let factor = hi / lo;
    CriterionResult::new(0, "", factor < 3.0, format!("factor={}", fmt_real(factor)), "factor<3")
        .with_detail(format!("min={} max={} over r=2..2^16", fmt_real(lo), fmt_real(hi)))
}

fn distances(quick: bool, seed: u64) -> Result<CriterionResult, ExperimentError> {
    let (side, hi, sources) = if quick { (20_000, 13, 60) } else { (200_000, 17, 200) };
    let p = ModelParams::new(1, 1.5, 5.0, 3.5, ModelKind::SfpNn).expect("valid");
    let c = cfg(p, side, seed, 1)?;
    let mut o = DistanceOptions::new(dyadic_list(4, hi), sources);
    o.margin = side / 100;
    let r = run_distance_experiment(&c, &o)?;
    let s = |rule: &str| r.verdict_status(rule) == Some(Status::Pass);
    let (a, b, d) = (s("distance_sfp_le_lrp"), s("distance_median_nondecreasing"), s("distance_ratio_decreasing"));
    let band = detail_of(&r, "distance_delta_band");
    Ok(CriterionResult::new(
        0,
        "",
        a && b && d,
        format!("sfp_le_lrp={a} median_nondecreasing={b} ratio_decreasing={d}"),
        "all true",
    )
    .with_detail(format!("L={side} N=2^4..2^{hi} informational: {band}")))
}

/// Re-runs three small experiments on one and on three worker threads and
/// compares the report bodies byte for byte.
fn determinism(seed: u64) -> Result<CriterionResult, ExperimentError> {
    let body = || -> Result<String, ExperimentError> {
        let c = cfg(sfp(1, 1.5, 1.0, 2.5), 2, seed, 3 * experiments::CHUNK + 17)?;
        let mut s = run_adjacent_mc_hooked(&c, 10.0, 4.0, 1.0)?.body();
        s += &run_coupling_check(&cfg(sfp(1, 1.5, 1.0, 2.5), 128, seed, 6)?, CouplingOptions::default())?.body();
        s += &run_fkg_check(&c, &[Vertex::new(&[0]), Vertex::new(&[2]), Vertex::new(&[3])])?.body();
        Ok(s)
    };
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| ExperimentError::InvalidKnob(e.to_string()));
    let a = pool(1)?.install(body)?;
    let b = pool(3)?.install(body)?;
    Ok(CriterionResult::new(0, "", a == b, format!("identical={}", a == b), "identical=true")
        .with_detail("threads 1 vs 3 in process; the acceptance suite also compares two CLI runs"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        let o = VerifyOptions::new(Scale::Quick, 0);
        for id in [1, 2, 9, 12] {
            let r = criterion(id, &o);
            assert!(r.pass, "{}", r.line());
        }
    }

    #[test]
    fn second_moment_shape_is_reported_faithfully() {
        let r = criterion(10, &VerifyOptions::new(Scale::Quick, 0));
        let f: f64 = field(&r.value, "factor").parse().unwrap();
        assert!((f - 3.58).abs() < 0.01, "{}", r.line());
        assert!(!r.pass);
    }

    #[test]
    fn injected_failure_fails() {
        let mut o = VerifyOptions::new(Scale::Quick, 0);
        o.inject_failure = true;
        assert!(!criterion(3, &o).pass);
        o.inject_failure = false;
        assert!(criterion(3, &o).pass);
    }

    #[test]
    fn short_paths_are_valid() {
        let ps = random_short_paths(1, 20);
        assert_eq!(ps.len(), 20);
        assert!(ps.iter().all(|p| (3..=5).contains(&p.len())));
    }
}
