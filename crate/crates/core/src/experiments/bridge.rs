//! `P(x ~ A ~ y)` with `A` the cube of side `N^beta` at the midpoint.
//!
//! With `x = 0` and `y = N e_1`, each replicate draws all weights and scores
//! `1 - Π_{z ∈ A} (1 - p_xz p_zy)`, the conditional probability that some
//! `z ∈ A` is adjacent to both.

use super::{chunked, fmt_real, require_tau_2_3, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::connection_probability;
use crate::lattice::Vertex;
use crate::moments::bridging_exponent;
use crate::params::ModelParams;
use crate::rng::{replicate_seed, ReplicateStream};
use crate::stats::{loglog_slope, EstimateWithCI, Running};

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeGeometry {
    pub x: Vertex,
    pub y: Vertex,
    pub centre: Vertex,
    /// Sup-norm half-width `floor(N^beta / 2)`.
    pub half_width: i64,
    /// `(|x - z|, |z - y|)` for every `z ∈ A`.
    pub distances: Vec<(f64, f64)>,
    /// The cube reaches `x` or `y`.
    pub degenerate: bool,
}

pub fn bridge_geometry(d: u32, n: u64, beta: f64) -> Result<BridgeGeometry, ExperimentError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ExperimentError::BetaOutOfRange(beta));
    }
    if n == 0 || d == 0 {
        return Err(ExperimentError::InvalidKnob("N and d must be positive".into()));
    }
    let d = d as usize;
    let n_i = n as i64;
    let mut y = vec![0i64; d];
    y[0] = n_i;
    let mut c = vec![0i64; d];
    c[0] = n_i / 2;
    let h = ((n as f64).powf(beta) / 2.0).floor() as i64;
    let degenerate = h >= n_i / 2 || h >= n_i - n_i / 2;
    let (x, y, centre) = (Vertex::origin(d as u32), Vertex::from(y), Vertex::from(c));
    let mut distances = Vec::new();
    let mut z = vec![0i64; d];
    let side = 2 * h + 1;
    let count = (side as u64).pow(d as u32);
    for mut k in 0..count {
        for j in (0..d).rev() {
            z[j] = centre.coords()[j] - h + (k % side as u64) as i64;
            k /= side as u64;
        }
        let zv = Vertex::new(&z);
        if zv != x && zv != y {
            distances.push((x.dist(&zv), zv.dist(&y)));
        }
    }
    Ok(BridgeGeometry { x, y, centre, half_width: h, distances, degenerate })
}

pub fn bridge_estimate(
    p: &ModelParams,
    geom: &BridgeGeometry,
    replicates: u64,
    seed: u64,
) -> Result<EstimateWithCI, ExperimentError> {
    if replicates == 0 {
        return Err(ExperimentError::ZeroReplicates);
    }
    let lam = p.lambda();
    let c: Vec<(f64, f64)> = geom
        .distances
        .iter()
        .map(|&(a, b)| (lam * a.powf(-p.alpha()), lam * b.powf(-p.alpha())))
        .collect();
    let tau = p.tau();
    let weighted = p.kind().has_weights();
    let parts = chunked(replicates, |range| {
        let mut acc = Running::new();
        for i in range {
            let mut st = ReplicateStream::new(replicate_seed(seed, i));
            let (wx, wy) = if weighted { (st.next_pareto(tau), st.next_pareto(tau)) } else { (1.0, 1.0) };
            let mut log_none = 0.0;
            for &(cx, cy) in &c {
                let wz = if weighted { st.next_pareto(tau) } else { 1.0 };
                let both = connection_probability(cx * wx * wz) * connection_probability(cy * wz * wy);
                log_none += (-both).ln_1p();
            }
            acc.push(-log_none.exp_m1());
        }
        acc
    });
    let mut all = Running::new();
    parts.iter().for_each(|r| all.merge(r));
    Ok(all.estimate())
}

pub fn run_bridge_experiment(cfg: &ExperimentConfig, beta: f64, n_list: &[u64]) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = &cfg.params;
    require_tau_2_3(p)?;
    let target = -bridging_exponent(p, beta)?;
    let mut rep = ExperimentReport::new("bridge", cfg.header("bridge"), &["N", "cube_points", "estimate", "stderr"]);
    rep.knob("beta", fmt_real(beta));
    rep.knob("tolerance", "slope +- 0.3");
    let mut pts = Vec::new();
    let mut all_positive = true;
    for &n in n_list {
        let geom = bridge_geometry(p.d(), n, beta)?;
        if geom.degenerate {
            rep.flag(&format!("GeometryDegenerate N={n}"));
            continue;
        }
        let est = bridge_estimate(p, &geom, cfg.replicates, cfg.seed)?;
        rep.row(vec![n.to_string(), geom.distances.len().to_string(), fmt_real(est.mean), fmt_real(est.stderr)]);
        if est.mean > 0.0 {
            pts.push((n as f64, est.mean));
        } else {
            all_positive = false;
        }
    }
    rep.verdict("bridge_nonzero", Status::from_bool(all_positive && !pts.is_empty()), format!("points={}", pts.len()));
    if pts.len() >= 3 {
        let slope = loglog_slope(&pts)?;
        rep.verdict(
            "bridge_slope",
            Status::from_bool((slope.mean - target).abs() <= 0.3),
            format!("slope={} stderr={} target={}", fmt_real(slope.mean), fmt_real(slope.stderr), fmt_real(target)),
        );
    }
    rep.wallclock_secs = t.secs();
    Ok(rep)
}
