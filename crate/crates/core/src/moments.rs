//! Probabilities and moments of single edges, paths and adjacent edges.
//!
//! Expectations over a Pareto weight `W` (`P(W > u) = u^{-s}`, `s = tau - 1`)
//! are computed in the variable `v = W^{-s}`, which is uniform on `(0, 1]`;
//! kinks of the integrand become breakpoints and pieces away from `v = 0` are
//! integrated in `ln v`.

use thiserror::Error;

use crate::graph::connection_probability;
use crate::lattice::{dist2, Vertex};
use crate::params::ModelParams;
use crate::quad::{integrate_pieces, QuadError, QuadResult, Tolerance};

pub const QUAD_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("distance must be positive (got {0})")]
    NonPositiveDistance(f64),
    #[error("weights must be at least 1 (got {0})")]
    WeightBelowOne(f64),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("path needs at least two vertices")]
    PathTooShort,
    #[error("path repeats vertex {1} at position {0}")]
    DegeneratePath(usize, Vertex),
    #[error("path vertices must have dimension {0}")]
    DimensionMismatch(u32),
    #[error("tau = {0} is outside the admissible range {1}")]
    TauOutOfRange(f64, &'static str),
    #[error("threshold a_yz^alpha = {b} is below lambda = {lambda}")]
    ThresholdBelowFloor { b: f64, lambda: f64 },
    #[error("a_xy = {a_xy} must be at least a_yz = {a_yz}")]
    DistanceOrder { a_xy: f64, a_yz: f64 },
    #[error("ball radius {radius} is below 4 |u - v| = {needed}")]
    RadiusTooSmall { radius: f64, needed: f64 },
    #[error("the two points coincide")]
    CoincidentPoints,
    #[error("alpha must exceed d for the convolution sum")]
    AlphaNotAboveDimension,
    #[error("beta = {0} is outside (0, 1)")]
    BetaOutOfRange(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

fn tol() -> Tolerance {
    Tolerance::relative(QUAD_RTOL)
}

/// `E[g(W)]` for `W` Pareto with `P(W > u) = u^{-s}` on `[1, inf)`.
/// `kinks` are points in `u` where `g` is not smooth.
pub fn pareto_expectation<G: FnMut(f64) -> f64>(mut g: G, s: f64, kinks: &[f64]) -> Result<QuadResult, QuadError> {
    let mut vs: Vec<f64> = kinks.iter().filter(|&&k| k > 1.0 && k.is_finite()).map(|&k| k.powf(-s)).collect();
    vs.push(1.0);
    vs.sort_by(f64::total_cmp);
    vs.dedup();
    let first = vs[0];
    let mut near_zero = |v: f64| if v > 0.0 { g(v.powf(-1.0 / s)) } else { g(f64::INFINITY) };
    let mut total = integrate_pieces(&mut near_zero, &[0.0, first], tol())?;
    if vs.len() > 1 {
        let logs: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
        let mut in_log = |y: f64| g((-y / s).exp()) * y.exp();
        let body = integrate_pieces(&mut in_log, &logs, tol())?;
        total.value += body.value;
        total.error += body.error;
        total.evaluations += body.evaluations;
    }
    Ok(total)
}

/// `1 - exp(-lambda w_x w_y r^{-alpha})`; weights are ignored for LRP.
pub fn edge_probability(p: &ModelParams, w_x: f64, w_y: f64, r: f64) -> Result<f64, MomentError> {
    if !(r > 0.0) {
        return Err(MomentError::NonPositiveDistance(r));
    }
    let (w_x, w_y) = if p.kind().has_weights() { (w_x, w_y) } else { (1.0, 1.0) };
    for w in [w_x, w_y] {
        if !(w >= 1.0) {
            return Err(MomentError::WeightBelowOne(w));
        }
    }
    Ok(connection_probability(p.lambda() * w_x * w_y * r.powf(-p.alpha())))
}

/// `E[(lambda W_x W_y r^{-alpha} ∧ 1)^2]` over two independent weights.
///
/// `Z = W_x W_y` has density `s^2 z^{-tau} ln z` on `[1, inf)`. Below the
/// saturation point `z* = r^alpha / lambda` the integral runs in `ln z`;
/// above it the substitution `z = z* v^{-1/s}` gives the bounded integrand
/// `s z*^{-s} (ln z* - ln v / s)` on `(0, 1]`.
pub fn single_edge_second_moment(p: &ModelParams, r: f64) -> Result<f64, MomentError> {
    if !(r > 0.0) {
        return Err(MomentError::NonPositiveDistance(r));
    }
    let c = p.lambda() * r.powf(-p.alpha());
    if c >= 1.0 {
        return Ok(1.0);
    }
    let s = p.tau() - 1.0;
    let zs = 1.0 / c;
    let lzs = zs.ln();
    let beta = 3.0 - p.tau();
    let mut body = |y: f64| c * c * s * s * (beta * y).exp() * y;
    let below = integrate_pieces(&mut body, &[0.0, lzs], tol())?;
    let scale = s * zs.powf(-s);
    let mut tail = |v: f64| scale * (lzs - v.ln() / s);
    let above = integrate_pieces(&mut tail, &[0.0, 1.0], tol())?;
    Ok((below.value + above.value).min(1.0))
}

/// Product bound on the probability that a path is open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBound {
    pub value: f64,
    pub delta: f64,
    pub c_delta: f64,
    /// `alpha1 - delta`.
    pub exponent: f64,
    /// The bound exceeds 1 and says nothing.
    pub vacuous: bool,
    /// `alpha1 - delta <= d`: the bound is not summable over paths.
    pub below_dimension: bool,
}

/// Default slack `min(alpha1 - d, alpha - d) / 4`.
pub fn default_delta(p: &ModelParams) -> f64 {
    let e = p.exponents();
    let d = p.d() as f64;
    (e.alpha1 - d).min(p.alpha() - d) / 4.0
}

/// Empirical constant `max(2, max_r sqrt(M(r)) r^{alpha1 - delta})` over
/// `r = 2^{k/4}`, `k = 0..=64`. Reported as a fit, not a proven constant.
pub fn fitted_c_delta(p: &ModelParams, delta: f64) -> Result<f64, MomentError> {
    let a = p.exponents().alpha1 - delta;
    let mut best: f64 = 2.0;
    for k in 0..=64 {
        let r = 2f64.powf(k as f64 / 4.0);
        best = best.max(single_edge_second_moment(p, r)?.sqrt() * r.powf(a));
    }
    Ok(best)
}

/// `Π_i C_delta |z_i - z_{i-1}|^{-(alpha1 - delta)}`, unclamped.
pub fn path_probability_bound(
    p: &ModelParams,
    path: &[Vertex],
    delta: f64,
    c_delta: f64,
) -> Result<MomentBound, MomentError> {
    if path.len() < 2 {
        return Err(MomentError::PathTooShort);
    }
    if path.iter().any(|z| z.dim() != p.d() as usize) {
        return Err(MomentError::DimensionMismatch(p.d()));
    }
    let exponent = p.exponents().alpha1 - delta;
    let mut value = 1.0;
    for (i, w) in path.windows(2).enumerate() {
        let d2 = dist2(w[0].coords(), w[1].coords());
        if d2 == 0 {
            return Err(MomentError::DegeneratePath(i + 1, w[1].clone()));
        }
        value *= c_delta * (d2 as f64).sqrt().powf(-exponent);
    }
    Ok(MomentBound {
        value,
        delta,
        c_delta,
        exponent,
        vacuous: value > 1.0,
        below_dimension: exponent <= p.d() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjacentEdgeResult {
    /// `E[(lambda W / A ∧ 1)(lambda W / B ∧ 1)]`, `A = a_xy^alpha`, `B = a_yz^alpha`.
    pub middle_expectation: f64,
    /// `middle / 4`.
    pub lower: f64,
    /// `mu^2 middle` with `mu = (tau - 1)/(tau - 2)`.
    pub upper: f64,
    pub a_xy: f64,
    pub a_yz: f64,
}

impl AdjacentEdgeResult {
    fn new(p: &ModelParams, middle: f64, a_xy: f64, a_yz: f64) -> Self {
        let mu = (p.tau() - 1.0) / (p.tau() - 2.0);
        AdjacentEdgeResult { middle_expectation: middle, lower: middle / 4.0, upper: mu * mu * middle, a_xy, a_yz }
    }
}

/// The three terms of the closed form, in order.
pub fn adjacent_terms(p: &ModelParams, a_xy: f64, a_yz: f64) -> Result<[f64; 3], MomentError> {
    let tau = p.tau();
    if !(tau > 2.0 && tau < 3.0) {
        return Err(MomentError::TauOutOfRange(tau, "(2, 3)"));
    }
    if !(a_yz > 0.0) {
        return Err(MomentError::NonPositiveDistance(a_yz));
    }
    if a_xy < a_yz {
        return Err(MomentError::DistanceOrder { a_xy, a_yz });
    }
    let lam = p.lambda();
    let a = a_xy.powf(p.alpha());
    let b = a_yz.powf(p.alpha());
    if b < lam {
        return Err(MomentError::ThresholdBelowFloor { b, lambda: lam });
    }
    let s = tau - 1.0;
    let t1 = s / ((3.0 - tau) * (tau - 2.0)) * lam.powf(s) * b.powf(-(tau - 2.0)) / a;
    let t2 = -s / (3.0 - tau) * lam * lam / (a * b);
    let t3 = -lam.powf(s) / ((tau - 2.0) * a.powf(s));
    Ok([t1, t2, t3])
}

/// Closed form of the adjacent-edge expectation, valid for `tau ∈ (2, 3)`,
/// `a_xy >= a_yz` and `a_yz^alpha >= lambda`.
pub fn adjacent_expectation_exact(p: &ModelParams, a_xy: f64, a_yz: f64) -> Result<AdjacentEdgeResult, MomentError> {
    let [t1, t2, t3] = adjacent_terms(p, a_xy, a_yz)?;
    Ok(AdjacentEdgeResult::new(p, t1 + t2 + t3, a_xy, a_yz))
}

/// The same expectation by quadrature; needs only `tau > 2`.
pub fn adjacent_expectation_quadrature(p: &ModelParams, a_xy: f64, a_yz: f64) -> Result<f64, MomentError> {
    if !(p.tau() > 2.0) {
        return Err(MomentError::TauOutOfRange(p.tau(), "(2, inf)"));
    }
    for r in [a_xy, a_yz] {
        if !(r > 0.0) {
            return Err(MomentError::NonPositiveDistance(r));
        }
    }
    let lam = p.lambda();
    let a = a_xy.powf(p.alpha());
    let b = a_yz.powf(p.alpha());
    let g = |u: f64| (lam * u / a).min(1.0) * (lam * u / b).min(1.0);
    Ok(pareto_expectation(g, p.tau() - 1.0, &[a / lam, b / lam])?.value)
}

/// Result of the truncated lattice convolution sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionResult {
    pub sum: f64,
    /// `sum * |u - v|^alpha`.
    pub ratio: f64,
    /// Upper bound on the part of the full sum outside both balls.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Surface area of the unit sphere in `R^d`.
fn sphere_area(d: u32) -> f64 {
    use std::f64::consts::PI;
    let (mut a, mut k) = if d % 2 == 1 { (2.0, 1) } else { (2.0 * PI, 2) };
    while k < d {
        a *= 2.0 * PI / k as f64;
        k += 2;
    }
    a
}

/// `S = Σ_w |u - w|^{-alpha} |v - w|^{-alpha}` over lattice points `w ∉ {u, v}`
/// within distance `radius` of `u` or `v`.
pub fn convolution_ratio(p: &ModelParams, u: &Vertex, v: &Vertex, radius: f64) -> Result<ConvolutionResult, MomentError> {
    let d = p.d() as usize;
    if u.dim() != d || v.dim() != d {
        return Err(MomentError::DimensionMismatch(p.d()));
    }
    if u == v {
        return Err(MomentError::CoincidentPoints);
    }
    let alpha = p.alpha();
    if !(alpha > d as f64) {
        return Err(MomentError::AlphaNotAboveDimension);
    }
    let uv = u.dist(v);
    if !(radius >= 4.0 * uv) {
        return Err(MomentError::RadiusTooSmall { radius, needed: 4.0 * uv });
    }
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    let lo: Vec<i64> = (0..d).map(|k| u.coords()[k].min(v.coords()[k]) - r).collect();
    let hi: Vec<i64> = (0..d).map(|k| u.coords()[k].max(v.coords()[k]) + r).collect();
    let half = -0.5 * alpha;
    let mut w = lo.clone();
    let mut sum = 0.0;
    let mut terms = 0usize;
    'outer: loop {
        let du = dist2(&w, u.coords());
        let dv = dist2(&w, v.coords());
        if du != 0 && dv != 0 && ((du as f64) <= r2 || (dv as f64) <= r2) {
            sum += ((du as f64) * (dv as f64)).powf(half);
            terms += 1;
        }
        for k in (0..d).rev() {
            if w[k] < hi[k] {
                w[k] += 1;
                continue 'outer;
            }
            w[k] = lo[k];
        }
        break;
    }
    let df = d as f64;
    let inner = radius - df.sqrt() / 2.0;
    let tail_bound = (4.0f64 / 3.0).powf(alpha)
        * (1.0 + df.sqrt() / (2.0 * radius)).powf(2.0 * alpha)
        * sphere_area(p.d())
        * inner.powf(df - 2.0 * alpha)
        / (2.0 * alpha - df);
    Ok(ConvolutionResult { sum, ratio: sum * uv.powf(alpha), tail_bound, terms })
}

/// Decay exponent `2 alpha1 - d beta` of the bridged connection.
pub fn bridging_exponent(p: &ModelParams, beta: f64) -> Result<f64, MomentError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(MomentError::BetaOutOfRange(beta));
    }
    Ok(2.0 * p.exponents().alpha1 - p.d() as f64 * beta)
}
