//! Model parameters, derived exponents and the phase-diagram regime.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("parameter `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("tau must be greater than 1")]
    TauTooSmall,
    #[error("unknown model kind `{0}` (expected sfp, lrp or sfpnn)")]
    UnknownKind(String),
}

/// Which random graph is being built on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Scale-free percolation: Pareto vertex weights.
    Sfp,
    /// Long-range percolation: all weights equal to one.
    Lrp,
    /// Scale-free percolation with every nearest-neighbour edge open.
    SfpNn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Sfp => "sfp",
            ModelKind::Lrp => "lrp",
            ModelKind::SfpNn => "sfpnn",
        }
    }

    /// Whether vertices of this kind carry sampled weights.
    pub fn has_weights(self) -> bool {
        !matches!(self, ModelKind::Lrp)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sfp" => Ok(ModelKind::Sfp),
            "lrp" => Ok(ModelKind::Lrp),
            "sfpnn" | "sfp_nn" | "sfp-nn" => Ok(ModelKind::SfpNn),
            _ => Err(ParamError::UnknownKind(s.to_string())),
        }
    }
}

/// The quadruple `(d, alpha, lambda, tau)` plus the model kind.
///
/// Fields are private so that every instance has passed validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    d: u32,
    alpha: f64,
    lambda: f64,
    tau: f64,
    kind: ModelKind,
}

impl ModelParams {
    pub fn new(d: u32, alpha: f64, lambda: f64, tau: f64, kind: ModelKind) -> Result<Self, ParamError> {
        if d < 1 {
            return Err(ParamError::NonPositive("d"));
        }
        // `!(x > 0)` also rejects NaN.
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ParamError::NonPositive("alpha"));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(ParamError::NonPositive("lambda"));
        }
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(ParamError::TauTooSmall);
        }
        Ok(ModelParams { d, alpha, lambda, tau, kind })
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn with_kind(&self, kind: ModelKind) -> Self {
        ModelParams { kind, ..*self }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self, ParamError> {
        ModelParams::new(self.d, self.alpha, lambda, self.tau, self.kind)
    }

    pub fn exponents(&self) -> DerivedExponents {
        derived_exponents(self)
    }

    pub fn regime(&self) -> RegimeLabel {
        classify_regime(self)
    }
}

/// Same as [`ModelParams::new`]; kept as a free function to mirror the other operations.
pub fn validate_params(d: u32, alpha: f64, lambda: f64, tau: f64, kind: ModelKind) -> Result<ModelParams, ParamError> {
    ModelParams::new(d, alpha, lambda, tau, kind)
}

/// A `log 2 / log(2d / a)` exponent.
///
/// `Infinite` is the sentinel for `a >= 2d`; `Undefined` covers `a <= 0`,
/// which only happens for `alpha2` when `gamma <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaValue {
    Finite(f64),
    Infinite,
    Undefined,
}

impl DeltaValue {
    fn from_effective_alpha(d: u32, a: f64) -> Self {
        let two_d = 2.0 * d as f64;
        if !(a > 0.0) {
            DeltaValue::Undefined
        } else if a >= two_d {
            DeltaValue::Infinite
        } else {
            DeltaValue::Finite(std::f64::consts::LN_2 / (two_d / a).ln())
        }
    }

    /// Numeric view: `+inf` for the sentinel, NaN when undefined.
    pub fn value(self) -> f64 {
        match self {
            DeltaValue::Finite(v) => v,
            DeltaValue::Infinite => f64::INFINITY,
            DeltaValue::Undefined => f64::NAN,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, DeltaValue::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedExponents {
    /// Degree-tail exponent `alpha (tau - 1) / d`.
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub delta: DeltaValue,
    pub delta1: DeltaValue,
    pub delta2: DeltaValue,
}

/// Computes `gamma`, `alpha1 = alpha ∧ gamma d / 2`, `alpha2 = alpha ∧ (gamma - 1) d`
/// and the three `Delta` exponents.
///
/// The minima are evaluated through the equivalent threshold tests on `tau`
/// (`tau >= 3`, `alpha (tau - 2) >= d`) so that the saturated branch returns
/// `alpha` exactly.
pub fn derived_exponents(p: &ModelParams) -> DerivedExponents {
    let d = p.d as f64;
    let (alpha, tau) = (p.alpha, p.tau);
    let gamma = alpha * (tau - 1.0) / d;
    let alpha1 = if tau >= 3.0 { alpha } else { alpha * (tau - 1.0) / 2.0 };
    let alpha2 = if alpha * (tau - 2.0) >= d {
        alpha
    } else {
        (alpha * (tau - 1.0) - d).min(alpha)
    };
    DerivedExponents {
        gamma,
        alpha1,
        alpha2,
        delta: DeltaValue::from_effective_alpha(p.d, alpha),
        delta1: DeltaValue::from_effective_alpha(p.d, alpha1),
        delta2: DeltaValue::from_effective_alpha(p.d, alpha2),
    }
}

/// Distance behaviour predicted for a point of the `(tau, alpha)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeLabel {
    TwoHops,
    BoundedHops(u32),
    LogLog,
    PolylogA,
    PolylogB,
    PolylogC,
    Linear,
    Boundary,
}

impl RegimeLabel {
    pub fn is_polylog(self) -> bool {
        matches!(self, RegimeLabel::PolylogA | RegimeLabel::PolylogB | RegimeLabel::PolylogC)
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::TwoHops => f.write_str("TWO_HOPS"),
            RegimeLabel::BoundedHops(k) => write!(f, "BOUNDED_HOPS({k})"),
            RegimeLabel::LogLog => f.write_str("LOGLOG"),
            RegimeLabel::PolylogA => f.write_str("POLYLOG_A"),
            RegimeLabel::PolylogB => f.write_str("POLYLOG_B"),
            RegimeLabel::PolylogC => f.write_str("POLYLOG_C"),
            RegimeLabel::Linear => f.write_str("LINEAR"),
            RegimeLabel::Boundary => f.write_str("BOUNDARY"),
        }
    }
}

/// Classifies by precedence
/// `BOUNDARY > TWO_HOPS > BOUNDED_HOPS > LOGLOG > LINEAR > POLYLOG_{A,B,C}`.
///
/// Boundary tests are exact comparisons of the computed
/// `gamma = alpha (tau - 1) / d` against 1 and 2 and of `alpha` against `d`
/// and `2d`; all other comparisons with `gamma` use the same computed value.
///
/// A line is `BOUNDARY` only along the stretch where it separates two
/// different regimes: `gamma = 2` for `alpha > d`, `alpha = d` for
/// `gamma > 1`, `alpha = 2d` for `gamma > 2`. Elsewhere (e.g. `gamma = 2`
/// with `alpha < d`) both sides carry the same label.
pub fn classify_regime(p: &ModelParams) -> RegimeLabel {
    let d = p.d as f64;
    let (alpha, tau) = (p.alpha, p.tau);
    let gamma = alpha * (tau - 1.0) / d;
    let on_boundary = gamma == 1.0
        || (gamma == 2.0 && alpha > d)
        || (alpha == d && gamma > 1.0)
        || (alpha == 2.0 * d && gamma > 2.0);
    if on_boundary {
        return RegimeLabel::Boundary;
    }
    if gamma < 1.0 {
        return RegimeLabel::TwoHops;
    }
    if alpha < d {
        let k = (d / (d - alpha)).ceil();
        return RegimeLabel::BoundedHops(k as u32);
    }
    if gamma < 2.0 {
        return RegimeLabel::LogLog;
    }
    if alpha > 2.0 * d {
        return RegimeLabel::Linear;
    }
    if alpha * (tau - 2.0) < d {
        RegimeLabel::PolylogA
    } else if tau < 3.0 {
        RegimeLabel::PolylogB
    } else {
        RegimeLabel::PolylogC
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sfp(d: u32, alpha: f64, tau: f64) -> ModelParams {
        ModelParams::new(d, alpha, 1.0, tau, ModelKind::Sfp).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert!(validate_params(1, 1.5, 1.0, 2.5, ModelKind::Sfp).is_ok());
        assert_eq!(
            validate_params(1, 1.5, 0.0, 2.5, ModelKind::Sfp),
            Err(ParamError::NonPositive("lambda"))
        );
        assert_eq!(validate_params(2, 3.0, 2.0, 1.0, ModelKind::Sfp), Err(ParamError::TauTooSmall));
        assert_eq!(validate_params(0, 1.0, 1.0, 2.0, ModelKind::Sfp), Err(ParamError::NonPositive("d")));
        assert_eq!(validate_params(1, -1.0, 1.0, 2.0, ModelKind::Sfp), Err(ParamError::NonPositive("alpha")));
        assert_eq!(validate_params(1, f64::NAN, 1.0, 2.0, ModelKind::Sfp), Err(ParamError::NonPositive("alpha")));
    }

    // Reference values from a 30-digit evaluation of the defining formulas.
    #[test]
    fn exponents_reference_point() {
        let e = sfp(1, 1.5, 2.5).exponents();
        assert_eq!(e.gamma, 2.25);
        assert_eq!(e.alpha1, 1.125);
        assert_eq!(e.alpha2, 1.25);
        assert!((e.delta.value() - 2.40942083965).abs() < 1e-10);
        assert!((e.delta1.value() - 1.20471041983).abs() < 1e-10);
        assert!((e.delta2.value() - 1.47476984736).abs() < 1e-10);
    }

    #[test]
    fn exponents_light_tail() {
        let e = sfp(1, 1.5, 3.5).exponents();
        assert_eq!(e.gamma, 3.75);
        assert_eq!(e.alpha1, 1.5);
        assert_eq!(e.alpha2, 1.5);
        assert_eq!(e.delta1, e.delta);
        assert_eq!(e.delta2, e.delta);
        assert!((e.delta.value() - 2.40942083965).abs() < 1e-10);
    }

    #[test]
    fn alpha2_saturates_in_regime_b() {
        let e = sfp(1, 1.8, 2.8).exponents();
        assert_eq!(e.alpha2, 1.8);
        assert_eq!(e.delta2, e.delta);
        assert_eq!(e.alpha1, 1.8 * (2.8 - 1.0) / 2.0);
    }

    #[test]
    fn delta_sentinels() {
        let e = sfp(1, 2.5, 3.0).exponents();
        assert_eq!(e.delta, DeltaValue::Infinite);
        assert!(e.delta.value().is_infinite());
        let e = sfp(1, 1.5, 1.5).exponents();
        // gamma = 0.75, so (gamma - 1) d < 0.
        assert_eq!(e.delta2, DeltaValue::Undefined);
        assert!(e.delta2.value().is_nan());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(sfp(1, 0.5, 5.0).regime(), RegimeLabel::BoundedHops(2));
        assert_eq!(sfp(1, 1.5, 2.5).regime(), RegimeLabel::PolylogA);
        assert_eq!(sfp(1, 2.5, 3.0).regime(), RegimeLabel::Linear);
        assert_eq!(sfp(1, 1.5, 7.0 / 3.0).regime(), RegimeLabel::Boundary);
        assert_eq!(sfp(1, 1.5, 5.0 / 3.0).regime(), RegimeLabel::Boundary);
        assert_eq!(sfp(2, 2.0, 5.0).regime(), RegimeLabel::Boundary);
        assert_eq!(sfp(2, 4.0, 5.0).regime(), RegimeLabel::Boundary);
        assert_eq!(sfp(1, 1.5, 1.2).regime(), RegimeLabel::TwoHops);
        // gamma < 1 and alpha < d overlap: TWO_HOPS wins.
        assert_eq!(sfp(1, 0.5, 2.0).regime(), RegimeLabel::TwoHops);
        assert_eq!(sfp(1, 1.5, 2.0).regime(), RegimeLabel::LogLog);
        assert_eq!(sfp(1, 1.8, 2.8).regime(), RegimeLabel::PolylogB);
        assert_eq!(sfp(1, 1.5, 3.5).regime(), RegimeLabel::PolylogC);
        assert_eq!(sfp(2, 1.0, 10.0).regime(), RegimeLabel::BoundedHops(2));
        assert_eq!(sfp(3, 1.0, 10.0).regime(), RegimeLabel::BoundedHops(2));
        assert_eq!(sfp(1, 0.75, 10.0).regime(), RegimeLabel::BoundedHops(4));
        // Boundary lines that do not separate two regimes.
        assert_eq!(sfp(1, 1.0, 1.5).regime(), RegimeLabel::TwoHops);
        assert_eq!(sfp(1, 2.0, 1.8).regime(), RegimeLabel::LogLog);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("SFP_NN".parse::<ModelKind>().unwrap(), ModelKind::SfpNn);
        assert_eq!("lrp".parse::<ModelKind>().unwrap(), ModelKind::Lrp);
        assert!("percolation".parse::<ModelKind>().is_err());
    }
}
