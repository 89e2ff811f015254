//! Estimation utilities: running moments, tail-index and slope fits.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("k = {k} must be positive and below the sample size {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("samples must be positive")]
    NonPositiveSample,
    #[error("all top order statistics coincide with the threshold")]
    DegenerateTail,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point ({0}, {1}) has a non-positive coordinate")]
    NonPositivePoint(f64, f64),
    #[error("all x coordinates coincide")]
    DegenerateAbscissa,
    #[error("no samples")]
    Empty,
}

/// Mean with standard error `sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl EstimateWithCI {
    /// Whether `target` lies within `k` standard errors.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }
}

/// Streaming mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Running) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> EstimateWithCI {
        let se = if self.n == 0 { f64::NAN } else { (self.variance() / self.n as f64).sqrt() };
        EstimateWithCI { mean: self.mean, stderr: se, n: self.n }
    }
}

/// Means and covariance of a fixed-size vector of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningCov {
    n: u64,
    mean: Vec<f64>,
    c: Vec<f64>,
}

impl RunningCov {
    pub fn new(dim: usize) -> Self {
        RunningCov { n: 0, mean: vec![0.0; dim], c: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn push(&mut self, x: &[f64]) {
        let k = self.dim();
        self.n += 1;
        let nf = self.n as f64;
        let d: Vec<f64> = (0..k).map(|i| x[i] - self.mean[i]).collect();
        for i in 0..k {
            self.mean[i] += d[i] / nf;
        }
        for i in 0..k {
            for j in 0..k {
                self.c[i * k + j] += d[i] * (x[j] - self.mean[j]);
            }
        }
    }

    pub fn merge(&mut self, o: &RunningCov) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = o.clone();
            return;
        }
        let k = self.dim();
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let d: Vec<f64> = (0..k).map(|i| o.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            for j in 0..k {
                self.c[i * k + j] += o.c[i * k + j] + d[i] * d[j] * na * nb / n;
            }
        }
        for i in 0..k {
            self.mean[i] += d[i] * nb / n;
        }
        self.n += o.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Sample covariance of components `i`, `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.c[i * self.dim() + j] / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self, i: usize) -> EstimateWithCI {
        EstimateWithCI { mean: self.mean[i], stderr: (self.cov(i, i) / self.n as f64).sqrt(), n: self.n }
    }

    /// Delta-method standard error of `g(means)` for the gradient `grad`.
    pub fn delta_stderr(&self, grad: &[f64]) -> f64 {
        let k = self.dim();
        let mut v = 0.0;
        for i in 0..k {
            for j in 0..k {
                v += grad[i] * grad[j] * self.cov(i, j);
            }
        }
        (v.max(0.0) / self.n as f64).sqrt()
    }
}

/// Hill estimator of the tail index from the `k` largest samples, with the
/// `(k+1)`-th largest as threshold. Standard error is `estimate / sqrt(k)`.
pub fn hill_estimator(samples: &[f64], k: usize) -> Result<EstimateWithCI, StatsError> {
    let n = samples.len();
    if k == 0 || k >= n {
        return Err(StatsError::KTooLarge { k, n });
    }
    if samples.iter().any(|&x| !(x > 0.0)) {
        return Err(StatsError::NonPositiveSample);
    }
    let mut s = samples.to_vec();
    // Put the k+1 largest at the end, in no particular order except the threshold.
    let pos = n - k - 1;
    s.select_nth_unstable_by(pos, |a, b| a.total_cmp(b));
    let threshold = s[pos].ln();
    let mean_excess = s[pos + 1..].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    if !(mean_excess > 0.0) {
        return Err(StatsError::DegenerateTail);
    }
    let est = 1.0 / mean_excess;
    Ok(EstimateWithCI { mean: est, stderr: est / (k as f64).sqrt(), n: k as u64 })
}

/// Least-squares line through `(x, y)` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: EstimateWithCI,
    pub intercept: f64,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Result<LineFit, StatsError> {
    let n = points.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(StatsError::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(LineFit { slope: EstimateWithCI { mean: slope, stderr: se, n: n as u64 }, intercept })
}

/// Slope of `log y` against `log x` by ordinary least squares.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<EstimateWithCI, StatsError> {
    if points.len() < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: points.len() });
    }
    if let Some(&(x, y)) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(StatsError::NonPositivePoint(x, y));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    Ok(linear_fit(&logs)?.slope)
}

/// Median of a slice (mean of the two middle values for even lengths);
/// infinities are allowed.
pub fn median(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 || v[m - 1] == v[m] { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ReplicateStream;

    #[test]
    fn hill_on_pareto() {
        let theta = 2.5;
        let mut s = ReplicateStream::new(7);
        // next_pareto(tau) has tail index tau - 1.
        let xs: Vec<f64> = (0..1_000_000).map(|_| s.next_pareto(theta + 1.0)).collect();
        let h = hill_estimator(&xs, 10_000).unwrap();
        assert!(h.within(theta, 3.0), "{h:?}");
        let doubled: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let h2 = hill_estimator(&doubled, 10_000).unwrap();
        assert!((h.mean - h2.mean).abs() < 1e-9 * h.mean);
    }

    #[test]
    fn hill_errors() {
        assert_eq!(hill_estimator(&[3.0; 10], 4), Err(StatsError::DegenerateTail));
        assert!(matches!(hill_estimator(&[1.0, 2.0], 2), Err(StatsError::KTooLarge { .. })));
        assert!(matches!(hill_estimator(&[1.0, 0.0, 2.0], 1), Err(StatsError::NonPositiveSample)));
    }

    #[test]
    fn slopes() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, (k as f64).powi(-2))).collect();
        let s = loglog_slope(&pts).unwrap();
        assert!((s.mean + 2.0).abs() < 1e-12 && s.stderr < 1e-12);
        assert!(matches!(loglog_slope(&[(1.0, 1.0)]), Err(StatsError::TooFewPoints { .. })));
        assert!(matches!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(StatsError::NonPositivePoint(..))));

        let mut rs = ReplicateStream::new(3);
        let noisy: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let x = 1.0 + i as f64;
                (x, 3.0 * x.powf(-1.3) * (0.2 * (rs.next_unit() - 0.5)).exp())
            })
            .collect();
        let s = loglog_slope(&noisy).unwrap();
        assert!(s.within(-1.3, 3.0), "{s:?}");
    }

    #[test]
    fn running_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Running::new();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Running::new();
        let mut b = Running::new();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - all.mean()).abs() < 1e-12);
        assert!((a.variance() - all.variance()).abs() < 1e-9);

        let mut c = RunningCov::new(2);
        let mut c1 = RunningCov::new(2);
        let mut c2 = RunningCov::new(2);
        for (i, &x) in xs.iter().enumerate() {
            c.push(&[x, 2.0 * x + 1.0]);
            if i < 500 { c1.push(&[x, 2.0 * x + 1.0]) } else { c2.push(&[x, 2.0 * x + 1.0]) }
        }
        c1.merge(&c2);
        assert!((c1.cov(0, 1) - c.cov(0, 1)).abs() < 1e-9);
        assert!((c.cov(0, 1) - 2.0 * all.variance()).abs() < 1e-9);
        // g = y - 2x is constant, so its delta-method error vanishes.
        assert!(c.delta_stderr(&[-2.0, 1.0]) < 1e-6);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, f64::INFINITY]).unwrap(), f64::INFINITY);
        assert_eq!(median(&[f64::INFINITY, f64::INFINITY]).unwrap(), f64::INFINITY);
        assert_eq!(median(&[1.0, 2.0, 4.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
    }
}
