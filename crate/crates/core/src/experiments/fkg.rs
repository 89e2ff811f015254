//! Positive correlation of the two halves of a path cut at a vertex.
//!
//! Replicates score conditional probabilities given the weights, so the
//! path and both halves are estimated from the same draws; the standard
//! error of `P(π) - P(π1) P(π2)` comes from the delta method.

use std::collections::HashSet;

use super::{chunked, fmt_real, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::connection_probability;
use crate::lattice::Vertex;
use crate::params::ModelParams;
use crate::rng::{replicate_seed, ReplicateStream};
use crate::stats::RunningCov;

/// Relative slack for the LRP equality check, where all estimates are exact.
const EXACT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEstimate {
    /// Index of the cut vertex in the path.
    pub cut: usize,
    pub p_path: f64,
    pub path_stderr: f64,
    pub p_first: f64,
    pub p_second: f64,
    /// `P(π) - P(π1) P(π2)`.
    pub diff: f64,
    pub diff_stderr: f64,
}

fn check_path(path: &[Vertex], d: u32) -> Result<(), ExperimentError> {
    let edges = path.len().saturating_sub(1);
    if edges < 2 {
        return Err(ExperimentError::PathTooShort(edges));
    }
    if edges > 6 {
        return Err(ExperimentError::PathTooLong(edges));
    }
    if path.iter().any(|v| v.dim() != d as usize) {
        return Err(ExperimentError::InvalidKnob(format!("path vertices must have dimension {d}")));
    }
    let distinct: HashSet<&Vertex> = path.iter().collect();
    if distinct.len() != path.len() {
        return Err(ExperimentError::PathNotSelfAvoiding);
    }
    Ok(())
}

/// Estimates for every interior cut vertex, in path order.
pub fn fkg_cuts(p: &ModelParams, path: &[Vertex], replicates: u64, seed: u64) -> Result<Vec<CutEstimate>, ExperimentError> {
    check_path(path, p.d())?;
    if replicates == 0 {
        return Err(ExperimentError::ZeroReplicates);
    }
    let k = path.len() - 1;
    let c: Vec<f64> = path.windows(2).map(|w| p.lambda() * w[0].dist(&w[1]).powf(-p.alpha())).collect();
    let dim = 1 + 2 * (k - 1);
    let weighted = p.kind().has_weights();
    let tau = p.tau();
    let parts = chunked(replicates, |range| {
        let mut acc = RunningCov::new(dim);
        let mut w = vec![1.0; k + 1];
        let mut pe = vec![0.0; k];
        let mut obs = vec![0.0; dim];
        for i in range {
            if weighted {
                let mut st = ReplicateStream::new(replicate_seed(seed, i));
                w.iter_mut().for_each(|x| *x = st.next_pareto(tau));
            }
            for e in 0..k {
                pe[e] = connection_probability(c[e] * w[e] * w[e + 1]);
            }
            obs[0] = pe.iter().product();
            for j in 1..k {
                obs[2 * j - 1] = pe[..j].iter().product();
                obs[2 * j] = pe[j..].iter().product();
            }
            acc.push(&obs);
        }
        acc
    });
    let mut all = RunningCov::new(dim);
    parts.iter().for_each(|r| all.merge(r));
    let m0 = all.mean(0);
    Ok((1..k)
        .map(|j| {
            let (a, b) = (2 * j - 1, 2 * j);
            let (ma, mb) = (all.mean(a), all.mean(b));
            let mut grad = vec![0.0; dim];
            grad[0] = 1.0;
            grad[a] = -mb;
            grad[b] = -ma;
            CutEstimate {
                cut: j,
                p_path: m0,
                path_stderr: all.estimate(0).stderr,
                p_first: ma,
                p_second: mb,
                diff: m0 - ma * mb,
                diff_stderr: all.delta_stderr(&grad),
            }
        })
        .collect())
}

/// `P(π) >= P(π1) P(π2) - 3 se` at every cut; for LRP additionally
/// `|P(π) - P(π1) P(π2)| <= 3 se` (with a tiny relative slack, since the
/// estimates are then exact).
pub fn run_fkg_check(cfg: &ExperimentConfig, path: &[Vertex]) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let cuts = fkg_cuts(&cfg.params, path, cfg.replicates, cfg.seed)?;
    let mut rep = ExperimentReport::new(
        "fkg",
        cfg.header("fkg"),
        &["cut", "cut_vertex", "p_path", "path_stderr", "p_first", "p_second", "diff", "diff_stderr"],
    );
    rep.knob("path", path.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
    rep.knob("tolerance", "3 stderr");
    let mut ok = true;
    let mut eq = true;
    for c in &cuts {
        rep.row(vec![
            c.cut.to_string(),
            format!("\"{}\"", path[c.cut]),
            fmt_real(c.p_path),
            fmt_real(c.path_stderr),
            fmt_real(c.p_first),
            fmt_real(c.p_second),
            fmt_real(c.diff),
            fmt_real(c.diff_stderr),
        ]);
        ok &= c.diff >= -3.0 * c.diff_stderr;
        eq &= c.diff.abs() <= 3.0 * c.diff_stderr + EXACT_SLACK * c.p_path;
    }
    let min_z = cuts
        .iter()
        .map(|c| if c.diff_stderr > 0.0 { c.diff / c.diff_stderr } else { 0.0 })
        .fold(f64::INFINITY, f64::min);
    rep.verdict("fkg_inequality", Status::from_bool(ok), format!("min_z={}", fmt_real(min_z)));
    if !cfg.params.kind().has_weights() {
        rep.verdict("fkg_lrp_equality", Status::from_bool(eq), format!("cuts={}", cuts.len()));
    }
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::moments::adjacent_expectation_exact;
    use crate::params::ModelKind;

    fn line(c: &[i64]) -> Vec<Vertex> {
        c.iter().map(|&x| Vertex::new(&[x])).collect()
    }

    #[test]
    fn positive_correlation_through_shared_weight() {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        let cuts = fkg_cuts(&p, &line(&[0, 2, 3]), 200_000, 4).unwrap();
        assert_eq!(cuts.len(), 1);
        assert!(cuts[0].diff > 5.0 * cuts[0].diff_stderr, "{:?}", cuts[0]);
    }

    #[test]
    fn lrp_equality_is_exact() {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Lrp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 2).unwrap(), 0, 100).unwrap();
        let r = run_fkg_check(&cfg, &line(&[0, 1, 3, 4, 8])).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.verdict_status("fkg_lrp_equality"), Some(Status::Pass));
    }

    /// A two-edge path at distances beyond the threshold sits inside the
    /// adjacent-edge sandwich.
    #[test]
    fn two_edge_path_matches_sandwich() {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        let cuts = fkg_cuts(&p, &line(&[0, 20, 25]), 200_000, 8).unwrap();
        let sw = adjacent_expectation_exact(&p, 20.0, 5.0).unwrap();
        let c = cuts[0];
        assert!(c.p_path >= sw.lower - 3.0 * c.path_stderr && c.p_path <= sw.upper + 3.0 * c.path_stderr, "{c:?} {sw:?}");
    }

    #[test]
    fn path_errors() {
        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        assert!(matches!(fkg_cuts(&p, &line(&[0, 1]), 10, 0), Err(ExperimentError::PathTooShort(1))));
        assert!(matches!(fkg_cuts(&p, &line(&[0, 1, 2, 3, 4, 5, 6, 7]), 10, 0), Err(ExperimentError::PathTooLong(7))));
        assert!(matches!(fkg_cuts(&p, &line(&[0, 1, 0]), 10, 0), Err(ExperimentError::PathNotSelfAvoiding)));
    }
}
