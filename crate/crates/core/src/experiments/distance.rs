//! Graph distance against Euclidean distance along a coordinate axis.
//!
//! Sources `s` are drawn inside the box and targets are `s + N e_1`. For the
//! model under study only pairs with both ends in the largest cluster count.
//! The coupled SFP and LRP comparison uses every pair, with unreachable
//! targets at distance `+inf`.

use rayon::prelude::*;

use super::{fmt_real, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::{bfs_distances, clusters, generate_coupled, BoxRealization, GenerateOptions, UNREACHABLE};
use crate::params::ModelKind;
use crate::rng::{replicate_seed, ReplicateStream};
use crate::stats::{linear_fit, median};

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceOptions {
    pub n_list: Vec<u64>,
    /// Sources per box.
    pub sources: usize,
    pub margin: u64,
    /// Also generate coupled SFP and LRP boxes and compare their medians.
    pub compare_lrp: bool,
    /// Below this fraction of the box the largest cluster counts as tiny.
    pub min_cluster_fraction: f64,
}

impl DistanceOptions {
    pub fn new(n_list: Vec<u64>, sources: usize) -> Self {
        DistanceOptions { n_list, sources, margin: 0, compare_lrp: true, min_cluster_fraction: 0.05 }
    }
}

/// `[2^lo, 2^(lo+1), ..., 2^hi]`.
pub fn dyadic_list(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

fn hops(v: u32) -> f64 {
    if v == UNREACHABLE {
        f64::INFINITY
    } else {
        v as f64
    }
}

pub fn run_distance_experiment(cfg: &ExperimentConfig, opts: &DistanceOptions) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = cfg.params;
    let regime = p.regime();
    if !regime.is_polylog() {
        return Err(ExperimentError::RegimeNotPolylog(regime));
    }
    let spec = &cfg.spec;
    let d = spec.d() as usize;
    let side = spec.side();
    let n_max = *opts.n_list.iter().max().ok_or_else(|| ExperimentError::InvalidKnob("empty N list".into()))?;
    if opts.sources == 0 {
        return Err(ExperimentError::InvalidKnob("sources must be positive".into()));
    }
    if opts.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::InvalidKnob("N list must be increasing".into()));
    }
    if 2 * opts.margin + n_max >= side {
        return Err(ExperimentError::InvalidKnob(format!("box side {side} cannot hold N={n_max} with margin {}", opts.margin)));
    }
    let main = p.kind();
    let compare = opts.compare_lrp && main != ModelKind::Lrp;
    let mut kinds = vec![main];
    if compare {
        for k in [ModelKind::Sfp, ModelKind::Lrp] {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    let idx = |k: ModelKind| kinds.iter().position(|&x| x == k).expect("kind present");

    let nn = opts.n_list.len();
    let mut main_d: Vec<Vec<f64>> = vec![Vec::new(); nn];
    let mut excluded = vec![0usize; nn];
    let mut sfp_d: Vec<Vec<f64>> = vec![Vec::new(); nn];
    let mut lrp_d: Vec<Vec<f64>> = vec![Vec::new(); nn];
    let mut tiny = false;
    let mut largest_fraction = 1.0f64;

    for rep_i in 0..cfg.replicates {
        let seed = replicate_seed(cfg.seed, rep_i);
        let boxes = generate_coupled(&p, seed, spec, &kinds, None, GenerateOptions::default())?;
        let main_box = &boxes[0];
        let cl = clusters(main_box);
        let frac = cl.largest_size() as f64 / main_box.vertex_count() as f64;
        largest_fraction = largest_fraction.min(frac);
        if frac < opts.min_cluster_fraction {
            tiny = true;
        }
        let mut st = ReplicateStream::new(replicate_seed(seed, u64::MAX));
        let m = opts.margin as i64;
        let hi = spec.side() as i64 - 1 - m;
        let sources: Vec<Vec<i64>> = (0..opts.sources)
            .map(|_| {
                (0..d)
                    .map(|j| {
                        let top = if j == 0 { hi - n_max as i64 } else { hi };
                        let span = (top - m + 1) as f64;
                        spec.origin().coords()[j] + m + ((st.next_unit() * span) as i64).min(top - m)
                    })
                    .collect()
            })
            .collect();
        let per_source = |b: &BoxRealization, want_cluster: bool| -> Vec<Vec<(f64, bool)>> {
            sources
                .par_iter()
                .map(|s| {
                    let si = spec.index_of(s).expect("source inside");
                    let dist = bfs_distances(b, si);
                    opts.n_list
                        .iter()
                        .map(|&n| {
                            let mut tc = s.clone();
                            tc[0] += n as i64;
                            let ti = spec.index_of(&tc).expect("target inside");
                            let in_largest = !want_cluster || (cl.label(si) == cl.largest() && cl.label(ti) == cl.largest());
                            (hops(dist[ti]), in_largest)
                        })
                        .collect()
                })
                .collect()
        };
        for row in per_source(main_box, true) {
            for (j, &(h, ok)) in row.iter().enumerate() {
                if ok && h.is_finite() {
                    main_d[j].push(h);
                } else {
                    excluded[j] += 1;
                }
            }
        }
        if compare {
            for (target, k) in [(&mut sfp_d, ModelKind::Sfp), (&mut lrp_d, ModelKind::Lrp)] {
                for row in per_source(&boxes[idx(k)], false) {
                    for (j, &(h, _)) in row.iter().enumerate() {
                        target[j].push(h);
                    }
                }
            }
        }
    }

    let mut rep = ExperimentReport::new(
        "distances",
        cfg.header("distances"),
        &["N", "pairs", "excluded", "median_hops", "hops_over_N", "sfp_median", "lrp_median"],
    );
    rep.knob("regime", regime);
    rep.knob("sources", opts.sources);
    rep.knob("margin", opts.margin);
    rep.knob("proxy", "pairs with both ends in the largest cluster of the box");
    rep.knob("largest_cluster_fraction", fmt_real(largest_fraction));
    if tiny {
        rep.flag("LargestClusterTiny");
        rep.wallclock_secs = t.secs();
        return Ok(rep);
    }
    if main_d.iter().all(|v| v.is_empty()) {
        return Err(ExperimentError::NoPairsInLargestCluster);
    }

    let mut medians = Vec::with_capacity(nn);
    let mut sfp_le_lrp = true;
    for (j, &n) in opts.n_list.iter().enumerate() {
        let med = median(&main_d[j]).unwrap_or(f64::NAN);
        medians.push(med);
        let (sm, lm) = if compare {
            let sm = median(&sfp_d[j])?;
            let lm = median(&lrp_d[j])?;
            sfp_le_lrp &= sm <= lm;
            (fmt_real(sm), fmt_real(lm))
        } else {
            ("nan".to_string(), "nan".to_string())
        };
        rep.row(vec![
            n.to_string(),
            main_d[j].len().to_string(),
            excluded[j].to_string(),
            fmt_real(med),
            fmt_real(med / n as f64),
            sm,
            lm,
        ]);
    }
    let grows = medians.windows(2).all(|w| w[1] >= w[0]);
    let ratios: Vec<f64> = medians.iter().zip(&opts.n_list).map(|(m, &n)| m / n as f64).collect();
    let shrinks = ratios.windows(2).all(|w| w[1] < w[0]);
    rep.verdict("distance_median_nondecreasing", Status::from_bool(grows), format!("medians={}", join(&medians)));
    rep.verdict("distance_ratio_decreasing", Status::from_bool(shrinks), format!("ratios={}", join(&ratios)));
    if compare {
        rep.verdict("distance_sfp_le_lrp", Status::from_bool(sfp_le_lrp), "coupled medians, unreachable as inf");
    }

    let pts: Vec<(f64, f64)> = medians
        .iter()
        .zip(&opts.n_list)
        .filter(|(m, &n)| m.is_finite() && **m > 0.0 && n > 2)
        .map(|(m, &n)| ((n as f64).ln().ln(), m.ln()))
        .collect();
    let e = p.exponents();
    if let Ok(fit) = linear_fit(&pts) {
        let band = if e.delta1.is_finite() && e.delta2.is_finite() {
            let (lo, hi) = (e.delta1.value() - 1.0, e.delta2.value() + 1.0);
            let inside = fit.slope.mean >= lo && fit.slope.mean <= hi;
            format!("band=[{},{}] inside={inside}", fmt_real(lo), fmt_real(hi))
        } else {
            "band=undefined".to_string()
        };
        rep.verdict(
            "distance_delta_band",
            Status::Info,
            format!("delta_hat={} stderr={} {band}", fmt_real(fit.slope.mean), fmt_real(fit.slope.stderr)),
        );
    }
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::params::ModelParams;

    #[test]
    fn small_box_runs_and_compares() {
        let p = ModelParams::new(1, 1.5, 5.0, 3.5, ModelKind::SfpNn).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 3000).unwrap(), 2, 1).unwrap();
        let mut o = DistanceOptions::new(dyadic_list(2, 10), 40);
        o.margin = 50;
        let r = run_distance_experiment(&cfg, &o).unwrap();
        assert_eq!(r.rows.len(), 9);
        assert_eq!(r.verdict_status("distance_sfp_le_lrp"), Some(Status::Pass), "{}", r.body());
        assert_eq!(r.verdict_status("distance_median_nondecreasing"), Some(Status::Pass), "{}", r.body());
    }

    #[test]
    fn subcritical_guess_is_flagged() {
        let p = ModelParams::new(1, 1.5, 0.01, 3.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 500).unwrap(), 0, 1).unwrap();
        let r = run_distance_experiment(&cfg, &DistanceOptions::new(dyadic_list(2, 6), 10)).unwrap();
        assert!(r.has_flag("LargestClusterTiny"));
        assert!(r.verdicts.is_empty());
    }

    #[test]
    fn rejects_non_polylog_and_bad_geometry() {
        let p = ModelParams::new(1, 3.0, 1.0, 3.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 100).unwrap(), 0, 1).unwrap();
        assert!(matches!(run_distance_experiment(&cfg, &DistanceOptions::new(vec![4, 8, 16], 3)), Err(ExperimentError::RegimeNotPolylog(_))));
        let p = ModelParams::new(1, 1.5, 1.0, 3.5, ModelKind::Sfp).unwrap();
        let cfg = ExperimentConfig::new(p, BoxSpec::new(1, 100).unwrap(), 0, 1).unwrap();
        assert!(matches!(run_distance_experiment(&cfg, &DistanceOptions::new(vec![64, 128], 3)), Err(ExperimentError::InvalidKnob(_))));
    }
}
