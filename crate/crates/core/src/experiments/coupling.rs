//! Edge-set inclusion of coupled LRP and SFP realizations.

use rayon::prelude::*;

use super::{fmt_real, ExperimentConfig, ExperimentError, ExperimentReport, Status, Timer};
use crate::graph::{generate_box_with, generate_coupled, GenerateOptions};
use crate::params::ModelKind;
use crate::rng::replicate_seed;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CouplingOptions {
    /// Test hook: every SFP weight is 1, so both edge sets must coincide.
    pub unit_weights: bool,
    /// Generate the LRP side with this intensity instead; violations are
    /// then only counted.
    pub lrp_lambda: Option<f64>,
}

pub fn run_coupling_check(cfg: &ExperimentConfig, opts: CouplingOptions) -> Result<ExperimentReport, ExperimentError> {
    let t = Timer::start();
    let p = cfg.params;
    let gen = GenerateOptions { unit_weights: opts.unit_weights, ..GenerateOptions::default() };
    let lrp_params = match opts.lrp_lambda {
        Some(l) => Some(p.with_lambda(l).map_err(|e| ExperimentError::InvalidKnob(e.to_string()))?.with_kind(ModelKind::Lrp)),
        None => None,
    };
    let rows: Vec<Result<(u64, usize, usize, usize, bool), ExperimentError>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|i| {
            let seed = replicate_seed(cfg.seed, i);
            let (sfp, lrp) = match lrp_params {
                None => {
                    let mut v = generate_coupled(&p, seed, &cfg.spec, &[ModelKind::Sfp, ModelKind::Lrp], None, gen)?;
                    let lrp = v.pop().expect("two");
                    (v.pop().expect("two"), lrp)
                }
                Some(lp) => (
                    generate_box_with(&p.with_kind(ModelKind::Sfp), seed, &cfg.spec, gen)?,
                    generate_box_with(&lp, seed, &cfg.spec, gen)?,
                ),
            };
            let violations = lrp.inclusion_violations(&sfp);
            Ok((seed, sfp.edge_count(), lrp.edge_count(), violations, sfp.same_edges(&lrp)))
        })
        .collect();
    let mut rep = ExperimentReport::new(
        "coupling",
        cfg.header("coupling"),
        &["replicate", "seed", "sfp_edges", "lrp_edges", "violations"],
    );
    if opts.unit_weights {
        rep.knob("unit_weights", true);
    }
    if let Some(l) = opts.lrp_lambda {
        rep.knob("lrp_lambda", fmt_real(l));
    }
    let mut total = 0usize;
    let mut identical = true;
    for (i, r) in rows.into_iter().enumerate() {
        let (seed, se, le, v, same) = r?;
        total += v;
        identical &= same;
        rep.row(vec![i.to_string(), seed.to_string(), se.to_string(), le.to_string(), v.to_string()]);
    }
    let detail = format!("violations={total}");
    if opts.lrp_lambda.is_some() {
        rep.verdict("coupling_inclusion", Status::Info, detail);
    } else {
        rep.verdict("coupling_inclusion", Status::from_bool(total == 0), detail);
    }
    if opts.unit_weights && opts.lrp_lambda.is_none() {
        rep.verdict("coupling_identical", Status::from_bool(identical), format!("identical={identical}"));
    }
    rep.wallclock_secs = t.secs();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::params::ModelParams;

    fn cfg(reps: u64) -> ExperimentConfig {
        let p = ModelParams::new(1, 1.2, 0.7, 2.3, ModelKind::Sfp).unwrap();
        ExperimentConfig::new(p, BoxSpec::new(1, 64).unwrap(), 9, reps).unwrap()
    }

    #[test]
    fn inclusion_and_hooks() {
        let r = run_coupling_check(&cfg(10), CouplingOptions::default()).unwrap();
        assert!(r.passed());
        assert_eq!(r.verdict_status("coupling_inclusion"), Some(Status::Pass));

        let u = run_coupling_check(&cfg(5), CouplingOptions { unit_weights: true, ..Default::default() }).unwrap();
        assert_eq!(u.verdict_status("coupling_identical"), Some(Status::Pass));

        let m = run_coupling_check(&cfg(5), CouplingOptions { lrp_lambda: Some(5.0), ..Default::default() }).unwrap();
        assert_eq!(m.verdict_status("coupling_inclusion"), Some(Status::Info));
        let v: usize = m.column("violations").unwrap().iter().map(|s| s.parse::<usize>().unwrap()).sum();
        assert!(v > 0);
    }
}
