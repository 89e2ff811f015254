use rayon::prelude::*;

use super::{check_dims, BoxRealization, GraphError, Truncation};
use crate::lattice::BoxSpec;
use crate::params::{ModelKind, ModelParams};
use crate::rng::{pareto_from_uniform, uniform_for_vertex, Domain, KeyedHash};

/// Default cap on the number of vertex pairs a generator may enumerate.
pub const DEFAULT_PAIR_BUDGET: u128 = 1 << 36;

const ROW_BLOCK: usize = 32;
const DIST2_TABLE_MAX: i64 = 1 << 22;

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    pub pair_budget: u128,
    /// Test hook: every weight is forced to 1.
    pub unit_weights: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions { pair_budget: DEFAULT_PAIR_BUDGET, unit_weights: false }
    }
}

/// `1 - exp(-t)`, clamped by `t` so that rounding never pushes it above the
/// exact value's upper bound; `u >= t` then safely rejects an edge early.
#[inline(always)]
pub fn connection_probability(t: f64) -> f64 {
    (-(-t).exp_m1()).min(t)
}

/// Keyed Pareto weights of every vertex of the box, in index order.
pub fn box_weights(seed: u64, spec: &BoxSpec, tau: f64, unit: bool) -> Vec<f64> {
    if unit {
        return vec![1.0; spec.vertex_count()];
    }
    let d = spec.d() as usize;
    spec.all_coords().par_chunks(d).map(|c| pareto_from_uniform(uniform_for_vertex(seed, c), tau)).collect()
}

pub fn generate_box(params: &ModelParams, seed: u64, spec: &BoxSpec) -> Result<BoxRealization, GraphError> {
    generate_box_with(params, seed, spec, GenerateOptions::default())
}

pub fn generate_box_with(
    params: &ModelParams,
    seed: u64,
    spec: &BoxSpec,
    opts: GenerateOptions,
) -> Result<BoxRealization, GraphError> {
    Ok(generate_coupled(params, seed, spec, &[params.kind()], None, opts)?.pop().expect("one kind"))
}

/// Same per-edge decisions as [`generate_box`] for `|x - y| <= cutoff`;
/// farther pairs stay closed and their union-bound mass is recorded.
pub fn generate_box_truncated(
    params: &ModelParams,
    seed: u64,
    spec: &BoxSpec,
    cutoff: f64,
) -> Result<BoxRealization, GraphError> {
    Ok(generate_coupled(params, seed, spec, &[params.kind()], Some(cutoff), GenerateOptions::default())?
        .pop()
        .expect("one kind"))
}

/// SFP and LRP realizations on shared edge uniforms.
pub fn coupled_pair(
    params: &ModelParams,
    seed: u64,
    spec: &BoxSpec,
) -> Result<(BoxRealization, BoxRealization), GraphError> {
    let mut v = generate_coupled(params, seed, spec, &[ModelKind::Sfp, ModelKind::Lrp], None, GenerateOptions::default())?;
    let lrp = v.pop().expect("two kinds");
    let sfp = v.pop().expect("two kinds");
    Ok((sfp, lrp))
}

/// Generates one realization per requested kind in a single pass over the
/// pairs; the result follows the order of `kinds`.
pub fn generate_coupled(
    params: &ModelParams,
    seed: u64,
    spec: &BoxSpec,
    kinds: &[ModelKind],
    cutoff: Option<f64>,
    opts: GenerateOptions,
) -> Result<Vec<BoxRealization>, GraphError> {
    check_dims(params, spec)?;
    if let Some(r) = cutoff {
        if !(r >= 1.0) {
            return Err(GraphError::InvalidCutoff(r));
        }
    }
    let pairs = spec.pair_count();
    if pairs > opts.pair_budget {
        return Err(GraphError::BoxTooLarge { pairs, budget: opts.pair_budget });
    }

    let want = Wanted {
        sfp: kinds.contains(&ModelKind::Sfp),
        lrp: kinds.contains(&ModelKind::Lrp),
        nn: kinds.contains(&ModelKind::SfpNn),
    };
    let weights =
        if want.sfp || want.nn { box_weights(seed, spec, params.tau(), opts.unit_weights) } else { Vec::new() };
    let ctx = Ctx::new(params, seed, spec, &weights, cutoff, want);

    let n = spec.vertex_count();
    let blocks: Vec<Lists> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut out = Lists::default();
            for i in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(n) {
                ctx.row(i, &mut out);
            }
            out
        })
        .collect();
    let mut all = Lists::default();
    for b in blocks {
        all.sfp.extend(b.sfp);
        all.lrp.extend(b.lrp);
        all.nn.extend(b.nn);
    }

    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let (edges, w) = match kind {
            ModelKind::Sfp => (&all.sfp, Some(weights.clone())),
            ModelKind::Lrp => (&all.lrp, None),
            ModelKind::SfpNn => (&all.nn, Some(weights.clone())),
        };
        let truncation = cutoff.map(|r| Truncation { radius: r, bias_bound: ctx.bias_bound(kind) });
        out.push(BoxRealization::from_sorted_edges(
            spec.clone(),
            params.with_kind(kind),
            seed,
            w,
            edges,
            truncation,
        ));
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct Wanted {
    sfp: bool,
    lrp: bool,
    nn: bool,
}

#[derive(Default)]
struct Lists {
    sfp: Vec<(u32, u32)>,
    lrp: Vec<(u32, u32)>,
    nn: Vec<(u32, u32)>,
}

enum Kernel {
    /// `d = 1`: indexed by `|x - y|`.
    Offset(Vec<f64>),
    /// Indexed by `|x - y|^2`.
    Dist2(Vec<f64>),
    Direct(f64),
}

impl Kernel {
    fn new(spec: &BoxSpec, alpha: f64) -> Self {
        let l = spec.side() as i64;
        if spec.d() == 1 {
            let mut t = vec![0.0; l as usize];
            for (r, v) in t.iter_mut().enumerate().skip(1) {
                *v = (r as f64).powf(-alpha);
            }
            return Kernel::Offset(t);
        }
        let max2 = spec.d() as i64 * (l - 1) * (l - 1);
        if max2 <= DIST2_TABLE_MAX {
            let mut t = vec![0.0; max2 as usize + 1];
            for (r2, v) in t.iter_mut().enumerate().skip(1) {
                *v = (r2 as f64).powf(-0.5 * alpha);
            }
            Kernel::Dist2(t)
        } else {
            Kernel::Direct(-0.5 * alpha)
        }
    }

    #[inline(always)]
    fn at_dist2(&self, d2: i64) -> f64 {
        match self {
            Kernel::Offset(t) => t[(d2 as f64).sqrt() as usize],
            Kernel::Dist2(t) => t[d2 as usize],
            Kernel::Direct(e) => (d2 as f64).powf(*e),
        }
    }
}

struct Ctx<'a> {
    n: usize,
    d: usize,
    side: usize,
    lambda: f64,
    coords: Vec<i64>,
    prefix: Vec<KeyedHash>,
    weights: &'a [f64],
    kernel: Kernel,
    cutoff: Option<(f64, i64)>,
    want: Wanted,
}

impl<'a> Ctx<'a> {
    fn new(
        params: &ModelParams,
        seed: u64,
        spec: &BoxSpec,
        weights: &'a [f64],
        cutoff: Option<f64>,
        want: Wanted,
    ) -> Self {
        let d = spec.d() as usize;
        let coords = spec.all_coords();
        let base = KeyedHash::new(seed, Domain::Edge);
        let prefix = coords.par_chunks(d).map(|c| base.absorb_coords(c)).collect();
        Ctx {
            n: spec.vertex_count(),
            d,
            side: spec.side() as usize,
            lambda: params.lambda(),
            coords,
            prefix,
            weights,
            kernel: Kernel::new(spec, params.alpha()),
            cutoff: cutoff.map(|r| (r, r.min(1e15).floor() as i64)),
            want,
        }
    }

    /// One past the last index `j` that can lie within the cutoff of `i`.
    fn row_end(&self, i: usize) -> usize {
        match self.cutoff {
            None => self.n,
            Some((_, r)) => {
                let stride = self.n / self.side;
                let first = i / stride;
                let last = (first as u128 + r as u128 + 1).min(self.side as u128) as usize;
                last * stride
            }
        }
    }

    #[inline(always)]
    fn within_cutoff(&self, d2: i64) -> bool {
        match self.cutoff {
            None => true,
            Some((r, _)) => (d2 as f64) <= r * r,
        }
    }

    fn row(&self, i: usize, out: &mut Lists) {
        let end = self.row_end(i);
        let h = self.prefix[i];
        let lam = self.lambda;
        let lw = if self.weights.is_empty() { 0.0 } else { lam * self.weights[i] };
        let want = self.want;
        if self.d == 1 {
            let Kernel::Offset(table) = &self.kernel else { unreachable!() };
            for j in i + 1..end {
                let k = table[j - i];
                let u = h.absorb(self.coords[j] as u64).unit();
                self.decide(i, j, u, k, lw, j - i == 1, want, out);
            }
            return;
        }
        let d = self.d;
        let ci = &self.coords[i * d..(i + 1) * d];
        for j in i + 1..end {
            let cj = &self.coords[j * d..(j + 1) * d];
            let d2: i64 = ci.iter().zip(cj).map(|(a, b)| (a - b) * (a - b)).sum();
            if !self.within_cutoff(d2) {
                continue;
            }
            let k = self.kernel.at_dist2(d2);
            let u = h.absorb_coords(cj).unit();
            self.decide(i, j, u, k, lw, d2 == 1, want, out);
        }
    }

    #[inline(always)]
    #[allow(clippy::too_many_arguments)]
    fn decide(&self, i: usize, j: usize, u: f64, k: f64, lw: f64, nearest: bool, want: Wanted, out: &mut Lists) {
        let e = (i as u32, j as u32);
        if want.lrp {
            let t = self.lambda * k;
            if u < t && u < connection_probability(t) {
                out.lrp.push(e);
            }
        }
        if want.sfp || want.nn {
            let t = lw * self.weights[j] * k;
            let open = u < t && u < connection_probability(t);
            if want.sfp && open {
                out.sfp.push(e);
            }
            if want.nn && (open || nearest) {
                out.nn.push(e);
            }
        }
    }

    /// `Σ (λ W_x W_y |x-y|^{-α} ∧ 1)` over pairs beyond the cutoff.
    fn bias_bound(&self, kind: ModelKind) -> f64 {
        let Some((r, _)) = self.cutoff else { return 0.0 };
        let weighted = kind.has_weights();
        let d = self.d;
        let sums: Vec<f64> = (0..self.n.div_ceil(ROW_BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut s = 0.0;
                for i in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(self.n) {
                    let lw = if weighted { self.lambda * self.weights[i] } else { self.lambda };
                    let ci = &self.coords[i * d..(i + 1) * d];
                    let mut row = 0.0;
                    for j in i + 1..self.n {
                        let cj = &self.coords[j * d..(j + 1) * d];
                        let d2: i64 = ci.iter().zip(cj).map(|(a, b)| (a - b) * (a - b)).sum();
                        if (d2 as f64) <= r * r {
                            continue;
                        }
                        let wj = if weighted { self.weights[j] } else { 1.0 };
                        row += (lw * wj * self.kernel.at_dist2(d2)).min(1.0);
                    }
                    s += row;
                }
                s
            })
            .collect();
        sums.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::uniform_for_edge;

    fn p(kind: ModelKind, lambda: f64) -> ModelParams {
        ModelParams::new(1, 1.5, lambda, 2.5, kind).unwrap()
    }

    #[test]
    fn huge_lambda_gives_complete_graph() {
        let spec = BoxSpec::new(1, 4).unwrap();
        let r = generate_box(&p(ModelKind::Sfp, 1e6), 0, &spec).unwrap();
        assert_eq!(r.edge_count(), 6);
    }

    #[test]
    fn matches_direct_definition_in_2d() {
        let params = ModelParams::new(2, 2.5, 2.0, 2.7, ModelKind::Sfp).unwrap();
        let spec = BoxSpec::with_origin(2, 7, crate::lattice::Vertex::new(&[-3, 5])).unwrap();
        let seed = 99;
        let r = generate_box(&params, seed, &spec).unwrap();
        let w = r.weights().unwrap();
        let mut count = 0;
        for a in 0..spec.vertex_count() {
            for b in a + 1..spec.vertex_count() {
                let (x, y) = (spec.vertex(a), spec.vertex(b));
                let t = 2.0 * w[a] * w[b] * x.dist(&y).powf(-2.5);
                let u = uniform_for_edge(seed, x.coords(), y.coords()).unwrap();
                let open = u < 1.0 - (-t).exp();
                assert_eq!(open, r.has_edge(a, b), "pair {x} {y}");
                count += open as usize;
            }
        }
        assert_eq!(count, r.edge_count());
    }

    #[test]
    fn coupled_kinds_nest() {
        let spec = BoxSpec::new(1, 300).unwrap();
        let v = generate_coupled(
            &p(ModelKind::Sfp, 1.0),
            5,
            &spec,
            &[ModelKind::Lrp, ModelKind::Sfp, ModelKind::SfpNn],
            None,
            GenerateOptions::default(),
        )
        .unwrap();
        assert!(v[0].edges_subset_of(&v[1]));
        assert!(v[1].edges_subset_of(&v[2]));
        assert!(v[0].edge_count() < v[1].edge_count());
        for i in 0..299 {
            assert!(v[2].has_edge(i, i + 1));
        }
        let single = generate_box(&p(ModelKind::Lrp, 1.0), 5, &spec).unwrap();
        assert!(single.same_edges(&v[0]));
        assert!(single.weights().is_none());
    }

    #[test]
    fn unit_weights_make_sfp_equal_lrp() {
        let spec = BoxSpec::new(2, 12).unwrap();
        let params = ModelParams::new(2, 3.0, 1.0, 2.5, ModelKind::Sfp).unwrap();
        let opts = GenerateOptions { unit_weights: true, ..Default::default() };
        let v = generate_coupled(&params, 3, &spec, &[ModelKind::Sfp, ModelKind::Lrp], None, opts).unwrap();
        assert!(v[0].same_edges(&v[1]));
    }

    #[test]
    fn truncation_agrees_within_radius() {
        let spec = BoxSpec::new(2, 15).unwrap();
        let params = ModelParams::new(2, 2.5, 1.5, 2.5, ModelKind::Sfp).unwrap();
        let full = generate_box(&params, 8, &spec).unwrap();
        let cut = generate_box_truncated(&params, 8, &spec, 4.5).unwrap();
        assert!(cut.edges_subset_of(&full));
        for (a, b) in full.edges() {
            let near = spec.vertex(a).dist(&spec.vertex(b)) <= 4.5;
            assert_eq!(near, cut.has_edge(a, b));
        }
        assert!(cut.truncation().unwrap().bias_bound > 0.0);
        let wide = generate_box_truncated(&params, 8, &spec, 100.0).unwrap();
        assert!(wide.same_edges(&full));
        assert_eq!(wide.weights(), full.weights());
        assert_eq!(wide.truncation().unwrap().bias_bound, 0.0);
        assert!(matches!(generate_box_truncated(&params, 8, &spec, 0.0), Err(GraphError::InvalidCutoff(_))));
    }

    #[test]
    fn budget_and_dimension_checks() {
        let spec = BoxSpec::new(1, 100).unwrap();
        let opts = GenerateOptions { pair_budget: 100, ..Default::default() };
        assert!(matches!(
            generate_box_with(&p(ModelKind::Sfp, 1.0), 0, &spec, opts),
            Err(GraphError::BoxTooLarge { pairs: 4950, budget: 100 })
        ));
        let spec2 = BoxSpec::new(2, 4).unwrap();
        assert!(matches!(
            generate_box(&p(ModelKind::Sfp, 1.0), 0, &spec2),
            Err(GraphError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn monotone_in_lambda() {
        let spec = BoxSpec::new(1, 400).unwrap();
        let lo = generate_box(&p(ModelKind::Sfp, 0.5), 1, &spec).unwrap();
        let hi = generate_box(&p(ModelKind::Sfp, 0.8), 1, &spec).unwrap();
        assert!(lo.edges_subset_of(&hi));
    }
}
