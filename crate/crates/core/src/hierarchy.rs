//! Hierarchies of depth `n` connecting two vertices.
//!
//! Sites `z_σ` are indexed by binary strings `σ` of length `1..=n`, stored as
//! `(level, code)` with the first character of `σ` as the most significant
//! bit. Level `k` holds `2^k` sites.
//!
//! Conditions are checked in the order 1, 2, 4, 5, 3 and the first violation
//! is reported.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::BoxRealization;
use crate::lattice::Vertex;
use crate::params::ModelParams;

pub const MAX_DEPTH: u32 = 24;

/// The binary string `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteKey {
    pub level: u32,
    pub code: u64,
}

impl SiteKey {
    pub fn new(level: u32, code: u64) -> Self {
        SiteKey { level, code }
    }

    /// `σ` followed by `bit`.
    pub fn child(self, bit: u64) -> Self {
        SiteKey { level: self.level + 1, code: self.code << 1 | bit }
    }

    /// `σ` followed by the bits of `suffix`.
    pub fn extend(self, suffix: &str) -> Self {
        suffix.bytes().fold(self, |k, b| k.child((b == b'1') as u64))
    }

    pub fn root() -> Self {
        SiteKey { level: 0, code: 0 }
    }
}

impl fmt::Display for SiteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return f.write_str("ε");
        }
        for i in (0..self.level).rev() {
            f.write_str(if self.code >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SiteKey {
    type Err = HierarchyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || s.len() > MAX_DEPTH as usize || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(HierarchyError::BadKey(s.to_string()));
        }
        Ok(SiteKey::root().extend(s))
    }
}

/// A violated condition together with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `z_0 != x`, `z_1 != y`, or `x = y`.
    Endpoints,
    /// `z_{σ00} != z_{σ0}` or `z_{σ11} != z_{σ1}`; the witness is the child key.
    Inheritance { site: SiteKey },
    /// The required edges of `first` and `second` (keys `σ`) coincide.
    RepeatedEdge { first: SiteKey, second: SiteKey },
    /// Two non-sibling sites of one level coincide.
    Coincidence { a: SiteKey, b: SiteKey },
    /// The required edge `{z_{σ01}, z_{σ10}}` is closed.
    ClosedEdge { sigma: SiteKey, from: Vertex, to: Vertex },
}

impl Violation {
    pub fn condition(&self) -> u8 {
        match self {
            Violation::Endpoints => 1,
            Violation::Inheritance { .. } => 2,
            Violation::ClosedEdge { .. } => 3,
            Violation::RepeatedEdge { .. } => 4,
            Violation::Coincidence { .. } => 5,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {}: ", self.condition())?;
        match self {
            Violation::Endpoints => f.write_str("z_0, z_1 do not match the distinct endpoints x, y"),
            Violation::Inheritance { site } => write!(f, "site z_{site} differs from its parent"),
            Violation::RepeatedEdge { first, second } => {
                write!(f, "edge of σ={first} repeats the edge of σ={second}")
            }
            Violation::Coincidence { a, b } => write!(f, "non-sibling sites z_{a} and z_{b} coincide"),
            Violation::ClosedEdge { sigma, from, to } => write!(f, "edge {from}-{to} of σ={sigma} is closed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("hierarchy violates {0}")]
    Violation(Violation),
    #[error("site z_{0} = {1} lies outside the box")]
    SiteOutOfBox(SiteKey, Vertex),
    #[error("depth must be in 1..={MAX_DEPTH} (got {0})")]
    BadDepth(u32),
    #[error("level {level} has {got} sites, expected {expected}")]
    LevelSize { level: u32, expected: usize, got: usize },
    #[error("sites must all have dimension {0}")]
    DimensionMismatch(usize),
    #[error("invalid site key `{0}`")]
    BadKey(String),
    #[error("missing site z_{0}")]
    MissingSite(SiteKey),
    #[error("gap path for σ={0} does not join z_σ0 and z_σ1")]
    PathEndpointMismatch(SiteKey),
    #[error("expected {expected} gap paths, got {got}")]
    GapPathCount { expected: usize, got: usize },
    #[error("no edge of the gap σ={0} satisfies the bond inequality")]
    NoAdmissibleSplit(SiteKey),
    #[error("path is not self-avoiding (vertex {0} repeats)")]
    PathNotSelfAvoiding(Vertex),
    #[error("path must have at least two vertices")]
    PathTooShort,
    #[error("event parameters out of range: {0}")]
    InvalidEventParams(&'static str),
    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },
}

/// Parameters of the events `E_n` and `F_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyEventParams {
    pub eta: f64,
    pub delta: f64,
    /// Euclidean distance `N = |x - y|`.
    pub n_dist: f64,
    /// `Δ1` in the bond inequality.
    pub delta1_exponent: f64,
}

impl HierarchyEventParams {
    /// Requires `0 < eta < alpha1 / (2d)`, `alpha1 - delta > d`, `N > 1`
    /// and a finite `Δ1`.
    pub fn new(p: &ModelParams, eta: f64, delta: f64, n_dist: f64) -> Result<Self, HierarchyError> {
        let e = p.exponents();
        let d = p.d() as f64;
        if !(eta > 0.0 && eta < e.alpha1 / (2.0 * d)) {
            return Err(HierarchyError::InvalidEventParams("eta must lie in (0, alpha1 / 2d)"));
        }
        if !(e.alpha1 - delta > d) {
            return Err(HierarchyError::InvalidEventParams("alpha1 - delta must exceed d"));
        }
        if !(n_dist > 1.0) {
            return Err(HierarchyError::InvalidEventParams("N must exceed 1"));
        }
        if !e.delta1.is_finite() {
            return Err(HierarchyError::InvalidEventParams("Delta1 is infinite"));
        }
        Ok(HierarchyEventParams { eta, delta, n_dist, delta1_exponent: e.delta1.value() })
    }

    /// `(log N)^{-Δ1}`.
    pub fn bond_factor(&self) -> f64 {
        self.n_dist.ln().powf(-self.delta1_exponent)
    }
}

/// Sites of a hierarchy plus the endpoints it is meant to connect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    x: Vertex,
    y: Vertex,
    levels: Vec<Vec<Vertex>>,
}

impl Hierarchy {
    /// `levels[k]` holds the `2^{k+1}` sites of level `k + 1` in code order.
    pub fn new(x: Vertex, y: Vertex, levels: Vec<Vec<Vertex>>) -> Result<Self, HierarchyError> {
        let n = levels.len() as u32;
        if n == 0 || n > MAX_DEPTH {
            return Err(HierarchyError::BadDepth(n));
        }
        let dim = x.dim();
        for (k, lv) in levels.iter().enumerate() {
            let expected = 1usize << (k + 1);
            if lv.len() != expected {
                return Err(HierarchyError::LevelSize { level: k as u32 + 1, expected, got: lv.len() });
            }
            if lv.iter().any(|z| z.dim() != dim) {
                return Err(HierarchyError::DimensionMismatch(dim));
            }
        }
        if y.dim() != dim {
            return Err(HierarchyError::DimensionMismatch(dim));
        }
        Ok(Hierarchy { x, y, levels })
    }

    /// Builds from explicit sites; a site missing from the map is filled
    /// from condition 2 when possible (`z_{σ00} = z_{σ0}`, `z_{σ11} = z_{σ1}`).
    /// `x` and `y` default to `z_0` and `z_1`.
    pub fn from_sites(
        depth: u32,
        sites: &BTreeMap<SiteKey, Vertex>,
        x: Option<Vertex>,
        y: Option<Vertex>,
    ) -> Result<Self, HierarchyError> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(HierarchyError::BadDepth(depth));
        }
        let mut levels: Vec<Vec<Vertex>> = Vec::with_capacity(depth as usize);
        for level in 1..=depth {
            let mut lv = Vec::with_capacity(1 << level);
            for code in 0..(1u64 << level) {
                let key = SiteKey::new(level, code);
                let z = match sites.get(&key) {
                    Some(z) => z.clone(),
                    None => {
                        let last2 = code & 3;
                        if level >= 2 && (last2 == 0 || last2 == 3) {
                            levels[level as usize - 2][(code >> 1) as usize].clone()
                        } else {
                            return Err(HierarchyError::MissingSite(key));
                        }
                    }
                };
                lv.push(z);
            }
            levels.push(lv);
        }
        let x = x.unwrap_or_else(|| levels[0][0].clone());
        let y = y.unwrap_or_else(|| levels[0][1].clone());
        Hierarchy::new(x, y, levels)
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn x(&self) -> &Vertex {
        &self.x
    }

    pub fn y(&self) -> &Vertex {
        &self.y
    }

    pub fn site(&self, key: SiteKey) -> &Vertex {
        &self.levels[key.level as usize - 1][key.code as usize]
    }

    pub fn site_mut(&mut self, key: SiteKey) -> &mut Vertex {
        &mut self.levels[key.level as usize - 1][key.code as usize]
    }

    /// Site by binary string, e.g. `"0110"`.
    pub fn get(&self, sigma: &str) -> &Vertex {
        self.site(sigma.parse().expect("valid binary string"))
    }

    pub fn levels(&self) -> &[Vec<Vertex>] {
        &self.levels
    }

    /// Keys `σ` of the required edges `{z_{σ01}, z_{σ10}}`, `|σ| = 0..=n-2`,
    /// in (level, code) order, including degenerate ones.
    pub fn edge_keys(&self) -> impl Iterator<Item = SiteKey> {
        let n = self.depth();
        (0..n.saturating_sub(1)).flat_map(|k| (0..1u64 << k).map(move |c| SiteKey::new(k, c)))
    }

    pub fn edge_ends(&self, sigma: SiteKey) -> (&Vertex, &Vertex) {
        (self.site(sigma.extend("01")), self.site(sigma.extend("10")))
    }

    /// `(z_{σ0}, z_{σ1})` for a gap key `σ`.
    pub fn gap_ends(&self, sigma: SiteKey) -> (&Vertex, &Vertex) {
        (self.site(sigma.child(0)), self.site(sigma.child(1)))
    }

    /// Required edges with distinct endpoints.
    pub fn required_edges(&self) -> Vec<(SiteKey, Vertex, Vertex)> {
        self.edge_keys()
            .filter_map(|s| {
                let (a, b) = self.edge_ends(s);
                (a != b).then(|| (s, a.clone(), b.clone()))
            })
            .collect()
    }

    /// Conditions 1, 2, 4, 5 in that order.
    pub fn check_structure(&self) -> Result<(), Violation> {
        // 1
        if self.x == self.y || self.levels[0][0] != self.x || self.levels[0][1] != self.y {
            return Err(Violation::Endpoints);
        }
        // 2
        for level in 2..=self.depth() {
            for code in 0..(1u64 << level) {
                let last2 = code & 3;
                if last2 == 0 || last2 == 3 {
                    let key = SiteKey::new(level, code);
                    let parent = SiteKey::new(level - 1, code >> 1);
                    if self.site(key) != self.site(parent) {
                        return Err(Violation::Inheritance { site: key });
                    }
                }
            }
        }
        // 4
        let mut seen: HashMap<(Vertex, Vertex), SiteKey> = HashMap::new();
        for s in self.edge_keys() {
            let (a, b) = self.edge_ends(s);
            if a == b {
                continue;
            }
            let e = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if let Some(&first) = seen.get(&e) {
                return Err(Violation::RepeatedEdge { first, second: s });
            }
            seen.insert(e, s);
        }
        // 5
        for level in 1..=self.depth() {
            let mut at: HashMap<&Vertex, u64> = HashMap::new();
            for (code, z) in self.levels[level as usize - 1].iter().enumerate() {
                let code = code as u64;
                if let Some(&other) = at.get(z) {
                    let siblings = other >> 1 == code >> 1;
                    if !siblings {
                        return Err(Violation::Coincidence { a: SiteKey::new(level, other), b: SiteKey::new(level, code) });
                    }
                } else {
                    at.insert(z, code);
                }
            }
        }
        Ok(())
    }
}

/// Conditions 1-5 against a realization; the first violation is returned
/// as `HierarchyError::Violation`.
pub fn validate_hierarchy(h: &Hierarchy, r: &BoxRealization) -> Result<(), HierarchyError> {
    for (k, lv) in h.levels.iter().enumerate() {
        for (c, z) in lv.iter().enumerate() {
            if !r.spec().contains(z.coords()) {
                return Err(HierarchyError::SiteOutOfBox(SiteKey::new(k as u32 + 1, c as u64), z.clone()));
            }
        }
    }
    h.check_structure().map_err(HierarchyError::Violation)?;
    for (sigma, a, b) in h.required_edges() {
        let i = r.spec().index_of(a.coords()).expect("checked");
        let j = r.spec().index_of(b.coords()).expect("checked");
        if !r.has_edge(i, j) {
            return Err(HierarchyError::Violation(Violation::ClosedEdge { sigma, from: a, to: b }));
        }
    }
    Ok(())
}

/// Splits the required edges into maximal vertex-disjoint paths, ordered by
/// their first edge key; each path starts at its endpoint met first.
pub fn decompose_paths(h: &Hierarchy) -> Result<Vec<Vec<Vertex>>, HierarchyError> {
    h.check_structure().map_err(HierarchyError::Violation)?;
    let edges = h.required_edges();
    let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for (_, a, b) in &edges {
        adj.entry(a.clone()).or_default().push(b.clone());
        adj.entry(b.clone()).or_default().push(a.clone());
    }
    let mut used: HashSet<Vertex> = HashSet::new();
    let mut out = Vec::new();
    for (_, a, _) in &edges {
        if used.contains(a) {
            continue;
        }
        // Walk to one end of the component, then collect it from there.
        let mut start = a.clone();
        let mut prev: Option<Vertex> = None;
        loop {
            let next = adj[&start].iter().find(|v| Some(*v) != prev.as_ref()).cloned();
            match next {
                Some(v) if adj[&start].len() == 2 => {
                    if &v == a {
                        break; // cycle; cannot happen under condition 5
                    }
                    prev = Some(start);
                    start = v;
                }
                _ => break,
            }
        }
        let mut path = vec![start.clone()];
        used.insert(start.clone());
        let mut cur = start;
        while let Some(v) = adj[&cur].iter().find(|v| !used.contains(*v)).cloned() {
            used.insert(v.clone());
            path.push(v.clone());
            cur = v;
        }
        out.push(path);
    }
    Ok(out)
}

/// The bond inequality `|z_{σ01} - z_{σ10}| >= |z_{σ0} - z_{σ1}| (log N)^{-Δ1}`
/// for every `|σ| = 0..=n-2`.
pub fn check_bond_condition(h: &Hierarchy, ep: &HierarchyEventParams) -> bool {
    let f = ep.bond_factor();
    h.edge_keys().all(|s| {
        let (a, b) = h.edge_ends(s);
        let (c, d) = h.gap_ends(s);
        a.dist(b) >= c.dist(d) * f
    })
}

/// `Π_{σ ∈ {0,1}^k} (|z_{σ0} - z_{σ1}| ∨ 1) >= N^{(2η)^k}` for `k = 1..=n-1`,
/// compared in logarithms.
pub fn check_gap_condition(h: &Hierarchy, ep: &HierarchyEventParams) -> bool {
    let ln_n = ep.n_dist.ln();
    (1..h.depth()).all(|k| {
        let lhs: f64 = (0..1u64 << k)
            .map(|c| {
                let (a, b) = h.gap_ends(SiteKey::new(k, c));
                a.dist(b).max(1.0).ln()
            })
            .sum();
        lhs >= (2.0 * ep.eta).powi(k as i32) * ln_n
    })
}

/// Outcome of the gap-path check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapPathReport {
    pub total_length: usize,
    pub required: usize,
    pub disjoint: bool,
    pub avoids_sites: bool,
}

impl GapPathReport {
    pub fn holds(&self) -> bool {
        self.disjoint && self.avoids_sites && self.total_length >= self.required
    }
}

/// Examines gap paths `π_σ`, `σ ∈ {0,1}^{n-1}` in code order.
pub fn gap_path_report(h: &Hierarchy, gap_paths: &[Vec<Vertex>]) -> Result<GapPathReport, HierarchyError> {
    let n = h.depth();
    let k = n - 1;
    let expected = 1usize << k;
    if gap_paths.len() != expected {
        return Err(HierarchyError::GapPathCount { expected, got: gap_paths.len() });
    }
    let sites: HashSet<&Vertex> = h.levels.iter().flatten().collect();
    let mut seen: HashSet<&Vertex> = HashSet::new();
    let mut disjoint = true;
    let mut avoids_sites = true;
    let mut total = 0usize;
    for (c, p) in gap_paths.iter().enumerate() {
        let sigma = SiteKey::new(k, c as u64);
        let (a, b) = h.gap_ends(sigma);
        if p.is_empty() || p.first() != Some(a) || p.last() != Some(b) {
            return Err(HierarchyError::PathEndpointMismatch(sigma));
        }
        total += p.len() - 1;
        for (i, v) in p.iter().enumerate() {
            if !seen.insert(v) {
                disjoint = false;
            }
            if i > 0 && i + 1 < p.len() && sites.contains(v) {
                avoids_sites = false;
            }
        }
    }
    Ok(GapPathReport { total_length: total, required: 1 << n, disjoint, avoids_sites })
}

/// True iff the gap paths are mutually vertex-disjoint, avoid the sites
/// except at their ends, and have total length at least `2^n`.
pub fn check_gap_paths_condition(h: &Hierarchy, gap_paths: &[Vec<Vertex>]) -> Result<bool, HierarchyError> {
    Ok(gap_path_report(h, gap_paths)?.holds())
}

/// Builds a depth-`n` hierarchy from a self-avoiding path by recursively
/// splitting each gap at its longest edge satisfying the bond inequality
/// (earliest on ties). Returns the hierarchy and its level-`n` gap paths.
pub fn hierarchy_from_path(
    path: &[Vertex],
    n: u32,
    ep: &HierarchyEventParams,
) -> Result<(Hierarchy, Vec<Vec<Vertex>>), HierarchyError> {
    if path.len() < 2 {
        return Err(HierarchyError::PathTooShort);
    }
    if !(2..=MAX_DEPTH).contains(&n) {
        return Err(HierarchyError::BadDepth(n));
    }
    let mut seen = BTreeSet::new();
    for v in path {
        if !seen.insert(v) {
            return Err(HierarchyError::PathNotSelfAvoiding(v.clone()));
        }
    }
    let f = ep.bond_factor();
    let last = path.len() - 1;
    // gaps[c] = (a, b): the gap of key (level, c) is path[a..=b].
    let mut gaps: Vec<(usize, usize)> = vec![(0, last)];
    let mut levels = vec![vec![path[0].clone(), path[last].clone()]];
    for k in 0..n - 1 {
        let mut next_gaps = Vec::with_capacity(gaps.len() * 2);
        let mut sites = Vec::with_capacity(gaps.len() * 4);
        for (c, &(a, b)) in gaps.iter().enumerate() {
            let need = path[a].dist(&path[b]) * f;
            let mut best: Option<(usize, f64)> = None;
            for i in a..b {
                let len = path[i].dist(&path[i + 1]);
                if len >= need && best.is_none_or(|(_, l)| len > l) {
                    best = Some((i, len));
                }
            }
            let Some((i, _)) = best else {
                return Err(HierarchyError::NoAdmissibleSplit(SiteKey::new(k, c as u64)));
            };
            next_gaps.push((a, i));
            next_gaps.push((i + 1, b));
            sites.extend([path[a].clone(), path[i].clone(), path[i + 1].clone(), path[b].clone()]);
        }
        gaps = next_gaps;
        levels.push(sites);
    }
    let h = Hierarchy::new(path[0].clone(), path[last].clone(), levels)?;
    let gap_paths = gaps.iter().map(|&(a, b)| path[a..=b].to_vec()).collect();
    Ok((h, gap_paths))
}

/// Reads `s <binary> <c1> ... <cd>` lines (plus optional `x ...`, `y ...`);
/// blank lines and `#` comments are skipped. Sites implied by condition 2
/// may be omitted.
pub fn read_hierarchy<R: BufRead>(input: R) -> Result<Hierarchy, HierarchyError> {
    let mut sites = BTreeMap::new();
    let (mut x, mut y) = (None, None);
    let mut depth = 0;
    for (i, line) in input.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| HierarchyError::ParseError { line: ln, message: e.to_string() })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |m: String| HierarchyError::ParseError { line: ln, message: m };
        let mut toks = line.split_ascii_whitespace();
        let tag = toks.next().expect("non-empty");
        let key = if tag == "s" { Some(toks.next().ok_or_else(|| perr("missing site key".into()))?) } else { None };
        let coords: Result<Vec<i64>, _> = toks.map(str::parse::<i64>).collect();
        let v = Vertex::from(coords.map_err(|e| perr(e.to_string()))?);
        if v.dim() == 0 {
            return Err(perr("missing coordinates".into()));
        }
        match (tag, key) {
            ("s", Some(k)) => {
                let key: SiteKey = k.parse().map_err(|_| perr(format!("bad site key `{k}`")))?;
                depth = depth.max(key.level);
                if sites.insert(key, v).is_some() {
                    return Err(perr(format!("duplicate site `{k}`")));
                }
            }
            ("x", _) => x = Some(v),
            ("y", _) => y = Some(v),
            _ => return Err(perr(format!("unknown record `{tag}`"))),
        }
    }
    Hierarchy::from_sites(depth, &sites, x, y)
}


/// Edge set of a path, each edge with its endpoints in order.
pub fn edge_set(path: &[Vertex]) -> BTreeSet<(Vertex, Vertex)> {
    path.windows(2)
        .map(|w| if w[0] < w[1] { (w[0].clone(), w[1].clone()) } else { (w[1].clone(), w[0].clone()) })
        .collect()
}

/// Worked examples in `d = 2`.
pub mod fixtures {
    use super::*;
    use crate::lattice::BoxSpec;
    use crate::params::ModelKind;

    fn v(x: i64, y: i64) -> Vertex {
        Vertex::new(&[x, y])
    }

    fn build(depth: u32, sites: &[(&str, Vertex)]) -> Hierarchy {
        let map: BTreeMap<_, _> = sites.iter().map(|(k, z)| (k.parse::<SiteKey>().expect("key"), z.clone())).collect();
        Hierarchy::from_sites(depth, &map, None, None).expect("fixture")
    }

    /// Depth 4 with the degenerate sites `z_0010 = z_0011 = z_001` and
    /// `z_0100 = z_0101 = z_010`, so seven required edges.
    pub fn figure2() -> Hierarchy {
        build(
            4,
            &[
                ("0", v(-5, -5)),
                ("1", v(7, -5)),
                ("01", v(-4, 3)),
                ("10", v(5, 5)),
                ("001", v(-5, -3)),
                ("010", v(-2, 1)),
                ("101", v(6, 1)),
                ("110", v(2, -2)),
                ("0001", v(-3, -5)),
                ("0010", v(-5, -3)),
                ("0101", v(-2, 1)),
                ("0110", v(-5, 2)),
                ("1001", v(2, 3)),
                ("1010", v(4, 1)),
                ("1101", v(3, -3)),
                ("1110", v(6, -4)),
            ],
        )
    }

    /// The five paths the required edges of [`figure2`] split into.
    pub fn figure2_expected_paths() -> Vec<Vec<Vertex>> {
        let h = figure2();
        let z = |s: &str| h.get(s).clone();
        vec![
            vec![z("0110"), z("010"), z("001"), z("0001")],
            vec![z("01"), z("10")],
            vec![z("1001"), z("1010")],
            vec![z("101"), z("110")],
            vec![z("1101"), z("1110")],
        ]
    }

    /// A box around the sites in which exactly the required edges of `h` are open.
    pub fn figure2_realization(h: &Hierarchy) -> BoxRealization {
        let spec = BoxSpec::with_origin(2, 13, v(-5, -5)).expect("box");
        let p = ModelParams::new(2, 3.0, 1.0, 2.5, ModelKind::Lrp).expect("params");
        let edges: Vec<_> = h
            .required_edges()
            .iter()
            .filter_map(|(_, a, b)| Some((spec.index_of(a.coords())?, spec.index_of(b.coords())?)))
            .collect();
        BoxRealization::from_edges(spec, p, 0, None, &edges).expect("edges")
    }

    /// One single-condition mutation of [`figure2`] for each of the
    /// conditions 2 to 5, with the realization to validate it against.
    pub fn figure2_mutations() -> Vec<(u8, Hierarchy, BoxRealization)> {
        let base = figure2();
        let r = figure2_realization(&base);
        let key = |s: &str| s.parse::<SiteKey>().expect("key");

        let mut h2 = base.clone();
        *h2.site_mut(key("1100")) = v(0, 0);

        let spec = r.spec().clone();
        let (a, b) = (spec.index_of(&[-4, 3]).expect("in box"), spec.index_of(&[5, 5]).expect("in box"));
        let open: Vec<_> = r.edges().filter(|&e| e != (a.min(b), a.max(b))).collect();
        let r3 = BoxRealization::from_edges(spec, *r.params(), 0, None, &open).expect("edges");

        // The edge of σ=10 repeats the edge of σ=01.
        let mut h4 = base.clone();
        *h4.site_mut(key("1001")) = v(-5, 2);
        *h4.site_mut(key("1010")) = v(-2, 1);

        let mut h5 = base.clone();
        *h5.site_mut(key("1101")) = v(-3, -5);

        vec![(2, h2, r.clone()), (3, base, r3), (4, h4, r.clone()), (5, h5, r)]
    }

    /// Depth 3 with gap paths of lengths 1, 3, 1, 2.
    pub fn figure3() -> (Hierarchy, Vec<Vec<Vertex>>) {
        let h = build(
            3,
            &[
                ("0", v(-55, -10)),
                ("1", v(45, -10)),
                ("01", v(-30, 5)),
                ("10", v(30, -10)),
                ("001", v(-45, -15)),
                ("010", v(-25, -10)),
                ("101", v(32, -5)),
                ("110", v(40, 0)),
            ],
        );
        let paths = vec![
            vec![v(-55, -10), v(-45, -15)],
            vec![v(-25, -10), v(-28, -2), v(-35, 0), v(-30, 5)],
            vec![v(30, -10), v(32, -5)],
            vec![v(40, 0), v(42, -8), v(45, -10)],
        ];
        (h, paths)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::params::ModelKind;

    fn v(x: i64, y: i64) -> Vertex {
        Vertex::new(&[x, y])
    }

    #[test]
    fn figure2_is_valid() {
        let h = figure2();
        assert_eq!(h.required_edges().len(), 7);
        let r = figure2_realization(&h);
        assert_eq!(validate_hierarchy(&h, &r), Ok(()));
        assert_eq!(h.get("0011"), h.get("001"));
        assert_eq!(h.get("0100"), h.get("010"));
    }

    #[test]
    fn figure2_decomposes_into_five_paths() {
        let h = figure2();
        let paths = decompose_paths(&h).unwrap();
        assert_eq!(paths.len(), 5);
        let got: BTreeSet<_> = paths.iter().map(|p| edge_set(p)).collect();
        let want: BTreeSet<_> = figure2_expected_paths().iter().map(|p| edge_set(p)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn single_condition_mutations() {
        for (cond, h, r) in figure2_mutations() {
            match validate_hierarchy(&h, &r) {
                Err(HierarchyError::Violation(x)) => assert_eq!(x.condition(), cond, "{x}"),
                other => panic!("condition {cond}: unexpected {other:?}"),
            }
        }
        let base = figure2();
        let r = figure2_realization(&base);
        let h = Hierarchy::new(v(0, 0), v(7, -5), base.levels().to_vec()).unwrap();
        assert!(matches!(validate_hierarchy(&h, &r), Err(HierarchyError::Violation(Violation::Endpoints))));
        let (h3, _) = figure3();
        assert!(matches!(validate_hierarchy(&h3, &r), Err(HierarchyError::SiteOutOfBox(..))));
    }

    #[test]
    fn site_keys() {
        let k: SiteKey = "0110".parse().unwrap();
        assert_eq!((k.level, k.code), (4, 6));
        assert_eq!(k.to_string(), "0110");
        assert_eq!(SiteKey::root().extend("01").to_string(), "01");
        assert!("012".parse::<SiteKey>().is_err());
    }

    #[test]
    fn parser_reads_sites() {
        let text = "# fig\ns 0 -5 -5\ns 1 7 -5\ns 01 -4 3\ns 10 5 5\n";
        let h = read_hierarchy(text.as_bytes()).unwrap();
        assert_eq!(h.depth(), 2);
        assert_eq!(h.get("00"), &v(-5, -5));
        assert!(matches!(read_hierarchy("s 0 1 1\ns 1 2 2\ns 01 1\n".as_bytes()), Err(HierarchyError::MissingSite(_)) | Err(HierarchyError::DimensionMismatch(_))));
        assert!(matches!(read_hierarchy("q 0 1\n".as_bytes()), Err(HierarchyError::ParseError { line: 1, .. })));
    }

    fn event_params(n: f64) -> HierarchyEventParams {
        let p = ModelParams::new(1, 1.5, 1.0, 3.5, ModelKind::Sfp).unwrap();
        HierarchyEventParams::new(&p, 0.4, 0.2, n).unwrap()
    }

    #[test]
    fn bond_and_gap_examples() {
        let line = |c: i64| Vertex::new(&[c]);
        let h = Hierarchy::new(line(0), line(100), vec![vec![line(0), line(100)], vec![line(0), line(0), line(100), line(100)]]).unwrap();
        let ep = event_params(100.0);
        assert!(check_bond_condition(&h, &ep));
        let h2 = Hierarchy::new(line(0), line(100), vec![vec![line(0), line(100)], vec![line(0), line(50), line(50), line(100)]]).unwrap();
        assert!(!check_bond_condition(&h2, &ep));
        // Gaps: level 2 gaps are 0 and 0 in `h` (∨1 gives 1) -> product 1 < N^{2η}.
        assert!(!check_gap_condition(&h, &ep));
        let h3 = Hierarchy::new(line(0), line(100), vec![vec![line(0), line(100)], vec![line(0), line(30), line(70), line(100)]]).unwrap();
        assert!(check_gap_condition(&h3, &ep));
        assert!(HierarchyEventParams::new(&ModelParams::new(1, 1.5, 1.0, 3.5, ModelKind::Sfp).unwrap(), 0.8, 0.2, 10.0).is_err());
    }

    #[test]
    fn figure3_gap_lengths() {
        let (h, paths) = figure3();
        let rep = gap_path_report(&h, &paths).unwrap();
        assert_eq!((rep.total_length, rep.required), (7, 8));
        assert!(rep.disjoint && rep.avoids_sites);
        assert!(!check_gap_paths_condition(&h, &paths).unwrap());

        let mut long = paths.clone();
        long[0] = vec![v(-55, -10), v(-50, -20), v(-45, -15)];
        assert!(check_gap_paths_condition(&h, &long).unwrap());

        let mut through = long.clone();
        through[3] = vec![v(40, 0), v(32, -5), v(45, -10)];
        assert!(!check_gap_paths_condition(&h, &through).unwrap());

        let mut wrong = paths;
        wrong[2] = vec![v(30, -10), v(31, -5)];
        assert_eq!(check_gap_paths_condition(&h, &wrong), Err(HierarchyError::PathEndpointMismatch(SiteKey::new(2, 2))));
    }

    #[test]
    fn construction_from_paths() {
        let line = |c: i64| Vertex::new(&[c]);
        let ep = event_params(100.0);
        let (h, gaps) = hierarchy_from_path(&[line(0), line(100)], 2, &ep).unwrap();
        assert_eq!(h.get("01"), &line(0));
        assert_eq!(h.get("10"), &line(100));
        assert_eq!(gaps, vec![vec![line(0)], vec![line(100)]]);
        assert!(check_bond_condition(&h, &ep));

        let path: Vec<Vertex> = [0, 40, 41, 100].iter().map(|&c| line(c)).collect();
        let (h, gaps) = hierarchy_from_path(&path, 2, &ep).unwrap();
        assert_eq!((h.get("01"), h.get("10")), (&line(41), &line(100)));
        assert_eq!(gaps[0], path[..3].to_vec());
        assert_eq!(h.check_structure(), Ok(()));
        assert!(matches!(
            hierarchy_from_path(&[line(0), line(100)], 3, &ep),
            Err(HierarchyError::NoAdmissibleSplit(k)) if k == SiteKey::new(1, 0)
        ));
    }
}
