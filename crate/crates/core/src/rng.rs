//! Keyed counter-mode random numbers.
//!
//! Every draw is a pure function of `(seed, domain tag, payload)`: there is
//! no generator state to advance, so draws do not depend on evaluation order
//! or on how work is split between threads. Edge uniforms are shared by all
//! model kinds built from the same seed, which is what couples SFP to LRP.
//!
//! The mixer is the SplitMix64 finaliser; absorbing a word `w` into state `h`
//! is one SplitMix64 step `mix(h + (w + 1) * GOLDEN)`. Not cryptographic.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RngError {
    #[error("edge endpoints coincide")]
    SelfLoop,
    #[error("tau must be greater than 1")]
    TauTooSmall,
    #[error("endpoints have different dimensions")]
    DimensionMismatch,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain separation for keyed draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Weight,
    Edge,
    Experiment,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Weight => 0x5745_4947_4854_0001,
            Domain::Edge => 0x4544_4745_0000_0002,
            Domain::Experiment => 0x4558_5045_5249_0003,
        }
    }
}

#[inline(always)]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Incremental hash over `seed ‖ tag ‖ payload words`.
///
/// Cloning a partially absorbed key lets callers reuse a common prefix,
/// e.g. the first endpoint of every edge in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyedHash(u64);

impl KeyedHash {
    #[inline]
    pub fn new(seed: u64, domain: Domain) -> Self {
        KeyedHash(mix(seed ^ domain.tag()))
    }

    #[inline(always)]
    pub fn absorb(self, word: u64) -> Self {
        KeyedHash(mix(self.0.wrapping_add(word.wrapping_add(1).wrapping_mul(GOLDEN))))
    }

    #[inline]
    pub fn absorb_coords(self, coords: &[i64]) -> Self {
        coords.iter().fold(self, |h, &c| h.absorb(c as u64))
    }

    #[inline(always)]
    pub fn word(self) -> u64 {
        self.0
    }

    #[inline(always)]
    pub fn unit(self) -> f64 {
        to_open_unit(self.0)
    }
}

/// Maps a 64-bit word to `(0, 1)`: the top 53 bits scaled by `2^-53`,
/// with an exact zero replaced by `2^-64`.
#[inline(always)]
pub fn to_open_unit(w: u64) -> f64 {
    let u = (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    if u == 0.0 {
        f64::from_bits(0x3BF0_0000_0000_0000) // 2^-64
    } else {
        u
    }
}

/// Puts two endpoints in lexicographic order.
#[inline]
pub fn canonical_pair<'a>(x: &'a [i64], y: &'a [i64]) -> (&'a [i64], &'a [i64]) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// The shared uniform `U_xy` of the edge `{x, y}`.
pub fn uniform_for_edge(seed: u64, x: &[i64], y: &[i64]) -> Result<f64, RngError> {
    if x.len() != y.len() {
        return Err(RngError::DimensionMismatch);
    }
    if x == y {
        return Err(RngError::SelfLoop);
    }
    let (a, b) = canonical_pair(x, y);
    Ok(KeyedHash::new(seed, Domain::Edge).absorb_coords(a).absorb_coords(b).unit())
}

/// The uniform behind the weight of vertex `x`.
#[inline]
pub fn uniform_for_vertex(seed: u64, x: &[i64]) -> f64 {
    KeyedHash::new(seed, Domain::Weight).absorb_coords(x).unit()
}

/// Inverse transform `W = U^{-1/(tau-1)}`, so `P(W >= w) = w^{-(tau-1)}` for `w >= 1`.
#[inline]
pub fn pareto_from_uniform(u: f64, tau: f64) -> f64 {
    u.powf(-1.0 / (tau - 1.0))
}

/// Pareto weight of vertex `x`.
pub fn weight_for_vertex(seed: u64, x: &[i64], tau: f64) -> Result<f64, RngError> {
    if !(tau > 1.0) {
        return Err(RngError::TauTooSmall);
    }
    Ok(pareto_from_uniform(uniform_for_vertex(seed, x), tau))
}

/// Seed of replicate `index` under a master seed.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    KeyedHash::new(master, Domain::Experiment).absorb(index).word()
}

/// Sequential uniforms keyed by `(seed, experiment stream, counter)`.
///
/// Used inside one Monte-Carlo replicate; the replicate seed comes from
/// [`replicate_seed`], so streams never depend on thread scheduling.
#[derive(Debug, Clone)]
pub struct ReplicateStream {
    base: KeyedHash,
    counter: u64,
}

impl ReplicateStream {
    pub fn new(replicate_seed: u64) -> Self {
        ReplicateStream { base: KeyedHash::new(replicate_seed, Domain::Experiment), counter: 0 }
    }

    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        let u = self.base.absorb(self.counter).unit();
        self.counter += 1;
        u
    }

    #[inline]
    pub fn next_pareto(&mut self, tau: f64) -> f64 {
        pareto_from_uniform(self.next_unit(), tau)
    }
}
