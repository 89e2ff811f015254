//! Lattice vertices and finite boxes `origin + {0, ..., L-1}^d`.
//!
//! Box indices are row-major with the first coordinate most significant, so
//! index order coincides with lexicographic order of the coordinates.

use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    #[error("box dimension must be at least 1")]
    ZeroDimension,
    #[error("box side must be at least 2 (got {0})")]
    SideTooSmall(u64),
    #[error("box with side {side} in dimension {d} has too many vertices")]
    TooManyVertices { d: u32, side: u64 },
    #[error("origin has {got} coordinates, box dimension is {d}")]
    OriginDimension { d: u32, got: usize },
}

/// A point of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(SmallVec<[i64; 4]>);

impl Vertex {
    pub fn new(coords: &[i64]) -> Self {
        Vertex(SmallVec::from_slice(coords))
    }

    pub fn origin(d: u32) -> Self {
        Vertex(SmallVec::from_elem(0, d as usize))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Vertex) -> f64 {
        euclid(&self.0, &other.0)
    }

    /// Squared Euclidean distance.
    pub fn dist2(&self, other: &Vertex) -> i64 {
        dist2(&self.0, &other.0)
    }

    /// Sup-norm distance.
    pub fn dist_inf(&self, other: &Vertex) -> i64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for Vertex {
    fn from(v: Vec<i64>) -> Self {
        Vertex(SmallVec::from_vec(v))
    }
}

impl From<&[i64]> for Vertex {
    fn from(v: &[i64]) -> Self {
        Vertex::new(v)
    }
}

impl<const N: usize> From<[i64; N]> for Vertex {
    fn from(v: [i64; N]) -> Self {
        Vertex::new(&v)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[inline]
pub fn dist2(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclid(a: &[i64], b: &[i64]) -> f64 {
    (dist2(a, b) as f64).sqrt()
}

/// The box `origin + {0, ..., side-1}^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxSpec {
    d: u32,
    side: u64,
    origin: Vertex,
}

impl BoxSpec {
    pub fn new(d: u32, side: u64) -> Result<Self, BoxError> {
        BoxSpec::with_origin(d, side, Vertex::origin(d.max(1)))
    }

    pub fn with_origin(d: u32, side: u64, origin: Vertex) -> Result<Self, BoxError> {
        if d == 0 {
            return Err(BoxError::ZeroDimension);
        }
        if side < 2 {
            return Err(BoxError::SideTooSmall(side));
        }
        if origin.dim() != d as usize {
            return Err(BoxError::OriginDimension { d, got: origin.dim() });
        }
        let n = side.checked_pow(d).ok_or(BoxError::TooManyVertices { d, side })?;
        // Vertex ids are stored as u32.
        if n > u32::MAX as u64 || side > i64::MAX as u64 / 4 {
            return Err(BoxError::TooManyVertices { d, side });
        }
        Ok(BoxSpec { d, side, origin })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn origin(&self) -> &Vertex {
        &self.origin
    }

    pub fn vertex_count(&self) -> usize {
        (self.side as usize).pow(self.d)
    }

    /// Number of unordered vertex pairs.
    pub fn pair_count(&self) -> u128 {
        let n = self.vertex_count() as u128;
        n * (n.saturating_sub(1)) / 2
    }

    /// Largest Euclidean distance inside the box.
    pub fn diameter(&self) -> f64 {
        ((self.side - 1) as f64) * (self.d as f64).sqrt()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d as usize
            && x.iter().zip(self.origin.coords()).all(|(&c, &o)| c >= o && ((c - o) as u64) < self.side)
    }

    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let l = self.side as usize;
        Some(x.iter().zip(self.origin.coords()).fold(0usize, |acc, (&c, &o)| acc * l + (c - o) as usize))
    }

    /// Writes the coordinates of vertex `index` into `out`.
    pub fn write_coords(&self, mut index: usize, out: &mut [i64]) {
        let l = self.side as usize;
        for k in (0..self.d as usize).rev() {
            out[k] = self.origin.coords()[k] + (index % l) as i64;
            index /= l;
        }
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        let mut c = vec![0i64; self.d as usize];
        self.write_coords(index, &mut c);
        Vertex::from(c)
    }

    /// All coordinates, flattened: vertex `i` occupies `[i*d, (i+1)*d)`.
    pub fn all_coords(&self) -> Vec<i64> {
        let d = self.d as usize;
        let mut out = vec![0i64; self.vertex_count() * d];
        for (i, chunk) in out.chunks_mut(d).enumerate() {
            self.write_coords(i, chunk);
        }
        out
    }

    /// Sup-norm distance from `x` to the complement of the box, minus one:
    /// 0 for boundary vertices.
    pub fn depth(&self, x: &[i64]) -> i64 {
        x.iter()
            .zip(self.origin.coords())
            .map(|(&c, &o)| {
                let r = c - o;
                r.min(self.side as i64 - 1 - r)
            })
            .min()
            .unwrap_or(0)
    }
}
