use std::collections::VecDeque;

use super::{BoxRealization, GraphError};
use crate::lattice::Vertex;

/// Marker for "no open path" in hop-count vectors.
pub const UNREACHABLE: u32 = u32::MAX;

/// Connected components. Each cluster is labelled by its smallest vertex
/// index, which is also its lexicographically smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    labels: Vec<u32>,
    sizes: Vec<u32>,
    largest: u32,
}

impl Clusters {
    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    /// Size of the cluster containing `i`.
    pub fn size_of(&self, i: usize) -> usize {
        self.sizes[self.labels[i] as usize] as usize
    }

    /// Label of the largest cluster; ties go to the smallest label.
    pub fn largest(&self) -> usize {
        self.largest as usize
    }

    pub fn largest_size(&self) -> usize {
        self.sizes[self.largest as usize] as usize
    }

    pub fn count(&self) -> usize {
        self.labels.iter().enumerate().filter(|&(i, &l)| i == l as usize).count()
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] as usize == label).collect()
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

pub fn clusters(r: &BoxRealization) -> Clusters {
    let n = r.vertex_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    for (a, b) in r.edges() {
        let ra = find(&mut parent, a as u32);
        let rb = find(&mut parent, b as u32);
        // Keep the smaller index as root so roots are cluster minima.
        if ra < rb {
            parent[rb as usize] = ra;
        } else if rb < ra {
            parent[ra as usize] = rb;
        }
    }
    let mut labels = vec![0u32; n];
    let mut sizes = vec![0u32; n];
    for i in 0..n {
        let root = find(&mut parent, i as u32);
        labels[i] = root;
        sizes[root as usize] += 1;
    }
    let mut largest = 0u32;
    for i in 0..n {
        if sizes[i] > sizes[largest as usize] {
            largest = i as u32;
        }
    }
    Clusters { labels, sizes, largest }
}

/// Hop counts from `source` to every vertex ([`UNREACHABLE`] if none).
pub fn bfs_distances(r: &BoxRealization, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; r.vertex_count()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source as u32);
    while let Some(v) = queue.pop_front() {
        let next = dist[v as usize] + 1;
        for &w in r.neighbors(v as usize) {
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = next;
                queue.push_back(w);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSample {
    pub x: Vertex,
    pub y: Vertex,
    pub euclid: f64,
    /// `None` when `x` and `y` lie in different clusters.
    pub hops: Option<u32>,
}

/// Breadth-first graph distance; the search stops as soon as `y` is reached.
pub fn graph_distance(r: &BoxRealization, x: &Vertex, y: &Vertex) -> Result<DistanceSample, GraphError> {
    let a = r.index_of(x)?;
    let b = r.index_of(y)?;
    let euclid = x.dist(y);
    let hops = if a == b {
        Some(0)
    } else {
        let mut dist = vec![UNREACHABLE; r.vertex_count()];
        let mut queue = VecDeque::new();
        dist[a] = 0;
        queue.push_back(a as u32);
        let mut found = None;
        'search: while let Some(v) = queue.pop_front() {
            let next = dist[v as usize] + 1;
            for &w in r.neighbors(v as usize) {
                if dist[w as usize] == UNREACHABLE {
                    if w as usize == b {
                        found = Some(next);
                        break 'search;
                    }
                    dist[w as usize] = next;
                    queue.push_back(w);
                }
            }
        }
        found
    };
    Ok(DistanceSample { x: x.clone(), y: y.clone(), euclid, hops })
}

/// Degrees of the vertices at sup-distance at least `margin` from the
/// outside of the box, in index order.
pub fn degree_sequence(r: &BoxRealization, margin: u64) -> Result<Vec<u32>, GraphError> {
    let spec = r.spec();
    if 2 * margin >= spec.side() {
        return Err(GraphError::MarginTooLarge { margin, side: spec.side() });
    }
    let d = spec.d() as usize;
    let mut c = vec![0i64; d];
    let mut out = Vec::new();
    for i in 0..r.vertex_count() {
        spec.write_coords(i, &mut c);
        if spec.depth(&c) >= margin as i64 {
            out.push(r.degree(i) as u32);
        }
    }
    Ok(out)
}
