//! Horizontal visibility graphs.
//!
//! Vertices `i < j` are joined iff every sample strictly between them is
//! strictly below both `x[i]` and `x[j]`. Equal values block visibility.
//! The weighted variant assigns `1 / sqrt((j - i)^2 + (x[i] - x[j])^2)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::seed;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Binary,
    Weighted,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Binary => "binary",
            Mode::Weighted => "weighted",
        }
    }
}

/// Undirected graph over time-indexed vertices `0..n`.
///
/// Edges are kept sorted by `(i, j)` with `i < j`; each vertex also has an
/// ascending neighbor list (compressed rows) for traversal.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    n: usize,
    mode: Mode,
    edges: Vec<(u32, u32)>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    neighbor_weights: Vec<f64>,
}

impl VisibilityGraph {
    /// Builds the (weighted) HVG of `x` in one forward sweep per vertex.
    ///
    /// From each `i` the scan walks right keeping the running maximum of the
    /// samples passed over; `j` is visible when it exceeds that maximum, and
    /// the scan stops once the maximum reaches `x[i]`, since anything further
    /// is hidden behind it.
    pub fn build(x: &[f64], mode: Mode) -> Result<Self> {
        if x.len() < 2 {
            return Err(invalid("visibility graph needs at least two samples"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("visibility graph needs finite samples"));
        }
        if x.len() > u32::MAX as usize {
            return Err(invalid("series too long"));
        }
        let n = x.len();
        let mut edges = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        for i in 0..n - 1 {
            let xi = x[i];
            let mut max = f64::NEG_INFINITY;
            for (j, &xj) in x.iter().enumerate().skip(i + 1) {
                if xj > max {
                    edges.push((i as u32, j as u32));
                    weights.push(match mode {
                        Mode::Binary => 1.0,
                        Mode::Weighted => edge_weight(i, j, xi, xj),
                    });
                    max = xj;
                    if max >= xi {
                        break;
                    }
                }
            }
        }
        Ok(Self::assemble(n, mode, edges, weights))
    }

    /// Graph from an explicit edge list; `weights` defaults to all ones.
    ///
    /// Used for synthetic graphs; duplicate edges and self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], weights: Option<&[f64]>) -> Result<Self> {
        let mut list: Vec<((u32, u32), f64)> = Vec::with_capacity(edges.len());
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a == b || a >= n || b >= n {
                return Err(invalid("edge endpoints must be distinct valid vertices"));
            }
            let w = weights.map_or(1.0, |w| w[k]);
            if !(w > 0.0) || !w.is_finite() {
                return Err(invalid("edge weights must be positive and finite"));
            }
            list.push(((a.min(b) as u32, a.max(b) as u32), w));
        }
        list.sort_by(|p, q| p.0.cmp(&q.0));
        if list.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate edge"));
        }
        let mode = if weights.is_some() { Mode::Weighted } else { Mode::Binary };
        let (edges, weights) = list.into_iter().unzip();
        Ok(Self::assemble(n, mode, edges, weights))
    }

    fn assemble(n: usize, mode: Mode, edges: Vec<(u32, u32)>, weights: Vec<f64>) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j) in &edges {
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut neighbor_weights = vec![0.0; offsets[n]];
        // edges sorted by (i, j): for each vertex the smaller neighbors arrive
        // first, ascending, then the larger ones, ascending
        for (&(i, j), &w) in edges.iter().zip(&weights) {
            let (iu, ju) = (i as usize, j as usize);
            neighbors[fill[iu]] = j;
            neighbor_weights[fill[iu]] = w;
            fill[iu] += 1;
            neighbors[fill[ju]] = i;
            neighbor_weights[fill[ju]] = w;
            fill[ju] += 1;
        }
        Self { n, mode, edges, weights, offsets, neighbors, neighbor_weights }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Edges `(i, j)`, `i < j`, ascending.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Edge weights parallel to [`edges`](Self::edges).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Position of `v`'s first neighbor in the flattened neighbor arrays.
    pub fn neighbor_offset(&self, v: usize) -> usize {
        self.offsets[v]
    }

    pub fn neighbor_weights(&self, v: usize) -> &[f64] {
        &self.neighbor_weights[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Number of incident edges (ignores weights).
    pub fn neighbor_count(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Adjacency entry `A[i, j]`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let nb = self.neighbors(i);
        match nb.binary_search(&(j as u32)) {
            Ok(k) => self.neighbor_weights(i)[k],
            Err(_) => 0.0,
        }
    }

    /// Same edge set with every weight set to one.
    pub fn binarized(&self) -> Self {
        let mut g = self.clone();
        g.mode = Mode::Binary;
        g.weights.iter_mut().for_each(|w| *w = 1.0);
        g.neighbor_weights.iter_mut().for_each(|w| *w = 1.0);
        g
    }
}

#[inline]
pub fn edge_weight(i: usize, j: usize, xi: f64, xj: f64) -> f64 {
    let dt = (j - i) as f64;
    let dx = xi - xj;
    1.0 / libm::sqrt(dt * dt + dx * dx)
}

/// Convenience wrapper for [`VisibilityGraph::build`].
pub fn build_hvg(x: &[f64], mode: Mode) -> Result<VisibilityGraph> {
    VisibilityGraph::build(x, mode)
}

/// Empirical degree distribution of a binary HVG built on i.i.d. noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeLaw {
    /// `probability[k]` is the fraction of vertices with degree `k`.
    pub probability: Vec<f64>,
    pub mean: f64,
}

impl DegreeLaw {
    pub fn p(&self, k: usize) -> f64 {
        self.probability.get(k).copied().unwrap_or(0.0)
    }
}

/// Degree distribution of a binary HVG on `length` uniform samples; for
/// i.i.d. data `P(k) = (1/3)(2/3)^(k-2)` with mean degree 4.
pub fn degree_law_check(length: usize, seed: u64) -> Result<DegreeLaw> {
    let mut rng = seed::rng(seed::derive(seed, &[seed::stream::SIGNAL]));
    let x: Vec<f64> = (0..length).map(|_| rng.gen::<f64>()).collect();
    let g = VisibilityGraph::build(&x, Mode::Binary)?;
    Ok(degree_law(&g))
}

pub fn degree_law(g: &VisibilityGraph) -> DegreeLaw {
    let n = g.vertex_count();
    let mut counts: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for v in 0..n {
        let k = g.neighbor_count(v);
        if k >= counts.len() {
            counts.resize(k + 1, 0);
        }
        counts[k] += 1;
        total += k;
    }
    DegreeLaw {
        probability: counts.iter().map(|&c| c as f64 / n as f64).collect(),
        mean: total as f64 / n as f64,
    }
}

#[cfg(test)]
pub(crate) mod oracle {
    use alloc::vec::Vec;

    /// All-pairs visibility check straight from the definition, O(n^3).
    pub fn brute_force_edges(x: &[f64]) -> Vec<(u32, u32)> {
        let n = x.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if (i + 1..j).all(|p| x[i] > x[p] && x[j] > x[p]) {
                    out.push((i as u32, j as u32));
                }
            }
        }
        out
    }
}
