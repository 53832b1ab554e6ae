//! Per-vertex graph metrics: degree, clustering, betweenness and closeness.
//!
//! On weighted graphs degree and clustering use the weights directly, while
//! shortest paths treat an edge of weight `w` as having length `1 / w`.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::hvg::{Mode, VisibilityGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexPropertyKind {
    Degree,
    Clustering,
    Betweenness,
    Closeness,
}

impl VertexPropertyKind {
    pub const ALL: [VertexPropertyKind; 4] = [
        VertexPropertyKind::Degree,
        VertexPropertyKind::Clustering,
        VertexPropertyKind::Betweenness,
        VertexPropertyKind::Closeness,
    ];

    /// Two-letter tag: `DG`, `CL`, `BC`, `CC`.
    pub fn tag(self) -> &'static str {
        match self {
            VertexPropertyKind::Degree => "DG",
            VertexPropertyKind::Clustering => "CL",
            VertexPropertyKind::Betweenness => "BC",
            VertexPropertyKind::Closeness => "CC",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.tag().eq_ignore_ascii_case(tag))
    }

    /// Whether the metric needs all-pairs shortest paths.
    pub fn is_path_based(self) -> bool {
        matches!(self, VertexPropertyKind::Betweenness | VertexPropertyKind::Closeness)
    }
}

pub fn degree(g: &VisibilityGraph, v: usize) -> f64 {
    g.neighbor_weights(v).iter().sum()
}

pub fn degrees(g: &VisibilityGraph) -> Vec<f64> {
    (0..g.vertex_count()).map(|v| degree(g, v)).collect()
}

/// Clustering over the closed neighborhood `{v} + N(v)`, counting each
/// adjacent pair in both orders.
pub fn clustering(g: &VisibilityGraph, v: usize) -> f64 {
    let mut marks = vec![usize::MAX; g.vertex_count()];
    clustering_with(g, v, &mut marks)
}

pub fn clusterings(g: &VisibilityGraph) -> Vec<f64> {
    let mut marks = vec![usize::MAX; g.vertex_count()];
    (0..g.vertex_count()).map(|v| clustering_with(g, v, &mut marks)).collect()
}

fn clustering_with(g: &VisibilityGraph, v: usize, marks: &mut [usize]) -> f64 {
    let nb = g.neighbors(v);
    let size = nb.len() + 1;
    if size <= 1 {
        return 0.0;
    }
    for &u in nb {
        marks[u as usize] = v;
    }
    let mut sum = degree(g, v);
    for &u in nb {
        let u = u as usize;
        for (&w, &a) in g.neighbors(u).iter().zip(g.neighbor_weights(u)) {
            if (w as usize) > u && marks[w as usize] == v {
                sum += a;
            }
        }
    }
    2.0 * sum / (size * (size - 1)) as f64
}

/// Betweenness and closeness of every vertex, from one shortest-path pass per
/// source.
#[derive(Debug, Clone, PartialEq)]
pub struct Centralities {
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
}

/// Brandes accumulation: breadth-first search on binary graphs, Dijkstra on
/// weighted ones. Betweenness counts unordered endpoint pairs.
pub fn centralities(g: &VisibilityGraph) -> Centralities {
    let mut work = PathWork::new(g);
    let n = g.vertex_count();
    let mut betweenness = vec![0.0; n];
    let mut closeness = vec![0.0; n];
    for s in 0..n {
        match g.mode() {
            Mode::Binary => work.bfs(g, s),
            Mode::Weighted => work.dijkstra(g, s),
        }
        closeness[s] = work.closeness_sum(s, g.mode());
        work.accumulate(g, s, &mut betweenness);
    }
    for b in &mut betweenness {
        *b *= 0.5;
    }
    Centralities { betweenness, closeness }
}

pub fn betweenness(g: &VisibilityGraph, v: usize) -> f64 {
    centralities(g).betweenness[v]
}

/// `sum over u != v of 2^-d(u, v)`; unreachable vertices contribute 0.
pub fn closeness(g: &VisibilityGraph, v: usize) -> f64 {
    let mut work = PathWork::new(g);
    match g.mode() {
        Mode::Binary => work.bfs(g, v),
        Mode::Weighted => work.dijkstra(g, v),
    }
    work.closeness_sum(v, g.mode())
}

/// The chosen metric at every vertex, in time order.
pub fn vertex_properties(g: &VisibilityGraph, kind: VertexPropertyKind) -> Vec<f64> {
    match kind {
        VertexPropertyKind::Degree => degrees(g),
        VertexPropertyKind::Clustering => clusterings(g),
        VertexPropertyKind::Betweenness => centralities(g).betweenness,
        VertexPropertyKind::Closeness => centralities(g).closeness,
    }
}

/// Several metrics at once, sharing the shortest-path pass. Output order
/// follows `kinds`.
pub fn vertex_properties_many(g: &VisibilityGraph, kinds: &[VertexPropertyKind]) -> Vec<Vec<f64>> {
    let cent = kinds.iter().any(|k| k.is_path_based()).then(|| centralities(g));
    kinds
        .iter()
        .map(|&k| match k {
            VertexPropertyKind::Degree => degrees(g),
            VertexPropertyKind::Clustering => clusterings(g),
            VertexPropertyKind::Betweenness => cent.as_ref().unwrap().betweenness.clone(),
            VertexPropertyKind::Closeness => cent.as_ref().unwrap().closeness.clone(),
        })
        .collect()
}

/// Scratch buffers reused across sources.
struct PathWork {
    hops: Vec<u32>,
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<u32>,
    lengths: Vec<f64>,
    queue: Queue,
    pow2: Vec<f64>,
}

/// Priority structure for weighted searches.
enum Queue {
    /// Buckets narrower than the shortest edge, in a ring. Vertices sharing a
    /// bucket cannot improve each other, so a bucket is settled wholesale.
    Buckets { width: f64, ring: Vec<Vec<u32>> },
    Heap(BinaryHeap<Reverse<(u64, u32)>>),
}

impl Queue {
    fn for_lengths(lengths: &[f64], n: usize) -> Self {
        let (lo, hi) = lengths
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &l| (lo.min(l), hi.max(l)));
        // keep a margin so rounding never puts an edge's endpoints in one bucket
        let width = lo * (1.0 - 1e-9);
        let span = hi / width;
        if lengths.is_empty() || !(width > 0.0) || !(span < (4 * n + 64) as f64) {
            return Queue::Heap(BinaryHeap::new());
        }
        Queue::Buckets { width, ring: vec![Vec::new(); span as usize + 2] }
    }
}

const UNSEEN: u32 = u32::MAX;

/// Path lengths are sums of irrational edge lengths, so equal-length routes
/// accumulated in different orders can differ in the last bits.
const LENGTH_RTOL: f64 = 1e-12;

#[inline]
fn same_length(a: f64, b: f64) -> bool {
    libm::fabs(a - b) <= LENGTH_RTOL * b
}

impl PathWork {
    fn new(g: &VisibilityGraph) -> Self {
        let n = g.vertex_count();
        let lengths = match g.mode() {
            Mode::Binary => Vec::new(),
            Mode::Weighted => (0..n)
                .flat_map(|v| g.neighbor_weights(v).iter().map(|w| 1.0 / w))
                .collect(),
        };
        let mut pow2 = Vec::with_capacity(n + 1);
        let mut p = 1.0;
        for _ in 0..=n {
            pow2.push(p);
            p *= 0.5;
        }
        Self {
            hops: vec![UNSEEN; n],
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            queue: Queue::for_lengths(&lengths, n),
            lengths,
            pow2,
        }
    }

    fn bfs(&mut self, g: &VisibilityGraph, s: usize) {
        self.hops.fill(UNSEEN);
        self.sigma.fill(0.0);
        self.order.clear();
        self.hops[s] = 0;
        self.sigma[s] = 1.0;
        self.order.push(s as u32);
        let mut head = 0;
        while head < self.order.len() {
            let v = self.order[head] as usize;
            head += 1;
            let next = self.hops[v] + 1;
            for &w in g.neighbors(v) {
                let w = w as usize;
                if self.hops[w] == UNSEEN {
                    self.hops[w] = next;
                    self.order.push(w as u32);
                }
                if self.hops[w] == next {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }
    }

    fn dijkstra(&mut self, g: &VisibilityGraph, s: usize) {
        self.dist.fill(f64::INFINITY);
        self.sigma.fill(0.0);
        self.order.clear();
        // reuse `hops` as the settled flag
        self.hops.fill(UNSEEN);
        self.dist[s] = 0.0;
        self.sigma[s] = 1.0;
        let mut queue = core::mem::replace(&mut self.queue, Queue::Heap(BinaryHeap::new()));
        match &mut queue {
            Queue::Buckets { width, ring } => {
                let width = *width;
                let size = ring.len();
                let mut pending = 1usize;
                ring[0].push(s as u32);
                let mut bucket = 0usize;
                while pending > 0 {
                    let slot = bucket % size;
                    let mut idx = 0;
                    while idx < ring[slot].len() {
                        let v = ring[slot][idx] as usize;
                        idx += 1;
                        if self.hops[v] != UNSEEN || (self.dist[v] / width) as usize != bucket {
                            continue;
                        }
                        self.settle(g, v, |w, alt| {
                            ring[(alt / width) as usize % size].push(w as u32);
                            pending += 1;
                        });
                    }
                    pending -= ring[slot].len();
                    ring[slot].clear();
                    bucket += 1;
                }
            }
            Queue::Heap(heap) => {
                heap.clear();
                // non-negative f64 bit patterns order like the values
                heap.push(Reverse((0f64.to_bits(), s as u32)));
                while let Some(Reverse((key, v))) = heap.pop() {
                    let v = v as usize;
                    if self.hops[v] != UNSEEN || f64::from_bits(key) > self.dist[v] {
                        continue;
                    }
                    self.settle(g, v, |w, alt| heap.push(Reverse((alt.to_bits(), w as u32))));
                }
            }
        }
        self.queue = queue;
    }

    /// Marks `v` final and relaxes its arcs; `push` receives improved vertices.
    #[inline]
    fn settle(&mut self, g: &VisibilityGraph, v: usize, mut push: impl FnMut(usize, f64)) {
        self.hops[v] = 0;
        self.order.push(v as u32);
        let base = g.neighbor_offset(v);
        for (k, &w) in g.neighbors(v).iter().enumerate() {
            let w = w as usize;
            if self.hops[w] != UNSEEN {
                continue;
            }
            let alt = self.dist[v] + self.lengths[base + k];
            let cur = self.dist[w];
            if cur.is_finite() && same_length(alt, cur) {
                self.sigma[w] += self.sigma[v];
            } else if alt < cur {
                self.dist[w] = alt;
                self.sigma[w] = self.sigma[v];
                push(w, alt);
            }
        }
    }

    fn closeness_sum(&self, s: usize, mode: Mode) -> f64 {
        let mut sum = 0.0;
        for &v in &self.order {
            let v = v as usize;
            if v == s {
                continue;
            }
            sum += match mode {
                Mode::Binary => self.pow2[self.hops[v] as usize],
                Mode::Weighted => libm::exp2(-self.dist[v]),
            };
        }
        sum
    }

    fn accumulate(&mut self, g: &VisibilityGraph, s: usize, betweenness: &mut [f64]) {
        for &v in &self.order {
            self.delta[v as usize] = 0.0;
        }
        let weighted = g.mode() == Mode::Weighted;
        for idx in (0..self.order.len()).rev() {
            let w = self.order[idx] as usize;
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            let base = if weighted { g.neighbor_offset(w) } else { 0 };
            for (k, &v) in g.neighbors(w).iter().enumerate() {
                let v = v as usize;
                let is_pred = if weighted {
                    self.hops[v] == 0
                        && self.dist[v] < self.dist[w]
                        && same_length(self.dist[v] + self.lengths[base + k], self.dist[w])
                } else {
                    self.hops[v] != UNSEEN && self.hops[v] + 1 == self.hops[w]
                };
                if is_pred {
                    self.delta[v] += self.sigma[v] * coeff;
                }
            }
            if w != s {
                betweenness[w] += self.delta[w];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvg::{build_hvg, Mode};
    use alloc::vec::Vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn path3() -> VisibilityGraph {
        VisibilityGraph::from_edges(3, &[(0, 1), (1, 2)], None).unwrap()
    }

    fn complete(n: usize) -> VisibilityGraph {
        let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        VisibilityGraph::from_edges(n, &edges, None).unwrap()
    }

    /// Floyd-Warshall distances and path counts, then betweenness and
    /// closeness straight from their pair-sum definitions.
    fn oracle(g: &VisibilityGraph) -> (Vec<f64>, Vec<f64>) {
        let n = g.vertex_count();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            d[i][i] = 0.0;
            for (&j, &w) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
                d[i][j as usize] = match g.mode() {
                    Mode::Binary => 1.0,
                    Mode::Weighted => 1.0 / w,
                };
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        // count geodesics by dynamic programming over vertices sorted by distance
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
        let mut count = vec![vec![0.0; n]; n];
        for s in 0..n {
            let mut idx: Vec<usize> = (0..n).filter(|&v| d[s][v].is_finite()).collect();
            idx.sort_by(|&a, &b| d[s][a].partial_cmp(&d[s][b]).unwrap());
            count[s][s] = 1.0;
            for &v in idx.iter().skip(1) {
                let mut c = 0.0;
                for (&u, &w) in g.neighbors(v).iter().zip(g.neighbor_weights(v)) {
                    let len = if g.mode() == Mode::Binary { 1.0 } else { 1.0 / w };
                    if close(d[s][u as usize] + len, d[s][v]) {
                        c += count[s][u as usize];
                    }
                }
                count[s][v] = c;
            }
        }
        let mut bc = vec![0.0; n];
        let mut cc = vec![0.0; n];
        for v in 0..n {
            for i in 0..n {
                if i != v && d[i][v].is_finite() {
                    cc[v] += 2f64.powf(-d[i][v]);
                }
                for j in i + 1..n {
                    if i == v || j == v || !d[i][j].is_finite() {
                        continue;
                    }
                    if close(d[i][v] + d[v][j], d[i][j]) {
                        bc[v] += count[i][v] * count[v][j] / count[i][j];
                    }
                }
            }
        }
        (bc, cc)
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree(&path3(), 1), 2.0);
        let g = build_hvg(&[3.0, 1.0, 2.0, 4.0], Mode::Binary).unwrap();
        assert_eq!(vertex_properties(&g, VertexPropertyKind::Degree), [3.0, 2.0, 3.0, 2.0]);
        let w = build_hvg(&[1.0, 2.0], Mode::Weighted).unwrap();
        for v in 0..2 {
            assert_abs_diff_eq!(degree(&w, v), 0.707_106_781_186_547_5, epsilon = 1e-12);
        }
    }

    #[test]
    fn clustering_examples() {
        let tri = build_hvg(&[2.0, 1.0, 3.0], Mode::Binary).unwrap();
        assert_eq!(tri.edge_count(), 3);
        assert_eq!(clusterings(&tri), [1.0, 1.0, 1.0]);
        assert_eq!(clustering(&path3(), 0), 1.0);
        // middle of a path: C = {0,1,2}, two edges counted twice over 3*2
        assert_abs_diff_eq!(clustering(&path3(), 1), 4.0 / 6.0, epsilon = 1e-15);
        let isolated = VisibilityGraph::from_edges(3, &[(0, 1)], None).unwrap();
        assert_eq!(clustering(&isolated, 2), 0.0);
    }

    #[test]
    fn betweenness_examples() {
        let p = centralities(&path3()).betweenness;
        assert_eq!(p, [0.0, 1.0, 0.0]);
        assert!(centralities(&complete(3)).betweenness.iter().all(|&b| b == 0.0));
        let star = VisibilityGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)], None).unwrap();
        assert_eq!(betweenness(&star, 0), 3.0);
        assert_eq!(betweenness(&star, 2), 0.0);
    }

    #[test]
    fn closeness_examples() {
        assert_eq!(vertex_properties(&path3(), VertexPropertyKind::Closeness), [0.75, 1.0, 0.75]);
        assert_eq!(closeness(&complete(6), 2), 2.5);
        let split = VisibilityGraph::from_edges(4, &[(0, 1)], None).unwrap();
        assert_eq!(closeness(&split, 0), 0.5);
        assert_eq!(closeness(&split, 3), 0.0);
    }

    #[test]
    fn single_edge_shapes() {
        let g = build_hvg(&[0.0, 1.0], Mode::Binary).unwrap();
        for kind in VertexPropertyKind::ALL {
            assert_eq!(vertex_properties(&g, kind).len(), 2);
        }
    }

    #[test]
    fn weighted_paths_follow_reciprocal_lengths() {
        // square 0-1-2-3-0; the heavy route 0-1-2 is shorter than 0-3-2
        let g = VisibilityGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)], Some(&[1.0, 1.0, 0.5, 0.5]))
            .unwrap();
        let c = centralities(&g);
        // geodesics: 0-2 via 1 only; 1-3 via 0 (1+2) ties via 2 (1+2)
        assert_abs_diff_eq!(c.betweenness[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.betweenness[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.betweenness[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c.closeness[0], 0.5 + 0.25 + 0.25, epsilon = 1e-12);
    }

    #[test]
    fn clustering_degree_product_on_noise() {
        let mut rng = crate::seed::rng(11);
        let x: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let g = build_hvg(&x, Mode::Binary).unwrap();
        let cl = clusterings(&g);
        let n = x.len() as f64;
        let mut open_product = 0.0;
        for v in 0..x.len() {
            let k = g.neighbor_count(v);
            let nb = g.neighbors(v);
            let links = nb
                .iter()
                .enumerate()
                .flat_map(|(a, &i)| nb[a + 1..].iter().map(move |&j| (i, j)))
                .filter(|&(i, j)| g.weight(i as usize, j as usize) > 0.0)
                .count() as f64;
            let k = k as f64;
            // the closed neighborhood adds v's own k edges to the count
            assert_abs_diff_eq!(cl[v], 2.0 * (k + links) / ((k + 1.0) * k), epsilon = 1e-12);
            if k > 1.0 {
                open_product += 2.0 * links / (k - 1.0);
            }
        }
        // neighborhood without v: clustering times degree stays at most 2
        assert!(open_product / n <= 2.0 + 0.1, "{}", open_product / n);
        let closed_product = cl.iter().zip(degrees(&g)).map(|(c, d)| c * d).sum::<f64>() / n;
        assert!(closed_product < 4.0, "{closed_product}");
    }

    fn series() -> impl Strategy<Value = Vec<f64>> {
        prop_oneof![
            prop::collection::vec((0i32..4).prop_map(f64::from), 2..40),
            prop::collection::vec(-1.0f64..1.0, 2..40),
        ]
    }

    proptest! {
        #[test]
        fn brandes_matches_oracle(x in series(), weighted in any::<bool>()) {
            let mode = if weighted { Mode::Weighted } else { Mode::Binary };
            let g = build_hvg(&x, mode).unwrap();
            let c = centralities(&g);
            let (bc, cc) = oracle(&g);
            for v in 0..x.len() {
                prop_assert!((c.betweenness[v] - bc[v]).abs() <= 1e-9 * bc[v].max(1.0));
                prop_assert!((c.closeness[v] - cc[v]).abs() <= 1e-12);
            }
        }

        #[test]
        fn degree_sum_is_twice_edges(x in series()) {
            let g = build_hvg(&x, Mode::Binary).unwrap();
            prop_assert_eq!(degrees(&g).iter().sum::<f64>(), 2.0 * g.edge_count() as f64);
        }

        #[test]
        fn unit_weights_match_binary(x in series()) {
            let b = build_hvg(&x, Mode::Binary).unwrap();
            let ones = vec![1.0; b.edge_count()];
            let edges: Vec<_> = b.edges().iter().map(|&(i, j)| (i as usize, j as usize)).collect();
            let w = VisibilityGraph::from_edges(x.len(), &edges, Some(&ones)).unwrap();
            prop_assert_eq!(w.mode(), Mode::Weighted);
            for kind in VertexPropertyKind::ALL {
                // settle order differs between the two searches, so sums may round differently
                for (p, q) in vertex_properties(&b, kind).iter().zip(vertex_properties(&w, kind)) {
                    prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0), "{:?} {} {}", kind, p, q);
                }
            }
        }

        #[test]
        fn adding_an_edge_never_lowers_closeness(x in series(), a in 0usize..40, b in 0usize..40) {
            let g = build_hvg(&x, Mode::Binary).unwrap();
            let n = x.len();
            let (a, b) = (a % n, b % n);
            prop_assume!(a != b && g.weight(a, b) == 0.0);
            let mut edges: Vec<_> = g.edges().iter().map(|&(i, j)| (i as usize, j as usize)).collect();
            edges.push((a, b));
            let h = VisibilityGraph::from_edges(n, &edges, None).unwrap();
            let before = centralities(&g).closeness;
            let after = centralities(&h).closeness;
            for v in 0..n {
                prop_assert!(after[v] >= before[v]);
            }
        }
    }

    #[test]
    fn complete_graph_has_no_brokers() {
        assert!(centralities(&complete(7)).betweenness.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in VertexPropertyKind::ALL {
            assert_eq!(VertexPropertyKind::from_tag(k.tag()), Some(k));
        }
        assert_eq!(VertexPropertyKind::from_tag("cc"), Some(VertexPropertyKind::Closeness));
    }
}
