//! Multiplex of visibility graphs, one layer per neuron, and the measures
//! defined on it: per-time property entropy, heterogeneity, average edge
//! overlap and inter-layer mutual information.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::esn::StateTrajectory;
use crate::graph_metrics::{self, VertexPropertyKind};
use crate::hvg::{Mode, VisibilityGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct Multiplex {
    layers: Vec<VisibilityGraph>,
    mode: Mode,
}

impl Multiplex {
    /// One layer per neuron, built on the post-washout activations.
    pub fn build(traj: &StateTrajectory, mode: Mode) -> Result<Self> {
        if traj.neurons() < 2 {
            return Err(invalid("multiplex needs at least two neurons"));
        }
        let layers = (0..traj.neurons())
            .map(|l| VisibilityGraph::build(traj.neuron(l), mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers, mode })
    }

    /// Layers must agree on vertex count and mode.
    pub fn from_layers(layers: Vec<VisibilityGraph>) -> Result<Self> {
        let first = layers.first().ok_or_else(|| invalid("multiplex needs at least one layer"))?;
        let (n, mode) = (first.vertex_count(), first.mode());
        if layers.iter().any(|g| g.vertex_count() != n || g.mode() != mode) {
            return Err(invalid("layers differ in vertex count or mode"));
        }
        Ok(Self { layers, mode })
    }

    pub fn layers(&self) -> &[VisibilityGraph] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &VisibilityGraph {
        &self.layers[l]
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.layers[0].vertex_count()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn binarized(&self) -> Self {
        Self { layers: self.layers.iter().map(VisibilityGraph::binarized).collect(), mode: Mode::Binary }
    }
}

/// One vertex property evaluated on every layer, stored layer-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyTable {
    kind: VertexPropertyKind,
    layers: usize,
    n: usize,
    values: Vec<f64>,
}

impl PropertyTable {
    pub fn kind(&self) -> VertexPropertyKind {
        self.kind
    }

    pub fn layer(&self, l: usize) -> &[f64] {
        &self.values[l * self.n..(l + 1) * self.n]
    }

    /// Property of vertex `t` across all layers.
    pub fn at(&self, t: usize) -> InstantaneousProperty {
        InstantaneousProperty {
            t,
            kind: self.kind,
            values: (0..self.layers).map(|l| self.values[l * self.n + t]).collect(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }
}

/// Property values of the vertices at one time index, one per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantaneousProperty {
    pub t: usize,
    pub kind: VertexPropertyKind,
    pub values: Vec<f64>,
}

/// Property tables for several kinds, sharing one shortest-path pass per
/// layer when both centralities are requested.
pub fn property_tables(m: &Multiplex, kinds: &[VertexPropertyKind]) -> Vec<PropertyTable> {
    let n = m.vertex_count();
    let mut tables: Vec<PropertyTable> = kinds
        .iter()
        .map(|&kind| PropertyTable {
            kind,
            layers: m.layer_count(),
            n,
            values: Vec::with_capacity(n * m.layer_count()),
        })
        .collect();
    for g in m.layers() {
        for (table, values) in tables.iter_mut().zip(graph_metrics::vertex_properties_many(g, kinds)) {
            table.values.extend_from_slice(&values);
        }
    }
    tables
}

/// Shannon entropy in bits of a `bins`-bin equal-width histogram spanning
/// `[min, max]` of `values`; zero when all values coincide.
pub fn entropy_bits(values: &[f64], bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    entropy_with(values, &mut counts)
}

fn entropy_with(values: &[f64], counts: &mut [usize]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() || !(hi > lo) {
        return 0.0;
    }
    let bins = counts.len();
    counts.fill(0);
    let scale = bins as f64 / (hi - lo);
    for &v in values {
        let k = ((v - lo) * scale) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let total = values.len() as f64;
    let mut h = 0.0;
    for &c in counts.iter() {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * libm::log2(p);
        }
    }
    h
}

fn check_bins(bins: usize) -> Result<()> {
    if bins < 2 {
        return Err(invalid("histogram needs at least two bins"));
    }
    Ok(())
}

/// Entropy of the property distribution across layers at vertex `t`
/// (0-based).
pub fn instantaneous_entropy(m: &Multiplex, t: usize, kind: VertexPropertyKind, bins: usize) -> Result<f64> {
    check_bins(bins)?;
    if t >= m.vertex_count() {
        return Err(invalid("time index out of range"));
    }
    let table = &property_tables(m, &[kind])[0];
    Ok(entropy_bits(&table.at(t).values, bins))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityResult {
    pub kind: VertexPropertyKind,
    pub bins: usize,
    /// Mean of `per_t`.
    pub mean: f64,
    pub per_t: Vec<f64>,
}

/// Average over time of the per-time property entropy.
pub fn heterogeneity(m: &Multiplex, kind: VertexPropertyKind, bins: usize) -> Result<HeterogeneityResult> {
    Ok(heterogeneity_many(m, &[kind], bins)?.remove(0))
}

pub fn heterogeneity_many(
    m: &Multiplex,
    kinds: &[VertexPropertyKind],
    bins: usize,
) -> Result<Vec<HeterogeneityResult>> {
    check_bins(bins)?;
    Ok(property_tables(m, kinds).iter().map(|t| heterogeneity_of(t, bins)).collect())
}

pub fn heterogeneity_of(table: &PropertyTable, bins: usize) -> HeterogeneityResult {
    let mut counts = vec![0usize; bins.max(1)];
    let mut column = vec![0.0; table.layers];
    let per_t: Vec<f64> = (0..table.n)
        .map(|t| {
            for (l, c) in column.iter_mut().enumerate() {
                *c = table.values[l * table.n + t];
            }
            entropy_with(&column, &mut counts)
        })
        .collect();
    let mean = per_t.iter().sum::<f64>() / per_t.len() as f64;
    HeterogeneityResult { kind: table.kind, bins, mean, per_t }
}

/// Average edge overlap: the mean number of layers carrying each edge of
/// the union graph, divided by the layer count. Weights are ignored.
pub fn aeo(m: &Multiplex) -> Result<f64> {
    let mut keys: Vec<u64> = m
        .layers()
        .iter()
        .flat_map(|g| g.edges().iter().map(|&(i, j)| (u64::from(i) << 32) | u64::from(j)))
        .collect();
    let total = keys.len();
    keys.sort_unstable();
    keys.dedup();
    if keys.is_empty() {
        return Err(invalid("edge overlap undefined on a multiplex without edges"));
    }
    Ok(total as f64 / (m.layer_count() as f64 * keys.len() as f64))
}

/// Degree sequence of a layer recoded to dense symbols `0..alphabet`.
struct DegreeCode {
    symbols: Vec<u32>,
    alphabet: usize,
}

impl DegreeCode {
    fn of(g: &VisibilityGraph) -> Self {
        let degrees: Vec<usize> = (0..g.vertex_count()).map(|v| g.neighbor_count(v)).collect();
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut code = vec![u32::MAX; max + 1];
        let mut alphabet = 0u32;
        // symbols assigned in degree order so the coding is canonical
        let mut present = vec![false; max + 1];
        for &d in &degrees {
            present[d] = true;
        }
        for (d, &p) in present.iter().enumerate() {
            if p {
                code[d] = alphabet;
                alphabet += 1;
            }
        }
        Self { symbols: degrees.iter().map(|&d| code[d]).collect(), alphabet: alphabet as usize }
    }
}

fn mutual_information(a: &DegreeCode, b: &DegreeCode, joint: &mut Vec<usize>) -> f64 {
    let n = a.symbols.len() as f64;
    joint.clear();
    joint.resize(a.alphabet * b.alphabet, 0);
    let mut pa = vec![0usize; a.alphabet];
    let mut pb = vec![0usize; b.alphabet];
    for (&x, &y) in a.symbols.iter().zip(&b.symbols) {
        joint[x as usize * b.alphabet + y as usize] += 1;
        pa[x as usize] += 1;
        pb[y as usize] += 1;
    }
    let mut mi = 0.0;
    for x in 0..a.alphabet {
        for y in 0..b.alphabet {
            let c = joint[x * b.alphabet + y];
            if c > 0 {
                let ratio = c as f64 * n / (pa[x] as f64 * pb[y] as f64);
                mi += c as f64 / n * libm::log2(ratio);
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information in bits between the degree sequences of two layers,
/// from exact counts of degree pairs. Weights are ignored.
pub fn imi_pair(m: &Multiplex, a: usize, b: usize) -> Result<f64> {
    if a >= m.layer_count() || b >= m.layer_count() {
        return Err(invalid("layer index out of range"));
    }
    // fixed argument order keeps the result bit-symmetric
    let (a, b) = (a.min(b), a.max(b));
    let mut joint = Vec::new();
    Ok(mutual_information(&DegreeCode::of(m.layer(a)), &DegreeCode::of(m.layer(b)), &mut joint))
}

/// Mean of [`imi_pair`] over all unordered layer pairs.
pub fn avg_imi(m: &Multiplex) -> Result<f64> {
    let count = m.layer_count();
    if count < 2 {
        return Err(invalid("inter-layer information needs at least two layers"));
    }
    let codes: Vec<DegreeCode> = m.layers().iter().map(DegreeCode::of).collect();
    let mut joint = Vec::new();
    let mut sum = 0.0;
    for a in 0..count {
        for b in a + 1..count {
            sum += mutual_information(&codes[a], &codes[b], &mut joint);
        }
    }
    Ok(sum / (count * (count - 1) / 2) as f64)
}
