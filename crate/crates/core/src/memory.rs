//! Unsupervised memory measures: how well some neuron, at some lag, agrees
//! with the past input, either on the raw series, on visibility-graph degree
//! sequences, or on shared visibility edges.
//!
//! All sequences here are in post-washout coordinates: index `k` of the input
//! slice is aligned with vertex `k` of every layer.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::esn::StateTrajectory;
use crate::hvg::{Mode, VisibilityGraph};
use crate::multiplex::Multiplex;

/// Bins per axis for the mutual-information kernel.
pub const MI_BINS: usize = 16;

/// Similarity between two equal-length sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Pearson,
    Spearman,
    MutualInfo,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Pearson, Kernel::Spearman, Kernel::MutualInfo];

    pub fn tag(self) -> &'static str {
        match self {
            Kernel::Pearson => "pc",
            Kernel::Spearman => "sc",
            Kernel::MutualInfo => "mi",
        }
    }
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let za = standardize(a).ok_or(Error::UndefinedCorrelation)?;
    let zb = standardize(b).ok_or(Error::UndefinedCorrelation)?;
    Ok(dot(&za, &zb))
}

/// Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    pearson(&ranks(a), &ranks(b))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn ranks(a: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut out = vec![0.0; a.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && a[idx[end]] == a[idx[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = rank;
        }
        start = end;
    }
    out
}

/// Mutual information in bits from a `bins` x `bins` equal-width histogram,
/// each axis spanning the range of its own sequence.
pub fn mutual_info(a: &[f64], b: &[f64], bins: usize) -> Result<f64> {
    check_pair(a, b)?;
    if bins < 2 {
        return Err(invalid("mutual information needs at least two bins"));
    }
    let mut joint = Vec::new();
    Ok(binned_mi(&bin_symbols(a, bins), &bin_symbols(b, bins), bins, &mut joint))
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid("sequences differ in length"));
    }
    if a.len() < 2 {
        return Err(invalid("need at least two samples"));
    }
    Ok(())
}

/// Centered and scaled to unit norm; `None` for a constant sequence.
fn standardize(a: &[f64]) -> Option<Vec<f64>> {
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let mut z: Vec<f64> = a.iter().map(|v| v - mean).collect();
    let norm = libm::sqrt(z.iter().map(|v| v * v).sum::<f64>());
    if !(norm > 0.0) || !norm.is_finite() || z.iter().all(|&v| v == 0.0) {
        return None;
    }
    z.iter_mut().for_each(|v| *v /= norm);
    Some(z)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0)
}

fn bin_symbols(a: &[f64], bins: usize) -> Vec<u16> {
    let (lo, hi) = a
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return vec![0; a.len()];
    }
    let scale = bins as f64 / (hi - lo);
    a.iter().map(|&v| (((v - lo) * scale) as usize).min(bins - 1) as u16).collect()
}

fn binned_mi(a: &[u16], b: &[u16], bins: usize, joint: &mut Vec<u32>) -> f64 {
    joint.clear();
    joint.resize(bins * bins, 0);
    let mut pa = vec![0u32; bins];
    let mut pb = vec![0u32; bins];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize * bins + y as usize] += 1;
        pa[x as usize] += 1;
        pb[y as usize] += 1;
    }
    let n = a.len() as f64;
    let mut mi = 0.0;
    for x in 0..bins {
        for y in 0..bins {
            let c = joint[x * bins + y];
            if c > 0 {
                let ratio = f64::from(c) * n / (f64::from(pa[x]) * f64::from(pb[y]));
                mi += f64::from(c) / n * libm::log2(ratio);
            }
        }
    }
    mi.max(0.0)
}

/// Lags `newest..=oldest` into the past; `oldest > newest >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DelayWindow {
    oldest: usize,
    newest: usize,
}

impl DelayWindow {
    pub fn new(oldest: usize, newest: usize) -> Result<Self> {
        if newest < 1 || oldest <= newest {
            return Err(invalid("delay window needs oldest > newest >= 1"));
        }
        Ok(Self { oldest, newest })
    }

    pub fn oldest(&self) -> usize {
        self.oldest
    }

    pub fn newest(&self) -> usize {
        self.newest
    }

    pub fn lags(&self) -> core::ops::RangeInclusive<usize> {
        self.newest..=self.oldest
    }

    /// `"oldest:newest"`, e.g. `20:15`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| invalid("window must look like oldest:newest"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|_| invalid("window bounds must be integers"));
        Self::new(parse(a)?, parse(b)?)
    }
}

impl core::fmt::Display for DelayWindow {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}", self.oldest, self.newest)
    }
}

/// Maximum agreement and where it was attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementResult {
    pub value: f64,
    /// `(layer, lag)` of the maximum, 0-based layer; `None` when no pair
    /// produced a defined value above the constant-sequence floor of 0.
    pub best: Option<(usize, usize)>,
}

/// A sequence preprocessed for repeated kernel evaluations.
enum Prepared {
    Unit(Option<Vec<f64>>),
    Symbols(Vec<u16>),
}

fn prepare(kernel: Kernel, a: &[f64]) -> Prepared {
    match kernel {
        Kernel::Pearson => Prepared::Unit(standardize(a)),
        Kernel::Spearman => Prepared::Unit(standardize(&ranks(a))),
        Kernel::MutualInfo => Prepared::Symbols(bin_symbols(a, MI_BINS)),
    }
}

fn agree(a: &Prepared, b: &Prepared, joint: &mut Vec<u32>) -> Option<f64> {
    match (a, b) {
        (Prepared::Unit(Some(a)), Prepared::Unit(Some(b))) => Some(dot(a, b)),
        (Prepared::Symbols(a), Prepared::Symbols(b)) => Some(binned_mi(a, b, MI_BINS, joint)),
        _ => None,
    }
}

/// Tracks the running maximum; undefined kernel values count as 0 and ties
/// keep the first (smallest) `(layer, lag)`.
struct Best {
    value: f64,
    at: Option<(usize, usize)>,
    undefined_seen: bool,
    any: bool,
}

impl Best {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, at: None, undefined_seen: false, any: false }
    }

    fn offer(&mut self, value: Option<f64>, layer: usize, lag: usize) {
        self.any = true;
        match value {
            Some(v) if v > self.value => {
                self.value = v;
                self.at = Some((layer, lag));
            }
            Some(_) => {}
            None => self.undefined_seen = true,
        }
    }

    fn finish(self) -> AgreementResult {
        if !self.any {
            return AgreementResult { value: 0.0, best: None };
        }
        if self.undefined_seen && !(self.value > 0.0) {
            return AgreementResult { value: 0.0, best: None };
        }
        AgreementResult { value: self.value, best: self.at }
    }
}

/// Precomputed input-side structures shared by all windows and kernels.
pub struct MemoryProbe<'a> {
    input: &'a [f64],
    input_graph: VisibilityGraph,
    input_degrees: Vec<f64>,
}

impl<'a> MemoryProbe<'a> {
    /// `input` is aligned with the post-washout states.
    pub fn new(input: &'a [f64]) -> Result<Self> {
        let input_graph = VisibilityGraph::build(input, Mode::Binary)?;
        let input_degrees = degrees(&input_graph);
        Ok(Self { input, input_graph, input_degrees })
    }

    fn check_window(&self, window: DelayWindow, margin: usize) -> Result<()> {
        if margin * window.oldest() + 2 > self.input.len() {
            return Err(invalid("delay window too long for the series"));
        }
        Ok(())
    }

    /// Lagged input against raw activations over steps `oldest..n`.
    pub fn delta_ts(&self, traj: &StateTrajectory, window: DelayWindow, kernel: Kernel) -> Result<AgreementResult> {
        let n = self.input.len();
        if traj.len() != n {
            return Err(invalid("input and trajectory are not aligned"));
        }
        self.check_window(window, 1)?;
        let start = window.oldest();
        let layers: Vec<&[f64]> = (0..traj.neurons()).map(|l| &traj.neuron(l)[start..]).collect();
        Ok(max_agreement(&layers, window, kernel, |lag| &self.input[start - lag..n - lag]))
    }

    /// Lagged input degree sequence against layer degree sequences, over
    /// vertices `2 * oldest..n - oldest` to keep clear of boundary effects.
    pub fn delta_dg(&self, m: &Multiplex, window: DelayWindow, kernel: Kernel) -> Result<AgreementResult> {
        let (lo, hi) = self.interior(m, window)?;
        let layer_degrees: Vec<Vec<f64>> = m.layers().iter().map(degrees).collect();
        let layers: Vec<&[f64]> = layer_degrees.iter().map(|d| &d[lo..hi]).collect();
        Ok(max_agreement(&layers, window, kernel, |lag| &self.input_degrees[lo - lag..hi - lag]))
    }

    /// Largest number of edges shared by the lagged input graph and a layer,
    /// both restricted to vertices `2 * oldest..n - oldest`.
    pub fn delta_and(&self, m: &Multiplex, window: DelayWindow) -> Result<AgreementResult> {
        Ok(self.and_counts(m, window)?.0)
    }

    /// As [`delta_and`](Self::delta_and), divided by the number of restricted
    /// input edges at the winning lag.
    pub fn delta_and_normalized(&self, m: &Multiplex, window: DelayWindow) -> Result<AgreementResult> {
        let (best, totals) = self.and_counts(m, window)?;
        Ok(match best.best {
            Some((_, lag)) => {
                let total = totals[lag - window.newest()];
                AgreementResult { value: best.value / total as f64, best: best.best }
            }
            None => best,
        })
    }

    fn and_counts(&self, m: &Multiplex, window: DelayWindow) -> Result<(AgreementResult, Vec<usize>)> {
        if m.mode() != Mode::Binary {
            return Err(invalid("edge agreement is defined on binary layers"));
        }
        let (lo, hi) = self.interior(m, window)?;
        let (lo32, hi32) = (lo as u32, hi as u32);
        let mut best = Best::new();
        let mut totals = Vec::new();
        let shifted: Vec<Vec<(u32, u32)>> = window
            .lags()
            .map(|lag| {
                let lag = lag as u32;
                self.input_graph
                    .edges()
                    .iter()
                    .map(|&(i, j)| (i + lag, j + lag))
                    .filter(|&(i, j)| i >= lo32 && j < hi32)
                    .collect()
            })
            .collect();
        totals.extend(shifted.iter().map(Vec::len));
        for (l, g) in m.layers().iter().enumerate() {
            for (lag, edges) in window.lags().zip(&shifted) {
                let shared = edges.iter().filter(|&&(i, j)| g.neighbors(i as usize).binary_search(&j).is_ok()).count();
                best.offer(Some(shared as f64), l, lag);
            }
        }
        Ok((best.finish(), totals))
    }

    fn interior(&self, m: &Multiplex, window: DelayWindow) -> Result<(usize, usize)> {
        let n = self.input.len();
        if m.vertex_count() != n {
            return Err(invalid("input and multiplex are not aligned"));
        }
        self.check_window(window, 3)?;
        Ok((2 * window.oldest(), n - window.oldest()))
    }
}

fn degrees(g: &VisibilityGraph) -> Vec<f64> {
    (0..g.vertex_count()).map(|v| g.neighbor_count(v) as f64).collect()
}

fn max_agreement<'s>(
    layers: &[&[f64]],
    window: DelayWindow,
    kernel: Kernel,
    lagged: impl Fn(usize) -> &'s [f64],
) -> AgreementResult {
    let inputs: Vec<Prepared> = window.lags().map(|lag| prepare(kernel, lagged(lag))).collect();
    let mut joint = Vec::new();
    let mut best = Best::new();
    for (l, layer) in layers.iter().enumerate() {
        let prepared = prepare(kernel, layer);
        for (lag, input) in window.lags().zip(&inputs) {
            best.offer(agree(input, &prepared, &mut joint), l, lag);
        }
    }
    best.finish()
}

/// Agreement between lagged input and raw activations.
pub fn delta_ts(x: &[f64], traj: &StateTrajectory, window: DelayWindow, kernel: Kernel) -> Result<AgreementResult> {
    MemoryProbe::new(x)?.delta_ts(traj, window, kernel)
}

/// Agreement between lagged input degrees and layer degrees.
pub fn delta_dg(x: &[f64], m: &Multiplex, window: DelayWindow, kernel: Kernel) -> Result<AgreementResult> {
    if m.mode() != Mode::Binary {
        return Err(invalid("degree agreement is defined on binary layers"));
    }
    MemoryProbe::new(x)?.delta_dg(m, window, kernel)
}

/// Largest shared edge count between the lagged input graph and any layer.
pub fn delta_and(x: &[f64], m: &Multiplex, window: DelayWindow) -> Result<AgreementResult> {
    MemoryProbe::new(x)?.delta_and(m, window)
}
