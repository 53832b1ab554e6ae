//! Hyperparameter sweeps: work-item enumeration, per-item evaluation,
//! aggregation into trial-mean manifolds and correlation reports.
//!
//! Execution order is left to the caller. Every work item draws its
//! randomness from a seed derived from its grid coordinates, and aggregation
//! sorts by those coordinates, so results do not depend on scheduling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::esn::{self, Reservoir, ReservoirParams, Split, StateTrajectory};
use crate::graph_metrics::VertexPropertyKind;
use crate::hvg::Mode;
use crate::memory::{DelayWindow, Kernel, MemoryProbe};
use crate::multiplex::{self, Multiplex};
use crate::seed::{self, stream};
use crate::signals::{Signal, Task, TaskData, TaskSpec};
use crate::stats::{self, Correlation};

pub const DEFAULT_LENGTH: usize = 2600;
pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_SIZE: usize = 100;
pub const DEFAULT_SPARSITY: f64 = 0.25;

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect(),
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|v| !v.is_finite()) {
        return Err(invalid(format!("{name} grid must be finite and strictly increasing")));
    }
    Ok(())
}

/// Quantities recorded per accuracy-sweep run besides the accuracy itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Heterogeneity(VertexPropertyKind, Mode),
    EdgeOverlap,
    LayerInformation,
    Lambda,
}

impl Measure {
    /// Every measure, in report order.
    pub fn all() -> Vec<Measure> {
        let mut out = Vec::new();
        for mode in [Mode::Binary, Mode::Weighted] {
            for kind in VertexPropertyKind::ALL {
                out.push(Measure::Heterogeneity(kind, mode));
            }
        }
        out.extend([Measure::EdgeOverlap, Measure::LayerInformation, Measure::Lambda]);
        out
    }

    /// Measure name and mode tag as reported, e.g. `("H_CL", "b")`.
    pub fn label(&self) -> (String, &'static str) {
        match self {
            Measure::Heterogeneity(kind, mode) => (format!("H_{}", kind.tag()), mode_tag(*mode)),
            Measure::EdgeOverlap => ("AEO".into(), "b"),
            Measure::LayerInformation => ("IMI".into(), "b"),
            Measure::Lambda => ("lambda".into(), ""),
        }
    }

    /// Column name, e.g. `H_CL_b`.
    pub fn column(&self) -> String {
        match self {
            Measure::Heterogeneity(..) => {
                let (name, mode) = self.label();
                format!("{name}_{mode}")
            }
            _ => self.label().0,
        }
    }

    pub fn parse(s: &str) -> Result<Measure> {
        Measure::all()
            .into_iter()
            .find(|m| m.column().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown measure '{s}'")))
    }
}

fn mode_tag(mode: Mode) -> &'static str {
    match mode {
        Mode::Binary => "b",
        Mode::Weighted => "w",
    }
}

/// Grid sweep over spectral radius and input scaling on one task.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyConfig {
    pub task: TaskSpec,
    pub rhos: Vec<f64>,
    pub omegas: Vec<f64>,
    pub trials: usize,
    pub size: usize,
    pub sparsity: f64,
    pub reg: f64,
    pub washout: usize,
    pub length: usize,
    pub bins: usize,
    pub measures: Vec<Measure>,
    pub base_seed: u64,
}

/// Coordinates of one accuracy run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridItem {
    pub k: usize,
    pub j: usize,
    pub trial: usize,
}

impl GridItem {
    pub fn seed(&self, base: u64) -> u64 {
        seed::derive(base, &[self.k as u64, self.j as u64, self.trial as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyValues {
    pub nrmse: f64,
    pub gamma: f64,
    /// Parallel to the configured measures.
    pub measures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRun {
    pub item: GridItem,
    pub rho: f64,
    pub omega: f64,
    pub outcome: core::result::Result<AccuracyValues, Error>,
}

impl AccuracyConfig {
    /// 9 x 5 grid over `[0.5, 1.3] x [0.2, 0.9]`, 5 trials, all measures.
    pub fn desk(task: Task, base_seed: u64) -> Self {
        Self::grid(task, base_seed, 9, 5, 5)
    }

    /// 20 x 10 grid, 15 trials.
    pub fn full_scale(task: Task, base_seed: u64) -> Self {
        Self::grid(task, base_seed, 20, 10, 15)
    }

    fn grid(task: Task, base_seed: u64, rho_steps: usize, omega_steps: usize, trials: usize) -> Self {
        Self {
            task: TaskSpec::new(task, seed::derive(base_seed, &[stream::SIGNAL])),
            rhos: linspace(0.5, 1.3, rho_steps),
            omegas: linspace(0.2, 0.9, omega_steps),
            trials,
            size: DEFAULT_SIZE,
            sparsity: DEFAULT_SPARSITY,
            reg: esn::DEFAULT_REG,
            washout: esn::DEFAULT_WASHOUT,
            length: DEFAULT_LENGTH,
            bins: DEFAULT_BINS,
            measures: Measure::all(),
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid("spectral radius", &self.rhos)?;
        check_grid("input scaling", &self.omegas)?;
        if self.trials == 0 {
            return Err(invalid("need at least one trial"));
        }
        if matches!(self.task.task, Task::Noise { .. }) {
            return Err(invalid("the accuracy sweep needs a task with a target"));
        }
        if self.bins < 2 {
            return Err(invalid("need at least two histogram bins"));
        }
        if self.washout + 2 >= self.length {
            return Err(invalid("series too short for the washout"));
        }
        Ok(())
    }

    pub fn items(&self) -> Vec<GridItem> {
        let mut out = Vec::with_capacity(self.rhos.len() * self.omegas.len() * self.trials);
        for k in 0..self.rhos.len() {
            for j in 0..self.omegas.len() {
                for trial in 0..self.trials {
                    out.push(GridItem { k, j, trial });
                }
            }
        }
        out
    }

    /// Input and target, shared by every run of the sweep.
    pub fn task_data(&self) -> Result<TaskData> {
        self.task.generate(self.length)
    }

    pub fn run_item(&self, data: &TaskData, item: GridItem) -> AccuracyRun {
        let (rho, omega) = (self.rhos[item.k], self.omegas[item.j]);
        AccuracyRun { item, rho, omega, outcome: self.evaluate(data, item, rho, omega) }
    }

    fn evaluate(&self, data: &TaskData, item: GridItem, rho: f64, omega: f64) -> Result<AccuracyValues> {
        let target = data.target.as_ref().ok_or_else(|| invalid("task has no target"))?;
        let params = ReservoirParams {
            size: self.size,
            spectral_radius: rho,
            input_scaling: omega,
            sparsity: self.sparsity,
            seed: item.seed(self.base_seed),
        };
        let reservoir = Reservoir::random(&params)?;
        let traj = reservoir.run(&data.input, self.washout)?;
        let split = Split::default_for(&traj)?;
        let readout = esn::train_readout(&traj, &data.input, target, split.train.clone(), self.reg)?;
        let score = esn::evaluate(&readout, &traj, &data.input, target, split.test)?;
        let measures = self.measure(&traj, &reservoir)?;
        Ok(AccuracyValues { nrmse: score.nrmse, gamma: score.gamma, measures })
    }

    fn measure(&self, traj: &StateTrajectory, reservoir: &Reservoir) -> Result<Vec<f64>> {
        let kinds_for = |mode: Mode| -> Vec<VertexPropertyKind> {
            self.measures
                .iter()
                .filter_map(|m| match m {
                    Measure::Heterogeneity(kind, md) if *md == mode => Some(*kind),
                    _ => None,
                })
                .collect()
        };
        let wants_overlap = self
            .measures
            .iter()
            .any(|m| matches!(m, Measure::EdgeOverlap | Measure::LayerInformation));
        let binary_kinds = kinds_for(Mode::Binary);
        let weighted_kinds = kinds_for(Mode::Weighted);

        let binary = if !binary_kinds.is_empty() || wants_overlap {
            Some(Multiplex::build(traj, Mode::Binary)?)
        } else {
            None
        };
        let weighted = if weighted_kinds.is_empty() { None } else { Some(Multiplex::build(traj, Mode::Weighted)?) };
        let heterogeneity = |m: &Option<Multiplex>, kinds: &[VertexPropertyKind]| -> Result<Vec<f64>> {
            match m {
                Some(m) if !kinds.is_empty() => {
                    Ok(multiplex::heterogeneity_many(m, kinds, self.bins)?.iter().map(|h| h.mean).collect())
                }
                _ => Ok(Vec::new()),
            }
        };
        let h_binary = heterogeneity(&binary, &binary_kinds)?;
        let h_weighted = heterogeneity(&weighted, &weighted_kinds)?;

        self.measures
            .iter()
            .map(|m| match m {
                Measure::Heterogeneity(kind, mode) => {
                    let (kinds, values) = match mode {
                        Mode::Binary => (&binary_kinds, &h_binary),
                        Mode::Weighted => (&weighted_kinds, &h_weighted),
                    };
                    let pos = kinds.iter().position(|k| k == kind).unwrap();
                    Ok(values[pos])
                }
                Measure::EdgeOverlap => multiplex::aeo(binary.as_ref().unwrap()),
                Measure::LayerInformation => multiplex::avg_imi(binary.as_ref().unwrap()),
                Measure::Lambda => esn::jacobian_lambda(traj, reservoir.recurrent()),
            })
            .collect()
    }
}

/// Grid of per-cell values, row-major over `(rho index, omega index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    pub name: String,
    pub mode: String,
    pub values: Vec<f64>,
}

/// Trial means of the accuracy and every measure over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldResult {
    pub rhos: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Successful trials per cell.
    pub counts: Vec<usize>,
    pub gamma: Manifold,
    pub nrmse: Manifold,
    pub measures: Vec<Manifold>,
}

impl ManifoldResult {
    pub fn cell(&self, k: usize, j: usize) -> usize {
        k * self.omegas.len() + j
    }

    pub fn measure(&self, name: &str, mode: &str) -> Option<&Manifold> {
        self.measures.iter().find(|m| m.name == name && m.mode == mode)
    }
}

/// Sorts runs by grid coordinates and averages successful trials per cell.
/// A cell where every trial failed is an error.
pub fn aggregate_accuracy(cfg: &AccuracyConfig, runs: &[AccuracyRun]) -> Result<ManifoldResult> {
    let cells = cfg.rhos.len() * cfg.omegas.len();
    let mut sorted: Vec<&AccuracyRun> = runs.iter().collect();
    sorted.sort_by_key(|r| r.item);
    let width = cfg.measures.len();
    let mut counts = vec![0usize; cells];
    let mut gamma = vec![0.0; cells];
    let mut nrmse = vec![0.0; cells];
    let mut sums = vec![vec![0.0; cells]; width];
    for run in sorted {
        let c = run.item.k * cfg.omegas.len() + run.item.j;
        if let Ok(v) = &run.outcome {
            counts[c] += 1;
            gamma[c] += v.gamma;
            nrmse[c] += v.nrmse;
            for (s, x) in sums.iter_mut().zip(&v.measures) {
                s[c] += x;
            }
        }
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::CellFailed { k: c / cfg.omegas.len(), j: c % cfg.omegas.len() });
    }
    let mean = |mut v: Vec<f64>| {
        for (x, &n) in v.iter_mut().zip(&counts) {
            *x /= n as f64;
        }
        v
    };
    let manifold = |name: String, mode: &str, values: Vec<f64>| Manifold { name, mode: mode.to_string(), values };
    let measures = cfg
        .measures
        .iter()
        .zip(sums)
        .map(|(m, s)| {
            let (name, mode) = m.label();
            manifold(name, mode, mean(s))
        })
        .collect();
    Ok(ManifoldResult {
        rhos: cfg.rhos.clone(),
        omegas: cfg.omegas.clone(),
        gamma: manifold("gamma".into(), "", mean(gamma)),
        nrmse: manifold("nrmse".into(), "", mean(nrmse)),
        counts,
        measures,
    })
}

/// Pearson correlation between two equally shaped grids, flattened.
pub fn manifold_correlation(a: &[f64], b: &[f64]) -> Result<Correlation> {
    if a.len() != b.len() {
        return Err(invalid("manifolds differ in shape"));
    }
    stats::correlation_test(a, b)
}

/// One line of a correlation report; `result` is `None` when undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub measure: String,
    pub mode: String,
    pub result: Option<Correlation>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationReport {
    pub fn get(&self, measure: &str, mode: &str) -> Option<&CorrelationRow> {
        self.rows.iter().find(|r| r.measure == measure && r.mode == mode)
    }

    /// Correlation coefficient, if defined.
    pub fn r(&self, measure: &str, mode: &str) -> Option<f64> {
        self.get(measure, mode).and_then(|row| row.result.map(|c| c.r))
    }
}

fn row(measure: &str, mode: &str, a: &[f64], b: &[f64]) -> CorrelationRow {
    CorrelationRow {
        measure: measure.to_string(),
        mode: mode.to_string(),
        result: manifold_correlation(a, b).ok(),
        n: a.len(),
    }
}

/// Every measure manifold against the accuracy manifold.
pub fn correlate_accuracy(result: &ManifoldResult) -> CorrelationReport {
    CorrelationReport {
        rows: result
            .measures
            .iter()
            .map(|m| row(&m.name, &m.mode, &m.values, &result.gamma.values))
            .collect(),
    }
}

/// Runs every item in grid order on the current thread.
pub fn run_accuracy_sweep(cfg: &AccuracyConfig) -> Result<(Vec<AccuracyRun>, ManifoldResult, CorrelationReport)> {
    cfg.validate()?;
    let data = cfg.task_data()?;
    let runs: Vec<AccuracyRun> = cfg.items().into_iter().map(|it| cfg.run_item(&data, it)).collect();
    let result = aggregate_accuracy(cfg, &runs)?;
    let report = correlate_accuracy(&result);
    Ok((runs, result, report))
}

/// Unsupervised memory measure recorded per window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemoryMeasure {
    Series(Kernel),
    Degree(Kernel),
    SharedEdges,
}

impl MemoryMeasure {
    pub fn all() -> Vec<MemoryMeasure> {
        let mut out: Vec<MemoryMeasure> = Kernel::ALL.iter().map(|&k| MemoryMeasure::Series(k)).collect();
        out.extend(Kernel::ALL.iter().map(|&k| MemoryMeasure::Degree(k)));
        out.push(MemoryMeasure::SharedEdges);
        out
    }

    /// e.g. `delta_dg_sc`, `delta_and`.
    pub fn column(&self) -> String {
        match self {
            MemoryMeasure::Series(k) => format!("delta_ts_{}", k.tag()),
            MemoryMeasure::Degree(k) => format!("delta_dg_{}", k.tag()),
            MemoryMeasure::SharedEdges => "delta_and".into(),
        }
    }

    pub fn parse(s: &str) -> Result<MemoryMeasure> {
        MemoryMeasure::all()
            .into_iter()
            .find(|m| m.column().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| invalid(format!("unknown memory measure '{s}'")))
    }
}

/// Which capacity each delta series is correlated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CapacityReference {
    /// Capacity summed over the window's own lags.
    Window,
    /// Capacity summed over the configured lag set.
    Total,
}

impl CapacityReference {
    pub fn name(self) -> &'static str {
        match self {
            CapacityReference::Window => "window",
            CapacityReference::Total => "total",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "window" => Ok(CapacityReference::Window),
            "total" => Ok(CapacityReference::Total),
            _ => Err(invalid(format!("unknown capacity reference '{s}'"))),
        }
    }
}

/// Sweep over spectral radius at fixed input scaling on uniform noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryConfig {
    pub rhos: Vec<f64>,
    pub omega: f64,
    pub trials: usize,
    pub size: usize,
    pub sparsity: f64,
    pub reg: f64,
    pub washout: usize,
    pub length: usize,
    pub windows: Vec<DelayWindow>,
    pub lags: Vec<usize>,
    pub reference: CapacityReference,
    pub measures: Vec<MemoryMeasure>,
    /// Report shared-edge counts divided by the lagged input's edge count.
    pub normalize_edges: bool,
    pub noise_lo: f64,
    pub noise_hi: f64,
    pub base_seed: u64,
}

pub fn default_windows() -> Vec<DelayWindow> {
    [(10, 5), (15, 10), (20, 15), (25, 20)]
        .iter()
        .map(|&(a, b)| DelayWindow::new(a, b).unwrap())
        .collect()
}

/// One memory run's coordinates: `k` indexes the radius grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemoryItem {
    pub k: usize,
    pub trial: usize,
}

impl MemoryItem {
    pub fn seed(&self, base: u64) -> u64 {
        seed::derive(base, &[self.k as u64, self.trial as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryValues {
    /// Over the configured lags.
    pub capacity: f64,
    /// Over each window's lags, in window order.
    pub window_capacity: Vec<f64>,
    /// Window-major: `deltas[w * measures + m]`.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRun {
    pub item: MemoryItem,
    pub rho: f64,
    pub outcome: core::result::Result<MemoryValues, Error>,
}

impl MemoryConfig {
    /// 20 radii in `[0.1, 2]`, input scaling 0.7, 5 trials.
    pub fn desk(base_seed: u64) -> Self {
        Self {
            rhos: linspace(0.1, 2.0, 20),
            omega: 0.7,
            trials: 5,
            size: DEFAULT_SIZE,
            sparsity: DEFAULT_SPARSITY,
            reg: esn::DEFAULT_REG,
            washout: esn::DEFAULT_WASHOUT,
            length: DEFAULT_LENGTH,
            windows: default_windows(),
            lags: (1..=40).collect(),
            reference: CapacityReference::Window,
            measures: MemoryMeasure::all(),
            normalize_edges: false,
            noise_lo: -1.0,
            noise_hi: 1.0,
            base_seed,
        }
    }

    /// 100 radii, 15 trials.
    pub fn full_scale(base_seed: u64) -> Self {
        Self { rhos: linspace(0.1, 2.0, 100), trials: 15, ..Self::desk(base_seed) }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid("spectral radius", &self.rhos)?;
        if self.trials == 0 {
            return Err(invalid("need at least one trial"));
        }
        if self.lags.is_empty() || self.lags.contains(&0) {
            return Err(invalid("memory lags must be positive"));
        }
        if self.washout + 2 >= self.length {
            return Err(invalid("series too short for the washout"));
        }
        Ok(())
    }

    pub fn items(&self) -> Vec<MemoryItem> {
        (0..self.rhos.len())
            .flat_map(|k| (0..self.trials).map(move |trial| MemoryItem { k, trial }))
            .collect()
    }

    /// Noise input shared by every run.
    pub fn input(&self) -> Result<Signal> {
        let spec = TaskSpec::new(
            Task::Noise { lo: self.noise_lo, hi: self.noise_hi },
            seed::derive(self.base_seed, &[stream::SIGNAL]),
        );
        Ok(spec.generate(self.length)?.input)
    }

    /// `(window, measure)` pairs in column order.
    pub fn columns(&self) -> Vec<(DelayWindow, MemoryMeasure)> {
        self.windows
            .iter()
            .flat_map(|&w| self.measures.iter().map(move |&m| (w, m)))
            .collect()
    }

    pub fn run_item(&self, input: &Signal, item: MemoryItem) -> MemoryRun {
        let rho = self.rhos[item.k];
        MemoryRun { item, rho, outcome: self.evaluate(input, item, rho) }
    }

    fn evaluate(&self, input: &Signal, item: MemoryItem, rho: f64) -> Result<MemoryValues> {
        let params = ReservoirParams {
            size: self.size,
            spectral_radius: rho,
            input_scaling: self.omega,
            sparsity: self.sparsity,
            seed: item.seed(self.base_seed),
        };
        let reservoir = Reservoir::random(&params)?;
        let traj = reservoir.run(input, self.washout)?;
        let mut lags: Vec<usize> = self.lags.iter().copied().chain(self.windows.iter().flat_map(|w| w.lags())).collect();
        lags.sort_unstable();
        lags.dedup();
        let per_lag = esn::memory_capacity_of(&traj, input, &lags, self.reg)?.per_lag;
        let sum_over = |keep: &dyn Fn(usize) -> bool| -> f64 {
            per_lag.iter().filter(|(lag, _)| keep(*lag)).map(|(_, term)| term).sum()
        };
        let capacity = sum_over(&|lag| self.lags.contains(&lag));
        let window_capacity =
            self.windows.iter().map(|w| sum_over(&|lag| w.lags().contains(&lag))).collect();
        let x = traj.align(input)?;
        let probe = MemoryProbe::new(x)?;
        let needs_graph = self.measures.iter().any(|m| !matches!(m, MemoryMeasure::Series(_)));
        let layers = if needs_graph { Some(Multiplex::build(&traj, Mode::Binary)?) } else { None };
        let mut deltas = Vec::with_capacity(self.windows.len() * self.measures.len());
        for (window, measure) in self.columns() {
            let r = match measure {
                MemoryMeasure::Series(k) => probe.delta_ts(&traj, window, k)?,
                MemoryMeasure::Degree(k) => probe.delta_dg(layers.as_ref().unwrap(), window, k)?,
                MemoryMeasure::SharedEdges if self.normalize_edges => {
                    probe.delta_and_normalized(layers.as_ref().unwrap(), window)?
                }
                MemoryMeasure::SharedEdges => probe.delta_and(layers.as_ref().unwrap(), window)?,
            };
            deltas.push(r.value);
        }
        Ok(MemoryValues { capacity, window_capacity, deltas })
    }
}

/// Trial means per radius.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryResult {
    pub rhos: Vec<f64>,
    pub counts: Vec<usize>,
    pub capacity: Vec<f64>,
    pub windows: Vec<DelayWindow>,
    /// `window_capacity[w][k]` over window `w`'s lags at radius `k`.
    pub window_capacity: Vec<Vec<f64>>,
    pub reference: CapacityReference,
    pub columns: Vec<(DelayWindow, MemoryMeasure)>,
    /// `deltas[c][k]` for column `c` at radius `k`.
    pub deltas: Vec<Vec<f64>>,
}

impl MemoryResult {
    pub fn series(&self, window: DelayWindow, measure: MemoryMeasure) -> Option<&[f64]> {
        self.columns.iter().position(|&c| c == (window, measure)).map(|i| self.deltas[i].as_slice())
    }

    /// The capacity series a window's deltas are correlated against.
    pub fn reference_for(&self, window: DelayWindow) -> &[f64] {
        match (self.reference, self.windows.iter().position(|&w| w == window)) {
            (CapacityReference::Window, Some(i)) => &self.window_capacity[i],
            _ => &self.capacity,
        }
    }
}

pub fn aggregate_memory(cfg: &MemoryConfig, runs: &[MemoryRun]) -> Result<MemoryResult> {
    let n = cfg.rhos.len();
    let columns = cfg.columns();
    let mut sorted: Vec<&MemoryRun> = runs.iter().collect();
    sorted.sort_by_key(|r| r.item);
    let mut counts = vec![0usize; n];
    let mut capacity = vec![0.0; n];
    let mut window_capacity = vec![vec![0.0; n]; cfg.windows.len()];
    let mut deltas = vec![vec![0.0; n]; columns.len()];
    for run in sorted {
        if let Ok(v) = &run.outcome {
            let k = run.item.k;
            counts[k] += 1;
            capacity[k] += v.capacity;
            for (c, x) in window_capacity.iter_mut().zip(&v.window_capacity) {
                c[k] += x;
            }
            for (d, x) in deltas.iter_mut().zip(&v.deltas) {
                d[k] += x;
            }
        }
    }
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(Error::CellFailed { k, j: 0 });
    }
    for k in 0..n {
        capacity[k] /= counts[k] as f64;
        for d in window_capacity.iter_mut().chain(&mut deltas) {
            d[k] /= counts[k] as f64;
        }
    }
    Ok(MemoryResult {
        rhos: cfg.rhos.clone(),
        counts,
        capacity,
        windows: cfg.windows.clone(),
        window_capacity,
        reference: cfg.reference,
        columns,
        deltas,
    })
}

/// Every delta series against its reference capacity; the mode column holds the window.
pub fn correlate_memory(result: &MemoryResult) -> CorrelationReport {
    CorrelationReport {
        rows: result
            .columns
            .iter()
            .zip(&result.deltas)
            .map(|((w, m), d)| row(&m.column(), &format!("{w}"), d, result.reference_for(*w)))
            .collect(),
    }
}

pub fn run_memory_sweep(cfg: &MemoryConfig) -> Result<(Vec<MemoryRun>, MemoryResult, CorrelationReport)> {
    cfg.validate()?;
    let input = cfg.input()?;
    let runs: Vec<MemoryRun> = cfg.items().into_iter().map(|it| cfg.run_item(&input, it)).collect();
    let result = aggregate_memory(cfg, &runs)?;
    let report = correlate_memory(&result);
    Ok((runs, result, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tiny_accuracy() -> AccuracyConfig {
        AccuracyConfig {
            rhos: vec![0.6, 1.0],
            omegas: vec![0.3, 0.8],
            trials: 2,
            size: 12,
            length: 400,
            washout: 50,
            bins: 8,
            ..AccuracyConfig::desk(Task::Mso, 3)
        }
    }

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.5, 1.3, 9).len(), 9);
        assert_eq!(linspace(0.5, 1.3, 9)[8], 1.3);
        assert_eq!(linspace(0.1, 2.0, 1), [0.1]);
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::all() {
            assert_eq!(Measure::parse(&m.column()).unwrap(), m);
        }
        assert_eq!(Measure::parse("h_cl_b").unwrap().column(), "H_CL_b");
        for m in MemoryMeasure::all() {
            assert_eq!(MemoryMeasure::parse(&m.column()).unwrap(), m);
        }
        assert!(Measure::parse("H_XX_b").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = tiny_accuracy();
        assert!(cfg.validate().is_ok());
        cfg.rhos = vec![1.0, 0.5];
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_accuracy();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_accuracy();
        cfg.task = TaskSpec::new(Task::noise(), 1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn item_order_does_not_matter() {
        let cfg = tiny_accuracy();
        let data = cfg.task_data().unwrap();
        let forward: Vec<_> = cfg.items().into_iter().map(|it| cfg.run_item(&data, it)).collect();
        let backward: Vec<_> = cfg.items().into_iter().rev().map(|it| cfg.run_item(&data, it)).collect();
        let a = aggregate_accuracy(&cfg, &forward).unwrap();
        let b = aggregate_accuracy(&cfg, &backward).unwrap();
        assert_eq!(a, b);
        let mut rev = backward.clone();
        rev.reverse();
        assert_eq!(forward, rev);
    }

    #[test]
    fn means_match_successful_runs() {
        let cfg = tiny_accuracy();
        let (runs, result, report) = run_accuracy_sweep(&cfg).unwrap();
        assert_eq!(runs.len(), 8);
        assert!(result.counts.iter().all(|&c| c == 2));
        for k in 0..2 {
            for j in 0..2 {
                let cell: Vec<&AccuracyValues> = runs
                    .iter()
                    .filter(|r| r.item.k == k && r.item.j == j)
                    .map(|r| r.outcome.as_ref().unwrap())
                    .collect();
                let g = (cell[0].gamma + cell[1].gamma) / 2.0;
                assert_eq!(result.gamma.values[result.cell(k, j)], g);
            }
        }
        assert_eq!(report.rows.len(), Measure::all().len());
        assert!(report.rows.iter().all(|r| r.n == 4));
        let lambda = result.measure("lambda", "").unwrap();
        assert!(lambda.values.iter().all(|&v| v.is_finite() && v > 0.0));
    }

    #[test]
    fn failed_cells() {
        let cfg = tiny_accuracy();
        let data = cfg.task_data().unwrap();
        let mut runs: Vec<_> = cfg.items().into_iter().map(|it| cfg.run_item(&data, it)).collect();
        runs[0].outcome = Err(Error::NumericFailure("forced".into()));
        let partial = aggregate_accuracy(&cfg, &runs).unwrap();
        assert_eq!(partial.counts[0], 1);
        runs[1].outcome = Err(Error::NumericFailure("forced".into()));
        assert_eq!(aggregate_accuracy(&cfg, &runs), Err(Error::CellFailed { k: 0, j: 0 }));
    }

    #[test]
    fn correlation_of_manifolds() {
        let a = [1.0, 3.0, 2.0, 5.0, 4.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 3.0).collect();
        assert_abs_diff_eq!(manifold_correlation(&a, &b).unwrap().r, 1.0, epsilon = 1e-12);
        assert_eq!(manifold_correlation(&a, &b).unwrap().r, manifold_correlation(&b, &a).unwrap().r);
        assert!(manifold_correlation(&a, &[1.0; 5]).is_err());
        assert!(manifold_correlation(&a, &b[..4]).is_err());
    }

    #[test]
    fn degenerate_grid_is_reported_undefined() {
        // identical seeds and coordinates in every cell
        let mut cfg = tiny_accuracy();
        cfg.rhos = vec![0.9];
        cfg.omegas = vec![0.5];
        cfg.trials = 1;
        cfg.measures = vec![Measure::Heterogeneity(VertexPropertyKind::Degree, Mode::Binary)];
        let data = cfg.task_data().unwrap();
        let run = cfg.run_item(&data, GridItem { k: 0, j: 0, trial: 0 });
        let mut runs = Vec::new();
        let mut grid = cfg.clone();
        grid.rhos = vec![0.9, 1.0, 1.1];
        for k in 0..3 {
            let mut r = run.clone();
            r.item.k = k;
            runs.push(r);
        }
        let result = aggregate_accuracy(&grid, &runs).unwrap();
        let report = correlate_accuracy(&result);
        assert_eq!(report.rows[0].result, None);
        assert_eq!(report.rows[0].n, 3);
    }

    #[test]
    fn memory_sweep_shapes() {
        let cfg = MemoryConfig {
            rhos: vec![0.3, 0.9, 1.5],
            trials: 1,
            size: 12,
            length: 500,
            washout: 50,
            lags: (1..=10).collect(),
            windows: vec![DelayWindow::new(10, 5).unwrap()],
            ..MemoryConfig::desk(4)
        };
        let (runs, result, report) = run_memory_sweep(&cfg).unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(result.columns.len(), MemoryMeasure::all().len());
        assert!(result.capacity.iter().all(|&c| (0.0..=10.0).contains(&c)));
        assert_eq!(result.window_capacity.len(), cfg.windows.len());
        for (w, series) in cfg.windows.iter().zip(&result.window_capacity) {
            let width = w.lags().count() as f64;
            assert!(series.iter().all(|&c| (0.0..=width).contains(&c)));
        }
        let and = result.series(cfg.windows[0], MemoryMeasure::SharedEdges).unwrap();
        assert!(and.iter().all(|v| v.fract() == 0.0 && *v > 0.0));
        assert_eq!(report.rows.len(), 7);
        assert_eq!(report.rows[0].mode, "10:5");
        let single = MemoryConfig { rhos: vec![0.5], ..cfg };
        let (_, _, report) = run_memory_sweep(&single).unwrap();
        assert!(report.rows.iter().all(|r| r.result.is_none()));
    }
}
