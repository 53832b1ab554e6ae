//! Echo state network: reservoir construction, state update, ridge readout,
//! prediction accuracy, memory capacity and the Jacobian baseline.
//!
//! The state update is `h[t] = tanh(W h[t-1] + w_in x[t])` with `h[0] = 0`;
//! output feedback is absent. The readout regresses the target on
//! `[h[t]; x[t]; 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, RidgeSystem, ScaledSigmaMin};
use crate::seed::{self, stream};
use crate::signals::Signal;

/// Regression coefficient used throughout the experiments.
pub const DEFAULT_REG: f64 = 0.05;
pub const DEFAULT_WASHOUT: usize = 100;
/// Fraction of post-washout samples used for fitting; the rest is the test split.
pub const TRAIN_FRACTION: f64 = 0.6;
const INIT_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub size: usize,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    /// Fraction of nonzero recurrent weights, in (0, 1].
    pub sparsity: f64,
    pub seed: u64,
}

impl ReservoirParams {
    pub fn new(size: usize, spectral_radius: f64, input_scaling: f64, seed: u64) -> Self {
        Self { size, spectral_radius, input_scaling, sparsity: 0.25, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(invalid("reservoir needs at least one neuron"));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(invalid(format!("sparsity {} outside (0, 1]", self.sparsity)));
        }
        if !(self.spectral_radius >= 0.0) || !self.spectral_radius.is_finite() {
            return Err(invalid("spectral radius must be finite and non-negative"));
        }
        if !self.input_scaling.is_finite() {
            return Err(invalid("input scaling must be finite"));
        }
        Ok(())
    }
}

/// Fixed recurrent and input weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Reservoir {
    recurrent: DMatrix<f64>,
    input: DVector<f64>,
}

impl Reservoir {
    /// Random reservoir: exactly `round(sparsity * N^2)` recurrent entries are
    /// nonzero, drawn uniform on [-1, 1] and rescaled to the requested spectral
    /// radius; input weights are uniform on [-1, 1] times the input scaling.
    pub fn random(params: &ReservoirParams) -> Result<Self> {
        params.validate()?;
        let n = params.size;
        let cells = n * n;
        let nonzero = (libm::round(params.sparsity * cells as f64) as usize).clamp(1, cells);
        for attempt in 0..INIT_ATTEMPTS {
            let base = seed::derive(params.seed, &[stream::RESERVOIR, attempt as u64]);
            let mut rng = seed::rng(seed::derive(base, &[stream::RECURRENT]));
            // partial Fisher-Yates over the flattened (row-major) cell indices
            let mut cells_idx: Vec<u32> = (0..cells as u32).collect();
            let mut w = DMatrix::zeros(n, n);
            for k in 0..nonzero {
                let pick = rng.gen_range(k..cells);
                cells_idx.swap(k, pick);
                let c = cells_idx[k] as usize;
                w[(c / n, c % n)] = 2.0 * rng.gen::<f64>() - 1.0;
            }
            let radius = linalg::spectral_radius(&w);
            if !(radius > 0.0) || !radius.is_finite() {
                continue;
            }
            let scale = params.spectral_radius / radius;
            w *= scale;
            let mut rng = seed::rng(seed::derive(base, &[stream::INPUT]));
            let input =
                DVector::from_fn(n, |_, _| (2.0 * rng.gen::<f64>() - 1.0) * params.input_scaling);
            return Ok(Self { recurrent: w, input });
        }
        Err(Error::DegenerateReservoir { attempts: INIT_ATTEMPTS })
    }

    /// Reservoir from explicit weights.
    pub fn from_weights(recurrent: DMatrix<f64>, input: DVector<f64>) -> Result<Self> {
        if !recurrent.is_square() || recurrent.nrows() != input.len() || input.is_empty() {
            return Err(invalid("recurrent matrix must be N x N and input weights length N"));
        }
        if recurrent.iter().chain(input.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("reservoir weights must be finite"));
        }
        Ok(Self { recurrent, input })
    }

    pub fn size(&self) -> usize {
        self.input.len()
    }

    pub fn recurrent(&self) -> &DMatrix<f64> {
        &self.recurrent
    }

    pub fn input_weights(&self) -> &DVector<f64> {
        &self.input
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.recurrent)
    }

    /// Drives the reservoir with `x` from the zero state.
    pub fn run(&self, x: &Signal, washout: usize) -> Result<StateTrajectory> {
        let steps = x.len();
        if washout >= steps {
            return Err(invalid(format!("washout {washout} must be shorter than the input ({steps})")));
        }
        let n = self.size();
        let mut data = vec![0.0; n * steps];
        let mut h = DVector::zeros(n);
        let mut pre = DVector::zeros(n);
        for (t, &xt) in x.values().iter().enumerate() {
            pre.copy_from(&self.input);
            pre.gemv(1.0, &self.recurrent, &h, xt);
            for (l, (hl, &p)) in h.iter_mut().zip(pre.iter()).enumerate() {
                *hl = libm::tanh(p);
                data[l * steps + t] = *hl;
            }
            if h.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericFailure(format!("non-finite state at step {t}")));
            }
        }
        Ok(StateTrajectory { data, steps, neurons: n, washout })
    }
}

/// Neuron activations over time.
///
/// Stored neuron-major so each activation series is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    data: Vec<f64>,
    steps: usize,
    neurons: usize,
    washout: usize,
}

impl StateTrajectory {
    /// Builds a trajectory from per-neuron series of equal length.
    pub fn from_series(series: &[Vec<f64>], washout: usize) -> Result<Self> {
        let neurons = series.len();
        let steps = series.first().map_or(0, Vec::len);
        if neurons == 0 || steps == 0 || series.iter().any(|s| s.len() != steps) {
            return Err(invalid("trajectory needs equal-length, non-empty neuron series"));
        }
        if washout >= steps {
            return Err(invalid("washout must be shorter than the trajectory"));
        }
        Ok(Self { data: series.concat(), steps, neurons, washout })
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    /// Total number of steps including the washout.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    /// Number of post-washout steps.
    pub fn len(&self) -> usize {
        self.steps - self.washout
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Post-washout activation series of neuron `l`.
    pub fn neuron(&self, l: usize) -> &[f64] {
        &self.data[l * self.steps + self.washout..(l + 1) * self.steps]
    }

    /// Full activation series of neuron `l`, washout included.
    pub fn neuron_full(&self, l: usize) -> &[f64] {
        &self.data[l * self.steps..(l + 1) * self.steps]
    }

    /// Activation of neuron `l` at post-washout step `r`.
    #[inline]
    pub fn get(&self, r: usize, l: usize) -> f64 {
        self.data[l * self.steps + self.washout + r]
    }

    /// Post-washout portion of a signal aligned with this trajectory.
    pub fn align<'a>(&self, x: &'a Signal) -> Result<&'a [f64]> {
        if x.len() != self.steps {
            return Err(invalid(format!(
                "signal length {} does not match trajectory length {}",
                x.len(),
                self.steps
            )));
        }
        Ok(&x.values()[self.washout..])
    }

    fn design(&self, input: &[f64], rows: Range<usize>) -> DMatrix<f64> {
        let n = self.neurons;
        DMatrix::from_fn(rows.len(), n + 2, |i, c| {
            let r = rows.start + i;
            if c < n {
                self.get(r, c)
            } else if c == n {
                input[r]
            } else {
                1.0
            }
        })
    }
}

/// Contiguous train/test partition of post-washout rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

impl Split {
    /// First `fraction` of `start..end` for fitting, the remainder for testing.
    pub fn contiguous(start: usize, end: usize, fraction: f64) -> Result<Self> {
        let n = end.saturating_sub(start);
        let cut = start + libm::round(n as f64 * fraction) as usize;
        if cut <= start || cut >= end {
            return Err(invalid(format!("cannot split {n} rows at fraction {fraction}")));
        }
        Ok(Self { train: start..cut, test: cut..end })
    }

    pub fn default_for(traj: &StateTrajectory) -> Result<Self> {
        Self::contiguous(0, traj.len(), TRAIN_FRACTION)
    }
}

/// Trained linear readout over `[h; x; 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Readout {
    weights: DVector<f64>,
    reg: f64,
}

impl Readout {
    pub fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    /// Predictions for post-washout rows `rows`.
    pub fn predict(&self, traj: &StateTrajectory, x: &Signal, rows: Range<usize>) -> Result<Vec<f64>> {
        let input = traj.align(x)?;
        let n = traj.neurons();
        if self.weights.len() != n + 2 {
            return Err(invalid("readout does not match the trajectory's reservoir size"));
        }
        Ok(rows
            .map(|r| {
                let mut y = self.weights[n] * input[r] + self.weights[n + 1];
                for l in 0..n {
                    y += self.weights[l] * traj.get(r, l);
                }
                y
            })
            .collect())
    }
}

/// Fits a ridge readout on post-washout rows `rows`.
///
/// `x` and `y_target` are full-length signals aligned with the trajectory.
pub fn train_readout(
    traj: &StateTrajectory,
    x: &Signal,
    y_target: &Signal,
    rows: Range<usize>,
    reg: f64,
) -> Result<Readout> {
    let input = traj.align(x)?;
    let target = traj.align(y_target)?;
    if rows.end > traj.len() || rows.is_empty() {
        return Err(invalid("training rows out of range"));
    }
    let system = RidgeSystem::new(traj.design(input, rows.clone()), reg)?;
    let weights = system.solve(&target[rows])?;
    Ok(Readout { weights, reg })
}

/// Prediction error and accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub nrmse: f64,
    pub gamma: f64,
}

/// `sqrt(mean (y - yhat)^2 / mean (y - mean y)^2)`, with `gamma = max(1 - NRMSE, 0)`.
pub fn nrmse(target: &[f64], prediction: &[f64]) -> Result<Score> {
    if target.len() != prediction.len() || target.is_empty() {
        return Err(invalid("target and prediction must be non-empty and equal length"));
    }
    let n = target.len() as f64;
    let mean = target.iter().sum::<f64>() / n;
    let var = target.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::UndefinedNrmse);
    }
    let mse = target.iter().zip(prediction).map(|(y, p)| (y - p) * (y - p)).sum::<f64>() / n;
    let nrmse = libm::sqrt(mse / var);
    Ok(Score { nrmse, gamma: (1.0 - nrmse).max(0.0) })
}

/// Scores `readout` on post-washout rows `rows`.
pub fn evaluate(
    readout: &Readout,
    traj: &StateTrajectory,
    x: &Signal,
    y_target: &Signal,
    rows: Range<usize>,
) -> Result<Score> {
    let target = traj.align(y_target)?;
    let prediction = readout.predict(traj, x, rows.clone())?;
    nrmse(&target[rows], &prediction)
}

/// Squared correlation clamped to [0, 1]; zero variance contributes 0.
pub fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if !(va > 0.0) || !(vb > 0.0) {
        return 0.0;
    }
    (cov * cov / (va * vb)).clamp(0.0, 1.0)
}

/// Memory capacity with its per-lag terms.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryCapacity {
    pub total: f64,
    pub per_lag: Vec<(usize, f64)>,
}

/// Trains one readout per lag to reproduce `x[t - lag]` and sums the squared
/// test-split correlations between target and output.
///
/// Rows start at the first post-washout step where every lag is defined, so
/// all lags share one train/test split.
pub fn memory_capacity(
    reservoir: &Reservoir,
    noise: &Signal,
    lags: &[usize],
    reg: f64,
    washout: usize,
) -> Result<MemoryCapacity> {
    let traj = reservoir.run(noise, washout)?;
    memory_capacity_of(&traj, noise, lags, reg)
}

/// [`memory_capacity`] on an existing trajectory.
pub fn memory_capacity_of(
    traj: &StateTrajectory,
    noise: &Signal,
    lags: &[usize],
    reg: f64,
) -> Result<MemoryCapacity> {
    let input = traj.align(noise)?;
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let washout = traj.washout();
    let start = max_lag.saturating_sub(washout);
    if start >= traj.len() {
        return Err(invalid(format!("max lag {max_lag} leaves no usable rows")));
    }
    let split = Split::contiguous(start, traj.len(), TRAIN_FRACTION)?;
    let full = noise.values();
    let train_design = traj.design(input, split.train.clone());
    let system = RidgeSystem::new(train_design, reg)?;
    let test_design = traj.design(input, split.test.clone());

    let mut per_lag = Vec::with_capacity(lags.len());
    let mut total = 0.0;
    for &lag in lags {
        // post-washout row r sits at time washout + r on the input's timeline
        let delayed = |rows: Range<usize>| -> Vec<f64> {
            rows.map(|r| full[washout + r - lag]).collect()
        };
        let w = system.solve(&delayed(split.train.clone()))?;
        let output = &test_design * &w;
        let term = squared_correlation(&delayed(split.test.clone()), output.as_slice());
        total += term;
        per_lag.push((lag, term));
    }
    Ok(MemoryCapacity { total, per_lag })
}

/// Time average over post-washout steps of the smallest singular value of
/// `J_t = diag(1 - h[t]^2) W`.
pub fn jacobian_lambda(traj: &StateTrajectory, recurrent: &DMatrix<f64>) -> Result<f64> {
    if traj.is_empty() {
        return Err(invalid("no post-washout states"));
    }
    if recurrent.nrows() != traj.neurons() || !recurrent.is_square() {
        return Err(invalid("recurrent matrix does not match the trajectory"));
    }
    let n = traj.neurons();
    let mut solver = ScaledSigmaMin::new(recurrent);
    let mut diag = vec![0.0; n];
    let mut sum = 0.0;
    for r in 0..traj.len() {
        for (l, d) in diag.iter_mut().enumerate() {
            let h = traj.get(r, l);
            *d = 1.0 - h * h;
        }
        sum += solver.compute(&diag);
    }
    Ok(sum / traj.len() as f64)
}
