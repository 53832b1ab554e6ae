//! Benchmark input/target generators.
//!
//! Time indices follow the usual 1-based convention of the benchmark
//! definitions: `values()[k]` is the sample at time `k + 1` unless a
//! generator says otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::seed::{self, stream};

/// A finite univariate series sampled at unit time steps.
///
/// `offset` records where the first sample sits on the timeline of the series
/// it was derived from; [`Signal::delayed`] advances it.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
    offset: usize,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("signal must contain at least one sample"));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(alloc::format!("non-finite sample at index {p}")));
        }
        Ok(Self { values, offset: 0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Position of `values()[0]` on the original timeline.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Shifts the series by `tau` steps: element `t` of the result, placed at
    /// `offset() + t` on the original timeline, equals `x[t - tau]`.
    pub fn delayed(&self, tau: usize) -> Result<Signal> {
        if tau >= self.values.len() {
            return Err(invalid(alloc::format!(
                "delay {tau} out of range for length {}",
                self.values.len()
            )));
        }
        Ok(Signal {
            values: self.values[..self.values.len() - tau].to_vec(),
            offset: self.offset + tau,
        })
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        Err(invalid("length must be positive"))
    } else {
        Ok(())
    }
}

/// `sin(psi * t)` for `t = 1..=length`.
pub fn gen_sine(psi: f64, length: usize) -> Result<Signal> {
    if !(psi > 0.0) || !psi.is_finite() {
        return Err(invalid("angular frequency must be positive"));
    }
    check_length(length)?;
    Signal::new((1..=length).map(|t| libm::sin(psi * t as f64)).collect())
}

/// Forecast step associated with a sinusoid: one period, rounded.
pub fn sine_forecast_step(psi: f64) -> usize {
    libm::round(2.0 * PI / psi) as usize
}

/// Mackey–Glass delay differential equation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlass {
    pub delay: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x0: f64,
    pub step: f64,
    /// Unit-time samples discarded before recording.
    pub transient: usize,
}

impl Default for MackeyGlass {
    fn default() -> Self {
        Self { delay: 17.0, alpha: 0.2, beta: 0.1, x0: 1.2, step: 0.1, transient: 1000 }
    }
}

const MG_DIVERGENCE: f64 = 1e6;

fn integral_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let n = libm::round(r);
    (n >= 0.0 && libm::fabs(r - n) <= 1e-9 * n.max(1.0)).then_some(n as usize)
}

/// Integrates Mackey–Glass with classical RK4 and returns unit-time samples
/// at `t = transient + 1 ..= transient + length`.
///
/// The delayed term is read from a ring buffer holding the last `delay/step`
/// integration points; the RK4 half-step stages use the mean of the two
/// bracketing history points. History before `t = 0` is held at `x0`.
pub fn gen_mackey_glass(p: &MackeyGlass, length: usize) -> Result<Signal> {
    check_length(length)?;
    if !(p.step > 0.0) {
        return Err(invalid("integration step must be positive"));
    }
    let lag = integral_ratio(p.delay, p.step)
        .ok_or_else(|| invalid("delay must be an integral multiple of the step"))?;
    let per_unit = integral_ratio(1.0, p.step)
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid("1/step must be integral"))?;

    let f = |x: f64, xd: f64| p.alpha * xd / (1.0 + libm::pow(xd, 10.0)) - p.beta * x;
    let h = p.step;

    // ring[(n) % cap] holds x at integration point n; cap = lag + 1 keeps x_{n-lag}.
    let cap = lag + 1;
    let mut ring = vec![p.x0; cap];
    let mut x = p.x0;
    let mut n: usize = 0;
    let total_units = p.transient + length;
    let mut out = Vec::with_capacity(length);

    for unit in 1..=total_units {
        for _ in 0..per_unit {
            // x_{n-lag} and x_{n-lag+1}; before the start both equal x0.
            let d0 = if n >= lag { ring[(n - lag) % cap] } else { p.x0 };
            let d1 = if n + 1 >= lag { ring[(n + 1 - lag) % cap] } else { p.x0 };
            let dm = 0.5 * (d0 + d1);
            let k1 = f(x, d0);
            let k2 = f(x + 0.5 * h * k1, dm);
            let k3 = f(x + 0.5 * h * k2, dm);
            let k4 = f(x + h * k3, d1);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            n += 1;
            if !x.is_finite() || libm::fabs(x) > MG_DIVERGENCE {
                return Err(Error::IntegrationFailure { step: n });
            }
            ring[n % cap] = x;
        }
        if unit > p.transient {
            out.push(x);
        }
    }
    Signal::new(out)
}

/// One sample of the multiple superimposed oscillator.
pub fn mso_at(t: f64) -> f64 {
    libm::sin(0.2 * t) + libm::sin(0.311 * t) + libm::sin(0.42 * t)
}

/// Multiple superimposed oscillator for `t = 1..=length`.
pub fn gen_mso(length: usize) -> Result<Signal> {
    check_length(length)?;
    Signal::new((1..=length).map(|t| mso_at(t as f64)).collect())
}

/// |y| above this marks a NARMA draw as divergent.
pub const NARMA_DIVERGENCE: f64 = 1e3;
/// Regeneration attempts for divergent NARMA draws.
pub const NARMA_ATTEMPTS: usize = 10;
/// Default upper bound of the NARMA input distribution. The order-20
/// recurrence diverges on essentially every draw for inputs on [0, 1].
pub const NARMA_INPUT_MAX: f64 = 0.2;

/// Runs the order-`r` NARMA recurrence on `x` with zero initial history.
///
/// Returns `y[0..=x.len()]`, where `y[t + 1]` is produced from inputs up to
/// `x[t]`, or `None` once |y| exceeds [`NARMA_DIVERGENCE`].
pub fn narma_response(x: &[f64], order: usize) -> Option<Vec<f64>> {
    let mut y = vec![0.0; x.len() + 1];
    // window = sum_{i=0..=order} y[t - i]
    let mut window = 0.0;
    for t in 0..x.len() {
        window += y[t];
        if t > order {
            window -= y[t - order - 1];
        }
        let lagged = if t >= order { x[t - order] } else { 0.0 };
        let next = 0.3 * y[t] + 0.05 * y[t] * window + 1.5 * lagged * x[t] + 0.1;
        if !next.is_finite() || libm::fabs(next) > NARMA_DIVERGENCE {
            return None;
        }
        y[t + 1] = next;
    }
    Some(y)
}

/// NARMA input/target pair. Input is i.i.d. uniform on `[0, input_max]`;
/// `target[t] = y[t + 1]`, the response to inputs up to `input[t]`.
///
/// Divergent draws are regenerated from derived sub-seeds.
pub fn gen_narma(order: usize, length: usize, input_max: f64, seed: u64) -> Result<(Signal, Signal)> {
    if order == 0 {
        return Err(invalid("NARMA order must be at least 1"));
    }
    if length <= order {
        return Err(invalid("NARMA length must exceed the order"));
    }
    if !(input_max > 0.0) {
        return Err(invalid("NARMA input bound must be positive"));
    }
    for attempt in 0..NARMA_ATTEMPTS {
        let sub = if attempt == 0 {
            seed::derive(seed, &[stream::SIGNAL])
        } else {
            seed::derive(seed, &[stream::RETRY, attempt as u64])
        };
        let mut rng = seed::rng(sub);
        let x: Vec<f64> = (0..length).map(|_| input_max * rng.gen::<f64>()).collect();
        if let Some(y) = narma_response(&x, order) {
            return Ok((Signal::new(x)?, Signal::new(y[1..].to_vec())?));
        }
    }
    Err(Error::SignalDivergence { attempts: NARMA_ATTEMPTS })
}

/// Coefficients `c[i][j]` of the bivariate polynomial, `i + j <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoefficients {
    degree: usize,
    // row i holds c[i][0..=degree-i]
    rows: Vec<Vec<f64>>,
}

impl PolyCoefficients {
    pub fn draw(degree: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let rows = (0..=degree)
            .map(|i| (0..=degree - i).map(|_| rng.gen::<f64>()).collect())
            .collect();
        Self { degree, rows }
    }

    pub fn constant(degree: usize, value: f64) -> Self {
        Self { degree, rows: (0..=degree).map(|i| vec![value; degree - i + 1]).collect() }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// `sum_{i+j<=p} c[i][j] * a^i * b^j`
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        let mut ai = 1.0;
        for row in &self.rows {
            let mut bj = 1.0;
            for &c in row {
                total += c * ai * bj;
                bj *= b;
            }
            ai *= a;
        }
        total
    }
}

/// `y[t] = P(x[t], x[t - delay])` with zero input history before the start.
pub fn poly_target(x: &[f64], delay: usize, coeffs: &PolyCoefficients) -> Vec<f64> {
    (0..x.len())
        .map(|t| {
            let lagged = if t >= delay { x[t - delay] } else { 0.0 };
            coeffs.eval(x[t], lagged)
        })
        .collect()
}

/// Polynomial task: input i.i.d. uniform on [-1, 1], coefficients uniform on
/// [0, 1], both drawn from streams derived from `seed`.
pub fn gen_poly(degree: usize, delay: usize, length: usize, seed: u64) -> Result<(Signal, Signal)> {
    if degree == 0 {
        return Err(invalid("polynomial degree must be at least 1"));
    }
    if length <= delay {
        return Err(invalid("polynomial task length must exceed the delay"));
    }
    let coeffs = PolyCoefficients::draw(degree, seed::derive(seed, &[stream::COEFFICIENTS]));
    let mut rng = seed::rng(seed::derive(seed, &[stream::SIGNAL]));
    let x: Vec<f64> = (0..length).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
    let y = poly_target(&x, delay, &coeffs);
    Ok((Signal::new(x)?, Signal::new(y)?))
}

/// I.i.d. uniform noise on `[lo, hi)`.
pub fn gen_noise(length: usize, lo: f64, hi: f64, seed: u64) -> Result<Signal> {
    check_length(length)?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("noise range requires lo < hi"));
    }
    let mut rng = seed::rng(seed::derive(seed, &[stream::SIGNAL]));
    Signal::new((0..length).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect())
}

/// Benchmark task selector.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Sine { psi: f64 },
    MackeyGlass(MackeyGlass),
    Mso,
    Narma { order: usize, input_max: f64 },
    Poly { degree: usize, delay: usize },
    Noise { lo: f64, hi: f64 },
}

impl Task {
    pub fn sine() -> Self {
        Task::Sine { psi: 0.2 }
    }

    pub fn narma() -> Self {
        Task::Narma { order: 20, input_max: NARMA_INPUT_MAX }
    }

    pub fn poly() -> Self {
        Task::Poly { degree: 7, delay: 10 }
    }

    pub fn noise() -> Self {
        Task::Noise { lo: -1.0, hi: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Sine { .. } => "sin",
            Task::MackeyGlass(_) => "mg",
            Task::Mso => "mso",
            Task::Narma { .. } => "narma",
            Task::Poly { .. } => "poly",
            Task::Noise { .. } => "noise",
        }
    }

    /// Default forecast step for the task.
    pub fn forecast_step(&self) -> usize {
        match self {
            Task::Sine { psi } => sine_forecast_step(*psi),
            Task::MackeyGlass(_) => 6,
            Task::Mso => 16,
            Task::Narma { .. } => 15,
            Task::Poly { delay, .. } => *delay,
            Task::Noise { .. } => 0,
        }
    }

    /// Whether the target is the input itself, `forecast_step` samples ahead.
    pub fn is_forecast(&self) -> bool {
        matches!(self, Task::Sine { .. } | Task::MackeyGlass(_) | Task::Mso)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub task: Task,
    pub forecast_step: usize,
    pub seed: u64,
}

impl TaskSpec {
    pub fn new(task: Task, seed: u64) -> Self {
        let forecast_step = task.forecast_step();
        Self { task, forecast_step, seed }
    }
}

/// Input series plus the readout's teacher signal (absent for noise).
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub input: Signal,
    pub target: Option<Signal>,
}

impl TaskSpec {
    /// Generates `length` aligned input/target samples.
    ///
    /// Forecast tasks (sine, Mackey–Glass, MSO) use `target[t] = input[t + forecast_step]`.
    /// NARMA and polynomial targets are the system outputs aligned with the input.
    pub fn generate(&self, length: usize) -> Result<TaskData> {
        check_length(length)?;
        let ahead = |series: Signal| -> Result<TaskData> {
            let v = series.into_values();
            let input = Signal::new(v[..length].to_vec())?;
            let target = Signal::new(v[self.forecast_step..self.forecast_step + length].to_vec())?;
            Ok(TaskData { input, target: Some(target) })
        };
        let horizon = length + self.forecast_step;
        match &self.task {
            Task::Sine { psi } => ahead(gen_sine(*psi, horizon)?),
            Task::MackeyGlass(p) => ahead(gen_mackey_glass(p, horizon)?),
            Task::Mso => ahead(gen_mso(horizon)?),
            Task::Narma { order, input_max } => {
                let (input, target) = gen_narma(*order, length, *input_max, self.seed)?;
                Ok(TaskData { input, target: Some(target) })
            }
            Task::Poly { degree, delay } => {
                let (input, target) = gen_poly(*degree, *delay, length, self.seed)?;
                Ok(TaskData { input, target: Some(target) })
            }
            Task::Noise { lo, hi } => Ok(TaskData {
                input: gen_noise(length, *lo, *hi, self.seed)?,
                target: None,
            }),
        }
    }
}
