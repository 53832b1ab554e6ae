//! Command-line interface. Every sweep flag can also come from a TOML file
//! (`--config`) using the same names; flags given on the command line win.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use rmvg_core::hvg::{build_hvg, Mode};
use rmvg_core::memory::DelayWindow;
use rmvg_core::signals::MackeyGlass;
use rmvg_core::sweep::{
    linspace, AccuracyConfig, CapacityReference, CorrelationReport, Measure, MemoryConfig, MemoryMeasure,
};
use rmvg_core::{Task, TaskSpec};

use crate::error::{io_at, Error, Result};
use crate::format;
use crate::report;
use crate::runner::{thread_count, Runner};

#[derive(Parser, Debug)]
#[command(name = "rmvg", version, about = "Visibility-graph analysis of echo state network reservoirs")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a benchmark signal as `t,input[,target]` CSV.
    Generate(GenerateArgs),
    /// Build the visibility graph of one CSV column and write its edge list.
    Hvg(HvgArgs),
    /// Accuracy and graph measures over a spectral radius x input scaling grid.
    SweepAccuracy(AccuracyArgs),
    /// Memory capacity and graph memory measures over spectral radius.
    SweepMemory(MemoryArgs),
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(default, rename_all = "kebab-case")]
pub struct TaskParams {
    /// Sine angular frequency.
    #[arg(long)]
    pub psi: Option<f64>,
    /// NARMA order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Upper end of the NARMA input range.
    #[arg(long)]
    pub input_max: Option<f64>,
    /// Polynomial degree.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Polynomial input delay.
    #[arg(long)]
    pub delay: Option<usize>,
    /// Noise lower bound.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    /// Noise upper bound.
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    /// Forecast horizon for sin, mg and mso.
    #[arg(long)]
    pub forecast_step: Option<usize>,
}

impl TaskParams {
    fn merge(self, file: Self) -> Self {
        Self {
            psi: self.psi.or(file.psi),
            order: self.order.or(file.order),
            input_max: self.input_max.or(file.input_max),
            degree: self.degree.or(file.degree),
            delay: self.delay.or(file.delay),
            lo: self.lo.or(file.lo),
            hi: self.hi.or(file.hi),
            forecast_step: self.forecast_step.or(file.forecast_step),
        }
    }

    pub fn task(&self, name: &str) -> Result<Task> {
        let task = match name.trim().to_ascii_lowercase().as_str() {
            "sin" => Task::Sine { psi: self.psi.unwrap_or(0.2) },
            "mg" => Task::MackeyGlass(MackeyGlass::default()),
            "mso" => Task::Mso,
            "narma" => {
                let Task::Narma { order, input_max } = Task::narma() else { unreachable!() };
                Task::Narma { order: self.order.unwrap_or(order), input_max: self.input_max.unwrap_or(input_max) }
            }
            "poly" => {
                let Task::Poly { degree, delay } = Task::poly() else { unreachable!() };
                Task::Poly { degree: self.degree.unwrap_or(degree), delay: self.delay.unwrap_or(delay) }
            }
            "noise" => Task::Noise { lo: self.lo.unwrap_or(-1.0), hi: self.hi.unwrap_or(1.0) },
            other => return Err(Error::Format(format!("unknown task '{other}'"))),
        };
        Ok(task)
    }

    fn spec(&self, name: &str, seed: u64) -> Result<TaskSpec> {
        let task = self.task(name)?;
        let mut spec = TaskSpec::new(task, seed);
        if let Some(step) = self.forecast_step {
            if !spec.task.is_forecast() {
                return Err(Error::Format(format!("task '{name}' has no forecast horizon")));
            }
            spec.forecast_step = step;
        }
        Ok(spec)
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// sin, mg, mso, narma, poly or noise.
    #[arg(long)]
    pub task: String,
    #[arg(long)]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub params: TaskParams,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Binary,
    Weighted,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Binary => Mode::Binary,
            ModeArg::Weighted => Mode::Weighted,
        }
    }
}

#[derive(Args, Debug)]
pub struct HvgArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    pub mode: ModeArg,
    /// CSV column holding the series.
    #[arg(long, default_value = "input")]
    pub column: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(default, rename_all = "kebab-case")]
pub struct AccuracyArgs {
    /// TOML file with any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// sin, mg, mso, narma or poly.
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_steps: Option<usize>,
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_steps: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Reservoir size.
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Ridge penalty.
    #[arg(long)]
    pub reg: Option<f64>,
    /// Histogram bins for the heterogeneity entropy.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub washout: Option<usize>,
    /// Series length including the washout.
    #[arg(long)]
    pub length: Option<usize>,
    /// Comma-separated measure columns (e.g. `H_CL_b,AEO,lambda`), or `all`.
    #[arg(long)]
    pub measures: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start from the 20 x 10 grid with 15 trials.
    #[arg(long)]
    pub full_scale: bool,
    /// Also write one PNG per manifold.
    #[arg(long)]
    pub heatmaps: bool,
    /// Worker threads (default: RMVG_THREADS, else all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: TaskParams,
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(default, rename_all = "kebab-case")]
pub struct MemoryArgs {
    /// TOML file with any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rho_min: Option<f64>,
    #[arg(long)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_steps: Option<usize>,
    /// Input scaling.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Delay windows as `oldest:newest`, comma-separated.
    #[arg(long)]
    pub windows: Option<String>,
    /// Capacity lags as `first:last` or a comma-separated list.
    #[arg(long)]
    pub lags: Option<String>,
    /// Capacity each window's deltas are correlated against: `window` (its own
    /// lags) or `total` (the `--lags` set).
    #[arg(long)]
    pub mc_reference: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub sparsity: Option<f64>,
    #[arg(long)]
    pub reg: Option<f64>,
    #[arg(long)]
    pub washout: Option<usize>,
    #[arg(long)]
    pub length: Option<usize>,
    /// Comma-separated measure columns (e.g. `delta_dg_sc,delta_and`), or `all`.
    #[arg(long)]
    pub measures: Option<String>,
    /// Divide shared-edge counts by the lagged input's edge count.
    #[arg(long)]
    pub normalize_and: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Start from 100 radii with 15 trials.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    toml::from_str(&text).map_err(|source| Error::Config { path: path.to_path_buf(), source })
}

macro_rules! prefer {
    ($cli:expr, $file:expr; $($field:ident),*) => {
        $( $cli.$field = $cli.$field.take().or($file.$field.take()); )*
    };
}

fn regrid(grid: &[f64], min: Option<f64>, max: Option<f64>, steps: Option<usize>) -> Vec<f64> {
    if min.is_none() && max.is_none() && steps.is_none() {
        return grid.to_vec();
    }
    linspace(
        min.unwrap_or(grid[0]),
        max.unwrap_or(grid[grid.len() - 1]),
        steps.unwrap_or(grid.len()),
    )
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

pub fn parse_lags(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Format(format!("bad lag list '{s}'"));
    if let Some((a, b)) = s.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    split_list(s).map(|p| p.parse().map_err(|_| bad())).collect()
}

pub fn parse_windows(s: &str) -> Result<Vec<DelayWindow>> {
    split_list(s).map(|p| DelayWindow::parse(p).map_err(Error::from)).collect()
}

impl AccuracyArgs {
    /// Fills unset options from the `--config` file.
    pub fn resolve(mut self) -> Result<Self> {
        let mut file: AccuracyArgs = load(self.config.as_deref())?;
        prefer!(self, file; task, rho_min, rho_max, rho_steps, omega_min, omega_max, omega_steps, trials,
            nr, sparsity, reg, bins, washout, length, measures, seed, out, threads);
        self.full_scale |= file.full_scale;
        self.heatmaps |= file.heatmaps;
        self.params = self.params.merge(file.params);
        Ok(self)
    }

    pub fn to_config(&self) -> Result<AccuracyConfig> {
        let name = self.task.as_deref().ok_or_else(|| Error::Format("--task is required".into()))?;
        let seed = self.seed.unwrap_or(0);
        let task = self.params.task(name)?;
        let mut cfg =
            if self.full_scale { AccuracyConfig::full_scale(task, seed) } else { AccuracyConfig::desk(task, seed) };
        cfg.task = self.params.spec(name, cfg.task.seed)?;
        cfg.rhos = regrid(&cfg.rhos, self.rho_min, self.rho_max, self.rho_steps);
        cfg.omegas = regrid(&cfg.omegas, self.omega_min, self.omega_max, self.omega_steps);
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.size = self.nr.unwrap_or(cfg.size);
        cfg.sparsity = self.sparsity.unwrap_or(cfg.sparsity);
        cfg.reg = self.reg.unwrap_or(cfg.reg);
        cfg.bins = self.bins.unwrap_or(cfg.bins);
        cfg.washout = self.washout.unwrap_or(cfg.washout);
        cfg.length = self.length.unwrap_or(cfg.length);
        if let Some(list) = self.measures.as_deref().filter(|m| !m.trim().eq_ignore_ascii_case("all")) {
            cfg.measures = split_list(list).map(Measure::parse).collect::<rmvg_core::Result<_>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl MemoryArgs {
    pub fn resolve(mut self) -> Result<Self> {
        let mut file: MemoryArgs = load(self.config.as_deref())?;
        prefer!(self, file; rho_min, rho_max, rho_steps, omega, windows, lags, mc_reference, trials, nr, sparsity, reg,
            washout, length, measures, seed, out, threads);
        self.full_scale |= file.full_scale;
        self.normalize_and |= file.normalize_and;
        Ok(self)
    }

    pub fn to_config(&self) -> Result<MemoryConfig> {
        let seed = self.seed.unwrap_or(0);
        let mut cfg = if self.full_scale { MemoryConfig::full_scale(seed) } else { MemoryConfig::desk(seed) };
        cfg.rhos = regrid(&cfg.rhos, self.rho_min, self.rho_max, self.rho_steps);
        cfg.omega = self.omega.unwrap_or(cfg.omega);
        if let Some(w) = &self.windows {
            cfg.windows = parse_windows(w)?;
        }
        if let Some(l) = &self.lags {
            cfg.lags = parse_lags(l)?;
        }
        if let Some(r) = &self.mc_reference {
            cfg.reference = CapacityReference::parse(r)?;
        }
        cfg.trials = self.trials.unwrap_or(cfg.trials);
        cfg.size = self.nr.unwrap_or(cfg.size);
        cfg.sparsity = self.sparsity.unwrap_or(cfg.sparsity);
        cfg.reg = self.reg.unwrap_or(cfg.reg);
        cfg.washout = self.washout.unwrap_or(cfg.washout);
        cfg.length = self.length.unwrap_or(cfg.length);
        if let Some(list) = self.measures.as_deref().filter(|m| !m.trim().eq_ignore_ascii_case("all")) {
            cfg.measures = split_list(list).map(MemoryMeasure::parse).collect::<rmvg_core::Result<_>>()?;
        }
        cfg.normalize_edges = self.normalize_and;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_report(report: &CorrelationReport) {
    println!("{:<16} {:<6} {:>10} {:>12} {:>4}", "measure", "mode", "r", "p", "n");
    for row in &report.rows {
        match row.result {
            Some(c) => println!("{:<16} {:<6} {:>10.4} {:>12.3e} {:>4}", row.measure, row.mode, c.r, c.p, row.n),
            None => println!("{:<16} {:<6} {:>10} {:>12} {:>4}", row.measure, row.mode, "undefined", "", row.n),
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let spec = args.params.spec(&args.task, args.seed)?;
            let data = spec.generate(args.length)?;
            format::write_signal(&args.out, &data)?;
        }
        Command::Hvg(args) => {
            let x = format::read_column(&args.input, &args.column)?;
            let g = build_hvg(&x, args.mode.into())?;
            format::write_edges(&args.out, &g)?;
            log::info!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
        }
        Command::SweepAccuracy(args) => {
            let args = args.resolve()?;
            let cfg = args.to_config()?;
            let out_dir = args.out.clone().ok_or_else(|| Error::Format("--out is required".into()))?;
            let runner = Runner::new(thread_count(args.threads));
            log::info!("{} runs on {} threads", cfg.items().len(), runner.threads());
            let output = runner.accuracy(&cfg)?;
            report::write_accuracy(&out_dir, &output, args.heatmaps)?;
            print_report(&output.report);
        }
        Command::SweepMemory(args) => {
            let args = args.resolve()?;
            let cfg = args.to_config()?;
            let out_dir = args.out.clone().ok_or_else(|| Error::Format("--out is required".into()))?;
            let runner = Runner::new(thread_count(args.threads));
            log::info!("{} runs on {} threads", cfg.items().len(), runner.threads());
            let output = runner.memory(&cfg)?;
            report::write_memory(&out_dir, &output)?;
            print_report(&output.report);
        }
    }
    Ok(())
}
