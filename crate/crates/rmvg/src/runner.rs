//! Parallel execution of sweep work items.

use rayon::prelude::*;
use rmvg_core::sweep::{
    self, AccuracyConfig, AccuracyRun, CorrelationReport, ManifoldResult, MemoryConfig, MemoryResult, MemoryRun,
};

use crate::error::Result;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RMVG_THREADS";

/// Worker count: explicit value, else `RMVG_THREADS`, else one per core.
pub fn thread_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone)]
pub struct AccuracyOutput {
    pub config: AccuracyConfig,
    pub runs: Vec<AccuracyRun>,
    pub result: ManifoldResult,
    pub report: CorrelationReport,
}

#[derive(Debug, Clone)]
pub struct MemoryOutput {
    pub config: MemoryConfig,
    pub runs: Vec<MemoryRun>,
    pub result: MemoryResult,
    pub report: CorrelationReport,
}

/// A fixed-size worker pool. Results never depend on its size.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("worker pool");
        Self { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn accuracy(&self, cfg: &AccuracyConfig) -> Result<AccuracyOutput> {
        cfg.validate()?;
        let data = cfg.task_data()?;
        let items = cfg.items();
        let runs: Vec<AccuracyRun> =
            self.pool.install(|| items.par_iter().map(|&it| cfg.run_item(&data, it)).collect());
        for run in &runs {
            if let Err(e) = &run.outcome {
                log::warn!(
                    "run (rho={}, omega={}, trial {}) excluded: {e}",
                    run.rho,
                    run.omega,
                    run.item.trial
                );
            }
        }
        let result = sweep::aggregate_accuracy(cfg, &runs)?;
        let report = sweep::correlate_accuracy(&result);
        Ok(AccuracyOutput { config: cfg.clone(), runs, result, report })
    }

    pub fn memory(&self, cfg: &MemoryConfig) -> Result<MemoryOutput> {
        cfg.validate()?;
        let input = cfg.input()?;
        let items = cfg.items();
        let runs: Vec<MemoryRun> =
            self.pool.install(|| items.par_iter().map(|&it| cfg.run_item(&input, it)).collect());
        for run in &runs {
            if let Err(e) = &run.outcome {
                log::warn!("run (rho={}, trial {}) excluded: {e}", run.rho, run.item.trial);
            }
        }
        let result = sweep::aggregate_memory(cfg, &runs)?;
        let report = sweep::correlate_memory(&result);
        Ok(MemoryOutput { config: cfg.clone(), runs, result, report })
    }
}
