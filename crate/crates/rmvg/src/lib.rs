//! File formats, parallel sweeps and the `rmvg` command line on top of
//! [`rmvg_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod heatmap;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
pub use rmvg_core;
