//! Graph-based characterization of echo state network dynamics.
//!
//! Reservoir activations are mapped onto a multiplex of horizontal visibility
//! graphs (one layer per neuron). Entropy of vertex properties across layers
//! tracks prediction accuracy; agreement between the input's visibility graph
//! and the layers tracks memory capacity.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, threading and
//! the command line live in the `rmvg` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod esn;
pub mod graph_metrics;
pub mod hvg;
mod linalg;
pub mod memory;
pub mod multiplex;
pub mod seed;
pub mod signals;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use nalgebra;
pub use signals::{Signal, Task, TaskData, TaskSpec};
