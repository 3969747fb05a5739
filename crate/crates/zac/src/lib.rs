//! File formats, path cache, configuration and the epoch simulator around
//! `zac-core`.

pub mod cache;
pub mod config;
pub mod io;
pub mod metrics;
pub mod sim;

pub use config::{KappaSpec, Method, SimConfig};
pub use sim::{run_simulation, Simulator};
