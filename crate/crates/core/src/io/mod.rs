//! Configuration, persistence and the command-level drivers.

pub mod checkpoint;
pub mod config;
pub mod driver;
pub mod series;
pub mod svg;

pub use checkpoint::Checkpoint;
pub use config::{RunConfig, TransportSpec};
pub use series::{read_series, write_series, SERIES_HEADER};
