//! Batch driver: configuration, parameter sweeps, slope fits and CSV output.

pub mod config;
pub mod fit;
pub mod output;
pub mod sweep;

pub use config::{SweepAxis, SweepConfig};
pub use fit::{fit_linear, FitResult};
pub use output::{format_sig, read_series, write_csv, CSV_HEADER};
pub use sweep::{run_axis_sweep, run_time_series, SweepRow};
