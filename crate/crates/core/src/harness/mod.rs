//! Reproducible experiments: config files, comparison reports, parameter
//! scans, and CSV/JSON output.

mod config;
mod curves;
mod experiment;
mod output;
mod report;

pub use config::{
    CurveConfig, ExperimentConfig, Format, GkgConfig, GridConfig, OutputConfig, Setting, Solver, TimeSchedule,
    Tolerances,
};
pub use curves::{dispersion_table, emit_dispersion_curves, linspace, packet_width_table};
pub use experiment::{
    execute, run_experiment, run_gkg, scan, ExperimentOutcome, GkgOutcome, ScanOutcome, ScanParameter, ScanPoint,
};
pub use output::{fmt_f64, write_atomic, Cell, Csv, OutputSet};
pub use report::{Comparison, ComparisonReport, Conventions, Fingerprint};
