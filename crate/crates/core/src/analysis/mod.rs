//! Experiment orchestration: sweeps, scaling fits and the slope table.

pub mod regression;
pub mod sweep;
pub mod table1;

pub use regression::{
    fit_all, fit_line, fit_scaling, write_regression_csv, LineFit, RegressionResult,
};
pub use sweep::{
    load_records, persist_records, point_seed, run_sweep, run_sweep_with, write_records_csv,
    LoadWarning, RunRecord, SweepSpec, RECORD_SCHEMA_VERSION,
};
pub use table1::{compare_with_theory, reproduce_table1, write_table1_csv, Table1, Table1Row};
