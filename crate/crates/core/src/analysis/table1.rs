//! Theory versus simulated scaling slopes, one row per `tau12`.

use serde::{Deserialize, Serialize};
use std::io::Write;

use super::regression::{fit_scaling, RegressionResult};
use super::sweep::{run_sweep, RunRecord, SweepSpec};
use crate::error::Result;
use crate::theory::critical_potentials;

/// Slopes closer than this always pass, whatever the fit error.
pub const SLOPE_FLOOR: f64 = 0.05;
pub const SLOPE_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub tau12: f64,
    pub theory_slope: f64,
    pub fit: RegressionResult,
    pub tolerance: f64,
    pub pass: bool,
}

impl Table1Row {
    pub fn deviation(&self) -> f64 {
        self.fit.slope - self.theory_slope
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub records: Vec<RunRecord>,
}

impl Table1 {
    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

/// Compares stored records with the closed-form slopes `2 dU`.
pub fn compare_with_theory(
    spec: &SweepSpec,
    records: &[RunRecord],
    weighted: bool,
) -> Result<Vec<Table1Row>> {
    spec.tau12_list
        .iter()
        .map(|&tau12| {
            let series: Vec<RunRecord> = records
                .iter()
                .filter(|r| r.tau12 == tau12)
                .cloned()
                .collect();
            let fit = fit_scaling(&series, weighted)?;
            let theory_slope = critical_potentials(&spec.params(tau12, 0.0)?)?.slope();
            let tolerance = (SLOPE_SIGMAS * fit.slope_stderr).max(SLOPE_FLOOR);
            Ok(Table1Row {
                tau12,
                theory_slope,
                fit,
                tolerance,
                pass: (fit.slope - theory_slope).abs() <= tolerance,
            })
        })
        .collect()
}

/// Runs the sweep and compares every series with theory.
pub fn reproduce_table1(spec: &SweepSpec) -> Result<Table1> {
    let records = run_sweep(spec)?;
    let rows = compare_with_theory(spec, &records, false)?;
    Ok(Table1 { rows, records })
}

pub fn write_table1_csv<W: Write>(rows: &[Table1Row], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "tau12,theory_slope,sim_slope,slope_stderr,intercept,intercept_stderr,tolerance,pass"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.tau12,
            r.theory_slope,
            r.fit.slope,
            r.fit.slope_stderr,
            r.fit.intercept,
            r.fit.intercept_stderr,
            r.tolerance,
            r.pass
        )?;
    }
    Ok(())
}
