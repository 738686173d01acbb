//! Parameter sweeps over `(tau12, tau / epsilon)` and their JSON-lines records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Deserializer, Serialize};

use crate::dynamics::MapParams;
use crate::engine::{EscapeProblem, MfptEstimate, DEFAULT_STEP_CAP};
use crate::error::{Error, Result};

pub const RECORD_SCHEMA_VERSION: u32 = 1;
pub const MIN_TRIALS: usize = 100;
pub const MAX_TRIALS: usize = 1_000_000;

/// Grid of experiments sharing `a`, `b` and the base rate `tau = tau2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    pub tau12_list: Vec<f64>,
    /// Values of `tau / epsilon`.
    pub ratio_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub cap: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            a: 0.25,
            b: 0.5,
            tau: 0.05,
            tau12_list: vec![0.8, 0.9, 1.0, 1.1, 1.2],
            ratio_list: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0],
            trials: 500,
            seed: 7,
            cap: DEFAULT_STEP_CAP,
            out_dir: None,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(MIN_TRIALS..=MAX_TRIALS).contains(&self.trials) {
            return bad(
                "trials",
                format!("{} is outside [{MIN_TRIALS}, {MAX_TRIALS}]", self.trials),
            );
        }
        if self.tau12_list.is_empty() {
            return bad("tau12_list", "empty".into());
        }
        if self.ratio_list.is_empty() {
            return bad("ratio_list", "empty".into());
        }
        if let Some(r) = self
            .ratio_list
            .iter()
            .find(|r| !(r.is_finite() && **r > 0.0))
        {
            return bad("ratio_list", format!("{r} is not a positive ratio"));
        }
        if self.cap == 0 {
            return bad("cap", "must be positive".into());
        }
        for r in &self.ratio_list {
            if *r < 1.0 {
                log::warn!("tau/epsilon = {r} is outside the weak-noise regime");
            }
        }
        for &r in &self.tau12_list {
            let p = self.params(r, 0.0)?;
            if !p.in_coexistence_window() {
                return Err(Error::NoCoexistence {
                    tau12: r,
                    a: self.a,
                    b: self.b,
                });
            }
        }
        Ok(())
    }

    pub fn params(&self, tau12: f64, epsilon: f64) -> Result<MapParams<f64>> {
        MapParams::from_ratio(self.tau, tau12, self.a, self.b, epsilon)
    }

    /// Grid points in emission order: `tau12` outer, ratio inner.
    pub fn grid(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.tau12_list
            .iter()
            .flat_map(move |&r| self.ratio_list.iter().map(move |&q| (r, q)))
            .enumerate()
            .map(|(i, (r, q))| (i, r, q))
    }
}

/// Seed of grid point `index`, so that points draw independent noise.
pub fn point_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn nan_from_null<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One Monte Carlo estimate at a single grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub tau12: f64,
    pub a: f64,
    pub b: f64,
    pub tau: f64,
    /// `tau / epsilon`.
    pub ratio: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub cap: u64,
    pub trials: usize,
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_ln_t: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub stderr_ln_t: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_t: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub stderr_t: f64,
    pub censored: usize,
    pub plus_exits: usize,
    pub minus_exits: usize,
    pub reliable: bool,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub code_version: String,
}

impl RunRecord {
    pub fn new(spec: &SweepSpec, tau12: f64, ratio: f64, seed: u64, est: &MfptEstimate) -> Self {
        Self {
            schema_version: RECORD_SCHEMA_VERSION,
            tau12,
            a: spec.a,
            b: spec.b,
            tau: spec.tau,
            ratio,
            epsilon: spec.tau / ratio,
            seed,
            cap: spec.cap,
            trials: est.trials,
            mean_ln_t: est.mean_ln_t,
            stderr_ln_t: est.stderr_ln_t,
            mean_t: est.mean_t,
            stderr_t: est.stderr_t,
            censored: est.censored,
            plus_exits: est.plus_exits,
            minus_exits: est.minus_exits,
            reliable: est.reliable(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Usable for regression: reliable and finite.
    pub fn usable(&self) -> bool {
        self.reliable && self.mean_ln_t.is_finite() && self.stderr_ln_t.is_finite()
    }

    /// Regression ordinate `<ln T> + ln tau`.
    pub fn scaled_ln_t(&self) -> f64 {
        self.mean_ln_t + self.tau.ln()
    }
}

/// Runs every grid point of `spec` in order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RunRecord>> {
    run_sweep_with(spec, |_| {})
}

/// Like [`run_sweep`], calling `on_record` as each record is produced.
pub fn run_sweep_with(
    spec: &SweepSpec,
    mut on_record: impl FnMut(&RunRecord),
) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.tau12_list.len() * spec.ratio_list.len());
    let mut problem: Option<(f64, EscapeProblem<f64>)> = None;
    for (i, tau12, ratio) in spec.grid() {
        let eps = spec.tau / ratio;
        let prob = match &problem {
            Some((r, prob)) if *r == tau12 => EscapeProblem {
                params: prob.params.with_epsilon(eps),
                ..prob.clone()
            },
            _ => {
                let prob = EscapeProblem::new(spec.params(tau12, eps)?)?;
                problem = Some((tau12, prob.clone()));
                prob
            }
        };
        let seed = point_seed(spec.seed, i);
        let est = prob.estimate(spec.trials, seed, spec.cap)?;
        let rec = RunRecord::new(spec, tau12, ratio, seed, &est);
        log::info!(
            "tau12 {tau12} tau/eps {ratio}: <ln T> = {:.4} +- {:.4} ({} censored)",
            rec.mean_ln_t,
            rec.stderr_ln_t,
            rec.censored
        );
        on_record(&rec);
        out.push(rec);
    }
    Ok(out)
}

/// Appends records to a JSON-lines file, one record per line.
pub fn persist_records(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = File::options().create(true).append(true).open(path)?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// A skipped line of a records file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadWarning {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

/// Reads a JSON-lines records file. Blank lines are ignored; malformed lines
/// and unknown schema versions are skipped and reported.
pub fn load_records(path: &Path) -> Result<(Vec<RunRecord>, Vec<LoadWarning>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let message = match serde_json::from_str::<RunRecord>(&line) {
            Ok(r) if r.schema_version == RECORD_SCHEMA_VERSION => {
                records.push(r);
                continue;
            }
            Ok(r) => format!("unsupported schema_version {}", r.schema_version),
            Err(e) => e.to_string(),
        };
        log::warn!("{}:{}: skipped record: {message}", path.display(), i + 1);
        warnings.push(LoadWarning {
            line: i + 1,
            message,
        });
    }
    Ok((records, warnings))
}

/// Plot data: `tau12,ratio,epsilon,mean_ln_t,stderr_ln_t,scaled_ln_t,mean_t,censored,reliable`.
pub fn write_records_csv<W: Write>(records: &[RunRecord], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "tau12,ratio,epsilon,mean_ln_t,stderr_ln_t,scaled_ln_t,mean_t,censored,reliable"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.tau12,
            r.ratio,
            r.epsilon,
            r.mean_ln_t,
            r.stderr_ln_t,
            r.scaled_ln_t(),
            r.mean_t,
            r.censored,
            r.reliable
        )?;
    }
    Ok(())
}
