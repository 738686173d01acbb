//! Straight-line fits of `<ln T> + ln tau` against `tau / epsilon`.

use serde::{Deserialize, Serialize};
use std::io::Write;

use super::sweep::RunRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Least squares line through `(x, y)`.
///
/// Without weights the standard errors come from the residual variance.
/// With weights `w_i = 1 / sigma_i^2` the `sigma_i` are taken as known and
/// the errors follow from them alone.
pub fn fit_line(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            assert_eq!(w.len(), n);
            if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "weights",
                    reason: format!("{bad} is not a positive weight"),
                });
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(y).map(|(w, y)| w * y).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: "all abscissae coincide".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = (0..n)
        .map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2))
        .sum::<f64>()
        .max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    let scale = match weights {
        Some(_) => 1.0,
        None => ssr / (n - 2) as f64,
    };
    Ok(LineFit {
        slope,
        slope_stderr: (scale / sxx).sqrt(),
        intercept,
        intercept_stderr: (scale * (1.0 / sw + mx * mx / sxx)).sqrt(),
        r_squared,
        points_used: n,
    })
}

/// Scaling fit for one `tau12` series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub tau12: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Estimates `ln C`.
    pub intercept: f64,
    pub intercept_stderr: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fits `y = <ln T> + ln tau` against `x = tau / epsilon` over the usable
/// records, which must all share one `tau12`.
pub fn fit_scaling(records: &[RunRecord], weighted: bool) -> Result<RegressionResult> {
    let tau12 = match records.first() {
        Some(r) => r.tau12,
        None => return Err(Error::TooFewPoints(0)),
    };
    if let Some(r) = records.iter().find(|r| r.tau12 != tau12) {
        return Err(Error::InvalidParameter {
            name: "tau12",
            reason: format!("records mix tau12 = {tau12} and {}", r.tau12),
        });
    }
    let used: Vec<&RunRecord> = records.iter().filter(|r| r.usable()).collect();
    let x: Vec<f64> = used.iter().map(|r| r.ratio).collect();
    let y: Vec<f64> = used.iter().map(|r| r.scaled_ln_t()).collect();
    let w: Option<Vec<f64>> =
        weighted.then(|| used.iter().map(|r| r.stderr_ln_t.powi(-2)).collect());
    let fit = fit_line(&x, &y, w.as_deref())?;
    Ok(RegressionResult {
        tau12,
        slope: fit.slope,
        slope_stderr: fit.slope_stderr,
        intercept: fit.intercept,
        intercept_stderr: fit.intercept_stderr,
        r_squared: fit.r_squared,
        points_used: fit.points_used,
    })
}

/// Splits records by `tau12`, in order of first appearance, and fits each series.
pub fn fit_all(records: &[RunRecord], weighted: bool) -> Result<Vec<RegressionResult>> {
    let mut keys: Vec<f64> = Vec::new();
    for r in records {
        if !keys.contains(&r.tau12) {
            keys.push(r.tau12);
        }
    }
    keys.iter()
        .map(|&k| {
            let series: Vec<RunRecord> = records.iter().filter(|r| r.tau12 == k).cloned().collect();
            fit_scaling(&series, weighted)
        })
        .collect()
}

pub fn write_regression_csv<W: Write>(fits: &[RegressionResult], mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "tau12,slope,slope_stderr,intercept,intercept_stderr,r_squared,points_used"
    )?;
    for f in fits {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            f.tau12,
            f.slope,
            f.slope_stderr,
            f.intercept,
            f.intercept_stderr,
            f.r_squared,
            f.points_used
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sweep::{SweepSpec, RECORD_SCHEMA_VERSION};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_line() {
        let x = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let y: Vec<f64> = x.iter().map(|x| 0.66 * x + 1.0).collect();
        let f = fit_line(&x, &y, None).unwrap();
        assert!((f.slope - 0.66).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-7);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_line(&[1.0, 2.0], &[1.0, 2.0], None),
            Err(Error::TooFewPoints(2))
        ));
        assert!(fit_line(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], None).is_err());
        assert!(matches!(
            fit_scaling(&[], false),
            Err(Error::TooFewPoints(0))
        ));
    }

    #[test]
    fn known_textbook_values() {
        // y = 1 + 2x with residuals (0.1, -0.2, 0.1, 0.0)
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.1, 2.8, 5.1, 7.0];
        let f = fit_line(&x, &y, None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12, "{}", f.slope);
        assert!((f.intercept - 1.0).abs() < 1e-12, "{}", f.intercept);
        let ssr: f64 = (0..4)
            .map(|i| (y[i] - f.intercept - f.slope * x[i]).powi(2))
            .sum();
        assert!((f.slope_stderr - (ssr / 2.0 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_match_known_sigma_errors() {
        let x = [2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 2.0, 2.5, 4.0];
        let sigma: f64 = 0.2;
        let w = vec![sigma.powi(-2); 4];
        let a = fit_line(&x, &y, None).unwrap();
        let b = fit_line(&x, &y, Some(&w)).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!((b.slope_stderr - sigma / 5.0f64.sqrt()).abs() < 1e-12);
    }

    // Noisy synthetic series: the fitted slope stays inside three standard
    // deviations of its sampling distribution in at least 99% of repetitions.
    #[test]
    fn synthetic_coverage() {
        let x = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let sxx: f64 = 17.5;
        let sigma = 0.05;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let reps = 1000;
        let (mut inside, mut inside_est, mut mean_se) = (0, 0, 0.0);
        for _ in 0..reps {
            let y: Vec<f64> = x
                .iter()
                .map(|x| 0.66 * x - 0.5 + noise.sample(&mut rng))
                .collect();
            let f = fit_line(&x, &y, None).unwrap();
            if (f.slope - 0.66).abs() <= 3.0 * sigma / sxx.sqrt() {
                inside += 1;
            }
            let w = vec![sigma.powi(-2); x.len()];
            let fw = fit_line(&x, &y, Some(&w)).unwrap();
            if (fw.slope - 0.66).abs() <= 3.0 * fw.slope_stderr {
                inside_est += 1;
            }
            mean_se += f.slope_stderr / reps as f64;
        }
        assert!(inside >= 990, "{inside}");
        assert!(inside_est >= 990, "{inside_est}");
        let truth = sigma / sxx.sqrt();
        assert!(
            (mean_se - truth).abs() < 0.1 * truth,
            "{mean_se} vs {truth}"
        );
    }

    fn rec(tau12: f64, ratio: f64, mean_ln_t: f64) -> RunRecord {
        let spec = SweepSpec::default();
        RunRecord {
            schema_version: RECORD_SCHEMA_VERSION,
            tau12,
            a: spec.a,
            b: spec.b,
            tau: spec.tau,
            ratio,
            epsilon: spec.tau / ratio,
            seed: 0,
            cap: spec.cap,
            trials: 500,
            mean_ln_t,
            stderr_ln_t: 0.05,
            mean_t: mean_ln_t.exp(),
            stderr_t: 1.0,
            censored: 0,
            plus_exits: 250,
            minus_exits: 250,
            reliable: true,
            timestamp: 0,
            code_version: String::new(),
        }
    }

    #[test]
    fn scaling_fit_uses_scaled_ordinate_and_skips_unreliable() {
        let ln_tau = 0.05f64.ln();
        let mut recs: Vec<RunRecord> = (2..=7)
            .map(|q| rec(1.0, q as f64, 0.66 * q as f64 + 1.5 - ln_tau))
            .collect();
        recs[3].reliable = false;
        recs[3].mean_ln_t = 100.0;
        let f = fit_scaling(&recs, false).unwrap();
        assert_eq!(f.points_used, 5);
        assert!((f.slope - 0.66).abs() < 1e-12);
        assert!((f.intercept - 1.5).abs() < 1e-12);
        let fw = fit_scaling(&recs, true).unwrap();
        assert!((fw.slope - 0.66).abs() < 1e-12);
    }

    #[test]
    fn mixed_series_rejected_and_split() {
        let mut recs: Vec<RunRecord> = (2..=4).map(|q| rec(1.0, q as f64, q as f64)).collect();
        recs.extend((2..=4).map(|q| rec(1.2, q as f64, 2.0 * q as f64)));
        assert!(fit_scaling(&recs, false).is_err());
        let fits = fit_all(&recs, false).unwrap();
        assert_eq!(fits.len(), 2);
        assert!((fits[1].slope - 2.0).abs() < 1e-12);
        let mut buf = Vec::new();
        write_regression_csv(&fits, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
