//! Monte Carlo escape times in the full two-dimensional map.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    coexisting_fixed_points, step_transformed, CriticalPoint, MapParams, State2D,
};
use crate::error::{Error, Result};
use crate::noise::NoiseStream;
use crate::scalar::{lit, Real};

/// Default cap on the number of steps per trial.
pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

/// Largest censored fraction an estimate may carry and still be used.
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

/// An oriented line: `normal . (z - anchor)`, negative on the fixed point side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedLine<T> {
    pub anchor: State2D<T>,
    pub normal: (T, T),
}

impl<T: Real> OrientedLine<T> {
    #[inline]
    pub fn signed_distance(&self, z: &State2D<T>) -> T {
        self.normal.0 * (z.x - self.anchor.x) + self.normal.1 * (z.y - self.anchor.y)
    }
}

/// Two lines through the mirrored saddles, each perpendicular to the
/// segment joining the fixed point with its saddle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingBoundary<T> {
    pub plus: OrientedLine<T>,
    pub minus: OrientedLine<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExitBranch {
    Plus,
    Minus,
}

impl<T: Real> AbsorbingBoundary<T> {
    pub fn new(fp: &CriticalPoint<T>, sps: (&CriticalPoint<T>, &CriticalPoint<T>)) -> Result<Self> {
        let line = |sp: &CriticalPoint<T>| {
            let (dx, dy) = (sp.location.x - fp.location.x, sp.location.y - fp.location.y);
            let n = dx.hypot(dy);
            if n <= T::epsilon() {
                return Err(Error::DegenerateBoundary);
            }
            Ok(OrientedLine {
                anchor: sp.location,
                normal: (dx / n, dy / n),
            })
        };
        let (a, b) = (line(sps.0)?, line(sps.1)?);
        let (plus, minus) = if sps.0.location.y >= sps.1.location.y {
            (a, b)
        } else {
            (b, a)
        };
        Ok(Self { plus, minus })
    }

    /// The exit branch if `z` is on or beyond either line.
    #[inline]
    pub fn hit(&self, z: &State2D<T>) -> Option<ExitBranch> {
        let dp = self.plus.signed_distance(z);
        let dm = self.minus.signed_distance(z);
        if dp >= T::zero() || dm >= T::zero() {
            Some(if dp >= dm {
                ExitBranch::Plus
            } else {
                ExitBranch::Minus
            })
        } else {
            None
        }
    }
}

/// One trial's discrete hitting time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FptSample {
    pub trial: u64,
    /// Steps until the first hit; equals the cap when censored.
    pub steps: u64,
    /// `None` when censored.
    pub branch: Option<ExitBranch>,
    pub censored: bool,
}

/// Iterates the noisy transformed map from `start` until the boundary is hit.
pub fn run_trial<T: Real>(
    p: &MapParams<T>,
    boundary: &AbsorbingBoundary<T>,
    start: State2D<T>,
    noise: &mut NoiseStream<T>,
    cap: u64,
) -> Result<FptSample> {
    if boundary.hit(&start).is_some() {
        return Err(Error::StartOutside);
    }
    let mut z = start;
    for n in 1..=cap {
        z = step_transformed(&z, p, Some(noise.sample_pair()));
        if let Some(branch) = boundary.hit(&z) {
            return Ok(FptSample {
                trial: noise.stream_id(),
                steps: n,
                branch: Some(branch),
                censored: false,
            });
        }
    }
    Ok(FptSample {
        trial: noise.stream_id(),
        steps: cap,
        branch: None,
        censored: true,
    })
}

/// Aggregated statistics of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfptEstimate {
    pub trials: usize,
    /// Mean of `ln T` over uncensored trials.
    pub mean_ln_t: f64,
    pub stderr_ln_t: f64,
    pub mean_t: f64,
    pub stderr_t: f64,
    pub censored: usize,
    pub plus_exits: usize,
    pub minus_exits: usize,
}

impl MfptEstimate {
    pub fn from_samples(samples: &[FptSample]) -> Self {
        let done: Vec<f64> = samples
            .iter()
            .filter(|s| !s.censored)
            .map(|s| s.steps as f64)
            .collect();
        let (mean_ln_t, stderr_ln_t) = mean_and_stderr(done.iter().map(|t| t.ln()));
        let (mean_t, stderr_t) = mean_and_stderr(done.iter().copied());
        let count = |b| samples.iter().filter(|s| s.branch == Some(b)).count();
        Self {
            trials: samples.len(),
            mean_ln_t,
            stderr_ln_t,
            mean_t,
            stderr_t,
            censored: samples.len() - done.len(),
            plus_exits: count(ExitBranch::Plus),
            minus_exits: count(ExitBranch::Minus),
        }
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.censored as f64 / self.trials as f64
        }
    }

    pub fn reliable(&self) -> bool {
        self.trials > 0 && self.censored_fraction() <= MAX_CENSORED_FRACTION
    }
}

/// Sample mean and standard error of the mean, in input order.
pub(crate) fn mean_and_stderr(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = xs.collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Escape from the `+x` fixed point through either adjacent saddle.
#[derive(Debug, Clone)]
pub struct EscapeProblem<T> {
    pub params: MapParams<T>,
    pub fixed_point: CriticalPoint<T>,
    pub saddles: (CriticalPoint<T>, CriticalPoint<T>),
    pub boundary: AbsorbingBoundary<T>,
}

impl<T: Real> EscapeProblem<T> {
    pub fn new(params: MapParams<T>) -> Result<Self> {
        let fps = coexisting_fixed_points(&params)?;
        let fp = *fps.x_axis(true);
        let plus = *fps.saddle(true, true).expect("saddle");
        let minus = *fps.saddle(true, false).expect("saddle");
        let boundary = AbsorbingBoundary::new(&fp, (&plus, &minus))?;
        Ok(Self {
            params,
            fixed_point: fp,
            saddles: (plus, minus),
            boundary,
        })
    }

    /// Runs trials `0..trials` in parallel; the result is ordered by trial index.
    pub fn run_trials(&self, trials: usize, seed: u64, cap: u64) -> Result<Vec<FptSample>> {
        let start = self.fixed_point.location;
        (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut ns = NoiseStream::new(seed, i, self.params.epsilon)?;
                run_trial(&self.params, &self.boundary, start, &mut ns, cap)
            })
            .collect()
    }

    pub fn estimate(&self, trials: usize, seed: u64, cap: u64) -> Result<MfptEstimate> {
        let samples = self.run_trials(trials, seed, cap)?;
        let est = MfptEstimate::from_samples(&samples);
        if !est.reliable() {
            log::warn!(
                "{} of {} trials censored at cap {cap}; estimate is unreliable",
                est.censored,
                est.trials
            );
        }
        Ok(est)
    }
}

/// Monte Carlo mean first passage time from the `+x` fixed point.
pub fn estimate_mfpt<T: Real>(
    p: &MapParams<T>,
    trials: usize,
    seed: u64,
    cap: u64,
) -> Result<MfptEstimate> {
    EscapeProblem::new(*p)?.estimate(trials, seed, cap)
}

/// Writes samples as JSON lines with fields `trial, steps, branch, censored`.
pub fn write_samples_jsonl<W: Write>(samples: &[FptSample], mut w: W) -> Result<()> {
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Point a fraction `frac` of the way from the fixed point to a saddle.
pub fn point_toward<T: Real>(fp: &State2D<T>, sp: &State2D<T>, frac: f64) -> State2D<T> {
    let f: T = lit(frac);
    State2D::rescaled(fp.x + f * (sp.x - fp.x), fp.y + f * (sp.y - fp.y))
}
