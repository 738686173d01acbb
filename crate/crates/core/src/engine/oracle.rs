//! Exact discretized-kernel exit times for the reduced one-dimensional map.
//!
//! On a midpoint grid over `I = [-s_sp, s_sp]` the one-step Gaussian kernel
//! `P(z_j | z_i) dz` is assembled with `f(z) = z - tau U'(z)`. Mass that lands
//! outside `I` is absorbed, so the mean exit time solves `t = 1 + K t`.

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::path::ReducedSystem;
use crate::scalar::{lit, to_f64, Real};

/// Kernel entries further than this many standard deviations are dropped
/// by the survival iteration (relative weight below 1e-42).
const BAND_SIGMAS: f64 = 14.0;

/// Largest tolerated `t * machine_epsilon` before the solve is reported as
/// numerically singular.
const MAX_CONDITION_LOSS: f64 = 1e-6;

/// Relative settling tolerance of the per-step exit hazard.
const HAZARD_RTOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KernelOracle<T> {
    /// Cell midpoints, odd count so the fixed point is a node.
    pub nodes: Vec<T>,
    pub cell: T,
    /// Row-major `K[i][j] = P(z_j | z_i) dz`.
    kernel: Vec<T>,
    epsilon: T,
}

/// Exit time statistics from the fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitMoments {
    pub mean_t: f64,
    pub mean_ln_t: f64,
    /// Asymptotic per-step survival factor.
    pub survival_factor: f64,
}

impl<T: Real> KernelOracle<T> {
    pub fn new(sys: &ReducedSystem<T>, epsilon: T, spacing: T) -> Result<Self> {
        if epsilon <= T::zero() {
            return Err(Error::EpsilonTooSmall {
                epsilon: to_f64(epsilon),
            });
        }
        let width = sys.s_sp + sys.s_sp;
        let mut n = (width / spacing).ceil().to_usize().unwrap_or(1).max(1);
        if n.is_multiple_of(2) {
            n += 1;
        }
        let cell = width / T::from_usize(n).expect("grid size");
        let half = lit::<T>(0.5);
        let nodes: Vec<T> = (0..n)
            .map(|i| -sys.s_sp + (T::from_usize(i).expect("index") + half) * cell)
            .collect();
        let norm = cell / (T::TAU() * epsilon).sqrt();
        let two_eps = epsilon + epsilon;
        let mut kernel = vec![T::zero(); n * n];
        for (i, &z) in nodes.iter().enumerate() {
            let fz = sys.drift_map(z);
            for (j, &s) in nodes.iter().enumerate() {
                let d = s - fz;
                kernel[i * n + j] = norm * (-(d * d) / two_eps).exp();
            }
        }
        Ok(Self {
            nodes,
            cell,
            kernel,
            epsilon,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn center(&self) -> usize {
        self.nodes.len() / 2
    }

    /// Mean exit time from every node: solves `(I - K) t = 1`.
    pub fn mean_exit_times(&self) -> Result<Vec<T>> {
        let n = self.len();
        let mut a: Vec<T> = self.kernel.iter().map(|&k| -k).collect();
        for i in 0..n {
            a[i * n + i] = a[i * n + i] + T::one();
        }
        let lu = Lu::factor(a, n);
        let floor = T::epsilon() * T::from_usize(64 * n).expect("size");
        let err = || Error::EpsilonTooSmall {
            epsilon: to_f64(self.epsilon),
        };
        if lu.min_pivot <= floor {
            return Err(err());
        }
        let t = lu.solve(&vec![T::one(); n]);
        if t.iter()
            .any(|v| !v.is_finite() || *v < T::one() - lit(1e-9))
        {
            return Err(err());
        }
        // condition number grows like the exit time itself
        let t_max = t.iter().fold(T::zero(), |m, &v| m.max(v));
        if t_max * T::epsilon() > lit(MAX_CONDITION_LOSS) {
            return Err(err());
        }
        Ok(t)
    }

    /// Mean exit time starting at the fixed point.
    pub fn mean_exit_time(&self) -> Result<T> {
        Ok(self.mean_exit_times()?[self.center()])
    }

    /// Mean of `T` and of `ln T` from the fixed point, from the survival
    /// probabilities `S_n = K^n 1`. Once the decay is geometric the tail is
    /// summed in closed form per term.
    pub fn exit_moments(&self) -> Result<ExitMoments> {
        let n = self.len();
        let c = self.center();
        let reach = lit::<T>(BAND_SIGMAS) * self.epsilon.sqrt();
        let bands: Vec<(usize, usize)> = (0..n)
            .map(|i| {
                let row = &self.kernel[i * n..(i + 1) * n];
                let lo = self
                    .nodes
                    .iter()
                    .position(|&s| s >= self.nodes[i] - reach)
                    .unwrap_or(0);
                let hi = self
                    .nodes
                    .iter()
                    .rposition(|&s| s <= self.nodes[i] + reach)
                    .unwrap_or(n - 1);
                // trim entries that underflowed
                let lo = (lo..=hi).find(|&j| row[j] > T::zero()).unwrap_or(lo);
                let hi = (lo..=hi).rev().find(|&j| row[j] > T::zero()).unwrap_or(hi);
                (lo, hi)
            })
            .collect();
        let mut s = vec![1.0f64; n];
        let mut next = vec![0.0f64; n];
        let k64: Vec<f64> = self.kernel.iter().map(|&v| to_f64(v)).collect();
        let mut mean_t = 1.0; // S_0
        let mut mean_ln = 0.0;
        let mut prev_ratio = f64::NAN;
        let mut stable = 0;
        for step in 1..=5_000_000u64 {
            for i in 0..n {
                let (lo, hi) = bands[i];
                let row = &k64[i * n..(i + 1) * n];
                next[i] = row[lo..=hi]
                    .iter()
                    .zip(&s[lo..=hi])
                    .map(|(k, v)| k * v)
                    .sum();
            }
            let (before, after) = (s[c], next[c]);
            mean_ln += (step as f64).ln() * (before - after);
            mean_t += after;
            std::mem::swap(&mut s, &mut next);
            if after < 1e-18 {
                return Ok(ExitMoments {
                    mean_t,
                    mean_ln_t: mean_ln,
                    survival_factor: after / before,
                });
            }
            let ratio = after / before;
            // the hazard 1 - ratio must settle, not just the ratio: early on
            // the ratio sits at 1 while the hazard is still growing
            let (hazard, prev_hazard) = (1.0 - ratio, 1.0 - prev_ratio);
            if hazard > 0.0 && (hazard - prev_hazard).abs() <= HAZARD_RTOL * hazard {
                stable += 1;
            } else {
                stable = 0;
            }
            prev_ratio = ratio;
            if stable >= 50 {
                // S_{step + k} = after * ratio^k
                let (mut surv, mut m) = (after, step);
                while surv > 1e-18 * (1.0 - ratio).max(1e-300) {
                    m += 1;
                    let nxt = surv * ratio;
                    mean_ln += (m as f64).ln() * (surv - nxt);
                    mean_t += nxt;
                    surv = nxt;
                    if m - step > 2_000_000_000 {
                        return Err(Error::EpsilonTooSmall {
                            epsilon: to_f64(self.epsilon),
                        });
                    }
                }
                return Ok(ExitMoments {
                    mean_t,
                    mean_ln_t: mean_ln,
                    survival_factor: ratio,
                });
            }
        }
        Err(Error::EpsilonTooSmall {
            epsilon: to_f64(self.epsilon),
        })
    }
}

/// Mean exit time of the reduced map from the fixed point.
pub fn oracle_mfpt_1d<T: Real>(sys: &ReducedSystem<T>, epsilon: T, spacing: T) -> Result<T> {
    KernelOracle::new(sys, epsilon, spacing)?.mean_exit_time()
}

/// The spacing rule `sqrt(epsilon) / 10`.
pub fn default_oracle_spacing<T: Real>(epsilon: T) -> T {
    epsilon.sqrt() / lit(10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapParams;
    use crate::path::{reduced_system_for, PathOptions};

    fn sys(r: f64) -> ReducedSystem<f64> {
        let p = MapParams::from_ratio(0.05, r, 0.25, 0.5, 0.0).unwrap();
        reduced_system_for(&p, &PathOptions::default()).unwrap()
    }

    #[test]
    fn infinite_noise_limit() {
        let sys = sys(1.0);
        let eps = 100.0 * sys.s_sp * sys.s_sp;
        let t = oracle_mfpt_1d(&sys, eps, eps.sqrt() / 10.0).unwrap();
        assert!(t > 1.0 && t < 1.2, "t = {t}");
    }

    #[test]
    fn grid_refinement_converges() {
        let sys = sys(1.0);
        let eps = 0.05 / 3.0;
        let h = default_oracle_spacing(eps);
        let coarse = oracle_mfpt_1d(&sys, eps, h).unwrap();
        let fine = oracle_mfpt_1d(&sys, eps, h / 2.0).unwrap();
        assert!(((coarse - fine) / fine).abs() < 0.005, "{coarse} vs {fine}");
    }

    #[test]
    fn survival_sum_matches_linear_solve() {
        for (r, ratio) in [(0.9, 3.0), (1.2, 7.0)] {
            let sys = sys(r);
            let eps = 0.05 / ratio;
            let oracle = KernelOracle::new(&sys, eps, default_oracle_spacing(eps)).unwrap();
            let t = oracle.mean_exit_time().unwrap();
            let m = oracle.exit_moments().unwrap();
            assert!(((m.mean_t - t) / t).abs() < 1e-6, "{} vs {t}", m.mean_t);
            assert!(m.mean_ln_t < t.ln());
            if ratio > 5.0 {
                // high barrier: the exit time is nearly geometric
                assert!(((1.0 - m.survival_factor) * t - 1.0).abs() < 0.01);
            }
        }
    }

    #[test]
    fn exit_time_is_symmetric() {
        let sys = sys(1.1);
        let eps = 0.025;
        let oracle = KernelOracle::new(&sys, eps, default_oracle_spacing(eps)).unwrap();
        let t = oracle.mean_exit_times().unwrap();
        let n = t.len();
        for i in 0..n / 2 {
            assert!((t[i] - t[n - 1 - i]).abs() <= 1e-8 * t[i]);
        }
        let c = oracle.center();
        assert!(oracle.nodes[c].abs() < 1e-12);
        assert!(t.iter().all(|&v| v <= t[c] + 1e-9));
    }

    #[test]
    fn tiny_noise_is_reported() {
        let sys = sys(1.0);
        let eps = 1e-3;
        assert!(matches!(
            oracle_mfpt_1d(&sys, eps, default_oracle_spacing(eps)),
            Err(Error::EpsilonTooSmall { .. })
        ));
        assert!(KernelOracle::new(&sys, 0.0, 0.01).is_err());
    }
}
