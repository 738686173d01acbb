//! Long quasi-stationary runs of the reduced map.

use serde::{Deserialize, Serialize};

use crate::noise::NoiseStream;
use crate::path::ReducedSystem;
use crate::scalar::{to_f64, Real};

/// Normalized histogram on `[lo, hi]` with equal-width bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    /// Probability density per bin; `sum(density) * width == 1`.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    pub fn mode(&self) -> usize {
        self.density
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |best, (i, &d)| if d > best.1 { (i, d) } else { best },
            )
            .0
    }

    /// `sum |density_i - other_i| * width`.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        assert_eq!(other.len(), self.bins());
        self.density
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.width()
    }
}

/// Histogram of a long reduced-map run over `[-s_sp, s_sp]`. A trajectory
/// that leaves the domain is re-injected at the fixed point.
pub fn empirical_density_1d<T: Real>(
    sys: &ReducedSystem<T>,
    noise: &mut NoiseStream<T>,
    steps: u64,
    bins: usize,
) -> Histogram {
    let hi = to_f64(sys.s_sp);
    let lo = -hi;
    let scale = bins as f64 / (hi - lo);
    let mut counts = vec![0u64; bins];
    let mut s = sys.s_fp;
    for _ in 0..steps {
        s = sys.step(s, Some(noise));
        if s.abs() >= sys.s_sp {
            s = sys.s_fp;
        }
        let k = ((to_f64(s) - lo) * scale) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let norm = steps as f64 * (hi - lo) / bins as f64;
    Histogram {
        lo,
        hi,
        density: counts.iter().map(|&c| c as f64 / norm).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::MapParams;
    use crate::path::{reduced_system_for, PathOptions};

    #[test]
    fn histogram_peaks_at_fixed_point_and_is_symmetric() {
        let p = MapParams::from_ratio(0.05, 1.0, 0.25, 0.5, 0.0).unwrap();
        let sys = reduced_system_for(&p, &PathOptions::default()).unwrap();
        let mut ns = NoiseStream::new(11, 0, 0.01).unwrap();
        let bins = 41;
        let h = empirical_density_1d(&sys, &mut ns, 2_000_000, bins);
        assert_eq!(h.mode(), bins / 2);
        let total: f64 = h.density.iter().sum::<f64>() * h.width();
        assert!((total - 1.0).abs() < 1e-12);
        let asym: f64 = (0..bins / 2)
            .map(|i| (h.density[i] - h.density[bins - 1 - i]).abs())
            .sum::<f64>()
            * h.width();
        assert!(asym < 0.03, "asymmetry {asym}");
    }
}
