//! Counter-based Gaussian noise streams.
//!
//! Each stream is a ChaCha8 keystream selected by `(master_seed, stream_id)`,
//! so a trial's noise depends only on its index and never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

#[derive(Debug, Clone)]
pub struct NoiseStream<T> {
    master_seed: u64,
    stream_id: u64,
    epsilon: T,
    std_dev: f64,
    rng: ChaCha8Rng,
}

impl<T: Real> NoiseStream<T> {
    /// `epsilon` is the variance of each draw.
    pub fn new(master_seed: u64, stream_id: u64, epsilon: T) -> Result<Self> {
        if epsilon < T::zero() {
            return Err(Error::NegativeVariance(to_f64(epsilon)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Ok(Self {
            master_seed,
            stream_id,
            epsilon,
            std_dev: to_f64(epsilon).sqrt(),
            rng,
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// One draw from `N(0, epsilon)`.
    #[inline]
    pub fn sample(&mut self) -> T {
        if self.std_dev == 0.0 {
            return T::zero();
        }
        let z: f64 = self.rng.sample(StandardNormal);
        lit(self.std_dev * z)
    }

    #[inline]
    pub fn sample_pair(&mut self) -> (T, T) {
        (self.sample(), self.sample())
    }
}
