//! Seeded pseudo-random problem data.
//!
//! Vectors are smooth in the index variable (a few low sine modes) and
//! x-profiles are short cosine series, so discretization errors stay at
//! their asymptotic rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matfun::{C64, ZERO};

const VECTOR_MODES: usize = 4;
const PROFILE_MODES: usize = 4;

pub struct DataGenerator {
    rng: ChaCha8Rng,
}

impl DataGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn gaussian(&mut self) -> C64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        C64::new(re, im)
    }

    /// `Σ_m g_m sin(mπj/(n+1))/m²` with complex Gaussian `g_m`.
    pub fn smooth_vector(&mut self, n: usize) -> Vec<C64> {
        let coefs: Vec<C64> = (0..VECTOR_MODES).map(|_| self.gaussian()).collect();
        (1..=n)
            .map(|j| {
                let y = j as f64 / (n + 1) as f64;
                coefs.iter().enumerate().fold(ZERO, |acc, (m, g)| {
                    let k = (m + 1) as f64;
                    acc + g * (k * std::f64::consts::PI * y).sin() / (k * k)
                })
            })
            .collect()
    }

    /// `f(x) = Σ_k cos(kπx) v_k/(1+k)²` sampled on `x_i = i/(nx − 1)`.
    pub fn smooth_profile(&mut self, nx: usize, n: usize) -> Vec<Vec<C64>> {
        let vs: Vec<Vec<C64>> = (0..PROFILE_MODES).map(|_| self.smooth_vector(n)).collect();
        (0..nx)
            .map(|i| {
                let x = i as f64 / (nx - 1) as f64;
                let mut out = vec![ZERO; n];
                for (k, v) in vs.iter().enumerate() {
                    let w = (k as f64 * std::f64::consts::PI * x).cos() / ((1 + k) * (1 + k)) as f64;
                    for (o, z) in out.iter_mut().zip(v) {
                        *o += z * w;
                    }
                }
                out
            })
            .collect()
    }
}
