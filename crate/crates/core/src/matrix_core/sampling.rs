use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::decomp::{is_invertible, Tolerances};
use super::dense::{CMatrix, C64};
use crate::error::{Error, Result};

/// Seeded random stream. Identical seeds give identical sequences on every
/// platform (ChaCha8).
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent sub-stream `index` of `seed`. Does not depend on how much
    /// of any other stream has been consumed.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Rng { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_angle(&mut self) -> f64 {
        self.uniform() * std::f64::consts::TAU
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<bool>()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.inner);
    }

    /// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let re: f64 = self.inner.sample(StandardNormal);
        let im: f64 = self.inner.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Complex scalar with modulus in `[0.5, 2]` and uniform phase.
    pub fn nonzero_scalar(&mut self) -> C64 {
        let r = 0.5 + 1.5 * self.uniform();
        C64::from_polar(r, self.uniform_angle())
    }
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians.
pub fn sample_gaussian(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}

pub fn sample_ginibre(n: usize, rng: &mut Rng) -> CMatrix {
    sample_gaussian(n, n, rng)
}

pub const INVERTIBLE_RETRY_BUDGET: usize = 100;

pub fn sample_invertible(n: usize, rng: &mut Rng, tol: &Tolerances) -> Result<CMatrix> {
    for _ in 0..INVERTIBLE_RETRY_BUDGET {
        let m = sample_ginibre(n, rng);
        if is_invertible(&m, tol)? {
            return Ok(m);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no invertible {n}x{n} Ginibre sample in {INVERTIBLE_RETRY_BUDGET} draws"
    )))
}

/// Random `n x n` matrix of rank exactly `r` (generically): a Gaussian
/// `n x r` times a Gaussian `r x n`.
pub fn sample_rank(n: usize, r: usize, rng: &mut Rng) -> CMatrix {
    if r == 0 {
        return CMatrix::zeros(n, n);
    }
    let left = sample_gaussian(n, r, rng);
    let right = sample_gaussian(r, n, rng);
    &left * &right
}
