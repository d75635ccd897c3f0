//! Seeded random operators.
//!
//! Entries are standard complex Gaussians (`re, im ~ N(0, 1/2)`). Every
//! sampler is deterministic in its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::QubitOperator;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Default upper bound on the qubit count of sampled operators.
pub const DEFAULT_QUBIT_CAP: usize = 6;

/// Mix a base seed with a stream label and an index (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(h * re, h * im)
}

/// `dim × dim` matrix of i.i.d. complex Gaussians.
pub fn sample_general<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// `(G + G^†) / 2` for Gaussian `G`.
pub fn sample_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    sample_general(dim, rng).hermitian_part()
}

/// `G^† G` for Gaussian `G`; full rank with probability one.
pub fn sample_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = sample_general(dim, rng);
    (&g.adjoint() * &g).hermitian_part()
}

/// Sampler enforcing a qubit cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorSampler {
    pub cap: usize,
}

impl Default for OperatorSampler {
    fn default() -> Self {
        Self { cap: DEFAULT_QUBIT_CAP }
    }
}

impl OperatorSampler {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.cap {
            Err(Error::QubitCap { n, cap: self.cap })
        } else {
            Ok(())
        }
    }

    pub fn hermitian_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<QubitOperator> {
        self.check(n)?;
        QubitOperator::new(n, sample_hermitian(1 << n, rng))
    }

    pub fn psd_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<QubitOperator> {
        self.check(n)?;
        QubitOperator::new(n, sample_psd(1 << n, rng))
    }

    pub fn general_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<QubitOperator> {
        self.check(n)?;
        QubitOperator::new(n, sample_general(1 << n, rng))
    }

    pub fn hermitian(&self, n: usize, seed: u64) -> Result<QubitOperator> {
        self.hermitian_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn psd(&self, n: usize, seed: u64) -> Result<QubitOperator> {
        self.psd_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn general(&self, n: usize, seed: u64) -> Result<QubitOperator> {
        self.general_with(n, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

pub fn random_hermitian(n: usize, seed: u64) -> Result<QubitOperator> {
    OperatorSampler::default().hermitian(n, seed)
}

pub fn random_psd(n: usize, seed: u64) -> Result<QubitOperator> {
    OperatorSampler::default().psd(n, seed)
}

pub fn random_operator(n: usize, seed: u64) -> Result<QubitOperator> {
    OperatorSampler::default().general(n, seed)
}
