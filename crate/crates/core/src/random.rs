//! Seeded random operators for generic-case tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::{expm, spectral_norm, tensor, traceless_part, CMatrix, CVector, Hermitian, Unitary, C64};

/// Deterministic source of Gaussian random operators.
pub struct OperatorSampler {
    rng: ChaCha8Rng,
}

impl OperatorSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    fn complex(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian())
    }

    /// GUE-distributed Hermitian matrix.
    pub fn hermitian(&mut self, dim: usize) -> Hermitian {
        let g = CMatrix::from_fn(dim, dim, |_, _| self.complex());
        Hermitian::symmetrized(g)
    }

    pub fn traceless(&mut self, dim: usize) -> Hermitian {
        traceless_part(&self.hermitian(dim))
    }

    /// Haar-ish unitary `exp(i H)` for a GUE `H`; adequate for covariance tests.
    pub fn unitary(&mut self, dim: usize) -> Unitary {
        let h = self.hermitian(dim);
        expm(&h, 1.0)
    }

    /// Normalized complex Gaussian vector.
    pub fn state(&mut self, dim: usize) -> CVector {
        let v = CVector::from_fn(dim, |_, _| self.complex());
        let n = v.norm();
        v.unscale(n)
    }

    /// `sum_j A_j (x) B_j` with `terms` Gaussian traceless factors on each side.
    pub fn interaction(&mut self, dim_c: usize, dim_s: usize, terms: usize) -> Hermitian {
        let mut h = Hermitian::zeros(dim_c * dim_s);
        for _ in 0..terms {
            let a = self.traceless(dim_c);
            let b = self.traceless(dim_s);
            h = h + tensor(&a, &b);
        }
        h
    }

    /// [`Self::interaction`] rescaled to operator norm 1.
    pub fn unit_interaction(&mut self, dim_c: usize, dim_s: usize, terms: usize) -> Hermitian {
        let h = self.interaction(dim_c, dim_s, terms);
        let n = spectral_norm(h.matrix());
        h.scale(1.0 / n)
    }

    pub fn uniform_index(&mut self, upper: usize) -> usize {
        use rand::Rng;
        self.rng.random_range(0..upper)
    }
}
