//! Seeded random operators for sampling test states and filters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{normalize, ComplexMatrix, C64};

/// Deterministic generator; every random draw in the crate goes through one.
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        rand::Rng::gen::<f64>(&mut self.0)
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    /// Standard complex Gaussian (unit variance per real component).
    pub fn complex_gaussian(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian())
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex_gaussian()).collect()
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// Haar-random unit vector.
    pub fn random_pure(&mut self, n: usize) -> Vec<C64> {
        let mut v = self.gaussian_vector(n);
        normalize(&mut v);
        v
    }

    /// `G G† / tr(G G†)` with `G` an `n × rank` Ginibre matrix.
    pub fn random_density(&mut self, n: usize, rank: usize) -> ComplexMatrix {
        let g = self.gaussian_matrix(n, rank);
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        m.scale_real(1.0 / tr).hermitian_part()
    }

    /// Uniform point on the probability simplex.
    pub fn simplex(&mut self, n: usize) -> Vec<f64> {
        let e: Vec<f64> = (0..n).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|x| x / s).collect()
    }
}

/// Haar-random unitary (Gram–Schmidt on a Ginibre matrix).
pub fn random_unitary(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = rng.gaussian_matrix(n, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for prev in &cols {
            let ov: C64 = prev.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= ov * p;
            }
        }
        normalize(&mut v);
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        u.set_column(j, col);
    }
    u
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(n: usize, rng: &mut Rng) -> ComplexMatrix {
    let g = rng.gaussian_matrix(n, n);
    let mut h = g.hermitian_part();
    for i in 0..n {
        h[(i, i)] = C64::new(h[(i, i)].re, 0.0);
    }
    h
}
