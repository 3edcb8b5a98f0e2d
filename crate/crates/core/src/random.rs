//! Seeded random matrices and states for audits and tests.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_fn(rows, cols, |r, c| entries[r * cols + c])
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    random_matrix(rng, dim, dim).hermitian_part()
}

/// Haar-random unit vector.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = crate::linalg::vector_norm(&v);
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Full-rank density matrix `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    random_density_rank(rng, dim, dim)
}

/// Density matrix of rank at most `rank`.
pub fn random_density_rank<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, rank.max(1));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr).hermitian_part()
}
