//! Empirical tail probabilities against Chebyshev and Markov bounds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::typicality::SpectralState;
use super::{block_splits, ChainSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::random;
use crate::states::BlockPartition;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevRow {
    pub n: usize,
    pub n_a: usize,
    pub ensemble: String,
    pub beta: Option<f64>,
    /// `deviation` bounds `P(|Tr Π^j A − Tr ρA| ≥ ε)` by `Δ/ε²`;
    /// `row_variance` bounds `P(X_i ≥ ε²)` by `E[X]/ε²`.
    pub form: String,
    pub observable: String,
    pub epsilon: f64,
    pub empirical: f64,
    pub bound: f64,
    /// `Δ`, or the basis-side aggregate standing in for `E[X]`.
    pub moment: f64,
    /// `Δ` again, or `Σ_i p_i X_i` computed row by row.
    pub moment_direct: f64,
    pub status: String,
}

/// `(ε, P(|x_j − μ| ≥ ε), Δ/ε²)` for outcomes `x_j` drawn with weights `p_j`,
/// together with `Δ = Σ p_j |x_j|² − |μ|²`.
pub fn deviation_tail(weights: &[f64], values: &[C64], epsilons: &[f64]) -> (f64, Vec<(f64, f64, f64)>) {
    let mean: C64 = weights.iter().zip(values).map(|(p, x)| x * *p).sum();
    let second: f64 = weights.iter().zip(values).map(|(p, x)| p * x.norm_sqr()).sum();
    let delta = (second - mean.norm_sqr()).max(0.0);
    let rows = epsilons
        .iter()
        .map(|&eps| {
            let tail: f64 = weights
                .iter()
                .zip(values)
                .filter(|(p, x)| **p > 0.0 && (*x - mean).norm() >= eps)
                .map(|(p, _)| p)
                .sum();
            // an empty sum is -0.0
            (eps, tail + 0.0, delta / (eps * eps))
        })
        .collect();
    (delta, rows)
}

/// `(ε, P(X ≥ ε²), E/ε²)` for a nonnegative statistic.
pub fn markov_tail(weights: &[f64], values: &[f64], expectation: f64, epsilons: &[f64]) -> Vec<(f64, f64, f64)> {
    epsilons
        .iter()
        .map(|&eps| {
            let threshold = eps * eps;
            let tail: f64 = weights
                .iter()
                .zip(values)
                .filter(|(p, x)| **p > 0.0 && **x >= threshold)
                .map(|(p, _)| p)
                .sum();
            (eps, tail + 0.0, expectation / threshold)
        })
        .collect()
}

/// Block observables averaged over blocks: Z on the first site of the block,
/// and a seeded random Hermitian matrix of unit operator norm.
pub fn block_observables(partition: &BlockPartition, seed: u64) -> Result<Vec<(String, ComplexMatrix)>> {
    let k = partition.block_dim();
    let rest = k / partition.lattice().local_dim;
    // diag(1, -1, 0, ...) on the first site
    let z = ComplexMatrix::from_fn(k, k, |r, c| match (r == c, r / rest) {
        (true, 0) => C64::new(1.0, 0.0),
        (true, 1) => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random::random_hermitian(&mut rng, k);
    let norm = crate::linalg::schatten_norm(&h, f64::INFINITY)?;
    Ok(vec![("z_avg".into(), z), ("random_avg".into(), h.scale_real(1.0 / norm))])
}

pub struct ChebyshevInstance<'a> {
    pub spectrum: &'a ChainSpectrum,
    pub partition: &'a BlockPartition,
    pub weights: &'a [f64],
    pub ensemble: &'a str,
    pub beta: Option<f64>,
}

impl ChebyshevInstance<'_> {
    fn row(&self, form: &str, observable: &str, r: (f64, f64, f64), moment: f64, direct: f64) -> ChebyshevRow {
        let (epsilon, empirical, bound) = r;
        ChebyshevRow {
            n: self.partition.lattice().sites,
            n_a: self.partition.block_size(),
            ensemble: self.ensemble.to_string(),
            beta: self.beta,
            form: form.into(),
            observable: observable.into(),
            epsilon,
            empirical,
            bound,
            moment,
            moment_direct: direct,
            status: if empirical <= bound + 1e-12 { "ok" } else { "violation" }.into(),
        }
    }

    /// Deviations of `⟨E_j|Ā|E_j⟩` from `Tr ρĀ` for each block observable.
    pub fn deviation_rows(&self, observables: &[(String, ComplexMatrix)], epsilons: &[f64]) -> Result<Vec<ChebyshevRow>> {
        let splits = block_splits(self.partition)?;
        let c = splits.len() as f64;
        let dim = self.spectrum.dim();
        let mut out = Vec::new();
        for (name, o) in observables {
            let values: Vec<C64> = (0..dim)
                .into_par_iter()
                .map(|j| {
                    if self.weights[j] == 0.0 {
                        return C64::new(0.0, 0.0);
                    }
                    let v = self.spectrum.vector(j);
                    let mut image = vec![C64::new(0.0, 0.0); dim];
                    for s in &splits {
                        s.apply_embedded(o, v, &mut image);
                    }
                    v.iter().zip(&image).map(|(x, y)| x.conj() * y).sum::<C64>() / c
                })
                .collect();
            let (delta, rows) = deviation_tail(self.weights, &values, epsilons);
            out.extend(rows.into_iter().map(|r| self.row("deviation", name, r, delta, delta)));
        }
        Ok(out)
    }

    /// Tail of `X_i = Σ_j V(ρ_1, J^{-1/2}(X̄_ij))` over the support of `ρ`.
    pub fn row_variance_rows(&self, epsilons: &[f64], regularization: f64) -> Result<Vec<ChebyshevRow>> {
        let state = SpectralState::new(self.spectrum, self.partition, self.weights, regularization)?;
        let support: Vec<usize> = (0..self.spectrum.dim()).filter(|&i| self.weights[i] > 0.0).collect();
        if support.is_empty() {
            return Err(Error::InvalidArgument("state has empty support".into()));
        }
        let sums = state.row_sums(&support)?;
        let mut x = vec![0.0; self.spectrum.dim()];
        for (&i, &s) in support.iter().zip(&sums) {
            x[i] = s;
        }
        let direct: f64 = support.iter().map(|&i| self.weights[i] * x[i]).sum();
        let aggregate = state.basis_aggregate(true);
        Ok(markov_tail(self.weights, &x, aggregate, epsilons)
            .into_iter()
            .map(|r| self.row("row_variance", "formal_avg", r, aggregate, direct))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn two_outcome_arithmetic() {
        let (delta, rows) = deviation_tail(&[0.5, 0.5], &[c(1.0), c(-1.0)], &[0.5]);
        assert!((delta - 1.0).abs() < 1e-15);
        assert_eq!(rows[0], (0.5, 1.0, 4.0));
    }

    #[test]
    fn identity_never_deviates() {
        let (delta, rows) = deviation_tail(&[0.2, 0.3, 0.5], &[c(1.0); 3], &[1e-6, 0.1]);
        assert!(delta.abs() < 1e-15);
        assert!(rows.iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn markov_counts_threshold_inclusive() {
        let rows = markov_tail(&[0.5, 0.5], &[0.25, 1.0], 0.625, &[0.5, 1.0]);
        assert_eq!(rows[0].1, 1.0);
        assert_eq!(rows[1].1, 0.5);
    }
}
