//! Dual-path evaluation of the typicality balance
//! `⟨V_dg⟩ + ⟨V_off⟩ = Σ_{ij} p_i V(ρ_1, J^{-1/2}(X̄_ij))`, where
//! `X̄_ij = (1/C) Σ_k Tr_{rest}|E_i⟩⟨E_j|` taken on block `k`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{block_splits, spectral_variances, ChainSpectrum};
use crate::divergences::{self, variance_of};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SiteSplit, C64};
use crate::models;
use crate::random;
use crate::states::{self, BlockPartition, DensityMatrix};
use crate::tol;

/// `ρ = Σ_n w_n |E_n⟩⟨E_n|` with its block-0 reduction, which the rescaling
/// maps are taken with.
pub struct SpectralState<'a> {
    pub spectrum: &'a ChainSpectrum,
    pub partition: &'a BlockPartition,
    pub weights: &'a [f64],
    pub splits: Vec<SiteSplit>,
    /// Block reductions `ρ_{B_k}`, straight from the full state.
    pub blocks: Vec<ComplexMatrix>,
    pub rho_1: DensityMatrix,
    pub regularized: bool,
}

impl<'a> SpectralState<'a> {
    pub fn new(
        spectrum: &'a ChainSpectrum,
        partition: &'a BlockPartition,
        weights: &'a [f64],
        regularization: f64,
    ) -> Result<Self> {
        if weights.len() != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                expected: spectrum.dim(),
                found: weights.len(),
            });
        }
        let splits = block_splits(partition)?;
        let blocks: Vec<ComplexMatrix> = splits
            .iter()
            .map(|s| {
                let k = s.kept_dim();
                let mut acc = ComplexMatrix::zeros(k, k);
                for (n, &w) in weights.iter().enumerate() {
                    if w != 0.0 {
                        let v = spectrum.vector(n);
                        acc = &acc + &s.trace_out_outer(v, v).scale_real(w);
                    }
                }
                acc.hermitian_part()
            })
            .collect();
        let (rho_1, regularized) = states::regularize(&DensityMatrix::new(blocks[0].clone())?, regularization)?;
        Ok(Self {
            spectrum,
            partition,
            weights,
            splits,
            blocks,
            rho_1,
            regularized,
        })
    }

    /// Rejects states whose full matrix is not translation invariant.
    pub fn require_invariant(&self) -> Result<()> {
        let rho = self.spectrum.mixture(self.weights)?;
        let defect = models::translation_defect(rho.matrix(), self.partition.lattice(), tol::TRANSLATION)?;
        if defect > tol::TRANSLATION {
            return Err(Error::NotTranslationInvariant { defect });
        }
        Ok(())
    }

    /// `X̄_ij`.
    pub fn averaged_reduction(&self, i: usize, j: usize) -> ComplexMatrix {
        let (vi, vj) = (self.spectrum.vector(i), self.spectrum.vector(j));
        let mut acc = self.splits[0].trace_out_outer(vi, vj);
        for s in &self.splits[1..] {
            acc = &acc + &s.trace_out_outer(vi, vj);
        }
        acc.scale_real(1.0 / self.splits.len() as f64)
    }

    /// `V(ρ_1, J^{-1/2}(X̄_ij))` for every `j`, given `ρ_1^{-1/2}`.
    fn row(&self, inv_sqrt: &ComplexMatrix, i: usize) -> Result<Vec<f64>> {
        (0..self.spectrum.dim())
            .map(|j| {
                let o = &(inv_sqrt * &self.averaged_reduction(i, j)) * inv_sqrt;
                variance_of(self.rho_1.matrix(), &o)
            })
            .collect()
    }

    /// `X_i = Σ_j V(ρ_1, J^{-1/2}(X̄_ij))` for each requested row.
    pub fn row_sums(&self, rows: &[usize]) -> Result<Vec<f64>> {
        let inv_sqrt = self.rho_1.inverse_sqrt()?;
        rows.par_iter()
            .map(|&i| Ok(self.row(&inv_sqrt, i)?.iter().sum()))
            .collect()
    }

    /// `Σ p'_w V(ρ, (1/C) Σ_k J^{-1/2}(G) on B_k)` over pairs of eigenvectors
    /// of `ρ_1`, with `G = |e_ket⟩⟨e_bra|` and the weight taken on the ket
    /// (`weight_on_ket`) or on the bra.
    pub fn basis_aggregate(&self, weight_on_ket: bool) -> f64 {
        let eig = self.rho_1.eigen();
        let p = &eig.eigenvalues;
        let d = p.len();
        let mut total = 0.0;
        for a in 0..d {
            for b in 0..d {
                let g = ComplexMatrix::outer(eig.eigenvector(a), eig.eigenvector(b)).scale_real((p[a] * p[b]).powf(-0.5));
                let (v, _) = spectral_variances(self.spectrum, &self.splits, self.weights, &g);
                total += if weight_on_ket { p[a] } else { p[b] } * v;
            }
        }
        total
    }

    /// `Σ_{αβ} p_α V(ρ, (1/C) Σ_k J^{-1/2}(σ^{αβ}_{B_1}) on B_k)` over the
    /// eigenvectors of the full state, with `σ^{αβ} = Tr_rest |E_α⟩⟨E_β|`, or
    /// its adjoint when `adjoint` is set.
    ///
    /// Every averaged operator is linear in its block matrix `Q`, so the
    /// variance is the quadratic form `q^T K q̄ − |m·q|²` with
    /// `K_{(ab),(cd)} = Tr(ρ G_ab G_cd†)`, `G_ab` the average of `|a⟩⟨b|`.
    pub fn eigen_aggregate(&self, adjoint: bool) -> Result<f64> {
        let k = self.partition.block_dim();
        let dim = self.spectrum.dim();
        let c = self.splits.len() as f64;
        let kk = k * k;
        let zero = C64::new(0.0, 0.0);
        // w[ab][n] = G_ab† |n⟩ for n with weight
        let active: Vec<usize> = (0..dim).filter(|&n| self.weights[n] != 0.0).collect();
        let images: Vec<Vec<Vec<C64>>> = (0..kk)
            .into_par_iter()
            .map(|ab| {
                let (a, b) = (ab / k, ab % k);
                let unit = ComplexMatrix::from_fn(k, k, |r, col| {
                    if r == b && col == a {
                        C64::new(1.0 / c, 0.0)
                    } else {
                        zero
                    }
                });
                active
                    .iter()
                    .map(|&n| {
                        let mut out = vec![zero; dim];
                        for s in &self.splits {
                            s.apply_embedded(&unit, self.spectrum.vector(n), &mut out);
                        }
                        out
                    })
                    .collect()
            })
            .collect();
        let mut kernel = vec![zero; kk * kk];
        for x in 0..kk {
            for y in 0..kk {
                let mut acc = zero;
                for (t, &n) in active.iter().enumerate() {
                    let dot: C64 = images[x][t].iter().zip(&images[y][t]).map(|(u, v)| u.conj() * v).sum();
                    acc += dot * self.weights[n];
                }
                kernel[x * kk + y] = acc;
            }
        }
        // m_ab = Tr(ρ G_ab) = (1/C) Σ_k ⟨b|ρ_k|a⟩
        let mean: Vec<C64> = (0..kk)
            .map(|ab| {
                let (a, b) = (ab / k, ab % k);
                self.blocks.iter().map(|m| m.get(b, a)).sum::<C64>() / c
            })
            .collect();

        let inv_sqrt = self.rho_1.inverse_sqrt()?;
        let parts: Vec<f64> = active
            .par_iter()
            .map(|&alpha| {
                let mut sum = 0.0;
                for beta in 0..dim {
                    let sigma = self.spectrum.reduce_pair(&self.splits[0], alpha, beta);
                    let mut q = &(&inv_sqrt * &sigma) * &inv_sqrt;
                    if adjoint {
                        q = q.adjoint();
                    }
                    let qv: Vec<C64> = (0..kk).map(|ab| q.get(ab / k, ab % k)).collect();
                    let mut second = zero;
                    for x in 0..kk {
                        if qv[x] == zero {
                            continue;
                        }
                        let mut row = zero;
                        for y in 0..kk {
                            row += kernel[x * kk + y] * qv[y].conj();
                        }
                        second += qv[x] * row;
                    }
                    let m: C64 = qv.iter().zip(&mean).map(|(a, b)| a * b).sum();
                    sum += second.re - m.norm_sqr();
                }
                self.weights[alpha] * sum
            })
            .collect();
        Ok(parts.iter().sum())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypicalityReport {
    pub n: usize,
    pub n_a: usize,
    pub c: usize,
    pub beta: Option<f64>,
    pub v_dg: f64,
    pub v_off: f64,
    pub lhs: f64,
    /// Basis-side aggregate with the weight on the ket of `|e⟩⟨e'|`.
    pub basis_aggregate: f64,
    /// Same with the weight on the bra.
    pub basis_aggregate_bra_weighted: f64,
    /// Eigenbasis-side aggregate with `σ^{αβ} = Tr_rest |E_α⟩⟨E_β|`.
    pub eigen_aggregate: f64,
    pub eigen_aggregate_adjoint: f64,
    pub basis_residual: f64,
    pub eigen_residual: f64,
    /// Largest violation of the local-variance combination identity over
    /// eigenvectors of `ρ_1` and blocks.
    pub local_identity_residual: f64,
    pub orthogonality_defect: f64,
    /// `max_{ij} |Tr(X̄_ij A) − ⟨E_j|Ā|E_i⟩|` for a random block observable.
    pub sdti_residual: f64,
    pub regularized: bool,
    pub status: String,
}

/// Left side of the local-variance combination identity minus its right
/// side, worst case over `α` and blocks.
fn local_identity_residual(state: &SpectralState) -> Result<f64> {
    let eig = state.rho_1.eigen();
    let p = &eig.eigenvalues;
    let d = p.len();
    let mut worst = 0.0f64;
    for rho_k in &state.blocks {
        for a in 0..d {
            let ea = eig.eigenvector(a);
            let mut lhs = 0.0;
            let mut combined = ComplexMatrix::zeros(d, d);
            for b in 0..d {
                let pi = ComplexMatrix::outer(ea, eig.eigenvector(b));
                let rescaled = pi.scale_real((p[a] * p[b]).powf(-0.5));
                lhs += p[b] * variance_of(rho_k, &rescaled)?;
                combined = &combined + &pi;
            }
            let rhs = p[a] * variance_of(rho_k, &combined.scale_real(1.0 / p[a]))?;
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    Ok(worst)
}

pub fn typicality_balance(
    spectrum: &ChainSpectrum,
    partition: &BlockPartition,
    weights: &[f64],
    beta: Option<f64>,
    seed: u64,
    tolerance: f64,
) -> Result<TypicalityReport> {
    let state = SpectralState::new(spectrum, partition, weights, tol::REGULARIZATION)?;
    state.require_invariant()?;
    let dim = spectrum.dim();
    let k = partition.block_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random::random_hermitian(&mut rng, k);
    let inv_sqrt = state.rho_1.inverse_sqrt()?;

    // Ā|E_i⟩ for every i
    let a_images: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for s in &state.splits {
                s.apply_embedded(&a, spectrum.vector(i), &mut out);
            }
            let c = state.splits.len() as f64;
            out.iter_mut().for_each(|z| *z /= c);
            out
        })
        .collect();

    let rows: Vec<(f64, f64, f64)> = (0..dim)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, f64)> {
            let (mut diag, mut off, mut sdti) = (0.0, 0.0, 0.0f64);
            for j in 0..dim {
                let x = state.averaged_reduction(i, j);
                if weights[i] != 0.0 {
                    let o = &(&inv_sqrt * &x) * &inv_sqrt;
                    let v = weights[i] * variance_of(state.rho_1.matrix(), &o)?;
                    if i == j {
                        diag += v;
                    } else {
                        off += v;
                    }
                }
                let direct = x.trace_product(&a);
                let lifted: C64 = spectrum.vector(j).iter().zip(&a_images[i]).map(|(u, v)| u.conj() * v).sum();
                sdti = sdti.max((direct - lifted).norm());
            }
            Ok((diag, off, sdti))
        })
        .collect::<Result<_>>()?;
    let v_dg: f64 = rows.iter().map(|r| r.0).sum();
    let v_off: f64 = rows.iter().map(|r| r.1).sum();
    let sdti_residual = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let lhs = v_dg + v_off;

    let basis_aggregate = state.basis_aggregate(true);
    let basis_aggregate_bra_weighted = state.basis_aggregate(false);
    let eigen_aggregate = state.eigen_aggregate(false)?;
    let eigen_aggregate_adjoint = state.eigen_aggregate(true)?;
    let scale = lhs.abs().max(1.0);
    let basis_residual = (lhs - basis_aggregate).abs() / scale;
    let eigen_residual = (lhs - eigen_aggregate).abs() / scale;
    let local_identity_residual = local_identity_residual(&state)?;
    let orthogonality_defect = divergences::orthogonality_defect(&state.rho_1)?;

    let mut bad = Vec::new();
    if basis_residual > tolerance {
        bad.push("basis_aggregate");
    }
    if eigen_residual > tolerance {
        bad.push("eigen_aggregate");
    }
    if local_identity_residual > tolerance {
        bad.push("local_identity");
    }
    if sdti_residual > tolerance {
        bad.push("sdti");
    }
    if orthogonality_defect > tolerance {
        bad.push("orthogonality");
    }
    Ok(TypicalityReport {
        n: partition.lattice().sites,
        n_a: partition.block_size(),
        c: partition.block_count(),
        beta,
        v_dg,
        v_off,
        lhs,
        basis_aggregate,
        basis_aggregate_bra_weighted,
        eigen_aggregate,
        eigen_aggregate_adjoint,
        basis_residual,
        eigen_residual,
        local_identity_residual,
        orthogonality_defect,
        sdti_residual,
        regularized: state.regularized,
        status: if bad.is_empty() {
            "ok".into()
        } else {
            format!("violation:{}", bad.join(";"))
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles;
    use crate::experiments::EigenBasis;
    use crate::models::{HamiltonianSpec, LatticeSpec};

    fn run(n: usize, n_a: usize, model: &HamiltonianSpec, beta: f64, basis: EigenBasis) -> TypicalityReport {
        let lat = LatticeSpec::chain(n, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), n_a).unwrap();
        let spec = ChainSpectrum::compute(&lat, model, basis).unwrap();
        let w = ensembles::thermal_weights(spec.energies(), beta);
        typicality_balance(&spec, &part, &w, Some(beta), 3, 1e-8).unwrap()
    }

    #[test]
    fn gibbs_balance_small() {
        let r = run(4, 2, &HamiltonianSpec::default(), 0.3, EigenBasis::Momentum);
        assert_eq!(r.status, "ok", "{r:?}");
    }

    #[test]
    fn single_block_balance() {
        let r = run(2, 2, &HamiltonianSpec::default(), 0.5, EigenBasis::Momentum);
        assert_eq!(r.c, 1);
        assert_eq!(r.status, "ok", "{r:?}");
    }

    #[test]
    fn classical_product_basis() {
        // diagonal ρ over product states; blocks of one site
        let r = run(2, 1, &HamiltonianSpec::tfim(1.0, 0.0, 0.3), 0.7, EigenBasis::Solver);
        assert_eq!(r.status, "ok", "{r:?}");
        assert!((r.lhs - r.basis_aggregate).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_invariant_mixture() {
        let lat = LatticeSpec::chain(4, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::tfim(1.0, 0.0, 0.0), EigenBasis::Solver).unwrap();
        let mut w = vec![0.0; 16];
        w[spec.dim() / 2] = 1.0;
        let err = typicality_balance(&spec, &part, &w, None, 0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::NotTranslationInvariant { .. }), "{err:?}");
    }
}
