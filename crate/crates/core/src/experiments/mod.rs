//! Batch drivers that turn the divergence machinery into tables.
//!
//! Every driver is deterministic: random inputs come from seeded ChaCha
//! generators, parallel work is collected in input order, and records are
//! sorted before they are returned.

pub mod audit;
pub mod chebyshev;
pub mod decay;
pub mod equivalence;
pub mod fit;
pub mod scan;
pub mod typicality;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergences::BlockMarginals;
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix, SiteSplit, SpectralDecomposition, C64};
use crate::models::{self, HamiltonianSpec, LatticeSpec};
use crate::states::{BlockPartition, DensityMatrix};

/// One `(N, N_A)` entry of a size grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SizeSpec {
    pub n: usize,
    pub n_a: usize,
}

/// How eigenvectors inside an exactly degenerate eigenspace are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenBasis {
    /// Rotated onto translation eigenvectors, so every eigenstate has a
    /// definite momentum and identical reductions on all blocks.
    #[default]
    Momentum,
    /// Whatever the eigensolver returns.
    Solver,
}

/// Full eigensystem of a chain Hamiltonian.
#[derive(Clone, Debug)]
pub struct ChainSpectrum {
    pub lattice: LatticeSpec,
    pub eig: SpectralDecomposition,
}

impl ChainSpectrum {
    pub fn compute(lattice: &LatticeSpec, model: &HamiltonianSpec, basis: EigenBasis) -> Result<Self> {
        let h = models::build_hamiltonian(lattice, model)?;
        let mut eig = linalg::hermitian_eig(&h)?;
        if basis == EigenBasis::Momentum {
            resolve_translations(&mut eig, lattice)?;
        }
        Ok(Self {
            lattice: lattice.clone(),
            eig,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn energies(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn vector(&self, i: usize) -> &[C64] {
        self.eig.eigenvector(i)
    }

    /// Full density matrix `Σ_n w_n |n⟩⟨n|`.
    pub fn mixture(&self, weights: &[f64]) -> Result<DensityMatrix> {
        DensityMatrix::from_spectrum(weights.to_vec(), self.eig.eigenvectors.clone())
    }

    /// `Tr_rest |E_ket⟩⟨E_bra|` on the sites kept by `split`.
    pub fn reduce_pair(&self, split: &SiteSplit, ket: usize, bra: usize) -> ComplexMatrix {
        split.trace_out_outer(self.vector(ket), self.vector(bra))
    }
}

/// Inside each degenerate group diagonalizes `cos k + ε sin k`, the Hermitian
/// part of the restricted translation plus a small multiple of its
/// anti-Hermitian part; `ε < tan(π/N)` keeps `k` and `−k` apart.
fn resolve_translations(eig: &mut SpectralDecomposition, lattice: &LatticeSpec) -> Result<()> {
    const EPSILON: f64 = 0.0137;
    let e = eig.eigenvalues.clone();
    let dim = e.len();
    let width = e.last().copied().unwrap_or(0.0) - e.first().copied().unwrap_or(0.0);
    let tolerance = 1e-9 * width.max(1.0);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && e[end] - e[start] <= tolerance {
            end += 1;
        }
        let g = end - start;
        if g > 1 {
            let cols: Vec<&[C64]> = (start..end).map(|c| eig.eigenvector(c)).collect();
            let shifted: Vec<Vec<C64>> = cols.iter().map(|v| linalg::translate_vector(v, lattice, 1)).collect();
            let t = ComplexMatrix::from_fn(g, g, |a, b| cols[a].iter().zip(&shifted[b]).map(|(x, y)| x.conj() * y).sum());
            let t_dag = t.adjoint();
            let mixed = &(&t + &t_dag).scale_real(0.5) + &(&t - &t_dag).scale(C64::new(0.0, -0.5 * EPSILON));
            let rot = linalg::hermitian_eig(&mixed)?.eigenvectors;
            let block = ComplexMatrix::from_fn(dim, g, |r, a| cols[a][r]);
            let rotated = &block * &rot;
            for a in 0..g {
                eig.eigenvectors.column_mut(start + a).copy_from_slice(rotated.column(a));
            }
        }
        start = end;
    }
    Ok(())
}

/// Per-eigenvector reductions onto block 0 and onto each pair `(0, d)`, so any
/// state `Σ_n w_n |n⟩⟨n|` that commutes with translations can be reduced
/// without forming it.
#[derive(Clone, Debug)]
pub struct ThermalMarginals {
    block_count: usize,
    block: Vec<ComplexMatrix>,
    pairs: Vec<Vec<ComplexMatrix>>,
}

impl ThermalMarginals {
    pub fn new(spectrum: &ChainSpectrum, partition: &BlockPartition) -> Result<Self> {
        let c = partition.block_count();
        let block_split = partition.split(0)?;
        let pair_splits: Vec<SiteSplit> = (1..c).map(|d| partition.pair_split(0, d)).collect::<Result<_>>()?;
        let per_vector: Vec<(ComplexMatrix, Vec<ComplexMatrix>)> = (0..spectrum.dim())
            .into_par_iter()
            .map(|n| {
                let v = spectrum.vector(n);
                let b = block_split.trace_out_outer(v, v);
                let p = pair_splits.iter().map(|s| s.trace_out_outer(v, v)).collect();
                (b, p)
            })
            .collect();
        let mut block = Vec::with_capacity(per_vector.len());
        let mut pairs: Vec<Vec<ComplexMatrix>> = vec![Vec::with_capacity(per_vector.len()); c - 1];
        for (b, p) in per_vector {
            block.push(b);
            for (d, m) in p.into_iter().enumerate() {
                pairs[d].push(m);
            }
        }
        Ok(Self {
            block_count: c,
            block,
            pairs,
        })
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    fn weighted(list: &[ComplexMatrix], weights: &[f64]) -> ComplexMatrix {
        let k = list[0].rows();
        let mut acc = vec![C64::new(0.0, 0.0); k * k];
        for (m, &w) in list.iter().zip(weights) {
            if w == 0.0 {
                continue;
            }
            for c in 0..k {
                for (r, z) in m.column(c).iter().enumerate() {
                    acc[r * k + c] += z * w;
                }
            }
        }
        ComplexMatrix::from_fn(k, k, |r, c| acc[r * k + c]).hermitian_part()
    }

    pub fn mixture(&self, weights: &[f64]) -> BlockMarginals {
        BlockMarginals {
            block_count: self.block_count,
            block: Self::weighted(&self.block, weights),
            pairs: self.pairs.iter().map(|p| Self::weighted(p, weights)).collect(),
        }
    }

    /// Block-0 reduction of eigenvector `n`.
    pub fn block_of(&self, n: usize) -> &ComplexMatrix {
        &self.block[n]
    }
}

/// `V(ρ, A)` and `V(ρ, A_0)` for `A = (1/C) Σ_k (o on block k)` and
/// `ρ = Σ_n w_n |n⟩⟨n|`, evaluated vector by vector on the full lattice.
pub fn spectral_variances(
    spectrum: &ChainSpectrum,
    splits: &[SiteSplit],
    weights: &[f64],
    o: &ComplexMatrix,
) -> (f64, f64) {
    let dim = spectrum.dim();
    let c = splits.len() as f64;
    let o_dag = o.adjoint();
    let zero = C64::new(0.0, 0.0);
    let mut first = vec![zero; dim];
    let mut rest = vec![zero; dim];
    let (mut mean_total, mut second_total) = (zero, 0.0);
    let (mut mean_block, mut second_block) = (zero, 0.0);
    for (n, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let v = spectrum.vector(n);
        first.iter_mut().for_each(|z| *z = zero);
        rest.iter_mut().for_each(|z| *z = zero);
        splits[0].apply_embedded(&o_dag, v, &mut first);
        for s in &splits[1..] {
            s.apply_embedded(&o_dag, v, &mut rest);
        }
        let mut overlap_first = zero;
        let mut overlap_total = zero;
        let mut norm_first = 0.0;
        let mut norm_total = 0.0;
        for ((x, a), b) in v.iter().zip(&first).zip(&rest) {
            let t = (a + b) / c;
            overlap_first += x.conj() * a;
            overlap_total += x.conj() * t;
            norm_first += a.norm_sqr();
            norm_total += t.norm_sqr();
        }
        // ⟨n|A|n⟩ = conj⟨n|A†|n⟩
        mean_block += overlap_first.conj() * w;
        mean_total += overlap_total.conj() * w;
        second_block += w * norm_first;
        second_total += w * norm_total;
    }
    (
        second_total - mean_total.norm_sqr(),
        second_block - mean_block.norm_sqr(),
    )
}

pub fn block_splits(partition: &BlockPartition) -> Result<Vec<SiteSplit>> {
    (0..partition.block_count()).map(|k| partition.split(k)).collect()
}

/// Central `fraction` of the spectrum by index, at most `cap` states.
pub fn select_window(dim: usize, fraction: f64, cap: usize) -> Vec<usize> {
    let count = ((fraction * dim as f64).round() as usize).max(1).min(cap.max(1)).min(dim);
    let start = (dim - count) / 2;
    (start..start + count).collect()
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().cloned().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences;
    use crate::ensembles;

    #[test]
    fn window_selection() {
        assert_eq!(select_window(256, 0.1, 50), (115..141).collect::<Vec<_>>());
        assert_eq!(select_window(4096, 0.1, 50).len(), 50);
        assert_eq!(select_window(4, 0.1, 50), vec![1]);
    }

    #[test]
    fn eigenvectors_carry_momentum() {
        let lat = LatticeSpec::chain(8, 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
        for i in 0..spec.dim() {
            let v = spec.vector(i);
            let t = linalg::translate_vector(v, &lat, 1);
            let phase: C64 = v.iter().zip(&t).map(|(x, y)| x.conj() * y).sum();
            assert!((phase.norm() - 1.0).abs() < 1e-9, "state {i}: {phase}");
        }
    }

    #[test]
    fn thermal_marginals_match_full_state() {
        let lat = LatticeSpec::chain(6, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
        let w = ensembles::thermal_weights(spec.energies(), 0.4);
        let rho = spec.mixture(&w).unwrap();
        let direct = BlockMarginals::from_state(&rho, &part).unwrap();
        let fast = ThermalMarginals::new(&spec, &part).unwrap().mixture(&w);
        assert!((&direct.block - &fast.block).max_abs() < 1e-12);
        for (a, b) in direct.pairs.iter().zip(&fast.pairs) {
            assert!((a - b).max_abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_variances_match_dense() {
        let lat = LatticeSpec::chain(6, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
        let w = ensembles::thermal_weights(spec.energies(), 0.3);
        let rho = spec.mixture(&w).unwrap();
        let o = ComplexMatrix::from_fn(4, 4, |r, c| C64::new((r + 2 * c) as f64 * 0.1, r as f64 - c as f64));
        let splits = block_splits(&part).unwrap();
        let (total, block) = spectral_variances(&spec, &splits, &w, &o);
        let dec = divergences::variance_decomposition(&rho, &part, &o).unwrap();
        assert!((total - dec.total).abs() < 1e-10);
        assert!((block - dec.block).abs() < 1e-10);
    }
}
