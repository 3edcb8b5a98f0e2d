//! Density matrices, transition matrices, block partitions and reductions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, SiteSplit, SpectralDecomposition, C64};
use crate::models::LatticeSpec;
use crate::tol;

/// Hermitian, positive semidefinite, unit-trace matrix with its eigensystem.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    eig: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eig = linalg::hermitian_eig(&matrix)?;
        Self::checked(matrix, eig)
    }

    /// Builds `Σ λ_i |u_i⟩⟨u_i|` from a known eigensystem.
    pub fn from_spectrum(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        if eigenvectors.rows() != eigenvalues.len() || eigenvectors.cols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvectors.cols(),
                found: eigenvalues.len(),
            });
        }
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let n = eigenvalues.len();
        let values: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
        let vectors = ComplexMatrix::from_fn(n, n, |r, c| eigenvectors.get(r, order[c]));
        let eig = SpectralDecomposition {
            eigenvalues: values,
            eigenvectors: vectors,
        };
        let matrix = eig.reconstruct();
        Self::checked(matrix, eig)
    }

    fn checked(matrix: ComplexMatrix, eig: SpectralDecomposition) -> Result<Self> {
        let trace = eig.eigenvalues.iter().sum::<f64>();
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::InvalidTrace { trace, expected: 1.0 });
        }
        let min_eigenvalue = eig.min_eigenvalue();
        if min_eigenvalue < -tol::PSD {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, eig })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let eig = SpectralDecomposition {
            eigenvalues: vec![1.0 / dim as f64; dim],
            eigenvectors: ComplexMatrix::identity(dim),
        };
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            eig,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigen(&self) -> &SpectralDecomposition {
        &self.eig
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min_eigenvalue()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    fn require_positive(&self) -> Result<()> {
        if self.is_strictly_positive() {
            Ok(())
        } else {
            Err(Error::NotStrictlyPositive {
                min_eigenvalue: self.min_eigenvalue(),
            })
        }
    }

    /// `ρ^α`; negative powers need a strictly positive state.
    pub fn power(&self, alpha: f64) -> Result<ComplexMatrix> {
        if alpha == 0.0 {
            return Ok(ComplexMatrix::identity(self.dim()));
        }
        if alpha < 0.0 {
            self.require_positive()?;
            return Ok(self.eig.map(|l| l.powf(alpha)));
        }
        Ok(self.eig.map(|l| l.max(0.0).powf(alpha)))
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        self.eig.map(|l| l.max(0.0).sqrt())
    }

    pub fn inverse_sqrt(&self) -> Result<ComplexMatrix> {
        self.power(-0.5)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.power(-1.0)
    }

    pub fn ln(&self) -> Result<ComplexMatrix> {
        self.require_positive()?;
        Ok(self.eig.map(f64::ln))
    }

    /// Von Neumann entropy `-Tr ρ ln ρ` in nats.
    pub fn entropy(&self) -> f64 {
        -self.eig.eigenvalues.iter().map(|&l| xlogx(l)).sum::<f64>()
    }

    pub fn expectation(&self, a: &ComplexMatrix) -> Result<C64> {
        if a.rows() != self.dim() || a.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.rows(),
            });
        }
        Ok(self.matrix.trace_product(a))
    }
}

/// `x ln x` with the continuous extension `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x <= tol::SUPPORT {
        0.0
    } else {
        x * x.ln()
    }
}

/// Reduced operator `Tr_rest |E_ket⟩⟨E_bra|` (or its full-lattice form).
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub matrix: ComplexMatrix,
    pub ket: usize,
    pub bra: usize,
}

impl TransitionMatrix {
    pub fn new(matrix: ComplexMatrix, ket: usize, bra: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        Ok(Self { matrix, ket, bra })
    }

    /// `|ket⟩⟨bra|` on the full space.
    pub fn from_vectors(ket: &[C64], bra: &[C64], ket_index: usize, bra_index: usize) -> Result<Self> {
        if ket.len() != bra.len() {
            return Err(Error::DimensionMismatch {
                expected: ket.len(),
                found: bra.len(),
            });
        }
        Ok(Self {
            matrix: ComplexMatrix::outer(ket, bra),
            ket: ket_index,
            bra: bra_index,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            ket: self.bra,
            bra: self.ket,
        }
    }
}

/// Equipartition of a periodic chain into `C` contiguous blocks of `N_A` sites.
/// Blocks are numbered from 0; block 0 holds sites `0..N_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    lattice: LatticeSpec,
    block_size: usize,
}

impl BlockPartition {
    pub fn new(lattice: LatticeSpec, block_size: usize) -> Result<Self> {
        if block_size == 0 || lattice.sites % block_size != 0 {
            return Err(Error::NotDivisible {
                sites: lattice.sites,
                block_size,
            });
        }
        Ok(Self { lattice, block_size })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.lattice.sites / self.block_size
    }

    pub fn block_dim(&self) -> usize {
        self.lattice.local_dim.pow(self.block_size as u32)
    }

    fn check_block(&self, k: usize) -> Result<()> {
        if k >= self.block_count() {
            return Err(Error::BlockOutOfRange {
                index: k,
                count: self.block_count(),
            });
        }
        Ok(())
    }

    pub fn block_sites(&self, k: usize) -> Result<Vec<usize>> {
        self.check_block(k)?;
        Ok((k * self.block_size..(k + 1) * self.block_size).collect())
    }

    /// Minimal ring distance between any site of block `k` and any of block `l`.
    pub fn distance(&self, k: usize, l: usize) -> Result<usize> {
        let a = self.block_sites(k)?;
        let b = self.block_sites(l)?;
        let n = self.lattice.sites;
        let mut best = usize::MAX;
        for &x in &a {
            for &y in &b {
                let d = x.abs_diff(y);
                best = best.min(d.min(n - d));
            }
        }
        Ok(best)
    }

    pub fn split(&self, k: usize) -> Result<SiteSplit> {
        SiteSplit::new(&self.lattice.site_dims(), &self.block_sites(k)?)
    }

    /// Split keeping blocks `k` and `l`; tensor order follows site order.
    pub fn pair_split(&self, k: usize, l: usize) -> Result<SiteSplit> {
        if k == l {
            return Err(Error::InvalidArgument("block pair must be distinct".into()));
        }
        let mut sites = self.block_sites(k)?;
        sites.extend(self.block_sites(l)?);
        SiteSplit::new(&self.lattice.site_dims(), &sites)
    }
}

/// Operand of the block-level maps: a state (diagonal case) or a transition
/// matrix (off-diagonal case).
pub trait BlockOperand: Sized {
    fn operator(&self) -> &ComplexMatrix;
    fn is_diagonal(&self) -> bool;
    fn reduce(&self, partition: &BlockPartition, block: usize) -> Result<Self>;
    /// Expected value of `Tr(ρ J^{-1/2}(σ))`.
    fn expected_mean(&self) -> f64 {
        if self.is_diagonal() {
            1.0
        } else {
            0.0
        }
    }
}

fn check_full_dim(dim: usize, partition: &BlockPartition) -> Result<()> {
    let full = partition.lattice().hilbert_dim();
    if dim != full {
        return Err(Error::DimensionMismatch { expected: full, found: dim });
    }
    Ok(())
}

impl BlockOperand for DensityMatrix {
    fn operator(&self) -> &ComplexMatrix {
        &self.matrix
    }
    fn is_diagonal(&self) -> bool {
        true
    }
    fn reduce(&self, partition: &BlockPartition, block: usize) -> Result<Self> {
        reduce_density(self, partition, block)
    }
}

impl BlockOperand for TransitionMatrix {
    fn operator(&self) -> &ComplexMatrix {
        &self.matrix
    }
    fn is_diagonal(&self) -> bool {
        false
    }
    fn reduce(&self, partition: &BlockPartition, block: usize) -> Result<Self> {
        check_full_dim(self.dim(), partition)?;
        let split = partition.split(block)?;
        Ok(Self {
            matrix: split.trace_out(&self.matrix),
            ket: self.ket,
            bra: self.bra,
        })
    }
}

pub fn reduce_density(state: &DensityMatrix, partition: &BlockPartition, block: usize) -> Result<DensityMatrix> {
    check_full_dim(state.dim(), partition)?;
    let split = partition.split(block)?;
    DensityMatrix::new(split.trace_out(state.matrix()).hermitian_part())
}

/// Reduction of a state or transition matrix to block `block`.
pub fn reduce<S: BlockOperand>(state: &S, partition: &BlockPartition, block: usize) -> Result<S> {
    state.reduce(partition, block)
}

/// Rank-1 projector `|v⟩⟨v|`.
pub fn pure_projector(v: &[C64]) -> Result<DensityMatrix> {
    let norm = linalg::vector_norm(v);
    if (norm - 1.0).abs() > tol::TRACE {
        return Err(Error::NotNormalized { norm });
    }
    DensityMatrix::new(ComplexMatrix::outer(v, v))
}

/// Raises every eigenvalue to at least `epsilon` and renormalizes, keeping the
/// eigenvectors. Returns the new state and whether any clamping happened.
pub fn regularize(rho: &DensityMatrix, epsilon: f64) -> Result<(DensityMatrix, bool)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("regularization must be positive, got {epsilon}")));
    }
    let n = rho.dim();
    if epsilon * n as f64 >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "regularization {epsilon} too large for dimension {n}"
        )));
    }
    if rho.min_eigenvalue() >= epsilon {
        return Ok((rho.clone(), false));
    }
    let values = &rho.eig.eigenvalues;
    let mut clamped = vec![false; n];
    loop {
        let fixed = clamped.iter().filter(|&&c| c).count();
        let free_mass: f64 = values
            .iter()
            .zip(&clamped)
            .filter(|(_, &c)| !c)
            .map(|(&v, _)| v.max(0.0))
            .sum();
        let scale = (1.0 - fixed as f64 * epsilon) / free_mass;
        let mut changed = false;
        for (v, c) in values.iter().zip(clamped.iter_mut()) {
            if !*c && v.max(0.0) * scale < epsilon {
                *c = true;
                changed = true;
            }
        }
        if !changed {
            let new: Vec<f64> = values
                .iter()
                .zip(&clamped)
                .map(|(&v, &c)| if c { epsilon } else { v.max(0.0) * scale })
                .collect();
            let state = DensityMatrix::from_spectrum(new, rho.eig.eigenvectors.clone())?;
            return Ok((state, true));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Density,
    Transition,
    Generic,
}

/// On-disk matrix record: row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: StateKind,
    pub dim: usize,
    pub site_dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_matrix(kind: StateKind, matrix: &ComplexMatrix, site_dims: Vec<usize>) -> Self {
        Self {
            kind,
            dim: matrix.rows(),
            site_dims,
            entries: matrix.entries_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.site_dims.iter().product::<usize>() != self.dim {
            return Err(Error::InconsistentDims(format!(
                "site dimensions {:?} do not multiply to {}",
                self.site_dims, self.dim
            )));
        }
        let entries = self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(self.dim, self.dim, entries)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        if self.kind != StateKind::Density {
            return Err(Error::InvalidArgument(format!(
                "expected a density matrix, file holds kind {:?}",
                self.kind
            )));
        }
        DensityMatrix::new(self.to_matrix()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_density_rank, random_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn projector_examples() {
        let p = pure_projector(&[c(1.0), c(0.0)]).unwrap();
        assert!((p.matrix() - &ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).max_abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = pure_projector(&[c(s), c(s)]).unwrap();
        for r in 0..2 {
            for col in 0..2 {
                assert!((p.matrix().get(r, col) - c(0.5)).norm() < 1e-15);
            }
        }
        assert!(matches!(pure_projector(&[c(1.0), c(1.0)]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn projector_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_vector(&mut rng, 7);
        let p = pure_projector(&v).unwrap();
        let sq = p.matrix() * p.matrix();
        assert!((&sq - p.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidTrace { .. })));
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn regularize_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let full = DensityMatrix::new(random_density(&mut rng, 3)).unwrap();
        let (same, flag) = regularize(&full, 1e-12).unwrap();
        assert!(!flag);
        assert_eq!(same.matrix(), full.matrix());

        let pure = DensityMatrix::new(ComplexMatrix::from_real_diagonal(&[1.0, 0.0])).unwrap();
        let (reg, flag) = regularize(&pure, 1e-12).unwrap();
        assert!(flag);
        assert!((reg.eigenvalues()[0] - 1e-12).abs() < 1e-24);
        assert!((reg.eigenvalues()[1] - (1.0 - 1e-12)).abs() < 1e-15);

        assert!(regularize(&pure, 0.0).is_err());
        assert!(regularize(&pure, -1.0).is_err());
    }

    #[test]
    fn regularize_rank_deficient_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 2..7 {
            let rho = DensityMatrix::new(random_density_rank(&mut rng, dim, 1)).unwrap();
            let eps = 1e-6;
            let (reg, flag) = regularize(&rho, eps).unwrap();
            assert!(flag);
            assert!(reg.min_eigenvalue() >= eps * (1.0 - 1e-9));
            assert!((reg.matrix().trace().re - 1.0).abs() < 1e-12);
            let dist = linalg::schatten_norm(&(reg.matrix() - rho.matrix()), 1.0).unwrap();
            assert!(dist <= 2.0 * dim as f64 * eps);
        }
    }

    #[test]
    fn block_partition_geometry() {
        let lat = LatticeSpec::chain(12, 2).unwrap();
        let p = BlockPartition::new(lat.clone(), 2).unwrap();
        assert_eq!(p.block_count(), 6);
        assert_eq!(p.block_sites(1).unwrap(), vec![2, 3]);
        let d: Vec<usize> = (1..6).map(|l| p.distance(0, l).unwrap()).collect();
        assert_eq!(d, vec![1, 3, 5, 3, 1]);
        assert!(matches!(p.block_sites(6), Err(Error::BlockOutOfRange { .. })));
        assert!(matches!(BlockPartition::new(LatticeSpec::chain(9, 2).unwrap(), 2), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn reduce_product_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lat = LatticeSpec::chain(4, 2).unwrap();
        let part = BlockPartition::new(lat, 2).unwrap();
        let r1 = random_density(&mut rng, 4);
        let r2 = random_density(&mut rng, 4);
        let prod = DensityMatrix::new(r1.kron(&r2)).unwrap();
        let red = reduce(&prod, &part, 0).unwrap();
        assert!((red.matrix() - &r1).max_abs() < 1e-13);
        let red2 = reduce(&prod, &part, 1).unwrap();
        assert!((red2.matrix() - &r2).max_abs() < 1e-13);

        // Σ p_i reduce(Π^i) = reduce(ρ)
        let rho = DensityMatrix::new(random_density(&mut rng, 16)).unwrap();
        let split = part.split(0).unwrap();
        let mut acc = ComplexMatrix::zeros(4, 4);
        for (i, &p) in rho.eigenvalues().iter().enumerate() {
            let v = rho.eigen().eigenvector(i);
            acc = &acc + &split.trace_out_outer(v, v).scale_real(p);
        }
        assert!((&acc - reduce(&rho, &part, 0).unwrap().matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn reduce_eight_site_matches_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lat = LatticeSpec::chain(8, 2).unwrap();
        let part = BlockPartition::new(lat, 2).unwrap();
        let v = random_vector(&mut rng, 256);
        let rho = pure_projector(&v).unwrap();
        let red = reduce(&rho, &part, 1).unwrap();
        // block 1 = sites 2,3: index bits 5..4 of an 8-bit index (site 0 most significant)
        for a in 0..4 {
            for b in 0..4 {
                let mut s = C64::new(0.0, 0.0);
                for hi in 0..4 {
                    for lo in 0..16 {
                        let ia = (hi << 6) | (a << 4) | lo;
                        let ib = (hi << 6) | (b << 4) | lo;
                        s += v[ia] * v[ib].conj();
                    }
                }
                assert!((red.matrix().get(a, b) - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transition_reduction_traceless_and_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lat = LatticeSpec::chain(4, 2).unwrap();
        let part = BlockPartition::new(lat, 2).unwrap();
        let rho = DensityMatrix::new(random_density(&mut rng, 16)).unwrap();
        let u = rho.eigen();
        let t = TransitionMatrix::from_vectors(u.eigenvector(3), u.eigenvector(7), 3, 7).unwrap();
        let red = reduce(&t, &part, 0).unwrap();
        assert!(red.matrix.trace().norm() < 1e-10);
        let back = reduce(&t.adjoint(), &part, 0).unwrap();
        assert!((&back.matrix - &red.matrix.adjoint()).max_abs() < 1e-12);
    }

    #[test]
    fn state_file_roundtrip() {
        let m = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        let f = StateFile::from_matrix(StateKind::Density, &m, vec![2]);
        let json = f.to_json();
        let back: StateFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_matrix().unwrap(), m);
        assert!(json.contains("\"kind\":\"density\""));
    }
}
