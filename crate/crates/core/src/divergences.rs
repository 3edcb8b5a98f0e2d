//! Variances, relative entropies, rescaling and recovery maps, formal
//! observables and the identities that connect them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, SiteSplit, C64};
use crate::models;
use crate::states::{reduce_density, xlogx, BlockOperand, BlockPartition, DensityMatrix};
use crate::tol;

fn check_dims(expected: usize, m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: m.rows(),
        });
    }
    Ok(())
}

/// `Tr(ρAA†) − |Tr ρA|²` for a raw Hermitian `ρ`.
pub fn variance_of(rho: &ComplexMatrix, a: &ComplexMatrix) -> Result<f64> {
    check_dims(rho.rows(), a)?;
    let ra = rho * a;
    let mut second = 0.0;
    for c in 0..a.cols() {
        for (x, y) in ra.column(c).iter().zip(a.column(c)) {
            second += (x * y.conj()).re;
        }
    }
    let mean = rho.trace_product(a);
    Ok(second - mean.norm_sqr())
}

/// Quantum variance `V(ρ, A) = Tr(ρAA†) − |Tr ρA|²`.
pub fn quantum_variance(rho: &DensityMatrix, a: &ComplexMatrix) -> Result<f64> {
    variance_of(rho.matrix(), a)
}

/// Fluctuation `Σ_j p_j |⟨j|A|j⟩|² − |Tr ρA|²` in the eigenbasis of `ρ`.
pub fn fluctuation(rho: &DensityMatrix, a: &ComplexMatrix) -> Result<f64> {
    let eig = rho.eigen();
    fluctuation_in_basis(rho, &eig.eigenvalues, &eig.eigenvectors, a)
}

/// Fluctuation with an explicitly supplied diagonalizing basis (columns of
/// `basis`) and weights.
pub fn fluctuation_in_basis(
    rho: &DensityMatrix,
    weights: &[f64],
    basis: &ComplexMatrix,
    a: &ComplexMatrix,
) -> Result<f64> {
    let n = rho.dim();
    check_dims(n, a)?;
    check_dims(n, basis)?;
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    let rotated = &(&basis.adjoint() * rho.matrix()) * basis;
    let diag = ComplexMatrix::from_real_diagonal(weights);
    let defect = (&rotated - &diag).max_abs();
    if defect > tol::hermitian_for(n) {
        return Err(Error::BasisMismatch { defect });
    }
    let mut sum = 0.0;
    for (j, &p) in weights.iter().enumerate() {
        let u = basis.column(j);
        let au = a.apply(u);
        let d: C64 = u.iter().zip(&au).map(|(x, y)| x.conj() * y).sum();
        sum += p * d.norm_sqr();
    }
    Ok(sum - rho.matrix().trace_product(a).norm_sqr())
}

/// `|Tr[(τ − ρ)A]|²`.
pub fn distinguishability(tau: &DensityMatrix, rho: &DensityMatrix, a: &ComplexMatrix) -> Result<f64> {
    check_dims(rho.dim(), tau.matrix())?;
    check_dims(rho.dim(), a)?;
    Ok((tau.matrix() - rho.matrix()).trace_product(a).norm_sqr())
}

/// Umegaki relative entropy `Tr σ ln σ − Tr σ ln ρ` in nats.
pub fn umegaki(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.matrix())?;
    let neg_entropy: f64 = sigma.eigenvalues().iter().map(|&l| xlogx(l)).sum();
    let eig = rho.eigen();
    if !rho.is_strictly_positive() || eig.min_eigenvalue() <= tol::SUPPORT {
        // σ must live on the support of ρ
        let mut leak = 0.0;
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l <= tol::SUPPORT {
                let u = eig.eigenvector(k);
                let su = sigma.matrix().apply(u);
                leak += u.iter().zip(&su).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            }
        }
        if leak > tol::SUPPORT * rho.dim() as f64 {
            return Err(Error::SupportViolation);
        }
    }
    let ln_rho = eig.map(|l| if l > tol::SUPPORT { l.ln() } else { 0.0 });
    let cross = sigma.matrix().trace_product(&ln_rho).re;
    Ok(neg_entropy - cross)
}

/// Route used to evaluate the Belavkin-Staszewski entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BsForm {
    /// `Tr[σ ln(σ^{1/2} ρ^{-1} σ^{1/2})]`
    Sandwich,
    /// `Tr[σ ln(ρ^{-1}σ)]`, with the logarithm of the non-Hermitian product
    /// written as `ρ^{-1/2} ln(X) ρ^{1/2}` for `X = ρ^{-1/2} σ ρ^{-1/2}`.
    Similarity,
    /// `Tr[ρ X ln X]` with `X = ρ^{-1/2} σ ρ^{-1/2}`.
    Rescaled,
}

impl BsForm {
    pub const ALL: [BsForm; 3] = [BsForm::Sandwich, BsForm::Similarity, BsForm::Rescaled];
}

impl TryFrom<u8> for BsForm {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(BsForm::Sandwich),
            2 => Ok(BsForm::Similarity),
            3 => Ok(BsForm::Rescaled),
            other => Err(Error::InvalidArgument(format!("BS form must be 1, 2 or 3, got {other}"))),
        }
    }
}

fn log_on_support(l: f64) -> f64 {
    if l > tol::SUPPORT {
        l.ln()
    } else {
        0.0
    }
}

/// Belavkin-Staszewski relative entropy. `ρ` must be strictly positive.
pub fn bs_entropy(sigma: &DensityMatrix, rho: &DensityMatrix, form: BsForm) -> Result<f64> {
    check_dims(rho.dim(), sigma.matrix())?;
    match form {
        BsForm::Sandwich => {
            let s_half = sigma.sqrt();
            let y = (&(&s_half * &rho.inverse()?) * &s_half).hermitian_part();
            let ln_y = linalg::hermitian_eig(&y)?.map(log_on_support);
            Ok(sigma.matrix().trace_product(&ln_y).re)
        }
        BsForm::Similarity => {
            let r_inv_half = rho.inverse_sqrt()?;
            let r_half = rho.sqrt();
            let x = rescale_with(&r_inv_half, sigma.matrix()).hermitian_part();
            let ln_x = linalg::hermitian_eig(&x)?.map(log_on_support);
            let l = &(&r_inv_half * &ln_x) * &r_half;
            Ok(sigma.matrix().trace_product(&l).re)
        }
        BsForm::Rescaled => {
            let r_inv_half = rho.inverse_sqrt()?;
            let x = rescale_with(&r_inv_half, sigma.matrix());
            rescaled_entropy(rho.matrix(), &x)
        }
    }
}

/// `Tr[ρ X ln X]` for a positive semidefinite `X`.
pub fn rescaled_entropy(rho: &ComplexMatrix, x: &ComplexMatrix) -> Result<f64> {
    check_dims(rho.rows(), x)?;
    let eig = linalg::hermitian_eig(&x.hermitian_part())?;
    let scale = eig.max_eigenvalue().abs().max(1.0);
    if eig.min_eigenvalue() < -tol::CHAINED * scale {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min_eigenvalue(),
        });
    }
    let m = eig.map(xlogx);
    Ok(rho.trace_product(&m).re)
}

/// BS entropy of an arbitrary positive operator relative to `ρ`, evaluated as
/// `Tr[ρ X ln X]` with `X = J_ρ^{-1/2}(σ)`. No trace normalization is assumed.
pub fn bs_entropy_operator(sigma: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma)?;
    let x = rescale_with(&rho.inverse_sqrt()?, sigma);
    rescaled_entropy(rho.matrix(), &x)
}

fn rescale_with(p: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    &(p * x) * p
}

/// Rescaling map `J_ρ^α(X) = ρ^α X ρ^α`.
pub fn rescale_map(rho: &DensityMatrix, alpha: f64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(rho.dim(), x)?;
    if alpha == 0.0 {
        return Ok(x.clone());
    }
    Ok(rescale_with(&rho.power(alpha)?, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Diagonal,
    OffDiagonal,
}

/// `J_ρ^{-1/2}(σ)` on a block (`block = Some(k)`) or averaged over all blocks.
#[derive(Clone, Debug)]
pub struct FormalObservable {
    pub matrix: ComplexMatrix,
    pub kind: ObservableKind,
    pub block: Option<usize>,
}

impl FormalObservable {
    pub fn expected_mean(&self) -> f64 {
        match self.kind {
            ObservableKind::Diagonal => 1.0,
            ObservableKind::OffDiagonal => 0.0,
        }
    }
}

fn kind_of<S: BlockOperand>(s: &S) -> ObservableKind {
    if s.is_diagonal() {
        ObservableKind::Diagonal
    } else {
        ObservableKind::OffDiagonal
    }
}

pub fn formal_observable<S: BlockOperand>(rho_block: &DensityMatrix, sigma: &S) -> Result<FormalObservable> {
    Ok(FormalObservable {
        matrix: rescale_map(rho_block, -0.5, sigma.operator())?,
        kind: kind_of(sigma),
        block: None,
    })
}

/// Petz recovery `J_{ρ_B}^{1/2}(J_{ρ_k}^{-1/2}(σ) ⊗ I)` of a block operand
/// into the full lattice.
pub fn petz_recovery<S: BlockOperand>(
    rho_b: &DensityMatrix,
    partition: &BlockPartition,
    block: usize,
    sigma: &S,
) -> Result<ComplexMatrix> {
    let rho_k = reduce_density(rho_b, partition, block)?;
    let inner = rescale_map(&rho_k, -0.5, sigma.operator())?;
    let embedded = partition.split(block)?.embed(&inner);
    rescale_map(rho_b, 0.5, &embedded)
}

/// `|Ŝ(σ‖ρ_k) − Ŝ(R(σ)‖ρ_B)|`.
pub fn pullup_identity_residual(
    rho_b: &DensityMatrix,
    partition: &BlockPartition,
    block: usize,
    sigma: &DensityMatrix,
) -> Result<f64> {
    let rho_k = reduce_density(rho_b, partition, block)?;
    let local = bs_entropy(sigma, &rho_k, BsForm::Rescaled)?;
    let recovered = petz_recovery(rho_b, partition, block, sigma)?;
    let global = bs_entropy_operator(&recovered.hermitian_part(), rho_b)?;
    Ok((local - global).abs())
}

fn require_invariant(rho: &DensityMatrix, partition: &BlockPartition) -> Result<()> {
    let defect = models::translation_defect(rho.matrix(), partition.lattice(), tol::TRANSLATION)?;
    if defect > tol::TRANSLATION {
        return Err(Error::NotTranslationInvariant { defect });
    }
    Ok(())
}

/// Average formal observable `(1/C) Σ_k J_{ρ_{B_k}}^{-1/2}(σ on B_k)` with
/// `σ` copied onto every block.
pub fn average_formal_observable<S: BlockOperand>(
    rho: &DensityMatrix,
    partition: &BlockPartition,
    sigma_block: &S,
) -> Result<FormalObservable> {
    check_dims(partition.lattice().hilbert_dim(), rho.matrix())?;
    check_dims(partition.block_dim(), sigma_block.operator())?;
    require_invariant(rho, partition)?;
    let c = partition.block_count();
    let n = rho.dim();
    let mut total = ComplexMatrix::zeros(n, n);
    for k in 0..c {
        let rho_k = reduce_density(rho, partition, k)?;
        let local = rescale_map(&rho_k, -0.5, sigma_block.operator())?;
        total = &total + &partition.split(k)?.embed(&local);
    }
    Ok(FormalObservable {
        matrix: total.scale_real(1.0 / c as f64),
        kind: kind_of(sigma_block),
        block: None,
    })
}

/// Terms of the block decomposition of `V(ρ, (1/C) Σ_k O^{B_k})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VarianceDecomposition {
    pub total: f64,
    pub local: f64,
    pub cross: f64,
    /// `V(ρ, O^{B_1})`
    pub block: f64,
}

/// Direct decomposition on a full, translation-invariant state. `total` is the
/// variance of the averaged observable evaluated on the full lattice, so
/// `total − local − cross` is a genuine consistency check.
pub fn variance_decomposition(
    rho: &DensityMatrix,
    partition: &BlockPartition,
    o_block: &ComplexMatrix,
) -> Result<VarianceDecomposition> {
    check_dims(partition.block_dim(), o_block)?;
    check_dims(partition.lattice().hilbert_dim(), rho.matrix())?;
    require_invariant(rho, partition)?;
    let c = partition.block_count();
    let n = rho.dim();
    let cf = c as f64;

    let mut averaged = ComplexMatrix::zeros(n, n);
    let mut locals = Vec::with_capacity(c);
    for k in 0..c {
        let split = partition.split(k)?;
        averaged = &averaged + &split.embed(o_block);
        locals.push(split.trace_out(rho.matrix()));
    }
    let averaged = averaged.scale_real(1.0 / cf);
    let total = variance_of(rho.matrix(), &averaged)?;

    let mut local = 0.0;
    for rk in &locals {
        local += variance_of(rk, o_block)?;
    }
    local /= cf * cf;

    let o_dag = o_block.adjoint();
    let mut cross = C64::new(0.0, 0.0);
    for k in 0..c {
        for l in 0..c {
            if k == l {
                continue;
            }
            let (first, second, rf, rs) = if k < l {
                (o_block, &o_dag, &locals[k], &locals[l])
            } else {
                (&o_dag, o_block, &locals[l], &locals[k])
            };
            let op = first.kron(second);
            let joint = partition.pair_split(k.min(l), k.max(l))?.trace_out(rho.matrix());
            let product = rf.kron(rs);
            cross += (&joint - &product).trace_product(&op);
        }
    }
    let cross = cross.re / (cf * cf);
    let block = variance_of(&locals[0], o_block)?;
    Ok(VarianceDecomposition {
        total,
        local,
        cross,
        block,
    })
}

/// Block and block-pair marginals of a translation-invariant state:
/// `pairs[d - 1]` is the state of blocks 0 and d, block 0 first.
#[derive(Clone, Debug)]
pub struct BlockMarginals {
    pub block_count: usize,
    pub block: ComplexMatrix,
    pub pairs: Vec<ComplexMatrix>,
}

impl BlockMarginals {
    pub fn from_state(rho: &DensityMatrix, partition: &BlockPartition) -> Result<Self> {
        require_invariant(rho, partition)?;
        let c = partition.block_count();
        let block = partition.split(0)?.trace_out(rho.matrix());
        let mut pairs = Vec::with_capacity(c.saturating_sub(1));
        for d in 1..c {
            pairs.push(partition.pair_split(0, d)?.trace_out(rho.matrix()));
        }
        Ok(Self {
            block_count: c,
            block,
            pairs,
        })
    }

    /// Decomposition from marginals alone; here `total` is `local + cross`.
    pub fn decompose(&self, o_block: &ComplexMatrix) -> Result<VarianceDecomposition> {
        check_dims(self.block.rows(), o_block)?;
        let c = self.block_count as f64;
        let block = variance_of(&self.block, o_block)?;
        let local = block / c;
        let mean = self.block.trace_product(o_block);
        let op = o_block.kron(&o_block.adjoint());
        let mut cross = 0.0;
        for (i, pair) in self.pairs.iter().enumerate() {
            let d = (i + 1) as f64;
            let t = pair.trace_product(&op);
            // the k > l ordering contributes the complex conjugate
            cross += (c - d) * 2.0 * t.re;
        }
        cross = cross / (c * c) - (c - 1.0) / c * mean.norm_sqr();
        Ok(VarianceDecomposition {
            total: local + cross,
            local,
            cross,
            block,
        })
    }
}

/// `M^{(m)} = Tr[ρ (O − I)^m]` for a Hermitian observable.
pub fn moment(rho: &DensityMatrix, o: &ComplexMatrix, m: u32) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument("moment order must be at least 1".into()));
    }
    check_dims(rho.dim(), o)?;
    let tolerance = tol::hermitian_for(o.rows()) * o.max_abs().max(1.0);
    let defect = o.hermitian_defect();
    if defect > tolerance {
        return Err(Error::NotHermitian { defect, tolerance });
    }
    let y = o - &ComplexMatrix::identity(o.rows());
    Ok(rho.matrix().trace_product(&y.pow(m)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    pub exact: f64,
    pub truncated: f64,
    pub residual: f64,
    /// `‖O − I‖₂ ≤ 1`
    pub converged: bool,
    pub distance: f64,
}

/// Compares `Tr[ρ O ln O]` with its moment expansion
/// `Σ_{n=1}^{n_max} c_n M^{(n)}`, `c_1 = 1`, `c_n = (−1)^n / ((n−1)n)`.
pub fn bs_series_residual(rho: &DensityMatrix, o: &ComplexMatrix, n_max: u32) -> Result<SeriesDiagnostic> {
    check_dims(rho.dim(), o)?;
    let exact = rescaled_entropy(rho.matrix(), o)?;
    let y = o - &ComplexMatrix::identity(o.rows());
    let distance = linalg::schatten_norm(&y, 2.0)?;
    let mut power = y.clone();
    let mut truncated = rho.matrix().trace_product(&power).re;
    for n in 2..=n_max {
        power = &power * &y;
        let m = rho.matrix().trace_product(&power).re;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        truncated += sign * m / ((n - 1) as f64 * n as f64);
    }
    Ok(SeriesDiagnostic {
        exact,
        truncated,
        residual: (exact - truncated).abs(),
        converged: distance <= 1.0,
        distance,
    })
}

/// `‖ρ_AC − ρ_A ⊗ ρ_C‖₁` and `I(A:C)` for the split `a_sites | rest`.
pub fn correlation_measures(
    rho: &ComplexMatrix,
    site_dims: &[usize],
    a_sites: &[usize],
) -> Result<(f64, f64)> {
    let split = SiteSplit::new(site_dims, a_sites)?;
    check_dims(split.full_dim(), rho)?;
    if split.rest_dim() == 1 {
        return Err(Error::InconsistentDims("complement of the split is empty".into()));
    }
    let rest_sites: Vec<usize> = (0..site_dims.len()).filter(|s| !split.kept_sites().contains(s)).collect();
    let rest_split = SiteSplit::new(site_dims, &rest_sites)?;
    let rho_a = split.trace_out(rho);
    let rho_c = rest_split.trace_out(rho);
    let (ka, kc) = (split.kept_dim(), split.rest_dim());
    let mut product = ComplexMatrix::zeros(rho.rows(), rho.rows());
    let mut entries = product.entries_row_major();
    let n = rho.rows();
    for ra in 0..kc {
        for ca in 0..kc {
            let c_val = rho_c.get(ra, ca);
            for rk in 0..ka {
                for ck in 0..ka {
                    let r = split.full_index(ra, rk);
                    let c = split.full_index(ca, ck);
                    entries[r * n + c] = rho_a.get(rk, ck) * c_val;
                }
            }
        }
    }
    product = ComplexMatrix::new(n, n, entries)?;
    let corr = linalg::schatten_norm(&(rho - &product), 1.0)?;

    let s = |m: &ComplexMatrix| -> Result<f64> {
        Ok(-linalg::hermitian_eig(&m.hermitian_part())?
            .eigenvalues
            .iter()
            .map(|&l| xlogx(l))
            .sum::<f64>())
    };
    let mi = s(&rho_a)? + s(&rho_c)? - s(&rho.hermitian_part())?;
    Ok((corr, mi))
}

/// Mutual information `S(A) + S(C) − S(AC)`.
pub fn mutual_information(rho: &DensityMatrix, site_dims: &[usize], a_sites: &[usize]) -> Result<f64> {
    Ok(correlation_measures(rho.matrix(), site_dims, a_sites)?.1)
}

/// Largest entry of the operator products that must vanish for the
/// eigenbasis `{|α⟩}` of a block state, using `Π^{αβ} = |α⟩⟨β|`:
/// `J(Π^α) J(Π^{αβ})†` for `β ≠ α` and `J(Π^{αγ}) J(Π^{αβ})†` for `β ≠ γ`.
pub fn orthogonality_defect(rho_block: &DensityMatrix) -> Result<f64> {
    let eig = rho_block.eigen();
    let d = rho_block.dim();
    let j = |a: usize, b: usize| -> Result<ComplexMatrix> {
        let pi = ComplexMatrix::outer(eig.eigenvector(a), eig.eigenvector(b));
        rescale_map(rho_block, -0.5, &pi)
    };
    let mut worst = 0.0f64;
    for a in 0..d {
        let rescaled: Vec<ComplexMatrix> = (0..d).map(|b| j(a, b)).collect::<Result<_>>()?;
        for b in 0..d {
            let right = rescaled[b].adjoint();
            for g in 0..d {
                if g == b {
                    continue;
                }
                worst = worst.max((&rescaled[g] * &right).max_abs());
            }
        }
    }
    Ok(worst)
}

/// Both sides of the joint-convexity bound
/// `Ŝ((1/C) Σ_k R_k(σ) ‖ ρ) ≤ Ŝ(σ ‖ ρ_{B_1})`.
pub fn joint_convexity(rho: &DensityMatrix, partition: &BlockPartition, sigma: &DensityMatrix) -> Result<(f64, f64)> {
    let mut recovered = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for k in 0..partition.block_count() {
        recovered = &recovered + &petz_recovery(rho, partition, k, sigma)?;
    }
    let recovered = recovered.scale_real(1.0 / partition.block_count() as f64).hermitian_part();
    let lhs = bs_entropy_operator(&recovered, rho)?;
    let rho_1 = reduce_density(rho, partition, 0)?;
    let rhs = bs_entropy(sigma, &rho_1, BsForm::Rescaled)?;
    Ok((lhs, rhs))
}

/// Everything the diagonal audit reports for one `(σ, ρ)` pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub umegaki: f64,
    pub bs_form1: f64,
    pub bs_form2: f64,
    pub bs_form3: f64,
    /// `½‖σ − ρ‖₁`
    pub trace_distance: f64,
    /// `V(ρ, J_ρ^{-1/2}(σ))`
    pub variance: f64,
    /// `S − ½‖σ − ρ‖₁²`
    pub pinsker_slack: f64,
    /// `Ŝ − S`
    pub bs_vs_umegaki_slack: f64,
    /// `V − ‖σ − ρ‖₁²`
    pub hoelder_slack: f64,
    pub regularization_flag: bool,
}

impl DivergenceReport {
    pub fn min_slack(&self) -> f64 {
        self.pinsker_slack.min(self.bs_vs_umegaki_slack).min(self.hoelder_slack)
    }

    pub fn form_spread(&self) -> f64 {
        (self.bs_form1 - self.bs_form2).abs().max((self.bs_form1 - self.bs_form3).abs())
    }
}

/// Full divergence report; `ρ` is regularized first when it is not already
/// bounded below by the default clamp.
pub fn divergence_report(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<DivergenceReport> {
    let (rho, regularization_flag) = crate::states::regularize(rho, tol::REGULARIZATION)?;
    let umegaki = umegaki(sigma, &rho)?;
    let bs_form1 = bs_entropy(sigma, &rho, BsForm::Sandwich)?;
    let bs_form2 = bs_entropy(sigma, &rho, BsForm::Similarity)?;
    let bs_form3 = bs_entropy(sigma, &rho, BsForm::Rescaled)?;
    let full = linalg::schatten_norm(&(sigma.matrix() - rho.matrix()), 1.0)?;
    let o = formal_observable(&rho, sigma)?;
    let variance = quantum_variance(&rho, &o.matrix)?;
    Ok(DivergenceReport {
        umegaki,
        bs_form1,
        bs_form2,
        bs_form3,
        trace_distance: 0.5 * full,
        variance,
        pinsker_slack: umegaki - 0.5 * full * full,
        bs_vs_umegaki_slack: bs_form1 - umegaki,
        hoelder_slack: variance - full * full,
        regularization_flag,
    })
}
