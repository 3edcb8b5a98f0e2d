//! Dense complex linear algebra on top of `faer`.
//!
//! Everything here is a pure function of immutable inputs. Tensor factors are
//! ordered with site 0 as the most significant digit of a basis index, so
//! `Z ⊗ I ⊗ I` acts on site 0.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::LatticeSpec;
use crate::tol;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix. Entries are addressed in row-major logical order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for r in 0..self.rows().min(8) {
            write!(f, "  ")?;
            for c in 0..self.cols().min(8) {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_fn(rows, cols, |r, c| entries[r * cols + c]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |r, c| if r == c { ONE } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(diag[r], 0.0) } else { ZERO })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Outer product `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |r, c| ket[r] * bra[c].conj())
    }

    pub(crate) fn from_mat(inner: Mat<C64>) -> Self {
        Self { inner }
    }

    pub(crate) fn mat(&self) -> &Mat<C64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix (rows otherwise).
    pub fn dim(&self) -> usize {
        self.rows()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.inner[(r, c)]
    }

    pub fn entries_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                out.push(self.get(r, c));
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> &[C64] {
        self.inner.col_as_slice(c)
    }

    pub(crate) fn column_mut(&mut self, c: usize) -> &mut [C64] {
        self.inner.col_as_slice_mut(c)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |r, c| self.get(r, c) * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows().min(self.cols())).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        debug_assert_eq!(self.cols(), other.rows());
        debug_assert_eq!(self.rows(), other.cols());
        let mut acc = ZERO;
        for c in 0..self.cols() {
            let col = self.column(c);
            for (r, &a) in col.iter().enumerate() {
                acc += a * other.get(c, r);
            }
        }
        acc
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for c in 0..self.cols() {
            for z in self.column(c) {
                m = m.max(z.norm());
            }
        }
        m
    }

    /// `max |M - M†|` entrywise.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut d = 0.0f64;
        for r in 0..n {
            for c in r..n {
                d = d.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermitian_defect() <= tolerance
    }

    /// Hermitian part `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows();
        Self::from_fn(n, n, |r, c| (self.get(r, c) + self.get(c, r).conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        (0..self.cols()).all(|c| self.column(c).iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        let (ra, ca) = (self.rows(), self.cols());
        let (rb, cb) = (other.rows(), other.cols());
        Self::from_fn(ra * rb, ca * cb, |r, c| {
            self.get(r / rb, c / cb) * other.get(r % rb, c % cb)
        })
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols(), "vector length mismatch");
        let mut out = vec![ZERO; self.rows()];
        for (c, &x) in v.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.column(c)) {
                *o += a * x;
            }
        }
        out
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut acc = Self::identity(self.rows());
        for _ in 0..exponent {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Eigensystem of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> &[C64] {
        self.eigenvectors.column(i)
    }

    /// `U diag(f(λ)) U†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_values(&values)
    }

    /// `U diag(values) U†` for an arbitrary replacement spectrum.
    pub fn with_values(&self, values: &[f64]) -> ComplexMatrix {
        let u = self.eigenvectors.mat();
        let n = u.nrows();
        let k = u.ncols();
        let scaled = Mat::from_fn(n, k, |r, c| u[(r, c)] * values[c]);
        let mut out = ComplexMatrix::from_mat(&scaled * u.adjoint());
        // exact Hermiticity
        for r in 0..n {
            out.inner[(r, r)].im = 0.0;
            for c in (r + 1)..n {
                let z = (out.inner[(r, c)] + out.inner[(c, r)].conj()) * 0.5;
                out.inner[(r, c)] = z;
                out.inner[(c, r)] = z.conj();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.with_values(&self.eigenvalues.clone())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Diagonal input returns permuted basis vectors (stable for degenerate
/// levels), and real symmetric input takes the real solver path.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    check_square(m)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    let tolerance = tol::hermitian_for(n);
    let defect = m.hermitian_defect();
    if defect > tolerance {
        return Err(Error::NotHermitian { defect, tolerance });
    }

    let mut off_diagonal = false;
    let mut complex = false;
    for c in 0..n {
        for (r, z) in m.column(c).iter().enumerate() {
            if r != c && *z != ZERO {
                off_diagonal = true;
            }
            if z.im != 0.0 {
                complex = true;
            }
        }
    }

    if !off_diagonal {
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let eigenvalues = order.iter().map(|&i| diag[i]).collect();
        let eigenvectors =
            ComplexMatrix::from_fn(n, n, |r, c| if order[c] == r { ONE } else { ZERO });
        return Ok(SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        });
    }

    let (values, vectors) = if complex {
        let evd = m
            .inner
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::EigenFailure)?;
        let s = evd.S().column_vector();
        let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
        (values, evd.U().to_owned())
    } else {
        let real = Mat::<f64>::from_fn(n, n, |r, c| m.get(r, c).re);
        let evd = real
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::EigenFailure)?;
        drop(real);
        let s = evd.S().column_vector();
        let values: Vec<f64> = (0..n).map(|i| s[i]).collect();
        let u = evd.U();
        (values, Mat::from_fn(n, n, |r, c| C64::new(u[(r, c)], 0.0)))
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted = order.windows(2).all(|w| w[0] < w[1]);
    let (eigenvalues, eigenvectors) = if sorted {
        (values, vectors)
    } else {
        let ev = order.iter().map(|&i| values[i]).collect();
        (ev, Mat::from_fn(n, n, |r, c| vectors[(r, order[c])]))
    };
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_mat(eigenvectors),
    })
}

/// Applies `f` spectrally to a Hermitian matrix after checking that every
/// eigenvalue passes `domain`.
pub fn matrix_function(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    domain: impl Fn(f64) -> bool,
) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    spectral_function(&eig, f, domain)
}

/// Same as [`matrix_function`] for an already computed eigensystem.
pub fn spectral_function(
    eig: &SpectralDecomposition,
    f: impl Fn(f64) -> f64,
    domain: impl Fn(f64) -> bool,
) -> Result<ComplexMatrix> {
    if let Some(&bad) = eig.eigenvalues.iter().find(|&&l| !domain(l)) {
        return Err(Error::OutsideDomain { eigenvalue: bad });
    }
    Ok(eig.map(f))
}

pub fn matrix_log(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_function(m, f64::ln, |l| l > 0.0)
}

pub fn matrix_exp(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_function(m, f64::exp, |_| true)
}

/// Square root of a PSD matrix; eigenvalues down to `-tol::PSD` are read as 0.
pub fn matrix_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_function(m, |l| l.max(0.0).sqrt(), |l| l >= -tol::PSD)
}

pub fn matrix_inverse_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_function(m, |l| 1.0 / l.sqrt(), |l| l > 0.0)
}

/// Singular values in descending order.
///
/// Hermitian input uses `|λ|`; anything else goes through the Hermitian
/// dilation `[[0, M], [M†, 0]]`, whose spectrum is `±s_i`.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut values = if m.is_square() && m.hermitian_defect() == 0.0 {
        hermitian_eig(m)?.eigenvalues.iter().map(|l| l.abs()).collect::<Vec<_>>()
    } else {
        let (r, c) = (m.rows(), m.cols());
        let dilation = ComplexMatrix::from_fn(r + c, r + c, |i, j| {
            if i < r && j >= r {
                m.get(i, j - r)
            } else if i >= r && j < r {
                m.get(j, i - r).conj()
            } else {
                ZERO
            }
        });
        let eig = hermitian_eig(&dilation)?;
        let k = r.min(c);
        eig.eigenvalues[eig.dim() - k..].iter().map(|s| s.max(0.0)).collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Schatten `k`-norm `(Σ s_i^k)^{1/k}`; `k = f64::INFINITY` gives the
/// operator norm.
pub fn schatten_norm(m: &ComplexMatrix, k: f64) -> Result<f64> {
    if k.is_nan() || k <= 0.0 {
        return Err(Error::InvalidSchattenIndex(k));
    }
    let s = singular_values(m)?;
    if k.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    if k == 2.0 {
        return Ok(s.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    if k == 1.0 {
        return Ok(s.iter().sum());
    }
    Ok(s.iter().map(|x| x.powf(k)).sum::<f64>().powf(1.0 / k))
}

/// Which normalization to use when quoting the 1-norm distance of two states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormConvention {
    /// `‖a - b‖₁`
    Full,
    /// `½‖a - b‖₁`
    TraceDistance,
}

pub fn state_distance(a: &ComplexMatrix, b: &ComplexMatrix, convention: NormConvention) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.rows() * a.cols(),
            found: b.rows() * b.cols(),
        });
    }
    let full = schatten_norm(&(a - b), 1.0)?;
    Ok(match convention {
        NormConvention::Full => full,
        NormConvention::TraceDistance => 0.5 * full,
    })
}

/// `½‖a - b‖₁`
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    state_distance(a, b, NormConvention::TraceDistance)
}

/// Index bookkeeping for splitting a tensor-product space into kept sites and
/// the rest. `full_index(rest, kept)` gives the basis index of the full space.
#[derive(Clone, Debug)]
pub struct SiteSplit {
    site_dims: Vec<usize>,
    keep: Vec<usize>,
    kept_dim: usize,
    rest_dim: usize,
    table: Vec<usize>,
}

impl SiteSplit {
    pub fn new(site_dims: &[usize], keep: &[usize]) -> Result<Self> {
        if site_dims.is_empty() || site_dims.contains(&0) {
            return Err(Error::InconsistentDims("site dimensions must be positive".into()));
        }
        if keep.is_empty() {
            return Err(Error::InconsistentDims("kept site set is empty".into()));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        if keep.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InconsistentDims("kept site set has duplicates".into()));
        }
        if let Some(&bad) = keep.iter().find(|&&s| s >= site_dims.len()) {
            return Err(Error::InconsistentDims(format!(
                "site {bad} out of range for {} sites",
                site_dims.len()
            )));
        }
        let n = site_dims.len();
        let is_kept: Vec<bool> = (0..n).map(|s| keep.binary_search(&s).is_ok()).collect();
        let kept_dim: usize = keep.iter().map(|&s| site_dims[s]).product();
        let full: usize = site_dims.iter().product();
        let rest_dim = full / kept_dim;

        // place value of each site in the full, kept and rest indices
        let mut full_place = vec![0usize; n];
        let mut acc = 1;
        for s in (0..n).rev() {
            full_place[s] = acc;
            acc *= site_dims[s];
        }
        let mut table = vec![0usize; full];
        for (idx, _) in table.clone().iter().enumerate() {
            let mut rem = idx;
            let mut kept_idx = 0;
            let mut rest_idx = 0;
            for s in 0..n {
                let digit = rem / full_place[s];
                rem %= full_place[s];
                if is_kept[s] {
                    kept_idx = kept_idx * site_dims[s] + digit;
                } else {
                    rest_idx = rest_idx * site_dims[s] + digit;
                }
            }
            table[rest_idx * kept_dim + kept_idx] = idx;
        }
        Ok(Self {
            site_dims: site_dims.to_vec(),
            keep,
            kept_dim,
            rest_dim,
            table,
        })
    }

    pub fn full_dim(&self) -> usize {
        self.table.len()
    }

    pub fn kept_dim(&self) -> usize {
        self.kept_dim
    }

    pub fn rest_dim(&self) -> usize {
        self.rest_dim
    }

    pub fn kept_sites(&self) -> &[usize] {
        &self.keep
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.site_dims
    }

    #[inline]
    pub fn full_index(&self, rest: usize, kept: usize) -> usize {
        self.table[rest * self.kept_dim + kept]
    }

    /// Partial trace of a full-space operator over the complement.
    pub fn trace_out(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let k = self.kept_dim;
        let mut out = ComplexMatrix::zeros(k, k);
        for rest in 0..self.rest_dim {
            let base = &self.table[rest * k..(rest + 1) * k];
            for (b, &cb) in base.iter().enumerate() {
                let col = m.column(cb);
                for (a, &ra) in base.iter().enumerate() {
                    out.inner[(a, b)] += col[ra];
                }
            }
        }
        out
    }

    /// `Tr_rest |ket⟩⟨bra|` without forming the outer product.
    pub fn trace_out_outer(&self, ket: &[C64], bra: &[C64]) -> ComplexMatrix {
        let k = self.kept_dim;
        let mut out = ComplexMatrix::zeros(k, k);
        let mut kv = vec![ZERO; k];
        let mut bv = vec![ZERO; k];
        for rest in 0..self.rest_dim {
            let base = &self.table[rest * k..(rest + 1) * k];
            for (i, &idx) in base.iter().enumerate() {
                kv[i] = ket[idx];
                bv[i] = bra[idx].conj();
            }
            for (b, &y) in bv.iter().enumerate() {
                if y == ZERO {
                    continue;
                }
                for (a, &x) in kv.iter().enumerate() {
                    out.inner[(a, b)] += x * y;
                }
            }
        }
        out
    }

    /// Adds `(op ⊗ I_rest) v` to `out`.
    pub fn apply_embedded(&self, op: &ComplexMatrix, v: &[C64], out: &mut [C64]) {
        let k = self.kept_dim;
        let mut local = vec![ZERO; k];
        for rest in 0..self.rest_dim {
            let base = &self.table[rest * k..(rest + 1) * k];
            for (b, &cb) in base.iter().enumerate() {
                local[b] = v[cb];
            }
            for (a, &ra) in base.iter().enumerate() {
                let mut acc = ZERO;
                for (b, &x) in local.iter().enumerate() {
                    acc += op.get(a, b) * x;
                }
                out[ra] += acc;
            }
        }
    }

    /// Embeds an operator on the kept sites as `op ⊗ I_rest`.
    pub fn embed(&self, op: &ComplexMatrix) -> ComplexMatrix {
        let k = self.kept_dim;
        let n = self.full_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for rest in 0..self.rest_dim {
            let base = &self.table[rest * k..(rest + 1) * k];
            for (b, &cb) in base.iter().enumerate() {
                for (a, &ra) in base.iter().enumerate() {
                    out.inner[(ra, cb)] = op.get(a, b);
                }
            }
        }
        out
    }
}

/// Partial trace keeping the sites in `keep` (ordered by site index).
pub fn partial_trace(m: &ComplexMatrix, site_dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    check_square(m)?;
    let split = SiteSplit::new(site_dims, keep)?;
    if split.full_dim() != m.rows() {
        return Err(Error::InconsistentDims(format!(
            "site dimensions multiply to {}, matrix has dimension {}",
            split.full_dim(),
            m.rows()
        )));
    }
    Ok(split.trace_out(m))
}

/// Embeds `op` on the sites `sites` (ordered by site index) of a tensor
/// product space, identity elsewhere.
pub fn embed(op: &ComplexMatrix, site_dims: &[usize], sites: &[usize]) -> Result<ComplexMatrix> {
    check_square(op)?;
    let split = SiteSplit::new(site_dims, sites)?;
    if split.kept_dim() != op.rows() {
        return Err(Error::DimensionMismatch {
            expected: split.kept_dim(),
            found: op.rows(),
        });
    }
    Ok(split.embed(op))
}

/// Permutation `P` with `T^shift |a⟩ = |P[a]⟩`, where `T` moves the content
/// of site `i` to site `i + 1 (mod N)`.
pub fn translation_permutation(lattice: &LatticeSpec, shift: i64) -> Vec<usize> {
    let n = lattice.sites;
    let d = lattice.local_dim;
    let s = shift.rem_euclid(n as i64) as usize;
    let dim = lattice.hilbert_dim();
    let mut digits = vec![0usize; n];
    let mut out = vec![0usize; dim];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut rem = a;
        for i in (0..n).rev() {
            digits[i] = rem % d;
            rem /= d;
        }
        let mut idx = 0;
        for j in 0..n {
            // new site j holds old site j - s
            idx = idx * d + digits[(j + n - s) % n];
        }
        *slot = idx;
    }
    out
}

/// `T^shift X T^{-shift}`.
pub fn translate(x: &ComplexMatrix, lattice: &LatticeSpec, shift: i64) -> Result<ComplexMatrix> {
    check_square(x)?;
    let dim = lattice.hilbert_dim();
    if x.rows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.rows(),
        });
    }
    let perm = translation_permutation(lattice, shift);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        let col = x.column(b);
        let pb = perm[b];
        for (a, &z) in col.iter().enumerate() {
            out.inner[(perm[a], pb)] = z;
        }
    }
    Ok(out)
}

pub fn translate_vector(v: &[C64], lattice: &LatticeSpec, shift: i64) -> Vec<C64> {
    let perm = translation_permutation(lattice, shift);
    let mut out = vec![ZERO; v.len()];
    for (a, &z) in v.iter().enumerate() {
        out[perm[a]] = z;
    }
    out
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
