//! Translation-invariant spin-chain Hamiltonians on periodic lattices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Periodic one-dimensional lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    pub local_dim: usize,
    #[serde(default = "one")]
    pub spatial_dim: usize,
}

fn one() -> usize {
    1
}

impl LatticeSpec {
    pub fn chain(sites: usize, local_dim: usize) -> Result<Self> {
        let spec = Self {
            sites,
            local_dim,
            spatial_dim: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 || self.local_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "lattice needs at least one site and local dimension >= 2 (got N={}, d={})",
                self.sites, self.local_dim
            )));
        }
        if self.spatial_dim != 1 {
            return Err(Error::InvalidArgument("only one-dimensional chains are supported".into()));
        }
        if self.local_dim.checked_pow(self.sites as u32).is_none() {
            return Err(Error::InvalidArgument("Hilbert dimension overflows".into()));
        }
        Ok(())
    }

    pub fn hilbert_dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    pub fn site_dims(&self) -> Vec<usize> {
        vec![self.local_dim; self.sites]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `Σ_i J Z_i Z_{i+r} + g X_i + h Z_i`
    TfimLong,
    /// `Σ_i J (X_i X_{i+r} + Y_i Y_{i+r} + Delta Z_i Z_{i+r}) + h Z_i`
    XxzField,
    /// Sum of translated Pauli strings listed in `terms`.
    CustomLocal,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfim_long" => Ok(Family::TfimLong),
            "xxz_field" => Ok(Family::XxzField),
            "custom_local" => Ok(Family::CustomLocal),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// One Pauli string `coefficient · P_i P_{i+1} ...`, summed over all
/// translations. `ops` uses the letters I, X, Y, Z.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub ops: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub family: Family,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    #[serde(default = "one")]
    pub range: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<PauliTerm>,
}

impl Default for HamiltonianSpec {
    fn default() -> Self {
        Self::tfim(1.0, 1.05, 0.5)
    }
}

impl HamiltonianSpec {
    pub fn tfim(j: f64, g: f64, h: f64) -> Self {
        let couplings = [("J", j), ("g", g), ("h", h)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            family: Family::TfimLong,
            couplings,
            range: 1,
            terms: Vec::new(),
        }
    }

    fn coupling(&self, name: &str) -> Result<f64> {
        self.couplings
            .get(name)
            .copied()
            .ok_or_else(|| Error::MissingCoupling(name.to_string()))
    }

    /// Pauli strings that generate the Hamiltonian under translation.
    pub fn local_terms(&self) -> Result<Vec<PauliTerm>> {
        if self.range == 0 {
            return Err(Error::InvalidArgument("interaction range must be positive".into()));
        }
        let pair = |a: char, b: char| {
            let mut s = String::new();
            s.push(a);
            for _ in 1..self.range {
                s.push('I');
            }
            s.push(b);
            s
        };
        let term = |coefficient: f64, ops: String| PauliTerm { coefficient, ops };
        match self.family {
            Family::TfimLong => {
                let (j, g, h) = (self.coupling("J")?, self.coupling("g")?, self.coupling("h")?);
                Ok(vec![term(j, pair('Z', 'Z')), term(g, "X".into()), term(h, "Z".into())])
            }
            Family::XxzField => {
                let (j, delta, h) = (self.coupling("J")?, self.coupling("Delta")?, self.coupling("h")?);
                Ok(vec![
                    term(j, pair('X', 'X')),
                    term(j, pair('Y', 'Y')),
                    term(j * delta, pair('Z', 'Z')),
                    term(h, "Z".into()),
                ])
            }
            Family::CustomLocal => {
                if self.terms.is_empty() {
                    return Err(Error::InvalidArgument("custom_local needs at least one term".into()));
                }
                for t in &self.terms {
                    if t.ops.is_empty() || !t.ops.chars().all(|c| "IXYZ".contains(c)) {
                        return Err(Error::InvalidArgument(format!("bad Pauli string `{}`", t.ops)));
                    }
                }
                Ok(self.terms.clone())
            }
        }
    }
}

/// Action of a single Pauli letter on a basis bit: (flipped bit, phase).
fn pauli_action(op: char, bit: usize) -> (usize, C64) {
    match op {
        'X' => (bit ^ 1, C64::new(1.0, 0.0)),
        // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
        'Y' => (bit ^ 1, if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) }),
        'Z' => (bit, C64::new(if bit == 0 { 1.0 } else { -1.0 }, 0.0)),
        _ => (bit, C64::new(1.0, 0.0)),
    }
}

/// Dense Hamiltonian `Σ_i Σ_terms c T^i (P ⊗ ...) T^{-i}` on the periodic chain.
pub fn build_hamiltonian(lattice: &LatticeSpec, spec: &HamiltonianSpec) -> Result<ComplexMatrix> {
    lattice.validate()?;
    if lattice.local_dim != 2 {
        return Err(Error::InvalidArgument("Pauli Hamiltonians need local dimension 2".into()));
    }
    let terms = spec.local_terms()?;
    let n = lattice.sites;
    let dim = lattice.hilbert_dim();
    let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
    for t in &terms {
        if t.coefficient == 0.0 {
            continue;
        }
        let ops: Vec<char> = t.ops.chars().collect();
        for start in 0..n {
            for col in 0..dim {
                let mut row = col;
                let mut phase = C64::new(t.coefficient, 0.0);
                for (offset, &op) in ops.iter().enumerate() {
                    let site = (start + offset) % n;
                    let shift = n - 1 - site;
                    let bit = (row >> shift) & 1;
                    let (new_bit, p) = pauli_action(op, bit);
                    row = (row & !(1 << shift)) | (new_bit << shift);
                    phase *= p;
                }
                entries[row * dim + col] += phase;
            }
        }
    }
    ComplexMatrix::new(dim, dim, entries)
}

/// Permutation matrix `T` moving site `i` to site `i + 1`.
pub fn translation_operator(lattice: &LatticeSpec) -> ComplexMatrix {
    let perm = linalg::translation_permutation(lattice, 1);
    let dim = perm.len();
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        if perm[c] == r {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `‖T X T† − X‖_∞`.
pub fn check_translation_invariance(x: &ComplexMatrix, lattice: &LatticeSpec) -> Result<f64> {
    let shifted = linalg::translate(x, lattice, 1)?;
    linalg::schatten_norm(&(&shifted - x), f64::INFINITY)
}

/// Cheap upper bound on the defect: the largest absolute row sum of
/// `T X T† − X`, which dominates its operator norm.
pub fn translation_defect_bound(x: &ComplexMatrix, lattice: &LatticeSpec) -> Result<f64> {
    let shifted = linalg::translate(x, lattice, 1)?;
    let diff = &shifted - x;
    let mut rows = vec![0.0f64; diff.rows()];
    let mut cols = vec![0.0f64; diff.cols()];
    for c in 0..diff.cols() {
        for (r, z) in diff.column(c).iter().enumerate() {
            let a = z.norm();
            rows[r] += a;
            cols[c] += a;
        }
    }
    let rmax = rows.iter().cloned().fold(0.0, f64::max);
    let cmax = cols.iter().cloned().fold(0.0, f64::max);
    Ok((rmax * cmax).sqrt())
}

/// Defect with the cheap bound tried first; exact only when the bound exceeds
/// `threshold`.
pub fn translation_defect(x: &ComplexMatrix, lattice: &LatticeSpec, threshold: f64) -> Result<f64> {
    let bound = translation_defect_bound(x, lattice)?;
    if bound <= threshold {
        return Ok(bound);
    }
    check_translation_invariance(x, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use crate::random::{random_matrix, random_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_site_ising_is_doubled_bond() {
        let lat = LatticeSpec::chain(2, 2).unwrap();
        let h = build_hamiltonian(&lat, &HamiltonianSpec::tfim(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(h, ComplexMatrix::from_real_diagonal(&[2.0, -2.0, -2.0, 2.0]));
    }

    #[test]
    fn three_site_transverse_field_spectrum() {
        let lat = LatticeSpec::chain(3, 2).unwrap();
        let h = build_hamiltonian(&lat, &HamiltonianSpec::tfim(0.0, 1.0, 0.0)).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        let expected = [-3.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 3.0];
        for (a, b) in eig.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_ising_integer_spectrum() {
        for n in 2..=4 {
            let lat = LatticeSpec::chain(n, 2).unwrap();
            let h = build_hamiltonian(&lat, &HamiltonianSpec::tfim(0.7, 0.0, 0.0)).unwrap();
            for l in hermitian_eig(&h).unwrap().eigenvalues {
                let k = l / 0.7;
                assert!((k - k.round()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn families_commute_with_translation() {
        let mut xxz = HamiltonianSpec {
            family: Family::XxzField,
            couplings: BTreeMap::new(),
            range: 1,
            terms: vec![],
        };
        xxz.couplings.insert("J".into(), 1.0);
        xxz.couplings.insert("Delta".into(), 0.6);
        xxz.couplings.insert("h".into(), 0.3);
        let custom = HamiltonianSpec {
            family: Family::CustomLocal,
            couplings: BTreeMap::new(),
            range: 2,
            terms: vec![
                PauliTerm { coefficient: 0.4, ops: "XZY".into() },
                PauliTerm { coefficient: -0.2, ops: "Y".into() },
            ],
        };
        let lat = LatticeSpec::chain(5, 2).unwrap();
        let t = translation_operator(&lat);
        for spec in [HamiltonianSpec::default(), xxz, custom] {
            let h = build_hamiltonian(&lat, &spec).unwrap();
            assert!(h.hermitian_defect() < 1e-12);
            let comm = &(&h * &t) - &(&t * &h);
            assert!(linalg::schatten_norm(&comm, f64::INFINITY).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn rejects_unknown_and_missing() {
        assert!(matches!("heisenberg".parse::<Family>(), Err(Error::UnknownFamily(_))));
        let mut spec = HamiltonianSpec::default();
        spec.couplings.remove("g");
        let lat = LatticeSpec::chain(3, 2).unwrap();
        assert!(matches!(build_hamiltonian(&lat, &spec), Err(Error::MissingCoupling(_))));
    }

    #[test]
    fn translation_operator_examples() {
        let one_site = LatticeSpec::chain(1, 2).unwrap();
        assert_eq!(translation_operator(&one_site), ComplexMatrix::identity(2));
        let two = LatticeSpec::chain(2, 2).unwrap();
        let t = translation_operator(&two);
        let swap = ComplexMatrix::from_real(
            4,
            4,
            &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
        )
        .unwrap();
        assert_eq!(t, swap);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lat = LatticeSpec::chain(5, 2).unwrap();
        let t = translation_operator(&lat);
        let v = random_vector(&mut rng, 32);
        let mut w = v.clone();
        for _ in 0..5 {
            w = t.apply(&w);
        }
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_operator_moves_site_content_forward() {
        let lat = LatticeSpec::chain(3, 2).unwrap();
        let t = translation_operator(&lat);
        let i2 = ComplexMatrix::identity(2);
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let z0 = z.kron(&i2).kron(&i2);
        let z1 = i2.kron(&z).kron(&i2);
        assert!((&(&(&t * &z0) * &t.adjoint()) - &z1).max_abs() < 1e-15);
        assert_eq!(linalg::translate(&z0, &lat, 1).unwrap(), &(&t * &z0) * &t.adjoint());
    }

    #[test]
    fn invariance_defect_examples() {
        let lat = LatticeSpec::chain(2, 2).unwrap();
        assert_eq!(check_translation_invariance(&ComplexMatrix::identity(4), &lat).unwrap(), 0.0);
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let zi = z.kron(&ComplexMatrix::identity(2));
        assert!((check_translation_invariance(&zi, &lat).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn defect_bound_dominates_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lat = LatticeSpec::chain(3, 2).unwrap();
        let x = random_matrix(&mut rng, 8, 8).hermitian_part();
        let exact = check_translation_invariance(&x, &lat).unwrap();
        let bound = translation_defect_bound(&x, &lat).unwrap();
        assert!(bound >= exact - 1e-12);
    }
}
