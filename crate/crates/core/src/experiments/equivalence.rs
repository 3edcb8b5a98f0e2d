//! Microcanonical shells against the canonical ensemble at matched energy.

use serde::{Deserialize, Serialize};

use super::{ChainSpectrum, ThermalMarginals};
use crate::divergences::variance_of;
use crate::ensembles;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::states::{self, BlockPartition, DensityMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellChoice {
    /// `(center − delta, center]`
    Width(f64),
    /// Nearest `count` levels, completed to whole multiplets.
    Count(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRecord {
    pub n: usize,
    pub n_a: usize,
    pub c: usize,
    pub energy_center: f64,
    pub shell_size: usize,
    pub delta: f64,
    pub shell_mean: f64,
    pub beta: Option<f64>,
    /// `‖ρ^mc_{B_1} − ρ^c_{B_1}‖₁`
    pub lhs: Option<f64>,
    pub lhs_half: Option<f64>,
    /// `(1/D) Σ_i ‖σ̄^i − ρ^c_{B_1}‖₁`
    pub middle: Option<f64>,
    /// `(1/D) Σ_i V(ρ^c_{B_1}, J^{-1/2}(σ̄^i))^{1/2}`
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub regularized: bool,
    pub status: String,
}

pub fn ensemble_equivalence(
    spectrum: &ChainSpectrum,
    partition: &BlockPartition,
    thermal: &ThermalMarginals,
    center: f64,
    shell: ShellChoice,
    regularization: f64,
    tolerance: f64,
) -> Result<EquivalenceRecord> {
    let energies = spectrum.energies();
    let (indices, delta) = match shell {
        ShellChoice::Width(d) => (ensembles::shell_indices(energies, center, d)?, d),
        ShellChoice::Count(k) => {
            let s = ensembles::adaptive_shell(energies, center, k)?;
            let d = s.delta();
            (s.indices, d)
        }
    };
    let d = indices.len() as f64;
    let shell_mean = indices.iter().map(|&i| energies[i]).sum::<f64>() / d;
    let mut rec = EquivalenceRecord {
        n: partition.lattice().sites,
        n_a: partition.block_size(),
        c: partition.block_count(),
        energy_center: center,
        shell_size: indices.len(),
        delta,
        shell_mean,
        beta: None,
        lhs: None,
        lhs_half: None,
        middle: None,
        rhs: None,
        margin: None,
        regularized: false,
        status: "ok".into(),
    };
    let beta = match ensembles::match_beta_spectrum(energies, shell_mean) {
        Ok(b) => b,
        Err(Error::TargetOutOfRange { .. }) => {
            rec.status = "beta_unmatched".into();
            return Ok(rec);
        }
        Err(e) => return Err(e),
    };
    let weights = ensembles::thermal_weights(energies, beta);
    let canonical = DensityMatrix::new(thermal.mixture(&weights).block)?;
    let (canonical, flag) = states::regularize(&canonical, regularization)?;
    let inv_sqrt = canonical.inverse_sqrt()?;

    let splits = super::block_splits(partition)?;
    let k = partition.block_dim();
    let mut micro = ComplexMatrix::zeros(k, k);
    let (mut middle, mut rhs) = (0.0, 0.0);
    for &i in &indices {
        micro = &micro + thermal.block_of(i);
        let v = spectrum.vector(i);
        let mut avg = ComplexMatrix::zeros(k, k);
        for s in &splits {
            avg = &avg + &s.trace_out_outer(v, v);
        }
        let avg = avg.scale_real(1.0 / splits.len() as f64).hermitian_part();
        middle += linalg::schatten_norm(&(&avg - canonical.matrix()), 1.0)?;
        let o = &(&inv_sqrt * &avg) * &inv_sqrt;
        rhs += variance_of(canonical.matrix(), &o)?.max(0.0).sqrt();
    }
    let micro = micro.scale_real(1.0 / d).hermitian_part();
    let lhs = linalg::schatten_norm(&(&micro - canonical.matrix()), 1.0)?;
    middle /= d;
    rhs /= d;

    rec.beta = Some(beta);
    rec.lhs = Some(lhs);
    rec.lhs_half = Some(0.5 * lhs);
    rec.middle = Some(middle);
    rec.rhs = Some(rhs);
    rec.margin = Some(rhs - lhs);
    rec.regularized = flag;
    if lhs > middle + tolerance || middle > rhs + tolerance {
        rec.status = "violation".into();
    }
    Ok(rec)
}

/// Same comparison from the full states, for cross-checking small systems.
pub fn ensemble_distance_direct(
    spectrum: &ChainSpectrum,
    partition: &BlockPartition,
    indices: &[usize],
    beta: f64,
) -> Result<f64> {
    let mc = ensembles::mixture_from_spectrum(&spectrum.eig, indices)?;
    let c = ensembles::gibbs_from_spectrum(&spectrum.eig, beta)?;
    let mc_1 = states::reduce_density(&mc, partition, 0)?;
    let c_1 = states::reduce_density(&c, partition, 0)?;
    linalg::schatten_norm(&(mc_1.matrix() - c_1.matrix()), 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::EigenBasis;
    use crate::models::{HamiltonianSpec, LatticeSpec};

    fn setup(n: usize) -> (ChainSpectrum, BlockPartition, ThermalMarginals) {
        let lat = LatticeSpec::chain(n, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
        let th = ThermalMarginals::new(&spec, &part).unwrap();
        (spec, part, th)
    }

    #[test]
    fn full_spectrum_shell_is_infinite_temperature() {
        let (spec, part, th) = setup(6);
        let e = spec.energies();
        let width = e[e.len() - 1] - e[0] + 1.0;
        let r = ensemble_equivalence(&spec, &part, &th, e[e.len() - 1], ShellChoice::Width(width), 1e-12, 1e-8).unwrap();
        assert_eq!(r.shell_size, 64);
        assert!(r.beta.unwrap().abs() < 1e-8);
        assert!(r.lhs.unwrap() <= 1e-10, "{r:?}");
    }

    #[test]
    fn single_state_shell_collapses() {
        let (spec, part, th) = setup(6);
        let e = spec.energies();
        let i = (28..40).find(|&i| e[i] - e[i - 1] > 1e-6 && e[i + 1] - e[i] > 1e-6).unwrap();
        let r = ensemble_equivalence(&spec, &part, &th, e[i], ShellChoice::Count(1), 1e-12, 1e-8).unwrap();
        assert_eq!(r.shell_size, 1);
        let direct = ensemble_distance_direct(&spec, &part, &[i], r.beta.unwrap()).unwrap();
        assert!((r.lhs.unwrap() - direct).abs() < 1e-10);
        assert!((r.lhs.unwrap() - r.middle.unwrap()).abs() < 1e-10);
        assert_eq!(r.status, "ok");
    }

    #[test]
    fn mid_spectrum_shell_holds() {
        let (spec, part, th) = setup(8);
        let center = spec.energies()[128];
        let r = ensemble_equivalence(&spec, &part, &th, center, ShellChoice::Count(20), 1e-12, 1e-8).unwrap();
        assert_eq!(r.status, "ok", "{r:?}");
        assert!(r.margin.unwrap() > 0.0);
    }
}
