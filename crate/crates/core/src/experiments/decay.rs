//! Decay of block-block correlations with distance.

use serde::Serialize;

use super::fit::{self, LinearFit};
use crate::divergences::BlockMarginals;
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix};
use crate::states::{xlogx, BlockPartition, DensityMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub n: usize,
    pub n_a: usize,
    pub c: usize,
    pub beta: Option<f64>,
    pub k: usize,
    pub l: usize,
    pub distance: usize,
    /// `‖ρ_{B_k B_l} − ρ_{B_k} ⊗ ρ_{B_l}‖₁`
    pub corr_norm: f64,
    pub mutual_info: f64,
    /// `sqrt(2 I) − corr_norm`, nonnegative by Pinsker.
    pub pinsker_gap: f64,
}

fn entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(-linalg::hermitian_eig(&m.hermitian_part())?
        .eigenvalues
        .iter()
        .map(|&x| xlogx(x))
        .sum::<f64>())
}

/// One record per pair `(0, l)`; by translation invariance these cover every
/// pair of blocks.
pub fn correlation_decay_probe(
    marginals: &BlockMarginals,
    partition: &BlockPartition,
    beta: Option<f64>,
) -> Result<Vec<CorrelationRecord>> {
    let rho_1 = &marginals.block;
    let product = rho_1.kron(rho_1);
    let s_1 = entropy(rho_1)?;
    let mut out = Vec::with_capacity(marginals.pairs.len());
    for (idx, pair) in marginals.pairs.iter().enumerate() {
        let l = idx + 1;
        let corr = linalg::schatten_norm(&(pair - &product), 1.0)?;
        let mi = 2.0 * s_1 - entropy(pair)?;
        out.push(CorrelationRecord {
            n: partition.lattice().sites,
            n_a: partition.block_size(),
            c: partition.block_count(),
            beta,
            k: 0,
            l,
            distance: partition.distance(0, l)?,
            corr_norm: corr,
            mutual_info: mi,
            pinsker_gap: (2.0 * mi.max(0.0)).sqrt() - corr,
        });
    }
    Ok(out)
}

pub fn correlation_decay_of_state(
    rho: &DensityMatrix,
    partition: &BlockPartition,
    beta: Option<f64>,
) -> Result<Vec<CorrelationRecord>> {
    correlation_decay_probe(&BlockMarginals::from_state(rho, partition)?, partition, beta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecaySummary {
    pub n: usize,
    pub n_a: usize,
    pub beta: Option<f64>,
    pub max_corr_norm: f64,
    /// `ln corr` against distance.
    pub exponential: Option<LinearFit>,
    /// `ln corr` against `ln distance`.
    pub algebraic: Option<LinearFit>,
    pub correlation_length: Option<f64>,
    pub preferred: Option<&'static str>,
    /// Mean `corr_norm` per distance never rises by more than the
    /// exponential-fit scatter.
    pub monotone: bool,
}

/// Values at or below this are treated as exact zeros and left out of fits.
pub const FIT_FLOOR: f64 = 1e-13;

pub fn summarize(records: &[CorrelationRecord]) -> Option<DecaySummary> {
    let first = records.first()?;
    let mut by_distance: Vec<(usize, f64, usize)> = Vec::new();
    for r in records {
        match by_distance.iter_mut().find(|(d, _, _)| *d == r.distance) {
            Some(e) => {
                e.1 += r.corr_norm;
                e.2 += 1;
            }
            None => by_distance.push((r.distance, r.corr_norm, 1)),
        }
    }
    by_distance.sort_by_key(|e| e.0);
    let means: Vec<(f64, f64)> = by_distance.iter().map(|&(d, s, k)| (d as f64, s / k as f64)).collect();

    let usable: Vec<&CorrelationRecord> = records.iter().filter(|r| r.corr_norm > FIT_FLOOR).collect();
    let d: Vec<f64> = usable.iter().map(|r| r.distance as f64).collect();
    let y: Vec<f64> = usable.iter().map(|r| r.corr_norm.ln()).collect();
    let exponential = fit::linear_fit(&d, &y);
    let algebraic = fit::log_log_fit(&d, &usable.iter().map(|r| r.corr_norm).collect::<Vec<_>>());
    let correlation_length = exponential.filter(|f| f.slope < 0.0).map(|f| -1.0 / f.slope);
    let preferred = match (exponential, algebraic) {
        (Some(e), Some(a)) => Some(if e.ssr <= a.ssr { "exponential" } else { "algebraic" }),
        (Some(_), None) => Some("exponential"),
        (None, Some(_)) => Some("algebraic"),
        (None, None) => None,
    };
    let noise = exponential
        .map(|f| (f.ssr / f.points as f64).sqrt().exp() - 1.0)
        .unwrap_or(0.0);
    let monotone = means.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + noise) + FIT_FLOOR);
    Some(DecaySummary {
        n: first.n,
        n_a: first.n_a,
        beta: first.beta,
        max_corr_norm: records.iter().map(|r| r.corr_norm).fold(0.0, f64::max),
        exponential,
        algebraic,
        correlation_length,
        preferred,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles;
    use crate::experiments::{ChainSpectrum, EigenBasis, ThermalMarginals};
    use crate::models::{HamiltonianSpec, LatticeSpec};

    #[test]
    fn product_state_has_no_correlations() {
        let lat = LatticeSpec::chain(6, 2).unwrap();
        let part = BlockPartition::new(lat, 2).unwrap();
        let rho = DensityMatrix::maximally_mixed(64);
        let recs = correlation_decay_of_state(&rho, &part, Some(0.0)).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.corr_norm <= 1e-10 && r.mutual_info.abs() <= 1e-10));
        let s = summarize(&recs).unwrap();
        assert!(s.exponential.is_none() && s.correlation_length.is_none());
        assert!(s.monotone);
    }

    #[test]
    fn gibbs_correlations_decay() {
        let lat = LatticeSpec::chain(8, 2).unwrap();
        let part = BlockPartition::new(lat.clone(), 2).unwrap();
        let spec = ChainSpectrum::compute(&lat, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
        let w = ensembles::thermal_weights(spec.energies(), 0.2);
        let m = ThermalMarginals::new(&spec, &part).unwrap().mixture(&w);
        let recs = correlation_decay_probe(&m, &part, Some(0.2)).unwrap();
        assert_eq!(recs.iter().map(|r| r.distance).collect::<Vec<_>>(), vec![1, 3, 1]);
        assert!(recs.iter().all(|r| r.pinsker_gap >= -1e-12));
        let s = summarize(&recs).unwrap();
        assert!(s.monotone);
        assert!(s.correlation_length.unwrap().is_finite());
    }
}
