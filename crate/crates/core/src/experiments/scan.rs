//! Finite-size scans of block-reduced eigenstates against the canonical
//! ensemble.

use rayon::prelude::*;
use serde::Serialize;

use super::fit::{self, LinearFit};
use super::{block_splits, EigenBasis, median, spectral_variances, ChainSpectrum, SizeSpec, ThermalMarginals};
use crate::divergences::{self, BsForm};
use crate::ensembles;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, SiteSplit};
use crate::models::{HamiltonianSpec, LatticeSpec};
use crate::states::{self, BlockPartition, DensityMatrix};
use crate::tol;

/// One row of `eth_scan.csv` or `offdiag_scan.csv`. Off-diagonal rows leave
/// the entropy columns and `distance_half` empty, and `distance_full` holds
/// `‖σ^{ij}_{B_1}‖₁`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub n: usize,
    pub n_a: usize,
    pub c: Option<usize>,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub energy_i: Option<f64>,
    pub energy_j: Option<f64>,
    pub beta: Option<f64>,
    pub distance_half: Option<f64>,
    pub distance_full: Option<f64>,
    pub umegaki: Option<f64>,
    pub bs_entropy: Option<f64>,
    pub variance_total: Option<f64>,
    pub variance_local: Option<f64>,
    pub variance_cross: Option<f64>,
    pub variance_block: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub block_spread: Option<f64>,
    pub hoelder_slack: Option<f64>,
    pub regularized: bool,
    pub status: String,
}

impl ScalingRecord {
    fn stub(size: SizeSpec, status: &str) -> Self {
        Self {
            n: size.n,
            n_a: size.n_a,
            status: status.to_string(),
            ..Self::default()
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn is_violation(&self) -> bool {
        self.status.starts_with("violation")
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    /// Fraction of the spectrum, by index, around its middle.
    pub fraction: f64,
    /// Upper limit on selected states (or pairs).
    pub cap: usize,
    pub regularization: f64,
    /// Tolerance for the per-record invariant checks.
    pub tolerance: f64,
    pub basis: EigenBasis,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            cap: 50,
            regularization: tol::REGULARIZATION,
            tolerance: 1e-8,
            basis: EigenBasis::Momentum,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanKind {
    Diagonal,
    OffDiagonal,
}

/// Everything a scan of one `(N, N_A)` needs.
pub struct ScanContext<'a> {
    pub spectrum: &'a ChainSpectrum,
    pub partition: &'a BlockPartition,
    pub thermal: &'a ThermalMarginals,
    splits: Vec<SiteSplit>,
    params: ScanParams,
}

impl<'a> ScanContext<'a> {
    pub fn new(
        spectrum: &'a ChainSpectrum,
        partition: &'a BlockPartition,
        thermal: &'a ThermalMarginals,
        params: ScanParams,
    ) -> Result<Self> {
        Ok(Self {
            spectrum,
            partition,
            thermal,
            splits: block_splits(partition)?,
            params,
        })
    }

    fn size(&self) -> SizeSpec {
        SizeSpec {
            n: self.partition.lattice().sites,
            n_a: self.partition.block_size(),
        }
    }

    fn base(&self, i: usize, j: Option<usize>) -> ScalingRecord {
        let e = self.spectrum.energies();
        ScalingRecord {
            c: Some(self.partition.block_count()),
            i: Some(i),
            j,
            energy_i: Some(e[i]),
            energy_j: j.map(|j| e[j]),
            ..ScalingRecord::stub(self.size(), "ok")
        }
    }

    /// Canonical block state at the matched temperature, regularized.
    fn canonical(&self, target: f64) -> Result<Option<(f64, Vec<f64>, divergences::BlockMarginals, DensityMatrix, bool)>> {
        let beta = match ensembles::match_beta_spectrum(self.spectrum.energies(), target) {
            Ok(b) => b,
            Err(Error::TargetOutOfRange { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let weights = ensembles::thermal_weights(self.spectrum.energies(), beta);
        let marginals = self.thermal.mixture(&weights);
        let rho_1 = DensityMatrix::new(marginals.block.clone())?;
        let (rho_1, flag) = states::regularize(&rho_1, self.params.regularization)?;
        Ok(Some((beta, weights, marginals, rho_1, flag)))
    }

    /// `max_k ‖X_{B_k} − X_{B_1}‖₁` for `X = Tr |E_i⟩⟨E_j|`.
    fn block_spread(&self, i: usize, j: usize, first: &ComplexMatrix) -> Result<f64> {
        let mut worst = 0.0f64;
        for s in &self.splits[1..] {
            let other = self.spectrum.reduce_pair(s, i, j);
            worst = worst.max(linalg::schatten_norm(&(&other - first), 1.0)?);
        }
        Ok(worst)
    }

    pub fn diagonal_record(&self, i: usize) -> Result<ScalingRecord> {
        let mut rec = self.base(i, None);
        let Some((beta, weights, marginals, rho_1, flag)) = self.canonical(self.spectrum.energies()[i])? else {
            rec.status = "beta_unmatched".into();
            return Ok(rec);
        };
        let sigma_m = self.spectrum.reduce_pair(&self.splits[0], i, i).hermitian_part();
        let sigma = DensityMatrix::new(sigma_m.clone())?;
        let full = linalg::schatten_norm(&(&sigma_m - rho_1.matrix()), 1.0)?;
        let umegaki = divergences::umegaki(&sigma, &rho_1)?;
        let bs = divergences::bs_entropy(&sigma, &rho_1, BsForm::Rescaled)?;
        let o = divergences::formal_observable(&rho_1, &sigma)?.matrix;
        let dec = marginals.decompose(&o)?;
        let (total, block) = spectral_variances(self.spectrum, &self.splits, &weights, &o);

        rec.beta = Some(beta);
        rec.distance_half = Some(0.5 * full);
        rec.distance_full = Some(full);
        rec.umegaki = Some(umegaki);
        rec.bs_entropy = Some(bs);
        rec.variance_total = Some(total);
        rec.variance_local = Some(dec.local);
        rec.variance_cross = Some(dec.cross);
        rec.variance_block = Some(block);
        rec.variance_ratio = Some(total / block);
        rec.block_spread = Some(self.block_spread(i, i, &sigma_m)?);
        rec.hoelder_slack = Some(block - full * full);
        rec.regularized = flag;

        let t = self.params.tolerance;
        let mut bad = self.common_violations(total, block, &dec);
        if umegaki - 0.5 * full * full < -t {
            bad.push("pinsker");
        }
        if bs - umegaki < -t * bs.abs().max(1.0) {
            bad.push("bs_vs_umegaki");
        }
        rec.status = status_of(&bad);
        Ok(rec)
    }

    pub fn offdiagonal_record(&self, i: usize, j: usize) -> Result<ScalingRecord> {
        let mut rec = self.base(i, Some(j));
        let e = self.spectrum.energies();
        let Some((beta, weights, marginals, rho_1, flag)) = self.canonical(0.5 * (e[i] + e[j]))? else {
            rec.status = "beta_unmatched".into();
            return Ok(rec);
        };
        let sigma_m = self.spectrum.reduce_pair(&self.splits[0], i, j);
        let full = linalg::schatten_norm(&sigma_m, 1.0)?;
        let o = divergences::rescale_map(&rho_1, -0.5, &sigma_m)?;
        let dec = marginals.decompose(&o)?;
        let (total, block) = spectral_variances(self.spectrum, &self.splits, &weights, &o);

        rec.beta = Some(beta);
        rec.distance_full = Some(full);
        rec.variance_total = Some(total);
        rec.variance_local = Some(dec.local);
        rec.variance_cross = Some(dec.cross);
        rec.variance_block = Some(block);
        rec.variance_ratio = Some(total / block);
        rec.block_spread = Some(self.block_spread(i, j, &sigma_m)?);
        rec.hoelder_slack = Some(block - full * full);
        rec.regularized = flag;
        rec.status = status_of(&self.common_violations(total, block, &dec));
        Ok(rec)
    }

    fn common_violations(&self, total: f64, block: f64, dec: &divergences::VarianceDecomposition) -> Vec<&'static str> {
        let t = self.params.tolerance;
        let mut bad = Vec::new();
        if (total - dec.local - dec.cross).abs() > t * total.abs().max(1.0) {
            bad.push("decomposition");
        }
        let c = self.partition.block_count() as f64;
        if (dec.local - block / c).abs() > t * block.abs().max(1.0) {
            bad.push("local_term");
        }
        if (block - dec.block).abs() > t * block.abs().max(1.0) {
            bad.push("block_marginal");
        }
        bad
    }

    pub fn run(&self, kind: ScanKind) -> Result<Vec<ScalingRecord>> {
        let dim = self.spectrum.dim();
        if self.partition.block_count() == 1 {
            return Ok(vec![ScalingRecord::stub(self.size(), "degenerate_partition")]);
        }
        match kind {
            ScanKind::Diagonal => super::select_window(dim, self.params.fraction, self.params.cap)
                .into_par_iter()
                .map(|i| self.diagonal_record(i))
                .collect(),
            ScanKind::OffDiagonal => select_pairs(dim, self.params.fraction, self.params.cap)
                .into_par_iter()
                .map(|(i, j)| self.offdiagonal_record(i, j))
                .collect(),
        }
    }
}

fn status_of(bad: &[&str]) -> String {
    if bad.is_empty() {
        "ok".into()
    } else {
        format!("violation:{}", bad.join(";"))
    }
}

/// Consecutive pairs `(i, i+1)` from the central window.
pub fn select_pairs(dim: usize, fraction: f64, cap: usize) -> Vec<(usize, usize)> {
    if dim < 2 {
        return Vec::new();
    }
    let count = ((fraction * dim as f64).round() as usize).max(1).min(cap.max(1)).min(dim - 1);
    let start = (dim - count - 1) / 2;
    (start..start + count).map(|i| (i, i + 1)).collect()
}

/// Scan over a size grid, computing every spectrum from scratch.
pub fn scaling_scan(
    grid: &[SizeSpec],
    model: &HamiltonianSpec,
    local_dim: usize,
    kind: ScanKind,
    params: ScanParams,
) -> Result<Vec<ScalingRecord>> {
    let mut out = Vec::new();
    for &size in grid {
        let lattice = LatticeSpec::chain(size.n, local_dim)?;
        let partition = match BlockPartition::new(lattice.clone(), size.n_a) {
            Ok(p) => p,
            Err(Error::NotDivisible { .. }) => {
                out.push(ScalingRecord::stub(size, "not_divisible"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let spectrum = ChainSpectrum::compute(&lattice, model, params.basis)?;
        let thermal = ThermalMarginals::new(&spectrum, &partition)?;
        out.extend(ScanContext::new(&spectrum, &partition, &thermal, params)?.run(kind)?);
    }
    sort_records(&mut out);
    Ok(out)
}

pub fn subsystem_eth_scan(
    grid: &[SizeSpec],
    model: &HamiltonianSpec,
    local_dim: usize,
    params: ScanParams,
) -> Result<Vec<ScalingRecord>> {
    scaling_scan(grid, model, local_dim, ScanKind::Diagonal, params)
}

pub fn offdiag_scan(
    grid: &[SizeSpec],
    model: &HamiltonianSpec,
    local_dim: usize,
    params: ScanParams,
) -> Result<Vec<ScalingRecord>> {
    scaling_scan(grid, model, local_dim, ScanKind::OffDiagonal, params)
}

pub fn sort_records(records: &mut [ScalingRecord]) {
    records.sort_by_key(|r| (r.n, r.n_a, r.i, r.j));
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub records: usize,
    pub median_distance: Option<f64>,
    pub median_variance_total: Option<f64>,
    pub median_variance_block: Option<f64>,
}

/// Median distance per `N` at fixed `N_A`, and its power-law fit in `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub n_a: usize,
    /// `distance_half` for diagonal scans, `distance_full` otherwise.
    pub distance_column: &'static str,
    pub sizes: Vec<SizeSummary>,
    pub fit: Option<LinearFit>,
    pub violations: usize,
    pub regularized: usize,
    /// Off-diagonal rows with `variance_total < ‖σ^{ij}‖₁²`.
    pub total_below_norm_squared: Option<usize>,
}

pub fn summarize(records: &[ScalingRecord], kind: ScanKind) -> Vec<ScanSummary> {
    let mut blocks: Vec<usize> = records.iter().map(|r| r.n_a).collect();
    blocks.sort_unstable();
    blocks.dedup();
    blocks
        .into_iter()
        .map(|n_a| {
            let rows: Vec<&ScalingRecord> = records.iter().filter(|r| r.n_a == n_a).collect();
            let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
            ns.sort_unstable();
            ns.dedup();
            let pick = |r: &ScalingRecord| match kind {
                ScanKind::Diagonal => r.distance_half,
                ScanKind::OffDiagonal => r.distance_full,
            };
            let sizes: Vec<SizeSummary> = ns
                .iter()
                .map(|&n| {
                    let at: Vec<&&ScalingRecord> = rows.iter().filter(|r| r.n == n && r.c.is_some()).collect();
                    let col = |f: &dyn Fn(&ScalingRecord) -> Option<f64>| -> Vec<f64> {
                        at.iter().filter_map(|r| f(r)).collect()
                    };
                    SizeSummary {
                        n,
                        records: at.len(),
                        median_distance: median(&col(&pick)),
                        median_variance_total: median(&col(&|r| r.variance_total)),
                        median_variance_block: median(&col(&|r| r.variance_block)),
                    }
                })
                .collect();
            let (x, y): (Vec<f64>, Vec<f64>) = sizes
                .iter()
                .filter_map(|s| s.median_distance.map(|d| (s.n as f64, d)))
                .unzip();
            let total_below = (kind == ScanKind::OffDiagonal).then(|| {
                rows.iter()
                    .filter(|r| matches!((r.variance_total, r.distance_full), (Some(v), Some(d)) if v < d * d))
                    .count()
            });
            ScanSummary {
                n_a,
                distance_column: match kind {
                    ScanKind::Diagonal => "distance_half",
                    ScanKind::OffDiagonal => "distance_full",
                },
                sizes,
                fit: fit::log_log_fit(&x, &y),
                violations: rows.iter().filter(|r| r.is_violation()).count(),
                regularized: rows.iter().filter(|r| r.regularized).count(),
                total_below_norm_squared: total_below,
            }
        })
        .collect()
}
