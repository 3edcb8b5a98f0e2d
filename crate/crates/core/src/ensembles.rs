//! Canonical and microcanonical states, and inverse-temperature matching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, SpectralDecomposition};
use crate::states::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Canonical,
    Microcanonical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    /// Shell width; absent means the adaptive shell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            kind: EnsembleKind::Canonical,
            beta: None,
            energy: None,
            delta: None,
        }
    }
}

/// Normalized Boltzmann weights `e^{-β E_n} / Z`, computed with the spectrum
/// shifted by its extreme value so the largest weight is 1 before
/// normalization.
pub fn thermal_weights(energies: &[f64], beta: f64) -> Vec<f64> {
    if energies.is_empty() {
        return Vec::new();
    }
    let reference = if beta >= 0.0 {
        energies.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    let mut w: Vec<f64> = energies.iter().map(|&e| (-beta * (e - reference)).exp()).collect();
    let z: f64 = w.iter().sum();
    for x in &mut w {
        *x /= z;
    }
    w
}

pub fn mean_energy(energies: &[f64], beta: f64) -> f64 {
    thermal_weights(energies, beta)
        .iter()
        .zip(energies)
        .map(|(w, e)| w * e)
        .sum()
}

/// `exp(-βH)/Z` from an eigensystem of `H`.
pub fn gibbs_from_spectrum(eig: &SpectralDecomposition, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("inverse temperature must be finite, got {beta}")));
    }
    let w = thermal_weights(&eig.eigenvalues, beta);
    DensityMatrix::from_spectrum(w, eig.eigenvectors.clone())
}

pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<DensityMatrix> {
    gibbs_from_spectrum(&linalg::hermitian_eig(h)?, beta)
}

/// Inverse temperature whose canonical mean energy equals `target`.
pub fn match_beta_spectrum(energies: &[f64], target: f64) -> Result<f64> {
    let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(target > min && target < max) {
        return Err(Error::TargetOutOfRange { target, min, max });
    }
    let width = max - min;
    let beta_max = 50.0 / width;
    let tolerance = 1e-9 * width;
    // ⟨H⟩_β decreases in β
    let (mut lo, mut hi) = (-beta_max, beta_max);
    let mut mid = 0.0;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let e = mean_energy(energies, mid);
        if (e - target).abs() <= tolerance * 1e-3 || hi - lo <= 1e-15 * beta_max {
            break;
        }
        if e > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (mean_energy(energies, mid) - target).abs() > tolerance {
        return Err(Error::TargetOutOfRange { target, min, max });
    }
    Ok(mid)
}

pub fn match_beta(h: &ComplexMatrix, target: f64) -> Result<f64> {
    match_beta_spectrum(&linalg::hermitian_eig(h)?.eigenvalues, target)
}

/// Indices `i` with `E_i ∈ (center − delta, center]`.
pub fn shell_indices(energies: &[f64], center: f64, delta: f64) -> Result<Vec<usize>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("shell width must be positive, got {delta}")));
    }
    let low = center - delta;
    let idx: Vec<usize> = (0..energies.len())
        .filter(|&i| energies[i] > low && energies[i] <= center)
        .collect();
    if idx.is_empty() {
        let nearest = energies
            .iter()
            .cloned()
            .min_by(|a, b| (a - center).abs().total_cmp(&(b - center).abs()))
            .unwrap_or(f64::NAN);
        return Err(Error::EmptyShell {
            low,
            high: center,
            nearest,
        });
    }
    Ok(idx)
}

/// Equal-weight mixture of the eigenvectors listed in `indices`.
pub fn mixture_from_spectrum(eig: &SpectralDecomposition, indices: &[usize]) -> Result<DensityMatrix> {
    let mut w = vec![0.0; eig.dim()];
    for &i in indices {
        w[i] = 1.0 / indices.len() as f64;
    }
    DensityMatrix::from_spectrum(w, eig.eigenvectors.clone())
}

pub fn microcanonical_from_spectrum(
    eig: &SpectralDecomposition,
    center: f64,
    delta: f64,
) -> Result<(DensityMatrix, Vec<usize>)> {
    let idx = shell_indices(&eig.eigenvalues, center, delta)?;
    Ok((mixture_from_spectrum(eig, &idx)?, idx))
}

pub fn microcanonical_state(h: &ComplexMatrix, center: f64, delta: f64) -> Result<(DensityMatrix, Vec<usize>)> {
    microcanonical_from_spectrum(&linalg::hermitian_eig(h)?, center, delta)
}

/// Shell chosen by count rather than width.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveShell {
    pub indices: Vec<usize>,
    /// Equivalent half-open window `(low, high]`.
    pub low: f64,
    pub high: f64,
}

impl AdaptiveShell {
    pub fn delta(&self) -> f64 {
        self.high - self.low
    }
}

/// Default shell size: `max(20, 0.5% of dim)`, capped at `dim`.
pub fn default_shell_size(dim: usize) -> usize {
    20usize.max((dim as f64 * 0.005).ceil() as usize).min(dim)
}

/// The `count` eigenvalues nearest to `center` (a contiguous run of the sorted
/// spectrum), extended until no degenerate multiplet is cut.
pub fn adaptive_shell(energies: &[f64], center: f64, count: usize) -> Result<AdaptiveShell> {
    let n = energies.len();
    if count == 0 || n == 0 {
        return Err(Error::InvalidArgument("shell must hold at least one state".into()));
    }
    if energies.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("energies must be sorted ascending".into()));
    }
    let count = count.min(n);
    let mut lo = energies.partition_point(|&e| e < center).min(n - 1);
    if lo > 0 && (energies[lo - 1] - center).abs() <= (energies[lo] - center).abs() {
        lo -= 1;
    }
    let mut hi = lo + 1;
    while hi - lo < count {
        let take_low = if lo == 0 {
            false
        } else if hi == n {
            true
        } else {
            (center - energies[lo - 1]) <= (energies[hi] - center)
        };
        if take_low {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    let width = energies[n - 1] - energies[0];
    let degenerate = 1e-9 * width.max(1.0);
    while lo > 0 && energies[lo] - energies[lo - 1] <= degenerate {
        lo -= 1;
    }
    while hi < n && energies[hi] - energies[hi - 1] <= degenerate {
        hi += 1;
    }
    let high = energies[hi - 1];
    let low = if lo == 0 {
        energies[0] - degenerate.max(1e-12)
    } else {
        0.5 * (energies[lo - 1] + energies[lo])
    };
    Ok(AdaptiveShell {
        indices: (lo..hi).collect(),
        low,
        high,
    })
}
