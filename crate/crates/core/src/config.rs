//! Experiment configuration, read from TOML.
//!
//! Every section except `sizes` has defaults, so a minimal file is
//!
//! ```toml
//! sizes = [{ n = 6, n_a = 2 }]
//! experiments = ["inequality-audit"]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::experiments::audit::AuditParams;
use crate::experiments::{EigenBasis, SizeSpec};
use crate::models::{HamiltonianSpec, LatticeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    EthScan,
    OffdiagScan,
    CorrDecay,
    Chebyshev,
    Typicality,
    EnsembleEq,
    InequalityAudit,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::EthScan,
        ExperimentName::OffdiagScan,
        ExperimentName::CorrDecay,
        ExperimentName::Chebyshev,
        ExperimentName::Typicality,
        ExperimentName::EnsembleEq,
        ExperimentName::InequalityAudit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::EthScan => "eth-scan",
            ExperimentName::OffdiagScan => "offdiag-scan",
            ExperimentName::CorrDecay => "corr-decay",
            ExperimentName::Chebyshev => "chebyshev",
            ExperimentName::Typicality => "typicality",
            ExperimentName::EnsembleEq => "ensemble-eq",
            ExperimentName::InequalityAudit => "inequality-audit",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            ExperimentName::EthScan => "eth_scan.csv",
            ExperimentName::OffdiagScan => "offdiag_scan.csv",
            ExperimentName::CorrDecay => "corr_decay.csv",
            ExperimentName::Chebyshev => "chebyshev.csv",
            ExperimentName::Typicality => "typicality.csv",
            ExperimentName::EnsembleEq => "ensemble_eq.csv",
            ExperimentName::InequalityAudit => "inequality_audit.csv",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Selection {
    /// Central fraction of the spectrum scanned.
    pub fraction: f64,
    pub cap: usize,
    pub basis: EigenBasis,
}

impl Default for Selection {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            cap: 50,
            basis: EigenBasis::Momentum,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Slack allowed on every per-record inequality.
    pub invariant: f64,
    /// Allowed residual of the typicality identities.
    pub identity: f64,
    /// Eigenvalue floor applied to reference states before `J^{-1/2}`.
    pub regularization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            invariant: 1e-8,
            identity: 1e-6,
            regularization: crate::tol::REGULARIZATION,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayConfig {
    pub betas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<SizeSpec>>,
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 0.2],
            sizes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChebyshevConfig {
    pub epsilons: Vec<f64>,
    /// Inverse temperature of the canonical instance; `ensemble.beta` wins
    /// when set.
    pub beta: f64,
    /// Larger Hilbert spaces are skipped.
    pub max_dim: usize,
    /// The canonical state has full support, so its row-variance statistic
    /// costs `dim²` block variances; above this it is skipped.
    pub canonical_max_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<SizeSpec>>,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0],
            beta: 0.2,
            max_dim: 1024,
            canonical_max_dim: 256,
            sizes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TypicalityConfig {
    pub betas: Vec<f64>,
    pub max_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<SizeSpec>>,
}

impl Default for TypicalityConfig {
    fn default() -> Self {
        Self {
            betas: vec![0.0, 0.2, 1.0],
            max_dim: 256,
            sizes: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivalenceConfig {
    /// Shell centres as fractions of the spectrum, by index.
    pub positions: Vec<f64>,
    /// Levels per shell. Ignored when `ensemble.delta` is set.
    pub shell_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<SizeSpec>>,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            positions: vec![0.45, 0.5, 0.55],
            shell_size: 20,
            sizes: None,
        }
    }
}

fn default_seed() -> u64 {
    20240501
}

fn default_experiments() -> Vec<ExperimentName> {
    ExperimentName::ALL.to_vec()
}

fn default_local_dim() -> usize {
    2
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_memory_cap() -> usize {
    8192
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_experiments")]
    pub experiments: Vec<ExperimentName>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Largest Hilbert dimension allowed without `--allow-large`.
    #[serde(default = "default_memory_cap")]
    pub memory_cap: usize,
    /// Worker threads, 0 for one per core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    pub sizes: Vec<SizeSpec>,
    #[serde(default)]
    pub model: HamiltonianSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub selection: Selection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub decay: DecayConfig,
    #[serde(default)]
    pub chebyshev: ChebyshevConfig,
    #[serde(default)]
    pub typicality: TypicalityConfig,
    #[serde(default)]
    pub equivalence: EquivalenceConfig,
    #[serde(default)]
    pub audit: AuditParams,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `text`, applies `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings), then validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let parsed: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        // overrides apply on top of the defaults, so nested keys always exist
        let mut table = toml::Table::try_from(&parsed).map_err(|e| Error::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    /// Panics for a config that fails [`validate`](Self::validate) on
    /// integer range.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        // TOML integers are signed 64-bit
        if self.seed > i64::MAX as u64 || self.memory_cap > i64::MAX as usize {
            return bad("seed and memory_cap must be below 2^63".into());
        }
        if self.sizes.is_empty() {
            return bad("`sizes` is empty".into());
        }
        if self.experiments.is_empty() {
            return bad("`experiments` is empty".into());
        }
        if self.local_dim < 2 {
            return bad(format!("local_dim must be at least 2, got {}", self.local_dim));
        }
        let s = &self.selection;
        if !(s.fraction > 0.0 && s.fraction <= 1.0) || s.cap == 0 {
            return bad("selection needs 0 < fraction <= 1 and cap >= 1".into());
        }
        let t = &self.tolerances;
        if [t.invariant, t.identity, t.regularization].iter().any(|x| !(*x > 0.0)) {
            return bad("tolerances must be positive".into());
        }
        if self.chebyshev.epsilons.iter().any(|e| !(*e > 0.0)) {
            return bad("chebyshev epsilons must be positive".into());
        }
        if self.equivalence.positions.iter().any(|p| !(0.0..=1.0).contains(p)) || self.equivalence.shell_size == 0 {
            return bad("equivalence positions must lie in [0, 1] and shell_size be positive".into());
        }
        let betas = self.decay.betas.iter().chain(&self.typicality.betas).chain([&self.chebyshev.beta]);
        if betas.into_iter().any(|b| !b.is_finite()) {
            return bad("inverse temperatures must be finite".into());
        }
        if let Some(d) = self.ensemble.delta {
            if !(d > 0.0) {
                return bad("ensemble.delta must be positive".into());
            }
        }
        let a = &self.audit;
        if a.max_dim < 2 || a.max_block_dim < 4 || !(a.tolerance > 0.0) {
            return bad("audit needs max_dim >= 2, max_block_dim >= 4 and a positive tolerance".into());
        }
        self.model.local_terms()?;
        for size in self.all_sizes() {
            if size.n_a == 0 || size.n == 0 || size.n % size.n_a != 0 {
                return Err(Error::NotDivisible {
                    sites: size.n,
                    block_size: size.n_a,
                });
            }
        }
        Ok(())
    }

    /// Every size named anywhere in the file, sorted and deduplicated.
    pub fn all_sizes(&self) -> Vec<SizeSpec> {
        let mut all: Vec<SizeSpec> = self.sizes.clone();
        for extra in [
            &self.decay.sizes,
            &self.chebyshev.sizes,
            &self.typicality.sizes,
            &self.equivalence.sizes,
        ]
        .into_iter()
        .flatten()
        {
            all.extend(extra);
        }
        all.sort();
        all.dedup();
        all
    }

    /// Fails with [`Error::MemoryCap`] for the first size above the cap.
    pub fn check_memory(&self, allow_large: bool) -> Result<()> {
        if allow_large {
            return Ok(());
        }
        for size in self.all_sizes() {
            let dim = LatticeSpec::chain(size.n, self.local_dim)?.hilbert_dim();
            if dim > self.memory_cap {
                return Err(Error::MemoryCap {
                    sites: size.n,
                    dim,
                    cap: self.memory_cap,
                });
            }
        }
        Ok(())
    }

    pub fn runs(&self, name: ExperimentName) -> bool {
        self.experiments.contains(&name)
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("override `{item}` is not key=value")))?;
    let value = parse_value(raw.trim());
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::InvalidArgument(format!("empty key in `{item}`")))?;
    let mut node = table;
    for p in parts {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::InvalidArgument(format!("`{p}` in `{key}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "sizes = [{ n = 6, n_a = 2 }]\nexperiments = [\"inequality-audit\"]\n";

    #[test]
    fn minimal_file_takes_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.experiments, vec![ExperimentName::InequalityAudit]);
        assert_eq!(c.model, HamiltonianSpec::default());
        assert_eq!(c.memory_cap, 8192);
        assert_eq!(c.audit, AuditParams::default());
    }

    #[test]
    fn round_trip_is_identity() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.decay.sizes = Some(vec![SizeSpec { n: 8, n_a: 4 }]);
        c.ensemble.delta = Some(0.5);
        c.selection.basis = EigenBasis::Solver;
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn indivisible_size_is_rejected() {
        let e = ExperimentConfig::from_toml("sizes = [{ n = 9, n_a = 2 }]").unwrap_err();
        assert!(matches!(e, Error::NotDivisible { sites: 9, block_size: 2 }), "{e}");
    }

    #[test]
    fn seed_must_fit_a_toml_integer() {
        let mut c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        c.seed = u64::MAX;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("sizes = [{ n = 6, n_a = 2 }]\nsead = 3").is_err());
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let o = ["seed=7", "selection.basis=solver", "chebyshev.epsilons=[0.5, 1.0]", "model.couplings.g = 0.9"].map(String::from);
        let c = ExperimentConfig::from_toml_with_overrides(MINIMAL, &o).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.selection.basis, EigenBasis::Solver);
        assert_eq!(c.chebyshev.epsilons, vec![0.5, 1.0]);
        assert_eq!(c.model.couplings["g"], 0.9);
        assert!(ExperimentConfig::from_toml_with_overrides(MINIMAL, &["seed".into()]).is_err());
    }

    #[test]
    fn memory_cap_names_the_dimension() {
        let c = ExperimentConfig::from_toml("sizes = [{ n = 14, n_a = 2 }]").unwrap();
        assert!(matches!(c.check_memory(false), Err(Error::MemoryCap { dim: 16384, .. })));
        assert!(c.check_memory(true).is_ok());
    }
}
