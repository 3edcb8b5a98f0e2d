//! Runs a configured experiment set and writes its tables and manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentName};
use crate::ensembles;
use crate::error::{Error, Result};
use crate::experiments::audit::{self, AuditRow};
use crate::experiments::chebyshev::{self, ChebyshevInstance, ChebyshevRow};
use crate::experiments::decay::{self, CorrelationRecord, DecaySummary};
use crate::experiments::equivalence::{self, EquivalenceRecord, ShellChoice};
use crate::experiments::scan::{self, ScalingRecord, ScanContext, ScanKind, ScanParams, ScanSummary};
use crate::experiments::typicality::{self, TypicalityReport};
use crate::experiments::{ChainSpectrum, SizeSpec, ThermalMarginals};
use crate::models::LatticeSpec;
use crate::states::BlockPartition;

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentEntry {
    pub name: &'static str,
    pub file: &'static str,
    pub rows: usize,
    pub violations: usize,
    pub regularized: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summaries {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eth_scan: Vec<ScanSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub offdiag_scan: Vec<ScanSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corr_decay: Vec<DecaySummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub experiments: Vec<ExperimentEntry>,
    pub regularization_incidents: usize,
    pub violations: usize,
    pub summaries: Summaries,
    pub warnings: Vec<String>,
    pub spectrum_wall_time_s: f64,
    pub total_wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub allow_large: bool,
}

/// Spectra per `N` and thermal marginals per `(N, N_A)`, computed on demand.
struct SpectrumCache<'a> {
    config: &'a ExperimentConfig,
    spectra: BTreeMap<usize, ChainSpectrum>,
    partitions: BTreeMap<SizeSpec, (BlockPartition, ThermalMarginals)>,
    seconds: f64,
}

impl<'a> SpectrumCache<'a> {
    fn new(config: &'a ExperimentConfig) -> Self {
        Self {
            config,
            spectra: BTreeMap::new(),
            partitions: BTreeMap::new(),
            seconds: 0.0,
        }
    }

    fn ensure(&mut self, size: SizeSpec) -> Result<()> {
        let start = Instant::now();
        if !self.spectra.contains_key(&size.n) {
            log::info!("diagonalizing N = {}", size.n);
            let lattice = LatticeSpec::chain(size.n, self.config.local_dim)?;
            let s = ChainSpectrum::compute(&lattice, &self.config.model, self.config.selection.basis)?;
            self.spectra.insert(size.n, s);
        }
        if !self.partitions.contains_key(&size) {
            let spectrum = &self.spectra[&size.n];
            let partition = BlockPartition::new(spectrum.lattice.clone(), size.n_a)?;
            let thermal = ThermalMarginals::new(spectrum, &partition)?;
            self.partitions.insert(size, (partition, thermal));
        }
        self.seconds += start.elapsed().as_secs_f64();
        Ok(())
    }

    fn get(&mut self, size: SizeSpec) -> Result<(&ChainSpectrum, &BlockPartition, &ThermalMarginals)> {
        self.ensure(size)?;
        let (p, t) = &self.partitions[&size];
        Ok((&self.spectra[&size.n], p, t))
    }

    fn dim(&self, size: SizeSpec) -> usize {
        self.config.local_dim.pow(size.n as u32)
    }
}

/// Writes rows to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial table.
pub fn write_csv_atomic<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_writer(tmp);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(format!("{name}: {e}")))?;
    }
    let tmp = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    publish(tmp, &path)?;
    Ok(path)
}

pub fn write_text_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    publish(tmp, path)
}

fn publish(tmp: tempfile::NamedTempFile, path: &Path) -> Result<()> {
    // temp files are created owner-only
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

struct Table {
    entry: ExperimentEntry,
}

impl Table {
    fn write<T: Serialize>(
        name: ExperimentName,
        dir: &Path,
        rows: &[T],
        violations: usize,
        regularized: usize,
        start: Instant,
    ) -> Result<Self> {
        write_csv_atomic(dir, name.file_name(), rows)?;
        Ok(Self {
            entry: ExperimentEntry {
                name: name.as_str(),
                file: name.file_name(),
                rows: rows.len(),
                violations,
                regularized,
                wall_time_s: start.elapsed().as_secs_f64(),
            },
        })
    }
}

/// Runs every experiment named in `config`, writing into `out_dir`.
/// Invariant violations are counted, not raised; the caller decides the exit
/// status from [`Manifest::violations`].
pub fn run(config: &ExperimentConfig, out_dir: &Path, options: RunOptions) -> Result<Manifest> {
    config.validate()?;
    config.check_memory(options.allow_large)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| run_in_pool(config, out_dir, pool.current_num_threads()))
}

fn run_in_pool(config: &ExperimentConfig, out_dir: &Path, threads: usize) -> Result<Manifest> {
    let start = Instant::now();
    let mut cache = SpectrumCache::new(config);
    let mut entries = Vec::new();
    let mut summaries = Summaries::default();
    let mut warnings = Vec::new();
    let tol = &config.tolerances;
    let params = ScanParams {
        fraction: config.selection.fraction,
        cap: config.selection.cap,
        regularization: tol.regularization,
        tolerance: tol.invariant,
        basis: config.selection.basis,
    };

    for name in ExperimentName::ALL.into_iter().filter(|n| config.runs(*n)) {
        let t0 = Instant::now();
        log::info!("running {}", name.as_str());
        let table = match name {
            ExperimentName::EthScan | ExperimentName::OffdiagScan => {
                let kind = if name == ExperimentName::EthScan {
                    ScanKind::Diagonal
                } else {
                    ScanKind::OffDiagonal
                };
                let mut rows: Vec<ScalingRecord> = Vec::new();
                for &size in &config.sizes {
                    let (s, p, t) = cache.get(size)?;
                    rows.extend(ScanContext::new(s, p, t, params)?.run(kind)?);
                }
                scan::sort_records(&mut rows);
                let s = scan::summarize(&rows, kind);
                let v = rows.iter().filter(|r| r.is_violation()).count();
                let reg = rows.iter().filter(|r| r.regularized).count();
                match kind {
                    ScanKind::Diagonal => summaries.eth_scan = s,
                    ScanKind::OffDiagonal => summaries.offdiag_scan = s,
                }
                Table::write(name, out_dir, &rows, v, reg, t0)?
            }
            ExperimentName::CorrDecay => {
                let mut rows: Vec<CorrelationRecord> = Vec::new();
                for &size in config.decay.sizes.as_ref().unwrap_or(&config.sizes) {
                    let (s, p, t) = cache.get(size)?;
                    if p.block_count() < 2 {
                        warnings.push(format!("corr-decay: N = {}, N_A = {} has a single block", size.n, size.n_a));
                        continue;
                    }
                    for &beta in &config.decay.betas {
                        let w = ensembles::thermal_weights(s.energies(), beta);
                        let recs = decay::correlation_decay_probe(&t.mixture(&w), p, Some(beta))?;
                        summaries.corr_decay.extend(decay::summarize(&recs));
                        rows.extend(recs);
                    }
                }
                let v = rows.iter().filter(|r| r.pinsker_gap < -tol.invariant).count();
                Table::write(name, out_dir, &rows, v, 0, t0)?
            }
            ExperimentName::Chebyshev => {
                let mut rows: Vec<ChebyshevRow> = Vec::new();
                let c = &config.chebyshev;
                for &size in c.sizes.as_ref().unwrap_or(&config.sizes) {
                    let dim = cache.dim(size);
                    if dim > c.max_dim {
                        warnings.push(format!("chebyshev: skipped N = {} (dim {dim} > {})", size.n, c.max_dim));
                        continue;
                    }
                    let (s, p, _) = cache.get(size)?;
                    rows.extend(chebyshev_rows(config, s, p)?);
                }
                let v = rows.iter().filter(|r| r.status != "ok").count();
                Table::write(name, out_dir, &rows, v, 0, t0)?
            }
            ExperimentName::Typicality => {
                let mut rows: Vec<TypicalityReport> = Vec::new();
                let c = &config.typicality;
                for &size in c.sizes.as_ref().unwrap_or(&config.sizes) {
                    let dim = cache.dim(size);
                    if dim > c.max_dim {
                        warnings.push(format!("typicality: skipped N = {} (dim {dim} > {})", size.n, c.max_dim));
                        continue;
                    }
                    let (s, p, _) = cache.get(size)?;
                    for &beta in &c.betas {
                        let w = ensembles::thermal_weights(s.energies(), beta);
                        rows.push(typicality::typicality_balance(s, p, &w, Some(beta), config.seed, tol.identity)?);
                    }
                }
                let v = rows.iter().filter(|r| r.status != "ok").count();
                let reg = rows.iter().filter(|r| r.regularized).count();
                Table::write(name, out_dir, &rows, v, reg, t0)?
            }
            ExperimentName::EnsembleEq => {
                let mut rows: Vec<EquivalenceRecord> = Vec::new();
                let c = &config.equivalence;
                let shell = match config.ensemble.delta {
                    Some(d) => ShellChoice::Width(d),
                    None => ShellChoice::Count(c.shell_size),
                };
                for &size in c.sizes.as_ref().unwrap_or(&config.sizes) {
                    let (s, p, t) = cache.get(size)?;
                    let e = s.energies();
                    for &pos in &c.positions {
                        let center = e[(pos * (e.len() - 1) as f64).round() as usize];
                        rows.push(equivalence::ensemble_equivalence(
                            s,
                            p,
                            t,
                            center,
                            shell,
                            tol.regularization,
                            tol.invariant,
                        )?);
                    }
                }
                let v = rows.iter().filter(|r| r.status == "violation").count();
                let reg = rows.iter().filter(|r| r.regularized).count();
                Table::write(name, out_dir, &rows, v, reg, t0)?
            }
            ExperimentName::InequalityAudit => {
                let rows: Vec<AuditRow> = audit::random_audit(config.seed, &config.audit)?;
                let v = rows.iter().filter(|r| !r.is_ok()).count();
                let reg = rows.iter().filter(|r| r.regularized).count();
                Table::write(name, out_dir, &rows, v, reg, t0)?
            }
        };
        entries.push(table.entry);
    }

    let manifest = Manifest {
        tool: "subeth",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: config.hash(),
        seed: config.seed,
        threads,
        regularization_incidents: entries.iter().map(|e| e.regularized).sum(),
        violations: entries.iter().map(|e| e.violations).sum(),
        experiments: entries,
        summaries,
        warnings,
        spectrum_wall_time_s: cache.seconds,
        total_wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    write_text_atomic(&out_dir.join("manifest.json"), &(json + "\n"))?;
    Ok(manifest)
}

/// Canonical instance at the configured β and a microcanonical shell at the
/// middle of the spectrum (or at `ensemble.energy`).
pub fn chebyshev_rows(config: &ExperimentConfig, s: &ChainSpectrum, p: &BlockPartition) -> Result<Vec<ChebyshevRow>> {
    let c = &config.chebyshev;
    let reg = config.tolerances.regularization;
    let observables = chebyshev::block_observables(p, config.seed)?;
    let e = s.energies();
    let mut rows = Vec::new();

    let beta = config.ensemble.beta.unwrap_or(c.beta);
    let w = ensembles::thermal_weights(e, beta);
    let canonical = ChebyshevInstance {
        spectrum: s,
        partition: p,
        weights: &w,
        ensemble: "canonical",
        beta: Some(beta),
    };
    rows.extend(canonical.deviation_rows(&observables, &c.epsilons)?);
    if s.dim() <= c.canonical_max_dim {
        rows.extend(canonical.row_variance_rows(&c.epsilons, reg)?);
    }

    let center = config.ensemble.energy.unwrap_or(e[e.len() / 2]);
    let shell = match config.ensemble.delta {
        Some(d) => ensembles::shell_indices(e, center, d)?,
        None => ensembles::adaptive_shell(e, center, config.equivalence.shell_size)?.indices,
    };
    let mut w = vec![0.0; e.len()];
    for &i in &shell {
        w[i] = 1.0 / shell.len() as f64;
    }
    let micro = ChebyshevInstance {
        spectrum: s,
        partition: p,
        weights: &w,
        ensemble: "microcanonical",
        beta: None,
    };
    rows.extend(micro.deviation_rows(&observables, &c.epsilons)?);
    rows.extend(micro.row_variance_rows(&c.epsilons, reg)?);
    Ok(rows)
}

/// Ascending eigenvalues for every distinct `N` in the config, as
/// `(n, index, energy)` rows.
pub fn spectrum_rows(config: &ExperimentConfig) -> Result<Vec<SpectrumRow>> {
    let mut ns: Vec<usize> = config.all_sizes().iter().map(|s| s.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::new();
    for n in ns {
        let lattice = LatticeSpec::chain(n, config.local_dim)?;
        let h = crate::models::build_hamiltonian(&lattice, &config.model)?;
        let values = crate::linalg::hermitian_eig(&h)?.eigenvalues;
        rows.extend(values.into_iter().enumerate().map(|(index, energy)| SpectrumRow { n, index, energy }));
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    pub index: usize,
    pub energy: f64,
}
