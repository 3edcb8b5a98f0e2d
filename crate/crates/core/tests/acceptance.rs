//! Acceptance run: one line per criterion. Exits nonzero when a criterion
//! fails that is not listed in `KNOWN_FAILURES`.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use subeth::config::ExperimentConfig;
use subeth::divergences::{self, BsForm};
use subeth::experiments::audit::{self, AuditParams};
use subeth::experiments::decay;
use subeth::experiments::equivalence::{self, ShellChoice};
use subeth::experiments::scan::{self, ScalingRecord, ScanContext, ScanKind, ScanParams};
use subeth::experiments::typicality;
use subeth::experiments::{ChainSpectrum, EigenBasis, ThermalMarginals};
use subeth::random::{random_density, random_hermitian};
use subeth::runner::{self, RunOptions};
use subeth::states::BlockPartition;
use subeth::{ensembles, models, ComplexMatrix, DensityMatrix, HamiltonianSpec, LatticeSpec};

/// Criteria that cannot be met at these system sizes; they still print FAIL.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    9,
    "fitted exponent of the diagonal median is steeper than the band at N <= 12",
)];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

struct Chain {
    spectrum: ChainSpectrum,
    partition: BlockPartition,
    thermal: ThermalMarginals,
}

fn chain(n: usize) -> Chain {
    let lattice = LatticeSpec::chain(n, 2).unwrap();
    let spectrum = ChainSpectrum::compute(&lattice, &HamiltonianSpec::default(), EigenBasis::Momentum).unwrap();
    let partition = BlockPartition::new(lattice, 2).unwrap();
    let thermal = ThermalMarginals::new(&spectrum, &partition).unwrap();
    Chain {
        spectrum,
        partition,
        thermal,
    }
}

fn divergence_suite() -> (Outcome, Outcome) {
    let start = Instant::now();
    let rows = audit::random_audit(11, &AuditParams::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let div: Vec<_> = rows.iter().filter(|r| r.kind == "divergence").collect();
    let spread = div.iter().filter_map(|r| r.form_spread).fold(0.0, f64::max);
    let pinsker = div.iter().filter_map(|r| r.pinsker_slack).fold(f64::INFINITY, f64::min);
    let bs = div.iter().filter_map(|r| r.bs_vs_umegaki_slack).fold(f64::INFINITY, f64::min);
    let bad = div.iter().filter(|r| !r.is_ok()).count();
    let c1 = outcome(
        1,
        div.len() >= 1000 && spread <= 1e-8 && pinsker >= -1e-8 && bs >= -1e-8 && bad == 0 && secs < 60.0,
        format!(
            "{} pairs, max form spread {spread:.1e}, min Pinsker slack {pinsker:.2e}, min BS-Umegaki slack {bs:.2e}, {bad} violations, {secs:.1} s (whole audit)",
            div.len()
        ),
    );
    let h: Vec<_> = rows.iter().filter(|r| r.kind.starts_with("hoelder")).collect();
    let diag = h.iter().filter(|r| r.kind == "hoelder_diagonal").count();
    let min_slack = h.iter().map(|r| r.hoelder_slack).fold(f64::INFINITY, f64::min);
    let max_dim = h.iter().map(|r| r.dim).max().unwrap_or(0);
    let bad = h.iter().filter(|r| !r.is_ok()).count();
    let c2 = outcome(
        2,
        diag >= 500 && h.len() - diag >= 500 && max_dim <= 16 && bad == 0 && secs < 60.0,
        format!(
            "{diag} diagonal + {} off-diagonal instances, dims <= {max_dim}, min slack {min_slack:.2e}, {bad} violations",
            h.len() - diag
        ),
    );
    (c1, c2)
}

fn petz_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut trace_err, mut min_eig, mut pullup, mut min_corr) = (0.0f64, f64::INFINITY, 0.0f64, f64::INFINITY);
    let mut count = 0;
    let shapes = [(2, 1), (3, 1), (4, 1), (4, 2), (6, 1), (6, 2), (8, 1), (8, 2)];
    for k in 0..200 {
        let (n, n_a) = shapes[k % shapes.len()];
        let model = HamiltonianSpec::tfim(rng.gen_range(0.5..1.5), rng.gen_range(0.3..1.5), rng.gen_range(-0.8..0.8));
        let beta = rng.gen_range(0.1..1.0);
        let lattice = LatticeSpec::chain(n, 2).unwrap();
        let h = models::build_hamiltonian(&lattice, &model).unwrap();
        let rho = ensembles::gibbs_state(&h, beta).unwrap();
        let partition = BlockPartition::new(lattice, n_a).unwrap();
        let mi = divergences::mutual_information(&rho, &partition.lattice().site_dims(), &partition.block_sites(0).unwrap())
            .unwrap();
        min_corr = min_corr.min(mi);
        let sigma = DensityMatrix::new(random_density(&mut rng, partition.block_dim())).unwrap();
        let block = rng.gen_range(0..partition.block_count());
        let recovered = divergences::petz_recovery(&rho, &partition, block, &sigma).unwrap();
        trace_err = trace_err.max((recovered.trace().re - 1.0).abs());
        let eig = subeth::linalg::hermitian_eig(&recovered.hermitian_part()).unwrap();
        min_eig = min_eig.min(eig.eigenvalues[0]);
        pullup = pullup.max(divergences::pullup_identity_residual(&rho, &partition, block, &sigma).unwrap());
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        3,
        count >= 200 && trace_err <= 1e-8 && min_eig >= -1e-8 && pullup <= 1e-6 && min_corr > 0.0 && secs < 120.0,
        format!(
            "{count} Gibbs instances, trace error {trace_err:.1e}, min eigenvalue {min_eig:.1e}, max pull-up residual {pullup:.1e}, min block mutual information {min_corr:.1e}, {secs:.1} s"
        ),
    )
}

fn decomposition(records: &[&ScalingRecord]) -> Outcome {
    let (mut split, mut local, mut checked) = (0.0f64, 0.0f64, 0);
    for r in records {
        if let (Some(t), Some(l), Some(x), Some(b), Some(c)) =
            (r.variance_total, r.variance_local, r.variance_cross, r.variance_block, r.c)
        {
            split = split.max((t - l - x).abs());
            local = local.max((l - b / c as f64).abs());
            checked += 1;
        }
    }
    outcome(
        4,
        checked == records.len() && split <= 1e-8 && local <= 1e-8,
        format!("{checked}/{} scan records, max |total - local - cross| {split:.1e}, max |local - V_1/C| {local:.1e}", records.len()),
    )
}

fn moment_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut m1, mut m2, mut series, mut max_dist) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut perturbed = 0;
    let count = 200;
    for _ in 0..count {
        let dim = rng.gen_range(2..=8);
        let rho = DensityMatrix::new(random_density(&mut rng, dim)).unwrap();
        let sigma = DensityMatrix::new(random_density(&mut rng, dim)).unwrap();
        let o = divergences::formal_observable(&rho, &sigma).unwrap().matrix;
        m1 = m1.max(divergences::moment(&rho, &o, 1).unwrap().abs());
        let v = divergences::quantum_variance(&rho, &o).unwrap();
        m2 = m2.max((divergences::moment(&rho, &o, 2).unwrap() - v).abs());

        // σ = ρ + J_ρ^{1/2}(Y) for a small traceless-in-ρ Hermitian Y
        let y = random_hermitian(&mut rng, dim);
        let shift = rho.expectation(&y).unwrap().re;
        let y = &y - &ComplexMatrix::identity(dim).scale_real(shift);
        let y = y.scale_real(rng.gen_range(0.01..0.1) / subeth::linalg::schatten_norm(&y, 2.0).unwrap());
        let sqrt = rho.sqrt();
        let near = (rho.matrix() + &(&(&sqrt * &y) * &sqrt)).hermitian_part();
        let Ok(near) = DensityMatrix::new(near) else { continue };
        let o = divergences::formal_observable(&rho, &near).unwrap().matrix;
        let d = divergences::bs_series_residual(&rho, &o, 6).unwrap();
        let spectral = divergences::bs_entropy(&near, &rho, BsForm::Sandwich).unwrap();
        perturbed += 1;
        max_dist = max_dist.max(d.distance);
        series = series.max((d.truncated - spectral).abs());
    }
    outcome(
        5,
        m1 <= 1e-8 && m2 <= 1e-8 && perturbed >= 100 && series <= 1e-8 && max_dist <= 0.1 + 1e-12,
        format!("{count} pairs, max |M1| {m1:.1e}, max |M2 - V| {m2:.1e}; {perturbed} perturbed pairs with ||O - I||_2 <= {max_dist:.3}, series at n_max = 6 max error {series:.1e}"),
    )
}

fn chebyshev_suite(chains: &[&Chain]) -> Outcome {
    let config = ExperimentConfig::from_toml("sizes = [{ n = 8, n_a = 2 }]").unwrap();
    let mut rows = Vec::new();
    for c in chains {
        rows.extend(runner::chebyshev_rows(&config, &c.spectrum, &c.partition).unwrap());
    }
    let bad = rows.iter().filter(|r| r.empirical > r.bound).count();
    let markov = rows
        .iter()
        .filter(|r| r.form == "row_variance")
        .map(|r| (r.moment - r.moment_direct).abs() / r.moment.max(1.0))
        .fold(0.0, f64::max);
    outcome(
        6,
        !rows.is_empty() && bad == 0 && markov <= 1e-8,
        format!(
            "{} (instance, observable, eps) rows at N = 8, 10, canonical and microcanonical, {bad} with empirical > bound; row-variance aggregate vs direct {markov:.1e}",
            rows.len()
        ),
    )
}

fn typicality_suite(c8: &Chain) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    let mut ok = true;
    for beta in [0.0, 0.2, 1.0] {
        let w = ensembles::thermal_weights(c8.spectrum.energies(), beta);
        let r = typicality::typicality_balance(&c8.spectrum, &c8.partition, &w, Some(beta), 1, 1e-6).unwrap();
        let res = r.basis_residual.max(r.eigen_residual);
        worst = worst.max(res);
        ok &= r.status == "ok";
        parts.push(format!("beta {beta}: lhs {:.4} residual {res:.1e}", r.lhs));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(7, ok && worst <= 1e-6 && secs < 300.0, format!("{}; {secs:.1} s", parts.join(", ")))
}

fn equivalence_suite(c10: &Chain) -> Outcome {
    let e = c10.spectrum.energies();
    let mut ok = true;
    let mut parts = Vec::new();
    for pos in [0.45, 0.5, 0.55] {
        let center = e[(pos * (e.len() - 1) as f64).round() as usize];
        let r = equivalence::ensemble_equivalence(
            &c10.spectrum,
            &c10.partition,
            &c10.thermal,
            center,
            ShellChoice::Count(20),
            1e-12,
            1e-8,
        )
        .unwrap();
        let (lhs, rhs, half) = (r.lhs.unwrap(), r.rhs.unwrap(), r.lhs_half.unwrap());
        ok &= lhs <= rhs && half <= 0.1 && r.status == "ok";
        parts.push(format!("pos {pos}: half-distance {half:.3}, lhs {lhs:.3} <= rhs {rhs:.3}"));
    }
    outcome(8, ok, parts.join("; "))
}

fn scaling(eth: &[ScalingRecord], off: &[ScalingRecord]) -> Outcome {
    let d = &scan::summarize(eth, ScanKind::Diagonal)[0];
    let o = &scan::summarize(off, ScanKind::OffDiagonal)[0];
    let medians = |s: &scan::ScanSummary| -> Vec<f64> { s.sizes.iter().filter_map(|z| z.median_distance).collect() };
    let decreasing = |v: &[f64]| v.len() == 3 && v.windows(2).all(|w| w[1] < w[0]);
    let (dm, om) = (medians(d), medians(o));
    let fit = d.fit.unwrap();
    let band = (-1.2..=-0.15).contains(&fit.slope);
    outcome(
        9,
        decreasing(&dm) && decreasing(&om) && band,
        format!(
            "diagonal medians {:.4?} (decreasing: {}), off-diagonal medians {:.4?} (decreasing: {}), fitted exponent {:.3} +- {:.3}, band [-1.2, -0.15]: {}",
            dm,
            decreasing(&dm),
            om,
            decreasing(&om),
            fit.slope,
            fit.slope_half_width.unwrap_or(f64::NAN),
            if band { "inside" } else { "outside" }
        ),
    )
}

fn decay_suite(c12: &Chain) -> Outcome {
    let run = |beta: f64| {
        let w = ensembles::thermal_weights(c12.spectrum.energies(), beta);
        decay::correlation_decay_probe(&c12.thermal.mixture(&w), &c12.partition, Some(beta)).unwrap()
    };
    let hot = run(0.0);
    let hot_max = hot.iter().map(|r| r.corr_norm).fold(0.0, f64::max);
    let s = decay::summarize(&run(0.2)).unwrap();
    let xi = s.correlation_length.unwrap_or(f64::NAN);
    outcome(
        10,
        s.monotone && xi.is_finite() && xi > 0.0 && hot_max <= 1e-10,
        format!("beta 0.2: monotone {}, correlation length {xi:.3}, preferred {:?}; beta 0: max corr_norm {hot_max:.1e}", s.monotone, s.preferred),
    )
}

fn determinism() -> Outcome {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/smoke.toml")).unwrap();
    let config = ExperimentConfig::from_toml(&text).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let m = runner::run(&config, d.path(), RunOptions::default()).unwrap();
        assert_eq!(m.violations, 0);
    }
    let mut same = 0;
    let mut differ = Vec::new();
    for name in subeth::config::ExperimentName::ALL.map(|n| n.file_name()) {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        if a == b {
            same += 1;
        } else {
            differ.push(name);
        }
    }
    outcome(11, differ.is_empty(), format!("{same}/7 CSVs byte-identical across two runs of configs/smoke.toml; differing: {differ:?}"))
}

fn main() {
    let start = Instant::now();
    let mut results = Vec::new();
    let (c1, c2) = divergence_suite();
    results.extend([c1, c2]);
    results.push(petz_suite());
    results.push(moment_suite());

    let chains: Vec<Chain> = [8, 10, 12].map(chain).into();
    let params = ScanParams::default();
    let mut eth = Vec::new();
    let mut off = Vec::new();
    for c in &chains {
        let ctx = ScanContext::new(&c.spectrum, &c.partition, &c.thermal, params).unwrap();
        eth.extend(ctx.run(ScanKind::Diagonal).unwrap());
        off.extend(ctx.run(ScanKind::OffDiagonal).unwrap());
    }
    let all: Vec<&ScalingRecord> = eth.iter().chain(&off).collect();
    results.push(decomposition(&all));
    results.push(chebyshev_suite(&[&chains[0], &chains[1]]));
    results.push(typicality_suite(&chains[0]));
    results.push(equivalence_suite(&chains[1]));
    results.push(scaling(&eth, &off));
    results.push(decay_suite(&chains[2]));
    results.push(determinism());
    results.sort_by_key(|r| r.id);

    let mut unexpected = 0;
    for r in &results {
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == r.id);
        let tag = match (r.pass, known) {
            (true, _) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {:>2}: {tag}  {}", r.id, r.detail);
        if let (false, Some(k)) = (r.pass, known) {
            println!("              {}", k.1);
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!(
        "acceptance: {passed}/{} pass, {unexpected} unexpected failures, {:.0} s",
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
