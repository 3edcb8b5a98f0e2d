use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subeth::config::ExperimentConfig;
use subeth::divergences::{self, BsForm};
use subeth::experiments::audit;
use subeth::linalg::{self, SiteSplit};
use subeth::random::{random_density, random_density_rank, random_hermitian};
use subeth::{ensembles, DensityMatrix};

fn state(seed: u64, dim: usize) -> DensityMatrix {
    DensityMatrix::new(random_density(&mut ChaCha8Rng::seed_from_u64(seed), dim)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn entropy_chain_holds(seed in any::<u64>(), dim in 2usize..7) {
        let sigma = state(seed, dim);
        let rho = state(seed ^ 0x9e37_79b9, dim);
        let s = divergences::umegaki(&sigma, &rho).unwrap();
        let t = linalg::trace_distance(sigma.matrix(), rho.matrix()).unwrap();
        let bs = [BsForm::Sandwich, BsForm::Similarity, BsForm::Rescaled]
            .map(|f| divergences::bs_entropy(&sigma, &rho, f).unwrap());
        prop_assert!(s >= 2.0 * t * t - 1e-10);
        prop_assert!(bs[0] >= s - 1e-10);
        prop_assert!((bs[0] - bs[1]).abs() < 1e-8 && (bs[0] - bs[2]).abs() < 1e-8);
    }

    #[test]
    fn rank_deficient_first_argument(seed in any::<u64>(), dim in 2usize..7, rank in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = DensityMatrix::new(random_density_rank(&mut rng, dim, rank.min(dim))).unwrap();
        let rho = state(seed.wrapping_add(1), dim);
        let r = audit::inequality_audit(&sigma, &rho).unwrap();
        prop_assert!(r.umegaki.is_finite() && r.min_slack() >= -1e-8, "{r:?}");
    }

    #[test]
    fn partial_trace_keeps_a_state(seed in any::<u64>(), a in 2usize..4, b in 2usize..4) {
        let rho = state(seed, a * b);
        let split = SiteSplit::new(&[a, b], &[0]).unwrap();
        let reduced = DensityMatrix::new(split.trace_out(rho.matrix()).hermitian_part()).unwrap();
        prop_assert_eq!(reduced.dim(), a);
        let x = state(seed ^ 1, a);
        let y = state(seed ^ 2, b);
        let back = split.trace_out(&x.matrix().kron(y.matrix()));
        prop_assert!((&back - x.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn hoelder_diagonal_slack(seed in any::<u64>(), k in 2usize..4) {
        let rho = state(seed, k * k);
        let sigma = state(seed ^ 7, k);
        let split = SiteSplit::new(&[k, k], &[0]).unwrap();
        let r = audit::hoelder_diagonal(&rho, &split, &sigma).unwrap();
        prop_assert!(r.hoelder_slack >= -1e-8 * r.variance.max(1.0), "{r:?}");
    }

    #[test]
    fn beta_matching_inverts_mean_energy(seed in any::<u64>(), beta in -2.0f64..2.0) {
        let h = random_hermitian(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let e = linalg::hermitian_eig(&h).unwrap().eigenvalues;
        let w = ensembles::thermal_weights(&e, beta);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let back = ensembles::match_beta_spectrum(&e, ensembles::mean_energy(&e, beta)).unwrap();
        prop_assert!((back - beta).abs() < 1e-6, "{back} vs {beta}");
    }

    #[test]
    fn config_round_trips(seed in 0..=i64::MAX as u64, fraction in 0.01f64..1.0, cap in 1usize..500) {
        let text = format!("seed = {seed}\nsizes = [{{ n = 8, n_a = 4 }}]\n[selection]\nfraction = {fraction}\ncap = {cap}\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
