mod common;

use common::c;
use krausc_core::ir::channel_distance;
use krausc_core::linalg;
use krausc_core::lindfront::{self, QuadratureSpec};
use krausc_core::{LindbladSpec, PauliSum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_spec(seed: u64, n: usize, jumps: usize) -> LindbladSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = common::random_sum(&mut rng, n, 3);
    let h = PauliSum::from_terms(n, h.terms().iter().map(|(z, p)| (c(z.re, 0.0), *p)).collect()).unwrap();
    let jumps = (0..jumps).map(|_| common::random_sum(&mut rng, n, 2)).collect();
    LindbladSpec::new(h, jumps).unwrap()
}

fn first_order_error(spec: &LindbladSpec, delta: f64) -> f64 {
    let ch = lindfront::first_order(spec, delta).unwrap();
    let exact = lindfront::exact_propagator(spec, delta).unwrap();
    channel_distance(&ch, &exact, 16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_order_error_is_quadratic(seed in any::<u64>(), n in 1usize..=2, jumps in 0usize..=2) {
        let spec = random_spec(seed, n, jumps);
        let norm = lindfront::lindblad_opnorm(&spec).unwrap();
        let delta = 0.02 / norm.max(1e-3);
        let (e1, e2) = (first_order_error(&spec, delta), first_order_error(&spec, delta / 2.0));
        prop_assert!(e2 <= 0.35 * e1 + 1e-13, "e(δ)={e1}, e(δ/2)={e2}");
        prop_assert!(e1 <= 5.0 * (delta * norm).powi(2) + 1e-13);
    }

    #[test]
    fn lowering_is_well_typed(seed in any::<u64>(), n in 1usize..=3, jumps in 0usize..=3, order in 1usize..=3) {
        let spec = random_spec(seed, n, jumps);
        let first = lindfront::first_order(&spec, 0.01).unwrap();
        prop_assert_eq!(first.typecheck().unwrap(), n);
        prop_assert_eq!(first.kraus.len(), 1 + jumps);
        let quad = QuadratureSpec::for_order(order).unwrap();
        let higher = lindfront::higher_order(&spec, 0.01, quad).unwrap();
        prop_assert_eq!(higher.typecheck().unwrap(), n);
    }

    #[test]
    fn dissipator_sum_is_hermitian_psd(seed in any::<u64>(), n in 1usize..=3, jumps in 1usize..=3) {
        let spec = random_spec(seed, n, jumps);
        let d = lindfront::dissipator_sum(&spec).unwrap();
        prop_assert!(d.is_hermitian(1e-12));
        let eig = linalg::hermitian_eigenvalues(&d.to_matrix().unwrap());
        prop_assert!(eig.iter().all(|&e| e > -1e-10));
    }
}

#[test]
fn higher_order_beats_first_order_on_random_specs() {
    for seed in 0..6 {
        let spec = random_spec(seed, 2, 2);
        let delta = 0.05 / lindfront::lindblad_opnorm(&spec).unwrap();
        let exact = lindfront::exact_propagator(&spec, delta).unwrap();
        let err = |k| {
            let ch = lindfront::higher_order(&spec, delta, QuadratureSpec::for_order(k).unwrap()).unwrap();
            channel_distance(&ch, &exact, 16).unwrap()
        };
        let (e1, e2) = (err(1), err(2));
        assert!(e2 < e1, "seed {seed}: K=1 {e1}, K=2 {e2}");
    }
}

#[test]
fn zero_step_is_identity() {
    let spec = random_spec(3, 2, 1);
    assert!(lindfront::first_order(&spec, 0.0).is_err());
    let input = krausc_core::format::Input::Spec(spec);
    let ch = krausc_core::pipeline::lower(&input, None, 0.0).unwrap();
    let rho = linalg::basis_density(4, 2);
    let out = krausc_core::ir::apply_channel(&ch, &rho).unwrap();
    assert!(linalg::max_abs_diff(&out, &rho) < 1e-15);
}
