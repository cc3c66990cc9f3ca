mod common;

use common::{c, ps};
use krausc_core::ir::{apply_channel, expr_distance};
use krausc_core::linalg::{self, CMatrix};
use krausc_core::rewrite::{self, apply_rule, Rule};
use krausc_core::{ChannelExpr, ChannelMap, Error, KrausExpr, PauliSum, Primitive};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tp_channels_preserve_trace_and_positivity(seed in any::<u64>(), n in 1usize..=2, m in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = common::random_tp(&mut rng, n, m);
        let rho = linalg::random_density(1 << n, &mut rng);
        let out = apply_channel(&ch, &rho).unwrap();
        prop_assert!((linalg::trace(&out).re - 1.0).abs() < 1e-10);
        prop_assert!(linalg::hermitian_eigenvalues(&out).iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn apply_is_linear_in_rho(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = common::random_channel(&mut rng, n, 2, 3);
        let a = linalg::random_density(1 << n, &mut rng);
        let b = linalg::random_density(1 << n, &mut rng);
        let t = 0.3;
        let mix = &a * c(t, 0.0) + &b * c(1.0 - t, 0.0);
        let lhs = ch.apply(&mix).unwrap();
        let rhs = ch.apply(&a).unwrap() * c(t, 0.0) + ch.apply(&b).unwrap() * c(1.0 - t, 0.0);
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn simplify_is_sound_and_idempotent(seed in any::<u64>(), n in 1usize..=3, minimize in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::random_channel(&mut rng, n, 2, 3);
        let ch = common::mix(&mut rng, &base, 3);
        let (once, _) = rewrite::simplify(&ch, minimize).unwrap();
        prop_assert!(expr_distance(&ch, &once, 8).unwrap() < 1e-9);
        let (twice, _) = rewrite::simplify(&once, minimize).unwrap();
        prop_assert_eq!(twice.kraus.len(), once.kraus.len());
        prop_assert!(expr_distance(&once, &twice, 8).unwrap() < 1e-12);
        if !minimize {
            prop_assert_eq!(twice, once);
        }
    }

    #[test]
    fn minimization_reaches_span_rank(seed in any::<u64>(), r in 1usize..=3, extra in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = common::random_channel(&mut rng, 2, r, 4);
        let ch = common::mix(&mut rng, &base, r + extra);
        let want = common::span_rank(&ch.kraus_matrices().unwrap(), 1e-9);
        let (min, _) = rewrite::minimize_kraus_rank(&ch).unwrap();
        prop_assert_eq!(min.kraus.len(), want);
        prop_assert!(expr_distance(&ch, &min, 8).unwrap() < 1e-9);
        let (again, _) = rewrite::minimize_kraus_rank(&min).unwrap();
        prop_assert_eq!(again.kraus.len(), want);
    }
}

#[test]
fn mixed_arity_is_rejected() {
    let ch = ChannelExpr::new(vec![
        KrausExpr::new(2, vec![(c(1.0, 0.0), Primitive::Pauli(ps("XI")))]),
        KrausExpr::new(1, vec![(c(1.0, 0.0), Primitive::Pauli(ps("Z")))]),
    ]);
    assert!(matches!(ch.typecheck(), Err(Error::ArityMismatch { .. })));
}

#[test]
fn c2_rejects_non_unitary_mixing() {
    let ch = ChannelExpr::from_pauli_sums(&[
        PauliSum::from_labels(&[(c(0.5, 0.0), "I")]).unwrap(),
        PauliSum::from_labels(&[(c(0.5, 0.0), "Z")]).unwrap(),
    ]);
    let u = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(apply_rule(&ch, &Rule::C2 { u }).is_err());
}

#[test]
fn three_copies_collapse_to_one() {
    let k = PauliSum::from_labels(&[(c(0.3, 0.1), "XY"), (c(-0.2, 0.0), "ZI")]).unwrap();
    let ch = ChannelExpr::from_pauli_sums(&[k.clone(), k.clone(), k.clone()]);
    let (min, _) = rewrite::minimize_kraus_rank(&ch).unwrap();
    assert_eq!(min.kraus.len(), 1);
    let want = k.scale(c(3f64.sqrt(), 0.0)).to_matrix().unwrap();
    let got = min.kraus[0].eval().unwrap();
    // Equal up to a global phase.
    let phase = linalg::trace(&(want.adjoint() * &got)) / linalg::trace(&(want.adjoint() * &want));
    assert!((phase.norm() - 1.0).abs() < 1e-10);
    assert!(linalg::max_abs_diff(&(want * phase), &got) < 1e-10);
}

#[test]
fn zero_kraus_is_removed() {
    let zero = PauliSum::from_labels(&[(c(0.5, 0.0), "X"), (c(-0.5, 0.0), "X")]).unwrap();
    let ch = ChannelExpr::from_pauli_sums(&[PauliSum::identity(1), zero]);
    let (out, _) = rewrite::simplify(&ch, false).unwrap();
    assert_eq!(out.kraus.len(), 1);
}
