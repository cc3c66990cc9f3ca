use krausc_core::bench::{gen_decay, gen_hypercube_like, gen_random_pauli, gen_tfim};
use krausc_core::linalg::{self, CMatrix};
use krausc_core::lindfront::first_order;
use krausc_core::LindbladSpec;
use proptest::prelude::*;

fn tp_defect(spec: &LindbladSpec, delta: f64) -> f64 {
    let ch = first_order(spec, delta).unwrap();
    let dim = 1 << ch.n;
    let mut s = CMatrix::zeros(dim, dim);
    for k in ch.kraus_matrices().unwrap() {
        s += k.adjoint() * k;
    }
    linalg::operator_norm(&(s - linalg::identity(dim)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_are_deterministic(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=12, walk in 2usize..=12) {
        prop_assert_eq!(gen_random_pauli(n, m.min((1 << (2 * n)) - 1), seed).unwrap(),
                        gen_random_pauli(n, m.min((1 << (2 * n)) - 1), seed).unwrap());
        prop_assert_eq!(gen_hypercube_like(walk, seed).unwrap(), gen_hypercube_like(walk, seed).unwrap());
    }

    #[test]
    fn first_order_is_trace_preserving_to_second_order(gamma in 0.1f64..2.0, nbar in 0.0f64..2.0, sites in 2usize..=4) {
        for spec in [gen_decay(gamma, nbar).unwrap(), gen_tfim(sites, gamma).unwrap()] {
            let (d1, d2) = (tp_defect(&spec, 0.01), tp_defect(&spec, 0.005));
            prop_assert!(d1 < 1e-2);
            prop_assert!(d2 <= 0.26 * d1 + 1e-14, "defect {d1} then {d2}");
        }
    }
}

#[test]
fn different_seeds_give_different_instances() {
    assert_ne!(gen_random_pauli(3, 6, 1).unwrap(), gen_random_pauli(3, 6, 2).unwrap());
    assert_ne!(gen_hypercube_like(8, 1).unwrap(), gen_hypercube_like(8, 2).unwrap());
}

#[test]
fn hypercube_sizes() {
    for (walk, qubits) in [(2, 2), (4, 3), (8, 4), (12, 5)] {
        let ch = gen_hypercube_like(walk, 0).unwrap();
        assert_eq!(ch.n, qubits);
        assert_eq!(ch.kraus.len(), 2 * walk);
        assert!(ch.kraus.iter().all(|k| k.len() == 4));
    }
}
