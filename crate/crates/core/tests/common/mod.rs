#![allow(dead_code)]

use krausc_core::linalg::{self, CMatrix};
use krausc_core::{ChannelExpr, KrausExpr, PauliString, PauliSum};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ps(label: &str) -> PauliString {
    PauliString::from_label(label, 0).unwrap()
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    // Box-Muller keeps the helper free of extra distribution crates.
    let u1: f64 = rng.random_range(1e-12..1.0);
    let u2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    c(r * u2.cos(), r * u2.sin()) / std::f64::consts::SQRT_2
}

pub fn random_string<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PauliString {
    let mask = (1u64 << n) - 1;
    PauliString::from_masks(n, rng.random::<u64>() & mask, rng.random::<u64>() & mask, 0).unwrap()
}

/// `m` distinct strings (identity allowed) with Gaussian coefficients.
pub fn random_sum<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> PauliSum {
    let m = m.min(1 << (2 * n));
    let mut seen = std::collections::HashSet::new();
    let mut terms = Vec::new();
    while terms.len() < m {
        let p = random_string(rng, n);
        if seen.insert(p.key()) {
            terms.push((gaussian(rng), p));
        }
    }
    PauliSum::from_terms(n, terms).unwrap()
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CMatrix {
    let a = CMatrix::from_fn(m, m, |_, _| gaussian(rng));
    a.qr().q()
}

/// Rescales a channel so that `‖Σ K†K‖ = 1`.
pub fn normalize(ch: &ChannelExpr) -> ChannelExpr {
    let dim = 1 << ch.n;
    let mut s = CMatrix::zeros(dim, dim);
    for k in ch.kraus_matrices().unwrap() {
        s += k.adjoint() * k;
    }
    let f = c(1.0 / linalg::operator_norm(&s).sqrt(), 0.0);
    ChannelExpr::new(ch.kraus.iter().map(|k| k.scale(f)).collect())
}

pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, terms: usize) -> ChannelExpr {
    let sums: Vec<PauliSum> = (0..m).map(|_| random_sum(rng, n, terms)).collect();
    normalize(&ChannelExpr::from_pauli_sums(&sums))
}

/// `m` operators `K'_j = Σ_k u_jk K_k` from the first columns of a Haar unitary.
pub fn mix(rng: &mut impl Rng, base: &ChannelExpr, m: usize) -> ChannelExpr {
    let u = haar_unitary(rng, m);
    let kraus = (0..m)
        .map(|j| {
            let mut terms = Vec::new();
            for (k, op) in base.kraus.iter().enumerate() {
                let s = op.scale(u[(j, k)]);
                terms.extend(s.terms);
            }
            KrausExpr::new(base.n, terms).canonicalize()
        })
        .collect();
    ChannelExpr::new(kraus)
}

/// Rank of the span of the vectorized Kraus matrices via singular values.
pub fn span_rank(mats: &[CMatrix], rel_tol: f64) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let d = mats[0].len();
    let cols = CMatrix::from_fn(d, mats.len(), |i, j| mats[j].as_slice()[i]);
    let sv = cols.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    // Singular values square to Gram eigenvalues.
    sv.iter().filter(|&&s| s * s > rel_tol * smax * smax && s > 0.0).count()
}

pub fn kraus_dense_sum(mats: &[CMatrix]) -> CMatrix {
    let dim = mats[0].nrows();
    let mut s = CMatrix::zeros(dim, dim);
    for k in mats {
        s += k.adjoint() * k;
    }
    s
}

/// A random trace-preserving channel: the isometry columns of a Haar unitary
/// written back in the Pauli basis.
pub fn random_tp<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> ChannelExpr {
    let dim = 1 << n;
    let u = haar_unitary(rng, m * dim);
    let sums: Vec<PauliSum> = (0..m)
        .map(|j| PauliSum::from_matrix(&u.view((j * dim, 0), (dim, dim)).into_owned()).unwrap())
        .collect();
    ChannelExpr::from_pauli_sums(&sums)
}
