//! Deterministic benchmark families.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ir::{ChannelExpr, KrausExpr, LindbladSpec};
use crate::pauli::{Pauli, PauliString, PauliSum};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `√a/2·(X ∓ iY)` on `site`: `minus` gives `|1⟩⟨0|`, otherwise `|0⟩⟨1|`.
fn ladder(n: usize, site: usize, a: f64, minus: bool) -> PauliSum {
    let s = a.sqrt() / 2.0;
    let y = if minus { c(0.0, -s) } else { c(0.0, s) };
    PauliSum::from_terms(
        n,
        vec![
            (c(s, 0.0), PauliString::single(n, site, Pauli::X)),
            (y, PauliString::single(n, site, Pauli::Y)),
        ],
    )
    .expect("arity matches")
    .canonicalize()
}

/// Single-qubit thermal amplitude damping: `L₁ = √(γ(N̄+1))|1⟩⟨0|`,
/// `L₂ = √(γN̄)|0⟩⟨1|`, no Hamiltonian.
pub fn gen_decay(gamma: f64, nbar: f64) -> Result<LindbladSpec> {
    if !(gamma >= 0.0 && nbar >= 0.0 && gamma.is_finite() && nbar.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "decay needs γ ≥ 0 and N̄ ≥ 0, got γ={gamma}, N̄={nbar}"
        )));
    }
    LindbladSpec::new(
        PauliSum::zero(1),
        vec![ladder(1, 0, gamma * (nbar + 1.0), true), ladder(1, 0, gamma * nbar, false)],
    )
}

/// Periodic transverse-field Ising chain with local decay on every site:
/// `H = −Σ Z_i Z_{i+1} − Σ X_i`, `L_j = √γ(X_j − iY_j)/2`.
pub fn gen_tfim(n: usize, gamma: f64) -> Result<LindbladSpec> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("TFIM needs at least 2 sites, got {n}")));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("TFIM needs γ ≥ 0, got {gamma}")));
    }
    let mut h = PauliSum::zero(n);
    for i in 0..n {
        let j = (i + 1) % n;
        let zz = PauliString::single(n, i, Pauli::Z).mul_unchecked(&PauliString::single(n, j, Pauli::Z));
        h.push(c(-1.0, 0.0), zz)?;
    }
    for i in 0..n {
        h.push(c(-1.0, 0.0), PauliString::single(n, i, Pauli::X))?;
    }
    let jumps = (0..n).map(|j| ladder(n, j, gamma, true)).collect();
    LindbladSpec::new(h.canonicalize(), jumps)
}

/// `m` distinct non-identity strings with complex Gaussian coefficients.
pub fn gen_random_pauli(n: usize, m: usize, seed: u64) -> Result<KrausExpr> {
    if n == 0 || n > 32 {
        return Err(Error::InvalidArgument(format!("random Pauli sums need 1 ≤ n ≤ 32, got {n}")));
    }
    let available = (1u128 << (2 * n)) - 1;
    if m == 0 || m as u128 > available {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {m} distinct non-identity strings on {n} qubits"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask = (1u64 << n) - 1;
    let mut seen = std::collections::HashSet::new();
    let mut terms = Vec::with_capacity(m);
    while terms.len() < m {
        let (x, z) = (rng.random::<u64>() & mask, rng.random::<u64>() & mask);
        if (x | z) == 0 || !seen.insert((x, z)) {
            continue;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let p = PauliString::from_masks(n, x, z, 0)?;
        terms.push((c(re, im), p));
    }
    Ok(KrausExpr::from_pauli_sum(&PauliSum::from_terms(n, terms)?))
}

/// Hypercube-like walk channel with `2N` Kraus operators of four terms
/// each, on `⌈log₂ N⌉ + 1` qubits (qubit 0 is a coin).
///
/// Every operator is `Σ a_i P_i` over four pairwise anticommuting strings
/// `{X_c A, Y_c A, Z_c A, B}` with `A = X_j` (a hypercube step) and `B` a
/// `Z` check that anticommutes with `A`, so `K†K = (Σa_i²)·I` and a global
/// rescale makes the channel exactly trace preserving.
pub fn gen_hypercube_like(n_walk: usize, seed: u64) -> Result<ChannelExpr> {
    if n_walk < 2 {
        return Err(Error::InvalidArgument(format!("hypercube-like needs N ≥ 2, got {n_walk}")));
    }
    let d = (usize::BITS - (n_walk - 1).leading_zeros()) as usize;
    let n = d + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let single = |site: usize, p: Pauli| PauliString::single(n, site, p);
    let mut sums = Vec::with_capacity(2 * n_walk);
    let mut total = 0.0;
    for k in 0..n_walk {
        for side in 0..2 {
            let j = 1 + k % d;
            let other = 1 + (k + 1 + side) % d;
            let a = single(j, Pauli::X);
            let b = if other == j {
                single(j, Pauli::Z)
            } else {
                single(j, Pauli::Z).mul_unchecked(&single(other, Pauli::Z))
            };
            let strings = [
                single(0, Pauli::X).mul_unchecked(&a),
                single(0, Pauli::Y).mul_unchecked(&a),
                single(0, Pauli::Z).mul_unchecked(&a),
                b,
            ];
            let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let mut terms = Vec::with_capacity(4);
            for p in strings {
                let a: f64 = rng.random_range(0.5..1.5);
                total += a * a;
                terms.push((phase * a, p));
            }
            sums.push(PauliSum::from_terms(n, terms)?);
        }
    }
    let scale = c(1.0 / total.sqrt(), 0.0);
    let sums: Vec<PauliSum> = sums.iter().map(|s| s.scale(scale)).collect();
    Ok(ChannelExpr::from_pauli_sums(&sums))
}
