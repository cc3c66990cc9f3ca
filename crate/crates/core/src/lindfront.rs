//! Short-time lowering of Lindblad generators to Kraus-form channels.
//!
//! Convention: `dρ/dt = −i[H, ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})`,
//! written as `Jρ + ρJ† + Σ_j L_j ρ L_j†` with `J = −iH − ½ Σ_j L_j†L_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ir::{ChannelExpr, KrausExpr, LindbladSpec, Superoperator};
use crate::linalg::{self, CMatrix};
use crate::pauli::PauliSum;
use crate::quadrature::gauss_legendre;

/// Parameters of the Duhamel expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    /// Number of jump insertions `K`.
    pub order: usize,
    /// Taylor truncation `K′` of every drift exponential.
    pub taylor_order: usize,
    /// Gauss–Legendre nodes `q` per nested integral.
    pub nodes: usize,
}

impl QuadratureSpec {
    pub fn new(order: usize, taylor_order: usize, nodes: usize) -> Result<Self> {
        if order == 0 || taylor_order == 0 || nodes == 0 {
            return Err(Error::InvalidArgument(
                "quadrature parameters K, K′ and q must be positive".into(),
            ));
        }
        Ok(Self {
            order,
            taylor_order,
            nodes,
        })
    }

    /// `K′ = K + 1`, `q = K`.
    pub fn for_order(order: usize) -> Result<Self> {
        Self::new(order, order + 1, order)
    }
}

fn check_spec(spec: &LindbladSpec, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "time step must be positive, got {delta}"
        )));
    }
    if spec.hamiltonian.n() != spec.n {
        return Err(Error::ArityMismatch {
            context: "Hamiltonian".into(),
            expected: spec.n,
            found: spec.hamiltonian.n(),
        });
    }
    for (j, l) in spec.jumps.iter().enumerate() {
        if l.n() != spec.n {
            return Err(Error::ArityMismatch {
                context: format!("jump operator {j}"),
                expected: spec.n,
                found: l.n(),
            });
        }
    }
    if !spec.hamiltonian.is_hermitian(1e-12) {
        return Err(Error::NotHermitian(
            "canonical coefficients must be real".into(),
        ));
    }
    Ok(())
}

/// `Σ_j L_j†L_j`, computed in Pauli algebra.
pub fn dissipator_sum(spec: &LindbladSpec) -> Result<PauliSum> {
    let mut acc = PauliSum::zero(spec.n);
    for l in &spec.jumps {
        acc = acc.add(&l.adjoint().mul(l)?)?;
    }
    Ok(acc.canonicalize())
}

/// `A_0 = I − iδH − (δ/2)Σ L_j†L_j`, `A_j = √δ L_j`; vanishing jumps are skipped.
pub fn first_order(spec: &LindbladSpec, delta: f64) -> Result<ChannelExpr> {
    check_spec(spec, delta)?;
    let n = spec.n;
    let a0 = PauliSum::identity(n)
        .add(&spec.hamiltonian.scale(Complex64::new(0.0, -delta)))?
        .add(&dissipator_sum(spec)?.scale(Complex64::new(-delta / 2.0, 0.0)))?
        .canonicalize();
    let mut kraus = vec![KrausExpr::from_pauli_sum(&a0)];
    for l in &spec.jumps {
        let a = l.scale(Complex64::new(delta.sqrt(), 0.0)).canonicalize();
        if !a.is_empty() {
            kraus.push(KrausExpr::from_pauli_sum(&a));
        }
    }
    Ok(ChannelExpr::new(kraus))
}

/// `Σ_{k ≤ order} M^k / k!`.
fn taylor_exp(m: &CMatrix, order: usize) -> CMatrix {
    let dim = m.nrows();
    let mut term = CMatrix::identity(dim, dim);
    let mut acc = term.clone();
    for k in 1..=order {
        term = &term * m / Complex64::new(k as f64, 0.0);
        acc += &term;
    }
    acc
}

/// Dense `J = −iH − ½ Σ L†L` and the jump matrices.
fn dense_generator(spec: &LindbladSpec) -> Result<(CMatrix, Vec<CMatrix>)> {
    linalg::check_cap(spec.n)?;
    let h = spec.hamiltonian.to_matrix()?;
    let ls = spec
        .jumps
        .iter()
        .map(PauliSum::to_matrix)
        .collect::<Result<Vec<_>>>()?;
    let mut j = h * Complex64::new(0.0, -1.0);
    for l in &ls {
        j -= l.adjoint() * l * Complex64::new(0.5, 0.0);
    }
    Ok((j, ls))
}

/// Odometer over `len` digits in base `base`, last digit fastest.
fn tuples(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut t = vec![0; len];
        for slot in t.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        t
    })
}

/// Duhamel expansion up to `K` jumps with Gauss–Legendre quadrature.
///
/// Level `k` contributes, for every jump tuple and node tuple,
/// `√w · T(J(δ−s_k)) L_{j_k} T(J(s_k−s_{k−1})) ⋯ L_{j_1} T(J s_1)`, where
/// `T` is the order-`K′` Taylor polynomial of the exponential and
/// `0 ≤ s_1 ≤ … ≤ s_k ≤ δ` come from nesting the rule on shrinking intervals.
pub fn higher_order(spec: &LindbladSpec, delta: f64, quad: QuadratureSpec) -> Result<ChannelExpr> {
    check_spec(spec, delta)?;
    let (j, ls) = dense_generator(spec)?;
    let t = |s: f64| taylor_exp(&(&j * Complex64::new(s, 0.0)), quad.taylor_order);
    let (xs, ws) = gauss_legendre(quad.nodes);

    let mut mats = vec![t(delta)];
    if !ls.is_empty() {
        for level in 1..=quad.order {
            for nodes in tuples(quad.nodes, level) {
                // nodes[0] picks s_k, nodes[1] picks s_{k−1}, …
                let mut times = Vec::with_capacity(level);
                let mut weight = 1.0;
                let mut upper = delta;
                for &q in &nodes {
                    let s = upper * (1.0 + xs[q]) / 2.0;
                    weight *= ws[q] * upper / 2.0;
                    times.push(s);
                    upper = s;
                }
                // times = [s_k, s_{k−1}, …, s_1]
                let mut drifts = Vec::with_capacity(level + 1);
                drifts.push(t(delta - times[0]));
                for w in times.windows(2) {
                    drifts.push(t(w[0] - w[1]));
                }
                drifts.push(t(times[level - 1]));
                let scale = Complex64::new(weight.sqrt(), 0.0);
                for jumps in tuples(ls.len(), level) {
                    let mut op = drifts[0].clone();
                    for (pos, &jj) in jumps.iter().enumerate() {
                        op = op * &ls[jj] * &drifts[pos + 1];
                    }
                    mats.push(op * scale);
                }
            }
        }
    }

    let mut kraus = Vec::with_capacity(mats.len());
    for (idx, m) in mats.iter().enumerate() {
        let s = PauliSum::from_matrix(m)?;
        if idx == 0 || !s.is_empty() {
            kraus.push(KrausExpr::from_pauli_sum(&s));
        }
    }
    Ok(ChannelExpr::new(kraus))
}

/// `‖H‖ + Σ_j ‖L_j‖²` with spectral norms.
pub fn lindblad_opnorm(spec: &LindbladSpec) -> Result<f64> {
    linalg::check_cap(spec.n)?;
    let mut total = linalg::operator_norm(&spec.hamiltonian.to_matrix()?);
    for l in &spec.jumps {
        let norm = linalg::operator_norm(&l.to_matrix()?);
        total += norm * norm;
    }
    Ok(total)
}

/// Vectorized Lindbladian (column stacking: `vec(AXB) = (Bᵀ ⊗ A) vec(X)`).
pub fn liouvillian(spec: &LindbladSpec) -> Result<CMatrix> {
    linalg::check_cap(2 * spec.n)?;
    let dim = 1usize << spec.n;
    let eye = CMatrix::identity(dim, dim);
    let h = spec.hamiltonian.to_matrix()?;
    let mi = Complex64::new(0.0, -1.0);
    let mut sup = (eye.kronecker(&h) - h.transpose().kronecker(&eye)) * mi;
    for l in &spec.jumps {
        let l = l.to_matrix()?;
        let ldl = l.adjoint() * &l;
        sup += l.conjugate().kronecker(&l);
        sup -= (eye.kronecker(&ldl) + ldl.transpose().kronecker(&eye)) * Complex64::new(0.5, 0.0);
    }
    Ok(sup)
}

/// Reference propagator `e^{tL}`.
pub fn exact_propagator(spec: &LindbladSpec, t: f64) -> Result<Superoperator> {
    if spec.n > linalg::qubit_cap() / 2 {
        return Err(Error::CapExceeded {
            qubits: 2 * spec.n,
            cap: linalg::qubit_cap(),
        });
    }
    let sup = liouvillian(spec)? * Complex64::new(t, 0.0);
    Ok(Superoperator {
        n: spec.n,
        matrix: sup.exp(),
    })
}

/// The trivial generator `H = 0`, no jumps.
pub fn zero_generator(n: usize) -> LindbladSpec {
    LindbladSpec {
        n,
        hamiltonian: PauliSum::zero(n),
        jumps: vec![],
    }
}
