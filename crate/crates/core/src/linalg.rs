//! Dense complex linear algebra shared by the verification paths.
//!
//! Every dense routine is bounded by a process-wide qubit cap (default 14)
//! so that accidental large inputs fail fast instead of exhausting memory.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_QUBIT_CAP: usize = 14;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

pub fn qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

/// Changes the dense-simulation cap for the whole process.
pub fn set_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap, Ordering::Relaxed);
}

pub fn check_cap(qubits: usize) -> Result<()> {
    let cap = qubit_cap();
    if qubits > cap {
        Err(Error::CapExceeded { qubits, cap })
    } else {
        Ok(())
    }
}

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `i^k` computed without floating-point drift.
pub fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

/// Number of qubits for a `2^n`-dimensional space.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let prod = m.adjoint() * m;
    max_abs_diff(&prod, &identity(m.nrows())) <= tol
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Symmetrized Hermitian eigendecomposition; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

/// Trace distance `½‖a − b‖₁` between two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm_hermitian(&(a - b))
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    ));
    &vecs * diag * vecs.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Checks the density-matrix contract: square, Hermitian, PSD, unit trace.
pub fn validate_density(rho: &CMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidDensity(format!(
            "matrix is {}x{}, not square",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if !is_hermitian(rho, tol) {
        return Err(Error::InvalidDensity("matrix is not Hermitian".into()));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
    }
    let min = hermitian_eigenvalues(rho).first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::InvalidDensity(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(())
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Haar-random pure state vector.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn pure_density(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Full-rank random density matrix from the Ginibre ensemble.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let rho = &g * g.adjoint();
    let tr = trace(&rho);
    rho / tr
}

/// Random `dim x dim` complex matrix with standard Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng))
}

pub fn basis_density(dim: usize, k: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(dim, dim);
    rho[(k, k)] = ONE;
    rho
}

/// Unitary whose first column is `amps` (a unit vector).
///
/// Built as `e^{iφ}·(I − 2uu†)` with `φ = arg(amps[0])`, the Householder
/// reflection sending `|0⟩` to `e^{−iφ}·amps`.
pub fn householder_completion(amps: &[Complex64]) -> CMatrix {
    let dim = amps.len();
    let phase = if amps[0].norm() > 1e-15 {
        amps[0] / amps[0].norm()
    } else {
        ONE
    };
    let target: Vec<Complex64> = amps.iter().map(|a| a / phase).collect();
    let mut u: Vec<Complex64> = target.iter().map(|t| -t).collect();
    u[0] += ONE;
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut m = identity(dim);
    if norm > 1e-14 {
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] -= u[r] * u[c].conj() * (2.0 / (norm * norm));
            }
        }
    }
    m * phase
}

/// Unitary dilation `[[A, √(I−AA†)], [√(I−A†A), −A†]]` of a contraction.
pub fn unitary_dilation(a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let eye = identity(d);
    let top_right = psd_sqrt(&(&eye - a * a.adjoint()));
    let bottom_left = psd_sqrt(&(&eye - a.adjoint() * a));
    let mut u = CMatrix::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(a);
    u.view_mut((0, d), (d, d)).copy_from(&top_right);
    u.view_mut((d, 0), (d, d)).copy_from(&bottom_left);
    u.view_mut((d, d), (d, d)).copy_from(&(-a.adjoint()));
    u
}
