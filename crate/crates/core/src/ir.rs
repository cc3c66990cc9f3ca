//! Kraus-form channel IR and its dense semantics.

use std::fmt;

use indexmap::IndexMap;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::pauli::{PauliString, PauliSum, ZERO_TOL};

/// Default number of Haar-random probe states for [`channel_distance`].
pub const DEFAULT_SAMPLES: usize = 64;
/// Fixed seed for probe-state sampling.
pub const DISTANCE_SEED: u64 = 0x5eed_d157;
/// Tolerance for density-matrix validation at API boundaries.
pub const DENSITY_TOL: f64 = 1e-9;

/// A user-supplied block-encoding `U` with `⟨0|U|0⟩ = A/alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    pub handle: String,
    pub n: usize,
    pub alpha: f64,
    pub anc: usize,
    pub matrix: Option<CMatrix>,
}

impl BlockEncoding {
    pub fn new(
        handle: impl Into<String>,
        n: usize,
        alpha: f64,
        anc: usize,
        matrix: Option<CMatrix>,
    ) -> Result<Self> {
        let handle = handle.into();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "block-encoding `{handle}` has non-positive alpha {alpha}"
            )));
        }
        if let Some(m) = &matrix {
            let dim = 1usize << n;
            if m.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!(
                    "block-encoding `{handle}` matrix is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let norm = linalg::operator_norm(m);
            if norm > alpha * (1.0 + 1e-9) + 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "block-encoding `{handle}` has norm {norm} above alpha {alpha}"
                )));
            }
        }
        Ok(Self {
            handle,
            n,
            alpha,
            anc,
            matrix,
        })
    }

    pub fn matrix(&self) -> Result<&CMatrix> {
        self.matrix.as_ref().ok_or_else(|| Error::MissingMatrix {
            handle: self.handle.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Pauli(PauliString),
    BlockEnc(BlockEncoding),
}

impl Primitive {
    pub fn n(&self) -> usize {
        match self {
            Primitive::Pauli(p) => p.n(),
            Primitive::BlockEnc(b) => b.n,
        }
    }

    pub fn eval(&self) -> Result<CMatrix> {
        match self {
            Primitive::Pauli(p) => p.to_matrix(),
            Primitive::BlockEnc(b) => {
                linalg::check_cap(b.n)?;
                b.matrix().cloned()
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            Primitive::Pauli(p) => p.to_string(),
            Primitive::BlockEnc(b) => format!("blockenc({})", b.handle),
        }
    }
}

/// Identity of a primitive up to scalar factors: terms with equal keys merge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimKey {
    Pauli(u64, u64),
    Handle(String),
}

/// A Kraus operator `Σ_j β_j P_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausExpr {
    pub n: usize,
    pub terms: Vec<(Complex64, Primitive)>,
}

impl KrausExpr {
    pub fn new(n: usize, terms: Vec<(Complex64, Primitive)>) -> Self {
        Self { n, terms }
    }

    pub fn zero(n: usize) -> Self {
        Self { n, terms: vec![] }
    }

    pub fn from_pauli_sum(s: &PauliSum) -> Self {
        Self {
            n: s.n(),
            terms: s
                .terms()
                .iter()
                .map(|(c, p)| (*c, Primitive::Pauli(*p)))
                .collect(),
        }
    }

    /// Pauli-sum view, or `None` if any term is a block-encoding.
    pub fn to_pauli_sum(&self) -> Option<PauliSum> {
        let terms = self
            .terms
            .iter()
            .map(|(c, prim)| match prim {
                Primitive::Pauli(p) => Some((*c, *p)),
                Primitive::BlockEnc(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        PauliSum::from_terms(self.n, terms).ok()
    }

    pub fn is_pauli(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, p)| matches!(p, Primitive::Pauli(_)))
    }

    pub fn has_block_encoding(&self) -> bool {
        !self.is_pauli()
    }

    pub fn typecheck(&self) -> Result<usize> {
        for (_, prim) in &self.terms {
            if prim.n() != self.n {
                return Err(Error::ArityMismatch {
                    context: format!("term {} in Kraus operator", prim.describe()),
                    expected: self.n,
                    found: prim.n(),
                });
            }
        }
        Ok(self.n)
    }

    pub fn eval(&self) -> Result<CMatrix> {
        self.typecheck()?;
        linalg::check_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut out = CMatrix::zeros(dim, dim);
        for (c, prim) in &self.terms {
            match prim {
                Primitive::Pauli(p) => {
                    let (xm, zm) = p.index_masks();
                    for col in 0..dim {
                        let (row, amp) = p.apply_to_index(col, xm, zm);
                        out[(row, col)] += c * amp;
                    }
                }
                Primitive::BlockEnc(b) => out += b.matrix()? * *c,
            }
        }
        Ok(out)
    }

    /// Merged coefficients keyed by primitive, in first-appearance order.
    /// Pauli phases are folded into the coefficient.
    pub fn coefficient_map(&self) -> IndexMap<PrimKey, (Complex64, Primitive)> {
        let mut map: IndexMap<PrimKey, (Complex64, Primitive)> = IndexMap::new();
        for (c, prim) in &self.terms {
            let (key, coeff, base) = match prim {
                Primitive::Pauli(p) => (
                    PrimKey::Pauli(p.x_mask(), p.z_mask()),
                    c * p.phase_factor(),
                    Primitive::Pauli(p.unphased()),
                ),
                Primitive::BlockEnc(b) => (PrimKey::Handle(b.handle.clone()), *c, prim.clone()),
            };
            map.entry(key).or_insert((ZERO, base)).0 += coeff;
        }
        map
    }

    /// Merge duplicates (first occurrence fixes order) then drop tiny terms.
    pub fn canonicalize(&self) -> Self {
        let terms = self
            .coefficient_map()
            .into_values()
            .filter(|(c, _)| c.norm() >= ZERO_TOL)
            .collect();
        Self { n: self.n, terms }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(c, p)| (c * s, p.clone())).collect(),
        }
    }

    /// Frobenius norm. Exact for Pauli sums (`‖K‖_F² = 2^n Σ|c|²`), dense otherwise.
    pub fn frobenius(&self) -> Result<f64> {
        let canon = self.canonicalize();
        if canon.is_pauli() {
            let s: f64 = canon.terms.iter().map(|(c, _)| c.norm_sqr()).sum();
            Ok((s * (self.n as f64).exp2()).sqrt())
        } else {
            Ok(linalg::frobenius(&canon.eval()?))
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for KrausExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, prim)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)·{}", c.re, c.im, prim.describe())?;
        }
        Ok(())
    }
}

/// `channel { K_1; …; K_m }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelExpr {
    pub n: usize,
    pub kraus: Vec<KrausExpr>,
}

impl ChannelExpr {
    /// Arity is taken from the first Kraus operator; see [`ChannelExpr::typecheck`].
    pub fn new(kraus: Vec<KrausExpr>) -> Self {
        let n = kraus.first().map(|k| k.n).unwrap_or(0);
        Self { n, kraus }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![KrausExpr::from_pauli_sum(&PauliSum::identity(n))])
    }

    pub fn from_pauli_sums(sums: &[PauliSum]) -> Self {
        Self::new(sums.iter().map(KrausExpr::from_pauli_sum).collect())
    }

    pub fn typecheck(&self) -> Result<usize> {
        if self.kraus.is_empty() {
            return Err(Error::InvalidArgument("channel has no Kraus operators".into()));
        }
        for (j, k) in self.kraus.iter().enumerate() {
            if k.n != self.n {
                return Err(Error::ArityMismatch {
                    context: format!("Kraus operator {j} ({k})"),
                    expected: self.n,
                    found: k.n,
                });
            }
            k.typecheck().map_err(|e| match e {
                Error::ArityMismatch {
                    context,
                    expected,
                    found,
                } => Error::ArityMismatch {
                    context: format!("{context} {j}"),
                    expected,
                    found,
                },
                other => other,
            })?;
        }
        Ok(self.n)
    }

    pub fn kraus_matrices(&self) -> Result<Vec<CMatrix>> {
        self.typecheck()?;
        self.kraus.iter().map(KrausExpr::eval).collect()
    }

    pub fn to_dense(&self) -> Result<DenseChannel> {
        Ok(DenseChannel {
            n: self.n,
            kraus: self.kraus_matrices()?,
        })
    }

    pub fn total_terms(&self) -> usize {
        self.kraus.iter().map(KrausExpr::len).sum()
    }
}

impl fmt::Display for ChannelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "channel[{}] {{", self.n)?;
        for k in &self.kraus {
            writeln!(f, "  {k};")?;
        }
        write!(f, "}}")
    }
}

/// `(H, {L_j})` of a Lindblad master equation on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSpec {
    pub n: usize,
    pub hamiltonian: PauliSum,
    pub jumps: Vec<PauliSum>,
}

impl LindbladSpec {
    pub fn new(hamiltonian: PauliSum, jumps: Vec<PauliSum>) -> Result<Self> {
        let n = hamiltonian.n();
        for (j, l) in jumps.iter().enumerate() {
            if l.n() != n {
                return Err(Error::ArityMismatch {
                    context: format!("jump operator {j}"),
                    expected: n,
                    found: l.n(),
                });
            }
        }
        if !hamiltonian.is_hermitian(1e-12) {
            return Err(Error::NotHermitian(
                "canonical coefficients must be real".into(),
            ));
        }
        Ok(Self {
            n,
            hamiltonian,
            jumps,
        })
    }
}

/// Anything that maps `n`-qubit density matrices to matrices.
pub trait ChannelMap {
    fn arity(&self) -> usize;
    fn apply(&self, rho: &CMatrix) -> Result<CMatrix>;
}

pub(crate) fn check_input_dim(n: usize, rho: &CMatrix) -> Result<()> {
    let dim = 1usize << n;
    if rho.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "input is {}x{}, channel acts on {dim}x{dim}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(())
}

/// Channel given by explicit dense Kraus matrices.
#[derive(Debug, Clone)]
pub struct DenseChannel {
    pub n: usize,
    pub kraus: Vec<CMatrix>,
}

impl ChannelMap for DenseChannel {
    fn arity(&self) -> usize {
        self.n
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_input_dim(self.n, rho)?;
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        Ok(out)
    }
}

impl ChannelMap for ChannelExpr {
    fn arity(&self) -> usize {
        self.n
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.to_dense()?.apply(rho)
    }
}

/// Superoperator acting on column-stacked `vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub n: usize,
    pub matrix: CMatrix,
}

impl Superoperator {
    pub fn vec(rho: &CMatrix) -> CMatrix {
        CMatrix::from_column_slice(rho.len(), 1, rho.as_slice())
    }

    pub fn unvec(v: &CMatrix, dim: usize) -> CMatrix {
        CMatrix::from_column_slice(dim, dim, v.as_slice())
    }
}

impl ChannelMap for Superoperator {
    fn arity(&self) -> usize {
        self.n
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        check_input_dim(self.n, rho)?;
        Ok(Self::unvec(&(&self.matrix * Self::vec(rho)), rho.nrows()))
    }
}

/// Multiplies the output of another map by a constant.
pub struct Scaled<'a, M: ChannelMap + ?Sized> {
    pub inner: &'a M,
    pub factor: f64,
}

impl<M: ChannelMap + ?Sized> ChannelMap for Scaled<'_, M> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        Ok(self.inner.apply(rho)? * Complex64::new(self.factor, 0.0))
    }
}

/// `⟦C⟧(ρ)` with the input validated as a density matrix.
pub fn apply_channel(c: &ChannelExpr, rho: &CMatrix) -> Result<CMatrix> {
    c.typecheck()?;
    check_input_dim(c.n, rho)?;
    linalg::validate_density(rho, DENSITY_TOL)?;
    c.apply(rho)
}

/// Probe inputs: all basis states then `samples` Haar-random pure states.
pub fn probe_states(n: usize, samples: usize, seed: u64) -> Vec<CMatrix> {
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<CMatrix> = (0..dim).map(|k| linalg::basis_density(dim, k)).collect();
    out.extend((0..samples).map(|_| linalg::pure_density(&linalg::random_state(dim, &mut rng))));
    out
}

/// Max over probe states of `½‖a(ρ) − b(ρ)‖₁`.
pub fn channel_distance<A, B>(a: &A, b: &B, samples: usize) -> Result<f64>
where
    A: ChannelMap + ?Sized,
    B: ChannelMap + ?Sized,
{
    if a.arity() != b.arity() {
        return Err(Error::ArityMismatch {
            context: "channel distance".into(),
            expected: a.arity(),
            found: b.arity(),
        });
    }
    linalg::check_cap(a.arity())?;
    let mut worst = 0.0f64;
    for rho in probe_states(a.arity(), samples, DISTANCE_SEED) {
        let d = linalg::trace_distance(&a.apply(&rho)?, &b.apply(&rho)?);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Distance between two Kraus-form channels, evaluating each Kraus matrix once.
pub fn expr_distance(a: &ChannelExpr, b: &ChannelExpr, samples: usize) -> Result<f64> {
    channel_distance(&a.to_dense()?, &b.to_dense()?, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, ONE};

    fn sum(terms: &[(f64, &str)]) -> PauliSum {
        let t: Vec<_> = terms.iter().map(|(c, l)| (ONE * *c, *l)).collect();
        PauliSum::from_labels(&t).unwrap()
    }

    fn dephasing() -> ChannelExpr {
        ChannelExpr::from_pauli_sums(&[
            sum(&[(0.5, "I"), (0.5, "Z")]),
            sum(&[(0.5, "I"), (-0.5, "Z")]),
        ])
    }

    #[test]
    fn typecheck_reports_arity() {
        assert_eq!(dephasing().typecheck().unwrap(), 1);
        let bad = ChannelExpr::new(vec![
            KrausExpr::from_pauli_sum(&sum(&[(1.0, "XI")])),
            KrausExpr::from_pauli_sum(&sum(&[(1.0, "Z")])),
        ]);
        match bad.typecheck() {
            Err(Error::ArityMismatch {
                context,
                expected,
                found,
            }) => {
                assert!(context.contains("Kraus operator 1"));
                assert_eq!((expected, found), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let be = BlockEncoding::new("q", 3, 1.0, 2, None).unwrap();
        let c = ChannelExpr::new(vec![KrausExpr::new(3, vec![(ONE, Primitive::BlockEnc(be))])]);
        assert_eq!(c.typecheck().unwrap(), 3);
    }

    #[test]
    fn eval_projector_and_empty() {
        let k = KrausExpr::from_pauli_sum(&sum(&[(0.5, "I"), (0.5, "Z")]));
        let m = k.eval().unwrap();
        assert_eq!(m, linalg::basis_density(2, 0));
        assert_eq!(KrausExpr::zero(2).eval().unwrap(), CMatrix::zeros(4, 4));
    }

    #[test]
    fn eval_without_matrix_fails() {
        let be = BlockEncoding::new("q", 1, 1.0, 1, None).unwrap();
        let k = KrausExpr::new(1, vec![(ONE, Primitive::BlockEnc(be))]);
        assert!(matches!(k.eval(), Err(Error::MissingMatrix { .. })));
    }

    #[test]
    fn block_encoding_norm_is_checked() {
        let m = CMatrix::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(BlockEncoding::new("big", 1, 1.0, 1, Some(m.clone())).is_err());
        assert!(BlockEncoding::new("ok", 1, 2.0, 1, Some(m)).is_ok());
        assert!(BlockEncoding::new("neg", 1, -1.0, 1, None).is_err());
    }

    #[test]
    fn dephasing_kills_coherences() {
        let plus = linalg::pure_density(&crate::linalg::CVector::from_vec(vec![
            ONE / 2f64.sqrt(),
            ONE / 2f64.sqrt(),
        ]));
        let out = apply_channel(&dephasing(), &plus).unwrap();
        assert!(max_abs_diff(&out, &(CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn identity_and_flip_distances() {
        let id = ChannelExpr::identity(1);
        let x = ChannelExpr::from_pauli_sums(&[sum(&[(1.0, "X")])]);
        assert_eq!(expr_distance(&id, &id, 8).unwrap(), 0.0);
        assert!((expr_distance(&id, &x, 8).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_density_is_rejected() {
        let rho = CMatrix::identity(2, 2);
        assert!(matches!(
            apply_channel(&ChannelExpr::identity(1), &rho),
            Err(Error::InvalidDensity(_))
        ));
        let rho = linalg::basis_density(4, 0);
        assert!(matches!(
            apply_channel(&ChannelExpr::identity(1), &rho),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lindblad_requires_hermitian_hamiltonian() {
        let h = PauliSum::from_labels(&[(Complex64::new(0.0, 1.0), "Z")]).unwrap();
        assert!(matches!(
            LindbladSpec::new(h, vec![]),
            Err(Error::NotHermitian(_))
        ));
    }
}
