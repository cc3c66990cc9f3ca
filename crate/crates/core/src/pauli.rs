//! Pauli strings in symplectic bit-mask form and complex-weighted Pauli sums.
//!
//! Site `k` of a string is the `k`-th character of its label (leftmost is
//! site 0) and bit `k` of both masks. A string denotes
//! `i^phase · g_0 ⊗ g_1 ⊗ … ⊗ g_{n-1}`, so site 0 is the most significant
//! tensor factor of the dense matrix.

use std::fmt;

use indexmap::IndexMap;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, i_pow, CMatrix, ONE, ZERO};

/// Coefficients with magnitude below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Single-site Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An `n`-qubit Pauli operator `i^phase · ⊗ g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub const MAX_QUBITS: usize = 64;

    fn mask_limit(n: usize) -> u64 {
        if n >= 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "at most 64 qubits are supported");
        Self {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// Builds a string from raw masks; bits above `n` are rejected.
    pub fn from_masks(n: usize, x: u64, z: u64, phase_exp: u8) -> Result<Self> {
        if n > Self::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "{n} qubits exceeds the {}-qubit Pauli limit",
                Self::MAX_QUBITS
            )));
        }
        let limit = Self::mask_limit(n);
        if x & !limit != 0 || z & !limit != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits beyond {n} qubits"
            )));
        }
        Ok(Self {
            n,
            x,
            z,
            phase: phase_exp % 4,
        })
    }

    /// Parses a label over `{I,X,Y,Z}`.
    pub fn from_label(label: &str, phase_exp: u8) -> Result<Self> {
        let err = |reason: &str| Error::PauliParse {
            label: label.to_string(),
            reason: reason.to_string(),
        };
        if label.is_empty() {
            return Err(err("empty label"));
        }
        let n = label.chars().count();
        if n > Self::MAX_QUBITS {
            return Err(err("more than 64 sites"));
        }
        let mut out = Self::identity(n);
        for (k, ch) in label.chars().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(err(&format!("invalid character `{other}`"))),
            };
            out.set(k, p);
        }
        out.phase = phase_exp % 4;
        Ok(out)
    }

    /// `p` on `site`, identity elsewhere.
    pub fn single(n: usize, site: usize, p: Pauli) -> Self {
        assert!(site < n, "site {site} out of range for {n} qubits");
        let mut out = Self::identity(n);
        out.set(site, p);
        out
    }

    fn set(&mut self, site: usize, p: Pauli) {
        let (xb, zb) = p.bits();
        let bit = 1u64 << site;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn site(&self, k: usize) -> Pauli {
        Pauli::from_bits(self.x >> k & 1 == 1, self.z >> k & 1 == 1)
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp % 4;
        self
    }

    /// Same masks, phase reset to `i^0`.
    pub fn unphased(self) -> Self {
        self.with_phase(0)
    }

    pub fn phase_factor(&self) -> Complex64 {
        i_pow(self.phase)
    }

    /// True when both masks are zero (ignores the phase).
    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    /// Symplectic key `(x, z)`, phase discarded.
    pub fn key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ArityMismatch {
                context: "Pauli product".into(),
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // σ(x,z) = i^{xz} X^x Z^z; moving Z^{z1} past X^{x2} contributes (-1)^{z1·x2}.
        let phase = self.phase as u32
            + other.phase as u32
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Self {
            n: self.n,
            x,
            z,
            phase: (phase % 4) as u8,
        }
    }

    /// Inverse (every unphased string squares to the identity).
    pub fn inverse(&self) -> Self {
        self.with_phase((4 - self.phase) % 4)
    }

    pub fn label(&self) -> String {
        (0..self.n).map(|k| self.site(k).as_char()).collect()
    }

    fn reversed(mask: u64, n: usize) -> usize {
        let mut out = 0usize;
        for k in 0..n {
            if mask >> k & 1 == 1 {
                out |= 1 << (n - 1 - k);
            }
        }
        out
    }

    /// Matrix-index bit masks `(x, z)`: site `k` is bit `n-1-k`.
    pub(crate) fn index_masks(&self) -> (usize, usize) {
        (Self::reversed(self.x, self.n), Self::reversed(self.z, self.n))
    }

    /// Action on a computational basis index: `P|col⟩ = amp·|row⟩`.
    pub(crate) fn apply_to_index(&self, col: usize, xm: usize, zm: usize) -> (usize, Complex64) {
        let base = (self.phase as u32 + (self.x & self.z).count_ones()) % 4;
        let sign = (zm & col).count_ones() % 2;
        (col ^ xm, i_pow((base + 2 * sign) as u8))
    }

    /// Dense `2^n × 2^n` matrix, exact (entries are 0, ±1, ±i).
    pub fn to_matrix(&self) -> Result<CMatrix> {
        linalg::check_cap(self.n)?;
        let dim = 1usize << self.n;
        let (xm, zm) = self.index_masks();
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, amp) = self.apply_to_index(col, xm, zm);
            m[(row, col)] = amp;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

#[derive(Serialize, Deserialize)]
struct LabelForm {
    label: String,
    #[serde(default)]
    phase_exp: u8,
}

/// Serialized as `{"label": "XIZ", "phase_exp": 0}`.
impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LabelForm {
            label: self.label(),
            phase_exp: self.phase,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let form = LabelForm::deserialize(d)?;
        PauliString::from_label(&form.label, form.phase_exp).map_err(serde::de::Error::custom)
    }
}

/// Complex-weighted sum of Pauli strings on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            terms: vec![(ONE, PauliString::identity(n))],
        }
    }

    pub fn from_terms(n: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.n() != n {
                return Err(Error::ArityMismatch {
                    context: format!("term {p} in Pauli sum"),
                    expected: n,
                    found: p.n(),
                });
            }
        }
        Ok(Self { n, terms })
    }

    /// Convenience constructor from `(coefficient, label)` pairs.
    pub fn from_labels(terms: &[(Complex64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(c, l)| PauliString::from_label(l, 0).map(|p| (*c, p)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed
            .first()
            .map(|(_, p)| p.n())
            .ok_or_else(|| Error::InvalidArgument("empty term list".into()))?;
        Self::from_terms(n, parsed)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coeff: Complex64, p: PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::ArityMismatch {
                context: format!("pushing {p}"),
                expected: self.n,
                found: p.n(),
            });
        }
        self.terms.push((coeff, p));
        Ok(())
    }

    /// Folds phases into coefficients, merges equal strings (first
    /// occurrence fixes the order) and drops coefficients below [`ZERO_TOL`].
    pub fn canonicalize(&self) -> Self {
        let mut merged: IndexMap<(u64, u64), Complex64> = IndexMap::new();
        for (c, p) in &self.terms {
            *merged.entry(p.key()).or_insert(ZERO) += c * p.phase_factor();
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= ZERO_TOL)
            .map(|((x, z), c)| {
                (
                    c,
                    PauliString {
                        n: self.n,
                        x,
                        z,
                        phase: 0,
                    },
                )
            })
            .collect();
        Self { n: self.n, terms }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(c, p)| (c * s, *p)).collect(),
        }
    }

    /// Concatenation (not canonicalized).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ArityMismatch {
                context: "Pauli sum addition".into(),
                expected: self.n,
                found: other.n,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(Self { n: self.n, terms })
    }

    /// Operator product, expanded term by term and canonicalized.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::ArityMismatch {
                context: "Pauli sum product".into(),
                expected: self.n,
                found: other.n,
            });
        }
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                terms.push((a * b, p.mul_unchecked(q)));
            }
        }
        Ok(Self { n: self.n, terms }.canonicalize())
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (c.conj(), p.inverse()))
                .collect(),
        }
    }

    /// Sum of coefficient magnitudes of the canonical form.
    pub fn one_norm(&self) -> f64 {
        self.canonicalize().terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Hermitian iff every canonical coefficient is real.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.canonicalize()
            .terms
            .iter()
            .all(|(c, _)| c.im.abs() <= tol * c.norm().max(1.0))
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        linalg::check_cap(self.n)?;
        let dim = 1usize << self.n;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let (xm, zm) = p.index_masks();
            for col in 0..dim {
                let (row, amp) = p.apply_to_index(col, xm, zm);
                m[(row, col)] += c * amp;
            }
        }
        Ok(m)
    }

    /// Hilbert–Schmidt decomposition `m = Σ_P Tr(P†m)/2^n · P`.
    ///
    /// Uses one Walsh–Hadamard transform per X-mask, so the cost is
    /// `O(4^n · n)` rather than a dense trace per string.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = linalg::qubits_for_dim(m.nrows())?;
        linalg::check_cap(n)?;
        let dim = 1usize << n;
        let scale = 1.0 / dim as f64;
        let mut terms = Vec::new();
        let mut buf = vec![ZERO; dim];
        for x in 0..dim as u64 {
            let probe = PauliString {
                n,
                x,
                z: 0,
                phase: 0,
            };
            let (xm, _) = probe.index_masks();
            for (col, slot) in buf.iter_mut().enumerate() {
                *slot = m[(col ^ xm, col)];
            }
            walsh_hadamard(&mut buf);
            for z in 0..dim as u64 {
                let p = PauliString { n, x, z, phase: 0 };
                let (_, zm) = p.index_masks();
                // Tr(P† m) = conj(i^{pop(x&z)}) Σ_c (−1)^{pop(zm&c)} m[c⊕xm, c]
                let ph = i_pow((4 - (x & z).count_ones() % 4) as u8 % 4);
                let c = buf[zm] * ph * scale;
                if c.norm() >= ZERO_TOL {
                    terms.push((c, p));
                }
            }
        }
        Ok(Self { n, terms })
    }
}

/// In-place unnormalized Walsh–Hadamard transform: `out[k] = Σ_c (−1)^{k·c} v[c]`.
fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, I};

    fn ps(label: &str) -> PauliString {
        PauliString::from_label(label, 0).unwrap()
    }

    #[test]
    fn label_masks_follow_symplectic_definition() {
        let p = ps("XIZYI");
        assert_eq!(p.x_mask(), 0b01001); // sites 0 and 3
        assert_eq!(p.z_mask(), 0b01100); // sites 2 and 3
        assert_eq!(p.weight(), 3);
        assert!(ps("II").is_identity());
        let y = ps("Y");
        assert_eq!((y.x_mask(), y.z_mask()), (1, 1));
        assert_eq!(ps("ZZ").weight(), 2);
        assert_eq!(PauliString::identity(4).weight(), 0);
    }

    #[test]
    fn symplectic_vector_reads_left_to_right() {
        // Written site-by-site as (x_0..x_4 | z_0..z_4) the vector is (10010|00110).
        let p = ps("XIZYI");
        let x: String = (0..5).map(|k| if p.x_mask() >> k & 1 == 1 { '1' } else { '0' }).collect();
        let z: String = (0..5).map(|k| if p.z_mask() >> k & 1 == 1 { '1' } else { '0' }).collect();
        assert_eq!((x.as_str(), z.as_str()), ("10010", "00110"));
    }

    #[test]
    fn bad_labels_are_rejected() {
        assert!(PauliString::from_label("XQ", 0).is_err());
        assert!(PauliString::from_label("", 0).is_err());
        assert!(PauliString::from_label("xz", 0).is_err());
    }

    #[test]
    fn small_products() {
        let xx = ps("X").multiply(&ps("X")).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.phase_exp(), 0);

        let xz = ps("X").multiply(&ps("Z")).unwrap();
        assert_eq!(xz.key(), ps("Y").key());
        assert_eq!(xz.phase_exp(), 3);

        // (Z⊗X)(X⊗Z) = (iY)⊗(−iY) = YY
        let prod = ps("ZX").multiply(&ps("XZ")).unwrap();
        assert_eq!(prod.key(), ps("YY").key());
        let dense = ps("ZX").to_matrix().unwrap() * ps("XZ").to_matrix().unwrap();
        assert!(max_abs_diff(&prod.to_matrix().unwrap(), &dense) == 0.0);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(matches!(
            ps("X").multiply(&ps("XX")),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn matrices_of_small_strings() {
        let z = ps("Z").to_matrix().unwrap();
        assert_eq!(z[(0, 0)], ONE);
        assert_eq!(z[(1, 1)], -ONE);
        assert_eq!(z[(0, 1)], ZERO);
        assert_eq!(ps("II").to_matrix().unwrap(), CMatrix::identity(4, 4));
        let iy = PauliString::from_label("Y", 1).unwrap().to_matrix().unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, -ONE, ZERO]);
        assert_eq!(iy, expect);
    }

    #[test]
    fn tensor_order_puts_site_zero_first() {
        let xi = ps("XI").to_matrix().unwrap();
        let x = ps("X").to_matrix().unwrap();
        let i = ps("I").to_matrix().unwrap();
        assert_eq!(xi, x.kronecker(&i));
    }

    #[test]
    fn canonicalization_merges_and_drops() {
        let s = PauliSum::from_labels(&[(ONE, "X"), (ONE * 2.0, "X")]).unwrap();
        let c = s.canonicalize();
        assert_eq!(c.len(), 1);
        assert_eq!(c.terms()[0].0, ONE * 3.0);

        let s = PauliSum::from_labels(&[(ONE, "X"), (-ONE, "X")]).unwrap();
        assert!(s.canonicalize().is_empty());

        let mut s = PauliSum::zero(1);
        s.push(ONE, PauliString::from_label("Y", 1).unwrap()).unwrap();
        let c = s.canonicalize();
        assert_eq!(c.terms()[0].0, I);
        assert_eq!(c.terms()[0].1.phase_exp(), 0);
    }

    #[test]
    fn decomposition_of_lowering_operator() {
        // |1⟩⟨0| = ½X − ½(iY)
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 0)] = ONE;
        let s = PauliSum::from_matrix(&m).unwrap();
        assert_eq!(s.len(), 2);
        let x = s.terms().iter().find(|(_, p)| p.label() == "X").unwrap().0;
        let y = s.terms().iter().find(|(_, p)| p.label() == "Y").unwrap().0;
        assert!((x - ONE * 0.5).norm() < 1e-15);
        assert!((y + I * 0.5).norm() < 1e-15);

        let id = PauliSum::from_matrix(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(id.len(), 1);
        assert!(id.terms()[0].1.is_identity());
        assert!((id.terms()[0].0 - ONE).norm() < 1e-15);
    }

    #[test]
    fn decomposition_rejects_non_power_of_two() {
        assert!(matches!(
            PauliSum::from_matrix(&CMatrix::zeros(3, 3)),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn hermiticity_check() {
        let h = PauliSum::from_labels(&[(ONE, "ZZ"), (ONE * -0.5, "XI")]).unwrap();
        assert!(h.is_hermitian(1e-12));
        let nh = PauliSum::from_labels(&[(I, "ZZ")]).unwrap();
        assert!(!nh.is_hermitian(1e-12));
    }
}
