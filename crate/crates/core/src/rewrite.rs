//! Semantics-preserving rewrites on [`ChannelExpr`] and Kraus-rank minimization.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ir::{ChannelExpr, KrausExpr, PrimKey};
use crate::linalg::{self, CMatrix, ZERO};

/// Tolerance for unitarity of C2 arguments and the C2′ normalization.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on the global ratio when testing Kraus proportionality.
pub const PROPORTIONAL_TOL: f64 = 1e-10;
/// Frobenius norm below which a Kraus operator counts as zero for K1.
pub const ZERO_KRAUS_TOL: f64 = 1e-9;
/// Relative eigenvalue threshold for the Gram-matrix rank.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    /// Merge equal primitives in every Kraus operator.
    PS1,
    /// Drop zero-coefficient terms in every Kraus operator.
    PS2,
    /// Remove a Kraus operator that evaluates to zero.
    K1 { index: usize },
    /// `e^{iθ}K ⇒ K`: multiplies operator `index` by `e^{−iθ}`.
    K2 { index: usize, theta: f64 },
    /// New operator `j` is old operator `perm[j]`.
    C1 { perm: Vec<usize> },
    /// `K'_j = Σ_k u_jk K_k`.
    C2 { u: CMatrix },
    /// `(K_i, K_j) ⇒ (aK_i + bK_j, −b*K_i + a*K_j)`.
    C2p {
        i: usize,
        j: usize,
        a: Complex64,
        b: Complex64,
    },
    /// Merge proportional operators into the first listed index.
    C3 { indices: Vec<usize> },
    /// Two-operator case of C3.
    C3p { i: usize, j: usize },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::PS1 => "PS1",
            Rule::PS2 => "PS2",
            Rule::K1 { .. } => "K1",
            Rule::K2 { .. } => "K2",
            Rule::C1 { .. } => "C1",
            Rule::C2 { .. } => "C2",
            Rule::C2p { .. } => "C2p",
            Rule::C3 { .. } => "C3",
            Rule::C3p { .. } => "C3p",
        }
    }

    pub fn args_json(&self) -> Value {
        let cx = |z: &Complex64| json!([z.re, z.im]);
        match self {
            Rule::PS1 | Rule::PS2 => json!({}),
            Rule::K1 { index } => json!({ "index": index }),
            Rule::K2 { index, theta } => json!({ "index": index, "theta": theta }),
            Rule::C1 { perm } => json!({ "perm": perm }),
            Rule::C2 { u } => {
                let rows: Vec<Vec<Value>> = (0..u.nrows())
                    .map(|r| (0..u.ncols()).map(|c| cx(&u[(r, c)])).collect())
                    .collect();
                json!({ "u": rows })
            }
            Rule::C2p { i, j, a, b } => json!({ "i": i, "j": j, "a": cx(a), "b": cx(b) }),
            Rule::C3 { indices } => json!({ "indices": indices }),
            Rule::C3p { i, j } => json!({ "i": i, "j": j }),
        }
    }
}

/// Result of one rule application; `applied` is false for a flagged no-op.
#[derive(Debug, Clone)]
pub struct Rewrite {
    pub channel: ChannelExpr,
    pub applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub rule: String,
    pub args: Value,
    pub kraus_count_after: usize,
}

impl TraceEntry {
    fn new(rule: &Rule, after: &ChannelExpr) -> Self {
        Self {
            rule: rule.name().to_string(),
            args: rule.args_json(),
            kraus_count_after: after.kraus.len(),
        }
    }
}

fn check_index(c: &ChannelExpr, index: usize, rule: &str) -> Result<()> {
    if index >= c.kraus.len() {
        return Err(Error::InvalidArgument(format!(
            "{rule}: index {index} out of range for {} Kraus operators",
            c.kraus.len()
        )));
    }
    Ok(())
}

fn merge_terms(k: &KrausExpr) -> KrausExpr {
    let terms = k.coefficient_map().into_values().collect();
    KrausExpr::new(k.n, terms)
}

fn drop_zero_terms(k: &KrausExpr) -> KrausExpr {
    KrausExpr::new(
        k.n,
        k.terms
            .iter()
            .filter(|(c, _)| c.norm() >= crate::pauli::ZERO_TOL)
            .cloned()
            .collect(),
    )
}

/// True when `k` evaluates to the zero operator within [`ZERO_KRAUS_TOL`].
pub fn is_zero_kraus(k: &KrausExpr) -> Result<bool> {
    if k.canonicalize().is_empty() {
        return Ok(true);
    }
    Ok(k.frobenius()? <= ZERO_KRAUS_TOL)
}

/// `Σ_l u_jl K_l`, concatenated and canonicalized.
fn combine(ks: &[KrausExpr], coeffs: impl IntoIterator<Item = Complex64>, n: usize) -> KrausExpr {
    let mut terms = Vec::new();
    for (k, u) in ks.iter().zip(coeffs) {
        if u.norm() == 0.0 {
            continue;
        }
        terms.extend(k.scale(u).terms);
    }
    KrausExpr::new(n, terms).canonicalize()
}

/// Ratio `r` with `b = r·a`, compared on canonical coefficient maps.
pub fn proportionality(a: &KrausExpr, b: &KrausExpr) -> Option<Complex64> {
    let ma = a.canonicalize().coefficient_map();
    let mb = b.canonicalize().coefficient_map();
    if ma.is_empty() || ma.len() != mb.len() {
        return None;
    }
    let (key, (ca, _)) = ma
        .iter()
        .max_by(|x, y| x.1 .0.norm().total_cmp(&y.1 .0.norm()))?;
    let cb = mb.get(key)?.0;
    let ratio = cb / ca;
    let scale = ma.values().map(|(c, _)| c.norm()).fold(0.0, f64::max).max(1.0);
    for (key, (ca, _)) in &ma {
        let cb = mb.get(key)?.0;
        if (cb - ratio * ca).norm() > PROPORTIONAL_TOL * scale * ratio.norm().max(1.0) {
            return None;
        }
    }
    Some(ratio)
}

fn c3(c: &ChannelExpr, indices: &[usize], rule: &str) -> Result<Rewrite> {
    if indices.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "{rule}: needs at least two indices"
        )));
    }
    for (p, &i) in indices.iter().enumerate() {
        check_index(c, i, rule)?;
        if indices[..p].contains(&i) {
            return Err(Error::InvalidArgument(format!("{rule}: repeated index {i}")));
        }
    }
    let base = &c.kraus[indices[0]];
    let mut weight = 1.0;
    for &i in &indices[1..] {
        match proportionality(base, &c.kraus[i]) {
            Some(r) => weight += r.norm_sqr(),
            None => {
                return Err(Error::InvalidArgument(format!(
                    "{rule}: Kraus {i} is not proportional to Kraus {}",
                    indices[0]
                )))
            }
        }
    }
    let merged = base.canonicalize().scale(Complex64::new(weight.sqrt(), 0.0));
    let mut kraus = Vec::with_capacity(c.kraus.len() + 1 - indices.len());
    for (j, k) in c.kraus.iter().enumerate() {
        if j == indices[0] {
            kraus.push(merged.clone());
        } else if !indices.contains(&j) {
            kraus.push(k.clone());
        }
    }
    Ok(Rewrite {
        channel: ChannelExpr { n: c.n, kraus },
        applied: true,
    })
}

/// Applies one rule. Invalid arguments are errors; an inapplicable rule
/// returns the channel unchanged with `applied == false`.
pub fn apply_rule(c: &ChannelExpr, rule: &Rule) -> Result<Rewrite> {
    let n = c.n;
    let unchanged = |ch: &ChannelExpr| Rewrite {
        channel: ch.clone(),
        applied: false,
    };
    match rule {
        Rule::PS1 | Rule::PS2 => {
            let f = if matches!(rule, Rule::PS1) {
                merge_terms
            } else {
                drop_zero_terms
            };
            let kraus: Vec<KrausExpr> = c.kraus.iter().map(f).collect();
            let applied = kraus != c.kraus;
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied,
            })
        }
        Rule::K1 { index } => {
            check_index(c, *index, "K1")?;
            if !is_zero_kraus(&c.kraus[*index])? {
                return Err(Error::InvalidArgument(format!(
                    "K1: Kraus {index} does not evaluate to zero"
                )));
            }
            if c.kraus.len() == 1 {
                return Ok(unchanged(c));
            }
            let mut kraus = c.kraus.clone();
            kraus.remove(*index);
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied: true,
            })
        }
        Rule::K2 { index, theta } => {
            check_index(c, *index, "K2")?;
            if !theta.is_finite() {
                return Err(Error::InvalidArgument("K2: phase must be finite".into()));
            }
            let phase = Complex64::from_polar(1.0, -theta);
            let mut kraus = c.kraus.clone();
            kraus[*index] = kraus[*index].scale(phase);
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied: *theta != 0.0,
            })
        }
        Rule::C1 { perm } => {
            let m = c.kraus.len();
            let mut seen = vec![false; m];
            if perm.len() != m
                || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true))
            {
                return Err(Error::InvalidArgument(format!(
                    "C1: {perm:?} is not a permutation of 0..{m}"
                )));
            }
            let kraus: Vec<KrausExpr> = perm.iter().map(|&p| c.kraus[p].clone()).collect();
            let applied = perm.iter().enumerate().any(|(j, &p)| j != p);
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied,
            })
        }
        Rule::C2 { u } => {
            let m = c.kraus.len();
            if u.shape() != (m, m) {
                return Err(Error::InvalidArgument(format!(
                    "C2: matrix is {}x{}, channel has {m} Kraus operators",
                    u.nrows(),
                    u.ncols()
                )));
            }
            if !linalg::is_unitary(u, UNITARY_TOL) {
                return Err(Error::InvalidArgument("C2: matrix is not unitary".into()));
            }
            let kraus = (0..m)
                .map(|j| combine(&c.kraus, (0..m).map(|k| u[(j, k)]), n))
                .collect();
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied: true,
            })
        }
        Rule::C2p { i, j, a, b } => {
            check_index(c, *i, "C2p")?;
            check_index(c, *j, "C2p")?;
            if i == j {
                return Err(Error::InvalidArgument("C2p: indices must differ".into()));
            }
            if (a.norm_sqr() + b.norm_sqr() - 1.0).abs() > UNITARY_TOL {
                return Err(Error::InvalidArgument(
                    "C2p: |a|²+|b|² must equal 1".into(),
                ));
            }
            let pair = [c.kraus[*i].clone(), c.kraus[*j].clone()];
            let mut kraus = c.kraus.clone();
            kraus[*i] = combine(&pair, [*a, *b], n);
            kraus[*j] = combine(&pair, [-b.conj(), a.conj()], n);
            Ok(Rewrite {
                channel: ChannelExpr { n, kraus },
                applied: true,
            })
        }
        Rule::C3 { indices } => c3(c, indices, "C3"),
        Rule::C3p { i, j } => c3(c, &[*i, *j], "C3p"),
    }
}

/// Applies rules in order, collecting a trace of the applied ones.
pub fn apply_rules(c: &ChannelExpr, rules: &[Rule]) -> Result<(ChannelExpr, Vec<TraceEntry>)> {
    let mut cur = c.clone();
    let mut trace = Vec::new();
    for rule in rules {
        let step = apply_rule(&cur, rule)?;
        cur = step.channel;
        if step.applied {
            trace.push(TraceEntry::new(rule, &cur));
        }
    }
    Ok((cur, trace))
}

/// `G_jk = Tr(K_j† K_k)` from dense Kraus matrices.
pub fn gram_matrix(c: &ChannelExpr) -> Result<CMatrix> {
    let mats = c.kraus_matrices()?;
    let m = mats.len();
    let mut g = CMatrix::zeros(m, m);
    for j in 0..m {
        for k in j..m {
            let v: Complex64 = mats[j]
                .iter()
                .zip(mats[k].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
    }
    Ok(g)
}

/// Number of Gram eigenvalues above `RANK_TOL · λ_max`.
pub fn gram_rank(c: &ChannelExpr) -> Result<usize> {
    let vals = linalg::hermitian_eigenvalues(&gram_matrix(c)?);
    let max = vals.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|&&v| v > RANK_TOL * max).count())
}

/// Unitary `W` on a degenerate eigenspace that makes the operators' joint
/// coefficient matrix upper triangular, so they end up with few terms.
fn sparsify_block(coeffs: &CMatrix) -> CMatrix {
    let k = coeffs.nrows();
    let mut picked: Vec<usize> = Vec::new();
    let mut basis = CMatrix::zeros(k, 0);
    for col in 0..coeffs.ncols() {
        if picked.len() == k {
            break;
        }
        let mut cand = basis.clone().insert_column(basis.ncols(), ZERO);
        cand.set_column(basis.ncols(), &coeffs.column(col));
        let sv = cand.clone().singular_values();
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sv.iter().copied().fold(0.0, f64::max);
        if min > 1e-8 * max.max(1e-300) {
            basis = cand;
            picked.push(col);
        }
    }
    if picked.len() < k {
        return CMatrix::identity(k, k);
    }
    let qr = basis.qr();
    qr.q().adjoint()
}

/// Rewrites to exactly `rank(G)` Kraus operators using one C2 step and K1
/// eliminations. The C2 unitary diagonalizes the Gram matrix, sorted by
/// descending eigenvalue, with degenerate eigenspaces rotated to sparse form.
pub fn minimize_kraus_rank(c: &ChannelExpr) -> Result<(ChannelExpr, Vec<TraceEntry>)> {
    c.typecheck()?;
    let m = c.kraus.len();
    let g = gram_matrix(c)?;
    let (vals, vecs) = linalg::hermitian_eigen(&g);
    let order: Vec<usize> = (0..m).rev().collect();
    let lmax = vals.last().copied().unwrap_or(0.0).max(0.0);
    // Row j of U is eigenvector order[j] transposed (no conjugate).
    let mut u = CMatrix::from_fn(m, m, |j, k| vecs[(k, order[j])]);

    // Joint coefficient matrix of the rotated operators over all primitive keys.
    let keys: Vec<PrimKey> = {
        let mut all = indexmap::IndexSet::new();
        for k in &c.kraus {
            for key in k.coefficient_map().keys() {
                all.insert(key.clone());
            }
        }
        all.into_iter().collect()
    };
    let maps: Vec<_> = c.kraus.iter().map(KrausExpr::coefficient_map).collect();
    let coeff = CMatrix::from_fn(m, keys.len(), |l, q| {
        maps[l].get(&keys[q]).map(|(c, _)| *c).unwrap_or(ZERO)
    });

    let sorted: Vec<f64> = order.iter().map(|&j| vals[j]).collect();
    let degenerate_tol = 1e-8 * lmax.max(1e-300);
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && (sorted[start] - sorted[end]).abs() <= degenerate_tol {
            end += 1;
        }
        if end - start > 1 && sorted[start] > RANK_TOL * lmax {
            let rows = u.rows(start, end - start).into_owned();
            let block_coeffs = &rows * &coeff;
            let w = sparsify_block(&block_coeffs);
            u.rows_mut(start, end - start).copy_from(&(w * rows));
        }
        start = end;
    }

    let rule = Rule::C2 { u };
    let step = apply_rule(c, &rule)?;
    let mut cur = step.channel;
    let mut trace = vec![TraceEntry::new(&rule, &cur)];

    // Drop operators whose eigenvalue falls under the rank threshold (they are at the tail).
    let rank = sorted.iter().filter(|&&v| v > RANK_TOL * lmax).count().max(1);
    while cur.kraus.len() > rank {
        let index = cur.kraus.len() - 1;
        let rule = Rule::K1 { index };
        cur.kraus.remove(index);
        trace.push(TraceEntry::new(&rule, &cur));
    }
    Ok((cur, trace))
}

/// Rotates each Kraus operator so its leading coefficient is real and positive.
fn normalize_phases(c: &ChannelExpr, trace: &mut Vec<TraceEntry>) -> Result<ChannelExpr> {
    let mut cur = c.clone();
    for index in 0..cur.kraus.len() {
        let Some((lead, _)) = cur.kraus[index].terms.first() else {
            continue;
        };
        let theta = lead.arg();
        if theta != 0.0 {
            let rule = Rule::K2 { index, theta };
            cur = apply_rule(&cur, &rule)?.channel;
            // Exact real leading coefficient after rotation.
            let lead = &mut cur.kraus[index].terms[0].0;
            *lead = Complex64::new(lead.norm(), 0.0);
            trace.push(TraceEntry::new(&rule, &cur));
        }
    }
    Ok(cur)
}

/// Fixed pipeline: PS1, PS2, K1 on zero operators, K2 phase normalization,
/// optionally Kraus-rank minimization (followed by another cleanup pass).
pub fn simplify(c: &ChannelExpr, minimize: bool) -> Result<(ChannelExpr, Vec<TraceEntry>)> {
    c.typecheck()?;
    let mut trace = Vec::new();
    let mut cur = cleanup(c, &mut trace)?;
    if minimize && cur.kraus.len() > 1 {
        let (min, t) = minimize_kraus_rank(&cur)?;
        trace.extend(t);
        cur = cleanup(&min, &mut trace)?;
    }
    Ok((cur, trace))
}

fn cleanup(c: &ChannelExpr, trace: &mut Vec<TraceEntry>) -> Result<ChannelExpr> {
    let (mut cur, t) = apply_rules(c, &[Rule::PS1, Rule::PS2])?;
    trace.extend(t);
    let mut index = 0;
    while index < cur.kraus.len() && cur.kraus.len() > 1 {
        if cur.kraus[index].is_empty() {
            let rule = Rule::K1 { index };
            cur = apply_rule(&cur, &rule)?.channel;
            trace.push(TraceEntry::new(&rule, &cur));
        } else {
            index += 1;
        }
    }
    normalize_phases(&cur, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::expr_distance;
    use crate::linalg::ONE;
    use crate::pauli::PauliSum;

    fn k(terms: &[(f64, &str)]) -> KrausExpr {
        let t: Vec<_> = terms.iter().map(|(c, l)| (ONE * *c, *l)).collect();
        KrausExpr::from_pauli_sum(&PauliSum::from_labels(&t).unwrap())
    }

    fn dephasing() -> ChannelExpr {
        ChannelExpr::new(vec![
            k(&[(0.5, "I"), (0.5, "Z")]),
            k(&[(0.5, "I"), (-0.5, "Z")]),
        ])
    }

    #[test]
    fn c2p_on_dephasing() {
        let h = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
        let out = apply_rule(&dephasing(), &Rule::C2p { i: 0, j: 1, a: h, b: h })
            .unwrap()
            .channel;
        assert_eq!(out.kraus[0].len(), 1);
        assert_eq!(out.kraus[1].len(), 1);
        assert!((out.kraus[0].terms[0].0 - h).norm() < 1e-15);
        assert!((out.kraus[1].terms[0].0.norm() - h.re).abs() < 1e-15);
        assert!(expr_distance(&out, &dephasing(), 16).unwrap() < 1e-12);
    }

    #[test]
    fn c2p_rejects_bad_norm() {
        let r = apply_rule(&dephasing(), &Rule::C2p { i: 0, j: 1, a: ONE, b: ONE });
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn c2_rejects_non_unitary() {
        let u = CMatrix::from_element(2, 2, ONE);
        assert!(apply_rule(&dephasing(), &Rule::C2 { u }).is_err());
    }

    #[test]
    fn c3p_merges_proportional() {
        let c = ChannelExpr::new(vec![k(&[(0.6, "X"), (0.6, "Z")]), k(&[(0.8, "X"), (0.8, "Z")])]);
        let out = apply_rule(&c, &Rule::C3p { i: 0, j: 1 }).unwrap().channel;
        assert_eq!(out.kraus.len(), 1);
        for (c, _) in &out.kraus[0].terms {
            assert!((c - ONE).norm() < 1e-12);
        }
        let bad = ChannelExpr::new(vec![k(&[(1.0, "X")]), k(&[(1.0, "Z")])]);
        assert!(apply_rule(&bad, &Rule::C3p { i: 0, j: 1 }).is_err());
    }

    #[test]
    fn k1_and_k2() {
        let c = ChannelExpr::new(vec![k(&[(1.0, "X")]), k(&[(1.0, "Z"), (-1.0, "Z")])]);
        assert!(apply_rule(&c, &Rule::K1 { index: 0 }).is_err());
        let out = apply_rule(&c, &Rule::K1 { index: 1 }).unwrap();
        assert!(out.applied);
        assert_eq!(out.channel.kraus.len(), 1);

        let out = apply_rule(&c, &Rule::K2 { index: 0, theta: 0.7 }).unwrap().channel;
        assert!((out.kraus[0].terms[0].0 - Complex64::from_polar(1.0, -0.7)).norm() < 1e-15);
    }

    #[test]
    fn c1_validates_permutation() {
        assert!(apply_rule(&dephasing(), &Rule::C1 { perm: vec![0, 0] }).is_err());
        let out = apply_rule(&dephasing(), &Rule::C1 { perm: vec![1, 0] }).unwrap();
        assert_eq!(out.channel.kraus[0], dephasing().kraus[1]);
    }

    #[test]
    fn ps_rules_flag_noops() {
        let c = ChannelExpr::new(vec![k(&[(1.0, "X")])]);
        assert!(!apply_rule(&c, &Rule::PS1).unwrap().applied);
        assert!(!apply_rule(&c, &Rule::PS2).unwrap().applied);
    }

    #[test]
    fn minimize_triplicate() {
        let kk = k(&[(0.5, "X"), (0.25, "Y")]);
        let c = ChannelExpr::new(vec![kk.clone(), kk.clone(), kk.clone()]);
        let (out, trace) = minimize_kraus_rank(&c).unwrap();
        assert_eq!(out.kraus.len(), 1);
        assert_eq!(trace[0].rule, "C2");
        assert!(proportionality(&kk, &out.kraus[0]).unwrap().norm() - 3f64.sqrt() < 1e-12);
        assert!(expr_distance(&out, &c, 16).unwrap() < 1e-12);
    }

    #[test]
    fn minimize_dephasing_gives_single_paulis() {
        let (out, _) = simplify(&dephasing(), true).unwrap();
        assert_eq!(out.kraus.len(), 2);
        let h = 1.0 / 2f64.sqrt();
        let labels: Vec<String> = out
            .kraus
            .iter()
            .map(|kr| {
                assert_eq!(kr.len(), 1);
                assert!((kr.terms[0].0 - Complex64::new(h, 0.0)).norm() < 1e-12);
                match &kr.terms[0].1 {
                    crate::ir::Primitive::Pauli(p) => p.label(),
                    _ => unreachable!(),
                }
            })
            .collect();
        assert_eq!(labels, ["I", "Z"]);
    }

    #[test]
    fn simplify_is_idempotent() {
        let c = ChannelExpr::new(vec![
            k(&[(0.3, "XZ"), (0.2, "XZ"), (0.1, "YY")]),
            k(&[(1.0, "ZI"), (-1.0, "ZI")]),
            k(&[(-0.7, "IY")]),
        ]);
        let (once, _) = simplify(&c, false).unwrap();
        assert_eq!(once.kraus.len(), 2);
        let (twice, trace) = simplify(&once, false).unwrap();
        assert_eq!(once, twice);
        assert!(trace.is_empty());
        assert!(expr_distance(&once, &c, 16).unwrap() < 1e-12);
    }
}
