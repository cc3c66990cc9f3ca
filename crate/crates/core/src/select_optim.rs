//! SELECT optimizations: conditional flattening (unary iteration) and the
//! monotone-control decomposition with greedy address assignment.
//!
//! Symplectic vectors pack a Pauli string as `x | z << 64` in a `u128`.
//! Addresses are `s`-bit integers; address bit `k` is driven by control
//! qubit `ctrl[s-1-k]`, so the register reads MSB-first.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Control, Gate};
use crate::error::{Error, Result};
use crate::linalg::i_pow;
use crate::pauli::PauliString;

pub type Sym = u128;

pub fn sym(p: &PauliString) -> Sym {
    p.x_mask() as u128 | (p.z_mask() as u128) << 64
}

pub fn sym_weight(v: Sym) -> usize {
    ((v as u64) | (v >> 64) as u64).count_ones() as usize
}

fn sym_x(v: Sym) -> u64 {
    v as u64
}

fn sym_z(v: Sym) -> u64 {
    (v >> 64) as u64
}


fn ceil_log2(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// Row-echelon basis over GF(2); each row remembers which inserted
/// generators it is the sum of.
#[derive(Debug, Clone, Default)]
pub struct Gf2Basis {
    rows: Vec<(Sym, u64)>,
    inserted: usize,
}

fn lead(v: Sym) -> Sym {
    1u128 << (127 - v.leading_zeros())
}

impl Gf2Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Residue of `v` and the generator combination that was removed.
    pub fn reduce(&self, mut v: Sym) -> (Sym, u64) {
        let mut comb = 0u64;
        for &(r, c) in &self.rows {
            if v & lead(r) != 0 {
                v ^= r;
                comb ^= c;
            }
        }
        (v, comb)
    }

    pub fn contains(&self, v: Sym) -> bool {
        self.reduce(v).0 == 0
    }

    /// Generator combination summing to `v`, bit `i` for the `i`-th insert.
    pub fn decode(&self, v: Sym) -> Option<u64> {
        let (r, c) = self.reduce(v);
        (r == 0).then_some(c)
    }

    /// Inserts `v`; returns false (and records nothing) if it is dependent.
    pub fn insert(&mut self, v: Sym) -> bool {
        let (r, c) = self.reduce(v);
        if r == 0 {
            return false;
        }
        let c = c ^ (1u64 << self.inserted);
        self.inserted += 1;
        self.rows.push((r, c));
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyResult {
    /// Indices into the input rows, in selection order.
    pub selected: Vec<usize>,
    /// Indices of rows lying in the final span (generators included).
    pub covered: Vec<usize>,
    /// True when the capacity test ended the search.
    pub capacity_stop: bool,
}

/// Greedy generator selection scored by newly covered rows per Pauli weight.
pub fn greedy_basis_selection(rows: &[Sym], s: usize) -> GreedyResult {
    let mut basis = Gf2Basis::new();
    let mut selected = Vec::new();
    let mut covered = vec![false; rows.len()];
    let mut uncovered = rows.len();
    let mut capacity_stop = false;
    while selected.len() < s {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, &r) in rows.iter().enumerate() {
            if basis.contains(r) {
                continue;
            }
            let mut trial = basis.clone();
            trial.insert(r);
            let gain = rows
                .iter()
                .enumerate()
                .filter(|&(j, &v)| !covered[j] && trial.contains(v))
                .count();
            let w = sym_weight(r);
            let better = match best {
                None => true,
                Some((_, bg, bw)) => gain * bw > bg * w,
            };
            if better {
                best = Some((i, gain, w));
            }
        }
        let Some((i, gain, _)) = best else { break };
        if gain == 0 {
            break;
        }
        let d = selected.len() + 1;
        let capacity = ((1usize << (s - d)) - 1) << d;
        if uncovered - gain > capacity {
            capacity_stop = true;
            break;
        }
        basis.insert(rows[i]);
        selected.push(i);
        for (j, &v) in rows.iter().enumerate() {
            if !covered[j] && basis.contains(v) {
                covered[j] = true;
                uncovered -= 1;
            }
        }
    }
    GreedyResult {
        selected,
        covered: (0..rows.len()).filter(|&j| covered[j]).collect(),
        capacity_stop,
    }
}

fn combo(gens: &[Sym], u: usize) -> Sym {
    gens.iter()
        .enumerate()
        .filter(|&(i, _)| u >> i & 1 == 1)
        .fold(0, |acc, (_, g)| acc ^ g)
}

/// Places `remaining` vectors on unused addresses.
///
/// `assigned` holds the covered subspace (prefix 0); generator `i` sits at
/// address `1 << i`. Returns the new placements only.
pub fn assign_additional_modes(
    assigned: &BTreeMap<usize, Sym>,
    generators: &[Sym],
    remaining: &[Sym],
    s: usize,
) -> Result<BTreeMap<usize, Sym>> {
    let d = generators.len();
    if d > s {
        return Err(Error::InvalidArgument(format!("{d} generators exceed width {s}")));
    }
    let r = s - d;
    let low = (1usize << d) - 1;
    let mut used: Vec<bool> = vec![false; 1 << s];
    used[0] = true;
    for &a in assigned.keys() {
        used[a] = true;
    }
    let mut out = BTreeMap::new();
    let mut rest: Vec<Sym> = remaining.to_vec();

    for p in 1..(1usize << r) {
        if rest.is_empty() {
            break;
        }
        let slack = ((1usize << r) - p + 1) * low;
        let mut free_u: Vec<usize> = (1..=low).filter(|u| !used[p << d | u]).collect();
        let mut shift: Sym = 0;
        if rest.len() > slack && !used[p << d] {
            let (k, _) = rest
                .iter()
                .enumerate()
                .min_by_key(|&(k, v)| (sym_weight(*v), k))
                .expect("non-empty");
            let v0 = rest.remove(k);
            used[p << d] = true;
            out.insert(p << d, v0);
            shift = v0;
        }
        while !rest.is_empty() && !free_u.is_empty() {
            // Global minimum over (vector, low bits); ties go to the earlier
            // vector, then the smaller address.
            let mut best = (usize::MAX, 0usize, 0usize);
            for (k, &v) in rest.iter().enumerate() {
                for (ui, &u) in free_u.iter().enumerate() {
                    let cost = sym_weight(v ^ shift ^ combo(generators, u));
                    if cost < best.0 {
                        best = (cost, k, ui);
                    }
                }
            }
            let (_, k, ui) = best;
            let u = free_u.remove(ui);
            let v = rest.remove(k);
            used[p << d | u] = true;
            out.insert(p << d | u, v);
        }
    }

    while !rest.is_empty() {
        let weight_at = |a: usize, out: &BTreeMap<usize, Sym>| -> usize {
            assigned
                .get(&a)
                .or_else(|| out.get(&a))
                .map_or(0, |v| sym_weight(*v))
        };
        let c = (1..1usize << s)
            .filter(|&c| !used[c])
            .min_by_key(|&c| {
                let below: usize = (0..c).map(|l| weight_at(l, &out)).sum();
                (c.count_ones(), below, c)
            })
            .ok_or_else(|| {
                Error::InvalidArgument(format!("{} vectors left with no free address", rest.len()))
            })?;
        let reference = combo(generators, c & low);
        let (k, _) = rest
            .iter()
            .enumerate()
            .min_by_key(|&(k, v)| (sym_weight(v ^ reference), k))
            .expect("non-empty");
        let v = rest.remove(k);
        used[c] = true;
        out.insert(c, v);
    }
    Ok(out)
}

/// Address → target Pauli, `phase_exp` counting powers of `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub s: usize,
    pub entries: BTreeMap<usize, (PauliString, u8)>,
}

/// Address → monotone factor `g` and its phase `θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GTable {
    pub s: usize,
    pub entries: BTreeMap<usize, (PauliString, u8)>,
}

impl GTable {
    pub fn weighted_cost(&self) -> usize {
        self.entries
            .iter()
            .map(|(a, (g, _))| a.count_ones() as usize * g.weight())
            .sum()
    }

    /// Product of `i^θ_c g_c` over `c ⊆ b`, in increasing address order
    /// (later factors multiply on the left).
    pub fn reconstruct(&self, n: usize, b: usize) -> PauliString {
        let mut acc = PauliString::identity(n);
        for (&c, (g, theta)) in &self.entries {
            if c & b == c {
                acc = (*g).with_phase((g.phase_exp() + theta) % 4).mul_unchecked(&acc);
            }
        }
        acc
    }
}

/// Solves `i^θ_b g_b · R_b = i^φ_b P_b` address by address.
pub fn invert_modes_with_phases(n: usize, modes: &ModeTable) -> GTable {
    let mut g = GTable {
        s: modes.s,
        entries: BTreeMap::new(),
    };
    for (&b, (target, phi)) in &modes.entries {
        let r = g.reconstruct(n, b);
        let want = (*target).with_phase((target.phase_exp() + phi) % 4);
        let factor = want.mul_unchecked(&r.inverse());
        let theta = factor.phase_exp();
        let unphased = factor.unphased();
        if !unphased.is_identity() || theta != 0 {
            g.entries.insert(b, (unphased, theta));
        }
    }
    g
}

/// Result of the monotone-control optimization for one Pauli sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectPlan {
    pub s: usize,
    pub modes: ModeTable,
    pub gtable: GTable,
    /// PREPARE coefficients indexed by address, phases folded in.
    pub coeffs: Vec<Complex64>,
    pub weighted_cost: usize,
    /// Set when the monotone factors cost more than a full-polarity
    /// multiplexor over the same addresses; SELECT then applies each target
    /// directly and `coeffs` carry no `θ` corrections.
    pub multiplexed: bool,
}

/// Naive-baseline weighted cost: every term behind `s` controls.
pub fn baseline_cost(terms: &[(Complex64, PauliString)]) -> usize {
    let m = terms.len();
    let has_identity = terms.iter().any(|(_, p)| p.is_identity());
    let s = if has_identity { ceil_log2(m) } else { ceil_log2(m + 1) };
    terms.iter().map(|(_, p)| s * p.weight()).sum()
}

fn z_key(v: Sym) -> (usize, u64, u64) {
    (sym_weight(v), sym_z(v), sym_x(v))
}

fn x_key(v: Sym) -> (usize, u64, u64) {
    (sym_weight(v), sym_x(v), sym_z(v))
}

/// Monotone-control decomposition of a Pauli sum.
///
/// Terms must have distinct strings. The identity (if present) is pinned to
/// address 0. Without an identity and with a power-of-two term count the
/// first term in weight order takes address 0 as an unconditional factor,
/// which saves one control bit; otherwise address 0 is left empty.
pub fn optimize_pauli_select(terms: &[(Complex64, PauliString)]) -> Result<SelectPlan> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("empty Pauli sum".into()));
    }
    let n = terms[0].1.n();
    let mut identity: Option<Complex64> = None;
    let mut others: Vec<(Complex64, PauliString)> = Vec::new();
    for (c, p) in terms {
        if p.n() != n {
            return Err(Error::ArityMismatch {
                context: "Pauli sum term".into(),
                expected: n,
                found: p.n(),
            });
        }
        let coeff = c * p.phase_factor();
        let p = (*p).unphased();
        if p.is_identity() {
            if identity.is_some() {
                return Err(Error::InvalidArgument("duplicate identity term".into()));
            }
            identity = Some(coeff);
        } else {
            others.push((coeff, p));
        }
    }
    {
        let mut keys: Vec<Sym> = others.iter().map(|(_, p)| sym(p)).collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate Pauli strings".into()));
        }
    }
    let m = terms.len();

    // Address 0 content: identity, a rebased term, or nothing.
    let (s, base): (usize, Option<(Complex64, PauliString)>) = if let Some(c) = identity {
        (ceil_log2(m), Some((c, PauliString::identity(n))))
    } else if m >= 2 && m.is_power_of_two() {
        let k = (0..others.len())
            .min_by_key(|&k| (z_key(sym(&others[k].1)), k))
            .expect("non-empty");
        let t = others.remove(k);
        (ceil_log2(m), Some(t))
    } else {
        (ceil_log2(m + 1), None)
    };
    let shift = base.as_ref().map_or(0, |(_, p)| sym(p));
    let vecs: Vec<Sym> = others.iter().map(|(_, p)| sym(p) ^ shift).collect();

    let mut z_order: Vec<usize> = (0..vecs.len()).collect();
    z_order.sort_by_key(|&k| z_key(vecs[k]));
    let mut x_order: Vec<usize> = (0..vecs.len()).collect();
    x_order.sort_by_key(|&k| x_key(vecs[k]));
    let rows_z: Vec<Sym> = z_order.iter().map(|&k| vecs[k]).collect();
    let rows_x: Vec<Sym> = x_order.iter().map(|&k| vecs[k]).collect();
    let from_x = greedy_basis_selection(&rows_x, s);
    let from_z = greedy_basis_selection(&rows_z, s);
    let (order, rows, greedy) = if from_x.covered.len() > from_z.covered.len() {
        (x_order, rows_x, from_x)
    } else {
        (z_order, rows_z, from_z)
    };

    let generators: Vec<Sym> = greedy.selected.iter().map(|&i| rows[i]).collect();
    let mut basis = Gf2Basis::new();
    for &g in &generators {
        basis.insert(g);
    }
    let mut placed: BTreeMap<usize, Sym> = BTreeMap::new();
    for &i in &greedy.covered {
        let addr = basis.decode(rows[i]).expect("covered row lies in the span") as usize;
        placed.insert(addr, rows[i]);
    }
    let covered: std::collections::HashSet<usize> = greedy.covered.iter().copied().collect();
    let remaining: Vec<Sym> = (0..rows.len())
        .filter(|i| !covered.contains(i))
        .map(|i| rows[i])
        .collect();
    let extra = assign_additional_modes(&placed, &generators, &remaining, s)?;
    placed.extend(extra);

    // Back to original strings and coefficients.
    let by_vec: std::collections::HashMap<Sym, usize> =
        order.iter().map(|&k| (vecs[k], k)).collect();
    let mut modes = ModeTable {
        s,
        entries: BTreeMap::new(),
    };
    let mut beta: BTreeMap<usize, Complex64> = BTreeMap::new();
    if let Some((c, p)) = &base {
        modes.entries.insert(0, (*p, 0));
        beta.insert(0, *c);
    }
    for (&addr, v) in &placed {
        let k = by_vec[v];
        let (c, p) = &others[k];
        debug_assert_eq!(sym(p), v ^ shift);
        modes.entries.insert(addr, (*p, 0));
        beta.insert(addr, *c);
    }
    let gtable = invert_modes_with_phases(n, &modes);

    // The circuit applies bare g's: U_b = i^{-Σθ} P_b.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 1 << s];
    for (&b, c) in &beta {
        let theta: u32 = gtable
            .entries
            .iter()
            .filter(|&(&a, _)| a & b == a)
            .map(|(_, (_, t))| *t as u32)
            .sum();
        coeffs[b] = c * i_pow((theta % 4) as u8);
    }
    let mut weighted_cost = gtable.weighted_cost();
    let direct_cost: usize = s.max(1) * modes.entries.values().map(|(p, _)| p.weight()).sum::<usize>();
    let multiplexed = weighted_cost > direct_cost;
    if multiplexed {
        for (&b, c) in &beta {
            coeffs[b] = *c;
        }
        weighted_cost = direct_cost;
    }
    Ok(SelectPlan {
        s,
        modes,
        gtable,
        coeffs,
        weighted_cost,
        multiplexed,
    })
}

/// Control list for `address` on an MSB-first register, positive bits only.
pub fn monotone_controls(ctrl: &[usize], address: usize) -> Vec<Control> {
    let s = ctrl.len();
    (0..s)
        .rev()
        .filter(|k| address >> k & 1 == 1)
        .map(|k| Control::on(ctrl[s - 1 - k]))
        .collect()
}

/// Full-polarity control list for `address` on an MSB-first register.
pub fn address_controls(ctrl: &[usize], address: usize) -> Vec<Control> {
    let s = ctrl.len();
    (0..s)
        .map(|j| Control::new(ctrl[j], address >> (s - 1 - j) & 1 == 1))
        .collect()
}

/// Full-polarity multiplexor over the mode table, for multiplexed plans.
pub fn build_multiplexed_select(modes: &ModeTable, ctrl: &[usize], system_offset: usize) -> Vec<Gate> {
    modes
        .entries
        .iter()
        .filter(|(_, (p, _))| !p.is_identity())
        .map(|(&a, (p, _))| {
            Gate::controlled(
                address_controls(ctrl, a),
                Gate::Pauli {
                    pauli: *p,
                    offset: system_offset,
                },
            )
        })
        .collect()
}

/// One positively controlled Pauli gate per nontrivial entry.
pub fn build_monotone_select(g: &GTable, ctrl: &[usize], system_offset: usize) -> Vec<Gate> {
    g.entries
        .iter()
        .filter(|(_, (p, _))| !p.is_identity())
        .map(|(&a, (p, _))| {
            Gate::controlled(
                monotone_controls(ctrl, a),
                Gate::Pauli {
                    pauli: *p,
                    offset: system_offset,
                },
            )
        })
        .collect()
}

/// One flattening step: the first two controls are folded into `flag`.
pub fn flatten_controlled(gate: &Gate, flag: usize) -> Vec<Gate> {
    match gate {
        Gate::Controlled { controls, body } if controls.len() >= 2 => {
            let (c1, c2) = (controls[0], controls[1]);
            let mut rest = vec![Control::on(flag)];
            rest.extend_from_slice(&controls[2..]);
            vec![
                Gate::ToffoliCompute { c1, c2, target: flag },
                Gate::controlled(rest, (**body).clone()),
                Gate::ToffoliUncompute { c1, c2, target: flag },
            ]
        }
        other => vec![other.clone()],
    }
}

/// Unary-iteration multiplexor over `branches` (address, body gates).
///
/// `ctrl` is the `b`-qubit selector (MSB first) and `flags` supplies the
/// `b − 1` flag ancillas. Level-one branches use the raw selector bit; each
/// deeper level computes its flag with a Toffoli, switches siblings with a
/// CNOT and uncomputes with a measurement-style Toffoli.
pub fn flatten_select(
    branches: &[(usize, Vec<Gate>)],
    ctrl: &[usize],
    flags: &[usize],
) -> Result<Vec<Gate>> {
    let b = ctrl.len();
    let mut seen = std::collections::HashSet::new();
    for (a, _) in branches {
        if *a >> b != 0 {
            return Err(Error::InvalidArgument(format!(
                "address {a} does not fit in {b} selector bits"
            )));
        }
        if !seen.insert(*a) {
            return Err(Error::InvalidArgument(format!("address {a} used twice")));
        }
    }
    if b >= 2 && flags.len() < b - 1 {
        return Err(Error::InvalidArgument(format!(
            "{b} selector bits need {} flag qubits, got {}",
            b - 1,
            flags.len()
        )));
    }
    let mut table: BTreeMap<usize, &[Gate]> = BTreeMap::new();
    for (a, body) in branches {
        table.insert(*a, body);
    }
    let mut out = Vec::new();
    if b == 0 {
        if let Some(body) = table.get(&0) {
            out.extend(body.iter().cloned());
        }
        return Ok(out);
    }
    for v in 0..2usize {
        let prefix = v;
        if has_prefix(&table, b, 1, prefix) {
            walk(&table, ctrl, flags, 1, Control::new(ctrl[0], v == 1), prefix, &mut out);
        }
    }
    Ok(out)
}

fn has_prefix(table: &BTreeMap<usize, &[Gate]>, b: usize, len: usize, prefix: usize) -> bool {
    table.keys().any(|a| a >> (b - len) == prefix)
}

fn walk(
    table: &BTreeMap<usize, &[Gate]>,
    ctrl: &[usize],
    flags: &[usize],
    level: usize,
    cond: Control,
    prefix: usize,
    out: &mut Vec<Gate>,
) {
    let b = ctrl.len();
    if level == b {
        for g in table[&prefix].iter() {
            out.push(Gate::controlled(vec![cond], g.clone()));
        }
        return;
    }
    let flag = flags[level - 1];
    let children: Vec<usize> = (0..2)
        .filter(|v| has_prefix(table, b, level + 1, prefix << 1 | v))
        .collect();
    let first = children[0];
    out.push(Gate::ToffoliCompute {
        c1: cond,
        c2: Control::new(ctrl[level], first == 1),
        target: flag,
    });
    let mut last = first;
    for (k, &v) in children.iter().enumerate() {
        if k > 0 {
            // flag = cond ∧ c = v0  →  cond ∧ c = v1.
            out.push(Gate::controlled(vec![cond], Gate::x(flag)));
        }
        walk(table, ctrl, flags, level + 1, Control::on(flag), prefix << 1 | v, out);
        last = v;
    }
    out.push(Gate::ToffoliUncompute {
        c1: cond,
        c2: Control::new(ctrl[level], last == 1),
        target: flag,
    });
}

/// The operator the plan realizes, `Σ_b y_b U_b`, as Pauli terms.
pub fn plan_operator_terms(n: usize, plan: &SelectPlan) -> Vec<(Complex64, PauliString)> {
    if plan.multiplexed {
        return plan
            .modes
            .entries
            .iter()
            .map(|(&b, (p, phi))| (plan.coeffs[b] * i_pow(*phi), *p))
            .collect();
    }
    plan.modes
        .entries
        .keys()
        .map(|&b| {
            let bare = GTable {
                s: plan.s,
                entries: plan
                    .gtable
                    .entries
                    .iter()
                    .map(|(&a, (g, _))| (a, (*g, 0)))
                    .collect(),
            };
            let u = bare.reconstruct(n, b);
            (plan.coeffs[b] * u.phase_factor(), u.unphased())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::pauli::PauliSum;

    fn ps(label: &str) -> PauliString {
        PauliString::from_label(label, 0).unwrap()
    }

    #[test]
    fn gf2_basis_decodes_combinations() {
        let mut b = Gf2Basis::new();
        let (x1, x2) = (sym(&ps("XI")), sym(&ps("IX")));
        assert!(b.insert(x1));
        assert!(b.insert(x2));
        assert!(!b.insert(x1 ^ x2));
        assert_eq!(b.decode(x1 ^ x2), Some(0b11));
        assert_eq!(b.decode(sym(&ps("ZI"))), None);
    }

    #[test]
    fn greedy_covers_xx_family() {
        let rows = [sym(&ps("XI")), sym(&ps("IX")), sym(&ps("XX"))];
        let g = greedy_basis_selection(&rows, 2);
        assert_eq!(g.selected.len(), 2);
        assert_eq!(g.covered.len(), 3);
        let g = greedy_basis_selection(&rows[..1], 1);
        assert_eq!(g.selected, vec![0]);
    }

    #[test]
    fn greedy_capacity_stop() {
        // Four independent rows in two bits: only three addresses exist.
        let rows = [sym(&ps("XII")), sym(&ps("IXI")), sym(&ps("IIX")), sym(&ps("ZII"))];
        let g = greedy_basis_selection(&rows, 2);
        assert!(g.capacity_stop);
    }

    #[test]
    fn single_term_goes_to_address_one() {
        let plan = optimize_pauli_select(&[(ONE, ps("XZ"))]).unwrap();
        assert_eq!(plan.s, 1);
        assert_eq!(plan.gtable.entries.len(), 1);
        assert_eq!(plan.gtable.entries[&1].0, ps("XZ"));
        assert_eq!(plan.weighted_cost, 2);
    }

    #[test]
    fn two_term_sum_rebases() {
        let plan = optimize_pauli_select(&[(ONE, ps("X")), (ONE, ps("Y"))]).unwrap();
        assert_eq!(plan.s, 1);
        assert_eq!(plan.gtable.entries[&0].0, ps("X"));
        assert_eq!(plan.gtable.entries[&1].0, ps("Z"));
    }

    #[test]
    fn two_bit_product_gets_identity() {
        let modes = ModeTable {
            s: 2,
            entries: [(0, (ps("II"), 0)), (1, (ps("ZI"), 0)), (2, (ps("IZ"), 0)), (3, (ps("ZZ"), 0))]
                .into_iter()
                .collect(),
        };
        let g = invert_modes_with_phases(2, &modes);
        assert!(!g.entries.contains_key(&3));
        for b in 0..4 {
            assert_eq!(g.reconstruct(2, b), modes.entries[&b].0);
        }
    }

    #[test]
    fn plan_reproduces_sum() {
        let sum = PauliSum::from_labels(&[
            (Complex64::new(0.5, 0.0), "II"),
            (Complex64::new(0.0, 0.3), "XY"),
            (Complex64::new(-0.2, 0.1), "ZZ"),
            (Complex64::new(0.7, 0.0), "YX"),
        ])
        .unwrap();
        let plan = optimize_pauli_select(sum.terms()).unwrap();
        let rebuilt = PauliSum::from_terms(2, plan_operator_terms(2, &plan)).unwrap();
        let diff = (rebuilt.to_matrix().unwrap() - sum.to_matrix().unwrap()).norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn costly_monotone_plan_falls_back_to_multiplexor() {
        let terms: Vec<_> = ["III", "XII", "IXI", "IIX"].iter().map(|l| (ONE, ps(l))).collect();
        let plan = optimize_pauli_select(&terms).unwrap();
        assert!(plan.multiplexed);
        assert_eq!(plan.gtable.weighted_cost(), 8);
        assert_eq!(plan.weighted_cost, 6);
        let rebuilt = PauliSum::from_terms(3, plan_operator_terms(3, &plan)).unwrap();
        let want = PauliSum::from_terms(3, terms).unwrap();
        assert!((rebuilt.to_matrix().unwrap() - want.to_matrix().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn flatten_one_step_shape() {
        let body = Gate::Pauli {
            pauli: ps("X"),
            offset: 4,
        };
        let g = Gate::controlled(vec![Control::on(0), Control::on(1), Control::on(2)], body);
        let out = flatten_controlled(&g, 3);
        assert_eq!(out.len(), 3);
        assert!(matches!(out[0], Gate::ToffoliCompute { target: 3, .. }));
        assert_eq!(out[1].controls().len(), 2);
        assert!(matches!(out[2], Gate::ToffoliUncompute { target: 3, .. }));
    }

    #[test]
    fn two_branch_flatten_uses_raw_control() {
        let body = |l: &str| vec![Gate::Pauli { pauli: ps(l), offset: 1 }];
        let out = flatten_select(&[(0, body("X")), (1, body("Z"))], &[0], &[]).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].controls(), vec![Control::off(0)]);
        assert_eq!(out[1].controls(), vec![Control::on(0)]);
        assert!(flatten_select(&[(2, body("X"))], &[0], &[]).is_err());
    }
}
