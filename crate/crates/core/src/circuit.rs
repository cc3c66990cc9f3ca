//! Gate-level circuits, a dense state-vector simulator and the cost model.
//!
//! Qubit `q` of a circuit with `N` qubits is bit `N-1-q` of the basis index,
//! so qubit 0 is the most significant tensor factor. Registers are laid out
//! as `kraus_sel`, `be_anc`, `flat_anc`, `system`; with every ancilla at
//! zero the system occupies the top-left `2^n × 2^n` block.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ir::{check_input_dim, ChannelMap};
use crate::linalg::{self, i_pow, CMatrix, ONE, ZERO};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    /// `true` fires on `|1⟩`, `false` on `|0⟩`.
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, polarity: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control { qubit, polarity: false }
    }

    pub fn new(qubit: usize, polarity: bool) -> Self {
        Control { qubit, polarity }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    /// Pauli string acting on qubits `offset..offset+n`.
    Pauli { pauli: PauliString, offset: usize },
    Controlled { controls: Vec<Control>, body: Box<Gate> },
    /// Any unitary with `|0…0⟩ ↦ amplitudes` (Householder completion).
    StatePrep { qubits: Vec<usize>, amplitudes: Vec<Complex64> },
    StatePrepAdjoint { qubits: Vec<usize>, amplitudes: Vec<Complex64> },
    ToffoliCompute { c1: Control, c2: Control, target: usize },
    ToffoliUncompute { c1: Control, c2: Control, target: usize },
    Opaque {
        handle: String,
        qubits: Vec<usize>,
        #[serde(with = "crate::format::opt_matrix", default)]
        matrix: Option<CMatrix>,
    },
}

impl Gate {
    pub fn controlled(controls: Vec<Control>, body: Gate) -> Gate {
        if controls.is_empty() {
            return body;
        }
        match body {
            Gate::Controlled { controls: inner, body } => {
                let mut all = controls;
                all.extend(inner);
                Gate::Controlled { controls: all, body }
            }
            other => Gate::Controlled {
                controls,
                body: Box::new(other),
            },
        }
    }

    /// X on a single qubit.
    pub fn x(qubit: usize) -> Gate {
        Gate::Pauli {
            pauli: PauliString::from_label("X", 0).expect("valid label"),
            offset: qubit,
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::Pauli { pauli, offset } => Gate::Pauli {
                pauli: pauli.inverse(),
                offset: *offset,
            },
            Gate::Controlled { controls, body } => Gate::Controlled {
                controls: controls.clone(),
                body: Box::new(body.adjoint()),
            },
            Gate::StatePrep { qubits, amplitudes } => Gate::StatePrepAdjoint {
                qubits: qubits.clone(),
                amplitudes: amplitudes.clone(),
            },
            Gate::StatePrepAdjoint { qubits, amplitudes } => Gate::StatePrep {
                qubits: qubits.clone(),
                amplitudes: amplitudes.clone(),
            },
            Gate::ToffoliCompute { c1, c2, target } => Gate::ToffoliUncompute {
                c1: *c1,
                c2: *c2,
                target: *target,
            },
            Gate::ToffoliUncompute { c1, c2, target } => Gate::ToffoliCompute {
                c1: *c1,
                c2: *c2,
                target: *target,
            },
            Gate::Opaque {
                handle,
                qubits,
                matrix,
            } => Gate::Opaque {
                handle: format!("{handle}^dag"),
                qubits: qubits.clone(),
                matrix: matrix.as_ref().map(linalg::dagger),
            },
        }
    }

    /// Qubits acted on (excluding controls).
    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Pauli { pauli, offset } => (*offset..offset + pauli.n()).collect(),
            Gate::Controlled { body, .. } => body.targets(),
            Gate::StatePrep { qubits, .. } | Gate::StatePrepAdjoint { qubits, .. } => qubits.clone(),
            Gate::Opaque { qubits, .. } => qubits.clone(),
            Gate::ToffoliCompute { target, .. } | Gate::ToffoliUncompute { target, .. } => {
                vec![*target]
            }
        }
    }

    /// All controls, including the two of a Toffoli.
    pub fn controls(&self) -> Vec<Control> {
        match self {
            Gate::Controlled { controls, body } => {
                let mut all = controls.clone();
                all.extend(body.controls());
                all
            }
            Gate::ToffoliCompute { c1, c2, .. } | Gate::ToffoliUncompute { c1, c2, .. } => {
                vec![*c1, *c2]
            }
            _ => Vec::new(),
        }
    }

    /// Relabels qubits; Pauli gates move their offset, so `f` must keep
    /// the system register contiguous.
    pub fn remap(&self, f: &dyn Fn(usize) -> usize) -> Gate {
        let fc = |c: &Control| Control::new(f(c.qubit), c.polarity);
        match self {
            Gate::Pauli { pauli, offset } => Gate::Pauli {
                pauli: *pauli,
                offset: f(*offset),
            },
            Gate::Controlled { controls, body } => Gate::Controlled {
                controls: controls.iter().map(fc).collect(),
                body: Box::new(body.remap(f)),
            },
            Gate::StatePrep { qubits, amplitudes } => Gate::StatePrep {
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                amplitudes: amplitudes.clone(),
            },
            Gate::StatePrepAdjoint { qubits, amplitudes } => Gate::StatePrepAdjoint {
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                amplitudes: amplitudes.clone(),
            },
            Gate::ToffoliCompute { c1, c2, target } => Gate::ToffoliCompute {
                c1: fc(c1),
                c2: fc(c2),
                target: f(*target),
            },
            Gate::ToffoliUncompute { c1, c2, target } => Gate::ToffoliUncompute {
                c1: fc(c1),
                c2: fc(c2),
                target: f(*target),
            },
            Gate::Opaque {
                handle,
                qubits,
                matrix,
            } => Gate::Opaque {
                handle: handle.clone(),
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                matrix: matrix.clone(),
            },
        }
    }

    fn is_state_prep(&self) -> bool {
        match self {
            Gate::StatePrep { .. } | Gate::StatePrepAdjoint { .. } => true,
            Gate::Controlled { body, .. } => body.is_state_prep(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registers {
    pub kraus_sel: usize,
    pub be_anc: usize,
    pub flat_anc: usize,
    pub system: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterName {
    KrausSel,
    BeAnc,
    FlatAnc,
    System,
}

impl RegisterName {
    pub const ALL: [RegisterName; 4] = [
        RegisterName::KrausSel,
        RegisterName::BeAnc,
        RegisterName::FlatAnc,
        RegisterName::System,
    ];
}

impl fmt::Display for RegisterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegisterName::KrausSel => "kraus_sel",
            RegisterName::BeAnc => "be_anc",
            RegisterName::FlatAnc => "flat_anc",
            RegisterName::System => "system",
        })
    }
}

impl FromStr for RegisterName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kraus_sel" => Ok(RegisterName::KrausSel),
            "be_anc" => Ok(RegisterName::BeAnc),
            "flat_anc" => Ok(RegisterName::FlatAnc),
            "system" => Ok(RegisterName::System),
            _ => Err(Error::InvalidArgument(format!("unknown register `{s}`"))),
        }
    }
}

impl Registers {
    pub fn total(&self) -> usize {
        self.kraus_sel + self.be_anc + self.flat_anc + self.system
    }

    pub fn ancillas(&self) -> usize {
        self.total() - self.system
    }

    pub fn width(&self, r: RegisterName) -> usize {
        match r {
            RegisterName::KrausSel => self.kraus_sel,
            RegisterName::BeAnc => self.be_anc,
            RegisterName::FlatAnc => self.flat_anc,
            RegisterName::System => self.system,
        }
    }

    /// First qubit of a register.
    pub fn offset(&self, r: RegisterName) -> usize {
        match r {
            RegisterName::KrausSel => 0,
            RegisterName::BeAnc => self.kraus_sel,
            RegisterName::FlatAnc => self.kraus_sel + self.be_anc,
            RegisterName::System => self.kraus_sel + self.be_anc + self.flat_anc,
        }
    }

    pub fn qubits(&self, r: RegisterName) -> std::ops::Range<usize> {
        let o = self.offset(r);
        o..o + self.width(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub registers: Registers,
    pub gates: Vec<Gate>,
    /// The postselected map is `(1/norm)·E`; `1` for a plain unitary, `α²`
    /// for a block-encoding, `Σα_j²` for a channel-LCU circuit.
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub weighted_control_cost: usize,
    pub t_count: usize,
    pub toffoli_count: usize,
    pub controlled_pauli_count: usize,
    pub total_gates: usize,
    pub ancillas: usize,
}

impl Circuit {
    pub fn new(registers: Registers) -> Self {
        Circuit {
            registers,
            gates: Vec::new(),
            norm: 1.0,
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn total_qubits(&self) -> usize {
        self.registers.total()
    }

    pub fn validate(&self) -> Result<()> {
        let total = self.total_qubits();
        let mut open_toffolis: std::collections::HashMap<usize, usize> = Default::default();
        for (i, g) in self.gates.iter().enumerate() {
            let targets = g.targets();
            let controls = g.controls();
            for &q in targets.iter().chain(controls.iter().map(|c| &c.qubit)) {
                if q >= total {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {i} touches qubit {q} outside {total} declared qubits"
                    )));
                }
            }
            let mut seen = vec![false; total];
            for &q in targets.iter().chain(controls.iter().map(|c| &c.qubit)) {
                if seen[q] {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {i} uses qubit {q} twice"
                    )));
                }
                seen[q] = true;
            }
            check_gate_shape(i, g)?;
            match g {
                Gate::ToffoliCompute { target, .. } => *open_toffolis.entry(*target).or_default() += 1,
                Gate::ToffoliUncompute { target, .. } => {
                    let open = open_toffolis.entry(*target).or_default();
                    if *open == 0 {
                        return Err(Error::InvalidCircuit(format!(
                            "gate {i}: uncompute on qubit {target} without a matching compute"
                        )));
                    }
                    *open -= 1;
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn cost_report(&self) -> CostReport {
        let mut r = CostReport {
            ancillas: self.registers.ancillas(),
            ..Default::default()
        };
        for g in &self.gates {
            if g.is_state_prep() {
                continue;
            }
            r.total_gates += 1;
            match g {
                Gate::ToffoliCompute { .. } => {
                    r.toffoli_count += 1;
                    r.t_count += 4;
                }
                Gate::ToffoliUncompute { .. } => r.toffoli_count += 1,
                Gate::Controlled { controls, body } => {
                    let c = controls.len();
                    if c >= 2 {
                        r.t_count += 4 * (c - 1);
                    }
                    if let Gate::Pauli { pauli, .. } = body.as_ref() {
                        r.controlled_pauli_count += 1;
                        r.weighted_control_cost += c * pauli.weight();
                    }
                }
                _ => {}
            }
        }
        r
    }

    /// The circuit with gates reversed and adjointed.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            registers: self.registers,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
            norm: self.norm,
        }
    }

    pub fn simulate_unitary(&self) -> Result<CMatrix> {
        let sim = Compiled::new(self)?;
        let dim = 1usize << sim.nq;
        let mut u = CMatrix::zeros(dim, dim);
        let mut psi = vec![ZERO; dim];
        for col in 0..dim {
            psi.iter_mut().for_each(|a| *a = ZERO);
            psi[col] = ONE;
            sim.run(&mut psi);
            for (r, a) in psi.iter().enumerate() {
                u[(r, col)] = *a;
            }
        }
        Ok(u)
    }

    /// Top-left `2^n × 2^n` block: every ancilla in and out at `|0⟩`.
    pub fn extract_block(&self) -> Result<CMatrix> {
        let sim = Compiled::new(self)?;
        let dim = 1usize << self.registers.system;
        let mut block = CMatrix::zeros(dim, dim);
        let mut psi = vec![ZERO; 1 << sim.nq];
        for col in 0..dim {
            psi.iter_mut().for_each(|a| *a = ZERO);
            psi[col] = ONE;
            sim.run(&mut psi);
            for r in 0..dim {
                block[(r, col)] = psi[r];
            }
        }
        Ok(block)
    }

    /// `⟨0|_post Tr_traceout[U (|0⟩⟨0| ⊗ ρ) U†] |0⟩_post` and its trace.
    ///
    /// Every non-empty ancilla register must be listed exactly once.
    pub fn run_channel(
        &self,
        rho: &CMatrix,
        postselect: &[RegisterName],
        traceout: &[RegisterName],
    ) -> Result<(CMatrix, f64)> {
        let regs = self.registers;
        for r in RegisterName::ALL {
            let listed = postselect.iter().chain(traceout).filter(|&&x| x == r).count();
            if r == RegisterName::System {
                if listed != 0 {
                    return Err(Error::InvalidArgument(
                        "system register cannot be postselected or traced".into(),
                    ));
                }
            } else if regs.width(r) > 0 && listed != 1 {
                return Err(Error::InvalidArgument(format!(
                    "register `{r}` must appear exactly once in postselect/traceout"
                )));
            }
        }
        check_input_dim(regs.system, rho)?;
        let sim = Compiled::new(self)?;
        let nq = sim.nq;
        let n = regs.system;
        let sys_dim = 1usize << n;

        // Postselected qubits must be zero; traced qubits are summed over.
        let mut post_mask = 0usize;
        let mut trace_qubits = Vec::new();
        for r in postselect {
            for q in regs.qubits(*r) {
                post_mask |= 1 << (nq - 1 - q);
            }
        }
        for r in traceout {
            trace_qubits.extend(regs.qubits(*r));
        }

        let (vals, vecs) = linalg::hermitian_eigen(rho);
        let mut out = CMatrix::zeros(sys_dim, sys_dim);
        let mut psi = vec![ZERO; 1 << nq];
        for (k, &p) in vals.iter().enumerate() {
            if p <= 1e-15 {
                continue;
            }
            psi.iter_mut().for_each(|a| *a = ZERO);
            for i in 0..sys_dim {
                psi[i] = vecs[(i, k)];
            }
            sim.run(&mut psi);
            for t in 0..1usize << trace_qubits.len() {
                let mut base = 0usize;
                for (j, &q) in trace_qubits.iter().enumerate() {
                    if t >> j & 1 == 1 {
                        base |= 1 << (nq - 1 - q);
                    }
                }
                debug_assert_eq!(base & post_mask, 0);
                // System bits are the low n bits; other ancillas stay zero.
                for r in 0..sys_dim {
                    let a = psi[base | r];
                    if a == ZERO {
                        continue;
                    }
                    for c in 0..sys_dim {
                        out[(r, c)] += a * psi[base | c].conj() * p;
                    }
                }
            }
        }
        let prob = linalg::trace(&out).re;
        Ok((out, prob))
    }
}

fn check_gate_shape(i: usize, g: &Gate) -> Result<()> {
    match g {
        Gate::StatePrep { qubits, amplitudes } | Gate::StatePrepAdjoint { qubits, amplitudes } => {
            if amplitudes.len() != 1usize << qubits.len() {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i}: {} amplitudes for {} qubits",
                    amplitudes.len(),
                    qubits.len()
                )));
            }
            let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i}: state-prep amplitudes have norm {norm}"
                )));
            }
            Ok(())
        }
        Gate::Opaque { qubits, matrix: Some(m), .. } => {
            let dim = 1usize << qubits.len();
            if m.shape() != (dim, dim) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i}: opaque matrix is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(())
        }
        Gate::Controlled { body, .. } => check_gate_shape(i, body),
        _ => Ok(()),
    }
}

/// Gates lowered to index masks and dense blocks.
struct Compiled {
    nq: usize,
    ops: Vec<Op>,
}

enum Op {
    Pauli {
        cmask: usize,
        cval: usize,
        xm: usize,
        zm: usize,
        base: u8,
    },
    Dense {
        cmask: usize,
        cval: usize,
        /// Index bits of the target qubits, most significant first.
        bits: Vec<usize>,
        matrix: CMatrix,
    },
}

impl Compiled {
    fn new(c: &Circuit) -> Result<Self> {
        let nq = c.total_qubits();
        linalg::check_cap(nq)?;
        c.validate()?;
        let mut ops = Vec::with_capacity(c.gates.len());
        for g in &c.gates {
            ops.push(lower(nq, g, 0, 0)?);
        }
        Ok(Compiled { nq, ops })
    }

    fn run(&self, psi: &mut [Complex64]) {
        let mut scratch = vec![ZERO; psi.len()];
        for op in &self.ops {
            match op {
                Op::Pauli {
                    cmask,
                    cval,
                    xm,
                    zm,
                    base,
                } => {
                    scratch.copy_from_slice(psi);
                    // Controlled-on indices are closed under `^ xm`, so each
                    // one is overwritten exactly once.
                    for (i, a) in scratch.iter().enumerate() {
                        if i & cmask != *cval {
                            continue;
                        }
                        let sign = ((zm & i).count_ones() % 2) as u8;
                        psi[i ^ xm] = a * i_pow(base + 2 * sign);
                    }
                }
                Op::Dense {
                    cmask,
                    cval,
                    bits,
                    matrix,
                } => {
                    let tmask: usize = bits.iter().sum();
                    let k = bits.len();
                    let dim = 1usize << k;
                    let mut idx = vec![0usize; dim];
                    let mut buf = vec![ZERO; dim];
                    for i in 0..psi.len() {
                        if i & tmask != 0 || i & cmask != *cval {
                            continue;
                        }
                        for (a, slot) in idx.iter_mut().enumerate() {
                            let mut j = i;
                            for (t, b) in bits.iter().enumerate() {
                                if a >> (k - 1 - t) & 1 == 1 {
                                    j |= b;
                                }
                            }
                            *slot = j;
                        }
                        for (a, &j) in idx.iter().enumerate() {
                            buf[a] = psi[j];
                        }
                        for (r, &j) in idx.iter().enumerate() {
                            let mut acc = ZERO;
                            for (c, b) in buf.iter().enumerate() {
                                acc += matrix[(r, c)] * b;
                            }
                            psi[j] = acc;
                        }
                    }
                }
            }
        }
    }
}

fn bit(nq: usize, q: usize) -> usize {
    1 << (nq - 1 - q)
}

fn lower(nq: usize, g: &Gate, cmask: usize, cval: usize) -> Result<Op> {
    Ok(match g {
        Gate::Pauli { pauli, offset } => {
            let (mut xm, mut zm) = (0usize, 0usize);
            for k in 0..pauli.n() {
                let b = bit(nq, offset + k);
                if pauli.x_mask() >> k & 1 == 1 {
                    xm |= b;
                }
                if pauli.z_mask() >> k & 1 == 1 {
                    zm |= b;
                }
            }
            let base = ((pauli.phase_exp() as u32 + (pauli.x_mask() & pauli.z_mask()).count_ones()) % 4) as u8;
            Op::Pauli {
                cmask,
                cval,
                xm,
                zm,
                base,
            }
        }
        Gate::Controlled { controls, body } => {
            let (mut m, mut v) = (cmask, cval);
            for c in controls {
                let b = bit(nq, c.qubit);
                m |= b;
                if c.polarity {
                    v |= b;
                }
            }
            lower(nq, body, m, v)?
        }
        Gate::ToffoliCompute { c1, c2, target } | Gate::ToffoliUncompute { c1, c2, target } => {
            let body = Gate::Controlled {
                controls: vec![*c1, *c2],
                body: Box::new(Gate::x(*target)),
            };
            lower(nq, &body, cmask, cval)?
        }
        Gate::StatePrep { qubits, amplitudes } => Op::Dense {
            cmask,
            cval,
            bits: qubits.iter().map(|&q| bit(nq, q)).collect(),
            matrix: linalg::householder_completion(amplitudes),
        },
        Gate::StatePrepAdjoint { qubits, amplitudes } => Op::Dense {
            cmask,
            cval,
            bits: qubits.iter().map(|&q| bit(nq, q)).collect(),
            matrix: linalg::dagger(&linalg::householder_completion(amplitudes)),
        },
        Gate::Opaque {
            handle,
            qubits,
            matrix,
        } => {
            let m = matrix.as_ref().ok_or_else(|| Error::MissingMatrix {
                handle: handle.clone(),
            })?;
            Op::Dense {
                cmask,
                cval,
                bits: qubits.iter().map(|&q| bit(nq, q)).collect(),
                matrix: m.clone(),
            }
        }
    })
}

/// A circuit viewed as a channel on its system register, rescaled by `norm`.
#[derive(Debug, Clone)]
pub struct CircuitChannel {
    pub circuit: Circuit,
    pub postselect: Vec<RegisterName>,
    pub traceout: Vec<RegisterName>,
}

impl CircuitChannel {
    /// Postselects `be_anc` and `flat_anc`, traces `kraus_sel`.
    pub fn lcu(circuit: Circuit) -> Self {
        let mut postselect = Vec::new();
        let mut traceout = Vec::new();
        let r = circuit.registers;
        if r.be_anc > 0 {
            postselect.push(RegisterName::BeAnc);
        }
        if r.flat_anc > 0 {
            postselect.push(RegisterName::FlatAnc);
        }
        if r.kraus_sel > 0 {
            traceout.push(RegisterName::KrausSel);
        }
        CircuitChannel {
            circuit,
            postselect,
            traceout,
        }
    }
}

impl ChannelMap for CircuitChannel {
    fn arity(&self) -> usize {
        self.circuit.registers.system
    }

    fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        let (out, _) = self.circuit.run_channel(rho, &self.postselect, &self.traceout)?;
        Ok(out * Complex64::new(self.circuit.norm, 0.0))
    }
}
