//! Lowering Kraus operators to LCU block-encodings and channels to the
//! channel-LCU circuit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate, Registers};
use crate::error::{Error, Result};
use crate::ir::{ChannelExpr, KrausExpr, Primitive};
use crate::linalg::{self, ZERO};
use crate::pauli::PauliString;
use crate::select_optim::{self, address_controls, SelectPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectMode {
    #[default]
    Naive,
    Optimized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub beta: f64,
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

fn ceil_log2(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// PREPARE pair with `β·c_j*·d_j = y_j`; phases live in `d`.
pub fn prepare_pair(coeffs: &[Complex64]) -> Result<Prepared> {
    let beta: f64 = coeffs.iter().map(|y| y.norm()).sum();
    if beta == 0.0 || coeffs.is_empty() {
        return Err(Error::InvalidArgument("all PREPARE coefficients are zero".into()));
    }
    let dim = coeffs.len().next_power_of_two();
    let mut left = vec![ZERO; dim];
    let mut right = vec![ZERO; dim];
    for (j, y) in coeffs.iter().enumerate() {
        let mag = (y.norm() / beta).sqrt();
        left[j] = Complex64::new(mag, 0.0);
        right[j] = Complex64::from_polar(mag, y.arg());
    }
    Ok(Prepared { beta, left, right })
}

/// Multiplexor with full-polarity controls, one gate per term.
pub fn naive_select(
    terms: &[(PauliString, usize)],
    ctrl: &[usize],
    system_offset: usize,
) -> Result<Vec<Gate>> {
    let b = ctrl.len();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(terms.len());
    for (p, a) in terms {
        if a >> b != 0 {
            return Err(Error::InvalidArgument(format!("address {a} does not fit in {b} bits")));
        }
        if !seen.insert(*a) {
            return Err(Error::InvalidArgument(format!("address collision at {a}")));
        }
        out.push(Gate::controlled(
            address_controls(ctrl, *a),
            Gate::Pauli {
                pauli: *p,
                offset: system_offset,
            },
        ));
    }
    Ok(out)
}

/// A block-encoding circuit: registers `be_anc` then `system`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoded {
    pub circuit: Circuit,
    pub alpha: f64,
    pub plan: Option<SelectPlan>,
}

/// `Some(k)` when `z / |z| = i^k`.
fn power_of_i(z: Complex64) -> Option<u8> {
    let tol = 1e-14 * z.norm();
    if z.im.abs() <= tol {
        Some(if z.re > 0.0 { 0 } else { 2 })
    } else if z.re.abs() <= tol {
        Some(if z.im > 0.0 { 1 } else { 3 })
    } else {
        None
    }
}

fn wrap(anc: usize, n: usize, coeffs: &[Complex64], select: Vec<Gate>) -> Result<(Circuit, f64)> {
    let mut padded = coeffs.to_vec();
    padded.resize(padded.len().max(1 << anc), ZERO);
    let prep = prepare_pair(&padded)?;
    let mut c = Circuit::new(Registers {
        be_anc: anc,
        system: n,
        ..Default::default()
    });
    let qubits: Vec<usize> = (0..anc).collect();
    if anc > 0 {
        c.push(Gate::StatePrep {
            qubits: qubits.clone(),
            amplitudes: prep.right.clone(),
        });
    }
    c.gates.extend(select);
    if anc > 0 {
        c.push(Gate::StatePrepAdjoint {
            qubits,
            amplitudes: prep.left.clone(),
        });
    }
    c.norm = prep.beta * prep.beta;
    Ok((c, prep.beta))
}

/// Coefficient-only circuit for `y·P` without ancillas, if the phase allows.
fn single_term(n: usize, y: Complex64, p: PauliString) -> Option<(Circuit, f64)> {
    let k = power_of_i(y)?;
    let mut c = Circuit::new(Registers {
        system: n,
        ..Default::default()
    });
    let g = p.with_phase((p.phase_exp() + k) % 4);
    if !(g.is_identity() && g.phase_exp() == 0) {
        c.push(Gate::Pauli { pauli: g, offset: 0 });
    }
    let alpha = y.norm();
    c.norm = alpha * alpha;
    Some((c, alpha))
}

pub fn block_encode(k: &KrausExpr, mode: SelectMode) -> Result<BlockEncoded> {
    k.typecheck()?;
    let n = k.n;
    let canon = k.canonicalize();
    if canon.is_empty() {
        return Err(Error::InvalidArgument("cannot block-encode a zero Kraus operator".into()));
    }
    if canon.has_block_encoding() {
        return block_encode_opaque(&canon);
    }
    let terms: Vec<(Complex64, PauliString)> = canon
        .terms
        .iter()
        .map(|(c, prim)| match prim {
            Primitive::Pauli(p) => (*c, *p),
            Primitive::BlockEnc(_) => unreachable!("checked above"),
        })
        .collect();

    match mode {
        SelectMode::Naive => {
            if terms.len() == 1 {
                if let Some((circuit, alpha)) = single_term(n, terms[0].0, terms[0].1) {
                    return Ok(BlockEncoded {
                        circuit,
                        alpha,
                        plan: None,
                    });
                }
            }
            let b = ceil_log2(terms.len()).max(1);
            let ctrl: Vec<usize> = (0..b).collect();
            let addressed: Vec<(PauliString, usize)> = terms
                .iter()
                .enumerate()
                .filter(|(_, (_, p))| !p.is_identity())
                .map(|(j, (_, p))| (*p, j))
                .collect();
            let select = naive_select(&addressed, &ctrl, b)?;
            let coeffs: Vec<Complex64> = terms.iter().map(|(c, _)| *c).collect();
            let (circuit, alpha) = wrap(b, n, &coeffs, select)?;
            Ok(BlockEncoded {
                circuit,
                alpha,
                plan: None,
            })
        }
        SelectMode::Optimized => {
            let plan = select_optim::optimize_pauli_select(&terms)?;
            if plan.s == 0 {
                if let Some((circuit, alpha)) = single_term(n, plan.coeffs[0], PauliString::identity(n)) {
                    return Ok(BlockEncoded {
                        circuit,
                        alpha,
                        plan: Some(plan),
                    });
                }
            }
            let s = plan.s.max(1);
            let ctrl: Vec<usize> = (0..s).collect();
            let mut coeffs = plan.coeffs.clone();
            coeffs.resize(1 << s, ZERO);
            let select = if plan.multiplexed {
                select_optim::build_multiplexed_select(&plan.modes, &ctrl, s)
            } else {
                select_optim::build_monotone_select(&plan.gtable, &ctrl[s - plan.s..], s)
            };
            let (circuit, alpha) = wrap(s, n, &coeffs, select)?;
            Ok(BlockEncoded {
                circuit,
                alpha,
                plan: Some(plan),
            })
        }
    }
}

/// A single block-encoding reference, realized as a one-ancilla dilation
/// of `phase·A/α` so that the block is `c·A/(|c|α)`.
fn block_encode_opaque(k: &KrausExpr) -> Result<BlockEncoded> {
    let [(c, Primitive::BlockEnc(be))] = k.terms.as_slice() else {
        return Err(Error::InvalidArgument(
            "a Kraus operator with a block-encoding must consist of that single term".into(),
        ));
    };
    let n = k.n;
    let alpha = c.norm() * be.alpha;
    let matrix = match &be.matrix {
        Some(a) => {
            linalg::check_cap(n + 1)?;
            let phase = c / c.norm();
            Some(linalg::unitary_dilation(&(a * (phase / be.alpha))))
        }
        None => None,
    };
    let mut circuit = Circuit::new(Registers {
        be_anc: 1,
        system: n,
        ..Default::default()
    });
    circuit.push(Gate::Opaque {
        handle: be.handle.clone(),
        qubits: (0..=n).collect(),
        matrix,
    });
    circuit.norm = alpha * alpha;
    Ok(BlockEncoded {
        circuit,
        alpha,
        plan: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcuCircuit {
    pub circuit: Circuit,
    pub alphas: Vec<f64>,
    pub plans: Vec<Option<SelectPlan>>,
}

/// Channel-LCU: PREPAREC on the selector, then SELECTC over the Kraus
/// block-encodings. Tracing the selector and postselecting the ancillas
/// yields `(1/Σα_j²)·E(ρ)`.
pub fn channel_lcu(c: &ChannelExpr, mode: SelectMode, flatten: bool) -> Result<LcuCircuit> {
    c.typecheck()?;
    let n = c.n;
    let blocks: Vec<BlockEncoded> = c
        .kraus
        .iter()
        .map(|k| block_encode(k, mode))
        .collect::<Result<_>>()?;
    let m = blocks.len();
    let sel = ceil_log2(m);
    let anc = blocks.iter().map(|b| b.circuit.registers.be_anc).max().unwrap_or(0);
    let flat = if flatten && sel >= 2 { sel - 1 } else { 0 };
    let registers = Registers {
        kraus_sel: sel,
        be_anc: anc,
        flat_anc: flat,
        system: n,
    };
    let mut circuit = Circuit::new(registers);
    let sel_qubits: Vec<usize> = registers.qubits(crate::circuit::RegisterName::KrausSel).collect();
    let flag_qubits: Vec<usize> = registers.qubits(crate::circuit::RegisterName::FlatAnc).collect();
    let anc_off = registers.offset(crate::circuit::RegisterName::BeAnc);
    let sys_off = registers.offset(crate::circuit::RegisterName::System);

    let alphas: Vec<f64> = blocks.iter().map(|b| b.alpha).collect();
    let total: f64 = alphas.iter().map(|a| a * a).sum();
    if sel > 0 {
        let mut amps = vec![ZERO; 1 << sel];
        for (j, a) in alphas.iter().enumerate() {
            amps[j] = Complex64::new(a / total.sqrt(), 0.0);
        }
        circuit.push(Gate::StatePrep {
            qubits: sel_qubits.clone(),
            amplitudes: amps,
        });
    }

    let branches: Vec<(usize, Vec<Gate>)> = blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let w = b.circuit.registers.be_anc;
            let f = move |q: usize| if q < w { anc_off + q } else { sys_off + q - w };
            (j, b.circuit.gates.iter().map(|g| g.remap(&f)).collect())
        })
        .collect();
    if flatten {
        circuit
            .gates
            .extend(select_optim::flatten_select(&branches, &sel_qubits, &flag_qubits)?);
    } else {
        for (j, gates) in branches {
            let controls: Vec<Control> = address_controls(&sel_qubits, j);
            for g in gates {
                circuit.push(Gate::controlled(controls.clone(), g));
            }
        }
    }
    circuit.norm = total;
    Ok(LcuCircuit {
        circuit,
        alphas,
        plans: blocks.into_iter().map(|b| b.plan).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitChannel, RegisterName};
    use crate::ir::{apply_channel, channel_distance};
    use crate::pauli::PauliSum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prepare_pair_examples() {
        let p = prepare_pair(&[c(1.0, 0.0)]).unwrap();
        assert_eq!((p.beta, p.left.clone(), p.right.clone()), (1.0, vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]));
        let y = [c(0.5, 0.0), c(0.0, 0.5)];
        let p = prepare_pair(&y).unwrap();
        assert!((p.beta - 1.0).abs() < 1e-15);
        for (j, want) in y.iter().enumerate() {
            assert!((p.left[j].conj() * p.right[j] * p.beta - want).norm() < 1e-15);
        }
        let p = prepare_pair(&[c(3.0, 0.0), c(-4.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(p.left.len(), 4);
        assert!((p.beta - 7.0).abs() < 1e-15);
        assert!((p.left[0].norm_sqr() - 3.0 / 7.0).abs() < 1e-15);
        assert!(prepare_pair(&[ZERO]).is_err());
    }

    #[test]
    fn naive_select_shapes() {
        let x = PauliString::from_label("X", 0).unwrap();
        let iy = PauliString::from_label("Y", 1).unwrap();
        let g = naive_select(&[(x, 0), (iy, 1)], &[0], 1).unwrap();
        assert_eq!(g[0].controls(), vec![Control::off(0)]);
        assert_eq!(g[1].controls(), vec![Control::on(0)]);
        assert!(naive_select(&[(x, 0), (iy, 0)], &[0], 1).is_err());
    }

    fn check_block(sum: &PauliSum, mode: SelectMode) {
        let k = KrausExpr::from_pauli_sum(sum);
        let be = block_encode(&k, mode).unwrap();
        let block = be.circuit.extract_block().unwrap();
        let want = k.eval().unwrap() / Complex64::new(be.alpha, 0.0);
        assert!(linalg::max_abs_diff(&block, &want) < 1e-10, "{mode:?} {sum:?}");
    }

    #[test]
    fn block_encodings_match() {
        let sums = [
            PauliSum::from_labels(&[(c(1.0, 0.0), "X")]).unwrap(),
            PauliSum::from_labels(&[(c(0.3, 0.4), "Z")]).unwrap(),
            PauliSum::from_labels(&[(c(0.5, 0.0), "X"), (c(0.0, 0.5), "Y")]).unwrap(),
            PauliSum::from_labels(&[(c(0.2, 0.1), "II"), (c(0.0, -0.3), "XZ"), (c(0.7, 0.0), "YY")]).unwrap(),
            PauliSum::from_labels(&[(c(0.2, 0.1), "II")]).unwrap(),
        ];
        for s in &sums {
            check_block(s, SelectMode::Naive);
            check_block(s, SelectMode::Optimized);
        }
    }

    #[test]
    fn x_plus_iy_optimized_shape() {
        let s = PauliSum::from_labels(&[(c(0.5, 0.0), "X"), (c(0.0, 0.5), "Y")]).unwrap();
        let be = block_encode(&KrausExpr::from_pauli_sum(&s), SelectMode::Optimized).unwrap();
        let g = &be.circuit.gates;
        assert_eq!(g.len(), 4);
        assert!(matches!(&g[1], Gate::Pauli { pauli, .. } if pauli.label() == "X"));
        assert!(matches!(&g[2], Gate::Controlled { body, .. }
            if matches!(body.as_ref(), Gate::Pauli { pauli, .. } if pauli.label() == "Z")));
    }

    #[test]
    fn identity_channel_is_trivial() {
        let ch = ChannelExpr::identity(1);
        let lcu = channel_lcu(&ch, SelectMode::Naive, false).unwrap();
        assert!(lcu.circuit.gates.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = linalg::random_density(2, &mut rng);
        let (out, p) = lcu.circuit.run_channel(&rho, &[], &[]).unwrap();
        assert!(linalg::max_abs_diff(&out, &rho) < 1e-12);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_channel_lcu() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ch = ChannelExpr::from_pauli_sums(&[
            PauliSum::from_labels(&[(c(h, 0.0), "I")]).unwrap(),
            PauliSum::from_labels(&[(c(0.0, h), "Z")]).unwrap(),
            PauliSum::from_labels(&[(c(0.1, 0.0), "X"), (c(0.0, 0.1), "Y")]).unwrap(),
        ]);
        for flatten in [false, true] {
            let lcu = channel_lcu(&ch, SelectMode::Optimized, flatten).unwrap();
            let cc = CircuitChannel::lcu(lcu.circuit.clone());
            assert!(channel_distance(&cc, &ch, 8).unwrap() < 1e-10);
            let rho = linalg::basis_density(2, 0);
            let (_, p) = lcu
                .circuit
                .run_channel(&rho, &cc.postselect, &[RegisterName::KrausSel])
                .unwrap();
            let want = apply_channel(&ch, &rho).unwrap();
            assert!((p - linalg::trace(&want).re / lcu.circuit.norm).abs() < 1e-12);
        }
    }
}
