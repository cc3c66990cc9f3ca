//! JSON wire formats.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::CMatrix;

/// Dense matrices as row-major nested arrays of `[re, im]` pairs.
pub mod matrix {
    use super::*;

    pub fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> std::result::Result<CMatrix, String> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMatrix::from_fn(nr, nc, |r, c| rows[r][c]))
    }

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub mod opt_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix::to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMatrix>, D::Error> {
        let rows = Option::<Vec<Vec<Complex64>>>::deserialize(d)?;
        rows.map(|r| matrix::from_rows(&r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

use base64::Engine;

use crate::error::Error;
type Result<T> = std::result::Result<T, Error>;
use crate::ir::{BlockEncoding, ChannelExpr, KrausExpr, LindbladSpec, Primitive};
use crate::pauli::{PauliString, PauliSum};

/// `{"coeff": [re, im], "pauli": "XIZ", "phase_exp": 0}`, or a reference to
/// a user block-encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermJson {
    Pauli {
        coeff: Complex64,
        pauli: String,
        #[serde(default)]
        phase_exp: u8,
    },
    BlockEncoding {
        coeff: Complex64,
        handle: String,
        alpha: f64,
        #[serde(default)]
        anc: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Vec<Vec<Complex64>>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub n: usize,
    pub kraus: Vec<Vec<TermJson>>,
}

/// A jump operator: Pauli terms, a nested-array matrix, or base64 of
/// little-endian `f64` pairs `(re, im)` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JumpJson {
    Terms(Vec<TermJson>),
    Matrix { matrix: Vec<Vec<Complex64>> },
    MatrixB64 { matrix_b64: String, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladJson {
    pub n: usize,
    #[serde(rename = "H")]
    pub hamiltonian: Vec<TermJson>,
    pub jumps: Vec<JumpJson>,
}

pub fn pauli_term(c: Complex64, p: &PauliString) -> TermJson {
    TermJson::Pauli {
        coeff: c,
        pauli: p.label(),
        phase_exp: p.phase_exp(),
    }
}

fn sum_to_json(s: &PauliSum) -> Vec<TermJson> {
    s.terms().iter().map(|(c, p)| pauli_term(*c, p)).collect()
}

fn sum_from_json(n: usize, terms: &[TermJson], what: &str) -> Result<PauliSum> {
    let mut out = PauliSum::zero(n);
    for t in terms {
        match t {
            TermJson::Pauli {
                coeff,
                pauli,
                phase_exp,
            } => {
                let p = PauliString::from_label(pauli, *phase_exp)?;
                if p.n() != n {
                    return Err(Error::ArityMismatch {
                        context: format!("term `{pauli}` in {what}"),
                        expected: n,
                        found: p.n(),
                    });
                }
                out.push(*coeff, p)?;
            }
            TermJson::BlockEncoding { handle, .. } => {
                return Err(Error::Format(format!(
                    "{what} must be a Pauli sum, found block-encoding `{handle}`"
                )))
            }
        }
    }
    Ok(out)
}

pub fn channel_to_json(c: &ChannelExpr) -> ChannelJson {
    ChannelJson {
        n: c.n,
        kraus: c
            .kraus
            .iter()
            .map(|k| {
                k.terms
                    .iter()
                    .map(|(c, prim)| match prim {
                        Primitive::Pauli(p) => pauli_term(*c, p),
                        Primitive::BlockEnc(b) => TermJson::BlockEncoding {
                            coeff: *c,
                            handle: b.handle.clone(),
                            alpha: b.alpha,
                            anc: b.anc,
                            matrix: b.matrix.as_ref().map(matrix::to_rows),
                        },
                    })
                    .collect()
            })
            .collect(),
    }
}

pub fn channel_from_json(j: &ChannelJson) -> Result<ChannelExpr> {
    let mut kraus = Vec::with_capacity(j.kraus.len());
    for (idx, terms) in j.kraus.iter().enumerate() {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                TermJson::Pauli {
                    coeff,
                    pauli,
                    phase_exp,
                } => out.push((*coeff, Primitive::Pauli(PauliString::from_label(pauli, *phase_exp)?))),
                TermJson::BlockEncoding {
                    coeff,
                    handle,
                    alpha,
                    anc,
                    matrix: m,
                } => {
                    let m = m
                        .as_ref()
                        .map(|rows| matrix::from_rows(rows).map_err(Error::Format))
                        .transpose()?;
                    let be = BlockEncoding::new(handle.clone(), j.n, *alpha, *anc, m)?;
                    out.push((*coeff, Primitive::BlockEnc(be)));
                }
            }
        }
        let k = KrausExpr::new(j.n, out);
        k.typecheck().map_err(|e| match e {
            Error::ArityMismatch {
                context,
                expected,
                found,
            } => Error::ArityMismatch {
                context: format!("Kraus operator {idx}: {context}"),
                expected,
                found,
            },
            other => other,
        })?;
        kraus.push(k);
    }
    let c = ChannelExpr { n: j.n, kraus };
    c.typecheck()?;
    Ok(c)
}

pub fn spec_to_json(s: &LindbladSpec) -> LindbladJson {
    LindbladJson {
        n: s.n,
        hamiltonian: sum_to_json(&s.hamiltonian),
        jumps: s.jumps.iter().map(|l| JumpJson::Terms(sum_to_json(l))).collect(),
    }
}

pub fn decode_matrix_b64(data: &str, dim: usize) -> Result<CMatrix> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(data.trim())
        .map_err(|e| Error::Format(format!("bad base64 matrix: {e}")))?;
    if bytes.len() != dim * dim * 16 {
        return Err(Error::Format(format!(
            "base64 matrix has {} bytes, expected {} for dimension {dim}",
            bytes.len(),
            dim * dim * 16
        )));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        let k = 2 * (r * dim + c);
        Complex64::new(f(k), f(k + 1))
    }))
}

pub fn encode_matrix_b64(m: &CMatrix) -> String {
    let mut bytes = Vec::with_capacity(m.nrows() * m.ncols() * 16);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            bytes.extend_from_slice(&m[(r, c)].re.to_le_bytes());
            bytes.extend_from_slice(&m[(r, c)].im.to_le_bytes());
        }
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn dense_jump(n: usize, m: CMatrix, j: usize) -> Result<PauliSum> {
    let dim = 1usize << n;
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "jump operator {j} is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    PauliSum::from_matrix(&m)
}

pub fn spec_from_json(j: &LindbladJson) -> Result<LindbladSpec> {
    let h = sum_from_json(j.n, &j.hamiltonian, "Hamiltonian")?;
    let mut jumps = Vec::with_capacity(j.jumps.len());
    for (idx, l) in j.jumps.iter().enumerate() {
        let sum = match l {
            JumpJson::Terms(t) => sum_from_json(j.n, t, &format!("jump operator {idx}"))?,
            JumpJson::Matrix { matrix: rows } => {
                dense_jump(j.n, matrix::from_rows(rows).map_err(Error::Format)?, idx)?
            }
            JumpJson::MatrixB64 { matrix_b64, dim } => {
                dense_jump(j.n, decode_matrix_b64(matrix_b64, *dim)?, idx)?
            }
        };
        jumps.push(sum);
    }
    LindbladSpec::new(h, jumps)
}

/// A parsed input file.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Spec(LindbladSpec),
    Channel(ChannelExpr),
}

pub fn parse_input(text: &str) -> Result<Input> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid JSON: {e}")))?;
    if v.get("kraus").is_some() {
        let j: ChannelJson =
            serde_json::from_value(v).map_err(|e| Error::Format(format!("channel JSON: {e}")))?;
        Ok(Input::Channel(channel_from_json(&j)?))
    } else if v.get("H").is_some() || v.get("jumps").is_some() {
        let j: LindbladJson =
            serde_json::from_value(v).map_err(|e| Error::Format(format!("Lindblad JSON: {e}")))?;
        Ok(Input::Spec(spec_from_json(&j)?))
    } else {
        Err(Error::Format(
            "expected a channel (`kraus`) or a Lindblad spec (`H`, `jumps`)".into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn channel_round_trip() {
        let ch = bench::gen_hypercube_like(4, 3).unwrap();
        let text = serde_json::to_string(&channel_to_json(&ch)).unwrap();
        match parse_input(&text).unwrap() {
            Input::Channel(back) => assert_eq!(back, ch),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_round_trip_and_dense_jumps() {
        let spec = bench::gen_tfim(3, 0.5).unwrap();
        let text = serde_json::to_string(&spec_to_json(&spec)).unwrap();
        assert_eq!(parse_input(&text).unwrap(), Input::Spec(spec));

        let decay = bench::gen_decay(1.0, 1.0).unwrap();
        let m = decay.jumps[0].to_matrix().unwrap();
        let j = LindbladJson {
            n: 1,
            hamiltonian: vec![],
            jumps: vec![
                JumpJson::Matrix {
                    matrix: matrix::to_rows(&m),
                },
                JumpJson::MatrixB64 {
                    matrix_b64: encode_matrix_b64(&m),
                    dim: 2,
                },
            ],
        };
        let text = serde_json::to_string(&j).unwrap();
        let Input::Spec(back) = parse_input(&text).unwrap() else {
            panic!()
        };
        for l in &back.jumps {
            let diff = (l.to_matrix().unwrap() - &m).norm();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(parse_input("{"), Err(Error::Format(_))));
        assert!(matches!(parse_input("{\"x\":1}"), Err(Error::Format(_))));
        let bad = r#"{"n":2,"kraus":[[{"coeff":[1,0],"pauli":"XYZ"}]]}"#;
        assert!(matches!(parse_input(bad), Err(Error::ArityMismatch { .. })));
    }
}
