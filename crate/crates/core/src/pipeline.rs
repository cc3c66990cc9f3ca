//! End-to-end compile, verify and sweep drivers behind the CLI.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::circuit::{Circuit, CircuitChannel, CostReport, Registers};
use crate::error::{Error, Result};
use crate::format::Input;
use crate::ir::{probe_states, ChannelExpr, ChannelMap, LindbladSpec, DISTANCE_SEED};
use crate::linalg;
use crate::lindfront::{self, QuadratureSpec};
use crate::rewrite::{self, TraceEntry};
use crate::synthesis::{self, SelectMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frontend {
    First,
    Order(QuadratureSpec),
    Passthrough,
}

impl FromStr for Frontend {
    type Err = Error;

    /// `first`, `passthrough`, `order:K` or `order:K,K',q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown frontend `{s}`"));
        match s {
            "first" => Ok(Frontend::First),
            "passthrough" | "channel" => Ok(Frontend::Passthrough),
            _ => {
                let rest = s.strip_prefix("order").ok_or_else(bad)?;
                let rest = rest.strip_prefix(':').unwrap_or(rest);
                let nums: Vec<usize> = if rest.is_empty() {
                    vec![1]
                } else {
                    rest.split(',')
                        .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
                        .collect::<Result<_>>()?
                };
                let q = match nums.as_slice() {
                    [k] => QuadratureSpec::for_order(*k)?,
                    [k, kp, q] => QuadratureSpec::new(*k, *kp, *q)?,
                    _ => return Err(bad()),
                };
                Ok(Frontend::Order(q))
            }
        }
    }
}

impl std::fmt::Display for Frontend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frontend::First => write!(f, "first"),
            Frontend::Passthrough => write!(f, "passthrough"),
            Frontend::Order(q) => write!(f, "order:{},{},{}", q.order, q.taylor_order, q.nodes),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    /// `None` picks `first` for specs and `passthrough` for channels.
    pub frontend: Option<Frontend>,
    pub delta: f64,
    pub flatten: bool,
    pub order: bool,
    pub minimize_rank: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            frontend: None,
            delta: 0.01,
            flatten: false,
            order: false,
            minimize_rank: false,
        }
    }
}

pub fn setting_name(flatten: bool, order: bool) -> String {
    format!(
        "{}+{}",
        if flatten { "flat" } else { "basic" },
        if order { "order" } else { "basic" }
    )
}

fn mode(order: bool) -> SelectMode {
    if order {
        SelectMode::Optimized
    } else {
        SelectMode::Naive
    }
}

/// Lowers an input to a channel. A zero time step gives the identity.
pub fn lower(input: &Input, frontend: Option<Frontend>, delta: f64) -> Result<ChannelExpr> {
    match (input, frontend) {
        (Input::Channel(c), None | Some(Frontend::Passthrough)) => {
            c.typecheck()?;
            Ok(c.clone())
        }
        (Input::Channel(_), Some(f)) => Err(Error::InvalidArgument(format!(
            "frontend `{f}` needs a Lindblad spec, got a channel"
        ))),
        (Input::Spec(_), Some(Frontend::Passthrough)) => Err(Error::InvalidArgument(
            "passthrough frontend needs a channel, got a Lindblad spec".into(),
        )),
        (Input::Spec(s), _) if delta == 0.0 => Ok(ChannelExpr::identity(s.n)),
        (Input::Spec(s), None | Some(Frontend::First)) => lindfront::first_order(s, delta),
        (Input::Spec(s), Some(Frontend::Order(q))) => lindfront::higher_order(s, delta, q),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub address: String,
    pub target: String,
    pub phase_exp: u8,
    pub g: Option<String>,
    pub theta: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectAudit {
    pub kraus: usize,
    pub s: usize,
    pub weighted_cost: usize,
    pub multiplexed: bool,
    pub modes: Vec<ModeRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub input: String,
    pub frontend: String,
    pub delta: Option<f64>,
    pub setting: String,
    pub n: usize,
    pub lowered_kraus: usize,
    pub lowered_terms: usize,
    pub kraus: usize,
    pub terms: usize,
    pub rewrite_trace: Vec<TraceEntry>,
    pub alphas: Vec<f64>,
    pub lcu_norm: f64,
    /// `1/Σα_j²`: the postselection success probability for a
    /// trace-preserving channel.
    pub success_probability: f64,
    pub registers: Registers,
    pub cost: CostReport,
    pub costs_by_setting: BTreeMap<String, CostReport>,
    pub select_audit: Option<Vec<SelectAudit>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub channel: ChannelExpr,
    pub circuit: Circuit,
    pub report: Report,
}

pub fn compile(input: &Input, opts: &CompileOptions) -> Result<Compiled> {
    let lowered = lower(input, opts.frontend, opts.delta)?;
    let (channel, trace) = rewrite::simplify(&lowered, opts.minimize_rank)?;
    let lcu = synthesis::channel_lcu(&channel, mode(opts.order), opts.flatten)?;

    let mut costs_by_setting = BTreeMap::new();
    for flatten in [false, true] {
        for order in [false, true] {
            let cost = if (flatten, order) == (opts.flatten, opts.order) {
                lcu.circuit.cost_report()
            } else {
                synthesis::channel_lcu(&channel, mode(order), flatten)?
                    .circuit
                    .cost_report()
            };
            costs_by_setting.insert(setting_name(flatten, order), cost);
        }
    }

    let select_audit = opts.order.then(|| {
        lcu.plans
            .iter()
            .enumerate()
            .filter_map(|(j, plan)| plan.as_ref().map(|p| (j, p)))
            .map(|(j, plan)| SelectAudit {
                kraus: j,
                s: plan.s,
                weighted_cost: plan.weighted_cost,
                multiplexed: plan.multiplexed,
                modes: plan
                    .modes
                    .entries
                    .iter()
                    .map(|(&a, (target, phase))| {
                        let g = plan.gtable.entries.get(&a);
                        ModeRow {
                            address: format!("{a:0width$b}", width = plan.s.max(1)),
                            target: target.label(),
                            phase_exp: *phase,
                            g: g.map(|(g, _)| g.label()),
                            theta: g.map_or(0, |(_, t)| *t),
                        }
                    })
                    .collect(),
            })
            .collect()
    });

    let (kind, frontend, delta) = match input {
        Input::Channel(_) => ("channel", Frontend::Passthrough, None),
        Input::Spec(_) => ("lindblad", opts.frontend.unwrap_or(Frontend::First), Some(opts.delta)),
    };
    let report = Report {
        input: kind.into(),
        frontend: frontend.to_string(),
        delta,
        setting: setting_name(opts.flatten, opts.order),
        n: channel.n,
        lowered_kraus: lowered.kraus.len(),
        lowered_terms: lowered.total_terms(),
        kraus: channel.kraus.len(),
        terms: channel.total_terms(),
        rewrite_trace: trace,
        alphas: lcu.alphas.clone(),
        lcu_norm: lcu.circuit.norm,
        success_probability: 1.0 / lcu.circuit.norm,
        registers: lcu.circuit.registers,
        cost: lcu.circuit.cost_report(),
        costs_by_setting,
        select_audit,
    };
    Ok(Compiled {
        channel,
        circuit: lcu.circuit,
        report,
    })
}

/// What a compiled circuit is checked against.
#[derive(Debug, Clone)]
pub enum Reference {
    Channel(ChannelExpr),
    /// Exact propagator `e^{δL}`.
    Spec { spec: LindbladSpec, delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub max_trace_distance: f64,
    /// `5(δ‖L‖)²`, for spec references.
    pub bound: Option<f64>,
    pub probes: usize,
    pub success_prob_min: f64,
    pub success_prob_max: f64,
    pub success_prob_mean: f64,
}

pub fn verify(circuit: &Circuit, reference: &Reference, samples: usize) -> Result<VerifyReport> {
    linalg::check_cap(circuit.total_qubits())?;
    let cc = CircuitChannel::lcu(circuit.clone());
    let (target, bound): (Box<dyn ChannelMap>, Option<f64>) = match reference {
        Reference::Channel(c) => (Box::new(c.to_dense()?), None),
        Reference::Spec { spec, delta } => {
            let l = lindfront::lindblad_opnorm(spec)?;
            (
                Box::new(lindfront::exact_propagator(spec, *delta)?),
                Some(5.0 * (delta * l).powi(2)),
            )
        }
    };
    if target.arity() != cc.arity() {
        return Err(Error::ArityMismatch {
            context: "verification reference".into(),
            expected: cc.arity(),
            found: target.arity(),
        });
    }
    let probes = probe_states(cc.arity(), samples, DISTANCE_SEED);
    let mut worst = 0.0f64;
    let (mut pmin, mut pmax, mut psum) = (f64::INFINITY, 0.0f64, 0.0);
    for rho in &probes {
        let (out, p) = circuit.run_channel(rho, &cc.postselect, &cc.traceout)?;
        let out = out * num_complex::Complex64::new(circuit.norm, 0.0);
        worst = worst.max(linalg::trace_distance(&out, &target.apply(rho)?));
        pmin = pmin.min(p);
        pmax = pmax.max(p);
        psum += p;
    }
    Ok(VerifyReport {
        max_trace_distance: worst,
        bound,
        probes: probes.len(),
        success_prob_min: pmin,
        success_prob_max: pmax,
        success_prob_mean: psum / probes.len() as f64,
    })
}

/// Trace-distance error of the compiled circuit against `e^{δL}`.
pub fn sweep_point(spec: &LindbladSpec, frontend: Frontend, delta: f64, samples: usize) -> Result<f64> {
    let input = Input::Spec(spec.clone());
    let channel = lower(&input, Some(frontend), delta)?;
    let lcu = synthesis::channel_lcu(&channel, SelectMode::Naive, false)?;
    let v = verify(
        &lcu.circuit,
        &Reference::Spec {
            spec: spec.clone(),
            delta,
        },
        samples,
    )?;
    Ok(v.max_trace_distance)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Delta(Vec<f64>),
    Order { orders: Vec<usize>, delta: f64 },
}

/// CSV of error against the swept parameter.
pub fn error_sweep(spec: &LindbladSpec, frontend: Frontend, axis: &SweepAxis, samples: usize) -> Result<String> {
    let l = lindfront::lindblad_opnorm(spec)?;
    let mut out = String::new();
    match axis {
        SweepAxis::Delta(deltas) => {
            out.push_str("delta,error,bound\n");
            for &d in deltas {
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(Error::InvalidArgument(format!("bad time step {d}")));
                }
                let e = sweep_point(spec, frontend, d, samples)?;
                let _ = writeln!(out, "{d},{e:.6e},{:.6e}", 5.0 * (d * l).powi(2));
            }
        }
        SweepAxis::Order { orders, delta } => {
            out.push_str("order,delta,error\n");
            for &k in orders {
                let f = Frontend::Order(QuadratureSpec::for_order(k)?);
                let e = sweep_point(spec, f, *delta, samples)?;
                let _ = writeln!(out, "{k},{delta},{e:.6e}");
            }
        }
    }
    Ok(out)
}
