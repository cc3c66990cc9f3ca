use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use krausc_core::circuit::Circuit;
use krausc_core::format::{self, Input};
use krausc_core::ir::{ChannelExpr, DEFAULT_SAMPLES};
use krausc_core::linalg;
use krausc_core::pipeline::{self, CompileOptions, Frontend, Reference, SweepAxis};
use krausc_core::{bench, rewrite};

#[derive(Parser)]
#[command(name = "krausc", version, about = "Compile open-system dynamics to channel-LCU circuits")]
struct Cli {
    /// Dense-simulation qubit cap (system plus ancillas).
    #[arg(long, global = true, env = "KRAUSC_CAP", default_value_t = linalg::DEFAULT_QUBIT_CAP)]
    cap: usize,
    /// Seed for generated benchmarks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lower, rewrite and synthesize; writes circuit.json and report.json.
    Compile {
        input: PathBuf,
        /// first | passthrough | order:K | order:K,K',q
        #[arg(long)]
        frontend: Option<Frontend>,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long)]
        flatten: bool,
        #[arg(long)]
        order: bool,
        #[arg(long)]
        minimize_rank: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare a circuit against a channel or against e^{δL} for a spec.
    Verify {
        circuit: PathBuf,
        reference: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Print the cost report of a circuit.
    Cost { circuit: PathBuf },
    /// Write a benchmark instance.
    Bench {
        family: Family,
        /// Sites (tfim), walk size (hypercube) or qubits (random-pauli).
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Term count (random-pauli).
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        nbar: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simplify a channel and print the rewrite trace with the result.
    Rewrite {
        input: PathBuf,
        #[arg(long)]
        minimize_rank: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of simulation error against δ or expansion order.
    ErrorSweep {
        spec: PathBuf,
        #[arg(long, default_value = "first")]
        frontend: Frontend,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
        /// Comma-separated orders K; uses --delta.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Decay,
    Tfim,
    RandomPauli,
    Hypercube,
}

fn read_input(path: &Path) -> Result<Input> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    format::parse_input(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let c: Circuit = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    c.validate()?;
    Ok(c)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    linalg::set_qubit_cap(cli.cap);
    match cli.cmd {
        Cmd::Compile {
            input,
            frontend,
            delta,
            flatten,
            order,
            minimize_rank,
            out,
        } => {
            let input = read_input(&input)?;
            let opts = CompileOptions {
                frontend,
                delta,
                flatten,
                order,
                minimize_rank,
            };
            let compiled = pipeline::compile(&input, &opts)?;
            write(&out.join("circuit.json"), &to_json(&compiled.circuit)?)?;
            write(&out.join("report.json"), &to_json(&compiled.report)?)?;
            println!("{}", serde_json::to_string(&compiled.report.cost)?);
        }
        Cmd::Verify {
            circuit,
            reference,
            delta,
            samples,
        } => {
            let circuit = read_circuit(&circuit)?;
            let reference = match read_input(&reference)? {
                Input::Channel(c) => Reference::Channel(c),
                Input::Spec(spec) => Reference::Spec { spec, delta },
            };
            let report = pipeline::verify(&circuit, &reference, samples)?;
            print!("{}", to_json(&report)?);
        }
        Cmd::Cost { circuit } => {
            let circuit = read_circuit(&circuit)?;
            print!("{}", to_json(&circuit.cost_report())?);
        }
        Cmd::Bench {
            family,
            n,
            m,
            gamma,
            nbar,
            out,
        } => {
            let (name, text) = match family {
                Family::Decay => (
                    format!("decay-g{gamma}-nbar{nbar}.json"),
                    to_json(&format::spec_to_json(&bench::gen_decay(gamma, nbar)?))?,
                ),
                Family::Tfim => (
                    format!("tfim-{n}-g{gamma}.json"),
                    to_json(&format::spec_to_json(&bench::gen_tfim(n, gamma)?))?,
                ),
                Family::RandomPauli => {
                    let k = bench::gen_random_pauli(n, m, cli.seed)?;
                    let ch = ChannelExpr::new(vec![k]);
                    (
                        format!("rndpauli-n{n}-m{m}-s{}.json", cli.seed),
                        to_json(&format::channel_to_json(&ch))?,
                    )
                }
                Family::Hypercube => (
                    format!("hypercube-like-{n}-s{}.json", cli.seed),
                    to_json(&format::channel_to_json(&bench::gen_hypercube_like(n, cli.seed)?))?,
                ),
            };
            let path = out.join(name);
            write(&path, &text)?;
            println!("{}", path.display());
        }
        Cmd::Rewrite {
            input,
            minimize_rank,
            out,
        } => {
            let Input::Channel(ch) = read_input(&input)? else {
                bail!("rewrite expects a channel JSON file");
            };
            let (result, trace) = rewrite::simplify(&ch, minimize_rank)?;
            #[derive(Serialize)]
            struct RewriteOut {
                trace: Vec<rewrite::TraceEntry>,
                channel: format::ChannelJson,
            }
            let text = to_json(&RewriteOut {
                trace,
                channel: format::channel_to_json(&result),
            })?;
            match out {
                Some(p) => write(&p, &text)?,
                None => print!("{text}"),
            }
        }
        Cmd::ErrorSweep {
            spec,
            frontend,
            deltas,
            orders,
            delta,
            samples,
            out,
        } => {
            let Input::Spec(spec) = read_input(&spec)? else {
                bail!("error-sweep expects a Lindblad spec JSON file");
            };
            let axis = match (deltas.is_empty(), orders.is_empty()) {
                (false, true) => SweepAxis::Delta(deltas),
                (true, false) => SweepAxis::Order { orders, delta },
                _ => bail!("give exactly one of --deltas or --orders"),
            };
            let csv = pipeline::error_sweep(&spec, frontend, &axis, samples)?;
            match out {
                Some(p) => write(&p, &csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
