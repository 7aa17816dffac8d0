//! Command-line front end: every library operation behind one binary with
//! deterministic JSON envelopes (sorted keys, 17-significant-digit floats)
//! and optional CSV for tabular payloads.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use markov_infogeo::dual_geometry::{
    self, connection_coefficients, expectation_param, fisher_direct, fisher_hessian,
    theta_from_eta, Connection,
};
use markov_infogeo::exp_family::{ExpectationParam, NaturalParam};
use markov_infogeo::geodesy::{
    divergence, divergence_in_family, e_geodesic_point, empirical_edge_measure, fit_mle, kl_joint,
    m_geodesic_point,
};
use markov_infogeo::io as mio;
use markov_infogeo::verify::{self, VerifyConfig};
use markov_infogeo::{Error, MarkovKernel, Result};

#[derive(Parser)]
#[command(
    name = "markov-infogeo",
    version,
    about = "Information geometry of Markov kernels on strongly connected digraphs"
)]
struct Cli {
    /// Write the result envelope here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format; csv is available for tabular payloads.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizeMap {
    /// Perron-Frobenius normalization of a positive edge function.
    Gamma,
    /// Normalization of exp(f) for an arbitrary edge function.
    Delta,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    E,
    M,
}

#[derive(Args)]
struct ThetaArg {
    /// Comma-separated natural parameter vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an edge function into a Markov kernel.
    Normalize {
        #[arg(long, value_enum, default_value_t = NormalizeMap::Delta)]
        map: NormalizeMap,
        file: PathBuf,
    },
    /// Stationary distribution of a kernel.
    Stationary { file: PathBuf },
    /// Edge measure of a kernel.
    EdgeMeasure { file: PathBuf },
    /// Split an edge function into shift-invariant and potential parts.
    Decompose { file: PathBuf },
    /// Evaluate a family at theta: kernel, log partition, potential.
    EvalFamily {
        #[command(flatten)]
        theta: ThetaArg,
        family: PathBuf,
    },
    /// Fisher matrix by both routes, with their discrepancy.
    Fisher {
        #[command(flatten)]
        theta: ThetaArg,
        family: PathBuf,
    },
    /// Map theta to eta, or eta to theta (Newton).
    Coords {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Option<Vec<f64>>,
        /// Initial guess for the eta -> theta direction.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta0: Option<Vec<f64>>,
        family: PathBuf,
    },
    /// Connection coefficients at theta.
    Connection {
        #[command(flatten)]
        theta: ThetaArg,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Evaluate in expectation coordinates instead of natural ones.
        #[arg(long)]
        in_eta: bool,
        family: PathBuf,
    },
    /// Point of the e- or m-geodesic between two kernels.
    Geodesic {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        w0: PathBuf,
        w1: PathBuf,
    },
    /// KL divergence rate between two kernels.
    Divergence {
        w1: PathBuf,
        w2: PathBuf,
        /// Family for the Bregman cross-check.
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Exact KL between n-step joint laws.
    KlJoint {
        #[arg(long)]
        n: usize,
        w1: PathBuf,
        w2: PathBuf,
        /// Initial distribution for the first chain (default: stationary).
        #[arg(long)]
        q1: Option<PathBuf>,
        /// Initial distribution for the second chain (default: stationary).
        #[arg(long)]
        q2: Option<PathBuf>,
    },
    /// Fit a family to a trajectory or an edge measure by moment matching.
    Fit {
        family: PathBuf,
        #[arg(long, conflicts_with = "edge_measure")]
        trajectory: Option<PathBuf>,
        #[arg(long)]
        edge_measure: Option<PathBuf>,
    },
    /// Run the randomized invariant suite, or kernel checks on files.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,6")]
        sizes: Vec<usize>,
        /// Kernel files to check instead of random instances.
        kernels: Vec<PathBuf>,
    },
}

struct InputTracker {
    hashes: BTreeMap<String, String>,
}

impl InputTracker {
    fn new() -> Self {
        Self {
            hashes: BTreeMap::new(),
        }
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.hashes.insert(path.display().to_string(), hex);
        String::from_utf8(bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn kernel_payload(w: &MarkovKernel) -> Value {
    serde_json::to_value(mio::kernel_to_doc(w)).expect("kernel doc serializes")
}

fn potential_payload(graph: &markov_infogeo::KernelGraph, values: &[f64]) -> Value {
    json!({
        "states": graph.states(),
        "kappa": values,
    })
}

/// Rows for the csv form of tabular payloads.
enum Tabular {
    Edges(Vec<(String, String, f64)>),
    States(Vec<(String, f64)>),
    Matrix(Vec<Vec<f64>>),
    Reports(Vec<verify::CheckReport>),
}

/// Result payload, diagnostics, optional csv rows, and whether the run
/// counts as passed (only `verify` can say no).
struct Outcome {
    result: Value,
    diagnostics: Value,
    tabular: Option<Tabular>,
    passed: bool,
}

impl Outcome {
    fn ok(result: Value, diagnostics: Value, tabular: Option<Tabular>) -> Self {
        Self {
            result,
            diagnostics,
            tabular,
            passed: true,
        }
    }
}

fn run_command(cmd: &Command, tracker: &mut InputTracker) -> Result<Outcome> {
    match cmd {
        Command::Normalize { map, file } => {
            let f = mio::parse_edge_function(&tracker.read(file)?)?;
            let r = match map {
                NormalizeMap::Gamma => markov_infogeo::gamma_normalize(&f)?,
                NormalizeMap::Delta => markov_infogeo::delta_map(&f)?,
            };
            let graph = r.kernel.graph().clone();
            let result = json!({
                "kernel": kernel_payload(&r.kernel),
                "log_perron": r.log_perron,
                "potential": potential_payload(&graph, r.potential.values()),
            });
            let diag = json!({
                "iterations": r.stats.iterations,
                "residual": r.stats.residual,
            });
            let tab = Tabular::Edges(edge_rows(&r.kernel));
            Ok(Outcome::ok(result, diag, Some(tab)))
        }
        Command::Stationary { file } => {
            let w = mio::parse_kernel(&tracker.read(file)?)?;
            let p = w.stationary_distribution()?;
            let result = json!({
                "states": w.graph().states(),
                "p": p.probs(),
            });
            let rows = w
                .graph()
                .states()
                .iter()
                .zip(p.probs())
                .map(|(s, &v)| (s.clone(), v))
                .collect();
            Ok(Outcome::ok(result, Value::Null, Some(Tabular::States(rows))))
        }
        Command::EdgeMeasure { file } => {
            let w = mio::parse_kernel(&tracker.read(file)?)?;
            let m = w.edge_measure()?;
            let result = serde_json::to_value(mio::edge_measure_to_doc(&m))?;
            let rows = m
                .graph()
                .edges()
                .iter()
                .zip(m.probs())
                .map(|(&(a, b), &v)| {
                    (
                        m.graph().state_name(a).to_string(),
                        m.graph().state_name(b).to_string(),
                        v,
                    )
                })
                .collect();
            Ok(Outcome::ok(result, Value::Null, Some(Tabular::Edges(rows))))
        }
        Command::Decompose { file } => {
            let f = mio::parse_edge_function(&tracker.read(file)?)?;
            let d = f.decompose();
            let g = f.graph().clone();
            let result = json!({
                "shift_part": serde_json::to_value(mio::edge_function_to_doc(&d.shift_part))?,
                "anti_part": serde_json::to_value(mio::edge_function_to_doc(&d.anti_part))?,
                "potential": potential_payload(&g, d.potential.values()),
            });
            Ok(Outcome::ok(result, Value::Null, None))
        }
        Command::EvalFamily { theta, family } => {
            let fam = mio::parse_family(&tracker.read(family)?)?;
            let point = fam.kernel_at(&NaturalParam(theta.theta.clone()))?;
            let graph = point.kernel.graph().clone();
            let result = json!({
                "theta": theta.theta,
                "kernel": kernel_payload(&point.kernel),
                "psi": point.psi,
                "kappa": potential_payload(&graph, point.kappa.values()),
            });
            let tab = Tabular::Edges(edge_rows(&point.kernel));
            Ok(Outcome::ok(result, Value::Null, Some(tab)))
        }
        Command::Fisher { theta, family } => {
            let fam = mio::parse_family(&tracker.read(family)?)?;
            let t = NaturalParam(theta.theta.clone());
            let a = fisher_direct(&fam, &t)?;
            let b = fisher_hessian(&fam, &t)?;
            let result = json!({
                "theta": theta.theta,
                "direct": a.to_rows(),
                "hessian": b.to_rows(),
                "discrepancy": a.max_abs_diff(&b),
                "min_eigenvalue": a.min_eigenvalue(),
            });
            let tab = Tabular::Matrix(a.to_rows());
            Ok(Outcome::ok(result, Value::Null, Some(tab)))
        }
        Command::Coords {
            theta,
            eta,
            theta0,
            family,
        } => {
            let fam = mio::parse_family(&tracker.read(family)?)?;
            match (theta, eta) {
                (Some(t), None) => {
                    let tp = NaturalParam(t.clone());
                    let e = expectation_param(&fam, &tp)?;
                    let result = json!({"theta": t, "eta": e.as_slice()});
                    Ok(Outcome::ok(result, Value::Null, None))
                }
                (None, Some(e)) => {
                    let guess = theta0.clone().map(NaturalParam);
                    let solve =
                        theta_from_eta(&fam, &ExpectationParam(e.clone()), guess.as_ref())?;
                    let result = json!({"theta": solve.theta.0, "eta": e});
                    let diag = json!({
                        "iterations": solve.iterations,
                        "residual": solve.residual,
                    });
                    Ok(Outcome::ok(result, diag, None))
                }
                _ => Err(Error::InvalidDistribution(
                    "pass exactly one of --theta or --eta".into(),
                )),
            }
        }
        Command::Connection {
            theta,
            kind,
            in_eta,
            family,
        } => {
            let fam = mio::parse_family(&tracker.read(family)?)?;
            let t = NaturalParam(theta.theta.clone());
            let which = match kind {
                Kind::E => Connection::Exponential,
                Kind::M => Connection::Mixture,
            };
            let c = if *in_eta {
                dual_geometry::connection_coefficients_in_eta(&fam, &t, which)?
            } else {
                connection_coefficients(&fam, &t, which)?
            };
            let d = c.dim();
            let mut coeffs = Vec::with_capacity(d * d * d);
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        coeffs.push(json!({"i": i, "j": j, "k": k, "v": c.get(i, j, k)}));
                    }
                }
            }
            let result = json!({
                "theta": theta.theta,
                "coordinates": if *in_eta { "eta" } else { "theta" },
                "max_abs": c.max_abs(),
                "coefficients": coeffs,
            });
            Ok(Outcome::ok(result, Value::Null, None))
        }
        Command::Geodesic { kind, t, w0, w1 } => {
            let a = mio::parse_kernel(&tracker.read(w0)?)?;
            let b = mio::parse_kernel(&tracker.read(w1)?)?;
            let point = match kind {
                Kind::E => e_geodesic_point(&a, &b, *t)?,
                Kind::M => m_geodesic_point(&a, &b, *t)?,
            };
            let result = json!({
                "t": t,
                "kernel": kernel_payload(&point),
            });
            let tab = Tabular::Edges(edge_rows(&point));
            Ok(Outcome::ok(result, Value::Null, Some(tab)))
        }
        Command::Divergence { w1, w2, family } => {
            let a = mio::parse_kernel(&tracker.read(w1)?)?;
            let b = mio::parse_kernel(&tracker.read(w2)?)?;
            let report = match family {
                Some(path) => {
                    let fam = mio::parse_family(&tracker.read(path)?)?;
                    divergence_in_family(&a, &b, &fam)?
                }
                None => divergence(&a, &b)?,
            };
            let result = json!({
                "value": report.value,
                "bregman": report.bregman,
                "residual": report.residual,
            });
            Ok(Outcome::ok(result, Value::Null, None))
        }
        Command::KlJoint { n, w1, w2, q1, q2 } => {
            let a = mio::parse_kernel(&tracker.read(w1)?)?;
            let b = mio::parse_kernel(&tracker.read(w2)?)?;
            let qa = match q1 {
                Some(p) => mio::distribution_from_doc(
                    serde_json::from_str(&tracker.read(p)?).map_err(Error::from)?,
                    a.graph(),
                )?,
                None => a.stationary_distribution()?,
            };
            let qb = match q2 {
                Some(p) => mio::distribution_from_doc(
                    serde_json::from_str(&tracker.read(p)?).map_err(Error::from)?,
                    b.graph(),
                )?,
                None => b.stationary_distribution()?,
            };
            let value = kl_joint(&a, &b, &qa, &qb, *n)?;
            let rate = divergence(&a, &b)?.value;
            let result = json!({
                "n": n,
                "value": value,
                "per_step": value / *n as f64,
                "rate": rate,
            });
            Ok(Outcome::ok(result, Value::Null, None))
        }
        Command::Fit {
            family,
            trajectory,
            edge_measure,
        } => {
            let fam = mio::parse_family(&tracker.read(family)?)?;
            let target = match (trajectory, edge_measure) {
                (Some(path), None) => {
                    let traj = mio::parse_trajectory(&tracker.read(path)?, fam.graph())?;
                    empirical_edge_measure(fam.graph(), &traj)?
                }
                (None, Some(path)) => mio::parse_edge_measure(&tracker.read(path)?)?,
                _ => {
                    return Err(Error::InvalidDistribution(
                        "pass exactly one of --trajectory or --edge-measure".into(),
                    ))
                }
            };
            let fit = fit_mle(&fam, &target)?;
            let eta = fam.moments(&target)?;
            let fitted = fam.kernel_at(&fit.theta)?;
            let result = json!({
                "theta": fit.theta.0,
                "eta": eta.as_slice(),
                "kernel": kernel_payload(&fitted.kernel),
                "psi": fitted.psi,
            });
            let diag = json!({
                "iterations": fit.iterations,
                "residual": fit.residual,
            });
            Ok(Outcome::ok(result, diag, None))
        }
        Command::Verify {
            seed,
            sizes,
            kernels,
        } => {
            let reports = if kernels.is_empty() {
                let cfg = VerifyConfig {
                    seed: *seed,
                    sizes: sizes.clone(),
                };
                verify::run_all(&cfg)?
            } else {
                let mut all = Vec::new();
                for path in kernels {
                    let w = mio::parse_kernel(&tracker.read(path)?)?;
                    all.extend(verify::check_kernel(&w)?);
                }
                all
            };
            let passed = verify::overall_pass(&reports);
            let result = json!({
                "seed": seed,
                "sizes": sizes,
                "passed": passed,
                "reports": serde_json::to_value(&reports)?,
            });
            Ok(Outcome {
                result,
                diagnostics: Value::Null,
                tabular: Some(Tabular::Reports(reports)),
                passed,
            })
        }
    }
}

fn edge_rows(w: &MarkovKernel) -> Vec<(String, String, f64)> {
    let g = w.graph();
    g.edges()
        .iter()
        .zip(w.probs())
        .map(|(&(a, b), &p)| (g.state_name(a).to_string(), g.state_name(b).to_string(), p))
        .collect()
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Normalize { .. } => "normalize",
        Command::Stationary { .. } => "stationary",
        Command::EdgeMeasure { .. } => "edge-measure",
        Command::Decompose { .. } => "decompose",
        Command::EvalFamily { .. } => "eval-family",
        Command::Fisher { .. } => "fisher",
        Command::Coords { .. } => "coords",
        Command::Connection { .. } => "connection",
        Command::Geodesic { .. } => "geodesic",
        Command::Divergence { .. } => "divergence",
        Command::KlJoint { .. } => "kl-joint",
        Command::Fit { .. } => "fit",
        Command::Verify { .. } => "verify",
    }
}

fn csv_text(tab: &Tabular) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    match tab {
        Tabular::Edges(rows) => {
            wtr.write_record(["from", "to", "p"]).map_err(csv_err)?;
            for (a, b, p) in rows {
                wtr.write_record([a.as_str(), b.as_str(), &mio::format_g17(*p)])
                    .map_err(csv_err)?;
            }
        }
        Tabular::States(rows) => {
            wtr.write_record(["state", "p"]).map_err(csv_err)?;
            for (s, p) in rows {
                wtr.write_record([s.as_str(), &mio::format_g17(*p)])
                    .map_err(csv_err)?;
            }
        }
        Tabular::Matrix(rows) => {
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&v| mio::format_g17(v)).collect();
                wtr.write_record(&cells).map_err(csv_err)?;
            }
        }
        Tabular::Reports(reports) => {
            wtr.write_record(["name", "cases", "max_residual", "tolerance", "passed"])
                .map_err(csv_err)?;
            for r in reports {
                wtr.write_record([
                    r.name.as_str(),
                    &r.cases.to_string(),
                    &mio::format_g17(r.max_residual),
                    &mio::format_g17(r.tolerance),
                    &r.passed.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv emits utf-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Error::Io(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut tracker = InputTracker::new();
    let name = subcommand_name(&cli.command);
    match run_command(&cli.command, &mut tracker) {
        Ok(outcome) => {
            let text = if cli.format == Format::Csv {
                match &outcome.tabular {
                    Some(tab) => match csv_text(tab) {
                        Ok(t) => t,
                        Err(e) => return fail(name, &tracker, e),
                    },
                    None => {
                        return fail(
                            name,
                            &tracker,
                            Error::Io(format!("no csv form for the {name} payload")),
                        )
                    }
                }
            } else {
                let envelope = json!({
                    "subcommand": name,
                    "inputs": tracker.hashes,
                    "result": outcome.result,
                    "diagnostics": outcome.diagnostics,
                });
                match mio::to_json(&envelope) {
                    Ok(t) => t,
                    Err(e) => return fail(name, &tracker, e),
                }
            };
            if let Err(e) = emit(&text, &cli.output) {
                return fail(name, &tracker, e);
            }
            // timing goes to stderr so stdout stays byte-identical across runs
            eprintln!("wall_ms={}", started.elapsed().as_millis());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(name, &tracker, e),
    }
}

fn fail(name: &str, tracker: &InputTracker, e: Error) -> ExitCode {
    let envelope = json!({
        "error": {
            "code": e.code(),
            "message": e.to_string(),
            "context": {
                "subcommand": name,
                "inputs": tracker.hashes,
            },
        },
    });
    match mio::to_json(&envelope) {
        Ok(text) => println!("{text}"),
        Err(_) => println!("{{\"error\":{{\"code\":\"{}\"}}}}", e.code()),
    }
    ExitCode::from(1)
}
