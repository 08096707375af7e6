//! Command-line driver and the random-graph experiment harness.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::cyclecert::{search_cycle_cert, verify_cycle_cert, CycleCertJson, CycleCertificate};
use crate::encodings::{encode_coloring, encode_maxcut_membership, encode_stable_set, parse_dimacs, random_graph, Graph};
use crate::error::{Error, Result};
use crate::fields::Field;
use crate::fpnulla::{fpnulla_run_with, FpnullaOptions, FpnullaStatus};
use crate::nulla::{certificate_residual, nulla_run_with, NullCertJson, NullCertificate, NullaOptions, NullaStatus, PolySystem};
use crate::polys::Polynomial;
use crate::possatz::{
    psatz_search, sos_check, theta1_optimize, verify_psatz, PsatzCertJson, PsatzCertificate, PsatzStatus, RealSystem, RealSystemJson,
    SosOutcome, CERT_TOL,
};
use crate::recover;
use crate::sdpcore::SdpOptions;

pub const CSV_SCHEMA: &str = "# polycert experiment csv v1";
/// Row insertions allowed per fixed-point run in the harness. Runs cut short
/// count as unproven.
pub const HARNESS_BUDGET: u64 = 200_000;
/// Largest graph the exact colouring oracle accepts.
pub const ORACLE_MAX_N: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "polycert", version, about = "Feasibility decisions and certificates for polynomial systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SdpFlags {
    #[arg(long = "tol-gap", default_value_t = 1e-8)]
    pub tol_gap: f64,
    #[arg(long = "tol-feas", default_value_t = 1e-8)]
    pub tol_feas: f64,
}

impl SdpFlags {
    fn options(&self) -> SdpOptions {
        SdpOptions { gap_tol: self.tol_gap, feas_tol: self.tol_feas, ..SdpOptions::default() }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    Coloring,
    StableSet,
    Maxcut,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    #[value(name = "nulla-d1")]
    NullaD1,
    #[value(name = "fpnulla-d1")]
    FpnullaD1,
    #[value(name = "exact-oracle")]
    ExactOracle,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::NullaD1 => "NULLA_D1",
            Method::FpnullaD1 => "FPNULLA_D1",
            Method::ExactOracle => "EXACT_ORACLE",
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Encode a graph problem as a polynomial system.
    Encode {
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Problem::Coloring)]
        problem: Problem,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value = "f2")]
        field: String,
        /// Vertex whose colour is fixed to 1.
        #[arg(long)]
        anchor: Option<usize>,
        #[arg(long, default_value_t = 9)]
        cycle_cap: usize,
    },
    /// Search for a Nullstellensatz certificate degree by degree.
    Nulla {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long = "max-degree")]
        max_degree: Option<u32>,
    },
    /// Fixed-point variant: decide or count solutions.
    Fpnulla {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long = "max-degree")]
        max_degree: Option<u32>,
    },
    /// Decide and list all solutions of a zero-dimensional system.
    Solve {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long = "max-degree")]
        max_degree: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify a certificate file.
    CheckCert {
        cert: PathBuf,
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Search for an oriented-cycle certificate of non-3-colourability.
    CycleCert {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Bounded-degree Positivstellensatz search.
    Psatz {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long = "max-degree", default_value_t = 2)]
        max_degree: u32,
        #[command(flatten)]
        sdp: SdpFlags,
    },
    /// Sum-of-squares test for one polynomial.
    SosCheck {
        /// Polynomial text, e.g. "x^2 - 2*x*y + y^2".
        #[arg(long)]
        poly: Option<String>,
        /// Comma-separated variable names.
        #[arg(long)]
        vars: Option<String>,
        /// JSON file with "variables" and "polynomial".
        #[arg(long)]
        system: Option<PathBuf>,
        #[command(flatten)]
        sdp: SdpFlags,
    },
    /// First theta body of the stable-set ideal.
    Theta1 {
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Comma-separated vertex weights.
        #[arg(long)]
        weights: Option<String>,
        #[command(flatten)]
        sdp: SdpFlags,
    },
    /// Degree-one infeasibility rates on random graphs.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Grid as start:stop:step or a comma list.
    #[arg(long, default_value = "0.05:0.20:0.01")]
    pub p: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::NullaD1, Method::FpnullaD1, Method::ExactOracle])]
    pub methods: Vec<Method>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
    /// Check dominance and soundness of the fractions; exit 1 on violation.
    #[arg(long = "assert-dominance")]
    pub assert_dominance: bool,
    /// Check an existing CSV instead of running.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Completed command: text for standard output and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn done(v: Json, decided: bool) -> Result<Outcome> {
    Ok(Outcome { stdout: serde_json::to_string_pretty(&v).expect("serializable") + "\n", code: if decided { 0 } else { 2 } })
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn read_graph(path: Option<&Path>) -> Result<Graph> {
    parse_dimacs(&read_input(path)?)
}

fn read_system(path: Option<&Path>) -> Result<PolySystem> {
    PolySystem::from_json_str(&read_input(path)?)
}

fn read_real_system(path: Option<&Path>) -> Result<RealSystem> {
    let j: RealSystemJson = serde_json::from_str(&read_input(path)?).map_err(|e| Error::Parse(e.to_string()))?;
    RealSystem::from_json(&j)
}

fn to_json<T: Serialize>(t: &T) -> Json {
    serde_json::to_value(t).expect("serializable")
}

pub fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Encode { graph, problem, k, field, anchor, cycle_cap } => {
            let g = read_graph(graph.as_deref())?;
            let sys = match problem {
                Problem::Coloring => encode_coloring(&g, k, &Field::parse_flag(&field)?, anchor)?,
                Problem::StableSet => encode_stable_set(&g, k)?,
                Problem::Maxcut => encode_maxcut_membership(&g, cycle_cap)?,
            };
            Ok(Outcome { stdout: sys.to_json_string() + "\n", code: 0 })
        }
        Command::Nulla { system, max_degree } => {
            let sys = read_system(system.as_deref())?;
            let bound = max_degree.unwrap_or_else(|| crate::nulla::default_bound(&sys));
            let o = nulla_run_with(&sys, bound, NullaOptions::default())?;
            let cert = o.certificate.as_ref().map(|c| to_json(&c.to_json(&sys.field)));
            done(json!({"status": o.status, "nulla_degree": o.nulla_degree, "bound": o.bound, "certificate": cert}), o.status == NullaStatus::Infeasible)
        }
        Command::Fpnulla { system, max_degree } => {
            let sys = read_system(system.as_deref())?;
            let bound = max_degree.unwrap_or_else(|| crate::fpnulla::default_bound(&sys));
            let o = fpnulla_run_with(&sys, bound, FpnullaOptions::default())?;
            let cert = o.certificate.as_ref().map(|c| to_json(&c.to_json(&sys.field)));
            done(
                json!({
                    "status": o.status,
                    "solution_count": o.solution_count,
                    "counts_multiplicity": o.counts_multiplicity,
                    "degree": o.degree,
                    "fpnulla_degree": o.fpnulla_degree,
                    "certificate": cert,
                }),
                o.status != FpnullaStatus::BoundReached,
            )
        }
        Command::Solve { system, max_degree, seed } => {
            let sys = read_system(system.as_deref())?;
            let bound = max_degree.unwrap_or_else(|| crate::fpnulla::default_bound(&sys));
            match recover::solve(&sys, bound, seed) {
                Ok(Some(rs)) => {
                    let status = if rs.roots.is_empty() { "INFEASIBLE" } else { "SOLVED" };
                    let rs = rs.minimal()?;
                    done(json!({"status": status, "count": rs.roots.len(), "extension": rs.field.spec(), "roots": rs.sorted()}), true)
                }
                Ok(None) => done(json!({"status": "BOUND_REACHED"}), false),
                Err(e @ (Error::FailDegenerate | Error::RootOutsideExtension | Error::ReductionEscape(_))) => {
                    eprintln!("polycert: {e}");
                    done(json!({"status": recover_status(&e), "message": e.to_string()}), false)
                }
                Err(e) => Err(e),
            }
        }
        Command::CheckCert { cert, system, graph } => check_cert(&cert, system.as_deref(), graph.as_deref()),
        Command::CycleCert { graph } => {
            let g = read_graph(graph.as_deref())?;
            match search_cycle_cert(&g)? {
                Some(c) => done(to_json(&c.to_json()), true),
                None => done(json!({"status": "NOT_FOUND"}), false),
            }
        }
        Command::Psatz { system, max_degree, sdp } => {
            let sys = read_real_system(system.as_deref())?;
            if sys.ineqs.len() >= 4 {
                eprintln!("polycert: warning: {} inequalities give {} product blocks", sys.ineqs.len(), 1u64 << sys.ineqs.len());
            }
            let o = psatz_search(&sys, max_degree, &sdp.options())?;
            let best = o.exact.as_ref().or(o.certificate.as_ref());
            done(
                json!({
                    "status": o.status,
                    "degree": o.degree,
                    "check": o.check,
                    "certificate": best.map(|c| to_json(&c.to_json())),
                }),
                o.status == PsatzStatus::Found,
            )
        }
        Command::SosCheck { poly, vars, system, sdp } => {
            let p = read_sos_input(poly, vars, system.as_deref())?;
            sos_json(&p, &sdp.options())
        }
        Command::Theta1 { graph, weights, sdp } => {
            let g = read_graph(graph.as_deref())?;
            let w = weights
                .map(|s| s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("weight '{t}': {e}")))).collect::<Result<Vec<_>>>())
                .transpose()?;
            let r = theta1_optimize(&g, w.as_deref(), &sdp.options())?;
            let m: Vec<Vec<f64>> = (0..r.matrix.nrows()).map(|i| r.matrix.row(i).iter().copied().collect()).collect();
            done(json!({"value": r.value, "matrix": m}), true)
        }
        Command::Experiment(a) => experiment_command(&a),
    }
}

fn recover_status(e: &Error) -> &'static str {
    match e {
        Error::FailDegenerate => "FAIL_DEGENERATE",
        Error::RootOutsideExtension => "ROOT_OUTSIDE_EXTENSION",
        _ => "INDETERMINATE",
    }
}

fn read_sos_input(poly: Option<String>, vars: Option<String>, system: Option<&Path>) -> Result<Polynomial> {
    let (names, text) = match (poly, system) {
        (Some(p), None) => {
            let names: Vec<String> = vars
                .ok_or_else(|| Error::InvalidArgument("--poly needs --vars".into()))?
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            (names, p)
        }
        (None, path) => {
            let j: Json = serde_json::from_str(&read_input(path)?).map_err(|e| Error::Parse(e.to_string()))?;
            let names = j["variables"]
                .as_array()
                .ok_or_else(|| Error::Parse("missing \"variables\"".into()))?
                .iter()
                .map(|v| v.as_str().map(String::from).ok_or_else(|| Error::Parse("variable names must be strings".into())))
                .collect::<Result<Vec<_>>>()?;
            let text = j["polynomial"].as_str().ok_or_else(|| Error::Parse("missing \"polynomial\"".into()))?.to_string();
            (names, text)
        }
        (Some(_), Some(_)) => return Err(Error::InvalidArgument("give either --poly or --system".into())),
    };
    Polynomial::parse(&Field::rational(), &names, &text)
}

fn sos_json(p: &Polynomial, opts: &SdpOptions) -> Result<Outcome> {
    let mono = |m: &crate::polys::Monomial| m.exponents().to_vec();
    match sos_check(p, None, opts)? {
        SosOutcome::Sos(g) => {
            let q: Vec<Vec<f64>> = (0..g.q.nrows()).map(|i| g.q.row(i).iter().copied().collect()).collect();
            done(
                json!({
                    "status": "SOS",
                    "basis": g.basis.iter().map(mono).collect::<Vec<_>>(),
                    "Q": q,
                    "min_eig": g.min_eig,
                    "residual": g.residual,
                    "squares": g.squares,
                    "square_residual": g.square_residual,
                }),
                true,
            )
        }
        SosOutcome::NotSos { basis, best_margin, functional } => done(
            json!({
                "status": "NOT_SOS",
                "basis": basis.iter().map(mono).collect::<Vec<_>>(),
                "margin": if best_margin.is_finite() { Some(best_margin) } else { None },
                "functional": functional.iter().map(|(m, v)| json!({"monomial": mono(m), "value": v})).collect::<Vec<_>>(),
            }),
            true,
        ),
        SosOutcome::Indeterminate(msg) => done(json!({"status": "INDETERMINATE", "message": msg}), false),
    }
}

fn check_cert(cert: &Path, system: Option<&Path>, graph: Option<&Path>) -> Result<Outcome> {
    let text = std::fs::read_to_string(cert)?;
    let j: Json = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = j.get("type").and_then(|t| t.as_str()).unwrap_or("").to_string();
    let kind = kind.as_str();
    match kind {
        "nullstellensatz" => {
            let sys = read_system(system)?;
            let cj: NullCertJson = serde_json::from_value(j).map_err(|e| Error::Parse(e.to_string()))?;
            let c = NullCertificate::from_json(&cj, sys.nvars())?;
            if c.multipliers.first().is_some_and(|b| b.field() != &sys.field) {
                return Err(Error::FieldMismatch);
            }
            let r = certificate_residual(&sys, &c)?;
            if !r.is_zero() {
                return Err(Error::InvalidCertificate("identity residual nonzero".into()));
            }
            done(json!({"valid": true, "type": kind, "degree": c.degree()}), true)
        }
        "positivstellensatz" => {
            let sys = read_real_system(system)?;
            let cj: PsatzCertJson = serde_json::from_value(j).map_err(|e| Error::Parse(e.to_string()))?;
            let c = PsatzCertificate::from_json(&cj, sys.nvars())?;
            let chk = verify_psatz(&sys, &c)?;
            if chk.residual > CERT_TOL || (c.rationalized && chk.residual != 0.0) {
                return Err(Error::InvalidCertificate(format!("identity residual nonzero ({:.3e})", chk.residual)));
            }
            if !chk.passes(CERT_TOL) {
                return Err(Error::InvalidCertificate(format!("Gram block not positive semidefinite (min eigenvalue {:.3e})", chk.min_eig)));
            }
            done(json!({"valid": true, "type": kind, "exact": chk.exact, "residual": chk.residual, "min_eig": chk.min_eig}), true)
        }
        "cycle3color" => {
            let g = read_graph(graph.or(system))?;
            let cj: CycleCertJson = serde_json::from_value(j).map_err(|e| Error::Parse(e.to_string()))?;
            let c = CycleCertificate::from_json(&cj)?;
            let r = verify_cycle_cert(&g, &c.cycles)?;
            if !r.valid() {
                return Err(Error::InvalidCertificate(format!(
                    "cycle conditions fail (even cover: {}, odd orientation count: {})",
                    r.condition1, r.condition2
                )));
            }
            done(json!({"valid": true, "type": kind, "cycles": c.cycles.len()}), true)
        }
        other => Err(Error::Parse(format!("unknown certificate type '{other}'"))),
    }
}

/// One experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub n: usize,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

/// Aggregated row of the experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub p: f64,
    pub method: Method,
    pub trials: usize,
    pub proven: usize,
    pub fraction: f64,
    pub mean_runtime_ms: f64,
}

/// Per-trial seed, independent of scheduling.
pub fn cell_seed(seed: u64, p_index: usize, trial: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((p_index as u64).to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("eight bytes"))
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |m: &str| Error::InvalidArgument(format!("p grid '{s}': {m}"));
    let grid: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|t| t.trim().parse::<f64>().map_err(|e| bad(&e.to_string()))).collect::<Result<_>>()?;
        if parts.len() != 3 || parts[2] <= 0.0 || parts[1] < parts[0] {
            return Err(bad("expected start:stop:step with a positive step"));
        }
        let count = ((parts[1] - parts[0]) / parts[2] + 1e-9).floor() as usize + 1;
        // Round to the step's decimals so grid labels are stable.
        (0..count).map(|i| ((parts[0] + i as f64 * parts[2]) * 1e9).round() / 1e9).collect()
    } else {
        s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| bad(&e.to_string()))).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(bad("probabilities must lie in [0, 1]"));
    }
    Ok(grid)
}

/// The 3-colouring system used by the harness: F_2 coefficients, vertex 0
/// anchored when present.
pub fn harness_system(g: &Graph) -> Result<PolySystem> {
    encode_coloring(g, 3, &Field::f2(), if g.n() > 0 { Some(0) } else { None })
}

/// Whether `m` proves the graph non-3-colourable.
pub fn proves_infeasible(m: Method, g: &Graph) -> Result<bool> {
    match m {
        Method::ExactOracle => {
            if g.n() > ORACLE_MAX_N {
                return Err(Error::InvalidArgument(format!("the colouring oracle handles at most {ORACLE_MAX_N} vertices")));
            }
            Ok(!g.is_k_colorable(3))
        }
        Method::NullaD1 => {
            let sys = harness_system(g)?;
            Ok(nulla_run_with(&sys, 1, NullaOptions { certificate: false })?.status == NullaStatus::Infeasible)
        }
        Method::FpnullaD1 => {
            let sys = harness_system(g)?;
            // The closure at degree deg+1 contains every degree-one multiple
            // of the generators, so that layer is checked first.
            if nulla_run_with(&sys, 1, NullaOptions { certificate: false })?.status == NullaStatus::Infeasible {
                return Ok(true);
            }
            let opts = FpnullaOptions { certificate: false, budget: Some(HARNESS_BUDGET) };
            Ok(fpnulla_run_with(&sys, sys.degree() + 1, opts)?.status == FpnullaStatus::Infeasible)
        }
    }
}

/// Raw per-trial verdicts, ordered by (p index, trial, method).
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<Vec<Vec<(bool, f64)>>>> {
    if spec.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if spec.methods.contains(&Method::ExactOracle) && spec.n > ORACLE_MAX_N {
        return Err(Error::InvalidArgument(format!("the colouring oracle handles at most {ORACLE_MAX_N} vertices")));
    }
    let cells: Vec<(usize, usize)> = (0..spec.grid.len()).flat_map(|pi| (0..spec.trials).map(move |t| (pi, t))).collect();
    let results: Vec<Result<Vec<(bool, f64)>>> = cells
        .par_iter()
        .map(|&(pi, t)| {
            let g = random_graph(spec.n, spec.grid[pi], cell_seed(spec.seed, pi, t))?;
            spec.methods
                .iter()
                .map(|&m| {
                    let start = Instant::now();
                    let v = proves_infeasible(m, &g)?;
                    Ok((v, start.elapsed().as_secs_f64() * 1e3))
                })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(spec.trials); spec.grid.len()];
    for ((pi, _), r) in cells.into_iter().zip(results) {
        out[pi].push(r?);
    }
    Ok(out)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRow>> {
    let raw = run_trials(spec)?;
    let mut rows = Vec::new();
    for (pi, trials) in raw.iter().enumerate() {
        for (mi, &m) in spec.methods.iter().enumerate() {
            let proven = trials.iter().filter(|t| t[mi].0).count();
            let ms: f64 = trials.iter().map(|t| t[mi].1).sum::<f64>() / trials.len() as f64;
            rows.push(ExperimentRow { p: spec.grid[pi], method: m, trials: trials.len(), proven, fraction: proven as f64 / trials.len() as f64, mean_runtime_ms: ms });
        }
    }
    Ok(rows)
}

/// CSV text. Without timings the runtime column reads `NA`, making the
/// output a pure function of the spec.
pub fn rows_to_csv(spec: &ExperimentSpec, rows: &[ExperimentRow], timings: bool) -> String {
    let mut s = String::new();
    s.push_str(CSV_SCHEMA);
    s.push('\n');
    if timings {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let _ = writeln!(s, "# generated unix={secs}");
    }
    let _ = writeln!(s, "# n={} trials={} seed={} field=F2 k=3", spec.n, spec.trials, spec.seed);
    s.push_str("p,method,trials,proven_infeasible,fraction,mean_runtime_ms\n");
    for r in rows {
        let rt = if timings { format!("{:.3}", r.mean_runtime_ms) } else { "NA".into() };
        let _ = writeln!(s, "{},{},{},{},{:.4},{}", fmt_p(r.p), r.method.label(), r.trials, r.proven, r.fraction, rt);
    }
    s
}

fn fmt_p(p: f64) -> String {
    let t = format!("{p:.6}");
    let t = t.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

/// Parses the data rows back into (p, method label, fraction).
pub fn parse_csv(text: &str) -> Result<Vec<(f64, String, f64)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if !header.starts_with("p,method,") {
        return Err(Error::Parse(format!("unexpected CSV header '{header}'")));
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Parse(format!("bad CSV row '{l}'")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
            Ok((num(f[0])?, f[1].to_string(), num(f[4])?))
        })
        .collect()
}

/// Violations of dominance (FPNulLA at least NulLA) and soundness (both at
/// most the oracle), plus non-monotone oracle steps as warnings.
pub fn dominance_report(rows: &[(f64, String, f64)]) -> (Vec<String>, Vec<String>) {
    let mut ps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    ps.dedup();
    let get = |p: f64, m: &str| rows.iter().find(|r| r.0 == p && r.1 == m).map(|r| r.2);
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let mut prev_oracle: Option<f64> = None;
    for &p in &ps {
        let (nl, fp, or) = (get(p, "NULLA_D1"), get(p, "FPNULLA_D1"), get(p, "EXACT_ORACLE"));
        if let (Some(a), Some(b)) = (nl, fp) {
            if b < a {
                errors.push(format!("p={}: FPNULLA_D1 {b} < NULLA_D1 {a}", fmt_p(p)));
            }
        }
        if let Some(o) = or {
            for (name, v) in [("NULLA_D1", nl), ("FPNULLA_D1", fp)] {
                if let Some(v) = v {
                    if v > o {
                        errors.push(format!("p={}: {name} {v} exceeds EXACT_ORACLE {o}", fmt_p(p)));
                    }
                }
            }
            if let Some(po) = prev_oracle {
                if o < po {
                    warnings.push(format!("p={}: EXACT_ORACLE fraction decreased from {po} to {o}", fmt_p(p)));
                }
            }
            prev_oracle = Some(o);
        }
    }
    (errors, warnings)
}

fn experiment_command(a: &ExperimentArgs) -> Result<Outcome> {
    if let Some(path) = &a.input {
        let rows = parse_csv(&std::fs::read_to_string(path)?)?;
        return assert_rows(&rows, String::new());
    }
    let spec = ExperimentSpec { n: a.n, grid: parse_grid(&a.p)?, trials: a.trials, seed: a.seed, methods: a.methods.clone() };
    let rows = match a.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(|| run_experiment(&spec))?,
        None => run_experiment(&spec)?,
    };
    let text = match a.format {
        Format::Csv => rows_to_csv(&spec, &rows, !a.no_timestamp),
        Format::Json => {
            let rows: Vec<Json> = rows
                .iter()
                .map(|r| {
                    let mut v = to_json(r);
                    if a.no_timestamp {
                        v["mean_runtime_ms"] = Json::Null;
                    }
                    v
                })
                .collect();
            serde_json::to_string_pretty(&json!({"schema": 1, "n": spec.n, "trials": spec.trials, "seed": spec.seed, "rows": rows})).expect("serializable") + "\n"
        }
    };
    let stdout = match &a.output {
        Some(path) => {
            std::fs::write(path, &text)?;
            String::new()
        }
        None => text,
    };
    if a.assert_dominance {
        let parsed: Vec<(f64, String, f64)> = rows.iter().map(|r| (r.p, r.method.label().to_string(), r.fraction)).collect();
        return assert_rows(&parsed, stdout);
    }
    Ok(Outcome { stdout, code: 0 })
}

fn assert_rows(rows: &[(f64, String, f64)], stdout: String) -> Result<Outcome> {
    let (errors, warnings) = dominance_report(rows);
    for w in &warnings {
        eprintln!("polycert: warning: {w}");
    }
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("polycert: {e}");
        }
        return Ok(Outcome { stdout, code: 1 });
    }
    Ok(Outcome { stdout, code: 0 })
}

/// Entry point used by the binary: prints results and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(&args) {
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
        Ok(cli) => match execute(cli.command) {
            Ok(o) => {
                print!("{}", o.stdout);
                o.code
            }
            Err(e) => {
                eprintln!("polycert: {e}");
                1
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.05:0.20:0.01").unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g[15], 0.2);
        assert_eq!(parse_grid("0,1").unwrap(), vec![0.0, 1.0]);
        assert!(parse_grid("0.5:0.1:0.1").is_err());
        assert!(parse_grid("1.5").is_err());
    }

    #[test]
    fn seeds_depend_on_cell() {
        assert_ne!(cell_seed(7, 0, 1), cell_seed(7, 1, 0));
        assert_eq!(cell_seed(7, 3, 4), cell_seed(7, 3, 4));
    }

    #[test]
    fn extremes() {
        let all = vec![Method::NullaD1, Method::FpnullaD1, Method::ExactOracle];
        let dense = ExperimentSpec { n: 10, grid: vec![1.0], trials: 5, seed: 1, methods: all.clone() };
        for r in run_experiment(&dense).unwrap() {
            assert_eq!(r.fraction, 1.0, "{:?}", r.method);
        }
        let sparse = ExperimentSpec { n: 10, grid: vec![0.0], trials: 5, seed: 1, methods: all };
        for r in run_experiment(&sparse).unwrap() {
            assert_eq!(r.fraction, 0.0, "{:?}", r.method);
        }
    }

    #[test]
    fn dominance_checks() {
        let rows = vec![(0.1, "NULLA_D1".to_string(), 0.2), (0.1, "FPNULLA_D1".to_string(), 0.1), (0.1, "EXACT_ORACLE".to_string(), 0.3)];
        let (e, _) = dominance_report(&rows);
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn csv_round_trip() {
        let spec = ExperimentSpec { n: 6, grid: vec![0.5], trials: 3, seed: 2, methods: vec![Method::ExactOracle] };
        let rows = run_experiment(&spec).unwrap();
        let a = rows_to_csv(&spec, &rows, false);
        let b = rows_to_csv(&spec, &run_experiment(&spec).unwrap(), false);
        assert_eq!(a, b);
        assert_eq!(parse_csv(&a).unwrap().len(), 1);
    }
}
