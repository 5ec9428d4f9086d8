//! Command-line front door for the six-vertex solvers: parameter parsing,
//! query files, machine-readable result envelopes, and the verification
//! suite runner.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error,
//! 3 numerical-accuracy error. Every JSON envelope carries `schema: 1`,
//! echoes the exact parameters used, and reports wall time.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use icekernel::kasteleyn::partition_kasteleyn;
use icekernel::kernel::{correlation, correlation_detail, frequency, QuadratureConfig};
use icekernel::lattice::{TorusSize, Vertex};
use icekernel::sixvertex::{partition_enumerate, weights_from_params, FreeFermionParams, VertexType};
use icekernel::verify::{all_passed, run_suite, Suite};
use icekernel::Error;

const SCHEMA_VERSION: u32 = 1;

/// Exact partition functions, correlations, and vertex-type frequencies
/// for the six-vertex model in the free-fermion regime.
#[derive(Parser)]
#[command(name = "icekernel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition function of the n-torus.
    Partition {
        /// Torus side length.
        #[arg(long)]
        n: i64,
        /// Horizontal step weight α.
        #[arg(long)]
        alpha: f64,
        /// Vertical step weight β.
        #[arg(long)]
        beta: f64,
        /// Corner step weight γ.
        #[arg(long)]
        gamma: f64,
        /// Computation route.
        #[arg(long, value_enum, default_value_t = Method::Kasteleyn)]
        method: Method,
    },
    /// Infinite-volume vertex-type probabilities from a query file.
    Correlate {
        /// Query file: `key = value` lines for alpha/beta/gamma (and
        /// optional grid/rel_tol), then one or more `[constraints]`
        /// blocks of `v1 v2 type` triples.
        query: PathBuf,
        /// Override the starting quadrature grid (power of two).
        #[arg(long)]
        grid: Option<usize>,
        /// Override the quadrature relative tolerance.
        #[arg(long)]
        rel_tol: Option<f64>,
    },
    /// The six infinite-volume vertex-type frequencies.
    Frequencies {
        /// Horizontal step weight α.
        #[arg(long)]
        alpha: f64,
        /// Vertical step weight β.
        #[arg(long)]
        beta: f64,
        /// Corner step weight γ.
        #[arg(long)]
        gamma: f64,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Override the starting quadrature grid (power of two).
        #[arg(long)]
        grid: Option<usize>,
        /// Override the quadrature relative tolerance.
        #[arg(long)]
        rel_tol: Option<f64>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Sampling depth.
        #[arg(long, value_enum, default_value_t = SuiteArg::Small)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Enum,
    Kasteleyn,
    Both,
}

impl Method {
    fn label(self) -> &'static str {
        match self {
            Method::Enum => "enum",
            Method::Kasteleyn => "kasteleyn",
            Method::Both => "both",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Small,
    Full,
}

/// A terminal failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::AccuracyLoss(_)
            | Error::QuadratureFailure(_)
            | Error::SingularMatrix { .. }
            | Error::SingularSpectralPoint { .. } => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Serialize)]
struct Envelope {
    schema: u32,
    command: &'static str,
    parameters: Value,
    results: Value,
    diagnostics: Value,
    wall_time_ms: f64,
}

fn emit(envelope: &Envelope) {
    println!("{}", serde_json::to_string_pretty(envelope).expect("envelope serializes"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let raw = match std::env::var("ICEKERNEL_THREADS") {
        Ok(raw) => raw,
        Err(_) => return Ok(()),
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::input(format!("ICEKERNEL_THREADS must be a positive integer, got {raw:?}")))?;
    icekernel::set_worker_threads(threads)?;
    Ok(())
}

fn dispatch(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Partition { n, alpha, beta, gamma, method } => {
            cmd_partition(n, alpha, beta, gamma, method)
        }
        Command::Correlate { query, grid, rel_tol } => cmd_correlate(&query, grid, rel_tol),
        Command::Frequencies { alpha, beta, gamma, format, grid, rel_tol } => {
            cmd_frequencies(alpha, beta, gamma, format, grid, rel_tol)
        }
        Command::Verify { suite } => cmd_verify(suite),
    }
}

/// Builds the effective quadrature config from the default plus overrides.
fn quadrature_from(grid: Option<usize>, rel_tol: Option<f64>) -> Result<QuadratureConfig, Failure> {
    let d = QuadratureConfig::default();
    let initial = grid.unwrap_or_else(|| d.initial_grid());
    let max = d.max_grid().max(initial);
    Ok(QuadratureConfig::new(initial, max, rel_tol.unwrap_or_else(|| d.rel_tol()), d.min_abs_delta_guard())?)
}

fn quadrature_echo(q: &QuadratureConfig) -> Value {
    json!({
        "initial_grid": q.initial_grid(),
        "max_grid": q.max_grid(),
        "rel_tol": q.rel_tol(),
        "min_abs_delta_guard": q.min_abs_delta_guard(),
    })
}

fn cmd_partition(
    n: i64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    method: Method,
) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let params = FreeFermionParams::new(alpha, beta, gamma)?;
    let size = TorusSize::new(n)?;
    if matches!(method, Method::Enum | Method::Both) && n > 3 {
        return Err(Failure::input(format!(
            "method {} enumerates every configuration and needs n ≤ 3, got n = {n}",
            method.label()
        )));
    }
    let mut results = Map::new();
    let mut diagnostics = Map::new();
    match method {
        Method::Enum => {
            let z = partition_enumerate(size, weights_from_params(params))?;
            results.insert("partition_enum".into(), json!(z));
        }
        Method::Kasteleyn => {
            let z = partition_kasteleyn(size, params)?;
            results.insert("partition_kasteleyn".into(), json!(z));
        }
        Method::Both => {
            let z_enum = partition_enumerate(size, weights_from_params(params))?;
            let z_det = partition_kasteleyn(size, params)?;
            let discrepancy = (z_det - z_enum).abs() / z_enum;
            results.insert("partition_enum".into(), json!(z_enum));
            results.insert("partition_kasteleyn".into(), json!(z_det));
            results.insert("relative_discrepancy".into(), json!(discrepancy));
            diagnostics.insert("tolerances".into(), json!({ "partition_match": 1e-10 }));
        }
    }
    emit(&Envelope {
        schema: SCHEMA_VERSION,
        command: "partition",
        parameters: json!({
            "n": n,
            "alpha": alpha,
            "beta": beta,
            "gamma": gamma,
            "method": method.label(),
        }),
        results: Value::Object(results),
        diagnostics: Value::Object(diagnostics),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(ExitCode::SUCCESS)
}

/// A parsed correlation query: parameters, optional quadrature overrides,
/// and one or more constraint sets.
struct QuerySpec {
    params: FreeFermionParams,
    grid: Option<usize>,
    rel_tol: Option<f64>,
    sets: Vec<Vec<(Vertex, VertexType)>>,
}

fn parse_query(text: &str) -> Result<QuerySpec, Failure> {
    let mut alpha = None;
    let mut beta = None;
    let mut gamma = None;
    let mut grid = None;
    let mut rel_tol = None;
    let mut sets: Vec<Vec<(Vertex, VertexType)>> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "[constraints]" {
            sets.push(Vec::new());
            continue;
        }
        match sets.last_mut() {
            None => {
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Failure::input(format!("query line {lineno}: expected `key = value`, got {line:?}"))
                })?;
                let value = value.trim();
                let bad = |what: &str| {
                    Failure::input(format!("query line {lineno}: cannot parse {value:?} as {what}"))
                };
                match key.trim() {
                    "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad("a number"))?),
                    "beta" => beta = Some(value.parse::<f64>().map_err(|_| bad("a number"))?),
                    "gamma" => gamma = Some(value.parse::<f64>().map_err(|_| bad("a number"))?),
                    "grid" => grid = Some(value.parse::<usize>().map_err(|_| bad("a grid size"))?),
                    "rel_tol" => rel_tol = Some(value.parse::<f64>().map_err(|_| bad("a number"))?),
                    other => {
                        return Err(Failure::input(format!(
                            "query line {lineno}: unknown key {other:?}"
                        )))
                    }
                }
            }
            Some(set) => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Failure::input(format!(
                        "query line {lineno}: expected `v1 v2 type`, got {line:?}"
                    )));
                }
                let coord = |s: &str| {
                    s.parse::<i64>().map_err(|_| {
                        Failure::input(format!(
                            "query line {lineno}: cannot parse {s:?} as a vertex coordinate"
                        ))
                    })
                };
                let number = parts[2].parse::<u8>().map_err(|_| {
                    Failure::input(format!(
                        "query line {lineno}: cannot parse {:?} as a vertex type",
                        parts[2]
                    ))
                })?;
                set.push((Vertex::new(coord(parts[0])?, coord(parts[1])?), VertexType::from_number(number)?));
            }
        }
    }
    let require = |name: &str, v: Option<f64>| {
        v.ok_or_else(|| Failure::input(format!("query file must set {name}")))
    };
    let params = FreeFermionParams::new(
        require("alpha", alpha)?,
        require("beta", beta)?,
        require("gamma", gamma)?,
    )?;
    if sets.is_empty() || sets.iter().any(Vec::is_empty) {
        return Err(Failure::input(
            "query file needs at least one non-empty [constraints] block",
        ));
    }
    Ok(QuerySpec { params, grid, rel_tol, sets })
}

fn cmd_correlate(
    path: &Path,
    grid_flag: Option<usize>,
    rel_tol_flag: Option<f64>,
) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read query file {}: {e}", path.display())))?;
    let spec = parse_query(&text)?;
    let q = quadrature_from(grid_flag.or(spec.grid), rel_tol_flag.or(spec.rel_tol))?;
    let mut set_results = Vec::new();
    for set in &spec.sets {
        let detail = correlation_detail(spec.params, set, &q)?;
        let mut entries = Vec::new();
        for (i, &x) in detail.xs.iter().enumerate() {
            for (j, &y) in detail.ys.iter().enumerate() {
                let value = detail.entries[i][j];
                entries.push(json!({
                    "x": [x.d1, x.d2],
                    "y": [y.d1, y.d2],
                    "re": value.re,
                    "im": value.im,
                }));
            }
        }
        let mut object = Map::new();
        object.insert(
            "constraints".into(),
            json!(set
                .iter()
                .map(|(v, t)| json!({ "v1": v.v1, "v2": v.v2, "type": t.number() }))
                .collect::<Vec<_>>()),
        );
        object.insert("probability".into(), json!(detail.report.value));
        object.insert(
            "determinant".into(),
            json!({ "re": detail.determinant.re, "im": detail.determinant.im }),
        );
        object.insert("weight_prefactor".into(), json!(detail.prefactor));
        object.insert("clamped".into(), json!(detail.report.clamped));
        object.insert("imaginary_residue".into(), json!(detail.report.imaginary_residue));
        object.insert("kernel_entries".into(), json!(entries));
        if set.len() == 2 {
            // Informational: the product the two-point probability decays
            // toward as the vertices separate.
            let first = correlation(spec.params, &set[0..1], &q)?;
            let second = correlation(spec.params, &set[1..2], &q)?;
            object.insert("single_product".into(), json!(first * second));
        }
        set_results.push(Value::Object(object));
    }
    emit(&Envelope {
        schema: SCHEMA_VERSION,
        command: "correlate",
        parameters: json!({
            "query": path.display().to_string(),
            "alpha": spec.params.alpha(),
            "beta": spec.params.beta(),
            "gamma": spec.params.gamma(),
            "quadrature": quadrature_echo(&q),
        }),
        results: json!({ "sets": set_results }),
        diagnostics: json!({
            "tolerances": { "imaginary_residue": 1e-9, "clamp_window": 1e-9 },
        }),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(ExitCode::SUCCESS)
}

fn cmd_frequencies(
    alpha: f64,
    beta: f64,
    gamma: f64,
    format: Format,
    grid: Option<usize>,
    rel_tol: Option<f64>,
) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let params = FreeFermionParams::new(alpha, beta, gamma)?;
    let q = quadrature_from(grid, rel_tol)?;
    let mut values = Vec::with_capacity(6);
    for t in VertexType::ALL {
        values.push(frequency(params, t, &q)?);
    }
    let sum: f64 = values.iter().sum();
    match format {
        Format::Csv => {
            println!("type,frequency");
            for (t, v) in VertexType::ALL.iter().zip(&values) {
                println!("{},{v}", t.number());
            }
        }
        Format::Json => {
            let table: Vec<Value> = VertexType::ALL
                .iter()
                .zip(&values)
                .map(|(t, v)| json!({ "type": t.number(), "value": v }))
                .collect();
            emit(&Envelope {
                schema: SCHEMA_VERSION,
                command: "frequencies",
                parameters: json!({
                    "alpha": alpha,
                    "beta": beta,
                    "gamma": gamma,
                    "quadrature": quadrature_echo(&q),
                }),
                results: json!({ "frequencies": table, "sum": sum }),
                diagnostics: json!({
                    "tolerances": { "unity": 1e-8, "range": 1e-9 },
                }),
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: SuiteArg) -> Result<ExitCode, Failure> {
    let start = Instant::now();
    let (suite_value, label) = match suite {
        SuiteArg::Small => (Suite::Small, "small"),
        SuiteArg::Full => (Suite::Full, "full"),
    };
    let reports = run_suite(suite_value);
    for r in &reports {
        let status = if r.passed { "PASS" } else { "FAIL" };
        eprintln!("{status} {} ({:.2?}) — {}", r.name, r.elapsed, r.details);
    }
    let checks: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "passed": r.passed,
                "elapsed_ms": r.elapsed.as_secs_f64() * 1e3,
                "details": r.details,
            })
        })
        .collect();
    let passed = all_passed(&reports);
    emit(&Envelope {
        schema: SCHEMA_VERSION,
        command: "verify",
        parameters: json!({ "suite": label }),
        results: json!({ "checks": checks, "all_passed": passed }),
        diagnostics: json!({}),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    });
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
