//! Command-line driver for the matrix orthogonal polynomial toolkit.
//!
//! Three subcommands cover the toolkit's surface:
//!
//! * `generate` — coefficients of the normalized polynomials `Q_0..Q_wmax`
//!   as built by the three-term recursion;
//! * `verify` — run the verification checks and emit a structured report
//!   (exit 0 when every executed check passes, 1 otherwise);
//! * `moments` — moment tables of the weight `W` and the conjugated weight
//!   `W' = F_0 W F_0^*`.
//!
//! The payload goes to stdout (or `--out <path>`) as JSON or CSV; stderr
//! carries human-readable diagnostics only.  Every floating-point value is
//! printed with 17 significant digits, so parsing the output reproduces the
//! computed doubles bit for bit and re-running a command is byte-identical.
//! Set `MOPKIT_LOG=<level>` for progress diagnostics on stderr.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mopkit_core::checks::{verify, CheckKind, VerifyOptions};
use mopkit_core::cp2::Cp2Model;
use mopkit_core::matpoly::{cplx, CMatrix};
use mopkit_core::presequence::build_q;
use mopkit_core::quadrature::{integrate_matrix, QuadratureRule};
use mopkit_core::report::CheckStatus;

#[derive(Parser)]
#[command(
    name = "mopkit",
    version,
    about = "Build, verify, and tabulate matrix orthogonal polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the coefficients of the normalized polynomials Q_0..Q_wmax.
    Generate(GenerateArgs),
    /// Run verification checks and emit a report.
    Verify(VerifyArgs),
    /// Emit moment tables of the weight and the conjugated weight.
    Moments(MomentsArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Model identifier (built in: "cp2").
    model: String,
    /// Weight exponent of the model.
    #[arg(long)]
    n: u32,
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the payload to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest polynomial index.
    #[arg(long = "wmax")]
    w_max: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest polynomial index exercised by the checks.
    #[arg(long = "wmax")]
    w_max: u32,
    /// Quadrature node count (default: the model's exact-degree rule).
    #[arg(long)]
    nodes: Option<usize>,
    /// Residual threshold applied to every check (default: per-check).
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated list of checks to run, or "all".
    #[arg(long, default_value = "all")]
    checks: String,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Largest moment order.
    #[arg(long = "wmax", visible_alias = "order")]
    w_max: u32,
    /// Quadrature node count (default: the model's exact-degree rule).
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Top-level JSON document: a fixed envelope around the per-command payload.
#[derive(Serialize)]
struct Envelope<P: Serialize> {
    schema_version: &'static str,
    model: String,
    params: Params,
    payload: P,
}

#[derive(Serialize)]
struct Params {
    n: u32,
    w_max: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
}

/// One complex entry; matrices serialize as row-major arrays of these.
#[derive(Serialize)]
struct Cx {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct GeneratePayload {
    size: usize,
    polynomials: Vec<PolyEntry>,
}

#[derive(Serialize)]
struct PolyEntry {
    w: u32,
    degree: usize,
    /// Ascending coefficients; each matrix is row-major `{re, im}` entries.
    coefficients: Vec<Vec<Cx>>,
}

#[derive(Serialize)]
struct MomentsPayload {
    size: usize,
    order: u32,
    tables: Vec<MomentTable>,
}

#[derive(Serialize)]
struct MomentTable {
    /// `"W"` for the model weight, `"Wprime"` for the conjugated weight.
    weight: &'static str,
    moments: Vec<MomentEntry>,
}

#[derive(Serialize)]
struct MomentEntry {
    order: u32,
    matrix: Vec<Cx>,
}

#[derive(Serialize)]
struct VerifyPayload {
    all_passed: bool,
    checks: Vec<mopkit_core::report::CheckResult>,
    discrepancies: Vec<String>,
}

/// JSON formatter printing every float with 17 significant digits, the
/// minimum that round-trips any finite double exactly.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serialized JSON is UTF-8")
}

/// The same 17-significant-digit rendering for CSV fields.
fn csv_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Row-major `{re, im}` entries of a matrix.
fn matrix_entries(m: &CMatrix) -> Vec<Cx> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(Cx {
                re: m[(i, j)].re,
                im: m[(i, j)].im,
            });
        }
    }
    out
}

fn emit(payload: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, payload).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => io::stdout()
            .write_all(payload.as_bytes())
            .map_err(|e| format!("cannot write to stdout: {e}")),
    }
}

fn model_for(common: &CommonArgs) -> Result<Cp2Model, String> {
    if common.model != "cp2" {
        return Err(format!("unknown model '{}' (available: cp2)", common.model));
    }
    Ok(Cp2Model::new(common.n))
}

fn parse_checks(list: &str) -> Result<Option<Vec<CheckKind>>, String> {
    if list == "all" {
        return Ok(None);
    }
    list.split(',')
        .map(|s| s.trim().parse::<CheckKind>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), String> {
    let model = model_for(&args.common)?;
    let ps = model.presequence();
    let qs = build_q(&ps, args.w_max as usize).map_err(|e| e.to_string())?;
    log::info!(
        "built {} polynomials for model cp2 with n = {}",
        qs.len(),
        args.common.n
    );
    let rendered = match args.common.format {
        Format::Json => {
            let payload = GeneratePayload {
                size: ps.size(),
                polynomials: qs
                    .iter()
                    .enumerate()
                    .map(|(w, q)| PolyEntry {
                        w: w as u32,
                        degree: q.degree(),
                        coefficients: (0..=q.degree())
                            .map(|k| matrix_entries(&q.coeff(k)))
                            .collect(),
                    })
                    .collect(),
            };
            to_json(&Envelope {
                schema_version: "1",
                model: args.common.model.clone(),
                params: Params {
                    n: args.common.n,
                    w_max: args.w_max,
                    nodes: None,
                    tol: None,
                },
                payload,
            })
        }
        Format::Csv => {
            let mut s = String::from("model,n,w,degree,coeff_index,row,col,re,im\n");
            for (w, q) in qs.iter().enumerate() {
                for k in 0..=q.degree() {
                    let c = q.coeff(k);
                    for i in 0..c.nrows() {
                        for j in 0..c.ncols() {
                            let z = c[(i, j)];
                            writeln!(
                                s,
                                "cp2,{},{w},{},{k},{i},{j},{},{}",
                                args.common.n,
                                q.degree(),
                                csv_f64(z.re),
                                csv_f64(z.im),
                            )
                            .expect("write to string");
                        }
                    }
                }
            }
            s
        }
    };
    emit(&rendered, args.common.out.as_ref())
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, String> {
    let model = model_for(&args.common)?;
    let mut opts = VerifyOptions::new(args.w_max);
    opts.nodes = args.nodes;
    opts.tol = args.tol;
    opts.checks = parse_checks(&args.checks)?;
    let report = verify(&model, &opts).map_err(|e| e.to_string())?;
    log::info!(
        "verification of cp2 with n = {}, w_max = {}: {} checks executed",
        args.common.n,
        args.w_max,
        report.executed_count()
    );

    // Diagnostics to stderr; the payload on stdout stays machine-readable.
    for check in &report.checks {
        if check.status == CheckStatus::Fail {
            let residual = check
                .residual
                .map(|r| format!("{r:.3e}"))
                .unwrap_or_else(|| "n/a".to_string());
            let threshold = check
                .threshold
                .map(|t| format!("{t:.3e}"))
                .unwrap_or_else(|| "n/a".to_string());
            eprintln!(
                "check {} failed: residual {residual}, threshold {threshold}",
                check.name
            );
            for note in &check.notes {
                eprintln!("  {note}");
            }
        }
    }

    let all_passed = report.all_passed();
    let rendered = match args.common.format {
        Format::Json => to_json(&Envelope {
            schema_version: "1",
            model: report.model.clone(),
            params: Params {
                n: report.params.n,
                w_max: report.params.w_max,
                nodes: Some(report.params.nodes),
                tol: report.params.tol,
            },
            payload: VerifyPayload {
                all_passed,
                checks: report.checks,
                discrepancies: report.discrepancies,
            },
        }),
        Format::Csv => {
            for d in &report.discrepancies {
                eprintln!("note: {d}");
            }
            let mut s = String::from("check,status,residual,threshold\n");
            for check in &report.checks {
                let status = match check.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "fail",
                    CheckStatus::Skipped => "skipped",
                };
                let residual = check.residual.map(csv_f64).unwrap_or_default();
                let threshold = check.threshold.map(csv_f64).unwrap_or_default();
                writeln!(s, "{},{status},{residual},{threshold}", check.name)
                    .expect("write to string");
            }
            s
        }
    };
    emit(&rendered, args.common.out.as_ref())?;
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_moments(args: &MomentsArgs) -> Result<(), String> {
    let model = model_for(&args.common)?;
    let ps = model.presequence();
    let nodes = args
        .nodes
        .unwrap_or_else(|| model.default_nodes(args.w_max));
    let rule = QuadratureRule::gauss_legendre(nodes, 0.0, 1.0).map_err(|e| e.to_string())?;
    log::info!(
        "moment tables for cp2 with n = {}, orders 0..={}, {nodes} nodes",
        args.common.n,
        args.w_max
    );

    let w_prime = ps.conjugated_weight();
    let mut tables = Vec::new();
    for (label, weight) in [("W", ps.weight()), ("Wprime", &w_prime)] {
        let mut moments = Vec::new();
        for order in 0..=args.w_max {
            let m = integrate_matrix(
                |x| weight.evaluate(x) * cplx(x.powi(order as i32), 0.0),
                &rule,
            )
            .map_err(|e| e.to_string())?;
            moments.push((order, m));
        }
        tables.push((label, moments));
    }

    let rendered = match args.common.format {
        Format::Json => {
            let payload = MomentsPayload {
                size: ps.size(),
                order: args.w_max,
                tables: tables
                    .iter()
                    .map(|(label, moments)| MomentTable {
                        weight: label,
                        moments: moments
                            .iter()
                            .map(|(order, m)| MomentEntry {
                                order: *order,
                                matrix: matrix_entries(m),
                            })
                            .collect(),
                    })
                    .collect(),
            };
            to_json(&Envelope {
                schema_version: "1",
                model: args.common.model.clone(),
                params: Params {
                    n: args.common.n,
                    w_max: args.w_max,
                    nodes: Some(nodes),
                    tol: None,
                },
                payload,
            })
        }
        Format::Csv => {
            let mut s = String::from("model,n,weight,order,row,col,re,im\n");
            for (label, moments) in &tables {
                for (order, m) in moments {
                    for i in 0..m.nrows() {
                        for j in 0..m.ncols() {
                            let z = m[(i, j)];
                            writeln!(
                                s,
                                "cp2,{},{label},{order},{i},{j},{},{}",
                                args.common.n,
                                csv_f64(z.re),
                                csv_f64(z.im),
                            )
                            .expect("write to string");
                        }
                    }
                }
            }
            s
        }
    };
    emit(&rendered, args.common.out.as_ref())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MOPKIT_LOG")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(args) => cmd_generate(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => cmd_verify(args),
        Command::Moments(args) => cmd_moments(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
