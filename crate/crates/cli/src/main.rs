use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sympindex::classical::{self, LongRoute};
use sympindex::lagrangian::{self, FramePath};
use sympindex::path::{self, SympPath};
use sympindex::{maslov, rotation, spectral, verify, Config, Error, SympMatrix};

mod render;

#[derive(Parser, Debug)]
#[command(name = "sympindex", version, about = "Maslov-type indices of symplectic paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Maslov-type index of a path (or another index with --index)
    Index,
    /// Spectral data of a matrix, or of a path at --at
    Spectrum,
    /// Rotation number of a path
    Rotation,
    /// Robbin-Salamon index of a path or a Lagrangian pair
    Rs,
    /// Cappell-Lee-Miller index of a path or a Lagrangian pair
    Clm,
    /// Conley-Zehnder, Long, L0 and segment indices
    Classical,
    /// Recompute the worked examples and print a PASS/FAIL table
    VerifyPaper,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum IndexChoice {
    Mu,
    Cz,
    Long,
    L0,
    Sps,
    Rs,
    Clm,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum RouteChoice {
    Comparison,
    Heuristic,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Fault {
    FlipDeltaBeta,
    FlipRPairRule,
}

#[derive(Args, Debug)]
struct Opts {
    /// Path-spec, frame-spec or matrix JSON document
    #[arg(long, global = true, value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    index: Option<IndexChoice>,
    /// Upper bound for the global perturbation angle
    #[arg(long, global = true, value_name = "X")]
    theta_max: Option<f64>,
    /// Relative threshold for rank and signature decisions
    #[arg(long, global = true, value_name = "X")]
    tol_eig: Option<f64>,
    /// Write the phase lift as CSV
    #[arg(long, global = true, value_name = "FILE")]
    emit_lift: Option<PathBuf>,
    /// Write the angle functions of the orthogonal reduction as CSV
    #[arg(long, global = true, value_name = "FILE")]
    emit_angles: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Route for the Long index
    #[arg(long, global = true, value_enum, default_value = "comparison")]
    long_route: RouteChoice,
    /// Parameter at which `spectrum` evaluates a path
    #[arg(long, global = true, value_name = "T", default_value_t = 1.0)]
    at: f64,
    /// Evaluate on one thread
    #[arg(long, global = true)]
    sequential: bool,
    #[arg(long, global = true, value_enum, hide = true)]
    fault: Vec<Fault>,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    kind: String,
    message: String,
    extra: Value,
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: 3,
            kind: kind.to_string(),
            message: message.into(),
            extra: Value::Null,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_input_error() { 3 } else { 2 },
            kind: e.kind().to_string(),
            message: e.to_string(),
            extra: Value::Null,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail(Failure::input("Usage", first));
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    let mut obj = json!({"error": f.kind, "message": f.message, "exit_code": f.code});
    if let Value::Object(extra) = f.extra {
        obj.as_object_mut().expect("object").extend(extra);
    }
    eprintln!("{obj}");
    ExitCode::from(f.code)
}

fn config(opts: &Opts) -> Result<Config, Failure> {
    let mut cfg = if opts.sequential { Config::sequential() } else { Config::default() };
    if let Some(x) = opts.theta_max {
        if !(x > 0.0 && x < std::f64::consts::FRAC_PI_2) {
            return Err(Failure::input("Usage", format!("--theta-max must lie in (0, pi/2), got {x}")));
        }
        cfg.theta_max = x;
    }
    if let Some(x) = opts.tol_eig {
        if !(x > 0.0 && x < 1.0) {
            return Err(Failure::input("Usage", format!("--tol-eig must lie in (0, 1), got {x}")));
        }
        cfg.tol.eig = x;
    }
    for f in &opts.fault {
        match f {
            Fault::FlipDeltaBeta => cfg.faults.flip_delta_beta = true,
            Fault::FlipRPairRule => cfg.faults.flip_r_pair_rule = true,
        }
    }
    Ok(cfg)
}

fn read_input(opts: &Opts) -> Result<Value, Failure> {
    let file = opts
        .input
        .as_ref()
        .ok_or_else(|| Failure::input("Usage", "--input is required for this command"))?;
    let text = fs::read_to_string(file)
        .map_err(|e| Failure::input("Io", format!("cannot read {}: {e}", file.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input("SchemaError", format!("invalid JSON in {}: {e}", file.display())))
}

fn write_side_file(file: &Path, body: &str) -> Result<(), Failure> {
    fs::write(file, body).map_err(|e| Failure::input("Io", format!("cannot write {}: {e}", file.display())))
}

fn emit(opts: &Opts, command: &str, cfg: &Config, input: Option<Value>, result: Value) {
    let mut report = json!({
        "command": command,
        "config": cfg,
        "result": result,
    });
    if let Some(v) = input {
        report["input"] = v;
    }
    match opts.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("serializable report")),
        Format::Text => print!("{}", render::text(&report)),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let opts = &cli.opts;
    let cfg = config(opts)?;
    match cli.command {
        Command::VerifyPaper => verify_paper(opts, &cfg),
        Command::Spectrum => spectrum(opts, &cfg),
        Command::Rotation => {
            let doc = read_input(opts)?;
            let p = path::parse_value(&doc, &cfg.tol)?;
            let lift = rotation::lift_delta(&p, &cfg)?;
            if let Some(f) = &opts.emit_lift {
                write_side_file(f, &lift.to_csv())?;
            }
            let mut result = json!({
                "delta": lift.delta,
                "samples": lift.grid.len(),
                "max_step_phase": lift.max_step_phase,
                "rho_start": lift.rho.first(),
                "rho_end": lift.rho.last(),
            });
            if sympindex::linalg::max_abs(&(p.start().matrix() - p.end().matrix())) < cfg.tol.path {
                result["loop_delta"] = json!(rotation::check_loop_integral(&p, &cfg)?);
            }
            emit(opts, "rotation", &cfg, Some(p.to_json()), result);
            Ok(())
        }
        Command::Rs => rs(opts, &cfg),
        Command::Clm => clm(opts, &cfg),
        Command::Classical => {
            let doc = read_input(opts)?;
            let p = path::parse_value(&doc, &cfg.tol)?;
            let choice = opts.index.unwrap_or(IndexChoice::Cz);
            let result = classical_json(&p, choice, opts, &cfg)?;
            emit(opts, "classical", &cfg, Some(p.to_json()), result);
            Ok(())
        }
        Command::Index => {
            let doc = read_input(opts)?;
            let choice = opts.index.unwrap_or(IndexChoice::Mu);
            if doc.get("l1").is_some() {
                return match choice {
                    IndexChoice::Rs => rs(opts, &cfg),
                    IndexChoice::Clm => clm(opts, &cfg),
                    _ => Err(Failure::input("Usage", "a Lagrangian pair only supports --index rs or clm")),
                };
            }
            let p = path::parse_value(&doc, &cfg.tol)?;
            let result = match choice {
                IndexChoice::Mu => {
                    let r = maslov::maslov_index(&p, &cfg)?;
                    if let Some(f) = &opts.emit_lift {
                        write_side_file(f, &r.lift.to_csv())?;
                    }
                    serde_json::to_value(&r).expect("serializable")
                }
                IndexChoice::Rs => rs_json(&lagrangian::rs_index_symp(&p, &cfg)?),
                IndexChoice::Clm => {
                    let r = lagrangian::clm_index(&p, &cfg)?;
                    if let Some(f) = &opts.emit_angles {
                        write_side_file(f, &r.reduction.to_csv())?;
                    }
                    clm_json(&r)
                }
                other => classical_json(&p, other, opts, &cfg)?,
            };
            let mut result = result;
            result["index"] = json!(format!("{choice:?}").to_lowercase());
            emit(opts, "index", &cfg, Some(p.to_json()), result);
            Ok(())
        }
    }
}

fn rs(opts: &Opts, cfg: &Config) -> Result<(), Failure> {
    let doc = read_input(opts)?;
    let (input, report) = if doc.get("l1").is_some() {
        let (l1, l2) = lagrangian::parse_pair(&doc, &cfg.tol)?;
        let r = match &l2 {
            FramePath::Constant(f) => lagrangian::rs_index(&l1, f, cfg)?,
            _ => lagrangian::relative_rs(&l1, &l2, cfg)?,
        };
        (json!({"l1": l1.to_json(), "l2": l2.to_json()}), r)
    } else {
        let p = path::parse_value(&doc, &cfg.tol)?;
        (p.to_json(), lagrangian::rs_index_symp(&p, cfg)?)
    };
    emit(opts, "rs", cfg, Some(input), rs_json(&report));
    Ok(())
}

fn clm(opts: &Opts, cfg: &Config) -> Result<(), Failure> {
    let doc = read_input(opts)?;
    let (input, report) = if doc.get("l1").is_some() {
        let (l1, l2) = lagrangian::parse_pair(&doc, &cfg.tol)?;
        let r = lagrangian::clm_index_pair(&l1, &l2, cfg)?;
        (json!({"l1": l1.to_json(), "l2": l2.to_json()}), r)
    } else {
        let p = path::parse_value(&doc, &cfg.tol)?;
        (p.to_json(), lagrangian::clm_index(&p, cfg)?)
    };
    if let Some(f) = &opts.emit_angles {
        write_side_file(f, &report.reduction.to_csv())?;
    }
    emit(opts, "clm", cfg, Some(input), clm_json(&report));
    Ok(())
}

fn rs_json(r: &lagrangian::RsReport) -> Value {
    json!({
        "value": r.value.to_f64(),
        "value_text": r.value.to_string(),
        "crossings": r.crossings,
    })
}

fn clm_json(r: &lagrangian::ClmReport) -> Value {
    json!({
        "value": r.value,
        "d": r.d,
        "p": r.p,
        "q": r.q,
        "theta": r.theta,
        "crossings": r.crossings,
        "samples": r.reduction.ts.len(),
    })
}

fn classical_json(p: &SympPath, choice: IndexChoice, opts: &Opts, cfg: &Config) -> Result<Value, Failure> {
    let route = match opts.long_route {
        RouteChoice::Comparison => LongRoute::Comparison,
        RouteChoice::Heuristic => LongRoute::Heuristic,
        RouteChoice::Both => LongRoute::Both,
    };
    let v = match choice {
        IndexChoice::Cz => serde_json::to_value(classical::conley_zehnder(p, cfg)?),
        IndexChoice::Long => serde_json::to_value(classical::long_index(p, route, cfg)?),
        IndexChoice::L0 => serde_json::to_value(classical::l0_index(p, cfg)?),
        IndexChoice::Sps => serde_json::to_value(classical::sps_indices(p, cfg)?),
        other => {
            return Err(Failure::input(
                "Usage",
                format!("--index {} is not a classical index (use cz, long, l0 or sps)", format!("{other:?}").to_lowercase()),
            ))
        }
    };
    Ok(v.expect("serializable"))
}

fn spectrum(opts: &Opts, cfg: &Config) -> Result<(), Failure> {
    let doc = read_input(opts)?;
    let (m, input) = if let Some(rows) = doc.get("matrix") {
        let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone())
            .map_err(|e| Failure::input("SchemaError", format!("\"matrix\" must be a list of numeric rows: {e}")))?;
        (SympMatrix::from_rows(&rows, &cfg.tol)?, json!({"matrix": rows}))
    } else {
        let p = path::parse_value(&doc, &cfg.tol)?;
        (p.evaluate(opts.at, &cfg.tol)?, json!({"path": p.to_json(), "t": opts.at}))
    };
    let sd = spectral::spectral_data(&m, &cfg.tol)?;
    let fk = sd.first_kind()?;
    let (o, angles) = spectral::normalization_matrix(&m, &cfg.tol)?;
    let result = json!({
        "matrix": m,
        "symplectic_residual": m.residual(),
        "spectral": sd,
        "first_kind": fk,
        "r": sd.count_r(&cfg.faults),
        "on_cycle": sd.on_cycle(),
        "normalization_angles": angles,
        "normalization_matrix": o,
        "normalization_convention": maslov::NORMALIZATION_CONVENTION,
    });
    emit(opts, "spectrum", cfg, Some(input), result);
    Ok(())
}

fn verify_paper(opts: &Opts, cfg: &Config) -> Result<(), Failure> {
    let table = verify::verify_paper(cfg);
    match opts.format {
        Format::Json => {
            let report = json!({"command": "verify-paper", "config": cfg, "result": table});
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
        }
        Format::Text => print!("{}", table.to_text()),
    }
    if table.all_pass() {
        return Ok(());
    }
    Err(Failure {
        code: 2,
        kind: "VerificationFailed".into(),
        message: format!("failed rows: {}", table.failed().join(", ")),
        extra: json!({"failed_rows": table.failed()}),
    })
}
