use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kuga_satake::arith::{format_rational, parse_rational, rational_to_f64};
use kuga_satake::brauer::{even_clifford_structure, isogeny_decomposition};
use kuga_satake::hodge::{verify_hodge, HodgeStructure2};
use kuga_satake::kugasatake::ks_report;
use kuga_satake::qform::{diag_to_json, DiagonalForm, FormInput};
use kuga_satake::selftest::{run_criterion, RunConfig, CRITERIA};
use kuga_satake::Error;
use serde::Deserialize;
use serde_json::{json, Value};

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID_FORM: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "kuga-satake", version, about = "Even Clifford algebras and Kuga-Satake varieties of rational quadratic forms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Clone, Default)]
struct GlobalArgs {
    /// TOML or JSON file with tolerance, witness_height, oracle_bound, seed, output
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true)]
    witness_height: Option<u64>,
    #[arg(long, global = true)]
    oracle_bound: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Structure of C^+(Q) and the isogeny type of the Kuga-Satake variety
    Classify(FormArgs),
    /// Full Kuga-Satake report for a form and a negative plane
    Report {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        plane: PlaneArgs,
    },
    /// Weil element, polarization and CSpin checks for a plane
    HodgeVerify {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        plane: PlaneArgs,
        /// Number of random z (and x, y) samples
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
    /// Run the acceptance suite
    Selftest {
        /// Only these criteria (1-8); repeatable
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
    },
}

#[derive(Args, Clone)]
struct FormArgs {
    /// Diagonal coefficients, e.g. "-1,-1,3" or "-1/2,-3,5"
    #[arg(long, allow_hyphen_values = true, conflicts_with = "form")]
    diag: Option<String>,
    /// JSON file {"diag": [...]} or {"gram": [[...], ...]}; stdin when neither flag is given
    #[arg(long)]
    form: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct PlaneArgs {
    /// First plane vector, in the basis of the input form
    #[arg(long, allow_hyphen_values = true, requires = "plane_w")]
    plane_v: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "plane_v")]
    plane_w: Option<String>,
    /// Plane parameters a' (length n-2)
    #[arg(long, allow_hyphen_values = true, requires = "params_b", conflicts_with = "plane_v")]
    params_a: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "params_a")]
    params_b: Option<String>,
    /// Random admissible plane drawn from --seed
    #[arg(long, conflicts_with_all = ["plane_v", "params_a"])]
    random_plane: bool,
}

/// Plane given inside the form JSON: {"plane": {"v": [...], "w": [...]}}
/// or {"plane": {"a": [...], "b": [...]}}.
#[derive(Deserialize)]
struct JsonPlane {
    plane: Option<PlaneSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PlaneSpec {
    Vectors { v: Vec<f64>, w: Vec<f64> },
    Params { a: Vec<f64>, b: Vec<f64> },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Usage(_) => EXIT_PARSE,
            Error::InvalidForm(_) | Error::PlaneNotNegative(_) | Error::DependentPlane | Error::TooLarge(_) => {
                EXIT_INVALID_FORM
            }
            Error::NotAUnit | Error::PolarizationFailure | Error::Internal(_) => EXIT_VERIFICATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_PARSE,
        message: format!("parse error: {}", msg.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("kuga-satake: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(global: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &global.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| parse_error(format!("cannot read {}: {e}", path.display())))?;
            let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
            if is_json {
                serde_json::from_str(&text).map_err(|e| parse_error(format!("config {}: {e}", path.display())))?
            } else {
                toml::from_str(&text).map_err(|e| parse_error(format!("config {}: {e}", path.display())))?
            }
        }
    };
    if let Some(s) = global.seed {
        cfg.seed = s;
    }
    if let Some(t) = global.tolerance {
        cfg.tolerance = t;
    }
    if let Some(h) = global.witness_height {
        cfg.witness_height = h;
    }
    if let Some(b) = global.oracle_bound {
        cfg.oracle_bound = b;
    }
    if let Some(o) = &global.output {
        cfg.output = Some(o.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Classify(form) => {
            let (form, _) = read_form(&form)?;
            let out = classify(&form, &cfg)?;
            emit(&out, &cfg)?;
            Ok(0)
        }
        Command::Report { form, plane } => {
            let (form, json_plane) = read_form(&form)?;
            let hs = build_plane(&form, &plane, json_plane, &cfg)?;
            let report = ks_report(&hs, &cfg.report_options())?;
            let mut out = report.to_json();
            out["form"] = serde_json::to_value(diag_to_json(&form)).expect("serializable");
            out["plane"] = json!({"f1": hs.f1(), "f2": hs.f2()});
            emit(&out, &cfg)?;
            Ok(if report.passed() { 0 } else { EXIT_VERIFICATION })
        }
        Command::HodgeVerify { form, plane, samples } => {
            let (form, json_plane) = read_form(&form)?;
            let hs = build_plane(&form, &plane, json_plane, &cfg)?;
            let report = verify_hodge(&hs, cfg.seed, samples, cfg.tolerance, cfg.riemann_tolerance())?;
            let mut out = serde_json::to_value(&report).expect("serializable");
            out["form"] = serde_json::to_value(diag_to_json(&form)).expect("serializable");
            emit(&out, &cfg)?;
            Ok(if report.pass { 0 } else { EXIT_VERIFICATION })
        }
        Command::Selftest { criteria } => selftest(&criteria, &cfg),
    }
}

fn classify(form: &DiagonalForm, cfg: &RunConfig) -> Result<Value, Failure> {
    let structure = even_clifford_structure(form)?;
    let mut out = structure.to_json();
    let (neg, pos) = form.signature();
    out["form"] = serde_json::to_value(diag_to_json(form)).expect("serializable");
    out["signature"] = json!([neg, pos]);
    out["symbols"] = json!(structure.symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let witnesses: Vec<Value> = structure
        .symbols
        .iter()
        .map(|s| {
            s.is_split(cfg.witness_height)
                .map(|c| json!({"symbol": s.to_string(), "split": c.split, "witness": c.witness}))
        })
        .collect::<Result<_, _>>()?;
    out["split_witnesses"] = Value::Array(witnesses);
    out["isogeny"] = if form.is_hodge_type() && form.dim() >= 3 {
        serde_json::to_value(isogeny_decomposition(&structure)?).expect("serializable")
    } else {
        Value::Null
    };
    Ok(out)
}

fn selftest(criteria: &[u8], cfg: &RunConfig) -> Result<u8, Failure> {
    let ids: Vec<u8> = if criteria.is_empty() {
        CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        criteria.to_vec()
    };
    if let Some(bad) = ids.iter().find(|id| !(1..=8).contains(*id)) {
        return Err(parse_error(format!("no criterion {bad}; expected 1-8")));
    }
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, cfg);
        eprintln!("{}", r.line());
        for f in &r.failures {
            eprintln!("    {} / {}: deviation {:.3e} at {}", f.module, f.check, f.deviation, f.context);
        }
        results.push(r);
    }
    let pass = results.iter().all(|r| r.pass);
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    eprintln!(
        "selftest: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!(" (failed: {failed:?})") }
    );
    let out = json!({"pass": pass, "config": cfg, "criteria": results});
    emit(&out, cfg)?;
    Ok(if pass { 0 } else { EXIT_VERIFICATION })
}

fn emit(value: &Value, cfg: &RunConfig) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write {path}: {e}"),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<kuga_satake::arith::Rational>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_rational(t).map_err(Failure::from))
        .collect()
}

fn parse_reals(s: &str) -> Result<Vec<f64>, Failure> {
    Ok(parse_list(s)?.iter().map(rational_to_f64).collect())
}

/// The form (diagonalized, negatives first) and any plane embedded in its JSON.
fn read_form(args: &FormArgs) -> Result<(DiagonalForm, Option<PlaneSpec>), Failure> {
    let (input, plane) = match (&args.diag, &args.form) {
        (Some(d), _) => {
            let coeffs = parse_list(d)?;
            if coeffs.is_empty() {
                return Err(parse_error("--diag needs at least one coefficient"));
            }
            let text = json!({"diag": coeffs.iter().map(format_rational).collect::<Vec<_>>()}).to_string();
            (FormInput::parse_json(&text)?, None)
        }
        (None, Some(path)) => parse_form_text(&read_file(path)?)?,
        (None, None) => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| parse_error(format!("stdin: {e}")))?;
            parse_form_text(&text)?
        }
    };
    Ok((input.to_form()?.to_diagonal(), plane))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| parse_error(format!("cannot read {}: {e}", path.display())))
}

fn parse_form_text(text: &str) -> Result<(FormInput, Option<PlaneSpec>), Failure> {
    let input = FormInput::parse_json(text)?;
    let plane = serde_json::from_str::<JsonPlane>(text)
        .map_err(|e| parse_error(format!("plane: {e}")))?
        .plane;
    Ok((input, plane))
}

/// Plane vectors are given in the input basis; x_input = B x_diagonal.
fn to_diagonal_basis(form: &DiagonalForm, x: &[f64]) -> Result<Vec<f64>, Failure> {
    let Some(b) = form.change_of_basis() else {
        return Ok(x.to_vec());
    };
    if x.len() != b.rows() {
        return Err(Error::Usage(format!("plane vectors must have length {}", b.rows())).into());
    }
    let inv = b
        .inverse()
        .ok_or_else(|| Failure::from(Error::Internal("change of basis is singular".into())))?;
    Ok((0..inv.rows())
        .map(|i| (0..inv.cols()).map(|j| rational_to_f64(&inv[(i, j)]) * x[j]).sum())
        .collect())
}

fn build_plane(
    form: &DiagonalForm,
    args: &PlaneArgs,
    json_plane: Option<PlaneSpec>,
    cfg: &RunConfig,
) -> Result<HodgeStructure2, Failure> {
    form.require_hodge_type()?;
    let spec = if let (Some(v), Some(w)) = (&args.plane_v, &args.plane_w) {
        Some(PlaneSpec::Vectors {
            v: parse_reals(v)?,
            w: parse_reals(w)?,
        })
    } else if let (Some(a), Some(b)) = (&args.params_a, &args.params_b) {
        Some(PlaneSpec::Params {
            a: parse_reals(a)?,
            b: parse_reals(b)?,
        })
    } else if args.random_plane {
        return Ok(HodgeStructure2::random_seeded(form, cfg.seed)?);
    } else {
        json_plane
    };
    let hs = match spec {
        Some(PlaneSpec::Vectors { v, w }) => {
            let (v, w) = (to_diagonal_basis(form, &v)?, to_diagonal_basis(form, &w)?);
            HodgeStructure2::from_plane(form, &v, &w)
        }
        Some(PlaneSpec::Params { a, b }) => HodgeStructure2::from_parameters(form, &a, &b),
        None => HodgeStructure2::aligned(form),
    };
    Ok(hs?)
}
