//! `betashadow` command-line front-end.
//!
//! Exit codes: 0 success, 1 a checked property fails, 2 invalid input,
//! 3 a resource cap was hit. Failures print one JSON line
//! `{"error": kind, "message": text}` to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use betashadow::orbits::PseudoOrbitJson;
use betashadow::renorm::{sweep, SweepRow, DEFAULT_TOLERANCE};
use betashadow::shadowing::{check_shadowing_with, ShadowConfig, DEFAULT_MAX_PIECES};
use betashadow::witness::witness_margins;
use betashadow::{
    case1_witness, case2_witness, coding, grid_shadow_oracle, is_transitive, iterate, reconstruct,
    renormalize, theorem_a_witness, theorem_b_witness, validate_pseudo_orbit, BetaParams, Decision,
    Error, PiecewiseAffineMap, PseudoOrbit, Rational, Scalar, ShadowStatus, Side,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "betashadow", version, about = "Finite shadowing for piecewise affine interval maps")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Breakpoints, branches, one-sided limits and transitivity of a map.
    MapInfo {
        #[command(flatten)]
        map: MapArgs,
        /// Hull tolerance for the transitivity check.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Orbit of a point.
    Iterate {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        x: String,
        /// Number of steps.
        #[arg(long, alias = "length")]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Largest one-step defect of a sequence against delta.
    Validate {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        orbit: OrbitArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Decide whether a pseudo-orbit is epsilon-shadowed by a true orbit.
    ShadowCheck {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        orbit: OrbitArgs,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = DEFAULT_MAX_PIECES)]
        max_pieces: usize,
        /// Also run the uniform-grid sampling oracle with this many points.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Build a pseudo-orbit that no true orbit epsilon-shadows.
    Witness {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        epsilon: String,
        /// Use this delta at breakpoint --k instead of the automatic choice.
        #[arg(long)]
        delta: Option<String>,
        /// Breakpoint index for --delta; defaults to the first right-sided one.
        #[arg(long, requires = "delta")]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_PIECES)]
        max_pieces: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Renormalization data of a non-transitive beta-map.
    Renormalize {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Binary coding of a point.
    Expand {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        x: String,
        /// Number of digits.
        #[arg(long, alias = "length")]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transitivity and renormalization over a (beta, alpha) grid, binary64 only.
    Sweep {
        #[arg(long)]
        beta_min: f64,
        #[arg(long)]
        beta_max: f64,
        /// Cells per axis.
        #[arg(long)]
        grid: usize,
        /// Defaults to csv.
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MapArgs {
    #[arg(long, requires = "alpha", conflicts_with = "map")]
    beta: Option<String>,
    #[arg(long, requires = "beta")]
    alpha: Option<String>,
    /// JSON map file: {"beta","alpha"} or {"breakpoints","branches","sides"}.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Binary64 arithmetic with a guard band instead of exact rationals.
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct OrbitArgs {
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', required_unless_present = "input", conflicts_with = "input")]
    orbit: Vec<String>,
    #[arg(long, required_unless_present = "input")]
    delta: Option<String>,
    /// JSON file with {"points","delta"}, or a witness trace holding one under "pseudo".
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { kind: "Usage".into(), message: message.into(), code: 2 }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotTransitive
            | Error::TransitivityUncertain
            | Error::NoWitness(_)
            | Error::IsTransitive
            | Error::VerificationFailed(_) => 1,
            Error::PieceExplosion(_)
            | Error::NoStabilization(_)
            | Error::NotFound(_)
            | Error::DepthExceeded(_) => 3,
            _ => 2,
        };
        Failure { kind: e.kind().into(), message: e.to_string(), code }
    }
}

/// Report text plus the exit code it carries.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn json(value: &Value, code: u8) -> Self {
        Report { text: value.to_string(), code }
    }
}

type Outcome = std::result::Result<Report, Failure>;

enum Source<S> {
    Beta(BetaParams<S>),
    General(PiecewiseAffineMap<S>),
}

impl<S: Scalar> Source<S> {
    fn load(args: &MapArgs) -> std::result::Result<Self, Failure> {
        match (&args.beta, &args.alpha, &args.map) {
            (Some(b), Some(a), None) => Ok(Source::Beta(BetaParams::new(S::parse(b)?, S::parse(a)?)?)),
            (None, None, Some(path)) => {
                let value = read_json(path)?;
                if value.get("beta").is_some() {
                    let field = |key: &str| -> std::result::Result<S, Failure> {
                        match &value[key] {
                            Value::String(s) => Ok(S::parse(s)?),
                            Value::Number(n) => Ok(S::parse(&n.to_string())?),
                            _ => Err(Error::InvalidMap(format!("missing {key}")).into()),
                        }
                    };
                    Ok(Source::Beta(BetaParams::new(field("beta")?, field("alpha")?)?))
                } else {
                    let map = serde_json::from_value(value).map_err(|e| Error::InvalidMap(e.to_string()))?;
                    Ok(Source::General(map))
                }
            }
            _ => Err(Failure::usage("give --beta and --alpha, or --map")),
        }
    }

    fn map(&self) -> std::result::Result<PiecewiseAffineMap<S>, Failure> {
        match self {
            Source::Beta(p) => Ok(PiecewiseAffineMap::beta(p)?),
            Source::General(m) => Ok(m.clone()),
        }
    }

    fn params(&self, verb: &str) -> std::result::Result<&BetaParams<S>, Failure> {
        match self {
            Source::Beta(p) => Ok(p),
            Source::General(_) => Err(Failure::usage(format!("{verb} needs --beta and --alpha"))),
        }
    }
}

fn read_json(path: &PathBuf) -> std::result::Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure { kind: "Io".into(), message: format!("{}: {e}", path.display()), code: 2 })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()).into())
}

fn load_orbit<S: Scalar>(args: &OrbitArgs) -> std::result::Result<PseudoOrbit<S>, Failure> {
    if let Some(path) = &args.input {
        let mut value = read_json(path)?;
        if let Some(inner) = value.get("pseudo") {
            value = inner.clone();
        }
        let mut json: PseudoOrbitJson = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(d) = &args.delta {
            json.delta.0 = d.clone();
        }
        return Ok(PseudoOrbit::from_json(&json)?);
    }
    let points = args.orbit.iter().map(|p| S::parse(p.trim())).collect::<betashadow::Result<Vec<S>>>()?;
    let delta = args.delta.as_deref().ok_or_else(|| Failure::usage("--delta is required"))?;
    Ok(PseudoOrbit::new(points, S::parse(delta)?))
}

fn decision_code(d: Decision) -> u8 {
    if d.is_yes() {
        0
    } else {
        1
    }
}

fn json_only(out: &OutArgs, verb: &str) -> std::result::Result<(), Failure> {
    match out.format {
        Format::Json => Ok(()),
        Format::Csv => Err(Failure::usage(format!("{verb} has no csv form"))),
    }
}

fn map_info<S: Scalar>(args: &MapArgs, tolerance: f64, out: &OutArgs) -> Outcome {
    json_only(out, "map-info")?;
    let f = Source::<S>::load(args)?.map()?;
    let transitive = is_transitive(&f.to_f64(), &tolerance)?;
    let margins: Vec<Value> = (0..f.n_breakpoints())
        .map(|k| {
            let (minus, plus) = f.one_sided_limits(k).expect("index in range");
            json!({
                "k": k,
                "z": f.breakpoints()[k].to_decimal(),
                "side": f.sides()[k],
                "f_minus": minus.to_decimal(),
                "f_plus": plus.to_decimal(),
            })
        })
        .collect();
    let mut value = serde_json::to_value(&f).expect("plain data");
    value["limits"] = Value::Array(margins);
    value["min_cell"] = json!(f.min_cell_width().to_decimal());
    value["min_jump"] = json!(f.min_jump().to_decimal());
    value["max_abs_slope"] = json!(f.max_abs_slope().to_decimal());
    value["transitive"] = json!(transitive.to_string());
    Ok(Report::json(&value, 0))
}

fn iterate_verb<S: Scalar>(args: &MapArgs, x: &str, n: usize, out: &OutArgs) -> Outcome {
    let f = Source::<S>::load(args)?.map()?;
    let orbit = iterate(&f, &S::parse(x)?, n)?;
    match out.format {
        Format::Json => {
            let points: Vec<String> = orbit.points.iter().map(|p| p.to_decimal()).collect();
            Ok(Report::json(&json!({ "points": points }), 0))
        }
        Format::Csv => {
            let mut text = String::from("i,x");
            for (i, p) in orbit.points.iter().enumerate() {
                text.push_str(&format!("\n{i},{}", p.to_decimal()));
            }
            Ok(Report { text, code: 0 })
        }
    }
}

fn validate<S: Scalar>(args: &MapArgs, orbit: &OrbitArgs, out: &OutArgs) -> Outcome {
    json_only(out, "validate")?;
    let f = Source::<S>::load(args)?.map()?;
    let pseudo = load_orbit::<S>(orbit)?;
    let report = validate_pseudo_orbit(&f, &pseudo.points, &pseudo.delta)?;
    Ok(Report::json(&report.to_json(), decision_code(report.valid)))
}

fn shadow_check<S: Scalar>(
    args: &MapArgs,
    orbit: &OrbitArgs,
    epsilon: &str,
    max_pieces: usize,
    samples: Option<usize>,
    out: &OutArgs,
) -> Outcome {
    json_only(out, "shadow-check")?;
    let f = Source::<S>::load(args)?.map()?;
    let pseudo = load_orbit::<S>(orbit)?;
    let epsilon = S::parse(epsilon)?;
    let report = check_shadowing_with(&f, &pseudo, &epsilon, &ShadowConfig { max_pieces })?;
    let mut value = report.to_json();
    if let Some(n) = samples {
        if n < 2 {
            return Err(Error::InvalidParams("--samples must be at least 2".into()).into());
        }
        let hit = grid_shadow_oracle(&f, &pseudo, &epsilon, n);
        value["grid_witness"] = json!(hit.map(|z| z.to_decimal()));
    }
    let code = if report.status == ShadowStatus::Shadowed { 0 } else { 1 };
    Ok(Report::json(&value, code))
}

fn witness<S: Scalar>(
    args: &MapArgs,
    epsilon: &str,
    delta: Option<&str>,
    k: Option<usize>,
    max_pieces: usize,
    out: &OutArgs,
) -> Outcome {
    json_only(out, "witness")?;
    let source = Source::<S>::load(args)?;
    let f = source.map()?;
    let epsilon = S::parse(epsilon)?;
    let trace = match delta {
        Some(delta) => {
            let delta = S::parse(delta)?;
            let k = match k {
                Some(k) => k,
                None => (0..f.n_breakpoints())
                    .find(|&k| f.sides()[k] == Side::Right)
                    .ok_or_else(|| Error::NoWitness("no right-sided breakpoint".into()))?,
            };
            witness_margins(&f, k, &epsilon)?;
            if f.apply(&f.breakpoints()[k]).is_zero() {
                case2_witness(&f, k, &epsilon, &delta)?
            } else {
                case1_witness(&f, k, &epsilon, &delta)?
            }
        }
        None => match &source {
            Source::Beta(p) => theorem_b_witness(p, &epsilon)?,
            Source::General(m) => theorem_a_witness(m, &epsilon)?,
        },
    };
    let report = check_shadowing_with(&f, &trace.pseudo, &trace.epsilon, &ShadowConfig { max_pieces })?;
    let mut value = trace.to_json();
    value["status"] = serde_json::to_value(report.status).expect("plain data");
    let code = if report.status == ShadowStatus::NotShadowed { 0 } else { 1 };
    Ok(Report::json(&value, code))
}

fn renormalize_verb<S: Scalar>(args: &MapArgs, out: &OutArgs) -> Outcome {
    json_only(out, "renormalize")?;
    let source = Source::<S>::load(args)?;
    let data = renormalize(source.params("renormalize")?)?;
    Ok(Report::json(&data.to_json(), 0))
}

fn expand<S: Scalar>(args: &MapArgs, x: &str, n: usize, out: &OutArgs) -> Outcome {
    json_only(out, "expand")?;
    let source = Source::<S>::load(args)?;
    let digits = coding(source.params("expand")?, &S::parse(x)?, n)?;
    let mut value = digits.to_json();
    value["value"] = json!(reconstruct(&digits).to_decimal());
    Ok(Report::json(&value, 0))
}

fn sweep_verb(beta_min: f64, beta_max: f64, grid: usize, format: Format) -> Outcome {
    let rows = sweep(beta_min, beta_max, grid)?;
    match format {
        Format::Csv => {
            let mut text = String::from(SweepRow::HEADER);
            for row in &rows {
                text.push('\n');
                text.push_str(&row.to_csv());
            }
            Ok(Report { text, code: 0 })
        }
        Format::Json => {
            let keys: Vec<&str> = SweepRow::HEADER.split(',').collect();
            let objects: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let csv = row.to_csv();
                    let cells = csv.splitn(keys.len(), ',');
                    let object = keys
                        .iter()
                        .zip(cells)
                        .map(|(k, v)| (k.to_string(), if v.is_empty() { Value::Null } else { json!(v) }))
                        .collect();
                    Value::Object(object)
                })
                .collect();
            Ok(Report::json(&Value::Array(objects), 0))
        }
    }
}

fn dispatch<S: Scalar>(verb: &Verb) -> Outcome {
    match verb {
        Verb::MapInfo { map, tolerance, out } => map_info::<S>(map, *tolerance, out),
        Verb::Iterate { map, x, n, out } => iterate_verb::<S>(map, x, *n, out),
        Verb::Validate { map, orbit, out } => validate::<S>(map, orbit, out),
        Verb::ShadowCheck { map, orbit, epsilon, max_pieces, samples, out } => {
            shadow_check::<S>(map, orbit, epsilon, *max_pieces, *samples, out)
        }
        Verb::Witness { map, epsilon, delta, k, max_pieces, out } => {
            witness::<S>(map, epsilon, delta.as_deref(), *k, *max_pieces, out)
        }
        Verb::Renormalize { map, out } => renormalize_verb::<S>(map, out),
        Verb::Expand { map, x, n, out } => expand::<S>(map, x, *n, out),
        Verb::Sweep { beta_min, beta_max, grid, format, .. } => {
            sweep_verb(*beta_min, *beta_max, *grid, format.unwrap_or(Format::Csv))
        }
    }
}

fn destination(verb: &Verb) -> Option<&PathBuf> {
    match verb {
        Verb::MapInfo { out, .. }
        | Verb::Iterate { out, .. }
        | Verb::Validate { out, .. }
        | Verb::ShadowCheck { out, .. }
        | Verb::Witness { out, .. }
        | Verb::Renormalize { out, .. }
        | Verb::Expand { out, .. } => out.out.as_ref(),
        Verb::Sweep { out, .. } => out.as_ref(),
    }
}

fn float_mode(verb: &Verb) -> bool {
    match verb {
        Verb::MapInfo { map, .. }
        | Verb::Iterate { map, .. }
        | Verb::Validate { map, .. }
        | Verb::ShadowCheck { map, .. }
        | Verb::Witness { map, .. }
        | Verb::Renormalize { map, .. }
        | Verb::Expand { map, .. } => map.float,
        Verb::Sweep { .. } => true,
    }
}

fn fail(failure: &Failure) -> ExitCode {
    let line = json!({ "error": failure.kind, "message": failure.message });
    eprintln!("{line}");
    ExitCode::from(failure.code)
}

fn emit(text: &str, path: Option<&PathBuf>) -> std::result::Result<(), Failure> {
    let io = |e: std::io::Error| Failure { kind: "Io".into(), message: e.to_string(), code: 2 };
    match path {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(io),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(io)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let message: Vec<&str> =
                rendered.lines().map(str::trim).take_while(|l| !l.is_empty()).collect();
            return fail(&Failure::usage(message.join(" ").trim_start_matches("error: ")));
        }
    };
    let outcome = if float_mode(&cli.verb) { dispatch::<f64>(&cli.verb) } else { dispatch::<Rational>(&cli.verb) };
    match outcome.and_then(|report| emit(&report.text, destination(&cli.verb)).map(|_| report.code)) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => fail(&failure),
    }
}
