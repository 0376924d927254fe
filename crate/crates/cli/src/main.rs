use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use noded_core::degeneration::{degenerate, DegenerationConfig, FamilySample};
use noded_core::function::NodedFunction;
use noded_core::io::{self, FamilySetDoc, FixedPointsDoc, MapDoc, NodedDoc, ReportDoc, ReportSetDoc, Tagged};
use noded_core::obstruction::{self, Prop1Params, SweepConfig, SweepTarget};
use noded_core::reopening::{reopen_components, reopen_family, ReopenConfig};
use noded_core::{dynamical_index, from_fixed_point_data, Error, Exact, Mp, Point, Scalar, DEFAULT_PRECISION};
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "noded", version, about = "Rational maps with nodes: parametrize, degenerate, reopen, obstruct")]
struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Working precision in bits.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the map with given fixed points and indices.
    Parametrize {
        /// Fixed-point JSON; stdin when absent or "-".
        input: Option<String>,
        /// Exact rational arithmetic instead of floating point.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Limit of a family of maps (family JSON, family set, or builtin "prop1").
    Degenerate {
        input: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Builtin schedule: "k0:len" (doubling) or "k1,k2,...".
        #[arg(long)]
        schedule: Option<String>,
        /// Residual trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Approximating families of a noded function.
    Reopen {
        input: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// "t0:steps", with ε_ν = ν 2^-t.
        #[arg(long)]
        schedule: Option<String>,
        /// One family per ordinary component, even when no joint family exists.
        #[arg(long)]
        per_component: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Search for approximations of a boundary point: "example2", "control",
    /// "remark", or a target JSON file.
    Obstruction {
        target: String,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        /// Comma separated k values.
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Total objective evaluations allowed.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    body: serde_json::Value,
}

type Outcome = Result<(), Failure>;

fn fail(code: u8, kind: &str, message: impl Into<String>) -> Failure {
    Failure { code, body: json!({"schema": io::SCHEMA, "error": kind, "message": message.into()}) }
}

fn from_error(e: Error) -> Failure {
    let violation = |kind: &str, detail: String| {
        Failure {
            code: 2,
            body: json!({"schema": io::SCHEMA, "error": "validation", "violations": [{"kind": kind, "detail": detail}]}),
        }
    };
    match e {
        Error::Validation(v) => Failure {
            code: 2,
            body: json!({"schema": io::SCHEMA, "error": "validation", "violations": v}),
        },
        Error::IndexFormula(s) => violation("index-formula", format!("indices sum to {s}")),
        Error::Collision(i, j) => violation("collision", format!("points {i} and {j} coincide")),
        Error::TooFewPoints(n) => violation("too-few-points", format!("{n} points")),
        Error::DegenerateIndex(i) => violation("zero-index", format!("index {i} vanishes")),
        Error::NoLimit(m) => fail(3, "no-limit", m),
        Error::InconsistentLimit(m) => fail(3, "inconsistent-limit", m),
        Error::Unsupported(m) => fail(4, "unsupported", format!("unsupported: {m}")),
        Error::Budget(m) => fail(5, "budget", m),
        Error::Input(m) => fail(2, "schema", m),
        other => fail(2, "validation", other.to_string()),
    }
}

fn read_input(input: &Option<String>) -> Result<String, Failure> {
    let text = match input.as_deref() {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| fail(2, "io", e.to_string()))?;
            s
        }
        Some(path) => std::fs::read_to_string(path).map_err(|e| fail(2, "io", format!("{path}: {e}")))?,
    };
    if text.trim().is_empty() {
        return Err(fail(2, "schema", "empty input"));
    }
    Ok(text)
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| fail(2, "schema", e.to_string()))
}

fn write_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    write_text(&text, out)
}

fn write_text(text: &str, out: &Option<PathBuf>) -> Outcome {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(2, "io", format!("{}: {e}", p.display()))),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(fail(2, "io", e.to_string())),
            _ => Ok(()),
        },
    }
}

fn check_precision(p: u32) -> Outcome {
    if p < 64 {
        return Err(fail(2, "config", "precision must be at least 64 bits"));
    }
    Ok(())
}

fn parse_list(spec: &str) -> Result<Vec<u64>, Failure> {
    let bad = || fail(2, "config", format!("malformed schedule {spec:?}"));
    if let Some((a, b)) = spec.split_once(':') {
        let k0: u64 = a.trim().parse().map_err(|_| bad())?;
        let len: usize = b.trim().parse().map_err(|_| bad())?;
        if k0 == 0 || len < 3 || k0.checked_shl(len as u32 - 1).is_none_or(|x| x >= 1 << 62) {
            return Err(bad());
        }
        return Ok(obstruction::geometric_schedule(k0, len));
    }
    let ks: Vec<u64> = spec.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] == 0 {
        return Err(bad());
    }
    Ok(ks)
}

fn parametrize_with<S: Scalar>(ctx: S::Ctx, text: &str, out: &Option<PathBuf>) -> Outcome {
    let doc: FixedPointsDoc = parse(text)?;
    let data = doc.to_data::<S>(ctx).map_err(from_error)?;
    let f = from_fixed_point_data(&data).map_err(from_error)?;
    let fixed = data
        .points
        .iter()
        .map(|p| {
            let pt = Point::Finite(p.clone());
            let idx = dynamical_index(&f, &pt).map_err(from_error)?;
            Ok((pt, idx))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    write_json(&MapDoc::new(&f, &fixed), out)
}

fn cmd_parametrize(input: &Option<String>, exact: bool, common: &Common) -> Outcome {
    check_precision(common.precision)?;
    let text = read_input(input)?;
    if exact {
        parametrize_with::<Exact>((), &text, &common.out)
    } else {
        parametrize_with::<Mp>(common.precision, &text, &common.out)
    }
}

fn merged_trace(traces: &[Vec<(u64, f64)>]) -> Vec<(u64, f64)> {
    let mut m = std::collections::BTreeMap::new();
    for t in traces {
        for &(k, r) in t {
            let e = m.entry(k).or_insert(0.0f64);
            *e = e.max(r);
        }
    }
    m.into_iter().collect()
}

fn cmd_degenerate(input: &Option<String>, tol: f64, schedule: &Option<String>, csv: &Option<PathBuf>, common: &Common) -> Outcome {
    check_precision(common.precision)?;
    if !(tol > 0.0) {
        return Err(fail(2, "config", "tolerance must be positive"));
    }
    let ctx = common.precision;
    let cfg = DegenerationConfig { tol, ..DegenerationConfig::default() };
    if input.as_deref() == Some("prop1") {
        let ks = parse_list(schedule.as_deref().unwrap_or("32:6"))?;
        let p = Prop1Params::<Mp>::standard(ctx);
        let r = obstruction::verify_prop1(&p, &ks, &cfg).map_err(from_error)?;
        let mut doc = ReportDoc::from_report(&r.report);
        doc.residual_trace = r.trace.clone();
        doc.matches_target = Some(r.stratum_matches);
        if let Some(path) = csv {
            write_text(&doc.csv(), &Some(path.clone()))?;
        }
        return write_json(&doc, &common.out);
    }
    if schedule.is_some() {
        return Err(fail(2, "config", "--schedule applies to builtin families only"));
    }
    let text = read_input(input)?;
    let docs = io::parse_families(&text).map_err(from_error)?;
    let mut reports = Vec::new();
    for d in &docs {
        let (samples, target): (Vec<FamilySample<Mp>>, Option<NodedFunction<Mp>>) =
            d.to_samples(ctx).map_err(from_error)?;
        let r = degenerate(&samples, &cfg, target.as_ref()).map_err(from_error)?;
        let mut doc = ReportDoc::from_report(&r);
        doc.component = d.component;
        reports.push(doc);
    }
    if let Some(path) = csv {
        let traces: Vec<_> = reports.iter().map(|r| r.residual_trace.clone()).collect();
        write_text(&io::trace_csv(&merged_trace(&traces)), &Some(path.clone()))?;
    }
    if reports.len() == 1 && text.contains("\"samples\"") && !text.contains("\"families\"") {
        write_json(&reports.pop().unwrap(), &common.out)
    } else {
        for r in reports.iter_mut() {
            r.schema = None;
        }
        write_json(&ReportSetDoc { schema: Some(io::SCHEMA.into()), reports }, &common.out)
    }
}

fn cmd_reopen(input: &Option<String>, seed: u64, schedule: &Option<String>, per_component: bool, common: &Common) -> Outcome {
    check_precision(common.precision)?;
    let mut cfg = ReopenConfig { seed, ..ReopenConfig::default() };
    if let Some(spec) = schedule {
        let bad = || fail(2, "config", format!("malformed schedule {spec:?}; expected t0:steps"));
        let (a, b) = spec.split_once(':').ok_or_else(bad)?;
        cfg.t0 = a.trim().parse().map_err(|_| bad())?;
        cfg.steps = b.trim().parse().map_err(|_| bad())?;
    }
    let text = read_input(input)?;
    let doc: NodedDoc = parse(&text)?;
    let (nf, _) = doc.to_function::<Mp>(common.precision).map_err(from_error)?;
    let fams = if per_component { reopen_components(&nf, &cfg) } else { reopen_family(&nf, &cfg) };
    let fams = fams.map_err(from_error)?;
    write_json(&FamilySetDoc::from_families(&fams), &common.out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_obstruction(
    target: &str,
    starts: usize,
    schedule: &Option<String>,
    seed: u64,
    budget: Option<u64>,
    margin: f64,
    csv: &Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Outcome {
    let ks = match schedule {
        Some(s) => parse_list(s)?,
        None => SweepConfig::default().schedule,
    };
    if target == "remark" {
        let r = obstruction::remark_check(&ks, &[0.25, 0.5, 1.0], 8, margin);
        return write_json(&Tagged::new(r), out);
    }
    let tgt = match target {
        "example2" => SweepTarget::example2(),
        "control" => SweepTarget::control(&Prop1Params::standard(())),
        path => {
            let text = read_input(&Some(path.to_string()))?;
            let tagged: Tagged<SweepTarget> = parse(&text)?;
            tagged.check().map_err(from_error)?;
            tagged.body
        }
    };
    let cfg = SweepConfig { starts: starts.max(1), schedule: ks, seed, margin, budget, ..SweepConfig::default() };
    let report = obstruction::example2_sweep(&tgt, &cfg);
    if let Some(path) = csv {
        write_text(&report.csv(), &Some(path.clone()))?;
    }
    let exhausted = report.budget_exhausted;
    write_json(&Tagged::new(report), out)?;
    if exhausted {
        return Err(fail(5, "budget", "evaluation budget exhausted; partial report written"));
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| fail(2, "config", e.to_string()))?;
    }
    match &cli.command {
        Command::Parametrize { input, exact, common } => cmd_parametrize(input, *exact, common),
        Command::Degenerate { input, tol, schedule, csv, common } => cmd_degenerate(input, *tol, schedule, csv, common),
        Command::Reopen { input, seed, schedule, per_component, common } => {
            cmd_reopen(input, *seed, schedule, *per_component, common)
        }
        Command::Obstruction { target, starts, schedule, seed, budget, margin, csv, out } => {
            cmd_obstruction(target, *starts, schedule, *seed, *budget, *margin, csv, out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", serde_json::to_string_pretty(&f.body).expect("serializable"));
            ExitCode::from(f.code)
        }
    }
}
