use std::path::Path;

use mahler_core::algebra::{format_rational, parse_rational};
use mahler_core::cfrac::{cf_expand, CfConfig};
use mahler_core::exponent::{compute_mu, ExponentConfig, ExponentResult, MuValue};
use mahler_core::gaps::{classify, enumerate_gaps, iterate_primitive, GapRecord};
use mahler_core::numeric::{
    build_approx, csv_rows, empirical_exponent, eval_f, ApproximationRecord, CSV_HEADER,
};
use mahler_core::rationality::{rationality_verdict, RationalityConfig};
use mahler_core::series::{expand, expand_all, infer_degree, LaurentSeries};
use mahler_core::Error;
use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command, RunArgs};
use crate::equation::{EquationFile, InputError};
use crate::plot::trend_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INADMISSIBLE: i32 = 3;

pub const SCHEMA: u32 = 1;

/// Leading coefficients computed up front; the series extends itself as
/// later stages ask for more.
const INITIAL_TERMS: usize = 64;

/// Digits of f(b) quoted in a report.
const REPORT_DIGITS: usize = 60;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_USAGE,
            CliError::Core(_) | CliError::Write { .. } => EXIT_FAILURE,
        }
    }
}

/// What a command prints and the status it exits with.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub status: i32,
}

impl Output {
    fn json(value: &Value, status: i32) -> Self {
        let mut stdout = serde_json::to_string_pretty(value).expect("json serializes");
        stdout.push('\n');
        Output { stdout, status }
    }
}

/// Validated run settings.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub horizon: i64,
    pub steps: usize,
    pub window: usize,
    pub digits: u32,
    pub b_values: Vec<BigInt>,
    pub emit: Emit,
}

/// Output selection for `report`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Emit {
    pub report: bool,
    pub report_path: Option<String>,
    pub csv: Option<String>,
    pub gaps: bool,
    pub series: bool,
}

impl Emit {
    pub fn parse(specs: &[String]) -> Result<Self, InputError> {
        let mut out = Emit {
            report: specs.is_empty(),
            ..Emit::default()
        };
        for spec in specs.iter().flat_map(|s| s.split(',')) {
            let (kind, path) = match spec.split_once('=') {
                Some((k, p)) => (k.trim(), Some(p.trim().to_string())),
                None => (spec.trim(), None),
            };
            match (kind, path) {
                ("report", p) => {
                    out.report = true;
                    out.report_path = p;
                }
                ("csv", Some(p)) => out.csv = Some(p),
                ("csv", None) => return Err(InputError::Invalid("--emit csv needs a path: csv=PATH".into())),
                ("gaps", None) => out.gaps = true,
                ("series", None) => out.series = true,
                _ => {
                    return Err(InputError::Invalid(format!(
                        "unknown --emit value {spec:?}; expected report[=PATH], csv=PATH, gaps or series"
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl RunConfig {
    pub fn from_args(args: &RunArgs) -> Result<Self, InputError> {
        if args.horizon < 1 {
            return Err(InputError::Invalid("--horizon must be at least 1".into()));
        }
        if args.digits < 50 {
            return Err(InputError::Invalid("--digits must be at least 50".into()));
        }
        if args.window < 1 {
            return Err(InputError::Invalid("--window must be at least 1".into()));
        }
        let mut b_values = Vec::new();
        for text in &args.b {
            let r = parse_rational(text)
                .map_err(|e| InputError::Invalid(format!("--b {text}: {e}")))?;
            if !r.is_integer() {
                return Err(InputError::Invalid(format!("--b {text} is not an integer")));
            }
            let b = r.to_integer();
            if b.abs() < BigInt::from(2) {
                return Err(InputError::Invalid(format!(
                    "--b {text}: |b| must be at least 2"
                )));
            }
            b_values.push(b);
        }
        if b_values.is_empty() {
            b_values.push(BigInt::from(2));
        }
        Ok(RunConfig {
            horizon: args.horizon,
            steps: args.steps,
            window: args.window,
            digits: args.digits,
            b_values,
            emit: Emit::parse(&args.emit)?,
        })
    }

    fn exponent_config(&self, rationality: bool) -> ExponentConfig {
        ExponentConfig {
            horizon: self.horizon,
            steps: self.steps,
            window: self.window,
            rationality: rationality.then(RationalityConfig::default),
            ..ExponentConfig::default()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let config = RunConfig::from_args(&cli.run)?;
    let mut file = EquationFile::read(cli.command.file())?;
    file.add_seeds(&cli.run.seed)?;
    match &cli.command {
        Command::Expand { n, text, .. } => cmd_expand(&file, *n, *text),
        Command::Cf { degree, .. } => cmd_cf(&file, *degree),
        Command::Gaps { max_degree, .. } => cmd_gaps(&file, &config, *max_degree),
        Command::Mu { no_rationality, .. } => cmd_mu(&file, &config, !no_rationality),
        Command::Eval { .. } => cmd_eval(&file, &config),
        Command::CheckRationality { .. } => cmd_check_rationality(&file),
        Command::Report { levels, .. } => cmd_report(&file, &config, *levels),
    }
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m
}

/// The series solution: the file's `K` if given, otherwise the first
/// balancing degree (largest first) that expands.
pub fn solve(file: &EquationFile, n: usize) -> Result<LaurentSeries, CliError> {
    if let Some(k) = file.degree {
        return Ok(expand(&file.equation, k, n, &file.seeds)?);
    }
    let mut first_err = None;
    for (_, result) in expand_all(&file.equation, n, &file.seeds) {
        match result {
            Ok(series) => return Ok(series),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err
        .unwrap_or_else(|| Error::Inconsistent("no degree K balances the equation".into()))
        .into())
}

pub fn cmd_expand(file: &EquationFile, n: usize, text: bool) -> Result<Output, CliError> {
    let candidates = infer_degree(&file.equation);
    let degrees = match file.degree {
        Some(k) => vec![k],
        None => candidates.clone(),
    };
    let results: Vec<(i64, Result<LaurentSeries, Error>)> = degrees
        .iter()
        .map(|&k| (k, expand(&file.equation, k, n.max(1), &file.seeds)))
        .collect();
    if let Some(err) = results.iter().all(|(_, r)| r.is_err()).then(|| {
        results
            .iter()
            .find_map(|(_, r)| r.as_ref().err().cloned())
            .unwrap_or_else(|| Error::Inconsistent("no degree K balances the equation".into()))
    }) {
        return Err(err.into());
    }
    if text {
        let mut out = String::new();
        for (k, r) in &results {
            match r {
                Ok(s) => {
                    let coeffs: Vec<String> =
                        s.coeffs().iter().take(n).map(format_rational).collect();
                    out.push_str(&format!("K = {k}: {}\n", coeffs.join(", ")));
                }
                Err(e) => out.push_str(&format!("K = {k}: {e}\n")),
            }
        }
        return Ok(Output {
            stdout: out,
            status: EXIT_OK,
        });
    }
    let mut m = header("expand");
    m.insert("equation".into(), file.to_json());
    m.insert("candidates".into(), json!(candidates));
    let expansions: Vec<Value> = results
        .iter()
        .map(|(k, r)| match r {
            Ok(s) => json!({ "K": k, "coeffs": s.coeffs().iter().take(n).map(format_rational).collect::<Vec<_>>() }),
            Err(e) => json!({ "K": k, "error": e.to_string() }),
        })
        .collect();
    m.insert("expansions".into(), json!(expansions));
    Ok(Output::json(&Value::Object(m), EXIT_OK))
}

pub fn cmd_cf(file: &EquationFile, degree: i64) -> Result<Output, CliError> {
    let mut series = solve(file, INITIAL_TERMS)?;
    let cf = cf_expand(&mut series, degree, &CfConfig::default())?;
    let mut m = header("cf");
    m.insert("K".into(), json!(series.degree()));
    m.insert(
        "expansion".into(),
        serde_json::to_value(&cf).expect("serializes"),
    );
    Ok(Output::json(&Value::Object(m), EXIT_OK))
}

fn gap_row(rec: &GapRecord, r_g: &[i64]) -> Value {
    json!({
        "u": rec.gap.u,
        "v": rec.gap.v,
        "big": rec.big,
        "primitive": rec.primitive,
        "successor_of": rec.successor_of,
        "r_g_sequence": r_g,
    })
}

pub fn cmd_gaps(
    file: &EquationFile,
    config: &RunConfig,
    max_degree: i64,
) -> Result<Output, CliError> {
    let eq = &file.equation;
    let mut series = solve(file, INITIAL_TERMS)?;
    let cf = cf_expand(&mut series, config.horizon + 1, &CfConfig::default())?;
    let records = classify(enumerate_gaps(&cf, config.horizon)?, eq)?;
    let mut rows = Vec::new();
    for rec in &records {
        let r_g = if rec.primitive {
            iterate_primitive(rec, eq, config.steps, max_degree)?.r_g()
        } else {
            Vec::new()
        };
        rows.push(gap_row(rec, &r_g));
    }
    let mut m = header("gaps");
    m.insert("K".into(), json!(series.degree()));
    m.insert("horizon".into(), json!(config.horizon));
    m.insert(
        "primitive_size_bound".into(),
        json!(format_rational(&mahler_core::gaps::primitive_size_bound(
            eq
        ))),
    );
    m.insert("gaps".into(), json!(rows));
    Ok(Output::json(&Value::Object(m), EXIT_OK))
}

fn result_json(b: &BigInt, r: &ExponentResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("b".into(), json!(b.to_string()));
    if let Value::Object(fields) = serde_json::to_value(r).expect("serializes") {
        m.extend(fields);
    }
    m
}

fn status_for(results: &[ExponentResult]) -> i32 {
    if results
        .iter()
        .any(|r| !r.certificate.admissibility.admissible)
    {
        EXIT_INADMISSIBLE
    } else {
        EXIT_OK
    }
}

/// One object per `b`, flattened into the top level when there is one `b`.
fn merge_results(mut top: Map<String, Value>, per_b: Vec<Map<String, Value>>) -> Value {
    if per_b.len() == 1 {
        top.extend(per_b.into_iter().next().expect("one result"));
    } else {
        top.insert(
            "results".into(),
            Value::Array(per_b.into_iter().map(Value::Object).collect()),
        );
    }
    Value::Object(top)
}

pub fn cmd_mu(
    file: &EquationFile,
    config: &RunConfig,
    rationality: bool,
) -> Result<Output, CliError> {
    let mut series = solve(file, INITIAL_TERMS)?;
    let cfg = config.exponent_config(rationality);
    let mut results = Vec::new();
    for b in &config.b_values {
        results.push(compute_mu(&file.equation, &mut series, b, &cfg)?);
    }
    let mut top = header("mu");
    top.insert("K".into(), json!(series.degree()));
    let per_b = config
        .b_values
        .iter()
        .zip(&results)
        .map(|(b, r)| result_json(b, r))
        .collect();
    Ok(Output::json(
        &merge_results(top, per_b),
        status_for(&results),
    ))
}

pub fn cmd_eval(file: &EquationFile, config: &RunConfig) -> Result<Output, CliError> {
    let mut series = solve(file, INITIAL_TERMS)?;
    let mut per_b = Vec::new();
    for b in &config.b_values {
        let e = eval_f(&mut series, b, config.digits)?;
        let mut m = Map::new();
        m.insert("b".into(), json!(b.to_string()));
        m.insert("digits".into(), json!(config.digits));
        m.insert(
            "value".into(),
            json!(e.value.to_decimal(config.digits as usize)),
        );
        m.insert("terms".into(), json!(e.terms));
        m.insert("tail_log10".into(), json!(e.tail_log10));
        m.insert("tail_heuristic".into(), json!(e.heuristic));
        per_b.push(m);
    }
    let mut top = header("eval");
    top.insert("K".into(), json!(series.degree()));
    Ok(Output::json(&merge_results(top, per_b), EXIT_OK))
}

pub fn cmd_check_rationality(file: &EquationFile) -> Result<Output, CliError> {
    let series = solve(file, INITIAL_TERMS)?;
    let report = rationality_verdict(&file.equation, &series, &RationalityConfig::default())?;
    let mut m = header("check-rationality");
    m.insert("K".into(), json!(series.degree()));
    m.insert(
        "rationality".into(),
        serde_json::to_value(&report).expect("serializes"),
    );
    Ok(Output::json(&Value::Object(m), EXIT_OK))
}

/// Rational approximations `p_{k,m}(b) / q_{k,m}(b)` built from the first
/// big gap with a nonconstant denominator.
pub struct Approximations {
    pub gap: (i64, i64),
    pub records: Vec<ApproximationRecord>,
    pub stopped: Option<String>,
}

pub fn approximations(
    file: &EquationFile,
    series: &mut LaurentSeries,
    b: &BigInt,
    digits: u32,
    horizon: i64,
    levels: u32,
) -> Result<Option<Approximations>, CliError> {
    let eq = &file.equation;
    let cf = cf_expand(series, horizon + 1, &CfConfig::default())?;
    let records = classify(enumerate_gaps(&cf, horizon)?, eq)?;
    let Some(rec) = records.iter().find(|r| r.big && r.gap.u >= 1) else {
        return Ok(None);
    };
    let value = eval_f(series, b, digits)?;
    let mut out = Approximations {
        gap: (rec.gap.u, rec.gap.v),
        records: Vec::new(),
        stopped: None,
    };
    for m in 1..=levels {
        match build_approx(&rec.convergent, eq, b, m, &value) {
            Ok(r) => out.records.push(r),
            Err(e @ (Error::PrecisionExhausted(_) | Error::ZeroDivisor)) => {
                out.stopped = Some(format!("stopped at m = {m}: {e}"));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(out))
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_string(),
        source,
    })
}

/// `PATH` for one `b`, or `stem-b<b>.ext` when several are written.
fn per_b_path(path: &str, b: &BigInt, many: bool) -> String {
    if !many {
        return path.to_string();
    }
    let p = Path::new(path);
    let stem = p
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("approximations");
    let name = match p.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-b{b}.{ext}"),
        None => format!("{stem}-b{b}"),
    };
    p.with_file_name(name).to_string_lossy().into_owned()
}

fn csv_text(records: &[ApproximationRecord]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Write {
        path: "csv buffer".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in csv_rows(records) {
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write {
        path: "csv buffer".into(),
        source: std::io::Error::other(e.to_string()),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn mu_as_f64(mu: &MuValue) -> Option<f64> {
    match mu {
        MuValue::Point(r) => Some(mahler_core::algebra::to_f64(r)),
        MuValue::Interval { .. } => None,
    }
}

pub fn cmd_report(
    file: &EquationFile,
    config: &RunConfig,
    levels: u32,
) -> Result<Output, CliError> {
    let eq = &file.equation;
    let emit = &config.emit;
    let mut series = solve(file, INITIAL_TERMS)?;
    let cfg = config.exponent_config(true);
    let mut top = header("report");
    top.insert("equation".into(), file.to_json());
    top.insert("candidates".into(), json!(infer_degree(eq)));
    top.insert("K".into(), json!(series.degree()));
    if emit.series {
        let coeffs: Vec<String> = series
            .coeffs()
            .iter()
            .take(40)
            .map(format_rational)
            .collect();
        top.insert("series".into(), json!(coeffs));
    }
    let many = config.b_values.len() > 1;
    let mut results = Vec::new();
    let mut per_b = Vec::new();
    for b in &config.b_values {
        let r = compute_mu(eq, &mut series, b, &cfg)?;
        let mut m = result_json(b, &r);
        if emit.gaps {
            let rows: Vec<Value> = r
                .certificate
                .gaps
                .iter()
                .map(|g| {
                    let r_g = r
                        .certificate
                        .sequences
                        .iter()
                        .find(|s| s.start.u == g.u && s.start.v == g.v)
                        .map(|s| s.r_g.clone())
                        .unwrap_or_default();
                    json!({ "u": g.u, "v": g.v, "big": g.big, "primitive": g.primitive, "r_g_sequence": r_g })
                })
                .collect();
            m.insert("gaps".into(), json!(rows));
        }
        let value = eval_f(&mut series, b, config.digits)?;
        m.insert("value".into(), json!(value.value.to_decimal(REPORT_DIGITS)));
        match approximations(file, &mut series, b, config.digits, config.horizon, levels)? {
            Some(a) => {
                let trend: Vec<Value> = a
                    .records
                    .iter()
                    .map(|rec| json!({ "m": rec.m, "log10_q": rec.log_abs_q / std::f64::consts::LN_10, "ratio": rec.ratio() }))
                    .collect();
                m.insert(
                    "approximations".into(),
                    json!({
                        "gap": [a.gap.0, a.gap.1],
                        "trend": trend,
                        "empirical_exponent": empirical_exponent(&a.records),
                        "note": a.stopped,
                    }),
                );
                if let Some(path) = &emit.csv {
                    let path = per_b_path(path, b, many);
                    write_file(&path, &csv_text(&a.records)?)?;
                    let points: Vec<(f64, f64)> =
                        a.records.iter().map(|r| (r.m as f64, r.ratio())).collect();
                    let svg = trend_svg(
                        &format!("b = {b}, gap [{}, {}]", a.gap.0, a.gap.1),
                        &points,
                        mu_as_f64(&r.mu),
                    );
                    write_file(
                        &Path::new(&path).with_extension("svg").to_string_lossy(),
                        &svg,
                    )?;
                }
            }
            None => {
                m.insert("approximations".into(), Value::Null);
            }
        }
        per_b.push(m);
        results.push(r);
    }
    let report = merge_results(top, per_b);
    let status = status_for(&results);
    let mut stdout = String::new();
    if emit.report {
        let text = serde_json::to_string_pretty(&report).expect("serializes") + "\n";
        match &emit.report_path {
            Some(path) => write_file(path, &text)?,
            None => stdout = text,
        }
    }
    Ok(Output { stdout, status })
}
