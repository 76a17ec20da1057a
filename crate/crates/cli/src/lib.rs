//! Command-line front end for `eqpsg`: sweeps, quasi-polynomial fits,
//! Betti numbers, the Bresinsky check and Presburger evaluation.

use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use eqpsg::eqp::{self, PeriodicSet, QuasiPolynomial, DEFAULT_HOLDOUT, DEFAULT_P_MAX};
use eqpsg::homology::{self, FieldSpec};
use eqpsg::presburger::{self, Builtin, Formula};
use eqpsg::sweep::{self, Cell, Invariant, Sweep, SweepOptions, Value as CellValue};
use eqpsg::{ParametricFamily, PolynomialZ};

pub const SCHEMA: u64 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] eqpsg::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

macro_rules! core_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}
core_error!(
    eqpsg::polyfam::FamilyError,
    eqpsg::homology::HomologyError,
    eqpsg::eqp::EqpError,
    eqpsg::presburger::PresburgerError
);

#[derive(Debug, Parser)]
#[command(name = "eqpsg", version, about = "Invariants of parametric semigroups and their quasi-polynomial fits")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Worker threads for sweeps over n.
    #[arg(long, global = true, env = "EQPSG_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate invariants at every n of a range.
    Invariants(SweepArgs),
    /// Fit eventual quasi-polynomials to invariants over a window of n.
    EqpFit(FitArgs),
    /// Coarse Betti numbers of K[S_n].
    Betti(BettiArgs),
    /// Check the lower bound beta_1 >= 2n^(d/2) for the Bresinsky-type family.
    Bresinsky(BresinskyArgs),
    /// Evaluate a parametric Presburger formula.
    Ppa(PpaArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Family file, `bresinsky:<d>`, or inline generators such as "n+3, n+5, n+7".
    #[arg(long)]
    pub family: String,
    /// Range `lo..hi` (inclusive) or a single n.
    #[arg(long, default_value = "0", value_parser = parse_range)]
    pub n: (u64, u64),
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_parser = parse_invariant, value_delimiter = ',', default_value = "frobenius,genus,type")]
    pub invariants: Vec<Invariant>,
    #[arg(long, value_parser = parse_field, default_value = "q")]
    pub field: FieldSpec,
    /// Scan bound for delta_count instead of the exact algorithm.
    #[arg(long)]
    pub delta_bound: Option<u64>,
    /// Box side for Betti numbers of affine families.
    #[arg(long)]
    pub degree_cap: Option<u64>,
    /// Divide by the gcd when S_n is not numerical.
    #[arg(long)]
    pub normalize: bool,
    /// Element m(n) for length_count and delta_elem_count.
    #[arg(long, value_parser = parse_poly)]
    pub element: Option<PolynomialZ>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = DEFAULT_P_MAX)]
    pub pmax: usize,
    /// Defaults to the sum of the generator degrees.
    #[arg(long)]
    pub dmax: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_HOLDOUT)]
    pub holdout: f64,
    /// Also compute n up to this value and compare with the fits.
    #[arg(long)]
    pub extrapolate: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BettiArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 1)]
    pub i: usize,
    /// Defaults to q for i = 1 and to both q and f2 otherwise.
    #[arg(long, value_parser = parse_field)]
    pub field: Option<FieldSpec>,
    #[arg(long)]
    pub degree_cap: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct BresinskyArgs {
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[arg(long, default_value = "2..5", value_parser = parse_range)]
    pub n: (u64, u64),
    /// Also compute the complete beta_1.
    #[arg(long)]
    pub coarse: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PpaArgs {
    /// Formula text, or a path to a `.ppa` file.
    #[arg(required_unless_present = "builtin")]
    pub formula: Option<String>,
    /// Named formula over `--family` instead of formula text.
    #[arg(long, value_parser = parse_builtin, requires = "family")]
    pub builtin: Option<Builtin>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value = "0", value_parser = parse_range)]
    pub n: (u64, u64),
    /// Quantifier window W; defaults to 4 times the largest constant.
    #[arg(long)]
    pub window: Option<u64>,
    /// Value of a free variable, `x=3`; repeatable.
    #[arg(long, value_parser = parse_assignment)]
    pub assign: Vec<(String, i64)>,
}

pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("expected `lo..hi` or a single integer, got {s:?}");
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?)
        }
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn parse_invariant(s: &str) -> Result<Invariant, String> {
    s.trim().parse().map_err(|e: eqpsg::Error| format!("{e}; known: {}", Invariant::NAMES.join(", ")))
}

fn parse_field(s: &str) -> Result<FieldSpec, String> {
    s.parse().map_err(|e: homology::HomologyError| e.to_string())
}

fn parse_poly(s: &str) -> Result<PolynomialZ, String> {
    s.parse().map_err(|e: eqpsg::polyfam::PolyError| e.to_string())
}

fn parse_builtin(s: &str) -> Result<Builtin, String> {
    s.parse().map_err(|e: presburger::PresburgerError| format!("{e}; known: {}", Builtin::NAMES.join(", ")))
}

fn parse_assignment(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected `name=value`, got {s:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad integer in {s:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// A file path, `bresinsky:<d>`, or inline generators.
pub fn load_family(spec: &str) -> Result<ParametricFamily, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(ParametricFamily::parse_file(&read(path)?)?);
    }
    if let Some(d) = spec.strip_prefix("bresinsky:") {
        let d: usize = d.trim().parse().map_err(|_| CliError::Usage(format!("bad degree in {spec:?}")))?;
        if d == 0 || d % 2 == 1 {
            return Err(CliError::Usage(format!("bresinsky degree must be even and positive, got {d}")));
        }
        return Ok(ParametricFamily::bresinsky(d));
    }
    Ok(ParametricFamily::parse_inline(spec)?)
}

/// Rows of named columns plus a few header fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub meta: Vec<(&'static str, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// False when a module error was reported in a row or a verification failed.
    pub ok: bool,
}

impl Report {
    fn new(command: &'static str, columns: Vec<String>) -> Self {
        Report { command, meta: Vec::new(), columns, rows: Vec::new(), ok: true }
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        out.insert("schema".into(), json!(SCHEMA));
        out.insert("command".into(), json!(self.command));
        for (k, v) in &self.meta {
            out.insert((*k).into(), v.clone());
        }
        out.insert("ok".into(), json!(self.ok));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().cloned()).collect()))
            .collect();
        out.insert("rows".into(), Value::Array(rows));
        Value::Object(out)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(csv_cell)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_table(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| if v.is_null() { "-".to_string() } else { csv_cell(v) }).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].chars().count()).chain([self.columns[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |items: &[String]| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {}\n", csv_cell(v)));
        }
        out.push_str(&line(&self.columns));
        for r in &cells {
            out.push_str(&line(r));
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.to_json()).expect("serializable") + "\n",
            Format::Csv => self.to_csv(),
            Format::Table => self.to_table(),
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn cell_json(c: &Cell) -> Value {
    match c.value {
        None => Value::Null,
        Some(CellValue::Int(x)) => json!(x),
        Some(CellValue::Flag(b)) => json!(b),
    }
}

fn generators_json(g: &Option<Vec<Vec<u64>>>) -> Value {
    match g {
        None => Value::Null,
        Some(g) if g.iter().all(|v| v.len() == 1) => json!(g.iter().map(|v| v[0]).collect::<Vec<_>>()),
        Some(g) => json!(g),
    }
}

fn sweep_options(args: &SweepArgs) -> SweepOptions {
    SweepOptions {
        field: args.field,
        delta_bound: args.delta_bound,
        degree_cap: args.degree_cap,
        normalize: args.normalize,
        element: args.element.clone(),
    }
}

fn family_meta(fam: &ParametricFamily, (lo, hi): (u64, u64)) -> Vec<(&'static str, Value)> {
    vec![("family", json!(fam.label())), ("n_lo", json!(lo)), ("n_hi", json!(hi))]
}

pub fn cmd_invariants(args: &SweepArgs) -> Result<Report, CliError> {
    let fam = load_family(&args.family.family)?;
    let (lo, hi) = args.family.n;
    let s = sweep::sweep(&fam, lo, hi, &args.invariants, &sweep_options(args))?;
    let partial = s.rows.iter().any(|r| r.cells.iter().any(|c| !c.complete));
    let mut columns = vec!["n".to_string(), "generators".to_string()];
    columns.extend(args.invariants.iter().map(ToString::to_string));
    if partial {
        columns.push("incomplete".into());
    }
    let mut report = Report::new("invariants", columns);
    report.meta = family_meta(&fam, (lo, hi));
    report.meta.push(("field", json!(args.field.to_string())));
    for r in &s.rows {
        let mut row = vec![json!(r.n), generators_json(&r.generators)];
        row.extend(r.cells.iter().map(cell_json));
        if partial {
            let names: Vec<String> = s
                .invariants
                .iter()
                .zip(&r.cells)
                .filter(|(_, c)| !c.complete)
                .map(|(i, _)| i.to_string())
                .collect();
            row.push(if names.is_empty() { Value::Null } else { json!(names.join(" ")) });
        }
        report.rows.push(row);
    }
    Ok(report)
}

const FIT_COLUMNS: [&str; 12] = [
    "invariant",
    "kind",
    "period",
    "onset",
    "degree",
    "formula",
    "fit",
    "holdout_n",
    "holdout_match",
    "extrapolated",
    "extrapolation_match",
    "error",
];

fn describe_set(ps: &PeriodicSet, what: &str, n_lo: u64) -> String {
    let body = if ps.pattern.iter().all(|&b| !b) {
        format!("never {what}")
    } else if ps.pattern.iter().all(|&b| b) {
        format!("always {what}")
    } else {
        let rs: Vec<String> = (0..ps.period).filter(|&r| ps.pattern[r]).map(|r| r.to_string()).collect();
        format!("{what} iff n mod {} in {{{}}}", ps.period, rs.join(", "))
    };
    if ps.onset > n_lo {
        format!("for n >= {}: {body}", ps.onset)
    } else {
        body
    }
}

/// Last `ceil(holdout * N)` defined points, as the fitter reserves them.
fn holdout_points(points: &[(u64, bool)], holdout: f64) -> Vec<u64> {
    let held = (holdout * points.len() as f64).ceil() as usize;
    points[points.len() - held..].iter().map(|p| p.0).collect()
}

struct FitRow {
    values: Map<String, Value>,
    ok: bool,
}

impl FitRow {
    fn new(name: &str, kind: &str) -> Self {
        let mut values: Map<String, Value> = FIT_COLUMNS.iter().map(|c| (c.to_string(), Value::Null)).collect();
        values.insert("invariant".into(), json!(name));
        values.insert("kind".into(), json!(kind));
        FitRow { values, ok: true }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.values.insert(key.into(), v);
    }

    fn fail(&mut self, msg: String) {
        self.set("error", json!(msg));
        self.ok = false;
    }
}

fn fit_flags(name: &str, train: &[(u64, bool)], ext: &[(u64, bool)], args: &FitArgs, what: &str, n_lo: u64) -> FitRow {
    let mut row = FitRow::new(name, "periodic-set");
    match eqp::eventually_periodic_set_with(train, args.pmax, args.holdout) {
        Ok(ps) => {
            row.set("period", json!(ps.period));
            row.set("onset", json!(ps.onset));
            row.set("formula", json!(describe_set(&ps, what, n_lo)));
            row.set("fit", json!({"period": ps.period, "onset": ps.onset, "pattern": ps.pattern}));
            let held = holdout_points(train, args.holdout);
            let lookup = |n: u64| train.iter().find(|p| p.0 == n).map(|p| p.1);
            let held_ok = held.iter().all(|&n| ps.contains(n) == lookup(n));
            row.set("holdout_n", json!(held));
            row.set("holdout_match", json!(held_ok));
            if args.extrapolate.is_some() {
                let ext_ok = ext.iter().all(|&(n, b)| ps.contains(n) == Some(b));
                row.set("extrapolated", json!(ext.len()));
                row.set("extrapolation_match", json!(ext_ok));
                row.ok &= ext_ok;
            }
            row.ok &= held_ok;
        }
        Err(e) => row.fail(e.to_string()),
    }
    row
}

fn fit_values(
    fam: &ParametricFamily,
    inv: Invariant,
    train: &Sweep,
    ext: Option<&Sweep>,
    col: usize,
    args: &FitArgs,
    d_max: usize,
) -> FitRow {
    let mut row = FitRow::new(&inv.to_string(), "quasi-polynomial");
    let series = train.series(col);
    let qp = match eqp::fit(&series, args.pmax, d_max, args.holdout) {
        Ok(qp) => qp,
        Err(e) => {
            row.fail(e.to_string());
            return row;
        }
    };
    row.set("period", json!(qp.period));
    row.set("onset", json!(qp.onset));
    row.set("degree", json!(eqp::degree_of(&qp)));
    row.set("formula", json!(qp.to_string()));
    row.set("fit", qp.to_json());
    let defined: Vec<(u64, bool)> = series.defined().map(|(n, _)| (n, true)).collect();
    let held = holdout_points(&defined, args.holdout);
    let matches = |qp: &QuasiPolynomial, n: u64, s: &eqpsg::SampleSeries| match s.get(n) {
        None => true,
        Some(v) => qp.eval_integer(n).ok().flatten().as_ref() == Some(v),
    };
    let held_ok = held.iter().all(|&n| matches(&qp, n, &series));
    row.set("holdout_n", json!(held));
    row.set("holdout_match", json!(held_ok));
    row.ok &= held_ok;
    if let Some(ext) = ext {
        let es = ext.series(col);
        let checked: Vec<u64> = es.defined().map(|(n, _)| n).collect();
        let ext_ok = checked.iter().all(|&n| matches(&qp, n, &es));
        row.set("extrapolated", json!(checked.len()));
        row.set("extrapolation_match", json!(ext_ok));
        row.ok &= ext_ok;
    }
    if let Invariant::Betti(i) = inv {
        if fam.dim() == 1 {
            let samples: Vec<(u64, u64)> = series.defined().map(|(n, v)| (n, u64::try_from(v).unwrap_or(u64::MAX))).collect();
            if let Err(e) = homology::check_degree_bounds(fam, i, &qp, &samples) {
                row.fail(e.to_string());
            }
        }
    }
    row
}

pub fn cmd_eqp_fit(args: &FitArgs) -> Result<Report, CliError> {
    let sw = &args.sweep;
    let fam = load_family(&sw.family.family)?;
    let (lo, hi) = sw.family.n;
    let opts = sweep_options(sw);
    let mut invariants = sw.invariants.clone();
    if !invariants.contains(&Invariant::Numerical) {
        invariants.push(Invariant::Numerical);
    }
    let train = sweep::sweep(&fam, lo, hi, &invariants, &opts)?;
    let ext = match args.extrapolate {
        Some(e) if e > hi => Some(sweep::sweep(&fam, hi + 1, e, &invariants, &opts)?),
        Some(e) => return Err(CliError::Usage(format!("--extrapolate {e} must exceed the window end {hi}"))),
        None => None,
    };
    let d_max = args.dmax.unwrap_or_else(|| fam.degrees().iter().map(|&d| d.max(0) as usize).sum());
    let mut rows: Vec<FitRow> = sw
        .invariants
        .par_iter()
        .enumerate()
        .map(|(col, &inv)| {
            if inv.is_flag() {
                let e = ext.as_ref().map(|s| s.flags(col)).unwrap_or_default();
                fit_flags(&inv.to_string(), &train.flags(col), &e, args, &inv.to_string(), lo)
            } else {
                fit_values(&fam, inv, &train, ext.as_ref(), col, args, d_max)
            }
        })
        .collect();
    let num_col = train.column(Invariant::Numerical).expect("added above");
    let e = ext.as_ref().map(|s| s.flags(num_col)).unwrap_or_default();
    rows.push(fit_flags("defined", &train.flags(num_col), &e, args, "numerical", lo));

    let mut report = Report::new("eqp-fit", FIT_COLUMNS.iter().map(ToString::to_string).collect());
    report.meta = family_meta(&fam, (lo, hi));
    report.meta.push(("pmax", json!(args.pmax)));
    report.meta.push(("dmax", json!(d_max)));
    report.meta.push(("holdout", json!(eqp::rational_string(&holdout_ratio(args.holdout)))));
    if let Some(e) = args.extrapolate {
        report.meta.push(("extrapolate_to", json!(e)));
    }
    for r in rows {
        report.ok &= r.ok;
        report.rows.push(FIT_COLUMNS.iter().map(|c| r.values[*c].clone()).collect());
    }
    Ok(report)
}

/// The holdout fraction as an exact rational, so no float reaches the output.
fn holdout_ratio(h: f64) -> num_rational::BigRational {
    let scaled = (h * 1_000_000.0).round() as i64;
    num_rational::BigRational::new(scaled.into(), 1_000_000.into())
}

pub fn cmd_betti(args: &BettiArgs) -> Result<Report, CliError> {
    let fam = load_family(&args.family.family)?;
    let (lo, hi) = args.family.n;
    let fields = match args.field {
        Some(f) => vec![f],
        None if args.i == 1 => vec![FieldSpec::Rationals],
        None => vec![FieldSpec::Rationals, FieldSpec::PrimeField(2)],
    };
    let mut columns = vec!["n".to_string(), "generators".to_string(), "i".to_string()];
    columns.extend(fields.iter().map(|f| format!("beta_{f}")));
    columns.push("complete".into());
    if fields.len() > 1 {
        columns.push("char_dependent".into());
    }
    let rows = (lo..=hi)
        .into_par_iter()
        .map(|n| -> Result<Vec<Value>, CliError> {
            let gens = match fam.instantiate(n) {
                Ok(g) => g,
                Err(eqpsg::polyfam::FamilyError::NonPositiveGenerator { .. }) => {
                    let mut row = vec![json!(n), Value::Null, json!(args.i)];
                    row.extend(fields.iter().map(|_| Value::Null));
                    row.push(Value::Null);
                    if fields.len() > 1 {
                        row.push(Value::Null);
                    }
                    return Ok(row);
                }
                Err(e) => return Err(e.into()),
            };
            let mut values = Vec::new();
            let mut complete = true;
            for &f in &fields {
                let b = homology::coarse_betti(&gens, args.i, f, args.degree_cap)?;
                complete &= b.complete;
                values.push(b.value);
            }
            let mut row = vec![json!(n), generators_json(&Some(gens)), json!(args.i)];
            row.extend(values.iter().map(|v| json!(v)));
            row.push(json!(complete));
            if fields.len() > 1 {
                row.push(json!(values.iter().any(|v| *v != values[0])));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new("betti", columns);
    report.meta = family_meta(&fam, (lo, hi));
    report.rows = rows;
    Ok(report)
}

pub fn cmd_bresinsky(args: &BresinskyArgs) -> Result<Report, CliError> {
    let (lo, hi) = args.n;
    if args.d == 0 || args.d % 2 == 1 {
        return Err(CliError::Usage(format!("d must be even and positive, got {}", args.d)));
    }
    let columns = ["n", "generators", "lower_bound", "degrees_checked", "verified", "coarse_beta1", "failure"];
    let rows: Vec<(Vec<Value>, bool)> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let gens = homology::bresinsky_generators(args.d, n).ok().map(|g| json!(g.gens)).unwrap_or(Value::Null);
            match homology::verify_bresinsky(args.d, n, args.coarse) {
                Ok(r) => {
                    let row = vec![
                        json!(n),
                        gens,
                        json!(r.lower_bound),
                        json!(r.degrees.len()),
                        json!(true),
                        r.coarse_beta1.map_or(Value::Null, |b| json!(b)),
                        Value::Null,
                    ];
                    (row, true)
                }
                Err(e) => (vec![json!(n), gens, Value::Null, Value::Null, json!(false), Value::Null, json!(e.to_string())], false),
            }
        })
        .collect();
    let mut report = Report::new("bresinsky", columns.iter().map(ToString::to_string).collect());
    report.meta = vec![("d", json!(args.d)), ("n_lo", json!(lo)), ("n_hi", json!(hi))];
    for (row, ok) in rows {
        report.ok &= ok;
        report.rows.push(row);
    }
    Ok(report)
}

fn load_formula(args: &PpaArgs) -> Result<Formula, CliError> {
    if let Some(b) = &args.builtin {
        let fam = load_family(args.family.as_deref().expect("required by clap"))?;
        return Ok(b.formula(&fam)?);
    }
    let text = args.formula.as_deref().expect("required by clap");
    let path = Path::new(text);
    let text = if path.is_file() { read(path)? } else { text.to_string() };
    Ok(presburger::parse_formula(&text)?)
}

/// Tuples of `[-W, W]^free` satisfying `f` with the other free variables fixed.
fn box_with_assignment(
    f: &Formula,
    n: u64,
    free: &[String],
    assign: &[(&str, i64)],
    w: u64,
) -> Result<(Vec<Vec<i64>>, bool), CliError> {
    let w = w as i64;
    let mut tuple = vec![-w; free.len()];
    let mut out = Vec::new();
    let mut exact = true;
    loop {
        let mut full: Vec<(&str, i64)> = free.iter().map(String::as_str).zip(tuple.iter().copied()).collect();
        full.extend_from_slice(assign);
        let e = presburger::eval(f, n, &full, Some(w as u64))?;
        exact &= e.exact;
        if e.value {
            out.push(tuple.clone());
        }
        let Some(j) = tuple.iter().position(|&x| x < w) else { break };
        tuple[j] += 1;
        tuple[..j].fill(-w);
    }
    out.sort();
    Ok((out, exact))
}

pub fn cmd_ppa(args: &PpaArgs) -> Result<Report, CliError> {
    let f = load_formula(args)?;
    let (lo, hi) = args.n;
    let free: Vec<String> = f.free_vars().into_iter().filter(|v| !args.assign.iter().any(|(k, _)| k == v)).collect();
    let assign: Vec<(&str, i64)> = args.assign.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let columns = if free.is_empty() { ["n", "window", "value", "exact"] } else { ["n", "window", "set", "exact"] };
    let rows = (lo..=hi)
        .into_par_iter()
        .map(|n| -> Result<Vec<Value>, CliError> {
            let w = match args.window {
                Some(w) => w,
                None => presburger::default_window(&f, n)?,
            };
            if free.is_empty() {
                let e = presburger::eval(&f, n, &assign, Some(w))?;
                return Ok(vec![json!(n), json!(w), json!(e.value), json!(e.exact)]);
            }
            let (tuples, exact) = if assign.is_empty() {
                let names: Vec<&str> = free.iter().map(String::as_str).collect();
                let set = presburger::define_set(&f, n, &names, Some(w))?;
                (set.tuples.into_iter().collect::<Vec<_>>(), set.exact)
            } else {
                box_with_assignment(&f, n, &free, &assign, w)?
            };
            let tuples: Vec<Value> =
                tuples.iter().map(|t| if free.len() == 1 { json!(t[0]) } else { json!(t) }).collect();
            Ok(vec![json!(n), json!(w), Value::Array(tuples), json!(exact)])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new("ppa", columns.iter().map(ToString::to_string).collect());
    report.meta = vec![("formula", json!(f.render())), ("free", json!(free))];
    report.rows = rows;
    Ok(report)
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = pool.build()?;
    pool.install(|| match &cli.command {
        Command::Invariants(a) => cmd_invariants(a),
        Command::EqpFit(a) => cmd_eqp_fit(a),
        Command::Betti(a) => cmd_betti(a),
        Command::Bresinsky(a) => cmd_bresinsky(a),
        Command::Ppa(a) => cmd_ppa(a),
    })
}
