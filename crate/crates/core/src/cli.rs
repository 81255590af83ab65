//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation criteria failed, 2 usage or parameter
//! error, 3 numerical failure, 4 some scan points failed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analytic::{f_analytic, final_inversion_analytic, q_factor, theta_closed};
use crate::error::{Error, Result};
use crate::experiments::{
    agreement_map, cep_sweep, detuning_scan, field_sweep, linspace, Engines, SquareCase, SweepRecord, WorkerPool,
};
use crate::io::{format_value, write_table, Format, RunManifest, Table, SIMULATE_COLUMNS};
use crate::numeric::{integrate_tls, IntegratorConfig};
use crate::pulse::{derive_params, Shape};
use crate::validation::{run_criterion, ValidationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CRITERIA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tls-fewcycle", version, about = "Two-level atom in far-detuned few-cycle pulses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the amplitude equations and write the trajectory.
    Simulate(CommonArgs),
    /// Evaluate a closed-form observable (square pulses only).
    Analytic(AnalyticArgs),
    /// Agreement map over field × detuning, or a detuning scan.
    Scan(ScanArgs),
    /// Final-inversion excursion against the CEP.
    CepSweep(SweepArgs),
    /// Final inversion against the peak field, one curve per CEP.
    FieldSweep(SweepArgs),
    /// Run the acceptance battery and write its result tables.
    Validate(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Flat JSON object with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub shape: Option<String>,
    /// ω/ω_c, in (0, 1).
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Ω₀/ω.
    #[arg(long)]
    pub field: Option<f64>,
    /// Radians, or `<k>pi`.
    #[arg(long, allow_hyphen_values = true)]
    pub cep: Option<String>,
    #[arg(long)]
    pub cycles: Option<f64>,
    #[arg(long)]
    pub steps_per_cycle: Option<u32>,
    /// Output file; stdout when absent (no manifest sidecar).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    #[value(name = "f_trace")]
    FTrace,
    Wf,
    Q,
    Theta,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub observable: Option<Observable>,
    /// CEP grid `a:b:n` for `wf`; overrides --cep.
    #[arg(long)]
    pub phi_range: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    Map,
    Detuning,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub kind: Option<ScanKind>,
    /// Field grid `a:b:n` (map only).
    #[arg(long)]
    pub x_range: Option<String>,
    /// Detuning grid `a:b:n`.
    #[arg(long)]
    pub y_range: Option<String>,
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineArg {
    Analytic,
    Numeric,
    Both,
}

impl From<EngineArg> for Engines {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Analytic => Engines::Analytic,
            EngineArg::Numeric => Engines::Numeric,
            EngineArg::Both => Engines::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CEP grid `a:b:n`.
    #[arg(long)]
    pub phi_range: Option<String>,
    /// Field grid `a:b:n` (field-sweep only).
    #[arg(long)]
    pub x_range: Option<String>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value = "validation")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub steps_per_cycle: Option<u32>,
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Comma-separated subset, e.g. `1,5,9`.
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    shape: Option<String>,
    detuning: Option<f64>,
    field: Option<f64>,
    cep: Option<Value>,
    cycles: Option<f64>,
    #[serde(alias = "steps-per-cycle")]
    steps_per_cycle: Option<u32>,
    out: Option<PathBuf>,
    format: Option<String>,
    observable: Option<Observable>,
    kind: Option<ScanKind>,
    engine: Option<EngineArg>,
    #[serde(alias = "x-range")]
    x_range: Option<String>,
    #[serde(alias = "y-range")]
    y_range: Option<String>,
    #[serde(alias = "phi-range")]
    phi_range: Option<String>,
    parallel: Option<usize>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = fs::read_to_string(path).map_err(|e| Error::param("config", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::param("config", e.to_string()))
}

/// Parameters after merging defaults, config file and flags.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub shape: Shape,
    pub detuning: f64,
    pub field: f64,
    pub cep: f64,
    pub cycles: f64,
    pub integrator: IntegratorConfig,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Resolved {
    fn case(&self) -> SquareCase {
        SquareCase::new(self.detuning, self.field, self.cep, self.cycles)
    }
}

fn resolve(args: &CommonArgs, file: &FileConfig) -> Result<Resolved> {
    let shape = match args.shape.as_ref().or(file.shape.as_ref()) {
        Some(s) => s.parse()?,
        None => Shape::Square,
    };
    let cep = match (&args.cep, &file.cep) {
        (Some(s), _) => parse_angle(s)?,
        (None, Some(Value::Number(n))) => n.as_f64().unwrap(),
        (None, Some(Value::String(s))) => parse_angle(s)?,
        (None, Some(v)) => return Err(Error::param("cep", format!("expected number or string, got {v}"))),
        (None, None) => 0.0,
    };
    let steps = args.steps_per_cycle.or(file.steps_per_cycle);
    let integrator = steps.map_or_else(IntegratorConfig::default, IntegratorConfig::fixed);
    integrator.validate()?;
    let format = match args.format.as_ref().or(file.format.as_ref()) {
        Some(f) => f.parse()?,
        None => Format::Csv,
    };
    Ok(Resolved {
        shape,
        detuning: args.detuning.or(file.detuning).unwrap_or(0.366),
        field: args.field.or(file.field).unwrap_or(0.181),
        cep,
        cycles: args.cycles.or(file.cycles).unwrap_or(2.0),
        integrator,
        out: args.out.clone().or_else(|| file.out.clone()),
        format,
    })
}

/// Radians, or a multiple of π written `pi`, `-pi`, `0.5pi`, `2*pi`, `0.5π`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim().to_ascii_lowercase();
    let bad = || Error::param("cep", format!("cannot parse angle {s:?}"));
    let stripped = t.strip_suffix("pi").or_else(|| t.strip_suffix('π'));
    match stripped {
        Some(k) => {
            let k = k.trim().trim_end_matches('*').trim();
            let factor = match k {
                "" | "+" => 1.0,
                "-" => -1.0,
                _ => k.parse::<f64>().map_err(|_| bad())?,
            };
            Ok(factor * PI)
        }
        None => t.parse::<f64>().map_err(|_| bad()).and_then(|v| if v.is_finite() { Ok(v) } else { Err(bad()) }),
    }
}

/// `a:b:n`, inclusive of both ends; `a` and `b` accept the angle syntax.
pub fn parse_range(s: &str, name: &'static str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = |why: &str| Error::param(name, format!("{why} in range {s:?}, expected a:b:n"));
    let [a, b, n] = parts[..] else { return Err(bad("wrong number of fields")) };
    let a = parse_angle(a).map_err(|_| bad("bad start"))?;
    let b = parse_angle(b).map_err(|_| bad("bad end"))?;
    let n: usize = n.trim().parse().map_err(|_| bad("bad count"))?;
    if n == 0 {
        return Err(bad("zero count"));
    }
    Ok(linspace(a, b, n))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": msg.trim() }));
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analytic(a) => analytic(a),
        Command::Scan(a) => scan(a),
        Command::CepSweep(a) => sweep(a, false),
        Command::FieldSweep(a) => sweep(a, true),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn emit(res: &Resolved, table: &Table, manifest: RunManifest, started: Instant) -> Result<()> {
    let mut manifest = manifest;
    manifest.wall_clock_s = Some(started.elapsed().as_secs_f64());
    match &res.out {
        Some(path) => write_table(path, res.format, table, &manifest),
        None => {
            let body = match res.format {
                Format::Csv => table.to_csv(),
                Format::Json => serde_json::to_string_pretty(&table.to_json(&manifest.reproducible())).unwrap() + "\n",
            };
            std::io::stdout().write_all(body.as_bytes()).map_err(|e| Error::param("out", e.to_string()))
        }
    }
}

fn simulate(args: &CommonArgs) -> Result<i32> {
    let started = Instant::now();
    let res = resolve(args, &load_config(args.config.as_deref())?)?;
    let (pulse, tls) = res.case().build(res.shape)?;
    let traj = integrate_tls(&pulse, &tls, &res.integrator)?;
    let mut table = Table::new(&SIMULATE_COLUMNS);
    for i in 0..traj.len() {
        let (c, d) = (traj.c_amp[i], traj.d_amp[i]);
        table.push(vec![traj.times[i], c.re, c.im, d.re, d.im, traj.upper_prob[i], traj.inversion[i], traj.norm[i]]);
    }
    emit(&res, &table, RunManifest::new("simulate", &res), started)?;
    Ok(EXIT_OK)
}

fn analytic(args: &AnalyticArgs) -> Result<i32> {
    let started = Instant::now();
    let file = load_config(args.common.config.as_deref())?;
    let res = resolve(&args.common, &file)?;
    let observable = args.observable.or(file.observable).unwrap_or(Observable::FTrace);
    if res.shape != Shape::Square {
        return Err(Error::ShapeMismatch(res.shape.to_string()));
    }
    let (pulse, tls) = res.case().build(res.shape)?;
    let tau = pulse.support().1;
    let trace_times = || {
        let n = (res.integrator.steps_per_cycle as f64 * res.cycles).round().max(1.0) as usize;
        linspace(0.0, tau, n + 1)
    };
    let mut phis = None;
    let table = match observable {
        Observable::FTrace => {
            let mut t = Table::new(&["t", "re_f", "im_f", "abs_f"]);
            for time in trace_times() {
                let f = f_analytic(time, &pulse, &tls)?.value;
                t.push(vec![time, f.re, f.im, f.norm()]);
            }
            t
        }
        Observable::Theta => {
            let mut t = Table::new(&["t", "re_theta", "im_theta", "abs_theta"]);
            for time in trace_times() {
                let th = theta_closed(time, &pulse, &tls)?;
                t.push(vec![time, th.re, th.im, th.norm()]);
            }
            t
        }
        Observable::Wf => {
            let grid = match args.phi_range.as_ref().or(file.phi_range.as_ref()) {
                Some(r) => parse_range(r, "phi_range")?,
                None => vec![res.cep],
            };
            let mut t = Table::new(&["cep", "w_f", "delta_w", "q", "theta_f_sq", "w_f_linear", "w_f_exact"]);
            for &phi in &grid {
                let r = final_inversion_analytic(phi, &pulse, &tls)?;
                t.push(vec![phi, r.w_f, r.delta_w, r.q, r.theta_f_sq, r.w_f_linear, r.w_f_exact]);
            }
            phis = Some(grid);
            t
        }
        Observable::Q => {
            if !pulse.is_integer_cycles() {
                return Err(Error::NonIntegerCycles(res.cycles));
            }
            let d = derive_params(&pulse, &tls)?;
            let mut t = Table::new(&["detuning_ratio", "field_ratio", "cycles", "q"]);
            t.push(vec![res.detuning, res.field, res.cycles, q_factor(res.cycles as u32, &d, &pulse, &tls)]);
            t
        }
    };
    let mut params = serde_json::to_value(&res).unwrap();
    params["observable"] = json!(observable);
    if let Some(p) = phis {
        params["phi_grid"] = json!(p);
    }
    emit(&res, &table, RunManifest::new("analytic", params), started)?;
    Ok(EXIT_OK)
}

fn records_exit(failed: usize, total: usize) -> i32 {
    if failed == 0 {
        EXIT_OK
    } else {
        eprintln!("{}", json!({ "error": "partial_failure", "failed": failed, "total": total }));
        EXIT_PARTIAL
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn scan(args: &ScanArgs) -> Result<i32> {
    let started = Instant::now();
    let file = load_config(args.common.config.as_deref())?;
    let res = resolve(&args.common, &file)?;
    let kind = args.kind.or(file.kind).unwrap_or(ScanKind::Map);
    let pool = WorkerPool::new(args.parallel.or(file.parallel))?;
    let y_default = match kind {
        ScanKind::Map => "0.1:0.95:40",
        ScanKind::Detuning => "0.1:0.9:41",
    };
    let y_spec = args.y_range.clone().or(file.y_range.clone()).unwrap_or_else(|| y_default.into());
    let detunings = parse_range(&y_spec, "y_range")?;
    if res.shape != Shape::Square {
        return Err(Error::ShapeMismatch(res.shape.to_string()));
    }
    let mut params = serde_json::to_value(&res).unwrap();
    params["kind"] = json!(kind);
    params["y_range"] = json!(y_spec);
    match kind {
        ScanKind::Map => {
            let x_spec = args.x_range.clone().or(file.x_range.clone()).unwrap_or_else(|| "0.01:0.2:40".into());
            let fields = parse_range(&x_spec, "x_range")?;
            params["x_range"] = json!(x_spec);
            let map = agreement_map(&fields, &detunings, res.cep, res.cycles, &res.integrator, &pool);
            let mut header = vec!["detuning_ratio\\field_ratio".to_owned()];
            header.extend(fields.iter().map(|&a| format_value(a)));
            let mut table = Table::new(&header);
            for (j, &r) in detunings.iter().enumerate() {
                let mut row = vec![r];
                row.extend(&map.values[j]);
                table.push(row);
            }
            let mut manifest = RunManifest::new("scan", params);
            for note in &map.meta.notes {
                manifest = manifest.with_note(note.clone());
            }
            emit(&res, &table, manifest, started)?;
            Ok(records_exit(map.failures.len(), fields.len() * detunings.len()))
        }
        ScanKind::Detuning => {
            let recs = detuning_scan(res.field, &detunings, res.cep, res.cycles, &res.integrator, &pool);
            let mut table = Table::new(&["detuning_ratio", "analytic_abs_c_sq", "numeric_abs_c_sq", "difference"]);
            push_records(&mut table, &recs, &[]);
            emit(&res, &table, RunManifest::new("scan", params), started)?;
            Ok(records_exit(recs.iter().filter(|r| r.is_failed()).count(), recs.len()))
        }
    }
}

fn push_records(table: &mut Table, recs: &[SweepRecord], prefix: &[f64]) {
    for r in recs {
        let mut row = prefix.to_vec();
        row.extend([r.parameter, opt(r.analytic), opt(r.numeric), opt(r.difference)]);
        table.push(row);
    }
}

fn sweep(args: &SweepArgs, by_field: bool) -> Result<i32> {
    let started = Instant::now();
    let file = load_config(args.common.config.as_deref())?;
    let res = resolve(&args.common, &file)?;
    let engines: Engines = args.engine.or(file.engine).unwrap_or(EngineArg::Both).into();
    let pool = WorkerPool::new(args.parallel.or(file.parallel))?;
    let phi_default = if by_field { "0:0:1" } else { "0:2pi:65" };
    let phi_spec = args.phi_range.clone().or(file.phi_range.clone()).unwrap_or_else(|| phi_default.into());
    let ceps = parse_range(&phi_spec, "phi_range")?;
    let mut params = serde_json::to_value(&res).unwrap();
    params["engine"] = json!(engines);
    params["phi_range"] = json!(phi_spec);
    let mut notes = Vec::new();
    if res.shape != Shape::Square && engines != Engines::Numeric {
        notes.push(format!("closed form derived for square pulse only; {} points are numeric only", res.shape));
    }
    if res.shape == Shape::Gaussian {
        notes.push(format!("gaussian detuning ω/ω_c = {} assumed, not taken from a reference trace", res.detuning));
    }

    let (table, failed, total) = if by_field {
        let x_spec = args.x_range.clone().or(file.x_range.clone()).unwrap_or_else(|| "0.005:0.5:100".into());
        let fields = parse_range(&x_spec, "x_range")?;
        params["x_range"] = json!(x_spec);
        let curves = field_sweep(res.shape, res.detuning, res.cycles, &ceps, &fields, engines, &res.integrator, &pool);
        let mut table = Table::new(&["cep", "field_ratio", "analytic_w_f", "numeric_w_f", "difference"]);
        let mut failed = 0;
        for c in &curves {
            push_records(&mut table, &c.records, &[c.cep]);
            failed += c.records.iter().filter(|r| r.is_failed()).count();
        }
        (table, failed, ceps.len() * fields.len())
    } else {
        let s = cep_sweep(res.shape, &res.case(), &ceps, engines, &res.integrator, &pool);
        let mut table = Table::new(&["cep", "analytic_delta_w", "numeric_delta_w", "difference"]);
        push_records(&mut table, &s.records, &[]);
        (table, s.records.iter().filter(|r| r.is_failed()).count(), ceps.len())
    };
    let mut manifest = RunManifest::new(if by_field { "field-sweep" } else { "cep-sweep" }, params);
    for n in notes {
        manifest = manifest.with_note(n);
    }
    emit(&res, &table, manifest, started)?;
    Ok(records_exit(failed, total))
}

fn validate(args: &ValidateArgs) -> Result<i32> {
    let started = Instant::now();
    let integrator = args.steps_per_cycle.map_or_else(IntegratorConfig::default, IntegratorConfig::fixed);
    integrator.validate()?;
    let cfg = ValidationConfig { integrator, workers: args.parallel };
    WorkerPool::new(cfg.workers)?;
    let ids = args.criteria.clone().unwrap_or_else(|| (1..=9).collect());
    if let Some(bad) = ids.iter().find(|id| !(1..=9).contains(*id)) {
        return Err(Error::param("criteria", format!("criterion {bad} is not in 1..=9")));
    }
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::param("out_dir", e.to_string()))?;

    let mut summary = Table::new(&["criterion", "passed"]);
    let mut files = BTreeMap::new();
    let mut all = true;
    for id in ids {
        let report = run_criterion(id, &cfg);
        println!("{}", report.line());
        all &= report.passed;
        summary.push(vec![id as f64, report.passed as u8 as f64]);
        for (name, table) in &report.tables {
            let file = format!("c{id}_{name}.csv");
            fs::write(args.out_dir.join(&file), table.to_csv()).map_err(|e| Error::param("out_dir", e.to_string()))?;
            files.insert(file, id);
        }
    }
    let out = args.out_dir.join("summary.csv");
    let mut manifest = RunManifest::new("validate", json!({ "config": cfg, "files": files }));
    manifest.wall_clock_s = Some(started.elapsed().as_secs_f64());
    write_table(&out, Format::Csv, &summary, &manifest)?;
    println!("{}", if all { "all criteria passed" } else { "some criteria failed" });
    Ok(if all { EXIT_OK } else { EXIT_CRITERIA })
}
