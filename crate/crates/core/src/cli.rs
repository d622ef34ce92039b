//! Command-line front end.
//!
//! Every run is described by an [`ExperimentSpec`]: the subcommand, its
//! resolved parameters, the master seed and the output settings. The spec is
//! echoed at the top of every result file in the same `key=value` syntax that
//! `--config` reads, so a result file is enough to rerun its experiment.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::good_cluster::{check_downward_closed, grow_good_cluster};
use crate::lattice::{check_dim, Slope};
use crate::mc::{compare_tail, default_r_max, tail_curve, theoretical_bound, TailTarget};
use crate::oriented::{
    black_sites, default_alpha_beta, dual2d_exhaustive, dual2d_monte_carlo, estimate_critical,
    renormalization_skeleton, DualWindow, SkeletonParams, Variant,
};
use crate::sampler::derive_trial_config;
use crate::saw::{count_saws_upto, mu_upper_estimate, saw_upper_bound};
use crate::sphere::{build_boundary, certify, sphere_radius_doubled, write_off, CertifyOptions};
use crate::ENGINE_VERSION;

pub const SEED_ENV: &str = "PLAQ_SEED";

const SUBCOMMANDS: [&str; 7] = ["saw", "cluster", "sphere", "tail", "critical", "dual2d", "skeleton"];
const VALUE_FLAGS: [&str; 5] = ["--config", "--seed", "--threads", "--format", "--output"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
    Off,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
            Format::Off => "off",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, false)
    }
}

/// Comma-separated list flag value.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: fmt::Display> Serialize for List<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        s.serialize_str(&parts.join(","))
    }
}

fn parse_list<T>(s: &str) -> Result<List<T>, String>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    let items: Result<Vec<T>, String> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}")))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(List(items))
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown variant {s:?} (good|adm|admH|admK|oriented)"))
}

#[derive(Parser, Debug)]
#[command(name = "plaq", version, about = "Plaquette spheres and good-path percolation experiments")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// master seed (default: $PLAQ_SEED, else 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker threads (default: available parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// write results here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    /// exit nonzero when any invariant check fails
    #[arg(long, global = true)]
    verify: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Self-avoiding walk counts sigma(k) for k = 1..kmax
    #[command(args_override_self = true)]
    Saw(SawArgs),
    /// Good-path cluster of the origin in one configuration
    #[command(args_override_self = true)]
    Cluster(ClusterArgs),
    /// Plaquette boundary of the good cluster and its checks
    #[command(args_override_self = true)]
    Sphere(SphereArgs),
    /// Radius tail estimate with Wilson intervals
    #[command(args_override_self = true)]
    Tail(TailArgs),
    /// Pseudo-critical points by bisection on crossing probability 1/2
    #[command(args_override_self = true)]
    Critical(CriticalArgs),
    /// Planar primal escape versus dual blocking
    #[command(args_override_self = true)]
    Dual2d(Dual2dArgs),
    /// Block skeleton for oriented percolation in a cone
    #[command(args_override_self = true)]
    Skeleton(SkeletonArgs),
}

#[derive(Args, Debug, Serialize)]
struct SawArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    kmax: usize,
}

#[derive(Args, Debug, Serialize)]
struct ClusterArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 64)]
    rmax: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// include the sorted site list
    #[arg(long)]
    sites: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SphereArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 64)]
    rmax: u64,
    /// first trial index
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 1000)]
    rays: usize,
    /// write the d = 3 complex of the first trial as an OFF mesh
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    emit_off: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TargetArg {
    Cluster,
    Sphere,
}

#[derive(Args, Debug, Serialize)]
struct TailArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = parse_list::<u64>)]
    rlist: List<u64>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = TargetArg::Cluster)]
    target: TargetArg,
    /// truncation radius (default: 4 x max r)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    rmax: Option<u64>,
    /// add the explicit bound column; requires p < (2d-1)^-2
    #[arg(long)]
    bound: bool,
}

#[derive(Args, Debug, Serialize)]
struct CriticalArgs {
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    #[arg(long)]
    dim: usize,
    #[arg(long = "L", value_parser = parse_list::<usize>, default_value = "16,32,64")]
    #[serde(rename = "L")]
    l_list: List<usize>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    #[arg(long, default_value_t = 5e-3)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DualMode {
    Exhaustive,
    Mc,
}

#[derive(Args, Debug, Serialize)]
struct Dual2dArgs {
    #[arg(long, value_enum, default_value_t = DualMode::Exhaustive)]
    mode: DualMode,
    #[arg(long, default_value_t = 4)]
    levels: i32,
    #[arg(long, default_value_t = 2)]
    width: i32,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 10000)]
    trials: u64,
}

#[derive(Args, Debug, Serialize)]
struct SkeletonArgs {
    #[arg(long, default_value = "0")]
    a: String,
    /// upper slope, or `inf`
    #[arg(long, default_value = "inf")]
    b: String,
    #[arg(long, default_value = "1/2")]
    r: String,
    #[arg(long, default_value = "2")]
    s: String,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<i64>,
    #[arg(long, default_value_t = 10)]
    extent: usize,
    /// also report the black-site fraction at this bond density
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub subcommand: String,
    /// Subcommand parameters as flag name and value, in flag order.
    pub params: Vec<(String, String)>,
    pub master_seed: u64,
    pub output: Option<String>,
    pub format: Format,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("missing key {0:?}")]
    Missing(&'static str),
    #[error("bad value for {key}: {value:?}")]
    Value { key: String, value: String },
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentSpec {
    /// Header lines without the leading `# `.
    pub fn to_config_string(&self) -> String {
        let mut s = format!("subcommand={}\nseed={}\nformat={}\n", self.subcommand, self.master_seed, self.format);
        if let Some(o) = &self.output {
            s.push_str(&format!("output={o}\n"));
        }
        for (k, v) in &self.params {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let mut spec = ExperimentSpec {
            subcommand: String::new(),
            params: Vec::new(),
            master_seed: 0,
            output: None,
            format: Format::Csv,
        };
        let (mut have_sub, mut have_seed) = (false, false);
        for (k, v) in parse_config(text)? {
            let bad = || ConfigError::Value {
                key: k.clone(),
                value: v.clone(),
            };
            match k.as_str() {
                "subcommand" => {
                    spec.subcommand = v.clone();
                    have_sub = true;
                }
                "seed" => {
                    spec.master_seed = v.parse().map_err(|_| bad())?;
                    have_seed = true;
                }
                "format" => spec.format = v.parse().map_err(|_| bad())?,
                "output" => spec.output = Some(v),
                "engine" | "timestamp" => {}
                _ => spec.params.push((k, v)),
            }
        }
        if !have_sub {
            return Err(ConfigError::Missing("subcommand"));
        }
        if !have_seed {
            return Err(ConfigError::Missing("seed"));
        }
        Ok(spec)
    }
}

fn flatten_params<T: Serialize>(args: &T) -> Vec<(String, String)> {
    let Value::Object(map) = serde_json::to_value(args).expect("flag structs serialize") else {
        return Vec::new();
    };
    map.into_iter()
        .map(|(k, v)| {
            let v = match v {
                Value::String(s) => s,
                other => other.to_string(),
            };
            (k, v)
        })
        .collect()
}

/// Result rows plus anything else a subcommand produces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Columns are the keys of all objects in first-seen order; missing
    /// entries become null.
    fn from_objects(objects: Vec<Map<String, Value>>) -> Self {
        let mut columns: Vec<String> = Vec::new();
        for obj in &objects {
            for k in obj.keys() {
                if !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
        let rows = objects
            .iter()
            .map(|obj| columns.iter().map(|c| obj.get(c).cloned().unwrap_or(Value::Null)).collect())
            .collect();
        Table { columns, rows }
    }
}

fn csv_field(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Writes `table` as CSV or JSON lines with the spec echoed in front. The
/// `timestamp` entry is the only part that differs between identical runs.
pub fn write_results<W: Write>(spec: &ExperimentSpec, table: &Table, mut w: W) -> io::Result<()> {
    let ts = timestamp();
    match spec.format {
        Format::Csv | Format::Off => {
            writeln!(w, "# engine={ENGINE_VERSION}")?;
            writeln!(w, "# timestamp={ts}")?;
            for line in spec.to_config_string().lines() {
                writeln!(w, "# {line}")?;
            }
            let header: Vec<String> = table.columns.iter().map(|c| csv_field(&Value::String(c.clone()))).collect();
            writeln!(w, "{}", header.join(","))?;
            for row in &table.rows {
                let fields: Vec<String> = row.iter().map(csv_field).collect();
                writeln!(w, "{}", fields.join(","))?;
            }
        }
        Format::Jsonl => {
            let mut echo = Map::new();
            echo.insert("subcommand".into(), json!(spec.subcommand));
            echo.insert("seed".into(), json!(spec.master_seed));
            echo.insert("format".into(), json!(spec.format));
            if let Some(o) = &spec.output {
                echo.insert("output".into(), json!(o));
            }
            for (k, v) in &spec.params {
                echo.insert(k.clone(), json!(v));
            }
            let meta = json!({"meta": {"engine": ENGINE_VERSION, "timestamp": ts, "spec": echo}});
            writeln!(w, "{meta}")?;
            for row in &table.rows {
                let obj: Map<String, Value> = table.columns.iter().cloned().zip(row.iter().cloned()).collect();
                writeln!(w, "{}", Value::Object(obj))?;
            }
        }
    }
    w.flush()
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn usage<E: fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

struct Outcome {
    table: Table,
    off: Option<Vec<u8>>,
    failures: Vec<String>,
    default_format: Format,
}

impl Outcome {
    fn new(table: Table, default_format: Format) -> Self {
        Outcome {
            table,
            off: None,
            failures: Vec::new(),
            default_format,
        }
    }
}

fn check_p(p: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("requires 0 <= p <= 1, got {p}")))
    }
}

fn check_positive(name: &str, v: u64) -> Result<(), Failure> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("requires {name} >= 1")))
    }
}

fn to_object<T: Serialize>(t: &T) -> Map<String, Value> {
    match serde_json::to_value(t).expect("result structs serialize") {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn run_saw(a: &SawArgs) -> Result<Outcome, Failure> {
    check_dim(a.dim).map_err(usage)?;
    let counts = count_saws_upto(a.dim, a.kmax).map_err(usage)?;
    let mut t = Table::new(&["k", "sigma", "sigma_bound", "mu_upper"]);
    let mut failures = Vec::new();
    for (k, c) in counts.iter().enumerate().skip(1) {
        let bound = saw_upper_bound(a.dim, k);
        if *c > bound {
            failures.push(format!("sigma({k}) exceeds 2d(2d-1)^(k-1)"));
        }
        let mu = mu_upper_estimate(a.dim, k).map_err(usage)?;
        t.rows.push(vec![json!(k), json!(c.to_string()), json!(bound.to_string()), json!(mu)]);
    }
    let mut out = Outcome::new(t, Format::Csv);
    out.failures = failures;
    Ok(out)
}

fn run_cluster(a: &ClusterArgs, seed: u64) -> Result<Outcome, Failure> {
    check_dim(a.dim).map_err(usage)?;
    check_p(a.p)?;
    let cfg = derive_trial_config(a.dim, seed, a.trial, a.p);
    let k = grow_good_cluster(&cfg, a.rmax);
    let mut row = Map::new();
    row.insert("sites_count".into(), json!(k.len()));
    row.insert("radius".into(), json!(k.radius));
    row.insert("escaped".into(), json!(k.escaped));
    if a.sites {
        row.insert("sites".into(), json!(k.sorted_sites()));
    }
    let t = Table::from_objects(vec![row]);
    let mut out = Outcome::new(t, Format::Jsonl);
    if !check_downward_closed(&k) {
        out.failures.push("cluster is not downward closed".into());
    }
    Ok(out)
}

struct SphereTrial {
    row: Map<String, Value>,
    ok: bool,
    off: Option<Vec<u8>>,
}

fn sphere_trial(a: &SphereArgs, seed: u64, index: u64, want_off: bool) -> Result<SphereTrial, String> {
    let cfg = derive_trial_config(a.dim, seed, index, a.p);
    let k = grow_good_cluster(&cfg, a.rmax);
    let mut row = Map::new();
    row.insert("trial".into(), json!(index));
    row.insert("escaped".into(), json!(k.escaped));
    row.insert("cluster_radius".into(), json!(k.radius));
    if k.escaped {
        return Ok(SphereTrial { row, ok: false, off: None });
    }
    let s = build_boundary(&k).map_err(|e| e.to_string())?;
    let rad2 = sphere_radius_doubled(&s);
    let rad_ok = rad2 >= 2 * k.radius && rad2 <= 2 * k.radius + a.dim as u64;
    row.insert("sphere_radius".into(), json!(rad2 as f64 / 2.0));
    row.insert("radius_bound_ok".into(), json!(rad_ok));
    let opts = CertifyOptions {
        n_rays: a.rays,
        ..CertifyOptions::default()
    };
    let report = certify(&s, &cfg, opts).map_err(|e| e.to_string())?;
    let ok = rad_ok && report.fully_verified();
    row.extend(to_object(&report));
    let off = if want_off {
        let mut buf = Vec::new();
        write_off(&s, &mut buf).map_err(|e| e.to_string())?;
        Some(buf)
    } else {
        None
    };
    Ok(SphereTrial { row, ok, off })
}

fn run_sphere(a: &SphereArgs, seed: u64, format: Option<Format>) -> Result<Outcome, Failure> {
    check_dim(a.dim).map_err(usage)?;
    check_p(a.p)?;
    check_positive("trials", a.trials)?;
    let want_off = a.emit_off.is_some() || format == Some(Format::Off);
    if want_off && a.dim != 3 {
        return Err(Failure::Usage(format!("OFF output needs d = 3, got d = {}", a.dim)));
    }
    let results: Vec<Result<SphereTrial, String>> = (0..a.trials)
        .into_par_iter()
        .map(|i| sphere_trial(a, seed, a.trial + i, want_off && i == 0))
        .collect();
    let mut objects = Vec::new();
    let mut out_off = None;
    let mut failures = Vec::new();
    for r in results {
        let tr = r.map_err(Failure::Internal)?;
        if !tr.ok {
            failures.push(format!("trial {} failed the sphere checks", tr.row["trial"]));
        }
        if tr.off.is_some() {
            out_off = tr.off;
        }
        objects.push(tr.row);
    }
    let t = Table::from_objects(objects);
    let mut out = Outcome::new(t, Format::Jsonl);
    out.failures = failures;
    if let Some(path) = &a.emit_off {
        if let Some(buf) = &out_off {
            std::fs::write(path, buf)?;
        } else {
            out.failures.push("no complex to emit: first trial escaped".into());
        }
    }
    out.off = out_off;
    Ok(out)
}

fn run_tail(a: &TailArgs, seed: u64) -> Result<Outcome, Failure> {
    check_dim(a.dim).map_err(usage)?;
    check_p(a.p)?;
    check_positive("trials", a.trials)?;
    let rs = &a.rlist.0;
    if rs.contains(&0) {
        return Err(Failure::Usage("requires every r >= 1".into()));
    }
    let bound = if a.bound {
        Some(theoretical_bound(a.p, a.dim, rs).map_err(usage)?)
    } else {
        None
    };
    let r_max = a.rmax.unwrap_or_else(|| default_r_max(rs));
    if rs.iter().any(|&r| r > r_max) {
        return Err(Failure::Usage(format!("requires rmax >= max r, got rmax = {r_max}")));
    }
    let target = match a.target {
        TargetArg::Cluster => TailTarget::ClusterRadius,
        TargetArg::Sphere => TailTarget::SphereRadius,
    };
    let curve = tail_curve(a.p, a.dim, rs, a.trials, seed, target, r_max);
    let mut t = Table::new(&["r", "hits", "trials", "estimate", "wilson_lo", "wilson_hi", "bound"]);
    for (i, &r) in rs.iter().enumerate() {
        t.rows.push(vec![
            json!(r),
            json!(curve.hits[i]),
            json!(curve.trials),
            json!(curve.estimate[i]),
            json!(curve.wilson_lo[i]),
            json!(curve.wilson_hi[i]),
            bound.as_ref().map_or(Value::Null, |b| json!(b.values[i])),
        ]);
    }
    let mut out = Outcome::new(t, Format::Csv);
    if let Some(b) = &bound {
        for v in compare_tail(&curve, b).map_err(|e| Failure::Internal(e.to_string()))? {
            out.failures
                .push(format!("r = {}: wilson_lo {} exceeds bound {}", v.r, v.wilson_lo, v.bound));
        }
    }
    Ok(out)
}

fn run_critical(a: &CriticalArgs, seed: u64) -> Result<Outcome, Failure> {
    check_positive("trials", a.trials)?;
    let est = estimate_critical(a.variant, a.dim, &a.l_list.0, a.trials, a.tol, seed).map_err(usage)?;
    let mut t = Table::new(&["L", "p_hat", "ci_lo", "ci_hi"]);
    let mut out_failures = Vec::new();
    for (i, &l) in est.l_list.iter().enumerate() {
        t.rows
            .push(vec![json!(l), json!(est.p_hat[i]), json!(est.ci_lo[i]), json!(est.ci_hi[i])]);
        if est.non_monotone[i] {
            out_failures.push(format!("non-monotone crossing estimates at L = {l}"));
        }
    }
    let mut out = Outcome::new(t, Format::Csv);
    out.failures = out_failures;
    Ok(out)
}

fn run_dual2d(a: &Dual2dArgs, seed: u64) -> Result<Outcome, Failure> {
    if a.levels < 1 || a.width < 0 {
        return Err(Failure::Usage("requires levels >= 1 and width >= 0".into()));
    }
    let window = DualWindow::new(a.levels, a.width);
    let report = match a.mode {
        DualMode::Exhaustive => {
            let n = window.bonds().len();
            if n > 24 {
                return Err(Failure::Usage(format!("window has {n} bonds; exhaustive mode allows at most 24")));
            }
            dual2d_exhaustive(window)
        }
        DualMode::Mc => {
            check_p(a.p)?;
            check_positive("trials", a.trials)?;
            dual2d_monte_carlo(window, a.p, a.trials, seed)
        }
    };
    let t = Table::from_objects(vec![to_object(&report)]);
    let mut out = Outcome::new(t, Format::Jsonl);
    if report.exceptions > 0 {
        out.failures.push(format!("{} configurations violate the duality", report.exceptions));
    }
    Ok(out)
}

fn parse_ratio(name: &str, s: &str) -> Result<Ratio<i64>, Failure> {
    s.trim()
        .parse::<Ratio<i64>>()
        .map_err(|_| Failure::Usage(format!("{name}: expected a rational like 1/2, got {s:?}")))
}

fn run_skeleton(a: &SkeletonArgs, seed: u64) -> Result<Outcome, Failure> {
    let ra = parse_ratio("a", &a.a)?;
    let b = match a.b.trim() {
        "inf" | "∞" => Slope::Infinite,
        other => Slope::Finite(parse_ratio("b", other)?),
    };
    let r = parse_ratio("r", &a.r)?;
    let s = parse_ratio("s", &a.s)?;
    let (alpha, beta) = match (a.alpha, a.beta) {
        (Some(al), Some(be)) => (al, be),
        (None, None) => default_alpha_beta(r, s)
            .ok_or_else(|| Failure::Usage("no alpha, beta with s1/r1 < beta/alpha < s2/r2 found".into()))?,
        _ => return Err(Failure::Usage("give both --alpha and --beta or neither".into())),
    };
    let params = SkeletonParams {
        a: ra,
        b,
        r,
        s,
        alpha,
        beta,
        extent: a.extent,
    };
    let sk = renormalization_skeleton(params).map_err(usage)?;
    let mut row = to_object(&sk);
    row.insert("alpha".into(), json!(alpha));
    row.insert("beta".into(), json!(beta));
    if let Some(p) = a.p {
        check_p(p)?;
        check_positive("trials", a.trials)?;
        let black: u64 = (0..a.trials)
            .into_par_iter()
            .map(|i| {
                let cfg = derive_trial_config(2, seed, i, p);
                black_sites(&cfg, &sk).into_iter().filter(|&x| x).count() as u64
            })
            .sum();
        let total = a.trials * sk.sites.len() as u64;
        row.insert("black_fraction".into(), json!(black as f64 / total.max(1) as f64));
        row.insert("p_pow_n".into(), json!(p.powi(sk.n_bonds as i32)));
    }
    let t = Table::from_objects(vec![row]);
    let mut out = Outcome::new(t, Format::Jsonl);
    if !sk.all_in_cone {
        out.failures.push("a block leaves the cone".into());
    }
    if !sk.disjoint {
        out.failures.push("blocks share a bond".into());
    }
    Ok(out)
}

/// Places `--config` entries directly after the subcommand name and moves
/// every command-line flag after them, so command-line flags win.
fn expand_config(argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut config_path = None;
    let mut sub_pos = None;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(v) = a.strip_prefix("--config=") {
            config_path = Some(v.to_string());
        } else if a == "--config" {
            config_path = argv.get(i + 1).cloned();
        }
        if sub_pos.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub_pos = Some(i);
        }
        if VALUE_FLAGS.contains(&a.as_str()) {
            i += 1;
        }
        i += 1;
    }
    let Some(path) = config_path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("--config {path}: {e}")))?;
    let entries = parse_config(&text).map_err(|e| Failure::Usage(format!("--config {path}: {e}")))?;
    let mut sub = sub_pos.map(|p| argv[p].clone());
    let mut injected = Vec::new();
    for (k, v) in entries {
        match k.as_str() {
            "subcommand" => {
                if sub.is_none() {
                    sub = Some(v);
                }
            }
            "engine" | "timestamp" | "config" => {}
            _ => match v.as_str() {
                "true" => injected.push(format!("--{k}")),
                "false" => {}
                _ => {
                    injected.push(format!("--{k}"));
                    injected.push(v);
                }
            },
        }
    }
    let Some(sub) = sub else {
        return Ok(argv);
    };
    let mut out = vec![argv[0].clone(), sub];
    out.extend(injected);
    out.extend(argv.into_iter().enumerate().skip(1).filter(|(i, _)| Some(*i) != sub_pos).map(|(_, a)| a));
    Ok(out)
}

fn master_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn execute(cli: &Cli, seed: u64) -> Result<(ExperimentSpec, Outcome), Failure> {
    let (name, params, outcome) = match &cli.command {
        Command::Saw(a) => ("saw", flatten_params(a), run_saw(a)?),
        Command::Cluster(a) => ("cluster", flatten_params(a), run_cluster(a, seed)?),
        Command::Sphere(a) => ("sphere", flatten_params(a), run_sphere(a, seed, cli.format)?),
        Command::Tail(a) => ("tail", flatten_params(a), run_tail(a, seed)?),
        Command::Critical(a) => ("critical", flatten_params(a), run_critical(a, seed)?),
        Command::Dual2d(a) => ("dual2d", flatten_params(a), run_dual2d(a, seed)?),
        Command::Skeleton(a) => ("skeleton", flatten_params(a), run_skeleton(a, seed)?),
    };
    let format = cli.format.unwrap_or(outcome.default_format);
    if format == Format::Off && name != "sphere" {
        return Err(Failure::Usage("--format off is only available for sphere".into()));
    }
    let spec = ExperimentSpec {
        subcommand: name.to_string(),
        params,
        master_seed: seed,
        output: cli.output.as_ref().map(|p| p.display().to_string()),
        format,
    };
    Ok((spec, outcome))
}

fn run_inner(argv: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let argv = expand_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                write!(out, "{rendered}")?;
            } else {
                write!(err, "{rendered}")?;
            }
            return Ok(code);
        }
    };
    let seed = master_seed(cli.seed)?;
    let (spec, outcome) = match cli.threads {
        Some(0) => return Err(Failure::Usage("requires threads >= 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Failure::Internal(e.to_string()))?;
            pool.install(|| execute(&cli, seed))?
        }
        None => execute(&cli, seed)?,
    };
    let mut sink: Box<dyn Write + '_> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *out),
    };
    if spec.format == Format::Off {
        match &outcome.off {
            Some(buf) => sink.write_all(buf)?,
            None => return Err(Failure::Internal("first trial escaped; no complex to write".into())),
        }
        sink.flush()?;
    } else {
        write_results(&spec, &outcome.table, &mut sink)?;
    }
    drop(sink);
    for f in &outcome.failures {
        writeln!(err, "check failed: {f}")?;
    }
    if cli.verify && !outcome.failures.is_empty() {
        return Ok(1);
    }
    Ok(0)
}

/// Runs the CLI with explicit streams and returns the exit code:
/// 0 on success, 2 on invalid input, 1 on internal or `--verify` failure.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    match run_inner(argv, out, err) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            1
        }
    }
}

pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["plaq"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_lines() {
        let got = parse_config("# c\n\ndim = 3\np=0.5\n").unwrap();
        assert_eq!(got, vec![("dim".into(), "3".into()), ("p".into(), "0.5".into())]);
        assert!(matches!(parse_config("oops"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn saw_rows() {
        let (code, out, _) = run_str(&["saw", "--dim", "3", "--kmax", "3"]);
        assert_eq!(code, 0);
        let last = out.lines().last().unwrap();
        assert!(last.starts_with("3,150,150,"), "{last}");
    }

    #[test]
    fn bound_regime_is_validated() {
        let (code, _, err) = run_str(&["tail", "--dim", "3", "--p", "0.5", "--rlist", "1,2", "--bound"]);
        assert_eq!(code, 2);
        assert!(err.contains("(2d-1)"), "{err}");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, _) = run_str(&["saw", "--dim", "3", "--kmax", "3", "--bogus"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn later_flag_wins() {
        let (code, out, _) = run_str(&["saw", "--dim", "2", "--kmax", "2", "--kmax", "3"]);
        assert_eq!(code, 0);
        assert!(out.lines().last().unwrap().starts_with("3,"));
    }
}
