//! Command-line front end.
//!
//! Every subcommand writes one CSV table. With `--out PATH` the table goes to
//! `PATH` and a JSON sidecar holding the resolved command goes next to it;
//! `tasep replay SIDECAR` reruns that command and reproduces the table byte
//! for byte. Options can also come from a `key = value` file given with
//! `--config`; command-line flags take precedence over the file.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{diagonal_comparison, ScalingContext};
use crate::boundary::{boundary_normalization, NBoundary, Staircase, Step};
use crate::error::Error;
use crate::fredholm::{joint_current_prob, Balancing, CurrentQuery, TruncationPolicy};
use crate::green::{ggf_det, green_det, reachable, ParticleConfig, SpaceTimeConfig};
use crate::mc::run_jump_off;
use crate::scalar::{ModelParams, Rational, Scalar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "tasep", version, about = "Discrete-time TASEP: exact weights, kernels, Fredholm determinants, simulation")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Plain-text `key = value` file with default option values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV output path; a JSON sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print the CSV columns of the subcommand (or of all) and exit.
    #[arg(long, global = true)]
    pub schema: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Green function table G_t(x | y) over every reachable x.
    Green(GreenArgs),
    /// Generalized Green function of admissible space-time configurations.
    Ggf(GgfArgs),
    /// Total boundary mass for fixed-space, fixed-time or staircase boundaries.
    Boundary(BoundaryArgs),
    /// Joint jump-off CDF by Fredholm determinant over a threshold grid.
    Current(CurrentArgs),
    /// Monte Carlo histograms of jump-off times.
    Simulate(SimulateArgs),
    /// Rescaled kernel diagonal against the Airy2 limit.
    Airy(AiryArgs),
    /// Rerun the command recorded in a JSON sidecar.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    FixedSpace,
    FixedTime,
    Staircase,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct GreenArgs {
    /// Hopping probability, `a/b` or decimal.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Initial positions, rightmost first.
    #[arg(long, default_value = "0,-1", allow_hyphen_values = true)]
    pub y: String,
    #[arg(long, default_value_t = 2)]
    pub t: i64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct GgfArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Initial points `x:t,x:t,...`.
    #[arg(long, default_value = "0:0,-1:0", allow_hyphen_values = true)]
    pub initial: String,
    /// Final points `x:t,...`; several configurations separated by `;`.
    #[arg(long = "final", default_value = "1:1,0:2", allow_hyphen_values = true)]
    pub finals: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct BoundaryArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = BoundaryKind::FixedSpace)]
    pub kind: BoundaryKind,
    /// Boundary position (site, time, or staircase shift): `v` or `lo:hi`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub at: String,
    /// Number of particles, started from the step configuration at time 0.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Staircase anchor `x,t`.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    pub anchor: String,
    /// Staircase steps, a word over `R` (x+1) and `D` (t-1).
    #[arg(long, default_value = "")]
    pub steps: String,
    /// Staircase continuation before the anchor, `R` or `D`.
    #[arg(long, default_value = "D")]
    pub head: String,
    /// Staircase continuation after the last step, `R` or `D`.
    #[arg(long, default_value = "D")]
    pub tail: String,
    #[arg(long, default_value_t = 1e-10)]
    pub tail_tol: f64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct CurrentArgs {
    /// Hopping probability; the kernel is evaluated from exact rationals.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub x: i64,
    /// Particle labels, strictly increasing.
    #[arg(long, default_value = "1")]
    pub labels: String,
    /// Thresholds matching the labels, nondecreasing.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub thresholds: String,
    /// Common shift added to every threshold: `v` or `lo:hi`.
    #[arg(long, default_value = "0:20", allow_hyphen_values = true)]
    pub shift: String,
    /// Starting horizon; by default `max(a) + 4 ceil((x+N)/p)`.
    #[arg(long)]
    pub t_max: Option<i64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 8)]
    pub max_doublings: u32,
    /// `osborne`, `none`, or `beta:<value>`.
    #[arg(long, default_value = "osborne")]
    pub balancing: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    #[arg(long, default_value_t = 1)]
    pub n: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub x: i64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials still running after this many steps are censored.
    #[arg(long, default_value_t = 100_000)]
    pub t_cap: i64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(args_override_self = true)]
pub struct AiryArgs {
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// `(x + N) / L`.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Scales `L`.
    #[arg(long, default_value = "50,100,200")]
    pub ls: String,
    /// Label offsets `u`.
    #[arg(long, default_value = "0,-0.5,-1", allow_hyphen_values = true)]
    pub us: String,
    /// Time offsets `s`.
    #[arg(long, default_value = "-2,-1,0", allow_hyphen_values = true)]
    pub ss: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub sidecar: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::NonConvergence(_)) => EXIT_NONCONVERGENCE,
            CliError::Lib(_) | CliError::Usage(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// A CSV table and a free-form summary for the sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: serde_json::Value,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> CliResult<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Column names and descriptions per subcommand.
pub fn schema(name: &str) -> Vec<(&'static str, &'static str)> {
    match name {
        "green" => vec![
            ("x_1..x_N", "final positions, rightmost first"),
            ("probability", "G_t(x | y); num/den in exact mode"),
        ],
        "ggf" => vec![
            ("final", "final points x:t separated by ';'"),
            ("initial", "initial points x:t separated by ';'"),
            ("value", "generalized Green function"),
        ],
        "boundary" => vec![
            ("kind", "fixed-space, fixed-time or staircase"),
            ("position", "site, time or staircase shift"),
            ("particles", "number of boundary copies N"),
            ("horizon", "largest crossing time summed"),
            ("normalization", "total boundary mass up to the horizon"),
        ],
        "current" => vec![
            ("shift", "offset added to every threshold"),
            ("thresholds", "thresholds a_i separated by ';'"),
            ("probability", "P(t_{n_i} <= a_i for all i)"),
            ("error_estimate", "change over the last horizon doubling"),
            ("t_max", "horizon of the accepted determinant"),
        ],
        "simulate" => vec![
            ("label", "particle label n"),
            ("t", "jump-off time"),
            ("count", "uncensored trials with t_n = t"),
            ("frequency", "count / uncensored trials"),
        ],
        "airy" => vec![
            ("L", "scale"),
            ("u", "label offset"),
            ("s", "time offset"),
            ("n", "lattice label floor(L + u L^(2/3))"),
            ("tau", "lattice time"),
            ("s_eff", "(tau - L omega(n/L)) / L^(1/3)"),
            ("scaled_kernel", "L^(1/3) K(n,tau; n,tau)"),
            ("limit_nominal", "kappa_t K_Airy2(kappa_t s)"),
            ("limit_effective", "kappa_t K_Airy2(kappa_t s_eff)"),
            ("deviation_nominal", "|scaled_kernel - limit_nominal|"),
            ("deviation_effective", "|scaled_kernel - limit_effective|"),
        ],
        _ => Vec::new(),
    }
}

pub const SUBCOMMANDS: [&str; 6] = ["green", "ggf", "boundary", "current", "simulate", "airy"];

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Green(_) => "green",
        Command::Ggf(_) => "ggf",
        Command::Boundary(_) => "boundary",
        Command::Current(_) => "current",
        Command::Simulate(_) => "simulate",
        Command::Airy(_) => "airy",
        Command::Replay(_) => "replay",
    }
}

fn schema_text(names: &[&str]) -> String {
    let mut s = String::new();
    for name in names {
        s.push_str(&format!("{name}:\n"));
        for (c, d) in schema(name) {
            s.push_str(&format!("  {c:<20} {d}\n"));
        }
    }
    s
}

/// Exact rational from `a/b`, an integer, or a decimal literal.
pub fn parse_rational(s: &str) -> CliResult<Rational> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("cannot read '{s}' as a rational"));
    if let Some((a, b)) = s.split_once('/') {
        let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if b == BigInt::from(0) {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num = BigInt::from_str(&digits).map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(Rational::new(num, den))
}

fn exact_params(p: &str) -> CliResult<ModelParams<Rational>> {
    Ok(ModelParams::new(parse_rational(p)?)?)
}

fn float_params(p: &str) -> CliResult<ModelParams<f64>> {
    Ok(exact_params(p)?.to_float())
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry '{v}'"))))
        .collect()
}

/// `v` or `lo:hi`, inclusive.
fn parse_range(s: &str, what: &str) -> CliResult<Vec<i64>> {
    let num = |v: &str| v.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad {what} '{s}'")));
    match s.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if b < a {
                return usage(format!("empty {what} range '{s}'"));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(s)?]),
    }
}

fn parse_points(s: &str) -> CliResult<SpaceTimeConfig> {
    let mut pts = Vec::new();
    for item in s.split(',').filter(|v| !v.trim().is_empty()) {
        let Some((x, t)) = item.split_once(':') else {
            return usage(format!("point '{item}' is not of the form x:t"));
        };
        let x = x.trim().parse().map_err(|_| CliError::Usage(format!("bad point '{item}'")))?;
        let t = t.trim().parse().map_err(|_| CliError::Usage(format!("bad point '{item}'")))?;
        pts.push((x, t));
    }
    if pts.is_empty() {
        return usage("empty point list");
    }
    Ok(SpaceTimeConfig::new(pts))
}

fn render_points(c: &SpaceTimeConfig) -> String {
    c.points.iter().map(|(x, t)| format!("{x}:{t}")).collect::<Vec<_>>().join(";")
}

fn parse_step(s: &str) -> CliResult<Step> {
    match s.trim() {
        "R" | "r" => Ok(Step::Right),
        "D" | "d" => Ok(Step::Down),
        other => usage(format!("staircase step '{other}' must be R or D")),
    }
}

fn parse_balancing(s: &str) -> CliResult<Balancing> {
    match s.trim() {
        "osborne" => Ok(Balancing::Osborne),
        "none" => Ok(Balancing::None),
        other => match other.strip_prefix("beta:").map(str::parse::<f64>) {
            Some(Ok(b)) if b > 0.0 => Ok(Balancing::Beta(b)),
            _ => usage(format!("balancing '{other}' must be osborne, none or beta:<positive>")),
        },
    }
}

fn run_green(a: &GreenArgs) -> CliResult<Table> {
    let y = ParticleConfig::new(parse_list(&a.y, "position")?)?;
    if a.t < 0 {
        return usage("time must be nonnegative");
    }
    let mut cols: Vec<String> = (1..=y.len()).map(|i| format!("x_{i}")).collect();
    cols.push("probability".into());
    let mut table = Table::new(cols);
    let xs = reachable(&y, a.t);
    for x in &xs {
        let v = match a.mode {
            Mode::Exact => green_det(x, &y, a.t, &exact_params(&a.p)?)?.render(),
            Mode::Float => green_det(x, &y, a.t, &float_params(&a.p)?)?.render(),
        };
        let mut row: Vec<String> = x.coords().iter().map(i64::to_string).collect();
        row.push(v);
        table.rows.push(row);
    }
    table.summary = json!({ "configurations": xs.len() });
    Ok(table)
}

fn run_ggf(a: &GgfArgs) -> CliResult<Table> {
    let init = parse_points(&a.initial)?;
    let mut table = Table::new(schema("ggf").iter().map(|c| c.0.to_string()).collect());
    for f in a.finals.split(';').filter(|v| !v.trim().is_empty()) {
        let fin = parse_points(f)?;
        let v = match a.mode {
            Mode::Exact => ggf_det(&fin, &init, &exact_params(&a.p)?)?.render(),
            Mode::Float => ggf_det(&fin, &init, &float_params(&a.p)?)?.render(),
        };
        table.rows.push(vec![render_points(&fin), render_points(&init), v]);
    }
    Ok(table)
}

fn run_boundary(a: &BoundaryArgs) -> CliResult<Table> {
    if a.n == 0 {
        return usage("need at least one particle");
    }
    let mut table = Table::new(schema("boundary").iter().map(|c| c.0.to_string()).collect());
    let init = SpaceTimeConfig::equal_time(&ParticleConfig::step(a.n), 0);
    let kind = match a.kind {
        BoundaryKind::FixedSpace => "fixed-space",
        BoundaryKind::FixedTime => "fixed-time",
        BoundaryKind::Staircase => "staircase",
    };
    for pos in parse_range(&a.at, "position")? {
        let base = match a.kind {
            BoundaryKind::FixedSpace => Staircase::fixed_space(pos),
            BoundaryKind::FixedTime => Staircase::fixed_time(pos),
            BoundaryKind::Staircase => {
                let anchor: Vec<i64> = parse_list(&a.anchor, "anchor")?;
                if anchor.len() != 2 {
                    return usage("anchor must be x,t");
                }
                let steps = a
                    .steps
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| parse_step(&c.to_string()))
                    .collect::<CliResult<Vec<_>>>()?;
                Staircase::new((anchor[0], anchor[1]), steps, parse_step(&a.head)?, parse_step(&a.tail)?)
                    .shifted(pos)
            }
        };
        let nb = NBoundary::new(base, a.n)?;
        let (total, horizon) = match a.mode {
            Mode::Exact => {
                let (s, h) = boundary_normalization(&nb, &init, &exact_params(&a.p)?, a.tail_tol)?;
                (s.render(), h)
            }
            Mode::Float => {
                let (s, h) = boundary_normalization(&nb, &init, &float_params(&a.p)?, a.tail_tol)?;
                (s.render(), h)
            }
        };
        table
            .rows
            .push(vec![kind.into(), pos.to_string(), a.n.to_string(), horizon.to_string(), total]);
    }
    Ok(table)
}

fn run_current(a: &CurrentArgs) -> CliResult<Table> {
    let params = exact_params(&a.p)?;
    let labels: Vec<i64> = parse_list(&a.labels, "label")?;
    let base: Vec<i64> = parse_list(&a.thresholds, "threshold")?;
    let policy = TruncationPolicy {
        t_max: a.t_max,
        tol: a.tol,
        max_doublings: a.max_doublings,
        balancing: parse_balancing(&a.balancing)?,
    };
    if !(a.tol > 0.0) {
        return usage("tol must be positive");
    }
    let mut table = Table::new(schema("current").iter().map(|c| c.0.to_string()).collect());
    for s in parse_range(&a.shift, "shift")? {
        let th: Vec<i64> = base.iter().map(|v| v + s).collect();
        if th.iter().any(|&a| a < 0) {
            return usage(format!("thresholds must be nonnegative, got {th:?}"));
        }
        let q = CurrentQuery::new(labels.clone(), th.clone(), a.x, a.n, params.clone())?;
        let r = joint_current_prob(&q, &policy)?;
        table.rows.push(vec![
            s.to_string(),
            th.iter().map(i64::to_string).collect::<Vec<_>>().join(";"),
            r.probability.to_string(),
            r.error_estimate.to_string(),
            r.t_max.to_string(),
        ]);
    }
    Ok(table)
}

fn run_simulate(a: &SimulateArgs) -> CliResult<Table> {
    let params = float_params(&a.p)?;
    let sample = run_jump_off(a.n, a.x, &params, a.t_cap, a.trials, a.seed)?;
    let mut table = Table::new(schema("simulate").iter().map(|c| c.0.to_string()).collect());
    let kept = sample.times.len();
    let mut means = Vec::new();
    for n in 1..=a.n {
        for (t, c) in sample.histogram(n) {
            table.rows.push(vec![
                n.to_string(),
                t.to_string(),
                c.to_string(),
                (c as f64 / kept as f64).to_string(),
            ]);
        }
        if kept > 0 {
            let (m, se) = sample.mean(n);
            means.push(json!({ "label": n, "mean": m, "standard_error": se }));
        }
    }
    table.summary = json!({
        "trials": sample.trials,
        "censored": sample.censored,
        "means": means,
    });
    Ok(table)
}

fn run_airy(a: &AiryArgs) -> CliResult<Table> {
    let exact = exact_params(&a.p)?;
    let ctx = ScalingContext::new(&exact.to_float(), a.gamma, 1.0)?;
    let mut table = Table::new(schema("airy").iter().map(|c| c.0.to_string()).collect());
    for l in parse_list::<f64>(&a.ls, "scale")? {
        for u in parse_list::<f64>(&a.us, "u")? {
            for s in parse_list::<f64>(&a.ss, "s")? {
                let c = diagonal_comparison(l, u, s, &ctx, &exact)?;
                table.rows.push(
                    [
                        c.l,
                        c.u,
                        c.s,
                        c.n as f64,
                        c.tau as f64,
                        c.s_eff,
                        c.scaled_kernel,
                        c.limit_nominal,
                        c.limit_effective,
                        c.deviation_nominal(),
                        c.deviation_effective(),
                    ]
                    .iter()
                    .map(f64::to_string)
                    .collect(),
                );
            }
        }
    }
    table.summary = json!({ "kappa_h": ctx.kappa_h(), "kappa_t": ctx.kappa_t(), "w0": ctx.w0() });
    Ok(table)
}

/// Evaluate one subcommand.
pub fn run(cmd: &Command) -> CliResult<Table> {
    match cmd {
        Command::Green(a) => run_green(a),
        Command::Ggf(a) => run_ggf(a),
        Command::Boundary(a) => run_boundary(a),
        Command::Current(a) => run_current(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Airy(a) => run_airy(a),
        Command::Replay(_) => usage("replay cannot be nested"),
    }
}

/// Sidecar contents: the resolved command plus run metadata.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub threads: Option<usize>,
    pub output: String,
    pub summary: serde_json::Value,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let p = out.with_extension("json");
    if p == out {
        out.with_extension("sidecar.json")
    } else {
        p
    }
}

/// `key = value` lines into `--key=value` flags. Blank lines and `#`
/// comments are skipped; `true`/`false` toggle bare flags. A `command`
/// key names the subcommand.
pub fn config_flags(text: &str) -> CliResult<(Option<String>, Vec<String>)> {
    let mut cmd = None;
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        if k == "command" {
            cmd = Some(v.to_string());
            continue;
        }
        if k == "config" {
            return usage("config files cannot include other config files");
        }
        match v {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    Ok((cmd, flags))
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Splice flags from the config file in front of the command-line flags so
/// the latter win.
fn merge_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
    let (file_cmd, flags) = config_flags(&text)?;
    let pos = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let mut out = args.clone();
    match (pos, file_cmd) {
        (Some(i), _) => {
            out.splice(i + 1..i + 1, flags);
        }
        (None, Some(c)) => {
            if !SUBCOMMANDS.contains(&c.as_str()) {
                return usage(format!("config names unknown command '{c}'"));
            }
            out.push(c);
            out.extend(flags);
        }
        (None, None) => {
            if !flags.is_empty() {
                return usage("config sets options but no command is given");
            }
        }
    }
    Ok(out)
}

fn emit(cmd: &Command, threads: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let table = match threads {
        Some(0) => return usage("--threads must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| run(cmd))?,
        None => run(cmd)?,
    };
    match out {
        Some(path) => {
            table.write_csv(fs::File::create(path)?)?;
            let side = Sidecar {
                tool: "tasep".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: cmd.clone(),
                threads,
                output: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                summary: table.summary.clone(),
            };
            let mut text = serde_json::to_string_pretty(&side).map_err(|e| CliError::Io(e.into()))?;
            text.push('\n');
            fs::write(sidecar_path(path), text)?;
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.schema {
        let names: Vec<&str> = match &cli.command {
            Some(Command::Replay(_)) | None => SUBCOMMANDS.to_vec(),
            Some(c) => vec![command_name(c)],
        };
        print!("{}", schema_text(&names));
        return Ok(());
    }
    match cli.command {
        None => usage("no command given; see --help"),
        Some(Command::Replay(r)) => {
            let text = fs::read_to_string(&r.sidecar)?;
            let side: Sidecar = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("unreadable sidecar {}: {e}", r.sidecar.display())))?;
            let out = cli.out.unwrap_or_else(|| r.sidecar.with_file_name(&side.output));
            emit(&side.command, cli.threads.or(side.threads), Some(&out))
        }
        Some(cmd) => emit(&cmd, cli.threads, cli.out.as_deref()),
    }
}

/// Parse, run, and map the outcome to an exit status.
pub fn main_with_args(args: Vec<String>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
