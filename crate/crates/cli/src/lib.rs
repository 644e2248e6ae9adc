//! Command-line front end: equilibrium solves, sweeps, dynamics, revenue
//! curves, the SPSA price controller and the five reference figures.

pub mod figures;
pub mod svg;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use evopoisson::equilibrium::DEFAULT_TOL;
use evopoisson::model::{ModelConfig, RateSpec, TypeConfig, DEFAULT_SAFESET_CAP};
use evopoisson::{
    default_dt, discrete_replicator_strided, integrate_replicator, optimize_revenue, population_step_offset,
    revenue_concavity, solve_equilibrium, ControlMode, ControllerSettings, Convention, PayoffEngine,
    PopulationModel, Rate, ScheduleFamily, StepSchedule,
};

use crate::table::{fmt_num, Cell, Plot, Table};

/// Overrides the safe-set enumeration cap.
pub const CAP_ENV: &str = "EVOPOISSON_SAFESET_CAP";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<evopoisson::Error> for CliError {
    fn from(e: evopoisson::Error) -> Self {
        use evopoisson::Error as E;
        match e {
            E::Numerical(_) | E::ResourceLimit { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Literal,
    Exclusive,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Literal => Convention::LiteralEq2,
            ConventionArg::Exclusive => Convention::SelfExclusive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }

    fn render(self, table: &Table) -> String {
        match self {
            Format::Csv => table.to_csv(),
            Format::Svg => svg::render(table),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "evopoisson", version, about = "Virus-protection game with Poisson populations")]
pub struct Cli {
    /// JSON model file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `figure`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the symmetric equilibrium.
    Eq(EqArgs),
    /// Evaluate p*, protection rate and revenue on a parameter grid.
    Sweep(SweepArgs),
    /// Integrate the replicator dynamics.
    Replicator(ReplicatorArgs),
    /// Revenue curve, optimal price and concavity report.
    Revenue(RevenueArgs),
    /// Run the SPSA price controller.
    Spsa(SpsaArgs),
    /// Regenerate one of the reference figures (2 to 6).
    Figure(FigureArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelOverrides {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Protection cost C.
    #[arg(long)]
    pub price: Option<f64>,
    /// Infection cost K.
    #[arg(long)]
    pub infection_cost: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EqArgs {
    #[command(flatten)]
    pub model: ModelOverrides,
}

/// Sweep parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Param {
    Lambda,
    /// Share of type 1 in a two-type population.
    R,
    C,
    K,
    /// Spreading rate of type `t` (1-based).
    Tau(usize),
}

impl Param {
    fn name(self) -> String {
        match self {
            Param::Lambda => "lambda".into(),
            Param::R => "r".into(),
            Param::C => "C".into(),
            Param::K => "K".into(),
            Param::Tau(t) => format!("tau{t}"),
        }
    }

    fn unit(self) -> &'static str {
        match self {
            Param::Lambda => "players",
            Param::R => "fraction",
            Param::C | Param::K => "cost",
            Param::Tau(_) => "ratio",
        }
    }

    fn apply(self, model: &PopulationModel<f64>, v: f64) -> Result<PopulationModel<f64>> {
        Ok(match self {
            Param::Lambda => model.with_lambda(v)?,
            Param::C => model.with_protection_cost(v)?,
            Param::K => model.with_infection_cost(v)?,
            Param::R => {
                if model.num_types() != 2 {
                    return Err(CliError::Config("sweeping r needs a two-type model".into()));
                }
                model.with_type_dist(&[v, 1.0 - v])?
            }
            Param::Tau(t) => model.with_spreading_rate(t - 1, &Rate::decimal(v)?)?,
        })
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lambda" => Ok(Param::Lambda),
            "r" => Ok(Param::R),
            "C" | "c" | "price" => Ok(Param::C),
            "K" | "k" => Ok(Param::K),
            _ => match s.strip_prefix("tau").map(str::parse::<usize>) {
                Some(Ok(t)) if t >= 1 => Ok(Param::Tau(t)),
                _ => Err(format!("unknown sweep parameter `{s}`")),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

/// `NAME=LO:HI:N` (N evenly spaced points) or `NAME=v1,v2,...` (increasing).
pub fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    let (name, spec) = s.split_once('=').ok_or_else(|| format!("expected NAME=RANGE, got `{s}`"))?;
    let param: Param = name.trim().parse()?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
    let values = if let [lo, hi, n] = spec.split(':').collect::<Vec<_>>()[..] {
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|e| format!("bad point count `{n}`: {e}"))?;
        if lo > hi {
            return Err(format!("range {lo}:{hi} is not ordered"));
        }
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        spec.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<std::result::Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(format!("empty grid for `{name}`"));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(format!("grid for `{name}` must be increasing"));
    }
    Ok(Axis { param, values })
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Grid axis, e.g. `r=0:1:101` or `lambda=2,10,30`; give one or two (first is outer).
    #[arg(long = "grid", required = true, value_parser = parse_axis)]
    pub axes: Vec<Axis>,
    #[command(flatten)]
    pub model: ModelOverrides,
}

#[derive(Debug, Args)]
pub struct ReplicatorArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.3, 0.7])]
    pub p0: Vec<f64>,
    /// Use the discrete recursion instead of the ODE.
    #[arg(long)]
    pub discrete: bool,
    /// Step sizes of the discrete recursion.
    #[arg(long, default_value = "1/n")]
    pub schedule: String,
    /// Shift of the discrete schedule, `b(n) = base(n + offset)`; defaults to floor(max(C, K - C)).
    #[arg(long)]
    pub offset: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
    /// Keep every `stride`-th point.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    #[command(flatten)]
    pub model: ModelOverrides,
}

#[derive(Debug, Args)]
pub struct RevenueArgs {
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub c_lo: f64,
    /// Defaults to K.
    #[arg(long)]
    pub c_hi: Option<f64>,
    #[command(flatten)]
    pub model: ModelOverrides,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Coupled,
    Nested,
}

impl From<ModeArg> for ControlMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Coupled => ControlMode::Coupled,
            ModeArg::Nested => ControlMode::Nested,
        }
    }
}

#[derive(Debug, Args)]
pub struct SpsaArgs {
    #[arg(long, default_value = "1/(1+n log n)")]
    pub schedule: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Nested)]
    pub mode: ModeArg,
    /// Defaults to 0.01 K.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Defaults to 0.2 K.
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long, default_value_t = 300)]
    pub n_outer: u64,
    /// Initial OFF share of the population.
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[command(flatten)]
    pub model: ModelOverrides,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(2..=6))]
    pub which: u8,
    /// Interaction sizes (figures 2 and 4).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Spreading rates of type 1 (figure 3).
    #[arg(long, value_delimiter = ',')]
    pub tau1: Option<Vec<f64>>,
    /// Grid points along r or C (figures 2, 3, 5).
    #[arg(long)]
    pub points: Option<usize>,
    /// Initial states (figure 4).
    #[arg(long, value_delimiter = ',')]
    pub p0: Option<Vec<f64>>,
    /// Controller step sizes (figure 6).
    #[arg(long, value_delimiter = ';')]
    pub schedules: Option<Vec<String>>,
    #[arg(long)]
    pub n_outer: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

fn rate(x: f64) -> Option<RateSpec> {
    Some(RateSpec::Decimal(x))
}

/// r = (0.1, 0.9), tau = (0.05, 0.2), C = 4, K = 5, lambda = 10.
pub fn reference_config() -> ModelConfig {
    ModelConfig {
        lambda: 10.0,
        types: vec![
            TypeConfig { r: 0.1, delta: None, tau: rate(0.05) },
            TypeConfig { r: 0.9, delta: None, tau: rate(0.2) },
        ],
        beta: None,
        infection_cost: 5.0,
        protection_cost: 4.0,
        convention: None,
    }
}

/// tau = (0.5, 0.98), r = (0.3, 0.7), K = 10, lambda = 10.
pub fn revenue_config() -> ModelConfig {
    ModelConfig {
        lambda: 10.0,
        types: vec![
            TypeConfig { r: 0.3, delta: None, tau: rate(0.5) },
            TypeConfig { r: 0.7, delta: None, tau: rate(0.98) },
        ],
        beta: None,
        infection_cost: 10.0,
        protection_cost: 4.0,
        convention: None,
    }
}

/// beta = 5, delta = (10, 5.1), r = (0.3, 0.7), K = 10, lambda = 10.
pub fn controller_config() -> ModelConfig {
    ModelConfig {
        lambda: 10.0,
        types: vec![
            TypeConfig { r: 0.3, delta: rate(10.0), tau: None },
            TypeConfig { r: 0.7, delta: rate(5.1), tau: None },
        ],
        beta: rate(5.0),
        infection_cost: 10.0,
        protection_cost: 4.0,
        convention: None,
    }
}

impl Cli {
    /// Model from `--config` or `default`, with `--convention` and overrides applied.
    pub fn model(&self, default: fn() -> ModelConfig, o: &ModelOverrides) -> Result<PopulationModel<f64>> {
        let mut model = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                PopulationModel::from_json_str(&text).map_err(|e| match e {
                    evopoisson::Error::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                    other => other.into(),
                })?
            }
            None => default().build()?,
        };
        if let Some(c) = self.convention {
            model = model.with_convention(c.into());
        }
        if let Some(l) = o.lambda {
            model = model.with_lambda(l)?;
        }
        if let Some(k) = o.infection_cost {
            model = model.with_infection_cost(k)?;
        }
        if let Some(c) = o.price {
            model = model.with_protection_cost(c)?;
        }
        Ok(model)
    }
}

/// Enumeration cap from the environment, or the library default.
pub fn safe_set_cap() -> Result<usize> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{CAP_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SAFESET_CAP),
    }
}

pub fn engine(model: PopulationModel<f64>) -> Result<PayoffEngine<f64>> {
    Ok(PayoffEngine::with_cap(model, safe_set_cap()?)?)
}

pub fn parse_schedule(s: &str) -> Result<ScheduleFamily> {
    s.parse::<ScheduleFamily>().map_err(CliError::from)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes `table` to `--out` or returns it for stdout.
fn emit(cli: &Cli, table: &Table) -> Result<String> {
    let text = cli.format.render(table);
    match &cli.out {
        Some(path) => {
            write_file(path, &text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

/// Runs the command and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Eq(a) => cmd_eq(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Replicator(a) => cmd_replicator(cli, a),
        Command::Revenue(a) => cmd_revenue(cli, a),
        Command::Spsa(a) => cmd_spsa(cli, a),
        Command::Figure(a) => cmd_figure(cli, a),
    }
}

fn cmd_eq(cli: &Cli, args: &EqArgs) -> Result<String> {
    let model = cli.model(reference_config, &args.model)?;
    let e = engine(model)?;
    let eq = solve_equilibrium(&e, DEFAULT_TOL)?;
    let mut out = format!(
        "p_star = {}\nprotection_rate = {}\nkind = {}\nresidual = {}\nconvention = {}\n",
        fmt_num(eq.p_star),
        fmt_num(eq.protection_rate()),
        eq.kind,
        fmt_num(eq.residual),
        eq.convention
    );
    if cli.out.is_some() {
        let plot = Plot { title: "equilibrium".into(), x: 0, y: 3, group: None };
        let mut t = Table::new(
            "eq",
            &[
                ("lambda", "players"),
                ("C", "cost"),
                ("K", "cost"),
                ("p_star", "probability"),
                ("protection_rate", "fraction"),
                ("kind", "label"),
                ("residual", "1"),
                ("convention", "label"),
            ],
            plot,
        );
        t.push(vec![
            Cell::Num(e.lambda()),
            Cell::Num(e.protection_cost()),
            Cell::Num(e.infection_cost()),
            Cell::Num(eq.p_star),
            Cell::Num(eq.protection_rate()),
            Cell::Text(eq.kind.to_string()),
            Cell::Num(eq.residual),
            Cell::Text(eq.convention.to_string()),
        ]);
        out.push_str(&emit(cli, &t)?);
    }
    Ok(out)
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> Result<String> {
    if args.axes.len() > 2 {
        return Err(CliError::Config("sweeps take at most two --grid axes".into()));
    }
    let base = cli.model(reference_config, &args.model)?;
    let mut columns: Vec<(String, &str)> = args.axes.iter().map(|a| (a.param.name(), a.param.unit())).collect();
    columns.extend([
        ("p_star".to_string(), "probability"),
        ("protection_rate".to_string(), "fraction"),
        ("revenue".to_string(), "cost per game"),
    ]);
    let cols: Vec<(&str, &str)> = columns.iter().map(|(n, u)| (n.as_str(), *u)).collect();
    let n_axes = args.axes.len();
    let plot = Plot {
        title: "sweep".into(),
        x: n_axes - 1,
        y: n_axes + 1,
        group: (n_axes == 2).then_some(0),
    };
    let mut table = Table::new("sweep", &cols, plot);

    let inner = args.axes.get(1);
    for &v in &args.axes[0].values {
        let outer = args.axes[0].param.apply(&base, v)?;
        let inner_values: Vec<Option<f64>> = match inner {
            Some(a) => a.values.iter().copied().map(Some).collect(),
            None => vec![None],
        };
        for w in inner_values {
            let m = match (inner, w) {
                (Some(a), Some(w)) => a.param.apply(&outer, w)?,
                _ => outer.clone(),
            };
            let e = engine(m)?;
            let eq = solve_equilibrium(&e, DEFAULT_TOL)?;
            let mut row = vec![Cell::Num(v)];
            if let Some(w) = w {
                row.push(Cell::Num(w));
            }
            row.extend([
                Cell::Num(eq.p_star),
                Cell::Num(eq.protection_rate()),
                Cell::Num(e.lambda() * eq.protection_rate() * e.protection_cost()),
            ]);
            table.push(row);
        }
    }
    emit(cli, &table)
}

fn cmd_replicator(cli: &Cli, args: &ReplicatorArgs) -> Result<String> {
    let model = cli.model(reference_config, &args.model)?;
    let e = engine(model)?;
    let plot = Plot { title: "replicator dynamics".into(), x: 1, y: 2, group: Some(0) };
    let time_unit = if args.discrete { "iteration" } else { "time" };
    let mut table = Table::new(
        "replicator",
        &[("p0", "probability"), ("t_or_n", time_unit), ("p", "probability")],
        plot,
    );
    let mut summary = String::new();
    for &p0 in &args.p0 {
        let tr = if args.discrete {
            let family = parse_schedule(&args.schedule)?;
            let offset = args.offset.unwrap_or_else(|| population_step_offset(&e));
            let schedule = StepSchedule::new(family).with_offset(offset);
            discrete_replicator_strided(&e, p0, &schedule, args.n_max, args.tol, args.stride)?
        } else {
            let dt = args.dt.unwrap_or_else(|| default_dt(&e, args.epsilon));
            let tr = integrate_replicator(&e, p0, dt, args.t_max, args.epsilon, args.tol)?;
            thin(tr, args.stride)
        };
        for w in &tr.warnings {
            eprintln!("warning: {w}");
        }
        summary.push_str(&format!(
            "p0 = {}: final = {}, converged = {}\n",
            fmt_num(p0),
            fmt_num(tr.last_value()),
            tr.converged
        ));
        for (t, p) in tr.times.iter().zip(&tr.values) {
            table.push(vec![Cell::Num(p0), Cell::Num(*t), Cell::Num(*p)]);
        }
    }
    let body = emit(cli, &table)?;
    Ok(if cli.out.is_some() { summary + &body } else { body })
}

/// Keeps every `stride`-th point and the last one.
pub fn thin(mut tr: evopoisson::Trajectory<f64>, stride: u64) -> evopoisson::Trajectory<f64> {
    if stride <= 1 {
        return tr;
    }
    let n = tr.values.len();
    let keep: Vec<usize> = (0..n).filter(|&i| i as u64 % stride == 0 || i + 1 == n).collect();
    tr.times = keep.iter().map(|&i| tr.times[i]).collect();
    tr.values = keep.iter().map(|&i| tr.values[i]).collect();
    tr
}

fn cmd_revenue(cli: &Cli, args: &RevenueArgs) -> Result<String> {
    let model = cli.model(revenue_config, &args.model)?;
    let e = engine(model)?;
    let k = e.infection_cost();
    let c_hi = args.c_hi.unwrap_or(k);
    if !(args.c_lo >= 0.0 && args.c_lo < c_hi) || args.points < 2 {
        return Err(CliError::Config("need 0 <= c_lo < c_hi and at least 2 points".into()));
    }
    let table = figures::revenue_table("revenue", &e, args.c_lo, c_hi, args.points)?;
    let opt = optimize_revenue(&e, 1e-8)?;
    let mut summary = format!("C_star = {}\nR_star = {}\n", fmt_num(opt.price), fmt_num(opt.revenue));
    if c_hi <= k && args.points >= 3 {
        match revenue_concavity(&e, args.c_lo, c_hi, args.points) {
            Ok(r) => summary.push_str(&format!(
                "concave_from = {}\nconcave_to = {}\n",
                r.c0.map(fmt_num).unwrap_or_else(|| "none".into()),
                fmt_num(r.upper)
            )),
            Err(err) => summary.push_str(&format!("concavity = {err}\n")),
        }
    }
    let body = emit(cli, &table)?;
    Ok(if cli.out.is_some() { summary + &body } else { body })
}

fn cmd_spsa(cli: &Cli, args: &SpsaArgs) -> Result<String> {
    let model = cli.model(controller_config, &args.model)?;
    let e = engine(model)?;
    let schedule = StepSchedule::new(parse_schedule(&args.schedule)?);
    let mut settings = ControllerSettings::for_cost(e.infection_cost(), schedule, args.mode.into(), cli.seed);
    settings.n_outer = args.n_outer;
    if let Some(d) = args.delta {
        settings.delta = d;
    }
    if let Some(c) = args.c0 {
        settings.c0 = c;
    }
    let (table, state) = figures::controller_trace("spsa", &e, &settings, args.p0)?;
    let mut summary = format!(
        "C_final = {}\nschedule = {}\nadmissible = {}\n",
        fmt_num(state.price),
        state.schedule.family,
        state.schedule_admissible()
    );
    if !state.schedule_admissible() {
        eprintln!("warning: step sizes {} do not meet all convergence conditions", state.schedule.family);
        summary.push_str(&format!("flags = {:?}\n", state.flags));
    }
    let body = emit(cli, &table)?;
    Ok(if cli.out.is_some() { summary + &body } else { body })
}

fn cmd_figure(cli: &Cli, args: &FigureArgs) -> Result<String> {
    let tables = figures::build(cli, args)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut out = String::new();
    for t in &tables {
        let path = dir.join(format!("{}.{}", t.name, cli.format.extension()));
        write_file(&path, &cli.format.render(t))?;
        out.push_str(&format!("wrote {}\n", path.display()));
    }
    Ok(out)
}

/// `lambda` as a file-name fragment.
pub(crate) fn tag(x: f64) -> String {
    fmt_num(x)
}
