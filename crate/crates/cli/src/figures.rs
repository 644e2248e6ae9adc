//! Tables behind the five reference figures.

use evopoisson::equilibrium::DEFAULT_TOL;
use evopoisson::{
    default_dt, integrate_replicator, run_on_game, solve_equilibrium, ControlMode, ControllerSettings,
    ControllerState, PayoffEngine, PopulationModel, Rate, StepSchedule,
};

use crate::table::{Cell, Plot, Table};
use crate::{
    controller_config, engine, parse_schedule, reference_config, revenue_config, tag, Cli, CliError, FigureArgs,
    ModelOverrides, Result,
};

pub const FIG2_LAMBDAS: [f64; 4] = [2.0, 10.0, 20.0, 30.0];
pub const FIG3_LAMBDA: f64 = 30.0;
pub const FIG3_TAU1: [f64; 2] = [0.05, 0.1];
pub const FIG4_LAMBDA: f64 = 10.0;
pub const FIG4_P0: [f64; 2] = [0.3, 0.7];
pub const FIG6_SCHEDULES: [&str; 3] = ["1/(1+n log n)", "1/n", "1/n^2"];
pub const DEFAULT_R_POINTS: usize = 101;
pub const DEFAULT_C_POINTS: usize = 201;
pub const FIG6_N_OUTER: u64 = 300;
/// Initial OFF share of the population driven by the controller.
pub const FIG6_P0: f64 = 0.5;
/// Convergence threshold of the population between price updates.
pub const POPULATION_TOL: f64 = 1e-8;
pub const POPULATION_N_MAX: u64 = 10_000_000;

pub fn build(cli: &Cli, args: &FigureArgs) -> Result<Vec<Table>> {
    let none = ModelOverrides::default();
    match args.which {
        2 => {
            let model = two_types(cli.model(reference_config, &none)?)?;
            let lambdas = args.lambdas.clone().unwrap_or_else(|| FIG2_LAMBDAS.to_vec());
            let points = args.points.unwrap_or(DEFAULT_R_POINTS);
            lambdas
                .iter()
                .map(|&l| {
                    let m = model.with_lambda(l)?;
                    let name = format!("fig2_lambda_{}", tag(l));
                    protection_vs_r(&name, &m, ("lambda", "players", l), points)
                })
                .collect()
        }
        3 => {
            let model = two_types(cli.model(reference_config, &none)?)?;
            let lambda = args.lambdas.as_ref().and_then(|l| l.first().copied()).unwrap_or(FIG3_LAMBDA);
            let model = model.with_lambda(lambda)?;
            let taus = args.tau1.clone().unwrap_or_else(|| FIG3_TAU1.to_vec());
            let points = args.points.unwrap_or(DEFAULT_R_POINTS);
            taus.iter()
                .map(|&tau| {
                    let m = model.with_spreading_rate(0, &Rate::decimal(tau)?)?;
                    let name = format!("fig3_tau1_{}", tag(tau));
                    protection_vs_r(&name, &m, ("tau1", "ratio", tau), points)
                })
                .collect()
        }
        4 => {
            let model = cli.model(reference_config, &none)?;
            let lambdas = args.lambdas.clone().unwrap_or_else(|| vec![FIG4_LAMBDA]);
            let starts = args.p0.clone().unwrap_or_else(|| FIG4_P0.to_vec());
            let mut tables = Vec::new();
            for &l in &lambdas {
                let e = engine(model.with_lambda(l)?)?;
                for &p0 in &starts {
                    let name = format!("fig4_lambda_{}_p0_{}", tag(l), tag(p0));
                    tables.push(trajectory_table(&name, &e, p0)?);
                }
            }
            Ok(tables)
        }
        5 => {
            let e = engine(cli.model(revenue_config, &none)?)?;
            let k = e.infection_cost();
            Ok(vec![revenue_table("fig5", &e, 0.0, k, args.points.unwrap_or(DEFAULT_C_POINTS))?])
        }
        6 => {
            let e = engine(cli.model(controller_config, &none)?)?;
            let names: Vec<String> = match &args.schedules {
                Some(s) => s.clone(),
                None => FIG6_SCHEDULES.iter().map(|s| s.to_string()).collect(),
            };
            let mode: ControlMode = args.mode.map(Into::into).unwrap_or(ControlMode::Nested);
            names
                .iter()
                .map(|s| {
                    let schedule = StepSchedule::new(parse_schedule(s)?);
                    let mut settings = ControllerSettings::for_cost(e.infection_cost(), schedule, mode, cli.seed);
                    settings.n_outer = args.n_outer.unwrap_or(FIG6_N_OUTER);
                    let name = format!("fig6_{}", schedule.family.slug());
                    Ok(controller_trace(&name, &e, &settings, FIG6_P0)?.0)
                })
                .collect()
        }
        n => Err(CliError::Config(format!("no figure {n}"))),
    }
}

fn two_types(model: PopulationModel<f64>) -> Result<PopulationModel<f64>> {
    if model.num_types() != 2 {
        return Err(CliError::Config(format!(
            "this figure needs a two-type model, got {} types",
            model.num_types()
        )));
    }
    Ok(model)
}

/// Protection rate against the share `r` of type 1.
fn protection_vs_r(name: &str, model: &PopulationModel<f64>, fixed: (&str, &str, f64), points: usize) -> Result<Table> {
    if points < 2 {
        return Err(CliError::Config("need at least 2 grid points".into()));
    }
    let plot = Plot { title: name.into(), x: 1, y: 2, group: None };
    let mut t = Table::new(name, &[(fixed.0, fixed.1), ("r", "fraction"), ("protection_rate", "fraction")], plot);
    let base = engine(model.clone())?;
    for i in 0..points {
        let r = i as f64 / (points - 1) as f64;
        let e = base.with_type_dist(&[r, 1.0 - r])?;
        let eq = solve_equilibrium(&e, DEFAULT_TOL)?;
        t.push(vec![Cell::Num(fixed.2), Cell::Num(r), Cell::Num(eq.protection_rate())]);
    }
    Ok(t)
}

fn trajectory_table(name: &str, e: &PayoffEngine<f64>, p0: f64) -> Result<Table> {
    let tr = integrate_replicator(e, p0, default_dt(e, 1.0), 200.0, 1.0, 1e-10)?;
    let plot = Plot { title: name.into(), x: 0, y: 1, group: None };
    let mut t = Table::new(name, &[("t", "time"), ("p", "probability")], plot);
    for (time, p) in tr.times.iter().zip(&tr.values) {
        t.push(vec![Cell::Num(*time), Cell::Num(*p)]);
    }
    Ok(t)
}

pub fn revenue_table(name: &str, e: &PayoffEngine<f64>, c_lo: f64, c_hi: f64, points: usize) -> Result<Table> {
    if points < 2 {
        return Err(CliError::Config("need at least 2 grid points".into()));
    }
    let plot = Plot { title: name.into(), x: 0, y: 2, group: None };
    let mut t = Table::new(
        name,
        &[("C", "cost"), ("p_star", "probability"), ("revenue", "cost per game")],
        plot,
    );
    for i in 0..points {
        let c = c_lo + (c_hi - c_lo) * i as f64 / (points - 1) as f64;
        let eq = solve_equilibrium(&e.with_price(c)?, DEFAULT_TOL)?;
        t.push(vec![Cell::Num(c), Cell::Num(eq.p_star), Cell::Num(e.lambda() * eq.protection_rate() * c)]);
    }
    Ok(t)
}

pub fn controller_trace(
    name: &str,
    e: &PayoffEngine<f64>,
    settings: &ControllerSettings<f64>,
    p0: f64,
) -> Result<(Table, ControllerState<f64>)> {
    let state = run_on_game(e, settings, p0, POPULATION_TOL, POPULATION_N_MAX)?;
    let plot = Plot { title: format!("{name} ({})", settings.schedule.family), x: 0, y: 1, group: None };
    let mut t = Table::new(
        name,
        &[
            ("n", "iteration"),
            ("C_n", "cost"),
            ("R_hat", "cost per game"),
            ("Delta_n", "sign"),
            ("p_population", "probability"),
        ],
        plot,
    );
    for s in &state.trace {
        t.push(vec![
            Cell::Int(s.n as i64),
            Cell::Num(s.price),
            Cell::Num(s.revenue),
            Cell::Int(s.sign as i64),
            s.population.map(Cell::Num).unwrap_or(Cell::Empty),
        ]);
    }
    Ok((t, state))
}
