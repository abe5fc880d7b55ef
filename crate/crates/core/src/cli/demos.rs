//! Built-in examples with their convergence curves and reference columns.

use rayon::prelude::*;

use super::table::{fmt_num, Table};
use super::{CliError, ExampleName, ExamplesArgs};
use crate::catalog::{self, InfiniPayoff};
use crate::dp::value_theta_house;
use crate::partial::{cav_u, informed_to_belief_mdp, pomdp_to_belief_mdp, BeliefGrid, GridModel};
use crate::prob::{Evaluation, SimplexPoint};

/// A curve plus the tolerance checks that failed on it.
pub struct Report {
    pub table: Table,
    pub failures: Vec<String>,
}

pub fn run(args: &ExamplesArgs) -> Result<Report, CliError> {
    match args.name {
        ExampleName::Ex39 => ex39(args.n.unwrap_or(1000)),
        ExampleName::Circle => circle(args.n.unwrap_or(10_000)),
        ExampleName::Infini => infini(lambdas(args.lambda, &[0.1, 0.05, 0.01]), args.l.unwrap_or(2.0)),
        ExampleName::Dark => dark(lambdas(args.lambda, &[1e-2, 1e-3, 1e-4]), args.grid.unwrap_or(2001)),
        ExampleName::Am => am(
            args.grid.unwrap_or(201),
            args.actiongrid.unwrap_or(41),
            args.n.unwrap_or(2000),
        ),
        ExampleName::Horner => horner(
            args.p.unwrap_or(0.6),
            args.grid.unwrap_or(201),
            args.actiongrid.unwrap_or(41),
            args.n.unwrap_or(2000),
        ),
    }
}

fn lambdas(given: Option<f64>, default: &[f64]) -> Vec<f64> {
    given.map_or_else(|| default.to_vec(), |l| vec![l])
}

fn positive(name: &str, n: usize, min: usize) -> Result<(), CliError> {
    if n < min {
        return Err(CliError::Input(format!("--{name}: must be at least {min}")));
    }
    Ok(())
}

/// `1, 2, 5, 10, 20, 50, ...` up to `n`, always ending at `n`.
pub fn checkpoints(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut scale = 1;
    'outer: loop {
        for m in [1, 2, 5] {
            if m * scale >= n {
                break 'outer;
            }
            out.push(m * scale);
        }
        scale *= 10;
    }
    out.push(n);
    out
}

fn ex39(n: usize) -> Result<Report, CliError> {
    positive("n", n, 1)?;
    let house = catalog::alternating_house();
    let mut table = Table::new(&["n", "v_n_0", "v_n_1", "reference"]);
    let mut failures = Vec::new();
    for t in 1..=n {
        let v = value_theta_house(&house, &Evaluation::cesaro(t)?);
        if v.iter().any(|x| (x - 0.5).abs() > 0.5 / t as f64 + 1e-12) {
            failures.push(format!("n = {t}: |v_n - 1/2| exceeds 1/(2n)"));
        }
        table.push(vec![t.to_string(), fmt_num(v[0]), fmt_num(v[1]), fmt_num(0.5)]);
    }
    Ok(Report { table, failures })
}

const CIRCLE_STARTS: [f64; 5] = [0.0, 0.7, 1.9, 3.3, 5.1];

fn circle(n: usize) -> Result<Report, CliError> {
    positive("n", n, 1)?;
    let reference = catalog::circle_reference(1_000_000);
    let mut table = Table::new(&["start_angle", "n", "value", "reference", "abs_err"]);
    let mut failures = Vec::new();
    for a in CIRCLE_STARTS {
        for t in checkpoints(n) {
            let v = value_theta_house(&catalog::circle_house(a, t), &Evaluation::cesaro(t)?)[0];
            let err = (v - reference).abs();
            if t >= 10_000 && err > 1e-2 {
                failures.push(format!("start {a}, n = {t}: |v_n - 1/2| = {err:e} > 1e-2"));
            }
            table.push(vec![
                fmt_num(a),
                t.to_string(),
                fmt_num(v),
                fmt_num(reference),
                fmt_num(err),
            ]);
        }
    }
    Ok(Report { table, failures })
}

fn infini(lambdas: Vec<f64>, l: f64) -> Result<Report, CliError> {
    let house = catalog::infini_house(l, 501, InfiniPayoff::Reach)?;
    let mut table = Table::new(&["lambda", "value", "closed_form", "abs_err"]);
    let mut failures = Vec::new();
    for lambda in lambdas {
        let v = value_theta_house(&house, &Evaluation::discounted(lambda, 1e-10)?)[0];
        let x = catalog::infini_closed_form(lambda, l);
        let err = (v - x).abs();
        if err > 2e-3 {
            failures.push(format!("lambda = {lambda}: |v - x| = {err:e} > 2e-3"));
        }
        table.push(vec![fmt_num(lambda), fmt_num(v), fmt_num(x), fmt_num(err)]);
    }
    Ok(Report { table, failures })
}

fn dark(lambdas: Vec<f64>, grid_points: usize) -> Result<Report, CliError> {
    positive("grid", grid_points, 2)?;
    let grid = BeliefGrid::uniform_1d(grid_points)?;
    let model = GridModel::build(&pomdp_to_belief_mdp(&catalog::dark_pomdp()), &grid)?;
    let start = SimplexPoint::vertex(2, 0)?;
    let thetas = lambdas
        .iter()
        .map(|&l| Evaluation::discounted(l, 1e-10))
        .collect::<crate::Result<Vec<_>>>()?;
    let values: Vec<f64> = thetas
        .par_iter()
        .map(|th| grid.interpolate(&model.value_theta(th).values, &start))
        .collect();
    let mut table = Table::new(&["lambda", "value", "oracle", "margin", "ratio"]);
    let mut failures = Vec::new();
    for (&lambda, v) in lambdas.iter().zip(values) {
        let oracle = catalog::dark_oracle(lambda, 200);
        let ratio = (1.0 - v) / (lambda * (1.0 / lambda).log2());
        if v - oracle < -1e-3 {
            failures.push(format!(
                "lambda = {lambda}: value {v} below oracle {oracle} by more than 1e-3"
            ));
        }
        if lambda <= 1e-4 && !(0.85..=1.15).contains(&ratio) {
            failures.push(format!("lambda = {lambda}: ratio {ratio} outside [0.85, 1.15]"));
        }
        table.push(vec![
            fmt_num(lambda),
            fmt_num(v),
            fmt_num(oracle),
            fmt_num(v - oracle),
            fmt_num(ratio),
        ]);
    }
    Ok(Report { table, failures })
}

fn am(grid_points: usize, actiongrid: usize, n: usize) -> Result<Report, CliError> {
    positive("grid", grid_points, 2)?;
    positive("actiongrid", actiongrid, 3)?;
    positive("n", n, 1)?;
    let grid = BeliefGrid::uniform_1d(grid_points)?;
    let cav = cav_u(&catalog::aumann_maschler_family(), &grid)?;
    let bm = informed_to_belief_mdp(&catalog::aumann_maschler_game(0.5)?, actiongrid - 1)?;
    let values = GridModel::build(&bm, &grid)?
        .value_theta(&Evaluation::cesaro(n)?)
        .values;
    let mut table = Table::new(&["p", "value", "cav", "closed_form", "abs_err"]);
    let mut failures = Vec::new();
    for ((p, v), c) in grid.points().iter().zip(&values).zip(&cav) {
        let err = (v - c).abs();
        if err > 5e-2 {
            failures.push(format!("p = {}: |V_n - cav| = {err:e} > 5e-2", p[0]));
        }
        table.push(vec![
            fmt_num(p[0]),
            fmt_num(*v),
            fmt_num(*c),
            fmt_num(p[0] * p[1]),
            fmt_num(err),
        ]);
    }
    if cav.windows(3).any(|w| w[0] - 2.0 * w[1] + w[2] > 1e-12) {
        failures.push("cav column is not concave".into());
    }
    Ok(Report { table, failures })
}

fn horner(p: f64, grid_points: usize, actiongrid: usize, n: usize) -> Result<Report, CliError> {
    positive("grid", grid_points, 2)?;
    positive("actiongrid", actiongrid, 3)?;
    positive("n", n, 1)?;
    let game = catalog::horner_game(p)?;
    let grid = BeliefGrid::uniform_1d(grid_points)?;
    let model = GridModel::build(&informed_to_belief_mdp(&game, actiongrid - 1)?, &grid)?;
    let prior = game.initial_beliefs();
    let reference = (0.5..2.0 / 3.0).contains(&p).then(|| catalog::horner_value(p));
    let marks = checkpoints(n);
    let mut table = Table::new(&["n", "value", "reference", "abs_err"]);
    let mut failures = Vec::new();
    // n v_n = U_n with U_t = max_a r + P U_{t-1}: one pass gives every v_n.
    let mut u = vec![0.0; grid.len()];
    for t in 1..=n {
        u = model.stage(1.0, &u);
        if !marks.contains(&t) {
            continue;
        }
        let scaled: Vec<f64> = u.iter().map(|x| x / t as f64).collect();
        let v = grid.expect(&scaled, &prior);
        let (ref_cell, err_cell) = match reference {
            Some(r) => (fmt_num(r), fmt_num((v - r).abs())),
            None => (String::new(), String::new()),
        };
        if let (Some(r), true) = (reference, t == n) {
            if (v - r).abs() > 0.02 {
                failures.push(format!("n = {t}: |v - p/(4p-1)| = {:e} > 0.02", (v - r).abs()));
            }
        }
        table.push(vec![t.to_string(), fmt_num(v), ref_cell, err_cell]);
    }
    Ok(Report { table, failures })
}
