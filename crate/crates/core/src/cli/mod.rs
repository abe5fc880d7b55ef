//! Command-line front end: model files in, CSV out.
//!
//! Exit codes: 0 success, 1 a tolerance check failed, 2 input error,
//! 3 solver failure.

mod demos;
pub mod model;
pub mod table;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use demos::checkpoints;
pub use model::{load_model, parse_model, Kind, Model};
pub use table::{fmt_num, Table};

use crate::dp::{limit_value_lp, max_invariant_payoff, superharmonic_completion, value_theta_house, value_theta_mdp};
use crate::metric::{disintegration_pair, dstar_distance, dstar_lower_bound, kr_distance, MatrixFamily};
use crate::partial::{cav_u, informed_to_belief_mdp, non_revealing_values, pomdp_to_belief_mdp, BeliefGrid, GridModel};
use crate::prob::{BeliefDist, Evaluation, SimplexPoint};
use crate::random;

/// Postcondition slack for the printed `d*` quantities.
pub const DSTAR_TOL: f64 = 1e-8;
/// Separation-oracle slack accepted by `limit-value --audit`.
pub const AUDIT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Tolerance(_) => 1,
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidArgument(_) => CliError::Input(e.to_string()),
            crate::Error::SolverFailure(_) => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "beliefspace", version, about = "Belief-space distances and long-run values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// d*, d_KR, a certificate lower bound and the disintegration-pair distance.
    Dstar(DstarArgs),
    /// Value of a θ-evaluated problem from each start.
    Value(ValueArgs),
    /// Limit value v* of a finite MDP with its (w, h) certificate.
    LimitValue(LimitValueArgs),
    /// Convergence curves of the built-in examples.
    Examples(ExamplesArgs),
    /// Non-revealing values and their concave envelope on a belief grid.
    Cav(CavArgs),
}

#[derive(Debug, Args)]
pub struct DstarArgs {
    /// belief_dist_pair model file
    pub file: PathBuf,
    /// Number of random matrix-family certificates.
    #[arg(long, default_value_t = 100)]
    pub certificates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra matrix_family files used as certificates.
    #[arg(long)]
    pub family: Vec<PathBuf>,
    /// Write the optimal (α, β) as CSV to this path.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    /// gambling_house, finite_mdp, pomdp or informed_game model file
    pub file: PathBuf,
    /// cesaro:N, discounted:LAMBDA or custom:PATH
    #[arg(long)]
    pub theta: String,
    /// Report only this start state.
    #[arg(long)]
    pub start: Option<String>,
    /// Belief-grid points per coordinate (pomdp, informed_game).
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Action-grid points per coordinate (informed_game).
    #[arg(long, default_value_t = 41)]
    pub actiongrid: usize,
}

#[derive(Debug, Args)]
pub struct LimitValueArgs {
    /// finite_mdp model file
    pub file: PathBuf,
    #[arg(long)]
    pub start: Option<String>,
    /// Cross-check the certificate with the separation oracle and its Farkas counterpart.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    Ex39,
    Circle,
    Infini,
    Dark,
    Am,
    Horner,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub actiongrid: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CavArgs {
    /// matrix_family model file
    pub file: PathBuf,
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
}

/// Parse `args` (program name first), run, and map the outcome to an exit code.
pub fn main_entry<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Dstar(a) => cmd_dstar(a, out),
        Command::Value(a) => cmd_value(a, out),
        Command::LimitValue(a) => cmd_limit_value(a, out),
        Command::Examples(a) => cmd_examples(a, out),
        Command::Cav(a) => cmd_cav(a, out),
    }
}

fn wrong_kind(path: &Path, model: &Model, expected: &str) -> CliError {
    CliError::Input(format!(
        "{}: kind: expected {expected}, found {}",
        path.display(),
        model.kind()
    ))
}

pub fn cmd_dstar(args: &DstarArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.file)?;
    let Model::BeliefDistPair { u, v, .. } = &model else {
        return Err(wrong_kind(&args.file, &model, "belief_dist_pair"));
    };
    let (dstar, witness) = dstar_distance(u, v)?;
    let (kr, _) = kr_distance(u, v)?;
    let mut rng = random::seeded(args.seed);
    let mut families: Vec<MatrixFamily> = (0..args.certificates)
        .map(|_| random::matrix_family(&mut rng, u.dim(), 3))
        .collect();
    for path in &args.family {
        let m = load_model(path)?;
        match m {
            Model::MatrixFamily { family, .. } if family.dim() == u.dim() => families.push(family),
            Model::MatrixFamily { .. } => {
                return Err(CliError::Input(format!(
                    "{}: matrices: family has the wrong number of states",
                    path.display()
                )))
            }
            other => return Err(wrong_kind(path, &other, "matrix_family")),
        }
    }
    let certificate = dstar_lower_bound(u, v, &families)?;
    let (pi, pi_prime) = disintegration_pair(u, v, &witness)?;
    let pair = pi.l1_distance(&pi_prime)?;

    let mut table = Table::new(&["quantity", "value"]);
    for (name, x) in [
        ("dstar", dstar),
        ("kr", kr),
        ("certificate", certificate),
        ("pair_distance", pair),
    ] {
        table.push(vec![name.into(), fmt_num(x)]);
    }
    table.write_to(out)?;
    if let Some(path) = &args.witness {
        let mut w = Table::new(&["x", "y", "alpha", "beta"]);
        for (xi, row) in witness.alpha.iter().enumerate() {
            for (yi, a) in row.iter().enumerate() {
                w.push(vec![
                    xi.to_string(),
                    yi.to_string(),
                    fmt_num(*a),
                    fmt_num(witness.beta[xi][yi]),
                ]);
            }
        }
        write_file(path, &w)?;
    }
    if certificate > dstar + DSTAR_TOL || dstar > kr + DSTAR_TOL || (pair - dstar).abs() > DSTAR_TOL {
        return Err(CliError::Tolerance(format!(
            "certificate <= d* <= d_KR and pair distance = d* violated: {certificate}, {dstar}, {kr}, {pair}"
        )));
    }
    Ok(())
}

fn write_file(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    table.write_to(&mut f)
}

/// `cesaro:N`, `discounted:LAMBDA` or `custom:PATH` (stage weights separated by
/// commas or whitespace, summing to one within `1e-6`).
pub fn parse_theta(spec: &str) -> Result<Evaluation, CliError> {
    let bad = |msg: String| CliError::Input(format!("--theta: {msg}"));
    let (scheme, arg) = spec.split_once(':').ok_or_else(|| {
        bad(format!(
            "expected cesaro:N, discounted:LAMBDA or custom:PATH, got `{spec}`"
        ))
    })?;
    match scheme {
        "cesaro" => {
            let n: usize = arg.parse().map_err(|_| bad(format!("`{arg}` is not a stage count")))?;
            Evaluation::cesaro(n).map_err(|e| bad(e.to_string()))
        }
        "discounted" => {
            let l: f64 = arg.parse().map_err(|_| bad(format!("`{arg}` is not a number")))?;
            Evaluation::discounted(l, 1e-10).map_err(|e| bad(e.to_string()))
        }
        "custom" => {
            let text = std::fs::read_to_string(arg).map_err(|e| bad(format!("{arg}: {e}")))?;
            let weights = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .enumerate()
                .map(|(i, s)| {
                    s.parse::<f64>()
                        .map_err(|_| bad(format!("{arg}: weight {i} `{s}` is not a number")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > 1e-6 {
                return Err(bad(format!("{arg}: weights sum to {total}, not 1")));
            }
            Evaluation::from_weights(weights).map_err(|e| bad(format!("{arg}: {e}")))
        }
        other => Err(bad(format!("unknown scheme `{other}`"))),
    }
}

fn start_indices(states: &[String], start: &Option<String>) -> Result<Vec<usize>, CliError> {
    match start {
        None => Ok((0..states.len()).collect()),
        Some(name) => states
            .iter()
            .position(|s| s == name)
            .map(|k| vec![k])
            .ok_or_else(|| CliError::Input(format!("--start: unknown state `{name}`"))),
    }
}

fn belief_grid(dim: usize, points: usize) -> Result<BeliefGrid, CliError> {
    if points < 2 {
        return Err(CliError::Input("--grid: needs at least two points".into()));
    }
    Ok(BeliefGrid::lattice(dim, points - 1)?)
}

pub fn cmd_value(args: &ValueArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.file)?;
    let theta = parse_theta(&args.theta)?;
    let (id, imp) = (args.theta.as_str(), fmt_num(theta.impatience()));
    let row = |start: &str, v: f64| vec![start.to_string(), id.to_string(), imp.clone(), fmt_num(v)];
    match &model {
        Model::GamblingHouse { states, house } => {
            let v = value_theta_house(house, &theta);
            let mut table = Table::new(&["start", "theta", "impatience", "value"]);
            for k in start_indices(states, &args.start)? {
                table.push(row(&states[k], v[k]));
            }
            table.write_to(out)
        }
        Model::FiniteMdp { states, mdp, .. } => {
            let v = value_theta_mdp(mdp, &theta);
            let mut table = Table::new(&["start", "theta", "impatience", "value"]);
            for k in start_indices(states, &args.start)? {
                table.push(row(&states[k], v[k]));
            }
            table.write_to(out)
        }
        Model::Pomdp { states, pomdp } => {
            let grid = belief_grid(states.len(), args.grid)?;
            let gv = GridModel::build(&pomdp_to_belief_mdp(pomdp), &grid)?.value_theta(&theta);
            let mut table = Table::new(&["start", "theta", "impatience", "value", "error_bound"]);
            for (name, belief) in grid_starts(states, &args.start, BeliefDist::dirac(pomdp.initial().clone()))? {
                let mut r = row(&name, grid.expect(&gv.values, &belief));
                r.push(fmt_num(gv.error_bound));
                table.push(r);
            }
            table.write_to(out)
        }
        Model::InformedGame { states, game } => {
            if args.actiongrid < 3 {
                return Err(CliError::Input("--actiongrid: needs at least three points".into()));
            }
            let grid = belief_grid(states.len(), args.grid)?;
            let bm = informed_to_belief_mdp(game, args.actiongrid - 1)?;
            let gv = GridModel::build(&bm, &grid)?.value_theta(&theta);
            let mut table = Table::new(&["start", "theta", "impatience", "value", "error_bound"]);
            for (name, belief) in grid_starts(states, &args.start, game.initial_beliefs())? {
                let mut r = row(&name, grid.expect(&gv.values, &belief));
                r.push(fmt_num(gv.error_bound));
                table.push(r);
            }
            table.write_to(out)
        }
        _ => Err(wrong_kind(
            &args.file,
            &model,
            "gambling_house, finite_mdp, pomdp or informed_game",
        )),
    }
}

/// The model's own initial belief, or the vertex of a named state.
fn grid_starts(
    states: &[String],
    start: &Option<String>,
    initial: BeliefDist,
) -> Result<Vec<(String, BeliefDist)>, CliError> {
    match start {
        None => Ok(vec![("initial".into(), initial)]),
        Some(_) => {
            let k = start_indices(states, start)?[0];
            Ok(vec![(
                states[k].clone(),
                BeliefDist::dirac(SimplexPoint::vertex(states.len(), k)?),
            )])
        }
    }
}

pub fn cmd_limit_value(args: &LimitValueArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.file)?;
    let Model::FiniteMdp { states, mdp, .. } = &model else {
        return Err(wrong_kind(&args.file, &model, "finite_mdp"));
    };
    let mut header = vec!["start", "state", "v_star", "w", "h"];
    if args.audit {
        header.extend(["certificate_residual", "separation", "superharmonic"]);
    }
    let mut table = Table::new(&header);
    let mut audit_failure = None;
    for k0 in start_indices(states, &args.start)? {
        let (v_star, cert) = limit_value_lp(mdp, k0)?;
        let audit = if args.audit {
            let separation = max_invariant_payoff(mdp, &cert.w)?;
            let completion = superharmonic_completion(mdp, &cert.w)?.is_some();
            if separation > AUDIT_TOL || !completion {
                audit_failure = Some(format!(
                    "audit of start {}: separation {separation:e}, superharmonic completion found: {completion}",
                    states[k0]
                ));
            }
            vec![
                fmt_num(cert.residual(mdp)),
                fmt_num(separation),
                u8::from(completion).to_string(),
            ]
        } else {
            Vec::new()
        };
        for (k, name) in states.iter().enumerate() {
            let mut r = vec![
                states[k0].clone(),
                name.clone(),
                fmt_num(v_star),
                fmt_num(cert.w[k]),
                fmt_num(cert.h[k]),
            ];
            r.extend(audit.iter().cloned());
            table.push(r);
        }
    }
    table.write_to(out)?;
    match audit_failure {
        Some(msg) => Err(CliError::Solver(msg)),
        None => Ok(()),
    }
}

pub fn cmd_examples(args: &ExamplesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let report = demos::run(args)?;
    match &args.out {
        Some(path) => write_file(path, &report.table)?,
        None => report.table.write_to(out)?,
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(report.failures.join("; ")))
    }
}

pub fn cmd_cav(args: &CavArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.file)?;
    let Model::MatrixFamily { states, family } = &model else {
        return Err(wrong_kind(&args.file, &model, "matrix_family"));
    };
    let grid = belief_grid(states.len(), args.grid)?;
    let u = non_revealing_values(family, &grid)?;
    let cav = cav_u(family, &grid)?;
    let mut header: Vec<String> = states.iter().map(|s| format!("p_{s}")).collect();
    header.extend(["u".to_string(), "cav_u".to_string()]);
    let mut table = Table::new(&header);
    for ((p, a), c) in grid.points().iter().zip(&u).zip(&cav) {
        let mut r: Vec<String> = p.coords().iter().map(|x| fmt_num(*x)).collect();
        r.extend([fmt_num(*a), fmt_num(*c)]);
        table.push(r);
    }
    table.write_to(out)
}
