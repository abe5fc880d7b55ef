//! Model files: JSON objects carrying `"version": "v1"`, a `"kind"` tag and a
//! kind-specific payload. States, actions and signals are referred to by name.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};

use super::CliError;
use crate::dp::{FiniteMdp, GamblingHouse};
use crate::lp::MatrixGame;
use crate::metric::MatrixFamily;
use crate::partial::{InformedGame, PomdpModel};
use crate::prob::{BeliefDist, JointDist, SimplexPoint};

pub const VERSION: &str = "v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    BeliefDistPair,
    GamblingHouse,
    FiniteMdp,
    Pomdp,
    InformedGame,
    MatrixFamily,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::BeliefDistPair,
        Kind::GamblingHouse,
        Kind::FiniteMdp,
        Kind::Pomdp,
        Kind::InformedGame,
        Kind::MatrixFamily,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::BeliefDistPair => "belief_dist_pair",
            Kind::GamblingHouse => "gambling_house",
            Kind::FiniteMdp => "finite_mdp",
            Kind::Pomdp => "pomdp",
            Kind::InformedGame => "informed_game",
            Kind::MatrixFamily => "matrix_family",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub enum Model {
    BeliefDistPair {
        states: Vec<String>,
        u: BeliefDist,
        v: BeliefDist,
    },
    GamblingHouse {
        states: Vec<String>,
        house: GamblingHouse,
    },
    FiniteMdp {
        states: Vec<String>,
        actions: Vec<String>,
        mdp: FiniteMdp,
    },
    Pomdp {
        states: Vec<String>,
        pomdp: PomdpModel,
    },
    InformedGame {
        states: Vec<String>,
        game: InformedGame,
    },
    MatrixFamily {
        states: Vec<String>,
        family: MatrixFamily,
    },
}

impl Model {
    pub fn kind(&self) -> Kind {
        match self {
            Model::BeliefDistPair { .. } => Kind::BeliefDistPair,
            Model::GamblingHouse { .. } => Kind::GamblingHouse,
            Model::FiniteMdp { .. } => Kind::FiniteMdp,
            Model::Pomdp { .. } => Kind::Pomdp,
            Model::InformedGame { .. } => Kind::InformedGame,
            Model::MatrixFamily { .. } => Kind::MatrixFamily,
        }
    }

    pub fn states(&self) -> &[String] {
        match self {
            Model::BeliefDistPair { states, .. }
            | Model::GamblingHouse { states, .. }
            | Model::FiniteMdp { states, .. }
            | Model::Pomdp { states, .. }
            | Model::InformedGame { states, .. }
            | Model::MatrixFamily { states, .. } => states,
        }
    }
}

pub fn load_model(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_model(text: &str) -> Result<Model, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| input(format!("not valid JSON: {e}")))?;
    let Value::Object(mut map) = value else {
        return Err(input("model: expected a JSON object"));
    };
    match map.remove("version") {
        Some(Value::String(v)) if v == VERSION => {}
        Some(other) => return Err(input(format!("version: expected \"{VERSION}\", found {other}"))),
        None => return Err(input("version: missing field (expected \"v1\")")),
    }
    let kind = match map.remove("kind") {
        Some(Value::String(k)) => Kind::ALL
            .into_iter()
            .find(|c| c.name() == k)
            .ok_or_else(|| input(format!("kind: unknown kind `{k}`")))?,
        Some(other) => return Err(input(format!("kind: expected a string, found {other}"))),
        None => return Err(input("kind: missing field")),
    };
    match kind {
        Kind::BeliefDistPair => belief_dist_pair(payload(map)?),
        Kind::GamblingHouse => gambling_house(payload(map)?),
        Kind::FiniteMdp => finite_mdp(payload(map)?),
        Kind::Pomdp => pomdp(payload(map)?),
        Kind::InformedGame => informed_game(payload(map)?),
        Kind::MatrixFamily => matrix_family(payload(map)?),
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn payload<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, CliError> {
    serde_path_to_error::deserialize(Value::Object(map)).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            input(format!("model: {}", e.inner()))
        } else {
            input(format!("{path}: {}", e.inner()))
        }
    })
}

/// Maps a module error onto the field whose data produced it.
fn field_err(field: &str) -> impl Fn(crate::Error) -> CliError + '_ {
    move |e| input(format!("{field}: {e}"))
}

struct Names<'a> {
    field: &'static str,
    index: HashMap<&'a str, usize>,
}

impl<'a> Names<'a> {
    fn new(field: &'static str, names: &'a [String]) -> Result<Self, CliError> {
        if names.is_empty() {
            return Err(input(format!("{field}: must not be empty")));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.as_str(), i).is_some() {
                return Err(input(format!("{field}[{i}]: duplicate name `{n}`")));
            }
        }
        Ok(Self { field, index })
    }

    fn get(&self, name: &str, at: impl FnOnce() -> String) -> Result<usize, CliError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| input(format!("{}: `{name}` is not listed in `{}`", at(), self.field)))
    }
}

fn check_len(field: &str, found: usize, expected: usize) -> Result<(), CliError> {
    if found != expected {
        return Err(input(format!("{field}: expected {expected} entries, found {found}")));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    point: Vec<f64>,
    weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    states: Vec<String>,
    u: Vec<RawAtom>,
    v: Vec<RawAtom>,
}

fn belief_dist(field: &str, dim: usize, atoms: Vec<RawAtom>) -> Result<BeliefDist, CliError> {
    let mut out = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.into_iter().enumerate() {
        let at = format!("{field}[{i}].point");
        check_len(&at, a.point.len(), dim)?;
        out.push((SimplexPoint::new(a.point).map_err(field_err(&at))?, a.weight));
    }
    BeliefDist::new(out).map_err(field_err(field))
}

fn belief_dist_pair(raw: RawPair) -> Result<Model, CliError> {
    Names::new("states", &raw.states)?;
    let dim = raw.states.len();
    let u = belief_dist("u", dim, raw.u)?;
    let v = belief_dist("v", dim, raw.v)?;
    Ok(Model::BeliefDistPair {
        states: raw.states,
        u,
        v,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHouse {
    states: Vec<String>,
    payoff: Vec<f64>,
    moves: Vec<Vec<Vec<(String, f64)>>>,
}

fn gambling_house(raw: RawHouse) -> Result<Model, CliError> {
    let states = Names::new("states", &raw.states)?;
    let n = raw.states.len();
    check_len("payoff", raw.payoff.len(), n)?;
    check_len("moves", raw.moves.len(), n)?;
    let mut moves = Vec::with_capacity(n);
    for (x, options) in raw.moves.iter().enumerate() {
        let mut out = Vec::with_capacity(options.len());
        for (o, dist) in options.iter().enumerate() {
            let mut d = Vec::with_capacity(dist.len());
            for (e, (target, prob)) in dist.iter().enumerate() {
                d.push((states.get(target, || format!("moves[{x}][{o}][{e}]"))?, *prob));
            }
            out.push(d);
        }
        moves.push(out);
    }
    let house = GamblingHouse::new(raw.payoff, moves).map_err(field_err("moves"))?;
    Ok(Model::GamblingHouse {
        states: raw.states,
        house,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMdp {
    states: Vec<String>,
    actions: Vec<String>,
    transitions: Vec<Vec<Vec<(String, f64)>>>,
    payoff: Vec<Vec<f64>>,
}

fn finite_mdp(raw: RawMdp) -> Result<Model, CliError> {
    let states = Names::new("states", &raw.states)?;
    Names::new("actions", &raw.actions)?;
    let (n, m) = (raw.states.len(), raw.actions.len());
    check_len("transitions", raw.transitions.len(), n)?;
    check_len("payoff", raw.payoff.len(), n)?;
    let mut q = vec![vec![vec![0.0; n]; m]; n];
    for (k, rows) in raw.transitions.iter().enumerate() {
        check_len(&format!("transitions[{k}]"), rows.len(), m)?;
        for (a, dist) in rows.iter().enumerate() {
            for (e, (target, prob)) in dist.iter().enumerate() {
                q[k][a][states.get(target, || format!("transitions[{k}][{a}][{e}]"))?] += prob;
            }
        }
    }
    for (k, row) in raw.payoff.iter().enumerate() {
        check_len(&format!("payoff[{k}]"), row.len(), m)?;
    }
    let mdp = FiniteMdp::new(q, raw.payoff).map_err(field_err("transitions"))?;
    Ok(Model::FiniteMdp {
        states: raw.states,
        actions: raw.actions,
        mdp,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPomdp {
    states: Vec<String>,
    actions: Vec<String>,
    signals: Vec<String>,
    transitions: Vec<Vec<Vec<(String, String, f64)>>>,
    payoff: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

fn pomdp(raw: RawPomdp) -> Result<Model, CliError> {
    let states = Names::new("states", &raw.states)?;
    Names::new("actions", &raw.actions)?;
    let signals = Names::new("signals", &raw.signals)?;
    let (n, m, ns) = (raw.states.len(), raw.actions.len(), raw.signals.len());
    check_len("transitions", raw.transitions.len(), n)?;
    check_len("payoff", raw.payoff.len(), n)?;
    check_len("initial", raw.initial.len(), n)?;
    let mut q = vec![vec![vec![vec![0.0; n]; ns]; m]; n];
    for (k, rows) in raw.transitions.iter().enumerate() {
        check_len(&format!("transitions[{k}]"), rows.len(), m)?;
        for (a, dist) in rows.iter().enumerate() {
            for (e, (signal, target, prob)) in dist.iter().enumerate() {
                let at = || format!("transitions[{k}][{a}][{e}]");
                let s = signals.get(signal, at)?;
                q[k][a][s][states.get(target, at)?] += prob;
            }
        }
    }
    for (k, row) in raw.payoff.iter().enumerate() {
        check_len(&format!("payoff[{k}]"), row.len(), m)?;
    }
    let initial = SimplexPoint::new(raw.initial).map_err(field_err("initial"))?;
    let pomdp = PomdpModel::new(q, raw.payoff, initial).map_err(field_err("transitions"))?;
    Ok(Model::Pomdp {
        states: raw.states,
        pomdp,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInformed {
    states: Vec<String>,
    actions_1: Vec<String>,
    actions_2: Vec<String>,
    signals: Vec<String>,
    transitions: Vec<Vec<Vec<(String, String, f64)>>>,
    payoff: Vec<Vec<Vec<f64>>>,
    initial: Vec<(String, String, f64)>,
}

fn informed_game(raw: RawInformed) -> Result<Model, CliError> {
    let states = Names::new("states", &raw.states)?;
    Names::new("actions_1", &raw.actions_1)?;
    Names::new("actions_2", &raw.actions_2)?;
    let signals = Names::new("signals", &raw.signals)?;
    let (n, rows, cols, nd) = (
        raw.states.len(),
        raw.actions_1.len(),
        raw.actions_2.len(),
        raw.signals.len(),
    );
    check_len("transitions", raw.transitions.len(), n)?;
    check_len("payoff", raw.payoff.len(), n)?;
    let mut qbar = vec![vec![vec![vec![0.0; nd]; n]; rows]; n];
    for (k, by_action) in raw.transitions.iter().enumerate() {
        check_len(&format!("transitions[{k}]"), by_action.len(), rows)?;
        for (i, dist) in by_action.iter().enumerate() {
            for (e, (target, signal, prob)) in dist.iter().enumerate() {
                let at = || format!("transitions[{k}][{i}][{e}]");
                let next = states.get(target, at)?;
                qbar[k][i][next][signals.get(signal, at)?] += prob;
            }
        }
    }
    for (k, m) in raw.payoff.iter().enumerate() {
        check_len(&format!("payoff[{k}]"), m.len(), rows)?;
        for (i, r) in m.iter().enumerate() {
            check_len(&format!("payoff[{k}][{i}]"), r.len(), cols)?;
        }
    }
    let mut init = vec![vec![0.0; nd]; n];
    for (e, (state, signal, prob)) in raw.initial.iter().enumerate() {
        let at = || format!("initial[{e}]");
        init[states.get(state, at)?][signals.get(signal, at)?] += prob;
    }
    let initial = JointDist::new(init).map_err(field_err("initial"))?;
    let game = InformedGame::new(qbar, raw.payoff, initial).map_err(field_err("transitions"))?;
    Ok(Model::InformedGame {
        states: raw.states,
        game,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    states: Vec<String>,
    matrices: Vec<Vec<Vec<f64>>>,
}

fn matrix_family(raw: RawFamily) -> Result<Model, CliError> {
    Names::new("states", &raw.states)?;
    check_len("matrices", raw.matrices.len(), raw.states.len())?;
    let games = raw
        .matrices
        .into_iter()
        .enumerate()
        .map(|(k, m)| MatrixGame::new(m).map_err(|e| input(format!("matrices[{k}]: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let family = MatrixFamily::new(games).map_err(field_err("matrices"))?;
    Ok(Model::MatrixFamily {
        states: raw.states,
        family,
    })
}
