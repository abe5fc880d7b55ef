//! Partially observed problems as MDPs on beliefs, solved on grids.
//!
//! A [`BeliefMdp`] has `Δ(K)` as state space, finitely many actions, a payoff
//! `r(p, a)` and a kernel `p ↦ BeliefDist`. POMDPs reduce to one by Bayesian
//! updating; repeated games with an informed controller reduce to one whose
//! actions are (gridded) profiles `a ∈ Δ(I)^K` and whose payoff is the
//! minimizer's best reply.
//!
//! [`GridModel`] tabulates a belief MDP on a [`BeliefGrid`]. Posteriors that
//! fall between grid points are interpolated (piecewise linear when `|K| = 2`,
//! nearest lattice point otherwise), so each stage of backward induction is a
//! sparse matrix product.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;

use crate::dp::FiniteMdp;
use crate::error::{invalid, Result};
use crate::lp::{LinearProgram, RowSense};
use crate::metric::{posterior_map, MatrixFamily};
use crate::prob::{l1_raw, BeliefDist, Evaluation, JointDist, SimplexPoint};

const MASS_TOL: f64 = 1e-9;
const PAYOFF_TOL: f64 = 1e-12;
/// Tabulated entries above which a stage is swept in parallel.
const PAR_MIN_ENTRIES: usize = 50_000;

fn check_distribution(what: &str, row: &[f64]) -> Result<Vec<f64>> {
    if row.iter().any(|p| !p.is_finite() || *p < -PAYOFF_TOL) {
        return invalid(format!("{what}: negative or non-finite probability"));
    }
    let total: f64 = row.iter().map(|p| p.max(0.0)).sum();
    if (total - 1.0).abs() > MASS_TOL {
        return invalid(format!("{what}: probabilities sum to {total}"));
    }
    Ok(row.iter().map(|p| p.max(0.0) / total).collect())
}

fn check_payoff(what: &str, g: f64) -> Result<f64> {
    if !g.is_finite() || !(-PAYOFF_TOL..=1.0 + PAYOFF_TOL).contains(&g) {
        return invalid(format!("{what}: payoff {g} outside [0, 1]"));
    }
    Ok(g.clamp(0.0, 1.0))
}

/// `Γ = (K, A, S, q, g, p₁)`; `q(k,a)` is a law on `S × K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PomdpModel {
    n_states: usize,
    n_actions: usize,
    n_signals: usize,
    /// `q[k][a][s * K + k']`.
    q: Vec<Vec<Vec<f64>>>,
    g: Vec<Vec<f64>>,
    initial: SimplexPoint,
}

impl PomdpModel {
    /// `q[k][a][s][k']` is the probability of signal `s` and next state `k'`.
    pub fn new(q: Vec<Vec<Vec<Vec<f64>>>>, g: Vec<Vec<f64>>, initial: SimplexPoint) -> Result<Self> {
        let n_states = q.len();
        if n_states == 0 {
            return invalid("pomdp: no states");
        }
        if initial.dim() != n_states {
            return invalid("pomdp: initial belief has the wrong dimension");
        }
        if g.len() != n_states {
            return invalid("pomdp: payoff table does not match the number of states");
        }
        let n_actions = q[0].len();
        let n_signals = q[0].first().map_or(0, Vec::len);
        if n_actions == 0 || n_signals == 0 {
            return invalid("pomdp: no actions or no signals");
        }
        let mut flat_q = Vec::with_capacity(n_states);
        let mut clean_g = Vec::with_capacity(n_states);
        for (k, (qk, gk)) in q.into_iter().zip(g).enumerate() {
            if qk.len() != n_actions || gk.len() != n_actions {
                return invalid(format!("pomdp: state {k} does not list {n_actions} actions"));
            }
            let mut rows = Vec::with_capacity(n_actions);
            for (a, law) in qk.into_iter().enumerate() {
                if law.len() != n_signals || law.iter().any(|r| r.len() != n_states) {
                    return invalid(format!("pomdp: q({k},{a}) must be {n_signals} × {n_states}"));
                }
                rows.push(check_distribution(&format!("pomdp q({k},{a})"), &law.concat())?);
            }
            flat_q.push(rows);
            clean_g.push(
                gk.into_iter()
                    .enumerate()
                    .map(|(a, x)| check_payoff(&format!("pomdp g({k},{a})"), x))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            n_states,
            n_actions,
            n_signals,
            q: flat_q,
            g: clean_g,
            initial,
        })
    }

    /// The POMDP whose signal is the next state itself.
    pub fn fully_observed(mdp: &FiniteMdp, initial: SimplexPoint) -> Result<Self> {
        let n = mdp.n_states();
        let q = (0..n)
            .map(|k| {
                (0..mdp.n_actions())
                    .map(|a| {
                        (0..n)
                            .map(|s| (0..n).map(|j| if j == s { mdp.q(k, a)[j] } else { 0.0 }).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let g = (0..n)
            .map(|k| (0..mdp.n_actions()).map(|a| mdp.g(k, a)).collect())
            .collect();
        Self::new(q, g, initial)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    pub fn initial(&self) -> &SimplexPoint {
        &self.initial
    }

    pub fn q(&self, k: usize, a: usize, s: usize, next: usize) -> f64 {
        self.q[k][a][s * self.n_states + next]
    }

    pub fn g(&self, k: usize, a: usize) -> f64 {
        self.g[k][a]
    }

    /// Joint law of `(k', s)` after playing `a` at belief `p`, as a table over
    /// `K × S`.
    fn step(&self, p: &SimplexPoint, a: usize) -> Vec<f64> {
        let (n, m) = (self.n_states, self.n_signals);
        let mut joint = vec![0.0; n * m];
        for (k, pk) in p.coords().iter().enumerate() {
            if *pk == 0.0 {
                continue;
            }
            for s in 0..m {
                for j in 0..n {
                    joint[j * m + s] += pk * self.q(k, a, s, j);
                }
            }
        }
        joint
    }
}

/// Probability of signal `s` after `a` at `p`, and the posterior on the next
/// state. A signal of probability zero yields `(0, uniform)`.
pub fn belief_update(pomdp: &PomdpModel, p: &SimplexPoint, a: usize, s: usize) -> Result<(f64, SimplexPoint)> {
    if p.dim() != pomdp.n_states || a >= pomdp.n_actions || s >= pomdp.n_signals {
        return invalid("belief update: belief, action or signal out of range");
    }
    let next: Vec<f64> = (0..pomdp.n_states)
        .map(|j| {
            p.coords()
                .iter()
                .enumerate()
                .map(|(k, pk)| pk * pomdp.q(k, a, s, j))
                .sum()
        })
        .collect();
    let prob: f64 = next.iter().sum();
    if prob <= 0.0 {
        return Ok((0.0, SimplexPoint::uniform(pomdp.n_states)?));
    }
    Ok((prob, SimplexPoint::from_weights(next)?))
}

/// A full-information MDP on `Δ(K)` with finitely many actions.
pub trait BeliefMdp: Sync {
    fn dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn payoff(&self, p: &SimplexPoint, a: usize) -> f64;
    fn transition(&self, p: &SimplexPoint, a: usize) -> BeliefDist;
}

/// `r(p,a) = Σ_k p^k g(k,a)`, kernel `Σ_s P(s) δ_{posterior after s}`.
#[derive(Clone, Debug)]
pub struct PomdpBeliefMdp {
    pomdp: PomdpModel,
}

pub fn pomdp_to_belief_mdp(pomdp: &PomdpModel) -> PomdpBeliefMdp {
    PomdpBeliefMdp { pomdp: pomdp.clone() }
}

impl PomdpBeliefMdp {
    pub fn model(&self) -> &PomdpModel {
        &self.pomdp
    }
}

impl BeliefMdp for PomdpBeliefMdp {
    fn dim(&self) -> usize {
        self.pomdp.n_states
    }

    fn n_actions(&self) -> usize {
        self.pomdp.n_actions
    }

    fn payoff(&self, p: &SimplexPoint, a: usize) -> f64 {
        let r: f64 = p
            .coords()
            .iter()
            .enumerate()
            .map(|(k, pk)| pk * self.pomdp.g(k, a))
            .sum();
        r.clamp(0.0, 1.0)
    }

    fn transition(&self, p: &SimplexPoint, a: usize) -> BeliefDist {
        let joint = self.pomdp.step(p, a);
        let pi = JointDist::from_flat_masses(self.pomdp.n_states, self.pomdp.n_signals, joint)
            .expect("a belief step preserves mass");
        posterior_map(&pi)
    }
}

/// Repeated game where player 1 knows the state and alone drives the
/// transition; `qbar(k,i)` is the law of the next state and of player 2's
/// signal.
#[derive(Clone, Debug, PartialEq)]
pub struct InformedGame {
    n_states: usize,
    n_rows: usize,
    n_cols: usize,
    n_signals: usize,
    /// `qbar[k][i][k' * D + d]`.
    qbar: Vec<Vec<Vec<f64>>>,
    /// `g[k][i * J + j]`.
    g: Vec<Vec<f64>>,
    initial: JointDist,
}

impl InformedGame {
    /// `qbar[k][i][k'][d]`, `g[k][i][j]`, initial law on `K × D`.
    pub fn new(qbar: Vec<Vec<Vec<Vec<f64>>>>, g: Vec<Vec<Vec<f64>>>, initial: JointDist) -> Result<Self> {
        let n_states = qbar.len();
        if n_states == 0 || g.len() != n_states {
            return invalid("informed game: transition and payoff tables must list the same states");
        }
        let n_rows = qbar[0].len();
        let n_signals = qbar[0].first().and_then(|r| r.first()).map_or(0, Vec::len);
        let n_cols = g[0].first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 || n_signals == 0 {
            return invalid("informed game: empty action or signal set");
        }
        if initial.n_states() != n_states || initial.n_signals() != n_signals {
            return invalid("informed game: initial law must be over K × D");
        }
        let mut flat_q = Vec::with_capacity(n_states);
        let mut flat_g = Vec::with_capacity(n_states);
        for (k, (qk, gk)) in qbar.into_iter().zip(g).enumerate() {
            if qk.len() != n_rows || gk.len() != n_rows {
                return invalid(format!("informed game: state {k} does not list {n_rows} actions"));
            }
            let mut rows = Vec::with_capacity(n_rows);
            for (i, law) in qk.into_iter().enumerate() {
                if law.len() != n_states || law.iter().any(|r| r.len() != n_signals) {
                    return invalid(format!("informed game: qbar({k},{i}) must be {n_states} × {n_signals}"));
                }
                rows.push(check_distribution(
                    &format!("informed game qbar({k},{i})"),
                    &law.concat(),
                )?);
            }
            if gk.iter().any(|r| r.len() != n_cols) {
                return invalid(format!(
                    "informed game: payoff rows of state {k} must have {n_cols} columns"
                ));
            }
            let gk = gk
                .concat()
                .into_iter()
                .map(|x| check_payoff(&format!("informed game g({k},·,·)"), x))
                .collect::<Result<Vec<_>>>()?;
            flat_q.push(rows);
            flat_g.push(gk);
        }
        Ok(Self {
            n_states,
            n_rows,
            n_cols,
            n_signals,
            qbar: flat_q,
            g: flat_g,
            initial,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    pub fn initial(&self) -> &JointDist {
        &self.initial
    }

    /// Player 2's belief distribution at the start, `ψ_D(π)`.
    pub fn initial_beliefs(&self) -> BeliefDist {
        posterior_map(&self.initial)
    }

    pub fn g(&self, k: usize, i: usize, j: usize) -> f64 {
        self.g[k][i * self.n_cols + j]
    }

    pub fn qbar(&self, k: usize, i: usize, next: usize, d: usize) -> f64 {
        self.qbar[k][i][next * self.n_signals + d]
    }
}

/// Points of `Δ(n)` whose coordinates are multiples of `1/m`, in the order
/// used by [`BeliefGrid`].
pub fn simplex_lattice(dim: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(dim - 1, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        rec(dim, m, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

/// The belief MDP of an informed-controller game; actions are the profiles
/// `(a^k)_k` with each `a^k` on the lattice of `Δ(I)` of resolution `res`.
#[derive(Clone, Debug)]
pub struct InformedBeliefMdp {
    game: InformedGame,
    res: usize,
    /// `actions[a][k * I + i]`.
    actions: Vec<Vec<f64>>,
}

pub fn informed_to_belief_mdp(game: &InformedGame, action_grid_res: usize) -> Result<InformedBeliefMdp> {
    if action_grid_res < 2 {
        return invalid("informed game: action grid resolution must be at least 2");
    }
    let one: Vec<Vec<f64>> = simplex_lattice(game.n_rows, action_grid_res)
        .into_iter()
        .map(|c| c.into_iter().map(|x| x as f64 / action_grid_res as f64).collect())
        .collect();
    let mut actions: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..game.n_states {
        actions = actions
            .into_iter()
            .flat_map(|prefix| {
                one.iter().map(move |ak| {
                    let mut a = prefix.clone();
                    a.extend_from_slice(ak);
                    a
                })
            })
            .collect();
    }
    Ok(InformedBeliefMdp {
        game: game.clone(),
        res: action_grid_res,
        actions,
    })
}

impl InformedBeliefMdp {
    pub fn game(&self) -> &InformedGame {
        &self.game
    }

    pub fn action_grid_res(&self) -> usize {
        self.res
    }

    /// `a^k(i)` for action index `a`.
    pub fn action(&self, a: usize) -> &[f64] {
        &self.actions[a]
    }
}

impl BeliefMdp for InformedBeliefMdp {
    fn dim(&self) -> usize {
        self.game.n_states
    }

    fn n_actions(&self) -> usize {
        self.actions.len()
    }

    fn payoff(&self, p: &SimplexPoint, a: usize) -> f64 {
        let g = &self.game;
        let act = &self.actions[a];
        let r = (0..g.n_cols)
            .map(|j| {
                let mut total = 0.0;
                for (k, pk) in p.coords().iter().enumerate() {
                    for i in 0..g.n_rows {
                        total += pk * act[k * g.n_rows + i] * g.g(k, i, j);
                    }
                }
                total
            })
            .fold(f64::INFINITY, f64::min);
        r.clamp(0.0, 1.0)
    }

    fn transition(&self, p: &SimplexPoint, a: usize) -> BeliefDist {
        let g = &self.game;
        let act = &self.actions[a];
        let mut joint = vec![0.0; g.n_states * g.n_signals];
        for (k, pk) in p.coords().iter().enumerate() {
            for i in 0..g.n_rows {
                let w = pk * act[k * g.n_rows + i];
                if w == 0.0 {
                    continue;
                }
                for (e, q) in joint.iter_mut().zip(&g.qbar[k][i]) {
                    *e += w * q;
                }
            }
        }
        let pi = JointDist::from_flat_masses(g.n_states, g.n_signals, joint).expect("a belief step preserves mass");
        posterior_map(&pi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    /// Piecewise linear in the first coordinate; `|K| = 2` only.
    Linear1d,
    NearestNeighbor,
}

/// The lattice `{p ∈ Δ(K) : m p ∈ ℕ^K}` with an interpolation rule.
///
/// `mesh` bounds the L¹ distance from any belief to the grid point(s) it is
/// mapped to: `1/m` in one dimension, `K/(2m)` in general.
#[derive(Clone, Debug)]
pub struct BeliefGrid {
    dim: usize,
    resolution: usize,
    points: Vec<SimplexPoint>,
    counts: HashMap<Vec<usize>, usize>,
    mesh: f64,
    mode: Interpolation,
}

impl BeliefGrid {
    pub fn lattice(dim: usize, resolution: usize) -> Result<Self> {
        if dim < 2 || resolution == 0 {
            return invalid("belief grid: needs at least two states and a positive resolution");
        }
        let lattice = simplex_lattice(dim, resolution);
        let points = lattice
            .iter()
            .map(|c| SimplexPoint::new(c.iter().map(|x| *x as f64 / resolution as f64).collect()))
            .collect::<Result<Vec<_>>>()?;
        let counts = lattice.into_iter().enumerate().map(|(i, c)| (c, i)).collect();
        let (mesh, mode) = if dim == 2 {
            (1.0 / resolution as f64, Interpolation::Linear1d)
        } else {
            (dim as f64 / (2.0 * resolution as f64), Interpolation::NearestNeighbor)
        };
        Ok(Self {
            dim,
            resolution,
            points,
            counts,
            mesh,
            mode,
        })
    }

    /// `n` equally spaced beliefs `(t, 1 − t)`, `t = i/(n−1)`, in increasing `t`.
    pub fn uniform_1d(n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return invalid("belief grid: a 1-D grid needs at least two points");
        }
        Self::lattice(2, n_points - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn mode(&self) -> Interpolation {
        self.mode
    }

    /// Interpolation weights of `p` on grid indices.
    pub fn locate(&self, p: &SimplexPoint) -> Vec<(usize, f64)> {
        let m = self.resolution;
        match self.mode {
            Interpolation::Linear1d => {
                let x = p[0] * m as f64;
                let i = (x.floor() as usize).min(m - 1);
                let f = (x - i as f64).clamp(0.0, 1.0);
                let mut out = Vec::with_capacity(2);
                if f < 1.0 {
                    out.push((i, 1.0 - f));
                }
                if f > 0.0 {
                    out.push((i + 1, f));
                }
                out
            }
            Interpolation::NearestNeighbor => vec![(self.counts[&self.nearest_counts(p)], 1.0)],
        }
    }

    /// Largest-remainder rounding of `m p`; the L¹-nearest lattice point.
    fn nearest_counts(&self, p: &SimplexPoint) -> Vec<usize> {
        let m = self.resolution;
        let scaled: Vec<f64> = p.coords().iter().map(|x| x * m as f64).collect();
        let mut counts: Vec<usize> = scaled.iter().map(|x| x.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            let fa = scaled[a] - counts[a] as f64;
            let fb = scaled[b] - counts[b] as f64;
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &k in order.iter().take(m.saturating_sub(assigned)) {
            counts[k] += 1;
        }
        counts
    }

    /// Value of a grid function at an arbitrary belief.
    pub fn interpolate(&self, values: &[f64], p: &SimplexPoint) -> f64 {
        self.locate(p).into_iter().map(|(i, w)| w * values[i]).sum()
    }

    /// Expectation of a grid function under a belief distribution.
    pub fn expect(&self, values: &[f64], u: &BeliefDist) -> f64 {
        u.atoms().map(|(p, w)| w * self.interpolate(values, p)).sum()
    }
}

/// A belief MDP tabulated on a grid: stage payoffs and interpolated
/// continuation weights for every (grid point, action).
#[derive(Clone, Debug)]
pub struct GridModel {
    n_points: usize,
    n_actions: usize,
    mesh: f64,
    payoff: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl GridModel {
    pub fn build<M: BeliefMdp + ?Sized>(bmdp: &M, grid: &BeliefGrid) -> Result<Self> {
        if grid.is_empty() {
            return invalid("grid value iteration: empty grid");
        }
        if grid.dim() != bmdp.dim() {
            return invalid("grid value iteration: grid and model dimensions differ");
        }
        let n_actions = bmdp.n_actions();
        if n_actions == 0 {
            return invalid("grid value iteration: model has no actions");
        }
        let rows: Vec<Vec<(f64, Vec<(usize, f64)>)>> = grid
            .points()
            .par_iter()
            .map(|p| {
                (0..n_actions)
                    .map(|a| {
                        let mut acc: Vec<(usize, f64)> = Vec::new();
                        for (q, w) in bmdp.transition(p, a).atoms() {
                            for (i, c) in grid.locate(q) {
                                match acc.iter_mut().find(|(j, _)| *j == i) {
                                    Some(e) => e.1 += w * c,
                                    None => acc.push((i, w * c)),
                                }
                            }
                        }
                        acc.retain(|(_, w)| *w > 0.0);
                        (bmdp.payoff(p, a), acc)
                    })
                    .collect()
            })
            .collect();
        let mut model = Self {
            n_points: grid.len(),
            n_actions,
            mesh: grid.mesh(),
            payoff: Vec::with_capacity(grid.len() * n_actions),
            offsets: vec![0],
            targets: Vec::new(),
            weights: Vec::new(),
        };
        for (r, acc) in rows.into_iter().flatten() {
            model.payoff.push(r);
            for (i, w) in acc {
                model.targets.push(i as u32);
                model.weights.push(w);
            }
            model.offsets.push(model.targets.len());
        }
        Ok(model)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn point_value(&self, i: usize, w: f64, next: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for a in 0..self.n_actions {
            let row = i * self.n_actions + a;
            let (lo, hi) = (self.offsets[row], self.offsets[row + 1]);
            let mut val = w * self.payoff[row];
            for e in lo..hi {
                val += self.weights[e] * next[self.targets[e] as usize];
            }
            if val > best {
                best = val;
            }
        }
        best
    }

    /// `V_t(i) = max_a θ_t r(i,a) + Σ_j P(i,a,j) V_{t+1}(j)`.
    pub fn stage(&self, w: f64, next: &[f64]) -> Vec<f64> {
        if self.targets.len() >= PAR_MIN_ENTRIES {
            (0..self.n_points)
                .into_par_iter()
                .map(|i| self.point_value(i, w, next))
                .collect()
        } else {
            (0..self.n_points).map(|i| self.point_value(i, w, next)).collect()
        }
    }

    pub fn value_theta(&self, theta: &Evaluation) -> GridValues {
        let mut v = vec![0.0; self.n_points];
        for &w in theta.weights().iter().rev() {
            v = self.stage(w, &v);
        }
        GridValues {
            values: v,
            error_bound: 2.0 * self.mesh,
        }
    }
}

/// Grid values and the reported discretization bound `2 · mesh`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridValues {
    pub values: Vec<f64>,
    pub error_bound: f64,
}

pub fn grid_value_theta<M: BeliefMdp + ?Sized>(bmdp: &M, grid: &BeliefGrid, theta: &Evaluation) -> Result<GridValues> {
    Ok(GridModel::build(bmdp, grid)?.value_theta(theta))
}

/// Least concave majorant of grid data: exact upper hull in one dimension,
/// one LP per point otherwise.
pub fn concave_envelope(grid: &BeliefGrid, f: &[f64]) -> Result<Vec<f64>> {
    if grid.len() < 2 || f.len() != grid.len() {
        return invalid("concave envelope: degenerate grid or wrong number of values");
    }
    match grid.mode() {
        Interpolation::Linear1d => Ok(upper_hull_1d(grid, f)),
        Interpolation::NearestNeighbor => envelope_lp(grid, f),
    }
}

fn upper_hull_1d(grid: &BeliefGrid, f: &[f64]) -> Vec<f64> {
    let xs: Vec<f64> = grid.points().iter().map(|p| p[0]).collect();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (xs[i] - xs[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; xs.len()];
    for pair in hull.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for i in a..=b {
            let t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = (f[a] + t * (f[b] - f[a])).max(f[i]);
        }
    }
    out
}

fn envelope_lp(grid: &BeliefGrid, f: &[f64]) -> Result<Vec<f64>> {
    grid.points()
        .par_iter()
        .map(|p| {
            let n = grid.len();
            let mut lp = LinearProgram::new(n);
            for (j, fj) in f.iter().enumerate() {
                lp.set_objective(j, -fj);
            }
            for k in 0..grid.dim() {
                let row: Vec<(usize, f64)> = grid.points().iter().enumerate().map(|(j, q)| (j, q[k])).collect();
                lp.add_row(&row, RowSense::Eq, p[k]);
            }
            let sol = lp.solve()?;
            if !sol.is_optimal() {
                return Err(crate::Error::SolverFailure(format!("envelope LP: {:?}", sol.status)));
            }
            Ok(-sol.objective)
        })
        .collect()
}

/// `f*(p) = Val(Σ_k p^k G^k)` at every grid point.
pub fn non_revealing_values(fam: &MatrixFamily, grid: &BeliefGrid) -> Result<Vec<f64>> {
    if fam.dim() != grid.dim() {
        return invalid("cav: family and grid dimensions differ");
    }
    grid.points().par_iter().map(|p| fam.value_at(p)).collect()
}

/// `cav f*` on the grid.
pub fn cav_u(fam: &MatrixFamily, grid: &BeliefGrid) -> Result<Vec<f64>> {
    concave_envelope(grid, &non_revealing_values(fam, grid)?)
}

/// Worst observed excess of `|r(p,a) − r(p',a)|` and of
/// `|f(kernel(p,a)) − f(kernel(p',a))|` over `‖p − p'‖₁`, for random pairs and
/// the non-revealing functions of `families`.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    pub payoff_excess: f64,
    pub kernel_excess: f64,
    pub samples: usize,
}

pub fn lipschitz_audit<M: BeliefMdp + ?Sized, R: Rng + ?Sized>(
    bmdp: &M,
    families: &[MatrixFamily],
    samples: usize,
    rng: &mut R,
) -> Result<LipschitzReport> {
    let mut report = LipschitzReport {
        payoff_excess: f64::NEG_INFINITY,
        kernel_excess: f64::NEG_INFINITY,
        samples,
    };
    for _ in 0..samples {
        let p = crate::random::simplex_point(rng, bmdp.dim());
        let q = crate::random::simplex_point(rng, bmdp.dim());
        let a = rng.gen_range(0..bmdp.n_actions());
        let dist = l1_raw(p.coords(), q.coords());
        let dr = (bmdp.payoff(&p, a) - bmdp.payoff(&q, a)).abs();
        report.payoff_excess = report.payoff_excess.max(dr - dist);
        let (u, v) = (bmdp.transition(&p, a), bmdp.transition(&q, a));
        for fam in families {
            let du = fam.separation(&u, &v)?.abs();
            report.kernel_excess = report.kernel_excess.max(du - dist);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::value_theta_mdp;
    use crate::lp::MatrixGame;

    fn pt(c: &[f64]) -> SimplexPoint {
        SimplexPoint::new(c.to_vec()).unwrap()
    }

    fn dark() -> PomdpModel {
        // States 0 and 1, one signal; b moves 0 to 1 with probability ½.
        let q = vec![
            vec![vec![vec![1.0, 0.0]], vec![vec![0.5, 0.5]]],
            vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
        ];
        PomdpModel::new(q, vec![vec![0.0, 0.0], vec![1.0, 0.0]], pt(&[1.0, 0.0])).unwrap()
    }

    #[test]
    fn dark_updates() {
        let m = dark();
        for p in [0.0, 0.3, 1.0] {
            let b = pt(&[p, 1.0 - p]);
            let (prob, next) = belief_update(&m, &b, 0, 0).unwrap();
            assert!((prob - 1.0).abs() < 1e-15 && l1_raw(next.coords(), b.coords()) < 1e-15);
            let (prob, next) = belief_update(&m, &b, 1, 0).unwrap();
            assert!((prob - 1.0).abs() < 1e-15);
            assert!(l1_raw(next.coords(), &[p / 2.0, 1.0 - p / 2.0]) < 1e-15);
        }
        let bm = pomdp_to_belief_mdp(&m);
        assert_eq!(bm.transition(&pt(&[0.6, 0.4]), 1).len(), 1);
        assert!((bm.payoff(&pt(&[0.6, 0.4]), 0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn full_observation_gives_dirac_posteriors() {
        let mdp = FiniteMdp::new(
            vec![vec![vec![0.2, 0.8]], vec![vec![0.5, 0.5]]],
            vec![vec![0.1], vec![0.9]],
        )
        .unwrap();
        let m = PomdpModel::fully_observed(&mdp, pt(&[1.0, 0.0])).unwrap();
        let (prob, next) = belief_update(&m, &pt(&[1.0, 0.0]), 0, 1).unwrap();
        assert!((prob - 0.8).abs() < 1e-15 && next[1] == 1.0);
        let (prob, next) = belief_update(&m, &pt(&[1.0, 0.0]), 0, 0).unwrap();
        assert!((prob - 0.2).abs() < 1e-15 && next[0] == 1.0);
    }

    #[test]
    fn reduction_matches_finite_mdp() {
        let mut rng = crate::random::seeded(11);
        for (k, m) in [(2, 8), (3, 4)] {
            let mdp = crate::random::finite_mdp(&mut rng, k, 2);
            let pomdp = PomdpModel::fully_observed(&mdp, SimplexPoint::uniform(k).unwrap()).unwrap();
            let grid = BeliefGrid::lattice(k, m).unwrap();
            let model = GridModel::build(&pomdp_to_belief_mdp(&pomdp), &grid).unwrap();
            for theta in [
                Evaluation::cesaro(30).unwrap(),
                Evaluation::discounted(0.2, 1e-10).unwrap(),
            ] {
                let exact = value_theta_mdp(&mdp, &theta);
                let gv = model.value_theta(&theta);
                for (s, e) in exact.iter().enumerate() {
                    let v = grid.interpolate(&gv.values, &SimplexPoint::vertex(k, s).unwrap());
                    assert!((v - e).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn constant_payoff_grid() {
        let q = vec![
            vec![vec![vec![0.5, 0.5], vec![0.0, 0.0]]],
            vec![vec![vec![0.0, 0.0], vec![0.3, 0.7]]],
        ];
        let m = PomdpModel::new(q, vec![vec![0.4], vec![0.4]], pt(&[0.5, 0.5])).unwrap();
        let gv = grid_value_theta(
            &pomdp_to_belief_mdp(&m),
            &BeliefGrid::uniform_1d(11).unwrap(),
            &Evaluation::cesaro(9).unwrap(),
        )
        .unwrap();
        assert!(gv.values.iter().all(|v| (v - 0.4).abs() < 1e-12));
        assert!((gv.error_bound - 0.2).abs() < 1e-15);
    }

    #[test]
    fn lattice_and_location() {
        assert_eq!(simplex_lattice(3, 2).len(), 6);
        let g = BeliefGrid::uniform_1d(5).unwrap();
        assert_eq!(g.points()[1].coords(), &[0.25, 0.75]);
        assert_eq!(g.locate(&pt(&[1.0, 0.0])), vec![(4, 1.0)]);
        let w = g.locate(&pt(&[0.3, 0.7]));
        assert_eq!(w[0].0, 1);
        assert!((w[0].1 - 0.8).abs() < 1e-12 && (w[1].1 - 0.2).abs() < 1e-12);
        let g3 = BeliefGrid::lattice(3, 4).unwrap();
        for v in 0..3 {
            let p = SimplexPoint::vertex(3, v).unwrap();
            let (i, _) = g3.locate(&p)[0];
            assert_eq!(g3.points()[i], p);
        }
        let mut rng = crate::random::seeded(3);
        for _ in 0..200 {
            let p = crate::random::simplex_point(&mut rng, 3);
            let (i, _) = g3.locate(&p)[0];
            assert!(l1_raw(g3.points()[i].coords(), p.coords()) <= g3.mesh() + 1e-12);
        }
        assert!(BeliefGrid::uniform_1d(1).is_err());
    }

    #[test]
    fn informed_payoff_and_kernel() {
        // Aumann–Maschler: state fixed, the signal is player 1's action.
        let qbar = (0..2)
            .map(|k| {
                (0..2)
                    .map(|i| {
                        (0..2)
                            .map(|kk| (0..2).map(|d| if kk == k && d == i { 1.0 } else { 0.0 }).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let g = vec![
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        ];
        let init = JointDist::new(vec![vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        let game = InformedGame::new(qbar, g, init).unwrap();
        let bm = informed_to_belief_mdp(&game, 2).unwrap();
        assert_eq!(bm.n_actions(), 9);
        let p = pt(&[0.5, 0.5]);
        // a¹ = (1, 0), a² = (0, 1): full revelation, r = min(½, ½).
        let a = (0..bm.n_actions())
            .find(|&a| bm.action(a) == [1.0, 0.0, 0.0, 1.0])
            .unwrap();
        assert!((bm.payoff(&p, a) - 0.5).abs() < 1e-15);
        let split = bm.transition(&p, a);
        assert_eq!(split.len(), 2);
        // a¹ = a² = (½, ½): nothing revealed.
        let a = (0..bm.n_actions())
            .find(|&a| bm.action(a) == [0.5, 0.5, 0.5, 0.5])
            .unwrap();
        assert_eq!(bm.transition(&p, a).len(), 1);
        assert!((bm.payoff(&p, a) - 0.25).abs() < 1e-15);
        assert!(informed_to_belief_mdp(&game, 1).is_err());
    }

    #[test]
    fn envelope_examples() {
        let grid = BeliefGrid::uniform_1d(101).unwrap();
        let c = [0.2, 0.7];
        let fam = MatrixFamily::new(c.iter().map(|x| MatrixGame::new(vec![vec![*x]]).unwrap()).collect()).unwrap();
        let cav = cav_u(&fam, &grid).unwrap();
        for (p, v) in grid.points().iter().zip(&cav) {
            assert!((v - (0.2 * p[0] + 0.7 * p[1])).abs() < 1e-12);
        }
        let am = MatrixFamily::new(vec![
            MatrixGame::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(),
            MatrixGame::new(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ])
        .unwrap();
        let cav = cav_u(&am, &grid).unwrap();
        for (p, v) in grid.points().iter().zip(&cav) {
            assert!((v - p[0] * p[1]).abs() < 1e-9);
        }
        // max of two affine functions crossing at ½: the envelope is the chord.
        let f: Vec<f64> = grid.points().iter().map(|p| (p[0] - 0.5).abs()).collect();
        let env = concave_envelope(&grid, &f).unwrap();
        assert!(env.iter().all(|v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn envelope_lp_agrees_with_hull_on_a_face() {
        let grid = BeliefGrid::lattice(3, 6).unwrap();
        let f: Vec<f64> = grid
            .points()
            .iter()
            .map(|p| (p[0] - p[1]).abs() * 0.5 + p[2] * p[2])
            .collect();
        let env = concave_envelope(&grid, &f).unwrap();
        for (e, fi) in env.iter().zip(&f) {
            assert!(*e >= fi - 1e-9);
        }
        // Concave majorant of a convex function on the simplex is affine
        // through the vertex values.
        for (p, e) in grid.points().iter().zip(&env) {
            let affine = 0.5 * p[0] + 0.5 * p[1] + p[2];
            assert!((e - affine).abs() < 1e-9, "{e} vs {affine}");
        }
    }
}
