//! Dynamic programming under general evaluations.
//!
//! Gambling houses pay on the state that is reached: a play `u_1, u_2, ...`
//! with `u_1 ∈ F(x_0)` is worth `Σ_t θ_t r(u_t)`. Finite MDPs pay on the
//! current state and action: `Σ_t θ_t g(k_t, a_t)`. Both are solved by exact
//! backward induction over the (finite) horizon of `θ`.
//!
//! The limit value `v*` of a finite MDP is the optimum of
//!
//! ```text
//! minimize   w(k0)
//! subject to w(k)        ≥ Σ_k' q(k,a)(k') w(k')             (excessive)
//!            w(k) + h(k) ≥ g(k,a) + Σ_k' q(k,a)(k') h(k')    (superharmonic)
//!            w ∈ [0,1]^K, h free
//! ```
//!
//! and [`max_invariant_payoff`] is the separation oracle that audits the
//! second family against stationary occupation measures.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lp::{LinearProgram, RowSense};
use crate::prob::{Evaluation, COMPARE_TOL};

const PAYOFF_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-9;
/// Below this many states a stage is swept serially.
const PAR_MIN_STATES: usize = 256;

fn check_payoff(what: &str, g: f64) -> Result<f64> {
    if !g.is_finite() || !(-PAYOFF_TOL..=1.0 + PAYOFF_TOL).contains(&g) {
        return invalid(format!("{what}: payoff {g} outside [0, 1]"));
    }
    Ok(g.clamp(0.0, 1.0))
}

/// Validate and normalize a sparse distribution over `0..n`; duplicate targets
/// are summed and zero entries dropped.
fn sparse_distribution(what: &str, n: usize, entries: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    let mut dense = vec![0.0; n];
    for &(j, p) in entries {
        if j >= n {
            return invalid(format!("{what}: target {j} is not a state"));
        }
        if !p.is_finite() || p < -PAYOFF_TOL {
            return invalid(format!("{what}: negative or non-finite probability {p}"));
        }
        dense[j] += p.max(0.0);
    }
    let total: f64 = dense.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return invalid(format!("{what}: probabilities sum to {total}"));
    }
    Ok(dense
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(j, p)| (j, p / total))
        .collect())
}

fn dense_distribution(what: &str, row: Vec<f64>) -> Result<Vec<f64>> {
    let entries: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
    let sparse = sparse_distribution(what, row.len(), &entries)?;
    let mut out = vec![0.0; row.len()];
    for (j, p) in sparse {
        out[j] = p;
    }
    Ok(out)
}

fn sweep<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n >= PAR_MIN_STATES {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// `Γ = (X, F, r)` on a finite state set `0..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GamblingHouse {
    payoffs: Vec<f64>,
    moves: Vec<Vec<Vec<(usize, f64)>>>,
}

impl GamblingHouse {
    /// `moves[x]` lists the generators of `F(x)` as sparse distributions.
    pub fn new(payoffs: Vec<f64>, moves: Vec<Vec<Vec<(usize, f64)>>>) -> Result<Self> {
        let n = payoffs.len();
        if n == 0 {
            return invalid("gambling house: no states");
        }
        if moves.len() != n {
            return invalid("gambling house: one move list per state is required");
        }
        let payoffs = payoffs
            .into_iter()
            .enumerate()
            .map(|(x, r)| check_payoff(&format!("gambling house state {x}"), r))
            .collect::<Result<Vec<_>>>()?;
        let mut clean = Vec::with_capacity(n);
        for (x, list) in moves.into_iter().enumerate() {
            if list.is_empty() {
                return invalid(format!("gambling house: F({x}) is empty"));
            }
            let list = list
                .iter()
                .enumerate()
                .map(|(i, u)| sparse_distribution(&format!("gambling house move {i} of state {x}"), n, u))
                .collect::<Result<Vec<_>>>()?;
            clean.push(list);
        }
        Ok(Self { payoffs, moves: clean })
    }

    /// A house where every state has a single successor.
    pub fn deterministic(payoffs: Vec<f64>, next: Vec<usize>) -> Result<Self> {
        let moves = next.into_iter().map(|y| vec![vec![(y, 1.0)]]).collect();
        Self::new(payoffs, moves)
    }

    pub fn n_states(&self) -> usize {
        self.payoffs.len()
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.payoffs
    }

    pub fn moves(&self, x: usize) -> &[Vec<(usize, f64)>] {
        &self.moves[x]
    }

    /// `max_{u ∈ F(x)} Σ u(x') f(x')` for every `x`.
    pub fn best_response(&self, f: &[f64]) -> Vec<f64> {
        sweep(self.n_states(), |x| {
            self.moves[x]
                .iter()
                .map(|u| u.iter().map(|&(y, p)| p * f[y]).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max)
        })
    }
}

/// Backward induction for a house: `V_{T+1} = 0`,
/// `V_t(x) = max_{u ∈ F(x)} Σ u(x') [θ_t r(x') + V_{t+1}(x')]`; returns `V_1`.
pub fn value_theta_house(house: &GamblingHouse, theta: &Evaluation) -> Vec<f64> {
    let n = house.n_states();
    let mut v = vec![0.0; n];
    for &w in theta.weights().iter().rev() {
        let stage: Vec<f64> = house.payoffs.iter().zip(&v).map(|(r, c)| w * r + c).collect();
        v = house.best_response(&stage);
    }
    v
}

/// `Ψ = (K, A, q, g)` with dense transitions `q[k][a][k']`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMdp {
    transitions: Vec<Vec<Vec<f64>>>,
    payoffs: Vec<Vec<f64>>,
    n_actions: usize,
}

impl FiniteMdp {
    pub fn new(transitions: Vec<Vec<Vec<f64>>>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let n = transitions.len();
        if n == 0 {
            return invalid("mdp: no states");
        }
        if payoffs.len() != n {
            return invalid("mdp: payoff table does not match the number of states");
        }
        let n_actions = transitions[0].len();
        if n_actions == 0 {
            return invalid("mdp: no actions");
        }
        let mut q = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for (k, (rows, gk)) in transitions.into_iter().zip(payoffs).enumerate() {
            if rows.len() != n_actions || gk.len() != n_actions {
                return invalid(format!("mdp: state {k} does not list {n_actions} actions"));
            }
            let mut qk = Vec::with_capacity(n_actions);
            for (a, row) in rows.into_iter().enumerate() {
                if row.len() != n {
                    return invalid(format!("mdp: q({k},{a}) has the wrong length"));
                }
                qk.push(dense_distribution(&format!("mdp q({k},{a})"), row)?);
            }
            q.push(qk);
            g.push(
                gk.into_iter()
                    .enumerate()
                    .map(|(a, x)| check_payoff(&format!("mdp g({k},{a})"), x))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            transitions: q,
            payoffs: g,
            n_actions,
        })
    }

    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q(&self, k: usize, a: usize) -> &[f64] {
        &self.transitions[k][a]
    }

    pub fn g(&self, k: usize, a: usize) -> f64 {
        self.payoffs[k][a]
    }

    fn expect(&self, k: usize, a: usize, f: &[f64]) -> f64 {
        self.transitions[k][a].iter().zip(f).map(|(p, v)| p * v).sum()
    }

    /// One backward-induction stage with weight `w`; returns values and the
    /// lowest-index maximizing action per state.
    fn stage(&self, w: f64, next: &[f64]) -> (Vec<f64>, Vec<usize>) {
        let pick = |k: usize| {
            let mut best = (f64::NEG_INFINITY, 0);
            for a in 0..self.n_actions {
                let val = w * self.payoffs[k][a] + self.expect(k, a, next);
                if val > best.0 {
                    best = (val, a);
                }
            }
            best
        };
        let picks: Vec<(f64, usize)> = if self.n_states() >= PAR_MIN_STATES {
            (0..self.n_states()).into_par_iter().map(pick).collect()
        } else {
            (0..self.n_states()).map(pick).collect()
        };
        picks.into_iter().unzip()
    }
}

/// θ-values of an MDP together with an optimal Markov policy.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpSolution {
    pub values: Vec<f64>,
    /// `policy[t][k]`: action played at stage `t + 1` in state `k`.
    pub policy: Vec<Vec<usize>>,
}

/// Backward induction for an MDP; ties go to the lowest action index.
pub fn solve_theta_mdp(mdp: &FiniteMdp, theta: &Evaluation) -> MdpSolution {
    let horizon = theta.horizon();
    let mut v = vec![0.0; mdp.n_states()];
    let mut policy = vec![Vec::new(); horizon];
    for t in (0..horizon).rev() {
        let (next, act) = mdp.stage(theta.weights()[t], &v);
        v = next;
        policy[t] = act;
    }
    MdpSolution { values: v, policy }
}

pub fn value_theta_mdp(mdp: &FiniteMdp, theta: &Evaluation) -> Vec<f64> {
    let mut v = vec![0.0; mdp.n_states()];
    for &w in theta.weights().iter().rev() {
        v = mdp.stage(w, &v).0;
    }
    v
}

/// `β_l = (1/n) Σ_{t = max(0, l−n)}^{min(T, l−1)} θ_t` for `l = 1..T+n`, where
/// `theta[t]` is the weight of stage `t ∈ {0..T}`.
pub fn window_transform(theta: &[f64], n: usize) -> Result<Evaluation> {
    if n == 0 {
        return invalid("window transform: n must be positive");
    }
    if theta.is_empty() {
        return invalid("window transform: empty evaluation");
    }
    let t_max = theta.len() - 1;
    let mut prefix = vec![0.0; theta.len() + 1];
    for (t, w) in theta.iter().enumerate() {
        prefix[t + 1] = prefix[t] + w;
    }
    let beta = (1..=t_max + n)
        .map(|l| {
            let lo = l.saturating_sub(n);
            let hi = t_max.min(l - 1);
            (prefix[hi + 1] - prefix[lo]) / n as f64
        })
        .collect();
    Evaluation::new(beta)
}

/// `(p, y)` with a stationary occupation measure `π` witnessing it.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCouple {
    pub p: Vec<f64>,
    pub y: f64,
    /// `pi[k][a]`.
    pub pi: Vec<Vec<f64>>,
}

impl InvariantCouple {
    /// Largest violation among marginal, stationarity, payoff and sign
    /// constraints.
    pub fn residual(&self, mdp: &FiniteMdp) -> f64 {
        let n = mdp.n_states();
        let mut worst: f64 = 0.0;
        let mut inflow = vec![0.0; n];
        let mut payoff = 0.0;
        for (k, row) in self.pi.iter().enumerate() {
            for (a, &m) in row.iter().enumerate() {
                worst = worst.max(-m);
                payoff += m * mdp.g(k, a);
                for (j, q) in mdp.q(k, a).iter().enumerate() {
                    inflow[j] += m * q;
                }
            }
        }
        for k in 0..n {
            let out: f64 = self.pi[k].iter().sum();
            worst = worst.max((out - self.p[k]).abs()).max((out - inflow[k]).abs());
        }
        worst.max((payoff - self.y).abs())
    }
}

fn occupation_lp(mdp: &FiniteMdp) -> LinearProgram {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let mut lp = LinearProgram::new(n * m);
    for k in 0..n {
        let mut row: Vec<(usize, f64)> = (0..m).map(|a| (k * m + a, 1.0)).collect();
        for j in 0..n {
            for a in 0..m {
                let q = mdp.q(j, a)[k];
                if q != 0.0 {
                    row.push((j * m + a, -q));
                }
            }
        }
        lp.add_row(&row, RowSense::Eq, 0.0);
    }
    lp
}

fn unflatten(x: &[f64], n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| (0..m).map(|a| x[k * m + a].max(0.0)).collect())
        .collect()
}

/// Look for a stationary `π ∈ Δ(K × A)` with state marginal `p` and payoff
/// `y`. Only witnesses whose residual is at most `1e-9` are returned.
pub fn check_invariant_couple(mdp: &FiniteMdp, p: &[f64], y: f64) -> Result<Option<InvariantCouple>> {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    if p.len() != n {
        return invalid("invariant couple: p has the wrong dimension");
    }
    let mut lp = occupation_lp(mdp);
    for (k, pk) in p.iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..m).map(|a| (k * m + a, 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, *pk);
    }
    let payoff: Vec<(usize, f64)> = (0..n * m).map(|j| (j, mdp.g(j / m, j % m))).collect();
    lp.add_row(&payoff, RowSense::Eq, y);
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let couple = InvariantCouple {
        p: p.to_vec(),
        y,
        pi: unflatten(&sol.x, n, m),
    };
    Ok((couple.residual(mdp) <= MASS_TOL).then_some(couple))
}

/// `max Σ π(k,a) (g(k,a) − w(k))` over stationary `π ∈ Δ(K × A)`; positive
/// exactly when some invariant couple `(p, y)` has `y > w(p)`.
pub fn max_invariant_payoff(mdp: &FiniteMdp, w: &[f64]) -> Result<f64> {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    if w.len() != n {
        return invalid("separation oracle: w has the wrong dimension");
    }
    let mut lp = occupation_lp(mdp);
    for j in 0..n * m {
        let (k, a) = (j / m, j % m);
        lp.set_objective(j, w[k] - mdp.g(k, a));
    }
    let all: Vec<(usize, f64)> = (0..n * m).map(|j| (j, 1.0)).collect();
    lp.add_row(&all, RowSense::Eq, 1.0);
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::SolverFailure(format!("separation LP: {:?}", sol.status)));
    }
    Ok(-sol.objective)
}

/// Some `h` with `w(k) + h(k) ≥ g(k,a) + Σ q(k,a)(k') h(k')` for all `k, a`,
/// if one exists.
pub fn superharmonic_completion(mdp: &FiniteMdp, w: &[f64]) -> Result<Option<Vec<f64>>> {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    if w.len() != n {
        return invalid("superharmonic completion: w has the wrong dimension");
    }
    let mut lp = LinearProgram::new(n);
    for k in 0..n {
        lp.set_free(k);
    }
    for k in 0..n {
        for a in 0..m {
            let mut row = vec![(k, 1.0)];
            row.extend(mdp.q(k, a).iter().enumerate().map(|(j, q)| (j, -q)));
            lp.add_row(&row, RowSense::Ge, mdp.g(k, a) - w[k]);
        }
    }
    let sol = lp.solve()?;
    Ok(sol.is_optimal().then_some(sol.x))
}

/// `(w, h)`: an excessive `w` completed into a superharmonic pair.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitValueCertificate {
    pub w: Vec<f64>,
    pub h: Vec<f64>,
}

impl LimitValueCertificate {
    /// Largest violation of excessivity or superharmonicity.
    pub fn residual(&self, mdp: &FiniteMdp) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..mdp.n_states() {
            for a in 0..mdp.n_actions() {
                worst = worst.max(mdp.expect(k, a, &self.w) - self.w[k]);
                let rhs = mdp.g(k, a) + mdp.expect(k, a, &self.h);
                worst = worst.max(rhs - self.w[k] - self.h[k]);
            }
        }
        worst
    }
}

/// `v*(k0)` and an optimal certificate.
pub fn limit_value_lp(mdp: &FiniteMdp, k0: usize) -> Result<(f64, LimitValueCertificate)> {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    if k0 >= n {
        return invalid(format!("limit value: start state {k0} out of range"));
    }
    let (w, h) = (|k: usize| k, |k: usize| n + k);
    let mut lp = LinearProgram::new(2 * n);
    lp.set_objective(w(k0), 1.0);
    for k in 0..n {
        lp.set_bounds(w(k), 0.0, 1.0);
        lp.set_free(h(k));
    }
    for k in 0..n {
        for a in 0..m {
            let q = mdp.q(k, a);
            let mut row = vec![(w(k), 1.0)];
            row.extend(q.iter().enumerate().map(|(j, p)| (w(j), -p)));
            lp.add_row(&row, RowSense::Ge, 0.0);
            let mut row = vec![(w(k), 1.0), (h(k), 1.0)];
            row.extend(q.iter().enumerate().map(|(j, p)| (h(j), -p)));
            lp.add_row(&row, RowSense::Ge, mdp.g(k, a));
        }
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::SolverFailure(format!("limit value LP: {:?}", sol.status)));
    }
    let cert = LimitValueCertificate {
        w: sol.x[..n].to_vec(),
        h: sol.x[n..].to_vec(),
    };
    Ok((sol.objective, cert))
}

/// `w(k) ≥ Σ q(k,a)(k') w(k') − 1e-9` for every `k, a`.
pub fn excessive_check(mdp: &FiniteMdp, w: &[f64]) -> bool {
    w.len() == mdp.n_states()
        && (0..mdp.n_states()).all(|k| (0..mdp.n_actions()).all(|a| w[k] >= mdp.expect(k, a, w) - COMPARE_TOL))
}

/// `n0 · I(θ)`: what a block strategy with blocks of length `n0` may lose
/// against `v*` under the evaluation `θ`, beyond the per-block error.
pub fn block_strategy_payoff_bound(n0: usize, theta: &Evaluation) -> f64 {
    n0 as f64 * theta.impatience()
}

/// `max_{m ≤ m_max} v_{m,n}`, where `v_{m,n}` is the value of the Cesàro
/// window on stages `m+1..m+n`.
pub fn sup_window_value(mdp: &FiniteMdp, n: usize, m_max: usize) -> Result<Vec<f64>> {
    let mut reach = value_theta_mdp(mdp, &Evaluation::cesaro(n)?);
    let mut best = reach.clone();
    for _ in 0..m_max {
        reach = mdp.stage(0.0, &reach).0;
        for (b, r) in best.iter_mut().zip(&reach) {
            *b = b.max(*r);
        }
    }
    Ok(best)
}
