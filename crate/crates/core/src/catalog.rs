//! Built-in models with known limit behavior, and their reference values.

use crate::dp::{FiniteMdp, GamblingHouse};
use crate::error::{invalid, Result};
use crate::lp::MatrixGame;
use crate::metric::MatrixFamily;
use crate::partial::{InformedGame, PomdpModel};
use crate::prob::{Evaluation, JointDist, SimplexPoint};

/// Two states swapped at every stage, paying 1 in state 1.
pub fn alternating_house() -> GamblingHouse {
    GamblingHouse::deterministic(vec![0.0, 1.0], vec![1, 0]).expect("static model")
}

/// The same alternation as a one-action MDP paying on the current state.
pub fn alternating_mdp() -> FiniteMdp {
    FiniteMdp::new(
        vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
        vec![vec![0.0], vec![1.0]],
    )
    .expect("static model")
}

/// `Σ_{t=1}^n (1/n) δ_{2t}`: small stage weights, impatience not small.
pub fn even_stage_evaluation(n: usize) -> Result<Evaluation> {
    if n == 0 {
        return invalid("even-stage evaluation: n must be positive");
    }
    let mut w = vec![0.0; 2 * n];
    for t in 1..=n {
        w[2 * t - 1] = 1.0 / n as f64;
    }
    Evaluation::new(w)
}

/// `r(e^{iα}) = (1 + cos α)/2`.
pub fn circle_payoff(alpha: f64) -> f64 {
    (1.0 + alpha.cos()) / 2.0
}

/// The orbit `α₀, α₀ + 1, ..., α₀ + n` of the unit rotation as a
/// deterministic house; the last point is absorbing.
pub fn circle_house(start_angle: f64, n: usize) -> GamblingHouse {
    let payoffs = (0..=n).map(|j| circle_payoff(start_angle + j as f64)).collect();
    let next = (0..=n).map(|j| (j + 1).min(n)).collect();
    GamblingHouse::deterministic(payoffs, next).expect("orbit house is valid")
}

/// Riemann mean of the circle payoff on `points` equally spaced angles.
pub fn circle_reference(points: usize) -> f64 {
    let h = std::f64::consts::TAU / points as f64;
    (0..points).map(|i| circle_payoff(i as f64 * h)).sum::<f64>() / points as f64
}

/// Payoff at the losing point `c` of the three-point reaching problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfiniPayoff {
    /// `r = (0, 1, 0)` on `(a, b, c)`: the encoding whose discounted value at
    /// `a` solves `x = max_α (1−λ)(1−α−α^l) x + α`.
    Reach,
    /// `r = (0, 1, −1)` rescaled to `(r + 1)/2 = (½, 1, 0)`.
    Penalized,
}

/// States `a = 0`, `b = 1`, `c = 2`. At `a` the controller picks `α` on a grid
/// of `[0, ½]`; `b` is reached with probability `α`, `c` with `α^l`. `b` and `c`
/// are absorbing.
pub fn infini_house(l: f64, alpha_points: usize, payoff: InfiniPayoff) -> Result<GamblingHouse> {
    if l.is_nan() || l <= 1.0 || alpha_points < 2 {
        return invalid("infini house: needs l > 1 and at least two α values");
    }
    let moves_a = (0..alpha_points)
        .map(|i| {
            let alpha = 0.5 * i as f64 / (alpha_points - 1) as f64;
            let to_c = alpha.powf(l);
            vec![(0, 1.0 - alpha - to_c), (1, alpha), (2, to_c)]
        })
        .collect();
    let payoffs = match payoff {
        InfiniPayoff::Reach => vec![0.0, 1.0, 0.0],
        InfiniPayoff::Penalized => vec![0.5, 1.0, 0.0],
    };
    GamblingHouse::new(payoffs, vec![moves_a, vec![vec![(1, 1.0)]], vec![vec![(2, 1.0)]]])
}

/// `x_λ = (1/(1−λ)) · (l (λ/((1−λ)(l−1)))^{(l−1)/l} + 1)^{−1}`.
pub fn infini_closed_form(lambda: f64, l: f64) -> f64 {
    let inner = (lambda / ((1.0 - lambda) * (l - 1.0))).powf((l - 1.0) / l);
    1.0 / ((1.0 - lambda) * (l * inner + 1.0))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Two states, one signal, start in state 0. Action 0 pays 1 in state 1 and
/// keeps the state; action 1 pays nothing and moves 0 to 1 with probability ½.
pub fn dark_pomdp() -> PomdpModel {
    let q = vec![
        vec![vec![vec![1.0, 0.0]], vec![vec![0.5, 0.5]]],
        vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]],
    ];
    let start = SimplexPoint::vertex(2, 0).expect("two states");
    PomdpModel::new(q, vec![vec![0.0, 0.0], vec![1.0, 0.0]], start).expect("static model")
}

/// `max_{n ≤ n_max} (1−λ)^n (1 − 2^{−n})`: the discounted payoff of moving
/// `n` times and then collecting forever.
pub fn dark_oracle(lambda: f64, n_max: usize) -> f64 {
    (0..=n_max)
        .map(|n| (1.0 - lambda).powi(n as i32) * (1.0 - 0.5f64.powi(n as i32)))
        .fold(0.0, f64::max)
}

/// `G¹ = [[1,0],[0,0]]`, `G² = [[0,0],[0,1]]`.
pub fn aumann_maschler_family() -> MatrixFamily {
    MatrixFamily::new(vec![
        MatrixGame::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).expect("static"),
        MatrixGame::new(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).expect("static"),
    ])
    .expect("static")
}

/// Informed-controller game over a family of matrices: the state follows a
/// chain `chain[k][k']` independent of actions, player 2 observes player 1's
/// action, and the initial state is drawn from `prior`.
pub fn markov_informed_game(fam: &MatrixFamily, chain: &[Vec<f64>], prior: &SimplexPoint) -> Result<InformedGame> {
    let (n_rows, n_cols) = fam.shape();
    let k = fam.dim();
    if chain.len() != k || chain.iter().any(|r| r.len() != k) || prior.dim() != k {
        return invalid("informed game: chain and prior must match the family");
    }
    let qbar = (0..k)
        .map(|s| {
            (0..n_rows)
                .map(|i| {
                    (0..k)
                        .map(|next| (0..n_rows).map(|d| if d == i { chain[s][next] } else { 0.0 }).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let g = fam
        .games()
        .iter()
        .map(|m| {
            (0..n_rows)
                .map(|i| (0..n_cols).map(|j| m.get(i, j)).collect())
                .collect()
        })
        .collect();
    let initial = JointDist::new(
        prior
            .coords()
            .iter()
            .map(|pk| (0..n_rows).map(|d| if d == 0 { *pk } else { 0.0 }).collect())
            .collect(),
    )?;
    InformedGame::new(qbar, g, initial)
}

/// Symmetric two-state chain that stays put with probability `persistence`.
pub fn symmetric_chain(persistence: f64) -> Vec<Vec<f64>> {
    vec![
        vec![persistence, 1.0 - persistence],
        vec![1.0 - persistence, persistence],
    ]
}

/// The Aumann–Maschler game at prior `p` on the first state.
pub fn aumann_maschler_game(p: f64) -> Result<InformedGame> {
    let prior = SimplexPoint::new(vec![p, 1.0 - p])?;
    markov_informed_game(&aumann_maschler_family(), &symmetric_chain(1.0), &prior)
}

/// The Aumann–Maschler payoffs with a state that persists with probability
/// `persistence`, started from the uniform prior.
pub fn horner_game(persistence: f64) -> Result<InformedGame> {
    if !(0.0..=1.0).contains(&persistence) {
        return invalid("horner game: persistence must lie in [0, 1]");
    }
    let prior = SimplexPoint::uniform(2)?;
    markov_informed_game(&aumann_maschler_family(), &symmetric_chain(persistence), &prior)
}

/// `p / (4p − 1)`, the value for persistence `p ∈ [½, ⅔)`.
pub fn horner_value(persistence: f64) -> f64 {
    persistence / (4.0 * persistence - 1.0)
}
