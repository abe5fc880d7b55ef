//! Seeded generators for test instances, certificate families and demos.
//!
//! All randomness in the crate flows through [`seeded`], so identical seeds
//! give identical instances on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dp::FiniteMdp;
use crate::lp::MatrixGame;
use crate::metric::MatrixFamily;
use crate::prob::{BeliefDist, Evaluation, SimplexPoint};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from `Δ(K)` via normalized exponential spacings.
pub fn simplex_point<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> SimplexPoint {
    let w: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    SimplexPoint::from_weights(w).expect("exponential spacings have positive mass")
}

/// Random positive weights over `len` atoms.
pub fn weights<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    simplex_point(rng, len).into_coords()
}

/// A belief distribution with between 1 and `max_support` random atoms.
pub fn belief_dist<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_support: usize) -> BeliefDist {
    let n = rng.gen_range(1..=max_support.max(1));
    let w = weights(rng, n);
    let atoms = w.into_iter().map(|wi| (simplex_point(rng, dim), wi)).collect();
    BeliefDist::new(atoms).expect("random atoms form a distribution")
}

/// A belief distribution supported on the vertices of `Δ(K)`.
pub fn vertex_belief_dist<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> BeliefDist {
    let w = weights(rng, dim);
    let atoms = w
        .into_iter()
        .enumerate()
        .map(|(k, wk)| (SimplexPoint::vertex(dim, k).unwrap(), wk))
        .collect();
    BeliefDist::new(atoms).expect("vertex weights form a distribution")
}

/// One matrix game per state, shape up to `max_shape × max_shape`; entries as
/// in [`game_entry`].
pub fn matrix_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_shape: usize) -> MatrixFamily {
    let rows = rng.gen_range(1..=max_shape.max(1));
    let cols = rng.gen_range(1..=max_shape.max(1));
    shaped_matrix_family(rng, dim, rows, cols)
}

pub fn shaped_matrix_family<R: Rng + ?Sized>(rng: &mut R, dim: usize, rows: usize, cols: usize) -> MatrixFamily {
    let games = (0..dim)
        .map(|_| {
            let entries = (0..rows * cols).map(|_| game_entry(rng)).collect();
            MatrixGame::from_flat(rows, cols, entries).unwrap()
        })
        .collect();
    MatrixFamily::new(games).expect("shapes agree by construction")
}

/// `±1` with probability ½, otherwise uniform in `[-1, 1]`. Extreme entries
/// give certificates of full slope; the continuous part moves their kinks.
pub fn game_entry<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        if rng.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    } else {
        rng.gen_range(-1.0..=1.0)
    }
}

/// A random finite MDP. About half of the transition rows are sparse (one or
/// two successors), which produces multichain and periodic structure.
pub fn finite_mdp<R: Rng + ?Sized>(rng: &mut R, n_states: usize, n_actions: usize) -> FiniteMdp {
    let mut transitions = Vec::with_capacity(n_states);
    let mut payoffs = Vec::with_capacity(n_states);
    for _ in 0..n_states {
        let mut rows = Vec::with_capacity(n_actions);
        let mut g = Vec::with_capacity(n_actions);
        for _ in 0..n_actions {
            let mut row = vec![0.0; n_states];
            if rng.gen_bool(0.5) {
                let n_succ = rng.gen_range(1..=2.min(n_states));
                let w = weights(rng, n_succ);
                for wi in w {
                    row[rng.gen_range(0..n_states)] += wi;
                }
            } else {
                row = weights(rng, n_states);
            }
            rows.push(row);
            g.push(rng.gen::<f64>());
        }
        transitions.push(rows);
        payoffs.push(g);
    }
    FiniteMdp::new(transitions, payoffs).expect("random MDP is valid")
}

/// A random evaluation with positive weights on `1..=horizon`.
pub fn evaluation<R: Rng + ?Sized>(rng: &mut R, horizon: usize) -> Evaluation {
    let w: Vec<f64> = (0..horizon).map(|_| rng.gen::<f64>() + 1e-3).collect();
    Evaluation::from_weights(w).unwrap()
}
