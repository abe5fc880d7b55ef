//! Belief-space transport metric and long-run values of dynamic decision
//! problems over beliefs.

pub mod catalog;
pub mod cli;
pub mod dp;
pub mod error;
pub mod lp;
pub mod metric;
pub mod partial;
pub mod prob;
pub mod random;

pub use error::{Error, Result};
pub use lp::{matrix_game_value, solve_lp, GameSolution, LinearProgram, LpSolution, LpStatus, MatrixGame, RowSense};
pub use prob::{l1_distance, BeliefDist, Evaluation, JointDist, SimplexPoint};
