//! Dense linear programming and zero-sum matrix games.

mod game;
mod simplex;

pub use game::{matrix_game_value, GameSolution, MatrixGame};
pub use simplex::solve_lp;

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// `minimize c·x  s.t.  A x (≤ | = | ≥) b,  lower ≤ x ≤ upper`.
///
/// New variables default to the bounds `[0, +∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Vec<f64>>,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    /// Build from dense data, checking dimensions and finiteness.
    pub fn from_dense(
        objective: Vec<f64>,
        rows: Vec<Vec<f64>>,
        senses: Vec<RowSense>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        if rows.len() != senses.len() || rows.len() != rhs.len() {
            return invalid("lp: row count mismatch between A, senses and b");
        }
        if lower.len() != n || upper.len() != n {
            return invalid("lp: bound vectors do not match the number of variables");
        }
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            return invalid(format!("lp: row {i} has the wrong length"));
        }
        let lp = Self {
            objective,
            rows,
            senses,
            rhs,
            lower,
            upper,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let finite = self.objective.iter().chain(self.rhs.iter()).all(|v| v.is_finite())
            && self.rows.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return invalid("lp: non-finite coefficient");
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return invalid(format!("lp: invalid bounds on variable {j}"));
            }
        }
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY);
    }

    /// Append a row given as sparse `(variable, coefficient)` pairs; repeated
    /// variables accumulate. Returns the row index.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        let mut row = vec![0.0; self.n_vars()];
        for &(j, a) in coeffs {
            row[j] += a;
        }
        self.add_dense_row(row, sense, rhs)
    }

    pub fn add_dense_row(&mut self, row: Vec<f64>, sense: RowSense, rhs: f64) -> usize {
        assert_eq!(row.len(), self.n_vars(), "lp row length");
        self.rows.push(row);
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn senses(&self) -> &[RowSense] {
        &self.senses
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve_lp(self)
    }

    /// Largest row violation of `x`, each row scaled by `max(1, ‖row‖∞)`,
    /// together with bound violations.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for ((row, sense), b) in self.rows.iter().zip(&self.senses).zip(&self.rhs) {
            let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            let scale = row.iter().fold(1.0f64, |m, a| m.max(a.abs()));
            let viol = match sense {
                RowSense::Le => (ax - b).max(0.0),
                RowSense::Ge => (b - ax).max(0.0),
                RowSense::Eq => (ax - b).abs(),
            };
            worst = worst.max(viol / scale);
        }
        for ((v, lo), hi) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// `duals[i]` is the multiplier of row `i` in the Lagrangian
/// `c·x − Σ_i y_i (a_i·x − b_i)`: nonpositive on `≤` rows and nonnegative on
/// `≥` rows at optimality. `dual_objective` is the dual value including the
/// contributions of finite variable bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub dual_objective: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Reduced costs `c − Aᵀy`; on an optimal solution these are the bound
    /// multipliers.
    pub fn reduced_costs(&self, lp: &LinearProgram) -> Vec<f64> {
        let mut d = lp.objective.clone();
        for (row, y) in lp.rows.iter().zip(&self.duals) {
            for (dj, a) in d.iter_mut().zip(row) {
                *dj -= y * a;
            }
        }
        d
    }

    /// Largest complementary-slackness product over rows and bounds.
    pub fn complementarity_residual(&self, lp: &LinearProgram) -> f64 {
        let mut worst: f64 = 0.0;
        for ((row, b), y) in lp.rows.iter().zip(&lp.rhs).zip(&self.duals) {
            let ax: f64 = row.iter().zip(&self.x).map(|(a, v)| a * v).sum();
            worst = worst.max((y * (ax - b)).abs());
        }
        for (j, d) in self.reduced_costs(lp).into_iter().enumerate() {
            let x = self.x[j];
            let gap_lo = if lp.lower[j].is_finite() {
                x - lp.lower[j]
            } else {
                f64::INFINITY
            };
            let gap_hi = if lp.upper[j].is_finite() {
                lp.upper[j] - x
            } else {
                f64::INFINITY
            };
            let slack = gap_lo.min(gap_hi);
            let prod = if slack.is_finite() { (d * slack).abs() } else { d.abs() };
            worst = worst.max(prod);
        }
        worst
    }
}
