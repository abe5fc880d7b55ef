use super::{LinearProgram, RowSense};
use crate::error::{invalid, Error, Result};

const ENTRY_TOL: f64 = 1e-12;

/// Payoff matrix of a zero-sum game: rows are the maximizer's actions, columns
/// the minimizer's. Entries lie in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return invalid("matrix game: empty payoff matrix");
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return invalid("matrix game: ragged payoff matrix");
        }
        Self::from_flat(n_rows, n_cols, rows.concat())
    }

    pub fn from_flat(n_rows: usize, n_cols: usize, entries: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return invalid("matrix game: empty payoff matrix");
        }
        if entries.len() != n_rows * n_cols {
            return invalid("matrix game: entry count does not match shape");
        }
        let mut entries = entries;
        for e in entries.iter_mut() {
            if !e.is_finite() || e.abs() > 1.0 + ENTRY_TOL {
                return invalid(format!("matrix game: entry {e} outside [-1, 1]"));
            }
            *e = e.clamp(-1.0, 1.0);
        }
        Ok(Self {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    /// `−Gᵀ`: the same game seen from the minimizer's side.
    pub fn negated_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.n_cols {
            for i in 0..self.n_rows {
                entries.push(-self.get(i, j));
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries,
        }
    }

    /// `xᵀ G y`.
    pub fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                total += xi * self.get(i, j) * yj;
            }
        }
        total
    }

    pub fn value(&self) -> Result<GameSolution> {
        matrix_game_value(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    /// Optimal mixed strategy of the row (maximizing) player.
    pub row_strategy: Vec<f64>,
    /// Optimal mixed strategy of the column (minimizing) player.
    pub col_strategy: Vec<f64>,
}

/// Value and optimal strategies via `max v  s.t.  Σ_i x_i G(i,j) ≥ v ∀j,
/// x ∈ Δ(I)`. The minimizer's strategy is read off the duals of the column
/// constraints.
pub fn matrix_game_value(g: &MatrixGame) -> Result<GameSolution> {
    let (m, n) = g.shape();
    let v = m;
    let mut lp = LinearProgram::new(m + 1);
    lp.set_free(v);
    lp.set_objective(v, -1.0);
    for j in 0..n {
        let mut coeffs: Vec<(usize, f64)> = (0..m).map(|i| (i, g.get(i, j))).collect();
        coeffs.push((v, -1.0));
        lp.add_row(&coeffs, RowSense::Ge, 0.0);
    }
    let simplex_row: Vec<(usize, f64)> = (0..m).map(|i| (i, 1.0)).collect();
    lp.add_row(&simplex_row, RowSense::Eq, 1.0);

    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::SolverFailure(format!(
            "matrix game LP ended with status {:?}",
            sol.status
        )));
    }
    let row_strategy = to_distribution(&sol.x[..m]);
    let col_strategy = to_distribution(&sol.duals[..n]);
    Ok(GameSolution {
        value: sol.x[v],
        row_strategy,
        col_strategy,
    })
}

fn to_distribution(raw: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    clipped.into_iter().map(|v| v / total).collect()
}
