//! Two-phase primal simplex on a dense tableau.
//!
//! Entering variables follow Dantzig's most-negative reduced cost rule until
//! `5·(m+n)` consecutive degenerate pivots have been taken, after which
//! Bland's smallest-index rule is used for the rest of the phase. Ties in the
//! ratio test always go to the basic variable with the smallest index, which
//! makes every solve a deterministic function of its input.

use super::{LinearProgram, LpSolution, LpStatus, RowSense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const OPTIMALITY_TOL: f64 = 1e-10;
const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = lower + col`.
    Shift { col: usize, lower: f64 },
    /// `x = upper − col`.
    Mirror { col: usize, upper: f64 },
    /// `x = pos − neg`.
    Split { pos: usize, neg: usize },
}

/// The problem rewritten as `min c·z  s.t.  rows z (sense) rhs,  z ≥ 0, rhs ≥ 0`.
struct StandardForm {
    n_cols: usize,
    rows: Vec<Vec<f64>>,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
    /// `Some(i)` when the row comes from original row `i`, `None` for rows
    /// generated from finite upper bounds.
    origin: Vec<Option<usize>>,
    /// `-1.0` when the row was negated to make its right-hand side nonnegative.
    flip: Vec<f64>,
    cost: Vec<f64>,
    offset: f64,
    maps: Vec<VarMap>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> std::result::Result<Self, LpStatus> {
        let n = lp.n_vars();
        let mut maps = Vec::with_capacity(n);
        let mut n_cols = 0;
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let (lo, hi) = (lp.lower[j], lp.upper[j]);
            if lo > hi {
                return Err(LpStatus::Infeasible);
            }
            let map = if lo.is_finite() {
                if hi.is_finite() {
                    bound_rows.push((n_cols, hi - lo));
                }
                VarMap::Shift { col: n_cols, lower: lo }
            } else if hi.is_finite() {
                VarMap::Mirror { col: n_cols, upper: hi }
            } else {
                n_cols += 1;
                VarMap::Split {
                    pos: n_cols - 1,
                    neg: n_cols,
                }
            };
            n_cols += 1;
            maps.push(map);
        }

        let mut cost = vec![0.0; n_cols];
        let mut offset = 0.0;
        for (j, map) in maps.iter().enumerate() {
            let c = lp.objective[j];
            match *map {
                VarMap::Shift { col, lower } => {
                    cost[col] += c;
                    offset += c * lower;
                }
                VarMap::Mirror { col, upper } => {
                    cost[col] -= c;
                    offset += c * upper;
                }
                VarMap::Split { pos, neg } => {
                    cost[pos] += c;
                    cost[neg] -= c;
                }
            }
        }

        let n_rows = lp.n_rows() + bound_rows.len();
        let mut rows = Vec::with_capacity(n_rows);
        let mut senses = Vec::with_capacity(n_rows);
        let mut rhs = Vec::with_capacity(n_rows);
        let mut origin = Vec::with_capacity(n_rows);
        for (i, row) in lp.rows.iter().enumerate() {
            let mut out = vec![0.0; n_cols];
            let mut b = lp.rhs[i];
            for (j, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                match maps[j] {
                    VarMap::Shift { col, lower } => {
                        out[col] += a;
                        b -= a * lower;
                    }
                    VarMap::Mirror { col, upper } => {
                        out[col] -= a;
                        b -= a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        out[pos] += a;
                        out[neg] -= a;
                    }
                }
            }
            rows.push(out);
            senses.push(lp.senses[i]);
            rhs.push(b);
            origin.push(Some(i));
        }
        for (col, cap) in bound_rows {
            let mut out = vec![0.0; n_cols];
            out[col] = 1.0;
            rows.push(out);
            senses.push(RowSense::Le);
            rhs.push(cap);
            origin.push(None);
        }

        let mut flip = vec![1.0; rows.len()];
        for i in 0..rows.len() {
            // A `≥ 0` row is negated too, so that it starts with a slack basis.
            let negate = rhs[i] < 0.0 || (rhs[i] == 0.0 && senses[i] == RowSense::Ge);
            if negate {
                flip[i] = -1.0;
                rhs[i] = -rhs[i];
                rows[i].iter_mut().for_each(|a| *a = -*a);
                senses[i] = match senses[i] {
                    RowSense::Le => RowSense::Ge,
                    RowSense::Ge => RowSense::Le,
                    RowSense::Eq => RowSense::Eq,
                };
            }
        }

        Ok(Self {
            n_cols,
            rows,
            senses,
            rhs,
            origin,
            flip,
            cost,
            offset,
            maps,
        })
    }
}

struct Tableau {
    m: usize,
    /// Number of columns excluding the right-hand side.
    width: usize,
    /// Row-major `m × (width + 1)`; the last entry of each row is its rhs.
    cells: Vec<f64>,
    /// Reduced costs of the phase-one objective (sum of artificials).
    phase_one: Vec<f64>,
    /// Reduced costs of the true objective.
    phase_two: Vec<f64>,
    basis: Vec<usize>,
    /// Column that held `e_i` in the initial tableau.
    unit_col: Vec<usize>,
    is_artificial: Vec<bool>,
    scratch: Vec<f64>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.rows.len();
        let n_slack = sf.senses.iter().filter(|s| **s != RowSense::Eq).count();
        let n_art = sf.senses.iter().filter(|s| **s != RowSense::Le).count();
        let width = sf.n_cols + n_slack + n_art;
        let stride = width + 1;
        let mut cells = vec![0.0; m * stride];
        let mut is_artificial = vec![false; width];
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let mut next_slack = sf.n_cols;
        let mut next_art = sf.n_cols + n_slack;
        for i in 0..m {
            let row = &mut cells[i * stride..(i + 1) * stride];
            row[..sf.n_cols].copy_from_slice(&sf.rows[i]);
            row[width] = sf.rhs[i];
            match sf.senses[i] {
                RowSense::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                RowSense::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    is_artificial[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
                RowSense::Eq => {
                    row[next_art] = 1.0;
                    is_artificial[next_art] = true;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
            unit_col[i] = basis[i];
        }

        let mut phase_one = vec![0.0; stride];
        for (j, art) in is_artificial.iter().enumerate() {
            if *art {
                phase_one[j] = 1.0;
            }
        }
        for i in 0..m {
            if is_artificial[basis[i]] {
                let row = &cells[i * stride..(i + 1) * stride];
                for (d, a) in phase_one.iter_mut().zip(row) {
                    *d -= a;
                }
            }
        }
        let mut phase_two = vec![0.0; stride];
        phase_two[..sf.n_cols].copy_from_slice(&sf.cost);

        Self {
            m,
            width,
            cells,
            phase_one,
            phase_two,
            basis,
            unit_col,
            is_artificial,
            scratch: vec![0.0; stride],
        }
    }

    fn stride(&self) -> usize {
        self.width + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.stride() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let stride = self.stride();
        let p = self.cells[r * stride + c];
        {
            let row = &mut self.cells[r * stride..(r + 1) * stride];
            row.iter_mut().for_each(|a| *a /= p);
            row[c] = 1.0;
            self.scratch.copy_from_slice(row);
        }
        let pivot_row = &self.scratch;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let row = &mut self.cells[i * stride..(i + 1) * stride];
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (a, b) in row.iter_mut().zip(pivot_row) {
                *a -= f * b;
            }
            row[c] = 0.0;
            let last = row.len() - 1;
            if row[last] < 0.0 && row[last] > -1e-13 {
                row[last] = 0.0;
            }
        }
        for obj in [&mut self.phase_one, &mut self.phase_two] {
            let f = obj[c];
            if f != 0.0 {
                for (a, b) in obj.iter_mut().zip(pivot_row) {
                    *a -= f * b;
                }
                obj[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Run simplex iterations on one objective row. Returns `false` when the
    /// objective is unbounded below.
    fn optimize(&mut self, phase_one: bool, max_iter: usize) -> Result<bool> {
        let degenerate_limit = 5 * (self.m + self.width);
        let mut degenerate_run = 0;
        let mut bland = false;
        for _ in 0..max_iter {
            let costs = if phase_one { &self.phase_one } else { &self.phase_two };
            let allowed = |j: usize| phase_one || !self.is_artificial[j];
            let mut entering = None;
            let mut best = -OPTIMALITY_TOL;
            for j in 0..self.width {
                if !allowed(j) || costs[j] >= best {
                    continue;
                }
                entering = Some(j);
                if bland {
                    break;
                }
                best = costs[j];
            }
            let Some(c) = entering else {
                return Ok(true);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leaving else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
        Err(Error::SolverFailure(format!(
            "simplex did not terminate within {max_iter} pivots"
        )))
    }

    /// Pivot basic artificials at level zero out of the basis where possible.
    fn expel_artificials(&mut self) {
        for i in 0..self.m {
            if !self.is_artificial[self.basis[i]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.width {
                let a = self.at(i, j).abs();
                if self.is_artificial[j] || a <= PIVOT_TOL {
                    continue;
                }
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(i, j);
            }
        }
    }
}

/// Solve `lp` to optimality or report infeasibility / unboundedness.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = match StandardForm::build(lp) {
        Ok(sf) => sf,
        Err(status) => return Ok(not_optimal(status)),
    };
    let mut tab = Tableau::new(&sf);
    let max_iter = 50 * (tab.m + tab.width) + 1000;

    let has_artificials = tab.is_artificial.iter().any(|a| *a);
    if has_artificials {
        tab.optimize(true, max_iter)?;
        let infeasibility = -tab.phase_one[tab.width];
        let scale = sf.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        if infeasibility > FEASIBILITY_TOL * scale {
            return Ok(not_optimal(LpStatus::Infeasible));
        }
        tab.expel_artificials();
    }
    if !tab.optimize(false, max_iter)? {
        return Ok(not_optimal(LpStatus::Unbounded));
    }

    let mut z = vec![0.0; tab.width];
    for i in 0..tab.m {
        z[tab.basis[i]] = tab.rhs(i).max(0.0);
    }
    let x: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, lower } => lower + z[col],
            VarMap::Mirror { col, upper } => upper - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        })
        .collect();
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    let std_duals: Vec<f64> = (0..tab.m).map(|i| -tab.phase_two[tab.unit_col[i]]).collect();
    let dual_objective = sf.offset + std_duals.iter().zip(&sf.rhs).map(|(y, b)| y * b).sum::<f64>();
    let mut duals = vec![0.0; lp.n_rows()];
    for i in 0..tab.m {
        if let Some(orig) = sf.origin[i] {
            duals[orig] = sf.flip[i] * std_duals[i];
        }
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals,
        dual_objective,
    })
}

fn not_optimal(status: LpStatus) -> LpSolution {
    let objective = match status {
        LpStatus::Unbounded => f64::NEG_INFINITY,
        _ => f64::INFINITY,
    };
    LpSolution {
        status,
        x: Vec::new(),
        objective,
        duals: Vec::new(),
        dual_objective: objective,
    }
}
