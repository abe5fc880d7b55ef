//! Distances between distributions over beliefs.
//!
//! * [`kr_distance`]: optimal transport with ground cost `‖x − y‖₁`.
//! * [`dstar_distance`]: the belief-space distance `d*`, computed as
//!   `min Σ_{x,y} ‖x α(x,y) − y β(x,y)‖₁` over pairs `(α, β)` whose row sums
//!   are `u` and column sums are `v` respectively.
//! * [`dstar_lower_bound`]: one-sided certificates from non-revealing game
//!   values `p ↦ Val(Σ_k p^k G^k)`.
//! * [`posterior_map`] and [`disintegration_pair`]: the passage between joint
//!   laws on `K × S` and distributions of posteriors, which realizes `d*` as an
//!   L¹ distance between joint laws.

use crate::error::{invalid, Error, Result};
use crate::lp::{matrix_game_value, LinearProgram, MatrixGame, RowSense};
use crate::prob::{l1_raw, BeliefDist, JointDist, SimplexPoint};

/// Feasibility tolerance for marginal constraints of plans and witnesses.
pub const MARGINAL_TOL: f64 = 1e-9;

fn check_same_dim(u: &BeliefDist, v: &BeliefDist) -> Result<()> {
    if u.dim() != v.dim() {
        return invalid(format!(
            "distributions over simplices of different dimension ({} vs {})",
            u.dim(),
            v.dim()
        ));
    }
    Ok(())
}

/// Coupling `γ(x, y)` indexed by support positions of `u` and `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan {
    pub coupling: Vec<Vec<f64>>,
}

impl TransportPlan {
    /// Largest deviation of the row/column sums from `u` and `v`.
    pub fn marginal_residual(&self, u: &BeliefDist, v: &BeliefDist) -> f64 {
        marginal_residual(&self.coupling, &self.coupling, u, v)
    }

    pub fn cost(&self, u: &BeliefDist, v: &BeliefDist) -> f64 {
        let mut total = 0.0;
        for (x, row) in u.points().iter().zip(&self.coupling) {
            for (y, g) in v.points().iter().zip(row) {
                total += g * l1_raw(x.coords(), y.coords());
            }
        }
        total
    }
}

fn marginal_residual(alpha: &[Vec<f64>], beta: &[Vec<f64>], u: &BeliefDist, v: &BeliefDist) -> f64 {
    let mut worst: f64 = 0.0;
    for (row, ux) in alpha.iter().zip(u.weights()) {
        worst = worst.max((row.iter().sum::<f64>() - ux).abs());
    }
    for (y, vy) in v.weights().iter().enumerate() {
        let col: f64 = beta.iter().map(|row| row[y]).sum();
        worst = worst.max((col - vy).abs());
    }
    worst
}

/// A feasible pair `(α, β)` for the `d*` program: `Σ_y α(x,y) = u(x)` and
/// `Σ_x β(x,y) = v(y)`, both nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityWitness {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl DualityWitness {
    /// Check shapes, signs and marginals against `u` and `v`.
    pub fn new(u: &BeliefDist, v: &BeliefDist, alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let w = Self { alpha, beta };
        w.validate(u, v)?;
        Ok(w)
    }

    /// The coupling witness `α = β = γ`.
    pub fn from_plan(plan: &TransportPlan) -> Self {
        Self {
            alpha: plan.coupling.clone(),
            beta: plan.coupling.clone(),
        }
    }

    pub fn validate(&self, u: &BeliefDist, v: &BeliefDist) -> Result<()> {
        check_same_dim(u, v)?;
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == u.len() && m.iter().all(|r| r.len() == v.len());
        if !shape_ok(&self.alpha) || !shape_ok(&self.beta) {
            return invalid("witness: shape does not match the supports of u and v");
        }
        if self
            .alpha
            .iter()
            .chain(&self.beta)
            .flatten()
            .any(|a| !a.is_finite() || *a < -MARGINAL_TOL)
        {
            return invalid("witness: negative or non-finite entry");
        }
        let residual = self.marginal_residual(u, v);
        if residual > MARGINAL_TOL {
            return invalid(format!(
                "witness: marginal residual {residual:e} exceeds {MARGINAL_TOL:e}"
            ));
        }
        Ok(())
    }

    pub fn marginal_residual(&self, u: &BeliefDist, v: &BeliefDist) -> f64 {
        marginal_residual(&self.alpha, &self.beta, u, v)
    }

    /// `Σ_{x,y} ‖x α(x,y) − y β(x,y)‖₁`.
    pub fn objective(&self, u: &BeliefDist, v: &BeliefDist) -> f64 {
        let mut total = 0.0;
        for (xi, x) in u.points().iter().enumerate() {
            for (yi, y) in v.points().iter().enumerate() {
                let (a, b) = (self.alpha[xi][yi], self.beta[xi][yi]);
                total += x
                    .coords()
                    .iter()
                    .zip(y.coords())
                    .map(|(xk, yk)| (xk * a - yk * b).abs())
                    .sum::<f64>();
            }
        }
        total
    }
}

/// Kantorovich–Rubinstein distance with ground cost `‖·‖₁` on `Δ(K)`.
pub fn kr_distance(u: &BeliefDist, v: &BeliefDist) -> Result<(f64, TransportPlan)> {
    check_same_dim(u, v)?;
    let (nu, nv) = (u.len(), v.len());
    let mut lp = LinearProgram::new(nu * nv);
    for (xi, x) in u.points().iter().enumerate() {
        for (yi, y) in v.points().iter().enumerate() {
            lp.set_objective(xi * nv + yi, l1_raw(x.coords(), y.coords()));
        }
    }
    for (xi, ux) in u.weights().iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..nv).map(|yi| (xi * nv + yi, 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, *ux);
    }
    for (yi, vy) in v.weights().iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..nu).map(|xi| (xi * nv + yi, 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, *vy);
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::SolverFailure(format!("transport LP: {:?}", sol.status)));
    }
    let coupling = (0..nu)
        .map(|xi| (0..nv).map(|yi| sol.x[xi * nv + yi].max(0.0)).collect())
        .collect();
    Ok((sol.objective.max(0.0), TransportPlan { coupling }))
}

/// The belief-space distance `d*(u, v)` and an optimal witness.
///
/// The absolute values are linearized with one auxiliary variable
/// `t(x,y,k) ≥ |x^k α(x,y) − y^k β(x,y)|` per coordinate.
pub fn dstar_distance(u: &BeliefDist, v: &BeliefDist) -> Result<(f64, DualityWitness)> {
    check_same_dim(u, v)?;
    let (nu, nv, dim) = (u.len(), v.len(), u.dim());
    let pairs = nu * nv;
    let alpha = |xi: usize, yi: usize| xi * nv + yi;
    let beta = |xi: usize, yi: usize| pairs + xi * nv + yi;
    let aux = |xi: usize, yi: usize, k: usize| 2 * pairs + (xi * nv + yi) * dim + k;

    let mut lp = LinearProgram::new(2 * pairs + pairs * dim);
    for (xi, x) in u.points().iter().enumerate() {
        for (yi, y) in v.points().iter().enumerate() {
            for k in 0..dim {
                let t = aux(xi, yi, k);
                lp.set_objective(t, 1.0);
                let (xk, yk) = (x[k], y[k]);
                if xk == 0.0 && yk == 0.0 {
                    continue;
                }
                let (a, b) = (alpha(xi, yi), beta(xi, yi));
                lp.add_row(&[(a, xk), (b, -yk), (t, -1.0)], RowSense::Le, 0.0);
                lp.add_row(&[(a, -xk), (b, yk), (t, -1.0)], RowSense::Le, 0.0);
            }
        }
    }
    for (xi, ux) in u.weights().iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..nv).map(|yi| (alpha(xi, yi), 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, *ux);
    }
    for (yi, vy) in v.weights().iter().enumerate() {
        let row: Vec<(usize, f64)> = (0..nu).map(|xi| (beta(xi, yi), 1.0)).collect();
        lp.add_row(&row, RowSense::Eq, *vy);
    }
    let sol = lp.solve()?;
    if !sol.is_optimal() {
        return Err(Error::SolverFailure(format!("d* LP: {:?}", sol.status)));
    }
    let grab = |f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<f64>> {
        (0..nu)
            .map(|xi| (0..nv).map(|yi| sol.x[f(xi, yi)].max(0.0)).collect())
            .collect()
    };
    let witness = DualityWitness {
        alpha: grab(&alpha),
        beta: grab(&beta),
    };
    Ok((sol.objective.clamp(0.0, 2.0), witness))
}

/// One payoff matrix per state, all of the same shape; induces the
/// non-revealing function `f(p) = Val(Σ_k p^k G^k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFamily {
    games: Vec<MatrixGame>,
}

impl MatrixFamily {
    pub fn new(games: Vec<MatrixGame>) -> Result<Self> {
        let Some(shape) = games.first().map(MatrixGame::shape) else {
            return invalid("matrix family: no matrices");
        };
        if let Some(k) = games.iter().position(|g| g.shape() != shape) {
            return invalid(format!("matrix family: matrix {k} has a different shape"));
        }
        Ok(Self { games })
    }

    pub fn dim(&self) -> usize {
        self.games.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.games[0].shape()
    }

    pub fn games(&self) -> &[MatrixGame] {
        &self.games
    }

    /// `Σ_k p^k G^k`.
    pub fn average(&self, p: &SimplexPoint) -> Result<MatrixGame> {
        if p.dim() != self.dim() {
            return invalid("matrix family: belief dimension mismatch");
        }
        let (m, n) = self.shape();
        let mut entries = vec![0.0; m * n];
        for (g, pk) in self.games.iter().zip(p.coords()) {
            for (e, gk) in entries.iter_mut().zip(g.entries()) {
                *e += pk * gk;
            }
        }
        MatrixGame::from_flat(m, n, entries)
    }

    /// The non-revealing value `Val(Σ_k p^k G^k)`.
    pub fn value_at(&self, p: &SimplexPoint) -> Result<f64> {
        Ok(matrix_game_value(&self.average(p)?)?.value)
    }

    /// `u(f) − v(f)` for the non-revealing function of this family.
    pub fn separation(&self, u: &BeliefDist, v: &BeliefDist) -> Result<f64> {
        let eu = self.expectation(u)?;
        let ev = self.expectation(v)?;
        Ok(eu - ev)
    }

    fn expectation(&self, u: &BeliefDist) -> Result<f64> {
        let mut total = 0.0;
        for (p, w) in u.atoms() {
            total += w * self.value_at(p)?;
        }
        Ok(total)
    }
}

/// `max_f |u(f) − v(f)|` over the non-revealing functions of `families`;
/// zero when no family is supplied.
pub fn dstar_lower_bound(u: &BeliefDist, v: &BeliefDist, families: &[MatrixFamily]) -> Result<f64> {
    check_same_dim(u, v)?;
    let mut best: f64 = 0.0;
    for (i, fam) in families.iter().enumerate() {
        if fam.dim() != u.dim() {
            return invalid(format!(
                "matrix family {i}: has {} matrices, beliefs have dimension {}",
                fam.dim(),
                u.dim()
            ));
        }
        best = best.max(fam.separation(u, v)?.abs());
    }
    Ok(best)
}

/// `ψ_S(π) = Σ_s π(s) δ_{π(·|s)}`; signals of probability zero produce no atom.
pub fn posterior_map(pi: &JointDist) -> BeliefDist {
    let marginal = pi.signal_marginal();
    let atoms: Vec<(SimplexPoint, f64)> = marginal
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(s, m)| {
            let column: Vec<f64> = (0..pi.n_states()).map(|k| pi.get(k, s)).collect();
            let posterior = SimplexPoint::from_weights(column).expect("signal with positive mass");
            (posterior, *m)
        })
        .collect();
    BeliefDist::from_masses(atoms).expect("a joint law has positive mass")
}

/// The pair of joint laws on `K × (U × V)` built from a witness:
/// `π(k,(x,y)) = x^k α(x,y)` and `π′(k,(x,y)) = y^k β(x,y)`.
///
/// `posterior_map` sends them back to `u` and `v`, and their L¹ distance is
/// exactly the witness objective.
pub fn disintegration_pair(u: &BeliefDist, v: &BeliefDist, w: &DualityWitness) -> Result<(JointDist, JointDist)> {
    w.validate(u, v)?;
    let (nu, nv, dim) = (u.len(), v.len(), u.dim());
    let signals = nu * nv;
    let mut pi = vec![0.0; dim * signals];
    let mut pi_prime = vec![0.0; dim * signals];
    for (xi, x) in u.points().iter().enumerate() {
        for (yi, y) in v.points().iter().enumerate() {
            let s = xi * nv + yi;
            for k in 0..dim {
                pi[k * signals + s] = x[k] * w.alpha[xi][yi].max(0.0);
                pi_prime[k * signals + s] = y[k] * w.beta[xi][yi].max(0.0);
            }
        }
    }
    Ok((
        JointDist::from_flat_masses(dim, signals, pi)?,
        JointDist::from_flat_masses(dim, signals, pi_prime)?,
    ))
}
