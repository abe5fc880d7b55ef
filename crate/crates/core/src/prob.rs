//! Value types for beliefs, distributions over beliefs and payoff evaluations.
//!
//! Every constructor validates and normalizes its input so that downstream
//! code can rely on exact simplex membership. Normalization is idempotent:
//! feeding the coordinates of a constructed value back into its constructor
//! returns a bit-identical value.

use crate::error::{invalid, Result};

/// Tolerance used when validating and normalizing constructor inputs.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Tolerance for numeric comparisons performed by downstream modules.
pub const COMPARE_TOL: f64 = 1e-9;

/// Mass defect accepted on input before a vector is rejected as not being a
/// probability vector.
const INPUT_MASS_TOL: f64 = 1e-9;

/// Clamp entries within `-CONSTRUCTION_TOL` of zero and return the total mass.
fn clamp_nonnegative(values: &mut [f64], what: &str) -> Result<f64> {
    let mut total = 0.0;
    for (i, v) in values.iter_mut().enumerate() {
        if !v.is_finite() {
            return invalid(format!("{what}: entry {i} is not finite"));
        }
        if *v < 0.0 {
            if *v < -CONSTRUCTION_TOL {
                return invalid(format!("{what}: entry {i} is negative ({v})"));
            }
            *v = 0.0;
        }
        total += *v;
    }
    Ok(total)
}

/// Divide by the total unless the vector already sums to one up to rounding.
fn normalize_in_place(values: &mut [f64], total: f64) {
    let slack = 4.0 * values.len().max(1) as f64 * f64::EPSILON;
    if (total - 1.0).abs() > slack {
        for v in values.iter_mut() {
            *v /= total;
        }
    }
}

/// A probability vector over a finite index set `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Build from coordinates that already form a probability vector (up to
    /// `1e-9` of total mass).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let mut coords = coords;
        if coords.is_empty() {
            return invalid("simplex point: empty coordinate vector");
        }
        let total = clamp_nonnegative(&mut coords, "simplex point")?;
        if (total - 1.0).abs() > INPUT_MASS_TOL {
            return invalid(format!("simplex point: coordinates sum to {total}, not 1"));
        }
        normalize_in_place(&mut coords, total);
        Ok(Self { coords })
    }

    /// Build from any nonnegative vector with positive mass by normalizing it.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let mut coords = weights;
        if coords.is_empty() {
            return invalid("simplex point: empty coordinate vector");
        }
        let total = clamp_nonnegative(&mut coords, "simplex point")?;
        if total <= 0.0 {
            return invalid("simplex point: zero total mass");
        }
        normalize_in_place(&mut coords, total);
        Ok(Self { coords })
    }

    /// The canonical vertex `e_k` of `Δ(K)` with `|K| = dim`.
    pub fn vertex(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return invalid(format!("vertex {k} out of range for dimension {dim}"));
        }
        let mut coords = vec![0.0; dim];
        coords[k] = 1.0;
        Ok(Self { coords })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("simplex point: empty coordinate vector");
        }
        Self::from_weights(vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn l1_distance(&self, other: &SimplexPoint) -> Result<f64> {
        l1_distance(self, other)
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.coords[k]
    }
}

/// `Σ_k |p^k − q^k|`, the ground metric on `Δ(K)`.
pub fn l1_distance(p: &SimplexPoint, q: &SimplexPoint) -> Result<f64> {
    if p.dim() != q.dim() {
        return invalid(format!(
            "l1 distance between points of dimension {} and {}",
            p.dim(),
            q.dim()
        ));
    }
    Ok(l1_raw(p.coords(), q.coords()))
}

pub(crate) fn l1_raw(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// A finitely supported probability over `Δ(K)`.
///
/// Atoms closer than [`CONSTRUCTION_TOL`] in L¹ are merged (the first
/// occurrence keeps its coordinates) and zero-weight atoms are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefDist {
    dim: usize,
    points: Vec<SimplexPoint>,
    weights: Vec<f64>,
}

impl BeliefDist {
    /// Build from atoms whose weights sum to one (up to `1e-9`).
    pub fn new(atoms: Vec<(SimplexPoint, f64)>) -> Result<Self> {
        Self::build(atoms, false)
    }

    /// Build from atoms with arbitrary positive total mass, normalizing it.
    pub fn from_masses(atoms: Vec<(SimplexPoint, f64)>) -> Result<Self> {
        Self::build(atoms, true)
    }

    pub fn dirac(point: SimplexPoint) -> Self {
        Self {
            dim: point.dim(),
            points: vec![point],
            weights: vec![1.0],
        }
    }

    fn build(atoms: Vec<(SimplexPoint, f64)>, rescale: bool) -> Result<Self> {
        let Some(dim) = atoms.first().map(|(p, _)| p.dim()) else {
            return invalid("belief distribution: no atoms");
        };
        let mut points: Vec<SimplexPoint> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (i, (point, w)) in atoms.into_iter().enumerate() {
            if point.dim() != dim {
                return invalid(format!(
                    "belief distribution: atom {i} has dimension {}, expected {dim}",
                    point.dim()
                ));
            }
            if !w.is_finite() || w < -CONSTRUCTION_TOL {
                return invalid(format!("belief distribution: atom {i} has weight {w}"));
            }
            if w <= 0.0 {
                continue;
            }
            match points
                .iter()
                .position(|q| l1_raw(q.coords(), point.coords()) <= CONSTRUCTION_TOL)
            {
                Some(j) => weights[j] += w,
                None => {
                    points.push(point);
                    weights.push(w);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return invalid("belief distribution: zero total mass");
        }
        if !rescale && (total - 1.0).abs() > INPUT_MASS_TOL {
            return invalid(format!("belief distribution: weights sum to {total}, not 1"));
        }
        normalize_in_place(&mut weights, total);
        Ok(Self { dim, points, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&SimplexPoint, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    /// `Σ_x u(x) f(x)`.
    pub fn expect(&self, mut f: impl FnMut(&SimplexPoint) -> f64) -> f64 {
        self.atoms().map(|(p, w)| w * f(p)).sum()
    }

    /// The barycenter `Σ_x u(x) x`, i.e. the law of the state once the
    /// second-order information is forgotten.
    pub fn mean(&self) -> SimplexPoint {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.atoms() {
            for (mk, pk) in m.iter_mut().zip(p.coords()) {
                *mk += w * pk;
            }
        }
        SimplexPoint::from_weights(m).expect("mean of simplex points is a simplex point")
    }

    /// Order-insensitive comparison: every atom must be matched by an atom of
    /// `other` within `point_tol` in L¹ and `weight_tol` in weight.
    pub fn approx_eq(&self, other: &BeliefDist, point_tol: f64, weight_tol: f64) -> bool {
        if self.dim != other.dim || self.len() != other.len() {
            return false;
        }
        let mut used = vec![false; other.len()];
        for (p, w) in self.atoms() {
            let found = other.atoms().enumerate().position(|(j, (q, v))| {
                !used[j] && l1_raw(p.coords(), q.coords()) <= point_tol && (w - v).abs() <= weight_tol
            });
            match found {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }
}

/// A probability over stages `t = 1..=T`, weighting the payoff stream.
///
/// Trailing zero weights are trimmed so that `horizon()` is the last stage
/// with positive weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    weights: Vec<f64>,
}

impl Evaluation {
    /// `weights[t - 1]` is the weight of stage `t`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut weights = weights;
        let total = clamp_nonnegative(&mut weights, "evaluation")?;
        if (total - 1.0).abs() > INPUT_MASS_TOL {
            return invalid(format!("evaluation: weights sum to {total}, not 1"));
        }
        Self::finish(weights, total)
    }

    /// Normalize arbitrary nonnegative stage weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let mut weights = weights;
        let total = clamp_nonnegative(&mut weights, "evaluation")?;
        if total <= 0.0 {
            return invalid("evaluation: zero total mass");
        }
        Self::finish(weights, total)
    }

    fn finish(mut weights: Vec<f64>, total: f64) -> Result<Self> {
        while weights.last() == Some(&0.0) {
            weights.pop();
        }
        if weights.is_empty() {
            return invalid("evaluation: zero total mass");
        }
        normalize_in_place(&mut weights, total);
        Ok(Self { weights })
    }

    /// Average of the first `n` stages.
    pub fn cesaro(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("cesaro evaluation needs n >= 1");
        }
        Self::from_weights(vec![1.0; n])
    }

    /// Uniform weight `1/len` on stages `first..first + len`.
    pub fn window(first: usize, len: usize) -> Result<Self> {
        if first == 0 || len == 0 {
            return invalid("window evaluation needs first >= 1 and len >= 1");
        }
        let mut w = vec![0.0; first - 1 + len];
        w[first - 1..].iter_mut().for_each(|x| *x = 1.0);
        Self::from_weights(w)
    }

    /// Geometric weights `λ(1−λ)^{t−1}` truncated at the first horizon `T`
    /// with `(1−λ)^T < tail_tol`, then renormalized.
    pub fn discounted(lambda: f64, tail_tol: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return invalid(format!("discount factor {lambda} not in (0, 1]"));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
            return invalid(format!("tail tolerance {tail_tol} not in (0, 1e-6]"));
        }
        let horizon = discounted_horizon(lambda, tail_tol);
        let keep = 1.0 - lambda;
        let mut weights = Vec::with_capacity(horizon);
        let mut w = lambda;
        for _ in 0..horizon {
            weights.push(w);
            w *= keep;
        }
        Self::from_weights(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of stage `t` (1-based); zero beyond the horizon.
    pub fn weight(&self, t: usize) -> f64 {
        if t == 0 {
            return 0.0;
        }
        self.weights.get(t - 1).copied().unwrap_or(0.0)
    }

    pub fn horizon(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_{t≥1} |θ_{t+1} − θ_t|` with `θ_{T+1} = 0`.
    pub fn impatience(&self) -> f64 {
        impatience_of(&self.weights)
    }

    /// The shifted evaluation `(θ_{t+1} / (1 − θ_1))_t`; requires `θ_1 < 1`.
    pub fn shift(&self) -> Result<Self> {
        let first = self.weights[0];
        if first >= 1.0 || self.weights.len() < 2 {
            return invalid("shift needs an evaluation with theta_1 < 1");
        }
        let rest: Vec<f64> = self.weights[1..].iter().map(|w| w / (1.0 - first)).collect();
        Self::from_weights(rest)
    }
}

/// Impatience of a raw weight sequence indexed from its first entry.
pub(crate) fn impatience_of(weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for (t, w) in weights.iter().enumerate() {
        let next = weights.get(t + 1).copied().unwrap_or(0.0);
        total += (next - w).abs();
    }
    total
}

/// Smallest `T` with `(1−λ)^T < tail_tol`.
pub fn discounted_horizon(lambda: f64, tail_tol: f64) -> usize {
    if lambda >= 1.0 {
        return 1;
    }
    let keep = 1.0 - lambda;
    let mut t = (tail_tol.ln() / keep.ln()).ceil().max(1.0) as usize;
    while t > 1 && keep.powi((t - 1) as i32) < tail_tol {
        t -= 1;
    }
    while keep.powi(t as i32) >= tail_tol {
        t += 1;
    }
    t
}

/// A joint law `π(k, s)` over a finite `K × S`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    n_states: usize,
    n_signals: usize,
    /// Row-major: `table[k * n_signals + s]`.
    table: Vec<f64>,
}

impl JointDist {
    /// `rows[k][s] = π(k, s)`; entries must sum to one (up to `1e-9`).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        let n_signals = rows.first().map_or(0, Vec::len);
        if n_states == 0 || n_signals == 0 {
            return invalid("joint distribution: empty table");
        }
        if rows.iter().any(|r| r.len() != n_signals) {
            return invalid("joint distribution: ragged table");
        }
        Self::from_flat(n_states, n_signals, rows.concat())
    }

    pub fn from_flat(n_states: usize, n_signals: usize, table: Vec<f64>) -> Result<Self> {
        Self::build(n_states, n_signals, table, false)
    }

    /// Like [`JointDist::from_flat`] but rescales any positive total mass.
    pub fn from_flat_masses(n_states: usize, n_signals: usize, table: Vec<f64>) -> Result<Self> {
        Self::build(n_states, n_signals, table, true)
    }

    fn build(n_states: usize, n_signals: usize, table: Vec<f64>, rescale: bool) -> Result<Self> {
        if n_states == 0 || n_signals == 0 || table.len() != n_states * n_signals {
            return invalid("joint distribution: table shape mismatch");
        }
        let mut table = table;
        let total = clamp_nonnegative(&mut table, "joint distribution")?;
        if total <= 0.0 || (!rescale && (total - 1.0).abs() > INPUT_MASS_TOL) {
            return invalid(format!("joint distribution: entries sum to {total}, not 1"));
        }
        normalize_in_place(&mut table, total);
        Ok(Self {
            n_states,
            n_signals,
            table,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    pub fn get(&self, k: usize, s: usize) -> f64 {
        self.table[k * self.n_signals + s]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `π(s) = Σ_k π(k, s)`.
    pub fn signal_marginal(&self) -> Vec<f64> {
        (0..self.n_signals)
            .map(|s| (0..self.n_states).map(|k| self.get(k, s)).sum())
            .collect()
    }

    pub fn state_marginal(&self) -> Vec<f64> {
        (0..self.n_states)
            .map(|k| (0..self.n_signals).map(|s| self.get(k, s)).sum())
            .collect()
    }

    pub fn l1_distance(&self, other: &JointDist) -> Result<f64> {
        if self.n_states != other.n_states || self.n_signals != other.n_signals {
            return invalid("joint distributions over different K x S");
        }
        Ok(l1_raw(&self.table, &other.table))
    }
}
