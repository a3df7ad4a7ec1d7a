//! Generalized gradient projection over the polytope
//! `{theta >= 0, sum(theta) <= 1}`.
//!
//! Each iteration projects the `W`-scaled gradient, `W = -H + delta I`, onto
//! the null space of the active constraints, takes the largest feasible
//! multiple along it, halves that step until the objective does not
//! decrease (capping the taken step at 0.5), and then adds any constraint
//! the new point touches. When the projected direction is shorter than
//! `epsilon` the Lagrange multipliers of the active constraints are checked:
//! all nonnegative certifies a KKT point, otherwise the most negative one is
//! released.
//!
//! Constraint indices `0..D` are `-theta_i <= 0`; index `D` is
//! `sum(theta) <= 1`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, Error, Result};
use crate::model::{check_feasible, AffineLogLik, Dataset, SieveSpec, Theta};

/// Maximum number of step halvings before a line search gives up.
pub const MAX_HALVINGS: u32 = 60;

/// Largest step multiplier the line search will take.
pub const STEP_CAP: f64 = 0.5;

/// A smooth concave objective to be maximized.
pub trait Objective {
    fn dim(&self) -> usize;
    fn value(&self, theta: &[f64]) -> Result<f64>;
    fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>>;
    fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>>;

    /// An observation that cannot have positive probability anywhere on
    /// the feasible set, if any.
    fn degenerate_row(&self) -> Option<usize> {
        None
    }
}

impl Objective for AffineLogLik {
    fn dim(&self) -> usize {
        AffineLogLik::dim(self)
    }

    fn value(&self, theta: &[f64]) -> Result<f64> {
        AffineLogLik::value(self, theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>> {
        AffineLogLik::gradient(self, theta)
    }

    fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        AffineLogLik::hessian(self, theta)
    }

    fn degenerate_row(&self) -> Option<usize> {
        AffineLogLik::degenerate_row(self)
    }
}

/// Ordered list of active constraint indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    dim: usize,
    indices: Vec<usize>,
}

impl ActiveSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the sum constraint.
    pub fn sum_index(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    /// Adds a constraint unless it is already present or would make the
    /// rows linearly dependent. Returns whether it was added.
    pub fn insert(&mut self, index: usize) -> bool {
        assert!(index <= self.dim, "constraint {index} out of range");
        if self.contains(index) {
            return false;
        }
        let coords = self.indices.iter().filter(|&&i| i < self.dim).count();
        let has_sum = self.contains(self.dim);
        // the only dependent configuration: every coordinate plus the sum
        let dependent = if index == self.dim {
            coords == self.dim
        } else {
            has_sum && coords + 1 == self.dim
        };
        if dependent {
            return false;
        }
        self.indices.push(index);
        true
    }

    /// Removes the constraint at `position` in the ordered list.
    pub fn remove_at(&mut self, position: usize) -> usize {
        self.indices.remove(position)
    }

    /// The `|active| x D` matrix of active constraint rows.
    pub fn rows(&self) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.indices.len(), self.dim);
        for (r, &idx) in self.indices.iter().enumerate() {
            if idx == self.dim {
                x.row_mut(r).fill(1.0);
            } else {
                x[(r, idx)] = -1.0;
            }
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Stop tolerance on the Euclidean norm of the projected direction.
    pub epsilon: f64,
    /// Ridge added to `-H`; `None` uses `1e-6 * mean(diag(-H))`, floored at
    /// `1e-10`.
    pub delta: Option<f64>,
    pub max_iter: usize,
    pub active_tol: f64,
    /// Starting point; defaults to every coordinate equal to `0.9 / D`.
    pub theta0: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            delta: None,
            max_iter: 500,
            active_tol: 1e-10,
            theta0: None,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.active_tol > 0.0) || self.delta.is_some_and(|d| !(d > 0.0)) {
            return Err(invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub loglik: f64,
    pub d_norm: f64,
    pub active: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub loglik: f64,
    pub active: ActiveSet,
    /// Multipliers aligned with `active.indices()` from the last KKT check.
    pub multipliers: Vec<f64>,
    /// Norm of the last projected direction.
    pub d_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The line search failed to find a nondecreasing step.
    pub stalled: bool,
    pub trace: Vec<TraceEntry>,
}

impl FitResult {
    /// `||d|| < epsilon` and every multiplier nonnegative.
    pub fn kkt_certified(&self, epsilon: f64) -> bool {
        self.d_norm < epsilon && self.multipliers.iter().all(|&l| l >= 0.0)
    }
}

/// Ridge for `W = -H + delta I`.
pub fn default_ridge(hess: &DMatrix<f64>) -> f64 {
    let d = hess.nrows().max(1) as f64;
    let mean = -hess.diagonal().sum() / d;
    (1e-6 * mean).max(1e-10)
}

/// Projected direction and the active-constraint multipliers at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub d: DVector<f64>,
    /// `(X W^-1 X^T)^-1 X W^-1 grad`, aligned with the active list.
    pub multipliers: DVector<f64>,
}

fn factor_w(hess: &DMatrix<f64>, delta: f64) -> Option<Cholesky<f64, Dyn>> {
    let mut w = -hess;
    for i in 0..w.nrows() {
        w[(i, i)] += delta;
    }
    Cholesky::new(w)
}

/// `d = {I - W^-1 X^T (X W^-1 X^T)^-1 X} W^-1 grad` together with the
/// multipliers `(X W^-1 X^T)^-1 X W^-1 grad`.
///
/// The direction is computed on the free coordinates only (active
/// coordinates are exactly zero, and the sum row, if active, is projected
/// out within the free block). This is the same projection, but keeps
/// `X d = 0` exact even when `W` is badly conditioned.
pub fn search_direction(
    grad: &DVector<f64>,
    hess: &DMatrix<f64>,
    active: &ActiveSet,
    delta: f64,
) -> Result<Direction> {
    let singular = || Error::SingularActiveSet {
        active: active.indices().to_vec(),
    };
    let dim = grad.len();
    let w = factor_w(hess, delta).ok_or_else(singular)?;
    let multipliers = if active.is_empty() {
        DVector::zeros(0)
    } else {
        let x = active.rows();
        let v = w.solve(&x.transpose());
        let reduced = &x * &v;
        Cholesky::new(reduced).ok_or_else(singular)?.solve(&(&x * w.solve(grad)))
    };

    let free: Vec<usize> = (0..dim).filter(|&i| !active.contains(i)).collect();
    let mut d = DVector::zeros(dim);
    if free.is_empty() {
        return Ok(Direction { d, multipliers });
    }
    let grad_f = grad.select_rows(&free);
    let w_ff = hess.select_rows(&free).select_columns(&free);
    let chol = factor_w(&w_ff, delta).ok_or_else(singular)?;
    let mut d_free = chol.solve(&grad_f);
    if active.contains(active.sum_index()) {
        let v = chol.solve(&DVector::from_element(free.len(), 1.0));
        let denom = v.sum();
        if !(denom > 0.0) {
            return Err(singular());
        }
        d_free -= v * (d_free.sum() / denom);
    }
    for (k, &i) in free.iter().enumerate() {
        d[i] = d_free[k];
    }
    Ok(Direction { d, multipliers })
}

/// Largest `gamma` keeping `theta + gamma d` feasible; infinite when no
/// constraint limits the ray.
pub fn max_step(theta: &[f64], d: &[f64]) -> f64 {
    max_step_inactive(theta, d, None)
}

/// [`max_step`] over the constraints not in `active` only; active ones are
/// held by `d` and rounding noise in their rows is ignored.
pub fn max_step_inactive(theta: &[f64], d: &[f64], active: Option<&ActiveSet>) -> f64 {
    let is_active = |i: usize| active.is_some_and(|a| a.contains(i));
    let coord = theta
        .iter()
        .zip(d)
        .enumerate()
        .filter(|&(i, (_, &di))| di < 0.0 && !is_active(i))
        .map(|(_, (&t, &di))| -t / di)
        .fold(f64::INFINITY, f64::min);
    let d_sum: f64 = d.iter().sum();
    if d_sum > 0.0 && !is_active(theta.len()) {
        let slack = (1.0 - theta.iter().sum::<f64>()).max(0.0);
        coord.min(slack / d_sum)
    } else {
        coord
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub theta: Vec<f64>,
    pub value: f64,
    /// Multiplier actually applied to `d`.
    pub step: f64,
    pub halvings: u32,
}

/// Step-halving search: the smallest `k` with
/// `f(theta + 2^-k gamma d) >= f(theta)` gives the new point
/// `theta + min(2^-k gamma, 0.5) d`.
///
/// `eval` returns `None` where the objective is undefined; that counts as
/// a failed trial. Returns `None` after [`MAX_HALVINGS`] failures.
pub fn line_search<E>(theta: &[f64], d: &[f64], gamma: f64, f0: f64, eval: E) -> Option<StepOutcome>
where
    E: Fn(&[f64]) -> Option<f64>,
{
    // an unbounded ray is capped before trials begin
    let gamma = if gamma.is_finite() { gamma } else { STEP_CAP };
    let mut trial = vec![0.0; theta.len()];
    for k in 0..=MAX_HALVINGS {
        let t = gamma * 0.5_f64.powi(k as i32);
        fill_step(&mut trial, theta, d, t);
        // a step too small to move any coordinate is not progress
        if trial == theta || !eval(&trial).is_some_and(|v| v >= f0) {
            continue;
        }
        let step = t.min(STEP_CAP);
        if step < t {
            fill_step(&mut trial, theta, d, step);
        }
        if trial == theta {
            continue;
        }
        match eval(&trial) {
            Some(value) if value >= f0 => {
                return Some(StepOutcome {
                    theta: trial,
                    value,
                    step,
                    halvings: k,
                })
            }
            _ => continue,
        }
    }
    None
}

fn fill_step(out: &mut [f64], theta: &[f64], d: &[f64], t: f64) {
    for ((o, &x), &di) in out.iter_mut().zip(theta).zip(d) {
        *o = (x + t * di).max(0.0);
    }
    let total: f64 = out.iter().sum();
    if total > 1.0 {
        out.iter_mut().for_each(|o| *o /= total);
    }
}

/// Add every coordinate at or below `tol` and the sum constraint when the
/// total is within `tol` of one.
pub fn update_active(theta: &[f64], active: &mut ActiveSet, tol: f64) {
    for (i, &x) in theta.iter().enumerate() {
        if x <= tol {
            active.insert(i);
        }
    }
    if theta.iter().sum::<f64>() >= 1.0 - tol {
        active.insert(active.sum_index());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KktDecision {
    Converged,
    /// Drop the constraint at this position of the active list.
    Release { position: usize, index: usize },
}

/// Multipliers of the active constraints and whether they certify a KKT
/// point. Ties for the most negative multiplier go to the earliest position.
pub fn kkt_multipliers(
    grad: &DVector<f64>,
    hess: &DMatrix<f64>,
    active: &ActiveSet,
    delta: f64,
) -> Result<(Vec<f64>, KktDecision)> {
    let dir = search_direction(grad, hess, active, delta)?;
    let lambda: Vec<f64> = dir.multipliers.iter().copied().collect();
    Ok((lambda.clone(), decide(&lambda, active)))
}

fn decide(lambda: &[f64], active: &ActiveSet) -> KktDecision {
    let mut worst: Option<(usize, f64)> = None;
    for (pos, &l) in lambda.iter().enumerate() {
        if l < 0.0 && worst.is_none_or(|(_, w)| l < w) {
            worst = Some((pos, l));
        }
    }
    match worst {
        None => KktDecision::Converged,
        Some((position, _)) => KktDecision::Release {
            position,
            index: active.indices()[position],
        },
    }
}

/// Maximize `objective` over `{theta >= 0, sum(theta) <= 1}`.
pub fn maximize<O: Objective + ?Sized>(objective: &O, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let dim = objective.dim();
    if dim == 0 {
        return Err(invalid("objective has no parameters"));
    }
    if let Some(index) = objective.degenerate_row() {
        return Err(Error::DegenerateData { index });
    }
    let mut theta = match &opts.theta0 {
        Some(t0) => {
            if t0.len() != dim {
                return Err(invalid(format!("theta0 has {} entries, need {dim}", t0.len())));
            }
            t0.clone()
        }
        None => vec![0.9 / dim as f64; dim],
    };
    let report = check_feasible(&theta);
    if !report.feasible {
        return Err(Error::Infeasible { violated: report.violated });
    }
    let mut value = objective.value(&theta)?;
    let mut active = ActiveSet::new(dim);
    update_active(&theta, &mut active, opts.active_tol);

    let eval = |t: &[f64]| objective.value(t).ok();
    let mut trace = Vec::new();
    let mut multipliers = Vec::new();
    let mut d_norm = f64::INFINITY;
    let mut converged = false;
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let grad = objective.gradient(&theta)?;
        let hess = objective.hessian(&theta)?;
        let delta = opts.delta.unwrap_or_else(|| default_ridge(&hess));
        let dir = search_direction(&grad, &hess, &active, delta)?;
        d_norm = dir.d.norm();
        iterations += 1;

        if d_norm < opts.epsilon {
            multipliers = dir.multipliers.iter().copied().collect();
            match decide(&multipliers, &active) {
                KktDecision::Converged => {
                    converged = true;
                    break;
                }
                KktDecision::Release { position, .. } => {
                    active.remove_at(position);
                    trace.push(TraceEntry {
                        loglik: value,
                        d_norm,
                        active: active.len(),
                    });
                    continue;
                }
            }
        }

        let mut d: Vec<f64> = dir.d.iter().copied().collect();
        for &i in active.indices() {
            if i < dim {
                d[i] = 0.0;
            }
        }
        let gamma = max_step_inactive(&theta, &d, Some(&active));
        match line_search(&theta, &d, gamma, value, eval) {
            Some(outcome) => {
                theta = outcome.theta;
                value = outcome.value;
            }
            None => {
                multipliers = dir.multipliers.iter().copied().collect();
                stalled = true;
                break;
            }
        }
        update_active(&theta, &mut active, opts.active_tol);
        trace.push(TraceEntry {
            loglik: value,
            d_norm,
            active: active.len(),
        });
    }

    Ok(FitResult {
        theta_hat: theta,
        loglik: value,
        active,
        multipliers,
        d_norm,
        iterations,
        converged,
        stalled,
        trace,
    })
}

/// A fitted sieve.
#[derive(Debug, Clone)]
pub struct SieveFit {
    pub spec: SieveSpec,
    pub theta: Theta,
    pub result: FitResult,
}

impl SieveFit {
    pub fn cdf(&self, s: f64, t: f64) -> (f64, f64, f64) {
        let is = self.spec.axis1.ispline_all(s);
        let js = self.spec.axis2.ispline_all(t);
        crate::model::cdf_from_basis(&self.theta, &is, &js)
    }

    /// `F` on the product grid `s x t` plus `F1` on `s` and `F2` on `t`.
    pub fn cdf_grid(&self, s: &[f64], t: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let is: Vec<Vec<f64>> = s.iter().map(|&x| self.spec.axis1.ispline_all(x)).collect();
        let js: Vec<Vec<f64>> = t.iter().map(|&y| self.spec.axis2.ispline_all(y)).collect();
        let (p, q) = (self.theta.p(), self.theta.q());
        // eta J^T: p x |t|
        let mut eta_j = vec![vec![0.0; t.len()]; p];
        for (i, row) in eta_j.iter_mut().enumerate() {
            for (b, jv) in js.iter().enumerate() {
                row[b] = (0..q).map(|j| self.theta.eta(i, j) * jv[j]).sum();
            }
        }
        let f: Vec<Vec<f64>> = is
            .iter()
            .map(|iv| {
                (0..t.len())
                    .map(|b| (0..p).map(|i| iv[i] * eta_j[i][b]).sum())
                    .collect()
            })
            .collect();
        let f1 = is.iter().map(|iv| marginal1(&self.theta, iv)).collect();
        let f2 = js.iter().map(|jv| marginal2(&self.theta, jv)).collect();
        (f, f1, f2)
    }
}

fn marginal1(theta: &Theta, is: &[f64]) -> f64 {
    (0..theta.p())
        .map(|i| is[i] * ((0..theta.q()).map(|j| theta.eta(i, j)).sum::<f64>() + theta.omega(i)))
        .sum()
}

fn marginal2(theta: &Theta, js: &[f64]) -> f64 {
    (0..theta.q())
        .map(|j| js[j] * ((0..theta.p()).map(|i| theta.eta(i, j)).sum::<f64>() + theta.pi(j)))
        .sum()
}

/// Sieve maximum likelihood fit of `data` on the bases of `spec`.
pub fn fit(spec: &SieveSpec, data: &Dataset, opts: &FitOptions) -> Result<SieveFit> {
    if data.is_empty() {
        return Err(invalid("dataset is empty"));
    }
    let domain = spec.domain();
    if let Some(k) = data.iter().position(|o| !domain.contains(o.c1, o.c2)) {
        return Err(invalid(format!("observation {k} lies outside the domain")));
    }
    let objective = AffineLogLik::from_sieve(spec, data);
    let result = maximize(&objective, opts)?;
    let theta = Theta::from_flat(spec.p(), spec.q(), result.theta_hat.clone())?;
    Ok(SieveFit {
        spec: spec.clone(),
        theta,
        result,
    })
}
