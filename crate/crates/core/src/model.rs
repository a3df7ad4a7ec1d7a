//! Sieve parameterization of a bivariate CDF and its two marginals over
//! tensor I-spline bases, and the current-status log-likelihood.
//!
//! With `I_i = I_i(c1)` and `J_j = J_j(c2)`,
//!
//! ```text
//! F  = sum_ij eta_ij I_i J_j
//! F1 = sum_i (sum_j eta_ij + omega_i) I_i
//! F2 = sum_j (sum_i eta_ij + pi_j) J_j
//! ```
//!
//! so each of the four quadrant probabilities `F`, `F1 - F`, `F2 - F` and
//! `1 - F1 - F2 + F` is affine in the flat coefficient vector
//! `theta = (eta row-major, omega, pi)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::spline::KnotVector;

/// Quadrant probabilities at or below this are treated as zero.
pub const PROB_FLOOR: f64 = 1e-12;

/// Tolerance used by [`check_feasible`].
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// One bivariate current-status record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub c1: f64,
    pub c2: f64,
    /// `T1 <= c1`
    pub d1: bool,
    /// `T2 <= c2`
    pub d2: bool,
}

impl Observation {
    pub fn new(c1: f64, c2: f64, d1: bool, d2: bool) -> Self {
        Self { c1, c2, d1, d2 }
    }

    pub fn quadrant(&self) -> Quadrant {
        match (self.d1, self.d2) {
            (true, true) => Quadrant::BothBefore,
            (true, false) => Quadrant::FirstOnly,
            (false, true) => Quadrant::SecondOnly,
            (false, false) => Quadrant::Neither,
        }
    }
}

/// Which of the four cells of the monitoring cross the event pair fell in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrant {
    /// `T1 <= c1, T2 <= c2`: probability `F`.
    BothBefore,
    /// `T1 <= c1, T2 > c2`: probability `F1 - F`.
    FirstOnly,
    /// `T1 > c1, T2 <= c2`: probability `F2 - F`.
    SecondOnly,
    /// `T1 > c1, T2 > c2`: probability `1 - F1 - F2 + F`.
    Neither,
}

impl Quadrant {
    /// The realized probability given `(F, F1, F2)`.
    pub fn probability(self, f: f64, f1: f64, f2: f64) -> f64 {
        match self {
            Quadrant::BothBefore => f,
            Quadrant::FirstOnly => f1 - f,
            Quadrant::SecondOnly => f2 - f,
            Quadrant::Neither => 1.0 - f1 - f2 + f,
        }
    }
}

pub type Dataset = Vec<Observation>;

/// Axis-aligned rectangle `[l1, u1] x [l2, u2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub l1: f64,
    pub u1: f64,
    pub l2: f64,
    pub u2: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self::square(0.0, 5.0)
    }
}

impl Domain {
    pub fn new(l1: f64, u1: f64, l2: f64, u2: f64) -> Result<Self> {
        if !(l1 < u1 && l2 < u2) || ![l1, u1, l2, u2].iter().all(|x| x.is_finite()) {
            return Err(invalid(format!("bad domain [{l1},{u1}]x[{l2},{u2}]")));
        }
        Ok(Self { l1, u1, l2, u2 })
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Self { l1: lo, u1: hi, l2: lo, u2: hi }
    }

    pub fn contains(&self, s: f64, t: f64) -> bool {
        (self.l1..=self.u1).contains(&s) && (self.l2..=self.u2).contains(&t)
    }
}

/// The pair of I-spline families spanning the sieve.
#[derive(Debug, Clone, PartialEq)]
pub struct SieveSpec {
    pub axis1: KnotVector,
    pub axis2: KnotVector,
}

impl SieveSpec {
    pub fn new(axis1: KnotVector, axis2: KnotVector) -> Result<Self> {
        if axis1.order() != axis2.order() {
            return Err(invalid("both axes must use the same spline order"));
        }
        Ok(Self { axis1, axis2 })
    }

    /// Knots at the empirical quantiles of each axis' monitoring times.
    pub fn from_data(data: &[Observation], m: usize, order: usize, domain: Domain) -> Result<Self> {
        let c1: Vec<f64> = data.iter().map(|o| o.c1).collect();
        let c2: Vec<f64> = data.iter().map(|o| o.c2).collect();
        Self::new(
            KnotVector::from_quantiles(&c1, m, order, domain.l1, domain.u1)?,
            KnotVector::from_quantiles(&c2, m, order, domain.l2, domain.u2)?,
        )
    }

    pub fn p(&self) -> usize {
        self.axis1.basis_count()
    }

    pub fn q(&self) -> usize {
        self.axis2.basis_count()
    }

    /// `pq + p + q`.
    pub fn dim(&self) -> usize {
        let (p, q) = (self.p(), self.q());
        p * q + p + q
    }

    pub fn domain(&self) -> Domain {
        Domain {
            l1: self.axis1.lower(),
            u1: self.axis1.upper(),
            l2: self.axis2.lower(),
            u2: self.axis2.upper(),
        }
    }

    /// `(F, F1, F2)` at `(s, t)`.
    pub fn cdf_eval(&self, theta: &Theta, s: f64, t: f64) -> Result<(f64, f64, f64)> {
        self.check_shape(theta)?;
        let report = check_feasible(theta.as_slice());
        if !report.feasible {
            return Err(Error::Infeasible { violated: report.violated });
        }
        let is = self.axis1.ispline_all(s);
        let js = self.axis2.ispline_all(t);
        Ok(cdf_from_basis(theta, &is, &js))
    }

    /// Precomputed coefficient rows of `F`, `F1`, `F2` at the observation.
    pub fn design_row(&self, obs: &Observation) -> DesignRow {
        let is = self.axis1.ispline_all(obs.c1);
        let js = self.axis2.ispline_all(obs.c2);
        let (p, q) = (is.len(), js.len());
        let dim = p * q + p + q;
        let mut a_f = vec![0.0; dim];
        let mut a_1 = vec![0.0; dim];
        let mut a_2 = vec![0.0; dim];
        for i in 0..p {
            for j in 0..q {
                let k = i * q + j;
                a_f[k] = is[i] * js[j];
                a_1[k] = is[i];
                a_2[k] = js[j];
            }
            a_1[p * q + i] = is[i];
        }
        for j in 0..q {
            a_2[p * q + p + j] = js[j];
        }
        DesignRow {
            a_f,
            a_1,
            a_2,
            quadrant: obs.quadrant(),
        }
    }

    fn check_shape(&self, theta: &Theta) -> Result<()> {
        if theta.p != self.p() || theta.q != self.q() {
            return Err(invalid(format!(
                "theta is {}x{}, sieve is {}x{}",
                theta.p,
                theta.q,
                self.p(),
                self.q()
            )));
        }
        Ok(())
    }

    /// Log-likelihood of `data` at `theta`.
    pub fn loglik(&self, theta: &Theta, data: &[Observation]) -> Result<f64> {
        self.check_shape(theta)?;
        AffineLogLik::from_sieve(self, data).value(theta.as_slice())
    }

    pub fn loglik_grad(&self, theta: &Theta, data: &[Observation]) -> Result<DVector<f64>> {
        self.check_shape(theta)?;
        AffineLogLik::from_sieve(self, data).gradient(theta.as_slice())
    }

    pub fn loglik_hess(&self, theta: &Theta, data: &[Observation]) -> Result<DMatrix<f64>> {
        self.check_shape(theta)?;
        AffineLogLik::from_sieve(self, data).hessian(theta.as_slice())
    }
}

/// `(F, F1, F2)` from precomputed I-spline values on each axis.
pub fn cdf_from_basis(theta: &Theta, is: &[f64], js: &[f64]) -> (f64, f64, f64) {
    let (p, q) = (theta.p, theta.q);
    let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
    for i in 0..p {
        let mut row_f = 0.0;
        let mut row_sum = 0.0;
        for j in 0..q {
            let eta = theta.eta(i, j);
            row_f += eta * js[j];
            row_sum += eta;
        }
        f += is[i] * row_f;
        f1 += is[i] * (row_sum + theta.omega(i));
    }
    for j in 0..q {
        let col_sum: f64 = (0..p).map(|i| theta.eta(i, j)).sum();
        f2 += js[j] * (col_sum + theta.pi(j));
    }
    (f, f1, f2)
}

/// Flat sieve coefficients: `eta` (p x q, row-major), then `omega` (p),
/// then `pi` (q).
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    p: usize,
    q: usize,
    values: Vec<f64>,
}

impl Theta {
    pub fn from_flat(p: usize, q: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != p * q + p + q {
            return Err(invalid(format!(
                "expected {} coefficients for p={p}, q={q}, got {}",
                p * q + p + q,
                values.len()
            )));
        }
        Ok(Self { p, q, values })
    }

    pub fn zeros(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            values: vec![0.0; p * q + p + q],
        }
    }

    /// Every coordinate equal, summing to `total`.
    pub fn uniform(p: usize, q: usize, total: f64) -> Self {
        let dim = p * q + p + q;
        Self {
            p,
            q,
            values: vec![total / dim as f64; dim],
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.q + j]
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.values[self.p * self.q + i]
    }

    pub fn pi(&self, j: usize) -> f64 {
        self.values[self.p * self.q + self.p + j]
    }

    pub fn eta_block(&self) -> &[f64] {
        &self.values[..self.p * self.q]
    }

    pub fn omega_block(&self) -> &[f64] {
        &self.values[self.p * self.q..self.p * self.q + self.p]
    }

    pub fn pi_block(&self) -> &[f64] {
        &self.values[self.p * self.q + self.p..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// Coefficient vectors of `F`, `F1` and `F2` at one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub a_f: Vec<f64>,
    pub a_1: Vec<f64>,
    pub a_2: Vec<f64>,
    pub quadrant: Quadrant,
}

impl DesignRow {
    /// `(b, g)` with realized probability `b + g . theta`.
    pub fn affine(&self) -> (f64, Vec<f64>) {
        let (a_f, a_1, a_2) = (&self.a_f, &self.a_1, &self.a_2);
        match self.quadrant {
            Quadrant::BothBefore => (0.0, a_f.clone()),
            Quadrant::FirstOnly => (0.0, a_1.iter().zip(a_f).map(|(x, f)| x - f).collect()),
            Quadrant::SecondOnly => (0.0, a_2.iter().zip(a_f).map(|(x, f)| x - f).collect()),
            Quadrant::Neither => (
                1.0,
                a_f.iter()
                    .zip(a_1)
                    .zip(a_2)
                    .map(|((f, x), y)| f - x - y)
                    .collect(),
            ),
        }
    }
}

/// Outcome of [`check_feasible`]. Indices `0..D` are coordinate
/// constraints and `D` is the sum constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violated: Vec<usize>,
}

/// Nonnegativity of every coordinate and total sum at most one.
pub fn check_feasible(theta: &[f64]) -> FeasibilityReport {
    let mut violated: Vec<usize> = theta
        .iter()
        .enumerate()
        .filter(|(_, &x)| !(x >= -FEASIBILITY_TOL))
        .map(|(i, _)| i)
        .collect();
    let total: f64 = theta.iter().sum();
    if !(total <= 1.0 + FEASIBILITY_TOL) {
        violated.push(theta.len());
    }
    FeasibilityReport {
        feasible: violated.is_empty(),
        violated,
    }
}

/// Objective `sum_k log(b_k + g_k . theta)` with exact gradient and Hessian.
///
/// The sieve log-likelihood is this with one row per observation; it is
/// also usable directly for small synthetic problems.
#[derive(Debug, Clone)]
pub struct AffineLogLik {
    offsets: Vec<f64>,
    /// n x D, row k is `g_k`
    coef: DMatrix<f64>,
}

impl AffineLogLik {
    pub fn new(offsets: Vec<f64>, coef: DMatrix<f64>) -> Result<Self> {
        if offsets.len() != coef.nrows() {
            return Err(invalid("one offset per coefficient row required"));
        }
        Ok(Self { offsets, coef })
    }

    pub fn from_sieve(spec: &SieveSpec, data: &[Observation]) -> Self {
        let dim = spec.dim();
        let mut offsets = Vec::with_capacity(data.len());
        let mut coef = DMatrix::zeros(data.len(), dim);
        for (k, obs) in data.iter().enumerate() {
            let (b, g) = spec.design_row(obs).affine();
            offsets.push(b);
            for (d, v) in g.into_iter().enumerate() {
                coef[(k, d)] = v;
            }
        }
        Self { offsets, coef }
    }

    pub fn dim(&self) -> usize {
        self.coef.ncols()
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coef
    }

    /// Realized probabilities, or the first index at or below the floor.
    pub fn probabilities(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.dim() {
            return Err(invalid(format!(
                "theta has {} entries, objective has dimension {}",
                theta.len(),
                self.dim()
            )));
        }
        let mut out = Vec::with_capacity(self.len());
        for (k, &b) in self.offsets.iter().enumerate() {
            let row = self.coef.row(k);
            let prob = b + row.iter().zip(theta).map(|(g, t)| g * t).sum::<f64>();
            if !(prob > PROB_FLOOR) {
                return Err(Error::NonFiniteLikelihood { index: k, probability: prob });
            }
            out.push(prob);
        }
        Ok(out)
    }

    pub fn value(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.probabilities(theta)?.iter().map(|p| p.ln()).sum())
    }

    pub fn gradient(&self, theta: &[f64]) -> Result<DVector<f64>> {
        let probs = self.probabilities(theta)?;
        let w = DVector::from_iterator(probs.len(), probs.iter().map(|p| 1.0 / p));
        Ok(self.coef.tr_mul(&w))
    }

    /// `-sum_k g_k g_k^T / P_k^2`; symmetric by construction.
    pub fn hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let probs = self.probabilities(theta)?;
        let mut scaled = self.coef.clone();
        for (k, p) in probs.iter().enumerate() {
            scaled.row_mut(k).scale_mut(1.0 / p);
        }
        let mut h = scaled.tr_mul(&scaled);
        h.neg_mut();
        // force exact symmetry
        let d = h.nrows();
        for i in 0..d {
            for j in i + 1..d {
                h[(j, i)] = h[(i, j)];
            }
        }
        Ok(h)
    }

    /// First observation whose probability is at most the floor for every
    /// feasible `theta` (i.e. at every vertex of the polytope).
    pub fn degenerate_row(&self) -> Option<usize> {
        (0..self.len()).find(|&k| {
            let best = self.coef.row(k).iter().fold(0.0_f64, |m, &g| m.max(g));
            self.offsets[k] + best <= PROB_FLOOR
        })
    }
}

/// Result of checking the bivariate-CDF shape inequalities on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    /// Largest violation found per inequality, in the order: `F >= 0`,
    /// monotone in `s`, monotone in `t`, rectangle mass, `F1 >= F`,
    /// `F2 >= F`, `F1` increments dominate `F` increments, same for `F2`,
    /// and `1 - F1 - F2 + F >= 0`.
    pub max_violation: [f64; 9],
}

impl ShapeReport {
    pub fn worst(&self) -> f64 {
        self.max_violation.iter().fold(0.0_f64, |a, &b| a.max(b))
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

/// Check the nine CDF shape inequalities for `(F, F1, F2)` tabulated on a
/// product grid. `f[a][b]` is `F(s[a], t[b])`; `f1[a] = F1(s[a])`,
/// `f2[b] = F2(t[b])`; grids are increasing. Adjacent grid pairs suffice
/// since the difference inequalities telescope.
pub fn check_shape(f: &[Vec<f64>], f1: &[f64], f2: &[f64]) -> ShapeReport {
    let mut v = [0.0_f64; 9];
    let mut bump = |slot: usize, amount: f64| {
        if amount > v[slot] {
            v[slot] = amount;
        }
    };
    let (ns, nt) = (f1.len(), f2.len());
    for a in 0..ns {
        for b in 0..nt {
            bump(0, -f[a][b]);
            bump(4, f[a][b] - f1[a]);
            bump(5, f[a][b] - f2[b]);
            bump(8, f1[a] + f2[b] - f[a][b] - 1.0);
            if a + 1 < ns {
                bump(1, f[a][b] - f[a + 1][b]);
                bump(6, (f[a + 1][b] - f[a][b]) - (f1[a + 1] - f1[a]));
            }
            if b + 1 < nt {
                bump(2, f[a][b] - f[a][b + 1]);
                bump(7, (f[a][b + 1] - f[a][b]) - (f2[b + 1] - f2[b]));
            }
            if a + 1 < ns && b + 1 < nt {
                let mass = f[a + 1][b + 1] - f[a][b + 1] - f[a + 1][b] + f[a][b];
                bump(3, -mass);
            }
        }
    }
    ShapeReport { max_violation: v }
}
