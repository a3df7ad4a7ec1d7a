//! Oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use bicens::model::{AffineLogLik, Observation, SieveSpec};
use bicens::optim::FitResult;
use bicens::spline::KnotVector;
use bicens::Domain;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adaptive Simpson on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Straight-line log-likelihood of an affine model; `-inf` where any
/// probability is not positive.
pub fn affine_loglik(obj: &AffineLogLik, theta: &[f64]) -> f64 {
    let coef = obj.coefficients();
    let mut total = 0.0;
    for (k, &b) in obj.offsets().iter().enumerate() {
        let mut p = b;
        for (c, &x) in theta.iter().enumerate() {
            p += coef[(k, c)] * x;
        }
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += p.ln();
    }
    total
}

/// Maximum of `f` over `{x >= 0, sum x <= 1}` sampled at step `1/steps`.
/// Two dimensions are scanned exhaustively; in three the last coordinate
/// is searched by bisection on forward differences, which is exact on the
/// grid for a concave `f`.
pub fn grid_max<F: Fn(&[f64]) -> f64>(f: F, dim: usize, steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let mut best = f64::NEG_INFINITY;
    match dim {
        2 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    best = best.max(f(&[i as f64 * h, j as f64 * h]));
                }
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let at = |k: usize| f(&[i as f64 * h, j as f64 * h, k as f64 * h]);
                    let (mut lo, mut hi) = (0, steps - i - j);
                    while lo < hi {
                        let mid = (lo + hi) / 2;
                        if at(mid + 1) > at(mid) {
                            lo = mid + 1;
                        } else {
                            hi = mid;
                        }
                    }
                    best = best.max(at(lo));
                }
            }
        }
        _ => panic!("grid search only in two or three dimensions"),
    }
    best
}

/// [`grid_max`] of an affine log-likelihood, with duplicate rows merged
/// and the partial sums `b + g . x` carried along each grid line.
pub fn affine_grid_max(obj: &AffineLogLik, steps: usize) -> f64 {
    let dim = obj.dim();
    let coef = obj.coefficients();
    let mut rows: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    for (k, &b) in obj.offsets().iter().enumerate() {
        let g: Vec<f64> = (0..dim).map(|c| coef[(k, c)]).collect();
        match rows.iter_mut().find(|(rb, rg, _)| *rb == b && *rg == g) {
            Some(row) => row.2 += 1.0,
            None => rows.push((b, g, 1.0)),
        }
    }
    let h = 1.0 / steps as f64;
    let eval = |base: &[f64], c: usize, x: f64| -> f64 {
        let mut total = 0.0;
        for (r, (_, g, w)) in rows.iter().enumerate() {
            let p = base[r] + g[c] * x;
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += w * p.ln();
        }
        total
    };
    let mut best = f64::NEG_INFINITY;
    let mut base = vec![0.0; rows.len()];
    match dim {
        2 => {
            for i in 0..=steps {
                for (r, (b, g, _)) in rows.iter().enumerate() {
                    base[r] = b + g[0] * (i as f64 * h);
                }
                for j in 0..=steps - i {
                    best = best.max(eval(&base, 1, j as f64 * h));
                }
            }
        }
        3 => {
            let mut warm = 0;
            for i in 0..=steps {
                for j in 0..=steps - i {
                    for (r, (b, g, _)) in rows.iter().enumerate() {
                        base[r] = b + g[0] * (i as f64 * h) + g[1] * (j as f64 * h);
                    }
                    let at = |k: usize| eval(&base, 2, k as f64 * h);
                    // hill climb from the previous line's argmax; exact on a
                    // concave sequence
                    let top = steps - i - j;
                    let mut k = warm.min(top);
                    let mut here = at(k);
                    while k < top && at(k + 1) > here {
                        k += 1;
                        here = at(k);
                    }
                    while k > 0 && at(k - 1) > here {
                        k -= 1;
                        here = at(k);
                    }
                    warm = k;
                    best = best.max(here);
                }
            }
        }
        _ => panic!("grid search only in two or three dimensions"),
    }
    best
}

/// A random affine log-likelihood whose probabilities stay at least 0.02
/// on the whole feasible set.
pub fn random_affine(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> AffineLogLik {
    let mut offsets = Vec::with_capacity(n);
    let mut coef = DMatrix::zeros(n, dim);
    for k in 0..n {
        let b: f64 = rng.random_range(0.05..1.0);
        offsets.push(b);
        for c in 0..dim {
            coef[(k, c)] = rng.random_range(-(b - 0.02)..1.5);
        }
    }
    AffineLogLik::new(offsets, coef).unwrap()
}

/// Order-1 bases without interior knots: `p = q = 1`, so `F`, `F1`, `F2`
/// do not depend on the monitoring times and the fit is a four-cell
/// multinomial.
pub fn multinomial_spec() -> SieveSpec {
    let axis = KnotVector::new(1, 0.0, 5.0, vec![]).unwrap();
    SieveSpec::new(axis.clone(), axis).unwrap()
}

pub fn random_quadrants(rng: &mut ChaCha8Rng, n: usize, weights: [f64; 4]) -> Vec<Observation> {
    let total: f64 = weights.iter().sum();
    (0..n)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            let mut cell = 3;
            for (c, &w) in weights.iter().enumerate() {
                if u < w {
                    cell = c;
                    break;
                }
                u -= w;
            }
            let c1 = rng.random_range(0.1..4.9);
            let c2 = rng.random_range(0.1..4.9);
            Observation::new(c1, c2, cell == 0 || cell == 1, cell == 0 || cell == 2)
        })
        .collect()
}

/// Observations with independent uniform monitoring times and
/// exponential(0.5) event times.
pub fn synthetic_data(rng: &mut ChaCha8Rng, n: usize, domain: Domain) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let t1 = -(1.0 - rng.random::<f64>()).ln() / 0.5;
            let t2 = (t1 + -(1.0 - rng.random::<f64>()).ln() / 0.5) / 2.0;
            let c1 = rng.random_range(domain.l1 + 0.1..domain.u1 - 0.1);
            let c2 = rng.random_range(domain.l2 + 0.1..domain.u2 - 0.1);
            Observation::new(c1, c2, t1 <= c1, t2 <= c2)
        })
        .collect()
}

/// A random point with every coordinate positive and total in
/// `[lo_total, hi_total]`.
pub fn random_interior(rng: &mut ChaCha8Rng, dim: usize, lo_total: f64, hi_total: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let total = rng.random_range(lo_total..hi_total);
    raw.into_iter().map(|x| x / sum * total).collect()
}

pub fn trace_nondecreasing(result: &FitResult) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for entry in &result.trace {
        if entry.loglik < prev {
            return false;
        }
        prev = entry.loglik;
    }
    true
}

/// Twenty small instances: ten in two dimensions, five random ones in
/// three, and five four-cell multinomial sieves (also three-dimensional,
/// some with an empty cell so the optimum sits on the boundary).
pub fn oracle_instances() -> Vec<(String, AffineLogLik)> {
    let mut rng = rng(2024);
    let mut out = Vec::new();
    for k in 0..10 {
        out.push((format!("affine-2d-{k}"), random_affine(&mut rng, 2, 30)));
    }
    for k in 0..5 {
        out.push((format!("affine-3d-{k}"), random_affine(&mut rng, 3, 30)));
    }
    let spec = multinomial_spec();
    for k in 0..5 {
        let mut weights = [0.0; 4];
        for w in weights.iter_mut() {
            *w = rng.random_range(0.1..1.0);
        }
        if k % 2 == 0 {
            weights[k % 4] = 0.0;
        }
        let data = random_quadrants(&mut rng, 50, weights);
        out.push((format!("multinomial-{k}"), AffineLogLik::from_sieve(&spec, &data)));
    }
    out
}

/// Outcome of fitting one oracle instance.
pub struct OracleCheck {
    pub fitted: f64,
    pub grid: f64,
    pub kkt: bool,
    pub monotone: bool,
    pub feasible: bool,
}

impl OracleCheck {
    pub fn passes(&self) -> bool {
        (self.fitted - self.grid).abs() < 1e-3 && self.kkt && self.monotone && self.feasible
    }
}

pub fn check_against_grid(obj: &AffineLogLik) -> OracleCheck {
    let opts = bicens::FitOptions::default();
    let result = bicens::maximize(obj, &opts).unwrap();
    let grid = affine_grid_max(obj, 1000);
    OracleCheck {
        fitted: result.loglik,
        grid,
        kkt: result.converged && result.kkt_certified(opts.epsilon),
        monotone: trace_nondecreasing(&result),
        feasible: bicens::model::check_feasible(&result.theta_hat).feasible,
    }
}
