//! Clayton-copula simulation of bivariate current-status data and
//! Monte-Carlo bias/RMSE reporting for the sieve estimator.
//!
//! Event times are exponential marginals coupled by a Clayton copula;
//! monitoring times are independent uniforms on a censoring interval inside
//! the estimation domain. Replication `r` draws from a ChaCha8 stream keyed
//! by `(seed, r)`, so results do not depend on how replications are
//! scheduled.

use std::io::{self, Write};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::model::{Dataset, Domain, Observation, SieveSpec};
use crate::optim::{fit, FitOptions, SieveFit};

/// Clayton dependence parameter with Kendall's tau `(alpha - 1) / (alpha + 1)`.
pub fn tau_to_alpha(tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return Err(invalid(format!("Kendall's tau must lie in [0, 1), got {tau}")));
    }
    Ok((1.0 + tau) / (1.0 - tau))
}

/// `C(u, v) = (u^(1-a) + v^(1-a) - 1)^(1/(1-a))`; `a = 1` is independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clayton {
    pub alpha: f64,
}

impl Clayton {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("Clayton alpha must be >= 1, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        let e = 1.0 - self.alpha;
        if e == 0.0 {
            return u * v;
        }
        // u^e + v^e - 1 computed as 1 + expm1 + expm1 for accuracy near a = 1
        let s = 1.0 + (e * u.ln()).exp_m1() + (e * v.ln()).exp_m1();
        (s.ln() / e).exp()
    }

    /// `dC/du`, the conditional CDF of `V` given `U = u`.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> f64 {
        let e = 1.0 - self.alpha;
        if e == 0.0 {
            return v;
        }
        let s = 1.0 + (e * u.ln()).exp_m1() + (e * v.ln()).exp_m1();
        (-self.alpha * u.ln() + (self.alpha / e) * s.ln()).exp()
    }

    /// The `v` solving `conditional_cdf(u, v) = w`.
    pub fn conditional_inverse(&self, u: f64, w: f64) -> f64 {
        let e = 1.0 - self.alpha;
        if e == 0.0 {
            return w;
        }
        // v^e = u^e (w^(e/a) - 1) + 1
        let x = (e * u.ln()).exp() * ((e / self.alpha) * w.ln()).exp_m1();
        (x.ln_1p() / e).exp()
    }

    /// One draw by conditional inversion: `u, w` uniform, `v = C_u^-1(w)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.sample(Open01);
        let w: f64 = rng.sample(Open01);
        (u, self.conditional_inverse(u, w))
    }
}

/// Tau-a by Knight's merge-sort algorithm, `O(n log n)`. Assumes no ties.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let inversions = count_inversions(&mut ys, &mut buf);
    let pairs = (n * (n - 1) / 2) as f64;
    (pairs - 2.0 * inversions as f64) / pairs
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        count_inversions(left, &mut buf[..mid]) + count_inversions(right, &mut buf[mid..])
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// How many interior knots to place for a sample of size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotRule {
    /// `round(n^(1/3)) - 1`
    CubeRoot,
    Fixed(usize),
}

impl KnotRule {
    pub fn count(&self, n: usize) -> usize {
        match *self {
            KnotRule::CubeRoot => knot_count(n),
            KnotRule::Fixed(m) => m,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            KnotRule::CubeRoot => "round(n^(1/3)) - 1".to_string(),
            KnotRule::Fixed(m) => format!("fixed {m}"),
        }
    }
}

/// `round(n^(1/3)) - 1`: 4 knots at n = 100 and 5 at n = 200.
pub fn knot_count(n: usize) -> usize {
    ((n as f64).cbrt().round() as usize).saturating_sub(1)
}

/// True joint and marginal CDFs of the simulation scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truth {
    pub copula: Clayton,
    pub rate: f64,
}

impl Truth {
    pub fn marginal(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            -(-self.rate * s).exp_m1()
        }
    }

    pub fn joint(&self, s: f64, t: f64) -> f64 {
        self.copula.cdf(self.marginal(s), self.marginal(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub tau: f64,
    pub rate: f64,
    pub censor_lo: f64,
    pub censor_hi: f64,
    pub domain: Domain,
    pub reps: usize,
    pub seed: u64,
    pub order: usize,
    pub knots: KnotRule,
    pub fit: FitOptions,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            tau: 0.25,
            rate: 0.5,
            censor_lo: 0.0201,
            censor_hi: 4.7698,
            domain: Domain::default(),
            reps: 100,
            seed: 20140101,
            order: 4,
            knots: KnotRule::CubeRoot,
            fit: FitOptions::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if self.n == 0 || self.reps == 0 {
            return Err(invalid("n and reps must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(invalid(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if !(self.rate > 0.0) {
            return Err(invalid("marginal rate must be positive"));
        }
        let inside = |lo: f64, hi: f64| lo < self.censor_lo && self.censor_hi < hi;
        if !(self.censor_lo < self.censor_hi && inside(d.l1, d.u1) && inside(d.l2, d.u2)) {
            return Err(invalid("censoring interval must lie strictly inside the domain"));
        }
        if self.order == 0 {
            return Err(invalid("spline order must be at least 1"));
        }
        Ok(())
    }

    pub fn truth(&self) -> Result<Truth> {
        Ok(Truth {
            copula: Clayton::new(tau_to_alpha(self.tau)?)?,
            rate: self.rate,
        })
    }
}

/// Deterministic generator for replication `rep`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draw `config.n` observations. Per observation the generator yields the
/// two copula uniforms, then `c1`, then `c2`.
pub fn generate_dataset<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<(Dataset, Truth)> {
    config.validate()?;
    let truth = config.truth()?;
    let width = config.censor_hi - config.censor_lo;
    let data = (0..config.n)
        .map(|_| {
            let (u, v) = truth.copula.sample(rng);
            let t1 = -(-u).ln_1p() / config.rate;
            let t2 = -(-v).ln_1p() / config.rate;
            let c1 = config.censor_lo + width * rng.random::<f64>();
            let c2 = config.censor_lo + width * rng.random::<f64>();
            Observation::new(c1, c2, t1 <= c1, t2 <= c2)
        })
        .collect();
    Ok((data, truth))
}

/// Knots from the data and a sieve fit, as one replication does it.
pub fn fit_replication(config: &SimConfig, data: &Dataset) -> Result<SieveFit> {
    let spec = SieveSpec::from_data(data, config.knots.count(data.len()), config.order, config.domain)?;
    fit(&spec, data, &config.fit)
}

/// `0.1, 0.2, ..., 4.7`.
pub fn report_axis() -> Vec<f64> {
    (1..=47).map(|k| k as f64 / 10.0).collect()
}

/// The four corner points of the bias/RMSE table.
pub const TABLE_POINTS: [(f64, f64); 4] = [(0.1, 0.1), (0.1, 4.6), (4.6, 0.1), (4.6, 4.6)];

/// Bias and RMSE at one point, with replication standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStat {
    pub s: f64,
    pub t: f64,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    pub rmse: f64,
    /// `sd(error) / sqrt(R)`
    pub bias_se: f64,
    /// delta-method `sd(error^2) / (2 rmse sqrt(R))`
    pub rmse_se: f64,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
    sum_quad: f64,
    sum_est: f64,
    count: usize,
}

impl Accumulator {
    fn push(&mut self, estimate: f64, truth: f64) {
        let e = estimate - truth;
        self.sum += e;
        self.sum_sq += e * e;
        self.sum_quad += e * e * e * e;
        self.sum_est += estimate;
        self.count += 1;
    }

    fn stat(&self, s: f64, t: f64, truth: f64) -> PointStat {
        let r = self.count as f64;
        let bias = self.sum / r;
        let mse = self.sum_sq / r;
        let rmse = mse.sqrt();
        let (bias_se, rmse_se) = if self.count > 1 {
            let var_e = ((self.sum_sq - r * bias * bias) / (r - 1.0)).max(0.0);
            let var_e2 = ((self.sum_quad - r * mse * mse) / (r - 1.0)).max(0.0);
            let rmse_se = if rmse > 0.0 { var_e2.sqrt() / (2.0 * rmse * r.sqrt()) } else { 0.0 };
            ((var_e / r).sqrt(), rmse_se)
        } else {
            (f64::NAN, f64::NAN)
        };
        PointStat {
            s,
            t,
            truth,
            mean: self.sum_est / r,
            bias,
            rmse,
            bias_se,
            rmse_se,
        }
    }
}

/// Evaluations of one successful replication on the report grids.
#[derive(Debug, Clone)]
pub struct ReplicationEval {
    /// `F` on the grid, row-major over `(s, t)`.
    pub joint: Vec<f64>,
    pub marginal1: Vec<f64>,
    pub marginal2: Vec<f64>,
    pub table: [f64; 4],
}

fn evaluate(fit: &SieveFit, axis: &[f64]) -> ReplicationEval {
    let (f, f1, f2) = fit.cdf_grid(axis, axis);
    let mut table = [0.0; 4];
    for (slot, &(s, t)) in table.iter_mut().zip(TABLE_POINTS.iter()) {
        *slot = fit.cdf(s, t).0;
    }
    ReplicationEval {
        joint: f.into_iter().flatten().collect(),
        marginal1: f1,
        marginal2: f2,
        table,
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone)]
pub enum Replication {
    Ok(ReplicationEval),
    /// Not converged, or the fit returned an error.
    Failed(String),
}

/// Generate, fit and evaluate replication `rep`.
pub fn run_replication(config: &SimConfig, rep: usize) -> Replication {
    let mut rng = replication_rng(config.seed, rep as u64);
    let outcome = generate_dataset(config, &mut rng).and_then(|(data, _)| fit_replication(config, &data));
    match outcome {
        Ok(fit) if fit.result.converged => Replication::Ok(evaluate(&fit, &report_axis())),
        Ok(fit) => Replication::Failed(format!(
            "not converged after {} iterations (|d| = {:e})",
            fit.result.iterations, fit.result.d_norm
        )),
        Err(e) => Replication::Failed(e.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct McReport {
    pub axis: Vec<f64>,
    /// Row-major over `(axis[a], axis[b])`.
    pub joint: Vec<PointStat>,
    pub marginal1: Vec<PointStat>,
    pub marginal2: Vec<PointStat>,
    pub table: Vec<PointStat>,
    /// Mean of `|bias|` over the joint grid.
    pub overall_abs_bias: f64,
    /// Mean of RMSE over the joint grid.
    pub overall_rmse: f64,
    pub reps: usize,
    pub failures: usize,
    pub failure_messages: Vec<(usize, String)>,
    pub knot_rule: String,
}

/// Monte-Carlo study with the default execution strategy.
pub fn run_monte_carlo(config: &SimConfig) -> Result<McReport> {
    run_monte_carlo_with(config, Execution::default())
}

pub fn run_monte_carlo_with(config: &SimConfig, exec: Execution) -> Result<McReport> {
    config.validate()?;
    let truth = config.truth()?;
    let outcomes = exec.map(config.reps, |r| run_replication(config, r));
    aggregate(config, &truth, &outcomes)
}

/// Order-fixed reduction of replication outcomes.
pub fn aggregate(config: &SimConfig, truth: &Truth, outcomes: &[Replication]) -> Result<McReport> {
    let axis = report_axis();
    let na = axis.len();
    let mut joint = vec![Accumulator::default(); na * na];
    let mut m1 = vec![Accumulator::default(); na];
    let mut m2 = vec![Accumulator::default(); na];
    let mut table = vec![Accumulator::default(); TABLE_POINTS.len()];
    let truth_joint: Vec<f64> = axis
        .iter()
        .flat_map(|&s| axis.iter().map(move |&t| truth.joint(s, t)))
        .collect();
    let truth_marg: Vec<f64> = axis.iter().map(|&s| truth.marginal(s)).collect();
    let mut failure_messages = Vec::new();
    for (rep, outcome) in outcomes.iter().enumerate() {
        let eval = match outcome {
            Replication::Ok(eval) => eval,
            Replication::Failed(msg) => {
                failure_messages.push((rep, msg.clone()));
                continue;
            }
        };
        for (acc, (&est, &tr)) in joint.iter_mut().zip(eval.joint.iter().zip(&truth_joint)) {
            acc.push(est, tr);
        }
        for a in 0..na {
            m1[a].push(eval.marginal1[a], truth_marg[a]);
            m2[a].push(eval.marginal2[a], truth_marg[a]);
        }
        for (k, &(s, t)) in TABLE_POINTS.iter().enumerate() {
            table[k].push(eval.table[k], truth.joint(s, t));
        }
    }
    if failure_messages.len() == outcomes.len() {
        return Err(Error::AllReplicationsFailed { reps: outcomes.len() });
    }
    let joint: Vec<PointStat> = (0..na * na)
        .map(|k| joint[k].stat(axis[k / na], axis[k % na], truth_joint[k]))
        .collect();
    let marginal1 = (0..na).map(|a| m1[a].stat(axis[a], f64::NAN, truth_marg[a])).collect();
    let marginal2 = (0..na).map(|a| m2[a].stat(f64::NAN, axis[a], truth_marg[a])).collect();
    let table = TABLE_POINTS
        .iter()
        .enumerate()
        .map(|(k, &(s, t))| table[k].stat(s, t, truth.joint(s, t)))
        .collect();
    let count = joint.len() as f64;
    let overall_abs_bias = joint.iter().map(|p| p.bias.abs()).sum::<f64>() / count;
    let overall_rmse = joint.iter().map(|p| p.rmse).sum::<f64>() / count;
    Ok(McReport {
        axis,
        joint,
        marginal1,
        marginal2,
        table,
        overall_abs_bias,
        overall_rmse,
        reps: outcomes.len(),
        failures: failure_messages.len(),
        failure_messages,
        knot_rule: config.knots.describe(),
    })
}

/// Discretized `L2` distance between a fit and the truth: joint term
/// averaged over the product of `axis`, marginal terms over `axis`.
pub fn distance_to_truth(fit: &SieveFit, truth: &Truth, axis: &[f64]) -> f64 {
    let (f, f1, f2) = fit.cdf_grid(axis, axis);
    let n = axis.len() as f64;
    let mut joint = 0.0;
    for (a, &s) in axis.iter().enumerate() {
        for (b, &t) in axis.iter().enumerate() {
            joint += (f[a][b] - truth.joint(s, t)).powi(2);
        }
    }
    let m1: f64 = axis.iter().zip(&f1).map(|(&s, &v)| (v - truth.marginal(s)).powi(2)).sum();
    let m2: f64 = axis.iter().zip(&f2).map(|(&t, &v)| (v - truth.marginal(t)).powi(2)).sum();
    (joint / (n * n) + m1 / n + m2 / n).sqrt()
}

/// Format with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl McReport {
    /// Per-point rows `s,t,bias,rmse` for the joint grid.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "s,t,bias,rmse")?;
        for p in &self.joint {
            writeln!(out, "{},{},{},{}", fmt17(p.s), fmt17(p.t), fmt17(p.bias), fmt17(p.rmse))?;
        }
        Ok(())
    }

    /// Rows `axis,x,truth,mean,bias,rmse` for both marginals.
    pub fn write_marginal_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "axis,x,truth,mean,bias,rmse")?;
        for (axis, stats) in [(1, &self.marginal1), (2, &self.marginal2)] {
            for (x, p) in self.axis.iter().zip(stats.iter()) {
                writeln!(
                    out,
                    "{axis},{},{},{},{},{}",
                    fmt17(*x),
                    fmt17(p.truth),
                    fmt17(p.mean),
                    fmt17(p.bias),
                    fmt17(p.rmse)
                )?;
            }
        }
        Ok(())
    }

    /// `key = value` summary block.
    pub fn write_summary<W: Write>(&self, mut out: W, config: &SimConfig) -> io::Result<()> {
        writeln!(out, "n = {}", config.n)?;
        writeln!(out, "tau = {}", fmt17(config.tau))?;
        writeln!(out, "alpha = {}", fmt17(tau_to_alpha(config.tau).unwrap_or(f64::NAN)))?;
        writeln!(out, "seed = {}", config.seed)?;
        writeln!(out, "reps = {}", self.reps)?;
        writeln!(out, "failures = {}", self.failures)?;
        writeln!(out, "knot_rule = {}", self.knot_rule)?;
        writeln!(out, "overall_abs_bias = {}", fmt17(self.overall_abs_bias))?;
        writeln!(out, "overall_rmse = {}", fmt17(self.overall_rmse))?;
        for p in &self.table {
            writeln!(
                out,
                "point({},{}) = bias {} rmse {} bias_se {} rmse_se {}",
                p.s,
                p.t,
                fmt17(p.bias),
                fmt17(p.rmse),
                fmt17(p.bias_se),
                fmt17(p.rmse_se)
            )?;
        }
        for (rep, msg) in &self.failure_messages {
            writeln!(out, "failed_rep {rep} = {msg}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_from_tau() {
        assert_eq!(tau_to_alpha(0.0).unwrap(), 1.0);
        assert!((tau_to_alpha(0.25).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((tau_to_alpha(0.75).unwrap() - 7.0).abs() < 1e-14);
        assert!(tau_to_alpha(1.0).is_err());
    }

    #[test]
    fn knot_counts() {
        assert_eq!(knot_count(100), 4);
        assert_eq!(knot_count(200), 5);
        assert_eq!(knot_count(27), 2);
        assert_eq!(KnotRule::Fixed(3).count(1000), 3);
    }

    #[test]
    fn conditional_inversion_round_trip() {
        let c = Clayton::new(5.0 / 3.0).unwrap();
        let mut rng = replication_rng(7, 0);
        for _ in 0..100 {
            let u: f64 = rng.sample(Open01);
            let w: f64 = rng.sample(Open01);
            let v = c.conditional_inverse(u, w);
            assert!((c.conditional_cdf(u, v) - w).abs() < 1e-10, "u={u} w={w} v={v} got={}", c.conditional_cdf(u, v));
        }
    }

    #[test]
    fn clayton_boundaries() {
        let c = Clayton::new(7.0).unwrap();
        assert!((c.cdf(0.3, 1.0) - 0.3).abs() < 1e-14);
        assert!((c.cdf(1.0, 0.8) - 0.8).abs() < 1e-14);
        assert_eq!(c.cdf(0.0, 0.5), 0.0);
        let ind = Clayton::new(1.0).unwrap();
        assert_eq!(ind.cdf(0.3, 0.4), 0.3 * 0.4);
        assert!(Clayton::new(0.5).is_err());
    }

    #[test]
    fn truth_at_domain_corner() {
        let truth = SimConfig::default().truth().unwrap();
        let m = 1.0 - (-2.5_f64).exp();
        assert!((truth.marginal(5.0) - m).abs() < 1e-15);
        let a = 5.0 / 3.0;
        let closed = (2.0 * m.powf(1.0 - a) - 1.0).powf(1.0 / (1.0 - a));
        assert!((truth.joint(5.0, 5.0) - closed).abs() < 1e-14);
        // one percent of the marginal mass lies below the censoring interval
        assert!((truth.marginal(0.0201) - 0.01).abs() < 5e-5);
    }

    #[test]
    fn kendall_matches_brute_force() {
        let mut rng = replication_rng(3, 1);
        let c = Clayton::new(3.0).unwrap();
        let (x, y): (Vec<f64>, Vec<f64>) = (0..300).map(|_| c.sample(&mut rng)).unzip();
        let mut s = 0i64;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                s += ((x[i] - x[j]) * (y[i] - y[j])).signum() as i64;
            }
        }
        let brute = s as f64 / (x.len() * (x.len() - 1) / 2) as f64;
        assert!((kendall_tau(&x, &y) - brute).abs() < 1e-14);
    }

    #[test]
    fn deltas_follow_event_times() {
        // indicator is T <= c
        let obs = Observation::new(2.0, 2.0, 1.0 <= 2.0, 3.0 <= 2.0);
        assert!(obs.d1);
        assert!(!obs.d2);
    }

    #[test]
    fn generated_monitoring_times_stay_in_censoring_interval() {
        let config = SimConfig {
            n: 500,
            ..SimConfig::default()
        };
        let (data, _) = generate_dataset(&config, &mut replication_rng(1, 0)).unwrap();
        assert_eq!(data.len(), 500);
        assert!(data
            .iter()
            .all(|o| (0.0201..=4.7698).contains(&o.c1) && (0.0201..=4.7698).contains(&o.c2)));
    }

    #[test]
    fn config_validation() {
        let bad = SimConfig {
            censor_hi: 5.0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SimConfig {
            tau: 1.0,
            ..SimConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SimConfig::default().validate().is_ok());
    }

    #[test]
    fn report_axis_has_forty_seven_points() {
        let axis = report_axis();
        assert_eq!(axis.len(), 47);
        assert_eq!(axis[0], 0.1);
        assert_eq!(axis[45], 4.6);
        assert_eq!(axis[46], 4.7);
    }

    #[test]
    fn all_failures_is_an_error() {
        let config = SimConfig {
            reps: 2,
            ..SimConfig::default()
        };
        let truth = config.truth().unwrap();
        let outcomes = vec![Replication::Failed("x".into()), Replication::Failed("y".into())];
        assert!(matches!(
            aggregate(&config, &truth, &outcomes),
            Err(Error::AllReplicationsFailed { reps: 2 })
        ));
    }
}
