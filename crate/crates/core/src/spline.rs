//! M-spline, I-spline and normalized B-spline bases on a bounded interval.
//!
//! All evaluators take a raw nondecreasing knot slice `u` and an `order`
//! `k` (polynomial degree `k - 1` for M- and B-splines). There are
//! `u.len() - k` basis functions at order `k`, indexed from 0.
//!
//! The I-spline of index `i` at order `k` is the tail sum of the order-`k`
//! B-splines,
//!
//! ```text
//! I_i(s) = sum_{m >= i} N_m(s) = sum_{m=i}^{j} (u[m+k] - u[m]) M_m(s) / k,   u[j] <= s < u[j+1],
//! ```
//!
//! with `I_i = 1` when `i < j - k + 1` and `I_i = 0` when `i > j`. It is a
//! nondecreasing piecewise polynomial of degree `k - 1`, so "cubic I-splines"
//! use `order = 4`. On a [`KnotVector`] with `k`-fold boundary knots the first
//! I-spline is identically one and every other one rises from 0 at `L` to 1
//! at `U`.
//!
//! Spans are half-open `[u[j], u[j+1])`; at the right end of the knot range
//! the last nonempty span is used, so every basis takes its left limit there.
//! Recursion terms with a zero denominator (repeated knots) are zero.

use crate::error::{invalid, Result};

/// Linear interpolation between adjacent order statistics (the
/// "type 7" sample quantile). `sorted` must be nonempty and sorted.
pub fn quantile_sorted(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Index `j` of the nonempty span `[u[j], u[j+1])` containing `s`.
///
/// `s` equal to the last knot maps to the last nonempty span. Returns `None`
/// when `s` lies outside the knot range or every span is empty.
pub fn find_span(u: &[f64], s: f64) -> Option<usize> {
    let (first, last) = (*u.first()?, *u.last()?);
    if !(first..=last).contains(&s) || first == last {
        return None;
    }
    if s == last {
        return (0..u.len() - 1).rev().find(|&j| u[j] < u[j + 1]);
    }
    // number of knots <= s, minus one
    let j = u.partition_point(|&x| x <= s) - 1;
    Some(j)
}

fn check_order(u: &[f64], order: usize) -> Result<usize> {
    if order == 0 {
        return Err(invalid("spline order must be at least 1"));
    }
    if u.len() <= order {
        return Err(invalid(format!(
            "{} knots support no basis function of order {order}",
            u.len()
        )));
    }
    if u.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(invalid("knot sequence must be nondecreasing"));
    }
    Ok(u.len() - order)
}

fn check_index(count: usize, i: usize) -> Result<()> {
    if i >= count {
        return Err(invalid(format!("basis index {i} out of range 0..{count}")));
    }
    Ok(())
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// All order-`order` M-splines at `s`, via the two-term M-spline recursion.
pub fn mspline_all(u: &[f64], order: usize, s: f64) -> Result<Vec<f64>> {
    let count = check_order(u, order)?;
    let mut vals = vec![0.0; u.len() - 1];
    let Some(j) = find_span(u, s) else {
        vals.truncate(count);
        return Ok(vals);
    };
    vals[j] = 1.0 / (u[j + 1] - u[j]);
    for r in 2..=order {
        let r_f = r as f64;
        for i in 0..u.len() - r {
            let left = (s - u[i]) * vals[i];
            let right = (u[i + r] - s) * vals[i + 1];
            vals[i] = ratio(r_f * (left + right), (r_f - 1.0) * (u[i + r] - u[i]));
        }
        vals.truncate(u.len() - r);
    }
    Ok(vals)
}

/// All order-`order` normalized B-splines at `s` (Cox-de Boor recursion).
pub fn bspline_all(u: &[f64], order: usize, s: f64) -> Result<Vec<f64>> {
    let count = check_order(u, order)?;
    let mut vals = vec![0.0; u.len() - 1];
    let Some(j) = find_span(u, s) else {
        vals.truncate(count);
        return Ok(vals);
    };
    vals[j] = 1.0;
    for r in 2..=order {
        for i in 0..u.len() - r {
            let left = ratio(s - u[i], u[i + r - 1] - u[i]) * vals[i];
            let right = ratio(u[i + r] - s, u[i + r] - u[i + 1]) * vals[i + 1];
            vals[i] = left + right;
        }
        vals.truncate(u.len() - r);
    }
    Ok(vals)
}

/// All order-`order` I-splines at `s`, built from M-splines of the same
/// order. `s` is clamped to the knot range first.
pub fn ispline_all(u: &[f64], order: usize, s: f64) -> Result<Vec<f64>> {
    let count = check_order(u, order)?;
    let s = s.clamp(u[0], u[u.len() - 1]);
    let Some(j) = find_span(u, s) else {
        return Err(invalid("knot sequence has no nonempty span"));
    };
    let m = mspline_all(u, order, s)?;
    let k = order as f64;
    let mut out = vec![0.0; count];
    // out[i] = sum_{m=i}^{min(j, count-1)} (u[m+k]-u[m]) M_m / k for i in the active band
    let top = j.min(count - 1);
    let band_lo = (j + 1).saturating_sub(order);
    let mut acc = 0.0;
    for i in (0..count).rev() {
        if i > j {
            out[i] = 0.0;
        } else if i < band_lo {
            out[i] = 1.0;
        } else {
            if i <= top {
                acc += (u[i + order] - u[i]) * m[i] / k;
            }
            // rounding can push the accumulated sum past one
            out[i] = acc.min(1.0);
        }
    }
    Ok(out)
}

/// Order-`order` M-spline `i` at `s`.
pub fn mspline(u: &[f64], order: usize, i: usize, s: f64) -> Result<f64> {
    let count = check_order(u, order)?;
    check_index(count, i)?;
    Ok(mspline_all(u, order, s)?[i])
}

/// Order-`order` normalized B-spline `i` at `s`.
pub fn bspline(u: &[f64], order: usize, i: usize, s: f64) -> Result<f64> {
    let count = check_order(u, order)?;
    check_index(count, i)?;
    Ok(bspline_all(u, order, s)?[i])
}

/// Order-`order` I-spline `i` at `s`.
pub fn ispline(u: &[f64], order: usize, i: usize, s: f64) -> Result<f64> {
    let count = check_order(u, order)?;
    check_index(count, i)?;
    Ok(ispline_all(u, order, s)?[i])
}

/// Extended knot sequence on `[lower, upper]` with `order`-fold boundary
/// knots and strictly increasing interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    order: usize,
    lower: f64,
    upper: f64,
    interior: Vec<f64>,
    extended: Vec<f64>,
    collapsed: usize,
}

impl KnotVector {
    pub fn new(order: usize, lower: f64, upper: f64, interior: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(invalid("order must be at least 1"));
        }
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(invalid(format!("need finite L < U, got [{lower}, {upper}]")));
        }
        if interior.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("interior knots must be strictly increasing"));
        }
        if interior.iter().any(|&x| !(lower < x && x < upper)) {
            return Err(invalid("interior knots must lie strictly inside (L, U)"));
        }
        let mut extended = Vec::with_capacity(interior.len() + 2 * order);
        extended.extend(std::iter::repeat_n(lower, order));
        extended.extend_from_slice(&interior);
        extended.extend(std::iter::repeat_n(upper, order));
        Ok(Self {
            order,
            lower,
            upper,
            interior,
            extended,
            collapsed: 0,
        })
    }

    /// Interior knots at the `k/(m+1)` sample quantiles, `k = 1..=m`.
    ///
    /// Tied quantiles (and quantiles on the boundary) are dropped, so the
    /// resulting `m` may be smaller than requested; see
    /// [`KnotVector::collapsed`].
    pub fn from_quantiles(
        samples: &[f64],
        m: usize,
        order: usize,
        lower: f64,
        upper: f64,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("no samples to place knots at"));
        }
        if !(lower < upper) {
            return Err(invalid(format!("need L < U, got [{lower}, {upper}]")));
        }
        if samples.iter().any(|&x| !(lower..=upper).contains(&x)) {
            return Err(invalid("samples must lie in [L, U]"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut interior: Vec<f64> = Vec::with_capacity(m);
        for k in 1..=m {
            let q = quantile_sorted(&sorted, k as f64 / (m + 1) as f64);
            if q > lower && q < upper && interior.last().is_none_or(|&last| q > last) {
                interior.push(q);
            }
        }
        let collapsed = m - interior.len();
        let mut kv = Self::new(order, lower, upper, interior)?;
        kv.collapsed = collapsed;
        Ok(kv)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn interior(&self) -> &[f64] {
        &self.interior
    }

    pub fn extended(&self) -> &[f64] {
        &self.extended
    }

    /// Number of requested interior knots dropped as duplicates.
    pub fn collapsed(&self) -> usize {
        self.collapsed
    }

    /// `m + order`.
    pub fn basis_count(&self) -> usize {
        self.interior.len() + self.order
    }

    pub fn mspline(&self, i: usize, s: f64) -> Result<f64> {
        mspline(&self.extended, self.order, i, s)
    }

    pub fn bspline(&self, i: usize, s: f64) -> Result<f64> {
        bspline(&self.extended, self.order, i, s)
    }

    pub fn ispline(&self, i: usize, s: f64) -> Result<f64> {
        ispline(&self.extended, self.order, i, s)
    }

    pub fn ispline_all(&self, s: f64) -> Vec<f64> {
        ispline_all(&self.extended, self.order, s).expect("validated knot vector")
    }
}

/// Which basis a [`BasisFamily`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    M,
    I,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFamily {
    pub knots: KnotVector,
    pub kind: BasisKind,
}

impl BasisFamily {
    pub fn new(knots: KnotVector, kind: BasisKind) -> Self {
        Self { knots, kind }
    }

    pub fn len(&self) -> usize {
        self.knots.basis_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every basis function at `s`.
    pub fn eval_all(&self, s: f64) -> Vec<f64> {
        let (u, k) = (self.knots.extended(), self.knots.order());
        let vals = match self.kind {
            BasisKind::M => mspline_all(u, k, s),
            BasisKind::I => ispline_all(u, k, s),
            BasisKind::B => bspline_all(u, k, s),
        };
        vals.expect("validated knot vector")
    }

    pub fn eval(&self, i: usize, s: f64) -> Result<f64> {
        check_index(self.len(), i)?;
        Ok(self.eval_all(s)[i])
    }
}
