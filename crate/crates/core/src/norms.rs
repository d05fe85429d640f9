//! Vector box theta-norms.
//!
//! For a box set `Θ = {θ ∈ [a, b]^d : Σ θ_i ≤ c}` the norm is
//!
//! ```text
//! ‖w‖_Θ² = min_{θ ∈ Θ} Σ_i w_i² / θ_i
//! ```
//!
//! The minimizer is a clamp of `α|w_i|` to `[a, b]`, with `α` chosen so the
//! clamped values spend the budget `c`. The budget function
//! `S(α) = Σ_i clamp(α|w_i| − λ, a, b)` is piecewise linear and non-decreasing
//! with at most `2d` breakpoints, so `α` is found by a binary search over the
//! sorted breakpoints followed by one linear solve on the bracketing segment.
//! The same routine with `λ > 0` drives the proximity operator in
//! [`crate::prox`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when checking `d·a ≤ c ≤ d·b`.
const FEASIBILITY_SLACK: f64 = 1e-12;

/// Parameters `(a, b, c)` of the box constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxParams {
    a: f64,
    b: f64,
    c: f64,
}

impl BoxParams {
    /// Requires `0 < a < b` and `c > 0`. Feasibility against a dimension is
    /// checked separately with [`BoxParams::check`].
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "box parameters must be finite, got a={a}, b={b}, c={c}"
            )));
        }
        if !(a > 0.0 && a < b) {
            return Err(Error::InvalidParams(format!(
                "box parameters require 0 < a < b, got a={a}, b={b}"
            )));
        }
        if c <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "budget c must be positive, got {c}"
            )));
        }
        Ok(Self { a, b, c })
    }

    /// Box parameters with budget `c = (b − a)·k + d·a`, the cluster-norm
    /// parameterization. `k` may be fractional.
    pub fn with_rank(a: f64, b: f64, k: f64, d: usize) -> Result<Self> {
        let c = (b - a) * k + d as f64 * a;
        let p = Self::new(a, b, c)?;
        p.check(d)?;
        Ok(p)
    }

    /// The `a → 0, b = 1, c = k` limit that yields the k-support norm. Only the
    /// prox path accepts `a = 0`, so this stays crate-private.
    pub(crate) fn ksupport_limit(k: usize) -> Self {
        Self {
            a: 0.0,
            b: 1.0,
            c: k as f64,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Checks `d·a ≤ c ≤ d·b`.
    pub fn check(&self, d: usize) -> Result<()> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let lower = d as f64 * self.a;
        let upper = d as f64 * self.b;
        let tol = FEASIBILITY_SLACK * upper;
        if self.c < lower - tol || self.c > upper + tol {
            return Err(Error::InfeasibleBudget {
                c: self.c,
                lower,
                upper,
            });
        }
        Ok(())
    }

    /// Budget clamped into `[d·a, d·b]`, absorbing the slack allowed by `check`.
    fn budget(&self, d: usize) -> f64 {
        self.c.clamp(d as f64 * self.a, d as f64 * self.b)
    }

    /// `ρ = (c − d·a)/(b − a)`, in `[0, d]`.
    pub fn rho(&self, d: usize) -> f64 {
        ((self.budget(d) - d as f64 * self.a) / (self.b - self.a)).clamp(0.0, d as f64)
    }

    /// `k = ⌊ρ⌋`.
    pub fn k(&self, d: usize) -> usize {
        (self.rho(d).floor() as usize).min(d)
    }
}

/// Parameter `k` of the k-support norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSupportParams {
    k: usize,
}

impl KSupportParams {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParams("k-support norm requires k ≥ 1".into()));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn check(&self, d: usize) -> Result<()> {
        if self.k > d {
            return Err(Error::InvalidParams(format!(
                "k-support norm requires 1 ≤ k ≤ d, got k={} with d={d}",
                self.k
            )));
        }
        Ok(())
    }
}

/// Either member of the norm family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormParams {
    Box(BoxParams),
    KSupport(KSupportParams),
}

impl NormParams {
    pub fn check(&self, d: usize) -> Result<()> {
        match self {
            NormParams::Box(p) => p.check(d),
            NormParams::KSupport(p) => p.check(d),
        }
    }
}

impl From<BoxParams> for NormParams {
    fn from(p: BoxParams) -> Self {
        NormParams::Box(p)
    }
}

impl From<KSupportParams> for NormParams {
    fn from(p: KSupportParams) -> Self {
        NormParams::KSupport(p)
    }
}

/// Magnitudes of a vector sorted non-increasing, with the map back to the
/// original order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedAbs {
    /// `|w|` sorted non-increasing.
    pub values: Vec<f64>,
    /// `permutation[i]` is the original index of `values[i]`.
    pub permutation: Vec<usize>,
    /// `±1` per original entry (original order); `-0.0` maps to `-1`.
    pub signs: Vec<f64>,
}

impl SortedAbs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of non-zero magnitudes. They form a prefix of `values`.
    pub fn nonzero(&self) -> usize {
        self.values.partition_point(|&v| v > 0.0)
    }

    /// Rebuilds the original vector.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.unsort(&self.values, true)
    }

    /// Scatters a vector given in sorted order back to the original order,
    /// optionally re-applying the original signs.
    pub fn unsort(&self, sorted: &[f64], with_signs: bool) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (i, &orig) in self.permutation.iter().enumerate() {
            out[orig] = if with_signs {
                self.signs[orig] * sorted[i]
            } else {
                sorted[i]
            };
        }
        out
    }
}

/// Sorts `|w|` non-increasing; ties keep the original index order.
pub fn sort_abs(w: &[f64]) -> Result<SortedAbs> {
    if w.is_empty() {
        return Err(Error::InvalidInput(
            "vector must have at least one entry".into(),
        ));
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "entry {i} is not finite ({})",
            w[i]
        )));
    }
    // Sorting contiguous pairs keeps large inputs cache friendly.
    let mut pairs: Vec<(f64, usize)> = w.iter().enumerate().map(|(i, x)| (x.abs(), i)).collect();
    pairs.sort_unstable_by(|p, q| q.0.total_cmp(&p.0).then(p.1.cmp(&q.1)));
    let (values, permutation) = pairs.into_iter().unzip();
    let signs = w
        .iter()
        .map(|x| if x.is_sign_negative() { -1.0 } else { 1.0 })
        .collect();
    Ok(SortedAbs {
        values,
        permutation,
        signs,
    })
}

/// An optimal `θ` together with its partition certificate.
///
/// `theta` is stored in the sorted order of the input magnitudes: the first `q`
/// entries equal `b`, the last `ell` equal `a`, the rest are interior.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaAssignment {
    pub theta: Vec<f64>,
    pub q: usize,
    pub ell: usize,
    /// Root of `S(α) = c`. Infinite when the budget constraint is slack.
    pub alpha: f64,
    /// Original index of each sorted position.
    pub order: Vec<usize>,
}

impl ThetaAssignment {
    /// `θ` in the order of the original input vector.
    pub fn theta_original(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.theta.len()];
        for (i, &orig) in self.order.iter().enumerate() {
            out[orig] = self.theta[i];
        }
        out
    }

    /// Budget left for the interior block, `p = c − q·b − ℓ·a`.
    pub fn interior_budget(&self, p: &BoxParams) -> f64 {
        p.c - self.q as f64 * p.b - self.ell as f64 * p.a
    }

    pub fn sum(&self) -> f64 {
        self.theta.iter().sum()
    }
}

/// Budget function `S(α) = Σ_i clamp(α|w_i| − λ, a, b)`.
///
/// `lambda = 0` is the norm case, `lambda > 0` the prox case.
pub fn s_alpha(alpha: f64, absw: &SortedAbs, p: &BoxParams, lambda: f64) -> f64 {
    budget_sum(&absw.values, alpha, p.a, p.b, lambda)
}

fn budget_sum(values: &[f64], alpha: f64, a: f64, b: f64, lambda: f64) -> f64 {
    values
        .iter()
        .map(|&v| (alpha * v - lambda).clamp(a, b))
        .sum()
}

/// Solves `S(α) = c` for strictly positive sorted magnitudes.
///
/// Returns the root and the assignment. Zero magnitudes must be removed by the
/// caller; [`optimal_theta`] does that reduction.
pub fn solve_alpha(absw: &SortedAbs, p: &BoxParams, lambda: f64) -> Result<(f64, ThetaAssignment)> {
    let d = absw.len();
    if d == 0 {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite and ≥ 0, got {lambda}"
        )));
    }
    if absw.values.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput(
            "solve_alpha requires strictly positive magnitudes".into(),
        ));
    }
    let (lower, upper) = (d as f64 * p.a, d as f64 * p.b);
    let tol = FEASIBILITY_SLACK * upper;
    if p.c < lower - tol || p.c > upper + tol {
        return Err(Error::InfeasibleBudget {
            c: p.c,
            lower,
            upper,
        });
    }
    let budget = p.c.clamp(lower, upper);
    let (alpha, theta) = if budget >= upper {
        saturated(&absw.values, p.b, lambda, false)
    } else {
        solve_budget(&absw.values, p.a, p.b, budget, lambda)
    };
    let asg = certify(theta, alpha, absw.permutation.clone(), p);
    Ok((alpha, asg))
}

/// Optimal `θ` for `|w|` under `p`, for the norm (`lambda = 0`) or the prox
/// of the squared norm (`lambda > 0`).
///
/// Zero magnitudes get `θ = a` and the remaining problem is solved with budget
/// `c − (#zeros)·a`; when that budget reaches `(#nonzeros)·b` every non-zero
/// component sits at `b`.
pub fn optimal_theta(absw: &SortedAbs, p: &BoxParams, lambda: f64) -> Result<ThetaAssignment> {
    let d = absw.len();
    p.check(d)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda must be finite and ≥ 0, got {lambda}"
        )));
    }
    let n = absw.nonzero();
    let budget = p.budget(d) - (d - n) as f64 * p.a;
    let (alpha, mut theta) = if n == 0 {
        (f64::INFINITY, Vec::new())
    } else if budget >= n as f64 * p.b {
        saturated(&absw.values[..n], p.b, lambda, budget > n as f64 * p.b)
    } else {
        solve_budget(
            &absw.values[..n],
            p.a,
            p.b,
            budget.max(n as f64 * p.a),
            lambda,
        )
    };
    theta.resize(d, p.a);
    Ok(certify(theta, alpha, absw.permutation.clone(), p))
}

/// All components at `b`. `alpha` is the smallest root when the budget is
/// exactly spent and infinite when it is slack.
fn saturated(values: &[f64], b: f64, lambda: f64, slack: bool) -> (f64, Vec<f64>) {
    let alpha = if slack {
        f64::INFINITY
    } else {
        (b + lambda) / values[values.len() - 1]
    };
    (alpha, vec![b; values.len()])
}

/// Core root finder. `values` is non-increasing and strictly positive and
/// `n·a ≤ budget < n·b`.
fn solve_budget(values: &[f64], a: f64, b: f64, budget: f64, lambda: f64) -> (f64, Vec<f64>) {
    let n = values.len();
    // Both breakpoint families are ascending because `values` is descending.
    let lower: Vec<f64> = values.iter().map(|&v| (a + lambda) / v).collect();
    let upper: Vec<f64> = values.iter().map(|&v| (b + lambda) / v).collect();
    let breakpoints = merge_dedup(&lower, &upper);

    if budget <= n as f64 * a {
        return (lower[0], vec![a; n]);
    }
    // Invariant S(breakpoints[lo]) < budget ≤ S(breakpoints[hi]); the root is
    // the smallest α reaching the budget, i.e. the left end of a flat stretch.
    let (mut lo, mut hi) = (0, breakpoints.len() - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if budget_sum(values, breakpoints[mid], a, b, lambda) >= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (alpha_lo, alpha_hi) = (breakpoints[lo], breakpoints[hi]);

    // On (alpha_lo, alpha_hi) no component changes regime, so S is affine
    // there and the root follows from one linear equation.
    let q = upper.partition_point(|&u| u <= alpha_lo);
    let l_start = lower.partition_point(|&l| l < alpha_hi).max(q);
    let interior = &values[q..l_start];
    let interior_sum: f64 = interior.iter().sum();
    let alpha = if interior.is_empty() || interior_sum <= 0.0 {
        alpha_lo
    } else {
        let fixed = q as f64 * b + (n - l_start) as f64 * a;
        ((budget - fixed + interior.len() as f64 * lambda) / interior_sum).clamp(alpha_lo, alpha_hi)
    };

    let mut theta = Vec::with_capacity(n);
    theta.extend(std::iter::repeat(b).take(q));
    theta.extend(interior.iter().map(|&v| (alpha * v - lambda).clamp(a, b)));
    theta.extend(std::iter::repeat(a).take(n - l_start));
    (alpha, theta)
}

fn merge_dedup(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let next = if j == y.len() || (i < x.len() && x[i] <= y[j]) {
            i += 1;
            x[i - 1]
        } else {
            j += 1;
            y[j - 1]
        };
        if out.last().map_or(true, |&last| next > last) {
            out.push(next);
        }
    }
    out
}

fn certify(theta: Vec<f64>, alpha: f64, order: Vec<usize>, p: &BoxParams) -> ThetaAssignment {
    let q = theta.iter().take_while(|&&t| t == p.b).count();
    let ell = theta
        .iter()
        .rev()
        .take_while(|&&t| t == p.a)
        .count()
        .min(theta.len() - q);
    ThetaAssignment {
        theta,
        q,
        ell,
        alpha,
        order,
    }
}

/// Box theta-norm of `w` and the optimal `θ`.
///
/// The value is evaluated from the partition `(Q, I, L)`:
/// `‖w_Q‖²/b + ‖w_I‖₁²/p + ‖w_L‖²/a` with `p = c − q·b − ℓ·a`.
pub fn theta_norm(w: &[f64], p: &BoxParams) -> Result<(f64, ThetaAssignment)> {
    let sorted = sort_abs(w)?;
    let asg = optimal_theta(&sorted, p, 0.0)?;
    let value = partition_value(&sorted.values, &asg, p);
    Ok((value, asg))
}

fn partition_value(values: &[f64], asg: &ThetaAssignment, p: &BoxParams) -> f64 {
    let d = values.len();
    let (head, rest) = values.split_at(asg.q);
    let (mid, tail) = rest.split_at(d - asg.q - asg.ell);
    let head_sq: f64 = head.iter().map(|v| v * v).sum::<f64>() / p.b;
    let tail_sq: f64 = tail.iter().map(|v| v * v).sum::<f64>() / p.a;
    let mid_l1: f64 = mid.iter().sum();
    let budget = asg.interior_budget(p);
    let mid_sq = if mid_l1 == 0.0 {
        0.0
    } else if budget > 0.0 {
        mid_l1 * mid_l1 / budget
    } else {
        // Degenerate rounding: fall back to the direct objective.
        mid.iter()
            .zip(&asg.theta[asg.q..d - asg.ell])
            .map(|(v, t)| v * v / t)
            .sum()
    };
    (head_sq + mid_sq + tail_sq).sqrt()
}

/// `sqrt(Σ w_i²/θ_i)` for a given `θ` (both in the same order).
pub fn quadratic_objective(w: &[f64], theta: &[f64]) -> f64 {
    w.iter()
        .zip(theta)
        .map(|(x, t)| if *x == 0.0 { 0.0 } else { x * x / t })
        .sum::<f64>()
        .sqrt()
}

/// Dual of the box theta-norm:
/// `sqrt(a‖u‖² + (b − a)[Σ_{j≤k} (|u|↓_j)² + (ρ − k)(|u|↓_{k+1})²])`.
pub fn theta_dual_norm(u: &[f64], p: &BoxParams) -> Result<f64> {
    let sorted = sort_abs(u)?;
    let d = sorted.len();
    p.check(d)?;
    let rho = p.rho(d);
    let k = p.k(d);
    let sq: Vec<f64> = sorted.values.iter().map(|v| v * v).collect();
    let total: f64 = sq.iter().sum();
    let mut top: f64 = sq[..k].iter().sum();
    if k < d {
        top += (rho - k as f64) * sq[k];
    }
    Ok((p.a * total + (p.b - p.a) * top).sqrt())
}

/// k-support norm.
///
/// `‖w‖²_(k) = Σ_{j≤q} (|w|↓_j)² + (Σ_{j>q} |w|↓_j)²/(k − q)` where `q` is the
/// first index in `0..k` with `|w|↓_q ≥ Σ_{j>q}|w|↓_j/(k − q) ≥ |w|↓_{q+1}`
/// (1-based, `|w|↓_0 = ∞`).
pub fn ksupport_norm(w: &[f64], k: usize) -> Result<f64> {
    let params = KSupportParams::new(k)?;
    let sorted = sort_abs(w)?;
    params.check(sorted.len())?;
    let v = &sorted.values;
    let d = v.len();

    // suffix[j] = Σ_{i ≥ j} v_i, accumulated from the small end.
    let mut suffix = vec![0.0; d + 1];
    for j in (0..d).rev() {
        suffix[j] = suffix[j + 1] + v[j];
    }

    let pick = |slack: f64| -> Option<usize> {
        (0..k).find(|&q| {
            let avg = suffix[q] / (k - q) as f64;
            let prev = if q == 0 { f64::INFINITY } else { v[q - 1] };
            suffix[q] == 0.0 || (prev * (1.0 + slack) >= avg && avg * (1.0 + slack) >= v[q])
        })
    };
    // Exact comparison first; rounding under heavy ties may need a hair of slack.
    let q = pick(0.0).or_else(|| pick(1e-12)).ok_or_else(|| {
        Error::Numerical("no partition index satisfies the k-support optimality conditions".into())
    })?;
    let head: f64 = v[..q].iter().map(|x| x * x).sum();
    let tail = suffix[q];
    Ok((head + tail * tail / (k - q) as f64).sqrt())
}

/// Dispatches to [`theta_norm`] or [`ksupport_norm`].
pub fn norm(w: &[f64], params: &NormParams) -> Result<f64> {
    match params {
        NormParams::Box(p) => theta_norm(w, p).map(|(v, _)| v),
        NormParams::KSupport(p) => ksupport_norm(w, p.k()),
    }
}

/// Dual norm for either family. The k-support dual is the ℓ2 norm of the
/// `k` largest magnitudes.
pub fn dual_norm(u: &[f64], params: &NormParams) -> Result<f64> {
    match params {
        NormParams::Box(p) => theta_dual_norm(u, p),
        NormParams::KSupport(p) => {
            let sorted = sort_abs(u)?;
            p.check(sorted.len())?;
            Ok(sorted.values[..p.k()]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    fn bp(a: f64, b: f64, c: f64) -> BoxParams {
        BoxParams::new(a, b, c).unwrap()
    }

    #[test]
    fn sort_abs_orders_and_records_signs() {
        let s = sort_abs(&[-3.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(s.signs, vec![-1.0, 1.0, 1.0]);
        assert_eq!(s.permutation, vec![0, 2, 1]);
        assert_eq!(s.reconstruct(), vec![-3.0, 1.0, 2.0]);
    }

    #[test]
    fn sort_abs_zero_and_ties() {
        assert_eq!(sort_abs(&[0.0, 0.0]).unwrap().values, vec![0.0, 0.0]);
        let s = sort_abs(&[5.0, 5.0]).unwrap();
        assert_eq!(s.values, vec![5.0, 5.0]);
        assert_eq!(s.permutation, vec![0, 1]);
    }

    #[test]
    fn sort_abs_rejects_non_finite() {
        assert!(matches!(
            sort_abs(&[1.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            sort_abs(&[f64::INFINITY]),
            Err(Error::InvalidInput(_))
        ));
        assert!(sort_abs(&[]).is_err());
    }

    #[test]
    fn box_params_validation() {
        assert!(BoxParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BoxParams::new(1.0, 1.0, 1.0).is_err());
        assert!(BoxParams::new(0.5, 0.4, 1.0).is_err());
        let p = bp(0.5, 1.0, 1.5);
        assert!(p.check(2).is_ok());
        assert!(matches!(p.check(4), Err(Error::InfeasibleBudget { .. })));
        assert!(matches!(p.check(1), Err(Error::InfeasibleBudget { .. })));
        assert_eq!(p.rho(2), 1.0);
        assert_eq!(p.k(2), 1);
    }

    #[test]
    fn s_alpha_extremes_and_example() {
        let s = sort_abs(&[2.0, 1.0]).unwrap();
        let p = bp(0.1, 1.0, 1.1);
        assert_eq!(s_alpha(1e-3, &s, &p, 0.0), 0.2);
        assert_eq!(s_alpha(1e3, &s, &p, 0.0), 2.0);
        assert!(close(s_alpha(0.4, &s, &p, 0.0), 1.2, 1e-15));
        // Cross-check on a fine grid that S is non-decreasing.
        let mut prev = 0.0;
        for i in 0..2000 {
            let v = s_alpha(i as f64 * 1e-3, &s, &p, 0.3);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn solve_alpha_symmetric() {
        let s = sort_abs(&[1.0, 1.0]).unwrap();
        let (alpha, asg) = solve_alpha(&s, &bp(0.5, 1.0, 1.5), 0.0).unwrap();
        assert!(close(alpha, 0.75, 1e-14));
        assert!(close(asg.theta[0], 0.75, 1e-14) && close(asg.theta[1], 0.75, 1e-14));
    }

    #[test]
    fn solve_alpha_interior_example() {
        let s = sort_abs(&[2.0, 1.0]).unwrap();
        let (alpha, asg) = solve_alpha(&s, &bp(0.1, 1.0, 1.1), 0.0).unwrap();
        assert!(close(alpha, 1.1 / 3.0, 1e-14));
        assert!(close(asg.theta[0], 2.2 / 3.0, 1e-14));
        assert!(close(asg.theta[1], 1.1 / 3.0, 1e-14));
        assert_eq!((asg.q, asg.ell), (0, 0));
    }

    #[test]
    fn solve_alpha_prox_example() {
        let s = sort_abs(&[2.0, 1.0]).unwrap();
        let (alpha, asg) = solve_alpha(&s, &bp(0.1, 1.0, 1.1), 0.5).unwrap();
        assert!(close(alpha, 0.7, 1e-14));
        assert!(close(asg.theta[0], 0.9, 1e-14));
        assert!(close(asg.theta[1], 0.2, 1e-14));
    }

    #[test]
    fn solve_alpha_rejects_infeasible_and_zeros() {
        let s = sort_abs(&[2.0, 1.0]).unwrap();
        assert!(matches!(
            solve_alpha(&s, &bp(0.1, 1.0, 3.0), 0.0),
            Err(Error::InfeasibleBudget { .. })
        ));
        let z = sort_abs(&[2.0, 0.0]).unwrap();
        assert!(solve_alpha(&z, &bp(0.1, 1.0, 1.1), 0.0).is_err());
    }

    #[test]
    fn theta_norm_examples() {
        let (v, asg) = theta_norm(&[3.0, 4.0], &bp(0.5, 1.0, 2.0)).unwrap();
        assert!(close(v, 5.0, 1e-15));
        assert_eq!(asg.theta, vec![1.0, 1.0]);
        let (v, _) = theta_norm(&[1.0, 1.0], &bp(0.5, 1.0, 1.5)).unwrap();
        assert!(close(v, (8.0f64 / 3.0).sqrt(), 1e-14));
        let (v, _) = theta_norm(&[2.0, 1.0], &bp(0.1, 1.0, 1.1)).unwrap();
        assert!(close(v, (9.0f64 / 1.1).sqrt(), 1e-14));
    }

    #[test]
    fn theta_norm_saturated_general_b() {
        // θ = b everywhere, so the value is ‖w‖/√b.
        let (v, _) = theta_norm(&[3.0, 4.0], &bp(0.2, 0.5, 1.0)).unwrap();
        assert!(close(v, 5.0 / 0.5f64.sqrt(), 1e-14));
    }

    #[test]
    fn theta_norm_zero_components() {
        let p = bp(0.1, 1.0, 1.2);
        let (v, asg) = theta_norm(&[0.0, 2.0, 0.0], &p).unwrap();
        // Reduced problem: one non-zero with budget 1.0 saturates at b.
        assert!(close(v, 2.0, 1e-15));
        assert_eq!(asg.theta_original(), vec![0.1, 1.0, 0.1]);
        let (v, asg) = theta_norm(&[0.0, 0.0], &bp(0.5, 1.0, 1.5)).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(asg.theta, vec![0.5, 0.5]);
        assert!(asg.alpha.is_infinite());
    }

    #[test]
    fn theta_norm_rejects_infeasible() {
        assert!(theta_norm(&[1.0, 2.0, 3.0], &bp(0.5, 1.0, 1.0)).is_err());
    }

    #[test]
    fn dual_examples() {
        let p = bp(0.5, 1.0, 1.5);
        assert_eq!(theta_dual_norm(&[0.0, 0.0], &p).unwrap(), 0.0);
        assert!(close(theta_dual_norm(&[1.0, 0.0], &p).unwrap(), 1.0, 1e-15));
        assert!(close(
            theta_dual_norm(&[1.0, 1.0], &p).unwrap(),
            1.5f64.sqrt(),
            1e-15
        ));
        let p3 = bp(0.1, 1.0, 1.2);
        assert!(close(
            theta_dual_norm(&[1.0, 1.0, 1.0], &p3).unwrap(),
            1.2f64.sqrt(),
            1e-12
        ));
    }

    #[test]
    fn ksupport_examples() {
        let w = [3.0, -2.0, 1.0];
        assert_eq!(ksupport_norm(&w, 1).unwrap(), 6.0);
        assert!(close(ksupport_norm(&w, 3).unwrap(), 14f64.sqrt(), 1e-15));
        assert!(close(ksupport_norm(&w, 2).unwrap(), 18f64.sqrt(), 1e-15));
        assert!(close(
            ksupport_norm(&[1.0, 0.0, 0.0], 2).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            ksupport_norm(&[1.0, 1.0], 2).unwrap(),
            2f64.sqrt(),
            1e-15
        ));
        assert!(matches!(ksupport_norm(&w, 4), Err(Error::InvalidParams(_))));
        assert!(matches!(ksupport_norm(&w, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn ksupport_k_equals_d_with_ties() {
        let w = [2.0, 2.0, 2.0, 1.0];
        assert!(close(ksupport_norm(&w, 4).unwrap(), 13f64.sqrt(), 1e-15));
        // q = 0: the averaged tail 7/3 exceeds every entry.
        assert!(close(
            ksupport_norm(&w, 3).unwrap(),
            (49.0f64 / 3.0).sqrt(),
            1e-15
        ));
        assert!(close(ksupport_norm(&[2.0, 2.0], 1).unwrap(), 4.0, 1e-15));
    }

    #[test]
    fn merge_dedup_is_sorted_unique() {
        assert_eq!(
            merge_dedup(&[1.0, 2.0, 4.0], &[2.0, 3.0, 5.0]),
            vec![1.0, 2.0, 3.0, 4.0, 5.0]
        );
    }
}
