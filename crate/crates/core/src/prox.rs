//! Proximity operators of the squared box theta-norm and the squared k-support
//! norm.
//!
//! `prox(w) = argmin_x ½‖x − w‖² + (λ/2)‖x‖²`. The minimizer is
//! `x_i = θ_i w_i/(θ_i + λ)` where `θ_i = clamp(α|w_i| − λ, a, b)` and `α`
//! spends the budget, so the work is one call to the root finder in
//! [`crate::norms`] with shifted breakpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{
    optimal_theta, sort_abs, BoxParams, KSupportParams, NormParams, ThetaAssignment,
};

/// A prox evaluation: point, scale of the squared norm and the norm itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxRequest {
    pub w: Vec<f64>,
    pub lambda: f64,
    pub params: NormParams,
}

impl ProxRequest {
    pub fn new(w: Vec<f64>, lambda: f64, params: impl Into<NormParams>) -> Self {
        Self {
            w,
            lambda,
            params: params.into(),
        }
    }

    pub fn eval(&self) -> Result<Vec<f64>> {
        prox_sq(&self.w, self.lambda, &self.params)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "lambda must be finite and > 0, got {lambda}"
        )))
    }
}

/// Prox of `(λ/2)‖·‖²_Θ` for a box set, returning the point and the optimal `θ`.
pub fn prox_sq_theta_with_theta(
    w: &[f64],
    lambda: f64,
    p: &BoxParams,
) -> Result<(Vec<f64>, ThetaAssignment)> {
    check_lambda(lambda)?;
    let sorted = sort_abs(w)?;
    let asg = optimal_theta(&sorted, p, lambda)?;
    Ok((apply_theta(w, &asg, lambda), asg))
}

/// Prox of `(λ/2)‖·‖²_Θ` for a box set.
pub fn prox_sq_theta(w: &[f64], lambda: f64, p: &BoxParams) -> Result<Vec<f64>> {
    prox_sq_theta_with_theta(w, lambda, p).map(|(x, _)| x)
}

/// Prox of `(λ/2)‖·‖²_(k)`, the box construction with `a = 0, b = 1, c = k`.
pub fn prox_sq_ksupport(w: &[f64], lambda: f64, k: usize) -> Result<Vec<f64>> {
    prox_sq_ksupport_with_theta(w, lambda, k).map(|(x, _)| x)
}

pub fn prox_sq_ksupport_with_theta(
    w: &[f64],
    lambda: f64,
    k: usize,
) -> Result<(Vec<f64>, ThetaAssignment)> {
    check_lambda(lambda)?;
    let sorted = sort_abs(w)?;
    KSupportParams::new(k)?.check(sorted.len())?;
    let asg = optimal_theta(&sorted, &BoxParams::ksupport_limit(k), lambda)?;
    Ok((apply_theta(w, &asg, lambda), asg))
}

fn apply_theta(w: &[f64], asg: &ThetaAssignment, lambda: f64) -> Vec<f64> {
    let mut x = vec![0.0; w.len()];
    for (&orig, &t) in asg.order.iter().zip(&asg.theta) {
        x[orig] = t * w[orig] / (t + lambda);
    }
    x
}

/// Dispatches to the box or k-support prox.
pub fn prox_sq(w: &[f64], lambda: f64, params: &NormParams) -> Result<Vec<f64>> {
    match params {
        NormParams::Box(p) => prox_sq_theta(w, lambda, p),
        NormParams::KSupport(p) => prox_sq_ksupport(w, lambda, p.k()),
    }
}

/// Earlier `O(d(k + log d))` k-support prox.
///
/// With `β = 1/λ` and `z = |w|↓` (1-based, `z_0 = +∞`, `z_{d+1} = −∞`) it
/// searches `r ∈ 0..k` and `l ∈ k..=d` for the pair with
///
/// ```text
/// z_{k−r−1}/(β+1) > T/D ≥ z_{k−r}/(β+1),    z_l > T/D ≥ z_{l+1},
/// T = Σ_{i=k−r}^{l} z_i,                     D = l − k + (β+1)(r+1),
/// ```
///
/// and returns `βz_i/(β+1)` above the window, `z_i − T/D` inside it and `0`
/// below it.
pub fn prox_sq_ksupport_baseline(w: &[f64], lambda: f64, k: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let sorted = sort_abs(w)?;
    let d = sorted.len();
    KSupportParams::new(k)?.check(d)?;
    let beta = 1.0 / lambda;
    let z = &sorted.values;
    // 1-based accessors with the sentinels.
    let zi = |i: usize| -> f64 {
        if i == 0 {
            f64::INFINITY
        } else if i > d {
            f64::NEG_INFINITY
        } else {
            z[i - 1]
        }
    };
    let mut prefix = vec![0.0; d + 1];
    for i in 0..d {
        prefix[i + 1] = prefix[i] + z[i];
    }

    let search = |slack: f64| -> Option<(usize, usize, f64)> {
        let gt = |x: f64, y: f64| {
            if slack == 0.0 {
                x > y
            } else {
                x >= y - slack * (x.abs() + y.abs())
            }
        };
        let ge = |x: f64, y: f64| x >= y - slack * (x.abs() + y.abs());
        for r in 0..k {
            let start = k - r;
            let upper = zi(start - 1) / (beta + 1.0);
            let lower = zi(start) / (beta + 1.0);
            for l in k..=d {
                let t = prefix[l] - prefix[start - 1];
                let ratio = t / ((l - k) as f64 + (beta + 1.0) * (r + 1) as f64);
                if gt(upper, ratio) && ge(ratio, lower) && gt(zi(l), ratio) && ge(ratio, zi(l + 1))
                {
                    return Some((r, l, ratio));
                }
            }
        }
        None
    };
    let (r, l, ratio) = search(0.0).or_else(|| search(1e-12)).ok_or_else(|| {
        Error::Numerical("baseline k-support prox found no admissible (r, l) pair".into())
    })?;

    let start = k - r;
    let mut q = vec![0.0; d];
    for i in 1..=d {
        q[i - 1] = if i < start {
            beta * z[i - 1] / (beta + 1.0)
        } else if i <= l {
            (z[i - 1] - ratio).max(0.0)
        } else {
            0.0
        };
    }
    Ok(sorted.unsort(&q, true))
}

/// Objective `½‖x − w‖² + (λ/2)‖x‖²` for the given norm.
pub fn prox_objective(x: &[f64], w: &[f64], lambda: f64, params: &NormParams) -> Result<f64> {
    let n = crate::norms::norm(x, params)?;
    let fit: f64 = x.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(0.5 * fit + 0.5 * lambda * n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_vec(x: &[f64], y: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(y)
            .all(|(a, b)| (a - b).abs() <= tol * b.abs().max(1.0))
    }

    #[test]
    fn box_example() {
        let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
        let (x, asg) = prox_sq_theta_with_theta(&[2.0, 1.0], 0.5, &p).unwrap();
        assert!(close_vec(&x, &[9.0 / 7.0, 2.0 / 7.0], 1e-14));
        assert!(close_vec(&asg.theta, &[0.9, 0.2], 1e-14));
    }

    #[test]
    fn signs_and_order_are_restored() {
        let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
        let x = prox_sq_theta(&[-1.0, 2.0], 0.5, &p).unwrap();
        assert!(close_vec(&x, &[-2.0 / 7.0, 9.0 / 7.0], 1e-14));
    }

    #[test]
    fn zero_input() {
        let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
        assert_eq!(prox_sq_theta(&[0.0, 0.0], 0.5, &p).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            prox_sq_ksupport(&[0.0, 0.0, 0.0], 1.0, 2).unwrap(),
            vec![0.0; 3]
        );
        assert_eq!(
            prox_sq_ksupport_baseline(&[0.0, 0.0, 0.0], 1.0, 2).unwrap(),
            vec![0.0; 3]
        );
    }

    #[test]
    fn ksupport_example() {
        let (x, asg) = prox_sq_ksupport_with_theta(&[3.0, 1.0], 1.0, 1).unwrap();
        assert!(close_vec(&x, &[1.5, 0.0], 1e-15));
        assert_eq!(asg.theta, vec![1.0, 0.0]);
        assert!((asg.alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!(close_vec(
            &prox_sq_ksupport_baseline(&[3.0, 1.0], 1.0, 1).unwrap(),
            &[1.5, 0.0],
            1e-15
        ));
    }

    #[test]
    fn ksupport_full_rank_is_ridge() {
        let w = [3.0, -1.0, 0.5, 2.0];
        let expect: Vec<f64> = w.iter().map(|x| x / 1.7).collect();
        assert!(close_vec(
            &prox_sq_ksupport(&w, 0.7, 4).unwrap(),
            &expect,
            1e-15
        ));
        assert!(close_vec(
            &prox_sq_ksupport_baseline(&w, 0.7, 4).unwrap(),
            &expect,
            1e-14
        ));
    }

    #[test]
    fn small_lambda_returns_input() {
        let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
        let x = prox_sq_theta(&[2.0, -1.0], 1e-12, &p).unwrap();
        assert!(close_vec(&x, &[2.0, -1.0], 1e-10));
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = BoxParams::new(0.1, 1.0, 1.1).unwrap();
        assert!(matches!(
            prox_sq_theta(&[1.0], 0.5, &p),
            Err(Error::InfeasibleBudget { .. })
        ));
        assert!(matches!(
            prox_sq_theta(&[1.0, 2.0], 0.0, &p),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            prox_sq_ksupport(&[1.0, 2.0], 1.0, 3),
            Err(Error::InvalidParams(_))
        ));
        assert!(matches!(
            prox_sq_ksupport_baseline(&[1.0, 2.0], 1.0, 0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn request_dispatch() {
        let req = ProxRequest::new(vec![3.0, 1.0], 1.0, KSupportParams::new(1).unwrap());
        assert!(close_vec(&req.eval().unwrap(), &[1.5, 0.0], 1e-15));
    }
}
