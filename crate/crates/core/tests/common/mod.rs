//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use theta_norms::BoxParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Feasible box parameters for dimension `d` with `c` uniform in `[da, db]`.
pub fn random_box(rng: &mut ChaCha8Rng, d: usize) -> BoxParams {
    let a = rng.random_range(0.01..1.0);
    let b = a + rng.random_range(0.1..2.0);
    let c = rng.random_range(d as f64 * a..=d as f64 * b);
    BoxParams::new(a, b, c).unwrap()
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, n).qr().q()
}

/// Minimum over `x` of `½‖x − w‖² + (λ/2)‖x‖²_Θ`.
///
/// Eliminating `x_i = θ_i w_i/(θ_i + λ)` leaves `Σ ½λw_i²/(θ_i + λ)`, which is
/// convex and separable in `θ`. It is minimized over the box with budget by
/// exchanging budget between pairs of coordinates, each exchange solved
/// exactly, until no pair moves.
pub fn prox_oracle(w: &[f64], lambda: f64, p: &BoxParams) -> f64 {
    let d = w.len();
    let (a, b, c) = (p.a(), p.b(), p.c());
    let g = |t: f64, wi: f64| 0.5 * lambda * wi * wi / (t + lambda);
    let mut theta = if c >= d as f64 * b {
        vec![b; d]
    } else {
        vec![c / d as f64; d]
    };
    let full = c >= d as f64 * b;
    for _ in 0..100_000 {
        if full {
            break;
        }
        let mut moved: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                let (wi, wj) = (w[i].abs(), w[j].abs());
                if wi + wj == 0.0 {
                    continue;
                }
                let s = theta[i] + theta[j];
                let lo = a.max(s - b);
                let hi = b.min(s - a);
                if lo >= hi {
                    continue;
                }
                // Equal marginal gains: (θ_i + λ)/|w_i| = (θ_j + λ)/|w_j|.
                let t = (wi * (s + 2.0 * lambda) / (wi + wj) - lambda).clamp(lo, hi);
                if g(t, wi) + g(s - t, wj) < g(theta[i], wi) + g(theta[j], wj) {
                    moved = moved.max((t - theta[i]).abs());
                    theta[i] = t;
                    theta[j] = s - t;
                }
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    w.iter().zip(&theta).map(|(&wi, &t)| g(t, wi)).sum()
}

/// `min tr(WΣ⁻¹Wᵀ)` over `2 × 2` `Σ` with eigenvalues in `[a, b]` summing to
/// at most `c`, for `W` with two columns; returns the square root.
///
/// `Σ = R(φ) diag(t, c − t) R(φ)ᵀ`: a grid over the angle, the inner
/// eigenvalue split by ternary search, then golden-section refinement.
pub fn cluster_oracle_2col(w: &DMatrix<f64>, a: f64, b: f64, c: f64) -> f64 {
    assert_eq!(w.ncols(), 2);
    let c = c.min(2.0 * b);
    let (lo, hi) = (a.max(c - b), b.min(c - a));
    let inner = |phi: f64| -> f64 {
        let (s, co) = phi.sin_cos();
        let n1: f64 = (0..w.nrows())
            .map(|i| (w[(i, 0)] * co + w[(i, 1)] * s).powi(2))
            .sum();
        let n2: f64 = (0..w.nrows())
            .map(|i| (-w[(i, 0)] * s + w[(i, 1)] * co).powi(2))
            .sum();
        let f = |t: f64| n1 / t + n2 / (c - t);
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let m1 = l + (h - l) / 3.0;
            let m2 = h - (h - l) / 3.0;
            if f(m1) <= f(m2) {
                h = m2;
            } else {
                l = m1;
            }
        }
        f(0.5 * (l + h))
    };
    let steps = 3600;
    let pi = std::f64::consts::PI;
    let (mut best, mut best_phi) = (f64::INFINITY, 0.0);
    for s in 0..steps {
        let phi = pi * s as f64 / steps as f64;
        let v = inner(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let h = pi / steps as f64;
    let (mut l, mut r) = (best_phi - h, best_phi + h);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let m1 = r - golden * (r - l);
        let m2 = l + golden * (r - l);
        if inner(m1) <= inner(m2) {
            r = m2;
        } else {
            l = m1;
        }
    }
    best.min(inner(0.5 * (l + r))).sqrt()
}

/// SVD with a loose threshold, which avoids wrong factors from nalgebra on
/// rank-deficient input; the reconstruction is asserted.
fn checked_svd(z: &DMatrix<f64>) -> SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let svd = SVD::try_new_unordered(z.clone(), true, true, 1e-13, 0).unwrap();
    let check = svd.clone().recompose().unwrap();
    assert!((check - z).norm() <= 1e-10 * z.norm().max(1.0));
    svd
}

fn svt(z: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let mut svd = checked_svd(z);
    svd.singular_values.apply(|s| *s = (*s - tau).max(0.0));
    svd.recompose().unwrap()
}

/// `½ Σ_observed (W_ij − y_ij)² + λ‖W‖_*`.
pub fn trace_objective(w: &DMatrix<f64>, obs: &[(usize, usize, f64)], lambda: f64) -> f64 {
    let loss: f64 = obs
        .iter()
        .map(|&(i, j, y)| 0.5 * (w[(i, j)] - y).powi(2))
        .sum();
    loss + lambda * checked_svd(w).singular_values.sum()
}

/// Plain proximal gradient with unit step on masked trace-norm completion,
/// stopped when the relative objective change drops below `tol`.
pub fn ista_trace(
    rows: usize,
    cols: usize,
    obs: &[(usize, usize, f64)],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> (DMatrix<f64>, f64) {
    let mut w = DMatrix::zeros(rows, cols);
    let mut f = trace_objective(&w, obs, lambda);
    for _ in 0..max_iter {
        let mut z = w.clone();
        for &(i, j, y) in obs {
            z[(i, j)] -= w[(i, j)] - y;
        }
        w = svt(&z, lambda);
        let next = trace_objective(&w, obs, lambda);
        let change = (f - next).abs() / f.abs().max(f64::MIN_POSITIVE);
        f = next;
        if change < tol {
            break;
        }
    }
    (w, f)
}
