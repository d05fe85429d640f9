//! Orthogonally invariant matrix norms built from the vector family.
//!
//! A `d × m` matrix `W` is treated as `m` task columns. The spectral box norm
//! applies the vector box norm to the singular values zero-padded to length
//! `m`; the cluster norm is the spectral box norm with `c = (b − a)k + m·a`.
//! Proximity operators act on the singular values and keep the singular
//! vectors.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{ksupport_norm, theta_norm, BoxParams, KSupportParams, NormParams};
use crate::prox::prox_sq;

/// Relative cut-off used only when reporting numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Largest accepted `‖UΣVᵀ − W‖_F / ‖W‖_F` from the SVD routine.
const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

/// Convergence thresholds tried in order.
const SVD_EPSILONS: [f64; 4] = [5.0 * f64::EPSILON, 1e-14, 1e-13, 1e-12];

/// `(U, σ, Vᵀ)`, or `None` if no attempt reproduces the matrix.
///
/// nalgebra's implicit-shift SVD can settle on wrong factors for
/// rank-deficient input when its threshold is tight, so each attempt is
/// checked by reconstruction and retried looser, on `W` then on `Wᵀ`.
fn thin_svd(matrix: &DMatrix<f64>) -> Option<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let scale = matrix.norm().max(f64::MIN_POSITIVE);
    let attempt = |x: &DMatrix<f64>, eps: f64| {
        let svd = SVD::try_new_unordered(x.clone(), true, true, eps, 10_000)?;
        let (u, s, vt) = (svd.u?, svd.singular_values, svd.v_t?);
        let err = (&u * DMatrix::from_diagonal(&s) * &vt - x).norm();
        (err <= RECONSTRUCTION_TOLERANCE * scale).then_some((u, s, vt))
    };
    let transposed = matrix.transpose();
    SVD_EPSILONS.iter().find_map(|&eps| {
        attempt(matrix, eps).or_else(|| {
            attempt(&transposed, eps).map(|(u, s, vt)| (vt.transpose(), s, u.transpose()))
        })
    })
}

/// A matrix with its thin SVD.
///
/// Singular values are non-increasing; each left singular vector has its
/// largest-magnitude entry positive.
#[derive(Debug, Clone)]
pub struct SpectralOperand {
    matrix: DMatrix<f64>,
    u: DMatrix<f64>,
    sigma: Vec<f64>,
    v: DMatrix<f64>,
}

impl SpectralOperand {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (d, m) = matrix.shape();
        if d == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be non-empty, got {d}x{m}"
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let (u_raw, singular, vt_raw) = thin_svd(&matrix).ok_or_else(|| {
            Error::Numerical(format!("SVD did not converge for a {d}x{m} matrix"))
        })?;
        let r = singular.len();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&i, &j| singular[j].total_cmp(&singular[i]));

        let mut u = DMatrix::zeros(d, r);
        let mut v = DMatrix::zeros(m, r);
        let mut sigma = Vec::with_capacity(r);
        for (col, &src) in order.iter().enumerate() {
            let mut uc = u_raw.column(src).into_owned();
            let mut vc = vt_raw.row(src).transpose();
            let pivot = uc.iamax();
            if uc[pivot] < 0.0 {
                uc.neg_mut();
                vc.neg_mut();
            }
            u.set_column(col, &uc);
            v.set_column(col, &vc);
            sigma.push(singular[src].max(0.0));
        }
        Ok(Self {
            matrix,
            u,
            sigma,
            v,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Number of task columns `m`.
    pub fn tasks(&self) -> usize {
        self.matrix.ncols()
    }

    /// Singular values zero-padded to length `m`.
    pub fn sigma_padded(&self) -> Vec<f64> {
        let mut s = self.sigma.clone();
        s.resize(self.tasks(), 0.0);
        s
    }

    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.sigma)
    }

    /// `U·diag(s)·Vᵀ` for replacement singular values `s` (length `r`).
    pub fn rebuild(&self, s: &[f64]) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, &sj) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.transpose()
    }
}

/// Count of singular values above `RANK_TOLERANCE · σ_max`.
pub fn numerical_rank(sigma: &[f64]) -> usize {
    let max = sigma.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// Parameters of the cluster norm; `k + 1` acts as the number of clusters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub a: f64,
    pub b: f64,
    pub k: usize,
}

impl ClusterParams {
    pub fn new(a: f64, b: f64, k: usize) -> Result<Self> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "cluster parameters require 0 < a < b, got a={a}, b={b}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidParams(
                "cluster parameter k must be at least 1".into(),
            ));
        }
        Ok(Self { a, b, k })
    }

    /// Box parameters at task dimension `m`.
    pub fn box_params(&self, m: usize) -> Result<BoxParams> {
        if m < 2 || self.k > m - 1 {
            return Err(Error::InvalidParams(format!(
                "cluster norm requires m ≥ 2 and 1 ≤ k ≤ m − 1, got k={} with m={m}",
                self.k
            )));
        }
        BoxParams::with_rank(self.a, self.b, self.k as f64, m)
    }
}

/// Spectral box norm with `θ` on the task side (length `m`).
pub fn spectral_theta_norm(w: &SpectralOperand, p: &BoxParams) -> Result<f64> {
    theta_norm(&w.sigma_padded(), p).map(|(v, _)| v)
}

/// Spectral k-support norm (k-support norm of the singular values).
pub fn spectral_ksupport_norm(w: &SpectralOperand, k: usize) -> Result<f64> {
    KSupportParams::new(k)?.check(w.tasks())?;
    ksupport_norm(&w.sigma_padded(), k)
}

/// Spectral norm of either family.
pub fn spectral_norm(w: &SpectralOperand, params: &NormParams) -> Result<f64> {
    match params {
        NormParams::Box(p) => spectral_theta_norm(w, p),
        NormParams::KSupport(p) => spectral_ksupport_norm(w, p.k()),
    }
}

pub fn cluster_norm(w: &SpectralOperand, cp: &ClusterParams) -> Result<f64> {
    spectral_theta_norm(w, &cp.box_params(w.tasks())?)
}

/// Prox of `(λ/2)‖·‖²` for a spectral norm, together with the output
/// singular values (in the order of `w.sigma()`).
pub fn spectral_prox_with_sigma(
    w: &SpectralOperand,
    lambda: f64,
    params: &NormParams,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let mut s = prox_sq(&w.sigma_padded(), lambda, params)?;
    s.truncate(w.sigma.len());
    Ok((w.rebuild(&s), s))
}

pub fn spectral_prox(
    w: &SpectralOperand,
    lambda: f64,
    params: &NormParams,
) -> Result<DMatrix<f64>> {
    spectral_prox_with_sigma(w, lambda, params).map(|(x, _)| x)
}

fn check_scale(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} must be finite and ≥ 0, got {x}"
        )))
    }
}

/// Singular value soft-thresholding, the prox of `λ‖·‖_*`.
pub fn prox_trace(w: &SpectralOperand, lambda: f64) -> Result<DMatrix<f64>> {
    prox_spectral_elastic_net(w, lambda, 0.0)
}

/// Prox of `λ‖·‖_* + (μ/2)‖·‖_F²`: threshold by `λ`, then shrink by `1 + μ`.
pub fn prox_spectral_elastic_net(
    w: &SpectralOperand,
    lambda: f64,
    mu: f64,
) -> Result<DMatrix<f64>> {
    check_scale("lambda", lambda)?;
    check_scale("mu", mu)?;
    let s: Vec<f64> = w
        .sigma
        .iter()
        .map(|s| (s - lambda).max(0.0) / (1.0 + mu))
        .collect();
    Ok(w.rebuild(&s))
}

/// `W·Π` with `Π = I − 11ᵀ/m`: subtracts the mean column.
pub fn centering(w: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = column_mean(w);
    let mut out = w.clone();
    for mut col in out.column_iter_mut() {
        col -= &mean;
    }
    out
}

/// Mean of the columns, `w̄ = W·1/m`.
pub fn column_mean(w: &DMatrix<f64>) -> DVector<f64> {
    w.column_mean()
}

/// Cluster norm of the centered matrix.
pub fn centered_cluster_norm(w: &DMatrix<f64>, cp: &ClusterParams) -> Result<f64> {
    cluster_norm(&SpectralOperand::new(centering(w))?, cp)
}
