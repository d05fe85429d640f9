//! Shared inputs for the criterion benches.

use theta_norms::experiments::gaussian_vector;
use theta_norms::BoxParams;

/// Sizes of the prox scaling sweep, `2^14 ..= 2^18`.
pub const SWEEP: [usize; 5] = [1 << 14, 1 << 15, 1 << 16, 1 << 17, 1 << 18];

/// `k = d/100`, at least 1.
pub fn k_for(d: usize) -> usize {
    (d / 100).max(1)
}

/// Gaussian input of length `d`, fixed per size.
pub fn input(d: usize) -> Vec<f64> {
    gaussian_vector(d, d as u64)
}

/// Box parameters with `a = 0.1, b = 1` and rank `k_for(d)`.
pub fn box_params(d: usize) -> BoxParams {
    BoxParams::with_rank(0.1, 1.0, k_for(d) as f64, d).expect("feasible by construction")
}
