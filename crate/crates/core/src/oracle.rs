//! Brute-force reference evaluations for small dimensions.
//!
//! These are deliberately independent of the sorted-breakpoint machinery and
//! exist to validate it in tests.

use crate::error::{Error, Result};
use crate::norms::{BoxParams, NormParams};

/// Largest dimension accepted by [`dual_norm_oracle`].
pub const DUAL_ORACLE_MAX_DIM: usize = 12;
/// Largest dimension accepted by [`infconv_oracle`].
pub const INFCONV_ORACLE_MAX_DIM: usize = 6;

/// Dual norm by maximizing `Σ θ_i u_i²` over the vertices of `Θ`.
///
/// A vertex has every coordinate at `a` or `b` except at most one, which
/// absorbs the remaining budget.
pub fn dual_norm_oracle(u: &[f64], p: &BoxParams) -> Result<f64> {
    let d = u.len();
    if d > DUAL_ORACLE_MAX_DIM {
        return Err(Error::TestScaleExceeded {
            dim: d,
            max: DUAL_ORACLE_MAX_DIM,
        });
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("vector has non-finite entries".into()));
    }
    p.check(d)?;
    let (a, b) = (p.a(), p.b());
    let c = p.c().clamp(d as f64 * a, d as f64 * b);
    let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
    let tol = 1e-12 * c.max(1.0);

    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << d) {
        let at_b = mask.count_ones() as usize;
        // All coordinates at a bound.
        if at_b as f64 * b + (d - at_b) as f64 * a <= c + tol {
            let v: f64 = (0..d)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        b * sq[i]
                    } else {
                        a * sq[i]
                    }
                })
                .sum();
            best = best.max(v);
        }
        // One free coordinate outside the mask, the budget held with equality.
        for f in (0..d).filter(|f| mask >> f & 1 == 0) {
            let free = c - at_b as f64 * b - (d - at_b - 1) as f64 * a;
            if free < a - tol || free > b + tol {
                continue;
            }
            let free = free.clamp(a, b);
            let v: f64 = (0..d)
                .map(|i| {
                    if i == f {
                        free * sq[i]
                    } else if mask >> i & 1 == 1 {
                        b * sq[i]
                    } else {
                        a * sq[i]
                    }
                })
                .sum();
            best = best.max(v);
        }
    }
    Ok(best.max(0.0).sqrt())
}

/// Result of the infimal-convolution oracle.
#[derive(Debug, Clone)]
pub struct InfConv {
    /// `Σ_g ‖v_g‖_g` for the decomposition below.
    pub value: f64,
    /// Groups (sorted index sets of size `k`).
    pub groups: Vec<Vec<usize>>,
    /// One vector per group; they sum to `w`.
    pub parts: Vec<Vec<f64>>,
}

/// Norm value as an infimal convolution over all groups of size `k`.
///
/// Each group `g` carries the ellipsoidal norm `‖v‖_g² = Σ_i v_i²/t_{g,i}`
/// with `t_g = a·1 + (b − a)·1_g`, and the norm of `w` is the least value of
/// `Σ_g ‖v_g‖_g` over decompositions `w = Σ_g v_g`. Minimizing over `v` for
/// fixed group weights `η_g ∝ λ_g` leaves the smooth convex problem
/// `min_{λ ∈ simplex} Σ_i w_i²/φ_i(λ)`, `φ = Σ_g λ_g t_g`, which is solved by
/// projected gradient descent. The decomposition is then rebuilt and its
/// objective evaluated directly.
pub fn infconv_oracle(w: &[f64], params: &NormParams) -> Result<InfConv> {
    let d = w.len();
    if d > INFCONV_ORACLE_MAX_DIM {
        return Err(Error::TestScaleExceeded {
            dim: d,
            max: INFCONV_ORACLE_MAX_DIM,
        });
    }
    if d == 0 || w.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "vector must be non-empty and finite".into(),
        ));
    }
    params.check(d)?;
    let (a, b, k) = match params {
        NormParams::KSupport(p) => (0.0, 1.0, p.k()),
        NormParams::Box(p) => {
            let rho = p.rho(d);
            let k = rho.round();
            if (rho - k).abs() > 1e-9 || k < 1.0 {
                return Err(Error::InvalidParams(format!(
                    "group oracle needs c = (b − a)k + d·a with integer k ≥ 1, got ρ = {rho}"
                )));
            }
            (p.a(), p.b(), k as usize)
        }
    };
    let groups = combinations(d, k);
    let tables: Vec<Vec<f64>> = groups
        .iter()
        .map(|g| {
            let mut t = vec![a; d];
            for &i in g {
                t[i] = b;
            }
            t
        })
        .collect();
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let support: Vec<usize> = (0..d).filter(|&i| w2[i] > 0.0).collect();
    if support.is_empty() {
        return Ok(InfConv {
            value: 0.0,
            parts: vec![vec![0.0; d]; groups.len()],
            groups,
        });
    }

    let phi = |lam: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; d];
        for (l, t) in lam.iter().zip(&tables) {
            for i in 0..d {
                out[i] += l * t[i];
            }
        }
        out
    };
    let objective = |lam: &[f64]| -> f64 {
        let ph = phi(lam);
        support
            .iter()
            .map(|&i| {
                if ph[i] > 0.0 {
                    w2[i] / ph[i]
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };

    let n = groups.len();
    let mut lam = vec![1.0 / n as f64; n];
    let mut f = objective(&lam);
    let mut step = 1.0;
    let mut stalls = 0;
    for _ in 0..200_000 {
        let ph = phi(&lam);
        let grad: Vec<f64> = tables
            .iter()
            .map(|t| {
                -support
                    .iter()
                    .map(|&i| w2[i] * t[i] / (ph[i] * ph[i]))
                    .sum::<f64>()
            })
            .collect();
        let mut accepted = None;
        while step > 1e-30 {
            let trial: Vec<f64> = lam.iter().zip(&grad).map(|(l, g)| l - step * g).collect();
            let trial = project_simplex(&trial);
            let ft = objective(&trial);
            let decrease: f64 = lam
                .iter()
                .zip(&trial)
                .zip(&grad)
                .map(|((l, t), g)| g * (t - l))
                .sum();
            if ft.is_finite() && ft <= f + 0.5 * decrease {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((next, fnext)) = accepted else { break };
        let gain = f - fnext;
        lam = next;
        f = fnext;
        step *= 1.5;
        if gain <= 1e-16 * f {
            stalls += 1;
            if stalls >= 20 {
                break;
            }
        } else {
            stalls = 0;
        }
    }

    let ph = phi(&lam);
    let parts: Vec<Vec<f64>> = lam
        .iter()
        .zip(&tables)
        .map(|(l, t)| {
            (0..d)
                .map(|i| {
                    if w[i] == 0.0 {
                        0.0
                    } else {
                        l * t[i] * w[i] / ph[i]
                    }
                })
                .collect()
        })
        .collect();
    let value = parts
        .iter()
        .zip(&tables)
        .map(|(v, t)| {
            v.iter()
                .zip(t)
                .map(|(x, ti)| if *x == 0.0 { 0.0 } else { x * x / ti })
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    Ok(InfConv {
        value,
        groups,
        parts,
    })
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|x, y| y.total_cmp(x));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << d) {
        if mask.count_ones() as usize == k {
            out.push((0..d).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}
