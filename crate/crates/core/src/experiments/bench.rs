//! Timing of the two k-support prox algorithms.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::generate::gaussian_vector;
use crate::error::{Error, Result};
use crate::prox::{prox_sq_ksupport, prox_sq_ksupport_baseline};

/// How `k` follows the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KRule {
    /// `k = max(1, ⌊d·f⌋)`.
    Fraction(f64),
    Fixed(usize),
}

impl KRule {
    pub fn k(&self, d: usize) -> usize {
        match *self {
            KRule::Fraction(f) => ((d as f64 * f).floor() as usize).clamp(1, d),
            KRule::Fixed(k) => k.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub k_rule: KRule,
    pub repeats: usize,
    /// Repeats for the slower baseline; defaults to `repeats`.
    pub baseline_repeats: Option<usize>,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            k_rule: KRule::Fraction(0.01),
            repeats: 20,
            baseline_repeats: None,
            lambda: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub d: usize,
    pub k: usize,
    /// Median seconds, sort-and-search algorithm.
    pub new_seconds: f64,
    /// Median seconds, boundary-pair search.
    pub baseline_seconds: f64,
    pub max_abs_diff: f64,
    /// Outputs agree within `1e-10` relative to the largest magnitude.
    pub ok: bool,
}

/// Median wall time of both algorithms at each size, with an agreement check.
pub fn bench_prox(sizes: &[usize], k_rule: KRule, repeats: usize) -> Result<Vec<BenchRow>> {
    bench_prox_with(
        sizes,
        &BenchOptions {
            k_rule,
            repeats,
            ..BenchOptions::default()
        },
    )
}

pub fn bench_prox_with(sizes: &[usize], opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    if opts.repeats == 0 || opts.baseline_repeats == Some(0) {
        return Err(Error::InvalidParams("repeats must be at least 1".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.first() == Some(&0) {
        return Err(Error::InvalidParams(
            "sizes must be positive and ascending".into(),
        ));
    }
    let inputs: Vec<(Vec<f64>, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            (
                gaussian_vector(d, opts.seed.wrapping_add(i as u64)),
                opts.k_rule.k(d),
            )
        })
        .collect();
    // Round-robin over sizes so load drift hits every size alike.
    let mut times = vec![Vec::with_capacity(opts.repeats); sizes.len()];
    let mut outputs = vec![Vec::new(); sizes.len()];
    for _ in 0..opts.repeats {
        for (i, (w, k)) in inputs.iter().enumerate() {
            let start = Instant::now();
            outputs[i] = prox_sq_ksupport(w, opts.lambda, *k)?;
            times[i].push(start.elapsed().as_secs_f64());
        }
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for (((w, k), x), mut t) in inputs.iter().zip(&outputs).zip(times) {
        let (baseline_seconds, y) =
            median_time(opts.baseline_repeats.unwrap_or(opts.repeats), || {
                prox_sq_ksupport_baseline(w, opts.lambda, *k)
            })?;
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let max_abs_diff = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rows.push(BenchRow {
            d: w.len(),
            k: *k,
            new_seconds: median(&mut t),
            baseline_seconds,
            max_abs_diff,
            ok: max_abs_diff <= 1e-10 * scale,
        });
    }
    Ok(rows)
}

/// Median seconds over `repeats` calls, and the last output.
pub fn median_time<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(f64, T)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((median(&mut times), last.expect("at least one repeat")))
}

fn median(times: &mut [f64]) -> f64 {
    times.sort_by(f64::total_cmp);
    let n = times.len();
    if n % 2 == 1 {
        times[n / 2]
    } else {
        0.5 * (times[n / 2 - 1] + times[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_rule() {
        assert_eq!(KRule::Fraction(0.01).k(1000), 10);
        assert_eq!(KRule::Fraction(0.01).k(50), 1);
        assert_eq!(KRule::Fixed(7).k(3), 3);
    }

    #[test]
    fn small_bench_agrees() {
        let rows = bench_prox(&[100, 200, 400], KRule::Fraction(0.05), 3).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.ok));
        assert!(bench_prox(&[200, 100], KRule::Fixed(1), 1).is_err());
    }
}
