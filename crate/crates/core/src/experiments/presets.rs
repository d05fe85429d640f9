//! Desk-scale defaults shared by the CLI and the trend checks.

use super::{Dataset, ExperimentSpec, Family, RegularizerGrid, SampleMode};
use crate::solver::SolverConfig;

pub const SYNTH_M: usize = 50;
pub const SYNTH_RANK: usize = 5;
pub const SYNTH_FRACTION: f64 = 0.2;
pub const LOWRANK_NOISE_SD: f64 = 1.0;
pub const BLOCK_LEVELS: (f64, f64) = (1.0, 10.0);
pub const BLOCK_NOISE_SD: f64 = 1.0;
/// Solver tolerance of the trend experiments.
pub const SYNTH_TOLERANCE: f64 = 1e-5;

/// Geometric `λ` grid `first · ratio^i`, `i < count`.
pub fn geometric(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first * ratio.powi(i as i32)).collect()
}

/// Default `λ` grid for completion on the squared-loss scale.
pub fn completion_lambdas() -> Vec<f64> {
    geometric(1.0 / 512.0, 2.0, 15)
}

/// Default grid of one family for an `m`-column completion problem.
pub fn completion_grid(family: Family, lambdas: Vec<f64>, m: usize) -> RegularizerGrid {
    let g = RegularizerGrid::new(family, lambdas);
    let ks = |list: &[f64]| {
        list.iter()
            .copied()
            .filter(|&k| k <= m as f64 - 1.0)
            .collect::<Vec<_>>()
    };
    match family {
        Family::KSupport | Family::CenteredKSupport => g.with_k(ks(&[1.0, 2.0, 3.0, 5.0, 8.0])),
        Family::Box => g
            .with_k(ks(&[1.0, 2.0, 3.0, 5.0]))
            .with_a(vec![1e-3, 1e-2, 1e-1]),
        Family::Cluster | Family::CenteredCluster => {
            g.with_k(ks(&[1.0, 2.0, 4.0])).with_a(vec![1e-3, 1e-2])
        }
        Family::ElasticNet => g.with_mu(vec![1e-3, 1e-2]),
        Family::Trace => g,
    }
}

pub fn lowrank(m: usize, r: usize, noise_sd: f64, fraction: f64) -> Dataset {
    Dataset::LowRank {
        m,
        r,
        noise_sd,
        sample: SampleMode::GlobalFraction(fraction),
    }
}

/// `m × m` block-diagonal data with `blocks` equal blocks.
pub fn block(m: usize, blocks: usize, noise_sd: f64, fraction: f64) -> Dataset {
    Dataset::Block {
        m,
        blocks,
        block_size: m / blocks.max(1),
        levels: BLOCK_LEVELS,
        noise_sd,
        sample: SampleMode::GlobalFraction(fraction),
    }
}

/// Completion comparison over `families` with default grids.
pub fn synth_spec(
    dataset: Dataset,
    families: &[Family],
    lambdas: Option<Vec<f64>>,
    repeats: usize,
    seed: u64,
) -> ExperimentSpec {
    let m = match &dataset {
        Dataset::LowRank { m, .. } | Dataset::Block { m, .. } => *m,
        _ => SYNTH_M,
    };
    let lambdas = lambdas.unwrap_or_else(completion_lambdas);
    let grids = families
        .iter()
        .map(|&f| completion_grid(f, lambdas.clone(), m))
        .collect();
    let mut spec = ExperimentSpec::new(dataset, grids);
    spec.repeats = repeats;
    spec.seed = seed;
    spec.solver = SolverConfig::with_tolerance(SYNTH_TOLERANCE);
    spec
}

/// Default `λ` grid for multitask regression.
pub fn mtl_lambdas() -> Vec<f64> {
    geometric(1.0 / 64.0, 2.0, 12)
}

/// Default multitask comparison: uncentered and centered norms side by side.
pub fn mtl_grids(tasks: usize) -> Vec<RegularizerGrid> {
    [
        Family::Trace,
        Family::KSupport,
        Family::CenteredKSupport,
        Family::Cluster,
        Family::CenteredCluster,
    ]
    .into_iter()
    .map(|f| completion_grid(f, mtl_lambdas(), tasks))
    .collect()
}
