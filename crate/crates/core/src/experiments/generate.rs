//! Seeded synthetic data.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Standard Gaussian vector of length `d`.
pub fn gaussian_vector(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `U·Vᵀ + noise_sd·E` with `U, V` of shape `m × r` and all factors standard
/// Gaussian.
pub fn gen_lowrank(m: usize, r: usize, noise_sd: f64, seed: u64) -> Result<DMatrix<f64>> {
    if r > m || m == 0 {
        return Err(Error::InvalidParams(format!(
            "need 1 ≤ m and r ≤ m, got m={m}, r={r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = gaussian(&mut rng, m, r);
    let v = gaussian(&mut rng, m, r);
    let e = gaussian(&mut rng, m, m);
    Ok(u * v.transpose() + e * noise_sd)
}

/// `m × m` block-diagonal matrix: `blocks` constant blocks of side
/// `block_size` at levels drawn uniformly from `level_range`, plus Gaussian
/// noise on every entry.
pub fn gen_block(
    m: usize,
    blocks: usize,
    block_size: usize,
    level_range: (f64, f64),
    noise_sd: f64,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if blocks == 0 || block_size == 0 || blocks * block_size > m {
        return Err(Error::InvalidParams(format!(
            "{blocks} blocks of size {block_size} do not fit in {m}x{m}"
        )));
    }
    let (lo, hi) = level_range;
    let levels = Uniform::new_inclusive(lo, hi)
        .map_err(|e| Error::InvalidParams(format!("level range: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = DMatrix::zeros(m, m);
    for blk in 0..blocks {
        let level = levels.sample(&mut rng);
        let s = blk * block_size;
        w.view_mut((s, s), (block_size, block_size)).fill(level);
    }
    Ok(w + gaussian(&mut rng, m, m) * noise_sd)
}

/// One task of a multitask regression problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtlTask {
    /// `n × d` design, first column is the bias.
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

/// Multitask data split per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtlData {
    pub dim: usize,
    pub train: Vec<MtlTask>,
    pub validation: Vec<MtlTask>,
    pub test: Vec<MtlTask>,
    /// Generating weights (`d × m`), when known.
    pub truth: Option<DMatrix<f64>>,
}

impl MtlData {
    pub fn tasks(&self) -> usize {
        self.train.len()
    }
}

/// Shape of a clustered multitask problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtlConfig {
    pub tasks: usize,
    /// Features including the bias.
    pub dim: usize,
    pub clusters: usize,
    pub train_per_task: usize,
    pub validation_per_task: usize,
    pub test_per_task: usize,
    /// Norm scale of the weight shared by all tasks.
    pub mean_scale: f64,
    /// Scale of the cluster offsets.
    pub cluster_scale: f64,
    /// Scale of the task deviation within a cluster.
    pub task_scale: f64,
    pub noise_sd: f64,
}

impl Default for MtlConfig {
    /// Small clustered problem: 60 tasks, 13 features plus a bias.
    fn default() -> Self {
        Self {
            tasks: 60,
            dim: 14,
            clusters: 3,
            train_per_task: 8,
            validation_per_task: 4,
            test_per_task: 8,
            mean_scale: 3.0,
            cluster_scale: 1.0,
            task_scale: 0.1,
            noise_sd: 1.0,
        }
    }
}

/// Clustered multitask regression: task weight = shared mean + cluster offset
/// + small deviation; Gaussian features with a leading bias column.
pub fn gen_mtl(cfg: &MtlConfig, seed: u64) -> Result<MtlData> {
    if cfg.tasks == 0 || cfg.dim < 2 || cfg.clusters == 0 || cfg.train_per_task == 0 {
        return Err(Error::InvalidParams(
            "multitask generator needs tasks, clusters, samples ≥ 1 and dim ≥ 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cfg.dim;
    let mean = gaussian(&mut rng, d, 1) * cfg.mean_scale;
    let centers = gaussian(&mut rng, d, cfg.clusters) * cfg.cluster_scale;
    let mut truth = DMatrix::zeros(d, cfg.tasks);
    for t in 0..cfg.tasks {
        let c = t % cfg.clusters;
        let dev = gaussian(&mut rng, d, 1) * cfg.task_scale;
        truth.set_column(t, &(&mean + centers.column(c) + dev));
    }
    let draw = |n: usize, w: DVector<f64>, rng: &mut ChaCha8Rng| -> MtlTask {
        let mut x = gaussian(rng, n, d);
        x.column_mut(0).fill(1.0);
        let noise: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = &x * w + noise * cfg.noise_sd;
        MtlTask { x, y }
    };
    let (mut train, mut validation, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for t in 0..cfg.tasks {
        let w = truth.column(t).into_owned();
        train.push(draw(cfg.train_per_task, w.clone(), &mut rng));
        validation.push(draw(cfg.validation_per_task, w.clone(), &mut rng));
        test.push(draw(cfg.test_per_task, w, &mut rng));
    }
    Ok(MtlData {
        dim: d,
        train,
        validation,
        test,
        truth: Some(truth),
    })
}
