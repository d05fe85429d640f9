//! Experiment harnesses: data, sampling, metrics, validation grids, tables.
//!
//! A grid search expands every regularizer grid into candidate
//! `(regularizer, λ)` cells, solves each cell for each repeat as an
//! independent job, picks the cell with the lowest validation error per
//! `(regularizer family, repeat)` and aggregates the test error of the picks.
//! Jobs run on the rayon pool; results are merged in job order, so output
//! does not depend on scheduling.

pub mod bench;
pub mod data;
pub mod generate;
pub mod metrics;
pub mod presets;
pub mod report;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bench::{bench_prox, bench_prox_with, BenchOptions, BenchRow, KRule};
pub use data::{
    load_jester, load_movielens, load_mtl_csv, parse_jester, parse_movielens, parse_mtl_csv,
    read_triplets, sample_mask, write_triplets, Entry, ObservationSet, SampleMode, Split,
};
pub use generate::{gaussian_vector, gen_block, gen_lowrank, gen_mtl, MtlConfig, MtlData, MtlTask};
pub use metrics::{metric_nmae, metric_relative_error, nmae_on, NmaeMode, NmaeOptions, Scope};
pub use report::{bench_csv, bench_json, results_csv, results_json, sig6, ResultRow};

use crate::error::{Error, Result};
use crate::solver::{solve, MaskedSquaredLoss, MultitaskSquaredLoss, Regularizer, SolverConfig};
use crate::spectral::SpectralOperand;

/// Data source of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Dataset {
    /// `m × m` Gaussian low-rank matrix plus noise.
    LowRank {
        m: usize,
        r: usize,
        noise_sd: f64,
        sample: SampleMode,
    },
    /// Block-diagonal matrix of constant blocks plus noise.
    Block {
        m: usize,
        blocks: usize,
        block_size: usize,
        levels: (f64, f64),
        noise_sd: f64,
        sample: SampleMode,
    },
    /// A fixed rating set, resampled per repeat; scored by NMAE.
    Ratings {
        name: String,
        observations: ObservationSet,
        sample: SampleMode,
        r_min: f64,
        r_max: f64,
    },
    /// Synthetic clustered multitask regression, regenerated per repeat.
    Multitask { config: MtlConfig },
    /// A fixed multitask data set.
    MultitaskFixed { name: String, data: MtlData },
}

impl Dataset {
    pub fn name(&self) -> String {
        match self {
            Dataset::LowRank { m, r, .. } => format!("lowrank-{m}x{m}-r{r}"),
            Dataset::Block { m, blocks, .. } => format!("block-{m}x{m}-b{blocks}"),
            Dataset::Ratings { name, .. } | Dataset::MultitaskFixed { name, .. } => name.clone(),
            Dataset::Multitask { config } => format!("mtl-{}t-d{}", config.tasks, config.dim),
        }
    }
}

/// Regularizer families that a grid can expand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Trace,
    ElasticNet,
    KSupport,
    Box,
    Cluster,
    CenteredCluster,
    CenteredKSupport,
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Trace => "tr",
            Family::ElasticNet => "en",
            Family::KSupport => "ks",
            Family::Box => "box",
            Family::Cluster => "cn",
            Family::CenteredCluster => "c-cn",
            Family::CenteredKSupport => "c-ks",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "tr" | "trace" => Family::Trace,
            "en" | "elastic-net" => Family::ElasticNet,
            "ks" | "ksupport" => Family::KSupport,
            "box" => Family::Box,
            "cn" | "cluster" => Family::Cluster,
            "c-cn" | "centered-cluster" => Family::CenteredCluster,
            "c-ks" | "centered-ksupport" => Family::CenteredKSupport,
            _ => return None,
        })
    }
}

/// Hyperparameter grid of one regularizer family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularizerGrid {
    pub family: Family,
    pub lambdas: Vec<f64>,
    pub ks: Vec<f64>,
    pub a_values: Vec<f64>,
    pub b: f64,
    pub mus: Vec<f64>,
}

impl RegularizerGrid {
    pub fn new(family: Family, lambdas: Vec<f64>) -> Self {
        Self {
            family,
            lambdas,
            ks: vec![1.0],
            a_values: vec![0.1],
            b: 1.0,
            mus: vec![0.0],
        }
    }

    pub fn with_k(mut self, ks: Vec<f64>) -> Self {
        self.ks = ks;
        self
    }

    pub fn with_a(mut self, a_values: Vec<f64>) -> Self {
        self.a_values = a_values;
        self
    }

    pub fn with_mu(mut self, mus: Vec<f64>) -> Self {
        self.mus = mus;
        self
    }

    /// Regularizers (without `λ`) spanned by the grid.
    pub fn regularizers(&self) -> Result<Vec<Regularizer>> {
        let int_k = |k: f64| -> Result<usize> {
            if k >= 1.0 && k.fract() == 0.0 {
                Ok(k as usize)
            } else {
                Err(Error::InvalidParams(format!(
                    "{} needs integer k ≥ 1, got {k}",
                    self.family.label()
                )))
            }
        };
        let mut out = Vec::new();
        match self.family {
            Family::Trace => out.push(Regularizer::Trace),
            Family::ElasticNet => {
                out.extend(self.mus.iter().map(|&mu| Regularizer::ElasticNet { mu }))
            }
            Family::KSupport => {
                for &k in &self.ks {
                    out.push(Regularizer::SpectralKSupport { k: int_k(k)? });
                }
            }
            Family::CenteredKSupport => {
                for &k in &self.ks {
                    out.push(Regularizer::CenteredKSupport { k: int_k(k)? });
                }
            }
            Family::Box | Family::Cluster | Family::CenteredCluster => {
                for &k in &self.ks {
                    for &a in &self.a_values {
                        let b = self.b;
                        out.push(match self.family {
                            Family::Box => Regularizer::SpectralBox { a, b, k },
                            Family::Cluster => Regularizer::Cluster { a, b, k: int_k(k)? },
                            _ => Regularizer::CenteredCluster { a, b, k: int_k(k)? },
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: Dataset,
    pub grids: Vec<RegularizerGrid>,
    pub repeats: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Mean-penalty weight for centered regularizers.
    pub eps_mean: f64,
    pub nmae_mode: NmaeMode,
    pub clamp_predictions: bool,
}

impl ExperimentSpec {
    pub fn new(dataset: Dataset, grids: Vec<RegularizerGrid>) -> Self {
        Self {
            dataset,
            grids,
            repeats: 1,
            seed: 0,
            solver: SolverConfig::default(),
            eps_mean: 0.0,
            nmae_mode: NmaeMode::Standard,
            clamp_predictions: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidParams("repeats must be at least 1".into()));
        }
        if self.grids.is_empty() {
            return Err(Error::InvalidParams(
                "at least one regularizer grid is required".into(),
            ));
        }
        for g in &self.grids {
            if g.lambdas.is_empty() || g.ks.is_empty() || g.a_values.is_empty() || g.mus.is_empty()
            {
                return Err(Error::InvalidParams(format!(
                    "grid for {} is empty",
                    g.family.label()
                )));
            }
            if let Some(l) = g.lambdas.iter().find(|l| !(**l > 0.0)) {
                return Err(Error::InvalidParams(format!("lambda must be > 0, got {l}")));
            }
            g.regularizers()?;
        }
        self.solver.validate()
    }
}

/// Seed of repeat `r`.
pub fn repeat_seed(seed: u64, repeat: usize) -> u64 {
    seed.wrapping_add(repeat as u64)
}

const MASK_STREAM: u64 = 0x5eed_0f_3a5c;

enum Prepared {
    Completion {
        obs: ObservationSet,
        loss: MaskedSquaredLoss,
        nmae: Option<NmaeOptions>,
    },
    Multitask {
        data: MtlData,
        loss: MultitaskSquaredLoss,
    },
}

fn prepare(spec: &ExperimentSpec, repeat: usize) -> Result<Prepared> {
    let seed = repeat_seed(spec.seed, repeat);
    let completion = |full: DMatrix<f64>, sample: SampleMode| -> Result<Prepared> {
        let obs = sample_mask(
            &ObservationSet::from_dense(&full),
            sample,
            seed ^ MASK_STREAM,
        )?;
        let loss = MaskedSquaredLoss::from_observations(&obs, Split::Train);
        Ok(Prepared::Completion {
            obs,
            loss,
            nmae: None,
        })
    };
    match &spec.dataset {
        Dataset::LowRank {
            m,
            r,
            noise_sd,
            sample,
        } => completion(gen_lowrank(*m, *r, *noise_sd, seed)?, *sample),
        Dataset::Block {
            m,
            blocks,
            block_size,
            levels,
            noise_sd,
            sample,
        } => completion(
            gen_block(*m, *blocks, *block_size, *levels, *noise_sd, seed)?,
            *sample,
        ),
        Dataset::Ratings {
            observations,
            sample,
            r_min,
            r_max,
            ..
        } => {
            let obs = sample_mask(observations, *sample, seed ^ MASK_STREAM)?;
            let loss = MaskedSquaredLoss::from_observations(&obs, Split::Train);
            let nmae = NmaeOptions {
                r_min: *r_min,
                r_max: *r_max,
                mode: spec.nmae_mode,
                clamp: spec.clamp_predictions,
            };
            Ok(Prepared::Completion {
                obs,
                loss,
                nmae: Some(nmae),
            })
        }
        Dataset::Multitask { config } => {
            let data = gen_mtl(config, seed)?;
            let loss = MultitaskSquaredLoss::new(data.train.clone())?;
            Ok(Prepared::Multitask { data, loss })
        }
        Dataset::MultitaskFixed { data, .. } => {
            let loss = MultitaskSquaredLoss::new(data.train.clone())?;
            Ok(Prepared::Multitask {
                data: data.clone(),
                loss,
            })
        }
    }
}

/// Mean over tasks of the per-task root mean squared error.
pub fn task_rmse(w: &DMatrix<f64>, tasks: &[MtlTask]) -> Result<f64> {
    let mut total = 0.0;
    let mut counted = 0;
    for (t, task) in tasks.iter().enumerate() {
        if task.y.is_empty() {
            continue;
        }
        let r = &task.x * w.column(t) - &task.y;
        total += (r.norm_squared() / task.y.len() as f64).sqrt();
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::UndefinedMetric("no evaluation samples".into()));
    }
    Ok(total / counted as f64)
}

impl Prepared {
    fn score(&self, w: &DMatrix<f64>, split: Split) -> Result<f64> {
        match self {
            Prepared::Completion {
                obs, nmae: None, ..
            } => metric_relative_error(w, Scope::Entries(obs, split)),
            Prepared::Completion {
                obs,
                nmae: Some(opts),
                ..
            } => nmae_on(obs, split, w, opts),
            Prepared::Multitask { data, .. } => {
                let tasks = match split {
                    Split::Train => &data.train,
                    Split::Validation => &data.validation,
                    Split::Test => &data.test,
                };
                task_rmse(w, tasks)
            }
        }
    }

    fn run(
        &self,
        reg: &Regularizer,
        lambda: f64,
        spec: &ExperimentSpec,
    ) -> Result<(DMatrix<f64>, usize)> {
        let sol = match self {
            Prepared::Completion { loss, .. } => {
                solve(loss, reg, lambda, spec.eps_mean, &spec.solver)?
            }
            Prepared::Multitask { loss, .. } => {
                solve(loss, reg, lambda, spec.eps_mean, &spec.solver)?
            }
        };
        Ok((sol.w, sol.state.iterations_run))
    }
}

/// Outcome of one `(repeat, regularizer, λ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub repeat: usize,
    pub norm: String,
    pub regularizer: Regularizer,
    pub lambda: f64,
    pub validation_error: f64,
    pub test_error: f64,
    pub iterations: usize,
    pub rank: usize,
    /// Set when the cell failed (e.g. the solver diverged).
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    /// Selected cell per `(family, repeat)`, in grid order then repeat order.
    pub selections: Vec<CellResult>,
    /// Cells that failed.
    pub failures: Vec<CellResult>,
}

impl ExperimentResult {
    /// Selected test errors of one family, indexed by repeat (`None` if every
    /// cell of that repeat failed).
    pub fn test_errors(&self, norm: &str, repeats: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; repeats];
        for s in self.selections.iter().filter(|s| s.norm == norm) {
            out[s.repeat] = Some(s.test_error);
        }
        out
    }
}

/// Validation-driven model selection over all grids and repeats.
pub fn grid_search(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let prepared: Vec<Prepared> = (0..spec.repeats)
        .map(|r| prepare(spec, r))
        .collect::<Result<_>>()?;

    struct Job {
        repeat: usize,
        grid: usize,
        reg: Regularizer,
        lambda: f64,
    }
    let mut jobs = Vec::new();
    for repeat in 0..spec.repeats {
        for (gi, g) in spec.grids.iter().enumerate() {
            for reg in g.regularizers()? {
                for &lambda in &g.lambdas {
                    jobs.push(Job {
                        repeat,
                        grid: gi,
                        reg,
                        lambda,
                    });
                }
            }
        }
    }

    let cells: Vec<CellResult> = jobs
        .par_iter()
        .map(|job| {
            let data = &prepared[job.repeat];
            let norm = spec.grids[job.grid].family.label().to_string();
            let scored = data
                .run(&job.reg, job.lambda, spec)
                .and_then(|(w, iterations)| {
                    let validation = data.score(&w, Split::Validation)?;
                    let test = data.score(&w, Split::Test)?;
                    let rank = SpectralOperand::new(w)?.numerical_rank();
                    Ok((validation, test, iterations, rank))
                });
            match scored {
                Ok((validation_error, test_error, iterations, rank)) => CellResult {
                    repeat: job.repeat,
                    norm,
                    regularizer: job.reg,
                    lambda: job.lambda,
                    validation_error,
                    test_error,
                    iterations,
                    rank,
                    failure: None,
                },
                Err(e) => CellResult {
                    repeat: job.repeat,
                    norm,
                    regularizer: job.reg,
                    lambda: job.lambda,
                    validation_error: f64::INFINITY,
                    test_error: f64::NAN,
                    iterations: 0,
                    rank: 0,
                    failure: Some(e.to_string()),
                },
            }
        })
        .collect();

    let dataset = spec.dataset.name();
    let mut rows = Vec::new();
    let mut selections = Vec::new();
    for g in &spec.grids {
        let label = g.family.label();
        let mut picked = Vec::new();
        for repeat in 0..spec.repeats {
            let best = cells
                .iter()
                .filter(|c| c.norm == label && c.repeat == repeat && c.failure.is_none())
                .fold(None::<&CellResult>, |best, c| match best {
                    Some(b) if b.validation_error <= c.validation_error => Some(b),
                    _ => Some(c),
                });
            if let Some(b) = best {
                picked.push(b.clone());
            }
        }
        rows.push(aggregate(&dataset, label, &picked));
        selections.extend(picked);
    }
    let failures = cells.into_iter().filter(|c| c.failure.is_some()).collect();
    Ok(ExperimentResult {
        rows,
        selections,
        failures,
    })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation; zero for fewer than two values.
fn sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn aggregate(dataset: &str, label: &str, picked: &[CellResult]) -> ResultRow {
    let col = |f: &dyn Fn(&CellResult) -> f64| picked.iter().map(f).collect::<Vec<_>>();
    let tests = col(&|c| c.test_error);
    let ks: Vec<f64> = picked
        .iter()
        .filter_map(|c| c.regularizer.k_and_a().0)
        .collect();
    let as_: Vec<f64> = picked
        .iter()
        .filter_map(|c| c.regularizer.k_and_a().1)
        .collect();
    ResultRow {
        dataset: dataset.to_string(),
        norm: label.to_string(),
        test_error_mean: mean(&tests),
        test_error_sd: sd(&tests),
        iterations: mean(&col(&|c| c.iterations as f64)),
        r: mean(&col(&|c| c.rank as f64)),
        k: (!ks.is_empty()).then(|| mean(&ks)),
        a: (!as_.is_empty()).then(|| mean(&as_)),
        lambda: mean(&col(&|c| c.lambda)),
    }
}
