//! Subcommand implementations.

use theta_norms::experiments::{
    bench_csv, bench_json, grid_search, presets, results_csv, results_json, BenchOptions, Dataset,
    ExperimentResult, ExperimentSpec, Family, KRule, MtlConfig,
};
use theta_norms::{
    centered_cluster_norm, cluster_norm, dual_norm, norm, prox_sq, spectral_ksupport_norm,
    spectral_theta_norm, BoxParams, ClusterParams, Error, ErrorKind, KSupportParams, NormParams,
    Result, SpectralOperand,
};

use crate::args::{
    BenchArgs, ConfigArgs, Format, MtlArgs, NormArgs, OutputArgs, ProxArgs, SpectralArgs,
    SpectralFamily, SynthArgs, SynthKind, VectorArgs,
};
use crate::config::Config;
use crate::io::{emit, read_matrix, read_vector, scalar, vector};

/// A failed command: error category plus a one-line message.
#[derive(Debug)]
pub struct Failure {
    pub kind: ErrorKind,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn integer(x: f64, name: &str) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 && x.is_finite() {
        Ok(x as usize)
    } else {
        Err(usage(format!("{name} must be an integer ≥ 1, got {x}")))
    }
}

fn need(x: Option<f64>, flag: &str, family: &str) -> Result<f64> {
    x.ok_or_else(|| usage(format!("{family} needs {flag}")))
}

/// Box parameters from `-a -b` and either `-c` or the rank `-k` over `d`.
fn box_params(
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    k: Option<f64>,
    d: usize,
) -> Result<BoxParams> {
    let (a, b) = (need(a, "-a", "--box")?, need(b, "-b", "--box")?);
    match (c, k) {
        (Some(c), None) => BoxParams::new(a, b, c),
        (None, Some(k)) => BoxParams::with_rank(a, b, k, d),
        _ => Err(usage("--box needs exactly one of -c or -k")),
    }
}

fn norm_params(n: &NormArgs, d: usize) -> Result<NormParams> {
    if n.ksupport {
        if n.a.is_some() || n.b.is_some() || n.c.is_some() {
            return Err(usage("--ksupport takes only -k"));
        }
        let k = integer(need(n.k, "-k", "--ksupport")?, "k")?;
        Ok(KSupportParams::new(k)?.into())
    } else {
        Ok(box_params(n.a, n.b, n.c, n.k, d)?.into())
    }
}

pub fn norm_cmd(args: &VectorArgs, dual: bool) -> std::result::Result<(), Failure> {
    let w = read_vector(args.input.as_deref())?;
    let params = norm_params(&args.norm, w.len())?;
    let value = if dual {
        dual_norm(&w, &params)?
    } else {
        norm(&w, &params)?
    };
    emit(&args.out, &scalar(args.out.format, value)?)?;
    Ok(())
}

pub fn prox_cmd(args: &ProxArgs) -> std::result::Result<(), Failure> {
    let v = &args.vector;
    let w = read_vector(v.input.as_deref())?;
    let params = norm_params(&v.norm, w.len())?;
    let x = prox_sq(&w, args.lambda, &params)?;
    emit(&v.out, &vector(v.out.format, &x)?)?;
    Ok(())
}

pub fn spectral_cmd(args: &SpectralArgs) -> std::result::Result<(), Failure> {
    let w = read_matrix(args.input.as_deref())?;
    let value = match args.norm {
        SpectralFamily::Trace => SpectralOperand::new(w)?.sigma().iter().sum(),
        SpectralFamily::Ksupport => {
            let k = integer(need(args.k, "-k", "ksupport")?, "k")?;
            spectral_ksupport_norm(&SpectralOperand::new(w)?, k)?
        }
        SpectralFamily::Box => {
            let op = SpectralOperand::new(w)?;
            let p = box_params(args.a, args.b, args.c, args.k, op.tasks())?;
            spectral_theta_norm(&op, &p)?
        }
        SpectralFamily::Cluster | SpectralFamily::CenteredCluster => {
            if args.c.is_some() {
                return Err(usage("cluster norms take -a -b -k").into());
            }
            let cp = ClusterParams::new(
                need(args.a, "-a", "cluster")?,
                need(args.b, "-b", "cluster")?,
                integer(need(args.k, "-k", "cluster")?, "k")?,
            )?;
            if args.norm == SpectralFamily::Cluster {
                cluster_norm(&SpectralOperand::new(w)?, &cp)?
            } else {
                centered_cluster_norm(&w, &cp)?
            }
        }
    };
    emit(&args.out, &scalar(args.out.format, value)?)?;
    Ok(())
}

/// Run a grid search and write its table. Families whose every cell diverged
/// turn into a divergence failure after the table is written.
fn run_spec(spec: &ExperimentSpec, out: &OutputArgs) -> std::result::Result<(), Failure> {
    let res: ExperimentResult = grid_search(spec)?;
    let text = match out.format {
        Format::Csv => results_csv(&res.rows),
        Format::Json => results_json(&res.rows)? + "\n",
    };
    emit(out, &text)?;
    let diverged: Vec<&str> = res
        .rows
        .iter()
        .filter(|r| !r.test_error_mean.is_finite())
        .filter(|r| {
            res.failures.iter().any(|f| {
                f.norm == r.norm
                    && f.failure
                        .as_deref()
                        .is_some_and(|m| m.starts_with("solver diverged"))
            })
        })
        .map(|r| r.norm.as_str())
        .collect();
    if !diverged.is_empty() {
        return Err(Failure {
            kind: ErrorKind::Divergence,
            message: format!(
                "every cell of {} diverged; try a smaller step_size or larger lambda",
                diverged.join(", ")
            ),
        });
    }
    Ok(())
}

fn is_multitask(spec: &ExperimentSpec) -> bool {
    matches!(
        spec.dataset,
        Dataset::Multitask { .. } | Dataset::MultitaskFixed { .. }
    )
}

pub fn complete_cmd(args: &ConfigArgs) -> std::result::Result<(), Failure> {
    let spec = Config::load(&args.config)?.spec()?;
    if is_multitask(&spec) {
        return Err(usage("multitask sources belong to the mtl command").into());
    }
    run_spec(&spec, &args.out)
}

pub fn mtl_cmd(args: &MtlArgs) -> std::result::Result<(), Failure> {
    let spec = match &args.config {
        Some(path) => {
            let spec = Config::load(path)?.spec()?;
            if !is_multitask(&spec) {
                return Err(usage("the mtl command needs source = mtl or mtl-csv").into());
            }
            spec
        }
        None => {
            let dataset = match &args.data {
                Some(path) => Dataset::MultitaskFixed {
                    name: path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or("mtl".into()),
                    data: theta_norms::experiments::load_mtl_csv(path)?,
                },
                None => {
                    let config = MtlConfig {
                        tasks: args.tasks.unwrap_or(MtlConfig::default().tasks),
                        ..MtlConfig::default()
                    };
                    Dataset::Multitask { config }
                }
            };
            let tasks = match &dataset {
                Dataset::Multitask { config } => config.tasks,
                Dataset::MultitaskFixed { data, .. } => data.tasks(),
                _ => unreachable!(),
            };
            let mut spec = ExperimentSpec::new(dataset, presets::mtl_grids(tasks));
            spec.repeats = args.repeats;
            spec.seed = args.seed;
            spec.eps_mean = args.eps_mean;
            spec.solver.tolerance = presets::SYNTH_TOLERANCE;
            spec
        }
    };
    run_spec(&spec, &args.out)
}

pub fn bench_cmd(args: &BenchArgs) -> std::result::Result<(), Failure> {
    if args.sizes.is_empty() || args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage("--sizes must be non-empty and strictly ascending").into());
    }
    if args.repeats == 0 || args.baseline_repeats == Some(0) {
        return Err(usage("repeats must be at least 1").into());
    }
    let opts = BenchOptions {
        k_rule: match args.k {
            Some(k) => KRule::Fixed(k),
            None => KRule::Fraction(args.k_fraction),
        },
        repeats: args.repeats,
        baseline_repeats: args.baseline_repeats,
        lambda: args.lambda,
        seed: args.seed,
    };
    let rows = theta_norms::experiments::bench_prox_with(&args.sizes, &opts)?;
    let text = match args.out.format {
        Format::Csv => bench_csv(&rows),
        Format::Json => bench_json(&rows)? + "\n",
    };
    emit(&args.out, &text)?;
    Ok(())
}

pub fn synth_cmd(args: &SynthArgs) -> std::result::Result<(), Failure> {
    let families = args
        .norms
        .iter()
        .map(|n| Family::parse(n).ok_or_else(|| usage(format!("unknown norm {n:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let dataset = match args.kind {
        SynthKind::Lowrank => presets::lowrank(
            args.m,
            args.rank,
            args.noise_sd.unwrap_or(presets::LOWRANK_NOISE_SD),
            args.fraction,
        ),
        SynthKind::Block => presets::block(
            args.m,
            args.rank,
            args.noise_sd.unwrap_or(presets::BLOCK_NOISE_SD),
            args.fraction,
        ),
    };
    let mut spec = presets::synth_spec(
        dataset,
        &families,
        args.lambdas.clone(),
        args.repeats,
        args.seed,
    );
    if let Some(t) = args.tolerance {
        spec.solver.tolerance = t;
    }
    run_spec(&spec, &args.out)
}
