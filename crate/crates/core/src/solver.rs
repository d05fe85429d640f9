//! Accelerated proximal gradient (FISTA) for `ℓ(W) + λΩ(W)`.
//!
//! `Ω` is one of the spectral regularizers below. Squared norms enter as
//! `Ω = ½‖W‖²`, so a gradient step of length `t` is followed by the prox of
//! `(tλ/2)‖·‖²`. Centered regularizers are solved over the pair `(V, z)` with
//! `W = V + z1ᵀ` and the penalty on `V` only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::data::{ObservationSet, Split};
use crate::experiments::generate::MtlTask;
use crate::norms::{BoxParams, KSupportParams, NormParams};
use crate::spectral::{
    centering, prox_spectral_elastic_net, spectral_norm, spectral_prox_with_sigma, ClusterParams,
    SpectralOperand,
};

/// Objective growth that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative objective change below which the run stops.
    pub tolerance: f64,
    /// Fixed step; `None` uses `1/L`.
    pub step_size: Option<f64>,
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-5,
            step_size: None,
            record_trace: true,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if let Some(s) = self.step_size {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "step size must be > 0, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// FISTA bookkeeping at termination.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Last iterate (`V` for centered problems).
    pub iterate: DMatrix<f64>,
    /// Offset `z` for centered problems.
    pub offset: Option<DVector<f64>>,
    pub extrapolation: DMatrix<f64>,
    pub momentum: f64,
    pub objective_trace: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub initial_objective: f64,
    pub objective: f64,
    pub step_size: f64,
}

/// Smooth data term with a Lipschitz gradient.
pub trait Loss: Sync {
    /// Shape `(d, m)` of the variable.
    fn shape(&self) -> (usize, usize);
    fn value_grad(&self, w: &DMatrix<f64>) -> (f64, DMatrix<f64>);
    fn value(&self, w: &DMatrix<f64>) -> f64 {
        self.value_grad(w).0
    }
    fn lipschitz(&self) -> f64;
}

/// `½ Σ_{(i,j) observed} (W_ij − y_ij)²`.
#[derive(Debug, Clone)]
pub struct MaskedSquaredLoss {
    rows: usize,
    cols: usize,
    obs: Vec<(usize, usize, f64)>,
}

impl MaskedSquaredLoss {
    pub fn new(rows: usize, cols: usize, obs: Vec<(usize, usize, f64)>) -> Self {
        Self { rows, cols, obs }
    }

    pub fn from_observations(set: &ObservationSet, split: Split) -> Self {
        Self::new(set.rows(), set.cols(), set.triples(split))
    }
}

impl Loss for MaskedSquaredLoss {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn value_grad(&self, w: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let mut g = DMatrix::zeros(self.rows, self.cols);
        let mut v = 0.0;
        for &(i, j, y) in &self.obs {
            let r = w[(i, j)] - y;
            v += 0.5 * r * r;
            g[(i, j)] = r;
        }
        (v, g)
    }

    fn value(&self, w: &DMatrix<f64>) -> f64 {
        self.obs
            .iter()
            .map(|&(i, j, y)| 0.5 * (w[(i, j)] - y).powi(2))
            .sum()
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }
}

/// Masked squared loss on the training entries: value and gradient.
pub fn loss_masked_sq(w: &DMatrix<f64>, obs: &ObservationSet) -> Result<(f64, DMatrix<f64>)> {
    if w.shape() != (obs.rows(), obs.cols()) {
        return Err(Error::InvalidInput(format!(
            "iterate shape {:?} does not match observations {}x{}",
            w.shape(),
            obs.rows(),
            obs.cols()
        )));
    }
    Ok(MaskedSquaredLoss::from_observations(obs, Split::Train).value_grad(w))
}

/// `½ Σ_t ‖X_t w_t − y_t‖²` with one column of `W` per task.
#[derive(Debug, Clone)]
pub struct MultitaskSquaredLoss {
    tasks: Vec<MtlTask>,
    dim: usize,
    lipschitz: f64,
}

impl MultitaskSquaredLoss {
    pub fn new(tasks: Vec<MtlTask>) -> Result<Self> {
        let dim = tasks
            .first()
            .map(|t| t.x.ncols())
            .ok_or_else(|| Error::InvalidInput("no tasks".into()))?;
        let mut lipschitz: f64 = 0.0;
        for (i, t) in tasks.iter().enumerate() {
            if t.x.ncols() != dim || t.x.nrows() != t.y.len() {
                return Err(Error::InvalidInput(format!(
                    "task {i} has inconsistent shapes"
                )));
            }
            let gram = t.x.transpose() * &t.x;
            let top = SymmetricEigen::new(gram).eigenvalues.max();
            lipschitz = lipschitz.max(top);
        }
        Ok(Self {
            tasks,
            dim,
            lipschitz: lipschitz.max(f64::MIN_POSITIVE),
        })
    }
}

impl Loss for MultitaskSquaredLoss {
    fn shape(&self) -> (usize, usize) {
        (self.dim, self.tasks.len())
    }

    fn value_grad(&self, w: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let mut g = DMatrix::zeros(self.dim, self.tasks.len());
        let mut v = 0.0;
        for (t, task) in self.tasks.iter().enumerate() {
            let r = &task.x * w.column(t) - &task.y;
            v += 0.5 * r.norm_squared();
            g.set_column(t, &(task.x.transpose() * r));
        }
        (v, g)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Matrix regularizers `Ω`; the objective is `ℓ(W) + λΩ(W)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Regularizer {
    /// `‖W‖_*`.
    Trace,
    /// `‖W‖_* + (μ/2)‖W‖_F²`.
    ElasticNet { mu: f64 },
    /// `½‖W‖²` for the spectral k-support norm.
    SpectralKSupport { k: usize },
    /// `½‖W‖²` for the spectral box norm with `c = (b − a)k + m·a`.
    SpectralBox { a: f64, b: f64, k: f64 },
    /// `½‖W‖²_cl`.
    Cluster { a: f64, b: f64, k: usize },
    /// `½‖WΠ‖²_cl`.
    CenteredCluster { a: f64, b: f64, k: usize },
    /// `½‖WΠ‖²` for the spectral k-support norm.
    CenteredKSupport { k: usize },
}

impl Regularizer {
    /// Short label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            Regularizer::Trace => "tr",
            Regularizer::ElasticNet { .. } => "en",
            Regularizer::SpectralKSupport { .. } => "ks",
            Regularizer::SpectralBox { .. } => "box",
            Regularizer::Cluster { .. } => "cn",
            Regularizer::CenteredCluster { .. } => "c-cn",
            Regularizer::CenteredKSupport { .. } => "c-ks",
        }
    }

    pub fn is_centered(&self) -> bool {
        matches!(
            self,
            Regularizer::CenteredCluster { .. } | Regularizer::CenteredKSupport { .. }
        )
    }

    /// The uncentered regularizer applied to `V` in the centered formulation.
    pub fn base(&self) -> Regularizer {
        match *self {
            Regularizer::CenteredCluster { a, b, k } => Regularizer::Cluster { a, b, k },
            Regularizer::CenteredKSupport { k } => Regularizer::SpectralKSupport { k },
            other => other,
        }
    }

    /// `(k, a)` hyperparameters, when present.
    pub fn k_and_a(&self) -> (Option<f64>, Option<f64>) {
        match *self {
            Regularizer::SpectralKSupport { k } | Regularizer::CenteredKSupport { k } => {
                (Some(k as f64), None)
            }
            Regularizer::SpectralBox { a, k, .. } => (Some(k), Some(a)),
            Regularizer::Cluster { a, k, .. } | Regularizer::CenteredCluster { a, k, .. } => {
                (Some(k as f64), Some(a))
            }
            _ => (None, None),
        }
    }

    /// Norm parameters for squared-norm regularizers at task dimension `m`.
    fn norm_params(&self, m: usize) -> Result<Option<NormParams>> {
        Ok(match *self {
            Regularizer::SpectralKSupport { k } | Regularizer::CenteredKSupport { k } => {
                let p = KSupportParams::new(k)?;
                p.check(m)?;
                Some(p.into())
            }
            Regularizer::SpectralBox { a, b, k } => Some(BoxParams::with_rank(a, b, k, m)?.into()),
            Regularizer::Cluster { a, b, k } | Regularizer::CenteredCluster { a, b, k } => {
                Some(ClusterParams::new(a, b, k)?.box_params(m)?.into())
            }
            Regularizer::Trace | Regularizer::ElasticNet { .. } => None,
        })
    }

    /// Checks the parameters against a `d × m` variable.
    pub fn validate(&self, m: usize) -> Result<()> {
        if let Regularizer::ElasticNet { mu } = self {
            if !(*mu >= 0.0 && mu.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "elastic-net mu must be ≥ 0, got {mu}"
                )));
            }
        }
        self.norm_params(m).map(|_| ())
    }

    /// `Ω(W)`; centered variants evaluate at `WΠ`.
    pub fn value(&self, w: &DMatrix<f64>) -> Result<f64> {
        if self.is_centered() {
            return self.base().value(&centering(w));
        }
        let op = SpectralOperand::new(w.clone())?;
        self.value_of(&op)
    }

    fn value_of(&self, op: &SpectralOperand) -> Result<f64> {
        let nuclear = || op.sigma().iter().sum::<f64>();
        match *self {
            Regularizer::Trace => Ok(nuclear()),
            Regularizer::ElasticNet { mu } => {
                Ok(nuclear() + 0.5 * mu * op.sigma().iter().map(|s| s * s).sum::<f64>())
            }
            _ => {
                let params = self
                    .norm_params(op.tasks())?
                    .expect("squared-norm regularizer");
                let n = spectral_norm(op, &params)?;
                Ok(0.5 * n * n)
            }
        }
    }

    /// Prox of `τΩ` and `Ω` at the result. Centered variants apply their base
    /// regularizer (the `V` step of the centered formulation).
    pub fn prox(&self, w: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, f64)> {
        let reg = self.base();
        let op = SpectralOperand::new(w.clone())?;
        match reg {
            Regularizer::Trace | Regularizer::ElasticNet { .. } => {
                let mu = if let Regularizer::ElasticNet { mu } = reg {
                    mu
                } else {
                    0.0
                };
                let x = prox_spectral_elastic_net(&op, tau, tau * mu)?;
                let s: Vec<f64> = op
                    .sigma()
                    .iter()
                    .map(|s| (s - tau).max(0.0) / (1.0 + tau * mu))
                    .collect();
                let value = s.iter().sum::<f64>() + 0.5 * mu * s.iter().map(|v| v * v).sum::<f64>();
                Ok((x, value))
            }
            _ => {
                let params = reg
                    .norm_params(op.tasks())?
                    .expect("squared-norm regularizer");
                let (x, mut s) = spectral_prox_with_sigma(&op, tau, &params)?;
                s.resize(op.tasks(), 0.0);
                let n = crate::norms::norm(&s, &params)?;
                Ok((x, 0.5 * n * n))
            }
        }
    }
}

/// Solution of a regularized problem.
#[derive(Debug, Clone)]
pub struct Solution {
    pub w: DMatrix<f64>,
    /// Offset `z` for centered regularizers.
    pub z: Option<DVector<f64>>,
    pub state: SolverState,
}

/// Matrix completion from the training entries of an observation set.
#[derive(Debug, Clone)]
pub struct CompletionProblem {
    pub observations: ObservationSet,
    pub regularizer: Regularizer,
    pub lambda: f64,
    /// Weight of the mean penalty `λ·εM·m·‖w̄‖²` added for centered variants.
    pub eps_mean: f64,
}

impl CompletionProblem {
    pub fn new(
        observations: ObservationSet,
        regularizer: Regularizer,
        lambda: f64,
    ) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        regularizer.validate(observations.cols())?;
        Ok(Self {
            observations,
            regularizer,
            lambda,
            eps_mean: 0.0,
        })
    }

    pub fn with_eps_mean(mut self, eps_mean: f64) -> Self {
        self.eps_mean = eps_mean;
        self
    }

    pub fn loss(&self) -> MaskedSquaredLoss {
        MaskedSquaredLoss::from_observations(&self.observations, Split::Train)
    }

    pub fn solve(&self, config: &SolverConfig) -> Result<Solution> {
        solve(
            &self.loss(),
            &self.regularizer,
            self.lambda,
            self.eps_mean,
            config,
        )
    }

    /// `ℓ(W) + λΩ(W)` (plus the mean penalty for centered variants).
    pub fn objective(&self, w: &DMatrix<f64>) -> Result<f64> {
        objective(
            &self.loss(),
            &self.regularizer,
            self.lambda,
            self.eps_mean,
            w,
        )
    }
}

/// Objective of [`solve`] at `w`.
pub fn objective<L: Loss>(
    loss: &L,
    reg: &Regularizer,
    lambda: f64,
    eps_mean: f64,
    w: &DMatrix<f64>,
) -> Result<f64> {
    let mut f = loss.value(w) + lambda * reg.value(w)?;
    if reg.is_centered() {
        f += mean_penalty(w, lambda * eps_mean).0;
    }
    Ok(f)
}

/// `κ·m·‖w̄‖²` and its gradient `2κ·w̄1ᵀ`.
fn mean_penalty(w: &DMatrix<f64>, kappa: f64) -> (f64, DMatrix<f64>) {
    let m = w.ncols();
    let mean = w.column_mean();
    let value = kappa * m as f64 * mean.norm_squared();
    let mut g = DMatrix::zeros(w.nrows(), m);
    if kappa != 0.0 {
        for mut col in g.column_iter_mut() {
            col.copy_from(&(&mean * (2.0 * kappa)));
        }
    }
    (value, g)
}

/// Runs the right solver for the regularizer.
pub fn solve<L: Loss>(
    loss: &L,
    reg: &Regularizer,
    lambda: f64,
    eps_mean: f64,
    config: &SolverConfig,
) -> Result<Solution> {
    if reg.is_centered() {
        let (w, z, state) = solve_centered_loss(loss, reg, lambda, eps_mean, config)?;
        Ok(Solution {
            w,
            z: Some(z),
            state,
        })
    } else {
        let (w, state) = fista_loss(loss, reg, lambda, config)?;
        Ok(Solution { w, z: None, state })
    }
}

/// FISTA on a completion problem. Centered regularizers are routed through
/// [`solve_centered`].
pub fn fista(
    problem: &CompletionProblem,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, SolverState)> {
    let sol = problem.solve(config)?;
    Ok((sol.w, sol.state))
}

/// Centered completion: returns `W = V + z1ᵀ`, `z` and the state.
pub fn solve_centered(
    problem: &CompletionProblem,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, DVector<f64>, SolverState)> {
    if !problem.regularizer.is_centered() {
        return Err(Error::InvalidParams(format!(
            "solve_centered needs a centered regularizer, got {}",
            problem.regularizer.label()
        )));
    }
    solve_centered_loss(
        &problem.loss(),
        &problem.regularizer,
        problem.lambda,
        problem.eps_mean,
        config,
    )
}

/// FISTA for an uncentered regularizer and any loss.
pub fn fista_loss<L: Loss>(
    loss: &L,
    reg: &Regularizer,
    lambda: f64,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, SolverState)> {
    if reg.is_centered() {
        return Err(Error::InvalidParams(format!(
            "{} is centered; use the centered solver",
            reg.label()
        )));
    }
    check_lambda(lambda)?;
    let (d, m) = loss.shape();
    reg.validate(m)?;
    let x0 = DMatrix::zeros(d, m);
    run(
        x0,
        loss.lipschitz(),
        lambda,
        config,
        |x| loss.value_grad(x),
        |x, tau| reg.prox(x, tau),
    )
}

/// Centered problem over `(V, z)`, with `W = V + z1ᵀ` and the loss
/// `ℓ(W) + λ·εM·m·‖w̄‖²`.
///
/// The offset is stored internally as `z' = √m·z`; this balances the two
/// blocks so the joint gradient has Lipschitz constant `2(L + 2λεM)`.
pub fn solve_centered_loss<L: Loss>(
    loss: &L,
    reg: &Regularizer,
    lambda: f64,
    eps_mean: f64,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, DVector<f64>, SolverState)> {
    check_lambda(lambda)?;
    if !(eps_mean >= 0.0 && eps_mean.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "mean penalty weight must be ≥ 0, got {eps_mean}"
        )));
    }
    let (d, m) = loss.shape();
    let base = reg.base();
    base.validate(m)?;
    let scale = 1.0 / (m as f64).sqrt();
    let kappa = lambda * eps_mean;

    let unpack = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let z = x.column(m) * scale;
        let mut w = x.columns(0, m).into_owned();
        for mut col in w.column_iter_mut() {
            col += &z;
        }
        w
    };
    let smooth = |x: &DMatrix<f64>| -> (f64, DMatrix<f64>) {
        let w = unpack(x);
        let (mut v, mut g) = loss.value_grad(&w);
        if kappa != 0.0 {
            let (pv, pg) = mean_penalty(&w, kappa);
            v += pv;
            g += pg;
        }
        let gz = g.column_sum() * scale;
        let mut packed = DMatrix::zeros(d, m + 1);
        packed.columns_mut(0, m).copy_from(&g);
        packed.set_column(m, &gz);
        (v, packed)
    };
    let prox = |x: &DMatrix<f64>, tau: f64| -> Result<(DMatrix<f64>, f64)> {
        let (v, omega) = base.prox(&x.columns(0, m).into_owned(), tau)?;
        let mut out = x.clone();
        out.columns_mut(0, m).copy_from(&v);
        Ok((out, omega))
    };
    let lipschitz = 2.0 * (loss.lipschitz() + 2.0 * kappa);
    let (x, mut state) = run(
        DMatrix::zeros(d, m + 1),
        lipschitz,
        lambda,
        config,
        smooth,
        prox,
    )?;
    let w = unpack(&x);
    let z = x.column(m) * scale;
    state.iterate = x.columns(0, m).into_owned();
    state.extrapolation = unpack(&state.extrapolation);
    state.offset = Some(z.clone());
    Ok((w, z, state))
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

/// FISTA from `x0`, assuming `Ω(x0) = 0`.
fn run<S, P>(
    x0: DMatrix<f64>,
    lipschitz: f64,
    lambda: f64,
    config: &SolverConfig,
    smooth: S,
    prox: P,
) -> Result<(DMatrix<f64>, SolverState)>
where
    S: Fn(&DMatrix<f64>) -> (f64, DMatrix<f64>),
    P: Fn(&DMatrix<f64>, f64) -> Result<(DMatrix<f64>, f64)>,
{
    config.validate()?;
    let step = config.step_size.unwrap_or(1.0 / lipschitz);
    let f0 = smooth(&x0).0;
    let mut x = x0.clone();
    let mut y = x0;
    let mut t: f64 = 1.0;
    let mut f_prev = f0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iterations {
        let (_, g) = smooth(&y);
        let (x_next, omega) = prox(&(&y - g * step), step * lambda)?;
        let f = smooth(&x_next).0 + lambda * omega;
        iterations = it;
        if config.record_trace {
            trace.push(f);
        }
        if !f.is_finite() || (f0 > 0.0 && f > DIVERGENCE_FACTOR * f0) {
            return Err(Error::Divergence {
                iteration: it,
                objective: f,
                initial: f0,
            });
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_next + (&x_next - &x) * ((t - 1.0) / t_next);
        x = x_next;
        t = t_next;

        let change = if f_prev == 0.0 {
            if f == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (f - f_prev).abs() / f_prev.abs()
        };
        f_prev = f;
        if change < config.tolerance {
            converged = true;
            break;
        }
    }

    let state = SolverState {
        iterate: x.clone(),
        offset: None,
        extrapolation: y,
        momentum: t,
        objective_trace: trace,
        iterations_run: iterations,
        converged,
        initial_objective: f0,
        objective: f_prev,
        step_size: step,
    };
    Ok((x, state))
}

/// `‖x − prox_{tλΩ}(x − t∇ℓ(x))‖_F / (1 + ‖x‖_F)` with `t = 1/L`.
pub fn prox_gradient_residual<L: Loss>(
    loss: &L,
    reg: &Regularizer,
    lambda: f64,
    x: &DMatrix<f64>,
) -> Result<f64> {
    let step = 1.0 / loss.lipschitz();
    let (_, g) = loss.value_grad(x);
    let (p, _) = reg.prox(&(x - g * step), step * lambda)?;
    Ok((x - p).norm() / (1.0 + x.norm()))
}
