//! Error metrics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::data::{ObservationSet, Split};
use crate::error::{Error, Result};

/// Where the relative error is measured.
#[derive(Debug, Clone, Copy)]
pub enum Scope<'a> {
    /// Every entry of a known ground-truth matrix.
    Full(&'a DMatrix<f64>),
    /// The entries of one split, with their recorded values as truth.
    Entries(&'a ObservationSet, Split),
}

/// `‖truth − prediction‖² / ‖truth‖²` over the scope.
pub fn metric_relative_error(prediction: &DMatrix<f64>, scope: Scope<'_>) -> Result<f64> {
    let (num, den) = match scope {
        Scope::Full(truth) => {
            if truth.shape() != prediction.shape() {
                return Err(Error::InvalidInput(format!(
                    "shape mismatch: truth {:?}, prediction {:?}",
                    truth.shape(),
                    prediction.shape()
                )));
            }
            ((truth - prediction).norm_squared(), truth.norm_squared())
        }
        Scope::Entries(obs, split) => {
            check_shape(obs, prediction)?;
            obs.split(split).fold((0.0, 0.0), |(n, d), e| {
                let r = e.value - prediction[(e.row, e.col)];
                (n + r * r, d + e.value * e.value)
            })
        }
    };
    if den == 0.0 {
        return Err(Error::UndefinedMetric(
            "relative error of a zero reference".into(),
        ));
    }
    Ok(num / den)
}

fn check_shape(obs: &ObservationSet, prediction: &DMatrix<f64>) -> Result<()> {
    if prediction.shape() != (obs.rows(), obs.cols()) {
        return Err(Error::InvalidInput(format!(
            "prediction shape {:?} does not match observations {}x{}",
            prediction.shape(),
            obs.rows(),
            obs.cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NmaeMode {
    /// `mean |y − ŷ| / (r_max − r_min)`.
    #[default]
    Standard,
    /// `Σ (y − ŷ)² / (n / (r_max − r_min))`, the formula as sometimes displayed.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmaeOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub mode: NmaeMode,
    /// Clamp predictions into `[r_min, r_max]` first.
    pub clamp: bool,
}

impl NmaeOptions {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        Self {
            r_min,
            r_max,
            mode: NmaeMode::Standard,
            clamp: false,
        }
    }
}

/// Normalized mean absolute error on the test split.
pub fn metric_nmae(
    obs: &ObservationSet,
    prediction: &DMatrix<f64>,
    opts: &NmaeOptions,
) -> Result<f64> {
    nmae_on(obs, Split::Test, prediction, opts)
}

/// NMAE on any split.
pub fn nmae_on(
    obs: &ObservationSet,
    split: Split,
    prediction: &DMatrix<f64>,
    opts: &NmaeOptions,
) -> Result<f64> {
    if !(opts.r_max > opts.r_min) {
        return Err(Error::InvalidParams(format!(
            "rating range needs r_max > r_min, got [{}, {}]",
            opts.r_min, opts.r_max
        )));
    }
    check_shape(obs, prediction)?;
    let range = opts.r_max - opts.r_min;
    let (mut abs, mut sq, mut n) = (0.0, 0.0, 0usize);
    for e in obs.split(split) {
        let mut p = prediction[(e.row, e.col)];
        if opts.clamp {
            p = p.clamp(opts.r_min, opts.r_max);
        }
        abs += (e.value - p).abs();
        sq += (e.value - p) * (e.value - p);
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedMetric(format!(
            "NMAE on an empty {} set",
            split.as_str()
        )));
    }
    Ok(match opts.mode {
        NmaeMode::Standard => abs / n as f64 / range,
        NmaeMode::Literal => sq / (n as f64 / range),
    })
}
