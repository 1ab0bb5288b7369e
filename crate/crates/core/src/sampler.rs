//! Samplers for `X_T` and for the crypto-deterministic `𝓧_T`.
//!
//! `𝓧_T = φ_T(x′ + B_T)` is drawn exactly through the flow: the randomness
//! lives entirely in the initial condition. `X_T` itself is approximated by
//! fine Euler-Maruyama paths. Sample `i` always uses stream `i` of the seed.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift::DriftError;
use crate::lamperti::{LampertiError, LampertiMap};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Lamperti(#[from] LampertiError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

type Result<T> = std::result::Result<T, SamplerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Crypto,
    EulerMaruyamaPath,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub values: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SampleSet {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (self.values.len() as f64 - 1.0)
    }
}

fn check(horizon: f64, n: usize) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(SamplerError::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if n == 0 {
        return Err(SamplerError::InvalidParameter("need at least one sample".into()));
    }
    Ok(())
}

/// `n` draws of `φ_T(x′ + √T g)`, `g ~ N(0, 1)`.
pub fn sample_crypto(m: &LampertiMap, x_prime: f64, horizon: f64, n: usize, seed: u64) -> Result<SampleSet> {
    check(horizon, n)?;
    let sd = horizon.sqrt();
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let g: f64 = StandardNormal.sample(&mut rng::stream_rng(seed, i));
            Ok(m.physical_flow(x_prime + sd * g, horizon)?)
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet { values, horizon, seed, scheme: Scheme::Crypto })
}

/// Endpoints of `n` Euler-Maruyama paths of `dX = f(X) dt + dB` from `x′`.
pub fn sample_em_path(
    m: &LampertiMap,
    x_prime: f64,
    horizon: f64,
    n_steps: usize,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    check(horizon, n)?;
    if n_steps == 0 {
        return Err(SamplerError::InvalidParameter("n_steps must be at least 1".into()));
    }
    let drift = m.drift();
    let dt = horizon / n_steps as f64;
    let sd = dt.sqrt();
    let values = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream_rng(seed, i);
            let mut x = x_prime;
            for _ in 0..n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                x += drift.value(x)? * dt + sd * z;
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    Ok(SampleSet { values, horizon, seed, scheme: Scheme::EulerMaruyamaPath })
}

/// Kolmogorov-Smirnov statistic `sup_x |F_n(x) − F(x)|`.
pub fn ks_distance(samples: &SampleSet, cdf: impl Fn(f64) -> f64) -> f64 {
    ks_statistic(&samples.values, cdf)
}

pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
