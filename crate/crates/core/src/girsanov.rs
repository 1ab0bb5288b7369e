//! The Girsanov exponential `M_T` and its deterministic approximations.
//!
//! `M_T = exp{∫ f(α+B) dB − ½∫ f(α+B)² ds}` is simulated with left-point Itô
//! sums on a Brownian path. The approximation `𝓜_T = u(T, B_T)` uses the
//! closed-form solution `u` of the transport PDE
//!
//! ```text
//! ∂_t u = −∂_x[f(α+x) u] + f(α+x) u x / T,   u(0, x) = 1,
//! u(t, x) = f(α+y)/f(α+x) · exp{−(y² − x²)/(2T)},   y = φ_{−t}(x),
//! ```
//!
//! and `𝓜̃_T` freezes the drift at `f(α)`. Both only need the endpoint `B_T`,
//! so `M_T` and `𝓜_T` are compared on common paths.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::drift::DriftError;
use crate::lamperti::{LampertiError, LampertiMap};
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GirsanovError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Lamperti(#[from] LampertiError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot fit a rate: {0}")]
    RateFit(String),
}

type Result<T> = std::result::Result<T, GirsanovError>;

/// A Brownian path on `[0, T]` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub horizon: f64,
    pub n_steps: usize,
    pub increments: Vec<f64>,
    pub seed: u64,
}

impl BrownianPath {
    pub fn generate(horizon: f64, n_steps: usize, seed: u64) -> Result<Self> {
        check_horizon(horizon)?;
        if n_steps == 0 {
            return Err(GirsanovError::InvalidParameter("n_steps must be at least 1".into()));
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let sd = (horizon / n_steps as f64).sqrt();
        let increments = (0..n_steps)
            .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        Ok(Self { horizon, n_steps, increments, seed })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// `B_{t_0} = 0, B_{t_1}, …, B_{t_n}`.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_steps + 1);
        let mut b = 0.0;
        out.push(b);
        for dbi in &self.increments {
            b += dbi;
            out.push(b);
        }
        out
    }

    pub fn endpoint(&self) -> f64 {
        self.increments.iter().sum()
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(GirsanovError::InvalidParameter(format!("horizon T must be positive, got {t}")))
    }
}

/// `M_T` by left-point sums on `path`.
pub fn simulate_exponential(m: &LampertiMap, path: &BrownianPath) -> Result<f64> {
    let dt = path.dt();
    let mut b = 0.0;
    let mut log_m = 0.0;
    for &db in &path.increments {
        let f = m.f_shifted(b)?;
        log_m += f * db - 0.5 * f * f * dt;
        b += db;
    }
    Ok(log_m.exp())
}

/// `(M_T, B_T)` for the path with the given seed, generated on the fly.
/// Bit-identical to [`BrownianPath::generate`] followed by
/// [`simulate_exponential`].
fn exponential_streaming(m: &LampertiMap, horizon: f64, n_steps: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let dt = horizon / n_steps as f64;
    let sd = dt.sqrt();
    let mut b = 0.0;
    let mut log_m = 0.0;
    for _ in 0..n_steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        let db = sd * z;
        let f = m.f_shifted(b)?;
        log_m += f * db - 0.5 * f * f * dt;
        b += db;
    }
    Ok((log_m.exp(), b))
}

/// `u(t, x)` for horizon `T`, `0 ≤ t ≤ T`.
pub fn u_eval(m: &LampertiMap, t: f64, x: f64, horizon: f64) -> Result<f64> {
    check_horizon(horizon)?;
    if !(0.0..=horizon).contains(&t) {
        return Err(GirsanovError::InvalidParameter(format!("t = {t} outside [0, {horizon}]")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let (y, jac) = m.flow_with_jacobian(x, -t)?;
    Ok(jac * (-(y - x) * (y + x) / (2.0 * horizon)).exp())
}

/// `𝓜_T = u(T, B_T)`.
pub fn approx_exponential(m: &LampertiMap, b_t: f64, horizon: f64) -> Result<f64> {
    u_eval(m, horizon, b_t, horizon)
}

/// `𝓜̃_T = exp{−[(B_T − f(α)T)² − B_T²] / (2T)}`, the solution of the
/// frozen-drift transport equation at `t = T`.
pub fn approx_exponential_euler(m: &LampertiMap, b_t: f64, horizon: f64) -> Result<f64> {
    check_horizon(horizon)?;
    let c = m.f_shifted(0.0)? * horizon;
    Ok((-((b_t - c) * (b_t - c) - b_t * b_t) / (2.0 * horizon)).exp())
}

/// Central-difference residual of the transport PDE satisfied by `u`:
/// `∂_t u + ∂_x[f(α+x) u] − f(α+x) u x / T` at an interior point.
pub fn pde_residual(m: &LampertiMap, t: f64, x: f64, horizon: f64, h: f64) -> Result<f64> {
    let u = |t: f64, x: f64| u_eval(m, t, x, horizon);
    let fu = |x: f64| -> Result<f64> { Ok(m.f_shifted(x)? * u(t, x)?) };
    let du_dt = (u(t + h, x)? - u(t - h, x)?) / (2.0 * h);
    let dfu_dx = (fu(x + h)? - fu(x - h)?) / (2.0 * h);
    Ok(du_dt + dfu_dx - fu(x)? * x / horizon)
}

/// Monte Carlo settings for [`lp_error`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub base_seed: u64,
    pub p: f64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(GirsanovError::InvalidParameter(format!("n_paths must be ≥ 2, got {}", self.n_paths)));
        }
        if self.n_steps < 1 {
            return Err(GirsanovError::InvalidParameter("n_steps must be ≥ 1".into()));
        }
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(GirsanovError::InvalidParameter(format!("p must be ≥ 1, got {}", self.p)));
        }
        Ok(())
    }
}

/// Step count that keeps the Itô-sum bias well below the `O(T)` signal.
pub fn default_n_steps(horizon: f64) -> usize {
    1024usize.max((horizon / 1e-5).ceil() as usize)
}

/// Monte Carlo estimate of `‖M_T − 𝓜_T‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    /// `(E|M_T − 𝓜_T|^p)^{1/p}`.
    pub mean: f64,
    /// Delta-method standard error of `mean`.
    pub std_error: f64,
    pub n: usize,
    /// `E|M_T − 𝓜_T|^p` and its standard error.
    pub moment: f64,
    pub moment_std_error: f64,
}

impl ErrorEstimate {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone, n: usize, p: f64) -> Self {
        let nf = n as f64;
        let moment = samples.clone().sum::<f64>() / nf;
        let var = samples.map(|v| (v - moment) * (v - moment)).sum::<f64>() / (nf - 1.0);
        let moment_std_error = (var / nf).sqrt();
        let mean = moment.powf(1.0 / p);
        let std_error = if moment > 0.0 {
            moment.powf(1.0 / p - 1.0) / p * moment_std_error
        } else {
            0.0
        };
        Self { mean, std_error, n, moment, moment_std_error }
    }
}

/// Paired samples `(M_T, 𝓜_T)`; path `i` uses stream `i` of `base_seed`.
pub fn paired_exponentials(
    m: &LampertiMap,
    horizon: f64,
    n_paths: usize,
    n_steps: usize,
    base_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_horizon(horizon)?;
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (mt, bt) = exponential_streaming(m, horizon, n_steps, rng::derive_seed(base_seed, i))?;
            Ok((mt, approx_exponential(m, bt, horizon)?))
        })
        .collect()
}

/// `‖M_T − 𝓜_T‖_p` for several exponents from one set of common paths.
pub fn lp_errors(m: &LampertiMap, horizon: f64, cfg: &McConfig, ps: &[f64]) -> Result<Vec<ErrorEstimate>> {
    cfg.validate()?;
    for &p in ps {
        McConfig { p, ..*cfg }.validate()?;
    }
    let pairs = paired_exponentials(m, horizon, cfg.n_paths, cfg.n_steps, cfg.base_seed)?;
    Ok(ps
        .iter()
        .map(|&p| {
            let it = pairs.iter().map(move |(a, b)| (a - b).abs().powf(p));
            ErrorEstimate::from_samples(it, pairs.len(), p)
        })
        .collect())
}

pub fn lp_error(m: &LampertiMap, horizon: f64, cfg: &McConfig) -> Result<ErrorEstimate> {
    Ok(lp_errors(m, horizon, cfg, &[cfg.p])?[0])
}

/// Sample statistics of `𝓜_T` over exact endpoints `B_T ~ N(0, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationStats {
    pub mean: f64,
    pub std_error: f64,
    pub min: f64,
    pub n: usize,
}

pub fn approx_exponential_stats(m: &LampertiMap, horizon: f64, n: usize, base_seed: u64) -> Result<NormalizationStats> {
    check_horizon(horizon)?;
    if n < 2 {
        return Err(GirsanovError::InvalidParameter("need at least 2 samples".into()));
    }
    let sd = horizon.sqrt();
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng::stream_rng(base_seed, i));
            approx_exponential(m, sd * z, horizon)
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(NormalizationStats { mean, std_error: (var / nf).sqrt(), min, n })
}

/// Least-squares fit of `log error` against `log T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn rate_fit(errors: &[(f64, ErrorEstimate)]) -> Result<RateFit> {
    let pairs: Vec<(f64, f64)> = errors.iter().map(|(t, e)| (*t, e.mean)).collect();
    fit_power_law(&pairs)
}

/// Fit `log y = slope·log x + intercept` over `(x, y)` pairs.
pub fn fit_power_law(data: &[(f64, f64)]) -> Result<RateFit> {
    let mut xs: Vec<f64> = data.iter().map(|d| d.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(GirsanovError::RateFit(format!("need ≥ 3 distinct abscissae, got {}", xs.len())));
    }
    if let Some((x, y)) = data.iter().find(|(x, y)| !(*x > 0.0) || !(*y > 0.0)) {
        return Err(GirsanovError::RateFit(format!("non-positive value at ({x}, {y}); cannot take logs")));
    }
    let points: Vec<(f64, f64)> = data.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r_squared, points })
}
