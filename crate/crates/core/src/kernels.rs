//! Short-time transition densities `p(T, x | 0, x′)` of `dX = f(X) dt + dB`.
//!
//! | kind             | density                                                        |
//! |------------------|----------------------------------------------------------------|
//! | `girsanov`       | `f(y)/f(x) · N(y; x′, T)`,  `y = φ_{−T}(x)`                    |
//! | `euler_maruyama` | `N(x; x′ + f(x′)T, T)`                                         |
//! | `backward_euler` | `(2πT)^{−½} exp{−[x − x′ − f(x)T]²/(2T) − f′(x)T}`             |
//! | `haken`          | same expression as `backward_euler`, reached through the      |
//! |                  | short-time expansion of the Fokker-Planck operator             |
//!
//! Only the `girsanov` kernel is an exact probability density: it is the law of
//! `φ_T(x′ + B_T)`. The last two do not integrate to one in general.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift::DriftError;
use crate::lamperti::{LampertiError, LampertiMap};
use crate::quadrature::{self, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Lamperti(#[from] LampertiError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid [{x_min}, {x_max}] too narrow: boundary density {boundary:e} vs peak {peak:e}")]
    TailGuard { x_min: f64, x_max: f64, boundary: f64, peak: f64 },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("unknown kernel kind `{0}`")]
    UnknownKind(String),
}

impl From<QuadError<KernelError>> for KernelError {
    fn from(e: QuadError<KernelError>) -> Self {
        match e {
            QuadError::NonConvergence { a, b, .. } => KernelError::Quadrature { a, b },
            QuadError::Integrand(e) => e,
        }
    }
}

type Result<T> = std::result::Result<T, KernelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Girsanov,
    EulerMaruyama,
    BackwardEuler,
    Haken,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] =
        [KernelKind::Girsanov, KernelKind::EulerMaruyama, KernelKind::BackwardEuler, KernelKind::Haken];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Girsanov => "girsanov",
            KernelKind::EulerMaruyama => "euler_maruyama",
            KernelKind::BackwardEuler => "backward_euler",
            KernelKind::Haken => "haken",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = KernelError;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        KernelKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| KernelError::UnknownKind(s.to_owned()))
    }
}

/// A discrete law `Σ w_j δ_{a_j}` for the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct InitialLaw {
    atoms: Vec<(f64, f64)>,
}

impl InitialLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(KernelError::InvalidParameter("initial law needs at least one atom".into()));
        }
        if let Some((a, w)) = atoms.iter().find(|(a, w)| !a.is_finite() || !(*w > 0.0)) {
            return Err(KernelError::InvalidParameter(format!("bad atom ({a}, {w})")));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(KernelError::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn point(a: f64) -> Self {
        Self { atoms: vec![(a, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl TryFrom<Vec<(f64, f64)>> for InitialLaw {
    type Error = KernelError;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<InitialLaw> for Vec<(f64, f64)> {
    fn from(l: InitialLaw) -> Self {
        l.atoms
    }
}

/// Uniform grid `x_min = x_0 < … < x_{n-1} = x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let g = Self { x_min, x_max, n_points };
        g.validate()?;
        Ok(g)
    }

    /// Grid covering `x′ + [min(f_lo T, 0), max(f_hi T, 0)]` padded by `8√T`
    /// on both sides.
    pub fn padded(x_prime: f64, horizon: f64, f_lo: f64, f_hi: f64, n_points: usize) -> Result<Self> {
        let pad = 8.0 * horizon.sqrt();
        Self::new(
            x_prime + (f_lo * horizon).min(0.0) - pad,
            x_prime + (f_hi * horizon).max(0.0) + pad,
            n_points,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 || !(self.x_min < self.x_max) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(KernelError::InvalidParameter(format!(
                "grid needs x_min < x_max and ≥ 2 points, got [{}, {}] with {}",
                self.x_min, self.x_max, self.n_points
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Trapezoid-rule weights.
    pub fn weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n_points];
        w[0] = 0.5 * dx;
        w[self.n_points - 1] = 0.5 * dx;
        w
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `N(z; 0, var)`.
#[inline]
pub fn gaussian(z: f64, var: f64) -> f64 {
    INV_SQRT_2PI / var.sqrt() * (-z * z / (2.0 * var)).exp()
}

fn check_horizon(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(KernelError::InvalidParameter(format!("horizon T must be positive, got {t}")))
    }
}

/// Evaluate one kernel at `(x | x′)` over horizon `T`. The `girsanov` kind
/// flows `x` backward through `m` (in unshifted coordinates, so `m`'s α only
/// affects rounding); the others read the drift directly.
pub fn kernel_eval(kind: KernelKind, m: &LampertiMap, horizon: f64, x: f64, x_prime: f64) -> Result<f64> {
    check_horizon(horizon)?;
    let t = horizon;
    Ok(match kind {
        KernelKind::Girsanov => {
            let alpha = m.alpha();
            let (z, jac) = m.flow_with_jacobian(x - alpha, -t)?;
            jac * gaussian(alpha + z - x_prime, t)
        }
        KernelKind::EulerMaruyama => {
            let f = m.drift().value(x_prime)?;
            gaussian(x - x_prime - f * t, t)
        }
        KernelKind::BackwardEuler => {
            let e = m.drift().eval(x)?;
            let z = x - x_prime - e.f * t;
            INV_SQRT_2PI / t.sqrt() * (-z * z / (2.0 * t) - e.f1 * t).exp()
        }
        KernelKind::Haken => {
            let e = m.drift().eval(x)?;
            let shift = x - x_prime - e.f * t;
            INV_SQRT_2PI / t.sqrt() * (-(shift * shift) / (2.0 * t) - e.f1 * t).exp()
        }
    })
}

/// Kernel values on every grid point, in grid order.
pub fn kernel_on_grid(kind: KernelKind, m: &LampertiMap, horizon: f64, x_prime: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    grid.validate()?;
    (0..grid.n_points)
        .into_par_iter()
        .map(|i| kernel_eval(kind, m, horizon, grid.point(i), x_prime))
        .collect()
}

/// Boundary values must be below this fraction of the peak.
pub const TAIL_GUARD: f64 = 1e-12;

fn tail_guard(values: &[f64], grid: &GridSpec) -> Result<()> {
    let peak = values.iter().copied().fold(0.0, f64::max);
    let boundary = values[0].max(values[values.len() - 1]);
    if boundary >= TAIL_GUARD * peak {
        return Err(KernelError::TailGuard { x_min: grid.x_min, x_max: grid.x_max, boundary, peak });
    }
    Ok(())
}

/// `∫ f(x) dx` over the grid range with one adaptive panel per grid cell.
fn integrate_cells(grid: &GridSpec, tol: f64, f: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
    let cells = grid.n_points - 1;
    let per_cell = tol / cells as f64;
    let parts: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|i| Ok(quadrature::integrate(&f, grid.point(i), grid.point(i + 1), per_cell)?))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum())
}

/// `∫ p(T, x | x′) dx − 1` over the grid range by adaptive quadrature. The
/// grid must be wide enough that the boundary values are negligible.
pub fn normalization_defect(kind: KernelKind, m: &LampertiMap, horizon: f64, x_prime: f64, grid: &GridSpec) -> Result<f64> {
    let values = kernel_on_grid(kind, m, horizon, x_prime, grid)?;
    tail_guard(&values, grid)?;
    let mass = integrate_cells(grid, 1e-10, |x| kernel_eval(kind, m, horizon, x, x_prime))?;
    Ok(mass - 1.0)
}

/// Density of `X_T` when `X_0 ~ law`: `Σ_j w_j · p(T, x | a_j)`, with the map
/// shifted to `α = a_j` for atom `j`.
pub fn marginal_density(kind: KernelKind, m: &LampertiMap, law: &InitialLaw, horizon: f64, x: f64) -> Result<f64> {
    law.atoms()
        .iter()
        .map(|&(a, w)| Ok(w * kernel_eval(kind, &m.with_alpha(a), horizon, x, a)?))
        .sum()
}

/// Tabulated CDF of a kernel: cell-wise adaptive quadrature accumulated over
/// the grid, cubic Hermite interpolation in between (the density supplies the
/// slopes). 0 below the grid, the accumulated mass above it.
#[derive(Debug, Clone)]
pub struct KernelCdf {
    grid: GridSpec,
    cumulative: Vec<f64>,
    density: Vec<f64>,
}

impl KernelCdf {
    pub fn tabulate(kind: KernelKind, m: &LampertiMap, horizon: f64, x_prime: f64, grid: &GridSpec) -> Result<Self> {
        let density = kernel_on_grid(kind, m, horizon, x_prime, grid)?;
        tail_guard(&density, grid)?;
        let cells = grid.n_points - 1;
        let per_cell = 1e-10 / cells as f64;
        let f = |x: f64| kernel_eval(kind, m, horizon, x, x_prime);
        let parts: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|i| Ok(quadrature::integrate(f, grid.point(i), grid.point(i + 1), per_cell)?))
            .collect::<Result<_>>()?;
        let mut cumulative = Vec::with_capacity(grid.n_points);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for p in parts {
            acc += p;
            cumulative.push(acc);
        }
        Ok(Self { grid: *grid, cumulative, density })
    }

    pub fn mass(&self) -> f64 {
        *self.cumulative.last().expect("grid has at least two points")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.x_min {
            return 0.0;
        }
        if x >= g.x_max {
            return self.mass();
        }
        let h = g.dx();
        let i = (((x - g.x_min) / h) as usize).min(g.n_points - 2);
        let s = (x - g.point(i)) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.cumulative[i]
            + h10 * h * self.density[i]
            + h01 * self.cumulative[i + 1]
            + h11 * h * self.density[i + 1]
    }
}
