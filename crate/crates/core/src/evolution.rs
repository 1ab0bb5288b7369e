//! Density evolution on a uniform grid.
//!
//! - [`liouville_density`]: method-of-characteristics solution of the transport
//!   equation `∂_t p = −∂_x[f p]` started from `N(x′, T)`; at `t = T` it is the
//!   `girsanov` kernel.
//! - [`compose_chapman`]: finite-`N` path integral, i.e. `N` trapezoid-rule
//!   Chapman-Kolmogorov convolutions of a short-time kernel. Nothing is
//!   renormalized; the mass defect is reported as is.
//! - [`solve_fokker_planck`]: Crank-Nicolson reference solution of
//!   `∂_t p = −∂_x(f p) + ½ ∂²_x p` with zero-flux boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift::DriftError;
use crate::kernels::{self, gaussian, GridSpec, KernelError, KernelKind, TAIL_GUARD};
use crate::lamperti::{LampertiError, LampertiMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    Lamperti(#[from] LampertiError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grids differ: {a:?} vs {b:?}")]
    GridMismatch { a: GridSpec, b: GridSpec },
    #[error("grid [{x_min}, {x_max}] too narrow: boundary density {boundary:e} vs peak {peak:e}")]
    BoundaryGuard { x_min: f64, x_max: f64, boundary: f64, peak: f64 },
    #[error("Fokker-Planck step {step} unstable: mass drift {mass_drift:e}, min value {min:e}")]
    Unstable { step: usize, mass_drift: f64, min: f64 },
}

type Result<T> = std::result::Result<T, EvolutionError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridDensity {
    /// Trapezoid-rule mass.
    pub fn mass(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    pub fn mass_defect(&self) -> f64 {
        self.mass() - 1.0
    }

    fn boundary_guard(&self) -> Result<()> {
        let peak = self.values.iter().copied().fold(0.0, f64::max);
        let boundary = self.values[0].abs().max(self.values[self.values.len() - 1].abs());
        if boundary >= TAIL_GUARD * peak {
            return Err(EvolutionError::BoundaryGuard {
                x_min: self.grid.x_min,
                x_max: self.grid.x_max,
                boundary,
                peak,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub total_time: f64,
    pub n_slices: usize,
    pub grid: GridSpec,
    pub kind: KernelKind,
}

impl CompositionPlan {
    pub fn tau(&self) -> f64 {
        self.total_time / self.n_slices as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.total_time > 0.0) || !self.total_time.is_finite() || self.n_slices == 0 {
            return Err(EvolutionError::InvalidParameter(format!(
                "need total_time > 0 and n_slices ≥ 1, got {} and {}",
                self.total_time, self.n_slices
            )));
        }
        Ok(())
    }
}

/// Transport of `N(x′, T)` along the flow for time `t ∈ [0, T]`.
pub fn liouville_density(m: &LampertiMap, t: f64, horizon: f64, x: f64, x_prime: f64) -> Result<f64> {
    if !(horizon > 0.0) || !(0.0..=horizon).contains(&t) {
        return Err(EvolutionError::InvalidParameter(format!("need 0 ≤ t ≤ T, T > 0; got t = {t}, T = {horizon}")));
    }
    if t == 0.0 {
        return Ok(gaussian(x - x_prime, horizon));
    }
    let alpha = m.alpha();
    let (z, jac) = m.flow_with_jacobian(x - alpha, -t)?;
    Ok(jac * gaussian(alpha + z - x_prime, horizon))
}

/// Row `i` of the τ-kernel matrix: `K(τ, x_i, y_j)` for all grid `y_j`.
fn kernel_row(kind: KernelKind, m: &LampertiMap, tau: f64, x: f64, ys: &[f64]) -> Result<Vec<f64>> {
    match kind {
        KernelKind::Girsanov => {
            // The backward flow depends only on x, so solve it once per row.
            let alpha = m.alpha();
            let (z, jac) = m.flow_with_jacobian(x - alpha, -tau)?;
            let y0 = alpha + z;
            Ok(ys.iter().map(|&y| jac * gaussian(y0 - y, tau)).collect())
        }
        _ => ys
            .iter()
            .map(|&y| Ok(kernels::kernel_eval(kind, m, tau, x, y)?))
            .collect(),
    }
}

/// Density at `total_time` from `N`-fold composition of the τ-kernel
/// (`τ = total_time / N`), started at `x′`:
/// `p_1(x) = K(τ, x, x′)`, `p_{k+1}(x_i) = Σ_j w_j K(τ, x_i, y_j) p_k(y_j)`.
pub fn compose_chapman(m: &LampertiMap, plan: &CompositionPlan, x_prime: f64) -> Result<GridDensity> {
    plan.validate()?;
    let tau = plan.tau();
    let grid = plan.grid;
    let xs = grid.points();
    let mut p = kernels::kernel_on_grid(plan.kind, m, tau, x_prime, &grid)?;
    if plan.n_slices > 1 {
        let w = grid.weights();
        // Weighted kernel matrix, rows in grid order.
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&x| {
                let mut r = kernel_row(plan.kind, m, tau, x, &xs)?;
                r.iter_mut().zip(&w).for_each(|(k, w)| *k *= w);
                Ok(r)
            })
            .collect::<Result<_>>()?;
        for _ in 1..plan.n_slices {
            p = rows
                .par_iter()
                .map(|r| r.iter().zip(&p).map(|(k, v)| k * v).sum())
                .collect();
        }
    }
    let out = GridDensity { grid, values: p, time: plan.total_time };
    out.boundary_guard()?;
    Ok(out)
}

/// Warm-start time for the Fokker-Planck solver.
pub fn warm_start_time(horizon: f64) -> f64 {
    (1e-3f64).min(horizon / 100.0)
}

/// Crank-Nicolson solution of the Fokker-Planck equation at time `T`.
///
/// The δ(x − x′) datum is replaced at `t₀ = min(10⁻³, T/100)` by the
/// drift-advected heat kernel `N(x′ + f(x′)t₀, t₀)`, which matches the true
/// density to `O(t₀²)` in its first two moments. The spatial operator is a
/// conservative flux form on trapezoid control volumes, so the trapezoid mass
/// is preserved up to rounding. The advective face values are fourth order,
/// the part beyond the two-point mean taken explicitly (Adams-Bashforth) so the
/// implicit system stays tridiagonal; the step is rejected if it drifts by more than
/// `1e-8` or goes negative beyond `1e-6` of the peak.
pub fn solve_fokker_planck(m: &LampertiMap, horizon: f64, x_prime: f64, grid: &GridSpec, n_time_steps: usize) -> Result<GridDensity> {
    grid.validate()?;
    if !(horizon > 0.0) || n_time_steps == 0 {
        return Err(EvolutionError::InvalidParameter(format!(
            "need T > 0 and at least one step, got T = {horizon}, steps = {n_time_steps}"
        )));
    }
    let drift = m.drift();
    let n = grid.n_points;
    let dx = grid.dx();
    let t0 = warm_start_time(horizon);
    let dt = (horizon - t0) / n_time_steps as f64;
    let diff = 0.5;

    let f0 = drift.value(x_prime)?;
    let mut p: Vec<f64> = grid.points().iter().map(|&x| gaussian(x - x_prime - f0 * t0, t0)).collect();

    // Face coefficients: F_{i+½} = a_i p_i + b_i p_{i+1}.
    let mut a = vec![0.0; n - 1];
    let mut b = vec![0.0; n - 1];
    let mut face_f = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let f = drift.value(0.5 * (grid.point(i) + grid.point(i + 1)))?;
        face_f[i] = f;
        a[i] = 0.5 * f + diff / dx;
        b[i] = 0.5 * f - diff / dx;
    }
    let w = grid.weights();
    // Tridiagonal A: lower[i] = A[i][i-1], diag[i], upper[i] = A[i][i+1].
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        if i > 0 {
            lower[i] = a[i - 1] / w[i];
            diag[i] += b[i - 1] / w[i];
        }
        if i + 1 < n {
            upper[i] = -b[i] / w[i];
            diag[i] -= a[i] / w[i];
        }
    }

    let h = 0.5 * dt;
    // (I − hA) p⁺ = (I + hA) p
    let sub: Vec<f64> = lower.iter().map(|l| -h * l).collect();
    let main: Vec<f64> = diag.iter().map(|d| 1.0 - h * d).collect();
    let sup: Vec<f64> = upper.iter().map(|u| -h * u).collect();
    let factor = ThomasFactor::new(&sub, &main, &sup);

    let mass0 = grid.trapezoid(&p);
    let mut rhs = vec![0.0; n];
    let mut corr = vec![0.0; n];
    let mut corr_prev = vec![0.0; n];
    for step in 1..=n_time_steps {
        advective_correction(&p, &face_f, &w, &mut corr);
        if step == 1 {
            corr_prev.copy_from_slice(&corr);
        }
        for i in 0..n {
            let mut v = p[i] + h * diag[i] * p[i];
            if i > 0 {
                v += h * lower[i] * p[i - 1];
            }
            if i + 1 < n {
                v += h * upper[i] * p[i + 1];
            }
            rhs[i] = v + dt * (1.5 * corr[i] - 0.5 * corr_prev[i]);
        }
        std::mem::swap(&mut corr, &mut corr_prev);
        factor.solve(&rhs, &mut p);
        let mass = grid.trapezoid(&p);
        let peak = p.iter().copied().fold(0.0, f64::max);
        let min = p.iter().copied().fold(f64::INFINITY, f64::min);
        let mass_drift = (mass - mass0).abs();
        if !mass.is_finite() || mass_drift > 1e-8 || min < -1e-6 * peak {
            return Err(EvolutionError::Unstable { step, mass_drift, min });
        }
    }
    Ok(GridDensity { grid: *grid, values: p, time: horizon })
}

/// Explicit part of the advective flux: the gap between the fourth-order face
/// value `(−p₋₁ + 7p₀ + 7p₁ − p₂)/12` and the implicit two-point mean, in
/// flux-divergence form so mass is untouched. Faces next to the boundary keep
/// the two-point mean.
fn advective_correction(p: &[f64], face_f: &[f64], w: &[f64], out: &mut [f64]) {
    let n = p.len();
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 1..n.saturating_sub(2) {
        let flux = face_f[i] * (-p[i - 1] + p[i] + p[i + 1] - p[i + 2]) / 12.0;
        out[i] -= flux / w[i];
        out[i + 1] += flux / w[i + 1];
    }
}

/// LU factorisation of a tridiagonal matrix (no pivoting; the CN matrix is
/// diagonally dominant for the step sizes used here).
struct ThomasFactor {
    sub: Vec<f64>,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl ThomasFactor {
    fn new(sub: &[f64], main: &[f64], sup: &[f64]) -> Self {
        let n = main.len();
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = main[0];
        c_prime[0] = sup[0] / denom[0];
        for i in 1..n {
            denom[i] = main[i] - sub[i] * c_prime[i - 1];
            c_prime[i] = if i + 1 < n { sup[i] / denom[i] } else { 0.0 };
        }
        Self { sub: sub.to_vec(), c_prime, denom }
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        let n = rhs.len();
        out[0] = rhs[0] / self.denom[0];
        for i in 1..n {
            out[i] = (rhs[i] - self.sub[i] * out[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            out[i] -= self.c_prime[i] * out[i + 1];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    L1,
    Sup,
}

pub fn density_distance(a: &GridDensity, b: &GridDensity, metric: Metric) -> Result<f64> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(EvolutionError::GridMismatch { a: a.grid, b: b.grid });
    }
    let diff: Vec<f64> = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).collect();
    Ok(match metric {
        Metric::L1 => a.grid.trapezoid(&diff),
        Metric::Sup => diff.iter().copied().fold(0.0, f64::max),
    })
}

/// Sample a closed-form density onto a grid.
pub fn tabulate(grid: &GridSpec, time: f64, f: impl Fn(f64) -> f64) -> GridDensity {
    GridDensity { grid: *grid, values: grid.points().into_iter().map(f).collect(), time }
}
