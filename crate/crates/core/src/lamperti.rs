//! The map `Λ(x) = ∫ du / f(α + u)`, its inverse and the deterministic flow
//! `φ_t(x) = Λ⁻¹(Λ(x) + t)`, which solves `ż = f(α + z)`.
//!
//! `Λ` is pinned to zero at a configurable reference point. Only differences
//! of `Λ` enter the flow, so the flow itself is computed from the relative
//! integral `∫_x^y du / f(α + u) = t` and never sees the reference point.
//!
//! Under the boundedness assumption `ε ≤ f ≤ f_max` the root is bracketed by
//! `|y - x| ∈ [ε|t|, f_max|t|]` and found by safeguarded Newton with
//! `dΛ/dx = 1 / f`. Drifts admitted by override (no bounds) get an expanding
//! bracket instead; points past a zero of `f` count as overshoot.

use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::drift::{AssumptionReport, DriftError, DriftExpr};
use crate::quadrature::{self, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LampertiError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error("drift f = {f} at x = {x} is below the admissible lower bound {epsilon}")]
    BelowEpsilon { x: f64, f: f64, epsilon: f64 },
    #[error("drift vanishes or changes sign at x = {x} (f = {f})")]
    SignChange { x: f64, f: f64 },
    #[error("quadrature of 1/f did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },
    #[error("could not bracket the flow from x = {x} over t = {t}")]
    Bracket { x: f64, t: f64 },
    #[error("inverse did not converge from x = {x} over t = {t} (residual {residual:e})")]
    NoConvergence { x: f64, t: f64, residual: f64 },
    #[error("drift failed the assumption scan: min f = {f_min} is not above epsilon = {epsilon}")]
    AssumptionFailed { f_min: f64, epsilon: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl From<QuadError<LampertiError>> for LampertiError {
    fn from(e: QuadError<LampertiError>) -> Self {
        match e {
            QuadError::NonConvergence { a, b, estimate } => LampertiError::Quadrature { a, b, estimate },
            QuadError::Integrand(e) => e,
        }
    }
}

/// How the drift was admitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    /// Passed the scan: `lower < f ≤ upper` is enforced during integration.
    Bounded { lower: f64, upper: f64 },
    /// Assumption check overridden. `f` only has to keep its sign.
    Override,
}

impl Admission {
    pub fn from_report(r: &AssumptionReport) -> Result<Self, LampertiError> {
        if r.passed {
            Ok(Admission::Bounded { lower: r.epsilon, upper: r.f_max })
        } else {
            Err(LampertiError::AssumptionFailed { f_min: r.f_min, epsilon: r.epsilon })
        }
    }
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Spacing of the cached nodes for `Λ` relative to the reference point.
const NODE_SPACING: f64 = 0.5;
const MAX_ITER: usize = 200;

#[derive(Debug, Default)]
struct NodeCache {
    /// `up[k] = Λ(ref + k·H)`, `down[k] = Λ(ref - k·H)`; both start with 0.
    up: Vec<f64>,
    down: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LampertiMap {
    drift: DriftExpr,
    alpha: f64,
    quad_tol: f64,
    root_tol: f64,
    reference_point: f64,
    admission: Admission,
    cache: Arc<Mutex<NodeCache>>,
}

impl LampertiMap {
    pub fn new(drift: DriftExpr, admission: Admission) -> Self {
        Self {
            drift,
            alpha: 0.0,
            quad_tol: DEFAULT_QUAD_TOL,
            root_tol: DEFAULT_ROOT_TOL,
            reference_point: 0.0,
            admission,
            cache: Arc::default(),
        }
    }

    /// Map for a drift that passed [`validate_assumption`](crate::drift::validate_assumption).
    pub fn validated(drift: DriftExpr, report: &AssumptionReport) -> Result<Self, LampertiError> {
        Ok(Self::new(drift, Admission::from_report(report)?))
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, cache: Arc::default(), ..self.clone() }
    }

    pub fn with_tolerances(&self, quad_tol: f64, root_tol: f64) -> Result<Self, LampertiError> {
        if !(quad_tol > 0.0) || !(root_tol > 0.0) {
            return Err(LampertiError::InvalidParameter(format!(
                "tolerances must be positive (quad_tol = {quad_tol}, root_tol = {root_tol})"
            )));
        }
        Ok(Self { quad_tol, root_tol, cache: Arc::default(), ..self.clone() })
    }

    pub fn with_reference_point(&self, reference_point: f64) -> Self {
        Self { reference_point, cache: Arc::default(), ..self.clone() }
    }

    pub fn drift(&self) -> &DriftExpr {
        &self.drift
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    pub fn reference_point(&self) -> f64 {
        self.reference_point
    }

    pub fn admission(&self) -> Admission {
        self.admission
    }

    /// `f(α + x)`.
    #[inline]
    pub fn f_shifted(&self, x: f64) -> Result<f64, LampertiError> {
        Ok(self.drift.value(self.alpha + x)?)
    }

    /// `1 / f(α + u)` with the admission checks applied; `sign` is the sign `f`
    /// must keep on the integration range.
    fn integrand(&self, u: f64, sign: f64) -> Result<f64, LampertiError> {
        let f = self.f_shifted(u)?;
        match self.admission {
            Admission::Bounded { lower, .. } if !(f > lower) => {
                Err(LampertiError::BelowEpsilon { x: self.alpha + u, f, epsilon: lower })
            }
            Admission::Override if !(f * sign > 0.0) => {
                Err(LampertiError::SignChange { x: self.alpha + u, f })
            }
            _ => Ok(1.0 / f),
        }
    }

    fn integral(&self, a: f64, b: f64, sign: f64) -> Result<f64, LampertiError> {
        Ok(quadrature::integrate(|u| self.integrand(u, sign), a, b, self.quad_tol)?)
    }

    fn sign_at(&self, x: f64) -> Result<f64, LampertiError> {
        let f = self.f_shifted(x)?;
        if f > 0.0 {
            Ok(1.0)
        } else if f < 0.0 {
            Ok(-1.0)
        } else {
            Err(LampertiError::SignChange { x: self.alpha + x, f })
        }
    }

    /// `Λ(x) = ∫_{ref}^{x} du / f(α + u)`.
    ///
    /// Evaluated as a cached prefix sum over nodes spaced `0.5` apart plus one
    /// short integral from the node nearest the reference side of `x`. The
    /// prefix sums are always accumulated in node order, so the cache never
    /// changes a result.
    pub fn lambda_map(&self, x: f64) -> Result<f64, LampertiError> {
        if !x.is_finite() {
            return Err(LampertiError::InvalidParameter(format!("non-finite argument {x}")));
        }
        let r = self.reference_point;
        let sign = self.sign_at(r)?;
        let offset = (x - r) / NODE_SPACING;
        let k = offset.trunc();
        if k.abs() > 1e7 {
            return Err(LampertiError::InvalidParameter(format!("argument {x} too far from reference")));
        }
        let k = k as i64;
        let (node, base) = if k == 0 {
            (r, 0.0)
        } else {
            let base = self.node_value(k, sign)?;
            (r + k as f64 * NODE_SPACING, base)
        };
        Ok(base + self.integral(node, x, sign)?)
    }

    fn node_value(&self, k: i64, sign: f64) -> Result<f64, LampertiError> {
        let r = self.reference_point;
        let mut cache = self.cache.lock().expect("node cache poisoned");
        let (nodes, step) = if k > 0 {
            (&mut cache.up, NODE_SPACING)
        } else {
            (&mut cache.down, -NODE_SPACING)
        };
        if nodes.is_empty() {
            nodes.push(0.0);
        }
        let want = k.unsigned_abs() as usize;
        while nodes.len() <= want {
            let j = nodes.len() - 1;
            let a = r + j as f64 * step;
            let b = r + (j + 1) as f64 * step;
            let next = nodes[j] + self.integral(a, b, sign)?;
            nodes.push(next);
        }
        Ok(nodes[want])
    }

    /// `Λ⁻¹(y)`: the point whose `Λ` value is `y`, i.e. the flow from the
    /// reference point over time `y`.
    pub fn lambda_inverse(&self, y: f64) -> Result<f64, LampertiError> {
        self.flow(self.reference_point, y)
    }

    /// `φ_t(x) = Λ⁻¹(Λ(x) + t)`. Negative `t` runs the flow backward.
    pub fn flow(&self, x: f64, t: f64) -> Result<f64, LampertiError> {
        if !x.is_finite() || !t.is_finite() {
            return Err(LampertiError::InvalidParameter(format!("non-finite flow input x = {x}, t = {t}")));
        }
        if t == 0.0 {
            return Ok(x);
        }
        let fx = self.f_shifted(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if let Some(c) = self.drift.as_constant() {
            return Ok(x + c * t);
        }
        let sign = fx.signum();
        // Direction of motion in x and the target |∫| along it.
        let dir = sign * t.signum();
        let target = t.abs();
        let at = |d: f64| x + dir * d;
        // |∫_x^{x + dir·d} du/f| - target, increasing in d while f keeps its sign.
        let excess = |from_d: f64, from_i: f64, d: f64| -> Result<f64, LampertiError> {
            let i = from_i + dir * sign * self.integral(at(from_d), at(d), sign)?;
            Ok(i)
        };

        // Bracket [lo, hi] in distance; `hi_i` is None past a zero of f.
        let (mut lo, mut lo_i) = (0.0f64, 0.0f64);
        let (mut hi, mut hi_i): (f64, Option<f64>);
        let mut d = match self.admission {
            Admission::Bounded { upper, .. } => upper * target * (1.0 + 1e-9) + f64::MIN_POSITIVE,
            Admission::Override => fx.abs() * target,
        };
        let mut tries = 0;
        loop {
            tries += 1;
            if tries > MAX_ITER {
                return Err(LampertiError::Bracket { x, t });
            }
            match excess(lo, lo_i, d) {
                Ok(i) if i >= target => {
                    hi = d;
                    hi_i = Some(i);
                    break;
                }
                Ok(i) => {
                    lo = d;
                    lo_i = i;
                    d *= 2.0;
                }
                Err(e @ (LampertiError::Drift(_) | LampertiError::InvalidParameter(_))) => return Err(e),
                Err(_) if self.admission == Admission::Override => {
                    hi = d;
                    hi_i = None;
                    break;
                }
                Err(e) => return Err(e),
            }
        }

        // Euler guess, then safeguarded Newton on the distance.
        let mut cur = (fx.abs() * target).clamp(lo, hi);
        if !(cur > lo && cur < hi) {
            cur = 0.5 * (lo + hi);
        }
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITER {
            let from_hi = hi_i.is_some() && (hi - cur) < (cur - lo);
            let value = if from_hi {
                excess(hi, hi_i.unwrap_or_default(), cur)
            } else {
                excess(lo, lo_i, cur)
            };
            let i = match value {
                Ok(i) => i,
                Err(e @ (LampertiError::Drift(_) | LampertiError::InvalidParameter(_))) => return Err(e),
                Err(_) if self.admission == Admission::Override => {
                    hi = cur;
                    hi_i = None;
                    cur = 0.5 * (lo + hi);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let g = i - target;
            residual = g.abs();
            if residual <= self.root_tol {
                return Ok(at(cur));
            }
            if g < 0.0 {
                lo = cur;
                lo_i = i;
            } else {
                hi = cur;
                hi_i = Some(i);
            }
            if hi - lo <= 2.0 * f64::EPSILON * at(cur).abs().max(1.0) {
                return Ok(at(cur));
            }
            let f_cur = self.f_shifted(at(cur))?.abs();
            let newton = cur - g * f_cur;
            cur = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Err(LampertiError::NoConvergence { x, t, residual })
    }

    /// `∂φ_t(x)/∂x = f(α + φ_t(x)) / f(α + x)`; at a fixed point of the flow
    /// this is the linearised rate `exp(f'(α + x)·t)`.
    pub fn flow_jacobian(&self, x: f64, t: f64) -> Result<f64, LampertiError> {
        Ok(self.flow_with_jacobian(x, t)?.1)
    }

    /// `(φ_t(x), ∂φ_t(x)/∂x)` with a single root solve.
    pub fn flow_with_jacobian(&self, x: f64, t: f64) -> Result<(f64, f64), LampertiError> {
        let fx = self.f_shifted(x)?;
        if fx == 0.0 {
            let e = self.drift.eval(self.alpha + x)?;
            return Ok((x, (e.f1 * t).exp()));
        }
        let y = self.flow(x, t)?;
        Ok((y, self.f_shifted(y)? / fx))
    }

    /// The flow in unshifted coordinates: solves `ẋ = f(x)`. Independent of α
    /// up to rounding.
    pub fn physical_flow(&self, x: f64, t: f64) -> Result<f64, LampertiError> {
        Ok(self.alpha + self.flow(x - self.alpha, t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{validate_assumption, Interval};
    use std::f64::consts::{E, PI};

    fn cos_map() -> LampertiMap {
        let d = DriftExpr::parse("2 + cos(x)").unwrap();
        let r = validate_assumption(&d, Interval::new(-50.0, 50.0), 0.5, 10_001).unwrap();
        LampertiMap::validated(d, &r).unwrap()
    }

    /// Closed antiderivative of 1/(2 + cos u) continued across branches.
    fn cos_lambda_oracle(u: f64) -> f64 {
        let s3 = 3f64.sqrt();
        let k = ((u + PI) / (2.0 * PI)).floor();
        (2.0 / s3) * (((u / 2.0).tan() / s3).atan() + PI * k)
    }

    #[test]
    fn constant_drift_is_linear() {
        let m = LampertiMap::new(DriftExpr::constant(2.0), Admission::Bounded { lower: 1.0, upper: 2.0 });
        assert_eq!(m.lambda_map(3.0).unwrap(), 1.5);
        assert_eq!(m.lambda_inverse(1.5).unwrap(), 3.0);
        assert_eq!(m.flow(1.0, 0.25).unwrap(), 1.5);
        assert_eq!(m.lambda_map(0.0).unwrap(), 0.0);
    }

    #[test]
    fn cos_drift_matches_closed_antiderivative() {
        let m = cos_map();
        let v = m.lambda_map(PI).unwrap();
        assert!((v - PI / 3f64.sqrt()).abs() < 1e-10, "{v}");
        for &x in &[-7.3, -1.0, 0.4, 2.9, 6.0, 11.5] {
            let v = m.lambda_map(x).unwrap();
            assert!((v - cos_lambda_oracle(x)).abs() < 1e-9, "x = {x}: {v} vs {}", cos_lambda_oracle(x));
        }
        let x = m.lambda_inverse(PI / 3f64.sqrt()).unwrap();
        assert!((x - PI).abs() < 1e-9, "{x}");
    }

    #[test]
    fn riemann_cross_check() {
        let m = cos_map();
        let n = 200_000;
        let h = 2.0 / n as f64;
        let riemann: f64 = (0..n).map(|i| 1.0 / (2.0 + ((i as f64 + 0.5) * h).cos()) * h).sum();
        assert!((m.lambda_map(2.0).unwrap() - riemann).abs() < 1e-9);
    }

    #[test]
    fn linear_drift_flow_is_exponential() {
        let m = LampertiMap::new(DriftExpr::parse("x").unwrap(), Admission::Override)
            .with_reference_point(1.0)
            .with_tolerances(1e-13, 1e-13)
            .unwrap();
        assert!((m.flow(1.0, 1.0).unwrap() - E).abs() < 1e-11);
        assert!((m.flow(-2.0, 0.5).unwrap() + 2.0 * 0.5f64.exp()).abs() < 1e-11);
        assert!((m.flow(3.0, -2.0).unwrap() - 3.0 * (-2.0f64).exp()).abs() < 1e-11);
        assert_eq!(m.flow(0.0, 1.0).unwrap(), 0.0);
        assert!((m.flow_jacobian(0.0, -0.3).unwrap() - (-0.3f64).exp()).abs() < 1e-15);
        // Λ(x) = ln x from the reference point 1; crossing zero is an error.
        assert!((m.lambda_map(E).unwrap() - 1.0).abs() < 1e-11);
        assert!(m.lambda_map(-1.0).is_err());
    }

    #[test]
    fn flow_at_zero_time_is_identity() {
        let m = cos_map();
        for &x in &[-3.0, 0.0, 1.25] {
            assert_eq!(m.flow(x, 0.0).unwrap(), x);
        }
    }

    #[test]
    fn bounded_admission_rejects_small_drift() {
        let d = DriftExpr::parse("0.1 + x^2").unwrap();
        let m = LampertiMap::new(d, Admission::Bounded { lower: 0.5, upper: 10.0 });
        assert!(matches!(m.lambda_map(1.0), Err(LampertiError::BelowEpsilon { .. })));
    }

    #[test]
    fn failed_report_is_refused() {
        let d = DriftExpr::parse("x").unwrap();
        let r = validate_assumption(&d, Interval::new(-1.0, 1.0), 0.5, 11).unwrap();
        assert!(matches!(LampertiMap::validated(d, &r), Err(LampertiError::AssumptionFailed { .. })));
    }

    #[test]
    fn cache_behaves_as_if_absent() {
        let m = cos_map();
        let far = m.lambda_map(9.7).unwrap();
        let fresh = cos_map();
        let near_first = fresh.lambda_map(3.1).unwrap();
        assert_eq!(fresh.lambda_map(9.7).unwrap(), far);
        assert_eq!(m.lambda_map(3.1).unwrap(), near_first);
    }

    #[test]
    fn physical_flow_ignores_alpha() {
        let m = cos_map();
        let a = m.physical_flow(0.7, -0.3).unwrap();
        let b = m.with_alpha(1.9).physical_flow(0.7, -0.3).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}
