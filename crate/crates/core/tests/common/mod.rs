#![allow(dead_code)]

use shorttime::drift::{validate_assumption, DriftExpr, Interval};
use shorttime::{Admission, LampertiMap};

pub fn cos_map() -> LampertiMap {
    let d = DriftExpr::parse("2 + cos(x)").unwrap();
    let r = validate_assumption(&d, Interval::new(-30.0, 30.0), 0.5, 6001).unwrap();
    LampertiMap::validated(d, &r).unwrap()
}

pub fn constant_map(c: f64) -> LampertiMap {
    LampertiMap::new(DriftExpr::constant(c), Admission::Override)
}

pub fn linear_map() -> LampertiMap {
    LampertiMap::new(DriftExpr::parse("x").unwrap(), Admission::Override)
}

/// Standard normal CDF by adaptive quadrature of the density, independent of
/// the erfc used in the library.
pub fn normal_cdf_oracle(z: f64) -> f64 {
    let pdf = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let tail = shorttime::quadrature::integrate_pure(pdf, -40.0, -z.abs(), 1e-15).unwrap();
    if z < 0.0 { tail } else { 1.0 - tail }
}
