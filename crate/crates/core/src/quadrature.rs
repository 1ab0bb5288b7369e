//! Adaptive Gauss-Kronrod (7/15) quadrature with an absolute tolerance.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError<E> {
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    NonConvergence { a: f64, b: f64, estimate: f64 },
    #[error(transparent)]
    Integrand(E),
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

/// One 15-point Kronrod panel: returns (kronrod estimate, |kronrod - gauss|).
fn gk15<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<(f64, f64), E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`. `b < a` is allowed
/// and yields the signed integral.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError<E>> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gk15(&mut f, a, b).map_err(QuadError::Integrand)?;
    refine(&mut f, a, b, whole, err, tol, 0)
}

fn refine<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError<E>> {
    // Below ~50 ulps the estimate is roundoff, not truncation.
    let floor = 50.0 * f64::EPSILON * whole.abs();
    if err <= tol.max(floor) {
        return Ok(whole);
    }
    if depth >= MAX_DEPTH {
        return Err(QuadError::NonConvergence { a, b, estimate: err });
    }
    let m = 0.5 * (a + b);
    let (l, el) = gk15(f, a, m).map_err(QuadError::Integrand)?;
    let (r, er) = gk15(f, m, b).map_err(QuadError::Integrand)?;
    Ok(refine(f, a, m, l, el, 0.5 * tol, depth + 1)? + refine(f, m, b, r, er, 0.5 * tol, depth + 1)?)
}

/// Convenience wrapper for infallible integrands.
pub fn integrate_pure(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadError<std::convert::Infallible>> {
    integrate(|x| Ok(f(x)), a, b, tol)
}
