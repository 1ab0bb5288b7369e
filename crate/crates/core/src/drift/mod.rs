//! Drift functions `f(x)`: parsing, jet evaluation and the boundedness scan.
//!
//! Drifts are written in a small expression language over `x` (see
//! [`parse`](self::parse) for the grammar) or picked from a few named
//! built-ins. Evaluation returns `(f, f', f'')` through [`Jet2`] so every
//! downstream formula that needs `f'` gets it exactly.

mod jet;
mod parse;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use jet::Jet2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("unsupported function `{name}` at position {pos}")]
    UnsupportedFunction { name: String, pos: usize },
    #[error("domain error at x = {x}: {msg}")]
    Domain { x: f64, msg: String },
    #[error("unknown builtin drift `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid scan parameters: {0}")]
    InvalidScan(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

/// Expression tree. `Pow` exponents are folded to a constant at parse time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    X,
    Num(f64),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    /// Value of the subtree if it does not reference `x`.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::X => None,
            Expr::Num(v) => Some(*v),
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.constant_value()?, b.constant_value()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                })
            }
            Expr::Func(f, a) => {
                let a = a.constant_value()?;
                Some(match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                })
            }
            Expr::Pow(a, p) => a.constant_value().map(|v| v.powf(*p)),
        }
    }

    fn value(&self, x: f64) -> Result<f64, &'static str> {
        Ok(match self {
            Expr::X => x,
            Expr::Num(v) => *v,
            Expr::Neg(a) => -a.value(x)?,
            Expr::Bin(op, a, b) => {
                let a = a.value(x)?;
                let b = b.value(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err("division by zero"),
                    BinOp::Div => a / b,
                }
            }
            Expr::Func(f, a) => {
                let a = a.value(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                }
            }
            Expr::Pow(a, p) => {
                let a = a.value(x)?;
                check_pow(a, *p)?;
                if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
                    a.powi(*p as i32)
                } else {
                    a.powf(*p)
                }
            }
        })
    }

    fn jet(&self, x: Jet2) -> Result<Jet2, &'static str> {
        Ok(match self {
            Expr::X => x,
            Expr::Num(v) => Jet2::constant(*v),
            Expr::Neg(a) => -a.jet(x)?,
            Expr::Bin(op, a, b) => {
                let a = a.jet(x)?;
                let b = b.jet(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b.v == 0.0 => return Err("division by zero"),
                    BinOp::Div => a / b,
                }
            }
            Expr::Func(f, a) => {
                let a = a.jet(x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                }
            }
            Expr::Pow(a, p) => {
                let a = a.jet(x)?;
                check_pow(a.v, *p)?;
                a.powf(*p)
            }
        })
    }
}

fn check_pow(base: f64, p: f64) -> Result<(), &'static str> {
    if base < 0.0 && p.fract() != 0.0 {
        Err("negative base with fractional exponent")
    } else if base == 0.0 && p < 0.0 {
        Err("division by zero in negative power")
    } else {
        Ok(())
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_sign_negative() {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Canonical, fully parenthesized form. Re-parsing it reproduces the tree's
/// values exactly.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::X => f.write_str("x"),
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let op = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {op} {b})")
            }
            Expr::Func(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Tanh => "tanh",
                };
                write!(f, "{name}({a})")
            }
            Expr::Pow(a, p) => {
                write!(f, "({a} ^ ")?;
                fmt_num(*p, f)?;
                f.write_str(")")
            }
        }
    }
}

/// `(f, f', f'')` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftEval {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

/// A parsed drift. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct DriftExpr {
    inner: Arc<DriftInner>,
}

#[derive(Debug)]
struct DriftInner {
    ast: Expr,
    source: String,
}

impl DriftExpr {
    pub fn parse(source: &str) -> Result<Self, DriftError> {
        let ast = parse::Parser::parse(source)?;
        Ok(Self::from_ast(ast, source.to_owned()))
    }

    pub fn from_ast(ast: Expr, source: String) -> Self {
        Self { inner: Arc::new(DriftInner { ast, source }) }
    }

    /// Named drifts: `constant` (needs `c`), `two_plus_cos` and `linear`.
    pub fn builtin(name: &str, c: Option<f64>) -> Result<Self, DriftError> {
        match name {
            "constant" => {
                let c = c.unwrap_or(1.0);
                Ok(Self::from_ast(Expr::Num(c), format!("{c:?}")))
            }
            "two_plus_cos" => Self::parse("2 + cos(x)"),
            "linear" => Self::parse("x"),
            other => Err(DriftError::UnknownBuiltin(other.to_owned())),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_ast(Expr::Num(c), format!("{c:?}"))
    }

    pub fn ast(&self) -> &Expr {
        &self.inner.ast
    }

    pub fn source(&self) -> &str {
        &self.inner.source
    }

    /// Canonical printed form; see [`Expr`]'s `Display`.
    pub fn canonical(&self) -> String {
        self.inner.ast.to_string()
    }

    /// `Some(c)` when the drift does not depend on `x`.
    pub fn as_constant(&self) -> Option<f64> {
        self.inner.ast.constant_value()
    }

    /// `f(x)` only. This is the hot path for path simulation.
    #[inline]
    pub fn value(&self, x: f64) -> Result<f64, DriftError> {
        match self.inner.ast.value(x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(DriftError::Domain { x, msg: "non-finite value".into() }),
            Err(msg) => Err(DriftError::Domain { x, msg: msg.into() }),
        }
    }

    pub fn eval(&self, x: f64) -> Result<DriftEval, DriftError> {
        if !x.is_finite() {
            return Err(DriftError::Domain { x, msg: "non-finite argument".into() });
        }
        match self.inner.ast.jet(Jet2::variable(x)) {
            Ok(j) if j.is_finite() => Ok(DriftEval { f: j.v, f1: j.d1, f2: j.d2 }),
            Ok(_) => Err(DriftError::Domain { x, msg: "non-finite value or derivative".into() }),
            Err(msg) => Err(DriftError::Domain { x, msg: msg.into() }),
        }
    }
}

impl fmt::Display for DriftExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.source())
    }
}

/// How a drift is supplied in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriftSpec {
    Expr { expr: String },
    Builtin {
        builtin: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
}

impl DriftSpec {
    pub fn build(&self) -> Result<DriftExpr, DriftError> {
        match self {
            DriftSpec::Expr { expr } => DriftExpr::parse(expr),
            DriftSpec::Builtin { builtin, c } => DriftExpr::builtin(builtin, *c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Outcome of scanning a drift for the boundedness and positivity conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub f_min: f64,
    pub f_max: f64,
    pub f1_max_abs: f64,
    pub f2_max_abs: f64,
    /// Required strict lower bound on `f`.
    pub epsilon: f64,
    pub scan_range: Interval,
    pub n_samples: usize,
    pub passed: bool,
}

/// Scan `n` equispaced points of `range` (endpoints included) and report the
/// extrema of `f`, `|f'|`, `|f''|`. Passes iff `min f > epsilon`.
pub fn validate_assumption(
    drift: &DriftExpr,
    range: Interval,
    epsilon: f64,
    n: usize,
) -> Result<AssumptionReport, DriftError> {
    if n < 2 {
        return Err(DriftError::InvalidScan(format!("need at least 2 samples, got {n}")));
    }
    if !(range.lo < range.hi) || !range.lo.is_finite() || !range.hi.is_finite() {
        return Err(DriftError::InvalidScan(format!(
            "degenerate scan range [{}, {}]",
            range.lo, range.hi
        )));
    }
    if !(epsilon > 0.0) {
        return Err(DriftError::InvalidScan(format!("epsilon must be positive, got {epsilon}")));
    }
    let step = (range.hi - range.lo) / (n - 1) as f64;
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    let mut f1_max_abs = 0.0f64;
    let mut f2_max_abs = 0.0f64;
    for i in 0..n {
        let x = if i == n - 1 { range.hi } else { range.lo + i as f64 * step };
        let e = drift.eval(x)?;
        f_min = f_min.min(e.f);
        f_max = f_max.max(e.f);
        f1_max_abs = f1_max_abs.max(e.f1.abs());
        f2_max_abs = f2_max_abs.max(e.f2.abs());
    }
    Ok(AssumptionReport {
        f_min,
        f_max,
        f1_max_abs,
        f2_max_abs,
        epsilon,
        scan_range: range,
        n_samples: n,
        passed: f_min > epsilon,
    })
}
