//! Short-time approximations of the Girsanov exponential and of transition
//! densities for one-dimensional Langevin diffusions `dX = f(X) dt + dB`.
//!
//! The crate is organised bottom-up:
//!
//! - [`drift`]: drift expressions with exact first and second derivatives.
//! - [`lamperti`]: `Λ`, `Λ⁻¹` and the deterministic flow of `ẋ = f(x)`.
//! - [`girsanov`]: the simulated exponential, its deterministic approximations
//!   and Monte Carlo error/rate estimation.
//! - [`kernels`]: the four short-time transition densities.
//! - [`evolution`]: Liouville transport, Chapman-Kolmogorov composition and a
//!   Crank-Nicolson Fokker-Planck reference solver.
//! - [`sampler`]: samplers for the diffusion and for the crypto-deterministic
//!   variable, plus Kolmogorov-Smirnov distances.
//! - [`cli`]: JSON-configured experiments writing CSV/JSON artifacts.

pub mod cli;
pub mod drift;
pub mod error;
pub mod evolution;
pub mod girsanov;
pub mod kernels;
pub mod lamperti;
pub mod quadrature;
pub mod rng;
pub mod sampler;

pub use drift::{validate_assumption, AssumptionReport, DriftEval, DriftExpr, DriftSpec, Interval};
pub use error::{Error, Result};
pub use lamperti::{Admission, LampertiMap};
