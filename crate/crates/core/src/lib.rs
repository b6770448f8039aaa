//! Numerics for Hermite fractional markets.
//!
//! This crate is `no_std` (it needs `alloc`) and holds everything that is pure
//! computation over already-sampled data:
//!
//! * [`hermite`]: Hermite-process parameters, Hermite polynomials, covariance
//!   functions and normalizing constants.
//! * [`path`]: uniform-grid sample paths and grid functions.
//! * [`calculus`]: left-point pathwise integrals, the pathwise chain rule and
//!   gain processes of trading strategies.
//! * [`market`]: price construction for pure Hermite, mixed Hermite and
//!   two-asset diffusion markets, and synthesis of the riskless asset.
//! * [`portfolio`] and [`tax`]: Markov portfolio functions, the pricing-PDE
//!   residual checkers and the velocity-of-hedging arbitrage tax.
//! * [`pde`]: the tax-adjusted Black–Scholes solver, the heat kernel and the
//!   heat-equation reduction of the taxed PDE.
//!
//! Random path generation, statistics and IO live in the `hermite-markets`
//! crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calculus;
pub mod confidence;
mod error;
pub mod hermite;
pub mod market;
pub mod path;
pub mod pde;
pub mod portfolio;
pub mod special;
pub mod tax;

pub use error::{Error, Result};
pub use hermite::{HermiteSpec, MixedComponent, MixedHermiteSpec, Normalization};
pub use path::{GridFunction, PathKind, SamplePath};
pub use tax::TaxSchedule;
