//! Simulation, statistics and command-line front end for markets driven by
//! Hermite processes.
//!
//! The pure model code lives in [`hermite_core`]; this crate adds FFT path
//! generation, seeded parallel Monte Carlo, hypothesis tests, file formats
//! and the `hermite` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod demos;
mod error;
pub mod fgn;
pub mod io;
pub mod process;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use fgn::{gen_fgn, FgnGenerator};
pub use process::{gen_brownian, gen_fbm, gen_hermite, gen_hou, gen_mixed, HermiteSampler, HouSpec};
