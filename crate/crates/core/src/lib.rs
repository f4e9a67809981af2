//! Simulation and inference toolkit for self-similar long-memory processes
//! built from multiple Wiener integrals.
//!
//! The crate is organized around one idea: every distributional claim should
//! be checkable against an exact finite-dimensional counterpart.  The
//! [`chaos`] module provides discrete multiple integrals whose moments are
//! computable in closed form; the samplers in [`process`] reduce to that
//! algebra; [`increments`], [`quadvar`] and [`hou`] build the localized
//! increment decomposition, the modified quadratic variation and the
//! Ornstein-Uhlenbeck estimation pipeline on top; [`mc`] runs the Monte
//! Carlo experiments that compare finite-sample laws with their limits.

pub mod chaos;
pub mod error;
pub mod grid;
pub mod hou;
pub mod increments;
pub mod mc;
pub mod process;
pub mod quadrature;
pub mod quadvar;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{Grid, Partition};
