//! Discrete Wiener chaos on a grid.
//!
//! White noise is the vector of independent Gaussian increments of a Brownian
//! motion over the grid cells.  A multiple integral of order `q` is realized
//! as the off-diagonal sum
//!
//! ```text
//! I_q(f) = Σ_{i₁ ≠ i₂ ≠ … ≠ i_q} f(i₁, …, i_q) ξ_{i₁} ⋯ ξ_{i_q}
//! ```
//!
//! over tuples of pairwise distinct cells.  Diagonal-free summation makes the
//! isometry `E I_q(f) I_q(g) = q! ⟨f̃, g̃⟩` hold exactly at any resolution,
//! which is what turns these objects into machine-precision test oracles; a
//! Hermite-polynomial rewriting would only satisfy it in the fine-grid limit.

mod factor;
mod hermite;
mod integral;
mod kernel;
mod noise;
mod product;
mod wick;

pub use factor::{quartic_cumulant, FactorKernel, FactorTerm, PartitionNoise, SecondChaosSpectrum};
pub use hermite::hermite_poly;
pub use integral::multiple_integral;
pub use kernel::StepKernel;
pub use noise::NoiseRealization;
pub use product::{product_formula_check, ProductFormulaReport};
pub use wick::wick_expectation;

/// Highest chaos order the dense machinery accepts.  Enumeration costs grow
/// like `cells^q`, and nothing in the estimation pipeline needs more.
pub const MAX_ORDER: usize = 4;

/// Budget for exact Wick enumeration, in kernel evaluations.
pub const WICK_BUDGET: u128 = 1_000_000;
