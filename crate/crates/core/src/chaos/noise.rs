use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One realization of the white-noise increments over a grid: independent
/// `N(0, h)` variables, one per cell, where `h` is the cell width.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    grid: Grid,
    increments: Vec<f64>,
}

impl NoiseRealization {
    pub fn generate<R: Rng + ?Sized>(grid: &Grid, rng: &mut R) -> Self {
        let sd = grid.h().sqrt();
        let increments = (0..grid.cells())
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { grid: grid.clone(), increments }
    }

    /// Wraps explicit increments, mainly for deterministic tests.
    pub fn from_increments(grid: &Grid, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.cells() {
            return Err(Error::GridMismatch(format!(
                "{} increments supplied for a grid with {} cells",
                increments.len(),
                grid.cells()
            )));
        }
        if increments.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("noise increments must be finite".into()));
        }
        Ok(Self { grid: grid.clone(), increments })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}
