//! Discretization of the real line for the discrete chaos construction.
//!
//! [`Grid`] is a uniform partition of an interval into cells of equal width.
//! White-noise increments live on its cells and step kernels are constant on
//! products of cells.  [`Partition`] generalizes this to non-uniform cell
//! widths; it is used internally by the samplers, where a geometrically graded
//! far field keeps long-memory tails affordable without losing the exact
//! independent-increment structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of `(left, right]` into `cells` half-open cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    left: f64,
    right: f64,
    cells: usize,
}

impl Grid {
    pub fn new(left: f64, right: f64, cells: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::InvalidParams(format!(
                "grid bounds must be finite with left < right, got ({left}, {right})"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidParams("grid needs at least one cell".into()));
        }
        Ok(Self { left, right, cells })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Width of one cell.
    pub fn h(&self) -> f64 {
        (self.right - self.left) / self.cells as f64
    }

    /// Bounds `(a, b]` of cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        let h = self.h();
        (self.left + i as f64 * h, self.left + (i + 1) as f64 * h)
    }

    pub fn to_partition(&self) -> Partition {
        let h = self.h();
        let breaks = (0..=self.cells)
            .map(|i| self.left + i as f64 * h)
            .collect();
        Partition::from_breaks(breaks).expect("uniform grid breaks are sorted")
    }
}

/// Monotone partition of `(breaks[0], breaks[n]]` into `n` half-open cells of
/// possibly different widths.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    breaks: Vec<f64>,
}

impl Partition {
    pub fn from_breaks(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidParams(
                "partition needs at least two breakpoints".into(),
            ));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1]) || !w[1].is_finite()) {
            return Err(Error::InvalidParams(
                "partition breakpoints must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { breaks })
    }

    /// Uniform cells of width `h` from `left` to `right` (the last cell may be
    /// shortened so the partition ends exactly at `right`).
    pub fn uniform(left: f64, right: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParams("cell width must be positive".into()));
        }
        let mut breaks = vec![left];
        let mut x = left;
        while x + h < right - 1e-12 * h {
            x += h;
            breaks.push(x);
        }
        breaks.push(right);
        Self::from_breaks(breaks)
    }

    /// Partition of `(far_left, near_left] ∪ (near_left, right]` where the
    /// near field is uniform with width `h` and the far field grows
    /// geometrically by `ratio` towards `far_left`.  Cell edges of the near
    /// field land on multiples of `h` measured from `right`, so dyadic
    /// breakpoints stay exactly representable.
    pub fn graded(far_left: f64, near_left: f64, right: f64, h: f64, ratio: f64) -> Result<Self> {
        if !(far_left < near_left && near_left < right) {
            return Err(Error::InvalidParams(
                "graded partition needs far_left < near_left < right".into(),
            ));
        }
        if !(ratio > 1.0) {
            return Err(Error::InvalidParams("grading ratio must exceed 1".into()));
        }
        let near = Self::uniform(near_left, right, h)?;
        let mut tail_breaks = Vec::new();
        let mut x = near_left;
        let mut w = h * ratio;
        while x > far_left {
            x -= w;
            if x <= far_left {
                x = far_left;
            }
            tail_breaks.push(x);
            w *= ratio;
        }
        tail_breaks.reverse();
        tail_breaks.extend_from_slice(&near.breaks);
        Self::from_breaks(tail_breaks)
    }

    pub fn cells(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }

    pub fn width(&self, i: usize) -> f64 {
        self.breaks[i + 1] - self.breaks[i]
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    /// Index range of cells whose closure lies inside `[a, b]`, provided the
    /// interval boundaries coincide with breakpoints; errors otherwise.  Used
    /// where a kernel must be split along region boundaries exactly.
    pub fn aligned_range(&self, a: f64, b: f64) -> Result<std::ops::Range<usize>> {
        let find = |x: f64| -> Option<usize> {
            self.breaks
                .iter()
                .position(|&br| (br - x).abs() <= 1e-12 * x.abs().max(1.0))
        };
        let ia = find(a).ok_or_else(|| {
            Error::GridMismatch(format!("region boundary {a} is not a partition breakpoint"))
        })?;
        let ib = find(b).ok_or_else(|| {
            Error::GridMismatch(format!("region boundary {b} is not a partition breakpoint"))
        })?;
        if ia > ib {
            return Err(Error::GridMismatch(format!("empty region [{a}, {b}]")));
        }
        Ok(ia..ib)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_geometry() {
        let g = Grid::new(-1.0, 1.0, 8).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(g.cell_bounds(0), (-1.0, -0.75));
        assert_eq!(g.cell_bounds(7), (0.75, 1.0));
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(1.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn graded_partition_covers_and_orders() {
        let p = Partition::graded(-50.0, -2.0, 1.0, 0.125, 1.15).unwrap();
        assert_eq!(p.left(), -50.0);
        assert_eq!(p.right(), 1.0);
        for i in 0..p.cells() {
            assert!(p.width(i) > 0.0);
        }
        // Far-field cells grow towards the left.
        assert!(p.width(0) > p.width(p.cells() - 1));
        // Much cheaper than uniform coverage at the same near-field width.
        assert!(p.cells() < 100);
    }

    #[test]
    fn aligned_range_requires_breakpoints() {
        let p = Partition::uniform(0.0, 1.0, 0.25).unwrap();
        assert_eq!(p.aligned_range(0.25, 0.75).unwrap(), 1..3);
        assert!(p.aligned_range(0.3, 0.75).is_err());
    }
}
