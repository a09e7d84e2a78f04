//! Uniform one-dimensional cell grids.
//!
//! Cell `i` is centered at `x_left + (i + 1/2)·dx` and carries one cell
//! average. Two boundary treatments are supported: `Periodic` wraps indices
//! modulo `n_cells`, `ConstantExtension` extends the boundary cell values
//! to infinity (data approaching constants far from the window of interest).

use serde::Serialize;
use thiserror::Error;

/// Boundary treatment for everything that reads past the domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Periodic,
    ConstantExtension,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid.n_cells must be positive")]
    EmptyGrid,
    #[error("grid cell width must be positive and finite, got {0}")]
    InvalidDx(f64),
}

/// Uniform cell grid on `[x_left, x_left + n_cells·dx]`.
#[derive(Debug, Clone)]
pub struct Grid1D {
    n_cells: usize,
    x_left: f64,
    dx: f64,
    boundary: Boundary,
}

impl Grid1D {
    pub fn new(n_cells: usize, x_left: f64, dx: f64, boundary: Boundary) -> Result<Self, GridError> {
        if n_cells == 0 {
            return Err(GridError::EmptyGrid);
        }
        if dx <= 0.0 || !dx.is_finite() || !x_left.is_finite() {
            return Err(GridError::InvalidDx(dx));
        }
        Ok(Self { n_cells, x_left, dx, boundary })
    }

    /// Grid covering `[x_left, x_left + length]` with `n_cells` cells.
    pub fn from_length(
        n_cells: usize,
        x_left: f64,
        length: f64,
        boundary: Boundary,
    ) -> Result<Self, GridError> {
        if n_cells == 0 {
            return Err(GridError::EmptyGrid);
        }
        Self::new(n_cells, x_left, length / n_cells as f64, boundary)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64 * self.dx
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    /// Cell value at a (possibly out-of-domain) index, after boundary folding.
    pub fn value_at(&self, u: &[f64], j: isize) -> f64 {
        let n = self.n_cells as isize;
        match self.boundary {
            Boundary::Periodic => u[j.rem_euclid(n) as usize],
            Boundary::ConstantExtension => u[j.clamp(0, n - 1) as usize],
        }
    }

    /// Linear interpolation of cell-center values at an arbitrary point.
    pub fn sample(&self, u: &[f64], x: f64) -> f64 {
        debug_assert_eq!(u.len(), self.n_cells);
        // t is the position in cell-center coordinates: t = i at center i.
        let t = (x - self.x_left) / self.dx - 0.5;
        let i0 = t.floor();
        let frac = t - i0;
        let j = i0 as isize;
        (1.0 - frac) * self.value_at(u, j) + frac * self.value_at(u, j + 1)
    }

    /// Centered-difference slope; one-sided at `ConstantExtension` edges.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.n_cells);
        let n = self.n_cells;
        if n == 1 {
            return vec![0.0];
        }
        let mut g = vec![0.0; n];
        let two_dx = 2.0 * self.dx;
        for (i, gi) in g.iter_mut().enumerate().take(n - 1).skip(1) {
            *gi = (u[i + 1] - u[i - 1]) / two_dx;
        }
        match self.boundary {
            Boundary::Periodic => {
                g[0] = (u[1] - u[n - 1]) / two_dx;
                g[n - 1] = (u[0] - u[n - 2]) / two_dx;
            }
            Boundary::ConstantExtension => {
                g[0] = (u[1] - u[0]) / self.dx;
                g[n - 1] = (u[n - 1] - u[n - 2]) / self.dx;
            }
        }
        g
    }

    /// Total mass `Σ u_i·dx`.
    pub fn mass(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() * self.dx
    }
}
