//! Uniform N×N torus grids and their wavevector tables.

use crate::error::{Error, Result};

/// Square periodic grid with `n` points per dimension on `[0, L)²`.
///
/// Wavevectors are `k = (2π/L)·m` with integer modes `m ∈ [−n/2, n/2)`,
/// stored in FFT layout: linear index `i` maps to mode `i` for `i < n/2`
/// and `i − n` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64) -> Result<Grid> {
        if n < 8 {
            return Err(Error::InvalidArgument(format!("n = {n} must be >= 8")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidArgument(format!("n = {n} must be even")));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "box length {box_length} must be positive and finite"
            )));
        }
        Ok(Grid { n, box_length })
    }

    /// Grid with the default period 2π.
    pub fn with_default_box(n: usize) -> Result<Grid> {
        Grid::new(n, std::f64::consts::TAU)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing L/n.
    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Quadrature weight (L/n)² of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dx()
    }

    /// Integer mode for FFT index `i`: `i` for `i < n/2`, else `i − n`.
    pub fn mode(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Wavenumber component (2π/L)·mode at FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::TAU / self.box_length * self.mode(i) as f64
    }

    /// Wavenumber for odd-symbol multipliers (gradient, Riesz): the
    /// unpaired Nyquist mode is treated as zero so real fields stay real.
    pub fn wavenumber_odd(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Linear index of the coefficient for mode `(m1, m2)`.
    pub fn index_of_mode(&self, m1: i64, m2: i64) -> usize {
        let half = self.n as i64 / 2;
        assert!(
            m1 >= -half && m1 < half && m2 >= -half && m2 < half,
            "mode ({m1}, {m2}) out of range for n = {}",
            self.n
        );
        let wrap = |m: i64| {
            if m < 0 {
                (m + self.n as i64) as usize
            } else {
                m as usize
            }
        };
        wrap(m1) * self.n + wrap(m2)
    }

    /// Smallest nonzero |k| on the grid: 2π/L.
    pub fn min_nonzero_wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.box_length
    }

    /// Largest |k| on the grid: the corner mode (−n/2, −n/2).
    pub fn max_wavenumber(&self) -> f64 {
        let k_nyq = std::f64::consts::TAU / self.box_length * (self.n as f64 / 2.0);
        k_nyq * std::f64::consts::SQRT_2
    }

    /// Physical coordinate of grid point `j` along one axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.box_length * j as f64 / self.n as f64
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(n = {}, L = {}) vs (n = {}, L = {})",
                self.n, self.box_length, other.n, other.box_length
            )))
        }
    }
}
