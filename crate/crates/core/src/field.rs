//! Scalar and vector fields on the torus, with forward/inverse transforms.
//!
//! Normalization: a pure mode `cos(k·x)` carries coefficient 1/2 at `±k`,
//! and the constant field 1 has `coeff(0) = 1`. Physical values are
//! recovered as `f(x) = Σ_k c_k e^{i k·x}` with no further scaling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;

fn fft_plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut map = cache.lock().unwrap();
    map.entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place 2D FFT of row-major n×n data, rows then columns.
fn fft2_inplace(data: &mut [Complex64], n: usize, direction: FftDirection) {
    let plan = fft_plan(n, direction);
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    transpose_square(data, n);
    for row in data.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    transpose_square(data, n);
}

/// Complex Fourier coefficients of a real scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> SpectralField {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient count {} does not match grid {}²",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Build a field from a list of `(m1, m2, coefficient)` entries,
    /// mirroring each entry so the result is Hermitian (real in space).
    pub fn from_modes(grid: &Grid, modes: &[(i64, i64, Complex64)]) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        for &(m1, m2, c) in modes {
            let idx = grid.index_of_mode(m1, m2);
            f.coeffs[idx] += c;
            if m1 != 0 || m2 != 0 {
                let half = grid.n() as i64 / 2;
                // The mirror of a Nyquist mode wraps onto itself.
                let mm1 = if m1 == -half { m1 } else { -m1 };
                let mm2 = if m2 == -half { m2 } else { -m2 };
                if (mm1, mm2) != (m1, m2) {
                    f.coeffs[grid.index_of_mode(mm1, mm2)] += c.conj();
                }
            }
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, m1: i64, m2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of_mode(m1, m2)]
    }

    pub fn set_coeff(&mut self, m1: i64, m2: i64, c: Complex64) {
        let idx = self.grid.index_of_mode(m1, m2);
        self.coeffs[idx] = c;
    }

    pub fn mean_coeff(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn set_mean_zero(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    /// Checks |coeff(0)| ≤ 1e-13·‖f‖ and errors otherwise.
    pub fn require_mean_zero(&self) -> Result<()> {
        let norm = self.coeff_norm();
        let tolerance = 1e-13 * norm;
        let magnitude = self.coeffs[0].norm();
        if magnitude > tolerance {
            Err(Error::NonzeroMean {
                magnitude,
                tolerance,
            })
        } else {
            Ok(())
        }
    }

    /// Euclidean norm of the raw coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// L² norm via Plancherel: L·(Σ|c_k|²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        self.grid.box_length() * self.coeff_norm()
    }

    /// Homogeneous Sobolev seminorm ‖Λ^s f‖_{L²} (the k = 0 mode drops).
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut sum = 0.0;
        for i1 in 0..n {
            let kx = g.wavenumber(i1);
            for i2 in 0..n {
                let ky = g.wavenumber(i2);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    continue;
                }
                sum += k2.powf(s) * self.coeffs[i1 * n + i2].norm_sqr();
            }
        }
        g.box_length() * sum.sqrt()
    }

    /// Applies a diagonal multiplier `m(kx, ky)` with the even-symbol
    /// wavenumber convention (Nyquist rows keep their k value).
    pub fn map_multiplier(&self, mult: impl Fn(f64, f64) -> Complex64) -> SpectralField {
        let g = &self.grid;
        let n = g.n();
        let mut out = self.clone();
        for i1 in 0..n {
            let kx = g.wavenumber(i1);
            for i2 in 0..n {
                let ky = g.wavenumber(i2);
                out.coeffs[i1 * n + i2] *= mult(kx, ky);
            }
        }
        out
    }

    /// Maximum deviation from Hermitian symmetry, relative to the
    /// coefficient norm.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let mut worst: f64 = 0.0;
        for i1 in 0..n {
            let j1 = (n - i1) % n;
            for i2 in 0..n {
                let j2 = (n - i2) % n;
                let a = self.coeffs[i1 * n + i2];
                let b = self.coeffs[j1 * n + j2].conj();
                worst = worst.max((a - b).norm());
            }
        }
        let scale = self.coeff_norm();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    /// Projects onto the Hermitian-symmetric part so the physical field
    /// is exactly real.
    pub fn enforce_hermitian(&mut self) {
        let n = self.grid.n();
        for i1 in 0..n {
            let j1 = (n - i1) % n;
            for i2 in 0..n {
                let j2 = (n - i2) % n;
                if i1 * n + i2 > j1 * n + j2 {
                    continue;
                }
                let a = self.coeffs[i1 * n + i2];
                let b = self.coeffs[j1 * n + j2];
                let sym = 0.5 * (a + b.conj());
                self.coeffs[i1 * n + i2] = sym;
                self.coeffs[j1 * n + j2] = sym.conj();
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, c: f64) -> SpectralField {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out
    }

    pub fn add_scaled(&mut self, other: &SpectralField, c: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn to_physical(&self) -> PhysicalField {
        inverse_transform(self)
    }

    /// Zero-pads the spectrum onto a grid with `factor`× the resolution.
    pub fn pad_to(&self, factor: usize) -> SpectralField {
        let n = self.grid.n();
        let big = Grid::new(n * factor, self.grid.box_length()).expect("padded grid");
        let mut out = SpectralField::zeros(&big);
        for i1 in 0..n {
            let m1 = self.grid.mode(i1);
            for i2 in 0..n {
                let m2 = self.grid.mode(i2);
                let idx = big.index_of_mode(m1, m2);
                out.coeffs[idx] = self.coeffs[i1 * n + i2];
            }
        }
        out
    }

    /// Restricts the spectrum to a coarser grid, dropping modes that do
    /// not fit.
    pub fn truncate_to(&self, grid: &Grid) -> SpectralField {
        let mut out = SpectralField::zeros(grid);
        let half = grid.n() as i64 / 2;
        let n = self.grid.n();
        for i1 in 0..n {
            let m1 = self.grid.mode(i1);
            if m1 < -half || m1 >= half {
                continue;
            }
            for i2 in 0..n {
                let m2 = self.grid.mode(i2);
                if m2 < -half || m2 >= half {
                    continue;
                }
                let idx = grid.index_of_mode(m1, m2);
                out.coeffs[idx] = self.coeffs[i1 * n + i2];
            }
        }
        out
    }
}

/// Real point samples of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

impl PhysicalField {
    pub fn zeros(grid: &Grid) -> PhysicalField {
        PhysicalField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<PhysicalField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid {}²",
                values.len(),
                grid.n()
            )));
        }
        Ok(PhysicalField {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f(x, y)` at the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> PhysicalField {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for j1 in 0..n {
            let x = grid.coordinate(j1);
            for j2 in 0..n {
                let y = grid.coordinate(j2);
                values.push(f(x, y));
            }
        }
        PhysicalField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// L^p norm by uniform-grid quadrature with cell weight (L/n)².
    /// `p = ∞` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "p = {p} out of range");
        if p.is_infinite() {
            return self.linf_norm();
        }
        let w = self.grid.cell_area();
        let sum: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (w * sum).powf(1.0 / p)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.cell_area();
        (w * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &PhysicalField) -> PhysicalField {
        debug_assert_eq!(self.grid, other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        PhysicalField {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn to_spectral(&self) -> SpectralField {
        forward_transform(self)
    }
}

/// Forward transform; `coeff(k) = (1/n²) Σ_j f(x_j) e^{−i k·x_j}`.
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let n = f.grid.n();
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_inplace(&mut data, n, FftDirection::Forward);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut data {
        *c *= scale;
    }
    SpectralField {
        grid: f.grid.clone(),
        coeffs: data,
    }
}

/// Inverse transform; imaginary residue of the synthesis is dropped
/// (callers verify it stays at round-off level via the Hermitian checks).
pub fn inverse_transform(f: &SpectralField) -> PhysicalField {
    let n = f.grid.n();
    let mut data = f.coeffs.clone();
    fft2_inplace(&mut data, n, FftDirection::Inverse);
    PhysicalField {
        grid: f.grid.clone(),
        values: data.iter().map(|c| c.re).collect(),
    }
}

/// Largest imaginary residue of the synthesized physical field; a
/// round-off-level value certifies the spectrum was Hermitian.
pub fn max_imag_residue(f: &SpectralField) -> f64 {
    let n = f.grid.n();
    let mut data = f.coeffs.clone();
    fft2_inplace(&mut data, n, FftDirection::Inverse);
    data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()))
}

/// Two-component vector field with shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    x: SpectralField,
    y: SpectralField,
}

impl VectorField {
    pub fn new(x: SpectralField, y: SpectralField) -> Result<VectorField> {
        x.grid().same_as(y.grid())?;
        Ok(VectorField { x, y })
    }

    pub fn zeros(grid: &Grid) -> VectorField {
        VectorField {
            x: SpectralField::zeros(grid),
            y: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    pub fn x(&self) -> &SpectralField {
        &self.x
    }

    pub fn y(&self) -> &SpectralField {
        &self.y
    }

    pub fn x_mut(&mut self) -> &mut SpectralField {
        &mut self.x
    }

    pub fn y_mut(&mut self) -> &mut SpectralField {
        &mut self.y
    }

    pub fn into_components(self) -> (SpectralField, SpectralField) {
        (self.x, self.y)
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField {
            x: self.x.scaled(c),
            y: self.y.scaled(c),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.sub(&other.x),
            y: self.y.sub(&other.y),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Largest |k·v̂(k)| over nonzero modes, the spectral divergence
    /// residual.
    pub fn max_divergence(&self) -> f64 {
        let g = self.grid();
        let n = g.n();
        let mut worst: f64 = 0.0;
        for i1 in 0..n {
            let kx = g.wavenumber(i1);
            for i2 in 0..n {
                let ky = g.wavenumber(i2);
                let d = kx * self.x.coeffs[i1 * n + i2] + ky * self.y.coeffs[i1 * n + i2];
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn coeff_norm(&self) -> f64 {
        (self.x.coeff_norm().powi(2) + self.y.coeff_norm().powi(2)).sqrt()
    }
}
