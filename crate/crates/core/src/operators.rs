//! Fourier multiplier kernels: Λ^a, Λ⁻¹, Riesz transforms, Leray
//! projection, heat semigroup, and the Gevrey weight e^{τ(|k₁|+|k₂|)}.
//!
//! All operators are diagonal in Fourier space. Odd symbols (gradient,
//! Riesz) use the odd wavenumber convention that zeroes the unpaired
//! Nyquist mode, which keeps every output Hermitian.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};

/// Λ^a: coeff(k) ↦ |k|^a coeff(k), with the mean mode mapped to zero.
pub fn fractional_laplacian(f: &SpectralField, a: f64) -> Result<SpectralField> {
    if !(a >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dissipation order a = {a} must be >= 0"
        )));
    }
    let mut out =
        f.map_multiplier(|kx, ky| Complex64::new((kx * kx + ky * ky).sqrt().powf(a), 0.0));
    out.set_mean_zero();
    Ok(out)
}

/// Λ⁻¹: coeff(k) ↦ |k|⁻¹ coeff(k) for k ≠ 0; requires mean-zero input.
pub fn inverse_lambda(f: &SpectralField) -> Result<SpectralField> {
    f.require_mean_zero()?;
    let mut out = f.map_multiplier(|kx, ky| {
        let k = (kx * kx + ky * ky).sqrt();
        if k == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(1.0 / k, 0.0)
        }
    });
    out.set_mean_zero();
    Ok(out)
}

/// ∂_j as a multiplier i k_j, Nyquist treated as zero.
pub fn partial_derivative(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 2);
    let g = f.grid().clone();
    let n = g.n();
    let mut out = f.clone();
    for i1 in 0..n {
        let kx = g.wavenumber_odd(i1);
        for i2 in 0..n {
            let ky = g.wavenumber_odd(i2);
            let k = if axis == 0 { kx } else { ky };
            out.coeffs_mut()[i1 * n + i2] *= Complex64::new(0.0, k);
        }
    }
    out
}

/// ∇f = (∂₁f, ∂₂f).
pub fn gradient(f: &SpectralField) -> VectorField {
    VectorField::new(partial_derivative(f, 0), partial_derivative(f, 1)).expect("shared grid")
}

/// ∇·v as a multiplier i k·v̂.
pub fn divergence(v: &VectorField) -> SpectralField {
    let mut out = partial_derivative(v.x(), 0);
    out.add_scaled(&partial_derivative(v.y(), 1), 1.0);
    out
}

/// Riesz transform R = ∇Λ⁻¹: component j multiplies by i k_j/|k|.
pub fn riesz_transform(f: &SpectralField) -> Result<VectorField> {
    f.require_mean_zero()?;
    let g = f.grid().clone();
    let n = g.n();
    let mut rx = f.clone();
    let mut ry = f.clone();
    for i1 in 0..n {
        let kx_full = g.wavenumber(i1);
        let kx_odd = g.wavenumber_odd(i1);
        for i2 in 0..n {
            let ky_full = g.wavenumber(i2);
            let ky_odd = g.wavenumber_odd(i2);
            let norm = (kx_full * kx_full + ky_full * ky_full).sqrt();
            let idx = i1 * n + i2;
            if norm == 0.0 {
                rx.coeffs_mut()[idx] = Complex64::default();
                ry.coeffs_mut()[idx] = Complex64::default();
            } else {
                rx.coeffs_mut()[idx] *= Complex64::new(0.0, kx_odd / norm);
                ry.coeffs_mut()[idx] *= Complex64::new(0.0, ky_odd / norm);
            }
        }
    }
    VectorField::new(rx, ry)
}

/// Leray–Hodge projection: v̂(k) ↦ v̂(k) − k (k·v̂(k))/|k|², the k = 0
/// mode passes through unchanged.
pub fn leray_project(v: &VectorField) -> VectorField {
    let g = v.grid().clone();
    let n = g.n();
    let mut x = v.x().clone();
    let mut y = v.y().clone();
    for i1 in 0..n {
        let kx = g.wavenumber(i1);
        for i2 in 0..n {
            let ky = g.wavenumber(i2);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = i1 * n + i2;
            let dot = (kx * x.coeffs()[idx] + ky * y.coeffs()[idx]) / k2;
            x.coeffs_mut()[idx] -= kx * dot;
            y.coeffs_mut()[idx] -= ky * dot;
        }
    }
    VectorField::new(x, y).expect("shared grid")
}

/// Heat semigroup e^{−tΛ^a}: coeff(k) ↦ e^{−t|k|^a} coeff(k).
pub fn heat_semigroup(f: &SpectralField, t: f64, a: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time t = {t} must be >= 0")));
    }
    Ok(f.map_multiplier(|kx, ky| {
        let k = (kx * kx + ky * ky).sqrt();
        Complex64::new((-t * k.powf(a)).exp(), 0.0)
    }))
}

/// Gevrey weight e^{τΛ₁} with symbol e^{τ(|k₁|+|k₂|)}.
///
/// Rejects inputs whose largest exponent magnitude exceeds 700, the
/// double-precision limit for e^x.
pub fn gevrey_weight(f: &SpectralField, tau: f64) -> Result<SpectralField> {
    let g = f.grid();
    let k_nyq = std::f64::consts::TAU / g.box_length() * (g.n() as f64 / 2.0);
    let max_exponent = tau.abs() * 2.0 * k_nyq;
    if max_exponent > 700.0 {
        return Err(Error::Overflow(max_exponent));
    }
    Ok(f.map_multiplier(|kx, ky| Complex64::new((tau * (kx.abs() + ky.abs())).exp(), 0.0)))
}
