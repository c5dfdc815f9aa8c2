//! The electroconvection constitutive chain: potential Φ = Λ⁻¹ρ,
//! parallel electric field E = −∇Φ, force F = ρE = −ρRρ, Darcy velocity
//! u = P(F), and the pressure recovered from u + ∇p = F.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{SpectralField, VectorField};
use crate::operators::{inverse_lambda, leray_project, riesz_transform};

/// How physical-space products are protected against aliasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DealiasMode {
    /// Classic 2/3 rule: modes with max(|m₁|, |m₂|) > n/3 are zeroed
    /// after every binary product.
    #[default]
    TwoThirds,
    /// Products evaluated on a 2×-padded grid and truncated back;
    /// alias-free for band-limited factors.
    StrictPadded,
}

/// Zeroes the unpaired m = −n/2 rows (strict mode does this before any
/// nonlinear evaluation).
pub fn zero_nyquist_rows(f: &mut SpectralField) {
    let g = f.grid().clone();
    let n = g.n();
    let ny = n / 2;
    for i in 0..n {
        f.coeffs_mut()[ny * n + i] = Complex64::default();
        f.coeffs_mut()[i * n + ny] = Complex64::default();
    }
}

/// Zeroes modes with max(|m₁|, |m₂|) > n/3.
pub fn truncate_two_thirds(f: &mut SpectralField) {
    let g = f.grid().clone();
    let n = g.n();
    let cutoff = (n / 3) as i64;
    for i1 in 0..n {
        let m1 = g.mode(i1);
        for i2 in 0..n {
            let m2 = g.mode(i2);
            if m1.abs() > cutoff || m2.abs() > cutoff {
                f.coeffs_mut()[i1 * n + i2] = Complex64::default();
            }
        }
    }
}

/// Dealiased pointwise product of two spectral fields.
pub fn product(a: &SpectralField, b: &SpectralField, mode: DealiasMode) -> SpectralField {
    match mode {
        DealiasMode::TwoThirds => {
            let mut out = a.to_physical().multiply(&b.to_physical()).to_spectral();
            truncate_two_thirds(&mut out);
            out
        }
        DealiasMode::StrictPadded => {
            let pa = a.pad_to(2).to_physical();
            let pb = b.pad_to(2).to_physical();
            pa.multiply(&pb).to_spectral().truncate_to(a.grid())
        }
    }
}

/// Electric potential Φ = Λ⁻¹ρ.
pub fn potential(rho: &SpectralField) -> Result<SpectralField> {
    inverse_lambda(rho)
}

/// Parallel electric field E = −∇Φ = −Rρ.
pub fn electric_field(rho: &SpectralField) -> Result<VectorField> {
    Ok(riesz_transform(rho)?.scaled(-1.0))
}

/// Electrical force F = ρE = −ρRρ, products dealiased per `mode`.
pub fn force(rho: &SpectralField, mode: DealiasMode) -> Result<VectorField> {
    let riesz = riesz_transform(rho)?;
    let fx = product(rho, riesz.x(), mode).scaled(-1.0);
    let fy = product(rho, riesz.y(), mode).scaled(-1.0);
    VectorField::new(fx, fy)
}

/// Darcy velocity u = P(F) = −P(ρRρ), with the mean mode cleaned to
/// zero (it vanishes analytically; only round-off survives).
pub fn velocity(rho: &SpectralField, mode: DealiasMode) -> Result<VectorField> {
    let f = force(rho, mode)?;
    let mut u = leray_project(&f);
    u.x_mut().set_mean_zero();
    u.y_mut().set_mean_zero();
    Ok(u)
}

/// Pressure from the Darcy balance u + ∇p = F: p̂(k) = −i k·F̂(k)/|k|²,
/// normalized to zero mean.
pub fn pressure(rho: &SpectralField, mode: DealiasMode) -> Result<SpectralField> {
    let f = force(rho, mode)?;
    let g = f.grid().clone();
    let n = g.n();
    let mut p = SpectralField::zeros(&g);
    for i1 in 0..n {
        let kx = g.wavenumber(i1);
        for i2 in 0..n {
            let ky = g.wavenumber(i2);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = i1 * n + i2;
            let dot = kx * f.x().coeffs()[idx] + ky * f.y().coeffs()[idx];
            p.coeffs_mut()[idx] = Complex64::new(0.0, -1.0) * dot / k2;
        }
    }
    Ok(p)
}
