//! Test-only helpers: seeded random fields and slow reference oracles.
//!
//! The oracles here (direct DFT sums, dense mode-by-mode convolution)
//! deliberately avoid the FFT and multiplier code paths they are used
//! to check.

use num_complex::Complex64;
use rand::Rng;

use crate::field::{PhysicalField, SpectralField};
use crate::grid::Grid;

/// Random real band-limited field with zero mean: Gaussian-ish
/// coefficients on modes with max(|m1|, |m2|) <= band, Hermitian by
/// construction.
pub fn random_mean_zero_field(grid: &Grid, rng: &mut impl Rng, band: i64) -> SpectralField {
    let half = grid.n() as i64 / 2;
    let band = band.min(half - 1);
    let mut modes = Vec::new();
    for m1 in -band..=band {
        for m2 in -band..=band {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            // One representative per conjugate pair; from_modes mirrors it.
            if m1 < 0 || (m1 == 0 && m2 < 0) {
                continue;
            }
            let c = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            modes.push((m1, m2, c));
        }
    }
    SpectralField::from_modes(grid, &modes)
}

/// Direct O(n⁴) forward DFT, the transform oracle.
pub fn naive_forward(f: &PhysicalField) -> SpectralField {
    let g = f.grid();
    let n = g.n();
    let mut coeffs = vec![Complex64::default(); n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let mut acc = Complex64::default();
            for j1 in 0..n {
                for j2 in 0..n {
                    let phase = -std::f64::consts::TAU
                        * (g.mode(i1) as f64 * j1 as f64 + g.mode(i2) as f64 * j2 as f64)
                        / n as f64;
                    acc += f.values()[j1 * n + j2] * Complex64::from_polar(1.0, phase);
                }
            }
            coeffs[i1 * n + i2] = acc / (n * n) as f64;
        }
    }
    SpectralField::from_coeffs(g, coeffs).unwrap()
}

/// Sparse spectral description of a field: mode -> coefficient.
pub type ModeMap = std::collections::BTreeMap<(i64, i64), Complex64>;

pub fn mode_map(f: &SpectralField) -> ModeMap {
    let g = f.grid();
    let n = g.n();
    let mut map = ModeMap::new();
    for i1 in 0..n {
        for i2 in 0..n {
            let c = f.coeffs()[i1 * n + i2];
            if c.norm() > 0.0 {
                map.insert((g.mode(i1), g.mode(i2)), c);
            }
        }
    }
    map
}

/// Exact (non-circular) convolution of two sparse spectra: the true
/// product oracle. Output modes may exceed the source grid range.
pub fn convolve(a: &ModeMap, b: &ModeMap) -> ModeMap {
    let mut out = ModeMap::new();
    for (&(p1, p2), &ca) in a {
        for (&(q1, q2), &cb) in b {
            let key = (p1 + q1, p2 + q2);
            *out.entry(key).or_insert(Complex64::default()) += ca * cb;
        }
    }
    out.retain(|_, c| c.norm() > 0.0);
    out
}

/// Reads the convolution result back onto a grid, dropping out-of-range
/// modes (the caller picks a grid large enough to hold everything that
/// matters).
pub fn mode_map_to_field(grid: &Grid, map: &ModeMap) -> SpectralField {
    let half = grid.n() as i64 / 2;
    let mut f = SpectralField::zeros(grid);
    for (&(m1, m2), &c) in map {
        if m1 >= -half && m1 < half && m2 >= -half && m2 < half {
            f.set_coeff(m1, m2, f.coeff(m1, m2) + c);
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    #[test]
    fn fft_matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = Grid::new(8, TAU).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = PhysicalField::from_values(&g, values).unwrap();
        let fast = f.to_spectral();
        let slow = naive_forward(&f);
        let err = fast
            .coeffs()
            .iter()
            .zip(slow.coeffs())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-13);
    }

    #[test]
    fn convolution_matches_physical_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = Grid::new(16, TAU).unwrap();
        let a = random_mean_zero_field(&g, &mut rng, 3);
        let b = random_mean_zero_field(&g, &mut rng, 3);
        // band 3 products reach mode 6 < 8, no aliasing on the 16-grid
        let truth = convolve(&mode_map(&a), &mode_map(&b));
        let product = a.to_physical().multiply(&b.to_physical()).to_spectral();
        let oracle = mode_map_to_field(&g, &truth);
        let err = product
            .coeffs()
            .iter()
            .zip(oracle.coeffs())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(err < 1e-13);
    }
}
