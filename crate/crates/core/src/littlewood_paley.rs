//! Littlewood-Paley machinery: the smooth dyadic partition of unity,
//! block operators Δ_j and S_j, homogeneous and time-integrated Besov
//! norms, and the Bony paraproduct split.
//!
//! The cutoff Φ_c is built from the standard bump b(x) = e^{−1/x}:
//! with g(x) = b(x)/(b(x) + b(1−x)), Φ_c(r) = 1 − g((r − 1/2)/(1/8)),
//! so Φ_c ≡ 1 on [0, 1/2] and ≡ 0 on [5/8, ∞). The shell profile
//! Ψ(r) = Φ_c(r/2) − Φ_c(r) is supported in [1/2, 5/4] and the scaled
//! copies Ψ_j(r) = Ψ(2^{−j}r) telescope to 1 away from the origin; any
//! other admissible profile would give equivalent norms.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::trajectory::Trajectory;

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on [0, 1/2], 0 on [5/8, ∞), nonincreasing.
pub fn cutoff_profile(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= 0.625 {
        0.0
    } else {
        let x = (r - 0.5) / 0.125;
        let b = bump(x);
        1.0 - b / (b + bump(1.0 - x))
    }
}

/// Shell profile Ψ(r) = Φ_c(r/2) − Φ_c(r), supported in [1/2, 5/4].
pub fn shell_profile(r: f64) -> f64 {
    cutoff_profile(0.5 * r) - cutoff_profile(r)
}

/// Dyadic shell-index range adapted to one grid's spectral content.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicSpec {
    j_min: i32,
    j_max: i32,
}

impl DyadicSpec {
    /// Range covering [smallest nonzero |k|, largest |k|] with one
    /// guard shell on each side: j_min = ⌊log₂ k_min⌋ − 1,
    /// j_max = ⌈log₂ k_max⌉ + 1.
    pub fn for_grid(grid: &Grid) -> DyadicSpec {
        let j_min = grid.min_nonzero_wavenumber().log2().floor() as i32 - 1;
        let j_max = grid.max_wavenumber().log2().ceil() as i32 + 1;
        DyadicSpec { j_min, j_max }
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn shells(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn check_block_index(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            Err(Error::ShellOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            })
        } else {
            Ok(())
        }
    }

    /// S_j is meaningful one shell beyond the block range (it is the
    /// full low-pass there).
    pub fn check_lowpass_index(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max + 1 {
            Err(Error::ShellOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max + 1,
            })
        } else {
            Ok(())
        }
    }
}

/// Dyadic block Δ_j f: multiplier Ψ(2^{−j}|k|). Coefficients outside
/// the annulus 2^j[1/2, 5/4] are exactly zero.
pub fn dyadic_block(f: &SpectralField, j: i32, spec: &DyadicSpec) -> Result<SpectralField> {
    spec.check_block_index(j)?;
    let scale = (-j as f64).exp2();
    Ok(f.map_multiplier(|kx, ky| {
        let r = (kx * kx + ky * ky).sqrt();
        num_complex::Complex64::new(shell_profile(scale * r), 0.0)
    }))
}

/// All dyadic blocks of one field, computed in a single pass. Norm
/// evaluations that touch every shell (Besov sums, E_p) go through this
/// so each block is synthesized once.
pub struct BlockSet {
    spec: DyadicSpec,
    blocks: Vec<SpectralField>,
}

impl BlockSet {
    pub fn decompose(f: &SpectralField, spec: &DyadicSpec) -> BlockSet {
        let blocks = spec
            .shells()
            .map(|j| dyadic_block(f, j, spec).expect("j in range"))
            .collect();
        BlockSet {
            spec: *spec,
            blocks,
        }
    }

    pub fn spec(&self) -> &DyadicSpec {
        &self.spec
    }

    pub fn block(&self, j: i32) -> Result<&SpectralField> {
        self.spec.check_block_index(j)?;
        Ok(&self.blocks[(j - self.spec.j_min) as usize])
    }

    /// ‖Δ_j f‖_{L^p} per shell, in shell order.
    pub fn shell_lp_norms(&self, p: f64) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| b.to_physical().lp_norm(p))
            .collect()
    }

    /// Residual of Σ_j Δ_j f against the source, relative to its norm.
    pub fn reconstruction_defect(&self, f: &SpectralField) -> f64 {
        let mut sum = SpectralField::zeros(f.grid());
        for b in &self.blocks {
            sum.add_scaled(b, 1.0);
        }
        let scale = f.coeff_norm();
        if scale > 0.0 {
            sum.sub(f).coeff_norm() / scale
        } else {
            sum.coeff_norm()
        }
    }
}

/// Low-frequency cutoff S_j f = Σ_{k ≤ j−1} Δ_k f, realized as the
/// multiplier Φ_c(2^{−j}|k|) (the telescoped block sum).
pub fn low_pass(f: &SpectralField, j: i32, spec: &DyadicSpec) -> Result<SpectralField> {
    spec.check_lowpass_index(j)?;
    let scale = (-j as f64).exp2();
    Ok(f.map_multiplier(|kx, ky| {
        let r = (kx * kx + ky * ky).sqrt();
        num_complex::Complex64::new(cutoff_profile(scale * r), 0.0)
    }))
}

/// Homogeneous Besov norm ‖f‖_{Ḃ^s_{p,q}} over the grid-adapted shell
/// range; L^p norms by uniform-grid quadrature, p or q = ∞ as maxima.
pub fn besov_norm(f: &SpectralField, s: f64, p: f64, q: f64, spec: &DyadicSpec) -> f64 {
    assert!(
        p >= 1.0 && q >= 1.0,
        "Besov indices p = {p}, q = {q} out of range"
    );
    let terms = spec.shells().map(|j| {
        let block = dyadic_block(f, j, spec).expect("j in range");
        (j as f64 * s).exp2() * block.to_physical().lp_norm(p)
    });
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Time-integrated Besov norm ‖f‖_{L̃^r(0,T;Ḃ^s_{p,q})}: per shell the
/// L^r(0,T;L^p) norm of ‖Δ_j f(t)‖_{L^p} (trapezoidal for r = 1, sup
/// for r = ∞), then the weighted ℓ^q sum over shells.
pub fn time_besov_norm(
    traj: &Trajectory,
    s: f64,
    p: f64,
    q: f64,
    r: f64,
    spec: &DyadicSpec,
) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if r != 1.0 && !r.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "time exponent r = {r} must be 1 or ∞"
        )));
    }
    let times = traj.times();
    let mut terms = Vec::new();
    for j in spec.shells() {
        let series: Vec<f64> = traj
            .snapshots()
            .iter()
            .map(|f| {
                dyadic_block(f, j, spec)
                    .expect("j in range")
                    .to_physical()
                    .lp_norm(p)
            })
            .collect();
        let time_norm = if r.is_infinite() {
            series.iter().fold(0.0f64, |m, v| m.max(*v))
        } else {
            trapezoid(times, &series)
        };
        terms.push((j as f64 * s).exp2() * time_norm);
    }
    Ok(if q.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms
            .into_iter()
            .map(|t| t.powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    })
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    acc
}

/// The two partial sums of the Bony decomposition of Δ_j(fg):
/// Σ_{k ≥ j−2} Δ_j(S_{k+1}f Δ_k g) and Σ_{k ≥ j−2} Δ_j(S_k g Δ_k f).
/// Products are evaluated on a 2×-padded grid so the identity is tested
/// free of aliasing.
pub fn paraproduct_split(
    f: &SpectralField,
    g: &SpectralField,
    j: i32,
    spec: &DyadicSpec,
) -> Result<(SpectralField, SpectralField)> {
    f.grid().same_as(g.grid())?;
    spec.check_block_index(j)?;
    let mut first = SpectralField::zeros(f.grid());
    let mut second = SpectralField::zeros(f.grid());
    for k in (j - 2).max(spec.j_min)..=spec.j_max {
        let block_g = dyadic_block(g, k, spec)?;
        let low_f = low_pass(f, k + 1, spec)?;
        let term = crate::constitutive::product(
            &low_f,
            &block_g,
            crate::constitutive::DealiasMode::StrictPadded,
        );
        first.add_scaled(&dyadic_block(&term, j, spec)?, 1.0);

        let block_f = dyadic_block(f, k, spec)?;
        let low_g = low_pass(g, k, spec)?;
        let term = crate::constitutive::product(
            &low_g,
            &block_f,
            crate::constitutive::DealiasMode::StrictPadded,
        );
        second.add_scaled(&dyadic_block(&term, j, spec)?, 1.0);
    }
    Ok((first, second))
}

/// Measured Bernstein quotient ‖Δ_j f‖_{L^q} / (2^{2j(1/p−1/q)} ‖Δ_j f‖_{L^p}).
pub fn bernstein_ratio(
    f: &SpectralField,
    j: i32,
    p: f64,
    q: f64,
    spec: &DyadicSpec,
) -> Result<f64> {
    if !(1.0 <= p && p <= q) {
        return Err(Error::InvalidArgument(format!(
            "Bernstein exponents need 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    let block = dyadic_block(f, j, spec)?.to_physical();
    let denom_lp = block.lp_norm(p);
    if denom_lp == 0.0 {
        return Err(Error::Degenerate(format!("block j = {j} is zero")));
    }
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let weight = (2.0 * j as f64 * (1.0 / p - inv_q)).exp2();
    Ok(block.lp_norm(q) / (weight * denom_lp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{heat_semigroup, partial_derivative};
    use crate::testutil::random_mean_zero_field;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn cos_x1(g: &Grid) -> SpectralField {
        SpectralField::from_modes(g, &[(1, 0, Complex64::new(0.5, 0.0))])
    }

    #[test]
    fn cutoff_has_plateau_support_and_monotonicity() {
        assert_eq!(cutoff_profile(0.0), 1.0);
        assert_eq!(cutoff_profile(0.5), 1.0);
        assert_eq!(cutoff_profile(0.625), 0.0);
        assert_eq!(cutoff_profile(3.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let r = 0.45 + 0.25 * i as f64 / 100.0;
            let v = cutoff_profile(r);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn partition_of_unity_at_random_radii() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let r = rng.gen_range(1e-3..1e3f64);
            let j_hi = r.log2().ceil() as i32 + 2;
            let mut sum = cutoff_profile(r);
            for j in 0..=j_hi.max(0) {
                sum += shell_profile((-j as f64).exp2() * r);
            }
            assert!((sum - 1.0).abs() < 1e-10, "partition at r = {r}: {sum}");
        }
    }

    #[test]
    fn spec_range_follows_log2_arithmetic() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        assert_eq!((spec.j_min(), spec.j_max()), (-1, 7));
        // n = 8: k_max = 4√2, ⌈log₂⌉ = 3, so the guarded top shell is 4.
        let g = Grid::new(8, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        assert_eq!((spec.j_min(), spec.j_max()), (-1, 4));
        // Doubled box halves k_min.
        let g = Grid::new(8, 2.0 * TAU).unwrap();
        assert_eq!(DyadicSpec::for_grid(&g).j_min(), -2);
    }

    #[test]
    fn single_mode_lands_in_one_shell() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        for j in spec.shells() {
            let b = dyadic_block(&f, j, &spec).unwrap();
            if j == 0 {
                assert!(b.sub(&f).coeff_norm() < 1e-15, "Δ₀ should reproduce cos x₁");
            } else {
                assert!(b.coeff_norm() < 1e-15, "Δ_{j} should vanish on |k| = 1");
            }
        }
        assert!(dyadic_block(&f, spec.j_max() + 1, &spec).is_err());
    }

    #[test]
    fn cos_3x_splits_by_evaluated_cutoff() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let f = SpectralField::from_modes(&g, &[(3, 0, Complex64::new(0.5, 0.0))]);
        // |k| = 3 → Ψ(3·2^{−j}) nonzero only for j = 2 (r = 3/4) within
        // the shell support [1/2, 5/4]; j = 1 gives r = 3/2, outside.
        let b2 = dyadic_block(&f, 2, &spec).unwrap();
        let expect = shell_profile(0.75);
        assert!((b2.coeff(3, 0).re - 0.5 * expect).abs() < 1e-15);
        assert!(dyadic_block(&f, 1, &spec).unwrap().coeff_norm() < 1e-15);
        assert!(dyadic_block(&f, 3, &spec).unwrap().coeff_norm() < 1e-15);
        // Ψ(3/4) + Ψ(3/8)(=0) + Ψ(3/2)(=0) leaves reconstruction to j=2 alone
        assert!(
            (expect - 1.0).abs() < 1e-12,
            "Ψ(3/4) should be 1 for this profile"
        );
    }

    #[test]
    fn block_support_is_hard_zero() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let f = random_mean_zero_field(&g, &mut rng, 15);
        for j in spec.shells() {
            let b = dyadic_block(&f, j, &spec).unwrap();
            let lo = (j as f64 - 1.0).exp2();
            let hi = (j as f64).exp2() * 1.25;
            let n = g.n();
            for i1 in 0..n {
                for i2 in 0..n {
                    let k = (g.wavenumber(i1).powi(2) + g.wavenumber(i2).powi(2)).sqrt();
                    if k < lo || k > hi {
                        assert_eq!(b.coeffs()[i1 * n + i2], Complex64::default());
                    }
                }
            }
        }
    }

    #[test]
    fn blocks_reconstruct_mean_zero_fields() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let f = random_mean_zero_field(&g, &mut rng, 31);
            let mut sum = SpectralField::zeros(&g);
            for j in spec.shells() {
                sum.add_scaled(&dyadic_block(&f, j, &spec).unwrap(), 1.0);
            }
            assert!(sum.sub(&f).coeff_norm() < 1e-12 * f.coeff_norm());
        }
    }

    #[test]
    fn block_set_shares_one_decomposition() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let f = random_mean_zero_field(&g, &mut rng, 12);
        let set = BlockSet::decompose(&f, &spec);
        assert!(set.reconstruction_defect(&f) < 1e-12);
        for (idx, j) in spec.shells().enumerate() {
            let direct = dyadic_block(&f, j, &spec).unwrap();
            assert_eq!(set.block(j).unwrap(), &direct);
            let norms = set.shell_lp_norms(2.0);
            assert!((norms[idx] - direct.to_physical().lp_norm(2.0)).abs() < 1e-15);
        }
        assert!(set.block(spec.j_max() + 1).is_err());
    }

    #[test]
    fn low_pass_matches_block_sum_and_telescopes() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        assert!(low_pass(&f, 2, &spec).unwrap().sub(&f).coeff_norm() < 1e-15);
        assert!(low_pass(&f, 0, &spec).unwrap().coeff_norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let f = random_mean_zero_field(&g, &mut rng, 15);
        for j in spec.shells() {
            // S_j as explicit block sum
            let mut sum = SpectralField::zeros(&g);
            for k in spec.j_min()..j {
                sum.add_scaled(&dyadic_block(&f, k, &spec).unwrap(), 1.0);
            }
            let sj = low_pass(&f, j, &spec).unwrap();
            assert!(sj.sub(&sum).coeff_norm() < 1e-12 * f.coeff_norm());
            // telescoping: S_j f + Σ_{k≥j} Δ_k f = f
            let mut total = sj;
            for k in j..=spec.j_max() {
                total.add_scaled(&dyadic_block(&f, k, &spec).unwrap(), 1.0);
            }
            assert!(total.sub(&f).coeff_norm() < 1e-12 * f.coeff_norm());
        }
    }

    #[test]
    fn besov_norm_on_named_fields() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        let expect = (2.0 * PI * PI).sqrt();
        for s in [-1.0, 0.0, 1.5] {
            assert!((besov_norm(&f, s, 2.0, 2.0, &spec) - expect).abs() < 1e-12);
        }
        assert_eq!(
            besov_norm(&SpectralField::zeros(&g), 1.0, 2.0, 1.0, &spec),
            0.0
        );
        // cos x₁ + cos 4x₂ in s=1, p=q=1: the blocks are exactly the two
        // cosines (shells j=0 and j=2), so the oracle is the plain grid
        // quadrature of each, evaluated pointwise without the FFT path.
        let f = SpectralField::from_modes(
            &g,
            &[
                (1, 0, Complex64::new(0.5, 0.0)),
                (0, 4, Complex64::new(0.5, 0.0)),
            ],
        );
        let value = besov_norm(&f, 1.0, 1.0, 1.0, &spec);
        let quad_l1 = |freq: f64| -> f64 {
            let n = g.n();
            let mut sum = 0.0;
            for j in 0..n {
                sum += (freq * g.coordinate(j)).cos().abs();
            }
            sum * n as f64 * g.cell_area()
        };
        let expect = quad_l1(1.0) + 4.0 * quad_l1(4.0);
        assert!(
            (value - expect).abs() < 1e-12 * expect,
            "got {value}, expected {expect}"
        );
        // and the quadrature itself sits within its O(h²) kink error of 8π per block
        assert!((expect - 40.0 * PI).abs() < 0.02 * 40.0 * PI);
    }

    #[test]
    fn time_besov_norm_on_decaying_mode() {
        let g = Grid::new(16, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let l2 = (2.0 * PI * PI).sqrt();
        // constant-in-time cos x₁ on [0, 1]
        let states = vec![cos_x1(&g); 11];
        let traj = Trajectory::from_uniform(0.0, 0.1, states).unwrap();
        let sup = time_besov_norm(&traj, 0.0, 2.0, 2.0, f64::INFINITY, &spec).unwrap();
        assert!((sup - l2).abs() < 1e-12);
        let int = time_besov_norm(&traj, 0.0, 2.0, 2.0, 1.0, &spec).unwrap();
        assert!((int - l2).abs() < 1e-12);
        // e^{−t} cos x₁, dt = 1e-3: trapezoid lands within 1e-6 of 1−e⁻¹
        let m = 1000;
        let states: Vec<SpectralField> = (0..=m)
            .map(|i| cos_x1(&g).scaled((-(i as f64) / m as f64).exp()))
            .collect();
        let traj = Trajectory::from_uniform(0.0, 1.0 / m as f64, states).unwrap();
        let int = time_besov_norm(&traj, 0.0, 2.0, 2.0, 1.0, &spec).unwrap();
        let expect = (1.0 - (-1.0f64).exp()) * l2;
        assert!((int - expect).abs() < 1e-6);
        assert!(matches!(
            time_besov_norm(&Trajectory::new(), 0.0, 2.0, 2.0, 1.0, &spec),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn paraproduct_reconstructs_blocks_of_products() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        // f = g = cos x₁, j = 1: product = ½ + ½cos 2x₁
        let f = cos_x1(&g);
        let product =
            crate::constitutive::product(&f, &f, crate::constitutive::DealiasMode::StrictPadded);
        let (s1, s2) = paraproduct_split(&f, &f, 1, &spec).unwrap();
        let mut sum = s1;
        sum.add_scaled(&s2, 1.0);
        let direct = dyadic_block(&product, 1, &spec).unwrap();
        assert!(sum.sub(&direct).coeff_norm() < 1e-12 * product.coeff_norm());
        // zero factor → both sums vanish
        let zero = SpectralField::zeros(&g);
        let (s1, s2) = paraproduct_split(&f, &zero, 1, &spec).unwrap();
        assert_eq!(s1.coeff_norm(), 0.0);
        assert_eq!(s2.coeff_norm(), 0.0);
    }

    #[test]
    fn paraproduct_identity_on_random_pairs() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            let f = random_mean_zero_field(&g, &mut rng, 12);
            let h = random_mean_zero_field(&g, &mut rng, 12);
            let product = crate::constitutive::product(
                &f,
                &h,
                crate::constitutive::DealiasMode::StrictPadded,
            );
            let scale = product.coeff_norm();
            for j in spec.shells() {
                let (s1, s2) = paraproduct_split(&f, &h, j, &spec).unwrap();
                let mut sum = s1;
                sum.add_scaled(&s2, 1.0);
                let direct = dyadic_block(&product, j, &spec).unwrap();
                assert!(
                    sum.sub(&direct).coeff_norm() < 1e-12 * scale,
                    "paraproduct identity fails at j = {j}"
                );
            }
        }
    }

    #[test]
    fn vanishing_identities_hold_blockwise() {
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let f = random_mean_zero_field(&g, &mut rng, 12);
        let h = random_mean_zero_field(&g, &mut rng, 12);
        let f = f.scaled(1.0 / f.l2_norm());
        let h = h.scaled(1.0 / h.l2_norm());
        for j in spec.shells() {
            for k in spec.j_min()..=spec.j_max() {
                let low_h = low_pass(&h, k, &spec).unwrap();
                let block_f = dyadic_block(&f, k, &spec).unwrap();
                let term = crate::constitutive::product(
                    &low_h,
                    &block_f,
                    crate::constitutive::DealiasMode::StrictPadded,
                );
                let projected = dyadic_block(&term, j, &spec).unwrap();
                if k <= j - 2 {
                    assert!(
                        projected.coeff_norm() < 1e-12,
                        "Δ_{j}(S_{k} g Δ_{k} f) should vanish"
                    );
                }
                let low_f1 = low_pass(&f, k + 1, &spec).unwrap();
                let block_h = dyadic_block(&h, k, &spec).unwrap();
                let term = crate::constitutive::product(
                    &low_f1,
                    &block_h,
                    crate::constitutive::DealiasMode::StrictPadded,
                );
                let projected = dyadic_block(&term, j, &spec).unwrap();
                if k <= j - 3 {
                    assert!(
                        projected.coeff_norm() < 1e-12,
                        "Δ_{j}(S_{k}+1 f Δ_{k} g) should vanish"
                    );
                }
            }
        }
    }

    #[test]
    fn bernstein_ratios_behave() {
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        assert!((bernstein_ratio(&f, 0, 2.0, 2.0, &spec).unwrap() - 1.0).abs() < 1e-13);
        let expect = 1.0 / (2.0 * PI * PI).sqrt();
        let r = bernstein_ratio(&f, 0, 2.0, f64::INFINITY, &spec).unwrap();
        assert!((r - expect).abs() < 1e-13);
        assert!(bernstein_ratio(&f, 3, 2.0, f64::INFINITY, &spec).is_err());

        // Shell sweep: L²→L^∞ quotients stay below a j-independent bound,
        // and the k = 1 derivative quotient is capped by the annulus
        // radius factor 5/4.
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..20 {
            let f = random_mean_zero_field(&g, &mut rng, 31);
            for j in 0..=5 {
                let block = dyadic_block(&f, j, &spec).unwrap();
                if block.coeff_norm() < 1e-12 {
                    continue;
                }
                let r = bernstein_ratio(&f, j, 2.0, f64::INFINITY, &spec).unwrap();
                assert!(r < 1.0, "L²→L^∞ Bernstein quotient {r} at j = {j}");
                let phys = block.to_physical();
                let d1 = partial_derivative(&block, 0).to_physical().lp_norm(2.0);
                let d2 = partial_derivative(&block, 1).to_physical().lp_norm(2.0);
                let quotient = d1.max(d2) / ((j as f64).exp2() * phys.lp_norm(2.0));
                assert!(
                    quotient <= 1.25 + 1e-12,
                    "derivative quotient {quotient} at j = {j}"
                );
            }
        }
    }

    #[test]
    fn semigroup_localizes_on_shells() {
        // ‖e^{−tΛ}Δ_j f‖₂ ≤ e^{−t·2^{j−1}}‖Δ_j f‖₂: the annulus floor is
        // a hard support bound, so the constant is 1 in L².
        let g = Grid::new(64, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let f = random_mean_zero_field(&g, &mut rng, 31);
        for j in 0..=5 {
            let block = dyadic_block(&f, j, &spec).unwrap();
            let base = block.l2_norm();
            if base < 1e-12 {
                continue;
            }
            for t in [0.01, 0.1, 1.0] {
                let damped = heat_semigroup(&block, t, 1.0).unwrap().l2_norm();
                let envelope = (-t * (j as f64 - 1.0).exp2()).exp() * base;
                assert!(damped <= envelope * (1.0 + 1e-12), "j = {j}, t = {t}");
            }
        }
    }
}
