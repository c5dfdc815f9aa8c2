//! Picard/Duhamel fixed-point machinery for the mild formulation
//! ρ(t) = e^{−tΛ}ρ₀ − ∫₀ᵗ e^{−(t−s)Λ} ∇·(uρ)(s) ds with
//! u = −P(ρRρ), plus E_p norms, contraction tracking, smallness scans,
//! the Gevrey-weighted norm, and a Fourier-decay analyticity estimator.

use crate::constitutive::{self, DealiasMode};
use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::littlewood_paley::DyadicSpec;
use crate::operators::{divergence, gevrey_weight, heat_semigroup};
use crate::trajectory::Trajectory;

/// Parameters of one Picard solve.
#[derive(Debug, Clone, Copy)]
pub struct MildParams {
    /// Lebesgue index of the E_p space.
    pub p: f64,
    /// Dissipation order of the semigroup kernel (1 = critical).
    pub alpha: f64,
    /// Node spacing of the iterate time grid.
    pub dt: f64,
    /// Relative fixed-point tolerance in E_p.
    pub tol: f64,
    pub max_iter: usize,
    pub dealias: DealiasMode,
}

impl MildParams {
    /// Defaults matching the solver's role: p = 2 critical kernel,
    /// Δt = T/100, 1e-8 tolerance.
    pub fn for_final_time(t_final: f64) -> MildParams {
        MildParams {
            p: 2.0,
            alpha: 1.0,
            dt: 0.01 * t_final,
            tol: 1e-8,
            max_iter: 40,
            dealias: DealiasMode::TwoThirds,
        }
    }
}

/// E_p norm ‖f‖ = ‖f‖_{L̃^∞_t Ḃ^{2/p}_{p,1}} + ‖f‖_{L̃^1_t Ḃ^{2/p+1}_{p,1}}.
/// Each snapshot is decomposed into blocks once and both pieces are
/// read off the same shell-norm table.
pub fn ep_norm(traj: &Trajectory, p: f64, spec: &DyadicSpec) -> Result<f64> {
    assert!((1.0..f64::INFINITY).contains(&p), "E_p needs finite p >= 1");
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let s = 2.0 / p;
    // shell_norms[i][shell] = ‖Δ_j ρ(t_i)‖_{L^p}
    let shell_norms: Vec<Vec<f64>> = traj
        .snapshots()
        .iter()
        .map(|snap| crate::littlewood_paley::BlockSet::decompose(snap, spec).shell_lp_norms(p))
        .collect();
    let times = traj.times();
    let mut sup_part = 0.0;
    let mut int_part = 0.0;
    for (idx, j) in spec.shells().enumerate() {
        let series: Vec<f64> = shell_norms.iter().map(|row| row[idx]).collect();
        let sup = series.iter().fold(0.0f64, |m, v| m.max(*v));
        sup_part += (j as f64 * s).exp2() * sup;
        int_part +=
            (j as f64 * (s + 1.0)).exp2() * crate::littlewood_paley::trapezoid(times, &series);
    }
    Ok(sup_part + int_part)
}

/// Normalized weights (w₀, w₁) of the exponential trapezoid rule:
/// ∫₀^h e^{−(h−x)σ} [(1−x/h)g₀ + (x/h)g₁] dx = h (w₀ g₀ + w₁ g₁)
/// with z = hσ; the kernel is integrated exactly, the integrand
/// linearly interpolated.
fn exp_trapezoid_weights(z: f64) -> (f64, f64) {
    debug_assert!(z >= 0.0);
    let (i0, i1) = if z < 1e-4 {
        (
            1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0,
            0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0,
        )
    } else {
        let em = (-z).exp();
        ((1.0 - em) / z, (z - 1.0 + em) / (z * z))
    };
    (i0 - i1, i1)
}

fn uniform_dt(traj: &Trajectory) -> Result<f64> {
    let times = traj.times();
    if times.len() < 2 {
        return Err(Error::InvalidArgument(
            "trajectory needs at least two nodes".into(),
        ));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
            return Err(Error::InvalidArgument(
                "Duhamel quadrature needs a uniform grid".into(),
            ));
        }
    }
    Ok(dt)
}

/// The Duhamel integral t ↦ ∫₀ᵗ e^{−(t−s)Λ^α} q(s) ds for a trajectory
/// of integrands q, advanced by the interval recurrence
/// I(t_{m+1}) = e^{−hΛ^α} I(t_m) + h(w₀ q_m + w₁ q_{m+1}).
pub fn duhamel_integral(integrand: &Trajectory, alpha: f64) -> Result<Trajectory> {
    let h = uniform_dt(integrand)?;
    let grid = integrand.grid().expect("non-empty").clone();
    let n = grid.n();
    let mut sigma = Vec::with_capacity(n * n);
    for i1 in 0..n {
        let kx = grid.wavenumber(i1);
        for i2 in 0..n {
            let ky = grid.wavenumber(i2);
            sigma.push((kx * kx + ky * ky).sqrt().powf(alpha));
        }
    }
    let decay: Vec<f64> = sigma.iter().map(|s| (-h * s).exp()).collect();
    let weights: Vec<(f64, f64)> = sigma.iter().map(|s| exp_trapezoid_weights(h * s)).collect();

    let mut out = Trajectory::new();
    let mut current = SpectralField::zeros(&grid);
    out.push(integrand.times()[0], current.clone())?;
    for m in 1..integrand.len() {
        let q0 = integrand.snapshots()[m - 1].coeffs();
        let q1 = integrand.snapshots()[m].coeffs();
        for (idx, c) in current.coeffs_mut().iter_mut().enumerate() {
            let (w0, w1) = weights[idx];
            *c = *c * decay[idx] + h * (w0 * q0[idx] + w1 * q1[idx]);
        }
        out.push(integrand.times()[m], current.clone())?;
    }
    Ok(out)
}

/// The bilinear form B(v, θ)(t) = ∫₀ᵗ e^{−(t−s)Λ^α} ∇·(vθ)(s) ds.
/// `v` must supply one velocity per node of `theta`.
pub fn bilinear_form(
    v: &[VectorField],
    theta: &Trajectory,
    alpha: f64,
    dealias: DealiasMode,
) -> Result<Trajectory> {
    if v.len() != theta.len() {
        return Err(Error::InvalidArgument(format!(
            "velocity count {} does not match trajectory length {}",
            v.len(),
            theta.len()
        )));
    }
    let mut integrand = Trajectory::new();
    for (i, (t, rho)) in theta.iter().enumerate() {
        let fx = constitutive::product(v[i].x(), rho, dealias);
        let fy = constitutive::product(v[i].y(), rho, dealias);
        let mut div = divergence(&VectorField::new(fx, fy)?);
        div.set_mean_zero();
        integrand.push(t, div)?;
    }
    duhamel_integral(&integrand, alpha)
}

/// Velocities u = −P(ρRρ) along a trajectory.
pub fn trajectory_velocities(traj: &Trajectory, dealias: DealiasMode) -> Result<Vec<VectorField>> {
    traj.snapshots()
        .iter()
        .map(|rho| constitutive::velocity(rho, dealias))
        .collect()
}

/// Free evolution e^{−tΛ^α}ρ₀ sampled on a uniform grid of spacing dt.
pub fn free_evolution(
    rho0: &SpectralField,
    t_final: f64,
    dt: f64,
    alpha: f64,
) -> Result<Trajectory> {
    let steps = (t_final / dt).round() as usize;
    if steps == 0 || ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt} does not divide the final time {t_final}"
        )));
    }
    let mut traj = Trajectory::new();
    for m in 0..=steps {
        let t = m as f64 * dt;
        traj.push(t, heat_semigroup(rho0, t, alpha)?)?;
    }
    Ok(traj)
}

/// One Picard update: ρ ↦ e^{−tΛ^α}ρ₀ − B(u_prev, ρ_prev).
pub fn duhamel_apply(
    prev: &Trajectory,
    rho0: &SpectralField,
    params: &MildParams,
) -> Result<Trajectory> {
    rho0.require_mean_zero()?;
    match prev.grid() {
        Some(g) => g.same_as(rho0.grid())?,
        None => return Err(Error::EmptyTrajectory),
    }
    let t_final = prev.last_time().expect("non-empty");
    let free = free_evolution(rho0, t_final, uniform_dt(prev)?, params.alpha)?;
    let u = trajectory_velocities(prev, params.dealias)?;
    let correction = bilinear_form(&u, prev, params.alpha, params.dealias)?;
    let mut out = Trajectory::new();
    for m in 0..free.len() {
        let mut s = free.snapshots()[m].clone();
        s.add_scaled(&correction.snapshots()[m], -1.0);
        out.push(free.times()[m], s)?;
    }
    Ok(out)
}

/// Outcome of a full Picard iteration.
#[derive(Debug, Clone)]
pub struct PicardResult {
    pub trajectory: Trajectory,
    /// E_p norms of the accepted iterates ρ^{(1)}, ρ^{(2)}, …
    pub ep_norms: Vec<f64>,
    /// Difference norms ‖ρ^{(n)} − ρ^{(n−1)}‖_{E_p}.
    pub difference_norms: Vec<f64>,
    /// Ratios r_n of consecutive difference norms.
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
}

impl PicardResult {
    /// Whether every recorded ratio stayed below one. Non-contraction
    /// is a reported outcome (expected for large data), not an error.
    pub fn contracted(&self) -> bool {
        self.contraction_factors.iter().all(|r| *r < 1.0)
    }
}

/// Iterates ρ^{(0)} = 0, ρ^{(n)} = e^{−tΛ^α}ρ₀ − B(u^{(n−1)}, ρ^{(n−1)})
/// until the relative E_p difference drops below tol or max_iter is hit.
pub fn iterate_to_fixed_point(
    rho0: &SpectralField,
    t_final: f64,
    params: &MildParams,
) -> Result<PicardResult> {
    let grid = rho0.grid().clone();
    let spec = DyadicSpec::for_grid(&grid);
    let steps = (t_final / params.dt).round().max(1.0) as usize;
    let dt = t_final / steps as f64;

    let zeros: Vec<SpectralField> = (0..=steps).map(|_| SpectralField::zeros(&grid)).collect();
    let mut prev = Trajectory::from_uniform(0.0, dt, zeros)?;
    let adjusted = MildParams { dt, ..*params };

    let mut result = PicardResult {
        trajectory: Trajectory::new(),
        ep_norms: Vec::new(),
        difference_norms: Vec::new(),
        contraction_factors: Vec::new(),
        converged: false,
    };
    for _ in 0..params.max_iter {
        let next = duhamel_apply(&prev, rho0, &adjusted)?;
        if !next.snapshots().iter().all(|s| s.is_finite()) {
            // divergence of the iteration; report what we have
            result.converged = false;
            return Ok(result);
        }
        let diff = {
            let mut delta = Trajectory::new();
            for (i, (t, s)) in next.iter().enumerate() {
                delta.push(t, s.sub(&prev.snapshots()[i]))?;
            }
            ep_norm(&delta, params.p, &spec)?
        };
        let norm = ep_norm(&next, params.p, &spec)?;
        if let Some(&last) = result.difference_norms.last() {
            if last > 0.0 {
                result.contraction_factors.push(diff / last);
            }
        }
        result.difference_norms.push(diff);
        result.ep_norms.push(norm);
        prev = next;
        if diff <= params.tol * norm.max(f64::MIN_POSITIVE) {
            result.converged = true;
            break;
        }
    }
    result.trajectory = prev;
    Ok(result)
}

/// One row of a smallness scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub scale: f64,
    pub contracted: bool,
    pub converged: bool,
    pub ep_norm: f64,
    pub max_contraction_factor: f64,
    /// ‖ρ‖_{E_p} and ‖B(u(ρ), ρ)‖_{E_p} of the free evolution at this
    /// scale, the probe pair behind the cubic fit.
    pub probe_ep: f64,
    pub probe_bilinear_ep: f64,
}

#[derive(Debug, Clone)]
pub struct SmallnessScan {
    pub rows: Vec<ScanRow>,
    /// Log-log slope of ‖B(u,ρ)‖_{E_p} against ‖ρ‖_{E_p} across the
    /// scales with nonzero probes (cubic for this constitutive law).
    pub cubic_exponent: Option<f64>,
}

/// Runs the Picard iteration over amplitude scalings of one profile and
/// records the contraction verdicts plus the bilinear-probe pairs.
pub fn smallness_scan(
    profile: &SpectralField,
    scales: &[f64],
    t_final: f64,
    params: &MildParams,
) -> Result<SmallnessScan> {
    let spec = DyadicSpec::for_grid(profile.grid());
    let mut rows = Vec::new();
    let mut log_pairs = Vec::new();
    for &scale in scales {
        let rho0 = profile.scaled(scale);
        let picard = iterate_to_fixed_point(&rho0, t_final, params)?;
        let steps = (t_final / params.dt).round().max(1.0) as usize;
        let dt = t_final / steps as f64;
        let free = free_evolution(&rho0, t_final, dt, params.alpha)?;
        let u = trajectory_velocities(&free, params.dealias)?;
        let correction = bilinear_form(&u, &free, params.alpha, params.dealias)?;
        let probe_ep = ep_norm(&free, params.p, &spec)?;
        let probe_bilinear = ep_norm(&correction, params.p, &spec)?;
        if probe_ep > 0.0 && probe_bilinear > 0.0 {
            log_pairs.push((probe_ep.ln(), probe_bilinear.ln()));
        }
        rows.push(ScanRow {
            scale,
            contracted: picard.contracted(),
            converged: picard.converged,
            ep_norm: picard.ep_norms.last().copied().unwrap_or(0.0),
            max_contraction_factor: picard.contraction_factors.iter().fold(f64::NAN, |m, r| {
                if m.is_nan() {
                    *r
                } else {
                    m.max(*r)
                }
            }),
            probe_ep,
            probe_bilinear_ep: probe_bilinear,
        });
    }
    let cubic_exponent = fit_slope(&log_pairs);
    Ok(SmallnessScan {
        rows,
        cubic_exponent,
    })
}

fn fit_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// E_p norm of the Gevrey-weighted trajectory t ↦ e^{a t Λ₁} ρ(t),
/// a ∈ (0, 1/4]. An overflow report signals that the weight left the
/// representable range before the trajectory's analyticity did.
pub fn gevrey_ep_norm(traj: &Trajectory, a: f64, p: f64, spec: &DyadicSpec) -> Result<f64> {
    if !(a > 0.0 && a <= 0.25) {
        return Err(Error::InvalidArgument(format!(
            "Gevrey rate a = {a} outside (0, 1/4]"
        )));
    }
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut weighted = Trajectory::new();
    for (t, s) in traj.iter() {
        weighted.push(t, gevrey_weight(s, a * t)?)?;
    }
    ep_norm(&weighted, p, spec)
}

/// Least-squares estimate of the analyticity radius: the slope σ of
/// log|ρ̂(k)| against −(|k₁|+|k₂|) over the top three octaves of active
/// ℓ¹-shells (amplitudes above the 1e-14 round-off floor), clipped at 0.
pub fn analyticity_radius(rho: &SpectralField) -> Result<f64> {
    const FLOOR: f64 = 1e-14;
    let grid: &Grid = rho.grid();
    let n = grid.n();
    let k1 = grid.min_nonzero_wavenumber();
    // peak amplitude per integer ℓ¹ shell
    let mut shells: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for i1 in 0..n {
        let m1 = grid.mode(i1);
        for i2 in 0..n {
            let m2 = grid.mode(i2);
            let w = m1.abs() + m2.abs();
            if w == 0 {
                continue;
            }
            let a = rho.coeffs()[i1 * n + i2].norm();
            let entry = shells.entry(w).or_insert(0.0);
            if a > *entry {
                *entry = a;
            }
        }
    }
    shells.retain(|_, a| *a > FLOOR);
    let w_max = match shells.keys().next_back() {
        Some(&w) => w,
        None => {
            return Err(Error::Degenerate(
                "spectrum below the amplitude floor".into(),
            ))
        }
    };
    let window: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(&w, _)| (w as f64) > w_max as f64 / 8.0)
        .map(|(&w, &a)| (w as f64 * k1, a.ln()))
        .collect();
    if window.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} active shells in the fit window",
            window.len()
        )));
    }
    let slope = fit_slope(&window).expect("two or more distinct shells");
    Ok((-slope).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_mean_zero_field;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, TAU};

    fn cos_x1(g: &Grid) -> SpectralField {
        SpectralField::from_modes(g, &[(1, 0, Complex64::new(0.5, 0.0))])
    }

    fn small_two_mode(g: &Grid, amp: f64) -> SpectralField {
        SpectralField::from_modes(
            g,
            &[
                (1, 0, Complex64::new(amp / 2.0, 0.0)),
                (1, 1, Complex64::new(amp / 2.0, 0.0)),
            ],
        )
    }

    #[test]
    fn ep_norm_on_static_and_decaying_modes() {
        let g = Grid::new(16, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let l2 = (2.0 * PI * PI).sqrt();
        // zero trajectory
        let zeros: Vec<SpectralField> = (0..=10).map(|_| SpectralField::zeros(&g)).collect();
        let traj = Trajectory::from_uniform(0.0, 0.1, zeros).unwrap();
        assert_eq!(ep_norm(&traj, 2.0, &spec).unwrap(), 0.0);
        // static cos x₁ on [0, 1]: 2‖cos‖_{L²}
        let states = vec![cos_x1(&g); 11];
        let traj = Trajectory::from_uniform(0.0, 0.1, states).unwrap();
        let e = ep_norm(&traj, 2.0, &spec).unwrap();
        assert!((e - 2.0 * l2).abs() < 1e-12);
        // e^{−t} cos x₁ on [0, 1]: ‖cos‖(1 + (1−e⁻¹)) within 1e-6
        let m = 1000;
        let states: Vec<SpectralField> = (0..=m)
            .map(|i| cos_x1(&g).scaled((-(i as f64) / m as f64).exp()))
            .collect();
        let traj = Trajectory::from_uniform(0.0, 1.0 / m as f64, states).unwrap();
        let e = ep_norm(&traj, 2.0, &spec).unwrap();
        let expect = l2 * (2.0 - (-1.0f64).exp());
        assert!((e - expect).abs() < 1e-6);
    }

    #[test]
    fn fused_ep_norm_matches_the_two_norm_definition() {
        use crate::littlewood_paley::time_besov_norm;
        let g = Grid::new(32, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let states: Vec<SpectralField> = (0..=15)
            .map(|_| random_mean_zero_field(&g, &mut rng, 10))
            .collect();
        let traj = Trajectory::from_uniform(0.0, 0.05, states).unwrap();
        for p in [1.5, 2.0, 4.0] {
            let fused = ep_norm(&traj, p, &spec).unwrap();
            let s = 2.0 / p;
            let sup = time_besov_norm(&traj, s, p, 1.0, f64::INFINITY, &spec).unwrap();
            let int = time_besov_norm(&traj, s + 1.0, p, 1.0, 1.0, &spec).unwrap();
            assert!((fused - (sup + int)).abs() < 1e-12 * fused, "p = {p}");
        }
    }

    #[test]
    fn duhamel_on_zero_input_gives_free_evolution() {
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams::for_final_time(1.0);
        let zeros: Vec<SpectralField> = (0..=100).map(|_| SpectralField::zeros(&g)).collect();
        let prev = Trajectory::from_uniform(0.0, 0.01, zeros).unwrap();
        let rho0 = small_two_mode(&g, 0.5);
        let out = duhamel_apply(&prev, &rho0, &params).unwrap();
        let free = free_evolution(&rho0, 1.0, 0.01, 1.0).unwrap();
        for (a, b) in out.snapshots().iter().zip(free.snapshots()) {
            assert!(a.sub(b).coeff_norm() < 1e-15);
        }
    }

    #[test]
    fn duhamel_keeps_single_mode_free() {
        // cos x₁ produces u ≡ 0, so the correction vanishes.
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams::for_final_time(1.0);
        let rho0 = cos_x1(&g);
        let free = free_evolution(&rho0, 1.0, 0.01, 1.0).unwrap();
        let out = duhamel_apply(&free, &rho0, &params).unwrap();
        for (a, b) in out.snapshots().iter().zip(free.snapshots()) {
            assert!(a.sub(b).coeff_norm() < 1e-13);
        }
    }

    #[test]
    fn duhamel_quadrature_is_second_order() {
        let g = Grid::new(32, TAU).unwrap();
        let rho0 = small_two_mode(&g, 0.5);
        let apply_at = |m: usize| {
            let params = MildParams {
                dt: 1.0 / m as f64,
                ..MildParams::for_final_time(1.0)
            };
            let free = free_evolution(&rho0, 1.0, params.dt, 1.0).unwrap();
            let out = duhamel_apply(&free, &rho0, &params).unwrap();
            out.snapshots().last().unwrap().clone()
        };
        let reference = apply_at(800);
        let e1 = apply_at(50).sub(&reference).l2_norm();
        let e2 = apply_at(100).sub(&reference).l2_norm();
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.3, "quadrature order {order:.2}");
    }

    #[test]
    fn bilinear_form_scales_in_each_argument() {
        let g = Grid::new(32, TAU).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let states: Vec<SpectralField> = (0..=20)
            .map(|_| random_mean_zero_field(&g, &mut rng, 6).scaled(0.1))
            .collect();
        let theta = Trajectory::from_uniform(0.0, 0.05, states).unwrap();
        let u = trajectory_velocities(&theta, DealiasMode::TwoThirds).unwrap();
        let base = bilinear_form(&u, &theta, 1.0, DealiasMode::TwoThirds).unwrap();
        let u_scaled: Vec<VectorField> = u.iter().map(|v| v.scaled(3.0)).collect();
        let theta_scaled = theta.map(|_, s| s.scaled(-2.0));
        let scaled = bilinear_form(&u_scaled, &theta_scaled, 1.0, DealiasMode::TwoThirds).unwrap();
        for (a, b) in scaled.snapshots().iter().zip(base.snapshots()) {
            assert!(a.sub(&b.scaled(-6.0)).coeff_norm() < 1e-13 * b.coeff_norm().max(1e-30));
        }
    }

    #[test]
    fn duhamel_rejects_mismatched_grids() {
        let g = Grid::new(32, TAU).unwrap();
        let other = Grid::new(16, TAU).unwrap();
        let params = MildParams::for_final_time(0.5);
        let zeros: Vec<SpectralField> = (0..=50).map(|_| SpectralField::zeros(&g)).collect();
        let prev = Trajectory::from_uniform(0.0, 0.01, zeros).unwrap();
        let rho0 = cos_x1(&other);
        assert!(matches!(
            duhamel_apply(&prev, &rho0, &params),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            duhamel_apply(&Trajectory::new(), &cos_x1(&g), &params),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn picard_on_zero_data_converges_immediately() {
        let g = Grid::new(16, TAU).unwrap();
        let params = MildParams::for_final_time(0.5);
        let result = iterate_to_fixed_point(&SpectralField::zeros(&g), 0.5, &params).unwrap();
        assert!(result.converged);
        assert!(result
            .trajectory
            .snapshots()
            .iter()
            .all(|s| s.coeff_norm() == 0.0));
    }

    #[test]
    fn picard_contracts_on_small_data_and_is_a_fixed_point() {
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams::for_final_time(1.0);
        let rho0 = small_two_mode(&g, 1e-3);
        let result = iterate_to_fixed_point(&rho0, 1.0, &params).unwrap();
        assert!(result.converged);
        assert!(
            result.contracted(),
            "factors: {:?}",
            result.contraction_factors
        );
        // substituting the fixed point reproduces it within tolerance
        let spec = DyadicSpec::for_grid(&g);
        let replay = duhamel_apply(&result.trajectory, &rho0, &params).unwrap();
        let delta = replay.map(|t, s| {
            let i = replay.times().iter().position(|&tt| tt == t).unwrap();
            s.sub(&result.trajectory.snapshots()[i])
        });
        let rel =
            ep_norm(&delta, 2.0, &spec).unwrap() / ep_norm(&result.trajectory, 2.0, &spec).unwrap();
        assert!(rel < 10.0 * params.tol, "fixed-point residual {rel}");
        // contraction factors roughly constant (geometric convergence)
        if result.contraction_factors.len() >= 2 {
            let r = &result.contraction_factors;
            for w in r.windows(2) {
                assert!((w[1] - w[0]).abs() < 0.5 * w[0].max(1e-12) + 1e-6);
            }
        }
    }

    #[test]
    fn picard_cross_validates_against_time_stepper() {
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams::for_final_time(0.5);
        let rho0 = small_two_mode(&g, 1e-3);
        let result = iterate_to_fixed_point(&rho0, 0.5, &params).unwrap();
        assert!(result.converged);
        let cfg = crate::config::parse_config(
            r#"{"n":32,"alpha":1.0,"T":0.5,"dt":5e-4,"snapshot_every":10,
                "ic":{"kind":"two_mode","amplitude":1e-3}}"#,
        )
        .unwrap();
        let run = crate::evolution::run(&cfg).unwrap();
        assert_eq!(run.times(), result.trajectory.times());
        let sup = run.sup_l2_distance(&result.trajectory).unwrap();
        let scale = run.snapshots()[0].l2_norm();
        assert!(sup < 1e-5 * scale, "sup_t L² gap {sup} vs scale {scale}");
    }

    #[test]
    fn large_data_reports_non_contraction() {
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams {
            max_iter: 12,
            ..MildParams::for_final_time(1.0)
        };
        let profile = small_two_mode(&g, 1.0);
        let scan = smallness_scan(&profile, &[1e-3, 10.0], 1.0, &params).unwrap();
        assert!(scan.rows[0].contracted, "small scale should contract");
        assert!(
            !scan.rows[1].contracted || !scan.rows[1].converged,
            "large scale should fail to contract"
        );
        // trivial scale: zero data is a fixed point at once
        let scan0 = smallness_scan(&profile, &[0.0], 1.0, &params).unwrap();
        assert!(scan0.rows[0].converged);
    }

    #[test]
    fn bilinear_probe_is_cubic_in_the_scale() {
        let g = Grid::new(32, TAU).unwrap();
        let params = MildParams {
            max_iter: 6,
            ..MildParams::for_final_time(1.0)
        };
        let profile = small_two_mode(&g, 1.0);
        let scales = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
        let scan = smallness_scan(&profile, &scales, 1.0, &params).unwrap();
        let slope = scan.cubic_exponent.expect("probes defined");
        assert!((slope - 3.0).abs() < 0.2, "cubic exponent {slope}");
    }

    #[test]
    fn gevrey_norm_on_free_single_mode() {
        let g = Grid::new(16, TAU).unwrap();
        let spec = DyadicSpec::for_grid(&g);
        // weight e^{at|k|₁}e^{−t|k|}: the |k| = |k|₁ = 1 mode carries
        // e^{(a−1)t}, so the E_p pieces have closed forms.
        let rho0 = cos_x1(&g);
        let m = 2000;
        let traj = free_evolution(&rho0, 1.0, 1.0 / m as f64, 1.0).unwrap();
        let a = 0.25;
        let value = gevrey_ep_norm(&traj, a, 2.0, &spec).unwrap();
        let l2 = (2.0 * PI * PI).sqrt();
        // sup part: 2^{0·1}·max_t e^{−(1−a)t} = 1; integral part:
        // 2^{0·2}·∫₀¹ e^{−(1−a)t} dt = (1 − e^{−(1−a)})/(1−a).
        let rate = 1.0 - a;
        let expect = l2 * (1.0 + (1.0 - (-rate).exp()) / rate);
        assert!(
            (value - expect).abs() < 1e-5,
            "got {value}, expected {expect}"
        );
        // nondecreasing in a on a fixed trajectory
        let lower = gevrey_ep_norm(&traj, 0.1, 2.0, &spec).unwrap();
        assert!(value >= lower);
        // zero trajectory → 0
        let zeros: Vec<SpectralField> = (0..=4).map(|_| SpectralField::zeros(&g)).collect();
        let ztraj = Trajectory::from_uniform(0.0, 0.25, zeros).unwrap();
        assert_eq!(gevrey_ep_norm(&ztraj, 0.25, 2.0, &spec).unwrap(), 0.0);
        assert!(gevrey_ep_norm(&traj, 0.3, 2.0, &spec).is_err());
    }

    #[test]
    fn analyticity_radius_recovers_synthetic_decay() {
        let g = Grid::new(64, TAU).unwrap();
        let mut f = SpectralField::zeros(&g);
        let n = g.n();
        for i1 in 0..n {
            for i2 in 0..n {
                let w = g.mode(i1).abs() + g.mode(i2).abs();
                if w == 0 {
                    continue;
                }
                f.coeffs_mut()[i1 * n + i2] = Complex64::new((-0.5 * w as f64).exp(), 0.0);
            }
        }
        let sigma = analyticity_radius(&f).unwrap();
        assert!((sigma - 0.5).abs() < 0.01, "σ = {sigma}");
        // degenerate: a single shell
        let single = cos_x1(&g);
        assert!(matches!(
            analyticity_radius(&single),
            Err(Error::Degenerate(_))
        ));
        // free heat evolution: radius nondecreasing in t
        let mut prev = 0.0;
        for t in [0.0, 0.25, 0.5, 1.0] {
            let damped = heat_semigroup(&f, t, 1.0).unwrap();
            let sigma = analyticity_radius(&damped).unwrap();
            assert!(sigma >= prev - 1e-9, "σ({t}) = {sigma} < {prev}");
            prev = sigma;
        }
    }
}
