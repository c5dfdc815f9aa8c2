//! Dealiased pseudospectral time integration of
//! ∂t ρ + u·∇ρ + Λ^α ρ − εΔρ = 0 with u = −J_{ε₀} P(ρRρ).
//!
//! The stiff linear part is handled exactly through its semigroup:
//! integrating-factor RK4 by default, ETDRK4 (with contour-evaluated
//! φ-coefficients) as a cross-check. The transport term is computed in
//! divergence form −∇·(uρ), which conserves the mean mode identically.

use num_complex::Complex64;

use crate::config::{Integrator, RunConfig};
use crate::constitutive::{self, DealiasMode};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::trajectory::Trajectory;

/// Mollifier J_ε as the Gaussian Fourier multiplier e^{−ε|k|²}; it is
/// diagonal, hence commutes with the Leray projection.
pub fn mollify(f: &SpectralField, eps: f64) -> SpectralField {
    assert!(eps >= 0.0, "mollifier strength must be >= 0");
    if eps == 0.0 {
        return f.clone();
    }
    f.map_multiplier(|kx, ky| Complex64::new((-eps * (kx * kx + ky * ky)).exp(), 0.0))
}

/// Transport velocity for one state: u = J_{ε₀}(−P(ρRρ)).
pub fn transport_velocity(
    rho: &SpectralField,
    cfg: &RunConfig,
) -> Result<crate::field::VectorField> {
    let u = constitutive::velocity(rho, cfg.dealias)?;
    if cfg.ic_mollify > 0.0 {
        Ok(crate::field::VectorField::new(
            mollify(u.x(), cfg.ic_mollify),
            mollify(u.y(), cfg.ic_mollify),
        )?)
    } else {
        Ok(u)
    }
}

/// Nonlinear term N(ρ) = −∇·(uρ), each product dealiased per config.
fn nonlinear_term(rho: &SpectralField, cfg: &RunConfig) -> Result<SpectralField> {
    if cfg.linear_only {
        return Ok(SpectralField::zeros(rho.grid()));
    }
    let mut state = rho.clone();
    if cfg.dealias == DealiasMode::StrictPadded {
        constitutive::zero_nyquist_rows(&mut state);
    }
    let u = transport_velocity(&state, cfg)?;
    let fx = constitutive::product(u.x(), &state, cfg.dealias);
    let fy = constitutive::product(u.y(), &state, cfg.dealias);
    let flux = crate::field::VectorField::new(fx, fy)?;
    let mut out = crate::operators::divergence(&flux).scaled(-1.0);
    out.set_mean_zero();
    if !out.is_finite() {
        // instability signal: report the state that produced it
        return Err(Error::BlowUp {
            time: f64::NAN,
            l2: rho.l2_norm(),
            linf: rho.to_physical().linf_norm(),
        });
    }
    Ok(out)
}

/// Full right-hand side −∇·(uρ) − Λ^α ρ + εΔρ.
pub fn rhs(rho: &SpectralField, cfg: &RunConfig) -> Result<SpectralField> {
    rho.require_mean_zero()?;
    let alpha = cfg.alpha;
    let eps = cfg.epsilon;
    let mut out = rho.map_multiplier(|kx, ky| {
        let k2 = kx * kx + ky * ky;
        Complex64::new(-(k2.sqrt().powf(alpha) + eps * k2), 0.0)
    });
    out.add_scaled(&nonlinear_term(rho, cfg)?, 1.0);
    out.set_mean_zero();
    Ok(out)
}

/// CFL-limited step: safety·Δx/max(‖u‖_∞, 1e-12), capped at dt_max.
pub fn cfl_dt(rho: &SpectralField, cfg: &RunConfig) -> Result<f64> {
    let adaptive = cfg.adaptive.unwrap_or(crate::config::AdaptiveConfig {
        safety: 0.5,
        dt_max: 0.01,
    });
    let u = transport_velocity(rho, cfg)?;
    let speed = u
        .x()
        .to_physical()
        .linf_norm()
        .max(u.y().to_physical().linf_norm())
        .max(1e-12);
    Ok((adaptive.safety * rho.grid().dx() / speed).min(adaptive.dt_max))
}

/// Semigroup weights e^{−dt(|k|^α + ε|k|²)} at full and half step.
struct LinearFactors {
    full: Vec<f64>,
    half: Vec<f64>,
}

fn linear_symbol(grid: &Grid, alpha: f64, eps: f64) -> Vec<f64> {
    let n = grid.n();
    let mut sym = Vec::with_capacity(n * n);
    for i1 in 0..n {
        let kx = grid.wavenumber(i1);
        for i2 in 0..n {
            let ky = grid.wavenumber(i2);
            let k2 = kx * kx + ky * ky;
            sym.push(-(k2.sqrt().powf(alpha) + eps * k2));
        }
    }
    sym
}

fn linear_factors(symbol: &[f64], dt: f64) -> LinearFactors {
    LinearFactors {
        full: symbol.iter().map(|s| (dt * s).exp()).collect(),
        half: symbol.iter().map(|s| (0.5 * dt * s).exp()).collect(),
    }
}

fn apply_diag(f: &SpectralField, diag: &[f64]) -> SpectralField {
    let mut out = f.clone();
    for (c, d) in out.coeffs_mut().iter_mut().zip(diag) {
        *c *= *d;
    }
    out
}

/// ETDRK4 φ-coefficients h·φ(h·symbol), evaluated by the mean over a
/// unit contour around each (real, nonpositive) eigenvalue to avoid
/// cancellation near zero.
struct EtdCoefficients {
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

fn etd_coefficients(symbol: &[f64], dt: f64) -> EtdCoefficients {
    const M: usize = 32;
    let contour: Vec<Complex64> = (0..M)
        .map(|m| {
            let theta = std::f64::consts::PI * (m as f64 + 0.5) / M as f64;
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    let mut out = EtdCoefficients {
        e_full: Vec::with_capacity(symbol.len()),
        e_half: Vec::with_capacity(symbol.len()),
        q: Vec::with_capacity(symbol.len()),
        f1: Vec::with_capacity(symbol.len()),
        f2: Vec::with_capacity(symbol.len()),
        f3: Vec::with_capacity(symbol.len()),
    };
    for &s in symbol {
        let z0 = dt * s;
        out.e_full.push(z0.exp());
        out.e_half.push((0.5 * z0).exp());
        // Upper semicircle + conjugate symmetry: the mean over the full
        // circle of a real-coefficient function is the real part of the
        // upper-half mean.
        let mut q = Complex64::default();
        let mut f1 = Complex64::default();
        let mut f2 = Complex64::default();
        let mut f3 = Complex64::default();
        for r in &contour {
            let z = z0 + r;
            let ez = z.exp();
            let z3 = z * z * z;
            q += ((0.5 * z).exp() - 1.0) / z;
            f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
            f2 += (2.0 + z + ez * (-2.0 + z)) / z3;
            f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
        }
        let scale = dt / M as f64;
        out.q.push(q.re * scale);
        out.f1.push(f1.re * scale);
        out.f2.push(f2.re * scale);
        out.f3.push(f3.re * scale);
    }
    out
}

/// One-step integrator with cached per-dt linear factors.
pub struct Stepper {
    cfg: RunConfig,
    symbol: Vec<f64>,
    cached_dt: f64,
    ifrk4: Option<LinearFactors>,
    etdrk4: Option<EtdCoefficients>,
}

impl Stepper {
    pub fn new(cfg: &RunConfig) -> Stepper {
        let symbol = linear_symbol(&cfg.grid(), cfg.alpha, cfg.epsilon);
        Stepper {
            cfg: cfg.clone(),
            symbol,
            cached_dt: f64::NAN,
            ifrk4: None,
            etdrk4: None,
        }
    }

    fn prepare(&mut self, dt: f64) {
        if dt == self.cached_dt {
            return;
        }
        self.cached_dt = dt;
        match self.cfg.integrator {
            Integrator::Ifrk4 => {
                self.ifrk4 = Some(linear_factors(&self.symbol, dt));
                self.etdrk4 = None;
            }
            Integrator::Etdrk4 => {
                self.etdrk4 = Some(etd_coefficients(&self.symbol, dt));
                self.ifrk4 = None;
            }
        }
    }

    pub fn step(&mut self, rho: &SpectralField, dt: f64) -> Result<SpectralField> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {dt} must be > 0")));
        }
        self.prepare(dt);
        let mut next = match self.cfg.integrator {
            Integrator::Ifrk4 => self.step_ifrk4(rho, dt)?,
            Integrator::Etdrk4 => self.step_etdrk4(rho)?,
        };
        next.set_mean_zero();
        if !next.is_finite() {
            let l2 = rho.l2_norm();
            let linf = rho.to_physical().linf_norm();
            return Err(Error::BlowUp {
                time: f64::NAN,
                l2,
                linf,
            });
        }
        Ok(next)
    }

    fn step_ifrk4(&self, rho: &SpectralField, dt: f64) -> Result<SpectralField> {
        let lf = self.ifrk4.as_ref().expect("prepared");
        let cfg = &self.cfg;
        let k1 = nonlinear_term(rho, cfg)?;

        let mut stage = rho.clone();
        stage.add_scaled(&k1, 0.5 * dt);
        let k2 = nonlinear_term(&apply_diag(&stage, &lf.half), cfg)?;

        let mut stage = apply_diag(rho, &lf.half);
        stage.add_scaled(&k2, 0.5 * dt);
        let k3 = nonlinear_term(&stage, cfg)?;

        let mut stage = apply_diag(rho, &lf.full);
        stage.add_scaled(&apply_diag(&k3, &lf.half), dt);
        let k4 = nonlinear_term(&stage, cfg)?;

        let mut next = apply_diag(rho, &lf.full);
        next.add_scaled(&apply_diag(&k1, &lf.full), dt / 6.0);
        let mut mid = k2;
        mid.add_scaled(&k3, 1.0);
        next.add_scaled(&apply_diag(&mid, &lf.half), dt / 3.0);
        next.add_scaled(&k4, dt / 6.0);
        Ok(next)
    }

    fn step_etdrk4(&self, rho: &SpectralField) -> Result<SpectralField> {
        let c = self.etdrk4.as_ref().expect("prepared");
        let cfg = &self.cfg;
        let n_v = nonlinear_term(rho, cfg)?;

        let mut a = apply_diag(rho, &c.e_half);
        a.add_scaled(&apply_diag(&n_v, &c.q), 1.0);
        let n_a = nonlinear_term(&a, cfg)?;

        let mut b = apply_diag(rho, &c.e_half);
        b.add_scaled(&apply_diag(&n_a, &c.q), 1.0);
        let n_b = nonlinear_term(&b, cfg)?;

        let mut mid = n_b.scaled(2.0);
        mid.add_scaled(&n_v, -1.0);
        let mut cc = apply_diag(&a, &c.e_half);
        cc.add_scaled(&apply_diag(&mid, &c.q), 1.0);
        let n_c = nonlinear_term(&cc, cfg)?;

        let mut next = apply_diag(rho, &c.e_full);
        next.add_scaled(&apply_diag(&n_v, &c.f1), 1.0);
        let mut pair = n_a;
        pair.add_scaled(&n_b, 1.0);
        next.add_scaled(&apply_diag(&pair, &c.f2), 2.0);
        next.add_scaled(&apply_diag(&n_c, &c.f3), 1.0);
        Ok(next)
    }
}

/// Single step with a fresh stepper (convenience for tests and the
/// dt-refinement studies; `run` keeps a persistent stepper).
pub fn step(rho: &SpectralField, dt: f64, cfg: &RunConfig) -> Result<SpectralField> {
    Stepper::new(cfg).step(rho, dt)
}

/// Integrates the configured problem to T, recording snapshots every
/// `snapshot_every` steps (plus the initial and final states).
pub fn run(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
    let rho0 = cfg.initial_data()?;
    run_from(cfg, rho0)
}

/// Same as `run` but starting from explicitly provided initial data.
pub fn run_from(cfg: &RunConfig, rho0: SpectralField) -> Result<Trajectory> {
    let mut stepper = Stepper::new(cfg);
    let mut traj = Trajectory::new();
    let mut rho = rho0;
    rho.set_mean_zero();
    traj.push(0.0, rho.clone())?;
    let t_final = cfg.t_final;
    let mut step_index: u64 = 0;
    let mut t = 0.0;
    loop {
        if t >= t_final - 1e-12 * t_final {
            break;
        }
        let dt_nominal = match cfg.dt {
            Some(dt) => dt,
            None => cfl_dt(&rho, cfg)?,
        };
        let dt = dt_nominal.min(t_final - t);
        rho = stepper.step(&rho, dt).map_err(|e| match e {
            Error::BlowUp { l2, linf, .. } => Error::BlowUp { time: t, l2, linf },
            other => other,
        })?;
        step_index += 1;
        t = match cfg.dt {
            // whole steps accumulate multiplicatively to avoid drift;
            // a truncated final step just lands on T
            Some(dt_fixed) if dt == dt_fixed => dt_fixed * step_index as f64,
            _ => t + dt,
        };
        if step_index % cfg.snapshot_every as u64 == 0 || t >= t_final - 1e-12 * t_final {
            traj.push(t.min(t_final), rho.clone())?;
        }
    }
    Ok(traj)
}
