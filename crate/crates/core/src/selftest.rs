//! Built-in check suite behind the `selftest` subcommand: the named
//! closed-form examples of every kernel plus the multiplier and
//! paraproduct invariants, at small grid sizes.

use num_complex::Complex64;

use crate::constitutive::{self, DealiasMode};
use crate::field::{PhysicalField, SpectralField, VectorField};
use crate::grid::Grid;
use crate::littlewood_paley::{besov_norm, dyadic_block, low_pass, paraproduct_split, DyadicSpec};
use crate::operators;

pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(
    name: &'static str,
    run: impl FnOnce() -> std::result::Result<(), String>,
) -> CheckOutcome {
    match run() {
        Ok(()) => CheckOutcome {
            name,
            passed: true,
            detail: String::new(),
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn expect(cond: bool, detail: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn grid() -> Grid {
    Grid::with_default_box(32).expect("grid")
}

fn cos_x1(g: &Grid) -> SpectralField {
    SpectralField::from_modes(g, &[(1, 0, Complex64::new(0.5, 0.0))])
}

/// Runs every check; the CLI prints one line per outcome and exits
/// nonzero if any failed.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    out.push(check("grid_rejects_bad_parameters", || {
        expect(
            Grid::new(7, std::f64::consts::TAU).is_err(),
            "odd n accepted",
        )?;
        expect(Grid::new(8, -1.0).is_err(), "negative box accepted")
    }));

    out.push(check("transform_single_mode_coefficients", || {
        let g = grid();
        let f = PhysicalField::from_fn(&g, |x, _| x.cos()).to_spectral();
        expect(
            (f.coeff(1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-13
                && (f.coeff(-1, 0) - Complex64::new(0.5, 0.0)).norm() < 1e-13,
            format!("coeff(±1,0) = {:?}", f.coeff(1, 0)),
        )
    }));

    out.push(check("transform_round_trip", || {
        let g = grid();
        let f = PhysicalField::from_fn(&g, |x, y| (2.0 * x).cos() + 0.3 * (x + y).sin());
        let back = f.to_spectral().to_physical();
        let err = f
            .values()
            .iter()
            .zip(back.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        expect(err < 1e-12, format!("round-trip error {err}"))
    }));

    out.push(check("fractional_laplacian_factors", || {
        let g = grid();
        let f = SpectralField::from_modes(&g, &[(3, 4, Complex64::new(0.5, 0.0))]);
        let lam = operators::fractional_laplacian(&f, 1.0).map_err(|e| e.to_string())?;
        expect(
            (lam.coeff(3, 4) - 5.0 * f.coeff(3, 4)).norm() < 1e-13,
            "|(3,4)| should scale by 5",
        )
    }));

    out.push(check("inverse_lambda_and_mean_guard", || {
        let g = grid();
        let f = SpectralField::from_modes(&g, &[(2, 0, Complex64::new(0.5, 0.0))]);
        let inv = operators::inverse_lambda(&f).map_err(|e| e.to_string())?;
        expect(
            (inv.coeff(2, 0) - 0.5 * f.coeff(2, 0)).norm() < 1e-14,
            "factor 1/2",
        )?;
        let mut bad = f;
        bad.set_coeff(0, 0, Complex64::new(1.0, 0.0));
        expect(
            operators::inverse_lambda(&bad).is_err(),
            "nonzero mean accepted",
        )
    }));

    out.push(check("riesz_of_cos_is_minus_sin", || {
        let g = grid();
        let r = operators::riesz_transform(&cos_x1(&g)).map_err(|e| e.to_string())?;
        let target = PhysicalField::from_fn(&g, |x, _| -x.sin());
        let err = r
            .x()
            .to_physical()
            .values()
            .iter()
            .zip(target.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        expect(
            err < 1e-12 && r.y().coeff_norm() < 1e-14,
            format!("component error {err}"),
        )
    }));

    out.push(check("leray_annihilates_gradients", || {
        let g = grid();
        let psi = SpectralField::from_modes(&g, &[(2, 0, Complex64::new(0.5, 0.0))]);
        let grad = operators::gradient(&psi);
        let p = operators::leray_project(&grad);
        expect(
            p.coeff_norm() < 1e-13,
            format!("residual {}", p.coeff_norm()),
        )
    }));

    out.push(check("leray_idempotent_and_divergence_free", || {
        let g = grid();
        let v = VectorField::new(
            SpectralField::from_modes(&g, &[(1, 2, Complex64::new(0.2, 0.1))]),
            SpectralField::from_modes(&g, &[(3, -1, Complex64::new(-0.3, 0.2))]),
        )
        .map_err(|e| e.to_string())?;
        let p = operators::leray_project(&v);
        let pp = operators::leray_project(&p);
        expect(
            pp.sub(&p).coeff_norm() < 1e-13 * p.coeff_norm().max(1e-30)
                && p.max_divergence() < 1e-12 * v.coeff_norm(),
            "projection not idempotent/solenoidal",
        )
    }));

    out.push(check("heat_semigroup_compose", || {
        let g = grid();
        let f = SpectralField::from_modes(&g, &[(2, 0, Complex64::new(0.5, 0.0))]);
        let once = operators::heat_semigroup(&f, 0.5, 1.0).map_err(|e| e.to_string())?;
        expect(
            (once.coeff(2, 0) - (-1.0f64).exp() * f.coeff(2, 0)).norm() < 1e-14,
            "e^{-1} factor",
        )?;
        let a = operators::heat_semigroup(&once, 0.25, 1.0).map_err(|e| e.to_string())?;
        let b = operators::heat_semigroup(&f, 0.75, 1.0).map_err(|e| e.to_string())?;
        expect(a.sub(&b).coeff_norm() < 1e-14, "semigroup property")
    }));

    out.push(check("gevrey_weight_inverts", || {
        let g = grid();
        let f = SpectralField::from_modes(&g, &[(1, -2, Complex64::new(0.3, 0.1))]);
        let w = operators::gevrey_weight(&f, 0.1).map_err(|e| e.to_string())?;
        expect(
            (w.coeff(1, -2) - (0.3f64).exp() * f.coeff(1, -2)).norm() < 1e-14,
            "e^{0.3} factor",
        )?;
        let back = operators::gevrey_weight(&w, -0.1).map_err(|e| e.to_string())?;
        expect(
            back.sub(&f).coeff_norm() < 1e-12 * f.coeff_norm(),
            "inverse weight",
        )
    }));

    out.push(check("constitutive_chain_on_cos", || {
        let g = grid();
        let rho = cos_x1(&g);
        let phi = constitutive::potential(&rho).map_err(|e| e.to_string())?;
        expect(phi.sub(&rho).coeff_norm() < 1e-14, "Φ = Λ⁻¹cos = cos")?;
        let e = constitutive::electric_field(&rho).map_err(|e| e.to_string())?;
        let target = PhysicalField::from_fn(&g, |x, _| x.sin());
        let err = e
            .x()
            .to_physical()
            .values()
            .iter()
            .zip(target.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        expect(err < 1e-12, "E = (sin x₁, 0)")?;
        let u = constitutive::velocity(&rho, DealiasMode::TwoThirds).map_err(|e| e.to_string())?;
        expect(u.coeff_norm() < 1e-13, "u vanishes on a single mode")?;
        let p = constitutive::pressure(&rho, DealiasMode::TwoThirds).map_err(|e| e.to_string())?;
        let target = SpectralField::from_modes(&g, &[(2, 0, Complex64::new(-0.125, 0.0))]);
        expect(p.sub(&target).coeff_norm() < 1e-13, "p = −¼cos 2x₁")
    }));

    out.push(check("darcy_balance", || {
        let g = grid();
        let rho = SpectralField::from_modes(
            &g,
            &[
                (1, 0, Complex64::new(0.25, 0.0)),
                (1, 1, Complex64::new(0.25, 0.0)),
            ],
        );
        let f = constitutive::force(&rho, DealiasMode::TwoThirds).map_err(|e| e.to_string())?;
        let u = constitutive::velocity(&rho, DealiasMode::TwoThirds).map_err(|e| e.to_string())?;
        let gp = operators::gradient(
            &constitutive::pressure(&rho, DealiasMode::TwoThirds).map_err(|e| e.to_string())?,
        );
        let mut resid = u.sub(&f);
        resid.x_mut().add_scaled(gp.x(), 1.0);
        resid.y_mut().add_scaled(gp.y(), 1.0);
        expect(
            resid.coeff_norm() < 1e-12 * f.coeff_norm(),
            format!("balance residual {}", resid.coeff_norm()),
        )
    }));

    out.push(check("dyadic_partition_of_unity", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let n = g.n();
        for i1 in 0..n {
            for i2 in 0..n {
                let k = (g.wavenumber(i1).powi(2) + g.wavenumber(i2).powi(2)).sqrt();
                if k == 0.0 {
                    continue;
                }
                let mut sum = 0.0;
                for j in spec.shells() {
                    sum += crate::littlewood_paley::shell_profile((-j as f64).exp2() * k);
                }
                expect(
                    close(sum, 1.0, 1e-12),
                    format!("partition sum {sum} at |k| = {k}"),
                )?;
            }
        }
        Ok(())
    }));

    out.push(check("dyadic_block_reconstruction", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let f = SpectralField::from_modes(
            &g,
            &[
                (1, 0, Complex64::new(0.5, 0.0)),
                (5, 2, Complex64::new(0.2, -0.1)),
            ],
        );
        let mut sum = SpectralField::zeros(&g);
        for j in spec.shells() {
            sum.add_scaled(&dyadic_block(&f, j, &spec).map_err(|e| e.to_string())?, 1.0);
        }
        expect(
            sum.sub(&f).coeff_norm() < 1e-12 * f.coeff_norm(),
            "blocks do not reconstruct",
        )
    }));

    out.push(check("low_pass_on_cos", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        let s2 = low_pass(&f, 2, &spec).map_err(|e| e.to_string())?;
        let s0 = low_pass(&f, 0, &spec).map_err(|e| e.to_string())?;
        expect(
            s2.sub(&f).coeff_norm() < 1e-14 && s0.coeff_norm() < 1e-14,
            "S₂cos = cos and S₀cos = 0",
        )
    }));

    out.push(check("besov_single_shell_norm", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        let expected = (2.0 * std::f64::consts::PI.powi(2)).sqrt();
        for s in [-1.0, 0.0, 2.0] {
            let v = besov_norm(&f, s, 2.0, 2.0, &spec);
            expect(close(v, expected, 1e-12), format!("Ḃ^{s}_{{2,2}} = {v}"))?;
        }
        Ok(())
    }));

    out.push(check("paraproduct_identity_cos_squared", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let f = cos_x1(&g);
        let product = constitutive::product(&f, &f, DealiasMode::StrictPadded);
        let (s1, s2) = paraproduct_split(&f, &f, 1, &spec).map_err(|e| e.to_string())?;
        let mut sum = s1;
        sum.add_scaled(&s2, 1.0);
        let direct = dyadic_block(&product, 1, &spec).map_err(|e| e.to_string())?;
        expect(
            sum.sub(&direct).coeff_norm() < 1e-12 * product.coeff_norm().max(1e-30),
            "Bony split does not reproduce Δ₁(f²)",
        )
    }));

    out.push(check("paraproduct_vanishing_terms", || {
        let g = grid();
        let spec = DyadicSpec::for_grid(&g);
        let f = SpectralField::from_modes(&g, &[(5, 1, Complex64::new(0.4, 0.2))]);
        let h = SpectralField::from_modes(&g, &[(6, -2, Complex64::new(-0.3, 0.1))]);
        let j = 5;
        let k = j - 2;
        let term = constitutive::product(
            &low_pass(&h, k, &spec).map_err(|e| e.to_string())?,
            &dyadic_block(&f, k, &spec).map_err(|e| e.to_string())?,
            DealiasMode::StrictPadded,
        );
        let projected = dyadic_block(&term, j, &spec).map_err(|e| e.to_string())?;
        expect(
            projected.coeff_norm() < 1e-12,
            "Δ_j(S_k g Δ_k f) with k = j−2 must vanish",
        )
    }));

    out.push(check("single_mode_exact_decay_step", || {
        let cfg = crate::config::parse_config(
            r#"{"n":32,"alpha":1.0,"T":1.0,"dt":1e-3,"ic":{"kind":"single_mode"}}"#,
        )
        .map_err(|e| e.to_string())?;
        let g = cfg.grid();
        let f = cos_x1(&g);
        let next = crate::evolution::step(&f, 1e-3, &cfg).map_err(|e| e.to_string())?;
        let expect_field = f.scaled((-1e-3f64).exp());
        expect(
            next.sub(&expect_field).coeff_norm() < 1e-14,
            "integrating factor not exact",
        )
    }));

    out.push(check("duhamel_zero_input_is_free_evolution", || {
        let g = grid();
        let params = crate::mild::MildParams::for_final_time(0.5);
        let zeros: Vec<SpectralField> = (0..=50).map(|_| SpectralField::zeros(&g)).collect();
        let prev = crate::trajectory::Trajectory::from_uniform(0.0, 0.01, zeros)
            .map_err(|e| e.to_string())?;
        let rho0 = cos_x1(&g);
        let out_traj =
            crate::mild::duhamel_apply(&prev, &rho0, &params).map_err(|e| e.to_string())?;
        let free = crate::mild::free_evolution(&rho0, 0.5, 0.01, 1.0).map_err(|e| e.to_string())?;
        for (a, b) in out_traj.snapshots().iter().zip(free.snapshots()) {
            expect(a.sub(b).coeff_norm() < 1e-14, "B(0,0) should vanish")?;
        }
        Ok(())
    }));

    out.push(check("cordoba_positivity_on_cos", || {
        let g = grid();
        let c =
            crate::diagnostics::cordoba_positivity(&cos_x1(&g), 2.0).map_err(|e| e.to_string())?;
        expect(
            c.pass && close(c.integral, 2.0 * std::f64::consts::PI.powi(2), 1e-10),
            format!("∫fΛf = {}", c.integral),
        )
    }));

    out.push(check("exp_decay_fit_recovers_synthetic_rate", || {
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| (-2.0 * t).exp()).collect();
        let series = crate::diagnostics::DiagnosticSeries::new("syn", times, values);
        let fit =
            crate::diagnostics::exp_decay_rate(&series, (0.0, 5.0)).map_err(|e| e.to_string())?;
        expect(
            close(fit.parameters[0], -2.0, 1e-6),
            format!("λ = {}", fit.parameters[0]),
        )
    }));

    out.push(check("kernel_inequality_alpha_zero_closed_form", || {
        let entries = crate::diagnostics::kernel_bound_sweep(&[0, 3], &[1.0, 10.0], 0.0, 1.0)
            .map_err(|e| e.to_string())?;
        for e in entries {
            let expected = 1.0 - (-e.t * (e.j as f64).exp2()).exp();
            expect(
                close(e.ratio, expected, 1e-4),
                format!("ratio({}, {}) = {}", e.j, e.t, e.ratio),
            )?;
        }
        Ok(())
    }));

    out.push(check("snapshot_format_round_trip", || {
        let dir = std::env::temp_dir().join(format!("ecsim_selftest_{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let path = dir.join("probe.pecf");
        let g = grid();
        let f = SpectralField::from_modes(&g, &[(2, 3, Complex64::new(0.1, -0.7))]);
        let header = crate::io::SnapshotHeader {
            t: 0.5,
            alpha: 1.0,
            epsilon: 0.0,
        };
        crate::io::write_snapshot(&path, &header, &f).map_err(|e| e.to_string())?;
        let (h2, f2) = crate::io::read_snapshot(&path).map_err(|e| e.to_string())?;
        let _ = std::fs::remove_dir_all(&dir);
        expect(
            h2 == header && f2.coeffs() == f.coeffs(),
            "snapshot round trip differs",
        )
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_selftest_checks_pass() {
        for outcome in super::run_all() {
            assert!(outcome.passed, "{}: {}", outcome.name, outcome.detail);
        }
    }
}
