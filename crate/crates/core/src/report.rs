//! Verdict report: one pass/fail/flag entry per configured diagnostic,
//! with the fitted parameters and tolerances that produced it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{self, default_fit_window, DiagnosticSeries, SeriesRow};
use crate::error::Result;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A hypothesis of the underlying estimate is not certified by this
    /// run (for example decay slopes on data outside the small regime):
    /// reported, not failed.
    Flag,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub name: String,
    pub status: Status,
    /// Fitted parameters and measured values (finite entries only; an
    /// absent key means the quantity was undefined for this run).
    pub observed: BTreeMap<String, f64>,
    /// Threshold the status was judged against; absent for checks whose
    /// criterion is finiteness or a sign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn insert_finite(map: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    if value.is_finite() {
        map.insert(key.into(), value);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub artifact_version: String,
    pub config_hash: String,
    pub entries: Vec<VerdictEntry>,
}

impl VerdictReport {
    pub fn failed(&self) -> bool {
        self.entries.iter().any(|e| e.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates the configured diagnostics on a finished trajectory.
pub fn build_verdict(cfg: &RunConfig, traj: &Trajectory) -> Result<VerdictReport> {
    let mut entries = Vec::new();
    for name in &cfg.diagnostics {
        let entry = match name.as_str() {
            "energy_budget" => energy_entry(cfg, traj),
            "lp_monotonicity" => lp_entry(traj),
            "linf_decay" => linf_entry(traj),
            "exp_decay" => exp_decay_entry(traj),
            "hs_growth" => hs_growth_entry(cfg, traj),
            other => unreachable!("validated diagnostic name {other}"),
        };
        entries.push(entry);
    }
    Ok(VerdictReport {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        entries,
    })
}

fn energy_entry(cfg: &RunConfig, traj: &Trajectory) -> VerdictEntry {
    let budget = diagnostics::energy_budget(traj, cfg.alpha, cfg.epsilon);
    let worst = budget.metadata["max_relative_residual"];
    // The residual of the trapezoid identity is pure quadrature
    // truncation, h²·D''/12 per interval; an identity violation shows
    // up at O(D) instead. Judge each interval against its own
    // truncation estimate (second differences of the dissipation) with
    // an 8× envelope plus a round-off floor.
    let times = traj.times();
    let snaps = traj.snapshots();
    let d: Vec<f64> = snaps
        .iter()
        .map(|s| diagnostics::dissipation(s, cfg.alpha, cfg.epsilon))
        .collect();
    let mut consistent = true;
    let mut worst_margin: f64 = 0.0;
    for i in 1..times.len() {
        let h = times[i] - times[i - 1];
        let e_now = 0.5 * snaps[i].l2_norm().powi(2);
        let e_prev = 0.5 * snaps[i - 1].l2_norm().powi(2);
        let residual = ((e_now - e_prev) / h + 0.5 * (d[i] + d[i - 1])).abs();
        let k = i.clamp(1, times.len().saturating_sub(2)).max(1);
        let second = if times.len() >= 3 {
            (d[k + 1] - 2.0 * d[k] + d[k - 1]).abs() / (h * h)
        } else {
            0.0
        };
        let scale = snaps[i - 1].l2_norm().powi(2) + snaps[i - 1].sobolev_norm(0.5).powi(2);
        let allowed = 8.0 * h * h / 12.0 * second + 1e-9 * scale;
        if residual > allowed {
            consistent = false;
        }
        if allowed > 0.0 {
            worst_margin = worst_margin.max(residual / allowed);
        }
    }
    let mut observed = BTreeMap::new();
    insert_finite(&mut observed, "max_relative_residual", worst);
    insert_finite(&mut observed, "worst_truncation_margin", worst_margin);
    VerdictEntry {
        name: "energy_budget".into(),
        status: if consistent {
            Status::Pass
        } else {
            Status::Fail
        },
        observed,
        tolerance: Some(1.0),
    }
}

fn lp_entry(traj: &Trajectory) -> VerdictEntry {
    let v4 = diagnostics::lp_monotonicity(traj, 4.0);
    let vinf = diagnostics::lp_monotonicity(traj, f64::INFINITY);
    let mut observed = BTreeMap::new();
    observed.insert("violations_p4".into(), v4.len() as f64);
    observed.insert("violations_pinf".into(), vinf.len() as f64);
    VerdictEntry {
        name: "lp_monotonicity".into(),
        status: if v4.is_empty() && vinf.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        observed,
        tolerance: Some(1e-9),
    }
}

fn linf_entry(traj: &Trajectory) -> VerdictEntry {
    let mut observed = BTreeMap::new();
    match diagnostics::linf_decay_fit(traj) {
        Ok(fit) => {
            let c = fit.parameters[0];
            insert_finite(&mut observed, "c", c);
            insert_finite(&mut observed, "residual", fit.residual);
            // The algebraic envelope presumes H^s control for some
            // s > 1; when the measured H^{3/2} norm grew over the run
            // that hypothesis is void, so a nonpositive c is flagged
            // rather than failed.
            let h32_grew = match (traj.snapshots().first(), traj.snapshots().last()) {
                (Some(a), Some(b)) => b.sobolev_norm(1.5) > a.sobolev_norm(1.5),
                _ => false,
            };
            let status = if c > 0.0 {
                Status::Pass
            } else if h32_grew {
                Status::Flag
            } else {
                Status::Fail
            };
            VerdictEntry {
                name: "linf_decay".into(),
                status,
                observed,
                tolerance: Some(0.0),
            }
        }
        Err(_) => VerdictEntry {
            name: "linf_decay".into(),
            status: Status::Flag,
            observed,
            tolerance: Some(0.0),
        },
    }
}

fn exp_decay_entry(traj: &Trajectory) -> VerdictEntry {
    let times = traj.times().to_vec();
    let window = default_fit_window(&times);
    let l2 = DiagnosticSeries::new(
        "l2",
        times.clone(),
        traj.snapshots().iter().map(|s| s.l2_norm()).collect(),
    );
    let h_half_sq = DiagnosticSeries::new(
        "h_half_sq",
        times,
        traj.snapshots()
            .iter()
            .map(|s| s.sobolev_norm(0.5).powi(2))
            .collect(),
    );
    let mut observed = BTreeMap::new();
    let mut slopes_ok = true;
    let mut defined = true;
    match diagnostics::exp_decay_rate(&l2, window) {
        Ok(fit) => {
            insert_finite(&mut observed, "l2_slope", fit.parameters[0]);
            slopes_ok &= fit.parameters[0] <= -1.0;
        }
        Err(_) => defined = false,
    }
    match diagnostics::exp_decay_rate(&h_half_sq, window) {
        Ok(fit) => {
            insert_finite(&mut observed, "h_half_sq_slope", fit.parameters[0]);
            slopes_ok &= fit.parameters[0] <= -1.0;
        }
        Err(_) => defined = false,
    }
    // The e^{−t} envelope is the small-data periodic statement; data
    // outside that regime flags rather than fails.
    let status = if !defined {
        Status::Flag
    } else if slopes_ok {
        Status::Pass
    } else {
        Status::Flag
    };
    VerdictEntry {
        name: "exp_decay".into(),
        status,
        observed,
        tolerance: Some(-1.0),
    }
}

fn hs_growth_entry(cfg: &RunConfig, traj: &Trajectory) -> VerdictEntry {
    let mut observed = BTreeMap::new();
    match diagnostics::hs_growth_check(traj, 2.0, cfg.alpha) {
        Ok(g) => {
            insert_finite(&mut observed, "c1", g.c1);
            insert_finite(
                &mut observed,
                "dissipation_integral",
                g.dissipation_integral,
            );
            VerdictEntry {
                name: "hs_growth".into(),
                status: if g.pass { Status::Pass } else { Status::Fail },
                observed,
                tolerance: None,
            }
        }
        Err(_) => VerdictEntry {
            name: "hs_growth".into(),
            status: Status::Flag,
            observed,
            tolerance: None,
        },
    }
}

/// Fixed-order CSV of the standard series table; floats print in
/// shortest round-trip form so identical runs yield identical bytes.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from("t,l2,lp4,linf,h_half,h1,h2,besov_b1_21,energy_residual,radius\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.l2,
            r.lp4,
            r.linf,
            r.h_half,
            r.h1,
            r.h2,
            r.besov_b1_21,
            r.energy_residual,
            r.radius
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small_run() -> (RunConfig, Trajectory) {
        let cfg = parse_config(
            r#"{"n":32,"alpha":1.0,"T":0.2,"dt":1e-3,"snapshot_every":1,
                "ic":{"kind":"two_mode","amplitude":0.2}}"#,
        )
        .unwrap();
        let traj = crate::evolution::run(&cfg).unwrap();
        (cfg, traj)
    }

    #[test]
    fn verdict_covers_each_configured_diagnostic_once() {
        let (cfg, traj) = small_run();
        let report = build_verdict(&cfg, &traj).unwrap();
        let names: Vec<&str> = report.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(
            names,
            cfg.diagnostics
                .iter()
                .map(String::as_str)
                .collect::<Vec<_>>()
        );
        assert!(!report.failed(), "{}", report.to_json());
        assert_eq!(report.config_hash, cfg.hash());
    }

    #[test]
    fn verdict_json_is_deterministic() {
        let (cfg, traj) = small_run();
        let a = build_verdict(&cfg, &traj).unwrap().to_json();
        let b = build_verdict(&cfg, &traj).unwrap().to_json();
        assert_eq!(a, b);
        let parsed: VerdictReport = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed.to_json(), a);
    }

    #[test]
    fn energy_entry_catches_identity_violations() {
        // Evaluate the ε = 0 run against a dissipation law it does not
        // satisfy: the residual jumps far above truncation size.
        let (cfg, traj) = small_run();
        let mut wrong = cfg.clone();
        wrong.alpha = 1.5;
        let entry = super::energy_entry(&wrong, &traj);
        assert_eq!(entry.status, Status::Fail, "{:?}", entry.observed);
        let honest = super::energy_entry(&cfg, &traj);
        assert_eq!(honest.status, Status::Pass, "{:?}", honest.observed);
    }

    #[test]
    fn csv_is_stable_and_has_fixed_columns() {
        let (cfg, traj) = small_run();
        let rows = crate::diagnostics::series_table(&traj, cfg.alpha, cfg.epsilon);
        let a = series_csv(&rows);
        let b = series_csv(&rows);
        assert_eq!(a, b);
        assert!(a.starts_with("t,l2,lp4,linf,h_half,h1,h2,besov_b1_21,energy_residual,radius\n"));
        assert_eq!(a.lines().count(), rows.len() + 1);
    }
}
