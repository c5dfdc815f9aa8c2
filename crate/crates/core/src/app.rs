//! Command layer shared by the CLI and the C bindings: run, picard,
//! sweep, analyze, selftest, plus the on-disk run-directory layout.
//!
//! Layout of one run directory:
//!   config.json     resolved configuration (canonical form)
//!   series.csv      diagnostic table, one row per snapshot
//!   verdict.json    pass/fail/flag report
//!   snapshots/      snap_NNNNNN.pecf binary spectral states

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::{InitialCondition, PicardConfig, RunConfig};
use crate::constitutive::DealiasMode;
use crate::diagnostics::series_table;
use crate::error::{Error, Result};
use crate::evolution;
use crate::io::{read_snapshot, write_snapshot, SnapshotHeader};
use crate::mild::{self, MildParams};
use crate::report::{build_verdict, series_csv, VerdictReport};
use crate::trajectory::Trajectory;

pub fn write_run_outputs(
    dir: &Path,
    cfg: &RunConfig,
    traj: &Trajectory,
    report: &VerdictReport,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), pretty_config(cfg))?;
    let rows = series_table(traj, cfg.alpha, cfg.epsilon);
    fs::write(dir.join("series.csv"), series_csv(&rows))?;
    fs::write(dir.join("verdict.json"), report.to_json())?;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    for (i, (t, s)) in traj.iter().enumerate() {
        let header = SnapshotHeader {
            t,
            alpha: cfg.alpha,
            epsilon: cfg.epsilon,
        };
        write_snapshot(&snap_dir.join(format!("snap_{i:06}.pecf")), &header, s)?;
    }
    Ok(())
}

fn pretty_config(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// Full run: integrate, diagnose, write artifacts.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> Result<VerdictReport> {
    cfg.validate()?;
    let traj = evolution::run(cfg)?;
    let report = build_verdict(cfg, &traj)?;
    write_run_outputs(out_dir, cfg, &traj, &report)?;
    Ok(report)
}

/// Rebuilds the trajectory stored in a run directory.
pub fn load_run_dir(dir: &Path) -> Result<(RunConfig, Trajectory)> {
    let cfg_text = fs::read_to_string(dir.join("config.json"))
        .map_err(|e| Error::Config(format!("{}: {e}", dir.join("config.json").display())))?;
    let cfg = crate::config::parse_config(&cfg_text)?;
    let snap_dir = dir.join("snapshots");
    let mut names: Vec<PathBuf> = fs::read_dir(&snap_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "pecf").unwrap_or(false))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::SnapshotFormat(format!(
            "{}: no snapshots",
            snap_dir.display()
        )));
    }
    let mut traj = Trajectory::new();
    for path in names {
        let (header, field) = read_snapshot(&path)?;
        traj.push(header.t, field)?;
    }
    Ok((cfg, traj))
}

/// Outcome of re-analyzing one stored run.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeOutcome {
    pub dir: PathBuf,
    /// recomputed verdict and series match the stored bytes
    pub reproduced: bool,
}

/// Recomputes diagnostics from stored snapshots, writes them under
/// `<dir>/analyze/`, and compares against the original artifacts.
pub fn cmd_analyze(dirs: &[PathBuf]) -> Result<Vec<AnalyzeOutcome>> {
    let mut outcomes = Vec::new();
    for dir in dirs {
        let (cfg, traj) = load_run_dir(dir)?;
        let report = build_verdict(&cfg, &traj)?;
        let rows = series_table(&traj, cfg.alpha, cfg.epsilon);
        let csv = series_csv(&rows);
        let analyze_dir = dir.join("analyze");
        fs::create_dir_all(&analyze_dir)?;
        fs::write(analyze_dir.join("verdict.json"), report.to_json())?;
        fs::write(analyze_dir.join("series.csv"), &csv)?;
        let verdict_same = fs::read(dir.join("verdict.json"))
            .map(|orig| orig == report.to_json().as_bytes())
            .unwrap_or(false);
        let series_same = fs::read(dir.join("series.csv"))
            .map(|orig| orig == csv.as_bytes())
            .unwrap_or(false);
        outcomes.push(AnalyzeOutcome {
            dir: dir.clone(),
            reproduced: verdict_same && series_same,
        });
    }
    Ok(outcomes)
}

/// Serialized picard command output.
#[derive(Debug, Clone, Serialize)]
pub struct PicardSummary {
    pub artifact_version: String,
    pub config_hash: String,
    pub p: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub dt: f64,
    pub converged: bool,
    pub contracted: bool,
    pub ep_norms: Vec<f64>,
    pub difference_norms: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub scan: Vec<ScanRowSummary>,
    pub cubic_exponent: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRowSummary {
    pub scale: f64,
    pub contracted: bool,
    pub converged: bool,
    pub ep_norm: f64,
    pub max_contraction_factor: f64,
    pub probe_ep: f64,
    pub probe_bilinear_ep: f64,
}

/// Picard solve at the configured amplitude plus the optional smallness
/// scan; writes picard.json and contraction.csv.
pub fn cmd_picard(cfg: &RunConfig, out_dir: &Path) -> Result<PicardSummary> {
    cfg.validate()?;
    let picard_cfg = cfg.picard.clone().unwrap_or(PicardConfig {
        p: 2.0,
        tol: 1e-8,
        max_iter: 40,
        dt: None,
        scales: Vec::new(),
    });
    let params = MildParams {
        p: picard_cfg.p,
        alpha: cfg.alpha,
        dt: picard_cfg.dt.unwrap_or(0.01 * cfg.t_final),
        tol: picard_cfg.tol,
        max_iter: picard_cfg.max_iter,
        dealias: cfg.dealias,
    };
    let rho0 = cfg.initial_data()?;
    let solve = mild::iterate_to_fixed_point(&rho0, cfg.t_final, &params)?;
    let scan = if picard_cfg.scales.is_empty() {
        mild::SmallnessScan {
            rows: Vec::new(),
            cubic_exponent: None,
        }
    } else {
        mild::smallness_scan(&rho0, &picard_cfg.scales, cfg.t_final, &params)?
    };
    let summary = PicardSummary {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        p: params.p,
        tol: params.tol,
        max_iter: params.max_iter,
        dt: params.dt,
        converged: solve.converged,
        contracted: solve.contracted(),
        ep_norms: solve.ep_norms.clone(),
        difference_norms: solve.difference_norms.clone(),
        contraction_factors: solve.contraction_factors.clone(),
        scan: scan
            .rows
            .iter()
            .map(|r| ScanRowSummary {
                scale: r.scale,
                contracted: r.contracted,
                converged: r.converged,
                ep_norm: r.ep_norm,
                max_contraction_factor: r.max_contraction_factor,
                probe_ep: r.probe_ep,
                probe_bilinear_ep: r.probe_bilinear_ep,
            })
            .collect(),
        cubic_exponent: scan.cubic_exponent,
    };
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join("picard.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    let mut csv = String::from("iteration,ep_norm,difference_norm,contraction_factor\n");
    for i in 0..summary.ep_norms.len() {
        let factor = if i >= 1 && i - 1 < summary.contraction_factors.len() {
            format!("{}", summary.contraction_factors[i - 1])
        } else {
            String::from("NaN")
        };
        csv.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            summary.ep_norms[i],
            summary.difference_norms[i],
            factor
        ));
    }
    fs::write(out_dir.join("contraction.csv"), csv)?;
    Ok(summary)
}

/// Parameter grid description for the sweep command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    #[serde(default)]
    pub scale: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub seed: Vec<u64>,
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: SweepConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
    cfg.base.validate()?;
    Ok(cfg)
}

fn scaled_ic(ic: &InitialCondition, scale: f64) -> Result<InitialCondition> {
    Ok(match ic {
        InitialCondition::SingleMode { amplitude } => InitialCondition::SingleMode {
            amplitude: amplitude * scale,
        },
        InitialCondition::TwoMode { amplitude } => InitialCondition::TwoMode {
            amplitude: amplitude * scale,
        },
        InitialCondition::Random {
            amplitude,
            band,
            decay,
        } => InitialCondition::Random {
            amplitude: amplitude * scale,
            band: *band,
            decay: *decay,
        },
        InitialCondition::File { .. } => {
            return Err(Error::Config(
                "scale sweeps need an analytic ic profile".into(),
            ))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub dir: String,
    pub n: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub scale: f64,
    pub seed: u64,
    /// completed | blowup | error
    pub status: String,
    pub final_l2: f64,
    pub final_linf: f64,
    pub verdict_failures: usize,
}

/// Expands the grid, runs every combination in its own directory
/// (concurrently up to `workers`), and writes the combined table.
pub fn cmd_sweep(sweep: &SweepConfig, out_dir: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    let one = |v: &Vec<f64>, base: f64| if v.is_empty() { vec![base] } else { v.clone() };
    let scales = if sweep.scale.is_empty() {
        vec![1.0]
    } else {
        sweep.scale.clone()
    };
    let alphas = one(&sweep.alpha, sweep.base.alpha);
    let epsilons = one(&sweep.epsilon, sweep.base.epsilon);
    let ns = if sweep.n.is_empty() {
        vec![sweep.base.n]
    } else {
        sweep.n.clone()
    };
    let seeds = if sweep.seed.is_empty() {
        vec![sweep.base.seed]
    } else {
        sweep.seed.clone()
    };

    let mut jobs = Vec::new();
    for &n in &ns {
        for &alpha in &alphas {
            for &epsilon in &epsilons {
                for &scale in &scales {
                    for &seed in &seeds {
                        let mut cfg = sweep.base.clone();
                        cfg.n = n;
                        cfg.alpha = alpha;
                        cfg.epsilon = epsilon;
                        cfg.seed = seed;
                        cfg.ic = scaled_ic(&cfg.ic, scale)?;
                        cfg.validate()?;
                        jobs.push((cfg, n, alpha, epsilon, scale, seed));
                    }
                }
            }
        }
    }
    fs::create_dir_all(out_dir)?;
    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; jobs.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = workers.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= jobs.len() {
                    break;
                }
                let (cfg, n, alpha, epsilon, scale, seed) = &jobs[i];
                let dir_name = format!("run_{i:03}");
                let dir = out_dir.join(&dir_name);
                let row = match run_one_sweep_job(cfg, &dir) {
                    Ok((l2, linf, failures)) => SweepRow {
                        index: i,
                        dir: dir_name,
                        n: *n,
                        alpha: *alpha,
                        epsilon: *epsilon,
                        scale: *scale,
                        seed: *seed,
                        status: "completed".into(),
                        final_l2: l2,
                        final_linf: linf,
                        verdict_failures: failures,
                    },
                    Err(Error::BlowUp { .. }) => SweepRow {
                        index: i,
                        dir: dir_name,
                        n: *n,
                        alpha: *alpha,
                        epsilon: *epsilon,
                        scale: *scale,
                        seed: *seed,
                        status: "blowup".into(),
                        final_l2: f64::NAN,
                        final_linf: f64::NAN,
                        verdict_failures: 0,
                    },
                    Err(_) => SweepRow {
                        index: i,
                        dir: dir_name,
                        n: *n,
                        alpha: *alpha,
                        epsilon: *epsilon,
                        scale: *scale,
                        seed: *seed,
                        status: "error".into(),
                        final_l2: f64::NAN,
                        final_linf: f64::NAN,
                        verdict_failures: 0,
                    },
                };
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("job ran"))
        .collect();
    let mut csv = String::from(
        "index,dir,n,alpha,epsilon,scale,seed,status,final_l2,final_linf,verdict_failures\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.index,
            r.dir,
            r.n,
            r.alpha,
            r.epsilon,
            r.scale,
            r.seed,
            r.status,
            r.final_l2,
            r.final_linf,
            r.verdict_failures
        ));
    }
    fs::write(out_dir.join("summary.csv"), csv)?;
    Ok(rows)
}

fn run_one_sweep_job(cfg: &RunConfig, dir: &Path) -> Result<(f64, f64, usize)> {
    let traj = evolution::run(cfg)?;
    let report = build_verdict(cfg, &traj)?;
    write_run_outputs(dir, cfg, &traj, &report)?;
    let last = traj.snapshots().last().expect("non-empty run");
    let failures = report
        .entries
        .iter()
        .filter(|e| e.status == crate::report::Status::Fail)
        .count();
    Ok((last.l2_norm(), last.to_physical().linf_norm(), failures))
}

/// Override hooks the CLI flags map onto.
pub fn apply_overrides(cfg: &mut RunConfig, seed: Option<u64>, strict_dealias: bool) {
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if strict_dealias {
        cfg.dealias = DealiasMode::StrictPadded;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn quick_cfg() -> RunConfig {
        parse_config(
            r#"{"n":32,"alpha":1.0,"T":0.05,"dt":1e-3,"snapshot_every":10,
                "ic":{"kind":"two_mode","amplitude":0.2}}"#,
        )
        .unwrap()
    }

    #[test]
    fn run_writes_all_artifacts_and_analyze_reproduces_them() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        let report = cmd_run(&cfg, dir.path()).unwrap();
        assert!(!report.failed());
        for name in ["config.json", "series.csv", "verdict.json"] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
        assert!(dir.path().join("snapshots/snap_000000.pecf").exists());
        let outcomes = cmd_analyze(&[dir.path().to_path_buf()]).unwrap();
        assert!(
            outcomes[0].reproduced,
            "analyze should reproduce the verdict bit-exactly"
        );
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = quick_cfg();
        cmd_run(&cfg, a.path()).unwrap();
        cmd_run(&cfg, b.path()).unwrap();
        for name in ["config.json", "series.csv", "verdict.json"] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name} differs between identical runs"
            );
        }
        let snap = "snapshots/snap_000001.pecf";
        assert_eq!(
            fs::read(a.path().join(snap)).unwrap(),
            fs::read(b.path().join(snap)).unwrap()
        );
    }

    #[test]
    fn picard_command_writes_contraction_table() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(
            r#"{"n":32,"alpha":1.0,"T":0.5,"dt":1e-3,
                "ic":{"kind":"two_mode","amplitude":1e-3},
                "picard":{"scales":[0.1,1.0]}}"#,
        )
        .unwrap();
        let summary = cmd_picard(&cfg, dir.path()).unwrap();
        assert!(summary.converged);
        assert!(summary.contracted);
        assert_eq!(summary.scan.len(), 2);
        assert!(dir.path().join("picard.json").exists());
        let csv = fs::read_to_string(dir.path().join("contraction.csv")).unwrap();
        assert!(csv.starts_with("iteration,ep_norm,difference_norm,contraction_factor\n"));
        assert!(csv.lines().count() >= 2);
    }

    #[test]
    fn sweep_runs_isolated_directories_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = SweepConfig {
            base: quick_cfg(),
            scale: vec![0.5, 1.0, 2.0],
            alpha: Vec::new(),
            epsilon: Vec::new(),
            n: Vec::new(),
            seed: Vec::new(),
        };
        let rows = cmd_sweep(&sweep, dir.path(), 3).unwrap();
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.index, i);
            assert_eq!(row.status, "completed");
            assert!(dir.path().join(&row.dir).join("verdict.json").exists());
        }
        // the amplitude doubles between rows; so does the final L² norm
        // up to nonlinear corrections
        assert!(rows[1].final_l2 > rows[0].final_l2);
        let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 4);
    }
}
