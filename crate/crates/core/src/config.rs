//! Run configuration: strict JSON schema, defaults, validation, and
//! initial-data construction.

use serde::{Deserialize, Serialize};

use crate::constitutive::DealiasMode;
use crate::error::{Error, Result};
use crate::evolution::mollify;
use crate::field::SpectralField;
use crate::grid::Grid;

fn default_box_length() -> f64 {
    std::f64::consts::TAU
}

fn default_snapshot_every() -> usize {
    10
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_band() -> i64 {
    8
}

fn default_decay() -> f64 {
    0.5
}

fn default_safety() -> f64 {
    0.5
}

fn default_dt_max() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Ifrk4,
    Etdrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveConfig {
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
}

/// Named analytic profiles or a snapshot file for ρ₀.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// A·cos(k_min x₁): the exact eigenmode of the linear flow.
    SingleMode {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// A·(cos x₁ + cos(x₁ + x₂)) in grid units; generic enough to
    /// drive a nonzero velocity.
    TwoMode {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Seeded random band-limited field with |k|-exponential decay,
    /// normalized to ‖ρ₀‖_{L^∞} = amplitude.
    Random {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_band")]
        band: i64,
        #[serde(default = "default_decay")]
        decay: f64,
    },
    /// Coefficients loaded from a snapshot file.
    File { path: String },
}

/// Full experiment description. Unknown JSON keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Points per dimension (even, ≥ 8).
    pub n: usize,
    /// Torus period, default 2π.
    #[serde(default = "default_box_length", rename = "L")]
    pub box_length: f64,
    /// Dissipation order α ∈ (0, 2].
    pub alpha: f64,
    /// Viscosity ε ≥ 0 of the −εΔρ regularization.
    #[serde(default)]
    pub epsilon: f64,
    /// Mollifier strength ε₀ applied to the initial data and to the
    /// velocity (e^{−ε₀|k|²} in Fourier).
    #[serde(default)]
    pub ic_mollify: f64,
    /// Final time T > 0.
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Fixed time step; omit to use adaptive CFL stepping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveConfig>,
    pub ic: InitialCondition,
    /// Snapshot/diagnostic cadence in steps.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub dealias: DealiasMode,
    #[serde(default)]
    pub integrator: Integrator,
    /// Seed for random initial data.
    #[serde(default)]
    pub seed: u64,
    /// Drop the transport term (debug switch; the flow becomes the
    /// exact fractional heat semigroup).
    #[serde(default)]
    pub linear_only: bool,
    /// Diagnostics evaluated into the verdict report.
    #[serde(default = "default_diagnostics")]
    pub diagnostics: Vec<String>,
    /// Mild-solver section used by the picard command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardConfig>,
}

/// Diagnostic names understood by the verdict builder.
pub const KNOWN_DIAGNOSTICS: [&str; 5] = [
    "energy_budget",
    "lp_monotonicity",
    "linf_decay",
    "exp_decay",
    "hs_growth",
];

fn default_diagnostics() -> Vec<String> {
    KNOWN_DIAGNOSTICS.map(String::from).to_vec()
}

fn default_picard_tol() -> f64 {
    1e-8
}

fn default_picard_max_iter() -> usize {
    40
}

fn default_picard_p() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardConfig {
    #[serde(default = "default_picard_p")]
    pub p: f64,
    #[serde(default = "default_picard_tol")]
    pub tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub max_iter: usize,
    /// Iterate time grid spacing; default T/100.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Amplitude scales for the smallness scan; empty means a single
    /// solve at the configured amplitude.
    #[serde(default)]
    pub scales: Vec<f64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n, self.box_length)?;
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::Config(format!(
                "alpha: {} outside the dissipation range (0, 2]",
                self.alpha
            )));
        }
        if self.epsilon < 0.0 {
            return Err(Error::Config(format!(
                "epsilon: {} must be >= 0",
                self.epsilon
            )));
        }
        if self.ic_mollify < 0.0 {
            return Err(Error::Config(format!(
                "ic_mollify: {} must be >= 0",
                self.ic_mollify
            )));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!("T: {} must be > 0", self.t_final)));
        }
        match (self.dt, &self.adaptive) {
            (Some(dt), None) if dt > 0.0 => {}
            (Some(dt), None) => {
                return Err(Error::Config(format!("dt: {dt} must be > 0")));
            }
            (None, Some(a)) => {
                if !(a.safety > 0.0 && a.safety <= 1.0) {
                    return Err(Error::Config(format!(
                        "adaptive.safety: {} must be in (0, 1]",
                        a.safety
                    )));
                }
                if !(a.dt_max > 0.0) {
                    return Err(Error::Config(format!(
                        "adaptive.dt_max: {} must be > 0",
                        a.dt_max
                    )));
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "dt and adaptive are mutually exclusive".into(),
                ));
            }
            (None, None) => {
                return Err(Error::Config("either dt or adaptive must be given".into()));
            }
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every: must be >= 1".into()));
        }
        if let InitialCondition::Random {
            amplitude,
            band,
            decay,
        } = self.ic
        {
            if !(amplitude >= 0.0) || band < 1 || !(decay >= 0.0) {
                return Err(Error::Config(
                    "ic: random profile needs amplitude >= 0, band >= 1, decay >= 0".into(),
                ));
            }
        }
        for name in &self.diagnostics {
            if !KNOWN_DIAGNOSTICS.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "diagnostics: unknown entry {name:?}, expected one of {KNOWN_DIAGNOSTICS:?}"
                )));
            }
        }
        if self.diagnostics.len()
            != self
                .diagnostics
                .iter()
                .collect::<std::collections::BTreeSet<_>>()
                .len()
        {
            return Err(Error::Config("diagnostics: entries must be unique".into()));
        }
        if let Some(p) = &self.picard {
            if !(p.p >= 1.0 && p.p.is_finite()) {
                return Err(Error::Config(format!(
                    "picard.p: {} must be finite and >= 1",
                    p.p
                )));
            }
            if !(p.tol > 0.0) {
                return Err(Error::Config(format!("picard.tol: {} must be > 0", p.tol)));
            }
            if p.max_iter == 0 {
                return Err(Error::Config("picard.max_iter: must be >= 1".into()));
            }
            if let Some(dt) = p.dt {
                if !(dt > 0.0) {
                    return Err(Error::Config(format!("picard.dt: {dt} must be > 0")));
                }
            }
            if p.scales.windows(2).any(|w| w[0] > w[1]) || p.scales.iter().any(|s| *s < 0.0) {
                return Err(Error::Config(
                    "picard.scales: must be nonnegative and sorted ascending".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n, self.box_length).expect("validated")
    }

    /// Builds ρ₀ for this config: profile, then J_{ε₀} mollification,
    /// dealias truncation, and exact mean removal.
    pub fn initial_data(&self) -> Result<SpectralField> {
        let grid = self.grid();
        let mut rho = match &self.ic {
            InitialCondition::SingleMode { amplitude } => SpectralField::from_modes(
                &grid,
                &[(1, 0, num_complex::Complex64::new(amplitude / 2.0, 0.0))],
            ),
            InitialCondition::TwoMode { amplitude } => SpectralField::from_modes(
                &grid,
                &[
                    (1, 0, num_complex::Complex64::new(amplitude / 2.0, 0.0)),
                    (1, 1, num_complex::Complex64::new(amplitude / 2.0, 0.0)),
                ],
            ),
            InitialCondition::Random {
                amplitude,
                band,
                decay,
            } => random_profile(&grid, *amplitude, *band, *decay, self.seed),
            InitialCondition::File { path } => crate::io::read_snapshot(path.as_ref())?.1,
        };
        rho = mollify(&rho, self.ic_mollify);
        if self.dealias == DealiasMode::TwoThirds {
            crate::constitutive::truncate_two_thirds(&mut rho);
        } else {
            crate::constitutive::zero_nyquist_rows(&mut rho);
        }
        rho.set_mean_zero();
        rho.enforce_hermitian();
        Ok(rho)
    }

    /// Canonical JSON of the resolved config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex-encoded.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn random_profile(grid: &Grid, amplitude: f64, band: i64, decay: f64, seed: u64) -> SpectralField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let half = grid.n() as i64 / 2;
    let band = band.min(half - 1);
    let mut modes = Vec::new();
    for m1 in -band..=band {
        for m2 in -band..=band {
            if (m1, m2) == (0, 0) || m1 < 0 || (m1 == 0 && m2 < 0) {
                continue;
            }
            let k = ((m1 * m1 + m2 * m2) as f64).sqrt() * grid.min_nonzero_wavenumber();
            let w = (-decay * k).exp();
            let c = num_complex::Complex64::new(
                w * rng.gen_range(-0.5..0.5),
                w * rng.gen_range(-0.5..0.5),
            );
            modes.push((m1, m2, c));
        }
    }
    let f = SpectralField::from_modes(grid, &modes);
    let peak = f.to_physical().linf_norm();
    if peak > 0.0 {
        f.scaled(amplitude / peak)
    } else {
        f
    }
}

/// Parses and validates a config from JSON text. Schema violations
/// report the JSON path of the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
    cfg.validate()?;
    Ok(cfg)
}
