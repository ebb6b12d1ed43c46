//! Experiment configuration: TOML sections, defaults and cross-field validation.

use std::path::PathBuf;

use normsol::domain::{ExteriorDomainSpec, PotentialForm, PotentialSpec};
use normsol::minmax::OneDimConfig;
use normsol::ModelParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GroundState,
    ScalingCheck,
    Interaction,
    Landmarks,
    Solve,
    OneDim,
    VerifyAll,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::GroundState => "ground-state",
            Suite::ScalingCheck => "scaling-check",
            Suite::Interaction => "interaction",
            Suite::Landmarks => "landmarks",
            Suite::Solve => "solve",
            Suite::OneDim => "one-dim",
            Suite::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub dim: usize,
    pub p: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default)]
    pub obstacle_radius: f64,
    #[serde(rename = "cutoff_R", alias = "cutoff_r", default)]
    pub cutoff_r: Option<f64>,
}

/// Flat potential keys; which of them are required depends on `form`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default = "zero_form")]
    pub form: String,
    pub amplitude: Option<f64>,
    pub rate: Option<f64>,
    pub radius: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub tail_rate: Option<f64>,
    #[serde(default = "infinite")]
    pub q: f64,
    pub center: Option<Vec<f64>>,
}

fn zero_form() -> String {
    "zero".into()
}

fn infinite() -> f64 {
    f64::INFINITY
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            form: zero_form(),
            amplitude: None,
            rate: None,
            radius: None,
            r: None,
            v: None,
            tail_rate: None,
            q: f64::INFINITY,
            center: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// spacing; defaults to one fifteenth of the soliton decay length
    pub h: Option<f64>,
    /// box half-width; defaults to cutoff_R + 10 decay lengths (plus 3r for surfaces)
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub soliton: f64,
    pub identity: f64,
    pub scaling: f64,
    pub decay: f64,
    pub interaction: f64,
    pub residual: f64,
    pub threshold: f64,
    pub inequality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            soliton: 1e-8,
            identity: 1e-6,
            scaling: 1e-6,
            decay: 0.01,
            interaction: 0.02,
            residual: 1e-5,
            threshold: 1e-10,
            inequality: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            soliton: self.soliton * k,
            identity: self.identity * k,
            scaling: self.scaling * k,
            decay: self.decay * k,
            interaction: self.interaction * k,
            residual: self.residual * k,
            threshold: self.threshold * k,
            inequality: self.inequality * k,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub rng: u64,
    pub samples: usize,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { rng: 20240607, samples: 10_000 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionSection {
    pub t: f64,
    pub radii: Vec<f64>,
    pub z: Option<Vec<f64>>,
    pub t_sweep: Vec<f64>,
    pub quad_tol: f64,
}

impl Default for InteractionSection {
    fn default() -> Self {
        Self { t: 0.3, radii: vec![16.0, 20.0, 24.0], z: None, t_sweep: vec![0.40, 0.45, 0.49, 0.499], quad_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandmarksSection {
    pub radii: Vec<f64>,
    pub t_points: usize,
    pub sigma_points: usize,
    pub c0_iterations: usize,
    /// half-width of the grid used for C₀; defaults to the solve grid
    pub c0_half_width: Option<f64>,
}

impl Default for LandmarksSection {
    fn default() -> Self {
        Self { radii: vec![8.0, 12.0, 16.0, 20.0], t_points: 21, sigma_points: 64, c0_iterations: 150, c0_half_width: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    /// placement radius of the surface that provides the seed
    pub r: f64,
    pub descent_iterations: usize,
    pub newton_iterations: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self { r: 8.0, descent_iterations: 400, newton_iterations: 30 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Option<Suite>,
    pub params: ParamsSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub interaction: InteractionSection,
    #[serde(default)]
    pub landmarks: LandmarksSection,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub one_dim: OneDimConfig,
}

/// Validated objects built from a configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ModelParams,
    pub domain: ExteriorDomainSpec,
    pub potential: PotentialSpec,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form of the parsed configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let err = |field: &str, msg: String| ConfigError(format!("{field}: {msg}"));
        let pr = &self.params;
        let params = ModelParams::new(pr.dim, pr.p, pr.rho).map_err(|e| err("params", e.to_string()))?;
        let d = &self.domain;
        if d.obstacle_radius > 0.0 && pr.dim < 2 {
            return Err(err("domain.obstacle_radius", "exterior domains need N >= 2".into()));
        }
        let domain = ExteriorDomainSpec::ball(d.obstacle_radius, d.cutoff_r)
            .map_err(|e| err("domain.cutoff_R", e.to_string()))?;
        let po = &self.potential;
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| err(&format!("potential.{key}"), format!("required for form {:?}", po.form)));
        let form = match po.form.as_str() {
            "zero" => PotentialForm::Zero,
            "exponential" => PotentialForm::Exponential { amplitude: need(po.amplitude, "amplitude")?, rate: need(po.rate, "rate")? },
            "gaussian" => PotentialForm::Gaussian { amplitude: need(po.amplitude, "amplitude")?, rate: need(po.rate, "rate")? },
            "bump" => PotentialForm::Bump { amplitude: need(po.amplitude, "amplitude")?, radius: need(po.radius, "radius")? },
            "tabulated" => PotentialForm::Tabulated {
                r: po.r.clone().ok_or_else(|| err("potential.r", "required for a table".into()))?,
                v: po.v.clone().ok_or_else(|| err("potential.v", "required for a table".into()))?,
                tail_rate: po.tail_rate,
            },
            other => return Err(err("potential.form", format!("unknown form {other:?}"))),
        };
        let center = po.center.clone().unwrap_or_else(|| vec![0.0; pr.dim]);
        let potential = PotentialSpec::new(form, po.q, center).map_err(|e| err("potential", e.to_string()))?;
        let t = &self.tolerances;
        for (k, v) in [
            ("soliton", t.soliton),
            ("identity", t.identity),
            ("scaling", t.scaling),
            ("decay", t.decay),
            ("interaction", t.interaction),
            ("residual", t.residual),
            ("threshold", t.threshold),
            ("inequality", t.inequality),
        ] {
            if !(v > 0.0) {
                return Err(err(&format!("tolerances.{k}"), format!("must be positive, got {v}")));
            }
        }
        if let Some(h) = self.grid.h {
            if !(h > 0.0) {
                return Err(err("grid.h", format!("must be positive, got {h}")));
            }
        }
        if let Some(z) = &self.interaction.z {
            if z.len() != pr.dim {
                return Err(err("interaction.z", format!("needs {} coordinates", pr.dim)));
            }
        }
        if !(0.0..1.0).contains(&self.interaction.t) || self.interaction.t == 0.0 {
            return Err(err("interaction.t", "must lie in (0, 1)".into()));
        }
        if self.landmarks.radii.is_empty() || self.landmarks.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(err("landmarks.radii", "need positive radii".into()));
        }
        if self.landmarks.t_points < 2 || self.landmarks.sigma_points < 3 {
            return Err(err("landmarks", "t_points >= 2 and sigma_points >= 3 required".into()));
        }
        Ok(Resolved { params, domain, potential })
    }
}
