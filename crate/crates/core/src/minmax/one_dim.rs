//! One-dimensional experiments: whole line with a small potential, the half-line with and
//! without a shifted potential, and a monotone potential at the wall.

use serde::{Deserialize, Serialize};

use super::saddle::{saddle_search, SaddleOptions, SolveReport};
use super::Problem;
use crate::domain::{Domain, PotentialForm, PotentialSpec};
use crate::error::Result;
use crate::field::{FieldSpace, Grid};
use crate::ground_state::{normalize_to_mass, ShootOptions};
use crate::scaling::ModelParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OneDimConfig {
    pub p: f64,
    pub rho: f64,
    pub h: f64,
    pub whole_line_half_width: f64,
    /// centered at the origin
    pub whole_line_potential: PotentialForm,
    /// the half-line is [0, half_line_length] with Dirichlet data at both ends
    pub half_line_length: f64,
    /// centered at each shift R
    pub shifted_potential: PotentialForm,
    pub shifts: Vec<f64>,
    /// seed position of the potential-free half-line run
    pub free_seed: f64,
    /// centered at the wall
    pub monotone_potential: Option<PotentialForm>,
    pub monotone_seed: f64,
    /// drift beyond which a half-line run is stopped and labeled
    pub drift_limit: f64,
}

impl Default for OneDimConfig {
    fn default() -> Self {
        Self {
            p: 4.0,
            rho: 2.0,
            h: 0.05,
            whole_line_half_width: 20.0,
            whole_line_potential: PotentialForm::Gaussian { amplitude: 0.1, rate: 1.0 },
            half_line_length: 60.0,
            shifted_potential: PotentialForm::Gaussian { amplitude: 0.1, rate: 1.0 },
            shifts: vec![4.0, 8.0, 12.0],
            free_seed: 3.0,
            monotone_potential: Some(PotentialForm::Exponential { amplitude: 0.1, rate: 1.0 }),
            monotone_seed: 3.0,
            drift_limit: 3.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftedRun {
    pub shift: f64,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct OneDimReport {
    pub whole_line: SolveReport,
    pub half_line_free: SolveReport,
    pub shifted: Vec<ShiftedRun>,
    pub monotone: Option<SolveReport>,
}

impl OneDimReport {
    /// The outcomes the theory predicts: whole line accepted, free half-line rejected with a
    /// runaway bump, largest shift accepted, monotone potential rejected.
    pub fn as_expected(&self) -> bool {
        use super::escape::EscapeLabel;
        let largest_ok = self
            .shifted
            .iter()
            .max_by(|a, b| a.shift.total_cmp(&b.shift))
            .is_some_and(|r| r.report.accepted);
        self.whole_line.accepted
            && !self.half_line_free.accepted
            && self.half_line_free.escape.label == EscapeLabel::Translation
            && largest_ok
            && self.monotone.as_ref().map_or(true, |r| !r.accepted)
    }
}

pub fn one_dim_suite(cfg: &OneDimConfig, saddle: &SaddleOptions) -> Result<OneDimReport> {
    let params = ModelParams::new(1, cfg.p, cfg.rho)?;
    let (_, base) = normalize_to_mass(1, cfg.p, cfg.rho, &ShootOptions::default())?;
    let q = f64::INFINITY;
    let run = |domain: Domain, grid: Grid, v: PotentialSpec, seed_at: f64, drift: Option<f64>| -> Result<SolveReport> {
        let space = FieldSpace::new(params, domain, grid, &v)?;
        let pr = Problem::with_profile(space, base.clone());
        let seed = pr.soliton_field(&[seed_at])?;
        let mut opts = saddle.clone();
        opts.drift_limit = drift;
        saddle_search(&pr, seed, &opts)
    };
    let whole = run(
        Domain::whole_space(),
        Grid::symmetric(1, cfg.whole_line_half_width, cfg.h),
        PotentialSpec::new(cfg.whole_line_potential.clone(), q, vec![0.0])?,
        0.0,
        None,
    )?;
    let half = || Grid::spanning(&[0.0], &[cfg.half_line_length], cfg.h);
    let wall = Domain::HalfLine { wall: 0.0 };
    let free = run(wall, half(), PotentialSpec::zero(1), cfg.free_seed, Some(cfg.drift_limit))?;
    let shifted = cfg
        .shifts
        .iter()
        .map(|&r| {
            let v = PotentialSpec::new(cfg.shifted_potential.clone(), q, vec![r])?;
            Ok(ShiftedRun { shift: r, report: run(wall, half(), v, r, Some(cfg.drift_limit))? })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = match &cfg.monotone_potential {
        Some(f) => {
            let v = PotentialSpec::new(f.clone(), q, vec![0.0])?;
            Some(run(wall, half(), v, cfg.monotone_seed, Some(cfg.drift_limit))?)
        }
        None => None,
    };
    Ok(OneDimReport { whole_line: whole, half_line_free: free, shifted, monotone })
}
