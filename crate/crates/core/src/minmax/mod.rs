//! Test surfaces, energy landmarks, the barycenter witness and the constrained saddle search.

use std::sync::Arc;

use crate::domain::{Domain, PotentialSpec};
use crate::error::{Error, Result};
use crate::field::{FieldSpace, GridField, SignContext};
use crate::ground_state::{normalize_to_mass, RadialProfile, ShootOptions};

pub mod escape;
pub mod landmarks;
pub mod one_dim;
pub mod saddle;
pub mod surface;

pub use escape::{ps_escape_diagnostic, EscapeLabel, EscapeOptions, EscapeReport};
pub use landmarks::{estimate_c0, find_zero_barycenter, landmarks, C0Estimate, C0Options, MinMaxReport, Witness};
pub use one_dim::{one_dim_suite, OneDimConfig, OneDimReport};
pub use saddle::{saddle_search, SaddleOptions, SolveReport};
pub use surface::{build_surface, sigma_mesh, SurfaceOptions, TestSurface};

/// A discretized problem together with its limit soliton at mass ρ².
#[derive(Debug, Clone)]
pub struct Problem {
    pub space: Arc<FieldSpace>,
    /// w_{ρ²}, the positive radial solution of the autonomous problem with |w|₂ = ρ
    pub base: RadialProfile,
    pub lambda_inf: f64,
    pub m: f64,
    pub two_minus_s_m: f64,
    pub s: f64,
}

impl Problem {
    pub fn new(space: Arc<FieldSpace>, opts: &ShootOptions) -> Result<Self> {
        let pr = space.params;
        let (_, base) = normalize_to_mass(pr.dim, pr.p, pr.rho, opts)?;
        Ok(Self::with_profile(space, base))
    }

    /// Reuse a soliton already normalized to mass ρ².
    pub fn with_profile(space: Arc<FieldSpace>, base: RadialProfile) -> Self {
        let s = space.params.constants().s;
        let m = base.energy;
        Self { lambda_inf: base.lambda, m, two_minus_s_m: 2f64.powf(-s) * m, s, space, base }
    }

    /// Same soliton on another discretization.
    pub fn on(&self, space: Arc<FieldSpace>) -> Self {
        Self::with_profile(space, self.base.clone())
    }

    pub fn rho(&self) -> f64 {
        self.space.params.rho
    }

    /// Decay length 1/√λ_∞.
    pub fn length_scale(&self) -> f64 {
        1.0 / self.lambda_inf.sqrt()
    }

    /// Nodal values of w_{kρ²}(x − center), optionally multiplied by θ. Zero for k = 0.
    pub fn soliton_values(&self, k: f64, center: &[f64], cutoff: bool) -> Vec<f64> {
        let sp = &self.space;
        let mut out = vec![0.0; sp.len()];
        if k <= 0.0 {
            return out;
        }
        let g = &sp.grid;
        let far = (0..g.dim())
            .map(|a| {
                let lo = g.lower[a] - center[a];
                let hi = g.coord(a, g.dims[a] - 1) - center[a];
                lo.abs().max(hi.abs())
            })
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        let table = ProfileTable::new(&self.base.rescaled(k), far, g.h / 64.0);
        let mut x = vec![0.0; g.dim()];
        for &i in &sp.free {
            g.point(i, &mut x);
            let r = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let th = if cutoff { sp.theta[i] } else { 1.0 };
            out[i] = th * table.eval(r);
        }
        out
    }

    /// θ·w_{ρ²}(x − center) projected onto S_ρ.
    pub fn soliton_field(&self, center: &[f64]) -> Result<GridField> {
        self.space.field(self.soliton_values(1.0, center, true)).project_mass(self.rho())
    }

    /// |E_h(w) − m| for the soliton at the box center on the same grid without obstacle or
    /// potential.
    pub fn eta_h(&self) -> Result<f64> {
        let g = self.space.grid.clone();
        let center: Vec<f64> =
            (0..g.dim()).map(|a| g.lower[a] + 0.5 * g.h * (g.dims[a] - 1) as f64).collect();
        let center: Vec<f64> = center.iter().map(|c| (c / g.h).round() * g.h).collect();
        let free = FieldSpace::new(self.space.params, Domain::whole_space(), g, &PotentialSpec::zero(self.space.params.dim))?;
        let pr = self.on(free);
        let u = pr.space.field(pr.soliton_values(1.0, &center, false));
        Ok((u.total_energy() - self.m).abs())
    }

    /// (m + 3η, 2^{−s}m − 3η).
    pub fn window(&self, eta: f64) -> (f64, f64) {
        (self.m + 3.0 * eta, self.two_minus_s_m - 3.0 * eta)
    }

    pub fn sign_context(&self) -> SignContext {
        let unit = self.base.mass_sq / self.lambda_inf.powf(1.0 / self.s);
        SignContext { two_minus_s_m: self.two_minus_s_m, s: self.s, unit_lambda_mass_sq: unit }
    }

    pub(crate) fn check_grid(&self) -> Result<()> {
        if self.space.free.is_empty() {
            return Err(Error::InvalidParams("grid has no free nodes".into()));
        }
        Ok(())
    }
}

/// Uniform cubic Hermite table of a profile on [0, r_max].
struct ProfileTable {
    dr: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ProfileTable {
    fn new(prof: &RadialProfile, r_max: f64, dr: f64) -> Self {
        let n = (r_max / dr).ceil() as usize + 2;
        let values = (0..n).map(|i| prof.eval(i as f64 * dr)).collect();
        let slopes = (0..n).map(|i| prof.slope(i as f64 * dr)).collect();
        Self { dr, values, slopes }
    }

    fn eval(&self, r: f64) -> f64 {
        let x = r / self.dr;
        let i = (x as usize).min(self.values.len() - 2);
        let t = x - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.dr, self.slopes[i + 1] * self.dr);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
    }
}
