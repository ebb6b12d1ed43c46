//! Obstacles, the cutoff θ, potentials and the smallness thresholds on V.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::RadialProfile;
use crate::quad;
use crate::scaling::ModelParams;
use crate::special::{factorial, sphere_area};

/// Ball obstacle of radius `obstacle_radius` at the origin; zero radius is the whole space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDomainSpec {
    pub obstacle_radius: f64,
    pub cutoff_r: f64,
    /// Largest radius of a ball inside the obstacle; equal to `obstacle_radius` for balls.
    pub hole_radius: f64,
}

impl ExteriorDomainSpec {
    pub fn whole_space() -> Self {
        Self { obstacle_radius: 0.0, cutoff_r: 0.0, hole_radius: 0.0 }
    }

    /// Exterior of the closed ball of radius `r_obs`; θ rises from 0 to 1 on [r_obs, cutoff_r].
    pub fn ball(r_obs: f64, cutoff_r: Option<f64>) -> Result<Self> {
        if !(r_obs >= 0.0) {
            return Err(Error::InvalidParams(format!("obstacle radius {r_obs} is negative")));
        }
        if r_obs == 0.0 {
            return Ok(Self::whole_space());
        }
        let cutoff_r = cutoff_r.unwrap_or(r_obs + 2.0);
        if !(cutoff_r > r_obs + 1.0) {
            return Err(Error::InvalidParams(format!(
                "cutoff radius {cutoff_r} must exceed obstacle radius + 1 = {}",
                r_obs + 1.0
            )));
        }
        Ok(Self { obstacle_radius: r_obs, cutoff_r, hole_radius: r_obs })
    }

    pub fn is_whole_space(&self) -> bool {
        self.obstacle_radius == 0.0
    }
}

/// Geometry of a discretized problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Exterior(ExteriorDomainSpec),
    /// One-dimensional half-line (wall, ∞) with θ rising on [wall, wall + 1].
    HalfLine { wall: f64 },
}

impl Domain {
    pub fn whole_space() -> Self {
        Domain::Exterior(ExteriorDomainSpec::whole_space())
    }

    /// True at points removed from the domain (closed obstacle or the region behind the wall).
    pub fn excludes(&self, x: &[f64]) -> bool {
        match self {
            Domain::Exterior(d) => d.obstacle_radius > 0.0 && norm(x) <= d.obstacle_radius,
            Domain::HalfLine { wall } => x[0] <= *wall,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Quintic smoothstep 10u³ − 15u⁴ + 6u⁵: C² and monotone on [0, 1].
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

pub fn cutoff_theta(x: &[f64], domain: &Domain) -> f64 {
    match domain {
        Domain::Exterior(d) => {
            if d.is_whole_space() {
                return 1.0;
            }
            let r = norm(x);
            smoothstep((r - d.obstacle_radius) / (d.cutoff_r - d.obstacle_radius))
        }
        Domain::HalfLine { wall } => smoothstep(x[0] - wall),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PotentialForm {
    Zero,
    /// a e^{−b|x|}
    Exponential { amplitude: f64, rate: f64 },
    /// a e^{−b|x|²}
    Gaussian { amplitude: f64, rate: f64 },
    /// a exp(1 − 1/(1 − |x|²/R²)) for |x| < R, zero outside
    Bump { amplitude: f64, radius: f64 },
    /// Piecewise-linear radial table; beyond the last node V decays like e^{−tail_rate r}.
    Tabulated { r: Vec<f64>, v: Vec<f64>, tail_rate: Option<f64> },
}

/// Radial potential V(|x − center|) with its Lebesgue exponent q (∞ allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub form: PotentialForm,
    pub q: f64,
    pub center: Vec<f64>,
}

impl PotentialSpec {
    pub fn zero(dim: usize) -> Self {
        Self { form: PotentialForm::Zero, q: f64::INFINITY, center: vec![0.0; dim] }
    }

    pub fn new(form: PotentialForm, q: f64, center: Vec<f64>) -> Result<Self> {
        let v = Self { form, q, center };
        v.validate(v.center.len())?;
        Ok(v)
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            PotentialForm::Zero => true,
            PotentialForm::Exponential { amplitude, .. }
            | PotentialForm::Gaussian { amplitude, .. }
            | PotentialForm::Bump { amplitude, .. } => *amplitude == 0.0,
            PotentialForm::Tabulated { v, .. } => v.iter().all(|x| *x == 0.0),
        }
    }

    /// Checks V ≥ 0 and that q is admissible for the dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.center.len() != dim {
            return Err(Error::InvalidParams(format!(
                "potential center has {} coordinates, expected {dim}",
                self.center.len()
            )));
        }
        let qmin = (dim as f64 / 2.0).max(1.0);
        if !(self.q >= qmin) || (dim == 2 && self.q == 1.0) {
            return Err(Error::InvalidParams(format!("q = {} not admissible in dimension {dim}", self.q)));
        }
        if !self.nonneg() {
            return Err(Error::InvalidParams("potential must be non-negative".into()));
        }
        match &self.form {
            PotentialForm::Exponential { rate, .. } | PotentialForm::Gaussian { rate, .. } if !(*rate > 0.0) => {
                Err(Error::InvalidParams("decay rate must be positive".into()))
            }
            PotentialForm::Bump { radius, .. } if !(*radius > 0.0) => {
                Err(Error::InvalidParams("bump radius must be positive".into()))
            }
            PotentialForm::Tabulated { r, v, .. } => {
                if r.len() != v.len() || r.len() < 2 || r.windows(2).any(|w| w[1] <= w[0]) || r[0] != 0.0 {
                    Err(Error::InvalidParams("table must start at r = 0 with increasing radii".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn nonneg(&self) -> bool {
        match &self.form {
            PotentialForm::Zero => true,
            PotentialForm::Exponential { amplitude, .. }
            | PotentialForm::Gaussian { amplitude, .. }
            | PotentialForm::Bump { amplitude, .. } => *amplitude >= 0.0,
            PotentialForm::Tabulated { v, .. } => v.iter().all(|x| *x >= 0.0),
        }
    }

    pub fn radial(&self, r: f64) -> f64 {
        match &self.form {
            PotentialForm::Zero => 0.0,
            PotentialForm::Exponential { amplitude, rate } => amplitude * (-rate * r).exp(),
            PotentialForm::Gaussian { amplitude, rate } => amplitude * (-rate * r * r).exp(),
            PotentialForm::Bump { amplitude, radius } => {
                let u = r / radius;
                if u >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            PotentialForm::Tabulated { r: rr, v, tail_rate } => {
                let n = rr.len();
                if r >= rr[n - 1] {
                    return match tail_rate {
                        Some(c) => v[n - 1] * (-c * (r - rr[n - 1])).exp(),
                        None => v[n - 1],
                    };
                }
                let i = rr.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
                let u = (r - rr[i]) / (rr[i + 1] - rr[i]);
                v[i] * (1.0 - u) + v[i + 1] * u
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        self.radial(d)
    }

    /// Radius beyond which V is identically zero, or where the analytic form has decayed
    /// below e^{−80} relative to its peak. None for an untailed table with a nonzero end.
    fn effective_support(&self, weight_rate: f64) -> Option<f64> {
        match &self.form {
            PotentialForm::Zero => Some(0.0),
            PotentialForm::Exponential { rate, .. } => Some(80.0 / (rate - weight_rate).max(1e-300)),
            PotentialForm::Gaussian { rate, .. } => {
                let b = *rate;
                Some((weight_rate + (weight_rate * weight_rate + 320.0 * b).sqrt()) / (2.0 * b))
            }
            PotentialForm::Bump { radius, .. } => Some(*radius),
            PotentialForm::Tabulated { r, v, tail_rate } => {
                let last = *r.last().unwrap();
                if *v.last().unwrap() == 0.0 {
                    Some(last)
                } else {
                    tail_rate.map(|c| last + 80.0 / (c - weight_rate).max(1e-300))
                }
            }
        }
    }
}

/// ‖V‖_q over ℝᴺ (the sup norm for q = ∞).
pub fn lq_norm(v: &PotentialSpec, q: f64, dim: usize) -> Result<f64> {
    if q.is_infinite() {
        return Ok(match &v.form {
            PotentialForm::Zero => 0.0,
            PotentialForm::Exponential { amplitude, .. }
            | PotentialForm::Gaussian { amplitude, .. }
            | PotentialForm::Bump { amplitude, .. } => *amplitude,
            PotentialForm::Tabulated { v, .. } => v.iter().cloned().fold(0.0, f64::max),
        });
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    let end = v.effective_support(0.0).ok_or(Error::UnknownTail)?;
    let om = sphere_area(dim);
    let f = |r: f64| om * v.radial(r).powf(q) * if dim == 1 { 1.0 } else { r.powi(dim as i32 - 1) };
    let mut br: Vec<f64> = (0..=64).map(|i| end * i as f64 / 64.0).collect();
    if let PotentialForm::Tabulated { r, .. } = &v.form {
        br.extend(r.iter().cloned().filter(|x| *x < end));
        br.sort_by(f64::total_cmp);
        br.dedup();
    }
    let r = quad::integrate_pieces(f, &br, 1e-12, 0.0, 200);
    Ok(r.value.powf(1.0 / q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayCheck {
    pub integral: f64,
    /// Bound on the neglected part beyond the truncation radius.
    pub tail_bound: f64,
    pub verdict: Verdict,
}

/// ∫_0^∞ r^n e^{−c r} dr over [R, ∞) for integer n, c > 0.
fn upper_gamma_int(n: usize, c: f64, r: f64) -> f64 {
    let mut s = 0.0;
    for k in 0..=n {
        s += (c * r).powi(k as i32) / factorial(k);
    }
    factorial(n) / c.powi(n as i32 + 1) * (-c * r).exp() * s
}

/// The weighted integral ∫ V(x)|x|^{N−1} e^{d|x|} dx with a verdict on its convergence.
pub fn check_decay_condition(v: &PotentialSpec, d_rho: f64, dim: usize) -> DecayCheck {
    let om = sphere_area(dim);
    let n = 2 * dim - 2;
    let f = |r: f64| om * v.radial(r) * r.powi(n as i32) * (d_rho * r).exp();
    let diverges = DecayCheck { integral: f64::INFINITY, tail_bound: f64::INFINITY, verdict: Verdict::Diverges };
    let (rate, amp_at_end) = match &v.form {
        PotentialForm::Zero => {
            return DecayCheck { integral: 0.0, tail_bound: 0.0, verdict: Verdict::Converges };
        }
        PotentialForm::Exponential { amplitude, rate } => {
            if *rate <= d_rho {
                return diverges;
            }
            (Some(*rate), *amplitude)
        }
        PotentialForm::Tabulated { v: vals, tail_rate, .. } => {
            let last = *vals.last().unwrap();
            match tail_rate {
                _ if last == 0.0 => (None, 0.0),
                Some(c) if *c <= d_rho => return diverges,
                Some(c) => (Some(*c), last),
                None => {
                    return DecayCheck { integral: f64::NAN, tail_bound: f64::NAN, verdict: Verdict::Unknown };
                }
            }
        }
        _ => (None, 0.0),
    };
    let end = v.effective_support(d_rho).unwrap_or(0.0);
    let br: Vec<f64> = (0..=128).map(|i| end * i as f64 / 128.0).collect();
    let q = quad::integrate_pieces(f, &br, 1e-12, 0.0, 200);
    let tail_bound = match (&v.form, rate) {
        (PotentialForm::Exponential { .. }, Some(c)) => om * amp_at_end * upper_gamma_int(n, c - d_rho, end),
        (PotentialForm::Tabulated { r, .. }, Some(c)) => {
            let r0 = *r.last().unwrap();
            om * amp_at_end * (c * r0).exp() * upper_gamma_int(n, c - d_rho, end.max(r0))
        }
        (PotentialForm::Gaussian { amplitude, rate }, _) => {
            // beyond `end`, b r² − d r ≥ 80 + (b·end − d)(r − end) and r^n e^{…} is dominated
            let slope = (rate * end - d_rho).max(1e-12);
            om * amplitude * (-80.0f64).exp() * upper_gamma_int(n, slope, 0.0) * (1.0 + end).powi(n as i32)
        }
        _ => 0.0,
    };
    DecayCheck { integral: q.value + tail_bound, tail_bound, verdict: Verdict::Converges }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Threshold {
    pub q: f64,
    /// Right side of ½|V|_q |w²|_{q'} < (1 − 2^{−s})(−m) solved for |V|_q, at mass ρ.
    pub bound_direct: f64,
    /// The same bound written as c ρ^{(2s/q)(q − N/2)} with c from the unit-mass soliton.
    pub bound_power_law: f64,
    pub c: f64,
    pub exponent: f64,
    /// L = ½ c ρ^{(2s/q)(q − N/2)}
    pub l: f64,
}

/// |w²|_{q'} for the dual exponent q' of q.
pub fn square_dual_norm(w: &RadialProfile, q: f64) -> f64 {
    if q.is_infinite() {
        return w.mass_sq;
    }
    let qp = q / (q - 1.0);
    if qp.is_infinite() {
        return w.w0() * w.w0();
    }
    w.power_integral(2.0 * qp).powf(1.0 / qp)
}

/// Whole-space smallness threshold L(q, ℝᴺ, ρ). `unit` must be the soliton of unit mass.
pub fn smallness_threshold_wholespace(q: f64, params: &ModelParams, unit: &RadialProfile) -> Result<Threshold> {
    let dim = params.dim;
    let qmin = (dim as f64 / 2.0).max(1.0);
    if !(q >= qmin) || (dim == 2 && q == 1.0) {
        return Err(Error::InvalidParams(format!("q = {q} not admissible in dimension {dim}")));
    }
    if (unit.mass_sq - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParams("threshold needs the unit-mass soliton".into()));
    }
    let c = params.constants();
    let s = c.s;
    let gap = 1.0 - c.threshold_factor;
    let exponent = if q.is_infinite() { 2.0 * s } else { 2.0 * s / q * (q - dim as f64 / 2.0) };
    let rho = params.rho;
    let w_rho = unit.rescaled(rho * rho);
    let bound_direct = 2.0 * gap * (-w_rho.energy) / square_dual_norm(&w_rho, q);
    let c_unit = 2.0 * gap * (-unit.energy) / square_dual_norm(unit, q);
    let bound_power_law = c_unit * rho.powf(exponent);
    Ok(Threshold { q, bound_direct, bound_power_law, c: c_unit, exponent, l: 0.5 * bound_power_law })
}

/// Exterior-domain threshold (2^{−s}m − A_{r,0}) / max_{t,z} |ψ_r[t,z]²|_{q'}.
pub fn exterior_threshold(two_minus_s_m: f64, a_r0: f64, max_psi_sq_dual: f64) -> f64 {
    (two_minus_s_m - a_r0) / max_psi_sq_dual
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_examples() {
        let d = Domain::Exterior(ExteriorDomainSpec::ball(1.0, Some(2.5)).unwrap());
        assert_eq!(cutoff_theta(&[3.0, 0.0], &d), 1.0);
        assert_eq!(cutoff_theta(&[0.5, 0.5], &d), 0.0);
        assert_eq!(cutoff_theta(&[0.5, 0.5], &Domain::whole_space()), 1.0);
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = cutoff_theta(&[1.0 + 1.5 * i as f64 / 100.0, 0.0], &d);
            assert!(v >= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert!(ExteriorDomainSpec::ball(1.0, Some(1.5)).is_err());
    }

    #[test]
    fn lq_examples() {
        let e = PotentialSpec::new(PotentialForm::Exponential { amplitude: 1.0, rate: 1.0 }, f64::INFINITY, vec![0.0; 3]).unwrap();
        assert_eq!(lq_norm(&e, f64::INFINITY, 3).unwrap(), 1.0);
        assert_eq!(lq_norm(&PotentialSpec::zero(2), 2.0, 2).unwrap(), 0.0);
        let g = PotentialSpec::new(PotentialForm::Gaussian { amplitude: 1.0, rate: 1.0 }, 1.0, vec![0.0]).unwrap();
        assert!((lq_norm(&g, 1.0, 1).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn admissible_q() {
        let f = PotentialForm::Gaussian { amplitude: 1.0, rate: 1.0 };
        assert!(PotentialSpec::new(f.clone(), 1.0, vec![0.0; 2]).is_err());
        assert!(PotentialSpec::new(f.clone(), 1.2, vec![0.0; 3]).is_err());
        assert!(PotentialSpec::new(f.clone(), 1.5, vec![0.0; 3]).is_ok());
        assert!(PotentialSpec::new(PotentialForm::Exponential { amplitude: -1.0, rate: 1.0 }, 2.0, vec![0.0]).is_err());
    }

    #[test]
    fn decay_examples() {
        let e = |rate| PotentialSpec::new(PotentialForm::Exponential { amplitude: 1.0, rate }, 2.0, vec![0.0; 2]).unwrap();
        assert_eq!(check_decay_condition(&e(1.0), 1.5, 2).verdict, Verdict::Diverges);
        assert_eq!(check_decay_condition(&e(1.5), 1.5, 2).verdict, Verdict::Diverges);
        let c = check_decay_condition(&e(2.0), 1.5, 2);
        assert_eq!(c.verdict, Verdict::Converges);
        let g = PotentialSpec::new(PotentialForm::Gaussian { amplitude: 1.0, rate: 0.1 }, 2.0, vec![0.0; 2]).unwrap();
        assert_eq!(check_decay_condition(&g, 30.0, 2).verdict, Verdict::Converges);
        assert_eq!(check_decay_condition(&PotentialSpec::zero(2), 3.0, 2).integral, 0.0);
        let t = PotentialSpec::new(PotentialForm::Tabulated { r: vec![0.0, 1.0], v: vec![1.0, 0.5], tail_rate: None }, 2.0, vec![0.0]).unwrap();
        assert_eq!(check_decay_condition(&t, 1.0, 1).verdict, Verdict::Unknown);
        assert!(lq_norm(&t, 2.0, 1).is_err());
    }
}
