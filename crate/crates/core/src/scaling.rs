//! Exponents, scaling relations, integral identities and elementary inequalities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground_state::RadialProfile;

/// Dimension, nonlinearity exponent and mass level ρ (the L² norm, not its square).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub dim: usize,
    pub p: f64,
    pub rho: f64,
}

impl ModelParams {
    pub fn new(dim: usize, p: f64, rho: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        let pc = critical_exponent(dim);
        if !(p > 2.0 && p < pc) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside the mass-subcritical window (2, {pc})"
            )));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParams(format!("rho = {rho} must be positive")));
        }
        Ok(Self { dim, p, rho })
    }

    pub fn constants(&self) -> ScalingConstants {
        ScalingConstants::new(self.dim, self.p).expect("validated parameters")
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.dim, self.p, rho)
    }
}

/// 2_c = 2 + 4/N.
pub fn critical_exponent(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub s: f64,
    pub two_c: f64,
    pub one_plus_s: f64,
    /// (2p − N(p−2)) / (4 − N(p−2)), which must agree with `one_plus_s`.
    pub one_plus_s_alt: f64,
    /// 2^{-s}
    pub threshold_factor: f64,
}

impl ScalingConstants {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        let n = dim as f64;
        let two_c = critical_exponent(dim);
        if !(p > 2.0 && p < two_c) {
            return Err(Error::InvalidParams(format!(
                "p = {p} outside the mass-subcritical window (2, {two_c})"
            )));
        }
        let s = (2.0 / n) * (p - 2.0) / (two_c - p);
        let one_plus_s_alt = (2.0 * p - n * (p - 2.0)) / (4.0 - n * (p - 2.0));
        Ok(Self {
            s,
            two_c,
            one_plus_s: 1.0 + s,
            one_plus_s_alt,
            threshold_factor: 2f64.powf(-s),
        })
    }

    /// Exponent of λ in the mass² of u_λ(x) = λ^{1/(p−2)} u₁(√λ x); it equals 1/s.
    pub fn mass_exponent(dim: usize, p: f64) -> f64 {
        2.0 / (p - 2.0) - dim as f64 / 2.0
    }
}

pub fn compute_exponents(params: &ModelParams) -> Result<ScalingConstants> {
    ScalingConstants::new(params.dim, params.p)
}

/// Rescale the mass-ρ² soliton to mass kρ²: w_k(x) = k^{s/(p−2)} w(k^{s/2} x).
pub fn scaled_profile(base: &RadialProfile, k: f64) -> Result<RadialProfile> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("mass fraction k = {k} must be positive")));
    }
    Ok(base.rescaled(k))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRate {
    /// Literal closed form with exponent (p−2)/(4−N(p−2)).
    pub d_rho: f64,
    /// Same quantity written with s/2 = (p−2)/(4−N(p−2)).
    pub d_rho_alt: f64,
}

pub fn decay_rate_d_rho(lambda_1: f64, params: &ModelParams) -> Result<DecayRate> {
    if !(lambda_1 > 0.0) {
        return Err(Error::InvalidParams(format!("lambda_1 = {lambda_1} must be positive")));
    }
    let n = params.dim as f64;
    let p = params.p;
    let e = (p - 2.0) / (4.0 - n * (p - 2.0));
    let d_rho = 2f64.powf(1.0 - e) * lambda_1.sqrt() * params.rho.powf(e);
    let s = params.constants().s;
    let d_rho_alt = 2f64.powf(1.0 - s / 2.0) * lambda_1.sqrt() * params.rho.powf(s / 2.0);
    Ok(DecayRate { d_rho, d_rho_alt })
}

/// Exponent e with λ_{ρ²} = ρ^e λ₁, from two independently computed multipliers.
pub fn multiplier_mass_exponent(lambda_unit: f64, lambda_rho: f64, rho: f64) -> f64 {
    (lambda_rho / lambda_unit).ln() / rho.ln()
}

/// Relative residuals of the energy definition, the Nehari and the Pohozaev identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityResiduals {
    pub energy_res: f64,
    pub nehari_res: f64,
    pub pohozaev_res: f64,
}

/// Norms that enter the identities. `potential` is ∫Vu² (zero for the limit problem).
#[derive(Debug, Clone, Copy)]
pub struct SolutionNorms {
    pub dim: usize,
    pub p: f64,
    pub lambda: f64,
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub p_norm: f64,
    pub energy: f64,
}

impl SolutionNorms {
    pub fn of(profile: &RadialProfile) -> Self {
        Self {
            dim: profile.dim,
            p: profile.p,
            lambda: profile.lambda,
            mass_sq: profile.mass_sq,
            grad_sq: profile.grad_sq,
            p_norm: profile.p_norm,
            energy: profile.energy,
        }
    }
}

pub fn identity_residuals(q: &SolutionNorms) -> IdentityResiduals {
    let n = q.dim as f64;
    let (a, m, b) = (q.grad_sq, q.mass_sq, q.p_norm);
    let scale = a + q.lambda.abs() * m + b;
    let energy_res = (q.energy - (0.5 * a - b / q.p)) / scale;
    let nehari_res = (a + q.lambda * m - b) / scale;
    let pohozaev_res =
        ((n - 2.0) / 2.0 * a + n / 2.0 * q.lambda * m - n / q.p * b) / (n * scale);
    IdentityResiduals { energy_res, nehari_res, pohozaev_res }
}

pub fn pohozaev_nehari_residuals(profile: &RadialProfile) -> IdentityResiduals {
    identity_residuals(&SolutionNorms::of(profile))
}

/// Both sides of λρ²/2 = −(1+s)E and of |u|₂² = 2(1+s)(−E)/λ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiplierCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel: f64,
    pub mass_lhs: f64,
    pub mass_rhs: f64,
    pub mass_rel: f64,
}

pub fn multiplier_identity_norms(q: &SolutionNorms) -> MultiplierCheck {
    let c = ScalingConstants::new(q.dim, q.p).expect("valid exponent");
    let one_plus_s = c.one_plus_s_alt;
    let lhs = 0.5 * q.lambda * q.mass_sq;
    let rhs = -one_plus_s * q.energy;
    let mass_lhs = q.mass_sq;
    let mass_rhs = 2.0 * one_plus_s / q.lambda * (-q.energy);
    MultiplierCheck {
        lhs,
        rhs,
        rel: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()),
        mass_lhs,
        mass_rhs,
        mass_rel: (mass_lhs - mass_rhs).abs() / mass_lhs.abs(),
    }
}

pub fn multiplier_identity(profile: &RadialProfile) -> MultiplierCheck {
    multiplier_identity_norms(&SolutionNorms::of(profile))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitCheck {
    /// 2^s t^{1+s} + (1−t)^{1+s}, bounded by 1 on [0, 1/3].
    pub lhs_1637: f64,
    /// [t^{1+s} − 1] − (1+s) t^s [t − 1], non-positive on [0, 1].
    pub lhs_concavity: f64,
    pub ok_1637: bool,
    pub ok_concavity: bool,
}

pub fn splitting_inequalities(t: f64, s: f64) -> SplitCheck {
    let lhs_1637 = 2f64.powf(s) * t.powf(1.0 + s) + (1.0 - t).powf(1.0 + s);
    let lhs_concavity = (t.powf(1.0 + s) - 1.0) - (1.0 + s) * t.powf(s) * (t - 1.0);
    let eps = 1e-12;
    SplitCheck {
        lhs_1637,
        lhs_concavity,
        ok_1637: lhs_1637 <= 1.0 + eps,
        ok_concavity: lhs_concavity <= eps,
    }
}

/// (a+b)^p − a^p − b^p − (p−1)(a^{p−1}b + ab^{p−1}).
pub fn elementary_power_inequality(a: f64, b: f64, p: f64) -> f64 {
    (a + b).powf(p) - a.powf(p) - b.powf(p) - (p - 1.0) * (a.powf(p - 1.0) * b + a * b.powf(p - 1.0))
}

/// t^{1+s} + (1−t)^{1+s}: energy of the split pair at infinite separation, in units of m.
pub fn split_energy_factor(t: f64, s: f64) -> f64 {
    t.powf(1.0 + s) + (1.0 - t).powf(1.0 + s)
}

/// max over t ∈ [0,1] of [t^{1+s} + (1−t)^{1+s}]·m for m < 0, by golden-section search.
pub fn max_split_energy(m: f64, s: f64) -> (f64, f64) {
    let g = |t: f64| split_energy_factor(t, s) * m;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-12 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    let t = 0.5 * (a + b);
    let mut best = (t, g(t));
    for cand in [0.0, 1.0] {
        if g(cand) > best.1 {
            best = (cand, g(cand));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_examples() {
        let c = ScalingConstants::new(2, 3.0).unwrap();
        assert_eq!(c.s, 1.0);
        let c = ScalingConstants::new(1, 4.0).unwrap();
        assert_eq!(c.s, 2.0);
        assert_eq!(c.one_plus_s, 3.0);
        assert_eq!(c.one_plus_s_alt, 3.0);
        let c = ScalingConstants::new(3, 3.0).unwrap();
        assert!((c.s - 2.0).abs() < 1e-14);
        assert!(ScalingConstants::new(2, 4.0).is_err());
        assert!(ScalingConstants::new(2, 2.0).is_err());
    }

    #[test]
    fn d_rho_examples() {
        let p = ModelParams::new(1, 4.0, 3.0).unwrap();
        let d = decay_rate_d_rho(2.0, &p).unwrap();
        assert!((d.d_rho - 2f64.sqrt() * 3.0).abs() < 1e-14);
        let p = ModelParams::new(2, 3.0, 1.0).unwrap();
        let d = decay_rate_d_rho(1.0, &p).unwrap();
        assert!((d.d_rho - 2f64.sqrt()).abs() < 1e-15);
        assert!((d.d_rho - d.d_rho_alt).abs() < 1e-15);
        assert!(decay_rate_d_rho(0.0, &p).is_err());
    }

    #[test]
    fn inequality_examples() {
        let c = splitting_inequalities(1.0 / 3.0, 1.0);
        assert!((c.lhs_1637 - 6.0 / 9.0).abs() < 1e-15);
        let c = splitting_inequalities(0.0, 2.5);
        assert_eq!(c.lhs_1637, 1.0);
        assert_eq!(splitting_inequalities(1.0, 1.7).lhs_concavity, 0.0);
        assert_eq!(elementary_power_inequality(1.0, 1.0, 2.0), 0.0);
        assert_eq!(elementary_power_inequality(1.0, 0.0, 3.3), 0.0);
    }

    #[test]
    fn split_maximum() {
        let (t, v) = max_split_energy(-1.0, 1.0);
        assert!((t - 0.5).abs() < 1e-6);
        assert!((v + 0.5).abs() < 1e-12);
    }

    #[test]
    fn sech_identities() {
        let q = SolutionNorms {
            dim: 1,
            p: 4.0,
            lambda: 1.0,
            mass_sq: 4.0,
            grad_sq: 4.0 / 3.0,
            p_norm: 16.0 / 3.0,
            energy: -2.0 / 3.0,
        };
        let r = identity_residuals(&q);
        assert!(r.energy_res.abs() < 1e-15);
        assert!(r.nehari_res.abs() < 1e-15);
        assert!(r.pohozaev_res.abs() < 1e-15);
        let m = multiplier_identity_norms(&q);
        assert!((m.lhs - 2.0).abs() < 1e-15 && (m.rhs - 2.0).abs() < 1e-15);
        let bad = SolutionNorms { grad_sq: 1.1 * 1.1 * q.grad_sq, mass_sq: 1.21 * q.mass_sq, p_norm: 1.1f64.powi(4) * q.p_norm, ..q };
        assert!(identity_residuals(&bad).nehari_res.abs() > 1e-3);
    }
}
