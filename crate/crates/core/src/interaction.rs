//! Overlap integrals between two separated solitons and their large-separation constants.
//!
//! For N ≥ 2 the overlap of two radial functions centred a distance d apart is written in
//! prolate coordinates around the two centres, r₁ = (d/2)(cosh μ + cos ν),
//! r₂ = (d/2)(cosh μ − cos ν), with volume element
//! ω_{N−1} ((d/2) sinh μ sin ν)^{N−2} r₁ r₂ dμ dν. The thin neck between the bumps then sits
//! at small μ and is resolved by the adaptive rule without special care. Integrands are
//! evaluated in log form, so the separation can be large compared to the decay length.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground_state::RadialProfile;
use crate::quad::{self, QuadResult};
use crate::scaling::ScalingConstants;
use crate::special::sphere_area;

/// A radial function given through ln f(r), with an exponential decay rate for cutoffs.
#[derive(Clone, Copy)]
pub struct LogRadial<'a> {
    pub ln: &'a (dyn Fn(f64) -> f64 + Sync),
    pub rate: f64,
}

/// ∫_{ℝᴺ} f₁(|x|) f₂(|x − d e|) dx.
pub fn overlap(dim: usize, f1: LogRadial, f2: LogRadial, d: f64, rel_tol: f64) -> QuadResult {
    let rate = f1.rate.min(f2.rate);
    if dim == 1 {
        let l = 80.0 / rate;
        let g = |x: f64| ((f1.ln)(x.abs()) + (f2.ln)((x - d).abs())).exp();
        let mut br = vec![-l];
        let mut x = -l / 2.0;
        while x < 0.0 {
            br.push(x);
            x /= 2.0;
            if x > -1e-3 / rate {
                break;
            }
        }
        br.extend_from_slice(&[0.0, 0.5 * d, d]);
        let mut x = d + 1e-3 / rate;
        while x < d + l {
            br.push(x);
            x = d + 2.0 * (x - d);
        }
        br.push(d + l);
        br.dedup();
        return quad::integrate_pieces(g, &br, rel_tol, 0.0, 400);
    }
    let half = 0.5 * d;
    let omega = sphere_area(dim - 1);
    let n2 = dim as i32 - 2;
    let mu_max = (1.0 + 60.0 / (rate * d)).acosh();
    let mut inner_err = 0.0;
    let mut evals = 0;
    let mut ok = true;
    let outer = quad::integrate(
        |mu: f64| {
            let (ch, sh) = (mu.cosh(), mu.sinh());
            let r = quad::integrate(
                |nu: f64| {
                    let c = nu.cos();
                    let r1 = half * (ch + c);
                    let r2 = half * (ch - c);
                    if r1 <= 0.0 || r2 <= 0.0 {
                        return 0.0;
                    }
                    let jac = r1 * r2 * (half * sh * nu.sin()).powi(n2);
                    if jac <= 0.0 {
                        return 0.0;
                    }
                    ((f1.ln)(r1) + (f2.ln)(r2) + jac.ln()).exp()
                },
                0.0,
                std::f64::consts::PI,
                rel_tol * 0.1,
                0.0,
                400,
            );
            inner_err += r.error;
            evals += r.evals;
            ok &= r.converged;
            omega * r.value
        },
        0.0,
        mu_max,
        rel_tol,
        0.0,
        400,
    );
    QuadResult {
        value: outer.value,
        error: outer.error + omega * inner_err * 1e-3,
        evals: outer.evals + evals,
        converged: outer.converged && ok,
    }
}

/// ∫_{S^{N−1}} e^{−x cos θ} dσ, returned as a logarithm.
pub fn ln_angular_weight(dim: usize, x: f64) -> f64 {
    match dim {
        1 => x.abs() + (1.0 + (-2.0 * x.abs()).exp()).ln(),
        3 => {
            if x.abs() < 1e-8 {
                (4.0 * std::f64::consts::PI).ln()
            } else {
                let ax = x.abs();
                (2.0 * std::f64::consts::PI).ln() + ax + (1.0 - (-2.0 * ax).exp()).ln() - ax.ln()
            }
        }
        _ => {
            // e^{−x cos θ} = e^{|x|} e^{−|x|(1 + cos θ)} after folding the sign of x into θ
            let ax = x.abs();
            let n2 = dim as i32 - 2;
            let pi = std::f64::consts::PI;
            let w = (10.0 / ax.max(1e-12).sqrt()).min(pi);
            let r = quad::integrate_pieces(
                |th: f64| (-ax * (1.0 + (pi - th).cos())).exp() * th.sin().powi(n2),
                &[0.0, w, pi],
                1e-13,
                0.0,
                200,
            );
            sphere_area(dim - 1).ln() + ax + r.value.ln()
        }
    }
}

/// ∫ h(|y|) e^{−α y·ê} dy for radial h, via the spherical average of the exponential.
pub fn weighted_radial_integral(dim: usize, h: LogRadial, alpha: f64, rel_tol: f64) -> Result<QuadResult> {
    if alpha >= h.rate {
        return Err(Error::Hypothesis(format!(
            "weight growth {alpha} is not dominated by decay rate {}",
            h.rate
        )));
    }
    let gap = h.rate - alpha;
    let end = 80.0 / gap + 10.0 / h.rate;
    let mut br = vec![0.0];
    let mut x = 0.25 / h.rate;
    while x < end {
        br.push(x);
        x *= 2.0;
    }
    br.push(end);
    let n1 = dim as f64 - 1.0;
    let f = |rr: f64| {
        if rr <= 0.0 {
            return if dim == 1 { 2.0 * (h.ln)(0.0).exp() } else { 0.0 };
        }
        ((h.ln)(rr) + n1 * rr.ln() + ln_angular_weight(dim, alpha * rr)).exp()
    };
    let r = quad::integrate_pieces(f, &br, rel_tol, 0.0, 400);
    if !r.converged {
        return Err(Error::Quadrature { value: r.value, error: r.error });
    }
    Ok(r)
}

/// δ_t(r) = (r^{(N−1)/2} e^{2√(t^s λ_∞) r})^{−1}.
pub fn delta_t(r: f64, t: f64, lambda_inf: f64, s: f64, dim: usize) -> f64 {
    let a = (t.powf(s) * lambda_inf).sqrt();
    (-(dim as f64 - 1.0) / 2.0 * r.ln() - 2.0 * a * r).exp()
}

/// Profiles of masses tρ² and (1−t)ρ² rescaled from the mass-ρ² soliton.
pub struct SplitPair {
    pub t: f64,
    pub rho_sq: f64,
    pub s: f64,
    pub lambda_inf: f64,
    pub small: Option<RadialProfile>,
    pub large: RadialProfile,
}

impl SplitPair {
    pub fn new(base: &RadialProfile, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParams(format!("split fraction t = {t} outside [0,1]")));
        }
        let s = ScalingConstants::new(base.dim, base.p)?.s;
        Ok(Self {
            t,
            rho_sq: base.mass_sq,
            s,
            lambda_inf: base.lambda,
            small: if t > 0.0 { Some(base.rescaled(t)) } else { None },
            large: base.rescaled(1.0 - t),
        })
    }

    fn dim(&self) -> usize {
        self.large.dim
    }
}

fn log_of<'a>(w: &'a RadialProfile, power: f64, f: &'a (dyn Fn(f64) -> f64 + Sync)) -> LogRadial<'a> {
    LogRadial { ln: f, rate: power * w.lambda.sqrt() }
}

fn separation(r: f64, z: &[f64]) -> f64 {
    let mut d2 = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let e = if i == 0 { 1.0 } else { 0.0 };
        d2 += (zi - e).powi(2);
    }
    r * d2.sqrt()
}

/// τ_t(r) = (2/ρ²) ∫ w_{tρ²}(x − rz) w_{(1−t)ρ²}(x − re₁) dx.
pub fn tau_t(r: f64, pair: &SplitPair, z: &[f64], rel_tol: f64) -> Result<QuadResult> {
    let Some(ws) = &pair.small else {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true });
    };
    let wl = &pair.large;
    let f1 = |x: f64| ws.ln_eval(x);
    let f2 = |x: f64| wl.ln_eval(x);
    let q = overlap(pair.dim(), log_of(ws, 1.0, &f1), log_of(wl, 1.0, &f2), separation(r, z), rel_tol);
    if !q.converged {
        return Err(Error::Quadrature { value: q.value, error: q.error });
    }
    let c = 2.0 / pair.rho_sq;
    Ok(QuadResult { value: c * q.value, error: c * q.error, ..q })
}

/// σ_t(r) = ∫ [w_{tρ²}^{p−1}(x − rz) w_{(1−t)ρ²}(x − re₁) + w_{tρ²}(x − rz) w_{(1−t)ρ²}^{p−1}(x − re₁)] dx.
pub fn sigma_t(r: f64, pair: &SplitPair, z: &[f64], rel_tol: f64) -> Result<QuadResult> {
    let Some(ws) = &pair.small else {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true });
    };
    let wl = &pair.large;
    let p1 = ws.p - 1.0;
    let d = separation(r, z);
    let a1 = |x: f64| p1 * ws.ln_eval(x);
    let a2 = |x: f64| wl.ln_eval(x);
    let b1 = |x: f64| ws.ln_eval(x);
    let b2 = |x: f64| p1 * wl.ln_eval(x);
    let qa = overlap(pair.dim(), log_of(ws, p1, &a1), log_of(wl, 1.0, &a2), d, rel_tol);
    let qb = overlap(pair.dim(), log_of(ws, 1.0, &b1), log_of(wl, p1, &b2), d, rel_tol);
    if !(qa.converged && qb.converged) {
        return Err(Error::Quadrature { value: qa.value + qb.value, error: qa.error + qb.error });
    }
    Ok(QuadResult {
        value: qa.value + qb.value,
        error: qa.error + qb.error,
        evals: qa.evals + qb.evals,
        converged: true,
    })
}

/// Large-separation constants of τ_t/δ_t and σ_t/δ_t.
///
/// `c1t` and `c2t` are the actual limits. The δ_t normalisation uses r^{(N−1)/2} while the
/// centres are |rz − re₁| = 2r apart, and τ carries the prefactor 2/ρ²; both factors appear
/// in the limit. For σ only the term with w_{(1−t)ρ²}^{p−1} survives when t < 1/2, so the
/// factor 2 applies at t = 1/2 alone. `c1t_literal`/`c2t_literal` are the expressions
/// c_t∫w e^{…} and 2c_t∫w^{p−1}e^{…} without these corrections.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitConstants {
    pub t: f64,
    pub c_t: f64,
    pub weighted_w: f64,
    pub weighted_wp: f64,
    pub c1t: f64,
    pub c2t: f64,
    pub c1t_literal: f64,
    pub c2t_literal: f64,
}

pub fn limit_constants(pair: &SplitPair, z: &[f64], c1: f64) -> Result<LimitConstants> {
    let t = pair.t;
    let dim = pair.dim();
    let n = dim as f64;
    let p = pair.large.p;
    if t > 0.5 {
        return Err(Error::InvalidParams(format!("t = {t} above 1/2")));
    }
    let c_t = if t == 0.0 { 0.0 } else { c1 * t.powf(pair.s * (1.0 / (p - 2.0) - (n - 1.0) / 4.0)) };
    let a = (t.powf(pair.s) * pair.lambda_inf).sqrt();
    // the weight e^{−a y·(e₁−z)/2} has rate a·|e₁−z|/2
    let zfac = separation(1.0, z) / 2.0;
    let wl = &pair.large;
    let f = |x: f64| wl.ln_eval(x);
    let fp = |x: f64| (p - 1.0) * wl.ln_eval(x);
    let weighted_w = if t < 0.5 {
        weighted_radial_integral(dim, log_of(wl, 1.0, &f), a * zfac, 1e-10)?.value
    } else {
        f64::INFINITY
    };
    let weighted_wp = weighted_radial_integral(dim, log_of(wl, p - 1.0, &fp), a * zfac, 1e-10)?.value;
    let norm = 2f64.powf(-(n - 1.0) / 2.0);
    let (c1t, c1t_literal) = if t == 0.0 {
        (0.0, 0.0)
    } else {
        (2.0 / pair.rho_sq * norm * c_t * weighted_w, c_t * weighted_w)
    };
    let both = if t == 0.5 { 2.0 } else { 1.0 };
    Ok(LimitConstants {
        t,
        c_t,
        weighted_w,
        weighted_wp,
        c1t,
        c2t: both * norm * c_t * weighted_wp,
        c1t_literal,
        c2t_literal: 2.0 * c_t * weighted_wp,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionEstimate {
    pub r: f64,
    pub t: f64,
    pub z: Vec<f64>,
    pub delta: f64,
    pub tau: f64,
    pub sigma: f64,
    pub ratio_tau: f64,
    pub ratio_sigma: f64,
    pub c1t: f64,
    pub c2t: f64,
    pub rel_error: f64,
}

pub fn estimate(r: f64, pair: &SplitPair, z: &[f64], c1: f64, rel_tol: f64) -> Result<InteractionEstimate> {
    let delta = delta_t(r, pair.t, pair.lambda_inf, pair.s, pair.dim());
    let tau = tau_t(r, pair, z, rel_tol)?;
    let sigma = sigma_t(r, pair, z, rel_tol)?;
    let lc = limit_constants(pair, z, c1)?;
    let rel = |q: &QuadResult| if q.value > 0.0 { q.error / q.value } else { 0.0 };
    Ok(InteractionEstimate {
        r,
        t: pair.t,
        z: z.to_vec(),
        delta,
        tau: tau.value,
        sigma: sigma.value,
        ratio_tau: tau.value / delta,
        ratio_sigma: sigma.value / delta,
        c1t: lc.c1t,
        c2t: lc.c2t,
        rel_error: rel(&tau).max(rel(&sigma)),
    })
}

pub fn estimates_to_csv(rows: &[InteractionEstimate]) -> String {
    let mut s = String::from("t,r,delta,tau,sigma,tau_over_delta,sigma_over_delta\n");
    for e in rows {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            e.t, e.r, e.delta, e.tau, e.sigma, e.ratio_tau, e.ratio_sigma
        );
    }
    s
}

/// Aitken extrapolation of a sequence assumed to approach its limit like C e^{−cr} on an
/// equally spaced r-sequence.
pub fn aitken(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n < 3 {
        return *seq.last().unwrap_or(&f64::NAN);
    }
    let (s1, s2, s3) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let den = (s3 - s2) - (s2 - s1);
    if den.abs() <= 1e-14 * s3.abs() || (s3 - s2) * (s2 - s1) <= 0.0 {
        return s3;
    }
    s3 - (s3 - s2).powi(2) / den
}

#[derive(Debug, Clone, Serialize)]
pub struct BlLimit {
    /// (r, (∫ g(x + rz) h(x) dx) e^{α|rz|} |rz|^b)
    pub scaled: Vec<(f64, f64)>,
    pub extrapolated: f64,
    /// γ ∫ h(x) e^{−α x·z/|z|} dx
    pub predicted: f64,
    pub rel_diff: f64,
}

/// Large-r limit of the scaled interaction integral for radial g, h, compared with the
/// prediction γ∫h e^{−αx·ẑ}. Both decay hypotheses are checked numerically first:
/// g(r)e^{αr}r^b must settle to γ along the sequence, and ∫|h|e^{α|x|}|x|^b must be finite.
pub fn bl_limit(
    dim: usize,
    g: LogRadial,
    h: LogRadial,
    alpha: f64,
    b: f64,
    gamma: f64,
    z_norm: f64,
    r_seq: &[f64],
) -> Result<BlLimit> {
    if r_seq.len() < 3 {
        return Err(Error::InvalidParams("need at least three radii".into()));
    }
    let scaled_g: Vec<f64> = r_seq
        .iter()
        .map(|&r| {
            let d = r * z_norm;
            ((g.ln)(d) + alpha * d + b * d.ln()).exp()
        })
        .collect();
    let last = *scaled_g.last().unwrap();
    let prev = scaled_g[scaled_g.len() - 2];
    let settled = if gamma == 0.0 { last < 1e-6 * (1.0 + prev) } else { (last / gamma - 1.0).abs() < 0.05 };
    if !settled {
        return Err(Error::Hypothesis(format!(
            "g(r)e^(αr)r^b = {last:e} has not settled to γ = {gamma:e}"
        )));
    }
    let moment = |cut: f64| {
        let n1 = dim as f64 - 1.0;
        let om = sphere_area(dim);
        let f = |x: f64| if x <= 0.0 { 0.0 } else { om * ((h.ln)(x) + alpha * x + b * x.ln() + n1 * x.ln()).exp() };
        let mut br = vec![0.0];
        let mut x = 0.5;
        while x < cut {
            br.push(x);
            x *= 2.0;
        }
        br.push(cut);
        quad::integrate_pieces(f, &br, 1e-10, 0.0, 200).value
    };
    let cut = 40.0 * r_seq.last().unwrap() * z_norm;
    let (m1, m2) = (moment(cut), moment(2.0 * cut));
    if !(m2.is_finite()) || (m2 - m1).abs() > 1e-3 * m2.abs().max(1e-300) {
        return Err(Error::Hypothesis(format!(
            "∫|h| e^(α|x|)|x|^b does not converge ({m1:e} at {cut}, {m2:e} at {})",
            2.0 * cut
        )));
    }
    let mut scaled = Vec::new();
    for &r in r_seq {
        let d = r * z_norm;
        let q = overlap(dim, h, g, d, 1e-10);
        if !q.converged {
            return Err(Error::Quadrature { value: q.value, error: q.error });
        }
        scaled.push((r, q.value * (alpha * d + b * d.ln()).exp()));
    }
    let vals: Vec<f64> = scaled.iter().map(|v| v.1).collect();
    let extrapolated = aitken(&vals);
    let predicted = if gamma == 0.0 {
        0.0
    } else {
        gamma * weighted_radial_integral(dim, h, alpha, 1e-11)?.value
    };
    let rel_diff = if predicted == 0.0 {
        extrapolated.abs()
    } else {
        (extrapolated / predicted - 1.0).abs()
    };
    Ok(BlLimit { scaled, extrapolated, predicted, rel_diff })
}
