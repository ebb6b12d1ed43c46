//! Constrained descent on S_ρ and the Newton–Krylov saddle refinement.

use serde::Serialize;

use super::escape::{ps_escape_diagnostic, EscapeLabel, EscapeOptions, EscapeReport};
use super::Problem;
use crate::error::Result;
use crate::field::{GridField, SignClass, SignReport};
use crate::linalg::{dot, gmres};

/// Settings for [`penalized_descent`].
#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// weight μ of ½μ|β(u) − target|²; zero disables the barycenter term
    pub penalty: f64,
    pub target: Vec<f64>,
    /// stop once the Euler–Lagrange residual (dual norm) drops below this
    pub stop_residual: f64,
    pub check_every: usize,
    /// keep the lowest energy among iterates with |β − target| below this
    pub feasibility: Option<f64>,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub u: GridField,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub stalled: bool,
    pub history: Vec<(f64, f64)>,
    pub best_feasible: Option<(f64, GridField)>,
    pub snapshots: Vec<GridField>,
}

fn objective(u: &GridField, opts: &DescentOptions) -> Result<(f64, f64, Option<f64>)> {
    let e = u.total_energy();
    if opts.penalty == 0.0 && opts.feasibility.is_none() {
        return Ok((e, e, None));
    }
    let b = u.barycenter()?;
    let d2: f64 = b.iter().zip(&opts.target).map(|(a, t)| (a - t) * (a - t)).sum();
    Ok((e + 0.5 * opts.penalty * d2, e, Some(d2.sqrt())))
}

/// Projected descent of E + ½μ|β − target|² on S_ρ with the Sobolev preconditioner
/// (−Δ + c)^{−1} and Armijo backtracking along the normalization retraction.
pub fn penalized_descent(problem: &Problem, u0: GridField, opts: &DescentOptions) -> Result<DescentOutcome> {
    let rho = problem.rho();
    let sp = std::sync::Arc::clone(&problem.space);
    let dv = sp.dv();
    let c_min = 0.2 * problem.lambda_inf;
    let mut u = u0.project_mass(rho)?;
    let (mut f, mut e, mut dist) = objective(&u, opts)?;
    let mut best = None;
    let consider = |u: &GridField, e: f64, dist: Option<f64>, best: &mut Option<(f64, GridField)>| {
        if let (Some(tol), Some(d)) = (opts.feasibility, dist) {
            if d <= tol && best.as_ref().map_or(true, |(b, _)| e < *b) {
                *best = Some((e, u.clone()));
            }
        }
    };
    consider(&u, e, dist, &mut best);
    let mut alpha: f64 = 1.0;
    let mut history = Vec::new();
    let mut snapshots = vec![u.clone()];
    let mut residual = f64::INFINITY;
    let mut stalled = false;
    let mut it = 0;
    let n = sp.len();
    let mut z = vec![0.0; n];
    let mut y = vec![0.0; n];
    while it < opts.max_iter {
        if it % opts.check_every == 0 {
            let lam = u.lagrange_multiplier();
            residual = u.dual_norm(&u.el_residual(lam));
            history.push((e, residual));
            if residual < opts.stop_residual {
                break;
            }
        }
        let mut g = u.energy_gradient();
        if opts.penalty > 0.0 {
            let (_, pg) = u.barycenter_penalty_gradient(&opts.target)?;
            g.iter_mut().zip(&pg).for_each(|(a, b)| *a += opts.penalty * b);
        }
        let c = u.lagrange_multiplier().max(c_min);
        sp.precondition(&g, c, &mut z);
        sp.precondition(&u.values, c, &mut y);
        let coef = dot(&u.values, &z) / dot(&u.values, &y);
        let d: Vec<f64> = z.iter().zip(&y).map(|(a, b)| coef * b - a).collect();
        let slope = dot(&g, &d) * dv;
        if !(slope < 0.0) {
            stalled = true;
            break;
        }
        alpha = (2.0 * alpha).min(16.0);
        let mut accepted = false;
        while alpha > 1e-10 {
            let cand = sp.field(u.values.iter().zip(&d).map(|(a, b)| a + alpha * b).collect());
            let cand = cand.project_mass(rho)?;
            let (fc, ec, dc) = objective(&cand, opts)?;
            if fc <= f + 1e-4 * alpha * slope {
                u = cand;
                f = fc;
                e = ec;
                dist = dc;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        it += 1;
        if !accepted {
            stalled = true;
            break;
        }
        consider(&u, e, dist, &mut best);
        if opts.snapshot_every > 0 && it % opts.snapshot_every == 0 {
            snapshots.push(u.clone());
        }
    }
    if it % opts.check_every != 0 || it == opts.max_iter {
        let lam = u.lagrange_multiplier();
        residual = u.dual_norm(&u.el_residual(lam));
        history.push((e, residual));
    }
    snapshots.push(u.clone());
    Ok(DescentOutcome { u, energy: e, residual, iterations: it, stalled, history, best_feasible: best, snapshots })
}

#[derive(Debug, Clone)]
struct NewtonOutcome {
    u: GridField,
    lambda: f64,
    iterations: usize,
    linear_iterations: usize,
    residual: f64,
    drift: f64,
    history: Vec<(f64, f64)>,
}

/// Newton–Krylov on the bordered system for (u, λ):
/// −Δu + (V + λ)u − |u|^{p−2}u = 0, |u|₂² = ρ².
fn newton_krylov(
    problem: &Problem,
    u0: GridField,
    opts: &SaddleOptions,
    anchor: &[f64],
) -> Result<NewtonOutcome> {
    let sp = std::sync::Arc::clone(&problem.space);
    let n = sp.len();
    let dv = sp.dv();
    let p = sp.params.p;
    let rho2 = problem.rho() * problem.rho();
    let c_min = 0.2 * problem.lambda_inf;
    let mut u = u0;
    let mut lambda = u.lagrange_multiplier();
    let residual_of = |u: &GridField, lambda: f64| -> (Vec<f64>, f64) {
        let mut r = u.el_residual(lambda);
        r.push(0.5 * (u.mass_sq() - rho2));
        let merit = dot(&r[..n], &r[..n]) * dv + r[n] * r[n];
        (r, merit)
    };
    let report_residual = |u: &GridField| u.dual_norm(&u.el_residual(u.lagrange_multiplier()));
    let (mut f, mut merit) = residual_of(&u, lambda);
    let mut history = vec![(u.total_energy(), report_residual(&u))];
    let mut linear_iterations = 0;
    let mut drift = 0.0;
    let mut it = 0;
    while it < opts.newton_max_iter {
        let res_now = history.last().unwrap().1;
        if res_now < opts.tol * opts.newton_overshoot {
            break;
        }
        let weights: Vec<f64> = u.values.iter().map(|v| (p - 1.0) * v.abs().powf(p - 2.0)).collect();
        let pot = sp.potential.clone();
        let uvals = u.values.clone();
        let mask = &sp.mask;
        let apply = |v: &[f64], out: &mut [f64]| {
            sp.neg_laplacian(&v[..n], &mut out[..n]);
            for &i in &sp.free {
                let vi = pot.as_ref().map_or(0.0, |pv| pv[i]);
                out[i] += (vi + lambda - weights[i]) * v[i] + v[n] * uvals[i];
            }
            out[n] = dv * dot(&uvals, &v[..n]);
        };
        let c = lambda.max(c_min);
        let mut pu = vec![0.0; n];
        sp.precondition(&uvals, c, &mut pu);
        let upu = dv * dot(&uvals, &pu);
        let precond = |r: &[f64], out: &mut [f64]| {
            sp.precondition(&r[..n], c, &mut out[..n]);
            let y = (dv * dot(&uvals, &out[..n]) - r[n]) / upu;
            for i in 0..n {
                out[i] -= y * pu[i];
            }
            out[n] = y;
        };
        let rhs: Vec<f64> = f.iter().zip(mask.iter().chain(std::iter::once(&false))).map(|(v, &m)| if m { 0.0 } else { -v }).collect();
        let (step, stats) = gmres(&apply, &precond, &rhs, opts.gmres_tol, opts.gmres_restart, opts.gmres_max_iter);
        linear_iterations += stats.iterations;
        let mut a = 1.0;
        let mut accepted = false;
        while a > 1.0 / 256.0 {
            let cand = sp.field(u.values.iter().zip(&step[..n]).map(|(x, d)| x + a * d).collect());
            let lc = lambda + a * step[n];
            let (fc, mc) = residual_of(&cand, lc);
            if mc < merit {
                u = cand;
                lambda = lc;
                f = fc;
                merit = mc;
                accepted = true;
                break;
            }
            a *= 0.5;
        }
        it += 1;
        if !accepted {
            break;
        }
        history.push((u.total_energy(), report_residual(&u)));
        let b = u.barycenter()?;
        drift = b.iter().zip(anchor).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        if opts.drift_limit.is_some_and(|l| drift > l) {
            break;
        }
    }
    let u = u.project_mass(problem.rho())?;
    let residual = report_residual(&u);
    Ok(NewtonOutcome { u, lambda, iterations: it, linear_iterations, residual, drift, history })
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleOptions {
    /// acceptance bound on the dual residual norm
    pub tol: f64,
    pub descent_max_iter: usize,
    /// residual at which the descent hands over to Newton
    pub switch_residual: f64,
    /// barycenter penalty weight in units of |m|/ℓ², ℓ the soliton decay length
    pub penalty: f64,
    pub newton_max_iter: usize,
    /// Newton continues until the residual is this fraction of `tol`
    pub newton_overshoot: f64,
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
    /// abort (and label an escape) once β moves this far from the seed
    pub drift_limit: Option<f64>,
    pub eta_h: Option<f64>,
    pub snapshot_every: usize,
    /// unanchored flow steps run after a failed refinement to expose the escape
    pub escape_iter: usize,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            descent_max_iter: 400,
            switch_residual: 1e-3,
            penalty: 10.0,
            newton_max_iter: 30,
            newton_overshoot: 1e-2,
            gmres_tol: 1e-6,
            gmres_restart: 40,
            gmres_max_iter: 800,
            drift_limit: None,
            eta_h: None,
            snapshot_every: 20,
            escape_iter: 300,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub accepted: bool,
    pub rejection: Vec<String>,
    pub lambda: f64,
    pub lambda_newton: f64,
    /// relative gap between the Newton multiplier and λ recomputed from the field
    pub multiplier_identity_rel: f64,
    pub energy: f64,
    pub residual_norm: f64,
    pub sign: SignReport,
    pub in_window: bool,
    pub window: (f64, f64),
    pub m: f64,
    pub two_minus_s_m: f64,
    pub eta_h: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub linear_iterations: usize,
    pub drift: f64,
    pub barycenter: Vec<f64>,
    pub escape: EscapeReport,
    pub history: Vec<(f64, f64)>,
    #[serde(skip)]
    pub u_bar: Option<GridField>,
}

/// Penalized descent from the seed followed by Newton–Krylov refinement, then the acceptance
/// checks: residual below `tol`, λ > 0, constant sign and E inside the shrunken window.
pub fn saddle_search(problem: &Problem, seed: GridField, opts: &SaddleOptions) -> Result<SolveReport> {
    problem.check_grid()?;
    let eta = match opts.eta_h {
        Some(e) => e,
        None => problem.eta_h()?,
    };
    let anchor = seed.barycenter()?;
    let ell = problem.length_scale();
    let dopts = DescentOptions {
        max_iter: opts.descent_max_iter,
        penalty: opts.penalty * problem.m.abs() / (ell * ell),
        target: anchor.clone(),
        stop_residual: opts.switch_residual,
        check_every: 10,
        feasibility: None,
        snapshot_every: opts.snapshot_every,
    };
    let d = penalized_descent(problem, seed, &dopts)?;
    let nw = newton_krylov(problem, d.u.clone(), opts, &anchor)?;
    let u = nw.u;
    let lambda = u.lagrange_multiplier();
    let energy = u.total_energy();
    let sign = u.sign_classify(Some(&problem.sign_context()));
    let window = problem.window(eta);
    let in_window = energy > window.0 && energy < window.1;
    let mut rejection = Vec::new();
    if !(nw.residual < opts.tol) {
        rejection.push(format!("residual {:.3e} above tolerance {:.1e}", nw.residual, opts.tol));
    }
    if !(lambda > 0.0) {
        rejection.push(format!("multiplier {lambda:.6e} not positive"));
    }
    if sign.class != SignClass::ConstantSign {
        rejection.push("solution changes sign".into());
    }
    if !in_window {
        rejection.push(format!("energy {energy:.9e} outside ({:.9e}, {:.9e})", window.0, window.1));
    }
    if opts.drift_limit.is_some_and(|l| nw.drift > l) {
        rejection.push(format!("barycenter drifted by {:.3}", nw.drift));
    }
    let eopts = EscapeOptions { ball_radius: 2.0 * ell, bump_fraction: 0.15, min_drift: 0.1 * ell };
    let escape = if nw.residual < opts.tol {
        let mut e = ps_escape_diagnostic(&[u.clone()], &eopts)?;
        e.label = EscapeLabel::Compact;
        e
    } else {
        let flow = DescentOptions {
            max_iter: opts.escape_iter,
            penalty: 0.0,
            target: anchor.clone(),
            stop_residual: opts.tol,
            check_every: opts.escape_iter.max(1),
            feasibility: None,
            snapshot_every: 10,
        };
        let f = penalized_descent(problem, u.clone(), &flow)?;
        ps_escape_diagnostic(&f.snapshots, &eopts)?
    };
    let mut history = d.history;
    history.extend(nw.history);
    let multiplier_identity_rel = (nw.lambda - lambda).abs() / lambda.abs().max(f64::MIN_POSITIVE);
    // −ū solves the same problem
    let (u_pos, sign) = if sign.class == SignClass::ConstantSign && sign.max < 0.0 {
        let neg = u.space.field(u.values.iter().map(|v| -v).collect());
        let s = neg.sign_classify(None);
        (neg, s)
    } else {
        (u.clone(), sign)
    };
    let barycenter = u_pos.barycenter()?;
    Ok(SolveReport {
        accepted: rejection.is_empty(),
        rejection,
        lambda,
        lambda_newton: nw.lambda,
        multiplier_identity_rel,
        energy,
        residual_norm: nw.residual,
        sign,
        in_window,
        window,
        m: problem.m,
        two_minus_s_m: problem.two_minus_s_m,
        eta_h: eta,
        iterations: d.iterations,
        newton_iterations: nw.iterations,
        linear_iterations: nw.linear_iterations,
        drift: nw.drift,
        barycenter,
        escape,
        history,
        u_bar: Some(u_pos),
    })
}
