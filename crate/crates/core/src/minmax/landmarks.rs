//! Energy landmarks m < L_r < C₀ ≤ A_r < 2^{−s}m, the estimate of C₀ and the β = 0 witness.

use std::f64::consts::PI;

use serde::Serialize;

use super::saddle::{penalized_descent, DescentOptions};
use super::surface::{lex_less, z_of_angle, TestSurface};
use super::Problem;
use crate::error::{Error, Result};
use crate::field::GridField;

/// A point (t, z) of the surface with β(ψ_r[t, z]) ≈ 0.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub t: f64,
    pub z: Vec<f64>,
    /// angle of z around e₁ when N = 2
    pub phi: Option<f64>,
    pub beta: Vec<f64>,
    pub beta_norm: f64,
    pub energy: f64,
    pub refined_mesh: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn beta_at(problem: &Problem, r: f64, t: f64, z: &[f64]) -> Result<(Vec<f64>, f64)> {
    let u = problem.surface_field(r, t, z)?;
    Ok((u.barycenter()?, u.total_energy()))
}

/// Zero of (t, z) ↦ β(ψ_r[t, z]).
///
/// N = 2: every mesh triangle of the (t, φ) grid whose β-image covers the origin yields a
/// candidate, polished by Newton with difference Jacobians; the candidate of largest energy
/// is returned (ties: smallest t, then smallest z). N = 1: sign changes along t, refined by
/// bisection. N ≥ 3: the node of smallest |β|.
pub fn find_zero_barycenter(problem: &Problem, surface: &TestSurface) -> Result<Witness> {
    let dim = problem.space.grid.dim();
    match dim {
        1 => zero_1d(problem, surface),
        2 => match zero_2d(problem, surface, false) {
            Err(Error::NoWitness) => {
                let opts = super::SurfaceOptions {
                    t_points: 2 * surface.t_grid.len() - 1,
                    sigma_points: 2 * surface.sigma.len(),
                };
                let finer = super::build_surface(problem, surface.r, &opts)?;
                zero_2d(problem, &finer, true)
            }
            other => other,
        },
        _ => {
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in surface.beta.iter().enumerate() {
                for (j, b) in row.iter().enumerate() {
                    let n = norm(b);
                    if best.map_or(true, |(v, _, _)| n < v) {
                        best = Some((n, i, j));
                    }
                }
            }
            let (n, i, j) = best.ok_or(Error::NoWitness)?;
            if n > problem.space.grid.h {
                return Err(Error::NoWitness);
            }
            Ok(Witness {
                t: surface.t_grid[i],
                z: surface.sigma[j].clone(),
                phi: None,
                beta: surface.beta[i][j].clone(),
                beta_norm: n,
                energy: surface.energy[i][j],
                refined_mesh: false,
            })
        }
    }
}

fn zero_1d(problem: &Problem, surface: &TestSurface) -> Result<Witness> {
    let r = surface.r;
    let mut found: Vec<Witness> = Vec::new();
    for (j, z) in surface.sigma.iter().enumerate() {
        for i in 0..surface.t_grid.len() - 1 {
            let (b0, b1) = (surface.beta[i][j][0], surface.beta[i + 1][j][0]);
            if b0 == 0.0 || b0.signum() != b1.signum() {
                let (mut lo, mut hi, mut blo) = (surface.t_grid[i], surface.t_grid[i + 1], b0);
                for _ in 0..50 {
                    if blo == 0.0 {
                        hi = lo;
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let (b, _) = beta_at(problem, r, mid, z)?;
                    if b[0].signum() == blo.signum() {
                        lo = mid;
                        blo = b[0];
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-10 {
                        break;
                    }
                }
                let t = 0.5 * (lo + hi);
                let (b, e) = beta_at(problem, r, t, z)?;
                found.push(Witness {
                    t,
                    z: z.clone(),
                    phi: None,
                    beta_norm: norm(&b),
                    beta: b,
                    energy: e,
                    refined_mesh: false,
                });
            }
        }
    }
    pick(found)
}

fn pick(found: Vec<Witness>) -> Result<Witness> {
    found
        .into_iter()
        .reduce(|a, b| {
            let better = b.energy > a.energy
                || (b.energy == a.energy && (b.t < a.t || (b.t == a.t && lex_less(&b.z, &a.z))));
            if better {
                b
            } else {
                a
            }
        })
        .ok_or(Error::NoWitness)
}

fn zero_2d(problem: &Problem, surface: &TestSurface, refined: bool) -> Result<Witness> {
    let r = surface.r;
    let nt = surface.t_grid.len();
    let nz = surface.sigma.len();
    let dphi = 2.0 * PI / nz as f64;
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    for i in 0..nt - 1 {
        for j in 0..nz {
            let jn = (j + 1) % nz;
            let corners = [(i, j), (i + 1, j), (i, jn), (i + 1, jn)];
            for tri in [[0, 1, 2], [1, 3, 2]] {
                let pts: Vec<(usize, usize)> = tri.iter().map(|&k| corners[k]).collect();
                let b: Vec<&Vec<f64>> = pts.iter().map(|&(a, c)| &surface.beta[a][c]).collect();
                if let Some(w) = covers_origin(b[0], b[1], b[2]) {
                    let param = |(a, c): (usize, usize), wrap: bool| {
                        let phi = c as f64 * dphi + if wrap && c == 0 && j == nz - 1 { 2.0 * PI } else { 0.0 };
                        (surface.t_grid[a], phi)
                    };
                    let q: Vec<(f64, f64)> = pts.iter().map(|&pt| param(pt, true)).collect();
                    let t = w[0] * q[0].0 + w[1] * q[1].0 + w[2] * q[2].0;
                    let phi = w[0] * q[0].1 + w[1] * q[1].1 + w[2] * q[2].1;
                    if !seeds.iter().any(|s| (s.0 - t).abs() < 1e-9 && (s.1 - phi).abs() < 1e-9) {
                        seeds.push((t, phi));
                    }
                }
            }
        }
    }
    if seeds.is_empty() {
        return Err(Error::NoWitness);
    }
    let h = problem.space.grid.h;
    let mut found = Vec::new();
    for (t0, phi0) in seeds {
        let (t, phi, b, e) = polish(problem, r, t0, phi0, 1e-3 * h)?;
        let z = z_of_angle(phi);
        found.push(Witness { t, z, phi: Some(phi), beta_norm: norm(&b), beta: b, energy: e, refined_mesh: refined });
    }
    pick(found)
}

/// Barycentric weights of the origin in the triangle (a, b, c), if it lies inside.
fn covers_origin(a: &[f64], b: &[f64], c: &[f64]) -> Option<[f64; 3]> {
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if det == 0.0 {
        return None;
    }
    let l1 = ((-a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (-a[1])) / det;
    let l2 = ((b[0] - a[0]) * (-a[1]) - (-a[0]) * (b[1] - a[1])) / det;
    let l0 = 1.0 - l1 - l2;
    let eps = 1e-12;
    (l0 >= -eps && l1 >= -eps && l2 >= -eps).then_some([l0, l1, l2])
}

fn polish(problem: &Problem, r: f64, mut t: f64, mut phi: f64, tol: f64) -> Result<(f64, f64, Vec<f64>, f64)> {
    let (mut b, mut e) = beta_at(problem, r, t, &z_of_angle(phi))?;
    for _ in 0..12 {
        if norm(&b) < tol {
            break;
        }
        let (dt, dp) = (1e-4, 1e-4);
        let tp = if t + dt <= 1.0 { t + dt } else { t - dt };
        let (bt, _) = beta_at(problem, r, tp, &z_of_angle(phi))?;
        let (bp, _) = beta_at(problem, r, t, &z_of_angle(phi + dp))?;
        let j = [[(bt[0] - b[0]) / (tp - t), (bp[0] - b[0]) / dp], [(bt[1] - b[1]) / (tp - t), (bp[1] - b[1]) / dp]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let st = -(j[1][1] * b[0] - j[0][1] * b[1]) / det;
        let sp = -(-j[1][0] * b[0] + j[0][0] * b[1]) / det;
        let mut a = 1.0;
        let mut moved = false;
        while a > 1e-3 {
            let tn = (t + a * st).clamp(0.0, 1.0);
            let pn = phi + a * sp;
            let (bn, en) = beta_at(problem, r, tn, &z_of_angle(pn))?;
            if norm(&bn) < norm(&b) {
                t = tn;
                phi = pn;
                b = bn;
                e = en;
                moved = true;
                break;
            }
            a *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok((t, phi.rem_euclid(2.0 * PI), b, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct C0Options {
    /// continuation weights κ, the penalty being κ|m|/ℓ²
    pub kappas: Vec<f64>,
    pub max_iter: usize,
    /// |β| admitted for a feasible value; defaults to h
    pub feasibility: Option<f64>,
    /// separations of the symmetric dipole starts, in decay lengths
    pub dipole_separations: Vec<f64>,
}

impl Default for C0Options {
    fn default() -> Self {
        Self { kappas: vec![1.0, 10.0, 100.0], max_iter: 150, feasibility: None, dipole_separations: vec![1.0, 2.0] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct C0Estimate {
    pub value: f64,
    pub beta_norm: f64,
    pub start_values: Vec<(String, f64)>,
    pub converged: bool,
    #[serde(skip)]
    pub minimizer: Option<GridField>,
}

/// Upper estimate of C₀ = inf{E(u) : u ∈ S_ρ, β(u) = 0} by penalized descent with continuation
/// from a centered soliton, symmetric dipoles and any extra starts.
pub fn estimate_c0(problem: &Problem, extra_starts: &[(String, GridField)], opts: &C0Options) -> Result<C0Estimate> {
    problem.check_grid()?;
    let nd = problem.space.grid.dim();
    let ell = problem.length_scale();
    let origin = vec![0.0; nd];
    let mut starts: Vec<(String, GridField)> = vec![("centered".into(), problem.soliton_field(&origin)?)];
    for &d in &opts.dipole_separations {
        let mut c = origin.clone();
        c[0] = d * ell;
        let mut v = problem.soliton_values(0.5, &c, true);
        c[0] = -d * ell;
        let w = problem.soliton_values(0.5, &c, true);
        v.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        starts.push((format!("dipole {d}"), problem.space.field(v).project_mass(problem.rho())?));
    }
    starts.extend(extra_starts.iter().cloned());
    let feas = opts.feasibility.unwrap_or(problem.space.grid.h);
    let mut best: Option<(f64, GridField)> = None;
    let mut start_values = Vec::new();
    let mut converged = true;
    for (name, u0) in starts {
        let mut u = u0;
        let mut local: Option<(f64, GridField)> = None;
        for &k in &opts.kappas {
            let dopts = DescentOptions {
                max_iter: opts.max_iter,
                penalty: k * problem.m.abs() / (ell * ell),
                target: origin.clone(),
                stop_residual: 0.0,
                check_every: opts.max_iter.max(1),
                feasibility: Some(feas),
                snapshot_every: 0,
            };
            let out = penalized_descent(problem, u, &dopts)?;
            if out.stalled && out.iterations == 0 {
                converged = false;
            }
            if let Some((e, f)) = out.best_feasible {
                if local.as_ref().map_or(true, |(b, _)| e < *b) {
                    local = Some((e, f));
                }
            }
            u = out.u;
        }
        let v = local.as_ref().map_or(f64::INFINITY, |(e, _)| *e);
        start_values.push((name, v));
        if let Some((e, f)) = local {
            if best.as_ref().map_or(true, |(b, _)| e < *b) {
                best = Some((e, f));
            }
        }
    }
    let (value, u) = best.ok_or(Error::NoWitness)?;
    let beta_norm = norm(&u.barycenter()?);
    Ok(C0Estimate { value, beta_norm, start_values, converged, minimizer: Some(u) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Margins {
    pub l_minus_m: f64,
    pub c0_minus_l: f64,
    pub a_minus_c0: f64,
    pub window_minus_a: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinMaxReport {
    pub r: f64,
    pub m: f64,
    pub two_minus_s_m: f64,
    pub l_r: f64,
    pub c0: f64,
    pub a_r: f64,
    pub eta_h: f64,
    pub required_margin: f64,
    pub margins: Margins,
    pub ordering_ok: bool,
    pub failures: Vec<String>,
    pub argmax_t: f64,
    pub argmax_z: Vec<f64>,
    pub l_argmax_z: Vec<f64>,
    pub witness: Option<Witness>,
}

/// Refined surface maxima and the ordering check with margins 3η_h on the strict inequalities.
pub fn landmarks(
    problem: &Problem,
    surface: &TestSurface,
    c0: f64,
    eta_h: f64,
    witness: Option<Witness>,
) -> Result<MinMaxReport> {
    let r = surface.r;
    let dim = problem.space.grid.dim();
    let nz = surface.sigma.len();
    let (ia, ja) = surface.argmax();
    let (mut a_r, mut t_a, mut z_a) = (surface.energy[ia][ja], surface.t_grid[ia], surface.sigma[ja].clone());
    let dt0 = surface.t_grid[1] - surface.t_grid[0];
    let last = surface.t_grid.len() - 1;
    let (jl, mut l_r) = (0..nz).map(|j| (j, surface.energy[last][j])).fold((0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    let mut z_l = surface.sigma[jl].clone();
    if dim == 2 {
        let dphi = 2.0 * PI / nz as f64;
        // compass search in (t, φ)
        let f = |t: f64, phi: f64| problem.surface_energy(r, t, &z_of_angle(phi));
        let (mut t, mut phi) = (t_a, ja as f64 * dphi);
        let (mut st, mut sp) = (0.5 * dt0, 0.5 * dphi);
        while st > 1e-3 * dt0 {
            let mut moved = false;
            for (a, b) in [(st, 0.0), (-st, 0.0), (0.0, sp), (0.0, -sp)] {
                let tn = t + a;
                if !(0.0..=1.0).contains(&tn) {
                    continue;
                }
                let e = f(tn, phi + b)?;
                if e > a_r {
                    a_r = e;
                    t = tn;
                    phi += b;
                    moved = true;
                    break;
                }
            }
            if !moved {
                st *= 0.5;
                sp *= 0.5;
            }
        }
        t_a = t;
        z_a = z_of_angle(phi);
        // golden section for L_r along t = 1
        let g = |phi: f64| problem.surface_energy(r, 1.0, &z_of_angle(phi));
        let (mut lo, mut hi) = ((jl as f64 - 1.0) * dphi, (jl as f64 + 1.0) * dphi);
        let gr = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - gr * (hi - lo);
        let mut d = lo + gr * (hi - lo);
        let (mut fc, mut fd) = (g(c)?, g(d)?);
        for _ in 0..30 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = g(c)?;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = g(d)?;
            }
        }
        let phi_l = 0.5 * (lo + hi);
        let e = g(phi_l)?;
        if e > l_r {
            l_r = e;
            z_l = z_of_angle(phi_l);
        }
    } else {
        let f = |t: f64| problem.surface_energy(r, t, &z_a);
        let mut st = 0.5 * dt0;
        let mut t = t_a;
        while st > 1e-3 * dt0 {
            let mut moved = false;
            for a in [st, -st] {
                let tn = t + a;
                if (0.0..=1.0).contains(&tn) {
                    let e = f(tn)?;
                    if e > a_r {
                        a_r = e;
                        t = tn;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                st *= 0.5;
            }
        }
        t_a = t;
    }
    let m = problem.m;
    let two = problem.two_minus_s_m;
    let req = 3.0 * eta_h;
    let margins = Margins { l_minus_m: l_r - m, c0_minus_l: c0 - l_r, a_minus_c0: a_r - c0, window_minus_a: two - a_r };
    let mut failures = Vec::new();
    if !(margins.l_minus_m > req) {
        failures.push(format!("m < L_r: margin {:.3e} vs required {:.3e}", margins.l_minus_m, req));
    }
    if !(margins.c0_minus_l > req) {
        failures.push(format!("L_r < C0: margin {:.3e} vs required {:.3e}", margins.c0_minus_l, req));
    }
    if !(margins.a_minus_c0 >= 0.0) {
        failures.push(format!("C0 <= A_r: margin {:.3e}", margins.a_minus_c0));
    }
    if !(margins.window_minus_a > req) {
        failures.push(format!("A_r < 2^-s m: margin {:.3e} vs required {:.3e}", margins.window_minus_a, req));
    }
    Ok(MinMaxReport {
        r,
        m,
        two_minus_s_m: two,
        l_r,
        c0,
        a_r,
        eta_h,
        required_margin: req,
        margins,
        ordering_ok: failures.is_empty(),
        failures,
        argmax_t: t_a,
        argmax_z: z_a,
        l_argmax_z: z_l,
        witness,
    })
}
