//! Suite orchestration. Each suite returns records (one per checked quantity) and artifacts.

use std::time::Instant;

use normsol::domain::{smallness_threshold_wholespace, Domain};
use normsol::field::{FieldSpace, Grid};
use normsol::ground_state::{fit_decay_constant, normalize_to_mass, sech_soliton, shoot_radial, RadialProfile, ShootOptions};
use normsol::interaction::{estimate, estimates_to_csv, limit_constants, SplitPair};
use normsol::minmax::{
    build_surface, estimate_c0, find_zero_barycenter, landmarks, one_dim_suite, saddle_search, C0Options, Problem,
    SaddleOptions, SurfaceOptions,
};
use normsol::scaling::{
    elementary_power_inequality, max_split_energy, multiplier_identity, pohozaev_nehari_residuals,
    splitting_inequalities, ScalingConstants,
};
use normsol::svg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Resolved, Suite, Tolerances};

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub suite: &'static str,
    pub name: String,
    /// informational records never fail a run
    pub required: bool,
    pub pass: bool,
    pub data: Value,
}

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<Record>,
    pub files: Vec<(String, Vec<u8>)>,
}

impl SuiteOutput {
    fn check(&mut self, suite: Suite, name: impl Into<String>, pass: bool, data: Value) {
        self.records.push(Record { suite: suite.name(), name: name.into(), required: true, pass, data });
    }

    fn info(&mut self, suite: Suite, name: impl Into<String>, data: Value) {
        self.records.push(Record { suite: suite.name(), name: name.into(), required: false, pass: true, data });
    }

    fn file(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn extend(&mut self, other: SuiteOutput) {
        self.records.extend(other.records);
        self.files.extend(other.files);
    }

    pub fn failures(&self) -> Vec<String> {
        self.records.iter().filter(|r| r.required && !r.pass).map(|r| format!("{}/{}", r.suite, r.name)).collect()
    }
}

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub res: &'a Resolved,
    pub tol: Tolerances,
}

type SuiteResult = normsol::Result<SuiteOutput>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn base_profile(ctx: &Context) -> normsol::Result<(f64, RadialProfile)> {
    let p = &ctx.res.params;
    normalize_to_mass(p.dim, p.p, p.rho, &ShootOptions::default())
}

pub fn run(suite: Suite, ctx: &Context) -> SuiteResult {
    let t0 = Instant::now();
    let out = match suite {
        Suite::GroundState => ground_state(ctx),
        Suite::ScalingCheck => scaling_check(ctx),
        Suite::Interaction => interaction(ctx),
        Suite::Landmarks => landmark_sweep(ctx),
        Suite::Solve => solve(ctx),
        Suite::OneDim => one_dim(ctx),
        Suite::VerifyAll => verify_all(ctx),
    };
    eprintln!("{}: {:.1} s", suite.name(), t0.elapsed().as_secs_f64());
    out
}

fn ground_state(ctx: &Context) -> SuiteResult {
    let s = Suite::GroundState;
    let mut out = SuiteOutput::default();
    let prm = &ctx.res.params;
    let (lambda, w) = base_profile(ctx)?;
    let mass_rel = rel(w.mass_sq, prm.rho * prm.rho);
    out.check(
        s,
        "profile",
        mass_rel < ctx.tol.identity && w.energy < 0.0,
        json!({"lambda": lambda, "w0": w.w0(), "mass_sq": w.mass_sq, "mass_rel": mass_rel, "energy": w.energy,
               "grad_sq": w.grad_sq, "p_norm": w.p_norm, "c_decay": w.c_decay}),
    );
    let id = pohozaev_nehari_residuals(&w);
    let mi = multiplier_identity(&w);
    let worst = [id.energy_res, id.nehari_res, id.pohozaev_res, mi.rel, mi.mass_rel]
        .iter()
        .fold(0.0_f64, |a, b| a.max(b.abs()));
    out.check(s, "identities", worst < ctx.tol.identity, json!({"residuals": id, "multiplier": mi, "worst": worst}));
    let c = ScalingConstants::new(prm.dim, prm.p)?;
    let gap = (c.one_plus_s - c.one_plus_s_alt).abs();
    out.check(s, "one-plus-s", gap < ctx.tol.inequality, json!({"s": c.s, "one_plus_s": c.one_plus_s, "gap": gap}));
    if prm.dim == 1 {
        let xmax = 30.0 / lambda.sqrt();
        let err = (0..=3000)
            .map(|i| {
                let x = xmax * i as f64 / 3000.0;
                (w.eval(x) - sech_soliton(prm.p, lambda, x)).abs()
            })
            .fold(0.0_f64, f64::max);
        out.check(s, "sech-oracle", err < ctx.tol.soliton, json!({"max_error": err, "x_max": xmax}));
    }
    out.file("ground_state_profile.txt", w.to_text());
    Ok(out)
}

fn scaling_check(ctx: &Context) -> SuiteResult {
    let s = Suite::ScalingCheck;
    let mut out = SuiteOutput::default();
    let prm = &ctx.res.params;
    let (lambda, base) = base_profile(ctx)?;
    let c = prm.constants();
    let m = base.energy;
    let fit1 = fit_decay_constant(&base)?;
    out.check(
        s,
        "decay-plateau",
        fit1.spread < ctx.tol.decay,
        json!({"c1": fit1.c1, "spread": fit1.spread, "window": fit1.window, "slope_ratio": fit1.slope_ratio}),
    );
    for k in [0.25, 0.5, 0.75] {
        let scaled = base.rescaled(k);
        let direct = shoot_radial(prm.dim, prm.p, k.powf(c.s) * lambda, &ShootOptions::default())?;
        let e_want = k.powf(1.0 + c.s) * m;
        let l_want = k.powf(c.s) * lambda;
        let rmax = 20.0 / l_want.sqrt();
        let sup = direct
            .r_grid
            .iter()
            .take_while(|&&r| r <= rmax)
            .map(|&r| (scaled.eval(r) - direct.eval(r)).abs())
            .fold(0.0_f64, f64::max)
            / direct.w0();
        let errs = [rel(scaled.energy, e_want), rel(direct.energy, e_want), rel(direct.lambda, l_want), rel(direct.mass_sq, k * base.mass_sq), sup];
        let worst = errs.iter().fold(0.0_f64, |a, b| a.max(*b));
        out.check(
            s,
            format!("rescale k={k}"),
            worst < ctx.tol.scaling,
            json!({"k": k, "energy_expected": e_want, "energy_rescaled": scaled.energy, "energy_direct": direct.energy,
                   "lambda_expected": l_want, "lambda_direct": direct.lambda, "profile_sup_rel": sup, "worst": worst}),
        );
        if k < 0.75 {
            let fit = fit_decay_constant(&direct)?;
            let want = k.powf(c.s * (1.0 / (prm.p - 2.0) - (prm.dim as f64 - 1.0) / 4.0));
            let ratio = fit.c1 / fit1.c1;
            out.check(
                s,
                format!("decay-ratio k={k}"),
                rel(ratio, want) < ctx.tol.decay && fit.spread < ctx.tol.decay,
                json!({"k": k, "ratio": ratio, "expected": want, "spread": fit.spread}),
            );
        }
    }
    Ok(out)
}

fn default_z(dim: usize) -> Vec<f64> {
    let mut z = vec![0.0; dim];
    z[0] = -1.0;
    z
}

fn interaction(ctx: &Context) -> SuiteResult {
    let s = Suite::Interaction;
    let mut out = SuiteOutput::default();
    let ic = &ctx.cfg.interaction;
    let (_, base) = base_profile(ctx)?;
    let c1 = fit_decay_constant(&base)?.c1;
    let z = ic.z.clone().unwrap_or_else(|| default_z(ctx.res.params.dim));
    let pair = SplitPair::new(&base, ic.t)?;
    let mut radii = ic.radii.clone();
    radii.sort_by(f64::total_cmp);
    let rows = radii.iter().map(|&r| estimate(r, &pair, &z, c1, ic.quad_tol)).collect::<normsol::Result<Vec<_>>>()?;
    let gaps: Vec<f64> = rows.iter().map(|e| rel(e.ratio_tau, e.c1t)).collect();
    for (e, g) in rows.iter().zip(&gaps) {
        out.info(s, format!("tau r={}", e.r), json!({"estimate": e, "rel_gap": g}));
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap_or(&f64::INFINITY);
    out.check(
        s,
        "tau-limit",
        last < ctx.tol.interaction && monotone,
        json!({"t": ic.t, "z": z, "c1t": rows.first().map(|e| e.c1t), "rel_gaps": gaps, "monotone": monotone}),
    );
    if !ic.t_sweep.is_empty() {
        let vals = ic
            .t_sweep
            .iter()
            .map(|&t| Ok(limit_constants(&SplitPair::new(&base, t)?, &z, c1)?.c1t * (0.5 - t)))
            .collect::<normsol::Result<Vec<f64>>>()?;
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let max = sorted[sorted.len() - 1];
        out.check(
            s,
            "c1t-bounded",
            max <= 2.0 * median,
            json!({"t": ic.t_sweep, "c1t_times_half_minus_t": vals, "median": median, "max": max}),
        );
    }
    out.file("interaction.csv", estimates_to_csv(&rows));
    Ok(out)
}

/// Spacing and half-width of the default box for a problem whose soliton decays on length ℓ.
fn box_for(ctx: &Context, ell: f64, extra: f64) -> (f64, f64) {
    let h = ctx.cfg.grid.h.unwrap_or(ell / 15.0);
    let reach = if ctx.res.domain.is_whole_space() { 0.0 } else { ctx.res.domain.cutoff_r };
    let hw = ctx.cfg.grid.half_width.map_or(reach + 10.0 * ell + extra, |w| w + extra);
    (h, hw)
}

fn problem_on(ctx: &Context, base: &RadialProfile, h: f64, hw: f64) -> normsol::Result<Problem> {
    let prm = ctx.res.params;
    let space = FieldSpace::new(prm, Domain::Exterior(ctx.res.domain), Grid::symmetric(prm.dim, hw, h), &ctx.res.potential)?;
    Ok(Problem::with_profile(space, base.clone()))
}

fn landmark_sweep(ctx: &Context) -> SuiteResult {
    let s = Suite::Landmarks;
    let mut out = SuiteOutput::default();
    let lc = &ctx.cfg.landmarks;
    let (lambda, base) = base_profile(ctx)?;
    let ell = 1.0 / lambda.sqrt();
    let dim = ctx.res.params.dim;
    let mut radii = lc.radii.clone();
    radii.sort_by(f64::total_cmp);
    let (h, hw0) = box_for(ctx, ell, 0.0);
    let c0_problem = problem_on(ctx, &base, h, lc.c0_half_width.unwrap_or(hw0))?;
    let start = c0_problem.surface_field(radii[0], 0.5, &default_z(dim))?;
    let c0_opts = C0Options { max_iter: lc.c0_iterations, ..C0Options::default() };
    let c0 = estimate_c0(&c0_problem, &[("split start".into(), start)], &c0_opts)?;
    out.info(s, "c0", json!(c0));
    let sopts = SurfaceOptions { t_points: lc.t_points, sigma_points: lc.sigma_points };
    let mut any_ok = false;
    let mut summary = Vec::new();
    for &r in &radii {
        let (_, hw) = box_for(ctx, ell, 3.0 * r);
        let pr = problem_on(ctx, &base, h, hw)?;
        let eta = pr.eta_h()?;
        let surf = build_surface(&pr, r, &sopts)?;
        let witness = match find_zero_barycenter(&pr, &surf) {
            Ok(w) => Some(w),
            Err(normsol::Error::NoWitness) => None,
            Err(e) => return Err(e),
        };
        let rep = landmarks(&pr, &surf, c0.value, eta, witness)?;
        any_ok |= rep.ordering_ok;
        summary.push(json!({"r": r, "ordering_ok": rep.ordering_ok, "failures": rep.failures}));
        let (ia, ja) = surf.argmax();
        let mut marks = vec![(ia, ja)];
        if let Some(w) = &rep.witness {
            let i = surf.t_grid.iter().enumerate().min_by(|a, b| (a.1 - w.t).abs().total_cmp(&(b.1 - w.t).abs())).map_or(0, |p| p.0);
            let j = nearest_direction(&surf.sigma, &w.z);
            marks.push((i, j));
        }
        let title = format!("E(psi_r[t,z]), r = {r}, rows t, columns z");
        out.file(format!("surface_r{r}.csv"), surf.to_csv());
        out.file(format!("surface_r{r}.svg"), svg::heatmap(&title, &surf.t_grid, &surf.energy, &marks));
        out.info(s, format!("ordering r={r}"), json!(rep));
    }
    out.check(s, "ordering", any_ok, json!({"radii": summary}));
    Ok(out)
}

fn nearest_direction(sigma: &[Vec<f64>], z: &[f64]) -> usize {
    let d = |a: &[f64]| a.iter().zip(z).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    (0..sigma.len()).min_by(|&a, &b| d(&sigma[a]).total_cmp(&d(&sigma[b]))).unwrap_or(0)
}

fn solve(ctx: &Context) -> SuiteResult {
    let s = Suite::Solve;
    let mut out = SuiteOutput::default();
    let sc = &ctx.cfg.solve;
    let (lambda, base) = base_profile(ctx)?;
    let ell = 1.0 / lambda.sqrt();
    let dim = ctx.res.params.dim;
    let (h, hw) = box_for(ctx, ell, if ctx.res.domain.is_whole_space() { 0.0 } else { sc.r });
    let pr = problem_on(ctx, &base, h, hw)?;
    let eta = pr.eta_h()?;
    let seed = if ctx.res.domain.is_whole_space() {
        out.info(s, "seed", json!({"kind": "soliton", "center": ctx.res.potential.center}));
        pr.soliton_field(&ctx.res.potential.center)?
    } else {
        let surf = build_surface(&pr, sc.r, &SurfaceOptions { t_points: ctx.cfg.landmarks.t_points, sigma_points: ctx.cfg.landmarks.sigma_points })?;
        let w = find_zero_barycenter(&pr, &surf)?;
        out.info(s, "seed", json!({"kind": "zero-barycenter witness", "r": sc.r, "witness": w}));
        pr.surface_field(sc.r, w.t, &w.z)?
    };
    let opts = SaddleOptions {
        tol: ctx.tol.residual,
        descent_max_iter: sc.descent_iterations,
        newton_max_iter: sc.newton_iterations,
        eta_h: Some(eta),
        ..SaddleOptions::default()
    };
    let rep = saddle_search(&pr, seed, &opts)?;
    if let Some(u) = &rep.u_bar {
        out.file("solution.bin", u.snapshot_bytes());
        out.file("solution_axis0.csv", u.axis_slice_csv(0));
        if dim > 1 {
            out.file("solution_axis1.csv", u.axis_slice_csv(1));
        }
    }
    out.check(s, "bound-state", rep.accepted, json!({"grid": {"h": h, "half_width": hw}, "report": rep}));
    Ok(out)
}

fn one_dim(ctx: &Context) -> SuiteResult {
    let s = Suite::OneDim;
    let mut out = SuiteOutput::default();
    let opts = SaddleOptions { tol: ctx.tol.residual, ..SaddleOptions::default() };
    let rep = one_dim_suite(&ctx.cfg.one_dim, &opts)?;
    let labels = json!({
        "whole_line": rep.whole_line.accepted,
        "half_line_free": {"accepted": rep.half_line_free.accepted, "label": rep.half_line_free.escape.label},
        "shifted": rep.shifted.iter().map(|r| json!({"shift": r.shift, "accepted": r.report.accepted})).collect::<Vec<_>>(),
        "monotone": rep.monotone.as_ref().map(|m| json!({"accepted": m.accepted, "label": m.escape.label})),
    });
    out.check(s, "expected-outcomes", rep.as_expected(), labels);
    out.info(s, "reports", json!(rep));
    Ok(out)
}

/// Elementary inequalities on random samples and grids, then the identity suites and thresholds.
fn verify_all(ctx: &Context) -> SuiteResult {
    let s = Suite::VerifyAll;
    let mut out = SuiteOutput::default();
    out.extend(ground_state(ctx)?);
    out.extend(scaling_check(ctx)?);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seeds.rng);
    let mut worst = f64::INFINITY;
    let mut at = (0.0, 0.0, 0.0);
    for _ in 0..ctx.cfg.seeds.samples {
        let a: f64 = rng.gen_range(0.0..1.0);
        let b: f64 = rng.gen_range(0.0..1.0);
        let p: f64 = rng.gen_range(2.0..6.0);
        let slack = elementary_power_inequality(a, b, p) / (a + b).powf(p).max(f64::MIN_POSITIVE);
        if slack < worst {
            worst = slack;
            at = (a, b, p);
        }
    }
    out.check(
        s,
        "power-inequality",
        worst >= -ctx.tol.inequality,
        json!({"samples": ctx.cfg.seeds.samples, "seed": ctx.cfg.seeds.rng, "min_relative_slack": worst, "at": at}),
    );
    let mut split_ok = true;
    let mut concave_ok = true;
    for i in 1..=80 {
        let sv = 4.0 * i as f64 / 80.0;
        for j in 0..=200 {
            let t = j as f64 / 200.0;
            let c = splitting_inequalities(t, sv);
            concave_ok &= c.ok_concavity;
            if 3 * j <= 200 {
                split_ok &= c.ok_1637;
            }
        }
    }
    out.check(s, "split-bound", split_ok, json!({"t_range": [0.0, 1.0 / 3.0], "s_range": [0.05, 4.0]}));
    out.check(s, "split-concavity", concave_ok, json!({"t_range": [0.0, 1.0], "s_range": [0.05, 4.0]}));
    let sv = ctx.res.params.constants().s;
    let (t_max, v) = max_split_energy(-1.0, sv);
    let want = -(2f64.powf(-sv));
    out.check(
        s,
        "split-maximum",
        (v - want).abs() < 1e-10 && (t_max - 0.5).abs() < 1e-5,
        json!({"s": sv, "t": t_max, "value": v, "expected": want}),
    );
    out.extend(thresholds(ctx)?);
    Ok(out)
}

fn thresholds(ctx: &Context) -> SuiteResult {
    let s = Suite::VerifyAll;
    let mut out = SuiteOutput::default();
    let prm = ctx.res.params;
    let n = prm.dim as f64;
    let (_, unit) = normalize_to_mass(prm.dim, prm.p, 1.0, &ShootOptions::default())?;
    let rhos = [0.5, 1.0, 2.0, 4.0];
    let mut qs = vec![n / 2.0, n, f64::INFINITY];
    qs.retain(|&q| q >= 1.0 && !(prm.dim == 2 && q == 1.0));
    qs.dedup();
    for q in qs {
        let ls = rhos
            .iter()
            .map(|&r| Ok(smallness_threshold_wholespace(q, &prm.with_rho(r)?, &unit)?))
            .collect::<normsol::Result<Vec<_>>>()?;
        let l: Vec<f64> = ls.iter().map(|t| t.l).collect();
        let agree = ls.iter().map(|t| rel(t.bound_power_law, t.bound_direct)).fold(0.0_f64, f64::max);
        let (pass, kind) = if q == n / 2.0 {
            let spread = l.iter().map(|v| rel(*v, l[0])).fold(0.0_f64, f64::max);
            (spread < ctx.tol.threshold, "constant")
        } else {
            (l.windows(2).all(|w| w[1] > w[0]), "increasing")
        };
        let q_json = if q.is_infinite() { json!("inf") } else { json!(q) };
        out.check(
            s,
            format!("threshold q={q}"),
            pass && agree < 1e-6,
            json!({"q": q_json, "rho": rhos, "L": l, "expected": kind, "direct_vs_power_law": agree}),
        );
    }
    Ok(out)
}
