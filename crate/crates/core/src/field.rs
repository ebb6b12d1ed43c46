//! Finite-difference fields on boxes with a Dirichlet mask.
//!
//! Nodes on the outer box boundary and nodes outside the domain are pinned to zero. The
//! energy uses the standard second-order difference quotients, so its L² gradient is
//! −Δ_h u + Vu − |u|^{p−2}u at every free node.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::domain::{cutoff_theta, Domain, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::scaling::ModelParams;

/// Uniform lattice on an axis-aligned box, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub lower: Vec<f64>,
    pub h: f64,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, dims: Vec<usize>, h: f64) -> Self {
        assert_eq!(lower.len(), dims.len());
        assert!(dims.iter().all(|&n| n >= 3));
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        Self { dims, lower, h, strides }
    }

    /// Box [−L, L]ᴺ with a node at the origin; L is rounded to a multiple of h.
    pub fn symmetric(dim: usize, half_width: f64, h: f64) -> Self {
        let m = (half_width / h).round() as usize;
        Self::new(vec![-(m as f64) * h; dim], vec![2 * m + 1; dim], h)
    }

    /// Box with the given lower and (rounded) upper corners.
    pub fn spanning(lower: &[f64], upper: &[f64], h: f64) -> Self {
        let dims = lower.iter().zip(upper).map(|(l, u)| ((u - l) / h).round() as usize + 1).collect();
        Self::new(lower.to_vec(), dims, h)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + self.h * i as f64
    }

    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        for a in 0..self.dim() {
            out[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
    }

    pub fn point(&self, idx: usize, out: &mut [f64]) {
        for a in 0..self.dim() {
            let i = (idx / self.strides[a]) % self.dims[a];
            out[a] = self.coord(a, i);
        }
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        (0..self.dim()).any(|a| {
            let i = (idx / self.strides[a]) % self.dims[a];
            i == 0 || i + 1 == self.dims[a]
        })
    }

    /// Index of the node nearest to x, clamped to the box.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim() {
            let i = ((x[a] - self.lower[a]) / self.h).round().clamp(0.0, (self.dims[a] - 1) as f64) as usize;
            idx += i * self.strides[a];
        }
        idx
    }
}

/// Fast solver for (−Δ_h + c) with zero Dirichlet data on the box boundary, by sine
/// transforms along each axis.
pub struct DstSolver {
    dims: Vec<usize>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
    eig: Vec<Vec<f64>>,
}

impl std::fmt::Debug for DstSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DstSolver").field("dims", &self.dims).finish()
    }
}

impl DstSolver {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let dims: Vec<usize> = grid.dims.iter().map(|n| n - 2).collect();
        let h2 = grid.h * grid.h;
        let ffts = dims.iter().map(|&m| planner.plan_fft_forward(2 * (m + 1))).collect();
        let eig = dims
            .iter()
            .map(|&m| (1..=m).map(|k| (2.0 - 2.0 * (PI * k as f64 / (m + 1) as f64).cos()) / h2).collect())
            .collect();
        Self { dims, ffts, eig }
    }

    fn transform_axis(&self, data: &mut [f64], axis: usize) {
        let m = self.dims[axis];
        let l = 2 * (m + 1);
        let stride: usize = self.dims[axis + 1..].iter().product();
        let outer: usize = self.dims[..axis].iter().product();
        let lines = outer * stride;
        let mut buf = vec![Complex::new(0.0, 0.0); lines * l];
        let mut line = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                let b = &mut buf[line * l..(line + 1) * l];
                for j in 0..m {
                    let v = data[base + j * stride];
                    b[j + 1] = Complex::new(v, 0.0);
                    b[l - 1 - j] = Complex::new(-v, 0.0);
                }
                line += 1;
            }
        }
        self.ffts[axis].process(&mut buf);
        let mut line = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * m * stride + s;
                let b = &buf[line * l..(line + 1) * l];
                for k in 0..m {
                    data[base + k * stride] = -0.5 * b[k + 1].im;
                }
                line += 1;
            }
        }
    }

    /// Solve (−Δ_h + c) x = f on interior nodes. Both slices are full-grid arrays; boundary
    /// entries of f are ignored and those of x set to zero.
    pub fn solve(&self, grid: &Grid, f: &[f64], c: f64, x: &mut [f64]) {
        let nd = self.dims.len();
        let n_int: usize = self.dims.iter().product();
        let mut data = vec![0.0; n_int];
        let mut mi = vec![0usize; nd];
        for (k, d) in data.iter_mut().enumerate() {
            let mut rem = k;
            let mut idx = 0;
            for a in (0..nd).rev() {
                mi[a] = rem % self.dims[a];
                rem /= self.dims[a];
                idx += (mi[a] + 1) * grid.strides[a];
            }
            *d = f[idx];
        }
        for a in 0..nd {
            self.transform_axis(&mut data, a);
        }
        let mut norm = 1.0;
        for &m in &self.dims {
            norm *= 2.0 / (m + 1) as f64;
        }
        for (k, d) in data.iter_mut().enumerate() {
            let mut rem = k;
            let mut e = c;
            for a in (0..nd).rev() {
                e += self.eig[a][rem % self.dims[a]];
                rem /= self.dims[a];
            }
            *d *= norm / e;
        }
        for a in 0..nd {
            self.transform_axis(&mut data, a);
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        for (k, d) in data.iter().enumerate() {
            let mut rem = k;
            let mut idx = 0;
            for a in (0..nd).rev() {
                idx += (rem % self.dims[a] + 1) * grid.strides[a];
                rem /= self.dims[a];
            }
            x[idx] = *d;
        }
    }
}

/// Shared discretization: grid, mask, cutoff, potential values and fast solver.
#[derive(Debug)]
pub struct FieldSpace {
    pub grid: Grid,
    pub params: ModelParams,
    pub domain: Domain,
    /// true at pinned nodes
    pub mask: Vec<bool>,
    pub free: Vec<usize>,
    pub theta: Vec<f64>,
    pub potential: Option<Vec<f64>>,
    ball: Vec<Vec<isize>>,
    ball_linear: Vec<isize>,
    ball_reach: usize,
    dst: DstSolver,
}

impl FieldSpace {
    pub fn new(params: ModelParams, domain: Domain, grid: Grid, potential: &PotentialSpec) -> Result<Arc<Self>> {
        if grid.dim() != params.dim {
            return Err(Error::InvalidParams("grid dimension differs from N".into()));
        }
        potential.validate(params.dim)?;
        let n = grid.len();
        let mut mask = vec![false; n];
        let mut theta = vec![0.0; n];
        let mut pot = if potential.is_zero() { None } else { Some(vec![0.0; n]) };
        let mut x = vec![0.0; grid.dim()];
        for i in 0..n {
            grid.point(i, &mut x);
            mask[i] = grid.is_boundary(i) || domain.excludes(&x);
            theta[i] = if mask[i] { 0.0 } else { cutoff_theta(&x, &domain) };
            if let Some(v) = pot.as_mut() {
                v[i] = potential.eval(&x);
            }
        }
        let free = (0..n).filter(|&i| !mask[i]).collect();
        let reach = (1.0 / grid.h + 1e-9).floor() as isize;
        let mut ball = Vec::new();
        let nd = grid.dim();
        let mut k = vec![-reach; nd];
        loop {
            let r2: f64 = k.iter().map(|&v| (v as f64 * grid.h).powi(2)).sum();
            if r2 <= 1.0 + 1e-12 {
                ball.push(k.clone());
            }
            let mut a = nd;
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                k[a] += 1;
                if k[a] <= reach {
                    break;
                }
                k[a] = -reach;
                if a == 0 {
                    a = usize::MAX;
                    break;
                }
            }
            if a == usize::MAX {
                break;
            }
        }
        let ball_linear =
            ball.iter().map(|k| k.iter().zip(grid.strides()).map(|(v, s)| v * *s as isize).sum()).collect();
        let dst = DstSolver::new(&grid);
        Ok(Arc::new(Self {
            grid,
            params,
            domain,
            mask,
            free,
            theta,
            potential: pot,
            ball,
            ball_linear,
            ball_reach: reach as usize,
            dst,
        }))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dv(&self) -> f64 {
        self.grid.cell_volume()
    }

    pub fn ball_size(&self) -> usize {
        self.ball.len()
    }

    /// Field with values f(x) at free nodes and zero at pinned nodes.
    pub fn field_from_fn<F: FnMut(&[f64]) -> f64>(self: &Arc<Self>, mut f: F) -> GridField {
        let mut x = vec![0.0; self.grid.dim()];
        let mut values = vec![0.0; self.len()];
        for &i in &self.free {
            self.grid.point(i, &mut x);
            values[i] = f(&x);
        }
        GridField { space: Arc::clone(self), values }
    }

    pub fn field(self: &Arc<Self>, mut values: Vec<f64>) -> GridField {
        assert_eq!(values.len(), self.len());
        for (v, &m) in values.iter_mut().zip(&self.mask) {
            if m {
                *v = 0.0;
            }
        }
        GridField { space: Arc::clone(self), values }
    }

    /// out = −Δ_h u at free nodes, zero elsewhere.
    pub fn neg_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let h2 = 1.0 / (self.grid.h * self.grid.h);
        let nd = self.grid.dim();
        let st = self.grid.strides();
        out.iter_mut().for_each(|v| *v = 0.0);
        for &i in &self.free {
            let mut s = 2.0 * nd as f64 * u[i];
            for &sa in &st[..nd] {
                s -= u[i + sa] + u[i - sa];
            }
            out[i] = s * h2;
        }
    }

    /// z = mask ∘ (−Δ_box + c)^{−1} (mask ∘ r): the fast solver with the obstacle ignored.
    pub fn precondition(&self, r: &[f64], c: f64, z: &mut [f64]) {
        let mut rm = r.to_vec();
        for (v, &m) in rm.iter_mut().zip(&self.mask) {
            if m {
                *v = 0.0;
            }
        }
        self.dst.solve(&self.grid, &rm, c, z);
        for (v, &m) in z.iter_mut().zip(&self.mask) {
            if m {
                *v = 0.0;
            }
        }
    }

    /// Solve (−Δ_h + c) z = r on free nodes by preconditioned conjugate gradients.
    pub fn helmholtz_solve(&self, r: &[f64], c: f64, rel_tol: f64) -> Vec<f64> {
        let n = self.len();
        let mut x = vec![0.0; n];
        let mut res: Vec<f64> = r.iter().zip(&self.mask).map(|(v, &m)| if m { 0.0 } else { *v }).collect();
        let bnorm = dot(&res, &res).sqrt();
        if bnorm == 0.0 {
            return x;
        }
        let mut z = vec![0.0; n];
        self.precondition(&res, c, &mut z);
        let mut pdir = z.clone();
        let mut rz = dot(&res, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..500 {
            self.neg_laplacian(&pdir, &mut ap);
            for &i in &self.free {
                ap[i] += c * pdir[i];
            }
            let alpha = rz / dot(&pdir, &ap);
            for &i in &self.free {
                x[i] += alpha * pdir[i];
                res[i] -= alpha * ap[i];
            }
            if dot(&res, &res).sqrt() <= rel_tol * bnorm {
                break;
            }
            self.precondition(&res, c, &mut z);
            let rz_new = dot(&res, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for &i in &self.free {
                pdir[i] = z[i] + beta * pdir[i];
            }
        }
        x
    }

    /// Unit-ball average of |u| at every node; nodes outside the box count as zero.
    pub fn ball_average(&self, u: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let nd = g.dim();
        let k = self.ball.len() as f64;
        let reach = self.ball_reach;
        let mut mi = vec![0usize; nd];
        for i in 0..g.len() {
            g.multi_index(i, &mut mi);
            let inner = (0..nd).all(|a| mi[a] >= reach && mi[a] + reach < g.dims[a]);
            let mut s = 0.0;
            if inner {
                for &o in &self.ball_linear {
                    s += u[(i as isize + o) as usize].abs();
                }
            } else {
                'outer: for off in &self.ball {
                    let mut j = 0isize;
                    for a in 0..nd {
                        let c = mi[a] as isize + off[a];
                        if c < 0 || c >= g.dims[a] as isize {
                            continue 'outer;
                        }
                        j += c * g.strides()[a] as isize;
                    }
                    s += u[j as usize].abs();
                }
            }
            out[i] = s / k;
        }
    }
}

/// Values on a [`FieldSpace`]; pinned entries are always zero.
#[derive(Debug, Clone)]
pub struct GridField {
    pub space: Arc<FieldSpace>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential_term: f64,
    pub nonlinear: f64,
    pub total: f64,
    pub lambda_est: f64,
    pub residual_norm: f64,
    pub mass_sq: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential_term: f64,
    pub nonlinear: f64,
    pub mass_sq: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential_term - self.nonlinear
    }

    /// λρ² = |u|_p^p − |∇u|² − ∫Vu² with ρ² the current mass.
    pub fn lambda(&self, p: f64) -> f64 {
        (p * self.nonlinear - 2.0 * self.kinetic - 2.0 * self.potential_term) / self.mass_sq
    }
}

impl GridField {
    pub fn params(&self) -> ModelParams {
        self.space.params
    }

    pub fn mass_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.space.dv()
    }

    pub fn energy_parts(&self) -> EnergyParts {
        let sp = &self.space;
        let dv = sp.dv();
        let p = sp.params.p;
        let mut lap = vec![0.0; sp.len()];
        sp.neg_laplacian(&self.values, &mut lap);
        let mut kin = 0.0;
        let mut pot = 0.0;
        let mut nl = 0.0;
        let mut mass = 0.0;
        for &i in &sp.free {
            let u = self.values[i];
            kin += u * lap[i];
            if let Some(v) = &sp.potential {
                pot += v[i] * u * u;
            }
            nl += u.abs().powf(p);
            mass += u * u;
        }
        EnergyParts { kinetic: 0.5 * kin * dv, potential_term: 0.5 * pot * dv, nonlinear: nl * dv / p, mass_sq: mass * dv }
    }

    pub fn total_energy(&self) -> f64 {
        self.energy_parts().total()
    }

    pub fn lagrange_multiplier(&self) -> f64 {
        self.energy_parts().lambda(self.space.params.p)
    }

    /// L² gradient of E: −Δ_h u + Vu − |u|^{p−2}u at free nodes.
    pub fn energy_gradient(&self) -> Vec<f64> {
        let sp = &self.space;
        let p = sp.params.p;
        let mut g = vec![0.0; sp.len()];
        sp.neg_laplacian(&self.values, &mut g);
        for &i in &sp.free {
            let u = self.values[i];
            let v = sp.potential.as_ref().map_or(0.0, |v| v[i]);
            g[i] += v * u - u.abs().powf(p - 2.0) * u;
        }
        g
    }

    /// −Δ_h u + (λ + V)u − |u|^{p−2}u at free nodes.
    pub fn el_residual(&self, lambda: f64) -> Vec<f64> {
        let mut g = self.energy_gradient();
        for &i in &self.space.free {
            g[i] += lambda * self.values[i];
        }
        g
    }

    /// Discrete H⁻¹ norm √⟨r, (−Δ_h + 1)^{−1} r⟩.
    pub fn dual_norm(&self, r: &[f64]) -> f64 {
        let z = self.space.helmholtz_solve(r, 1.0, 1e-10);
        (dot(r, &z) * self.space.dv()).max(0.0).sqrt()
    }

    pub fn energy(&self) -> EnergyReport {
        let e = self.energy_parts();
        let lambda = e.lambda(self.space.params.p);
        let r = self.el_residual(lambda);
        EnergyReport {
            kinetic: e.kinetic,
            potential_term: e.potential_term,
            nonlinear: e.nonlinear,
            total: e.total(),
            lambda_est: lambda,
            residual_norm: self.dual_norm(&r),
            mass_sq: e.mass_sq,
        }
    }

    pub fn project_mass(&self, rho: f64) -> Result<GridField> {
        let m = self.mass_sq().sqrt();
        if m == 0.0 {
            return Err(Error::ZeroField);
        }
        let f = rho / m;
        Ok(GridField { space: Arc::clone(&self.space), values: self.values.iter().map(|v| v * f).collect() })
    }

    pub fn barycenter(&self) -> Result<Vec<f64>> {
        Ok(self.barycenter_parts()?.beta)
    }

    fn barycenter_parts(&self) -> Result<BaryParts> {
        let sp = &self.space;
        let n = sp.len();
        let mut mu = vec![0.0; n];
        sp.ball_average(&self.values, &mut mu);
        let (mut imax, mut mmax) = (0, f64::MIN);
        for (i, &v) in mu.iter().enumerate() {
            if v > mmax {
                mmax = v;
                imax = i;
            }
        }
        if !(mmax > 0.0) {
            return Err(Error::ZeroField);
        }
        let nd = sp.grid.dim();
        let mut beta = vec![0.0; nd];
        let mut total = 0.0;
        let mut x = vec![0.0; nd];
        let half = 0.5 * mmax;
        for (i, &m) in mu.iter().enumerate() {
            let hat = m - half;
            if hat > 0.0 {
                sp.grid.point(i, &mut x);
                total += hat;
                for a in 0..nd {
                    beta[a] += hat * x[a];
                }
            }
        }
        for b in beta.iter_mut() {
            *b /= total;
        }
        Ok(BaryParts { beta, mu, imax, half, total })
    }

    /// β(u) and the L² gradient of ½|β(u) − target|².
    pub fn barycenter_penalty_gradient(&self, target: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let sp = &self.space;
        let bp = self.barycenter_parts()?;
        let nd = sp.grid.dim();
        let n = sp.len();
        let diff: Vec<f64> = bp.beta.iter().zip(target).map(|(b, t)| b - t).collect();
        // g_l = (β − β*)·∂β/∂μ_l
        let mut g = vec![0.0; n];
        let mut x = vec![0.0; nd];
        let mut corr = 0.0;
        for (i, &m) in bp.mu.iter().enumerate() {
            if m - bp.half > 0.0 {
                sp.grid.point(i, &mut x);
                let v: f64 = (0..nd).map(|a| diff[a] * (x[a] - bp.beta[a])).sum::<f64>() / bp.total;
                g[i] = v;
                corr += v;
            }
        }
        g[bp.imax] -= 0.5 * corr;
        // adjoint of the ball average is the same average
        let mut conv = vec![0.0; n];
        let k = sp.ball.len() as f64;
        let nd = sp.grid.dim();
        let mut mi = vec![0usize; nd];
        for &j in &sp.free {
            sp.grid.multi_index(j, &mut mi);
            let mut s = 0.0;
            'o: for off in &sp.ball {
                let mut l = 0isize;
                for a in 0..nd {
                    let c = mi[a] as isize + off[a];
                    if c < 0 || c >= sp.grid.dims[a] as isize {
                        continue 'o;
                    }
                    l += c * sp.grid.strides()[a] as isize;
                }
                s += g[l as usize];
            }
            let u = self.values[j];
            conv[j] = if u > 0.0 { s / k } else if u < 0.0 { -s / k } else { 0.0 } / sp.dv();
        }
        Ok((bp.beta, conv))
    }

    pub fn sign_classify(&self, ctx: Option<&SignContext>) -> SignReport {
        let mx = self.values.iter().cloned().fold(f64::MIN, f64::max);
        let mn = self.values.iter().cloned().fold(f64::MAX, f64::min);
        let floor = 1e-8 * mx.abs().max(mn.abs());
        let class = if mn >= -floor || mx <= floor { SignClass::ConstantSign } else { SignClass::SignChanging };
        let mut checks = None;
        if class == SignClass::SignChanging {
            if let Some(c) = ctx {
                let e = self.total_energy();
                let lam = self.lagrange_multiplier();
                let mass = self.mass_sq();
                let w_mass = c.unit_lambda_mass_sq * lam.max(0.0).powf(1.0 / c.s);
                checks = Some(SignChecks {
                    energy: e,
                    energy_above_threshold: e > c.two_minus_s_m,
                    mass_sq: mass,
                    soliton_mass_sq: w_mass,
                    mass_above_double: mass > 2.0 * w_mass,
                });
            }
        }
        SignReport { class, min: mn, max: mx, floor, checks }
    }

    /// Serialize in the flat binary layout read back by [`read_snapshot`].
    pub fn snapshot_bytes(&self) -> Vec<u8> {
        let g = &self.space.grid;
        let mut b = Vec::with_capacity(64 + 8 * self.values.len());
        b.extend_from_slice(SNAPSHOT_MAGIC);
        b.extend_from_slice(&(g.dim() as u32).to_le_bytes());
        for &n in &g.dims {
            b.extend_from_slice(&(n as u64).to_le_bytes());
        }
        b.extend_from_slice(&g.h.to_le_bytes());
        for &l in &g.lower {
            b.extend_from_slice(&l.to_le_bytes());
        }
        let runs = run_lengths(&self.space.mask);
        b.extend_from_slice(&(runs.len() as u64).to_le_bytes());
        for r in runs {
            b.extend_from_slice(&(r as u64).to_le_bytes());
        }
        for v in &self.values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    /// `coordinate,value` rows along `axis` through the node nearest the origin.
    pub fn axis_slice_csv(&self, axis: usize) -> String {
        let g = &self.space.grid;
        let origin = g.nearest(&vec![0.0; g.dim()]);
        let mut mi = vec![0usize; g.dim()];
        g.multi_index(origin, &mut mi);
        let mut s = String::from("x,u\n");
        for i in 0..g.dims[axis] {
            let idx = origin - mi[axis] * g.strides()[axis] + i * g.strides()[axis];
            let _ = writeln!(s, "{:e},{:e}", g.coord(axis, i), self.values[idx]);
        }
        s
    }
}

struct BaryParts {
    beta: Vec<f64>,
    mu: Vec<f64>,
    imax: usize,
    half: f64,
    total: f64,
}

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"NSFIELD1";

fn run_lengths(mask: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut cur = false;
    let mut len = 0;
    for &m in mask {
        if m == cur {
            len += 1;
        } else {
            runs.push(len);
            cur = m;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

/// Decoded snapshot: grid, mask and values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub mask: Vec<bool>,
    pub values: Vec<f64>,
}

pub fn read_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    let mut pos = 0;
    let mut take = |n: usize| -> Result<&[u8]> {
        if pos + n > bytes.len() {
            return Err(Error::Format("truncated snapshot".into()));
        }
        let s = &bytes[pos..pos + n];
        pos += n;
        Ok(s)
    };
    if take(8)? != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    let nd = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut dims = Vec::new();
    for _ in 0..nd {
        dims.push(u64_at(take(8)?) as usize);
    }
    let h = f64_at(take(8)?);
    let mut lower = Vec::new();
    for _ in 0..nd {
        lower.push(f64_at(take(8)?));
    }
    let nruns = u64_at(take(8)?) as usize;
    let mut mask = Vec::new();
    let mut cur = false;
    for _ in 0..nruns {
        let r = u64_at(take(8)?) as usize;
        mask.extend(std::iter::repeat(cur).take(r));
        cur = !cur;
    }
    let n: usize = dims.iter().product();
    if mask.len() != n {
        return Err(Error::Format("mask length does not match grid".into()));
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(f64_at(take(8)?));
    }
    Ok(Snapshot { grid: Grid::new(lower, dims, h), mask, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    ConstantSign,
    SignChanging,
}

/// Reference data for the sign-changing checks: 2^{−s}m and the soliton mass at λ = 1.
#[derive(Debug, Clone, Copy)]
pub struct SignContext {
    pub two_minus_s_m: f64,
    pub s: f64,
    pub unit_lambda_mass_sq: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignChecks {
    pub energy: f64,
    pub energy_above_threshold: bool,
    pub mass_sq: f64,
    pub soliton_mass_sq: f64,
    pub mass_above_double: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignReport {
    pub class: SignClass,
    pub min: f64,
    pub max: f64,
    pub floor: f64,
    pub checks: Option<SignChecks>,
}
