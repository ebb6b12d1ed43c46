//! The two-soliton test surface ψ_r[t, z] and its energy table.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::Problem;
use crate::error::{Error, Result};
use crate::field::GridField;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceOptions {
    pub t_points: usize,
    pub sigma_points: usize,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self { t_points: 21, sigma_points: 64 }
    }
}

/// Discretization of Σ = ∂B₂(e₁). Two points for N = 1, uniform angles for N = 2 (starting
/// at z = 3e₁), an icosphere for N = 3 (42 or 162 vertices, whichever first reaches `n`).
pub fn sigma_mesh(dim: usize, n: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![-1.0], vec![3.0]],
        2 => (0..n).map(|k| z_of_angle(2.0 * PI * k as f64 / n as f64)).collect(),
        _ => {
            let level = if n <= 42 { 1 } else { 2 };
            icosphere(level)
                .into_iter()
                .map(|v| {
                    let mut z = vec![2.0 * v[0], 2.0 * v[1], 2.0 * v[2]];
                    z[0] += 1.0;
                    z.extend(std::iter::repeat(0.0).take(dim - 3));
                    z
                })
                .collect()
        }
    }
}

/// z(φ) = e₁ + 2(cos φ, sin φ).
pub fn z_of_angle(phi: f64) -> Vec<f64> {
    vec![1.0 + 2.0 * phi.cos(), 2.0 * phi.sin()]
}

fn icosphere(level: usize) -> Vec<[f64; 3]> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache = std::collections::BTreeMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]);
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let a = mid(f[0], f[1], &mut verts);
            let b = mid(f[1], f[2], &mut verts);
            let c = mid(f[2], f[0], &mut verts);
            next.extend([[f[0], a, c], [f[1], b, a], [f[2], c, b], [a, b, c]]);
        }
        faces = next;
    }
    verts
        .into_iter()
        .map(|v| {
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / n, v[1] / n, v[2] / n]
        })
        .collect()
}

/// Energies (and barycenters) of ψ_r[t, z] on a (t, z) grid.
#[derive(Debug, Clone, Serialize)]
pub struct TestSurface {
    pub r: f64,
    pub t_grid: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    /// `energy[i][j]` = E(ψ_r[t_i, z_j])
    pub energy: Vec<Vec<f64>>,
    pub beta: Vec<Vec<Vec<f64>>>,
}

impl Problem {
    /// ψ_r[t, z] = ρ·θ[w_{tρ²}(x − rz) + w_{(1−t)ρ²}(x − re₁)] / |…|₂.
    pub fn surface_field(&self, r: f64, t: f64, z: &[f64]) -> Result<GridField> {
        let dim = self.space.grid.dim();
        let cz: Vec<f64> = z.iter().map(|v| r * v).collect();
        let mut ce = vec![0.0; dim];
        ce[0] = r;
        let mut v = self.soliton_values(t, &cz, true);
        let b = self.soliton_values(1.0 - t, &ce, true);
        v.iter_mut().zip(&b).for_each(|(a, b)| *a += b);
        self.space.field(v).project_mass(self.rho())
    }

    pub fn surface_energy(&self, r: f64, t: f64, z: &[f64]) -> Result<f64> {
        Ok(self.surface_field(r, t, z)?.total_energy())
    }
}

pub fn build_surface(problem: &Problem, r: f64, opts: &SurfaceOptions) -> Result<TestSurface> {
    if opts.t_points < 2 {
        return Err(Error::InvalidParams("t grid needs at least two points".into()));
    }
    problem.check_grid()?;
    let dim = problem.space.grid.dim();
    let t_grid: Vec<f64> = (0..opts.t_points).map(|i| i as f64 / (opts.t_points - 1) as f64).collect();
    let sigma = sigma_mesh(dim, opts.sigma_points);
    let nz = sigma.len();
    let cells: Vec<Result<(f64, Vec<f64>)>> = (0..t_grid.len() * nz)
        .into_par_iter()
        .map(|k| {
            let u = problem.surface_field(r, t_grid[k / nz], &sigma[k % nz])?;
            Ok((u.total_energy(), u.barycenter()?))
        })
        .collect();
    let mut energy = vec![Vec::with_capacity(nz); t_grid.len()];
    let mut beta = vec![Vec::with_capacity(nz); t_grid.len()];
    for (k, c) in cells.into_iter().enumerate() {
        let (e, b) = c?;
        energy[k / nz].push(e);
        beta[k / nz].push(b);
    }
    Ok(TestSurface { r, t_grid, sigma, energy, beta })
}

impl TestSurface {
    /// Grid argmax; ties go to the smallest t, then the lexicographically smallest z.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for i in 0..self.t_grid.len() {
            for j in 0..self.sigma.len() {
                let e = self.energy[i][j];
                let b = self.energy[best.0][best.1];
                let better = e > b
                    || (e == b
                        && (i < best.0 || (i == best.0 && lex_less(&self.sigma[j], &self.sigma[best.1]))));
                if better {
                    best = (i, j);
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,z_index,z,energy,beta_norm\n");
        for (i, t) in self.t_grid.iter().enumerate() {
            for (j, z) in self.sigma.iter().enumerate() {
                let zs: Vec<String> = z.iter().map(|v| format!("{v:.6}")).collect();
                let bn = self.beta[i][j].iter().map(|v| v * v).sum::<f64>().sqrt();
                s.push_str(&format!("{t},{j},{},{:e},{:e}\n", zs.join(" "), self.energy[i][j], bn));
            }
        }
        s
    }
}

pub(crate) fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}
