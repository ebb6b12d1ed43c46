//! Loss-of-compactness diagnostics on sequences of fields.

use serde::Serialize;

use super::Problem;
use crate::error::{Error, Result};
use crate::field::GridField;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EscapeOptions {
    /// radius of the balls in which bump masses are measured
    pub ball_radius: f64,
    /// a bump counts when its ball carries at least this fraction of the mass
    pub bump_fraction: f64,
    /// net motion needed before a drift or a separation counts
    pub min_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EscapeLabel {
    Compact,
    /// a single bump whose center runs away
    Translation,
    /// two bumps carrying mass that separate
    Dichotomy,
}

#[derive(Debug, Clone, Serialize)]
pub struct BumpSnapshot {
    pub centers: Vec<Vec<f64>>,
    /// fraction of the total mass in each ball
    pub ball_masses: Vec<f64>,
    pub energy: f64,
    pub beta_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeReport {
    pub label: EscapeLabel,
    /// energy of the last iterate
    pub level: f64,
    pub separations: Vec<f64>,
    pub displacement: f64,
    pub snapshots: Vec<BumpSnapshot>,
}

fn bumps(u: &GridField, opts: &EscapeOptions) -> Result<BumpSnapshot> {
    let sp = &u.space;
    let g = &sp.grid;
    let nd = g.dim();
    let total = u.mass_sq();
    if total == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut x = vec![0.0; nd];
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut masses = Vec::new();
    let r2 = opts.ball_radius * opts.ball_radius;
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>();
    for _ in 0..2 {
        let mut best: Option<(usize, f64)> = None;
        for &i in &sp.free {
            let v = u.values[i].abs();
            if best.is_some_and(|(_, b)| v <= b) {
                continue;
            }
            g.point(i, &mut x);
            if centers.iter().any(|c| dist2(c, &x) <= 4.0 * r2) {
                continue;
            }
            best = Some((i, v));
        }
        let Some((i, _)) = best else { break };
        let mut peak = vec![0.0; nd];
        g.point(i, &mut peak);
        let mut m = 0.0;
        let mut c = vec![0.0; nd];
        for &j in &sp.free {
            g.point(j, &mut x);
            if dist2(&peak, &x) <= r2 {
                let w = u.values[j] * u.values[j];
                m += w;
                c.iter_mut().zip(&x).for_each(|(a, b)| *a += w * b);
            }
        }
        c.iter_mut().for_each(|a| *a /= m);
        let frac = m * sp.dv() / total;
        if frac < opts.bump_fraction {
            break;
        }
        centers.push(c);
        masses.push(frac);
    }
    let beta_norm = u.barycenter()?.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(BumpSnapshot { centers, ball_masses: masses, energy: u.total_energy(), beta_norm })
}

/// Label an iterate sequence: separating bumps (dichotomy), a runaway single bump
/// (translation) or neither (compact).
pub fn ps_escape_diagnostic(iterates: &[GridField], opts: &EscapeOptions) -> Result<EscapeReport> {
    let snaps = iterates.iter().map(|u| bumps(u, opts)).collect::<Result<Vec<_>>>()?;
    let level = snaps.last().map_or(f64::NAN, |s| s.energy);
    let sep = |s: &BumpSnapshot| {
        if s.centers.len() == 2 {
            s.centers[0].iter().zip(&s.centers[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        } else {
            0.0
        }
    };
    let separations: Vec<f64> = snaps.iter().map(sep).collect();
    let mut label = EscapeLabel::Compact;
    let mut displacement = 0.0;
    if let (Some(first), Some(last)) = (snaps.first(), snaps.last()) {
        let tol = opts.min_drift;
        let growing = separations.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        if last.centers.len() == 2 && first.centers.len() == 2 && growing && separations[separations.len() - 1] - separations[0] > tol {
            label = EscapeLabel::Dichotomy;
        } else if let Some(a) = first.centers.first() {
            let disp: Vec<f64> = snaps
                .iter()
                .filter_map(|s| s.centers.first())
                .map(|b| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
                .collect();
            displacement = *disp.last().unwrap_or(&0.0);
            let steady = disp.windows(2).all(|w| w[1] >= w[0] - 1e-3 * tol);
            if displacement > tol && steady && last.centers.len() == 1 {
                label = EscapeLabel::Translation;
            }
        }
    }
    Ok(EscapeReport { label, level, separations, displacement, snapshots: snaps })
}

/// The two sequences whose energies sit at the ends of the compactness window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    /// w_{ρ²/2}(x − y e₁) + w_{ρ²/2}(x + y e₁), level 2^{−s}m
    TwoBump,
    /// w_{ρ²}(x − y e₁), level m
    Translated,
}

/// Fields of the sequence at offsets `ys`, projected onto S_ρ.
pub fn witness_sequence(problem: &Problem, kind: SequenceKind, ys: &[f64]) -> Result<Vec<GridField>> {
    let nd = problem.space.grid.dim();
    ys.iter()
        .map(|&y| {
            let mut c = vec![0.0; nd];
            c[0] = y;
            let v = match kind {
                SequenceKind::Translated => problem.soliton_values(1.0, &c, true),
                SequenceKind::TwoBump => {
                    let mut a = problem.soliton_values(0.5, &c, true);
                    c[0] = -y;
                    let b = problem.soliton_values(0.5, &c, true);
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                }
            };
            problem.space.field(v).project_mass(problem.rho())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub kind: SequenceKind,
    pub target: f64,
    pub values: Vec<f64>,
    pub fine_last: f64,
    /// bound on the O(h²) error of `fine_last` from the coarse/fine difference
    pub grid_error: f64,
    /// last increment of the sequence, bounding the remaining interaction
    pub tail_error: f64,
    pub bound: f64,
    pub deviation: f64,
    pub rel_bound: f64,
    pub within: bool,
}

/// Evaluate a sequence on `coarse`, repeat its last element on `fine` (spacing h/2), and
/// compare the fine value with the expected level.
pub fn sequence_level(coarse: &Problem, fine: &Problem, kind: SequenceKind, ys: &[f64]) -> Result<LevelCheck> {
    if ys.len() < 2 {
        return Err(Error::InvalidParams("need at least two offsets".into()));
    }
    let values: Vec<f64> = witness_sequence(coarse, kind, ys)?.iter().map(|u| u.total_energy()).collect();
    let fine_last = witness_sequence(fine, kind, &ys[ys.len() - 1..])?[0].total_energy();
    let target = match kind {
        SequenceKind::TwoBump => coarse.two_minus_s_m,
        SequenceKind::Translated => coarse.m,
    };
    let n = values.len();
    // two-grid bound: Richardson error |c-f|/3 of the fine value times a safety factor of 3
    let grid_error = (values[n - 1] - fine_last).abs();
    let tail_error = (values[n - 1] - values[n - 2]).abs();
    let bound = grid_error + tail_error + 1e-12 * target.abs();
    let deviation = (fine_last - target).abs();
    let rel_bound = bound / target.abs();
    Ok(LevelCheck {
        kind,
        target,
        values,
        fine_last,
        grid_error,
        tail_error,
        bound,
        deviation,
        rel_bound,
        within: deviation <= bound && rel_bound < 0.01,
    })
}
