//! Small dense solves and restarted GMRES.

/// Gaussian elimination with partial pivoting; overwrites its inputs.
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        let d = a[c][c];
        if d == 0.0 {
            continue;
        }
        for r in c + 1..n {
            let f = a[r][c] / d;
            if f == 0.0 {
                continue;
            }
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r][k] * x[k];
        }
        x[r] = if a[r][r] != 0.0 { s / a[r][r] } else { 0.0 };
    }
    x
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += α x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresStats {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Right-preconditioned restarted GMRES for A x = b, starting from x = 0.
pub fn gmres<A, M>(
    apply: A,
    precond: M,
    b: &[f64],
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<f64>, GmresStats)
where
    A: Fn(&[f64], &mut [f64]),
    M: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return (x, GmresStats { iterations: 0, rel_residual: 0.0, converged: true });
    }
    let mut total = 0;
    let mut r = b.to_vec();
    let mut tmp = vec![0.0; n];
    let mut rel = 1.0;
    while total < max_iter {
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= rel_tol {
            break;
        }
        let m = restart.min(max_iter - total);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for j in 0..m {
            let mut zj = vec![0.0; n];
            precond(&v[j], &mut zj);
            let mut w = vec![0.0; n];
            apply(&zj, &mut w);
            z.push(zj);
            for i in 0..=j {
                h[i][j] = dot(&w, &v[i]);
                axpy(-h[i][j], &v[i], &mut w);
            }
            // second pass of Gram-Schmidt for stability
            for i in 0..=j {
                let c = dot(&w, &v[i]);
                h[i][j] += c;
                axpy(-c, &v[i], &mut w);
            }
            h[j + 1][j] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if d == 0.0 {
                k_used = j;
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            total += 1;
            k_used = j + 1;
            rel = g[j + 1].abs() / bnorm;
            let hn = {
                let mut t = 0.0;
                for i in 0..n {
                    t += w[i] * w[i];
                }
                t.sqrt()
            };
            if rel <= rel_tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for k in i + 1..k_used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for i in 0..k_used {
            axpy(y[i], &z[i], &mut x);
        }
        apply(&x, &mut tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
        if k_used == 0 {
            break;
        }
    }
    let rel_true = norm(&r) / bnorm;
    (x, GmresStats { iterations: total, rel_residual: rel_true, converged: rel_true <= rel_tol * 10.0 || rel <= rel_tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve() {
        let mut a = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let mut b = vec![3.0, 5.0, 5.0];
        let x = solve_dense(&mut a, &mut b);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gmres_nonsymmetric() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = 3.0 * x[i] + if i > 0 { -x[i - 1] } else { 0.0 } + if i + 1 < n { 0.5 * x[i + 1] } else { 0.0 };
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, st) = gmres(apply, |v: &[f64], z: &mut [f64]| z.copy_from_slice(v), &b, 1e-12, 10, 500);
        assert!(st.converged);
        let mut y = vec![0.0; n];
        apply(&x, &mut y);
        for i in 0..n {
            assert!((y[i] - b[i]).abs() < 1e-10);
        }
    }
}
