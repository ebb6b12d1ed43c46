//! Dormand-Prince 5(4) with embedded error control.

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// Adaptive Dormand-Prince integrator over a fixed-size state.
///
/// The last accepted step size is kept between calls so that integrating node-to-node along
/// a grid does not restart the step-size controller at every node.
#[derive(Debug, Clone)]
pub struct Dopri5<const D: usize> {
    pub tol: Tolerance,
    pub h: f64,
    pub max_steps: usize,
    pub evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<const D: usize> Dopri5<D> {
    pub fn new(tol: Tolerance, h0: f64) -> Self {
        Self { tol, h: h0, max_steps: 1_000_000, evals: 0 }
    }

    /// Advance `y` from `x0` to `x1` (x1 > x0). Returns false if the step budget ran out
    /// or the state became non-finite.
    pub fn integrate<F>(&mut self, f: &F, x0: f64, y: &mut [f64; D], x1: f64) -> bool
    where
        F: Fn(f64, &[f64; D]) -> [f64; D],
    {
        let mut x = x0;
        let mut h = self.h.min(x1 - x0);
        let mut k1 = f(x, y);
        self.evals += 1;
        let mut steps = 0;
        while x < x1 {
            if steps >= self.max_steps {
                return false;
            }
            steps += 1;
            let last = x + h >= x1;
            if last {
                h = x1 - x;
            }
            let stage = |c: &[(f64, &[f64; D])]| {
                let mut out = *y;
                for (a, k) in c {
                    for i in 0..D {
                        out[i] += h * a * k[i];
                    }
                }
                out
            };
            let k2 = f(x + C2 * h, &stage(&[(A21, &k1)]));
            let k3 = f(x + C3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * h, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                x + h,
                &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let ynew = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(x + h, &ynew);
            self.evals += 6;
            let mut err = 0.0_f64;
            for i in 0..D {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(ynew[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-300 {
                    return false;
                }
                continue;
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + h };
                *y = ynew;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= fac;
                if !last {
                    self.h = h;
                }
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        y.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let mut ig = Dopri5::<2>::new(Tolerance { rtol: 1e-12, atol: 1e-14 }, 0.1);
        let mut y = [1.0, 0.0];
        let f = |_x: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut x = 0.0;
        for _ in 0..100 {
            assert!(ig.integrate(&f, x, &mut y, x + 0.1));
            x += 0.1;
        }
        assert!((y[0] - 10.0_f64.cos()).abs() < 1e-10);
        assert!((y[1] + 10.0_f64.sin()).abs() < 1e-10);
    }
}
