//! Small special-function helpers.

use std::f64::consts::PI;

/// Γ(n/2) for a positive integer n.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0);
    let mut g = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * x < n as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere in ℝⁿ (ω₁ = 2, ω₂ = 2π, ω₃ = 4π).
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Volume of the unit ball in ℝⁿ.
pub fn ball_volume(n: usize) -> f64 {
    sphere_area(n) / n as f64
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// ln K_ν(z) from the large-argument expansion, truncated at the smallest term.
///
/// Exact for half-integer ν. Otherwise the optimally truncated series has relative error of
/// order e^{−2z}, so it is meant for z ≳ 10.
pub fn ln_bessel_k(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for j in 1..40 {
        let k = (2 * j - 1) as f64;
        term *= (mu - k * k) / (j as f64 * 8.0 * z);
        if term == 0.0 {
            break;
        }
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
    }
    0.5 * (PI / (2.0 * z)).ln() - z + sum.ln()
}

pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_half_integer_is_exact() {
        let z = 3.0_f64;
        let k = (PI / (2.0 * z)).sqrt() * (-z).exp();
        assert!((ln_bessel_k(0.5, z) - k.ln()).abs() < 1e-14);
        let k32 = k * (1.0 + 1.0 / z);
        assert!((ln_bessel_k(1.5, z) - k32.ln()).abs() < 1e-14);
    }

    #[test]
    fn bessel_k0_reference() {
        // K_0(10) = 1.778006231616765e-5
        let v = ln_bessel_k(0.0, 10.0).exp();
        assert!((v / 1.778006231616765e-5 - 1.0).abs() < 1e-8);
    }
}
