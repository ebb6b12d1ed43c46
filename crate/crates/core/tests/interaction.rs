use std::sync::OnceLock;

use normsol::ground_state::{fit_decay_constant, normalize_to_mass, RadialProfile, ShootOptions};
use normsol::interaction::{
    bl_limit, delta_t, estimate, estimates_to_csv, limit_constants, sigma_t, tau_t, LogRadial, SplitPair,
};

/// N = 2, p = 3 soliton at the mass where λ = 1.
fn unit_lambda() -> &'static (RadialProfile, f64) {
    static W: OnceLock<(RadialProfile, f64)> = OnceLock::new();
    W.get_or_init(|| {
        let w = normsol::ground_state::shoot_radial(2, 3.0, 1.0, &ShootOptions::default()).unwrap();
        let c1 = fit_decay_constant(&w).unwrap().c1;
        (w, c1)
    })
}

#[test]
fn delta_closed_form() {
    assert!((delta_t(9.0, 0.0, 1.0, 1.0, 3) - 1.0 / 9.0).abs() < 1e-15);
    assert!((delta_t(2.0, 0.25, 4.0, 2.0, 1) - (-2.0f64).exp()).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for r in [1.0, 2.0, 5.0, 10.0] {
        let d = delta_t(r, 0.3, 1.0, 1.0, 2);
        assert!(d > 0.0 && d < prev);
        prev = d;
    }
}

#[test]
fn zero_split_vanishes() {
    let (w, c1) = unit_lambda();
    let pair = SplitPair::new(w, 0.0).unwrap();
    let z = [-1.0, 0.0];
    assert_eq!(tau_t(10.0, &pair, &z, 1e-8).unwrap().value, 0.0);
    assert_eq!(sigma_t(10.0, &pair, &z, 1e-8).unwrap().value, 0.0);
    assert_eq!(limit_constants(&pair, &z, *c1).unwrap().c1t, 0.0);
}

#[test]
fn independent_of_point_on_sigma() {
    let (w, _) = unit_lambda();
    let pair = SplitPair::new(w, 0.3).unwrap();
    let a = tau_t(8.0, &pair, &[-1.0, 0.0], 1e-10).unwrap().value;
    let b = tau_t(8.0, &pair, &[1.0, 2.0], 1e-10).unwrap().value;
    let c = tau_t(8.0, &pair, &[1.0 + 2f64.sqrt(), -(2f64.sqrt())], 1e-10).unwrap().value;
    assert!((a / b - 1.0).abs() < 1e-8 && (a / c - 1.0).abs() < 1e-8, "{a} {b} {c}");
}

#[test]
fn tau_over_delta_converges() {
    let (w, c1) = unit_lambda();
    let pair = SplitPair::new(w, 0.3).unwrap();
    let z = [-1.0, 0.0];
    let rows: Vec<_> = [16.0, 20.0, 24.0].iter().map(|&r| estimate(r, &pair, &z, *c1, 1e-10).unwrap()).collect();
    let gaps: Vec<f64> = rows.iter().map(|e| (e.ratio_tau / e.c1t - 1.0).abs()).collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
    assert!(gaps[2] < 0.02, "{gaps:?}");
    assert!(rows.iter().all(|e| e.rel_error < 1e-6));
    let csv = estimates_to_csv(&rows);
    assert!(csv.starts_with("t,r,delta,tau,sigma,tau_over_delta,sigma_over_delta\n"));
    assert_eq!(csv.lines().count(), 4);
}

/// The same limit at a mass where λ ≠ 1: the constants carry the general-λ scaling.
#[test]
fn general_lambda_scaling() {
    let (_, w) = normalize_to_mass(2, 3.0, 2.0, &ShootOptions::default()).unwrap();
    let c1 = fit_decay_constant(&w).unwrap().c1;
    let pair = SplitPair::new(&w, 0.3).unwrap();
    let ell = 1.0 / w.lambda.sqrt();
    let z = [-1.0, 0.0];
    let e = estimate(24.0 * ell, &pair, &z, c1, 1e-10).unwrap();
    assert!((e.ratio_tau / e.c1t - 1.0).abs() < 0.02, "{} vs {}", e.ratio_tau, e.c1t);
}

#[test]
fn c1t_bounded_near_half() {
    let (w, c1) = unit_lambda();
    let z = [-1.0, 0.0];
    let v: Vec<f64> = [0.40, 0.45, 0.49, 0.499]
        .iter()
        .map(|&t| limit_constants(&SplitPair::new(w, t).unwrap(), &z, *c1).unwrap().c1t * (0.5 - t))
        .collect();
    let mut s = v.clone();
    s.sort_by(f64::total_cmp);
    assert!(s[3] <= 2.0 * s[2], "{v:?}");
    let half = limit_constants(&SplitPair::new(w, 0.5).unwrap(), &z, *c1).unwrap();
    assert!(half.c2t.is_finite() && half.c2t > 0.0);
}

#[test]
fn half_split_square_is_small() {
    let (w, _) = unit_lambda();
    let pair = SplitPair::new(w, 0.5).unwrap();
    let z = [-1.0, 0.0];
    let mut prev = f64::INFINITY;
    for r in [10.0, 15.0, 20.0, 25.0, 30.0] {
        let t = tau_t(r, &pair, &z, 1e-10).unwrap().value;
        let q = t * t / delta_t(r, 0.5, 1.0, 1.0, 2);
        assert!(q < prev, "r={r}");
        prev = q;
    }
}

/// g = e^{−|x|}, h = e^{−2|x|} on the line: ∫g(x + r)h(x)dx·e^{r} = 4/3 − (2/3)e^{−r} exactly.
#[test]
fn one_dim_limit_against_closed_form() {
    let g = |x: f64| -x;
    let h = |x: f64| -2.0 * x;
    let gl = LogRadial { ln: &g, rate: 1.0 };
    let hl = LogRadial { ln: &h, rate: 2.0 };
    let r_seq = [8.0, 12.0, 16.0, 20.0, 24.0];
    let b = bl_limit(1, gl, hl, 1.0, 0.0, 1.0, 1.0, &r_seq).unwrap();
    for &(r, v) in &b.scaled {
        let exact = 4.0 / 3.0 - 2.0 / 3.0 * (-r as f64).exp();
        assert!((v / exact - 1.0).abs() < 1e-8, "r={r}: {v} vs {exact}");
    }
    assert!((b.predicted - 4.0 / 3.0).abs() < 1e-9);
    assert!(b.rel_diff < 1e-4);
}

#[test]
fn limit_hypotheses_are_checked() {
    let g = |x: f64| -x;
    let gl = LogRadial { ln: &g, rate: 1.0 };
    let r_seq = [8.0, 12.0, 16.0];
    // ∫h e^{|x|} diverges for h = e^{−|x|}
    assert!(bl_limit(1, gl, gl, 1.0, 0.0, 1.0, 1.0, &r_seq).is_err());
    // compactly supported g: the limit is zero
    let bump = |x: f64| if x < 1.0 { 0.0 } else { -1e4 * x };
    let bl = LogRadial { ln: &bump, rate: 1e4 };
    let h = |x: f64| -2.0 * x;
    let hl = LogRadial { ln: &h, rate: 2.0 };
    let b = bl_limit(1, bl, hl, 1.0, 0.0, 0.0, 1.0, &r_seq).unwrap();
    assert!(b.extrapolated.abs() < 1e-12 && b.predicted == 0.0);
}
