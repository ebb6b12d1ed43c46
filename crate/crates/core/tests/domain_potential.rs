use std::f64::consts::PI;

use normsol::domain::{
    check_decay_condition, cutoff_theta, lq_norm, smallness_threshold_wholespace, Domain, ExteriorDomainSpec,
    PotentialForm, PotentialSpec, Verdict,
};
use normsol::ground_state::{normalize_to_mass, ShootOptions};
use normsol::scaling::ModelParams;
use proptest::prelude::*;

fn unit(n: usize, p: f64) -> normsol::ground_state::RadialProfile {
    normalize_to_mass(n, p, 1.0, &ShootOptions::default()).unwrap().1
}

#[test]
fn sech_threshold_value() {
    // 2(1 − 2^{−2})(2/3) / |w²|₁ with |w²|₁ = 4
    let prm = ModelParams::new(1, 4.0, 2.0).unwrap();
    let t = smallness_threshold_wholespace(f64::INFINITY, &prm, &unit(1, 4.0)).unwrap();
    assert!((t.bound_direct - 0.25).abs() < 1e-8, "{}", t.bound_direct);
    assert!((t.bound_power_law / t.bound_direct - 1.0).abs() < 1e-8);
    assert!((t.l - 0.125).abs() < 1e-8);
}

#[test]
fn threshold_in_mass() {
    for &(n, p) in &[(3, 3.0), (4, 2.5)] {
        let w = unit(n, p);
        let half = n as f64 / 2.0;
        let at = |q: f64, rho: f64| smallness_threshold_wholespace(q, &ModelParams::new(n, p, rho).unwrap(), &w).unwrap();
        let l0 = at(half, 1.0).l;
        for rho in [0.5, 2.0, 4.0] {
            let t = at(half, rho);
            assert!((t.l / l0 - 1.0).abs() < 1e-10, "N={n} rho={rho}");
            assert!((t.bound_direct / t.bound_power_law - 1.0).abs() < 1e-8);
        }
        for q in [half + 0.5, 2.0 * n as f64, f64::INFINITY] {
            let l: Vec<f64> = [0.01, 0.5, 1.0, 2.0, 4.0, 100.0].iter().map(|&r| at(q, r).l).collect();
            assert!(l.windows(2).all(|v| v[1] > v[0]), "q={q}: {l:?}");
            // L → 0 as ρ → 0 along the power law
            let e = at(q, 1.0).exponent;
            assert!(e > 0.0 && (l[0] / l[3] / (0.01f64 / 2.0).powf(e) - 1.0).abs() < 1e-8);
        }
    }
    assert!(smallness_threshold_wholespace(1.0, &ModelParams::new(2, 3.0, 1.0).unwrap(), &unit(2, 3.0)).is_err());
    let heavy = normalize_to_mass(2, 3.0, 2.0, &ShootOptions::default()).unwrap().1;
    assert!(smallness_threshold_wholespace(2.0, &ModelParams::new(2, 3.0, 2.0).unwrap(), &heavy).is_err());
}

#[test]
fn lq_norms_against_gaussian_integrals() {
    for n in 1..=3 {
        let g = PotentialSpec::new(PotentialForm::Gaussian { amplitude: 1.0, rate: 1.0 }, 2.0, vec![0.0; n]).unwrap();
        for q in [1.5, 2.0, 3.0] {
            let want = (PI / q).powf(n as f64 / (2.0 * q));
            assert!((lq_norm(&g, q, n).unwrap() / want - 1.0).abs() < 1e-9, "N={n} q={q}");
        }
    }
    // ∫ e^{−2r} 4πr² dr = π
    let e = PotentialSpec::new(PotentialForm::Exponential { amplitude: 1.0, rate: 1.0 }, 2.0, vec![0.0; 3]).unwrap();
    assert!((lq_norm(&e, 2.0, 3).unwrap() - PI.sqrt()).abs() < 1e-9);
}

#[test]
fn decay_condition_verdicts() {
    let e = |rate| PotentialSpec::new(PotentialForm::Exponential { amplitude: 2.0, rate }, 2.0, vec![0.0; 1]).unwrap();
    // N = 1: ∫ 2e^{−a|x|}e^{d|x|} dx = 4/(a − d)
    let c = check_decay_condition(&e(3.0), 1.0, 1);
    assert_eq!(c.verdict, Verdict::Converges);
    assert!((c.integral - 2.0).abs() < 1e-8, "{}", c.integral);
    assert_eq!(check_decay_condition(&e(1.0), 1.0, 1).verdict, Verdict::Diverges);
    let b = PotentialSpec::new(PotentialForm::Bump { amplitude: 1.0, radius: 2.0 }, 2.0, vec![0.0; 3]).unwrap();
    assert_eq!(check_decay_condition(&b, 50.0, 3).verdict, Verdict::Converges);
}

#[test]
fn whole_space_spec() {
    let d = ExteriorDomainSpec::ball(0.0, Some(5.0)).unwrap();
    assert!(d.is_whole_space());
    let b = ExteriorDomainSpec::ball(2.0, None).unwrap();
    assert_eq!(b.hole_radius, 2.0);
    assert!(b.cutoff_r > 3.0);
    assert!(ExteriorDomainSpec::ball(-1.0, None).is_err());
}

proptest! {
    #[test]
    fn theta_profile(r_obs in 0.2f64..3.0, gap in 1.01f64..4.0, x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let spec = ExteriorDomainSpec::ball(r_obs, Some(r_obs + gap)).unwrap();
        let d = Domain::Exterior(spec);
        let r = (x * x + y * y).sqrt();
        let v = cutoff_theta(&[x, y], &d);
        prop_assert!((0.0..=1.0).contains(&v));
        if r >= spec.cutoff_r { prop_assert_eq!(v, 1.0); }
        if r <= r_obs { prop_assert_eq!(v, 0.0); }
        let s = 1.01;
        prop_assert!(cutoff_theta(&[s * x, s * y], &d) >= v);
    }

    #[test]
    fn decay_monotone_in_rate(a in 0.5f64..5.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0) {
        let v = PotentialSpec::new(PotentialForm::Exponential { amplitude: 1.0, rate: a }, 2.0, vec![0.0; 2]).unwrap();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        if check_decay_condition(&v, hi, 2).verdict == Verdict::Converges {
            prop_assert_eq!(check_decay_condition(&v, lo, 2).verdict, Verdict::Converges);
        }
    }
}
