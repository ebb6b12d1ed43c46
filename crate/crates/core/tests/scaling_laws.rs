use std::sync::OnceLock;

use normsol::ground_state::{fit_decay_constant, normalize_to_mass, shoot_radial, RadialProfile, ShootOptions};
use normsol::scaling::{
    decay_rate_d_rho, elementary_power_inequality, identity_residuals, max_split_energy, multiplier_identity,
    multiplier_identity_norms, multiplier_mass_exponent, pohozaev_nehari_residuals, scaled_profile,
    splitting_inequalities, ModelParams, ScalingConstants, SolutionNorms,
};
use proptest::prelude::*;

fn cubic_2d() -> &'static RadialProfile {
    static W: OnceLock<RadialProfile> = OnceLock::new();
    W.get_or_init(|| shoot_radial(2, 3.0, 1.0, &ShootOptions::default()).unwrap())
}

/// |w|₂² = 4, |w'|₂² = 4/3, |w|₄⁴ = 16/3 for w = √2 sech x.
fn sech_norms() -> SolutionNorms {
    SolutionNorms { dim: 1, p: 4.0, lambda: 1.0, mass_sq: 4.0, grad_sq: 4.0 / 3.0, p_norm: 16.0 / 3.0, energy: -2.0 / 3.0 }
}

#[test]
fn sech_quarter_mass_energy() {
    let (_, w) = normalize_to_mass(1, 4.0, 2.0, &ShootOptions::default()).unwrap();
    let q = scaled_profile(&w, 0.25).unwrap();
    assert!((q.energy + 1.0 / 96.0).abs() < 1e-9, "{}", q.energy);
    assert!((q.mass_sq - 1.0).abs() < 1e-8);
    assert!((q.lambda - 1.0 / 16.0).abs() < 1e-9);
    assert!(scaled_profile(&w, 0.0).is_err());
    let same = scaled_profile(&w, 1.0).unwrap();
    assert_eq!(same.energy, w.energy);
    assert_eq!(same.lambda, w.lambda);
}

#[test]
fn half_mass_in_two_dimensions() {
    let w = cubic_2d();
    let h = w.rescaled(0.5);
    assert!((h.energy / w.energy - 0.25).abs() < 1e-12);
    assert!((h.lambda / w.lambda - 0.5).abs() < 1e-12);
    let r = pohozaev_nehari_residuals(&h);
    assert!(r.nehari_res.abs() < 1e-8 && r.pohozaev_res.abs() < 1e-8);
    let m = multiplier_identity(&h);
    assert!(m.rel < 1e-8 && m.mass_rel < 1e-8);
}

#[test]
fn sech_identities_closed_form() {
    let q = sech_norms();
    let r = identity_residuals(&q);
    assert!(r.nehari_res.abs() < 1e-15 && r.pohozaev_res.abs() < 1e-15 && r.energy_res.abs() < 1e-15);
    let m = multiplier_identity_norms(&q);
    assert!((m.lhs - 2.0).abs() < 1e-15 && (m.rhs - 2.0).abs() < 1e-15);
    assert!((m.mass_rhs - 4.0).abs() < 1e-14);
    // u ↦ 1.1u breaks Nehari
    let f: f64 = 1.1;
    let bad = SolutionNorms {
        grad_sq: q.grad_sq * f * f,
        mass_sq: q.mass_sq * f * f,
        p_norm: q.p_norm * f.powi(4),
        energy: 0.5 * q.grad_sq * f * f - q.p_norm * f.powi(4) / 4.0,
        ..q
    };
    assert!(identity_residuals(&bad).nehari_res.abs() > 1e-2);
}

/// λ at mass ρ² over λ at mass 1, both shot independently, grows like (ρ²)^s.
#[test]
fn multiplier_mass_exponent_is_two_s() {
    for &(n, p) in &[(1, 4.0), (2, 3.0), (3, 3.0)] {
        let s = ScalingConstants::new(n, p).unwrap().s;
        let (l1, _) = normalize_to_mass(n, p, 1.0, &ShootOptions::default()).unwrap();
        let rho = 1.7;
        let (lr, _) = normalize_to_mass(n, p, rho, &ShootOptions::default()).unwrap();
        let e = multiplier_mass_exponent(l1, lr, rho);
        assert!((e - 2.0 * s).abs() < 1e-7, "N={n}: exponent {e}, s = {s}");
    }
}

#[test]
fn d_rho_increases_with_mass() {
    let prm = ModelParams::new(2, 3.0, 1.0).unwrap();
    let mut prev = 0.0;
    for rho in [0.5, 1.0, 2.0, 4.0] {
        let d = decay_rate_d_rho(1.0, &prm.with_rho(rho).unwrap()).unwrap();
        assert!((d.d_rho - d.d_rho_alt).abs() < 1e-13 * d.d_rho);
        assert!(d.d_rho > prev);
        prev = d.d_rho;
    }
}

#[test]
fn decay_constants_scale() {
    let w = cubic_2d();
    let s = 1.0;
    let c1 = fit_decay_constant(w).unwrap().c1;
    for k in [0.25, 0.5] {
        let direct = shoot_radial(2, 3.0, k, &ShootOptions::default()).unwrap();
        let ck = fit_decay_constant(&direct).unwrap().c1;
        let want = k.powf(s * (1.0 - 0.25));
        assert!((ck / c1 / want - 1.0).abs() < 1e-3, "k={k}: {} vs {want}", ck / c1);
    }
}

#[test]
fn maximum_of_split_factor() {
    for s in [0.5, 1.0, 2.0, 3.5] {
        let (t, v) = max_split_energy(-1.0, s);
        assert!((t - 0.5).abs() < 1e-6);
        assert!((v + 2f64.powf(-s)).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn exponents_consistent(n in 1usize..6, f in 0.01f64..0.99) {
        let p = 2.0 + f * 4.0 / n as f64;
        let c = ScalingConstants::new(n, p).unwrap();
        prop_assert!(c.s > 0.0);
        prop_assert!((c.one_plus_s - c.one_plus_s_alt).abs() < 1e-12 * c.one_plus_s.max(1.0));
    }

    #[test]
    fn rescaling_composes(k1 in 0.1f64..2.0, k2 in 0.1f64..2.0, x in 0.0f64..15.0) {
        let w = cubic_2d();
        let a = w.rescaled(k1).rescaled(k2);
        let b = w.rescaled(k1 * k2);
        prop_assert!((a.eval(x) - b.eval(x)).abs() < 1e-8 * b.w0());
        prop_assert!((a.energy / b.energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_bound_holds(t in 0.0f64..=1.0 / 3.0, s in 1e-6f64..=4.0) {
        prop_assert!(splitting_inequalities(t, s).ok_1637);
    }

    #[test]
    fn split_concavity_holds(t in 0.0f64..=1.0, s in 1e-6f64..=4.0) {
        prop_assert!(splitting_inequalities(t, s).ok_concavity);
    }

    #[test]
    fn power_inequality_slack(a in 0.0f64..10.0, b in 0.0f64..10.0, p in 2.0f64..6.0) {
        let scale = (a + b).powf(p).max(1.0);
        prop_assert!(elementary_power_inequality(a, b, p) >= -1e-12 * scale);
    }
}
