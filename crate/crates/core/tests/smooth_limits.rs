mod common;

use common::rel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stepforce_core::regularized::{route_b_sweep, DEFAULT_EPSILONS, DEFAULT_HALF_LENGTH};
use stepforce_core::*;

fn limit(theory: Theory, e: f64, v0: f64, shape: Shape) -> Extrapolation {
    let sweep = route_b_sweep(
        theory,
        e,
        &PhysicalParams::natural(v0),
        shape,
        &DEFAULT_EPSILONS,
        DEFAULT_HALF_LENGTH,
        Resolution::default(),
    )
    .unwrap();
    assert!(sweep.points.iter().all(|p| p.defect <= 1e-8));
    extrapolate(&sweep.series().unwrap()).unwrap()
}

#[test]
fn route_b_matches_closed_form_for_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let (e, v0) = (rng.random_range(0.6..3.0), rng.random_range(0.1..0.5));
        let sharp = mean_force_closed(&solve_step_mode(Theory::Schrodinger, e, &PhysicalParams::natural(v0)).unwrap())
            .unwrap()
            .value;
        let x = limit(Theory::Schrodinger, e, v0, Shape::ErrorFunction);
        assert!(rel(x.limit, sharp) <= 1e-3, "S {e} {v0}: {} vs {sharp}", x.limit);

        let (e, v0) = (rng.random_range(1.5..4.0), rng.random_range(0.1..0.4));
        let sharp = mean_force_closed(&solve_step_mode(Theory::Dirac, e, &PhysicalParams::natural(v0)).unwrap())
            .unwrap()
            .value;
        let x = limit(Theory::Dirac, e, v0, Shape::LinearRamp);
        assert!(rel(x.limit, sharp) <= 1e-3, "D {e} {v0}: {} vs {sharp}", x.limit);
    }
}

#[test]
fn kfg_limit_is_shape_independent_and_matches_midpoint() {
    let limits: Vec<f64> = Shape::ALL
        .iter()
        .map(|&s| limit(Theory::KleinGordon, 2.0, 0.5, s).limit)
        .collect();
    for pair in limits.windows(2) {
        assert!(rel(pair[0], pair[1]) <= 1e-3, "{limits:?}");
    }
    let mode = solve_step_mode(Theory::KleinGordon, 2.0, &PhysicalParams::natural(0.5)).unwrap();
    let midpoint = -0.5 * delta_conventions(&mode).unwrap().midpoint;
    assert!(rel(limits[0], midpoint) <= 5e-3);
    assert!(rel(limits[0], mean_force_closed(&mode).unwrap().value) > 1.0);
}

#[test]
fn smooth_density_approaches_one_sided_values() {
    let params = PhysicalParams::natural(0.5);
    let sharp = solve_step_mode(Theory::KleinGordon, 2.0, &params).unwrap();
    let probe = density_probe(&sharp).unwrap();
    let errors: Vec<(f64, f64)> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&eps| {
            let reg = RegularizedPotential::new(params, eps, Shape::ErrorFunction).unwrap();
            let m = solve_smooth_mode(Theory::KleinGordon, 2.0, &reg, 20.0, Resolution::default()).unwrap();
            (
                (m.density_at(-5.0 * eps).unwrap() - probe.rho_left).abs(),
                (m.density_at(5.0 * eps).unwrap() - probe.rho_right).abs(),
            )
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1].0 < w[0].0 && w[1].1 < w[0].1, "{errors:?}");
    }
}

#[test]
fn propagators_conserve_flux() {
    for theory in Theory::ALL {
        let e = if theory == Theory::Schrodinger { 1.0 } else { 2.0 };
        let reg = RegularizedPotential::new(PhysicalParams::natural(0.5), 0.0125, Shape::Logistic).unwrap();
        let m = solve_smooth_mode(theory, e, &reg, 20.0, Resolution::default()).unwrap();
        assert!(m.det_defect <= 1e-10 && m.defect <= 1e-10, "{theory}");
    }
}

#[test]
fn reflection_converges_to_sharp_value() {
    let params = PhysicalParams::natural(0.5);
    let sharp = solve_step_mode(Theory::Schrodinger, 1.0, &params).unwrap();
    let err = |eps: f64| {
        let reg = RegularizedPotential::new(params, eps, Shape::Logistic).unwrap();
        (solve_smooth_mode(Theory::Schrodinger, 1.0, &reg, 20.0, Resolution::default()).unwrap().r - sharp.r).norm()
    };
    let (a, b, c) = (err(0.1), err(0.05), err(0.025));
    assert!(b <= 0.55 * a && c <= 0.55 * b, "{a} {b} {c}");
}

#[test]
fn weak_product_check_converges() {
    let devs: Vec<f64> = [1e-3, 5e-4, 2.5e-4]
        .iter()
        .map(|&eps| {
            let reg = RegularizedPotential::new(PhysicalParams::natural(1e4), eps, Shape::Logistic).unwrap();
            force::a3_weak_product_check(1.0, &reg, 0.05, 20.0, Resolution::default())
                .unwrap()
                .deviation
        })
        .collect();
    assert!(devs[0] <= 0.05);
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extrapolation_recovers_power_laws(a in -5.0f64..5.0, b in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
                                         p in 0.6f64..2.9) {
        let eps: Vec<f64> = DEFAULT_EPSILONS.to_vec();
        let values = eps.iter().map(|e| a + b * e.powf(p)).collect();
        let x = extrapolate(&ConvergenceSeries::new(eps, values).unwrap()).unwrap();
        prop_assert!((x.order - p).abs() < 1e-6);
        prop_assert!((x.limit - a).abs() < 1e-9 * (1.0 + a.abs() + b.abs()));
    }
}
