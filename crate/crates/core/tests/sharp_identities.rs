mod common;

use common::{admissible, evanescent, rel};
use proptest::prelude::*;
use stepforce_core::force::kfg_density_tau3;
use stepforce_core::modes::{bc_residuals, fv_lift, fv_state};
use stepforce_core::*;

fn mode(theory: Theory, e: f64, v0: f64) -> ScatterMode {
    solve_step_mode(theory, e, &PhysicalParams::natural(v0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matching_and_flux(s in admissible(Theory::Schrodinger), k in admissible(Theory::KleinGordon),
                         d in admissible(Theory::Dirac)) {
        for (theory, (e, v0)) in [(Theory::Schrodinger, s), (Theory::KleinGordon, k), (Theory::Dirac, d)] {
            let m = mode(theory, e, v0);
            prop_assert!(m.continuity_residual() <= 1e-12, "{theory} {e} {v0}");
            prop_assert!(m.flux_residual() <= 1e-12, "{theory} {e} {v0}");
            let p = density_probe(&m).unwrap();
            prop_assert!(p.current_jump().abs() <= 1e-12 * p.current_left.abs().max(1.0));
            if theory != Theory::KleinGordon {
                prop_assert!(p.density_jump().abs() <= 1e-12 * p.rho_left.max(1.0));
            }
        }
    }

    #[test]
    fn evanescent_total_reflection(s in evanescent(Theory::Schrodinger), k in evanescent(Theory::KleinGordon),
                                   d in evanescent(Theory::Dirac)) {
        for (theory, (e, v0)) in [(Theory::Schrodinger, s), (Theory::KleinGordon, k), (Theory::Dirac, d)] {
            let m = mode(theory, e, v0);
            prop_assert_eq!(m.regime, Regime::Evanescent);
            prop_assert!((m.r.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn kfg_jump_conditions((e, v0) in admissible(Theory::KleinGordon)) {
        let m = mode(Theory::KleinGordon, e, v0);
        let res = bc_residuals(&fv_lift(&m).unwrap(), &m.params);
        prop_assert!(res.max() <= 1e-12, "{res:?}");

        let psi0 = m.scalar(Location::ZeroMinus).unwrap().0.norm_sqr();
        let jump = kfg_density_jump(&m).unwrap();
        prop_assert!((jump.jump + v0 * psi0).abs() <= 1e-12 * psi0.max(1.0) * v0.abs().max(1.0));

        let delta = delta_conventions(&m).unwrap();
        prop_assert!(rel(delta.half_jump, -0.5 * v0 * psi0) <= 1e-12);

        for loc in [Location::ZeroMinus, Location::ZeroPlus, Location::At(-0.7), Location::At(1.3)] {
            let a = density(&m, loc, 0.0).unwrap();
            let b = kfg_density_tau3(&m, loc, 0.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn kfg_force_identities((e, v0) in admissible(Theory::KleinGordon)) {
        let m = mode(Theory::KleinGordon, e, v0);
        let f = mean_force_closed(&m).unwrap();
        prop_assert!(rel(f.value, f.psi_form.unwrap()) <= 1e-12);

        let rep = boundary_terms(&m).unwrap();
        prop_assert!(rep.relative_identity_residual() <= 1e-12, "{rep:?}");
        let p = density_probe(&m).unwrap();
        let mass = rep.route_c_terms.mass;
        prop_assert!(rel(mass, -0.5 * v0 * (p.rho_left + p.rho_right)) <= 1e-12);
        let scale = fv_state(&m, Location::ZeroMinus).unwrap().1.norm_squared();
        prop_assert!(rep.route_c_terms.kinetic.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn schrodinger_and_dirac_identities(s in admissible(Theory::Schrodinger), d in admissible(Theory::Dirac)) {
        for (theory, (e, v0)) in [(Theory::Schrodinger, s), (Theory::Dirac, d)] {
            let rep = boundary_terms(&mode(theory, e, v0)).unwrap();
            prop_assert!(rep.relative_identity_residual() <= 1e-12, "{rep:?}");
        }
    }

    #[test]
    fn density_is_stationary((e, v0) in admissible(Theory::Dirac), t in -50.0f64..50.0) {
        let m = mode(Theory::Dirac, e, v0);
        let a = density(&m, Location::At(0.3), 0.0).unwrap();
        let b = density(&m, Location::At(0.3), t).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

#[test]
fn flagship_values() {
    let s = mode(Theory::Schrodinger, 1.0, 0.5);
    assert!((mean_force_closed(&s).unwrap().value + 0.6862915).abs() < 1e-7);
    let k = mode(Theory::KleinGordon, 2.0, 0.5);
    assert!((kfg_density_jump(&k).unwrap().jump + 0.7386449).abs() < 1e-6);
    assert!((mean_force_closed(&k).unwrap().value - 0.1846612).abs() < 1e-6);
    let d = mode(Theory::Dirac, 2.0, 0.5);
    assert!((d.r.re - 0.1270167).abs() < 1e-7);
    assert!((mean_force_closed(&d).unwrap().value + 0.7621000).abs() < 1e-7);
}

#[test]
fn below_threshold_is_rejected() {
    let err = solve_step_mode(Theory::KleinGordon, 0.5, &PhysicalParams::natural(0.1)).unwrap_err();
    assert!(err.to_string().contains("E > mc^2"), "{err}");
    assert!(solve_step_mode(Theory::Dirac, -2.0, &PhysicalParams::natural(0.1)).is_err());
    assert!(solve_step_mode(Theory::Schrodinger, 0.0, &PhysicalParams::natural(0.1)).is_err());
}

#[test]
fn kfg_klein_resonance_stays_accurate() {
    for v0 in [3.9, 3.99, 3.999999] {
        let m = mode(Theory::KleinGordon, 2.0, v0);
        assert_eq!(m.regime, Regime::Klein);
        assert!(m.r.norm() > 1.0);
        assert!(m.flux_residual() <= 1e-13, "{v0}");
        assert!(boundary_terms(&m).unwrap().relative_identity_residual() <= 1e-13, "{v0}");
        assert!(m.continuity_residual() <= 1e-13, "{v0}");
    }
}
