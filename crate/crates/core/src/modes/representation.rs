//! Dirac modes in an arbitrary representation of the (alpha, beta) algebra.

use serde::Serialize;

use super::{
    dispersion, incident_wavenumber, solve_step_mode, DiracSpinors, Location, Mat2, MatrixSet,
    ScatterMode, Theory, Vec2,
};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::C64;

fn null_vector(a: &Mat2) -> Vec2 {
    let from_top = Vec2::new(-a[(0, 1)], a[(0, 0)]);
    let from_bottom = Vec2::new(-a[(1, 1)], a[(1, 0)]);
    if from_top.norm() >= from_bottom.norm() {
        from_top
    } else {
        from_bottom
    }
}

/// Plane-wave spinor u with (hbar c k alpha + mc^2 beta + phi) u = E u.
///
/// Normalized so that its (1 + beta)/2 projection has unit length with a
/// real positive dominant entry; in the default representation this is
/// `[1, hbar c k / (E - phi + mc^2)]`.
fn plane_wave_spinor(
    set: &MatrixSet,
    k: C64,
    energy: f64,
    phi: f64,
    params: &PhysicalParams,
) -> Vec2 {
    let hc = params.hbar() * params.c();
    let a = set.alpha * (k * hc) + set.beta * C64::from(params.rest_energy())
        - Mat2::identity() * C64::from(energy - phi);
    let u = null_vector(&a);
    let upper = (Mat2::identity() + set.beta) * u * C64::from(0.5);
    let (reference, scale) = if upper.norm() > 1e-12 * u.norm() {
        (upper, upper.norm())
    } else {
        (u, u.norm())
    };
    let pivot = if reference[0].norm() >= reference[1].norm() {
        reference[0]
    } else {
        reference[1]
    };
    let phase = pivot.conj() / pivot.norm();
    u * (phase / scale)
}

/// Dirac step mode solved by matching plane-wave spinors of `set`.
pub fn solve_dirac_mode(
    energy: f64,
    params: &PhysicalParams,
    set: &MatrixSet,
) -> Result<ScatterMode> {
    set.validate()?;
    let k = incident_wavenumber(Theory::Dirac, energy, params)?;
    let trans = dispersion(Theory::Dirac, energy, params.v0(), params);
    let incident = plane_wave_spinor(set, k, energy, 0.0, params);
    let reflected = plane_wave_spinor(set, -k, energy, 0.0, params);
    let transmitted = plane_wave_spinor(set, trans.value, energy, params.v0(), params);

    // r u_ref - t u_trans = -u_inc
    let (a00, a01) = (reflected[0], -transmitted[0]);
    let (a10, a11) = (reflected[1], -transmitted[1]);
    let (b0, b1) = (-incident[0], -incident[1]);
    let det = a00 * a11 - a01 * a10;
    if det.norm() == 0.0 {
        return Err(Error::InvalidMatrixSet("degenerate matching system".into()));
    }
    let r = (b0 * a11 - a01 * b1) / det;
    let t = (a00 * b1 - a10 * b0) / det;

    Ok(ScatterMode {
        theory: Theory::Dirac,
        energy,
        k,
        q: trans.value,
        r,
        t,
        regime: trans.regime,
        params: *params,
        dirac: Some(DiracSpinors {
            alpha: set.alpha,
            beta: set.beta,
            incident,
            reflected,
            transmitted,
        }),
    })
}

/// Representation-independent observables of a Dirac mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracObservables {
    pub reflection: f64,
    pub transmission: f64,
    pub density_at_origin: f64,
}

impl DiracObservables {
    pub fn of(mode: &ScatterMode) -> Result<Self> {
        let at_origin = mode.spinor(Location::ZeroMinus)?;
        Ok(Self {
            reflection: mode.r.norm_sqr(),
            transmission: mode.t.norm_sqr(),
            density_at_origin: at_origin.norm_squared(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationComparison {
    pub default: DiracObservables,
    pub alternate: DiracObservables,
    pub max_difference: f64,
}

/// Compare the closed-form default-representation mode with the mode
/// matched in `alt`.
pub fn representation_swap_check(
    energy: f64,
    params: &PhysicalParams,
    alt: &MatrixSet,
) -> Result<RepresentationComparison> {
    alt.validate()?;
    let default = DiracObservables::of(&solve_step_mode(Theory::Dirac, energy, params)?)?;
    let alternate = DiracObservables::of(&solve_dirac_mode(energy, params, alt)?)?;
    let max_difference = (default.reflection - alternate.reflection)
        .abs()
        .max((default.transmission - alternate.transmission).abs())
        .max((default.density_at_origin - alternate.density_at_origin).abs());
    Ok(RepresentationComparison {
        default,
        alternate,
        max_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation() -> Mat2 {
        let (s, c) = 0.3f64.sin_cos();
        Mat2::new(
            C64::new(c, 0.0),
            C64::new(0.0, s),
            C64::new(0.0, s),
            C64::new(c, 0.0),
        ) * C64::from_polar(1.0, 0.7)
    }

    #[test]
    fn generic_solver_reproduces_closed_form() {
        let p = PhysicalParams::natural(0.5);
        let closed = solve_step_mode(Theory::Dirac, 2.0, &p).unwrap();
        let generic = solve_dirac_mode(2.0, &p, &MatrixSet::standard()).unwrap();
        assert!((closed.r - generic.r).norm() < 1e-14);
        assert!((closed.t - generic.t).norm() < 1e-14);
    }

    #[test]
    fn flagship_reflection_is_representation_independent() {
        let p = PhysicalParams::natural(0.5);
        let alt = MatrixSet::standard().conjugated(&rotation()).unwrap();
        let cmp = representation_swap_check(2.0, &p, &alt).unwrap();
        assert!(cmp.max_difference <= 1e-12, "{cmp:?}");
        assert!((cmp.default.reflection - 0.0161332).abs() < 1e-7);
        assert!((cmp.alternate.reflection - 0.0161332).abs() < 1e-7);
    }

    #[test]
    fn sigma_y_alpha_representation() {
        let zero = C64::new(0.0, 0.0);
        let alpha = Mat2::new(zero, C64::new(0.0, -1.0), C64::new(0.0, 1.0), zero);
        let alt = MatrixSet::with_dirac(alpha, MatrixSet::standard().beta).unwrap();
        for (e, v0) in [(2.0, 0.5), (2.0, 1.5), (2.0, 4.5), (3.0, -1.0)] {
            let cmp = representation_swap_check(e, &PhysicalParams::natural(v0), &alt).unwrap();
            assert!(cmp.max_difference <= 1e-12, "E={e} V0={v0}: {cmp:?}");
        }
    }

    #[test]
    fn flat_potential_transmits_fully() {
        let alt = MatrixSet::standard().conjugated(&rotation()).unwrap();
        let cmp = representation_swap_check(2.0, &PhysicalParams::natural(0.0), &alt).unwrap();
        assert!((cmp.default.transmission - 1.0).abs() < 1e-15);
        assert!((cmp.alternate.transmission - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_alternate_is_rejected() {
        let mut bad = MatrixSet::standard();
        bad.beta = bad.alpha;
        assert!(matches!(
            representation_swap_check(2.0, &PhysicalParams::natural(0.5), &bad),
            Err(Error::InvalidMatrixSet(_))
        ));
    }
}
