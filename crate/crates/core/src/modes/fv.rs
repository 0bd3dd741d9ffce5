//! Feshbach-Villars two-component lift of stationary KFG modes and the
//! jump conditions it satisfies at the step.

use serde::Serialize;

use super::{Location, MatrixSet, ScatterMode, Theory, Vec2};
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::potential::Side;
use crate::C64;

/// Two-component vector of a stationary scalar quantity `value` at a point
/// where the local kinetic energy is `E - phi`:
/// `[(1 + (E-phi)/mc^2) value, (1 - (E-phi)/mc^2) value] / 2`.
///
/// The same map lifts psi_x to Psi_x wherever phi is locally constant.
pub fn fv_components(value: C64, energy_minus_phi: f64, rest_energy: f64) -> Vec2 {
    let a = energy_minus_phi / rest_energy;
    Vec2::new(0.5 * (1.0 + a) * value, 0.5 * (1.0 - a) * value)
}

/// One-sided Feshbach-Villars data at x = 0 for a KFG mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FvBoundary {
    /// psi(0), taken from the left-side solution.
    pub psi0: C64,
    /// psi_x(0), taken from the left-side solution.
    pub psix0: C64,
    pub psi_left: Vec2,
    pub psi_right: Vec2,
    pub psix_left: Vec2,
    pub psix_right: Vec2,
}

impl FvBoundary {
    pub fn value_jump(&self) -> Vec2 {
        self.psi_right - self.psi_left
    }

    pub fn derivative_jump(&self) -> Vec2 {
        self.psix_right - self.psix_left
    }
}

fn require_kfg(mode: &ScatterMode) -> Result<()> {
    if mode.theory != Theory::KleinGordon {
        return Err(Error::WrongTheory {
            expected: Theory::KleinGordon,
            got: mode.theory,
        });
    }
    Ok(())
}

/// Psi and Psi_x of a KFG mode at `loc` (time factor stripped).
pub fn fv_state(mode: &ScatterMode, loc: Location) -> Result<(Vec2, Vec2)> {
    require_kfg(mode)?;
    let (side, _) = loc.resolve()?;
    let (psi, psi_x) = mode.scalar(loc)?;
    let kinetic = mode.energy - mode.potential(side);
    let rest = mode.rest_energy();
    Ok((
        fv_components(psi, kinetic, rest),
        fv_components(psi_x, kinetic, rest),
    ))
}

/// Lift a KFG mode to its two-component boundary data. Each side is built
/// from that side's own solution, so the jump conditions are a genuine
/// check of the matching.
pub fn fv_lift(mode: &ScatterMode) -> Result<FvBoundary> {
    require_kfg(mode)?;
    let (psi0, psix0) = mode.scalar(Location::ZeroMinus)?;
    let (psi_left, psix_left) = fv_state(mode, Location::ZeroMinus)?;
    let (psi_right, psix_right) = fv_state(mode, Location::ZeroPlus)?;
    debug_assert_eq!(mode.potential(Side::Left), 0.0);
    Ok(FvBoundary {
        psi0,
        psix0,
        psi_left,
        psi_right,
        psix_left,
        psix_right,
    })
}

/// Max-norm residuals of the four matricial boundary conditions, each
/// relative to the largest one-sided component (floored at the unit
/// incident amplitude).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcResiduals {
    /// Psi(0+) - Psi(0-) - (V0/2mc^2) [-1, 1] psi(0)
    pub value_jump: f64,
    /// Psi_x(0+) - Psi_x(0-) - (V0/2mc^2) [-1, 1] psi_x(0)
    pub derivative_jump: f64,
    /// (tau3 + i tau2) [Psi(0+) - Psi(0-)]
    pub projected_value: f64,
    /// (tau3 + i tau2) [Psi_x(0+) - Psi_x(0-)]
    pub projected_derivative: f64,
}

impl BcResiduals {
    pub fn max(&self) -> f64 {
        self.value_jump
            .max(self.derivative_jump)
            .max(self.projected_value)
            .max(self.projected_derivative)
    }
}

fn sup(v: &Vec2) -> f64 {
    v.map(|z| z.norm()).max()
}

pub fn bc_residuals(b: &FvBoundary, params: &PhysicalParams) -> BcResiduals {
    let g = params.v0() / (2.0 * params.rest_energy());
    let dir = Vec2::new(C64::new(-g, 0.0), C64::new(g, 0.0));
    let proj = MatrixSet::standard().fv_projector();
    let value_scale = sup(&b.psi_left).max(sup(&b.psi_right)).max(1.0);
    let derivative_scale = sup(&b.psix_left).max(sup(&b.psix_right)).max(1.0);
    BcResiduals {
        value_jump: sup(&(b.value_jump() - dir * b.psi0)) / value_scale,
        derivative_jump: sup(&(b.derivative_jump() - dir * b.psix0)) / derivative_scale,
        projected_value: sup(&(proj * b.value_jump())) / value_scale,
        projected_derivative: sup(&(proj * b.derivative_jump())) / derivative_scale,
    }
}

/// Relative defect of the coupled first-order (phi, chi) system at a point
/// with constant potential `phi`, for a stationary field with value `psi`
/// and second derivative `psi_xx`:
///
/// ```text
/// E phi_c = -(hbar^2/2m) psi_xx + phi phi_c + mc^2 phi_c
/// E chi   = +(hbar^2/2m) psi_xx + phi chi   - mc^2 chi
/// ```
pub fn fv_system_defect(
    energy: f64,
    phi: f64,
    psi: C64,
    psi_xx: C64,
    params: &PhysicalParams,
) -> f64 {
    let rest = params.rest_energy();
    let kin = params.kinetic_scale();
    let comp = fv_components(psi, energy - phi, rest);
    let (upper, lower) = (comp[0], comp[1]);
    let d_upper = energy * upper - (-kin * psi_xx + phi * upper + rest * upper);
    let d_lower = energy * lower - (kin * psi_xx + phi * lower - rest * lower);
    let scale = [
        (energy * upper).norm(),
        (energy * lower).norm(),
        (kin * psi_xx).norm(),
        (phi * upper).norm(),
        (phi * lower).norm(),
        (rest * upper).norm(),
        (rest * lower).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    d_upper.norm().max(d_lower.norm()) / scale
}

/// `fv_system_defect` evaluated on a KFG mode at `x != 0`.
pub fn fv_system_residual(mode: &ScatterMode, x: f64) -> Result<f64> {
    require_kfg(mode)?;
    let loc = Location::At(x);
    let (side, _) = loc.resolve()?;
    let (psi, _) = mode.scalar(loc)?;
    let psi_xx = mode.scalar_xx(loc)?;
    Ok(fv_system_defect(
        mode.energy,
        mode.potential(side),
        psi,
        psi_xx,
        &mode.params,
    ))
}
