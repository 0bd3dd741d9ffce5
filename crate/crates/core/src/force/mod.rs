//! Densities, currents and the mean force on the sharp step.
//!
//! Route A is the closed form (`-V0 rho(0)` for Schrödinger and Dirac,
//! `-(V0/2)[rho(0+) - rho(0-)]` for KFG). Route C rebuilds the same number
//! from the one-sided boundary terms of the identity obtained by multiplying
//! the wave equation by the derivative of the conjugate field and
//! integrating across the interface.

mod limits;

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::{fv_state, Location, ScatterMode, Theory};
use crate::potential::Side;

pub use limits::{
    a3_weak_product_check, infinite_step_sweep, loglog_slope, nonrel_residuals,
    weak_product_integral, InfiniteStepRow, InfiniteStepTable, NonrelRow, NonrelTable, RowStatus,
    WeakProductCheck,
};

/// Probability density of a mode at `loc` and time `t`.
///
/// KFG uses the scalar form `rho = ((E - phi)/mc^2) |psi|^2` of a
/// stationary mode; [`kfg_density_tau3`] gives the two-component route.
pub fn density(mode: &ScatterMode, loc: Location, t: f64) -> Result<f64> {
    let phase = mode.time_factor(t);
    match mode.theory {
        Theory::Schrodinger => Ok((mode.scalar(loc)?.0 * phase).norm_sqr()),
        Theory::KleinGordon => {
            let (side, _) = loc.resolve()?;
            let psi = mode.scalar(loc)?.0 * phase;
            Ok((mode.energy - mode.potential(side)) / mode.rest_energy() * psi.norm_sqr())
        }
        Theory::Dirac => Ok((mode.spinor(loc)? * phase).norm_squared()),
    }
}

/// `Psi^dagger tau3 Psi = |phi|^2 - |chi|^2` for a KFG mode.
pub fn kfg_density_tau3(mode: &ScatterMode, loc: Location, t: f64) -> Result<f64> {
    let (psi, _) = fv_state(mode, loc)?;
    let psi = psi * mode.time_factor(t);
    Ok(psi[0].norm_sqr() - psi[1].norm_sqr())
}

/// Probability current: `(hbar/m) Im(psi* psi_x)` for the scalar theories,
/// `c Psi^dagger alpha Psi` for Dirac.
pub fn current(mode: &ScatterMode, loc: Location) -> Result<f64> {
    match mode.theory {
        Theory::Dirac => {
            let alpha = mode.dirac()?.alpha;
            let u = mode.spinor(loc)?;
            Ok(mode.params.c() * (u.adjoint() * alpha * u)[(0, 0)].re)
        }
        _ => {
            let (psi, psi_x) = mode.scalar(loc)?;
            Ok(mode.params.hbar() / mode.params.mass() * (psi.conj() * psi_x).im)
        }
    }
}

/// One-sided densities and currents at x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityProbe {
    pub theory: Theory,
    pub rho_left: f64,
    pub rho_right: f64,
    pub current_left: f64,
    pub current_right: f64,
}

impl DensityProbe {
    pub fn density_jump(&self) -> f64 {
        self.rho_right - self.rho_left
    }

    pub fn current_jump(&self) -> f64 {
        self.current_right - self.current_left
    }
}

pub fn density_probe(mode: &ScatterMode) -> Result<DensityProbe> {
    Ok(DensityProbe {
        theory: mode.theory,
        rho_left: density(mode, Location::ZeroMinus, 0.0)?,
        rho_right: density(mode, Location::ZeroPlus, 0.0)?,
        current_left: current(mode, Location::ZeroMinus)?,
        current_right: current(mode, Location::ZeroPlus)?,
    })
}

/// KFG density discontinuity and its predicted value `-(V0/mc^2)|psi(0)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityJump {
    pub jump: f64,
    pub predicted: f64,
    /// |jump - predicted| relative to the larger one-sided density.
    pub residual: f64,
}

pub fn kfg_density_jump(mode: &ScatterMode) -> Result<DensityJump> {
    require(mode, Theory::KleinGordon)?;
    let probe = density_probe(mode)?;
    let psi0 = mode.scalar(Location::ZeroMinus)?.0;
    let predicted = -mode.v0() / mode.rest_energy() * psi0.norm_sqr();
    let jump = probe.density_jump();
    let scale = probe.rho_left.abs().max(probe.rho_right.abs());
    let residual = if scale == 0.0 {
        0.0
    } else {
        (jump - predicted).abs() / scale
    };
    Ok(DensityJump {
        jump,
        predicted,
        residual,
    })
}

fn require(mode: &ScatterMode, theory: Theory) -> Result<()> {
    if mode.theory != theory {
        return Err(Error::WrongTheory {
            expected: theory,
            got: mode.theory,
        });
    }
    Ok(())
}

/// Closed-form mean force. For KFG `psi_form` holds the equivalent
/// `+(V0^2/2mc^2)|psi(0)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanForce {
    pub value: f64,
    pub psi_form: Option<f64>,
}

pub fn mean_force_closed(mode: &ScatterMode) -> Result<MeanForce> {
    let v0 = mode.v0();
    match mode.theory {
        Theory::Schrodinger | Theory::Dirac => Ok(MeanForce {
            value: -v0 * density(mode, Location::ZeroMinus, 0.0)?,
            psi_form: None,
        }),
        Theory::KleinGordon => {
            let probe = density_probe(mode)?;
            let psi0 = mode.scalar(Location::ZeroMinus)?.0;
            Ok(MeanForce {
                value: -0.5 * v0 * probe.density_jump(),
                psi_form: Some(0.5 * v0 * v0 / mode.rest_energy() * psi0.norm_sqr()),
            })
        }
    }
}

/// Boundary terms `[g]_{0-}^{0+}` of the mean-force identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryTerms {
    /// Schrödinger: -(hbar^2/2m)[|Psi_x|^2].
    /// KFG: -(hbar^2/2m)[Psi_x^dagger (1 + tau1) Psi_x]. Dirac: 0.
    pub kinetic: f64,
    /// KFG: mc^2 [Psi^dagger Psi]. Dirac: mc^2 [Psi^dagger beta Psi].
    /// Schrödinger: 0.
    pub mass: f64,
    /// [phi rho]
    pub potential: f64,
}

impl BoundaryTerms {
    pub fn sum(&self) -> f64 {
        self.kinetic + self.mass + self.potential
    }
}

/// Four candidate values of the integral of delta(x) rho(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaIntegral {
    /// [rho(0+) - rho(0-)] / 2, the value implied by the KFG identity.
    pub half_jump: f64,
    /// [rho(0+) + rho(0-)] / 2, the symmetric-regularization average.
    pub midpoint: f64,
    pub left_value: f64,
    pub right_value: f64,
}

pub fn delta_conventions(mode: &ScatterMode) -> Result<DeltaIntegral> {
    let p = density_probe(mode)?;
    Ok(DeltaIntegral {
        half_jump: 0.5 * (p.rho_right - p.rho_left),
        midpoint: 0.5 * (p.rho_right + p.rho_left),
        left_value: p.rho_left,
        right_value: p.rho_right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanForceReport {
    pub theory: Theory,
    pub energy: f64,
    pub v0: f64,
    pub route_a: f64,
    pub route_c_terms: BoundaryTerms,
    /// kinetic + mass + potential + route_a; zero for an exact mode.
    pub identity_residual: f64,
    /// Largest one-sided value entering any term, and |route_a|.
    pub term_scale: f64,
    pub delta_integral: DeltaIntegral,
}

impl MeanForceReport {
    /// `identity_residual` relative to `term_scale`.
    pub fn relative_identity_residual(&self) -> f64 {
        if self.term_scale == 0.0 {
            0.0
        } else {
            self.identity_residual.abs() / self.term_scale
        }
    }

    /// Mean force recovered from the boundary terms alone.
    pub fn route_c(&self) -> f64 {
        -self.route_c_terms.sum()
    }
}

/// Route C: every boundary term from one-sided data, checked against
/// Route A.
pub fn boundary_terms(mode: &ScatterMode) -> Result<MeanForceReport> {
    let kin = mode.params.kinetic_scale();
    let rest = mode.rest_energy();
    let side_of = |loc: Location| loc.resolve().map(|(s, _)| s);
    let scale = Cell::new(0.0f64);
    // Jump of f scaled by `factor`, recording the one-sided magnitudes.
    let jump = |factor: f64, f: &dyn Fn(Location) -> Result<f64>| -> Result<f64> {
        let (l, r) = (factor * f(Location::ZeroMinus)?, factor * f(Location::ZeroPlus)?);
        scale.set(scale.get().max(l.abs()).max(r.abs()));
        Ok(r - l)
    };
    let phi_rho = jump(1.0, &|loc| Ok(mode.potential(side_of(loc)?) * density(mode, loc, 0.0)?))?;

    let terms = match mode.theory {
        Theory::Schrodinger => BoundaryTerms {
            kinetic: jump(-kin, &|loc| Ok(mode.scalar(loc)?.1.norm_sqr()))?,
            mass: 0.0,
            potential: phi_rho,
        },
        Theory::KleinGordon => BoundaryTerms {
            kinetic: jump(-kin, &|loc| {
                let (_, dx) = fv_state(mode, loc)?;
                // Psi_x^dagger (1 + tau1) Psi_x = |phi_x + chi_x|^2
                Ok(dx.norm_squared() + 2.0 * (dx[0].conj() * dx[1]).re)
            })?,
            mass: jump(rest, &|loc| Ok(fv_state(mode, loc)?.0.norm_squared()))?,
            potential: phi_rho,
        },
        Theory::Dirac => {
            let beta = mode.dirac()?.beta;
            BoundaryTerms {
                kinetic: 0.0,
                mass: jump(rest, &|loc| {
                    let u = mode.spinor(loc)?;
                    Ok((u.adjoint() * beta * u)[(0, 0)].re)
                })?,
                potential: phi_rho,
            }
        }
    };
    let route_a = mean_force_closed(mode)?.value;
    debug_assert_eq!(mode.potential(Side::Left), 0.0);
    Ok(MeanForceReport {
        theory: mode.theory,
        energy: mode.energy,
        v0: mode.v0(),
        route_a,
        route_c_terms: terms,
        identity_residual: terms.sum() + route_a,
        term_scale: scale.get().max(route_a.abs()),
        delta_integral: delta_conventions(mode)?,
    })
}
