//! Exact stationary scattering modes of the sharp step.
//!
//! Every mode is incident from the left with unit amplitude:
//! `e^{ikx} + r e^{-ikx}` for x < 0 and `t e^{iqx}` for x > 0, with the
//! Dirac plane waves multiplying the appropriate two-spinors.

mod fv;
mod matrices;
mod representation;

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::potential::Side;
use crate::C64;

pub use fv::{
    bc_residuals, fv_components, fv_lift, fv_state, fv_system_defect, fv_system_residual,
    BcResiduals, FvBoundary,
};
pub use matrices::{Mat2, MatrixSet};
pub use representation::{
    representation_swap_check, solve_dirac_mode, DiracObservables, RepresentationComparison,
};

pub type Vec2 = Vector2<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theory {
    #[serde(rename = "s")]
    Schrodinger,
    #[serde(rename = "kfg")]
    KleinGordon,
    #[serde(rename = "d")]
    Dirac,
}

impl Theory {
    pub const ALL: [Theory; 3] = [Theory::Schrodinger, Theory::KleinGordon, Theory::Dirac];

    pub fn tag(&self) -> &'static str {
        match self {
            Theory::Schrodinger => "s",
            Theory::KleinGordon => "kfg",
            Theory::Dirac => "d",
        }
    }

    pub fn is_relativistic(&self) -> bool {
        !matches!(self, Theory::Schrodinger)
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Schrodinger => "S",
            Theory::KleinGordon => "KFG",
            Theory::Dirac => "D",
        })
    }
}

impl FromStr for Theory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s" | "schrodinger" => Ok(Theory::Schrodinger),
            "kfg" | "kg" | "klein-gordon" => Ok(Theory::KleinGordon),
            "d" | "dirac" => Ok(Theory::Dirac),
            other => Err(format!("unknown theory '{other}' (expected s, kfg or d)")),
        }
    }
}

/// Character of a wavenumber on one side of the step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Real wavenumber, group velocity and wavenumber both positive.
    Propagating,
    /// Imaginary wavenumber with positive imaginary part.
    Evanescent,
    /// Real wavenumber with E - phi < -mc^2; negative so that the group
    /// velocity points away from the interface.
    Klein,
    /// Regime boundary, wavenumber zero.
    Threshold,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Propagating => "propagating",
            Regime::Evanescent => "evanescent",
            Regime::Klein => "klein",
            Regime::Threshold => "threshold",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    pub value: C64,
    pub regime: Regime,
}

/// Local wavenumber for energy `energy` over constant potential `phi`.
///
/// Schrödinger: hbar^2 k^2 / 2m = E - phi.
/// KFG and Dirac: (hbar c k)^2 = (E - phi)^2 - (mc^2)^2.
pub fn dispersion(theory: Theory, energy: f64, phi: f64, params: &PhysicalParams) -> Wavenumber {
    let tol = 8.0 * f64::EPSILON;
    match theory {
        Theory::Schrodinger => {
            let d = energy - phi;
            if d.abs() <= tol * (energy.abs() + phi.abs()) {
                return threshold();
            }
            let kappa = (2.0 * params.mass() * d.abs()).sqrt() / params.hbar();
            if d > 0.0 {
                Wavenumber {
                    value: C64::new(kappa, 0.0),
                    regime: Regime::Propagating,
                }
            } else {
                Wavenumber {
                    value: C64::new(0.0, kappa),
                    regime: Regime::Evanescent,
                }
            }
        }
        Theory::KleinGordon | Theory::Dirac => {
            let rest = params.rest_energy();
            let w = energy - phi;
            if (w.abs() - rest).abs() <= tol * (energy.abs() + phi.abs() + rest) {
                return threshold();
            }
            let s = (w - rest) * (w + rest);
            let kappa = s.abs().sqrt() / (params.hbar() * params.c());
            if s < 0.0 {
                Wavenumber {
                    value: C64::new(0.0, kappa),
                    regime: Regime::Evanescent,
                }
            } else if w > 0.0 {
                Wavenumber {
                    value: C64::new(kappa, 0.0),
                    regime: Regime::Propagating,
                }
            } else {
                Wavenumber {
                    value: C64::new(-kappa, 0.0),
                    regime: Regime::Klein,
                }
            }
        }
    }
}

fn threshold() -> Wavenumber {
    Wavenumber {
        value: C64::new(0.0, 0.0),
        regime: Regime::Threshold,
    }
}

/// Point at which a mode is evaluated; `ZeroMinus`/`ZeroPlus` are the
/// one-sided limits at the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    At(f64),
    ZeroMinus,
    ZeroPlus,
}

impl Location {
    pub fn resolve(self) -> Result<(Side, f64)> {
        match self {
            Location::ZeroMinus => Ok((Side::Left, 0.0)),
            Location::ZeroPlus => Ok((Side::Right, 0.0)),
            Location::At(x) if x < 0.0 => Ok((Side::Left, x)),
            Location::At(x) if x > 0.0 => Ok((Side::Right, x)),
            Location::At(_) => Err(Error::UndefinedAtOrigin),
        }
    }
}

impl From<f64> for Location {
    fn from(x: f64) -> Self {
        Location::At(x)
    }
}

/// Plane-wave spinors of a Dirac mode and the representation they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracSpinors {
    pub alpha: Mat2,
    pub beta: Mat2,
    pub incident: Vec2,
    pub reflected: Vec2,
    pub transmitted: Vec2,
}

/// One exact stationary scattering state of the sharp step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterMode {
    pub theory: Theory,
    pub energy: f64,
    /// Left-side wavenumber, real and positive.
    pub k: C64,
    /// Right-side wavenumber.
    pub q: C64,
    pub r: C64,
    pub t: C64,
    /// Regime of the transmitted side.
    pub regime: Regime,
    pub params: PhysicalParams,
    /// Present for Dirac modes only.
    pub dirac: Option<DiracSpinors>,
}

fn threshold_message(theory: Theory, energy: f64, params: &PhysicalParams) -> String {
    match theory {
        Theory::Schrodinger => format!("Schrodinger incidence requires E > 0 (E = {energy})"),
        Theory::KleinGordon => format!(
            "KFG incidence requires E > mc^2 (mc^2 = {}, E = {energy})",
            params.rest_energy()
        ),
        Theory::Dirac => format!(
            "Dirac incidence requires E > mc^2 (mc^2 = {}, E = {energy})",
            params.rest_energy()
        ),
    }
}

/// Incident wavenumber, or the below-threshold error.
pub(crate) fn incident_wavenumber(
    theory: Theory,
    energy: f64,
    params: &PhysicalParams,
) -> Result<C64> {
    let k = dispersion(theory, energy, 0.0, params);
    if k.regime != Regime::Propagating || !(k.value.re > 0.0) {
        return Err(Error::BelowThreshold(threshold_message(theory, energy, params)));
    }
    Ok(k.value)
}

/// Solve the sharp-step matching problem.
///
/// Schrödinger and KFG: psi and psi_x continuous, so r = (k-q)/(k+q) and
/// t = 2k/(k+q). Dirac: the spinor is continuous, so r = (l-l')/(l+l') and
/// t = 1 + r with l = hbar c k/(E+mc^2), l' = hbar c q/(E-V0+mc^2).
pub fn solve_step_mode(theory: Theory, energy: f64, params: &PhysicalParams) -> Result<ScatterMode> {
    if !energy.is_finite() {
        return Err(Error::InvalidParams(format!("energy must be finite, got {energy}")));
    }
    let k = incident_wavenumber(theory, energy, params)?;
    let trans = dispersion(theory, energy, params.v0(), params);
    let q = trans.value;

    let (r, t, dirac) = match theory {
        Theory::Schrodinger | Theory::KleinGordon => {
            let sum = if trans.regime == Regime::Klein {
                // k + q cancels near V0 = 2E; use k^2 - q^2 = V0 (2E - V0) / (hbar c)^2.
                let hc = params.hbar() * params.c();
                params.v0() * (2.0 * energy - params.v0()) / (hc * hc) / (k - q)
            } else {
                k + q
            };
            ((k - q) / sum, 2.0 * k / sum, None)
        }
        Theory::Dirac => {
            let hc = params.hbar() * params.c();
            let rest = params.rest_energy();
            let lambda = hc * k / (energy + rest);
            let one = C64::new(1.0, 0.0);
            let zero = C64::new(0.0, 0.0);
            let denom = energy - params.v0() + rest;
            let (r, t, transmitted) =
                if trans.regime == Regime::Threshold && denom.abs() < 0.5 * rest {
                    // E - V0 = -mc^2: the transmitted spinor is pure lower component.
                    (-one, 2.0 * lambda, Vec2::new(zero, one))
                } else {
                    let lambda_t = hc * q / denom;
                    let r = (lambda - lambda_t) / (lambda + lambda_t);
                    (r, one + r, Vec2::new(one, lambda_t))
                };
            let set = MatrixSet::standard();
            let spinors = DiracSpinors {
                alpha: set.alpha,
                beta: set.beta,
                incident: Vec2::new(one, lambda),
                reflected: Vec2::new(one, -lambda),
                transmitted,
            };
            (r, t, Some(spinors))
        }
    };

    Ok(ScatterMode {
        theory,
        energy,
        k,
        q,
        r,
        t,
        regime: trans.regime,
        params: *params,
        dirac,
    })
}

impl ScatterMode {
    pub fn v0(&self) -> f64 {
        self.params.v0()
    }

    pub fn rest_energy(&self) -> f64 {
        self.params.rest_energy()
    }

    /// Potential on one side of the interface.
    pub fn potential(&self, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Right => self.v0(),
        }
    }

    /// exp(-iEt/hbar)
    pub fn time_factor(&self, t: f64) -> C64 {
        C64::from_polar(1.0, -self.energy * t / self.params.hbar())
    }

    fn require(&self, expected: Theory) -> Result<()> {
        let ok = match expected {
            Theory::Dirac => self.theory == Theory::Dirac,
            _ => self.theory != Theory::Dirac,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::WrongTheory {
                expected,
                got: self.theory,
            })
        }
    }

    pub fn dirac(&self) -> Result<&DiracSpinors> {
        self.dirac.as_ref().ok_or(Error::WrongTheory {
            expected: Theory::Dirac,
            got: self.theory,
        })
    }

    /// Scalar wave function and its x-derivative (Schrödinger and KFG).
    pub fn scalar(&self, loc: Location) -> Result<(C64, C64)> {
        self.require(Theory::Schrodinger)?;
        let (side, x) = loc.resolve()?;
        let i = C64::i();
        Ok(match side {
            Side::Left => {
                let fwd = (i * self.k * x).exp();
                let back = (-i * self.k * x).exp();
                (fwd + self.r * back, i * self.k * (fwd - self.r * back))
            }
            Side::Right => {
                let out = self.t * (i * self.q * x).exp();
                (out, i * self.q * out)
            }
        })
    }

    /// Second x-derivative of the scalar wave function, term by term.
    pub fn scalar_xx(&self, loc: Location) -> Result<C64> {
        self.require(Theory::Schrodinger)?;
        let (side, x) = loc.resolve()?;
        let ik = C64::i() * self.k;
        let iq = C64::i() * self.q;
        Ok(match side {
            Side::Left => ik * ik * (ik * x).exp() + self.r * ik * ik * (-ik * x).exp(),
            Side::Right => iq * iq * self.t * (iq * x).exp(),
        })
    }

    /// Dirac spinor.
    pub fn spinor(&self, loc: Location) -> Result<Vec2> {
        let spinors = self.dirac()?;
        let (side, x) = loc.resolve()?;
        let i = C64::i();
        Ok(match side {
            Side::Left => {
                spinors.incident * (i * self.k * x).exp()
                    + spinors.reflected * (self.r * (-i * self.k * x).exp())
            }
            Side::Right => spinors.transmitted * (self.t * (i * self.q * x).exp()),
        })
    }

    /// Largest mismatch of the matched quantities across x = 0 (psi and
    /// psi_x for the scalar theories, the spinor for Dirac), relative to
    /// the larger one-sided magnitude floored at the unit incident amplitude.
    pub fn continuity_residual(&self) -> f64 {
        let rel = |l: f64, r: f64, d: f64| d / l.max(r).max(1.0);
        match self.theory {
            Theory::Dirac => {
                let l = self.spinor(Location::ZeroMinus).expect("dirac mode");
                let r = self.spinor(Location::ZeroPlus).expect("dirac mode");
                let sup = |v: &Vec2| v.map(|z| z.norm()).max();
                rel(sup(&l), sup(&r), sup(&(r - l)))
            }
            _ => {
                let (pl, dl) = self.scalar(Location::ZeroMinus).expect("scalar mode");
                let (pr, dr) = self.scalar(Location::ZeroPlus).expect("scalar mode");
                rel(pl.norm(), pr.norm(), (pr - pl).norm())
                    .max(rel(dl.norm(), dr.norm(), (dr - dl).norm()))
            }
        }
    }

    /// Flux balance `j_inc + |r|^2 j_ref - |t|^2 j_trans`, relative to the
    /// largest of the three fluxes. Zero for every exact mode, including
    /// Klein-zone ones where `|r|` may be large.
    pub fn flux_residual(&self) -> f64 {
        let (inc, refl, trans) = match &self.dirac {
            Some(s) => {
                let flux = |u: &Vec2| (u.adjoint() * s.alpha * u)[(0, 0)].re;
                (flux(&s.incident), flux(&s.reflected), flux(&s.transmitted))
            }
            None => (self.k.re, -self.k.re, self.q.re),
        };
        let (refl, trans) = (self.r.norm_sqr() * refl, self.t.norm_sqr() * trans);
        let scale = inc.abs().max(refl.abs()).max(trans.abs());
        (inc + refl - trans).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn nat(v0: f64) -> PhysicalParams {
        PhysicalParams::natural(v0)
    }

    #[test]
    fn schrodinger_dispersion() {
        let w = dispersion(Theory::Schrodinger, 1.0, 0.0, &nat(0.0));
        assert_eq!(w.regime, Regime::Propagating);
        assert!(close(w.value.re, 2f64.sqrt(), 1e-15));
        let w = dispersion(Theory::Schrodinger, 1.0, 3.0, &nat(0.0));
        assert_eq!(w.regime, Regime::Evanescent);
        assert!(close(w.value.im, 2.0, 1e-15));
    }

    #[test]
    fn kfg_dispersion() {
        let w = dispersion(Theory::KleinGordon, 2.0, 0.0, &nat(0.0));
        assert!(close(w.value.re, 3f64.sqrt(), 1e-15));
        let w = dispersion(Theory::KleinGordon, 2.0, 1.0, &nat(0.0));
        assert_eq!(w.regime, Regime::Threshold);
        assert_eq!(w.value, C64::new(0.0, 0.0));
        let w = dispersion(Theory::Schrodinger, 0.5, 0.5, &nat(0.0));
        assert_eq!(w.regime, Regime::Threshold);
    }

    #[test]
    fn klein_zone_wavenumber_is_negative() {
        // E - phi = -2 < -mc^2
        let w = dispersion(Theory::Dirac, 2.0, 4.0, &nat(0.0));
        assert_eq!(w.regime, Regime::Klein);
        assert!(close(w.value.re, -(3f64.sqrt()), 1e-15));
    }

    #[test]
    fn below_threshold_is_an_error() {
        let err = solve_step_mode(Theory::KleinGordon, 0.5, &nat(0.1)).unwrap_err();
        assert!(err.to_string().contains("KFG incidence requires E > mc^2"));
        assert!(solve_step_mode(Theory::Dirac, 1.0, &nat(0.1)).is_err());
        assert!(solve_step_mode(Theory::Schrodinger, -1.0, &nat(0.1)).is_err());
    }

    #[test]
    fn schrodinger_flagship() {
        let m = solve_step_mode(Theory::Schrodinger, 1.0, &nat(0.5)).unwrap();
        assert!(close(m.q.re, 1.0, 1e-15));
        // r = (sqrt2 - 1)/(sqrt2 + 1) = 3 - 2 sqrt2
        assert!(close(m.r.re, 3.0 - 2.0 * 2f64.sqrt(), 1e-15));
        assert!(close((1.0 + m.r).norm_sqr(), 1.3725830, 1e-7));
        assert_eq!(m.regime, Regime::Propagating);
    }

    #[test]
    fn kfg_flagship() {
        let m = solve_step_mode(Theory::KleinGordon, 2.0, &nat(0.5)).unwrap();
        assert!(close(m.k.re, 3f64.sqrt(), 1e-15));
        assert!(close(m.q.re, 1.25f64.sqrt(), 1e-15));
        assert!(close(m.r.re, 0.2154381, 1e-7));
        assert!(close((1.0 + m.r).norm_sqr(), 1.4772897, 1e-7));
    }

    #[test]
    fn dirac_flagship() {
        let m = solve_step_mode(Theory::Dirac, 2.0, &nat(0.5)).unwrap();
        let s = m.dirac().unwrap();
        assert!(close(s.incident[1].re, 1.0 / 3f64.sqrt(), 1e-15));
        assert!(close(s.transmitted[1].re, 1.25f64.sqrt() / 2.5, 1e-15));
        assert!(close(m.r.re, 0.1270167, 1e-7));
        assert!(close(m.t.re, 1.1270167, 1e-7));
        assert!(close(1.0 - m.r.norm_sqr(), 0.9838668, 1e-7));
    }

    #[test]
    fn no_step_no_reflection() {
        for (theory, e) in [
            (Theory::Schrodinger, 1.0),
            (Theory::KleinGordon, 2.0),
            (Theory::Dirac, 2.0),
        ] {
            let m = solve_step_mode(theory, e, &nat(0.0)).unwrap();
            assert_eq!(m.r, C64::new(0.0, 0.0), "{theory}");
            assert_eq!(m.t, C64::new(1.0, 0.0), "{theory}");
        }
    }

    #[test]
    fn evanescent_total_reflection() {
        for (theory, e, v0) in [
            (Theory::Schrodinger, 1.0, 3.0),
            (Theory::KleinGordon, 2.0, 1.5),
            (Theory::Dirac, 2.0, 1.5),
        ] {
            let m = solve_step_mode(theory, e, &nat(v0)).unwrap();
            assert_eq!(m.regime, Regime::Evanescent);
            assert!(close(m.r.norm(), 1.0, 1e-14), "{theory}");
            assert!(m.flux_residual() < 1e-14);
        }
    }

    #[test]
    fn klein_zone_flux_balance() {
        let kfg = solve_step_mode(Theory::KleinGordon, 2.0, &nat(4.5)).unwrap();
        assert_eq!(kfg.regime, Regime::Klein);
        assert!(kfg.r.norm() > 1.0);
        assert!(kfg.flux_residual() < 1e-13);
        let d = solve_step_mode(Theory::Dirac, 2.0, &nat(4.5)).unwrap();
        assert_eq!(d.regime, Regime::Klein);
        assert!(d.flux_residual() < 1e-13);
        assert!(d.continuity_residual() < 1e-14);
    }

    #[test]
    fn threshold_modes() {
        let m = solve_step_mode(Theory::KleinGordon, 2.0, &nat(1.0)).unwrap();
        assert_eq!(m.regime, Regime::Threshold);
        assert_eq!(m.q, C64::new(0.0, 0.0));
        assert_eq!(m.r, C64::new(1.0, 0.0));
        // E - V0 = -mc^2 for Dirac
        let d = solve_step_mode(Theory::Dirac, 2.0, &nat(3.0)).unwrap();
        assert_eq!(d.regime, Regime::Threshold);
        assert!(d.continuity_residual() < 1e-14);
    }

    #[test]
    fn wrong_theory_accessors() {
        let d = solve_step_mode(Theory::Dirac, 2.0, &nat(0.5)).unwrap();
        assert!(matches!(
            d.scalar(Location::ZeroMinus),
            Err(Error::WrongTheory { .. })
        ));
        let s = solve_step_mode(Theory::Schrodinger, 1.0, &nat(0.5)).unwrap();
        assert!(s.spinor(Location::ZeroPlus).is_err());
        assert_eq!(s.scalar(Location::At(0.0)), Err(Error::UndefinedAtOrigin));
    }

    #[test]
    fn theory_parsing() {
        assert_eq!("KFG".parse::<Theory>().unwrap(), Theory::KleinGordon);
        assert_eq!("s".parse::<Theory>().unwrap(), Theory::Schrodinger);
        assert!("x".parse::<Theory>().is_err());
    }
}
