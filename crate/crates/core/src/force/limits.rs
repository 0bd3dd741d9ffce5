//! Nonrelativistic and infinite-step limits.

use serde::Serialize;

use super::{density, mean_force_closed};
use crate::error::{Error, Result};
use crate::modes::{solve_step_mode, Location, Theory};
use crate::params::PhysicalParams;
use crate::potential::RegularizedPotential;
use crate::regularized::{solve_smooth_mode, NumericalMode, Resolution};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    NotNonrelativistic,
    Degenerate,
    Rejected,
}

impl RowStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotNonrelativistic => "not-nonrelativistic",
            RowStatus::Degenerate => "degenerate",
            RowStatus::Rejected => "rejected",
        }
    }
}

/// Least-squares slope of ln(y) against ln(x). `None` with fewer than two
/// usable points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Probe points for the density comparison.
pub const NONREL_PROBES: [Location; 8] = [
    Location::At(-2.0),
    Location::At(-1.0),
    Location::At(-0.5),
    Location::ZeroMinus,
    Location::ZeroPlus,
    Location::At(0.5),
    Location::At(1.0),
    Location::At(2.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonrelRow {
    pub c: f64,
    pub status: RowStatus,
    /// max over probes of |rho_KFG - (1 - phi/mc^2) rho_S| / rho_S
    pub density_residual: f64,
    /// |f_KFG - (V0^2/2mc^2) rho_S(0)| / |f_KFG|; NaN for degenerate rows.
    pub force_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonrelTable {
    pub e_nr: f64,
    pub v0: f64,
    pub rows: Vec<NonrelRow>,
    pub density_slope: Option<f64>,
    pub force_slope: Option<f64>,
}

/// Compare the KFG mode at `E = mc^2 + e_nr` with the Schrödinger mode at
/// `e_nr` for each speed of light in `c_list`.
pub fn nonrel_residuals(e_nr: f64, c_list: &[f64], params: &PhysicalParams) -> Result<NonrelTable> {
    if !(e_nr > 0.0 && e_nr.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "nonrelativistic energy must be positive, got {e_nr}"
        )));
    }
    let s_mode = solve_step_mode(Theory::Schrodinger, e_nr, params)?;
    let mut rows = Vec::with_capacity(c_list.len());
    for &c in c_list {
        let p = params.with_c(c)?;
        let rest = p.rest_energy();
        let k_mode = solve_step_mode(Theory::KleinGordon, rest + e_nr, &p)?;

        let mut density_residual = 0.0f64;
        for loc in NONREL_PROBES {
            let (side, _) = loc.resolve()?;
            let rho_s = density(&s_mode, loc, 0.0)?;
            let rho_k = density(&k_mode, loc, 0.0)?;
            let predicted = (1.0 - k_mode.potential(side) / rest) * rho_s;
            density_residual = density_residual.max((rho_k - predicted).abs() / rho_s);
        }

        let f_k = mean_force_closed(&k_mode)?.value;
        let rho_s0 = density(&s_mode, Location::ZeroMinus, 0.0)?;
        let predicted = p.v0() * p.v0() / (2.0 * rest) * rho_s0;
        let degenerate = p.v0() == 0.0 || f_k == 0.0;
        let force_residual = if degenerate {
            f64::NAN
        } else {
            (f_k - predicted).abs() / f_k.abs()
        };
        let status = if e_nr >= rest {
            RowStatus::NotNonrelativistic
        } else if degenerate {
            RowStatus::Degenerate
        } else {
            RowStatus::Ok
        };
        rows.push(NonrelRow {
            c,
            status,
            density_residual,
            force_residual,
        });
    }
    let ok: Vec<&NonrelRow> = rows.iter().filter(|r| r.status == RowStatus::Ok).collect();
    let cs: Vec<f64> = ok.iter().map(|r| r.c).collect();
    let density_slope = loglog_slope(&cs, &ok.iter().map(|r| r.density_residual).collect::<Vec<_>>());
    let force_slope = loglog_slope(&cs, &ok.iter().map(|r| r.force_residual).collect::<Vec<_>>());
    Ok(NonrelTable {
        e_nr,
        v0: params.v0(),
        rows,
        density_slope,
        force_slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfiniteStepRow {
    pub v0: f64,
    pub status: RowStatus,
    /// -V0 rho_S(0)
    pub route_a: f64,
    /// -2 hbar^2 k^2 / m
    pub exact: f64,
    /// |route_a - exact| / |exact|
    pub identity_residual: f64,
    /// -(hbar^2/2m)|psi_x(0-)|^2
    pub candidate: f64,
    pub candidate_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfiniteStepTable {
    pub energy: f64,
    pub rows: Vec<InfiniteStepRow>,
    /// Log-log slope of the candidate error against V0.
    pub error_slope: Option<f64>,
}

/// Schrödinger mean force above the barrier top, row by row over `v0_list`.
pub fn infinite_step_sweep(
    energy: f64,
    v0_list: &[f64],
    params: &PhysicalParams,
) -> Result<InfiniteStepTable> {
    let mut rows = Vec::with_capacity(v0_list.len());
    for &v0 in v0_list {
        if !(v0 > energy) {
            rows.push(InfiniteStepRow {
                v0,
                status: RowStatus::Rejected,
                route_a: f64::NAN,
                exact: f64::NAN,
                identity_residual: f64::NAN,
                candidate: f64::NAN,
                candidate_error: f64::NAN,
            });
            continue;
        }
        let p = params.with_v0(v0);
        let mode = solve_step_mode(Theory::Schrodinger, energy, &p)?;
        let route_a = mean_force_closed(&mode)?.value;
        let k = mode.k.re;
        let exact = -2.0 * p.hbar() * p.hbar() * k * k / p.mass();
        let psi_x = mode.scalar(Location::ZeroMinus)?.1;
        let candidate = -p.kinetic_scale() * psi_x.norm_sqr();
        rows.push(InfiniteStepRow {
            v0,
            status: RowStatus::Ok,
            route_a,
            exact,
            identity_residual: (route_a - exact).abs() / exact.abs(),
            candidate,
            candidate_error: (candidate - exact).abs(),
        });
    }
    let ok: Vec<&InfiniteStepRow> = rows.iter().filter(|r| r.status == RowStatus::Ok).collect();
    let error_slope = loglog_slope(
        &ok.iter().map(|r| r.v0).collect::<Vec<_>>(),
        &ok.iter().map(|r| r.candidate_error).collect::<Vec<_>>(),
    );
    Ok(InfiniteStepTable {
        energy,
        rows,
        error_slope,
    })
}

/// Integral of `phi_eps psi_eps` over `[-window, window]`.
pub fn weak_product_integral(
    mode: &NumericalMode,
    reg: &RegularizedPotential,
    window: f64,
) -> Result<C64> {
    if !(window > reg.epsilon()) {
        return Err(Error::UnresolvedWindow {
            window,
            epsilon: reg.epsilon(),
        });
    }
    mode.integrate(-window, window, |x, u| u[0] * reg.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakProductCheck {
    pub energy: f64,
    pub v0: f64,
    pub epsilon: f64,
    pub window: f64,
    pub integral: C64,
    /// -(hbar^2/2m) psi_x(0-) of the sharp mode
    pub target: C64,
    pub deviation: f64,
}

/// Compare the smoothed product integral with the sharp-step derivative
/// term for a high barrier (`V0/E >= 100`).
pub fn a3_weak_product_check(
    energy: f64,
    reg: &RegularizedPotential,
    window: f64,
    half_length: f64,
    resolution: Resolution,
) -> Result<WeakProductCheck> {
    if !(window > reg.epsilon()) {
        return Err(Error::UnresolvedWindow {
            window,
            epsilon: reg.epsilon(),
        });
    }
    let params = reg.params();
    if !(params.v0() >= 100.0 * energy) {
        return Err(Error::InvalidDomain(format!(
            "weak-product check needs V0/E >= 100, got V0 = {}, E = {energy}",
            params.v0()
        )));
    }
    let sharp = solve_step_mode(Theory::Schrodinger, energy, params)?;
    let target = -params.kinetic_scale() * sharp.scalar(Location::ZeroMinus)?.1;
    let mode = solve_smooth_mode(Theory::Schrodinger, energy, reg, half_length, resolution)?;
    let integral = weak_product_integral(&mode, reg, window)?;
    Ok(WeakProductCheck {
        energy,
        v0: params.v0(),
        epsilon: reg.epsilon(),
        window,
        integral,
        target,
        deviation: (integral - target).norm() / target.norm(),
    })
}
