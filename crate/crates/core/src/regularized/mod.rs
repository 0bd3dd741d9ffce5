//! Smoothed steps solved with piecewise-constant transfer matrices, the
//! regularized mean force `-∫ phi'_eps rho_eps dx`, and its eps -> 0 limit.

mod extrapolate;
mod jumps;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{dispersion, incident_wavenumber, Mat2, Regime, Theory, Vec2};
use crate::params::PhysicalParams;
use crate::potential::{RegularizedPotential, Shape};
use crate::quad::gauss5_complex;
use crate::C64;

pub use extrapolate::{extrapolate, ConvergenceSeries, Extrapolation};
pub use jumps::{appendix_b_jump_diagnostics, JumpRecord};

pub const DEFAULT_EPSILONS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];
pub const DEFAULT_HALF_LENGTH: f64 = 20.0;

const MIN_HALF_LENGTH: f64 = 20.0;
const MIN_PER_WIDTH: usize = 8;
const MIN_PER_WAVELENGTH: usize = 20;
const MAX_OUTER_WIDTH: f64 = 0.5;

/// Mesh density: segments per smoothing width inside the transition zone,
/// and per local wavelength everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub per_width: usize,
    pub per_wavelength: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            per_width: 64,
            per_wavelength: 20,
        }
    }
}

/// k^2 of the local second-order equation over constant `phi`.
fn local_k2(theory: Theory, energy: f64, phi: f64, params: &PhysicalParams) -> f64 {
    match theory {
        Theory::Schrodinger => 2.0 * params.mass() * (energy - phi) / (params.hbar() * params.hbar()),
        Theory::KleinGordon | Theory::Dirac => {
            let w = energy - phi;
            let rest = params.rest_energy();
            let hc = params.hbar() * params.c();
            (w - rest) * (w + rest) / (hc * hc)
        }
    }
}

fn wavelength(k2: f64) -> f64 {
    if k2 == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / k2.abs().sqrt()
    }
}

/// `(cos(K h), sin(K h)/K)` with `K^2 = k2`, continued to hyperbolic
/// functions for `k2 < 0`.
fn cos_sinc(k2: f64, h: f64) -> (f64, f64) {
    let z = k2 * h * h;
    if z.abs() < 1e-3 {
        let c = 1.0 - z / 2.0 * (1.0 - z / 12.0 * (1.0 - z / 30.0 * (1.0 - z / 56.0)));
        let s = h * (1.0 - z / 6.0 * (1.0 - z / 20.0 * (1.0 - z / 42.0 * (1.0 - z / 72.0))));
        (c, s)
    } else if k2 > 0.0 {
        let k = k2.sqrt();
        ((k * h).cos(), (k * h).sin() / k)
    } else {
        let k = (-k2).sqrt();
        ((k * h).cosh(), (k * h).sinh() / k)
    }
}

/// Exact propagator over a displacement `h` through constant `phi`.
///
/// Scalar theories act on `[psi, psi_x]`; Dirac acts on the spinor in the
/// alpha = sigma_x, beta = sigma_z representation.
fn propagator(theory: Theory, energy: f64, phi: f64, params: &PhysicalParams, h: f64) -> Mat2 {
    let k2 = local_k2(theory, energy, phi, params);
    let (c, s) = cos_sinc(k2, h);
    let re = |v: f64| C64::new(v, 0.0);
    match theory {
        Theory::Schrodinger | Theory::KleinGordon => Mat2::new(re(c), re(s), re(-k2 * s), re(c)),
        Theory::Dirac => {
            let w = energy - phi;
            let rest = params.rest_energy();
            let hc = params.hbar() * params.c();
            let upper = C64::new(0.0, s * (w + rest) / hc);
            let lower = C64::new(0.0, s * (w - rest) / hc);
            Mat2::new(re(c), upper, lower, re(c))
        }
    }
}

/// Step profile sampled at segment midpoints over `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseModel {
    pub theory: Theory,
    pub energy: f64,
    params: PhysicalParams,
    nodes: Vec<f64>,
    values: Vec<f64>,
    zone: f64,
    fine_width: f64,
}

fn push_uniform(nodes: &mut Vec<f64>, to: f64, max_width: f64) {
    let from = *nodes.last().expect("nodes start non-empty");
    let span = to - from;
    if span <= 0.0 {
        return;
    }
    let n = (span / max_width).ceil().max(1.0) as usize;
    for i in 1..n {
        nodes.push(from + span * i as f64 / n as f64);
    }
    nodes.push(to);
}

impl PiecewiseModel {
    pub fn build(
        theory: Theory,
        energy: f64,
        reg: &RegularizedPotential,
        half_length: f64,
        resolution: Resolution,
    ) -> Result<Self> {
        let eps = reg.epsilon();
        if !(half_length >= MIN_HALF_LENGTH && half_length >= 50.0 * eps) {
            return Err(Error::InvalidDomain(format!(
                "half-length {half_length} must be at least {MIN_HALF_LENGTH} and 50 x epsilon ({})",
                50.0 * eps
            )));
        }
        if resolution.per_width < MIN_PER_WIDTH || resolution.per_wavelength < MIN_PER_WAVELENGTH {
            return Err(Error::UnderResolved(format!(
                "need at least {MIN_PER_WIDTH} segments per width and {MIN_PER_WAVELENGTH} per \
                 wavelength, got {} and {}",
                resolution.per_width, resolution.per_wavelength
            )));
        }
        let params = *reg.params();
        let v0 = params.v0();
        let support = reg.support_half_width();
        let zone = support.max(5.0 * eps);

        // Largest |k^2| over the range of the potential.
        let mut k2_max = local_k2(theory, energy, 0.0, &params)
            .abs()
            .max(local_k2(theory, energy, v0, &params).abs());
        if theory != Theory::Schrodinger && energy >= v0.min(0.0) && energy <= v0.max(0.0) {
            k2_max = k2_max.max(local_k2(theory, energy, energy, &params).abs());
        }
        let per_lambda = resolution.per_wavelength as f64;
        let fine = (eps / resolution.per_width as f64).min(wavelength(k2_max) / per_lambda);
        let outer = |phi: f64| {
            (wavelength(local_k2(theory, energy, phi, &params)) / per_lambda).min(MAX_OUTER_WIDTH)
        };

        let mut nodes = vec![-half_length];
        push_uniform(&mut nodes, -zone, outer(0.0));
        for b in [-support, support, zone] {
            push_uniform(&mut nodes, b, fine);
        }
        push_uniform(&mut nodes, half_length, outer(v0));

        let values = nodes.windows(2).map(|w| reg.eval(0.5 * (w[0] + w[1]))).collect();
        let model = Self {
            theory,
            energy,
            params,
            nodes,
            values,
            zone,
            fine_width: fine,
        };
        model.check_resolution(eps)?;
        Ok(model)
    }

    fn check_resolution(&self, eps: f64) -> Result<()> {
        let inside = self
            .nodes
            .windows(2)
            .filter(|w| w[0] >= -5.0 * eps && w[1] <= 5.0 * eps)
            .count();
        if inside < 40 {
            return Err(Error::UnderResolved(format!(
                "{inside} segments inside [-5 eps, 5 eps], need 40"
            )));
        }
        if self.fine_width > eps / 8.0 * (1.0 + 1e-12) {
            return Err(Error::UnderResolved(format!(
                "segment width {} exceeds eps/8 = {}",
                self.fine_width,
                eps / 8.0
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Potential value of each segment.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    pub fn half_length(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Half-width of the finely meshed transition zone.
    pub fn zone(&self) -> f64 {
        self.zone
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn segment_propagator(&self, seg: usize, h: f64) -> Mat2 {
        propagator(self.theory, self.energy, self.values[seg], &self.params, h)
    }

    /// Segment containing `x`, or `None` outside `[-L, L]`.
    fn locate(&self, x: f64) -> Option<usize> {
        let n = self.nodes.len();
        if !(x >= self.nodes[0] && x <= self.nodes[n - 1]) {
            return None;
        }
        let i = self.nodes.partition_point(|&node| node <= x);
        Some(i.saturating_sub(1).min(n - 2))
    }
}

/// Stationary solution of a smoothed step.
#[derive(Debug, Clone)]
pub struct NumericalMode {
    pub model: PiecewiseModel,
    pub potential: RegularizedPotential,
    /// State at every node: `[psi, psi_x]` or the Dirac spinor.
    pub states: Vec<Vec2>,
    pub k: f64,
    pub q: C64,
    pub r: C64,
    pub t: C64,
    /// Largest flux deviation relative to the incident flux.
    pub defect: f64,
    /// Largest `|det P - 1|` over segment propagators.
    pub det_defect: f64,
}

fn flux(theory: Theory, params: &PhysicalParams, u: &Vec2) -> f64 {
    match theory {
        Theory::Dirac => 2.0 * params.c() * (u[0].conj() * u[1]).re,
        _ => params.hbar() / params.mass() * (u[0].conj() * u[1]).im,
    }
}

/// Solve for the mode with unit incident amplitude from the left and a
/// purely outgoing (or decaying) wave on the right.
pub fn solve_smooth_mode(
    theory: Theory,
    energy: f64,
    reg: &RegularizedPotential,
    half_length: f64,
    resolution: Resolution,
) -> Result<NumericalMode> {
    let params = *reg.params();
    let k = incident_wavenumber(theory, energy, &params)?.re;
    let model = PiecewiseModel::build(theory, energy, reg, half_length, resolution)?;
    let trans = dispersion(theory, energy, params.v0(), &params);
    let q = trans.value;
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let rest = params.rest_energy();
    let hc = params.hbar() * params.c();

    let start = match theory {
        Theory::Schrodinger | Theory::KleinGordon => Vec2::new(one, i * q),
        Theory::Dirac => {
            let denom = energy - params.v0() + rest;
            if trans.regime == Regime::Threshold && denom.abs() < 0.5 * rest {
                Vec2::new(C64::new(0.0, 0.0), one)
            } else {
                Vec2::new(one, q * hc / denom)
            }
        }
    };

    // Backward sweep from x = L with per-node renormalization.
    let n = model.nodes.len();
    let mut raw = vec![Vec2::zeros(); n];
    let mut logs = vec![0.0f64; n];
    raw[n - 1] = start;
    let mut det_defect = 0.0f64;
    for s in (0..n - 1).rev() {
        let h = model.nodes[s + 1] - model.nodes[s];
        let p = model.segment_propagator(s, -h);
        det_defect = det_defect.max((p.determinant() - one).norm());
        let v = p * raw[s + 1];
        let scale = v.norm();
        raw[s] = v.unscale(scale);
        logs[s] = logs[s + 1] + scale.ln();
    }

    // Split the left-end state into incident and reflected waves.
    let x0 = model.nodes[0];
    let u = raw[0];
    let ratio = match theory {
        Theory::Dirac => u[1] / (hc * k / (energy + rest)),
        _ => u[1] / (i * k),
    };
    let a = 0.5 * (u[0] + ratio) * (-i * k * x0).exp();
    let b = 0.5 * (u[0] - ratio) * (i * k * x0).exp();
    let r = b / a;
    let t = (C64::new(-logs[0], 0.0) - i * q * half_length).exp() / a;
    let states: Vec<Vec2> = raw
        .iter()
        .zip(&logs)
        .map(|(v, l)| v * ((l - logs[0]).exp() / a))
        .collect();

    let j_inc = match theory {
        Theory::Dirac => 2.0 * params.c() * hc * k / (energy + rest),
        _ => params.hbar() * k / params.mass(),
    };
    let j_net = j_inc * (1.0 - r.norm_sqr());
    let j_out = t.norm_sqr() * flux(theory, &params, &start);
    let mut defect = (j_net - j_out).abs() / j_inc;
    for u in &states {
        defect = defect.max((flux(theory, &params, u) - j_net).abs() / j_inc);
    }

    Ok(NumericalMode {
        model,
        potential: *reg,
        states,
        k,
        q,
        r,
        t,
        defect,
        det_defect,
    })
}

impl NumericalMode {
    pub fn theory(&self) -> Theory {
        self.model.theory
    }

    pub fn energy(&self) -> f64 {
        self.model.energy
    }

    /// State at `x`, propagated exactly from the segment's left node.
    pub fn state_at(&self, x: f64) -> Option<Vec2> {
        let s = self.model.locate(x)?;
        Some(self.state_in(s, x))
    }

    fn state_in(&self, seg: usize, x: f64) -> Vec2 {
        self.model.segment_propagator(seg, x - self.model.nodes[seg]) * self.states[seg]
    }

    fn density_from(&self, x: f64, u: &Vec2) -> f64 {
        match self.theory() {
            Theory::Schrodinger => u[0].norm_sqr(),
            Theory::KleinGordon => {
                (self.energy() - self.potential.eval(x)) / self.model.params.rest_energy()
                    * u[0].norm_sqr()
            }
            Theory::Dirac => u.norm_squared(),
        }
    }

    /// Probability density; KFG uses `((E - phi_eps)/mc^2)|u|^2`.
    pub fn density_at(&self, x: f64) -> Option<f64> {
        self.state_at(x).map(|u| self.density_from(x, &u))
    }

    /// `∫_a^b f(x, state(x)) dx` with a five-point Gauss rule on every
    /// segment piece.
    pub fn integrate<F: Fn(f64, &Vec2) -> C64>(&self, a: f64, b: f64, f: F) -> Result<C64> {
        let (first, last) = match (self.model.locate(a), self.model.locate(b)) {
            (Some(i), Some(j)) if a < b => (i, j),
            _ => {
                return Err(Error::InvalidDomain(format!(
                    "integration range [{a}, {b}] must be increasing and inside [-L, L]"
                )))
            }
        };
        let nodes = &self.model.nodes;
        let mut sum = C64::new(0.0, 0.0);
        for s in first..=last {
            let lo = a.max(nodes[s]);
            let hi = b.min(nodes[s + 1]);
            if hi > lo {
                sum += gauss5_complex(|x| f(x, &self.state_in(s, x)), lo, hi);
            }
        }
        Ok(sum)
    }

    /// `-∫ phi'_eps(x) rho_eps(x) dx` over the transition zone.
    pub fn route_b_force(&self) -> Result<f64> {
        let zone = self.model.zone;
        let v = self.integrate(-zone, zone, |x, u| {
            C64::new(-self.potential.derivative(x) * self.density_from(x, u), 0.0)
        })?;
        Ok(v.re)
    }
}

/// Route B force for a single smoothing width.
pub fn route_b_force(
    theory: Theory,
    energy: f64,
    reg: &RegularizedPotential,
    half_length: f64,
    resolution: Resolution,
) -> Result<f64> {
    solve_smooth_mode(theory, energy, reg, half_length, resolution)?.route_b_force()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouteBPoint {
    pub epsilon: f64,
    pub value: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteBSweep {
    pub theory: Theory,
    pub energy: f64,
    pub v0: f64,
    pub shape: Shape,
    pub points: Vec<RouteBPoint>,
}

impl RouteBSweep {
    pub fn series(&self) -> Result<ConvergenceSeries> {
        ConvergenceSeries::new(
            self.points.iter().map(|p| p.epsilon).collect(),
            self.points.iter().map(|p| p.value).collect(),
        )
    }
}

/// Route B force at each width in `epsilons`, solved in parallel.
pub fn route_b_sweep(
    theory: Theory,
    energy: f64,
    params: &PhysicalParams,
    shape: Shape,
    epsilons: &[f64],
    half_length: f64,
    resolution: Resolution,
) -> Result<RouteBSweep> {
    let points = epsilons
        .par_iter()
        .map(|&eps| {
            let reg = RegularizedPotential::new(*params, eps, shape)?;
            let mode = solve_smooth_mode(theory, energy, &reg, half_length, resolution)?;
            Ok(RouteBPoint {
                epsilon: eps,
                value: mode.route_b_force()?,
                defect: mode.defect,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RouteBSweep {
        theory,
        energy,
        v0: params.v0(),
        shape,
        points,
    })
}
