//! Crank-Nicolson evolution of Schrödinger wavepackets on a smoothed step
//! and the Ehrenfest comparison of d<p>/dt with the mean force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::params::PhysicalParams;
use crate::potential::RegularizedPotential;
use crate::C64;

/// Largest |psi| tolerated near either wall.
pub const WALL_TOLERANCE: f64 = 1e-6;
/// Number of nodes at each wall watched by the contamination guard.
pub const WALL_BAND: usize = 16;

/// Gaussian packet `exp(-(x - x0)^2 / 4 sigma^2 + i k0 x)` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    pub grid: GridSpec,
}

impl PacketSpec {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let bad = |msg: String| Err(Error::InvalidPacket(msg));
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return bad(format!("k0 must be positive, got {}", self.k0));
        }
        if !(self.x0 < 0.0) {
            return bad(format!("x0 must lie left of the step, got {}", self.x0));
        }
        if self.x0.abs() < 5.0 * self.sigma {
            return bad(format!(
                "packet overlaps the interface: |x0| = {} < 5 sigma = {}",
                self.x0.abs(),
                5.0 * self.sigma
            ));
        }
        if self.grid.x_min > self.x0 - 10.0 * self.sigma || self.grid.x_max < 10.0 * self.sigma {
            return bad(format!(
                "grid [{}, {}] must span [x0 - 10 sigma, 10 sigma] = [{}, {}]",
                self.grid.x_min,
                self.grid.x_max,
                self.x0 - 10.0 * self.sigma,
                10.0 * self.sigma
            ));
        }
        Ok(())
    }
}

/// Wavefunction samples at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub x: Vec<f64>,
    pub psi: Vec<C64>,
    pub t: f64,
    pub potential: RegularizedPotential,
}

impl EvolutionState {
    pub fn params(&self) -> &PhysicalParams {
        self.potential.params()
    }

    pub fn spacing(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Trapezoid rule for `∫ g dx` with `g` sampled on the grid.
    fn trapezoid<F: Fn(usize) -> f64>(&self, g: F) -> f64 {
        let n = self.x.len();
        let inner: f64 = (1..n - 1).map(&g).sum();
        self.spacing() * (inner + 0.5 * (g(0) + g(n - 1)))
    }

    pub fn norm(&self) -> f64 {
        self.trapezoid(|j| self.psi[j].norm_sqr())
    }

    pub fn expectation_position(&self) -> f64 {
        self.trapezoid(|j| self.x[j] * self.psi[j].norm_sqr())
    }

    /// Probability on each side of x = 0.
    pub fn side_masses(&self) -> (f64, f64) {
        let left = self.trapezoid(|j| if self.x[j] < 0.0 { self.psi[j].norm_sqr() } else { 0.0 });
        let right = self.trapezoid(|j| if self.x[j] > 0.0 { self.psi[j].norm_sqr() } else { 0.0 });
        (left, right)
    }

    /// Largest |psi| within the guarded band at either wall.
    pub fn wall_amplitude(&self) -> f64 {
        let n = self.psi.len();
        let band = WALL_BAND.min(n / 2);
        self.psi[..band]
            .iter()
            .chain(&self.psi[n - band..])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn check_walls(&self) -> Result<()> {
        let amplitude = self.wall_amplitude();
        if amplitude > WALL_TOLERANCE {
            return Err(Error::BoxTooSmall {
                time: self.t,
                amplitude,
            });
        }
        Ok(())
    }
}

/// Normalized Gaussian packet at t = 0.
pub fn gaussian_packet(spec: &PacketSpec, potential: &RegularizedPotential) -> Result<EvolutionState> {
    spec.validate()?;
    let x = spec.grid.build()?;
    let psi = x
        .iter()
        .map(|&xi| {
            let d = xi - spec.x0;
            C64::new(-d * d / (4.0 * spec.sigma * spec.sigma), spec.k0 * xi).exp()
        })
        .collect();
    let mut state = EvolutionState {
        x,
        psi,
        t: 0.0,
        potential: *potential,
    };
    let scale = 1.0 / state.norm().sqrt();
    state.psi.iter_mut().for_each(|z| *z *= scale);
    state.check_walls()?;
    Ok(state)
}

/// `<p>` with a fourth-order central difference; the imaginary part is a
/// consistency residue and should vanish.
pub fn expectation_momentum_complex(state: &EvolutionState) -> C64 {
    let psi = &state.psi;
    let n = psi.len();
    let h = state.spacing();
    let hbar = state.params().hbar();
    let scale = C64::new(0.0, -hbar / (12.0 * h));
    let mut sum = C64::new(0.0, 0.0);
    for j in 2..n.saturating_sub(2) {
        let d = 8.0 * (psi[j + 1] - psi[j - 1]) - (psi[j + 2] - psi[j - 2]);
        sum += psi[j].conj() * d;
    }
    sum * scale * h
}

pub fn expectation_momentum(state: &EvolutionState) -> f64 {
    expectation_momentum_complex(state).re
}

/// `-∫ phi'_eps |psi|^2 dx` by the trapezoid rule.
pub fn expectation_force(state: &EvolutionState) -> f64 {
    if state.potential.v0() == 0.0 {
        return 0.0;
    }
    -state.trapezoid(|j| state.potential.derivative(state.x[j]) * state.psi[j].norm_sqr())
}

/// Largest step accepted for a state: `dt <= hbar / (2 (4 <T> + |V0|))`.
///
/// CN is unconditionally stable; the bound keeps the phase advance per step
/// of the populated energies below one radian.
pub fn max_time_step(state: &EvolutionState) -> f64 {
    let p = state.params();
    let h = state.spacing();
    let n = state.psi.len();
    let grad: f64 = (0..n - 1)
        .map(|j| (state.psi[j + 1] - state.psi[j]).norm_sqr())
        .sum::<f64>()
        / h;
    let kinetic = p.kinetic_scale() * grad;
    p.hbar() / (2.0 * (4.0 * kinetic + p.v0().abs()))
}

/// Crank-Nicolson stepper with Dirichlet walls and a prefactored
/// tridiagonal solve.
struct Stepper {
    diag_rhs: Vec<C64>,
    off: C64,
    c_prime: Vec<C64>,
    inv_denom: Vec<C64>,
    scratch: Vec<C64>,
}

impl Stepper {
    fn new(state: &EvolutionState, dt: f64) -> Self {
        let p = state.params();
        let h = state.spacing();
        let hbar = p.hbar();
        let t_scale = hbar * hbar / (2.0 * p.mass() * h * h);
        let half = C64::new(0.0, 0.5 * dt / hbar);
        let n = state.x.len();
        let m = n - 2;
        // A = 1 + i dt H / 2 hbar, B = 1 - i dt H / 2 hbar; H has constant
        // off-diagonal -t_scale.
        let off = -half * t_scale;
        let mut diag_lhs = Vec::with_capacity(m);
        let mut diag_rhs = Vec::with_capacity(m);
        for j in 1..n - 1 {
            let hjj = 2.0 * t_scale + state.potential.eval(state.x[j]);
            diag_lhs.push(1.0 + half * hjj);
            diag_rhs.push(1.0 - half * hjj);
        }
        let mut c_prime = vec![C64::new(0.0, 0.0); m];
        let mut inv_denom = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            let denom = if j == 0 {
                diag_lhs[0]
            } else {
                diag_lhs[j] - off * c_prime[j - 1]
            };
            inv_denom[j] = 1.0 / denom;
            c_prime[j] = off * inv_denom[j];
        }
        Self {
            diag_rhs,
            off,
            c_prime,
            inv_denom,
            scratch: vec![C64::new(0.0, 0.0); m],
        }
    }

    fn step(&mut self, psi: &mut [C64]) {
        let n = psi.len();
        let m = n - 2;
        // The rhs uses B = conj of A's off-diagonal.
        let off_rhs = -self.off;
        let d = &mut self.scratch;
        for j in 0..m {
            let i = j + 1;
            d[j] = self.diag_rhs[j] * psi[i] + off_rhs * (psi[i - 1] + psi[i + 1]);
        }
        d[0] *= self.inv_denom[0];
        for j in 1..m {
            d[j] = (d[j] - self.off * d[j - 1]) * self.inv_denom[j];
        }
        for j in (0..m - 1).rev() {
            d[j] = d[j] - self.c_prime[j] * d[j + 1];
        }
        psi[0] = C64::new(0.0, 0.0);
        psi[n - 1] = C64::new(0.0, 0.0);
        psi[1..n - 1].copy_from_slice(d);
    }
}

fn check_step(state: &EvolutionState, dt: f64) -> Result<()> {
    if state.x.len() < 8 {
        return Err(Error::InvalidGrid(format!(
            "evolution needs at least 8 grid points, got {}",
            state.x.len()
        )));
    }
    let bound = max_time_step(state);
    if !(dt.is_finite() && dt > 0.0 && dt <= bound) {
        return Err(Error::InvalidTimeStep(format!(
            "dt = {dt} must lie in (0, {bound}]"
        )));
    }
    Ok(())
}

/// Advance `state` by `n_steps` steps of size `dt`.
pub fn evolve(mut state: EvolutionState, dt: f64, n_steps: usize) -> Result<EvolutionState> {
    check_step(&state, dt)?;
    let mut stepper = Stepper::new(&state, dt);
    let t0 = state.t;
    for n in 1..=n_steps {
        stepper.step(&mut state.psi);
        state.t = t0 + n as f64 * dt;
        state.check_walls()?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EhrenfestSample {
    pub t: f64,
    pub px_expect: f64,
    pub dpdt: f64,
    pub force_expect: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestReport {
    pub dt: f64,
    pub n_steps: usize,
    pub spacing: f64,
    pub samples: Vec<EhrenfestSample>,
    /// max |d<p>/dt - <f>| over interior times
    pub max_abs_deviation: f64,
    pub peak_force: f64,
    /// `max_abs_deviation / peak_force`; `None` when no force acts.
    pub relative_deviation: Option<f64>,
    pub max_norm_drift: f64,
    /// Largest imaginary residue of <p>.
    pub max_momentum_residue: f64,
    pub final_left_mass: f64,
    pub final_right_mass: f64,
}

/// Evolve a packet and compare the central difference of <p> with <f> at
/// every interior step. Every `stride`-th step is kept in `samples`.
pub fn ehrenfest_report(
    spec: &PacketSpec,
    potential: &RegularizedPotential,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<EhrenfestReport> {
    if n_steps < 2 {
        return Err(Error::InvalidTimeStep(format!(
            "need at least 2 steps, got {n_steps}"
        )));
    }
    let stride = stride.max(1);
    let mut state = gaussian_packet(spec, potential)?;
    check_step(&state, dt)?;
    let mut stepper = Stepper::new(&state, dt);

    let mut momentum = Vec::with_capacity(n_steps + 1);
    let mut force = Vec::with_capacity(n_steps + 1);
    let mut norm = Vec::with_capacity(n_steps + 1);
    let mut residue = 0.0f64;
    let mut record = |s: &EvolutionState| {
        let p = expectation_momentum_complex(s);
        residue = residue.max(p.im.abs());
        momentum.push(p.re);
        force.push(expectation_force(s));
        norm.push(s.norm());
    };
    record(&state);
    for n in 1..=n_steps {
        stepper.step(&mut state.psi);
        state.t = n as f64 * dt;
        state.check_walls()?;
        record(&state);
    }

    let mut samples = Vec::new();
    let mut max_abs_deviation = 0.0f64;
    for n in 1..n_steps {
        let dpdt = (momentum[n + 1] - momentum[n - 1]) / (2.0 * dt);
        max_abs_deviation = max_abs_deviation.max((dpdt - force[n]).abs());
        if n % stride == 0 {
            samples.push(EhrenfestSample {
                t: n as f64 * dt,
                px_expect: momentum[n],
                dpdt,
                force_expect: force[n],
                norm: norm[n],
            });
        }
    }
    let peak_force = force.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let max_norm_drift = norm.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
    let (final_left_mass, final_right_mass) = state.side_masses();
    Ok(EhrenfestReport {
        dt,
        n_steps,
        spacing: state.spacing(),
        samples,
        max_abs_deviation,
        peak_force,
        relative_deviation: (peak_force > 0.0).then(|| max_abs_deviation / peak_force),
        max_norm_drift,
        max_momentum_residue: residue,
        final_left_mass,
        final_right_mass,
    })
}
