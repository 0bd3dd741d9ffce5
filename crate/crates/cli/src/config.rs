use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stepforce_core::regularized::{DEFAULT_EPSILONS, DEFAULT_HALF_LENGTH};
use stepforce_core::timeevo::PacketSpec;
use stepforce_core::{GridSpec, PhysicalParams, Resolution, Shape, Theory};

use crate::CliError;

/// Everything a run needs. Missing blocks and keys take the defaults below;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Physical constants; `v0` is the step height for mode, converge,
    /// jumps, ehrenfest and the suite flagships.
    pub params: PhysicalParams,
    pub mode: ModeConfig,
    pub converge: ConvergeConfig,
    pub limits: NonrelConfig,
    #[serde(rename = "infinite-step")]
    pub infinite_step: InfiniteStepConfig,
    pub jumps: JumpConfig,
    pub ehrenfest: EhrenfestConfig,
    pub suite: SuiteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::natural(0.5),
            mode: ModeConfig::default(),
            converge: ConvergeConfig::default(),
            limits: NonrelConfig::default(),
            infinite_step: InfiniteStepConfig::default(),
            jumps: JumpConfig::default(),
            ehrenfest: EhrenfestConfig::default(),
            suite: SuiteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeConfig {
    pub theory: Theory,
    pub energy: f64,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            theory: Theory::KleinGordon,
            energy: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub theory: Theory,
    pub energy: f64,
    pub shapes: Vec<Shape>,
    /// Strictly decreasing smoothing widths.
    pub epsilons: Vec<f64>,
    pub half_length: f64,
    pub resolution: Resolution,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self {
            theory: Theory::KleinGordon,
            energy: 2.0,
            shapes: Shape::ALL.to_vec(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            half_length: DEFAULT_HALF_LENGTH,
            resolution: Resolution::default(),
        }
    }
}

/// Nonrelativistic-limit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonrelConfig {
    pub e_nr: f64,
    pub v0: f64,
    pub c_list: Vec<f64>,
}

impl Default for NonrelConfig {
    fn default() -> Self {
        Self {
            e_nr: 0.1,
            v0: 0.05,
            c_list: vec![10.0, 100.0, 1000.0],
        }
    }
}

/// High-barrier Schrödinger table and the smoothed product check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InfiniteStepConfig {
    pub energy: f64,
    pub v0_list: Vec<f64>,
    pub weak_product: WeakProductConfig,
}

impl Default for InfiniteStepConfig {
    fn default() -> Self {
        Self {
            energy: 1.0,
            v0_list: vec![10.0, 100.0, 1000.0],
            weak_product: WeakProductConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakProductConfig {
    /// Barrier height in units of the energy.
    pub v0_ratio: f64,
    /// Strictly decreasing smoothing widths.
    pub epsilons: Vec<f64>,
    pub window: f64,
    pub shape: Shape,
    pub half_length: f64,
    pub resolution: Resolution,
}

impl Default for WeakProductConfig {
    fn default() -> Self {
        Self {
            v0_ratio: 1e4,
            epsilons: vec![1e-3, 5e-4, 2.5e-4],
            window: 0.05,
            shape: Shape::Logistic,
            half_length: DEFAULT_HALF_LENGTH,
            resolution: Resolution::default(),
        }
    }
}

/// Smoothed-mode jump diagnostics for the KFG two-component lift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JumpConfig {
    pub energy: f64,
    /// Probe offset from the origin on each side.
    pub delta: f64,
    /// Strictly decreasing smoothing widths.
    pub epsilons: Vec<f64>,
    pub shapes: Vec<Shape>,
    pub half_length: f64,
    pub resolution: Resolution,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self {
            energy: 2.0,
            delta: 0.2,
            epsilons: vec![0.01, 0.005],
            shapes: vec![Shape::Logistic, Shape::ErrorFunction],
            half_length: DEFAULT_HALF_LENGTH,
            resolution: Resolution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EhrenfestConfig {
    pub packet: PacketSpec,
    pub epsilon: f64,
    pub shape: Shape,
    pub dt: f64,
    pub duration: f64,
    /// Keep every `stride`-th step in the time series.
    pub stride: usize,
    /// Also run at dt/2 and report the deviation ratio.
    pub refine: bool,
    /// Also run the same packet with no step.
    pub free_run: bool,
}

impl Default for EhrenfestConfig {
    fn default() -> Self {
        Self {
            packet: PacketSpec {
                x0: -15.0,
                sigma: 2.0,
                k0: 1.0,
                grid: GridSpec {
                    x_min: -110.0,
                    x_max: 90.0,
                    n_points: 10001,
                },
            },
            epsilon: 0.1,
            shape: Shape::Logistic,
            dt: 0.04,
            duration: 30.0,
            stride: 5,
            refine: true,
            free_run: true,
        }
    }
}

impl EhrenfestConfig {
    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Randomized sweeps and flagship energies used by `report`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    /// Random admissible (E, V0) draws per theory.
    pub draws: usize,
    pub energy_s: f64,
    pub energy_relativistic: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            draws: 100,
            energy_s: 1.0,
            energy_relativistic: 2.0,
        }
    }
}

fn config_error(msg: String) -> CliError {
    CliError::Config(msg)
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(format!("{name} must be positive and finite, got {v}")))
    }
}

fn widths(name: &str, list: &[f64], min_len: usize) -> Result<(), CliError> {
    if list.len() < min_len {
        return Err(config_error(format!(
            "{name} needs at least {min_len} entries, got {}",
            list.len()
        )));
    }
    for &v in list {
        positive(name, v)?;
    }
    if list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(config_error(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

fn nonempty<T>(name: &str, list: &[T]) -> Result<(), CliError> {
    if list.is_empty() {
        Err(config_error(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_error(e.to_string()))?;
        Ok(cfg)
    }

    /// Schema checks that do not depend on the physics.
    pub fn validate(&self) -> Result<(), CliError> {
        finite("mode.energy", self.mode.energy)?;

        let c = &self.converge;
        finite("converge.energy", c.energy)?;
        nonempty("converge.shapes", &c.shapes)?;
        widths("converge.epsilons", &c.epsilons, 3)?;
        positive("converge.half_length", c.half_length)?;

        let l = &self.limits;
        positive("limits.e_nr", l.e_nr)?;
        finite("limits.v0", l.v0)?;
        nonempty("limits.c_list", &l.c_list)?;
        for &v in &l.c_list {
            positive("limits.c_list", v)?;
        }

        let i = &self.infinite_step;
        positive("infinite-step.energy", i.energy)?;
        nonempty("infinite-step.v0_list", &i.v0_list)?;
        for &v in &i.v0_list {
            finite("infinite-step.v0_list", v)?;
        }
        let w = &i.weak_product;
        positive("infinite-step.weak_product.v0_ratio", w.v0_ratio)?;
        widths("infinite-step.weak_product.epsilons", &w.epsilons, 1)?;
        positive("infinite-step.weak_product.window", w.window)?;
        positive("infinite-step.weak_product.half_length", w.half_length)?;

        let j = &self.jumps;
        finite("jumps.energy", j.energy)?;
        positive("jumps.delta", j.delta)?;
        widths("jumps.epsilons", &j.epsilons, 1)?;
        nonempty("jumps.shapes", &j.shapes)?;
        positive("jumps.half_length", j.half_length)?;

        let e = &self.ehrenfest;
        positive("ehrenfest.epsilon", e.epsilon)?;
        positive("ehrenfest.dt", e.dt)?;
        positive("ehrenfest.duration", e.duration)?;
        if e.n_steps() < 2 {
            return Err(config_error(
                "ehrenfest.duration must cover at least 2 time steps".into(),
            ));
        }
        if e.stride == 0 {
            return Err(config_error("ehrenfest.stride must be at least 1".into()));
        }
        e.packet.validate()?;

        if self.suite.draws == 0 {
            return Err(config_error("suite.draws must be at least 1".into()));
        }
        finite("suite.energy_s", self.suite.energy_s)?;
        finite("suite.energy_relativistic", self.suite.energy_relativistic)?;
        Ok(())
    }
}
