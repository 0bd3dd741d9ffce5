use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;
use stepforce_core::force::kfg_density_tau3;
use stepforce_core::modes::{bc_residuals, fv_lift, fv_state};
use stepforce_core::{
    boundary_terms, delta_conventions, density, density_probe, kfg_density_jump, mean_force_closed,
    solve_step_mode, Location, PhysicalParams, Theory,
};

use crate::commands::{self, relative, ModeSummary, RUN_FREE, RUN_HALF_DT, RUN_SCATTERING};
use crate::config::RunConfig;
use crate::CliError;

/// Tolerances and frozen reference values.
pub mod tol {
    pub const EXACT: f64 = 1e-12;
    pub const FLAGSHIP: f64 = 1e-6;
    /// KFG, E = 2, V0 = 0.5: rho(0+) - rho(0-).
    pub const KFG_JUMP: f64 = -0.7386449;
    /// KFG, E = 2, V0 = 0.5: closed-form mean force.
    pub const KFG_FORCE: f64 = 0.1846612;
    pub const ROUTE_B_SD: f64 = 1e-3;
    pub const ROUTE_B_MIN_ORDER: f64 = 1.0;
    pub const MIN_SHAPES: f64 = 2.0;
    pub const SHAPE_SPREAD: f64 = 1e-3;
    pub const CANDIDATE: f64 = 5e-3;
    pub const SLOPE_NONREL: (f64, f64) = (-2.2, -1.8);
    pub const SLOPE_INFINITE: (f64, f64) = (-1.1, -0.9);
    pub const WEAK_PRODUCT: f64 = 0.05;
    pub const JUMP_RATIO: f64 = 0.01;
    pub const FREE_DEVIATION: f64 = 1e-8;
    pub const SCATTERING_DEVIATION: f64 = 0.02;
    pub const REFINEMENT_RATIO: (f64, f64) = (3.5, 4.5);
    pub const NORM_DRIFT: f64 = 1e-8;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = !value.is_nan()
            && lower.map_or(true, |l| value >= l)
            && upper.map_or(true, |u| value <= u);
        Self {
            name: name.into(),
            value,
            lower,
            upper,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::within(name, value, None, Some(upper))
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::within(name, value, Some(lower), None)
    }

    pub fn between(name: impl Into<String>, value: f64, (lower, upper): (f64, f64)) -> Self {
        Self::within(name, value, Some(lower), Some(upper))
    }

    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::within(name, value, Some(target - tolerance), Some(target + tolerance))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub runtime_budget_s: Option<f64>,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub data: Value,
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub runtime_budget_s: Option<f64>,
    run: fn(&RunConfig, u64) -> Result<(Vec<Check>, Value), CliError>,
}

pub const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "matching-and-flux", runtime_budget_s: Some(5.0), run: matching_and_flux },
    Criterion { id: 2, name: "two-component-jumps", runtime_budget_s: Some(1.0), run: two_component_jumps },
    Criterion { id: 3, name: "density-jump", runtime_budget_s: None, run: density_jump },
    Criterion { id: 4, name: "force-identities", runtime_budget_s: None, run: force_identities },
    Criterion { id: 5, name: "route-b-schrodinger-dirac", runtime_budget_s: Some(60.0), run: route_b_sd },
    Criterion { id: 6, name: "route-b-kfg", runtime_budget_s: Some(120.0), run: route_b_kfg },
    Criterion { id: 7, name: "nonrelativistic-limit", runtime_budget_s: Some(10.0), run: nonrel_limit },
    Criterion { id: 8, name: "infinite-step", runtime_budget_s: Some(60.0), run: infinite_step },
    Criterion { id: 9, name: "smoothed-jump-diagnostics", runtime_budget_s: Some(30.0), run: smoothed_jumps },
    Criterion { id: 10, name: "ehrenfest", runtime_budget_s: Some(120.0), run: ehrenfest },
];

impl Criterion {
    pub fn evaluate(&self, cfg: &RunConfig, seed: u64) -> CriterionOutcome {
        let (checks, error, data) = match (self.run)(cfg, seed) {
            Ok((checks, data)) => (checks, None, data),
            Err(e) => (Vec::new(), Some(e.to_string()), Value::Null),
        };
        CriterionOutcome {
            id: self.id,
            name: self.name,
            passed: error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.passed),
            runtime_budget_s: self.runtime_budget_s,
            checks,
            error,
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool {
    name: "stepforce",
    version: env!("CARGO_PKG_VERSION"),
};

/// Everything `report` emits. Wall-clock time is kept out so that reruns
/// with the same configuration and seed are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub tool: Tool,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
}

/// Run every criterion in order; `on_done` receives each outcome and its
/// elapsed seconds.
pub fn run_suite(cfg: &RunConfig, seed: u64, mut on_done: impl FnMut(&CriterionOutcome, f64)) -> ReportBundle {
    let criteria: Vec<CriterionOutcome> = CRITERIA
        .iter()
        .map(|c| {
            let start = Instant::now();
            let outcome = c.evaluate(cfg, seed);
            on_done(&outcome, start.elapsed().as_secs_f64());
            outcome
        })
        .collect();
    ReportBundle {
        tool: TOOL,
        seed,
        config: cfg.clone(),
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

/// Admissible (E, V0) kept 0.05 away from every regime threshold, in units
/// of the rest energy for the relativistic theories.
fn draw_admissible(rng: &mut ChaCha8Rng, theory: Theory, params: &PhysicalParams) -> (f64, f64) {
    let mc2 = params.rest_energy();
    loop {
        match theory {
            Theory::Schrodinger => {
                let (e, v0): (f64, f64) = (rng.random_range(0.1..5.0), rng.random_range(-3.0..6.0));
                if (e - v0).abs() > 0.05 {
                    return (e, v0);
                }
            }
            _ => {
                let (e, v0) = (rng.random_range(1.05..5.0) * mc2, rng.random_range(-3.0..9.0) * mc2);
                if ((e - v0).abs() - mc2).abs() > 0.05 * mc2 {
                    return (e, v0);
                }
            }
        }
    }
}

fn draw_evanescent(rng: &mut ChaCha8Rng, theory: Theory, params: &PhysicalParams) -> (f64, f64) {
    let mc2 = params.rest_energy();
    match theory {
        Theory::Schrodinger => {
            let e = rng.random_range(0.1..5.0);
            (e, e + rng.random_range(0.05..5.0))
        }
        _ => {
            let e = rng.random_range(1.05..5.0) * mc2;
            (e, e - rng.random_range(-0.95..0.95) * mc2)
        }
    }
}

/// Worst-case residuals over the seeded random sweep of sharp-step modes.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
struct SharpSweep {
    draws_per_theory: usize,
    continuity: f64,
    flux: f64,
    current_jump: f64,
    density_jump_s_d: f64,
    evanescent_unitarity: f64,
    bc_value_jump: f64,
    bc_derivative_jump: f64,
    bc_projected_value: f64,
    bc_projected_derivative: f64,
    kfg_jump_relation: f64,
    density_paths: f64,
    half_jump_relation: f64,
    identity: f64,
    psi_form: f64,
    mass_restatement: f64,
    kinetic_jump: f64,
}

fn sharp_sweep(cfg: &RunConfig, seed: u64) -> Result<SharpSweep, CliError> {
    let base = cfg.params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SharpSweep {
        draws_per_theory: cfg.suite.draws,
        ..SharpSweep::default()
    };
    let max = |slot: &mut f64, v: f64| *slot = slot.max(v);
    for theory in Theory::ALL {
        for _ in 0..cfg.suite.draws {
            let (e, v0) = draw_admissible(&mut rng, theory, &base);
            let mode = solve_step_mode(theory, e, &base.with_v0(v0))?;
            max(&mut s.continuity, mode.continuity_residual());
            max(&mut s.flux, mode.flux_residual());
            let probe = density_probe(&mode)?;
            let j = probe
                .current_left
                .abs()
                .max(probe.current_right.abs())
                .max(incident_current(&mode));
            max(&mut s.current_jump, probe.current_jump().abs() / j);
            if theory != Theory::KleinGordon {
                max(&mut s.density_jump_s_d, relative(probe.rho_right, probe.rho_left));
            }

            let report = boundary_terms(&mode)?;
            max(&mut s.identity, report.relative_identity_residual());

            if theory == Theory::KleinGordon {
                let res = bc_residuals(&fv_lift(&mode)?, &mode.params);
                max(&mut s.bc_value_jump, res.value_jump);
                max(&mut s.bc_derivative_jump, res.derivative_jump);
                max(&mut s.bc_projected_value, res.projected_value);
                max(&mut s.bc_projected_derivative, res.projected_derivative);

                max(&mut s.kfg_jump_relation, kfg_density_jump(&mode)?.residual);
                for loc in [Location::ZeroMinus, Location::ZeroPlus, Location::At(-0.7), Location::At(1.3)] {
                    let a = density(&mode, loc, 0.0)?;
                    let b = kfg_density_tau3(&mode, loc, 0.0)?;
                    max(&mut s.density_paths, (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
                }
                let psi0 = mode.scalar(Location::ZeroMinus)?.0.norm_sqr();
                let half = delta_conventions(&mode)?.half_jump;
                max(&mut s.half_jump_relation, relative(half, -0.5 * v0 / mode.rest_energy() * psi0));

                let force = mean_force_closed(&mode)?;
                max(&mut s.psi_form, relative(force.value, force.psi_form.unwrap_or(f64::NAN)));
                let terms = report.route_c_terms;
                max(
                    &mut s.mass_restatement,
                    relative(terms.mass, -0.5 * v0 * (probe.rho_left + probe.rho_right)),
                );
                let scale = [
                    terms.mass.abs(),
                    terms.potential.abs(),
                    report.route_a.abs(),
                    mode.params.kinetic_scale() * fv_state(&mode, Location::ZeroMinus)?.1.norm_squared(),
                ]
                .into_iter()
                .fold(f64::MIN_POSITIVE, f64::max);
                max(&mut s.kinetic_jump, terms.kinetic.abs() / scale);
            }
        }
        for _ in 0..cfg.suite.draws {
            let (e, v0) = draw_evanescent(&mut rng, theory, &base);
            let mode = solve_step_mode(theory, e, &base.with_v0(v0))?;
            max(&mut s.evanescent_unitarity, (mode.r.norm() - 1.0).abs());
            max(&mut s.continuity, mode.continuity_residual());
            max(&mut s.flux, mode.flux_residual());
        }
    }
    Ok(s)
}

fn incident_current(mode: &stepforce_core::ScatterMode) -> f64 {
    let p = &mode.params;
    match &mode.dirac {
        Some(s) => p.c() * (s.incident.adjoint() * s.alpha * s.incident)[(0, 0)].re,
        None => p.hbar() / p.mass() * mode.k.re,
    }
}

fn kfg_flagship(cfg: &RunConfig) -> Result<ModeSummary, CliError> {
    commands::mode_summary(Theory::KleinGordon, cfg.suite.energy_relativistic, &cfg.params)
}

fn matching_and_flux(cfg: &RunConfig, seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let s = sharp_sweep(cfg, seed)?;
    let checks = vec![
        Check::at_most("max continuity residual", s.continuity, tol::EXACT),
        Check::at_most("max flux residual", s.flux, tol::EXACT),
        Check::at_most("max relative current jump", s.current_jump, tol::EXACT),
        Check::at_most("max relative density jump (S, D)", s.density_jump_s_d, tol::EXACT),
        Check::at_most("max evanescent | |r| - 1 |", s.evanescent_unitarity, tol::EXACT),
    ];
    Ok((checks, to_value(&s)))
}

fn two_component_jumps(cfg: &RunConfig, seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let s = sharp_sweep(cfg, seed)?;
    let mode = solve_step_mode(Theory::KleinGordon, cfg.suite.energy_relativistic, &cfg.params)?;
    let flagship = bc_residuals(&fv_lift(&mode)?, &mode.params);
    let checks = vec![
        Check::at_most("max value jump residual", s.bc_value_jump.max(flagship.value_jump), tol::EXACT),
        Check::at_most(
            "max derivative jump residual",
            s.bc_derivative_jump.max(flagship.derivative_jump),
            tol::EXACT,
        ),
        Check::at_most(
            "max projected value jump",
            s.bc_projected_value.max(flagship.projected_value),
            tol::EXACT,
        ),
        Check::at_most(
            "max projected derivative jump",
            s.bc_projected_derivative.max(flagship.projected_derivative),
            tol::EXACT,
        ),
    ];
    Ok((checks, to_value(&flagship)))
}

fn density_jump(cfg: &RunConfig, seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let s = sharp_sweep(cfg, seed)?;
    let flagship = kfg_flagship(cfg)?;
    let checks = vec![
        Check::at_most("max jump relation residual", s.kfg_jump_relation, tol::EXACT),
        Check::at_most("max density path disagreement", s.density_paths, tol::EXACT),
        Check::at_most("max half-jump relation residual", s.half_jump_relation, tol::EXACT),
        Check::near("flagship density jump", flagship.density_jump, tol::KFG_JUMP, tol::FLAGSHIP),
    ];
    Ok((checks, to_value(&flagship)))
}

fn force_identities(cfg: &RunConfig, seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let s = sharp_sweep(cfg, seed)?;
    let flagships = [
        commands::mode_summary(Theory::Schrodinger, cfg.suite.energy_s, &cfg.params)?,
        kfg_flagship(cfg)?,
        commands::mode_summary(Theory::Dirac, cfg.suite.energy_relativistic, &cfg.params)?,
    ];
    let flagship_identity = flagships
        .iter()
        .map(|f| f.relative_identity_residual)
        .fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("max relative identity residual", s.identity.max(flagship_identity), tol::EXACT),
        Check::at_most("max closed form vs psi form", s.psi_form, tol::EXACT),
        Check::at_most("max mass-term restatement residual", s.mass_restatement, tol::EXACT),
        Check::at_most("max relative kinetic jump", s.kinetic_jump, tol::EXACT),
        Check::near("flagship KFG force", flagships[1].route_a, tol::KFG_FORCE, tol::FLAGSHIP),
    ];
    Ok((checks, to_value(&flagships)))
}

fn route_b_sd(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let mut checks = Vec::new();
    let mut outputs = Vec::new();
    for (theory, energy) in [
        (Theory::Schrodinger, cfg.suite.energy_s),
        (Theory::Dirac, cfg.suite.energy_relativistic),
    ] {
        let out = commands::converge(theory, energy, &cfg.params, &cfg.converge)?;
        let mut good = 0.0;
        for s in &out.shapes {
            let err = Check::at_most(
                format!("{theory} {} relative error", s.shape.name()),
                relative(s.extrapolation.limit, out.route_a),
                tol::ROUTE_B_SD,
            );
            let order = Check::at_least(
                format!("{theory} {} order", s.shape.name()),
                s.extrapolation.order,
                tol::ROUTE_B_MIN_ORDER,
            );
            if err.passed && order.passed {
                good += 1.0;
            }
            checks.extend([err, order]);
        }
        checks.push(Check::at_least(format!("{theory} shapes passing"), good, tol::MIN_SHAPES));
        outputs.push(out);
    }
    Ok((checks, to_value(&outputs)))
}

fn route_b_kfg(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let out = commands::converge(Theory::KleinGordon, cfg.suite.energy_relativistic, &cfg.params, &cfg.converge)?;
    let first = &out.shapes[0].verdict.matched;
    let agreeing = out.shapes.iter().filter(|s| &s.verdict.matched == first).count() as f64;
    let distance = out
        .shapes
        .iter()
        .flat_map(|s| s.verdict.candidates.iter().filter(|c| first.contains(&c.name)))
        .map(|c| c.relative_difference)
        .fold(if first.is_empty() { f64::NAN } else { 0.0 }, f64::max);
    let checks = vec![
        Check::at_most("relative shape spread", out.shape_spread, tol::SHAPE_SPREAD),
        Check::between("candidates matched", first.len() as f64, (1.0, 1.0)),
        Check::at_least("shapes agreeing on the match", agreeing, out.shapes.len() as f64),
        Check::at_most("max relative distance to matched candidate", distance, tol::CANDIDATE),
    ];
    Ok((checks, to_value(&out)))
}

fn non_decreasing_steps(values: &[f64]) -> f64 {
    values.windows(2).filter(|w| !(w[1] < w[0])).count() as f64
}

fn nonrel_limit(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let table = commands::nonrel(&cfg.limits, &cfg.params)?;
    let ok = table
        .rows
        .iter()
        .filter(|r| r.status == stepforce_core::force::RowStatus::Ok)
        .count();
    let density: Vec<f64> = table.rows.iter().map(|r| r.density_residual).collect();
    let force: Vec<f64> = table.rows.iter().map(|r| r.force_residual).collect();
    let checks = vec![
        Check::between("rows in the nonrelativistic regime", ok as f64, (table.rows.len() as f64, table.rows.len() as f64)),
        Check::at_most("non-decreasing density residual steps", non_decreasing_steps(&density), 0.0),
        Check::at_most("non-decreasing force residual steps", non_decreasing_steps(&force), 0.0),
        Check::between("density residual slope", table.density_slope.unwrap_or(f64::NAN), tol::SLOPE_NONREL),
        Check::between("force residual slope", table.force_slope.unwrap_or(f64::NAN), tol::SLOPE_NONREL),
    ];
    Ok((checks, to_value(&table)))
}

fn infinite_step(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let out = commands::infinite_step(&cfg.infinite_step, &cfg.params)?;
    let rows = &out.table.rows;
    let identity = rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    let route_a: Vec<f64> = rows.iter().map(|r| r.route_a).collect();
    let hi = route_a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = route_a.iter().cloned().fold(f64::INFINITY, f64::min);
    let deviations: Vec<f64> = out.weak_product.iter().map(|w| w.deviation).collect();
    let checks = vec![
        Check::at_most("max exact-identity residual", identity, tol::EXACT),
        Check::at_most("relative route A spread over V0", relative(hi, lo), tol::EXACT),
        Check::between("candidate error slope", out.table.error_slope.unwrap_or(f64::NAN), tol::SLOPE_INFINITE),
        Check::at_most("weak-product deviation at the widest epsilon", deviations[0], tol::WEAK_PRODUCT),
        Check::at_most("non-decreasing weak-product steps", non_decreasing_steps(&deviations), 0.0),
    ];
    Ok((checks, to_value(&out)))
}

fn smoothed_jumps(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let records = commands::jumps(&cfg.jumps, &cfg.params)?;
    let mut checks = Vec::new();
    for &shape in &cfg.jumps.shapes {
        let rows: Vec<_> = records.iter().filter(|r| r.shape == shape).map(|r| r.record).collect();
        let value: Vec<f64> = rows.iter().map(|r| r.value_ratio).collect();
        let derivative: Vec<f64> = rows.iter().map(|r| r.derivative_ratio).collect();
        let name = shape.name();
        checks.extend([
            Check::at_most(format!("{name} projected value jump ratio"), value[0], tol::JUMP_RATIO),
            Check::at_most(format!("{name} projected derivative jump ratio"), derivative[0], tol::JUMP_RATIO),
            Check::at_most(format!("{name} non-decreasing value ratio steps"), non_decreasing_steps(&value), 0.0),
            Check::at_most(
                format!("{name} non-decreasing derivative ratio steps"),
                non_decreasing_steps(&derivative),
                0.0,
            ),
        ]);
    }
    Ok((checks, to_value(&records)))
}

fn ehrenfest(cfg: &RunConfig, _seed: u64) -> Result<(Vec<Check>, Value), CliError> {
    let out = commands::ehrenfest(&cfg.ehrenfest, &cfg.params)?;
    let get = |label, f: fn(&commands::RunSummary) -> f64| out.run(label).map_or(f64::NAN, f);
    let drift = out.runs.iter().map(|r| r.max_norm_drift).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("free-particle deviation", get(RUN_FREE, |r| r.max_abs_deviation), tol::FREE_DEVIATION),
        Check::at_most(
            "scattering relative deviation",
            get(RUN_SCATTERING, |r| r.relative_deviation.unwrap_or(f64::NAN)),
            tol::SCATTERING_DEVIATION,
        ),
        Check::at_most(
            "half-dt relative deviation",
            get(RUN_HALF_DT, |r| r.relative_deviation.unwrap_or(f64::NAN)),
            tol::SCATTERING_DEVIATION,
        ),
        Check::between("dt-halving ratio", out.refinement_ratio.unwrap_or(f64::NAN), tol::REFINEMENT_RATIO),
        Check::at_most("max norm drift", drift, tol::NORM_DRIFT),
    ];
    Ok((checks, to_value(&out)))
}
