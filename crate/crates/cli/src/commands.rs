use rayon::prelude::*;
use serde::Serialize;
use stepforce_core::force::{
    a3_weak_product_check, infinite_step_sweep, nonrel_residuals, InfiniteStepTable, NonrelTable,
    WeakProductCheck,
};
use stepforce_core::regularized::{appendix_b_jump_diagnostics, route_b_sweep, JumpRecord, RouteBPoint};
use stepforce_core::timeevo::{ehrenfest_report, EhrenfestReport, EhrenfestSample};
use stepforce_core::{
    boundary_terms, density_probe, extrapolate, mean_force_closed, solve_step_mode, BoundaryTerms,
    DeltaIntegral, Extrapolation, PhysicalParams, RegularizedPotential, Regime, Shape, Theory, C64,
};

use crate::config::{ConvergeConfig, EhrenfestConfig, InfiniteStepConfig, JumpConfig, NonrelConfig};
use crate::output::{Csv, Cell};
use crate::CliError;

/// Relative distance below which a Route B limit is said to match a
/// closed-form candidate.
pub const MATCH_TOLERANCE: f64 = 5e-3;

pub const ROUTE_A_NAME: &str = "closed-form (route A)";
pub const MIDPOINT_NAME: &str = "midpoint convention";

pub fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Sharp-step mode and every mean-force quantity derived from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub theory: Theory,
    pub energy: f64,
    pub v0: f64,
    pub regime: Regime,
    pub k: C64,
    pub q: C64,
    pub r: C64,
    pub t: C64,
    pub rho_left: f64,
    pub rho_right: f64,
    pub density_jump: f64,
    pub current_left: f64,
    pub current_right: f64,
    pub continuity_residual: f64,
    pub flux_residual: f64,
    pub route_a: f64,
    /// KFG only: the same force from the scalar wavefunction at the origin.
    pub route_a_psi_form: Option<f64>,
    pub route_c: f64,
    pub route_c_terms: BoundaryTerms,
    pub identity_residual: f64,
    pub relative_identity_residual: f64,
    pub delta_integral: DeltaIntegral,
}

pub fn mode_summary(theory: Theory, energy: f64, params: &PhysicalParams) -> Result<ModeSummary, CliError> {
    let mode = solve_step_mode(theory, energy, params)?;
    let probe = density_probe(&mode)?;
    let force = mean_force_closed(&mode)?;
    let report = boundary_terms(&mode)?;
    Ok(ModeSummary {
        theory,
        energy,
        v0: params.v0(),
        regime: mode.regime,
        k: mode.k,
        q: mode.q,
        r: mode.r,
        t: mode.t,
        rho_left: probe.rho_left,
        rho_right: probe.rho_right,
        density_jump: probe.density_jump(),
        current_left: probe.current_left,
        current_right: probe.current_right,
        continuity_residual: mode.continuity_residual(),
        flux_residual: mode.flux_residual(),
        route_a: force.value,
        route_a_psi_form: force.psi_form,
        route_c: report.route_c(),
        route_c_terms: report.route_c_terms,
        identity_residual: report.identity_residual,
        relative_identity_residual: report.relative_identity_residual(),
        delta_integral: report.delta_integral,
    })
}

impl ModeSummary {
    /// Human-readable `key = value` lines.
    pub fn lines(&self) -> Vec<(String, String)> {
        use crate::output::fmt_f64 as f;
        let c = |z: C64| {
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            format!("{} {sign} {}i", f(z.re), f(z.im.abs()))
        };
        let mut out = vec![
            ("theory".into(), self.theory.to_string()),
            ("energy".into(), f(self.energy)),
            ("v0".into(), f(self.v0)),
            ("regime".into(), self.regime.to_string()),
            ("k".into(), c(self.k)),
            ("q".into(), c(self.q)),
            ("r".into(), c(self.r)),
            ("t".into(), c(self.t)),
            ("rho(0-)".into(), f(self.rho_left)),
            ("rho(0+)".into(), f(self.rho_right)),
            ("density jump".into(), f(self.density_jump)),
            ("route A force".into(), f(self.route_a)),
        ];
        if let Some(p) = self.route_a_psi_form {
            out.push(("route A force (psi form)".into(), f(p)));
        }
        out.extend([
            ("route C kinetic term".into(), f(self.route_c_terms.kinetic)),
            ("route C mass term".into(), f(self.route_c_terms.mass)),
            ("route C potential term".into(), f(self.route_c_terms.potential)),
            ("identity residual".into(), f(self.identity_residual)),
            ("delta half-jump".into(), f(self.delta_integral.half_jump)),
            ("delta midpoint".into(), f(self.delta_integral.midpoint)),
        ]);
        out
    }
}

/// A closed-form value a Route B limit may converge to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub name: &'static str,
    pub value: f64,
    pub relative_difference: f64,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub candidates: Vec<Candidate>,
    /// Candidate names within tolerance, collapsing coincident values.
    pub matched: Vec<&'static str>,
    pub text: String,
}

/// Compare `limit` with Route A and with the midpoint-convention value
/// `-V0 (rho(0+) + rho(0-)) / 2`.
pub fn verdict(limit: f64, route_a: f64, midpoint_force: f64) -> Verdict {
    let cand = |name, value| {
        let d = relative(limit, value);
        Candidate {
            name,
            value,
            relative_difference: d,
            matched: d <= MATCH_TOLERANCE,
        }
    };
    let a = cand(ROUTE_A_NAME, route_a);
    let m = cand(MIDPOINT_NAME, midpoint_force);
    let coincide = relative(route_a, midpoint_force) <= MATCH_TOLERANCE;
    let (matched, text) = match (a.matched, m.matched) {
        (true, _) if coincide => (
            vec![a.name],
            format!(
                "matches {} within {:.0e} (relative difference {:.3e}); the midpoint convention coincides for this theory",
                a.name, MATCH_TOLERANCE, a.relative_difference
            ),
        ),
        (true, false) | (false, true) => {
            let (hit, other) = if a.matched { (&a, &m) } else { (&m, &a) };
            (
                vec![hit.name],
                format!(
                    "matches {} within {:.0e} (relative difference {:.3e}); differs from {} by {:.3e} relative",
                    hit.name, MATCH_TOLERANCE, hit.relative_difference, other.name, other.relative_difference
                ),
            )
        }
        (true, true) => (
            vec![a.name, m.name],
            "ambiguous: both candidates lie within tolerance".to_string(),
        ),
        (false, false) => (
            vec![],
            format!(
                "matches neither: {:.3e} from {}, {:.3e} from {}",
                a.relative_difference, a.name, m.relative_difference, m.name
            ),
        ),
    };
    Verdict {
        candidates: vec![a, m],
        matched,
        text,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeConvergence {
    pub shape: Shape,
    pub points: Vec<RouteBPoint>,
    pub extrapolation: Extrapolation,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeOutput {
    pub theory: Theory,
    pub energy: f64,
    pub v0: f64,
    pub route_a: f64,
    pub midpoint_force: f64,
    pub shapes: Vec<ShapeConvergence>,
    /// (max - min) / max |limit| over shapes.
    pub shape_spread: f64,
    pub verdict: String,
}

pub fn converge(
    theory: Theory,
    energy: f64,
    params: &PhysicalParams,
    cfg: &ConvergeConfig,
) -> Result<ConvergeOutput, CliError> {
    let sharp = mode_summary(theory, energy, params)?;
    let midpoint_force = -params.v0() * sharp.delta_integral.midpoint;
    let mut shapes = Vec::with_capacity(cfg.shapes.len());
    for &shape in &cfg.shapes {
        let sweep = route_b_sweep(
            theory,
            energy,
            params,
            shape,
            &cfg.epsilons,
            cfg.half_length,
            cfg.resolution,
        )?;
        let extrapolation = extrapolate(&sweep.series()?)?;
        shapes.push(ShapeConvergence {
            shape,
            verdict: verdict(extrapolation.limit, sharp.route_a, midpoint_force),
            points: sweep.points,
            extrapolation,
        });
    }
    let limits: Vec<f64> = shapes.iter().map(|s| s.extrapolation.limit).collect();
    let hi = limits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = limits.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = limits.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let shape_spread = if scale == 0.0 { 0.0 } else { (hi - lo) / scale };
    let first = &shapes[0].verdict.matched;
    let verdict = if shapes.iter().any(|s| &s.verdict.matched != first) {
        format!("shape-dependent: relative spread {shape_spread:.3e}")
    } else {
        shapes[0].verdict.text.clone()
    };
    Ok(ConvergeOutput {
        theory,
        energy,
        v0: params.v0(),
        route_a: sharp.route_a,
        midpoint_force,
        shapes,
        shape_spread,
        verdict,
    })
}

impl ConvergeOutput {
    pub fn csv(&self) -> Csv {
        let mut csv = Csv::new(&["theory", "shape", "epsilon", "force", "defect"]);
        for s in &self.shapes {
            for p in &s.points {
                csv.row(&[
                    self.theory.tag().into(),
                    s.shape.name().into(),
                    p.epsilon.into(),
                    p.value.into(),
                    p.defect.into(),
                ]);
            }
        }
        csv
    }
}

pub fn nonrel(cfg: &NonrelConfig, params: &PhysicalParams) -> Result<NonrelTable, CliError> {
    Ok(nonrel_residuals(cfg.e_nr, &cfg.c_list, &params.with_v0(cfg.v0))?)
}

pub fn nonrel_csv(table: &NonrelTable) -> Csv {
    let mut csv = Csv::new(&["c", "status", "density_residual", "force_residual"]);
    for r in &table.rows {
        csv.row(&[r.c.into(), r.status.tag().into(), r.density_residual.into(), r.force_residual.into()]);
    }
    csv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfiniteStepOutput {
    pub table: InfiniteStepTable,
    pub weak_product: Vec<WeakProductCheck>,
}

pub fn infinite_step(cfg: &InfiniteStepConfig, params: &PhysicalParams) -> Result<InfiniteStepOutput, CliError> {
    let table = infinite_step_sweep(cfg.energy, &cfg.v0_list, params)?;
    let w = &cfg.weak_product;
    let barrier = params.with_v0(w.v0_ratio * cfg.energy);
    let weak_product = w
        .epsilons
        .par_iter()
        .map(|&eps| {
            let reg = RegularizedPotential::new(barrier, eps, w.shape)?;
            a3_weak_product_check(cfg.energy, &reg, w.window, w.half_length, w.resolution)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(InfiniteStepOutput { table, weak_product })
}

impl InfiniteStepOutput {
    pub fn table_csv(&self) -> Csv {
        let mut csv = Csv::new(&[
            "v0",
            "status",
            "route_a",
            "exact",
            "identity_residual",
            "candidate",
            "candidate_error",
        ]);
        for r in &self.table.rows {
            csv.row(&[
                r.v0.into(),
                r.status.tag().into(),
                r.route_a.into(),
                r.exact.into(),
                r.identity_residual.into(),
                r.candidate.into(),
                r.candidate_error.into(),
            ]);
        }
        csv
    }

    pub fn weak_product_csv(&self) -> Csv {
        let mut csv = Csv::new(&[
            "v0",
            "epsilon",
            "window",
            "integral_re",
            "integral_im",
            "target_re",
            "target_im",
            "deviation",
        ]);
        for w in &self.weak_product {
            csv.row(&[
                w.v0.into(),
                w.epsilon.into(),
                w.window.into(),
                w.integral.re.into(),
                w.integral.im.into(),
                w.target.re.into(),
                w.target.im.into(),
                w.deviation.into(),
            ]);
        }
        csv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeJump {
    pub shape: Shape,
    pub record: JumpRecord,
}

pub fn jumps(cfg: &JumpConfig, params: &PhysicalParams) -> Result<Vec<ShapeJump>, CliError> {
    let pairs: Vec<(Shape, f64)> = cfg
        .shapes
        .iter()
        .flat_map(|&s| cfg.epsilons.iter().map(move |&e| (s, e)))
        .collect();
    let records = pairs
        .par_iter()
        .map(|&(shape, eps)| {
            let reg = RegularizedPotential::new(*params, eps, shape)?;
            let record = appendix_b_jump_diagnostics(cfg.energy, &reg, cfg.delta, cfg.half_length, cfg.resolution)?;
            Ok(ShapeJump { shape, record })
        })
        .collect::<Result<Vec<_>, stepforce_core::Error>>()?;
    Ok(records)
}

pub fn jumps_csv(records: &[ShapeJump]) -> Csv {
    let mut csv = Csv::new(&[
        "shape",
        "epsilon",
        "delta",
        "value_ratio",
        "derivative_ratio",
        "value_deviation",
        "derivative_deviation",
    ]);
    for j in records {
        let r = &j.record;
        csv.row(&[
            j.shape.name().into(),
            r.epsilon.into(),
            r.delta.into(),
            r.value_ratio.into(),
            r.derivative_ratio.into(),
            r.value_deviation.into(),
            r.derivative_deviation.into(),
        ]);
    }
    csv
}

/// Scalar summary of one evolution run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: &'static str,
    pub v0: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub spacing: f64,
    pub max_abs_deviation: f64,
    pub peak_force: f64,
    pub relative_deviation: Option<f64>,
    pub max_norm_drift: f64,
    pub max_momentum_residue: f64,
    pub final_left_mass: f64,
    pub final_right_mass: f64,
}

impl RunSummary {
    fn of(label: &'static str, v0: f64, r: &EhrenfestReport) -> Self {
        Self {
            label,
            v0,
            dt: r.dt,
            n_steps: r.n_steps,
            spacing: r.spacing,
            max_abs_deviation: r.max_abs_deviation,
            peak_force: r.peak_force,
            relative_deviation: r.relative_deviation,
            max_norm_drift: r.max_norm_drift,
            max_momentum_residue: r.max_momentum_residue,
            final_left_mass: r.final_left_mass,
            final_right_mass: r.final_right_mass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EhrenfestOutput {
    pub runs: Vec<RunSummary>,
    /// Deviation at dt over deviation at dt/2, when refined.
    pub refinement_ratio: Option<f64>,
    #[serde(skip)]
    pub series: Vec<(&'static str, Vec<EhrenfestSample>)>,
}

pub const RUN_SCATTERING: &str = "scattering";
pub const RUN_HALF_DT: &str = "scattering-half-dt";
pub const RUN_FREE: &str = "free";

pub fn ehrenfest(cfg: &EhrenfestConfig, params: &PhysicalParams) -> Result<EhrenfestOutput, CliError> {
    let n = cfg.n_steps();
    let mut jobs = vec![(RUN_SCATTERING, params.v0(), cfg.dt, n, cfg.stride)];
    if cfg.refine {
        jobs.push((RUN_HALF_DT, params.v0(), 0.5 * cfg.dt, 2 * n, 2 * cfg.stride));
    }
    if cfg.free_run {
        jobs.push((RUN_FREE, 0.0, cfg.dt, n, cfg.stride));
    }
    let reports = jobs
        .par_iter()
        .map(|&(label, v0, dt, steps, stride)| {
            let reg = RegularizedPotential::new(params.with_v0(v0), cfg.epsilon, cfg.shape)?;
            Ok((label, v0, ehrenfest_report(&cfg.packet, &reg, dt, steps, stride)?))
        })
        .collect::<Result<Vec<_>, stepforce_core::Error>>()?;
    let dev = |label| {
        reports
            .iter()
            .find(|(l, _, _)| *l == label)
            .and_then(|(_, _, r)| r.relative_deviation)
    };
    let refinement_ratio = match (dev(RUN_SCATTERING), dev(RUN_HALF_DT)) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(EhrenfestOutput {
        runs: reports.iter().map(|(l, v0, r)| RunSummary::of(l, *v0, r)).collect(),
        refinement_ratio,
        series: reports.into_iter().map(|(l, _, r)| (l, r.samples)).collect(),
    })
}

impl EhrenfestOutput {
    pub fn csv(&self) -> Csv {
        let mut csv = Csv::new(&["run", "t", "px_expect", "dpdt", "force_expect", "norm"]);
        for (label, samples) in &self.series {
            for s in samples {
                csv.row(&[
                    Cell::S(label),
                    s.t.into(),
                    s.px_expect.into(),
                    s.dpdt.into(),
                    s.force_expect.into(),
                    s.norm.into(),
                ]);
            }
        }
        csv
    }

    pub fn run(&self, label: &str) -> Option<&RunSummary> {
        self.runs.iter().find(|r| r.label == label)
    }
}
