//! Jumps of the Feshbach-Villars components across a smoothed KFG step.
//!
//! The smooth mode is sampled at `-delta` and `+delta`, continued to the
//! origin with the plane waves of each constant side, and lifted to two
//! components. In the sharp limit the lifted jump approaches
//! `(V0/2mc^2)[-1, 1] psi(0)` and its projection by `tau3 + i tau2`
//! vanishes; the same holds for the derivatives.

use serde::Serialize;

use super::{solve_smooth_mode, Resolution};
use crate::error::{Error, Result};
use crate::modes::{dispersion, fv_components, MatrixSet, Theory, Vec2};
use crate::potential::RegularizedPotential;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpRecord {
    pub epsilon: f64,
    pub delta: f64,
    pub value_jump: [C64; 2],
    pub derivative_jump: [C64; 2],
    pub projected_value_jump: [C64; 2],
    pub projected_derivative_jump: [C64; 2],
    pub expected_value_jump: [C64; 2],
    pub expected_derivative_jump: [C64; 2],
    /// Lifted difference of the raw samples at +delta and -delta.
    pub raw_value_jump: [C64; 2],
    /// |projected| / |jump|, zero when the jump vanishes.
    pub value_ratio: f64,
    pub derivative_ratio: f64,
    /// Second over first component of the value jump; -1 in the limit.
    pub component_ratio: C64,
    pub value_deviation: f64,
    pub derivative_deviation: f64,
}

fn arr(v: Vec2) -> [C64; 2] {
    [v[0], v[1]]
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Continue `(u, u')` sampled at `x` to the origin with wavenumber `k`.
fn continue_to_origin(u: C64, du: C64, x: f64, k: C64) -> (C64, C64) {
    if k.norm() == 0.0 {
        return (u - du * x, du);
    }
    let i = C64::new(0.0, 1.0);
    let a = 0.5 * (u + du / (i * k)) * (-i * k * x).exp();
    let b = 0.5 * (u - du / (i * k)) * (i * k * x).exp();
    (a + b, i * k * (a - b))
}

pub fn appendix_b_jump_diagnostics(
    energy: f64,
    reg: &RegularizedPotential,
    delta: f64,
    half_length: f64,
    resolution: Resolution,
) -> Result<JumpRecord> {
    let eps = reg.epsilon();
    if !(delta > 3.0 * eps) {
        return Err(Error::ProbeInsideSmoothing {
            delta,
            epsilon: eps,
        });
    }
    let params = *reg.params();
    let mode = solve_smooth_mode(Theory::KleinGordon, energy, reg, half_length, resolution)?;
    let outside = || Error::InvalidDomain(format!("probe offset {delta} outside the domain"));
    let left = mode.state_at(-delta).ok_or_else(outside)?;
    let right = mode.state_at(delta).ok_or_else(outside)?;

    let rest = params.rest_energy();
    let v0 = params.v0();
    let k = dispersion(Theory::KleinGordon, energy, 0.0, &params).value;
    let q = dispersion(Theory::KleinGordon, energy, v0, &params).value;
    let (ul, dul) = continue_to_origin(left[0], left[1], -delta, k);
    let (ur, dur) = continue_to_origin(right[0], right[1], delta, q);

    let lift_l = |z: C64| fv_components(z, energy, rest);
    let lift_r = |z: C64| fv_components(z, energy - v0, rest);
    let j_value = lift_r(ur) - lift_l(ul);
    let j_deriv = lift_r(dur) - lift_l(dul);
    let raw = fv_components(right[0], energy - reg.eval(delta), rest)
        - fv_components(left[0], energy - reg.eval(-delta), rest);

    let p = MatrixSet::standard().fv_projector();
    let pv = p * j_value;
    let pd = p * j_deriv;
    let s = v0 / (2.0 * rest);
    let shape = |z: C64| Vec2::new(-s * z, s * z);
    let expected_value = shape(0.5 * (ul + ur));
    let expected_deriv = shape(0.5 * (dul + dur));

    Ok(JumpRecord {
        epsilon: eps,
        delta,
        value_jump: arr(j_value),
        derivative_jump: arr(j_deriv),
        projected_value_jump: arr(pv),
        projected_derivative_jump: arr(pd),
        expected_value_jump: arr(expected_value),
        expected_derivative_jump: arr(expected_deriv),
        raw_value_jump: arr(raw),
        value_ratio: ratio(pv.norm(), j_value.norm()),
        derivative_ratio: ratio(pd.norm(), j_deriv.norm()),
        component_ratio: if j_value[0].norm() == 0.0 {
            C64::new(-1.0, 0.0)
        } else {
            j_value[1] / j_value[0]
        },
        value_deviation: ratio((j_value - expected_value).norm(), expected_value.norm()),
        derivative_deviation: ratio((j_deriv - expected_deriv).norm(), expected_deriv.norm()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use crate::potential::Shape;

    fn record(v0: f64, eps: f64, shape: Shape) -> JumpRecord {
        let reg = RegularizedPotential::new(PhysicalParams::natural(v0), eps, shape).unwrap();
        appendix_b_jump_diagnostics(2.0, &reg, 0.2, 20.0, Resolution::default()).unwrap()
    }

    #[test]
    fn projection_vanishes_in_the_limit() {
        for shape in [Shape::Logistic, Shape::ErrorFunction] {
            let a = record(0.5, 0.01, shape);
            let b = record(0.5, 0.005, shape);
            assert!(a.value_ratio <= 1e-2 && a.derivative_ratio <= 1e-2, "{shape}: {a:?}");
            assert!(b.value_ratio < a.value_ratio && b.derivative_ratio < a.derivative_ratio);
            assert!((a.component_ratio + 1.0).norm() < 1e-2);
        }
    }

    #[test]
    fn flat_potential_has_no_jumps() {
        let r = record(0.0, 0.01, Shape::Logistic);
        assert!(r.value_jump.iter().all(|z| z.norm() < 1e-12));
        assert!(r.derivative_jump.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn probe_must_clear_smoothing() {
        let reg = RegularizedPotential::new(PhysicalParams::natural(0.5), 0.1, Shape::Logistic).unwrap();
        let err = appendix_b_jump_diagnostics(2.0, &reg, 0.3, 20.0, Resolution::default());
        assert!(matches!(err, Err(Error::ProbeInsideSmoothing { .. })));
    }
}
