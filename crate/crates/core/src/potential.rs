//! The sharp step and its smoothed family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;

/// Side of the interface at x = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// phi(x) = V0 Theta(x). The value at exactly x = 0 is never defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPotential {
    params: PhysicalParams,
}

impl StepPotential {
    pub fn new(params: PhysicalParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::UndefinedAtOrigin);
        }
        Ok(if x > 0.0 { self.params.v0() } else { 0.0 })
    }

    /// phi(0-) or phi(0+).
    pub fn one_sided(&self, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Right => self.params.v0(),
        }
    }
}

/// Profile of a smoothed step; epsilon is the width scale of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// V0 / (1 + exp(-x/eps))
    Logistic,
    /// V0 (1 + erf(x/eps)) / 2
    ErrorFunction,
    /// Linear from 0 at -eps to V0 at +eps.
    LinearRamp,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::Logistic, Shape::ErrorFunction, Shape::LinearRamp];

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Logistic => "logistic",
            Shape::ErrorFunction => "error-function",
            Shape::LinearRamp => "linear-ramp",
        }
    }

    /// Half-width, in units of epsilon, beyond which the profile equals its
    /// asymptote to double precision.
    pub fn support(&self) -> f64 {
        match self {
            Shape::Logistic => 45.0,
            Shape::ErrorFunction => 7.0,
            Shape::LinearRamp => 1.0,
        }
    }

    fn fraction(&self, u: f64) -> f64 {
        match self {
            Shape::Logistic => {
                if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                }
            }
            Shape::ErrorFunction => 0.5 * (1.0 + libm::erf(u)),
            Shape::LinearRamp => (0.5 * (1.0 + u)).clamp(0.0, 1.0),
        }
    }

    fn fraction_derivative(&self, u: f64) -> f64 {
        match self {
            Shape::Logistic => {
                let e = (-u.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Shape::ErrorFunction => (-u * u).exp() / std::f64::consts::PI.sqrt(),
            Shape::LinearRamp => {
                let a = u.abs();
                if a < 1.0 {
                    0.5
                } else if a == 1.0 {
                    0.25
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "logistic" => Ok(Shape::Logistic),
            "error-function" | "erf" => Ok(Shape::ErrorFunction),
            "linear-ramp" | "ramp" => Ok(Shape::LinearRamp),
            other => Err(format!(
                "unknown shape '{other}' (expected logistic, error-function or linear-ramp)"
            )),
        }
    }
}

/// Smooth, midpoint-symmetric step of width `epsilon`.
///
/// `derivative / V0` is a regularized Dirac delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedPotential {
    params: PhysicalParams,
    epsilon: f64,
    shape: Shape,
}

impl RegularizedPotential {
    pub fn new(params: PhysicalParams, epsilon: f64, shape: Shape) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidWidth(epsilon));
        }
        Ok(Self {
            params,
            epsilon,
            shape,
        })
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn v0(&self) -> f64 {
        self.params.v0()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.params.v0() * self.shape.fraction(x / self.epsilon)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.params.v0() * self.shape.fraction_derivative(x / self.epsilon) / self.epsilon
    }

    /// Half-width outside of which the potential is constant to double precision.
    pub fn support_half_width(&self) -> f64 {
        self.shape.support() * self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre;

    fn reg(eps: f64, shape: Shape) -> RegularizedPotential {
        RegularizedPotential::new(PhysicalParams::natural(0.5), eps, shape).unwrap()
    }

    #[test]
    fn step_values() {
        let step = StepPotential::new(PhysicalParams::natural(0.5));
        assert_eq!(step.eval(1.0).unwrap(), 0.5);
        assert_eq!(step.eval(-1.0).unwrap(), 0.0);
        assert_eq!(step.eval(0.0), Err(Error::UndefinedAtOrigin));
        let flat = StepPotential::new(PhysicalParams::natural(0.0));
        for x in [-3.0, -1e-9, 1e-9, 7.0] {
            assert_eq!(flat.eval(x).unwrap(), 0.0);
        }
        assert_eq!(step.one_sided(Side::Right), 0.5);
        assert_eq!(step.one_sided(Side::Left), 0.0);
    }

    #[test]
    fn width_must_be_positive() {
        let p = PhysicalParams::natural(0.5);
        assert_eq!(
            RegularizedPotential::new(p, 0.0, Shape::Logistic),
            Err(Error::InvalidWidth(0.0))
        );
        assert!(RegularizedPotential::new(p, -0.1, Shape::LinearRamp).is_err());
        assert!(RegularizedPotential::new(p, f64::NAN, Shape::ErrorFunction).is_err());
    }

    #[test]
    fn midpoint_value() {
        for shape in Shape::ALL {
            assert_eq!(reg(0.1, shape).eval(0.0), 0.25);
        }
    }

    #[test]
    fn logistic_tail_at_ten_widths() {
        // 1 - 1/(1 + e^-10) = e^-10/(1 + e^-10)
        let r = reg(0.01, Shape::Logistic);
        let gap = 0.5 - r.eval(0.1);
        let closed = 0.5 * (-10.0f64).exp() / (1.0 + (-10.0f64).exp());
        assert!((gap - closed).abs() < 1e-15);
        assert!(gap < 1e-4 * 0.5);
    }

    #[test]
    fn ramp_derivative_integrates_to_v0() {
        let r = reg(0.2, Shape::LinearRamp);
        let total = gauss_legendre(|x| r.derivative(x), -0.2, 0.2, 16);
        assert!((total - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivatives_are_normalized() {
        for shape in Shape::ALL {
            for eps in [0.2, 0.05, 0.0125, 1e-3] {
                let r = reg(eps, shape);
                let panels = if shape == Shape::LinearRamp { 100 } else { 2000 };
                let total = gauss_legendre(|x| r.derivative(x), -50.0 * eps, 50.0 * eps, panels);
                assert!(
                    ((total - 0.5) / 0.5).abs() < 1e-8,
                    "{shape} eps={eps}: {total}"
                );
            }
        }
    }

    #[test]
    fn monotone_and_nonnegative() {
        for shape in Shape::ALL {
            let r = reg(0.1, shape);
            let mut last = r.eval(-2.0);
            for i in -200..=200 {
                let x = i as f64 * 0.01;
                let v = r.eval(x);
                assert!(v >= last);
                assert!(r.derivative(x) >= 0.0);
                last = v;
            }
            assert!(r.eval(-100.0).abs() < 1e-15);
            assert!((r.eval(100.0) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn pointwise_convergence_is_monotone() {
        let step = StepPotential::new(PhysicalParams::natural(0.5));
        for shape in Shape::ALL {
            let mut previous = f64::INFINITY;
            let mut eps = 0.4;
            for _ in 0..6 {
                let r = reg(eps, shape);
                let gap = [-1.0, -0.5, 0.5, 1.0]
                    .iter()
                    .map(|&x| (r.eval(x) - step.eval(x).unwrap()).abs())
                    .fold(0.0, f64::max);
                assert!(gap <= previous, "{shape}: {gap} > {previous}");
                previous = gap;
                eps *= 0.5;
            }
        }
    }

    #[test]
    fn shape_names_round_trip() {
        for shape in Shape::ALL {
            assert_eq!(shape.name().parse::<Shape>().unwrap(), shape);
        }
        assert!("gaussian".parse::<Shape>().is_err());
    }
}
