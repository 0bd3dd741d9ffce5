use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants and the step height.
///
/// Every dimensional quantity in the crate derives from these four numbers.
/// The rest energy is always computed, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct PhysicalParams {
    hbar: f64,
    mass: f64,
    c: f64,
    v0: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRepr {
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default = "one")]
    c: f64,
    v0: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<ParamsRepr> for PhysicalParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        Self::new(r.hbar, r.mass, r.c, r.v0)
    }
}

impl From<PhysicalParams> for ParamsRepr {
    fn from(p: PhysicalParams) -> Self {
        Self {
            hbar: p.hbar,
            mass: p.mass,
            c: p.c,
            v0: p.v0,
        }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, mass: f64, c: f64, v0: f64) -> Result<Self> {
        for (name, value) in [("hbar", hbar), ("mass", mass), ("c", c)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !v0.is_finite() {
            return Err(Error::InvalidParams(format!("v0 must be finite, got {v0}")));
        }
        Ok(Self { hbar, mass, c, v0 })
    }

    /// Natural units: hbar = m = c = 1.
    pub fn natural(v0: f64) -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            c: 1.0,
            v0,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// m c^2
    pub fn rest_energy(&self) -> f64 {
        self.mass * self.c * self.c
    }

    /// hbar^2 / 2m, the kinetic prefactor.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    pub fn is_natural(&self) -> bool {
        self.hbar == 1.0 && self.mass == 1.0 && self.c == 1.0
    }

    pub fn with_v0(self, v0: f64) -> Self {
        Self { v0, ..self }
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self::new(self.hbar, self.mass, c, self.v0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_constants() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 0.5).is_err());
        assert!(PhysicalParams::new(1.0, -1.0, 1.0, 0.5).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, f64::INFINITY, 0.5).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, -3.0).is_ok());
    }

    #[test]
    fn deserialization_validates() {
        let p: PhysicalParams = serde_json::from_str(r#"{"v0": 0.25}"#).unwrap();
        assert_eq!(p, PhysicalParams::natural(0.25));
        assert!(serde_json::from_str::<PhysicalParams>(r#"{"v0": 0.5, "mass": -1}"#).is_err());
        assert!(serde_json::from_str::<PhysicalParams>(r#"{"v0": 0.5, "spin": 1}"#).is_err());
        let back: PhysicalParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rest_energy_is_derived() {
        let p = PhysicalParams::new(1.0, 2.0, 3.0, 0.0).unwrap();
        assert_eq!(p.rest_energy(), 18.0);
        let p = p.with_c(10.0).unwrap();
        assert_eq!(p.rest_energy(), 200.0);
        assert!(PhysicalParams::natural(0.5).is_natural());
    }
}
