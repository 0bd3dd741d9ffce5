use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let spec = Self {
            x_min,
            x_max,
            n_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                self.n_points
            )));
        }
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidGrid(format!(
                "need x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let h = self.spacing();
        let last = self.n_points - 1;
        Ok((0..self.n_points)
            .map(|i| {
                if i == last {
                    self.x_max
                } else {
                    self.x_min + i as f64 * h
                }
            })
            .collect())
    }
}
