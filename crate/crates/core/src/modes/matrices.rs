use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::C64;

pub type Mat2 = Matrix2<C64>;

const ALGEBRA_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli-type tau matrices of the Feshbach-Villars form and a Dirac pair
/// (alpha, beta).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    pub tau1: Mat2,
    pub tau2: Mat2,
    pub tau3: Mat2,
    pub alpha: Mat2,
    pub beta: Mat2,
}

impl MatrixSet {
    /// tau matrices plus the default Dirac representation
    /// alpha = [[0,1],[1,0]], beta = [[1,0],[0,-1]].
    pub fn standard() -> Self {
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let tau1 = Mat2::new(zero, one, one, zero);
        let tau2 = Mat2::new(zero, c(0.0, -1.0), c(0.0, 1.0), zero);
        let tau3 = Mat2::new(one, zero, zero, -one);
        Self {
            tau1,
            tau2,
            tau3,
            alpha: tau1,
            beta: tau3,
        }
    }

    /// Standard tau matrices with a caller-supplied Dirac pair.
    pub fn with_dirac(alpha: Mat2, beta: Mat2) -> Result<Self> {
        let set = Self {
            alpha,
            beta,
            ..Self::standard()
        };
        set.validate()?;
        Ok(set)
    }

    /// Dirac pair conjugated by a unitary: alpha -> U alpha U^dagger.
    pub fn conjugated(&self, u: &Mat2) -> Result<Self> {
        let unitarity = (u * u.adjoint() - Mat2::identity()).map(|z| z.norm()).max();
        if unitarity > ALGEBRA_TOL {
            return Err(Error::InvalidMatrixSet(format!(
                "conjugating matrix is not unitary (defect {unitarity:.2e})"
            )));
        }
        Self::with_dirac(u * self.alpha * u.adjoint(), u * self.beta * u.adjoint())
    }

    /// alpha^2 = beta^2 = 1, alpha beta + beta alpha = 0, both Hermitian.
    pub fn validate(&self) -> Result<()> {
        let id = Mat2::identity();
        let checks = [
            ("alpha^2 = 1", (self.alpha * self.alpha - id).map(|z| z.norm()).max()),
            ("beta^2 = 1", (self.beta * self.beta - id).map(|z| z.norm()).max()),
            (
                "alpha beta + beta alpha = 0",
                (self.alpha * self.beta + self.beta * self.alpha).map(|z| z.norm()).max(),
            ),
            ("alpha Hermitian", (self.alpha - self.alpha.adjoint()).map(|z| z.norm()).max()),
            ("beta Hermitian", (self.beta - self.beta.adjoint()).map(|z| z.norm()).max()),
        ];
        for (name, defect) in checks {
            if !(defect <= ALGEBRA_TOL) {
                return Err(Error::InvalidMatrixSet(format!(
                    "{name} violated (defect {defect:.2e})"
                )));
            }
        }
        Ok(())
    }

    /// tau3 + i tau2 = [[1, 1], [-1, -1]].
    pub fn fv_projector(&self) -> Mat2 {
        self.tau3 + self.tau2 * c(0.0, 1.0)
    }
}

impl Default for MatrixSet {
    fn default() -> Self {
        Self::standard()
    }
}
