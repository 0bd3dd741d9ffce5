//! Richardson extrapolation of a sequence of smoothing widths to zero.

use serde::Serialize;

use crate::error::{Error, Result};

const MIN_ORDER: f64 = 0.5;
const MAX_ORDER: f64 = 3.0;

/// Values computed at strictly decreasing smoothing widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSeries {
    epsilons: Vec<f64>,
    values: Vec<f64>,
}

impl ConvergenceSeries {
    pub fn new(epsilons: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if epsilons.len() != values.len() {
            return Err(Error::InvalidDomain(format!(
                "{} widths but {} values",
                epsilons.len(),
                values.len()
            )));
        }
        if epsilons.len() < 3 {
            return Err(Error::InvalidDomain(format!(
                "need at least 3 widths, got {}",
                epsilons.len()
            )));
        }
        if epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0))
            || epsilons.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidDomain(format!(
                "widths must be positive and strictly decreasing: {epsilons:?}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain(format!("non-finite value in {values:?}")));
        }
        Ok(Self { epsilons, values })
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// Fitted power of epsilon; infinite when the series is constant.
    pub order: f64,
    /// Size of the last Richardson correction.
    pub error_estimate: f64,
}

/// Fit `v = A + B eps^p` to the three finest points and return `A` and `p`.
///
/// Every successive difference must share one sign.
pub fn extrapolate(series: &ConvergenceSeries) -> Result<Extrapolation> {
    let (eps, v) = (&series.epsilons, &series.values);
    let n = v.len();
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if diffs.iter().all(|d| d.abs() <= 1e-14 * scale) {
        return Ok(Extrapolation {
            limit: v[n - 1],
            order: f64::INFINITY,
            error_estimate: 0.0,
        });
    }
    let positive = diffs[0] > 0.0;
    if diffs.iter().any(|d| (*d > 0.0) != positive || *d == 0.0) {
        return Err(Error::NoConvergence(format!(
            "differences are not monotone: {diffs:?}"
        )));
    }

    let (ea, eb, ec) = (eps[n - 3], eps[n - 2], eps[n - 1]);
    let target = diffs[n - 3] / diffs[n - 2];
    let ratio = |p: f64| (ea.powf(p) - eb.powf(p)) / (eb.powf(p) - ec.powf(p));
    let (mut lo, mut hi) = (0.05f64, 12.0f64);
    if !(target > ratio(lo) && target < ratio(hi)) {
        return Err(Error::NoConvergence(format!(
            "difference ratio {target} admits no order in [{lo}, {hi}]; differences {diffs:?}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let order = 0.5 * (lo + hi);
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::NoConvergence(format!(
            "fitted order {order} outside [{MIN_ORDER}, {MAX_ORDER}]; differences {diffs:?}"
        )));
    }
    let b = diffs[n - 2] / (ec.powf(order) - eb.powf(order));
    let correction = b * ec.powf(order);
    Ok(Extrapolation {
        limit: v[n - 1] - correction,
        order,
        error_estimate: correction.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> ConvergenceSeries {
        let eps = vec![0.2, 0.1, 0.05, 0.025, 0.0125];
        let v = eps.iter().map(|&e| f(e)).collect();
        ConvergenceSeries::new(eps, v).unwrap()
    }

    #[test]
    fn linear_series() {
        let x = extrapolate(&series(|e| 3.0 + 2.0 * e)).unwrap();
        assert!((x.limit - 3.0).abs() < 1e-12);
        assert!((x.order - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_series() {
        let x = extrapolate(&series(|e| -1.0 + 5.0 * e * e)).unwrap();
        assert!((x.limit + 1.0).abs() < 1e-12);
        assert!((x.order - 2.0).abs() < 1e-9);
        assert!(x.error_estimate > 0.0);
    }

    #[test]
    fn non_uniform_widths() {
        let eps = vec![0.3, 0.17, 0.05];
        let v = eps.iter().map(|e: &f64| 1.0 - 0.7 * e.powf(1.5)).collect();
        let x = extrapolate(&ConvergenceSeries::new(eps, v).unwrap()).unwrap();
        assert!((x.order - 1.5).abs() < 1e-9 && (x.limit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let x = extrapolate(&series(|_| 4.0)).unwrap();
        assert_eq!(x.limit, 4.0);
        assert!(x.order.is_infinite());
    }

    #[test]
    fn oscillating_series_fails() {
        let s = series(|e| (100.0 * e).sin());
        assert!(matches!(extrapolate(&s), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn order_out_of_range_fails() {
        assert!(extrapolate(&series(|e| e.powi(5))).is_err());
        assert!(extrapolate(&series(|e| e.powf(0.2))).is_err());
    }

    #[test]
    fn series_validation() {
        assert!(ConvergenceSeries::new(vec![0.1, 0.05], vec![1.0, 2.0]).is_err());
        assert!(ConvergenceSeries::new(vec![0.1, 0.2, 0.05], vec![1.0; 3]).is_err());
        assert!(ConvergenceSeries::new(vec![0.1, 0.05, 0.0], vec![1.0; 3]).is_err());
        assert!(ConvergenceSeries::new(vec![0.1, 0.05, 0.01], vec![1.0; 2]).is_err());
    }
}
