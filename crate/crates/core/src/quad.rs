//! Composite Gauss-Legendre quadrature.

use crate::C64;

const NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Five-point rule on `[a, b]`.
pub fn gauss5<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    NODES
        .iter()
        .zip(WEIGHTS.iter())
        .map(|(&n, &w)| w * f(mid + half * n))
        .sum::<f64>()
        * half
}

/// Five-point rule for a complex integrand.
pub fn gauss5_complex<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> C64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    NODES
        .iter()
        .zip(WEIGHTS.iter())
        .map(|(&n, &w)| f(mid + half * n) * w)
        .sum::<C64>()
        * half
}

/// Five-point rule on `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            gauss5(&mut f, lo, lo + h)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_nine() {
        let v = gauss5(|x| x.powi(9) + 3.0 * x.powi(8), -1.0, 2.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 + (2f64.powi(9) + 1.0) / 3.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn gaussian_integral() {
        let v = gauss_legendre(|x| (-x * x).exp(), -10.0, 10.0, 200);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
