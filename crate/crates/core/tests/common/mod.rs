#![allow(dead_code)]

use proptest::prelude::*;
use stepforce_core::Theory;

/// Admissible (E, V0) pairs kept 0.05 away from every threshold.
pub fn admissible(theory: Theory) -> BoxedStrategy<(f64, f64)> {
    match theory {
        Theory::Schrodinger => (0.1f64..5.0, -3.0f64..6.0)
            .prop_filter("threshold", |(e, v)| (e - v).abs() > 0.05)
            .boxed(),
        _ => (1.05f64..5.0, -3.0f64..9.0)
            .prop_filter("threshold", |(e, v)| ((e - v).abs() - 1.0).abs() > 0.05)
            .boxed(),
    }
}

/// Pairs in the evanescent window.
pub fn evanescent(theory: Theory) -> BoxedStrategy<(f64, f64)> {
    match theory {
        Theory::Schrodinger => (0.1f64..5.0, 0.05f64..5.0)
            .prop_map(|(e, gap)| (e, e + gap))
            .boxed(),
        _ => (1.05f64..5.0, -0.95f64..0.95)
            .prop_map(|(e, w)| (e, e - w))
            .boxed(),
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
