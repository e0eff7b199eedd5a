//! Small numeric helpers shared across the crate.

/// Deterministic pairwise (tree) summation.
///
/// All quadrature reductions go through this so that results do not depend
/// on evaluation order or parallel scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Trapezoid weights on `n + 1` equispaced nodes covering `[0, 1]`,
/// including the step factor (weights sum to 1).
pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let h = 1.0 / n as f64;
    let mut w = vec![h; n + 1];
    w[0] = 0.5 * h;
    w[n] = 0.5 * h;
    w
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}
