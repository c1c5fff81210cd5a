//! Float-vector l^p utilities: norms, the parallelogram law, and plane
//! rotations.
//!
//! This is the falsification harness for the claim that the derivation
//! machinery singles out p = 2: among the l^p norms only p = 2 satisfies the
//! parallelogram law (so only l² is an inner-product space), and only
//! Σ|c_k|² is invariant under rotations that preserve the l² norm.

use std::f64::consts::TAU;

/// Σ |x_k|^p.
pub fn lp_pow_sum(xs: &[f64], p: f64) -> f64 {
    xs.iter().map(|x| x.abs().powf(p)).sum()
}

/// (Σ |x_k|^p)^{1/p}.
pub fn lp_norm(xs: &[f64], p: f64) -> f64 {
    lp_pow_sum(xs, p).powf(1.0 / p)
}

/// Relative defect of ‖x+y‖² + ‖x−y‖² = 2‖x‖² + 2‖y‖² in the l^p norm.
/// Zero (up to rounding) exactly when p = 2.
pub fn parallelogram_defect(x: &[f64], y: &[f64], p: f64) -> f64 {
    assert_eq!(x.len(), y.len());
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let lhs = lp_norm(&sum, p).powi(2) + lp_norm(&diff, p).powi(2);
    let rhs = 2.0 * lp_norm(x, p).powi(2) + 2.0 * lp_norm(y, p).powi(2);
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / scale
}

/// Rotates coordinates (i, j) by `angle_turns` of a full turn, leaving the
/// other coordinates untouched. Preserves the l² norm for every angle.
pub fn rotate_plane(xs: &[f64], i: usize, j: usize, angle_turns: f64) -> Vec<f64> {
    assert!(i < xs.len() && j < xs.len() && i != j);
    let theta = TAU * angle_turns;
    let (s, c) = theta.sin_cos();
    let mut out = xs.to_vec();
    out[i] = c * xs[i] - s * xs[j];
    out[j] = s * xs[i] + c * xs[j];
    out
}
