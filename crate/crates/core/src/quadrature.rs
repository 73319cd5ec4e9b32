//! Gauss–Legendre rules and a graded composite rule on [0, 1].
//!
//! The composite rule splits [0, 1/2] and [1/2, 1] into geometrically
//! shrinking panels toward each endpoint, so integrands with algebraic
//! endpoint behaviour (Beta densities) and integrands sharply concentrated
//! at an endpoint (strongly tilted densities) both converge quickly.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Maximum number of geometric levels toward each endpoint.
pub const MAX_GRADED_LEVELS: usize = 48;

/// A node of the graded rule: position in (0, 1) plus its distances to the
/// two endpoints, kept separately so `1 - x` never loses digits near 1.
#[derive(Debug, Clone, Copy)]
pub struct GradedNode {
    pub x: f64,
    pub one_minus_x: f64,
    pub weight: f64,
}

/// Composite rule on [0, 1] with `per_panel` Gauss points in every panel.
///
/// Panels toward 0 are [2^-(k+2), 2^-(k+1)] for k = 0..levels, mirrored
/// toward 1. The width of the innermost slivers [0, 2^-(levels+1)] is
/// returned so callers can add an analytic endpoint correction.
pub fn graded_rule(per_panel: usize, levels: usize) -> (Vec<GradedNode>, f64) {
    let levels = levels.clamp(1, MAX_GRADED_LEVELS);
    let (gx, gw) = gauss_legendre(per_panel);
    let mut out = Vec::with_capacity(2 * levels * per_panel);
    for k in 0..levels {
        let hi = 0.5f64.powi(k as i32 + 1);
        let lo = hi * 0.5;
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&t, &w) in gx.iter().zip(&gw) {
            let d = mid + half * t;
            // near 0
            out.push(GradedNode {
                x: d,
                one_minus_x: 1.0 - d,
                weight: half * w,
            });
            // near 1
            out.push(GradedNode {
                x: 1.0 - d,
                one_minus_x: d,
                weight: half * w,
            });
        }
    }
    let sliver = 0.5f64.powi(levels as i32 + 1);
    (out, sliver)
}
