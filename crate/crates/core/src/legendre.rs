//! The Cramér rate function `I(u) = sup_θ (θu - K(θ))` via Legendre duality.
//!
//! `I` is never tabulated. Every evaluation solves `K'(θ) = u` for the dual
//! `θ` and then uses `I(u) = θu - K(θ)`, `I'(u) = θ`, `I''(u) = 1/K''(θ)`.

use crate::distributions::{EdgeWeightDistribution, THETA_GUARD};
use crate::error::{Error, Result};

/// Target accuracy of `|K'(θ) - u|` for a solved dual pair.
pub const DUAL_TOL: f64 = 1e-11;

const BOUNDARY_T: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
const BOUNDARY_CAUCHY: f64 = 1e-8;
const DIVERGENCE_CEILING: f64 = 1e6;

/// A matched `(u, θ)` with `K'(θ) = u` and `I'(u) = θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualPair {
    pub u: f64,
    pub theta: f64,
}

impl DualPair {
    /// Builds the pair from the dual side, `u = K'(θ)`.
    pub fn from_theta(dist: &EdgeWeightDistribution, theta: f64) -> Result<Self> {
        Ok(Self {
            u: dist.tilted_mean(theta)?,
            theta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Finite(f64),
    Infinite,
}

impl Endpoint {
    pub fn is_finite(&self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Endpoint::Finite(v) => Some(*v),
            Endpoint::Infinite => None,
        }
    }
}

/// Whether `I(0)` and `I(1)` are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryBehavior {
    pub at_zero: Endpoint,
    pub at_one: Endpoint,
}

fn check_open_unit(u: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} must lie in (0, 1)")));
    }
    Ok(())
}

/// Solves `K'(θ) = u` for the unique dual `θ`.
///
/// The bracket starts at [-1, 1] and doubles outward (K' is increasing), then
/// a safeguarded Newton iteration refines it.
pub fn dual_of(dist: &EdgeWeightDistribution, u: f64) -> Result<DualPair> {
    check_open_unit(u)?;
    let f = |t: f64| dist.tilted_mean(t).map(|m| m - u);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut flo = f(lo)?;
    let mut fhi = f(hi)?;
    while flo > 0.0 {
        if lo <= -THETA_GUARD {
            return Err(Error::BracketFailure { u, limit: THETA_GUARD });
        }
        hi = lo;
        fhi = flo;
        lo = (2.0 * lo).max(-THETA_GUARD);
        flo = f(lo)?;
    }
    while fhi < 0.0 {
        if hi >= THETA_GUARD {
            return Err(Error::BracketFailure { u, limit: THETA_GUARD });
        }
        lo = hi;
        flo = fhi;
        hi = (2.0 * hi).min(THETA_GUARD);
        fhi = f(hi)?;
    }
    // Newton on K'(θ) = u, falling back to bisection whenever the step
    // leaves the bracket
    let mut t = if flo == 0.0 {
        lo
    } else if fhi == 0.0 {
        hi
    } else {
        lo - flo * (hi - lo) / (fhi - flo)
    };
    for _ in 0..200 {
        if flo == 0.0 || fhi == 0.0 {
            break;
        }
        let d = dist.cumulant_derivatives(t)?;
        let ft = d.k1 - u;
        if ft == 0.0 {
            break;
        }
        if ft < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - ft / d.k2;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - t).abs() <= 2.0 * f64::EPSILON * (1.0 + t.abs()) || next <= lo || next >= hi;
        t = next;
        if done {
            break;
        }
    }
    Ok(DualPair { u, theta: t })
}

/// `I(u)` from an already solved dual `θ`: `θ K'(θ) - K(θ)`.
pub fn rate_at_theta(dist: &EdgeWeightDistribution, theta: f64) -> Result<f64> {
    let d = dist.cumulant_derivatives(theta)?;
    Ok(theta * d.k1 - d.k0)
}

/// The Cramér rate function `I(u)` for `u ∈ (0, 1)`.
pub fn rate(dist: &EdgeWeightDistribution, u: f64) -> Result<f64> {
    let pair = dual_of(dist, u)?;
    Ok(pair.theta * u - dist.cumulant(pair.theta)?)
}

/// `(I'(u), I''(u))`.
pub fn rate_derivatives(dist: &EdgeWeightDistribution, u: f64) -> Result<(f64, f64)> {
    let pair = dual_of(dist, u)?;
    let k2 = dist.cumulant_derivatives(pair.theta)?.k2;
    Ok((pair.theta, 1.0 / k2))
}

/// Classifies `I(0)` and `I(1)` by evaluating `θu - K(θ)` at `θ = ∓T` for
/// `T ∈ {10, 20, 40, 80, 160}`. A sequence whose last step moves by less than
/// 1e-8 is finite; anything still moving, or beyond 1e6, is infinite.
pub fn boundary_behavior(dist: &EdgeWeightDistribution) -> BoundaryBehavior {
    let classify = |at_one: bool| {
        let vals: Vec<f64> = BOUNDARY_T
            .iter()
            .map(|&t| {
                let theta = if at_one { t } else { -t };
                let u = if at_one { 1.0 } else { 0.0 };
                theta * u - dist.cumulant(theta).expect("T within guard")
            })
            .collect();
        if vals.iter().any(|v| !v.is_finite() || *v > DIVERGENCE_CEILING) {
            return Endpoint::Infinite;
        }
        let n = vals.len();
        if (vals[n - 1] - vals[n - 2]).abs() < BOUNDARY_CAUCHY {
            Endpoint::Finite(vals[n - 1].max(0.0))
        } else {
            Endpoint::Infinite
        }
    };
    BoundaryBehavior {
        at_zero: classify(false),
        at_one: classify(true),
    }
}
