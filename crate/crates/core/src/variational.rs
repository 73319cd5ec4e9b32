//! Free-energy maximization, the critical point and the transition curve.
//!
//! The limiting free energy is `ψ∞ = sup_u L(u)` with
//! `L(u) = β1 u + β2 u^p - I(u)/2`. All searches run in the dual coordinate
//! `θ` (with `u = K'(θ)`), where the stationarity condition
//! `g(θ) = β1 + p β2 K'(θ)^{p-1} - θ/2 = 0` is smooth and globally bracketed:
//! `g(-∞) = +∞`, `g(+∞) = -∞`, and `g'(θ) = (β2 n(θ) - 1)/2` with
//! `n(θ) = 2p(p-1) K''(θ) K'(θ)^{p-2}`.

use rayon::prelude::*;

use crate::distributions::{EdgeWeightDistribution, THETA_GUARD};
use crate::error::{Error, Result};
use crate::legendre::{dual_of, DualPair};
use crate::roots::brent;

/// Score difference below which two local maxima are declared tied.
pub const TIE_TOL: f64 = 1e-10;
/// Transition points closer than this to the critical `β1` are refused.
pub const CRITICAL_MARGIN: f64 = 1e-6;
/// Intervals in the sign-change scan of `g`.
pub const SCAN_GRID: usize = 10_000;
/// θ-range and grid used to certify the single zero of `K'''K' + (p-2)K''²`.
pub const ASSUMPTION_RANGE: (f64, f64) = (-50.0, 50.0);
pub const ASSUMPTION_GRID: usize = 10_000;

const STATIONARITY_TOL: f64 = 1e-9;
const DUAL_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta1: f64,
    pub beta2: f64,
    /// Number of edges of the second subgraph.
    pub p: u32,
}

impl ModelParams {
    pub fn new(beta1: f64, beta2: f64, p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::Domain(format!("p = {p}, need at least 2 edges")));
        }
        if !beta1.is_finite() || !beta2.is_finite() {
            return Err(Error::Domain(format!("non-finite parameters ({beta1}, {beta2})")));
        }
        Ok(Self { beta1, beta2, p })
    }
}

/// A stationary point of `L` together with its score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximizer {
    pub pair: DualPair,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerSet {
    /// One global maximizer, or two on the transition curve, ordered by `u`.
    pub points: Vec<Maximizer>,
    pub psi: f64,
    pub on_transition: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub beta1_c: f64,
    pub beta2_c: f64,
    pub u0: f64,
    pub theta0: f64,
}

/// The two branches of the V-shaped two-maximizer region at a fixed `β1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VBounds {
    /// `m(a(β1))`: above it only the high maximizer survives.
    pub upper: f64,
    /// `m(b(β1))`: below it only the low maximizer survives.
    pub lower: f64,
    pub a: DualPair,
    pub b: DualPair,
}

/// A point `(β1, r(β1))` on the first-order transition curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPoint {
    pub beta1: f64,
    pub beta2: f64,
    /// `r(β1) + β1`, resolved to relative precision even when it is far
    /// below the spacing of floating-point numbers near `β2`.
    pub offset: f64,
    pub bounds: VBounds,
    pub low: DualPair,
    pub high: DualPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSample {
    pub beta1: f64,
    pub beta2: f64,
    pub upper: f64,
    pub lower: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    /// Ordered by increasing `β1`; the last sample is the critical point.
    pub samples: Vec<PhaseSample>,
    pub critical: CriticalPoint,
}

fn powi(x: f64, p: u32) -> f64 {
    x.powi(p as i32)
}

/// `L` evaluated at the dual coordinate `θ`.
pub fn score_at_theta(dist: &EdgeWeightDistribution, params: &ModelParams, theta: f64) -> Result<(DualPair, f64)> {
    let (k0, u) = dist.cumulant_and_mean(theta)?;
    let rate = theta * u - k0;
    let l = params.beta1 * u + params.beta2 * powi(u, params.p) - 0.5 * rate;
    Ok((DualPair { u, theta }, l))
}

/// `L(u; β1, β2) = β1 u + β2 u^p - I(u)/2`.
pub fn score(dist: &EdgeWeightDistribution, params: &ModelParams, u: f64) -> Result<f64> {
    let pair = dual_of(dist, u)?;
    let k0 = dist.cumulant(pair.theta)?;
    let rate = pair.theta * u - k0;
    Ok(params.beta1 * u + params.beta2 * powi(u, params.p) - 0.5 * rate)
}

/// `g(θ) = β1 + p β2 K'(θ)^{p-1} - θ/2`; equals `L'(u)` at `u = K'(θ)`.
pub fn stationarity(dist: &EdgeWeightDistribution, params: &ModelParams, theta: f64) -> Result<f64> {
    let u = dist.tilted_mean(theta)?;
    Ok(params.beta1 + params.p as f64 * params.beta2 * powi(u, params.p - 1) - 0.5 * theta)
}

fn scan_half_width(params: &ModelParams) -> Result<f64> {
    let reach = 2.0 * params.beta1.abs() + 2.0 * params.p as f64 * params.beta2.abs();
    if reach + 1.0 > THETA_GUARD {
        return Err(Error::OverflowGuard {
            theta: reach,
            guard: THETA_GUARD,
        });
    }
    Ok((reach + 50.0).min(THETA_GUARD))
}

/// Roots of `g` with a flag telling whether each is a local maximum of `L`
/// (`g` crossing from + to -).
fn stationary_roots(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<Vec<(DualPair, bool)>> {
    let w = scan_half_width(params)?;
    let g = |t: f64| stationarity(dist, params, t);
    let step = 2.0 * w / SCAN_GRID as f64;
    let mut roots = Vec::new();
    let mut prev_t = -w;
    let mut prev_g = g(prev_t)?;
    for i in 1..=SCAN_GRID {
        let t = if i == SCAN_GRID { w } else { -w + step * i as f64 };
        let gt = g(t)?;
        if gt == 0.0 {
            // direction decided by the neighbours
            let next = g((t + step).min(w))?;
            roots.push((t, prev_g > 0.0 && next <= 0.0));
        } else if prev_g != 0.0 && gt.signum() != prev_g.signum() {
            let r = brent(|x| g(x).unwrap_or(f64::NAN), prev_t, t, prev_g, gt, 1e-16, 0.0);
            roots.push((r, prev_g > 0.0));
        }
        prev_t = t;
        prev_g = gt;
    }
    if roots.is_empty() {
        return Err(Error::RangeExhausted { lo: -w, hi: w });
    }
    roots
        .into_iter()
        .map(|(t, is_max)| Ok((DualPair::from_theta(dist, t)?, is_max)))
        .collect()
}

/// All roots of the stationarity condition, ordered by `θ`.
pub fn stationary_points(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<Vec<DualPair>> {
    Ok(stationary_roots(dist, params)?.into_iter().map(|(p, _)| p).collect())
}

/// Global maximizer(s) of `L`. Two local maxima whose scores differ by less
/// than `tie_tol` are both reported and flag the transition curve.
pub fn maximizers(dist: &EdgeWeightDistribution, params: &ModelParams, tie_tol: f64) -> Result<MaximizerSet> {
    let mut local = Vec::new();
    for (pair, is_max) in stationary_roots(dist, params)? {
        if !is_max {
            continue;
        }
        let (_, s) = score_at_theta(dist, params, pair.theta)?;
        local.push(Maximizer { pair, score: s });
    }
    let best = local
        .iter()
        .map(|m| m.score)
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::InternalInconsistency("no local maximum of L found".into()));
    }
    let points: Vec<Maximizer> = local.into_iter().filter(|m| best - m.score <= tie_tol).collect();
    for m in &points {
        let residual = stationarity(dist, params, m.pair.theta)?;
        if residual.abs() > STATIONARITY_TOL * (1.0 + m.pair.theta.abs()) {
            return Err(Error::InternalInconsistency(format!(
                "stationarity residual {residual:e} at θ = {}",
                m.pair.theta
            )));
        }
        let dual = dual_form(dist, params, m.pair.theta)?;
        if (dual - m.score).abs() > DUAL_FORM_TOL * best.abs().max(1.0) {
            return Err(Error::InternalInconsistency(format!(
                "primal {} and dual {dual} free energies disagree",
                m.score
            )));
        }
    }
    Ok(MaximizerSet {
        on_transition: points.len() >= 2,
        points,
        psi: best,
    })
}

/// `(1 - p) β2 K'(θ)^p + K(θ)/2`, the free energy at a stationary `θ`.
pub fn dual_form(dist: &EdgeWeightDistribution, params: &ModelParams, theta: f64) -> Result<f64> {
    let (k0, u) = dist.cumulant_and_mean(theta)?;
    Ok((1.0 - params.p as f64) * params.beta2 * powi(u, params.p) + 0.5 * k0)
}

/// The limiting free energy `ψ∞ = sup_u L(u)`.
pub fn psi_infinity(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<f64> {
    Ok(maximizers(dist, params, TIE_TOL)?.psi)
}

fn check_p(p: u32) -> Result<()> {
    if p < 2 {
        return Err(Error::Domain(format!("p = {p}, need at least 2 edges")));
    }
    Ok(())
}

/// `n(θ) = 2p(p-1) K''(θ) K'(θ)^{p-2}`.
pub fn n_of(dist: &EdgeWeightDistribution, p: u32, theta: f64) -> Result<f64> {
    check_p(p)?;
    let d = dist.cumulant_derivatives(theta)?;
    let pf = p as f64;
    Ok(2.0 * pf * (pf - 1.0) * d.k2 * powi(d.k1, p - 2))
}

fn f_theta(dist: &EdgeWeightDistribution, p: u32, theta: f64) -> Result<f64> {
    let d = dist.cumulant_derivatives(theta)?;
    Ok(d.k1 / (2.0 * (p as f64 - 1.0) * d.k2) - 0.5 * theta)
}

/// `m(u) = I''(u) / (2p(p-1) u^{p-2})`.
pub fn m_of(dist: &EdgeWeightDistribution, p: u32, u: f64) -> Result<f64> {
    check_p(p)?;
    let pair = dual_of(dist, u)?;
    let k2 = dist.cumulant_derivatives(pair.theta)?.k2;
    let pf = p as f64;
    Ok(1.0 / (k2 * 2.0 * pf * (pf - 1.0) * powi(u, p - 2)))
}

/// `f(u) = u I''(u) / (2(p-1)) - I'(u)/2`.
pub fn f_of(dist: &EdgeWeightDistribution, p: u32, u: f64) -> Result<f64> {
    check_p(p)?;
    let pair = dual_of(dist, u)?;
    let k2 = dist.cumulant_derivatives(pair.theta)?.k2;
    Ok(u / (2.0 * (p as f64 - 1.0) * k2) - 0.5 * pair.theta)
}

/// The corner `(β1^c, β2^c) = (-f(u0), m(u0))` of the two-maximizer region,
/// where `θ0` is the unique zero of `K'''K' + (p-2)K''²`.
pub fn critical_point(dist: &EdgeWeightDistribution, p: u32) -> Result<CriticalPoint> {
    check_p(p)?;
    let zeros = dist.assumption_zeros(p, ASSUMPTION_RANGE.0, ASSUMPTION_RANGE.1, ASSUMPTION_GRID)?;
    if zeros.len() != 1 {
        return Err(Error::AssumptionViolated(zeros.len()));
    }
    let theta0 = zeros[0];
    let u0 = dist.tilted_mean(theta0)?;
    Ok(CriticalPoint {
        beta1_c: -f_theta(dist, p, theta0)?,
        beta2_c: 1.0 / n_of(dist, p, theta0)?,
        u0,
        theta0,
    })
}

/// Finds a root of `h` on one side of `start`, expanding the distance
/// geometrically until the sign differs from `h(start)`.
fn expand_and_solve<F: Fn(f64) -> Result<f64>>(h: F, start: f64, direction: f64) -> Result<Option<f64>> {
    let h0 = h(start)?;
    if h0 == 0.0 {
        return Ok(Some(start));
    }
    let mut near = start;
    let mut h_near = h0;
    let mut dist = 1.0;
    loop {
        let far = (start + direction * dist).clamp(-THETA_GUARD, THETA_GUARD);
        let h_far = h(far)?;
        if h_far == 0.0 {
            return Ok(Some(far));
        }
        if h_far.signum() != h0.signum() {
            let (a, b, fa, fb) = if far < near {
                (far, near, h_far, h_near)
            } else {
                (near, far, h_near, h_far)
            };
            return Ok(Some(brent(|x| h(x).unwrap_or(f64::NAN), a, b, fa, fb, 1e-16, 0.0)));
        }
        if far.abs() >= THETA_GUARD {
            return Ok(None);
        }
        near = far;
        h_near = h_far;
        dist *= 2.0;
    }
}

/// Bounding curves of the V-shaped region at `β1 < β1^c`.
pub fn bounding_curves(dist: &EdgeWeightDistribution, p: u32, beta1: f64) -> Result<VBounds> {
    let crit = critical_point(dist, p)?;
    bounding_curves_with(dist, p, &crit, beta1)
}

pub fn bounding_curves_with(dist: &EdgeWeightDistribution, p: u32, crit: &CriticalPoint, beta1: f64) -> Result<VBounds> {
    if !(beta1 < crit.beta1_c) {
        return Err(Error::Domain(format!(
            "β1 = {beta1} is not below the critical value {}",
            crit.beta1_c
        )));
    }
    // f is decreasing on (-∞, θ0) and increasing on (θ0, ∞); solve f = -β1
    let h = |t: f64| f_theta(dist, p, t).map(|f| f + beta1);
    let solve = |dir: f64| -> Result<f64> {
        expand_and_solve(h, crit.theta0, dir)?
            .ok_or_else(|| Error::Domain(format!("f(u) = {} not reached within the θ guard", -beta1)))
    };
    let ta = solve(-1.0)?;
    let tb = solve(1.0)?;
    let a = DualPair::from_theta(dist, ta)?;
    let b = DualPair::from_theta(dist, tb)?;
    Ok(VBounds {
        upper: 1.0 / n_of(dist, p, ta)?,
        lower: 1.0 / n_of(dist, p, tb)?,
        a,
        b,
    })
}

/// Local maxima of `L` on each side of the unstable middle root, located
/// through the spinodal points where `β2 n(θ) = 1`.
fn split_local_maxima(
    dist: &EdgeWeightDistribution,
    params: &ModelParams,
    theta0: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    let beta2 = params.beta2;
    let p = params.p;
    let spin = |t: f64| n_of(dist, p, t).map(|n| beta2 * n - 1.0);
    if spin(theta0)? <= 0.0 {
        return Err(Error::Domain(format!("β2 = {beta2} is not above the critical value")));
    }
    let left = expand_and_solve(spin, theta0, -1.0)?.ok_or_else(|| Error::Domain("left spinodal not found".into()))?;
    let right = expand_and_solve(spin, theta0, 1.0)?.ok_or_else(|| Error::Domain("right spinodal not found".into()))?;
    let g = |t: f64| stationarity(dist, params, t);
    let low = if g(left)? < 0.0 {
        expand_and_solve(g, left, -1.0)?
    } else {
        None
    };
    let high = if g(right)? > 0.0 {
        expand_and_solve(g, right, 1.0)?
    } else {
        None
    };
    Ok((low, high))
}

/// One side's contribution to `L(u) - L(endpoint)` at a local maximum, in the
/// parametrization `β2 = -β1 + δ`:
/// `β1 (u - u^p) + δ u^p - (I(u) - I_ref)/2`, where `I_ref` is `I` at the
/// nearby endpoint when that endpoint carries an atom and 0 otherwise.
/// Returns `(value, reference, magnitude)`.
fn side_score(dist: &EdgeWeightDistribution, p: u32, beta1: f64, delta: f64, theta: f64, high: bool) -> Result<(f64, f64, f64)> {
    let (u, c) = dist.tilted_mean_pair(theta)?;
    let pf = p as f64;
    // u - u^p and u^p, using the complement c = 1 - u on the high side
    let (u_minus_up, up) = if high {
        let lc = (-c).ln_1p();
        let one_minus = -((pf - 1.0) * lc).exp_m1();
        (u * one_minus, (pf * lc).exp())
    } else {
        (u - powi(u, p), powi(u, p))
    };
    let (excess, reference) = match dist.endpoint_log_excess(theta, high) {
        Some(r) => {
            let (atoms_ok, mass) = match dist.atoms() {
                Some(atoms) => {
                    let end = if high { 1.0 } else { 0.0 };
                    (true, atoms.iter().filter(|a| a.0 == end).map(|a| a.1).sum::<f64>())
                }
                None => (false, 1.0),
            };
            debug_assert!(atoms_ok);
            let j = if high { -theta * c - r } else { theta * u - r };
            (j, -mass.ln())
        }
        None => {
            let k0 = dist.cumulant(theta)?;
            (theta * u - k0, 0.0)
        }
    };
    let a = beta1 * u_minus_up;
    let b = delta * up;
    let e = -0.5 * excess;
    Ok((a + b + e, reference, a.abs() + b.abs() + e.abs()))
}

fn tie_function(
    dist: &EdgeWeightDistribution,
    p: u32,
    beta1: f64,
    delta: f64,
    theta0: f64,
) -> Result<(f64, f64, Option<f64>, Option<f64>)> {
    let params = ModelParams {
        beta1,
        beta2: -beta1 + delta,
        p,
    };
    let (low, high) = split_local_maxima(dist, &params, theta0)?;
    match (low, high) {
        (Some(tl), Some(th)) => {
            let (sl, rl, ml) = side_score(dist, p, beta1, delta, tl, false)?;
            let (sh, rh, mh) = side_score(dist, p, beta1, delta, th, true)?;
            let d = sh - sl - 0.5 * (rh - rl);
            Ok((d, ml + mh + 0.5 * (rh - rl).abs(), low, high))
        }
        // a missing local maximum leaves the other one as the unique winner
        (Some(_), None) => Ok((-1.0, 0.0, low, high)),
        (None, Some(_)) => Ok((1.0, 0.0, low, high)),
        (None, None) => Err(Error::InternalInconsistency("no local maximum inside the V region".into())),
    }
}

/// The transition curve `r(β1)`: the `β2` at which the two local maxima of
/// `L` have equal scores.
pub fn transition_beta2(dist: &EdgeWeightDistribution, p: u32, beta1: f64) -> Result<f64> {
    Ok(transition_point(dist, p, beta1)?.beta2)
}

pub fn transition_point(dist: &EdgeWeightDistribution, p: u32, beta1: f64) -> Result<TransitionPoint> {
    let crit = critical_point(dist, p)?;
    transition_point_with(dist, p, &crit, beta1)
}

/// Bisects the offset `δ = β2 + β1` between the bounding curves until the
/// tie function is at its floating-point noise floor.
pub fn transition_point_with(dist: &EdgeWeightDistribution, p: u32, crit: &CriticalPoint, beta1: f64) -> Result<TransitionPoint> {
    if !(beta1 < crit.beta1_c - CRITICAL_MARGIN) {
        return Err(Error::Domain(format!(
            "β1 = {beta1} is not below β1c - {CRITICAL_MARGIN} = {}",
            crit.beta1_c - CRITICAL_MARGIN
        )));
    }
    let bounds = bounding_curves_with(dist, p, crit, beta1)?;
    let mut lo = bounds.lower + beta1;
    // beyond this β2 the high maximizer θ ≈ 2(β1 + pβ2) leaves the guard
    let guard_b2 = (0.25 * THETA_GUARD - beta1) / p as f64;
    let mut hi = bounds.upper.min(guard_b2.max(bounds.lower)) + beta1;
    // the upper curve can lie far beyond the θ guard; pull it in until the
    // high maximizer is representable
    let mut d_hi = f64::NAN;
    for _ in 0..200 {
        d_hi = tie_function(dist, p, beta1, hi - 1e-9 * (hi - lo), crit.theta0)?.0;
        if d_hi > 0.0 {
            break;
        }
        hi = lo + 0.5 * (hi - lo);
    }
    let (d_lo, ..) = tie_function(dist, p, beta1, lo + 1e-9 * (hi - lo), crit.theta0)?;
    if !(d_lo < 0.0 && d_hi > 0.0) {
        return Err(Error::TieNotBracketed {
            lo: bounds.lower,
            hi: bounds.upper,
        });
    }
    // regula falsi (Illinois variant) once both ends carry genuine tie values,
    // bisection otherwise
    let mut f_lo: Option<f64> = None;
    let mut f_hi: Option<f64> = None;
    let mut side = 0i8;
    let mut best = None;
    for _ in 0..2000 {
        let mut mid = 0.5 * (lo + hi);
        if let (Some(a), Some(b)) = (f_lo, f_hi) {
            let x = lo - a * (hi - lo) / (b - a);
            if x > lo && x < hi {
                mid = x;
            }
        }
        let (d, scale, tl, th) = tie_function(dist, p, beta1, mid, crit.theta0)?;
        best = Some((mid, tl, th));
        if d == 0.0 || (scale > 0.0 && d.abs() <= 64.0 * f64::EPSILON * scale) {
            break;
        }
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * mid.abs() {
            break;
        }
        let value = (scale > 0.0).then_some(d);
        if d < 0.0 {
            lo = mid;
            f_lo = value;
            if side == -1 {
                f_hi = f_hi.map(|v| 0.5 * v);
            }
            side = -1;
        } else {
            hi = mid;
            f_hi = value;
            if side == 1 {
                f_lo = f_lo.map(|v| 0.5 * v);
            }
            side = 1;
        }
    }
    let (delta, tl, th) = best.expect("at least one bisection step");
    let (tl, th) = match (tl, th) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::TieNotBracketed {
                lo: bounds.lower,
                hi: bounds.upper,
            })
        }
    };
    Ok(TransitionPoint {
        beta1,
        beta2: -beta1 + delta,
        offset: delta,
        bounds,
        low: DualPair::from_theta(dist, tl)?,
        high: DualPair::from_theta(dist, th)?,
    })
}

/// Samples `r(β1)` on `[beta1_min, β1^c)` with the given step and appends the
/// critical point. Samples are computed in parallel.
pub fn phase_curve(dist: &EdgeWeightDistribution, p: u32, beta1_min: f64, step: f64) -> Result<PhaseCurve> {
    let crit = critical_point(dist, p)?;
    if !(beta1_min < crit.beta1_c) {
        return Err(Error::Domain(format!(
            "beta1_min = {beta1_min} is not below β1c = {}",
            crit.beta1_c
        )));
    }
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step = {step} must be positive")));
    }
    let limit = crit.beta1_c - CRITICAL_MARGIN;
    let xs: Vec<f64> = (0..)
        .map(|i| beta1_min + step * i as f64)
        .take_while(|&b| b < limit)
        .collect();
    let points: Vec<TransitionPoint> = xs
        .par_iter()
        .map(|&b| transition_point_with(dist, p, &crit, b))
        .collect::<Result<_>>()?;
    let mut samples: Vec<PhaseSample> = points
        .iter()
        .map(|t| PhaseSample {
            beta1: t.beta1,
            beta2: t.beta2,
            upper: t.bounds.upper,
            lower: t.bounds.lower,
            offset: t.offset,
        })
        .collect();
    samples.push(PhaseSample {
        beta1: crit.beta1_c,
        beta2: crit.beta2_c,
        upper: crit.beta2_c,
        lower: crit.beta2_c,
        offset: crit.beta1_c + crit.beta2_c,
    });
    for w in samples.windows(2) {
        if !(w[1].beta2 < w[0].beta2) {
            return Err(Error::InternalInconsistency(format!(
                "transition curve not decreasing between β1 = {} and {}",
                w[0].beta1, w[1].beta1
            )));
        }
    }
    Ok(PhaseCurve { samples, critical: crit })
}
