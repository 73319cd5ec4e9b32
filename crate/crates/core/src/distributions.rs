//! Edge-weight distributions on [0, 1] and their cumulant generating function.
//!
//! Every distribution exposes `K(θ) = log ∫ e^{θx} dμ(x)` and its first three
//! derivatives. Bernoulli and Uniform(0, 1) have closed forms; the other kinds
//! go through a generic route (an atom sum for discrete laws, a graded
//! Gauss–Legendre rule for densities). The generic route is also available
//! for the closed-form kinds so the two can be compared.
//!
//! All evaluations factor out `e^{θ x̂}` where `x̂` is the support endpoint
//! maximizing `θx`, so every exponential that is actually computed is ≤ 1.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::quadrature::graded_rule;
use crate::roots::bisect;

/// Largest |θ| accepted by the cumulant routines.
pub const THETA_GUARD: f64 = 1e4;

const PROB_SUM_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;
const QUADRATURE_TOL: f64 = 1e-12;
const QUADRATURE_PROBES: [f64; 13] = [
    -1e4, -700.0, -200.0, -40.0, -5.0, -0.5, 0.0, 0.5, 5.0, 40.0, 200.0, 700.0, 1e4,
];

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    Bernoulli { q: f64 },
    Uniform01,
    Beta { a: f64, b: f64 },
    /// Atoms `(x, p)` with `x ∈ [0, 1]`.
    Discrete(Vec<(f64, f64)>),
}

/// `K(θ)` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantDerivatives {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

#[derive(Debug, Clone)]
enum Backend {
    Atoms(Vec<(f64, f64)>),
    Density {
        /// (x, 1 - x, log of weight times normalized density)
        nodes: Vec<(f64, f64, f64)>,
        sliver: f64,
        a: f64,
        b: f64,
        log_norm: f64,
    },
}

#[derive(Debug, Clone)]
enum Sampler {
    Bernoulli(f64),
    Uniform,
    Beta(Beta<f64>),
    Atoms(Vec<f64>, WeightedIndex<f64>),
}

/// A non-degenerate probability measure on [0, 1].
#[derive(Debug, Clone)]
pub struct EdgeWeightDistribution {
    kind: DistributionKind,
    symmetric: bool,
    quadrature_nodes: usize,
    mean: f64,
    variance: f64,
    backend: Backend,
    sampler: Sampler,
}

impl PartialEq for EdgeWeightDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl EdgeWeightDistribution {
    pub fn bernoulli(q: f64) -> Result<Self> {
        Self::new(DistributionKind::Bernoulli { q })
    }

    pub fn uniform() -> Self {
        Self::new(DistributionKind::Uniform01).expect("uniform is valid")
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::new(DistributionKind::Beta { a, b })
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(DistributionKind::Discrete(atoms))
    }

    /// Builds a distribution, deriving the symmetry flag from its parameters
    /// and then verifying it numerically.
    pub fn new(kind: DistributionKind) -> Result<Self> {
        let (kind, declared) = validate(kind)?;
        Self::build(kind, declared)
    }

    /// Like [`new`](Self::new) but with an explicitly declared symmetry flag,
    /// rejected if it disagrees with the distribution.
    pub fn with_declared_symmetry(kind: DistributionKind, symmetric: bool) -> Result<Self> {
        let (kind, derived) = validate(kind)?;
        if derived != symmetric {
            return Err(Error::SymmetryMismatch(format!(
                "declared symmetric={symmetric}, parameters imply {derived}"
            )));
        }
        Self::build(kind, symmetric)
    }

    fn build(kind: DistributionKind, symmetric: bool) -> Result<Self> {
        let (mean, variance) = exact_moments(&kind);
        if !(variance > 0.0) {
            return Err(Error::DegenerateDistribution { variance });
        }
        let (backend, quadrature_nodes) = match &kind {
            DistributionKind::Bernoulli { q } => (Backend::Atoms(vec![(0.0, 1.0 - q), (1.0, *q)]), 0),
            DistributionKind::Discrete(atoms) => (Backend::Atoms(atoms.clone()), 0),
            DistributionKind::Uniform01 => build_density(1.0, 1.0),
            DistributionKind::Beta { a, b } => build_density(*a, *b),
        };
        let sampler = match &kind {
            DistributionKind::Bernoulli { q } => Sampler::Bernoulli(*q),
            DistributionKind::Uniform01 => Sampler::Uniform,
            DistributionKind::Beta { a, b } => {
                Sampler::Beta(Beta::new(*a, *b).map_err(|e| Error::InvalidDistribution(e.to_string()))?)
            }
            DistributionKind::Discrete(atoms) => {
                let xs = atoms.iter().map(|a| a.0).collect();
                let w = WeightedIndex::new(atoms.iter().map(|a| a.1))
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
                Sampler::Atoms(xs, w)
            }
        };
        let dist = Self {
            kind,
            symmetric,
            quadrature_nodes,
            mean,
            variance,
            backend,
            sampler,
        };
        if symmetric {
            let d0 = dist.cumulant_derivatives(0.0)?;
            if (dist.mean - 0.5).abs() > SYMMETRY_TOL || d0.k3.abs() > SYMMETRY_TOL {
                return Err(Error::SymmetryMismatch(format!(
                    "mean {} and K'''(0) {} inconsistent with symmetry",
                    dist.mean, d0.k3
                )));
            }
        }
        Ok(dist)
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    /// True iff μ is symmetric about 1/2.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Total quadrature nodes used by the density route (0 for atomic laws).
    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Mass at the endpoints, `(μ{0}, μ{1})`.
    pub fn endpoint_masses(&self) -> (f64, f64) {
        match &self.backend {
            Backend::Atoms(atoms) => {
                let at = |t: f64| atoms.iter().filter(|a| a.0 == t).map(|a| a.1).sum();
                (at(0.0), at(1.0))
            }
            Backend::Density { .. } => (0.0, 0.0),
        }
    }

    /// `K(θ) = log ∫ e^{θx} dμ(x)`.
    pub fn cumulant(&self, theta: f64) -> Result<f64> {
        guard(theta)?;
        if theta == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.kind {
            DistributionKind::Bernoulli { q } => bernoulli_cumulant(q, theta),
            DistributionKind::Uniform01 => uniform_cumulant(theta),
            _ => self.generic(theta, false).k0,
        })
    }

    /// `K` and its first three derivatives at `θ`.
    pub fn cumulant_derivatives(&self, theta: f64) -> Result<CumulantDerivatives> {
        guard(theta)?;
        Ok(match self.kind {
            DistributionKind::Bernoulli { q } => bernoulli_derivatives(q, theta),
            DistributionKind::Uniform01 => uniform_derivatives(theta),
            _ => self.generic(theta, true),
        })
    }

    /// The atom-sum or quadrature route, bypassing any closed form.
    pub fn cumulant_derivatives_generic(&self, theta: f64) -> Result<CumulantDerivatives> {
        guard(theta)?;
        Ok(self.generic(theta, true))
    }

    /// `K'(θ)`, the tilted mean.
    pub fn tilted_mean(&self, theta: f64) -> Result<f64> {
        Ok(match self.kind {
            DistributionKind::Bernoulli { q } => {
                guard(theta)?;
                logistic(theta + (q / (1.0 - q)).ln())
            }
            DistributionKind::Uniform01 => {
                guard(theta)?;
                uniform_lower_mean(theta)
            }
            _ => self.cumulant_derivatives(theta)?.k1,
        })
    }

    /// `(K(θ), K'(θ))` without the higher moments.
    pub fn cumulant_and_mean(&self, theta: f64) -> Result<(f64, f64)> {
        guard(theta)?;
        Ok(match self.kind {
            DistributionKind::Bernoulli { q } => {
                let k0 = if theta == 0.0 { 0.0 } else { bernoulli_cumulant(q, theta) };
                (k0, logistic(theta + (q / (1.0 - q)).ln()))
            }
            DistributionKind::Uniform01 => {
                let k0 = if theta == 0.0 { 0.0 } else { uniform_cumulant(theta) };
                (k0, uniform_lower_mean(theta))
            }
            _ => {
                let d = self.generic(theta, false);
                (d.k0, d.k1)
            }
        })
    }

    /// `(K'(θ), 1 - K'(θ))`, each with full relative precision.
    pub fn tilted_mean_pair(&self, theta: f64) -> Result<(f64, f64)> {
        guard(theta)?;
        Ok(match self.kind {
            DistributionKind::Bernoulli { q } => {
                let z = theta + (q / (1.0 - q)).ln();
                (logistic(z), logistic(-z))
            }
            DistributionKind::Uniform01 => {
                // 1 - K'(θ) = K'(-θ) by symmetry of the uniform law
                let lo = uniform_lower_mean(theta);
                let hi = uniform_lower_mean(-theta);
                (lo, hi)
            }
            _ => {
                let d = self.generic(theta, false);
                if theta >= 0.0 {
                    (d.k1, d.k2)
                } else {
                    (d.k1, d.k3)
                }
            }
        })
    }

    /// Atoms of an atomic law (Bernoulli or discrete), `None` for densities.
    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match &self.backend {
            Backend::Atoms(a) => Some(a),
            Backend::Density { .. } => None,
        }
    }

    /// `K(θ) - log μ{0}` (or `K(θ) - θ - log μ{1}` when `at_one`), computed
    /// without cancellation. `None` when the endpoint carries no atom.
    pub fn endpoint_log_excess(&self, theta: f64, at_one: bool) -> Option<f64> {
        let atoms = self.atoms()?;
        let end = if at_one { 1.0 } else { 0.0 };
        let mass: f64 = atoms.iter().filter(|a| a.0 == end).map(|a| a.1).sum();
        if mass <= 0.0 {
            return None;
        }
        let logs: Vec<f64> = atoms
            .iter()
            .filter(|a| a.0 != end && a.1 > 0.0)
            .map(|&(x, p)| (p / mass).ln() + if at_one { -theta * (1.0 - x) } else { theta * x })
            .collect();
        if logs.is_empty() {
            return Some(0.0);
        }
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        Some(if lse > 0.0 {
            lse + (-lse).exp().ln_1p()
        } else {
            lse.exp().ln_1p()
        })
    }

    pub fn sample_weight<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.sampler {
            Sampler::Bernoulli(q) => {
                if rng.random_bool(*q) {
                    1.0
                } else {
                    0.0
                }
            }
            Sampler::Uniform => rng.random::<f64>(),
            Sampler::Beta(b) => b.sample(rng),
            Sampler::Atoms(xs, w) => xs[w.sample(rng)],
        }
    }

    /// `h(θ) = K'''(θ)K'(θ) + (p - 2)K''(θ)²`.
    pub fn assumption_function(&self, p: u32, theta: f64) -> Result<f64> {
        let d = self.cumulant_derivatives(theta)?;
        Ok(d.k3 * d.k1 + (p as f64 - 2.0) * d.k2 * d.k2)
    }

    /// Zeros of [`assumption_function`](Self::assumption_function) on
    /// `[theta_lo, theta_hi]`, located by a sign-change scan over `grid`
    /// intervals and refined by bisection.
    pub fn assumption_zeros(&self, p: u32, theta_lo: f64, theta_hi: f64, grid: usize) -> Result<Vec<f64>> {
        if !(theta_lo < theta_hi) {
            return Err(Error::Domain(format!("empty theta range [{theta_lo}, {theta_hi}]")));
        }
        if grid < 100 {
            return Err(Error::Domain(format!("grid {grid} < 100")));
        }
        let h = |t: f64| self.assumption_function(p, t);
        let step = (theta_hi - theta_lo) / grid as f64;
        let mut zeros = Vec::new();
        let mut prev_t = theta_lo;
        let mut prev_h = h(prev_t)?;
        for i in 1..=grid {
            let t = if i == grid { theta_hi } else { theta_lo + step * i as f64 };
            let ht = h(t)?;
            if prev_h == 0.0 {
                zeros.push(prev_t);
            } else if ht != 0.0 && ht.signum() != prev_h.signum() {
                let z = bisect(|x| self.assumption_function(p, x).unwrap_or(f64::NAN), prev_t, t, 1e-15, 0.0);
                zeros.push(z);
            }
            prev_t = t;
            prev_h = ht;
        }
        if prev_h == 0.0 {
            zeros.push(prev_t);
        }
        Ok(zeros)
    }

    /// Number of zeros of `h` on the given range.
    pub fn assumption_zero_count(&self, p: u32, theta_lo: f64, theta_hi: f64, grid: usize) -> Result<usize> {
        Ok(self.assumption_zeros(p, theta_lo, theta_hi, grid)?.len())
    }

    fn generic(&self, theta: f64, want_moments: bool) -> CumulantDerivatives {
        // y is x for θ < 0 and 1 - x for θ ≥ 0, so the tilt concentrates
        // mass near y = 0 and central moments keep full relative precision.
        let flip = theta >= 0.0;
        let rate = theta.abs();
        let mut terms: Vec<(f64, f64)> = Vec::new();
        let mut log_max = f64::NEG_INFINITY;
        let mut push = |y: f64, logw: f64, terms: &mut Vec<(f64, f64)>| {
            let l = logw - rate * y;
            if l > log_max {
                log_max = l;
            }
            terms.push((y, l));
        };
        match &self.backend {
            Backend::Atoms(atoms) => {
                for &(x, p) in atoms {
                    if p > 0.0 {
                        let y = if flip { 1.0 - x } else { x };
                        push(y, p.ln(), &mut terms);
                    }
                }
            }
            Backend::Density {
                nodes,
                sliver,
                a,
                b,
                log_norm,
            } => {
                for &(x, omx, lw) in nodes {
                    let y = if flip { omx } else { x };
                    push(y, lw, &mut terms);
                }
                // endpoint slivers [0, s] and [1 - s, 1]: ∫ x^{a-1} ≈ s^a / a
                let near0 = a * sliver.ln() - a.ln() - log_norm;
                let near1 = b * sliver.ln() - b.ln() - log_norm;
                let (y0, y1) = if flip { (1.0, 0.0) } else { (0.0, 1.0) };
                push(y0, near0, &mut terms);
                push(y1, near1, &mut terms);
            }
        }
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        let mut weights = Vec::with_capacity(terms.len());
        for &(y, l) in &terms {
            let w = (l - log_max).exp();
            m0 += w;
            m1 += w * y;
            weights.push(w);
        }
        let mean_y = m1 / m0;
        // log ∫ e^{θx} = θ x̂ + log Σ w e^{-|θ| y}
        let k0 = if theta == 0.0 {
            0.0
        } else {
            (if flip { theta } else { 0.0 }) + log_max + m0.ln()
        };
        if !want_moments {
            // k2 carries the precise complement 1 - k1 for θ ≥ 0, k3 for θ < 0
            return CumulantDerivatives {
                k0,
                k1: if flip { 1.0 - mean_y } else { mean_y },
                k2: if flip { mean_y } else { f64::NAN },
                k3: if flip { f64::NAN } else { 1.0 - mean_y },
            };
        }
        let mut c2 = 0.0;
        let mut c3 = 0.0;
        for (&(y, _), &w) in terms.iter().zip(&weights) {
            let d = y - mean_y;
            c2 += w * d * d;
            c3 += w * d * d * d;
        }
        c2 /= m0;
        c3 /= m0;
        CumulantDerivatives {
            k0,
            k1: if flip { 1.0 - mean_y } else { mean_y },
            k2: c2,
            k3: if flip { -c3 } else { c3 },
        }
    }
}

fn guard(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.abs() > THETA_GUARD {
        return Err(Error::OverflowGuard {
            theta,
            guard: THETA_GUARD,
        });
    }
    Ok(())
}

fn validate(kind: DistributionKind) -> Result<(DistributionKind, bool)> {
    match kind {
        DistributionKind::Bernoulli { q } => {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidDistribution(format!("bernoulli q={q} outside [0, 1]")));
            }
            Ok((DistributionKind::Bernoulli { q }, q == 0.5))
        }
        DistributionKind::Uniform01 => Ok((DistributionKind::Uniform01, true)),
        DistributionKind::Beta { a, b } => {
            if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidDistribution(format!("beta shapes a={a}, b={b} must be positive")));
            }
            Ok((DistributionKind::Beta { a, b }, a == b))
        }
        DistributionKind::Discrete(atoms) => {
            if atoms.is_empty() {
                return Err(Error::InvalidDistribution("discrete distribution has no atoms".into()));
            }
            let mut total = 0.0;
            for &(x, p) in &atoms {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidDistribution(format!("atom {x} outside [0, 1]")));
                }
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidDistribution(format!("atom {x} has invalid probability {p}")));
                }
                total += p;
            }
            if (total - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidDistribution(format!("probabilities sum to {total}, not 1")));
            }
            let mut merged: Vec<(f64, f64)> = Vec::new();
            let mut sorted: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (x, p) in sorted {
                match merged.last_mut() {
                    Some(last) if last.0 == x => last.1 += p,
                    _ => merged.push((x, p)),
                }
            }
            let symmetric = merged
                    .iter()
                    .zip(merged.iter().rev())
                    .all(|(lo, hi)| (lo.0 + hi.0 - 1.0).abs() <= 1e-12 && (lo.1 - hi.1).abs() <= PROB_SUM_TOL);
            Ok((DistributionKind::Discrete(merged), symmetric))
        }
    }
}

fn exact_moments(kind: &DistributionKind) -> (f64, f64) {
    match kind {
        DistributionKind::Bernoulli { q } => (*q, q * (1.0 - q)),
        DistributionKind::Uniform01 => (0.5, 1.0 / 12.0),
        DistributionKind::Beta { a, b } => {
            let s = a + b;
            (a / s, a * b / (s * s * (s + 1.0)))
        }
        DistributionKind::Discrete(atoms) => {
            let mean: f64 = atoms.iter().map(|(x, p)| x * p).sum();
            let var: f64 = atoms.iter().map(|(x, p)| p * (x - mean) * (x - mean)).sum();
            (mean, var)
        }
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Lanczos approximation (g = 7, n = 9), accurate to ~1e-15 relative.
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut s = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

fn build_density(a: f64, b: f64) -> (Backend, usize) {
    let log_norm = ln_beta(a, b);
    // deep enough that the dropped slivers carry < 1e-17 of the mass
    let levels = (57.0 / a.min(b)).ceil() as usize;
    let make = |per_panel: usize| {
        let (rule, sliver) = graded_rule(per_panel, levels);
        let nodes: Vec<(f64, f64, f64)> = rule
            .into_iter()
            .map(|n| {
                let lw = n.weight.ln() + (a - 1.0) * n.x.ln() + (b - 1.0) * n.one_minus_x.ln() - log_norm;
                (n.x, n.one_minus_x, lw)
            })
            .collect();
        Backend::Density {
            nodes,
            sliver,
            a,
            b,
            log_norm,
        }
    };
    let probe = |backend: &Backend| -> Vec<f64> {
        let tmp = EdgeWeightDistribution {
            kind: DistributionKind::Beta { a, b },
            symmetric: false,
            quadrature_nodes: 0,
            mean: 0.0,
            variance: 0.0,
            backend: backend.clone(),
            sampler: Sampler::Uniform,
        };
        QUADRATURE_PROBES
            .iter()
            .flat_map(|&t| {
                let d = tmp.generic(t, true);
                [d.k0, d.k1.ln(), (1.0 - d.k1).ln(), d.k2.ln()]
            })
            .collect()
    };
    let mut per_panel = 4;
    let mut backend = make(per_panel);
    let mut prev = probe(&backend);
    while per_panel < 64 {
        let next_backend = make(per_panel * 2);
        let next = probe(&next_backend);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        per_panel *= 2;
        backend = next_backend;
        prev = next;
        if diff < QUADRATURE_TOL {
            break;
        }
    }
    let count = match &backend {
        Backend::Density { nodes, .. } => nodes.len(),
        Backend::Atoms(_) => 0,
    };
    (backend, count)
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn bernoulli_cumulant(q: f64, theta: f64) -> f64 {
    if theta <= 0.0 {
        (q * theta.exp_m1()).ln_1p()
    } else {
        theta + (q + (1.0 - q) * (-theta).exp()).ln()
    }
}

fn bernoulli_derivatives(q: f64, theta: f64) -> CumulantDerivatives {
    if q == 0.0 || q == 1.0 {
        return CumulantDerivatives {
            k0: q * theta,
            k1: q,
            k2: 0.0,
            k3: 0.0,
        };
    }
    let z = theta + (q / (1.0 - q)).ln();
    let s = logistic(z);
    let sc = logistic(-z);
    let k2 = s * sc;
    CumulantDerivatives {
        k0: if theta == 0.0 { 0.0 } else { bernoulli_cumulant(q, theta) },
        k1: s,
        k2,
        k3: k2 * (sc - s),
    }
}

fn uniform_cumulant(theta: f64) -> f64 {
    if theta > 0.0 {
        theta + (-(-theta).exp_m1() / theta).ln()
    } else {
        (theta.exp_m1() / theta).ln()
    }
}

/// Coefficients `c_n` with `coth x - 1/x = Σ_{n≥1} c_n x^{2n-1}`.
fn langevin_coefficients() -> &'static [f64; 20] {
    use std::sync::OnceLock;
    static COEF: OnceLock<[f64; 20]> = OnceLock::new();
    COEF.get_or_init(|| {
        // Bernoulli numbers B_0..B_40 from Σ_{k<m} C(m+1, k) B_k = -(m+1) B_m
        let n = 41;
        let mut b = vec![0.0f64; n];
        b[0] = 1.0;
        for m in 1..n {
            let mut s = 0.0;
            let mut binom = 1.0; // C(m+1, 0)
            for (k, bk) in b.iter().enumerate().take(m) {
                s += binom * bk;
                binom = binom * (m + 1 - k) as f64 / (k + 1) as f64;
            }
            b[m] = -s / (m + 1) as f64;
        }
        let mut out = [0.0; 20];
        let mut fact = 1.0f64; // (2n)!
        let mut pow = 1.0f64; // 2^{2n}
        for i in 1..=20 {
            fact *= ((2 * i - 1) * (2 * i)) as f64;
            pow *= 4.0;
            out[i - 1] = pow * b[2 * i] / fact;
        }
        out
    })
}

/// `(L(x), L'(x), L''(x))` for the Langevin function `L(x) = coth x - 1/x`.
fn langevin(x: f64) -> (f64, f64, f64) {
    if x.abs() < 1.0 {
        let c = langevin_coefficients();
        let x2 = x * x;
        let (mut l0, mut l1, mut l2) = (0.0, 0.0, 0.0);
        let mut pw = 1.0; // x^{2n-2}
        for (i, &cn) in c.iter().enumerate() {
            let n = (i + 1) as f64;
            let e = 2.0 * n - 1.0;
            l0 += cn * pw * x;
            l1 += cn * e * pw;
            if i > 0 {
                l2 += cn * e * (e - 1.0) * pw / x;
            }
            pw *= x2;
        }
        if x == 0.0 {
            l2 = 0.0;
        }
        (l0, l1, l2)
    } else {
        let sgn = x.signum();
        let ax = x.abs();
        let e = (-2.0 * ax).exp();
        let one_m = 1.0 - e;
        let coth = (1.0 + e) / one_m;
        let csch2 = 4.0 * e / (one_m * one_m);
        let coth_csch2 = 4.0 * e * (1.0 + e) / (one_m * one_m * one_m);
        let l0 = sgn * (coth - 1.0 / ax);
        let l1 = 1.0 / (ax * ax) - csch2;
        let l2 = sgn * (2.0 * coth_csch2 - 2.0 / (ax * ax * ax));
        (l0, l1, l2)
    }
}

/// `K'(θ)` for the uniform law, accurate when it is small (θ ≤ 0).
fn uniform_lower_mean(theta: f64) -> f64 {
    let x = 0.5 * theta;
    if x > -1.0 {
        return 0.5 + 0.5 * langevin(x).0;
    }
    // 1/2 (1 - L(|x|)) = 1/2 (1/|x| - 2e^{-2|x|} / (1 - e^{-2|x|}))
    let ax = -x;
    let e = (-2.0 * ax).exp();
    0.5 * (1.0 / ax - 2.0 * e / (1.0 - e))
}

fn uniform_derivatives(theta: f64) -> CumulantDerivatives {
    // K'(θ) = 1/2 + L(θ/2)/2
    let (l0, l1, l2) = langevin(0.5 * theta);
    CumulantDerivatives {
        k0: if theta == 0.0 { 0.0 } else { uniform_cumulant(theta) },
        k1: 0.5 + 0.5 * l0,
        k2: 0.25 * l1,
        k3: 0.125 * l2,
    }
}

impl fmt::Display for EdgeWeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DistributionKind::Bernoulli { q } => write!(f, "bernoulli:q={q}"),
            DistributionKind::Uniform01 => write!(f, "uniform"),
            DistributionKind::Beta { a, b } => write!(f, "beta:a={a},b={b}"),
            DistributionKind::Discrete(atoms) => {
                write!(f, "discrete:")?;
                for (i, (x, p)) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}={p}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("invalid number for {what}: {s:?}")))
}

fn parse_named(args: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut vals: Vec<Option<f64>> = vec![None; keys.len()];
    for part in args.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {part:?}")))?;
        let k = k.trim();
        let idx = keys
            .iter()
            .position(|&key| key == k)
            .ok_or_else(|| Error::Parse(format!("unknown key {k:?}")))?;
        if vals[idx].is_some() {
            return Err(Error::Parse(format!("duplicate key {k:?}")));
        }
        vals[idx] = Some(parse_f64(v, k)?);
    }
    keys.iter()
        .zip(vals)
        .map(|(k, v)| v.ok_or_else(|| Error::Parse(format!("missing key {k:?}"))))
        .collect()
}

impl FromStr for EdgeWeightDistribution {
    type Err = Error;

    /// Parses `bernoulli:q=0.5`, `uniform`, `beta:a=2,b=2` or
    /// `discrete:0=0.5,1=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (s, None),
        };
        match (name, args) {
            ("uniform", None) => Ok(Self::uniform()),
            ("uniform", Some(_)) => Err(Error::Parse("uniform takes no parameters".into())),
            ("bernoulli", Some(a)) => {
                let v = parse_named(a, &["q"])?;
                Self::bernoulli(v[0])
            }
            ("beta", Some(a)) => {
                let v = parse_named(a, &["a", "b"])?;
                Self::beta(v[0], v[1])
            }
            ("discrete", Some(a)) => {
                let mut atoms = Vec::new();
                for part in a.split(',') {
                    let (x, p) = part
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("expected atom=prob, got {part:?}")))?;
                    atoms.push((parse_f64(x, "atom")?, parse_f64(p, "probability")?));
                }
                Self::discrete(atoms)
            }
            ("bernoulli" | "beta" | "discrete", None) => Err(Error::Parse(format!("{name} requires parameters"))),
            _ => Err(Error::Parse(format!("unknown distribution {name:?}"))),
        }
    }
}

/// The built-in distributions exercised by tests and reports.
pub fn builtins() -> Vec<EdgeWeightDistribution> {
    vec![
        EdgeWeightDistribution::bernoulli(0.5).unwrap(),
        EdgeWeightDistribution::uniform(),
        EdgeWeightDistribution::beta(2.0, 2.0).unwrap(),
        EdgeWeightDistribution::discrete(vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cumulant_at_zero_is_exactly_zero() {
        for d in builtins() {
            assert_eq!(d.cumulant(0.0).unwrap(), 0.0);
            assert_eq!(d.cumulant_derivatives(0.0).unwrap().k0, 0.0);
        }
    }

    #[test]
    fn bernoulli_half_matches_two_atom_sum() {
        let d = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        let oracle = (0.5 * 1.0 + 0.5 * 2f64.exp()).ln();
        assert!(close(d.cumulant(2.0).unwrap(), oracle, 1e-15));
        assert!(close(oracle, (1.0 + 2f64.exp()).ln() - 2f64.ln(), 1e-15));
    }

    #[test]
    fn uniform_matches_riemann_sum() {
        // midpoint sum with 10^6 cells
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let s: f64 = (0..n).map(|i| ((i as f64 + 0.5) * h).exp()).sum::<f64>() * h;
        let oracle = s.ln();
        let d = EdgeWeightDistribution::uniform();
        assert!(close(d.cumulant(1.0).unwrap(), oracle, 1e-10));
        assert!(close(d.cumulant(1.0).unwrap(), (1f64.exp() - 1.0).ln(), 1e-14));
        assert!(close(oracle, 0.541324, 1e-6));
    }

    #[test]
    fn derivative_examples() {
        let b22 = EdgeWeightDistribution::beta(2.0, 2.0).unwrap();
        let d = b22.cumulant_derivatives(0.0).unwrap();
        assert_eq!(d.k0, 0.0);
        assert!(close(d.k1, 0.5, 1e-12));
        assert!(close(d.k2, 0.05, 1e-12));
        assert!(close(d.k3, 0.0, 1e-12));

        let bern = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        let d = bern.cumulant_derivatives(0.0).unwrap();
        assert_eq!((d.k0, d.k1, d.k2, d.k3), (0.0, 0.5, 0.25, 0.0));

        let uni = EdgeWeightDistribution::uniform();
        let t: f64 = -10.32;
        let oracle = t.exp() / (t.exp() - 1.0) - 1.0 / t;
        let k1 = uni.cumulant_derivatives(t).unwrap().k1;
        assert!(close(k1, oracle, 1e-14));
        assert!(close(k1, 0.0969, 1e-4));
    }

    #[test]
    fn moments_at_zero_match_mean_and_variance() {
        for d in builtins() {
            let c = d.cumulant_derivatives(0.0).unwrap();
            assert!(close(c.k1, d.mean(), 1e-10), "{d}");
            assert!(close(c.k2, d.variance(), 1e-10), "{d}");
        }
        let skew = EdgeWeightDistribution::beta(2.0, 5.0).unwrap();
        let c = skew.cumulant_derivatives(0.0).unwrap();
        assert!(close(c.k1, 2.0 / 7.0, 1e-10));
        assert!(close(c.k2, 10.0 / (49.0 * 8.0), 1e-10));
    }

    #[test]
    fn generic_route_matches_closed_forms() {
        let bern = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        let uni = EdgeWeightDistribution::uniform();
        let b11 = EdgeWeightDistribution::beta(1.0, 1.0).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        for i in 0..=600 {
            let t = -30.0 + 0.1 * i as f64;
            for d in [&bern, &uni] {
                let c = d.cumulant_derivatives(t).unwrap();
                let g = d.cumulant_derivatives_generic(t).unwrap();
                if t != 0.0 {
                    assert!(rel(g.k0, c.k0) < 1e-10, "{d} k0 at {t}: {} vs {}", g.k0, c.k0);
                }
                assert!(rel(g.k1, c.k1) < 1e-10, "{d} k1 at {t}");
                assert!(rel(g.k2, c.k2) < 1e-10, "{d} k2 at {t}: {} vs {}", g.k2, c.k2);
                if c.k3.abs() > 1e-12 {
                    assert!(rel(g.k3, c.k3) < 1e-9, "{d} k3 at {t}: {} vs {}", g.k3, c.k3);
                }
            }
            let c = uni.cumulant_derivatives(t).unwrap();
            let g = b11.cumulant_derivatives(t).unwrap();
            assert!(rel(g.k2, c.k2) < 1e-10);
        }
    }

    #[test]
    fn convexity_and_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in builtins() {
            for _ in 0..1000 {
                let t = rng.random_range(-50.0..50.0);
                let c = d.cumulant_derivatives(t).unwrap();
                assert!(c.k2 >= -1e-12, "{d} at {t}");
                assert!((0.0..=1.0).contains(&c.k1));
            }
        }
    }

    #[test]
    fn symmetric_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in builtins().into_iter().filter(|d| d.is_symmetric()) {
            for _ in 0..200 {
                let t: f64 = rng.random_range(-60.0..60.0);
                let lhs = d.cumulant(-t).unwrap() + t - d.cumulant(t).unwrap();
                assert!(lhs.abs() < 1e-9, "{d} at {t}: {lhs}");
            }
        }
    }

    #[test]
    fn tail_limits() {
        // atoms at the endpoints: exponential concentration
        for d in [
            EdgeWeightDistribution::bernoulli(0.5).unwrap(),
            EdgeWeightDistribution::discrete(vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).unwrap(),
        ] {
            let lo = d.cumulant_derivatives(-40.0).unwrap();
            let hi = d.cumulant_derivatives(40.0).unwrap();
            assert!(lo.k1 < 1e-3 && lo.k2 < 1e-3, "{d}");
            assert!((hi.k1 - 1.0).abs() < 1e-3 && hi.k2 < 1e-3, "{d}");
        }
        // densities: K' ~ a/|θ| near the endpoint, so only polynomial decay
        for d in [EdgeWeightDistribution::uniform(), EdgeWeightDistribution::beta(2.0, 2.0).unwrap()] {
            let lo = d.cumulant_derivatives(-200.0).unwrap();
            let hi = d.cumulant_derivatives(200.0).unwrap();
            assert!(lo.k1 < 5e-2 && lo.k2 < 5e-2, "{d}");
            assert!((hi.k1 - 1.0).abs() < 5e-2 && hi.k2 < 5e-2, "{d}");
        }
    }

    #[test]
    fn third_cumulant_identity_for_symmetric() {
        for d in builtins().into_iter().filter(|d| d.is_symmetric()) {
            let c = d.cumulant_derivatives(0.0).unwrap();
            assert!(c.k3.abs() < 1e-10);
            for p in 2..6u32 {
                assert!(c.k3 * c.k1 + (p as f64 - 2.0) * c.k2 * c.k2 >= -1e-12);
            }
        }
    }

    #[test]
    fn mean_complement_is_precise() {
        for d in builtins() {
            for &t in &[-600.0, -80.0, -3.0, 0.0, 2.0, 90.0, 650.0] {
                let (m, c) = d.tilted_mean_pair(t).unwrap();
                assert!((m + c - 1.0).abs() < 1e-14, "{d} at {t}");
                assert!(m > 0.0 && c > 0.0, "{d} at {t}: {m} {c}");
                let k1 = d.cumulant_derivatives(t).unwrap().k1;
                assert!((k1 - m).abs() <= 1e-15 + 1e-12 * m, "{d} at {t}: {k1} vs {m}");
            }
        }
        let b = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        let (_, c) = b.tilted_mean_pair(100.0).unwrap();
        assert!((c / (-100f64).exp() - 1.0).abs() < 1e-12);
        let u = EdgeWeightDistribution::uniform();
        let (_, c) = u.tilted_mean_pair(500.0).unwrap();
        assert!((c - 1.0 / 500.0).abs() < 1e-15);
    }

    #[test]
    fn endpoint_excess() {
        let b = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        let t: f64 = -50.0;
        let ex = b.endpoint_log_excess(t, false).unwrap();
        assert!((ex / t.exp() - 1.0).abs() < 1e-12);
        let ex1 = b.endpoint_log_excess(-t, true).unwrap();
        assert!((ex1 / t.exp() - 1.0).abs() < 1e-12);
        let t = 1.3;
        assert!((b.endpoint_log_excess(t, false).unwrap() - (b.cumulant(t).unwrap() - 0.5f64.ln())).abs() < 1e-14);
        assert!(EdgeWeightDistribution::uniform().endpoint_log_excess(t, false).is_none());
        let d = EdgeWeightDistribution::discrete(vec![(0.2, 0.5), (1.0, 0.5)]).unwrap();
        assert!(d.endpoint_log_excess(t, false).is_none());
        assert!(d.endpoint_log_excess(t, true).is_some());
    }

    #[test]
    fn overflow_guard() {
        let d = EdgeWeightDistribution::uniform();
        assert!(matches!(d.cumulant(1.0001e4), Err(Error::OverflowGuard { .. })));
        assert!(matches!(d.cumulant(f64::NAN), Err(Error::OverflowGuard { .. })));
        assert!(d.cumulant(1e4).unwrap().is_finite());
        assert!(d.cumulant_derivatives(-1e4).unwrap().k1 > 0.0);
        for d in builtins() {
            for t in [-1e4, 1e4] {
                let c = d.cumulant_derivatives(t).unwrap();
                assert!(c.k0.is_finite() && c.k1.is_finite() && c.k2.is_finite() && c.k3.is_finite());
            }
        }
        let b = EdgeWeightDistribution::beta(0.5, 3.0).unwrap();
        assert!(b.cumulant(1e4).unwrap().is_finite());
    }

    #[test]
    fn beta_quadrature_against_series() {
        // M0(θ) = 1F1(a; a + b; θ) for Beta(a, b); Kummer series is exact here
        let (a, b) = (2.5, 0.7);
        let d = EdgeWeightDistribution::beta(a, b).unwrap();
        for &t in &[-3.0, -1.0, 0.5, 2.0, 6.0] {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 0..400 {
                let kf = k as f64;
                term *= (a + kf) / (a + b + kf) * t / (kf + 1.0);
                sum += term;
            }
            let got = d.cumulant(t).unwrap();
            assert!(close(got, sum.ln(), 1e-11), "θ={t}: {got} vs {}", sum.ln());
        }
    }

    #[test]
    fn sampling_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bern = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        assert!((0..1000).all(|_| {
            let x = bern.sample_weight(&mut rng);
            x == 0.0 || x == 1.0
        }));
        let n = 100_000;
        let uni = EdgeWeightDistribution::uniform();
        let m: f64 = (0..n).map(|_| uni.sample_weight(&mut rng)).sum::<f64>() / n as f64;
        assert!(close(m, 0.5, 0.005));
        let b = EdgeWeightDistribution::beta(2.0, 2.0).unwrap();
        let xs: Vec<f64> = (0..n).map(|_| b.sample_weight(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(close(var, 0.05, 0.003));
        let disc = EdgeWeightDistribution::discrete(vec![(0.2, 0.3), (0.9, 0.7)]).unwrap();
        assert!((0..1000).all(|_| {
            let x = disc.sample_weight(&mut rng);
            x == 0.2 || x == 0.9
        }));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let b = EdgeWeightDistribution::beta(2.0, 3.0).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| b.sample_weight(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn assumption_zero_counts() {
        let bern = EdgeWeightDistribution::bernoulli(0.5).unwrap();
        assert_eq!(bern.assumption_zero_count(2, -30.0, 30.0, 10_000).unwrap(), 1);
        let b22 = EdgeWeightDistribution::beta(2.0, 2.0).unwrap();
        let z = b22.assumption_zeros(2, -30.0, 30.0, 10_000).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].abs() < 1e-9);
        let uni = EdgeWeightDistribution::uniform();
        assert_eq!(uni.assumption_zero_count(3, -30.0, 30.0, 10_000).unwrap(), 1);
        assert!(uni.assumption_zero_count(3, 1.0, 0.0, 10_000).is_err());
    }

    #[test]
    fn assumption_zero_count_matches_dense_scan() {
        // independent oracle: plain sign scan on a 10x denser grid from the
        // closed-form Bernoulli derivatives
        let q = 0.5;
        let h = |t: f64| {
            let s = 1.0 / (1.0 + (-t).exp());
            let k2 = s * (1.0 - s);
            k2 * (1.0 - 2.0 * s) * s + (3.0 - 2.0) * k2 * k2
        };
        let n = 100_000;
        let mut count = 0;
        let mut prev = h(-30.0);
        for i in 1..=n {
            let v = h(-30.0 + 60.0 * i as f64 / n as f64);
            if v.signum() != prev.signum() {
                count += 1;
            }
            prev = v;
        }
        let d = EdgeWeightDistribution::bernoulli(q).unwrap();
        assert_eq!(d.assumption_zero_count(3, -30.0, 30.0, 10_000).unwrap(), count);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            EdgeWeightDistribution::bernoulli(1.0),
            Err(Error::DegenerateDistribution { .. })
        ));
        assert!(matches!(
            EdgeWeightDistribution::discrete(vec![(0.3, 1.0)]),
            Err(Error::DegenerateDistribution { .. })
        ));
        assert!(EdgeWeightDistribution::discrete(vec![(0.0, 0.5), (1.2, 0.5)]).is_err());
        assert!(EdgeWeightDistribution::discrete(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(EdgeWeightDistribution::beta(0.0, 1.0).is_err());
        assert!(EdgeWeightDistribution::with_declared_symmetry(DistributionKind::Beta { a: 2.0, b: 3.0 }, true).is_err());
        assert!(EdgeWeightDistribution::with_declared_symmetry(DistributionKind::Beta { a: 2.0, b: 2.0 }, true).is_ok());
    }

    #[test]
    fn symmetry_flags() {
        assert!(EdgeWeightDistribution::bernoulli(0.5).unwrap().is_symmetric());
        assert!(!EdgeWeightDistribution::bernoulli(0.3).unwrap().is_symmetric());
        assert!(EdgeWeightDistribution::beta(3.0, 3.0).unwrap().is_symmetric());
        assert!(!EdgeWeightDistribution::beta(3.0, 2.0).unwrap().is_symmetric());
        assert!(EdgeWeightDistribution::discrete(vec![(0.2, 0.4), (0.8, 0.4), (0.5, 0.2)])
            .unwrap()
            .is_symmetric());
        assert!(!EdgeWeightDistribution::discrete(vec![(0.2, 0.5), (0.9, 0.5)])
            .unwrap()
            .is_symmetric());
    }

    #[test]
    fn parse_spec_strings() {
        let d: EdgeWeightDistribution = "bernoulli:q=0.5".parse().unwrap();
        assert_eq!(d, EdgeWeightDistribution::bernoulli(0.5).unwrap());
        let d: EdgeWeightDistribution = "uniform".parse().unwrap();
        assert_eq!(d, EdgeWeightDistribution::uniform());
        let d: EdgeWeightDistribution = "beta:a=2,b=2".parse().unwrap();
        assert_eq!(d, EdgeWeightDistribution::beta(2.0, 2.0).unwrap());
        let d: EdgeWeightDistribution = "discrete:0=0.5,1=0.5".parse().unwrap();
        assert!(d.is_symmetric());
        assert_eq!(d.to_string(), "discrete:0=0.5,1=0.5");
        for bad in ["bernoulli:p=0.5", "beta:a=2", "beta:a=2,b=2,c=1", "gauss", "uniform:x=1", "bernoulli:q=x", "beta:a=1,a=2"] {
            assert!(bad.parse::<EdgeWeightDistribution>().is_err(), "{bad}");
        }
    }
}
