#![allow(dead_code)]

use erg_phase::{dual_of, EdgeWeightDistribution, ModelParams};

/// `sup_θ (θu - K(θ))` from a θ-grid followed by golden-section refinement.
pub fn grid_sup_rate(dist: &EdgeWeightDistribution, u: f64) -> f64 {
    let k = |t: f64| dist.cumulant(t).unwrap();
    let obj = |t: f64| t * u - k(t);
    let mut span = 1.0;
    while dist.tilted_mean(-span).unwrap() > u || dist.tilted_mean(span).unwrap() < u {
        span *= 2.0;
    }
    let m = 400;
    let h = 2.0 * span / m as f64;
    let best = (0..=m)
        .map(|i| -span + h * i as f64)
        .map(|t| (t, obj(t)))
        .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = obj(d);
        }
    }
    best.1.max(fc).max(fd)
}

/// `I` on a uniform u-grid, with `I(0)` and `I(1)` from the endpoint atoms
/// (infinite without one). Interior values come from Newton continuation
/// along the grid; points whose dual lies beyond the θ guard are infinite.
pub struct RateGrid<'a> {
    dist: &'a EdgeWeightDistribution,
    size: usize,
    coarse: usize,
    coarse_rate: Vec<f64>,
    cells: std::collections::HashMap<usize, Vec<f64>>,
}

impl<'a> RateGrid<'a> {
    /// A grid of `size` intervals, evaluated on demand in blocks of
    /// `size / coarse` intervals around the local maxima of a coarse grid.
    pub fn new(dist: &'a EdgeWeightDistribution, size: usize, coarse: usize) -> Self {
        assert_eq!(size % coarse, 0);
        let mut g = Self {
            dist,
            size,
            coarse,
            coarse_rate: Vec::new(),
            cells: Default::default(),
        };
        let step = size / coarse;
        g.coarse_rate = g.rates((0..=coarse).map(|i| i * step));
        g
    }

    fn endpoint(&self, at_one: bool) -> f64 {
        let (m0, m1) = self.dist.endpoint_masses();
        let m = if at_one { m1 } else { m0 };
        if m > 0.0 {
            -m.ln()
        } else {
            f64::INFINITY
        }
    }

    fn rates(&self, idx: impl Iterator<Item = usize>) -> Vec<f64> {
        let mut theta: Option<f64> = None;
        idx.map(|i| {
            if i == 0 {
                return self.endpoint(false);
            }
            if i == self.size {
                return self.endpoint(true);
            }
            let u = i as f64 / self.size as f64;
            let t = match theta.and_then(|t0| newton(self.dist, u, t0)) {
                Some(t) => Some(t),
                None => dual_of(self.dist, u).ok().map(|p| p.theta),
            };
            theta = t;
            match t {
                Some(t) => t * u - self.dist.cumulant(t).unwrap(),
                None => f64::INFINITY,
            }
        })
        .collect()
    }

    /// Maximum of `β1u + β2u^p - I(u)/2` over the full grid.
    pub fn sup_score(&mut self, params: &ModelParams) -> f64 {
        let p = params.p as i32;
        let score = |u: f64, i: f64| params.beta1 * u + params.beta2 * u.powi(p) - 0.5 * i;
        let step = self.size / self.coarse;
        let coarse: Vec<f64> = self
            .coarse_rate
            .iter()
            .enumerate()
            .map(|(k, &i)| score((k * step) as f64 / self.size as f64, i))
            .collect();
        let mut best = f64::NEG_INFINITY;
        for k in 0..=self.coarse {
            let left = if k == 0 { f64::NEG_INFINITY } else { coarse[k - 1] };
            let right = if k == self.coarse { f64::NEG_INFINITY } else { coarse[k + 1] };
            if coarse[k] < left || coarse[k] < right {
                continue;
            }
            for cell in [k.wrapping_sub(1), k] {
                if cell >= self.coarse {
                    continue;
                }
                if !self.cells.contains_key(&cell) {
                    let v = self.rates((cell * step)..=((cell + 1) * step));
                    self.cells.insert(cell, v);
                }
                for (j, &i) in self.cells[&cell].iter().enumerate() {
                    best = best.max(score((cell * step + j) as f64 / self.size as f64, i));
                }
            }
        }
        best
    }
}

fn newton(dist: &EdgeWeightDistribution, u: f64, mut t: f64) -> Option<f64> {
    for _ in 0..8 {
        let d = dist.cumulant_derivatives(t).ok()?;
        let f = d.k1 - u;
        if f.abs() <= 1e-15 * u.min(1.0 - u).max(1e-300) {
            return Some(t);
        }
        let next = t - f / d.k2;
        if !next.is_finite() {
            return None;
        }
        if (next - t).abs() <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
            return Some(next);
        }
        t = next;
    }
    None
}
