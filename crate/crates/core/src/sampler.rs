//! Finite-n edge-weighted graphs, homomorphism densities and a single-edge
//! Metropolis–Hastings chain targeting the exponential random graph law.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distributions::EdgeWeightDistribution;
use crate::error::{Error, Result};
use crate::variational::ModelParams;

/// Steps between full recomputations of the cached densities.
pub const REFRESH_INTERVAL: u64 = 100_000;
/// Default burn-in, in sweeps of `n²/2` steps.
pub const DEFAULT_BURN_IN_SWEEPS: u64 = 200;

/// Symmetric weight matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<f64>,
}

impl WeightedGraph {
    pub fn empty(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("graph needs at least 2 vertices, got {n}")));
        }
        Ok(Self { n, w: vec![0.0; n * n] })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in 0..i {
                g.set(i, j, value)?;
            }
        }
        Ok(g)
    }

    /// Independent weights drawn from `dist` on every pair.
    pub fn random<R: Rng + ?Sized>(n: usize, dist: &EdgeWeightDistribution, rng: &mut R) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = dist.sample_weight(rng);
                g.w[i * n + j] = x;
                g.w[j * n + i] = x;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            return Err(Error::Domain("loops carry no weight".into()));
        }
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Domain(format!("weight {value} outside [0, 1]")));
        }
        self.w[i * self.n + j] = value;
        self.w[j * self.n + i] = value;
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }
}

/// The subgraph `H` of a homomorphism density.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubgraphSpec {
    Edge,
    TwoStar,
    Triangle,
    /// Vertices `0..k` (k ≤ 4) and an edge list.
    Generic { k: usize, edges: Vec<(usize, usize)> },
}

impl SubgraphSpec {
    pub fn generic(k: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let s = SubgraphSpec::Generic { k, edges };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let SubgraphSpec::Generic { k, edges } = self else {
            return Ok(());
        };
        if *k > 4 {
            return Err(Error::UnsupportedSubgraph(format!("{k} vertices, at most 4 supported")));
        }
        if edges.is_empty() {
            return Err(Error::UnsupportedSubgraph("no edges".into()));
        }
        let mut seen = Vec::new();
        for &(a, b) in edges {
            if a >= *k || b >= *k {
                return Err(Error::UnsupportedSubgraph(format!("edge ({a}, {b}) outside 0..{k}")));
            }
            if a == b {
                return Err(Error::UnsupportedSubgraph(format!("loop at {a}")));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(Error::UnsupportedSubgraph(format!("repeated edge ({a}, {b})")));
            }
            seen.push(key);
        }
        // connectivity by flood fill
        let mut reached = vec![false; *k];
        reached[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for &(a, b) in edges {
                if reached[a] != reached[b] {
                    reached[a] = true;
                    reached[b] = true;
                    changed = true;
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return Err(Error::UnsupportedSubgraph("graph is not connected".into()));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            SubgraphSpec::Edge => 2,
            SubgraphSpec::TwoStar | SubgraphSpec::Triangle => 3,
            SubgraphSpec::Generic { k, .. } => *k,
        }
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        match self {
            SubgraphSpec::Edge => vec![(0, 1)],
            SubgraphSpec::TwoStar => vec![(0, 1), (0, 2)],
            SubgraphSpec::Triangle => vec![(0, 1), (1, 2), (0, 2)],
            SubgraphSpec::Generic { edges, .. } => edges.clone(),
        }
    }

    pub fn edge_count(&self) -> u32 {
        self.edge_list().len() as u32
    }

    /// The subgraph used as `H2` in the chain for a given edge count.
    pub fn for_p(p: u32) -> Result<Self> {
        match p {
            2 => Ok(SubgraphSpec::TwoStar),
            3 => Ok(SubgraphSpec::Triangle),
            _ => Err(Error::UnsupportedSubgraph(format!("no chain update for p = {p}"))),
        }
    }
}

impl fmt::Display for SubgraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgraphSpec::Edge => f.write_str("edge"),
            SubgraphSpec::TwoStar => f.write_str("two_star"),
            SubgraphSpec::Triangle => f.write_str("triangle"),
            SubgraphSpec::Generic { k, edges } => {
                write!(f, "generic:{k}")?;
                for (a, b) in edges {
                    write!(f, ",{a}-{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for SubgraphSpec {
    type Err = Error;

    /// `edge`, `two_star`, `triangle`, or `generic:k,a-b,c-d,...`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "edge" => Ok(SubgraphSpec::Edge),
            "two_star" | "two-star" => Ok(SubgraphSpec::TwoStar),
            "triangle" => Ok(SubgraphSpec::Triangle),
            other => {
                let rest = other
                    .strip_prefix("generic:")
                    .ok_or_else(|| Error::Parse(format!("unknown subgraph `{other}`")))?;
                let mut parts = rest.split(',');
                let k = parts
                    .next()
                    .and_then(|k| k.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("missing vertex count in `{other}`")))?;
                let mut edges = Vec::new();
                for e in parts {
                    let (a, b) = e
                        .split_once('-')
                        .ok_or_else(|| Error::Parse(format!("bad edge `{e}`")))?;
                    let a = a.trim().parse().map_err(|_| Error::Parse(format!("bad edge `{e}`")))?;
                    let b = b.trim().parse().map_err(|_| Error::Parse(format!("bad edge `{e}`")))?;
                    edges.push((a, b));
                }
                SubgraphSpec::generic(k, edges)
            }
        }
    }
}

/// `t(H, G)`: the average over all maps `V(H) → [n]` of the product of edge
/// weights, loops counting as weight 0.
pub fn hom_density(g: &WeightedGraph, h: &SubgraphSpec) -> Result<f64> {
    h.validate()?;
    let n = g.n;
    let nf = n as f64;
    Ok(match h {
        SubgraphSpec::Edge => g.w.iter().sum::<f64>() / (nf * nf),
        SubgraphSpec::TwoStar => (0..n).map(|i| g.degree(i).powi(2)).sum::<f64>() / nf.powi(3),
        SubgraphSpec::Triangle => triangle_sum(g) / nf.powi(3),
        SubgraphSpec::Generic { k, edges } => brute_force(g, *k, edges) / nf.powi(*k as i32),
    })
}

/// `Σ_{i,j,k} w_ij w_jk w_ki`.
fn triangle_sum(g: &WeightedGraph) -> f64 {
    let n = g.n;
    let mut total = 0.0;
    for i in 0..n {
        let ri = g.row(i);
        for j in 0..n {
            let wij = ri[j];
            if wij == 0.0 {
                continue;
            }
            let rj = g.row(j);
            let s: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            total += wij * s;
        }
    }
    total
}

fn brute_force(g: &WeightedGraph, k: usize, edges: &[(usize, usize)]) -> f64 {
    let n = g.n;
    let mut map = vec![0usize; k];
    let mut total = 0.0;
    loop {
        total += edges.iter().map(|&(a, b)| g.get(map[a], map[b])).product::<f64>();
        let mut pos = 0;
        loop {
            if pos == k {
                return total;
            }
            map[pos] += 1;
            if map[pos] < n {
                break;
            }
            map[pos] = 0;
            pos += 1;
        }
    }
}

/// Homomorphism density restricted to injective maps. Unlike
/// [`hom_density`] it carries no `O(1/n)` diagonal bias.
pub fn injective_density(g: &WeightedGraph, h: &SubgraphSpec) -> Result<f64> {
    h.validate()?;
    let n = g.n;
    let nf = n as f64;
    let falling = |k: usize| (0..k).map(|i| nf - i as f64).product::<f64>();
    if n < h.vertex_count() {
        return Err(Error::Domain(format!("{h} needs at least {} vertices", h.vertex_count())));
    }
    Ok(match h {
        SubgraphSpec::Edge => g.w.iter().sum::<f64>() / falling(2),
        SubgraphSpec::TwoStar => {
            let deg2: f64 = (0..n).map(|i| g.degree(i).powi(2)).sum();
            let sq: f64 = g.w.iter().map(|w| w * w).sum();
            (deg2 - sq) / falling(3)
        }
        SubgraphSpec::Triangle => triangle_sum(g) / falling(3),
        SubgraphSpec::Generic { k, edges } => {
            let mut map = vec![0usize; *k];
            let mut total = 0.0;
            'outer: loop {
                let distinct = (0..*k).all(|a| (0..a).all(|b| map[a] != map[b]));
                if distinct {
                    total += edges.iter().map(|&(a, b)| g.get(map[a], map[b])).product::<f64>();
                }
                let mut pos = 0;
                loop {
                    if pos == *k {
                        break 'outer;
                    }
                    map[pos] += 1;
                    if map[pos] < n {
                        break;
                    }
                    map[pos] = 0;
                    pos += 1;
                }
            }
            total / falling(*k)
        }
    })
}

/// Graph, cached densities and random state of one Metropolis chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    graph: WeightedGraph,
    h2: SubgraphSpec,
    degrees: Vec<f64>,
    t1: f64,
    t2: f64,
    step: u64,
    accepted: u64,
    rng: ChaCha8Rng,
}

impl ChainState {
    /// Initial state with iid weights from `dist`.
    pub fn new(dist: &EdgeWeightDistribution, h2: SubgraphSpec, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = WeightedGraph::random(n, dist, &mut rng)?;
        Self::from_graph(graph, h2, rng)
    }

    pub fn from_graph(graph: WeightedGraph, h2: SubgraphSpec, rng: ChaCha8Rng) -> Result<Self> {
        if !matches!(h2, SubgraphSpec::TwoStar | SubgraphSpec::Triangle) {
            return Err(Error::UnsupportedSubgraph(format!(
                "{h2} has no local chain update; use two_star or triangle"
            )));
        }
        let mut s = Self {
            degrees: Vec::new(),
            graph,
            h2,
            t1: 0.0,
            t2: 0.0,
            step: 0,
            accepted: 0,
            rng,
        };
        s.refresh();
        Ok(s)
    }

    /// Recomputes the cached degrees and densities from scratch.
    pub fn refresh(&mut self) {
        let n = self.graph.n;
        self.degrees = (0..n).map(|i| self.graph.degree(i)).collect();
        self.t1 = hom_density(&self.graph, &SubgraphSpec::Edge).expect("edge is valid");
        self.t2 = hom_density(&self.graph, &self.h2).expect("chain subgraph is valid");
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn h2(&self) -> &SubgraphSpec {
        &self.h2
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.step == 0 {
            0.0
        } else {
            self.accepted as f64 / self.step as f64
        }
    }

    /// Changes of `(t1, t2)` if edge `(i, j)` took weight `y`.
    pub fn density_change(&self, i: usize, j: usize, y: f64) -> (f64, f64) {
        let g = &self.graph;
        let nf = g.n as f64;
        let delta = y - g.get(i, j);
        let dt1 = 2.0 * delta / (nf * nf);
        let dt2 = match self.h2 {
            SubgraphSpec::TwoStar => {
                (2.0 * delta * (self.degrees[i] + self.degrees[j]) + 2.0 * delta * delta) / nf.powi(3)
            }
            SubgraphSpec::Triangle => {
                let common: f64 = g.row(i).iter().zip(g.row(j)).map(|(a, b)| a * b).sum();
                6.0 * delta * common / nf.powi(3)
            }
            _ => unreachable!("checked at construction"),
        };
        (dt1, dt2)
    }

    /// Log of the Metropolis ratio `exp(n²Δ(β1 t1 + β2 t2))` for setting
    /// edge `(i, j)` to `y`.
    pub fn log_acceptance(&self, params: &ModelParams, i: usize, j: usize, y: f64) -> f64 {
        let (dt1, dt2) = self.density_change(i, j, y);
        let nf = self.graph.n as f64;
        nf * nf * (params.beta1 * dt1 + params.beta2 * dt2)
    }

    fn apply(&mut self, i: usize, j: usize, y: f64) {
        let (dt1, dt2) = self.density_change(i, j, y);
        let delta = y - self.graph.get(i, j);
        let n = self.graph.n;
        self.graph.w[i * n + j] = y;
        self.graph.w[j * n + i] = y;
        self.degrees[i] += delta;
        self.degrees[j] += delta;
        self.t1 += dt1;
        self.t2 += dt2;
    }

    /// One Metropolis–Hastings step: a uniform pair, a proposal drawn from
    /// `dist`, acceptance with probability `min(1, exp(n²Δ))`.
    pub fn mh_step(&mut self, dist: &EdgeWeightDistribution, params: &ModelParams) {
        let n = self.graph.n;
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let y = dist.sample_weight(&mut self.rng);
        let la = self.log_acceptance(params, i, j, y);
        if la >= 0.0 || self.rng.random::<f64>() < la.exp() {
            self.apply(i, j, y);
            self.accepted += 1;
        }
        self.step += 1;
        if self.step % REFRESH_INTERVAL == 0 {
            self.refresh();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub n: usize,
    /// Steps discarded before recording; `None` means 200 sweeps.
    pub burn_in: Option<u64>,
    /// Recorded samples.
    pub samples: usize,
    /// Steps between samples; `None` means one sweep of `n²/2` steps.
    pub thin: Option<u64>,
    pub seed: u64,
}

impl ChainOptions {
    pub fn new(n: usize, samples: usize, seed: u64) -> Self {
        Self {
            n,
            burn_in: None,
            samples,
            thin: None,
            seed,
        }
    }

    pub fn sweep(&self) -> u64 {
        ((self.n * self.n) as u64 / 2).max(1)
    }

    pub fn thin_steps(&self) -> u64 {
        self.thin.unwrap_or_else(|| self.sweep()).max(1)
    }

    pub fn burn_in_steps(&self) -> u64 {
        self.burn_in.unwrap_or(DEFAULT_BURN_IN_SWEEPS * self.sweep())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub t_edge: f64,
    pub t_h2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub n: usize,
    pub h2: SubgraphSpec,
    pub rows: Vec<TraceRow>,
    pub acceptance_rate: f64,
}

impl Trace {
    pub fn mean_t1(&self) -> f64 {
        self.rows.iter().map(|r| r.t_edge).sum::<f64>() / self.rows.len() as f64
    }

    pub fn mean_t2(&self) -> f64 {
        self.rows.iter().map(|r| r.t_h2).sum::<f64>() / self.rows.len() as f64
    }

    /// Mean weight per vertex pair, `t1 · n/(n-1)`.
    pub fn mean_edge_weight(&self) -> f64 {
        let nf = self.n as f64;
        self.mean_t1() * nf / (nf - 1.0)
    }
}

pub const TRACE_HEADER: &str = "step,t_edge,t_h2";

/// Runs a chain from an iid initial graph and records thinned `(t1, t2)`.
pub fn run_chain(
    dist: &EdgeWeightDistribution,
    params: &ModelParams,
    h2: SubgraphSpec,
    opts: &ChainOptions,
) -> Result<Trace> {
    if h2.edge_count() != params.p {
        return Err(Error::Domain(format!(
            "{h2} has {} edges but p = {}",
            h2.edge_count(),
            params.p
        )));
    }
    let mut state = ChainState::new(dist, h2.clone(), opts.n, opts.seed)?;
    for _ in 0..opts.burn_in_steps() {
        state.mh_step(dist, params);
    }
    let thin = opts.thin_steps();
    let mut rows = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        for _ in 0..thin {
            state.mh_step(dist, params);
        }
        rows.push(TraceRow {
            step: state.step(),
            t_edge: state.t1(),
            t_h2: state.t2(),
        });
    }
    Ok(Trace {
        n: opts.n,
        h2,
        rows,
        acceptance_rate: state.acceptance_rate(),
    })
}

/// A configuration of the `n(n-1)/2` edge weights, pairs ordered
/// `(0,1), (0,2), ..., (1,2), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactState {
    pub weights: Vec<f64>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactModel {
    pub psi_n: f64,
    pub states: Vec<ExactState>,
}

pub fn edge_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

/// Exact finite-n law by enumeration, for atomic `μ` with at most 4 atoms
/// and `n ≤ 3`.
pub fn exact_small_model(
    dist: &EdgeWeightDistribution,
    params: &ModelParams,
    h2: &SubgraphSpec,
    n: usize,
) -> Result<ExactModel> {
    let atoms = dist
        .atoms()
        .ok_or_else(|| Error::TooLarge(format!("{dist} is continuous")))?;
    let atoms: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
    if atoms.len() > 4 {
        return Err(Error::TooLarge(format!("{} atoms, at most 4", atoms.len())));
    }
    if !(2..=3).contains(&n) {
        return Err(Error::TooLarge(format!("n = {n}, enumeration supports 2 or 3")));
    }
    if h2.edge_count() != params.p {
        return Err(Error::Domain(format!("{h2} has {} edges but p = {}", h2.edge_count(), params.p)));
    }
    let pairs = edge_pairs(n);
    let total = atoms.len().pow(pairs.len() as u32);
    let n2 = (n * n) as f64;
    let mut states = Vec::with_capacity(total);
    let mut log_terms = Vec::with_capacity(total);
    for code in 0..total {
        let mut g = WeightedGraph::empty(n)?;
        let mut rest = code;
        let mut log_mass = 0.0;
        let mut weights = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            let (x, pm) = atoms[rest % atoms.len()];
            rest /= atoms.len();
            g.set(i, j, x)?;
            weights.push(x);
            log_mass += pm.ln();
        }
        let t1 = hom_density(&g, &SubgraphSpec::Edge)?;
        let t2 = hom_density(&g, h2)?;
        log_terms.push(log_mass + n2 * (params.beta1 * t1 + params.beta2 * t2));
        states.push(ExactState {
            weights,
            probability: 0.0,
        });
    }
    let m = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = log_terms.iter().map(|l| (l - m).exp()).sum();
    let log_z = m + z.ln();
    for (s, l) in states.iter_mut().zip(&log_terms) {
        s.probability = (l - log_z).exp();
    }
    Ok(ExactModel {
        psi_n: log_z / n2,
        states,
    })
}
