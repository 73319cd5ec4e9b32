//! End-to-end acceptance checks. Runs every criterion, prints one line per
//! criterion and exits non-zero if any failed.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use erg_phase::asymptotics::{degeneracy_report, psi_approx, region, theta_approx, Region};
use erg_phase::distributions::builtins;
use erg_phase::legendre::rate_at_theta;
use erg_phase::sampler::edge_pairs;
use erg_phase::variational::{maximizers, psi_infinity, transition_point, TIE_TOL};
use erg_phase::{
    critical_point, dual_of, exact_small_model, rate, rate_derivatives, run_chain, ChainOptions, ChainState,
    EdgeWeightDistribution, ModelParams, SubgraphSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{grid_sup_rate, RateGrid};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: erg_phase::Error) -> String {
    e.to_string()
}

fn params(b1: f64, b2: f64, p: u32) -> ModelParams {
    ModelParams::new(b1, b2, p).unwrap()
}

fn table_rows(dist: &EdgeWeightDistribution, rows: &[(f64, f64, f64, f64)]) -> Result<String, String> {
    let mut out = Vec::new();
    for &(b1, b2, theta, u) in rows {
        let r = degeneracy_report(dist, &params(b1, b2, 2)).map_err(err)?;
        ensure((r.theta_opt - theta).abs() <= 0.01 && (r.u_opt - u).abs() <= 0.001, || {
            format!("({b1},{b2}): θ {:.4} u {:.5}, expected {theta} / {u}", r.theta_opt, r.u_opt)
        })?;
        out.push(format!("({b1},{b2}) θ={:.2} u={:.3}", r.theta_opt, r.u_opt));
    }
    Ok(out.join("; "))
}

fn bernoulli_table() -> Result<String, String> {
    let bern = EdgeWeightDistribution::bernoulli(0.5).map_err(err)?;
    table_rows(&bern, &[(-2.0, -4.0, -4.23, 0.014), (1.0, 1.0, 5.99, 0.998)])
}

fn uniform_table() -> Result<String, String> {
    let uni = EdgeWeightDistribution::uniform();
    table_rows(&uni, &[(-4.0, -6.0, -10.32, 0.097), (3.0, 2.0, 13.40, 0.925)])
}

fn beta_critical_point() -> Result<String, String> {
    let d = EdgeWeightDistribution::beta(2.0, 2.0).map_err(err)?;
    let c = critical_point(&d, 2).map_err(err)?;
    ensure(
        (c.beta1_c + 5.0).abs() < 1e-6
            && (c.beta2_c - 5.0).abs() < 1e-6
            && (c.u0 - 0.5).abs() < 1e-6
            && c.theta0.abs() < 1e-6,
        || format!("{c:?}"),
    )?;
    Ok(format!("({:.9}, {:.9}) u0={:.9} θ0={:.1e}", c.beta1_c, c.beta2_c, c.u0, c.theta0))
}

fn beta_two_maximizers() -> Result<String, String> {
    let d = EdgeWeightDistribution::beta(2.0, 2.0).map_err(err)?;
    let m = maximizers(&d, &params(-8.0, 8.0, 2), TIE_TOL).map_err(err)?;
    ensure(m.points.len() == 2 && m.on_transition, || format!("{m:?}"))?;
    let (a, b) = (m.points[0], m.points[1]);
    ensure(
        (a.pair.u - 0.165).abs() <= 0.005 && (b.pair.u - 0.835).abs() <= 0.005,
        || format!("u = {} / {}", a.pair.u, b.pair.u),
    )?;
    let gap = (a.score - b.score).abs();
    ensure(gap < 1e-9, || format!("score gap {gap:e}"))?;
    Ok(format!("u = {:.4} / {:.4}, score gap {gap:.1e}", a.pair.u, b.pair.u))
}

fn transition_line() -> Result<String, String> {
    let mut notes = Vec::new();
    for d in [
        EdgeWeightDistribution::bernoulli(0.5).map_err(err)?,
        EdgeWeightDistribution::beta(2.0, 2.0).map_err(err)?,
    ] {
        let crit = critical_point(&d, 2).map_err(err)?;
        for b1 in [-3.0, -8.0, -20.0] {
            if b1 >= crit.beta1_c {
                // no transition curve to the right of the critical point
                ensure(matches!(transition_point(&d, 2, b1), Err(erg_phase::Error::Domain(_))), || {
                    format!("{d} p=2 r({b1}) should be refused")
                })?;
                notes.push(format!("{d} r({b1}) refused (β1c = {:.1})", crit.beta1_c));
                continue;
            }
            let t = transition_point(&d, 2, b1).map_err(err)?;
            ensure((t.beta2 + b1).abs() < 1e-6, || format!("{d} p=2 r({b1}) = {}", t.beta2))?;
        }
    }
    notes.push("p=2 on the line".to_string());
    let discrete = EdgeWeightDistribution::discrete(vec![(0.0, 0.25), (0.5, 0.5), (1.0, 0.25)]).map_err(err)?;
    for (d, monotone) in [
        (EdgeWeightDistribution::uniform(), false),
        (EdgeWeightDistribution::bernoulli(0.5).map_err(err)?, true),
        (discrete, true),
    ] {
        let mut offsets = Vec::new();
        for b1 in [-10.0, -20.0, -40.0] {
            let t = transition_point(&d, 3, b1).map_err(err)?;
            // the offset r(β1) + β1 is resolved below the float spacing of β2
            ensure(t.offset > 0.0 && t.beta2 >= -b1, || format!("{d} p=3 r({b1}) + β1 = {:e}", t.offset))?;
            offsets.push(t.offset);
        }
        if monotone {
            ensure(offsets[0] > offsets[1] && offsets[1] > offsets[2], || {
                format!("{d} p=3 offsets not decreasing: {offsets:?}")
            })?;
        }
        notes.push(format!("{d} p=3 offsets {:.3e} {:.3e} {:.3e}", offsets[0], offsets[1], offsets[2]));
    }
    Ok(notes.join("; "))
}

fn legendre_suite() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_oracle: f64 = 0.0;
    for d in builtins() {
        for _ in 0..1000 {
            // involution in both directions
            let theta = rng.random_range(-15.0..15.0);
            let u = d.tilted_mean(theta).map_err(err)?;
            let back = dual_of(&d, u).map_err(err)?.theta;
            ensure((back - theta).abs() <= 1e-8 * (1.0 + theta.abs()), || {
                format!("{d}: θ {theta} → u {u} → θ {back}")
            })?;
            let u = rng.random_range(0.01..0.99);
            let pair = dual_of(&d, u).map_err(err)?;
            let k1 = d.tilted_mean(pair.theta).map_err(err)?;
            ensure((k1 - u).abs() < 1e-11, || format!("{d}: K'(θ(u)) - u = {:e}", k1 - u))?;

            let i = rate_at_theta(&d, pair.theta).map_err(err)?;
            if d.is_symmetric() {
                let mirror = rate(&d, 1.0 - u).map_err(err)?;
                ensure((i - mirror).abs() < 1e-9, || format!("{d}: I({u}) = {i}, I(1-u) = {mirror}"))?;
            }

            // convexity: positive curvature and the chord inequality
            let (_, i2) = rate_derivatives(&d, u).map_err(err)?;
            ensure(i2 > 0.0, || format!("{d}: I''({u}) = {i2}"))?;
            let v = rng.random_range(0.01..0.99);
            let lam: f64 = rng.random();
            let mid = lam * u + (1.0 - lam) * v;
            let chord = lam * i + (1.0 - lam) * rate(&d, v).map_err(err)?;
            let at_mid = rate(&d, mid).map_err(err)?;
            ensure(at_mid <= chord + 1e-12, || format!("{d}: convexity fails at {u}, {v}, {lam}"))?;

            let oracle = grid_sup_rate(&d, u);
            worst_oracle = worst_oracle.max((oracle - i).abs());
            ensure((oracle - i).abs() < 1e-6, || format!("{d}: I({u}) = {i}, grid sup {oracle}"))?;
        }
    }
    Ok(format!("4 x 1000 points, worst grid-sup gap {worst_oracle:.1e}"))
}

fn variational_oracle() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (k, d) in builtins().iter().enumerate() {
        let mut grid = RateGrid::new(d, 1_000_000, 1000);
        let mut rng = ChaCha8Rng::seed_from_u64(70 + k as u64);
        for _ in 0..100 {
            let pr = params(rng.random_range(-10.0..10.0), rng.random_range(0.0..10.0), rng.random_range(2..4));
            let psi = psi_infinity(d, &pr).map_err(err)?;
            let sup = grid.sup_score(&pr);
            worst = worst.max((psi - sup).abs());
            ensure((psi - sup).abs() < 1e-6, || format!("{d} {pr:?}: ψ {psi}, grid sup {sup}"))?;
        }
    }
    Ok(format!("4 x 100 points, worst gap {worst:.1e}"))
}

fn universality() -> Result<String, String> {
    let t = 20.0;
    let rays = [(-2.0, 1.0), (1.0, 1.0)];
    let mut theta_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut psi_range = (f64::INFINITY, f64::NEG_INFINITY);
    for d in builtins().into_iter().filter(|d| d.is_symmetric()) {
        for (a, b) in rays {
            let pr = params(a * t, b * t, 2);
            let m = maximizers(&d, &pr, TIE_TOL).map_err(err)?;
            let ratio = m.points[0].pair.theta / theta_approx(&pr).map_err(err)?;
            theta_range = (theta_range.0.min(ratio), theta_range.1.max(ratio));
            ensure((0.95..=1.05).contains(&ratio), || format!("{d} {pr:?}: θ ratio {ratio}"))?;
            if region(&pr).map_err(err)? == Region::NearlyComplete {
                let r = m.psi / (pr.beta1 + pr.beta2);
                psi_range = (psi_range.0.min(r), psi_range.1.max(r));
                ensure((0.9..=1.1).contains(&r), || format!("{d} {pr:?}: ψ ratio {r}"))?;
                let approx = psi_approx(&d, &pr).map_err(err)?;
                ensure(approx == pr.beta1 + pr.beta2, || "ψ approximation".into())?;
            }
        }
    }
    Ok(format!(
        "θ ratios in [{:.4}, {:.4}], ψ ratios in [{:.4}, {:.4}]",
        theta_range.0, theta_range.1, psi_range.0, psi_range.1
    ))
}

/// Upper 5% point of the chi-square law with 7 degrees of freedom.
const CHI2_7_95: f64 = 14.067;

fn sampler_exactness() -> Result<String, String> {
    let bern = EdgeWeightDistribution::bernoulli(0.5).map_err(err)?;
    let pr = params(0.2, 0.2, 3);
    let exact = exact_small_model(&bern, &pr, &SubgraphSpec::Triangle, 3).map_err(err)?;
    let key = |w: &[f64]| w.iter().map(|x| (*x == 1.0) as usize).fold(0, |a, b| 2 * a + b);
    let index: HashMap<usize, usize> = exact.states.iter().enumerate().map(|(i, s)| (key(&s.weights), i)).collect();
    let mut state = ChainState::new(&bern, SubgraphSpec::Triangle, 3, 2024).map_err(err)?;
    for _ in 0..10_000 {
        state.mh_step(&bern, &pr);
    }
    let samples = 1_000_000;
    let pairs = edge_pairs(3);
    let mut counts = vec![0u64; exact.states.len()];
    let mut w = vec![0.0; pairs.len()];
    for _ in 0..samples {
        for _ in 0..30 {
            state.mh_step(&bern, &pr);
        }
        for (slot, &(i, j)) in w.iter_mut().zip(&pairs) {
            *slot = state.graph().get(i, j);
        }
        counts[index[&key(&w)]] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(&exact.states)
        .map(|(&c, s)| {
            let e = s.probability * samples as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    ensure(chi2 < CHI2_7_95, || format!("chi-square {chi2:.3} ≥ {CHI2_7_95}"))?;
    Ok(format!("chi-square {chi2:.3} < {CHI2_7_95} (7 dof, 10^6 samples)"))
}

fn concentration() -> Result<String, String> {
    let bern = EdgeWeightDistribution::bernoulli(0.5).map_err(err)?;
    let pr = params(1.0, 1.0, 2);
    let u_star = maximizers(&bern, &pr, TIE_TOL).map_err(err)?.points[0].pair.u;
    let opts = ChainOptions::new(40, 2000, 7);
    let trace = run_chain(&bern, &pr, SubgraphSpec::TwoStar, &opts).map_err(err)?;
    let mean = trace.mean_edge_weight();
    ensure((mean - 0.998).abs() < 0.02, || format!("mean edge weight {mean:.4}"))?;
    Ok(format!(
        "mean edge weight {mean:.4} (u* = {u_star:.4}), raw t1 {:.4}",
        trace.mean_t1()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 10] = [
        ("bernoulli degeneracy table", Duration::from_secs(1), bernoulli_table),
        ("uniform degeneracy table", Duration::from_secs(1), uniform_table),
        ("beta(2,2) critical point", Duration::from_secs(1), beta_critical_point),
        ("beta(2,2) two maximizers at (-8,8)", Duration::from_secs(30), beta_two_maximizers),
        ("transition curve location", Duration::from_secs(30), transition_line),
        ("legendre property suite", Duration::from_secs(30), legendre_suite),
        ("variational grid oracle", Duration::from_secs(120), variational_oracle),
        ("universality ratios", Duration::from_secs(10), universality),
        ("sampler exactness at n=3", Duration::from_secs(120), sampler_exactness),
        ("concentration at n=40", Duration::from_secs(300), concentration),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; exceeded time limit {limit:?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} [{elapsed:.2?}] {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
