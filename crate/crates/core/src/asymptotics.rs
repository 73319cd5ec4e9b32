//! Near-degeneracy asymptotics of the maximizer and the free energy.
//!
//! Far from the line `β1 = -β2` the maximizing dual parameter behaves like
//! `2β1` (sparse region) or `2(β1 + pβ2)` (nearly complete region), for any
//! edge-weight law. Asymptotic equivalence `≍` is read as ratio convergence
//! to 1 along rays in parameter space.

use std::fmt;

use crate::distributions::{DistributionKind, EdgeWeightDistribution};
use crate::error::{Error, Result};
use crate::variational::{maximizers, ModelParams, TIE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Sparse,
    NearlyComplete,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Sparse => "sparse",
            Region::NearlyComplete => "nearly_complete",
        })
    }
}

/// `sparse` when `β1 < -β2`, `nearly_complete` when `β1 > -β2`.
pub fn region(params: &ModelParams) -> Result<Region> {
    let s = params.beta1 + params.beta2;
    if s < 0.0 {
        Ok(Region::Sparse)
    } else if s > 0.0 {
        Ok(Region::NearlyComplete)
    } else {
        Err(Error::Domain(format!(
            "({}, {}) lies on the dividing line β1 = -β2",
            params.beta1, params.beta2
        )))
    }
}

pub fn theta_approx(params: &ModelParams) -> Result<f64> {
    Ok(match region(params)? {
        Region::Sparse => 2.0 * params.beta1,
        Region::NearlyComplete => 2.0 * (params.beta1 + params.p as f64 * params.beta2),
    })
}

/// Closed-form maximizer for the two laws where `K'` is explicit:
/// Bernoulli(1/2) and Uniform(0, 1).
pub fn u_approx_closed_form(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<f64> {
    let t = theta_approx(params)?;
    let reg = region(params)?;
    match dist.kind() {
        DistributionKind::Bernoulli { q } if *q == 0.5 => Ok(match reg {
            Region::Sparse => t.exp(),
            Region::NearlyComplete => -(-t).exp_m1(),
        }),
        DistributionKind::Uniform01 => Ok(match reg {
            Region::Sparse => -1.0 / t,
            Region::NearlyComplete => 1.0 - 1.0 / t,
        }),
        _ => Err(Error::UnsupportedDistribution(format!(
            "no closed-form maximizer for {dist}; the maximizer is not universal"
        ))),
    }
}

/// `(1-p)β2 K'(2β1)^p + K(2β1)/2` in the sparse region, `β1 + β2` otherwise.
pub fn psi_approx(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<f64> {
    match region(params)? {
        Region::Sparse => {
            let t = 2.0 * params.beta1;
            let (k0, k1) = dist.cumulant_and_mean(t)?;
            Ok((1.0 - params.p as f64) * params.beta2 * k1.powi(params.p as i32) + 0.5 * k0)
        }
        Region::NearlyComplete => Ok(params.beta1 + params.beta2),
    }
}

/// Free energy of the exponential model at `u` against that of the
/// Erdős–Rényi model with the same edge density, both for Bernoulli(1/2)
/// edges and measured relative to the base law (so `psi_exp` equals
/// [`crate::variational::psi_infinity`] at the maximizing `u`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErComparison {
    pub u: f64,
    pub psi_exp: f64,
    pub psi_er: f64,
}

impl ErComparison {
    pub fn gap(&self) -> f64 {
        self.psi_exp - self.psi_er
    }
}

pub fn er_comparison(params: &ModelParams, u: f64) -> Result<ErComparison> {
    er_comparison_split(params, u, 1.0 - u)
}

fn er_comparison_split(params: &ModelParams, u: f64, one_minus_u: f64) -> Result<ErComparison> {
    if params.beta2 < 0.0 {
        return Err(Error::Domain(format!("β2 = {} is negative", params.beta2)));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
    }
    let half_log2 = 0.5 * std::f64::consts::LN_2;
    let psi_er = -0.5 * one_minus_u.ln() - half_log2;
    let psi_exp = (1.0 - params.p as f64) * params.beta2 * u.powi(params.p as i32) + psi_er;
    Ok(ErComparison { u, psi_exp, psi_er })
}

/// [`er_comparison`] at the global maximizer of the Bernoulli(1/2) model.
pub fn er_comparison_at_maximizer(params: &ModelParams) -> Result<ErComparison> {
    let dist = EdgeWeightDistribution::bernoulli(0.5)?;
    let m = maximizers(&dist, params, TIE_TOL)?;
    let (u, c) = dist.tilted_mean_pair(m.points[0].pair.theta)?;
    er_comparison_split(params, u, c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub params: ModelParams,
    pub theta_opt: f64,
    pub u_opt: f64,
    pub theta_approx: f64,
    pub u_approx: Option<f64>,
    pub psi_exact: f64,
    pub psi_approx: f64,
    pub region: Region,
}

impl DegeneracyReport {
    pub fn theta_rel_error(&self) -> f64 {
        (self.theta_approx - self.theta_opt).abs() / self.theta_opt.abs()
    }

    pub fn u_rel_error(&self) -> Option<f64> {
        self.u_approx.map(|a| (a - self.u_opt).abs() / self.u_opt.abs())
    }

    pub fn psi_rel_error(&self) -> f64 {
        (self.psi_approx - self.psi_exact).abs() / self.psi_exact.abs()
    }

    /// CSV row matching [`REPORT_HEADER`], rounded to two decimals for `θ`
    /// and three for `u`.
    pub fn csv_row(&self) -> String {
        let ua = match self.u_approx {
            Some(u) => format!("{u:.3}"),
            None => String::new(),
        };
        format!(
            "{},{},{:.2},{:.3},{:.2},{},{:.6},{:.6},{}",
            self.params.beta1,
            self.params.beta2,
            self.theta_opt,
            self.u_opt,
            self.theta_approx,
            ua,
            self.psi_exact,
            self.psi_approx,
            self.region
        )
    }
}

pub const REPORT_HEADER: &str = "beta1,beta2,theta_opt,u_opt,theta_approx,u_approx,psi_exact,psi_approx,region";

pub fn degeneracy_report(dist: &EdgeWeightDistribution, params: &ModelParams) -> Result<DegeneracyReport> {
    let region = region(params)?;
    let m = maximizers(dist, params, TIE_TOL)?;
    // on a tie either point is a valid maximizer; report the one in the region's direction
    let best = match region {
        Region::Sparse => m.points[0],
        Region::NearlyComplete => m.points[m.points.len() - 1],
    };
    let u_approx = match u_approx_closed_form(dist, params) {
        Ok(u) => Some(u),
        Err(Error::UnsupportedDistribution(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DegeneracyReport {
        params: *params,
        theta_opt: best.pair.theta,
        u_opt: best.pair.u,
        theta_approx: theta_approx(params)?,
        u_approx,
        psi_exact: m.psi,
        psi_approx: psi_approx(dist, params)?,
        region,
    })
}

/// The Bernoulli(1/2) and Uniform(0, 1) comparison tables at `p = 2`.
pub fn tables() -> Result<Vec<(EdgeWeightDistribution, DegeneracyReport)>> {
    let bern = EdgeWeightDistribution::bernoulli(0.5)?;
    let uni = EdgeWeightDistribution::uniform();
    let rows = [(&bern, -2.0, -4.0), (&bern, 1.0, 1.0), (&uni, -4.0, -6.0), (&uni, 3.0, 2.0)];
    rows.iter()
        .map(|&(d, b1, b2)| {
            let params = ModelParams::new(b1, b2, 2)?;
            Ok((d.clone(), degeneracy_report(d, &params)?))
        })
        .collect()
}
