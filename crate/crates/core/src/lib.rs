//! Asymptotic phase structure of two-parameter edge-weighted exponential
//! random graph models, plus a finite-n Metropolis sampler of the model.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod legendre;
pub mod quadrature;
pub mod roots;
pub mod sampler;
pub mod variational;

pub use distributions::{CumulantDerivatives, DistributionKind, EdgeWeightDistribution};
pub use error::{Error, Result};
pub use legendre::{boundary_behavior, dual_of, rate, rate_derivatives, BoundaryBehavior, DualPair, Endpoint};
pub use variational::{
    critical_point, maximizers, phase_curve, psi_infinity, transition_beta2, transition_point, CriticalPoint,
    Maximizer, MaximizerSet, ModelParams, PhaseCurve, PhaseSample, TransitionPoint, VBounds,
};
pub use asymptotics::{degeneracy_report, DegeneracyReport, Region};
pub use sampler::{exact_small_model, hom_density, run_chain, ChainOptions, ChainState, SubgraphSpec, Trace, WeightedGraph};
