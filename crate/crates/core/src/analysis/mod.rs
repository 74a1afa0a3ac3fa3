//! The analytic engine: interference transform, coverage and mean rate.

mod coverage;
mod laplace;
mod rate;

pub use coverage::{
    coverage_conditional, coverage_overall, AnalyticSettings, ClusterKernel, CoverageBreakdown,
    CoverageModel,
};
pub use laplace::{
    exponent_derivatives, gamma_tail_kernel, laplace_derivative, laplace_derivative_with,
    laplace_interference, log_laplace_exponent, InnerDerivative, LaplaceContext,
};
pub use rate::{mean_rate, rate_from_coverage, RateBreakdown};
