//! The Monte Carlo engine.

mod estimate;
mod ppp;
mod trial;

pub use estimate::{
    conditional_coverage_from_outcomes, coverage_from_outcomes, empirical_association,
    empirical_coverage, empirical_coverage_curve, empirical_rate, rate_from_sinrs, run_trials,
    simulate, trial_rng, AssociationFrequencies, McSamples, McSettings, Method, MetricResult, Z_95,
};
pub use ppp::{generate_ppp, Point, Window, WindowSpec};
pub use trial::{simulate_trial, NetworkRealization, TrialOutcome};
