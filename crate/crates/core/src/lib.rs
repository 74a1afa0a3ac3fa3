//! Two-tier heterogeneous network analysis with small-cell cooperation.
//!
//! [`analysis`] evaluates association, coverage and rate analytically;
//! [`mcsim`] estimates the same metrics by simulation. The guide in `book/`
//! walks through both.

pub mod analysis;
pub mod association;
pub mod config;
pub mod error;
pub mod mcsim;
pub mod model;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};

pub use analysis::{coverage_overall, mean_rate, AnalyticSettings, CoverageModel};
pub use association::{assoc_prob_sbs_cluster, assoc_prob_sbs_single, AssociationEvent};
pub use config::Config;
pub use mcsim::{simulate, McSettings, MetricResult};
pub use model::{Mode, Scenario, Strategy, TierParams};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod ch1_intro {}
    #[doc = include_str!("../../../book/src/deployment.md")]
    mod ch2_deployment {}
    #[doc = include_str!("../../../book/src/association.md")]
    mod ch3_association {}
    #[doc = include_str!("../../../book/src/interference.md")]
    mod ch4_interference {}
    #[doc = include_str!("../../../book/src/coverage.md")]
    mod ch5_coverage {}
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    mod ch6_montecarlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod ch7_cli {}
}
