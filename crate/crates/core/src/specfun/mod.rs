//! Special functions and combinatorics used by the analytic engine.

mod beta;
mod gamma;
mod partitions;

pub use beta::{beta, comp_inc_beta, comp_inc_beta_tol, DEFAULT_BETA_TOL};
pub use gamma::{gamma_ccdf, sample_gamma};
pub use partitions::{
    complete_bell, faa_coefficient, faa_di_bruno, integer_partitions, partitions, Partition,
    MAX_ORDER,
};
