//! Cross-engine checks: analytic association, coverage and rate against the
//! Monte Carlo engine on one scenario.

use std::fmt;

use hetnet_coop::analysis::{AnalyticSettings, CoverageModel};
use hetnet_coop::association::{assoc_prob_sbs_cluster, assoc_prob_sbs_single, AssociationEvent};
use hetnet_coop::mcsim::{coverage_from_outcomes, rate_from_sinrs, simulate, McSettings, MetricResult};
use hetnet_coop::model::{db_to_linear, Mode, Scenario};

use crate::sweep::{Engine, Metric, Row, RATE_ABS_TOL};
use crate::CliError;

/// Thresholds of the coverage checks, in dB.
pub const COVERAGE_THRESHOLDS_DB: [f64; 3] = [-5.0, 0.0, 5.0];
/// Largest accepted absolute coverage difference.
pub const COVERAGE_TOLERANCE: f64 = 0.03;
/// Association tolerance in binomial standard errors.
pub const ASSOCIATION_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub mc: McSettings,
    /// Test seam: antennas added to both tiers of the analytic scenario only,
    /// which shifts its `Δ` away from the simulated one.
    pub analytic_delta_offset: u32,
}

impl ValidateOptions {
    pub fn new(mc: McSettings) -> Self {
        ValidateOptions {
            mc,
            analytic_delta_offset: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub metric: Metric,
    pub mode: Mode,
    pub threshold_db: Option<f64>,
    pub analytic: f64,
    pub mc: MetricResult,
    pub tolerance: f64,
}

impl Check {
    pub fn delta(&self) -> f64 {
        (self.analytic - self.mc.value).abs()
    }

    pub fn passed(&self) -> bool {
        self.delta() <= self.tolerance
    }

    pub fn name(&self) -> String {
        match self.threshold_db {
            Some(t) => format!("{}/{}@{t}dB", self.metric.name(), self.mode.name()),
            None => format!("{}/{}", self.metric.name(), self.mode.name()),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} analytic={:.5} mc={:.5}±{:.5} delta={:.5} tol={:.5}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name(),
            self.analytic,
            self.mc.value,
            self.mc.ci_halfwidth,
            self.delta(),
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub seed: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Two rows per check, analytic then Monte Carlo.
    pub fn rows(&self) -> Vec<Row> {
        let mut rows = Vec::with_capacity(2 * self.checks.len());
        for c in &self.checks {
            let (var, value) = match c.threshold_db {
                Some(t) => ("threshold_db", Some(t)),
                None => ("none", None),
            };
            for (engine, result) in [(Engine::Analytic, MetricResult::analytic(c.analytic)), (Engine::Mc, c.mc)] {
                rows.push(Row {
                    sweep_variable: var.to_string(),
                    value,
                    strategy: "config".to_string(),
                    mode: c.mode,
                    engine,
                    metric: c.metric,
                    result: Some(result),
                    seed: self.seed,
                    error: None,
                });
            }
        }
        rows
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

fn to_cli(e: hetnet_coop::Error) -> CliError {
    CliError::Engine(e.to_string())
}

pub fn validate(sc: &Scenario, opts: &ValidateOptions) -> Result<Report, CliError> {
    let mut analytic_sc = sc.clone();
    analytic_sc.macro_tier.antennas += opts.analytic_delta_offset;
    analytic_sc.small_tier.antennas += opts.analytic_delta_offset;
    let model = CoverageModel::new(&analytic_sc, AnalyticSettings::default()).map_err(to_cli)?;
    let samples = simulate(sc, &opts.mc).map_err(to_cli)?;
    let mut checks = Vec::new();

    for mode in Mode::ALL {
        let analytic = match mode {
            Mode::NonCooperative => assoc_prob_sbs_single(&analytic_sc),
            Mode::Cooperative => assoc_prob_sbs_cluster(&analytic_sc),
        }
        .map_err(to_cli)?;
        let (_, small_event) = AssociationEvent::pair(mode);
        let outcomes = samples.outcomes(mode);
        let hits = outcomes.iter().filter(|o| o.event == small_event).count();
        let mc = MetricResult::proportion(hits, outcomes.len());
        let se = mc.standard_error().max(1.0 / outcomes.len() as f64);
        checks.push(Check {
            metric: Metric::Association,
            mode,
            threshold_db: None,
            analytic,
            mc,
            tolerance: ASSOCIATION_SIGMAS * se,
        });
    }

    for mode in Mode::ALL {
        for t_db in COVERAGE_THRESHOLDS_DB {
            let t = db_to_linear(t_db);
            checks.push(Check {
                metric: Metric::Coverage,
                mode,
                threshold_db: Some(t_db),
                analytic: model.overall(mode, t).map_err(to_cli)?,
                mc: coverage_from_outcomes(samples.outcomes(mode), t),
                tolerance: COVERAGE_TOLERANCE,
            });
        }
    }

    for mode in Mode::ALL {
        let sinrs: Vec<f64> = samples.outcomes(mode).iter().map(|o| o.sinr).collect();
        let mc = rate_from_sinrs(&sinrs);
        checks.push(Check {
            metric: Metric::Rate,
            mode,
            threshold_db: None,
            analytic: model.rate_breakdown(mode, RATE_ABS_TOL).map_err(to_cli)?.overall,
            mc,
            tolerance: mc.ci_halfwidth,
        });
    }

    Ok(Report {
        checks,
        seed: opts.mc.master_seed,
    })
}
