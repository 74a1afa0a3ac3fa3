//! Parameter sweeps over both engines.

use std::fmt;
use std::str::FromStr;

use hetnet_coop::analysis::{AnalyticSettings, CoverageModel};
use hetnet_coop::mcsim::{coverage_from_outcomes, rate_from_sinrs, simulate, McSamples, McSettings, MetricResult};
use hetnet_coop::model::{db_to_linear, dbm_to_watts, Mode, Scenario, Strategy};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Analytic rate tolerance used by sweeps.
pub const RATE_ABS_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    ThresholdDb,
    BiasRatio,
    DensityRatio,
    PowerMacroDbm,
}

impl Variable {
    pub const ALL: [Variable; 4] = [
        Variable::ThresholdDb,
        Variable::BiasRatio,
        Variable::DensityRatio,
        Variable::PowerMacroDbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variable::ThresholdDb => "threshold_db",
            Variable::BiasRatio => "bias_ratio",
            Variable::DensityRatio => "density_ratio",
            Variable::PowerMacroDbm => "power_macro_dbm",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Variable::ThresholdDb => vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            Variable::BiasRatio => vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
            Variable::DensityRatio => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            Variable::PowerMacroDbm => vec![35.0, 40.0, 45.0, 50.0, 55.0],
        }
    }

    /// The scenario at grid value `v`; thresholds leave it unchanged.
    pub fn apply(self, sc: &Scenario, v: f64) -> Scenario {
        match self {
            Variable::ThresholdDb => sc.clone(),
            Variable::BiasRatio => sc.clone().with_bias_ratio(v),
            Variable::DensityRatio => sc.clone().with_density_ratio(v),
            Variable::PowerMacroDbm => {
                let mut out = sc.clone();
                out.macro_tier.power = dbm_to_watts(v);
                out
            }
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Variable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown sweep variable `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Mc,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Mc => "mc",
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" => Ok(Engine::Mc),
            _ => Err(format!("unknown engine `{s}` (expected analytic or mc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Coverage,
    Rate,
    Association,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::Rate => "rate",
            Metric::Association => "association",
        }
    }
}

/// One sweep: every grid value crossed with every strategy, mode and engine.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: Variable,
    pub grid: Vec<f64>,
    pub metric: Metric,
    pub strategies: Vec<Strategy>,
    pub modes: Vec<Mode>,
    pub engines: Vec<Engine>,
    /// Threshold used when the swept variable is not the threshold.
    pub threshold_db: f64,
    pub mc: McSettings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: &str| Err(CliError::Config(m.to_string()));
        if self.grid.is_empty() {
            return fail("grid must not be empty");
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return fail("grid values must be finite");
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("grid must be strictly increasing");
        }
        if self.strategies.is_empty() {
            return fail("at least one strategy is required");
        }
        if self.modes.is_empty() {
            return fail("at least one mode is required");
        }
        if self.engines.is_empty() {
            return fail("at least one engine is required");
        }
        if self.engines.contains(&Engine::Mc) && self.mc.trials == 0 {
            return fail("trials must be at least 1");
        }
        if !matches!(self.metric, Metric::Coverage | Metric::Rate) {
            return fail("sweeps report coverage or rate");
        }
        Ok(())
    }
}

/// One output line of the fixed CSV schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_variable: String,
    /// Empty for rows that belong to no grid point.
    pub value: Option<f64>,
    pub strategy: String,
    pub mode: Mode,
    pub engine: Engine,
    pub metric: Metric,
    pub result: Option<MetricResult>,
    pub seed: u64,
    pub error: Option<String>,
}

type CellResult = Result<MetricResult, String>;

/// Runs a validated sweep. Failed cells carry their message in the error
/// column and do not stop the sweep.
pub fn run_sweep(spec: &SweepSpec, base: &Scenario) -> Result<Vec<Row>, CliError> {
    spec.validate()?;
    let mut rows = Vec::new();
    let threshold_sweep = spec.variable == Variable::ThresholdDb;
    for &strategy in &spec.strategies {
        let strat_sc = strategy.apply(base);
        // A threshold sweep reuses one analytic model and one MC run per strategy.
        let mut shared: Option<Engines> = None;
        let mut cells: Vec<Vec<Row>> = Vec::with_capacity(spec.grid.len());
        for &v in &spec.grid {
            let sc = spec.variable.apply(&strat_sc, v);
            let threshold_db = if threshold_sweep { v } else { spec.threshold_db };
            let mut local;
            let engines = if threshold_sweep {
                shared.get_or_insert_with(|| Engines::new(&sc, spec))
            } else {
                local = Engines::new(&sc, spec);
                &mut local
            };
            let mut cell = Vec::new();
            for &mode in &spec.modes {
                for &engine in &spec.engines {
                    let res = engines.evaluate(engine, mode, spec.metric, db_to_linear(threshold_db));
                    cell.push(Row {
                        sweep_variable: spec.variable.name().to_string(),
                        value: Some(v),
                        strategy: strategy.name().to_string(),
                        mode,
                        engine,
                        metric: spec.metric,
                        seed: spec.mc.master_seed,
                        result: res.as_ref().ok().copied(),
                        error: res.err(),
                    });
                }
            }
            cells.push(cell);
        }
        rows.push(cells);
    }
    // Row order: grid value, then strategy, then mode, then engine.
    let mut out = Vec::new();
    for i in 0..spec.grid.len() {
        for per_strategy in &rows {
            out.extend(per_strategy[i].iter().cloned());
        }
    }
    Ok(out)
}

/// Lazily built engine state for one scenario.
struct Engines<'a> {
    sc: Scenario,
    spec: &'a SweepSpec,
    model: Option<Result<CoverageModel, String>>,
    samples: Option<Result<McSamples, String>>,
    rates: Vec<((Engine, Mode), CellResult)>,
}

impl<'a> Engines<'a> {
    fn new(sc: &Scenario, spec: &'a SweepSpec) -> Self {
        Engines {
            sc: sc.clone(),
            spec,
            model: None,
            samples: None,
            rates: Vec::new(),
        }
    }

    fn model(&mut self) -> Result<&CoverageModel, String> {
        let sc = &self.sc;
        self.model
            .get_or_insert_with(|| CoverageModel::new(sc, AnalyticSettings::default()).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn samples(&mut self) -> Result<&McSamples, String> {
        let (sc, mc) = (&self.sc, &self.spec.mc);
        self.samples
            .get_or_insert_with(|| simulate(sc, mc).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn evaluate(&mut self, engine: Engine, mode: Mode, metric: Metric, threshold: f64) -> CellResult {
        match metric {
            Metric::Coverage => self.coverage(engine, mode, threshold),
            _ => {
                if let Some((_, r)) = self.rates.iter().find(|(k, _)| *k == (engine, mode)) {
                    return r.clone();
                }
                let r = self.rate(engine, mode);
                self.rates.push(((engine, mode), r.clone()));
                r
            }
        }
    }

    fn coverage(&mut self, engine: Engine, mode: Mode, threshold: f64) -> CellResult {
        match engine {
            Engine::Analytic => {
                let v = self.model()?.overall(mode, threshold).map_err(|e| e.to_string())?;
                Ok(MetricResult::analytic(v))
            }
            Engine::Mc => Ok(coverage_from_outcomes(self.samples()?.outcomes(mode), threshold)),
        }
    }

    fn rate(&mut self, engine: Engine, mode: Mode) -> CellResult {
        match engine {
            Engine::Analytic => {
                let r = self.model()?.rate_breakdown(mode, RATE_ABS_TOL).map_err(|e| e.to_string())?;
                Ok(MetricResult::analytic(r.overall))
            }
            Engine::Mc => {
                let sinrs: Vec<f64> = self.samples()?.outcomes(mode).iter().map(|o| o.sinr).collect();
                Ok(rate_from_sinrs(&sinrs))
            }
        }
    }
}
