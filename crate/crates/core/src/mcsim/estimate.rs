//! Seeded, schedule-independent Monte Carlo estimators.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(master_seed)` switched to
//! stream `i`, and per-trial results are collected in trial order before any
//! reduction, so the worker count never changes a result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ppp::{Window, WindowSpec};
use super::trial::{sample_points, NetworkRealization, TrialOutcome};
use crate::association::AssociationEvent;
use crate::error::{invalid, Error, Result};
use crate::model::{Mode, Scenario};

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Which engine produced a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    #[serde(rename = "mc")]
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "mc",
        }
    }
}

/// A coverage or rate estimate with its 95% confidence half-width (zero for
/// analytic values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub value: f64,
    pub ci_halfwidth: f64,
    pub method: Method,
    /// Number of Monte Carlo trials; zero for analytic values.
    pub trials: usize,
}

impl MetricResult {
    pub fn analytic(value: f64) -> Self {
        MetricResult {
            value,
            ci_halfwidth: 0.0,
            method: Method::Analytic,
            trials: 0,
        }
    }

    /// Proportion estimate with a normal-approximation binomial interval.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        let p = successes as f64 / trials as f64;
        MetricResult {
            value: p,
            ci_halfwidth: Z_95 * (p * (1.0 - p) / trials as f64).sqrt(),
            method: Method::MonteCarlo,
            trials,
        }
    }

    /// Binomial standard error of a proportion estimate.
    pub fn standard_error(&self) -> f64 {
        self.ci_halfwidth / Z_95
    }
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: usize,
    pub master_seed: u64,
    /// Worker threads; zero uses rayon's default.
    pub workers: usize,
    pub window: WindowSpec,
}

impl McSettings {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        McSettings {
            trials,
            master_seed,
            workers: 0,
            window: WindowSpec::default(),
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_window(mut self, window: WindowSpec) -> Self {
        self.window = window;
        self
    }
}

/// The generator used by trial `index`.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs `body` for every trial index and returns the results in trial order.
pub fn run_trials<T, F>(settings: &McSettings, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    if settings.trials == 0 {
        return Err(invalid("trials", "at least one trial is required"));
    }
    let seed = settings.master_seed;
    let work = || {
        (0..settings.trials as u64)
            .into_par_iter()
            .map(|i| body(&mut trial_rng(seed, i)))
            .collect::<Result<Vec<T>>>()
    };
    if settings.workers == 0 {
        return work();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(work)
}

/// Outcomes of both modes on common realizations.
#[derive(Debug, Clone)]
pub struct McSamples {
    pub noncooperative: Vec<TrialOutcome>,
    pub cooperative: Vec<TrialOutcome>,
    /// Realizations redrawn because a tier was too sparse.
    pub resampled: u64,
    pub window: Window,
}

impl McSamples {
    pub fn outcomes(&self, mode: Mode) -> &[TrialOutcome] {
        match mode {
            Mode::NonCooperative => &self.noncooperative,
            Mode::Cooperative => &self.cooperative,
        }
    }
}

/// Simulates `settings.trials` realizations and evaluates both modes on each.
pub fn simulate(sc: &Scenario, settings: &McSettings) -> Result<McSamples> {
    sc.validate()?;
    let window = settings.window.resolve(sc)?;
    let results = run_trials(settings, |rng| {
        let real = NetworkRealization::sample(sc, &window, rng)?;
        Ok((
            real.evaluate(sc, Mode::NonCooperative)?,
            real.evaluate(sc, Mode::Cooperative)?,
            real.resampled,
        ))
    })?;
    let mut out = McSamples {
        noncooperative: Vec::with_capacity(results.len()),
        cooperative: Vec::with_capacity(results.len()),
        resampled: 0,
        window,
    };
    for (nc, c, r) in results {
        out.noncooperative.push(nc);
        out.cooperative.push(c);
        out.resampled += r as u64;
    }
    Ok(out)
}

/// Fraction of outcomes with SINR strictly above `threshold`.
pub fn coverage_from_outcomes(outcomes: &[TrialOutcome], threshold: f64) -> MetricResult {
    let hits = outcomes.iter().filter(|o| o.sinr > threshold).count();
    MetricResult::proportion(hits, outcomes.len())
}

/// Coverage among the outcomes where `event` occurred; `None` if it never did.
pub fn conditional_coverage_from_outcomes(
    outcomes: &[TrialOutcome],
    event: AssociationEvent,
    threshold: f64,
) -> Option<MetricResult> {
    let n = outcomes.iter().filter(|o| o.event == event).count();
    if n == 0 {
        return None;
    }
    let hits = outcomes
        .iter()
        .filter(|o| o.event == event && o.sinr > threshold)
        .count();
    Some(MetricResult::proportion(hits, n))
}

/// Mean of `log2(1 + SINR)` with a 95% interval from the sample standard error.
pub fn rate_from_sinrs(sinrs: &[f64]) -> MetricResult {
    let n = sinrs.len();
    let rates: Vec<f64> = sinrs.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
    let mean = rates.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    MetricResult {
        value: mean,
        ci_halfwidth: Z_95 * (var / n as f64).sqrt(),
        method: Method::MonteCarlo,
        trials: n,
    }
}

pub fn empirical_coverage(
    sc: &Scenario,
    mode: Mode,
    threshold: f64,
    settings: &McSettings,
) -> Result<MetricResult> {
    Ok(empirical_coverage_curve(sc, mode, &[threshold], settings)?[0])
}

/// Coverage at several thresholds from one set of trials.
pub fn empirical_coverage_curve(
    sc: &Scenario,
    mode: Mode,
    thresholds: &[f64],
    settings: &McSettings,
) -> Result<Vec<MetricResult>> {
    let samples = simulate(sc, settings)?;
    Ok(thresholds
        .iter()
        .map(|&t| coverage_from_outcomes(samples.outcomes(mode), t))
        .collect())
}

pub fn empirical_rate(sc: &Scenario, mode: Mode, settings: &McSettings) -> Result<MetricResult> {
    let samples = simulate(sc, settings)?;
    let sinrs: Vec<f64> = samples.outcomes(mode).iter().map(|o| o.sinr).collect();
    Ok(rate_from_sinrs(&sinrs))
}

/// Empirical association frequencies of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationFrequencies {
    pub mode: Mode,
    /// Fraction of trials served by a small cell or the cluster.
    pub small: MetricResult,
    pub resampled: u64,
}

impl AssociationFrequencies {
    pub fn macro_fraction(&self) -> f64 {
        1.0 - self.small.value
    }
}

/// Counts association events without drawing any fading.
pub fn empirical_association(
    sc: &Scenario,
    mode: Mode,
    settings: &McSettings,
) -> Result<AssociationFrequencies> {
    sc.validate()?;
    let window = settings.window.resolve(sc)?;
    let k = match mode {
        Mode::NonCooperative => 1,
        Mode::Cooperative => sc.cluster_size,
    };
    let macro_gain = sc.macro_derived().selection_weight() * sc.macro_tier.power;
    let small_gain = sc.small_derived().selection_weight() * sc.small_tier.power;
    let results = run_trials(settings, |rng| {
        let (m, mut s, resampled) = sample_points(sc, &window, rng)?;
        let rm = m.iter().map(|p| p.distance).fold(f64::INFINITY, f64::min);
        let nearest = if s.len() > k {
            s.select_nth_unstable_by(k - 1, |a, b| a.distance.total_cmp(&b.distance)).0.len() + 1
        } else {
            s.len()
        };
        let small: f64 = s[..nearest]
            .iter()
            .map(|p| small_gain * p.distance.powf(-sc.small_tier.pathloss))
            .sum();
        let small_serves = small > macro_gain * rm.powf(-sc.macro_tier.pathloss);
        Ok((small_serves, resampled))
    })?;
    let hits = results.iter().filter(|r| r.0).count();
    Ok(AssociationFrequencies {
        mode,
        small: MetricResult::proportion(hits, results.len()),
        resampled: results.iter().map(|r| r.1 as u64).sum(),
    })
}
