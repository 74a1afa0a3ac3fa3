//! Conditional and overall coverage probabilities.
//!
//! Every event is integrated in its normalized distance coordinate, where the
//! distance density becomes `e^-x`. The per-distance kernel is the Gamma tail
//! `P(h > s (I + N))` expressed through derivatives of the interference
//! transform (see [`gamma_tail_kernel`]).

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::laplace::{gamma_tail_kernel, LaplaceContext};
use crate::association::{
    assoc_prob_sbs_cluster_with, exclusion_radius, integrate_ordered_cone, single_closed_form,
    AssociationEvent, ClusterIntegration, ClusterLossProbability,
};
use crate::error::{invalid, Error, Result};
use crate::model::{hat_ratios_unchecked, HatRatios, Mode, Scenario};
use crate::quad::{integrate, integrate_log_scale, Tolerance};
use crate::specfun::{beta, sample_gamma, MAX_ORDER};

const X_MAX: f64 = 40.0;
/// Lower cut of the normalized distance; the mass below it is at most 1e-14.
const X_MIN: f64 = 1e-14;
const NEGATIVE_CLAMP: f64 = -1e-8;
/// Below this relative gap between the two link gains the hypoexponential
/// form loses digits to cancellation and the mixing integral is used instead.
const HYPOEXP_MIN_GAP: f64 = 1e-3;

/// How the cluster-served coverage kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterKernel {
    /// Exact tail of the non-coherent sum `Σ p_s h_i r_i^-α`, `h_i ~ Gamma(Δ_s)`,
    /// written as a Gamma(KΔ_s) variable scaled by a Dirichlet mixture of the
    /// link gains.
    #[default]
    Exact,
    /// Single Gamma(Δ_m) tail with `s = T / Σ p̂ Δ̂ B̂ r_i^-α`, a literal
    /// reading of the closed form. Kept for comparison only; it is not
    /// dimensionally consistent unless `p_m = 1`.
    AsPrinted,
}

/// Numerical settings of the analytic engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSettings {
    /// Absolute tolerance of the outer distance integrals.
    pub abs_tol: f64,
    pub cluster: ClusterIntegration,
    pub cluster_kernel: ClusterKernel,
}

impl Default for AnalyticSettings {
    fn default() -> Self {
        AnalyticSettings {
            abs_tol: 1e-5,
            cluster: ClusterIntegration::default(),
            cluster_kernel: ClusterKernel::Exact,
        }
    }
}

impl AnalyticSettings {
    pub fn with_cluster_kernel(mut self, kernel: ClusterKernel) -> Self {
        self.cluster_kernel = kernel;
        self
    }
}

/// Coverage split by association event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBreakdown {
    pub mode: Mode,
    /// Probability of the small-cell-served event.
    pub small_assoc: f64,
    /// Coverage conditioned on macro service.
    pub macro_conditional: f64,
    /// Coverage conditioned on small-cell (or cluster) service.
    pub small_conditional: f64,
    pub overall: f64,
}

/// Scenario-level quantities shared by every threshold.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    scenario: Scenario,
    settings: AnalyticSettings,
    hats: HatRatios,
    alpha: f64,
    single_assoc: f64,
    cluster_assoc: f64,
    loss: ClusterLossProbability,
}

impl CoverageModel {
    pub fn new(scenario: &Scenario, settings: AnalyticSettings) -> Result<Self> {
        scenario.validate()?;
        if scenario.macro_tier.pathloss != scenario.small_tier.pathloss {
            return Err(Error::Unsupported(
                "the analytic engine requires both tiers to share one path-loss exponent".into(),
            ));
        }
        let alpha = scenario.alpha();
        let hats = hat_ratios_unchecked(scenario);
        let k_delta = scenario.cluster_size * scenario.small_derived().delta as usize;
        if k_delta > MAX_ORDER + 1 || scenario.macro_derived().delta as usize > MAX_ORDER + 1 {
            return Err(Error::OrderTooLarge {
                order: k_delta.max(scenario.macro_derived().delta as usize) - 1,
                max: MAX_ORDER,
            });
        }
        Ok(CoverageModel {
            scenario: scenario.clone(),
            settings,
            hats,
            alpha,
            single_assoc: single_closed_form(&hats, alpha),
            cluster_assoc: assoc_prob_sbs_cluster_with(scenario, &settings.cluster)?,
            loss: ClusterLossProbability::new(scenario, &settings.cluster)?,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Probability of the small-cell-served event of `mode`.
    pub fn small_assoc(&self, mode: Mode) -> f64 {
        match mode {
            Mode::NonCooperative => self.single_assoc,
            Mode::Cooperative => self.cluster_assoc,
        }
    }

    pub fn event_probability(&self, event: AssociationEvent) -> f64 {
        let a = self.small_assoc(event.mode());
        if event.is_macro() {
            1.0 - a
        } else {
            a
        }
    }

    /// `P(event and SINR > T)`.
    pub fn joint(&self, event: AssociationEvent, threshold: f64) -> Result<f64> {
        check_threshold(threshold)?;
        let v = match event {
            AssociationEvent::MacroNonCoop => self.joint_single(true, threshold)?,
            AssociationEvent::SmallNonCoop => self.joint_single(false, threshold)?,
            AssociationEvent::MacroCoop => self.joint_macro_coop(threshold)?,
            AssociationEvent::Cluster => self.joint_cluster(threshold)?,
        };
        clamp_probability(v)
    }

    /// `P(SINR > T | event)`.
    pub fn conditional(&self, event: AssociationEvent, threshold: f64) -> Result<f64> {
        let p = self.event_probability(event);
        if p <= 0.0 {
            return Err(invalid("event", format!("{} has zero probability", event.label())));
        }
        clamp_probability(self.joint(event, threshold)? / p)
    }

    pub fn breakdown(&self, mode: Mode, threshold: f64) -> Result<CoverageBreakdown> {
        let (m, s) = AssociationEvent::pair(mode);
        let a = self.small_assoc(mode);
        let jm = self.joint(m, threshold)?;
        let js = self.joint(s, threshold)?;
        let cond = |j: f64, p: f64| if p > 0.0 { (j / p).clamp(0.0, 1.0) } else { 0.0 };
        Ok(CoverageBreakdown {
            mode,
            small_assoc: a,
            macro_conditional: cond(jm, 1.0 - a),
            small_conditional: cond(js, a),
            overall: (jm + js).clamp(0.0, 1.0),
        })
    }

    pub fn overall(&self, mode: Mode, threshold: f64) -> Result<f64> {
        Ok(self.breakdown(mode, threshold)?.overall)
    }

    /// Noncooperative events: the serving distance `r` has density
    /// `2πλ_j r e^(-π c r²)`; with `x = π c r²` the measure is `(λ_j / c) e^-x dx`.
    fn joint_single(&self, macro_serves: bool, threshold: f64) -> Result<f64> {
        let sc = &self.scenario;
        let delta = 2.0 / self.alpha;
        let beta = self.hats.beta;
        let (lambda, c, tier, shape) = if macro_serves {
            (
                sc.macro_tier.density,
                sc.macro_tier.density + sc.small_tier.density * beta.powf(-delta),
                &sc.macro_tier,
                sc.macro_derived().delta,
            )
        } else {
            (
                sc.small_tier.density,
                sc.small_tier.density + sc.macro_tier.density * beta.powf(delta),
                &sc.small_tier,
                sc.small_derived().delta,
            )
        };
        let ratio = beta.powf(1.0 / self.alpha);
        let est = integrate_log_scale(
            |x| {
                let r = (x / (PI * c)).sqrt();
                let s = threshold * r.powf(self.alpha) / tier.power;
                let (dm, ds) = if macro_serves { (r, r / ratio) } else { (r * ratio, r) };
                let ctx = LaplaceContext::new(sc, s, dm, ds)?;
                Ok((-x).exp() * gamma_tail_kernel(&ctx, shape)?)
            },
            X_MIN,
            X_MAX,
            self.outer_tol(),
            "noncooperative coverage integral",
        )?;
        Ok(lambda / c * est.value)
    }

    fn joint_macro_coop(&self, threshold: f64) -> Result<f64> {
        let sc = &self.scenario;
        let lambda_m = sc.macro_tier.density;
        let ratio = self.hats.beta.powf(1.0 / self.alpha);
        let shape = sc.macro_derived().delta;
        let est = integrate_log_scale(
            |x| {
                let rho = (x / (PI * lambda_m)).sqrt();
                let q = self.loss.eval(rho)?;
                if q == 0.0 {
                    return Ok(0.0);
                }
                let s = threshold * rho.powf(self.alpha) / sc.macro_tier.power;
                let ctx = LaplaceContext::new(sc, s, rho, rho / ratio)?;
                Ok((-x).exp() * q * gamma_tail_kernel(&ctx, shape)?)
            },
            X_MIN,
            X_MAX,
            self.outer_tol(),
            "macro coverage integral (cooperative)",
        )?;
        Ok(est.value)
    }

    fn joint_cluster(&self, threshold: f64) -> Result<f64> {
        let sc = &self.scenario;
        let k = sc.cluster_size;
        let lambda_m = sc.macro_tier.density;
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.cluster.seed ^ 0xd1e1_c4e7);
        let cfg = ClusterIntegration {
            abs_tol: self.settings.abs_tol,
            ..self.settings.cluster
        };
        integrate_ordered_cone(
            sc.small_tier.density,
            k,
            |r| {
                let d_m = exclusion_radius(&self.hats, self.alpha, r);
                let weight = (-PI * lambda_m * d_m * d_m).exp();
                if weight == 0.0 {
                    return Ok(0.0);
                }
                let kernel = match self.settings.cluster_kernel {
                    ClusterKernel::Exact => self.cluster_kernel_exact(r, d_m, threshold, &mut rng)?,
                    ClusterKernel::AsPrinted => self.cluster_kernel_printed(r, d_m, threshold)?,
                };
                Ok(weight * kernel)
            },
            &cfg,
        )
    }

    /// `P(Σ a_i h_i > T (I + N))` with `a_i = p_s r_i^-α`.
    fn cluster_kernel_exact(
        &self,
        r: &[f64],
        d_m: f64,
        threshold: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let sc = &self.scenario;
        let d_s = r[r.len() - 1];
        let shape = sc.small_derived().delta;
        let gains: Vec<f64> = r
            .iter()
            .map(|&x| sc.small_tier.power * x.powf(-self.alpha))
            .collect();
        let tail = |mix: f64, terms: u32| -> Result<f64> {
            let ctx = LaplaceContext::new(sc, threshold / mix, d_m, d_s)?;
            gamma_tail_kernel(&ctx, terms)
        };
        match gains.len() {
            1 => tail(gains[0], shape),
            2 if shape == 1 && gains[0] - gains[1] > HYPOEXP_MIN_GAP * gains[0] => {
                // Two exponential links: the sum is hypoexponential, so
                // P(S > z) = (a1 e^(-z/a1) - a2 e^(-z/a2)) / (a1 - a2).
                let (a1, a2) = (gains[0], gains[1]);
                Ok((a1 * tail(a1, 1)? - a2 * tail(a2, 1)?) / (a1 - a2))
            }
            2 => {
                let total = 2 * shape;
                let norm = 1.0 / beta(shape as f64, shape as f64);
                let e = shape as i32 - 1;
                let est = integrate(
                    |u| {
                        let dens = norm * (u * (1.0 - u)).powi(e);
                        if dens == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(dens * tail(gains[0] * u + gains[1] * (1.0 - u), total)?)
                    },
                    0.0,
                    1.0,
                    Tolerance::new(0.1 * self.settings.abs_tol, 1e-9),
                    "cluster mixing integral",
                )?;
                Ok(est.value)
            }
            k => {
                // One Dirichlet(Δ_s, ..., Δ_s) draw per outer sample keeps the
                // sampled estimator unbiased.
                let w: Vec<f64> = (0..k).map(|_| sample_gamma(shape, rng)).collect();
                let sum: f64 = w.iter().sum();
                let mix: f64 = w.iter().zip(&gains).map(|(wi, g)| wi * g).sum::<f64>() / sum;
                tail(mix, k as u32 * shape)
            }
        }
    }

    fn cluster_kernel_printed(&self, r: &[f64], d_m: f64, threshold: f64) -> Result<f64> {
        let sc = &self.scenario;
        let sum: f64 = r.iter().map(|&x| x.powf(-self.alpha)).sum();
        let s = threshold / (self.hats.biased_power_ratio() * sum);
        let ctx = LaplaceContext::new(sc, s, d_m, r[r.len() - 1])?;
        gamma_tail_kernel(&ctx, sc.macro_derived().delta)
    }

    fn outer_tol(&self) -> Tolerance {
        Tolerance::new(self.settings.abs_tol, 1e-9).with_max_intervals(2000)
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid("threshold", format!("must be positive and finite, got {t}")));
    }
    Ok(())
}

fn clamp_probability(v: f64) -> Result<f64> {
    if v < NEGATIVE_CLAMP {
        return Err(Error::NegativeProbability { value: v });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// `P(SINR > T | event)`.
pub fn coverage_conditional(event: AssociationEvent, sc: &Scenario, threshold: f64) -> Result<f64> {
    CoverageModel::new(sc, AnalyticSettings::default())?.conditional(event, threshold)
}

/// `(1 - A) P_macro + A P_small` for the association probability `A` of `mode`.
pub fn coverage_overall(mode: Mode, sc: &Scenario, threshold: f64) -> Result<f64> {
    CoverageModel::new(sc, AnalyticSettings::default())?.overall(mode, threshold)
}
