//! Biased cell selection, exclusion radii, association probabilities and the
//! serving-distance distributions of the four association events.
//!
//! Distances to small cells are handled in the normalized coordinates
//! `x_i = π λ_s r_i²`, in which the joint density of the `K` nearest points is
//! `e^(-x_K)` on the ordered cone `0 < x_1 < ... < x_K`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand::seq::SliceRandom;

use crate::error::{invalid, Error, Result};
use crate::model::{hat_ratios_unchecked, HatRatios, Mode, Scenario};
use crate::quad::{integrate, integrate_log_scale, Tolerance};

/// Upper truncation of the normalized coordinate; `x e^-x` is below 1e-15 there.
const X_MAX: f64 = 40.0;
/// Lower cut of normalized coordinates; the mass below it is at most 1e-14.
const X_MIN: f64 = 1e-14;

/// Which base station(s) serve the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AssociationEvent {
    /// Noncooperative, served by the nearest macro BS.
    MacroNonCoop,
    /// Noncooperative, served by the nearest small BS.
    SmallNonCoop,
    /// Cooperative mode, the macro BS beats the small-cell cluster.
    MacroCoop,
    /// Cooperative mode, served jointly by the `K` nearest small BSs.
    Cluster,
}

impl AssociationEvent {
    pub fn mode(self) -> Mode {
        match self {
            AssociationEvent::MacroNonCoop | AssociationEvent::SmallNonCoop => Mode::NonCooperative,
            AssociationEvent::MacroCoop | AssociationEvent::Cluster => Mode::Cooperative,
        }
    }

    pub fn is_macro(self) -> bool {
        matches!(self, AssociationEvent::MacroNonCoop | AssociationEvent::MacroCoop)
    }

    /// The macro-served and small-served events of a mode.
    pub fn pair(mode: Mode) -> (AssociationEvent, AssociationEvent) {
        match mode {
            Mode::NonCooperative => (AssociationEvent::MacroNonCoop, AssociationEvent::SmallNonCoop),
            Mode::Cooperative => (AssociationEvent::MacroCoop, AssociationEvent::Cluster),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AssociationEvent::MacroNonCoop => "A_m",
            AssociationEvent::SmallNonCoop => "A_s",
            AssociationEvent::MacroCoop => "D_m",
            AssociationEvent::Cluster => "D_s",
        }
    }
}

/// Distances to the nearest small cells, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedDistances {
    r: Vec<f64>,
}

impl OrderedDistances {
    /// Requires positive, finite, nondecreasing distances. Ties are accepted
    /// since they occur in hand-built test geometries.
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.is_empty() {
            return Err(invalid("distances", "at least one distance is required"));
        }
        if r.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
            return Err(invalid("distances", "distances must be positive and finite"));
        }
        if r.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("distances", "distances must be sorted ascending"));
        }
        Ok(OrderedDistances { r })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// The `k` nearest distances.
    pub fn nearest(&self, k: usize) -> &[f64] {
        &self.r[..k.min(self.r.len())]
    }
}

fn require_common_pathloss(sc: &Scenario) -> Result<f64> {
    if sc.macro_tier.pathloss != sc.small_tier.pathloss {
        return Err(Error::Unsupported(
            "the analytic engine requires both tiers to share one path-loss exponent".into(),
        ));
    }
    Ok(sc.alpha())
}

/// Biased average received power `B Δ p r^-α` summed over `distances`.
fn biased_power(tier: &crate::model::TierParams, distances: &[f64]) -> f64 {
    let d = tier.derived();
    let w = d.selection_weight() * tier.power;
    distances.iter().map(|&r| w * r.powf(-tier.pathloss)).sum()
}

/// Picks the serving side by comparing biased average received powers. In
/// cooperative mode the small side sums over the `K` nearest small cells.
/// Ties go to the macro tier.
pub fn select_tier(
    sc: &Scenario,
    mode: Mode,
    r_macro: f64,
    sbs: &OrderedDistances,
) -> Result<AssociationEvent> {
    sc.validate()?;
    if !(r_macro.is_finite() && r_macro > 0.0) {
        return Err(invalid("r_macro", "must be positive and finite"));
    }
    let k = match mode {
        Mode::NonCooperative => 1,
        Mode::Cooperative => {
            if sbs.len() < sc.cluster_size {
                return Err(invalid(
                    "distances",
                    format!("cluster of {} needs that many distances, got {}", sc.cluster_size, sbs.len()),
                ));
            }
            sc.cluster_size
        }
    };
    let macro_side = biased_power(&sc.macro_tier, &[r_macro]);
    let small_side = biased_power(&sc.small_tier, sbs.nearest(k));
    let (m, s) = AssociationEvent::pair(mode);
    Ok(if small_side > macro_side { s } else { m })
}

/// Radius inside which no macro BS may lie when the given small cells serve:
/// `(p̂ Δ̂ B̂ Σ r_i^-α)^(-1/α)`.
pub fn exclusion_radius_mbs(sc: &Scenario, sbs: &OrderedDistances) -> Result<f64> {
    sc.validate()?;
    let alpha = require_common_pathloss(sc)?;
    let h = hat_ratios_unchecked(sc);
    Ok(exclusion_radius(&h, alpha, sbs.as_slice()))
}

pub(crate) fn exclusion_radius(h: &HatRatios, alpha: f64, r: &[f64]) -> f64 {
    let sum: f64 = r.iter().map(|&x| x.powf(-alpha)).sum();
    (h.biased_power_ratio() * sum).powf(-1.0 / alpha)
}

/// Probability that a noncooperative user selects a small cell:
/// `1 / (1 + (1/λ̂) (p̂ Δ̂ B̂)^(-2/α))`.
pub fn assoc_prob_sbs_single(sc: &Scenario) -> Result<f64> {
    sc.validate()?;
    let alpha = require_common_pathloss(sc)?;
    let h = hat_ratios_unchecked(sc);
    Ok(single_closed_form(&h, alpha))
}

pub(crate) fn single_closed_form(h: &HatRatios, alpha: f64) -> f64 {
    1.0 / (1.0 + h.biased_power_ratio().powf(-2.0 / alpha) / h.lambda_hat)
}

/// Joint density of the `K = r.len()` nearest small-cell distances,
/// `(2πλ_s)^K e^(-πλ_s r_K²) Π r_i`.
pub fn ordered_distance_pdf(sc: &Scenario, r: &OrderedDistances) -> f64 {
    ordered_pdf(sc.small_tier.density, r.as_slice())
}

pub(crate) fn ordered_pdf(lambda: f64, r: &[f64]) -> f64 {
    let k = r.len() as i32;
    let last = r[r.len() - 1];
    let prod: f64 = r.iter().product();
    (2.0 * PI * lambda).powi(k) * (-lambda * PI * last * last).exp() * prod
}

/// Numerical settings for integrals over the `K` nearest small cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterIntegration {
    /// Absolute tolerance of the nested quadrature used for `K <= 2`.
    pub abs_tol: f64,
    /// Sample count of the stratified estimator used for `K > 2`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for ClusterIntegration {
    fn default() -> Self {
        ClusterIntegration {
            abs_tol: 1e-7,
            samples: 100_000,
            seed: 0x5eed_c1a5,
        }
    }
}

impl ClusterIntegration {
    pub fn with_tolerance(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Latin-hypercube draws of `K` ordered unit-intensity PPP coordinates
/// (cumulative sums of unit exponentials), flattened row-major.
pub(crate) fn stratified_ordered_coordinates(k: usize, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strata: Vec<Vec<usize>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        strata.push(perm);
    }
    let mut out = vec![0.0; k * n];
    for s in 0..n {
        let mut acc = 0.0;
        for (i, perm) in strata.iter().enumerate() {
            let u = (perm[s] as f64 + rng.random::<f64>()) / n as f64;
            acc -= (1.0 - u).max(f64::MIN_POSITIVE).ln();
            out[s * k + i] = acc;
        }
    }
    out
}

/// Computes `∫ f(r) f_Λ(r) dr` over the ordered cone of the `k` nearest
/// small-cell distances.
pub fn integrate_ordered_cone<F>(
    lambda_s: f64,
    k: usize,
    mut f: F,
    cfg: &ClusterIntegration,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let scale = 1.0 / (PI * lambda_s);
    let to_r = |x: f64| (x * scale).sqrt();
    let tol = Tolerance::new(cfg.abs_tol, 1e-12).with_max_intervals(2000);
    match k {
        0 => Err(invalid("cluster_size", "must be at least 1")),
        1 => Ok(integrate_log_scale(
            |x| Ok((-x).exp() * f(&[to_r(x)])?),
            X_MIN,
            X_MAX,
            tol,
            "single small-cell distance integral",
        )?
        .value),
        2 => {
            let mut buf = [0.0; 2];
            Ok(integrate_log_scale(
                |x2| {
                    let w = x2 * (-x2).exp();
                    if w == 0.0 {
                        return Ok(0.0);
                    }
                    let r2 = to_r(x2);
                    let inner = integrate_log_scale(
                        |v| {
                            buf[0] = to_r(v * x2);
                            buf[1] = r2;
                            f(&buf)
                        },
                        X_MIN,
                        1.0,
                        tol,
                        "ordered pair inner integral",
                    )?;
                    Ok(w * inner.value)
                },
                X_MIN,
                X_MAX,
                tol,
                "ordered pair outer integral",
            )?
            .value)
        }
        _ => {
            let n = cfg.samples.max(1);
            let coords = stratified_ordered_coordinates(k, n, cfg.seed);
            let mut r = vec![0.0; k];
            let mut total = 0.0;
            for s in 0..n {
                for i in 0..k {
                    r[i] = to_r(coords[s * k + i]).max(f64::MIN_POSITIVE);
                }
                total += f(&r)?;
            }
            Ok(total / n as f64)
        }
    }
}

/// Probability that the cooperative user is served by the small-cell cluster:
/// `E[exp(-π λ_m η^(2/α))]` over the `K` nearest small-cell distances.
pub fn assoc_prob_sbs_cluster(sc: &Scenario) -> Result<f64> {
    assoc_prob_sbs_cluster_with(sc, &ClusterIntegration::default())
}

pub fn assoc_prob_sbs_cluster_with(sc: &Scenario, cfg: &ClusterIntegration) -> Result<f64> {
    sc.validate()?;
    let alpha = require_common_pathloss(sc)?;
    let h = hat_ratios_unchecked(sc);
    let lambda_m = sc.macro_tier.density;
    let p = integrate_ordered_cone(
        sc.small_tier.density,
        sc.cluster_size,
        |r| {
            let d = exclusion_radius(&h, alpha, r);
            Ok((-PI * lambda_m * d * d).exp())
        },
        cfg,
    )?;
    Ok(p.clamp(0.0, 1.0))
}

/// `P(Σ_{i<=K} r_i^-α <= β ρ^-α)`: the chance that the `K` nearest small cells
/// lose to a macro BS at distance `ρ`.
#[derive(Debug, Clone)]
pub struct ClusterLossProbability {
    k: usize,
    lambda_s: f64,
    alpha: f64,
    beta: f64,
    /// For `K > 2`: sorted macro distances up to which each stratified sample
    /// loses to the macro BS.
    thresholds: Vec<f64>,
}

impl ClusterLossProbability {
    pub fn new(sc: &Scenario, cfg: &ClusterIntegration) -> Result<Self> {
        sc.validate()?;
        let alpha = require_common_pathloss(sc)?;
        let h = hat_ratios_unchecked(sc);
        let k = sc.cluster_size;
        let lambda_s = sc.small_tier.density;
        let mut thresholds = Vec::new();
        if k > 2 {
            let n = cfg.samples.max(1);
            let coords = stratified_ordered_coordinates(k, n, cfg.seed);
            let scale = 1.0 / (PI * lambda_s);
            thresholds = (0..n)
                .map(|s| {
                    let sum: f64 = (0..k)
                        .map(|i| (coords[s * k + i] * scale).sqrt().powf(-alpha))
                        .sum();
                    (sum / h.beta).powf(-1.0 / alpha)
                })
                .collect();
            thresholds.sort_by(f64::total_cmp);
        }
        Ok(ClusterLossProbability {
            k,
            lambda_s,
            alpha,
            beta: h.beta,
            thresholds,
        })
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Ok(0.0);
        }
        let delta = 2.0 / self.alpha;
        // Normalized coordinate of the single-cell boundary.
        let a = PI * self.lambda_s * (self.beta * rho.powf(-self.alpha)).powf(-delta);
        match self.k {
            1 => Ok((-a).exp()),
            2 => {
                let top = 2f64.powf(delta);
                let half_alpha = self.alpha / 2.0;
                let tail = (-a * top).exp();
                let body = integrate(
                    |y| {
                        let g = 1.0 - y.powf(-half_alpha);
                        if g <= 0.0 {
                            return Ok(0.0);
                        }
                        Ok((-a * g.powf(-delta)).exp())
                    },
                    1.0,
                    top,
                    Tolerance::new(1e-12, 1e-10),
                    "cluster loss probability",
                )?;
                Ok((tail + a * body.value).clamp(0.0, 1.0))
            }
            _ => {
                let n = self.thresholds.len();
                let below = self.thresholds.partition_point(|&t| t < rho);
                Ok((n - below) as f64 / n as f64)
            }
        }
    }
}

/// Serving-distance distribution of one association event.
#[derive(Debug, Clone)]
pub enum ServingDistancePdf {
    /// One-dimensional density `c r e^(-a r²)` with normalizing constants folded in.
    Radial { coef: f64, rate: f64, event: AssociationEvent },
    /// Macro distance `ρ` under `D_m`: `2πλ_m ρ e^(-πλ_m ρ²) Q(ρ) / (1 - A_cl)`.
    MacroCoop {
        lambda_m: f64,
        loss: ClusterLossProbability,
        macro_prob: f64,
    },
    /// Joint density of the cluster distances under `D_s`.
    Cluster {
        lambda_m: f64,
        lambda_s: f64,
        hats: HatRatios,
        alpha: f64,
        cluster_prob: f64,
    },
}

impl ServingDistancePdf {
    pub fn event(&self) -> AssociationEvent {
        match self {
            ServingDistancePdf::Radial { event, .. } => *event,
            ServingDistancePdf::MacroCoop { .. } => AssociationEvent::MacroCoop,
            ServingDistancePdf::Cluster { .. } => AssociationEvent::Cluster,
        }
    }

    /// Density of a scalar serving distance; errors for the cluster event.
    pub fn density(&self, r: f64) -> Result<f64> {
        if r <= 0.0 {
            return Ok(0.0);
        }
        match self {
            ServingDistancePdf::Radial { coef, rate, .. } => Ok(coef * r * (-rate * r * r).exp()),
            ServingDistancePdf::MacroCoop {
                lambda_m,
                loss,
                macro_prob,
            } => {
                let base = 2.0 * PI * lambda_m * r * (-PI * lambda_m * r * r).exp();
                Ok(base * loss.eval(r)? / macro_prob)
            }
            ServingDistancePdf::Cluster { .. } => Err(Error::EventMismatch {
                event: "D_s",
                expected: "scalar serving distance",
            }),
        }
    }

    /// Joint density of the ordered cluster distances under `D_s`.
    pub fn joint_density(&self, r: &OrderedDistances) -> Result<f64> {
        match self {
            ServingDistancePdf::Cluster {
                lambda_m,
                lambda_s,
                hats,
                alpha,
                cluster_prob,
            } => {
                let d = exclusion_radius(hats, *alpha, r.as_slice());
                Ok((-PI * lambda_m * d * d).exp() * ordered_pdf(*lambda_s, r.as_slice()) / cluster_prob)
            }
            other => Err(Error::EventMismatch {
                event: other.event().label(),
                expected: "joint cluster distance",
            }),
        }
    }
}

/// Builds the serving-distance distribution of `event` in `sc`.
pub fn serving_distance_pdf(event: AssociationEvent, sc: &Scenario) -> Result<ServingDistancePdf> {
    serving_distance_pdf_with(event, sc, &ClusterIntegration::default())
}

pub fn serving_distance_pdf_with(
    event: AssociationEvent,
    sc: &Scenario,
    cfg: &ClusterIntegration,
) -> Result<ServingDistancePdf> {
    sc.validate()?;
    let alpha = require_common_pathloss(sc)?;
    let h = hat_ratios_unchecked(sc);
    let delta = 2.0 / alpha;
    let lambda_m = sc.macro_tier.density;
    let lambda_s = sc.small_tier.density;
    match event {
        AssociationEvent::MacroNonCoop => {
            let a = single_closed_form(&h, alpha);
            Ok(ServingDistancePdf::Radial {
                coef: 2.0 * PI * lambda_m / (1.0 - a),
                rate: PI * (lambda_m + lambda_s * h.beta.powf(-delta)),
                event,
            })
        }
        AssociationEvent::SmallNonCoop => {
            let a = single_closed_form(&h, alpha);
            Ok(ServingDistancePdf::Radial {
                coef: 2.0 * PI * lambda_s / a,
                rate: PI * (lambda_s + lambda_m * h.beta.powf(delta)),
                event,
            })
        }
        AssociationEvent::MacroCoop => {
            let a = assoc_prob_sbs_cluster_with(sc, cfg)?;
            Ok(ServingDistancePdf::MacroCoop {
                lambda_m,
                loss: ClusterLossProbability::new(sc, cfg)?,
                macro_prob: 1.0 - a,
            })
        }
        AssociationEvent::Cluster => {
            let a = assoc_prob_sbs_cluster_with(sc, cfg)?;
            Ok(ServingDistancePdf::Cluster {
                lambda_m,
                lambda_s,
                hats: h,
                alpha,
                cluster_prob: a,
            })
        }
    }
}
