//! One Monte Carlo draw: both point processes, their fading, and the SINR of
//! the typical user under either association mode.

use rand::Rng;

use super::ppp::{generate_ppp, Point, Window};
use crate::association::AssociationEvent;
use crate::error::{invalid, Result};
use crate::model::{Mode, Scenario, TierParams};
use crate::specfun::sample_gamma;

/// Redraws allowed before a scenario is declared too sparse for its window.
const MAX_RESAMPLES: u32 = 1000;

/// Point sets of both tiers with per-link channel powers.
///
/// Fading is drawn once per realization in a fixed order so that both modes
/// see identical channels: a direct-link draw `Gamma(Δ)` for the nearest macro
/// BS and each of the `K` nearest small BSs, and an interfering-link draw
/// `Gamma(Ψ)` for every point.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// Sorted by distance.
    pub macro_points: Vec<Point>,
    /// Sorted by distance.
    pub small_points: Vec<Point>,
    pub macro_direct: f64,
    pub small_direct: Vec<f64>,
    pub macro_interfering: Vec<f64>,
    pub small_interfering: Vec<f64>,
    /// Draws discarded because a tier had too few points.
    pub resampled: u32,
}

fn by_distance(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.distance.total_cmp(&b.distance)
}

impl NetworkRealization {
    pub fn sample<R: Rng + ?Sized>(sc: &Scenario, window: &Window, rng: &mut R) -> Result<Self> {
        let (mut macro_points, mut small_points, resampled) = sample_points(sc, window, rng)?;
        macro_points.sort_unstable_by(by_distance);
        small_points.sort_unstable_by(by_distance);
        let k = sc.cluster_size;
        let dm = sc.macro_derived().delta;
        let ds = sc.small_derived().delta;
        let macro_direct = sample_gamma(dm, rng);
        let small_direct = (0..k).map(|_| sample_gamma(ds, rng)).collect();
        let macro_interfering = macro_points
            .iter()
            .map(|_| sample_gamma(sc.macro_tier.users, rng))
            .collect();
        let small_interfering = small_points
            .iter()
            .map(|_| sample_gamma(sc.small_tier.users, rng))
            .collect();
        Ok(NetworkRealization {
            macro_points,
            small_points,
            macro_direct,
            small_direct,
            macro_interfering,
            small_interfering,
            resampled,
        })
    }

    /// Builds a realization from explicit geometry and fading, for tests and
    /// hand-checked examples. Points are sorted here; fading vectors follow
    /// the sorted order.
    pub fn from_parts(
        mut macro_points: Vec<Point>,
        mut small_points: Vec<Point>,
        macro_direct: f64,
        small_direct: Vec<f64>,
        macro_interfering: Vec<f64>,
        small_interfering: Vec<f64>,
    ) -> Result<Self> {
        if macro_points.is_empty() || small_points.is_empty() {
            return Err(invalid("realization", "both tiers need at least one point"));
        }
        if macro_interfering.len() != macro_points.len() || small_interfering.len() != small_points.len() {
            return Err(invalid("realization", "one interfering fading draw per point is required"));
        }
        macro_points.sort_by(by_distance);
        small_points.sort_by(by_distance);
        Ok(NetworkRealization {
            macro_points,
            small_points,
            macro_direct,
            small_direct,
            macro_interfering,
            small_interfering,
            resampled: 0,
        })
    }

    /// Association and SINR of the typical user under `mode`.
    pub fn evaluate(&self, sc: &Scenario, mode: Mode) -> Result<TrialOutcome> {
        let k = match mode {
            Mode::NonCooperative => 1,
            Mode::Cooperative => sc.cluster_size,
        };
        if self.small_points.len() < k || self.small_direct.len() < k || self.macro_points.is_empty() {
            return Err(invalid("realization", "too few points for the requested cluster"));
        }
        let rm = self.macro_points[0].distance;
        let macro_bias = biased_gain(&sc.macro_tier) * rm.powf(-sc.macro_tier.pathloss);
        let small_bias: f64 = self.small_points[..k]
            .iter()
            .map(|p| biased_gain(&sc.small_tier) * p.distance.powf(-sc.small_tier.pathloss))
            .sum();
        let (macro_event, small_event) = AssociationEvent::pair(mode);
        let small_serves = small_bias > macro_bias;

        let link = |tier: &TierParams, r: f64, fade: f64| tier.power * fade * r.powf(-tier.pathloss);
        let (signal, macro_skip, small_skip) = if small_serves {
            let s: f64 = self.small_points[..k]
                .iter()
                .zip(&self.small_direct)
                .map(|(p, &h)| link(&sc.small_tier, p.distance, h))
                .sum();
            (s, 0, k)
        } else {
            (link(&sc.macro_tier, rm, self.macro_direct), 1, 0)
        };
        let interference: f64 = self.macro_points[macro_skip..]
            .iter()
            .zip(&self.macro_interfering[macro_skip..])
            .map(|(p, &g)| link(&sc.macro_tier, p.distance, g))
            .sum::<f64>()
            + self.small_points[small_skip..]
                .iter()
                .zip(&self.small_interfering[small_skip..])
                .map(|(p, &g)| link(&sc.small_tier, p.distance, g))
                .sum::<f64>();
        let denom = interference + sc.noise;
        let sinr = if denom > 0.0 { signal / denom } else { f64::INFINITY };
        Ok(TrialOutcome {
            event: if small_serves { small_event } else { macro_event },
            sinr,
            serving_distance: if small_serves { self.small_points[0].distance } else { rm },
        })
    }
}

fn biased_gain(tier: &TierParams) -> f64 {
    tier.derived().selection_weight() * tier.power
}

/// Draws both point sets, redrawing until the macro tier is nonempty and the
/// small tier holds at least a full cluster.
pub(crate) fn sample_points<R: Rng + ?Sized>(
    sc: &Scenario,
    window: &Window,
    rng: &mut R,
) -> Result<(Vec<Point>, Vec<Point>, u32)> {
    let mut resampled = 0;
    loop {
        let m = generate_ppp(sc.macro_tier.density, window, rng)?;
        let s = generate_ppp(sc.small_tier.density, window, rng)?;
        if !m.is_empty() && s.len() >= sc.cluster_size {
            return Ok((m, s, resampled));
        }
        resampled += 1;
        if resampled >= MAX_RESAMPLES {
            return Err(invalid(
                "window",
                "too small: tiers were repeatedly empty; enlarge the window",
            ));
        }
    }
}

/// The association outcome and SINR of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub event: AssociationEvent,
    pub sinr: f64,
    /// Distance to the serving macro BS or to the nearest serving small BS.
    pub serving_distance: f64,
}

/// Samples a fresh realization and evaluates it under `mode`.
pub fn simulate_trial<R: Rng + ?Sized>(
    sc: &Scenario,
    mode: Mode,
    window: &Window,
    rng: &mut R,
) -> Result<TrialOutcome> {
    sc.validate()?;
    NetworkRealization::sample(sc, window, rng)?.evaluate(sc, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(d: f64) -> Point {
        Point { x: d, y: 0.0, distance: d }
    }

    fn one_macro_one_small() -> Scenario {
        let mut sc = Scenario::baseline().with_cluster_size(1);
        sc.macro_tier.power = 1.0;
        sc.small_tier.power = 0.1;
        sc
    }

    #[test]
    fn hand_computed_sinr() {
        let sc = one_macro_one_small();
        let r = NetworkRealization::from_parts(vec![pt(100.0)], vec![pt(200.0)], 2.0, vec![5.0], vec![9.0], vec![1.0])
            .unwrap();
        let o = r.evaluate(&sc, Mode::NonCooperative).unwrap();
        assert_eq!(o.event, AssociationEvent::MacroNonCoop);
        assert!((o.sinr - 160.0).abs() < 1e-9, "{}", o.sinr);
    }

    #[test]
    fn noise_only_unit_sinr() {
        let mut sc = one_macro_one_small();
        let h = 1.7;
        sc.noise = 1.0 * h * 100f64.powi(-3);
        // The only small cell is far away and receives zero interfering fading.
        let r = NetworkRealization::from_parts(vec![pt(100.0)], vec![pt(1e9)], h, vec![1.0], vec![1.0], vec![0.0])
            .unwrap();
        let o = r.evaluate(&sc, Mode::NonCooperative).unwrap();
        assert!((o.sinr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equidistant_cluster_doubles_signal() {
        let mut sc = Scenario::baseline().with_cluster_size(2);
        sc.small_tier.power = sc.macro_tier.power;
        sc.noise = 1.0;
        let r = 10.0;
        let h = 1.3;
        let real = NetworkRealization::from_parts(
            vec![pt(1e6)],
            vec![pt(r), pt(r)],
            1.0,
            vec![h, h],
            vec![0.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let o = real.evaluate(&sc, Mode::Cooperative).unwrap();
        assert_eq!(o.event, AssociationEvent::Cluster);
        let expect = 2.0 * sc.small_tier.power * h * r.powi(-3);
        assert!((o.sinr - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn macro_wins_ties() {
        let mut sc = one_macro_one_small();
        sc.small_tier.power = 1.0;
        let r = NetworkRealization::from_parts(vec![pt(50.0)], vec![pt(50.0)], 1.0, vec![1.0], vec![1.0], vec![1.0])
            .unwrap();
        assert_eq!(r.evaluate(&sc, Mode::NonCooperative).unwrap().event, AssociationEvent::MacroNonCoop);
    }
}
