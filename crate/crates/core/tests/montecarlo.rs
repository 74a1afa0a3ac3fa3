mod common;

use std::f64::consts::PI;

use common::ks_statistic;
use hetnet_coop::mcsim::*;
use hetnet_coop::model::{Mode, Scenario, Strategy};
use hetnet_coop::specfun::{gamma_ccdf, sample_gamma};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn nearest_small_cell_distance_is_rayleigh() {
    let lambda: f64 = 0.04;
    // Expected 64 points: the nearest point leaves the window with probability e^-50.
    let window = Window::new(0.5 * (64.0 / lambda).sqrt()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut d: Vec<f64> = (0..100_000)
        .map(|_| {
            generate_ppp(lambda, &window, &mut rng)
                .unwrap()
                .iter()
                .map(|p| p.distance)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let ks = ks_statistic(&mut d, |r| 1.0 - (-lambda * PI * r * r).exp());
    // Critical value of the one-sample KS test at significance 0.01.
    assert!(ks < 1.628 / (d.len() as f64).sqrt(), "KS statistic {ks}");
}

#[test]
fn direct_link_gain_of_subf_has_mean_eight() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let n = 100_000;
    let mean = (0..n).map(|_| sample_gamma(8, &mut rng)).sum::<f64>() / n as f64;
    assert!((mean - 8.0).abs() < 0.1, "{mean}");
}

#[test]
fn fixed_geometry_sinr_follows_gamma_ccdf() {
    let sc = Strategy::Subf.apply(&Scenario::baseline()).with_cluster_size(1);
    let pt = |d: f64| Point { x: d, y: 0.0, distance: d };
    let (rm, rs, g): (f64, f64, f64) = (20.0, 40.0, 3.0);
    let interference = sc.small_tier.power * g * rs.powf(-3.0);
    let delta = sc.macro_derived().delta;
    let threshold = 8.0;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 20_000;
    let hits = (0..n)
        .filter(|_| {
            let h = sample_gamma(delta, &mut rng);
            let real = NetworkRealization::from_parts(vec![pt(rm)], vec![pt(rs)], h, vec![1.0], vec![0.0], vec![g]).unwrap();
            real.evaluate(&sc, Mode::NonCooperative).unwrap().sinr > threshold
        })
        .count();
    let expect = gamma_ccdf(delta, 1.0, threshold * interference * rm.powi(3) / sc.macro_tier.power);
    assert!((hits as f64 / n as f64 - expect).abs() < 0.01, "{hits} / {n} vs {expect}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let sc = Strategy::Sdma.apply(&Scenario::baseline());
    let run = |w| simulate(&sc, &McSettings::new(500, 99).with_workers(w)).unwrap();
    let one = run(1);
    for w in [4, 8] {
        let other = run(w);
        assert_eq!(one.noncooperative, other.noncooperative);
        assert_eq!(one.cooperative, other.cooperative);
        assert_eq!(one.resampled, other.resampled);
    }
}

#[test]
fn density_scaling_leaves_coverage_unchanged() {
    let sc = Scenario::baseline();
    let mut dense = sc.clone();
    dense.macro_tier.density *= 4.0;
    dense.small_tier.density *= 4.0;
    let settings = McSettings::new(3000, 5);
    for mode in Mode::ALL {
        let a = empirical_coverage(&sc, mode, 1.0, &settings).unwrap();
        let b = empirical_coverage(&dense, mode, 1.0, &settings).unwrap();
        assert!((a.value - b.value).abs() <= a.ci_halfwidth, "{a:?} vs {b:?}");
    }
}

/// Evaluates each realization twice: on the full window and on its inner half
/// (all points with both coordinates within half the half-width).
#[test]
fn edge_effects_are_below_the_confidence_interval() {
    let sc = Scenario::baseline();
    let outer = WindowSpec::default().resolve(&sc).unwrap();
    let outer = Window::new(2.0 * outer.half_width).unwrap();
    let inner_half = 0.5 * outer.half_width;
    let settings = McSettings::new(4000, 6);
    let pairs = run_trials(&settings, |rng| {
        let full = NetworkRealization::sample(&sc, &outer, rng)?;
        let keep = |p: &Point| p.x.abs() <= inner_half && p.y.abs() <= inner_half;
        let split = |pts: &[Point], g: &[f64]| -> (Vec<Point>, Vec<f64>) {
            pts.iter().zip(g).filter(|(p, _)| keep(p)).map(|(p, &g)| (*p, g)).unzip()
        };
        let (mp, mg) = split(&full.macro_points, &full.macro_interfering);
        let (sp, sg) = split(&full.small_points, &full.small_interfering);
        let inner = NetworkRealization::from_parts(mp, sp, full.macro_direct, full.small_direct.clone(), mg, sg)?;
        Ok((full.evaluate(&sc, Mode::Cooperative)?, inner.evaluate(&sc, Mode::Cooperative)?))
    })
    .unwrap();
    let (big, small): (Vec<TrialOutcome>, Vec<TrialOutcome>) = pairs.into_iter().unzip();
    let a = coverage_from_outcomes(&big, 1.0);
    let b = coverage_from_outcomes(&small, 1.0);
    assert!((a.value - b.value).abs() < a.ci_halfwidth, "{a:?} vs {b:?}");
}

#[test]
fn empirical_association_matches_closed_form_for_defaults() {
    let sc = Scenario::baseline();
    let settings = McSettings::new(20_000, 8).with_window(WindowSpec::Auto {
        target_small_points: 64.0,
        min_points: 64.0,
    });
    let f1 = empirical_association(&sc.clone().with_cluster_size(1), Mode::NonCooperative, &settings).unwrap();
    let analytic = hetnet_coop::association::assoc_prob_sbs_single(&sc).unwrap();
    assert!((f1.small.value - analytic).abs() < 3.0 * f1.small.standard_error());
    let f2 = empirical_association(&sc, Mode::Cooperative, &settings).unwrap();
    assert!(f2.small.value > f1.small.value);
}
