//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls the crate's quadrature or special functions; the
//! oracles integrate the defining radial and Laplace-domain expressions
//! directly with double-exponential quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use hetnet_coop::association::{exclusion_radius_mbs, AssociationEvent, OrderedDistances};
use hetnet_coop::model::{hat_ratios, Scenario, TierParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Tanh-sinh quadrature of `f` on `[a, b]`, refined until two levels agree to
/// `rel_tol`. Abscissae are placed relative to the nearer endpoint, so
/// integrable endpoint singularities are never evaluated at the endpoint.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        // 1 - tanh(|u|) without cancellation.
        let comp = 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        if !(w > 0.0) || comp == 0.0 {
            return 0.0;
        }
        let x = if u >= 0.0 { b - half * comp } else { a + half * comp };
        if x <= a || x >= b {
            return 0.0;
        }
        w * f(x)
    };
    let t_max = 6.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let next = half * h * sum;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `∫_0^∞ f` through `z = x / (1 - x)`.
pub fn tanh_sinh_half_line<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> f64 {
    tanh_sinh(
        |x| {
            let one_minus = 1.0 - x;
            f(x / one_minus) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        rel_tol,
    )
}

/// `1 - (1 + x)^-n`, accurate for small `x`.
fn one_minus_power(x: f64, n: u32) -> f64 {
    -(-(n as f64) * x.ln_1p()).exp_m1()
}

/// `2πλ ∫_d^∞ (1 - (1 + s p r^-α)^-Ψ) r dr` by direct quadrature in `u = d / r`.
pub fn radial_exponent(t: &TierParams, s: f64, d: f64) -> f64 {
    let alpha = t.pathloss;
    let c = s * t.power * d.powf(-alpha);
    let integral = tanh_sinh(
        |u| {
            let x = c * u.powf(alpha);
            if x < 1e-10 {
                // Leading term, avoiding 0 / 0 as u underflows.
                t.users as f64 * c * u.powf(alpha - 3.0) * d * d
            } else {
                one_minus_power(x, t.users) * d * d / (u * u * u)
            }
        },
        0.0,
        1.0,
        1e-12,
    );
    2.0 * PI * t.density * integral
}

/// Interference Laplace transform from the radial definition.
pub fn laplace_radial(sc: &Scenario, s: f64, d_macro: f64, d_small: f64) -> f64 {
    (-(radial_exponent(&sc.macro_tier, s, d_macro) + radial_exponent(&sc.small_tier, s, d_small))).exp()
}

/// Central difference of order `k ∈ {1, 2, 3}` with one Richardson step.
pub fn finite_difference<F: Fn(f64) -> f64>(f: F, s: f64, k: usize, h: f64) -> f64 {
    let d = |h: f64| match k {
        1 => (f(s + h) - f(s - h)) / (2.0 * h),
        2 => (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h),
        3 => (f(s + 2.0 * h) - 2.0 * f(s + h) + 2.0 * f(s - h) - f(s - 2.0 * h)) / (2.0 * h * h * h),
        _ => panic!("order {k} not supported"),
    };
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Conditional rate `E[ln(1 + h p r^-α / I)] / ln 2` with `h ~ Gamma(Δ, 1)`,
/// from the Laplace-domain identity
/// `E ln(1 + X/Y) = ∫_0^∞ (1/z) (1 - E e^{-zX}) E e^{-zY} dz`.
pub fn conditional_rate_laplace<L: Fn(f64) -> f64>(signal_scale: f64, delta: u32, laplace_i: L) -> f64 {
    let integral = tanh_sinh_half_line(
        |z| {
            if z == 0.0 {
                return delta as f64 * signal_scale;
            }
            one_minus_power(z * signal_scale, delta) / z * laplace_i(z)
        },
        1e-10,
    );
    integral / std::f64::consts::LN_2
}

/// A random valid scenario with a shared path-loss exponent.
pub fn random_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let alpha = rng.random_range(2.3..4.5);
    let tier = |rng: &mut R, power_dbm: f64| {
        let users = rng.random_range(1..=6);
        let antennas = users + rng.random_range(0..=6);
        let mut t = TierParams::new(
            10f64.powf(rng.random_range(-4.0..-1.0)),
            hetnet_coop::model::dbm_to_watts(power_dbm),
            antennas,
            users,
            alpha,
        );
        if rng.random_bool(0.3) {
            t = t.with_bias(rng.random_range(0.2..3.0));
        }
        t
    };
    let pm = rng.random_range(35.0..50.0);
    let ps = pm - rng.random_range(0.0..20.0);
    Scenario {
        macro_tier: tier(rng, pm),
        small_tier: tier(rng, ps),
        cluster_size: rng.random_range(1..=3),
        noise: 0.0,
        common_pathloss: true,
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against the CDF `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Interference exclusion radii `(d_macro, d_small)` of `event` for serving distance `r`.
pub fn exclusion_for(sc: &Scenario, event: AssociationEvent, r: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let beta = hat_ratios(sc).unwrap().beta;
    let alpha = sc.alpha();
    match event {
        AssociationEvent::MacroNonCoop | AssociationEvent::MacroCoop => (r, beta.powf(-1.0 / alpha) * r),
        AssociationEvent::SmallNonCoop => (beta.powf(1.0 / alpha) * r, r),
        AssociationEvent::Cluster => {
            let mut d: Vec<f64> = (0..sc.cluster_size).map(|_| r * rng.random_range(1.0..3.0)).collect();
            d[0] = r;
            d.sort_by(f64::total_cmp);
            let od = OrderedDistances::new(d).unwrap();
            (exclusion_radius_mbs(sc, &od).unwrap(), *od.as_slice().last().unwrap())
        }
    }
}

pub const EVENTS: [AssociationEvent; 4] = [
    AssociationEvent::MacroNonCoop,
    AssociationEvent::SmallNonCoop,
    AssociationEvent::MacroCoop,
    AssociationEvent::Cluster,
];

/// A random `(scenario, s, d_macro, d_small)`: a serving distance drawn at
/// the scale of its tier and `s = T r^α / p` for a threshold `T` between
/// -15 and 10 dB. Contexts whose transform is below 1e-8 (coverage that is
/// numerically zero) are redrawn.
pub fn random_context(rng: &mut ChaCha8Rng) -> (Scenario, f64, f64, f64) {
    loop {
        let ctx = draw_context(rng);
        if laplace_radial(&ctx.0, ctx.1, ctx.2, ctx.3) > 1e-8 {
            return ctx;
        }
    }
}

pub fn draw_context(rng: &mut ChaCha8Rng) -> (Scenario, f64, f64, f64) {
    let sc = random_scenario(rng);
    let event = EVENTS[rng.random_range(0..4)];
    let tier = if event.is_macro() { &sc.macro_tier } else { &sc.small_tier };
    let r = (rng.random_range(0.05..2.0) / (std::f64::consts::PI * tier.density)).sqrt();
    let (dm, ds) = exclusion_for(&sc, event, r, rng);
    let s = 10f64.powf(rng.random_range(-1.5..1.0)) * r.powf(sc.alpha()) / tier.power;
    (sc, s, dm, ds)
}


/// `∫∫_{0<r1<r2} f(r1, r2)`, with `scale` a typical distance.
pub fn integrate_ordered_pair<F: Fn(f64, f64) -> f64>(f: F, scale: f64) -> f64 {
    tanh_sinh_half_line(
        |u2| {
            let r2 = u2 * scale;
            if !(r2 > 0.0 && r2.is_finite()) {
                return 0.0;
            }
            r2 * tanh_sinh(|v| if v * r2 > 0.0 { f(v * r2, r2) } else { 0.0 }, 0.0, 1.0, 1e-9) * scale
        },
        1e-8,
    )
}

/// `∫_0^∞ f`, with `scale` a typical distance.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: F, scale: f64) -> f64 {
    tanh_sinh_half_line(|u| if (u * scale).is_finite() { f(u * scale) * scale } else { 0.0 }, 1e-10)
}
