//! Laplace transform of the aggregate interference and its derivatives.
//!
//! Interferers of tier `j` form a PPP of density `λ_j` outside the disc of
//! radius `d_j`, each received with power `p_j g r^-α`, `g ~ Gamma(Ψ_j, 1)`.
//! With `δ = 2/α` and `w_j = 1 / (1 + s p_j d_j^-α)`,
//!
//! ```text
//! -ln L_I(s) = Σ_j λ_j (s p_j)^δ (2π/α) Σ_{i=1}^{Ψ_j} C(Ψ_j, i) B'(Ψ_j - i + δ, i - δ, w_j)
//! ```
//!
//! and the `n`-th derivative of the per-tier exponent is
//! `2π (-1)^(n+1) (Ψ)_n p^n (1/α) (s p)^(δ-n) B'(Ψ + δ, n - δ, w)`.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::model::{Scenario, TierParams};
use crate::quad::{integrate_to_infinity, Tolerance};
use crate::specfun::{comp_inc_beta, complete_bell, MAX_ORDER};

/// Evaluation point of the interference transform.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceContext<'a> {
    pub scenario: &'a Scenario,
    /// Laplace argument in m^α / W.
    pub s: f64,
    /// No macro interferer lies closer than this.
    pub d_macro: f64,
    /// No small-cell interferer lies closer than this.
    pub d_small: f64,
}

impl<'a> LaplaceContext<'a> {
    pub fn new(scenario: &'a Scenario, s: f64, d_macro: f64, d_small: f64) -> Result<Self> {
        let ctx = LaplaceContext {
            scenario,
            s,
            d_macro,
            d_small,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s >= 0.0) {
            return Err(invalid("s", format!("must be finite and non-negative, got {}", self.s)));
        }
        for (name, d) in [("d_macro", self.d_macro), ("d_small", self.d_small)] {
            if d.is_nan() || d < 0.0 {
                return Err(invalid(name, format!("must be non-negative, got {d}")));
            }
        }
        Ok(())
    }

    fn tiers(&self) -> [(&'a TierParams, f64); 2] {
        [
            (&self.scenario.macro_tier, self.d_macro),
            (&self.scenario.small_tier, self.d_small),
        ]
    }

    /// Lower Beta limit `w_j = 1 / (1 + s p_j d_j^-α)` for each tier.
    pub fn beta_limits(&self) -> [f64; 2] {
        self.tiers().map(|(t, d)| beta_limit(self.s, t.power, d, t.pathloss))
    }
}

fn beta_limit(s: f64, p: f64, d: f64, alpha: f64) -> f64 {
    if d.is_infinite() {
        return 1.0;
    }
    if d == 0.0 {
        return if s > 0.0 { 0.0 } else { 1.0 };
    }
    1.0 / (1.0 + s * p * d.powf(-alpha))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn rising(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// `-ln L` contribution of one tier.
fn tier_exponent(t: &TierParams, s: f64, d: f64) -> Result<f64> {
    if s == 0.0 || d.is_infinite() || t.density == 0.0 {
        return Ok(0.0);
    }
    let alpha = t.pathloss;
    let delta = 2.0 / alpha;
    let w = beta_limit(s, t.power, d, alpha);
    let psi = t.users;
    let mut c = 0.0;
    for i in 1..=psi {
        c += binomial(psi, i) * comp_inc_beta(psi as f64 - i as f64 + delta, i as f64 - delta, w)?;
    }
    Ok(t.density * (s * t.power).powf(delta) * 2.0 * PI / alpha * c)
}

/// `L_I(s)` in closed form.
pub fn laplace_interference(ctx: &LaplaceContext) -> Result<f64> {
    Ok((-log_laplace_exponent(ctx)?).exp())
}

/// `-ln L_I(s)`.
pub fn log_laplace_exponent(ctx: &LaplaceContext) -> Result<f64> {
    ctx.validate()?;
    let mut total = 0.0;
    for (t, d) in ctx.tiers() {
        total += tier_exponent(t, ctx.s, d)?;
    }
    Ok(total)
}

/// How the derivatives of the per-tier exponent are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerDerivative {
    /// Incomplete-Beta closed form.
    #[default]
    ClosedForm,
    /// Adaptive quadrature of the differentiated radial integral.
    Radial,
}

/// `G^(n)(s)` for one tier, where `-ln L = Σ λ_j G_j`.
fn tier_exponent_derivative(t: &TierParams, s: f64, d: f64, n: usize, method: InnerDerivative) -> Result<f64> {
    debug_assert!(n >= 1);
    if d.is_infinite() {
        return Ok(0.0);
    }
    let alpha = t.pathloss;
    let delta = 2.0 / alpha;
    let psi = t.users as f64;
    let p = t.power;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let front = 2.0 * PI * sign * rising(psi, n) * p.powi(n as i32);
    if s == 0.0 {
        if d == 0.0 {
            return Err(Error::Divergence("interference transform derivative at s = 0"));
        }
        let e = n as f64 * alpha - 2.0;
        return Ok(front * d.powf(-e) / e);
    }
    match method {
        InnerDerivative::ClosedForm => {
            let w = beta_limit(s, p, d, alpha);
            let b = comp_inc_beta(psi + delta, n as f64 - delta, w)?;
            Ok(front / alpha * (s * p).powf(delta - n as f64) * b)
        }
        InnerDerivative::Radial => {
            // r = c u with c = (s p)^(1/α) makes the integrand scale-free.
            let c = (s * p).powf(1.0 / alpha);
            let power = 1.0 - n as f64 * alpha;
            let integral = integrate_to_infinity(
                |u| {
                    if u <= 0.0 {
                        return Ok(0.0);
                    }
                    let ua = u.powf(-alpha);
                    Ok(u.powf(power) * (1.0 + ua).powf(-psi - n as f64))
                },
                d / c,
                Tolerance::new(0.0, 1e-11).with_max_intervals(4000),
                "radial derivative integral",
            )?;
            Ok(front * c.powf(2.0 - n as f64 * alpha) * integral.value)
        }
    }
}

/// `g^(n)(s)` for `n = 1..=k`, where `e^{g(s)} = e^{-sN} L_I(s)`.
pub fn exponent_derivatives(ctx: &LaplaceContext, k: usize, method: InnerDerivative) -> Result<Vec<f64>> {
    ctx.validate()?;
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge { order: k, max: MAX_ORDER });
    }
    let noise = ctx.scenario.noise;
    let mut out = Vec::with_capacity(k);
    for n in 1..=k {
        let mut g = if n == 1 { -noise } else { 0.0 };
        for (t, d) in ctx.tiers() {
            if t.density > 0.0 {
                g -= t.density * tier_exponent_derivative(t, ctx.s, d, n, method)?;
            }
        }
        out.push(g);
    }
    Ok(out)
}

/// `d^k/ds^k [e^{-sN} L_I(s)]` via Faà di Bruno with an exponential outer
/// function.
pub fn laplace_derivative(ctx: &LaplaceContext, k: usize) -> Result<f64> {
    laplace_derivative_with(ctx, k, InnerDerivative::ClosedForm)
}

pub fn laplace_derivative_with(ctx: &LaplaceContext, k: usize, method: InnerDerivative) -> Result<f64> {
    let g = exponent_derivatives(ctx, k, method)?;
    let base = (-ctx.s * ctx.scenario.noise - log_laplace_exponent(ctx)?).exp();
    if k == 0 {
        return Ok(base);
    }
    Ok(base * complete_bell(&g, k)[k])
}

/// `Σ_{k<terms} (-s)^k / k! d^k/ds^k [e^{-sN} L_I(s)]`, which is
/// `P(h > s (I + N))` for `h ~ Gamma(terms, 1)`.
///
/// Every scaled exponent derivative `(-s)^n g^(n)(s)` is non-negative, so the
/// sum is accumulated without cancellation.
pub fn gamma_tail_kernel(ctx: &LaplaceContext, terms: u32) -> Result<f64> {
    ctx.validate()?;
    let terms = terms.max(1) as usize;
    let order = terms - 1;
    let s = ctx.s;
    let base = (-s * ctx.scenario.noise - log_laplace_exponent(ctx)?).exp();
    if order == 0 || s == 0.0 || base == 0.0 {
        return Ok(base.min(1.0));
    }
    let scaled = scaled_exponent_derivatives(ctx, order)?;
    let bell = complete_bell(&scaled, order);
    let mut sum = 0.0;
    let mut fact = 1.0;
    for (k, y) in bell.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        sum += y / fact;
    }
    Ok((base * sum).clamp(0.0, 1.0))
}

/// `a_n = (-s)^n g^(n)(s)` for `n = 1..=k`, all non-negative.
fn scaled_exponent_derivatives(ctx: &LaplaceContext, k: usize) -> Result<Vec<f64>> {
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge { order: k, max: MAX_ORDER });
    }
    let s = ctx.s;
    let mut out = vec![0.0; k];
    out[0] = s * ctx.scenario.noise;
    for (t, d) in ctx.tiers() {
        if t.density == 0.0 || d.is_infinite() {
            continue;
        }
        let alpha = t.pathloss;
        let delta = 2.0 / alpha;
        let psi = t.users as f64;
        let w = beta_limit(s, t.power, d, alpha);
        let scale = t.density * 2.0 * PI / alpha * (s * t.power).powf(delta);
        let mut poch = 1.0;
        for (n, slot) in out.iter_mut().enumerate() {
            poch *= psi + n as f64;
            let b = comp_inc_beta(psi + delta, (n + 1) as f64 - delta, w)?;
            *slot += scale * poch * b;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Strategy;

    fn ctx(sc: &Scenario, s: f64, dm: f64, ds: f64) -> LaplaceContext<'_> {
        LaplaceContext::new(sc, s, dm, ds).unwrap()
    }

    #[test]
    fn trivial_cases() {
        let sc = Scenario::baseline();
        assert_eq!(laplace_interference(&ctx(&sc, 0.0, 10.0, 5.0)).unwrap(), 1.0);
        assert_eq!(laplace_interference(&ctx(&sc, 3.0, f64::INFINITY, f64::INFINITY)).unwrap(), 1.0);
        assert!(LaplaceContext::new(&sc, -1.0, 1.0, 1.0).is_err());
        assert!(LaplaceContext::new(&sc, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn noise_only_derivatives() {
        let mut sc = Scenario::baseline().with_noise(0.3);
        let c = ctx(&sc, 2.0, f64::INFINITY, f64::INFINITY);
        for k in 0..6 {
            let d = laplace_derivative(&c, k).unwrap();
            let expect = (-0.3f64).powi(k as i32) * (-0.6f64).exp();
            assert!((d - expect).abs() < 1e-14, "k={k}");
        }
        sc.noise = 0.0;
        assert_eq!(laplace_derivative(&ctx(&sc, 2.0, f64::INFINITY, f64::INFINITY), 3).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_and_radial_derivatives_agree() {
        for strat in Strategy::ALL {
            let sc = strat.apply(&Scenario::baseline());
            for &(s, dm, ds) in &[(0.05, 10.0, 4.0), (2.0, 30.0, 3.0), (1e-3, 1.0, 0.5), (0.7, 0.0, 2.0)] {
                let c = ctx(&sc, s, dm, ds);
                let a = exponent_derivatives(&c, 6, InnerDerivative::ClosedForm).unwrap();
                let b = exponent_derivatives(&c, 6, InnerDerivative::Radial).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    assert!((x - y).abs() <= 1e-8 * y.abs(), "{strat} s={s}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn derivative_at_zero_is_the_limit() {
        let sc = Strategy::Subf.apply(&Scenario::baseline());
        let at0 = exponent_derivatives(&ctx(&sc, 0.0, 8.0, 3.0), 3, InnerDerivative::ClosedForm).unwrap();
        let near = exponent_derivatives(&ctx(&sc, 1e-9, 8.0, 3.0), 3, InnerDerivative::ClosedForm).unwrap();
        for (a, b) in at0.iter().zip(&near) {
            assert!((a - b).abs() <= 1e-5 * a.abs(), "{a} vs {b}");
        }
        assert!(exponent_derivatives(&ctx(&sc, 0.0, 0.0, 3.0), 1, InnerDerivative::ClosedForm).is_err());
    }

    #[test]
    fn kernel_matches_derivative_sum() {
        let sc = Strategy::Subf.apply(&Scenario::baseline()).with_noise(1e-4);
        let c = ctx(&sc, 0.4, 9.0, 2.5);
        for terms in 1..=8u32 {
            let mut direct = 0.0;
            let mut fact = 1.0;
            for k in 0..terms as usize {
                if k > 0 {
                    fact *= k as f64;
                }
                direct += (-c.s).powi(k as i32) / fact * laplace_derivative(&c, k).unwrap();
            }
            let kernel = gamma_tail_kernel(&c, terms).unwrap();
            assert!((kernel - direct).abs() < 1e-9, "terms={terms}: {kernel} vs {direct}");
        }
    }

    #[test]
    fn order_bound() {
        let sc = Scenario::baseline();
        assert!(matches!(
            laplace_derivative(&ctx(&sc, 1.0, 1.0, 1.0), 17),
            Err(Error::OrderTooLarge { .. })
        ));
    }
}
