//! Complementary incomplete Beta function `B'_x(p, q) = ∫_x^1 t^(p-1) (1-t)^(q-1) dt`.

use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};

const CF_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// Relative tolerance used by [`comp_inc_beta`].
pub const DEFAULT_BETA_TOL: f64 = 1e-10;

/// Complete Beta function for positive arguments.
pub fn beta(p: f64, q: f64) -> f64 {
    ln_beta(p, q).exp()
}

/// Evaluates `B'_x(p, q)` for real `p`, `q > 0` and `x` in `[0, 1]`.
///
/// `p` may be zero or negative as long as `x > 0`.
pub fn comp_inc_beta(p: f64, q: f64, x: f64) -> Result<f64> {
    comp_inc_beta_tol(p, q, x, DEFAULT_BETA_TOL)
}

pub fn comp_inc_beta_tol(p: f64, q: f64, x: f64, rel_tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            func: "comp_inc_beta",
            reason: format!("x = {x} is outside [0, 1]"),
        });
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Domain {
            func: "comp_inc_beta",
            reason: format!("q = {q} must be positive"),
        });
    }
    if !p.is_finite() {
        return Err(Error::Domain {
            func: "comp_inc_beta",
            reason: format!("p = {p} must be finite"),
        });
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    if x == 0.0 {
        if p <= 0.0 {
            return Err(Error::Divergence("comp_inc_beta"));
        }
        return Ok(beta(p, q));
    }
    let y = 1.0 - x;
    if p > 0.0 {
        // Substituting u = 1 - t turns B'_x(p, q) into the lower incomplete
        // Beta B_y(q, p) with y = 1 - x.
        if y < (q + 1.0) / (p + q + 2.0) {
            let front = q * y.ln() + p * x.ln();
            return Ok(front.exp() * continued_fraction(q, p, y, rel_tol)? / q);
        }
        let front = p * x.ln() + q * y.ln();
        let lower = front.exp() * continued_fraction(p, q, x, rel_tol)? / p;
        return Ok(beta(p, q) - lower);
    }
    by_quadrature(p, q, x, rel_tol)
}

/// Lentz evaluation of the continued fraction for `B_x(a, b) * a / (x^a (1-x)^b)`.
fn continued_fraction(a: f64, b: f64, x: f64, rel_tol: f64) -> Result<f64> {
    let eps = rel_tol.max(f64::EPSILON) * 1e-2;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < eps {
            return Ok(h);
        }
    }
    Err(Error::Integration {
        context: "incomplete beta continued fraction",
        estimate: h,
        error: f64::NAN,
        tolerance: eps,
    })
}

/// Fallback for `p <= 0`: with `v = (1 - t)^q` the integrand becomes
/// `(1 - v^(1/q))^(p-1) / q` on `[0, (1-x)^q]`, which is bounded because `x > 0`.
fn by_quadrature(p: f64, q: f64, x: f64, rel_tol: f64) -> Result<f64> {
    let upper = (1.0 - x).powf(q);
    let est = integrate(
        |v| {
            let base = 1.0 - v.powf(1.0 / q);
            Ok(base.max(x).powf(p - 1.0))
        },
        0.0,
        upper,
        Tolerance::new(0.0, rel_tol).with_max_intervals(4000),
        "comp_inc_beta quadrature",
    )?;
    Ok(est.value / q)
}
