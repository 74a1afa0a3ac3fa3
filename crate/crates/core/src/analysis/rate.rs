//! Mean achievable rate `E[log2(1 + SINR)]` from the coverage curve.

use std::f64::consts::LN_2;

use super::coverage::{AnalyticSettings, CoverageModel};
use crate::error::{Error, Result};
use crate::model::{Mode, Scenario};
use crate::quad::{integrate, Tolerance};

/// Coverage below this level is treated as zero when truncating the integral.
const TAIL_LEVEL: f64 = 1e-6;
const MAX_LOG_THRESHOLD: f64 = 256.0;

/// `(1/ln 2) ∫_0^∞ P_c(θ) / (1 + θ) dθ`, evaluated as `∫_0^Y P_c(e^y - 1) dy / ln 2`
/// with `Y` doubled from 8 until `P_c(e^Y - 1) < 1e-6`.
pub fn rate_from_coverage<F>(mut coverage: F, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut upper: f64 = 8.0;
    while coverage(upper.exp_m1())? >= TAIL_LEVEL {
        upper *= 2.0;
        if upper > MAX_LOG_THRESHOLD {
            return Err(Error::Integration {
                context: "rate truncation search",
                estimate: f64::NAN,
                error: f64::NAN,
                tolerance: TAIL_LEVEL,
            });
        }
    }
    let est = integrate(
        |y| {
            if y <= 0.0 {
                return Ok(1.0);
            }
            coverage(y.exp_m1())
        },
        0.0,
        upper,
        Tolerance::new(abs_tol * LN_2, 1e-8).with_max_intervals(500),
        "mean rate integral",
    )?;
    Ok(est.value / LN_2)
}

/// Per-event and combined mean rates of one mode, in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub mode: Mode,
    pub small_assoc: f64,
    pub macro_rate: f64,
    pub small_rate: f64,
    pub overall: f64,
}

impl CoverageModel {
    pub fn rate_breakdown(&self, mode: Mode, abs_tol: f64) -> Result<RateBreakdown> {
        let (m, s) = crate::association::AssociationEvent::pair(mode);
        let a = self.small_assoc(mode);
        let joint_rate = |event| rate_from_coverage(|t| if t > 0.0 { self.joint(event, t) } else { Ok(self.event_probability(event)) }, abs_tol);
        let rm = if a < 1.0 { joint_rate(m)? } else { 0.0 };
        let rs = if a > 0.0 { joint_rate(s)? } else { 0.0 };
        Ok(RateBreakdown {
            mode,
            small_assoc: a,
            macro_rate: if a < 1.0 { rm / (1.0 - a) } else { 0.0 },
            small_rate: if a > 0.0 { rs / a } else { 0.0 },
            overall: rm + rs,
        })
    }
}

/// Mean achievable rate of `mode`: `(1 - A) R_macro + A R_small`.
pub fn mean_rate(mode: Mode, sc: &Scenario) -> Result<f64> {
    let model = CoverageModel::new(sc, AnalyticSettings::default())?;
    Ok(model.rate_breakdown(mode, 1e-4)?.overall)
}
