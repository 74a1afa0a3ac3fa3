//! Domain types for a two-tier deployment and the per-tier quantities every
//! engine derives from them.
//!
//! Powers are stored in watts. dBm only appears at the configuration boundary
//! (see [`crate::config`]) and in [`dbm_to_watts`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Converts a threshold in dB to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parameters shared by every base station of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierParams {
    /// Base stations per square metre.
    pub density: f64,
    /// Transmit power per served user, in watts.
    pub power: f64,
    pub antennas: u32,
    /// Users served simultaneously on one resource block.
    pub users: u32,
    pub pathloss: f64,
    /// Replaces the default selection bias `sqrt(users / delta)`.
    pub bias_override: Option<f64>,
}

impl TierParams {
    pub fn new(density: f64, power: f64, antennas: u32, users: u32, pathloss: f64) -> Self {
        Self {
            density,
            power,
            antennas,
            users,
            pathloss,
            bias_override: None,
        }
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias_override = Some(bias);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(invalid("density", format!("must be positive, got {}", self.density)));
        }
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(invalid("power", format!("must be positive, got {}", self.power)));
        }
        if self.users == 0 {
            return Err(invalid("users", "at least one user must be served"));
        }
        if self.antennas < self.users {
            return Err(invalid(
                "antennas",
                format!(
                    "{} antennas cannot serve {} users with zero-forcing",
                    self.antennas, self.users
                ),
            ));
        }
        if !(self.pathloss.is_finite() && self.pathloss > 2.0) {
            return Err(invalid(
                "pathloss",
                format!("exponent must exceed 2, got {}", self.pathloss),
            ));
        }
        if let Some(b) = self.bias_override {
            if !(b.is_finite() && b > 0.0) {
                return Err(invalid("bias", format!("must be positive, got {b}")));
            }
        }
        Ok(())
    }

    /// Derived quantities; panics only if the tier was never validated and is
    /// inconsistent, so prefer [`derive_tier`] on untrusted input.
    pub(crate) fn derived(&self) -> DerivedTier {
        let delta = self.antennas - self.users + 1;
        let bias = self
            .bias_override
            .unwrap_or_else(|| (self.users as f64 / delta as f64).sqrt());
        DerivedTier { delta, bias }
    }
}

/// Gamma shape of the direct link and the association bias of a tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedTier {
    /// `antennas - users + 1`; the direct-link channel power is `Gamma(delta, 1)`.
    pub delta: u32,
    pub bias: f64,
}

impl DerivedTier {
    /// `bias * delta`, the factor applied to `power * r^-alpha` at selection.
    pub fn selection_weight(&self) -> f64 {
        self.bias * self.delta as f64
    }
}

pub fn derive_tier(tier: &TierParams) -> Result<DerivedTier> {
    tier.validate()?;
    Ok(tier.derived())
}

/// Transmission strategy presets applied to both tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    Siso,
    Subf,
    Sdma,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Siso, Strategy::Subf, Strategy::Sdma];

    /// `(macro antennas, macro users, small antennas, small users)`.
    pub fn antenna_config(self) -> (u32, u32, u32, u32) {
        match self {
            Strategy::Siso => (1, 1, 1, 1),
            Strategy::Subf => (8, 1, 4, 1),
            Strategy::Sdma => (8, 8, 8, 8),
        }
    }

    pub fn apply(self, scenario: &Scenario) -> Scenario {
        let (mm, um, ms, us) = self.antenna_config();
        let mut out = scenario.clone();
        out.macro_tier.antennas = mm;
        out.macro_tier.users = um;
        out.small_tier.antennas = ms;
        out.small_tier.users = us;
        out
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Siso => "SISO",
            Strategy::Subf => "SUBF",
            Strategy::Sdma => "SDMA",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SISO" => Ok(Strategy::Siso),
            "SUBF" => Ok(Strategy::Subf),
            "SDMA" => Ok(Strategy::Sdma),
            other => Err(format!("unknown strategy `{other}` (expected SISO, SUBF or SDMA)")),
        }
    }
}

/// Whether the small cells serve alone or as a joint-transmission cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    NonCooperative,
    Cooperative,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::NonCooperative, Mode::Cooperative];

    pub fn name(self) -> &'static str {
        match self {
            Mode::NonCooperative => "noncooperative",
            Mode::Cooperative => "cooperative",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "noncooperative" | "noncoop" | "nc" => Ok(Mode::NonCooperative),
            "cooperative" | "coop" | "c" => Ok(Mode::Cooperative),
            other => Err(format!(
                "unknown mode `{other}` (expected noncooperative or cooperative)"
            )),
        }
    }
}

/// A complete two-tier deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub macro_tier: TierParams,
    pub small_tier: TierParams,
    /// Number of nearest small cells that jointly transmit in cooperative mode.
    pub cluster_size: usize,
    /// Receiver noise power in watts; zero means interference-limited.
    pub noise: f64,
    /// Require both tiers to share one path-loss exponent.
    pub common_pathloss: bool,
}

impl Scenario {
    /// The reference deployment: 0.01 and 0.04 BS/m², 45 and 35 dBm,
    /// path-loss exponent 3, clusters of two small cells, single-antenna links
    /// and no noise.
    pub fn baseline() -> Self {
        Scenario {
            macro_tier: TierParams::new(0.01, dbm_to_watts(45.0), 1, 1, 3.0),
            small_tier: TierParams::new(0.04, dbm_to_watts(35.0), 1, 1, 3.0),
            cluster_size: 2,
            noise: 0.0,
            common_pathloss: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.macro_tier.validate()?;
        self.small_tier.validate()?;
        if self.cluster_size == 0 {
            return Err(invalid("cluster_size", "must be at least 1"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(invalid("noise", format!("must be non-negative, got {}", self.noise)));
        }
        if self.common_pathloss && self.macro_tier.pathloss != self.small_tier.pathloss {
            return Err(invalid(
                "pathloss",
                format!(
                    "tiers must share the exponent (macro {}, small {})",
                    self.macro_tier.pathloss, self.small_tier.pathloss
                ),
            ));
        }
        Ok(())
    }

    pub fn macro_derived(&self) -> DerivedTier {
        self.macro_tier.derived()
    }

    pub fn small_derived(&self) -> DerivedTier {
        self.small_tier.derived()
    }

    /// The shared path-loss exponent used by the analytic engine.
    pub fn alpha(&self) -> f64 {
        self.macro_tier.pathloss
    }

    pub fn with_cluster_size(mut self, k: usize) -> Self {
        self.cluster_size = k;
        self
    }

    /// Sets the small-cell bias so that `B_s / B_m` equals `ratio`, keeping the
    /// macro bias at its current value.
    pub fn with_bias_ratio(mut self, ratio: f64) -> Self {
        let bm = self.macro_tier.derived().bias;
        self.small_tier.bias_override = Some(ratio * bm);
        self
    }

    /// Sets `lambda_s = ratio * lambda_m`.
    pub fn with_density_ratio(mut self, ratio: f64) -> Self {
        self.small_tier.density = ratio * self.macro_tier.density;
        self
    }

    pub fn with_noise(mut self, watts: f64) -> Self {
        self.noise = watts;
        self
    }

    /// Exchanges the roles of the two tiers.
    pub fn swapped(&self) -> Self {
        Scenario {
            macro_tier: self.small_tier,
            small_tier: self.macro_tier,
            ..self.clone()
        }
    }
}

/// Small-tier-over-macro-tier ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatRatios {
    pub p_hat: f64,
    pub delta_hat: f64,
    pub b_hat: f64,
    pub lambda_hat: f64,
    /// `1 / (p_hat * delta_hat * b_hat)`.
    pub beta: f64,
}

impl HatRatios {
    /// `p_hat * delta_hat * b_hat`: the small tier's biased mean power relative
    /// to the macro tier at equal distance.
    pub fn biased_power_ratio(&self) -> f64 {
        self.p_hat * self.delta_hat * self.b_hat
    }
}

pub fn hat_ratios(scenario: &Scenario) -> Result<HatRatios> {
    scenario.validate()?;
    Ok(hat_ratios_unchecked(scenario))
}

pub(crate) fn hat_ratios_unchecked(scenario: &Scenario) -> HatRatios {
    let m = scenario.macro_derived();
    let s = scenario.small_derived();
    let p_hat = scenario.small_tier.power / scenario.macro_tier.power;
    let delta_hat = s.delta as f64 / m.delta as f64;
    let b_hat = s.bias / m.bias;
    HatRatios {
        p_hat,
        delta_hat,
        b_hat,
        lambda_hat: scenario.small_tier.density / scenario.macro_tier.density,
        beta: 1.0 / (p_hat * delta_hat * b_hat),
    }
}
