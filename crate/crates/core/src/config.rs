//! TOML scenario files.
//!
//! ```toml
//! [macro]
//! density_per_m2 = 0.01
//! power_dbm = 45.0
//! antennas = 1
//! users = 1
//! pathloss = 3.0
//!
//! [small]
//! density_per_m2 = 0.04
//! power_dbm = 35.0
//! bias = 1.5        # or "auto" for sqrt(users / delta)
//!
//! [scenario]
//! cluster_size = 2
//! noise_dbm = "off" # or a level in dBm
//! seed = 1
//! ```
//!
//! Every key is optional and defaults to [`Scenario::baseline`]. A parsed file
//! resolves to a [`Config`] with all defaults filled in, which serializes back
//! to a file that reproduces it exactly.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcsim::{Window, WindowSpec};
use crate::model::{dbm_to_watts, Scenario, TierParams};

pub const DEFAULT_SEED: u64 = 1;
/// Recorded users per small cell; no engine places other users.
pub const USERS_PER_SMALL_CELL: f64 = 40.0;

/// A number or a keyword standing for a computed default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum NumberOrWord {
    Number(f64),
    Word(String),
}

macro_rules! keyword_setting {
    ($name:ident, $word:literal, $default:ident, $value:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "NumberOrWord", into = "NumberOrWord")]
        pub enum $name {
            $default,
            $value(f64),
        }

        impl TryFrom<NumberOrWord> for $name {
            type Error = String;

            fn try_from(raw: NumberOrWord) -> std::result::Result<Self, String> {
                match raw {
                    NumberOrWord::Number(x) => Ok($name::$value(x)),
                    NumberOrWord::Word(w) if w == $word => Ok($name::$default),
                    NumberOrWord::Word(w) => Err(format!("expected a number or \"{}\", got \"{w}\"", $word)),
                }
            }
        }

        impl From<$name> for NumberOrWord {
            fn from(s: $name) -> Self {
                match s {
                    $name::$default => NumberOrWord::Word($word.to_string()),
                    $name::$value(x) => NumberOrWord::Number(x),
                }
            }
        }
    };
}

keyword_setting!(BiasSetting, "auto", Auto, Value);
keyword_setting!(NoiseSetting, "off", Off, Dbm);
keyword_setting!(WindowSetting, "auto", Auto, HalfWidth);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierConfig {
    pub density_per_m2: f64,
    pub power_dbm: f64,
    pub antennas: u32,
    pub users: u32,
    pub bias: BiasSetting,
    pub pathloss: f64,
}

impl TierConfig {
    fn from_params(t: &TierParams) -> Self {
        TierConfig {
            density_per_m2: t.density,
            power_dbm: crate::model::watts_to_dbm(t.power),
            antennas: t.antennas,
            users: t.users,
            bias: t.bias_override.map_or(BiasSetting::Auto, BiasSetting::Value),
            pathloss: t.pathloss,
        }
    }

    pub fn params(&self) -> TierParams {
        let t = TierParams::new(
            self.density_per_m2,
            dbm_to_watts(self.power_dbm),
            self.antennas,
            self.users,
            self.pathloss,
        );
        match self.bias {
            BiasSetting::Auto => t,
            BiasSetting::Value(b) => t.with_bias(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cluster_size: usize,
    pub noise_dbm: NoiseSetting,
    pub seed: u64,
    pub common_pathloss: bool,
    pub window_half_width_m: WindowSetting,
    /// Expected small-cell count of an automatically sized window.
    pub target_small_points: f64,
    /// Minimum expected point count per tier of an automatically sized window.
    pub min_points_per_tier: f64,
    /// Informational only.
    pub user_density_per_m2: f64,
}

/// A fully resolved scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "macro")]
    pub macro_tier: TierConfig,
    pub small: TierConfig,
    pub scenario: ScenarioConfig,
}

impl Default for Config {
    fn default() -> Self {
        let sc = Scenario::baseline();
        let WindowSpec::Auto {
            target_small_points,
            min_points,
        } = WindowSpec::default()
        else {
            unreachable!("the default window is automatic")
        };
        Config {
            macro_tier: TierConfig {
                power_dbm: 45.0,
                ..TierConfig::from_params(&sc.macro_tier)
            },
            small: TierConfig {
                power_dbm: 35.0,
                ..TierConfig::from_params(&sc.small_tier)
            },
            scenario: ScenarioConfig {
                cluster_size: sc.cluster_size,
                noise_dbm: NoiseSetting::Off,
                seed: DEFAULT_SEED,
                common_pathloss: sc.common_pathloss,
                window_half_width_m: WindowSetting::Auto,
                target_small_points,
                min_points_per_tier: min_points,
                user_density_per_m2: USERS_PER_SMALL_CELL * sc.small_tier.density,
            },
        }
    }
}

// Partial views of each section; absent keys fall back to the defaults.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialTier {
    density_per_m2: Option<f64>,
    power_dbm: Option<f64>,
    antennas: Option<u32>,
    users: Option<u32>,
    bias: Option<BiasSetting>,
    pathloss: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialScenario {
    cluster_size: Option<usize>,
    noise_dbm: Option<NoiseSetting>,
    seed: Option<u64>,
    common_pathloss: Option<bool>,
    window_half_width_m: Option<WindowSetting>,
    target_small_points: Option<f64>,
    min_points_per_tier: Option<f64>,
    user_density_per_m2: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    #[serde(rename = "macro", default)]
    macro_tier: PartialTier,
    #[serde(default)]
    small: PartialTier,
    #[serde(default)]
    scenario: PartialScenario,
}

fn merge_tier(base: &mut TierConfig, p: PartialTier) {
    macro_rules! take {
        ($($f:ident),*) => { $(if let Some(v) = p.$f { base.$f = v; })* };
    }
    take!(density_per_m2, power_dbm, antennas, users, bias, pathloss);
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(table)
    }

    /// Resolves an already parsed TOML table.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let partial: PartialConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut cfg = Config::default();
        let density_given = partial.small.density_per_m2.is_some();
        merge_tier(&mut cfg.macro_tier, partial.macro_tier);
        merge_tier(&mut cfg.small, partial.small);
        let p = partial.scenario;
        let s = &mut cfg.scenario;
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = p.$f { s.$f = v; })* };
        }
        take!(cluster_size, noise_dbm, seed, common_pathloss, window_half_width_m, target_small_points, min_points_per_tier);
        s.user_density_per_m2 = match p.user_density_per_m2 {
            Some(v) => v,
            None if density_given => USERS_PER_SMALL_CELL * cfg.small.density_per_m2,
            None => s.user_density_per_m2,
        };
        cfg.scenario()?;
        cfg.window()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("resolved configs always serialize")
    }

    /// The validated scenario described by this file.
    pub fn scenario(&self) -> Result<Scenario> {
        let sc = Scenario {
            macro_tier: self.macro_tier.params(),
            small_tier: self.small.params(),
            cluster_size: self.scenario.cluster_size,
            noise: match self.scenario.noise_dbm {
                NoiseSetting::Off => 0.0,
                NoiseSetting::Dbm(x) => dbm_to_watts(x),
            },
            common_pathloss: self.scenario.common_pathloss,
        };
        sc.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(sc)
    }

    pub fn window(&self) -> Result<WindowSpec> {
        let s = &self.scenario;
        match s.window_half_width_m {
            WindowSetting::HalfWidth(h) => Ok(WindowSpec::Fixed(Window::new(h).map_err(|e| Error::Config(e.to_string()))?)),
            WindowSetting::Auto => {
                if !(s.target_small_points > 0.0 && s.min_points_per_tier > 0.0) {
                    return Err(Error::Config("window point targets must be positive".into()));
                }
                Ok(WindowSpec::Auto {
                    target_small_points: s.target_small_points,
                    min_points: s.min_points_per_tier,
                })
            }
        }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_baseline() {
        let cfg = Config::from_toml_str("").unwrap();
        assert_eq!(cfg, Config::default());
        let sc = cfg.scenario().unwrap();
        let base = Scenario::baseline();
        assert!((sc.macro_tier.power - base.macro_tier.power).abs() < 1e-12);
        assert_eq!(sc.cluster_size, base.cluster_size);
        assert_eq!(sc.noise, 0.0);
    }

    #[test]
    fn keywords_and_numbers() {
        let cfg = Config::from_toml_str(
            "[small]\nbias = 2.0\ndensity_per_m2 = 0.08\n[scenario]\nnoise_dbm = -90\nwindow_half_width_m = 300.0\n",
        )
        .unwrap();
        let sc = cfg.scenario().unwrap();
        assert_eq!(sc.small_tier.bias_override, Some(2.0));
        assert!((sc.noise - 1e-12).abs() < 1e-24);
        assert_eq!(cfg.window().unwrap(), WindowSpec::Fixed(Window { half_width: 300.0 }));
        assert!((cfg.scenario.user_density_per_m2 - 3.2).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let cfg = Config::from_toml_str("[macro]\nantennas = 8\nbias = 0.5\n[scenario]\nseed = 77\n").unwrap();
        let text = cfg.to_toml_string();
        assert!(text.contains("bias = \"auto\""));
        assert!(text.contains("noise_dbm = \"off\""));
        assert_eq!(Config::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[macro]\ndensity = 1.0\n",
            "[scenario]\nnoise_dbm = \"loud\"\n",
            "[small]\nusers = 4\n",
            "[small]\npathloss = 4.0\n",
            "[scenario]\ncluster_size = 0\n",
            "[macro\n",
        ] {
            assert!(matches!(Config::from_toml_str(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
