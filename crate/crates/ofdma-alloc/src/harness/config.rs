//! Line-oriented `key = value` scenario configuration files.
//!
//! Keys match the [`ScenarioConfig`] field names; channel and radio
//! parameters use their own field names (`cell_radius`, `error_rate`, ...).
//! Blank lines and lines starting with `#` are ignored; unknown keys are
//! errors. Unlisted keys keep their defaults.

use super::{AlgorithmId, HarnessError, ScenarioConfig};
use crate::rate::RadioParams;

/// Default noise density in dBm/Hz, re-derived when radio keys change.
const DEFAULT_NOISE_DBM: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq)]
struct RadioKeys {
    noise_density_dbm_hz: f64,
    subchannel_bandwidth: f64,
    error_rate: f64,
    max_order: u32,
}

impl Default for RadioKeys {
    fn default() -> Self {
        Self {
            noise_density_dbm_hz: DEFAULT_NOISE_DBM,
            subchannel_bandwidth: 2e5,
            error_rate: 1e-6,
            max_order: 6,
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(format!("line {line}: {}", msg.into()))
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T, HarnessError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| parse_err(line, format!("bad value for {key}: {e}")))
}

fn parse_list(value: &str, line: usize, key: &str) -> Result<Vec<f64>, HarnessError> {
    value
        .split(',')
        .map(|tok| parse_num::<f64>(tok, line, key))
        .collect()
}

/// Parses a scenario configuration, starting from [`ScenarioConfig::default`].
pub fn parse_scenario_config(text: &str) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = ScenarioConfig::default();
    let mut radio = RadioKeys::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(line_no, format!("expected key = value, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "subchannels" => cfg.subchannels = parse_num(value, line_no, key)?,
            "cbr_users" => cfg.cbr_users = parse_num(value, line_no, key)?,
            "be_users" => cfg.be_users = parse_num(value, line_no, key)?,
            "cbr_targets" => cfg.cbr_targets = parse_list(value, line_no, key)?,
            "power_ratio" => cfg.power_ratio = parse_num(value, line_no, key)?,
            "min_drops" => cfg.min_drops = parse_num(value, line_no, key)?,
            "max_drops" => cfg.max_drops = parse_num(value, line_no, key)?,
            "sigma_norm" => cfg.sigma_norm = parse_num(value, line_no, key)?,
            "seed" => cfg.seed = parse_num(value, line_no, key)?,
            "ip_time_limit" => {
                let v: f64 = parse_num(value, line_no, key)?;
                cfg.ip_time_limit = (v > 0.0).then_some(v);
            }
            "algorithms" => {
                cfg.algorithms = value
                    .split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<AlgorithmId>()
                            .map_err(|e| parse_err(line_no, e))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "frames_per_drop" => cfg.channel.frames_per_drop = parse_num(value, line_no, key)?,
            "carrier_frequency" => cfg.channel.carrier_frequency = parse_num(value, line_no, key)?,
            "cell_radius" => cfg.channel.cell_radius = parse_num(value, line_no, key)?,
            "pathloss_exponent" => cfg.channel.pathloss_exponent = parse_num(value, line_no, key)?,
            "pathloss_ref_db" => cfg.channel.pathloss_ref_db = parse_num(value, line_no, key)?,
            "shadowing_sigma_db" => {
                cfg.channel.shadowing_sigma_db = parse_num(value, line_no, key)?
            }
            "num_taps" => cfg.channel.num_taps = parse_num(value, line_no, key)?,
            "doppler_correlation" => {
                cfg.channel.doppler_correlation = parse_num(value, line_no, key)?
            }
            "noise_density_dbm_hz" => {
                radio.noise_density_dbm_hz = parse_num(value, line_no, key)?
            }
            "subchannel_bandwidth" => radio.subchannel_bandwidth = parse_num(value, line_no, key)?,
            "error_rate" => radio.error_rate = parse_num(value, line_no, key)?,
            "max_order" => radio.max_order = parse_num(value, line_no, key)?,
            other => return Err(parse_err(line_no, format!("unknown key {other:?}"))),
        }
    }
    cfg.radio = RadioParams::from_dbm(
        radio.noise_density_dbm_hz,
        radio.subchannel_bandwidth,
        radio.error_rate,
        radio.max_order,
    )
    .map_err(|e| HarnessError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
