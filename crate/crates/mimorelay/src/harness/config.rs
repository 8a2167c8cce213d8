//! Flat key-value experiment configuration.
//!
//! Powers may be given in linear units (`P_s = 10.0`) or in dB
//! (`P_s_dB = 10`); dB is converted at this boundary and the rest of the
//! crate only ever sees linear values.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::harness::emit::Format;

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub experiment: String,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Full-resolution sweep grids instead of the reduced defaults.
    pub full: bool,

    pub antennas: Option<usize>,
    pub pairs: Option<usize>,
    pub pilot_len: Option<usize>,
    pub gain: Option<f64>,
    pub coherence: Option<usize>,

    pub user_power: Option<f64>,
    pub relay_power: Option<f64>,
    pub pilot_power: Option<f64>,
    pub user_budget: Option<f64>,
    pub relay_budget: Option<f64>,
    pub alpha: Option<f64>,
    pub total_transmit: Option<f64>,

    pub amp_efficiency: Option<f64>,
    pub rf_chain_power: Option<f64>,
    pub static_power: Option<f64>,
    pub shifter_power: Option<f64>,

    pub bits: Option<u32>,
    pub paths: Option<usize>,
    pub spacing: Option<f64>,
}

const VALID_KEYS: &[&str] = &[
    "experiment", "trials", "seed", "format", "out", "full",
    "N", "K", "L", "tau", "beta", "T",
    "P_s", "P_s_dB", "P_r", "P_r_dB", "P_p", "P_p_dB", "perfect_csi",
    "E_s", "E_s_dB", "E_r", "E_r_dB", "alpha", "P_T", "P_T_dB",
    "kappa", "P_0", "P_const", "P_APS",
    "B", "paths", "spacing",
];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

struct Raw(toml::map::Map<String, toml::Value>);

impl Raw {
    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::Config(format!(
                "key `{key}` must be a number, got {}",
                v.type_str()
            ))),
        }
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(toml::Value::Integer(i)) => Err(Error::Config(format!(
                "key `{key}` must be nonnegative, got {i}"
            ))),
            Some(v) => Err(Error::Config(format!(
                "key `{key}` must be an integer, got {}",
                v.type_str()
            ))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.unsigned(key)?.map(|v| v as usize))
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Error::Config(format!(
                "key `{key}` must be a string, got {}",
                v.type_str()
            ))),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(Error::Config(format!(
                "key `{key}` must be a boolean, got {}",
                v.type_str()
            ))),
        }
    }

    /// A power given either linearly or as `<key>_dB`, but not both.
    fn power(&self, key: &str) -> Result<Option<f64>> {
        let db_key = format!("{key}_dB");
        let linear = self.float(key)?;
        let db = self.float(&db_key)?;
        match (linear, db) {
            (Some(_), Some(_)) => Err(Error::Config(format!(
                "specify either `{key}` or `{db_key}`, not both"
            ))),
            (Some(v), None) => {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("`{key}` must be positive")));
                }
                Ok(Some(v))
            }
            (None, Some(db)) => Ok(Some(db_to_linear(db))),
            (None, None) => Ok(None),
        }
    }
}

/// Parse a config file; the `experiment` key is required.
pub fn parse_config(text: &str) -> Result<Config> {
    parse_config_with_experiment(text, None)
}

/// Parse a config file, letting a CLI-supplied experiment name stand in for
/// (or cross-check) the `experiment` key.
pub fn parse_config_with_experiment(text: &str, cli_experiment: Option<&str>) -> Result<Config> {
    let table: toml::map::Map<String, toml::Value> = text
        .parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("malformed config: {e}")))?;

    for key in table.keys() {
        if !VALID_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "unknown key `{key}`; valid keys are: {}",
                VALID_KEYS.join(", ")
            )));
        }
    }
    let raw = Raw(table);

    let experiment = match (raw.string("experiment")?, cli_experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!(
                "config names experiment `{a}` but `{b}` was requested"
            )))
        }
        (Some(a), _) => a.to_string(),
        (None, Some(b)) => b.to_string(),
        (None, None) => {
            return Err(Error::Config(
                "missing required key `experiment`".into(),
            ))
        }
    };

    let trials = raw.count("trials")?.unwrap_or(10_000);
    if trials == 0 {
        return Err(Error::Config("`trials` must be >= 1".into()));
    }

    let format = match raw.string("format")? {
        None => Format::Csv,
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => {
            return Err(Error::Config(format!(
                "`format` must be `csv` or `json`, got `{other}`"
            )))
        }
    };

    let pairs = raw.count("K")?;
    if let Some(l) = raw.count("L")? {
        match pairs {
            Some(k) if l == 2 * k => {}
            Some(k) => {
                return Err(Error::Config(format!(
                    "L must equal 2K (got L = {l}, K = {k})"
                )))
            }
            None => {
                return Err(Error::Config(
                    "`L` given without `K`; the RF-chain count is tied to L = 2K".into(),
                ))
            }
        }
    }

    let mut pilot_power = raw.power("P_p")?;
    if raw.boolean("perfect_csi")?.unwrap_or(false) {
        if pilot_power.is_some() {
            return Err(Error::Config(
                "`perfect_csi = true` conflicts with an explicit pilot power".into(),
            ));
        }
        pilot_power = Some(f64::INFINITY);
    }

    Ok(Config {
        experiment,
        trials,
        seed: raw.unsigned("seed")?.unwrap_or(0),
        format,
        out: raw.string("out")?.map(PathBuf::from),
        full: raw.boolean("full")?.unwrap_or(false),
        antennas: raw.count("N")?,
        pairs,
        pilot_len: raw.count("tau")?,
        gain: raw.float("beta")?,
        coherence: raw.count("T")?,
        user_power: raw.power("P_s")?,
        relay_power: raw.power("P_r")?,
        pilot_power,
        user_budget: raw.power("E_s")?,
        relay_budget: raw.power("E_r")?,
        alpha: raw.float("alpha")?,
        total_transmit: raw.power("P_T")?,
        amp_efficiency: raw.float("kappa")?,
        rf_chain_power: raw.float("P_0")?,
        static_power: raw.float("P_const")?,
        shifter_power: raw.float("P_APS")?,
        bits: raw.count("B")?.map(|b| b as u32),
        paths: raw.count("paths")?,
        spacing: raw.float("spacing")?,
    })
}
