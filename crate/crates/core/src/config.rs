//! Plain-text scenario files.
//!
//! One `key = value` per line, `#` starts a comment, blank lines are ignored.
//! `preset = <name>` (anywhere in the file) selects the starting point;
//! without it the file starts from `nlos_sparse` renamed to `custom`. Every
//! other key overrides one field. Unknown or repeated keys are errors.
//!
//! | key | value |
//! |-----|-------|
//! | `name` | output directory name |
//! | `n_tx`, `n_rx`, `n_ris` | array sizes |
//! | `n_paths` | sets both `n_paths_h` and `n_paths_g` |
//! | `n_paths_h`, `n_paths_g` | paths per hop |
//! | `los` | `true` / `false` |
//! | `los_power_ratio_db` | LoS-to-NLoS per-path power ratio |
//! | `seed` | base seed |
//! | `n_realizations` | Monte Carlo realizations |
//! | `snr_grid_db` | comma-separated, strictly increasing |
//! | `snr_range_db` | `start:stop:step` |
//! | `designs` | comma-separated design names |
//! | `budget_mode` | `per_antenna` / `per_symbol_total` |
//! | `snr_reference` | `per_design` / `shared` |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::designs::DesignKind;
use crate::experiments::{preset, snr_grid, ScenarioConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, key `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

pub fn parse_scenario_file(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

fn number<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| parse_err(line, key, format!("cannot parse {value:?}")))
}

fn positive(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    let n: usize = number(line, key, value)?;
    if n == 0 {
        return Err(parse_err(line, key, "must be at least 1"));
    }
    Ok(n)
}

fn float_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| {
            let x: f64 = number(line, key, s.trim())?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(parse_err(line, key, "values must be finite"))
            }
        })
        .collect()
}

fn increasing(line: usize, key: &str, grid: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(parse_err(line, key, "grid must be strictly increasing"));
    }
    Ok(grid)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_err(line, content, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(parse_err(line, key, "empty key or value"));
        }
        if !seen.insert(key.to_string()) {
            return Err(parse_err(line, key, "key given more than once"));
        }
        entries.push((line, key.to_string(), value.to_string()));
    }

    let mut cfg = match entries.iter().find(|(_, k, _)| k == "preset") {
        Some((line, key, name)) => {
            preset(name).ok_or_else(|| parse_err(*line, key, format!("unknown preset {name:?}")))?
        }
        None => {
            let mut base = preset("nlos_sparse").expect("built-in preset");
            base.name = "custom".into();
            base
        }
    };
    if seen.contains("n_paths") && (seen.contains("n_paths_h") || seen.contains("n_paths_g")) {
        let line = entries.iter().find(|(_, k, _)| k == "n_paths").map_or(0, |e| e.0);
        return Err(parse_err(line, "n_paths", "conflicts with n_paths_h / n_paths_g"));
    }
    if seen.contains("snr_grid_db") && seen.contains("snr_range_db") {
        let line = entries.iter().find(|(_, k, _)| k == "snr_range_db").map_or(0, |e| e.0);
        return Err(parse_err(line, "snr_range_db", "conflicts with snr_grid_db"));
    }

    for (line, key, value) in &entries {
        let (line, key, value) = (*line, key.as_str(), value.as_str());
        match key {
            "preset" => {}
            "name" => {
                if value.contains(['/', '\\']) {
                    return Err(parse_err(line, key, "name cannot contain path separators"));
                }
                cfg.name = value.to_string();
            }
            "n_tx" => cfg.channel.n_tx = positive(line, key, value)?,
            "n_rx" => cfg.channel.n_rx = positive(line, key, value)?,
            "n_ris" => cfg.channel.n_ris = positive(line, key, value)?,
            "n_paths" => {
                let n = positive(line, key, value)?;
                cfg.channel.n_paths_h = n;
                cfg.channel.n_paths_g = n;
            }
            "n_paths_h" => cfg.channel.n_paths_h = positive(line, key, value)?,
            "n_paths_g" => cfg.channel.n_paths_g = positive(line, key, value)?,
            "los" => cfg.channel.los = number(line, key, value)?,
            "los_power_ratio_db" => {
                let x: f64 = number(line, key, value)?;
                if !x.is_finite() {
                    return Err(parse_err(line, key, "must be finite"));
                }
                cfg.channel.los_power_ratio_db = x;
            }
            "seed" => cfg.channel.seed = number(line, key, value)?,
            "n_realizations" => cfg.n_realizations = positive(line, key, value)?,
            "snr_grid_db" => cfg.snr_grid_db = increasing(line, key, float_list(line, key, value)?)?,
            "snr_range_db" => {
                let parts: Vec<f64> = value
                    .split(':')
                    .map(|s| number(line, key, s.trim()))
                    .collect::<Result<_, _>>()?;
                let [start, stop, step] = parts[..] else {
                    return Err(parse_err(line, key, "expected start:stop:step"));
                };
                if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                    return Err(parse_err(line, key, "need step > 0 and stop >= start"));
                }
                cfg.snr_grid_db = snr_grid(start, stop, step);
            }
            "designs" => {
                let mut kinds: Vec<DesignKind> = value
                    .split(',')
                    .map(|s| {
                        s.parse()
                            .map_err(|e: crate::designs::DesignError| parse_err(line, key, e.to_string()))
                    })
                    .collect::<Result<_, _>>()?;
                kinds.sort();
                if kinds.windows(2).any(|w| w[0] == w[1]) {
                    return Err(parse_err(line, key, "design listed twice"));
                }
                cfg.designs = kinds;
            }
            "budget_mode" => cfg.budget_mode = value.parse().map_err(|e: String| parse_err(line, key, e))?,
            "snr_reference" => cfg.snr_reference = value.parse().map_err(|e: String| parse_err(line, key, e))?,
            _ => return Err(parse_err(line, key, "unknown key")),
        }
    }
    cfg.validate().map_err(|e| parse_err(0, "<scenario>", e.to_string()))?;
    Ok(cfg)
}

/// Full key-value echo of `cfg`; parses back to an identical config.
pub fn to_config_string(cfg: &ScenarioConfig) -> String {
    let join = |xs: Vec<String>| xs.join(", ");
    let ch = &cfg.channel;
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", cfg.name);
    let _ = writeln!(out, "n_tx = {}", ch.n_tx);
    let _ = writeln!(out, "n_rx = {}", ch.n_rx);
    let _ = writeln!(out, "n_ris = {}", ch.n_ris);
    let _ = writeln!(out, "n_paths_h = {}", ch.n_paths_h);
    let _ = writeln!(out, "n_paths_g = {}", ch.n_paths_g);
    let _ = writeln!(out, "los = {}", ch.los);
    let _ = writeln!(out, "los_power_ratio_db = {}", ch.los_power_ratio_db);
    let _ = writeln!(out, "seed = {}", ch.seed);
    let _ = writeln!(out, "n_realizations = {}", cfg.n_realizations);
    let _ = writeln!(
        out,
        "snr_grid_db = {}",
        join(cfg.snr_grid_db.iter().map(|s| s.to_string()).collect())
    );
    let _ = writeln!(
        out,
        "designs = {}",
        join(cfg.designs.iter().map(|d| d.label().to_string()).collect())
    );
    let _ = writeln!(out, "budget_mode = {}", cfg.budget_mode);
    let _ = writeln!(out, "snr_reference = {}", cfg.snr_reference);
    out
}
