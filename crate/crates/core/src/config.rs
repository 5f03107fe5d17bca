//! `key = value` job configuration files.
//!
//! One setting per line; `#` starts a comment. Unknown and repeated keys are
//! errors. Keys left out fall back to the frequency/condition presets.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::batch::{AntennaRef, BatchJob, ExportFormat};
use crate::channel::{Condition, SimulationConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Missing(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

const KEYS: &[&str] = &[
    "frequency_ghz",
    "scenario",
    "condition",
    "tr_distance_m",
    "n_clusters_max",
    "mu_s_ns",
    "path_loss_exponent",
    "shadow_sigma_db",
    "seed",
    "n_realizations",
    "cluster_decay_ns",
    "subpath_decay_ns",
    "cluster_shadow_db",
    "max_subpaths",
    "max_lobes",
    "min_cluster_void_ns",
    "intra_delay_ratio",
    "lobe_zenith_sd_deg",
    "lobe_spread_deg",
    "tx_antenna",
    "rx_antenna",
    "output_dir",
    "worker_count",
    "export_formats",
    "pointing_step_deg",
    "detect_threshold_db",
    "tap_floor_db",
];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str, kind: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| at(line, format!("{key}: expected {kind}, found '{value}'")))
}

fn parse_real(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = parse_value(line, key, value, "a number")?;
    if !v.is_finite() {
        return Err(at(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_optional_real(line: usize, key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value == "none" {
        Ok(None)
    } else {
        parse_real(line, key, value).map(Some)
    }
}

/// Parses configuration text into a job. `base_dir` anchors relative
/// antenna file references and the output directory.
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<BatchJob, ConfigError> {
    let mut entries: Vec<(usize, &str, &str)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected 'key = value', found '{body}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(at(line, format!("unknown key '{key}'")));
        }
        if !seen.insert(key) {
            return Err(at(line, format!("duplicate key '{key}'")));
        }
        if value.is_empty() {
            return Err(at(line, format!("{key}: missing value")));
        }
        entries.push((line, key, value));
    }
    let find = |k: &str| entries.iter().find(|e| e.1 == k).map(|e| (e.0, e.2));

    let (fl, fv) = find("frequency_ghz").ok_or_else(|| ConfigError::Missing("missing required key 'frequency_ghz'".into()))?;
    let frequency = parse_real(fl, "frequency_ghz", fv)?;
    let condition = match find("condition") {
        Some((l, v)) => Condition::from_str(v).map_err(|e| at(l, e))?,
        None => Condition::default(),
    };
    let mut cfg = match find("mu_s_ns") {
        Some((l, v)) => SimulationConfig::with_mu_s(frequency, condition, parse_real(l, "mu_s_ns", v)?),
        None => SimulationConfig::preset(frequency, condition).map_err(|e| at(fl, e.to_string()))?,
    };
    let mut job = BatchJob::new(cfg.clone());

    for &(line, key, value) in &entries {
        let real = || parse_real(line, key, value);
        let count = || parse_value::<usize>(line, key, value, "a non-negative integer");
        match key {
            "frequency_ghz" | "condition" | "mu_s_ns" => {}
            "scenario" => cfg.scenario = value.parse().map_err(|e: String| at(line, e))?,
            "tr_distance_m" => cfg.tr_distance_m = real()?,
            "n_clusters_max" => cfg.n_clusters_max = count()?,
            "path_loss_exponent" => cfg.path_loss_exponent = real()?,
            "shadow_sigma_db" => cfg.shadow_sigma_db = real()?,
            "seed" => cfg.seed = parse_value(line, key, value, "a 32-bit unsigned integer")?,
            "n_realizations" => cfg.n_realizations = count()?,
            "cluster_decay_ns" => cfg.cluster_decay_ns = real()?,
            "subpath_decay_ns" => cfg.subpath_decay_ns = real()?,
            "cluster_shadow_db" => cfg.cluster_shadow_db = real()?,
            "max_subpaths" => cfg.max_subpaths = count()?,
            "max_lobes" => cfg.max_lobes = count()?,
            "min_cluster_void_ns" => cfg.min_cluster_void_ns = real()?,
            "intra_delay_ratio" => cfg.intra_delay_ratio = real()?,
            "lobe_zenith_sd_deg" => cfg.lobe_zenith_sd_deg = real()?,
            "lobe_spread_deg" => cfg.lobe_spread_deg = real()?,
            "tx_antenna" | "rx_antenna" => {
                let mut r: AntennaRef = value.parse().map_err(|e: String| at(line, e))?;
                if let (AntennaRef::File(p), Some(base)) = (&r, base_dir) {
                    if p.is_relative() {
                        r = AntennaRef::File(base.join(p));
                    }
                }
                if key == "tx_antenna" {
                    job.tx_antenna = r;
                } else {
                    job.rx_antenna = r;
                }
            }
            "output_dir" => {
                let p = PathBuf::from(value);
                job.output_dir = match base_dir {
                    Some(base) if p.is_relative() => base.join(p),
                    _ => p,
                };
            }
            "worker_count" => job.worker_count = count()?,
            "export_formats" => {
                let mut set = BTreeSet::new();
                for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    set.insert(part.parse::<ExportFormat>().map_err(|e| at(line, e))?);
                }
                job.export_formats = set;
            }
            "pointing_step_deg" => job.pointing_step_deg = parse_optional_real(line, key, value)?,
            "detect_threshold_db" => job.detect_threshold_db = real()?,
            "tap_floor_db" => job.tap_floor_db = parse_optional_real(line, key, value)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    job.config = cfg;
    Ok(job)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<BatchJob, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, path.parent())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

/// Writes every setting of `job` so that parsing the text reproduces it.
pub fn emit_config(job: &BatchJob) -> String {
    let c = &job.config;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("frequency_ghz", c.frequency_ghz.to_string());
    kv("scenario", c.scenario.to_string());
    kv("condition", c.condition.to_string());
    kv("tr_distance_m", c.tr_distance_m.to_string());
    kv("n_clusters_max", c.n_clusters_max.to_string());
    kv("mu_s_ns", c.mu_s_ns.to_string());
    kv("path_loss_exponent", c.path_loss_exponent.to_string());
    kv("shadow_sigma_db", c.shadow_sigma_db.to_string());
    kv("seed", c.seed.to_string());
    kv("n_realizations", c.n_realizations.to_string());
    kv("cluster_decay_ns", c.cluster_decay_ns.to_string());
    kv("subpath_decay_ns", c.subpath_decay_ns.to_string());
    kv("cluster_shadow_db", c.cluster_shadow_db.to_string());
    kv("max_subpaths", c.max_subpaths.to_string());
    kv("max_lobes", c.max_lobes.to_string());
    kv("min_cluster_void_ns", c.min_cluster_void_ns.to_string());
    kv("intra_delay_ratio", c.intra_delay_ratio.to_string());
    kv("lobe_zenith_sd_deg", c.lobe_zenith_sd_deg.to_string());
    kv("lobe_spread_deg", c.lobe_spread_deg.to_string());
    kv("tx_antenna", job.tx_antenna.to_string());
    kv("rx_antenna", job.rx_antenna.to_string());
    kv("output_dir", job.output_dir.display().to_string());
    kv("worker_count", job.worker_count.to_string());
    kv(
        "export_formats",
        job.export_formats.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(","),
    );
    kv("pointing_step_deg", opt(job.pointing_step_deg));
    kv("detect_threshold_db", job.detect_threshold_db.to_string());
    kv("tap_floor_db", opt(job.tap_floor_db));
    s
}
