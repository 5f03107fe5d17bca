//! Deterministic parallel batch generation and dataset export.
//!
//! Realization `i` is generated from its own stream seeded with
//! `derive_seed(config.seed, i)`, so exported files depend only on the job
//! and never on the number of workers or their scheduling.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::antenna::{read_ant3d, synthesize_3gpp, AntennaError, AntennaPattern, ThreeGppParams, DEFAULT_GRID_STEP_DEG};
use crate::calibration::{CalibrationError, DirectionalSampler, HornSpec, DEFAULT_TAP_FLOOR_DB};
use crate::channel::{ChannelError, SimulationConfig};
use crate::directional::{omni_rms_delay_spread, power_delay_profile, PointingGrid, SweepConfig, DEFAULT_DETECT_THRESHOLD_DB};
use crate::stats::{cdf_csv_string, empirical_cdf, log10_ds_stats, DelaySpreadStats, SampleSet};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Pointing step used when neither antenna declares a beamwidth.
pub const DEFAULT_POINTING_STEP_DEG: f64 = 30.0;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Murmur3 32-bit finalizer; a bijection on `u32`.
fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}

/// Avalanche of `mix(base) ^ index`.
///
/// The base is mixed before the XOR. With a raw `base ^ index`, runs whose
/// bases differ only in low bits would enumerate the same seed set. The
/// final mix is bijective, so indices below 2^32 never collide for a fixed
/// base.
pub fn derive_seed(base: u32, index: u64) -> u32 {
    let b = splitmix64(u64::from(base));
    let key = (b >> 32) as u32 ^ b as u32;
    fmix32(key ^ (index >> 32) as u32 ^ index as u32)
}

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("antenna '{reference}': {source}")]
    Antenna {
        reference: String,
        #[source]
        source: AntennaError,
    },
    #[error("output directory {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

/// Where a TX or RX pattern comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaRef {
    Isotropic { gain_dbi: f64 },
    ThreeGpp,
    Horn(HornSpec),
    /// The reference horn of the configured band.
    BandHorn,
    File(PathBuf),
}

impl fmt::Display for AntennaRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AntennaRef::Isotropic { gain_dbi } if *gain_dbi == 0.0 => f.write_str("isotropic"),
            AntennaRef::Isotropic { gain_dbi } => write!(f, "isotropic:{gain_dbi}"),
            AntennaRef::ThreeGpp => f.write_str("3gpp"),
            AntennaRef::Horn(h) => write!(f, "horn:{}:{}", h.peak_gain_dbi, h.hpbw_deg),
            AntennaRef::BandHorn => f.write_str("horn"),
            AntennaRef::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl FromStr for AntennaRef {
    type Err = String;

    /// `isotropic[:gain_dbi]`, `3gpp`, `horn`, `horn:<peak_dbi>:<hpbw_deg>`,
    /// or a path to an Ant3D file.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("'{v}' is not a number in antenna reference '{s}'"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["isotropic"] => Ok(AntennaRef::Isotropic { gain_dbi: 0.0 }),
            ["isotropic", g] => Ok(AntennaRef::Isotropic { gain_dbi: num(g)? }),
            ["3gpp"] => Ok(AntennaRef::ThreeGpp),
            ["horn"] => Ok(AntennaRef::BandHorn),
            ["horn", g, w] => Ok(AntennaRef::Horn(HornSpec {
                peak_gain_dbi: num(g)?,
                hpbw_deg: num(w)?,
            })),
            ["isotropic", ..] | ["3gpp", ..] | ["horn", ..] => Err(format!("malformed antenna reference '{s}'")),
            _ if s.is_empty() => Err("empty antenna reference".into()),
            _ => Ok(AntennaRef::File(PathBuf::from(s))),
        }
    }
}

impl AntennaRef {
    fn horn(&self, frequency_ghz: f64) -> Option<HornSpec> {
        match self {
            AntennaRef::Horn(h) => Some(*h),
            AntennaRef::BandHorn => HornSpec::for_band(frequency_ghz),
            _ => None,
        }
    }

    pub fn resolve(&self, frequency_ghz: f64) -> Result<AntennaPattern, BatchError> {
        let wrap = |source| BatchError::Antenna {
            reference: self.to_string(),
            source,
        };
        match self {
            AntennaRef::Isotropic { gain_dbi } => AntennaPattern::isotropic(*gain_dbi, DEFAULT_GRID_STEP_DEG).map_err(wrap),
            AntennaRef::ThreeGpp => synthesize_3gpp(&ThreeGppParams::default(), DEFAULT_GRID_STEP_DEG).map_err(wrap),
            AntennaRef::Horn(_) | AntennaRef::BandHorn => {
                let h = self.horn(frequency_ghz).ok_or_else(|| {
                    BatchError::Config(format!("no reference horn for {frequency_ghz} GHz; use horn:<dbi>:<hpbw>"))
                })?;
                h.pattern(DEFAULT_GRID_STEP_DEG).map_err(wrap)
            }
            AntennaRef::File(p) => read_ant3d(p).map_err(wrap),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExportFormat {
    CirCsv,
    PdpCsv,
    DsSummary,
    CdfPoints,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [
        ExportFormat::CirCsv,
        ExportFormat::PdpCsv,
        ExportFormat::DsSummary,
        ExportFormat::CdfPoints,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExportFormat::CirCsv => "cir_csv",
            ExportFormat::PdpCsv => "pdp_csv",
            ExportFormat::DsSummary => "ds_summary",
            ExportFormat::CdfPoints => "cdf_points",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown export format '{s}' (expected cir_csv, pdp_csv, ds_summary or cdf_points)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchJob {
    pub config: SimulationConfig,
    pub tx_antenna: AntennaRef,
    pub rx_antenna: AntennaRef,
    pub output_dir: PathBuf,
    pub worker_count: usize,
    pub export_formats: BTreeSet<ExportFormat>,
    /// Pointing step for the directional sweep; defaults to the horn HPBW.
    pub pointing_step_deg: Option<f64>,
    pub detect_threshold_db: f64,
    pub tap_floor_db: Option<f64>,
}

impl BatchJob {
    pub fn new(config: SimulationConfig) -> Self {
        BatchJob {
            config,
            tx_antenna: AntennaRef::Isotropic { gain_dbi: 0.0 },
            rx_antenna: AntennaRef::Isotropic { gain_dbi: 0.0 },
            output_dir: PathBuf::from("out"),
            worker_count: 1,
            export_formats: ExportFormat::ALL.into_iter().collect(),
            pointing_step_deg: None,
            detect_threshold_db: DEFAULT_DETECT_THRESHOLD_DB,
            tap_floor_db: Some(DEFAULT_TAP_FLOOR_DB),
        }
    }

    pub fn effective_pointing_step_deg(&self) -> f64 {
        let f = self.config.frequency_ghz;
        self.pointing_step_deg
            .or_else(|| self.tx_antenna.horn(f).map(|h| h.hpbw_deg))
            .or_else(|| self.rx_antenna.horn(f).map(|h| h.hpbw_deg))
            .unwrap_or(DEFAULT_POINTING_STEP_DEG)
    }

    pub fn validate(&self) -> Result<(), BatchError> {
        self.config.validate()?;
        if self.worker_count == 0 {
            return Err(BatchError::Config("worker_count must be at least 1".into()));
        }
        if self.export_formats.is_empty() {
            return Err(BatchError::Config("export_formats is empty".into()));
        }
        let step = self.effective_pointing_step_deg();
        if !(step > 0.0 && step <= 360.0) {
            return Err(BatchError::Config(format!("pointing_step_deg must be in (0, 360], got {step}")));
        }
        if !(self.detect_threshold_db >= 0.0) {
            return Err(BatchError::Config("detect_threshold_db must be non-negative".into()));
        }
        if let Some(f) = self.tap_floor_db {
            if !(f >= 0.0) {
                return Err(BatchError::Config("tap_floor_db must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub first_realization: usize,
    pub last_realization: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub n_realizations: usize,
    pub omni_log10_ds: Option<DelaySpreadStats>,
    pub directional_samples: usize,
    pub directional_log10_ds: Option<DelaySpreadStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub manifest_format_version: u32,
    pub config: SimulationConfig,
    pub tx_antenna: String,
    pub rx_antenna: String,
    pub pointing_step_deg: f64,
    pub detect_threshold_db: f64,
    pub tap_floor_db: Option<f64>,
    pub files: Vec<ManifestFile>,
    pub summary: BatchSummary,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Row {
    cir: String,
    pdp: String,
    summary: String,
    omni_ds: f64,
    directional_ds: Option<f64>,
}

/// Runs the job and writes the requested exports plus `manifest.json`.
/// Antennas, configuration and the output directory are all checked before
/// any realization is generated, and nothing is written unless every
/// realization succeeds.
pub fn run_batch(job: &BatchJob) -> Result<Manifest, BatchError> {
    job.validate()?;
    let f = job.config.frequency_ghz;
    let tx = job.tx_antenna.resolve(f)?;
    let rx = job.rx_antenna.resolve(f)?;
    let out_err = |source| BatchError::Output {
        path: job.output_dir.clone(),
        source,
    };
    if job.output_dir.exists() && !job.output_dir.is_dir() {
        return Err(out_err(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            "exists and is not a directory",
        )));
    }
    if let Ok(meta) = std::fs::metadata(&job.output_dir) {
        if meta.permissions().readonly() {
            return Err(out_err(std::io::Error::new(std::io::ErrorKind::PermissionDenied, "read-only")));
        }
    }

    let step = job.effective_pointing_step_deg();
    let sampler = DirectionalSampler {
        config: &job.config,
        tx_pattern: &tx,
        rx_pattern: &rx,
        grid: PointingGrid::hpbw_rings(step),
        sweep: SweepConfig {
            detect_threshold_db: job.detect_threshold_db,
            tap_floor_db: job.tap_floor_db,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.worker_count)
        .build()
        .map_err(|e| BatchError::Config(format!("cannot start worker pool: {e}")))?;
    let base = job.config.seed;
    let rows: Vec<Row> = pool.install(|| {
        (0..job.config.n_realizations)
            .into_par_iter()
            .map(|i| render_row(&sampler, i, derive_seed(base, i as u64)))
            .collect::<Result<_, _>>()
    })?;

    let n = rows.len();
    let omni: Vec<f64> = rows.iter().map(|r| r.omni_ds).collect();
    let directional: Vec<f64> = rows.iter().filter_map(|r| r.directional_ds).collect();
    let stats_of = |label: &str, v: &[f64]| {
        SampleSet::new(label, v.to_vec())
            .ok()
            .and_then(|s| log10_ds_stats(&s).ok())
    };
    let summary = BatchSummary {
        n_realizations: n,
        omni_log10_ds: stats_of("omni", &omni),
        directional_samples: directional.len(),
        directional_log10_ds: stats_of("directional", &directional),
    };

    let mut files: Vec<(String, String)> = Vec::new();
    if job.export_formats.contains(&ExportFormat::CirCsv) {
        let mut s = String::from("realization,cluster,lobe,delay_ns,power_db,phase_rad,aod_deg,zod_deg,aoa_deg,zoa_deg\n");
        rows.iter().for_each(|r| s.push_str(&r.cir));
        files.push(("components.csv".into(), s));
    }
    if job.export_formats.contains(&ExportFormat::PdpCsv) {
        let mut s = String::from("realization,delay_ns,power_db\n");
        rows.iter().for_each(|r| s.push_str(&r.pdp));
        files.push(("pdp.csv".into(), s));
    }
    if job.export_formats.contains(&ExportFormat::DsSummary) {
        let mut s = String::from("realization,n_clusters,n_paths,path_loss_db,omni_rms_ds_ns\n");
        rows.iter().for_each(|r| s.push_str(&r.summary));
        files.push(("summary.csv".into(), s));
        let mut d = String::from("realization,directional_rms_ds_ns\n");
        for (i, r) in rows.iter().enumerate() {
            if let Some(v) = r.directional_ds {
                let _ = writeln!(d, "{i},{v}");
            }
        }
        files.push(("directional_ds.csv".into(), d));
    }
    if job.export_formats.contains(&ExportFormat::CdfPoints) {
        for (name, v) in [("omni_ds_cdf.csv", &omni), ("directional_ds_cdf.csv", &directional)] {
            let points = SampleSet::new(name, v.clone())
                .ok()
                .and_then(|s| empirical_cdf(&s).ok())
                .unwrap_or_default();
            files.push((name.into(), cdf_csv_string(&points)));
        }
    }

    std::fs::create_dir_all(&job.output_dir).map_err(out_err)?;
    let mut manifest_files = Vec::with_capacity(files.len());
    for (name, content) in &files {
        std::fs::write(job.output_dir.join(name), content).map_err(out_err)?;
        manifest_files.push(ManifestFile {
            path: name.clone(),
            first_realization: 0,
            last_realization: n.saturating_sub(1),
            sha256: sha256_hex(content.as_bytes()),
        });
    }
    let manifest = Manifest {
        artifact_version: ARTIFACT_VERSION.to_string(),
        manifest_format_version: MANIFEST_FORMAT_VERSION,
        config: job.config.clone(),
        tx_antenna: job.tx_antenna.to_string(),
        rx_antenna: job.rx_antenna.to_string(),
        pointing_step_deg: step,
        detect_threshold_db: job.detect_threshold_db,
        tap_floor_db: job.tap_floor_db,
        files: manifest_files,
        summary,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    std::fs::write(job.output_dir.join(MANIFEST_FILE), json).map_err(out_err)?;
    Ok(manifest)
}

fn render_row(sampler: &DirectionalSampler<'_>, index: usize, seed: u32) -> Result<Row, BatchError> {
    let outcome = sampler.run(seed)?;
    let r = &outcome.realization;
    let mut cir = String::new();
    for c in &r.components {
        let _ = writeln!(
            cir,
            "{index},{},{},{},{},{},{},{},{},{}",
            c.cluster_index,
            c.lobe_index,
            c.delay_ns,
            10.0 * c.power().log10(),
            c.phase_rad,
            c.aod_deg,
            c.zod_deg,
            c.aoa_deg,
            c.zoa_deg
        );
    }
    let mut pdp = String::new();
    for (d, p) in power_delay_profile(&r.components).taps {
        let _ = writeln!(pdp, "{index},{d},{}", 10.0 * p.log10());
    }
    let omni_ds = omni_rms_delay_spread(r).map_err(CalibrationError::from)?;
    let summary = format!(
        "{index},{},{},{},{}\n",
        r.n_time_clusters,
        r.components.len(),
        r.path_loss_db,
        omni_ds
    );
    Ok(Row {
        cir,
        pdp,
        summary,
        omni_ds,
        directional_ds: outcome.directional_ds_ns,
    })
}

/// Re-hashes every file listed in the manifest under `dir`; returns the
/// names whose checksum no longer matches.
pub fn verify_manifest(manifest: &Manifest, dir: &Path) -> std::io::Result<Vec<String>> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        let bytes = std::fs::read(dir.join(&f.path))?;
        if sha256_hex(&bytes) != f.sha256 {
            bad.push(f.path.clone());
        }
    }
    Ok(bad)
}
