//! Omnidirectional time-cluster/spatial-lobe channel generation.
//!
//! Draw order for one realization, all from the caller's stream:
//!
//! 1. cluster count `N = 1 + uniform_int(N_c)`;
//! 2. `N - 1` inter-cluster gaps, `exponential(μ_s)` each;
//! 3. per cluster in order: subpath count `1 + uniform_int(max_subpaths)`,
//!    then one `exponential(μ_s · intra_delay_ratio)` per subpath after the
//!    first (the first subpath of a cluster arrives at intra-cluster delay 0);
//! 4. `N` cluster shadowing terms, `normal(0, cluster_shadow_db)`;
//! 5. lobe count `L = 1 + uniform_int(max_lobes)`, then per lobe: TX
//!    azimuth `uniform(0, 360)`, TX zenith `normal(90, lobe_zenith_sd_deg)`,
//!    RX azimuth, RX zenith;
//! 6. per component in cluster/subpath order: lobe `uniform_int(L)`, then
//!    AOD, ZOD, AOA, ZOA offsets `normal(0, lobe_spread_deg)`;
//! 7. per component: phase `2π · uniform`;
//! 8. path-loss shadow fading `normal(0, shadow_sigma_db)`.
//!
//! Cluster `n` starts after the last subpath of cluster `n - 1` plus a
//! minimum void and the drawn gap, so clusters never overlap in delay.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::rng::{RandomStream, RngError, WordSource};

/// Speed of light used for the free-space reference term, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("distance {0} m is below the 1 m reference distance")]
    DistanceBelowReference(f64),
    #[error(transparent)]
    Rng(#[from] RngError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum Scenario {
    #[default]
    UMi,
    UMa,
    RMa,
    InF,
    InH,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::UMi => "UMi",
            Scenario::UMa => "UMa",
            Scenario::RMa => "RMa",
            Scenario::InF => "InF",
            Scenario::InH => "InH",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        for v in [Scenario::UMi, Scenario::UMa, Scenario::RMa, Scenario::InF, Scenario::InH] {
            if s.eq_ignore_ascii_case(v.as_str()) {
                return Ok(v);
            }
        }
        Err(format!("unknown scenario '{s}' (expected UMi, UMa, RMa, InF or InH)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Default)]
pub enum Condition {
    #[default]
    Los,
    Nlos,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Los => "LOS",
            Condition::Nlos => "NLOS",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "LOS" => Ok(Condition::Los),
            "NLOS" => Ok(Condition::Nlos),
            _ => Err(format!("unknown condition '{s}' (expected LOS or NLOS)")),
        }
    }
}

/// Calibrated mean inter-cluster delay μ_s in ns, where one exists.
pub fn preset_mu_s_ns(frequency_ghz: f64, condition: Condition) -> Option<f64> {
    let close = |f: f64| (frequency_ghz - f).abs() < 1e-9;
    match condition {
        Condition::Los if close(16.95) => Some(30.0),
        Condition::Nlos if close(16.95) => Some(32.0),
        Condition::Los if close(6.75) => Some(18.0),
        Condition::Nlos if close(6.75) => Some(22.0),
        _ => None,
    }
}

pub fn default_path_loss_exponent(condition: Condition) -> f64 {
    match condition {
        Condition::Los => 2.0,
        Condition::Nlos => 3.0,
    }
}

pub fn default_shadow_sigma_db(condition: Condition) -> f64 {
    match condition {
        Condition::Los => 4.0,
        Condition::Nlos => 8.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub frequency_ghz: f64,
    pub scenario: Scenario,
    pub condition: Condition,
    pub tr_distance_m: f64,
    /// Maximum number of time clusters, N_c.
    pub n_clusters_max: usize,
    /// Mean of the exponential inter-cluster gap, ns.
    pub mu_s_ns: f64,
    pub path_loss_exponent: f64,
    pub shadow_sigma_db: f64,
    pub seed: u32,
    pub n_realizations: usize,
    /// Cluster power decay constant Γ, ns.
    pub cluster_decay_ns: f64,
    /// Subpath power decay constant γ, ns.
    pub subpath_decay_ns: f64,
    pub cluster_shadow_db: f64,
    pub max_subpaths: usize,
    pub max_lobes: usize,
    /// Empty interval inserted between consecutive clusters, ns.
    pub min_cluster_void_ns: f64,
    /// Intra-cluster mean delay as a fraction of μ_s.
    pub intra_delay_ratio: f64,
    pub lobe_zenith_sd_deg: f64,
    pub lobe_spread_deg: f64,
}

pub const DEFAULT_N_CLUSTERS_MAX: usize = 4;
pub const DEFAULT_CLUSTER_DECAY_NS: f64 = 150.0;
pub const DEFAULT_SUBPATH_DECAY_NS: f64 = 30.0;
pub const DEFAULT_CLUSTER_SHADOW_DB: f64 = 3.0;
pub const DEFAULT_MAX_SUBPATHS: usize = 5;
pub const DEFAULT_MAX_LOBES: usize = 2;
pub const DEFAULT_MIN_CLUSTER_VOID_NS: f64 = 20.0;
pub const DEFAULT_INTRA_DELAY_RATIO: f64 = 0.5;
pub const DEFAULT_LOBE_ZENITH_SD_DEG: f64 = 10.0;
pub const DEFAULT_LOBE_SPREAD_DEG: f64 = 5.0;

impl SimulationConfig {
    /// Configuration for a calibrated band; fails for frequencies without a
    /// μ_s preset (set `mu_s_ns` explicitly through [`SimulationConfig::with_mu_s`]).
    pub fn preset(frequency_ghz: f64, condition: Condition) -> Result<Self, ChannelError> {
        let mu = preset_mu_s_ns(frequency_ghz, condition).ok_or_else(|| {
            ChannelError::InvalidConfig(format!(
                "no mu_s preset for {frequency_ghz} GHz {condition}; set mu_s_ns explicitly"
            ))
        })?;
        Ok(Self::with_mu_s(frequency_ghz, condition, mu))
    }

    pub fn with_mu_s(frequency_ghz: f64, condition: Condition, mu_s_ns: f64) -> Self {
        SimulationConfig {
            frequency_ghz,
            scenario: Scenario::default(),
            condition,
            tr_distance_m: 100.0,
            n_clusters_max: DEFAULT_N_CLUSTERS_MAX,
            mu_s_ns,
            path_loss_exponent: default_path_loss_exponent(condition),
            shadow_sigma_db: default_shadow_sigma_db(condition),
            seed: 1,
            n_realizations: 1,
            cluster_decay_ns: DEFAULT_CLUSTER_DECAY_NS,
            subpath_decay_ns: DEFAULT_SUBPATH_DECAY_NS,
            cluster_shadow_db: DEFAULT_CLUSTER_SHADOW_DB,
            max_subpaths: DEFAULT_MAX_SUBPATHS,
            max_lobes: DEFAULT_MAX_LOBES,
            min_cluster_void_ns: DEFAULT_MIN_CLUSTER_VOID_NS,
            intra_delay_ratio: DEFAULT_INTRA_DELAY_RATIO,
            lobe_zenith_sd_deg: DEFAULT_LOBE_ZENITH_SD_DEG,
            lobe_spread_deg: DEFAULT_LOBE_SPREAD_DEG,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let bad = |msg: String| Err(ChannelError::InvalidConfig(msg));
        let positive = [
            ("frequency_ghz", self.frequency_ghz),
            ("mu_s_ns", self.mu_s_ns),
            ("cluster_decay_ns", self.cluster_decay_ns),
            ("subpath_decay_ns", self.subpath_decay_ns),
            ("intra_delay_ratio", self.intra_delay_ratio),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let non_negative = [
            ("path_loss_exponent", self.path_loss_exponent),
            ("shadow_sigma_db", self.shadow_sigma_db),
            ("cluster_shadow_db", self.cluster_shadow_db),
            ("min_cluster_void_ns", self.min_cluster_void_ns),
            ("lobe_zenith_sd_deg", self.lobe_zenith_sd_deg),
            ("lobe_spread_deg", self.lobe_spread_deg),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if !(self.tr_distance_m >= 1.0) || !self.tr_distance_m.is_finite() {
            return bad(format!("tr_distance_m must be at least 1, got {}", self.tr_distance_m));
        }
        for (name, v) in [
            ("n_clusters_max", self.n_clusters_max),
            ("max_subpaths", self.max_subpaths),
            ("max_lobes", self.max_lobes),
            ("n_realizations", self.n_realizations),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipathComponent {
    pub amplitude: f64,
    pub phase_rad: f64,
    pub delay_ns: f64,
    pub aod_deg: f64,
    pub zod_deg: f64,
    pub aoa_deg: f64,
    pub zoa_deg: f64,
    pub cluster_index: usize,
    pub lobe_index: usize,
}

impl MultipathComponent {
    pub fn power(&self) -> f64 {
        self.amplitude * self.amplitude
    }
}

/// Temporal structure of a realization before powers and angles.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSkeleton {
    /// Exponential gap draws between consecutive clusters (`N - 1` values).
    pub gaps_ns: Vec<f64>,
    /// Cluster start delays; the first is 0 and they strictly increase.
    pub cluster_delays_ns: Vec<f64>,
    /// Sorted intra-cluster excess delays per cluster, first entry 0.
    pub subpath_delays_ns: Vec<Vec<f64>>,
}

impl ClusterSkeleton {
    pub fn n_clusters(&self) -> usize {
        self.cluster_delays_ns.len()
    }

    pub fn n_components(&self) -> usize {
        self.subpath_delays_ns.iter().map(Vec::len).sum()
    }
}

pub fn generate_time_clusters<S: WordSource>(
    cfg: &SimulationConfig,
    rng: &mut RandomStream<S>,
) -> Result<ClusterSkeleton, ChannelError> {
    let n = 1 + rng.uniform_int(cfg.n_clusters_max);
    let mut gaps_ns = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        gaps_ns.push(rng.exponential(cfg.mu_s_ns)?);
    }
    let intra_mean = cfg.mu_s_ns * cfg.intra_delay_ratio;
    let mut subpath_delays_ns = Vec::with_capacity(n);
    for _ in 0..n {
        let m = 1 + rng.uniform_int(cfg.max_subpaths);
        let mut d = Vec::with_capacity(m);
        d.push(0.0);
        for _ in 1..m {
            d.push(rng.exponential(intra_mean)?);
        }
        d.sort_by(f64::total_cmp);
        subpath_delays_ns.push(d);
    }
    let mut cluster_delays_ns = Vec::with_capacity(n);
    let mut start = 0.0;
    for k in 0..n {
        if k > 0 {
            let prev_extent = subpath_delays_ns[k - 1].last().copied().unwrap_or(0.0);
            start += prev_extent + cfg.min_cluster_void_ns + gaps_ns[k - 1];
        }
        cluster_delays_ns.push(start);
    }
    Ok(ClusterSkeleton {
        gaps_ns,
        cluster_delays_ns,
        subpath_delays_ns,
    })
}

/// Normalized power fractions, indexed like `skeleton.subpath_delays_ns`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPowers {
    pub cluster_fractions: Vec<f64>,
    pub subpath_fractions: Vec<Vec<f64>>,
}

impl ClusterPowers {
    pub fn total(&self) -> f64 {
        self.subpath_fractions.iter().flatten().sum()
    }
}

pub fn assign_cluster_powers<S: WordSource>(
    skeleton: &ClusterSkeleton,
    cfg: &SimulationConfig,
    rng: &mut RandomStream<S>,
) -> Result<ClusterPowers, ChannelError> {
    let mut shadow = Vec::with_capacity(skeleton.n_clusters());
    for _ in 0..skeleton.n_clusters() {
        shadow.push(rng.normal(0.0, cfg.cluster_shadow_db)?);
    }
    Ok(cluster_powers_from(skeleton, &shadow, cfg.cluster_decay_ns, cfg.subpath_decay_ns))
}

/// Deterministic part of [`assign_cluster_powers`] given the shadowing terms.
pub fn cluster_powers_from(
    skeleton: &ClusterSkeleton,
    shadow_db: &[f64],
    cluster_decay_ns: f64,
    subpath_decay_ns: f64,
) -> ClusterPowers {
    let raw: Vec<f64> = skeleton
        .cluster_delays_ns
        .iter()
        .zip(shadow_db)
        .map(|(tau, z)| (-tau / cluster_decay_ns).exp() * 10f64.powf(z / 10.0))
        .collect();
    let raw_sum: f64 = raw.iter().sum();
    let cluster_fractions: Vec<f64> = raw.iter().map(|p| p / raw_sum).collect();

    let mut subpath_fractions: Vec<Vec<f64>> = skeleton
        .subpath_delays_ns
        .iter()
        .zip(&cluster_fractions)
        .map(|(delays, cp)| {
            let w: Vec<f64> = delays.iter().map(|d| (-d / subpath_decay_ns).exp()).collect();
            let s: f64 = w.iter().sum();
            w.iter().map(|x| cp * x / s).collect()
        })
        .collect();
    let total: f64 = subpath_fractions.iter().flatten().sum();
    for p in subpath_fractions.iter_mut().flatten() {
        *p /= total;
    }
    ClusterPowers {
        cluster_fractions,
        subpath_fractions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LobeCenter {
    pub tx_azimuth_deg: f64,
    pub tx_zenith_deg: f64,
    pub rx_azimuth_deg: f64,
    pub rx_zenith_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub lobe_index: usize,
    pub aod_deg: f64,
    pub zod_deg: f64,
    pub aoa_deg: f64,
    pub zoa_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialLobes {
    pub lobes: Vec<LobeCenter>,
    /// One entry per component in cluster/subpath order.
    pub paths: Vec<PathAngles>,
}

pub fn wrap_azimuth(deg: f64) -> f64 {
    let a = deg.rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

fn clamp_zenith(deg: f64) -> f64 {
    deg.clamp(0.0, 180.0)
}

pub fn generate_spatial_lobes<S: WordSource>(
    skeleton: &ClusterSkeleton,
    cfg: &SimulationConfig,
    rng: &mut RandomStream<S>,
) -> Result<SpatialLobes, ChannelError> {
    let l = 1 + rng.uniform_int(cfg.max_lobes);
    let mut lobes = Vec::with_capacity(l);
    for _ in 0..l {
        let tx_azimuth_deg = rng.uniform_range(0.0, 360.0);
        let tx_zenith_deg = clamp_zenith(rng.normal(90.0, cfg.lobe_zenith_sd_deg)?);
        let rx_azimuth_deg = rng.uniform_range(0.0, 360.0);
        let rx_zenith_deg = clamp_zenith(rng.normal(90.0, cfg.lobe_zenith_sd_deg)?);
        lobes.push(LobeCenter {
            tx_azimuth_deg,
            tx_zenith_deg,
            rx_azimuth_deg,
            rx_zenith_deg,
        });
    }
    let spread = cfg.lobe_spread_deg;
    let mut paths = Vec::with_capacity(skeleton.n_components());
    for _ in 0..skeleton.n_components() {
        let lobe_index = rng.uniform_int(l);
        let c = lobes[lobe_index];
        let aod = rng.normal(0.0, spread)?;
        let zod = rng.normal(0.0, spread)?;
        let aoa = rng.normal(0.0, spread)?;
        let zoa = rng.normal(0.0, spread)?;
        paths.push(PathAngles {
            lobe_index,
            aod_deg: wrap_azimuth(c.tx_azimuth_deg + aod),
            zod_deg: clamp_zenith(c.tx_zenith_deg + zod),
            aoa_deg: wrap_azimuth(c.rx_azimuth_deg + aoa),
            zoa_deg: clamp_zenith(c.rx_zenith_deg + zoa),
        });
    }
    Ok(SpatialLobes { lobes, paths })
}

/// Free-space loss at the 1 m reference distance, dB.
pub fn free_space_1m_db(frequency_ghz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * frequency_ghz * 1e9 / SPEED_OF_LIGHT).log10()
}

/// Close-in reference path loss with lognormal shadow fading. Consumes one
/// normal draw, also when `shadow_sigma_db` is 0.
pub fn path_loss_ci<S: WordSource>(
    frequency_ghz: f64,
    distance_m: f64,
    path_loss_exponent: f64,
    shadow_sigma_db: f64,
    rng: &mut RandomStream<S>,
) -> Result<f64, ChannelError> {
    if !(distance_m >= 1.0) || !distance_m.is_finite() {
        return Err(ChannelError::DistanceBelowReference(distance_m));
    }
    if !(frequency_ghz > 0.0) {
        return Err(ChannelError::InvalidConfig(format!(
            "frequency_ghz must be positive, got {frequency_ghz}"
        )));
    }
    let shadow = rng.normal(0.0, shadow_sigma_db)?;
    Ok(free_space_1m_db(frequency_ghz) + 10.0 * path_loss_exponent * distance_m.log10() + shadow)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub components: Vec<MultipathComponent>,
    pub n_time_clusters: usize,
    /// Subpath count M_n of each cluster.
    pub lobes_per_cluster: Vec<usize>,
    pub cluster_delays_ns: Vec<f64>,
    pub inter_cluster_gaps_ns: Vec<f64>,
    pub lobes: Vec<LobeCenter>,
    pub path_loss_db: f64,
    pub config: SimulationConfig,
    pub seed: u32,
}

impl ChannelRealization {
    pub fn total_power(&self) -> f64 {
        self.components.iter().map(MultipathComponent::power).sum()
    }
}

pub fn generate_realization<S: WordSource>(
    cfg: &SimulationConfig,
    seed: u32,
    rng: &mut RandomStream<S>,
) -> Result<ChannelRealization, ChannelError> {
    cfg.validate()?;
    let skeleton = generate_time_clusters(cfg, rng)?;
    let powers = assign_cluster_powers(&skeleton, cfg, rng)?;
    let spatial = generate_spatial_lobes(&skeleton, cfg, rng)?;

    let mut components = Vec::with_capacity(skeleton.n_components());
    let mut k = 0;
    for (n, delays) in skeleton.subpath_delays_ns.iter().enumerate() {
        for (m, d) in delays.iter().enumerate() {
            let a = spatial.paths[k];
            components.push(MultipathComponent {
                amplitude: powers.subpath_fractions[n][m].sqrt(),
                phase_rad: 0.0,
                delay_ns: skeleton.cluster_delays_ns[n] + d,
                aod_deg: a.aod_deg,
                zod_deg: a.zod_deg,
                aoa_deg: a.aoa_deg,
                zoa_deg: a.zoa_deg,
                cluster_index: n,
                lobe_index: a.lobe_index,
            });
            k += 1;
        }
    }
    for c in components.iter_mut() {
        c.phase_rad = 2.0 * std::f64::consts::PI * rng.uniform();
    }
    let path_loss_db = path_loss_ci(
        cfg.frequency_ghz,
        cfg.tr_distance_m,
        cfg.path_loss_exponent,
        cfg.shadow_sigma_db,
        rng,
    )?;

    Ok(ChannelRealization {
        n_time_clusters: skeleton.n_clusters(),
        lobes_per_cluster: skeleton.subpath_delays_ns.iter().map(Vec::len).collect(),
        cluster_delays_ns: skeleton.cluster_delays_ns,
        inter_cluster_gaps_ns: skeleton.gaps_ns,
        lobes: spatial.lobes,
        components,
        path_loss_db,
        config: cfg.clone(),
        seed,
    })
}

/// Seeds a fresh stream with `seed` and generates one realization.
pub fn generate_seeded(cfg: &SimulationConfig, seed: u32) -> Result<ChannelRealization, ChannelError> {
    let mut rng = RandomStream::seeded(seed);
    generate_realization(cfg, seed, &mut rng)
}
