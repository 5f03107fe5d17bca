//! Antenna spatial filtering, power delay profiles and RMS delay spread.

use thiserror::Error;

use crate::antenna::{apply_orientation, db_to_linear, zenith_to_elevation, AntennaPattern};
use crate::channel::{ChannelRealization, MultipathComponent};

/// Taps closer than this in delay are merged into one PDP tap, ns.
pub const TAP_MERGE_NS: f64 = 0.1;
pub const DEFAULT_DETECT_THRESHOLD_DB: f64 = 40.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectionalError {
    #[error("power delay profile has zero total power")]
    ZeroPower,
    #[error("pointing zenith {0} deg is outside [0, 180]")]
    InvalidZenith(f64),
    #[error("empty pointing grid")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pointing {
    pub azimuth_deg: f64,
    pub zenith_deg: f64,
}

impl Pointing {
    pub fn new(azimuth_deg: f64, zenith_deg: f64) -> Result<Self, DirectionalError> {
        if !(0.0..=180.0).contains(&zenith_deg) {
            return Err(DirectionalError::InvalidZenith(zenith_deg));
        }
        Ok(Pointing {
            azimuth_deg,
            zenith_deg,
        })
    }

    pub fn elevation_deg(&self) -> f64 {
        zenith_to_elevation(self.zenith_deg)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DirectionalQuery<'a> {
    pub tx_pointing: Pointing,
    pub rx_pointing: Pointing,
    pub tx_pattern: &'a AntennaPattern,
    pub rx_pattern: &'a AntennaPattern,
}

/// Linear gain of `pattern` with its boresight at `pointing`, toward each
/// (azimuth, zenith) direction.
pub fn pointed_gains<'a>(
    pattern: &AntennaPattern,
    pointing: Pointing,
    directions: impl Iterator<Item = (f64, f64)> + 'a,
) -> Vec<f64> {
    let oriented = apply_orientation(pattern, pointing.azimuth_deg, pointing.elevation_deg());
    directions
        .map(|(az, zen)| db_to_linear(oriented.gain_at(zenith_to_elevation(zen), az)))
        .collect()
}

fn departure_dirs(r: &ChannelRealization) -> impl Iterator<Item = (f64, f64)> + '_ {
    r.components.iter().map(|c| (c.aod_deg, c.zod_deg))
}

fn arrival_dirs(r: &ChannelRealization) -> impl Iterator<Item = (f64, f64)> + '_ {
    r.components.iter().map(|c| (c.aoa_deg, c.zoa_deg))
}

/// Scales each component's power by the TX gain toward its departure
/// direction and the RX gain toward its arrival direction.
pub fn directional_filter(
    realization: &ChannelRealization,
    query: &DirectionalQuery<'_>,
) -> Vec<MultipathComponent> {
    let gt = pointed_gains(query.tx_pattern, query.tx_pointing, departure_dirs(realization));
    let gr = pointed_gains(query.rx_pattern, query.rx_pointing, arrival_dirs(realization));
    realization
        .components
        .iter()
        .zip(gt.iter().zip(&gr))
        .map(|(c, (t, r))| MultipathComponent {
            amplitude: c.amplitude * (t * r).sqrt(),
            ..c.clone()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerDelayProfile {
    /// (delay_ns, power_linear), sorted by delay.
    pub taps: Vec<(f64, f64)>,
    pub total_power: f64,
}

impl PowerDelayProfile {
    /// Builds a profile from raw (delay, power) pairs. Pairs are put in
    /// canonical (delay, power) order, then each tap within
    /// [`TAP_MERGE_NS`] of the current tap's delay is folded into it.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut taps: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (d, p) in pairs {
            match taps.last_mut() {
                Some(last) if d - last.0 <= TAP_MERGE_NS => last.1 += p,
                _ => taps.push((d, p)),
            }
        }
        let total_power = taps.iter().map(|t| t.1).sum();
        PowerDelayProfile { taps, total_power }
    }

    /// Drops taps more than `floor_db` below the strongest tap.
    pub fn with_floor(&self, floor_db: f64) -> Self {
        let max = self.taps.iter().map(|t| t.1).fold(0.0, f64::max);
        let cut = max * db_to_linear(-floor_db);
        let taps: Vec<(f64, f64)> = self.taps.iter().copied().filter(|t| t.1 >= cut).collect();
        let total_power = taps.iter().map(|t| t.1).sum();
        PowerDelayProfile { taps, total_power }
    }
}

pub fn power_delay_profile(components: &[MultipathComponent]) -> PowerDelayProfile {
    PowerDelayProfile::from_pairs(components.iter().map(|c| (c.delay_ns, c.power())).collect())
}

/// Power-weighted RMS delay spread, evaluated in central-moment form.
pub fn rms_delay_spread(pdp: &PowerDelayProfile) -> Result<f64, DirectionalError> {
    rms_of(pdp.taps.iter().copied()).ok_or(DirectionalError::ZeroPower)
}

fn rms_of(taps: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let total: f64 = taps.clone().map(|t| t.1).sum();
    if !(total > 0.0) {
        return None;
    }
    // A lone tap has no spread; the moment form would leave rounding noise.
    if taps.clone().filter(|t| t.1 > 0.0).nth(1).is_none() {
        return Some(0.0);
    }
    let mean = taps.clone().map(|(d, p)| p * d).sum::<f64>() / total;
    let var = taps.map(|(d, p)| p * (d - mean) * (d - mean)).sum::<f64>() / total;
    Some(var.max(0.0).sqrt())
}

pub fn omni_rms_delay_spread(realization: &ChannelRealization) -> Result<f64, DirectionalError> {
    rms_delay_spread(&power_delay_profile(&realization.components))
}

/// TX and RX pointing sets; the sweep visits their cross product.
#[derive(Debug, Clone, PartialEq)]
pub struct PointingGrid {
    pub tx: Vec<Pointing>,
    pub rx: Vec<Pointing>,
}

impl PointingGrid {
    pub fn single(tx: Pointing, rx: Pointing) -> Self {
        PointingGrid {
            tx: vec![tx],
            rx: vec![rx],
        }
    }

    /// Azimuth steps of one HPBW on the horizon and on the rings one HPBW
    /// above and below it, used at both ends.
    pub fn hpbw_rings(hpbw_deg: f64) -> Self {
        let n_az = (360.0 / hpbw_deg).round().max(1.0) as usize;
        let mut set = Vec::with_capacity(3 * n_az);
        for el in [-hpbw_deg, 0.0, hpbw_deg] {
            for k in 0..n_az {
                set.push(Pointing {
                    azimuth_deg: k as f64 * 360.0 / n_az as f64,
                    zenith_deg: (90.0 - el).clamp(0.0, 180.0),
                });
            }
        }
        PointingGrid {
            tx: set.clone(),
            rx: set,
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.tx.len() * self.rx.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Pairs whose filtered power is more than this below the strongest
    /// pair of the same realization are dropped.
    pub detect_threshold_db: f64,
    /// When set, taps more than this below the strongest tap of a pair's
    /// profile are dropped before the delay spread is computed.
    pub tap_floor_db: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            detect_threshold_db: DEFAULT_DETECT_THRESHOLD_DB,
            tap_floor_db: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub tx_index: usize,
    pub rx_index: usize,
    pub total_power: f64,
    pub rms_ds_ns: f64,
}

/// Component-to-tap grouping shared by every pointing pair of a sweep.
/// Delays alone decide the grouping, so it matches [`power_delay_profile`]
/// for any per-component gain.
struct TapLayout {
    delays: Vec<f64>,
    members: Vec<Vec<usize>>,
}

impl TapLayout {
    fn new(components: &[MultipathComponent]) -> Self {
        let mut idx: Vec<usize> = (0..components.len()).collect();
        idx.sort_by(|&a, &b| components[a].delay_ns.total_cmp(&components[b].delay_ns));
        let mut delays: Vec<f64> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for k in idx {
            let d = components[k].delay_ns;
            match delays.last() {
                Some(&last) if d - last <= TAP_MERGE_NS => members.last_mut().unwrap().push(k),
                _ => {
                    delays.push(d);
                    members.push(vec![k]);
                }
            }
        }
        TapLayout { delays, members }
    }
}

/// Filters the realization through every pointing pair and returns the
/// detectable pairs with their RMS delay spread.
pub fn directional_ds_sweep(
    realization: &ChannelRealization,
    tx_pattern: &AntennaPattern,
    rx_pattern: &AntennaPattern,
    grid: &PointingGrid,
    config: &SweepConfig,
) -> Result<Vec<SweepSample>, DirectionalError> {
    if grid.n_pairs() == 0 {
        return Err(DirectionalError::EmptyGrid);
    }
    let k = realization.components.len();
    let gt: Vec<Vec<f64>> = grid
        .tx
        .iter()
        .map(|p| pointed_gains(tx_pattern, *p, departure_dirs(realization)))
        .collect();
    let gr: Vec<Vec<f64>> = grid
        .rx
        .iter()
        .map(|p| pointed_gains(rx_pattern, *p, arrival_dirs(realization)))
        .collect();
    let omni: Vec<f64> = realization.components.iter().map(|c| c.power()).collect();
    let layout = TapLayout::new(&realization.components);

    let mut tx_weighted = vec![0.0; k];
    let mut comp = vec![0.0; k];
    let mut taps = vec![0.0; layout.delays.len()];
    let mut pairs = Vec::with_capacity(grid.n_pairs());
    for (i, t) in gt.iter().enumerate() {
        for c in 0..k {
            tx_weighted[c] = omni[c] * t[c];
        }
        for (j, r) in gr.iter().enumerate() {
            for c in 0..k {
                comp[c] = tx_weighted[c] * r[c];
            }
            for (tap, m) in taps.iter_mut().zip(&layout.members) {
                *tap = m.iter().map(|&c| comp[c]).sum();
            }
            let total: f64 = taps.iter().sum();
            let ds = match config.tap_floor_db {
                None => rms_of(layout.delays.iter().copied().zip(taps.iter().copied())),
                Some(floor) => {
                    let max = taps.iter().copied().fold(0.0, f64::max);
                    let cut = max * db_to_linear(-floor);
                    rms_of(
                        layout
                            .delays
                            .iter()
                            .copied()
                            .zip(taps.iter().copied())
                            .filter(|t| t.1 >= cut),
                    )
                }
            };
            pairs.push((i, j, total, ds));
        }
    }
    let strongest = pairs.iter().map(|p| p.2).fold(0.0, f64::max);
    let cut = strongest * db_to_linear(-config.detect_threshold_db);
    Ok(pairs
        .into_iter()
        .filter_map(|(tx_index, rx_index, total_power, ds)| {
            let rms_ds_ns = ds?;
            (total_power > 0.0 && total_power >= cut).then_some(SweepSample {
                tx_index,
                rx_index,
                total_power,
                rms_ds_ns,
            })
        })
        .collect())
}
