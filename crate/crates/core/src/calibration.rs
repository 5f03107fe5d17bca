//! Directional delay-spread sampling with horn antennas, as used to compare
//! simulated log10 RMS delay spread against measured horn sweeps.
//!
//! Each realization is swept over the HPBW pointing rings at both ends with
//! identical horns. Among the detectable pointing pairs with non-zero delay
//! spread, one is chosen uniformly with the realization's own stream, so
//! every realization contributes at most one sample.

use rayon::prelude::*;

use crate::antenna::{synthesize_3gpp, AntennaError, AntennaPattern, ThreeGppParams};
use crate::batch::derive_seed;
use crate::channel::{generate_realization, ChannelError, ChannelRealization, SimulationConfig};
use crate::directional::{directional_ds_sweep, DirectionalError, PointingGrid, SweepConfig};
use crate::rng::RandomStream;

/// Taps more than this below a profile's strongest tap are treated as
/// below the sounder's dynamic range.
pub const DEFAULT_TAP_FLOOR_DB: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HornSpec {
    pub peak_gain_dbi: f64,
    pub hpbw_deg: f64,
}

impl HornSpec {
    /// Horns of the reference measurement campaigns.
    pub fn for_band(frequency_ghz: f64) -> Option<HornSpec> {
        if (frequency_ghz - 16.95).abs() < 1e-9 {
            Some(HornSpec {
                peak_gain_dbi: 20.0,
                hpbw_deg: 15.0,
            })
        } else if (frequency_ghz - 6.75).abs() < 1e-9 {
            Some(HornSpec {
                peak_gain_dbi: 15.0,
                hpbw_deg: 30.0,
            })
        } else {
            None
        }
    }

    /// Symmetric 3GPP element shape with the horn's beamwidth and gain.
    pub fn pattern(&self, grid_step_deg: f64) -> Result<AntennaPattern, AntennaError> {
        let mut p = synthesize_3gpp(&ThreeGppParams::with_beam(self.hpbw_deg, self.peak_gain_dbi), grid_step_deg)?;
        p.source = format!("horn {} dBi / {} deg", self.peak_gain_dbi, self.hpbw_deg);
        Ok(p)
    }
}

pub fn calibration_sweep_config() -> SweepConfig {
    SweepConfig {
        detect_threshold_db: crate::directional::DEFAULT_DETECT_THRESHOLD_DB,
        tap_floor_db: Some(DEFAULT_TAP_FLOOR_DB),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Directional(#[from] DirectionalError),
    #[error(transparent)]
    Antenna(#[from] AntennaError),
}

#[derive(Debug, Clone)]
pub struct DirectionalSampler<'a> {
    pub config: &'a SimulationConfig,
    pub tx_pattern: &'a AntennaPattern,
    pub rx_pattern: &'a AntennaPattern,
    pub grid: PointingGrid,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone)]
pub struct RealizationOutcome {
    pub realization: ChannelRealization,
    /// Directional RMS delay spread of the chosen pointing pair, if any.
    pub directional_ds_ns: Option<f64>,
}

impl<'a> DirectionalSampler<'a> {
    pub fn run(&self, seed: u32) -> Result<RealizationOutcome, CalibrationError> {
        let mut rng = RandomStream::seeded(seed);
        let realization = generate_realization(self.config, seed, &mut rng)?;
        let sweep = directional_ds_sweep(&realization, self.tx_pattern, self.rx_pattern, &self.grid, &self.sweep)?;
        let nonzero: Vec<f64> = sweep.iter().map(|s| s.rms_ds_ns).filter(|d| *d > 0.0).collect();
        let directional_ds_ns = if nonzero.is_empty() {
            None
        } else {
            Some(nonzero[rng.uniform_int(nonzero.len())])
        };
        Ok(RealizationOutcome {
            realization,
            directional_ds_ns,
        })
    }

    /// Collects `n` directional samples from realizations seeded with
    /// `derive_seed(base_seed, i)` for `i = 0, 1, ..`, skipping
    /// realizations that yield none. Result order follows `i`.
    pub fn collect(&self, base_seed: u32, n: usize) -> Result<Vec<f64>, CalibrationError> {
        let mut out = Vec::with_capacity(n);
        let mut next = 0u64;
        while out.len() < n {
            let block = (n - out.len()).max(64) as u64;
            let got: Vec<Option<f64>> = (next..next + block)
                .into_par_iter()
                .map(|i| self.run(derive_seed(base_seed, i)).map(|o| o.directional_ds_ns))
                .collect::<Result<_, _>>()?;
            out.extend(got.into_iter().flatten());
            next += block;
        }
        out.truncate(n);
        Ok(out)
    }
}

/// `n` calibration samples for `config` with the band's reference horns at
/// both ends.
pub fn horn_ds_samples(
    config: &SimulationConfig,
    horn: HornSpec,
    base_seed: u32,
    n: usize,
) -> Result<Vec<f64>, CalibrationError> {
    let pattern = horn.pattern(crate::antenna::DEFAULT_GRID_STEP_DEG)?;
    let sampler = DirectionalSampler {
        config,
        tx_pattern: &pattern,
        rx_pattern: &pattern,
        grid: PointingGrid::hpbw_rings(horn.hpbw_deg),
        sweep: calibration_sweep_config(),
    };
    sampler.collect(base_seed, n)
}
