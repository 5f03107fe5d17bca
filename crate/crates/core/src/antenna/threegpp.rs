//! 3GPP TR 38.901 (Table 7.3-1) single-element radiation pattern.

use super::{AntennaError, AntennaPattern, SphereGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeGppParams {
    pub theta_3db_deg: f64,
    pub phi_3db_deg: f64,
    pub sla_v_db: f64,
    pub a_max_db: f64,
    pub element_peak_gain_dbi: f64,
}

impl Default for ThreeGppParams {
    fn default() -> Self {
        ThreeGppParams {
            theta_3db_deg: 65.0,
            phi_3db_deg: 65.0,
            sla_v_db: 30.0,
            a_max_db: 30.0,
            element_peak_gain_dbi: 8.0,
        }
    }
}

impl ThreeGppParams {
    /// Symmetric beam with the given half-power beamwidth and peak gain,
    /// floored at the default 30 dB side-lobe level.
    pub fn with_beam(hpbw_deg: f64, peak_gain_dbi: f64) -> Self {
        ThreeGppParams {
            theta_3db_deg: hpbw_deg,
            phi_3db_deg: hpbw_deg,
            element_peak_gain_dbi: peak_gain_dbi,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), AntennaError> {
        let checks = [
            ("theta_3db_deg", self.theta_3db_deg),
            ("phi_3db_deg", self.phi_3db_deg),
            ("sla_v_db", self.sla_v_db),
            ("a_max_db", self.a_max_db),
            ("element_peak_gain_dbi", self.element_peak_gain_dbi),
        ];
        for (name, value) in checks {
            if !(value > 0.0) || !value.is_finite() {
                return Err(AntennaError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Vertical cut `A_V(θ'')`, θ'' the zenith angle in degrees.
    pub fn vertical_cut_db(&self, zenith_deg: f64) -> f64 {
        let x = (zenith_deg - 90.0) / self.theta_3db_deg;
        -(12.0 * x * x).min(self.sla_v_db)
    }

    /// Horizontal cut `A_H(φ'')`, φ'' in [-180, 180] degrees.
    pub fn horizontal_cut_db(&self, azimuth_deg: f64) -> f64 {
        let x = azimuth_deg / self.phi_3db_deg;
        -(12.0 * x * x).min(self.a_max_db)
    }
}

/// Combined attenuation `A(θ'', φ'') = -min(-(A_V + A_H), A_max)`, in dB
/// (≤ 0). Azimuth is wrapped into [-180, 180).
pub fn element_attenuation_db(params: &ThreeGppParams, zenith_deg: f64, azimuth_deg: f64) -> f64 {
    let phi = wrap_signed(azimuth_deg);
    let sum = params.vertical_cut_db(zenith_deg) + params.horizontal_cut_db(phi);
    -(-sum).min(params.a_max_db)
}

fn wrap_signed(azimuth_deg: f64) -> f64 {
    let a = azimuth_deg.rem_euclid(360.0);
    if a >= 180.0 {
        a - 360.0
    } else {
        a
    }
}

/// Samples the element pattern onto the full-sphere grid.
///
/// Absolute gain is `element_peak_gain_dbi + A(θ'', φ'')` where the grid
/// elevation θ maps to zenith θ'' = 90° - θ.
pub fn synthesize_3gpp(
    params: &ThreeGppParams,
    grid_step_deg: f64,
) -> Result<AntennaPattern, AntennaError> {
    params.validate()?;
    let grid = SphereGrid::new(grid_step_deg)?;
    let mut values = Vec::with_capacity(grid.len());
    for el in grid.elevations() {
        let zenith = super::elevation_to_zenith(el);
        for az in grid.azimuths() {
            values.push(params.element_peak_gain_dbi + element_attenuation_db(params, zenith, az));
        }
    }
    let mut pattern = AntennaPattern::from_absolute_dbi(grid_step_deg, values, "3gpp-tr38.901")?;
    pattern.polarization = super::Polarization::Vertical;
    Ok(pattern)
}
