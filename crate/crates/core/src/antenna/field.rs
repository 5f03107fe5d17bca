use super::{db_to_linear, AntennaPattern, Polarization};

/// Field components of one grid cell. Angles are in radians; `theta_rad`
/// is the elevation of the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCell {
    pub phi_rad: f64,
    pub theta_rad: f64,
    pub e_phi_re: f64,
    pub e_phi_im: f64,
    pub e_theta_re: f64,
    pub e_theta_im: f64,
}

impl FieldCell {
    /// `|E_θ|² + |E_φ|²`, the absolute linear gain of the cell.
    pub fn power(&self) -> f64 {
        self.e_phi_re * self.e_phi_re
            + self.e_phi_im * self.e_phi_im
            + self.e_theta_re * self.e_theta_re
            + self.e_theta_im * self.e_theta_im
    }
}

/// Field components over a full pattern grid, elevation-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub cells: Vec<FieldCell>,
}

impl FieldGrid {
    /// Single polarizations put all power in their own component with zero
    /// phase; dual polarization splits it equally.
    pub fn from_pattern(pattern: &AntennaPattern) -> FieldGrid {
        let grid = pattern.grid();
        let mut cells = Vec::with_capacity(grid.len());
        for i in 0..grid.n_elevation() {
            let theta_rad = grid.elevation_deg(i).to_radians();
            for j in 0..grid.n_azimuth() {
                let phi_rad = grid.azimuth_deg(j).to_radians();
                let g = db_to_linear(pattern.absolute_dbi_at_node(i, j));
                let (e_theta, e_phi) = match pattern.polarization {
                    Polarization::Vertical => (g.sqrt(), 0.0),
                    Polarization::Horizontal => (0.0, g.sqrt()),
                    Polarization::Dual => {
                        let half = (0.5 * g).sqrt();
                        (half, half)
                    }
                };
                cells.push(FieldCell {
                    phi_rad,
                    theta_rad,
                    e_phi_re: e_phi,
                    e_phi_im: 0.0,
                    e_theta_re: e_theta,
                    e_theta_im: 0.0,
                });
            }
        }
        FieldGrid { cells }
    }

    /// Absolute gains in dBi recovered from the field components.
    pub fn absolute_dbi(&self) -> Vec<f64> {
        self.cells.iter().map(|c| 10.0 * c.power().log10()).collect()
    }
}
