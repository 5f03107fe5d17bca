//! Full-sphere antenna patterns.
//!
//! A pattern lives on a uniform (elevation, azimuth) grid: elevation runs
//! from -90° to +90° inclusive, azimuth from 0° up to (but excluding) 360°.
//! Gains are stored in dB relative to the pattern peak, alongside the
//! absolute peak gain in dBi, so the absolute gain of any cell is
//! `gain_db + peak_gain_dbi`.
//!
//! Elevation is measured up from the horizontal plane and azimuth
//! counterclockwise. Zenith angles (ZOD/ZOA) convert with
//! [`zenith_to_elevation`].

mod ant3d;
mod cuts;
mod field;
mod orientation;
mod threegpp;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ant3d::{read_ant3d, read_ant3d_str, write_ant3d, write_ant3d_string, ANT3D_FORMAT_VERSION};
pub use cuts::{read_plane_cut_csv, reconstruct_from_cuts, CutPlane, PlaneCut, PEAK_SLACK_DB};
pub use field::{FieldCell, FieldGrid};
pub use orientation::{apply_orientation, direction_to_angles, angles_to_direction, OrientedPattern, Rotation};
pub use threegpp::{element_attenuation_db, synthesize_3gpp, ThreeGppParams};

/// Default grid resolution in degrees.
pub const DEFAULT_GRID_STEP_DEG: f64 = 1.0;

#[derive(Debug, Error)]
pub enum AntennaError {
    #[error("grid step {0}° must be positive and divide both 180° and 360°")]
    InvalidGridStep(f64),
    #[error("gain matrix has {got} cells, grid needs {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite gain value at elevation index {el_index}, azimuth index {az_index}")]
    NonFiniteGain { el_index: usize, az_index: usize },
    #[error("{plane} cut is empty")]
    EmptyCut { plane: CutPlane },
    #[error("{plane} cut has a non-finite sample at angle {angle_deg}")]
    NonFiniteCut { plane: CutPlane, angle_deg: f64 },
    #[error("{plane} cut gain {gain_dbi} dBi at {angle_deg}° exceeds the declared peak {peak_dbi} dBi")]
    CutAbovePeak {
        plane: CutPlane,
        angle_deg: f64,
        gain_dbi: f64,
        peak_dbi: f64,
    },
    #[error("invalid 3GPP parameter {name} = {value} (must be > 0)")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("pattern integrates to {0}; cannot normalize")]
    DegeneratePattern(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarization {
    #[default]
    Vertical,
    Horizontal,
    Dual,
}

impl Polarization {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::Vertical => "vertical",
            Polarization::Horizontal => "horizontal",
            Polarization::Dual => "dual",
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vertical" | "v" => Ok(Polarization::Vertical),
            "horizontal" | "h" => Ok(Polarization::Horizontal),
            "dual" => Ok(Polarization::Dual),
            other => Err(format!("unknown polarization '{other}'")),
        }
    }
}

/// Mount rotation recorded with a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mount {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
}

/// Uniform full-sphere grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGrid {
    step_deg: f64,
    n_elevation: usize,
    n_azimuth: usize,
}

impl SphereGrid {
    pub fn new(step_deg: f64) -> Result<Self, AntennaError> {
        if !(step_deg > 0.0) || !step_deg.is_finite() || step_deg > 90.0 {
            return Err(AntennaError::InvalidGridStep(step_deg));
        }
        let n_half = (180.0 / step_deg).round();
        if (n_half * step_deg - 180.0).abs() > 1e-9 {
            return Err(AntennaError::InvalidGridStep(step_deg));
        }
        let n_half = n_half as usize;
        Ok(SphereGrid {
            step_deg,
            n_elevation: n_half + 1,
            n_azimuth: 2 * n_half,
        })
    }

    pub fn step_deg(&self) -> f64 {
        self.step_deg
    }

    pub fn n_elevation(&self) -> usize {
        self.n_elevation
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn len(&self) -> usize {
        self.n_elevation * self.n_azimuth
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elevation_deg(&self, i: usize) -> f64 {
        if i + 1 == self.n_elevation {
            90.0
        } else {
            -90.0 + i as f64 * self.step_deg
        }
    }

    pub fn azimuth_deg(&self, j: usize) -> f64 {
        j as f64 * self.step_deg
    }

    pub fn elevations(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_elevation).map(|i| self.elevation_deg(i))
    }

    pub fn azimuths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_azimuth).map(|j| self.azimuth_deg(j))
    }
}

/// Zenith angle (0° overhead) to elevation (0° at the horizon).
///
/// The map is its own inverse.
#[inline]
pub fn zenith_to_elevation(zenith_deg: f64) -> f64 {
    90.0 - zenith_deg
}

#[inline]
pub fn elevation_to_zenith(elevation_deg: f64) -> f64 {
    90.0 - elevation_deg
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// A full-sphere gain pattern normalized to its peak.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPattern {
    grid: SphereGrid,
    gain_db: Vec<f64>,
    peak_gain_dbi: f64,
    pub frequency_ghz: Option<f64>,
    pub polarization: Polarization,
    pub mount: Mount,
    pub source: String,
}

impl AntennaPattern {
    /// Builds a pattern from absolute gains in dBi laid out elevation-major
    /// (elevation outer, azimuth inner). The peak becomes `peak_gain_dbi`
    /// and the stored matrix is relative to it.
    pub fn from_absolute_dbi(
        grid_step_deg: f64,
        absolute_dbi: Vec<f64>,
        source: impl Into<String>,
    ) -> Result<Self, AntennaError> {
        let grid = SphereGrid::new(grid_step_deg)?;
        if absolute_dbi.len() != grid.len() {
            return Err(AntennaError::ShapeMismatch {
                expected: grid.len(),
                got: absolute_dbi.len(),
            });
        }
        if let Some(pos) = absolute_dbi.iter().position(|g| !g.is_finite()) {
            return Err(AntennaError::NonFiniteGain {
                el_index: pos / grid.n_azimuth,
                az_index: pos % grid.n_azimuth,
            });
        }
        let peak = absolute_dbi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gain_db = absolute_dbi.into_iter().map(|g| g - peak).collect();
        Ok(AntennaPattern {
            grid,
            gain_db,
            peak_gain_dbi: peak,
            frequency_ghz: None,
            polarization: Polarization::default(),
            mount: Mount::default(),
            source: source.into(),
        })
    }

    /// Builds a pattern from a peak-relative matrix. The matrix is
    /// renormalized if its maximum is not exactly zero.
    pub fn from_normalized_db(
        grid_step_deg: f64,
        gain_db: Vec<f64>,
        peak_gain_dbi: f64,
        source: impl Into<String>,
    ) -> Result<Self, AntennaError> {
        if !peak_gain_dbi.is_finite() {
            return Err(AntennaError::NonFiniteGain {
                el_index: 0,
                az_index: 0,
            });
        }
        let absolute = gain_db.into_iter().map(|g| g + peak_gain_dbi).collect();
        let mut p = Self::from_absolute_dbi(grid_step_deg, absolute, source)?;
        // Preserve the caller's peak exactly when the matrix was already normalized.
        if p.peak_gain_dbi != peak_gain_dbi && (p.peak_gain_dbi - peak_gain_dbi).abs() < 1e-12 {
            p.peak_gain_dbi = peak_gain_dbi;
        }
        Ok(p)
    }

    /// Constant-gain pattern.
    pub fn isotropic(gain_dbi: f64, grid_step_deg: f64) -> Result<Self, AntennaError> {
        let grid = SphereGrid::new(grid_step_deg)?;
        Self::from_absolute_dbi(grid_step_deg, vec![gain_dbi; grid.len()], "isotropic")
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn grid_step_deg(&self) -> f64 {
        self.grid.step_deg
    }

    /// Peak-relative gains, elevation-major.
    pub fn gain_db(&self) -> &[f64] {
        &self.gain_db
    }

    pub fn peak_gain_dbi(&self) -> f64 {
        self.peak_gain_dbi
    }

    pub fn normalized_db_at_node(&self, el_index: usize, az_index: usize) -> f64 {
        self.gain_db[el_index * self.grid.n_azimuth + az_index]
    }

    pub fn absolute_dbi_at_node(&self, el_index: usize, az_index: usize) -> f64 {
        self.normalized_db_at_node(el_index, az_index) + self.peak_gain_dbi
    }

    /// Absolute gain in dBi by bilinear interpolation on the dB grid.
    ///
    /// Elevation is clamped to [-90, 90]; azimuth is reduced modulo 360 and
    /// interpolates across the seam between the last column and column 0.
    pub fn gain_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        self.normalized_gain_at(elevation_deg, azimuth_deg) + self.peak_gain_dbi
    }

    pub fn normalized_gain_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        let g = &self.grid;
        let el = elevation_deg.clamp(-90.0, 90.0);
        let az = azimuth_deg.rem_euclid(360.0);

        let fi = (el + 90.0) / g.step_deg;
        let i0 = (fi.floor() as usize).min(g.n_elevation - 1);
        let ti = fi - i0 as f64;
        let i1 = (i0 + 1).min(g.n_elevation - 1);

        let fj = az / g.step_deg;
        let j0 = (fj.floor() as usize) % g.n_azimuth;
        let tj = fj - fj.floor();
        let j1 = (j0 + 1) % g.n_azimuth;

        let row0 = i0 * g.n_azimuth;
        let row1 = i1 * g.n_azimuth;
        let v00 = self.gain_db[row0 + j0];
        let v01 = self.gain_db[row0 + j1];
        let v10 = self.gain_db[row1 + j0];
        let v11 = self.gain_db[row1 + j1];

        let lo = lerp(v00, v01, tj);
        let hi = lerp(v10, v11, tj);
        lerp(lo, hi, ti)
    }

    /// Linear absolute gain at a node.
    pub fn linear_at_node(&self, el_index: usize, az_index: usize) -> f64 {
        db_to_linear(self.absolute_dbi_at_node(el_index, az_index))
    }

    /// `∫∫ g(θ, φ) sin θ dθ dφ` over the sphere (θ the zenith angle).
    ///
    /// Midpoint rule: each grid cell contributes its center gain times the
    /// exact solid angle of the cell. The center gain is the mean of the four
    /// corner gains in linear units; averaging in dB instead biases every
    /// cell low and converges several times more slowly under refinement.
    pub fn spherical_integral(&self) -> f64 {
        let g = &self.grid;
        let d_az = g.step_deg.to_radians();
        let peak_lin = db_to_linear(self.peak_gain_dbi);
        let mut total = 0.0;
        for i in 0..g.n_elevation - 1 {
            let lower = g.elevation_deg(i).to_radians();
            let upper = g.elevation_deg(i + 1).to_radians();
            // Band between the two elevations, |cos θ_a - cos θ_b| in zenith terms.
            let band = upper.sin() - lower.sin();
            let mut row_sum = 0.0;
            for j in 0..g.n_azimuth {
                let j1 = (j + 1) % g.n_azimuth;
                row_sum += 0.25
                    * (db_to_linear(self.normalized_db_at_node(i, j))
                        + db_to_linear(self.normalized_db_at_node(i, j1))
                        + db_to_linear(self.normalized_db_at_node(i + 1, j))
                        + db_to_linear(self.normalized_db_at_node(i + 1, j1)));
            }
            total += row_sum * band * d_az;
        }
        total * peak_lin
    }

    /// Rescales the linear gain by one constant so that the sphere integral
    /// equals 4π. Only the peak gain changes; the normalized matrix is kept.
    pub fn normalize_to_4pi(&self) -> Result<AntennaPattern, AntennaError> {
        let integral = self.spherical_integral();
        if !(integral > 0.0) || !integral.is_finite() {
            return Err(AntennaError::DegeneratePattern(integral));
        }
        let scale = 4.0 * PI / integral;
        let mut out = self.clone();
        out.peak_gain_dbi += linear_to_db(scale);
        Ok(out)
    }

    /// Field components on the (θ̂, φ̂) basis.
    pub fn to_field_components(&self) -> FieldGrid {
        FieldGrid::from_pattern(self)
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_pattern() -> AntennaPattern {
        let grid = SphereGrid::new(1.0).unwrap();
        let mut v = Vec::with_capacity(grid.len());
        for el in grid.elevations() {
            for az in grid.azimuths() {
                v.push(-0.01 * (el + 90.0) - 0.02 * az);
            }
        }
        AntennaPattern::from_absolute_dbi(1.0, v, "test").unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = SphereGrid::new(1.0).unwrap();
        assert_eq!((g.n_elevation(), g.n_azimuth()), (181, 360));
        let g = SphereGrid::new(0.25).unwrap();
        assert_eq!((g.n_elevation(), g.n_azimuth()), (721, 1440));
        assert!(SphereGrid::new(7.0).is_err());
        assert!(SphereGrid::new(0.0).is_err());
        assert!(SphereGrid::new(-1.0).is_err());
    }

    #[test]
    fn normalized_max_is_zero() {
        let p = ramp_pattern();
        let max = p.gain_db().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 0.0);
        assert!(p.gain_db().iter().all(|g| *g <= 0.0));
        assert_eq!(p.peak_gain_dbi(), 0.0);
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let p = ramp_pattern();
        for (i, el) in p.grid().elevations().enumerate().step_by(7) {
            for (j, az) in p.grid().azimuths().enumerate().step_by(11) {
                assert_eq!(p.gain_at(el, az), p.absolute_dbi_at_node(i, j));
            }
        }
    }

    #[test]
    fn azimuth_seam_midpoint() {
        let p = ramp_pattern();
        let left = p.absolute_dbi_at_node(100, 359);
        let right = p.absolute_dbi_at_node(100, 0);
        let mid = p.gain_at(10.0, 359.5);
        assert!((mid - 0.5 * (left + right)).abs() < 1e-12);
        // Continuity across the seam.
        let a = p.gain_at(10.0, 360.0 - 1e-10);
        let b = p.gain_at(10.0, 0.0);
        assert!((a - b).abs() < 1e-9);
        // Negative and large azimuths wrap.
        assert!((p.gain_at(10.0, -0.5) - mid).abs() < 1e-12);
        assert!((p.gain_at(10.0, 719.5) - mid).abs() < 1e-9);
    }

    #[test]
    fn isotropic_everywhere_peak() {
        let p = AntennaPattern::isotropic(3.0, 1.0).unwrap();
        for (el, az) in [(0.0, 0.0), (45.3, 123.4), (-90.0, 10.0), (90.0, 359.9)] {
            assert_eq!(p.gain_at(el, az), 3.0);
        }
    }

    #[test]
    fn isotropic_integral_is_4pi() {
        let p = AntennaPattern::isotropic(0.0, 1.0).unwrap();
        let i = p.spherical_integral();
        assert!((i / (4.0 * PI) - 1.0).abs() < 1e-12, "{i}");
        let n = p.normalize_to_4pi().unwrap();
        assert!(n.peak_gain_dbi().abs() < 1e-12);
    }

    #[test]
    fn isotropic_two_scaled_by_half() {
        let p = AntennaPattern::isotropic(linear_to_db(2.0), 2.0).unwrap();
        let n = p.normalize_to_4pi().unwrap();
        let scale = db_to_linear(n.peak_gain_dbi() - p.peak_gain_dbi());
        assert!((scale - 0.5).abs() < 1e-12);
        assert_eq!(n.gain_db(), p.gain_db());
    }

    #[test]
    fn degenerate_pattern_rejected() {
        let p = AntennaPattern::isotropic(-4000.0, 10.0).unwrap();
        assert!(matches!(
            p.normalize_to_4pi(),
            Err(AntennaError::DegeneratePattern(_))
        ));
    }

    #[test]
    fn zenith_conversion_is_involution() {
        for el in [-90.0, -12.5, 0.0, 33.0, 90.0] {
            assert_eq!(zenith_to_elevation(elevation_to_zenith(el)), el);
            assert_eq!(zenith_to_elevation(zenith_to_elevation(el)), el);
        }
    }

    #[test]
    fn shape_and_nan_rejected() {
        assert!(matches!(
            AntennaPattern::from_absolute_dbi(1.0, vec![0.0; 10], "x"),
            Err(AntennaError::ShapeMismatch { .. })
        ));
        let grid = SphereGrid::new(10.0).unwrap();
        let mut v = vec![0.0; grid.len()];
        v[40] = f64::NAN;
        assert!(matches!(
            AntennaPattern::from_absolute_dbi(10.0, v, "x"),
            Err(AntennaError::NonFiniteGain { el_index: 1, az_index: 4 })
        ));
    }
}
