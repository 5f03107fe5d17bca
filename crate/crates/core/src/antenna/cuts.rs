//! Full-sphere reconstruction from two principal-plane cuts.
//!
//! Vendor data sheets give a vertical cut on elevation and a horizontal cut
//! on azimuth. Both are resampled onto the sphere grid in dB and combined
//! by the multiplication method, `G(θ, φ) = G_H(φ) + G_V(θ) - G_max`.

use std::fmt;
use std::path::Path;

use super::{AntennaError, AntennaPattern, SphereGrid};

/// How far a cut sample may sit above the declared peak before it is
/// rejected as inconsistent.
pub const PEAK_SLACK_DB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutPlane {
    Vertical,
    Horizontal,
}

impl fmt::Display for CutPlane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutPlane::Vertical => f.write_str("vertical"),
            CutPlane::Horizontal => f.write_str("horizontal"),
        }
    }
}

/// One principal-plane cut: `(angle_deg, gain_dbi)` samples.
///
/// Vertical cuts are indexed by elevation, horizontal cuts by azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCut {
    pub plane: CutPlane,
    pub samples: Vec<(f64, f64)>,
}

impl PlaneCut {
    pub fn new(plane: CutPlane, samples: Vec<(f64, f64)>) -> Self {
        PlaneCut { plane, samples }
    }

    /// Validates samples, reduces horizontal angles into [0, 360), then
    /// sorts stably by angle and keeps the first of any duplicate angles.
    fn ingest(&self, peak_dbi: f64) -> Result<Vec<(f64, f64)>, AntennaError> {
        if self.samples.is_empty() {
            return Err(AntennaError::EmptyCut { plane: self.plane });
        }
        let mut out = Vec::with_capacity(self.samples.len());
        for &(angle, gain) in &self.samples {
            if !angle.is_finite() || !gain.is_finite() {
                return Err(AntennaError::NonFiniteCut {
                    plane: self.plane,
                    angle_deg: angle,
                });
            }
            if gain > peak_dbi + PEAK_SLACK_DB {
                return Err(AntennaError::CutAbovePeak {
                    plane: self.plane,
                    angle_deg: angle,
                    gain_dbi: gain,
                    peak_dbi,
                });
            }
            let angle = match self.plane {
                CutPlane::Horizontal => angle.rem_euclid(360.0),
                CutPlane::Vertical => angle,
            };
            out.push((angle, gain));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.dedup_by(|later, first| later.0 == first.0);
        Ok(out)
    }
}

/// Linear interpolation holding the endpoint values outside the sampled range.
fn interp_hold(samples: &[(f64, f64)], x: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|s| s.0 <= x);
    let (x0, y0) = samples[k - 1];
    let (x1, y1) = samples[k];
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Periodic linear interpolation over [0, 360); samples already reduced
/// into that range and sorted.
fn interp_periodic(samples: &[(f64, f64)], x: f64) -> f64 {
    if samples.len() == 1 {
        return samples[0].1;
    }
    let x = x.rem_euclid(360.0);
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if x < first.0 || x > last.0 {
        // Bridge the seam from the last sample to the first one + 360.
        let span = first.0 + 360.0 - last.0;
        let offset = if x > last.0 { x - last.0 } else { x + 360.0 - last.0 };
        return last.1 + (first.1 - last.1) * offset / span;
    }
    interp_hold(samples, x)
}

/// Reconstructs a full-sphere pattern from a vertical and a horizontal cut.
pub fn reconstruct_from_cuts(
    vcut: &PlaneCut,
    hcut: &PlaneCut,
    peak_gain_dbi: f64,
    grid_step_deg: f64,
) -> Result<AntennaPattern, AntennaError> {
    if !peak_gain_dbi.is_finite() {
        return Err(AntennaError::InvalidParameter {
            name: "peak_gain_dbi",
            value: peak_gain_dbi,
        });
    }
    let grid = SphereGrid::new(grid_step_deg)?;
    let v = PlaneCut::new(CutPlane::Vertical, vcut.samples.clone()).ingest(peak_gain_dbi)?;
    let h = PlaneCut::new(CutPlane::Horizontal, hcut.samples.clone()).ingest(peak_gain_dbi)?;

    let v_row: Vec<f64> = grid.elevations().map(|el| interp_hold(&v, el)).collect();
    let h_col: Vec<f64> = grid.azimuths().map(|az| interp_periodic(&h, az)).collect();

    let mut values = Vec::with_capacity(grid.len());
    for gv in &v_row {
        for gh in &h_col {
            values.push(gh + gv - peak_gain_dbi);
        }
    }
    AntennaPattern::from_absolute_dbi(grid_step_deg, values, "plane-cuts")
}

/// Reads a two-column `angle_deg,gain_dbi` CSV. A non-numeric first line is
/// taken as a header; blank lines and `#` comments are skipped.
pub fn read_plane_cut_csv(path: impl AsRef<Path>, plane: CutPlane) -> Result<PlaneCut, AntennaError> {
    let text = std::fs::read_to_string(path)?;
    parse_plane_cut(&text, plane)
}

pub(crate) fn parse_plane_cut(text: &str, plane: CutPlane) -> Result<PlaneCut, AntennaError> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(AntennaError::Parse {
                line: line_no,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parsed = (fields[0].parse::<f64>(), fields[1].parse::<f64>());
        match parsed {
            (Ok(a), Ok(g)) => samples.push((a, g)),
            _ if samples.is_empty() && fields[0].parse::<f64>().is_err() => continue,
            _ => {
                return Err(AntennaError::Parse {
                    line: line_no,
                    message: format!("cannot parse '{line}' as angle_deg,gain_dbi"),
                })
            }
        }
    }
    Ok(PlaneCut::new(plane, samples))
}
