//! Ant3D text serialization.
//!
//! ```text
//! # format_version: 1
//! # frequency_ghz: 16.95          (omitted for frequency-flat patterns)
//! # peak_gain_dbi: 8
//! # polarization: vertical
//! # grid_step_deg: 1
//! # source: 3gpp-tr38.901
//! # mount_yaw_deg: 0
//! # mount_pitch_deg: 0
//! phi_rad,theta_rad,E_phi_re,E_phi_im,E_theta_re,E_theta_im
//! 0,-1.5707963267948966,0,0,0.0251188643150958,0
//! ...
//! ```
//!
//! Rows are elevation-major: θ (elevation, radians) outer, φ (azimuth,
//! radians) inner. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use super::{AntennaError, AntennaPattern, FieldGrid, Mount, SphereGrid};

pub const ANT3D_FORMAT_VERSION: u32 = 1;

const COLUMNS: &str = "phi_rad,theta_rad,E_phi_re,E_phi_im,E_theta_re,E_theta_im";
const ANGLE_TOL_RAD: f64 = 1e-9;

pub fn write_ant3d_string(pattern: &AntennaPattern) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {ANT3D_FORMAT_VERSION}");
    if let Some(f) = pattern.frequency_ghz {
        let _ = writeln!(out, "# frequency_ghz: {f}");
    }
    let _ = writeln!(out, "# peak_gain_dbi: {}", pattern.peak_gain_dbi());
    let _ = writeln!(out, "# polarization: {}", pattern.polarization);
    let _ = writeln!(out, "# grid_step_deg: {}", pattern.grid_step_deg());
    let _ = writeln!(out, "# source: {}", pattern.source);
    let _ = writeln!(out, "# mount_yaw_deg: {}", pattern.mount.yaw_deg);
    let _ = writeln!(out, "# mount_pitch_deg: {}", pattern.mount.pitch_deg);
    out.push_str(COLUMNS);
    out.push('\n');
    for c in FieldGrid::from_pattern(pattern).cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.phi_rad, c.theta_rad, c.e_phi_re, c.e_phi_im, c.e_theta_re, c.e_theta_im
        );
    }
    out
}

pub fn write_ant3d(pattern: &AntennaPattern, path: impl AsRef<Path>) -> Result<(), AntennaError> {
    std::fs::write(path, write_ant3d_string(pattern))?;
    Ok(())
}

pub fn read_ant3d(path: impl AsRef<Path>) -> Result<AntennaPattern, AntennaError> {
    let text = std::fs::read_to_string(path)?;
    read_ant3d_str(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> AntennaError {
    AntennaError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Default)]
struct Header {
    version: Option<u32>,
    frequency_ghz: Option<f64>,
    peak_gain_dbi: Option<f64>,
    polarization: Option<super::Polarization>,
    grid_step_deg: Option<f64>,
    source: Option<String>,
    mount: Mount,
}

fn parse_number(line: usize, key: &str, value: &str) -> Result<f64, AntennaError> {
    let v: f64 = value
        .parse()
        .map_err(|_| parse_err(line, format!("malformed header: {key} = '{value}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("malformed header: {key} is not finite")));
    }
    Ok(v)
}

pub fn read_ant3d_str(text: &str) -> Result<AntennaPattern, AntennaError> {
    let mut header = Header::default();
    let mut rows: Vec<(usize, [f64; 6])> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(parse_err(line_no, "malformed header: header line after data rows"));
            }
            let (key, value) = body
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, "malformed header: expected '# key: value'"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "format_version" => {
                    let v: u32 = value
                        .parse()
                        .map_err(|_| parse_err(line_no, "malformed header: bad format_version"))?;
                    if v != ANT3D_FORMAT_VERSION {
                        return Err(parse_err(line_no, format!("unsupported format_version {v}")));
                    }
                    header.version = Some(v);
                }
                "frequency_ghz" => header.frequency_ghz = Some(parse_number(line_no, key, value)?),
                "peak_gain_dbi" => header.peak_gain_dbi = Some(parse_number(line_no, key, value)?),
                "grid_step_deg" => header.grid_step_deg = Some(parse_number(line_no, key, value)?),
                "polarization" => {
                    header.polarization = Some(
                        value
                            .parse()
                            .map_err(|e: String| parse_err(line_no, format!("malformed header: {e}")))?,
                    )
                }
                "source" => header.source = Some(value.to_string()),
                "mount_yaw_deg" => header.mount.yaw_deg = parse_number(line_no, key, value)?,
                "mount_pitch_deg" => header.mount.pitch_deg = parse_number(line_no, key, value)?,
                other => return Err(parse_err(line_no, format!("malformed header: unknown key '{other}'"))),
            }
            continue;
        }
        if line.starts_with("phi_rad") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(parse_err(
                line_no,
                format!("missing columns: expected 6, found {}", fields.len()),
            ));
        }
        let mut vals = [0.0; 6];
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(line_no, format!("cannot parse '{f}' as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value in column {}", k + 1)));
            }
            vals[k] = v;
        }
        rows.push((line_no, vals));
    }

    let missing = |key: &str| parse_err(last_line.max(1), format!("malformed header: missing '{key}'"));
    header.version.ok_or_else(|| missing("format_version"))?;
    let peak = header.peak_gain_dbi.ok_or_else(|| missing("peak_gain_dbi"))?;
    let step = header.grid_step_deg.ok_or_else(|| missing("grid_step_deg"))?;
    let grid = SphereGrid::new(step).map_err(|e| parse_err(1, format!("malformed header: {e}")))?;

    if rows.is_empty() {
        return Err(parse_err(last_line.max(1), "no data rows"));
    }
    let theta_min = rows.iter().map(|r| r.1[1]).fold(f64::INFINITY, f64::min);
    let theta_max = rows.iter().map(|r| r.1[1]).fold(f64::NEG_INFINITY, f64::max);
    let half_pi = std::f64::consts::FRAC_PI_2;
    if theta_min > -half_pi + ANGLE_TOL_RAD || theta_max < half_pi - ANGLE_TOL_RAD {
        return Err(parse_err(
            rows[0].0,
            format!(
                "incomplete sphere: elevation spans [{:.6}, {:.6}] deg, need [-90, 90]",
                theta_min.to_degrees(),
                theta_max.to_degrees()
            ),
        ));
    }
    if rows.len() != grid.len() {
        return Err(parse_err(
            rows.last().map(|r| r.0).unwrap_or(1),
            format!("non-uniform grid: {} rows, a {step}° grid needs {}", rows.len(), grid.len()),
        ));
    }

    let mut gain_db = Vec::with_capacity(grid.len());
    for (k, (line_no, v)) in rows.iter().enumerate() {
        let i = k / grid.n_azimuth();
        let j = k % grid.n_azimuth();
        let expect_theta = grid.elevation_deg(i).to_radians();
        let expect_phi = grid.azimuth_deg(j).to_radians();
        if (v[0] - expect_phi).abs() > ANGLE_TOL_RAD || (v[1] - expect_theta).abs() > ANGLE_TOL_RAD {
            return Err(parse_err(
                *line_no,
                format!(
                    "non-uniform grid: expected (phi, theta) = ({expect_phi}, {expect_theta}), found ({}, {})",
                    v[0], v[1]
                ),
            ));
        }
        let power = v[2] * v[2] + v[3] * v[3] + v[4] * v[4] + v[5] * v[5];
        if !(power > 0.0) {
            return Err(parse_err(*line_no, "zero field amplitude (gain of -inf dB)"));
        }
        gain_db.push(10.0 * power.log10() - peak);
    }

    let mut pattern =
        AntennaPattern::from_normalized_db(step, gain_db, peak, header.source.unwrap_or_default())?;
    pattern.frequency_ghz = header.frequency_ghz;
    pattern.polarization = header.polarization.unwrap_or_default();
    pattern.mount = header.mount;
    Ok(pattern)
}
