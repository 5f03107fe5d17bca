//! Mount orientation.
//!
//! Global frame: x toward azimuth 0° on the horizon, y toward azimuth 90°,
//! z up. An orientation with yaw ψ and pitch ϑ rotates the antenna so that
//! its boresight (local azimuth 0°, elevation 0°) points at global azimuth
//! ψ, elevation ϑ. Lookups map a global direction into the antenna frame by
//! undoing the yaw about z, then the pitch about the rotated y axis.

use super::AntennaPattern;

/// A proper rotation matrix taking local antenna coordinates to global ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn from_yaw_pitch(yaw_deg: f64, pitch_deg: f64) -> Rotation {
        let (sy, cy) = yaw_deg.to_radians().sin_cos();
        let (sp, cp) = pitch_deg.to_radians().sin_cos();
        // R = Rz(yaw) · Ry(-pitch); boresight x maps to (cp cy, cp sy, sp).
        Rotation {
            m: [
                [cy * cp, -sy, -cy * sp],
                [sy * cp, cy, -sy * sp],
                [sp, 0.0, cp],
            ],
        }
    }

    /// `self` applied after `inner`.
    pub fn compose(&self, inner: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[r][k] * inner.m[k][c]).sum();
            }
        }
        Rotation { m }
    }

    pub fn inverse(&self) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = self.m[c][r];
            }
        }
        Rotation { m }
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.m[r][0] * v[0] + self.m[r][1] * v[1] + self.m[r][2] * v[2];
        }
        out
    }

    /// Global direction → local antenna frame.
    pub fn to_local(&self, v: [f64; 3]) -> [f64; 3] {
        self.inverse().apply(v)
    }

    pub fn is_identity(&self) -> bool {
        *self == Rotation::IDENTITY
    }

    pub fn max_abs_diff(&self, other: &Rotation) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                d = d.max((self.m[r][c] - other.m[r][c]).abs());
            }
        }
        d
    }
}

pub fn angles_to_direction(elevation_deg: f64, azimuth_deg: f64) -> [f64; 3] {
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    [ce * ca, ce * sa, se]
}

/// Unit vector → (elevation, azimuth) in degrees. Azimuth is in [0, 360)
/// and is reported as 0 at the poles.
pub fn direction_to_angles(v: [f64; 3]) -> (f64, f64) {
    let horiz = v[0].hypot(v[1]);
    let el = v[2].atan2(horiz).to_degrees();
    if horiz < 1e-12 {
        return (el, 0.0);
    }
    let az = v[1].atan2(v[0]).to_degrees().rem_euclid(360.0);
    // rem_euclid can round a tiny negative angle up to exactly 360.
    (el, if az >= 360.0 { 0.0 } else { az })
}

/// A pattern viewed through a mount rotation.
#[derive(Debug, Clone, Copy)]
pub struct OrientedPattern<'a> {
    pattern: &'a AntennaPattern,
    inverse: Rotation,
    identity: bool,
}

impl<'a> OrientedPattern<'a> {
    pub fn new(pattern: &'a AntennaPattern, rotation: Rotation) -> Self {
        OrientedPattern {
            pattern,
            inverse: rotation.inverse(),
            identity: rotation.is_identity(),
        }
    }

    pub fn pattern(&self) -> &'a AntennaPattern {
        self.pattern
    }

    pub fn rotation(&self) -> Rotation {
        self.inverse.inverse()
    }

    /// Adds a further rotation on top of the current one.
    pub fn then(&self, outer: &Rotation) -> OrientedPattern<'a> {
        OrientedPattern::new(self.pattern, outer.compose(&self.rotation()))
    }

    /// Local (elevation, azimuth) seen for a global direction.
    pub fn local_angles(&self, elevation_deg: f64, azimuth_deg: f64) -> (f64, f64) {
        if self.identity {
            return (elevation_deg, azimuth_deg);
        }
        let v = angles_to_direction(elevation_deg, azimuth_deg);
        direction_to_angles(self.inverse.apply(v))
    }

    /// Absolute gain in dBi toward a global direction.
    pub fn gain_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        let (el, az) = self.local_angles(elevation_deg, azimuth_deg);
        self.pattern.gain_at(el, az)
    }
}

/// Views `pattern` with its boresight rotated to (`yaw_deg`, `pitch_deg`).
pub fn apply_orientation(pattern: &AntennaPattern, yaw_deg: f64, pitch_deg: f64) -> OrientedPattern<'_> {
    let rotation = if yaw_deg == 0.0 && pitch_deg == 0.0 {
        Rotation::IDENTITY
    } else {
        Rotation::from_yaw_pitch(yaw_deg, pitch_deg)
    };
    OrientedPattern::new(pattern, rotation)
}
