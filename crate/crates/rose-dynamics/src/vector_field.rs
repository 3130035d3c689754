//! The regularized vector field in both charts.
//!
//! Polar:
//!
//! ```text
//! dr/dt     = -exp(-1/r^2) * H(r, theta),    H = r - rho(theta) - rho'(theta)
//! dtheta/dt =  exp(-1/r^2)
//! ```
//!
//! Cartesian:
//!
//! ```text
//! dx/dt = -exp(-1/r^2) * (y + x - (x/r) G(x, y))
//! dy/dt = -exp(-1/r^2) * (y - x - (y/r) G(x, y))
//! ```
//!
//! where `G` is the Cartesian expression of `rho + rho'` (zero on the closed
//! negative x half-axis and at the origin). The factor `psi = exp(-1/r^2)`
//! extends the field smoothly by zero at the origin; it rescales time without
//! changing orbit geometry, so the orbit family is that of the direction
//! field `dr/dtheta = -H`.

use serde::{Deserialize, Serialize};

use crate::rose_geometry::{rho, rho_prime, Angle, FLUSH_EXPONENT};

/// A phase-space point in the polar chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub theta: Angle,
}

/// A phase-space point in the Cartesian chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Polar,
    Cartesian,
}

/// Field value in one chart: `(dr/dt, dtheta/dt)` or `(dx/dt, dy/dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    pub first: f64,
    pub second: f64,
    pub chart: Chart,
}

impl PolarState {
    pub fn to_cartesian(self) -> CartesianState {
        CartesianState {
            x: self.r * self.theta.0.cos(),
            y: self.r * self.theta.0.sin(),
        }
    }
}

impl CartesianState {
    pub fn to_polar(self) -> PolarState {
        PolarState {
            r: self.x.hypot(self.y),
            theta: Angle(self.y.atan2(self.x)),
        }
    }
}

/// The time-rescaling factor `exp(-1/r^2)`, extended by 0 at `r = 0`.
/// Underflows to exactly 0 for `r` below about 0.0366.
pub fn psi(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        (-1.0 / (r * r)).exp()
    }
}

/// `H(r, theta) = r - rho(theta) - rho'(theta)`; equals `r` wherever the
/// flat-region flush applies (in particular at `theta = pi + 2k pi`).
pub fn h(r: f64, theta: Angle) -> f64 {
    r - rho(theta) - rho_prime(theta)
}

/// The field in the polar chart. Both components are exactly 0 at `r = 0`.
pub fn polar_field(s: PolarState) -> FieldVector {
    let p = psi(s.r);
    FieldVector {
        first: -p * h(s.r, s.theta),
        second: p,
        chart: Chart::Polar,
    }
}

/// The Cartesian expression of `rho(theta) + rho'(theta)` at the angle of
/// `(x, y)`; defined as 0 for `y = 0, x <= 0` and flushed to 0 together with
/// the polar profile (the envelope exponent `(r/(r+x))^2 = 1/(1+cos theta)^2`
/// is shared between the charts).
pub fn g(s: CartesianState) -> f64 {
    let (x, y) = (s.x, s.y);
    if y == 0.0 && x <= 0.0 {
        return 0.0;
    }
    let r = x.hypot(y);
    let rx = r + x;
    if rx <= 0.0 {
        // r + x underflowed with y != 0: the envelope is far below the flush.
        return 0.0;
    }
    let q = r / rx;
    let inv = q * q;
    if !(inv <= FLUSH_EXPONENT) {
        return 0.0;
    }
    let t = y / rx;
    let st = t.sin();
    (-inv).exp() * (st * st - 2.0 * y * r * r * st * st / (rx * rx * rx) + q * (2.0 * t).sin())
}

/// The field in the Cartesian chart. Exactly `(0, 0)` at the origin.
pub fn cartesian_field(s: CartesianState) -> FieldVector {
    let r = s.x.hypot(s.y);
    if r == 0.0 {
        return FieldVector {
            first: 0.0,
            second: 0.0,
            chart: Chart::Cartesian,
        };
    }
    let p = psi(r);
    let gv = g(s);
    FieldVector {
        first: -p * (s.y + s.x - s.x / r * gv),
        second: -p * (s.y - s.x - s.y / r * gv),
        chart: Chart::Cartesian,
    }
}

/// The slope field actually integrated in the angle parameterization:
/// `dr/dtheta = -H(r, theta)`. Orbits coincide with those of the full field
/// away from the origin.
pub fn direction_field(r: f64, theta: Angle) -> f64 {
    -h(r, theta)
}

/// Convert a polar-chart field vector at `s` to Cartesian components.
pub fn field_to_cartesian(s: PolarState, v: FieldVector) -> FieldVector {
    debug_assert_eq!(v.chart, Chart::Polar);
    let (sin, cos) = s.theta.0.sin_cos();
    FieldVector {
        first: v.first * cos - s.r * v.second * sin,
        second: v.first * sin + s.r * v.second * cos,
        chart: Chart::Cartesian,
    }
}
