//! The rose profile `rho(theta)`, the level function `F(r, theta) = r - rho(theta)`
//! and the combinatorics and measure of the petals.
//!
//! The profile is
//!
//! ```text
//! rho(theta) = exp(-1/(1 + cos theta)^2) * sin^2(tan(theta/2)),
//! ```
//!
//! extended by continuity (with the value 0) at `theta = pi + 2k pi`. Its zero
//! set splits the circle into countably many petals indexed by `n`, petal `n`
//! spanning `theta` in `(2 atan(n pi), 2 atan((n+1) pi))`. The petals shrink
//! super-exponentially toward the accumulation angle `pi`; beyond `|n| = 2`
//! their area underflows f64, so areas are carried in log space alongside the
//! flushed value.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::vector_field::CartesianState;
use crate::{Error, Result};

/// Exponent magnitude beyond which the flat envelope `exp(-1/(1+cos theta)^2)`
/// is flushed to exactly zero. `exp(-744)` sits at the very bottom of the
/// subnormal range; every term of `rho` and `rho_prime` carries the envelope,
/// so the flush reproduces the continuity extension at machine precision.
pub const FLUSH_EXPONENT: f64 = 744.0;

/// Tolerance on `tan(theta/2)/pi` for declaring a petal-boundary hit.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// An angle in radians. No range restriction; reduction to the principal
/// branch is explicit via [`Angle::principal`], never implicit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Angle(pub f64);

impl Angle {
    pub fn radians(self) -> f64 {
        self.0
    }

    /// Reduce to the principal branch `(-pi, pi]`.
    pub fn principal(self) -> Angle {
        let mut a = self.0.rem_euclid(2.0 * PI);
        if a > PI {
            a -= 2.0 * PI;
        }
        Angle(a)
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle(v)
    }
}

/// Location of an angle relative to the petal decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PetalIndex {
    /// Strictly inside petal `n`.
    Interior(i64),
    /// On a shared endpoint of two consecutive petals (within [`BOUNDARY_TOL`]).
    Boundary,
}

/// One petal of the rose: angular span, apex radius and enclosed area.
///
/// `area` and `max_radius` are the f64 values (exactly 0 once the profile
/// underflows); `ln_area` and `ln_max_radius` stay finite for every petal and
/// are the authoritative magnitudes for ordering and positivity statements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PetalDescriptor {
    pub index: i64,
    pub theta_lo: Angle,
    pub theta_hi: Angle,
    pub max_radius: f64,
    pub ln_max_radius: f64,
    pub area: f64,
    pub ln_area: f64,
}

/// Result of a petal area quadrature: the f64 value plus its log magnitude.
#[derive(Debug, Clone, Copy)]
pub struct PetalArea {
    pub value: f64,
    pub ln_value: f64,
}

/// The rose profile. Total, 2*pi-periodic, even, with values in `[0, 1)`.
pub fn rho(theta: Angle) -> f64 {
    let c = 1.0 + theta.0.cos();
    let inv = 1.0 / (c * c);
    // NaN-safe: inv is +inf at c = 0, so the comparison also covers the
    // continuity extension at theta = pi + 2k pi.
    if !(inv <= FLUSH_EXPONENT) {
        return 0.0;
    }
    // tan(theta/2) without half-angle cancellation.
    let t = theta.0.sin() / c;
    let s = t.sin();
    (-inv).exp() * s * s
}

/// Derivative of the profile with respect to theta. Exactly 0 wherever the
/// flat-region flush applies.
pub fn rho_prime(theta: Angle) -> f64 {
    let c = 1.0 + theta.0.cos();
    let inv = 1.0 / (c * c);
    if !(inv <= FLUSH_EXPONENT) {
        return 0.0;
    }
    let s_th = theta.0.sin();
    let t = s_th / c;
    let st = t.sin();
    let term1 = -2.0 * st * st * s_th / (c * c * c);
    let term2 = (2.0 * t).sin() / c;
    (-inv).exp() * (term1 + term2)
}

/// The level function `F(r, theta) = r - rho(theta)`. Negative radii are a
/// domain error.
pub fn level(r: f64, theta: Angle) -> Result<f64> {
    if r < 0.0 || r.is_nan() {
        return Err(Error::NegativeRadius(r));
    }
    Ok(r - rho(theta))
}

/// Angular span of petal `n`: `(2 atan(n pi), 2 atan((n+1) pi))`.
pub fn petal_bounds(n: i64) -> (Angle, Angle) {
    let lo = 2.0 * (n as f64 * PI).atan();
    let hi = 2.0 * ((n + 1) as f64 * PI).atan();
    (Angle(lo), Angle(hi))
}

/// Inverse of [`petal_bounds`]: the petal strictly containing `theta`, or
/// [`PetalIndex::Boundary`] on a shared endpoint. `theta` must lie strictly
/// inside the principal branch; `+-pi` is the accumulation angle and carries
/// no petal.
pub fn petal_index(theta: Angle) -> Result<PetalIndex> {
    let th = theta.0;
    if !(th > -PI && th < PI) {
        return if th == PI || th == -PI {
            Err(Error::AccumulationAngle(th))
        } else {
            Err(Error::OutOfBranch(th))
        };
    }
    let c = 1.0 + th.cos();
    let w = th.sin() / c / PI; // tan(theta/2) / pi
    if (w - w.round()).abs() < BOUNDARY_TOL {
        return Ok(PetalIndex::Boundary);
    }
    Ok(PetalIndex::Interior(w.floor() as i64))
}

/// Log of the half-squared profile after the substitution `u = tan(theta/2)`:
/// `(1/2) rho^2 dtheta = exp(phi(u)) du` with
/// `phi(u) = -(1+u^2)^2/2 + 4 ln|sin u| - ln(1+u^2)`.
fn phi_sq(u: f64) -> f64 {
    let w = 1.0 + u * u;
    -0.5 * w * w + 4.0 * u.sin().abs().ln() - w.ln()
}

/// Log profile in the `u` chart: `ln rho = -(1+u^2)^2/4 + 2 ln|sin u|`.
fn ln_rho_u(u: f64) -> f64 {
    let w = 1.0 + u * u;
    -0.25 * w * w + 2.0 * u.sin().abs().ln()
}

/// Golden-section maximization of a unimodal function on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        if b - a < 1e-14 * (1.0 + b.abs()) {
            break;
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    noise_rel: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Stop on the requested tolerance, on the integrand's own evaluation
    // noise (refining past it only chases roundoff), or at ulp resolution.
    if delta.abs() <= 15.0 * tol
        || delta.abs() <= noise_rel * (left.abs() + right.abs())
        || b - a < 1e-15 * (1.0 + a.abs())
    {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureDepth { lo: a, hi: b, depth: 0 });
    }
    let l = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, noise_rel, depth - 1)?;
    let r = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, noise_rel, depth - 1)?;
    Ok(l + r)
}

fn simpson_quad(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, noise_rel: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, noise_rel, 64)
}

/// Area enclosed by petal `n`: `1/2 * integral of rho(theta)^2` over the
/// petal span, by adaptive Simpson quadrature in the `u = tan(theta/2)` chart
/// with the log-magnitude peak factored out. The f64 `value` underflows to 0
/// for `|n| >= 2`; `ln_value` stays finite for every petal.
pub fn petal_area(n: i64, quad_tol: f64) -> Result<PetalArea> {
    if !(quad_tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quad_tol must be positive, got {quad_tol}"
        )));
    }
    // rho is even, so petal n mirrors petal -n-1.
    let n = if n < 0 { -n - 1 } else { n };
    let lo = n as f64 * PI;
    let hi = (n + 1) as f64 * PI;
    let (u_star, phi_star) = golden_max(phi_sq, lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo));
    let g = |u: f64| (phi_sq(u) - phi_star).exp();
    // The integrand's relative noise is set by the cancellation in
    // phi - phi*: both terms are O(|phi*|), so roundoff leaves noise of
    // about eps * |phi*| on the exponent. Refining below that is futile.
    let noise_rel = 8.0 * f64::EPSILON * (1.0 + phi_star.abs());
    // First pass at a loose tolerance to scale the real one.
    let rough =
        simpson_quad(g, lo, u_star, 1e-3, noise_rel)? + simpson_quad(g, u_star, hi, 1e-3, noise_rel)?;
    let tol = quad_tol.max(noise_rel) * rough;
    let scaled = simpson_quad(g, lo, u_star, 0.5 * tol, noise_rel)?
        + simpson_quad(g, u_star, hi, 0.5 * tol, noise_rel)?;
    let ln_value = phi_star + scaled.ln();
    Ok(PetalArea {
        value: ln_value.exp(),
        ln_value,
    })
}

/// Apex of petal `n`: the angle maximizing the profile and the maximum
/// radius, as `(theta, max_radius, ln_max_radius)`.
pub fn petal_apex(n: i64) -> (Angle, f64, f64) {
    let n_pos = if n < 0 { -n - 1 } else { n };
    let lo = n_pos as f64 * PI;
    let hi = (n_pos + 1) as f64 * PI;
    let (u_0, _) = golden_max(ln_rho_u, lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo));
    // Golden section locates the peak only to ~sqrt(eps); polish with Newton
    // on d/du ln rho = -u(1+u^2) + 2 cot(u) (the log profile is concave).
    let mut u_star = u_0;
    for _ in 0..8 {
        let w = 1.0 + u_star * u_star;
        let d1 = -u_star * w + 2.0 / u_star.tan();
        let s = u_star.sin();
        let d2 = -(1.0 + 3.0 * u_star * u_star) - 2.0 / (s * s);
        let next = u_star - d1 / d2;
        if next > lo && next < hi {
            u_star = next;
        }
    }
    let ln_max = ln_rho_u(u_star);
    let theta = 2.0 * u_star.atan();
    let theta = if n < 0 { -theta } else { theta };
    (Angle(theta), ln_max.exp(), ln_max)
}

/// Full descriptor for petal `n`.
pub fn petal_descriptor(n: i64, quad_tol: f64) -> Result<PetalDescriptor> {
    let (theta_lo, theta_hi) = petal_bounds(n);
    let (_, max_radius, ln_max_radius) = petal_apex(n);
    let area = petal_area(n, quad_tol)?;
    Ok(PetalDescriptor {
        index: n,
        theta_lo,
        theta_hi,
        max_radius,
        ln_max_radius,
        area: area.value,
        ln_area: area.ln_value,
    })
}

/// Ordered boundary samples of the rose covering petals `-n_petals..n_petals`:
/// `pts_per_petal` equally spaced angles per petal mapped through the profile.
/// Every sample satisfies `F = 0` exactly by construction.
pub fn rose_polyline(n_petals: i64, pts_per_petal: usize) -> Vec<CartesianState> {
    assert!(n_petals >= 1, "n_petals must be >= 1");
    assert!(pts_per_petal >= 2, "pts_per_petal must be >= 2");
    let mut out = Vec::with_capacity((2 * n_petals) as usize * pts_per_petal);
    for n in -n_petals..n_petals {
        let (lo, hi) = petal_bounds(n);
        for k in 0..pts_per_petal {
            let th = lo.0 + (hi.0 - lo.0) * k as f64 / (pts_per_petal - 1) as f64;
            let r = rho(Angle(th));
            out.push(CartesianState {
                x: r * th.cos(),
                y: r * th.sin(),
            });
        }
    }
    out
}
