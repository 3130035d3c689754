//! ω-limit-set estimation against the rose, the petal-measure counting
//! demonstration, and the numerical smoothness audit of the Cartesian field.
//!
//! A note on precision in the smoothness audit: third-order central
//! differences at h = 1e-5 amplify evaluation roundoff by ~1/h^3, which in
//! plain f64 swamps the signal near the negative x-axis. The audit therefore
//! evaluates the field in double-double arithmetic (`twofloat`), mirroring
//! the exact flush semantics of the f64 implementation, and reports the
//! rounded f64 stencil results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::analytic_orbits::InitialCondition;
use crate::integrator::{integrate_theta, IntegratorConfig, Terminal};
use crate::rose_geometry::{petal_area, petal_bounds, rho, Angle};
use crate::vector_field::PolarState;
use crate::{Error, Result};

/// Radial gap |F(r, theta)| — the primary distance-to-rose metric. It bounds
/// the gap along the ray exactly (dF/dr = 1) and decays with the orbit.
pub fn distance_to_rose(s: &PolarState) -> f64 {
    (s.r - rho(s.theta)).abs()
}

/// Squared Euclidean distance from `p` to the segment `[a, b]`.
fn dist_sq_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len_sq).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    let (ex, ey) = (p.0 - cx, p.1 - cy);
    ex * ex + ey * ey
}

/// Euclidean distance from a point to a polyline (in Cartesian coordinates).
pub fn distance_to_polyline(p: (f64, f64), poly: &[(f64, f64)]) -> f64 {
    if poly.is_empty() {
        return f64::INFINITY;
    }
    if poly.len() == 1 {
        let (ex, ey) = (p.0 - poly[0].0, p.1 - poly[0].1);
        return ex.hypot(ey);
    }
    poly.windows(2)
        .map(|w| dist_sq_to_segment(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Densely sampled boundary of one petal in Cartesian coordinates. Petals
/// whose profile is flushed to zero everywhere collapse to the origin.
fn petal_polyline(n: i64, points: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = petal_bounds(n);
    (0..=points)
        .map(|k| {
            let th = lo.0 + (hi.0 - lo.0) * k as f64 / points as f64;
            let r = rho(Angle(th));
            (r * th.cos(), r * th.sin())
        })
        .collect()
}

/// Result of forward integration until the orbit is uniformly ε-close to
/// the rose, plus per-petal Euclidean coverage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaEstimate {
    pub converged: bool,
    pub epsilon: f64,
    pub revolutions_used: u32,
    /// Closest Euclidean approach of the orbit to each tracked petal's
    /// boundary polyline, keyed by petal index.
    pub per_petal_closest_approach: BTreeMap<i64, f64>,
    /// Tracked petals whose profile underflows to exactly zero; their
    /// "polyline" degenerates to the origin and the reported approach is
    /// the orbit's radius, not a meaningful petal distance.
    pub unresolvable: Vec<i64>,
}

/// Integrate forward one revolution at a time until sup |F| over a full
/// revolution drops below `epsilon`, then sweep one more revolution to
/// record per-petal closest approaches. Tracks petals |n| <= n_petals_tracked.
pub fn omega_estimate(
    ic: &InitialCondition,
    epsilon: f64,
    n_petals_tracked: i64,
    cfg: &IntegratorConfig,
) -> Result<OmegaEstimate> {
    if !(ic.f0 > 0.0) {
        return Err(Error::InvalidInitialCondition(format!(
            "omega_estimate needs F0 > 0, got {}",
            ic.f0
        )));
    }
    if !(epsilon > 0.0) || n_petals_tracked < 0 {
        return Err(Error::InvalidConfig(format!(
            "epsilon = {epsilon}, n_petals_tracked = {n_petals_tracked}"
        )));
    }
    cfg.validate()?;
    const MAX_REVOLUTIONS: u32 = 200;
    const POLYLINE_POINTS: usize = 1024;

    let mut polylines: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
    let mut unresolvable = Vec::new();
    let mut min_span = f64::INFINITY;
    for n in -n_petals_tracked..=n_petals_tracked {
        let (lo, hi) = petal_bounds(n);
        min_span = min_span.min(hi.0 - lo.0);
        let (_, apex_r, _) = crate::rose_geometry::petal_apex(n);
        if apex_r < 1e-300 {
            unresolvable.push(n);
            polylines.insert(n, vec![(0.0, 0.0)]);
        } else {
            polylines.insert(n, petal_polyline(n, POLYLINE_POINTS));
        }
    }
    // Steps must not leap over the narrowest tracked petal.
    let mut cfg = *cfg;
    cfg.h_max = cfg.h_max.min(min_span / 4.0).max(cfg.h_min);

    let mut approach: BTreeMap<i64, f64> =
        polylines.keys().map(|&n| (n, f64::INFINITY)).collect();
    let two_pi = std::f64::consts::TAU;
    let mut current = *ic;
    let mut revolutions_used = 0u32;
    // The decay law makes |F| its own envelope: once |F| < epsilon at the
    // start of a revolution, sup |F| over that whole revolution is below
    // epsilon. Reaching that point takes ceil(ln(F0/eps) / 2 pi) revolutions;
    // one extra measurement sweep then records per-petal approaches over an
    // entire epsilon-close revolution.
    loop {
        if current.f0 < epsilon {
            let sweep = integrate_theta(&current, Angle(current.theta0.0 + two_pi), &cfg)?;
            if let Terminal::StepFailure(kind) = sweep.terminal {
                return Err(Error::InvalidConfig(format!("integration failed: {kind:?}")));
            }
            for s in &sweep.samples {
                let c = s.state.to_cartesian();
                for (&n, poly) in &polylines {
                    let d = distance_to_polyline((c.x, c.y), poly);
                    let slot = approach.get_mut(&n).unwrap();
                    if d < *slot {
                        *slot = d;
                    }
                }
            }
            return Ok(OmegaEstimate {
                converged: true,
                epsilon,
                revolutions_used,
                per_petal_closest_approach: approach,
                unresolvable,
            });
        }
        if revolutions_used >= MAX_REVOLUTIONS {
            return Err(Error::OmegaNotConverged {
                sup_f: current.f0,
                revolutions: revolutions_used,
            });
        }
        let orbit = integrate_theta(&current, Angle(current.theta0.0 + two_pi), &cfg)?;
        if let Terminal::StepFailure(kind) = orbit.terminal {
            return Err(Error::InvalidConfig(format!("integration failed: {kind:?}")));
        }
        revolutions_used += 1;
        let last = orbit.last();
        current = InitialCondition::new(last.state.r, Angle(last.param))?;
    }
}

/// Petal-area bucketing per the disjointness counting argument: any band
/// (domain/(n+1), domain/n] can hold at most n disjoint petals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AreaBucketReport {
    pub domain_area: f64,
    pub petal_areas: BTreeMap<i64, f64>,
    /// Natural logs of the areas; meaningful even where the area itself
    /// underflows f64 (petals |n| >= 2).
    pub petal_ln_areas: BTreeMap<i64, f64>,
    /// Band index n -> number of petals with area in (domain/(n+1), domain/n].
    pub bucket_counts: BTreeMap<i64, usize>,
    /// Petals whose band index overflows i64 (astronomically deep bands),
    /// keyed by ln(domain/area). Each such band trivially satisfies its
    /// count bound.
    pub deep: Vec<(i64, f64)>,
}

/// Bucket the areas of petals |n| <= n_petals. `domain_area` must contain
/// the rose; the unit disk (area π) always works since ρ < 1.
pub fn petal_area_buckets(
    n_petals: i64,
    domain_area: f64,
    quad_tol: f64,
) -> Result<AreaBucketReport> {
    if !(domain_area > 0.0) || n_petals < 0 || !(quad_tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "n_petals = {n_petals}, domain_area = {domain_area}, quad_tol = {quad_tol}"
        )));
    }
    let mut petal_areas = BTreeMap::new();
    let mut petal_ln_areas = BTreeMap::new();
    let mut bucket_counts: BTreeMap<i64, usize> = BTreeMap::new();
    let mut deep = Vec::new();
    let mut total = 0.0f64;
    let ln_domain = domain_area.ln();
    // floor(domain/area) fits in i64 only while ln(domain/area) < ln(i64::MAX).
    let ln_band_cap = (i64::MAX as f64).ln();
    for n in -n_petals..=n_petals {
        let area = petal_area(n, quad_tol)?;
        petal_areas.insert(n, area.value);
        petal_ln_areas.insert(n, area.ln_value);
        total += area.value;
        if total > domain_area {
            return Err(Error::MeasureBound(format!(
                "petal areas sum to {total} > domain {domain_area}"
            )));
        }
        let band_ln = ln_domain - area.ln_value;
        if band_ln < ln_band_cap {
            let band = (domain_area / area.value).floor() as i64;
            // Disjointness: band count may not exceed the band index.
            let count = bucket_counts.entry(band).or_insert(0);
            *count += 1;
            if (*count as i64) > band {
                return Err(Error::MeasureBound(format!(
                    "band {band} holds {count} petals"
                )));
            }
        } else {
            deep.push((n, band_ln));
        }
    }
    Ok(AreaBucketReport {
        domain_area,
        petal_areas,
        petal_ln_areas,
        bucket_counts,
        deep,
    })
}

// ---- smoothness audit -----------------------------------------------------

/// ln 2 split into a double-double constant.
const LN_2_HI: f64 = std::f64::consts::LN_2;
const LN_2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// Double-double exponential: reduce `a = k ln 2 + t`, sum the Taylor series
/// for `e^t` (|t| <= ln 2 / 2, so ~25 terms reach the double-double noise
/// floor), and scale by `2^k`. The dd library's own `exp` is accurate only
/// to ~1e-12 for |a| beyond about 0.7, which is far too coarse for the
/// high-order stencils below.
fn dd_exp(a: TwoFloat) -> TwoFloat {
    let ah: f64 = a.hi();
    if ah < -746.0 {
        return TwoFloat::from(0.0);
    }
    let k = (ah / std::f64::consts::LN_2).round();
    let t = a - TwoFloat::from(k) * TwoFloat::new_add(LN_2_HI, LN_2_LO);
    let mut sum = TwoFloat::from(1.0);
    for n in (1..=26).rev() {
        sum = TwoFloat::from(1.0) + sum * t / TwoFloat::from(n as f64);
    }
    // 2^k in two exact power-of-two factors so the low word survives even
    // when the result dips toward the subnormal range.
    let k = k as i32;
    let (k1, k2) = (k / 2, k - k / 2);
    sum * TwoFloat::from(f64::powi(2.0, k1)) * TwoFloat::from(f64::powi(2.0, k2))
}

/// The Cartesian field evaluated in double-double arithmetic with the same
/// flush rules as the f64 implementation.
fn dd_field(x: TwoFloat, y: TwoFloat) -> (TwoFloat, TwoFloat) {
    let zero = TwoFloat::from(0.0);
    let r2 = x * x + y * y;
    if r2 == zero {
        return (zero, zero);
    }
    let r = r2.sqrt();
    let inv_r2 = r2.recip();
    // exp underflows past e^-746; the f64 field is exactly 0 there.
    if inv_r2 > TwoFloat::from(746.0) {
        return (zero, zero);
    }
    let psi = dd_exp(-inv_r2);
    let g = dd_g(x, y, r);
    // (x - y - g·x/r, x + y - g·y/r) scaled by ψ, matching the f64 layout.
    let gx = g * x / r;
    let gy = g * y / r;
    (psi * (-x + gx - y), psi * (x - y + gy))
}

/// ρ(θ)+ρ'(θ) expressed in Cartesian variables, double-double. Flushed to 0
/// on the closed negative x-axis and wherever the leading exponential
/// underflows, exactly like the f64 version.
fn dd_g(x: TwoFloat, y: TwoFloat, r: TwoFloat) -> TwoFloat {
    let zero = TwoFloat::from(0.0);
    if y == zero && x <= zero {
        return zero;
    }
    let rx = r + x;
    if !(rx > zero) {
        return zero;
    }
    let q = r / rx;
    if q * q > TwoFloat::from(744.0) {
        return zero;
    }
    let t = y / rx;
    let st = t.sin();
    let e = dd_exp(-(q * q));
    let term = st * st - TwoFloat::from(2.0) * y * r * r * st * st / (rx * rx * rx)
        + q * (TwoFloat::from(2.0) * t).sin();
    e * term
}

/// Raw finite-difference estimates of one derivative order of both field
/// components transverse to the negative x-axis at (x0, 0).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub probe_x: f64,
    pub order: u32,
    pub h_values: Vec<f64>,
    /// Per-h central-difference estimates, x component then y component.
    pub estimates_x: Vec<f64>,
    pub estimates_y: Vec<f64>,
    /// Richardson-style extrapolated limits from the two smallest h.
    pub converged_limit_x: f64,
    pub converged_limit_y: f64,
}

/// Central stencil of the requested order in y across the axis at (x0, 0).
fn stencil(x0: f64, order: u32, h: f64) -> Result<(f64, f64)> {
    let x = TwoFloat::from(x0);
    let eval = |yy: f64| -> Result<(TwoFloat, TwoFloat)> {
        let v = dd_field(x, TwoFloat::from(yy));
        let (a, b): (f64, f64) = (v.0.into(), v.1.into());
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteField { x: x0, y: yy });
        }
        Ok(v)
    };
    let h2 = TwoFloat::from(h * h);
    let h3 = TwoFloat::from(2.0 * h * h * h);
    let hh = TwoFloat::from(2.0 * h);
    let out = match order {
        0 => {
            let (p, m) = (eval(h)?, eval(-h)?);
            let half = TwoFloat::from(0.5);
            ((p.0 + m.0) * half, (p.1 + m.1) * half)
        }
        1 => {
            let (p, m) = (eval(h)?, eval(-h)?);
            ((p.0 - m.0) / hh, (p.1 - m.1) / hh)
        }
        2 => {
            let (p, c, m) = (eval(h)?, eval(0.0)?, eval(-h)?);
            let two = TwoFloat::from(2.0);
            ((p.0 - two * c.0 + m.0) / h2, (p.1 - two * c.1 + m.1) / h2)
        }
        3 => {
            let (p2, p1, m1, m2) = (eval(2.0 * h)?, eval(h)?, eval(-h)?, eval(-2.0 * h)?);
            let two = TwoFloat::from(2.0);
            (
                (p2.0 - two * p1.0 + two * m1.0 - m2.0) / h3,
                (p2.1 - two * p1.1 + two * m1.1 - m2.1) / h3,
            )
        }
        _ => {
            return Err(Error::InvalidConfig(format!(
                "derivative order {order} not in 0..=3"
            )))
        }
    };
    Ok((out.0.into(), out.1.into()))
}

/// Probe transverse smoothness of the Cartesian field at (x0, 0), x0 <= 0.
/// Reports raw per-h central differences plus an extrapolated limit.
pub fn smoothness_audit(x0: f64, order: u32, h_values: &[f64]) -> Result<SmoothnessReport> {
    if !(x0 <= 0.0) || !x0.is_finite() {
        return Err(Error::InvalidConfig(format!("x0 must be <= 0, got {x0}")));
    }
    if h_values.is_empty()
        || h_values.windows(2).any(|w| w[1] >= w[0])
        || h_values.iter().any(|&h| !(h > 0.0))
    {
        return Err(Error::InvalidConfig(
            "h_values must be strictly decreasing and positive".into(),
        ));
    }
    let mut estimates_x = Vec::with_capacity(h_values.len());
    let mut estimates_y = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let (ex, ey) = stencil(x0, order, h)?;
        estimates_x.push(ex);
        estimates_y.push(ey);
    }
    let extrapolate = |v: &[f64]| -> f64 {
        let n = v.len();
        if n >= 2 {
            // Central stencils carry O(h^2) error; with h shrinking 10x per
            // entry, the last value dominates and the correction is tiny.
            v[n - 1] + (v[n - 1] - v[n - 2]) / 99.0
        } else {
            v[0]
        }
    };
    Ok(SmoothnessReport {
        probe_x: x0,
        order,
        h_values: h_values.to_vec(),
        estimates_x: estimates_x.clone(),
        estimates_y: estimates_y.clone(),
        converged_limit_x: extrapolate(&estimates_x),
        converged_limit_y: extrapolate(&estimates_y),
    })
}

/// ln of the ratio e^(−1/r²)·e^(−(r/(r+x))²)/(r+x)ⁿ at (x, y). This is the
/// quantity whose limit along (x, y) → (x0, 0), x0 < 0, must be −∞ for the
/// Cartesian form to flush smoothly across the negative x-axis.
pub fn boundary_ratio_ln(x: f64, y: f64, n: u32) -> f64 {
    let r = x.hypot(y);
    // r + x loses all precision for x < 0, |y| << |x|; use y²/(r − x).
    let rx = if x < 0.0 { y * y / (r - x) } else { r + x };
    if rx <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let q = r / rx;
    -1.0 / (r * r) - q * q - n as f64 * rx.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rose_geometry::petal_descriptor;
    use crate::vector_field::{cartesian_field, CartesianState};
    use std::f64::consts::PI;

    #[test]
    fn distance_to_rose_examples() {
        let on = PolarState {
            r: rho(Angle(1.3)),
            theta: Angle(1.3),
        };
        assert_eq!(distance_to_rose(&on), 0.0);
        let off = PolarState {
            r: rho(Angle(1.0)) + 0.2,
            theta: Angle(1.0),
        };
        assert!((distance_to_rose(&off) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn distance_decays_per_revolution() {
        let th0 = Angle(PI / 2.0);
        let ic = InitialCondition::new(rho(th0) + 0.2, th0).unwrap();
        let cfg = IntegratorConfig::default();
        let orbit = integrate_theta(&ic, Angle(th0.0 + 6.0 * PI), &cfg).unwrap();
        let d_at = |k: f64| {
            let target = th0.0 + 2.0 * PI * k;
            let s = orbit
                .samples
                .iter()
                .min_by(|a, b| {
                    (a.param - target)
                        .abs()
                        .total_cmp(&(b.param - target).abs())
                })
                .unwrap();
            distance_to_rose(&s.state)
        };
        let ratio = d_at(1.0) / d_at(0.0);
        assert!((ratio - (-2.0 * PI).exp()).abs() < 1e-4);
    }

    #[test]
    fn polyline_distance_basics() {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)];
        assert!((distance_to_polyline((0.5, -1.0), &square) - 1.0).abs() < 1e-15);
        assert!((distance_to_polyline((2.0, 1.0), &square) - 1.0).abs() < 1e-15);
        assert_eq!(distance_to_polyline((1.0, 0.5), &square), 0.0);
        assert!((distance_to_polyline((3.0, 4.0), &[(0.0, 0.0)]) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn omega_estimate_tiny_f0_converges_in_one_pass() {
        let th0 = Angle(PI / 2.0);
        let ic = InitialCondition::new(rho(th0) + 1e-6, th0).unwrap();
        let est = omega_estimate(&ic, 1e-3, 2, &IntegratorConfig::default()).unwrap();
        assert!(est.converged);
        assert_eq!(est.revolutions_used, 0, "already within epsilon at start");
        for (_, &d) in &est.per_petal_closest_approach {
            assert!(d <= 1e-3);
        }
    }

    #[test]
    fn omega_estimate_envelope_revolution_count() {
        let th0 = Angle(PI / 2.0);
        let ic = InitialCondition::new(rho(th0) + 0.5, th0).unwrap();
        let est = omega_estimate(&ic, 1e-3, 2, &IntegratorConfig::default()).unwrap();
        // F0 e^(-2πm) < ε first at m = ⌈ln(F0/ε)/2π⌉ = 1.
        assert!(est.converged);
        assert_eq!(est.revolutions_used, 1);
    }

    #[test]
    fn omega_estimate_rejects_bad_input() {
        let ic = InitialCondition::new(0.1 * rho(Angle(1.0)), Angle(1.0)).unwrap();
        assert!(omega_estimate(&ic, 1e-3, 2, &IntegratorConfig::default()).is_err());
    }

    #[test]
    fn bucket_report_small() {
        let report = petal_area_buckets(5, PI, 1e-12).unwrap();
        assert_eq!(report.petal_areas.len(), 11);
        let total: f64 = report.petal_areas.values().sum();
        assert!(total <= PI);
        // Mirror symmetry: area(n) == area(-n-1).
        for n in 0..=4 {
            assert_eq!(report.petal_areas[&n], report.petal_areas[&(-n - 1)]);
        }
        // Partition: every petal is counted exactly once.
        let counted: usize = report.bucket_counts.values().sum::<usize>() + report.deep.len();
        assert_eq!(counted, 11);
        // Petal 0 area ≈ 0.02738: band floor(π/area) = 114.
        assert_eq!(report.bucket_counts[&114], 2);
        // Petals |n| >= 2 underflow into the deep list.
        assert!(report.deep.iter().any(|&(n, _)| n == 2));
        for &(_, band_ln) in &report.deep {
            assert!(band_ln > 40.0);
        }
    }

    #[test]
    fn bucket_ln_areas_monotone() {
        let report = petal_area_buckets(8, PI, 1e-12).unwrap();
        for n in 1..8 {
            assert!(
                report.petal_ln_areas[&n] > report.petal_ln_areas[&(n + 1)],
                "ln area not decreasing at n = {n}"
            );
        }
    }

    #[test]
    fn dd_field_matches_f64_field() {
        let pts = [(0.7, 0.3), (-0.4, 0.2), (0.1, -0.9), (-1.0, 1e-3)];
        for &(x, y) in &pts {
            let f = cartesian_field(CartesianState { x, y });
            let (dx, dy) = dd_field(TwoFloat::from(x), TwoFloat::from(y));
            let (dx, dy): (f64, f64) = (dx.into(), dy.into());
            assert!(
                (f.first - dx).abs() <= 1e-14 * f.first.abs().max(1.0),
                "x component mismatch at ({x}, {y}): {} vs {dx}",
                f.first
            );
            assert!((f.second - dy).abs() <= 1e-14 * f.second.abs().max(1.0));
        }
        // Flush region agrees too.
        let (dx, dy) = dd_field(TwoFloat::from(-0.5), TwoFloat::from(0.0));
        let f = cartesian_field(CartesianState { x: -0.5, y: 0.0 });
        let (dx, dy): (f64, f64) = (dx.into(), dy.into());
        assert_eq!(f.first, dx);
        assert_eq!(f.second, dy);
    }

    #[test]
    fn smoothness_order0_continuity() {
        let rep = smoothness_audit(-0.5, 0, &[1e-2, 1e-3, 1e-4, 1e-5]).unwrap();
        let f = cartesian_field(CartesianState { x: -0.5, y: 0.0 });
        let last = *rep.estimates_x.last().unwrap();
        assert!((last - f.first).abs() < 1e-10);
    }

    #[test]
    fn smoothness_estimates_cauchy() {
        let hs = [1e-2, 1e-3, 1e-4, 1e-5];
        for &x0 in &[-1.0, -0.5, -0.1] {
            for order in 0..=3u32 {
                let rep = smoothness_audit(x0, order, &hs).unwrap();
                for comp in [&rep.estimates_x, &rep.estimates_y] {
                    let d: Vec<f64> =
                        comp.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
                    for k in 1..d.len() {
                        assert!(
                            d[k] <= d[k - 1] * 1.01 + 1e-300,
                            "not Cauchy at x0 = {x0}, order {order}: {d:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn smoothness_origin_flat() {
        let rep = smoothness_audit(0.0, 1, &[1e-2, 1e-3, 1e-4]).unwrap();
        for v in rep.estimates_x.iter().chain(rep.estimates_y.iter()) {
            assert_eq!(*v, 0.0, "origin derivative must be exactly flat");
        }
    }

    #[test]
    fn boundary_ratio_tends_to_zero() {
        for n in 1..=3u32 {
            let mut prev = f64::INFINITY;
            for &y in &[1e-2, 1e-3, 1e-4, 1e-5] {
                let ln_ratio = boundary_ratio_ln(-0.5, y, n);
                assert!(ln_ratio < prev, "not decreasing at y = {y}, n = {n}");
                prev = ln_ratio;
            }
            // Final value is astronomically below e^-30.
            assert!(prev < -30.0 * std::f64::consts::LN_10);
        }
    }

    #[test]
    fn descriptor_consistent_with_buckets() {
        let d = petal_descriptor(0, 1e-12).unwrap();
        let report = petal_area_buckets(1, PI, 1e-12).unwrap();
        assert_eq!(d.area, report.petal_areas[&0]);
    }
}
