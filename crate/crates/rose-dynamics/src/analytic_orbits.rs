//! Closed-form orbit representation and the trichotomy classification.
//!
//! In the angle parameterization the level value decays as
//! `F(theta) = F0 * exp(-(theta - theta0))` along every orbit, so
//!
//! ```text
//! r(theta) = rho(theta) + F0 * exp(-(theta - theta0)).
//! ```
//!
//! Every initial condition falls in exactly one class: the equilibrium at the
//! origin, an orbit on the rose itself, a homoclinic orbit strictly inside
//! one petal (`F0 < 0`), or a spiral accumulating onto the whole rose from
//! outside (`F0 > 0`). Orbits of the regularized field are the same point
//! sets; the regularization only rescales time, and the homoclinic loops
//! close at the origin in infinite physical time.

use serde::{Deserialize, Serialize};

use crate::rose_geometry::{level, petal_bounds, petal_index, rho, Angle, PetalIndex};
use crate::{Error, Result};

/// Absolute tolerance on `F0` for the on-rose classification. `F` is a
/// difference of order-one quantities, so this sits at machine epsilon.
pub const ON_ROSE_TOL: f64 = 1e-14;

/// An initial condition with its cached level value `F0 = r0 - rho(theta0)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InitialCondition {
    pub r0: f64,
    pub theta0: Angle,
    pub f0: f64,
}

impl InitialCondition {
    pub fn new(r0: f64, theta0: Angle) -> Result<Self> {
        let f0 = level(r0, theta0)?;
        if !r0.is_finite() || !theta0.0.is_finite() {
            return Err(Error::InvalidInitialCondition(format!(
                "non-finite initial condition ({r0}, {})",
                theta0.0
            )));
        }
        Ok(InitialCondition { r0, theta0, f0 })
    }

    pub fn polar(&self) -> crate::vector_field::PolarState {
        crate::vector_field::PolarState {
            r: self.r0,
            theta: self.theta0,
        }
    }
}

/// The orbit trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum OrbitClass {
    Equilibrium,
    OnRose { petal: PetalIndex },
    HomoclinicInterior {
        petal: i64,
        theta_minus: Angle,
        theta_plus: Angle,
    },
    SpiralOntoRose,
}

/// The closed-form radius `r(theta) = rho(theta) + F0 exp(-(theta - theta0))`.
/// May return negative values; callers read those as "the orbit already
/// reached the origin".
pub fn closed_form_r(theta: Angle, ic: &InitialCondition) -> f64 {
    rho(theta) + ic.f0 * (-(theta.0 - ic.theta0.0)).exp()
}

/// Classify an initial condition.
pub fn classify(ic: &InitialCondition) -> Result<OrbitClass> {
    if ic.r0 == 0.0 {
        return Ok(OrbitClass::Equilibrium);
    }
    if ic.f0.abs() <= ON_ROSE_TOL {
        let petal = match petal_index(ic.theta0.principal()) {
            Ok(p) => p,
            // Principal angle at the accumulation point with r0 within the
            // on-rose tolerance: no petal is defined, report a boundary hit.
            Err(Error::AccumulationAngle(_)) => PetalIndex::Boundary,
            Err(e) => return Err(e),
        };
        return Ok(OrbitClass::OnRose { petal });
    }
    if ic.f0 > 0.0 {
        return Ok(OrbitClass::SpiralOntoRose);
    }
    let (theta_minus, theta_plus) = homoclinic_span(ic)?;
    let petal = match petal_index(ic.theta0.principal())? {
        PetalIndex::Interior(n) => n,
        // F0 < 0 forces rho(theta0) > 0, which cannot happen on a boundary.
        PetalIndex::Boundary => return Err(Error::RootBracketing("classify")),
    };
    Ok(OrbitClass::HomoclinicInterior {
        petal,
        theta_minus,
        theta_plus,
    })
}

/// The two roots of `closed_form_r = 0` nearest `theta0` on each side, for a
/// homoclinic initial condition (`F0 < 0`, `r0 > 0`). Both lie inside the
/// closure of the containing petal: the profile vanishes at the petal ends
/// while the exponential term stays strictly negative.
pub fn homoclinic_span(ic: &InitialCondition) -> Result<(Angle, Angle)> {
    if !(ic.f0 < 0.0 && ic.r0 > 0.0) {
        return Err(Error::InvalidInitialCondition(format!(
            "homoclinic_span needs F0 < 0 and r0 > 0, got F0 = {}, r0 = {}",
            ic.f0, ic.r0
        )));
    }
    let th0 = ic.theta0.principal();
    let ic_p = InitialCondition {
        r0: ic.r0,
        theta0: th0,
        f0: ic.f0,
    };
    let n = match petal_index(th0)? {
        PetalIndex::Interior(n) => n,
        PetalIndex::Boundary => return Err(Error::RootBracketing("homoclinic_span")),
    };
    let (lo, hi) = petal_bounds(n);
    let g = |th: f64| closed_form_r(Angle(th), &ic_p);
    let plus = first_root(&g, th0.0, hi.0)?;
    let minus = first_root(&g, th0.0, lo.0)?;
    Ok((Angle(minus), Angle(plus)))
}

/// Scan from `from` toward `to` for the first sign change of `g` (positive at
/// `from`), then bisect to ~1e-14 in the abscissa.
fn first_root(g: &impl Fn(f64) -> f64, from: f64, to: f64) -> Result<f64> {
    let steps = 256;
    let d = (to - from) / steps as f64;
    let mut a = from;
    let mut b = from;
    let mut found = false;
    for k in 1..=steps {
        b = if k == steps { to } else { from + d * k as f64 };
        if g(b) <= 0.0 {
            found = true;
            break;
        }
        a = b;
    }
    if !found {
        return Err(Error::RootBracketing("first_root"));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if g(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
