//! Adaptive integration of the system in both parameterizations.
//!
//! The angle-parameterized scalar equation `dr/dtheta = -H(r, theta)` is the
//! primary engine: theta is monotone off the origin, the equation is
//! non-stiff, and the closed form provides an exact oracle. The physical-time
//! Cartesian integrator exists to validate the smooth field itself; time
//! integration stalls as `r` shrinks (`dtheta/dt = exp(-1/r^2)` underflows
//! below r ~ 0.0366), so orbits cannot reach the origin in finite time there.
//!
//! The one-step method is the Dormand-Prince 5(4) embedded pair with the
//! usual mixed error norm and a step factor clipped to [0.2, 5].

use serde::{Deserialize, Serialize};

use crate::analytic_orbits::{InitialCondition, ON_ROSE_TOL};
use crate::rose_geometry::{rho, Angle};
use crate::vector_field::{cartesian_field, h, CartesianState, PolarState};
use crate::{Error, Result};

/// Tolerances and step bounds for the adaptive driver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub event_r_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-13,
            h_max: 0.1,
            event_r_tol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.event_r_tol > 0.0
            && self.h_min > 0.0
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    /// Reached the requested end of the parameter range.
    RangeEnd,
    /// The orbit reached the origin; the payload is the parameter value of
    /// the localized crossing.
    OriginEvent(f64),
    /// The step controller gave up (minimum step or step budget).
    StepFailure(StepFailureKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepFailureKind {
    MinStepReached,
    MaxStepsExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameterization {
    AngleParam,
    TimeParam,
}

/// One recorded trajectory sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrbitSample {
    /// theta (AngleParam) or t (TimeParam).
    pub param: f64,
    pub state: PolarState,
    pub f_value: f64,
}

/// An ordered trajectory with its termination reason. `param` is strictly
/// monotone in the integration direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Orbit {
    pub samples: Vec<OrbitSample>,
    pub parameterization: Parameterization,
    pub terminal: Terminal,
}

impl Orbit {
    pub fn last(&self) -> &OrbitSample {
        self.samples.last().expect("orbit always holds the initial sample")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One 5(4) step: returns the 5th-order solution and the embedded error
/// estimate.
fn rk_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    x: f64,
    y: &[f64; N],
    hs: f64,
) -> ([f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    k[0] = f(x, y);
    for s in 1..7 {
        let mut ys = *y;
        for j in 0..s {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += hs * a * k[j][i];
                }
            }
        }
        k[s] = f(x + C[s] * hs, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for s in 0..7 {
        for i in 0..N {
            y5[i] += hs * B5[s] * k[s][i];
            err[i] += hs * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err)
}

fn error_norm<const N: usize>(err: &[f64; N], y: &[f64; N], y5: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let mut norm = 0.0f64;
    for i in 0..N {
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
        norm = norm.max((err[i] / scale).abs());
    }
    norm
}

/// Adaptive driver. `event`, when present, stops the integration at the
/// first crossing of `event(x, y) <= 0` within an accepted step, localized
/// by bisection on the step size.
fn drive<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    cfg: &IntegratorConfig,
    event: Option<&dyn Fn(f64, &[f64; N]) -> f64>,
    record: &mut impl FnMut(f64, &[f64; N]),
) -> Terminal {
    let dir = (x_end - x0).signum();
    if dir == 0.0 {
        return Terminal::RangeEnd;
    }
    let mut x = x0;
    let mut y = y0;
    let mut hs = cfg.h_init * dir;
    let mut steps = 0usize;
    record(x, &y);
    loop {
        if steps >= cfg.max_steps {
            return Terminal::StepFailure(StepFailureKind::MaxStepsExceeded);
        }
        steps += 1;
        if (x + hs - x_end) * dir > 0.0 {
            hs = x_end - x;
        }
        let (y5, err) = rk_step(f, x, &y, hs);
        let norm = error_norm(&err, &y, &y5, cfg);
        if norm <= 1.0 {
            if let Some(ev) = event {
                if ev(x, &y) > 0.0 && ev(x + hs, &y5) <= 0.0 {
                    let (xe, ye) = bisect_event(f, ev, x, &y, hs);
                    record(xe, &ye);
                    return Terminal::OriginEvent(xe);
                }
            }
            x += hs;
            y = y5;
            record(x, &y);
            if (x - x_end) * dir >= 0.0 {
                return Terminal::RangeEnd;
            }
        } else if hs.abs() <= cfg.h_min * 1.000_001 {
            return Terminal::StepFailure(StepFailureKind::MinStepReached);
        }
        let factor = (0.87 * norm.powf(-0.2)).clamp(0.2, 5.0);
        hs *= factor;
        hs = hs.abs().clamp(cfg.h_min, cfg.h_max) * dir;
    }
}

/// Localize an event crossing inside the step `[x, x + hs]` by bisection on
/// the step size, re-stepping from the last pre-event state each time.
fn bisect_event<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    ev: &dyn Fn(f64, &[f64; N]) -> f64,
    mut x: f64,
    y: &[f64; N],
    mut hs: f64,
) -> (f64, [f64; N]) {
    let mut y = *y;
    for _ in 0..80 {
        if hs.abs() < 1e-13 * (1.0 + x.abs()) {
            break;
        }
        let half = 0.5 * hs;
        let (ym, _) = rk_step(f, x, &y, half);
        if ev(x + half, &ym) <= 0.0 {
            hs = half;
        } else {
            x += half;
            y = ym;
            hs = half;
        }
    }
    let (ye, _) = rk_step(f, x, &y, hs);
    (x + hs, ye)
}

fn theta_rhs(th: f64, y: &[f64; 1]) -> [f64; 1] {
    [-h(y[0], Angle(th))]
}

fn make_theta_sample(th: f64, r: f64) -> OrbitSample {
    OrbitSample {
        param: th,
        state: PolarState {
            r,
            theta: Angle(th),
        },
        f_value: r - rho(Angle(th)),
    }
}

/// Origin events only make sense for orbits that actually terminate at the
/// origin (`F0 <= 0`); a spiral dips below any fixed radius near the
/// accumulation angle without ever reaching the origin. For orbits entirely
/// below the event radius the threshold is rescaled by the initial radius so
/// the localization stays meaningful at any magnitude.
fn event_radius(ic: &InitialCondition, cfg: &IntegratorConfig) -> Option<f64> {
    if ic.f0 > ON_ROSE_TOL {
        return None;
    }
    if ic.r0 > cfg.event_r_tol {
        Some(cfg.event_r_tol)
    } else {
        Some(ic.r0 * cfg.event_r_tol)
    }
}

/// Integrate `dr/dtheta = -H(r, theta)` from `ic` to `theta_end` (either
/// direction) with origin-event detection.
pub fn integrate_theta(
    ic: &InitialCondition,
    theta_end: Angle,
    cfg: &IntegratorConfig,
) -> Result<Orbit> {
    cfg.validate()?;
    let r_event = event_radius(ic, cfg);
    let event_fn = r_event.map(|re| move |_x: f64, y: &[f64; 1]| y[0] - re);
    let mut samples = Vec::new();
    let terminal = drive(
        &theta_rhs,
        ic.theta0.0,
        [ic.r0],
        theta_end.0,
        cfg,
        event_fn
            .as_ref()
            .map(|f| f as &dyn Fn(f64, &[f64; 1]) -> f64),
        &mut |th, y| samples.push(make_theta_sample(th, y[0])),
    );
    Ok(Orbit {
        samples,
        parameterization: Parameterization::AngleParam,
        terminal,
    })
}

/// Fixed-step variant of [`integrate_theta`] (5th-order solution, no error
/// control). All orbits integrated on the same span share sample angles
/// exactly, which is what order studies and orbit-ordering comparisons need.
pub fn integrate_theta_fixed(
    ic: &InitialCondition,
    theta_end: Angle,
    n_steps: usize,
) -> Result<Orbit> {
    if n_steps == 0 {
        return Err(Error::InvalidConfig("n_steps must be >= 1".into()));
    }
    let cfg = IntegratorConfig::default();
    let r_event = event_radius(ic, &cfg);
    let hs = (theta_end.0 - ic.theta0.0) / n_steps as f64;
    let mut samples = vec![make_theta_sample(ic.theta0.0, ic.r0)];
    let mut x = ic.theta0.0;
    let mut y = [ic.r0];
    for k in 1..=n_steps {
        let (y5, _) = rk_step(&theta_rhs, x, &y, hs);
        let x5 = ic.theta0.0 + hs * k as f64;
        if let Some(re) = r_event {
            if y[0] - re > 0.0 && y5[0] - re <= 0.0 {
                let ev = move |_x: f64, y: &[f64; 1]| y[0] - re;
                let (xe, ye) = bisect_event(&theta_rhs, &ev, x, &y, hs);
                samples.push(make_theta_sample(xe, ye[0]));
                return Ok(Orbit {
                    samples,
                    parameterization: Parameterization::AngleParam,
                    terminal: Terminal::OriginEvent(xe),
                });
            }
        }
        x = x5;
        y = y5;
        samples.push(make_theta_sample(x, y[0]));
    }
    Ok(Orbit {
        samples,
        parameterization: Parameterization::AngleParam,
        terminal: Terminal::RangeEnd,
    })
}

/// Integrate the full regularized Cartesian field in physical time.
/// The angle of each sample is unwrapped so that `theta` is continuous.
pub fn integrate_time(start: CartesianState, t_end: f64, cfg: &IntegratorConfig) -> Result<Orbit> {
    cfg.validate()?;
    if !(t_end > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    let rhs = |_t: f64, y: &[f64; 2]| {
        let v = cartesian_field(CartesianState { x: y[0], y: y[1] });
        [v.first, v.second]
    };
    let mut samples: Vec<OrbitSample> = Vec::new();
    let mut prev_raw = start.y.atan2(start.x);
    let mut theta_acc = prev_raw;
    let terminal = drive(
        &rhs,
        0.0,
        [start.x, start.y],
        t_end,
        cfg,
        None,
        &mut |t, y| {
            let r = y[0].hypot(y[1]);
            let raw = if r == 0.0 { prev_raw } else { y[1].atan2(y[0]) };
            let delta = Angle(raw - prev_raw).principal().0;
            theta_acc += delta;
            prev_raw = raw;
            samples.push(OrbitSample {
                param: t,
                state: PolarState {
                    r,
                    theta: Angle(theta_acc),
                },
                f_value: r - rho(Angle(theta_acc)),
            });
        },
    );
    Ok(Orbit {
        samples,
        parameterization: Parameterization::TimeParam,
        terminal,
    })
}

/// Time stamps reconstructed from an angle-parameterized orbit by quadrature
/// of `dt = exp(1/r^2) dtheta` (trapezoid over the recorded samples).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeReconstruction {
    /// One stamp per orbit sample, starting at 0.
    pub times: Vec<f64>,
    /// First sample index at which `exp(1/r^2)` overflowed, if any; stamps
    /// from that index on are saturated, not infinite.
    pub overflow_from: Option<usize>,
}

pub fn reconstruct_time(orbit: &Orbit) -> Result<TimeReconstruction> {
    if orbit.parameterization != Parameterization::AngleParam {
        return Err(Error::WrongParameterization);
    }
    const MAX_EXP: f64 = 709.0;
    let mut times = Vec::with_capacity(orbit.samples.len());
    let mut overflow_from = None;
    let mut t = 0.0f64;
    let mut prev_w = 0.0f64;
    for (i, s) in orbit.samples.iter().enumerate() {
        let e = 1.0 / (s.state.r * s.state.r);
        let w = if e > MAX_EXP {
            if overflow_from.is_none() {
                overflow_from = Some(i);
            }
            f64::MAX.sqrt()
        } else {
            e.exp()
        };
        if i > 0 {
            t += (s.param - orbit.samples[i - 1].param).abs() * 0.5 * (w + prev_w);
        }
        prev_w = w;
        times.push(t);
    }
    Ok(TimeReconstruction {
        times,
        overflow_from,
    })
}
