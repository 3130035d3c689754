//! Property-based invariants of the geometry, classification, and I/O layers.

use proptest::prelude::*;
use rose_dynamics::analytic_orbits::{classify, InitialCondition};
use rose_dynamics::cli::{read_orbit_csv, write_orbit_csv};
use rose_dynamics::integrator::{integrate_theta, integrate_theta_fixed, IntegratorConfig};
use rose_dynamics::rose_geometry::{petal_bounds, rho, rho_prime, Angle};
use rose_dynamics::{Parameterization, Terminal};
use std::f64::consts::{PI, TAU};

/// Largest value of the petal profile, attained at the apex of petal 0.
const RHO_MAX: f64 = 0.2705484439432367;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The profile is even and 2π-periodic, and bounded by its apex value.
    #[test]
    fn rho_symmetry_periodicity_range(theta in -20.0f64..20.0, k in -3i64..=3) {
        let t = Angle(theta);
        let v = rho(t);
        prop_assert!(v.is_finite() && (0.0..=RHO_MAX).contains(&v));
        let mirrored = rho(Angle(-theta));
        prop_assert!((v - mirrored).abs() <= 1e-15 * v.abs().max(1.0));
        // theta + k*TAU rounds, so allow the profile's sensitivity to an
        // ~1e-14 angle perturbation.
        let shifted = rho(Angle(theta + k as f64 * TAU));
        prop_assert!((v - shifted).abs() <= 1e-13 * v.abs().max(1.0));
        let d = rho_prime(t);
        let d_mirror = rho_prime(Angle(-theta));
        prop_assert!((d + d_mirror).abs() <= 1e-15 * d.abs().max(1.0));
    }

    /// Classification only depends on the initial condition modulo winding.
    #[test]
    fn classification_winding_invariance(
        theta in 0.1f64..(PI - 0.1),
        frac in 0.05f64..0.95,
        k in -2i64..=2,
    ) {
        let t = Angle(theta);
        prop_assume!(rho(t) > 1e-200);
        let r0 = frac * rho(t);
        let base = InitialCondition::new(r0, t).unwrap();
        let wound = InitialCondition::new(r0, Angle(theta + k as f64 * TAU)).unwrap();
        let a = classify(&base).unwrap();
        let b = classify(&wound).unwrap();
        // The winding offset rounds theta0, which moves the closure roots in
        // their last ulps; the class and petal must match exactly, the roots
        // only to well below the root-finding resolution.
        use rose_dynamics::OrbitClass::HomoclinicInterior;
        match (&a, &b) {
            (
                HomoclinicInterior { petal: pa, theta_minus: ma, theta_plus: pla },
                HomoclinicInterior { petal: pb, theta_minus: mb, theta_plus: plb },
            ) => {
                prop_assert_eq!(pa, pb);
                prop_assert!((ma.0 - mb.0).abs() <= 1e-9);
                prop_assert!((pla.0 - plb.0).abs() <= 1e-9);
            }
            _ => prop_assert_eq!(format!("{a:?}"), format!("{b:?}")),
        }
    }

    /// Orbit CSV writing and re-reading is lossless: Rust's float `Display`
    /// prints the shortest string that round-trips exactly.
    #[test]
    fn orbit_csv_round_trip(offset in 0.01f64..0.4, revs in 0.2f64..1.5) {
        let th0 = Angle(1.0);
        let ic = InitialCondition::new(rho(th0) + offset, th0).unwrap();
        let cfg = IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            ..IntegratorConfig::default()
        };
        let orbit = integrate_theta(&ic, Angle(th0.0 + revs * TAU), &cfg).unwrap();
        let mut buf = Vec::new();
        write_orbit_csv(&orbit, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_orbit_csv(&text, Parameterization::AngleParam, orbit.terminal.clone())
            .unwrap();
        prop_assert_eq!(orbit.samples.len(), back.samples.len());
        for (a, b) in orbit.samples.iter().zip(back.samples.iter()) {
            prop_assert_eq!(a.param.to_bits(), b.param.to_bits());
            prop_assert_eq!(a.state.r.to_bits(), b.state.r.to_bits());
            prop_assert_eq!(a.state.theta.0.to_bits(), b.state.theta.0.to_bits());
            prop_assert_eq!(a.f_value.to_bits(), b.f_value.to_bits());
        }
    }

    /// Orbits starting at the same angle with ordered radii never cross:
    /// F is conserved up to the decay factor, which is radius-independent.
    #[test]
    fn orbits_preserve_radial_order(
        f_low in 0.01f64..0.2,
        gap in 0.05f64..0.3,
        steps in 500usize..900,
    ) {
        let th0 = Angle(PI / 2.0);
        let base = rho(th0);
        let lo = InitialCondition::new(base + f_low, th0).unwrap();
        let hi = InitialCondition::new(base + f_low + gap, th0).unwrap();
        let end = Angle(th0.0 + TAU);
        let a = integrate_theta_fixed(&lo, end, steps).unwrap();
        let b = integrate_theta_fixed(&hi, end, steps).unwrap();
        prop_assert_eq!(a.samples.len(), b.samples.len());
        for (sa, sb) in a.samples.iter().zip(b.samples.iter()) {
            prop_assert_eq!(sa.param.to_bits(), sb.param.to_bits());
            prop_assert!(sa.state.r < sb.state.r);
        }
    }
}

/// Petals n and −n−1 are mirror images, so their angular spans agree.
#[test]
fn petal_span_mirror_symmetry() {
    for n in 0..6 {
        let (lo, hi) = petal_bounds(n);
        let (mlo, mhi) = petal_bounds(-n - 1);
        assert!((hi.0 + mlo.0).abs() < 1e-15);
        assert!((lo.0 + mhi.0).abs() < 1e-15);
    }
}
