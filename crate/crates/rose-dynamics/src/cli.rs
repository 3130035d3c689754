//! Command-line interface and serialization: CSV orbits, JSON reports, SVG
//! phase portraits.
//!
//! Exit codes: 0 success, 1 computation failure (step failure, quadrature
//! trouble), 2 flag validation failure. Data goes to stdout, diagnostics to
//! stderr. All numeric output uses shortest round-trip decimal formatting,
//! so every value re-parses to the identical bits.

use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{omega_estimate, petal_area_buckets, smoothness_audit};
use crate::analytic_orbits::InitialCondition;
use crate::integrator::{
    integrate_theta, IntegratorConfig, Orbit, OrbitSample, Parameterization, Terminal,
};
use crate::rose_geometry::{rose_polyline, Angle};
use crate::vector_field::{cartesian_field, CartesianState};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "rose-dyn",
    about = "Planar flow whose ω-limit set is the edge of a rose with countably many petals",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the Cartesian field at a point.
    FieldEval {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
    },
    /// Integrate an orbit in the angle parameterization and print it.
    Orbit {
        #[command(flatten)]
        start: StartFlags,
        /// Number of forward revolutions (may be fractional, negative for
        /// backward integration).
        #[arg(long, default_value_t = 1.0)]
        revolutions: f64,
        #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
        format: String,
        #[command(flatten)]
        tol: TolFlags,
    },
    /// Classify an initial condition by the trichotomy.
    Classify {
        #[command(flatten)]
        start: StartFlags,
    },
    /// Print the rose polyline as CSV (theta, r, x, y).
    Rose {
        #[arg(long, default_value_t = 6)]
        petals: i64,
        #[arg(long, default_value_t = 256)]
        points_per_petal: usize,
    },
    /// Petal areas and the measure-bucketing report as JSON.
    PetalAreas {
        #[arg(long, default_value_t = 10)]
        petals: i64,
        #[arg(long, default_value_t = 1e-12)]
        quad_tol: f64,
    },
    /// Estimate the ω-limit set of a spiral orbit as JSON.
    Omega {
        #[command(flatten)]
        start: StartFlags,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        petals: i64,
        #[command(flatten)]
        tol: TolFlags,
    },
    /// Transverse finite-difference audit of the field on the negative
    /// x-axis, as JSON.
    Smoothness {
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Render a phase portrait (rose plus orbits) as SVG.
    Portrait {
        /// Initial conditions as r:theta pairs, e.g. `--ic 0.5:1.5708`.
        #[arg(long = "ic", value_parser = parse_ic)]
        ics: Vec<(f64, f64)>,
        #[arg(long, default_value_t = 3.0)]
        revolutions: f64,
        #[arg(long, default_value_t = 6)]
        petals: i64,
        #[arg(long, default_value_t = 800)]
        width_px: u32,
        #[arg(long, default_value_t = 800)]
        height_px: u32,
        #[command(flatten)]
        tol: TolFlags,
    },
}

#[derive(Args, Debug)]
struct StartFlags {
    #[arg(long)]
    r: f64,
    /// Angle in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta_deg")]
    theta: Option<f64>,
    /// Angle in degrees (converted at parse time).
    #[arg(long, allow_hyphen_values = true)]
    theta_deg: Option<f64>,
}

#[derive(Args, Debug)]
struct TolFlags {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

fn parse_ic(s: &str) -> std::result::Result<(f64, f64), String> {
    let (r, th) = s
        .split_once(':')
        .ok_or_else(|| format!("expected r:theta, got {s}"))?;
    let r: f64 = r.parse().map_err(|e| format!("bad r in {s}: {e}"))?;
    let th: f64 = th.parse().map_err(|e| format!("bad theta in {s}: {e}"))?;
    Ok((r, th))
}

impl StartFlags {
    fn initial_condition(&self) -> Result<InitialCondition> {
        let theta = match (self.theta, self.theta_deg) {
            (Some(t), None) => t,
            (None, Some(d)) => d.to_radians(),
            (None, None) => 0.0,
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        };
        InitialCondition::new(self.r, Angle(theta))
    }
}

impl TolFlags {
    fn config(&self) -> Result<IntegratorConfig> {
        let cfg = IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            ..IntegratorConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse and execute `argv`, writing data to `out`. Returns the process
/// exit code.
pub fn run(argv: &[String], out: &mut dyn std::io::Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidConfig(_) | Error::InvalidInitialCondition(_) => 2,
                _ => 1,
            }
        }
    }
}

fn execute(cmd: Command, out: &mut dyn std::io::Write) -> Result<()> {
    match cmd {
        Command::FieldEval { x, y } => {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidConfig("x and y must be finite".into()));
            }
            let v = cartesian_field(CartesianState { x, y });
            writeln!(out, "{} {}", v.first, v.second)?;
        }
        Command::Orbit {
            start,
            revolutions,
            format,
            tol,
        } => {
            let ic = start.initial_condition()?;
            let cfg = tol.config()?;
            if revolutions == 0.0 || !revolutions.is_finite() {
                return Err(Error::InvalidConfig(
                    "revolutions must be finite and nonzero".into(),
                ));
            }
            let end = Angle(ic.theta0.0 + revolutions * std::f64::consts::TAU);
            let orbit = integrate_theta(&ic, end, &cfg)?;
            match format.as_str() {
                "csv" => write_orbit_csv(&orbit, out)?,
                _ => {
                    serde_json::to_writer(&mut *out, &json_report(&orbit))?;
                    writeln!(out)?;
                }
            }
        }
        Command::Classify { start } => {
            let ic = start.initial_condition()?;
            let class = crate::analytic_orbits::classify(&ic)?;
            let mut v = serde_json::to_value(&class)?;
            let obj = v.as_object_mut().expect("class serializes to an object");
            obj.insert("schema".into(), json!(1));
            obj.insert("F0".into(), json!(ic.f0));
            serde_json::to_writer(&mut *out, &v)?;
            writeln!(out)?;
        }
        Command::Rose {
            petals,
            points_per_petal,
        } => {
            if petals < 1 || points_per_petal < 2 {
                return Err(Error::InvalidConfig(
                    "need petals >= 1 and points-per-petal >= 2".into(),
                ));
            }
            writeln!(out, "theta,r,x,y")?;
            for s in rose_polyline(petals, points_per_petal) {
                let p = s.to_polar();
                writeln!(out, "{},{},{},{}", p.theta.0, p.r, s.x, s.y)?;
            }
        }
        Command::PetalAreas { petals, quad_tol } => {
            let report = petal_area_buckets(petals, std::f64::consts::PI, quad_tol)?;
            let mut v = serde_json::to_value(&report)?;
            v.as_object_mut().unwrap().insert("schema".into(), json!(1));
            serde_json::to_writer(&mut *out, &v)?;
            writeln!(out)?;
        }
        Command::Omega {
            start,
            epsilon,
            petals,
            tol,
        } => {
            let ic = start.initial_condition()?;
            let cfg = tol.config()?;
            let est = omega_estimate(&ic, epsilon, petals, &cfg)?;
            let mut v = serde_json::to_value(&est)?;
            v.as_object_mut().unwrap().insert("schema".into(), json!(1));
            serde_json::to_writer(&mut *out, &v)?;
            writeln!(out)?;
        }
        Command::Smoothness { x0, order } => {
            let report = smoothness_audit(x0, order, &[1e-2, 1e-3, 1e-4, 1e-5])?;
            let mut v = serde_json::to_value(&report)?;
            v.as_object_mut().unwrap().insert("schema".into(), json!(1));
            serde_json::to_writer(&mut *out, &v)?;
            writeln!(out)?;
        }
        Command::Portrait {
            ics,
            revolutions,
            petals,
            width_px,
            height_px,
            tol,
        } => {
            let cfg = tol.config()?;
            let spec = PortraitSpec {
                ics: ics
                    .iter()
                    .map(|&(r, th)| InitialCondition::new(r, Angle(th)))
                    .collect::<Result<Vec<_>>>()?,
                revolutions,
                n_petals: petals,
                width_px,
                height_px,
            };
            spec.validate()?;
            let orbits = integrate_portrait(&spec, &cfg)?;
            let rose: Vec<(f64, f64)> = rose_polyline(spec.n_petals, 256)
                .into_iter()
                .map(|s| (s.x, s.y))
                .collect();
            write_portrait_svg(&spec, &orbits, &rose, out)?;
        }
    }
    Ok(())
}

/// Everything needed to render one portrait.
#[derive(Debug, Clone)]
pub struct PortraitSpec {
    pub ics: Vec<InitialCondition>,
    pub revolutions: f64,
    pub n_petals: i64,
    pub width_px: u32,
    pub height_px: u32,
}

impl PortraitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.revolutions > 0.0
            && self.n_petals >= 1
            && self.width_px > 0
            && self.height_px > 0
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// Integrate every orbit of the portrait, fanning out across threads but
/// joining results in input order. `ROSE_DYN_THREADS` caps the fan-out
/// (0 or unset = one thread per available core).
pub fn integrate_portrait(spec: &PortraitSpec, cfg: &IntegratorConfig) -> Result<Vec<Orbit>> {
    let two_pi = std::f64::consts::TAU;
    let jobs: Vec<(usize, InitialCondition)> =
        spec.ics.iter().copied().enumerate().collect();
    let threads = match std::env::var("ROSE_DYN_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(0) | None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        Some(n) => n,
    }
    .min(jobs.len().max(1));
    let results: Mutex<Vec<Option<Result<Orbit>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                let Some((idx, ic)) = jobs.get(i) else { break };
                let end = Angle(ic.theta0.0 + spec.revolutions * two_pi);
                let orbit = integrate_theta(ic, end, cfg);
                results.lock().unwrap()[*idx] = Some(orbit);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

// ---- CSV ------------------------------------------------------------------

pub const ORBIT_CSV_HEADER: &str = "param,r,theta,x,y,F";

/// Write an orbit as CSV: `param,r,theta,x,y,F`, one row per sample.
/// Shortest round-trip formatting, so reading back reproduces each f64.
pub fn write_orbit_csv(orbit: &Orbit, sink: &mut dyn std::io::Write) -> Result<()> {
    writeln!(sink, "{ORBIT_CSV_HEADER}")?;
    for s in &orbit.samples {
        let c = s.state.to_cartesian();
        writeln!(
            sink,
            "{},{},{},{},{},{}",
            s.param, s.state.r, s.state.theta.0, c.x, c.y, s.f_value
        )?;
    }
    Ok(())
}

/// Parse the CSV written by [`write_orbit_csv`]. The parameterization and
/// terminal tag are not stored in the CSV; the caller supplies them.
pub fn read_orbit_csv(
    text: &str,
    parameterization: Parameterization,
    terminal: Terminal,
) -> Result<Orbit> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ORBIT_CSV_HEADER => {}
        other => {
            return Err(Error::InvalidConfig(format!(
                "bad orbit CSV header: {other:?}"
            )))
        }
    }
    let mut samples = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidConfig(format!("row {}: {e}", k + 2)))?;
        if fields.len() != 6 {
            return Err(Error::InvalidConfig(format!(
                "row {}: expected 6 fields, got {}",
                k + 2,
                fields.len()
            )));
        }
        samples.push(OrbitSample {
            param: fields[0],
            state: crate::vector_field::PolarState {
                r: fields[1],
                theta: Angle(fields[2]),
            },
            f_value: fields[5],
        });
    }
    Ok(Orbit {
        samples,
        parameterization,
        terminal,
    })
}

fn json_report(orbit: &Orbit) -> serde_json::Value {
    let mut v = serde_json::to_value(orbit).expect("orbit serializes");
    v.as_object_mut().unwrap().insert("schema".into(), json!(1));
    v
}

// ---- SVG ------------------------------------------------------------------

/// Render the rose and the orbits into an SVG 1.1 document. The viewBox maps
/// the square [-1.1, 1.1]^2 (the closed unit disk plus margin) onto the
/// canvas with y pointing up. Output is deterministic for identical inputs.
pub fn write_portrait_svg(
    spec: &PortraitSpec,
    orbits: &[Orbit],
    rose: &[(f64, f64)],
    sink: &mut dyn std::io::Write,
) -> Result<()> {
    spec.validate()?;
    const ORBIT_COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
    ];
    writeln!(
        sink,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"-1.1 -1.1 2.2 2.2\">",
        spec.width_px, spec.height_px
    )?;
    writeln!(
        sink,
        "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-linejoin=\"round\">"
    )?;
    write_polyline(sink, rose, "#000000", 0.004)?;
    for (i, orbit) in orbits.iter().enumerate() {
        let pts: Vec<(f64, f64)> = orbit
            .samples
            .iter()
            .map(|s| {
                let c = s.state.to_cartesian();
                (c.x, c.y)
            })
            .collect();
        write_polyline(sink, &pts, ORBIT_COLORS[i % ORBIT_COLORS.len()], 0.002)?;
    }
    writeln!(sink, "</g>")?;
    writeln!(sink, "</svg>")?;
    Ok(())
}

fn write_polyline(
    sink: &mut dyn std::io::Write,
    pts: &[(f64, f64)],
    stroke: &str,
    width: f64,
) -> Result<()> {
    write!(sink, "<polyline stroke=\"{stroke}\" stroke-width=\"{width}\" points=\"")?;
    for (i, (x, y)) in pts.iter().enumerate() {
        if i > 0 {
            write!(sink, " ")?;
        }
        write!(sink, "{x},{y}")?;
    }
    writeln!(sink, "\"/>")?;
    Ok(())
}

// Serialize for PortraitSpec is not derived: InitialCondition already
// serializes, and the spec is CLI-internal; expose a minimal mirror if a
// caller wants to log it.
impl Serialize for PortraitSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PortraitSpec", 5)?;
        st.serialize_field("ics", &self.ics)?;
        st.serialize_field("revolutions", &self.revolutions)?;
        st.serialize_field("n_petals", &self.n_petals)?;
        st.serialize_field("width_px", &self.width_px)?;
        st.serialize_field("height_px", &self.height_px)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rose_geometry::rho;
    use std::f64::consts::PI;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let argv: Vec<String> = std::iter::once("rose-dyn".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        let mut buf = Vec::new();
        let code = run(&argv, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn field_eval_origin() {
        let (code, out) = run_capture(&["field-eval", "--x", "0", "--y", "0"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "0 0");
    }

    #[test]
    fn classify_json() {
        let (code, out) = run_capture(&["classify", "--r", "1.0", "--theta", "0"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["class"], "SpiralOntoRose");
        assert_eq!(v["F0"], 1.0);
        assert_eq!(v["schema"], 1);
    }

    #[test]
    fn theta_deg_conversion() {
        let (_, a) = run_capture(&["classify", "--r", "0.2", "--theta", "1.5707963267948966"]);
        let (_, b) = run_capture(&["classify", "--r", "0.2", "--theta-deg", "90"]);
        assert_eq!(a, b);
    }

    #[test]
    fn validation_exit_codes() {
        let (code, _) = run_capture(&["orbit", "--r", "-1", "--theta", "0"]);
        assert_eq!(code, 2);
        let (code, _) = run_capture(&["orbit", "--r", "0.5", "--rel-tol", "-1"]);
        assert_eq!(code, 2);
        let (code, _) = run_capture(&["no-such-verb"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn orbit_csv_final_f_matches_decay() {
        let (code, out) = run_capture(&[
            "orbit",
            "--r",
            "0.36",
            "--theta",
            "1.5707963267948966",
            "--revolutions",
            "5",
        ]);
        assert_eq!(code, 0);
        let last = out.trim_end().lines().last().unwrap();
        let f: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        let f0 = 0.36 - rho(Angle(PI / 2.0));
        let expect = f0 * (-10.0 * PI).exp();
        assert!((f - expect).abs() < 1e-10, "final F {f:e} vs {expect:e}");
    }

    #[test]
    fn csv_round_trip_exact() {
        let ic = InitialCondition::new(0.5, Angle(0.3)).unwrap();
        let orbit = integrate_theta(&ic, Angle(4.0), &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_orbit_csv(&orbit, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_orbit_csv(&text, orbit.parameterization, orbit.terminal).unwrap();
        assert_eq!(back.samples.len(), orbit.samples.len());
        for (a, b) in orbit.samples.iter().zip(&back.samples) {
            assert_eq!(a.param.to_bits(), b.param.to_bits());
            assert_eq!(a.state.r.to_bits(), b.state.r.to_bits());
            assert_eq!(a.state.theta.0.to_bits(), b.state.theta.0.to_bits());
            assert_eq!(a.f_value.to_bits(), b.f_value.to_bits());
        }
    }

    #[test]
    fn csv_xy_consistent() {
        let ic = InitialCondition::new(0.5, Angle(0.3)).unwrap();
        let orbit = integrate_theta(&ic, Angle(2.0), &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_orbit_csv(&orbit, &mut buf).unwrap();
        for line in String::from_utf8(buf).unwrap().lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            let (r, x, y) = (v[1], v[3], v[4]);
            assert!((x * x + y * y - r * r).abs() <= 4.0 * f64::EPSILON * r * r);
        }
    }

    #[test]
    fn svg_deterministic_and_well_formed() {
        let spec = PortraitSpec {
            ics: vec![
                InitialCondition::new(0.5, Angle(0.0)).unwrap(),
                InitialCondition::new(0.1, Angle(1.0)).unwrap(),
            ],
            revolutions: 1.5,
            n_petals: 4,
            width_px: 400,
            height_px: 400,
        };
        let cfg = IntegratorConfig::default();
        let orbits = integrate_portrait(&spec, &cfg).unwrap();
        let rose: Vec<(f64, f64)> = rose_polyline(spec.n_petals, 64)
            .into_iter()
            .map(|s| (s.x, s.y))
            .collect();
        let render = || {
            let mut buf = Vec::new();
            write_portrait_svg(&spec, &orbits, &rose, &mut buf).unwrap();
            buf
        };
        let a = render();
        let b = render();
        assert_eq!(a, b, "SVG output must be byte-identical");
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("<svg"));
        assert!(text.trim_end().ends_with("</svg>"));
        assert_eq!(text.matches("<polyline").count(), 3);
        // The only URL is the SVG namespace; no external references.
        assert_eq!(text.matches("http").count(), 1);
    }

    #[test]
    fn svg_rose_only() {
        let spec = PortraitSpec {
            ics: vec![],
            revolutions: 1.0,
            n_petals: 2,
            width_px: 100,
            height_px: 100,
        };
        let rose = vec![(0.0, 0.0), (0.1, 0.1)];
        let mut buf = Vec::new();
        write_portrait_svg(&spec, &[], &rose, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("<polyline").count(), 1);
    }

    #[test]
    fn portrait_join_order_is_input_order() {
        let spec = PortraitSpec {
            ics: vec![
                InitialCondition::new(0.9, Angle(0.0)).unwrap(),
                InitialCondition::new(0.5, Angle(0.0)).unwrap(),
                InitialCondition::new(0.3, Angle(0.0)).unwrap(),
            ],
            revolutions: 1.0,
            n_petals: 2,
            width_px: 100,
            height_px: 100,
        };
        let orbits = integrate_portrait(&spec, &IntegratorConfig::default()).unwrap();
        assert_eq!(orbits.len(), 3);
        for (orbit, ic) in orbits.iter().zip(&spec.ics) {
            assert_eq!(orbit.samples[0].state.r, ic.r0);
        }
    }
}
