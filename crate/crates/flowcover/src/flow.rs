//! Continuous flows defined by autonomous ODE right-hand sides.
//!
//! The time-t map is approximated by a fixed-step classical 4th-order
//! Runge-Kutta scheme with a final partial step. No adaptivity: identical
//! inputs always produce bit-identical outputs, which the rest of the
//! toolkit relies on for reproducible box images.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point of the ambient space, a d-vector of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Euclidean distance.
    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Sup-norm distance, the metric used for image fattening.
    pub fn sup_dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

type Rhs = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A vector field plus integration parameters defining a flow.
#[derive(Clone)]
pub struct FlowSpec {
    pub name: String,
    pub dimension: usize,
    /// Optional per-unit-time expansion bound, used for image padding.
    pub lipschitz_hint: Option<f64>,
    /// Base step of the fixed-step integrator.
    pub integrator_step: f64,
    rhs: Rhs,
}

impl fmt::Debug for FlowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("lipschitz_hint", &self.lipschitz_hint)
            .field("integrator_step", &self.integrator_step)
            .finish()
    }
}

impl FlowSpec {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        integrator_step: f64,
        lipschitz_hint: Option<f64>,
        rhs: Rhs,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if !(integrator_step > 0.0) {
            return Err(Error::InvalidArgument(
                "integrator_step must be positive".into(),
            ));
        }
        if let Some(l) = lipschitz_hint {
            if !(l >= 0.0) {
                return Err(Error::InvalidArgument(
                    "lipschitz_hint must be nonnegative".into(),
                ));
            }
        }
        Ok(FlowSpec {
            name: name.into(),
            dimension,
            lipschitz_hint,
            integrator_step,
            rhs,
        })
    }

    /// Evaluates the vector field at `x`.
    pub fn eval_rhs(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension];
        (self.rhs)(x, &mut out);
        out
    }

    /// Numerical time-t map. Negative `t` integrates the reversed field.
    pub fn advance(&self, x: &Point, t: f64) -> Result<Point> {
        if x.dim() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.dim(),
            });
        }
        if !x.is_finite() || !t.is_finite() {
            return Err(Error::NonFiniteState {
                system: self.name.clone(),
                index: 0,
            });
        }
        if t == 0.0 {
            return Ok(x.clone());
        }
        let reversed = t < 0.0;
        let total = t.abs();
        let h = self.integrator_step;
        let full_steps = (total / h).floor() as u64;
        let rem = total - full_steps as f64 * h;

        let mut y = x.0.clone();
        let mut scratch = Scratch::new(self.dimension);
        for _ in 0..full_steps {
            self.rk4_step(&mut y, h, reversed, &mut scratch);
        }
        if rem > 0.0 {
            self.rk4_step(&mut y, rem, reversed, &mut scratch);
        }
        if !y.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFiniteState {
                system: self.name.clone(),
                index: 0,
            });
        }
        Ok(Point(y))
    }

    fn rk4_step(&self, y: &mut [f64], h: f64, reversed: bool, s: &mut Scratch) {
        let d = y.len();
        let sign = if reversed { -1.0 } else { 1.0 };
        (self.rhs)(y, &mut s.k1);
        for i in 0..d {
            s.tmp[i] = y[i] + sign * 0.5 * h * s.k1[i];
        }
        (self.rhs)(&s.tmp, &mut s.k2);
        for i in 0..d {
            s.tmp[i] = y[i] + sign * 0.5 * h * s.k2[i];
        }
        (self.rhs)(&s.tmp, &mut s.k3);
        for i in 0..d {
            s.tmp[i] = y[i] + sign * h * s.k3[i];
        }
        (self.rhs)(&s.tmp, &mut s.k4);
        for i in 0..d {
            y[i] += sign * h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
        }
    }

    /// Samples the orbit at t = t0, t0+dt, ..., t1 (inclusive of t1).
    pub fn orbit_points(&self, x: &Point, t0: f64, t1: f64, dt: f64) -> Result<Vec<Point>> {
        if t0 > t1 {
            return Err(Error::InvalidArgument("t0 must be <= t1".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("dt must be positive".into()));
        }
        let mut out = Vec::new();
        let mut current = self.advance(x, t0).map_err(|_| Error::NonFiniteState {
            system: self.name.clone(),
            index: 0,
        })?;
        out.push(current.clone());
        let mut t = t0;
        let mut index = 1usize;
        // advance incrementally so consecutive samples share the trajectory
        while t + dt <= t1 + 1e-12 * dt.max(1.0) {
            current = self
                .advance(&current, dt)
                .map_err(|_| Error::NonFiniteState {
                    system: self.name.clone(),
                    index,
                })?;
            out.push(current.clone());
            t += dt;
            index += 1;
        }
        Ok(out)
    }
}

struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        Scratch {
            k1: vec![0.0; d],
            k2: vec![0.0; d],
            k3: vec![0.0; d],
            k4: vec![0.0; d],
            tmp: vec![0.0; d],
        }
    }
}

/// Static description of a built-in system: dimension, bounding box, step.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemInfo {
    pub name: &'static str,
    pub dimension: usize,
    pub lower: &'static [f64],
    pub upper: &'static [f64],
    pub integrator_step: f64,
    pub rhs_doc: &'static str,
}

pub const BUILTIN_SYSTEMS: &[SystemInfo] = &[
    SystemInfo {
        name: "linear_sink_1d",
        dimension: 1,
        lower: &[-2.0],
        upper: &[2.0],
        integrator_step: 0.005,
        rhs_doc: "xdot = -x",
    },
    SystemInfo {
        name: "linear_sink_2d",
        dimension: 2,
        lower: &[-2.0, -2.0],
        upper: &[2.0, 2.0],
        integrator_step: 0.005,
        rhs_doc: "xdot = -x; ydot = -y",
    },
    SystemInfo {
        name: "saddle_2d",
        dimension: 2,
        lower: &[-2.0, -2.0],
        upper: &[2.0, 2.0],
        integrator_step: 0.005,
        rhs_doc: "xdot = x; ydot = -y",
    },
    SystemInfo {
        name: "vanderpol",
        dimension: 2,
        lower: &[-4.0, -4.0],
        upper: &[4.0, 4.0],
        integrator_step: 0.002,
        rhs_doc: "xdot = y; ydot = (1 - x^2) y - x",
    },
    SystemInfo {
        name: "double_well_gradient",
        dimension: 2,
        lower: &[-2.0, -2.0],
        upper: &[2.0, 2.0],
        integrator_step: 0.002,
        rhs_doc: "xdot = x - x^3; ydot = -y",
    },
    SystemInfo {
        name: "pendulum_damped",
        dimension: 2,
        lower: &[-4.0, -4.0],
        upper: &[4.0, 4.0],
        integrator_step: 0.002,
        rhs_doc: "xdot = y; ydot = -sin(x) - 0.25 y",
    },
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN_SYSTEMS.iter().map(|s| s.name).collect()
}

pub fn builtin_info(name: &str) -> Result<&'static SystemInfo> {
    BUILTIN_SYSTEMS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownSystem {
            name: name.to_string(),
            valid: builtin_names().join(", "),
        })
}

/// Returns one of the documented example systems by name.
pub fn builtin_system(name: &str) -> Result<FlowSpec> {
    let info = builtin_info(name)?;
    let rhs: Rhs = match info.name {
        "linear_sink_1d" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = -x[0];
        }),
        "linear_sink_2d" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = -x[0];
            out[1] = -x[1];
        }),
        "saddle_2d" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = x[0];
            out[1] = -x[1];
        }),
        "vanderpol" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = x[1];
            out[1] = (1.0 - x[0] * x[0]) * x[1] - x[0];
        }),
        "double_well_gradient" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = x[0] - x[0] * x[0] * x[0];
            out[1] = -x[1];
        }),
        "pendulum_damped" => Arc::new(|x: &[f64], out: &mut [f64]| {
            out[0] = x[1];
            out[1] = -x[0].sin() - 0.25 * x[1];
        }),
        _ => unreachable!(),
    };
    FlowSpec::new(info.name, info.dimension, info.integrator_step, None, rhs)
}

/// The machine-readable manifest of built-in systems (key=value text,
/// one section per system).
pub fn builtin_manifest() -> String {
    let mut out = String::from("# flowcover built-in systems\n");
    for s in BUILTIN_SYSTEMS {
        out.push_str(&format!("\n[{}]\n", s.name));
        out.push_str(&format!("dimension = {}\n", s.dimension));
        out.push_str(&format!("rhs = {}\n", s.rhs_doc));
        let fmt_vec = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{}", x))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&format!("lower = {}\n", fmt_vec(s.lower)));
        out.push_str(&format!("upper = {}\n", fmt_vec(s.upper)));
        out.push_str(&format!("integrator_step = {}\n", s.integrator_step));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advance_zero_is_identity() {
        for info in BUILTIN_SYSTEMS {
            let f = builtin_system(info.name).unwrap();
            let x = Point(info.lower.iter().zip(info.upper).map(|(a, b)| 0.3 * a + 0.7 * b).collect());
            let y = f.advance(&x, 0.0).unwrap();
            assert_eq!(x, y, "identity axiom failed for {}", info.name);
        }
    }

    #[test]
    fn linear_sink_closed_form() {
        let f = builtin_system("linear_sink_1d").unwrap();
        let y = f.advance(&Point(vec![1.0]), std::f64::consts::LN_2).unwrap();
        assert!((y.0[0] - 0.5).abs() < 1e-9, "got {}", y.0[0]);
    }

    #[test]
    fn group_law_vanderpol() {
        let f = builtin_system("vanderpol").unwrap();
        let x = Point(vec![2.0, 0.0]);
        let a = f.advance(&f.advance(&x, 1.3).unwrap(), 0.7).unwrap();
        let b = f.advance(&x, 2.0).unwrap();
        assert!(a.dist(&b) <= 1e-6, "group law deviation {}", a.dist(&b));
    }

    #[test]
    fn negative_time_inverts() {
        let f = builtin_system("linear_sink_2d").unwrap();
        let x = Point(vec![0.7, -0.4]);
        let y = f.advance(&x, 1.5).unwrap();
        let back = f.advance(&y, -1.5).unwrap();
        assert!(x.dist(&back) < 1e-8);
    }

    #[test]
    fn orbit_points_closed_form() {
        let f = builtin_system("linear_sink_1d").unwrap();
        let pts = f.orbit_points(&Point(vec![1.0]), 0.0, 3.0, 1.0).unwrap();
        assert_eq!(pts.len(), 4);
        for (k, p) in pts.iter().enumerate() {
            let expect = (-(k as f64)).exp();
            assert!((p.0[0] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_points_degenerate_window() {
        let f = builtin_system("linear_sink_1d").unwrap();
        let pts = f.orbit_points(&Point(vec![0.5]), 0.0, 0.0, 0.1).unwrap();
        assert_eq!(pts, vec![Point(vec![0.5])]);
    }

    #[test]
    fn orbit_points_fixed_point() {
        // (1, 0) is an attracting equilibrium of the double well gradient
        let f = builtin_system("double_well_gradient").unwrap();
        let p = Point(vec![1.0, 0.0]);
        let pts = f.orbit_points(&p, 0.0, 10.0, 1.0).unwrap();
        assert_eq!(pts.len(), 11);
        for q in &pts {
            assert!(p.dist(q) < 1e-9);
        }
    }

    #[test]
    fn builtin_rhs_values() {
        assert_eq!(builtin_system("linear_sink_1d").unwrap().eval_rhs(&[2.0]), vec![-2.0]);
        assert_eq!(builtin_system("saddle_2d").unwrap().eval_rhs(&[1.0, 1.0]), vec![1.0, -1.0]);
        assert_eq!(builtin_system("vanderpol").unwrap().eval_rhs(&[2.0, 0.0]), vec![0.0, -2.0]);
    }

    #[test]
    fn unknown_system_lists_names() {
        match builtin_system("foo") {
            Err(Error::UnknownSystem { valid, .. }) => {
                assert!(valid.contains("vanderpol"));
            }
            other => panic!("expected UnknownSystem, got {:?}", other.map(|f| f.name)),
        }
    }

    #[test]
    fn blowup_reports_non_finite() {
        let f = FlowSpec::new(
            "explode",
            1,
            0.1,
            None,
            Arc::new(|x: &[f64], out: &mut [f64]| out[0] = x[0] * x[0]),
        )
        .unwrap();
        let r = f.advance(&Point(vec![10.0]), 50.0);
        assert!(matches!(r, Err(Error::NonFiniteState { .. })));
    }

    #[test]
    fn determinism_bit_identical() {
        let f = builtin_system("vanderpol").unwrap();
        let x = Point(vec![1.1, -0.3]);
        let a = f.advance(&x, 2.7).unwrap();
        let b = f.advance(&x, 2.7).unwrap();
        assert_eq!(a.0, b.0);
    }

    #[test]
    fn manifest_mentions_every_system() {
        let m = builtin_manifest();
        for s in BUILTIN_SYSTEMS {
            assert!(m.contains(&format!("[{}]", s.name)));
        }
    }
}
