//! Declarative system specs and the two-system gallery.
//!
//! A [`SystemSpec`] mirrors the JSON config schema field for field:
//!
//! ```json
//! {
//!   "name": "figure2-left",
//!   "dimension": 2,
//!   "flow": { "closed_form": ["x1 + t", "x2"] },
//!   "surface_g": "x1 - 1",
//!   "impulse": ["0", "x2 / 2"],
//!   "min_dwell": 1e-6,
//!   "tolerances": { "surface_tol": 1e-10, "time_tol": 1e-12, "seq_tol": 1e-8 },
//!   "attest": { "h1_stc": true, "h3_global_time": true }
//! }
//! ```
//!
//! `flow` carries exactly one of `closed_form` (the semiflow `π(x, t)`) or
//! `ode` (an autonomous vector field). `tolerances` and `attest` may be
//! omitted, as may any field inside them; missing tolerances take the
//! defaults for the flow kind.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::conjugacy::ConjugacyMap;
use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::impulsive::{ImpulseMap, ImpulseSurface, ImpulsiveSystem, Tolerances};
use crate::math;
use crate::semiflow::{IntegratorParams, Semiflow};
use crate::state::StatePoint;

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FlowSpec {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub closed_form: Option<Vec<String>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub ode: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ToleranceSpec {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub surface_tol: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub time_tol: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub seq_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AttestSpec {
    #[cfg_attr(feature = "serde", serde(default))]
    pub h1_stc: bool,
    #[cfg_attr(feature = "serde", serde(default))]
    pub h3_global_time: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SystemSpec {
    pub name: String,
    pub dimension: usize,
    pub flow: FlowSpec,
    pub surface_g: String,
    pub impulse: Vec<String>,
    pub min_dwell: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tolerances: ToleranceSpec,
    #[cfg_attr(feature = "serde", serde(default))]
    pub attest: AttestSpec,
}

fn at(path: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let path = path.into();
    move |e| match e {
        Error::Validation { .. } => e,
        other => Error::validation(path, other.to_string()),
    }
}

fn parse_list(texts: &[String], d: usize, path: &str) -> Result<Vec<Expr>> {
    if texts.len() != d {
        return Err(Error::validation(
            path,
            format!("expected {d} expressions (one per coordinate), found {}", texts.len()),
        ));
    }
    texts
        .iter()
        .enumerate()
        .map(|(i, s)| parse_expression(s, d).map_err(at(format!("{path}[{i}]"))))
        .collect()
}

fn positive(v: Option<f64>, default: f64, path: &str) -> Result<f64> {
    match v {
        None => Ok(default),
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::validation(path, format!("must be positive and finite, got {v}"))),
    }
}

impl SystemSpec {
    /// Checks every field and builds the flow, surface and impulse map.
    pub fn build(&self) -> Result<ImpulsiveSystem> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        let d = self.dimension;
        if d == 0 {
            return Err(Error::validation("dimension", "must be at least 1"));
        }
        let flow = match (&self.flow.closed_form, &self.flow.ode) {
            (Some(cf), None) => {
                let exprs = parse_list(cf, d, "flow.closed_form")?;
                Semiflow::closed_form(d, exprs).map_err(at("flow.closed_form"))?
            }
            (None, Some(ode)) => {
                let field = parse_list(ode, d, "flow.ode")?;
                Semiflow::ode(d, field, IntegratorParams::default()).map_err(at("flow.ode"))?
            }
            (Some(_), Some(_)) => return Err(Error::validation("flow", "give either closed_form or ode, not both")),
            (None, None) => return Err(Error::validation("flow", "one of closed_form or ode is required")),
        };
        let g = parse_expression(&self.surface_g, d).map_err(at("surface_g"))?;
        let surface = ImpulseSurface::new(d, g).map_err(at("surface_g"))?;
        let impulse = ImpulseMap::new(d, parse_list(&self.impulse, d, "impulse")?).map_err(at("impulse"))?;
        if !(self.min_dwell > 0.0) || !self.min_dwell.is_finite() {
            return Err(Error::validation(
                "min_dwell",
                format!("must be positive and finite, got {}", self.min_dwell),
            ));
        }
        let base = Tolerances::for_flow(&flow);
        let tol = Tolerances {
            surface_tol: positive(self.tolerances.surface_tol, base.surface_tol, "tolerances.surface_tol")?,
            time_tol: positive(self.tolerances.time_tol, base.time_tol, "tolerances.time_tol")?,
            seq_tol: positive(self.tolerances.seq_tol, base.seq_tol, "tolerances.seq_tol")?,
            ..base
        };
        ImpulsiveSystem::new(self.name.clone(), flow, surface, impulse, self.min_dwell)
            .map_err(at("flow"))?
            .with_tolerances(tol)
            .map_err(at("tolerances"))
            .map(|s| s.with_attestation(self.attest.h1_stc, self.attest.h3_global_time, ""))
    }

    /// Every expression in the spec, with its field path.
    pub fn expressions(&self) -> Vec<(String, &str)> {
        let mut out = Vec::new();
        let flows = [
            ("flow.closed_form", &self.flow.closed_form),
            ("flow.ode", &self.flow.ode),
        ];
        for (path, list) in flows {
            for (i, s) in list.iter().flatten().enumerate() {
                out.push((format!("{path}[{i}]"), s.as_str()));
            }
        }
        out.push(("surface_g".to_string(), self.surface_g.as_str()));
        for (i, s) in self.impulse.iter().enumerate() {
            out.push((format!("impulse[{i}]"), s.as_str()));
        }
        out
    }
}

/// Validates `spec` and wires the system. Errors carry the offending field path.
pub fn load_system(spec: &SystemSpec) -> Result<ImpulsiveSystem> {
    spec.build()
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Names accepted by [`gallery_spec`].
pub const GALLERY_NAMES: [&str; 4] = ["figure2-left", "figure2-right", "figure2-left-ode", "figure2-right-ode"];

/// Built-in specs: the translation system with `M = {x1 = 1}` and
/// `I(x1, x2) = (0, x2/2)`, the radial system with `M` the circle of radius
/// `e^{-1}` and `I` pushing points horizontally out to the unit circle, and
/// both again as vector fields.
pub fn gallery_spec(name: &str) -> Option<SystemSpec> {
    let (closed, ode, g, impulse): (&[&str], &[&str], &str, &[&str]) = match name.trim_end_matches("-ode") {
        "figure2-left" => (&["x1 + t", "x2"], &["1", "0"], "x1 - 1", &["0", "x2 / 2"]),
        "figure2-right" => (
            &["x1 * exp(-t)", "x2 * exp(-t)"],
            &["-x1", "-x2"],
            "x1^2 + x2^2 - exp(-2)",
            &["sqrt(1 - x2^2)", "x2"],
        ),
        _ => return None,
    };
    let is_ode = name.ends_with("-ode");
    let tol = if is_ode {
        Tolerances::ode()
    } else {
        Tolerances::closed_form()
    };
    Some(SystemSpec {
        name: name.to_string(),
        dimension: 2,
        flow: if is_ode {
            FlowSpec {
                closed_form: None,
                ode: Some(strings(ode)),
            }
        } else {
            FlowSpec {
                closed_form: Some(strings(closed)),
                ode: None,
            }
        },
        surface_g: g.to_string(),
        impulse: strings(impulse),
        min_dwell: 1e-6,
        tolerances: ToleranceSpec {
            surface_tol: Some(tol.surface_tol),
            time_tol: Some(tol.time_tol),
            seq_tol: Some(tol.seq_tol),
        },
        attest: AttestSpec {
            h1_stc: true,
            h3_global_time: true,
        },
    })
}

/// Expressions of the closed-form conjugacy `h(x1, x2) = (e^{-x1}, 0)`.
pub const FIGURE2_H: [&str; 2] = ["exp(-x1)", "0"];

/// Seed and sample count used when the gallery systems are H2-checked.
pub const GALLERY_H2_SAMPLES: usize = 64;
pub const GALLERY_H2_SEED: u64 = 42;

/// Closed-form motions of the two gallery systems.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Figure2Oracles;

impl Figure2Oracles {
    /// Jump times of the translation system from `(a, b)` up to `horizon`.
    pub fn left_jump_times(&self, a: f64, horizon: f64) -> Vec<f64> {
        if a >= 1.0 {
            return Vec::new();
        }
        let first = 1.0 - a;
        (0..).map(|k| first + k as f64).take_while(|t| *t <= horizon).collect()
    }

    /// `π̃((a, b), t)`: `(a + t, b)` before the first jump at `1 − a`, then
    /// `(s, b / 2^k)` with `k` jumps so far and `s` the time since the last.
    pub fn left(&self, a: f64, b: f64, t: f64) -> [f64; 2] {
        let first = 1.0 - a;
        if a >= 1.0 || t < first {
            return [a + t, b];
        }
        let since = t - first;
        let k = math::floor(since);
        [since - k, b / math::pow(2.0, k + 1.0)]
    }

    /// First hitting time of the radial system from a point of radius `r`.
    pub fn right_first_hit(&self, r: f64) -> Option<f64> {
        (r > math::exp(-1.0)).then(|| 1.0 + math::ln(r))
    }

    /// Jump times of the radial system from `(y1, y2)` up to `horizon`.
    pub fn right_jump_times(&self, y1: f64, y2: f64, horizon: f64) -> Vec<f64> {
        match self.right_first_hit(math::sqrt(y1 * y1 + y2 * y2)) {
            None => Vec::new(),
            Some(first) => (0..).map(|k| first + k as f64).take_while(|t| *t <= horizon).collect(),
        }
    }

    /// `σ̃((y1, y2), t)` for starts outside the small circle. Each jump lands
    /// on the unit circle, so later cycles last one time unit and the second
    /// coordinate shrinks by `e^{-1}` per cycle.
    pub fn right(&self, y1: f64, y2: f64, t: f64) -> [f64; 2] {
        let r = math::sqrt(y1 * y1 + y2 * y2);
        let decay = |p: [f64; 2], s: f64| [p[0] * math::exp(-s), p[1] * math::exp(-s)];
        let first = match self.right_first_hit(r) {
            Some(f) if t >= f => f,
            _ => return decay([y1, y2], t),
        };
        let since = t - first;
        let k = math::floor(since);
        // Second coordinate of the (k+1)-th hit point on the small circle.
        let c = y2 / (math::exp(1.0) * r) * math::exp(-k);
        decay([math::sqrt(1.0 - c * c), c], since - k)
    }
}

/// The checked gallery systems with the closed-form conjugacy and oracles.
#[derive(Debug, Clone)]
pub struct GalleryPair {
    pub left: ImpulsiveSystem,
    pub right: ImpulsiveSystem,
    pub h: ConjugacyMap,
    pub oracles: Figure2Oracles,
}

fn checked(name: &str) -> ImpulsiveSystem {
    gallery_spec(name)
        .and_then(|s| s.build().ok())
        .and_then(|s| s.into_checked(GALLERY_H2_SAMPLES, GALLERY_H2_SEED).ok())
        .expect("gallery specs are valid and satisfy H2")
}

/// Closed-form gallery pair, both systems H2-checked.
pub fn gallery_pair() -> GalleryPair {
    gallery_pair_named("figure2-left", "figure2-right")
}

/// The same pair declared through vector fields.
pub fn gallery_pair_ode() -> GalleryPair {
    gallery_pair_named("figure2-left-ode", "figure2-right-ode")
}

fn gallery_pair_named(left: &str, right: &str) -> GalleryPair {
    let exprs = FIGURE2_H
        .iter()
        .map(|s| parse_expression(s, 2))
        .collect::<Result<Vec<_>>>()
        .expect("gallery h parses");
    GalleryPair {
        left: checked(left),
        right: checked(right),
        h: ConjugacyMap::closed_form(2, exprs).expect("gallery h has arity 2"),
        oracles: Figure2Oracles,
    }
}

/// `I₂` of the radial system as a plain function.
pub fn figure2_right_impulse(y: &StatePoint) -> [f64; 2] {
    [math::sqrt(1.0 - y[1] * y[1]), y[1]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pt(c: &[f64]) -> StatePoint {
        StatePoint::from_slice(c).unwrap()
    }

    #[test]
    fn gallery_specs_load() {
        for name in GALLERY_NAMES {
            let sys = load_system(&gallery_spec(name).unwrap()).unwrap();
            assert_eq!(sys.name(), name);
            assert_eq!(sys.dimension(), 2);
            assert_eq!(sys.flow().is_closed_form(), !name.ends_with("-ode"));
        }
        assert!(gallery_spec("figure3").is_none());
        let right = load_system(&gallery_spec("figure2-right").unwrap()).unwrap();
        let e1 = libm::exp(-1.0);
        assert!(right.g(&pt(&[e1, 0.0])).unwrap().abs() < 1e-15);
    }

    #[test]
    fn validation_errors_name_the_field() {
        let base = gallery_spec("figure2-left").unwrap();
        let path_of = |spec: &SystemSpec| match load_system(spec) {
            Err(Error::Validation { path, .. }) => path,
            other => panic!("{other:?}"),
        };
        let mut s = base.clone();
        s.dimension = 3;
        assert_eq!(path_of(&s), "flow.closed_form");
        let mut s = base.clone();
        s.impulse = vec!["0".into(), "x3".into()];
        assert_eq!(path_of(&s), "impulse[1]");
        let mut s = base.clone();
        s.surface_g = "x1 - t".into();
        assert_eq!(path_of(&s), "surface_g");
        let mut s = base.clone();
        s.flow.ode = Some(vec!["1".into(), "0".into()]);
        assert_eq!(path_of(&s), "flow");
        let mut s = base.clone();
        s.tolerances.seq_tol = Some(-1.0);
        assert_eq!(path_of(&s), "tolerances.seq_tol");
        let mut s = base.clone();
        s.flow.closed_form = Some(vec!["x1 + ".into(), "x2".into()]);
        assert_eq!(path_of(&s), "flow.closed_form[0]");
        let mut s = base;
        s.min_dwell = 0.0;
        assert_eq!(path_of(&s), "min_dwell");
    }

    #[test]
    fn gallery_expressions_round_trip_through_display() {
        for name in GALLERY_NAMES {
            let spec = gallery_spec(name).unwrap();
            for (path, text) in spec.expressions() {
                let e = parse_expression(text, 2).unwrap();
                let again = parse_expression(&e.to_string(), 2).unwrap();
                assert_eq!(e, again, "{name} {path}");
            }
        }
    }

    #[test]
    fn impulse_lands_on_unit_circle() {
        let pair = gallery_pair();
        let e1 = libm::exp(-1.0);
        let img = pair.right.impulse().apply(&pt(&[e1, 0.0])).unwrap();
        assert_eq!(img, pt(&[1.0, 0.0]));
        let m = pt(&[libm::sqrt(e1 * e1 - (0.6 * e1) * (0.6 * e1)), 0.6 * e1]);
        let img = pair.right.impulse().apply(&m).unwrap();
        assert_eq!(img[0], libm::sqrt(1.0 - (0.6 * e1) * (0.6 * e1)));
        assert_eq!(figure2_right_impulse(&m)[0], img[0]);
        assert_eq!(pair.h.apply(&pt(&[0.0, 0.0])).unwrap(), pt(&[1.0, 0.0]));
    }

    #[test]
    fn oracles_follow_their_own_recursion() {
        let o = Figure2Oracles;
        assert_eq!(o.left(0.0, 0.8, 0.5), [0.5, 0.8]);
        assert_eq!(o.left(0.0, 0.8, 1.0), [0.0, 0.4]);
        assert_eq!(o.left(0.25, 0.8, 2.75), [0.0, 0.1]);
        assert_eq!(o.left_jump_times(0.0, 3.0), vec![1.0, 2.0, 3.0]);
        let [a, b] = o.right(0.8, 0.6, 1.0);
        assert!((a - libm::sqrt(1.0 - libm::exp(-2.0) * 0.36)).abs() < 1e-15);
        assert!((b - 0.6 * libm::exp(-1.0)).abs() < 1e-15);
        let [a, b] = o.right(1.0, 0.0, 2.5);
        assert!((a - libm::exp(-0.5)).abs() < 1e-15 && b == 0.0);
        assert!(o.right_jump_times(0.1, 0.0, 10.0).is_empty());
    }
}
