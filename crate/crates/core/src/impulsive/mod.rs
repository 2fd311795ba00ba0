//! The impulsive system `(X, π; M, I)`: hitting times, impulsive trajectories
//! and sampled hypothesis probes.
//!
//! Conventions used throughout:
//!
//! - `M = {x : g(x) = 0}`; a point is "in the band" when `|g(x)| ≤ surface_tol`.
//! - A start in the band is flowed for `min_dwell` before the root search; `I`
//!   is applied only when the motion reaches `M` at positive time.
//! - `π̃` is right-continuous: at a jump time it takes the post-impulse value.

mod hitting;
mod probe;
mod trajectory;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{eval_all, Expr};
use crate::semiflow::Semiflow;
use crate::state::{Metric, StatePoint};

pub use probe::{HypothesisReport, ProbeReport};
pub use trajectory::{ImpulsiveTrajectory, Segment, TrajectoryRow, Truncation};

/// Level-set description of the impulse surface `M = {g = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseSurface {
    level: Expr,
    region: (Vec<f64>, Vec<f64>),
}

impl ImpulseSurface {
    /// Surface `{g = 0}` with the default sampling box `[-2, 2]^d`.
    pub fn new(dimension: usize, level: Expr) -> Result<Self> {
        check_static(&level, dimension, "surface")?;
        Ok(ImpulseSurface {
            level,
            region: (vec![-2.0; dimension], vec![2.0; dimension]),
        })
    }

    /// Box used by the surface sampler in [`check_hypotheses_sampled`].
    pub fn with_region(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != self.region.0.len() || hi.len() != lo.len() {
            return Err(Error::invalid("sampling region has the wrong dimension"));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
        {
            return Err(Error::invalid("sampling region must satisfy lo < hi coordinate-wise"));
        }
        self.region = (lo, hi);
        Ok(self)
    }

    pub fn level(&self) -> &Expr {
        &self.level
    }

    pub fn region(&self) -> (&[f64], &[f64]) {
        (&self.region.0, &self.region.1)
    }

    /// `g(x)`.
    pub fn g(&self, x: &[f64]) -> Result<f64> {
        Ok(self.level.eval(x, 0.0)?)
    }
}

/// The impulse map `I : M → X` as one expression per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseMap {
    exprs: Vec<Expr>,
}

impl ImpulseMap {
    pub fn new(dimension: usize, exprs: Vec<Expr>) -> Result<Self> {
        if exprs.len() != dimension {
            return Err(Error::invalid(format!(
                "impulse map has {} components, dimension is {dimension}",
                exprs.len()
            )));
        }
        for e in &exprs {
            check_static(e, dimension, "impulse map")?;
        }
        Ok(ImpulseMap { exprs })
    }

    pub fn exprs(&self) -> &[Expr] {
        &self.exprs
    }

    pub(crate) fn apply_slice(&self, m: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.exprs.len());
        eval_all(&self.exprs, m, 0.0, &mut out)?;
        Ok(out)
    }

    /// `I(m)`.
    pub fn apply(&self, m: &StatePoint) -> Result<StatePoint> {
        self.apply_slice(m.coords()).map(StatePoint::from_finite)
    }
}

fn check_static(e: &Expr, dimension: usize, what: &str) -> Result<()> {
    if e.uses_time() {
        return Err(Error::invalid(format!("{what} expressions cannot depend on `t`")));
    }
    if e.max_coord() > dimension {
        return Err(Error::UnboundVariable {
            name: format!("x{}", e.max_coord()),
        });
    }
    Ok(())
}

/// Claims about the standing hypotheses. H1 and H3 are attested by whoever
/// declares the system; H2 is set only by the sampled check.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HypothesisAttestation {
    pub h1_stc: bool,
    pub h2_checked: bool,
    pub h3_global_time: bool,
    pub notes: String,
}

/// Numerical tolerances of one system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Tolerances {
    /// Half-width of the membership band `|g| ≤ surface_tol`.
    pub surface_tol: f64,
    /// Bisection width for hitting times.
    pub time_tol: f64,
    /// Cauchy-tail tolerance for sequence classification.
    pub seq_tol: f64,
    /// Required gap `|g(I(m))|` in the sampled H2 check.
    pub h2_margin: f64,
    /// Grid step of the hitting-time scan.
    pub scan_dt: f64,
    /// Zeno guard: maximum jumps per unit of time.
    pub max_jumps_per_unit: f64,
}

impl Tolerances {
    pub fn closed_form() -> Self {
        Tolerances {
            surface_tol: 1e-10,
            time_tol: 1e-12,
            seq_tol: 1e-8,
            h2_margin: 1e-3,
            scan_dt: 1e-3,
            max_jumps_per_unit: 1e3,
        }
    }

    pub fn ode() -> Self {
        Tolerances {
            surface_tol: 1e-8,
            time_tol: 1e-9,
            seq_tol: 1e-6,
            ..Self::closed_form()
        }
    }

    pub fn for_flow(flow: &Semiflow) -> Self {
        if flow.is_closed_form() {
            Self::closed_form()
        } else {
            Self::ode()
        }
    }

    /// Scan step `1e-3 · characteristic_time`.
    pub fn with_characteristic_time(mut self, time: f64) -> Self {
        self.scan_dt = 1e-3 * time;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("surface_tol", self.surface_tol),
            ("time_tol", self.time_tol),
            ("seq_tol", self.seq_tol),
            ("h2_margin", self.h2_margin),
            ("scan_dt", self.scan_dt),
            ("max_jumps_per_unit", self.max_jumps_per_unit),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// An impulsive semidynamical system. Immutable apart from the H2 flag and
/// safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveSystem {
    name: String,
    flow: Semiflow,
    surface: ImpulseSurface,
    impulse: ImpulseMap,
    attest: HypothesisAttestation,
    min_dwell: f64,
    tol: Tolerances,
    metric: Metric,
}

impl ImpulsiveSystem {
    pub fn new(
        name: impl Into<String>,
        flow: Semiflow,
        surface: ImpulseSurface,
        impulse: ImpulseMap,
        min_dwell: f64,
    ) -> Result<Self> {
        let d = flow.dimension();
        if surface.region.0.len() != d || impulse.exprs.len() != d {
            return Err(Error::invalid(
                "flow, surface and impulse map disagree on the dimension",
            ));
        }
        if !(min_dwell > 0.0) || !min_dwell.is_finite() {
            return Err(Error::invalid(format!("min_dwell must be positive, got {min_dwell}")));
        }
        let tol = Tolerances::for_flow(&flow);
        Ok(ImpulsiveSystem {
            name: name.into(),
            flow,
            surface,
            impulse,
            attest: HypothesisAttestation::default(),
            min_dwell,
            tol,
            metric: Metric::Euclidean,
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Result<Self> {
        tol.validate()?;
        self.tol = tol;
        Ok(self)
    }

    /// Records the H1/H3 claims. The H2 flag is left untouched.
    pub fn with_attestation(mut self, h1_stc: bool, h3_global_time: bool, notes: impl Into<String>) -> Self {
        self.attest.h1_stc = h1_stc;
        self.attest.h3_global_time = h3_global_time;
        self.attest.notes = notes.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn dimension(&self) -> usize {
        self.flow.dimension()
    }
    pub fn flow(&self) -> &Semiflow {
        &self.flow
    }
    pub fn surface(&self) -> &ImpulseSurface {
        &self.surface
    }
    pub fn impulse(&self) -> &ImpulseMap {
        &self.impulse
    }
    pub fn attestation(&self) -> &HypothesisAttestation {
        &self.attest
    }
    pub fn min_dwell(&self) -> f64 {
        self.min_dwell
    }
    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
    pub fn surface_tol(&self) -> f64 {
        self.tol.surface_tol
    }
    pub fn time_tol(&self) -> f64 {
        self.tol.time_tol
    }
    pub fn seq_tol(&self) -> f64 {
        self.tol.seq_tol
    }
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// `g(x)`.
    pub fn g(&self, x: &StatePoint) -> Result<f64> {
        self.check_dim(x)?;
        self.surface.g(x.coords())
    }

    /// Whether `x` lies in the membership band of `M`.
    pub fn in_band(&self, x: &StatePoint) -> Result<bool> {
        Ok(self.g(x)?.abs() <= self.tol.surface_tol)
    }

    pub fn distance(&self, a: &StatePoint, b: &StatePoint) -> f64 {
        self.metric.distance(a, b)
    }

    pub(crate) fn check_dim(&self, x: &StatePoint) -> Result<()> {
        if x.dim() != self.dimension() {
            return Err(Error::invalid(format!(
                "point {x} has dimension {}, system `{}` has {}",
                x.dim(),
                self.name,
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Fails unless the sampled H2 check has run on this system.
    pub fn require_checked(&self) -> Result<()> {
        if self.attest.h2_checked {
            Ok(())
        } else {
            Err(Error::HypothesesUnchecked(self.name.clone()))
        }
    }

    /// `φ(x)` restricted to `(0, horizon]`; `None` means no hit.
    pub fn hitting_time(&self, x: &StatePoint, horizon: f64) -> Result<Option<f64>> {
        self.check_dim(x)?;
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(hitting::scan(self, x.coords(), horizon, true, false)?.time)
    }

    /// Builds the impulsive trajectory up to `horizon`, recording truncation
    /// by the Zeno guard as a flag instead of an error.
    pub fn simulate(&self, x: &StatePoint, horizon: f64) -> Result<ImpulsiveTrajectory> {
        self.check_dim(x)?;
        trajectory::simulate(self, x, horizon)
    }

    /// Like [`simulate`](Self::simulate) but a tripped Zeno guard is an error.
    pub fn build_trajectory(&self, x: &StatePoint, horizon: f64) -> Result<ImpulsiveTrajectory> {
        let traj = self.simulate(x, horizon)?;
        if traj.truncated_by() == Truncation::ZenoGuard {
            let time = traj.jump_times().last().copied().unwrap_or(0.0);
            return Err(Error::ZenoSuspect {
                time,
                jumps: traj.jump_count(),
            });
        }
        Ok(traj)
    }

    /// `π̃(x, t)`.
    pub fn evaluate(&self, x: &StatePoint, t: f64) -> Result<StatePoint> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
        }
        if t == 0.0 {
            self.check_dim(x)?;
            return Ok(x.clone());
        }
        self.build_trajectory(x, t)?.state_at(t)
    }

    /// Runs the sampled H2 and dwell checks and sets the H2 flag on success.
    pub fn check_hypotheses(&mut self, n_surface_samples: usize, seed: u64) -> Result<HypothesisReport> {
        let report = probe::check_hypotheses(self, n_surface_samples, seed)?;
        self.attest.h2_checked = true;
        Ok(report)
    }

    /// Consuming form of [`check_hypotheses`](Self::check_hypotheses).
    pub fn into_checked(mut self, n_surface_samples: usize, seed: u64) -> Result<Self> {
        self.check_hypotheses(n_surface_samples, seed)?;
        Ok(self)
    }
}

/// `φ(x)` up to `horizon`; `None` encodes `φ(x) = +∞` within the horizon.
pub fn hitting_time(sys: &ImpulsiveSystem, x: &StatePoint, horizon: f64) -> Result<Option<f64>> {
    sys.hitting_time(x, horizon)
}

/// See [`ImpulsiveSystem::build_trajectory`].
pub fn build_trajectory(sys: &ImpulsiveSystem, x: &StatePoint, horizon: f64) -> Result<ImpulsiveTrajectory> {
    sys.build_trajectory(x, horizon)
}

/// `π̃(x, t)` with the right-continuous convention at jumps.
pub fn evaluate_impulsive(sys: &ImpulsiveSystem, x: &StatePoint, t: f64) -> Result<StatePoint> {
    sys.evaluate(x, t)
}

/// Jump times `t_1 < t_2 < …` recorded in the trajectory.
pub fn jump_times(traj: &ImpulsiveTrajectory) -> Vec<f64> {
    traj.jump_times()
}

/// Samples `n` points of the ball `B(x, radius)` and reports the spread of
/// `φ` around `φ(x)`.
pub fn phi_continuity_probe(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    radius: f64,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<ProbeReport> {
    probe::phi_continuity_probe(sys, x, radius, n, horizon, seed)
}

/// See [`ImpulsiveSystem::check_hypotheses`].
pub fn check_hypotheses_sampled(
    sys: &mut ImpulsiveSystem,
    n_surface_samples: usize,
    seed: u64,
) -> Result<HypothesisReport> {
    sys.check_hypotheses(n_surface_samples, seed)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::expr::parse_expression;

    pub fn exprs(texts: &[&str], d: usize) -> Vec<Expr> {
        texts.iter().map(|s| parse_expression(s, d).unwrap()).collect()
    }

    pub fn system(name: &str, flow: &[&str], g: &str, impulse: &[&str]) -> ImpulsiveSystem {
        let d = flow.len();
        let flow = Semiflow::closed_form(d, exprs(flow, d)).unwrap();
        let surface = ImpulseSurface::new(d, parse_expression(g, d).unwrap()).unwrap();
        let impulse = ImpulseMap::new(d, exprs(impulse, d)).unwrap();
        ImpulsiveSystem::new(name, flow, surface, impulse, 1e-6).unwrap()
    }

    pub fn translation() -> ImpulsiveSystem {
        system("translation", &["x1 + t", "x2"], "x1 - 1", &["0", "x2 / 2"])
    }

    pub fn radial() -> ImpulsiveSystem {
        system(
            "radial",
            &["x1 * exp(-t)", "x2 * exp(-t)"],
            "x1^2 + x2^2 - exp(-2)",
            &["sqrt(1 - x2^2)", "x2"],
        )
    }

    pub fn pt(c: &[f64]) -> StatePoint {
        StatePoint::from_slice(c).unwrap()
    }
}
