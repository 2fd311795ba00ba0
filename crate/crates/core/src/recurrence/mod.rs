//! Recurrence analysis of impulsive motions: limit sets, sequence classes
//! `𝓛_{z,p}^{+∞}`, recurrence times, almost periods and asymptotic matching.

mod almost_period;
mod asymptotic;
mod limit_set;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::impulsive::{ImpulsiveSystem, ImpulsiveTrajectory};
use crate::math;
use crate::search::golden_min;
use crate::state::{Metric, StatePoint};

pub use almost_period::{
    almost_period_search, cloud_shift_defect, detect_recurrence_type, AlmostPeriodOutcome, AlmostPeriodReport,
    RecurrenceParams, RecurrenceReport, TauSample,
};
pub use asymptotic::{asymptotic_match, p_x_membership, DecayProfile, PxReport, Reparametrization, WindowSup};
pub(crate) use limit_set::greedy_cluster;
pub use limit_set::{
    estimate_limit_set, has_point_off_surface, orbit_cloud, orbit_limit_hausdorff, positive_invariance_probe,
    InvarianceReport, LimitSetEstimate,
};

/// Number of tail evaluations in the Cauchy test.
pub const TAIL_K: usize = 10;

/// A finite time sequence `{t_n}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TimeSequence {
    times: Vec<f64>,
    divergent: bool,
}

impl TimeSequence {
    /// A non-decreasing sequence of finite, non-negative times.
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time sequence is empty"));
        }
        if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::invalid("times must be finite and non-negative"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("times must be non-decreasing"));
        }
        Ok(TimeSequence {
            times,
            divergent: false,
        })
    }

    /// A strictly increasing sequence tagged as tending to `+∞`; its last
    /// element must exceed the first by more than `span`.
    pub fn divergent(times: Vec<f64>, span: f64) -> Result<Self> {
        let mut seq = Self::new(times)?;
        if seq.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("divergent sequences must be strictly increasing"));
        }
        if seq.times.len() > 1 && !(seq.last() > seq.times[0] + span) {
            return Err(Error::invalid(format!(
                "sequence does not cover the declared span {span}"
            )));
        }
        seq.divergent = true;
        Ok(seq)
    }

    /// Alternates the elements of two families (`a_1, b_1, a_2, b_2, …` in
    /// time order), truncated to the shorter family.
    pub fn interleave(a: &TimeSequence, b: &TimeSequence) -> Result<Self> {
        let n = a.len().min(b.len());
        let mut times: Vec<f64> = a.times[..n].iter().chain(&b.times[..n]).copied().collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        if a.divergent && b.divergent {
            Self::divergent(times, 0.0)
        } else {
            Self::new(times)
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn is_divergent(&self) -> bool {
        self.divergent
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }
}

/// A concrete member of `𝓛_{z,p}`: a sequence together with its observed limit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SequenceClassElement {
    pub base: StatePoint,
    pub sequence: TimeSequence,
    pub observed_limit: StatePoint,
    /// Largest pairwise distance among the last [`TAIL_K`] evaluations.
    pub cauchy_defect: f64,
}

/// Result of [`classify_sequence`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Classification {
    Element(SequenceClassElement),
    Divergent { defect: f64, tail: Vec<StatePoint> },
}

impl Classification {
    pub fn defect(&self) -> f64 {
        match self {
            Classification::Element(e) => e.cauchy_defect,
            Classification::Divergent { defect, .. } => *defect,
        }
    }

    pub fn element(&self) -> Option<&SequenceClassElement> {
        match self {
            Classification::Element(e) => Some(e),
            Classification::Divergent { .. } => None,
        }
    }

    pub fn is_element(&self) -> bool {
        self.element().is_some()
    }
}

/// Cauchy defect and mean of a tail of points.
pub(crate) fn tail_summary(metric: Metric, tail: &[StatePoint]) -> (f64, StatePoint) {
    let mut defect: f64 = 0.0;
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            defect = defect.max(metric.distance(a, b));
        }
    }
    let d = tail[0].dim();
    let mut mean = alloc::vec![0.0; d];
    for p in tail {
        for (m, c) in mean.iter_mut().zip(p.coords()) {
            *m += c;
        }
    }
    let n = tail.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    (defect, StatePoint::from_finite(mean))
}

/// Classifies `seq` against an already built trajectory of `z`.
pub(crate) fn classify_on(
    traj: &ImpulsiveTrajectory,
    metric: Metric,
    seq: &TimeSequence,
    seq_tol: f64,
) -> Result<Classification> {
    let start = seq.len().saturating_sub(TAIL_K);
    let tail = seq.times[start..]
        .iter()
        .map(|&t| traj.state_at(t))
        .collect::<Result<Vec<_>>>()?;
    let (defect, mean) = tail_summary(metric, &tail);
    if defect <= seq_tol {
        Ok(Classification::Element(SequenceClassElement {
            base: traj.origin().clone(),
            sequence: seq.clone(),
            observed_limit: mean,
            cauchy_defect: defect,
        }))
    } else {
        Ok(Classification::Divergent { defect, tail })
    }
}

/// Decides whether `π̃(z, t_n)` settles within `seq_tol` over the last
/// [`TAIL_K`] entries of the sequence.
pub fn classify_sequence(
    sys: &ImpulsiveSystem,
    z: &StatePoint,
    seq: &TimeSequence,
    seq_tol: f64,
) -> Result<Classification> {
    let traj = sys.build_trajectory(z, seq.last())?;
    classify_on(&traj, sys.metric(), seq, seq_tol)
}

/// Options for [`generate_recurrence_times`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceTimeOptions {
    /// Grid step of the distance scan.
    pub dt: f64,
    /// Acceptance radius scale: the `n`-th accepted time must satisfy
    /// `ρ(π̃(x, s_n), q) ≤ delta0 / n`.
    pub delta0: f64,
    /// Scan starts here.
    pub start: f64,
    /// Offset from jump times at which one-sided approaches are evaluated;
    /// `None` uses `10 · time_tol`.
    pub jump_guard: Option<f64>,
    /// Width to which local minima are refined.
    pub refine_tol: f64,
}

impl RecurrenceTimeOptions {
    /// Defaults tied to a clustering radius: `δ₀ = 10 · cluster_eps`.
    pub fn for_cluster_eps(cluster_eps: f64) -> Self {
        RecurrenceTimeOptions {
            dt: 0.01,
            delta0: 10.0 * cluster_eps,
            start: 0.0,
            jump_guard: None,
            refine_tol: 1e-12,
        }
    }
}

impl Default for RecurrenceTimeOptions {
    fn default() -> Self {
        Self::for_cluster_eps(0.01)
    }
}

/// Times `s_1 < s_2 < …` of successive closest approaches of `π̃(x, ·)` to `q`,
/// the `n`-th one within `δ₀ / n`.
pub fn generate_recurrence_times(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    q: &StatePoint,
    count: usize,
    horizon: f64,
    opts: &RecurrenceTimeOptions,
) -> Result<TimeSequence> {
    sys.check_dim(q)?;
    let traj = sys.build_trajectory(x, horizon)?;
    let guard = opts.jump_guard.unwrap_or(10.0 * sys.time_tol());
    recurrence_times_on(&traj, sys.metric(), q, count, opts, guard)
}

pub(crate) fn recurrence_times_on(
    traj: &ImpulsiveTrajectory,
    metric: Metric,
    q: &StatePoint,
    count: usize,
    opts: &RecurrenceTimeOptions,
    guard: f64,
) -> Result<TimeSequence> {
    if count == 0 || !(opts.dt > 0.0) || !(opts.delta0 > 0.0) || !(guard > 0.0) {
        return Err(Error::invalid(
            "recurrence search needs count ≥ 1 and positive dt, δ₀, guard",
        ));
    }
    let horizon = traj.horizon();
    let dist = |t: f64| -> Result<f64> { Ok(metric.distance(&traj.state_at(t)?, q)) };
    let jumps = traj.jump_times();
    let jump_in = |a: f64, b: f64| {
        let i = jumps.partition_point(|&j| j <= a);
        i < jumps.len() && jumps[i] <= b + guard
    };

    let n = math::floor((horizon - opts.start) / opts.dt).max(0.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|k| opts.start + k as f64 * opts.dt).collect();
    let vals = grid.iter().map(|&t| dist(t)).collect::<Result<Vec<_>>>()?;

    let mut cands: Vec<(f64, f64)> = Vec::new();
    for k in 1..n {
        if vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] {
            let (a, b) = (grid[k - 1], grid[k + 1]);
            if jump_in(a - guard, b) {
                cands.push((grid[k], vals[k]));
            } else {
                cands.push(golden_min(&dist, a, b, opts.refine_tol)?);
            }
        }
    }
    for &j in &jumps {
        for t in [j - guard, j + guard] {
            if t >= opts.start && t <= horizon {
                cands.push((t, dist(t)?));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));

    // One candidate per visit: merge runs closer than two grid steps.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut run_end = f64::NEG_INFINITY;
    for c in cands {
        match merged.last_mut() {
            Some(last) if c.0 - run_end < 2.0 * opts.dt => {
                if c.1 < last.1 {
                    *last = c;
                }
            }
            _ => merged.push(c),
        }
        run_end = c.0;
    }

    let mut times: Vec<f64> = Vec::with_capacity(count);
    for (t, d) in merged {
        if times.len() == count {
            break;
        }
        let radius = opts.delta0 / (times.len() + 1) as f64;
        if d <= radius && times.last().is_none_or(|&l| t > l) {
            times.push(t);
        }
    }
    if times.len() < count {
        return Err(Error::NotRecurrent {
            target: q.clone(),
            found: times.len(),
            wanted: count,
        });
    }
    TimeSequence::divergent(times, 0.0)
}
