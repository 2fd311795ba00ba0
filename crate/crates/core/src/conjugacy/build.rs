//! Comparability by the character of recurrence and the construction
//! `h(q) = lim σ̃(y, s_n)` along recurrence times `s_n` of `x` to `q`.

use alloc::vec::Vec;

use super::map::{continuity_modulus, grid_spacing, ConjugacyMap, TableEntry};
use crate::error::{Error, Result};
use crate::impulsive::{ImpulsiveSystem, ImpulsiveTrajectory};
use crate::recurrence::{
    classify_on, estimate_limit_set, recurrence_times_on, Classification, RecurrenceTimeOptions, TimeSequence,
};
use crate::state::StatePoint;

/// Shared settings for the conjugacy constructions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyOptions {
    /// Length of every generated recurrence sequence.
    pub count: usize,
    /// Time horizon for both motions.
    pub horizon: f64,
    pub recurrence: RecurrenceTimeOptions,
    /// Image classification tolerance; `None` uses the target system's `seq_tol`.
    pub seq_tol: Option<f64>,
    /// Limit-set window and radius used to draw targets.
    pub t0: f64,
    pub t1: f64,
    pub cluster_eps: f64,
    /// Number of target families in comparability checks.
    pub n_families: usize,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions {
            count: 30,
            horizon: 60.0,
            recurrence: RecurrenceTimeOptions::default(),
            seq_tol: None,
            t0: 20.0,
            t1: 60.0,
            cluster_eps: 0.01,
            n_families: 10,
        }
    }
}

/// Both motions built once, with the jump guard and tolerances settled.
pub(crate) struct Pair<'a> {
    pub sys_x: &'a ImpulsiveSystem,
    pub sys_y: &'a ImpulsiveSystem,
    pub tx: ImpulsiveTrajectory,
    pub ty: ImpulsiveTrajectory,
    pub guard: f64,
    pub seq_tol: f64,
}

impl<'a> Pair<'a> {
    pub fn new(
        sys_x: &'a ImpulsiveSystem,
        x: &StatePoint,
        sys_y: &'a ImpulsiveSystem,
        y: &StatePoint,
        opts: &ConjugacyOptions,
    ) -> Result<Self> {
        let tx = sys_x.build_trajectory(x, opts.horizon)?;
        let ty = sys_y.build_trajectory(y, opts.horizon)?;
        Ok(Pair {
            sys_x,
            sys_y,
            tx,
            ty,
            guard: opts
                .recurrence
                .jump_guard
                .unwrap_or(10.0 * sys_x.time_tol().max(sys_y.time_tol())),
            seq_tol: opts.seq_tol.unwrap_or(sys_y.seq_tol()),
        })
    }

    pub fn times(&self, q: &StatePoint, count: usize, rec: &RecurrenceTimeOptions) -> Result<TimeSequence> {
        self.sys_x.check_dim(q)?;
        recurrence_times_on(&self.tx, self.sys_x.metric(), q, count, rec, self.guard)
    }

    pub fn image(&self, seq: &TimeSequence) -> Result<Classification> {
        classify_on(&self.ty, self.sys_y.metric(), seq, self.seq_tol)
    }
}

/// What happened to one target family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "snake_case"))]
pub enum FamilyOutcome {
    Converged {
        times: TimeSequence,
        image_limit: StatePoint,
        defect: f64,
    },
    Divergent {
        times: TimeSequence,
        defect: f64,
    },
    NotRecurrent {
        found: usize,
    },
}

impl FamilyOutcome {
    pub fn defect(&self) -> Option<f64> {
        match self {
            FamilyOutcome::Converged { defect, .. } | FamilyOutcome::Divergent { defect, .. } => Some(*defect),
            FamilyOutcome::NotRecurrent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Family {
    pub target: StatePoint,
    pub outcome: FamilyOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    ComparableEvidence,
    Counterexample,
    Inconclusive,
}

/// Two converged families with distinct images, merged into one sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InterleaveProbe {
    pub targets: (StatePoint, StatePoint),
    pub sequence: TimeSequence,
    pub defect: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ComparabilityReport {
    pub families_tested: usize,
    pub families: Vec<Family>,
    pub verdict: Verdict,
    /// Times of the first family whose images diverge.
    pub counterexample: Option<TimeSequence>,
    pub interleave: Option<InterleaveProbe>,
    pub seq_tol: f64,
}

impl ComparabilityReport {
    pub fn max_defect(&self) -> f64 {
        self.families
            .iter()
            .filter_map(|f| f.outcome.defect())
            .fold(0.0, f64::max)
    }
}

/// Representatives of `L̃⁺(x)` inside `A`, thinned to at most `n` evenly
/// spread picks.
pub fn targets_from_limit_set<F>(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    in_a: F,
    n: usize,
    opts: &ConjugacyOptions,
) -> Result<Vec<StatePoint>>
where
    F: Fn(&StatePoint) -> bool,
{
    let est = estimate_limit_set(sys, x, opts.t0, opts.t1, opts.recurrence.dt, opts.cluster_eps)?;
    let inside: Vec<StatePoint> = est.points.into_iter().filter(|p| in_a(p)).collect();
    Ok(spread_pick(inside, n))
}

pub(crate) fn spread_pick(pts: Vec<StatePoint>, n: usize) -> Vec<StatePoint> {
    if pts.len() <= n {
        return pts;
    }
    if n == 0 {
        return Vec::new();
    }
    (0..n).map(|i| pts[i * pts.len() / n].clone()).collect()
}

pub(crate) fn run_families(
    pair: &Pair<'_>,
    targets: &[StatePoint],
    opts: &ConjugacyOptions,
) -> Result<ComparabilityReport> {
    let mut families = Vec::with_capacity(targets.len());
    for q in targets {
        let outcome = match pair.times(q, opts.count, &opts.recurrence) {
            Err(Error::NotRecurrent { found, .. }) => FamilyOutcome::NotRecurrent { found },
            Err(e) => return Err(e),
            Ok(times) => match pair.image(&times)? {
                Classification::Element(e) => FamilyOutcome::Converged {
                    times,
                    image_limit: e.observed_limit,
                    defect: e.cauchy_defect,
                },
                Classification::Divergent { defect, .. } => FamilyOutcome::Divergent { times, defect },
            },
        };
        families.push(Family {
            target: q.clone(),
            outcome,
        });
    }

    let counterexample = families.iter().find_map(|f| match &f.outcome {
        FamilyOutcome::Divergent { times, .. } => Some(times.clone()),
        _ => None,
    });
    let any_converged = families
        .iter()
        .any(|f| matches!(f.outcome, FamilyOutcome::Converged { .. }));
    let verdict = if counterexample.is_some() {
        Verdict::Counterexample
    } else if any_converged {
        Verdict::ComparableEvidence
    } else {
        Verdict::Inconclusive
    };
    let interleave = interleave_probe(pair, &families)?;
    Ok(ComparabilityReport {
        families_tested: families.len(),
        families,
        verdict,
        counterexample,
        interleave,
        seq_tol: pair.seq_tol,
    })
}

/// Interleaves the first two converged families whose image limits differ by
/// more than `10 · seq_tol` and classifies the merged sequence.
fn interleave_probe(pair: &Pair<'_>, families: &[Family]) -> Result<Option<InterleaveProbe>> {
    let converged: Vec<(&StatePoint, &TimeSequence, &StatePoint)> = families
        .iter()
        .filter_map(|f| match &f.outcome {
            FamilyOutcome::Converged { times, image_limit, .. } => Some((&f.target, times, image_limit)),
            _ => None,
        })
        .collect();
    let metric = pair.sys_y.metric();
    for (i, a) in converged.iter().enumerate() {
        for b in &converged[i + 1..] {
            if metric.distance(a.2, b.2) > 10.0 * pair.seq_tol {
                return interleave_targets(pair, a.0, a.1, b.0, b.1).map(Some);
            }
        }
    }
    Ok(None)
}

fn interleave_targets(
    pair: &Pair<'_>,
    q1: &StatePoint,
    s1: &TimeSequence,
    q2: &StatePoint,
    s2: &TimeSequence,
) -> Result<InterleaveProbe> {
    let sequence = TimeSequence::interleave(s1, s2)?;
    let c = pair.image(&sequence)?;
    Ok(InterleaveProbe {
        targets: (q1.clone(), q2.clone()),
        divergent: !c.is_element(),
        defect: c.defect(),
        sequence,
    })
}

/// Tests `𝓛_x^{+∞}(A) ⊂ 𝓛_y^{+∞}` on sampled targets `q ∈ L̃⁺(x) ∩ A`: each
/// family of recurrence times of `x` to `q` must carry `σ̃(y, ·)` to a limit.
pub fn check_comparability(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    targets: &[StatePoint],
    opts: &ConjugacyOptions,
) -> Result<ComparabilityReport> {
    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    run_families(&pair, &targets[..targets.len().min(opts.n_families)], opts)
}

/// Sequences `s_n` for the targets `q`, `q'` interleaved and pushed through
/// `σ̃(y, ·)`.
pub fn interleave_divergence(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    q1: &StatePoint,
    q2: &StatePoint,
    opts: &ConjugacyOptions,
) -> Result<InterleaveProbe> {
    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    let s1 = pair.times(q1, opts.count, &opts.recurrence)?;
    let s2 = pair.times(q2, opts.count, &opts.recurrence)?;
    interleave_targets(&pair, q1, &s1, q2, &s2)
}

/// `h(q)` with its defect and the uniqueness cross-check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HPoint {
    pub q: StatePoint,
    pub h: StatePoint,
    pub defect: f64,
    /// Image limit along the second, independent sequence.
    pub second: StatePoint,
    pub second_defect: f64,
    /// `ρ(h, second)`, required to stay within `10 · seq_tol`.
    pub uniqueness_distance: f64,
}

pub(crate) fn h_point(pair: &Pair<'_>, q: &StatePoint, opts: &ConjugacyOptions) -> Result<HPoint> {
    let first = image_limit(pair, q, &opts.recurrence, opts.count)?;
    let second_opts = RecurrenceTimeOptions {
        delta0: 0.5 * opts.recurrence.delta0,
        start: opts.recurrence.start + 0.5,
        ..opts.recurrence
    };
    let second = image_limit(pair, q, &second_opts, opts.count)?;
    let distance = pair.sys_y.distance(&first.0, &second.0);
    if distance > 10.0 * pair.seq_tol {
        return Err(Error::UniquenessViolation {
            q: q.clone(),
            first: first.0,
            second: second.0,
            distance,
        });
    }
    Ok(HPoint {
        q: q.clone(),
        h: first.0,
        defect: first.1,
        second: second.0,
        second_defect: second.1,
        uniqueness_distance: distance,
    })
}

fn image_limit(
    pair: &Pair<'_>,
    q: &StatePoint,
    rec: &RecurrenceTimeOptions,
    count: usize,
) -> Result<(StatePoint, f64)> {
    let times = pair.times(q, count, rec)?;
    match pair.image(&times)? {
        Classification::Element(e) => Ok((e.observed_limit, e.cauchy_defect)),
        Classification::Divergent { defect, .. } => Err(Error::ImageDivergent { q: q.clone(), defect }),
    }
}

/// `h(q) = lim σ̃(y, s_n)` for recurrence times `s_n` of `x` to `q`, checked
/// against a second sequence with half the acceptance radius and a later start.
pub fn build_h_point(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    q: &StatePoint,
    opts: &ConjugacyOptions,
) -> Result<HPoint> {
    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    h_point(&pair, q, opts)
}

/// A tabulated `h` with its per-point construction data.
#[derive(Debug, Clone, PartialEq)]
pub struct HGrid {
    pub map: ConjugacyMap,
    pub points: Vec<HPoint>,
    /// `max ρ(h(q_i), h(q_j)) / ρ(q_i, q_j)` over neighbouring grid points.
    pub continuity_modulus: f64,
}

pub(crate) fn h_grid_on(pair: &Pair<'_>, grid: &[StatePoint], opts: &ConjugacyOptions) -> Result<HGrid> {
    if grid.is_empty() {
        return Err(Error::invalid("h grid is empty"));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (i, q) in grid.iter().enumerate() {
        match h_point(pair, q, opts) {
            Ok(p) => points.push(p),
            Err(e) => failures.push((i, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::GridFailures { failures });
    }
    let metric = pair.sys_x.metric();
    let qs: Vec<StatePoint> = points.iter().map(|p| p.q.clone()).collect();
    let hs: Vec<StatePoint> = points.iter().map(|p| p.h.clone()).collect();
    let spacing = grid_spacing(metric, &qs);
    let continuity_modulus = continuity_modulus(metric, &qs, &hs, 1.5 * spacing);
    let entries = points
        .iter()
        .map(|p| TableEntry {
            q: p.q.clone(),
            h: p.h.clone(),
            defect: p.defect,
        })
        .collect();
    Ok(HGrid {
        map: ConjugacyMap::table(entries, 2.0 * spacing)?,
        points,
        continuity_modulus,
    })
}

/// Builds `h` at every grid point; failures are collected per index.
pub fn build_h_grid(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    grid: &[StatePoint],
    opts: &ConjugacyOptions,
) -> Result<HGrid> {
    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    h_grid_on(&pair, grid, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub forward: HGrid,
    /// `g : Y → X` built on the images `h(q)` with the roles exchanged.
    pub backward: HGrid,
    /// `max ρ(g(h(q)), q)`.
    pub max_residual: f64,
}

/// Builds `h` on `grid` and `g` on its image, then measures `g ∘ h − id`.
pub fn two_sided_round_trip(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    grid: &[StatePoint],
    opts: &ConjugacyOptions,
) -> Result<RoundTrip> {
    let forward = build_h_grid(sys_x, x, sys_y, y, grid, opts)?;
    let images: Vec<StatePoint> = forward.points.iter().map(|p| p.h.clone()).collect();
    let back_opts = ConjugacyOptions {
        seq_tol: Some(opts.seq_tol.unwrap_or(sys_x.seq_tol())),
        ..opts.clone()
    };
    let backward = build_h_grid(sys_y, y, sys_x, x, &images, &back_opts)?;
    let mut max_residual: f64 = 0.0;
    for p in &forward.points {
        let back = backward.map.apply(&p.h)?;
        max_residual = max_residual.max(sys_x.distance(&back, &p.q));
    }
    Ok(RoundTrip {
        forward,
        backward,
        max_residual,
    })
}
