//! Almost periods `τ_α ∈ [α, α + T]` and the recurrence-type detector.

use alloc::vec;
use alloc::vec::Vec;

use super::limit_set::estimate_limit_set;
use crate::error::{Error, Result};
use crate::impulsive::{ImpulsiveSystem, ImpulsiveTrajectory};
use crate::math;
use crate::search::golden_min;
use crate::state::{Metric, StatePoint};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TauSample {
    pub alpha: f64,
    pub tau: f64,
    /// `sup_t ρ(π̃(x, t + τ), π̃(x, t))` over the sampled grid.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AlmostPeriodReport {
    pub eps: f64,
    /// Smallest window length that worked for every sampled `α`.
    pub t_window: f64,
    pub taus: Vec<TauSample>,
    pub t_horizon: f64,
    pub dt: f64,
    /// The family `{τ_α : α ≥ 0}` is only sampled at these `α`.
    pub alpha_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "outcome", rename_all = "snake_case"))]
pub enum AlmostPeriodOutcome {
    Found(AlmostPeriodReport),
    /// No `τ ∈ [α, α + t_max]` had defect below `eps` for `alpha`.
    NotFound {
        eps: f64,
        t_max: f64,
        alpha: f64,
        /// Smallest full defect among candidates that passed the cheap
        /// `ρ(π̃(x, τ), x) < eps` screen, if any did.
        best_defect: Option<f64>,
    },
}

impl AlmostPeriodOutcome {
    pub fn report(&self) -> Option<&AlmostPeriodReport> {
        match self {
            AlmostPeriodOutcome::Found(r) => Some(r),
            AlmostPeriodOutcome::NotFound { .. } => None,
        }
    }
}

/// The `t`-grid `0, dt, …, t_horizon`, refined to `dt/10` within `±2·dt` of
/// each jump of the trajectory.
fn defect_grid(jumps: &[f64], t_horizon: f64, dt: f64) -> Vec<f64> {
    let n = math::floor(t_horizon / dt + 1e-9) as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    for &j in jumps.iter().filter(|&&j| j <= t_horizon + 2.0 * dt) {
        push_refined(&mut grid, j, t_horizon, dt);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn push_refined(grid: &mut Vec<f64>, centre: f64, t_horizon: f64, dt: f64) {
    for i in -20i32..=20 {
        let t = centre + f64::from(i) * dt / 10.0;
        if (0.0..=t_horizon).contains(&t) {
            grid.push(t);
        }
    }
}

/// `sup_t ρ(π̃(x, t + τ), π̃(x, t))`, stopping early once `cutoff` is exceeded.
/// `base` caches `π̃(x, t)` on `grid`; points near jumps of the shifted motion
/// are added on the fly.
#[allow(clippy::too_many_arguments)]
fn shift_defect(
    traj: &ImpulsiveTrajectory,
    metric: Metric,
    grid: &[f64],
    base: &[StatePoint],
    jumps: &[f64],
    tau: f64,
    t_horizon: f64,
    dt: f64,
    cutoff: f64,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (t, p) in grid.iter().zip(base) {
        sup = sup.max(metric.distance(&traj.state_at(t + tau)?, p));
        if sup >= cutoff {
            return Ok(sup);
        }
    }
    let mut extra = Vec::new();
    for &j in jumps
        .iter()
        .filter(|&&j| j >= tau - 2.0 * dt && j <= tau + t_horizon + 2.0 * dt)
    {
        push_refined(&mut extra, j - tau, t_horizon, dt);
    }
    for t in extra {
        sup = sup.max(metric.distance(&traj.state_at(t + tau)?, &traj.state_at(t)?));
        if sup >= cutoff {
            break;
        }
    }
    Ok(sup)
}

struct Prepared {
    traj: ImpulsiveTrajectory,
    jumps: Vec<f64>,
    grid: Vec<f64>,
    base: Vec<StatePoint>,
}

fn prepare(sys: &ImpulsiveSystem, x: &StatePoint, t_horizon: f64, reach: f64, dt: f64) -> Result<Prepared> {
    let traj = sys.build_trajectory(x, t_horizon + reach + 3.0 * dt)?;
    let jumps = traj.jump_times();
    let grid = defect_grid(&jumps, t_horizon, dt);
    let base = grid.iter().map(|&t| traj.state_at(t)).collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        traj,
        jumps,
        grid,
        base,
    })
}

/// Candidate shifts in `[lo, hi]`, ascending: jump times, refined local minima
/// of `r(τ) = ρ(π̃(x, τ), x)` and grid points with `r(τ) < eps`.
fn candidates(p: &Prepared, metric: Metric, x: &StatePoint, lo: f64, hi: f64, eps: f64, dt: f64) -> Result<Vec<f64>> {
    let r = |tau: f64| -> Result<f64> { Ok(metric.distance(&p.traj.state_at(tau)?, x)) };
    let mut out: Vec<f64> = p.jumps.iter().copied().filter(|&j| j >= lo && j <= hi).collect();
    let n = math::floor((hi - lo) / dt + 1e-9) as usize;
    let taus: Vec<f64> = (0..=n).map(|k| lo + k as f64 * dt).collect();
    let vals = taus.iter().map(|&t| r(t)).collect::<Result<Vec<_>>>()?;
    for k in 0..=n {
        if vals[k] < eps {
            out.push(taus[k]);
        }
        if k > 0 && k < n && vals[k] <= vals[k - 1] && vals[k] <= vals[k + 1] {
            let (a, b) = (taus[k - 1], taus[k + 1]);
            let i = p.jumps.partition_point(|&j| j < a);
            if i >= p.jumps.len() || p.jumps[i] > b {
                out.push(golden_min(&r, a, b, 1e-12)?.0);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

/// Searches, for every sampled `α`, the first `τ ∈ [α, α + t_max]` whose
/// shift defect over `[0, t_horizon]` is below `eps`. `τ` is kept strictly
/// positive (at least `dt`) so that `α = 0` cannot return the trivial shift.
pub fn almost_period_search(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    eps: f64,
    t_max: f64,
    t_horizon: f64,
    alpha_samples: &[f64],
    dt: f64,
) -> Result<AlmostPeriodOutcome> {
    if !(eps > 0.0) || !(t_max > 0.0) || !(t_horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::invalid("eps, t_max, t_horizon and dt must be positive"));
    }
    if alpha_samples.is_empty() || alpha_samples.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::invalid("need at least one finite α ≥ 0"));
    }
    let alpha_max = alpha_samples.iter().copied().fold(0.0, f64::max);
    let prep = prepare(sys, x, t_horizon, alpha_max + t_max, dt)?;
    let metric = sys.metric();
    let mut taus = Vec::with_capacity(alpha_samples.len());
    for &alpha in alpha_samples {
        let lo = alpha.max(dt);
        let mut best: Option<f64> = None;
        let mut found = None;
        for tau in candidates(&prep, metric, x, lo, alpha + t_max, eps, dt)? {
            if metric.distance(&prep.traj.state_at(tau)?, x) >= eps {
                continue;
            }
            let defect = shift_defect(
                &prep.traj,
                metric,
                &prep.grid,
                &prep.base,
                &prep.jumps,
                tau,
                t_horizon,
                dt,
                eps,
            )?;
            best = Some(best.map_or(defect, |b: f64| b.min(defect)));
            if defect < eps {
                found = Some(TauSample { alpha, tau, defect });
                break;
            }
        }
        match found {
            Some(s) => taus.push(s),
            None => {
                return Ok(AlmostPeriodOutcome::NotFound {
                    eps,
                    t_max,
                    alpha,
                    best_defect: best,
                })
            }
        }
    }
    let t_window = taus.iter().map(|s| s.tau - s.alpha).fold(0.0, f64::max);
    Ok(AlmostPeriodOutcome::Found(AlmostPeriodReport {
        eps,
        t_window,
        taus,
        t_horizon,
        dt,
        alpha_samples: alpha_samples.to_vec(),
    }))
}

/// `max_p sup_t ρ(π̃(p, t + τ), π̃(p, t))` over the given points outside the
/// band of `M`.
pub fn cloud_shift_defect(
    sys: &ImpulsiveSystem,
    tau: f64,
    points: &[StatePoint],
    t_horizon: f64,
    dt: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        if sys.in_band(p)? {
            continue;
        }
        let prep = prepare(sys, p, t_horizon, tau, dt)?;
        let d = shift_defect(
            &prep.traj,
            sys.metric(),
            &prep.grid,
            &prep.base,
            &prep.jumps,
            tau,
            t_horizon,
            dt,
            f64::INFINITY,
        )?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Settings for [`detect_recurrence_type`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RecurrenceParams {
    /// Limit-set window.
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub cluster_eps: f64,
    /// Almost-period tolerance.
    pub eps: f64,
    pub t_max: f64,
    pub t_horizon: f64,
    pub alpha_samples: Vec<f64>,
    /// `sup_t ρ(π̃(x, t), x)` below this counts as stationary.
    pub stationary_tol: f64,
}

impl Default for RecurrenceParams {
    fn default() -> Self {
        RecurrenceParams {
            t0: 20.0,
            t1: 60.0,
            dt: 0.01,
            cluster_eps: 0.01,
            eps: 1e-6,
            t_max: 5.0,
            t_horizon: 20.0,
            alpha_samples: vec![0.0, 2.5, 5.0, 7.5, 10.0],
            stationary_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RecurrenceReport {
    pub stationary: bool,
    /// Smallest positive shift found with defect below `eps` (`α = 0`).
    pub periodic: Option<f64>,
    pub almost_periodic: bool,
    pub poisson_stable: bool,
    /// `dist(x, L̃⁺(x) estimate)`.
    pub distance_to_limit_set: f64,
    pub limit_set_converged: bool,
    pub almost_period: AlmostPeriodOutcome,
}

pub fn detect_recurrence_type(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    params: &RecurrenceParams,
) -> Result<RecurrenceReport> {
    let metric = sys.metric();
    let traj = sys.build_trajectory(x, params.t_horizon)?;
    let n = math::floor(params.t_horizon / params.dt + 1e-9) as usize;
    let mut drift: f64 = 0.0;
    for k in 0..=n {
        drift = drift.max(metric.distance(&traj.state_at(k as f64 * params.dt)?, x));
    }
    let stationary = drift <= params.stationary_tol;

    let periodic = if stationary {
        None
    } else {
        match almost_period_search(sys, x, params.eps, params.t_max, params.t_horizon, &[0.0], params.dt)? {
            AlmostPeriodOutcome::Found(r) => Some(r.taus[0].tau),
            AlmostPeriodOutcome::NotFound { .. } => None,
        }
    };
    let almost_period = almost_period_search(
        sys,
        x,
        params.eps,
        params.t_max,
        params.t_horizon,
        &params.alpha_samples,
        params.dt,
    )?;
    let est = estimate_limit_set(sys, x, params.t0, params.t1, params.dt, params.cluster_eps)?;
    let distance_to_limit_set = est.distance_to(metric, x);
    Ok(RecurrenceReport {
        stationary,
        periodic,
        almost_periodic: almost_period.report().is_some(),
        poisson_stable: distance_to_limit_set <= params.cluster_eps,
        distance_to_limit_set,
        limit_set_converged: est.converged,
        almost_period,
    })
}
