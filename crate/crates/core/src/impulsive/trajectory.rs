//! Impulsive trajectories: flow segments joined by jumps through `I`.

use alloc::format;
use alloc::vec::Vec;

use super::hitting::{self, ScanResult};
use super::ImpulsiveSystem;
use crate::error::{Error, Result};
use crate::semiflow::Semiflow;
use crate::state::StatePoint;

/// Why a trajectory stops where it does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Truncation {
    /// The next hit lies beyond the horizon (or could not be looked up).
    Horizon,
    /// More than `max_jumps_per_unit · horizon` jumps, or a dwell below `min_dwell`.
    ZenoGuard,
    /// No further hit within a look-ahead window past the horizon.
    NoMoreHits,
}

/// One flow piece `π(x_n⁺, s)` for `s ∈ [0, s_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Jump time `t_n` at which the segment starts (`0` for the first one).
    pub start_time: f64,
    /// `x_n⁺`.
    pub start: StatePoint,
    /// Dwell `s_n`; `None` for the final, open segment.
    pub dwell: Option<f64>,
    /// Pre-impulse point `x_{n+1}` reached after the dwell.
    pub end: Option<StatePoint>,
    checkpoints: Vec<(f64, Vec<f64>)>,
}

/// A row of the trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub seg_index: usize,
    pub is_jump: bool,
    pub state: Vec<f64>,
}

/// The impulsive trajectory `π̃(x, ·)` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveTrajectory {
    segments: Vec<Segment>,
    horizon: f64,
    truncated_by: Truncation,
    flow: Semiflow,
    time_tol: f64,
}

impl ImpulsiveTrajectory {
    pub fn origin(&self) -> &StatePoint {
        &self.segments[0].start
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn truncated_by(&self) -> Truncation {
        self.truncated_by
    }

    pub fn jump_count(&self) -> usize {
        self.segments.len() - 1
    }

    /// `t_1 < t_2 < …`.
    pub fn jump_times(&self) -> Vec<f64> {
        self.segments[1..].iter().map(|s| s.start_time).collect()
    }

    /// Post-impulse points `x_n⁺`, `n ≥ 1`.
    pub fn post_impulse_states(&self) -> Vec<&StatePoint> {
        self.segments[1..].iter().map(|s| &s.start).collect()
    }

    /// Pre-impulse points `x_n`, `n ≥ 1`.
    pub fn pre_impulse_states(&self) -> Vec<&StatePoint> {
        self.segments.iter().filter_map(|s| s.end.as_ref()).collect()
    }

    /// Index of the segment holding `π̃(x, t)`: the last one starting no later
    /// than `t + time_tol`.
    pub fn segment_index(&self, t: f64) -> usize {
        let key = t + self.time_tol;
        self.segments.partition_point(|s| s.start_time <= key).max(1) - 1
    }

    /// `π̃(x, t)` for `0 ≤ t ≤ horizon`, right-continuous at jumps.
    pub fn state_at(&self, t: f64) -> Result<StatePoint> {
        if !(t >= 0.0) || t > self.horizon + self.time_tol {
            return Err(Error::Domain(format!(
                "time {t} outside the trajectory window [0, {}]",
                self.horizon
            )));
        }
        let seg = &self.segments[self.segment_index(t)];
        let offset = (t - seg.start_time).max(0.0);
        self.flow_in(seg, offset).map(StatePoint::from_finite)
    }

    /// Left limit `π̃(x, t⁻)`; equals [`state_at`](Self::state_at) away from jumps.
    pub fn left_limit(&self, t: f64) -> Result<StatePoint> {
        let i = self.segment_index(t);
        if i > 0 && (self.segments[i].start_time - t).abs() <= self.time_tol {
            if let Some(end) = &self.segments[i - 1].end {
                return Ok(end.clone());
            }
        }
        self.state_at(t)
    }

    fn flow_in(&self, seg: &Segment, offset: f64) -> Result<Vec<f64>> {
        if self.flow.is_closed_form() || offset == 0.0 {
            return self.flow.advance(seg.start.coords(), offset);
        }
        let k = seg.checkpoints.partition_point(|(s, _)| *s <= offset);
        match k.checked_sub(1).map(|i| &seg.checkpoints[i]) {
            Some((s, state)) => self.flow.advance(state, offset - s),
            None => self.flow.advance(seg.start.coords(), offset),
        }
    }

    /// Rows on the grid `0, dt, 2dt, …, horizon`, plus a left-limit row and a
    /// post-impulse row at every jump.
    pub fn sample_rows(&self, dt: f64) -> Result<Vec<TrajectoryRow>> {
        if !(dt > 0.0) {
            return Err(Error::invalid("sampling step must be positive"));
        }
        let n = crate::math::floor(self.horizon / dt + 1e-9) as usize;
        let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        if self.horizon - grid[n] > self.time_tol {
            grid.push(self.horizon);
        }
        let jumps = self.jump_times();
        let mut rows = Vec::with_capacity(grid.len() + 2 * jumps.len());
        let mut j = 0;
        for &t in &grid {
            while j < jumps.len() && jumps[j] <= t + self.time_tol {
                let tj = jumps[j];
                let left = self.segments[j].end.as_ref().expect("closed segment");
                rows.push(TrajectoryRow {
                    t: tj,
                    seg_index: j,
                    is_jump: false,
                    state: left.coords().to_vec(),
                });
                rows.push(TrajectoryRow {
                    t: tj,
                    seg_index: j + 1,
                    is_jump: true,
                    state: self.segments[j + 1].start.coords().to_vec(),
                });
                j += 1;
            }
            if j > 0 && (t - jumps[j - 1]).abs() <= self.time_tol {
                continue;
            }
            rows.push(TrajectoryRow {
                t,
                seg_index: self.segment_index(t),
                is_jump: false,
                state: self.state_at(t)?.into_inner(),
            });
        }
        Ok(rows)
    }
}

fn open_segment(start_time: f64, start: StatePoint, checkpoints: Vec<(f64, Vec<f64>)>) -> Segment {
    Segment {
        start_time,
        start,
        dwell: None,
        end: None,
        checkpoints,
    }
}

pub(super) fn simulate(sys: &ImpulsiveSystem, x: &StatePoint, horizon: f64) -> Result<ImpulsiveTrajectory> {
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::Domain(format!(
            "horizon must be finite and non-negative, got {horizon}"
        )));
    }
    let tol = sys.tolerances();
    let max_jumps = tol.max_jumps_per_unit * horizon.max(1.0);
    let lookahead = horizon.max(1.0);
    let mut segments = Vec::new();
    let mut t = 0.0;
    let mut cur = x.clone();

    let truncated_by = loop {
        let remaining = horizon - t;
        let scan = match scan_ahead(sys, cur.coords(), remaining, lookahead) {
            Ok(s) => s,
            Err(Error::ZenoSuspect { .. }) if !segments.is_empty() => {
                segments.push(open_segment(t, cur, Vec::new()));
                break Truncation::ZenoGuard;
            }
            Err(e) => return Err(e),
        };
        let ScanResult {
            time,
            end_state,
            checkpoints,
        } = match scan {
            Some(s) => s,
            None => {
                segments.push(open_segment(t, cur, Vec::new()));
                break Truncation::Horizon;
            }
        };
        match (time, end_state) {
            (Some(s), Some(end)) if t + s <= horizon + tol.time_tol => {
                let image = sys.impulse().apply_slice(&end)?;
                let end = StatePoint::from_finite(end);
                let next = StatePoint::new(image).map_err(|_| Error::IntegrationDiverged {
                    t: t + s,
                    reason: format!("impulse image of {end} is not finite"),
                })?;
                segments.push(Segment {
                    start_time: t,
                    start: cur,
                    dwell: Some(s),
                    end: Some(end),
                    checkpoints,
                });
                t += s;
                cur = next;
                if segments.len() as f64 > max_jumps {
                    segments.push(open_segment(t, cur, Vec::new()));
                    break Truncation::ZenoGuard;
                }
            }
            (Some(_), _) => {
                segments.push(open_segment(t, cur, checkpoints));
                break Truncation::Horizon;
            }
            (None, _) => {
                segments.push(open_segment(t, cur, checkpoints));
                break Truncation::NoMoreHits;
            }
        }
    };

    Ok(ImpulsiveTrajectory {
        segments,
        horizon,
        truncated_by,
        flow: sys.flow().clone(),
        time_tol: tol.time_tol,
    })
}

/// Scans past the remaining window by `lookahead`. If the look-ahead part
/// fails numerically, falls back to the window alone; `None` then means the
/// window is clear but nothing is known beyond it.
fn scan_ahead(sys: &ImpulsiveSystem, x: &[f64], remaining: f64, lookahead: f64) -> Result<Option<ScanResult>> {
    match hitting::scan(sys, x, remaining + lookahead, true, true) {
        Ok(s) => Ok(Some(s)),
        Err(e @ Error::ZenoSuspect { .. }) => Err(e),
        Err(e) => {
            if remaining <= 0.0 {
                return Ok(None);
            }
            let s = hitting::scan(sys, x, remaining, true, true).map_err(|_| e)?;
            Ok(if s.time.is_some() { Some(s) } else { None })
        }
    }
}
