//! Grid scan plus bisection for the first positive root of `t ↦ g(π(x, t))`.

use alloc::format;
use alloc::vec::Vec;
use core::mem;

use super::ImpulsiveSystem;
use crate::error::{Error, Result};
use crate::math;
use crate::search::{bisect_root, golden_min};
use crate::semiflow::Semiflow;

/// ODE scans keep a checkpoint every this many grid steps.
pub(super) const CHECKPOINT_EVERY: usize = 100;
const MAX_SCAN_STEPS: f64 = 1e9;

pub(crate) struct ScanResult {
    /// First root, measured from the scanned point.
    pub time: Option<f64>,
    /// `π(x, time)` when a root was found.
    pub end_state: Option<Vec<f64>>,
    /// `(offset, π(x, offset))` pairs recorded along ODE scans.
    pub checkpoints: Vec<(f64, Vec<f64>)>,
}

struct Sample {
    t: f64,
    g: f64,
    state: Vec<f64>,
}

/// Evaluates `π(x, τ)`. Closed-form flows use the scan origin directly; ODE
/// flows integrate forward from the nearest earlier grid sample.
struct Track<'a> {
    flow: &'a Semiflow,
    origin: &'a [f64],
    closed: bool,
}

impl Track<'_> {
    fn at(&self, anchor: &Sample, tau: f64) -> Result<Vec<f64>> {
        if self.closed {
            self.flow.advance(self.origin, tau)
        } else {
            self.flow.advance(&anchor.state, (tau - anchor.t).max(0.0))
        }
    }
}

/// Scans `(0, horizon]` for the first crossing of `M`.
///
/// With `guarded`, a root earlier than `min_dwell` from a point outside the
/// band is reported as [`Error::ZenoSuspect`].
pub(crate) fn scan(sys: &ImpulsiveSystem, x: &[f64], horizon: f64, guarded: bool, record: bool) -> Result<ScanResult> {
    let tol = sys.tolerances();
    let band = tol.surface_tol;
    let flow = sys.flow();
    let g = |s: &[f64]| sys.surface().g(s);
    let track = Track {
        flow,
        origin: x,
        closed: flow.is_closed_form(),
    };
    let mut out = ScanResult {
        time: None,
        end_state: None,
        checkpoints: Vec::new(),
    };

    let in_band = g(x)?.abs() <= band;
    let start = if in_band { sys.min_dwell() } else { 0.0 };
    if start >= horizon {
        return Ok(out);
    }
    let first = if in_band { flow.advance(x, start)? } else { x.to_vec() };
    let mut prev = Sample {
        t: start,
        g: g(&first)?,
        state: first,
    };
    let mut prev2: Option<Sample> = None;

    let steps = math::ceil((horizon - start) / tol.scan_dt);
    if steps > MAX_SCAN_STEPS {
        return Err(Error::invalid(format!(
            "horizon {horizon} needs {steps:e} scan steps at scan_dt = {}",
            tol.scan_dt
        )));
    }
    let steps = (steps as usize).max(1);

    let root = 'scan: {
        if prev.g == 0.0 {
            break 'scan Some((start, prev));
        }
        for k in 1..=steps {
            let t = if k == steps {
                horizon
            } else {
                start + k as f64 * tol.scan_dt
            };
            let state = track.at(&prev, t)?;
            let gk = g(&state)?;
            if gk == 0.0 {
                break 'scan Some((t, prev));
            }
            if (gk < 0.0) != (prev.g < 0.0) {
                let r = bisect_root(|tau| g(&track.at(&prev, tau)?), prev.t, t, prev.g, gk, tol.time_tol)?;
                break 'scan Some((r, prev));
            }
            if let Some(p2) = &prev2 {
                let (a, b, c) = (p2.g.abs(), prev.g.abs(), gk.abs());
                // A discrete minimum of |g| deep enough, relative to the local
                // curvature, that the continuous minimum may reach the band.
                if b < a && b <= c && b <= (a - 2.0 * b + c).max(band) {
                    let sgn = if prev.g < 0.0 { -1.0 } else { 1.0 };
                    let (tm, m) = golden_min(|tau| Ok(sgn * g(&track.at(p2, tau)?)?), p2.t, t, tol.time_tol)?;
                    if m <= 0.0 {
                        let r = bisect_root(|tau| g(&track.at(p2, tau)?), p2.t, tm, p2.g, sgn * m, tol.time_tol)?;
                        let p2 = prev2.take().unwrap();
                        break 'scan Some((r, p2));
                    }
                    if m <= band {
                        return Err(Error::GrazeDetected { time: tm, g: m });
                    }
                }
            }
            if record && !track.closed && k % CHECKPOINT_EVERY == 0 {
                out.checkpoints.push((t, state.clone()));
            }
            prev2 = Some(mem::replace(&mut prev, Sample { t, g: gk, state }));
        }
        None
    };

    if let Some((r, anchor)) = root {
        if guarded && !in_band && r < sys.min_dwell() {
            return Err(Error::ZenoSuspect { time: r, jumps: 0 });
        }
        out.end_state = Some(track.at(&anchor, r)?);
        out.time = Some(r);
    }
    Ok(out)
}
