//! Reference motions for the gallery pair, computed cycle by cycle from the
//! defining formulas. Kept apart from the library so that checks against the
//! simulator and against `sysconfig::Figure2Oracles` stay two-sided.
#![allow(dead_code)]

pub mod lemmas;

use impulsive_core::StatePoint;

pub fn pt(c: &[f64]) -> StatePoint {
    StatePoint::from_slice(c).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Translation system: unit speed in `x1`, jump at `x1 = 1` to `(0, x2/2)`.
/// Returns the state at `t` and the jump times up to `t`.
pub fn left_motion(a: f64, b: f64, t: f64) -> ([f64; 2], Vec<f64>) {
    let (mut x1, mut x2, mut now) = (a, b, 0.0);
    let mut jumps = Vec::new();
    loop {
        if x1 >= 1.0 {
            return ([x1 + (t - now), x2], jumps);
        }
        let hit = now + (1.0 - x1);
        if hit > t {
            return ([x1 + (t - now), x2], jumps);
        }
        jumps.push(hit);
        now = hit;
        x1 = 0.0;
        x2 /= 2.0;
    }
}

/// Radial system: `y e^{-t}`, jump on `|y| = e^{-1}` to `(sqrt(1 - y2²), y2)`.
pub fn right_motion(y1: f64, y2: f64, t: f64) -> ([f64; 2], Vec<f64>) {
    let (mut p, mut now) = ([y1, y2], 0.0);
    let mut jumps = Vec::new();
    loop {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if r <= (-1.0f64).exp() {
            let s = t - now;
            return ([p[0] * (-s).exp(), p[1] * (-s).exp()], jumps);
        }
        let dwell = 1.0 + r.ln();
        if now + dwell > t {
            let s = t - now;
            return ([p[0] * (-s).exp(), p[1] * (-s).exp()], jumps);
        }
        now += dwell;
        jumps.push(now);
        let m2 = p[1] * (-dwell).exp();
        p = [(1.0 - m2 * m2).sqrt(), m2];
    }
}

/// Hausdorff distance between a finite cloud and the segment `[0, 1] × {0}`.
/// The segment side is maximised over the ends, the midpoints between
/// consecutive projections (where the maximum sits for a cloud on the axis)
/// and a 1e-4 grid.
pub fn hausdorff_to_unit_segment(cloud: &[StatePoint]) -> f64 {
    let to_segment = cloud
        .iter()
        .map(|p| {
            let x = p[0].clamp(0.0, 1.0);
            dist(&[x, 0.0], p.coords())
        })
        .fold(0.0, f64::max);
    let mut candidates: Vec<f64> = vec![0.0, 1.0];
    let mut xs: Vec<f64> = cloud.iter().map(|p| p[0].clamp(0.0, 1.0)).collect();
    xs.sort_by(f64::total_cmp);
    for w in xs.windows(2) {
        candidates.push(0.5 * (w[0] + w[1]));
    }
    candidates.extend((0..=10_000).map(|k| k as f64 * 1e-4));
    let from_segment = candidates
        .iter()
        .map(|s| {
            cloud
                .iter()
                .map(|p| dist(&[*s, 0.0], p.coords()))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    to_segment.max(from_segment)
}
