//! Point-cloud estimates of the positive limit set `L̃⁺(x)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::impulsive::{ImpulsiveSystem, ImpulsiveTrajectory};
use crate::math;
use crate::state::{hausdorff, Metric, StatePoint};

/// Clustered samples of `π̃(x, t)` over a late time window.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LimitSetEstimate {
    /// Cluster representatives, pairwise at least `cluster_eps` apart.
    pub points: Vec<StatePoint>,
    pub cluster_sizes: Vec<usize>,
    pub cluster_eps: f64,
    pub window: (f64, f64),
    pub dt: f64,
    /// Hausdorff distance between the clouds of the two half windows.
    pub half_window_distance: f64,
    /// `half_window_distance ≤ 2 · cluster_eps`.
    pub converged: bool,
}

impl LimitSetEstimate {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `p` to the cloud (`+∞` when empty).
    pub fn distance_to(&self, metric: Metric, p: &StatePoint) -> f64 {
        metric.distance_to_set(p, &self.points)
    }
}

/// Greedy first-come clustering: a sample joins the first representative
/// closer than `eps`, otherwise it becomes a new representative.
pub(crate) fn greedy_cluster<I>(metric: Metric, samples: I, eps: f64) -> (Vec<StatePoint>, Vec<usize>)
where
    I: IntoIterator<Item = StatePoint>,
{
    let mut reps: Vec<StatePoint> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for p in samples {
        match reps.iter().position(|r| metric.distance(r, &p) < eps) {
            Some(i) => sizes[i] += 1,
            None => {
                reps.push(p);
                sizes.push(1);
            }
        }
    }
    (reps, sizes)
}

/// Samples `π̃(x, t)` on `t0 + k·dt` within `[t0, t1]`, adding the left limit
/// at every jump inside the window, in time order.
pub(crate) fn window_samples(traj: &ImpulsiveTrajectory, t0: f64, t1: f64, dt: f64) -> Result<Vec<(f64, StatePoint)>> {
    let n = math::floor((t1 - t0) / dt + 1e-9) as usize;
    let jumps = traj.jump_times();
    let mut j = jumps.partition_point(|&t| t <= t0);
    let mut out = Vec::with_capacity(n + 1 + jumps.len());
    for k in 0..=n {
        let t = t0 + k as f64 * dt;
        while j < jumps.len() && jumps[j] <= t {
            out.push((jumps[j], traj.left_limit(jumps[j])?));
            j += 1;
        }
        out.push((t, traj.state_at(t)?));
    }
    Ok(out)
}

pub fn estimate_limit_set(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    t0: f64,
    t1: f64,
    dt: f64,
    cluster_eps: f64,
) -> Result<LimitSetEstimate> {
    if !(t0 >= 0.0 && t1 > t0) || !t1.is_finite() {
        return Err(Error::invalid("limit-set window needs 0 ≤ t0 < t1"));
    }
    if !(dt > 0.0) || !(cluster_eps > 0.0) {
        return Err(Error::invalid("dt and cluster_eps must be positive"));
    }
    let traj = sys.build_trajectory(x, t1)?;
    let samples = window_samples(&traj, t0, t1, dt)?;
    let metric = sys.metric();
    let mid = 0.5 * (t0 + t1);
    let first = samples.iter().filter(|(t, _)| *t <= mid).map(|(_, p)| p.clone());
    let second = samples.iter().filter(|(t, _)| *t >= mid).map(|(_, p)| p.clone());
    let (a, _) = greedy_cluster(metric, first, cluster_eps);
    let (b, _) = greedy_cluster(metric, second, cluster_eps);
    let half_window_distance = hausdorff(metric, &a, &b);
    let (points, cluster_sizes) = greedy_cluster(metric, samples.into_iter().map(|(_, p)| p), cluster_eps);
    Ok(LimitSetEstimate {
        points,
        cluster_sizes,
        cluster_eps,
        window: (t0, t1),
        dt,
        half_window_distance,
        converged: half_window_distance <= 2.0 * cluster_eps,
    })
}

/// Clustered samples of the orbit `π̃(x, [0, t1])`.
pub fn orbit_cloud(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    t1: f64,
    dt: f64,
    cluster_eps: f64,
) -> Result<Vec<StatePoint>> {
    let traj = sys.build_trajectory(x, t1)?;
    let samples = window_samples(&traj, 0.0, t1, dt)?;
    Ok(greedy_cluster(sys.metric(), samples.into_iter().map(|(_, p)| p), cluster_eps).0)
}

/// Hausdorff distance between a limit-set estimate of `x` and the clustered
/// orbit of `x` over `[0, t1]`.
pub fn orbit_limit_hausdorff(sys: &ImpulsiveSystem, x: &StatePoint, est: &LimitSetEstimate) -> Result<f64> {
    let orbit = orbit_cloud(sys, x, est.window.1, est.dt, est.cluster_eps)?;
    Ok(hausdorff(sys.metric(), &est.points, &orbit))
}

/// Result of [`positive_invariance_probe`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InvarianceReport {
    /// `max dist(π̃(p, t), cloud)` over representatives `p` off the band.
    pub max_distance: f64,
    pub checked_points: usize,
    pub skipped_in_band: usize,
}

/// Flows every representative outside the band of `M` for each time in
/// `times` and measures how far it lands from the cloud.
pub fn positive_invariance_probe(
    sys: &ImpulsiveSystem,
    est: &LimitSetEstimate,
    times: &[f64],
) -> Result<InvarianceReport> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let metric = sys.metric();
    let mut report = InvarianceReport {
        max_distance: 0.0,
        checked_points: 0,
        skipped_in_band: 0,
    };
    for p in &est.points {
        if sys.in_band(p)? {
            report.skipped_in_band += 1;
            continue;
        }
        report.checked_points += 1;
        let traj = sys.build_trajectory(p, t_max)?;
        for &t in times {
            let d = est.distance_to(metric, &traj.state_at(t)?);
            report.max_distance = report.max_distance.max(d);
        }
    }
    Ok(report)
}

/// A nonempty converged estimate has a representative outside the band of `M`.
/// Vacuously true otherwise.
pub fn has_point_off_surface(sys: &ImpulsiveSystem, est: &LimitSetEstimate) -> Result<bool> {
    if est.is_empty() || !est.converged {
        return Ok(true);
    }
    for p in &est.points {
        if !sys.in_band(p)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impulsive::fixtures::*;

    #[test]
    fn translation_limit_set_is_the_unit_segment() {
        let s1 = translation();
        let est = estimate_limit_set(&s1, &pt(&[0.0, 0.8]), 20.0, 60.0, 0.01, 0.01).unwrap();
        assert!(est.converged);
        let segment: Vec<StatePoint> = (0..=1000).map(|k| pt(&[k as f64 / 1000.0, 0.0])).collect();
        let d = hausdorff(Metric::Euclidean, &est.points, &segment);
        assert!(d <= 0.01, "{d}");
        assert!(has_point_off_surface(&s1, &est).unwrap());
        let inv = positive_invariance_probe(&s1, &est, &[0.1, 0.5, 1.0]).unwrap();
        assert!(inv.max_distance <= 0.02 && inv.checked_points > 0 && inv.skipped_in_band > 0);

        let periodic = estimate_limit_set(&s1, &pt(&[0.0, 0.0]), 20.0, 60.0, 0.01, 0.01).unwrap();
        assert!(periodic.converged);
        assert_eq!(periodic.distance_to(Metric::Euclidean, &pt(&[0.0, 0.0])), 0.0);
        assert!(orbit_limit_hausdorff(&s1, &pt(&[0.0, 0.0]), &periodic).unwrap() <= 0.02);
    }

    #[test]
    fn escaping_motion_does_not_converge() {
        let drift = system("drift", &["x1 + t"], "x1 + 1", &["x1"]);
        let est = estimate_limit_set(&drift, &pt(&[0.0]), 20.0, 60.0, 0.01, 0.01).unwrap();
        assert!(!est.converged);
    }
}
