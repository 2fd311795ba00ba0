//! Time reparametrizations, windowed asymptotic matching and `P_x` membership.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use super::limit_set::estimate_limit_set;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::impulsive::ImpulsiveSystem;
use crate::math;
use crate::state::StatePoint;

/// A homeomorphism `g : ℝ₊ → ℝ₊` with `g(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Reparametrization {
    Identity,
    /// Piecewise-linear through `(t, g(t))` knots starting at `(0, 0)`,
    /// extended past the last knot with the last slope.
    Table(Vec<(f64, f64)>),
    /// An expression in `t` alone.
    Expression(Expr),
    /// `G_s(t) = t / g⁻¹(s + 1)` on `[0, g⁻¹(s + 1)]` and `g(t) − s` after it.
    Shifted {
        base: Box<Reparametrization>,
        s: f64,
    },
}

impl Reparametrization {
    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 || knots[0] != (0.0, 0.0) {
            return Err(Error::invalid(
                "a table needs at least two knots, the first being (0, 0)",
            ));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::invalid("table knots must increase strictly in both columns"));
        }
        if knots.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(Error::invalid("table knots must be finite"));
        }
        Ok(Reparametrization::Table(knots))
    }

    pub fn expression(e: Expr) -> Result<Self> {
        if e.max_coord() > 0 {
            return Err(Error::invalid("a reparametrization may only use `t`"));
        }
        Ok(Reparametrization::Expression(e))
    }

    pub fn shifted(base: Reparametrization, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::invalid(format!("shift must be non-negative, got {s}")));
        }
        Ok(Reparametrization::Shifted {
            base: Box::new(base),
            s,
        })
    }

    /// `g(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Reparametrization::Identity => Ok(t),
            Reparametrization::Table(k) => {
                let i = k.partition_point(|(a, _)| *a <= t).clamp(1, k.len() - 1);
                let ((a0, b0), (a1, b1)) = (k[i - 1], k[i]);
                Ok(b0 + (t - a0) * (b1 - b0) / (a1 - a0))
            }
            Reparametrization::Expression(e) => Ok(e.eval(&[], t)?),
            Reparametrization::Shifted { base, s } => {
                let c = base.inverse(s + 1.0)?;
                if t <= c {
                    Ok(t / c)
                } else {
                    Ok(base.eval(t)? - s)
                }
            }
        }
    }

    /// `g⁻¹(v)` for `v ≥ 0`, by bracketing and bisection.
    pub fn inverse(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("cannot invert at {v}")));
        }
        if let Reparametrization::Identity = self {
            return Ok(v);
        }
        let mut hi = 1.0f64;
        let mut doublings = 0;
        while self.eval(hi)? < v {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1000 {
                return Err(Error::Domain(format!("reparametrization never reaches {v}")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Checks `g(0) = 0` and strict increase on `grid`.
    pub fn validate(&self, grid: &[f64]) -> Result<()> {
        let g0 = self.eval(0.0)?;
        if g0 != 0.0 {
            return Err(Error::invalid(format!("reparametrization has g(0) = {g0}")));
        }
        let mut prev: Option<(f64, f64)> = None;
        for &t in grid {
            let v = self.eval(t)?;
            if let Some((pt, pv)) = prev {
                if t > pt && !(v > pv) {
                    return Err(Error::invalid(format!(
                        "reparametrization is not increasing near t = {t}"
                    )));
                }
            }
            prev = Some((t, v));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WindowSup {
    pub start: f64,
    pub end: f64,
    pub sup: f64,
}

/// Windowed sup-distance profile `d_k = sup_{t ∈ [kw, (k+1)w)} ρ(π̃(x, t), π̃(p, g(t)))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DecayProfile {
    pub window: f64,
    pub windows: Vec<WindowSup>,
    /// Least-squares fit `d_k ≈ c · exp(−rate · k·window)` over positive `d_k`.
    pub fit_c: Option<f64>,
    pub fit_rate: Option<f64>,
}

impl DecayProfile {
    pub fn sups(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.sup).collect()
    }

    /// Smallest `C` with `d_k ≤ C · exp(−rate · start_k)` for every window.
    pub fn envelope_constant(&self, rate: f64) -> f64 {
        self.windows
            .iter()
            .map(|w| w.sup * math::exp(rate * w.start))
            .fold(0.0, f64::max)
    }

    /// The last `n` windows are all below `tol`.
    pub fn decays_below(&self, tol: f64, n: usize) -> bool {
        let k = self.windows.len();
        k >= n && self.windows[k - n..].iter().all(|w| w.sup <= tol)
    }
}

fn fit_exponential(windows: &[WindowSup]) -> (Option<f64>, Option<f64>) {
    let pts: Vec<(f64, f64)> = windows
        .iter()
        .filter(|w| w.sup > 1e-300)
        .map(|w| (w.start, math::ln(w.sup)))
        .collect();
    if pts.len() < 2 {
        return (None, None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return (None, None);
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    (Some(math::exp(my - slope * mx)), Some(-slope))
}

/// Compares `π̃(x, t)` with `π̃(p, g(t))` window by window on a grid of step
/// `dt`, also sampling the jumps of `x` and the instants just before them.
pub fn asymptotic_match(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    p: &StatePoint,
    g: &Reparametrization,
    horizon: f64,
    window: f64,
    dt: f64,
) -> Result<DecayProfile> {
    if !(window > 0.0) || !(horizon >= window) || !(dt > 0.0) {
        return Err(Error::invalid("need dt > 0 and 0 < window ≤ horizon"));
    }
    let n_win = math::floor(horizon / window + 1e-9) as usize;
    let end = n_win as f64 * window;
    let grid: Vec<f64> = (0..=math::floor(end / dt) as usize).map(|k| k as f64 * dt).collect();
    g.validate(&grid)?;
    let tx = sys.build_trajectory(x, end)?;
    let tp = sys.build_trajectory(p, g.eval(end)?)?;
    let lead = 10.0 * sys.time_tol();
    let jumps = tx.jump_times();
    let metric = sys.metric();
    let dist = |t: f64| -> Result<f64> { Ok(metric.distance(&tx.state_at(t)?, &tp.state_at(g.eval(t)?)?)) };

    let mut windows = Vec::with_capacity(n_win);
    for k in 0..n_win {
        let a = k as f64 * window;
        let b = a + window;
        let mut sup: f64 = 0.0;
        let steps = math::ceil(window / dt - 1e-9) as usize;
        for j in 0..steps {
            let t = a + j as f64 * dt;
            if t < b {
                sup = sup.max(dist(t)?);
            }
        }
        for &tj in jumps.iter().filter(|&&tj| tj >= a && tj < b) {
            sup = sup.max(dist(tj)?);
            if tj - lead >= a {
                sup = sup.max(dist(tj - lead)?);
            }
        }
        windows.push(WindowSup { start: a, end: b, sup });
    }
    let (fit_c, fit_rate) = fit_exponential(&windows);
    Ok(DecayProfile {
        window,
        windows,
        fit_c,
        fit_rate,
    })
}

/// The three conjuncts of `z ∈ P_x`, reported separately.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PxReport {
    pub distance_to_limit_set_of_x: f64,
    pub in_limit_set_of_x: bool,
    pub distance_to_own_limit_set: f64,
    pub poisson_stable: bool,
    pub decays: bool,
    pub profile: DecayProfile,
    pub member: bool,
}

/// `z ∈ L̃⁺(x) ∩ L̃⁺(z)` (cloud distance ≤ `cluster_eps`) and the profile of
/// `x` against `z` under `g` ends below `decay_tol` over its last three windows.
#[allow(clippy::too_many_arguments)]
pub fn p_x_membership(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    z: &StatePoint,
    g: &Reparametrization,
    t0: f64,
    t1: f64,
    dt: f64,
    cluster_eps: f64,
    decay_tol: f64,
) -> Result<PxReport> {
    let metric = sys.metric();
    let lx = estimate_limit_set(sys, x, t0, t1, dt, cluster_eps)?;
    let lz = estimate_limit_set(sys, z, t0, t1, dt, cluster_eps)?;
    let dx = lx.distance_to(metric, z);
    let dz = lz.distance_to(metric, z);
    let profile = asymptotic_match(sys, x, z, g, t1, 1.0, dt)?;
    let decays = profile.decays_below(decay_tol, 3);
    Ok(PxReport {
        distance_to_limit_set_of_x: dx,
        in_limit_set_of_x: dx <= cluster_eps,
        distance_to_own_limit_set: dz,
        poisson_stable: dz <= cluster_eps,
        decays,
        member: dx <= cluster_eps && dz <= cluster_eps && decays,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::impulsive::fixtures::*;

    #[test]
    fn reparametrization_basics() {
        let sq = Reparametrization::expression(parse_expression("t^2 + t", 1).unwrap()).unwrap();
        assert!((sq.inverse(2.0).unwrap() - 1.0).abs() < 1e-12);
        let shifted = Reparametrization::shifted(sq.clone(), 1.0).unwrap();
        // g⁻¹(2) = 1, so G_1 is the identity on [0, 1] and t² + t − 1 after.
        assert_eq!(shifted.eval(0.5).unwrap(), 0.5);
        assert!((shifted.eval(2.0).unwrap() - 5.0).abs() < 1e-12);
        shifted.validate(&[0.0, 0.5, 1.0, 1.5, 3.0]).unwrap();

        let tab = Reparametrization::table(alloc::vec![(0.0, 0.0), (1.0, 2.0), (2.0, 3.0)]).unwrap();
        assert_eq!(tab.eval(0.5).unwrap(), 1.0);
        assert_eq!(tab.eval(4.0).unwrap(), 5.0);
        assert!(Reparametrization::table(alloc::vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        let bad = Reparametrization::expression(parse_expression("t + 1", 1).unwrap()).unwrap();
        assert!(bad.validate(&[0.0, 1.0]).is_err());
        let dec = Reparametrization::expression(parse_expression("sin(t)", 1).unwrap()).unwrap();
        assert!(dec.validate(&[0.0, 1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn translation_profile_halves_each_window() {
        let s1 = translation();
        let prof = asymptotic_match(
            &s1,
            &pt(&[0.0, 0.8]),
            &pt(&[0.0, 0.0]),
            &Reparametrization::Identity,
            20.0,
            1.0,
            0.01,
        )
        .unwrap();
        for (k, w) in prof.windows.iter().enumerate() {
            assert!(
                (w.sup - 0.8 * libm::pow(2.0, -(k as f64))).abs() <= 1e-12,
                "{k}: {}",
                w.sup
            );
        }
        assert!((prof.fit_rate.unwrap() - libm::log(2.0)).abs() < 1e-9);
        let same = asymptotic_match(
            &s1,
            &pt(&[0.2, 0.1]),
            &pt(&[0.2, 0.1]),
            &Reparametrization::Identity,
            5.0,
            1.0,
            0.01,
        )
        .unwrap();
        assert!(same.sups().iter().all(|d| *d == 0.0));
    }

    #[test]
    fn px_membership_of_the_periodic_anchor() {
        let s1 = translation();
        let r = p_x_membership(
            &s1,
            &pt(&[0.0, 0.8]),
            &pt(&[0.0, 0.0]),
            &Reparametrization::Identity,
            20.0,
            40.0,
            0.01,
            0.01,
            1e-6,
        )
        .unwrap();
        assert!(r.in_limit_set_of_x && r.poisson_stable && r.decays && r.member);
    }
}
