//! Sampled probes: continuity of `φ` near a point and the H2/dwell checks.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::hitting;
use super::ImpulsiveSystem;
use crate::error::{Error, Result};
use crate::search::{bisect_root, sample_ball};
use crate::state::StatePoint;

/// Outcome of [`phi_continuity_probe`](super::phi_continuity_probe).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProbeReport {
    /// `φ` at the centre (after the jump when the centre is in the band).
    pub center_phi: Option<f64>,
    /// Largest `|φ(x_i) − φ(x)|` over samples that hit `M`.
    pub max_spread: f64,
    pub on_m: bool,
    pub radius: f64,
    pub samples: usize,
    /// Samples with no hit inside the horizon; excluded from the spread.
    pub no_hit: usize,
}

/// Outcome of the sampled hypothesis check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HypothesisReport {
    pub surface_samples: usize,
    /// `min |g(I(m))|` over the sampled roots.
    pub min_h2_gap: f64,
    pub h2_margin: f64,
    /// Shortest return time to `M` after an impulse seen within `2·min_dwell`.
    pub min_return_seen: Option<f64>,
    pub min_dwell: f64,
    pub seed: u64,
}

/// `φ` in jump context: a point in the band is first sent through `I`.
fn phi_in_context(sys: &ImpulsiveSystem, p: &[f64], horizon: f64) -> Result<Option<f64>> {
    let start = if sys.surface().g(p)?.abs() <= sys.surface_tol() {
        sys.impulse().apply_slice(p)?
    } else {
        p.to_vec()
    };
    Ok(hitting::scan(sys, &start, horizon, false, false)?.time)
}

pub(super) fn phi_continuity_probe(
    sys: &ImpulsiveSystem,
    x: &StatePoint,
    radius: f64,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<ProbeReport> {
    sys.check_dim(x)?;
    if n < 8 {
        return Err(Error::invalid(format!("the probe needs at least 8 samples, got {n}")));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::invalid(format!(
            "probe radius must be non-negative, got {radius}"
        )));
    }
    if !(horizon > 0.0) {
        return Err(Error::invalid("probe horizon must be positive"));
    }
    let on_m = sys.in_band(x)?;
    let center = phi_in_context(sys, x.coords(), horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_spread: f64 = 0.0;
    let mut no_hit = 0;
    for _ in 0..n {
        let p = sample_ball(&mut rng, x.coords(), radius);
        match (phi_in_context(sys, &p, horizon)?, center) {
            (Some(v), Some(c)) => max_spread = max_spread.max((v - c).abs()),
            (Some(_), None) => max_spread = f64::INFINITY,
            (None, _) => no_hit += 1,
        }
    }
    Ok(ProbeReport {
        center_phi: center,
        max_spread,
        on_m,
        radius,
        samples: n,
        no_hit,
    })
}

/// Roots of `g` found by bisecting random segments of the sampling box.
fn sample_surface(sys: &ImpulsiveSystem, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let (lo, hi) = sys.surface().region();
    let g = |p: &[f64]| sys.surface().g(p);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect() };
    let mut roots = Vec::with_capacity(n);
    for _ in 0..1000 * n.max(1) {
        if roots.len() == n {
            break;
        }
        let a = draw(rng);
        let b = draw(rng);
        let (Ok(ga), Ok(gb)) = (g(&a), g(&b)) else {
            continue;
        };
        if ga * gb >= 0.0 {
            continue;
        }
        let at = |u: f64| -> Vec<f64> { a.iter().zip(&b).map(|(p, q)| p + u * (q - p)).collect() };
        let Ok(u) = bisect_root(|u| g(&at(u)), 0.0, 1.0, ga, gb, 1e-15) else {
            continue;
        };
        let m = at(u);
        if matches!(g(&m), Ok(v) if v.abs() <= sys.surface_tol()) {
            roots.push(m);
        }
    }
    if roots.len() < n {
        return Err(Error::SurfaceSampling {
            found: roots.len(),
            wanted: n,
        });
    }
    Ok(roots)
}

pub(super) fn check_hypotheses(sys: &ImpulsiveSystem, n: usize, seed: u64) -> Result<HypothesisReport> {
    if n == 0 {
        return Err(Error::invalid("need at least one surface sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots = sample_surface(sys, n, &mut rng)?;
    let tol = sys.tolerances();
    let mut min_gap = f64::INFINITY;
    let mut min_return: Option<f64> = None;
    for m in roots {
        let image = sys.impulse().apply_slice(&m)?;
        let gap = sys.surface().g(&image)?.abs();
        if !(gap > tol.h2_margin) {
            return Err(Error::H2Violation {
                point: StatePoint::from_finite(m),
                image: StatePoint::new(image)?,
                g: gap,
            });
        }
        min_gap = min_gap.min(gap);
        let back = hitting::scan(sys, &image, 2.0 * sys.min_dwell(), false, false)?.time;
        if let Some(s) = back {
            if s < sys.min_dwell() {
                return Err(Error::DwellViolation {
                    point: StatePoint::from_finite(m),
                    dwell: s,
                });
            }
            min_return = Some(min_return.map_or(s, |r: f64| r.min(s)));
        }
    }
    Ok(HypothesisReport {
        surface_samples: n,
        min_h2_gap: min_gap,
        h2_margin: tol.h2_margin,
        min_return_seen: min_return,
        min_dwell: sys.min_dwell(),
        seed,
    })
}
