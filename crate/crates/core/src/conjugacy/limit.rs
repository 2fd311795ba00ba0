//! Strong comparability, comparability in limit and the preimage probe.

use alloc::vec::Vec;

use super::build::{
    h_grid_on, h_point, run_families, spread_pick, ComparabilityReport, ConjugacyOptions, HPoint, Pair, Verdict,
};
use super::map::{grid_spacing, ConjugacyMap};
use crate::error::{Error, PreimageWitness, Result};
use crate::impulsive::ImpulsiveSystem;
use crate::recurrence::{
    almost_period_search, asymptotic_match, estimate_limit_set, greedy_cluster, orbit_cloud, Classification,
    DecayProfile, Reparametrization,
};
use crate::state::StatePoint;

/// Only the `+∞` sequence classes are exercised; classes with bounded times
/// are outside the checks.
pub const PLUS_INFINITY_ONLY: &str = "only divergent (+∞) recurrence sequences are tested";

/// An asymptotic reference `q̃ ∈ P_x` with its reparametrization.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReference {
    pub q_tilde: StatePoint,
    pub g: Reparametrization,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LimitClauseC {
    pub h_q_tilde: HPoint,
    /// Largest final-entry distance `ρ(σ̃(y, t_n), σ̃(h(q̃), g(t_n)))` over families.
    pub family_tail_max: f64,
    /// Windowed profile of `σ̃(y, t)` against `σ̃(h(q̃), g(t))`.
    pub profile: DecayProfile,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InLimitReport {
    pub comparability: ComparabilityReport,
    pub clause_c: Option<LimitClauseC>,
    pub pass: bool,
    pub note: &'static str,
}

/// Tolerance for the final family entries and the profile tail in clause (c).
const LIMIT_DECAY_TOL: f64 = 1e-6;

/// `𝓛_x^{+∞} ⊂ 𝓛_y^{+∞}` on targets drawn from `L̃⁺(x)`. With an asymptotic
/// reference, additionally checks that `σ̃(y, t)` approaches `σ̃(h(q̃), g(t))`.
pub fn check_comparability_in_limit(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    reference: Option<&AsymptoticReference>,
    opts: &ConjugacyOptions,
) -> Result<InLimitReport> {
    let est = estimate_limit_set(sys_x, x, opts.t0, opts.t1, opts.recurrence.dt, opts.cluster_eps)?;
    let targets = spread_pick(est.points, opts.n_families);
    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    let comparability = run_families(&pair, &targets, opts)?;
    let mut pass = comparability.verdict == Verdict::ComparableEvidence;

    let clause_c = match reference {
        Some(r) if pass => {
            let c = limit_clause_c(&pair, y, r, &comparability, opts)?;
            pass = c.pass;
            Some(c)
        }
        _ => None,
    };
    Ok(InLimitReport {
        comparability,
        clause_c,
        pass,
        note: PLUS_INFINITY_ONLY,
    })
}

fn limit_clause_c(
    pair: &Pair<'_>,
    y: &StatePoint,
    r: &AsymptoticReference,
    comparability: &ComparabilityReport,
    opts: &ConjugacyOptions,
) -> Result<LimitClauseC> {
    let sys_y = pair.sys_y;
    let hq = h_point(pair, &r.q_tilde, opts)?;
    let t_end = opts.horizon;
    let t_ref = sys_y.build_trajectory(&hq.h, r.g.eval(t_end)?)?;
    let mut tail_max: f64 = 0.0;
    for f in &comparability.families {
        if let super::build::FamilyOutcome::Converged { times, .. } = &f.outcome {
            let t = times.last();
            let d = sys_y.distance(&pair.ty.state_at(t)?, &t_ref.state_at(r.g.eval(t)?)?);
            tail_max = tail_max.max(d);
        }
    }
    let profile = asymptotic_match(sys_y, y, &hq.h, &r.g, t_end, 1.0, opts.recurrence.dt)?;
    let pass = tail_max <= LIMIT_DECAY_TOL && profile.decays_below(LIMIT_DECAY_TOL, 3);
    Ok(LimitClauseC {
        h_q_tilde: hq,
        family_tail_max: tail_max,
        profile,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StrongReport {
    /// Precondition: `x` outside the band of `M_X`.
    pub x_off_surface: bool,
    /// Precondition: `x` detected almost periodic at `ap_eps`.
    pub x_almost_periodic: bool,
    /// Limit of `σ̃(y, s_n)` along self-return times `s_n` of `x`, if it converged.
    pub self_return_limit: Option<StatePoint>,
    pub self_return_defect: f64,
    /// `ρ(limit, y)`.
    pub self_return_distance: Option<f64>,
    pub self_return_pass: bool,
    pub in_limit: InLimitReport,
    /// `ρ(h(x), y)` for `h` built over the orbit closure of `x`.
    pub h_of_x_distance: Option<f64>,
    pub pass: bool,
    pub note: &'static str,
}

/// Strong comparability: self-return times of `x` must return `y` to `y`,
/// `y` must be comparable in limit with `x`, and the `h` built over the orbit
/// closure of `x` must send `x` to `y` within `tol`.
#[allow(clippy::too_many_arguments)]
pub fn check_strong_comparability(
    sys_x: &ImpulsiveSystem,
    x: &StatePoint,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    ap_eps: f64,
    h_grid_points: usize,
    tol: f64,
    opts: &ConjugacyOptions,
) -> Result<StrongReport> {
    let x_off_surface = !sys_x.in_band(x)?;
    let ap = almost_period_search(sys_x, x, ap_eps, 5.0, 20.0, &[0.0, 2.5, 5.0], opts.recurrence.dt)?;
    let x_almost_periodic = ap.report().is_some();

    let pair = Pair::new(sys_x, x, sys_y, y, opts)?;
    let (self_return_limit, self_return_defect) = match pair.times(x, opts.count, &opts.recurrence) {
        Ok(times) => match pair.image(&times)? {
            Classification::Element(e) => (Some(e.observed_limit), e.cauchy_defect),
            Classification::Divergent { defect, .. } => (None, defect),
        },
        Err(Error::NotRecurrent { .. }) => (None, f64::INFINITY),
        Err(e) => return Err(e),
    };
    let self_return_distance = self_return_limit.as_ref().map(|p| sys_y.distance(p, y));
    let self_return_pass = self_return_distance.is_some_and(|d| d <= tol);
    let in_limit = check_comparability_in_limit(sys_x, x, sys_y, y, None, opts)?;

    let mut h_of_x_distance = None;
    if x_off_surface && x_almost_periodic && self_return_pass && in_limit.pass {
        let cloud = orbit_cloud(sys_x, x, opts.t1, opts.recurrence.dt, opts.cluster_eps)?;
        let mut grid = spread_pick(cloud, h_grid_points.max(1));
        if !grid.contains(x) {
            grid.insert(0, x.clone());
        }
        let built = h_grid_on(&pair, &grid, opts)?;
        h_of_x_distance = Some(sys_y.distance(&built.map.apply(x)?, y));
    }
    let pass = x_off_surface
        && x_almost_periodic
        && self_return_pass
        && in_limit.pass
        && h_of_x_distance.is_some_and(|d| d <= tol);
    Ok(StrongReport {
        x_off_surface,
        x_almost_periodic,
        self_return_limit,
        self_return_defect,
        self_return_distance,
        self_return_pass,
        in_limit,
        h_of_x_distance,
        pass,
        note: PLUS_INFINITY_ONLY,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PreimageReport {
    pub targets: usize,
    /// Number of separated preimage groups per target.
    pub multiplicities: Vec<usize>,
    pub max_multiplicity: usize,
    /// Targets without any domain sample mapping near them.
    pub unmatched: usize,
    /// True when the limit-set sample was empty.
    pub inconclusive: bool,
    pub orbit_bounded: Option<bool>,
    /// `x` comparable in limit with `y`, i.e. `𝓛_y^{+∞} ⊂ 𝓛_x^{+∞}`.
    pub comparability: Option<InLimitReport>,
}

/// Orbit samples with norm above this count as unbounded.
const ORBIT_BOUND: f64 = 1e6;

/// For each limit point `q` of `y`, groups the domain samples `p` with
/// `ρ(h(p), q) ≤ tol` into clusters of radius `domain_sep`. Any target with
/// two or more groups fails with [`Error::MultiplePreimages`]. Otherwise, if
/// `x` is supplied and its sampled orbit is bounded, checks that `x` is
/// comparable in limit with `y`.
#[allow(clippy::too_many_arguments)]
pub fn preimage_uniqueness_probe(
    h: &ConjugacyMap,
    sys_y: &ImpulsiveSystem,
    y: &StatePoint,
    limit_samples: &[StatePoint],
    domain: &[StatePoint],
    tol: f64,
    domain_sep: Option<f64>,
    comparability: Option<(&ImpulsiveSystem, &StatePoint, &ConjugacyOptions)>,
) -> Result<PreimageReport> {
    let images = domain.iter().map(|p| h.apply(p)).collect::<Result<Vec<_>>>()?;
    let metric_y = sys_y.metric();
    let metric_x = crate::state::Metric::Euclidean;
    let sep = domain_sep.unwrap_or_else(|| 10.0 * grid_spacing(metric_x, domain));
    let mut multiplicities = Vec::with_capacity(limit_samples.len());
    let mut witnesses = Vec::new();
    for q in limit_samples {
        let pre: Vec<StatePoint> = domain
            .iter()
            .zip(&images)
            .filter(|(_, hp)| metric_y.distance(hp, q) <= tol)
            .map(|(p, _)| p.clone())
            .collect();
        let (groups, _) = greedy_cluster(metric_x, pre.iter().cloned(), sep.max(f64::MIN_POSITIVE));
        multiplicities.push(groups.len());
        if groups.len() > 1 {
            witnesses.push(PreimageWitness {
                target: q.clone(),
                preimages: groups,
            });
        }
    }
    if !witnesses.is_empty() {
        return Err(Error::MultiplePreimages { witnesses });
    }
    let mut report = PreimageReport {
        targets: limit_samples.len(),
        max_multiplicity: multiplicities.iter().copied().max().unwrap_or(0),
        unmatched: multiplicities.iter().filter(|m| **m == 0).count(),
        multiplicities,
        inconclusive: limit_samples.is_empty(),
        orbit_bounded: None,
        comparability: None,
    };
    if let (Some((sys_x, x, opts)), false) = (comparability, report.inconclusive) {
        let orbit = orbit_cloud(sys_x, x, opts.t1, opts.recurrence.dt, opts.cluster_eps)?;
        let bounded = orbit.iter().all(|p| p.norm() <= ORBIT_BOUND);
        report.orbit_bounded = Some(bounded);
        if bounded {
            report.comparability = Some(check_comparability_in_limit(sys_y, y, sys_x, x, None, opts)?);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impulsive::fixtures::{exprs, pt, radial, system, translation};

    fn systems() -> (ImpulsiveSystem, ImpulsiveSystem) {
        (
            translation().into_checked(32, 1).unwrap(),
            radial().into_checked(32, 1).unwrap(),
        )
    }

    #[test]
    fn strong_comparability_examples() {
        let (sx, sy) = systems();
        let opts = ConjugacyOptions {
            n_families: 4,
            ..ConjugacyOptions::default()
        };
        let x = pt(&[0.0, 0.0]);
        let rep = check_strong_comparability(&sx, &x, &sy, &pt(&[1.0, 0.0]), 1e-6, 8, 1e-6, &opts).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.h_of_x_distance.unwrap() <= 1e-6);

        let rep = check_strong_comparability(&sx, &x, &sy, &pt(&[0.8, 0.6]), 1e-6, 8, 1e-6, &opts).unwrap();
        assert!(!rep.pass);
        let d = rep.self_return_distance.unwrap();
        assert!((d - libm::sqrt(0.4)).abs() < 1e-6, "{d}");

        let same =
            check_strong_comparability(&sx, &pt(&[0.2, 0.0]), &sx, &pt(&[0.2, 0.0]), 1e-6, 8, 1e-6, &opts).unwrap();
        assert!(same.pass);
    }

    #[test]
    fn comparability_in_limit_with_asymptotic_reference() {
        let (sx, sy) = systems();
        let opts = ConjugacyOptions {
            n_families: 4,
            ..ConjugacyOptions::default()
        };
        let reference = AsymptoticReference {
            q_tilde: pt(&[0.0, 0.0]),
            g: Reparametrization::Identity,
        };
        let rep = check_comparability_in_limit(&sx, &pt(&[0.0, 0.8]), &sy, &pt(&[0.8, 0.6]), Some(&reference), &opts)
            .unwrap();
        assert!(rep.pass, "{rep:?}");
        let c = rep.clause_c.unwrap();
        assert!(sy.distance(&c.h_q_tilde.h, &pt(&[1.0, 0.0])) < 1e-8);
        for w in &c.profile.windows {
            let k = w.start;
            let envelope = (0.8 * libm::pow(2.0, -k)).max(core::f64::consts::E * 0.6 * libm::exp(-k));
            assert!(w.sup <= envelope + 1e-12, "window {k}: {} > {envelope}", w.sup);
        }

        let outward = system("outward", &["x1 * exp(t)", "x2 * exp(t)"], "x1 + 1", &["1", "x2"])
            .into_checked(16, 2)
            .unwrap();
        let rep = check_comparability_in_limit(&sx, &pt(&[0.0, 0.8]), &outward, &pt(&[0.8, 0.6]), None, &opts).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.comparability.verdict, Verdict::Counterexample);
    }

    #[test]
    fn preimage_probe_examples() {
        let (sx, sy) = systems();
        let opts = ConjugacyOptions {
            n_families: 4,
            ..ConjugacyOptions::default()
        };
        let y = pt(&[libm::exp(-0.3), 0.0]);
        let est = estimate_limit_set(&sy, &y, 20.0, 60.0, 0.01, 0.01).unwrap();
        let limit = spread_pick(est.points, 50);
        let domain: Vec<StatePoint> = (0..=100).map(|k| pt(&[k as f64 / 100.0, 0.0])).collect();
        let h = ConjugacyMap::closed_form(2, exprs(&["exp(-x1)", "0"], 2)).unwrap();
        let x = pt(&[0.3, 0.0]);
        let rep = preimage_uniqueness_probe(&h, &sy, &y, &limit, &domain, 6e-3, None, Some((&sx, &x, &opts))).unwrap();
        assert_eq!(rep.max_multiplicity, 1);
        assert_eq!(rep.unmatched, 0);
        assert_eq!(rep.orbit_bounded, Some(true));
        assert!(rep.comparability.unwrap().pass);

        let folded = ConjugacyMap::closed_form(2, exprs(&["cos(6.283185307179586 * x1)", "0"], 2)).unwrap();
        let err = preimage_uniqueness_probe(&folded, &sy, &y, &limit, &domain, 6e-3, None, None).unwrap_err();
        assert!(matches!(err, Error::MultiplePreimages { .. }));

        let empty = preimage_uniqueness_probe(&h, &sy, &y, &[], &domain, 6e-3, None, Some((&sx, &x, &opts))).unwrap();
        assert!(empty.inconclusive);
        assert!(empty.comparability.is_none());
    }
}
