//! Equivariance residuals and the clause-by-clause checks of weak topological
//! conjugacy and of `I`-homomorphisms.

use alloc::vec::Vec;

use super::map::{continuity_modulus, grid_spacing, ConjugacyMap};
use crate::error::Result;
use crate::impulsive::ImpulsiveSystem;
use crate::state::StatePoint;

/// The worst residual seen for one equivariance identity.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Witness {
    pub q: StatePoint,
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ResidualReport {
    /// Samples off the band of `M_X`, checked as `h(π̃(q, t)) = σ̃(h(q), t)`.
    pub eqt1_samples: usize,
    pub eqt1_max: f64,
    pub eqt1_worst: Option<Witness>,
    /// Samples in the band, checked as `h(π̃(I_X(q), t)) = σ̃(h(I_X(q)), t)`.
    pub eqt2_samples: usize,
    pub eqt2_max: f64,
    pub eqt2_worst: Option<Witness>,
    /// Samples with `surface_tol < |g_X(q)| < 10 · surface_tol`.
    pub ambiguous: Vec<StatePoint>,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.eqt1_max.max(self.eqt2_max)
    }
}

/// Evaluates both equivariance identities over `samples × t_grid`, routing each
/// sample by its band membership in `M_X`.
pub fn verify_equivariance(
    h: &ConjugacyMap,
    sys_x: &ImpulsiveSystem,
    sys_y: &ImpulsiveSystem,
    samples: &[StatePoint],
    t_grid: &[f64],
) -> Result<ResidualReport> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let tol_band = sys_x.surface_tol();
    let mut rep = ResidualReport {
        eqt1_samples: 0,
        eqt1_max: 0.0,
        eqt1_worst: None,
        eqt2_samples: 0,
        eqt2_max: 0.0,
        eqt2_worst: None,
        ambiguous: Vec::new(),
    };
    for q in samples {
        let gq = sys_x.g(q)?.abs();
        let on_band = gq <= tol_band;
        if !on_band && gq < 10.0 * tol_band {
            rep.ambiguous.push(q.clone());
        }
        let base = if on_band { sys_x.impulse().apply(q)? } else { q.clone() };
        let tx = sys_x.build_trajectory(&base, t_max)?;
        let ty = sys_y.build_trajectory(&h.apply(&base)?, t_max)?;
        let (max, worst, count) = if on_band {
            (&mut rep.eqt2_max, &mut rep.eqt2_worst, &mut rep.eqt2_samples)
        } else {
            (&mut rep.eqt1_max, &mut rep.eqt1_worst, &mut rep.eqt1_samples)
        };
        *count += 1;
        for &t in t_grid {
            let lhs = h.apply(&tx.state_at(t)?)?;
            let rhs = ty.state_at(t)?;
            let r = sys_y.distance(&lhs, &rhs);
            if r > *max || worst.is_none() {
                *max = max.max(r);
                *worst = Some(Witness {
                    q: q.clone(),
                    t,
                    residual: r,
                });
            }
        }
    }
    Ok(rep)
}

/// Bounds for the finite-sample stand-in of "homeomorphism".
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClauseTolerances {
    /// Equivariance residual bound.
    pub tol: f64,
    /// Distinct samples must have images at least this far apart.
    pub sep_tol: f64,
    /// Upper bound for the continuity moduli of `h` and of its sample inverse.
    pub modulus_bound: f64,
}

impl ClauseTolerances {
    pub fn new(tol: f64) -> Self {
        ClauseTolerances {
            tol,
            sep_tol: 1e-6,
            modulus_bound: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClauseA {
    pub pass: bool,
    /// `None` when injectivity is not part of the clause.
    pub injective: Option<bool>,
    /// Two samples whose images are closer than `sep_tol`.
    pub collision: Option<(StatePoint, StatePoint)>,
    pub modulus: f64,
    pub inverse_modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ClauseEq {
    pub pass: bool,
    pub samples: usize,
    pub max_residual: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConjugacyVerdict {
    pub pass: bool,
    pub clause_a: ClauseA,
    pub clause_b: ClauseEq,
    pub clause_c: ClauseEq,
    pub ambiguous: Vec<StatePoint>,
    pub tolerances: ClauseTolerances,
    /// Samples can only witness failure; a pass is evidence, not proof.
    pub note: &'static str,
}

impl ConjugacyVerdict {
    /// Labels of the failed clauses.
    pub fn failed_clauses(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.clause_a.pass {
            out.push("a");
        }
        if !self.clause_b.pass {
            out.push("b");
        }
        if !self.clause_c.pass {
            out.push("c");
        }
        out
    }
}

const NOTE: &str =
    "finite-sample check: injectivity with margin and finite continuity moduli stand in for the homeomorphism property";

fn clause_eq(samples: usize, max: f64, witness: Option<Witness>, tol: f64) -> ClauseEq {
    ClauseEq {
        pass: max <= tol,
        samples,
        max_residual: max,
        witness,
    }
}

fn verify(
    h: &ConjugacyMap,
    a_samples: &[StatePoint],
    sys_x: &ImpulsiveSystem,
    sys_y: &ImpulsiveSystem,
    t_grid: &[f64],
    tols: ClauseTolerances,
    bijective: bool,
) -> Result<ConjugacyVerdict> {
    sys_x.require_checked()?;
    sys_y.require_checked()?;
    let images = a_samples.iter().map(|q| h.apply(q)).collect::<Result<Vec<_>>>()?;
    let (mx, my) = (sys_x.metric(), sys_y.metric());
    let reach_x = 1.5 * grid_spacing(mx, a_samples);
    let modulus = continuity_modulus(mx, a_samples, &images, reach_x);

    let mut clause_a = ClauseA {
        pass: modulus <= tols.modulus_bound,
        injective: None,
        collision: None,
        modulus,
        inverse_modulus: None,
    };
    if bijective {
        'outer: for i in 0..a_samples.len() {
            for j in i + 1..a_samples.len() {
                if mx.distance(&a_samples[i], &a_samples[j]) > 0.0 && my.distance(&images[i], &images[j]) < tols.sep_tol
                {
                    clause_a.collision = Some((a_samples[i].clone(), a_samples[j].clone()));
                    break 'outer;
                }
            }
        }
        let injective = clause_a.collision.is_none();
        let inverse = if injective {
            continuity_modulus(my, &images, a_samples, 1.5 * grid_spacing(my, &images))
        } else {
            f64::INFINITY
        };
        clause_a.injective = Some(injective);
        clause_a.inverse_modulus = Some(inverse);
        clause_a.pass = clause_a.pass && injective && inverse <= tols.modulus_bound;
    }

    let r = verify_equivariance(h, sys_x, sys_y, a_samples, t_grid)?;
    let clause_b = clause_eq(r.eqt1_samples, r.eqt1_max, r.eqt1_worst, tols.tol);
    let clause_c = clause_eq(r.eqt2_samples, r.eqt2_max, r.eqt2_worst, tols.tol);
    Ok(ConjugacyVerdict {
        pass: clause_a.pass && clause_b.pass && clause_c.pass,
        clause_a,
        clause_b,
        clause_c,
        ambiguous: r.ambiguous,
        tolerances: tols,
        note: NOTE,
    })
}

/// Clauses (a) homeomorphism on samples, (b) equivariance off `M_X`,
/// (c) equivariance through `I_X` on `M_X`. Both systems must have passed
/// the sampled H2 check.
pub fn verify_weak_conjugacy(
    h: &ConjugacyMap,
    a_samples: &[StatePoint],
    sys_x: &ImpulsiveSystem,
    sys_y: &ImpulsiveSystem,
    t_grid: &[f64],
    tols: ClauseTolerances,
) -> Result<ConjugacyVerdict> {
    verify(h, a_samples, sys_x, sys_y, t_grid, tols, true)
}

/// As [`verify_weak_conjugacy`] with clause (a) reduced to a finite
/// continuity modulus of `h`.
pub fn check_i_homomorphism(
    h: &ConjugacyMap,
    samples: &[StatePoint],
    sys_x: &ImpulsiveSystem,
    sys_y: &ImpulsiveSystem,
    t_grid: &[f64],
    tols: ClauseTolerances,
) -> Result<ConjugacyVerdict> {
    verify(h, samples, sys_x, sys_y, t_grid, tols, false)
}
