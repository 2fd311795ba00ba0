//! Weak conjugacy between impulsive systems.
//!
//! The map `h : L̃⁺(x) → L̃⁺(y)` is built pointwise as the limit of
//! `σ̃(y, s_n)` along recurrence times `s_n` of `x` to `q`. A second,
//! independent sequence guards uniqueness of that limit. The verifiers then
//! check equivariance off and on the impulse surface and the comparability
//! notions that tie the two recurrence structures together.

mod build;
mod limit;
mod map;
mod verify;

pub use build::{
    build_h_grid, build_h_point, check_comparability, interleave_divergence, targets_from_limit_set,
    two_sided_round_trip, ComparabilityReport, ConjugacyOptions, Family, FamilyOutcome, HGrid, HPoint, InterleaveProbe,
    RoundTrip, Verdict,
};
pub use limit::{
    check_comparability_in_limit, check_strong_comparability, preimage_uniqueness_probe, AsymptoticReference,
    InLimitReport, LimitClauseC, PreimageReport, StrongReport, PLUS_INFINITY_ONLY,
};
pub use map::{ConjugacyMap, TableEntry};
pub use verify::{
    check_i_homomorphism, verify_equivariance, verify_weak_conjugacy, ClauseA, ClauseEq, ClauseTolerances,
    ConjugacyVerdict, ResidualReport, Witness,
};
