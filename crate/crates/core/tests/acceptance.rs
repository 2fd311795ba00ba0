//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p impulsive-core --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::lemmas::{continuity_at_start, continuity_off_jumps, continuity_up_to_time_shift};
use common::{dist, hausdorff_to_unit_segment, left_motion, pt, right_motion};
use impulsive_core::conjugacy::{
    build_h_grid, check_comparability_in_limit, check_i_homomorphism, interleave_divergence, preimage_uniqueness_probe,
    two_sided_round_trip, verify_weak_conjugacy, AsymptoticReference, ClauseTolerances, ConjugacyOptions,
    FamilyOutcome, Verdict,
};
use impulsive_core::impulsive::jump_times;
use impulsive_core::recurrence::{
    almost_period_search, asymptotic_match, detect_recurrence_type, estimate_limit_set, positive_invariance_probe,
    AlmostPeriodOutcome, RecurrenceParams, Reparametrization,
};
use impulsive_core::sysconfig::{gallery_pair, gallery_pair_ode, GalleryPair};
use impulsive_core::{Result, StatePoint};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn set_a() -> Vec<StatePoint> {
    (0..=20).map(|k| pt(&[k as f64 * 0.05, 0.0])).collect()
}

fn t_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 * 0.25).collect()
}

fn criterion_1(p: &GalleryPair) -> Result<Outcome> {
    let start = Instant::now();
    let v = verify_weak_conjugacy(
        &p.h,
        &set_a(),
        &p.left,
        &p.right,
        &t_grid(),
        ClauseTolerances::new(1e-9),
    )?;
    let secs = start.elapsed().as_secs_f64();
    let max = v.clause_b.max_residual.max(v.clause_c.max_residual);
    outcome(
        v.pass && max <= 1e-9 && secs < 5.0,
        format!(
            "clauses a/b/c = {}/{}/{}, max residual {max:.3e}, {secs:.2} s",
            v.clause_a.pass, v.clause_b.pass, v.clause_c.pass
        ),
    )
}

fn criterion_2(p: &GalleryPair) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let a = k as f64 / 100.0;
        let phi = p.left.hitting_time(&pt(&[a, 0.5]), 10.0)?.unwrap_or(f64::INFINITY);
        worst = worst.max((phi - (1.0 - a)).abs());
    }
    let phi2 = p.right.hitting_time(&pt(&[3.0, 4.0]), 10.0)?.unwrap_or(f64::INFINITY);
    let err2 = (phi2 - (1.0 + 5f64.ln())).abs();
    outcome(
        worst <= 1e-12 && err2 <= 1e-10,
        format!("system 1 max |φ - (1-a)| = {worst:.3e}, system 2 |φ - (1 + ln 5)| = {err2:.3e}"),
    )
}

fn criterion_3(p: &GalleryPair) -> Result<Outcome> {
    let tl = p.left.build_trajectory(&pt(&[0.0, 0.8]), 30.0)?;
    let tr = p.right.build_trajectory(&pt(&[0.8, 0.6]), 30.0)?;
    let mut state_err: f64 = 0.0;
    for k in 0..=30_000 {
        let t = k as f64 * 1e-3;
        state_err = state_err
            .max(dist(tl.state_at(t)?.coords(), &left_motion(0.0, 0.8, t).0))
            .max(dist(tr.state_at(t)?.coords(), &right_motion(0.8, 0.6, t).0));
    }
    let mut jump_err: f64 = 0.0;
    let mut counts_match = true;
    for (sim, oracle) in [
        (jump_times(&tl), left_motion(0.0, 0.8, 30.0).1),
        (jump_times(&tr), right_motion(0.8, 0.6, 30.0).1),
    ] {
        counts_match &= sim.len() == oracle.len();
        for (a, b) in sim.iter().zip(&oracle) {
            jump_err = jump_err.max((a - b).abs());
        }
    }
    outcome(
        counts_match && state_err <= 1e-10 && jump_err <= 1e-11,
        format!("max state error {state_err:.3e}, max jump-time error {jump_err:.3e}"),
    )
}

fn criterion_4(p: &GalleryPair) -> Result<Outcome> {
    let est = estimate_limit_set(&p.left, &pt(&[0.0, 0.8]), 20.0, 60.0, 0.01, 0.01)?;
    let h = hausdorff_to_unit_segment(&est.points);
    let inv = positive_invariance_probe(&p.left, &est, &[0.1, 0.5, 1.0])?;
    outcome(
        h <= 0.01 && est.converged && inv.max_distance <= 0.02,
        format!(
            "{} representatives, Hausdorff to segment {h:.4}, converged {}, invariance max distance {:.4} ({} points, {} in band skipped)",
            est.points.len(),
            est.converged,
            inv.max_distance,
            inv.checked_points,
            inv.skipped_in_band
        ),
    )
}

fn criterion_5(p: &GalleryPair) -> Result<Outcome> {
    let alphas = RecurrenceParams::default().alpha_samples;
    let mut pass = true;
    let mut notes = Vec::new();
    for (label, sys, x) in [
        ("system 1 (0,0)", &p.left, [0.0, 0.0]),
        ("system 2 (1,0)", &p.right, [1.0, 0.0]),
    ] {
        let x = pt(&x);
        match almost_period_search(sys, &x, 1e-6, 5.0, 20.0, &alphas, 0.01)? {
            AlmostPeriodOutcome::Found(r) => {
                let integer = r.taus.iter().all(|s| (s.tau - s.tau.round()).abs() <= 1e-9);
                let defect = r.taus.iter().map(|s| s.defect).fold(0.0, f64::max);
                pass &= integer && defect <= 1e-9;
                notes.push(format!("{label}: integer τ {integer}, max defect {defect:.1e}"));
            }
            AlmostPeriodOutcome::NotFound { .. } => {
                pass = false;
                notes.push(format!("{label}: no almost period"));
            }
        }
        let kind = detect_recurrence_type(sys, &x, &RecurrenceParams::default())?;
        pass &= kind.periodic.is_some() && kind.poisson_stable;
        notes.push(format!(
            "periodic {:?}, Poisson stable {}",
            kind.periodic, kind.poisson_stable
        ));
    }
    let asym = almost_period_search(&p.left, &pt(&[0.0, 0.8]), 1e-6, 5.0, 20.0, &alphas, 0.01)?;
    let not_found = matches!(asym, AlmostPeriodOutcome::NotFound { .. });
    pass &= not_found;
    notes.push(format!("(0,0.8) not found: {not_found}"));
    outcome(pass, notes.join("; "))
}

fn criterion_6(p: &GalleryPair) -> Result<Outcome> {
    let grid: Vec<StatePoint> = (0..10).map(|k| pt(&[k as f64 / 10.0, 0.0])).collect();
    let x = pt(&[0.0, 0.8]);
    let y = pt(&[1.0, 0.0]);
    let hg = build_h_grid(&p.left, &x, &p.right, &y, &grid, &ConjugacyOptions::default())?;
    let err = hg
        .points
        .iter()
        .map(|hp| dist(hp.h.coords(), &[(-hp.q[0]).exp(), 0.0]))
        .fold(0.0, f64::max);
    let uniq = hg.points.iter().map(|hp| hp.uniqueness_distance).fold(0.0, f64::max);
    // The way back classifies along the translation orbit, whose second
    // coordinate halves per cycle; 45 returns bring the tail below 1e-12.
    let back = ConjugacyOptions {
        count: 45,
        ..ConjugacyOptions::default()
    };
    let rt = two_sided_round_trip(&p.left, &x, &p.right, &y, &grid, &back)?;
    outcome(
        err <= 1e-6 && uniq <= 1e-7 && rt.max_residual <= 1e-6,
        format!(
            "max |h - (e^-s, 0)| {err:.3e}, dual-sequence gap {uniq:.3e}, round trip residual {:.3e}",
            rt.max_residual
        ),
    )
}

fn criterion_7(p: &GalleryPair) -> Result<Outcome> {
    let probe = interleave_divergence(
        &p.left,
        &pt(&[0.0, 0.8]),
        &p.right,
        &pt(&[1.0, 0.0]),
        &pt(&[0.2, 0.0]),
        &pt(&[0.7, 0.0]),
        &ConjugacyOptions::default(),
    )?;
    outcome(
        probe.divergent && probe.defect >= 0.3,
        format!("divergent {}, defect {:.4}", probe.divergent, probe.defect),
    )
}

fn criterion_8(p: &GalleryPair) -> Result<Outcome> {
    let id = Reparametrization::Identity;
    let a = asymptotic_match(&p.left, &pt(&[0.0, 0.8]), &pt(&[0.0, 0.0]), &id, 21.0, 1.0, 0.01)?;
    let err_a = a
        .windows
        .iter()
        .take(21)
        .enumerate()
        .map(|(k, w)| (w.sup - 0.8 * 2f64.powi(-(k as i32))).abs())
        .fold(0.0, f64::max);
    let y = pt(&[0.8, 0.6]);
    let b = asymptotic_match(&p.right, &y, &pt(&[1.0, 0.0]), &id, 21.0, 1.0, 0.01)?;
    let excess_b = b
        .windows
        .iter()
        .take(21)
        .enumerate()
        .map(|(k, w)| w.sup - std::f64::consts::E * 0.6 * (-(k as f64)).exp())
        .fold(f64::NEG_INFINITY, f64::max);

    let opts = ConjugacyOptions {
        n_families: 6,
        ..ConjugacyOptions::default()
    };
    let reference = AsymptoticReference {
        q_tilde: pt(&[0.0, 0.0]),
        g: id.clone(),
    };
    let pipeline = check_comparability_in_limit(&p.left, &pt(&[0.0, 0.8]), &p.right, &y, Some(&reference), &opts)?;
    let fitted = pipeline.clause_c.as_ref().and_then(|c| c.profile.fit_c);
    let decays = pipeline.clause_c.as_ref().is_some_and(|c| {
        c.profile
            .windows
            .iter()
            .enumerate()
            .all(|(k, w)| w.sup <= std::f64::consts::E * 0.6 * (-(k as f64)).exp() + 1e-12)
    });
    outcome(
        a.windows.len() >= 21 && err_a <= 1e-12 && excess_b <= 0.0 && pipeline.pass && decays,
        format!(
            "max |d_k - 0.8·2^-k| {err_a:.3e}; max (d_k - e·0.6·e^-k) {excess_b:.3e}; in-limit pass {}, y profile decays {decays}, fitted C {:?}",
            pipeline.pass, fitted
        ),
    )
}

fn criterion_9(cf: &GalleryPair) -> Result<Outcome> {
    let ode = gallery_pair_ode();
    let mut jump_err: f64 = 0.0;
    let mut counts_match = true;
    for (a, b, x) in [(&cf.left, &ode.left, [0.0, 0.8]), (&cf.right, &ode.right, [0.8, 0.6])] {
        let ja = jump_times(&a.build_trajectory(&pt(&x), 30.0)?);
        let jb = jump_times(&b.build_trajectory(&pt(&x), 30.0)?);
        counts_match &= ja.len() == jb.len();
        for (s, t) in ja.iter().zip(&jb) {
            jump_err = jump_err.max((s - t).abs());
        }
    }
    let v = verify_weak_conjugacy(
        &ode.h,
        &set_a(),
        &ode.left,
        &ode.right,
        &t_grid(),
        ClauseTolerances::new(1e-6),
    )?;
    let max = v.clause_b.max_residual.max(v.clause_c.max_residual);
    outcome(
        counts_match && jump_err <= 1e-6 && v.pass && max <= 1e-6,
        format!(
            "max jump-time gap {jump_err:.3e}, conjugacy pass {}, max residual {max:.3e}",
            v.pass
        ),
    )
}

fn criterion_10(p: &GalleryPair) -> Result<Outcome> {
    let start = Instant::now();
    let runs = [
        ("at start", continuity_at_start(&p.left, &p.right, 100, 31)),
        (
            "up to time shift",
            continuity_up_to_time_shift(&p.left, &p.right, 100, 32),
        ),
        ("off jumps", continuity_off_jumps(&p.left, &p.right, 100, 33)),
    ];
    let secs = start.elapsed().as_secs_f64();
    let pass = runs.iter().all(|(_, o)| o.passed() && o.instances == 100) && secs < 60.0;
    let detail = runs
        .iter()
        .map(|(n, o)| {
            format!(
                "continuity {n}: {} instances, {} failures, worst ratio {:.2}",
                o.instances,
                o.failures.len(),
                o.worst_ratio
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, format!("{detail}; {secs:.1} s"))
}

fn criterion_11(p: &GalleryPair) -> Result<Outcome> {
    let hom = check_i_homomorphism(
        &p.h,
        &set_a(),
        &p.left,
        &p.right,
        &t_grid(),
        ClauseTolerances::new(1e-9),
    )?;
    let y = pt(&[(-0.3f64).exp(), 0.0]);
    let est = estimate_limit_set(&p.right, &y, 20.0, 60.0, 0.01, 0.01)?;
    let step = est.points.len() as f64 / 50.0;
    let limit: Vec<StatePoint> = (0..50)
        .map(|i| est.points[(i as f64 * step) as usize].clone())
        .collect();
    let domain: Vec<StatePoint> = (0..=1000).map(|k| pt(&[k as f64 / 1000.0, 0.0])).collect();
    let opts = ConjugacyOptions {
        n_families: 30,
        ..ConjugacyOptions::default()
    };
    let x = pt(&[0.3, 0.0]);
    let probe = preimage_uniqueness_probe(
        &p.h,
        &p.right,
        &y,
        &limit,
        &domain,
        1e-3,
        None,
        Some((&p.left, &x, &opts)),
    )?;
    let all_one = probe.multiplicities.len() == 50 && probe.multiplicities.iter().all(|m| *m == 1);
    let (families, convergent, max_defect, verdict) = match &probe.comparability {
        Some(c) => {
            let rep = &c.comparability;
            let convergent = rep
                .families
                .iter()
                .filter(|f| matches!(f.outcome, FamilyOutcome::Converged { .. }))
                .count();
            (rep.families_tested, convergent, rep.max_defect(), rep.verdict)
        }
        None => (0, 0, f64::INFINITY, Verdict::Inconclusive),
    };
    outcome(
        hom.pass && all_one && families == 30 && convergent == 30 && max_defect <= 1e-7 && verdict == Verdict::ComparableEvidence,
        format!(
            "I-homomorphism {}, multiplicities all 1: {all_one}, families {convergent}/{families} convergent, max defect {max_defect:.3e}",
            hom.pass
        ),
    )
}

type Criterion = fn(&GalleryPair) -> Result<Outcome>;

fn main() -> ExitCode {
    let pair = gallery_pair();
    let criteria: [(usize, Criterion); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        let (pass, detail) = match run(&pair) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
