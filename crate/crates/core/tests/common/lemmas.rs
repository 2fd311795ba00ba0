//! Randomised numerical forms of the three convergence lemmas on the gallery
//! systems. Each instance perturbs a start `x` off `M` along a random
//! direction by `r / n` and checks the stated limit at `n ∈ {10, 100, 1000}`.

use impulsive_core::impulsive::jump_times;
use impulsive_core::{ImpulsiveSystem, StatePoint};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const NS: [f64; 3] = [10.0, 100.0, 1000.0];

/// Distances from the limit are at most `K · r / n`; both gallery flows and
/// impulse maps are 1-Lipschitz or better on the sampled region, so `K = 10`
/// leaves room for a jump straddling the comparison time.
pub const K: f64 = 10.0;

#[derive(Debug, Clone, Default)]
pub struct LemmaOutcome {
    pub instances: usize,
    pub failures: Vec<String>,
    /// Largest `d_n · n / r` seen.
    pub worst_ratio: f64,
}

impl LemmaOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.instances > 0
    }

    fn record(&mut self, label: &str, ds: &[f64; 3], r: f64) {
        self.instances += 1;
        for (d, n) in ds.iter().zip(NS) {
            self.worst_ratio = self.worst_ratio.max(d * n / r);
            if *d > K * r / n + 1e-12 {
                self.failures
                    .push(format!("{label}: d = {d:e} at n = {n} exceeds {:e}", K * r / n));
            }
        }
        if !(ds[1] <= ds[0] + 1e-12 && ds[2] <= ds[1] + 1e-12) {
            self.failures.push(format!("{label}: not decreasing {ds:?}"));
        }
    }
}

fn pt(c: [f64; 2]) -> StatePoint {
    StatePoint::from_slice(&c).unwrap()
}

/// A start at least `0.05` in hitting time away from `M`.
fn start(sys: &ImpulsiveSystem, right: bool, rng: &mut ChaCha8Rng) -> StatePoint {
    loop {
        let x = if right {
            let r: f64 = rng.gen_range(0.1..1.5);
            let th: f64 = rng.gen_range(-1.2..1.2);
            pt([r * th.cos(), r * th.sin()])
        } else {
            pt([rng.gen_range(-0.5..1.5), rng.gen_range(-1.0..1.0)])
        };
        let e1 = (-1.0f64).exp();
        let ok = if right {
            let r = x.norm();
            r < 0.9 * e1 || r > 1.1 * e1
        } else {
            (x[0] - 1.0).abs() > 0.05
        };
        if ok && !sys.in_band(&x).unwrap() {
            return x;
        }
    }
}

fn perturbed(x: &StatePoint, dir: [f64; 2], r: f64, n: f64) -> StatePoint {
    pt([x[0] + dir[0] * r / n, x[1] + dir[1] * r / n])
}

fn direction(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    [th.cos(), th.sin()]
}

/// `π̃(x_n, α_n) → x` for `x_n → x` off `M` and `α_n ↓ 0`.
pub fn continuity_at_start(
    left: &ImpulsiveSystem,
    right: &ImpulsiveSystem,
    instances: usize,
    seed: u64,
) -> LemmaOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LemmaOutcome::default();
    for i in 0..instances {
        let (sys, is_right) = if i % 2 == 0 { (left, false) } else { (right, true) };
        let x = start(sys, is_right, &mut rng);
        let dir = direction(&mut rng);
        let r: f64 = rng.gen_range(0.01..0.05);
        let c: f64 = rng.gen_range(0.0..0.1);
        let mut ds = [0.0; 3];
        for (k, n) in NS.iter().enumerate() {
            let xn = perturbed(&x, dir, r, *n);
            ds[k] = sys.distance(&sys.evaluate(&xn, c / n).unwrap(), &x);
        }
        out.record(&format!("{} {x}", sys.name()), &ds, r + 2.0 * c);
    }
    out
}

/// For every `t ≥ 0` some `ε_n → 0` gives `π̃(x_n, t + ε_n) → π̃(x, t)`.
/// Half of the instances put `t` on a jump time of `x`, where `ε_n` waits
/// for the perturbed motion to jump as well.
pub fn continuity_up_to_time_shift(
    left: &ImpulsiveSystem,
    right: &ImpulsiveSystem,
    instances: usize,
    seed: u64,
) -> LemmaOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LemmaOutcome::default();
    let mut i = 0;
    while out.instances < instances {
        let (sys, is_right) = if i % 2 == 0 { (left, false) } else { (right, true) };
        i += 1;
        let x = start(sys, is_right, &mut rng);
        let jumps = jump_times(&sys.build_trajectory(&x, 6.0).unwrap());
        let on_jump = out.instances % 4 < 2 && !jumps.is_empty();
        let t = if on_jump {
            jumps[rng.gen_range(0..jumps.len().min(4))]
        } else {
            let t: f64 = rng.gen_range(0.0..5.0);
            if jumps.iter().any(|j| (t - j).abs() < 0.05) {
                continue;
            }
            t
        };
        let target = sys.evaluate(&x, t).unwrap();
        let dir = direction(&mut rng);
        let r: f64 = rng.gen_range(0.01..0.04);
        let mut ds = [0.0; 3];
        let mut eps_ok = true;
        for (k, n) in NS.iter().enumerate() {
            let xn = perturbed(&x, dir, r, *n);
            let eps = if on_jump {
                let jn = jump_times(&sys.build_trajectory(&xn, t + 1.0).unwrap());
                jn.iter()
                    .copied()
                    .filter(|j| (j - t).abs() <= K * r / n)
                    .map(|j| (j - t).max(0.0))
                    .next()
                    .unwrap_or(0.0)
            } else {
                0.0
            };
            eps_ok &= eps <= K * r / n;
            ds[k] = sys.distance(&sys.evaluate(&xn, t + eps).unwrap(), &target);
        }
        if !eps_ok {
            out.failures.push(format!("{} {x}: ε_n did not shrink", sys.name()));
        }
        out.record(&format!("{} {x} t={t}", sys.name()), &ds, r);
    }
    out
}

/// `π̃(x_n, λ_n) → π̃(x, t)` for `λ_n → t` when `t` avoids the jump times of `x`.
pub fn continuity_off_jumps(
    left: &ImpulsiveSystem,
    right: &ImpulsiveSystem,
    instances: usize,
    seed: u64,
) -> LemmaOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = LemmaOutcome::default();
    let mut i = 0;
    while out.instances < instances {
        let (sys, is_right) = if i % 2 == 0 { (left, false) } else { (right, true) };
        i += 1;
        let x = start(sys, is_right, &mut rng);
        let t: f64 = rng.gen_range(0.0..5.0);
        let jumps = jump_times(&sys.build_trajectory(&x, 6.0).unwrap());
        if jumps.iter().any(|j| (t - j).abs() < 0.05) {
            continue;
        }
        let target = sys.evaluate(&x, t).unwrap();
        let dir = direction(&mut rng);
        let r: f64 = rng.gen_range(0.01..0.04);
        let c: f64 = rng.gen_range(-0.1..0.1);
        let mut ds = [0.0; 3];
        for (k, n) in NS.iter().enumerate() {
            let xn = perturbed(&x, dir, r, *n);
            let lambda = (t + c / n).max(0.0);
            ds[k] = sys.distance(&sys.evaluate(&xn, lambda).unwrap(), &target);
        }
        out.record(&format!("{} {x} t={t}", sys.name()), &ds, r + 2.0 * c.abs());
    }
    out
}
