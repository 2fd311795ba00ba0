//! Scalar search helpers shared by the hitting-time and recurrence code.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of `f` on `[a, b]`; returns `(argmin, min)`.
/// The endpoints are included as candidates.
pub(crate) fn golden_min<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iters = 0;
    while hi - lo > tol && iters < 200 {
        iters += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    if fa < best.1 {
        best = (a, fa);
    }
    if fb < best.1 {
        best = (b, fb);
    }
    Ok(best)
}

/// Bisection on a sign-changing bracket, finished with one secant step
/// clamped to the final bracket.
pub(crate) fn bisect_root<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(fa * fb <= 0.0);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let mut iters = 0;
    while b - a > tol && iters < 200 {
        iters += 1;
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let t = a - fa * (b - a) / (fb - fa);
    Ok(if t.is_finite() { t.clamp(a, b) } else { 0.5 * (a + b) })
}

/// Uniform sample of the closed ball `B(center, radius)` by rejection.
pub(crate) fn sample_ball<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let u: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return center.iter().zip(&u).map(|(c, v)| c + radius * v).collect();
        }
    }
}
