//! Explicit Runge-Kutta steppers for autonomous vector fields.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{eval_all, Expr};
use crate::math;

/// Integration scheme for ODE-backed semiflows.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "method", rename_all = "kebab-case"))]
pub enum IntegratorParams {
    Rk4Fixed {
        step: f64,
    },
    /// Dormand-Prince 5(4) with embedded error control.
    Rk45Adaptive {
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
    },
}

impl Default for IntegratorParams {
    fn default() -> Self {
        IntegratorParams::Rk45Adaptive {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
        }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            IntegratorParams::Rk4Fixed { step } => step > 0.0 && step.is_finite(),
            IntegratorParams::Rk45Adaptive {
                rel_tol,
                abs_tol,
                max_step,
            } => rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0 && max_step.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "integrator parameters must be positive: {self:?}"
            )))
        }
    }

    /// Per-step absolute accuracy the integrator aims for.
    pub fn abs_tol(&self) -> f64 {
        match *self {
            IntegratorParams::Rk4Fixed { step } => step * step * step * step,
            IntegratorParams::Rk45Adaptive { abs_tol, .. } => abs_tol,
        }
    }
}

const MAX_STEPS: usize = 10_000_000;

// Dormand-Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Field<'a> {
    exprs: &'a [Expr],
    scratch: Vec<f64>,
}

impl Field<'_> {
    fn eval(&mut self, y: &[f64], out: &mut [f64], t: f64) -> Result<()> {
        eval_all(self.exprs, y, 0.0, &mut self.scratch).map_err(|e| Error::IntegrationDiverged {
            t,
            reason: format!("{e}"),
        })?;
        out.copy_from_slice(&self.scratch);
        Ok(())
    }
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn diverged(t: f64) -> Error {
    Error::IntegrationDiverged {
        t,
        reason: "non-finite state".into(),
    }
}

/// Integrates `ẏ = f(y)` from `y0` over a duration `span ≥ 0`.
pub(crate) fn integrate(field: &[Expr], params: &IntegratorParams, y0: &[f64], span: f64) -> Result<Vec<f64>> {
    let n = y0.len();
    let mut y = y0.to_vec();
    if span == 0.0 {
        return Ok(y);
    }
    let mut f = Field {
        exprs: field,
        scratch: Vec::with_capacity(n),
    };
    let mut k = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    match *params {
        IntegratorParams::Rk4Fixed { step } => {
            let steps = math::ceil(span / step).max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let [k1, k2, k3, k4, ..] = &mut k;
                f.eval(&y, k1, t)?;
                axpy(&mut tmp, &y, h, &[(0.5, k1)]);
                f.eval(&tmp, k2, t)?;
                axpy(&mut tmp, &y, h, &[(0.5, k2)]);
                f.eval(&tmp, k3, t)?;
                axpy(&mut tmp, &y, h, &[(1.0, k3)]);
                f.eval(&tmp, k4, t)?;
                for i in 0..n {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                t += h;
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(diverged(t));
                }
            }
            Ok(y)
        }
        IntegratorParams::Rk45Adaptive {
            rel_tol,
            abs_tol,
            max_step,
        } => {
            let mut h = max_step.min(span);
            let mut y5 = vec![0.0; n];
            let mut have_k1 = false;
            for _ in 0..MAX_STEPS {
                let remaining = span - t;
                if remaining <= 0.0 {
                    return Ok(y);
                }
                let last = h >= remaining;
                if last {
                    h = remaining;
                }
                let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
                if !have_k1 {
                    f.eval(&y, k1, t)?;
                }
                axpy(&mut tmp, &y, h, &[(A21, k1)]);
                f.eval(&tmp, k2, t)?;
                axpy(&mut tmp, &y, h, &[(A31, k1), (A32, k2)]);
                f.eval(&tmp, k3, t)?;
                axpy(&mut tmp, &y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
                f.eval(&tmp, k4, t)?;
                axpy(&mut tmp, &y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
                f.eval(&tmp, k5, t)?;
                axpy(
                    &mut tmp,
                    &y,
                    h,
                    &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
                );
                f.eval(&tmp, k6, t)?;
                axpy(&mut y5, &y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
                f.eval(&y5, k7, t)?;
                let mut err = 0.0;
                for i in 0..n {
                    let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
                    err += (e / sc) * (e / sc);
                }
                let err = math::sqrt(err / n as f64);
                if !err.is_finite() {
                    if h < 1e-14 * span.max(1.0) {
                        return Err(diverged(t));
                    }
                    h *= 0.1;
                    have_k1 = true;
                    continue;
                }
                if err <= 1.0 {
                    t = if last { span } else { t + h };
                    core::mem::swap(&mut y, &mut y5);
                    if y.iter().any(|v| !v.is_finite()) {
                        return Err(diverged(t));
                    }
                    // FSAL: the last stage is the next first stage.
                    let (head, tail) = k.split_at_mut(6);
                    head[0].copy_from_slice(&tail[0]);
                    have_k1 = true;
                    if last {
                        return Ok(y);
                    }
                    let fac = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * math::pow(err, -0.2)).clamp(0.2, 5.0)
                    };
                    h = (h * fac).min(max_step);
                } else {
                    have_k1 = true;
                    h *= (0.9 * math::pow(err, -0.2)).clamp(0.1, 1.0);
                    if h < 1e-14 * span.max(1.0) {
                        return Err(Error::IntegrationDiverged {
                            t,
                            reason: "step size underflow".into(),
                        });
                    }
                }
            }
            Err(Error::IntegrationDiverged {
                t,
                reason: "step limit exceeded".into(),
            })
        }
    }
}
