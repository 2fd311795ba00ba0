//! Continuous semiflows `π(x, t)` on `ℝ^d`.

mod integrator;

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{eval_all, Expr};
use crate::state::{Metric, StatePoint};

pub use integrator::IntegratorParams;

#[derive(Debug, Clone, PartialEq)]
pub enum FlowKind {
    /// `π(x, t)` given coordinate-wise in terms of `x1..xd` and `t`.
    ClosedForm(Vec<Expr>),
    /// Autonomous vector field integrated numerically.
    Ode { field: Vec<Expr>, params: IntegratorParams },
}

/// A continuous semiflow. Immutable once built and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Semiflow {
    dimension: usize,
    kind: FlowKind,
}

impl Semiflow {
    pub fn closed_form(dimension: usize, exprs: Vec<Expr>) -> Result<Self> {
        check_arity(dimension, &exprs, "closed-form flow")?;
        Ok(Semiflow {
            dimension,
            kind: FlowKind::ClosedForm(exprs),
        })
    }

    pub fn ode(dimension: usize, field: Vec<Expr>, params: IntegratorParams) -> Result<Self> {
        check_arity(dimension, &field, "vector field")?;
        if field.iter().any(Expr::uses_time) {
            return Err(Error::invalid("ODE vector fields must be autonomous (no `t`)"));
        }
        params.validate()?;
        Ok(Semiflow {
            dimension,
            kind: FlowKind::Ode { field, params },
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> &FlowKind {
        &self.kind
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, FlowKind::ClosedForm(_))
    }

    /// Accuracy scale of a single evaluation.
    pub fn flow_tol(&self) -> f64 {
        match &self.kind {
            FlowKind::ClosedForm(_) => 1e-12,
            FlowKind::Ode { params, .. } => (1e4 * params.abs_tol()).max(1e-9),
        }
    }

    /// `π(x, t)`.
    pub fn evaluate(&self, x: &StatePoint, t: f64) -> Result<StatePoint> {
        if x.dim() != self.dimension {
            return Err(Error::invalid(format!(
                "point has dimension {}, flow has {}",
                x.dim(),
                self.dimension
            )));
        }
        self.advance(x.coords(), t).map(StatePoint::from_finite)
    }

    pub(crate) fn advance(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!(
                "flow time must be finite and non-negative, got {t}"
            )));
        }
        match &self.kind {
            FlowKind::ClosedForm(exprs) => {
                let mut out = Vec::with_capacity(self.dimension);
                eval_all(exprs, x, t, &mut out).map_err(|e| Error::IntegrationDiverged {
                    t,
                    reason: format!("{e}"),
                })?;
                Ok(out)
            }
            FlowKind::Ode { field, params } => integrator::integrate(field, params, x, t),
        }
    }

    /// `ρ(π(π(x, t), s), π(x, t + s))`.
    pub fn semigroup_residual(&self, metric: Metric, x: &StatePoint, t: f64, s: f64) -> Result<f64> {
        let two_step = self.evaluate(&self.evaluate(x, t)?, s)?;
        let one_step = self.evaluate(x, t + s)?;
        Ok(metric.distance(&two_step, &one_step))
    }
}

fn check_arity(dimension: usize, exprs: &[Expr], what: &str) -> Result<()> {
    if dimension == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if exprs.len() != dimension {
        return Err(Error::invalid(format!(
            "{what} has {} components, dimension is {dimension}",
            exprs.len()
        )));
    }
    if let Some(e) = exprs.iter().find(|e| e.max_coord() > dimension) {
        return Err(Error::UnboundVariable {
            name: format!("x{}", e.max_coord()),
        });
    }
    Ok(())
}

/// `π(x, t)`; see [`Semiflow::evaluate`].
pub fn evaluate_flow(flow: &Semiflow, x: &StatePoint, t: f64) -> Result<StatePoint> {
    flow.evaluate(x, t)
}

/// Semigroup defect under the Euclidean metric.
pub fn semigroup_residual(flow: &Semiflow, x: &StatePoint, t: f64, s: f64) -> Result<f64> {
    if t < 0.0 || s < 0.0 {
        return Err(Error::Domain("semigroup times must be non-negative".into()));
    }
    flow.semigroup_residual(Metric::Euclidean, x, t, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse_expression(s, src.len()).unwrap()).collect()
    }

    fn translation() -> Semiflow {
        Semiflow::closed_form(2, exprs(&["x1 + t", "x2"])).unwrap()
    }

    fn radial() -> Semiflow {
        Semiflow::closed_form(2, exprs(&["x1*exp(-t)", "x2*exp(-t)"])).unwrap()
    }

    fn radial_ode() -> Semiflow {
        Semiflow::ode(2, exprs(&["-x1", "-x2"]), IntegratorParams::default()).unwrap()
    }

    fn pt(v: &[f64]) -> StatePoint {
        StatePoint::from_slice(v).unwrap()
    }

    #[test]
    fn translation_example() {
        let y = translation().evaluate(&pt(&[0.25, 0.7]), 0.5).unwrap();
        assert_eq!(y, pt(&[0.75, 0.7]));
    }

    #[test]
    fn radial_example() {
        let y = radial().evaluate(&pt(&[1.0, 0.0]), 1.0).unwrap();
        assert!((y[0] - 0.3678794412).abs() < 1e-10);
        assert_eq!(y[1], 0.0);
    }

    #[test]
    fn identity_at_time_zero() {
        for f in [translation(), radial(), radial_ode()] {
            let x = pt(&[0.3, -1.7]);
            assert_eq!(f.evaluate(&x, 0.0).unwrap(), x);
        }
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert!(matches!(
            translation().evaluate(&pt(&[0.0, 0.0]), -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn non_finite_closed_form_result_diverges() {
        let f = Semiflow::closed_form(1, exprs(&["x1 * exp(1000 * t)"])).unwrap();
        assert!(matches!(
            f.evaluate(&pt(&[1.0]), 10.0),
            Err(Error::IntegrationDiverged { .. })
        ));
    }

    #[test]
    fn rejects_time_dependent_vector_field() {
        assert!(Semiflow::ode(1, exprs(&["t"]), IntegratorParams::default()).is_err());
        assert!(Semiflow::closed_form(2, exprs(&["x1"])).is_err());
    }

    #[test]
    fn semigroup_residuals() {
        let x = pt(&[0.2, 3.0]);
        assert_eq!(semigroup_residual(&translation(), &x, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            semigroup_residual(&translation(), &pt(&[0.5, 1.0]), 1.5, 2.25).unwrap(),
            0.0
        );
        let r = semigroup_residual(&radial_ode(), &pt(&[1.0, 0.0]), 0.5, 0.5).unwrap();
        assert!(r <= 1e-9, "residual {r}");
        // Independent check against the closed-form twin.
        let y = radial_ode().evaluate(&pt(&[1.0, 0.0]), 1.0).unwrap();
        assert!((y[0] - libm::exp(-1.0)).abs() <= 1e-9);
    }

    #[test]
    fn random_semigroup_residuals_within_flow_tol() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for f in [translation(), radial(), radial_ode()] {
            let n = if f.is_closed_form() { 1000 } else { 200 };
            for _ in 0..n {
                let x = pt(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                let t = rng.gen_range(0.0..10.0);
                let s = rng.gen_range(0.0..10.0);
                let r = f.semigroup_residual(Metric::Euclidean, &x, t, s).unwrap();
                assert!(r <= 10.0 * f.flow_tol(), "{x} {t} {s}: {r}");
            }
        }
    }

    #[test]
    fn ode_agrees_with_closed_form_twin() {
        let (cf, ode) = (radial(), radial_ode());
        let x = pt(&[1.5, -0.4]);
        let mut t = 0.0;
        while t <= 20.0 {
            let d = Metric::Euclidean.distance(&cf.evaluate(&x, t).unwrap(), &ode.evaluate(&x, t).unwrap());
            assert!(d <= 1e-8, "t={t}: {d}");
            t += 0.5;
        }
        let tr_ode = Semiflow::ode(2, exprs(&["1", "0"]), IntegratorParams::default()).unwrap();
        let d = Metric::Euclidean.distance(
            &translation().evaluate(&x, 20.0).unwrap(),
            &tr_ode.evaluate(&x, 20.0).unwrap(),
        );
        assert!(d <= 1e-8);
    }
}
