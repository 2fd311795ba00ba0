use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{eval_all, Expr};
use crate::state::{Metric, StatePoint};

/// One tabulated value `h(q)` with the Cauchy defect of its construction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TableEntry {
    pub q: StatePoint,
    pub h: StatePoint,
    pub defect: f64,
}

/// A map `h : X ⊇ A → Y`, either in closed form or as a table queried by
/// nearest neighbour within a fixed radius.
#[derive(Debug, Clone, PartialEq)]
pub enum ConjugacyMap {
    ClosedForm {
        dim_in: usize,
        exprs: Vec<Expr>,
    },
    Table {
        entries: Vec<TableEntry>,
        query_radius: f64,
    },
}

impl ConjugacyMap {
    pub fn closed_form(dim_in: usize, exprs: Vec<Expr>) -> Result<Self> {
        if exprs.is_empty() {
            return Err(Error::invalid("closed-form map needs at least one component"));
        }
        if let Some(e) = exprs.iter().find(|e| e.uses_time() || e.max_coord() > dim_in) {
            return Err(Error::invalid(format!(
                "map component `{e}` must use only x1..x{dim_in}"
            )));
        }
        Ok(ConjugacyMap::ClosedForm { dim_in, exprs })
    }

    pub fn table(entries: Vec<TableEntry>, query_radius: f64) -> Result<Self> {
        let Some(first) = entries.first() else {
            return Err(Error::invalid("table map has no entries"));
        };
        let (di, dout) = (first.q.dim(), first.h.dim());
        if entries.iter().any(|e| e.q.dim() != di || e.h.dim() != dout) {
            return Err(Error::invalid("table entries have inconsistent dimensions"));
        }
        if !(query_radius >= 0.0) || !query_radius.is_finite() {
            return Err(Error::invalid("query radius must be finite and non-negative"));
        }
        Ok(ConjugacyMap::Table { entries, query_radius })
    }

    /// Table whose query radius is twice the grid spacing, taken as the
    /// largest nearest-neighbour distance among the entries.
    pub fn table_from_grid(entries: Vec<TableEntry>) -> Result<Self> {
        let qs: Vec<StatePoint> = entries.iter().map(|e| e.q.clone()).collect();
        let radius = 2.0 * grid_spacing(Metric::Euclidean, &qs);
        Self::table(entries, radius)
    }

    pub fn is_table(&self) -> bool {
        matches!(self, ConjugacyMap::Table { .. })
    }

    pub fn entries(&self) -> Option<&[TableEntry]> {
        match self {
            ConjugacyMap::Table { entries, .. } => Some(entries),
            ConjugacyMap::ClosedForm { .. } => None,
        }
    }

    /// Tabulated points, if any.
    pub fn domain_samples(&self) -> Vec<StatePoint> {
        self.entries()
            .map(|es| es.iter().map(|e| e.q.clone()).collect())
            .unwrap_or_default()
    }

    /// `h(q)`. Table queries farther than the radius from every entry fail
    /// with [`Error::DomainMiss`]; values are never interpolated.
    pub fn apply(&self, q: &StatePoint) -> Result<StatePoint> {
        match self {
            ConjugacyMap::ClosedForm { dim_in, exprs } => {
                if q.dim() != *dim_in {
                    return Err(Error::invalid(format!(
                        "map expects dimension {dim_in}, got {}",
                        q.dim()
                    )));
                }
                let mut out = Vec::with_capacity(exprs.len());
                eval_all(exprs, q.coords(), 0.0, &mut out)?;
                StatePoint::new(out)
            }
            ConjugacyMap::Table { entries, query_radius } => {
                let mut best = (f64::INFINITY, 0);
                for (i, e) in entries.iter().enumerate() {
                    if e.q.dim() != q.dim() {
                        return Err(Error::invalid("query has the wrong dimension for this table"));
                    }
                    let d = Metric::Euclidean.distance(&e.q, q);
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                if best.0 > *query_radius + 1e-12 {
                    return Err(Error::DomainMiss {
                        point: q.clone(),
                        distance: best.0,
                    });
                }
                Ok(entries[best.1].h.clone())
            }
        }
    }
}

/// Largest nearest-neighbour distance in a sample set (`0` for fewer than two points).
pub(crate) fn grid_spacing(metric: Metric, pts: &[StatePoint]) -> f64 {
    let mut spacing: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let nn = pts
            .iter()
            .enumerate()
            .filter(|(j, q)| *j != i && metric.distance(p, q) > 0.0)
            .map(|(_, q)| metric.distance(p, q))
            .fold(f64::INFINITY, f64::min);
        if nn.is_finite() {
            spacing = spacing.max(nn);
        }
    }
    spacing
}

/// `max ρ(h_i, h_j) / ρ(q_i, q_j)` over pairs with `ρ(q_i, q_j) ≤ reach`.
pub(crate) fn continuity_modulus(metric: Metric, qs: &[StatePoint], hs: &[StatePoint], reach: f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..qs.len() {
        for j in i + 1..qs.len() {
            let dq = metric.distance(&qs[i], &qs[j]);
            if dq > 0.0 && dq <= reach {
                m = m.max(metric.distance(&hs[i], &hs[j]) / dq);
            }
        }
    }
    m
}
