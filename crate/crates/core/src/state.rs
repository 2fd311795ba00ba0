use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

use crate::error::{Error, Result};
use crate::math;

/// A point of the finite-dimensional state space. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct StatePoint(Vec<f64>);

impl StatePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("state point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(alloc::format!(
                "coordinate x{} is not finite ({})",
                i + 1,
                coords[i]
            )));
        }
        Ok(StatePoint(coords))
    }

    /// Used where finiteness has already been established.
    pub(crate) fn from_finite(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        StatePoint(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.0.iter().map(|c| c * c).sum())
    }
}

impl Index<usize> for StatePoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for StatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Metric on the state space. Only the Euclidean metric ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn distance(&self, a: &StatePoint, b: &StatePoint) -> f64 {
        self.distance_slices(a.coords(), b.coords())
    }

    pub fn distance_slices(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => {
                debug_assert_eq!(a.len(), b.len());
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                math::sqrt(s)
            }
        }
    }

    /// Distance from `p` to the nearest point of `cloud` (`+∞` for an empty cloud).
    pub fn distance_to_set<'a, I>(&self, p: &StatePoint, cloud: I) -> f64
    where
        I: IntoIterator<Item = &'a StatePoint>,
    {
        cloud
            .into_iter()
            .map(|q| self.distance(p, q))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Hausdorff distance between two finite clouds (`+∞` if exactly one is empty).
pub fn hausdorff(metric: Metric, a: &[StatePoint], b: &[StatePoint]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let directed = |from: &[StatePoint], to: &[StatePoint]| {
        from.iter()
            .map(|p| metric.distance_to_set(p, to))
            .fold(0.0_f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}
