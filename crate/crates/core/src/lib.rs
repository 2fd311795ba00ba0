//! Impulsive semidynamical systems on finite-dimensional Euclidean spaces.
//!
//! A system couples a continuous semiflow `π(x, t)` with an impulse surface
//! `M = {g = 0}` and an impulse map `I : M → X`. Trajectories follow the flow
//! until they reach `M` at positive time and are then reset through `I`.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised as:
//!
//! - [`expr`]: the expression language used to declare flows, surfaces and maps.
//! - [`semiflow`]: closed-form and ODE-integrated semiflows.
//! - [`impulsive`]: hitting times, impulsive trajectories and hypothesis probes.
//! - [`recurrence`]: limit sets, sequence classes, almost periods, asymptotics.
//! - [`conjugacy`]: comparability checks, construction of `h`, equivariance.
//! - [`sysconfig`]: declarative system specs and the two-system gallery.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod conjugacy;
mod error;
pub mod expr;
pub mod impulsive;
mod math;
pub mod recurrence;
mod search;
pub mod semiflow;
mod state;
pub mod sysconfig;

pub use error::{Error, Result};
pub use state::{hausdorff, Metric, StatePoint};

pub use impulsive::{ImpulsiveSystem, ImpulsiveTrajectory};
pub use semiflow::Semiflow;
