//! Bakry-Émery curvature and Ricci flow on finite weighted graphs.
//!
//! The curvature `Ric_{n,m}(x)` is the largest `K` with
//! `Γ₂(f)(x) ≥ (1/n)(Δf(x))² + K·Γ(f)(x)` for every `f`. It is computed as
//! the minimal eigenvalue of a Schur-complemented local quadratic form
//! ([`curvature`]) and cross-checked against closed forms for cycles and a
//! small tree ([`closed_forms`]). The flow `∂ₜm = −Ric` and its normalized
//! variant are integrated in [`flow`]; [`analysis`] holds the checks on
//! blow-up times, monotonicity and fixed points, and [`io`] the file formats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calculus;
pub mod closed_forms;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod graph;
pub mod io;

pub use curvature::{ricci, ricci_all, witness, Dimension};
pub use error::{Error, Result};
pub use flow::{estimate_blowup_time, integrate, FlowConfig, FlowOutcome, Trajectory};
pub use graph::{generate, Family, GraphFunction, VertexMeasure, WeightedGraph};
