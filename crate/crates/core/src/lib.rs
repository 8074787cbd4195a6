//! Ricci flow on rotationally symmetric cylinders `S¹ × [−ρ, ρ]` whose boundary
//! circles keep their initial geodesic curvature.
//!
//! The metric is written as `e^{2w} g0` over a fixed background
//! `g0 = dσ² + f0(σ)² dθ²`, so the flow reduces to a scalar quasilinear
//! parabolic equation for `w(σ, t̃)` with a nonlinear Robin condition at both
//! ends. The unnormalised flow is integrated directly; the area-normalised flow
//! is recovered from its trace by rescaling. The [`analysis`] module turns
//! traces into verdicts on the long-time behaviour.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod io;
pub mod normalization;
pub mod quadrature;
pub mod scenarios;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{build_base, BaseGeometry, FlowState, Profile, ScalarField};
pub use normalization::{normalize_trace, NormalizedRecord, NormalizedTrace};
pub use scenarios::{make_initial, HypothesisReport, MinLocation, ScenarioSpec};
pub use solver::{evolve, FlowRun, FlowTrace, Scheme, StepperConfig, StopRule, TraceRecord};
