//! Fixtures shared by the benchmarks.

use std::f64::consts::FRAC_PI_4;

use ricci_core::solver::{evolve, EvolveOptions, StepperConfig, StopRule};
use ricci_core::{make_initial, FlowState, ScenarioSpec};

/// Sphere band `ρ = π/4` with `n` cells, advanced to `t̃ = t_tilde` so that the
/// solution is no longer constant in σ.
pub fn evolved_band(n: usize, t_tilde: f64) -> FlowState {
    let s0 = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, n)).expect("valid scenario");
    if t_tilde == 0.0 {
        return s0;
    }
    let run = evolve(
        &s0,
        &StepperConfig::implicit(),
        StopRule::TTilde(t_tilde),
        EvolveOptions::every(u64::MAX).keep_states(),
    )
    .expect("run reaches the requested time");
    run.states.last().cloned().expect("final state recorded")
}
