//! Time integration of the unnormalised flow in conformal gauge,
//! `w_t = e^{-2w}(Δ₀w − R₀/2) = −R/2`, with the Robin condition
//! `∂w/∂η₀ = k₀(e^w − 1)` that holds the boundary geodesic curvature at `k₀`.

mod trace;
pub mod tridiag;

use std::fmt;
use std::str::FromStr;

pub use trace::{FlowTrace, TraceRecord};

use crate::error::SolverError;
use crate::geometry::{
    area, laplace_base, laplace_into, outward_derivatives, robin_ghosts, robin_ghosts_for, scalar_curvature, BaseGeometry, BoundaryTarget,
    FlowState, Ghosts, ScalarField,
};
use tridiag::solve_twisted;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitHeun,
    ImplicitEuler,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::ExplicitHeun => "explicit_heun",
            Scheme::ImplicitEuler => "implicit_euler",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "explicit_heun" | "explicit" | "heun" => Ok(Scheme::ExplicitHeun),
            "implicit_euler" | "implicit" => Ok(Scheme::ImplicitEuler),
            other => Err(format!("unknown scheme {other:?} (expected explicit_heun or implicit_euler)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fraction of the diffusive stability limit used by the explicit scheme;
    /// also the first step of the implicit scheme.
    pub safety: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Abort threshold for the step size. `None` means `1e-12` times the
    /// stable step of the initial state.
    pub dt_min: Option<f64>,
    /// Implicit scheme: largest allowed change of `w` per step, which sets the
    /// step once the stiff transient is over.
    pub max_dw: f64,
    /// Implicit scheme: largest factor by which the step may grow.
    pub dt_growth: f64,
    /// Optional cap on accepted steps; exceeding it aborts the run.
    pub max_steps: Option<u64>,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            scheme: Scheme::ExplicitHeun,
            safety: 0.25,
            newton_tol: 1e-12,
            newton_max_iter: 30,
            dt_min: None,
            max_dw: 1e-3,
            dt_growth: 1.05,
            max_steps: None,
        }
    }
}

impl StepperConfig {
    pub fn implicit() -> Self {
        StepperConfig { scheme: Scheme::ImplicitEuler, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::BadConfig(m));
        if !(self.safety > 0.0 && self.safety <= 0.5) {
            return bad(format!("safety must lie in (0, 0.5], got {}", self.safety));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("newton tolerance and iteration limit must be positive".into());
        }
        if let Some(d) = self.dt_min {
            if !(d > 0.0) {
                return bad(format!("dt_min must be positive, got {d}"));
            }
        }
        if !(self.max_dw > 0.0) || !(self.dt_growth >= 1.0) {
            return bad("max_dw must be positive and dt_growth at least 1".into());
        }
        Ok(())
    }
}

/// Ghost values for the Robin condition.
pub fn apply_boundary(state: &FlowState) -> Ghosts {
    robin_ghosts(state)
}

/// `w_t` for the given state.
pub fn rhs(state: &FlowState) -> ScalarField {
    let mut out = vec![0.0; state.base().nodes()];
    rhs_into(state.base(), state.w(), state.target(), &mut out);
    ScalarField::from_vec(out)
}

fn rhs_into(base: &BaseGeometry, w: &[f64], target: BoundaryTarget, out: &mut [f64]) {
    laplace_into(base, w, robin_ghosts_for(base, w, target), out);
    for ((o, w), r0) in out.iter_mut().zip(w).zip(base.r0()) {
        *o = (-2.0 * w).exp() * (*o - 0.5 * r0);
    }
}

/// Stable explicit step `safety·h²/(2·max e^{-2w}·(1 + max|f0'/f0|·h))`.
pub fn stable_dt(state: &FlowState, safety: f64) -> f64 {
    let base = state.base();
    let h = base.h();
    let diff = state.w().iter().fold(0.0f64, |m, w| m.max((-2.0 * w).exp()));
    safety * h * h / (2.0 * diff * (1.0 + base.max_abs_log_slope() * h))
}

/// One Heun (explicit trapezoid) step.
pub fn step_explicit(state: &FlowState, dt: f64) -> FlowState {
    let base = state.base();
    let len = base.nodes();
    let w = state.w();
    let mut k1 = vec![0.0; len];
    rhs_into(base, w, state.target(), &mut k1);
    let pred: Vec<f64> = w.iter().zip(&k1).map(|(w, k)| w + dt * k).collect();
    let mut k2 = vec![0.0; len];
    rhs_into(base, &pred, state.target(), &mut k2);
    let next = w.iter().zip(k1.iter().zip(&k2)).map(|(w, (a, b))| w + 0.5 * dt * (a + b)).collect();
    state.successor(next, state.t_tilde() + dt)
}

/// One backward Euler step solved by Newton's method on
/// `x − w − dt·rhs(x) = 0`, with the Robin ghosts differentiated exactly.
pub fn step_implicit(state: &FlowState, dt: f64, cfg: &StepperConfig) -> Result<FlowState, SolverError> {
    let base = state.base();
    let n = base.n();
    let len = base.nodes();
    let h = base.h();
    let inv_h2 = 1.0 / (h * h);
    let inv_2h = 1.0 / (2.0 * h);
    let slope = base.log_slope();
    let w = state.w();
    let target = state.target();

    let mut f = vec![0.0; len];
    rhs_into(base, w, target, &mut f);
    let mut x: Vec<f64> = w.iter().zip(&f).map(|(w, r)| w + dt * r).collect();
    let (mut a, mut b, mut c) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut last = f64::INFINITY;
    for _ in 0..cfg.newton_max_iter {
        rhs_into(base, &x, target, &mut f);
        for i in 0..=n {
            let e = (-2.0 * x[i]).exp();
            let (lo, diag, hi) = if i == 0 {
                let d = -2.0 * inv_h2 + 2.0 * h * target.minus * x[0].exp() * (inv_h2 - slope[0] * inv_2h);
                (0.0, d, 2.0 * inv_h2)
            } else if i == n {
                let d = -2.0 * inv_h2 + 2.0 * h * target.plus * x[n].exp() * (inv_h2 + slope[n] * inv_2h);
                (2.0 * inv_h2, d, 0.0)
            } else {
                (inv_h2 - slope[i] * inv_2h, -2.0 * inv_h2, inv_h2 + slope[i] * inv_2h)
            };
            a[i] = -dt * e * lo;
            c[i] = -dt * e * hi;
            b[i] = 1.0 - dt * (-2.0 * f[i] + e * diag);
            f[i] = -((x[i] - w[i]) - dt * f[i]);
        }
        solve_twisted(&a, &b, &c, &mut f);
        let mut upd = 0.0f64;
        let mut size = 0.0f64;
        for (xi, d) in x.iter_mut().zip(&f) {
            *xi += d;
            upd = upd.max(d.abs());
            size = size.max(xi.abs());
        }
        if !upd.is_finite() {
            break;
        }
        last = upd;
        if upd <= cfg.newton_tol * (1.0 + size) {
            return Ok(state.successor(x, state.t_tilde() + dt));
        }
    }
    Err(SolverError::NewtonDiverged { iterations: cfg.newton_max_iter, last_update: last })
}

/// Discrete check of the curvature evolution `R_t = Δ_g R + R²` between two
/// states and of the boundary flux identity `∂R/∂η = k R`. The time midpoint
/// is taken in R (mean of the two curvature fields) and in w; evaluating R at
/// the mean of w instead would feed the nonlinear ghost relation an average it
/// does not satisfy. Returns `(max interior residual, max boundary flux
/// residual)`.
pub fn curvature_evolution_residual(prev: &FlowState, next: &FlowState, dt: f64) -> (f64, f64) {
    let base = prev.base();
    let n = base.n();
    let w: Vec<f64> = prev.w().iter().zip(next.w()).map(|(a, b)| 0.5 * (a + b)).collect();
    let mid = prev.successor(w, 0.5 * (prev.t_tilde() + next.t_tilde()));
    let r_prev = scalar_curvature(prev);
    let r_next = scalar_curvature(next);
    let r_mid: Vec<f64> = r_prev.iter().zip(r_next.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
    // Only interior nodes are used, so the ghost values are irrelevant.
    let lap = laplace_base(base, &r_mid, Ghosts { minus: r_mid[0], plus: r_mid[n] });
    let w = mid.w();
    let interior = (1..n)
        .map(|i| {
            let dr = (r_next[i] - r_prev[i]) / dt;
            (dr - ((-2.0 * w[i]).exp() * lap[i] + r_mid[i] * r_mid[i])).abs()
        })
        .fold(0.0, f64::max);

    let (dm, dp) = outward_derivatives(&r_mid, base.h());
    let (km, kp) = crate::geometry::boundary_geodesic_curvature(&mid);
    let flux_minus = ((-w[0]).exp() * dm - km * r_mid[0]).abs();
    let flux_plus = ((-w[n]).exp() * dp - kp * r_mid[n]).abs();
    (interior, flux_minus.max(flux_plus))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    TTilde(f64),
    /// Running `t = ∫ A_target/Ã dt̃` (trapezoid over accepted steps).
    NormalizedTime { t: f64, a_target: f64 },
    AreaBelow(f64),
    WallSteps(u64),
}

/// Result of [`evolve`]: the trace, optionally the state at every record, and
/// the running normalised time at every record.
#[derive(Debug, Clone)]
pub struct FlowRun {
    pub trace: FlowTrace,
    pub states: Vec<FlowState>,
    pub running_t: Vec<f64>,
    /// Why the run stopped early, if it did. The trace covers everything up to
    /// the last accepted step.
    pub abort: Option<SolverError>,
}

impl FlowRun {
    pub fn into_result(self) -> Result<FlowRun, SolverError> {
        match self.abort {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
    pub fn final_state(&self) -> Option<&FlowState> {
        self.states.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub record_every: u64,
    pub keep_states: bool,
    /// Area scale for the running normalised time reported in [`FlowRun`].
    pub a_target: f64,
}

impl EvolveOptions {
    pub fn every(record_every: u64) -> Self {
        EvolveOptions { record_every, keep_states: false, a_target: 1.0 }
    }
    pub fn keep_states(mut self) -> Self {
        self.keep_states = true;
        self
    }
}

/// Runs the flow until the stop rule fires. Errors abort the run.
pub fn evolve(
    initial: &FlowState,
    cfg: &StepperConfig,
    stop: StopRule,
    opts: EvolveOptions,
) -> Result<FlowRun, SolverError> {
    evolve_partial(initial, cfg, stop, opts)?.into_result()
}

/// Like [`evolve`], but a failure during stepping is reported in
/// [`FlowRun::abort`] together with everything recorded before it.
pub fn evolve_partial(
    initial: &FlowState,
    cfg: &StepperConfig,
    stop: StopRule,
    opts: EvolveOptions,
) -> Result<FlowRun, SolverError> {
    cfg.validate()?;
    if opts.record_every == 0 {
        return Err(SolverError::BadRecordEvery);
    }
    if !initial.is_finite() {
        return Err(SolverError::NonFinite { t_tilde: initial.t_tilde() });
    }
    let dt0 = stable_dt(initial, cfg.safety);
    let dt_min = cfg.dt_min.unwrap_or(1e-12 * dt0);

    let mut run = FlowRun { trace: FlowTrace::default(), states: Vec::new(), running_t: Vec::new(), abort: None };
    let mut state = initial.clone();
    let mut step: u64 = 0;
    let mut tn = 0.0;
    let mut cur_area = area(&state);
    let mut last_dt = 0.0;
    let record = |run: &mut FlowRun, s: &FlowState, step: u64, dt: f64, tn: f64| {
        run.trace.records.push(TraceRecord::observe(s, step, dt));
        run.running_t.push(tn);
        if opts.keep_states {
            run.states.push(s.clone());
        }
    };
    record(&mut run, &state, 0, 0.0, 0.0);

    let done = |s: &FlowState, step: u64, tn: f64, a: f64| match stop {
        StopRule::TTilde(t) => s.t_tilde() >= t,
        StopRule::NormalizedTime { t, .. } => tn >= t,
        StopRule::AreaBelow(x) => a < x,
        StopRule::WallSteps(k) => step >= k,
    };

    let mut dt_prev = dt0;
    let mut recorded_last = true;
    while !done(&state, step, tn, cur_area) {
        if let Some(max) = cfg.max_steps {
            if step >= max {
                run.abort = Some(SolverError::StepBudget { max_steps: max, t_tilde: state.t_tilde(), area: cur_area });
                break;
            }
        }
        let outcome = match cfg.scheme {
            Scheme::ExplicitHeun => {
                let mut dt = stable_dt(&state, cfg.safety);
                if dt < dt_min {
                    Err(SolverError::StepCollapse { dt, dt_min, t_tilde: state.t_tilde() })
                } else {
                    if let StopRule::TTilde(t) = stop {
                        dt = dt.min(t - state.t_tilde());
                    }
                    Ok((step_explicit(&state, dt), dt))
                }
            }
            Scheme::ImplicitEuler => implicit_adaptive(&state, cfg, stop, &mut dt_prev, dt_min),
        };
        let (next, dt) = match outcome {
            Ok(v) => v,
            Err(e) => {
                run.abort = Some(e);
                break;
            }
        };
        if !next.is_finite() {
            run.abort = Some(SolverError::NonFinite { t_tilde: next.t_tilde() });
            break;
        }
        let next_area = area(&next);
        if !(next_area > 0.0 && next_area.is_finite()) {
            run.abort = Some(SolverError::NonFinite { t_tilde: next.t_tilde() });
            break;
        }
        let a_target = match stop {
            StopRule::NormalizedTime { a_target, .. } => a_target,
            _ => opts.a_target,
        };
        tn += 0.5 * dt * (a_target / cur_area + a_target / next_area);
        cur_area = next_area;
        state = next;
        step += 1;
        last_dt = dt;
        recorded_last = false;
        if step.is_multiple_of(opts.record_every) {
            record(&mut run, &state, step, dt, tn);
            recorded_last = true;
        }
    }
    if !recorded_last {
        record(&mut run, &state, step, last_dt, tn);
    }
    Ok(run)
}

fn implicit_adaptive(
    state: &FlowState,
    cfg: &StepperConfig,
    stop: StopRule,
    dt_prev: &mut f64,
    dt_min: f64,
) -> Result<(FlowState, f64), SolverError> {
    let speed = rhs(state).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut dt = *dt_prev * cfg.dt_growth;
    if speed > 0.0 {
        dt = dt.min(cfg.max_dw / speed);
    }
    if let StopRule::TTilde(t) = stop {
        dt = dt.min(t - state.t_tilde());
    }
    let mut rejections = 0;
    loop {
        if dt < dt_min {
            return Err(SolverError::ImplicitStepCollapse { dt, dt_min, t_tilde: state.t_tilde() });
        }
        match step_implicit(state, dt, cfg) {
            Ok(next) => {
                *dt_prev = dt;
                return Ok((next, dt));
            }
            Err(_) if rejections + 1 < 5 => {
                rejections += 1;
                dt *= 0.5;
            }
            Err(_) => {
                return Err(SolverError::TooManyRejections { rejections: rejections + 1, t_tilde: state.t_tilde(), dt })
            }
        }
    }
}
