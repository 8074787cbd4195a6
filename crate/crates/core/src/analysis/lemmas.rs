//! Comparison of parallel lengths and of area against boundary length, in the
//! arclength gauge `ds² + f(s)² dθ²` of a snapshot.
//!
//! Both inequalities have exponent `2ρ(αρ + C)` with `α = max(0, −min R)`,
//! `C` the largest `|f_s/f|` over the parallels and `2ρ` the meridian length.

use super::{BoundCheck, Verdict};
use crate::geometry::{area, parallel_curvatures, scalar_curvature, to_arclength_profile, FlowState};

/// Slack granted to rounding when an inequality is an equality (flat case).
const ROUNDING: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaConstants {
    pub alpha: f64,
    pub c: f64,
    /// Half the meridian distance.
    pub rho: f64,
    /// `2ρ(αρ + C)`.
    pub exponent: f64,
}

pub fn lemma_constants(state: &FlowState) -> LemmaConstants {
    let alpha = (-scalar_curvature(state).min()).max(0.0);
    let c = parallel_curvatures(state).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let prof = to_arclength_profile(state);
    let rho = 0.5 * prof.s.last().copied().unwrap_or(0.0);
    LemmaConstants { alpha, c, rho, exponent: 2.0 * rho * (alpha * rho + c) }
}

fn with_constants(c: &mut BoundCheck, k: &LemmaConstants) {
    c.constant_found = k.exponent;
    c.detail("alpha", k.alpha);
    c.detail("C", k.c);
    c.detail("rho", k.rho);
}

/// `L_s e^{−E} ≤ L_q ≤ L_s e^{E}` for every pair of parallels, i.e.
/// `max log L − min log L ≤ E`. The margin is `E − (max log L − min log L)`.
pub fn check_parallel_bounds(state: &FlowState) -> BoundCheck {
    let mut c = BoundCheck::new("parallel_bounds");
    let k = lemma_constants(state);
    with_constants(&mut c, &k);
    let prof = to_arclength_profile(state);
    let logs: Vec<f64> = prof.f.iter().map(|f| f.ln()).collect();
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    c.detail("log_length_spread", hi - lo);
    c.worst_margin = k.exponent - (hi - lo) + ROUNDING * (1.0 + hi.abs().max(lo.abs()));
    c.decide();
    c
}

/// `2ρ L e^{−E} ≤ A ≤ 2ρ L e^{E}` with `L` the shorter boundary circle; the
/// margin is the smaller slack of the two inequalities in log space.
pub fn check_area_bounds(state: &FlowState) -> BoundCheck {
    let mut c = BoundCheck::new("area_bounds");
    let k = lemma_constants(state);
    with_constants(&mut c, &k);
    let n = state.base().n();
    let len = crate::geometry::parallel_length(state, 0).min(crate::geometry::parallel_length(state, n));
    let log_a = area(state).ln();
    let log_ref = (2.0 * k.rho * len).ln();
    let allowance = ROUNDING * (1.0 + log_a.abs());
    let lower = log_a - (log_ref - k.exponent);
    let upper = (log_ref + k.exponent) - log_a;
    c.detail("log_area_over_reference", log_a - log_ref);
    c.worst_margin = lower.min(upper) + allowance;
    c.decide();
    if !c.worst_margin.is_finite() {
        c.verdict = Verdict::Fail;
    }
    c
}
