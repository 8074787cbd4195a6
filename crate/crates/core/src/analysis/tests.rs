use super::*;
use crate::error::AnalysisError;
use crate::normalization::{NormalizedRecord, NormalizedTrace, Observables};
use crate::scenarios::{make_initial, MinLocation, ScenarioSpec};
use crate::solver::{FlowTrace, TraceRecord};
use approx::assert_relative_eq;
use std::f64::consts::FRAC_PI_4;

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn rec(t_tilde: f64, total_r: f64) -> TraceRecord {
    TraceRecord {
        step: 0,
        t_tilde,
        dt: 0.0,
        area: 1.0,
        total_r,
        r_max: 1.0,
        r_min: 0.5,
        total_r2: 1.0,
        len_minus: 1.0,
        len_plus: 1.0,
        len_mid: 1.0,
        k_minus: -1.0,
        k_plus: -1.0,
        gb_residual: 0.0,
        meridian: 1.0,
        argmax_node: 0,
        rmin_loc: MinLocation::Boundary,
        r_boundary: 1.0,
    }
}

fn nrec(t: f64, r: f64, r_max: f64) -> NormalizedRecord {
    let obs = Observables {
        area: 1.0,
        total_r: r,
        r_max,
        r_min: 0.0,
        total_r2: 1.0,
        len_minus: 1.0,
        len_plus: 1.0,
        len_mid: 1.0,
        k_minus: -1.0,
        k_plus: -1.0,
    };
    NormalizedRecord { t, phi: 1.0, r, obs }
}

fn ntrace(t: &[f64], r: impl Fn(f64) -> f64, r_max: impl Fn(f64) -> f64) -> NormalizedTrace {
    NormalizedTrace { a_target: 1.0, records: t.iter().map(|&t| nrec(t, r(t), r_max(t))).collect() }
}

#[test]
fn fits_recover_exact_models() {
    let t = geometric(0.5, 50.0, 40);
    let y: Vec<f64> = t.iter().map(|t| 7.0 / t).collect();
    let f = fit_rate(&t, &y, FitModel::Power, 0..40).unwrap();
    assert_relative_eq!(f.rate, -1.0, epsilon = 1e-10);
    assert_relative_eq!(f.amplitude, 7.0, max_relative = 1e-10);
    assert!(f.rms_log < 1e-12);

    let y: Vec<f64> = t.iter().map(|t| 3.0 / t.ln_1p()).collect();
    let f = fit_rate(&t, &y, FitModel::LogInverse, 0..40).unwrap();
    assert_relative_eq!(f.amplitude, 3.0, max_relative = 1e-10);
    assert!(f.offset.abs() < 1e-10);
    assert_relative_eq!(f.predict(10.0), 3.0 / 11f64.ln(), max_relative = 1e-10);

    let t: Vec<f64> = (0..30).map(|i| 0.1 * i as f64).collect();
    let y: Vec<f64> = t.iter().map(|t| 5.0 * (-2.0 * t).exp()).collect();
    let f = fit_rate(&t, &y, FitModel::Exponential, 0..30).unwrap();
    assert_relative_eq!(f.rate, -2.0, epsilon = 1e-10);
    assert_relative_eq!(f.amplitude, 5.0, max_relative = 1e-10);
}

#[test]
fn fit_input_errors() {
    let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let y = vec![1.0; 20];
    assert!(matches!(fit_rate(&t, &y[..19], FitModel::Power, 0..19), Err(AnalysisError::LengthMismatch(20, 19))));
    assert!(matches!(fit_rate(&t, &y, FitModel::Power, 0..5), Err(AnalysisError::WindowTooShort { .. })));
    assert!(matches!(fit_rate(&t, &y, FitModel::Power, 0..20), Err(AnalysisError::NonPositive { index: 0, .. })));
    let mut z = y.clone();
    z[7] = -1.0;
    assert!(matches!(fit_rate(&t, &z, FitModel::Exponential, 0..20), Err(AnalysisError::NonPositive { index: 7, .. })));
}

#[test]
fn windows_split_log_range() {
    let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
    let w = Windows::new(&x);
    assert_eq!(w.kept, 10..100);
    assert_eq!(w.late, 55..100);
    assert_eq!(w.mid, 33..55);
    assert_relative_eq!(w.span, 89f64.exp());
    let w = Windows::new(&[1.0]);
    assert!(w.late.is_empty());
}

#[test]
fn unnormalized_inverse_time_passes() {
    let t = geometric(1e-2, 1e4, 200);
    let trace = FlowTrace { records: t.iter().map(|&t| rec(t, 4.0 / t + 1.0 / (t * t))).collect() };
    let c = check_total_curvature_unnormalized(&trace, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
    assert_relative_eq!(c.constant_found, 4.0, max_relative = 0.02);
    assert_relative_eq!(c.get("exponent").unwrap(), -1.0, epsilon = 0.05);
}

#[test]
fn unnormalized_constant_fails() {
    let t = geometric(1e-2, 1e4, 200);
    let trace = FlowTrace { records: t.iter().map(|&t| rec(t, 1.0)).collect() };
    let c = check_total_curvature_unnormalized(&trace, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Fail, "{c}");
}

#[test]
fn unnormalized_short_span_inconclusive() {
    let t = geometric(1.0, 5.0, 100);
    let trace = FlowTrace { records: t.iter().map(|&t| rec(t, 4.0 / t + 1.0 / (t * t))).collect() };
    let c = check_total_curvature_unnormalized(&trace, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Inconclusive, "{c}");
}

#[test]
fn normalized_log_inverse_passes() {
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |t| 2.0 / t.ln_1p(), |_| 1.0);
    let c = check_total_curvature_normalized(&nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
    assert_relative_eq!(c.constant_found, 2.0, max_relative = 1e-12);
    assert!(c.notes.iter().any(|n| n == "log-inverse model fits the late window best"));
}

#[test]
fn normalized_faster_decay_is_noted() {
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |t| 2.0 / (1.0 + t), |_| 1.0);
    let c = check_total_curvature_normalized(&nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
    assert!(c.notes.iter().any(|n| n == "faster than paper bound"));
}

#[test]
fn normalized_growth_fails() {
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |_| 2.0, |_| 1.0);
    let c = check_total_curvature_normalized(&nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Fail, "{c}");
}

#[test]
fn vanishing_total_curvature_passes_trivially() {
    let t = geometric(1e-2, 1e4, 50);
    let trace = FlowTrace { records: t.iter().map(|&t| rec(t, 0.0)).collect() };
    let c = check_total_curvature_unnormalized(&trace, &AsymptoticTolerances::default());
    assert_eq!((c.verdict, c.constant_found), (Verdict::Pass, 0.0));
    let nt = ntrace(&t, |_| 0.0, |_| 0.0);
    let c = check_total_curvature_normalized(&nt, &AsymptoticTolerances::default());
    assert_eq!((c.verdict, c.constant_found), (Verdict::Pass, 0.0));
}

fn blowup_trace(t: &[f64], k: f64) -> FlowTrace {
    let records = t
        .iter()
        .map(|&t| {
            let mut r = rec(t, 1.0);
            r.r_max = 0.3 * t;
            r.total_r2 = 1.2;
            r.k_minus = k;
            r.k_plus = k;
            r
        })
        .collect();
    FlowTrace { records }
}

#[test]
fn blowup_constants() {
    let t = geometric(1e-2, 1e4, 200);
    let trace = blowup_trace(&t, -1.0);
    let nt = ntrace(&t, |_| 1.0, |_| 1.0);
    let c = check_blowup(&trace, &nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
    assert_relative_eq!(c.get("c1").unwrap(), 1.2, max_relative = 1e-12);
    assert_relative_eq!(c.get("c2").unwrap(), 0.3, max_relative = 1e-12);
}

#[test]
fn blowup_needs_curved_boundary() {
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |_| 1.0, |_| 1.0);
    let c = check_blowup(&blowup_trace(&t, 0.0), &nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::HypothesesNotMet);
}

fn shrinking_trace(t: &[f64]) -> FlowTrace {
    // Area 4 then 3.8 at t̃ = 0.1: slope −2, so ĉ = 1 for a unit target.
    let records = t
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = rec(t, 1.0);
            r.area = 4.0 - 2.0 * t.min(0.1) - 1e-3 * i.saturating_sub(1) as f64;
            r
        })
        .collect();
    FlowTrace { records }
}

#[test]
fn nonexponential_passes_for_inverse_time() {
    let mut tt: Vec<f64> = vec![0.0, 0.1];
    tt.extend(geometric(0.2, 1e4, 198));
    let trace = shrinking_trace(&tt);
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |_| 1.0, |t| 2.0 / (t + 1.0));
    let c = check_nonexponential(&trace, &nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
    assert_relative_eq!(c.get("c_hat").unwrap(), 1.0, max_relative = 1e-9);
    assert_relative_eq!(c.constant_found, 2.0, max_relative = 1e-9);
}

#[test]
fn nonexponential_fails_for_exponential_decay() {
    let mut tt: Vec<f64> = vec![0.0, 0.1];
    tt.extend(geometric(0.2, 1e4, 198));
    let trace = shrinking_trace(&tt);
    let t = geometric(1e-2, 1e4, 200);
    let nt = ntrace(&t, |_| 1.0, |t| (-t).exp().max(1e-300));
    let c = check_nonexponential(&trace, &nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::Fail, "{c}");
}

#[test]
fn nonexponential_needs_boundary_minimum() {
    let t = geometric(1e-2, 1e4, 50);
    let mut trace = shrinking_trace(&t);
    for r in &mut trace.records {
        r.rmin_loc = MinLocation::Middle;
    }
    let nt = ntrace(&t, |_| 1.0, |t| 2.0 / (t + 1.0));
    let c = check_nonexponential(&trace, &nt, &AsymptoticTolerances::default());
    assert_eq!(c.verdict, Verdict::HypothesesNotMet);
}

#[test]
fn log_derivative_of_exact_decay() {
    // ∫R = e^{−t̃} with r_∂ = 2 everywhere.
    let records = (0..20)
        .map(|i| {
            let t = 0.1 * i as f64;
            let mut r = rec(t, (-t).exp());
            r.r_boundary = 2.0;
            r
        })
        .collect();
    assert!(log_derivative_identity(&FlowTrace { records }) < 1e-12);
}

#[test]
fn lemma_bounds_hold_on_initial_data() {
    for spec in [
        ScenarioSpec::flat(1.0, 64),
        ScenarioSpec::sphere_band(FRAC_PI_4, 64),
        ScenarioSpec::sphere_band(FRAC_PI_4, 64).with_bump(0.05, 2),
    ] {
        let s = make_initial(&spec).unwrap();
        assert!(check_parallel_bounds(&s).passed());
        assert!(check_area_bounds(&s).passed());
    }
}

#[test]
fn flat_lemma_constants_vanish() {
    let s = make_initial(&ScenarioSpec::flat(1.5, 64)).unwrap();
    let k = lemma_constants(&s);
    assert_eq!(k.alpha, 0.0);
    assert!(k.c < 1e-14);
    assert_relative_eq!(k.rho, 1.5, max_relative = 1e-12);
    let c = check_parallel_bounds(&s);
    assert!(c.worst_margin >= 0.0 && c.worst_margin < 1e-12);
}

#[test]
fn sphere_band_lemma_constants() {
    // Round sphere band: R = 2, C = max |tan σ| = 1 on |σ| ≤ π/4.
    let s = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 128)).unwrap();
    let k = lemma_constants(&s);
    assert_eq!(k.alpha, 0.0);
    assert_relative_eq!(k.c, 1.0, max_relative = 1e-3);
    assert_relative_eq!(k.rho, FRAC_PI_4, max_relative = 1e-6);
}

#[test]
fn potential_flat_is_zero() {
    let s = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
    let sol = solve_potential(&s);
    assert_eq!(sol.relative_residual, 0.0);
    assert!(sol.f.iter().all(|v| v.abs() < 1e-14));
    assert!(h_monitor(&s).abs() < 1e-14);
}

#[test]
fn potential_solves_bump() {
    let s = make_initial(&ScenarioSpec::flat(1.0, 128).with_bump(0.1, 1)).unwrap();
    assert!(potential_residual(&s) < 1e-10);
    let s = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 128).with_bump(0.05, 2)).unwrap();
    let sol = solve_potential(&s);
    assert!(sol.relative_residual < 1e-10);
}

#[test]
fn boundary_average_on_round_band() {
    let s = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 128)).unwrap();
    assert_relative_eq!(boundary_average_curvature(&s).unwrap(), 2.0, max_relative = 1e-4);
    let flat = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
    assert_eq!(boundary_average_curvature(&flat), Err(AnalysisError::GeodesicBoundary));
}

#[test]
fn verdict_strings() {
    assert_eq!(Verdict::HypothesesNotMet.to_string(), "hypotheses-not-met");
    let mut c = BoundCheck::new("x");
    c.constant_found = 1.0;
    c.worst_margin = -0.5;
    c.decide();
    assert!(c.failed());
    assert_eq!(c.summary_line(), "x fail 1.000000000e0 -5.000000000e-1");
}
