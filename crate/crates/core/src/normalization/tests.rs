use super::*;
use crate::scenarios::{make_initial, MinLocation, ScenarioSpec};
use crate::solver::{evolve, EvolveOptions, StepperConfig, StopRule};
use approx::assert_relative_eq;
use std::f64::consts::{FRAC_PI_4, PI};

fn rec(t_tilde: f64, area: f64) -> TraceRecord {
    TraceRecord {
        step: 0,
        t_tilde,
        dt: 0.0,
        area,
        total_r: 1.0,
        r_max: 0.5,
        r_min: 0.25,
        total_r2: 3.0,
        len_minus: 2.0,
        len_plus: 2.0,
        len_mid: 3.0,
        k_minus: -1.0,
        k_plus: -1.0,
        gb_residual: 0.0,
        meridian: 1.0,
        argmax_node: 0,
        rmin_loc: MinLocation::Boundary,
        r_boundary: 0.25,
    }
}

#[test]
fn homothety_arithmetic() {
    let trace = FlowTrace { records: vec![rec(0.0, 4.0)] };
    let nt = normalize_trace(&trace, 1.0).unwrap();
    let r = &nt.records[0];
    assert_eq!(r.phi, 0.25);
    assert_eq!(r.r_max(), 2.0);
    assert_eq!(r.obs.k_minus, -2.0);
    assert_eq!(r.obs.len_mid, 1.5);
    assert_eq!(r.obs.area, 1.0);
    assert_eq!(r.obs.total_r2, 12.0);
}

#[test]
fn sphere_band_initial_record() {
    let s0 = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 256)).unwrap();
    let trace = FlowTrace { records: vec![TraceRecord::observe(&s0, 0, 0.0)] };
    let nt = normalize_trace(&trace, 1.0).unwrap();
    let a0 = 2.0 * PI * 2f64.sqrt();
    assert_relative_eq!(nt.records[0].phi, 1.0 / a0, max_relative = 1e-10);
    assert_relative_eq!(nt.records[0].phi, 0.112540, max_relative = 1e-5);
    assert_relative_eq!(nt.records[0].r, 2.0 * a0, max_relative = 1e-10);
    assert_relative_eq!(nt.records[0].r, 17.771531, max_relative = 1e-7);
}

#[test]
fn flat_trace_is_constant() {
    let s0 = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::WallSteps(50), EvolveOptions::every(10)).unwrap();
    let nt = normalize_trace(&run.trace, 1.0).unwrap();
    let a0 = run.trace.records[0].area;
    for (r, n) in run.trace.records.iter().zip(&nt.records) {
        assert_relative_eq!(n.t, r.t_tilde / a0, max_relative = 1e-14);
        assert_eq!(n.obs, nt.records[0].obs);
    }
}

#[test]
fn total_curvature_is_scale_invariant() {
    let trace = FlowTrace { records: vec![rec(0.0, 4.0), rec(1.0, 3.0), rec(2.0, 0.5)] };
    let nt = normalize_trace(&trace, 1.0).unwrap();
    for (a, b) in trace.records.iter().zip(&nt.records) {
        assert_eq!(a.total_r, b.obs.total_r);
        assert_eq!(a.total_r, b.r);
    }
}

#[test]
fn malformed_traces_rejected() {
    let back = FlowTrace { records: vec![rec(0.0, 4.0), rec(0.0, 3.0)] };
    assert!(matches!(normalize_trace(&back, 1.0), Err(NormalizationError::MalformedTrace(_))));
    let zero = FlowTrace { records: vec![rec(0.0, 4.0), rec(1.0, 0.0)] };
    assert!(matches!(normalize_trace(&zero, 1.0), Err(NormalizationError::MalformedTrace(_))));
    let ok = FlowTrace { records: vec![rec(0.0, 4.0)] };
    assert!(matches!(normalize_trace(&ok, -1.0), Err(NormalizationError::BadTargetArea(_))));
}

#[test]
fn denormalize_round_trip() {
    let trace = FlowTrace { records: vec![rec(0.0, 4.0), rec(1.0, 0.37)] };
    let nt = normalize_trace(&trace, 2.5).unwrap();
    for (a, b) in trace.records.iter().zip(&nt.records) {
        let back = denormalize(b);
        let src = Observables::of(a);
        assert_relative_eq!(back.area, src.area, max_relative = 1e-15);
        assert_relative_eq!(back.r_max, src.r_max, max_relative = 1e-15);
        assert_relative_eq!(back.len_mid, src.len_mid, max_relative = 1e-15);
        assert_relative_eq!(back.k_plus, src.k_plus, max_relative = 1e-15);
        assert_eq!(back.total_r, src.total_r);
    }
}

#[test]
fn constant_area_time_map_is_linear() {
    let trace = FlowTrace { records: (0..20).map(|i| rec(i as f64 * 0.5 + 0.1, 4.0)).collect() };
    let nt = normalize_trace(&trace, 1.0).unwrap();
    for (a, b) in trace.records.iter().zip(&nt.records) {
        assert_relative_eq!(b.t, (a.t_tilde - 0.1) / 4.0, max_relative = 1e-14, epsilon = 1e-15);
    }
    let c = time_map_bounds_check(&trace, 1.0, 1e-6).unwrap();
    assert_eq!(c.verdict, Verdict::Pass);
}

#[test]
fn time_map_needs_span() {
    let trace = FlowTrace { records: (1..5).map(|i| rec(i as f64, 4.0)).collect() };
    let c = time_map_bounds_check(&trace, 1.0, 1e-6).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
}

#[test]
fn flat_time_map_holds() {
    let s0 = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::WallSteps(2000), EvolveOptions::every(20)).unwrap();
    let c = time_map_bounds_check(&run.trace, 1.0, 1e-6).unwrap();
    assert_eq!(c.verdict, Verdict::Pass, "{c}");
}

#[test]
fn conformal_factor_residual_trivial_cases() {
    let s0 = make_initial(&ScenarioSpec::flat(1.0, 64)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::WallSteps(100), EvolveOptions::every(10).keep_states())
        .unwrap();
    let nt = normalize_trace(&run.trace, 1.0).unwrap();
    assert_eq!(conformal_factor_residual(&nt, &run.states).unwrap(), 0.0);

    let band = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 64)).unwrap();
    let one = FlowTrace { records: vec![TraceRecord::observe(&band, 0, 0.0)] };
    let nt = normalize_trace(&one, 1.0).unwrap();
    assert_eq!(conformal_factor_residual(&nt, &[band]).unwrap(), 0.0);
}

#[test]
fn conformal_factor_residual_refines() {
    let residual = |n: usize| {
        let s0 = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, n)).unwrap();
        let run = evolve(&s0, &StepperConfig::default(), StopRule::TTilde(0.2), EvolveOptions::every(n as u64).keep_states())
            .unwrap();
        let nt = normalize_trace(&run.trace, 1.0).unwrap();
        conformal_factor_residual(&nt, &run.states).unwrap()
    };
    let (coarse, fine) = (residual(64), residual(128));
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn conformal_factor_needs_aligned_states() {
    let band = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 64)).unwrap();
    let one = FlowTrace { records: vec![TraceRecord::observe(&band, 0, 0.0)] };
    let nt = normalize_trace(&one, 1.0).unwrap();
    assert!(conformal_factor_residual(&nt, &[]).is_err());
}

#[test]
fn normalized_time_is_increasing_and_convex() {
    let s0 = make_initial(&ScenarioSpec::sphere_band(FRAC_PI_4, 64)).unwrap();
    let run = evolve(&s0, &StepperConfig::default(), StopRule::TTilde(0.3), EvolveOptions::every(50)).unwrap();
    let nt = normalize_trace(&run.trace, 1.0).unwrap();
    let t = nt.t();
    let tt = run.trace.t_tilde();
    for i in 1..t.len() {
        assert!(t[i] > t[i - 1]);
    }
    // φ increasing: slopes dt/dt̃ grow, i.e. t is convex in t̃.
    for i in 2..t.len() {
        let s1 = (t[i - 1] - t[i - 2]) / (tt[i - 1] - tt[i - 2]);
        let s2 = (t[i] - t[i - 1]) / (tt[i] - tt[i - 1]);
        assert!(s2 >= s1);
    }
}
