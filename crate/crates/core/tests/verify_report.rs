use std::f64::consts::FRAC_PI_4;

use ricci_core::analysis::Verdict;
use ricci_core::io::{RunConfig, StopKind};
use ricci_core::scenarios::ProfileKind;
use ricci_core::verify::{convergence_study, verify, LongRun, Suite, VerifyTolerances};

fn flat() -> RunConfig {
    let mut cfg = RunConfig::new(ProfileKind::Flat, 1.0, 64);
    cfg.stop_value = 0.2;
    cfg
}

/// Default tolerances are meant for fine grids and dense records.
fn coarse_tol() -> VerifyTolerances {
    VerifyTolerances { gauss_bonnet: 1e-3, area_law: 1e-4, ..VerifyTolerances::default() }
}

fn band() -> RunConfig {
    let mut cfg = RunConfig::new(ProfileKind::CosBand, FRAC_PI_4, 64);
    cfg.stop_value = 0.1;
    cfg
}

#[test]
fn flat_conservation_is_exact() {
    let r = verify(&flat(), Suite::Conservation, &VerifyTolerances::default(), &LongRun::default()).unwrap();
    assert!(r.ok(), "{r}");
    for name in ["gauss_bonnet", "boundary_curvature", "area_law"] {
        assert_eq!(r.get(name).unwrap().constant_found, 0.0, "{name}");
    }
    assert_eq!(r.get("horizon").unwrap().constant_found, 0.2);
    assert_eq!(r.get("positivity").unwrap().constant_found, 0.0);
    assert_eq!(r.get("log_derivative_identity").unwrap().verdict, Verdict::NotApplicable);
}

#[test]
fn band_conservation_passes() {
    let r = verify(&band(), Suite::Conservation, &coarse_tol(), &LongRun::default()).unwrap();
    assert!(r.ok(), "{r}");
    assert_eq!(r.checks.len(), 7);
    assert!(r.get("positivity").unwrap().passed());
    assert!(r.get("gauss_bonnet").unwrap().constant_found < 5e-4);
}

#[test]
fn lemma_suite_reports_three_checks() {
    let r = verify(&band(), Suite::Lemmas, &VerifyTolerances::default(), &LongRun::default()).unwrap();
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["parallel_bounds", "area_bounds", "potential_residual"]);
    assert!(r.ok(), "{r}");
}

#[test]
fn tight_tolerance_fails_the_report() {
    let tol = VerifyTolerances { gauss_bonnet: 1e-12, ..VerifyTolerances::default() };
    let r = verify(&band(), Suite::Conservation, &tol, &LongRun::default()).unwrap();
    assert!(!r.ok());
    let gb = r.get("gauss_bonnet").unwrap();
    assert!(gb.failed() && gb.worst_margin < 0.0);
    assert!(gb.notes[0].starts_with("first exceeded at record 0"));
}

#[test]
fn aborted_run_fails_the_horizon() {
    let mut cfg = band();
    cfg.stepper.max_steps = Some(5);
    let r = verify(&cfg, Suite::Conservation, &VerifyTolerances::default(), &LongRun::default()).unwrap();
    let h = r.get("horizon").unwrap();
    assert!(h.failed());
    assert!(h.notes[0].contains("step budget"), "{}", h.notes[0]);
}

#[test]
fn flat_asymptotic_suite() {
    let long = LongRun { horizon: 5.0, record_every: 20 };
    let r = verify(&flat(), Suite::Asymptotic, &VerifyTolerances::default(), &long).unwrap();
    assert!(r.ok(), "{r}");
    assert_eq!(r.get("blowup").unwrap().verdict, Verdict::HypothesesNotMet);
    assert_eq!(r.get("total_curvature_normalized").unwrap().constant_found, 0.0);
    assert_eq!(r.get("conformal_factor").unwrap().constant_found, 0.0);
    assert!(r.get("h_bounded").unwrap().passed());
}

#[test]
fn summary_lines_are_machine_readable() {
    let r = verify(&band(), Suite::Conservation, &coarse_tol(), &LongRun::default()).unwrap();
    let text = r.summary();
    assert_eq!(text.lines().count(), r.checks.len());
    for (line, c) in text.lines().zip(&r.checks) {
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 4);
        assert_eq!(f[0], c.name);
        assert_eq!(f[1], c.verdict.as_str());
        if c.constant_found.is_finite() {
            let v: f64 = f[2].parse().unwrap();
            assert!((v - c.constant_found).abs() <= 1e-9 * c.constant_found.abs());
        }
    }
    let shown = r.to_string();
    assert!(shown.starts_with("verify suite=conservation scenario=cos_band"));
    assert!(shown.ends_with("7 checks, 0 failed, 0 inconclusive"), "{shown}");
}

#[test]
fn suites_parse() {
    for s in [Suite::Conservation, Suite::Asymptotic, Suite::Lemmas, Suite::All] {
        assert_eq!(s.as_str().parse::<Suite>().unwrap(), s);
    }
    assert!("everything".parse::<Suite>().is_err());
}

#[test]
fn convergence_study_orders() {
    let mut cfg = band();
    cfg.scenario.n = 32;
    cfg.stop = StopKind::TTilde;
    let study = convergence_study(&cfg, 3, 0.05, 0.04).unwrap();
    assert_eq!(study.levels.iter().map(|l| l.n).collect::<Vec<_>>(), [32, 64, 128]);
    for p in study.w_orders() {
        assert!((1.7..=2.3).contains(&p), "{p}");
    }
    for p in study.gauss_bonnet_orders() {
        assert!(p > 1.5, "{p}");
    }
    assert_eq!(study.table().lines().count(), 5);
    assert!(convergence_study(&cfg, 2, 0.05, 0.04).is_err());
}
