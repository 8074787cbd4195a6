//! Verification suites. Each suite runs the flow for a configuration and turns
//! the resulting trace (and, where needed, the stored snapshots) into a list of
//! [`BoundCheck`]s.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    boundary_average_curvature, check_area_bounds, check_blowup, check_decreasing_from_middle,
    check_nonexponential, check_parallel_bounds, check_total_curvature_normalized,
    check_total_curvature_unnormalized, h_monitor, potential_residual, AsymptoticTolerances, BoundCheck, Verdict,
    SymmetricTolerances,
};
use crate::error::{Error, Result, SolverError};
use crate::geometry::{scalar_curvature, FlowState};
use crate::io::RunConfig;
use crate::normalization::{conformal_factor_residual, normalize_trace, time_map_bounds_check, NormalizedTrace};
use crate::scenarios::{make_initial, validate_hypotheses, HypothesisTolerances};
use crate::solver::{
    curvature_evolution_residual, evolve, evolve_partial, EvolveOptions, FlowRun, Scheme, StopRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Conservation,
    Asymptotic,
    Lemmas,
    All,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Conservation => "conservation",
            Suite::Asymptotic => "asymptotic",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        }
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "conservation" => Ok(Suite::Conservation),
            "asymptotic" => Ok(Suite::Asymptotic),
            "lemmas" => Ok(Suite::Lemmas),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?} (expected conservation, asymptotic, lemmas or all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyTolerances {
    /// Relative Gauss–Bonnet residual.
    pub gauss_bonnet: f64,
    /// `|k(t̃) − k(0)|` at both ends.
    pub k_drift: f64,
    /// Lower bound for `min R` on data with `R ≥ 0`, `k ≤ 0`.
    pub r_floor: f64,
    /// Relative residual of `ΔÃ = −∫∫R̃ dÃ dt̃` between records.
    pub area_law: f64,
    /// Relative residual of `d log ∫R̃dÃ / dt̃ = −r_∂/2` between records.
    pub log_derivative: f64,
    pub potential: f64,
    pub time_map: f64,
    /// Largest deviation of the normalised conformal factor from its integral form.
    pub conformal_factor: f64,
    /// Normalised time window on which `max h` must stay bounded.
    pub h_window: f64,
    pub asymptotic: AsymptoticTolerances,
    pub symmetric: SymmetricTolerances,
    pub hypotheses: HypothesisTolerances,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            gauss_bonnet: 1e-5,
            k_drift: 5e-4,
            r_floor: -1e-6,
            area_law: 1e-6,
            log_derivative: 1e-3,
            potential: 1e-10,
            time_map: 1e-6,
            conformal_factor: 1e-3,
            h_window: 5.0,
            asymptotic: AsymptoticTolerances::default(),
            symmetric: SymmetricTolerances::default(),
            hypotheses: HypothesisTolerances::default(),
        }
    }
}

/// Settings for the long implicit run used by the asymptotic suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongRun {
    /// Normalised time at which the run stops.
    pub horizon: f64,
    pub record_every: u64,
}

impl Default for LongRun {
    fn default() -> Self {
        LongRun { horizon: 200.0, record_every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: Suite,
    pub scenario: String,
    pub checks: Vec<BoundCheck>,
}

impl Report {
    /// True iff no check failed. Inconclusive and not-applicable verdicts do not count.
    pub fn ok(&self) -> bool {
        !self.checks.iter().any(BoundCheck::failed)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Machine-readable summary: one `name verdict constant margin` line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.summary_line());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify suite={} scenario={}", self.suite, self.scenario)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| c.failed()).count();
        let inconclusive = self.checks.iter().filter(|c| c.verdict == Verdict::Inconclusive).count();
        write!(f, "{} checks, {} failed, {} inconclusive", self.checks.len(), failed, inconclusive)
    }
}

fn describe(cfg: &RunConfig) -> String {
    let s = &cfg.scenario;
    let mut d = format!("{} rho={} n={}", s.profile.as_str(), s.rho, s.n);
    if s.epsilon != 0.0 {
        d.push_str(&format!(" epsilon={} mode={}", s.epsilon, s.mode));
    }
    d
}

/// Runs the requested suite for `cfg`.
pub fn verify(cfg: &RunConfig, suite: Suite, tol: &VerifyTolerances, long: &LongRun) -> Result<Report> {
    let initial = make_initial(&cfg.scenario)?;
    let mut checks = Vec::new();
    if suite.includes(Suite::Conservation) || suite.includes(Suite::Lemmas) {
        let run = evolve_partial(
            &initial,
            &cfg.stepper,
            cfg.stop_rule(),
            EvolveOptions { record_every: cfg.record_every, keep_states: true, a_target: cfg.a_target },
        )?;
        if suite.includes(Suite::Conservation) {
            checks.extend(conservation_checks(&run, &initial, tol));
        }
        if suite.includes(Suite::Lemmas) {
            checks.extend(lemma_checks(&run.states, tol));
        }
    }
    if suite.includes(Suite::Asymptotic) {
        let mut stepper = cfg.stepper.clone();
        stepper.scheme = Scheme::ImplicitEuler;
        let run = evolve(
            &initial,
            &stepper,
            StopRule::NormalizedTime { t: long.horizon, a_target: cfg.a_target },
            EvolveOptions { record_every: long.record_every, keep_states: true, a_target: cfg.a_target },
        )?;
        let nt = normalize_trace(&run.trace, cfg.a_target).map_err(Error::from)?;
        checks.extend(asymptotic_checks(&run, &nt, tol)?);
        checks.extend(check_decreasing_from_middle(&nt, &run.states, &tol.symmetric));
        checks.push(h_bounded(&run.states, &nt, tol));
    }
    Ok(Report { suite, scenario: describe(cfg), checks })
}

fn max_by(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, f64::max)
}

/// Conservation checks on a (possibly aborted) run.
pub fn conservation_checks(run: &FlowRun, initial: &FlowState, tol: &VerifyTolerances) -> Vec<BoundCheck> {
    let recs = &run.trace.records;
    let window = Some((0, recs.len().saturating_sub(1)));
    let mut out = Vec::new();

    let mut horizon = BoundCheck::new("horizon");
    horizon.window = window;
    horizon.constant_found = recs.last().map_or(0.0, |r| r.t_tilde);
    horizon.worst_margin = 0.0;
    if let Some(e) = &run.abort {
        horizon.worst_margin = -1.0;
        horizon.note(format!("run stopped early: {e}"));
    }
    horizon.decide();
    out.push(horizon);

    let mut gb = BoundCheck::new("gauss_bonnet");
    gb.window = window;
    gb.constant_found = max_by(recs.iter().map(|r| r.gb_residual.abs()));
    gb.worst_margin = tol.gauss_bonnet - gb.constant_found;
    if let Some(i) = recs.iter().position(|r| r.gb_residual.abs() > tol.gauss_bonnet) {
        gb.note(format!("first exceeded at record {i}, t_tilde = {:.6e}", recs[i].t_tilde));
    }
    gb.decide();
    out.push(gb);

    let target = initial.target();
    let mut kd = BoundCheck::new("boundary_curvature");
    kd.window = window;
    kd.constant_found = max_by(recs.iter().map(|r| (r.k_minus - target.minus).abs().max((r.k_plus - target.plus).abs())));
    kd.worst_margin = tol.k_drift - kd.constant_found;
    kd.decide();
    out.push(kd);

    let hyp = validate_hypotheses(initial, &tol.hypotheses);
    let mut pos = BoundCheck::new("positivity");
    pos.window = window;
    pos.constant_found = recs.iter().map(|r| r.r_min).fold(f64::INFINITY, f64::min);
    pos.worst_margin = pos.constant_found - tol.r_floor;
    if hyp.positive_data() {
        pos.decide();
    } else {
        pos.verdict = Verdict::HypothesesNotMet;
        pos.note("initial data does not have R >= 0 and k <= 0");
    }
    out.push(pos);

    let mut mono = BoundCheck::new("total_curvature_monotone");
    mono.window = window;
    let rise = max_by(recs.windows(2).map(|p| (p[1].total_r - p[0].total_r) / p[0].total_r.abs().max(f64::MIN_POSITIVE)));
    mono.constant_found = rise;
    mono.worst_margin = 1e-9 - rise;
    if hyp.positive_data() {
        mono.decide();
    } else {
        mono.verdict = Verdict::HypothesesNotMet;
    }
    out.push(mono);

    let mut area = BoundCheck::new("area_law");
    area.window = window;
    let mut worst = 0.0f64;
    for p in recs.windows(2) {
        let da = p[1].area - p[0].area;
        let quad = 0.5 * (p[1].t_tilde - p[0].t_tilde) * (p[0].total_r + p[1].total_r);
        let scale = da.abs().max(quad.abs());
        if scale > 0.0 {
            worst = worst.max((da + quad).abs() / scale);
        }
    }
    area.constant_found = worst;
    area.worst_margin = tol.area_law - worst;
    area.decide();
    out.push(area);

    out.push(log_derivative_check(run, tol));
    out
}

/// `d log ∫R̃dÃ / dt̃ = −r_∂/2` between consecutive records, relative to `r_∂`.
/// The first 10% of the records are skipped: smooth initial data do not satisfy
/// `∂R/∂η = kR`, and the identity only holds once that boundary layer has formed.
fn log_derivative_check(run: &FlowRun, tol: &VerifyTolerances) -> BoundCheck {
    let all = &run.trace.records;
    let start = all.len().div_ceil(10);
    let recs = &all[start.min(all.len())..];
    let mut c = BoundCheck::new("log_derivative_identity");
    c.window = Some((start, all.len().saturating_sub(1)));
    if recs.iter().any(|r| !r.r_boundary.is_finite() || !(r.total_r > 0.0)) {
        c.verdict = Verdict::NotApplicable;
        c.note("needs a curved boundary and positive total curvature");
        return c;
    }
    let mut worst = 0.0f64;
    for p in recs.windows(2) {
        let lhs = (p[1].total_r.ln() - p[0].total_r.ln()) / (p[1].t_tilde - p[0].t_tilde);
        let rhs = -0.25 * (p[0].r_boundary + p[1].r_boundary);
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
    }
    c.constant_found = worst;
    c.worst_margin = tol.log_derivative - worst;
    c.decide();
    c
}

/// Lemma checks over snapshots: the parallel and area bounds and the
/// direct-substitution residual of the potential solve.
pub fn lemma_checks(states: &[FlowState], tol: &VerifyTolerances) -> Vec<BoundCheck> {
    let window = Some((0, states.len().saturating_sub(1)));
    let mut par = BoundCheck::new("parallel_bounds");
    let mut area = BoundCheck::new("area_bounds");
    let mut pot = BoundCheck::new("potential_residual");
    par.worst_margin = f64::INFINITY;
    area.worst_margin = f64::INFINITY;
    let mut worst_pot = 0.0f64;
    for s in states {
        let p = check_parallel_bounds(s);
        if p.worst_margin < par.worst_margin {
            par.worst_margin = p.worst_margin;
            par.constant_found = p.constant_found;
        }
        let a = check_area_bounds(s);
        if a.worst_margin < area.worst_margin {
            area.worst_margin = a.worst_margin;
            area.constant_found = a.constant_found;
        }
        worst_pot = worst_pot.max(potential_residual(s));
    }
    pot.constant_found = worst_pot;
    pot.worst_margin = tol.potential - worst_pot;
    for c in [&mut par, &mut area, &mut pot] {
        c.window = window;
        if states.is_empty() {
            c.note("no snapshots");
        } else {
            c.decide();
        }
    }
    vec![par, area, pot]
}

/// The four long-time checks plus the time map and the conformal-factor identity.
pub fn asymptotic_checks(run: &FlowRun, nt: &NormalizedTrace, tol: &VerifyTolerances) -> Result<Vec<BoundCheck>> {
    let a = &tol.asymptotic;
    let mut out = vec![
        check_total_curvature_unnormalized(&run.trace, a),
        check_total_curvature_normalized(nt, a),
        check_blowup(&run.trace, nt, a),
        check_nonexponential(&run.trace, nt, a),
        time_map_bounds_check(&run.trace, nt.a_target, tol.time_map)?,
    ];
    let mut cf = BoundCheck::new("conformal_factor");
    cf.window = Some((0, nt.len().saturating_sub(1)));
    if run.states.len() == nt.len() {
        cf.constant_found = conformal_factor_residual(nt, &run.states)?;
        cf.worst_margin = tol.conformal_factor - cf.constant_found;
        cf.decide();
    } else {
        cf.verdict = Verdict::NotApplicable;
        cf.note("snapshots were not kept");
    }
    out.push(cf);
    Ok(out)
}

/// `max h` in the normalised flow (`h` scales like curvature, so the
/// unnormalised value is divided by φ) over records with `t ≤ h_window`.
/// Bounded means the maximum over the second half of the window is at most
/// `growth_factor` times the maximum over the first half.
pub fn h_bounded(states: &[FlowState], nt: &NormalizedTrace, tol: &VerifyTolerances) -> BoundCheck {
    let mut c = BoundCheck::new("h_bounded");
    let hyp = states.first().map(|s| validate_hypotheses(s, &tol.hypotheses));
    if !hyp.is_some_and(|h| h.positive_data()) {
        c.verdict = Verdict::HypothesesNotMet;
        c.note("initial data does not have R >= 0 and k <= 0");
        return c;
    }
    let half = 0.5 * tol.h_window;
    let (mut early, mut late) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut last = 0;
    for (i, (s, rec)) in states.iter().zip(&nt.records).enumerate() {
        if rec.t > tol.h_window {
            break;
        }
        let h = h_monitor(s) / rec.phi;
        if rec.t <= half {
            early = early.max(h);
        } else {
            late = late.max(h);
        }
        last = i;
    }
    c.window = Some((0, last));
    c.constant_found = early.max(late);
    c.detail("max_first_half", early);
    c.detail("max_second_half", late);
    if !c.constant_found.is_finite() || nt.records.last().is_none_or(|r| r.t < 0.99 * tol.h_window) {
        c.note(format!("run does not cover normalised time {}", tol.h_window));
        if !c.constant_found.is_finite() {
            c.verdict = Verdict::Fail;
            c.worst_margin = f64::NEG_INFINITY;
        }
        return c;
    }
    c.worst_margin = tol.asymptotic.growth_factor * early - late;
    c.decide();
    c
}

/// One grid level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub n: usize,
    /// State at the study time.
    pub w: Vec<f64>,
    pub gauss_bonnet: f64,
    /// Interval between the two states of the curvature-evolution check.
    pub delta: f64,
    pub interior_residual: f64,
    pub flux_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub t_tilde: f64,
    pub levels: Vec<Level>,
}

impl ConvergenceStudy {
    /// `max |w_n − w_{2n}|` over the coarse nodes, for each consecutive pair.
    pub fn w_differences(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|p| p[0].w.iter().enumerate().map(|(i, v)| (v - p[1].w[2 * i]).abs()).fold(0.0, f64::max))
            .collect()
    }

    /// Observed orders `log2(d_k / d_{k+1})` from the successive differences.
    pub fn w_orders(&self) -> Vec<f64> {
        self.w_differences().windows(2).map(|d| (d[0] / d[1]).log2()).collect()
    }

    fn ratios(&self, f: impl Fn(&Level) -> f64) -> Vec<f64> {
        self.levels.windows(2).map(|p| f(&p[0]) / f(&p[1])).collect()
    }

    /// Reduction factor of the interior residual per grid doubling.
    pub fn interior_ratios(&self) -> Vec<f64> {
        self.ratios(|l| l.interior_residual)
    }

    pub fn flux_ratios(&self) -> Vec<f64> {
        self.ratios(|l| l.flux_residual)
    }

    pub fn gauss_bonnet_orders(&self) -> Vec<f64> {
        self.ratios(|l| l.gauss_bonnet).into_iter().map(f64::log2).collect()
    }

    /// Plain-text table, one row per level.
    pub fn table(&self) -> String {
        let d = self.w_differences();
        let mut out = format!(
            "# t_tilde = {}\n{:>6} {:>14} {:>8} {:>14} {:>14} {:>14} {:>14}\n",
            self.t_tilde, "n", "w_diff", "order", "gauss_bonnet", "delta", "interior", "flux"
        );
        for (k, l) in self.levels.iter().enumerate() {
            let diff = d.get(k).map_or(String::from("-"), |v| format!("{v:.6e}"));
            let order = if k >= 1 && k < d.len() { format!("{:.4}", (d[k - 1] / d[k]).log2()) } else { "-".into() };
            out.push_str(&format!(
                "{:>6} {:>14} {:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}\n",
                l.n, diff, order, l.gauss_bonnet, l.delta, l.interior_residual, l.flux_residual
            ));
        }
        out
    }
}

/// Runs `levels` grids `n0, 2n0, …` concurrently to `t_tilde`, then a further
/// `delta0·n0/n` for the curvature-evolution residual, so that the time and
/// space steps of that check are refined together.
pub fn convergence_study(
    cfg: &RunConfig,
    levels: usize,
    t_tilde: f64,
    delta0: f64,
) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(SolverError::BadConfig(format!("a convergence study needs at least 3 levels, got {levels}")).into());
    }
    let n0 = cfg.scenario.n;
    let results: Vec<Result<Level>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..levels)
            .map(|k| {
                let n = n0 << k;
                scope.spawn(move || level(cfg, n, t_tilde, delta0 * n0 as f64 / n as f64))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence worker panicked")).collect()
    });
    let levels = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy { t_tilde, levels })
}

fn level(cfg: &RunConfig, n: usize, t_tilde: f64, delta: f64) -> Result<Level> {
    let mut spec = cfg.scenario.clone();
    spec.n = n;
    let s0 = make_initial(&spec)?;
    let opts = EvolveOptions { record_every: u64::MAX, keep_states: true, a_target: cfg.a_target };
    let a = evolve(&s0, &cfg.stepper, StopRule::TTilde(t_tilde), opts)?;
    let sa = a.final_state().expect("kept states").clone();
    let b = evolve(&sa, &cfg.stepper, StopRule::TTilde(t_tilde + delta), opts)?;
    let sb = b.final_state().expect("kept states");
    let (interior, flux) = curvature_evolution_residual(&sa, sb, sb.t_tilde() - sa.t_tilde());
    Ok(Level {
        n,
        w: sa.w().to_vec(),
        gauss_bonnet: crate::geometry::gauss_bonnet_relative(&sa),
        delta,
        interior_residual: interior,
        flux_residual: flux,
    })
}

/// `r_∂` at every snapshot (NaN where the boundary is geodesic).
pub fn boundary_averages(states: &[FlowState]) -> Vec<f64> {
    states.iter().map(|s| boundary_average_curvature(s).unwrap_or(f64::NAN)).collect()
}

/// Smallest value of `R` over all snapshots.
pub fn min_curvature(states: &[FlowState]) -> f64 {
    states.iter().map(|s| scalar_curvature(s).min()).fold(f64::INFINITY, f64::min)
}
