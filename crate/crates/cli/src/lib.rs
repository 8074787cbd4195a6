//! Command-line driver for the flow simulator: `run`, `verify`, `convergence`
//! and `sweep`. Every command reads a `key = value` configuration file.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ricci_core::io::{parse_config_with_warnings, write_trace_file, RunConfig};
use ricci_core::solver::{evolve_partial, EvolveOptions, FlowRun};
use ricci_core::verify::{convergence_study, verify, LongRun, Suite, VerifyTolerances};
use ricci_core::{make_initial, normalize_trace, Error};

/// Exit status when a check fails or a run aborts.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for unusable input (bad configuration, unreadable file).
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "ricci", version, about = "Ricci flow on cylinders with fixed boundary geodesic curvature")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one configuration and write its trace CSV.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Overrides `out` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and print per-check verdicts.
    Verify {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Normalised time reached by the long run of the asymptotic suite.
        #[arg(long, default_value_t = LongRun::default().horizon)]
        horizon: f64,
        /// Record interval of the long run.
        #[arg(long, default_value_t = LongRun::default().record_every)]
        long_every: u64,
        /// Also write `name verdict constant margin` lines to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Grid self-convergence study over n, 2n, 4n, ...
    Convergence {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Unnormalised time at which the grids are compared.
        #[arg(long, default_value_t = 0.1)]
        t_tilde: f64,
        /// Interval of the curvature-evolution check on the coarsest grid.
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
    },
    /// Run one configuration per value of a key, concurrently.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Configuration key to vary.
        #[arg(long)]
        key: String,
        /// Comma-separated values; numbers may be written as `pi/6` or `2*pi/3`.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Directory for the traces and `index.csv`.
        #[arg(long, default_value = "sweep")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Configuration file.
    pub config: PathBuf,
}

/// Outcome of a command: the exit status and nothing else; output has already
/// been written.
pub type Status = u8;

pub fn load_config(path: &Path, diag: &mut dyn Write) -> Result<RunConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(e.into()))?;
    let (cfg, warnings) = parse_config_with_warnings(&text)?;
    for w in warnings {
        let _ = writeln!(diag, "{w}");
    }
    Ok(cfg)
}

/// Dispatches a parsed command line. Errors are reported on `diag`.
pub fn execute(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Status {
    let result = match cli.command {
        Command::Run { config, out: path } => {
            load_config(&config.config, diag).and_then(|mut cfg| {
                if let Some(p) = path {
                    cfg.out = p;
                }
                cmd_run(&cfg, out, diag)
            })
        }
        Command::Verify { config, suite, horizon, long_every, report } => load_config(&config.config, diag)
            .and_then(|cfg| {
                let long = LongRun { horizon, record_every: long_every };
                cmd_verify(&cfg, suite, &long, report.as_deref(), out)
            }),
        Command::Convergence { config, levels, t_tilde, delta } => {
            load_config(&config.config, diag).and_then(|cfg| cmd_convergence(&cfg, levels, t_tilde, delta, out))
        }
        Command::Sweep { config, key, values, out_dir } => {
            load_config(&config.config, diag).and_then(|cfg| cmd_sweep(&cfg, &key, &values, &out_dir, out, diag))
        }
    };
    match result {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn simulate(cfg: &RunConfig) -> Result<FlowRun, Error> {
    let s0 = make_initial(&cfg.scenario)?;
    let opts = EvolveOptions { record_every: cfg.record_every, keep_states: false, a_target: cfg.a_target };
    Ok(evolve_partial(&s0, &cfg.stepper, cfg.stop_rule(), opts)?)
}

/// Writes the trace of `run` (complete or not) to `path`.
fn persist(cfg: &RunConfig, run: &FlowRun, path: &Path) -> Result<(), Error> {
    let nt = normalize_trace(&run.trace, cfg.a_target)?;
    write_trace_file(&run.trace, &nt, path)?;
    Ok(())
}

fn summary(cfg: &RunConfig, run: &FlowRun, path: &Path) -> String {
    let s = &cfg.scenario;
    let mut line = format!("{} rho={} n={} scheme={}", s.profile.as_str(), s.rho, s.n, cfg.stepper.scheme);
    if let Some(r) = run.trace.records.last() {
        let t = run.running_t.last().copied().unwrap_or(0.0);
        let _ = write!(
            line,
            ": {} records, {} steps, t_tilde={:.9e} t={:.9e} area={:.9e} R_max={:.9e}",
            run.trace.len(),
            r.step,
            r.t_tilde,
            t,
            r.area,
            r.r_max
        );
    }
    let _ = write!(line, " -> {}", path.display());
    line
}

pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write, diag: &mut dyn Write) -> Result<Status, Error> {
    let run = simulate(cfg)?;
    persist(cfg, &run, &cfg.out)?;
    let _ = writeln!(out, "{}", summary(cfg, &run, &cfg.out));
    Ok(match &run.abort {
        Some(e) => {
            let _ = writeln!(diag, "error: {}", Error::from(e.clone()));
            EXIT_FAILED
        }
        None => 0,
    })
}

pub fn cmd_verify(
    cfg: &RunConfig,
    suite: Suite,
    long: &LongRun,
    report_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Status, Error> {
    let report = verify(cfg, suite, &VerifyTolerances::default(), long)?;
    let _ = writeln!(out, "{report}");
    if let Some(p) = report_path {
        fs::write(p, report.summary()).map_err(|e| Error::Io(e.into()))?;
    }
    Ok(if report.ok() { 0 } else { EXIT_FAILED })
}

pub fn cmd_convergence(
    cfg: &RunConfig,
    levels: usize,
    t_tilde: f64,
    delta: f64,
    out: &mut dyn Write,
) -> Result<Status, Error> {
    let study = convergence_study(cfg, levels, t_tilde, delta)?;
    let _ = write!(out, "{}", study.table());
    let fmt = |v: Vec<f64>| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "w orders: {}", fmt(study.w_orders()));
    let _ = writeln!(out, "interior residual ratios: {}", fmt(study.interior_ratios()));
    let _ = writeln!(out, "flux residual ratios: {}", fmt(study.flux_ratios()));
    Ok(0)
}

/// Numeric value with an optional factor of π: `0.5`, `pi`, `pi/6`, `2*pi/3`.
pub fn expand_value(v: &str) -> String {
    let t = v.trim();
    let Some(pos) = t.find("pi") else {
        return t.to_string();
    };
    let (pre, post) = (&t[..pos], &t[pos + 2..]);
    let factor = match pre.strip_suffix('*') {
        Some(f) => f.trim().parse::<f64>().ok(),
        None if pre.trim().is_empty() => Some(1.0),
        None => None,
    };
    let divisor = match post.strip_prefix('/') {
        Some(d) => d.trim().parse::<f64>().ok(),
        None if post.trim().is_empty() => Some(1.0),
        None => None,
    };
    match (factor, divisor) {
        (Some(f), Some(d)) => format!("{:?}", f * std::f64::consts::PI / d),
        _ => t.to_string(),
    }
}

struct SweepItem {
    value: String,
    path: PathBuf,
    outcome: Result<FlowRun, Error>,
}

pub fn cmd_sweep(
    cfg: &RunConfig,
    key: &str,
    values: &[String],
    out_dir: &Path,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<Status, Error> {
    if key == "out" {
        return Err(Error::Io(ricci_core::error::IoError::BadValue {
            line: 0,
            key: key.into(),
            reason: "the output path is set per value by the sweep".into(),
        }));
    }
    let mut configs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut c = cfg.clone();
        c.set(key, &expand_value(v))?;
        c.out = out_dir.join(format!("{key}_{i}.csv"));
        configs.push((v.trim().to_string(), c));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::Io(e.into()))?;

    let items: Vec<SweepItem> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(v, c)| {
                scope.spawn(move || {
                    let outcome = simulate(c).and_then(|run| persist(c, &run, &c.out).map(|_| run));
                    SweepItem { value: v.clone(), path: c.out.clone(), outcome }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut index = String::from("index,key,value,path,status,records,t_tilde,t_norm\n");
    let mut status = 0;
    for (i, (item, (_, c))) in items.iter().zip(&configs).enumerate() {
        let file = item.path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
        match &item.outcome {
            Ok(run) => {
                let last = run.trace.records.last();
                let state = if run.abort.is_some() { "aborted" } else { "ok" };
                let _ = writeln!(
                    index,
                    "{i},{key},{},{file},{state},{},{:.16e},{:.16e}",
                    item.value,
                    run.trace.len(),
                    last.map_or(f64::NAN, |r| r.t_tilde),
                    run.running_t.last().copied().unwrap_or(f64::NAN)
                );
                let _ = writeln!(out, "{key}={} {}", item.value, summary(c, run, &item.path));
                if let Some(e) = &run.abort {
                    let _ = writeln!(diag, "error: {key}={}: {}", item.value, Error::from(e.clone()));
                    status = EXIT_FAILED;
                }
            }
            Err(e) => {
                let _ = writeln!(index, "{i},{key},{},{file},failed,0,NaN,NaN", item.value);
                let _ = writeln!(diag, "error: {key}={}: {e}", item.value);
                status = EXIT_FAILED;
            }
        }
    }
    let index_path = out_dir.join("index.csv");
    fs::write(&index_path, index).map_err(|e| Error::Io(e.into()))?;
    let _ = writeln!(out, "index -> {}", index_path.display());
    Ok(status)
}
