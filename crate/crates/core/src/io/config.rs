//! Flat `key = value` configuration, one pair per line, `#` starts a comment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::IoError;
use crate::scenarios::{InitialKind, ProfileKind, ScenarioSpec};
use crate::solver::{Scheme, StepperConfig, StopRule};

pub const CONFIG_KEYS: [&str; 14] = [
    "scenario", "a", "rho", "n", "w0", "epsilon", "mode", "scheme", "safety", "stop", "stop_value", "record_every",
    "a_target", "out",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopKind {
    TTilde,
    NormalizedTime,
    AreaBelow,
    WallSteps,
}

impl StopKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopKind::TTilde => "t_tilde",
            StopKind::NormalizedTime => "normalized_time",
            StopKind::AreaBelow => "area_below",
            StopKind::WallSteps => "wall_steps",
        }
    }
}

impl fmt::Display for StopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StopKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "t_tilde" | "t_tilde_reached" => Ok(StopKind::TTilde),
            "normalized_time" | "normalized_time_reached" => Ok(StopKind::NormalizedTime),
            "area_below" => Ok(StopKind::AreaBelow),
            "wall_steps" => Ok(StopKind::WallSteps),
            other => Err(format!("unknown stop rule {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub stepper: StepperConfig,
    pub stop: StopKind,
    pub stop_value: f64,
    pub record_every: u64,
    pub a_target: f64,
    pub out: PathBuf,
}

impl RunConfig {
    /// Defaults for everything except the three required keys.
    pub fn new(profile: ProfileKind, rho: f64, n: usize) -> Self {
        RunConfig {
            scenario: ScenarioSpec {
                profile,
                a: 1.0,
                rho,
                n,
                w0: InitialKind::Zero,
                epsilon: 0.0,
                mode: 1,
            },
            stepper: StepperConfig::default(),
            stop: StopKind::TTilde,
            stop_value: 0.5,
            record_every: 10,
            a_target: 1.0,
            out: PathBuf::from("trace.csv"),
        }
    }

    pub fn stop_rule(&self) -> StopRule {
        match self.stop {
            StopKind::TTilde => StopRule::TTilde(self.stop_value),
            StopKind::NormalizedTime => StopRule::NormalizedTime { t: self.stop_value, a_target: self.a_target },
            StopKind::AreaBelow => StopRule::AreaBelow(self.stop_value),
            StopKind::WallSteps => StopRule::WallSteps(self.stop_value as u64),
        }
    }

    /// Sets one key from its textual value, as a config line would.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), IoError> {
        self.set_at(0, key, value)
    }

    fn set_at(&mut self, line: usize, key: &str, value: &str) -> Result<(), IoError> {
        let bad = |reason: String| IoError::BadValue { line, key: key.to_string(), reason };
        fn num<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("{e} ({v:?})"))
        }
        match key {
            "scenario" => {
                self.scenario.profile = match value {
                    "flat" => ProfileKind::Flat,
                    "cos_band" => ProfileKind::CosBand,
                    other => return Err(bad(format!("expected flat or cos_band, got {other:?}"))),
                }
            }
            "a" => self.scenario.a = num(value).map_err(bad)?,
            "rho" => self.scenario.rho = num(value).map_err(bad)?,
            "n" => self.scenario.n = num(value).map_err(bad)?,
            "w0" => {
                self.scenario.w0 = match value {
                    "zero" => InitialKind::Zero,
                    "cosine_bump" => InitialKind::CosineBump,
                    other => return Err(bad(format!("expected zero or cosine_bump, got {other:?}"))),
                }
            }
            "epsilon" => self.scenario.epsilon = num(value).map_err(bad)?,
            "mode" => self.scenario.mode = num(value).map_err(bad)?,
            "scheme" => self.stepper.scheme = value.parse::<Scheme>().map_err(bad)?,
            "safety" => self.stepper.safety = num(value).map_err(bad)?,
            "stop" => self.stop = value.parse().map_err(bad)?,
            "stop_value" => {
                let v: f64 = num(value).map_err(bad)?;
                if !v.is_finite() {
                    return Err(bad("must be finite".into()));
                }
                self.stop_value = v;
            }
            "record_every" => {
                let v: u64 = num(value).map_err(bad)?;
                if v == 0 {
                    return Err(bad("must be positive".into()));
                }
                self.record_every = v;
            }
            "a_target" => {
                let v: f64 = num(value).map_err(bad)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad("must be positive".into()));
                }
                self.a_target = v;
            }
            "out" => self.out = PathBuf::from(value),
            other => return Err(IoError::UnknownKey { line, key: other.to_string() }),
        }
        Ok(())
    }

    /// Renders the configuration in the file format; `parse_config` reads it
    /// back to an equal value.
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("scenario", s.profile.as_str().into());
        put("a", format!("{:?}", s.a));
        put("rho", format!("{:?}", s.rho));
        put("n", s.n.to_string());
        put("w0", match s.w0 { InitialKind::Zero => "zero", InitialKind::CosineBump => "cosine_bump" }.into());
        put("epsilon", format!("{:?}", s.epsilon));
        put("mode", s.mode.to_string());
        put("scheme", self.stepper.scheme.to_string());
        put("safety", format!("{:?}", self.stepper.safety));
        put("stop", self.stop.to_string());
        put("stop_value", format!("{:?}", self.stop_value));
        put("record_every", self.record_every.to_string());
        put("a_target", format!("{:?}", self.a_target));
        put("out", self.out.display().to_string());
        out
    }
}

/// Parses a configuration and returns it together with warnings about
/// duplicate keys (the last occurrence wins).
pub fn parse_config_with_warnings(text: &str) -> Result<(RunConfig, Vec<String>), IoError> {
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(IoError::Syntax { line, text: raw.to_string() });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(IoError::Syntax { line, text: raw.to_string() });
        }
        if !CONFIG_KEYS.contains(&k) {
            return Err(IoError::UnknownKey { line, key: k.to_string() });
        }
        pairs.push((line, k, v));
    }

    let mut warnings = Vec::new();
    for (idx, (line, k, _)) in pairs.iter().enumerate() {
        if let Some((first, _, _)) = pairs[..idx].iter().find(|(_, k2, _)| k2 == k) {
            warnings.push(format!("warning: line {line}: key \"{k}\" repeats line {first}; the last value wins"));
        }
    }
    let last = |key: &str| pairs.iter().rev().find(|(_, k, _)| *k == key);
    for req in ["scenario", "rho", "n"] {
        if last(req).is_none() {
            return Err(IoError::MissingKey(req));
        }
    }
    let mut cfg = RunConfig::new(ProfileKind::Flat, 1.0, 64);
    for key in CONFIG_KEYS {
        if let Some((line, k, v)) = last(key) {
            cfg.set_at(*line, k, v)?;
        }
    }
    Ok((cfg, warnings))
}

/// Parses a configuration, printing duplicate-key warnings to stderr.
pub fn parse_config(text: &str) -> Result<RunConfig, IoError> {
    let (cfg, warnings) = parse_config_with_warnings(text)?;
    for w in warnings {
        eprintln!("{w}");
    }
    Ok(cfg)
}
