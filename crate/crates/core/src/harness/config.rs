//! `key=value` scenario configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{PttError, Result};
use crate::integrator::Scheme;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Blowup,
    Global,
    Linear,
    Verify,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Blowup => "blowup",
            Scenario::Global => "global",
            Scenario::Linear => "linear",
            Scenario::Verify => "verify",
        }
    }

    /// Horizon used when `t_max` is not given.
    pub fn default_t_max(self) -> f64 {
        match self {
            Scenario::Blowup => 1.0,
            Scenario::Global => 20.0,
            Scenario::Linear | Scenario::Verify => 1.0,
        }
    }
}

impl FromStr for Scenario {
    type Err = PttError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blowup" => Ok(Scenario::Blowup),
            "global" => Ok(Scenario::Global),
            "linear" => Ok(Scenario::Linear),
            "verify" => Ok(Scenario::Verify),
            other => Err(PttError::param("scenario", format!("unknown scenario `{other}`"))),
        }
    }
}

/// Every recognised key, in echo order.
pub const CONFIG_KEYS: [&str; 22] = [
    "scenario",
    "n",
    "dt",
    "t_max",
    "delta0",
    "c0",
    "eps_tilde0",
    "eps",
    "a",
    "b",
    "lambda",
    "mu",
    "mu1",
    "mu2",
    "seed",
    "record_interval",
    "output_dir",
    "trace_min",
    "particles",
    "scheme",
    "cfl",
    "threads",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub dt: f64,
    pub t_max: f64,
    pub delta0: f64,
    /// `None` means `δ₀/2`.
    pub c0: Option<f64>,
    pub eps_tilde0: f64,
    pub eps: f64,
    pub params: ModelParams,
    pub seed: u64,
    pub record_interval: f64,
    pub output_dir: PathBuf,
    pub trace_min: f64,
    pub particles: usize,
    pub scheme: Scheme,
    pub cfl: f64,
    /// Worker threads; `0` leaves the choice to rayon.
    pub threads: usize,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioConfig {
            scenario,
            n: 32,
            dt: 1e-3,
            t_max: scenario.default_t_max(),
            delta0: 0.01,
            c0: None,
            eps_tilde0: 1.0,
            eps: 0.1,
            params: ModelParams::default(),
            seed: 1,
            record_interval: 0.05,
            output_dir: PathBuf::from("out"),
            trace_min: -2.0,
            particles: crate::characteristics::DEFAULT_PARTICLES,
            scheme: Scheme::default(),
            cfl: 0.4,
            threads: 0,
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0.unwrap_or(0.5 * self.delta0)
    }

    /// Sets one key from its text form; `line` is reported in errors.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let err = |reason: String| PttError::Config {
            key: key.to_string(),
            line,
            reason,
        };
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("cannot parse `{v}`: {e}"))
        }
        match key {
            "scenario" => self.scenario = value.parse().map_err(|e: PttError| err(e.to_string()))?,
            "n" => self.n = num(value).map_err(err)?,
            "dt" => self.dt = num(value).map_err(err)?,
            "t_max" => self.t_max = num(value).map_err(err)?,
            "delta0" => self.delta0 = num(value).map_err(err)?,
            "c0" => self.c0 = Some(num(value).map_err(err)?),
            "eps_tilde0" => self.eps_tilde0 = num(value).map_err(err)?,
            "eps" => self.eps = num(value).map_err(err)?,
            "a" => self.params.a = num(value).map_err(err)?,
            "b" => self.params.b = num(value).map_err(err)?,
            "lambda" => self.params.lambda = num(value).map_err(err)?,
            "mu" => self.params.mu = num(value).map_err(err)?,
            "mu1" => self.params.mu1 = num(value).map_err(err)?,
            "mu2" => self.params.mu2 = num(value).map_err(err)?,
            "seed" => self.seed = num(value).map_err(err)?,
            "record_interval" => self.record_interval = num(value).map_err(err)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "trace_min" => self.trace_min = num(value).map_err(err)?,
            "particles" => self.particles = num(value).map_err(err)?,
            "scheme" => self.scheme = value.parse().map_err(|e: PttError| err(e.to_string()))?,
            "cfl" => self.cfl = num(value).map_err(err)?,
            "threads" => self.threads = num(value).map_err(err)?,
            _ => return Err(err("unknown key".into())),
        }
        Ok(())
    }

    /// Checks the module invariants; `lines` maps keys to their source line.
    pub fn validate_with(&self, line_of: impl Fn(&str) -> usize) -> Result<()> {
        let fail = |key: &str, reason: String| PttError::Config {
            key: key.to_string(),
            line: line_of(key),
            reason,
        };
        if self.n < 8 || self.n % 2 != 0 {
            return Err(fail("n", format!("grid size must be even and >= 8, got {}", self.n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(fail("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(fail("t_max", format!("must be finite and >= 0, got {}", self.t_max)));
        }
        if !(self.delta0 >= 0.0 && self.delta0.is_finite()) {
            return Err(fail("delta0", format!("must be finite and >= 0, got {}", self.delta0)));
        }
        if self.scenario == Scenario::Global && self.delta0 <= 0.0 {
            return Err(fail("delta0", "global scenario needs delta0 > 0".into()));
        }
        if self.scenario == Scenario::Global && !(self.c0() > 0.0) {
            return Err(fail("c0", format!("must be positive, got {}", self.c0())));
        }
        if !(self.eps > 0.0 && self.eps < 3.0) {
            return Err(fail("eps", format!("must lie in (0, 3), got {}", self.eps)));
        }
        if !(self.record_interval > 0.0 && self.record_interval.is_finite()) {
            return Err(fail("record_interval", format!("must be positive, got {}", self.record_interval)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(fail("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if self.scenario == Scenario::Blowup && !(self.trace_min < 0.0 && self.trace_min.is_finite()) {
            return Err(fail("trace_min", format!("blowup scenario needs trace_min < 0, got {}", self.trace_min)));
        }
        if self.scenario == Scenario::Blowup && !(self.params.b > 0.0) {
            return Err(fail("b", "blowup scenario needs b > 0".into()));
        }
        if let Err(PttError::Parameter { name, reason }) = self.params.validate() {
            let key = if name == "params" { "a" } else { name };
            return Err(fail(key, reason));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(|_| 0)
    }

    /// `key=value` lines that reproduce this configuration.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let v = match key {
                "scenario" => self.scenario.as_str().to_string(),
                "n" => self.n.to_string(),
                "dt" => format!("{:e}", self.dt),
                "t_max" => self.t_max.to_string(),
                "delta0" => self.delta0.to_string(),
                "c0" => match self.c0 {
                    Some(c) => c.to_string(),
                    None => continue,
                },
                "eps_tilde0" => self.eps_tilde0.to_string(),
                "eps" => self.eps.to_string(),
                "a" => self.params.a.to_string(),
                "b" => self.params.b.to_string(),
                "lambda" => self.params.lambda.to_string(),
                "mu" => self.params.mu.to_string(),
                "mu1" => self.params.mu1.to_string(),
                "mu2" => self.params.mu2.to_string(),
                "seed" => self.seed.to_string(),
                "record_interval" => self.record_interval.to_string(),
                "output_dir" => self.output_dir.display().to_string(),
                "trace_min" => self.trace_min.to_string(),
                "particles" => self.particles.to_string(),
                "scheme" => self.scheme.as_str().to_string(),
                "cfl" => self.cfl.to_string(),
                _ => self.threads.to_string(),
            };
            let _ = writeln!(s, "{key}={v}");
        }
        s
    }
}

/// Parses `key=value` lines. `#` starts a comment; blank lines are ignored.
/// `scenario` is mandatory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_entries(text, None)
}

/// Like [`parse_config`] for a scenario chosen elsewhere; a `scenario` key in
/// `text`, if present, must agree with it.
pub fn parse_config_for(text: &str, scenario: Scenario) -> Result<ScenarioConfig> {
    parse_entries(text, Some(scenario))
}

fn parse_entries(text: &str, preset: Option<Scenario>) -> Result<ScenarioConfig> {
    let mut entries: Vec<(String, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| PttError::Config {
            key: body.to_string(),
            line,
            reason: "expected key=value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(PttError::Config {
                key: key.to_string(),
                line,
                reason: "unknown key".into(),
            });
        }
        if entries.iter().any(|(k, _, _)| k == key) {
            return Err(PttError::Config {
                key: key.to_string(),
                line,
                reason: "duplicate key".into(),
            });
        }
        entries.push((key.to_string(), value.to_string(), line));
    }
    let from_text = match entries.iter().find(|(k, _, _)| k == "scenario") {
        Some((_, v, line)) => Some((
            v.parse::<Scenario>().map_err(|e| PttError::Config {
                key: "scenario".into(),
                line: *line,
                reason: e.to_string(),
            })?,
            *line,
        )),
        None => None,
    };
    let scenario = match (preset, from_text) {
        (Some(p), Some((s, line))) if p != s => {
            return Err(PttError::Config {
                key: "scenario".into(),
                line,
                reason: format!("file says `{}` but `{}` was requested", s.as_str(), p.as_str()),
            })
        }
        (Some(p), _) => p,
        (None, Some((s, _))) => s,
        (None, None) => {
            return Err(PttError::Config {
                key: "scenario".into(),
                line: 0,
                reason: "missing mandatory key".into(),
            })
        }
    };
    let mut cfg = ScenarioConfig::new(scenario);
    for (key, value, line) in &entries {
        cfg.set(key, value, *line)?;
    }
    cfg.validate_with(|key| entries.iter().find(|(k, _, _)| k == key).map_or(0, |e| e.2))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_lacks_scenario() {
        match parse_config("") {
            Err(PttError::Config { key, .. }) => assert_eq!(key, "scenario"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blowup_with_small_grid() {
        let cfg = parse_config("scenario=blowup\nn=16").unwrap();
        assert_eq!(cfg.scenario, Scenario::Blowup);
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.eps, 0.1);
        assert_eq!(cfg.record_interval, 0.05);
        assert_eq!(cfg.params, ModelParams::default());
    }

    #[test]
    fn lambda_out_of_range_names_key_and_line() {
        match parse_config("scenario=global\n# preset\nlambda=2\n") {
            Err(PttError::Config { key, line, .. }) => {
                assert_eq!(key, "lambda");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_and_unparsable() {
        assert!(matches!(parse_config("scenario=global\nfoo=1"), Err(PttError::Config { line: 2, .. })));
        assert!(matches!(parse_config("scenario=global\nn=abc"), Err(PttError::Config { line: 2, .. })));
        assert!(matches!(parse_config("scenario=global\nn=15"), Err(PttError::Config { line: 2, .. })));
        assert!(matches!(parse_config("scenario=global\ndelta0=0"), Err(PttError::Config { .. })));
        assert!(matches!(parse_config("scenario=global\nn=16\nn=32"), Err(PttError::Config { line: 3, .. })));
        assert!(matches!(parse_config("scenario=nope"), Err(PttError::Config { line: 1, .. })));
    }

    #[test]
    fn preset_scenario_must_agree() {
        assert_eq!(parse_config_for("n=16", Scenario::Linear).unwrap().scenario, Scenario::Linear);
        assert!(parse_config_for("scenario=linear", Scenario::Linear).is_ok());
        assert!(matches!(
            parse_config_for("scenario=global", Scenario::Linear),
            Err(PttError::Config { line: 1, .. })
        ));
    }

    #[test]
    fn comments_and_echo_round_trip() {
        let cfg = parse_config("# header\nscenario = linear  # inline\n\ndt=5e-4\nseed=7\n").unwrap();
        assert_eq!(cfg.dt, 5e-4);
        assert_eq!(cfg.seed, 7);
        assert_eq!(parse_config(&cfg.echo()).unwrap(), cfg);
    }
}
