//! Run configuration: flat `key = value` files, flag overrides and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ringbump::{Error as CoreError, ProblemParams};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyG,
    Gammas,
    Balance,
    Spectrum,
    Reduce,
    Nondegen,
    ErrorNorm,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyG,
        Command::Gammas,
        Command::Balance,
        Command::Spectrum,
        Command::Reduce,
        Command::Nondegen,
        Command::ErrorNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyG => "verify-g",
            Command::Gammas => "gammas",
            Command::Balance => "balance",
            Command::Spectrum => "spectrum",
            Command::Reduce => "reduce",
            Command::Nondegen => "nondegen",
            Command::ErrorNorm => "error-norm",
        }
    }

    /// Tolerance used when the `tol` key is absent.
    pub fn default_tol(self) -> f64 {
        match self {
            Command::Gammas => 1e-10,
            Command::Reduce => 1e-5,
            _ => 1e-12,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    Type {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("key `{key}`: {reason}")]
    Domain { key: String, reason: String },
    #[error("no command given on the command line or in the config")]
    MissingCommand,
    #[error("cannot read `{path}`: {reason}")]
    Read { path: String, reason: String },
}

impl ConfigError {
    /// Offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey { key } | ConfigError::Type { key, .. } | ConfigError::Domain { key, .. } => {
                Some(key)
            }
            _ => None,
        }
    }
}

/// Recognised keys in canonical order.
pub const KEYS: [&str; 20] = [
    "command",
    "n",
    "m",
    "theta_k",
    "c0",
    "r0",
    "delta",
    "k",
    "lambda_init",
    "sweep",
    "out",
    "seed",
    "tol",
    "grid",
    "n_min",
    "n_max",
    "max_iter",
    "samples",
    "start_amplitude",
    "points",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ProblemParams,
    pub sweep: Option<Vec<usize>>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub tol: f64,
    /// Interior grid size for `verify-g`.
    pub grid: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub max_iter: usize,
    pub samples: usize,
    /// Size of the `reduce` start, in units of `d^{-τ2}`.
    pub start_amplitude: f64,
    /// Write the sampled point cloud for `error-norm`.
    pub points: bool,
}

impl RunConfig {
    /// `k` values of the run: the sweep, or the single configured `k`.
    pub fn ks(&self) -> Vec<usize> {
        self.sweep.clone().unwrap_or_else(|| vec![self.params.k])
    }

    /// Params with `k` replaced.
    pub fn params_for(&self, k: usize) -> ProblemParams {
        ProblemParams { k, ..self.params }
    }

    /// Every key with its value, in canonical order; parsing it back gives the same config.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.params;
        let sweep = self
            .sweep
            .as_ref()
            .map(|s| s.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","))
            .unwrap_or_default();
        vec![
            ("command", self.command.name().to_string()),
            ("n", p.n.to_string()),
            ("m", p.m.to_string()),
            ("theta_k", p.theta_k.to_string()),
            ("c0", p.c0.to_string()),
            ("r0", p.r0.to_string()),
            ("delta", p.delta.to_string()),
            ("k", p.k.to_string()),
            ("lambda_init", p.lambda_init.to_string()),
            ("sweep", sweep),
            ("out", self.output_dir.display().to_string()),
            ("seed", self.seed.to_string()),
            ("tol", self.tol.to_string()),
            ("grid", self.grid.to_string()),
            ("n_min", self.n_min.to_string()),
            ("n_max", self.n_max.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("samples", self.samples.to_string()),
            ("start_amplitude", self.start_amplitude.to_string()),
            ("points", self.points.to_string()),
        ]
    }

    pub fn to_config_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// `key = value` pairs of a config file; later lines win.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn typed<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Type {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn domain(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Domain {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Build a validated config from file pairs followed by override pairs.
pub fn build_config(pairs: &[(String, String)], command: Option<Command>) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<&str, &str> = BTreeMap::new();
    for (key, value) in pairs {
        let known = KEYS
            .iter()
            .find(|k| **k == key.as_str())
            .ok_or_else(|| ConfigError::UnknownKey { key: key.clone() })?;
        map.insert(known, value.as_str());
    }
    let get = |key: &str| map.get(key).copied();
    let command = match command {
        Some(c) => c,
        None => match get("command") {
            Some(v) => v.parse().map_err(|_| ConfigError::Type {
                key: "command".into(),
                value: v.into(),
                expected: "one of verify-g, gammas, balance, spectrum, reduce, nondegen, error-norm",
            })?,
            None => return Err(ConfigError::MissingCommand),
        },
    };

    let mut params = ProblemParams::default();
    macro_rules! field {
        ($key:literal, $slot:expr, $ty:ty, $what:literal) => {
            if let Some(v) = get($key) {
                $slot = typed::<$ty>($key, v, $what)?;
            }
        };
    }
    field!("n", params.n, usize, "a positive integer");
    field!("m", params.m, f64, "a number");
    field!("theta_k", params.theta_k, f64, "a number");
    field!("c0", params.c0, f64, "a number");
    field!("r0", params.r0, f64, "a number");
    field!("delta", params.delta, f64, "a number");
    field!("k", params.k, usize, "a positive integer");
    field!("lambda_init", params.lambda_init, f64, "a number");

    let sweep = match get("sweep") {
        None | Some("") => None,
        Some(v) => Some(
            v.split(',')
                .map(|s| typed::<usize>("sweep", s.trim(), "a comma-separated list of integers"))
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    let mut cfg = RunConfig {
        command,
        params,
        sweep,
        output_dir: PathBuf::from("out"),
        seed: 2024,
        tol: command.default_tol(),
        grid: 2000,
        n_min: 5,
        n_max: 48,
        max_iter: 50,
        samples: 100_000,
        start_amplitude: 0.3,
        points: false,
    };
    if let Some(v) = get("out") {
        cfg.output_dir = PathBuf::from(v);
    }
    field!("seed", cfg.seed, u64, "a non-negative integer");
    field!("tol", cfg.tol, f64, "a number");
    field!("grid", cfg.grid, usize, "a positive integer");
    field!("n_min", cfg.n_min, usize, "a positive integer");
    field!("n_max", cfg.n_max, usize, "a positive integer");
    field!("max_iter", cfg.max_iter, usize, "a positive integer");
    field!("samples", cfg.samples, usize, "a positive integer");
    field!("start_amplitude", cfg.start_amplitude, f64, "a number");
    field!("points", cfg.points, bool, "true or false");
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let core_key = |e: CoreError| match e {
        CoreError::Domain { name, reason } => domain(name, reason),
        other => domain("params", other.to_string()),
    };
    for k in cfg.ks() {
        cfg.params_for(k).validate().map_err(|e| match e {
            CoreError::Domain { name: "k", reason } if cfg.sweep.is_some() => domain("sweep", reason),
            other => core_key(other),
        })?;
    }
    if let Some(s) = &cfg.sweep {
        if s.is_empty() {
            return Err(domain("sweep", "is empty"));
        }
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(domain("tol", format!("must be positive, got {}", cfg.tol)));
    }
    if cfg.grid < 100 {
        return Err(domain("grid", format!("need at least 100 points, got {}", cfg.grid)));
    }
    if cfg.n_min < 5 || cfg.n_max < cfg.n_min {
        return Err(domain(
            "n_max",
            format!("need 5 <= n_min <= n_max, got {}..{}", cfg.n_min, cfg.n_max),
        ));
    }
    if cfg.max_iter == 0 {
        return Err(domain("max_iter", "must be at least 1"));
    }
    if cfg.samples == 0 {
        return Err(domain("samples", "must be at least 1"));
    }
    if !(cfg.start_amplitude >= 0.0 && cfg.start_amplitude.is_finite()) {
        return Err(domain("start_amplitude", "must be finite and non-negative"));
    }
    Ok(())
}

/// Config pairs from a file: a flat `key = value` file, or the `config` object of a
/// `manifest.json` written by an earlier run.
pub fn read_config_file(path: &std::path::Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        let bad = |reason: String| ConfigError::Read {
            path: path.display().to_string(),
            reason,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let obj = value
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| bad("no `config` object".into()))?;
        return obj
            .iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|s| (k.clone(), s.to_string()))
                    .ok_or_else(|| bad(format!("config value for `{k}` is not a string")))
            })
            .collect();
    }
    parse_pairs(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(String, String)> {
        parse_pairs(text).unwrap()
    }

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = build_config(&pairs("n = 5\nm = 2.5\nk = 16 # ring size\n"), Some(Command::Balance)).unwrap();
        assert_eq!(cfg.params, ProblemParams::default());
        assert_eq!(cfg.grid, 2000);
        assert_eq!(cfg.tol, 1e-12);
    }

    #[test]
    fn exponent_outside_window_names_the_key() {
        let err = build_config(&pairs("n = 5\nm = 4\n"), Some(Command::Balance)).unwrap_err();
        assert_eq!(err.key(), Some("m"));
    }

    #[test]
    fn later_pairs_override() {
        let mut p = pairs("k = 16\n");
        p.push(("k".into(), "32".into()));
        assert_eq!(build_config(&p, Some(Command::Spectrum)).unwrap().params.k, 32);
    }

    #[test]
    fn unknown_and_mistyped_keys() {
        let err = build_config(&pairs("kk = 3\n"), Some(Command::Balance)).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { key: "kk".into() });
        let err = build_config(&pairs("k = sixteen\n"), Some(Command::Balance)).unwrap_err();
        assert_eq!(err.key(), Some("k"));
        assert!(matches!(
            parse_pairs("just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn canonical_text_round_trips() {
        let cfg = build_config(&pairs("command = reduce\nsweep = 16, 32\nm = 2.6\nseed = 7\n"), None).unwrap();
        let again = build_config(&pairs(&cfg.to_config_text()), None).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn command_required() {
        assert_eq!(build_config(&[], None).unwrap_err(), ConfigError::MissingCommand);
    }
}
