//! Experiment configuration: a TOML manifest overlaid with command-line flags.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qwalk_core::{CoinSpec, Complex64, PointMassInitialState};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable consulted when neither a flag nor the manifest sets `workers`.
pub const WORKERS_ENV: &str = "QWALK_WORKERS";

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_RATE: f64 = 1.0;
pub const DEFAULT_GRID: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DiscreteMc,
    DiscreteReference,
    DiscreteSeries,
    ContinuousMc,
    ContinuousReference,
    Compare,
    Convergence,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DiscreteMc => "discrete_mc",
            Mode::DiscreteReference => "discrete_reference",
            Mode::DiscreteSeries => "discrete_series",
            Mode::ContinuousMc => "continuous_mc",
            Mode::ContinuousReference => "continuous_reference",
            Mode::Compare => "compare",
            Mode::Convergence => "convergence",
        }
    }

    const ALL: [Mode; 7] = [
        Mode::DiscreteMc,
        Mode::DiscreteReference,
        Mode::DiscreteSeries,
        Mode::ContinuousMc,
        Mode::ContinuousReference,
        Mode::Compare,
        Mode::Convergence,
    ];

    fn is_continuous(self) -> bool {
        matches!(self, Mode::ContinuousMc | Mode::ContinuousReference)
    }

    /// Modes that draw samples and therefore need `0 < λ₂ < 2π`.
    fn samples_discrete(self) -> bool {
        matches!(self, Mode::DiscreteMc | Mode::Compare | Mode::Convergence)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.replace('-', "_");
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                format!("unknown mode '{s}', expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!(
                "unknown format '{other}', expected csv, json or svg"
            )),
        }
    }
}

/// A coin given either by preset name or by its four angles.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CoinChoice {
    Preset(String),
    Angles {
        delta: f64,
        lambda1: f64,
        lambda2: f64,
        lambda3: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub alpha: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

/// Everything a manifest or the command line may set; unset fields fall back
/// to defaults when resolved.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub mode: Option<Mode>,
    pub coin: Option<CoinChoice>,
    pub init: Option<InitSection>,
    pub steps: Option<usize>,
    pub time: Option<f64>,
    pub rate: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub grid: Option<Vec<u64>>,
    pub output: Option<OutputSection>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: PartialConfig) -> PartialConfig {
        let init = match (self.init, top.init) {
            (Some(base), Some(over)) => Some(InitSection {
                alpha: over.alpha.or(base.alpha),
                beta: over.beta.or(base.beta),
            }),
            (base, over) => over.or(base),
        };
        let output = match (self.output, top.output) {
            (Some(base), Some(over)) => Some(OutputSection {
                path: over.path.or(base.path),
                formats: over.formats.or(base.formats),
            }),
            (base, over) => over.or(base),
        };
        PartialConfig {
            mode: top.mode.or(self.mode),
            coin: top.coin.or(self.coin),
            init,
            steps: top.steps.or(self.steps),
            time: top.time.or(self.time),
            rate: top.rate.or(self.rate),
            samples: top.samples.or(self.samples),
            seed: top.seed.or(self.seed),
            workers: top.workers.or(self.workers),
            grid: top.grid.or(self.grid),
            output,
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub coin: CoinSpec,
    pub init: PointMassInitialState,
    pub steps: Option<usize>,
    pub time: Option<f64>,
    pub rate: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub grid: Vec<u64>,
    /// File stem; each format is written to `<stem>.<ext>`. `None` prints the
    /// single requested format to stdout.
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn default_workers() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .ok_or_else(|| config_err(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn check_angle(name: &str, value: f64, allow_zero: bool) -> Result<(), CliError> {
    let ok = value.is_finite() && value < TAU && (value > 0.0 || (allow_zero && value == 0.0));
    if ok {
        Ok(())
    } else {
        let range = if allow_zero { "[0, 2π)" } else { "(0, 2π)" };
        Err(config_err(format!(
            "coin.{name} = {value} is outside the valid range {range}"
        )))
    }
}

/// The `(δ, λ₁, λ₂, λ₃)` preset named `name`.
pub fn preset(name: &str) -> Option<CoinSpec> {
    match name.to_ascii_lowercase().as_str() {
        "hadamard" => Some(CoinSpec::hadamard()),
        "identity" => Some(CoinSpec::new(0.0, 0.0, 0.0, 0.0)),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn resolve(partial: PartialConfig) -> Result<Self, CliError> {
        let mode = partial.mode.ok_or_else(|| config_err("mode is required"))?;

        let coin = match partial
            .coin
            .unwrap_or(CoinChoice::Preset("hadamard".into()))
        {
            CoinChoice::Preset(name) => preset(&name).ok_or_else(|| {
                config_err(format!(
                    "unknown coin preset '{name}', expected hadamard or identity"
                ))
            })?,
            CoinChoice::Angles {
                delta,
                lambda1,
                lambda2,
                lambda3,
            } => {
                check_angle("delta", delta, true)?;
                check_angle("lambda1", lambda1, true)?;
                check_angle("lambda3", lambda3, true)?;
                check_angle("lambda2", lambda2, !mode.samples_discrete())?;
                CoinSpec::new(delta, lambda1, lambda2, lambda3)
            }
        };
        if mode.samples_discrete() && coin.lambda2 == 0.0 {
            check_angle("lambda2", coin.lambda2, false)?;
        }

        let init = {
            let section = partial.init.unwrap_or_default();
            let symmetric = PointMassInitialState::symmetric();
            let pair = |v: Option<[f64; 2]>, fallback: Complex64| {
                v.map_or(fallback, |[re, im]| Complex64::new(re, im))
            };
            let alpha = pair(section.alpha, symmetric.alpha());
            let beta = pair(section.beta, symmetric.beta());
            PointMassInitialState::new(alpha, beta).map_err(|e| config_err(format!("init: {e}")))?
        };

        let (steps, time) = match (mode.is_continuous(), partial.steps, partial.time) {
            (_, Some(_), Some(_)) => return Err(config_err("set either steps or time, not both")),
            (true, Some(_), None) => {
                return Err(config_err(format!("mode {mode} takes time, not steps")))
            }
            (true, None, None) => return Err(config_err(format!("mode {mode} requires time"))),
            (false, None, Some(_)) if mode != Mode::Compare => {
                return Err(config_err(format!("mode {mode} takes steps, not time")))
            }
            (false, None, None) => return Err(config_err(format!("mode {mode} requires steps"))),
            (_, steps, time) => (steps, time),
        };
        if let Some(t) = time {
            if !(t.is_finite() && t >= 0.0) {
                return Err(config_err(format!(
                    "time = {t} must be finite and non-negative"
                )));
            }
        }

        let rate = partial.rate.unwrap_or(DEFAULT_RATE);
        if !(rate.is_finite() && rate > 0.0) {
            return Err(config_err(format!("rate = {rate} must be positive")));
        }
        let samples = partial.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        let workers = match partial.workers {
            Some(0) => return Err(config_err("workers must be at least 1")),
            Some(w) => w,
            None => default_workers()?,
        };
        let grid = partial.grid.unwrap_or_else(|| DEFAULT_GRID.to_vec());
        if mode == Mode::Convergence {
            if grid.len() < 3 {
                return Err(config_err(format!(
                    "grid needs at least 3 sample counts, got {}",
                    grid.len()
                )));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
                return Err(config_err(
                    "grid must be strictly increasing positive sample counts",
                ));
            }
        }

        let output = partial.output.unwrap_or_default();
        let mut formats = output.formats.unwrap_or_else(|| vec![Format::Csv]);
        if formats.is_empty() {
            formats.push(Format::Csv);
        }
        formats.dedup();

        Ok(ExperimentConfig {
            mode,
            coin,
            init,
            steps,
            time,
            rate,
            samples,
            seed: partial.seed.unwrap_or(0),
            workers,
            grid,
            out: output.path,
            formats,
        })
    }
}

/// Parses a real number, also accepting multiples of π such as `pi/4`, `3pi/2` or `1.5π`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim().replace('π', "pi");
    if let Some(pos) = s.find("pi") {
        let coef = match s[..pos].trim().trim_end_matches('*') {
            "" => 1.0,
            "-" => -1.0,
            c => c
                .parse::<f64>()
                .map_err(|_| format!("bad angle '{text}'"))?,
        };
        let rest = s[pos + 2..].trim();
        let den = match rest.strip_prefix('/') {
            Some(d) => d
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("bad angle '{text}'"))?,
            None if rest.is_empty() => 1.0,
            None => return Err(format!("bad angle '{text}'")),
        };
        Ok(coef * std::f64::consts::PI / den)
    } else {
        s.parse::<f64>().map_err(|_| format!("bad angle '{text}'"))
    }
}

/// Parses `δ,λ1,λ2,λ3`.
pub fn parse_angles(text: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected four comma-separated angles, got '{text}'"
        ));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_angle(part)?;
    }
    Ok(out)
}

/// Parses `RE,IM`.
pub fn parse_complex(text: &str) -> Result<[f64; 2], String> {
    match text.split(',').collect::<Vec<_>>()[..] {
        [re, im] => {
            let re = re
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("bad real part in '{text}'"))?;
            let im = im
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("bad imaginary part in '{text}'"))?;
            Ok([re, im])
        }
        _ => Err(format!("expected RE,IM, got '{text}'")),
    }
}
