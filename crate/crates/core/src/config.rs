//! Flat `key = value` run configuration with strict validation: unknown keys
//! and out-of-range values are hard errors, reported with their line number.

use crate::jump::{LevelScheme, StopCriterion, TrajectoryConfig};
use crate::quad::QuadratureConfig;
use crate::resonance::ResonancePole;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?}: value {value} out of range ({reason})")]
    Range {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },
    #[error("mode {mode:?} requires key {key:?}")]
    MissingKey { mode: String, key: String },
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    #[error("exactly one of run.duration and run.target_dark_periods must be set")]
    StopCriterion,
}

/// Pipeline stage selected by the CLI subcommand (or a `mode` key).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Detect,
    Survival,
    Fit,
    Gamow,
    Hardy,
    Report,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "simulate" => Mode::Simulate,
            "detect" => Mode::Detect,
            "survival" => Mode::Survival,
            "fit" => Mode::Fit,
            "gamow" => Mode::Gamow,
            "hardy" => Mode::Hardy,
            "report" => Mode::Report,
            other => return Err(ConfigError::UnknownMode(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Detect => "detect",
            Mode::Survival => "survival",
            Mode::Fit => "fit",
            Mode::Gamow => "gamow",
            Mode::Hardy => "hardy",
            Mode::Report => "report",
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "mode",
    "hbar",
    "seed",
    "scheme.bright_rate",
    "scheme.shelve_rate",
    "scheme.unshelve_rate",
    "scheme.intermediate_lifetime",
    "run.bin_width",
    "run.duration",
    "run.target_dark_periods",
    "run.detection_efficiency",
    "detect.threshold_frac",
    "detect.min_dark_bins",
    "survival.bin",
    "survival.t_max",
    "survival.tau",
    "pole.e_r",
    "pole.gamma",
    "pole.residue_re",
    "pole.residue_im",
    "grid.center",
    "grid.half_span",
    "grid.points",
    "test.pole_re",
    "test.pole_im",
    "gamow.t_min",
    "gamow.t_max",
    "gamow.steps",
    "hardy.tol",
    "hardy.evolve_t",
    "quad.abs_tol",
    "quad.max_evals",
    "io.trace",
    "io.dark",
    "io.survival",
    "io.wavefunction",
];

/// Parsed and type-checked configuration. Which keys must be present depends
/// on the mode; `validated_for` enforces that before a run starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub hbar: f64,
    pub seed: Option<u64>,
    pub bright_rate: Option<f64>,
    pub shelve_rate: Option<f64>,
    pub unshelve_rate: Option<f64>,
    pub intermediate_lifetime: f64,
    pub bin_width: f64,
    pub duration: Option<f64>,
    pub target_dark_periods: Option<u64>,
    pub detection_efficiency: f64,
    pub threshold_frac: f64,
    pub min_dark_bins: usize,
    pub survival_bin: f64,
    pub survival_t_max: Option<f64>,
    pub survival_tau: Option<f64>,
    pub pole_e_r: Option<f64>,
    pub pole_gamma: Option<f64>,
    pub pole_residue: Complex64,
    pub grid_center: Option<f64>,
    pub grid_half_span: Option<f64>,
    pub grid_points: usize,
    pub test_pole: Option<Complex64>,
    pub gamow_t_min: f64,
    pub gamow_t_max: Option<f64>,
    pub gamow_steps: usize,
    pub hardy_tol: f64,
    pub hardy_evolve_t: Option<f64>,
    pub quad: QuadratureConfig,
    pub io_trace: Option<PathBuf>,
    pub io_dark: Option<PathBuf>,
    pub io_survival: Option<PathBuf>,
    pub io_wavefunction: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: None,
            hbar: 1.0,
            seed: None,
            bright_rate: None,
            shelve_rate: None,
            unshelve_rate: None,
            intermediate_lifetime: 0.0,
            bin_width: 1.0,
            duration: None,
            target_dark_periods: None,
            detection_efficiency: 1.0,
            threshold_frac: 0.2,
            min_dark_bins: 1,
            survival_bin: 10.0,
            survival_t_max: None,
            survival_tau: None,
            pole_e_r: None,
            pole_gamma: None,
            pole_residue: Complex64::new(1.0, 0.0),
            grid_center: None,
            grid_half_span: None,
            grid_points: 1 << 14,
            test_pole: None,
            gamow_t_min: 0.0,
            gamow_t_max: None,
            gamow_steps: 20,
            hardy_tol: 1e-4,
            hardy_evolve_t: None,
            quad: QuadratureConfig::default(),
            io_trace: None,
            io_dark: None,
            io_survival: None,
            io_wavefunction: None,
        }
    }
}

struct RawEntry {
    line: usize,
    value: String,
}

fn range_err(line: usize, key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Range {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn get_f64(
    map: &BTreeMap<String, RawEntry>,
    key: &str,
    check: impl Fn(f64) -> bool,
    reason: &str,
) -> Result<Option<f64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(e) => {
            let v: f64 = e
                .value
                .parse()
                .map_err(|_| range_err(e.line, key, &e.value, "not a number"))?;
            if !v.is_finite() || !check(v) {
                return Err(range_err(e.line, key, &e.value, reason));
            }
            Ok(Some(v))
        }
    }
}

fn get_u64(
    map: &BTreeMap<String, RawEntry>,
    key: &str,
    check: impl Fn(u64) -> bool,
    reason: &str,
) -> Result<Option<u64>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(e) => {
            let v: u64 = e
                .value
                .parse()
                .map_err(|_| range_err(e.line, key, &e.value, "not a non-negative integer"))?;
            if !check(v) {
                return Err(range_err(e.line, key, &e.value, reason));
            }
            Ok(Some(v))
        }
    }
}

/// Parse `key = value` lines (UTF-8, `#` comments) into a validated
/// [`RunConfig`]. Unknown keys, duplicate keys, and range violations fail.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map: BTreeMap<String, RawEntry> = BTreeMap::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            reason: "expected `key = value`".to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                reason: format!("empty value for key {key:?}"),
            });
        }
        if map.insert(key.clone(), RawEntry { line, value }).is_some() {
            return Err(ConfigError::Parse {
                line,
                reason: format!("duplicate key {key:?}"),
            });
        }
    }

    let mut cfg = RunConfig::default();

    if let Some(e) = map.get("mode") {
        cfg.mode = Some(Mode::parse(&e.value)?);
    }
    if let Some(v) = get_f64(&map, "hbar", |v| v > 0.0, "must be > 0")? {
        cfg.hbar = v;
    }
    cfg.seed = get_u64(&map, "seed", |_| true, "")?;

    cfg.bright_rate = get_f64(&map, "scheme.bright_rate", |v| v >= 0.0, "must be >= 0")?;
    cfg.shelve_rate = get_f64(&map, "scheme.shelve_rate", |v| v >= 0.0, "must be >= 0")?;
    cfg.unshelve_rate = get_f64(&map, "scheme.unshelve_rate", |v| v > 0.0, "must be > 0")?;
    if let Some(v) = get_f64(
        &map,
        "scheme.intermediate_lifetime",
        |v| v >= 0.0,
        "must be >= 0",
    )? {
        cfg.intermediate_lifetime = v;
    }

    if let Some(v) = get_f64(&map, "run.bin_width", |v| v > 0.0, "must be > 0")? {
        cfg.bin_width = v;
    }
    cfg.duration = get_f64(&map, "run.duration", |v| v > 0.0, "must be > 0")?;
    cfg.target_dark_periods =
        get_u64(&map, "run.target_dark_periods", |v| v >= 1, "must be >= 1")?;
    if let Some(v) = get_f64(
        &map,
        "run.detection_efficiency",
        |v| v > 0.0 && v <= 1.0,
        "must lie in (0, 1]",
    )? {
        cfg.detection_efficiency = v;
    }

    if let Some(v) = get_f64(
        &map,
        "detect.threshold_frac",
        |v| v > 0.0 && v < 1.0,
        "must lie in (0, 1)",
    )? {
        cfg.threshold_frac = v;
    }
    if let Some(v) = get_u64(&map, "detect.min_dark_bins", |v| v >= 1, "must be >= 1")? {
        cfg.min_dark_bins = v as usize;
    }

    if let Some(v) = get_f64(&map, "survival.bin", |v| v > 0.0, "must be > 0")? {
        cfg.survival_bin = v;
    }
    cfg.survival_t_max = get_f64(&map, "survival.t_max", |v| v > 0.0, "must be > 0")?;
    cfg.survival_tau = get_f64(&map, "survival.tau", |v| v > 0.0, "must be > 0")?;

    cfg.pole_e_r = get_f64(&map, "pole.e_r", |_| true, "")?;
    cfg.pole_gamma = get_f64(&map, "pole.gamma", |v| v > 0.0, "must be > 0")?;
    let res_re = get_f64(&map, "pole.residue_re", |_| true, "")?;
    let res_im = get_f64(&map, "pole.residue_im", |_| true, "")?;
    if res_re.is_some() || res_im.is_some() {
        cfg.pole_residue = Complex64::new(res_re.unwrap_or(1.0), res_im.unwrap_or(0.0));
    }

    cfg.grid_center = get_f64(&map, "grid.center", |_| true, "")?;
    cfg.grid_half_span = get_f64(&map, "grid.half_span", |v| v > 0.0, "must be > 0")?;
    if let Some(v) = get_u64(
        &map,
        "grid.points",
        |v| v >= 8 && v.is_power_of_two(),
        "must be a power of two >= 8",
    )? {
        cfg.grid_points = v as usize;
    }

    let tp_re = get_f64(&map, "test.pole_re", |_| true, "")?;
    let tp_im = get_f64(&map, "test.pole_im", |v| v != 0.0, "must be off the real axis")?;
    if tp_re.is_some() || tp_im.is_some() {
        cfg.test_pole = Some(Complex64::new(
            tp_re.unwrap_or(0.0),
            tp_im.unwrap_or(1.0),
        ));
    }

    if let Some(v) = get_f64(&map, "gamow.t_min", |_| true, "")? {
        cfg.gamow_t_min = v;
    }
    cfg.gamow_t_max = get_f64(&map, "gamow.t_max", |v| v > 0.0, "must be > 0")?;
    if let Some(v) = get_u64(&map, "gamow.steps", |v| v >= 1, "must be >= 1")? {
        cfg.gamow_steps = v as usize;
    }

    if let Some(v) = get_f64(
        &map,
        "hardy.tol",
        |v| v > 0.0 && v < 0.5,
        "must lie in (0, 0.5)",
    )? {
        cfg.hardy_tol = v;
    }
    cfg.hardy_evolve_t = get_f64(&map, "hardy.evolve_t", |_| true, "")?;

    if let Some(v) = get_f64(&map, "quad.abs_tol", |v| v > 0.0, "must be > 0")? {
        cfg.quad.abs_tol = v;
    }
    if let Some(v) = get_u64(&map, "quad.max_evals", |v| v >= 15, "must be >= 15")? {
        cfg.quad.max_evals = v as usize;
    }

    for (key, slot) in [
        ("io.trace", &mut cfg.io_trace),
        ("io.dark", &mut cfg.io_dark),
        ("io.survival", &mut cfg.io_survival),
        ("io.wavefunction", &mut cfg.io_wavefunction),
    ] {
        if let Some(e) = map.get(key) {
            *slot = Some(PathBuf::from(&e.value));
        }
    }

    if cfg.duration.is_some() && cfg.target_dark_periods.is_some() {
        return Err(ConfigError::StopCriterion);
    }

    Ok(cfg)
}

impl RunConfig {
    fn require<T: Copy>(&self, v: Option<T>, mode: Mode, key: &str) -> Result<T, ConfigError> {
        v.ok_or_else(|| ConfigError::MissingKey {
            mode: mode.name().to_string(),
            key: key.to_string(),
        })
    }

    /// Check that every key the mode needs is present; returns the mode.
    pub fn validated_for(&self, mode: Mode) -> Result<Mode, ConfigError> {
        match mode {
            Mode::Simulate | Mode::Report => {
                self.require(self.seed, mode, "seed")?;
                self.require(self.bright_rate, mode, "scheme.bright_rate")?;
                self.require(self.shelve_rate, mode, "scheme.shelve_rate")?;
                self.require(self.unshelve_rate, mode, "scheme.unshelve_rate")?;
                if self.duration.is_none() && self.target_dark_periods.is_none() {
                    return Err(ConfigError::StopCriterion);
                }
            }
            Mode::Detect => {
                self.require(self.io_trace.as_deref(), mode, "io.trace")?;
            }
            Mode::Survival => {
                self.require(self.io_dark.as_deref(), mode, "io.dark")?;
            }
            Mode::Fit => {
                self.require(self.io_survival.as_deref(), mode, "io.survival")?;
            }
            Mode::Gamow => {
                self.require(self.pole_e_r, mode, "pole.e_r")?;
                self.require(self.pole_gamma, mode, "pole.gamma")?;
            }
            Mode::Hardy => {
                if self.io_wavefunction.is_none() {
                    self.require(self.pole_e_r, mode, "pole.e_r")?;
                    self.require(self.pole_gamma, mode, "pole.gamma")?;
                }
            }
        }
        Ok(mode)
    }

    /// Level scheme assembled from the `scheme.*` keys; callers must have
    /// validated presence first.
    pub fn level_scheme(&self) -> Result<LevelScheme, ConfigError> {
        let scheme = LevelScheme::new(
            self.bright_rate.unwrap_or(0.0),
            self.shelve_rate.unwrap_or(0.0),
            self.unshelve_rate.unwrap_or(0.0),
        )
        .and_then(|s| s.with_intermediate_lifetime(self.intermediate_lifetime))
        .map_err(|e| ConfigError::Range {
            line: 0,
            key: "scheme".to_string(),
            value: String::new(),
            reason: e.to_string(),
        })?;
        Ok(scheme)
    }

    pub fn trajectory_config(&self) -> Result<TrajectoryConfig, ConfigError> {
        let stop = match (self.duration, self.target_dark_periods) {
            (Some(d), None) => StopCriterion::Duration(d),
            (None, Some(m)) => StopCriterion::TargetDarkPeriods(m),
            _ => return Err(ConfigError::StopCriterion),
        };
        let seed = self.seed.ok_or_else(|| ConfigError::MissingKey {
            mode: "simulate".to_string(),
            key: "seed".to_string(),
        })?;
        Ok(TrajectoryConfig::new(seed, stop)
            .with_bin_width(self.bin_width)
            .with_detection_efficiency(self.detection_efficiency))
    }

    pub fn pole(&self) -> Result<ResonancePole, ConfigError> {
        let e_r = self.pole_e_r.unwrap_or(0.0);
        let gamma = self.pole_gamma.unwrap_or(0.0);
        ResonancePole::new(e_r, gamma)
            .map(|p| p.with_residue(self.pole_residue))
            .map_err(|e| ConfigError::Range {
                line: 0,
                key: "pole.gamma".to_string(),
                value: gamma.to_string(),
                reason: e.to_string(),
            })
    }
}
