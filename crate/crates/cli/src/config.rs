//! Declarative experiment configs. Frequencies in Hz, times in seconds and
//! angles in degrees; conversion to angular units happens here.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use pseudospin::{ParamError, ParamsHz, PhysicalParams};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("params: {0}")]
    Params(#[from] ParamError),
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fid,
    PowerSweep,
    NSweep,
    S11Map,
    DelayFit,
    OracleCompare,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fid => "fid",
            Self::PowerSweep => "power_sweep",
            Self::NSweep => "n_sweep",
            Self::S11Map => "s11_map",
            Self::DelayFit => "delay_fit",
            Self::OracleCompare => "oracle_compare",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: ExperimentKind,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    parallelism: Option<usize>,
    #[serde(default)]
    params: ParamsBlock,
    #[serde(default)]
    experiment: toml::Table,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// `[params]`: a preset, explicit values, or a preset with overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub preset: Option<String>,
    pub cavity_freq_hz: Option<f64>,
    pub spin_freq_hz: Option<f64>,
    pub coupling_hz: Option<f64>,
    pub n_spins: Option<f64>,
    pub kappa_int_hz: Option<f64>,
    pub kappa_ext_hz: Option<f64>,
    pub gamma_hz: Option<f64>,
    pub frame_freq_hz: Option<f64>,
}

impl ParamsBlock {
    fn fields(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("cavity_freq_hz", self.cavity_freq_hz),
            ("spin_freq_hz", self.spin_freq_hz),
            ("coupling_hz", self.coupling_hz),
            ("n_spins", self.n_spins),
            ("kappa_int_hz", self.kappa_int_hz),
            ("kappa_ext_hz", self.kappa_ext_hz),
            ("gamma_hz", self.gamma_hz),
            ("frame_freq_hz", self.frame_freq_hz),
        ]
    }

    /// Resolved parameters in Hz. Explicit values override the preset and
    /// each override is logged.
    pub fn resolve(&self) -> Result<ParamsHz, ConfigError> {
        let mut hz = match &self.preset {
            Some(name) => PhysicalParams::preset(name)?.to_hz(),
            None => {
                let missing: Vec<&str> = self.fields().iter().filter(|f| f.1.is_none()).map(|f| f.0).collect();
                if !missing.is_empty() {
                    return Err(field_err(
                        "params",
                        format!("no preset given and missing {}", missing.join(", ")),
                    ));
                }
                ParamsHz::paper_2016()
            }
        };
        let slots: [&mut f64; 8] = [
            &mut hz.cavity_freq_hz,
            &mut hz.spin_freq_hz,
            &mut hz.coupling_hz,
            &mut hz.n_spins,
            &mut hz.kappa_int_hz,
            &mut hz.kappa_ext_hz,
            &mut hz.gamma_hz,
            &mut hz.frame_freq_hz,
        ];
        for ((name, value), slot) in self.fields().into_iter().zip(slots) {
            if let Some(v) = value {
                if let Some(preset) = &self.preset {
                    log::info!("params.{name} = {v:e} overrides preset {preset} value {:e}", *slot);
                }
                *slot = v;
            }
        }
        hz.to_angular().validate()?;
        Ok(hz)
    }
}

/// Pulse and recording settings shared by the FID-based experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    pub pulse_s: f64,
    pub t_total_s: f64,
    pub output_dt_s: f64,
    pub dead_time_s: f64,
    pub drive_phase_deg: f64,
    /// Calibration tolerance on the tip angle.
    pub theta_tol_deg: f64,
}

impl Timing {
    const KEYS: [&'static str; 6] = [
        "pulse_s",
        "t_total_s",
        "output_dt_s",
        "dead_time_s",
        "drive_phase_deg",
        "theta_tol_deg",
    ];

    fn check(&self) -> Result<(), ConfigError> {
        positive("experiment.pulse_s", self.pulse_s)?;
        positive("experiment.t_total_s", self.t_total_s)?;
        positive("experiment.output_dt_s", self.output_dt_s)?;
        positive("experiment.theta_tol_deg", self.theta_tol_deg)?;
        if !(self.dead_time_s >= 0.0 && self.dead_time_s < self.t_total_s) {
            return Err(field_err("experiment.dead_time_s", "must lie in [0, t_total_s)"));
        }
        if self.pulse_s >= self.t_total_s {
            return Err(field_err("experiment.pulse_s", "must be shorter than t_total_s"));
        }
        finite("experiment.drive_phase_deg", self.drive_phase_deg)
    }
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            pulse_s: 200e-9,
            t_total_s: 30e-6,
            output_dt_s: 5e-9,
            dead_time_s: 3e-6,
            drive_phase_deg: 0.0,
            theta_tol_deg: 0.05,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_err(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field_err(field, "must be finite"))
    }
}

/// A list of angles, either explicit or `start..=stop` in `points` steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleGrid {
    pub theta_deg: Option<Vec<f64>>,
    pub theta_start_deg: Option<f64>,
    pub theta_stop_deg: Option<f64>,
    pub theta_points: Option<usize>,
}

impl AngleGrid {
    const KEYS: [&'static str; 4] = ["theta_deg", "theta_start_deg", "theta_stop_deg", "theta_points"];

    pub fn degrees(&self) -> Result<Vec<f64>, ConfigError> {
        let range = (self.theta_start_deg, self.theta_stop_deg, self.theta_points);
        let grid = match (&self.theta_deg, range) {
            (Some(list), (None, None, None)) => list.clone(),
            (None, (Some(a), Some(b), Some(n))) => linspace(a, b, n),
            _ => {
                return Err(field_err(
                    "experiment.theta_deg",
                    "give either theta_deg = [...] or all of theta_start_deg, theta_stop_deg, theta_points",
                ))
            }
        };
        if grid.is_empty() || grid.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(field_err("experiment.theta_deg", "angles must be positive and finite"));
        }
        Ok(grid)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidSpec {
    /// Target tip angle; the pulse amplitude is calibrated to reach it.
    pub theta_deg: Option<f64>,
    /// Fixed drive amplitude `V / 2π`; bypasses calibration.
    pub drive_amplitude_hz: Option<f64>,
    #[serde(skip_deserializing)]
    pub timing: Timing,
}

/// Rejects any leftover keys.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(skip_deserializing)]
    pub grid: AngleGrid,
    #[serde(skip_deserializing)]
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldFixed {
    /// Single-spin coupling `g` is fixed; the splitting grows as `sqrt(N)`.
    #[default]
    Coupling,
    /// Collective coupling `g sqrt(N)` is fixed.
    Collective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NSweepSpec {
    pub n_start: f64,
    pub n_stop: f64,
    pub n_points: usize,
    #[serde(default = "default_theta")]
    pub theta_deg: f64,
    #[serde(default)]
    pub hold_fixed: HoldFixed,
    #[serde(skip_deserializing)]
    pub timing: Timing,
}

fn default_theta() -> f64 {
    90.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct S11MapSpec {
    /// Spin detuning from the cavity, Hz.
    pub detuning_start_hz: f64,
    pub detuning_stop_hz: f64,
    pub detuning_points: usize,
    /// Probe grid centred on the cavity frequency.
    #[serde(default = "S11MapSpec::default_half_span")]
    pub probe_half_span_hz: f64,
    #[serde(default = "S11MapSpec::default_probe_points")]
    pub probe_points: usize,
}

impl S11MapSpec {
    fn default_half_span() -> f64 {
        1.5e6
    }
    fn default_probe_points() -> usize {
        3001
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayFitSpec {
    #[serde(skip_deserializing)]
    pub grid: AngleGrid,
    #[serde(default = "default_theta")]
    pub baseline_theta_deg: f64,
    #[serde(skip_deserializing)]
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCompareSpec {
    /// Initial spin-coherent tip angle (no pulse is simulated).
    #[serde(default = "default_theta")]
    pub theta_deg: f64,
    #[serde(default)]
    pub spin_phase_deg: f64,
    /// Initial coherent cavity amplitude.
    #[serde(default)]
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    /// Fock cutoff; defaults to `n_spins + |alpha|² + 6 sqrt(|alpha|² + 1) + 4`.
    pub n_max: Option<usize>,
    pub t_total_s: f64,
    pub output_dt_s: f64,
    /// Include cavity loss and dephasing (Lindblad evolution).
    #[serde(default = "default_true")]
    pub dissipative: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Fid(FidSpec),
    PowerSweep(SweepSpec),
    NSweep(NSweepSpec),
    S11Map(S11MapSpec),
    DelayFit(DelayFitSpec),
    OracleCompare(OracleCompareSpec),
}

/// Fully validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output_dir: PathBuf,
    pub parallelism: Option<usize>,
    pub params: ParamsHz,
    pub experiment: ExperimentSpec,
}

fn block<T: DeserializeOwned>(table: toml::Table) -> Result<T, ConfigError> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| field_err("experiment", e.message().trim().to_string()))
}

/// Moves `keys` out of `table` into a new table.
fn take_keys(table: &mut toml::Table, keys: &[&str]) -> toml::Table {
    keys.iter()
        .filter_map(|k| table.remove(*k).map(|v| (k.to_string(), v)))
        .collect()
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    /// Parses and validates config text. Relative output paths are kept as is.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        let params = raw.params.resolve()?;
        if raw.parallelism == Some(0) {
            return Err(field_err("parallelism", "must be at least 1"));
        }
        let mut table = raw.experiment;
        let mut timing = || -> Result<Timing, ConfigError> { block(take_keys(&mut table, &Timing::KEYS)) };
        let experiment = match raw.kind {
            ExperimentKind::Fid => {
                let timing = timing()?;
                ExperimentSpec::Fid(FidSpec { timing, ..block(table)? })
            }
            ExperimentKind::PowerSweep => {
                let timing = timing()?;
                let grid = block(take_keys(&mut table, &AngleGrid::KEYS))?;
                let _: Empty = block(table)?;
                ExperimentSpec::PowerSweep(SweepSpec { grid, timing })
            }
            ExperimentKind::NSweep => {
                let timing = timing()?;
                ExperimentSpec::NSweep(NSweepSpec { timing, ..block(table)? })
            }
            ExperimentKind::S11Map => ExperimentSpec::S11Map(block(table)?),
            ExperimentKind::DelayFit => {
                let timing = timing()?;
                let grid = block(take_keys(&mut table, &AngleGrid::KEYS))?;
                ExperimentSpec::DelayFit(DelayFitSpec {
                    grid,
                    timing,
                    ..block(table)?
                })
            }
            ExperimentKind::OracleCompare => ExperimentSpec::OracleCompare(block(table)?),
        };
        let cfg = Self {
            kind: raw.kind,
            output_dir: raw.output_dir,
            parallelism: raw.parallelism,
            params,
            experiment,
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        match &self.experiment {
            ExperimentSpec::Fid(s) => {
                s.timing.check()?;
                match (s.theta_deg, s.drive_amplitude_hz) {
                    (Some(t), None) => positive("experiment.theta_deg", t),
                    (None, Some(v)) if v.is_finite() && v >= 0.0 => Ok(()),
                    (None, Some(_)) => Err(field_err("experiment.drive_amplitude_hz", "must be finite and >= 0")),
                    _ => Err(field_err("experiment", "give exactly one of theta_deg, drive_amplitude_hz")),
                }
            }
            ExperimentSpec::PowerSweep(s) => {
                s.timing.check()?;
                s.grid.degrees().map(|_| ())
            }
            ExperimentSpec::NSweep(s) => {
                s.timing.check()?;
                positive("experiment.n_start", s.n_start)?;
                positive("experiment.n_stop", s.n_stop)?;
                positive("experiment.theta_deg", s.theta_deg)?;
                if s.n_points < 2 {
                    return Err(field_err("experiment.n_points", "need at least 2 points"));
                }
                Ok(())
            }
            ExperimentSpec::S11Map(s) => {
                finite("experiment.detuning_start_hz", s.detuning_start_hz)?;
                finite("experiment.detuning_stop_hz", s.detuning_stop_hz)?;
                positive("experiment.probe_half_span_hz", s.probe_half_span_hz)?;
                if s.detuning_points == 0 {
                    return Err(field_err("experiment.detuning_points", "need at least 1 point"));
                }
                if s.probe_points < 3 {
                    return Err(field_err("experiment.probe_points", "need at least 3 points"));
                }
                Ok(())
            }
            ExperimentSpec::DelayFit(s) => {
                s.timing.check()?;
                positive("experiment.baseline_theta_deg", s.baseline_theta_deg)?;
                let grid = s.grid.degrees()?;
                if grid.len() < 4 || grid.iter().any(|&t| t >= 180.0) {
                    return Err(field_err("experiment.theta_deg", "need at least 4 angles below 180°"));
                }
                Ok(())
            }
            ExperimentSpec::OracleCompare(s) => {
                positive("experiment.t_total_s", s.t_total_s)?;
                positive("experiment.output_dt_s", s.output_dt_s)?;
                finite("experiment.theta_deg", s.theta_deg)?;
                finite("experiment.alpha_re", s.alpha_re)?;
                finite("experiment.alpha_im", s.alpha_im)?;
                let n = self.params.n_spins;
                if n.fract() != 0.0 || n > 1e4 {
                    return Err(field_err("params.n_spins", "oracle_compare needs a small integer spin count"));
                }
                Ok(())
            }
        }
    }

    pub fn physical(&self) -> PhysicalParams {
        self.params.to_angular()
    }
}
