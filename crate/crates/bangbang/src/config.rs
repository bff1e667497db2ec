//! Run configuration: TOML schema, defaults and validation.
//!
//! Every problem is reported with the line of the offending key when it
//! can be located in the source text.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    RatesParallel,
    RatesPerp,
    Trajectory,
    Echo,
    GeneratorAudit,
    ExtractTauc,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::RatesParallel => "rates-parallel",
            Self::RatesPerp => "rates-perp",
            Self::Trajectory => "trajectory",
            Self::Echo => "echo",
            Self::GeneratorAudit => "generator-audit",
            Self::ExtractTauc => "extract-tauc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Longitudinal,
    Transverse,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "T2", skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_c: Option<f64>,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_cut: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_ext: Option<f64>,
    #[serde(rename = "Delta", skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
    /// Two-column `(ω, γ)` file replacing the analytic bath.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    Omega,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + s * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameName {
    #[default]
    Lab,
    Rotating,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Engine,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub t_end: f64,
    pub points: usize,
    pub x0: [f64; 3],
    #[serde(default)]
    pub frame: FrameName,
    #[serde(default)]
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleName {
    Gaussian,
    Uniform,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoConfig {
    pub ensemble: EnsembleName,
    /// `σ` for gaussian, half-width for uniform.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    /// `[δ, weight]` pairs for discrete.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[f64; 2]>>,
    /// Replace the ensemble by this many seeded draws.
    #[serde(default)]
    pub monte_carlo: usize,
    pub t_end: f64,
    pub points: usize,
    pub x0: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractConfig {
    pub measurements: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub echo: Option<EchoConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extract: Option<ExtractConfig>,
}

/// 1-based line of `key` inside `[section]` (top level when `section` is
/// empty), or of the section header when the key is absent.
pub fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current != section {
            continue;
        }
        if let Some((k, _)) = line.split_once('=') {
            if k.trim().trim_matches('"') == key {
                return Some(i + 1);
            }
        }
    }
    header
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Resolved model: defaults applied and derived quantities filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub coupling: Coupling,
    pub t2: Option<f64>,
    pub tau_c: Option<f64>,
    pub a: Option<f64>,
    pub omega_cut: Option<f64>,
    pub beta: f64,
    pub omega0: f64,
    pub omega_ext: f64,
    pub delta: f64,
    pub lambda: f64,
    pub period: Option<f64>,
    pub spectral_file: Option<PathBuf>,
    pub rel_tol: f64,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub model: Model,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl Resolved {
    pub fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.path(&self.config.output)
    }

    /// Resolved configuration as TOML, for the output header.
    pub fn to_toml(&self) -> String {
        let mut c = self.config.clone();
        let m = &self.model;
        c.model = ModelConfig {
            t2: m.t2,
            tau_c: m.tau_c,
            a: m.a,
            omega_cut: m.omega_cut,
            beta: Some(m.beta),
            omega0: Some(m.omega0),
            omega_ext: Some(m.omega_ext),
            delta: Some(m.delta),
            lambda: Some(m.lambda),
            period: m.period,
            coupling: Some(m.coupling),
            spectral_file: m.spectral_file.clone(),
            rel_tol: Some(m.rel_tol),
        };
        toml::to_string(&c).unwrap_or_default()
    }
}

struct Checker<'a> {
    src: &'a str,
    scenario: Scenario,
}

impl Checker<'_> {
    fn err(&self, section: &str, key: &str, message: String) -> ConfigError {
        ConfigError { line: locate(self.src, section, key), message }
    }

    fn need<T: Copy>(&self, v: Option<T>, section: &str, key: &str) -> Result<T, ConfigError> {
        v.ok_or_else(|| self.err(section, key, format!("scenario {} needs [{section}] {key}", self.scenario.name())))
    }

    fn positive(&self, v: f64, section: &str, key: &str) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("[{section}] {key} must be positive and finite, got {v}")))
        }
    }

    fn finite(&self, v: f64, section: &str, key: &str) -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("[{section}] {key} must be finite, got {v}")))
        }
    }

    fn section<'b, T>(&self, v: &'b Option<T>, name: &str) -> Result<&'b T, ConfigError> {
        v.as_ref().ok_or_else(|| ConfigError {
            line: None,
            message: format!("scenario {} needs a [{name}] section", self.scenario.name()),
        })
    }

    fn bloch(&self, x: [f64; 3], section: &str) -> Result<(), ConfigError> {
        let n2: f64 = x.iter().map(|v| v * v).sum();
        if x.iter().any(|v| !v.is_finite()) || n2 > 1.0 + 1e-12 {
            return Err(self.err(section, "x0", format!("[{section}] x0 must lie in the unit ball, |x0|² = {n2}")));
        }
        Ok(())
    }

    fn samples(&self, points: usize, t_end: f64, section: &str) -> Result<(), ConfigError> {
        if points == 0 {
            return Err(self.err(section, "points", format!("[{section}] points must be at least 1")));
        }
        self.positive(t_end, section, "t_end").map(|_| ())
    }
}

/// Parse and validate a configuration. `base_dir` anchors relative paths.
pub fn parse(src: &str, base_dir: &Path) -> Result<Resolved, ConfigError> {
    let config: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of_offset(src, s.start)),
        message: e.message().to_string(),
    })?;
    let ck = Checker { src, scenario: config.scenario };
    if config.schema_version != SCHEMA_VERSION {
        return Err(ck.err("", "schema_version", format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", config.schema_version)));
    }
    let m = &config.model;
    let sc = config.scenario;

    let coupling = match (m.coupling, sc) {
        (Some(c), _) => c,
        (None, Scenario::RatesPerp) => Coupling::Transverse,
        (None, _) => Coupling::Longitudinal,
    };
    let beta = m.beta.unwrap_or(f64::INFINITY);
    if !(beta > 0.0) {
        return Err(ck.err("model", "beta", format!("[model] beta must be positive or inf, got {beta}")));
    }
    let lambda = m.lambda.unwrap_or(FRAC_PI_2);
    ck.finite(lambda, "model", "lambda")?;
    let rel_tol = ck.positive(m.rel_tol.unwrap_or(1e-10), "model", "rel_tol")?;

    // ω0 = ω_ext + Δ; any two determine the third
    let (omega0, omega_ext, delta) = match (m.omega0, m.omega_ext, m.delta) {
        (Some(w0), Some(we), Some(d)) => {
            if (w0 - we - d).abs() > 1e-12 * w0.abs().max(1.0) {
                return Err(ck.err("model", "Delta", format!("[model] Delta = {d} contradicts omega0 - omega_ext = {}", w0 - we)));
            }
            (w0, we, d)
        }
        (Some(w0), Some(we), None) => (w0, we, w0 - we),
        (Some(w0), None, d) => (w0, w0 - d.unwrap_or(0.0), d.unwrap_or(0.0)),
        (None, Some(we), d) => (we + d.unwrap_or(0.0), we, d.unwrap_or(0.0)),
        (None, None, d) => (d.unwrap_or(0.0), 0.0, d.unwrap_or(0.0)),
    };
    ck.finite(omega0, "model", "omega0")?;
    ck.finite(omega_ext, "model", "omega_ext")?;

    for (v, key) in [(m.t2, "T2"), (m.tau_c, "tau_c"), (m.a, "A"), (m.omega_cut, "omega_cut"), (m.period, "T")] {
        if let Some(v) = v {
            ck.positive(v, "model", key)?;
        }
    }

    let magic = (lambda - FRAC_PI_2).abs() <= 1e-12;
    let needs_bath = |ck: &Checker| -> Result<(), ConfigError> {
        if m.spectral_file.is_some() {
            return Ok(());
        }
        match coupling {
            Coupling::Longitudinal => {
                ck.need(m.t2, "model", "T2")?;
                ck.need(m.tau_c, "model", "tau_c")?;
            }
            Coupling::Transverse => {
                ck.need(m.a, "model", "A")?;
                ck.need(m.omega_cut, "model", "omega_cut")?;
            }
        }
        Ok(())
    };
    let needs_sweep = |ck: &Checker| -> Result<(), ConfigError> {
        let s = ck.section(&config.sweep, "sweep")?;
        if s.points == 0 {
            return Err(ck.err("sweep", "points", "[sweep] is empty: points must be at least 1".into()));
        }
        ck.positive(s.start, "sweep", "start")?;
        ck.positive(s.stop, "sweep", "stop")?;
        if s.points > 1 && s.stop == s.start {
            return Err(ck.err("sweep", "stop", "[sweep] range is empty: start equals stop".into()));
        }
        Ok(())
    };
    let closed_form_only = |ck: &Checker, what: &str| -> Result<(), ConfigError> {
        if !magic {
            return Err(ck.err("model", "lambda", format!("{what} needs lambda = pi/2, got {lambda}")));
        }
        if m.spectral_file.is_some() {
            return Err(ck.err("model", "spectral_file", format!("{what} needs an analytic bath")));
        }
        Ok(())
    };

    match sc {
        Scenario::RatesParallel | Scenario::RatesPerp => {
            let want = if sc == Scenario::RatesParallel { Coupling::Longitudinal } else { Coupling::Transverse };
            if coupling != want {
                return Err(ck.err("model", "coupling", format!("scenario {} is defined for {want:?} coupling", sc.name()).to_lowercase()));
            }
            closed_form_only(&ck, sc.name())?;
            needs_bath(&ck)?;
            needs_sweep(&ck)?;
            if sc == Scenario::RatesPerp && beta.is_finite() {
                return Err(ck.err("model", "beta", "rates-perp closed form needs beta = inf".into()));
            }
        }
        Scenario::GeneratorAudit => {
            closed_form_only(&ck, sc.name())?;
            needs_bath(&ck)?;
            needs_sweep(&ck)?;
            if coupling == Coupling::Transverse && (beta.is_finite() || delta != 0.0) {
                return Err(ck.err("model", "beta", "transverse audit needs beta = inf and Delta = 0".into()));
            }
        }
        Scenario::Trajectory => {
            let t = ck.section(&config.trajectory, "trajectory")?;
            ck.samples(t.points, t.t_end, "trajectory")?;
            ck.bloch(t.x0, "trajectory")?;
            ck.positive(ck.need(m.period, "model", "T")?, "model", "T")?;
            needs_bath(&ck)?;
            if t.method == Method::ClosedForm {
                closed_form_only(&ck, "closed-form trajectories")?;
                if t.frame != FrameName::Lab {
                    return Err(ck.err("trajectory", "frame", "closed-form trajectories are lab-frame only".into()));
                }
                if coupling == Coupling::Transverse && (beta.is_finite() || delta != 0.0) {
                    return Err(ck.err("model", "Delta", "transverse closed form needs Delta = 0 and beta = inf".into()));
                }
            }
        }
        Scenario::Echo => {
            let e = ck.section(&config.echo, "echo")?;
            ck.samples(e.points, e.t_end, "echo")?;
            ck.bloch(e.x0, "echo")?;
            ck.need(m.period, "model", "T")?;
            closed_form_only(&ck, "echo")?;
            if coupling != Coupling::Longitudinal {
                return Err(ck.err("model", "coupling", "echo uses the longitudinal closed form".into()));
            }
            needs_bath(&ck)?;
            match e.ensemble {
                EnsembleName::Gaussian | EnsembleName::Uniform => {
                    let w = ck.need(e.width, "echo", "width")?;
                    if !(w >= 0.0) || !w.is_finite() {
                        return Err(ck.err("echo", "width", format!("[echo] width must be nonnegative, got {w}")));
                    }
                }
                EnsembleName::Discrete => {
                    let s = e.samples.as_ref().ok_or_else(|| ck.err("echo", "samples", "discrete ensemble needs [echo] samples".into()))?;
                    if s.is_empty() {
                        return Err(ck.err("echo", "samples", "[echo] samples is empty".into()));
                    }
                }
            }
        }
        Scenario::ExtractTauc => {
            ck.section(&config.extract, "extract")?;
        }
    }

    let model = Model {
        coupling,
        t2: m.t2,
        tau_c: m.tau_c,
        a: m.a,
        omega_cut: m.omega_cut,
        beta,
        omega0,
        omega_ext,
        delta,
        lambda,
        period: m.period,
        spectral_file: m.spectral_file.clone(),
        rel_tol,
    };
    Ok(Resolved { config, model, base_dir: base_dir.to_path_buf() })
}
