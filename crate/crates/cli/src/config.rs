//! Scenario files.
//!
//! One TOML document per scenario. Every block except the one named by
//! `scenario` is optional; missing values take the defaults listed on each
//! field. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Default `Im ω` for Green's function scenarios.
pub const DEFAULT_ETA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    G0,
    Dress,
    Scatter,
    Wavepacket,
    Scan,
    Validate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::G0 => "g0",
            Scenario::Dress => "dress",
            Scenario::Scatter => "scatter",
            Scenario::Wavepacket => "wavepacket",
            Scenario::Scan => "scan",
            Scenario::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MassConfig {
    Constant {
        value: f64,
    },
    SmoothStep {
        minus: f64,
        plus: f64,
        start: f64,
        end: f64,
    },
    /// Two-column `x m` file, relative to the config file.
    Table {
        path: PathBuf,
    },
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free {
        #[serde(default)]
        level: f64,
    },
    Harmonic {
        stiffness: f64,
        half_width: f64,
    },
    LinearField {
        field: f64,
        half_width: f64,
    },
    PiecewisePolynomial {
        breaks: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
        #[serde(default)]
        outside: [f64; 2],
    },
    /// Two-column `x v` file, relative to the config file.
    Table {
        path: PathBuf,
    },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Free { level: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub re: f64,
    #[serde(default = "default_eta")]
    pub im: f64,
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

/// `"limit"`, a real number, or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurrogateConfig {
    Real(f64),
    Complex([f64; 2]),
    Named(String),
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig::Named("limit".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SingularConfig {
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub p: SurrogateConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub xmin: f64,
    pub xmax: f64,
    pub n: usize,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.xmax - self.xmin) / (self.n - 1) as f64;
        (0..self.n)
            .map(|j| if j + 1 == self.n { self.xmax } else { self.xmin + step * j as f64 })
            .collect()
    }
}

/// Probe positions for amplitude extraction; default one unit outside the
/// interaction window on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x: Option<f64>,
    pub x_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavePacketConfig {
    pub x0: f64,
    pub k0: f64,
    pub sigma: f64,
    pub duration: f64,
    /// Free evolution time used to check the calibration; defaults to
    /// `duration`.
    #[serde(default)]
    pub calibration_duration: Option<f64>,
    /// `Im ω` of the synthesis.
    #[serde(default = "default_synthesis_eta")]
    pub eta: f64,
    #[serde(default = "default_panels_per_k")]
    pub panels_per_k: f64,
}

fn default_synthesis_eta() -> f64 {
    1e-10
}

fn default_panels_per_k() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_shape")]
    pub shape: String,
    pub epsilons: Vec<f64>,
    /// Incident wavenumber; the energy is `k²/2m`.
    #[serde(default = "default_k")]
    pub k: f64,
}

fn default_shape() -> String {
    "gaussian".into()
}

fn default_k() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub mass: MassConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencyConfig>,
    #[serde(default)]
    pub singular: SingularConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavepacket: Option<WavePacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    /// Directory that relative table paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().replace('\n', " ");
        match e.span() {
            Some(span) => CliError::Parse(format!("line {}: {}", line_of(text, span.start), message.trim())),
            None => CliError::Parse(message.trim().to_string()),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(config)
}

fn invalid(field: &str, rule: &str) -> CliError {
    CliError::Validation(format!("{field}: {rule}"))
}

fn finite(field: &str, values: &[f64]) -> Result<(), CliError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(field, "values must be finite"))
    }
}

impl ScenarioConfig {
    /// Checks the invariants a scenario needs before anything is computed.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            finite("grid", &[g.xmin, g.xmax])?;
            if g.n < 2 {
                return Err(invalid("grid", "n ≥ 2"));
            }
            if !(g.xmin < g.xmax) {
                return Err(invalid("grid", "xmin < xmax"));
            }
        }
        if let Some(f) = &self.frequency {
            finite("frequency", &[f.re, f.im])?;
            if !(f.im > 0.0) {
                return Err(invalid("frequency", "im > 0"));
            }
        }
        finite("singular", &[self.singular.alpha, self.singular.beta])?;
        match &self.singular.p {
            SurrogateConfig::Named(name) if name != "limit" => {
                return Err(invalid("singular.p", "\"limit\", a number or [re, im]"));
            }
            SurrogateConfig::Real(p) => finite("singular.p", &[*p])?,
            SurrogateConfig::Complex(p) => finite("singular.p", p)?,
            SurrogateConfig::Named(_) => {}
        }
        match &self.mass {
            MassConfig::Constant { value } if !(*value > 0.0) => return Err(invalid("mass", "value > 0")),
            MassConfig::SmoothStep { minus, plus, start, end } => {
                finite("mass", &[*minus, *plus, *start, *end])?;
                if !(*minus > 0.0 && *plus > 0.0) {
                    return Err(invalid("mass", "minus > 0 and plus > 0"));
                }
                if !(start < end) {
                    return Err(invalid("mass", "start < end"));
                }
            }
            _ => {}
        }
        let needs = |block: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(invalid(block, &format!("required by scenario {}", self.scenario.name())))
            }
        };
        match self.scenario {
            Scenario::G0 | Scenario::Dress => {
                needs("frequency", self.frequency.is_some())?;
                needs("grid", self.grid.is_some())?;
            }
            Scenario::Scatter => needs("frequency", self.frequency.is_some())?,
            Scenario::Wavepacket => {
                needs("wavepacket", self.wavepacket.is_some())?;
                needs("grid", self.grid.is_some())?;
            }
            Scenario::Scan => needs("scan", self.scan.is_some())?,
            Scenario::Validate => needs("frequency", self.frequency.is_some())?,
        }
        if let Some(w) = &self.wavepacket {
            finite("wavepacket", &[w.x0, w.k0, w.sigma, w.duration, w.eta, w.panels_per_k])?;
            if !(w.sigma > 0.0) {
                return Err(invalid("wavepacket", "sigma > 0"));
            }
            if !(w.duration >= 0.0) || w.calibration_duration.is_some_and(|d| !(d >= 0.0)) {
                return Err(invalid("wavepacket", "durations ≥ 0"));
            }
            if !(w.eta > 0.0) || !(w.panels_per_k > 0.0) {
                return Err(invalid("wavepacket", "eta > 0 and panels_per_k > 0"));
            }
        }
        if let Some(s) = &self.scan {
            finite("scan", &s.epsilons)?;
            if s.epsilons.is_empty() || s.epsilons.iter().any(|&e| !(e > 0.0)) {
                return Err(invalid("scan", "epsilons must be positive and non-empty"));
            }
            if s.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(invalid("scan", "epsilons strictly decreasing"));
            }
            if !(s.k > 0.0) {
                return Err(invalid("scan", "k > 0"));
            }
            s.shape
                .parse::<deltaprime_core::MollifierShape>()
                .map_err(|_| invalid("scan.shape", "gaussian | lorentzian-truncated | paired-rectangles"))?;
        }
        Ok(())
    }

    /// Replaces `Im ω` (and the synthesis `η` of wave-packet runs).
    pub fn override_eta(&mut self, eta: f64) -> Result<(), CliError> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(invalid("--eta", "eta > 0"));
        }
        if let Some(f) = &mut self.frequency {
            f.im = eta;
        }
        if let Some(w) = &mut self.wavepacket {
            w.eta = eta;
        }
        Ok(())
    }

    /// The resolved configuration as TOML, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
