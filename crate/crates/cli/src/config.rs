use std::fmt;
use std::path::Path;
use std::sync::Arc;

use decolab::bandlimited::{make_fejer, make_gamma_reciprocal_with, BandlimitedFunction};
use decolab::quadrature;
use decolab::quantum_core::{PointerGrid, SystemObservable, SystemState};
use decolab::tripartite::{Couplings, MeasurementModel};
use num_complex::Complex64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Largest amplitude-norm error that is silently repaired.
pub const RENORMALIZE_TOL: f64 = 1e-6;
/// Pointer mass allowed outside an automatically chosen range.
pub const AUTO_RANGE_DEFICIT: f64 = 1e-10;
/// Hard cap on an automatically chosen pointer half-range.
pub const AUTO_RANGE_CAP: f64 = 200.0;
const AUTO_RANGE_START: f64 = 10.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    pub system: SystemConfig,
    pub probe: FunctionConfig,
    pub pointer: FunctionConfig,
    pub couplings: CouplingConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub eigenvalues: Vec<f64>,
    pub amplitudes_re: Vec<f64>,
    #[serde(default)]
    pub amplitudes_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Fejer { kappa: f64 },
    GammaReciprocal { g_a: f64, g_b: f64 },
}

impl FunctionConfig {
    /// Certified spectral half-width of the configured function.
    pub fn kappa(&self) -> f64 {
        match *self {
            FunctionConfig::Fejer { kappa } => kappa,
            FunctionConfig::GammaReciprocal { g_b, .. } => std::f64::consts::PI * g_b,
        }
    }

    pub fn build(&self, spectral_n: usize) -> decolab::Result<BandlimitedFunction> {
        match *self {
            FunctionConfig::Fejer { kappa } => make_fejer(kappa, spectral_n),
            FunctionConfig::GammaReciprocal { g_a, g_b } => make_gamma_reciprocal_with(g_a, g_b, spectral_n),
        }
    }

    fn validate(&self, field: &str, errors: &mut Vec<FieldError>) {
        match *self {
            FunctionConfig::Fejer { kappa } => {
                if !(kappa > 0.0 && kappa.is_finite()) {
                    errors.push(FieldError::new(format!("{field}.params.kappa"), format!("must be positive, got {kappa}")));
                }
            }
            FunctionConfig::GammaReciprocal { g_a, g_b } => {
                if !(g_a > 1.0 && g_a.is_finite()) {
                    errors.push(FieldError::new(
                        format!("{field}.params.g_a"),
                        format!("must exceed 1 for an integrable function, got {g_a}"),
                    ));
                }
                if !(g_b > 0.0 && g_b.is_finite()) {
                    errors.push(FieldError::new(format!("{field}.params.g_b"), format!("must be positive, got {g_b}")));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub lambda: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alpha_sweep: Option<AlphaSweep>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PointerRange {
    HalfWidth(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_spectral_n")]
    pub spectral_n: usize,
    #[serde(default = "default_pointer_n")]
    pub pointer_n: usize,
    #[serde(default = "default_pointer_range")]
    pub pointer_range: PointerRange,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            spectral_n: default_spectral_n(),
            pointer_n: default_pointer_n(),
            pointer_range: default_pointer_range(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "default_quadrature_tol")]
    pub quadrature: f64,
    #[serde(default = "default_zero_tol")]
    pub zero: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { quadrature: default_quadrature_tol(), zero: default_zero_tol() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: Format,
    #[serde(default)]
    pub path: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { format: default_format(), path: None }
    }
}

/// Oscillator parameters of the Gaussian comparison probe.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    #[serde(default = "one")]
    pub mu: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { mu: 1.0, omega: 1.0 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_spectral_n() -> usize {
    128
}

fn default_pointer_n() -> usize {
    161
}

fn default_pointer_range() -> PointerRange {
    PointerRange::HalfWidth(40.0)
}

fn default_quadrature_tol() -> f64 {
    1e-6
}

fn default_zero_tol() -> f64 {
    1e-8
}

fn default_format() -> Format {
    Format::Csv
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Everything that can go wrong before any numerics run.
#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Parse(FieldError),
    Invalid(Vec<FieldError>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(msg) => write!(f, "cannot read config: {msg}"),
            ConfigError::Parse(e) => write!(f, "malformed config at {e}"),
            ConfigError::Invalid(errors) => {
                write!(f, "invalid config:")?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// A validated configuration together with the hash of its source bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
    pub warnings: Vec<String>,
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let bytes = std::fs::read(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse(&bytes)
}

pub fn parse(bytes: &[u8]) -> Result<LoadedConfig, ConfigError> {
    let hash = config_hash(bytes);
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "." => "<root>".to_string(),
            p => p,
        };
        ConfigError::Parse(FieldError::new(field, e.inner().to_string()))
    })?;
    let warnings = config.validate().map_err(ConfigError::Invalid)?;
    Ok(LoadedConfig { config, hash, warnings })
}

/// First 16 hex digits of the SHA-256 of the raw config bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(digest)[..16].to_string()
}

impl ExperimentConfig {
    /// Checks every field, renormalizing slightly-off amplitudes in place.
    /// Returns the warnings issued on success.
    pub fn validate(&mut self) -> Result<Vec<String>, Vec<FieldError>> {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            errors.push(FieldError::new("hbar", format!("must be positive, got {}", self.hbar)));
        }
        self.validate_system(&mut errors, &mut warnings);
        self.probe.validate("probe", &mut errors);
        self.pointer.validate("pointer", &mut errors);
        self.validate_couplings(&mut errors);
        self.validate_grids(&mut errors);
        let t = self.tolerances;
        for (name, v) in [("tolerances.quadrature", t.quadrature), ("tolerances.zero", t.zero)] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(FieldError::new(name, format!("must be positive, got {v}")));
            }
        }
        let b = self.baseline;
        for (name, v) in [("baseline.mu", b.mu), ("baseline.omega", b.omega)] {
            if !(v > 0.0 && v.is_finite()) {
                errors.push(FieldError::new(name, format!("must be positive, got {v}")));
            }
        }
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(errors)
        }
    }

    fn validate_system(&mut self, errors: &mut Vec<FieldError>, warnings: &mut Vec<String>) {
        let s = &mut self.system;
        if let Err(e) = SystemObservable::new(s.eigenvalues.clone()) {
            errors.push(FieldError::new("system.eigenvalues", e.to_string()));
        }
        let n = s.eigenvalues.len();
        if s.amplitudes_re.len() != n {
            errors.push(FieldError::new(
                "system.amplitudes_re",
                format!("has {} entries but there are {n} eigenvalues", s.amplitudes_re.len()),
            ));
            return;
        }
        let im = s.amplitudes_im.get_or_insert_with(|| vec![0.0; n]);
        if im.len() != n {
            errors.push(FieldError::new(
                "system.amplitudes_im",
                format!("has {} entries but there are {n} eigenvalues", im.len()),
            ));
            return;
        }
        if s.amplitudes_re.iter().chain(im.iter()).any(|v| !v.is_finite()) {
            errors.push(FieldError::new("system.amplitudes_re", "amplitudes must be finite"));
            return;
        }
        let norm = s.amplitudes_re.iter().chain(im.iter()).map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() >= RENORMALIZE_TOL {
            errors.push(FieldError::new(
                "system.amplitudes_re",
                format!("amplitude norm is {norm}, which differs from 1 by more than {RENORMALIZE_TOL:e}"),
            ));
        } else if norm != 1.0 {
            warnings.push(format!("system amplitudes had norm {norm}; renormalized"));
            for v in s.amplitudes_re.iter_mut().chain(im.iter_mut()) {
                *v /= norm;
            }
        }
    }

    fn validate_couplings(&self, errors: &mut Vec<FieldError>) {
        let c = &self.couplings;
        if !(c.lambda > 0.0 && c.lambda.is_finite()) {
            errors.push(FieldError::new("couplings.lambda", format!("must be positive, got {}", c.lambda)));
        }
        match (c.alpha, c.alpha_sweep) {
            (Some(_), Some(_)) => errors.push(FieldError::new("couplings", "give either alpha or alpha_sweep, not both")),
            (None, None) => errors.push(FieldError::new("couplings", "one of alpha or alpha_sweep is required")),
            (Some(a), None) => {
                if !(a > 0.0 && a.is_finite()) {
                    errors.push(FieldError::new("couplings.alpha", format!("must be positive, got {a}")));
                }
            }
            (None, Some(s)) => {
                if !(s.min > 0.0 && s.min.is_finite()) {
                    errors.push(FieldError::new("couplings.alpha_sweep.min", format!("must be positive, got {}", s.min)));
                }
                if s.steps == 0 {
                    errors.push(FieldError::new("couplings.alpha_sweep.steps", "must be at least 1"));
                } else if s.steps == 1 && s.max != s.min {
                    errors.push(FieldError::new("couplings.alpha_sweep.steps", "a single step needs max equal to min"));
                } else if s.steps > 1 && !(s.max > s.min && s.max.is_finite()) {
                    errors.push(FieldError::new(
                        "couplings.alpha_sweep.max",
                        format!("must exceed min = {}, got {}", s.min, s.max),
                    ));
                }
            }
        }
    }

    fn validate_grids(&self, errors: &mut Vec<FieldError>) {
        let g = &self.grids;
        if g.spectral_n < 8 {
            errors.push(FieldError::new("grids.spectral_n", format!("must be at least 8, got {}", g.spectral_n)));
        }
        if g.pointer_n < 3 {
            errors.push(FieldError::new("grids.pointer_n", format!("must be at least 3, got {}", g.pointer_n)));
        }
        match &g.pointer_range {
            PointerRange::HalfWidth(b) if !(*b > 0.0 && b.is_finite()) => {
                errors.push(FieldError::new("grids.pointer_range", format!("must be positive, got {b}")));
            }
            PointerRange::Keyword(k) if k != "auto" => {
                errors.push(FieldError::new("grids.pointer_range", format!("must be a number or \"auto\", got {k:?}")));
            }
            _ => {}
        }
    }

    /// Swept coupling values in increasing order.
    pub fn alphas(&self) -> Vec<f64> {
        match (self.couplings.alpha, self.couplings.alpha_sweep) {
            (Some(a), _) => vec![a],
            (None, Some(s)) if s.steps == 1 => vec![s.min],
            (None, Some(s)) => {
                let step = (s.max - s.min) / (s.steps - 1) as f64;
                (0..s.steps).map(|i| if i + 1 == s.steps { s.max } else { s.min + step * i as f64 }).collect()
            }
            (None, None) => Vec::new(),
        }
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        let zeros = vec![0.0; self.system.amplitudes_re.len()];
        let im = self.system.amplitudes_im.as_ref().unwrap_or(&zeros);
        self.system.amplitudes_re.iter().zip(im).map(|(&re, &im)| Complex64::new(re, im)).collect()
    }

    pub fn observable(&self) -> decolab::Result<SystemObservable> {
        SystemObservable::new(self.system.eigenvalues.clone())
    }

    pub fn state(&self) -> decolab::Result<SystemState> {
        SystemState::normalized(self.amplitudes())
    }

    pub fn probe(&self) -> decolab::Result<BandlimitedFunction> {
        self.probe.build(self.grids.spectral_n)
    }

    pub fn pointer(&self) -> decolab::Result<BandlimitedFunction> {
        self.pointer.build(self.grids.spectral_n)
    }

    /// Uniform pointer grid over the configured or automatically chosen range.
    pub fn pointer_grid(&self, pointer: &BandlimitedFunction) -> decolab::Result<PointerGrid> {
        let half = match self.grids.pointer_range {
            PointerRange::HalfWidth(b) => b,
            PointerRange::Keyword(_) => auto_range(pointer).map_err(|e| {
                decolab::Error::InvalidParameter(format!(
                    "grids.pointer_range: no half-range up to {AUTO_RANGE_CAP} holds the pointer state ({e})"
                ))
            })?,
        };
        PointerGrid::uniform(half, self.grids.pointer_n)
    }

    /// The tripartite model at the first configured coupling.
    pub fn model(&self) -> decolab::Result<MeasurementModel> {
        let pointer = self.pointer()?;
        let grid = Arc::new(self.pointer_grid(&pointer)?);
        MeasurementModel::new(
            Couplings { hbar: self.hbar, alpha: self.alphas()[0], lambda: self.couplings.lambda },
            self.observable()?,
            self.state()?,
            self.probe()?,
            pointer,
            grid,
        )
    }
}

/// Mass of `|f|²` outside `[−B, B]`.
pub fn mass_outside(f: &BandlimitedFunction, half: f64) -> f64 {
    let rule = quadrature::composite(&[-half, half], 16, (0.5 / f.kappa()).min(1.0));
    let inside = rule.integrate(|x| f.value(x).norm_sqr());
    (1.0 - inside).max(0.0)
}

/// Doubles the half-range from 10 until the pointer mass outside drops below
/// [`AUTO_RANGE_DEFICIT`], failing past [`AUTO_RANGE_CAP`].
pub fn auto_range(pointer: &BandlimitedFunction) -> decolab::Result<f64> {
    let mut half = AUTO_RANGE_START;
    loop {
        let deficit = mass_outside(pointer, half);
        if deficit < AUTO_RANGE_DEFICIT {
            return Ok(half);
        }
        if half >= AUTO_RANGE_CAP {
            return Err(decolab::Error::Coverage { deficit, tolerance: AUTO_RANGE_DEFICIT });
        }
        half = (2.0 * half).min(AUTO_RANGE_CAP);
    }
}
