use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dispersion::DispersionModel;
use crate::error::{Error, Result};
use crate::gkg::{Branch, GkgParams, InstabilityPolicy, SignConvention};
use crate::packet::GaussianPacketSpec;
use crate::spectral::{validated_time_window, GridOptions, DEFAULT_N_SIGMA, MARGIN_WIDTHS};

/// A value that is either fixed in the config or chosen by the harness.
/// Written as the string `"auto"` or as the value itself.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Setting<T> {
    #[default]
    Auto,
    Value(T),
}

impl<T: Copy> Setting<T> {
    pub fn value(self) -> Option<T> {
        match self {
            Setting::Auto => None,
            Setting::Value(v) => Some(v),
        }
    }
}

impl<T: Serialize> Serialize for Setting<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Setting::Auto => s.serialize_str("auto"),
            Setting::Value(v) => v.serialize(s),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Setting<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Value(T),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Value(v) => Ok(Setting::Value(v)),
            Raw::Word(w) if w == "auto" => Ok(Setting::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a value or \"auto\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Power of two, or `"auto"`.
    #[serde(default)]
    pub n: Setting<usize>,
    #[serde(default = "default_n_sigma")]
    pub n_sigma: f64,
    #[serde(default = "default_margin")]
    pub margin_widths: f64,
    #[serde(default = "default_min_n")]
    pub min_n: usize,
    #[serde(default = "default_dx_fraction")]
    pub max_dx_fraction: f64,
}

fn default_n_sigma() -> f64 {
    DEFAULT_N_SIGMA
}
fn default_margin() -> f64 {
    MARGIN_WIDTHS
}
fn default_min_n() -> usize {
    256
}
fn default_dx_fraction() -> f64 {
    0.5
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: Setting::Auto,
            n_sigma: DEFAULT_N_SIGMA,
            margin_widths: MARGIN_WIDTHS,
            min_n: default_min_n(),
            max_dx_fraction: default_dx_fraction(),
        }
    }
}

impl GridConfig {
    pub fn options(&self) -> GridOptions {
        GridOptions {
            n_sigma: self.n_sigma,
            margin_widths: self.margin_widths,
            n: self.n.value(),
            min_n: self.min_n,
            max_dx_fraction: self.max_dx_fraction,
        }
    }
}

/// Either an explicit list or `n_t` evenly spaced times on `[0, t_max]`,
/// where `t_max = "auto"` takes the validated window of the quadratic
/// oracle for the configured packet and model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSchedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<Setting<f64>>,
    #[serde(default = "default_n_t")]
    pub n_t: usize,
}

fn default_n_t() -> usize {
    9
}

impl TimeSchedule {
    pub fn list(values: Vec<f64>) -> Self {
        TimeSchedule {
            values: Some(values),
            t_max: None,
            n_t: default_n_t(),
        }
    }

    pub fn range(t_max: Setting<f64>, n_t: usize) -> Self {
        TimeSchedule {
            values: None,
            t_max: Some(t_max),
            n_t,
        }
    }

    pub fn resolve(&self, spec: &GaussianPacketSpec, m: &DispersionModel) -> Result<Vec<f64>> {
        match (&self.values, self.t_max) {
            (Some(v), None) => {
                if v.iter().any(|t| !t.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::config("times.values", "must be finite and strictly increasing"));
                }
                Ok(v.clone())
            }
            (None, Some(limit)) => {
                if self.n_t < 2 {
                    return Err(Error::config("times.n_t", "need at least 2 times"));
                }
                let t_max = match limit {
                    Setting::Value(t) => t,
                    Setting::Auto => validated_time_window(spec, m).map_err(|e| Error::config("times.t_max", e.to_string()))?,
                };
                if !(t_max.is_finite() && t_max > 0.0) {
                    return Err(Error::config(
                        "times.t_max",
                        format!("must be finite and positive, got {t_max}"),
                    ));
                }
                let step = t_max / (self.n_t - 1) as f64;
                Ok((0..self.n_t)
                    .map(|i| if i + 1 == self.n_t { t_max } else { i as f64 * step })
                    .collect())
            }
            _ => Err(Error::config("times", "give exactly one of `values` or `t_max`")),
        }
    }
}

/// Relative tolerances unless stated otherwise. All must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub width_rel: f64,
    pub group_velocity_rel: f64,
    pub norm_drift: f64,
    pub derivative_rel: f64,
    pub energy_drift: f64,
    /// Absolute field error of the GKG solution against direct synthesis.
    pub gkg_oracle_abs: f64,
    /// Relative L2 distance of the leapfrog solution from the spectral one.
    pub fd_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            width_rel: 0.01,
            group_velocity_rel: 0.005,
            norm_drift: 1e-10,
            derivative_rel: 1e-6,
            energy_drift: 1e-12,
            gkg_oracle_abs: 1e-8,
            fd_rel: 1e-2,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let all = [
            ("width_rel", self.width_rel),
            ("group_velocity_rel", self.group_velocity_rel),
            ("norm_drift", self.norm_drift),
            ("derivative_rel", self.derivative_rel),
            ("energy_drift", self.energy_drift),
            ("gkg_oracle_abs", self.gkg_oracle_abs),
            ("fd_rel", self.fd_rel),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub emit_fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            emit_fields: false,
        }
    }
}

/// Sampling of the tabulated dispersion curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub k_min: f64,
    pub k_max: f64,
    pub n: usize,
    /// Half-width of the flagged band around the pole, in sample spacings.
    #[serde(default = "default_guard_cells")]
    pub pole_guard_cells: f64,
}

fn default_guard_cells() -> f64 {
    crate::spectral::POLE_GUARD_CELLS
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            k_min: 0.0,
            k_max: 2.0,
            n: 201,
            pole_guard_cells: default_guard_cells(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Spectral,
    Fd,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Spectral => "spectral",
            Solver::Fd => "fd",
        }
    }
}

/// Generalized Klein-Gordon run on the experiment's packet and times.
/// The model's `alpha_prime`, `l_p`, `c` and `hbar` are shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkgConfig {
    #[serde(default)]
    pub m0: f64,
    #[serde(default)]
    pub sign_convention: SignConvention,
    #[serde(default)]
    pub instability_policy: InstabilityPolicy,
    #[serde(default = "default_branch")]
    pub branch: Branch,
    #[serde(default)]
    pub solver: Solver,
    /// Leapfrog step; `"auto"` is half the stability bound.
    #[serde(default)]
    pub dt: Setting<f64>,
    /// Periodic grid size (power of two).
    #[serde(default)]
    pub n: Setting<usize>,
    /// Periodic domain length.
    #[serde(default)]
    pub length: Setting<f64>,
}

fn default_branch() -> Branch {
    Branch::PositiveFrequency
}

impl Default for GkgConfig {
    fn default() -> Self {
        GkgConfig {
            m0: 0.0,
            sign_convention: SignConvention::default(),
            instability_policy: InstabilityPolicy::default(),
            branch: default_branch(),
            solver: Solver::default(),
            dt: Setting::Auto,
            n: Setting::Auto,
            length: Setting::Auto,
        }
    }
}

impl GkgConfig {
    pub fn params(&self, m: &DispersionModel) -> Result<GkgParams> {
        GkgParams::with_units(m.alpha_prime(), m.l_p(), m.c(), m.hbar(), self.m0)
            .map(|p| p.with_convention(self.sign_convention).with_policy(self.instability_policy))
            .map_err(|e| Error::config("gkg", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    /// Seeds the sampled wavenumbers of the derivative check.
    #[serde(default)]
    pub seed: u64,
    pub model: DispersionModel,
    pub packet: GaussianPacketSpec,
    #[serde(default)]
    pub grid: GridConfig,
    pub times: TimeSchedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<CurveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gkg: Option<GkgConfig>,
}

fn default_id() -> String {
    "experiment".into()
}

/// Recognised config encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Ok(Format::Toml),
            Some("json") => Ok(Format::Json),
            _ => Err(Error::config(
                "<file>",
                format!("cannot tell the format of {}; use .toml or .json", path.display()),
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Toml => "toml",
            Format::Json => "json",
        })
    }
}

impl ExperimentConfig {
    /// The broadening recipe with every default written out.
    pub fn example() -> Self {
        ExperimentConfig {
            id: "broadening".into(),
            seed: 0,
            model: DispersionModel::new(1e-3).expect("valid"),
            packet: GaussianPacketSpec::from_sigma_k(0.02, 1.0).expect("valid"),
            grid: GridConfig::default(),
            times: TimeSchedule::range(Setting::Auto, default_n_t()),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            curves: Some(CurveConfig::default()),
            gkg: Some(GkgConfig::default()),
        }
    }

    pub fn from_str(text: &str, format: Format) -> Result<Self> {
        let cfg: ExperimentConfig = match format {
            Format::Toml => {
                let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<file>", e.message()))?;
                serde_path_to_error::deserialize(de).map_err(|e| path_error(e.path().to_string(), e.inner().message()))?
            }
            Format::Json => {
                let mut de = serde_json::Deserializer::from_str(text);
                serde_path_to_error::deserialize(&mut de)
                    .map_err(|e| path_error(e.path().to_string(), strip_position(&e.inner().to_string())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let format = Format::from_path(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str(&text, format)
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        match format {
            Format::Toml => toml::to_string_pretty(self).map_err(|e| Error::config("<config>", e.to_string())),
            Format::Json => serde_json::to_string_pretty(self)
                .map(|s| s + "\n")
                .map_err(|e| Error::config("<config>", e.to_string())),
        }
    }

    /// Checks everything that can be checked without running: tolerances,
    /// grid knobs, the time schedule, and the GKG parameters.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::config("id", "must be non-empty without path separators"));
        }
        self.tolerances.validate()?;
        let g = &self.grid;
        if let Setting::Value(n) = g.n {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::config("grid.n", format!("must be a power of two >= 2, got {n}")));
            }
        }
        for (key, v) in [
            ("grid.n_sigma", g.n_sigma),
            ("grid.margin_widths", g.margin_widths),
            ("grid.max_dx_fraction", g.max_dx_fraction),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        self.times.resolve(&self.packet, &self.model)?;
        if let Some(c) = &self.curves {
            if !(c.k_max > c.k_min) || c.n < 2 || !(c.pole_guard_cells >= 0.0) {
                return Err(Error::config("curves", "need k_max > k_min, n >= 2, pole_guard_cells >= 0"));
            }
        }
        if let Some(gk) = &self.gkg {
            gk.params(&self.model)?;
            if let Setting::Value(n) = gk.n {
                if n < 2 || !n.is_power_of_two() {
                    return Err(Error::config("gkg.n", format!("must be a power of two >= 2, got {n}")));
                }
            }
            if let Setting::Value(v) = gk.dt {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config("gkg.dt", format!("must be positive, got {v}")));
                }
            }
            if let Setting::Value(v) = gk.length {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::config("gkg.length", format!("must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.times.resolve(&self.packet, &self.model)
    }
}

fn path_error(path: String, message: impl Into<String>) -> Error {
    let key = if path.is_empty() || path == "." { "<root>".into() } else { path };
    Error::config(key, message)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
