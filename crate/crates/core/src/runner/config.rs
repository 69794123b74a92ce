//! Experiment configuration files (TOML).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::TestFunction;
use crate::domains::{DomainKind, DomainModel, IdealSpec, PhiSpec, PsiSpec, QuadratureGrid};
use crate::minimizer::{BergmanSpace, ExtensionMode, ExtensionProblem};
use crate::poly::Polynomial;
use crate::weightlab::{MonotoneCubic, WeightFunction};

/// Problems with a config file; maps to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.source, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A weight as written in a config, e.g. `{family = "exp_rate", alpha = 0.5, T = 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        #[serde(rename = "T", default)]
        lower: f64,
    },
    ExpRate {
        alpha: f64,
        #[serde(rename = "T", default)]
        lower: f64,
    },
    Rational {
        num: Vec<f64>,
        den: Vec<f64>,
        #[serde(rename = "T", default)]
        lower: f64,
    },
    /// CSV with header `t,c`; relative paths start at the config file.
    Tabulated {
        path: PathBuf,
        #[serde(rename = "T", default)]
        lower: f64,
    },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant { lower: 0.0 }
    }
}

impl WeightSpec {
    pub fn build(&self, base: &Path) -> crate::Result<WeightFunction> {
        Ok(match self {
            WeightSpec::Constant { lower } => WeightFunction::constant(*lower),
            WeightSpec::ExpRate { alpha, lower } => WeightFunction::exp_rate(*lower, *alpha),
            WeightSpec::Rational { num, den, lower } => WeightFunction::rational(*lower, num.clone(), den.clone()),
            WeightSpec::Tabulated { path, lower } => {
                WeightFunction::tabulated(*lower, MonotoneCubic::from_csv(&base.join(path))?)
            }
        })
    }

    pub fn lower(&self) -> f64 {
        match self {
            WeightSpec::Constant { lower }
            | WeightSpec::ExpRate { lower, .. }
            | WeightSpec::Rational { lower, .. }
            | WeightSpec::Tabulated { lower, .. } => *lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    /// Geometric between `t_min > 0` and `t_max`.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.t_min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let x = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.t_min + (self.t_max - self.t_min) * x,
                    Spacing::Log => self.t_min * (self.t_max / self.t_min).powf(x),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Second differences, relative to `max |G|`.
    #[serde(default = "default_concavity")]
    pub concavity: f64,
    /// Relative tolerance of equalities checked by the subcommand.
    #[serde(default = "default_relative")]
    pub relative: f64,
    #[serde(default = "default_ode")]
    pub ode: f64,
    /// `G(t_max) / G(t_min)` bound.
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_concavity() -> f64 {
    1e-8
}
fn default_relative() -> f64 {
    1e-6
}
fn default_ode() -> f64 {
    1e-8
}
fn default_decay() -> f64 {
    1e-4
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            concavity: default_concavity(),
            relative: default_relative(),
            ode: default_ode(),
            decay: default_decay(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ComputeG,
    CheckConcavity,
    CheckLinearity,
    BergmanRatio,
    VerifyOde,
    VerifyIdentities,
    ExtensionCheck,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::ComputeG,
        Check::CheckConcavity,
        Check::CheckLinearity,
        Check::BergmanRatio,
        Check::VerifyOde,
        Check::VerifyIdentities,
        Check::ExtensionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ComputeG => "compute-g",
            Check::CheckConcavity => "check-concavity",
            Check::CheckLinearity => "check-linearity",
            Check::BergmanRatio => "bergman-ratio",
            Check::VerifyOde => "verify-ode",
            Check::VerifyIdentities => "verify-identities",
            Check::ExtensionCheck => "extension-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default)]
    pub psi: PsiSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionSpec {
    #[serde(default)]
    pub t0: f64,
    #[serde(default = "default_widths")]
    pub widths: Vec<f64>,
    #[serde(default)]
    pub mode: ExtensionMode,
}

fn default_widths() -> Vec<f64> {
    vec![1.0, 0.5, 0.25]
}

impl Default for ExtensionSpec {
    fn default() -> Self {
        Self {
            t0: 0.0,
            widths: default_widths(),
            mode: ExtensionMode::default(),
        }
    }
}

fn default_basis_degree() -> u32 {
    4
}
fn default_resolution() -> usize {
    256
}
fn default_samples() -> usize {
    5
}
fn default_test_function() -> TestFunction {
    TestFunction::Saturating {
        a0: 0.0,
        amp: 1.0,
        rate: 1.0,
    }
}
fn default_ideal() -> IdealSpec {
    IdealSpec::MaxIdealPower { order: 1 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub checks: Vec<Check>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub phi: PhiSpec,
    #[serde(default = "default_ideal")]
    pub ideal: IdealSpec,
    /// Defaults to the constant `1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<Polynomial>,
    #[serde(default)]
    pub weight: WeightSpec,
    /// Second weight for the effective-linearity and weighted-extension checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_tilde: Option<WeightSpec>,
    pub t_grid: TGrid,
    #[serde(default = "default_basis_degree")]
    pub basis_degree: u32,
    /// Radial nodes of the raw cross-check quadrature.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Kernel sample points per `t`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_test_function")]
    pub test_function: TestFunction,
    #[serde(default)]
    pub extension: ExtensionSpec,
    /// Directory the config was read from; resolves relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError {
            source: source.to_string(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| ConfigError {
            source: source.to_string(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: source.clone(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, &source)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(format!("field `name`: {:?} is not a usable file name", self.name));
        }
        if self.checks.is_empty() {
            return Err("field `checks`: empty list".into());
        }
        let g = &self.t_grid;
        if g.count == 0 {
            return Err("field `t_grid.count`: the t-grid is empty".into());
        }
        if !(g.t_min >= 0.0) || !g.t_min.is_finite() {
            return Err(format!("field `t_grid.t_min`: must be >= 0, got {}", g.t_min));
        }
        if g.count > 1 && !(g.t_max > g.t_min) {
            return Err("field `t_grid.t_max`: must exceed t_min".into());
        }
        if g.spacing == Spacing::Log && !(g.t_min > 0.0) {
            return Err("field `t_grid.spacing`: log spacing needs t_min > 0".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("concavity", t.concavity),
            ("relative", t.relative),
            ("ode", t.ode),
            ("decay", t.decay),
        ] {
            if !(v > 0.0) {
                return Err(format!("field `tolerances.{name}`: must be > 0, got {v}"));
            }
        }
        if self.resolution < 2 {
            return Err("field `resolution`: need at least 2 nodes".into());
        }
        if g.t_min < self.weight.lower() {
            return Err("field `t_grid.t_min`: below the weight's T".into());
        }
        self.domain_model().map_err(|e| format!("field `domain`: {e}"))?;
        if let Some(d) = &self.datum {
            if d.dim() != self.domain_model().map(|m| m.dim()).unwrap_or(0) {
                return Err("field `datum`: dimension differs from the domain".into());
            }
        }
        Ok(())
    }

    pub fn domain_model(&self) -> crate::Result<DomainModel> {
        DomainModel::with_psi(self.domain.kind.clone(), self.domain.psi, self.phi.clone())
    }

    pub fn grid(&self) -> QuadratureGrid {
        QuadratureGrid {
            resolution: self.resolution,
            ..QuadratureGrid::default()
        }
    }

    pub fn weight(&self) -> crate::Result<WeightFunction> {
        self.weight.build(&self.base_dir)
    }

    pub fn weight_tilde(&self) -> crate::Result<Option<WeightFunction>> {
        self.weight_tilde.as_ref().map(|w| w.build(&self.base_dir)).transpose()
    }

    pub fn space(&self) -> crate::Result<BergmanSpace> {
        Ok(BergmanSpace::new(self.domain_model()?, self.weight()?, self.basis_degree).with_grid(self.grid()))
    }

    pub fn datum(&self) -> crate::Result<Polynomial> {
        Ok(match &self.datum {
            Some(p) => p.clone(),
            None => Polynomial::constant(self.domain_model()?.dim(), 1.0),
        })
    }

    pub fn problem(&self) -> crate::Result<ExtensionProblem> {
        let space = self.space()?;
        let datum = self.datum()?;
        if datum.filter(|a| self.ideal.pins(a)).is_zero() {
            return Ok(ExtensionProblem::degenerate(space, self.ideal));
        }
        ExtensionProblem::new(space, self.ideal, datum)
    }
}
