//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disorder::{DisorderConfig, SiteDistribution};
use crate::error::{Error, Result};
use crate::lattice::Boundary;

/// Statistics a run can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Spectrum,
    Ids,
    Dls,
    DlsMacroscopic,
    Centers,
    Dcs,
    Poisson,
    Independence,
    LargeDeviation,
    WegnerMinami,
    TwoScale,
    Bernoulli,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Spectrum => "spectrum",
            Statistic::Ids => "ids",
            Statistic::Dls => "dls",
            Statistic::DlsMacroscopic => "dls_macroscopic",
            Statistic::Centers => "centers",
            Statistic::Dcs => "dcs",
            Statistic::Poisson => "poisson",
            Statistic::Independence => "independence",
            Statistic::LargeDeviation => "large_deviation",
            Statistic::WegnerMinami => "wegner_minami",
            Statistic::TwoScale => "two_scale",
            Statistic::Bernoulli => "bernoulli",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: usize,
    pub side: usize,
    pub boundary: Boundary,
    pub distribution: SiteDistribution,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdsMethod {
    /// Pooled eigenvalues of dense diagonalizations.
    Pooled,
    /// Inertia counts on an energy grid.
    Counting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsConfig {
    pub side: usize,
    pub realizations: usize,
    #[serde(default = "default_ids_method")]
    pub method: IdsMethod,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

fn default_ids_method() -> IdsMethod {
    IdsMethod::Counting
}

fn default_grid_points() -> usize {
    600
}

/// Local energy window around `e0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowConfig {
    /// IDS mass `|Λ|^{-α}` on each side of `N(e0)`.
    Alpha { e0: f64, alpha: f64 },
    /// IDS mass chosen so that `N(I)|Λ|` equals `expected`.
    Count { e0: f64, expected: f64 },
    /// A fixed energy interval.
    Interval { lo: f64, hi: f64 },
}

impl WindowConfig {
    pub fn e0(&self) -> f64 {
        match *self {
            WindowConfig::Alpha { e0, .. } | WindowConfig::Count { e0, .. } => e0,
            WindowConfig::Interval { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    pub compute: Vec<Statistic>,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default)]
    pub drop_last: bool,
    /// IDS mass of the macroscopic interval, centered at `N(e0)`.
    #[serde(default = "default_macro_mass")]
    pub macro_mass: f64,
    /// Unfolded intervals `[a, b)` (units of mean spacing) for count tests.
    #[serde(default = "default_poisson_intervals")]
    pub poisson_intervals: Vec<[f64; 2]>,
    /// Unfolded distance `|Λ|(N(E0') - N(E0))` of the second energy.
    #[serde(default = "default_independence_offset")]
    pub independence_offset: f64,
    #[serde(default = "default_independence_width")]
    pub independence_width: f64,
    #[serde(default = "default_delta")]
    pub ldp_delta: f64,
    #[serde(default = "default_widths")]
    pub wegner_widths: Vec<f64>,
    #[serde(default = "default_rho")]
    pub minami_rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_xi: Option<f64>,
}

fn default_x_max() -> f64 {
    6.0
}
fn default_x_points() -> usize {
    601
}
fn default_macro_mass() -> f64 {
    0.3
}
fn default_poisson_intervals() -> Vec<[f64; 2]> {
    vec![[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]]
}
fn default_independence_offset() -> f64 {
    100.0
}
fn default_independence_width() -> f64 {
    2.0
}
fn default_delta() -> f64 {
    0.3
}
fn default_widths() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn default_rho() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoScaleConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_prime: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_prime: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_sub_boundary")]
    pub boundary: Boundary,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_sub_boundary() -> Boundary {
    Boundary::Periodic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub realizations: usize,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool pick.
    #[serde(default)]
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelConfig,
    pub ids: IdsConfig,
    pub window: WindowConfig,
    pub statistics: StatisticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_scale: Option<TwoScaleConfig>,
    pub ensemble: EnsembleConfig,
    /// Output directory; relative paths resolve against the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Disorder of realization 0; realization `r` is `disorder().realization(r)`.
    pub fn disorder(&self) -> Result<DisorderConfig> {
        DisorderConfig::new(self.model.distribution, self.model.coupling, self.ensemble.master_seed)
    }

    pub fn wants(&self, s: Statistic) -> bool {
        self.statistics.compute.contains(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.dim == 0 || m.side == 0 {
            return Err(config_err("model.dim and model.side must be positive"));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(config_err("name must be a non-empty plain file name"));
        }
        self.disorder().map_err(|e| config_err(e.to_string()))?;
        if self.ids.side == 0 || self.ids.realizations == 0 {
            return Err(config_err("ids.side and ids.realizations must be positive"));
        }
        if self.ensemble.realizations == 0 {
            return Err(config_err("ensemble.realizations must be positive"));
        }
        match self.window {
            WindowConfig::Alpha { alpha, .. } if !(alpha > 0.0 && alpha < 1.0) => {
                return Err(config_err(format!("window.alpha must lie in (0, 1) (got {alpha})")));
            }
            WindowConfig::Count { expected, .. } if !(expected > 0.0) => {
                return Err(config_err("window.expected must be positive"));
            }
            WindowConfig::Interval { lo, hi } if !(lo < hi) => {
                return Err(config_err("window.lo must be below window.hi"));
            }
            _ => {}
        }
        let s = &self.statistics;
        if s.compute.is_empty() {
            return Err(config_err("statistics.compute lists nothing to do"));
        }
        if !(s.x_max > 0.0) || s.x_points < 2 {
            return Err(config_err("statistics.x_max must be positive and x_points at least 2"));
        }
        if !(s.macro_mass > 0.0 && s.macro_mass <= 1.0) {
            return Err(config_err("statistics.macro_mass must lie in (0, 1]"));
        }
        if s.poisson_intervals.iter().any(|[a, b]| !(a < b)) {
            return Err(config_err("every poisson interval needs a < b"));
        }
        if s.wegner_widths.iter().any(|&w| !(w > 0.0)) {
            return Err(config_err("wegner widths must be positive"));
        }
        if !(s.ldp_delta >= 0.0) || !(s.minami_rho >= 0.0) {
            return Err(config_err("ldp_delta and minami_rho must be nonnegative"));
        }
        if s.decay_xi.is_some_and(|xi| !(xi > 0.0 && xi <= 1.0)) {
            return Err(config_err("decay_xi must lie in (0, 1]"));
        }
        let needs_split = self.wants(Statistic::TwoScale) || self.wants(Statistic::Bernoulli);
        match (&self.two_scale, needs_split) {
            (None, true) => return Err(config_err("two_scale and bernoulli need a [two_scale] section")),
            (Some(t), _) => {
                let exps = t.beta.is_some() && t.beta_prime.is_some();
                let scales = t.ell.is_some() && t.ell_prime.is_some();
                if exps == scales {
                    return Err(config_err("[two_scale] needs either beta and beta_prime or ell and ell_prime"));
                }
                if !(t.tol > 0.0) {
                    return Err(config_err("two_scale.tol must be positive"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (object keys sorted), so the digest
    /// does not depend on field order in the source file.
    pub fn digest(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(hex_digest(serde_json::to_string(&value)?.as_bytes()))
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
