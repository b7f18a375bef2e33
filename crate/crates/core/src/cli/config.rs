//! JSON run configuration. Every field has a default except the domain
//! blocks; `RunConfig::resolve` fills the defaults that depend on the domain
//! and validates eagerly so that errors name the offending field.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundSettings;
use crate::error::{Error, Result};
use crate::geometry::{
    ApproachPath, ApproachSpec, Block, Direction, DomainDescriptor, ExtendedBlock, ExtendedDomainDescriptor, RealCoord,
};
use crate::profiles::ProfileSpec;
use crate::quadrature::{NormSettings, SurfaceOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockConfig {
    #[serde(default = "one_usize")]
    pub dim: usize,
    pub profile: ProfileSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedBlockConfig {
    /// Real coordinates such as `"re1"` or `"im2"` (1-based).
    pub coords: Vec<String>,
    pub profile: ProfileSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PathConfig {
    Radial,
    Slanted { scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproachConfig {
    /// Defaults to 2 for every block.
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    #[serde(default = "two")]
    pub beta: f64,
    #[serde(default = "radial")]
    pub path: PathConfig,
}

impl Default for ApproachConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: 2.0,
            path: PathConfig::Radial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "yes")]
    pub geometric: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            t_max: default_t_max(),
            points: default_points(),
            geometric: true,
        }
    }
}

impl GridConfig {
    /// Heights from `t_max` down to `t_min`.
    pub fn heights(&self) -> Result<Vec<f64>> {
        if self.geometric {
            crate::bounds::geometric_grid(self.t_min, self.t_max, self.points)
        } else {
            let n = self.points;
            Ok((0..n)
                .map(|i| self.t_max + (self.t_min - self.t_max) * i as f64 / (n - 1) as f64)
                .collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default = "yes")]
    pub gradient: bool,
    #[serde(default = "yes")]
    pub tail: bool,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            gradient: true,
            tail: true,
            a_max: default_a_max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_dmax")]
    pub dmax: u32,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_cutoff")]
    pub svd_cutoff: f64,
    /// Heights of the model-domain cross check, geometric in `[t_min, t_max]`.
    #[serde(default = "default_cross_t_min")]
    pub cross_t_min: f64,
    #[serde(default = "default_cross_t_max")]
    pub cross_t_max: f64,
    #[serde(default = "default_cross_points")]
    pub cross_points: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            dmax: default_dmax(),
            mc_samples: default_mc_samples(),
            seed: default_seed(),
            svd_cutoff: default_cutoff(),
            cross_t_min: default_cross_t_min(),
            cross_t_max: default_cross_t_max(),
            cross_points: default_cross_points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCheckConfig {
    #[serde(default = "default_exponents")]
    pub m: Vec<f64>,
    #[serde(default = "default_check_grid")]
    pub grid_size: usize,
    /// Radial integral ratios are checked for these block dimensions `k`.
    #[serde(default = "default_ks")]
    pub k: Vec<u32>,
    #[serde(default = "default_integral_t_min")]
    pub integral_t_min: f64,
    #[serde(default = "default_integral_t_max")]
    pub integral_t_max: f64,
}

impl Default for ProfileCheckConfig {
    fn default() -> Self {
        Self {
            m: default_exponents(),
            grid_size: default_check_grid(),
            k: default_ks(),
            integral_t_min: default_integral_t_min(),
            integral_t_max: default_integral_t_max(),
        }
    }
}

/// Direction of the metric bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum XiConfig {
    Normal,
    Tangential { block: usize },
    /// Complex entries as `[re, im]` pairs.
    Vector { blocks: Vec<Vec<[f64; 2]>>, normal: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub blocks: Vec<BlockConfig>,
    #[serde(default = "one")]
    pub truncation: f64,
    /// Defaults to `0.05 * truncation`.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub convex: bool,
    #[serde(default)]
    pub approach: ApproachConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub xi: Option<XiConfig>,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub extended: bool,
    #[serde(default)]
    pub extended_blocks: Vec<ExtendedBlockConfig>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub profile_check: ProfileCheckConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn two() -> f64 {
    2.0
}
fn yes() -> bool {
    true
}
fn radial() -> PathConfig {
    PathConfig::Radial
}
fn default_t_min() -> f64 {
    1e-6
}
fn default_t_max() -> f64 {
    1e-2
}
fn default_points() -> usize {
    40
}
fn default_quad_tol() -> f64 {
    crate::quadrature::DEFAULT_REL_TOL
}
fn default_a_max() -> f64 {
    100.0
}
fn default_dmax() -> u32 {
    8
}
fn default_mc_samples() -> usize {
    200_000
}
fn default_seed() -> u64 {
    42
}
fn default_cutoff() -> f64 {
    crate::oracle::DEFAULT_CUTOFF
}
fn default_cross_t_min() -> f64 {
    1e-3
}
fn default_cross_t_max() -> f64 {
    1e-2
}
fn default_cross_points() -> usize {
    5
}
fn default_delta() -> f64 {
    0.1
}
fn default_exponents() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_check_grid() -> usize {
    256
}
fn default_ks() -> Vec<u32> {
    vec![1, 2]
}
fn default_integral_t_min() -> f64 {
    1e-12
}
fn default_integral_t_max() -> f64 {
    1e-1
}

/// Command-line overrides applied before validation.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    pub convex: bool,
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))
    }

    /// Applies overrides, fills domain-dependent defaults and validates.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<Self> {
        if let Some(s) = overrides.seed {
            self.seed = s;
            self.oracle.seed = s;
        }
        if let Some(t) = overrides.t_min {
            self.grid.t_min = t;
        }
        if let Some(t) = overrides.t_max {
            self.grid.t_max = t;
        }
        if let Some(p) = overrides.points {
            self.grid.points = p;
        }
        self.convex |= overrides.convex;

        check_positive("truncation", self.truncation)?;
        let t0 = self.t0.unwrap_or(0.05 * self.truncation);
        if !(t0 > 0.0 && t0 < self.truncation) {
            return Err(Error::config("t0", format!("must lie in (0, truncation = {}), got {t0}", self.truncation)));
        }
        self.t0 = Some(t0);

        if self.extended {
            if self.extended_blocks.is_empty() {
                return Err(Error::config("extended_blocks", "required when extended = true"));
            }
            check_positive("delta", self.delta)?;
        } else if self.blocks.is_empty() {
            return Err(Error::config("blocks", "at least one block is required"));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.dim == 0 {
                return Err(Error::config(format!("blocks[{j}].dim"), "must be >= 1"));
            }
            b.profile
                .build()
                .map_err(|e| Error::config(format!("blocks[{j}].profile"), e.to_string()))?;
        }

        let k = self.blocks.len();
        let alpha = self.approach.alpha.clone().unwrap_or_else(|| vec![2.0; k]);
        if !self.extended && alpha.len() != k {
            return Err(Error::config(
                "alpha",
                format!("has {} entries but the domain has {k} blocks", alpha.len()),
            ));
        }
        if let Some(a) = alpha.iter().find(|&&a| !(a > 1.0 && a.is_finite())) {
            return Err(Error::config("alpha", format!("entries must exceed 1, got {a}")));
        }
        self.approach.alpha = Some(alpha);
        if !(self.approach.beta > 1.0 && self.approach.beta.is_finite()) {
            return Err(Error::config("beta", format!("must exceed 1, got {}", self.approach.beta)));
        }
        if let PathConfig::Slanted { scale } = self.approach.path {
            check_positive("path.scale", scale)?;
        }

        check_positive("t_min", self.grid.t_min)?;
        check_positive("t_max", self.grid.t_max)?;
        if self.grid.t_min >= self.grid.t_max {
            return Err(Error::config(
                "t_min",
                format!("must be below t_max = {}, got {}", self.grid.t_max, self.grid.t_min),
            ));
        }
        if self.grid.t_max > t0 {
            return Err(Error::config("t_max", format!("must not exceed t0 = {t0}, got {}", self.grid.t_max)));
        }
        if self.grid.points < crate::bounds::MIN_FIT_ROWS {
            return Err(Error::config(
                "points",
                format!("need at least {} points, got {}", crate::bounds::MIN_FIT_ROWS, self.grid.points),
            ));
        }
        check_positive("quad_tol", self.quad_tol)?;
        check_positive("surface.a_max", self.surface.a_max)?;
        check_positive("oracle.svd_cutoff", self.oracle.svd_cutoff)?;
        if self.oracle.mc_samples < crate::oracle::MIN_SAMPLES {
            return Err(Error::config(
                "oracle.mc_samples",
                format!("must be at least {}, got {}", crate::oracle::MIN_SAMPLES, self.oracle.mc_samples),
            ));
        }
        check_positive("oracle.cross_t_min", self.oracle.cross_t_min)?;
        if !(self.oracle.cross_t_min < self.oracle.cross_t_max && self.oracle.cross_t_max <= t0) {
            return Err(Error::config("oracle.cross_t_max", format!("need cross_t_min < cross_t_max <= t0 = {t0}")));
        }
        if self.oracle.cross_points < 2 {
            return Err(Error::config("oracle.cross_points", "need at least 2 points"));
        }
        if let Some(xi) = &self.xi {
            if !self.extended {
                self.direction_for(xi)?;
            }
        }
        if self.profile_check.grid_size < 64 {
            return Err(Error::config("profile_check.grid_size", "must be at least 64"));
        }
        if self.profile_check.m.iter().any(|&m| !(m >= 1.0)) {
            return Err(Error::config("profile_check.m", "exponents must be >= 1"));
        }
        if self.profile_check.k.iter().any(|&k| k == 0) {
            return Err(Error::config("profile_check.k", "entries must be >= 1"));
        }
        check_positive("profile_check.integral_t_min", self.profile_check.integral_t_min)?;
        if self.profile_check.integral_t_min >= self.profile_check.integral_t_max {
            return Err(Error::config("profile_check.integral_t_max", "must exceed integral_t_min"));
        }
        if self.extended {
            self.extended_domain()?;
        } else {
            self.domain()?;
        }
        Ok(self)
    }

    pub fn t0(&self) -> f64 {
        self.t0.unwrap_or(0.05 * self.truncation)
    }

    pub fn domain(&self) -> Result<DomainDescriptor> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(Block {
                    dim: b.dim,
                    profile: b.profile.build()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DomainDescriptor::new(blocks, self.truncation)
            .and_then(|d| d.with_t0(self.t0()))
            .map(|d| d.with_convex(self.convex))
            .map_err(|e| Error::config("blocks", e.to_string()))
    }

    pub fn extended_domain(&self) -> Result<ExtendedDomainDescriptor> {
        let mut blocks = Vec::with_capacity(self.extended_blocks.len());
        for (j, b) in self.extended_blocks.iter().enumerate() {
            let coords = b
                .coords
                .iter()
                .map(|c| c.parse::<RealCoord>())
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::config(format!("extended_blocks[{j}].coords"), e.to_string()))?;
            blocks.push(ExtendedBlock {
                coords,
                profile: b.profile.build()?,
            });
        }
        ExtendedDomainDescriptor::new(blocks, self.truncation, self.delta)
            .and_then(|d| d.with_t0(self.t0()))
            .map_err(|e| Error::config("extended_blocks", e.to_string()))
    }

    pub fn approach(&self) -> Result<ApproachSpec> {
        let path = match self.approach.path {
            PathConfig::Radial => ApproachPath::Radial,
            PathConfig::Slanted { scale } => ApproachPath::Slanted { scale },
        };
        let alpha = self
            .approach
            .alpha
            .clone()
            .unwrap_or_else(|| vec![2.0; self.blocks.len()]);
        ApproachSpec::new(alpha, self.approach.beta, path).map_err(|e| Error::config("approach", e.to_string()))
    }

    pub fn settings(&self) -> BoundSettings {
        BoundSettings {
            norm: NormSettings {
                mode: None,
                rel_tol: self.quad_tol,
            },
            surface: SurfaceOptions {
                gradient: self.surface.gradient,
                tail: self.surface.tail,
                a_max: self.surface.a_max,
                ..SurfaceOptions::default()
            },
        }
    }

    pub fn direction(&self) -> Result<Option<Direction>> {
        self.xi.as_ref().map(|xi| self.direction_for(xi)).transpose()
    }

    fn direction_for(&self, xi: &XiConfig) -> Result<Direction> {
        let domain = self.domain()?;
        let dir = match xi {
            XiConfig::Normal => Direction::normal(&domain),
            XiConfig::Tangential { block } => {
                Direction::tangential(&domain, *block).map_err(|e| Error::config("xi", e.to_string()))?
            }
            XiConfig::Vector { blocks, normal } => Direction {
                blocks: blocks
                    .iter()
                    .map(|b| b.iter().map(|c| Complex64::new(c[0], c[1])).collect())
                    .collect(),
                normal: Complex64::new(normal[0], normal[1]),
            },
        };
        if dir.blocks.len() != domain.k() || dir.blocks.iter().zip(domain.blocks()).any(|(x, b)| x.len() != b.dim) {
            return Err(Error::config("xi", "shape does not match the domain blocks"));
        }
        if dir.is_zero() {
            return Err(Error::config("xi", "direction is zero"));
        }
        Ok(dir)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json(&text)?.resolve(overrides)
}
