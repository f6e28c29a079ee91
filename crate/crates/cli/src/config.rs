//! Experiment configuration, read from a TOML document.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rsv_core::radial::{BallProblem, ProblemKind};
use rsv_core::special::{multiplicity, HarmonicExpansion};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemBlock,
    #[serde(default)]
    pub perturbation: PerturbationBlock,
    #[serde(default)]
    pub oracle: OracleBlock,
    #[serde(default)]
    pub steklov: SteklovBlock,
    #[serde(default)]
    pub classify: ClassifyBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub n: usize,
    #[serde(rename = "R", alias = "radius")]
    pub radius: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub kind: ProblemKind,
}

/// How mode coefficients are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Coefficients of the L²-orthonormal harmonics Y_{s,i}.
    #[default]
    Orthonormal,
    /// n = 2 only: coefficients of cos sθ (i = 0) and sin sθ (i = 1).
    Trigonometric,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub degree: usize,
    #[serde(default)]
    pub index: usize,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationBlock {
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub modes: Vec<ModeSpec>,
    /// Whitespace-separated `degree index coefficient` lines; `#` starts a comment.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default = "default_levels")]
    pub richardson_levels: usize,
    #[serde(default)]
    pub quadrature_order: Option<usize>,
}

fn yes() -> bool {
    true
}
fn default_modes() -> usize {
    32
}
fn default_levels() -> usize {
    1
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self { enabled: true, modes: default_modes(), h: None, richardson_levels: default_levels(), quadrature_order: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteklovBlock {
    #[serde(default = "default_max_degree")]
    pub max_degree: usize,
}

fn default_max_degree() -> usize {
    6
}

impl Default for SteklovBlock {
    fn default() -> Self {
        Self { max_degree: default_max_degree() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyBlock {
    #[serde(default = "default_max_degree")]
    pub depth: usize,
}

impl Default for ClassifyBlock {
    fn default() -> Self {
        Self { depth: default_max_degree() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_t_max() -> f64 {
    0.1
}
fn default_steps() -> usize {
    11
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self { t_max: default_t_max(), steps: default_steps() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Table,
    Kv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Table => "tsv",
            Self::Kv => "txt",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Kv]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: None, formats: default_formats() }
    }
}

impl ExperimentConfig {
    /// Parses and validates; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| anyhow!("config: {e}"))?;
        if let Some(file) = &cfg.perturbation.file {
            if file.is_relative() {
                cfg.perturbation.file = Some(base.join(file));
            }
        }
        if let Some(dir) = &cfg.output.directory {
            if dir.is_relative() {
                cfg.output.directory = Some(base.join(dir));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in {}", path.display()))
    }

    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if p.n != 2 && p.n != 3 {
            bail!("problem.n: must be 2 or 3, got {}", p.n);
        }
        if !(p.radius > 0.0 && p.radius.is_finite()) {
            bail!("problem.R: must be positive, got {}", p.radius);
        }
        if p.kind != ProblemKind::DirichletEigen && p.alpha.is_none() {
            bail!("problem.alpha: required for kind {}", p.kind.name());
        }
        if self.perturbation.normalization == Normalization::Trigonometric && p.n != 2 {
            bail!("perturbation.normalization: trigonometric coefficients need n = 2");
        }
        if let Some(file) = &self.perturbation.file {
            if !file.is_file() {
                bail!("perturbation.file: {} does not exist", file.display());
            }
        }
        for (k, m) in self.perturbation.modes.iter().enumerate() {
            check_mode(p.n, k, m)?;
        }
        if self.oracle.modes == 0 {
            bail!("oracle.modes: must be at least 1");
        }
        if let Some(h) = self.oracle.h {
            if h.is_nan() || h <= 0.0 {
                bail!("oracle.h: must be positive, got {h}");
            }
        }
        if self.sweep.t_max.is_nan() || self.sweep.t_max <= 0.0 || self.sweep.steps < 2 {
            bail!("sweep: need t_max > 0 and steps ≥ 2");
        }
        Ok(())
    }

    pub fn ball_problem(&self) -> Result<BallProblem> {
        let p = &self.problem;
        Ok(BallProblem::new(p.n, p.radius, p.alpha.unwrap_or(f64::INFINITY), p.kind)?)
    }

    /// Boundary normal data N from the mode list and the coefficient file.
    pub fn normal(&self) -> Result<HarmonicExpansion> {
        let n = self.problem.n;
        let mut modes = self.perturbation.modes.clone();
        if let Some(file) = &self.perturbation.file {
            modes.extend(read_coefficient_file(n, file)?);
        }
        if modes.is_empty() {
            bail!("perturbation: no modes given");
        }
        let scale = match self.perturbation.normalization {
            Normalization::Orthonormal => 1.0,
            // cos sθ = √π Y_{s,0} for s ≥ 1, and 1 = √(2π) Y_{0,0}.
            Normalization::Trigonometric => std::f64::consts::PI.sqrt(),
        };
        let mut e = HarmonicExpansion::zero(n);
        for m in modes {
            let factor = if m.degree == 0 { scale * std::f64::consts::SQRT_2 } else { scale };
            e.add_term(m.degree, m.index, factor * m.coefficient)?;
        }
        Ok(e)
    }

    pub fn fd_h(&self) -> f64 {
        if std::env::var_os("RSV_FD_H").is_some() {
            rsv_core::oracle::env_fd_h()
        } else {
            self.oracle.h.unwrap_or(rsv_core::oracle::DEFAULT_FD_H)
        }
    }

    /// `RSV_QUAD_ORDER`, then the config value, then the default.
    pub fn quadrature_order(&self, max_degree: usize) -> usize {
        rsv_core::quadrature::env_quad_order()
            .or(self.oracle.quadrature_order)
            .unwrap_or_else(|| rsv_core::variations::default_order(self.problem.n, max_degree))
    }
}

fn check_mode(n: usize, k: usize, m: &ModeSpec) -> Result<()> {
    if m.index >= multiplicity(m.degree, n) {
        bail!(
            "perturbation.modes[{k}]: index {} out of range for degree {} (n = {n} has {} modes)",
            m.index,
            m.degree,
            multiplicity(m.degree, n)
        );
    }
    if !m.coefficient.is_finite() {
        bail!("perturbation.modes[{k}].coefficient: must be finite");
    }
    Ok(())
}

fn read_coefficient_file(n: usize, path: &Path) -> Result<Vec<ModeSpec>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [s, i, c] => s.parse().ok().zip(i.parse().ok()).zip(c.parse().ok()),
            _ => None,
        };
        let ((degree, index), coefficient) = parsed.ok_or_else(|| {
            anyhow!("{}:{}: expected `degree index coefficient`, got {line:?}", path.display(), lineno + 1)
        })?;
        let m = ModeSpec { degree, index, coefficient };
        check_mode(n, lineno, &m).with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        out.push(m);
    }
    Ok(out)
}
