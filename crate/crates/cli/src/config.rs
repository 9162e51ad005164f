use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use torus_energy::measures::MeasureJson;
use torus_energy::minimize::{Init, Optimizer, DEFAULT_DELTA};
use torus_energy::subharmonic::{ProfileCheckConfig, ScanConfig};
use torus_energy::{DiagonalPolicy, DiscreteMeasure, KernelSpec, Measure, ProfileSpec, Space};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeBlock {
    pub n: usize,
    /// Unset: annealing for Riesz exponents `s ≤ −2`, gradient descent otherwise.
    pub optimizer: Option<Optimizer>,
    pub init: Option<Init>,
    pub restarts: usize,
    pub delta: f64,
}

impl Default for MinimizeBlock {
    fn default() -> Self {
        MinimizeBlock { n: 16, optimizer: None, init: None, restarts: 1, delta: DEFAULT_DELTA }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FourierBlock {
    pub n_max: usize,
    pub resolution: usize,
}

impl Default for FourierBlock {
    fn default() -> Self {
        FourierBlock { n_max: 8, resolution: torus_energy::fourier::DEFAULT_RESOLUTION }
    }
}

/// One experiment: every command reads the blocks it needs. The resolved
/// document is embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub format: Format,
    pub kernel: Option<KernelSpec>,
    pub space: Option<Space>,
    pub measure: Option<PathBuf>,
    pub second_measure: Option<PathBuf>,
    pub include_diagonal: bool,
    pub diagonal_policy: DiagonalPolicy,
    pub potential_grid: Option<usize>,
    pub scan: ScanConfig,
    pub probe: usize,
    pub tolerance: f64,
    pub minimize: MinimizeBlock,
    pub profile: Option<ProfileSpec>,
    pub profile_check: ProfileCheckConfig,
    pub fourier: FourierBlock,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            format: Format::Json,
            kernel: None,
            space: None,
            measure: None,
            second_measure: None,
            include_diagonal: false,
            diagonal_policy: DiagonalPolicy::default(),
            potential_grid: None,
            scan: ScanConfig::default(),
            probe: 128,
            tolerance: 1e-6,
            minimize: MinimizeBlock::default(),
            profile: None,
            profile_check: ProfileCheckConfig::default(),
            fourier: FourierBlock::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a config; relative paths inside it are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.measure, &mut cfg.second_measure].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn kernel(&self) -> Result<&KernelSpec> {
        self.kernel.as_ref().context("no kernel given (use --s or a \"kernel\" block)")
    }

    pub fn profile(&self) -> Result<&ProfileSpec> {
        self.profile.as_ref().context("no profile given (use --profile or a \"profile\" block)")
    }
}

/// Reads a measure from CSV (`x1..xk[, weight]`) or JSON.
pub fn read_measure(path: &Path, space: Option<Space>) -> Result<Measure> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read measure {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        let j: MeasureJson = serde_json::from_str(&text).with_context(|| format!("invalid measure {}", path.display()))?;
        return Ok(Measure::try_from(j)?);
    }
    let space = match space {
        Some(s) => s,
        None => {
            let header = text.lines().next().unwrap_or_default();
            let coords = header.split(',').filter(|h| h.trim().starts_with('x')).count();
            if coords == 0 {
                bail!("cannot infer the space of {}; pass --space", path.display());
            }
            Space::Torus(coords)
        }
    };
    Ok(Measure::Discrete(DiscreteMeasure::read_csv(space, text.as_bytes())?))
}
