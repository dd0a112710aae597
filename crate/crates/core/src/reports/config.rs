//! TOML run configuration. Every block has defaults; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::brown_ravenhall::{ProfileFamily, ProfileGrid, DEFAULT_C_TILDE_PRIME_FACTOR};
use crate::error::{Error, Result};
use crate::lt_bounds::{L0Provider, DEFAULT_T_GRID};
use crate::spectral::{GridSpec, SolverSettings};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub remainder: RemainderConfig,
    #[serde(default)]
    pub hlt: HltConfig,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub br: BrConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: DEFAULT_SEED,
            constants: ConstantsConfig::default(),
            remainder: RemainderConfig::default(),
            hlt: HltConfig::default(),
            verify: Some(VerifyConfig::default()),
            br: BrConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    /// (d, s) pairs, reported in this order
    pub pairs: Vec<(u32, f64)>,
    pub psi_grid: usize,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig {
            pairs: vec![(3, 0.5), (3, 1.0)],
            psi_grid: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderCase {
    pub d: u32,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RemainderConfig {
    pub cases: Vec<RemainderCase>,
    pub momenta: usize,
    pub p_min: f64,
    pub p_max: f64,
}

impl Default for RemainderConfig {
    fn default() -> Self {
        RemainderConfig {
            cases: vec![
                RemainderCase { d: 1, s: 0.45, t: 0.44 },
                RemainderCase { d: 2, s: 0.7, t: 0.66 },
                RemainderCase { d: 3, s: 0.5, t: 0.4 },
            ],
            momenta: 51,
            p_min: 1e-3,
            p_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HltConfig {
    pub d: u32,
    pub s: f64,
    pub gammas: Vec<f64>,
    pub t_grid: usize,
    pub l0: L0Provider,
}

impl Default for HltConfig {
    fn default() -> Self {
        HltConfig {
            d: 3,
            s: 0.5,
            gammas: vec![0.5, 1.0, 2.0],
            t_grid: DEFAULT_T_GRID,
            l0: L0Provider::Semiclassical { multiplier: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// grid of the HLT and Birman-Schwinger checks
    pub grid: GridSpec,
    #[serde(default = "default_verify_s")]
    pub s: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub hardy: Option<HardyBlock>,
    #[serde(default)]
    pub hardyrem: Option<HardyRemBlock>,
    #[serde(default)]
    pub hlt: Option<HltBlock>,
    #[serde(default)]
    pub bs: Option<BsBlock>,
    #[serde(default)]
    pub magnetic: Option<MagneticBlock>,
}

fn default_verify_s() -> f64 {
    0.3
}

fn default_gamma() -> f64 {
    1.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid: GridSpec::staggered(1, 128, 20.0).expect("valid default grid"),
            s: default_verify_s(),
            gamma: default_gamma(),
            solver: SolverSettings::default(),
            hardy: None,
            hardyrem: None,
            hlt: None,
            bs: None,
            magnetic: None,
        }
    }
}

/// Hardy form on random trial functions; the grid defaults to d = 3, n = 24.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardyBlock {
    pub grid: GridSpec,
    pub s: f64,
    pub trials: usize,
}

impl Default for HardyBlock {
    fn default() -> Self {
        HardyBlock {
            grid: GridSpec::staggered(3, 24, 20.0).expect("valid default grid"),
            s: 0.5,
            trials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardyRemBlock {
    pub grid: GridSpec,
    pub s: f64,
    pub t: f64,
    pub l_values: Vec<f64>,
    pub trials: usize,
}

impl Default for HardyRemBlock {
    fn default() -> Self {
        HardyRemBlock {
            grid: GridSpec::staggered(3, 24, 20.0).expect("valid default grid"),
            s: 0.5,
            t: 0.4,
            l_values: vec![0.5, 1.0, 2.0, 4.0],
            trials: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HltBlock {
    pub count: usize,
    pub t_grid: usize,
    pub l0: L0Provider,
}

impl Default for HltBlock {
    fn default() -> Self {
        HltBlock {
            count: 200,
            t_grid: DEFAULT_T_GRID,
            l0: L0Provider::Semiclassical { multiplier: 1.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BsBlock {
    pub instances: usize,
    pub tau: f64,
    /// an extra 2-D grid; instances alternate between it and the main grid
    pub grid_2d: Option<GridSpec>,
}

impl Default for BsBlock {
    fn default() -> Self {
        BsBlock {
            instances: 100,
            tau: 0.05,
            grid_2d: Some(GridSpec::staggered(2, 16, 6.0).expect("valid default grid")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MagneticBlock {
    pub sizes: Vec<usize>,
    /// fluxes k·π/8
    pub flux_eighths: Vec<u32>,
    pub s_powers: Vec<f64>,
    pub t_values: Vec<f64>,
    pub tau: f64,
    pub domination_times: Vec<f64>,
    pub domination_trials: usize,
    pub transfer_samples: usize,
    pub transfer_gamma: f64,
}

impl Default for MagneticBlock {
    fn default() -> Self {
        MagneticBlock {
            sizes: vec![8, 12],
            flux_eighths: (0..=8).collect(),
            s_powers: vec![1.0, 0.5],
            t_values: vec![0.5, 1.0, 2.0, 4.0],
            tau: 0.05,
            domination_times: vec![0.1, 1.0, 5.0],
            domination_trials: 4,
            transfer_samples: 100,
            transfer_gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrConfig {
    /// absolute C̃′; when absent, factor·C̃
    pub c_tilde_prime: Option<f64>,
    pub c_tilde_prime_factor: f64,
    pub c_tilde_prime_provenance: String,
    pub profiles: Vec<ProfileFamily>,
    pub profile_grid: ProfileGrid,
    pub tol_q: f64,
    pub gamma: f64,
    pub t_grid: usize,
    pub l0: L0Provider,
}

impl Default for BrConfig {
    fn default() -> Self {
        BrConfig {
            c_tilde_prime: None,
            c_tilde_prime_factor: DEFAULT_C_TILDE_PRIME_FACTOR,
            c_tilde_prime_provenance: "placeholder 1.05 C~: only the existence of some C~' > C~ is known".into(),
            profiles: ProfileFamily::standard_set(),
            profile_grid: ProfileGrid::default(),
            tol_q: 1e-3,
            gamma: 1.0,
            t_grid: DEFAULT_T_GRID,
            l0: L0Provider::Semiclassical { multiplier: 1.0 },
        }
    }
}
