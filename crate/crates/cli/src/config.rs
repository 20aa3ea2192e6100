use std::path::{Path, PathBuf};

use arnold_lab::{make_grid, make_profile, Mapping, ProfileKind, ProfileSpec, RadialGrid, VortexProfile};
use serde::Deserialize;

use crate::{CliError, Common};

/// Profile block: a kind plus its parameters.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ProfileBlock {
    #[serde(default)]
    pub kind: Option<ProfileKind>,
    #[serde(flatten)]
    pub spec: ProfileSpec,
}

/// Grid block with every field optional.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub mapping: Option<Mapping>,
    #[serde(rename = "K_max", default)]
    pub k_max: Option<usize>,
}

/// Configuration file of every command except `evolve`, which reads a run configuration.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub profile: ProfileBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub operator: Option<String>,
    #[serde(default)]
    pub k: Option<i32>,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub suite: Option<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// Flags merged over the config file.
pub struct Settings {
    pub file: FileConfig,
    pub flags: Common,
}

impl Settings {
    pub fn load(flags: &Common, read_file: bool) -> Result<Self, CliError> {
        let file = match (&flags.config, read_file) {
            (Some(p), true) => read_json(p)?,
            _ => FileConfig::default(),
        };
        Ok(Self { file, flags: flags.clone() })
    }

    pub fn kind(&self) -> ProfileKind {
        self.flags.profile.or(self.file.profile.kind).unwrap_or(ProfileKind::Gaussian)
    }

    pub fn profile(&self) -> Result<VortexProfile, CliError> {
        let mut spec = self.file.profile.spec.clone();
        if self.flags.kappa.is_some() {
            spec.kappa = self.flags.kappa;
        }
        Ok(make_profile(self.kind(), &spec)?)
    }

    pub fn seed(&self) -> u64 {
        self.flags.seed.or(self.file.seed).unwrap_or(0)
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.flags.out.clone().or_else(|| self.file.out.clone())
    }

    pub fn k_max(&self, default: usize) -> usize {
        self.flags.kmax.or(self.file.grid.k_max).unwrap_or(default)
    }

    /// Grid from flags, then the config file, then the command default.
    pub fn grid(&self, default: (Mapping, usize, f64)) -> Result<RadialGrid, CliError> {
        let g = &self.file.grid;
        let mapping = self.flags.mapping.or(g.mapping).unwrap_or(default.0);
        let n = self.flags.n.or(g.n).unwrap_or(default.1);
        let r_max = self.flags.rmax.or(g.r_max).unwrap_or(default.2);
        Ok(make_grid(n, r_max, mapping)?)
    }
}
