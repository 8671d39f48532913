//! TOML configuration for each subcommand. Unknown keys are rejected and
//! relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wssl_core::datagen::{spherical_wrist_spec, DistributionSpec, SubspaceDescriptor};
use wssl_core::kinematics::{IkSettings, Manipulator};
use wssl_core::slnet::TrainConfig;
use wssl_core::workspace::{build_scope, Scope, ScopeMode};

use crate::error::{CliError, CliResult};

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::validation(e.to_string().trim_end().to_string()))
}

pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScopeConfig {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub delta: [f64; 3],
    #[serde(default)]
    pub fixed: [f64; 3],
    #[serde(default = "default_mode")]
    pub mode: ScopeMode,
}

fn default_mode() -> ScopeMode {
    ScopeMode::ConstantOrientation
}

impl ScopeConfig {
    pub fn cube(half_width: f64, delta: f64) -> Self {
        Self {
            min: [-half_width; 3],
            max: [half_width; 3],
            delta: [delta; 3],
            fixed: [0.0; 3],
            mode: ScopeMode::ConstantOrientation,
        }
    }

    pub fn build(&self) -> CliResult<Scope> {
        Ok(build_scope(
            self.min, self.max, self.delta, self.fixed, self.mode,
        )?)
    }
}

fn default_beta() -> f64 {
    0.5
}

fn default_subspace_id() -> String {
    "full".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub output: PathBuf,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Scale of the spherical-wrist distribution, used when `spec` is absent.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub spec: Option<DistributionSpec>,
    #[serde(default = "default_subspace_id")]
    pub subspace_id: String,
    /// 1-based inclusive label range; the whole label vector when absent.
    #[serde(default)]
    pub output_slice: Option<[usize; 2]>,
    pub scope: ScopeConfig,
    #[serde(default)]
    pub ik: IkSettings,
    /// Optional CSV export of the dataset.
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl GenerateConfig {
    pub fn descriptor(&self, scope: &Scope) -> CliResult<SubspaceDescriptor> {
        let spec = match &self.spec {
            Some(s) => {
                s.check_scope(scope)?;
                s.clone()
            }
            None => spherical_wrist_spec(self.beta, scope)?,
        };
        let slice = self.output_slice.unwrap_or([1, spec.label_len()]);
        Ok(SubspaceDescriptor::new(
            self.subspace_id.clone(),
            spec,
            slice,
        )?)
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceConfig {
    pub manipulator: Manipulator,
    pub scope: ScopeConfig,
    #[serde(default)]
    pub ik: IkSettings,
    /// Skip IK at nodes beyond the reach bound.
    #[serde(default = "yes")]
    pub prefilter: bool,
    /// Flatten-order `0`/`1` text.
    pub bits: PathBuf,
    /// Point cloud.
    pub csv: PathBuf,
}

fn default_split() -> [f64; 3] {
    [0.7, 0.15, 0.15]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainCmdConfig {
    pub dataset: PathBuf,
    pub bank: PathBuf,
    pub log: PathBuf,
    pub hidden_sizes: Vec<usize>,
    /// Train, validation and test fractions.
    #[serde(default = "default_split")]
    pub split: [f64; 3],
    #[serde(default)]
    pub split_seed: u64,
    /// Expected network input width, checked against the dataset.
    #[serde(default)]
    pub input_dim: Option<usize>,
    /// Expected network output width, checked against the dataset.
    #[serde(default)]
    pub output_dim: Option<usize>,
    #[serde(default)]
    pub train: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    #[default]
    All,
    Train,
    Validation,
    Test,
}

fn default_threshold() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub bank: PathBuf,
    pub dataset: PathBuf,
    /// Bank entry to evaluate; defaults to the dataset's descriptor id.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub subset: Subset,
    #[serde(default = "default_split")]
    pub split: [f64; 3],
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub bank: PathBuf,
    /// Bank entry whose distribution supplies the manipulator; defaults to
    /// the first entry.
    #[serde(default)]
    pub id: Option<String>,
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    pub scope: ScopeConfig,
    #[serde(default)]
    pub ik: IkSettings,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Learning,
    Optimizers,
    Runtime,
    IkRoundTrip,
    Annulus,
    Gradient,
    LossExpectation,
    Determinism,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproConfig {
    pub preset: Preset,
    /// Directory for generated configs, datasets, banks and logs.
    pub workdir: PathBuf,
    #[serde(default = "default_repro_seed")]
    pub seed: u64,
}

fn default_repro_seed() -> u64 {
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys() {
        let ok = r#"
            output = "d.wssl"
            n = 3
            [scope]
            min = [-1.0, -1.0, -1.0]
            max = [1.0, 1.0, 1.0]
            delta = [0.5, 0.5, 0.5]
        "#;
        let c: GenerateConfig = parse(ok).unwrap();
        assert_eq!(c.beta, 0.5);
        assert_eq!(c.scope.mode, ScopeMode::ConstantOrientation);
        let bad = format!("{ok}\nbogus = 1\n");
        assert!(matches!(
            parse::<GenerateConfig>(&bad),
            Err(CliError::Validation(_))
        ));
        let bad_ik = format!("{ok}\n[ik]\ntolerence = 1e-3\n");
        assert!(parse::<GenerateConfig>(&bad_ik).is_err());
    }

    #[test]
    fn descriptor_defaults_to_full_label() {
        let c = GenerateConfig {
            output: "x".into(),
            n: 1,
            seed: 0,
            beta: 0.5,
            spec: None,
            subspace_id: "full".into(),
            output_slice: None,
            scope: ScopeConfig::cube(1.0, 0.5),
            ik: IkSettings::default(),
            csv: None,
        };
        let d = c.descriptor(&c.scope.build().unwrap()).unwrap();
        assert_eq!(d.output_dim(), 125);
        assert_eq!(d.input_dim(), 4);
    }

    #[test]
    fn relative_paths() {
        assert_eq!(
            resolve(Path::new("/a/b"), Path::new("c.txt")),
            PathBuf::from("/a/b/c.txt")
        );
        assert_eq!(
            resolve(Path::new("/a/b"), Path::new("/c.txt")),
            PathBuf::from("/c.txt")
        );
    }
}
