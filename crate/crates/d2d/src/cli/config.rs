//! Run configuration: a sectioned key-value file covering the dataset
//! location, split fractions, architecture, loss weights, and training loop.
//!
//! Parsing is strict about key names — every unknown section or key is
//! collected and reported in one error — while omitted keys fall back to
//! defaults. The fully resolved configuration (defaults included) is what
//! commands record in their run manifests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::SplitSpec;
use crate::error::{Error, Result};
use crate::model::{ArchSpec, HyperParams};
use crate::training::TrainConfig;

/// Recognized sections and their keys; anything else is rejected.
const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("data", &["cache"]),
    ("split", &["train_frac", "valid_frac", "test_frac", "seed"]),
    (
        "arch",
        &[
            "input_dims",
            "encoder_layer_sizes",
            "latent_dim",
            "generator_layer_sizes",
            "n_shared_encoder_layers",
            "n_shared_generator_layers",
            "discriminator_layer_sizes",
        ],
    ),
    (
        "hyper",
        &["lambda0", "lambda1", "lambda2", "lambda3", "lambda4", "recon_loss_kind"],
    ),
    (
        "train",
        &[
            "epochs",
            "batch_size",
            "lr_encgen",
            "lr_disc",
            "disc_steps_per_gen_step",
            "dropout_rate",
            "seed",
            "variant",
            "early_stop_patience",
            "eval_k_for_selection",
            "selection_metric",
            "n_restarts",
            "probe_epochs",
        ],
    ),
    ("output", &["dir"]),
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSection {
    /// Path to a dataset cache written by the ingest command; relative paths
    /// resolve against the config file's directory.
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// Where run artifacts land; relative paths resolve like `data.cache`.
    pub dir: Option<PathBuf>,
}

/// Architecture keys. Input widths normally come from the dataset; when
/// `input_dims` is present it is cross-checked against the dataset instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArchSection {
    pub input_dims: Option<(usize, usize)>,
    pub encoder_layer_sizes: Vec<usize>,
    pub latent_dim: usize,
    pub generator_layer_sizes: Vec<usize>,
    pub n_shared_encoder_layers: usize,
    pub n_shared_generator_layers: usize,
    pub discriminator_layer_sizes: Vec<usize>,
}

impl Default for ArchSection {
    fn default() -> Self {
        // the dense-catalog preset; width fields track ArchSpec::movielens
        let preset = ArchSpec::movielens(1, 1);
        ArchSection {
            input_dims: None,
            encoder_layer_sizes: preset.encoder_layer_sizes,
            latent_dim: preset.latent_dim,
            generator_layer_sizes: preset.generator_layer_sizes,
            n_shared_encoder_layers: preset.n_shared_encoder_layers,
            n_shared_generator_layers: preset.n_shared_generator_layers,
            discriminator_layer_sizes: preset.discriminator_layer_sizes,
        }
    }
}

impl ArchSection {
    pub fn to_arch(&self, input_dims: (usize, usize)) -> ArchSpec {
        ArchSpec {
            input_dims,
            encoder_layer_sizes: self.encoder_layer_sizes.clone(),
            latent_dim: self.latent_dim,
            generator_layer_sizes: self.generator_layer_sizes.clone(),
            n_shared_encoder_layers: self.n_shared_encoder_layers,
            n_shared_generator_layers: self.n_shared_generator_layers,
            discriminator_layer_sizes: self.discriminator_layer_sizes.clone(),
        }
    }
}

/// A parsed run configuration; omitted sections hold their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub data: DataSection,
    pub split: SplitSpec,
    pub arch: ArchSection,
    pub hyper: HyperParams,
    pub train: TrainConfig,
    pub output: OutputSection,
}

/// Everything a training run needs, with defaults filled in and values
/// validated; serialized as-is into run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub split: SplitSpec,
    pub arch: ArchSpec,
    pub hyper: HyperParams,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
            location: "config".to_string(),
            message: e.message().to_string(),
        })?;

        let mut unknown = Vec::new();
        for (section, value) in &table {
            match KNOWN_KEYS.iter().find(|(name, _)| name == section) {
                None => unknown.push(format!("unknown section '{section}'")),
                Some((_, keys)) => {
                    if let toml::Value::Table(entries) = value {
                        for key in entries.keys() {
                            if !keys.contains(&key.as_str()) {
                                unknown.push(format!("unknown key '{section}.{key}'"));
                            }
                        }
                    } else {
                        unknown.push(format!("'{section}' must be a section, not a value"));
                    }
                }
            }
        }
        if !unknown.is_empty() {
            return Err(Error::Config(unknown));
        }

        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Parse {
            location: "config".to_string(),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text).map_err(|e| match e {
            Error::Parse { location, message } if location == "config" => Error::Parse {
                location: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    /// Validates all sections against the dataset's item counts, collecting
    /// every problem into one error.
    pub fn resolve(&self, input_dims: (usize, usize)) -> Result<ResolvedRun> {
        let mut problems = Vec::new();
        if let Some(declared) = self.arch.input_dims {
            if declared != input_dims {
                problems.push(format!(
                    "arch.input_dims {declared:?} does not match the dataset's {input_dims:?}"
                ));
            }
        }
        let arch = self.arch.to_arch(input_dims);
        for result in [
            arch.validate(),
            self.split.validate(),
            self.hyper.validate(),
            self.train.validate(),
        ] {
            match result {
                Ok(()) => {}
                Err(Error::Config(list)) => problems.extend(list),
                Err(other) => problems.push(other.to_string()),
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(ResolvedRun {
            split: self.split,
            arch,
            hyper: self.hyper,
            train: self.train,
        })
    }

    /// The dataset cache path, resolved against the config file's directory.
    pub fn cache_path(&self, config_dir: &Path) -> Result<PathBuf> {
        match &self.data.cache {
            Some(p) => Ok(resolve_path(config_dir, p)),
            None => Err(Error::Config(vec!["data.cache is required".to_string()])),
        }
    }

    /// The output directory, with a command-line override taking precedence.
    pub fn out_dir(&self, config_dir: &Path, cli_out: Option<&Path>) -> Result<PathBuf> {
        match (cli_out, &self.output.dir) {
            (Some(p), _) => Ok(p.to_path_buf()),
            (None, Some(p)) => Ok(resolve_path(config_dir, p)),
            (None, None) => Err(Error::Config(vec![
                "output.dir (or --out) is required".to_string(),
            ])),
        }
    }
}

pub fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ReconLossKind;
    use crate::training::Variant;

    #[test]
    fn empty_config_is_all_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.train.epochs, 200);
        assert_eq!(cfg.hyper.lambda0, 10.0);
        assert_eq!(cfg.split.train_frac, 0.70);
    }

    #[test]
    fn partial_sections_keep_other_defaults() {
        let cfg = RunConfig::parse(
            "[train]\nepochs = 5\nvariant = \"vae_cc\"\n\n[hyper]\nrecon_loss_kind = \"logistic\"\n",
        )
        .unwrap();
        assert_eq!(cfg.train.epochs, 5);
        assert_eq!(cfg.train.variant, Variant::VaeCc);
        assert_eq!(cfg.train.batch_size, 128);
        assert_eq!(cfg.hyper.recon_loss_kind, ReconLossKind::Logistic);
        assert_eq!(cfg.hyper.lambda2, 100.0);
    }

    #[test]
    fn unknown_keys_are_all_reported() {
        let err = RunConfig::parse(
            "[train]\nepoch = 5\nlearning_rate = 0.1\n\n[bogus]\nx = 1\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        for needle in ["train.epoch", "train.learning_rate", "bogus"] {
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn resolve_checks_dims_and_values_together() {
        let cfg = RunConfig::parse(
            "[arch]\ninput_dims = [9, 9]\nlatent_dim = 0\n\n[train]\nbatch_size = 0\n",
        )
        .unwrap();
        let err = cfg.resolve((20, 20)).unwrap_err();
        let msg = err.to_string();
        for needle in ["input_dims", "latent", "batch_size"] {
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn resolve_fills_input_dims_from_dataset() {
        let cfg = RunConfig::parse(
            "[arch]\nencoder_layer_sizes = [8, 4]\nlatent_dim = 2\ngenerator_layer_sizes = [4, 8]\ndiscriminator_layer_sizes = [4]\n",
        )
        .unwrap();
        let run = cfg.resolve((20, 30)).unwrap();
        assert_eq!(run.arch.input_dims, (20, 30));
        assert_eq!(run.arch.encoder_layer_sizes, vec![8, 4]);
    }

    #[test]
    fn paths_resolve_relative_to_config_dir() {
        let cfg = RunConfig::parse("[data]\ncache = \"ds.txt\"\n[output]\ndir = \"/abs/run\"\n").unwrap();
        let dir = Path::new("/proj/conf");
        assert_eq!(cfg.cache_path(dir).unwrap(), PathBuf::from("/proj/conf/ds.txt"));
        assert_eq!(cfg.out_dir(dir, None).unwrap(), PathBuf::from("/abs/run"));
        assert_eq!(
            cfg.out_dir(dir, Some(Path::new("elsewhere"))).unwrap(),
            PathBuf::from("elsewhere")
        );
    }

    #[test]
    fn missing_required_paths_are_reported() {
        let cfg = RunConfig::parse("").unwrap();
        assert!(cfg.cache_path(Path::new(".")).is_err());
        assert!(cfg.out_dir(Path::new("."), None).is_err());
    }
}
