//! JSON experiment configuration files. Lexicon and cluster paths are
//! resolved relative to the directory of the file that names them.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::clusters::{ClusterKind, ClusterLexicon};
use crate::error::{Error, Result};
use crate::lexicon::PolarityLexicon;
use crate::ote::{NamedClusterLexicon, OteFeatureConfig};
use crate::polarity::PolarityFeatureConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSource {
    pub name: String,
    pub kind: ClusterKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSource {
    pub name: String,
    pub path: PathBuf,
}

/// Target extraction settings as written in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OteConfigFile {
    pub window: usize,
    pub prefix_len: usize,
    pub suffix_len: usize,
    pub use_bigrams: bool,
    pub use_trigrams: bool,
    pub constrained: bool,
    pub feature_cutoff: usize,
    pub clusters: Vec<ClusterSource>,
}

impl Default for OteConfigFile {
    fn default() -> Self {
        let d = OteFeatureConfig::default();
        OteConfigFile {
            window: d.window,
            prefix_len: d.prefix_len,
            suffix_len: d.suffix_len,
            use_bigrams: d.use_bigrams,
            use_trigrams: d.use_trigrams,
            constrained: d.constrained,
            feature_cutoff: d.feature_cutoff,
            clusters: Vec::new(),
        }
    }
}

/// Polarity settings as written in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarityConfigFile {
    /// Label used in ablation tables; defaults to the file stem.
    pub name: Option<String>,
    pub ngram_max: usize,
    pub use_pos: bool,
    pub window: Option<usize>,
    pub use_category: bool,
    pub scale_features: bool,
    pub lexicons: Vec<LexiconSource>,
    pub clusters: Vec<ClusterSource>,
}

impl Default for PolarityConfigFile {
    fn default() -> Self {
        let d = PolarityFeatureConfig::default();
        PolarityConfigFile {
            name: None,
            ngram_max: d.ngram_max,
            use_pos: d.use_pos,
            window: d.window,
            use_category: d.use_category,
            scale_features: d.scale_features,
            lexicons: Vec::new(),
            clusters: Vec::new(),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.line(), e.to_string()))
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

impl ClusterSource {
    /// Path as given, or joined to `base` when relative.
    pub fn resolved(&self, base: &Path) -> PathBuf {
        base.join(&self.path)
    }

    pub fn load(&self, base: &Path) -> Result<NamedClusterLexicon> {
        Ok(NamedClusterLexicon {
            name: self.name.clone(),
            lexicon: ClusterLexicon::load(self.kind, self.resolved(base))?,
        })
    }
}

impl LexiconSource {
    pub fn resolved(&self, base: &Path) -> PathBuf {
        base.join(&self.path)
    }

    pub fn load(&self, base: &Path) -> Result<PolarityLexicon> {
        PolarityLexicon::read(self.name.clone(), self.resolved(base))
    }
}

impl OteConfigFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }

    /// Every file the config refers to.
    pub fn referenced_paths(&self, base: &Path) -> Vec<PathBuf> {
        self.clusters.iter().map(|c| c.resolved(base)).collect()
    }

    pub fn build(&self, base: &Path) -> Result<OteFeatureConfig> {
        let config = OteFeatureConfig {
            window: self.window,
            prefix_len: self.prefix_len,
            suffix_len: self.suffix_len,
            use_bigrams: self.use_bigrams,
            use_trigrams: self.use_trigrams,
            cluster_lexicons: self.clusters.iter().map(|c| c.load(base)).collect::<Result<_>>()?,
            constrained: self.constrained,
            feature_cutoff: self.feature_cutoff,
        };
        config.validate()?;
        Ok(config)
    }
}

impl PolarityConfigFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }

    pub fn referenced_paths(&self, base: &Path) -> Vec<PathBuf> {
        self.lexicons
            .iter()
            .map(|l| l.resolved(base))
            .chain(self.clusters.iter().map(|c| c.resolved(base)))
            .collect()
    }

    pub fn build(&self, base: &Path) -> Result<PolarityFeatureConfig> {
        let config = PolarityFeatureConfig {
            ngram_max: self.ngram_max,
            use_pos: self.use_pos,
            window: self.window,
            lexicons: self.lexicons.iter().map(|l| l.load(base)).collect::<Result<_>>()?,
            cluster_lexicons: self.clusters.iter().map(|c| c.load(base)).collect::<Result<_>>()?,
            use_category: self.use_category,
            scale_features: self.scale_features,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads and builds a target extraction config file.
pub fn load_ote_config(path: impl AsRef<Path>) -> Result<OteFeatureConfig> {
    let path = path.as_ref();
    OteConfigFile::read(path)?.build(base_dir(path))
}

/// Reads and builds a polarity config file.
pub fn load_polarity_config(path: impl AsRef<Path>) -> Result<PolarityFeatureConfig> {
    let path = path.as_ref();
    PolarityConfigFile::read(path)?.build(base_dir(path))
}

/// Every `*.json` polarity config in a directory, in file name order, each
/// paired with its `name` or file stem.
pub fn load_polarity_config_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, PolarityFeatureConfig)>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!("no .json configs in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let file = PolarityConfigFile::read(p)?;
            let name = file.name.clone().unwrap_or_else(|| {
                p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            Ok((name, file.build(base_dir(p))?))
        })
        .collect()
}
