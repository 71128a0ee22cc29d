//! Run configuration files and dataset schema files.
//!
//! A run file names the data, the schema (a path or an inline table) and the
//! training and output settings. Command-line flags override it.
//!
//! ```toml
//! data = "wine.data"
//! mode = "both"
//! max_layers = 10
//! out = "wine.model.toml"
//!
//! [schema]
//! label_column = 0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use oscerr::{DatasetSchema, Mode, TrainConfig};
use serde::Deserialize;

/// Which inference modes to score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Oracle,
    Hypothesis,
    #[default]
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeSelection::Oracle => vec![Mode::Oracle],
            ModeSelection::Hypothesis => vec![Mode::Hypothesis],
            ModeSelection::Both => Mode::ALL.to_vec(),
        }
    }
}

impl FromStr for ModeSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(ModeSelection::Oracle),
            "hypothesis" => Ok(ModeSelection::Hypothesis),
            "both" => Ok(ModeSelection::Both),
            other => Err(format!(
                "unknown mode {other:?}, expected oracle, hypothesis or both"
            )),
        }
    }
}

impl fmt::Display for ModeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeSelection::Oracle => "oracle",
            ModeSelection::Hypothesis => "hypothesis",
            ModeSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SchemaRef {
    Path(PathBuf),
    Inline(DatasetSchema),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauSettings {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_true() -> bool {
    true
}

fn default_threshold() -> f64 {
    TrainConfig::default().plateau_threshold
}

impl Default for PlateauSettings {
    fn default() -> Self {
        Self {
            enabled: true,
            threshold: default_threshold(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub test_data: Option<PathBuf>,
    pub schema: Option<SchemaRef>,
    pub mode: Option<ModeSelection>,
    pub max_layers: Option<usize>,
    #[serde(default)]
    pub plateau: PlateauSettings,
    pub margin: Option<u32>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a run file. Relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading run config {}", path.display()))?;
        let mut config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("parsing run config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.data,
            &mut config.test_data,
            &mut config.out,
            &mut config.report,
        ]
        .into_iter()
        .flatten()
        {
            *p = base.join(&*p);
        }
        if let Some(SchemaRef::Path(p)) = &mut config.schema {
            *p = base.join(&*p);
        }
        Ok(config)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let config = TrainConfig {
            max_layers: self.max_layers.unwrap_or(TrainConfig::default().max_layers),
            plateau_threshold: self.plateau.threshold,
            plateau_enabled: self.plateau.enabled,
            ..TrainConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_schema(&self) -> Result<DatasetSchema> {
        match &self.schema {
            Some(SchemaRef::Inline(schema)) => {
                schema.validate()?;
                Ok(schema.clone())
            }
            Some(SchemaRef::Path(path)) => load_schema(path),
            None => bail!("no dataset schema given (use --schema or a run config)"),
        }
    }

    /// Checks that every referenced input exists.
    pub fn validate_inputs(&self) -> Result<()> {
        let mut inputs: Vec<&Path> = Vec::new();
        inputs.extend(self.data.as_deref());
        inputs.extend(self.test_data.as_deref());
        if let Some(SchemaRef::Path(p)) = &self.schema {
            inputs.push(p);
        }
        for p in inputs {
            if !p.is_file() {
                bail!("{} does not exist", p.display());
            }
        }
        Ok(())
    }
}

pub fn load_schema(path: &Path) -> Result<DatasetSchema> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading schema {}", path.display()))?;
    let schema: DatasetSchema =
        toml::from_str(&text).with_context(|| format!("parsing schema {}", path.display()))?;
    schema.validate()?;
    Ok(schema)
}
