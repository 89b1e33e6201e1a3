use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::FilterParams;
use crate::metrics::MatchConfig;
use crate::state::ObjectClass;

/// Run configuration, read from TOML.
///
/// ```toml
/// input = "detections.json"
/// ground_truth = "gt.json"      # optional; enables evaluation
/// output_dir = "out"
/// classes = ["car", "pedestrian"]  # optional; default: classes in the input
/// plot = false
/// parallelism = 4               # 0 picks the number of CPUs
///
/// [defaults]                    # FilterParams for every class
/// extraction_threshold = 0.7
///
/// [overrides.pedestrian]        # replaces individual keys for one class
/// birth_weight = 0.05
///
/// [metrics]
/// match_distance = 3.0
/// ```
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    #[serde(default)]
    pub ground_truth: Option<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub classes: Option<Vec<String>>,
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default)]
    pub defaults: FilterParams,
    #[serde(default)]
    pub overrides: BTreeMap<String, toml::Table>,
    #[serde(default)]
    pub metrics: MatchConfig,
}

impl RunConfig {
    /// A configuration with default parameters for every class.
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            ground_truth: None,
            output_dir: output_dir.into(),
            classes: None,
            plot: false,
            parallelism: 0,
            defaults: FilterParams::default(),
            overrides: BTreeMap::new(),
            metrics: MatchConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, path, base)
    }

    /// Parses TOML text; `origin` names the source in errors and relative
    /// paths are joined onto `base`.
    pub fn parse(text: &str, origin: &Path, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            json_path: String::new(),
            message: e.to_string().trim_end().to_string(),
        })?;
        for p in [&mut cfg.input, &mut cfg.output_dir]
            .into_iter()
            .chain(cfg.ground_truth.as_mut())
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks class names and the parameters of every class.
    pub fn validate(&self) -> Result<()> {
        self.defaults.validate()?;
        self.metrics.validate()?;
        self.requested_classes()?;
        for name in self.overrides.keys() {
            let class: ObjectClass = name.parse()?;
            self.params_for(class)?;
        }
        Ok(())
    }

    /// Classes named in the config, or `None` to track every class present.
    pub fn requested_classes(&self) -> Result<Option<Vec<ObjectClass>>> {
        let Some(names) = &self.classes else {
            return Ok(None);
        };
        let mut out = names
            .iter()
            .map(|n| n.parse::<ObjectClass>())
            .collect::<Result<Vec<_>>>()?;
        out.sort();
        out.dedup();
        Ok(Some(out))
    }

    /// Defaults with the class's overrides applied.
    pub fn params_for(&self, class: ObjectClass) -> Result<FilterParams> {
        let Some(over) = self.overrides.get(class.as_str()) else {
            return Ok(self.defaults.clone());
        };
        let mut table = toml::Table::try_from(&self.defaults)
            .map_err(|e| Error::InvalidParameter(format!("defaults: {e}")))?;
        for (k, v) in over {
            table.insert(k.clone(), v.clone());
        }
        let params: FilterParams = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::InvalidParameter(format!("overrides.{class}: {e}")))?;
        params
            .validate()
            .map_err(|e| Error::InvalidParameter(format!("overrides.{class}: {e}")))?;
        Ok(params)
    }
}
