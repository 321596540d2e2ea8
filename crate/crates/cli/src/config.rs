//! Project configuration, read from a TOML file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use attrlens_core::analysis::RecallConfig;
use attrlens_core::backends::BackendConfig;
use attrlens_core::{AnnotatorConfig, DomainSpec};
use serde::Deserialize;

use crate::error::CliError;

pub const ROLES: [&str; 4] = ["chat", "itm", "detect", "embed"];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus_manifest: PathBuf,
    pub schema_file: PathBuf,
    pub store_file: PathBuf,
    pub report_dir: PathBuf,
    /// Response cache; leave empty to disable caching.
    #[serde(default)]
    pub cache_dir: PathBuf,
    /// Fixture file answering `mock:fixtures` backends.
    #[serde(default)]
    pub mock_fixtures: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionInput {
    pub category: String,
    pub human_annotations: PathBuf,
}

fn default_variance() -> f64 {
    0.95
}

/// Extra inputs consumed by individual reports.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportInputs {
    /// Reports produced when `--reports` is not given.
    #[serde(default)]
    pub default: Vec<String>,
    /// Categories for the class cross-tab; empty means all.
    #[serde(default)]
    pub crosstab_categories: Vec<String>,
    /// Comparison store for `diff`; the project store is the reference.
    pub compare_store: Option<PathBuf>,
    /// CSV `image_id,attribute,label` for `auc`.
    pub ground_truth: Option<PathBuf>,
    #[serde(default)]
    pub confusion: Vec<ConfusionInput>,
    /// Text file of reference attribute names, one per line, for `sweep`.
    pub real_attributes: Option<PathBuf>,
    #[serde(default)]
    pub sweep_n: Vec<u32>,
    #[serde(default)]
    pub sweep_m: Vec<u32>,
    #[serde(default = "default_variance")]
    pub variance_threshold: f64,
}

impl Default for ReportInputs {
    fn default() -> Self {
        ReportInputs {
            default: Vec::new(),
            crosstab_categories: Vec::new(),
            compare_store: None,
            ground_truth: None,
            confusion: Vec::new(),
            real_attributes: None,
            sweep_n: Vec::new(),
            sweep_m: Vec::new(),
            variance_threshold: default_variance(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub domain: DomainSpec,
    pub backends: BTreeMap<String, BackendConfig>,
    #[serde(default)]
    pub annotator: AnnotatorConfig,
    #[serde(default)]
    pub recall: RecallConfig,
    pub paths: Paths,
    #[serde(default)]
    pub report: ReportInputs,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub root: PathBuf,
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: ProjectConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.root = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let mut problems = self.domain.violations();
        for role in ROLES {
            match self.backends.get(role) {
                None => problems.push(format!("backend role {role} is not configured")),
                Some(b) => {
                    if let Err(e) = b.validate() {
                        problems.push(format!("backend {role}: {e}"));
                    }
                }
            }
        }
        for role in self.backends.keys() {
            if !ROLES.contains(&role.as_str()) {
                problems.push(format!("unknown backend role {role}"));
            }
        }
        for (name, p) in [
            ("corpus_manifest", &self.paths.corpus_manifest),
            ("schema_file", &self.paths.schema_file),
            ("store_file", &self.paths.store_file),
            ("report_dir", &self.paths.report_dir),
        ] {
            if p.as_os_str().is_empty() {
                problems.push(format!("paths.{name} must be non-empty"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems.join("; ")))
        }
    }

    /// Resolves `p` against the config file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn backend(&self, role: &str) -> &BackendConfig {
        &self.backends[role]
    }

    pub fn cache_dir(&self) -> Option<PathBuf> {
        (!self.paths.cache_dir.as_os_str().is_empty()).then(|| self.resolve(&self.paths.cache_dir))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[domain]
caption = "a photo of a bird"
noun = "bird"

[backends.chat]
endpoint_url = "mock:fixtures"
model_id = "gpt"
[backends.itm]
endpoint_url = "mock:fixtures"
model_id = "blip"
[backends.detect]
endpoint_url = "mock:fixtures"
model_id = "owl"
[backends.embed]
endpoint_url = "mock:hash-embedding?dim=16"
model_id = "hash"

[paths]
corpus_manifest = "corpus.jsonl"
schema_file = "schema.json"
store_file = "store.jsonl"
report_dir = "reports"
"#;

    fn load(text: &str) -> Result<ProjectConfig, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("project.toml");
        fs::write(&path, text).unwrap();
        ProjectConfig::load(&path)
    }

    #[test]
    fn defaults_fill_in() {
        let c = load(MINIMAL).unwrap();
        assert_eq!((c.domain.n_categories, c.domain.m_attributes), (10, 5));
        assert_eq!(c.annotator.alpha, 0.3);
        assert_eq!(c.recall.beta, 0.8);
        assert!(c.cache_dir().is_none());
        assert_eq!(c.report.variance_threshold, 0.95);
    }

    #[test]
    fn missing_role_rejected() {
        let text = MINIMAL.replace("[backends.detect]", "[backends.detector]");
        let err = load(&text).unwrap_err().to_string();
        assert!(err.contains("backend role detect is not configured"), "{err}");
        assert!(err.contains("unknown backend role detector"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        assert!(load(&text).is_err());
    }
}
