//! Task files (TOML) and command-line flags resolved into a validated
//! [`TaskSpec`]. Precedence: flag > task file > model file > default.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use relbound_core::model_io::{parse_model_file, ModelFile};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_T0: f64 = 1.0;
pub const DEFAULT_MAX_SUPPORT: usize = 8;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT: &str = "out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    ModelCheck,
    Expand,
    AkltVerify,
    AkltSplit,
    Correlate,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::ModelCheck => "model-check",
            TaskKind::Expand => "expand",
            TaskKind::AkltVerify => "aklt-verify",
            TaskKind::AkltSplit => "aklt-split",
            TaskKind::Correlate => "correlate",
        }
    }

    /// Keys that must be present (after defaults) for the task.
    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            TaskKind::ModelCheck => &["model"],
            TaskKind::Expand => &["model", "N"],
            TaskKind::AkltVerify | TaskKind::AkltSplit => &["l", "n_blocks"],
            TaskKind::Correlate => &["model", "A1", "A2"],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "model-check" => TaskKind::ModelCheck,
            "expand" => TaskKind::Expand,
            "aklt-verify" => TaskKind::AkltVerify,
            "aklt-split" => TaskKind::AkltSplit,
            "correlate" => TaskKind::Correlate,
            other => return Err(CliError::UnknownTask(other.to_string())),
        })
    }
}

/// Raw task file contents.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    task: Option<String>,
    /// A path (string) or an inline model table.
    model: Option<toml::Value>,
    #[serde(rename = "N")]
    n: Option<usize>,
    max_support: Option<usize>,
    t0: Option<f64>,
    l: Option<usize>,
    n_blocks: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(rename = "A1")]
    a1: Option<String>,
    #[serde(rename = "A2")]
    a2: Option<String>,
}

/// Values given on the command line; each one supersedes the task file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<PathBuf>,
    pub n: Option<usize>,
    pub max_support: Option<usize>,
    pub t0: Option<f64>,
    pub l: Option<usize>,
    pub n_blocks: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub a1: Option<String>,
    pub a2: Option<String>,
}

/// A validated task with defaults filled in.
#[derive(Clone, Debug, Serialize)]
pub struct TaskSpec {
    pub task: TaskKind,
    /// Path as given, or `"inline"`.
    pub model_source: Option<String>,
    #[serde(skip)]
    pub model: Option<ModelFile>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub max_support: usize,
    pub t0: f64,
    pub l: Option<usize>,
    pub n_blocks: Option<usize>,
    pub seed: u64,
    #[serde(rename = "A1")]
    pub a1: Option<String>,
    #[serde(rename = "A2")]
    pub a2: Option<String>,
    /// Output directory; not part of the serialized spec so that reports
    /// do not depend on where they are written.
    #[serde(skip)]
    pub out: PathBuf,
}

/// Reads a model from a JSON file, or a TOML file when the extension is `.toml`.
pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let source_name = path.display().to_string();
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| CliError::Parse {
            source_name,
            message: e.to_string(),
        })
    } else {
        parse_model_file(&text).map_err(|e| CliError::Parse {
            source_name,
            message: e.to_string(),
        })
    }
}

/// Parses a task file; relative model paths are taken relative to the file.
pub fn parse_task_file(path: &Path, overrides: &Overrides) -> Result<TaskSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_task_str(&text, &path.display().to_string(), base, overrides)
}

pub fn parse_task_str(text: &str, source_name: &str, base: &Path, overrides: &Overrides) -> Result<TaskSpec> {
    let file: TaskFile = toml::from_str(text).map_err(|e| CliError::Parse {
        source_name: source_name.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let task = file.task.as_deref().ok_or_else(|| CliError::MissingKeys {
        task: source_name.to_string(),
        keys: vec!["task".into()],
    })?;
    let kind = TaskKind::from_str(task)?;
    resolve(kind, file, base, overrides)
}

/// Builds a task from command-line flags alone.
pub fn task_from_flags(kind: TaskKind, overrides: &Overrides) -> Result<TaskSpec> {
    resolve(kind, TaskFile::default(), Path::new("."), overrides)
}

fn resolve(kind: TaskKind, file: TaskFile, base: &Path, o: &Overrides) -> Result<TaskSpec> {
    let (model_source, mut model) = match (&o.model, file.model) {
        (Some(p), _) => (Some(p.display().to_string()), Some(load_model(p)?)),
        (None, Some(toml::Value::String(p))) => {
            let path = base.join(&p);
            (Some(p), Some(load_model(&path)?))
        }
        (None, Some(v @ toml::Value::Table(_))) => {
            let m: ModelFile = v.try_into().map_err(|e: toml::de::Error| CliError::InvalidValue {
                key: "model".into(),
                message: e.to_string().trim_end().to_string(),
            })?;
            (Some("inline".to_string()), Some(m))
        }
        (None, Some(_)) => {
            return Err(CliError::InvalidValue {
                key: "model".into(),
                message: "expected a path or a table".into(),
            })
        }
        (None, None) => (None, None),
    };
    let t0 = o
        .t0
        .or(file.t0)
        .or(model.as_ref().map(|m| m.t0))
        .unwrap_or(DEFAULT_T0);
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(CliError::InvalidValue {
            key: "t0".into(),
            message: format!("{t0} is not a positive number"),
        });
    }
    if let Some(m) = model.as_mut() {
        m.t0 = t0;
    }
    let spec = TaskSpec {
        task: kind,
        model_source,
        model,
        n: o.n.or(file.n),
        max_support: o.max_support.or(file.max_support).unwrap_or(DEFAULT_MAX_SUPPORT),
        t0,
        l: o.l.or(file.l),
        n_blocks: o.n_blocks.or(file.n_blocks),
        seed: o.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        a1: o.a1.clone().or(file.a1),
        a2: o.a2.clone().or(file.a2),
        out: o.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    };
    spec.check_complete()?;
    Ok(spec)
}

impl TaskSpec {
    fn has(&self, key: &str) -> bool {
        match key {
            "model" => self.model.is_some(),
            "N" => self.n.is_some(),
            "l" => self.l.is_some(),
            "n_blocks" => self.n_blocks.is_some(),
            "A1" => self.a1.is_some(),
            "A2" => self.a2.is_some(),
            _ => true,
        }
    }

    fn check_complete(&self) -> Result<()> {
        let missing: Vec<String> = self
            .task
            .required_keys()
            .iter()
            .filter(|k| !self.has(k))
            .map(|k| k.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(CliError::MissingKeys {
                task: self.task.name().into(),
                keys: missing,
            });
        }
        for (key, value) in [("N", self.n), ("l", self.l), ("n_blocks", self.n_blocks)] {
            if value == Some(0) {
                return Err(CliError::InvalidValue {
                    key: key.into(),
                    message: "must be positive".into(),
                });
            }
        }
        if self.max_support == 0 {
            return Err(CliError::InvalidValue {
                key: "max_support".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }
}
