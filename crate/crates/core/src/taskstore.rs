//! Directory-per-task store of compiled, immutable task packages.
//!
//! ```text
//! <root>/<task_id>/
//!     manifest.json   task_id, task_type, language, created_at, config_digest
//!     spec.json       function signature
//!     test.json       test plan (predefined tests, generators, hint messages)
//!     solution.json   reference solution fragments
//!     template.txt    code skeleton with placeholders
//!     teacher.py      template filled with the solution
//! ```
//!
//! Packages are staged in a hidden directory and renamed into place, so a
//! half-written package is never visible.

use std::fmt;
use std::fs;
use std::io;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, SubsecRound, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codegen::{fill_template, make_template, CodeTemplate, Language};
use crate::config::{FunctionSpec, Solution, TaskConfig, TestPlan};

pub const ENV_TASK_DIR: &str = "GRADER_TASK_DIR";

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SPEC_FILE: &str = "spec.json";
pub const TEST_FILE: &str = "test.json";
pub const SOLUTION_FILE: &str = "solution.json";
pub const TEMPLATE_FILE: &str = "template.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskType {
    #[serde(rename = "unit-testing")]
    UnitTesting,
}

impl TaskType {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::UnitTesting => "unit-testing",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskType {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit-testing" => Ok(TaskType::UnitTesting),
            other => Err(StoreError::UnsupportedType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub task_id: String,
    pub task_type: TaskType,
    pub language: Language,
    #[serde(with = "rfc3339_micros")]
    pub created_at: DateTime<Utc>,
    pub config_digest: String,
}

mod rfc3339_micros {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(SecondsFormat::Micros, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("task `{0}` already exists")]
    DuplicateId(String),
    #[error("unsupported task type `{0}`")]
    UnsupportedType(String),
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),
    #[error("invalid task id `{0}` (use 1-64 letters, digits, `-` or `_`)")]
    InvalidId(String),
    #[error("the reference solution does not load: {0}")]
    SolutionLoad(String),
    #[error("task `{0}` not found")]
    NotFound(String),
    #[error("task `{id}` is corrupt: {reason}")]
    Corrupt { id: String, reason: String },
    #[error("task store I/O error: {0}")]
    Io(#[from] io::Error),
}

/// A compiled task as loaded from disk.
#[derive(Debug, Clone)]
pub struct TaskPackage {
    pub manifest: Manifest,
    pub config: TaskConfig,
    pub template: CodeTemplate,
    pub teacher_source: String,
    pub dir: PathBuf,
}

impl TaskPackage {
    pub fn task_id(&self) -> &str {
        &self.manifest.task_id
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.config.spec
    }

    pub fn plan(&self) -> &TestPlan {
        &self.config.test
    }

    /// `spec.json` contents; the signature is public.
    pub fn public_spec_json(&self) -> String {
        pretty(&self.config.spec.to_json())
    }

    /// What a learner may see before submitting: the signature and the
    /// predefined inputs. Solutions and hint messages stay private.
    pub fn public_view(&self) -> Json {
        let inputs: Vec<&str> = self
            .config
            .test
            .predefined
            .iter()
            .map(|p| p.data.as_str())
            .collect();
        json!({
            "task_id": self.manifest.task_id,
            "language": self.manifest.language,
            "spec": self.config.spec.to_json(),
            "inputs": inputs,
        })
    }
}

/// Keys sorted at every level, no insignificant whitespace.
pub fn canonical_json(v: &Json) -> String {
    match v {
        Json::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let items: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}:{}", Json::String(k.clone()), canonical_json(&map[k])))
                .collect();
            format!("{{{}}}", items.join(","))
        }
        Json::Array(items) => {
            let items: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", items.join(","))
        }
        other => other.to_string(),
    }
}

/// SHA-256 (lowercase hex) of the canonical configuration document.
pub fn config_digest(config: &TaskConfig) -> String {
    hex::encode(Sha256::digest(canonical_json(&config.to_json()).as_bytes()))
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn valid_task_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && !id.starts_with(['-', '_'])
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

#[derive(Debug, Clone)]
pub struct TaskStore {
    root: PathBuf,
}

impl TaskStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        TaskStore { root: root.into() }
    }

    /// Root from `GRADER_TASK_DIR`, default `./tasks`.
    pub fn from_env() -> Self {
        TaskStore::new(std::env::var_os(ENV_TASK_DIR).map_or_else(|| PathBuf::from("tasks"), PathBuf::from))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn ensure_root(&self) -> Result<(), StoreError> {
        if !self.root.exists() {
            fs::create_dir_all(&self.root)?;
            fs::set_permissions(&self.root, fs::Permissions::from_mode(0o700))?;
        }
        Ok(())
    }

    /// Compile `config` into a new package.
    ///
    /// `check` runs against the fully staged package before it becomes
    /// visible; an `Err` from it aborts creation with
    /// [`StoreError::SolutionLoad`].
    pub fn create_task<F>(
        &self,
        task_type: &str,
        language: &str,
        config: &TaskConfig,
        requested_id: Option<&str>,
        check: F,
    ) -> Result<Manifest, StoreError>
    where
        F: FnOnce(&TaskPackage) -> Result<(), String>,
    {
        let task_type: TaskType = task_type.parse()?;
        let language: Language = language
            .parse()
            .map_err(|_| StoreError::UnsupportedLanguage(language.to_string()))?;
        let task_id = match requested_id {
            Some(id) if !valid_task_id(id) => return Err(StoreError::InvalidId(id.to_string())),
            Some(id) => id.to_string(),
            None => {
                let mut bytes = [0u8; 16];
                rand::thread_rng().fill_bytes(&mut bytes);
                hex::encode(bytes)
            }
        };

        self.ensure_root()?;
        let target = self.root.join(&task_id);
        if target.exists() {
            return Err(StoreError::DuplicateId(task_id));
        }

        let template = make_template(&config.spec, language);
        let teacher_source = fill_template(&template, &config.solution.fields)
            .map_err(|e| StoreError::SolutionLoad(e.to_string()))?;
        let manifest = Manifest {
            task_id: task_id.clone(),
            task_type,
            language,
            created_at: Utc::now().trunc_subsecs(6),
            config_digest: config_digest(config),
        };

        let staging = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(&self.root)?;
        let files: [(&str, String); 6] = [
            (MANIFEST_FILE, pretty(&serde_json::to_value(&manifest).expect("manifest serializes"))),
            (SPEC_FILE, pretty(&config.spec.to_json())),
            (TEST_FILE, pretty(&config.test.to_json())),
            (SOLUTION_FILE, pretty(&config.solution.to_json())),
            (TEMPLATE_FILE, template.skeleton.clone()),
            (language.source_file(true), teacher_source.clone()),
        ];
        for (name, contents) in &files {
            let p = staging.path().join(name);
            fs::write(&p, contents)?;
            fs::set_permissions(&p, fs::Permissions::from_mode(0o400))?;
        }

        let package = TaskPackage {
            manifest: manifest.clone(),
            config: config.clone(),
            template,
            teacher_source,
            dir: staging.path().to_path_buf(),
        };
        check(&package).map_err(StoreError::SolutionLoad)?;

        match fs::rename(staging.path(), &target) {
            Ok(()) => {
                let _ = staging.keep();
                Ok(manifest)
            }
            Err(e) if target.exists() => {
                log::debug!("lost creation race for {task_id}: {e}");
                Err(StoreError::DuplicateId(task_id))
            }
            Err(e) => Err(e.into()),
        }
    }

    pub fn load_task(&self, task_id: &str) -> Result<TaskPackage, StoreError> {
        if !valid_task_id(task_id) {
            return Err(StoreError::NotFound(task_id.to_string()));
        }
        let dir = self.root.join(task_id);
        if !dir.is_dir() {
            return Err(StoreError::NotFound(task_id.to_string()));
        }
        let corrupt = |reason: String| StoreError::Corrupt {
            id: task_id.to_string(),
            reason,
        };
        let read = |name: &str| -> Result<String, StoreError> {
            fs::read_to_string(dir.join(name)).map_err(|e| corrupt(format!("{name}: {e}")))
        };
        let read_json = |name: &str| -> Result<Json, StoreError> {
            serde_json::from_str(&read(name)?).map_err(|e| corrupt(format!("{name}: {e}")))
        };

        let manifest: Manifest = serde_json::from_value(read_json(MANIFEST_FILE)?)
            .map_err(|e| corrupt(format!("{MANIFEST_FILE}: {e}")))?;
        if manifest.task_id != task_id {
            return Err(corrupt(format!(
                "manifest names task `{}`",
                manifest.task_id
            )));
        }
        let spec = FunctionSpec::from_json(&read_json(SPEC_FILE)?, "spec").map_err(|e| corrupt(e.to_string()))?;
        let test = TestPlan::from_json(&read_json(TEST_FILE)?, &spec, "test").map_err(|e| corrupt(e.to_string()))?;
        let solution =
            Solution::from_json(&read_json(SOLUTION_FILE)?, "solution").map_err(|e| corrupt(e.to_string()))?;
        let config = TaskConfig { spec, test, solution };
        if config_digest(&config) != manifest.config_digest {
            return Err(corrupt("configuration digest mismatch".into()));
        }

        let template = CodeTemplate::from_skeleton(manifest.language, &read(TEMPLATE_FILE)?)
            .map_err(|e| corrupt(e.to_string()))?;
        let teacher_source = read(manifest.language.source_file(true))?;
        let expected = fill_template(&template, &config.solution.fields).map_err(|e| corrupt(e.to_string()))?;
        if expected != teacher_source {
            return Err(corrupt("teacher source does not match template and solution".into()));
        }

        Ok(TaskPackage {
            manifest,
            config,
            template,
            teacher_source,
            dir,
        })
    }

    /// Manifests of all tasks, oldest first, ties broken by id.
    pub fn list_tasks(&self) -> Vec<Manifest> {
        let Ok(entries) = fs::read_dir(&self.root) else {
            return Vec::new();
        };
        let mut manifests: Vec<Manifest> = entries
            .filter_map(Result::ok)
            .filter(|e| !e.file_name().to_string_lossy().starts_with('.'))
            .filter_map(|e| fs::read_to_string(e.path().join(MANIFEST_FILE)).ok())
            .filter_map(|s| serde_json::from_str::<Manifest>(&s).ok())
            .collect();
        manifests.sort_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then_with(|| a.task_id.cmp(&b.task_id))
        });
        manifests
    }
}

impl Manifest {
    pub fn created_at_text(&self) -> String {
        self.created_at.to_rfc3339_opts(SecondsFormat::Micros, true)
    }
}
