//! Language runners: the in-sandbox harness each language ships with, and
//! the command line used to start it.

use std::time::Duration;

use crate::codegen::Language;
use crate::sandbox::Phase;

pub const HARNESS_FILE: &str = "harness.py";
pub const SPEC_FILE: &str = "spec.json";
pub const CSV_FILE: &str = "data.csv";
pub const STUDENT_RESULTS: &str = "data.res";
pub const TEACHER_RESULTS: &str = "solution.res";

pub const ENV_PYTHON: &str = "GRADER_PYTHON";

const PYTHON_HARNESS: &str = include_str!("../runner/harness.py");

pub fn harness_source(language: Language) -> &'static str {
    match language {
        Language::Python => PYTHON_HARNESS,
    }
}

pub fn results_file(phase: Phase) -> &'static str {
    match phase {
        Phase::Student => STUDENT_RESULTS,
        Phase::Teacher => TEACHER_RESULTS,
    }
}

/// How runner processes are started.
#[derive(Debug, Clone)]
pub struct RunnerSettings {
    pub python: String,
    pub per_test_time: Duration,
}

impl Default for RunnerSettings {
    fn default() -> Self {
        RunnerSettings {
            python: "python3".to_string(),
            per_test_time: Duration::from_secs(1),
        }
    }
}

impl RunnerSettings {
    pub fn from_env() -> Self {
        let mut s = RunnerSettings::default();
        if let Ok(p) = std::env::var(ENV_PYTHON) {
            if !p.is_empty() {
                s.python = p;
            }
        }
        s
    }

    pub fn command(&self, language: Language, phase: Phase) -> Vec<String> {
        match language {
            Language::Python => {
                let mode = match phase {
                    Phase::Student => "student",
                    Phase::Teacher => "teacher",
                };
                [
                    self.python.as_str(),
                    "-I",
                    "-B",
                    HARNESS_FILE,
                    "--source",
                    language.source_file(phase == Phase::Teacher),
                    "--spec",
                    SPEC_FILE,
                    "--csv",
                    CSV_FILE,
                    "--out",
                    results_file(phase),
                    "--mode",
                    mode,
                    "--per-test-time",
                    &format!("{}", self.per_test_time.as_secs_f64()),
                ]
                .iter()
                .map(|s| s.to_string())
                .collect()
            }
        }
    }
}
