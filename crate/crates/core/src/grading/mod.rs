//! The grading engine: task creation with a reference smoke check, and the
//! four-phase pipeline that turns a submission into a feedback document.

pub mod document;
pub mod feedback;
pub mod results;

use std::fmt;

use log::{debug, warn};

use crate::codegen::fill_template;
use crate::config::TaskConfig;
use crate::runner::{self, RunnerSettings};
use crate::sandbox::{Limits, Phase, RunStatus, Sandbox, SandboxOutcome, ScratchFile};
use crate::taskstore::{Manifest, StoreError, TaskPackage, TaskStore};
use crate::testgen::{csv::write_suite_csv, derive_seed, generate_suite, TestSuite};

pub use document::{GradeOutput, GradeStatus, Submission, SubmissionError};
pub use feedback::{compare_results, compute_score, select_feedback, Example, Feedback, Stats};
pub use results::{parse_student_results, parse_teacher_results, ResultFormatError, TestOutcome, Verdict};

/// Scratch file through which the submission id reaches the feedback phase.
pub const SUBMISSION_ID_FILE: &str = "submission.id";

/// Random tests run by the smoke check at task creation.
const SMOKE_RANDOM_TESTS: usize = 5;

/// How the backend run itself went, independent of test results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendStatus {
    Success,
    Timeout,
    Overflow,
    Error,
}

impl BackendStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendStatus::Success => "success",
            BackendStatus::Timeout => "timeout",
            BackendStatus::Overflow => "overflow",
            BackendStatus::Error => "error",
        }
    }
}

impl fmt::Display for BackendStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Intermediate files of one run, kept for inspection and fixtures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Artifacts {
    pub seed: u64,
    pub student_source: String,
    pub data_csv: String,
    pub data_res: String,
    pub solution_res: String,
    pub outcomes: Vec<TestOutcome>,
    pub passes: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct GradeReport {
    pub output: GradeOutput,
    pub backend: BackendStatus,
    pub artifacts: Artifacts,
}

impl GradeReport {
    fn error(submission_id: &str, backend: BackendStatus, detail: impl Into<String>, artifacts: Artifacts) -> Self {
        GradeReport {
            output: GradeOutput::error(submission_id, detail),
            backend,
            artifacts,
        }
    }
}

#[derive(Debug)]
pub struct Engine {
    pub store: TaskStore,
    pub sandbox: Sandbox,
    pub runner: RunnerSettings,
    pub limits: Limits,
}

impl Engine {
    pub fn new(store: TaskStore, sandbox: Sandbox) -> Self {
        Engine {
            store,
            sandbox,
            runner: RunnerSettings::default(),
            limits: Limits::default(),
        }
    }

    /// Store, sandbox and runner configured from the environment.
    pub fn from_env() -> Self {
        Engine {
            store: TaskStore::from_env(),
            sandbox: Sandbox::from_env(),
            runner: RunnerSettings::from_env(),
            limits: Limits::default(),
        }
    }

    /// Compile and store a task after checking that its reference solution
    /// loads and answers the predefined tests plus a few random ones.
    pub fn create_task(
        &self,
        task_type: &str,
        language: &str,
        config: &TaskConfig,
        requested_id: Option<&str>,
    ) -> Result<Manifest, StoreError> {
        self.store
            .create_task(task_type, language, config, requested_id, |pkg| self.smoke_check(pkg))
    }

    fn smoke_check(&self, task: &TaskPackage) -> Result<(), String> {
        let mut plan = task.plan().clone();
        if let Some(r) = plan.random.as_mut() {
            r.n = r.n.min(SMOKE_RANDOM_TESTS);
        }
        let seed = derive_seed(task.task_id(), "", plan.random.as_ref().and_then(|r| r.seed));
        let suite = generate_suite(&plan, task.spec(), seed);
        let csv = write_suite_csv(&suite);
        let (answers, _, _) = self.run_teacher(task, &csv, suite.len(), "")?;
        let placeholder = vec![TestOutcome::new(0, Verdict::Error, ""); answers.len()];
        compare_results(&placeholder, &answers, task.spec().return_type, plan.strict_float)
            .map(|_| ())
            .map_err(|e| e.to_string())
    }

    /// Load `task_id` and grade the raw inner submission document.
    ///
    /// Only a missing or unreadable task is an `Err`; everything else,
    /// including a malformed submission, is reported in the document.
    pub fn grade(&self, task_id: &str, input: &str, seed: Option<u64>) -> Result<GradeReport, StoreError> {
        let task = self.store.load_task(task_id)?;
        Ok(match Submission::parse(input) {
            Ok(sub) => self.run_pipeline(&task, &sub, seed),
            Err(e) => GradeReport::error("", BackendStatus::Success, e.to_string(), Artifacts::default()),
        })
    }

    /// Pre-process, generate, execute, compare.
    pub fn run_pipeline(&self, task: &TaskPackage, submission: &Submission, seed: Option<u64>) -> GradeReport {
        let sub_id = submission.submission_id.as_str();
        let mut art = Artifacts::default();

        // 1. pre-process
        if let Some(k) = submission
            .fields
            .keys()
            .find(|k| !task.template.placeholders.iter().any(|p| &p.name == *k))
        {
            return GradeReport::error(sub_id, BackendStatus::Success, format!("unknown field `{k}`"), art);
        }
        art.student_source = match fill_template(&task.template, &submission.fields) {
            Ok(s) => s,
            Err(e) => return GradeReport::error(sub_id, BackendStatus::Success, e.to_string(), art),
        };

        // 2. generate
        let plan = task.plan();
        art.seed = derive_seed(
            task.task_id(),
            sub_id,
            seed.or(plan.random.as_ref().and_then(|r| r.seed)),
        );
        let suite = generate_suite(plan, task.spec(), art.seed);
        art.data_csv = write_suite_csv(&suite);

        // 3. execute
        let student = match self.run_student(task, &art.student_source, &art.data_csv) {
            Ok(x) => x,
            Err(e) => return GradeReport::error(sub_id, BackendStatus::Error, e, art),
        };
        art.data_res = student.1;
        let return_type = task.spec().return_type;
        art.outcomes = parse_student_results(&art.data_res, suite.len(), return_type, student.0.status);
        let backend = match student.0.status {
            RunStatus::Completed => BackendStatus::Success,
            RunStatus::Timeout => BackendStatus::Timeout,
            RunStatus::Overflow => BackendStatus::Overflow,
        };

        // 4. solution and feedback
        let (answers, solution_res, recorded_id) = match self.run_teacher(task, &art.data_csv, suite.len(), sub_id) {
            Ok(x) => x,
            Err(e) => return GradeReport::error(sub_id, BackendStatus::Error, e, art),
        };
        art.solution_res = solution_res;
        let passes = match compare_results(&art.outcomes, &answers, return_type, plan.strict_float) {
            Ok(p) => p,
            Err(e) => return GradeReport::error(sub_id, BackendStatus::Error, format!("task misconfigured: {e}"), art),
        };
        let feedback = build_feedback(&suite, &passes, &art.outcomes, &answers, task);
        art.passes = passes;
        GradeReport {
            output: GradeOutput::graded(recorded_id, feedback),
            backend,
            artifacts: art,
        }
    }

    fn run_student(&self, task: &TaskPackage, source: &str, csv: &str) -> Result<(SandboxOutcome, String), String> {
        let lang = task.manifest.language;
        let src = lang.source_file(false);
        let scratch = self
            .sandbox
            .make_scratch(
                task,
                Phase::Student,
                &[ScratchFile::new(src, source), ScratchFile::new(runner::CSV_FILE, csv)],
            )
            .map_err(|e| e.to_string())?;
        let cmd = self.runner.command(lang, Phase::Student);
        let visible = [runner::HARNESS_FILE, runner::SPEC_FILE, src, runner::CSV_FILE];
        let outcome = self
            .sandbox
            .execute(&cmd, &scratch, &self.limits, &visible)
            .map_err(|e| e.to_string())?;
        debug!(
            "student phase: {:?} exit={:?} signal={:?} in {:?}",
            outcome.status, outcome.exit_code, outcome.signal, outcome.duration
        );
        let results = scratch
            .read(runner::STUDENT_RESULTS)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
            .unwrap_or_default();
        Ok((outcome, results))
    }

    /// Run the reference solution; returns its answers, the raw
    /// `solution.res` and the submission id read back from the scratch.
    fn run_teacher(
        &self,
        task: &TaskPackage,
        csv: &str,
        total: usize,
        submission_id: &str,
    ) -> Result<(Vec<String>, String, String), String> {
        let lang = task.manifest.language;
        let scratch = self
            .sandbox
            .make_scratch(
                task,
                Phase::Teacher,
                &[
                    ScratchFile::new(runner::CSV_FILE, csv),
                    ScratchFile::new(SUBMISSION_ID_FILE, submission_id),
                ],
            )
            .map_err(|e| e.to_string())?;
        let cmd = self.runner.command(lang, Phase::Teacher);
        let visible = [
            runner::HARNESS_FILE,
            runner::SPEC_FILE,
            lang.source_file(true),
            runner::CSV_FILE,
            SUBMISSION_ID_FILE,
        ];
        let outcome = self
            .sandbox
            .execute(&cmd, &scratch, &self.limits, &visible)
            .map_err(|e| e.to_string())?;
        if outcome.status != RunStatus::Completed || outcome.exit_code != Some(0) {
            let stderr = String::from_utf8_lossy(&outcome.stderr);
            warn!("reference run failed: {:?} {:?}: {}", outcome.status, outcome.exit_code, stderr.trim());
            return Err(format!(
                "reference solution run failed ({})",
                match outcome.status {
                    RunStatus::Timeout => "timeout".to_string(),
                    RunStatus::Overflow => "output overflow".to_string(),
                    RunStatus::Completed => match outcome.exit_code {
                        Some(c) => format!("exit code {c}"),
                        None => format!("signal {}", outcome.signal.unwrap_or(0)),
                    },
                }
            ));
        }
        let raw = scratch
            .read(runner::TEACHER_RESULTS)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
            .unwrap_or_default();
        let recorded = scratch
            .read(SUBMISSION_ID_FILE)
            .map(|b| String::from_utf8_lossy(&b).into_owned())
            .map_err(|e| format!("submission id record lost: {e}"))?;
        let answers = parse_teacher_results(&raw, total).map_err(|e| e.to_string())?;
        Ok((answers, raw, recorded))
    }
}

fn build_feedback(
    suite: &TestSuite,
    passes: &[bool],
    outcomes: &[TestOutcome],
    answers: &[String],
    task: &TaskPackage,
) -> Feedback {
    let (example, message) = select_feedback(suite, passes, outcomes, answers, task.plan(), task.spec().return_type);
    Feedback {
        example,
        message,
        stats: Stats {
            succeeded: passes.iter().filter(|p| **p).count(),
            total: passes.len(),
        },
        score: compute_score(passes),
    }
}
