//! Command-line driver: create tasks, grade submission files, run the server.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::api::{self, AppState};
use crate::config::parse_task_config;
use crate::grading::{Engine, GradeStatus};
use crate::taskstore::ENV_TASK_DIR;

#[derive(Debug, Parser)]
#[command(name = "taskgrader", version, about = "Create and grade unit-testing programming exercises")]
pub struct Cli {
    /// Directory holding compiled tasks.
    #[arg(long, global = true, env = ENV_TASK_DIR, default_value = "tasks")]
    pub task_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a task configuration into the task store.
    Create {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        language: String,
        #[arg(long)]
        id: Option<String>,
        #[arg(long = "type", default_value = "unit-testing")]
        task_type: String,
    },
    /// Grade a submission document against a stored task.
    Grade {
        #[arg(long)]
        task: String,
        #[arg(long)]
        submission: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

/// Run one command; returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut engine = Engine::from_env();
    engine.store = crate::taskstore::TaskStore::new(&cli.task_dir);
    run_with(engine, cli.command, out, err)
}

pub fn run_with(engine: Engine, command: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match command {
        Command::Create {
            config,
            language,
            id,
            task_type,
        } => {
            let raw = match fs::read_to_string(&config) {
                Ok(s) => s,
                Err(e) => return fail(err, format!("cannot read {}: {e}", config.display())),
            };
            let cfg = match parse_task_config(&raw) {
                Ok(c) => c,
                Err(e) => return fail(err, format!("invalid configuration at {e}")),
            };
            match engine.create_task(&task_type, &language, &cfg, id.as_deref()) {
                Ok(m) => {
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&m).expect("manifest serializes"));
                    0
                }
                Err(e) => fail(err, e.to_string()),
            }
        }
        Command::Grade { task, submission, seed } => {
            let input = match fs::read_to_string(&submission) {
                Ok(s) => s,
                Err(e) => return fail(err, format!("cannot read {}: {e}", submission.display())),
            };
            match engine.grade(&task, &input, seed) {
                Ok(report) => {
                    let _ = writeln!(out, "{}", report.output.to_json_string());
                    if report.output.status == GradeStatus::Error {
                        1
                    } else {
                        0
                    }
                }
                Err(e) => fail(err, e.to_string()),
            }
        }
        Command::Serve { addr } => {
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => return fail(err, format!("cannot start runtime: {e}")),
            };
            match rt.block_on(api::serve(AppState::new(engine), &addr)) {
                Ok(()) => 0,
                Err(e) => fail(err, format!("server error: {e}")),
            }
        }
    }
}

fn fail(err: &mut dyn Write, msg: String) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from([
            "taskgrader", "--task-dir", "/tmp/t", "grade", "--task", "sub", "--submission", "s.json", "--seed", "7",
        ])
        .unwrap();
        assert_eq!(cli.task_dir, PathBuf::from("/tmp/t"));
        assert!(matches!(cli.command, Command::Grade { seed: Some(7), .. }));

        let cli = Cli::try_parse_from(["taskgrader", "create", "--config", "c.json", "--language", "python"]).unwrap();
        assert!(matches!(cli.command, Command::Create { ref task_type, id: None, .. } if task_type == "unit-testing"));
        assert!(Cli::try_parse_from(["taskgrader", "grade", "--task", "sub"]).is_err());
    }

    #[test]
    fn unsupported_language_exits_1() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        fs::write(&cfg, crate::config::tests::SUB_CONFIG).unwrap();
        let engine = Engine::new(
            crate::taskstore::TaskStore::new(dir.path().join("tasks")),
            crate::sandbox::Sandbox::new(dir.path().join("scratch")),
        );
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let cmd = Command::Create {
            config: cfg,
            language: "cobol".into(),
            id: None,
            task_type: "unit-testing".into(),
        };
        assert_eq!(run_with(engine, cmd, &mut out, &mut err), 1);
        assert!(String::from_utf8(err).unwrap().contains("unsupported language"));
    }
}
