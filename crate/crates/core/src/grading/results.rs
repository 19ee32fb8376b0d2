//! Runner result files.
//!
//! `data.res` holds one `<verdict>:<value>` line per test (`timeout` carries
//! no value). `solution.res` holds one rendered answer per test. Either file
//! may instead consist of the single line `load-error:<diagnostic>`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::sandbox::RunStatus;
use crate::value::{parse_value, SemType};

const LOAD_ERROR: &str = "load-error:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Checked,
    Exception,
    Timeout,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Checked => "checked",
            Verdict::Exception => "exception",
            Verdict::Timeout => "timeout",
            Verdict::Error => "error",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestOutcome {
    pub index: usize,
    pub verdict: Verdict,
    pub value: String,
}

impl TestOutcome {
    pub fn new(index: usize, verdict: Verdict, value: impl Into<String>) -> Self {
        TestOutcome {
            index,
            verdict,
            value: value.into(),
        }
    }

    /// The `data.res` line for this outcome.
    pub fn to_line(&self) -> String {
        match self.verdict {
            Verdict::Timeout => "timeout".to_string(),
            v => format!("{v}:{}", self.value),
        }
    }
}

/// Complete lines only: a trailing fragment without `\n` was cut off mid-write.
fn complete_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    lines.pop();
    lines
}

/// Interpret `data.res` for a suite of `total` tests.
///
/// Missing lines (the runner died or was stopped) become `timeout` when the
/// phase hit its wall clock, `error` otherwise. A load failure is expanded
/// to one `error` outcome per test.
pub fn parse_student_results(
    text: &str,
    total: usize,
    return_type: SemType,
    phase: RunStatus,
) -> Vec<TestOutcome> {
    let lines = complete_lines(text);
    if let Some(diag) = lines.first().and_then(|l| l.strip_prefix(LOAD_ERROR)) {
        let value = format!("load-error: {diag}");
        return (0..total)
            .map(|i| TestOutcome::new(i, Verdict::Error, value.clone()))
            .collect();
    }

    (0..total)
        .map(|i| match lines.get(i) {
            Some(line) => parse_line(i, line, return_type),
            None => match phase {
                RunStatus::Timeout => TestOutcome::new(i, Verdict::Timeout, ""),
                RunStatus::Overflow => TestOutcome::new(i, Verdict::Error, "output limit exceeded"),
                RunStatus::Completed => TestOutcome::new(i, Verdict::Error, "runner stopped before this test"),
            },
        })
        .collect()
}

fn parse_line(index: usize, line: &str, return_type: SemType) -> TestOutcome {
    if line == "timeout" {
        return TestOutcome::new(index, Verdict::Timeout, "");
    }
    let Some((verdict, value)) = line.split_once(':') else {
        return TestOutcome::new(index, Verdict::Error, "malformed result line");
    };
    match verdict {
        "checked" if parse_value(value, return_type).is_ok() => {
            TestOutcome::new(index, Verdict::Checked, value)
        }
        "checked" => TestOutcome::new(index, Verdict::Error, "malformed answer"),
        "exception" => TestOutcome::new(index, Verdict::Exception, value),
        "timeout" => TestOutcome::new(index, Verdict::Timeout, value),
        "error" => TestOutcome::new(index, Verdict::Error, value),
        _ => TestOutcome::new(index, Verdict::Error, "malformed result line"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResultFormatError {
    #[error("reference solution does not load: {0}")]
    LoadError(String),
    #[error("reference solution produced {found} answer(s) for {expected} test(s)")]
    Count { expected: usize, found: usize },
    #[error("reference answer for test {index} is not a valid {ty}: {line}")]
    Unparsable { index: usize, ty: SemType, line: String },
}

/// Split `solution.res` into per-test answers (validated later, in comparison).
pub fn parse_teacher_results(text: &str, total: usize) -> Result<Vec<String>, ResultFormatError> {
    let lines = complete_lines(text);
    if let Some(diag) = lines.first().and_then(|l| l.strip_prefix(LOAD_ERROR)) {
        return Err(ResultFormatError::LoadError(diag.to_string()));
    }
    if lines.len() != total {
        return Err(ResultFormatError::Count {
            expected: total,
            found: lines.len(),
        });
    }
    Ok(lines.into_iter().map(str::to_string).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_verdict() {
        let text = "checked:10\nexception:ZeroDivisionError: division by zero\ntimeout\nerror:type-mismatch: expected int, got str\n";
        let out = parse_student_results(text, 4, SemType::Int, RunStatus::Completed);
        assert_eq!(out[0], TestOutcome::new(0, Verdict::Checked, "10"));
        assert_eq!(
            out[1],
            TestOutcome::new(1, Verdict::Exception, "ZeroDivisionError: division by zero")
        );
        assert_eq!(out[2], TestOutcome::new(2, Verdict::Timeout, ""));
        assert_eq!(out[3].verdict, Verdict::Error);
        for o in &out {
            assert_eq!(parse_line(o.index, &o.to_line(), SemType::Int), *o);
        }
    }

    #[test]
    fn value_is_the_rest_of_the_line() {
        let out = parse_student_results("checked:\"a:b\"\n", 1, SemType::Str, RunStatus::Completed);
        assert_eq!(out[0].value, "\"a:b\"");
    }

    #[test]
    fn load_error_expands_to_every_test() {
        let out = parse_student_results(
            "load-error:SyntaxError: invalid syntax (line 2)\n",
            3,
            SemType::Int,
            RunStatus::Completed,
        );
        assert_eq!(out.len(), 3);
        assert!(out
            .iter()
            .all(|o| o.verdict == Verdict::Error && o.value == "load-error: SyntaxError: invalid syntax (line 2)"));
    }

    #[test]
    fn missing_lines_follow_phase_status() {
        let out = parse_student_results("checked:1\nchecked:2", 3, SemType::Int, RunStatus::Timeout);
        assert_eq!(out[0].verdict, Verdict::Checked);
        assert_eq!(out[1].verdict, Verdict::Timeout, "cut-off line is not trusted");
        assert_eq!(out[2].verdict, Verdict::Timeout);
        let out = parse_student_results("", 2, SemType::Int, RunStatus::Completed);
        assert!(out.iter().all(|o| o.verdict == Verdict::Error));
    }

    #[test]
    fn malformed_lines_are_errors() {
        let out = parse_student_results("checked:ten\nbogus\nweird:1\n", 3, SemType::Int, RunStatus::Completed);
        assert!(out.iter().all(|o| o.verdict == Verdict::Error));
    }

    #[test]
    fn teacher_results() {
        assert_eq!(
            parse_teacher_results("5\n-8\n-3\n12\n", 4).unwrap(),
            ["5", "-8", "-3", "12"]
        );
        assert_eq!(
            parse_teacher_results("5\n", 2),
            Err(ResultFormatError::Count { expected: 2, found: 1 })
        );
        assert!(matches!(
            parse_teacher_results("load-error:NameError: x\n", 2),
            Err(ResultFormatError::LoadError(_))
        ));
    }
}
