//! Comparison against the reference answers and feedback synthesis.

use serde::{Deserialize, Serialize};

use super::results::{ResultFormatError, TestOutcome, Verdict};
use crate::config::{render_args_tuple, TestPlan, WILDCARD_KEY};
use crate::testgen::{Origin, TestSuite};
use crate::value::{canonicalize, parse_value, SemType, Value};

/// Relative tolerance for float answers.
pub const FLOAT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub input: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub succeeded: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub example: Option<Example>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    pub stats: Stats,
    pub score: f64,
}

fn answers_equal(a: &Value, b: &Value, strict_float: bool) -> bool {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) if !strict_float => {
            if x == y || (x.is_nan() && y.is_nan()) {
                return true;
            }
            let scale = 1f64.max(x.abs()).max(y.abs());
            (x - y).abs() <= FLOAT_TOLERANCE * scale
        }
        (Value::Float(x), Value::Float(y)) => x == y || (x.is_nan() && y.is_nan()),
        _ => a == b,
    }
}

/// Per-test pass flags: a test passes when the learner's code produced a
/// value (`checked`) equal to the reference answer.
pub fn compare_results(
    student: &[TestOutcome],
    solution: &[String],
    return_type: SemType,
    strict_float: bool,
) -> Result<Vec<bool>, ResultFormatError> {
    debug_assert_eq!(student.len(), solution.len());
    student
        .iter()
        .zip(solution)
        .enumerate()
        .map(|(index, (outcome, expected))| {
            let expected = parse_value(expected, return_type).map_err(|_| ResultFormatError::Unparsable {
                index,
                ty: return_type,
                line: expected.clone(),
            })?;
            if outcome.verdict != Verdict::Checked {
                return Ok(false);
            }
            Ok(parse_value(&outcome.value, return_type)
                .map(|actual| answers_equal(&actual, &expected, strict_float))
                .unwrap_or(false))
        })
        .collect()
}

pub fn compute_score(passes: &[bool]) -> f64 {
    if passes.is_empty() {
        return 0.0;
    }
    passes.iter().filter(|p| **p).count() as f64 / passes.len() as f64
}

/// Text shown as the learner's answer for a failed test.
pub fn actual_text(outcome: &TestOutcome) -> String {
    match outcome.verdict {
        Verdict::Checked => outcome.value.clone(),
        Verdict::Exception => format!("exception: {}", outcome.value),
        Verdict::Timeout => "timeout".to_string(),
        Verdict::Error if outcome.value.starts_with("load-error") => outcome.value.clone(),
        Verdict::Error => format!("error: {}", outcome.value),
    }
}

/// The first failing test in suite order, as an example, plus the matching
/// hint message when that test is a predefined one.
pub fn select_feedback(
    suite: &TestSuite,
    passes: &[bool],
    outcomes: &[TestOutcome],
    solution: &[String],
    plan: &TestPlan,
    return_type: SemType,
) -> (Option<Example>, Option<String>) {
    let Some(i) = passes.iter().position(|p| !p) else {
        return (None, None);
    };
    let case = &suite.cases[i];
    let outcome = &outcomes[i];
    let example = Example {
        input: render_args_tuple(&case.args),
        expected: canonicalize(&solution[i], return_type).unwrap_or_else(|_| solution[i].clone()),
        actual: actual_text(outcome),
    };

    let message = match case.origin {
        Origin::Predefined(p) => {
            let feedback = &plan.predefined[p].feedback;
            let actual = (outcome.verdict == Verdict::Checked)
                .then(|| canonicalize(&outcome.value, return_type).ok())
                .flatten();
            actual
                .and_then(|actual| {
                    feedback
                        .iter()
                        .filter(|(k, _)| k.as_str() != WILDCARD_KEY)
                        .find(|(k, _)| canonicalize(k, return_type).is_ok_and(|k| k == actual))
                        .map(|(_, msg)| msg.clone())
                })
                .or_else(|| feedback.get(WILDCARD_KEY).cloned())
        }
        Origin::Random => None,
    };
    (Some(example), message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_task_config;
    use crate::testgen::generate_suite;
    use proptest::prelude::*;

    fn checked(i: usize, v: &str) -> TestOutcome {
        TestOutcome::new(i, Verdict::Checked, v)
    }

    #[test]
    fn compares_int_answers() {
        let sol = vec!["5".to_string()];
        assert_eq!(compare_results(&[checked(0, "5")], &sol, SemType::Int, false).unwrap(), [true]);
        assert_eq!(compare_results(&[checked(0, "10")], &sol, SemType::Int, false).unwrap(), [false]);
        let exc = TestOutcome::new(0, Verdict::Exception, "ZeroDivisionError: division by zero");
        assert_eq!(compare_results(&[exc], &sol, SemType::Int, false).unwrap(), [false]);
    }

    #[test]
    fn float_tolerance_is_relative() {
        let sol = vec!["1000000.0".to_string()];
        assert_eq!(compare_results(&[checked(0, "1000000.5")], &sol, SemType::Float, false).unwrap(), [true]);
        assert_eq!(compare_results(&[checked(0, "1000002.0")], &sol, SemType::Float, false).unwrap(), [false]);
        assert_eq!(compare_results(&[checked(0, "1000000.5")], &sol, SemType::Float, true).unwrap(), [false]);
        let small = vec!["0.0".to_string()];
        assert_eq!(compare_results(&[checked(0, "0.0000009")], &small, SemType::Float, false).unwrap(), [true]);
        assert_eq!(compare_results(&[checked(0, "0.000002")], &small, SemType::Float, false).unwrap(), [false]);
    }

    #[test]
    fn unparsable_reference_is_a_format_error() {
        let err = compare_results(&[checked(0, "1")], &["exception:ValueError".to_string()], SemType::Int, false)
            .unwrap_err();
        assert!(matches!(err, ResultFormatError::Unparsable { index: 0, .. }));
    }

    #[test]
    fn scores() {
        let mut v = vec![false; 14];
        v[3] = true;
        v[9] = true;
        assert!((compute_score(&v) - 0.14285715).abs() < 1e-6);
        assert_eq!(compute_score(&[true; 14]), 1.0);
        assert_eq!(compute_score(&[false; 10]), 0.0);
    }

    fn sub_suite() -> (crate::config::TaskConfig, TestSuite) {
        let cfg = parse_task_config(crate::config::tests::SUB_CONFIG).unwrap();
        let suite = generate_suite(&cfg.test, &cfg.spec, 1);
        (cfg, suite)
    }

    fn answers(suite: &TestSuite, f: impl Fn(i64, i64) -> i64) -> Vec<String> {
        suite
            .cases
            .iter()
            .map(|c| match (&c.args[0], &c.args[1]) {
                (Value::Int(a), Value::Int(b)) => f(*a, *b).to_string(),
                _ => unreachable!(),
            })
            .collect()
    }

    fn outcomes(values: &[String]) -> Vec<TestOutcome> {
        values.iter().enumerate().map(|(i, v)| checked(i, v)).collect()
    }

    #[test]
    fn exact_key_message() {
        let (cfg, suite) = sub_suite();
        let sol = answers(&suite, |a, b| a - b);
        let got = outcomes(&answers(&suite, |a, _| a));
        let passes = compare_results(&got, &sol, SemType::Int, false).unwrap();
        let (ex, msg) = select_feedback(&suite, &passes, &got, &sol, &cfg.test, SemType::Int);
        assert_eq!(
            ex,
            Some(Example { input: "(10,5)".into(), expected: "5".into(), actual: "10".into() })
        );
        assert_eq!(msg.as_deref(), Some("Have you subtracted the 2nd parameter?"));
    }

    #[test]
    fn wildcard_message() {
        let (cfg, suite) = sub_suite();
        let sol = answers(&suite, |a, b| a - b);
        let got = outcomes(&answers(&suite, |a, b| if a >= 0 { a - b } else { a + b }));
        let passes = compare_results(&got, &sol, SemType::Int, false).unwrap();
        let (ex, msg) = select_feedback(&suite, &passes, &got, &sol, &cfg.test, SemType::Int);
        let ex = ex.unwrap();
        assert_eq!((ex.input.as_str(), ex.actual.as_str()), ("(-1,2)", "1"));
        assert_eq!(msg.as_deref(), Some("Have you considered negative parameters?"));
    }

    #[test]
    fn unmatched_key_without_wildcard_gives_no_message() {
        let (cfg, suite) = sub_suite();
        let sol = answers(&suite, |a, b| a - b);
        let got = outcomes(&answers(&suite, |a, b| a + b));
        let passes = compare_results(&got, &sol, SemType::Int, false).unwrap();
        let (ex, msg) = select_feedback(&suite, &passes, &got, &sol, &cfg.test, SemType::Int);
        assert_eq!(ex.unwrap().actual, "15");
        assert_eq!(msg, None);
    }

    #[test]
    fn random_failures_carry_no_message() {
        let (cfg, suite) = sub_suite();
        let sol = answers(&suite, |a, b| a - b);
        let mut passes = vec![true; suite.len()];
        passes[5] = false;
        let got = outcomes(&sol);
        let (ex, msg) = select_feedback(&suite, &passes, &got, &sol, &cfg.test, SemType::Int);
        assert!(ex.is_some());
        assert_eq!(msg, None);
        let (ex, msg) = select_feedback(&suite, &[true; 14], &got, &sol, &cfg.test, SemType::Int);
        assert_eq!((ex, msg), (None, None));
    }

    #[test]
    fn non_checked_actual_texts() {
        assert_eq!(actual_text(&TestOutcome::new(0, Verdict::Exception, "ValueError: x")), "exception: ValueError: x");
        assert_eq!(actual_text(&TestOutcome::new(0, Verdict::Timeout, "")), "timeout");
        assert_eq!(actual_text(&TestOutcome::new(0, Verdict::Error, "load-error: SyntaxError")), "load-error: SyntaxError");
        assert_eq!(actual_text(&TestOutcome::new(0, Verdict::Error, "type-mismatch")), "error: type-mismatch");
    }

    #[test]
    fn exception_on_predefined_uses_wildcard() {
        let (cfg, suite) = sub_suite();
        let sol = answers(&suite, |a, b| a - b);
        let mut got = outcomes(&sol);
        got[2] = TestOutcome::new(2, Verdict::Exception, "ValueError: negative");
        let passes = compare_results(&got, &sol, SemType::Int, false).unwrap();
        let (ex, msg) = select_feedback(&suite, &passes, &got, &sol, &cfg.test, SemType::Int);
        assert_eq!(ex.unwrap().actual, "exception: ValueError: negative");
        assert_eq!(msg.as_deref(), Some("Have you considered negative parameters?"));
    }

    proptest! {
        #[test]
        fn score_is_pass_ratio(passes in proptest::collection::vec(any::<bool>(), 1..200)) {
            let k = passes.iter().filter(|p| **p).count();
            let s = compute_score(&passes);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s - k as f64 / passes.len() as f64).abs() <= 1e-12);
        }
    }
}
