//! The inner submission and grade documents.
//!
//! ```json
//! {"tid": "s001", "fields": {"f1": "return a"}}
//! ```
//!
//! is answered with
//!
//! ```json
//! {"tid": "s001", "status": "failed",
//!  "feedback": {"example": {"input": "(10,5)", "expected": "5", "actual": "10"},
//!               "message": "...", "stats": {"succeeded": 2, "total": 14},
//!               "score": 0.14285714285714285}}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;
use thiserror::Error;

use super::feedback::Feedback;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission {
    pub submission_id: String,
    pub fields: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubmissionError {
    #[error("submission is not valid JSON: {0}")]
    Parse(String),
    #[error("submission {0}")]
    Shape(String),
}

impl Submission {
    pub fn new(submission_id: impl Into<String>, fields: BTreeMap<String, String>) -> Self {
        Submission {
            submission_id: submission_id.into(),
            fields,
        }
    }

    /// Parse `{"tid": <submission id>, "fields": {<name>: <fragment>}}`.
    pub fn parse(text: &str) -> Result<Submission, SubmissionError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| SubmissionError::Parse(e.to_string()))?;
        let shape = |m: &str| SubmissionError::Shape(m.to_string());
        let obj = doc.as_object().ok_or_else(|| shape("must be a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| *k != "tid" && *k != "fields") {
            return Err(SubmissionError::Shape(format!("has unknown key `{k}`")));
        }
        let tid = obj
            .get("tid")
            .and_then(Json::as_str)
            .ok_or_else(|| shape("needs a string `tid`"))?;
        if tid.is_empty() {
            return Err(shape("`tid` must not be empty"));
        }
        let fields = obj
            .get("fields")
            .and_then(Json::as_object)
            .ok_or_else(|| shape("needs an object `fields`"))?;
        let mut out = BTreeMap::new();
        for (k, v) in fields {
            let v = v
                .as_str()
                .ok_or_else(|| SubmissionError::Shape(format!("field `{k}` must be a string")))?;
            out.insert(k.clone(), v.to_string());
        }
        Ok(Submission::new(tid, out))
    }

    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            tid: &'a str,
            fields: &'a BTreeMap<String, String>,
        }
        serde_json::to_string(&Doc {
            tid: &self.submission_id,
            fields: &self.fields,
        })
        .expect("submission serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradeStatus {
    Success,
    Failed,
    Error,
}

impl GradeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GradeStatus::Success => "success",
            GradeStatus::Failed => "failed",
            GradeStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeOutput {
    #[serde(rename = "tid")]
    pub submission_id: String,
    pub status: GradeStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub feedback: Option<Feedback>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_detail: Option<String>,
}

impl GradeOutput {
    pub fn graded(submission_id: impl Into<String>, feedback: Feedback) -> Self {
        let status = if feedback.stats.succeeded == feedback.stats.total {
            GradeStatus::Success
        } else {
            GradeStatus::Failed
        };
        GradeOutput {
            submission_id: submission_id.into(),
            status,
            feedback: Some(feedback),
            error_detail: None,
        }
    }

    pub fn error(submission_id: impl Into<String>, detail: impl Into<String>) -> Self {
        GradeOutput {
            submission_id: submission_id.into(),
            status: GradeStatus::Error,
            feedback: None,
            error_detail: Some(detail.into()),
        }
    }

    /// Pretty-printed document, as returned by both the CLI and the HTTP API.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("grade output serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::feedback::{Example, Stats};

    #[test]
    fn parses_submission() {
        let s = Submission::parse(r#"{"tid": "s001", "fields": {"f1": "return a"}}"#).unwrap();
        assert_eq!(s.submission_id, "s001");
        assert_eq!(s.fields["f1"], "return a");
        assert_eq!(Submission::parse(&s.to_json_string()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_submissions() {
        assert!(matches!(Submission::parse("not-json"), Err(SubmissionError::Parse(_))));
        for bad in [
            "[]",
            r#"{"fields": {}}"#,
            r#"{"tid": "", "fields": {}}"#,
            r#"{"tid": "s", "fields": {"f1": 3}}"#,
            r#"{"tid": "s", "fields": {}, "extra": 1}"#,
            r#"{"tid": 7, "fields": {}}"#,
        ] {
            assert!(matches!(Submission::parse(bad), Err(SubmissionError::Shape(_))), "{bad}");
        }
    }

    #[test]
    fn key_order_and_omission() {
        let fb = Feedback {
            example: Some(Example {
                input: "(10,5)".into(),
                expected: "5".into(),
                actual: "10".into(),
            }),
            message: None,
            stats: Stats { succeeded: 2, total: 14 },
            score: 2.0 / 14.0,
        };
        let out = GradeOutput::graded("s001", fb);
        assert_eq!(out.status, GradeStatus::Failed);
        let text = serde_json::to_string(&out).unwrap();
        assert_eq!(
            text,
            r#"{"tid":"s001","status":"failed","feedback":{"example":{"input":"(10,5)","expected":"5","actual":"10"},"stats":{"succeeded":2,"total":14},"score":0.14285714285714285}}"#
        );
        let back: GradeOutput = serde_json::from_str(&text).unwrap();
        assert_eq!(back, out);

        let err = serde_json::to_string(&GradeOutput::error("", "boom")).unwrap();
        assert_eq!(err, r#"{"tid":"","status":"error","error_detail":"boom"}"#);
    }

    #[test]
    fn success_iff_all_pass() {
        let fb = Feedback {
            example: None,
            message: None,
            stats: Stats { succeeded: 14, total: 14 },
            score: 1.0,
        };
        assert_eq!(GradeOutput::graded("x", fb).status, GradeStatus::Success);
    }
}
