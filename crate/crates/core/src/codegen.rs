//! Code templates: a function skeleton with named placeholders that are
//! filled with the learner's (or the instructor's) code fragments.
//!
//! A placeholder occupies a line of its own in the skeleton, written as
//! `{{name}}` preceded by its indentation. Storing templates as plain text
//! keeps the package format diffable; the placeholder list is recovered by
//! scanning the skeleton.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{FunctionSpec, BODY_FIELD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Python,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Python => "python",
        }
    }

    /// File name of the filled source inside a scratch directory.
    pub fn source_file(self, teacher: bool) -> &'static str {
        match (self, teacher) {
            (Language::Python, false) => "student.py",
            (Language::Python, true) => "teacher.py",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported language `{0}`")]
pub struct UnsupportedLanguage(pub String);

impl FromStr for Language {
    type Err = UnsupportedLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "python" => Ok(Language::Python),
            other => Err(UnsupportedLanguage(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderSpec {
    pub name: String,
    pub indent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTemplate {
    pub language: Language,
    pub skeleton: String,
    pub placeholders: Vec<PlaceholderSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("placeholder `{0}` appears more than once")]
    DuplicatePlaceholder(String),
}

pub fn make_template(spec: &FunctionSpec, language: Language) -> CodeTemplate {
    match language {
        Language::Python => {
            let args: Vec<&str> = spec.args.iter().map(|a| a.name.as_str()).collect();
            let skeleton = format!(
                "def {}({}):\n{}{{{{{}}}}}\n",
                spec.name,
                args.join(", "),
                " ".repeat(4),
                BODY_FIELD
            );
            CodeTemplate {
                language,
                skeleton,
                placeholders: vec![PlaceholderSpec {
                    name: BODY_FIELD.to_string(),
                    indent: 4,
                }],
            }
        }
    }
}

/// Like [`make_template`] but from a language tag.
pub fn make_template_for(spec: &FunctionSpec, language: &str) -> Result<CodeTemplate, UnsupportedLanguage> {
    Ok(make_template(spec, language.parse()?))
}

impl CodeTemplate {
    /// Rebuild a template from its skeleton text.
    pub fn from_skeleton(language: Language, skeleton: &str) -> Result<CodeTemplate, TemplateError> {
        let mut placeholders: Vec<PlaceholderSpec> = Vec::new();
        for line in skeleton.split('\n') {
            if let Some((indent, name)) = placeholder_line(line) {
                if placeholders.iter().any(|p| p.name == name) {
                    return Err(TemplateError::DuplicatePlaceholder(name.to_string()));
                }
                placeholders.push(PlaceholderSpec {
                    name: name.to_string(),
                    indent,
                });
            }
        }
        Ok(CodeTemplate {
            language,
            skeleton: skeleton.to_string(),
            placeholders,
        })
    }
}

fn placeholder_line(line: &str) -> Option<(usize, &str)> {
    let body = line.trim_start_matches(' ');
    let indent = line.len() - body.len();
    let name = body.strip_prefix("{{")?.strip_suffix("}}")?;
    let ok = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    ok.then_some((indent, name))
}

/// Substitute every placeholder with its fragment, indenting each fragment
/// line to the placeholder column. Fragments are otherwise inserted verbatim.
pub fn fill_template(
    template: &CodeTemplate,
    fields: &BTreeMap<String, String>,
) -> Result<String, TemplateError> {
    if let Some(missing) = template
        .placeholders
        .iter()
        .find(|p| !fields.contains_key(&p.name))
    {
        return Err(TemplateError::MissingField(missing.name.clone()));
    }

    let mut out = String::with_capacity(template.skeleton.len() + 64);
    let mut lines = template.skeleton.split('\n').peekable();
    while let Some(line) = lines.next() {
        match placeholder_line(line).and_then(|(indent, name)| fields.get(name).map(|f| (indent, f))) {
            Some((indent, fragment)) => {
                let pad = " ".repeat(indent);
                let mut frag_lines = fragment.split('\n').peekable();
                while let Some(fl) = frag_lines.next() {
                    out.push_str(&pad);
                    out.push_str(fl);
                    if frag_lines.peek().is_some() {
                        out.push('\n');
                    }
                }
            }
            None => out.push_str(line),
        }
        if lines.peek().is_some() {
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ArgSpec, FunctionSpec};
    use crate::value::SemType;

    fn sub_spec() -> FunctionSpec {
        FunctionSpec {
            name: "sub".into(),
            args: vec![
                ArgSpec { name: "a".into(), ty: SemType::Int },
                ArgSpec { name: "b".into(), ty: SemType::Int },
            ],
            return_type: SemType::Int,
        }
    }

    fn body(code: &str) -> BTreeMap<String, String> {
        BTreeMap::from([("f1".to_string(), code.to_string())])
    }

    #[test]
    fn python_skeleton() {
        let t = make_template(&sub_spec(), Language::Python);
        assert_eq!(t.skeleton, "def sub(a, b):\n    {{f1}}\n");
        assert_eq!(t.placeholders, vec![PlaceholderSpec { name: "f1".into(), indent: 4 }]);
    }

    #[test]
    fn zero_arg_skeleton() {
        let spec = FunctionSpec { name: "f".into(), args: vec![], return_type: SemType::Int };
        let t = make_template(&spec, Language::Python);
        assert!(t.skeleton.starts_with("def f():\n"));
    }

    #[test]
    fn unsupported_language() {
        assert_eq!(
            make_template_for(&sub_spec(), "cobol"),
            Err(UnsupportedLanguage("cobol".into()))
        );
    }

    #[test]
    fn fills_teacher_and_student_sources() {
        let t = make_template(&sub_spec(), Language::Python);
        assert_eq!(fill_template(&t, &body("return a - b")).unwrap(), "def sub(a, b):\n    return a - b\n");
        assert_eq!(fill_template(&t, &body("return a")).unwrap(), "def sub(a, b):\n    return a\n");
    }

    #[test]
    fn missing_field() {
        let t = make_template(&sub_spec(), Language::Python);
        assert_eq!(
            fill_template(&t, &BTreeMap::new()),
            Err(TemplateError::MissingField("f1".into()))
        );
    }

    #[test]
    fn multi_line_fragment_is_indented_line_by_line() {
        let t = make_template(&sub_spec(), Language::Python);
        let src = fill_template(&t, &body("d = a - b\nif d:\n    return d\nreturn 0")).unwrap();
        assert_eq!(
            src,
            "def sub(a, b):\n    d = a - b\n    if d:\n        return d\n    return 0\n"
        );
    }

    #[test]
    fn fragments_are_verbatim() {
        let t = make_template(&sub_spec(), Language::Python);
        let frag = "return '{{f1}}' + \"\\n\"";
        let src = fill_template(&t, &body(frag)).unwrap();
        assert!(src.contains(frag));
        // Empty bodies are passed through; the runner reports the load failure.
        assert_eq!(fill_template(&t, &body("")).unwrap(), "def sub(a, b):\n    \n");
    }

    #[test]
    fn skeleton_round_trip() {
        let t = make_template(&sub_spec(), Language::Python);
        assert_eq!(CodeTemplate::from_skeleton(Language::Python, &t.skeleton).unwrap(), t);
        assert_eq!(
            CodeTemplate::from_skeleton(Language::Python, "{{x}}\n  {{x}}\n"),
            Err(TemplateError::DuplicatePlaceholder("x".into()))
        );
    }
}
