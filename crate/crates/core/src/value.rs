//! Semantic types and concrete values exchanged between the engine and the
//! language runners.
//!
//! Every value has one canonical text form. Test inputs, expected answers and
//! learner answers all travel as that text, so two answers are compared by
//! parsing both sides back into a [`Value`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The closed set of argument and return types a task may declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemType {
    Int,
    Float,
    Bool,
    Str,
}

impl SemType {
    pub const ALL: [SemType; 4] = [SemType::Int, SemType::Float, SemType::Bool, SemType::Str];

    pub fn as_str(self) -> &'static str {
        match self {
            SemType::Int => "int",
            SemType::Float => "float",
            SemType::Bool => "bool",
            SemType::Str => "str",
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown type tag `{0}` (expected int, float, bool or str)")]
pub struct UnknownType(pub String);

impl FromStr for SemType {
    type Err = UnknownType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int" => Ok(SemType::Int),
            "float" => Ok(SemType::Float),
            "bool" => Ok(SemType::Bool),
            "str" => Ok(SemType::Str),
            other => Err(UnknownType(other.to_string())),
        }
    }
}

/// One concrete value of a [`SemType`].
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

// Floats compare by bit pattern so that `-0.0` and `0.0` stay distinct (they
// render differently); all NaNs are considered equal.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => {
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
            }
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn sem_type(&self) -> SemType {
        match self {
            Value::Int(_) => SemType::Int,
            Value::Float(_) => SemType::Float,
            Value::Bool(_) => SemType::Bool,
            Value::Str(_) => SemType::Str,
        }
    }

    /// Canonical text of the value; see [`render_value`].
    pub fn render(&self) -> String {
        render_value(self)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_value(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{text}` is not a valid {ty} value: {reason}")]
pub struct ValueError {
    pub ty: SemType,
    pub text: String,
    pub reason: String,
}

impl ValueError {
    fn new(ty: SemType, text: &str, reason: impl Into<String>) -> Self {
        ValueError {
            ty,
            text: text.to_string(),
            reason: reason.into(),
        }
    }
}

/// Render a value in its canonical form.
///
/// - int: decimal, leading minus when negative
/// - float: shortest decimal that round-trips, never in exponent notation,
///   always with a fractional part (`1.0`, `0.5`); `nan`, `inf`, `-inf`
/// - bool: `true` / `false`
/// - str: double quoted; quote, backslash, newline, carriage return and tab
///   are backslash-escaped
pub fn render_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => render_float(*x),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => quote_str(s),
    }
}

fn render_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let mut s = x.to_string();
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

fn quote_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Parse text as a value of type `ty`. Surrounding whitespace is ignored.
pub fn parse_value(text: &str, ty: SemType) -> Result<Value, ValueError> {
    let t = text.trim();
    match ty {
        SemType::Int => {
            if t.is_empty() {
                return Err(ValueError::new(ty, text, "empty"));
            }
            t.parse::<i64>()
                .map(Value::Int)
                .map_err(|e| ValueError::new(ty, text, e.to_string()))
        }
        SemType::Float => parse_float(t)
            .map(Value::Float)
            .ok_or_else(|| ValueError::new(ty, text, "not a decimal number")),
        SemType::Bool => match t {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(ValueError::new(ty, text, "expected `true` or `false`")),
        },
        SemType::Str => unquote_str(t)
            .map(Value::Str)
            .map_err(|reason| ValueError::new(ty, text, reason)),
    }
}

fn parse_float(t: &str) -> Option<f64> {
    match t {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    // Rust also accepts "infinity", "NaN" and friends; only plain decimals
    // (optionally with an exponent) are allowed here.
    let ok = !t.is_empty()
        && t.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'-' | b'+' | b'.' | b'e' | b'E'))
        && t.bytes().any(|b| b.is_ascii_digit());
    if !ok {
        return None;
    }
    t.parse::<f64>().ok()
}

fn unquote_str(t: &str) -> Result<String, String> {
    let inner = t
        .strip_prefix('"')
        .and_then(|rest| rest.strip_suffix('"'))
        .filter(|_| t.len() >= 2)
        .ok_or_else(|| "string values must be double quoted".to_string())?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some('t') => out.push('\t'),
                Some(other) => return Err(format!("unknown escape `\\{other}`")),
                None => return Err("dangling backslash".to_string()),
            },
            '"' => return Err("unescaped quote inside string".to_string()),
            c => out.push(c),
        }
    }
    Ok(out)
}

/// Parse then re-render, giving the canonical text of `text` read as `ty`.
pub fn canonicalize(text: &str, ty: SemType) -> Result<String, ValueError> {
    parse_value(text, ty).map(|v| render_value(&v))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_ints() {
        assert_eq!(render_value(&Value::Int(5)), "5");
        assert_eq!(render_value(&Value::Int(-1)), "-1");
    }

    #[test]
    fn renders_floats() {
        assert_eq!(render_value(&Value::Float(0.5)), "0.5");
        assert_eq!(render_value(&Value::Float(1.0)), "1.0");
        assert_eq!(render_value(&Value::Float(-0.0)), "-0.0");
        assert_eq!(render_value(&Value::Float(1e20)), "100000000000000000000.0");
        assert_eq!(render_value(&Value::Float(1e-7)), "0.0000001");
        assert_eq!(render_value(&Value::Float(0.1 + 0.2)), "0.30000000000000004");
        assert_eq!(render_value(&Value::Float(f64::NEG_INFINITY)), "-inf");
    }

    #[test]
    fn renders_bools() {
        assert_eq!(render_value(&Value::Bool(true)), "true");
        assert_eq!(render_value(&Value::Bool(false)), "false");
    }

    #[test]
    fn escapes_strings() {
        assert_eq!(render_value(&Value::Str("a\"b".into())), "\"a\\\"b\"");
        assert_eq!(render_value(&Value::Str("x\\y\n\t".into())), "\"x\\\\y\\n\\t\"");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_value("", SemType::Int).is_err());
        assert!(parse_value("1.5", SemType::Int).is_err());
        assert!(parse_value("True", SemType::Bool).is_err());
        assert!(parse_value("abc", SemType::Str).is_err());
        assert!(parse_value("\"", SemType::Str).is_err());
        assert!(parse_value("\"a\"b\"", SemType::Str).is_err());
        assert!(parse_value("\"\\q\"", SemType::Str).is_err());
        assert!(parse_value("infinity", SemType::Float).is_err());
        assert!(parse_value("1e", SemType::Float).is_err());
    }

    #[test]
    fn canonicalizes_keys() {
        assert_eq!(canonicalize(" 10 ", SemType::Int).unwrap(), "10");
        assert_eq!(canonicalize("+10", SemType::Int).unwrap(), "10");
        assert_eq!(canonicalize("10", SemType::Float).unwrap(), "10.0");
        assert_eq!(canonicalize("1e2", SemType::Float).unwrap(), "100.0");
    }

    pub(crate) fn any_value() -> impl Strategy<Value = Value> {
        prop_oneof![
            any::<i64>().prop_map(Value::Int),
            any::<f64>().prop_map(Value::Float),
            any::<bool>().prop_map(Value::Bool),
            any::<String>().prop_map(Value::Str),
        ]
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(v in any_value()) {
            let text = render_value(&v);
            let back = parse_value(&text, v.sem_type()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn rendered_values_are_single_line(v in any_value()) {
            let text = render_value(&v);
            prop_assert!(!text.contains('\n') && !text.contains('\r'));
        }

        #[test]
        fn parse_never_panics(s in ".*", i in 0usize..4) {
            let _ = parse_value(&s, SemType::ALL[i]);
        }
    }
}
