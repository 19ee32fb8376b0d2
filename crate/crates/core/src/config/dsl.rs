//! Random generator expressions: `int(lo,hi)`, `float(lo,hi)`, `bool()` and
//! `str(minlen,maxlen)`.

use std::fmt;

use thiserror::Error;

use crate::value::{render_value, SemType, Value};

/// Upper bound on `str(...)` lengths, so a config cannot ask for gigabyte strings.
pub const MAX_STR_LEN: usize = 65_536;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorExpr {
    /// Uniform integer in `[lo, hi]`, both ends inclusive.
    IntRange { lo: i64, hi: i64 },
    /// Uniform float in `[lo, hi)`.
    FloatRange { lo: f64, hi: f64 },
    /// Fair coin.
    Bool,
    /// Lowercase ASCII string with length uniform in `[min_len, max_len]`.
    StrLen { min_len: usize, max_len: usize },
}

impl GeneratorExpr {
    pub fn kind(&self) -> SemType {
        match self {
            GeneratorExpr::IntRange { .. } => SemType::Int,
            GeneratorExpr::FloatRange { .. } => SemType::Float,
            GeneratorExpr::Bool => SemType::Bool,
            GeneratorExpr::StrLen { .. } => SemType::Str,
        }
    }
}

impl fmt::Display for GeneratorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorExpr::IntRange { lo, hi } => write!(f, "int({lo},{hi})"),
            GeneratorExpr::FloatRange { lo, hi } => write!(
                f,
                "float({},{})",
                render_value(&Value::Float(*lo)),
                render_value(&Value::Float(*hi))
            ),
            GeneratorExpr::Bool => f.write_str("bool()"),
            GeneratorExpr::StrLen { min_len, max_len } => write!(f, "str({min_len},{max_len})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid generator `{text}`: {reason}")]
pub struct DslError {
    pub text: String,
    pub reason: String,
}

/// Parse a generator expression and check that it produces values of `expected`.
pub fn parse_generator_expr(text: &str, expected: SemType) -> Result<GeneratorExpr, DslError> {
    let err = |reason: String| DslError {
        text: text.to_string(),
        reason,
    };

    let t = text.trim();
    let open = t
        .find('(')
        .ok_or_else(|| err("expected `kind(params)`".into()))?;
    let kind = t[..open].trim();
    let rest = &t[open + 1..];
    let params = rest
        .strip_suffix(')')
        .ok_or_else(|| err("missing closing parenthesis".into()))?;
    if params.contains('(') || params.contains(')') {
        return Err(err("unbalanced parentheses".into()));
    }
    let params: Vec<&str> = if params.trim().is_empty() {
        Vec::new()
    } else {
        params.split(',').map(str::trim).collect()
    };

    let arity = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(err(format!(
                "`{kind}` takes {n} parameter(s), found {}",
                params.len()
            )))
        }
    };

    let expr = match kind {
        "int" => {
            arity(2)?;
            let lo = parse_int(params[0]).map_err(&err)?;
            let hi = parse_int(params[1]).map_err(&err)?;
            if lo > hi {
                return Err(err(format!("lower bound {lo} exceeds upper bound {hi}")));
            }
            GeneratorExpr::IntRange { lo, hi }
        }
        "float" => {
            arity(2)?;
            let lo = parse_finite(params[0]).map_err(&err)?;
            let hi = parse_finite(params[1]).map_err(&err)?;
            if lo > hi {
                return Err(err(format!("lower bound {lo} exceeds upper bound {hi}")));
            }
            GeneratorExpr::FloatRange { lo, hi }
        }
        "bool" => {
            arity(0)?;
            GeneratorExpr::Bool
        }
        "str" => {
            arity(2)?;
            let min_len = parse_len(params[0]).map_err(&err)?;
            let max_len = parse_len(params[1]).map_err(&err)?;
            if min_len > max_len {
                return Err(err(format!(
                    "minimum length {min_len} exceeds maximum length {max_len}"
                )));
            }
            GeneratorExpr::StrLen { min_len, max_len }
        }
        "" => return Err(err("missing generator kind".into())),
        other => return Err(err(format!("unknown generator kind `{other}`"))),
    };

    if expr.kind() != expected {
        return Err(err(format!(
            "generates {} values but the argument is declared {expected}",
            expr.kind()
        )));
    }
    Ok(expr)
}

fn parse_int(s: &str) -> Result<i64, String> {
    s.parse::<i64>()
        .map_err(|_| format!("`{s}` is not an integer"))
}

fn parse_finite(s: &str) -> Result<f64, String> {
    match crate::value::parse_value(s, SemType::Float) {
        Ok(Value::Float(x)) if x.is_finite() => Ok(x),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

fn parse_len(s: &str) -> Result<usize, String> {
    let n = s
        .parse::<usize>()
        .map_err(|_| format!("`{s}` is not a non-negative length"))?;
    if n > MAX_STR_LEN {
        return Err(format!("length {n} exceeds the maximum of {MAX_STR_LEN}"));
    }
    Ok(n)
}
