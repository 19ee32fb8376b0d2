//! Argument tuples such as `(10, 5)` or `("a,b", true)`.

use thiserror::Error;

use crate::value::{parse_value, render_value, SemType, Value, ValueError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleError {
    #[error("argument tuple must be enclosed in parentheses")]
    Unbalanced,
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("expected {expected} argument(s), found {found}")]
    Arity { expected: usize, found: usize },
    #[error("argument {index}: {source}")]
    Element {
        index: usize,
        #[source]
        source: ValueError,
    },
}

/// Parse a parenthesized, comma-separated tuple positionally against `types`.
///
/// Whitespace around elements is ignored. A single trailing comma is allowed
/// (`(5,)`). Commas and parentheses inside string literals are not separators.
pub fn parse_args_tuple(text: &str, types: &[SemType]) -> Result<Vec<Value>, TupleError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or(TupleError::Unbalanced)?;

    let mut parts = split_top_level(inner)?;
    if parts.len() == 1 && parts[0].trim().is_empty() {
        parts.clear();
    } else if parts.len() > 1 && parts.last().is_some_and(|p| p.trim().is_empty()) {
        parts.pop();
    }

    if parts.len() != types.len() {
        return Err(TupleError::Arity {
            expected: types.len(),
            found: parts.len(),
        });
    }

    parts
        .iter()
        .zip(types)
        .enumerate()
        .map(|(index, (part, ty))| {
            parse_value(part, *ty).map_err(|source| TupleError::Element { index, source })
        })
        .collect()
}

fn split_top_level(inner: &str) -> Result<Vec<&str>, TupleError> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in inner.char_indices() {
        if in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '(' | ')' => return Err(TupleError::Unbalanced),
            ',' => {
                parts.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if in_str {
        return Err(TupleError::UnterminatedString);
    }
    parts.push(&inner[start..]);
    Ok(parts)
}

/// Compact tuple text used in feedback examples: `(10,5)`.
pub fn render_args_tuple(args: &[Value]) -> String {
    let items: Vec<String> = args.iter().map(render_value).collect();
    format!("({})", items.join(","))
}
