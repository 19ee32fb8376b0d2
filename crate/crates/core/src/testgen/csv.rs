//! `data.csv`: RFC 4180, no header, `\n` record terminator, one column per
//! argument.
//!
//! Cells hold the canonical rendering of int, float and bool arguments. String
//! arguments are stored as their raw text and rely on CSV quoting alone, so
//! `a,"b` is written as `"a,""b"`.

use thiserror::Error;

use super::TestSuite;
use crate::value::{parse_value, render_value, SemType, Value, ValueError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("row {row}: expected {expected} column(s), found {found}")]
    Arity {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {col}: {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: ValueError,
    },
    #[error("row {row}: malformed quoting")]
    Quoting { row: usize },
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        other => render_value(other),
    }
}

fn needs_quotes(s: &str) -> bool {
    s.contains([',', '"', '\n', '\r'])
}

pub fn write_suite_csv(suite: &TestSuite) -> String {
    let mut out = String::new();
    for case in &suite.cases {
        for (i, v) in case.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let text = cell_text(v);
            if needs_quotes(&text) {
                out.push('"');
                out.push_str(&text.replace('"', "\"\""));
                out.push('"');
            } else {
                out.push_str(&text);
            }
        }
        out.push('\n');
    }
    out
}

/// Read `data.csv` back into typed rows.
pub fn parse_suite_csv(text: &str, types: &[SemType]) -> Result<Vec<Vec<Value>>, CsvError> {
    let records = split_records(text)?;
    records
        .into_iter()
        .enumerate()
        .map(|(row, fields)| {
            // An empty line is a zero-column record, or a single empty string.
            let fields = if fields.len() == 1 && fields[0].is_empty() && types.len() != 1 {
                Vec::new()
            } else {
                fields
            };
            if fields.len() != types.len() {
                return Err(CsvError::Arity {
                    row,
                    expected: types.len(),
                    found: fields.len(),
                });
            }
            fields
                .into_iter()
                .zip(types)
                .enumerate()
                .map(|(col, (f, ty))| match ty {
                    SemType::Str => Ok(Value::Str(f)),
                    _ => parse_value(&f, *ty).map_err(|source| CsvError::Cell { row, col, source }),
                })
                .collect()
        })
        .collect()
}

fn split_records(text: &str) -> Result<Vec<Vec<String>>, CsvError> {
    let mut records = Vec::new();
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = text.chars().peekable();
    let mut quoted = false;
    let mut at_field_start = true;

    while let Some(c) = chars.next() {
        if quoted {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    quoted = false;
                    if !matches!(chars.peek(), None | Some(',') | Some('\n')) {
                        return Err(CsvError::Quoting { row: records.len() });
                    }
                }
            } else {
                field.push(c);
            }
            continue;
        }
        match c {
            '"' if at_field_start => {
                quoted = true;
                at_field_start = false;
            }
            '"' => return Err(CsvError::Quoting { row: records.len() }),
            ',' => {
                fields.push(std::mem::take(&mut field));
                at_field_start = true;
            }
            '\n' => {
                fields.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut fields));
                at_field_start = true;
            }
            c => {
                field.push(c);
                at_field_start = false;
            }
        }
    }
    if quoted {
        return Err(CsvError::Quoting { row: records.len() });
    }
    if !at_field_start || !fields.is_empty() || !field.is_empty() {
        fields.push(field);
        records.push(fields);
    }
    Ok(records)
}
