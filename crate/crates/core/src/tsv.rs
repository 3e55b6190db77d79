//! Minimal tab-separated reader shared by the corpus and edge file formats.
//!
//! No quoting or escaping: a field is whatever lies between two tabs.

use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TsvError {
    #[error("line {line}: expected header `{expected}`, found `{found}`")]
    Header {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: field `{field}`: {message}")]
    Field {
        line: usize,
        field: String,
        message: String,
    },
    #[error("empty file, expected header `{0}`")]
    Empty(String),
}

/// One data row, with its 1-based line number in the source file.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub line: usize,
    fields: &'a [&'a str],
    names: &'a [&'a str],
}

impl<'a> Row<'a> {
    pub fn str(&self, idx: usize) -> &'a str {
        self.fields[idx]
    }

    pub fn parse<T>(&self, idx: usize) -> Result<T, TsvError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.fields[idx].trim().parse().map_err(|e: T::Err| TsvError::Field {
            line: self.line,
            field: self.names[idx].to_string(),
            message: format!("`{}`: {e}", self.fields[idx]),
        })
    }

    pub fn error(&self, idx: usize, message: impl Into<String>) -> TsvError {
        TsvError::Field {
            line: self.line,
            field: self.names[idx].to_string(),
            message: message.into(),
        }
    }
}

/// Walks the rows of `text`, checking the header matches `columns` exactly.
///
/// Blank lines (including a trailing newline) are skipped. A trailing `\r`
/// is stripped so files edited on Windows still parse.
pub fn for_each_row<F>(text: &str, columns: &[&str], mut f: F) -> Result<(), TsvError>
where
    F: FnMut(Row<'_>) -> Result<(), TsvError>,
{
    let expected = columns.join("\t");
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| TsvError::Empty(expected.clone()))?;
    let header = header.trim_end_matches('\r');
    if header != expected {
        return Err(TsvError::Header {
            line: 1,
            expected,
            found: header.to_string(),
        });
    }
    let mut fields: Vec<&str> = Vec::with_capacity(columns.len());
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        fields.clear();
        fields.extend(line.split('\t'));
        if fields.len() != columns.len() {
            return Err(TsvError::FieldCount {
                line: idx + 1,
                expected: columns.len(),
                found: fields.len(),
            });
        }
        f(Row {
            line: idx + 1,
            fields: &fields,
            names: columns,
        })?;
    }
    Ok(())
}
