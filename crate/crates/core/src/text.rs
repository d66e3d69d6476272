//! Line-oriented record parsing shared by every file format in the crate.
//!
//! Each non-blank line that does not start with `#` is a record: a one-token
//! tag followed by whitespace-separated fields. Line numbers are 1-based.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record<'a> {
    pub line: usize,
    pub tag: &'a str,
    pub fields: Vec<&'a str>,
}

impl<'a> Record<'a> {
    pub fn expect_fields(&self, n: usize) -> Result<(), ParseError> {
        if self.fields.len() != n {
            return Err(ParseError::new(
                self.line,
                format!(
                    "`{}` expects {} field(s), found {}",
                    self.tag,
                    n,
                    self.fields.len()
                ),
            ));
        }
        Ok(())
    }

    pub fn parse_field<T: std::str::FromStr>(&self, idx: usize) -> Result<T, ParseError> {
        let raw = self.fields.get(idx).ok_or_else(|| {
            ParseError::new(self.line, format!("`{}` is missing field {}", self.tag, idx + 1))
        })?;
        raw.parse().map_err(|_| {
            ParseError::new(
                self.line,
                format!("`{}`: cannot parse `{}` as a number", self.tag, raw),
            )
        })
    }

    pub fn parse_all<T: std::str::FromStr>(&self, from: usize) -> Result<Vec<T>, ParseError> {
        (from..self.fields.len())
            .map(|i| self.parse_field(i))
            .collect()
    }
}

pub fn records(text: &str) -> impl Iterator<Item = Record<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let mut parts = line.split_whitespace();
        let tag = parts.next()?;
        Some(Record {
            line: i + 1,
            tag,
            fields: parts.collect(),
        })
    })
}
