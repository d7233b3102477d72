//! Report output: `key=value` records, one per line, with `#` comments.

use std::fmt::{Display, Write as _};
use std::io::Write;
use std::path::Path;

use ppuf_core::metrics::Summary;

use crate::error::{CliError, CliResult};

/// One report line under construction.
#[derive(Debug, Clone, Default)]
pub struct Record {
    line: String,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self { line: kind.to_string() }
    }

    pub fn field(mut self, key: &str, value: impl Display) -> Self {
        write!(self.line, " {key}={value}").expect("writing to a String");
        self
    }

    pub fn opt_field<T: Display>(self, key: &str, value: Option<T>) -> Self {
        match value {
            Some(v) => self.field(key, v),
            None => self.field(key, "none"),
        }
    }

    pub fn summary(self, s: &Summary) -> Self {
        self.field("count", s.count)
            .field("mean", s.mean)
            .field("median", s.median)
            .field("std", s.std_dev)
            .field("min", s.min)
            .field("max", s.max)
    }

    pub fn as_str(&self) -> &str {
        &self.line
    }
}

/// Accumulated report text.
#[derive(Debug, Clone, Default)]
pub struct Report {
    text: String,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: impl Display) {
        writeln!(self.text, "# {text}").expect("writing to a String");
    }

    pub fn push(&mut self, record: Record) {
        self.text.push_str(record.as_str());
        self.text.push('\n');
    }

    /// A bare data row of whitespace-separated columns.
    pub fn row(&mut self, a: impl Display, b: impl Display) {
        writeln!(self.text, "{a} {b}").expect("writing to a String");
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Write to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> CliResult<()> {
        match path {
            Some(p) => std::fs::write(p, &self.text).map_err(|e| CliError::write(p, e)),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(self.text.as_bytes())
                    .and_then(|()| out.flush())
                    .map_err(|e| CliError::usage(format!("cannot write to stdout: {e}")))
            }
        }
    }
}
