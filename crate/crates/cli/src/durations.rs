//! Plain-text durations files: `#key=value` header lines followed by one
//! positive decimal duration per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DurationsFile {
    /// Header entries in file order.
    pub header: Vec<(String, String)>,
    pub durations: Vec<f64>,
}

impl DurationsFile {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "#{k}={v}");
        }
        for d in &self.durations {
            let _ = writeln!(out, "{d}");
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut file = DurationsFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    file.header.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            let value: f64 = line
                .parse()
                .map_err(|_| CliError::Data(format!("line {line_no}: '{line}' is not a decimal number")))?;
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Data(format!(
                    "line {line_no}: duration must be positive and finite, got {line}"
                )));
            }
            file.durations.push(value);
        }
        if file.durations.is_empty() {
            return Err(CliError::Data("file contains no durations".into()));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
