//! JSON Lines files with a leading provenance header.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;

pub const TOOL: &str = "modbot";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// First line of every file this toolkit writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
}

impl Header {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Header {
            tool: TOOL.to_owned(),
            version: VERSION.to_owned(),
            command: command.to_owned(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: Header,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

fn to_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("rows serialize to JSON")
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, header: &Header, rows: &[T]) -> std::io::Result<()> {
    writeln!(out, "{}", to_line(&HeaderLine { header: header.clone() }))?;
    for row in rows {
        writeln!(out, "{}", to_line(row))?;
    }
    out.flush()
}

/// Reads rows, skipping blank lines and an optional header line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<(Option<Header>, Vec<T>), FormatError> {
    let mut header = None;
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| FormatError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        if rows.is_empty() && header.is_none() && value.get("header").is_some() {
            let h: HeaderLine = serde_json::from_value(value).map_err(|e| FormatError::Line {
                line: i + 1,
                message: format!("bad header: {e}"),
            })?;
            header = Some(h.header);
            continue;
        }
        rows.push(serde_json::from_value(value).map_err(|e| FormatError::Line {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok((header, rows))
}

/// Pretty JSON document with the header as its first field.
pub fn to_json_document<T: Serialize>(header: &Header, body: &T) -> String {
    let mut doc = serde_json::Map::new();
    doc.insert("header".into(), serde_json::to_value(header).expect("header serializes"));
    match serde_json::to_value(body).expect("body serializes") {
        serde_json::Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("body".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("json");
    s.push('\n');
    s
}
