//! Reuse edges and their tab-separated file format.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tsv::{self, TsvError};

pub const EDGE_COLUMNS: [&str; 8] = [
    "t1_id",
    "t1_start",
    "t1_end",
    "t2_id",
    "t2_start",
    "t2_end",
    "align_length",
    "positives_percent",
];

#[derive(Debug, Error)]
pub enum EdgeFileError {
    #[error(transparent)]
    Tsv(#[from] TsvError),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("I/O error on {path}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: io::Error,
    },
}

/// One reuse instance between two document spans.
///
/// Spans are half-open raw character offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub t1_id: String,
    pub t1_start: usize,
    pub t1_end: usize,
    pub t2_id: String,
    pub t2_start: usize,
    pub t2_end: usize,
    pub align_length: u32,
    pub positives_percent: f64,
}

impl Edge {
    /// Orients the edge so `t1_id < t2_id`.
    pub fn canonical(mut self) -> Self {
        if self.t1_id > self.t2_id {
            std::mem::swap(&mut self.t1_id, &mut self.t2_id);
            std::mem::swap(&mut self.t1_start, &mut self.t2_start);
            std::mem::swap(&mut self.t1_end, &mut self.t2_end);
        }
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.t1_id < self.t2_id
    }

    pub fn t1_len(&self) -> usize {
        self.t1_end - self.t1_start
    }

    pub fn t2_len(&self) -> usize {
        self.t2_end - self.t2_start
    }

    /// Total order used before persisting, so output is independent of scheduling.
    pub fn sort_key(&self) -> (&str, &str, usize, usize, usize, usize) {
        (
            &self.t1_id,
            &self.t2_id,
            self.t1_start,
            self.t2_start,
            self.t1_end,
            self.t2_end,
        )
    }

    fn validate(&self) -> Result<(), String> {
        if self.t1_start >= self.t1_end || self.t2_start >= self.t2_end {
            return Err("empty or inverted span".into());
        }
        if self.t1_id == self.t2_id {
            return Err(format!("self-edge on `{}`", self.t1_id));
        }
        if !(0.0..=100.0).contains(&self.positives_percent) {
            return Err(format!("positives_percent {} outside [0, 100]", self.positives_percent));
        }
        Ok(())
    }
}

pub fn sort_edges(edges: &mut [Edge]) {
    edges.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn write_edges<W: Write>(mut out: W, edges: &[Edge]) -> io::Result<()> {
    writeln!(out, "{}", EDGE_COLUMNS.join("\t"))?;
    for e in edges {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.2}",
            e.t1_id, e.t1_start, e.t1_end, e.t2_id, e.t2_start, e.t2_end, e.align_length, e.positives_percent
        )?;
    }
    Ok(())
}

/// Parses an edge file. Rows are returned in file order; orientation is kept.
pub fn parse_edges(text: &str) -> Result<Vec<Edge>, EdgeFileError> {
    let mut edges = Vec::new();
    let mut invalid = None;
    tsv::for_each_row(text, &EDGE_COLUMNS, |row| {
        let edge = Edge {
            t1_id: row.str(0).to_string(),
            t1_start: row.parse(1)?,
            t1_end: row.parse(2)?,
            t2_id: row.str(3).to_string(),
            t2_start: row.parse(4)?,
            t2_end: row.parse(5)?,
            align_length: row.parse(6)?,
            positives_percent: row.parse(7)?,
        };
        if let Err(message) = edge.validate() {
            invalid = Some(EdgeFileError::Invalid {
                line: row.line,
                message: message.clone(),
            });
            return Err(row.error(0, message));
        }
        edges.push(edge);
        Ok(())
    })
    .map_err(|e| invalid.take().unwrap_or(EdgeFileError::Tsv(e)))?;
    Ok(edges)
}

pub fn read_edges(path: impl AsRef<std::path::Path>) -> Result<Vec<Edge>, EdgeFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EdgeFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edges(&text)
}
