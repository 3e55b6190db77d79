//! In-memory edge table with a per-document adjacency index.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, DocMetadata};
use crate::edge::{self, Edge, EdgeFileError};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("edge file: {0}")]
    File(#[from] EdgeFileError),
    #[error("edge file line {line}: unknown doc_id `{id}`")]
    UnknownDoc { id: String, line: usize },
    #[error("edge file line {line}: span [{start}, {end}) beyond `{id}` length {len}")]
    SpanOutOfRange {
        id: String,
        line: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("document `{0}` not found")]
    NotFound(String),
    #[error("year range {from}..={to} is empty")]
    InvalidYears { from: i32, to: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    #[default]
    Out,
    Both,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            "both" => Ok(Direction::Both),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

impl Direction {
    /// Out covers documents from the same year or later, In the same year or
    /// earlier; equal years fall in both.
    pub fn admits(self, primary_year: i32, other_year: i32) -> bool {
        match self {
            Direction::Out => other_year >= primary_year,
            Direction::In => other_year <= primary_year,
            Direction::Both => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeQuery {
    pub doc_id: String,
    pub direction: Direction,
    pub year_from: Option<i32>,
    pub year_to: Option<i32>,
    pub exclude_same_author: bool,
}

impl EdgeQuery {
    pub fn new(doc_id: impl Into<String>, direction: Direction) -> Self {
        Self {
            doc_id: doc_id.into(),
            direction,
            year_from: None,
            year_to: None,
            exclude_same_author: true,
        }
    }

    pub fn years(mut self, from: Option<i32>, to: Option<i32>) -> Self {
        self.year_from = from;
        self.year_to = to;
        self
    }

    pub fn exclude_same_author(mut self, on: bool) -> Self {
        self.exclude_same_author = on;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSummary {
    pub doc_id: String,
    pub year: i32,
    pub author: String,
    pub title: String,
}

impl From<&DocMetadata> for DocSummary {
    fn from(m: &DocMetadata) -> Self {
        Self {
            doc_id: m.doc_id.clone(),
            year: m.year,
            author: m.author.clone(),
            title: m.title.clone(),
        }
    }
}

/// An edge seen from one of its documents (the primary), with the other
/// document's metadata attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedEdge {
    pub edge_id: u32,
    pub primary_id: String,
    pub primary_start: usize,
    pub primary_end: usize,
    pub primary_page: u32,
    pub other: DocSummary,
    pub other_start: usize,
    pub other_end: usize,
    pub align_length: u32,
    pub positives_percent: f64,
    pub year_gap: u32,
}

#[derive(Debug, Clone)]
struct Row {
    edge: Edge,
    t1: u32,
    t2: u32,
}

/// Read-only edge table. Edge ids are 1-based positions in load order.
#[derive(Debug, Clone, Default)]
pub struct EdgeStore {
    rows: Vec<Row>,
    // corpus document index -> sorted row indices touching it
    by_doc: Vec<Vec<u32>>,
}

impl EdgeStore {
    pub fn load(path: impl AsRef<Path>, corpus: &Corpus) -> Result<Self, StoreError> {
        Self::from_edges(edge::read_edges(path)?, corpus)
    }

    /// Builds the store; line numbers in errors assume row `i` came from line `i + 2`.
    pub fn from_edges(edges: Vec<Edge>, corpus: &Corpus) -> Result<Self, StoreError> {
        let mut by_doc = vec![Vec::new(); corpus.len()];
        let mut rows = Vec::with_capacity(edges.len());
        for (i, edge) in edges.into_iter().enumerate() {
            let line = i + 2;
            let resolve = |id: &str, start: usize, end: usize| -> Result<u32, StoreError> {
                let idx = corpus.index_of(id).ok_or_else(|| StoreError::UnknownDoc {
                    id: id.to_string(),
                    line,
                })?;
                let len = corpus.doc(idx).char_len();
                if end > len {
                    return Err(StoreError::SpanOutOfRange {
                        id: id.to_string(),
                        line,
                        start,
                        end,
                        len,
                    });
                }
                Ok(idx as u32)
            };
            let t1 = resolve(&edge.t1_id, edge.t1_start, edge.t1_end)?;
            let t2 = resolve(&edge.t2_id, edge.t2_start, edge.t2_end)?;
            by_doc[t1 as usize].push(i as u32);
            by_doc[t2 as usize].push(i as u32);
            rows.push(Row { edge, t1, t2 });
        }
        Ok(Self { rows, by_doc })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, edge_id: u32) -> Option<&Edge> {
        let i = (edge_id as usize).checked_sub(1)?;
        self.rows.get(i).map(|r| &r.edge)
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, &Edge)> {
        self.rows.iter().enumerate().map(|(i, r)| (i as u32 + 1, &r.edge))
    }

    /// Number of edges touching a document, unfiltered.
    pub fn degree(&self, corpus: &Corpus, doc_id: &str) -> Option<usize> {
        corpus.index_of(doc_id).map(|i| self.by_doc[i].len())
    }

    pub fn query(&self, q: &EdgeQuery, corpus: &Corpus) -> Result<Vec<EnrichedEdge>, StoreError> {
        if let (Some(from), Some(to)) = (q.year_from, q.year_to) {
            if from > to {
                return Err(StoreError::InvalidYears { from, to });
            }
        }
        let p_idx = corpus
            .index_of(&q.doc_id)
            .ok_or_else(|| StoreError::NotFound(q.doc_id.clone()))?;
        let primary = corpus.doc(p_idx);
        let pm = &primary.meta;

        let mut out = Vec::new();
        for &ri in self.by_doc.get(p_idx).map(Vec::as_slice).unwrap_or(&[]) {
            let row = &self.rows[ri as usize];
            let e = &row.edge;
            let (p_start, p_end, o_idx, o_start, o_end) = if row.t1 as usize == p_idx {
                (e.t1_start, e.t1_end, row.t2, e.t2_start, e.t2_end)
            } else {
                (e.t2_start, e.t2_end, row.t1, e.t1_start, e.t1_end)
            };
            let om = &corpus.doc(o_idx as usize).meta;
            if !q.direction.admits(pm.year, om.year)
                || q.year_from.is_some_and(|y| om.year < y)
                || q.year_to.is_some_and(|y| om.year > y)
                || (q.exclude_same_author && pm.same_author(om))
            {
                continue;
            }
            out.push(EnrichedEdge {
                edge_id: ri + 1,
                primary_id: pm.doc_id.clone(),
                primary_start: p_start,
                primary_end: p_end,
                primary_page: primary.page_of(p_start),
                other: DocSummary::from(om),
                other_start: o_start,
                other_end: o_end,
                align_length: e.align_length,
                positives_percent: e.positives_percent,
                year_gap: om.year.abs_diff(pm.year),
            });
        }
        out.sort_by(|a, b| {
            (a.other.year, &a.other.doc_id, a.primary_start, a.edge_id).cmp(&(
                b.other.year,
                &b.other.doc_id,
                b.primary_start,
                b.edge_id,
            ))
        });
        Ok(out)
    }

    /// `(in, out)` sizes with no year filter and same-author exclusion on.
    pub fn counts(&self, doc_id: &str, corpus: &Corpus) -> Result<(usize, usize), StoreError> {
        let p_idx = corpus
            .index_of(doc_id)
            .ok_or_else(|| StoreError::NotFound(doc_id.to_string()))?;
        let pm = &corpus.doc(p_idx).meta;
        let (mut n_in, mut n_out) = (0, 0);
        for &ri in &self.by_doc[p_idx] {
            let row = &self.rows[ri as usize];
            let o = if row.t1 as usize == p_idx { row.t2 } else { row.t1 };
            let om = &corpus.doc(o as usize).meta;
            if pm.same_author(om) {
                continue;
            }
            n_in += usize::from(Direction::In.admits(pm.year, om.year));
            n_out += usize::from(Direction::Out.admits(pm.year, om.year));
        }
        Ok((n_in, n_out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(docs: &[(&str, i32, &str)]) -> Corpus {
        Corpus::from_documents(
            docs.iter()
                .map(|(id, year, author)| {
                    Document::new(
                        DocMetadata {
                            doc_id: id.to_string(),
                            year: *year,
                            author: author.to_string(),
                            title: format!("T {id}"),
                            collection: String::new(),
                        },
                        "x".repeat(5000),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn edge(a: &str, b: &str, s: usize) -> Edge {
        Edge {
            t1_id: a.into(),
            t1_start: s,
            t1_end: s + 100,
            t2_id: b.into(),
            t2_start: s + 7,
            t2_end: s + 107,
            align_length: 100,
            positives_percent: 95.0,
        }
    }

    #[test]
    fn empty_and_single() {
        let c = corpus(&[("a", 1700, ""), ("b", 1700, "")]);
        let s = EdgeStore::from_edges(vec![], &c).unwrap();
        assert_eq!(s.len(), 0);
        assert_eq!(s.counts("a", &c).unwrap(), (0, 0));
        let s = EdgeStore::from_edges(vec![edge("a", "b", 0)], &c).unwrap();
        assert_eq!(s.degree(&c, "a"), Some(1));
        assert_eq!(s.degree(&c, "b"), Some(1));
        assert_eq!(s.get(1).unwrap().t1_id, "a");
        assert!(s.get(0).is_none() && s.get(2).is_none());
    }

    #[test]
    fn unknown_doc_reports_line() {
        let c = corpus(&[("a", 1700, "")]);
        match EdgeStore::from_edges(vec![edge("a", "zz", 0)], &c) {
            Err(StoreError::UnknownDoc { id, line }) => assert_eq!((id.as_str(), line), ("zz", 2)),
            other => panic!("{other:?}"),
        }
        let long = edge("a", "b", 4950);
        let c = corpus(&[("a", 1700, ""), ("b", 1700, "")]);
        assert!(matches!(
            EdgeStore::from_edges(vec![long], &c),
            Err(StoreError::SpanOutOfRange { .. })
        ));
    }

    #[test]
    fn direction_boundaries() {
        let c = corpus(&[("p", 1753, "Hume"), ("old", 1741, "Pope"), ("same", 1753, "Smith"), ("mine", 1760, "Hume")]);
        let s = EdgeStore::from_edges(
            vec![edge("old", "p", 0), edge("p", "same", 200), edge("mine", "p", 400)],
            &c,
        )
        .unwrap();
        let ids = |d: Direction| -> Vec<String> {
            s.query(&EdgeQuery::new("p", d), &c)
                .unwrap()
                .into_iter()
                .map(|e| e.other.doc_id)
                .collect()
        };
        assert_eq!(ids(Direction::In), vec!["old", "same"]);
        assert_eq!(ids(Direction::Out), vec!["same"]);
        assert_eq!(s.counts("p", &c).unwrap(), (2, 1));
        let with_mine = s
            .query(&EdgeQuery::new("p", Direction::Out).exclude_same_author(false), &c)
            .unwrap();
        assert_eq!(with_mine.len(), 2);
        assert_eq!(with_mine[1].year_gap, 7);
    }

    #[test]
    fn reorients_to_primary() {
        let c = corpus(&[("a", 1700, ""), ("b", 1710, "")]);
        let s = EdgeStore::from_edges(vec![edge("a", "b", 10)], &c).unwrap();
        let r = s.query(&EdgeQuery::new("b", Direction::In), &c).unwrap();
        assert_eq!(r[0].primary_id, "b");
        assert_eq!((r[0].primary_start, r[0].other_start), (17, 10));
        assert_eq!(r[0].primary_page, 1);
    }

    #[test]
    fn year_filter_inclusive() {
        let c = corpus(&[("p", 1700, ""), ("a", 1741, ""), ("b", 1800, ""), ("c", 1801, "")]);
        let s = EdgeStore::from_edges(vec![edge("a", "p", 0), edge("b", "p", 0), edge("c", "p", 0)], &c).unwrap();
        let r = s
            .query(&EdgeQuery::new("p", Direction::Out).years(Some(1741), Some(1800)), &c)
            .unwrap();
        assert_eq!(r.iter().map(|e| e.other.year).collect::<Vec<_>>(), vec![1741, 1800]);
        assert!(matches!(
            s.query(&EdgeQuery::new("p", Direction::Out).years(Some(1800), Some(1741)), &c),
            Err(StoreError::InvalidYears { .. })
        ));
        assert!(matches!(
            s.query(&EdgeQuery::new("nope", Direction::Out), &c),
            Err(StoreError::NotFound(_))
        ));
    }
}
