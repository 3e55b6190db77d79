//! Post-processing of raw edges.
//!
//! Fragments of one passage split apart by OCR noise are merged back together
//! ([`defragment`]); edge endpoints are grouped into passages
//! ([`build_passages`]); and each connected group of passages is reduced to a
//! star rooted at its earliest instance ([`first_source`]).

use std::collections::BTreeMap;
use std::io::{self, Write};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edge::Edge;
use crate::tsv::{self, TsvError};

pub const PASSAGE_COLUMNS: [&str; 4] = ["passage_id", "doc_id", "start", "end"];
pub const CLUSTER_COLUMNS: [&str; 3] = ["cluster_id", "source_passage_id", "sink_passage_id"];

#[derive(Debug, Error)]
pub enum ConsolidateError {
    #[error("no year known for document `{0}`")]
    UnknownDocument(String),
    #[error(transparent)]
    Tsv(#[from] TsvError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefragParams {
    /// Largest gap between neighbouring fragments, per side.
    pub gap_limit: i64,
    /// Largest tolerated overlap between neighbouring fragments, per side.
    pub overlap_tolerance: i64,
    /// Largest difference of diagonals (`t2_start - t1_start`).
    pub diag_limit: i64,
}

impl Default for DefragParams {
    fn default() -> Self {
        Self {
            gap_limit: 180,
            overlap_tolerance: 50,
            diag_limit: 80,
        }
    }
}

fn span_gap(a: (usize, usize), b: (usize, usize)) -> i64 {
    a.0.max(b.0) as i64 - a.1.min(b.1) as i64
}

fn diagonal(e: &Edge) -> i64 {
    e.t2_start as i64 - e.t1_start as i64
}

/// Whether two edges of the same document pair are fragments of one passage.
pub fn mergeable(a: &Edge, b: &Edge, p: &DefragParams) -> bool {
    if a.t1_id != b.t1_id || a.t2_id != b.t2_id {
        return false;
    }
    let in_range = |g: i64| (-p.overlap_tolerance..=p.gap_limit).contains(&g);
    in_range(span_gap((a.t1_start, a.t1_end), (b.t1_start, b.t1_end)))
        && in_range(span_gap((a.t2_start, a.t2_end), (b.t2_start, b.t2_end)))
        && (diagonal(a) - diagonal(b)).abs() <= p.diag_limit
}

/// Hull of both spans; lengths add up and identity is the length-weighted mean.
pub fn merge_pair(a: &Edge, b: &Edge) -> Edge {
    let total = a.align_length + b.align_length;
    let positives = if total == 0 {
        (a.positives_percent + b.positives_percent) / 2.0
    } else {
        (a.align_length as f64 * a.positives_percent + b.align_length as f64 * b.positives_percent) / total as f64
    };
    Edge {
        t1_id: a.t1_id.clone(),
        t1_start: a.t1_start.min(b.t1_start),
        t1_end: a.t1_end.max(b.t1_end),
        t2_id: a.t2_id.clone(),
        t2_start: a.t2_start.min(b.t2_start),
        t2_end: a.t2_end.max(b.t2_end),
        align_length: total,
        positives_percent: positives,
    }
}

fn defragment_group(mut group: Vec<Edge>, p: &DefragParams) -> Vec<Edge> {
    loop {
        group.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut changed = false;
        let mut i = 0;
        while i < group.len() {
            let mut j = i + 1;
            while j < group.len() {
                if mergeable(&group[i], &group[j], p) {
                    let other = group.remove(j);
                    group[i] = merge_pair(&group[i], &other);
                    changed = true;
                    // the hull grew; earlier candidates may now qualify
                    j = i + 1;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !changed {
            return group;
        }
    }
}

/// Merges fragmented edges per document pair until no pair qualifies.
///
/// Input edges should be canonical; edges of different document pairs are
/// never merged. Output is sorted.
pub fn defragment(edges: &[Edge], params: &DefragParams) -> Vec<Edge> {
    let mut groups: BTreeMap<(&str, &str), Vec<Edge>> = BTreeMap::new();
    for e in edges {
        groups.entry((&e.t1_id, &e.t2_id)).or_default().push(e.clone());
    }
    let mut out: Vec<Edge> = groups
        .into_values()
        .flat_map(|g| defragment_group(g, params))
        .collect();
    crate::edge::sort_edges(&mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub passage_id: u32,
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    /// 1-based positions of the contributing edges in the input list.
    pub member_edge_ids: Vec<u32>,
}

/// Passages plus the pairs of passages joined by at least one edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassageGraph {
    pub passages: Vec<Passage>,
    /// Sorted, deduplicated `(lower id, higher id)` pairs.
    pub links: Vec<(u32, u32)>,
}

impl PassageGraph {
    pub fn passage(&self, passage_id: u32) -> &Passage {
        &self.passages[passage_id as usize - 1]
    }
}

fn overlap_of_shorter(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0));
    let shorter = (a.1 - a.0).min(b.1 - b.0);
    if shorter == 0 {
        0.0
    } else {
        inter as f64 / shorter as f64
    }
}

/// Groups edge endpoints into passages.
///
/// Endpoints in one document whose spans overlap by at least `overlap_frac`
/// of the shorter span join the same passage, transitively. Passage ids are
/// assigned in `(doc_id, start, end)` order starting at 1.
pub fn build_passages(edges: &[Edge], overlap_frac: f64) -> PassageGraph {
    // side s belongs to edge s / 2; even = t1, odd = t2
    let side = |s: usize| {
        let e = &edges[s / 2];
        if s.is_multiple_of(2) {
            (e.t1_id.as_str(), e.t1_start, e.t1_end)
        } else {
            (e.t2_id.as_str(), e.t2_start, e.t2_end)
        }
    };
    let n = edges.len() * 2;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&s| side(s));

    let mut uf = UnionFind::<usize>::new(n);
    let mut active: Vec<usize> = Vec::new();
    let mut current_doc = "";
    for &s in &order {
        let (doc, start, end) = side(s);
        if doc != current_doc {
            active.clear();
            current_doc = doc;
        }
        active.retain(|&o| side(o).2 > start);
        for &o in &active {
            let (_, os, oe) = side(o);
            if overlap_of_shorter((os, oe), (start, end)) >= overlap_frac {
                uf.union(o, s);
            }
        }
        active.push(s);
    }

    // doc_id, start, end, member edge ids
    type Hull = (String, usize, usize, Vec<u32>);
    let mut hulls: BTreeMap<usize, Hull> = BTreeMap::new();
    for s in 0..n {
        let (doc, start, end) = side(s);
        let h = hulls
            .entry(uf.find(s))
            .or_insert_with(|| (doc.to_string(), start, end, Vec::new()));
        h.1 = h.1.min(start);
        h.2 = h.2.max(end);
        h.3.push((s / 2 + 1) as u32);
    }
    let mut roots: Vec<(usize, Hull)> = hulls.into_iter().collect();
    roots.sort_by(|a, b| (&a.1 .0, a.1 .1, a.1 .2).cmp(&(&b.1 .0, b.1 .1, b.1 .2)));

    let mut passage_of_root = vec![0u32; n];
    let passages: Vec<Passage> = roots
        .into_iter()
        .enumerate()
        .map(|(i, (root, (doc_id, start, end, mut members)))| {
            passage_of_root[root] = i as u32 + 1;
            members.sort_unstable();
            members.dedup();
            Passage {
                passage_id: i as u32 + 1,
                doc_id,
                start,
                end,
                member_edge_ids: members,
            }
        })
        .collect();

    let mut links: Vec<(u32, u32)> = (0..edges.len())
        .map(|e| {
            let a = passage_of_root[uf.find(2 * e)];
            let b = passage_of_root[uf.find(2 * e + 1)];
            (a.min(b), a.max(b))
        })
        .collect();
    links.sort_unstable();
    links.dedup();
    PassageGraph { passages, links }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: u32,
    pub source: u32,
    pub sinks: Vec<u32>,
}

impl Cluster {
    pub fn star_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.sinks.iter().map(move |&s| (self.source, s))
    }
}

/// Collapses each connected group of linked passages into a star rooted at
/// the passage from the earliest year (ties: smaller doc_id, then smaller start).
///
/// Groups of a single passage are dropped. Clusters are numbered from 1 in
/// order of their source passage id.
pub fn first_source<F>(graph: &PassageGraph, year_of: F) -> Result<Vec<Cluster>, ConsolidateError>
where
    F: Fn(&str) -> Option<i32>,
{
    let n = graph.passages.len();
    let mut uf = UnionFind::<usize>::new(n);
    for &(a, b) in &graph.links {
        uf.union(a as usize - 1, b as usize - 1);
    }
    let mut years = Vec::with_capacity(n);
    for p in &graph.passages {
        years.push(year_of(&p.doc_id).ok_or_else(|| ConsolidateError::UnknownDocument(p.doc_id.clone()))?);
    }

    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        components.entry(uf.find(i)).or_default().push(i);
    }
    let mut clusters: Vec<Cluster> = components
        .into_values()
        .filter(|members| members.len() > 1)
        .map(|members| {
            let key = |&i: &usize| {
                let p = &graph.passages[i];
                (years[i], p.doc_id.as_str(), p.start, p.passage_id)
            };
            let source = members.iter().copied().min_by_key(key).expect("non-empty component");
            Cluster {
                cluster_id: 0,
                source: graph.passages[source].passage_id,
                sinks: members
                    .iter()
                    .filter(|&&m| m != source)
                    .map(|&m| graph.passages[m].passage_id)
                    .collect(),
            }
        })
        .collect();
    clusters.sort_by_key(|c| c.source);
    for (i, c) in clusters.iter_mut().enumerate() {
        c.cluster_id = i as u32 + 1;
    }
    Ok(clusters)
}

pub fn write_passages<W: Write>(mut out: W, passages: &[Passage]) -> io::Result<()> {
    writeln!(out, "{}", PASSAGE_COLUMNS.join("\t"))?;
    for p in passages {
        writeln!(out, "{}\t{}\t{}\t{}", p.passage_id, p.doc_id, p.start, p.end)?;
    }
    Ok(())
}

pub fn write_clusters<W: Write>(mut out: W, clusters: &[Cluster]) -> io::Result<()> {
    writeln!(out, "{}", CLUSTER_COLUMNS.join("\t"))?;
    for c in clusters {
        for (source, sink) in c.star_edges() {
            writeln!(out, "{}\t{}\t{}", c.cluster_id, source, sink)?;
        }
    }
    Ok(())
}

pub fn parse_clusters(text: &str) -> Result<Vec<Cluster>, ConsolidateError> {
    let mut by_id: BTreeMap<u32, Cluster> = BTreeMap::new();
    tsv::for_each_row(text, &CLUSTER_COLUMNS, |row| {
        let id: u32 = row.parse(0)?;
        let source: u32 = row.parse(1)?;
        let sink: u32 = row.parse(2)?;
        let c = by_id.entry(id).or_insert_with(|| Cluster {
            cluster_id: id,
            source,
            sinks: Vec::new(),
        });
        if c.source != source {
            return Err(row.error(1, format!("cluster {id} has two sources")));
        }
        c.sinks.push(sink);
        Ok(())
    })?;
    Ok(by_id.into_values().collect())
}

pub fn parse_passages(text: &str) -> Result<Vec<Passage>, ConsolidateError> {
    let mut out = Vec::new();
    tsv::for_each_row(text, &PASSAGE_COLUMNS, |row| {
        out.push(Passage {
            passage_id: row.parse(0)?,
            doc_id: row.str(1).to_string(),
            start: row.parse(2)?,
            end: row.parse(3)?,
            member_edge_ids: Vec::new(),
        });
        Ok(())
    })?;
    Ok(out)
}
