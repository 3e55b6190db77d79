use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::truth::{GroundTruth, Placement};
use super::GenError;
use crate::edge::Edge;

pub const DEFAULT_IOU: f64 = 0.5;

/// Intersection over union of two half-open spans.
pub fn span_iou(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0));
    let union = a.1.max(b.1) - a.0.min(b.0);
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Whether `edge` links the two placements with per-side IoU at least `iou`.
pub fn edge_matches(edge: &Edge, a: &Placement, b: &Placement, iou: f64) -> bool {
    let side = |id: &str, s: (usize, usize), p: &Placement| id == p.doc_id && span_iou(s, (p.start, p.end)) >= iou;
    let s1 = (edge.t1_start, edge.t1_end);
    let s2 = (edge.t2_start, edge.t2_end);
    (side(&edge.t1_id, s1, a) && side(&edge.t2_id, s2, b)) || (side(&edge.t1_id, s1, b) && side(&edge.t2_id, s2, a))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantHit {
    pub plant_id: u32,
    pub pairs: usize,
    pub recalled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou_threshold: f64,
    pub total_pairs: usize,
    pub recalled_pairs: usize,
    pub total_edges: usize,
    pub true_positive_edges: usize,
    pub recall: f64,
    /// 1.0 when there are no edges; see `zero_edges`.
    pub precision: f64,
    pub zero_edges: bool,
    pub per_plant: Vec<PlantHit>,
}

impl EvalReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("plant_id\tpairs\trecalled\n");
        for p in &self.per_plant {
            let _ = writeln!(out, "{}\t{}\t{}", p.plant_id, p.pairs, p.recalled);
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "recall     {:.4}  ({}/{} pairs)\nprecision  {:.4}  ({}/{} edges)\niou        {}\n",
            self.recall,
            self.recalled_pairs,
            self.total_pairs,
            self.precision,
            self.true_positive_edges,
            self.total_edges,
            self.iou_threshold
        );
        if self.zero_edges {
            s.push_str("no edges: precision reported as 1.0\n");
        }
        s
    }
}

fn pair_key<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Scores detector output against planted passages.
///
/// A truth pair (two placements of one plant) is recalled when some edge
/// matches it; several edges matching one pair count once. Every edge that
/// matches at least one truth pair is a true positive.
pub fn evaluate(edges: &[Edge], truth: &GroundTruth, iou: f64) -> Result<EvalReport, GenError> {
    if !truth.documents.is_empty() {
        let lens: HashMap<&str, usize> = truth.documents.iter().map(|(id, n)| (id.as_str(), *n)).collect();
        for e in edges {
            for (id, end) in [(&e.t1_id, e.t1_end), (&e.t2_id, e.t2_end)] {
                match lens.get(id.as_str()) {
                    None => return Err(GenError::UnknownDocument(id.clone())),
                    Some(&len) if end > len => {
                        return Err(GenError::InvalidSpec(format!("edge span end {end} beyond `{id}` length {len}")))
                    }
                    _ => {}
                }
            }
        }
    }

    let mut by_pair: HashMap<(&str, &str), Vec<usize>> = HashMap::new();
    for (i, e) in edges.iter().enumerate() {
        by_pair.entry(pair_key(&e.t1_id, &e.t2_id)).or_default().push(i);
    }
    let pairs: Vec<(u32, &Placement, &Placement)> = truth.pairs().collect();
    let matched: Vec<Vec<usize>> = pairs
        .par_iter()
        .map(|(_, a, b)| {
            by_pair
                .get(&pair_key(&a.doc_id, &b.doc_id))
                .map(|cands| {
                    cands
                        .iter()
                        .copied()
                        .filter(|&i| edge_matches(&edges[i], a, b, iou))
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();

    let mut tp: HashSet<usize> = HashSet::new();
    let mut per_plant: Vec<PlantHit> = truth
        .plants
        .iter()
        .map(|p| PlantHit {
            plant_id: p.plant_id,
            pairs: 0,
            recalled: 0,
        })
        .collect();
    let slot: HashMap<u32, usize> = truth.plants.iter().enumerate().map(|(i, p)| (p.plant_id, i)).collect();
    let mut recalled_pairs = 0;
    for ((plant_id, _, _), hits) in pairs.iter().zip(&matched) {
        let ph = &mut per_plant[slot[plant_id]];
        ph.pairs += 1;
        if !hits.is_empty() {
            ph.recalled += 1;
            recalled_pairs += 1;
        }
        tp.extend(hits);
    }

    let total_pairs = pairs.len();
    let zero_edges = edges.is_empty();
    Ok(EvalReport {
        iou_threshold: iou,
        total_pairs,
        recalled_pairs,
        total_edges: edges.len(),
        true_positive_edges: tp.len(),
        recall: if total_pairs == 0 {
            1.0
        } else {
            recalled_pairs as f64 / total_pairs as f64
        },
        precision: if zero_edges {
            1.0
        } else {
            tp.len() as f64 / edges.len() as f64
        },
        zero_edges,
        per_plant,
    })
}
