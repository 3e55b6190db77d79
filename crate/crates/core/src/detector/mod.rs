//! Text-reuse detection: normalized k-gram seeding followed by banded gapped
//! X-drop extension, emitting edges in raw character offsets.

mod extend;
mod kmer;
mod normalize;

use std::io::{self, Write};

use rayon::prelude::*;

pub use extend::{extend_seed, extend_unfiltered, AlignParams, RawAlignment, SeedHit};
pub use kmer::{gram_hashes, KmerIndex};
pub use normalize::{normalize, NormalizedText};

use crate::corpus::{Corpus, Document};
use crate::edge::{sort_edges, write_edges, Edge};

/// All exact k-gram hits of `query` in the indexed target, sorted by
/// diagonal (`t_pos - q_pos`) then `q_pos`.
///
/// Grams that occur more than `max_occurrences` times in the target are skipped.
pub fn find_seeds(query: &NormalizedText, target_index: &KmerIndex<'_>, max_occurrences: usize) -> Vec<SeedHit> {
    let k = target_index.k();
    let q = query.chars();
    let t = target_index.text();
    let mut seeds = Vec::new();
    for (q_pos, h) in gram_hashes(q, k).into_iter().enumerate() {
        let bucket = target_index.bucket(h);
        if bucket.is_empty() || bucket.len() > max_occurrences {
            continue;
        }
        let gram = &q[q_pos..q_pos + k];
        if gram.iter().all(|&c| c == ' ') {
            continue;
        }
        let mut matched = 0usize;
        let start = seeds.len();
        for &t_pos in bucket {
            let t_pos = t_pos as usize;
            if &t[t_pos..t_pos + k] == gram {
                matched += 1;
                seeds.push(SeedHit { q_pos, t_pos, k });
            }
        }
        if matched > max_occurrences {
            seeds.truncate(start);
        }
    }
    seeds.sort_unstable_by_key(|s| (s.diagonal(), s.q_pos, s.t_pos));
    seeds.dedup();
    seeds
}

/// Greedy non-redundant extension of sorted seeds.
///
/// Seeds inside an accepted alignment's span rectangle are skipped, as are
/// seeds on the same diagonal inside the query range of an earlier rejected
/// extension from that diagonal.
pub fn align_pair(query: &NormalizedText, target: &NormalizedText, params: &AlignParams) -> Vec<RawAlignment> {
    if query.len() < params.k || target.len() < params.k {
        return Vec::new();
    }
    let index = KmerIndex::build(target, params.k);
    align_with_index(query, &index, target, params)
}

fn align_with_index(
    query: &NormalizedText,
    index: &KmerIndex<'_>,
    target: &NormalizedText,
    params: &AlignParams,
) -> Vec<RawAlignment> {
    let seeds = find_seeds(query, index, params.max_seed_occurrences);
    let mut accepted: Vec<RawAlignment> = Vec::new();
    let mut diag = i64::MIN;
    let mut diag_covered_to = 0usize;
    for seed in seeds {
        if seed.diagonal() != diag {
            diag = seed.diagonal();
            diag_covered_to = 0;
        }
        if seed.q_pos < diag_covered_to || accepted.iter().any(|a| a.covers(&seed)) {
            continue;
        }
        let aln = extend_unfiltered(query, target, seed, params);
        diag_covered_to = diag_covered_to.max(aln.q_end);
        if aln.passes(params) {
            accepted.push(aln);
        }
    }
    dedup_alignments(accepted, params.dedup_overlap)
}

fn overlap_frac(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0));
    let shorter = (a.1 - a.0).min(b.1 - b.0);
    if shorter == 0 {
        0.0
    } else {
        inter as f64 / shorter as f64
    }
}

fn dedup_alignments(mut alns: Vec<RawAlignment>, min_overlap: f64) -> Vec<RawAlignment> {
    alns.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then(a.q_start.cmp(&b.q_start))
            .then(a.t_start.cmp(&b.t_start))
    });
    let mut kept: Vec<RawAlignment> = Vec::with_capacity(alns.len());
    for a in alns {
        let dup = kept.iter().any(|k| {
            overlap_frac((a.q_start, a.q_end), (k.q_start, k.q_end)) >= min_overlap
                && overlap_frac((a.t_start, a.t_end), (k.t_start, k.t_end)) >= min_overlap
        });
        if !dup {
            kept.push(a);
        }
    }
    kept.sort_by_key(|a| (a.q_start, a.t_start));
    kept
}

fn to_edge(aln: &RawAlignment, q_id: &str, q: &NormalizedText, t_id: &str, t: &NormalizedText) -> Edge {
    let (t1_start, t1_end) = q.raw_span(aln.q_start, aln.q_end);
    let (t2_start, t2_end) = t.raw_span(aln.t_start, aln.t_end);
    Edge {
        t1_id: q_id.to_string(),
        t1_start,
        t1_end,
        t2_id: t_id.to_string(),
        t2_start,
        t2_end,
        align_length: aln.columns,
        positives_percent: aln.positives_percent(),
    }
    .canonical()
}

/// Detects reuse between two documents. The result is in canonical
/// orientation and independent of argument order.
pub fn detect_pair(a: &Document, b: &Document, params: &AlignParams) -> Vec<Edge> {
    assert_ne!(a.id(), b.id(), "detect_pair needs two distinct documents");
    let (a, b) = if a.id() < b.id() { (a, b) } else { (b, a) };
    let (na, nb) = (normalize(a.raw_text()), normalize(b.raw_text()));
    let mut edges: Vec<Edge> = align_pair(&na, &nb, params)
        .iter()
        .map(|aln| to_edge(aln, a.id(), &na, b.id(), &nb))
        .collect();
    sort_edges(&mut edges);
    edges
}

/// All-pairs detection over a corpus. Output is sorted and identical for any
/// thread count.
pub fn detect_corpus(corpus: &Corpus, params: &AlignParams) -> Vec<Edge> {
    let mut order: Vec<&Document> = corpus.iter().collect();
    order.sort_by(|x, y| x.id().cmp(y.id()));
    let normalized: Vec<NormalizedText> = order.par_iter().map(|d| normalize(d.raw_text())).collect();
    let indexes: Vec<Option<KmerIndex<'_>>> = normalized
        .par_iter()
        .map(|n| (n.len() >= params.k).then(|| KmerIndex::build(n, params.k)))
        .collect();

    let n = order.len();
    let order = &order;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut edges: Vec<Edge> = pairs
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let (q, t) = (&normalized[i], &normalized[j]);
            let found = match &indexes[j] {
                Some(index) if q.len() >= params.k => align_with_index(q, index, t, params),
                _ => Vec::new(),
            };
            found
                .into_iter()
                .map(move |aln| to_edge(&aln, order[i].id(), q, order[j].id(), t))
        })
        .collect();
    sort_edges(&mut edges);
    edges
}

/// Runs [`detect_corpus`] and writes the edge file. Returns the edge count.
pub fn detect_corpus_to<W: Write>(corpus: &Corpus, params: &AlignParams, out: W) -> io::Result<usize> {
    let edges = detect_corpus(corpus, params);
    write_edges(out, &edges)?;
    Ok(edges.len())
}
