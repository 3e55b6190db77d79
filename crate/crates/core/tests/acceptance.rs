//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use textreuse::api::{AppState, ServerConfig};
use textreuse::consolidate::{self, DefragParams};
use textreuse::detector::{self, normalize, RawAlignment};
use textreuse::edgestore::{DocSummary, Direction, EdgeQuery, EdgeStore, EnrichedEdge};
use textreuse::metasearch::{self, resort, SearchResult, SortColumn, SortOrder};
use textreuse::offsetmap::{Insertion, OffsetShiftTable, PageBox, PageMap, PageToken};
use textreuse::synthbench::{self, span_iou, BackgroundModel, CliqueSpec, GenSpec, NoiseChannel};
use textreuse::{AlignParams, Corpus, Document, Edge};

use common::{doc, meta, spawn};

type Check = fn() -> Result<String>;

fn main() {
    let checks: [(&str, Check); 9] = [
        ("detection recall", detection_recall),
        ("noise resilience curve", noise_curve),
        ("oracle equivalence", oracle_equivalence),
        ("fragmentation repair", fragmentation_repair),
        ("clique to star", clique_to_star),
        ("offset round trip", offset_round_trip),
        ("query correctness", query_correctness),
        ("direction boundary", direction_boundary),
        ("search", search),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(anyhow::anyhow!("panicked: {}", panic_message(&p))));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}  ({secs:.1}s)  {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {name}  ({secs:.1}s)  {e:#}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn detect_single_core(corpus: &Corpus) -> Vec<Edge> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| detector::detect_corpus(corpus, &AlignParams::default()))
}

fn detection_recall() -> Result<String> {
    let generated = synthbench::generate(&GenSpec::regression())?;
    let started = Instant::now();
    let edges = detect_single_core(&generated.corpus);
    let elapsed = started.elapsed();
    let report = synthbench::evaluate(&edges, &generated.truth, synthbench::DEFAULT_IOU)?;
    let detail = format!(
        "recall {:.4} precision {:.4} ({} edges, {} pairs), detect {:.1}s on 1 thread",
        report.recall,
        report.precision,
        report.total_edges,
        report.total_pairs,
        elapsed.as_secs_f64()
    );
    ensure!(report.recall >= 0.95 && report.precision >= 0.95, "{detail}");
    ensure!(elapsed < Duration::from_secs(120), "{detail}");
    Ok(detail)
}

const NOISE_RATES: [f64; 4] = [0.0, 0.05, 0.10, 0.15];
const NOISE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn noise_curve() -> Result<String> {
    let mut averages = Vec::new();
    for rate in NOISE_RATES {
        let mut sum = 0.0;
        for seed in NOISE_SEEDS {
            let spec = GenSpec {
                num_docs: 40,
                num_plants: 80,
                noise_rate: rate,
                seed,
                ..GenSpec::regression()
            };
            let generated = synthbench::generate(&spec)?;
            let edges = detector::detect_corpus(&generated.corpus, &AlignParams::default());
            sum += synthbench::evaluate(&edges, &generated.truth, synthbench::DEFAULT_IOU)?.recall;
        }
        averages.push(sum / NOISE_SEEDS.len() as f64);
    }
    let detail = NOISE_RATES
        .iter()
        .zip(&averages)
        .map(|(r, a)| format!("{:.0}%: {a:.4}", r * 100.0))
        .collect::<Vec<_>>()
        .join(", ");
    ensure!(averages[2] >= 0.85, "recall at 10% below 0.85: {detail}");
    ensure!(averages.windows(2).all(|w| w[1] <= w[0]), "recall increases with noise: {detail}");
    Ok(format!("mean recall {detail}"))
}

struct OracleAlignment {
    q: (usize, usize),
    t: (usize, usize),
    columns: u32,
    identical: u32,
}

impl OracleAlignment {
    fn passes(&self, p: &AlignParams) -> bool {
        self.columns >= p.min_align_length && 100.0 * self.identical as f64 / self.columns as f64 >= p.min_positives
    }
}

/// Exhaustive Smith-Waterman with linear gaps, same scores as the detector.
fn smith_waterman(a: &[char], b: &[char], p: &AlignParams) -> Option<OracleAlignment> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut h = vec![0i32; (n + 1) * w];
    let mut best = (0, 0, 0);
    for i in 1..=n {
        for j in 1..=m {
            let s = if a[i - 1] == b[j - 1] { p.match_score } else { p.mismatch_score };
            let v = (h[(i - 1) * w + j - 1] + s)
                .max(h[(i - 1) * w + j] + p.gap_score)
                .max(h[i * w + j - 1] + p.gap_score)
                .max(0);
            h[i * w + j] = v;
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    if best.0 == 0 {
        return None;
    }
    let (_, end_i, end_j) = best;
    let (mut i, mut j) = (end_i, end_j);
    let (mut columns, mut identical) = (0u32, 0u32);
    while i > 0 && j > 0 && h[i * w + j] > 0 {
        let v = h[i * w + j];
        let same = a[i - 1] == b[j - 1];
        let s = if same { p.match_score } else { p.mismatch_score };
        columns += 1;
        if v == h[(i - 1) * w + j - 1] + s {
            identical += u32::from(same);
            i -= 1;
            j -= 1;
        } else if v == h[(i - 1) * w + j] + p.gap_score {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    Some(OracleAlignment {
        q: (i, end_i),
        t: (j, end_j),
        columns,
        identical,
    })
}

fn both_sides_match(d: &RawAlignment, o: &OracleAlignment) -> bool {
    span_iou((d.q_start, d.q_end), o.q) >= 0.8 && span_iou((d.t_start, d.t_end), o.t) >= 0.8
}

fn truncate_normalized(raw: &str, max: usize) -> detector::NormalizedText {
    let text: String = normalize(raw).as_string().chars().take(max).collect();
    normalize(&text)
}

fn oracle_equivalence() -> Result<String> {
    let params = AlignParams::default();
    let model = BackgroundModel::builtin();
    let cases: Vec<(usize, usize, usize)> = (0..500u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
            let (q_raw, t_raw) = if rng.gen_bool(0.85) {
                let len = rng.gen_range(110..=260);
                let shared = model.sample(len, &mut rng);
                let rate = rng.gen_range(0.0..0.08);
                let copy = NoiseChannel::new(rate).corrupt(&shared, &mut rng);
                let flank = |rng: &mut ChaCha8Rng, room: usize| model.sample(rng.gen_range(0..=room), rng);
                let room = 300usize.saturating_sub(len + 10) / 2;
                let q = format!("{} {} {}", flank(&mut rng, room), shared, flank(&mut rng, room));
                let t = format!("{} {} {}", flank(&mut rng, room), copy, flank(&mut rng, room));
                (q, t)
            } else {
                (model.sample(300, &mut rng), model.sample(300, &mut rng))
            };
            let q = truncate_normalized(&q_raw, 300);
            let t = truncate_normalized(&t_raw, 300);
            let found = detector::align_pair(&q, &t, &params);
            let oracle = smith_waterman(q.chars(), t.chars(), &params).filter(|o| o.passes(&params));
            let mut agree = 0;
            let mut total = found.len();
            if let Some(o) = &oracle {
                total += 1;
                agree += usize::from(found.iter().any(|d| both_sides_match(d, o)));
                agree += found.iter().filter(|d| both_sides_match(d, o)).count();
            }
            (agree, total, usize::from(oracle.is_some()))
        })
        .collect();
    let agree: usize = cases.iter().map(|c| c.0).sum();
    let total: usize = cases.iter().map(|c| c.1).sum();
    let oracle_hits: usize = cases.iter().map(|c| c.2).sum();
    ensure!(oracle_hits >= 300, "only {oracle_hits} above-threshold oracle alignments");
    let rate = agree as f64 / total as f64;
    let detail = format!("{agree}/{total} alignments agree ({:.2}%), {oracle_hits} oracle alignments", rate * 100.0);
    ensure!(rate >= 0.98, "{detail}");
    Ok(detail)
}

fn coverage(span: (usize, usize), truth: (usize, usize)) -> f64 {
    let inter = span.1.min(truth.1).saturating_sub(span.0.max(truth.0));
    inter as f64 / (truth.1 - truth.0) as f64
}

fn fragmentation_repair() -> Result<String> {
    let model = BackgroundModel::builtin();
    let params = AlignParams::default();
    let results: Vec<(usize, bool, String)> = (0..50u64)
        .into_par_iter()
        .map(|case| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + case);
            let len = rng.gen_range(400..=1000);
            let passage: Vec<char> = model.sample(len, &mut rng).chars().collect();
            let cut = len / 2 - 30;
            let mut broken: String = passage[..cut].iter().collect();
            broken.push_str(&NoiseChannel::burst(60, &mut rng));
            broken.extend(&passage[cut + 60..]);
            let noise = NoiseChannel::new(0.02);
            let copy_a = noise.corrupt(&passage.iter().collect::<String>(), &mut rng);
            let copy_b = noise.corrupt(&broken, &mut rng);

            let build = |id: &str, body: &str, rng: &mut ChaCha8Rng| {
                let before = model.sample(rng.gen_range(800..2000), rng);
                let after = model.sample(rng.gen_range(800..2000), rng);
                let start = before.chars().count() + 1;
                let end = start + body.chars().count();
                let text = format!("{before} {body} {after}");
                (Document::new(meta(id, 1700, id, id), text).unwrap(), (start, end))
            };
            let (a, truth_a) = build(&format!("a{case:02}"), &copy_a, &mut rng);
            let (b, truth_b) = build(&format!("b{case:02}"), &copy_b, &mut rng);

            let edges = detector::detect_pair(&a, &b, &params);
            let merged = consolidate::defragment(&edges, &DefragParams::default());
            let repaired = match merged.as_slice() {
                [e] => {
                    coverage((e.t1_start, e.t1_end), truth_a) >= 0.95 && coverage((e.t2_start, e.t2_end), truth_b) >= 0.95
                }
                _ => false,
            };
            let note = format!("case {case}: {} fragments -> {} edges", edges.len(), merged.len());
            (edges.len(), repaired, note)
        })
        .collect();

    let fragmented: Vec<&(usize, bool, String)> = results.iter().filter(|r| r.0 >= 2).collect();
    let broken: Vec<&str> = fragmented.iter().filter(|r| !r.1).map(|r| r.2.as_str()).collect();
    let detail = format!(
        "{}/50 fragmented, {}/{} restored to one edge covering >= 95%",
        fragmented.len(),
        fragmented.len() - broken.len(),
        fragmented.len()
    );
    ensure!(fragmented.len() >= 40, "{detail}");
    ensure!(broken.is_empty(), "{detail}; not repaired: {}", broken.join("; "));
    Ok(detail)
}

fn star_for_clique(n: usize) -> Result<(usize, usize, usize, bool)> {
    let spec = GenSpec {
        num_docs: n,
        doc_length_range: (3000, 6000),
        num_plants: 0,
        plant_length_range: (200, 400),
        noise_rate: 0.03,
        clique_specs: vec![CliqueSpec {
            size: n,
            passage_length: 800,
        }],
        seed: 300 + n as u64,
        source_text: None,
        copies_per_plant: 2,
    };
    let generated = synthbench::generate(&spec)?;
    let corpus = &generated.corpus;
    let edges = detector::detect_corpus(corpus, &AlignParams::default());
    let merged = consolidate::defragment(&edges, &DefragParams::default());
    let graph = consolidate::build_passages(&merged, 0.5);
    let clusters = consolidate::first_source(&graph, |id| corpus.get(id).ok().map(|d| d.meta.year))?;
    let star_edges: usize = clusters.iter().map(|c| c.sinks.len()).sum();
    let earliest = corpus.iter().map(|d| d.meta.year).min().context("empty corpus")?;
    let source_ok = clusters.len() == 1 && {
        let source = graph.passage(clusters[0].source);
        corpus.get(&source.doc_id)?.meta.year == earliest
    };
    ensure!(
        merged.len() == graph.links.len(),
        "n={n}: {} edges but {} linked passage pairs",
        merged.len(),
        graph.links.len()
    );
    Ok((graph.links.len(), graph.passages.len(), star_edges, source_ok))
}

fn clique_to_star() -> Result<String> {
    let (pairs, passages, stars, source_ok) = star_for_clique(6)?;
    ensure!(
        (pairs, passages, stars, source_ok) == (15, 6, 5, true),
        "n=6: {pairs} linked pairs, {passages} passages, {stars} star edges, earliest source {source_ok}"
    );
    let mut bad = Vec::new();
    for n in 2..=10 {
        let (pairs, passages, stars, source_ok) = star_for_clique(n)?;
        if (pairs, passages, stars, source_ok) != (n * (n - 1) / 2, n, n - 1, true) {
            bad.push(format!("n={n}: {pairs} pairs, {passages} passages, {stars} stars, source {source_ok}"));
        }
    }
    ensure!(bad.is_empty(), "{}", bad.join("; "));
    Ok("n=6: 15 pairs -> 5 star edges from the earliest year; n(n-1)/2 -> n-1 for n in 2..=10".into())
}

fn random_shift_table(rng: &mut ChaCha8Rng) -> OffsetShiftTable {
    let raw_len = rng.gen_range(0..3000);
    let count = rng.gen_range(0..40).min(raw_len + 1);
    let mut positions = rand::seq::index::sample(rng, raw_len + 1, count).into_vec();
    positions.sort_unstable();
    let insertions = positions
        .into_iter()
        .map(|raw_position| Insertion {
            raw_position,
            inserted_length: rng.gen_range(1..200),
        })
        .collect();
    OffsetShiftTable::new(raw_len, insertions).unwrap()
}

fn random_page_map(rng: &mut ChaCha8Rng) -> (PageMap, usize) {
    let mut tokens = Vec::new();
    let mut at = rng.gen_range(0..50);
    let mut page = rng.gen_range(1..5);
    for _ in 0..rng.gen_range(0..300) {
        let len = rng.gen_range(1..15);
        if rng.gen_bool(0.05) {
            page += rng.gen_range(1..3);
        }
        tokens.push(PageToken {
            char_start: at,
            char_end: at + len,
            page,
            bbox: PageBox {
                x: rng.gen_range(0..1000),
                y: rng.gen_range(0..1400),
                w: 40,
                h: 20,
            },
        });
        at += len + rng.gen_range(0..4);
    }
    let text_len = at + rng.gen_range(0..50);
    (PageMap::new(tokens, text_len).unwrap(), text_len)
}

fn offset_round_trip() -> Result<String> {
    let failures: usize = (0..10_000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let table = random_shift_table(&mut rng);
            let round_trip = (0..=table.raw_len()).all(|raw| {
                table
                    .raw_to_annotated(raw)
                    .and_then(|ann| table.annotated_to_raw(ann))
                    .is_ok_and(|back| back == raw)
            });
            let (map, text_len) = random_page_map(&mut rng);
            let pages: Vec<Option<u32>> = (0..=text_len).map(|o| map.offset_to_page(o)).collect();
            let monotone = pages.windows(2).all(|w| w[0] <= w[1]);
            usize::from(!round_trip) + usize::from(!monotone)
        })
        .sum();
    ensure!(failures == 0, "{failures} violations");
    Ok("10^4 shift tables round-trip, 10^4 page maps monotone".into())
}

const STORE_DOCS: usize = 10_000;
const STORE_EDGES: usize = 1_000_000;

fn synthetic_store() -> (Corpus, Vec<(usize, usize)>, EdgeStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let body = "the quick brown fox jumps over the lazy dog ".repeat(30);
    let len = body.chars().count();
    let docs = (0..STORE_DOCS)
        .map(|i| {
            let author = format!("Author {}", rng.gen_range(0..2000));
            Document::new(meta(&format!("d{i:05}"), rng.gen_range(1600..1800), &author, "Of things"), body.clone())
                .unwrap()
        })
        .collect();
    let corpus = Corpus::from_documents(docs).unwrap();
    let mut pairs = Vec::with_capacity(STORE_EDGES);
    let edges = (0..STORE_EDGES)
        .map(|_| {
            let a = rng.gen_range(0..STORE_DOCS);
            let mut b = rng.gen_range(0..STORE_DOCS - 1);
            if b >= a {
                b += 1;
            }
            let (s1, s2) = (rng.gen_range(0..len - 200), rng.gen_range(0..len - 200));
            let (l1, l2) = (rng.gen_range(120..200), rng.gen_range(120..200));
            pairs.push((a, b));
            Edge {
                t1_id: corpus.doc(a).id().to_string(),
                t1_start: s1,
                t1_end: s1 + l1,
                t2_id: corpus.doc(b).id().to_string(),
                t2_start: s2,
                t2_end: s2 + l2,
                align_length: l1.max(l2) as u32,
                positives_percent: rng.gen_range(70.0..100.0),
            }
        })
        .collect();
    let store = EdgeStore::from_edges(edges, &corpus).unwrap();
    (corpus, pairs, store)
}

/// Full scan over every edge, written independently of the adjacency index.
fn brute_force(q: &EdgeQuery, corpus: &Corpus, store: &EdgeStore, pairs: &[(usize, usize)]) -> Vec<EnrichedEdge> {
    let p = corpus.index_of(&q.doc_id).unwrap();
    let pm = &corpus.doc(p).meta;
    let mut out: Vec<EnrichedEdge> = store
        .edges()
        .zip(pairs)
        .filter_map(|((edge_id, e), &(a, b))| {
            let (o, ps, pe, os, oe) = if a == p {
                (b, e.t1_start, e.t1_end, e.t2_start, e.t2_end)
            } else if b == p {
                (a, e.t2_start, e.t2_end, e.t1_start, e.t1_end)
            } else {
                return None;
            };
            let om = &corpus.doc(o).meta;
            let direction_ok = match q.direction {
                Direction::In => om.year <= pm.year,
                Direction::Out => om.year >= pm.year,
                Direction::Both => true,
            };
            let years_ok = q.year_from.is_none_or(|y| om.year >= y) && q.year_to.is_none_or(|y| om.year <= y);
            let author_ok = !(q.exclude_same_author && !pm.author.is_empty() && pm.author == om.author);
            (direction_ok && years_ok && author_ok).then(|| EnrichedEdge {
                edge_id,
                primary_id: pm.doc_id.clone(),
                primary_start: ps,
                primary_end: pe,
                primary_page: corpus.doc(p).page_of(ps),
                other: DocSummary::from(om),
                other_start: os,
                other_end: oe,
                align_length: e.align_length,
                positives_percent: e.positives_percent,
                year_gap: (om.year - pm.year).unsigned_abs(),
            })
        })
        .collect();
    out.sort_by_key(|r| (r.other.year, r.other.doc_id.clone(), r.primary_start, r.edge_id));
    out
}

fn random_query(rng: &mut ChaCha8Rng, corpus: &Corpus) -> EdgeQuery {
    let id = corpus.doc(rng.gen_range(0..corpus.len())).id();
    let direction = *[Direction::In, Direction::Out, Direction::Both].choose(rng).unwrap();
    let from = rng.gen_bool(0.5).then(|| rng.gen_range(1590..1760));
    let to = rng.gen_bool(0.5).then(|| rng.gen_range(from.unwrap_or(1590)..1810));
    EdgeQuery::new(id, direction)
        .years(from, to)
        .exclude_same_author(rng.gen_bool(0.5))
}

fn query_correctness() -> Result<String> {
    let (corpus, pairs, store) = synthetic_store();
    ensure!(store.len() == STORE_EDGES);
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let queries: Vec<EdgeQuery> = (0..1000).map(|_| random_query(&mut rng, &corpus)).collect();
    let mismatches: Vec<String> = queries
        .par_iter()
        .filter_map(|q| {
            let indexed = store.query(q, &corpus).unwrap();
            (indexed != brute_force(q, &corpus, &store, &pairs)).then(|| format!("{q:?}"))
        })
        .collect();
    ensure!(mismatches.is_empty(), "{} queries differ, first {}", mismatches.len(), mismatches[0]);

    let busiest = (0..corpus.len())
        .max_by_key(|&i| store.degree(&corpus, corpus.doc(i).id()))
        .unwrap();
    let busiest = corpus.doc(busiest).id().to_string();
    let (edge_id, _) = store.edges().find(|(_, e)| e.t1_id == busiest).unwrap();
    let state = Arc::new(AppState::new(corpus, store, Vec::new(), ServerConfig::default()));

    let paths = [
        "/api/health".to_string(),
        "/api/search?q=author%20things".to_string(),
        format!("/api/documents/{busiest}"),
        format!("/api/documents/{busiest}/edges?direction=both&exclude_same_author=false"),
        format!("/api/documents/{busiest}/edges?direction=in&from=1650&to=1750"),
        format!("/api/edges/{edge_id}/context?primary={busiest}"),
    ];
    let rt = tokio::runtime::Runtime::new()?;
    let slowest = rt.block_on(async {
        let base = spawn(state).await;
        let client = reqwest::Client::new();
        let mut slowest: Vec<(String, Duration)> = Vec::new();
        for path in &paths {
            let mut worst = Duration::ZERO;
            for _ in 0..5 {
                let started = Instant::now();
                let resp = client.get(format!("{base}{path}")).send().await?;
                ensure!(resp.status().is_success(), "{path}: {}", resp.status());
                resp.bytes().await?;
                worst = worst.max(started.elapsed());
            }
            slowest.push((path.clone(), worst));
        }
        Ok::<_, anyhow::Error>(slowest)
    })?;
    let too_slow: Vec<String> = slowest
        .iter()
        .filter(|(_, d)| *d >= Duration::from_millis(200))
        .map(|(p, d)| format!("{p} {}ms", d.as_millis()))
        .collect();
    ensure!(too_slow.is_empty(), "slow endpoints: {}", too_slow.join(", "));
    let max = slowest.iter().map(|s| s.1).max().unwrap_or_default();
    Ok(format!(
        "1000 queries equal full scan on {STORE_EDGES} edges; slowest endpoint {:.1}ms",
        max.as_secs_f64() * 1000.0
    ))
}

fn direction_boundary() -> Result<String> {
    let corpus = Corpus::from_documents(vec![
        doc("p", 1700, "Smith", 2000, 1),
        doc("q", 1700, "Jones", 2000, 2),
        doc("r", 1700, "Smith", 2000, 3),
    ])?;
    let edge = |other: &str| Edge {
        t1_id: "p".into(),
        t1_start: 0,
        t1_end: 200,
        t2_id: other.into(),
        t2_start: 100,
        t2_end: 300,
        align_length: 200,
        positives_percent: 90.0,
    };
    let store = EdgeStore::from_edges(vec![edge("q"), edge("r")], &corpus)?;
    let others = |dir: Direction, exclude: bool| -> Result<Vec<String>> {
        let rows = store.query(&EdgeQuery::new("p", dir).exclude_same_author(exclude), &corpus)?;
        Ok(rows.into_iter().map(|r| r.other.doc_id).collect())
    };
    for dir in [Direction::In, Direction::Out] {
        ensure!(others(dir, true)? == ["q"], "{dir:?} with exclusion: {:?}", others(dir, true)?);
        ensure!(others(dir, false)? == ["q", "r"], "{dir:?} without exclusion");
    }
    ensure!(store.counts("p", &corpus)? == (1, 1));

    let state = Arc::new(AppState::new(corpus, store, Vec::new(), ServerConfig::default()));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let base = spawn(state).await;
        for dir in ["in", "out"] {
            let rows: Vec<serde_json::Value> = reqwest::get(format!("{base}/api/documents/p/edges?direction={dir}"))
                .await?
                .json()
                .await?;
            let ids: Vec<&str> = rows.iter().filter_map(|r| r["other"]["doc_id"].as_str()).collect();
            ensure!(ids == ["q"], "HTTP {dir}: {ids:?}");
        }
        Ok::<_, anyhow::Error>(())
    })?;
    Ok("equal-year edge in both directions, same-author edge excluded (library and HTTP)".into())
}

fn catalogue_doc(id: &str, year: i32, author: &str, title: &str) -> Document {
    Document::new(meta(id, year, author, title), "text".into()).unwrap()
}

fn search() -> Result<String> {
    const HUME: &str = "Hume, David (1711-1776)";
    let corpus = Corpus::from_documents(vec![
        catalogue_doc("1649800202", 1753, HUME, "Essays and treatises on several subjects. In four volumes."),
        catalogue_doc("0148400600", 1742, HUME, "Essays, moral and political. The second edition"),
        catalogue_doc("0437500100", 1748, HUME, "Philosophical essays concerning human understanding"),
        catalogue_doc("1393000900", 1752, HUME, "Political discourses"),
        catalogue_doc("0289100500", 1757, HUME, "Four dissertations"),
        catalogue_doc("1200700300", 1754, HUME, "The history of Great Britain"),
        catalogue_doc("0523300200", 1741, "Addison, Joseph", "Essays on taste, by David Fordyce"),
        catalogue_doc("0710000400", 1763, "Hurd, Richard", "Moral and political dialogues"),
    ])?;
    let hits = metasearch::search(&corpus, "david hume essays");
    let scores: Vec<u32> = hits.iter().map(|h| h.score).collect();
    ensure!(scores.windows(2).all(|w| w[0] >= w[1]), "scores not descending: {scores:?}");
    let three: Vec<&str> = hits.iter().filter(|h| h.score == 3).map(|h| h.doc_id.as_str()).collect();
    ensure!(three == ["0148400600", "0437500100", "1649800202"], "3-term matches {three:?}");
    ensure!(hits.iter().any(|h| h.score == 2), "no 2-term matches");

    let many: Vec<Document> = (0..150)
        .map(|i| catalogue_doc(&format!("e{i:03}"), 1700 + i % 90, "Anon", &format!("Essays number {i}")))
        .collect();
    let capped = metasearch::search(&Corpus::from_documents(many)?, "essays");
    ensure!(capped.len() == 100, "{} results", capped.len());

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let authors = ["Hume", "Pope", "Swift", "Defoe"];
    let rows: Vec<SearchResult> = (0..60)
        .map(|i| SearchResult {
            doc_id: format!("r{i:02}"),
            year: rng.gen_range(1700..1780),
            author: authors.choose(&mut rng).unwrap().to_string(),
            title: String::new(),
            score: 1,
        })
        .collect();
    let by_author = resort(resort(rows, SortColumn::Year, SortOrder::Asc), SortColumn::Author, SortOrder::Asc);
    let carried = by_author
        .windows(2)
        .all(|w| w[0].author < w[1].author || (w[0].author == w[1].author && w[0].year <= w[1].year));
    ensure!(carried, "year order lost within authors");
    Ok("3-term matches outrank 2-term, 100-result cap, year order kept within authors".into())
}
