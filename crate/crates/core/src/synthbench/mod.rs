//! Synthetic corpora with planted reuse and OCR-like noise, and an evaluator
//! that scores detector output against the planted ground truth.
//!
//! Output directory of [`Generated::write_to`]:
//!
//! ```text
//! metadata.tsv, texts/, pagemaps/   a corpus readable by Corpus::ingest
//! truth.tsv                         plant_id  doc_id  start  end
//! plants.tsv                        plant_id  text_sha256  length
//! cliques.tsv                       clique_id  plant_id  doc_id
//! documents.tsv                     doc_id  chars
//! ```

mod eval;
mod model;
mod noise;
mod truth;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use eval::{edge_matches, evaluate, span_iou, EvalReport, PlantHit, DEFAULT_IOU};
pub use model::BackgroundModel;
pub use noise::{NoiseChannel, CONFUSIONS};
pub use truth::{CliqueTruth, GroundTruth, Placement, PlantTruth, TRUTH_COLUMNS};

use crate::corpus::{Corpus, CorpusError, DocMetadata, Document};
use crate::offsetmap::{PageBox, PageMap, PageToken, FALLBACK_PAGE_CHARS};
use crate::tsv::TsvError;

pub const YEAR_RANGE: (i32, i32) = (1650, 1800);
/// Minimum background between two placements in one document.
pub const PLACEMENT_SPACING: usize = 40;

const LINE_CHARS: usize = 64;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("plant {plant_id} ({length} chars) fits without overlap in only {available} documents")]
    Placement {
        plant_id: u32,
        length: usize,
        available: usize,
    },
    #[error("clique of {size} needs {size} documents with room and distinct years, found {available}")]
    CliqueYears { size: usize, available: usize },
    #[error("edge references document `{0}` absent from the generated corpus")]
    UnknownDocument(String),
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("spec: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Tsv(#[from] TsvError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueSpec {
    pub size: usize,
    pub passage_length: usize,
}

/// Generator configuration, readable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub num_docs: usize,
    pub doc_length_range: (usize, usize),
    pub num_plants: usize,
    pub plant_length_range: (usize, usize),
    pub noise_rate: f64,
    #[serde(default)]
    pub clique_specs: Vec<CliqueSpec>,
    pub seed: u64,
    /// Text the background model is trained on; the bundled sample if absent.
    #[serde(default)]
    pub source_text: Option<PathBuf>,
    /// Documents each ordinary plant is copied into.
    #[serde(default = "default_copies")]
    pub copies_per_plant: usize,
}

fn default_copies() -> usize {
    2
}

impl GenSpec {
    /// 100 documents of 10k-30k characters, 200 plants of 200-2000, 5% noise, seed 42.
    pub fn regression() -> Self {
        Self {
            num_docs: 100,
            doc_length_range: (10_000, 30_000),
            num_plants: 200,
            plant_length_range: (200, 2000),
            noise_rate: 0.05,
            clique_specs: Vec::new(),
            seed: 42,
            source_text: None,
            copies_per_plant: 2,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GenError> {
        let spec: Self = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Loads a TOML spec; a relative `source_text` resolves against the
    /// spec file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| GenError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = Self::from_toml_str(&text)?;
        if let (Some(src), Some(dir)) = (&spec.source_text, path.parent()) {
            if src.is_relative() {
                spec.source_text = Some(dir.join(src));
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidSpec(m));
        let (dmin, dmax) = self.doc_length_range;
        let (pmin, pmax) = self.plant_length_range;
        if self.num_docs == 0 {
            return bad("num_docs must be positive".into());
        }
        if dmin == 0 || dmin > dmax {
            return bad(format!("doc_length_range ({dmin}, {dmax}) is empty"));
        }
        if self.num_plants > 0 && (pmin == 0 || pmin > pmax) {
            return bad(format!("plant_length_range ({pmin}, {pmax}) is empty"));
        }
        if self.num_plants > 0 && pmax > dmin {
            return bad(format!("plants up to {pmax} chars do not fit documents of {dmin}"));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return bad(format!("noise_rate {} outside [0, 1)", self.noise_rate));
        }
        if self.num_plants > 0 && !(2..=self.num_docs).contains(&self.copies_per_plant) {
            return bad(format!(
                "copies_per_plant {} must be in [2, num_docs]",
                self.copies_per_plant
            ));
        }
        for c in &self.clique_specs {
            if c.size < 2 || c.size > self.num_docs {
                return bad(format!("clique size {} must be in [2, num_docs]", c.size));
            }
            if c.size > (YEAR_RANGE.1 - YEAR_RANGE.0 + 1) as usize {
                return bad(format!("clique size {} exceeds the number of distinct years", c.size));
            }
            if c.passage_length == 0 || c.passage_length > dmin {
                return bad(format!("clique passage of {} chars does not fit", c.passage_length));
            }
        }
        Ok(())
    }
}

/// A generated corpus with its manifest.
#[derive(Debug, Clone)]
pub struct Generated {
    pub corpus: Corpus,
    pub truth: GroundTruth,
}

impl Generated {
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), GenError> {
        let dir = dir.as_ref();
        self.corpus.write_to(dir)?;
        self.truth.write_to(dir)
    }
}

struct Slot {
    start: usize,
    len: usize,
    plant: usize,
}

struct PlannedDoc {
    meta: DocMetadata,
    len: usize,
    slots: Vec<Slot>,
}

/// Start positions where a passage of `len` fits, as inclusive ranges.
fn feasible_starts(doc: &PlannedDoc, len: usize) -> Vec<(usize, usize)> {
    let Some(last) = doc.len.checked_sub(len) else {
        return Vec::new();
    };
    let mut slots: Vec<(usize, usize)> = doc.slots.iter().map(|s| (s.start, s.start + s.len)).collect();
    slots.sort_unstable();
    let mut out = Vec::new();
    let mut lo = 0usize;
    for (start, end) in slots {
        if let Some(hi) = start.checked_sub(len + PLACEMENT_SPACING) {
            if lo <= hi.min(last) {
                out.push((lo, hi.min(last)));
            }
        }
        lo = lo.max(end + PLACEMENT_SPACING);
    }
    if lo <= last {
        out.push((lo, last));
    }
    out
}

fn has_room(doc: &PlannedDoc, len: usize) -> bool {
    !feasible_starts(doc, len).is_empty()
}

/// Reserves a uniformly drawn feasible position; the caller checked room.
fn place(doc: &mut PlannedDoc, plant: usize, len: usize, rng: &mut ChaCha8Rng) {
    let ranges = feasible_starts(doc, len);
    let total: usize = ranges.iter().map(|r| r.1 - r.0 + 1).sum();
    let mut k = rng.gen_range(0..total);
    for (lo, hi) in ranges {
        let n = hi - lo + 1;
        if k < n {
            doc.slots.push(Slot { start: lo + k, len, plant });
            return;
        }
        k -= n;
    }
    unreachable!("k below the feasible total");
}

/// Background text of exactly `len` characters ending in a space, so the
/// following passage starts on a word boundary.
fn gap_text(model: &BackgroundModel, len: usize, rng: &mut ChaCha8Rng) -> String {
    if len == 0 {
        return String::new();
    }
    let mut s = model.sample(len - 1, rng);
    s.push(' ');
    s
}

/// Word tokens on synthetic pages of about [`FALLBACK_PAGE_CHARS`]
/// characters, laid out in lines with fabricated boxes.
pub fn synth_page_map(text: &str) -> PageMap {
    let mut tokens = Vec::new();
    let (mut page, mut line, mut col) = (0u32, 0usize, 0usize);
    let mut pos = 0usize;
    let mut start: Option<usize> = None;
    let mut flush = |s: usize, e: usize, tokens: &mut Vec<PageToken>| {
        let p = 1 + (s / FALLBACK_PAGE_CHARS) as u32;
        if p != page {
            page = p;
            line = 0;
            col = 0;
        }
        let w = e - s;
        if col > 0 && col + w > LINE_CHARS {
            line += 1;
            col = 0;
        }
        tokens.push(PageToken {
            char_start: s,
            char_end: e,
            page,
            bbox: PageBox {
                x: 72 + 9 * col as i32,
                y: 80 + 16 * line as i32,
                w: 9 * w as i32,
                h: 14,
            },
        });
        col += w + 1;
    };
    for c in text.chars() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                flush(s, pos, &mut tokens);
                start = None;
            }
            _ => {}
        }
        pos += 1;
    }
    if let Some(s) = start {
        flush(s, pos, &mut tokens);
    }
    PageMap::new(tokens, pos).expect("tokens are ordered by construction")
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Builds a corpus from `spec`. Output depends only on `spec`.
pub fn generate(spec: &GenSpec) -> Result<Generated, GenError> {
    spec.validate()?;
    let model = match &spec.source_text {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| GenError::Io {
                path: path.clone(),
                source,
            })?;
            BackgroundModel::from_text(&text)
                .ok_or_else(|| GenError::InvalidSpec(format!("{} is too short", path.display())))?
        }
        None => BackgroundModel::builtin(),
    };
    generate_with_model(spec, &model)
}

pub fn generate_with_model(spec: &GenSpec, model: &BackgroundModel) -> Result<Generated, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = spec.num_docs.to_string().len().max(4);
    let n_authors = (spec.num_docs / 3).max(1);

    let mut docs: Vec<PlannedDoc> = (0..spec.num_docs)
        .map(|i| {
            let len = rng.gen_range(spec.doc_length_range.0..=spec.doc_length_range.1);
            let year = rng.gen_range(YEAR_RANGE.0..=YEAR_RANGE.1);
            let author = format!("Author {:03}", rng.gen_range(1..=n_authors));
            let title: String = model
                .sample(40, &mut rng)
                .split_whitespace()
                .filter(|w| w.chars().all(char::is_alphabetic))
                .take(4)
                .collect::<Vec<_>>()
                .join(" ");
            PlannedDoc {
                meta: DocMetadata {
                    doc_id: format!("doc{:0width$}", i + 1),
                    year,
                    author,
                    title: format!("Of {title}"),
                    collection: "synthetic".into(),
                },
                len,
                slots: Vec::new(),
            }
        })
        .collect();

    let mut plant_texts: Vec<String> = Vec::new();
    let mut plant_docs: Vec<Vec<usize>> = Vec::new();
    for p in 0..spec.num_plants {
        let len = rng.gen_range(spec.plant_length_range.0..=spec.plant_length_range.1);
        plant_texts.push(model.sample(len, &mut rng).trim().to_string());
        let plen = plant_texts[p].chars().count();
        let roomy: Vec<usize> = (0..spec.num_docs).filter(|&d| has_room(&docs[d], plen)).collect();
        if roomy.len() < spec.copies_per_plant {
            return Err(GenError::Placement {
                plant_id: p as u32 + 1,
                length: plen,
                available: roomy.len(),
            });
        }
        let chosen: Vec<usize> = rand::seq::index::sample(&mut rng, roomy.len(), spec.copies_per_plant)
            .into_iter()
            .map(|i| roomy[i])
            .collect();
        for &d in &chosen {
            place(&mut docs[d], p, plen, &mut rng);
        }
        plant_docs.push(chosen);
    }

    let mut cliques = Vec::new();
    let mut in_clique = vec![false; spec.num_docs];
    for (ci, c) in spec.clique_specs.iter().enumerate() {
        let p = plant_texts.len();
        plant_texts.push(model.sample(c.passage_length, &mut rng).trim().to_string());
        let plen = plant_texts[p].chars().count();
        let mut order: Vec<usize> = (0..spec.num_docs).filter(|&d| has_room(&docs[d], plen)).collect();
        order.shuffle(&mut rng);
        let mut years = std::collections::BTreeSet::new();
        let mut chosen: Vec<usize> = Vec::with_capacity(c.size);
        let mut spare: Vec<usize> = Vec::new();
        for d in order {
            if chosen.len() == c.size {
                break;
            }
            if years.insert(docs[d].meta.year) {
                chosen.push(d);
            } else if !in_clique[d] {
                spare.push(d);
            }
        }
        // too few distinct years: give spare documents unused years
        for d in spare {
            if chosen.len() == c.size {
                break;
            }
            let free: Vec<i32> = (YEAR_RANGE.0..=YEAR_RANGE.1).filter(|y| !years.contains(y)).collect();
            let Some(&year) = free.choose(&mut rng) else { break };
            years.insert(year);
            docs[d].meta.year = year;
            chosen.push(d);
        }
        if chosen.len() < c.size {
            return Err(GenError::CliqueYears {
                size: c.size,
                available: chosen.len(),
            });
        }
        for &d in &chosen {
            in_clique[d] = true;
        }
        for &d in &chosen {
            place(&mut docs[d], p, plen, &mut rng);
        }
        cliques.push(CliqueTruth {
            clique_id: ci as u32 + 1,
            plant_id: p as u32 + 1,
            doc_ids: chosen.iter().map(|&d| docs[d].meta.doc_id.clone()).collect(),
        });
        plant_docs.push(chosen);
    }

    let noise = NoiseChannel::new(spec.noise_rate);
    let mut placements: Vec<Vec<Placement>> = vec![Vec::new(); plant_texts.len()];
    let mut documents = Vec::with_capacity(docs.len());
    for planned in &mut docs {
        planned.slots.sort_by_key(|s| s.start);
        let mut text = String::with_capacity(planned.len + 64);
        let mut chars = 0usize;
        let mut cursor = 0usize;
        for slot in &planned.slots {
            let gap = gap_text(model, slot.start - cursor, &mut rng);
            chars += gap.chars().count();
            text.push_str(&gap);
            let copy = noise.corrupt(&plant_texts[slot.plant], &mut rng);
            let n = copy.chars().count();
            placements[slot.plant].push(Placement {
                doc_id: planned.meta.doc_id.clone(),
                start: chars,
                end: chars + n,
            });
            text.push_str(&copy);
            chars += n;
            cursor = slot.start + slot.len;
        }
        let tail = planned.len.saturating_sub(cursor);
        if tail > 0 {
            text.push(' ');
            text.push_str(model.sample(tail - 1, &mut rng).trim_start());
        }
        let map = synth_page_map(&text);
        documents.push(Document::new(planned.meta.clone(), text)?.with_page_map(map));
    }

    let plants = plant_texts
        .iter()
        .zip(placements)
        .enumerate()
        .map(|(i, (t, mut pl))| {
            // placement order follows the chosen documents
            let order = &plant_docs[i];
            pl.sort_by_key(|p| order.iter().position(|&d| docs[d].meta.doc_id == p.doc_id));
            PlantTruth {
                plant_id: i as u32 + 1,
                text_sha256: sha256_hex(t),
                length: t.chars().count(),
                placements: pl,
            }
        })
        .collect();
    let corpus = Corpus::from_documents(documents)?;
    let doc_counts = corpus.iter().map(|d| (d.id().to_string(), d.char_len())).collect();
    Ok(Generated {
        corpus,
        truth: GroundTruth {
            plants,
            cliques,
            documents: doc_counts,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> GenSpec {
        GenSpec {
            num_docs: 8,
            doc_length_range: (3000, 5000),
            num_plants: 6,
            plant_length_range: (200, 600),
            noise_rate: 0.05,
            clique_specs: vec![CliqueSpec {
                size: 4,
                passage_length: 400,
            }],
            seed,
            source_text: None,
            copies_per_plant: 2,
        }
    }

    #[test]
    fn placements_in_bounds_and_disjoint() {
        let g = generate(&small(1)).unwrap();
        assert_eq!(g.truth.plants.len(), 7);
        for p in &g.truth.plants {
            assert!(p.placements.len() >= 2);
            for pl in &p.placements {
                let doc = g.corpus.get(&pl.doc_id).unwrap();
                assert!(pl.start < pl.end && pl.end <= doc.char_len());
            }
        }
        for doc in g.corpus.iter() {
            let mut spans: Vec<(usize, usize)> = g
                .truth
                .plants
                .iter()
                .flat_map(|p| &p.placements)
                .filter(|pl| pl.doc_id == doc.id())
                .map(|pl| (pl.start, pl.end))
                .collect();
            spans.sort_unstable();
            assert!(spans.windows(2).all(|w| w[0].1 <= w[1].0));
        }
    }

    #[test]
    fn zero_noise_copies_verbatim() {
        let mut spec = small(2);
        spec.noise_rate = 0.0;
        let g = generate(&spec).unwrap();
        for p in &g.truth.plants {
            let texts: Vec<&str> = p
                .placements
                .iter()
                .map(|pl| g.corpus.get(&pl.doc_id).unwrap().slice_chars(pl.start, pl.end))
                .collect();
            assert!(texts.iter().all(|t| *t == texts[0]));
            assert_eq!(sha256_hex(texts[0]), p.text_sha256);
        }
    }

    #[test]
    fn clique_years_distinct() {
        let g = generate(&small(3)).unwrap();
        let c = &g.truth.cliques[0];
        assert_eq!(c.doc_ids.len(), 4);
        let mut years: Vec<i32> = c.doc_ids.iter().map(|d| g.corpus.get(d).unwrap().meta.year).collect();
        years.sort_unstable();
        years.dedup();
        assert_eq!(years.len(), 4);
        assert!(g.corpus.iter().all(|d| (1650..=1800).contains(&d.meta.year)));
    }

    #[test]
    fn clique_over_every_document() {
        for seed in 0..40 {
            let spec = GenSpec {
                num_docs: 10,
                doc_length_range: (2000, 3000),
                num_plants: 0,
                clique_specs: vec![CliqueSpec {
                    size: 10,
                    passage_length: 300,
                }],
                seed,
                ..GenSpec::regression()
            };
            let g = generate(&spec).unwrap();
            let mut years: Vec<i32> = g.corpus.iter().map(|d| d.meta.year).collect();
            years.sort_unstable();
            years.dedup();
            assert_eq!(years.len(), 10, "seed {seed}");
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate(&small(4)).unwrap();
        let b = generate(&small(4)).unwrap();
        let c = generate(&small(5)).unwrap();
        let texts = |g: &Generated| g.corpus.iter().map(|d| d.raw_text().to_string()).collect::<Vec<_>>();
        assert_eq!(texts(&a), texts(&b));
        assert_eq!(a.truth, b.truth);
        assert_ne!(texts(&a), texts(&c));
    }

    #[test]
    fn report_counts_match_corpus() {
        let g = generate(&small(6)).unwrap();
        assert_eq!(g.truth.total_chars(), g.corpus.total_chars());
        assert_eq!(g.truth.documents.len(), 8);
    }

    #[test]
    fn page_map_roughly_1800_per_page() {
        let g = generate(&small(7)).unwrap();
        for d in g.corpus.iter() {
            let map = d.page_map.as_ref().unwrap();
            for t in map.tokens() {
                assert_eq!(t.page as usize, 1 + t.char_start / FALLBACK_PAGE_CHARS);
            }
        }
    }

    #[test]
    fn impossible_placement_errors() {
        let spec = GenSpec {
            num_docs: 2,
            doc_length_range: (500, 500),
            num_plants: 5,
            plant_length_range: (300, 300),
            noise_rate: 0.0,
            clique_specs: Vec::new(),
            seed: 1,
            source_text: None,
            copies_per_plant: 2,
        };
        assert!(matches!(generate(&spec), Err(GenError::Placement { plant_id: 2, .. })));
    }

    #[test]
    fn invalid_specs() {
        let mut s = small(1);
        s.noise_rate = 1.0;
        assert!(s.validate().is_err());
        let mut s = small(1);
        s.plant_length_range = (10, 9000);
        assert!(s.validate().is_err());
        let mut s = small(1);
        s.clique_specs[0].size = 9;
        assert!(s.validate().is_err());
        let mut s = small(1);
        s.copies_per_plant = 1;
        assert!(s.validate().is_err());
    }

    #[test]
    fn toml_spec() {
        let spec = GenSpec::from_toml_str(
            r#"
            num_docs = 100
            doc_length_range = [10000, 30000]
            num_plants = 200
            plant_length_range = [200, 2000]
            noise_rate = 0.05
            seed = 42
            "#,
        )
        .unwrap();
        assert_eq!(spec, GenSpec::regression());
        assert!(GenSpec::from_toml_str("num_docs = 1\nbogus = 2").is_err());
    }

    #[test]
    fn feasible_starts_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let len_doc = rng.gen_range(50..400);
            let mut doc = PlannedDoc {
                meta: DocMetadata {
                    doc_id: "d".into(),
                    year: 1700,
                    author: String::new(),
                    title: String::new(),
                    collection: String::new(),
                },
                len: len_doc,
                slots: Vec::new(),
            };
            for _ in 0..rng.gen_range(0..5) {
                let len = rng.gen_range(1..60);
                if has_room(&doc, len) {
                    place(&mut doc, 0, len, &mut rng);
                }
            }
            let len = rng.gen_range(1..80);
            let brute: Vec<usize> = (0..=len_doc.saturating_sub(len))
                .filter(|&st| st + len <= len_doc)
                .filter(|&st| {
                    doc.slots
                        .iter()
                        .all(|s| st + len + PLACEMENT_SPACING <= s.start || s.start + s.len + PLACEMENT_SPACING <= st)
                })
                .collect();
            let ranges: Vec<usize> = feasible_starts(&doc, len).into_iter().flat_map(|(a, b)| a..=b).collect();
            assert_eq!(ranges, brute);
        }
    }
}
