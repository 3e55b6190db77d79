use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GenError;
use crate::tsv;

pub const TRUTH_COLUMNS: [&str; 4] = ["plant_id", "doc_id", "start", "end"];
pub const PLANT_COLUMNS: [&str; 3] = ["plant_id", "text_sha256", "length"];
pub const CLIQUE_COLUMNS: [&str; 3] = ["clique_id", "plant_id", "doc_id"];
pub const DOCUMENT_COLUMNS: [&str; 2] = ["doc_id", "chars"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantTruth {
    pub plant_id: u32,
    /// SHA-256 of the uncorrupted passage; empty when read from truth.tsv alone.
    pub text_sha256: String,
    pub length: usize,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTruth {
    pub clique_id: u32,
    pub plant_id: u32,
    pub doc_ids: Vec<String>,
}

/// Where every planted passage ended up, plus the per-document character
/// counts of the generated corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub plants: Vec<PlantTruth>,
    pub cliques: Vec<CliqueTruth>,
    /// `(doc_id, chars)` for every generated document, in id order.
    pub documents: Vec<(String, usize)>,
}

fn io_err(path: &Path, source: io::Error) -> GenError {
    GenError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, body: &[u8]) -> Result<(), GenError> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(body))
        .map_err(|e| io_err(path, e))
}

impl GroundTruth {
    pub fn total_chars(&self) -> usize {
        self.documents.iter().map(|d| d.1).sum()
    }

    /// Unordered placement pairs of every plant.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, &Placement, &Placement)> {
        self.plants.iter().flat_map(|p| {
            let n = p.placements.len();
            (0..n).flat_map(move |i| (i + 1..n).map(move |j| (p.plant_id, &p.placements[i], &p.placements[j])))
        })
    }

    pub fn truth_tsv(&self) -> String {
        let mut out = TRUTH_COLUMNS.join("\t") + "\n";
        for p in &self.plants {
            for pl in &p.placements {
                out.push_str(&format!("{}\t{}\t{}\t{}\n", p.plant_id, pl.doc_id, pl.start, pl.end));
            }
        }
        out
    }

    /// Writes truth.tsv, plants.tsv, cliques.tsv and documents.tsv into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), GenError> {
        write_file(&dir.join("truth.tsv"), self.truth_tsv().as_bytes())?;

        let mut plants = PLANT_COLUMNS.join("\t") + "\n";
        for p in &self.plants {
            plants.push_str(&format!("{}\t{}\t{}\n", p.plant_id, p.text_sha256, p.length));
        }
        write_file(&dir.join("plants.tsv"), plants.as_bytes())?;

        let mut cliques = CLIQUE_COLUMNS.join("\t") + "\n";
        for c in &self.cliques {
            for d in &c.doc_ids {
                cliques.push_str(&format!("{}\t{}\t{}\n", c.clique_id, c.plant_id, d));
            }
        }
        write_file(&dir.join("cliques.tsv"), cliques.as_bytes())?;

        let mut docs = DOCUMENT_COLUMNS.join("\t") + "\n";
        for (id, n) in &self.documents {
            docs.push_str(&format!("{id}\t{n}\n"));
        }
        write_file(&dir.join("documents.tsv"), docs.as_bytes())
    }

    /// Parses truth.tsv contents. Plant hashes, cliques and documents stay empty.
    pub fn parse_truth(text: &str) -> Result<Self, GenError> {
        let mut plants: BTreeMap<u32, PlantTruth> = BTreeMap::new();
        tsv::for_each_row(text, &TRUTH_COLUMNS, |row| {
            let plant_id: u32 = row.parse(0)?;
            let start: usize = row.parse(2)?;
            let end: usize = row.parse(3)?;
            if start >= end {
                return Err(row.error(3, "empty span"));
            }
            let p = plants.entry(plant_id).or_insert_with(|| PlantTruth {
                plant_id,
                text_sha256: String::new(),
                length: 0,
                placements: Vec::new(),
            });
            p.placements.push(Placement {
                doc_id: row.str(1).to_string(),
                start,
                end,
            });
            Ok(())
        })?;
        Ok(Self {
            plants: plants.into_values().collect(),
            ..Self::default()
        })
    }

    /// Reads `truth_path`, plus plants.tsv, cliques.tsv and documents.tsv
    /// from the same directory when they exist.
    pub fn read(truth_path: &Path) -> Result<Self, GenError> {
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| io_err(p, e));
        let mut truth = Self::parse_truth(&read(truth_path)?)?;
        let dir = truth_path.parent().unwrap_or(Path::new("."));

        let plants_path = dir.join("plants.tsv");
        if plants_path.is_file() {
            let text = read(&plants_path)?;
            let mut meta: BTreeMap<u32, (String, usize)> = BTreeMap::new();
            tsv::for_each_row(&text, &PLANT_COLUMNS, |row| {
                meta.insert(row.parse(0)?, (row.str(1).to_string(), row.parse(2)?));
                Ok(())
            })?;
            for p in &mut truth.plants {
                if let Some((hash, len)) = meta.remove(&p.plant_id) {
                    p.text_sha256 = hash;
                    p.length = len;
                }
            }
        }

        let cliques_path = dir.join("cliques.tsv");
        if cliques_path.is_file() {
            let text = read(&cliques_path)?;
            let mut cliques: BTreeMap<u32, CliqueTruth> = BTreeMap::new();
            tsv::for_each_row(&text, &CLIQUE_COLUMNS, |row| {
                let clique_id: u32 = row.parse(0)?;
                let plant_id: u32 = row.parse(1)?;
                cliques
                    .entry(clique_id)
                    .or_insert_with(|| CliqueTruth {
                        clique_id,
                        plant_id,
                        doc_ids: Vec::new(),
                    })
                    .doc_ids
                    .push(row.str(2).to_string());
                Ok(())
            })?;
            truth.cliques = cliques.into_values().collect();
        }

        let docs_path = dir.join("documents.tsv");
        if docs_path.is_file() {
            let text = read(&docs_path)?;
            tsv::for_each_row(&text, &DOCUMENT_COLUMNS, |row| {
                truth.documents.push((row.str(0).to_string(), row.parse(1)?));
                Ok(())
            })?;
        }
        Ok(truth)
    }
}
