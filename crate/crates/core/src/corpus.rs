//! Document corpus: metadata, raw OCR text, and optional annotation tables
//! and page maps, loaded from a directory.
//!
//! Layout:
//!
//! ```text
//! metadata.tsv             doc_id  year  author  title  collection
//! texts/<doc_id>.txt       raw UTF-8 text
//! annotations/<doc_id>.tsv raw_position  inserted_length   (optional)
//! pagemaps/<doc_id>.tsv    char_start  char_end  page  x  y  w  h   (optional)
//! ```

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::offsetmap::{OffsetError, OffsetShiftTable, PageMap};
use crate::tsv::{self, TsvError};

pub const METADATA_COLUMNS: [&str; 5] = ["doc_id", "year", "author", "title", "collection"];
pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("metadata.tsv: {0}")]
    Metadata(#[from] TsvError),
    #[error("metadata.tsv line {line}: duplicate doc_id `{id}`")]
    DuplicateId { id: String, line: usize },
    #[error("metadata.tsv line {line}: empty doc_id")]
    EmptyId { line: usize },
    #[error("metadata.tsv line {line}: year {year} outside [{MIN_YEAR}, {MAX_YEAR}]")]
    YearOutOfRange { line: usize, year: i32 },
    #[error("document `{id}`: missing text file {path}")]
    MissingText { id: String, path: PathBuf },
    #[error("document `{id}`: text file is not valid UTF-8")]
    InvalidUtf8 { id: String },
    #[error("document `{id}`: empty text")]
    EmptyText { id: String },
    #[error("document `{id}`: bad annotation table or page map")]
    Offsets {
        id: String,
        #[source]
        source: OffsetError,
    },
    #[error("document `{0}` not found")]
    NotFound(String),
    #[error("document `{id}`: field `{field}` contains a tab or newline")]
    UnwritableField { id: String, field: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocMetadata {
    pub doc_id: String,
    pub year: i32,
    pub author: String,
    pub title: String,
    pub collection: String,
}

impl DocMetadata {
    /// Same-author test used for exclusion. Empty authors never match.
    pub fn same_author(&self, other: &DocMetadata) -> bool {
        !self.author.is_empty() && self.author == other.author
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    pub meta: DocMetadata,
    raw_text: String,
    char_len: usize,
    pub shift_table: Option<OffsetShiftTable>,
    pub page_map: Option<PageMap>,
}

impl Document {
    pub fn new(meta: DocMetadata, raw_text: String) -> Result<Self, CorpusError> {
        let char_len = raw_text.chars().count();
        if char_len == 0 {
            return Err(CorpusError::EmptyText { id: meta.doc_id });
        }
        Ok(Self {
            meta,
            raw_text,
            char_len,
            shift_table: None,
            page_map: None,
        })
    }

    pub fn with_page_map(mut self, map: PageMap) -> Self {
        self.page_map = Some(map);
        self
    }

    pub fn with_shift_table(mut self, table: OffsetShiftTable) -> Self {
        self.shift_table = Some(table);
        self
    }

    pub fn id(&self) -> &str {
        &self.meta.doc_id
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    /// Length in Unicode scalar values.
    pub fn char_len(&self) -> usize {
        self.char_len
    }

    /// Substring by character offsets, clamped to the text.
    pub fn slice_chars(&self, start: usize, end: usize) -> &str {
        let end = end.min(self.char_len);
        let start = start.min(end);
        if self.raw_text.len() == self.char_len {
            return &self.raw_text[start..end];
        }
        let mut idx = self.raw_text.char_indices().map(|(b, _)| b);
        let b_start = idx.nth(start).unwrap_or(self.raw_text.len());
        let b_end = if end == start {
            b_start
        } else {
            idx.nth(end - start - 1).unwrap_or(self.raw_text.len())
        };
        &self.raw_text[b_start..b_end]
    }

    /// Page of a raw offset, falling back to synthetic pagination.
    pub fn page_of(&self, raw_off: usize) -> u32 {
        self.page_map
            .as_ref()
            .and_then(|m| m.offset_to_page(raw_off))
            .unwrap_or_else(|| crate::offsetmap::fallback_page(raw_off))
    }
}

/// Immutable set of documents indexed by id.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn from_documents(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut by_id = HashMap::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            if doc.meta.doc_id.is_empty() {
                return Err(CorpusError::EmptyId { line: i + 2 });
            }
            if by_id.insert(doc.meta.doc_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId {
                    id: doc.meta.doc_id.clone(),
                    line: i + 2,
                });
            }
        }
        Ok(Self { documents, by_id })
    }

    /// Loads a corpus directory.
    pub fn ingest(root: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let root = root.as_ref();
        let meta_path = root.join("metadata.tsv");
        let text = read_string(&meta_path)?;

        let mut metas: Vec<DocMetadata> = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut pending: Option<CorpusError> = None;
        tsv::for_each_row(&text, &METADATA_COLUMNS, |row| {
            let doc_id = row.str(0).to_string();
            if doc_id.is_empty() {
                pending = Some(CorpusError::EmptyId { line: row.line });
                return Err(row.error(0, "empty"));
            }
            let year: i32 = row.parse(1)?;
            if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
                pending = Some(CorpusError::YearOutOfRange {
                    line: row.line,
                    year,
                });
                return Err(row.error(1, "out of range"));
            }
            if seen.insert(doc_id.clone(), row.line).is_some() {
                pending = Some(CorpusError::DuplicateId {
                    id: doc_id,
                    line: row.line,
                });
                return Err(row.error(0, "duplicate"));
            }
            metas.push(DocMetadata {
                doc_id,
                year,
                author: row.str(2).to_string(),
                title: row.str(3).to_string(),
                collection: row.str(4).to_string(),
            });
            Ok(())
        })
        .map_err(|e| pending.take().unwrap_or(CorpusError::Metadata(e)))?;

        let mut documents = Vec::with_capacity(metas.len());
        for meta in metas {
            let id = meta.doc_id.clone();
            let text_path = root.join("texts").join(format!("{id}.txt"));
            let bytes = match fs::read(&text_path) {
                Ok(b) => b,
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    return Err(CorpusError::MissingText {
                        id,
                        path: text_path,
                    })
                }
                Err(source) => {
                    return Err(CorpusError::Io {
                        path: text_path,
                        source,
                    })
                }
            };
            let raw = String::from_utf8(bytes).map_err(|_| CorpusError::InvalidUtf8 { id: id.clone() })?;
            let mut doc = Document::new(meta, raw)?;
            let len = doc.char_len();
            let offsets = |source| CorpusError::Offsets {
                id: id.clone(),
                source,
            };

            let ann_path = root.join("annotations").join(format!("{id}.tsv"));
            if ann_path.is_file() {
                let table = OffsetShiftTable::from_tsv(&read_string(&ann_path)?, len).map_err(offsets)?;
                doc.shift_table = Some(table);
            }
            let map_path = root.join("pagemaps").join(format!("{id}.tsv"));
            if map_path.is_file() {
                let map = PageMap::from_tsv(&read_string(&map_path)?, len).map_err(offsets)?;
                doc.page_map = Some(map);
            }
            documents.push(doc);
        }
        Self::from_documents(documents)
    }

    /// Writes the corpus in the directory layout [`Corpus::ingest`] reads.
    pub fn write_to(&self, root: impl AsRef<Path>) -> Result<(), CorpusError> {
        let root = root.as_ref();
        let mkdir = |p: PathBuf| fs::create_dir_all(&p).map_err(|source| CorpusError::Io { path: p, source });
        mkdir(root.join("texts"))?;

        let mut meta = METADATA_COLUMNS.join("\t");
        meta.push('\n');
        for doc in &self.documents {
            let m = &doc.meta;
            for (field, value) in [
                ("doc_id", &m.doc_id),
                ("author", &m.author),
                ("title", &m.title),
                ("collection", &m.collection),
            ] {
                if value.contains(['\t', '\n', '\r']) {
                    return Err(CorpusError::UnwritableField {
                        id: m.doc_id.clone(),
                        field,
                    });
                }
            }
            meta.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                m.doc_id, m.year, m.author, m.title, m.collection
            ));
            write_file(&root.join("texts").join(format!("{}.txt", m.doc_id)), &doc.raw_text)?;
            if let Some(table) = &doc.shift_table {
                mkdir(root.join("annotations"))?;
                let mut out = crate::offsetmap::SHIFT_COLUMNS.join("\t");
                out.push('\n');
                for ins in table.insertions() {
                    out.push_str(&format!("{}\t{}\n", ins.raw_position, ins.inserted_length));
                }
                write_file(&root.join("annotations").join(format!("{}.tsv", m.doc_id)), &out)?;
            }
            if let Some(map) = &doc.page_map {
                mkdir(root.join("pagemaps"))?;
                write_file(&root.join("pagemaps").join(format!("{}.tsv", m.doc_id)), &map.to_tsv())?;
            }
        }
        write_file(&root.join("metadata.tsv"), &meta)
    }

    pub fn get(&self, doc_id: &str) -> Result<&Document, CorpusError> {
        self.index_of(doc_id)
            .map(|i| &self.documents[i])
            .ok_or_else(|| CorpusError::NotFound(doc_id.to_string()))
    }

    pub fn index_of(&self, doc_id: &str) -> Option<usize> {
        self.by_id.get(doc_id).copied()
    }

    pub fn doc(&self, index: usize) -> &Document {
        &self.documents[index]
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.documents.iter()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn total_chars(&self) -> usize {
        self.documents.iter().map(Document::char_len).sum()
    }
}

fn read_string(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CorpusError> {
    fs::write(path, contents).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}
