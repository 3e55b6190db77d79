//! Metadata search over author and title, with prefix and fuzzy term matching.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;

pub const MAX_RESULTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Shortest term allowed to match as a prefix.
    pub min_prefix_len: usize,
    /// Shortest term and token allowed to match by edit distance.
    pub min_fuzzy_len: usize,
    pub max_edit_distance: usize,
    pub max_results: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            min_prefix_len: 3,
            min_fuzzy_len: 5,
            max_edit_distance: 1,
            max_results: MAX_RESULTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub doc_id: String,
    pub year: i32,
    pub author: String,
    pub title: String,
    /// Number of distinct query terms matched.
    pub score: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("unknown sort column `{0}`")]
    UnknownColumn(String),
}

fn tokens(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Lowercased, deduplicated query terms with surrounding punctuation trimmed.
pub fn query_terms(query: &str) -> Vec<String> {
    let mut terms: Vec<String> = Vec::new();
    for raw in query.split_whitespace() {
        let t = raw.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
        if !t.is_empty() && !terms.contains(&t) {
            terms.push(t);
        }
    }
    terms
}

pub fn term_matches(term: &str, token: &str, p: &SearchParams) -> bool {
    if term == token {
        return true;
    }
    let term_len = term.chars().count();
    if term_len >= p.min_prefix_len && token.starts_with(term) {
        return true;
    }
    let token_len = token.chars().count();
    term_len >= p.min_fuzzy_len
        && token_len >= p.min_fuzzy_len
        && term_len.abs_diff(token_len) <= p.max_edit_distance
        && strsim::damerau_levenshtein(term, token) <= p.max_edit_distance
}

/// Author and title tokens of every document, over a shared vocabulary.
#[derive(Debug, Clone, Default)]
pub struct MetaIndex {
    vocab: Vec<String>,
    // per corpus document: sorted, deduplicated vocabulary ids
    doc_tokens: Vec<Vec<u32>>,
}

impl MetaIndex {
    pub fn new(corpus: &Corpus) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut vocab = Vec::new();
        let doc_tokens = corpus
            .iter()
            .map(|doc| {
                let m = &doc.meta;
                let mut toks: Vec<u32> = tokens(&m.author)
                    .chain(tokens(&m.title))
                    .map(|t| {
                        *ids.entry(t).or_insert_with_key(|t| {
                            vocab.push(t.clone());
                            vocab.len() as u32 - 1
                        })
                    })
                    .collect();
                toks.sort_unstable();
                toks.dedup();
                toks
            })
            .collect();
        Self { vocab, doc_tokens }
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocab.len()
    }

    /// Scores every document by matched terms; ranks by score descending,
    /// then year ascending, then doc_id. `corpus` must be the indexed corpus.
    pub fn search(&self, corpus: &Corpus, query: &str, params: &SearchParams) -> Vec<SearchResult> {
        let terms = query_terms(query);
        if terms.is_empty() {
            return Vec::new();
        }
        // bit i of mask[v] set when term i matches vocabulary entry v
        let mut mask = vec![0u64; self.vocab.len()];
        for (i, term) in terms.iter().take(64).enumerate() {
            for (v, tok) in self.vocab.iter().enumerate() {
                if term_matches(term, tok, params) {
                    mask[v] |= 1 << i;
                }
            }
        }
        let mut hits: Vec<SearchResult> = self
            .doc_tokens
            .iter()
            .enumerate()
            .filter_map(|(d, toks)| {
                let bits = toks.iter().fold(0u64, |acc, &v| acc | mask[v as usize]);
                (bits != 0).then(|| {
                    let m = &corpus.doc(d).meta;
                    SearchResult {
                        doc_id: m.doc_id.clone(),
                        year: m.year,
                        author: m.author.clone(),
                        title: m.title.clone(),
                        score: bits.count_ones(),
                    }
                })
            })
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .cmp(&a.score)
                .then(a.year.cmp(&b.year))
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        hits.truncate(params.max_results);
        hits
    }
}

pub fn search(corpus: &Corpus, query: &str) -> Vec<SearchResult> {
    search_with(corpus, query, &SearchParams::default())
}

pub fn search_with(corpus: &Corpus, query: &str, params: &SearchParams) -> Vec<SearchResult> {
    MetaIndex::new(corpus).search(corpus, query, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortColumn {
    DocId,
    Year,
    Author,
    Title,
    Score,
}

impl std::str::FromStr for SortColumn {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "doc_id" => SortColumn::DocId,
            "year" => SortColumn::Year,
            "author" => SortColumn::Author,
            "title" => SortColumn::Title,
            "score" => SortColumn::Score,
            other => return Err(SearchError::UnknownColumn(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortOrder {
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortState {
    pub column: SortColumn,
    pub order: SortOrder,
}

impl SortState {
    /// Header-click behaviour: the same column flips its order, a new column
    /// starts ascending.
    pub fn next(previous: Option<SortState>, column: SortColumn) -> SortState {
        let order = match previous {
            Some(p) if p.column == column && p.order == SortOrder::Asc => SortOrder::Desc,
            _ => SortOrder::Asc,
        };
        SortState { column, order }
    }
}

fn compare(a: &SearchResult, b: &SearchResult, column: SortColumn) -> Ordering {
    match column {
        SortColumn::DocId => a.doc_id.cmp(&b.doc_id),
        SortColumn::Year => a.year.cmp(&b.year),
        SortColumn::Author => a.author.cmp(&b.author),
        SortColumn::Title => a.title.cmp(&b.title),
        SortColumn::Score => a.score.cmp(&b.score),
    }
}

/// Stable re-sort by one column; rows that tie keep their previous order.
pub fn resort(mut results: Vec<SearchResult>, column: SortColumn, order: SortOrder) -> Vec<SearchResult> {
    match order {
        SortOrder::Asc => results.sort_by(|a, b| compare(a, b, column)),
        SortOrder::Desc => results.sort_by(|a, b| compare(b, a, column)),
    }
    results
}

/// [`resort`] with the column given by name.
pub fn resort_by_name(results: Vec<SearchResult>, column: &str, order: SortOrder) -> Result<Vec<SearchResult>, SearchError> {
    Ok(resort(results, column.parse()?, order))
}
