//! Offset translation between raw text and annotation-augmented text, and
//! resolution of raw offsets to pages and word boxes.
//!
//! All offsets count Unicode scalar values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tsv::{self, TsvError};

/// Raw characters per page when a document carries no page map.
pub const FALLBACK_PAGE_CHARS: usize = 1800;

pub const SHIFT_COLUMNS: [&str; 2] = ["raw_position", "inserted_length"];
pub const PAGEMAP_COLUMNS: [&str; 7] = ["char_start", "char_end", "page", "x", "y", "w", "h"];

#[derive(Debug, Error, PartialEq)]
pub enum OffsetError {
    #[error("offset {offset} out of range (length {len})")]
    OutOfRange { offset: usize, len: usize },
    #[error("insertion at {position} must have positive length")]
    EmptyInsertion { position: usize },
    #[error("insertion positions must be strictly increasing ({prev} then {next})")]
    Unsorted { prev: usize, next: usize },
    #[error("insertion at {position} beyond raw length {len}")]
    InsertionOutOfRange { position: usize, len: usize },
    #[error("token {index}: invalid span [{start}, {end}) for text length {len}")]
    BadToken {
        index: usize,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("token {index}: overlaps or precedes the previous token")]
    TokenOrder { index: usize },
    #[error("token {index}: page {page} decreases or is zero")]
    PageOrder { index: usize, page: u32 },
    #[error(transparent)]
    Tsv(#[from] TsvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub raw_position: usize,
    pub inserted_length: usize,
}

/// Insertions that turn the raw text into the annotated text.
///
/// An insertion at `raw_position` places `inserted_length` characters
/// immediately before raw character `raw_position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetShiftTable {
    raw_len: usize,
    insertions: Vec<Insertion>,
    // cumulative inserted length up to and including insertion i
    cumulative: Vec<usize>,
}

impl OffsetShiftTable {
    pub fn new(raw_len: usize, insertions: Vec<Insertion>) -> Result<Self, OffsetError> {
        let mut cumulative = Vec::with_capacity(insertions.len());
        let mut total = 0;
        for (i, ins) in insertions.iter().enumerate() {
            if ins.inserted_length == 0 {
                return Err(OffsetError::EmptyInsertion {
                    position: ins.raw_position,
                });
            }
            if ins.raw_position > raw_len {
                return Err(OffsetError::InsertionOutOfRange {
                    position: ins.raw_position,
                    len: raw_len,
                });
            }
            if i > 0 && insertions[i - 1].raw_position >= ins.raw_position {
                return Err(OffsetError::Unsorted {
                    prev: insertions[i - 1].raw_position,
                    next: ins.raw_position,
                });
            }
            total += ins.inserted_length;
            cumulative.push(total);
        }
        Ok(Self {
            raw_len,
            insertions,
            cumulative,
        })
    }

    pub fn identity(raw_len: usize) -> Self {
        Self {
            raw_len,
            insertions: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    pub fn from_tsv(text: &str, raw_len: usize) -> Result<Self, OffsetError> {
        let mut insertions = Vec::new();
        tsv::for_each_row(text, &SHIFT_COLUMNS, |row| {
            insertions.push(Insertion {
                raw_position: row.parse(0)?,
                inserted_length: row.parse(1)?,
            });
            Ok(())
        })?;
        Self::new(raw_len, insertions)
    }

    pub fn insertions(&self) -> &[Insertion] {
        &self.insertions
    }

    pub fn raw_len(&self) -> usize {
        self.raw_len
    }

    pub fn annotated_len(&self) -> usize {
        self.raw_len + self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn raw_to_annotated(&self, raw_off: usize) -> Result<usize, OffsetError> {
        if raw_off > self.raw_len {
            return Err(OffsetError::OutOfRange {
                offset: raw_off,
                len: self.raw_len,
            });
        }
        let n = self
            .insertions
            .partition_point(|ins| ins.raw_position <= raw_off);
        Ok(raw_off + if n == 0 { 0 } else { self.cumulative[n - 1] })
    }

    /// Offsets inside an inserted region clamp to that insertion's raw position.
    pub fn annotated_to_raw(&self, ann_off: usize) -> Result<usize, OffsetError> {
        let len = self.annotated_len();
        if ann_off > len {
            return Err(OffsetError::OutOfRange {
                offset: ann_off,
                len,
            });
        }
        // inserted-region starts are strictly increasing in annotated space
        let region_start = |i: usize| {
            self.insertions[i].raw_position + if i == 0 { 0 } else { self.cumulative[i - 1] }
        };
        let (mut lo, mut hi) = (0, self.insertions.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if region_start(mid) <= ann_off {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let n = lo;
        if n == 0 {
            return Ok(ann_off);
        }
        let i = n - 1;
        let ins = self.insertions[i];
        if ann_off < ins.raw_position + self.cumulative[i] {
            Ok(ins.raw_position)
        } else {
            Ok(ann_off - self.cumulative[i])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageBox {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageToken {
    pub char_start: usize,
    pub char_end: usize,
    pub page: u32,
    #[serde(rename = "box")]
    pub bbox: PageBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub page: u32,
    pub char_start: usize,
    pub char_end: usize,
    #[serde(rename = "box")]
    pub bbox: PageBox,
}

/// Word-level page layout of one document, in raw offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageMap {
    tokens: Vec<PageToken>,
}

impl PageMap {
    /// Validates ordering: spans sorted and disjoint, pages non-decreasing and ≥ 1.
    pub fn new(tokens: Vec<PageToken>, text_len: usize) -> Result<Self, OffsetError> {
        for (index, tok) in tokens.iter().enumerate() {
            if tok.char_start >= tok.char_end || tok.char_end > text_len {
                return Err(OffsetError::BadToken {
                    index,
                    start: tok.char_start,
                    end: tok.char_end,
                    len: text_len,
                });
            }
            if tok.page == 0 {
                return Err(OffsetError::PageOrder {
                    index,
                    page: tok.page,
                });
            }
            if index > 0 {
                let prev = &tokens[index - 1];
                if tok.char_start < prev.char_end {
                    return Err(OffsetError::TokenOrder { index });
                }
                if tok.page < prev.page {
                    return Err(OffsetError::PageOrder {
                        index,
                        page: tok.page,
                    });
                }
            }
        }
        Ok(Self { tokens })
    }

    pub fn from_tsv(text: &str, text_len: usize) -> Result<Self, OffsetError> {
        let mut tokens = Vec::new();
        tsv::for_each_row(text, &PAGEMAP_COLUMNS, |row| {
            tokens.push(PageToken {
                char_start: row.parse(0)?,
                char_end: row.parse(1)?,
                page: row.parse(2)?,
                bbox: PageBox {
                    x: row.parse(3)?,
                    y: row.parse(4)?,
                    w: row.parse(5)?,
                    h: row.parse(6)?,
                },
            });
            Ok(())
        })?;
        Self::new(tokens, text_len)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = PAGEMAP_COLUMNS.join("\t");
        out.push('\n');
        for t in &self.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                t.char_start, t.char_end, t.page, t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h
            ));
        }
        out
    }

    pub fn tokens(&self) -> &[PageToken] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Page of the token containing `raw_off`; between tokens, the preceding
    /// token's page; before the first token, the first token's page.
    ///
    /// Returns `None` only for an empty map.
    pub fn offset_to_page(&self, raw_off: usize) -> Option<u32> {
        let first = self.tokens.first()?;
        let n = self.tokens.partition_point(|t| t.char_start <= raw_off);
        Some(if n == 0 { first.page } else { self.tokens[n - 1].page })
    }

    /// Boxes of every token overlapping `[start, end)`, in document order.
    pub fn highlight_regions(&self, start: usize, end: usize) -> Vec<Region> {
        if start >= end {
            return Vec::new();
        }
        let from = self.tokens.partition_point(|t| t.char_end <= start);
        self.tokens[from..]
            .iter()
            .take_while(|t| t.char_start < end)
            .map(|t| Region {
                page: t.page,
                char_start: t.char_start,
                char_end: t.char_end,
                bbox: t.bbox,
            })
            .collect()
    }

    /// Raw span `[first token start, last token end)` of `page`.
    pub fn page_span(&self, page: u32) -> Option<(usize, usize)> {
        let from = self.tokens.partition_point(|t| t.page < page);
        let to = self.tokens.partition_point(|t| t.page <= page);
        if from == to {
            return None;
        }
        Some((self.tokens[from].char_start, self.tokens[to - 1].char_end))
    }
}

/// Page used when no page map exists.
pub fn fallback_page(raw_off: usize) -> u32 {
    1 + (raw_off / FALLBACK_PAGE_CHARS) as u32
}
