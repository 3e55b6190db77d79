//! C ABI over the `textreuse` library.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! [`TrStatus`]; on failure [`tr_last_error`] describes the problem for the
//! calling thread. Strings returned to the caller are freed with
//! [`tr_string_free`]. Offsets are in Unicode scalar values.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use textreuse::consolidate::{self, DefragParams};
use textreuse::edge::{self, Edge};
use textreuse::edgestore::{Direction, EdgeQuery, EdgeStore, StoreError};
use textreuse::{detector, metasearch, AlignParams, Corpus, CorpusError, Document};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    NotFound = 5,
    OutOfRange = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrDirection {
    In = 0,
    Out = 1,
    Both = 2,
}

/// Detection parameters; start from [`tr_align_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrAlignParams {
    pub k: usize,
    pub min_align_length: u32,
    pub min_positives: f64,
    pub max_seed_occurrences: usize,
}

/// Borrowed view of one edge; the id strings live as long as the edge set.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrEdge {
    pub t1_id: *const c_char,
    pub t1_start: usize,
    pub t1_end: usize,
    pub t2_id: *const c_char,
    pub t2_start: usize,
    pub t2_end: usize,
    pub align_length: u32,
    pub positives_percent: f64,
}

/// Filters for [`tr_store_query_json`]. Year bounds apply only when the
/// matching `has_` flag is non-zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TrQuery {
    pub direction: TrDirection,
    pub has_year_from: u8,
    pub year_from: i32,
    pub has_year_to: u8,
    pub year_to: i32,
    pub exclude_same_author: u8,
}

/// A loaded corpus.
pub struct TrCorpus {
    inner: Arc<Corpus>,
}

/// An owned list of edges.
pub struct TrEdges {
    edges: Vec<Edge>,
    // NUL-terminated copies of t1_id / t2_id per edge
    ids: Vec<(CString, CString)>,
}

/// An edge store bound to the corpus it was built from.
pub struct TrStore {
    corpus: Arc<Corpus>,
    store: EdgeStore,
}

impl TrEdges {
    fn new(edges: Vec<Edge>) -> Self {
        let ids = edges
            .iter()
            .map(|e| (cstring_lossy(&e.t1_id), cstring_lossy(&e.t2_id)))
            .collect();
        Self { edges, ids }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn cstring_lossy(s: &str) -> CString {
    CString::new(s.replace('\0', "\u{fffd}")).expect("NUL bytes replaced")
}

struct Failure(TrStatus, String);

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let status = match &e {
            CorpusError::Io { .. } | CorpusError::MissingText { .. } => TrStatus::Io,
            CorpusError::NotFound(_) => TrStatus::NotFound,
            CorpusError::InvalidUtf8 { .. } => TrStatus::InvalidUtf8,
            _ => TrStatus::Parse,
        };
        Failure(status, error_chain(&e))
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::NotFound(_) | StoreError::UnknownDoc { .. } => TrStatus::NotFound,
            StoreError::SpanOutOfRange { .. } => TrStatus::OutOfRange,
            StoreError::InvalidYears { .. } => TrStatus::InvalidArgument,
            StoreError::File(_) => TrStatus::Parse,
        };
        Failure(status, error_chain(&e))
    }
}

impl From<edge::EdgeFileError> for Failure {
    fn from(e: edge::EdgeFileError) -> Self {
        let status = match &e {
            edge::EdgeFileError::Io { .. } => TrStatus::Io,
            _ => TrStatus::Parse,
        };
        Failure(status, error_chain(&e))
    }
}

fn error_chain(e: &dyn std::error::Error) -> String {
    let mut msg = e.to_string();
    let mut src = e.source();
    while let Some(s) = src {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        src = s.source();
    }
    msg
}

fn set_error(msg: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring_lossy(&msg)));
}

/// Runs `f`, converting failures and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> TrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            TrStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TrStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TrStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TrStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn doc<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a Document, Failure> {
    corpus.get(id).map_err(Failure::from)
}

fn into_c_string(s: String) -> *mut c_char {
    cstring_lossy(&s).into_raw()
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn tr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a corpus directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tr_corpus_open(path: *const c_char, out: *mut *mut TrCorpus) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let corpus = Corpus::ingest(Path::new(path))?;
        *out = Box::into_raw(Box::new(TrCorpus {
            inner: Arc::new(corpus),
        }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from [`tr_corpus_open`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tr_corpus_free(corpus: *mut TrCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of documents; 0 for null.
///
/// # Safety
/// `corpus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tr_corpus_len(corpus: *const TrCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// Pointers must be valid; `doc_id` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tr_corpus_doc_len(corpus: *const TrCorpus, doc_id: *const c_char, out: *mut usize) -> TrStatus {
    guard(|| {
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        *out = doc(&c.inner, str_arg(doc_id, "doc_id")?)?.char_len();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tr_align_params_default() -> TrAlignParams {
    let d = AlignParams::default();
    TrAlignParams {
        k: d.k,
        min_align_length: d.min_align_length,
        min_positives: d.min_positives,
        max_seed_occurrences: d.max_seed_occurrences,
    }
}

/// Runs all-pairs detection. `params` may be null for defaults.
///
/// # Safety
/// `corpus` must be a live handle, `params` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_detect(
    corpus: *const TrCorpus,
    params: *const TrAlignParams,
    out: *mut *mut TrEdges,
) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let c = ref_arg(corpus, "corpus")?;
        let p = params.as_ref().copied().unwrap_or_else(|| tr_align_params_default());
        if p.k == 0 || !(0.0..=100.0).contains(&p.min_positives) {
            return Err(Failure(TrStatus::InvalidArgument, "k must be positive and min_positives in [0, 100]".into()));
        }
        let params = AlignParams {
            k: p.k,
            min_align_length: p.min_align_length,
            min_positives: p.min_positives,
            max_seed_occurrences: p.max_seed_occurrences,
            ..AlignParams::default()
        };
        let edges = detector::detect_corpus(&c.inner, &params);
        *out = Box::into_raw(Box::new(TrEdges::new(edges)));
        Ok(())
    })
}

/// Reads an edge file.
///
/// # Safety
/// `path` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_edges_read(path: *const c_char, out: *mut *mut TrEdges) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let edges = edge::read_edges(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(TrEdges::new(edges)));
        Ok(())
    })
}

/// Writes an edge file.
///
/// # Safety
/// `edges` live, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tr_edges_write(edges: *const TrEdges, path: *const c_char) -> TrStatus {
    guard(|| {
        let e = ref_arg(edges, "edges")?;
        let path = str_arg(path, "path")?;
        let file = std::fs::File::create(path).map_err(|err| Failure(TrStatus::Io, format!("{path}: {err}")))?;
        edge::write_edges(std::io::BufWriter::new(file), &e.edges)
            .map_err(|err| Failure(TrStatus::Io, format!("{path}: {err}")))
    })
}

/// Number of edges; 0 for null.
///
/// # Safety
/// `edges` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tr_edges_len(edges: *const TrEdges) -> usize {
    edges.as_ref().map_or(0, |e| e.edges.len())
}

/// Copies edge `index` into `out`; its strings borrow from `edges`.
///
/// # Safety
/// `edges` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_edges_get(edges: *const TrEdges, index: usize, out: *mut TrEdge) -> TrStatus {
    guard(|| {
        let e = ref_arg(edges, "edges")?;
        let out = out_arg(out, "out")?;
        let edge = e.edges.get(index).ok_or_else(|| {
            Failure(TrStatus::OutOfRange, format!("index {index} beyond {} edges", e.edges.len()))
        })?;
        let (id1, id2) = &e.ids[index];
        *out = TrEdge {
            t1_id: id1.as_ptr(),
            t1_start: edge.t1_start,
            t1_end: edge.t1_end,
            t2_id: id2.as_ptr(),
            t2_start: edge.t2_start,
            t2_end: edge.t2_end,
            align_length: edge.align_length,
            positives_percent: edge.positives_percent,
        };
        Ok(())
    })
}

/// # Safety
/// `edges` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tr_edges_free(edges: *mut TrEdges) {
    if !edges.is_null() {
        drop(Box::from_raw(edges));
    }
}

/// Merges fragmented edges; a negative limit selects its default.
///
/// # Safety
/// `edges` live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_defragment(
    edges: *const TrEdges,
    gap_limit: i64,
    diag_limit: i64,
    out: *mut *mut TrEdges,
) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let e = ref_arg(edges, "edges")?;
        let d = DefragParams::default();
        let params = DefragParams {
            gap_limit: if gap_limit < 0 { d.gap_limit } else { gap_limit },
            diag_limit: if diag_limit < 0 { d.diag_limit } else { diag_limit },
            ..d
        };
        *out = Box::into_raw(Box::new(TrEdges::new(consolidate::defragment(&e.edges, &params))));
        Ok(())
    })
}

/// Builds a queryable store; the edges are copied.
///
/// # Safety
/// Handles live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_store_new(corpus: *const TrCorpus, edges: *const TrEdges, out: *mut *mut TrStore) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let c = ref_arg(corpus, "corpus")?;
        let e = ref_arg(edges, "edges")?;
        let store = EdgeStore::from_edges(e.edges.clone(), &c.inner)?;
        *out = Box::into_raw(Box::new(TrStore {
            corpus: Arc::clone(&c.inner),
            store,
        }));
        Ok(())
    })
}

/// # Safety
/// `store` must come from [`tr_store_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tr_store_free(store: *mut TrStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Incoming and outgoing edge counts of a document (same-author excluded).
///
/// # Safety
/// `store` live, `doc_id` NUL-terminated, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tr_store_counts(
    store: *const TrStore,
    doc_id: *const c_char,
    in_count: *mut usize,
    out_count: *mut usize,
) -> TrStatus {
    guard(|| {
        let s = ref_arg(store, "store")?;
        let id = str_arg(doc_id, "doc_id")?;
        let in_count = out_arg(in_count, "in_count")?;
        let out_count = out_arg(out_count, "out_count")?;
        let (i, o) = s.store.counts(id, &s.corpus)?;
        *in_count = i;
        *out_count = o;
        Ok(())
    })
}

/// Edges of a document as a JSON array; free with [`tr_string_free`].
/// `query` may be null for outgoing edges with same-author exclusion.
///
/// # Safety
/// `store` live, `doc_id` NUL-terminated, `query` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_store_query_json(
    store: *const TrStore,
    doc_id: *const c_char,
    query: *const TrQuery,
    out: *mut *mut c_char,
) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = ref_arg(store, "store")?;
        let id = str_arg(doc_id, "doc_id")?;
        let mut q = EdgeQuery::new(id, Direction::Out);
        if let Some(t) = query.as_ref() {
            let direction = match t.direction {
                TrDirection::In => Direction::In,
                TrDirection::Out => Direction::Out,
                TrDirection::Both => Direction::Both,
            };
            q = EdgeQuery::new(id, direction)
                .years((t.has_year_from != 0).then_some(t.year_from), (t.has_year_to != 0).then_some(t.year_to))
                .exclude_same_author(t.exclude_same_author != 0);
        }
        let rows = s.store.query(&q, &s.corpus)?;
        let json = serde_json::to_string(&rows).map_err(|e| Failure(TrStatus::Parse, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Metadata search results as a JSON array; free with [`tr_string_free`].
///
/// # Safety
/// `corpus` live, `query` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_search_json(corpus: *const TrCorpus, query: *const c_char, out: *mut *mut c_char) -> TrStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let c = ref_arg(corpus, "corpus")?;
        let results = metasearch::search(&c.inner, str_arg(query, "query")?);
        let json = serde_json::to_string(&results).map_err(|e| Failure(TrStatus::Parse, e.to_string()))?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Raw to annotated offset; identity when the document has no annotation table.
///
/// # Safety
/// `corpus` live, `doc_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_raw_to_annotated(
    corpus: *const TrCorpus,
    doc_id: *const c_char,
    raw_offset: usize,
    out: *mut usize,
) -> TrStatus {
    guard(|| {
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let d = doc(&c.inner, str_arg(doc_id, "doc_id")?)?;
        let range = |e: textreuse::offsetmap::OffsetError| Failure(TrStatus::OutOfRange, e.to_string());
        *out = match &d.shift_table {
            Some(t) => t.raw_to_annotated(raw_offset).map_err(range)?,
            None if raw_offset <= d.char_len() => raw_offset,
            None => return Err(Failure(TrStatus::OutOfRange, format!("offset {raw_offset} beyond {}", d.char_len()))),
        };
        Ok(())
    })
}

/// Annotated to raw offset; offsets inside inserted text map to the
/// insertion point.
///
/// # Safety
/// `corpus` live, `doc_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_annotated_to_raw(
    corpus: *const TrCorpus,
    doc_id: *const c_char,
    annotated_offset: usize,
    out: *mut usize,
) -> TrStatus {
    guard(|| {
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let d = doc(&c.inner, str_arg(doc_id, "doc_id")?)?;
        let range = |e: textreuse::offsetmap::OffsetError| Failure(TrStatus::OutOfRange, e.to_string());
        *out = match &d.shift_table {
            Some(t) => t.annotated_to_raw(annotated_offset).map_err(range)?,
            None if annotated_offset <= d.char_len() => annotated_offset,
            None => {
                return Err(Failure(
                    TrStatus::OutOfRange,
                    format!("offset {annotated_offset} beyond {}", d.char_len()),
                ))
            }
        };
        Ok(())
    })
}

/// Page of a raw offset, with synthetic pagination when there is no page map.
///
/// # Safety
/// `corpus` live, `doc_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tr_offset_to_page(
    corpus: *const TrCorpus,
    doc_id: *const c_char,
    raw_offset: usize,
    out: *mut u32,
) -> TrStatus {
    guard(|| {
        let c = ref_arg(corpus, "corpus")?;
        let out = out_arg(out, "out")?;
        let d = doc(&c.inner, str_arg(doc_id, "doc_id")?)?;
        if raw_offset > d.char_len() {
            return Err(Failure(TrStatus::OutOfRange, format!("offset {raw_offset} beyond {}", d.char_len())));
        }
        *out = d.page_of(raw_offset);
        Ok(())
    })
}
