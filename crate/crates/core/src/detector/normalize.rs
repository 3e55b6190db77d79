use serde::Serialize;

/// Detection alphabet view of a raw text.
///
/// Lowercase letters and digits, with every run of anything else collapsed to
/// one space. `to_raw[i]` is the raw character offset that produced `chars[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedText {
    chars: Vec<char>,
    to_raw: Vec<u32>,
    raw_len: usize,
}

impl NormalizedText {
    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn to_raw(&self) -> &[u32] {
        &self.to_raw
    }

    pub fn as_string(&self) -> String {
        self.chars.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn raw_len(&self) -> usize {
        self.raw_len
    }

    /// Raw half-open span covering normalized positions `[start, end)`.
    pub fn raw_span(&self, start: usize, end: usize) -> (usize, usize) {
        debug_assert!(start < end && end <= self.len());
        (self.to_raw[start] as usize, self.to_raw[end - 1] as usize + 1)
    }
}

pub fn normalize(raw_text: &str) -> NormalizedText {
    let mut chars = Vec::with_capacity(raw_text.len());
    let mut to_raw = Vec::with_capacity(raw_text.len());
    let mut pending_space: Option<u32> = None;
    let mut raw_len = 0usize;

    for (i, c) in raw_text.chars().enumerate() {
        raw_len = i + 1;
        let i = i as u32;
        if !c.is_alphanumeric() {
            pending_space.get_or_insert(i);
            continue;
        }
        let mut emit = |ch: char| {
            if let Some(at) = pending_space.take() {
                if !chars.is_empty() {
                    chars.push(' ');
                    to_raw.push(at);
                }
            }
            chars.push(ch);
            to_raw.push(i);
        };
        if c == '\u{17f}' {
            emit('s');
        } else if c.is_ascii() {
            emit(c.to_ascii_lowercase());
        } else {
            for lc in c.to_lowercase().filter(|l| l.is_alphanumeric()) {
                emit(lc);
            }
        }
    }
    NormalizedText {
        chars,
        to_raw,
        raw_len,
    }
}
