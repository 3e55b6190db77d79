use rustc_hash::FxHashMap;

use super::normalize::NormalizedText;

const HASH_BASE: u64 = 0x100_0000_01b3;

/// Polynomial hashes of every k-gram of `text`, by start position.
pub fn gram_hashes(text: &[char], k: usize) -> Vec<u64> {
    if k == 0 || text.len() < k {
        return Vec::new();
    }
    let top = HASH_BASE.wrapping_pow(k as u32 - 1);
    let mut out = Vec::with_capacity(text.len() - k + 1);
    let mut h = 0u64;
    for &c in &text[..k] {
        h = h.wrapping_mul(HASH_BASE).wrapping_add(c as u64);
    }
    out.push(h);
    for i in k..text.len() {
        h = h
            .wrapping_sub((text[i - k] as u64).wrapping_mul(top))
            .wrapping_mul(HASH_BASE)
            .wrapping_add(text[i] as u64);
        out.push(h);
    }
    out
}

/// Positions of every k-gram in one normalized text.
///
/// Grams made only of spaces are not indexed. Lookups verify the gram text,
/// so hash collisions never produce false positions.
#[derive(Debug, Clone)]
pub struct KmerIndex<'a> {
    text: &'a [char],
    k: usize,
    // hash -> range into `positions`
    ranges: FxHashMap<u64, (u32, u32)>,
    positions: Vec<u32>,
}

impl<'a> KmerIndex<'a> {
    pub fn build(doc: &'a NormalizedText, k: usize) -> Self {
        let text = doc.chars();
        let mut pairs: Vec<(u64, u32)> = gram_hashes(text, k)
            .into_iter()
            .enumerate()
            .filter(|&(p, _)| text[p..p + k].iter().any(|&c| c != ' '))
            .map(|(p, h)| (h, p as u32))
            .collect();
        pairs.sort_unstable();

        let mut ranges = FxHashMap::default();
        ranges.reserve(pairs.len());
        let mut start = 0;
        while start < pairs.len() {
            let h = pairs[start].0;
            let mut end = start + 1;
            while end < pairs.len() && pairs[end].0 == h {
                end += 1;
            }
            ranges.insert(h, (start as u32, end as u32));
            start = end;
        }
        let positions = pairs.into_iter().map(|(_, p)| p).collect();
        Self {
            text,
            k,
            ranges,
            positions,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn text(&self) -> &'a [char] {
        self.text
    }

    /// Candidate positions sharing `hash`; may include collisions.
    pub(crate) fn bucket(&self, hash: u64) -> &[u32] {
        match self.ranges.get(&hash) {
            Some(&(s, e)) => &self.positions[s as usize..e as usize],
            None => &[],
        }
    }

    /// Sorted start positions of `gram`.
    pub fn positions(&self, gram: &[char]) -> Vec<u32> {
        if gram.len() != self.k {
            return Vec::new();
        }
        let h = gram_hashes(gram, self.k)[0];
        self.bucket(h)
            .iter()
            .copied()
            .filter(|&p| &self.text[p as usize..p as usize + self.k] == gram)
            .collect()
    }

    /// Distinct indexed k-grams with their positions.
    pub fn entries(&self) -> Vec<(String, Vec<u32>)> {
        let mut out: FxHashMap<&[char], Vec<u32>> = FxHashMap::default();
        for &p in &self.positions {
            out.entry(&self.text[p as usize..p as usize + self.k])
                .or_default()
                .push(p);
        }
        let mut v: Vec<_> = out
            .into_iter()
            .map(|(g, mut ps)| {
                ps.sort_unstable();
                (g.iter().collect::<String>(), ps)
            })
            .collect();
        v.sort();
        v
    }

    pub fn total_positions(&self) -> usize {
        self.positions.len()
    }
}
