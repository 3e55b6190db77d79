use serde::{Deserialize, Serialize};

use super::normalize::NormalizedText;

/// Seeding, scoring and acceptance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignParams {
    pub k: usize,
    pub match_score: i32,
    pub mismatch_score: i32,
    pub gap_score: i32,
    pub band: usize,
    pub x_drop: i32,
    pub min_align_length: u32,
    pub min_positives: f64,
    /// k-grams occurring more often than this in the target are not used as seeds.
    pub max_seed_occurrences: usize,
    /// Accepted alignments overlapping at least this fraction on both sides are
    /// duplicates; the higher-scoring one is kept.
    pub dedup_overlap: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self {
            k: 10,
            match_score: 2,
            mismatch_score: -2,
            gap_score: -3,
            band: 16,
            x_drop: 25,
            min_align_length: 120,
            min_positives: 70.0,
            max_seed_occurrences: 1000,
            dedup_overlap: 0.9,
        }
    }
}

/// An exact k-gram shared by query and target, in normalized offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SeedHit {
    pub q_pos: usize,
    pub t_pos: usize,
    pub k: usize,
}

impl SeedHit {
    pub fn diagonal(&self) -> i64 {
        self.t_pos as i64 - self.q_pos as i64
    }
}

/// Local alignment in normalized coordinates, half-open spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RawAlignment {
    pub q_start: usize,
    pub q_end: usize,
    pub t_start: usize,
    pub t_end: usize,
    pub score: i32,
    /// Alignment columns, counting matches, mismatches and gaps.
    pub columns: u32,
    pub identical: u32,
}

impl RawAlignment {
    pub fn positives_percent(&self) -> f64 {
        if self.columns == 0 {
            0.0
        } else {
            100.0 * self.identical as f64 / self.columns as f64
        }
    }

    pub fn passes(&self, params: &AlignParams) -> bool {
        self.columns >= params.min_align_length && self.positives_percent() >= params.min_positives
    }

    pub fn covers(&self, seed: &SeedHit) -> bool {
        (self.q_start..self.q_end).contains(&seed.q_pos) && (self.t_start..self.t_end).contains(&seed.t_pos)
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Extension {
    score: i32,
    a_used: usize,
    b_used: usize,
    columns: u32,
    identical: u32,
}

const DEAD: i32 = i32::MIN / 4;
const FROM_DIAG: u8 = 0;
const FROM_A: u8 = 1;
const FROM_B: u8 = 2;
const ORIGIN: u8 = 3;

/// One-directional banded extension from an anchor at (0, 0).
///
/// Row `i` consumes `i` characters of `a`, column `j` consumes `j` of `b`,
/// and only cells with `|j - i| <= band` are computed. A cell more than
/// `x_drop` below the best score seen so far is dead; the extension stops
/// once a whole row is dead. Returns the best-scoring endpoint with its
/// column counts.
fn extend_dir<A, B>(a: A, a_len: usize, b: B, b_len: usize, p: &AlignParams) -> Extension
where
    A: Fn(usize) -> char,
    B: Fn(usize) -> char,
{
    let w = p.band as isize;
    let width = 2 * p.band + 1;
    let mut prev = vec![DEAD; width];
    let mut cur = vec![DEAD; width];
    let mut trace: Vec<u8> = Vec::with_capacity(width * 64);

    let mut best = 0i32;
    let mut best_cell = (0usize, 0usize);

    // row 0: gaps in a
    trace.resize(width, ORIGIN);
    for d in 0..=w {
        let j = d as usize;
        if j > b_len {
            break;
        }
        let s = if j == 0 { 0 } else { prev[(d - 1 + w) as usize] + p.gap_score };
        if s < best - p.x_drop {
            break;
        }
        prev[(d + w) as usize] = s;
        trace[(d + w) as usize] = if j == 0 { ORIGIN } else { FROM_B };
    }

    let mut rows = 1usize;
    for i in 1..=a_len {
        cur.iter_mut().for_each(|c| *c = DEAD);
        let row_off = trace.len();
        trace.resize(row_off + width, ORIGIN);
        let ai = a(i - 1);
        let mut alive = false;
        let j_lo = (i as isize - w).max(0);
        let j_hi = (i as isize + w).min(b_len as isize);
        for j in j_lo..=j_hi {
            let d = j - i as isize;
            let idx = (d + w) as usize;
            let mut s = DEAD;
            let mut from = ORIGIN;
            if j >= 1 {
                let diag = prev[idx];
                if diag > DEAD {
                    let sub = if ai == b(j as usize - 1) {
                        p.match_score
                    } else {
                        p.mismatch_score
                    };
                    s = diag + sub;
                    from = FROM_DIAG;
                }
            }
            if idx + 1 < width && prev[idx + 1] > DEAD && prev[idx + 1] + p.gap_score > s {
                s = prev[idx + 1] + p.gap_score;
                from = FROM_A;
            }
            if idx >= 1 && cur[idx - 1] > DEAD && cur[idx - 1] + p.gap_score > s {
                s = cur[idx - 1] + p.gap_score;
                from = FROM_B;
            }
            if s <= DEAD || s < best - p.x_drop {
                continue;
            }
            cur[idx] = s;
            trace[row_off + idx] = from;
            alive = true;
            if s > best {
                best = s;
                best_cell = (i, j as usize);
            }
        }
        rows += 1;
        std::mem::swap(&mut prev, &mut cur);
        if !alive {
            break;
        }
    }
    debug_assert!(best_cell.0 < rows);

    let (mut i, mut j) = best_cell;
    let mut ext = Extension {
        score: best,
        a_used: i,
        b_used: j,
        ..Extension::default()
    };
    while i > 0 || j > 0 {
        let idx = (j as isize - i as isize + w) as usize;
        match trace[i * width + idx] {
            FROM_DIAG => {
                if a(i - 1) == b(j - 1) {
                    ext.identical += 1;
                }
                i -= 1;
                j -= 1;
            }
            FROM_A => i -= 1,
            FROM_B => j -= 1,
            _ => unreachable!("traceback reached origin marker at ({i}, {j})"),
        }
        ext.columns += 1;
    }
    ext
}

/// Extends `seed` in both directions without applying acceptance thresholds.
pub fn extend_unfiltered(
    query: &NormalizedText,
    target: &NormalizedText,
    seed: SeedHit,
    params: &AlignParams,
) -> RawAlignment {
    let q = query.chars();
    let t = target.chars();
    let (q0, t0, k) = (seed.q_pos, seed.t_pos, seed.k);
    debug_assert!(q0 + k <= q.len() && t0 + k <= t.len());

    let right = extend_dir(
        |i| q[q0 + k + i],
        q.len() - q0 - k,
        |j| t[t0 + k + j],
        t.len() - t0 - k,
        params,
    );
    let left = extend_dir(|i| q[q0 - 1 - i], q0, |j| t[t0 - 1 - j], t0, params);

    let seed_identical = (0..k).filter(|&o| q[q0 + o] == t[t0 + o]).count() as u32;
    let seed_score = seed_identical as i32 * params.match_score + (k as i32 - seed_identical as i32) * params.mismatch_score;
    RawAlignment {
        q_start: q0 - left.a_used,
        q_end: q0 + k + right.a_used,
        t_start: t0 - left.b_used,
        t_end: t0 + k + right.b_used,
        score: left.score + seed_score + right.score,
        columns: left.columns + k as u32 + right.columns,
        identical: left.identical + seed_identical + right.identical,
    }
}

/// Gapped X-drop extension of a seed; `None` when the alignment is below the
/// length or identity thresholds.
pub fn extend_seed(
    query: &NormalizedText,
    target: &NormalizedText,
    seed: SeedHit,
    params: &AlignParams,
) -> Option<RawAlignment> {
    let aln = extend_unfiltered(query, target, seed, params);
    aln.passes(params).then_some(aln)
}
