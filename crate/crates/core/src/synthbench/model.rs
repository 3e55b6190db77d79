use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

const BUILTIN_SOURCE: &str = include_str!("background.txt");

/// Character trigram model: the next character is drawn conditioned on the
/// previous two.
#[derive(Debug, Clone)]
pub struct BackgroundModel {
    table: BTreeMap<[char; 2], (Vec<char>, WeightedIndex<u32>)>,
    // contexts that begin a word, used to (re)start sampling
    starts: Vec<[char; 2]>,
}

impl BackgroundModel {
    /// Builds the model from `source`, with whitespace runs collapsed to one
    /// space. Returns `None` if the source has fewer than three characters.
    pub fn from_text(source: &str) -> Option<Self> {
        let chars: Vec<char> = source.split_whitespace().flat_map(|w| w.chars().chain([' '])).collect();
        if chars.len() < 3 {
            return None;
        }
        let mut counts: BTreeMap<[char; 2], BTreeMap<char, u32>> = BTreeMap::new();
        for w in chars.windows(3) {
            *counts.entry([w[0], w[1]]).or_default().entry(w[2]).or_default() += 1;
        }
        let mut starts: Vec<[char; 2]> = counts.keys().filter(|c| c[0] == ' ' && c[1] != ' ').copied().collect();
        if starts.is_empty() {
            starts = counts.keys().copied().collect();
        }
        let table = counts
            .into_iter()
            .map(|(ctx, next)| {
                let (symbols, weights): (Vec<char>, Vec<u32>) = next.into_iter().unzip();
                let dist = WeightedIndex::new(weights).expect("positive counts");
                (ctx, (symbols, dist))
            })
            .collect();
        Some(Self { table, starts })
    }

    /// Model over the bundled prose sample.
    pub fn builtin() -> Self {
        Self::from_text(BUILTIN_SOURCE).expect("bundled source is non-trivial")
    }

    pub fn contexts(&self) -> usize {
        self.table.len()
    }

    /// Samples exactly `len` characters.
    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> String {
        let mut out = String::with_capacity(len + 8);
        let mut n = 0;
        let mut ctx = self.restart(rng);
        while n < len {
            let Some((symbols, dist)) = self.table.get(&ctx) else {
                // dead end at the end of the source; start a new word
                if n + 1 < len {
                    out.push(' ');
                    n += 1;
                }
                ctx = self.restart(rng);
                continue;
            };
            let c = symbols[dist.sample(rng)];
            out.push(c);
            n += 1;
            ctx = [ctx[1], c];
        }
        out
    }

    fn restart<R: Rng + ?Sized>(&self, rng: &mut R) -> [char; 2] {
        self.starts[rng.gen_range(0..self.starts.len())]
    }
}
