use rand::Rng;

/// OCR-style confusions tried before a random substitution.
pub const CONFUSIONS: [(&str, &str); 6] = [("s", "f"), ("f", "s"), ("e", "c"), ("c", "e"), ("rn", "m"), ("m", "rn")];

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

/// Per-character error channel. Each input character independently starts
/// an error event with probability `rate`: a substitution (60%), an
/// insertion (20%) or a deletion (20%). Substitutions use a confusion pair
/// half of the time when one applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    pub rate: f64,
}

fn random_letter<R: Rng + ?Sized>(rng: &mut R) -> char {
    ALPHABET[rng.gen_range(0..ALPHABET.len())] as char
}

impl NoiseChannel {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "noise rate {rate} outside [0, 1)");
        Self { rate }
    }

    pub fn corrupt<R: Rng + ?Sized>(&self, text: &str, rng: &mut R) -> String {
        if self.rate == 0.0 {
            return text.to_string();
        }
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len() + text.len() / 8);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if !rng.gen_bool(self.rate) {
                out.push(c);
                i += 1;
                continue;
            }
            match rng.gen_range(0..10) {
                0..=5 => {
                    let confusion = CONFUSIONS.iter().find(|(from, _)| {
                        let n = from.chars().count();
                        i + n <= chars.len() && chars[i..i + n].iter().copied().eq(from.chars())
                    });
                    match confusion {
                        Some((from, to)) if rng.gen_bool(0.5) => {
                            out.push_str(to);
                            i += from.chars().count();
                        }
                        _ => {
                            let mut r = random_letter(rng);
                            while r == c {
                                r = random_letter(rng);
                            }
                            out.push(r);
                            i += 1;
                        }
                    }
                }
                6 | 7 => {
                    out.push(random_letter(rng));
                    out.push(c);
                    i += 1;
                }
                _ => i += 1,
            }
        }
        out
    }

    /// `len` characters of unrelated garbage, as left by a damaged line.
    pub fn burst<R: Rng + ?Sized>(len: usize, rng: &mut R) -> String {
        (0..len)
            .map(|_| if rng.gen_bool(0.15) { ' ' } else { random_letter(rng) })
            .collect()
    }
}
