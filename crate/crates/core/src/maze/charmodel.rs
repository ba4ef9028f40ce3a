use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Start-of-word padding character.
pub const START: char = '^';
/// End-of-word symbol.
pub const END: char = '$';
const ALPHABET: usize = 27;

fn symbol(c: char) -> Option<usize> {
    match c {
        'a'..='z' => Some(c as usize - 'a' as usize),
        END => Some(26),
        _ => None,
    }
}

fn char_of(i: usize) -> char {
    if i == 26 {
        END
    } else {
        (b'a' + i as u8) as char
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharModelConfig {
    pub order: usize,
    /// Add-k pseudo-count given to every symbol in every context.
    pub smoothing: f64,
}

impl Default for CharModelConfig {
    fn default() -> Self {
        CharModelConfig {
            order: 2,
            smoothing: 0.1,
        }
    }
}

/// Add-k smoothed character n-gram over lowercase ASCII letters and an
/// end-of-word symbol.
#[derive(Debug, Clone)]
pub struct CharModel {
    config: CharModelConfig,
    counts: HashMap<String, [u32; ALPHABET]>,
}

impl CharModel {
    /// Trains on the lowercase ASCII letters of each word; words with fewer
    /// than one letter are skipped.
    pub fn train<S: AsRef<str>>(words: impl IntoIterator<Item = S>, config: CharModelConfig) -> Result<Self> {
        if config.order == 0 {
            return Err(Error::InvalidArgument("character model order must be >= 1".into()));
        }
        if !(config.smoothing > 0.0 && config.smoothing.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "character smoothing must be positive, got {}",
                config.smoothing
            )));
        }
        let mut counts: HashMap<String, [u32; ALPHABET]> = HashMap::new();
        let mut any = false;
        for w in words {
            let letters: String = letters(w.as_ref());
            if letters.is_empty() {
                continue;
            }
            any = true;
            let mut ctx: String = std::iter::repeat_n(START, config.order - 1).collect();
            for c in letters.chars().chain(std::iter::once(END)) {
                counts.entry(tail(&ctx, config.order - 1)).or_insert([0; ALPHABET])[symbol(c).unwrap()] += 1;
                ctx.push(c);
            }
        }
        if !any {
            return Err(Error::InvalidArgument("character model lexicon is empty".into()));
        }
        Ok(CharModel { config, counts })
    }

    pub fn config(&self) -> CharModelConfig {
        self.config
    }

    /// Initial context for a new word.
    pub fn start(&self) -> String {
        std::iter::repeat_n(START, self.config.order - 1).collect()
    }

    /// Distribution over `a..z` then the end symbol given the preceding
    /// characters (only the last `order − 1` are used).
    pub fn distribution(&self, history: &str) -> [f64; ALPHABET] {
        let ctx = tail(history, self.config.order - 1);
        let k = self.config.smoothing;
        let row = self.counts.get(&ctx);
        let total: f64 = row.map_or(0, |r| r.iter().map(|&c| c as u64).sum::<u64>()) as f64;
        let denom = total + k * ALPHABET as f64;
        let mut out = [0.0; ALPHABET];
        for (i, p) in out.iter_mut().enumerate() {
            *p = (row.map_or(0, |r| r[i]) as f64 + k) / denom;
        }
        out
    }

    pub fn prob(&self, history: &str, next: char) -> f64 {
        symbol(next).map_or(0.0, |i| self.distribution(history)[i])
    }

    pub fn symbols() -> impl Iterator<Item = char> {
        (0..ALPHABET).map(char_of)
    }
}

pub(crate) fn letters(word: &str) -> String {
    word.chars()
        .filter(char::is_ascii_alphabetic)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn tail(s: &str, n: usize) -> String {
    let chars: Vec<char> = s.chars().collect();
    chars[chars.len().saturating_sub(n)..].iter().collect()
}
