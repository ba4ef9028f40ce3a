//! Subword token surprisals → word surprisals.
//!
//! Tokens are matched greedily against the sentence's characters (whitespace
//! removed) after stripping the provider's join marker. A token's surprisal is
//! credited to the word containing its first character, so punctuation tokens
//! attach to the preceding word and per-word values are chain-rule sums.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{find_sentence, format_bits, parse_field, SentenceKey, SentenceSurprisal, SurprisalTable};
use crate::error::{Error, Result};
use crate::suite::TestSuite;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub token: String,
    pub surprisal: f64,
}

impl TokenRecord {
    pub fn new(token: &str, surprisal: f64) -> Self {
        TokenRecord {
            token: token.to_string(),
            surprisal,
        }
    }
}

pub type TokenRecords = BTreeMap<SentenceKey, Vec<TokenRecord>>;

/// Tokenizer conventions of a surprisal provider.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub name: String,
    /// Marker removed from every token before matching (e.g. `##`, `Ġ`, `▁`).
    #[serde(default)]
    pub join_marker: Option<String>,
    /// Boundary tokens ignored entirely (e.g. `<eos>`).
    #[serde(default)]
    pub skip_tokens: Vec<String>,
}

impl ProviderConfig {
    pub fn named(name: &str) -> Self {
        ProviderConfig {
            name: name.to_string(),
            ..Default::default()
        }
    }

    fn strip<'a>(&self, token: &'a str) -> std::borrow::Cow<'a, str> {
        match &self.join_marker {
            Some(m) if !m.is_empty() && token.contains(m.as_str()) => token.replace(m.as_str(), "").into(),
            _ => token.into(),
        }
    }
}

/// Aligns `tokens` to `words`, returning one summed surprisal per word.
pub fn align_tokens(words: &[&str], tokens: &[TokenRecord], config: &ProviderConfig) -> Result<Vec<f64>> {
    let sentence = words.join(" ");
    let fail = |detail: String| Error::Alignment {
        sentence: sentence.clone(),
        detail,
    };

    // Character stream without whitespace, with the owning word of each char.
    let mut chars = Vec::new();
    let mut owner = Vec::new();
    for (w, word) in words.iter().enumerate() {
        for ch in word.chars().filter(|c| !c.is_whitespace()) {
            chars.push(ch);
            owner.push(w);
        }
    }

    let mut out = vec![0.0; words.len()];
    let mut pos = 0;
    for (t, record) in tokens.iter().enumerate() {
        if config.skip_tokens.iter().any(|s| *s == record.token) {
            continue;
        }
        if !record.surprisal.is_finite() || record.surprisal < 0.0 {
            return Err(fail(format!("token {t} has invalid surprisal {}", record.surprisal)));
        }
        let stripped = config.strip(&record.token);
        let piece: Vec<char> = stripped.chars().filter(|c| !c.is_whitespace()).collect();
        if piece.is_empty() {
            // Bare marker tokens belong to the word they introduce.
            let w = owner.get(pos).or(owner.last()).copied();
            match w {
                Some(w) => out[w] += record.surprisal,
                None => return Err(fail(format!("leftover token {t} {:?}", record.token))),
            }
            continue;
        }
        if pos >= chars.len() {
            return Err(fail(format!("leftover token {t} {:?}", record.token)));
        }
        let end = pos + piece.len();
        if end > chars.len() || chars[pos..end] != piece[..] {
            let found: String = chars[pos..end.min(chars.len())].iter().collect();
            return Err(fail(format!(
                "token {t} {:?} does not match text {found:?} at character {pos}",
                record.token
            )));
        }
        out[owner[pos]] += record.surprisal;
        pos = end;
    }
    if pos < chars.len() {
        let rest: String = chars[pos..].iter().collect();
        return Err(fail(format!("token list exhausted early; unmatched text {rest:?}")));
    }
    Ok(out)
}

/// Builds a word-level table from token records for the sentences of `suites`.
pub fn ingest_token_surprisals(records: &TokenRecords, suites: &[TestSuite], config: &ProviderConfig) -> Result<SurprisalTable> {
    let mut table = SurprisalTable::new(&config.name);
    for (key, tokens) in records {
        let sentence = find_sentence(suites, key)?;
        let bits = align_tokens(&sentence.words(), tokens, config).map_err(|e| match e {
            Error::Alignment { detail, .. } => Error::Alignment {
                sentence: key.to_string(),
                detail,
            },
            other => other,
        })?;
        table.insert(key.clone(), SentenceSurprisal::new(sentence, bits)?);
    }
    Ok(table)
}

const TOKEN_HEADER: [&str; 6] = ["suite_tag", "item_id", "condition", "token_index", "token", "surprisal_bits"];

pub fn read_token_records<R: Read>(r: R) -> Result<TokenRecords> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TOKEN_HEADER) {
        return Err(Error::Format(format!("unexpected token-file header {headers:?}")));
    }
    let mut rows: BTreeMap<SentenceKey, Vec<(usize, TokenRecord)>> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != TOKEN_HEADER.len() {
            return Err(Error::Format(format!("expected 6 fields, got {}", row.len())));
        }
        let key = SentenceKey::new(&row[0], parse_field(&row[1], "item_id")?, &row[2]);
        let index: usize = parse_field(&row[3], "token_index")?;
        let surprisal: f64 = parse_field(&row[5], "surprisal_bits")?;
        if surprisal < 0.0 || !surprisal.is_finite() {
            return Err(Error::Format(format!("{key}: token {index} has surprisal {surprisal}")));
        }
        rows.entry(key).or_default().push((index, TokenRecord::new(&row[4], surprisal)));
    }
    rows.into_iter()
        .map(|(key, mut toks)| {
            toks.sort_by_key(|t| t.0);
            if toks.iter().enumerate().any(|(i, t)| t.0 != i) {
                return Err(Error::Format(format!("{key}: token indices are not contiguous from 0")));
            }
            Ok((key, toks.into_iter().map(|t| t.1).collect()))
        })
        .collect()
}

pub fn write_token_records<W: Write>(records: &TokenRecords, w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(w);
    out.write_record(TOKEN_HEADER)?;
    for (key, tokens) in records {
        for (i, t) in tokens.iter().enumerate() {
            out.write_record([
                key.suite.as_str(),
                &key.item_id.to_string(),
                &key.condition,
                &i.to_string(),
                &t.token,
                &format_bits(t.surprisal),
            ])?;
        }
    }
    out.flush().map_err(|e| Error::io("<token records>", e))?;
    Ok(())
}

impl SurprisalTable {
    /// One token per word; the inverse of identity alignment.
    pub fn to_token_records(&self) -> TokenRecords {
        self.entries()
            .map(|(k, e)| {
                let toks = e
                    .words
                    .iter()
                    .zip(&e.bits)
                    .map(|(w, b)| TokenRecord::new(w, *b))
                    .collect();
                (k.clone(), toks)
            })
            .collect()
    }
}
