//! Sentence splitting, word tokenization, vocabularies and count vectors.

mod bpe;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

pub use bpe::{bpe_decode, bpe_encode, bpe_train, BpeModel, END_OF_WORD};

use crate::error::{Error, Result};
use crate::hash::fnv1a_str;

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Split on runs of `.`, `!`, `?` that are followed by whitespace or the end
/// of the text. Sentences keep their terminators and are trimmed.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if !is_terminator(c) {
            continue;
        }
        while let Some(&next) = chars.peek() {
            if !is_terminator(next) {
                break;
            }
            current.push(next);
            chars.next();
        }
        if chars.peek().map_or(true, |c| c.is_whitespace()) {
            let sentence = current.trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            current.clear();
        }
    }
    let rest = current.trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}')
}

/// Lowercased alphanumeric word tokens. Apostrophes are deleted so that
/// contractions stay one token (`don't` becomes `dont`); every other
/// non-alphanumeric character separates tokens.
pub fn tokenize_words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !is_apostrophe(c) && !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Bijective token/index map with contiguous indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Sorted, de-duplicated vocabulary over all tokens of `docs`.
    pub fn build<S: AsRef<str>>(docs: &[Vec<S>]) -> Self {
        let mut tokens: Vec<String> = docs
            .iter()
            .flatten()
            .map(|t| t.as_ref().to_string())
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        Self::from_tokens(tokens).expect("deduplicated")
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.contains(['\n', '\r']) {
                return Err(Error::Format(format!("invalid vocabulary token {t:?}")));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: u32) -> Option<&str> {
        self.tokens.get(index as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Fingerprint stored alongside trained detectors.
    pub fn fingerprint(&self) -> String {
        format!("{:016x}", fnv1a_str(&self.tokens.join("\n")))
    }

    /// One token per line; the line number is the index.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for t in &self.tokens {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let tokens = r
            .lines()
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::from_tokens(tokens)
    }
}

/// Sparse document-term counts. Rows hold `(term, count)` sorted by term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    n_terms: usize,
    rows: Vec<Vec<(u32, u32)>>,
}

impl DocTermMatrix {
    pub fn new(n_terms: usize, rows: Vec<Vec<(u32, u32)>>) -> Result<Self> {
        for row in &rows {
            for pair in row.windows(2) {
                if pair[0].0 >= pair[1].0 {
                    return Err(Error::InvalidArgument(
                        "row terms must be strictly increasing".into(),
                    ));
                }
            }
            if row.iter().any(|&(t, c)| t as usize >= n_terms || c == 0) {
                return Err(Error::InvalidArgument(
                    "row holds a zero count or an out-of-range term".into(),
                ));
            }
        }
        Ok(Self { n_terms, rows })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(u32, u32)>] {
        &self.rows
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            n_terms: self.n_terms,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

fn count_row<S: AsRef<str>>(doc: &[S], vocab: &Vocabulary) -> Vec<(u32, u32)> {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for t in doc {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    counts.into_iter().collect()
}

/// Count vectors for `docs`. With `vocab = None` a vocabulary is built from
/// the documents; a given vocabulary stays fixed and unseen tokens are dropped.
pub fn vectorize<S: AsRef<str>>(
    docs: &[Vec<S>],
    vocab: Option<&Vocabulary>,
) -> (DocTermMatrix, Vocabulary) {
    let vocab = match vocab {
        Some(v) => v.clone(),
        None => Vocabulary::build(docs),
    };
    let rows = docs.iter().map(|d| count_row(d, &vocab)).collect();
    (
        DocTermMatrix {
            n_terms: vocab.len(),
            rows,
        },
        vocab,
    )
}

/// How review text becomes bag-of-words tokens.
#[derive(Debug, Clone, PartialEq)]
pub enum Featurizer {
    Words,
    /// Subword units from a trained BPE model, applied to the word tokens.
    Bpe(BpeModel),
}

impl Featurizer {
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let words = tokenize_words(text);
        match self {
            Featurizer::Words => words,
            Featurizer::Bpe(model) => bpe_encode(model, &words.join(" ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sentences_basic() {
        assert_eq!(
            split_sentences("Good food. Bad service."),
            ["Good food.", "Bad service."]
        );
        assert_eq!(
            split_sentences("No terminal punctuation"),
            ["No terminal punctuation"]
        );
        assert_eq!(split_sentences("Wow!! Really?"), ["Wow!!", "Really?"]);
    }

    #[test]
    fn sentences_ignore_inner_periods() {
        assert_eq!(
            split_sentences("Paid $8.50 for it. Worth it"),
            ["Paid $8.50 for it.", "Worth it"]
        );
        assert!(split_sentences("   ").is_empty());
        assert!(split_sentences("").is_empty());
    }

    #[test]
    fn words_basic() {
        assert_eq!(
            tokenize_words("The cat, the CAT"),
            ["the", "cat", "the", "cat"]
        );
        assert!(tokenize_words("").is_empty());
        assert_eq!(tokenize_words("5-star place!"), ["5", "star", "place"]);
        assert_eq!(tokenize_words("I don't know"), ["i", "dont", "know"]);
    }

    #[test]
    fn vectorize_counts() {
        let (m, v) = vectorize(&[vec!["a", "b", "a"]], None);
        let a = v.index_of("a").unwrap();
        let b = v.index_of("b").unwrap();
        assert_eq!(m.row(0), &[(a, 2), (b, 1)]);
    }

    #[test]
    fn vectorize_fixed_vocab_drops_unseen() {
        let vocab = Vocabulary::build(&[vec!["a"]]);
        let (m, v) = vectorize(&[vec!["zz", "yy"]], Some(&vocab));
        assert!(m.row(0).is_empty());
        assert_eq!(v, vocab);
    }

    #[test]
    fn vectorize_is_deterministic() {
        let docs = vec![vec!["x", "y"], vec!["x", "y"]];
        let (m, _) = vectorize(&docs, None);
        assert_eq!(m.row(0), m.row(1));
    }

    #[test]
    fn vocabulary_round_trip() {
        let v = Vocabulary::build(&[vec!["b", "a", "c", "a"]]);
        let mut buf = Vec::new();
        v.write(&mut buf).unwrap();
        assert_eq!(buf, b"a\nb\nc\n");
        assert_eq!(Vocabulary::read(&buf[..]).unwrap(), v);
    }

    proptest! {
        #[test]
        fn sentences_never_empty(text in "[a-z .!?\n]{0,60}") {
            let s = split_sentences(&text);
            prop_assert!(s.iter().all(|x| !x.trim().is_empty()));
            prop_assert_eq!(s.clone(), split_sentences(&text));
            let joined: String = s.concat().chars().filter(|c| !c.is_whitespace()).collect();
            let original: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, original);
        }

        #[test]
        fn row_sums_match_in_vocab_tokens(
            train in proptest::collection::vec("[a-e]", 1..20),
            doc in proptest::collection::vec("[a-h]", 0..30),
        ) {
            let vocab = Vocabulary::build(&[train]);
            let (m, _) = vectorize(std::slice::from_ref(&doc), Some(&vocab));
            let sum: u32 = m.row(0).iter().map(|&(_, c)| c).sum();
            let expected = doc.iter().filter(|t| vocab.index_of(t).is_some()).count();
            prop_assert_eq!(sum as usize, expected);
        }
    }
}
