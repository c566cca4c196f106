//! Character-level byte-pair encoding.
//!
//! Words are whitespace-delimited and get a trailing [`END_OF_WORD`] symbol
//! before merging. Training records the most frequent adjacent pair at each
//! step; ties go to the lexicographically smallest pair. A pair must occur at
//! least twice in the corpus to be merged.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub const END_OF_WORD: &str = "</w>";

const HEADER: &str = "#bpe-merges v1";
const MIN_PAIR_COUNT: u64 = 2;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    base_alphabet: BTreeSet<String>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeModel {
    pub fn from_parts(
        base_alphabet: BTreeSet<String>,
        merges: Vec<(String, String)>,
    ) -> Result<Self> {
        let mut known = base_alphabet.clone();
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (a, b)) in merges.iter().enumerate() {
            if !known.contains(a) || !known.contains(b) {
                return Err(Error::Format(format!(
                    "merge {rank} ({a} {b}) uses a symbol not derivable from earlier merges"
                )));
            }
            if ranks.insert((a.clone(), b.clone()), rank).is_some() {
                return Err(Error::Format(format!("merge ({a} {b}) appears twice")));
            }
            known.insert(format!("{a}{b}"));
        }
        Ok(Self {
            merges,
            base_alphabet,
            ranks,
        })
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn base_alphabet(&self) -> &BTreeSet<String> {
        &self.base_alphabet
    }

    /// Header, alphabet line, then one `left right` merge per line.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{HEADER}")?;
        let alphabet: Vec<&str> = self.base_alphabet.iter().map(String::as_str).collect();
        writeln!(w, "#alphabet {}", alphabet.join(" "))?;
        for (a, b) in &self.merges {
            writeln!(w, "{a} {b}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<Option<String>> {
            lines
                .next()
                .transpose()
                .map_err(|e| Error::Format(e.to_string()))
        };
        if next()?.as_deref() != Some(HEADER) {
            return Err(Error::Format("missing BPE header".into()));
        }
        let alphabet_line = next()?.ok_or_else(|| Error::Format("missing alphabet line".into()))?;
        let alphabet = alphabet_line
            .strip_prefix("#alphabet")
            .ok_or_else(|| Error::Format("missing alphabet line".into()))?
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        let mut merges = Vec::new();
        while let Some(line) = next()? {
            let mut parts = line.split(' ');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                    merges.push((a.to_string(), b.to_string()))
                }
                _ => return Err(Error::Format(format!("bad merge line {line:?}"))),
            }
        }
        Self::from_parts(alphabet, merges)
    }
}

fn word_symbols(word: &str) -> Vec<String> {
    word.chars()
        .map(String::from)
        .chain(std::iter::once(END_OF_WORD.to_string()))
        .collect()
}

fn merge_pair(symbols: &mut Vec<String>, a: &str, b: &str) {
    let mut out = Vec::with_capacity(symbols.len());
    let mut i = 0;
    while i < symbols.len() {
        if i + 1 < symbols.len() && symbols[i] == a && symbols[i + 1] == b {
            out.push(format!("{a}{b}"));
            i += 2;
        } else {
            out.push(std::mem::take(&mut symbols[i]));
            i += 1;
        }
    }
    *symbols = out;
}

pub fn bpe_train<S: AsRef<str>>(corpus: &[S], num_merges: usize) -> BpeModel {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in corpus {
        for w in doc.as_ref().split_whitespace() {
            *freq.entry(w).or_insert(0) += 1;
        }
    }
    // Sorted for a deterministic pair-count iteration order.
    let mut words: Vec<(Vec<String>, u64)> = freq
        .into_iter()
        .map(|(w, f)| (word_symbols(w), f))
        .collect();
    words.sort();

    let base_alphabet: BTreeSet<String> =
        words.iter().flat_map(|(s, _)| s.iter().cloned()).collect();
    let mut merges = Vec::new();
    while merges.len() < num_merges {
        let mut counts: HashMap<(&str, &str), u64> = HashMap::new();
        for (symbols, f) in &words {
            for pair in symbols.windows(2) {
                *counts.entry((&pair[0], &pair[1])).or_insert(0) += f;
            }
        }
        let best = counts
            .into_iter()
            .filter(|&(_, c)| c >= MIN_PAIR_COUNT)
            .max_by(|(p1, c1), (p2, c2)| c1.cmp(c2).then_with(|| p2.cmp(p1)));
        let Some(((a, b), _)) = best else { break };
        let (a, b) = (a.to_string(), b.to_string());
        for (symbols, _) in &mut words {
            merge_pair(symbols, &a, &b);
        }
        merges.push((a, b));
    }
    BpeModel::from_parts(base_alphabet, merges).expect("trained merges are derivable")
}

fn encode_word(model: &BpeModel, word: &str) -> Vec<String> {
    let mut symbols = word_symbols(word);
    loop {
        let best = symbols
            .windows(2)
            .filter_map(|p| model.ranks.get(&(p[0].clone(), p[1].clone())).copied())
            .min();
        let Some(rank) = best else { break };
        let (a, b) = &model.merges[rank];
        merge_pair(&mut symbols, a, b);
    }
    symbols
}

/// Subword tokens for every whitespace-delimited word of `text`. A bare
/// end-of-word marker is not emitted; merged tokens keep it as a suffix.
pub fn bpe_encode(model: &BpeModel, text: &str) -> Vec<String> {
    text.split_whitespace()
        .flat_map(|w| encode_word(model, w))
        .filter(|t| t != END_OF_WORD)
        .collect()
}

/// Concatenate tokens and strip end-of-word markers.
pub fn bpe_decode<S: AsRef<str>>(tokens: &[S]) -> String {
    tokens
        .iter()
        .map(|t| t.as_ref().replace(END_OF_WORD, ""))
        .collect()
}
