//! Perplexity and shuffle-test coherence over an add-k smoothed n-gram model.
//!
//! Documents are scored as word tokens with a [`SENTENCE_END`] token after
//! every sentence, so sentence order is visible to the model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::textproc::{split_sentences, tokenize_words};

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const SENTENCE_END: &str = "</s>";

const HEADER: &str = "#fakescope-ngram v1";
const UNSEEN: &str = "<unseen>";
/// Largest number of sentences permuted by [`coherence`].
pub const MAX_SHUFFLE_SENTENCES: usize = 5;

/// Anything that yields next-token log-probabilities.
pub trait LanguageModel {
    /// Natural-log probability of `token` following `history`.
    fn log_prob(&self, history: &[String], token: &str) -> f64;
}

/// `exp` of the mean negative log-likelihood of `tokens`, each conditioned
/// on everything before it.
pub fn perplexity<M: LanguageModel + ?Sized>(model: &M, tokens: &[String]) -> Result<f64> {
    if tokens.is_empty() {
        return Err(Error::Undefined(
            "perplexity of an empty token sequence".into(),
        ));
    }
    let nll: f64 = (0..tokens.len())
        .map(|i| -model.log_prob(&tokens[..i], &tokens[i]))
        .sum();
    Ok((nll / tokens.len() as f64).exp())
}

/// Word tokens of each sentence followed by a sentence-end token.
pub fn document_tokens<S: AsRef<str>>(sentences: &[S]) -> Vec<String> {
    sentences
        .iter()
        .flat_map(|s| {
            tokenize_words(s.as_ref())
                .into_iter()
                .chain(std::iter::once(SENTENCE_END.to_string()))
        })
        .collect()
}

pub fn text_tokens(text: &str) -> Vec<String> {
    document_tokens(&split_sentences(text))
}

#[derive(Debug, Clone, PartialEq)]
struct ContextTable {
    probs: HashMap<String, f64>,
    unseen: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    k: f64,
    vocab: BTreeSet<String>,
    tables: HashMap<String, ContextTable>,
}

pub fn train_ngram(corpus: &[Vec<String>], order: usize, k: f64) -> Result<NGramModel> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "n-gram order must be at least 1".into(),
        ));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "smoothing constant {k} must be positive"
        )));
    }
    if corpus.iter().all(Vec::is_empty) {
        return Err(Error::Undefined("cannot train on an empty corpus".into()));
    }
    let mut vocab: BTreeSet<String> = corpus.iter().flatten().cloned().collect();
    vocab.remove(BOS);
    vocab.insert(UNK.to_string());

    let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for doc in corpus {
        let padded = pad(doc.iter().map(String::as_str), order);
        for window in padded.windows(order) {
            let (ctx, token) = window.split_at(order - 1);
            if token[0] == BOS {
                continue;
            }
            *counts
                .entry(ctx.join(" "))
                .or_default()
                .entry(token[0].to_string())
                .or_insert(0) += 1;
        }
    }

    let v = vocab.len() as f64;
    let tables = counts
        .into_iter()
        .map(|(ctx, tokens)| {
            let total: u64 = tokens.values().sum();
            let denom = total as f64 + k * v;
            let probs = tokens
                .into_iter()
                .map(|(t, c)| (t, (c as f64 + k) / denom))
                .collect();
            (
                ctx,
                ContextTable {
                    probs,
                    unseen: k / denom,
                },
            )
        })
        .collect();
    Ok(NGramModel {
        order,
        k,
        vocab,
        tables,
    })
}

fn pad<'a>(tokens: impl Iterator<Item = &'a str>, order: usize) -> Vec<&'a str> {
    std::iter::repeat(BOS)
        .take(order - 1)
        .chain(tokens)
        .collect()
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> f64 {
        self.k
    }

    /// Vocabulary size, including the unknown token.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn map_token<'a>(&self, t: &'a str) -> &'a str {
        if t == BOS || self.vocab.contains(t) {
            t
        } else {
            UNK
        }
    }

    pub fn prob(&self, history: &[String], token: &str) -> f64 {
        let start = history.len().saturating_sub(self.order - 1);
        let ctx: Vec<&str> = pad(
            history[start..].iter().map(|t| self.map_token(t)),
            self.order,
        );
        let ctx = ctx[ctx.len() - (self.order - 1)..].join(" ");
        let token = self.map_token(token);
        match self.tables.get(&ctx) {
            Some(table) => table.probs.get(token).copied().unwrap_or(table.unseen),
            None => 1.0 / self.vocab.len() as f64,
        }
    }

    /// Line-oriented table: header lines start with `#`, then
    /// `context TAB token TAB probability` rows sorted by context and token.
    /// Each context carries an `<unseen>` row with the mass of every
    /// vocabulary token it never saw.
    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{HEADER}")?;
        writeln!(w, "#order\t{}", self.order)?;
        writeln!(w, "#k\t{}", self.k)?;
        for t in &self.vocab {
            writeln!(w, "#vocab\t{t}")?;
        }
        let sorted: BTreeMap<_, _> = self.tables.iter().collect();
        for (ctx, table) in sorted {
            let probs: BTreeMap<_, _> = table.probs.iter().collect();
            for (t, p) in probs {
                writeln!(w, "{ctx}\t{t}\t{p}")?;
            }
            writeln!(w, "{ctx}\t{UNSEEN}\t{}", table.unseen)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let bad = |m: String| Error::Format(format!("n-gram table: {m}"));
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h == HEADER => {}
            _ => return Err(bad("missing header".into())),
        }
        let mut order = None;
        let mut k = None;
        let mut vocab = BTreeSet::new();
        let mut tables: HashMap<String, ContextTable> = HashMap::new();
        for line in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["#order", n] => order = n.parse::<usize>().ok(),
                ["#k", x] => k = x.parse::<f64>().ok(),
                ["#vocab", t] => {
                    vocab.insert(t.to_string());
                }
                [ctx, token, p] => {
                    let p: f64 = p
                        .parse()
                        .map_err(|_| bad(format!("bad probability in {line:?}")))?;
                    let table = tables
                        .entry(ctx.to_string())
                        .or_insert_with(|| ContextTable {
                            probs: HashMap::new(),
                            unseen: f64::NAN,
                        });
                    if *token == UNSEEN {
                        table.unseen = p;
                    } else {
                        table.probs.insert(token.to_string(), p);
                    }
                }
                _ => return Err(bad(format!("unrecognized line {line:?}"))),
            }
        }
        let order = order
            .filter(|&o| o >= 1)
            .ok_or_else(|| bad("missing order".into()))?;
        let k = k
            .filter(|&k| k > 0.0)
            .ok_or_else(|| bad("missing k".into()))?;
        if !vocab.contains(UNK) {
            return Err(bad("vocabulary lacks the unknown token".into()));
        }
        if tables.values().any(|t| t.unseen.is_nan()) {
            return Err(bad("context without an <unseen> row".into()));
        }
        Ok(Self {
            order,
            k,
            vocab,
            tables,
        })
    }

    /// Sum of next-token probabilities over the vocabulary for a stored
    /// context key (tokens joined by spaces).
    pub fn context_mass(&self, ctx: &str) -> f64 {
        match self.tables.get(ctx) {
            Some(t) => {
                let unseen = self.vocab.len() - t.probs.len();
                t.probs.values().sum::<f64>() + unseen as f64 * t.unseen
            }
            None => 1.0,
        }
    }

    pub fn contexts(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }
}

impl LanguageModel for NGramModel {
    fn log_prob(&self, history: &[String], token: &str) -> f64 {
        self.prob(history, token).ln()
    }
}

/// Shuffle-test outcome for one text.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// Indices of the sentences that were permuted, in original order.
    pub sampled: Vec<usize>,
    pub original_ppl: f64,
    /// One entry per ordering of the sampled sentences, identity first.
    pub permutation_ppls: Vec<f64>,
    /// Mean of `permutation_ppl - original_ppl`.
    pub tc: f64,
}

/// Samples `min(n, 5)` sentences, scores every ordering of them and averages
/// the perplexity change against their original relative order.
pub fn coherence<M: LanguageModel + ?Sized>(
    model: &M,
    text: &str,
    seed: u64,
) -> Result<CoherenceReport> {
    let sentences = split_sentences(text);
    let n = sentences.len();
    if n == 0 {
        return Err(Error::Undefined(
            "coherence of a text without sentences".into(),
        ));
    }
    let s = n.min(MAX_SHUFFLE_SENTENCES);
    let mut sampled = if n > s {
        rand::seq::index::sample(&mut ChaCha8Rng::seed_from_u64(seed), n, s).into_vec()
    } else {
        (0..n).collect()
    };
    sampled.sort_unstable();
    let chosen: Vec<&str> = sampled.iter().map(|&i| sentences[i].as_str()).collect();

    let original_ppl = perplexity(model, &document_tokens(&chosen))?;
    let permutation_ppls = (0..s)
        .permutations(s)
        .map(|order| {
            let reordered: Vec<&str> = order.iter().map(|&i| chosen[i]).collect();
            perplexity(model, &document_tokens(&reordered))
        })
        .collect::<Result<Vec<_>>>()?;
    let tc = permutation_ppls
        .iter()
        .map(|p| p - original_ppl)
        .sum::<f64>()
        / permutation_ppls.len() as f64;
    Ok(CoherenceReport {
        sampled,
        original_ppl,
        permutation_ppls,
        tc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    struct Certain;
    impl LanguageModel for Certain {
        fn log_prob(&self, _: &[String], _: &str) -> f64 {
            0.0
        }
    }

    struct CoinFlip;
    impl LanguageModel for CoinFlip {
        fn log_prob(&self, _: &[String], _: &str) -> f64 {
            0.5f64.ln()
        }
    }

    #[test]
    fn add_k_unigram_arithmetic() {
        let m = train_ngram(&[toks("a"), toks("a")], 1, 1.0).unwrap();
        assert_eq!(m.vocab_size(), 2);
        assert!((m.prob(&[], "a") - 0.75).abs() < 1e-15);
        assert!((m.prob(&[], "zzz") - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uniform_usage_gives_uniform_probabilities() {
        let m = train_ngram(&[toks("a b c <unk>")], 1, 0.5).unwrap();
        for t in ["a", "b", "c", "anything"] {
            assert!((m.prob(&[], t) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let corpus = vec![
            toks("the soup was bland </s>"),
            toks("the soup was good </s>"),
        ];
        assert_eq!(
            train_ngram(&corpus, 3, 0.1).unwrap(),
            train_ngram(&corpus, 3, 0.1).unwrap()
        );
    }

    #[test]
    fn training_preconditions() {
        assert!(train_ngram(&[], 2, 0.1).is_err());
        assert!(train_ngram(&[vec![]], 2, 0.1).is_err());
        assert!(train_ngram(&[toks("a")], 0, 0.1).is_err());
        assert!(train_ngram(&[toks("a")], 2, 0.0).is_err());
    }

    #[test]
    fn perplexity_identities() {
        assert_eq!(perplexity(&Certain, &toks("x y z")).unwrap(), 1.0);
        assert!((perplexity(&CoinFlip, &toks("a b c d")).unwrap() - 2.0).abs() < 1e-12);
        assert!(perplexity(&Certain, &[]).is_err());
    }

    #[test]
    fn tables_normalize() {
        let corpus = vec![
            toks("the soup was bland </s> i left </s>"),
            toks("the noodles were great </s>"),
        ];
        let m = train_ngram(&corpus, 3, 0.1).unwrap();
        for ctx in m.contexts() {
            assert!((m.context_mass(ctx) - 1.0).abs() < 1e-9, "context {ctx}");
        }
    }

    #[test]
    fn table_round_trip() {
        let corpus = vec![toks("a b a c </s>"), toks("b b c </s>")];
        let m = train_ngram(&corpus, 2, 0.3).unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = NGramModel::read(&buf[..]).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn single_sentence_has_zero_coherence() {
        let m = train_ngram(&[toks("good food </s>")], 2, 0.1).unwrap();
        let r = coherence(&m, "Good food.", 1).unwrap();
        assert_eq!(r.permutation_ppls.len(), 1);
        assert_eq!(r.tc, 0.0);
    }

    #[test]
    fn permutation_counts() {
        let m = train_ngram(&[toks("a b </s>")], 2, 0.1).unwrap();
        assert_eq!(coherence(&m, "A. B.", 0).unwrap().permutation_ppls.len(), 2);
        let seven = "One. Two. Three. Four. Five. Six. Seven.";
        let r = coherence(&m, seven, 99).unwrap();
        assert_eq!(r.permutation_ppls.len(), 120);
        assert_eq!(r.sampled.len(), 5);
        assert!(r.sampled.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn identity_contributes_zero() {
        let m = train_ngram(&[toks("a b </s> c d </s>")], 3, 0.1).unwrap();
        let r = coherence(&m, "A b. C d. E.", 3).unwrap();
        assert_eq!(r.permutation_ppls[0], r.original_ppl);
        let mean: f64 = r
            .permutation_ppls
            .iter()
            .map(|p| p - r.original_ppl)
            .sum::<f64>()
            / 6.0;
        assert!((mean - r.tc).abs() < 1e-12);
    }

    #[test]
    fn ordered_text_is_coherent() {
        let doc = toks("first we ate </s> then we paid </s> finally we left </s>");
        let m = train_ngram(&vec![doc; 20], 3, 0.01).unwrap();
        let r = coherence(&m, "First we ate. Then we paid. Finally we left.", 0).unwrap();
        assert!(r.tc > 0.0);
    }

    #[test]
    fn coherence_is_seeded() {
        let m = train_ngram(&[toks("a </s>")], 2, 0.1).unwrap();
        let text = "A. B. C. D. E. F. G. H.";
        assert_eq!(
            coherence(&m, text, 5).unwrap(),
            coherence(&m, text, 5).unwrap()
        );
    }

    #[test]
    fn lower_probability_token_raises_perplexity() {
        let corpus = vec![toks("a a a a b </s>")];
        let m = train_ngram(&corpus, 1, 0.1).unwrap();
        let base = toks("a a a");
        let before = perplexity(&m, &base).unwrap();
        let mut extended = base.clone();
        extended.push("b".into());
        assert!(m.prob(&[], "b") < m.prob(&[], "a"));
        assert!(perplexity(&m, &extended).unwrap() > before);
    }
}
