//! Writing-style metrics: ARI, difficult words, reading time and sentiment,
//! assembled with perplexity and coherence into one vector per review.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::error::{Error, Result};
use crate::hash::fnv1a_str;
use crate::lm::{coherence, perplexity, text_tokens, LanguageModel};
use crate::textproc::{split_sentences, tokenize_words};

/// Milliseconds needed to read one character, in units of 1e-5 s.
const READ_TIME_PER_CHAR_1E5: u64 = 1469;

fn parse_word_lines(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(tokenize_words)
        .collect()
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Familiar words; anything outside the list counts as difficult.
#[derive(Debug, Clone, PartialEq)]
pub struct WordList {
    words: HashSet<String>,
}

impl WordList {
    /// One entry per line, `#` comments ignored. Entries go through the word
    /// tokenizer so they match tokens exactly.
    pub fn parse(text: &str) -> Result<Self> {
        let words = parse_word_lines(text);
        if words.is_empty() {
            return Err(Error::InvalidArgument("word list is empty".into()));
        }
        Ok(Self { words })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_file(path)?)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Scores text polarity in `[-1, 1]`.
pub trait SentimentProvider: Sync {
    /// Label written next to reported sentiment numbers.
    fn name(&self) -> &str;
    fn score(&self, text: &str) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl Lexicon {
    pub fn parse(positive: &str, negative: &str) -> Result<Self> {
        let lex = Self {
            positive: parse_word_lines(positive),
            negative: parse_word_lines(negative),
        };
        if lex.positive.is_empty() && lex.negative.is_empty() {
            return Err(Error::InvalidArgument("sentiment lexicon is empty".into()));
        }
        Ok(lex)
    }

    pub fn load(positive: &Path, negative: &Path) -> Result<Self> {
        Self::parse(&read_file(positive)?, &read_file(negative)?)
    }

    pub fn swapped(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }
}

impl SentimentProvider for Lexicon {
    fn name(&self) -> &str {
        "lexicon"
    }

    fn score(&self, text: &str) -> f64 {
        sentiment(text, self)
    }
}

/// Counts entering the readability index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AriCounts {
    pub chars: usize,
    pub words: usize,
    pub sentences: usize,
}

impl AriCounts {
    pub fn of(text: &str) -> Self {
        Self {
            chars: text.chars().filter(|c| c.is_alphanumeric()).count(),
            words: tokenize_words(text).len(),
            sentences: split_sentences(text).len(),
        }
    }

    pub fn index(&self) -> Result<f64> {
        if self.words == 0 || self.sentences == 0 {
            return Err(Error::Undefined(
                "readability index needs at least one word and one sentence".into(),
            ));
        }
        let (c, w, s) = (self.chars as f64, self.words as f64, self.sentences as f64);
        Ok(4.71 * (c / w) + 0.5 * (w / s) - 21.43)
    }
}

/// Automated Readability Index with alphanumeric character counts.
pub fn ari(text: &str) -> Result<f64> {
    AriCounts::of(text).index()
}

pub fn difficult_words(text: &str, list: &WordList) -> usize {
    tokenize_words(text)
        .iter()
        .filter(|w| !list.contains(w))
        .count()
}

/// Seconds to read `text` at 14.69 ms per character, counting every
/// character including whitespace.
pub fn reading_time(text: &str) -> f64 {
    let chars = text.chars().count() as u64;
    (chars * READ_TIME_PER_CHAR_1E5) as f64 / 100_000.0
}

/// `(pos - neg) / (pos + neg)` over lexicon matches; 0 without matches.
pub fn sentiment(text: &str, lexicon: &Lexicon) -> f64 {
    let (mut pos, mut neg) = (0usize, 0usize);
    for w in tokenize_words(text) {
        if lexicon.positive.contains(&w) {
            pos += 1;
        } else if lexicon.negative.contains(&w) {
            neg += 1;
        }
    }
    if pos + neg == 0 {
        0.0
    } else {
        (pos as f64 - neg as f64) / (pos + neg) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StyleMetricVector {
    pub ppl: f64,
    pub tc: f64,
    pub ari: f64,
    pub num_difficult_words: usize,
    pub rtime_seconds: f64,
    pub sentiment: f64,
}

/// Seed for sentence sampling in the shuffle test, derived from the review id.
pub fn coherence_seed(review_id: &str) -> u64 {
    fnv1a_str(review_id)
}

pub fn score_text<M, S>(
    id: &str,
    text: &str,
    lm: &M,
    list: &WordList,
    sentiment: &S,
) -> Result<StyleMetricVector>
where
    M: LanguageModel + ?Sized,
    S: SentimentProvider + ?Sized,
{
    let ari = ari(text)?;
    let ppl = perplexity(lm, &text_tokens(text))?;
    let tc = coherence(lm, text, coherence_seed(id))?.tc;
    Ok(StyleMetricVector {
        ppl,
        tc,
        ari,
        num_difficult_words: difficult_words(text, list),
        rtime_seconds: reading_time(text),
        sentiment: sentiment.score(text),
    })
}

pub fn score_review<M, S>(
    review: &Review,
    lm: &M,
    list: &WordList,
    sentiment: &S,
) -> Result<StyleMetricVector>
where
    M: LanguageModel + ?Sized,
    S: SentimentProvider + ?Sized,
{
    score_text(&review.id, &review.text, lm, list, sentiment).map_err(|e| match e {
        Error::Undefined(m) => Error::InvalidRecord {
            id: review.id.clone(),
            message: m,
        },
        other => other,
    })
}

pub const METRICS_HEADER: &str = "id,ppl,tc,ari,dw,rtime,sentiment";

pub fn write_metrics_csv<W: Write>(rows: &[(String, StyleMetricVector)], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    wtr.write_record(METRICS_HEADER.split(',')).map_err(fail)?;
    for (id, m) in rows {
        wtr.write_record([
            id.clone(),
            m.ppl.to_string(),
            m.tc.to_string(),
            m.ari.to_string(),
            m.num_difficult_words.to_string(),
            m.rtime_seconds.to_string(),
            m.sentiment.to_string(),
        ])
        .map_err(fail)?;
    }
    wtr.flush().map_err(|e| Error::io("<metrics csv>", e))
}

pub fn read_metrics_csv<R: std::io::Read>(r: R) -> Result<Vec<(String, StyleMetricVector)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if headers.iter().ne(METRICS_HEADER.split(',')) {
        return Err(Error::Format(format!(
            "metrics header must be `{METRICS_HEADER}`"
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let num = |j: usize| -> Result<f64> {
            rec[j].parse().map_err(|_| Error::Parse {
                line: i + 2,
                field: headers[j].to_string(),
                message: format!("`{}` is not a number", &rec[j]),
            })
        };
        out.push((
            rec[0].to_string(),
            StyleMetricVector {
                ppl: num(1)?,
                tc: num(2)?,
                ari: num(3)?,
                num_difficult_words: num(4)? as usize,
                rtime_seconds: num(5)?,
                sentiment: num(6)?,
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::train_ngram;

    fn list() -> WordList {
        WordList::parse("# familiar\nthe\ncat\nsat\non\nmat\ngood\nfood\nhappy\n").unwrap()
    }

    fn lexicon() -> Lexicon {
        Lexicon::parse("good\nhappy\ngreat\n", "bad\nawful\n").unwrap()
    }

    #[test]
    fn ari_hand_examples() {
        let counts = AriCounts::of("The cat sat on the mat.");
        assert_eq!(
            counts,
            AriCounts {
                chars: 17,
                words: 6,
                sentences: 1
            }
        );
        let expected = 4.71 * (17.0 / 6.0) + 0.5 * 6.0 - 21.43;
        assert!((ari("The cat sat on the mat.").unwrap() - expected).abs() < 1e-12);
        assert!((expected - -5.085).abs() < 1e-9);

        let grade12 = AriCounts {
            chars: 100,
            words: 20,
            sentences: 1,
        };
        assert!((grade12.index().unwrap() - 12.12).abs() < 1e-9);
        assert!(ari("").is_err());
        assert!(ari("?!").is_err());
    }

    #[test]
    fn difficult_word_counts() {
        assert_eq!(difficult_words("The cat sat.", &list()), 0);
        assert_eq!(difficult_words("Zebras juggle quinces", &list()), 3);
        assert_eq!(difficult_words("the sesquipedalian", &list()), 1);
        assert_eq!(difficult_words("THE Cat", &list()), 0);
    }

    #[test]
    fn reading_time_constant() {
        assert_eq!(reading_time(&"x".repeat(100)), 1.469);
        assert_eq!(reading_time(""), 0.0);
        assert_eq!(reading_time(&"x".repeat(1000)), 14.69);
        assert_eq!(reading_time("a b"), reading_time("abc"));
    }

    #[test]
    fn sentiment_scores() {
        assert_eq!(sentiment("good happy great", &lexicon()), 1.0);
        assert_eq!(sentiment("the noodles", &lexicon()), 0.0);
        assert!((sentiment("good, great but bad", &lexicon()) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            sentiment("good, great but bad", &lexicon().swapped()),
            -1.0 / 3.0
        );
    }

    #[test]
    fn empty_lists_rejected() {
        assert!(WordList::parse("# nothing\n\n").is_err());
        assert!(Lexicon::parse("", "#x").is_err());
    }

    #[test]
    fn word_list_normalizes_entries() {
        let l = WordList::parse("Don't\nbow-wow\n").unwrap();
        assert!(l.contains("dont"));
        assert!(l.contains("bow") && l.contains("wow"));
    }

    fn lm() -> crate::lm::NGramModel {
        let docs: Vec<Vec<String>> = ["Good food. The cat sat.", "Happy cat. Good mat."]
            .iter()
            .map(|t| text_tokens(t))
            .collect();
        train_ngram(&docs, 3, 0.1).unwrap()
    }

    #[test]
    fn scoring_is_deterministic() {
        let text = "Good food. The cat sat on the mat. Happy times! Bad service? Good.";
        let a = score_text("r1", text, &lm(), &list(), &lexicon()).unwrap();
        let b = score_text("r1", text, &lm(), &list(), &lexicon()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_sentence_vector() {
        let v = score_text("r2", "Good happy food", &lm(), &list(), &lexicon()).unwrap();
        assert_eq!(v.tc, 0.0);
        assert_eq!(v.sentiment, 1.0);
        assert_eq!(v.num_difficult_words, 0);
        assert!(v.ppl >= 1.0);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let v = score_text("r3", "Good food. Bad cat.", &lm(), &list(), &lexicon()).unwrap();
        let rows = vec![("r3".to_string(), v)];
        let mut buf = Vec::new();
        write_metrics_csv(&rows, &mut buf).unwrap();
        assert!(buf.starts_with(METRICS_HEADER.as_bytes()));
        assert_eq!(read_metrics_csv(&buf[..]).unwrap(), rows);
    }
}
