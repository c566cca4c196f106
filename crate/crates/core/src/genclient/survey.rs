//! Pairwise "which review is AI-generated?" survey: construction from a
//! corpus and scoring of collected responses.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Review, ReviewSet};
use crate::error::{Error, Result};
use crate::stats::{tukey_hsd, TukeyResult};

pub const PAIRS_PER_CATEGORY: usize = 10;
pub const TRAINING_PAIRS: usize = 15;
pub const ATTENTION_CHECKS: usize = 2;
pub const MAX_WORD_GAP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Length {
    Long,
    Short,
}

impl Length {
    /// Long is 140 < words <= 180, Short is 100 <= words < 140.
    pub fn of(words: usize) -> Option<Self> {
        match words {
            141..=180 => Some(Length::Long),
            100..=139 => Some(Length::Short),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SurveyCategory {
    #[serde(rename = "Different-Long")]
    DifferentLong,
    #[serde(rename = "Different-Short")]
    DifferentShort,
    #[serde(rename = "Same-Long")]
    SameLong,
    #[serde(rename = "Same-Short")]
    SameShort,
}

impl SurveyCategory {
    /// Alphabetical, which is also the row order of the Tukey table.
    pub const ALL: [SurveyCategory; 4] = [
        SurveyCategory::DifferentLong,
        SurveyCategory::DifferentShort,
        SurveyCategory::SameLong,
        SurveyCategory::SameShort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurveyCategory::DifferentLong => "Different-Long",
            SurveyCategory::DifferentShort => "Different-Short",
            SurveyCategory::SameLong => "Same-Long",
            SurveyCategory::SameShort => "Same-Short",
        }
    }

    fn same_restaurant(self) -> bool {
        matches!(self, SurveyCategory::SameLong | SurveyCategory::SameShort)
    }

    fn length(self) -> Length {
        match self {
            SurveyCategory::DifferentLong | SurveyCategory::SameLong => Length::Long,
            _ => Length::Short,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    A,
    B,
    #[serde(rename = "abstain")]
    Abstain,
}

impl std::str::FromStr for Choice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "A" | "a" => Ok(Choice::A),
            "B" | "b" => Ok(Choice::B),
            "abstain" | "Abstain" | "ABSTAIN" => Ok(Choice::Abstain),
            other => Err(format!("choice {other:?} is not A, B or abstain")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyPair {
    pub human_id: String,
    pub ai_id: String,
    pub human_words: usize,
    pub ai_words: usize,
    pub same_restaurant: bool,
}

impl SurveyPair {
    pub fn word_gap(&self) -> usize {
        self.human_words.abs_diff(self.ai_words)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyQuestion {
    pub id: String,
    pub category: SurveyCategory,
    pub pair: SurveyPair,
    pub prompt: String,
    pub option_a: String,
    pub option_b: String,
    /// The AI-written option, or the option named in an attention check.
    pub correct: Choice,
    pub attention_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub pair: SurveyPair,
    pub human_text: String,
    pub ai_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyForm {
    pub seed: u64,
    pub training_pairs: Vec<TrainingPair>,
    pub questions: Vec<SurveyQuestion>,
}

const QUESTION_PROMPT: &str = "One of these two reviews was written by an AI. Which one?";

impl SurveyForm {
    pub fn question(&self, id: &str) -> Option<&SurveyQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn category_counts(&self) -> BTreeMap<SurveyCategory, usize> {
        let mut counts = BTreeMap::new();
        for q in &self.questions {
            *counts.entry(q.category).or_insert(0) += 1;
        }
        counts
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }
}

struct Candidate<'a> {
    review: &'a Review,
    words: usize,
    length: Length,
}

fn candidates<'a>(set: &'a ReviewSet, rng: &mut ChaCha8Rng) -> Vec<Candidate<'a>> {
    let mut out: Vec<Candidate> = set
        .iter()
        .filter_map(|r| {
            let words = r.word_count();
            Length::of(words).map(|length| Candidate {
                review: r,
                words,
                length,
            })
        })
        .collect();
    out.shuffle(rng);
    out
}

fn find_pair<'a>(
    humans: &[Candidate<'a>],
    fakes: &[Candidate<'a>],
    used: &(HashSet<&'a str>, HashSet<&'a str>),
    length: Option<Length>,
    same: Option<bool>,
) -> Option<(usize, usize)> {
    for (hi, h) in humans.iter().enumerate() {
        if used.0.contains(h.review.id.as_str()) || length.is_some_and(|l| l != h.length) {
            continue;
        }
        let hit = fakes.iter().position(|f| {
            !used.1.contains(f.review.id.as_str())
                && f.length == h.length
                && f.words.abs_diff(h.words) <= MAX_WORD_GAP
                && same.map_or(true, |s| {
                    (f.review.restaurant_id == h.review.restaurant_id) == s
                })
        });
        if let Some(fi) = hit {
            return Some((hi, fi));
        }
    }
    None
}

fn pair_of(h: &Candidate, f: &Candidate) -> SurveyPair {
    SurveyPair {
        human_id: h.review.id.clone(),
        ai_id: f.review.id.clone(),
        human_words: h.words,
        ai_words: f.words,
        same_restaurant: h.review.restaurant_id == f.review.restaurant_id,
    }
}

/// Ten pairs for each of the four categories plus fifteen training pairs,
/// each pair holding one human and one AI review of the same length class
/// whose word counts differ by at most thirty. Two questions become
/// attention checks.
pub fn build_survey(humans: &ReviewSet, fakes: &ReviewSet, seed: u64) -> Result<SurveyForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let human_pool = candidates(humans, &mut rng);
    let fake_pool = candidates(fakes, &mut rng);
    let mut used: (HashSet<&str>, HashSet<&str>) = Default::default();

    // Same-restaurant strata first: they are the scarcest.
    let order = [
        SurveyCategory::SameLong,
        SurveyCategory::SameShort,
        SurveyCategory::DifferentLong,
        SurveyCategory::DifferentShort,
    ];
    let mut picked: Vec<(SurveyCategory, usize, usize)> = Vec::new();
    for cat in order {
        for k in 0..PAIRS_PER_CATEGORY {
            match find_pair(
                &human_pool,
                &fake_pool,
                &used,
                Some(cat.length()),
                Some(cat.same_restaurant()),
            ) {
                Some((hi, fi)) => {
                    used.0.insert(&human_pool[hi].review.id);
                    used.1.insert(&fake_pool[fi].review.id);
                    picked.push((cat, hi, fi));
                }
                None => {
                    return Err(Error::Stratum {
                        stratum: cat.name().to_string(),
                        shortfall: PAIRS_PER_CATEGORY - k,
                    })
                }
            }
        }
    }
    let mut training_pairs = Vec::with_capacity(TRAINING_PAIRS);
    for k in 0..TRAINING_PAIRS {
        let (hi, fi) = find_pair(&human_pool, &fake_pool, &used, None, None).ok_or_else(|| {
            Error::Stratum {
                stratum: "training".into(),
                shortfall: TRAINING_PAIRS - k,
            }
        })?;
        let (h, f) = (&human_pool[hi], &fake_pool[fi]);
        used.0.insert(&h.review.id);
        used.1.insert(&f.review.id);
        training_pairs.push(TrainingPair {
            pair: pair_of(h, f),
            human_text: h.review.text.clone(),
            ai_text: f.review.text.clone(),
        });
    }

    picked.shuffle(&mut rng);
    let checks: HashSet<usize> = rand::seq::index::sample(&mut rng, picked.len(), ATTENTION_CHECKS)
        .into_iter()
        .collect();
    let questions = picked
        .into_iter()
        .enumerate()
        .map(|(i, (category, hi, fi))| {
            let (h, f) = (&human_pool[hi], &fake_pool[fi]);
            let ai_first = rng.gen_bool(0.5);
            let (option_a, option_b) = if ai_first {
                (f.review.text.clone(), h.review.text.clone())
            } else {
                (h.review.text.clone(), f.review.text.clone())
            };
            let attention_check = checks.contains(&i);
            let (prompt, correct) = if attention_check {
                let c = if rng.gen_bool(0.5) {
                    Choice::A
                } else {
                    Choice::B
                };
                let letter = if c == Choice::A { "A" } else { "B" };
                (
                    format!("This is an attention check: please select option {letter}."),
                    c,
                )
            } else {
                (
                    QUESTION_PROMPT.to_string(),
                    if ai_first { Choice::A } else { Choice::B },
                )
            };
            SurveyQuestion {
                id: format!("q{:02}", i + 1),
                category,
                pair: pair_of(h, f),
                prompt,
                option_a,
                option_b,
                correct,
                attention_check,
            }
        })
        .collect();
    Ok(SurveyForm {
        seed,
        training_pairs,
        questions,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub respondent_id: String,
    pub question_id: String,
    pub choice: Choice,
}

/// CSV with header `respondent_id,question_id,choice`.
pub fn read_responses<R: Read>(r: R) -> Result<Vec<Response>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["respondent_id", "question_id", "choice"] {
        return Err(Error::Parse {
            line: 1,
            field: "header".into(),
            message: "expected respondent_id,question_id,choice".into(),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            field: "record".into(),
            message: e.to_string(),
        })?;
        let get = |k: usize, name: &str| -> Result<String> {
            rec.get(k)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse {
                    line,
                    field: name.into(),
                    message: "missing value".into(),
                })
        };
        let choice = get(2, "choice")?.parse().map_err(|message| Error::Parse {
            line,
            field: "choice".into(),
            message,
        })?;
        out.push(Response {
            respondent_id: get(0, "respondent_id")?,
            question_id: get(1, "question_id")?,
            choice,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: SurveyCategory,
    pub correct: usize,
    pub answered: usize,
    pub abstained: usize,
    /// `None` when every answer was an abstention.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyScore {
    pub respondents: usize,
    pub dropped_inattentive: usize,
    /// Pooled over kept respondents; abstentions are not in the denominator.
    pub overall_accuracy: Option<f64>,
    pub abstention_rate: f64,
    pub respondent_mean_accuracy: Option<f64>,
    pub respondent_std_accuracy: Option<f64>,
    pub per_category: Vec<CategoryScore>,
    /// Groups are per-respondent accuracies within each category; `None` when
    /// a category has fewer than two respondents with a scored answer.
    pub tukey: Option<TukeyResult>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let sd = (xs.len() > 1)
        .then(|| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt());
    (Some(m), sd)
}

/// Drop respondents who miss an attention check, then score the remaining
/// answers. The result does not depend on the order of `responses`.
pub fn score_survey(form: &SurveyForm, responses: &[Response]) -> Result<SurveyScore> {
    let mut by_respondent: BTreeMap<&str, BTreeMap<&str, Choice>> = BTreeMap::new();
    for r in responses {
        if form.question(&r.question_id).is_none() {
            return Err(Error::InvalidArgument(format!(
                "respondent {} answered unknown question {}",
                r.respondent_id, r.question_id
            )));
        }
        let answers = by_respondent.entry(&r.respondent_id).or_default();
        if answers.insert(&r.question_id, r.choice).is_some() {
            return Err(Error::InvalidArgument(format!(
                "respondent {} answered {} twice",
                r.respondent_id, r.question_id
            )));
        }
    }
    let checks: Vec<&SurveyQuestion> = form
        .questions
        .iter()
        .filter(|q| q.attention_check)
        .collect();
    let respondents = by_respondent.len();
    by_respondent.retain(|_, answers| {
        checks
            .iter()
            .all(|q| answers.get(q.id.as_str()) == Some(&q.correct))
    });
    let dropped_inattentive = respondents - by_respondent.len();

    let mut cats: BTreeMap<SurveyCategory, CategoryScore> = SurveyCategory::ALL
        .iter()
        .map(|&c| {
            (
                c,
                CategoryScore {
                    category: c,
                    correct: 0,
                    answered: 0,
                    abstained: 0,
                    accuracy: None,
                },
            )
        })
        .collect();
    let mut per_resp_cat: BTreeMap<SurveyCategory, Vec<f64>> = BTreeMap::new();
    let mut per_resp_acc = Vec::new();
    for answers in by_respondent.values() {
        let mut resp_cat: BTreeMap<SurveyCategory, (usize, usize)> = BTreeMap::new();
        for (qid, &choice) in answers {
            let q = form.question(qid).expect("checked above");
            if q.attention_check {
                continue;
            }
            let slot = cats.get_mut(&q.category).expect("all categories present");
            if choice == Choice::Abstain {
                slot.abstained += 1;
                continue;
            }
            let hit = (choice == q.correct) as usize;
            slot.answered += 1;
            slot.correct += hit;
            let e = resp_cat.entry(q.category).or_insert((0, 0));
            e.0 += hit;
            e.1 += 1;
        }
        let (c, a) = resp_cat
            .values()
            .fold((0, 0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        if let Some(acc) = ratio(c, a) {
            per_resp_acc.push(acc);
        }
        for (cat, (c, a)) in resp_cat {
            per_resp_cat
                .entry(cat)
                .or_default()
                .push(c as f64 / a as f64);
        }
    }
    for s in cats.values_mut() {
        s.accuracy = ratio(s.correct, s.answered);
    }
    let correct: usize = cats.values().map(|s| s.correct).sum();
    let answered: usize = cats.values().map(|s| s.answered).sum();
    let abstained: usize = cats.values().map(|s| s.abstained).sum();
    let (respondent_mean_accuracy, respondent_std_accuracy) = mean_std(&per_resp_acc);

    let groups: Vec<(&str, Vec<f64>)> = SurveyCategory::ALL
        .iter()
        .map(|c| (c.name(), per_resp_cat.remove(c).unwrap_or_default()))
        .collect();
    let tukey = if groups.iter().all(|(_, g)| g.len() >= 2) {
        Some(tukey_hsd(&groups)?)
    } else {
        None
    };
    Ok(SurveyScore {
        respondents,
        dropped_inattentive,
        overall_accuracy: ratio(correct, answered),
        abstention_rate: ratio(abstained, answered + abstained).unwrap_or(0.0),
        respondent_mean_accuracy,
        respondent_std_accuracy,
        per_category: cats.into_values().collect(),
        tukey,
    })
}

/// Plain-text table in the usual Tukey layout, with category accuracies
/// (in percent) in brackets.
pub fn render_tukey(score: &SurveyScore) -> String {
    let Some(t) = &score.tukey else {
        return "Tukey HSD not computable: a category has fewer than two scored respondents\n"
            .into();
    };
    let pct = |name: &str| {
        score
            .per_category
            .iter()
            .find(|c| c.category.name() == name)
            .and_then(|c| c.accuracy)
            .map_or_else(|| "n/a".into(), |a| format!("{:.2}", 100.0 * a))
    };
    let mut out = format!(
        "{:<26}{:<26}{:>12}\n",
        "Category 1", "Category 2", "MeanDiff"
    );
    for p in &t.pairs {
        out.push_str(&format!(
            "{:<26}{:<26}{:>12}\n",
            format!("{} ({})", p.group_a, pct(&p.group_a)),
            format!("{} ({})", p.group_b, pct(&p.group_b)),
            format!("{:.2}{}", 100.0 * p.mean_diff, p.significance.stars())
        ));
    }
    out.push_str("*p<.05, **p<.01, ***p<.001\n");
    out
}
