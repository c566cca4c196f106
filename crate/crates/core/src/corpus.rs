//! Review records, ingestion, filtering, splitting and derived covariates.
//!
//! Two on-disk forms are accepted: JSON Lines (one object per line) and a CSV
//! mirror whose header row lists the same keys in the same order. Every record
//! must carry every key; there is no imputation of missing covariates.
//! `norm_visits` is expected already multiplied by 1,000.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Column order of both the JSONL and the CSV schema.
pub const FIELDS: [&str; 16] = [
    "id",
    "text",
    "date",
    "rating",
    "elite",
    "num_friends",
    "num_user_reviews",
    "num_user_photos",
    "restaurant_id",
    "restaurant_name",
    "avg_rating",
    "price_level",
    "num_rest_reviews",
    "num_visits",
    "norm_visits",
    "label",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Real => "real",
            Label::Fake => "fake",
            Label::Unknown => "unknown",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(Label::Real),
            "fake" => Some(Label::Fake),
            "unknown" => Some(Label::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Format {
    /// Guess the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Jsonl,
        }
    }
}

/// One review with its user and restaurant covariates.
///
/// Field order is the serialization order of the JSONL schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    pub text: String,
    /// ISO-8601 calendar date, `YYYY-MM-DD`.
    pub date: String,
    pub rating: u8,
    pub elite: bool,
    pub num_friends: u64,
    pub num_user_reviews: u64,
    pub num_user_photos: u64,
    pub restaurant_id: String,
    pub restaurant_name: String,
    pub avg_rating: f64,
    pub price_level: u8,
    pub num_rest_reviews: u64,
    pub num_visits: u64,
    /// Visits normalized by state-wide visits, already scaled by 1,000.
    pub norm_visits: f64,
    pub label: Label,
}

impl Review {
    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| {
            Err(Error::InvalidRecord {
                id: self.id.clone(),
                message,
            })
        };
        if self.id.is_empty() {
            return bad("empty id".into());
        }
        if self.text.trim().is_empty() {
            return bad("text is empty".into());
        }
        if !(1..=5).contains(&self.rating) {
            return bad(format!("rating {} outside 1..=5", self.rating));
        }
        if !(1.0..=5.0).contains(&self.avg_rating) {
            return bad(format!("avg_rating {} outside 1.0..=5.0", self.avg_rating));
        }
        if !(1..=4).contains(&self.price_level) {
            return bad(format!("price_level {} outside 1..=4", self.price_level));
        }
        if !(self.norm_visits >= 0.0 && self.norm_visits.is_finite()) {
            return bad(format!("norm_visits {} is negative", self.norm_visits));
        }
        if self.restaurant_name.trim().is_empty() {
            return bad("restaurant_name is empty".into());
        }
        if parse_date(&self.date).is_none() {
            return bad(format!("date `{}` is not YYYY-MM-DD", self.date));
        }
        Ok(())
    }

    /// Calendar year of the review; the date is validated at construction.
    pub fn year(&self) -> i32 {
        parse_date(&self.date).map(|(y, _, _)| y).unwrap_or(0)
    }

    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

fn parse_date(s: &str) -> Option<(i32, u32, u32)> {
    let mut it = s.splitn(3, '-');
    let (y, m, d) = (it.next()?, it.next()?, it.next()?);
    if y.len() != 4 || m.len() != 2 || d.len() != 2 {
        return None;
    }
    let y: i32 = y.parse().ok()?;
    let m: u32 = m.parse().ok()?;
    let d: u32 = d.parse().ok()?;
    let leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    let days = match m {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if leap => 29,
        2 => 28,
        _ => return None,
    };
    (1..=days).contains(&d).then_some((y, m, d))
}

/// An ordered collection of reviews with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReviewSet {
    reviews: Vec<Review>,
    pub provenance: String,
}

impl ReviewSet {
    pub fn new(reviews: Vec<Review>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(reviews.len());
        for r in &reviews {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::InvalidRecord {
                    id: r.id.clone(),
                    message: "duplicate id".into(),
                });
            }
        }
        Ok(Self {
            reviews,
            provenance: provenance.into(),
        })
    }

    // Subsets of a valid set are valid.
    fn subset(&self, reviews: Vec<Review>, tag: &str) -> Self {
        Self {
            reviews,
            provenance: format!("{}|{}", self.provenance, tag),
        }
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn into_reviews(self) -> Vec<Review> {
        self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Review> {
        self.reviews.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Review> {
        self.reviews.iter().find(|r| r.id == id)
    }

    /// Keep reviews matching `pred`, preserving order.
    pub fn filter(&self, tag: &str, pred: impl Fn(&Review) -> bool) -> Self {
        self.subset(
            self.reviews.iter().filter(|r| pred(r)).cloned().collect(),
            tag,
        )
    }

    /// Concatenate two sets; ids must stay unique.
    pub fn concat(&self, other: &ReviewSet) -> Result<Self> {
        let mut reviews = self.reviews.clone();
        reviews.extend(other.reviews.iter().cloned());
        Self::new(reviews, format!("{}+{}", self.provenance, other.provenance))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.reviews {
            let line = serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| Error::io("<jsonl writer>", e))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wtr.write_record(FIELDS)
            .map_err(|e| Error::Format(e.to_string()))?;
        for r in &self.reviews {
            wtr.serialize(CsvRow::from(r))
                .map_err(|e| Error::Format(e.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::io("<csv writer>", e))
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        match format {
            Format::Jsonl => self.write_jsonl(&mut w)?,
            Format::Csv => self.write_csv(&mut w)?,
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a ReviewSet {
    type Item = &'a Review;
    type IntoIter = std::slice::Iter<'a, Review>;

    fn into_iter(self) -> Self::IntoIter {
        self.reviews.iter()
    }
}

// The CSV writer refuses headerless serialization of nested enums, so mirror
// the record with a flat row.
#[derive(Serialize)]
struct CsvRow<'a> {
    id: &'a str,
    text: &'a str,
    date: &'a str,
    rating: u8,
    elite: bool,
    num_friends: u64,
    num_user_reviews: u64,
    num_user_photos: u64,
    restaurant_id: &'a str,
    restaurant_name: &'a str,
    avg_rating: f64,
    price_level: u8,
    num_rest_reviews: u64,
    num_visits: u64,
    norm_visits: f64,
    label: &'static str,
}

impl<'a> From<&'a Review> for CsvRow<'a> {
    fn from(r: &'a Review) -> Self {
        Self {
            id: &r.id,
            text: &r.text,
            date: &r.date,
            rating: r.rating,
            elite: r.elite,
            num_friends: r.num_friends,
            num_user_reviews: r.num_user_reviews,
            num_user_photos: r.num_user_photos,
            restaurant_id: &r.restaurant_id,
            restaurant_name: &r.restaurant_name,
            avg_rating: r.avg_rating,
            price_level: r.price_level,
            num_rest_reviews: r.num_rest_reviews,
            num_visits: r.num_visits,
            norm_visits: r.norm_visits,
            label: r.label.as_str(),
        }
    }
}

/// Field access shared by the JSON and CSV readers so both report errors the
/// same way.
trait FieldSource {
    fn line(&self) -> usize;
    fn text(&self, field: &str) -> Result<String>;
    fn unsigned(&self, field: &str) -> Result<u64>;
    fn real(&self, field: &str) -> Result<f64>;
    fn flag(&self, field: &str) -> Result<bool>;

    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn small(&self, field: &str) -> Result<u8> {
        let v = self.unsigned(field)?;
        u8::try_from(v).map_err(|_| self.err(field, format!("value {v} out of range")))
    }

    fn review(&self) -> Result<Review> {
        let label = self.text("label")?;
        Ok(Review {
            id: self.text("id")?,
            text: self.text("text")?,
            date: self.text("date")?,
            rating: self.small("rating")?,
            elite: self.flag("elite")?,
            num_friends: self.unsigned("num_friends")?,
            num_user_reviews: self.unsigned("num_user_reviews")?,
            num_user_photos: self.unsigned("num_user_photos")?,
            restaurant_id: self.text("restaurant_id")?,
            restaurant_name: self.text("restaurant_name")?,
            avg_rating: self.real("avg_rating")?,
            price_level: self.small("price_level")?,
            num_rest_reviews: self.unsigned("num_rest_reviews")?,
            num_visits: self.unsigned("num_visits")?,
            norm_visits: self.real("norm_visits")?,
            label: Label::parse(&label)
                .ok_or_else(|| self.err("label", format!("unknown label `{label}`")))?,
        })
    }
}

struct JsonFields {
    line: usize,
    map: Map<String, Value>,
}

impl JsonFields {
    fn value(&self, field: &str) -> Result<&Value> {
        self.map
            .get(field)
            .ok_or_else(|| self.err(field, "missing"))
    }
}

impl FieldSource for JsonFields {
    fn line(&self) -> usize {
        self.line
    }

    fn text(&self, field: &str) -> Result<String> {
        self.value(field)?
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| self.err(field, "expected a string"))
    }

    fn unsigned(&self, field: &str) -> Result<u64> {
        self.value(field)?
            .as_u64()
            .ok_or_else(|| self.err(field, "expected a non-negative integer"))
    }

    fn real(&self, field: &str) -> Result<f64> {
        self.value(field)?
            .as_f64()
            .ok_or_else(|| self.err(field, "expected a number"))
    }

    fn flag(&self, field: &str) -> Result<bool> {
        self.value(field)?
            .as_bool()
            .ok_or_else(|| self.err(field, "expected a boolean"))
    }
}

struct CsvFields<'a> {
    line: usize,
    record: &'a csv::StringRecord,
}

impl CsvFields<'_> {
    fn raw(&self, field: &str) -> Result<&str> {
        let idx = FIELDS
            .iter()
            .position(|f| *f == field)
            .expect("field is part of the schema");
        self.record
            .get(idx)
            .ok_or_else(|| self.err(field, "missing"))
    }
}

impl FieldSource for CsvFields<'_> {
    fn line(&self) -> usize {
        self.line
    }

    fn text(&self, field: &str) -> Result<String> {
        self.raw(field).map(str::to_owned)
    }

    fn unsigned(&self, field: &str) -> Result<u64> {
        let raw = self.raw(field)?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(field, format!("`{raw}` is not a non-negative integer")))
    }

    fn real(&self, field: &str) -> Result<f64> {
        let raw = self.raw(field)?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(field, format!("`{raw}` is not a number")))
    }

    fn flag(&self, field: &str) -> Result<bool> {
        match self.raw(field)?.trim() {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(self.err(field, format!("`{other}` is not true/false"))),
        }
    }
}

pub fn read_jsonl<R: Read>(reader: R, provenance: &str) -> Result<ReviewSet> {
    let mut reviews = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            field: "-".into(),
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            field: "-".into(),
            message: e.to_string(),
        })?;
        let Value::Object(map) = value else {
            return Err(Error::Parse {
                line: line_no,
                field: "-".into(),
                message: "expected a JSON object".into(),
            });
        };
        let fields = JsonFields { line: line_no, map };
        if let Some(extra) = fields.map.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(fields.err(extra, "unknown field"));
        }
        let review = fields.review()?;
        review.validate()?;
        reviews.push(review);
    }
    ReviewSet::new(reviews, provenance)
}

pub fn read_csv<R: Read>(reader: R, provenance: &str) -> Result<ReviewSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let Some(header) = records.next() else {
        return ReviewSet::new(Vec::new(), provenance);
    };
    let header = header.map_err(|e| Error::Parse {
        line: 1,
        field: "-".into(),
        message: e.to_string(),
    })?;
    if header.iter().ne(FIELDS.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            field: "-".into(),
            message: format!("header must be `{}`", FIELDS.join(",")),
        });
    }
    let mut reviews = Vec::new();
    for record in records {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            field: "-".into(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != FIELDS.len() {
            return Err(Error::Parse {
                line,
                field: "-".into(),
                message: format!("expected {} columns, found {}", FIELDS.len(), record.len()),
            });
        }
        let review = CsvFields {
            line,
            record: &record,
        }
        .review()?;
        review.validate()?;
        reviews.push(review);
    }
    ReviewSet::new(reviews, provenance)
}

pub fn load_reviews(path: &Path, format: Format) -> Result<ReviewSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let provenance = path.display().to_string();
    match format {
        Format::Jsonl => read_jsonl(file, &provenance),
        Format::Csv => read_csv(file, &provenance),
    }
}

/// Non-elite reviews posted strictly after `cutoff_year`.
pub fn filter_inference_pool(set: &ReviewSet, cutoff_year: i32) -> ReviewSet {
    set.filter(&format!("pool>{cutoff_year}"), |r| {
        !r.elite && r.year() > cutoff_year
    })
}

fn check_fraction(train_fraction: f64) -> Result<()> {
    if train_fraction > 0.0 && train_fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )))
    }
}

fn partition(set: &ReviewSet, mut train_idx: Vec<usize>) -> (ReviewSet, ReviewSet) {
    train_idx.sort_unstable();
    let mut in_train = vec![false; set.len()];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) = set.reviews.iter().zip(&in_train).partition(|(_, &t)| t);
    (
        set.subset(train.into_iter().map(|(r, _)| r.clone()).collect(), "train"),
        set.subset(test.into_iter().map(|(r, _)| r.clone()).collect(), "test"),
    )
}

/// Seeded uniform split; the train side gets `round(train_fraction * N)`
/// reviews. Both sides keep the original order.
pub fn split(set: &ReviewSet, train_fraction: f64, seed: u64) -> Result<(ReviewSet, ReviewSet)> {
    check_fraction(train_fraction)?;
    let n = set.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(n_train);
    Ok(partition(set, idx))
}

/// Like [`split`] but rounds within each label so class proportions carry over.
pub fn split_stratified(
    set: &ReviewSet,
    train_fraction: f64,
    seed: u64,
) -> Result<(ReviewSet, ReviewSet)> {
    check_fraction(train_fraction)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, r) in set.reviews.iter().enumerate() {
        by_label.entry(r.label).or_default().push(i);
    }
    let mut train = Vec::new();
    for (_, mut idx) in by_label {
        let n_train = (train_fraction * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
    }
    Ok(partition(set, train))
}

pub fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Chain status per normalized restaurant name: a name attached to more than
/// five distinct restaurant ids is a chain.
pub fn chain_status(set: &ReviewSet) -> BTreeMap<String, bool> {
    let mut ids: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for r in set {
        ids.entry(normalize_name(&r.restaurant_name))
            .or_default()
            .insert(&r.restaurant_id);
    }
    ids.into_iter()
        .map(|(name, ids)| (name, ids.len() > 5))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn review(id: &str) -> Review {
        Review {
            id: id.into(),
            text: "Great noodles. Friendly staff.".into(),
            date: "2021-06-01".into(),
            rating: 4,
            elite: false,
            num_friends: 3,
            num_user_reviews: 10,
            num_user_photos: 2,
            restaurant_id: "r1".into(),
            restaurant_name: "Noona Noodles".into(),
            avg_rating: 4.0,
            price_level: 2,
            num_rest_reviews: 120,
            num_visits: 900,
            norm_visits: 0.2,
            label: Label::Unknown,
        }
    }

    fn set_of(reviews: Vec<Review>) -> ReviewSet {
        ReviewSet::new(reviews, "test").unwrap()
    }

    fn jsonl(reviews: &[Review]) -> String {
        let mut buf = Vec::new();
        set_of(reviews.to_vec()).write_jsonl(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn loads_three_records() {
        let text = jsonl(&[review("a"), review("b"), review("c")]);
        let set = read_jsonl(text.as_bytes(), "mem").unwrap();
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn rejects_rating_out_of_range() {
        let mut bad = review("r6");
        bad.rating = 6;
        let text = serde_json::to_string(&bad).unwrap();
        match read_jsonl(text.as_bytes(), "mem") {
            Err(Error::InvalidRecord { id, .. }) => assert_eq!(id, "r6"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_empty_set() {
        assert!(read_jsonl(&b""[..], "mem").unwrap().is_empty());
        assert!(read_csv(&b""[..], "mem").unwrap().is_empty());
    }

    #[test]
    fn parse_error_names_line_and_field() {
        let good = serde_json::to_string(&review("a")).unwrap();
        let bad = good.replace("\"num_friends\":3", "\"num_friends\":-3");
        let text = format!("{good}\n{bad}\n");
        match read_jsonl(text.as_bytes(), "mem") {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "num_friends");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_is_rejected() {
        let mut v = serde_json::to_value(review("a")).unwrap();
        v.as_object_mut().unwrap().remove("norm_visits");
        match read_jsonl(v.to_string().as_bytes(), "mem") {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "norm_visits"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(ReviewSet::new(vec![review("a"), review("a")], "t").is_err());
    }

    #[test]
    fn csv_mirror_round_trips() {
        let set = set_of(vec![review("a"), review("b")]);
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let header = std::str::from_utf8(&buf)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(header, FIELDS.join(","));
        let back = read_csv(&buf[..], "test").unwrap();
        assert_eq!(back.reviews(), set.reviews());
    }

    #[test]
    fn inference_pool_rule() {
        let mut elite21 = review("e21");
        elite21.elite = true;
        let ne21 = review("n21");
        let mut ne19 = review("n19");
        ne19.date = "2019-12-31".into();
        let mut ne20 = review("n20");
        ne20.date = "2020-12-31".into();
        let set = set_of(vec![elite21, ne21, ne19, ne20]);
        let pool = filter_inference_pool(&set, 2020);
        let ids: Vec<_> = pool.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["n21"]);
    }

    #[test]
    fn inference_pool_edge_cases() {
        let mut a = review("a");
        a.elite = true;
        let mut b = review("b");
        b.elite = true;
        assert!(filter_inference_pool(&set_of(vec![a, b]), 2020).is_empty());
        let all = set_of(vec![review("x"), review("y")]);
        assert_eq!(filter_inference_pool(&all, 2020).reviews(), all.reviews());
    }

    fn numbered(n: usize) -> ReviewSet {
        set_of((0..n).map(|i| review(&format!("r{i}"))).collect())
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split(&numbered(24_000), 0.8, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (19_200, 4_800));
        let (tr, te) = split(&numbered(1), 0.8, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 0));
    }

    #[test]
    fn split_is_deterministic() {
        let set = numbered(10);
        let a = split(&set, 0.8, 42).unwrap();
        let b = split(&set, 0.8, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        for f in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(split(&numbered(4), f, 1).is_err());
        }
    }

    #[test]
    fn stratified_split_keeps_proportions() {
        let reviews = (0..50)
            .map(|i| {
                let mut r = review(&format!("r{i}"));
                r.label = if i < 10 { Label::Fake } else { Label::Real };
                r
            })
            .collect();
        let (tr, _) = split_stratified(&set_of(reviews), 0.8, 3).unwrap();
        let fakes = tr.iter().filter(|r| r.label == Label::Fake).count();
        assert_eq!((tr.len(), fakes), (40, 8));
    }

    fn branches(name: &str, count: usize) -> Vec<Review> {
        (0..count)
            .map(|i| {
                let mut r = review(&format!("{name}-{i}"));
                r.restaurant_name = name.into();
                r.restaurant_id = format!("{name}-loc{i}");
                r
            })
            .collect()
    }

    #[test]
    fn chain_rule_boundary() {
        let mut all = branches("Six Guys", 6);
        all.extend(branches("Five Spot", 5));
        all.extend(branches("Solo", 1));
        // Repeated reviews of the same location do not add branches.
        let mut again = review("solo-again");
        again.restaurant_name = "  SOLO ".into();
        again.restaurant_id = "Solo-loc0".into();
        all.push(again);
        let status = chain_status(&set_of(all));
        assert!(status["six guys"]);
        assert!(!status["five spot"]);
        assert!(!status["solo"]);
    }

    #[test]
    fn chain_names_are_normalized() {
        let mut all = branches("Starbucks", 3);
        for (i, r) in branches("STARBUCKS ", 3).into_iter().enumerate() {
            let mut r = r;
            r.id = format!("upper-{i}");
            r.restaurant_id = format!("upper-loc{i}");
            all.push(r);
        }
        assert!(chain_status(&set_of(all))["starbucks"]);
    }

    #[test]
    fn date_validation() {
        assert!(parse_date("2020-02-29").is_some());
        assert!(parse_date("2021-02-29").is_none());
        assert!(parse_date("2021-13-01").is_none());
        assert!(parse_date("21-01-01").is_none());
    }
}
