//! The staged experiment behind the command-line tool. Every stage reads the
//! artifacts of earlier stages from the output directory, writes its own,
//! and records them in `run.manifest`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tracing::info;

use crate::config::{BackendKind, FeatureKind, RunConfig};
use crate::corpus::{
    chain_status, filter_inference_pool, load_reviews, normalize_name, split, split_stratified,
    Format, Label, Review, ReviewSet,
};
use crate::detect::{
    classify_sweep, cross_validate, evaluate, fit, roc, Calibration, DetectorKind, DetectorModel,
    Grid, LrOptions,
};
use crate::error::{Error, Result};
use crate::genclient::survey::{
    build_survey, read_responses, render_tukey, score_survey, SurveyForm,
};
use crate::genclient::{
    generate_batch, sample_gen_params, FixtureMode, GenBackend, GenRequest, HttpBackend,
    HttpOptions, MockBackend,
};
use crate::lm::{text_tokens, train_ngram};
use crate::stats::{covariates, sensitivity, write_figure_csvs, Covariates};
use crate::stylometrics::{read_metrics_csv, score_review, write_metrics_csv, Lexicon, WordList};
use crate::textproc::{bpe_train, tokenize_words, vectorize, BpeModel, Featurizer, Vocabulary};

pub const MANIFEST: &str = "run.manifest";
pub const CORPUS: &str = "corpus.jsonl";
pub const LABELED: &str = "labeled.jsonl";
pub const VOCAB: &str = "models/vocab.txt";
pub const FEATURES: &str = "models/features.json";
pub const BPE_MERGES: &str = "models/bpe.merges";
pub const SPLITS: &str = "models/splits.json";
pub const CALIBRATION: &str = "models/calibration.json";
pub const LM: &str = "models/lm.tsv";
pub const GENERATION_LOG: &str = "reports/generation.csv";
pub const GRID_SEARCH: &str = "reports/grid_search.csv";
pub const EVAL: &str = "reports/eval.csv";
pub const ROC: &str = "reports/roc.csv";
pub const SCORES: &str = "reports/scores.csv";
pub const FLAGS: &str = "reports/flags.csv";
pub const METRICS: &str = "reports/metrics.csv";
pub const SENSITIVITY: &str = "reports/sensitivity.csv";
pub const TABLE4: &str = "reports/table4.txt";
pub const SURVEY_FORM: &str = "survey/form.json";
pub const SURVEY_SCORE: &str = "reports/survey_score.json";
pub const SURVEY_TUKEY: &str = "reports/survey_tukey.txt";

const DALE_CHALL: &str = include_str!("../../../data/dale_chall.txt");
const POSITIVE_WORDS: &str = include_str!("../../../data/sentiment_positive.txt");
const NEGATIVE_WORDS: &str = include_str!("../../../data/sentiment_negative.txt");

pub fn model_path(kind: DetectorKind) -> String {
    format!("models/{}.model", kind.short())
}

#[derive(Debug, Serialize, Deserialize)]
struct Splits {
    seed: u64,
    stratified: bool,
    train: Vec<String>,
    validation: Vec<String>,
    test: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FeatureSpec {
    kind: FeatureKind,
    bpe_merges: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CalibrationFile {
    detector: DetectorKind,
    #[serde(flatten)]
    calibration: Calibration,
}

/// A trained detector ready to score raw text.
#[derive(Debug, Clone)]
pub struct Scorer {
    model: DetectorModel,
    vocab: Vocabulary,
    featurizer: Featurizer,
}

impl Scorer {
    pub fn kind(&self) -> DetectorKind {
        self.model.detector.kind()
    }

    /// Probability that `text` is machine-generated.
    pub fn score_text(&self, text: &str) -> f64 {
        let (m, _) = vectorize(&[self.featurizer.tokens(text)], Some(&self.vocab));
        self.model.score_row(m.row(0))
    }

    pub fn score_set(&self, set: &ReviewSet) -> Vec<f64> {
        let docs: Vec<Vec<String>> = set
            .reviews()
            .par_iter()
            .map(|r| self.featurizer.tokens(&r.text))
            .collect();
        let (matrix, _) = vectorize(&docs, Some(&self.vocab));
        self.model.score_matrix(&matrix)
    }
}

pub struct Pipeline {
    cfg: RunConfig,
    out: PathBuf,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    f(BufReader::new(file))
}

fn save_with<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

fn fake_labels(set: &ReviewSet) -> Vec<bool> {
    set.iter().map(|r| r.label == Label::Fake).collect()
}

fn pick(set: &ReviewSet, ids: &[String], tag: &str) -> Result<ReviewSet> {
    let reviews = ids
        .iter()
        .map(|id| {
            set.get(id).cloned().ok_or_else(|| Error::InvalidRecord {
                id: id.clone(),
                message: format!("listed in the {tag} split but missing from {LABELED}"),
            })
        })
        .collect::<Result<Vec<Review>>>()?;
    ReviewSet::new(reviews, tag)
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let out = cfg.out_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Self { cfg, out })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn need(&self, rel: &str, producer: &'static str) -> Result<PathBuf> {
        let p = self.path(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(Error::MissingArtifact { path: p, producer })
        }
    }

    fn display(&self, p: &Path) -> String {
        p.strip_prefix(&self.out).unwrap_or(p).display().to_string()
    }

    /// Replace the manifest lines of `outputs` with fresh ones. Lines carry
    /// no timestamps, so identical runs give identical manifests.
    fn record(&self, command: &str, inputs: &[&Path], outputs: &[PathBuf]) -> Result<()> {
        let path = self.path(MANIFEST);
        let mut lines: Vec<String> = match std::fs::read_to_string(&path) {
            Ok(s) => s.lines().map(str::to_owned).collect(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let input_list = inputs
            .iter()
            .map(|p| Ok(format!("{}@{}", self.display(p), &sha256_file(p)?[..16])))
            .collect::<Result<Vec<String>>>()?
            .join(",");
        for out in outputs {
            let name = self.display(out);
            lines.retain(|l| l.split('\t').nth(1) != Some(name.as_str()));
            lines.push(format!(
                "{}\t{name}\tcommand={command}\tseed={}\tversion={}\tinputs={input_list}",
                sha256_file(out)?,
                self.cfg.seed,
                env!("CARGO_PKG_VERSION"),
            ));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        write_text(&path, &text)
    }

    pub fn ingest(&self, input: Option<&Path>) -> Result<Vec<PathBuf>> {
        let input = input.unwrap_or(&self.cfg.corpus);
        let set = load_reviews(input, Format::from_path(input))?;
        let out = self.path(CORPUS);
        with_file_write(&out, |w| set.write_jsonl(w))?;
        info!(reviews = set.len(), "ingested");
        self.record("ingest", &[input], std::slice::from_ref(&out))?;
        Ok(vec![out])
    }

    fn backend(&self) -> Result<Box<dyn GenBackend>> {
        Ok(match self.cfg.gen.backend {
            BackendKind::Mock => Box::new(MockBackend),
            BackendKind::Http => {
                let mut opts = HttpOptions::new(self.cfg.gen.endpoint.clone());
                opts.fixtures = match (&self.cfg.gen.fixtures, self.cfg.gen.replay) {
                    (Some(dir), true) => FixtureMode::Replay(dir.clone()),
                    (Some(dir), false) => FixtureMode::Record(dir.clone()),
                    (None, _) => FixtureMode::Off,
                };
                Box::new(HttpBackend::from_env(opts)?)
            }
        })
    }

    /// One generated review per elite review; elite seeds are labelled real
    /// and generated text fake.
    pub fn generate(&self) -> Result<Vec<PathBuf>> {
        let corpus_path = self.need(CORPUS, "ingest")?;
        let corpus = load_reviews(&corpus_path, Format::Jsonl)?;
        let seeds: Vec<&Review> = corpus.iter().filter(|r| r.elite).collect();
        if seeds.is_empty() {
            return Err(Error::Undefined(
                "corpus has no elite reviews to seed generation".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let requests = seeds
            .iter()
            .map(|r| {
                let (model, temperature) = sample_gen_params(&mut rng);
                GenRequest::new(
                    r.restaurant_name.clone(),
                    r.text.clone(),
                    model,
                    temperature,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let backend = self.backend()?;
        let texts = generate_batch(backend.as_ref(), &requests, self.cfg.gen.max_inflight)
            .into_iter()
            .collect::<std::result::Result<Vec<String>, _>>()?;

        let mut reviews: Vec<Review> = seeds
            .iter()
            .map(|r| Review {
                label: Label::Real,
                ..(*r).clone()
            })
            .collect();
        let mut log = String::from("id,seed_id,backend,model,temperature\n");
        for ((seed, req), text) in seeds.iter().zip(&requests).zip(texts) {
            let id = format!("{}-gen", seed.id);
            log.push_str(&format!(
                "{id},{},{},{},{}\n",
                seed.id,
                backend.name(),
                req.model.as_str(),
                req.temperature
            ));
            reviews.push(Review {
                id,
                text,
                elite: false,
                label: Label::Fake,
                ..(*seed).clone()
            });
        }
        let labeled = ReviewSet::new(reviews, "labeled")?;
        let out = self.path(LABELED);
        with_file_write(&out, |w| labeled.write_jsonl(w))?;
        let log_path = self.path(GENERATION_LOG);
        write_text(&log_path, &log)?;
        let outputs = vec![out, log_path];
        self.record("generate", &[&corpus_path], &outputs)?;
        Ok(outputs)
    }

    fn load_featurizer(&self) -> Result<Featurizer> {
        let spec: FeatureSpec = read_json(&self.need(FEATURES, "train")?)?;
        Ok(match spec.kind {
            FeatureKind::Words => Featurizer::Words,
            FeatureKind::Bpe => {
                Featurizer::Bpe(with_file(&self.need(BPE_MERGES, "train")?, BpeModel::read)?)
            }
        })
    }

    fn docs(featurizer: &Featurizer, set: &ReviewSet) -> Vec<Vec<String>> {
        set.reviews()
            .par_iter()
            .map(|r| featurizer.tokens(&r.text))
            .collect()
    }

    /// Train/test split, a validation slice carved from train, grid search
    /// on the rest, then both detectors fit with their best setting.
    pub fn train(&self) -> Result<Vec<PathBuf>> {
        let labeled_path = self.need(LABELED, "generate")?;
        let labeled = load_reviews(&labeled_path, Format::Jsonl)?;
        let labeled = labeled.filter("labeled", |r| r.label != Label::Unknown);
        let seed = self.cfg.seed;
        let splitter = if self.cfg.stratified {
            split_stratified
        } else {
            split
        };
        let (train, test) = splitter(&labeled, self.cfg.train_fraction, seed)?;
        let (fit_set, valid) = splitter(
            &train,
            1.0 - self.cfg.validation_fraction,
            seed.wrapping_add(1),
        )?;

        let mut outputs = Vec::new();
        let featurizer = match self.cfg.features {
            FeatureKind::Words => Featurizer::Words,
            FeatureKind::Bpe => {
                let corpus: Vec<String> = fit_set
                    .iter()
                    .map(|r| tokenize_words(&r.text).join(" "))
                    .collect();
                let model = bpe_train(&corpus, self.cfg.bpe_merges);
                let p = self.path(BPE_MERGES);
                save_with(&p, |w| model.write(w))?;
                outputs.push(p);
                Featurizer::Bpe(model)
            }
        };
        let spec = FeatureSpec {
            kind: self.cfg.features,
            bpe_merges: (self.cfg.features == FeatureKind::Bpe).then_some(self.cfg.bpe_merges),
        };
        let p = self.path(FEATURES);
        write_json(&p, &spec)?;
        outputs.push(p);

        let (matrix, vocab) = vectorize(&Self::docs(&featurizer, &fit_set), None);
        let labels = fake_labels(&fit_set);
        let (test_matrix, _) = vectorize(&Self::docs(&featurizer, &test), Some(&vocab));
        let test_labels = fake_labels(&test);
        let lr_opts = LrOptions::default();

        let mut grid_csv = String::from("model,value,mean_accuracy,folds_scored,selected\n");
        let mut eval_csv =
            String::from("model,hyperparameter,accuracy,precision,recall,f1,tp,fp,tn,fn,precision_undefined,recall_undefined\n");
        for kind in [DetectorKind::NaiveBayes, DetectorKind::LogisticRegression] {
            let values = match kind {
                DetectorKind::NaiveBayes => self.cfg.grid.nb.clone(),
                DetectorKind::LogisticRegression => self.cfg.grid.lr.clone(),
            };
            let cv = cross_validate(
                &matrix,
                &labels,
                &Grid { kind, values },
                self.cfg.folds,
                seed,
                &lr_opts,
            )?;
            for c in &cv.candidates {
                grid_csv.push_str(&format!(
                    "{},{},{:.6},{},{}\n",
                    kind.short(),
                    c.value,
                    c.mean_accuracy,
                    c.folds_scored,
                    c.value == cv.best
                ));
            }
            let model =
                DetectorModel::new(fit(kind, &matrix, &labels, cv.best, &lr_opts)?, &vocab)?;
            let preds: Vec<bool> = model
                .score_matrix(&test_matrix)
                .iter()
                .map(|&s| s >= 0.5)
                .collect();
            let e = evaluate(&preds, &test_labels)?;
            eval_csv.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{}\n",
                kind.short(),
                cv.best,
                e.accuracy,
                e.precision,
                e.recall,
                e.f1,
                e.tp,
                e.fp,
                e.tn,
                e.fn_,
                e.precision_undefined,
                e.recall_undefined
            ));
            info!(
                model = kind.short(),
                best = cv.best,
                accuracy = e.accuracy,
                "trained"
            );
            let p = self.path(&model_path(kind));
            save_with(&p, |w| model.write(w))?;
            outputs.push(p);
        }
        let p = self.path(VOCAB);
        save_with(&p, |w| vocab.write(w))?;
        outputs.push(p);
        let ids = |s: &ReviewSet| s.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
        let splits = Splits {
            seed,
            stratified: self.cfg.stratified,
            train: ids(&fit_set),
            validation: ids(&valid),
            test: ids(&test),
        };
        let p = self.path(SPLITS);
        write_json(&p, &splits)?;
        outputs.push(p);
        for (rel, text) in [(GRID_SEARCH, &grid_csv), (EVAL, &eval_csv)] {
            let p = self.path(rel);
            write_text(&p, text)?;
            outputs.push(p);
        }
        self.record("train", &[&labeled_path], &outputs)?;
        Ok(outputs)
    }

    /// The trained detector of `kind` (the configured one by default) with
    /// its vocabulary and featurizer.
    pub fn scorer(&self, kind: Option<DetectorKind>) -> Result<Scorer> {
        let kind = kind.unwrap_or(self.cfg.detector);
        let model = with_file(&self.need(&model_path(kind), "train")?, DetectorModel::read)?;
        let vocab = with_file(&self.need(VOCAB, "train")?, Vocabulary::read)?;
        model.check_vocabulary(&vocab)?;
        Ok(Scorer {
            model,
            vocab,
            featurizer: self.load_featurizer()?,
        })
    }

    fn score_set(&self, kind: DetectorKind, set: &ReviewSet) -> Result<Vec<f64>> {
        self.scorer(Some(kind)).map(|s| s.score_set(set))
    }

    /// ROC on the validation slice and the Youden-optimal threshold.
    pub fn calibrate(&self, detector: Option<DetectorKind>) -> Result<Vec<PathBuf>> {
        let kind = detector.unwrap_or(self.cfg.detector);
        let splits_path = self.need(SPLITS, "train")?;
        let splits: Splits = read_json(&splits_path)?;
        let labeled_path = self.need(LABELED, "generate")?;
        let labeled = load_reviews(&labeled_path, Format::Jsonl)?;
        let valid = pick(&labeled, &splits.validation, "validation")?;
        let scores = self.score_set(kind, &valid)?;
        let curve = roc(&scores, &fake_labels(&valid))?;
        let (j_star, j) = crate::detect::youden_j(&curve);
        let calibration = Calibration::with_sweep(&self.cfg.sweep, j_star, j)?;
        info!(j_star, j, "calibrated");
        let roc_path = self.path(ROC);
        with_file_write(&roc_path, |w| curve.write_csv(w))?;
        let cal_path = self.path(CALIBRATION);
        write_json(
            &cal_path,
            &CalibrationFile {
                detector: kind,
                calibration,
            },
        )?;
        let model = self.path(&model_path(kind));
        let outputs = vec![roc_path, cal_path];
        self.record(
            "calibrate",
            &[&splits_path, &labeled_path, &model],
            &outputs,
        )?;
        Ok(outputs)
    }

    fn load_calibration(&self) -> Result<(PathBuf, CalibrationFile)> {
        let p = self.need(CALIBRATION, "calibrate")?;
        let c = read_json(&p)?;
        Ok((p, c))
    }

    fn pool(&self) -> Result<(PathBuf, ReviewSet, ReviewSet)> {
        let p = self.need(CORPUS, "ingest")?;
        let corpus = load_reviews(&p, Format::Jsonl)?;
        let pool = filter_inference_pool(&corpus, self.cfg.cutoff_year);
        Ok((p, corpus, pool))
    }

    /// Score the non-elite reviews after the cutoff year and flag them at
    /// every sweep threshold.
    pub fn infer(&self) -> Result<Vec<PathBuf>> {
        let (cal_path, cal) = self.load_calibration()?;
        let (corpus_path, _, pool) = self.pool()?;
        let scores = self.score_set(cal.detector, &pool)?;
        let sweep = classify_sweep(&scores, &cal.calibration)?;

        let mut scores_csv = String::from("id,score\n");
        for (r, s) in pool.iter().zip(&scores) {
            scores_csv.push_str(&format!("{},{s}\n", r.id));
        }
        let mut flags_csv = String::from("id");
        for p in &sweep.points {
            flags_csv.push(',');
            flags_csv.push_str(&p.label);
        }
        flags_csv.push('\n');
        for (i, r) in pool.iter().enumerate() {
            flags_csv.push_str(&r.id);
            for f in &sweep.flags {
                flags_csv.push_str(if f[i] { ",1" } else { ",0" });
            }
            flags_csv.push('\n');
        }
        let (sp, fp) = (self.path(SCORES), self.path(FLAGS));
        write_text(&sp, &scores_csv)?;
        write_text(&fp, &flags_csv)?;
        info!(pool = pool.len(), "scored inference pool");
        let model = self.path(&model_path(cal.detector));
        let outputs = vec![sp, fp];
        self.record("infer", &[&cal_path, &corpus_path, &model], &outputs)?;
        Ok(outputs)
    }

    fn resources(&self) -> Result<(WordList, Lexicon)> {
        let r = &self.cfg.resources;
        let list = match &r.dale_chall {
            Some(p) => WordList::load(p)?,
            None => WordList::parse(DALE_CHALL)?,
        };
        let lexicon = match (&r.sentiment_positive, &r.sentiment_negative) {
            (Some(p), Some(n)) => Lexicon::load(p, n)?,
            (None, None) => Lexicon::parse(POSITIVE_WORDS, NEGATIVE_WORDS)?,
            _ => {
                return Err(Error::InvalidArgument(
                    "set both sentiment_positive and sentiment_negative, or neither".into(),
                ))
            }
        };
        Ok((list, lexicon))
    }

    /// Language model on the human-labelled reviews, then the writing-style
    /// metrics for every review in the inference pool.
    pub fn metrics(&self) -> Result<Vec<PathBuf>> {
        let labeled_path = self.need(LABELED, "generate")?;
        let labeled = load_reviews(&labeled_path, Format::Jsonl)?;
        let human: Vec<Vec<String>> = labeled
            .iter()
            .filter(|r| r.label == Label::Real)
            .map(|r| text_tokens(&r.text))
            .collect();
        let lm = train_ngram(&human, self.cfg.lm.order, self.cfg.lm.k)?;
        let (list, lexicon) = self.resources()?;
        let (corpus_path, _, pool) = self.pool()?;
        let rows = pool
            .reviews()
            .par_iter()
            .map(|r| score_review(r, &lm, &list, &lexicon).map(|m| (r.id.clone(), m)))
            .collect::<Result<Vec<_>>>()?;
        let lm_path = self.path(LM);
        save_with(&lm_path, |w| lm.write(w))?;
        let metrics_path = self.path(METRICS);
        with_file_write(&metrics_path, |w| write_metrics_csv(&rows, w))?;
        let outputs = vec![lm_path, metrics_path];
        self.record("metrics", &[&labeled_path, &corpus_path], &outputs)?;
        Ok(outputs)
    }

    fn read_scores(path: &Path) -> Result<Vec<(String, f64)>> {
        with_file(path, |r| {
            let mut out = Vec::new();
            for (i, line) in r.lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if i == 0 {
                    if line != "id,score" {
                        return Err(Error::Format(format!(
                            "{}: unexpected header",
                            path.display()
                        )));
                    }
                    continue;
                }
                let (id, s) = line.split_once(',').ok_or_else(|| Error::Parse {
                    line: i + 1,
                    field: "score".into(),
                    message: "expected id,score".into(),
                })?;
                let score: f64 = s.parse().map_err(|_| Error::Parse {
                    line: i + 1,
                    field: "score".into(),
                    message: format!("{s:?} is not a number"),
                })?;
                out.push((id.to_string(), score));
            }
            Ok(out)
        })
    }

    /// Human-versus-AI comparison of all covariates at every threshold.
    pub fn analyze(&self) -> Result<Vec<PathBuf>> {
        let (cal_path, cal) = self.load_calibration()?;
        let scores_path = self.need(SCORES, "infer")?;
        let metrics_path = self.need(METRICS, "metrics")?;
        let (corpus_path, corpus, pool) = self.pool()?;
        let scores = Self::read_scores(&scores_path)?;
        let metrics: HashMap<String, _> = with_file(&metrics_path, read_metrics_csv)?
            .into_iter()
            .collect();
        let chains = chain_status(&corpus);
        if scores.len() != pool.len()
            || scores
                .iter()
                .zip(pool.iter())
                .any(|((id, _), r)| *id != r.id)
        {
            return Err(Error::Format(format!(
                "{SCORES} does not match the current inference pool; rerun `fakescope infer`"
            )));
        }
        let data = pool
            .iter()
            .map(|r| {
                let m = metrics.get(&r.id).ok_or_else(|| Error::InvalidRecord {
                    id: r.id.clone(),
                    message: format!("no row in {METRICS}; rerun `fakescope metrics`"),
                })?;
                let chain = chains
                    .get(&normalize_name(&r.restaurant_name))
                    .copied()
                    .unwrap_or(false);
                Ok(covariates(r, chain, m))
            })
            .collect::<Result<Vec<Covariates>>>()?;
        let values: Vec<f64> = scores.iter().map(|(_, s)| *s).collect();
        let table = sensitivity(&data, &classify_sweep(&values, &cal.calibration)?)?;

        let mut outputs = Vec::new();
        let p = self.path(SENSITIVITY);
        with_file_write(&p, |w| table.write_csv(w))?;
        outputs.push(p);
        let p = self.path(TABLE4);
        write_text(&p, &table.render_text())?;
        outputs.push(p);
        outputs.extend(write_figure_csvs(&table, &self.path("reports"))?);
        self.record(
            "analyze",
            &[&cal_path, &scores_path, &metrics_path, &corpus_path],
            &outputs,
        )?;
        Ok(outputs)
    }

    pub fn survey_build(&self) -> Result<Vec<PathBuf>> {
        let labeled_path = self.need(LABELED, "generate")?;
        let labeled = load_reviews(&labeled_path, Format::Jsonl)?;
        let humans = labeled.filter("human", |r| r.label == Label::Real);
        let fakes = labeled.filter("ai", |r| r.label == Label::Fake);
        let form = build_survey(&humans, &fakes, self.cfg.seed)?;
        let p = self.path(SURVEY_FORM);
        write_text(&p, &(form.to_json()? + "\n"))?;
        self.record("survey build", &[&labeled_path], std::slice::from_ref(&p))?;
        Ok(vec![p])
    }

    pub fn survey_score(&self, responses: &Path) -> Result<Vec<PathBuf>> {
        let form_path = self.need(SURVEY_FORM, "survey build")?;
        let form = SurveyForm::from_json(
            &std::fs::read_to_string(&form_path).map_err(|e| Error::io(&form_path, e))?,
        )?;
        let answers = with_file(responses, read_responses)?;
        let score = score_survey(&form, &answers)?;
        let (sp, tp) = (self.path(SURVEY_SCORE), self.path(SURVEY_TUKEY));
        write_json(&sp, &score)?;
        write_text(&tp, &render_tukey(&score))?;
        let outputs = vec![sp, tp];
        self.record("survey score", &[&form_path, responses], &outputs)?;
        Ok(outputs)
    }

    /// Every stage from ingestion to the sensitivity report.
    pub fn run_all(&self, input: Option<&Path>) -> Result<Vec<PathBuf>> {
        let mut out = self.ingest(input)?;
        out.extend(self.generate()?);
        out.extend(self.train()?);
        out.extend(self.calibrate(None)?);
        out.extend(self.infer()?);
        out.extend(self.metrics()?);
        out.extend(self.analyze()?);
        Ok(out)
    }
}

fn with_file_write(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}
