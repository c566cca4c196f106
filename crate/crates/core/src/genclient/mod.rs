//! Fake-review generation: the prompt template, sampling of generation
//! parameters, pluggable backends and the human-evaluation survey.

mod http;
mod mock;
pub mod survey;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use http::{FixtureMode, HttpBackend, HttpOptions, API_KEY_ENV};
pub use mock::{MockBackend, MOCK_VERSION};

use crate::error::{Error, Result};

pub const PROMPT_INSTRUCTION: &str = "Write a restaurant review based on these notes:";
pub const TEMPERATURE_RANGE: (f64, f64) = (0.3, 0.7);

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("environment variable {0} is not set")]
    MissingCredential(&'static str),
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("HTTP {status}: {message}")]
    Status {
        status: u16,
        message: String,
        retriable: bool,
    },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    InvalidResponse(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("gave up after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: Box<GenError> },
}

impl GenError {
    pub fn is_retriable(&self) -> bool {
        match self {
            GenError::Status { retriable, .. } => *retriable,
            GenError::Transport(_) => true,
            _ => false,
        }
    }

    /// HTTP status behind the failure, if any.
    pub fn status(&self) -> Option<u16> {
        match self {
            GenError::Auth { status } | GenError::Status { status, .. } => Some(*status),
            GenError::RetriesExhausted { last, .. } => last.status(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    ModelA,
    ModelB,
}

impl ModelChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::ModelA => "model_a",
            ModelChoice::ModelB => "model_b",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenRequest {
    pub restaurant_name: String,
    pub seed_review_text: String,
    pub model: ModelChoice,
    pub temperature: f64,
}

impl GenRequest {
    pub fn new(
        restaurant_name: impl Into<String>,
        seed_review_text: impl Into<String>,
        model: ModelChoice,
        temperature: f64,
    ) -> Result<Self> {
        let req = Self {
            restaurant_name: restaurant_name.into(),
            seed_review_text: seed_review_text.into(),
            model,
            temperature,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = TEMPERATURE_RANGE;
        if !(lo..=hi).contains(&self.temperature) {
            return Err(Error::InvalidArgument(format!(
                "temperature {} outside [{lo}, {hi}]",
                self.temperature
            )));
        }
        build_prompt(&self.restaurant_name, &self.seed_review_text).map(drop)
    }

    pub fn prompt(&self) -> String {
        format!(
            "{PROMPT_INSTRUCTION}\nName: {}\n{}",
            self.restaurant_name, self.seed_review_text
        )
    }
}

/// Instruction line, `Name:` line, then the seed review.
pub fn build_prompt(name: &str, elite_text: &str) -> Result<String> {
    if name.trim().is_empty() {
        return Err(Error::InvalidArgument("restaurant name is empty".into()));
    }
    if elite_text.trim().is_empty() {
        return Err(Error::InvalidArgument("seed review text is empty".into()));
    }
    Ok(format!("{PROMPT_INSTRUCTION}\nName: {name}\n{elite_text}"))
}

/// Either model with equal probability; temperature uniform on [0.3, 0.7].
pub fn sample_gen_params<R: Rng + ?Sized>(rng: &mut R) -> (ModelChoice, f64) {
    let model = if rng.gen_bool(0.5) {
        ModelChoice::ModelA
    } else {
        ModelChoice::ModelB
    };
    let (lo, hi) = TEMPERATURE_RANGE;
    (model, rng.gen_range(lo..=hi))
}

pub trait GenBackend: Send + Sync {
    fn name(&self) -> &str;
    fn generate(&self, request: &GenRequest) -> std::result::Result<String, GenError>;
}

/// Run `requests` through `backend` with at most `max_inflight` concurrent
/// calls. Results come back in request order.
pub fn generate_batch(
    backend: &dyn GenBackend,
    requests: &[GenRequest],
    max_inflight: usize,
) -> Vec<std::result::Result<String, GenError>> {
    let workers = max_inflight.clamp(1, requests.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<std::result::Result<String, GenError>>>> =
        requests.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(req) = requests.get(i) else { break };
                let out = backend.generate(req);
                *slots[i].lock().expect("slot lock") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .expect("slot lock")
                .expect("every request processed")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prompt_template_verbatim() {
        let p = build_prompt("Noona Noodles", "Soup was bland.").unwrap();
        assert_eq!(
            p,
            "Write a restaurant review based on these notes:\nName: Noona Noodles\nSoup was bland."
        );
        assert_eq!(p, build_prompt("Noona Noodles", "Soup was bland.").unwrap());
        assert!(build_prompt("", "Soup was bland.").is_err());
        assert!(build_prompt("Noona Noodles", "  ").is_err());
    }

    #[test]
    fn model_choice_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws: Vec<_> = (0..10_000).map(|_| sample_gen_params(&mut rng)).collect();
        let a = draws
            .iter()
            .filter(|(m, _)| *m == ModelChoice::ModelA)
            .count() as f64
            / 10_000.0;
        assert!((a - 0.5).abs() < 0.02, "model_a share {a}");
        assert!(draws.iter().all(|&(_, t)| (0.3..=0.7).contains(&t)));
    }

    #[test]
    fn sampling_is_seeded() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample_gen_params(&mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn temperature_never_leaves_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1_000_000 {
            let (_, t) = sample_gen_params(&mut rng);
            assert!((0.3..=0.7).contains(&t));
        }
    }

    #[test]
    fn request_validation() {
        assert!(GenRequest::new("A", "b", ModelChoice::ModelA, 0.8).is_err());
        assert!(GenRequest::new("A", "", ModelChoice::ModelA, 0.5).is_err());
        assert!(GenRequest::new("A", "b", ModelChoice::ModelB, 0.3).is_ok());
    }

    #[test]
    fn batch_preserves_order_under_concurrency() {
        let backend = MockBackend;
        let reqs: Vec<GenRequest> = (0..37)
            .map(|i| {
                GenRequest::new(
                    format!("Place {i}"),
                    format!("The soup number {i} was fine."),
                    ModelChoice::ModelA,
                    0.5,
                )
                .unwrap()
            })
            .collect();
        let serial: Vec<String> = reqs.iter().map(|r| backend.generate(r).unwrap()).collect();
        for inflight in [1, 4, 64] {
            let out: Vec<String> = generate_batch(&backend, &reqs, inflight)
                .into_iter()
                .map(|r| r.unwrap())
                .collect();
            assert_eq!(out, serial);
        }
        assert!(generate_batch(&backend, &[], 4).is_empty());
    }
}
