use std::path::PathBuf;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::{HeaderMap, RETRY_AFTER};
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use crate::hash::fnv1a;

use super::{GenBackend, GenError, GenRequest};

pub const API_KEY_ENV: &str = "GEN_API_KEY";

/// Recorded-fixture handling. `Replay` never touches the network and needs
/// no credential.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum FixtureMode {
    #[default]
    Off,
    Record(PathBuf),
    Replay(PathBuf),
}

#[derive(Debug, Clone)]
pub struct HttpOptions {
    pub endpoint: String,
    pub max_retries: u32,
    pub base_backoff: Duration,
    pub max_backoff: Duration,
    pub timeout: Duration,
    pub fixtures: FixtureMode,
}

impl HttpOptions {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            max_retries: 3,
            base_backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(30),
            timeout: Duration::from_secs(60),
            fixtures: FixtureMode::Off,
        }
    }
}

#[derive(Serialize)]
struct Payload<'a> {
    model: &'a str,
    prompt: String,
    temperature: f64,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

#[derive(Deserialize)]
struct Completion {
    text: Option<String>,
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Serialize, Deserialize)]
struct Fixture {
    request: GenRequest,
    text: String,
}

/// Thin JSON client: POST `{model, prompt, temperature}` to one endpoint and
/// read back `{text}` (or `{choices: [{text}]}`).
#[derive(Debug)]
pub struct HttpBackend {
    options: HttpOptions,
    api_key: Option<String>,
    client: Client,
}

impl HttpBackend {
    /// Reads the credential from [`API_KEY_ENV`] unless replaying fixtures.
    pub fn from_env(options: HttpOptions) -> Result<Self, GenError> {
        let key = match options.fixtures {
            FixtureMode::Replay(_) => None,
            _ => Some(
                std::env::var(API_KEY_ENV)
                    .ok()
                    .filter(|k| !k.trim().is_empty())
                    .ok_or(GenError::MissingCredential(API_KEY_ENV))?,
            ),
        };
        Self::build(options, key)
    }

    pub fn with_api_key(options: HttpOptions, key: impl Into<String>) -> Result<Self, GenError> {
        Self::build(options, Some(key.into()))
    }

    fn build(options: HttpOptions, api_key: Option<String>) -> Result<Self, GenError> {
        let client = Client::builder()
            .timeout(options.timeout)
            .build()
            .map_err(|e| GenError::Transport(e.to_string()))?;
        Ok(Self {
            options,
            api_key,
            client,
        })
    }

    fn fixture_path(dir: &std::path::Path, req: &GenRequest) -> PathBuf {
        let key = format!(
            "{}\0{}\0{}",
            req.model.as_str(),
            req.temperature.to_bits(),
            req.prompt()
        );
        dir.join(format!("{:016x}.json", fnv1a(key.as_bytes())))
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        self.options
            .base_backoff
            .saturating_mul(factor)
            .min(self.options.max_backoff)
    }

    fn retry_after(headers: &HeaderMap) -> Option<Duration> {
        let secs: u64 = headers
            .get(RETRY_AFTER)?
            .to_str()
            .ok()?
            .trim()
            .parse()
            .ok()?;
        Some(Duration::from_secs(secs))
    }

    fn call_once(&self, req: &GenRequest) -> Result<String, (GenError, Option<Duration>)> {
        let key = self
            .api_key
            .as_deref()
            .ok_or((GenError::MissingCredential(API_KEY_ENV), None))?;
        let payload = Payload {
            model: req.model.as_str(),
            prompt: req.prompt(),
            temperature: req.temperature,
        };
        let resp = self
            .client
            .post(&self.options.endpoint)
            .bearer_auth(key)
            .json(&payload)
            .send()
            .map_err(|e| (GenError::Transport(e.to_string()), None))?;
        let status = resp.status();
        if status.is_success() {
            let body: Completion = resp
                .json()
                .map_err(|e| (GenError::InvalidResponse(e.to_string()), None))?;
            let text = body
                .text
                .or_else(|| body.choices.into_iter().next().map(|c| c.text))
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .ok_or((GenError::InvalidResponse("no generated text".into()), None))?;
            return Ok(text);
        }
        let code = status.as_u16();
        if code == 401 || code == 403 {
            return Err((GenError::Auth { status: code }, None));
        }
        let wait = Self::retry_after(resp.headers());
        let message = resp.text().unwrap_or_default();
        let retriable = code == 429 || status.is_server_error();
        Err((
            GenError::Status {
                status: code,
                message: message.chars().take(200).collect(),
                retriable,
            },
            wait,
        ))
    }

    fn call_with_retries(&self, req: &GenRequest) -> Result<String, GenError> {
        let mut attempt = 0;
        loop {
            match self.call_once(req) {
                Ok(text) => return Ok(text),
                Err((e, wait)) if e.is_retriable() => {
                    if attempt >= self.options.max_retries {
                        return Err(GenError::RetriesExhausted {
                            attempts: attempt + 1,
                            last: Box::new(e),
                        });
                    }
                    let delay = wait
                        .unwrap_or_else(|| self.backoff(attempt))
                        .min(self.options.max_backoff);
                    warn!(attempt, ?delay, error = %e, "generation request failed; retrying");
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err((e, _)) => return Err(e),
            }
        }
    }
}

impl GenBackend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&self, request: &GenRequest) -> Result<String, GenError> {
        request
            .validate()
            .map_err(|e| GenError::InvalidRequest(e.to_string()))?;
        match &self.options.fixtures {
            FixtureMode::Replay(dir) => {
                let path = Self::fixture_path(dir, request);
                let raw = std::fs::read_to_string(&path)
                    .map_err(|e| GenError::Fixture(format!("{}: {e}", path.display())))?;
                let fx: Fixture = serde_json::from_str(&raw)
                    .map_err(|e| GenError::Fixture(format!("{}: {e}", path.display())))?;
                debug!(path = %path.display(), "replayed fixture");
                Ok(fx.text)
            }
            FixtureMode::Record(dir) => {
                let text = self.call_with_retries(request)?;
                let path = Self::fixture_path(dir, request);
                let fx = Fixture {
                    request: request.clone(),
                    text: text.clone(),
                };
                let json = serde_json::to_string_pretty(&fx)
                    .map_err(|e| GenError::Fixture(e.to_string()))?;
                std::fs::create_dir_all(dir)
                    .and_then(|_| std::fs::write(&path, json))
                    .map_err(|e| GenError::Fixture(format!("{}: {e}", path.display())))?;
                Ok(text)
            }
            FixtureMode::Off => self.call_with_retries(request),
        }
    }
}
