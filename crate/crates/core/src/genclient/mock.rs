use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hash::fnv1a;

use super::{GenBackend, GenError, GenRequest, ModelChoice};

/// Bumped whenever the mock's output for a given request changes.
pub const MOCK_VERSION: u32 = 1;

const OPENERS: [&str; 4] = [
    "Overall, I had a great experience at {name}.",
    "If you are looking for a great meal, {name} is the place to go!",
    "I recently visited {name} and it was a truly enjoyable experience.",
    "{name} is a hidden gem that deserves more attention.",
];

const CLOSERS: [&str; 4] = [
    "Overall, I would definitely recommend it.",
    "I highly recommend this spot to anyone in the area.",
    "I will definitely be coming back soon.",
    "Overall, it was a wonderful experience.",
];

/// One-for-one word swaps toward a polished, upbeat register.
const SWAPS: [(&str, &str); 18] = [
    ("awesome", "fantastic"),
    ("bad", "disappointing"),
    ("cheap", "affordable"),
    ("fine", "enjoyable"),
    ("friendly", "attentive"),
    ("good", "great"),
    ("great", "excellent"),
    ("huge", "generous"),
    ("meh", "underwhelming"),
    ("nice", "wonderful"),
    ("ok", "decent"),
    ("okay", "decent"),
    ("place", "spot"),
    ("pretty", "quite"),
    ("really", "truly"),
    ("tasty", "flavorful"),
    ("very", "incredibly"),
    ("yummy", "delicious"),
];

/// Offline stand-in for a text-generation service. The output is a pure
/// function of the request and [`MOCK_VERSION`]: the seed review with
/// upbeat word swaps, framed by a stock opener and closer when the length
/// budget (half the seed's word count) allows.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

fn request_key(req: &GenRequest) -> u64 {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(&MOCK_VERSION.to_le_bytes());
    bytes.extend_from_slice(req.restaurant_name.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(req.seed_review_text.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(req.model.as_str().as_bytes());
    bytes.extend_from_slice(&req.temperature.to_bits().to_le_bytes());
    fnv1a(&bytes)
}

fn swap_word(word: &str) -> Option<String> {
    let start = word.find(|c: char| c.is_alphanumeric())?;
    let end = word.rfind(|c: char| c.is_alphanumeric()).map(|i| i + 1)?;
    let core = &word[start..end];
    let lower = core.to_lowercase();
    let (_, to) = SWAPS.iter().find(|(from, _)| *from == lower)?;
    let mut replacement = to.to_string();
    if core.chars().next().is_some_and(char::is_uppercase) {
        replacement = replacement[..1].to_uppercase() + &replacement[1..];
    }
    Some(format!("{}{replacement}{}", &word[..start], &word[end..]))
}

impl MockBackend {
    pub fn rewrite(&self, req: &GenRequest) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(request_key(req));
        let words: Vec<&str> = req.seed_review_text.split_whitespace().collect();
        // Cooler sampling keeps more of the stock phrasing.
        let swap_p = 1.0 - req.temperature / 2.0;
        let body: Vec<String> = words
            .iter()
            .map(|w| match swap_word(w) {
                Some(s) if rng.gen_bool(swap_p) => s,
                _ => (*w).to_string(),
            })
            .collect();

        let mut budget = words.len() / 2;
        let mut take = |template: &str| -> Option<String> {
            let text = template.replace("{name}", req.restaurant_name.trim());
            let n = text.split_whitespace().count();
            (n <= budget).then(|| {
                budget -= n;
                text
            })
        };
        let opener = take(OPENERS.choose(&mut rng).expect("non-empty"));
        let closer = match req.model {
            ModelChoice::ModelB => take(CLOSERS.choose(&mut rng).expect("non-empty")),
            ModelChoice::ModelA => None,
        };
        let mut parts = Vec::with_capacity(3);
        parts.extend(opener);
        parts.push(body.join(" "));
        parts.extend(closer);
        parts.join(" ")
    }
}

impl GenBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn generate(&self, request: &GenRequest) -> Result<String, GenError> {
        request
            .validate()
            .map_err(|e| GenError::InvalidRequest(e.to_string()))?;
        Ok(self.rewrite(request))
    }
}
