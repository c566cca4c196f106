//! Seeded synthetic review corpus with realistic covariates, used for the
//! bundled example data and for end-to-end tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, Review, ReviewSet};
use crate::genclient::{sample_gen_params, GenRequest, MockBackend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub independents: usize,
    pub elite: usize,
    pub non_elite: usize,
    /// Share of non-elite reviews written in the generated style.
    pub ai_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            independents: 26,
            elite: 240,
            non_elite: 360,
            ai_share: 0.2,
        }
    }
}

const CHAINS: [&str; 2] = ["Burger Barn", "Taco Town"];
const CHAIN_SITES: usize = 7;

const NAME_FIRST: [&str; 13] = [
    "Golden", "Noona", "Little", "Blue", "Spoonfed", "Red", "Jin", "Olive", "Copper", "Green",
    "Harbor", "Maple", "Saffron",
];
const NAME_SECOND: [&str; 10] = [
    "Lotus", "Noodles", "Kitchen", "Bistro", "Table", "Dragon", "Fong", "Grill", "Garden", "House",
];

const DISHES: [&str; 30] = [
    "ramen",
    "dumplings",
    "burger",
    "fries",
    "tacos",
    "burrito",
    "pad thai",
    "fried rice",
    "pho",
    "brisket",
    "pancakes",
    "omelette",
    "shrimp and grits",
    "corn bread",
    "pizza",
    "lasagna",
    "curry",
    "naan",
    "sushi",
    "poke bowl",
    "wings",
    "mac and cheese",
    "salad",
    "soup",
    "steak",
    "salmon",
    "chicken sandwich",
    "bao",
    "noodle soup",
    "cheesecake",
];
const POSITIVE: [&str; 10] = [
    "good",
    "tasty",
    "fresh",
    "solid",
    "nice",
    "yummy",
    "great",
    "awesome",
    "flavorful",
    "hot",
];
const NEGATIVE: [&str; 8] = [
    "bland",
    "cold",
    "soggy",
    "salty",
    "dry",
    "greasy",
    "meh",
    "overcooked",
];
const NEUTRAL: [&str; 6] = ["fine", "okay", "decent", "average", "ok", "standard"];
const COMPANY: [&str; 7] = [
    "my wife",
    "a few coworkers",
    "my parents",
    "some friends",
    "my brother",
    "the kids",
    "a date",
];
const MEALS: [&str; 5] = ["lunch", "dinner", "brunch", "a late snack", "takeout"];

fn adjective(rng: &mut ChaCha8Rng, rating: u8) -> &'static str {
    let roll: f64 = rng.gen();
    let positive_p = [0.1, 0.2, 0.45, 0.7, 0.85][rating as usize - 1];
    if roll < positive_p {
        POSITIVE.choose(rng).copied().unwrap_or("good")
    } else if roll < positive_p + (1.0 - positive_p) * 0.5 {
        NEUTRAL.choose(rng).copied().unwrap_or("fine")
    } else {
        NEGATIVE.choose(rng).copied().unwrap_or("bland")
    }
}

fn sentence(rng: &mut ChaCha8Rng, name: &str, rating: u8) -> String {
    let dish = DISHES.choose(rng).copied().unwrap_or("soup");
    let dish2 = DISHES.choose(rng).copied().unwrap_or("fries");
    let adj = adjective(rng, rating);
    let adj2 = adjective(rng, rating);
    let who = COMPANY.choose(rng).copied().unwrap_or("a friend");
    let meal = MEALS.choose(rng).copied().unwrap_or("dinner");
    let minutes = rng.gen_range(5..60);
    let dollars = rng.gen_range(8..40);
    match rng.gen_range(0..16) {
        0 => format!("Came to {name} for {meal} with {who}."),
        1 => format!("The {dish} was {adj} and the {dish2} was {adj2}."),
        2 => format!("We waited about {minutes} minutes for a table on a weeknight."),
        3 => format!(
            "I ordered the {dish}, which was {adj}, but honestly the {dish2} stole the show."
        ),
        4 => format!("Service was {adj2} and our server checked on us twice."),
        5 => format!("Paid around {dollars} bucks a person which felt about right."),
        6 => "Parking is a pain around here so we took the bus.".to_string(),
        7 => format!("The {dish} could use more salt, just my two cents."),
        8 => format!("{who} got the {dish2} and said it was {adj}.").replacen(
            &who[..1],
            &who[..1].to_uppercase(),
            1,
        ),
        9 => format!("Music was kind of loud but the room was {adj2} otherwise."),
        10 => format!("Not sure I would drive across town for the {dish} but it was {adj}."),
        11 => format!("They were out of {dish2} by the time we ordered, which was annoying."),
        12 => format!("Portions of {dish} are big so bring a friend or plan on leftovers."),
        13 => format!(
            "I have been here maybe {} times now and the {dish} is always {adj}.",
            rng.gen_range(2..9)
        ),
        14 => "The patio is nice when the weather cooperates.".to_string(),
        _ => format!("Tip: ask for the {dish} extra spicy if you can handle heat."),
    }
}

/// Human-register review text of roughly `target_words` words.
pub fn human_text(rng: &mut ChaCha8Rng, name: &str, rating: u8, target_words: usize) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut words = 0;
    while words < target_words {
        let s = sentence(rng, name, rating);
        words += s.split_whitespace().count();
        parts.push(s);
    }
    parts.join(" ")
}

struct Restaurant {
    id: String,
    name: String,
    avg_rating: f64,
    price_level: u8,
    num_rest_reviews: u64,
    num_visits: u64,
    norm_visits: f64,
}

fn restaurants(rng: &mut ChaCha8Rng, independents: usize) -> Vec<Restaurant> {
    let mut names: Vec<String> = Vec::new();
    for chain in CHAINS {
        names.extend(std::iter::repeat(chain.to_string()).take(CHAIN_SITES));
    }
    let mut combos: Vec<String> = NAME_FIRST
        .iter()
        .flat_map(|a| NAME_SECOND.iter().map(move |b| format!("{a} {b}")))
        .collect();
    combos.shuffle(rng);
    names.extend(combos.into_iter().take(independents));
    names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let num_visits = rng.gen_range(100..12_000);
            Restaurant {
                id: format!("biz{:03}", i + 1),
                name,
                avg_rating: (rng.gen_range(30..=48) as f64) / 10.0,
                price_level: rng.gen_range(1..=4),
                num_rest_reviews: rng.gen_range(40..3_000),
                num_visits,
                norm_visits: (num_visits as f64 / 16.0).round() / 1000.0,
            }
        })
        .collect()
}

fn heavy_tail(rng: &mut ChaCha8Rng, scale: f64) -> u64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    (scale * (-(1.0 - u).ln())).floor() as u64
}

/// Elite reviews (labelled real) from 2018 on, and unlabelled non-elite
/// reviews from 2019 on, a share of which are written in the generated
/// style with higher ratings and smaller friend lists.
pub fn synth_corpus(cfg: &SynthConfig) -> ReviewSet {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let places = restaurants(&mut rng, cfg.independents);
    let mock = MockBackend;
    let mut reviews = Vec::with_capacity(cfg.elite + cfg.non_elite);
    for i in 0..cfg.elite + cfg.non_elite {
        let elite = i < cfg.elite;
        let place = &places[rng.gen_range(0..places.len())];
        let ai_style = !elite && rng.gen_bool(cfg.ai_share);
        let mut rating: u8 = *[1u8, 2, 3, 4, 4, 5, 5, 5]
            .choose(&mut rng)
            .expect("non-empty");
        if ai_style && rng.gen_bool(0.6) {
            rating = (rating + 1).min(5);
        }
        let target = rng.gen_range(40..175);
        let mut text = human_text(&mut rng, &place.name, rating, target);
        if ai_style {
            let (model, temperature) = sample_gen_params(&mut rng);
            let req = GenRequest::new(place.name.clone(), text, model, temperature)
                .expect("valid synthetic request");
            text = mock.rewrite(&req);
        }
        let year = if elite {
            rng.gen_range(2018..=2022)
        } else {
            rng.gen_range(2019..=2022)
        };
        let friends_scale = if elite {
            180.0
        } else if ai_style {
            40.0
        } else {
            70.0
        };
        reviews.push(Review {
            id: format!("r{:04}", i + 1),
            text,
            date: format!(
                "{year}-{:02}-{:02}",
                rng.gen_range(1..=12),
                rng.gen_range(1..=28)
            ),
            rating,
            elite,
            num_friends: heavy_tail(&mut rng, friends_scale),
            num_user_reviews: heavy_tail(&mut rng, if elite { 120.0 } else { 40.0 }) + 1,
            num_user_photos: heavy_tail(&mut rng, if elite { 150.0 } else { 50.0 }),
            restaurant_id: place.id.clone(),
            restaurant_name: place.name.clone(),
            avg_rating: place.avg_rating,
            price_level: place.price_level,
            num_rest_reviews: place.num_rest_reviews,
            num_visits: place.num_visits,
            norm_visits: place.norm_visits,
            label: if elite { Label::Real } else { Label::Unknown },
        });
    }
    ReviewSet::new(reviews, format!("synthetic seed={}", cfg.seed))
        .expect("synthetic records are valid")
}
