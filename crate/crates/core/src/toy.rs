//! Generator for small product-review tables used by the bundled fixtures,
//! examples and tests.
//!
//! Ratings drive planted sentiment words in the review text, so a text model
//! can learn them. The remaining columns follow fixed, seed-driven
//! distributions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{partition_indices, ColumnKind, ColumnSpec, Schema, Table};
use crate::seed::derive_seed;
use crate::textfid::tokenize;

/// Marker words per rating, lowest rating first.
pub const RATING_WORDS: [&[&str]; 5] = [
    &["terrible", "awful", "broken", "useless", "worst", "waste"],
    &["poor", "disappointing", "cheap", "flimsy"],
    &["okay", "fine", "decent", "average"],
    &["great", "good", "nice", "happy"],
    &["excellent", "perfect", "love", "amazing"],
];

pub const FILLER_WORDS: &[&str] = &[
    "the", "this", "product", "item", "battery", "case", "screen", "cable", "charger", "phone", "bought", "used",
    "works", "arrived", "box", "price", "quality", "size", "color", "day", "week", "month", "it", "was", "is", "and",
    "for", "my", "with", "after", "kids", "kitchen", "light", "sound", "fits",
];

const RATING_WEIGHTS: [f64; 5] = [0.10, 0.07, 0.10, 0.20, 0.53];
const TIMESTAMP_START: i64 = 1_500_000_000_000;
const TIMESTAMP_SPAN: i64 = 150_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdScheme {
    /// Each ID column draws from `n` shared values.
    Pooled(usize),
    /// Every row gets its own IDs, all starting with the prefix.
    Unique(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusOptions {
    pub ids: IdScheme,
    /// Every `helpful_vote` is 0.
    pub zero_helpful_votes: bool,
    /// `verified_purchase` flipped relative to the usual distribution.
    pub invert_verified: bool,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            ids: IdScheme::Pooled(20),
            zero_helpful_votes: false,
            invert_verified: false,
        }
    }
}

pub fn review_schema() -> Schema {
    Schema::new(vec![
        ColumnSpec::new("rating", ColumnKind::Discrete).required(),
        ColumnSpec::new("title", ColumnKind::Text),
        ColumnSpec::new("text", ColumnKind::Text),
        ColumnSpec::new("asin", ColumnKind::Identifier).required(),
        ColumnSpec::new("parent_asin", ColumnKind::Identifier).required(),
        ColumnSpec::new("user_id", ColumnKind::Identifier).required(),
        ColumnSpec::new("timestamp", ColumnKind::Continuous).required(),
        ColumnSpec::new("helpful_vote", ColumnKind::Continuous).required(),
        ColumnSpec::new("verified_purchase", ColumnKind::Discrete).required(),
    ])
    .expect("static schema is valid")
}

fn draw_rating(rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, w) in RATING_WEIGHTS.iter().enumerate() {
        acc += w;
        if u < acc {
            return i + 1;
        }
    }
    5
}

/// A word for rating `r`: usually its own tier, sometimes a neighbour, rarely any tier.
fn marker(rating: usize, rng: &mut impl Rng) -> &'static str {
    let u: f64 = rng.gen();
    let tier = if u < 0.7 {
        rating - 1
    } else if u < 0.9 {
        let shift: i64 = if rng.gen() { 1 } else { -1 };
        (rating as i64 - 1 + shift).clamp(0, 4) as usize
    } else {
        rng.gen_range(0..5)
    };
    RATING_WORDS[tier].choose(rng).expect("non-empty tier")
}

fn sentence(words: Vec<&str>) -> String {
    let mut s = words.join(" ");
    if let Some(first) = s.get(0..1) {
        let up = first.to_uppercase();
        s.replace_range(0..1, &up);
    }
    s.push('.');
    s
}

fn review_text(rating: usize, rng: &mut impl Rng) -> String {
    let len = rng.gen_range(10..=25);
    let mut words: Vec<&str> = (0..len).map(|_| *FILLER_WORDS.choose(rng).expect("non-empty")).collect();
    for _ in 0..3 {
        let at = rng.gen_range(0..=words.len());
        words.insert(at, marker(rating, rng));
    }
    sentence(words)
}

fn review_title(rating: usize, rng: &mut impl Rng) -> String {
    let noun = *FILLER_WORDS[2..10].choose(rng).expect("non-empty");
    sentence(vec![marker(rating, rng), noun])
}

fn id(column: &str, scheme: &IdScheme, row: usize, rng: &mut impl Rng) -> String {
    match scheme {
        IdScheme::Pooled(n) => format!("{column}_{:03}", rng.gen_range(0..(*n).max(1))),
        IdScheme::Unique(prefix) => format!("{prefix}{column}_{row:06}"),
    }
}

fn helpful_votes(rng: &mut impl Rng) -> u32 {
    if rng.gen_bool(0.6) {
        return 0;
    }
    let mut v = 1;
    while v < 40 && rng.gen_bool(0.7) {
        v += 1;
    }
    v
}

pub fn review_rows(n: usize, seed: u64, options: &CorpusOptions) -> Vec<Vec<Option<String>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|row| {
            let rating = draw_rating(&mut rng);
            let title = review_title(rating, &mut rng);
            let text = review_text(rating, &mut rng);
            let asin = id("asin", &options.ids, row, &mut rng);
            let parent = id("parent", &options.ids, row, &mut rng);
            let user = id("user", &options.ids, row, &mut rng);
            let ts = TIMESTAMP_START + rng.gen_range(0..TIMESTAMP_SPAN);
            let votes = helpful_votes(&mut rng);
            let verified = rng.gen_bool(0.85) != options.invert_verified;
            vec![
                Some(rating.to_string()),
                Some(title),
                Some(text),
                Some(asin),
                Some(parent),
                Some(user),
                Some(ts.to_string()),
                Some(if options.zero_helpful_votes { 0 } else { votes }.to_string()),
                Some(verified.to_string()),
            ]
        })
        .collect()
}

pub fn review_corpus(n: usize, seed: u64, options: &CorpusOptions) -> Table {
    Table::from_cells(review_schema(), &review_rows(n, seed, options)).expect("generated rows fit the schema")
}

fn replace_column(table: &Table, column: &str, f: impl Fn(usize, String) -> String) -> Table {
    let idx = table.schema().index_of(column).expect("column exists");
    let rows: Vec<Vec<Option<String>>> = (0..table.row_count())
        .map(|r| {
            let mut cells = table.row_cells(r);
            cells[idx] = cells[idx].take().map(|v| f(r, v));
            cells
        })
        .collect();
    Table::from_cells(table.schema().clone(), &rows).expect("same schema")
}

/// Replaces each token of `column` with a random vocabulary word with
/// probability `rate`.
pub fn corrupt_text(table: &Table, column: &str, rate: f64, seed: u64) -> Table {
    let vocab: Vec<&str> = RATING_WORDS.iter().flat_map(|t| t.iter().copied()).chain(FILLER_WORDS.iter().copied()).collect();
    replace_column(table, column, |r, text| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64));
        let words: Vec<String> = tokenize(&text)
            .into_iter()
            .map(|w| {
                if rng.gen_bool(rate) {
                    vocab.choose(&mut rng).expect("non-empty").to_string()
                } else {
                    w
                }
            })
            .collect();
        sentence(words.iter().map(String::as_str).collect())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiaScenario {
    /// Synthetic rows come from the same distribution with IDs never seen
    /// among the real rows.
    FreshIds,
    /// Synthetic rows reuse, verbatim, the IDs of `sources` member rows:
    /// the generator has memorised a handful of real records.
    CopiedIds { sources: usize },
}

pub struct MiaInstance {
    pub members: Table,
    pub non_members: Table,
    pub synthetic: Table,
}

const ID_COLUMNS: [&str; 3] = ["asin", "parent_asin", "user_id"];

/// Real rows with unique IDs split into members and non-members, plus a
/// synthetic table shaped by `scenario`.
pub fn mia_instance(n_members: usize, n_non_members: usize, n_synthetic: usize, scenario: MiaScenario, seed: u64) -> MiaInstance {
    let unique = |prefix: &str| CorpusOptions {
        ids: IdScheme::Unique(prefix.into()),
        ..Default::default()
    };
    let n_real = n_members + n_non_members;
    let real = review_corpus(n_real, derive_seed(seed, 0), &unique("r"));
    let (m_idx, nm_idx) = partition_indices(n_real, n_members as f64 / n_real as f64, derive_seed(seed, 1));
    let members = real.take_rows(&m_idx);
    let non_members = real.take_rows(&nm_idx);
    let mut synthetic = review_corpus(n_synthetic, derive_seed(seed, 2), &unique("s"));
    if let MiaScenario::CopiedIds { sources } = scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
        let picked: Vec<usize> = rand::seq::index::sample(&mut rng, n_members - 1, sources.clamp(1, n_members - 1))
            .into_iter()
            .map(|i| i + 1)
            .collect();
        let source_rows: Vec<usize> = (0..n_synthetic).map(|_| *picked.choose(&mut rng).expect("non-empty")).collect();
        for col in ID_COLUMNS {
            let src = members.column(col).expect("id column");
            synthetic = replace_column(&synthetic, col, |r, _| {
                src.data.cell_text(source_rows[r]).expect("ids are never null")
            });
        }
    }
    MiaInstance {
        members,
        non_members,
        synthetic,
    }
}
