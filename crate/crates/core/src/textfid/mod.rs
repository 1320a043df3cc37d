//! Text fidelity: sentiment mix, top keywords, top sentiment words and
//! average length in words, profiled on the real and synthetic text columns
//! and compared.

mod lexicon;

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnKind, Table};

pub use lexicon::{SentimentLexicon, Stopwords};

/// Number of keywords and sentiment words kept per dataset in the report.
pub const TOP_K: usize = 3;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("empty text collection")]
    EmptyInput,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("word {0:?} is listed as both positive and negative")]
    LexiconOverlap(String),
    #[error("line {line}: invalid lexicon entry {entry:?}")]
    InvalidEntry { line: usize, entry: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("column {0:?} not found")]
    UnknownColumn(String),
    #[error("column {0:?} is not a text column")]
    NotText(String),
}

impl PartialEq for TextError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

/// Lowercases and splits on every run of non-alphanumeric characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Neutral,
    Negative,
}

impl Sentiment {
    pub fn label(self) -> &'static str {
        match self {
            Sentiment::Positive => "Positive",
            Sentiment::Neutral => "Neutral",
            Sentiment::Negative => "Negative",
        }
    }
}

/// Counts positive and negative lexicon hits; the larger count wins, equal
/// counts (including none) are neutral.
pub fn sentiment_classify(text: &str, lex: &SentimentLexicon) -> Sentiment {
    let (mut p, mut n) = (0usize, 0usize);
    for tok in tokenize(text) {
        if lex.is_positive(&tok) {
            p += 1;
        } else if lex.is_negative(&tok) {
            n += 1;
        }
    }
    match p.cmp(&n) {
        std::cmp::Ordering::Greater => Sentiment::Positive,
        std::cmp::Ordering::Less => Sentiment::Negative,
        std::cmp::Ordering::Equal => Sentiment::Neutral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentDistribution {
    pub positive: f64,
    pub neutral: f64,
    pub negative: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantSentiment {
    pub label: Sentiment,
    pub proportion: f64,
}

impl SentimentDistribution {
    pub fn get(&self, s: Sentiment) -> f64 {
        match s {
            Sentiment::Positive => self.positive,
            Sentiment::Neutral => self.neutral,
            Sentiment::Negative => self.negative,
        }
    }

    /// Largest share; ties resolve in the order positive, neutral, negative.
    pub fn dominant(&self) -> DominantSentiment {
        let mut best = Sentiment::Positive;
        for s in [Sentiment::Neutral, Sentiment::Negative] {
            if self.get(s) > self.get(best) {
                best = s;
            }
        }
        DominantSentiment {
            label: best,
            proportion: self.get(best),
        }
    }
}

pub fn sentiment_distribution<S: AsRef<str>>(
    texts: &[S],
    lex: &SentimentLexicon,
) -> Result<SentimentDistribution, TextError> {
    if texts.is_empty() {
        return Err(TextError::EmptyInput);
    }
    let mut counts = [0usize; 3];
    for t in texts {
        let idx = match sentiment_classify(t.as_ref(), lex) {
            Sentiment::Positive => 0,
            Sentiment::Neutral => 1,
            Sentiment::Negative => 2,
        };
        counts[idx] += 1;
    }
    let n = texts.len() as f64;
    Ok(SentimentDistribution {
        positive: counts[0] as f64 / n,
        neutral: counts[1] as f64 / n,
        negative: counts[2] as f64 / n,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub word: String,
    pub count: usize,
}

fn top_by_count<S, F>(texts: &[S], k: usize, mut keep: F) -> Result<Vec<WordCount>, TextError>
where
    S: AsRef<str>,
    F: FnMut(&str) -> bool,
{
    if texts.is_empty() {
        return Err(TextError::EmptyInput);
    }
    if k == 0 {
        return Err(TextError::InvalidK);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for t in texts {
        for tok in tokenize(t.as_ref()) {
            if keep(&tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<WordCount> = counts.into_iter().map(|(word, count)| WordCount { word, count }).collect();
    ranked.sort_unstable_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
    ranked.truncate(k);
    Ok(ranked)
}

/// Most frequent tokens that are neither stopwords nor purely numeric,
/// ranked by count descending then word ascending.
pub fn top_keywords<S: AsRef<str>>(texts: &[S], k: usize, stopwords: &Stopwords) -> Result<Vec<WordCount>, TextError> {
    top_by_count(texts, k, |tok| {
        !stopwords.contains(tok) && !tok.chars().all(char::is_numeric)
    })
}

/// Most frequent tokens found in either lexicon list. Stopwords are not applied.
pub fn top_sentiment_words<S: AsRef<str>>(
    texts: &[S],
    k: usize,
    lex: &SentimentLexicon,
) -> Result<Vec<WordCount>, TextError> {
    top_by_count(texts, k, |tok| lex.contains(tok))
}

/// Mean number of tokens per text.
pub fn average_length<S: AsRef<str>>(texts: &[S]) -> Result<f64, TextError> {
    if texts.is_empty() {
        return Err(TextError::EmptyInput);
    }
    let total: usize = texts.iter().map(|t| tokenize(t.as_ref()).len()).sum();
    Ok(total as f64 / texts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextProfile {
    pub n_texts: usize,
    pub sentiment_distribution: SentimentDistribution,
    pub dominant_sentiment: DominantSentiment,
    pub top_keywords: Vec<WordCount>,
    pub top_sentiment_words: Vec<WordCount>,
    pub average_length_words: f64,
}

pub fn text_profile<S: AsRef<str>>(
    texts: &[S],
    lex: &SentimentLexicon,
    stopwords: &Stopwords,
) -> Result<TextProfile, TextError> {
    let dist = sentiment_distribution(texts, lex)?;
    Ok(TextProfile {
        n_texts: texts.len(),
        sentiment_distribution: dist,
        dominant_sentiment: dist.dominant(),
        top_keywords: top_keywords(texts, TOP_K, stopwords)?,
        top_sentiment_words: top_sentiment_words(texts, TOP_K, lex)?,
        average_length_words: average_length(texts)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextComparison {
    pub dominant_sentiment_match: bool,
    pub keyword_overlap: usize,
    pub sentiment_word_overlap: usize,
    /// Synthetic over real average length; absent when the real average is zero.
    pub length_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextReport {
    pub column: String,
    pub real: TextProfile,
    pub synthetic: TextProfile,
    pub comparison: TextComparison,
}

fn overlap(a: &[WordCount], b: &[WordCount]) -> usize {
    let a: HashSet<&str> = a.iter().map(|w| w.word.as_str()).collect();
    b.iter().filter(|w| a.contains(w.word.as_str())).count()
}

pub fn text_fidelity<S: AsRef<str>, T: AsRef<str>>(
    column: &str,
    real_texts: &[S],
    synthetic_texts: &[T],
    lex: &SentimentLexicon,
    stopwords: &Stopwords,
) -> Result<TextReport, TextError> {
    let real = text_profile(real_texts, lex, stopwords)?;
    let synthetic = text_profile(synthetic_texts, lex, stopwords)?;
    let comparison = TextComparison {
        dominant_sentiment_match: real.dominant_sentiment.label == synthetic.dominant_sentiment.label,
        keyword_overlap: overlap(&real.top_keywords, &synthetic.top_keywords),
        sentiment_word_overlap: overlap(&real.top_sentiment_words, &synthetic.top_sentiment_words),
        length_ratio: (real.average_length_words > 0.0)
            .then(|| synthetic.average_length_words / real.average_length_words),
    };
    Ok(TextReport {
        column: column.to_string(),
        real,
        synthetic,
        comparison,
    })
}

/// Non-null values of a text column.
pub fn text_values<'a>(table: &'a Table, column: &str) -> Result<Vec<&'a str>, TextError> {
    let col = table
        .column(column)
        .ok_or_else(|| TextError::UnknownColumn(column.to_string()))?;
    if col.kind() != ColumnKind::Text {
        return Err(TextError::NotText(column.to_string()));
    }
    Ok(col.data.strings())
}

/// [`text_fidelity`] over one text column of each table, nulls excluded.
pub fn text_fidelity_tables(
    real: &Table,
    synthetic: &Table,
    column: &str,
    lex: &SentimentLexicon,
    stopwords: &Stopwords,
) -> Result<TextReport, TextError> {
    text_fidelity(
        column,
        &text_values(real, column)?,
        &text_values(synthetic, column)?,
        lex,
        stopwords,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex() -> SentimentLexicon {
        SentimentLexicon::new(["great", "easy", "love", "good"], ["terrible", "awful", "bad"]).unwrap()
    }

    fn wc(pairs: &[(&str, usize)]) -> Vec<WordCount> {
        pairs
            .iter()
            .map(|(w, c)| WordCount {
                word: w.to_string(),
                count: *c,
            })
            .collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Great app!"), vec!["great", "app"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("e-mail 2x"), vec!["e", "mail", "2x"]);
        assert_eq!(tokenize("  ÉCOLE,,Über "), vec!["école", "über"]);
    }

    #[test]
    fn classify_examples() {
        let lex = lex();
        assert_eq!(sentiment_classify("great easy love", &lex), Sentiment::Positive);
        assert_eq!(sentiment_classify("terrible awful", &lex), Sentiment::Negative);
        assert_eq!(sentiment_classify("the product arrived", &lex), Sentiment::Neutral);
        assert_eq!(sentiment_classify("good but bad", &lex), Sentiment::Neutral);
    }

    #[test]
    fn distribution_examples() {
        let lex = lex();
        let d = sentiment_distribution(&["great", "love it", "easy", "good", "awful"], &lex).unwrap();
        assert_eq!((d.positive, d.neutral, d.negative), (0.8, 0.0, 0.2));
        let d = sentiment_distribution(&["a", "b"], &lex).unwrap();
        assert_eq!((d.positive, d.neutral, d.negative), (0.0, 1.0, 0.0));
        assert_eq!(d.dominant().label, Sentiment::Neutral);
        assert_eq!(sentiment_distribution::<&str>(&[], &lex), Err(TextError::EmptyInput));
    }

    #[test]
    fn dominant_tie_prefers_positive() {
        let d = SentimentDistribution {
            positive: 0.4,
            neutral: 0.2,
            negative: 0.4,
        };
        assert_eq!(d.dominant().label, Sentiment::Positive);
    }

    #[test]
    fn keyword_examples() {
        let none = Stopwords::default();
        assert_eq!(top_keywords(&["great app", "great game"], 1, &none).unwrap(), wc(&[("great", 2)]));
        let stop = Stopwords::new(["the", "a"]);
        assert!(top_keywords(&["the a the"], 3, &stop).unwrap().is_empty());
        assert_eq!(
            top_keywords(&["b a 42 c a b 7"], 3, &none).unwrap(),
            wc(&[("a", 2), ("b", 2), ("c", 1)])
        );
        assert_eq!(top_keywords(&["x"], 0, &none), Err(TextError::InvalidK));
        assert_eq!(top_keywords::<&str>(&[], 3, &none), Err(TextError::EmptyInput));
    }

    #[test]
    fn sentiment_word_examples() {
        let lex = lex();
        assert_eq!(
            top_sentiment_words(&["great great bad"], 2, &lex).unwrap(),
            wc(&[("great", 2), ("bad", 1)])
        );
        assert!(top_sentiment_words(&["nothing here"], 3, &lex).unwrap().is_empty());
    }

    #[test]
    fn average_length_examples() {
        assert_eq!(average_length(&["a b c", "d e"]).unwrap(), 2.5);
        assert_eq!(average_length(&[""]).unwrap(), 0.0);
        assert_eq!(average_length::<&str>(&[]), Err(TextError::EmptyInput));
    }

    #[test]
    fn fidelity_identity_and_disjoint() {
        let lex = lex();
        let stop = Stopwords::default();
        let texts = ["great app easy game", "love this app", "awful game bad app", "app works"];
        let rep = text_fidelity("text", &texts, &texts, &lex, &stop).unwrap();
        assert_eq!(rep.comparison.keyword_overlap, 3);
        assert_eq!(rep.comparison.sentiment_word_overlap, 3);
        assert_eq!(rep.comparison.length_ratio, Some(1.0));
        assert!(rep.comparison.dominant_sentiment_match);

        let other = ["zebra quartz", "violin orbit"];
        let rep = text_fidelity("text", &texts, &other, &lex, &stop).unwrap();
        assert_eq!(rep.comparison.keyword_overlap, 0);
        assert_eq!(rep.comparison.sentiment_word_overlap, 0);
    }

    #[test]
    fn zero_length_real_has_no_ratio() {
        let rep = text_fidelity("t", &["", "!!"], &["a"], &lex(), &Stopwords::default()).unwrap();
        assert_eq!(rep.comparison.length_ratio, None);
    }
}
