use std::collections::HashSet;
use std::path::Path;

use super::{tokenize, TextError};

const BUNDLED_LEXICON: &str = include_str!("../../data/opinion_lexicon.txt");
const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Disjoint sets of lowercase positive and negative opinion words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

fn normalized(word: &str, line: usize) -> Result<String, TextError> {
    let tokens = tokenize(word);
    match tokens.as_slice() {
        [t] => Ok(t.clone()),
        _ => Err(TextError::InvalidEntry {
            line,
            entry: word.to_string(),
        }),
    }
}

impl SentimentLexicon {
    pub fn new<I, J, S, T>(positive: I, negative: J) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let positive = positive
            .into_iter()
            .map(|w| normalized(w.as_ref(), 0))
            .collect::<Result<HashSet<_>, _>>()?;
        let negative = negative
            .into_iter()
            .map(|w| normalized(w.as_ref(), 0))
            .collect::<Result<HashSet<_>, _>>()?;
        if let Some(w) = positive.intersection(&negative).min() {
            return Err(TextError::LexiconOverlap(w.clone()));
        }
        Ok(SentimentLexicon { positive, negative })
    }

    /// Parses the lexicon file format: `#positive` and `#negative` section
    /// headers followed by one word per line. Blank lines and lines starting
    /// with `;` are ignored.
    pub fn parse(text: &str) -> Result<Self, TextError> {
        #[derive(Clone, Copy)]
        enum Section {
            None,
            Positive,
            Negative,
        }
        let mut section = Section::None;
        let (mut pos, mut neg) = (HashSet::new(), HashSet::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with(';') {
                continue;
            }
            match line.to_ascii_lowercase().as_str() {
                "#positive" => section = Section::Positive,
                "#negative" => section = Section::Negative,
                _ => {
                    let word = normalized(line, i + 1)?;
                    match section {
                        Section::Positive => pos.insert(word),
                        Section::Negative => neg.insert(word),
                        Section::None => {
                            return Err(TextError::InvalidEntry {
                                line: i + 1,
                                entry: format!("{line} (before any section header)"),
                            })
                        }
                    };
                }
            }
        }
        Self::new(pos, neg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Self::parse(&read(path.as_ref())?)
    }

    /// The opinion word list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn is_positive(&self, token: &str) -> bool {
        self.positive.contains(token)
    }

    pub fn is_negative(&self, token: &str) -> bool {
        self.negative.contains(token)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.is_positive(token) || self.is_negative(token)
    }

    pub fn positive_len(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_len(&self) -> usize {
        self.negative.len()
    }
}

impl Default for SentimentLexicon {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Words removed before keyword counting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Stopwords(words.into_iter().flat_map(|w| tokenize(w.as_ref())).collect())
    }

    /// One word per line; blank lines and `;` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with(';')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Ok(Self::parse(&read(path.as_ref())?))
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn read(path: &Path) -> Result<String, TextError> {
    std::fs::read_to_string(path).map_err(|source| TextError::Io {
        path: path.to_path_buf(),
        source,
    })
}
