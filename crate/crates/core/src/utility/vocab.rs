use std::collections::{HashMap, HashSet};

use crate::textfid::tokenize;

use super::UtilityError;

/// Token vocabulary fitted on training texts only.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    min_df: usize,
    max_features: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn doc_freq(&self, word: &str) -> Option<usize> {
        self.index_of(word).map(|i| self.doc_freq[i])
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }
}

/// Keeps tokens appearing in at least `min_df` texts, then the
/// `max_features` highest by (document frequency desc, word asc). Indices
/// follow that ranking.
pub fn fit_vocabulary<S: AsRef<str>>(
    texts: &[S],
    min_df: usize,
    max_features: usize,
) -> Result<Vocabulary, UtilityError> {
    if texts.is_empty() {
        return Err(UtilityError::EmptyInput);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for t in texts {
        let uniq: HashSet<String> = tokenize(t.as_ref()).into_iter().collect();
        for tok in uniq {
            *df.entry(tok).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = df.into_iter().filter(|(_, d)| *d >= min_df).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_features);
    if ranked.is_empty() {
        return Err(UtilityError::EmptyVocabulary);
    }
    let (words, doc_freq): (Vec<String>, Vec<usize>) = ranked.into_iter().unzip();
    let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Ok(Vocabulary {
        words,
        index,
        doc_freq,
        min_df,
        max_features,
    })
}

/// Sparse feature vector with entries sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }
}

/// Term-frequency counts of in-vocabulary tokens.
pub fn vectorize(text: &str, vocab: &Vocabulary) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for tok in tokenize(text) {
        if let Some(i) = vocab.index_of(&tok) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
    entries.sort_unstable_by_key(|e| e.0);
    SparseVector {
        dim: vocab.len(),
        entries,
    }
}
