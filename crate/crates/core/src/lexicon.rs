//! Sentiment lexicon baseline.
//!
//! Sense-level positive/negative scores are averaged per word, carried into
//! the target language through a translation dictionary, averaged over the
//! in-lexicon words of a sentence and thresholded.

use std::collections::BTreeMap;
use std::path::Path;

use crate::align::Dictionary;
use crate::corpus::{Sentence, SentimentLabel};
use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.1;

/// `(word, sense) -> (pos, neg)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SenseLexicon {
    entries: BTreeMap<(String, String), (f64, f64)>,
}

/// `word -> (pos, neg)`; absent words score `(0, 0)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WordLexicon {
    entries: BTreeMap<String, (f64, f64)>,
}

fn check_score(v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::invalid(format!("lexicon score {v} outside [0, 1]")))
    }
}

impl SenseLexicon {
    pub fn insert(&mut self, word: &str, sense: &str, pos: f64, neg: f64) -> Result<()> {
        self.entries.insert((word.to_string(), sense.to_string()), (check_score(pos)?, check_score(neg)?));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((&str, &str), (f64, f64))> {
        self.entries.iter().map(|((w, s), v)| ((w.as_str(), s.as_str()), *v))
    }

    /// `word<TAB>sense<TAB>pos<TAB>neg` rows.
    pub fn to_tsv(&self) -> String {
        self.iter().map(|((w, s), (p, n))| format!("{w}\t{s}\t{p:?}\t{n:?}\n")).collect()
    }
}

impl WordLexicon {
    pub fn insert(&mut self, word: &str, pos: f64, neg: f64) -> Result<()> {
        self.entries.insert(word.to_string(), (check_score(pos)?, check_score(neg)?));
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<(f64, f64)> {
        self.entries.get(word).copied()
    }

    pub fn score(&self, word: &str) -> (f64, f64) {
        self.get(word).unwrap_or((0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, (f64, f64))> {
        self.entries.iter().map(|(w, &s)| (w.as_str(), s))
    }

    /// Word-level TSV `word<TAB>pos<TAB>neg`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, (p, n)) in self.iter() {
            out.push_str(&format!("{w}\t{p:?}\t{n:?}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }
}

/// Mean of the sense vectors of each word.
pub fn sense_average(sl: &SenseLexicon) -> WordLexicon {
    let mut acc: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for ((w, _), (p, n)) in &sl.entries {
        let e = acc.entry(w).or_insert((0.0, 0.0, 0));
        e.0 += p;
        e.1 += n;
        e.2 += 1;
    }
    WordLexicon {
        entries: acc.into_iter().map(|(w, (p, n, c))| (w.to_string(), (p / c as f64, n / c as f64))).collect(),
    }
}

/// Moves scores across `dict`; target words reached from several source
/// words get the mean of their scores.
pub fn translate_lexicon(wl: &WordLexicon, dict: &Dictionary) -> WordLexicon {
    let mut acc: BTreeMap<&str, (f64, f64, usize)> = BTreeMap::new();
    for (w, (p, n)) in wl.iter() {
        if let Some(t) = dict.translate(w) {
            let e = acc.entry(t).or_insert((0.0, 0.0, 0));
            e.0 += p;
            e.1 += n;
            e.2 += 1;
        }
    }
    WordLexicon {
        entries: acc.into_iter().map(|(w, (p, n, c))| (w.to_string(), (p / c as f64, n / c as f64))).collect(),
    }
}

/// Mean score over the in-lexicon words of the sentence; `(0, 0)` if none.
pub fn score_sentence(wl: &WordLexicon, sentence: &Sentence) -> (f64, f64) {
    let (mut p, mut n, mut seen) = (0.0, 0.0, 0usize);
    for t in &sentence.tokens {
        if let Some((a, b)) = wl.get(t) {
            p += a;
            n += b;
            seen += 1;
        }
    }
    if seen == 0 {
        (0.0, 0.0)
    } else {
        (p / seen as f64, n / seen as f64)
    }
}

pub fn classify_threshold(scores: (f64, f64), delta: f64) -> SentimentLabel {
    let (p, n) = scores;
    if p - n > delta {
        SentimentLabel::Positive
    } else if n - p > delta {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    }
}

/// Parses either a sense-level (`word<TAB>sense<TAB>pos<TAB>neg`) or a
/// word-level (`word<TAB>pos<TAB>neg`) lexicon; sense-level rows are
/// averaged per word. A file mixing the two is rejected.
pub fn parse_lexicon(contents: &str, path: &Path) -> Result<WordLexicon> {
    let mut senses = SenseLexicon::default();
    let mut words = WordLexicon::default();
    let mut width = None;
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if width.is_some_and(|w| w != cols.len()) {
            return Err(Error::parse(path, i + 1, "mixed sense-level and word-level rows"));
        }
        width = Some(cols.len());
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, i + 1, "bad score"))
                .and_then(|v| check_score(v).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        };
        match cols.len() {
            3 => words.insert(cols[0], num(cols[1])?, num(cols[2])?)?,
            4 => senses.insert(cols[0], cols[1], num(cols[2])?, num(cols[3])?)?,
            _ => return Err(Error::parse(path, i + 1, "expected 3 or 4 tab-separated columns")),
        }
    }
    Ok(if width == Some(4) { sense_average(&senses) } else { words })
}

pub fn load_lexicon(path: &Path) -> Result<WordLexicon> {
    parse_lexicon(&read_to_string(path)?, path)
}
