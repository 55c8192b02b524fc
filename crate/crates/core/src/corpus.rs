//! Labeled, parallel, monolingual and POS-tagged text.
//!
//! All text goes through [`tokenize`]: whitespace splitting followed by
//! peeling leading and trailing punctuation into their own tokens, with
//! lowercasing on by default.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{read_to_string, write_string};
use crate::{rng, Error, Result};

/// Three-way sentiment label. The integer codes are fixed for serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SentimentLabel {
    Positive = 0,
    Negative = 1,
    Neutral = 2,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [SentimentLabel::Positive, SentimentLabel::Negative, SentimentLabel::Neutral];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            _ => Err(Error::invalid(format!("unknown label `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { lowercase: true }
    }
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '«' | '»' | '“' | '”' | '‘' | '’' | '„' | '¿' | '¡' | '…' | '،' | '؟' | '؛' | '—' | '–')
}

/// Splits `text` on Unicode whitespace and separates every leading and
/// trailing punctuation character into a token of its own.
pub fn tokenize(text: &str, config: TokenizerConfig) -> Vec<String> {
    let text = if config.lowercase { text.to_lowercase() } else { text.to_string() };
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let start = chars.iter().position(|&c| !is_punct(c)).unwrap_or(chars.len());
        let end = chars.iter().rposition(|&c| !is_punct(c)).map_or(start, |i| i + 1);
        out.extend(chars[..start].iter().map(|c| c.to_string()));
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(chars[end.max(start)..].iter().map(|c| c.to_string()));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub language: String,
}

impl Sentence {
    /// Builds a sentence, rejecting empty token lists and tokens that contain
    /// whitespace.
    pub fn new(tokens: Vec<String>, language: impl Into<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::invalid("sentence has no tokens"));
        }
        if let Some(t) = tokens.iter().find(|t| t.is_empty() || t.chars().any(char::is_whitespace)) {
            return Err(Error::invalid(format!("invalid token `{t}`")));
        }
        Ok(Sentence { tokens, language: language.into() })
    }

    pub fn parse(text: &str, language: &str, config: TokenizerConfig) -> Result<Self> {
        Sentence::new(tokenize(text, config), language)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledExample {
    pub sentence: Sentence,
    pub label: SentimentLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDataset {
    pub language: String,
    pub examples: Vec<LabeledExample>,
}

impl LabeledDataset {
    pub fn new(language: impl Into<String>, examples: Vec<LabeledExample>) -> Result<Self> {
        let language = language.into();
        if let Some(e) = examples.iter().find(|e| e.sentence.language != language) {
            return Err(Error::invalid(format!(
                "example in language `{}` inside `{language}` dataset",
                e.sentence.language
            )));
        }
        Ok(LabeledDataset { language, examples })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<SentimentLabel> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn label_histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for e in &self.examples {
            h[e.label.code()] += 1;
        }
        h
    }

    /// Serializes as `label<TAB>text`, one example per line.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for e in &self.examples {
            s.push_str(e.label.name());
            s.push('\t');
            s.push_str(&e.sentence.text());
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }
}

/// Parses a labeled TSV (`label<TAB>text`). Blank lines are skipped.
pub fn parse_labeled(contents: &str, path: &Path, language: &str, config: TokenizerConfig) -> Result<LabeledDataset> {
    let mut examples = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            log::warn!("{}: skipping blank line {lineno}", path.display());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(Error::parse(path, lineno, format!("expected 2 tab-separated columns, found {}", cols.len())));
        }
        let label: SentimentLabel = cols[0].trim().parse().map_err(|_| Error::parse(path, lineno, "unknown label"))?;
        let sentence =
            Sentence::parse(cols[1], language, config).map_err(|_| Error::parse(path, lineno, "empty text"))?;
        examples.push(LabeledExample { sentence, label });
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    LabeledDataset::new(language, examples)
}

pub fn load_labeled(path: &Path, language: &str, config: TokenizerConfig) -> Result<LabeledDataset> {
    parse_labeled(&read_to_string(path)?, path, language, config)
}

/// Seeded 80/10/10 split. Sizes are `floor(0.8 n)`, `floor(0.1 n)` and the
/// remainder.
pub fn split_dataset(d: &LabeledDataset, seed: u64) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    let n = d.len();
    if n < 10 {
        return Err(Error::invalid(format!("dataset of {n} examples is too small to split (need at least 10)")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let n_train = n * 8 / 10;
    let n_dev = n / 10;
    let take = |idx: &[usize]| LabeledDataset {
        language: d.language.clone(),
        examples: idx.iter().map(|&i| d.examples[i].clone()).collect(),
    };
    Ok((take(&order[..n_train]), take(&order[n_train..n_train + n_dev]), take(&order[n_train + n_dev..])))
}

/// Sentence-aligned text across several languages. A language code may occur
/// more than once when a language has several translations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub languages: Vec<String>,
    pub rows: Vec<Vec<Sentence>>,
}

/// Source/target token sequences of one language pair.
pub type Bitext = Vec<(Vec<String>, Vec<String>)>;

impl ParallelCorpus {
    pub fn new(languages: Vec<String>, rows: Vec<Vec<Sentence>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != languages.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} sentences for {} languages",
                    row.len(),
                    languages.len()
                )));
            }
        }
        Ok(ParallelCorpus { languages, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Index of the first column in `language`.
    pub fn column_of(&self, language: &str) -> Result<usize> {
        self.languages
            .iter()
            .position(|l| l == language)
            .ok_or_else(|| Error::invalid(format!("language `{language}` not in parallel corpus")))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = &Sentence> + '_ {
        self.rows.iter().map(move |r| &r[col])
    }

    pub fn bitext(&self, src_col: usize, tgt_col: usize) -> Bitext {
        self.rows.iter().map(|r| (r[src_col].tokens.clone(), r[tgt_col].tokens.clone())).collect()
    }

    /// Writes one file per column, one sentence per line.
    pub fn save(&self, paths: &[&Path]) -> Result<()> {
        if paths.len() != self.languages.len() {
            return Err(Error::invalid("one output path per language is required"));
        }
        for (col, path) in paths.iter().enumerate() {
            let mut s = String::new();
            for sent in self.column(col) {
                s.push_str(&sent.text());
                s.push('\n');
            }
            write_string(path, &s)?;
        }
        Ok(())
    }
}

/// Loads a parallel corpus from one file per language; line `i` of every
/// file forms row `i`.
pub fn load_parallel(files: &[(&str, &Path)], config: TokenizerConfig) -> Result<ParallelCorpus> {
    if files.is_empty() {
        return Err(Error::invalid("no parallel files given"));
    }
    let texts = files.iter().map(|(_, path)| read_to_string(path)).collect::<Result<Vec<_>>>()?;
    let columns: Vec<(&&str, &&Path, Vec<&str>)> =
        files.iter().zip(&texts).map(|((lang, path), text)| (lang, path, text.lines().collect())).collect();
    let n = columns[0].2.len();
    if let Some((_, path, lines)) = columns.iter().find(|c| c.2.len() != n) {
        return Err(Error::invalid(format!(
            "line count mismatch: {} has {n} lines but {} has {}",
            files[0].1.display(),
            path.display(),
            lines.len()
        )));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(columns.len());
        for (lang, path, lines) in &columns {
            let s = Sentence::parse(lines[i], lang, config).map_err(|_| Error::parse(path, i + 1, "empty sentence"))?;
            row.push(s);
        }
        rows.push(row);
    }
    ParallelCorpus::new(files.iter().map(|(l, _)| l.to_string()).collect(), rows)
}

/// Plain monolingual text, one sentence per line; blank lines skipped.
pub fn load_monolingual(path: &Path, language: &str, config: TokenizerConfig) -> Result<Vec<Sentence>> {
    let text = read_to_string(path)?;
    let out: Vec<Sentence> = text.lines().filter_map(|l| Sentence::parse(l, language, config).ok()).collect();
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

pub fn sentences_to_text(sentences: &[Sentence]) -> String {
    let mut s = String::new();
    for sent in sentences {
        s.push_str(&sent.text());
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub sentences: Vec<(Sentence, Vec<String>)>,
    pub tagset: BTreeSet<String>,
}

impl TaggedCorpus {
    pub fn new(sentences: Vec<(Sentence, Vec<String>)>) -> Result<Self> {
        let mut tagset = BTreeSet::new();
        for (s, tags) in &sentences {
            if s.len() != tags.len() {
                return Err(Error::invalid(format!("{} tokens but {} tags", s.len(), tags.len())));
            }
            tagset.extend(tags.iter().cloned());
        }
        Ok(TaggedCorpus { sentences, tagset })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn tag_sequences(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|(_, t)| t.clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (sent, tags) in &self.sentences {
            let line: Vec<String> = sent.tokens.iter().zip(tags).map(|(w, t)| format!("{w}/{t}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_text())
    }
}

/// Parses `word/TAG word/TAG ...` lines. The split is at the last `/`, so
/// words may themselves contain slashes.
pub fn parse_tagged(contents: &str, path: &Path, language: &str, config: TokenizerConfig) -> Result<TaggedCorpus> {
    let mut sentences = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut words = Vec::new();
        let mut tags = Vec::new();
        for item in line.split_whitespace() {
            let (w, t) = item
                .rsplit_once('/')
                .filter(|(w, t)| !w.is_empty() && !t.is_empty())
                .ok_or_else(|| Error::parse(path, i + 1, format!("token `{item}` has no /TAG")))?;
            words.push(if config.lowercase { w.to_lowercase() } else { w.to_string() });
            tags.push(t.to_string());
        }
        sentences.push((Sentence::new(words, language)?, tags));
    }
    TaggedCorpus::new(sentences)
}

pub fn load_tagged(path: &Path, language: &str, config: TokenizerConfig) -> Result<TaggedCorpus> {
    parse_tagged(&read_to_string(path)?, path, language, config)
}
