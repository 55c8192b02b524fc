//! Averaged-perceptron POS tagging and POS trigram distributions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::corpus::TaggedCorpus;
use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const DEFAULT_SMOOTHING: f64 = 0.1;
const BIAS: &str = "bias";

/// Greedy left-to-right averaged perceptron.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    tagset: Vec<String>,
    /// Averaged weights, one entry per tag.
    weights: HashMap<String, Vec<f64>>,
}

fn shape(word: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in word.chars() {
        let k = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(k) {
            out.push(k);
            last = Some(k);
        }
    }
    out
}

fn features(words: &[String], i: usize, prev: &str, prev2: &str) -> Vec<String> {
    let w = &words[i];
    let lower = w.to_lowercase();
    let chars: Vec<char> = lower.chars().collect();
    let mut f = vec![
        BIAS.to_string(),
        format!("w={w}"),
        format!("lw={lower}"),
        format!("t-1={prev}"),
        format!("t-2,t-1={prev2},{prev}"),
        format!("shape={}", shape(w)),
    ];
    for k in 1..=3.min(chars.len()) {
        f.push(format!("pre{k}={}", chars[..k].iter().collect::<String>()));
        f.push(format!("suf{k}={}", chars[chars.len() - k..].iter().collect::<String>()));
    }
    f
}

struct Trainer {
    ntags: usize,
    step: u64,
    weights: HashMap<String, Vec<f64>>,
    totals: HashMap<String, Vec<f64>>,
    stamps: HashMap<String, Vec<u64>>,
}

impl Trainer {
    fn scores(&self, feats: &[String]) -> Vec<f64> {
        let mut s = vec![0.0; self.ntags];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for (a, b) in s.iter_mut().zip(w) {
                    *a += b;
                }
            }
        }
        s
    }

    fn bump(&mut self, feat: &str, tag: usize, delta: f64) {
        let n = self.ntags;
        let w = self.weights.entry(feat.to_string()).or_insert_with(|| vec![0.0; n]);
        let t = self.totals.entry(feat.to_string()).or_insert_with(|| vec![0.0; n]);
        let s = self.stamps.entry(feat.to_string()).or_insert_with(|| vec![0; n]);
        t[tag] += (self.step - s[tag]) as f64 * w[tag];
        s[tag] = self.step;
        w[tag] += delta;
    }

    fn averaged(mut self) -> HashMap<String, Vec<f64>> {
        let step = self.step.max(1);
        let mut out = HashMap::with_capacity(self.weights.len());
        for (f, w) in self.weights.drain() {
            let t = &self.totals[&f];
            let s = &self.stamps[&f];
            let avg: Vec<f64> = (0..self.ntags).map(|k| (t[k] + (step - s[k]) as f64 * w[k]) / step as f64).collect();
            out.insert(f, avg);
        }
        out
    }
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Trains for `epochs` passes in corpus order.
pub fn train_tagger(corpus: &TaggedCorpus, epochs: usize) -> Result<TaggerModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if epochs == 0 {
        return Err(Error::invalid("tagger training needs at least one epoch"));
    }
    let tagset: Vec<String> = corpus.tagset.iter().cloned().collect();
    let tag_id: HashMap<&str, usize> = tagset.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut tr = Trainer {
        ntags: tagset.len(),
        step: 0,
        weights: HashMap::new(),
        totals: HashMap::new(),
        stamps: HashMap::new(),
    };
    for _ in 0..epochs {
        for (sent, gold) in &corpus.sentences {
            let (mut prev, mut prev2) = (BOS.to_string(), BOS.to_string());
            for i in 0..sent.len() {
                let feats = features(&sent.tokens, i, &prev, &prev2);
                let guess = argmax(&tr.scores(&feats));
                let truth = tag_id[gold[i].as_str()];
                tr.step += 1;
                if guess != truth {
                    for f in &feats {
                        tr.bump(f, truth, 1.0);
                        tr.bump(f, guess, -1.0);
                    }
                }
                prev2 = prev;
                prev = tagset[guess].clone();
            }
        }
    }
    Ok(TaggerModel { tagset, weights: tr.averaged() })
}

impl TaggerModel {
    pub fn tagset(&self) -> &[String] {
        &self.tagset
    }

    pub fn tag(&self, words: &[String]) -> Vec<String> {
        let (mut prev, mut prev2) = (BOS.to_string(), BOS.to_string());
        let mut out = Vec::with_capacity(words.len());
        for i in 0..words.len() {
            let mut s = vec![0.0; self.tagset.len()];
            for f in features(words, i, &prev, &prev2) {
                if let Some(w) = self.weights.get(&f) {
                    for (a, b) in s.iter_mut().zip(w) {
                        *a += b;
                    }
                }
            }
            let t = self.tagset[argmax(&s)].clone();
            prev2 = std::mem::replace(&mut prev, t.clone());
            out.push(t);
        }
        out
    }

    pub fn accuracy(&self, corpus: &TaggedCorpus) -> f64 {
        let (mut hit, mut total) = (0usize, 0usize);
        for (s, gold) in &corpus.sentences {
            for (p, g) in self.tag(&s.tokens).iter().zip(gold) {
                hit += usize::from(p == g);
                total += 1;
            }
        }
        hit as f64 / total.max(1) as f64
    }

    /// TSV `feature<TAB>tag<TAB>weight`, sorted. Zero weights are dropped
    /// except on the bias feature, which carries the full tagset.
    pub fn to_tsv(&self) -> String {
        let feats: BTreeSet<&String> = self.weights.keys().collect();
        let mut out = String::new();
        for tag in &self.tagset {
            if !self.weights.contains_key(BIAS) {
                out.push_str(&format!("{BIAS}\t{tag}\t0.0\n"));
            }
        }
        for f in feats {
            let w = &self.weights[f];
            for (k, tag) in self.tagset.iter().enumerate() {
                if w[k] != 0.0 || f == BIAS {
                    out.push_str(&format!("{f}\t{tag}\t{:?}\n", w[k]));
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }

    pub fn parse_tsv(contents: &str, path: &Path) -> Result<Self> {
        let mut rows = Vec::new();
        let mut tags = BTreeSet::new();
        for (i, line) in contents.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, i + 1, "expected feature<TAB>tag<TAB>weight"));
            }
            let w: f64 = cols[2]
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite())
                .ok_or_else(|| Error::parse(path, i + 1, "bad weight"))?;
            tags.insert(cols[1].to_string());
            rows.push((cols[0].to_string(), cols[1].to_string(), w));
        }
        if tags.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let tagset: Vec<String> = tags.into_iter().collect();
        let tag_id: HashMap<&str, usize> = tagset.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
        let mut weights: HashMap<String, Vec<f64>> = HashMap::new();
        for (f, t, w) in rows {
            weights.entry(f).or_insert_with(|| vec![0.0; tagset.len()])[tag_id[t.as_str()]] = w;
        }
        Ok(TaggerModel { tagset, weights })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_tsv(&read_to_string(path)?, path)
    }
}

/// Smoothed distribution over trigrams of `{BOS, EOS} ∪ tagset`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigramDist {
    /// Extended tagset: BOS, EOS, then the real tags in sorted order.
    symbols: Vec<String>,
    probs: Vec<f64>,
    pub alpha: f64,
}

impl TrigramDist {
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, a: &str, b: &str, c: &str) -> f64 {
        let idx = |t: &str| self.symbols.iter().position(|s| s == t);
        match (idx(a), idx(b), idx(c)) {
            (Some(x), Some(y), Some(z)) => {
                let n = self.symbols.len();
                self.probs[(x * n + y) * n + z]
            }
            _ => 0.0,
        }
    }
}

/// Counts trigrams over `BOS BOS t1 .. tn EOS` for each sequence, over the
/// tagset found in the data.
pub fn trigram_distribution(tagged: &[Vec<String>], alpha: f64) -> Result<TrigramDist> {
    let tagset: BTreeSet<String> = tagged.iter().flatten().cloned().collect();
    trigram_distribution_over(tagged, &tagset, alpha)
}

/// As [`trigram_distribution`] with an explicit tagset, so that several
/// corpora share one support.
pub fn trigram_distribution_over(tagged: &[Vec<String>], tagset: &BTreeSet<String>, alpha: f64) -> Result<TrigramDist> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("smoothing constant must be positive, got {alpha}")));
    }
    if tagged.iter().all(Vec::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let symbols: Vec<String> = [BOS.to_string(), EOS.to_string()]
        .into_iter()
        .chain(tagset.iter().filter(|t| *t != BOS && *t != EOS).cloned())
        .collect();
    let id: BTreeMap<&str, usize> = symbols.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let n = symbols.len();
    let mut counts = vec![0.0; n * n * n];
    for seq in tagged {
        if seq.is_empty() {
            continue;
        }
        let mut ext = vec![0usize, 0];
        for t in seq {
            ext.push(*id.get(t.as_str()).ok_or_else(|| Error::invalid(format!("tag `{t}` not in tagset")))?);
        }
        ext.push(1);
        for w in ext.windows(3) {
            counts[(w[0] * n + w[1]) * n + w[2]] += 1.0;
        }
    }
    let total: f64 = counts.iter().sum::<f64>() + alpha * counts.len() as f64;
    let probs = counts.into_iter().map(|c| (c + alpha) / total).collect();
    Ok(TrigramDist { symbols, probs, alpha })
}

/// Natural-log KL divergence `sum p ln(p / q)`.
pub fn kl(p: &TrigramDist, q: &TrigramDist) -> Result<f64> {
    if p.symbols != q.symbols {
        return Err(Error::invalid("trigram distributions have different supports"));
    }
    Ok(kl_slices(&p.probs, &q.probs))
}

pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * (a / b).ln()).sum::<f64>().max(0.0)
}

/// Argument order for the ensemble divergence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlDirection {
    /// `KL(target || source)`.
    #[default]
    TargetSource,
    /// `KL(source || target)`.
    SourceTarget,
}

pub fn kl_directed(target: &TrigramDist, source: &TrigramDist, dir: KlDirection) -> Result<f64> {
    match dir {
        KlDirection::TargetSource => kl(target, source),
        KlDirection::SourceTarget => kl(source, target),
    }
}
