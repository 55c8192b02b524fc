//! NBSVM-style linear baseline.
//!
//! Binarized bag-of-words features are scaled by per-label naive Bayes
//! log-count ratios and fed to one-vs-rest logistic regressions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::corpus::{LabeledDataset, Sentence, SentimentLabel};
use crate::error::{read_to_string, write_string};
use crate::{rng, Error, Result};

const BIAS_FEATURE: &str = "__bias__";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NbSvmConfig {
    /// Add-alpha smoothing of the class count vectors.
    pub alpha: f64,
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub bigrams: bool,
}

impl Default for NbSvmConfig {
    fn default() -> Self {
        NbSvmConfig { alpha: 1.0, l2: 1e-4, epochs: 30, lr: 0.1, seed: 1, bigrams: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NbSvmModel {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    pub bigrams: bool,
    /// Log-count ratio per label and feature.
    pub ratios: [Vec<f64>; 3],
    pub weights: [Vec<f64>; 3],
    pub biases: [f64; 3],
}

fn feature_strings(sentence: &Sentence, bigrams: bool) -> Vec<String> {
    let mut f: Vec<String> = sentence.tokens.clone();
    if bigrams {
        f.extend(sentence.tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    f
}

/// Log-count ratio `ln((p/|p|_1) / (q/|q|_1))` with `p = alpha + in-class
/// counts` and `q = alpha + out-of-class counts`.
pub fn log_count_ratio(in_class: &[f64], out_class: &[f64], alpha: f64) -> Vec<f64> {
    let p: Vec<f64> = in_class.iter().map(|c| c + alpha).collect();
    let q: Vec<f64> = out_class.iter().map(|c| c + alpha).collect();
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    p.iter().zip(&q).map(|(a, b)| ((a / sp) / (b / sq)).ln()).collect()
}

impl NbSvmModel {
    /// Sorted distinct known feature ids of the sentence.
    fn active(&self, sentence: &Sentence) -> Vec<usize> {
        let set: BTreeSet<usize> =
            feature_strings(sentence, self.bigrams).iter().filter_map(|f| self.index.get(f).copied()).collect();
        set.into_iter().collect()
    }

    fn score_active(&self, active: &[usize], label: usize) -> f64 {
        self.biases[label] + active.iter().map(|&j| self.weights[label][j] * self.ratios[label][j]).sum::<f64>()
    }

    /// Per-label linear scores.
    pub fn scores(&self, sentence: &Sentence) -> [f64; 3] {
        let a = self.active(sentence);
        [0, 1, 2].map(|l| self.score_active(&a, l))
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn ratio(&self, label: SentimentLabel, feature: &str) -> Option<f64> {
        self.index.get(feature).map(|&j| self.ratios[label.code()][j])
    }

    /// TSV `label<TAB>feature<TAB>weight` with the ratio folded into the
    /// weight, plus one `__bias__` row per label.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for label in SentimentLabel::ALL {
            let l = label.code();
            out.push_str(&format!("{label}\t{BIAS_FEATURE}\t{:?}\n", self.biases[l]));
            for (j, f) in self.vocab.iter().enumerate() {
                let w = self.weights[l][j] * self.ratios[l][j];
                if w != 0.0 {
                    out.push_str(&format!("{label}\t{f}\t{w:?}\n"));
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }

    /// Loads a saved model. Ratios are folded into the weights on save, so
    /// the loaded ratios are all 1.
    pub fn parse_tsv(contents: &str, path: &Path) -> Result<Self> {
        let mut rows: Vec<(usize, String, f64)> = Vec::new();
        let mut biases = [0.0; 3];
        let mut feats = BTreeSet::new();
        let mut bigrams = false;
        for (i, line) in contents.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, i + 1, "expected label<TAB>feature<TAB>weight"));
            }
            let label: SentimentLabel = cols[0].parse().map_err(|_| Error::parse(path, i + 1, "unknown label"))?;
            let w: f64 = cols[2]
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite())
                .ok_or_else(|| Error::parse(path, i + 1, "bad weight"))?;
            if cols[1] == BIAS_FEATURE {
                biases[label.code()] = w;
            } else {
                bigrams |= cols[1].contains(' ');
                feats.insert(cols[1].to_string());
                rows.push((label.code(), cols[1].to_string(), w));
            }
        }
        let vocab: Vec<String> = feats.into_iter().collect();
        let index: HashMap<String, usize> = vocab.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        let n = vocab.len();
        let mut weights = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (l, f, w) in rows {
            weights[l][index[&f]] = w;
        }
        Ok(NbSvmModel { vocab, index, bigrams, ratios: [vec![1.0; n], vec![1.0; n], vec![1.0; n]], weights, biases })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_tsv(&read_to_string(path)?, path)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn train_nbsvm(train: &LabeledDataset, config: &NbSvmConfig) -> Result<NbSvmModel> {
    let labels: BTreeSet<SentimentLabel> = train.examples.iter().map(|e| e.label).collect();
    if labels.len() < 2 {
        return Err(Error::invalid("NBSVM needs at least two distinct labels"));
    }
    let mut vocab_set: BTreeSet<String> = BTreeSet::new();
    for e in &train.examples {
        vocab_set.extend(feature_strings(&e.sentence, config.bigrams));
    }
    let vocab: Vec<String> = vocab_set.into_iter().collect();
    let index: HashMap<String, usize> = vocab.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    let n = vocab.len();
    let mut model = NbSvmModel {
        vocab,
        index,
        bigrams: config.bigrams,
        ratios: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        weights: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        biases: [0.0; 3],
    };
    let active: Vec<Vec<usize>> = train.examples.iter().map(|e| model.active(&e.sentence)).collect();

    for label in SentimentLabel::ALL {
        let l = label.code();
        let mut pc = vec![0.0; n];
        let mut qc = vec![0.0; n];
        for (e, a) in train.examples.iter().zip(&active) {
            let target = if e.label == label { &mut pc } else { &mut qc };
            for &j in a {
                target[j] += 1.0;
            }
        }
        model.ratios[l] = log_count_ratio(&pc, &qc, config.alpha);

        let mut order: Vec<usize> = (0..active.len()).collect();
        let mut r = rng::stream(config.seed, &format!("nbsvm-{label}"));
        for _ in 0..config.epochs {
            order.shuffle(&mut r);
            for &i in &order {
                let y = f64::from(u8::from(train.examples[i].label == label));
                let g = sigmoid(model.score_active(&active[i], l)) - y;
                for &j in &active[i] {
                    let w = &mut model.weights[l][j];
                    *w -= config.lr * (g * model.ratios[l][j] + config.l2 * *w);
                }
                model.biases[l] -= config.lr * g;
            }
        }
    }
    Ok(model)
}

/// Argmax label (ties to the lower code) and the raw scores.
pub fn predict_nbsvm(model: &NbSvmModel, sentence: &Sentence) -> (SentimentLabel, [f64; 3]) {
    let s = model.scores(sentence);
    let mut best = 0;
    for k in 1..3 {
        if s[k] > s[best] {
            best = k;
        }
    }
    (SentimentLabel::ALL[best], s)
}

/// Label histogram, for quick sanity reports.
pub fn label_counts(d: &LabeledDataset) -> BTreeMap<SentimentLabel, usize> {
    let mut m = BTreeMap::new();
    for e in &d.examples {
        *m.entry(e.label).or_insert(0) += 1;
    }
    m
}
