//! Neural sentiment classifier.
//!
//! Every token contributes a fixed cross-lingual embedding, an updatable
//! word embedding, a cluster embedding and optionally a 2-dim lexicon
//! score. A BiLSTM summary and the average of the token features feed a
//! ReLU layer and a 3-way softmax. Gradients are computed by hand and the
//! model is trained with Adam on the summed negative log-likelihood.

mod adam;
mod io;
mod network;
mod params;

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;

use crate::align::Dictionary;
use crate::corpus::{LabeledDataset, Sentence, SentimentLabel};
use crate::lexicon::WordLexicon;
use crate::xlingrep::{ClusterMap, EmbeddingTable};
use crate::{rng, Error, Result};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use io::MODEL_HEADER;
pub use network::{backward, batch_loss, forward, log_prob, loss_and_grad, sigmoid, softmax, TokenInput, Trace};
pub use params::{Dims, LstmParams, Mat, ModelParams, BLOCK_NAMES, NUM_LABELS};

/// Lookup resources shared by training and prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureResources {
    /// Fixed cross-lingual embeddings; the dimension is `d_ce`.
    pub embeddings: EmbeddingTable,
    pub clusters: ClusterMap,
    /// Applied to every token before lookup when present.
    pub dictionary: Option<Dictionary>,
    /// Source of the per-token lexicon score when that feature is on.
    pub lexicon: Option<WordLexicon>,
}

impl FeatureResources {
    /// No embeddings, clusters, dictionary or lexicon: every token resolves
    /// to UNK except in the updatable vocabulary.
    pub fn bare(d_ce: usize) -> Self {
        FeatureResources {
            embeddings: EmbeddingTable::empty(d_ce),
            clusters: ClusterMap::new(0, Default::default()).expect("empty map"),
            dictionary: None,
            lexicon: None,
        }
    }

    /// The word looked up for `token`: its translation if the dictionary
    /// has one, the token itself otherwise.
    pub fn lookup_key<'a>(&'a self, token: &'a str) -> &'a str {
        self.dictionary.as_ref().and_then(|d| d.translate(token)).unwrap_or(token)
    }
}

/// Updatable-embedding vocabulary; row 0 is UNK.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new(words: impl IntoIterator<Item = String>) -> Self {
        let words: Vec<String> = words.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i + 1)).collect();
        Vocab { words, index }
    }

    pub fn row(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(0)
    }

    /// Number of embedding rows including UNK.
    pub fn rows(&self) -> usize {
        self.words.len() + 1
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SentimentModel {
    pub dims: Dims,
    pub resources: FeatureResources,
    pub vocab: Vocab,
    pub params: ModelParams,
}

impl SentimentModel {
    /// A freshly initialized model over `vocab`.
    pub fn new(dims: Dims, resources: FeatureResources, vocab: Vocab, seed: u64) -> Result<Self> {
        dims.validate()?;
        if resources.embeddings.dim() != dims.d_ce {
            return Err(Error::Shape(format!(
                "embeddings have dimension {}, model expects d_ce = {}",
                resources.embeddings.dim(),
                dims.d_ce
            )));
        }
        let mut r = rng::stream(seed, "init");
        let params = ModelParams::init(&dims, vocab.rows(), resources.clusters.k + 1, &mut r);
        Ok(SentimentModel { dims, resources, vocab, params })
    }

    pub fn featurize(&self, sentence: &Sentence) -> Vec<TokenInput> {
        let res = &self.resources;
        sentence
            .tokens
            .iter()
            .map(|tok| {
                let key = res.lookup_key(tok);
                TokenInput {
                    fixed: res.embeddings.get(key).map_or_else(|| vec![0.0; self.dims.d_ce], <[f64]>::to_vec),
                    word_row: self.vocab.row(key),
                    cluster_row: res.clusters.get(key).map_or(0, |c| c + 1).min(self.params.emb_cluster.rows - 1),
                    lexicon: self.dims.lexicon.then(|| {
                        let (p, n) = res.lexicon.as_ref().map_or((0.0, 0.0), |l| l.score(key));
                        [p, n]
                    }),
                }
            })
            .collect()
    }

    pub fn distribution(&self, sentence: &Sentence) -> Result<[f64; 3]> {
        let trace = forward(&self.params, &self.dims, &self.featurize(sentence))?;
        Ok([trace.probs[0], trace.probs[1], trace.probs[2]])
    }

    /// Argmax label (ties go to the lower label code) and the distribution.
    pub fn predict(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
        let d = self.distribution(sentence)?;
        Ok((argmax_label(&d), d))
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut hit = 0usize;
        for e in &data.examples {
            hit += usize::from(self.predict(&e.sentence)?.0 == e.label);
        }
        Ok(hit as f64 / data.len() as f64)
    }
}

pub fn argmax_label(d: &[f64; 3]) -> SentimentLabel {
    let mut best = 0;
    for k in 1..3 {
        if d[k] > d[best] {
            best = k;
        }
    }
    SentimentLabel::ALL[best]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub dims: Dims,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
    /// Global gradient-norm clip; off by default.
    pub clip: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Summed training loss accumulated over each epoch.
    pub epoch_losses: Vec<f64>,
    /// Dev accuracy after each epoch, when a dev set is given.
    pub dev_accuracy: Vec<f64>,
}

/// Trains a model from scratch. The updatable vocabulary is the set of
/// lookup keys of the training tokens.
pub fn train(
    train_set: &LabeledDataset,
    dev_set: Option<&LabeledDataset>,
    resources: FeatureResources,
    cfg: &TrainConfig,
) -> Result<(SentimentModel, TrainReport)> {
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::invalid("epochs and batch size must be at least 1"));
    }
    let vocab = Vocab::new(
        train_set.examples.iter().flat_map(|e| e.sentence.tokens.iter()).map(|t| resources.lookup_key(t).to_string()),
    );
    let mut model = SentimentModel::new(cfg.dims, resources, vocab, cfg.seed)?;
    let inputs: Vec<(Vec<TokenInput>, usize)> =
        train_set.examples.iter().map(|e| (model.featurize(&e.sentence), e.label.code())).collect();

    let mut state = AdamState::new(&model.params, cfg.adam);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut batching = rng::stream(cfg.seed, "batching");
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut batching);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[TokenInput], usize)> =
                chunk.iter().map(|&i| (inputs[i].0.as_slice(), inputs[i].1)).collect();
            let (loss, mut grad) = loss_and_grad(&model.params, &model.dims, &batch)?;
            epoch_loss += loss;
            if let Some(max) = cfg.clip {
                let norm = grad.norm();
                if norm > max {
                    grad.scale(max / norm);
                }
            }
            adam_step(&mut model.params, &grad, &mut state)?;
        }
        log::debug!("epoch {}: loss {epoch_loss:.4}", epoch + 1);
        report.epoch_losses.push(epoch_loss);
        if let Some(dev) = dev_set {
            report.dev_accuracy.push(model.accuracy(dev)?);
        }
    }
    if !model.params.is_finite() {
        return Err(Error::invalid("training diverged to non-finite parameters"));
    }
    Ok((model, report))
}
