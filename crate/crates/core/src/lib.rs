//! Cross-lingual sentiment transfer.
//!
//! The crate covers the full pipeline for carrying sentiment classifiers from
//! resource-rich languages to a target language that has no labeled data:
//!
//! * [`corpus`]: labeled, parallel and POS-tagged data ingestion.
//! * [`align`]: IBM Model 1 alignment, intersection and dictionary extraction.
//! * [`xlingrep`]: code-switched corpora, skip-gram embeddings, word clusters.
//! * [`postag`]: averaged-perceptron tagger and POS trigram KL divergence.
//! * [`nnsent`]: BiLSTM + average-pool sentiment network with hand-written
//!   backpropagation and Adam.
//! * [`nbsvm`]: NB log-count-ratio linear baseline.
//! * [`lexicon`]: sense-averaged lexicon and the threshold classifier.
//! * [`transfer`]: annotation projection, direct transfer and the ensembles.
//! * [`harness`]: metrics, synthetic worlds, hyperparameter profiles.

pub mod align;
pub mod corpus;
mod error;
pub mod harness;
pub mod lexicon;
pub mod nbsvm;
pub mod nnsent;
pub mod postag;
pub mod rng;
pub mod transfer;
pub mod xlingrep;

pub use error::{Error, Result};
