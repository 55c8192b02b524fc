//! WebAssembly bindings behind the static page in `www/`.
//!
//! Each exported function is a thin wrapper over a plain Rust function of
//! the same shape, so the logic is testable without a browser.

use std::path::Path;

use wasm_bindgen::prelude::*;
use xlsent::align::Dictionary;
use xlsent::corpus::{Sentence, SentimentLabel, TokenizerConfig};
use xlsent::lexicon::{classify_threshold, parse_lexicon, score_sentence};
use xlsent::transfer::{kl_weights, weighted_vote, Prediction, VoteMode};
use xlsent::xlingrep::code_switch;

#[wasm_bindgen]
#[derive(Clone, Debug, PartialEq)]
pub struct LexiconVerdict {
    label: String,
    pos: f64,
    neg: f64,
    matched: usize,
}

#[wasm_bindgen]
impl LexiconVerdict {
    #[wasm_bindgen(getter)]
    pub fn label(&self) -> String {
        self.label.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn pos(&self) -> f64 {
        self.pos
    }

    #[wasm_bindgen(getter)]
    pub fn neg(&self) -> f64 {
        self.neg
    }

    /// Tokens found in the lexicon.
    #[wasm_bindgen(getter)]
    pub fn matched(&self) -> usize {
        self.matched
    }
}

pub fn classify_with_lexicon(lexicon_tsv: &str, sentence: &str, delta: f64) -> Result<LexiconVerdict, String> {
    if !(delta >= 0.0) {
        return Err("delta must be non-negative".into());
    }
    let lexicon = parse_lexicon(lexicon_tsv, Path::new("lexicon")).map_err(|e| e.to_string())?;
    let s = Sentence::parse(sentence, "demo", TokenizerConfig::default()).map_err(|e| e.to_string())?;
    let (pos, neg) = score_sentence(&lexicon, &s);
    let matched = s.tokens.iter().filter(|t| lexicon.get(t).is_some()).count();
    Ok(LexiconVerdict { label: classify_threshold((pos, neg), delta).to_string(), pos, neg, matched })
}

/// Normalized weights and the weighted hard vote over `labels` (label
/// codes 0 = positive, 1 = negative, 2 = neutral), one per source.
pub fn kl_vote(kls: &[f64], labels: &[u8]) -> Result<(Vec<f64>, String), String> {
    let weights = kl_weights(kls).map_err(|e| e.to_string())?;
    if labels.len() != kls.len() {
        return Err(format!("{} labels for {} sources", labels.len(), kls.len()));
    }
    let preds = labels
        .iter()
        .enumerate()
        .map(|(i, &code)| {
            let label = SentimentLabel::from_code(code as usize).ok_or(format!("bad label code {code}"))?;
            let mut distribution = [0.0; 3];
            distribution[label.code()] = 1.0;
            Ok(Prediction { label, distribution, source: format!("source {i}") })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let winner = weighted_vote(&preds, &weights, VoteMode::Hard).map_err(|e| e.to_string())?;
    Ok((weights, winner.to_string()))
}

/// Code-switches each non-empty line of `text` from `src` into `tgt`.
pub fn switch_text(text: &str, dict_tsv: &str, src: &str, tgt: &str, rate: f64, seed: u64) -> Result<String, String> {
    let dict = Dictionary::parse_tsv(dict_tsv, Path::new("dictionary"), src, tgt).map_err(|e| e.to_string())?;
    let sentences: Vec<Sentence> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Sentence::parse(l, src, TokenizerConfig::default()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (out, _) = code_switch(&[sentences], &[dict], rate, seed).map_err(|e| e.to_string())?;
    Ok(out.iter().map(Sentence::text).collect::<Vec<_>>().join("\n"))
}

#[wasm_bindgen]
pub fn lexicon_classify(lexicon_tsv: &str, sentence: &str, delta: f64) -> Result<LexiconVerdict, JsError> {
    classify_with_lexicon(lexicon_tsv, sentence, delta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ensemble_kl_weights(kls: Vec<f64>) -> Result<Vec<f64>, JsError> {
    kl_weights(&kls).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn ensemble_kl_vote(kls: Vec<f64>, labels: Vec<u8>) -> Result<String, JsError> {
    kl_vote(&kls, &labels).map(|(_, l)| l).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn code_switch_preview(
    text: &str,
    dict_tsv: &str,
    src: &str,
    tgt: &str,
    rate: f64,
    seed: u32,
) -> Result<String, JsError> {
    switch_text(text, dict_tsv, src, tgt, rate, u64::from(seed)).map_err(|e| JsError::new(&e))
}
