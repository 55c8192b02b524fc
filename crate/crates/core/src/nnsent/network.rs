//! Forward pass and backpropagation.
//!
//! Per token `f_i = x_ce ∘ x_e ∘ x_cc (∘ x_sw)`. The sentence is encoded as
//! `r = h_fwd(n) ∘ h_bwd(1)` and `p = mean_i f_i`, then
//! `hid = ReLU(H (r ∘ p) + b_H)` and `softmax(W hid + b_W)`.

use super::params::{Dims, LstmParams, Mat, ModelParams, NUM_LABELS};
use crate::{Error, Result};

/// Model input for one token, already resolved against the vocabularies.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenInput {
    /// Fixed cross-lingual vector, `d_ce` values (zeros for UNK).
    pub fixed: Vec<f64>,
    /// Row of the updatable word embedding.
    pub word_row: usize,
    /// Row of the cluster embedding.
    pub cluster_row: usize,
    /// Lexicon score, present iff the lexicon feature is on.
    pub lexicon: Option<[f64; 2]>,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Log-sum-exp stabilized softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `ln softmax(logits)[k]`, computed without forming the probabilities.
pub fn log_prob(logits: &[f64], k: usize) -> f64 {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
    logits[k] - lse
}

fn concat_input(params: &ModelParams, dims: &Dims, tok: &TokenInput) -> Result<Vec<f64>> {
    if tok.fixed.len() != dims.d_ce {
        return Err(Error::Shape(format!("fixed vector of {} values, expected {}", tok.fixed.len(), dims.d_ce)));
    }
    if tok.lexicon.is_some() != dims.lexicon {
        return Err(Error::Shape("lexicon feature presence disagrees with the model".into()));
    }
    if tok.word_row >= params.emb_word.rows || tok.cluster_row >= params.emb_cluster.rows {
        return Err(Error::Shape("embedding row out of range".into()));
    }
    let mut f = Vec::with_capacity(dims.input());
    f.extend_from_slice(&tok.fixed);
    f.extend_from_slice(params.emb_word.row(tok.word_row));
    f.extend_from_slice(params.emb_cluster.row(tok.cluster_row));
    if let Some(sw) = tok.lexicon {
        f.extend_from_slice(&sw);
    }
    Ok(f)
}

#[derive(Clone, Debug)]
struct LstmStep {
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

/// Runs one LSTM over `inputs` (in the given order) from zero state.
fn lstm_forward(p: &LstmParams, inputs: &[&[f64]], hidden: usize) -> Vec<LstmStep> {
    let mut steps: Vec<LstmStep> = Vec::with_capacity(inputs.len());
    let zero = vec![0.0; hidden];
    for x in inputs {
        let (h_prev, c_prev) = steps.last().map_or((&zero, &zero), |s| (&s.h, &s.c));
        let mut z = p.b.data.clone();
        p.w.gemv_acc(x, &mut z);
        p.u.gemv_acc(h_prev, &mut z);
        let i: Vec<f64> = z[..hidden].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[hidden..2 * hidden].iter().map(|&v| sigmoid(v)).collect();
        let o: Vec<f64> = z[2 * hidden..3 * hidden].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[3 * hidden..].iter().map(|v| v.tanh()).collect();
        let c: Vec<f64> = (0..hidden).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = (0..hidden).map(|k| o[k] * tanh_c[k]).collect();
        steps.push(LstmStep { i, f, o, g, c, tanh_c, h });
    }
    steps
}

/// Backpropagates a gradient on the final hidden state. Accumulates weight
/// gradients into `grad` and returns the gradient for each input.
fn lstm_backward(
    p: &LstmParams,
    grad: &mut LstmParams,
    inputs: &[&[f64]],
    steps: &[LstmStep],
    d_final: &[f64],
) -> Vec<Vec<f64>> {
    let hidden = d_final.len();
    let zero = vec![0.0; hidden];
    let mut dh = d_final.to_vec();
    let mut dc = vec![0.0; hidden];
    let mut dxs = vec![Vec::new(); inputs.len()];
    let mut dz = vec![0.0; 4 * hidden];
    for t in (0..steps.len()).rev() {
        let s = &steps[t];
        let (h_prev, c_prev) = if t == 0 { (&zero, &zero) } else { (&steps[t - 1].h, &steps[t - 1].c) };
        for k in 0..hidden {
            let d_o = dh[k] * s.tanh_c[k];
            dc[k] += dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
            let d_i = dc[k] * s.g[k];
            let d_g = dc[k] * s.i[k];
            let d_f = dc[k] * c_prev[k];
            dz[k] = d_i * s.i[k] * (1.0 - s.i[k]);
            dz[hidden + k] = d_f * s.f[k] * (1.0 - s.f[k]);
            dz[2 * hidden + k] = d_o * s.o[k] * (1.0 - s.o[k]);
            dz[3 * hidden + k] = d_g * (1.0 - s.g[k] * s.g[k]);
            dc[k] *= s.f[k];
        }
        grad.w.outer_acc(&dz, inputs[t]);
        grad.u.outer_acc(&dz, h_prev);
        grad.b.add_acc(&dz);
        let mut dx = vec![0.0; inputs[t].len()];
        p.w.gemv_t_acc(&dz, &mut dx);
        dxs[t] = dx;
        dh.iter_mut().for_each(|v| *v = 0.0);
        p.u.gemv_t_acc(&dz, &mut dh);
    }
    dxs
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    pub inputs: Vec<Vec<f64>>,
    fwd: Vec<LstmStep>,
    bwd: Vec<LstmStep>,
    /// `r(x) ∘ p(x)`
    pub joint: Vec<f64>,
    /// Hidden pre-activation.
    pub pre_hidden: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Trace {
    pub fn recurrent(&self) -> &[f64] {
        let d_rec = self.fwd.last().map_or(0, |s| s.h.len());
        &self.joint[..2 * d_rec]
    }

    pub fn pooled(&self) -> &[f64] {
        let d_rec = self.fwd.last().map_or(0, |s| s.h.len());
        &self.joint[2 * d_rec..]
    }
}

pub fn forward(params: &ModelParams, dims: &Dims, tokens: &[TokenInput]) -> Result<Trace> {
    if tokens.is_empty() {
        return Err(Error::invalid("cannot classify an empty sentence"));
    }
    let inputs: Vec<Vec<f64>> = tokens.iter().map(|t| concat_input(params, dims, t)).collect::<Result<_>>()?;
    let fwd_in: Vec<&[f64]> = inputs.iter().map(Vec::as_slice).collect();
    let bwd_in: Vec<&[f64]> = inputs.iter().rev().map(Vec::as_slice).collect();
    let fwd = lstm_forward(&params.lstm_fwd, &fwd_in, dims.d_rec);
    let bwd = lstm_forward(&params.lstm_bwd, &bwd_in, dims.d_rec);

    let n = inputs.len() as f64;
    let mut joint = Vec::with_capacity(2 * dims.d_rec + dims.input());
    joint.extend_from_slice(&fwd.last().expect("n >= 1").h);
    joint.extend_from_slice(&bwd.last().expect("n >= 1").h);
    let mut pooled = vec![0.0; dims.input()];
    for f in &inputs {
        for (a, b) in pooled.iter_mut().zip(f) {
            *a += b;
        }
    }
    joint.extend(pooled.into_iter().map(|v| v / n));

    let mut pre_hidden = params.hidden_bias.data.clone();
    params.hidden.gemv_acc(&joint, &mut pre_hidden);
    let hidden: Vec<f64> = pre_hidden.iter().map(|&v| v.max(0.0)).collect();
    let mut logits = params.output_bias.data.clone();
    params.output.gemv_acc(&hidden, &mut logits);
    let probs = softmax(&logits);
    Ok(Trace { inputs, fwd, bwd, joint, pre_hidden, hidden, logits, probs })
}

/// Adds the gradient of `-ln p(gold | x)` to `grad`; returns the loss.
pub fn backward(
    params: &ModelParams,
    dims: &Dims,
    tokens: &[TokenInput],
    trace: &Trace,
    gold: usize,
    grad: &mut ModelParams,
) -> f64 {
    let loss = -log_prob(&trace.logits, gold);
    let mut d_logits = trace.probs.clone();
    d_logits[gold] -= 1.0;
    debug_assert_eq!(d_logits.len(), NUM_LABELS);

    grad.output.outer_acc(&d_logits, &trace.hidden);
    grad.output_bias.add_acc(&d_logits);
    let mut d_hidden = vec![0.0; dims.d_h];
    params.output.gemv_t_acc(&d_logits, &mut d_hidden);
    for (d, &a) in d_hidden.iter_mut().zip(&trace.pre_hidden) {
        if a <= 0.0 {
            *d = 0.0;
        }
    }
    grad.hidden.outer_acc(&d_hidden, &trace.joint);
    grad.hidden_bias.add_acc(&d_hidden);
    let mut d_joint = vec![0.0; trace.joint.len()];
    params.hidden.gemv_t_acc(&d_hidden, &mut d_joint);

    let d_rec = dims.d_rec;
    let n = tokens.len();
    let mut d_inputs = vec![vec![0.0; dims.input()]; n];
    let d_pool = &d_joint[2 * d_rec..];
    for d in d_inputs.iter_mut() {
        for (a, b) in d.iter_mut().zip(d_pool) {
            *a += b / n as f64;
        }
    }

    let fwd_in: Vec<&[f64]> = trace.inputs.iter().map(Vec::as_slice).collect();
    let bwd_in: Vec<&[f64]> = trace.inputs.iter().rev().map(Vec::as_slice).collect();
    let dx_f = lstm_backward(&params.lstm_fwd, &mut grad.lstm_fwd, &fwd_in, &trace.fwd, &d_joint[..d_rec]);
    let dx_b = lstm_backward(&params.lstm_bwd, &mut grad.lstm_bwd, &bwd_in, &trace.bwd, &d_joint[d_rec..2 * d_rec]);
    for t in 0..n {
        for (a, b) in d_inputs[t].iter_mut().zip(&dx_f[t]) {
            *a += b;
        }
        for (a, b) in d_inputs[t].iter_mut().zip(&dx_b[n - 1 - t]) {
            *a += b;
        }
    }

    let (e0, c0) = (dims.d_ce, dims.d_ce + dims.d_e);
    for (tok, d) in tokens.iter().zip(&d_inputs) {
        add_row(&mut grad.emb_word, tok.word_row, &d[e0..c0]);
        add_row(&mut grad.emb_cluster, tok.cluster_row, &d[c0..c0 + dims.d_cc]);
    }
    loss
}

fn add_row(m: &mut Mat, row: usize, g: &[f64]) {
    for (a, b) in m.row_mut(row).iter_mut().zip(g) {
        *a += b;
    }
}

/// Summed negative log-likelihood and its gradient over a batch.
pub fn loss_and_grad(
    params: &ModelParams,
    dims: &Dims,
    batch: &[(&[TokenInput], usize)],
) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut grad = params.zeros_like();
    let mut loss = 0.0;
    for (tokens, gold) in batch {
        let trace = forward(params, dims, tokens)?;
        loss += backward(params, dims, tokens, &trace, *gold, &mut grad);
    }
    Ok((loss, grad))
}

/// Loss only; used by finite-difference checks.
pub fn batch_loss(params: &ModelParams, dims: &Dims, batch: &[(&[TokenInput], usize)]) -> Result<f64> {
    let mut loss = 0.0;
    for (tokens, gold) in batch {
        loss -= log_prob(&forward(params, dims, tokens)?.logits, *gold);
    }
    Ok(loss)
}
