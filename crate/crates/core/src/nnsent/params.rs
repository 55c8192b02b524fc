use rand::Rng;

use crate::{Error, Result};

/// Dense row-major matrix. Bias vectors are `n x 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn uniform(rows: usize, cols: usize, limit: f64, rng: &mut impl Rng) -> Self {
        Mat { rows, cols, data: (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect() }
    }

    /// Xavier/Glorot uniform.
    pub fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        Mat::uniform(rows, cols, limit, rng)
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out += self * x`
    pub(crate) fn gemv_acc(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o += self.row(r).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// `out += self^T * y`
    pub(crate) fn gemv_t_acc(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(r)) {
                    *o += a * yr;
                }
            }
        }
    }

    /// `self += y x^T`
    pub(crate) fn outer_acc(&mut self, y: &[f64], x: &[f64]) {
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                for (a, b) in self.row_mut(r).iter_mut().zip(x) {
                    *a += yr * b;
                }
            }
        }
    }

    pub(crate) fn add_acc(&mut self, y: &[f64]) {
        for (a, b) in self.data.iter_mut().zip(y) {
            *a += b;
        }
    }

    pub fn same_shape(&self, other: &Mat) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Network dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub d_ce: usize,
    pub d_e: usize,
    pub d_cc: usize,
    pub d_rec: usize,
    pub d_h: usize,
    /// Appends the 2-dim lexicon score to every token.
    pub lexicon: bool,
}

impl Dims {
    pub fn input(&self) -> usize {
        self.d_ce + self.d_e + self.d_cc + if self.lexicon { 2 } else { 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.d_ce, self.d_e, self.d_cc, self.d_rec, self.d_h].contains(&0) {
            return Err(Error::invalid("network dimensions must all be at least 1"));
        }
        Ok(())
    }
}

/// Weights of one LSTM direction. Gate blocks are stacked in the order
/// input, forget, output, candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w: Mat,
    pub u: Mat,
    pub b: Mat,
}

impl LstmParams {
    fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams { w: Mat::zeros(4 * hidden, input), u: Mat::zeros(4 * hidden, hidden), b: Mat::zeros(4 * hidden, 1) }
    }

    fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut b = Mat::zeros(4 * hidden, 1);
        b.data[hidden..2 * hidden].iter_mut().for_each(|x| *x = 1.0);
        LstmParams { w: Mat::xavier(4 * hidden, input, rng), u: Mat::xavier(4 * hidden, hidden, rng), b }
    }
}

pub const NUM_LABELS: usize = 3;

/// Every trainable tensor. The fixed cross-lingual embeddings live outside,
/// in the feature resources, and never receive gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Updatable word embeddings; row 0 is UNK.
    pub emb_word: Mat,
    /// Cluster embeddings; row 0 is UNK, cluster `c` is row `c + 1`.
    pub emb_cluster: Mat,
    pub lstm_fwd: LstmParams,
    pub lstm_bwd: LstmParams,
    /// `d_h x (2 d_rec + d_i)`
    pub hidden: Mat,
    pub hidden_bias: Mat,
    /// `3 x d_h`
    pub output: Mat,
    pub output_bias: Mat,
}

pub const BLOCK_NAMES: [&str; 12] = [
    "emb_word",
    "emb_cluster",
    "lstm_fwd.w",
    "lstm_fwd.u",
    "lstm_fwd.b",
    "lstm_bwd.w",
    "lstm_bwd.u",
    "lstm_bwd.b",
    "hidden",
    "hidden_bias",
    "output",
    "output_bias",
];

impl ModelParams {
    pub fn zeros(dims: &Dims, word_rows: usize, cluster_rows: usize) -> Self {
        let di = dims.input();
        ModelParams {
            emb_word: Mat::zeros(word_rows, dims.d_e),
            emb_cluster: Mat::zeros(cluster_rows, dims.d_cc),
            lstm_fwd: LstmParams::zeros(di, dims.d_rec),
            lstm_bwd: LstmParams::zeros(di, dims.d_rec),
            hidden: Mat::zeros(dims.d_h, 2 * dims.d_rec + di),
            hidden_bias: Mat::zeros(dims.d_h, 1),
            output: Mat::zeros(NUM_LABELS, dims.d_h),
            output_bias: Mat::zeros(NUM_LABELS, 1),
        }
    }

    /// Embeddings uniform in (-0.1, 0.1), Xavier-uniform matrices, zero
    /// biases except the LSTM forget gates at 1.
    pub fn init(dims: &Dims, word_rows: usize, cluster_rows: usize, rng: &mut impl Rng) -> Self {
        let di = dims.input();
        ModelParams {
            emb_word: Mat::uniform(word_rows, dims.d_e, 0.1, rng),
            emb_cluster: Mat::uniform(cluster_rows, dims.d_cc, 0.1, rng),
            lstm_fwd: LstmParams::init(di, dims.d_rec, rng),
            lstm_bwd: LstmParams::init(di, dims.d_rec, rng),
            hidden: Mat::xavier(dims.d_h, 2 * dims.d_rec + di, rng),
            hidden_bias: Mat::zeros(dims.d_h, 1),
            output: Mat::xavier(NUM_LABELS, dims.d_h, rng),
            output_bias: Mat::zeros(NUM_LABELS, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.blocks_mut().into_iter().for_each(|m| m.data.iter_mut().for_each(|x| *x = 0.0));
        z
    }

    /// Blocks in [`BLOCK_NAMES`] order.
    pub fn blocks(&self) -> [&Mat; 12] {
        [
            &self.emb_word,
            &self.emb_cluster,
            &self.lstm_fwd.w,
            &self.lstm_fwd.u,
            &self.lstm_fwd.b,
            &self.lstm_bwd.w,
            &self.lstm_bwd.u,
            &self.lstm_bwd.b,
            &self.hidden,
            &self.hidden_bias,
            &self.output,
            &self.output_bias,
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut Mat; 12] {
        [
            &mut self.emb_word,
            &mut self.emb_cluster,
            &mut self.lstm_fwd.w,
            &mut self.lstm_fwd.u,
            &mut self.lstm_fwd.b,
            &mut self.lstm_bwd.w,
            &mut self.lstm_bwd.u,
            &mut self.lstm_bwd.b,
            &mut self.hidden,
            &mut self.hidden_bias,
            &mut self.output,
            &mut self.output_bias,
        ]
    }

    pub fn same_shape(&self, other: &ModelParams) -> bool {
        self.blocks().iter().zip(other.blocks()).all(|(a, b)| a.same_shape(b))
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|m| m.data.iter().all(|x| x.is_finite()))
    }

    pub fn scale(&mut self, factor: f64) {
        for m in self.blocks_mut() {
            m.data.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn norm(&self) -> f64 {
        self.blocks().iter().flat_map(|m| m.data.iter()).map(|x| x * x).sum::<f64>().sqrt()
    }
}
