//! Cross-lingual word representations.
//!
//! Monolingual corpora are code-switched through bilingual dictionaries so
//! that translations share contexts, a skip-gram model with negative
//! sampling is trained on the mixed text, and k-means over the resulting
//! vectors gives hard word clusters shared by all languages.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::align::Dictionary;
use crate::corpus::Sentence;
use crate::error::{read_to_string, write_string};
use crate::{rng, Error, Result};

pub const DEFAULT_SWAP_RATE: f64 = 0.3;
pub const DEFAULT_CLUSTERS: usize = 500;
pub const KMEANS_MAX_ITERATIONS: usize = 100;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeSwitchStats {
    pub tokens: usize,
    /// Positions drawn for swapping.
    pub selected: usize,
    /// Positions actually replaced by a translation.
    pub swapped: usize,
}

/// Replaces each token, independently with probability `rate`, by its
/// translation into a uniformly chosen other language for which a
/// dictionary from the token's language exists. Sentence and token counts
/// are preserved.
pub fn code_switch(
    corpora: &[Vec<Sentence>],
    dicts: &[Dictionary],
    rate: f64,
    seed: u64,
) -> Result<(Vec<Sentence>, CodeSwitchStats)> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("swap rate {rate} outside [0, 1]")));
    }
    let mut rng = rng::seeded(seed);
    let mut stats = CodeSwitchStats::default();
    let mut out = Vec::new();
    for sentence in corpora.iter().flatten() {
        let candidates: Vec<&Dictionary> =
            dicts.iter().filter(|d| d.pair.0 == sentence.language && d.pair.1 != sentence.language).collect();
        let mut tokens = Vec::with_capacity(sentence.len());
        for tok in &sentence.tokens {
            stats.tokens += 1;
            let draw: f64 = rng.gen();
            if draw < rate && !candidates.is_empty() {
                stats.selected += 1;
                let d = candidates[rng.gen_range(0..candidates.len())];
                if let Some(t) = d.translate(tok) {
                    stats.swapped += 1;
                    tokens.push(t.to_string());
                    continue;
                }
            }
            tokens.push(tok.clone());
        }
        out.push(Sentence { tokens, language: sentence.language.clone() });
    }
    Ok((out, stats))
}

/// Word vectors, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(words: Vec<String>, dim: usize, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if vectors.len() != words.len() * dim {
            return Err(Error::Shape(format!("{} values for {} words of dimension {dim}", vectors.len(), words.len())));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite embedding value"));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate embedding word `{w}`")));
            }
        }
        Ok(EmbeddingTable { words, index, dim, vectors })
    }

    /// A table with no words; every lookup falls back to the caller's UNK.
    pub fn empty(dim: usize) -> Self {
        EmbeddingTable { words: Vec::new(), index: HashMap::new(), dim: dim.max(1), vectors: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(if nx == 0.0 || ny == 0.0 { 0.0 } else { dot / (nx * ny) })
    }

    /// word2vec text format: `|V| d` header, then `word v1 ... vd`.
    pub fn to_word2vec_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in self.row(i) {
                out.push_str(&format!(" {v:?}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_word2vec_text())
    }

    pub fn parse_word2vec_text(contents: &str, path: &Path) -> Result<Self> {
        let mut lines = contents.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptyDataset)?;
        let hdr: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, 1, "bad header"))?;
        if hdr.len() != 2 {
            return Err(Error::parse(path, 1, "header must be `|V| d`"));
        }
        let (n, dim) = (hdr[0], hdr[1]);
        let mut words = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (i, line) in lines {
            let mut cols = line.split_whitespace();
            let w = cols.next().expect("non-blank line");
            let vals: Vec<f64> = cols
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(path, i + 1, "bad vector value"))?;
            if vals.len() != dim {
                return Err(Error::parse(path, i + 1, format!("expected {dim} values, found {}", vals.len())));
            }
            words.push(w.to_string());
            vectors.extend(vals);
        }
        if words.len() != n {
            return Err(Error::parse(path, 1, format!("header declares {n} words, found {}", words.len())));
        }
        EmbeddingTable::new(words, dim, vectors)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_word2vec_text(&read_to_string(path)?, path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    pub seed: u64,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            subsample: None,
            seed: 1,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Skip-gram with negative sampling. Vocabulary order is by descending
/// count, then word. Single-threaded and deterministic for a given seed.
pub fn train_sgns(corpus: &[Sentence], config: &SgnsConfig) -> Result<EmbeddingTable> {
    if config.dim == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in corpus {
        for t in &s.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= config.min_count.max(1)).collect();
    if vocab.is_empty() {
        return Err(Error::EmptyDataset);
    }
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (w, _))| (*w, i)).collect();
    let total: usize = vocab.iter().map(|(_, c)| c).sum();

    let sentences: Vec<Vec<usize>> =
        corpus.iter().map(|s| s.tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect()).collect();

    let dim = config.dim;
    let v = vocab.len();
    let mut rng = rng::seeded(config.seed);
    let mut input: Vec<f64> = (0..v * dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect();
    let mut output = vec![0.0; v * dim];
    let noise = WeightedIndex::new(vocab.iter().map(|&(_, c)| (c as f64).powf(0.75)))
        .map_err(|e| Error::invalid(format!("negative-sampling table: {e}")))?;

    let keep_prob: Vec<f64> = vocab
        .iter()
        .map(|&(_, c)| match config.subsample {
            Some(t) if t > 0.0 => {
                let f = c as f64 / total as f64;
                ((f / t).sqrt() + 1.0) * t / f
            }
            _ => 1.0,
        })
        .collect();

    let planned = (config.epochs * total) as f64 + 1.0;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];
    for _ in 0..config.epochs {
        for sent in &sentences {
            let kept: Vec<usize> =
                sent.iter().copied().filter(|&w| keep_prob[w] >= 1.0 || rng.gen::<f64>() < keep_prob[w]).collect();
            for (pos, &center) in kept.iter().enumerate() {
                processed += 1;
                let lr = config.learning_rate * (1.0 - processed as f64 / planned).max(1e-4);
                let reduce = rng.gen_range(0..config.window.max(1));
                let span = config.window.max(1) - reduce;
                let lo = pos.saturating_sub(span);
                let hi = (pos + span + 1).min(kept.len());
                for (cpos, &context) in kept.iter().enumerate().take(hi).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let vin = center * dim;
                    for k in 0..=config.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let vout = target * dim;
                        let dot: f64 = (0..dim).map(|d| input[vin + d] * output[vout + d]).sum();
                        let g = (label - sigmoid(dot)) * lr;
                        for d in 0..dim {
                            grad[d] += g * output[vout + d];
                            output[vout + d] += g * input[vin + d];
                        }
                    }
                    for d in 0..dim {
                        input[vin + d] += grad[d];
                    }
                }
            }
        }
    }
    EmbeddingTable::new(vocab.iter().map(|(w, _)| w.to_string()).collect(), dim, input)
}

/// Hard word-to-cluster assignment shared across languages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterMap {
    pub k: usize,
    assignment: BTreeMap<String, usize>,
}

impl ClusterMap {
    pub fn new(k: usize, assignment: BTreeMap<String, usize>) -> Result<Self> {
        if let Some((w, &c)) = assignment.iter().find(|(_, &c)| c >= k) {
            return Err(Error::invalid(format!("cluster id {c} of `{w}` outside [0, {k})")));
        }
        Ok(ClusterMap { k, assignment })
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.assignment.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignment.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// TSV `word<TAB>cluster_id`, sorted by word.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (w, c) in self.iter() {
            out.push_str(&format!("{w}\t{c}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }

    /// `k` is one more than the largest id in the file.
    pub fn parse_tsv(contents: &str, path: &Path) -> Result<Self> {
        let mut assignment = BTreeMap::new();
        for (i, line) in contents.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (w, c) =
                line.split_once('\t').ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>cluster_id"))?;
            let c: usize = c.trim().parse().map_err(|_| Error::parse(path, i + 1, "bad cluster id"))?;
            assignment.insert(w.to_string(), c);
        }
        let k = assignment.values().max().map_or(0, |m| m + 1);
        ClusterMap::new(k, assignment)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_tsv(&read_to_string(path)?, path)
    }
}

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances after each assignment step.
    pub objectives: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding.
pub fn kmeans(points: &[&[f64]], k: usize, max_iter: usize, seed: u64) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("cannot form {k} clusters from {n} points")));
    }
    let mut rng = rng::seeded(seed);
    let mut centroids: Vec<Vec<f64>> = vec![points[rng.gen_range(0..n)].to_vec()];
    let mut chosen = vec![false; n];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            // Round-off can land on a zero-distance point; fall back to the
            // farthest one.
            if d2[pick] == 0.0 {
                pick = (0..n).max_by(|&a, &b| d2[a].total_cmp(&d2[b]).then(b.cmp(&a))).expect("n > 0");
            }
            pick
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen[next] = true;
        let c = points[next].to_vec();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }

    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; n];
    let mut objectives = Vec::new();
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut changed = false;
        let mut obj = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (best, d) = centroids
                .iter()
                .enumerate()
                .map(|(c, cen)| (c, sq_dist(p, cen)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            obj += d;
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        objectives.push(obj);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut sizes = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignment) {
            sizes[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for c in 0..k {
            if sizes[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / sizes[c] as f64).collect();
            }
        }
    }
    Ok(KMeansResult { assignment, centroids, objectives, iterations })
}

/// Clusters every embedded word into one of `k` groups.
pub fn induce_clusters(emb: &EmbeddingTable, k: usize, seed: u64) -> Result<ClusterMap> {
    induce_clusters_traced(emb, k, seed).map(|(m, _)| m)
}

pub fn induce_clusters_traced(emb: &EmbeddingTable, k: usize, seed: u64) -> Result<(ClusterMap, KMeansResult)> {
    if k > emb.len() {
        return Err(Error::invalid(format!("{k} clusters requested for {} embedded words", emb.len())));
    }
    let points: Vec<&[f64]> = (0..emb.len()).map(|i| emb.row(i)).collect();
    let result = kmeans(&points, k, KMEANS_MAX_ITERATIONS, seed)?;
    let assignment = emb.words().iter().cloned().zip(result.assignment.iter().copied()).collect();
    Ok((ClusterMap::new(k, assignment)?, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(s: &str, lang: &str) -> Sentence {
        Sentence::new(s.split_whitespace().map(String::from).collect(), lang).unwrap()
    }

    fn full_dict(src: &str, tgt: &str, words: &[String]) -> Dictionary {
        Dictionary::from_counts(src, tgt, words.iter().map(|w| ((w.clone(), format!("{w}_{tgt}")), 1)))
    }

    #[test]
    fn zero_rate_is_identity() {
        let corpus = vec![vec![sent("a b c", "en")], vec![sent("x y", "fr")]];
        let d = full_dict("en", "fr", &["a".into(), "b".into(), "c".into()]);
        let (out, stats) = code_switch(&corpus, &[d], 0.0, 1).unwrap();
        assert_eq!(out, corpus.concat());
        assert_eq!(stats.swapped, 0);
    }

    #[test]
    fn full_rate_translates_everything() {
        let words: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let fr: Vec<String> = words.iter().map(|w| format!("{w}_fr")).collect();
        let corpus = vec![vec![sent("a b c", "en")], vec![sent("a_fr c_fr", "fr")]];
        let dicts = [
            full_dict("en", "fr", &words),
            Dictionary::from_counts("fr", "en", fr.iter().map(|w| ((w.clone(), w[..1].to_string()), 1))),
        ];
        let (out, stats) = code_switch(&corpus, &dicts, 1.0, 9).unwrap();
        assert_eq!(out[0].tokens, vec!["a_fr", "b_fr", "c_fr"]);
        assert_eq!(out[1].tokens, vec!["a", "c"]);
        assert_eq!(stats.swapped, stats.tokens);
    }

    #[test]
    fn bad_rate_rejected() {
        assert!(code_switch(&[], &[], 1.5, 0).is_err());
        assert!(code_switch(&[], &[], -0.1, 0).is_err());
    }

    #[test]
    fn half_rate_swaps_about_half() {
        let words: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let corpus: Vec<Sentence> = (0..1000)
            .map(|i| Sentence::new((0..10).map(|k| words[(i + k * 7) % 100].clone()).collect(), "en").unwrap())
            .collect();
        let d = full_dict("en", "fr", &words);
        let (out, stats) = code_switch(&[corpus.clone()], &[d.clone()], 0.5, 42).unwrap();
        assert_eq!(stats.tokens, 10_000);
        let frac = stats.swapped as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&frac), "{frac}");
        for (a, b) in corpus.iter().zip(&out) {
            assert_eq!(a.len(), b.len());
            for (x, y) in a.tokens.iter().zip(&b.tokens) {
                assert!(x == y || d.translate(x) == Some(y.as_str()));
            }
        }
    }

    fn cooccurrence_corpus() -> Vec<Sentence> {
        // a and b always appear together; c lives among different fillers.
        let mut out = Vec::new();
        for i in 0..300 {
            let f1 = format!("f{}", i % 10);
            let f2 = format!("g{}", i % 10);
            out.push(sent(&format!("{f1} a b {f1}"), "en"));
            out.push(sent(&format!("{f2} c {f2} h{}", i % 7), "en"));
        }
        out
    }

    #[test]
    fn sgns_places_cooccurring_words_close() {
        let cfg = SgnsConfig { dim: 16, epochs: 5, seed: 3, ..SgnsConfig::default() };
        let emb = train_sgns(&cooccurrence_corpus(), &cfg).unwrap();
        assert_eq!(emb.dim(), 16);
        assert_eq!(emb.vectors.len(), emb.len() * 16);
        let ab = emb.cosine("a", "b").unwrap();
        let ac = emb.cosine("a", "c").unwrap();
        assert!(ab > ac, "cos(a,b)={ab} cos(a,c)={ac}");
        assert!(emb.vectors.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sgns_is_deterministic_and_defaults() {
        assert_eq!(SgnsConfig::default().dim, 300);
        let cfg = SgnsConfig { dim: 8, epochs: 2, seed: 5, ..SgnsConfig::default() };
        let c = cooccurrence_corpus();
        assert_eq!(train_sgns(&c, &cfg).unwrap(), train_sgns(&c, &cfg).unwrap());
        assert!(train_sgns(&[], &cfg).is_err());
    }

    #[test]
    fn word2vec_roundtrip() {
        let cfg = SgnsConfig { dim: 4, epochs: 1, ..SgnsConfig::default() };
        let emb = train_sgns(&cooccurrence_corpus(), &cfg).unwrap();
        let back = EmbeddingTable::parse_word2vec_text(&emb.to_word2vec_text(), Path::new("e")).unwrap();
        assert_eq!(back, emb);
        assert!(EmbeddingTable::parse_word2vec_text("2 3\na 1 2 3\n", Path::new("e")).is_err());
    }

    fn two_clouds() -> EmbeddingTable {
        let mut words = Vec::new();
        let mut vecs = Vec::new();
        let mut r = rng::seeded(11);
        for i in 0..40 {
            let center = if i < 20 { -5.0 } else { 5.0 };
            words.push(format!("p{i}"));
            vecs.push(center + r.gen::<f64>() - 0.5);
            vecs.push(center + r.gen::<f64>() - 0.5);
        }
        EmbeddingTable::new(words, 2, vecs).unwrap()
    }

    #[test]
    fn clusters_separate_clouds() {
        let emb = two_clouds();
        let m = induce_clusters(&emb, 2, 4).unwrap();
        let left = m.get("p0").unwrap();
        for i in 0..40 {
            let c = m.get(&format!("p{i}")).unwrap();
            assert_eq!(c == left, i < 20);
        }
        assert_eq!(DEFAULT_CLUSTERS, 500);
    }

    #[test]
    fn one_cluster_per_word() {
        let emb = two_clouds();
        let (m, res) = induce_clusters_traced(&emb, 40, 1).unwrap();
        assert_eq!(*res.objectives.last().unwrap(), 0.0);
        let ids: std::collections::BTreeSet<usize> = m.iter().map(|(_, c)| c).collect();
        assert_eq!(ids.len(), 40);
        assert!(induce_clusters(&emb, 41, 1).is_err());
    }

    #[test]
    fn kmeans_objective_non_increasing() {
        let emb =
            train_sgns(&cooccurrence_corpus(), &SgnsConfig { dim: 6, epochs: 1, ..SgnsConfig::default() }).unwrap();
        for seed in 0..5 {
            let (_, res) = induce_clusters_traced(&emb, 5, seed).unwrap();
            for w in res.objectives.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
        }
    }

    #[test]
    fn cluster_tsv_roundtrip() {
        let m = induce_clusters(&two_clouds(), 3, 0).unwrap();
        let back = ClusterMap::parse_tsv(&m.to_tsv(), Path::new("c")).unwrap();
        assert_eq!(back.iter().collect::<Vec<_>>(), m.iter().collect::<Vec<_>>());
    }
}
