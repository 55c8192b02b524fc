//! Word alignment and translation dictionaries.
//!
//! IBM Model 1 is trained by EM in both directions, each sentence pair is
//! Viterbi-aligned in both directions, the two link sets are intersected,
//! and the dictionary keeps the most frequent intersected translation of
//! every source word.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use crate::corpus::Bitext;
use crate::error::{read_to_string, write_string};
use crate::{Error, Result};

/// Source-side token that absorbs target words with no counterpart.
pub const NULL_TOKEN: &str = "<null>";

pub const DEFAULT_EM_ITERATIONS: usize = 5;

const ROW_TOLERANCE: f64 = 1e-6;

/// Sparse `t(target | source)`; each source row is sorted by target id.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationTable {
    pub direction: (String, String),
    src_vocab: Vec<String>,
    tgt_vocab: Vec<String>,
    src_index: HashMap<String, u32>,
    tgt_index: HashMap<String, u32>,
    rows: Vec<Vec<(u32, f64)>>,
}

fn index_of(vocab: &[String]) -> HashMap<String, u32> {
    vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect()
}

impl TranslationTable {
    fn row_get(row: &[(u32, f64)], tgt: u32) -> Option<usize> {
        row.binary_search_by_key(&tgt, |&(t, _)| t).ok()
    }

    /// `t(tgt | src)`; zero for unseen pairs. Pass [`NULL_TOKEN`] as `src` for
    /// the NULL row.
    pub fn prob(&self, src: &str, tgt: &str) -> f64 {
        match (self.src_index.get(src), self.tgt_index.get(tgt)) {
            (Some(&s), Some(&t)) => self.prob_ids(s, t),
            _ => 0.0,
        }
    }

    fn prob_ids(&self, s: u32, t: u32) -> f64 {
        let row = &self.rows[s as usize];
        Self::row_get(row, t).map_or(0.0, |k| row[k].1)
    }

    /// Iterates `(target, probability)` over the row of `src`.
    pub fn row(&self, src: &str) -> Vec<(&str, f64)> {
        self.src_index.get(src).map_or_else(Vec::new, |&s| {
            self.rows[s as usize].iter().map(|&(t, p)| (self.tgt_vocab[t as usize].as_str(), p)).collect()
        })
    }

    pub fn source_words(&self) -> impl Iterator<Item = &str> {
        self.src_vocab.iter().map(String::as_str)
    }

    /// Largest deviation of any row sum from 1.
    pub fn max_row_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn is_row_stochastic(&self) -> bool {
        self.max_row_deviation() <= ROW_TOLERANCE && self.rows.iter().flatten().all(|&(_, p)| p >= 0.0)
    }

    /// TSV `src<TAB>tgt<TAB>prob`, sorted by source then target.
    pub fn to_tsv(&self) -> String {
        let mut lines = Vec::new();
        for (s, row) in self.rows.iter().enumerate() {
            for &(t, p) in row {
                lines.push((&self.src_vocab[s], &self.tgt_vocab[t as usize], p));
            }
        }
        lines.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::new();
        for (s, t, p) in lines {
            out.push_str(&format!("{s}\t{t}\t{p:?}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }

    pub fn parse_tsv(contents: &str, path: &Path, direction: (String, String)) -> Result<Self> {
        let mut entries: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (i, line) in contents.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::parse(path, i + 1, "expected src<TAB>tgt<TAB>prob"));
            }
            let p: f64 = cols[2].parse().map_err(|_| Error::parse(path, i + 1, "bad probability"))?;
            if !(0.0..=1.0 + ROW_TOLERANCE).contains(&p) {
                return Err(Error::parse(path, i + 1, "probability out of range"));
            }
            entries.insert((cols[0].to_string(), cols[1].to_string()), p);
        }
        let mut src: BTreeSet<&str> = entries.keys().map(|(s, _)| s.as_str()).collect();
        src.remove(NULL_TOKEN);
        let tgt: BTreeSet<&str> = entries.keys().map(|(_, t)| t.as_str()).collect();
        let src_vocab: Vec<String> = std::iter::once(NULL_TOKEN).chain(src).map(str::to_string).collect();
        let tgt_vocab: Vec<String> = tgt.into_iter().map(str::to_string).collect();
        let src_index = index_of(&src_vocab);
        let tgt_index = index_of(&tgt_vocab);
        let mut rows = vec![Vec::new(); src_vocab.len()];
        for ((s, t), p) in &entries {
            rows[src_index[s] as usize].push((tgt_index[t], *p));
        }
        for r in &mut rows {
            r.sort_by_key(|&(t, _)| t);
        }
        Ok(TranslationTable { direction, src_vocab, tgt_vocab, src_index, tgt_index, rows })
    }

    pub fn load(path: &Path, direction: (String, String)) -> Result<Self> {
        Self::parse_tsv(&read_to_string(path)?, path, direction)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Ibm1Options {
    pub iterations: usize,
    /// Worker threads for the E-step. Chunk results are reduced in a fixed
    /// order, so a given thread count is always reproducible.
    pub threads: usize,
}

impl Default for Ibm1Options {
    fn default() -> Self {
        Ibm1Options { iterations: DEFAULT_EM_ITERATIONS, threads: 1 }
    }
}

/// Per-iteration training statistics.
#[derive(Clone, Debug, Default)]
pub struct EmTrace {
    /// Corpus log-likelihood under the parameters at the start of each
    /// iteration, followed by the value under the final parameters.
    pub log_likelihoods: Vec<f64>,
    /// Maximum row-sum deviation after each M-step.
    pub row_deviations: Vec<f64>,
}

struct Encoded {
    /// Source ids with NULL (id 0) at position 0.
    src: Vec<u32>,
    tgt: Vec<u32>,
}

fn encode(bitext: &Bitext) -> (Vec<String>, Vec<String>, Vec<Encoded>) {
    let mut src: BTreeSet<&str> = BTreeSet::new();
    let mut tgt: BTreeSet<&str> = BTreeSet::new();
    for (s, t) in bitext {
        src.extend(s.iter().map(String::as_str));
        tgt.extend(t.iter().map(String::as_str));
    }
    src.remove(NULL_TOKEN);
    let src_vocab: Vec<String> = std::iter::once(NULL_TOKEN).chain(src).map(str::to_string).collect();
    let tgt_vocab: Vec<String> = tgt.into_iter().map(str::to_string).collect();
    let si = index_of(&src_vocab);
    let ti = index_of(&tgt_vocab);
    let pairs = bitext
        .iter()
        .map(|(s, t)| Encoded {
            src: std::iter::once(0).chain(s.iter().map(|w| si[w])).collect(),
            tgt: t.iter().map(|w| ti[w]).collect(),
        })
        .collect();
    (src_vocab, tgt_vocab, pairs)
}

fn e_step(table: &TranslationTable, pairs: &[Encoded]) -> (Vec<Vec<f64>>, f64) {
    let mut counts: Vec<Vec<f64>> = table.rows.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut ll = 0.0;
    let mut probs = Vec::new();
    for pair in pairs {
        let norm = pair.src.len() as f64;
        for &f in &pair.tgt {
            probs.clear();
            probs.extend(pair.src.iter().map(|&e| table.prob_ids(e, f)));
            let denom: f64 = probs.iter().sum();
            ll += (denom / norm).ln();
            for (&e, &p) in pair.src.iter().zip(&probs) {
                let row = &table.rows[e as usize];
                let k = TranslationTable::row_get(row, f).expect("co-occurring pair in table");
                counts[e as usize][k] += p / denom;
            }
        }
    }
    (counts, ll)
}

fn e_step_threaded(table: &TranslationTable, pairs: &[Encoded], threads: usize) -> (Vec<Vec<f64>>, f64) {
    if threads <= 1 || pairs.len() < 2 * threads {
        return e_step(table, pairs);
    }
    let chunk = pairs.len().div_ceil(threads);
    let partials: Vec<(Vec<Vec<f64>>, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = pairs.chunks(chunk).map(|c| s.spawn(move || e_step(table, c))).collect();
        handles.into_iter().map(|h| h.join().expect("E-step worker panicked")).collect()
    });
    let mut it = partials.into_iter();
    let (mut counts, mut ll) = it.next().expect("at least one chunk");
    for (c, l) in it {
        ll += l;
        for (row, add) in counts.iter_mut().zip(c) {
            for (x, y) in row.iter_mut().zip(add) {
                *x += y;
            }
        }
    }
    (counts, ll)
}

/// Corpus log-likelihood `sum_j ln( sum_i t(f_j | e_i) / (l + 1) )`, with the
/// NULL word among the `l + 1` source positions.
pub fn log_likelihood(table: &TranslationTable, bitext: &Bitext) -> f64 {
    let mut ll = 0.0;
    for (s, t) in bitext {
        let norm = (s.len() + 1) as f64;
        for f in t {
            let p = table.prob(NULL_TOKEN, f) + s.iter().map(|e| table.prob(e, f)).sum::<f64>();
            ll += (p / norm).ln();
        }
    }
    ll
}

/// Trains `t(target | source)` with IBM Model 1 EM.
pub fn train_ibm1(bitext: &Bitext, direction: (&str, &str), iterations: usize) -> Result<TranslationTable> {
    train_ibm1_traced(bitext, direction, Ibm1Options { iterations, threads: 1 }).map(|(t, _)| t)
}

pub fn train_ibm1_traced(
    bitext: &Bitext,
    direction: (&str, &str),
    opts: Ibm1Options,
) -> Result<(TranslationTable, EmTrace)> {
    if bitext.is_empty() || bitext.iter().all(|(_, t)| t.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    if opts.iterations == 0 {
        return Err(Error::invalid("EM needs at least one iteration"));
    }
    let (src_vocab, tgt_vocab, pairs) = encode(bitext);

    // Uniform over co-occurring targets.
    let mut cooc: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); src_vocab.len()];
    for p in &pairs {
        for &e in &p.src {
            cooc[e as usize].extend(p.tgt.iter().copied());
        }
    }
    let rows: Vec<Vec<(u32, f64)>> = cooc
        .into_iter()
        .map(|set| {
            let u = 1.0 / set.len().max(1) as f64;
            set.into_iter().map(|t| (t, u)).collect()
        })
        .collect();
    let mut table = TranslationTable {
        direction: (direction.0.to_string(), direction.1.to_string()),
        src_index: index_of(&src_vocab),
        tgt_index: index_of(&tgt_vocab),
        src_vocab,
        tgt_vocab,
        rows,
    };

    let mut trace = EmTrace::default();
    for _ in 0..opts.iterations {
        let (counts, ll) = e_step_threaded(&table, &pairs, opts.threads);
        trace.log_likelihoods.push(ll);
        for (row, c) in table.rows.iter_mut().zip(counts) {
            let total: f64 = c.iter().sum();
            if total > 0.0 {
                for (entry, x) in row.iter_mut().zip(c) {
                    entry.1 = x / total;
                }
            }
        }
        trace.row_deviations.push(table.max_row_deviation());
    }
    trace.log_likelihoods.push(e_step(&table, &pairs).1);
    Ok((table, trace))
}

/// Word links `(source index, target index)` for one sentence pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    pub links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn from_links(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Alignment { links: links.into_iter().collect() }
    }

    pub fn transposed(&self) -> Self {
        Alignment::from_links(self.links.iter().map(|&(a, b)| (b, a)))
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }
}

/// Links every target word to its most probable source word. A target word
/// whose best candidate is NULL stays unlinked. Ties among source words go
/// to the lowest index; NULL must be strictly better than every word to win.
pub fn viterbi_align(table: &TranslationTable, src: &[String], tgt: &[String]) -> Alignment {
    let mut links = BTreeSet::new();
    for (j, f) in tgt.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in src.iter().enumerate() {
            let p = table.prob(e, f);
            if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        if let Some((i, p)) = best {
            if p >= table.prob(NULL_TOKEN, f) {
                links.insert((i, j));
            }
        }
    }
    Alignment { links }
}

/// Set intersection; both alignments must be in source-target order.
pub fn intersect(forward: &Alignment, backward: &Alignment) -> Alignment {
    Alignment { links: forward.links.intersection(&backward.links).copied().collect() }
}

/// Intersected alignment of one pair from a forward (`t(tgt|src)`) and a
/// backward (`t(src|tgt)`) table.
pub fn intersected_alignment(
    fwd: &TranslationTable,
    bwd: &TranslationTable,
    src: &[String],
    tgt: &[String],
) -> Alignment {
    let f = viterbi_align(fwd, src, tgt);
    let b = viterbi_align(bwd, tgt, src).transposed();
    intersect(&f, &b)
}

/// A function from source words to their single most frequent translation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dictionary {
    pub pair: (String, String),
    entries: BTreeMap<String, (String, u64)>,
}

impl Dictionary {
    pub fn new(src: &str, tgt: &str) -> Self {
        Dictionary { pair: (src.to_string(), tgt.to_string()), entries: BTreeMap::new() }
    }

    /// Keeps, per source word, the highest-count target; ties go to the
    /// lexicographically smallest target.
    pub fn from_counts(src: &str, tgt: &str, counts: impl IntoIterator<Item = ((String, String), u64)>) -> Self {
        let mut d = Dictionary::new(src, tgt);
        for ((s, t), c) in counts {
            d.offer(s, t, c);
        }
        d
    }

    fn offer(&mut self, src: String, tgt: String, count: u64) {
        if count == 0 {
            return;
        }
        match self.entries.get_mut(&src) {
            Some(cur) => {
                if count > cur.1 || (count == cur.1 && tgt < cur.0) {
                    *cur = (tgt, count);
                }
            }
            None => {
                self.entries.insert(src, (tgt, count));
            }
        }
    }

    pub fn translate(&self, word: &str) -> Option<&str> {
        self.entries.get(word).map(|(t, _)| t.as_str())
    }

    pub fn get(&self, word: &str) -> Option<(&str, u64)> {
        self.entries.get(word).map(|(t, c)| (t.as_str(), *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.entries.iter().map(|(s, (t, c))| (s.as_str(), t.as_str(), *c))
    }

    /// TSV `src<TAB>tgt<TAB>count`, sorted by source word.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (s, t, c) in self.iter() {
            out.push_str(&format!("{s}\t{t}\t{c}\n"));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_tsv())
    }

    /// Parses `src<TAB>tgt[<TAB>count]` lines (count defaults to 1).
    pub fn parse_tsv(contents: &str, path: &Path, src: &str, tgt: &str) -> Result<Self> {
        let mut d = Dictionary::new(src, tgt);
        for (i, line) in contents.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let count = match cols.len() {
                2 => 1,
                3 => cols[2]
                    .trim()
                    .parse::<u64>()
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| Error::parse(path, i + 1, "bad count"))?,
                _ => return Err(Error::parse(path, i + 1, "expected src<TAB>tgt[<TAB>count]")),
            };
            let (s, t) = (cols[0].trim(), cols[1].trim());
            if s.is_empty() || t.is_empty() {
                return Err(Error::parse(path, i + 1, "empty word"));
            }
            d.offer(s.to_string(), t.to_string(), count);
        }
        Ok(d)
    }

    /// Composes `self: a -> b` with `other: b -> c` into `a -> c`.
    pub fn compose(&self, other: &Dictionary) -> Dictionary {
        let mut d = Dictionary::new(&self.pair.0, &other.pair.1);
        for (s, t, c) in self.iter() {
            if let Some((u, c2)) = other.get(t) {
                d.offer(s.to_string(), u.to_string(), c.min(c2));
            }
        }
        d
    }
}

pub fn load_manual_dictionary(path: &Path, src: &str, tgt: &str) -> Result<Dictionary> {
    Dictionary::parse_tsv(&read_to_string(path)?, path, src, tgt)
}

/// Counts intersected-alignment links over the bitext and keeps the most
/// frequent translation per source word.
pub fn extract_dictionary(bitext: &Bitext, fwd: &TranslationTable, bwd: &TranslationTable) -> Dictionary {
    let mut counts: HashMap<(String, String), u64> = HashMap::new();
    for (s, t) in bitext {
        for (i, j) in intersected_alignment(fwd, bwd, s, t).links {
            *counts.entry((s[i].clone(), t[j].clone())).or_insert(0) += 1;
        }
    }
    Dictionary::from_counts(&fwd.direction.0, &fwd.direction.1, counts)
}

/// Trains both directions and extracts the `src -> tgt` dictionary.
pub fn induce_dictionary(bitext: &Bitext, direction: (&str, &str), opts: Ibm1Options) -> Result<Dictionary> {
    let reversed: Bitext = bitext.iter().map(|(s, t)| (t.clone(), s.clone())).collect();
    let (fwd, _) = train_ibm1_traced(bitext, direction, opts)?;
    let (bwd, _) = train_ibm1_traced(&reversed, (direction.1, direction.0), opts)?;
    Ok(extract_dictionary(bitext, &fwd, &bwd))
}
