//! Metrics, hyperparameter profiles, synthetic corpora and reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Deserialize;

use crate::align::Dictionary;
use crate::corpus::{
    split_dataset, LabeledDataset, LabeledExample, ParallelCorpus, Sentence, SentimentLabel, TaggedCorpus,
};
use crate::error::{read_to_string, write_string};
use crate::lexicon::SenseLexicon;
use crate::nnsent::{AdamConfig, Dims, TrainConfig};
use crate::{rng, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub f1: [f64; 3],
    /// `confusion[gold][pred]`.
    pub confusion: [[usize; 3]; 3],
}

fn check_lengths(pred: &[SentimentLabel], gold: &[SentimentLabel]) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::invalid(format!("{} predictions for {} gold labels", pred.len(), gold.len())));
    }
    if gold.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

pub fn accuracy(pred: &[SentimentLabel], gold: &[SentimentLabel]) -> Result<f64> {
    check_lengths(pred, gold)?;
    let hit = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(hit as f64 / gold.len() as f64)
}

pub fn macro_f1(pred: &[SentimentLabel], gold: &[SentimentLabel]) -> Result<f64> {
    Metrics::compute(pred, gold).map(|m| m.macro_f1)
}

impl Metrics {
    pub fn compute(pred: &[SentimentLabel], gold: &[SentimentLabel]) -> Result<Self> {
        check_lengths(pred, gold)?;
        let mut confusion = [[0usize; 3]; 3];
        for (p, g) in pred.iter().zip(gold) {
            confusion[g.code()][p.code()] += 1;
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut precision = [0.0; 3];
        let mut recall = [0.0; 3];
        let mut f1 = [0.0; 3];
        for k in 0..3 {
            let tp = confusion[k][k];
            let predicted: usize = (0..3).map(|g| confusion[g][k]).sum();
            let actual: usize = confusion[k].iter().sum();
            precision[k] = ratio(tp, predicted);
            recall[k] = ratio(tp, actual);
            let s = precision[k] + recall[k];
            f1[k] = if s == 0.0 { 0.0 } else { 2.0 * precision[k] * recall[k] / s };
        }
        let hit: usize = (0..3).map(|k| confusion[k][k]).sum();
        Ok(Metrics {
            accuracy: hit as f64 / gold.len() as f64,
            macro_f1: f1.iter().sum::<f64>() / 3.0,
            precision,
            recall,
            f1,
            confusion,
        })
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

/// Named metrics plus free-form key/value lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub title: String,
    pub metrics: Metrics,
    pub extra: Vec<(String, String)>,
}

impl Report {
    pub fn new(title: impl Into<String>, metrics: Metrics) -> Self {
        Report { title: title.into(), metrics, extra: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    /// `key<TAB>value` rows.
    pub fn to_tsv(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "accuracy\t{:.6}", m.accuracy);
        let _ = writeln!(out, "macro_f1\t{:.6}", m.macro_f1);
        for label in SentimentLabel::ALL {
            let k = label.code();
            let _ = writeln!(out, "precision.{label}\t{:.6}", m.precision[k]);
            let _ = writeln!(out, "recall.{label}\t{:.6}", m.recall[k]);
            let _ = writeln!(out, "f1.{label}\t{:.6}", m.f1[k]);
        }
        for g in SentimentLabel::ALL {
            for p in SentimentLabel::ALL {
                let _ = writeln!(out, "confusion.{g}.{p}\t{}", m.confusion[g.code()][p.code()]);
            }
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "{k}\t{v}");
        }
        out
    }

    pub fn summary(&self) -> String {
        let m = &self.metrics;
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.title);
        let _ = writeln!(out, "examples   {}", m.total());
        let _ = writeln!(out, "accuracy   {:.4}", m.accuracy);
        let _ = writeln!(out, "macro-F1   {:.4}", m.macro_f1);
        let _ = writeln!(out, "gold \\ pred  positive  negative   neutral");
        for g in SentimentLabel::ALL {
            let row = m.confusion[g.code()];
            let _ = writeln!(out, "{:<11} {:>9} {:>9} {:>9}", g.name(), row[0], row[1], row[2]);
        }
        for (k, v) in &self.extra {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    /// Writes the TSV followed by the summary block, each summary line
    /// prefixed with `#`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_tsv();
        for line in self.summary().lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        write_string(path, &text)
    }
}

/// `index<TAB>label`, zero-based.
pub fn predictions_to_tsv(labels: &[SentimentLabel]) -> String {
    labels.iter().enumerate().map(|(i, l)| format!("{i}\t{l}\n")).collect()
}

pub fn save_predictions(labels: &[SentimentLabel], path: &Path) -> Result<()> {
    write_string(path, &predictions_to_tsv(labels))
}

pub fn load_predictions(path: &Path) -> Result<Vec<SentimentLabel>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (idx, label) =
            line.split_once('\t').ok_or_else(|| Error::parse(path, i + 1, "expected index<TAB>label"))?;
        if idx.trim().parse::<usize>().ok() != Some(out.len()) {
            return Err(Error::parse(path, i + 1, "indices must run 0, 1, 2, ..."));
        }
        out.push(label.trim().parse().map_err(|_| Error::parse(path, i + 1, "unknown label"))?);
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

/// Defaults for one experiment scale.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperProfile {
    pub name: &'static str,
    pub dims: Dims,
    pub batch_size: usize,
    pub epochs_single: usize,
    pub epochs_multi: usize,
    pub lr: f64,
    pub delta: f64,
    pub clusters: usize,
    pub swap_rate: f64,
    pub em_iterations: usize,
    pub tagger_epochs: usize,
    pub kl_smoothing: f64,
}

impl HyperProfile {
    pub fn train_config(&self, multi_source: bool, seed: u64) -> TrainConfig {
        TrainConfig {
            dims: self.dims,
            epochs: if multi_source { self.epochs_multi } else { self.epochs_single },
            batch_size: self.batch_size,
            adam: AdamConfig { lr: self.lr, ..AdamConfig::default() },
            seed,
            clip: None,
        }
    }
}

/// The full-scale and desk-scale profiles, in that order.
pub fn default_hyperparameters() -> (HyperProfile, HyperProfile) {
    let full = HyperProfile {
        name: "full",
        dims: Dims { d_ce: 300, d_e: 400, d_cc: 50, d_rec: 400, d_h: 400, lexicon: false },
        batch_size: 10_000,
        epochs_single: 7,
        epochs_multi: 2,
        lr: 1e-3,
        delta: 0.1,
        clusters: 500,
        swap_rate: 0.3,
        em_iterations: 5,
        tagger_epochs: 5,
        kl_smoothing: 0.1,
    };
    let desk = HyperProfile {
        name: "desk",
        dims: Dims { d_ce: 16, d_e: 16, d_cc: 8, d_rec: 16, d_h: 16, lexicon: false },
        batch_size: 32,
        epochs_single: 30,
        epochs_multi: 30,
        lr: 5e-3,
        clusters: 50,
        ..full.clone()
    };
    (full, desk)
}

pub fn profile(name: &str) -> Result<HyperProfile> {
    let (full, desk) = default_hyperparameters();
    match name {
        "full" => Ok(full),
        "desk" => Ok(desk),
        other => Err(Error::Config(format!("unknown profile `{other}` (expected full or desk)"))),
    }
}

/// The `[hyper]` configuration section. Every field overrides the profile.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HyperConfig {
    pub profile: Option<String>,
    pub d_ce: Option<usize>,
    pub d_e: Option<usize>,
    pub d_cc: Option<usize>,
    pub d_rec: Option<usize>,
    pub d_h: Option<usize>,
    pub lexicon_feature: Option<bool>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub epochs_multi: Option<usize>,
    pub lr: Option<f64>,
    pub delta: Option<f64>,
    pub clusters: Option<usize>,
    pub swap_rate: Option<f64>,
    pub em_iterations: Option<usize>,
    pub tagger_epochs: Option<usize>,
    pub kl_smoothing: Option<f64>,
    pub nbsvm_epochs: Option<usize>,
    pub nbsvm_lr: Option<f64>,
    pub nbsvm_alpha: Option<f64>,
    pub nbsvm_l2: Option<f64>,
    pub nbsvm_bigrams: Option<bool>,
}

impl HyperConfig {
    pub fn resolve(&self) -> Result<HyperProfile> {
        let mut p = profile(self.profile.as_deref().unwrap_or("desk"))?;
        let d = &mut p.dims;
        macro_rules! set {
            ($($dst:expr => $src:ident),*) => { $( if let Some(v) = self.$src { $dst = v; } )* };
        }
        set!(d.d_ce => d_ce, d.d_e => d_e, d.d_cc => d_cc, d.d_rec => d_rec, d.d_h => d_h, d.lexicon => lexicon_feature);
        set!(p.batch_size => batch_size, p.epochs_single => epochs, p.epochs_multi => epochs_multi, p.lr => lr,
             p.delta => delta, p.clusters => clusters, p.swap_rate => swap_rate, p.em_iterations => em_iterations,
             p.tagger_epochs => tagger_epochs, p.kl_smoothing => kl_smoothing);
        p.dims.validate()?;
        Ok(p)
    }

    pub fn nbsvm(&self, seed: u64) -> crate::nbsvm::NbSvmConfig {
        let d = crate::nbsvm::NbSvmConfig::default();
        crate::nbsvm::NbSvmConfig {
            alpha: self.nbsvm_alpha.unwrap_or(d.alpha),
            l2: self.nbsvm_l2.unwrap_or(d.l2),
            epochs: self.nbsvm_epochs.unwrap_or(d.epochs),
            lr: self.nbsvm_lr.unwrap_or(d.lr),
            seed,
            bigrams: self.nbsvm_bigrams.unwrap_or(d.bigrams),
        }
    }
}

const TAGS: [&str; 5] = ["DET", "NOUN", "VERB", "ADJ", "ADV"];

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub languages: Vec<String>,
    /// Latent vocabulary size, keywords included.
    pub vocab_size: usize,
    /// Sentiment keywords per polarity.
    pub keywords: usize,
    /// Labeled examples per language before splitting.
    pub labeled_size: usize,
    pub parallel_size: usize,
    pub tagged_size: usize,
    /// Explicit latent-to-surface maps, one per language; generated when absent.
    pub ciphers: Option<Vec<BTreeMap<String, String>>>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            languages: vec!["aa".into(), "bb".into(), "cc".into()],
            vocab_size: 200,
            keywords: 10,
            labeled_size: 750,
            parallel_size: 500,
            tagged_size: 300,
            ciphers: None,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticWorld {
    pub spec: SyntheticSpec,
    /// Latent word and its tag.
    pub latent: Vec<(String, &'static str)>,
    pub positive_keywords: Vec<String>,
    pub negative_keywords: Vec<String>,
    pub ciphers: Vec<BTreeMap<String, String>>,
    pub labeled: Vec<LabeledDataset>,
    pub parallel: ParallelCorpus,
    pub parallel_labels: Vec<SentimentLabel>,
    /// Gold dictionaries for every ordered language pair.
    pub dictionaries: BTreeMap<(String, String), Dictionary>,
    pub tagged: Vec<TaggedCorpus>,
    /// Sense lexicon in the first language.
    pub lexicon: SenseLexicon,
}

/// Checks that a cipher is a bijection from `domain`.
pub fn validate_cipher(domain: &[String], cipher: &BTreeMap<String, String>) -> Result<()> {
    if domain.iter().any(|w| !cipher.contains_key(w)) || cipher.len() != domain.len() {
        return Err(Error::invalid("cipher does not cover exactly the latent vocabulary"));
    }
    let image: BTreeSet<&String> = cipher.values().collect();
    if image.len() != cipher.len() {
        return Err(Error::invalid("cipher is not bijective"));
    }
    if cipher.values().any(|w| w.is_empty() || w.chars().any(char::is_whitespace)) {
        return Err(Error::invalid("cipher produces an empty or spaced word"));
    }
    Ok(())
}

fn random_cipher(domain: &[String], lang_index: usize, seed: u64) -> BTreeMap<String, String> {
    const CONSONANTS: [&str; 4] = ["bdfgklmnprstvz", "chjklmnpqrstwx", "bcdfghmnprstvy", "dgjklmnprstvwz"];
    const VOWELS: [&str; 4] = ["aeiou", "aeiouy", "aeio", "aiou"];
    let cons: Vec<char> = CONSONANTS[lang_index % 4].chars().collect();
    let vows: Vec<char> = VOWELS[lang_index % 4].chars().collect();
    let mut r = rng::stream(seed, &format!("cipher-{lang_index}"));
    let mut used = BTreeSet::new();
    let mut map = BTreeMap::new();
    for w in domain {
        loop {
            let syllables = r.gen_range(2..=3);
            let mut word = String::new();
            for _ in 0..syllables {
                word.push(cons[r.gen_range(0..cons.len())]);
                word.push(vows[r.gen_range(0..vows.len())]);
            }
            if lang_index >= 4 {
                word.push_str(&lang_index.to_string());
            }
            if used.insert(word.clone()) {
                map.insert(w.clone(), word);
                break;
            }
        }
    }
    map
}

struct Latent {
    by_tag: BTreeMap<&'static str, Vec<String>>,
    positive: Vec<String>,
    negative: Vec<String>,
}

impl Latent {
    fn pick<'a>(&'a self, r: &mut rng::Rng, tag: &str) -> &'a str {
        let v = &self.by_tag[tag];
        &v[r.gen_range(0..v.len())]
    }

    /// One latent sentence with its tags.
    fn sentence(&self, r: &mut rng::Rng, label: SentimentLabel) -> (Vec<String>, Vec<&'static str>) {
        let mut tags: Vec<&'static str> = Vec::new();
        let np = |r: &mut rng::Rng, tags: &mut Vec<&'static str>| {
            tags.push("DET");
            if r.gen_bool(0.4) {
                tags.push("ADJ");
            }
            tags.push("NOUN");
        };
        np(r, &mut tags);
        tags.push("VERB");
        if r.gen_bool(0.7) {
            np(r, &mut tags);
        }
        if r.gen_bool(0.3) {
            tags.push("ADV");
        }
        let adj_slots: Vec<usize> = (0..tags.len()).filter(|&i| tags[i] == "ADJ").collect();
        let keyword_slot = match label {
            SentimentLabel::Neutral => None,
            _ if adj_slots.is_empty() => {
                tags.insert(1, "ADJ");
                Some(1)
            }
            _ => Some(adj_slots[r.gen_range(0..adj_slots.len())]),
        };
        let words = tags
            .iter()
            .enumerate()
            .map(|(i, tag)| {
                if Some(i) == keyword_slot {
                    let pool = if label == SentimentLabel::Positive { &self.positive } else { &self.negative };
                    pool[r.gen_range(0..pool.len())].clone()
                } else {
                    self.pick(r, tag).to_string()
                }
            })
            .collect();
        (words, tags)
    }

    fn labeled(&self, r: &mut rng::Rng, n: usize) -> Vec<(Vec<String>, Vec<&'static str>, SentimentLabel)> {
        let mut labels: Vec<SentimentLabel> = (0..n).map(|i| SentimentLabel::ALL[i % 3]).collect();
        labels.shuffle(r);
        labels
            .into_iter()
            .map(|l| {
                let (w, t) = self.sentence(r, l);
                (w, t, l)
            })
            .collect()
    }
}

fn render(cipher: &BTreeMap<String, String>, words: &[String], lang: &str) -> Sentence {
    Sentence { tokens: words.iter().map(|w| cipher[w].clone()).collect(), language: lang.to_string() }
}

pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<SyntheticWorld> {
    if spec.languages.is_empty() {
        return Err(Error::invalid("synthetic spec needs at least one language"));
    }
    if BTreeSet::from_iter(&spec.languages).len() != spec.languages.len() {
        return Err(Error::invalid("synthetic languages must be distinct"));
    }
    let open = spec.vocab_size.saturating_sub(2 * spec.keywords);
    if spec.keywords == 0 || open < 10 {
        return Err(Error::invalid("synthetic vocabulary too small for the keyword count"));
    }
    let det = (open / 20).max(2);
    let verb = open / 4;
    let adj = open / 5;
    let adv = open / 10;
    let noun = open - det - verb - adj - adv;
    let mut latent: Vec<(String, &'static str)> = Vec::new();
    let mut by_tag: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for (tag, n) in TAGS.iter().zip([det, noun, verb, adj, adv]) {
        for i in 0..n {
            let w = format!("{}{i}", tag.to_lowercase());
            latent.push((w.clone(), tag));
            by_tag.entry(tag).or_default().push(w);
        }
    }
    let positive: Vec<String> = (0..spec.keywords).map(|i| format!("pos{i}")).collect();
    let negative: Vec<String> = (0..spec.keywords).map(|i| format!("neg{i}")).collect();
    latent.extend(positive.iter().chain(&negative).map(|w| (w.clone(), "ADJ")));
    let domain: Vec<String> = latent.iter().map(|(w, _)| w.clone()).collect();
    let tag_of: BTreeMap<&str, &'static str> = latent.iter().map(|(w, t)| (w.as_str(), *t)).collect();

    let ciphers = match &spec.ciphers {
        Some(c) if c.len() != spec.languages.len() => {
            return Err(Error::invalid("one cipher per language required"));
        }
        Some(c) => c.clone(),
        None => (0..spec.languages.len()).map(|k| random_cipher(&domain, k, spec.seed)).collect(),
    };
    for c in &ciphers {
        validate_cipher(&domain, c)?;
    }
    let lat = Latent { by_tag, positive: positive.clone(), negative: negative.clone() };

    let mut labeled = Vec::new();
    let mut tagged = Vec::new();
    for (k, lang) in spec.languages.iter().enumerate() {
        let mut r = rng::stream(spec.seed, &format!("labeled-{lang}"));
        let examples = lat
            .labeled(&mut r, spec.labeled_size)
            .into_iter()
            .map(|(w, _, label)| LabeledExample { sentence: render(&ciphers[k], &w, lang), label })
            .collect();
        labeled.push(LabeledDataset::new(lang.clone(), examples)?);

        let mut r = rng::stream(spec.seed, &format!("tagged-{lang}"));
        let rows = lat
            .labeled(&mut r, spec.tagged_size)
            .into_iter()
            .map(|(w, _, _)| {
                let tags = w.iter().map(|x| tag_of[x.as_str()].to_string()).collect();
                (render(&ciphers[k], &w, lang), tags)
            })
            .collect();
        tagged.push(TaggedCorpus::new(rows)?);
    }

    let mut r = rng::stream(spec.seed, "parallel");
    let latent_rows = lat.labeled(&mut r, spec.parallel_size);
    let parallel_labels = latent_rows.iter().map(|(_, _, l)| *l).collect();
    let rows = latent_rows
        .iter()
        .map(|(w, _, _)| spec.languages.iter().enumerate().map(|(k, lang)| render(&ciphers[k], w, lang)).collect())
        .collect();
    let parallel = ParallelCorpus::new(spec.languages.clone(), rows)?;

    let mut dictionaries = BTreeMap::new();
    for (a, la) in spec.languages.iter().enumerate() {
        for (b, lb) in spec.languages.iter().enumerate() {
            if a != b {
                let pairs = domain.iter().map(|w| ((ciphers[a][w].clone(), ciphers[b][w].clone()), 1));
                dictionaries.insert((la.clone(), lb.clone()), Dictionary::from_counts(la, lb, pairs));
            }
        }
    }

    let mut lexicon = SenseLexicon::default();
    for w in &positive {
        lexicon.insert(&ciphers[0][w], "1", 0.75, 0.0)?;
        lexicon.insert(&ciphers[0][w], "2", 0.5, 0.125)?;
    }
    for w in &negative {
        lexicon.insert(&ciphers[0][w], "1", 0.0, 0.75)?;
        lexicon.insert(&ciphers[0][w], "2", 0.125, 0.5)?;
    }
    for w in &lat.by_tag["ADJ"] {
        lexicon.insert(&ciphers[0][w], "1", 0.125, 0.125)?;
    }

    Ok(SyntheticWorld {
        spec: spec.clone(),
        latent,
        positive_keywords: positive,
        negative_keywords: negative,
        ciphers,
        labeled,
        parallel,
        parallel_labels,
        dictionaries,
        tagged,
        lexicon,
    })
}

impl SyntheticWorld {
    pub fn language_index(&self, lang: &str) -> Result<usize> {
        self.spec
            .languages
            .iter()
            .position(|l| l == lang)
            .ok_or_else(|| Error::invalid(format!("language `{lang}` not in the synthetic world")))
    }

    /// Seeded train/dev/test split of one language's labeled data.
    pub fn split(&self, lang: &str) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
        let k = self.language_index(lang)?;
        split_dataset(&self.labeled[k], rng::substream(self.spec.seed, &format!("split-{lang}")))
    }

    /// Writes every artifact plus example plans that target the last
    /// language. Plans reference `dict.<src>-<tgt>.tsv`, produced by the
    /// `dict` subcommand.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let langs = &self.spec.languages;
        for (k, lang) in langs.iter().enumerate() {
            self.labeled[k].save(&dir.join(format!("{lang}.labeled.tsv")))?;
            let (train, dev, test) = self.split(lang)?;
            train.save(&dir.join(format!("{lang}.train.tsv")))?;
            dev.save(&dir.join(format!("{lang}.dev.tsv")))?;
            test.save(&dir.join(format!("{lang}.test.tsv")))?;
            self.tagged[k].save(&dir.join(format!("{lang}.tagged.txt")))?;
        }
        let paths: Vec<_> = langs.iter().map(|l| dir.join(format!("parallel.{l}.txt"))).collect();
        self.parallel.save(&paths.iter().map(|p| p.as_path()).collect::<Vec<_>>())?;
        let labels: Vec<SentimentLabel> = self.parallel_labels.clone();
        save_predictions(&labels, &dir.join("parallel.labels.tsv"))?;
        for ((a, b), d) in &self.dictionaries {
            d.save(&dir.join(format!("gold.{a}-{b}.tsv")))?;
        }
        write_string(&dir.join(format!("lexicon.{}.tsv", langs[0])), &self.lexicon.to_tsv())?;
        if langs.len() >= 2 {
            for (name, text) in self.example_plans() {
                write_string(&dir.join(name), &text)?;
            }
        }
        Ok(())
    }

    fn example_plans(&self) -> Vec<(String, String)> {
        let langs = &self.spec.languages;
        let target = langs.last().expect("non-empty");
        let sources = &langs[..langs.len() - 1];
        let quoted = |v: &[String]| v.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ");
        let mut data = String::from("[data]\n");
        let _ = writeln!(data, "test = \"{target}.test.tsv\"");
        let mut train = String::from("[data.train]\n");
        let mut dicts = String::from("[resources.dictionaries]\n");
        let mut parallel = String::from("[resources.parallel]\n");
        let mut tagged = String::from("[resources.tagged]\n");
        for s in sources {
            let _ = writeln!(train, "{s} = \"{s}.train.tsv\"");
            let _ = writeln!(dicts, "{s} = \"dict.{s}-{target}.tsv\"");
        }
        for l in langs {
            let _ = writeln!(parallel, "{l} = \"parallel.{l}.txt\"");
            let _ = writeln!(tagged, "{l} = \"{l}.tagged.txt\"");
        }
        let body = format!("{data}\n{train}\n[resources]\nlexicon = \"lexicon.{}.tsv\"\nlexicon_language = \"{}\"\n\n{dicts}\n{parallel}\n{tagged}\n[hyper]\nprofile = \"desk\"\n", langs[0], langs[0]);
        let plan = |method: &str, extra: &str| {
            format!(
                "[plan]\nmethod = \"{method}\"\nsources = [{}]\ntarget = \"{target}\"\n{extra}\n{body}",
                quoted(sources)
            )
        };
        vec![
            ("plan.direct.toml".into(), plan("direct_concat", "")),
            ("plan.projection.toml".into(), plan("projection", "classifier = \"nbsvm\"\n")),
            ("plan.ensemble.toml".into(), plan("ensemble_kl", "")),
            ("plan.lexicon.toml".into(), plan("lexicon_baseline", "")),
        ]
    }
}
