//! Transfer methods: annotation projection, direct transfer and the two
//! multi-source ensembles, plus the plan runner that wires them to files.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::align::{load_manual_dictionary, Dictionary};
use crate::corpus::{
    load_labeled, load_monolingual, load_tagged, LabeledDataset, LabeledExample, ParallelCorpus, Sentence,
    SentimentLabel, TokenizerConfig,
};
use crate::error::read_to_string;
use crate::harness::{HyperConfig, HyperProfile, Metrics, Report};
use crate::lexicon::{classify_threshold, load_lexicon, score_sentence, translate_lexicon, WordLexicon};
use crate::nbsvm::{predict_nbsvm, train_nbsvm, NbSvmModel};
use crate::nnsent::{self, softmax, FeatureResources, SentimentModel};
use crate::postag::{kl_directed, trigram_distribution_over, KlDirection, TaggerModel, TrigramDist};
use crate::xlingrep::{ClusterMap, EmbeddingTable};
use crate::{rng, Error, Result};

/// Lower clamp applied to every KL value before inversion.
pub const KL_CLAMP: f64 = 1e-6;

/// Anything that maps a sentence to a label and a distribution over labels.
pub trait SentimentClassifier: Sync {
    fn classify(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])>;
}

impl SentimentClassifier for SentimentModel {
    fn classify(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
        self.predict(sentence)
    }
}

impl SentimentClassifier for NbSvmModel {
    fn classify(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
        let (label, scores) = predict_nbsvm(self, sentence);
        let p = softmax(&scores);
        Ok((label, [p[0], p[1], p[2]]))
    }
}

/// The threshold rule over a target-language lexicon. Its distribution is
/// one-hot.
#[derive(Clone, Debug, PartialEq)]
pub struct LexiconClassifier {
    pub lexicon: WordLexicon,
    pub delta: f64,
}

impl SentimentClassifier for LexiconClassifier {
    fn classify(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
        let label = classify_threshold(score_sentence(&self.lexicon, sentence), self.delta);
        let mut d = [0.0; 3];
        d[label.code()] = 1.0;
        Ok((label, d))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrainedClassifier {
    Neural(SentimentModel),
    NbSvm(NbSvmModel),
    Lexicon(LexiconClassifier),
}

impl SentimentClassifier for TrainedClassifier {
    fn classify(&self, sentence: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
        match self {
            TrainedClassifier::Neural(m) => m.classify(sentence),
            TrainedClassifier::NbSvm(m) => m.classify(sentence),
            TrainedClassifier::Lexicon(m) => m.classify(sentence),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub label: SentimentLabel,
    pub distribution: [f64; 3],
    /// Name of the model that produced it.
    pub source: String,
}

impl Prediction {
    pub fn of(source: &str, model: &dyn SentimentClassifier, sentence: &Sentence) -> Result<Self> {
        let (label, distribution) = model.classify(sentence)?;
        Ok(Prediction { label, distribution, source: source.to_string() })
    }
}

/// A named classifier taking part in a vote.
pub type Voter<'a> = (&'a str, &'a dyn SentimentClassifier);

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Highest score wins; near-ties go to the higher tie-break value, then
/// to the lower label code.
fn pick(scores: [f64; 3], tiebreak: [f64; 3]) -> SentimentLabel {
    let mut best = 0;
    for k in 1..3 {
        let better = if nearly_equal(scores[k], scores[best]) {
            tiebreak[k] > tiebreak[best] && !nearly_equal(tiebreak[k], tiebreak[best])
        } else {
            scores[k] > scores[best]
        };
        if better {
            best = k;
        }
    }
    SentimentLabel::ALL[best]
}

fn summed_mass(preds: &[Prediction]) -> [f64; 3] {
    let mut mass = [0.0; 3];
    for p in preds {
        for k in 0..3 {
            mass[k] += p.distribution[k];
        }
    }
    mass
}

/// Most frequent label. Ties go to the highest summed distribution mass,
/// then to the lower label code.
pub fn majority_vote(preds: &[Prediction]) -> Result<SentimentLabel> {
    if preds.is_empty() {
        return Err(Error::invalid("majority vote over no predictions"));
    }
    let mut counts = [0.0; 3];
    for p in preds {
        counts[p.label.code()] += 1.0;
    }
    Ok(pick(counts, summed_mass(preds)))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteMode {
    /// Each model adds its weight to its predicted label.
    #[default]
    Hard,
    /// Each model adds its weight times its distribution.
    Soft,
}

pub fn weighted_vote(preds: &[Prediction], weights: &[f64], mode: VoteMode) -> Result<SentimentLabel> {
    if preds.is_empty() || preds.len() != weights.len() {
        return Err(Error::invalid(format!("{} predictions for {} weights", preds.len(), weights.len())));
    }
    let mut scores = [0.0; 3];
    for (p, w) in preds.iter().zip(weights) {
        match mode {
            VoteMode::Hard => scores[p.label.code()] += w,
            VoteMode::Soft => (0..3).for_each(|k| scores[k] += w * p.distribution[k]),
        }
    }
    let tiebreak = match mode {
        VoteMode::Hard => summed_mass(preds),
        VoteMode::Soft => [0.0; 3],
    };
    Ok(pick(scores, tiebreak))
}

/// `(1 / max(kl, KL_CLAMP))^4`, normalized to sum to one.
pub fn kl_weights(kls: &[f64]) -> Result<Vec<f64>> {
    if kls.is_empty() {
        return Err(Error::invalid("no KL values"));
    }
    if kls.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(Error::invalid("KL values must be finite and non-negative"));
    }
    let raw: Vec<f64> = kls.iter().map(|k| (1.0 / k.max(KL_CLAMP)).powi(4)).collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Runs `f` over `items` on up to `threads` scoped threads; output order
/// follows input order.
pub(crate) fn map_parallel<T: Sync, R: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let results: Vec<Result<Vec<R>>> = std::thread::scope(|s| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Result<Vec<R>>>())).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// Predictions indexed `[sentence][model]`.
pub fn predict_all(models: &[Voter<'_>], test: &[Sentence], threads: usize) -> Result<Vec<Vec<Prediction>>> {
    if models.is_empty() {
        return Err(Error::invalid("no models to predict with"));
    }
    let per_model = map_parallel(models, threads, |(name, m)| {
        test.iter().map(|s| Prediction::of(name, *m, s)).collect::<Result<Vec<_>>>()
    })?;
    Ok((0..test.len()).map(|i| per_model.iter().map(|col| col[i].clone()).collect()).collect())
}

/// Labels each target sentence of the corpus by majority vote over every
/// source column whose language has a model. A language with several
/// columns casts one vote per column. Target sentences pass through as is.
pub fn project(models: &[Voter<'_>], parallel: &ParallelCorpus, target: &str) -> Result<LabeledDataset> {
    if parallel.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if models.is_empty() {
        return Err(Error::invalid("projection needs at least one source model"));
    }
    let tcol = parallel.column_of(target)?;
    let mut voters: Vec<(usize, &Voter<'_>)> = Vec::new();
    for m in models {
        if m.0 == target {
            return Err(Error::invalid(format!("source language `{target}` is also the target")));
        }
        let cols: Vec<usize> = (0..parallel.languages.len()).filter(|&c| parallel.languages[c] == m.0).collect();
        if cols.is_empty() {
            return Err(Error::invalid(format!("parallel corpus has no `{}` column", m.0)));
        }
        voters.extend(cols.into_iter().map(|c| (c, m)));
    }
    let mut examples = Vec::with_capacity(parallel.len());
    for row in &parallel.rows {
        let preds =
            voters.iter().map(|(c, (name, m))| Prediction::of(name, *m, &row[*c])).collect::<Result<Vec<_>>>()?;
        examples.push(LabeledExample { sentence: row[tcol].clone(), label: majority_vote(&preds)? });
    }
    LabeledDataset::new(target, examples)
}

/// Replaces every token that has a translation. Labels and lengths are
/// kept; the result is in the dictionary's target language.
pub fn translate_dataset(d: &LabeledDataset, dict: &Dictionary) -> Result<LabeledDataset> {
    if dict.pair.0 != d.language {
        return Err(Error::invalid(format!(
            "dictionary {}->{} cannot translate a `{}` dataset",
            dict.pair.0, dict.pair.1, d.language
        )));
    }
    let examples = d
        .examples
        .iter()
        .map(|e| LabeledExample {
            sentence: Sentence {
                tokens: e.sentence.tokens.iter().map(|t| dict.translate(t).unwrap_or(t).to_string()).collect(),
                language: dict.pair.1.clone(),
            },
            label: e.label,
        })
        .collect();
    Ok(LabeledDataset { language: dict.pair.1.clone(), examples })
}

/// Translates each source dataset into the shared target language and
/// concatenates them in source order.
pub fn direct_concat(datasets: &[LabeledDataset], dicts: &[Dictionary]) -> Result<LabeledDataset> {
    if datasets.is_empty() || datasets.len() != dicts.len() {
        return Err(Error::invalid("direct transfer needs one dictionary per source dataset"));
    }
    let target = &dicts[0].pair.1;
    let mut examples = Vec::new();
    for (d, dict) in datasets.iter().zip(dicts) {
        if &dict.pair.1 != target {
            return Err(Error::invalid("dictionaries point to different target languages"));
        }
        examples.extend(translate_dataset(d, dict)?.examples);
    }
    LabeledDataset::new(target.clone(), examples)
}

pub fn ensemble_flat(models: &[Voter<'_>], test: &[Sentence], threads: usize) -> Result<Vec<SentimentLabel>> {
    predict_all(models, test, threads)?.iter().map(|p| majority_vote(p)).collect()
}

pub fn ensemble_weighted(
    models: &[Voter<'_>],
    weights: &[f64],
    test: &[Sentence],
    mode: VoteMode,
    threads: usize,
) -> Result<Vec<SentimentLabel>> {
    predict_all(models, test, threads)?.iter().map(|p| weighted_vote(p, weights, mode)).collect()
}

/// Weights each source model by its inverted, clamped, fourth-powered KL
/// divergence to the target POS-trigram distribution. Returns the labels
/// and the normalized weights.
pub fn ensemble_kl(
    models: &[Voter<'_>],
    source_dists: &[TrigramDist],
    target_dist: &TrigramDist,
    direction: KlDirection,
    test: &[Sentence],
    mode: VoteMode,
    threads: usize,
) -> Result<(Vec<SentimentLabel>, Vec<f64>)> {
    if source_dists.len() != models.len() {
        return Err(Error::invalid("one source distribution per model required"));
    }
    let kls = source_dists.iter().map(|s| kl_directed(target_dist, s, direction)).collect::<Result<Vec<_>>>()?;
    let weights = kl_weights(&kls)?;
    Ok((ensemble_weighted(models, &weights, test, mode, threads)?, weights))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Projection,
    DirectConcat,
    EnsembleFlat,
    EnsembleKl,
    LexiconBaseline,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    #[default]
    Neural,
    Nbsvm,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub method: Method,
    #[serde(default)]
    pub sources: Vec<String>,
    pub target: String,
    /// Source-side classifier.
    #[serde(default)]
    pub classifier: ClassifierKind,
    /// Classifier trained on projected data.
    #[serde(default)]
    pub target_classifier: ClassifierKind,
    #[serde(default)]
    pub vote: VoteMode,
    #[serde(default)]
    pub kl_direction: KlDirection,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Labeled training data per source language.
    #[serde(default)]
    pub train: BTreeMap<String, PathBuf>,
    /// Labeled target-language test data.
    pub test: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(PathBuf),
    Many(Vec<PathBuf>),
}

impl OneOrMany {
    pub fn paths(&self) -> Vec<&Path> {
        match self {
            OneOrMany::One(p) => vec![p.as_path()],
            OneOrMany::Many(v) => v.iter().map(PathBuf::as_path).collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSection {
    /// Dictionary from each source language into the target.
    #[serde(default)]
    pub dictionaries: BTreeMap<String, PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub lexicon_language: Option<String>,
    /// Parallel text per language; a list gives several translations.
    #[serde(default)]
    pub parallel: BTreeMap<String, OneOrMany>,
    /// POS-tagged text per language.
    #[serde(default)]
    pub tagged: BTreeMap<String, PathBuf>,
    /// Tagger for the target test text when no tagged target text is given.
    pub tagger: Option<PathBuf>,
}

/// One experiment, read from a TOML file with `[plan]`, `[data]`,
/// `[resources]` and `[hyper]` sections. Relative paths resolve against
/// the file's directory.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferPlan {
    pub plan: PlanSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub resources: ResourceSection,
    #[serde(default)]
    pub hyper: HyperConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl TransferPlan {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut plan: TransferPlan = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        plan.base_dir = base_dir.to_path_buf();
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new("."))).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.plan;
        if p.sources.is_empty() && p.method != Method::LexiconBaseline {
            return Err(Error::Config("`sources` must not be empty".into()));
        }
        if p.sources.contains(&p.target) {
            return Err(Error::Config(format!("target `{}` is also a source", p.target)));
        }
        if BTreeSet::from_iter(&p.sources).len() != p.sources.len() {
            return Err(Error::Config("duplicate source language".into()));
        }
        self.hyper.resolve().map(|_| ()).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn require<'a>(&self, key: &str, p: Option<&'a PathBuf>) -> Result<&'a PathBuf> {
        p.ok_or_else(|| Error::Config(format!("missing `{key}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub labels: Vec<SentimentLabel>,
    pub gold: Vec<SentimentLabel>,
    pub report: Report,
    /// Projected target data, for projection plans.
    pub projected: Option<LabeledDataset>,
    /// Ensemble weights per source, in source order.
    pub weights: Option<Vec<f64>>,
    /// The single final model, when the method trains one.
    pub model: Option<TrainedClassifier>,
}

/// Everything `run_plan` reads from disk.
struct Loaded {
    hyper: HyperProfile,
    test: LabeledDataset,
    embeddings: Option<EmbeddingTable>,
    clusters: Option<ClusterMap>,
}

fn neural_resources(
    embeddings: &Option<EmbeddingTable>,
    clusters: &Option<ClusterMap>,
    lexicon: Option<WordLexicon>,
    d_ce: usize,
) -> FeatureResources {
    let mut r = FeatureResources::bare(d_ce);
    if let Some(e) = embeddings {
        r.embeddings = e.clone();
    }
    if let Some(c) = clusters {
        r.clusters = c.clone();
    }
    r.lexicon = lexicon;
    r
}

/// Trains one classifier of `kind` on `data`.
pub fn train_classifier(
    kind: ClassifierKind,
    data: &LabeledDataset,
    resources: FeatureResources,
    hyper: &HyperProfile,
    nbsvm: &crate::nbsvm::NbSvmConfig,
    multi_source: bool,
    seed: u64,
) -> Result<TrainedClassifier> {
    match kind {
        ClassifierKind::Neural => {
            let mut cfg = hyper.train_config(multi_source, seed);
            cfg.dims.d_ce = resources.embeddings.dim();
            let (model, report) = nnsent::train(data, None, resources, &cfg)?;
            log::info!(
                "trained neural model on {} `{}` examples, final epoch loss {:.4}",
                data.len(),
                data.language,
                report.epoch_losses.last().copied().unwrap_or(f64::NAN)
            );
            Ok(TrainedClassifier::Neural(model))
        }
        ClassifierKind::Nbsvm => {
            let cfg = crate::nbsvm::NbSvmConfig { seed, ..*nbsvm };
            Ok(TrainedClassifier::NbSvm(train_nbsvm(data, &cfg)?))
        }
    }
}

fn predict_labels(model: &dyn SentimentClassifier, test: &[Sentence]) -> Result<Vec<SentimentLabel>> {
    test.iter().map(|s| model.classify(s).map(|(l, _)| l)).collect()
}

/// Executes the plan end to end and evaluates on the target test set.
pub fn run_plan(plan: &TransferPlan, seed: u64, threads: usize) -> Result<PlanOutcome> {
    plan.validate()?;
    let p = &plan.plan;
    let tok = TokenizerConfig::default();
    let hyper = plan.hyper.resolve()?;
    let nb = plan.hyper.nbsvm(seed);
    let test_path = plan.resolve(plan.require("data.test", plan.data.test.as_ref())?);
    let test = load_labeled(&test_path, &p.target, tok)?;
    let embeddings = match &plan.resources.embeddings {
        Some(path) => Some(EmbeddingTable::load(&plan.resolve(path))?),
        None => None,
    };
    let clusters = match &plan.resources.clusters {
        Some(path) => Some(ClusterMap::load(&plan.resolve(path))?),
        None => None,
    };
    let loaded = Loaded { hyper, test, embeddings, clusters };
    let sentences: Vec<Sentence> = loaded.test.examples.iter().map(|e| e.sentence.clone()).collect();
    let gold = loaded.test.labels();

    let load_dict = |src: &str| -> Result<Dictionary> {
        match plan.resources.dictionaries.get(src) {
            Some(path) => load_manual_dictionary(&plan.resolve(path), src, &p.target),
            None => {
                log::warn!("no dictionary for `{src}`; its data stays untranslated");
                Ok(Dictionary::new(src, &p.target))
            }
        }
    };
    let load_train = |src: &str| -> Result<LabeledDataset> {
        let path = plan.require(&format!("data.train.{src}"), plan.data.train.get(src))?;
        load_labeled(&plan.resolve(path), src, tok)
    };
    let target_lexicon = || -> Result<Option<WordLexicon>> {
        let Some(path) = &plan.resources.lexicon else {
            return Ok(None);
        };
        let lex = load_lexicon(&plan.resolve(path))?;
        let lang = plan
            .resources
            .lexicon_language
            .clone()
            .or_else(|| p.sources.first().cloned())
            .unwrap_or_else(|| p.target.clone());
        if lang == p.target {
            Ok(Some(lex))
        } else {
            Ok(Some(translate_lexicon(&lex, &load_dict(&lang)?)))
        }
    };
    let multi = p.sources.len() > 1;
    let d_ce = loaded.embeddings.as_ref().map_or(loaded.hyper.dims.d_ce, EmbeddingTable::dim);
    let feature_lexicon = if loaded.hyper.dims.lexicon { target_lexicon()? } else { None };
    let resources = || neural_resources(&loaded.embeddings, &loaded.clusters, feature_lexicon.clone(), d_ce);
    let model_seed = |name: &str| rng::substream(seed, &format!("model-{name}"));

    let mut outcome = PlanOutcome {
        labels: Vec::new(),
        gold,
        report: Report::new("", Metrics::compute(&[SentimentLabel::Neutral], &[SentimentLabel::Neutral])?),
        projected: None,
        weights: None,
        model: None,
    };
    let title;
    match p.method {
        Method::LexiconBaseline => {
            let lexicon = target_lexicon()?.ok_or_else(|| Error::Config("missing `resources.lexicon`".into()))?;
            let clf = LexiconClassifier { lexicon, delta: loaded.hyper.delta };
            outcome.labels = predict_labels(&clf, &sentences)?;
            outcome.model = Some(TrainedClassifier::Lexicon(clf));
            title = "lexicon baseline".to_string();
        }
        Method::DirectConcat => {
            let datasets = p.sources.iter().map(|s| load_train(s)).collect::<Result<Vec<_>>>()?;
            let dicts = p.sources.iter().map(|s| load_dict(s)).collect::<Result<Vec<_>>>()?;
            let train = direct_concat(&datasets, &dicts)?;
            let model =
                train_classifier(p.classifier, &train, resources(), &loaded.hyper, &nb, multi, model_seed("direct"))?;
            outcome.labels = predict_labels(&model, &sentences)?;
            outcome.model = Some(model);
            title = format!("direct transfer {} -> {}", p.sources.join("+"), p.target);
        }
        Method::EnsembleFlat | Method::EnsembleKl => {
            let translated = p
                .sources
                .iter()
                .map(|s| translate_dataset(&load_train(s)?, &load_dict(s)?))
                .collect::<Result<Vec<_>>>()?;
            let named: Vec<(&String, &LabeledDataset)> = p.sources.iter().zip(&translated).collect();
            let models = map_parallel(&named, threads, |(s, d)| {
                train_classifier(p.classifier, d, resources(), &loaded.hyper, &nb, true, model_seed(s))
            })?;
            let voters: Vec<Voter<'_>> =
                p.sources.iter().zip(&models).map(|(s, m)| (s.as_str(), m as &dyn SentimentClassifier)).collect();
            if p.method == Method::EnsembleFlat {
                outcome.labels = ensemble_flat(&voters, &sentences, threads)?;
                title = format!("ensemble-flat {} -> {}", p.sources.join("+"), p.target);
            } else {
                let (src_dists, tgt_dist) = plan_distributions(plan, &sentences, &loaded.hyper)?;
                let (labels, weights) =
                    ensemble_kl(&voters, &src_dists, &tgt_dist, p.kl_direction, &sentences, p.vote, threads)?;
                outcome.labels = labels;
                outcome.weights = Some(weights);
                title = format!("ensemble-KL {} -> {}", p.sources.join("+"), p.target);
            }
        }
        Method::Projection => {
            let parallel = load_plan_parallel(plan, tok)?;
            let datasets = p.sources.iter().map(|s| load_train(s)).collect::<Result<Vec<_>>>()?;
            let named: Vec<(&String, &LabeledDataset)> = p.sources.iter().zip(&datasets).collect();
            let models = map_parallel(&named, threads, |(s, d)| {
                train_classifier(p.classifier, d, resources(), &loaded.hyper, &nb, false, model_seed(s))
            })?;
            let voters: Vec<Voter<'_>> =
                p.sources.iter().zip(&models).map(|(s, m)| (s.as_str(), m as &dyn SentimentClassifier)).collect();
            let projected = project(&voters, &parallel, &p.target)?;
            let target_model = train_classifier(
                p.target_classifier,
                &projected,
                resources(),
                &loaded.hyper,
                &nb,
                false,
                model_seed("projected"),
            )?;
            outcome.labels = predict_labels(&target_model, &sentences)?;
            outcome.projected = Some(projected);
            outcome.model = Some(target_model);
            title = format!("projection {} -> {}", p.sources.join("+"), p.target);
        }
    }
    let mut report = Report::new(title, Metrics::compute(&outcome.labels, &outcome.gold)?)
        .with("method", format!("{:?}", p.method))
        .with("profile", loaded.hyper.name)
        .with("seed", seed);
    if let Some(w) = &outcome.weights {
        for (s, w) in p.sources.iter().zip(w) {
            report = report.with(format!("weight.{s}"), format!("{w:.6}"));
        }
    }
    if let Some(d) = &outcome.projected {
        report = report.with("projected_examples", d.len());
    }
    outcome.report = report;
    Ok(outcome)
}

fn load_plan_parallel(plan: &TransferPlan, tok: TokenizerConfig) -> Result<ParallelCorpus> {
    let mut columns: Vec<(String, Vec<Sentence>)> = Vec::new();
    for (lang, files) in &plan.resources.parallel {
        for f in files.paths() {
            columns.push((lang.clone(), load_monolingual(&plan.resolve(f), lang, tok)?));
        }
    }
    if columns.is_empty() {
        return Err(Error::Config("missing `resources.parallel`".into()));
    }
    let n = columns[0].1.len();
    if let Some((lang, c)) = columns.iter().find(|(_, c)| c.len() != n) {
        return Err(Error::invalid(format!("parallel `{lang}` has {} lines, expected {n}", c.len())));
    }
    let languages = columns.iter().map(|(l, _)| l.clone()).collect();
    let rows = (0..n).map(|i| columns.iter().map(|(_, c)| c[i].clone()).collect()).collect();
    ParallelCorpus::new(languages, rows)
}

/// Source trigram distributions in source order and the target one, over
/// the union of all tagsets.
fn plan_distributions(
    plan: &TransferPlan,
    target_text: &[Sentence],
    hyper: &HyperProfile,
) -> Result<(Vec<TrigramDist>, TrigramDist)> {
    let tok = TokenizerConfig::default();
    let p = &plan.plan;
    let tagged_seqs = |lang: &str| -> Result<Option<Vec<Vec<String>>>> {
        match plan.resources.tagged.get(lang) {
            Some(path) => Ok(Some(load_tagged(&plan.resolve(path), lang, tok)?.tag_sequences())),
            None => Ok(None),
        }
    };
    let mut sources = Vec::new();
    for s in &p.sources {
        sources.push(tagged_seqs(s)?.ok_or_else(|| Error::Config(format!("missing `resources.tagged.{s}`")))?);
    }
    let target = match tagged_seqs(&p.target)? {
        Some(t) => t,
        None => {
            let path = plan.require("resources.tagger", plan.resources.tagger.as_ref())?;
            let tagger = TaggerModel::load(&plan.resolve(path))?;
            target_text.iter().map(|s| tagger.tag(&s.tokens)).collect()
        }
    };
    let tagset: BTreeSet<String> = sources.iter().flatten().chain(&target).flatten().cloned().collect();
    let dists = sources
        .iter()
        .map(|seqs| trigram_distribution_over(seqs, &tagset, hyper.kl_smoothing))
        .collect::<Result<Vec<_>>>()?;
    Ok((dists, trigram_distribution_over(&target, &tagset, hyper.kl_smoothing)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SentimentLabel::*;

    fn pred(label: SentimentLabel, d: [f64; 3]) -> Prediction {
        Prediction { label, distribution: d, source: "m".into() }
    }

    fn sent(s: &str, lang: &str) -> Sentence {
        Sentence::new(s.split_whitespace().map(String::from).collect(), lang).unwrap()
    }

    /// Labels by keyword: "good" positive, "bad" negative, else neutral.
    struct Keyword(&'static str, &'static str);

    impl SentimentClassifier for Keyword {
        fn classify(&self, s: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
            let l = if s.tokens.iter().any(|t| t == self.0) {
                Positive
            } else if s.tokens.iter().any(|t| t == self.1) {
                Negative
            } else {
                Neutral
            };
            let mut d = [0.1; 3];
            d[l.code()] = 0.8;
            Ok((l, d))
        }
    }

    struct Constant(SentimentLabel);

    impl SentimentClassifier for Constant {
        fn classify(&self, _: &Sentence) -> Result<(SentimentLabel, [f64; 3])> {
            let mut d = [0.0; 3];
            d[self.0.code()] = 1.0;
            Ok((self.0, d))
        }
    }

    #[test]
    fn majority_cases() {
        let u = [1.0 / 3.0; 3];
        assert_eq!(majority_vote(&[pred(Positive, u), pred(Positive, u), pred(Negative, u)]).unwrap(), Positive);
        let tie = [pred(Positive, [0.9, 0.05, 0.05]), pred(Negative, [0.0, 0.5, 0.5]), pred(Neutral, [0.2, 0.4, 0.4])];
        // masses: positive 1.1, negative 0.95, neutral 0.95
        assert_eq!(majority_vote(&tie).unwrap(), Positive);
        assert_eq!(majority_vote(&[pred(Neutral, u)]).unwrap(), Neutral);
        assert!(majority_vote(&[]).is_err());
        assert_eq!(
            majority_vote(&[pred(Negative, [0.0, 0.0, 1.0]), pred(Neutral, [0.0, 1.0, 0.0])]).unwrap(),
            Negative
        );
    }

    #[test]
    fn kl_weight_values() {
        let w = kl_weights(&[0.5, 1.0]).unwrap();
        assert!((w[0] - 16.0 / 17.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 17.0).abs() < 1e-15);
        let w = kl_weights(&[0.0, 1.0]).unwrap();
        assert!(w[1] < 1e-20 && (w[0] - 1.0).abs() < 1e-15);
        assert_eq!(kl_weights(&[0.3, 0.3]).unwrap(), vec![0.5, 0.5]);
        assert!(kl_weights(&[]).is_err());
        assert!(kl_weights(&[f64::NAN]).is_err());
    }

    #[test]
    fn projection_single_and_multi() {
        let par = ParallelCorpus::new(
            vec!["en".into(), "de".into(), "fr".into()],
            vec![
                vec![sent("good film", "en"), sent("gut film", "de"), sent("bon film", "fr")],
                vec![sent("bad film", "en"), sent("gut film", "de"), sent("mauvais film", "fr")],
                vec![sent("a film", "en"), sent("ein film", "de"), sent("un film", "fr")],
            ],
        )
        .unwrap();
        let en = Keyword("good", "bad");
        let out = project(&[("en", &en)], &par, "fr").unwrap();
        assert_eq!(out.labels(), vec![Positive, Negative, Neutral]);
        assert_eq!(out.examples[1].sentence, par.rows[1][2]);
        let de = Constant(Positive);
        let out = project(&[("en", &en), ("de", &de)], &par, "fr").unwrap();
        // row 1: en negative, de positive, tie on mass 0.8+0 vs 0.1+1 -> positive
        assert_eq!(out.labels(), vec![Positive, Positive, Positive]);
        assert!(project(&[("fr", &en)], &par, "fr").is_err());
        assert!(project(&[("xx", &en)], &par, "fr").is_err());
    }

    #[test]
    fn projection_votes_per_translation() {
        let par = ParallelCorpus::new(
            vec!["en".into(), "en".into(), "fr".into()],
            vec![vec![sent("bad one", "en"), sent("bad two", "en"), sent("x", "fr")]],
        )
        .unwrap();
        let out = project(&[("en", &Keyword("good", "bad"))], &par, "fr").unwrap();
        assert_eq!(out.labels(), vec![Negative]);
    }

    #[test]
    fn translation_and_concat() {
        let d = LabeledDataset::new(
            "en",
            vec![
                LabeledExample { sentence: sent("good movie", "en"), label: Positive },
                LabeledExample { sentence: sent("bad", "en"), label: Negative },
                LabeledExample { sentence: sent("a day", "en"), label: Neutral },
            ],
        )
        .unwrap();
        let dict = Dictionary::from_counts("en", "fr", [(("good".into(), "bon".into()), 1)]);
        let t = translate_dataset(&d, &dict).unwrap();
        assert_eq!(t.examples[0].sentence.tokens, vec!["bon", "movie"]);
        assert_eq!(t.labels(), d.labels());
        assert_eq!(t.language, "fr");
        let empty = Dictionary::new("en", "fr");
        assert_eq!(translate_dataset(&d, &empty).unwrap().examples[2].sentence.tokens, d.examples[2].sentence.tokens);
        assert!(translate_dataset(&d, &Dictionary::new("de", "fr")).is_err());

        let mut d2 = d.clone();
        d2.language = "de".into();
        d2.examples.push(d.examples[0].clone());
        let c = direct_concat(&[d.clone(), d2.clone()], &[dict, Dictionary::new("de", "fr")]).unwrap();
        assert_eq!(c.len(), 7);
        let h: Vec<usize> = (0..3).map(|k| d.label_histogram()[k] + d2.label_histogram()[k]).collect();
        assert_eq!(c.label_histogram().to_vec(), h);
    }

    #[test]
    fn ensembles() {
        let a = Keyword("good", "bad");
        let b = Keyword("good", "bad");
        let c = Constant(Negative);
        let test = vec![sent("good x", "fr"), sent("bad", "fr"), sent("zz", "fr")];
        let models: Vec<Voter<'_>> = vec![("a", &a), ("b", &b), ("c", &c)];
        assert_eq!(ensemble_flat(&models, &test, 1).unwrap(), vec![Positive, Negative, Neutral]);
        assert_eq!(ensemble_flat(&models, &test, 3).unwrap(), ensemble_flat(&models, &test, 1).unwrap());
        assert_eq!(ensemble_flat(&models[..1], &test, 1).unwrap(), vec![Positive, Negative, Neutral]);
        let heavy = ensemble_weighted(&models, &[0.1, 0.1, 0.8], &test, VoteMode::Hard, 1).unwrap();
        assert_eq!(heavy, vec![Negative; 3]);
        let soft = ensemble_weighted(&models, &[0.5, 0.5, 0.0], &test, VoteMode::Soft, 1).unwrap();
        assert_eq!(soft, vec![Positive, Negative, Neutral]);
    }

    fn random_preds(seed: u64, n: usize) -> Vec<Prediction> {
        use rand::Rng as _;
        let mut r = rng::seeded(seed);
        (0..n)
            .map(|_| {
                let raw: [f64; 3] = [r.gen(), r.gen(), r.gen()];
                let s: f64 = raw.iter().sum();
                let d = raw.map(|x| x / s);
                pred(nnsent::argmax_label(&d), d)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn vote_permutation_invariant(seed in any::<u64>(), n in 1usize..7) {
            let preds = random_preds(seed, n);
            let mut rev = preds.clone();
            rev.reverse();
            prop_assert_eq!(majority_vote(&preds).unwrap(), majority_vote(&rev).unwrap());
        }

        #[test]
        fn weighted_vote_scale_invariant(seed in any::<u64>(), n in 1usize..6, c in 1e-3f64..1e3) {
            use rand::Rng as _;
            let preds = random_preds(seed, n);
            let mut r = rng::seeded(seed ^ 1);
            let w: Vec<f64> = (0..n).map(|_| r.gen_range(0.01..1.0)).collect();
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            for mode in [VoteMode::Hard, VoteMode::Soft] {
                prop_assert_eq!(weighted_vote(&preds, &w, mode).unwrap(), weighted_vote(&preds, &scaled, mode).unwrap());
            }
        }

        #[test]
        fn equal_weights_match_flat(seed in any::<u64>(), n in 1usize..7) {
            let preds = random_preds(seed, n);
            let w = kl_weights(&vec![0.25; n]).unwrap();
            prop_assert_eq!(weighted_vote(&preds, &w, VoteMode::Hard).unwrap(), majority_vote(&preds).unwrap());
        }
    }

    #[test]
    fn plan_parsing() {
        let text = r#"
[plan]
method = "ensemble_kl"
sources = ["en", "de"]
target = "fr"
vote = "soft"

[data]
test = "fr.test.tsv"

[data.train]
en = "en.tsv"

[resources.parallel]
en = ["a.txt", "b.txt"]
fr = "c.txt"

[hyper]
epochs = 2
"#;
        let plan = TransferPlan::parse(text, Path::new("/base")).unwrap();
        assert_eq!(plan.plan.method, Method::EnsembleKl);
        assert_eq!(plan.plan.vote, VoteMode::Soft);
        assert_eq!(plan.plan.kl_direction, KlDirection::TargetSource);
        assert_eq!(plan.resources.parallel["en"].paths().len(), 2);
        assert_eq!(plan.resolve(Path::new("x.tsv")), PathBuf::from("/base/x.tsv"));
        assert!(TransferPlan::parse(&text.replace("[\"en\", \"de\"]", "[\"fr\"]"), Path::new(".")).is_err());
        assert!(TransferPlan::parse(&text.replace("[\"en\", \"de\"]", "[]"), Path::new(".")).is_err());
        assert!(TransferPlan::parse(&text.replace("vote", "voting"), Path::new(".")).is_err());
    }
}
