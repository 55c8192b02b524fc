use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use xlsent::align::{induce_dictionary, load_manual_dictionary, train_ibm1_traced, Ibm1Options};
use xlsent::corpus::{load_labeled, load_monolingual, load_parallel, load_tagged, sentences_to_text, TokenizerConfig};
use xlsent::harness::{self, gen_synthetic, HyperConfig, HyperProfile, Metrics, Report, SyntheticSpec};
use xlsent::lexicon::load_lexicon;
use xlsent::nbsvm::train_nbsvm;
use xlsent::nnsent::{self, FeatureResources};
use xlsent::postag::train_tagger;
use xlsent::transfer::{run_plan, Method, TransferPlan};
use xlsent::xlingrep::{code_switch, induce_clusters, train_sgns, ClusterMap, EmbeddingTable, SgnsConfig};
use xlsent::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "xlsent", version, about = "Cross-lingual sentiment transfer toolkit")]
struct Cli {
    /// TOML configuration: a transfer plan, or just a `[hyper]` section.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for EM and ensemble training.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct BitextArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    tgt: PathBuf,
    #[arg(long)]
    src_lang: String,
    #[arg(long)]
    tgt_lang: String,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Predictions as `index<TAB>label`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnsembleKind {
    Flat,
    Kl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an IBM Model 1 translation table.
    Align(BitextArgs),
    /// Induce a dictionary from intersected alignments.
    Dict(BitextArgs),
    /// Code-switch monolingual corpora through dictionaries.
    Codeswitch {
        /// `LANG=PATH`, repeatable.
        #[arg(long = "corpus", required = true)]
        corpora: Vec<String>,
        /// `SRC:TGT=PATH`, repeatable.
        #[arg(long = "dict", required = true)]
        dicts: Vec<String>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train skip-gram embeddings.
    Embed {
        /// Plain text, one sentence per line; repeatable.
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 5)]
        negatives: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cluster embeddings with k-means.
    Cluster {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the averaged-perceptron POS tagger.
    TrainTagger {
        /// `word/TAG` tokens, one sentence per line.
        #[arg(long)]
        tagged: PathBuf,
        #[arg(long)]
        lang: String,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the neural sentiment model.
    TrainSent {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        lang: String,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Use the multi-source epoch count.
        #[arg(long)]
        multi_source: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an NBSVM classifier.
    TrainNbsvm {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        lang: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Annotation projection through parallel text.
    Project(PlanArgs),
    /// Direct transfer on concatenated translated sources.
    Direct(PlanArgs),
    /// Ensemble of per-source classifiers, flat or KL-weighted.
    Ensemble {
        #[arg(long, value_enum, default_value = "kl")]
        kind: EnsembleKind,
        #[command(flatten)]
        args: PlanArgs,
    },
    /// Sense-lexicon threshold baseline.
    BaselineLexicon(PlanArgs),
    /// Score predictions against gold labels.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write a synthetic multilingual world.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated language codes; the last one is the plans' target.
        #[arg(long, value_delimiter = ',')]
        languages: Option<Vec<String>>,
        #[arg(long)]
        vocab: Option<usize>,
        #[arg(long)]
        keywords: Option<usize>,
        #[arg(long)]
        labeled: Option<usize>,
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long)]
        tagged: Option<usize>,
    },
}

/// The `[hyper]` section of any config file; other sections are ignored.
#[derive(Deserialize, Default)]
struct HyperOnly {
    #[serde(default)]
    hyper: HyperConfig,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn hyper_config(cli: &Cli) -> Result<HyperConfig> {
    let Some(path) = &cli.config else {
        return Ok(HyperConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let h: HyperOnly = toml::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e.message())))?;
    Ok(h.hyper)
}

fn split_kv<'a>(arg: &'a str, sep: char, what: &str) -> Result<(&'a str, &'a str)> {
    arg.split_once(sep)
        .filter(|(k, v)| !k.is_empty() && !v.is_empty())
        .ok_or_else(|| usage(format!("expected {what}, got `{arg}`")))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn run_plan_command(cli: &Cli, method: Method, args: &PlanArgs) -> Result<()> {
    let path = cli.config.as_ref().ok_or_else(|| usage("this subcommand needs --config <plan.toml>"))?;
    let mut plan = TransferPlan::load(path)?;
    if plan.plan.method != method {
        log::info!("running {method:?} in place of the configured {:?}", plan.plan.method);
        plan.plan.method = method;
    }
    let outcome = run_plan(&plan, cli.seed, cli.threads)?;
    if let Some(out) = &args.out {
        harness::save_predictions(&outcome.labels, out)?;
    }
    if let Some(r) = &args.report {
        outcome.report.save(r)?;
    }
    print!("{}", outcome.report.summary());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let tok = TokenizerConfig::default();
    let hcfg = hyper_config(cli)?;
    let hyper: HyperProfile = hcfg.resolve().map_err(|e| usage(e.to_string()))?;
    match &cli.command {
        Command::Align(a) | Command::Dict(a) => {
            let corpus = load_parallel(&[(&a.src_lang, &a.src), (&a.tgt_lang, &a.tgt)], tok)?;
            let bitext = corpus.bitext(0, 1);
            let opts = Ibm1Options { iterations: a.iterations.unwrap_or(hyper.em_iterations), threads: cli.threads };
            let dir = (a.src_lang.as_str(), a.tgt_lang.as_str());
            if matches!(cli.command, Command::Align(_)) {
                let (table, trace) = train_ibm1_traced(&bitext, dir, opts)?;
                log::info!("log-likelihood {:?}", trace.log_likelihoods);
                table.save(&a.out)?;
            } else {
                let dict = induce_dictionary(&bitext, dir, opts)?;
                println!("{} entries", dict.len());
                dict.save(&a.out)?;
            }
        }
        Command::Codeswitch { corpora, dicts, rate, out } => {
            let mut texts = Vec::new();
            for c in corpora {
                let (lang, path) = split_kv(c, '=', "LANG=PATH")?;
                texts.push(load_monolingual(Path::new(path), lang, tok)?);
            }
            let mut ds = Vec::new();
            for d in dicts {
                let (pair, path) = split_kv(d, '=', "SRC:TGT=PATH")?;
                let (src, tgt) = split_kv(pair, ':', "SRC:TGT=PATH")?;
                ds.push(load_manual_dictionary(Path::new(path), src, tgt)?);
            }
            let rate = rate.unwrap_or(hyper.swap_rate);
            let (switched, stats) = code_switch(&texts, &ds, rate, xlsent::rng::substream(cli.seed, "code-switch"))?;
            println!("{} tokens, {} selected, {} swapped", stats.tokens, stats.selected, stats.swapped);
            write_out(out, &sentences_to_text(&switched))?;
        }
        Command::Embed { inputs, dim, window, negatives, epochs, min_count, out } => {
            let mut corpus = Vec::new();
            for p in inputs {
                corpus.extend(load_monolingual(p, "mixed", tok)?);
            }
            let cfg = SgnsConfig {
                dim: dim.unwrap_or(hyper.dims.d_ce),
                window: *window,
                negatives: *negatives,
                epochs: *epochs,
                min_count: *min_count,
                seed: xlsent::rng::substream(cli.seed, "embed"),
                ..SgnsConfig::default()
            };
            train_sgns(&corpus, &cfg)?.save(out)?;
        }
        Command::Cluster { embeddings, k, out } => {
            let emb = EmbeddingTable::load(embeddings)?;
            let k = k.unwrap_or(hyper.clusters).min(emb.len());
            induce_clusters(&emb, k, xlsent::rng::substream(cli.seed, "cluster"))?.save(out)?;
        }
        Command::TrainTagger { tagged, lang, epochs, out } => {
            let corpus = load_tagged(tagged, lang, tok)?;
            let model = train_tagger(&corpus, epochs.unwrap_or(hyper.tagger_epochs))?;
            println!("training accuracy {:.4}", model.accuracy(&corpus));
            model.save(out)?;
        }
        Command::TrainSent { train, dev, lang, embeddings, clusters, lexicon, multi_source, out } => {
            let train = load_labeled(train, lang, tok)?;
            let dev = dev.as_ref().map(|p| load_labeled(p, lang, tok)).transpose()?;
            let mut res = FeatureResources::bare(hyper.dims.d_ce);
            if let Some(p) = embeddings {
                res.embeddings = EmbeddingTable::load(p)?;
            }
            if let Some(p) = clusters {
                res.clusters = ClusterMap::load(p)?;
            }
            if let Some(p) = lexicon {
                res.lexicon = Some(load_lexicon(p)?);
            }
            let mut cfg = hyper.train_config(*multi_source, xlsent::rng::substream(cli.seed, "train-sent"));
            cfg.dims.d_ce = res.embeddings.dim();
            let (model, report) = nnsent::train(&train, dev.as_ref(), res, &cfg)?;
            if let Some(acc) = report.dev_accuracy.last() {
                println!("dev accuracy {acc:.4}");
            }
            model.save(out)?;
        }
        Command::TrainNbsvm { train, lang, out } => {
            let train = load_labeled(train, lang, tok)?;
            train_nbsvm(&train, &hcfg.nbsvm(xlsent::rng::substream(cli.seed, "nbsvm")))?.save(out)?;
        }
        Command::Project(a) => run_plan_command(cli, Method::Projection, a)?,
        Command::Direct(a) => run_plan_command(cli, Method::DirectConcat, a)?,
        Command::Ensemble { kind, args } => {
            let m = match kind {
                EnsembleKind::Flat => Method::EnsembleFlat,
                EnsembleKind::Kl => Method::EnsembleKl,
            };
            run_plan_command(cli, m, args)?;
        }
        Command::BaselineLexicon(a) => run_plan_command(cli, Method::LexiconBaseline, a)?,
        Command::Eval { pred, gold, report } => {
            let pred = harness::load_predictions(pred)?;
            let gold = load_labeled(gold, "gold", tok)?;
            let r = Report::new("evaluation", Metrics::compute(&pred, &gold.labels())?);
            if let Some(p) = report {
                r.save(p)?;
            }
            print!("{}", r.summary());
        }
        Command::Synth { out, languages, vocab, keywords, labeled, parallel, tagged } => {
            let d = SyntheticSpec::default();
            let spec = SyntheticSpec {
                languages: languages.clone().unwrap_or(d.languages),
                vocab_size: vocab.unwrap_or(d.vocab_size),
                keywords: keywords.unwrap_or(d.keywords),
                labeled_size: labeled.unwrap_or(d.labeled_size),
                parallel_size: parallel.unwrap_or(d.parallel_size),
                tagged_size: tagged.unwrap_or(d.tagged_size),
                ciphers: None,
                seed: cli.seed,
            };
            gen_synthetic(&spec)?.save(out)?;
            println!("wrote synthetic world for {} to {}", spec.languages.join(", "), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
