use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use conceptvec::boc::{
    build_index, read_boc_file, sparse_cosine, write_boc_file, BocRecord, SparseBoc,
};
use conceptvec::corpus::{parse_corpus, AnnotatedDocument, RedirectMap, TokenStream};
use conceptvec::densify::{densify_report, vector_cosine, AlignmentConfig, DenseVector};
use conceptvec::embeddings::{write_binary, write_text, EmbeddingFormat, EmbeddingStore, Matrix};
use conceptvec::eval::{
    assemble_task, classify_dataless, dimension_sweep, evaluate_relatedness, read_gold_tsv,
    read_relatedness_tsv, AlignStrategy, BocSimilarity, CategoryMap, DatalessTask, DenseStrategy,
    EvalReport, SparseStrategy, StrategyKind,
};
use conceptvec::synth::{mini_bundle, CATEGORIES_20NG};
use conceptvec::train::{corpus_pair_count, encode_corpus, Model, TrainConfig, Trainer};
use conceptvec::vocab::{build_vocabulary, KindFilter, MinCount, Vocabulary};
use conceptvec::Error;

use crate::args::*;
use crate::config::{usage, Result, Settings};

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn model(arg: ModelArg) -> Model {
    match arg {
        ModelArg::Crc => Model::Crc,
        ModelArg::ThreeC => Model::ThreeC,
    }
}

fn embedding_format(arg: FormatArg) -> EmbeddingFormat {
    match arg {
        FormatArg::Text => EmbeddingFormat::Text,
        FormatArg::Binary => EmbeddingFormat::Binary,
    }
}

fn strategy_kind(arg: StrategyArg) -> StrategyKind {
    match arg {
        StrategyArg::Sparse => StrategyKind::Sparse,
        StrategyArg::Dense => StrategyKind::Dense,
        StrategyArg::Many => StrategyKind::ManyToMany,
        StrategyArg::Max => StrategyKind::MaxAlign,
        StrategyArg::Hungarian => StrategyKind::Hungarian,
    }
}

fn read_documents(input: &CorpusArgs, settings: &Settings) -> Result<Vec<AnnotatedDocument>> {
    let corpus = settings.required_path(input.corpus.clone(), "corpus")?;
    let redirects = match settings.path(input.redirects.clone(), "redirects")? {
        Some(p) => RedirectMap::read_tsv(open(&p)?, &name(&p))?,
        None => RedirectMap::new(),
    };
    let parsed = parse_corpus(open(&corpus)?, &redirects, &name(&corpus))?;
    log::info!(
        "read {} documents from {} ({} empty skipped, {} redirects)",
        parsed.documents.len(),
        corpus.display(),
        parsed.skipped_empty,
        redirects.len()
    );
    Ok(parsed.documents)
}

fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let store = EmbeddingStore::load(path)?;
    log::info!(
        "loaded {} embeddings of dim {} from {}",
        store.len(),
        store.dim(),
        path.display()
    );
    Ok(store)
}

fn read_bocs(path: &Path) -> Result<Vec<BocRecord>> {
    Ok(read_boc_file(open(path)?, &name(path))?)
}

fn emit_report(report: &EvalReport, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            report.write_csv(create(path)?)?;
            print!("{}", report.to_table());
            log::info!("wrote {}", path.display());
        }
        None => {
            report.write_csv(io::stdout().lock())?;
            eprint!("{}", report.to_table());
        }
    }
    Ok(())
}

pub fn build_vocab(args: BuildVocabArgs, settings: &Settings) -> Result<()> {
    let out = settings.required_path(args.out, "out")?;
    let mode = settings.choice(args.mode, "mode", ModelArg::Crc)?;
    let uniform = settings.opt(args.min_count, "min-count")?;
    let defaults = MinCount::default();
    let min_count = MinCount {
        words: settings
            .opt(args.min_count_words, "min-count-words")?
            .or(uniform)
            .unwrap_or(defaults.words),
        concepts: settings
            .opt(args.min_count_concepts, "min-count-concepts")?
            .or(uniform)
            .unwrap_or(defaults.concepts),
    };
    let model = model(mode);
    log::info!(
        "build-vocab mode={model} min_count_words={} min_count_concepts={}",
        min_count.words,
        min_count.concepts
    );
    let docs = read_documents(&args.input, settings)?;
    let kind = model.stream_kind();
    let streams: Vec<TokenStream> = docs.iter().map(|d| kind.stream(d)).collect();
    let filter = match model {
        Model::Crc => KindFilter::All,
        Model::ThreeC => KindFilter::ConceptsOnly,
    };
    let vocab = build_vocabulary(streams.iter().map(Vec::as_slice), min_count, filter)?;
    vocab.write_tsv(create(&out)?)?;
    log::info!("wrote {} entries to {}", vocab.len(), out.display());
    Ok(())
}

pub fn train(args: TrainArgs, settings: &Settings) -> Result<()> {
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        dim: settings.get(args.dim, "dim", defaults.dim)?,
        window: settings.get(args.window, "window", defaults.window)?,
        negatives: settings.get(args.negatives, "negatives", defaults.negatives)?,
        epochs: settings.get(args.epochs, "epochs", defaults.epochs)?,
        initial_lr: settings.get(args.lr, "lr", defaults.initial_lr)?,
        min_lr: settings.get(args.min_lr, "min-lr", defaults.min_lr)?,
        seed: settings.get(args.seed, "seed", defaults.seed)?,
        workers: settings.get(args.workers, "workers", defaults.workers)?,
        model: model(settings.choice(args.model, "model", ModelArg::Crc)?),
        subsample: settings.opt(args.subsample, "subsample")?,
    };
    let format = settings.choice(args.format, "format", FormatArg::Binary)?;
    log::info!("train {cfg} format={format:?}");
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let vocab_path = settings.required_path(args.vocab, "vocab")?;
    let out = settings.required_path(args.out, "out")?;

    let vocab = Vocabulary::read_tsv(open(&vocab_path)?, &name(&vocab_path))?;
    let docs = read_documents(&args.input, settings)?;
    let kind = cfg.model.stream_kind();
    let streams: Vec<TokenStream> = docs.iter().map(|d| kind.stream(d)).collect();
    let corpus = encode_corpus(&streams, &vocab);

    let mut seen = vec![false; vocab.len()];
    for &id in corpus.iter().flatten() {
        seen[id as usize] = true;
    }
    let unseen: Vec<&str> = seen
        .iter()
        .enumerate()
        .filter(|(_, s)| !**s)
        .map(|(i, _)| vocab.entry(i as u32).key.as_str())
        .collect();
    if !unseen.is_empty() {
        return Err(Error::VocabularyMismatch(format!(
            "{} vocabulary entries never occur in the {} stream (first: {})",
            unseen.len(),
            cfg.model,
            unseen[0]
        ))
        .into());
    }

    let pairs = corpus_pair_count(&corpus, cfg.window);
    let mut trainer = Trainer::<f32>::new(&vocab, &cfg, pairs)?;
    let started = Instant::now();
    let mut tokens = 0u64;
    for _ in 0..cfg.epochs {
        tokens += trainer.run_epoch(&corpus)?.tokens;
    }
    let secs = started.elapsed().as_secs_f64();
    log::info!(
        "trained {} epochs over {} tokens in {secs:.2}s ({:.0} tokens/s)",
        cfg.epochs,
        tokens / cfg.epochs as u64,
        tokens as f64 / secs.max(1e-9)
    );
    trainer.store().save(&out, embedding_format(format))?;
    log::info!("wrote {} embeddings to {}", vocab.len(), out.display());
    Ok(())
}

pub fn build_boc(args: BuildBocArgs, settings: &Settings) -> Result<()> {
    let texts = settings.required_path(args.texts, "texts")?;
    let out = settings.required_path(args.out, "out")?;
    let top_n = settings.get(args.top_n, "top-n", 500usize)?;
    if top_n == 0 {
        return Err(usage("top-n must be at least 1"));
    }
    log::info!("build-boc top_n={top_n}");
    let docs = read_documents(&args.input, settings)?;
    let index = build_index(&docs)?;
    let records = read_texts(&texts)?
        .into_iter()
        .map(|(id, text)| {
            let boc = index.build_boc(&text, top_n);
            if boc.is_empty() {
                log::warn!("record {id} has no indexed term");
            }
            (id, boc)
        })
        .collect::<Vec<_>>();
    write_boc_file(create(&out)?, &records)?;
    log::info!("wrote {} BOC records to {}", records.len(), out.display());
    Ok(())
}

fn read_texts(path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line.split_once('\t').ok_or_else(|| Error::Format {
            source_name: name(path),
            line: idx + 1,
            message: "expected `record_id<TAB>text`".into(),
        })?;
        out.push((id.to_owned(), text.to_owned()));
    }
    Ok(out)
}

pub fn densify(args: DensifyArgs, settings: &Settings) -> Result<()> {
    let boc_path = settings.required_path(args.boc, "boc")?;
    let emb_path = settings.required_path(args.embeddings, "embeddings")?;
    let out = settings.required_path(args.out, "out")?;
    let format = settings.choice(args.format, "format", FormatArg::Text)?;
    log::info!("densify format={format:?}");
    let store = load_embeddings(&emb_path)?;
    let records = read_bocs(&boc_path)?;

    let mut keys = Vec::new();
    let mut data = Vec::new();
    let (mut failed, mut skipped_concepts) = (0usize, 0usize);
    for (id, boc) in &records {
        match densify_report::<f32, _>(boc, &store) {
            Ok(d) => {
                skipped_concepts += d.skipped;
                keys.push(id.clone());
                data.extend_from_slice(d.vector.components());
            }
            Err(e) => {
                log::warn!("record {id}: {e}");
                failed += 1;
            }
        }
    }
    log::info!(
        "densified {} of {} records ({failed} failed, {skipped_concepts} concepts without embedding)",
        keys.len(),
        records.len()
    );
    if keys.is_empty() {
        return Err(Error::NoEmbeddableConcepts {
            skipped: skipped_concepts,
        }
        .into());
    }
    let matrix = Matrix::from_vec(keys.len(), store.dim(), data)?;
    let writer = create(&out)?;
    match format {
        FormatArg::Text => write_text(writer, &keys, &matrix)?,
        FormatArg::Binary => write_binary(writer, &keys, &matrix)?,
    }
    Ok(())
}

pub fn sim(args: SimArgs, settings: &Settings) -> Result<()> {
    let emb_path = settings.path(args.embeddings, "embeddings")?;
    let kind = strategy_kind(settings.choice(args.mechanism, "mechanism", StrategyArg::Dense)?);
    let threshold = settings.get(
        args.threshold,
        "threshold",
        AlignmentConfig::default().threshold,
    )?;

    let value = if let (Some(a), Some(b)) = (&args.a, &args.b) {
        let path = emb_path.ok_or_else(|| usage("--a/--b need --embeddings"))?;
        let store = load_embeddings(&path)?;
        let row = |k: &str| {
            store
                .lookup(k)
                .map(|i| store.embedding(i))
                .ok_or_else(|| Error::UnknownKey(k.to_owned()))
        };
        vector_cosine(row(a)?, row(b)?)?
    } else {
        let boc_path = args
            .boc
            .ok_or_else(|| usage("give either --a/--b or --boc with --boc-a/--boc-b"))?;
        let records = read_bocs(&boc_path)?;
        let find = |id: &Option<String>| -> Result<SparseBoc> {
            let id = id.as_deref().unwrap_or_default();
            records
                .iter()
                .find(|(r, _)| r == id)
                .map(|(_, b)| b.clone())
                .ok_or_else(|| Error::UnknownKey(id.to_owned()).into())
        };
        let (u, v) = (find(&args.boc_a)?, find(&args.boc_b)?);
        if kind == StrategyKind::Sparse {
            sparse_cosine(&u, &v)?
        } else {
            let path =
                emb_path.ok_or_else(|| usage(format!("--mechanism {kind} needs --embeddings")))?;
            let store = load_embeddings(&path)?;
            match kind.mechanism() {
                Some(mechanism) => AlignmentConfig::new(threshold, mechanism)
                    .map_err(|e| usage(e.to_string()))?
                    .similarity(&u, &v, &store)?,
                None => {
                    let du: DenseVector = conceptvec::densify::densify(&u, &store)?;
                    let dv: DenseVector = conceptvec::densify::densify(&v, &store)?;
                    conceptvec::densify::dense_cosine(&du, &dv)?
                }
            }
        }
    };
    println!("{value:.6}");
    Ok(())
}

pub fn eval_relatedness(args: EvalRelatednessArgs, settings: &Settings) -> Result<()> {
    let dataset = settings.required_path(args.dataset, "dataset")?;
    let emb_path = settings.required_path(args.embeddings, "embeddings")?;
    let ks = settings
        .list(args.k, "k")?
        .unwrap_or_else(|| vec![1, 5, 10]);
    let out = settings.path(args.out, "out")?;
    log::info!("eval-relatedness k={ks:?}");
    if ks.contains(&0) {
        return Err(usage("k must be at least 1"));
    }
    let queries = read_relatedness_tsv(open(&dataset)?, &name(&dataset))?;
    let store = load_embeddings(&emb_path)?;
    let report = evaluate_relatedness(&queries, &store, &ks)?;
    emit_report(&report.to_report("cosine"), out.as_deref())
}

fn run_dataless<S: BocSimilarity>(
    task: &DatalessTask,
    strategy: &S,
    sweep: Option<&[usize]>,
) -> Result<EvalReport> {
    Ok(match sweep {
        Some(dims) => dimension_sweep(task, strategy, dims)
            .map_err(|e| usage(e.to_string()))?
            .to_report(),
        None => classify_dataless(task, strategy).to_report(Some(task.max_boc_len())),
    })
}

pub fn eval_dataless(args: EvalDatalessArgs, settings: &Settings) -> Result<()> {
    let labels = settings.required_path(args.labels, "labels")?;
    let instances = settings.required_path(args.instances, "instances")?;
    let gold = settings.required_path(args.gold, "gold")?;
    let categories = settings.path(args.categories, "categories")?;
    let classes = settings.list(args.classes, "classes")?;
    let emb_path = settings.path(args.embeddings, "embeddings")?;
    let kind = strategy_kind(settings.choice(args.strategy, "strategy", StrategyArg::Dense)?);
    let threshold = settings.get(
        args.threshold,
        "threshold",
        AlignmentConfig::default().threshold,
    )?;
    let sweep = settings.list(args.sweep, "sweep")?;
    let out = settings.path(args.out, "out")?;
    log::info!(
        "eval-dataless strategy={kind} threshold={threshold} sweep={}",
        sweep
            .as_ref()
            .map_or("off".to_owned(), |s| format!("{s:?}"))
    );

    let store = match (kind.needs_embeddings(), emb_path) {
        (true, None) => return Err(usage(format!("--strategy {kind} needs --embeddings"))),
        (true, Some(p)) => Some(load_embeddings(&p)?),
        (false, Some(_)) => {
            log::warn!("--strategy sparse ignores --embeddings");
            None
        }
        (false, None) => None,
    };
    let map = match categories {
        Some(p) => Some(CategoryMap::read_tsv(open(&p)?, &name(&p))?),
        None => None,
    };
    let gold = read_gold_tsv(open(&gold)?, &name(&gold))?;
    let (task, stats) = assemble_task(
        read_bocs(&labels)?,
        read_bocs(&instances)?,
        &gold,
        map.as_ref(),
        classes.as_deref(),
    )?;
    log::info!(
        "task: {} labels, {} instances ({} without gold, {} outside the classes, {} merged labels)",
        task.labels().len(),
        task.instances().len(),
        stats.without_gold,
        stats.outside_classes,
        stats.merged_labels
    );

    let sweep = sweep.as_deref();
    let mut report = match (&store, kind.mechanism()) {
        (None, _) => run_dataless(&task, &SparseStrategy, sweep)?,
        (Some(store), None) => run_dataless(&task, &DenseStrategy::new(store), sweep)?,
        (Some(store), Some(mechanism)) => {
            let cfg =
                AlignmentConfig::new(threshold, mechanism).map_err(|e| usage(e.to_string()))?;
            run_dataless(&task, &AlignStrategy::new(store, cfg), sweep)?
        }
    };
    report
        .counts
        .push(("instances_without_gold".into(), stats.without_gold));
    report
        .counts
        .push(("instances_outside_classes".into(), stats.outside_classes));
    emit_report(&report, out.as_deref())
}

pub fn synth(args: SynthArgs, settings: &Settings) -> Result<()> {
    let dir: PathBuf = settings.required_path(args.out_dir, "out-dir")?;
    let seed = settings.get(args.seed, "seed", 7u64)?;
    let top_n = settings.get(args.top_n, "top-n", 100usize)?;
    log::info!("synth seed={seed} top_n={top_n}");
    let bundle = mini_bundle(seed);
    let files = [
        ("corpus.txt", &bundle.corpus),
        ("redirects.tsv", &bundle.redirects),
        ("label_texts.tsv", &bundle.label_texts),
        ("instance_texts.tsv", &bundle.instance_texts),
        ("gold.tsv", &bundle.gold),
        ("relatedness.tsv", &bundle.relatedness),
    ];
    for (file, content) in files {
        let mut w = create(&dir.join(file))?;
        w.write_all(content.as_bytes())?;
        w.flush()?;
    }
    let mut w = create(&dir.join("categories.tsv"))?;
    w.write_all(CATEGORIES_20NG.as_bytes())?;
    w.flush()?;

    let redirects = RedirectMap::read_tsv(bundle.redirects.as_bytes(), "redirects.tsv")?;
    let docs = parse_corpus(bundle.corpus.as_bytes(), &redirects, "corpus.txt")?.documents;
    let index = build_index(&docs)?;
    for (texts, file) in [
        (&bundle.label_texts, "labels.boc"),
        (&bundle.instance_texts, "instances.boc"),
    ] {
        let records: Vec<BocRecord> = texts
            .lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(id, text)| (id.to_owned(), index.build_boc(text, top_n)))
            .collect();
        write_boc_file(create(&dir.join(file))?, &records)?;
    }
    log::info!("wrote mini corpus bundle to {}", dir.display());
    Ok(())
}
