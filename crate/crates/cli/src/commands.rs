//! Subcommand implementations. Diagnostics go to standard error; data goes
//! to standard output or to files (written atomically).

use std::collections::BTreeSet;
use std::fmt::Write as FmtWrite;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use cgd_core::analytics::{self, empirical_cdf, market_estimate, word_frequencies, SiteLexicon};
use cgd_core::corpus::{
    self, estimate_coverage, holdout_filter, load_corpus, load_labels, Corpus, Label,
};
use cgd_core::eval::cross_validate;
use cgd_core::features::{
    build_vocabulary, export_matrix, export_term_scores, load_vocabulary, rank_corpus_terms,
    save_vocabulary, vectorize_corpus, Vocabulary,
};
use cgd_core::model::{load_model, save_model, train_nb, train_ovr, train_svm, Model};
use cgd_core::stopwords;
use cgd_core::synthgen::{generate, SynthConfig};
use cgd_core::util::write_atomic;

use crate::config::Resolved;
use crate::{
    AnalyzeCommand, Command, EvaluateArgs, FeaturizeArgs, IngestArgs, PredictArgs, RankArgs,
    SynthArgs, TrainArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(args) => synth(args),
        Command::Ingest(args) => ingest(args),
        Command::Featurize(args) => featurize(args),
        Command::RankFeatures(args) => rank_features(args),
        Command::Train(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Predict(args) => predict(args),
        Command::Analyze { command } => analyze(command),
    }
}

/// Write to the given path (atomically) or to standard output.
fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_atomic(path, content.as_bytes())
                .with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_corpus_lenient(path: &Path) -> Result<Corpus> {
    let outcome =
        load_corpus(path, false).with_context(|| format!("loading corpus {}", path.display()))?;
    if outcome.skipped_lines > 0 {
        eprintln!("skipped {} malformed lines", outcome.skipped_lines);
    }
    if outcome.synthesized_sellers > 0 {
        eprintln!(
            "synthesized {} sellers for dangling references",
            outcome.synthesized_sellers
        );
    }
    Ok(outcome.corpus)
}

fn load_labeled_corpus(resolved: &Resolved) -> Result<Corpus> {
    let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
    let labels_path = resolved.labels_path()?;
    let (labels, skipped) = load_labels(labels_path, false)
        .with_context(|| format!("loading labels {}", labels_path.display()))?;
    if skipped > 0 {
        eprintln!("skipped {skipped} malformed label lines");
    }
    Ok(corpus.with_labels(labels)?)
}

fn synth(args: SynthArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let weights: Vec<f64> = args
        .type_weights
        .split(',')
        .map(|w| w.trim().parse::<f64>().context("bad type weight"))
        .collect::<Result<_>>()?;
    if weights.len() != 3 {
        bail!(
            "expected three comma-separated type weights, got {:?}",
            args.type_weights
        );
    }
    let config = SynthConfig {
        n_gigs: args.n,
        crowdturf_fraction: args.fraction,
        type_weights: [weights[0], weights[1], weights[2]],
        noise_rate: args.noise_rate,
        metadata_shift: !args.no_metadata_shift,
        seed: resolved.seed,
        ..SynthConfig::default()
    };
    let corpus = generate(&config)?;

    let corpus_path = args
        .out_corpus
        .unwrap_or_else(|| resolved.output_dir.join("corpus.jsonl"));
    let labels_path = args
        .out_labels
        .unwrap_or_else(|| resolved.output_dir.join("labels.jsonl"));
    let mut corpus_bytes = Vec::new();
    corpus::save_corpus(&corpus, &mut corpus_bytes)?;
    write_atomic(&corpus_path, &corpus_bytes)?;
    let mut label_bytes = Vec::new();
    corpus::save_labels(
        corpus.labels.as_ref().expect("generated labels"),
        &mut label_bytes,
    )?;
    write_atomic(&labels_path, &label_bytes)?;
    eprintln!(
        "wrote {} ({} gigs, {} sellers) and {}",
        corpus_path.display(),
        corpus.gigs.len(),
        corpus.sellers.len(),
        labels_path.display()
    );
    Ok(())
}

fn ingest(args: IngestArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let path = resolved.corpus_path()?;
    let outcome = load_corpus(path, args.strict)
        .with_context(|| format!("loading corpus {}", path.display()))?;
    let mut corpus = outcome.corpus;
    if let Some(labels_path) = &resolved.labels {
        let (labels, skipped) = load_labels(labels_path, args.strict)?;
        if skipped > 0 {
            eprintln!("skipped {skipped} malformed label lines");
        }
        corpus = corpus.with_labels(labels)?;
    }
    let report = corpus::validate(&corpus);

    let summary = serde_json::json!({
        "gigs": corpus.gigs.len(),
        "sellers": corpus.sellers.len(),
        "labels": corpus.labels.as_ref().map(|l| l.len()),
        "skipped_lines": outcome.skipped_lines,
        "synthesized_sellers": outcome.synthesized_sellers,
        "issues": report.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if let Some(out) = &args.out {
        let mut bytes = Vec::new();
        corpus::save_corpus(&corpus, &mut bytes)?;
        write_atomic(out, &bytes)?;
        eprintln!("wrote normalized corpus to {}", out.display());
    }
    if !report.is_clean() {
        bail!("validation found {} issue(s)", report.issues.len());
    }
    Ok(())
}

fn featurize(args: FeaturizeArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
    let vocab = build_vocabulary(&corpus, &resolved.spec)?;
    let vectors = vectorize_corpus(&corpus, &vocab, &resolved.spec)?;
    let rows: Vec<(u64, _)> = corpus.gigs.iter().map(|g| g.gig_id).zip(vectors).collect();
    let mut bytes = Vec::new();
    export_matrix(&mut bytes, &vocab, &resolved.spec, &rows)?;
    if let Some(vocab_out) = &args.vocab_out {
        save_vocabulary(&vocab, vocab_out)?;
        eprintln!("wrote vocabulary to {}", vocab_out.display());
    }
    emit(
        args.out.as_deref(),
        std::str::from_utf8(&bytes).expect("utf8"),
    )
}

fn rank_features(args: RankArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let corpus = load_labeled_corpus(&resolved)?;
    let vocab = build_vocabulary(&corpus, &resolved.spec)?;
    let mut scores = rank_corpus_terms(&corpus, &vocab, &resolved.spec)?;
    if let Some(top) = args.top {
        scores.truncate(top);
    }
    let mut bytes = Vec::new();
    export_term_scores(&mut bytes, &scores)?;
    emit(
        args.out.as_deref(),
        std::str::from_utf8(&bytes).expect("utf8"),
    )
}

fn train(args: TrainArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let corpus = load_labeled_corpus(&resolved)?;
    let labels: Vec<Label> = corpus
        .gigs
        .iter()
        .map(|g| {
            corpus
                .label_of(g.gig_id)
                .map(|l| l.label)
                .ok_or(cgd_core::Error::UnlabeledGig(g.gig_id))
        })
        .collect::<cgd_core::Result<_>>()?;

    let vocab = build_vocabulary(&corpus, &resolved.spec)?;
    let model_path = args
        .out
        .unwrap_or_else(|| resolved.output_dir.join("model.cgdm"));
    let vocab_path = args
        .vocab_out
        .unwrap_or_else(|| default_vocab_path(&model_path));
    save_vocabulary(&vocab, &vocab_path)?;
    eprintln!("wrote vocabulary to {}", vocab_path.display());

    let model = match args.algorithm.as_str() {
        "svm" => {
            let vectors = vectorize_corpus(&corpus, &vocab, &resolved.spec)?;
            let m = train_svm(&vectors, &labels, &resolved.train)?;
            eprintln!(
                "trained svm: objective {} after {} epochs",
                m.objective(),
                m.epochs_run()
            );
            Model::Linear(m)
        }
        "nb" => {
            let vectors: Vec<_> = corpus
                .gigs
                .iter()
                .map(|g| {
                    let seller = corpus.seller_of(g).expect("resolved seller");
                    cgd_core::features::vectorize_counts(g, seller, &vocab, &resolved.spec)
                })
                .collect::<cgd_core::Result<_>>()?;
            Model::NaiveBayes(train_nb(&vectors, &labels, args.alpha)?)
        }
        other => bail!("unknown algorithm {other:?} (svm|nb)"),
    };
    save_model(&model, &model_path)?;
    eprintln!("wrote {} model to {}", model.kind(), model_path.display());

    if let Some(stage2_path) = &args.stage2_out {
        let vectors = vectorize_corpus(&corpus, &vocab, &resolved.spec)?;
        let mut crowd_vectors = Vec::new();
        let mut crowd_types = Vec::new();
        for (gig, vector) in corpus.gigs.iter().zip(vectors) {
            let label = corpus.label_of(gig.gig_id).expect("labeled");
            if label.label == Label::Crowdturfing {
                let kind = label.kind.ok_or_else(|| {
                    anyhow::anyhow!("gig {} is crowdturfing but has no type", gig.gig_id)
                })?;
                crowd_vectors.push(vector);
                crowd_types.push(kind);
            }
        }
        let ovr = train_ovr(&crowd_vectors, &crowd_types, &resolved.train)?;
        save_model(&Model::OneVsRest(ovr), stage2_path)?;
        eprintln!("wrote ovr model to {}", stage2_path.display());
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let corpus = load_labeled_corpus(&resolved)?;
    let report = cross_validate(
        &corpus,
        &resolved.spec,
        &resolved.train,
        resolved.k,
        resolved.seed,
    )?;
    let out = args
        .out
        .unwrap_or_else(|| resolved.output_dir.join("cv_report.json"));
    write_atomic(&out, report.to_json().as_bytes())?;
    eprintln!("wrote {}", out.display());
    print!("{}", report.summary_table());
    Ok(())
}

fn default_vocab_path(model_path: &Path) -> PathBuf {
    let mut name = model_path.as_os_str().to_owned();
    name.push(".vocab");
    PathBuf::from(name)
}

fn stage1_decision(model: &Model, vector: &cgd_core::FeatureVector) -> Result<(Label, f64)> {
    match model {
        Model::Linear(m) => Ok((m.classify(vector)?, m.score(vector)?)),
        Model::NaiveBayes(m) => {
            let post = m.log_posterior(vector)?;
            Ok((m.predict(vector)?, post[1] - post[0]))
        }
        Model::OneVsRest(_) => bail!("stage-1 model must be linear or nb, got ovr"),
    }
}

fn predict(args: PredictArgs) -> Result<()> {
    let resolved = crate::config::resolve(&args.common)?;
    let mut corpus = load_corpus_lenient(resolved.corpus_path()?)?;

    if let Some(holdout_path) = &args.holdout_labels {
        let (labels, _) = load_labels(holdout_path, false)?;
        let ids: BTreeSet<u64> = labels.keys().copied().collect();
        let before = corpus.gigs.len();
        corpus = holdout_filter(&corpus, &ids)?;
        eprintln!(
            "holdout filter removed {} of {before} gigs",
            before - corpus.gigs.len()
        );
    }

    let vocab_path = args
        .vocab
        .clone()
        .unwrap_or_else(|| default_vocab_path(&args.model));
    let vocab: Vocabulary = load_vocabulary(&vocab_path)
        .with_context(|| format!("loading vocabulary {}", vocab_path.display()))?;
    let stage1 = load_model(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let stage2 = match &args.stage2 {
        Some(path) => match load_model(path)? {
            Model::OneVsRest(m) => Some(m),
            other => bail!("stage-2 model must be ovr, got {}", other.kind()),
        },
        None => None,
    };

    let needs_counts = matches!(stage1, Model::NaiveBayes(_));
    let mut out = String::new();
    for gig in &corpus.gigs {
        let seller = corpus
            .seller_of(gig)
            .ok_or(cgd_core::Error::DanglingSeller {
                gig_id: gig.gig_id,
                seller_id: gig.seller_id.clone(),
            })?;
        let vector = if needs_counts {
            cgd_core::features::vectorize_counts(gig, seller, &vocab, &resolved.spec)?
        } else {
            cgd_core::features::vectorize(gig, seller, &vocab, &resolved.spec)?
        };
        let (label, score) = stage1_decision(&stage1, &vector)?;
        let kind = match (&stage2, label) {
            (Some(ovr), Label::Crowdturfing) => {
                // stage 2 runs only on stage-1 positives
                let tfidf = if needs_counts {
                    cgd_core::features::vectorize(gig, seller, &vocab, &resolved.spec)?
                } else {
                    vector.clone()
                };
                ovr.classify_type(&tfidf)?.to_string()
            }
            _ => String::new(),
        };
        writeln!(out, "{}\t{label}\t{score}\t{kind}", gig.gig_id).expect("string");
    }
    emit(args.out.as_deref(), &out)
}

fn analyze(command: AnalyzeCommand) -> Result<()> {
    match command {
        AnalyzeCommand::Words {
            common,
            top,
            only,
            out,
        } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let label_filter: Option<(BTreeSet<u64>, Label)> = match (only, &resolved.labels) {
                (Some(which), Some(path)) => {
                    let (labels, _) = load_labels(path, false)?;
                    let keep = labels
                        .iter()
                        .filter(|(_, l)| l.label == which)
                        .map(|(id, _)| *id)
                        .collect();
                    Some((keep, which))
                }
                (Some(_), None) => bail!("--only requires --labels"),
                _ => None,
            };
            let titles: Vec<String> = corpus
                .gigs
                .iter()
                .filter(|g| match &label_filter {
                    Some((keep, _)) => keep.contains(&g.gig_id),
                    None => true,
                })
                .map(|g| g.title.clone())
                .collect();
            let stop = stopwords::by_id(&resolved.spec.stopword_list)?;
            let mut freqs = word_frequencies(&titles, &stop);
            if let Some(top) = top {
                freqs.truncate(top);
            }
            let mut text = String::new();
            for f in &freqs {
                writeln!(text, "{}\t{}", f.term, f.count).expect("string");
            }
            emit(out.as_deref(), &text)
        }
        AnalyzeCommand::Pagerank { common, out } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let mentions = analytics::pagerank_mentions(&corpus);
            eprintln!(
                "{} of {} titles advertise a PageRank score",
                mentions.len(),
                corpus.gigs.len()
            );
            let mut counts = [0u64; 9];
            for m in &mentions {
                counts[m.pr_score as usize - 1] += 1;
            }
            let mut text = String::new();
            for (i, count) in counts.iter().enumerate() {
                writeln!(text, "PR{}\t{count}", i + 1).expect("string");
            }
            emit(out.as_deref(), &text)
        }
        AnalyzeCommand::Visitors { common, out } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let claims = analytics::visitor_claims(&corpus);
            let ambiguous = claims.iter().filter(|c| c.ambiguous).count();
            eprintln!(
                "{} of {} titles promise visitors ({ambiguous} ambiguous)",
                claims.len(),
                corpus.gigs.len()
            );
            if claims.is_empty() {
                bail!("no visitor claims found");
            }
            let values: Vec<u64> = claims.iter().map(|c| c.visitors).collect();
            let mut text = String::new();
            for p in empirical_cdf(&values)? {
                writeln!(text, "{}\t{}", p.x, p.fraction).expect("string");
            }
            emit(out.as_deref(), &text)
        }
        AnalyzeCommand::Sites {
            common,
            lexicon,
            out,
        } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let lexicon = match lexicon {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading lexicon {}", path.display()))?;
                    SiteLexicon::parse(path.display().to_string(), &text)?
                }
                None => SiteLexicon::builtin(),
            };
            let titles: Vec<String> = corpus.gigs.iter().map(|g| g.title.clone()).collect();
            let histogram = analytics::target_site_histogram(&titles, &lexicon);
            eprintln!("lexicon: {}", histogram.lexicon_version);
            let mut rows: Vec<(&String, &u64)> = histogram.counts.iter().collect();
            rows.sort_by(|x, y| y.1.cmp(x.1).then_with(|| x.0.cmp(y.0)));
            let mut text = String::new();
            for (site, count) in rows {
                writeln!(text, "{site}\t{count}").expect("string");
            }
            emit(out.as_deref(), &text)
        }
        AnalyzeCommand::Market { common, top, out } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let estimate = market_estimate(&corpus, top);
            emit(
                out.as_deref(),
                &format!("{}\n", serde_json::to_string_pretty(&estimate)?),
            )
        }
        AnalyzeCommand::Timeline { common, out } => {
            let resolved = crate::config::resolve(&common)?;
            let corpus = load_corpus_lenient(resolved.corpus_path()?)?;
            let timeline = analytics::creation_timeline(&corpus.gigs);
            let mut text = String::new();
            for (year, cumulative) in timeline {
                writeln!(text, "{year}\t{cumulative}").expect("string");
            }
            emit(out.as_deref(), &text)
        }
        AnalyzeCommand::Coverage {
            sampled,
            active,
            overlap,
        } => {
            eprintln!(
                "config: {{\"sampled\":{sampled},\"active\":{active},\"overlap\":{overlap}}}"
            );
            let coverage = estimate_coverage(sampled, active, overlap)?;
            println!("{coverage:.4}");
            Ok(())
        }
    }
}

pub(crate) fn parse_only(value: &str) -> Result<Label, String> {
    match value {
        "crowdturfing" => Ok(Label::Crowdturfing),
        "legitimate" => Ok(Label::Legitimate),
        other => Err(format!("bad label {other:?} (crowdturfing|legitimate)")),
    }
}
