//! Implementations of the subcommands. Each one reads its inputs, writes
//! its outputs through an [`OutputDir`] and returns a short summary.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::args::{
    EmbedArgs, EmbeddingArgs, EvaluateArgs, FisherArgs, LooArgs, PredictArgs, PromptArgs, ProviderKind,
    RankModelsArgs, SimilarityArgs, StrategyArgs, SweepArgs, ValidateArgs,
};
use super::manifest::OutputDir;
use super::CliError;
use crate::baselines::{BaselineOptions, LdaConfig};
use crate::corpus::{sentence_units, Corpus};
use crate::embeddings::{
    build_similarity_matrix, load_embedding_set, EmbeddingProvider, EmbeddingSet, HashProvider, HttpProvider,
    SimilarityMatrix,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    confusion, fisher_exact, link_metrics, pooled_pairs, rank_models, requirement_level_report, roc_auc, roc_csv,
    roc_curve, sweep_thresholds_between, AucMode, ContingencyTable2x2, DocumentRow, LinkMetrics, MetricsReport,
    ModelEmbeddings, TextTable, RANKING_AUC,
};
use crate::linker::{predict_constant, predict_delta, sweep_thresholds, PredictionSet};
use crate::pipeline::{run_loo, EmbeddingInputs, LooConfig, Strategy, StrategyConfig, StrategyRunner};
use crate::prompting::{
    load_examples, plan_prompts, requests_per_requirement, run_prompt_strategy, ChatBackend, HttpChat, LlmConfig,
    PromptInputs, PromptVariant, Transcript, NO_CODE,
};

/// What a command read and what it wants printed.
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub summary: String,
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    Corpus::load(path)
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value serializes") + "\n"
}

fn all_requirement_ids(corpus: &Corpus) -> Vec<String> {
    corpus.requirements().map(|r| r.id.clone()).collect()
}

fn write_predictions(out: &mut OutputDir, name: &str, pred: &PredictionSet) -> Result<()> {
    let path = out.path(name);
    pred.save(&path)?;
    out.record(name, true)?;
    let side = PredictionSet::sidecar_path(&path);
    let side_name = side.file_name().and_then(|n| n.to_str()).expect("sidecar has a file name");
    out.record(side_name, true)
}

/// Requirement (and, when asked, sentence) vectors plus provision vectors.
pub struct ResolvedEmbeddings {
    pub requirements: EmbeddingSet,
    pub provisions: EmbeddingSet,
    pub inputs: Vec<PathBuf>,
}

impl ResolvedEmbeddings {
    pub fn inputs(&self) -> EmbeddingInputs<'_> {
        EmbeddingInputs {
            requirements: &self.requirements,
            provisions: &self.provisions,
        }
    }
}

fn requirement_texts(corpus: &Corpus, sentence_level: bool) -> Vec<(String, String)> {
    let mut texts: Vec<(String, String)> = corpus.requirements().map(|r| (r.id.clone(), r.text.clone())).collect();
    if sentence_level {
        texts.extend(sentence_units(corpus.requirements()).into_iter().map(|u| (u.unit_id, u.text)));
    }
    texts
}

fn provision_texts(corpus: &Corpus) -> Vec<(String, String)> {
    corpus.catalog().iter().map(|p| (p.code.clone(), p.text())).collect()
}

fn check_id_collisions(corpus: &Corpus, sentence_level: bool) -> Result<()> {
    let reqs: BTreeSet<String> = requirement_texts(corpus, sentence_level).into_iter().map(|(id, _)| id).collect();
    match corpus.provision_codes().into_iter().find(|c| reqs.contains(c)) {
        Some(code) => Err(Error::invalid(
            "corpus",
            format!("`{code}` is both a requirement id and a provision code, so one embedding file cannot hold both"),
        )),
        None => Ok(()),
    }
}

pub fn resolve_embeddings(corpus: &Corpus, args: &EmbeddingArgs, seed: u64) -> Result<ResolvedEmbeddings, CliError> {
    let reqs = requirement_texts(corpus, args.sentence_level);
    let provs = provision_texts(corpus);
    let embed = |p: &dyn EmbeddingProvider| -> Result<(EmbeddingSet, EmbeddingSet)> {
        Ok((p.embed(&reqs)?, p.embed(&provs)?))
    };
    let mut inputs = Vec::new();
    let (requirements, provisions) = match args.provider_kind() {
        ProviderKind::Hash => embed(&HashProvider::new(args.dim, seed))?,
        ProviderKind::File => {
            let path = args
                .embeddings
                .as_ref()
                .ok_or_else(|| CliError::Usage("--provider file needs --embeddings".into()))?;
            let set = load_embedding_set(path)?;
            inputs.push(path.clone());
            (
                set.restrict(reqs.iter().map(|(id, _)| id.as_str()))?,
                set.restrict(provs.iter().map(|(id, _)| id.as_str()))?,
            )
        }
        ProviderKind::Http => {
            let config = args
                .http_config()
                .ok_or_else(|| CliError::Usage("--provider http needs --endpoint".into()))?;
            embed(&HttpProvider::new(config)?)?
        }
    };
    Ok(ResolvedEmbeddings {
        requirements,
        provisions,
        inputs,
    })
}

fn strategy_config(args: &StrategyArgs, seed: u64, sentence_level: bool) -> StrategyConfig {
    StrategyConfig {
        theta: args.theta,
        negative_sample: args.negatives,
        seed,
        baselines: BaselineOptions {
            lsi_k: args.k,
            lda: LdaConfig {
                topics: args.topics,
                iterations: args.lda_iterations,
                seed,
                ..LdaConfig::default()
            },
            max_df: args.max_df,
        },
        sentence_level,
        ..StrategyConfig::default()
    }
}

pub fn validate(args: &ValidateArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let documents: Vec<_> = corpus
        .documents()
        .iter()
        .map(|d| {
            let links: usize = d.requirements.iter().map(|r| corpus.ground_truth().links_for(&r.id).len()).sum();
            json!({"id": d.id, "name": d.name, "requirements": d.requirements.len(), "links": links})
        })
        .collect();
    let report = json!({
        "valid": true,
        "documents": corpus.documents().len(),
        "requirements": corpus.num_requirements(),
        "provisions": corpus.catalog().len(),
        "links": corpus.ground_truth().len(),
        "per_document": documents,
    });
    out.write("validation.json", &pretty(&report))?;
    Ok(Outcome {
        inputs: vec![args.corpus.clone()],
        summary: format!(
            "ok: {} documents, {} requirements, {} provisions, {} links",
            corpus.documents().len(),
            corpus.num_requirements(),
            corpus.catalog().len(),
            corpus.ground_truth().len()
        ),
    })
}

pub fn embed(args: &EmbedArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    check_id_collisions(&corpus, args.embedding.sentence_level)?;
    let resolved = resolve_embeddings(&corpus, &args.embedding, args.common.seed)?;
    let mut all = resolved.requirements.clone();
    all.extend(&resolved.provisions)?;
    out.write("embeddings.json", &(all.to_json() + "\n"))?;
    let mut inputs = vec![args.corpus.clone()];
    inputs.extend(resolved.inputs);
    Ok(Outcome {
        inputs,
        summary: format!("embedded {} texts, dim {} ({})", all.len(), all.dim(), all.provider()),
    })
}

fn embedding_matrix(corpus: &Corpus, resolved: &ResolvedEmbeddings, sentence_level: bool) -> Result<SimilarityMatrix> {
    let codes = corpus.provision_codes();
    if sentence_level {
        let units = sentence_units(corpus.requirements());
        let ids: Vec<String> = units.iter().map(|u| u.unit_id.clone()).collect();
        let parents: HashMap<String, String> = units.into_iter().map(|u| (u.unit_id, u.parent_id)).collect();
        build_similarity_matrix(&resolved.requirements, &ids, &resolved.provisions, &codes)?.max_pool(&parents)
    } else {
        build_similarity_matrix(&resolved.requirements, &all_requirement_ids(corpus), &resolved.provisions, &codes)
    }
}

pub fn similarity(args: &SimilarityArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let resolved = resolve_embeddings(&corpus, &args.embedding, args.common.seed)?;
    let matrix = embedding_matrix(&corpus, &resolved, args.embedding.sentence_level)?;
    out.write("similarity.json", &(matrix.to_json() + "\n"))?;
    let mut inputs = vec![args.corpus.clone()];
    inputs.extend(resolved.inputs);
    Ok(Outcome {
        inputs,
        summary: format!("similarity matrix {} x {}", matrix.n_rows(), matrix.n_cols()),
    })
}

fn doc_set(corpus: &Corpus, ids: &[String]) -> Result<BTreeSet<String>> {
    corpus.check_doc_ids(ids)?;
    Ok(ids.iter().cloned().collect())
}

pub fn predict(args: &PredictArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    if let Some(matrix_path) = &args.matrix {
        let matrix = SimilarityMatrix::load(matrix_path)?;
        let pred = match args.strategy {
            Strategy::Constant => predict_constant(&matrix, args.strategy_args.theta)?,
            Strategy::Delta => predict_delta(&matrix)?,
            other => {
                return Err(CliError::Usage(format!(
                    "--matrix supports the constant and delta strategies; {other} needs --corpus"
                )))
            }
        };
        write_predictions(out, "predictions.json", &pred)?;
        return Ok(Outcome {
            inputs: vec![matrix_path.clone()],
            summary: format!("{}: {} links over {} requirements", args.strategy, pred.num_links(), matrix.n_rows()),
        });
    }
    let corpus_path = args
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::Usage("predict needs --corpus or --matrix".into()))?;
    let corpus = load_corpus(corpus_path)?;
    let test_docs = if args.test_docs.is_empty() {
        corpus.doc_ids().into_iter().collect()
    } else {
        doc_set(&corpus, &args.test_docs)?
    };
    let train_docs = if args.train_docs.is_empty() {
        let rest: BTreeSet<String> = corpus.doc_ids().into_iter().filter(|d| !test_docs.contains(d)).collect();
        if rest.is_empty() {
            test_docs.clone()
        } else {
            rest
        }
    } else {
        doc_set(&corpus, &args.train_docs)?
    };
    let test_ids: Vec<String> = corpus.requirements_in(&test_docs).iter().map(|r| r.id.clone()).collect();
    let config = strategy_config(&args.strategy_args, args.common.seed, args.embedding.sentence_level);
    let mut inputs = vec![corpus_path.clone()];
    let resolved = if args.strategy.needs_embeddings() {
        Some(resolve_embeddings(&corpus, &args.embedding, args.common.seed)?)
    } else {
        None
    };
    if let Some(r) = &resolved {
        inputs.extend(r.inputs.iter().cloned());
    }
    let mut runner = StrategyRunner::new(&corpus, resolved.as_ref().map(ResolvedEmbeddings::inputs), &config);
    let (pred, matrix) = runner.run(args.strategy, &train_docs, &test_ids)?;
    write_predictions(out, "predictions.json", &pred)?;
    out.write("matrix.json", &(matrix.to_json() + "\n"))?;
    if let Some(curve) = runner.last_curve() {
        out.write("curve.csv", &curve.to_csv())?;
    }
    let theta = runner
        .last_curve()
        .map(|c| format!(", tuned theta {}", c.best_theta))
        .unwrap_or_default();
    Ok(Outcome {
        inputs,
        summary: format!(
            "{}: {} links over {} requirements{theta}",
            args.strategy,
            pred.num_links(),
            test_ids.len()
        ),
    })
}

fn prompt_file_name(req_id: &str, code: &str) -> String {
    let safe = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect()
    };
    if code == NO_CODE {
        format!("prompts/{}.txt", safe(req_id))
    } else {
        format!("prompts/{}__{}.txt", safe(req_id), safe(code))
    }
}

pub fn prompt(args: &PromptArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let mut inputs = vec![args.corpus.clone()];
    let examples = match &args.examples {
        Some(p) => {
            inputs.push(p.clone());
            load_examples(p)?
        }
        None if args.variant == PromptVariant::Rice => {
            return Err(CliError::Usage("--variant rice needs --examples".into()));
        }
        None => Vec::new(),
    };
    let embeddings = if args.variant == PromptVariant::P1 {
        let emb = EmbeddingArgs {
            embeddings: args.embeddings.clone(),
            provider: None,
            dim: args.dim,
            endpoint: None,
            embedding_model: String::new(),
            sentence_level: false,
        };
        let r = resolve_embeddings(&corpus, &emb, args.common.seed)?;
        inputs.extend(r.inputs.iter().cloned());
        Some(r)
    } else {
        None
    };
    let prompt_inputs = PromptInputs {
        corpus: &corpus,
        examples: &examples,
        req_embeddings: embeddings.as_ref().map(|e| &e.requirements),
        prov_embeddings: embeddings.as_ref().map(|e| &e.provisions),
        k: args.k,
    };
    let req_ids = if args.requirements.is_empty() {
        all_requirement_ids(&corpus)
    } else {
        args.requirements.clone()
    };

    if args.dry_run {
        let items = plan_prompts(args.variant, &prompt_inputs, &req_ids)?;
        std::fs::create_dir_all(out.path("prompts")).map_err(|e| Error::io(out.path("prompts"), e))?;
        let mut lines = String::new();
        for item in &items {
            out.write(&prompt_file_name(&item.key.req_id, &item.key.code), &item.prompt)?;
            let line = json!({
                "variant": item.key.variant,
                "req_id": item.key.req_id,
                "code": item.key.code,
                "prompt": item.prompt,
            });
            lines.push_str(&serde_json::to_string(&line).expect("json value serializes"));
            lines.push('\n');
        }
        out.write("prompts.jsonl", &lines)?;
        let per_req = requests_per_requirement(&items);
        return Ok(Outcome {
            inputs,
            summary: format!(
                "dry run: {} {} prompts for {} requirements, no requests sent",
                items.len(),
                args.variant,
                per_req.len()
            ),
        });
    }

    let config = LlmConfig {
        endpoint_url: args.endpoint.clone(),
        model_name: args.model.clone(),
        seed: args.common.seed as i64,
        ..LlmConfig::default()
    };
    config.validate()?;
    let backend: Box<dyn ChatBackend> = match &args.replay_from {
        Some(p) => {
            inputs.push(p.clone());
            Box::new(Transcript::open(p)?.replay_backend())
        }
        None => Box::new(HttpChat::new(config.clone())?),
    };
    let transcript_path = args.transcript.clone().unwrap_or_else(|| out.path("transcript.jsonl"));
    let mut transcript = Transcript::open(&transcript_path)?;
    let snapshot = serde_json::to_value(&config).expect("config serializes");
    let run = run_prompt_strategy(
        args.variant,
        &prompt_inputs,
        &req_ids,
        backend.as_ref(),
        &snapshot,
        &mut transcript,
        args.parallel,
    )?;
    write_predictions(out, "predictions.json", &run.predictions)?;
    out.write(
        "failures.json",
        &(serde_json::to_string_pretty(&run.failures).expect("failures serialize") + "\n"),
    )?;
    if transcript_path.exists() {
        out.record(&transcript_path.to_string_lossy(), false)?;
    }
    Ok(Outcome {
        inputs,
        summary: format!(
            "{}: {} links, {} requests sent, {} failures",
            args.variant,
            run.predictions.num_links(),
            run.requests_sent,
            run.failures.len()
        ),
    })
}

pub fn evaluate(args: &EvaluateArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let pred = PredictionSet::load(&args.predictions)?;
    let mut inputs = vec![args.corpus.clone(), args.predictions.clone()];
    let matrix = match &args.matrix {
        Some(p) => {
            inputs.push(p.clone());
            Some(SimilarityMatrix::load(p)?)
        }
        None => None,
    };
    let docs: Vec<String> = if args.docs.is_empty() {
        corpus.doc_ids()
    } else {
        corpus.check_doc_ids(&args.docs)?;
        args.docs.clone()
    };
    let gt = corpus.ground_truth();
    let codes = corpus.provision_codes();
    let mut rows = Vec::new();
    let mut evaluated = Vec::new();
    for doc in &docs {
        let ids: Vec<String> = corpus
            .requirements_in(&BTreeSet::from([doc.clone()]))
            .iter()
            .map(|r| r.id.clone())
            .collect();
        let metrics = match &matrix {
            Some(m) => link_metrics(&pred, gt, &m.select_rows(ids.iter().map(String::as_str))?, AucMode::Full)?,
            None => {
                let keys = || ids.iter().map(String::as_str);
                LinkMetrics::from_counts(confusion(&pred.restrict(keys()), &gt.restrict(keys()), &ids, &codes)?)
            }
        };
        rows.push(DocumentRow {
            doc_id: doc.clone(),
            metrics,
        });
        evaluated.extend(ids);
    }
    let tag = if pred.strategy_tag().is_empty() {
        "predictions".to_owned()
    } else {
        pred.strategy_tag().to_owned()
    };
    let mut report = MetricsReport::from_documents(tag, rows);
    let level = requirement_level_report(&pred, gt, &evaluated, codes.len(), args.match_mode)?;
    report.requirement_level = Some(level);
    out.write("report.json", &(report.to_json() + "\n"))?;
    let text = format!("{}\n{}", report.to_table(), requirement_level_text(&level));
    out.write("report.txt", &text)?;
    Ok(Outcome {
        inputs,
        summary: text,
    })
}

fn requirement_level_text(r: &crate::evaluation::RequirementLevelReport) -> String {
    format!(
        "requirements: {}  exact: {}  partial: {}  incorrect: {}  success rate: {:.1}  macro recall: {:.1}  cost: {:.1}\n",
        r.n_requirements,
        r.exact_match,
        r.partial_match,
        r.incorrect,
        r.success_rate * 100.0,
        r.macro_recall * 100.0,
        r.cost * 100.0
    )
}

pub fn sweep(args: &SweepArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let mut inputs = vec![args.corpus.clone()];
    let matrix = match &args.matrix {
        Some(p) => {
            inputs.push(p.clone());
            SimilarityMatrix::load(p)?
        }
        None => {
            let resolved = resolve_embeddings(&corpus, &args.embedding, args.common.seed)?;
            inputs.extend(resolved.inputs.iter().cloned());
            embedding_matrix(&corpus, &resolved, args.embedding.sentence_level)?
        }
    };
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let curve = sweep_thresholds(&matrix, corpus.ground_truth(), args.points)?;
    let gt = corpus.ground_truth().restrict(matrix.req_ids().iter().map(String::as_str));
    let (scores, labels) = pooled_pairs(&matrix, &gt);
    let AucMode::ThresholdSweep { lo, hi, step } = RANKING_AUC else {
        unreachable!("ranking AUC is a threshold sweep")
    };
    let roc = roc_curve(&scores, &labels, &sweep_thresholds_between(lo, hi, step));
    let auc = |mode| roc_auc(&scores, &labels, mode).ok();
    out.write("sweep.csv", &curve.to_csv())?;
    out.write("roc.csv", &roc_csv(&roc))?;
    let summary = json!({
        "points": args.points,
        "best_theta": curve.best_theta,
        "best_f2": curve.best_f2(),
        "auc_sweep": auc(RANKING_AUC),
        "auc_full": auc(AucMode::Full),
    });
    out.write("sweep.json", &pretty(&summary))?;
    Ok(Outcome {
        inputs,
        summary: format!(
            "best theta {} (F2 {:.1}) over {} points",
            curve.best_theta,
            curve.best_f2() * 100.0,
            args.points
        ),
    })
}

pub fn loo(args: &LooArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let mut inputs = vec![args.corpus.clone()];
    let resolved = if args.strategies.iter().any(Strategy::needs_embeddings) {
        let r = resolve_embeddings(&corpus, &args.embedding, args.common.seed)?;
        inputs.extend(r.inputs.iter().cloned());
        Some(r)
    } else {
        None
    };
    let mut strategy = strategy_config(&args.strategy_args, args.common.seed, args.embedding.sentence_level);
    strategy.match_mode = args.match_mode;
    let config = LooConfig {
        strategies: args.strategies.clone(),
        excluded_docs: args.exclude.iter().cloned().collect(),
        strategy,
    };
    corpus.check_doc_ids(&args.exclude)?;
    let outcome = run_loo(&corpus, resolved.as_ref().map(ResolvedEmbeddings::inputs), &config)?;
    let mut table = TextTable::new(&["Strategy", "TP", "FP", "FN", "P", "R", "F2", "MAP", "AUC", "SR", "MR"]);
    let mut summary_rows = Vec::new();
    for (name, report) in &outcome.reports {
        out.write(&format!("loo_{name}.json"), &(report.to_json() + "\n"))?;
        let level = report.requirement_level.expect("loo reports carry requirement-level metrics");
        out.write(
            &format!("loo_{name}.txt"),
            &format!("{}\n{}", report.to_table(), requirement_level_text(&level)),
        )?;
        write_predictions(out, &format!("predictions_{name}.json"), &outcome.predictions[name])?;
        let c = report.pooled.counts;
        let pct = crate::evaluation::percent;
        table.row(vec![
            name.clone(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            pct(report.precision.mean),
            pct(report.recall.mean),
            pct(report.f2.mean),
            pct(report.map.mean),
            pct(report.auc.mean),
            pct(Some(level.success_rate)),
            pct(Some(level.macro_recall)),
        ]);
        summary_rows.push(json!({
            "strategy": name,
            "pooled": report.pooled,
            "precision": report.precision,
            "recall": report.recall,
            "f2": report.f2,
            "map": report.map,
            "auc": report.auc,
            "requirement_level": level,
        }));
    }
    out.write("summary.json", &pretty(&json!(summary_rows)))?;
    let text = table.render();
    out.write("summary.txt", &text)?;
    Ok(Outcome { inputs, summary: text })
}

pub fn rank_models_cmd(args: &RankModelsArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    if args.embeddings.is_empty() && args.hash_dims.is_empty() {
        return Err(CliError::Usage("rank-models needs --embeddings or --hash-dims".into()));
    }
    let corpus = load_corpus(&args.corpus)?;
    let mut inputs = vec![args.corpus.clone()];
    let req_ids = all_requirement_ids(&corpus);
    let codes = corpus.provision_codes();
    let mut models = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for path in &args.embeddings {
        let set = load_embedding_set(path)?;
        inputs.push(path.clone());
        let n = seen.entry(set.provider().to_owned()).or_default();
        *n += 1;
        let tag = if *n == 1 {
            set.provider().to_owned()
        } else {
            format!("{}#{}", set.provider(), n)
        };
        models.push(ModelEmbeddings {
            tag,
            requirements: set.restrict(req_ids.iter().map(String::as_str))?,
            provisions: set.restrict(codes.iter().map(String::as_str))?,
        });
    }
    for &dim in &args.hash_dims {
        let provider = HashProvider::new(dim, args.common.seed);
        models.push(ModelEmbeddings {
            tag: provider.tag(),
            requirements: provider.embed(&requirement_texts(&corpus, false))?,
            provisions: provider.embed(&provision_texts(&corpus))?,
        });
    }
    let ranking = rank_models(&models, &corpus)?;
    out.write(
        "ranking.json",
        &(serde_json::to_string_pretty(&ranking).expect("ranking serializes") + "\n"),
    )?;
    let mut table = TextTable::new(&["Rank", "Model", "AUC"]);
    for r in &ranking {
        table.row(vec![r.rank.to_string(), r.tag.clone(), format!("{:.4}", r.auc)]);
    }
    let text = table.render();
    out.write("ranking.txt", &text)?;
    Ok(Outcome { inputs, summary: text })
}

pub fn fisher(args: &FisherArgs, out: &mut OutputDir) -> Result<Outcome, CliError> {
    let [a, b, c, d] = args.table[..] else {
        return Err(CliError::Usage(format!(
            "--table needs exactly four counts a,b,c,d; got {}",
            args.table.len()
        )));
    };
    let table = ContingencyTable2x2::new(a, b, c, d);
    let p = fisher_exact(&table);
    out.write("fisher.json", &pretty(&json!({"table": [[a, b], [c, d]], "p_value": p})))?;
    Ok(Outcome {
        inputs: Vec::new(),
        summary: format!("Fisher's exact test on [[{a}, {b}], [{c}, {d}]]: p = {p:.6}"),
    })
}
