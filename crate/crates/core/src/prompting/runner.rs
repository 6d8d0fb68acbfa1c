//! Batch execution of a prompt variant with a resumable JSON-lines
//! transcript.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::client::{ChatBackend, ReplayBackend};
use super::parse::{parse_code_list, parse_trace_tag, parse_yes_no};
use super::templates::{
    build_p1_prompt, build_p2_prompt, build_p3_prompt, build_rice_prompt, FewShotExample, PromptVariant,
};
use crate::corpus::Corpus;
use crate::embeddings::{cosine, EmbeddingSet, EmbeddingVector};
use crate::error::{Error, Result};
use crate::linker::PredictionSet;

/// P1 asks about every provision unless told otherwise.
pub const DEFAULT_P1_K: usize = 26;

/// Identifies one request: variant, requirement and (for pairwise variants)
/// provision code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemKey {
    pub variant: PromptVariant,
    pub req_id: String,
    /// `-` for per-requirement variants.
    pub code: String,
}

pub const NO_CODE: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptItem {
    pub key: ItemKey,
    pub prompt: String,
}

/// `k` codes closest to `req_vector`, highest cosine first, ties by code.
pub fn retrieve_topk(req_vector: &EmbeddingVector, prov_set: &EmbeddingSet, k: usize) -> Result<Vec<String>> {
    if k == 0 || k > prov_set.len() {
        return Err(Error::invalid("k", format!("{k} must lie in 1..={}", prov_set.len())));
    }
    let mut scored: Vec<(f64, &str)> = prov_set
        .iter()
        .map(|(code, v)| Ok((cosine(req_vector, v)?, code)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(scored.into_iter().take(k).map(|(_, c)| c.to_owned()).collect())
}

/// Inputs a variant may need; only RICE reads `examples` and only P1 reads
/// the embeddings.
pub struct PromptInputs<'a> {
    pub corpus: &'a Corpus,
    pub examples: &'a [FewShotExample],
    pub req_embeddings: Option<&'a EmbeddingSet>,
    pub prov_embeddings: Option<&'a EmbeddingSet>,
    pub k: usize,
}

/// Every request the variant would issue for `req_ids`, in deterministic order.
pub fn plan_prompts(variant: PromptVariant, inputs: &PromptInputs<'_>, req_ids: &[String]) -> Result<Vec<PromptItem>> {
    let corpus = inputs.corpus;
    let mut items = Vec::new();
    for id in req_ids {
        let req = corpus.requirement(id).ok_or_else(|| Error::UnknownId {
            kind: "requirement",
            id: id.clone(),
        })?;
        let key = |code: &str| ItemKey {
            variant,
            req_id: id.clone(),
            code: code.to_owned(),
        };
        match variant {
            PromptVariant::Rice => items.push(PromptItem {
                key: key(NO_CODE),
                prompt: build_rice_prompt(corpus.catalog(), inputs.examples, req)?,
            }),
            PromptVariant::P2 => items.push(PromptItem {
                key: key(NO_CODE),
                prompt: build_p2_prompt(req, corpus.catalog())?,
            }),
            PromptVariant::P1 => {
                let (reqs, provs) = inputs
                    .req_embeddings
                    .zip(inputs.prov_embeddings)
                    .ok_or_else(|| Error::invalid("embeddings", "P1 needs requirement and provision embeddings"))?;
                let provs = provs.restrict(corpus.provision_codes().iter().map(String::as_str))?;
                for code in retrieve_topk(reqs.require(id)?, &provs, inputs.k.min(provs.len()))? {
                    let p = corpus.provision(&code).expect("restricted to catalog");
                    items.push(PromptItem {
                        key: key(&code),
                        prompt: build_p1_prompt(req, p)?,
                    });
                }
            }
            PromptVariant::P3_1 | PromptVariant::P3_2 => {
                for p in corpus.catalog() {
                    items.push(PromptItem {
                        key: key(&p.code),
                        prompt: build_p3_prompt(variant, req, p)?,
                    });
                }
            }
        }
    }
    Ok(items)
}

/// One line of a transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    #[serde(flatten)]
    pub key: ItemKey,
    pub config: Value,
    pub prompt: String,
    pub raw_response: Option<String>,
    pub error: Option<String>,
    pub parse: Value,
    pub requested_at_ms: u128,
    pub completed_at_ms: u128,
}

/// Append-only JSON-lines log of requests. A record with a response stands
/// in for its item on later runs, so interrupted batches resume.
#[derive(Debug, Default)]
pub struct Transcript {
    path: Option<PathBuf>,
    records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads existing records (if the file exists) and appends new ones to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut records = Vec::new();
        if path.exists() {
            let f = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                records.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
                    context: path.display().to_string(),
                    line: i + 1,
                    column: e.column(),
                    message: e.to_string(),
                })?);
            }
        }
        Ok(Self { path: Some(path), records })
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    /// Latest successful response for `item`, if its prompt is unchanged.
    pub fn answered(&self, item: &PromptItem) -> Option<&str> {
        self.records
            .iter()
            .rev()
            .find(|r| r.key == item.key && r.prompt == item.prompt && r.raw_response.is_some())
            .and_then(|r| r.raw_response.as_deref())
    }

    pub fn append(&mut self, record: TranscriptRecord) -> Result<()> {
        if let Some(path) = &self.path {
            let mut f = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            let line = serde_json::to_string(&record).expect("record serializes");
            writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
        }
        self.records.push(record);
        Ok(())
    }

    /// Backend answering each recorded prompt with its latest response.
    pub fn replay_backend(&self) -> ReplayBackend {
        ReplayBackend::new(
            self.records
                .iter()
                .filter_map(|r| r.raw_response.clone().map(|raw| (r.prompt.clone(), raw)))
                .collect::<HashMap<_, _>>(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemFailure {
    #[serde(flatten)]
    pub key: ItemKey,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptRun {
    pub predictions: PredictionSet,
    pub failures: Vec<ItemFailure>,
    /// Items answered by the network in this run (not from the transcript).
    pub requests_sent: usize,
}

fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

enum Verdict {
    Codes(Value, std::collections::BTreeSet<String>),
    Pair(bool),
}

fn interpret(variant: PromptVariant, raw: &str, codes: &[String]) -> Result<Verdict> {
    match variant {
        PromptVariant::Rice | PromptVariant::P2 => {
            let p = parse_code_list(raw, codes)?;
            let summary = serde_json::json!({
                "codes": p.codes,
                "unknown_codes": p.unknown_codes,
                "rationale": p.rationale,
            });
            Ok(Verdict::Codes(summary, p.codes))
        }
        PromptVariant::P1 => parse_trace_tag(raw).map(Verdict::Pair),
        PromptVariant::P3_1 | PromptVariant::P3_2 => parse_yes_no(raw).map(Verdict::Pair),
    }
}

struct Answer {
    raw: Result<String>,
    fresh: bool,
    requested: u128,
    completed: u128,
}

/// Issues (or reuses from `transcript`) every planned request and folds the
/// answers into a prediction set. Failed items are reported, not fatal.
/// With `parallelism > 1` that many requests are in flight at once; results
/// are assembled in plan order either way.
pub fn run_prompt_strategy(
    variant: PromptVariant,
    inputs: &PromptInputs<'_>,
    req_ids: &[String],
    backend: &dyn ChatBackend,
    config_snapshot: &Value,
    transcript: &mut Transcript,
    parallelism: usize,
) -> Result<PromptRun> {
    let items = plan_prompts(variant, inputs, req_ids)?;
    let codes = inputs.corpus.provision_codes();
    let ask = |item: &PromptItem| -> Answer {
        if let Some(raw) = transcript.answered(item) {
            return Answer { raw: Ok(raw.to_owned()), fresh: false, requested: 0, completed: 0 };
        }
        let requested = now_ms();
        let raw = backend.complete(&item.prompt);
        Answer { raw, fresh: true, requested, completed: now_ms() }
    };
    let answers: Vec<Answer> = if parallelism <= 1 {
        items.iter().map(ask).collect()
    } else {
        let mut slots: Vec<Option<Answer>> = (0..items.len()).map(|_| None).collect();
        let chunk = items.len().div_ceil(parallelism).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = items
                .chunks(chunk)
                .map(|batch| s.spawn(move || batch.iter().map(ask).collect::<Vec<_>>()))
                .collect();
            let mut i = 0;
            for h in handles {
                for a in h.join().expect("prompt worker panicked") {
                    slots[i] = Some(a);
                    i += 1;
                }
            }
        });
        slots.into_iter().map(|a| a.expect("every item answered")).collect()
    };

    let mut predictions = PredictionSet::empty(format!("prompt:{variant}"), req_ids);
    let mut failures = Vec::new();
    let mut requests_sent = 0;
    let mut new_records = Vec::new();
    for (item, answer) in items.iter().zip(answers) {
        let outcome = answer.raw.as_ref().map_err(ToString::to_string).and_then(|raw| {
            interpret(variant, raw, &codes).map_err(|e| e.to_string())
        });
        let parse = match &outcome {
            Ok(Verdict::Codes(summary, set)) => {
                for c in set {
                    predictions.insert(&item.key.req_id, c);
                }
                summary.clone()
            }
            Ok(Verdict::Pair(yes)) => {
                if *yes {
                    predictions.insert(&item.key.req_id, &item.key.code);
                }
                Value::Bool(*yes)
            }
            Err(message) => {
                failures.push(ItemFailure {
                    key: item.key.clone(),
                    message: message.clone(),
                });
                Value::Null
            }
        };
        if answer.fresh {
            requests_sent += 1;
            new_records.push(TranscriptRecord {
                key: item.key.clone(),
                config: config_snapshot.clone(),
                prompt: item.prompt.clone(),
                raw_response: answer.raw.as_ref().ok().cloned(),
                error: answer.raw.as_ref().err().map(ToString::to_string),
                parse,
                requested_at_ms: answer.requested,
                completed_at_ms: answer.completed,
            });
        }
    }
    for r in new_records {
        transcript.append(r)?;
    }
    Ok(PromptRun {
        predictions,
        failures,
        requests_sent,
    })
}

/// Counts of planned requests per requirement, for dry-run summaries.
pub fn requests_per_requirement(items: &[PromptItem]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for i in items {
        *out.entry(i.key.req_id.clone()).or_default() += 1;
    }
    out
}
