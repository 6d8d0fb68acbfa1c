//! Argument structures of every subcommand. They double as the
//! configuration snapshot stored in run manifests.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::embeddings::HttpProviderConfig;
use crate::evaluation::MatchMode;
use crate::pipeline::Strategy;
use crate::prompting::{PromptVariant, DEFAULT_P1_K};

pub const DEFAULT_SEED: u64 = 16;
pub const DEFAULT_HASH_DIM: usize = 256;
pub const DEFAULT_OUT_DIR: &str = "lextrace-out";
pub const DEFAULT_LOO_STRATEGIES: &str = "constant,dynamic,delta,tuned,tfidf,lsi,indicator";

#[derive(Debug, Parser)]
#[command(name = "lextrace", version, about = "Trace links between software requirements and legal provisions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Check a corpus file and print its size.
    Validate(ValidateArgs),
    /// Embed requirements and provisions into an interchange file.
    Embed(EmbedArgs),
    /// Write the requirement-by-provision cosine matrix.
    Similarity(SimilarityArgs),
    /// Predict trace links with a threshold strategy or baseline.
    Predict(PredictArgs),
    /// Render prompts for an LLM and collect its predictions.
    Prompt(PromptArgs),
    /// Score a prediction file against the corpus ground truth.
    Evaluate(EvaluateArgs),
    /// F2 over an evenly spaced threshold grid, plus ROC points.
    Sweep(SweepArgs),
    /// Leave-one-document-out evaluation of several strategies.
    Loo(LooArgs),
    /// Rank embedding models by zero-shot AUC.
    RankModels(RankModelsArgs),
    /// Fisher's exact test on a 2x2 contingency table.
    Fisher(FisherArgs),
    /// Re-run a recorded command and compare its outputs byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CommonArgs {
    /// Directory receiving every output file and the run manifest.
    #[arg(long, default_value = DEFAULT_OUT_DIR)]
    pub out_dir: PathBuf,
    /// Seed of every random choice (sampling, Gibbs, hashing).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// Vectors read from an interchange file.
    File,
    /// Vectors fetched from an embedding endpoint.
    Http,
    /// Deterministic feature-hashing vectors, computed locally.
    Hash,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EmbeddingArgs {
    /// Embedding interchange file (implies `--provider file`).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Defaults to `file` with `--embeddings`, otherwise `hash`.
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Dimension of hash embeddings.
    #[arg(long, default_value_t = DEFAULT_HASH_DIM)]
    pub dim: usize,
    /// Embedding endpoint for `--provider http`.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Model name sent to the embedding endpoint.
    #[arg(long, default_value = "text-embedding-3-small")]
    pub embedding_model: String,
    /// Also embed every sentence of every requirement.
    #[arg(long)]
    pub sentence_level: bool,
}

impl EmbeddingArgs {
    pub fn provider_kind(&self) -> ProviderKind {
        self.provider.unwrap_or(if self.embeddings.is_some() {
            ProviderKind::File
        } else {
            ProviderKind::Hash
        })
    }

    pub fn http_config(&self) -> Option<HttpProviderConfig> {
        self.endpoint
            .as_deref()
            .map(|url| HttpProviderConfig::new(url, &self.embedding_model))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    pub corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StrategyArgs {
    /// Constant threshold.
    #[arg(long, default_value_t = crate::linker::DEFAULT_THETA)]
    pub theta: f64,
    /// Negative requirements sampled per provision by the dynamic strategy.
    #[arg(long, default_value_t = crate::linker::DEFAULT_NEGATIVE_SAMPLE)]
    pub negatives: usize,
    /// LSI rank, capped at the rank bound of the term matrix.
    #[arg(long, default_value_t = crate::baselines::DEFAULT_LSI_K)]
    pub k: usize,
    /// LDA topic count.
    #[arg(long, default_value_t = 50)]
    pub topics: usize,
    /// LDA Gibbs sweeps.
    #[arg(long, default_value_t = 500)]
    pub lda_iterations: usize,
    /// Ignore terms in more than this fraction of texts (TF-IDF and LSI).
    #[arg(long)]
    pub max_df: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    /// Corpus file; required unless a matrix is scored by constant or delta.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Precomputed similarity matrix to threshold directly.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// constant, dynamic, delta, tuned, tfidf, lsi, lda or indicator.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: Strategy,
    /// Comma-separated training documents (default: every document not
    /// under test, or all documents when every one is under test).
    #[arg(long, value_delimiter = ',')]
    pub train_docs: Vec<String>,
    /// Comma-separated documents to predict (default: all).
    #[arg(long, value_delimiter = ',')]
    pub test_docs: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub strategy_args: StrategyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PromptArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    pub variant: PromptVariant,
    /// Few-shot examples file (RICE only).
    #[arg(long)]
    pub examples: Option<PathBuf>,
    /// Comma-separated requirement ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub requirements: Vec<String>,
    /// Candidate provisions per requirement for P1.
    #[arg(long, default_value_t = DEFAULT_P1_K)]
    pub k: usize,
    /// Write the prompts without contacting any endpoint.
    #[arg(long)]
    pub dry_run: bool,
    /// Chat-completion endpoint.
    #[arg(long, default_value = crate::prompting::DEFAULT_CHAT_ENDPOINT)]
    pub endpoint: String,
    #[arg(long, default_value = "gpt-4o")]
    pub model: String,
    /// Requests in flight at once.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Transcript to resume from and append to (default: in the output directory).
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Answer prompts from a recorded transcript instead of the network.
    #[arg(long)]
    pub replay_from: Option<PathBuf>,
    /// Embedding file used by P1 retrieval (default: hash embeddings).
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Dimension of hash embeddings used by P1 retrieval.
    #[arg(long, default_value_t = DEFAULT_HASH_DIM)]
    pub dim: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

fn parse_variant(s: &str) -> Result<PromptVariant, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_match_mode(s: &str) -> Result<MatchMode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Score surface for MAP and AUC.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Comma-separated documents to evaluate (default: all).
    #[arg(long, value_delimiter = ',')]
    pub docs: Vec<String>,
    #[arg(long, default_value = "superset", value_parser = parse_match_mode)]
    pub match_mode: MatchMode,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Precomputed similarity matrix; otherwise computed from embeddings.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LooArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_LOO_STRATEGIES, value_parser = parse_strategy)]
    pub strategies: Vec<Strategy>,
    /// Comma-separated documents left out of every split.
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<String>,
    #[arg(long, default_value = "superset", value_parser = parse_match_mode)]
    pub match_mode: MatchMode,
    #[command(flatten)]
    #[serde(flatten)]
    pub strategy_args: StrategyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub embedding: EmbeddingArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RankModelsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Interchange file of one model; repeatable.
    #[arg(long = "embeddings")]
    pub embeddings: Vec<PathBuf>,
    /// Comma-separated hash-embedding dimensions to rank alongside.
    #[arg(long, value_delimiter = ',')]
    pub hash_dims: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FisherArgs {
    /// Cells `a,b,c,d` of the table [[a, b], [c, d]].
    #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
    pub table: Vec<u64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where the replayed outputs go (default: `replay/` next to the manifest).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn absolutize(p: &mut PathBuf) {
    if let Ok(abs) = std::path::absolute(&*p) {
        *p = abs;
    }
}

fn absolutize_opt(p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        absolutize(p);
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Validate(_) => "validate",
            Self::Embed(_) => "embed",
            Self::Similarity(_) => "similarity",
            Self::Predict(_) => "predict",
            Self::Prompt(_) => "prompt",
            Self::Evaluate(_) => "evaluate",
            Self::Sweep(_) => "sweep",
            Self::Loo(_) => "loo",
            Self::RankModels(_) => "rank-models",
            Self::Fisher(_) => "fisher",
            Self::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> Option<&CommonArgs> {
        match self {
            Self::Validate(a) => Some(&a.common),
            Self::Embed(a) => Some(&a.common),
            Self::Similarity(a) => Some(&a.common),
            Self::Predict(a) => Some(&a.common),
            Self::Prompt(a) => Some(&a.common),
            Self::Evaluate(a) => Some(&a.common),
            Self::Sweep(a) => Some(&a.common),
            Self::Loo(a) => Some(&a.common),
            Self::RankModels(a) => Some(&a.common),
            Self::Fisher(a) => Some(&a.common),
            Self::Replay(_) => None,
        }
    }

    pub fn set_out_dir(&mut self, dir: &Path) {
        let common = match self {
            Self::Validate(a) => &mut a.common,
            Self::Embed(a) => &mut a.common,
            Self::Similarity(a) => &mut a.common,
            Self::Predict(a) => &mut a.common,
            Self::Prompt(a) => &mut a.common,
            Self::Evaluate(a) => &mut a.common,
            Self::Sweep(a) => &mut a.common,
            Self::Loo(a) => &mut a.common,
            Self::RankModels(a) => &mut a.common,
            Self::Fisher(a) => &mut a.common,
            Self::Replay(a) => {
                a.out_dir = Some(dir.to_path_buf());
                return;
            }
        };
        common.out_dir = dir.to_path_buf();
    }

    /// Rewrites every path argument relative to the current directory, so a
    /// recorded command can run from anywhere.
    pub fn absolutize_paths(&mut self) {
        fn emb(e: &mut EmbeddingArgs) {
            absolutize_opt(&mut e.embeddings);
        }
        match self {
            Self::Validate(a) => {
                absolutize(&mut a.corpus);
                absolutize(&mut a.common.out_dir);
            }
            Self::Embed(a) => {
                absolutize(&mut a.corpus);
                emb(&mut a.embedding);
                absolutize(&mut a.common.out_dir);
            }
            Self::Similarity(a) => {
                absolutize(&mut a.corpus);
                emb(&mut a.embedding);
                absolutize(&mut a.common.out_dir);
            }
            Self::Predict(a) => {
                absolutize_opt(&mut a.corpus);
                absolutize_opt(&mut a.matrix);
                emb(&mut a.embedding);
                absolutize(&mut a.common.out_dir);
            }
            Self::Prompt(a) => {
                absolutize(&mut a.corpus);
                absolutize_opt(&mut a.examples);
                absolutize_opt(&mut a.transcript);
                absolutize_opt(&mut a.replay_from);
                absolutize_opt(&mut a.embeddings);
                absolutize(&mut a.common.out_dir);
            }
            Self::Evaluate(a) => {
                absolutize(&mut a.corpus);
                absolutize(&mut a.predictions);
                absolutize_opt(&mut a.matrix);
                absolutize(&mut a.common.out_dir);
            }
            Self::Sweep(a) => {
                absolutize(&mut a.corpus);
                absolutize_opt(&mut a.matrix);
                emb(&mut a.embedding);
                absolutize(&mut a.common.out_dir);
            }
            Self::Loo(a) => {
                absolutize(&mut a.corpus);
                emb(&mut a.embedding);
                absolutize(&mut a.common.out_dir);
            }
            Self::RankModels(a) => {
                absolutize(&mut a.corpus);
                a.embeddings.iter_mut().for_each(absolutize);
                absolutize(&mut a.common.out_dir);
            }
            Self::Fisher(a) => absolutize(&mut a.common.out_dir),
            Self::Replay(a) => {
                absolutize(&mut a.manifest);
                absolutize_opt(&mut a.out_dir);
            }
        }
    }
}
