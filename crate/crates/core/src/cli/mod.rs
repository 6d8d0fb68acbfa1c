//! Command-line surface. Every run writes its outputs and a `manifest.json`
//! into `--out-dir`; `replay --manifest` re-runs a recorded command and
//! checks that the outputs are byte-identical.
//!
//! Exit status: 0 on success, 1 on domain errors (bad input files, failed
//! requests, replay mismatches), 2 on usage errors.

mod args;
mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;

pub use args::{
    Cli, Command, CommonArgs, EmbedArgs, EmbeddingArgs, EvaluateArgs, FisherArgs, LooArgs, PredictArgs,
    PromptArgs, ProviderKind, RankModelsArgs, ReplayArgs, SimilarityArgs, StrategyArgs, SweepArgs, ValidateArgs,
    DEFAULT_HASH_DIM, DEFAULT_LOO_STRATEGIES, DEFAULT_OUT_DIR, DEFAULT_SEED,
};
pub use manifest::{sha256_bytes, sha256_file, OutputDir, OutputEntry, RunManifest, MANIFEST_FILE};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Domain(_) => EXIT_DOMAIN,
        }
    }
}

/// Result of one command: where its files went and what it printed.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub summary: String,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut command = cli.command;
    command.absolutize_paths();
    match run_command(&command) {
        Ok(report) => {
            println!("{}", report.summary.trim_end());
            println!("outputs in {}", report.out_dir.display());
            EXIT_OK
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("usage error: {e}");
            eprintln!("run `lextrace {} --help` for the accepted arguments", command.name());
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs an already parsed command. Paths are used as given; [`run`]
/// absolutizes them first so manifests stay valid from any directory.
pub fn run_command(command: &Command) -> Result<RunReport, CliError> {
    let common = match command {
        Command::Replay(a) => return replay(a),
        other => other.common().expect("non-replay commands carry common arguments"),
    };
    let started_at_ms = manifest::now_ms();
    let mut out = OutputDir::create(&common.out_dir)?;
    let outcome = match command {
        Command::Validate(a) => commands::validate(a, &mut out),
        Command::Embed(a) => commands::embed(a, &mut out),
        Command::Similarity(a) => commands::similarity(a, &mut out),
        Command::Predict(a) => commands::predict(a, &mut out),
        Command::Prompt(a) => commands::prompt(a, &mut out),
        Command::Evaluate(a) => commands::evaluate(a, &mut out),
        Command::Sweep(a) => commands::sweep(a, &mut out),
        Command::Loo(a) => commands::loo(a, &mut out),
        Command::RankModels(a) => commands::rank_models_cmd(a, &mut out),
        Command::Fisher(a) => commands::fisher(a, &mut out),
        Command::Replay(_) => unreachable!("handled above"),
    }?;
    let inputs = outcome
        .inputs
        .iter()
        .map(|p| Ok((p.display().to_string(), sha256_file(p)?)))
        .collect::<Result<_, Error>>()?;
    let out_dir = out.dir().to_path_buf();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        command: command.clone(),
        inputs,
        outputs: out.into_entries(),
        started_at_ms,
        finished_at_ms: manifest::now_ms(),
    };
    manifest.save(&out_dir)?;
    Ok(RunReport {
        out_dir,
        manifest,
        summary: outcome.summary,
    })
}

fn replay(args: &ReplayArgs) -> Result<RunReport, CliError> {
    let recorded = RunManifest::load(&args.manifest)?;
    for (path, digest) in &recorded.inputs {
        let current = sha256_file(std::path::Path::new(path))?;
        if &current != digest {
            return Err(Error::invalid("replay", format!("input {path} changed since the recorded run")).into());
        }
    }
    let recorded_dir = args
        .manifest
        .parent()
        .map(std::path::Path::to_path_buf)
        .unwrap_or_default();
    let out_dir = args.out_dir.clone().unwrap_or_else(|| recorded_dir.join("replay"));
    if out_dir == recorded_dir {
        return Err(CliError::Usage("replay output must go to a different directory".into()));
    }
    let mut command = recorded.command.clone();
    if let Command::Prompt(p) = &mut command {
        if !p.dry_run && p.replay_from.is_none() {
            p.replay_from = Some(p.transcript.take().unwrap_or_else(|| recorded_dir.join("transcript.jsonl")));
        }
        p.transcript = None;
    }
    command.set_out_dir(&out_dir);
    let mut report = run_command(&command)?;

    let mut mismatched = Vec::new();
    for (name, entry) in recorded.outputs.iter().filter(|(_, e)| e.deterministic) {
        match report.manifest.outputs.get(name) {
            Some(new) if new.sha256 == entry.sha256 => {}
            _ => mismatched.push(name.clone()),
        }
    }
    let compared = recorded.outputs.values().filter(|e| e.deterministic).count();
    let verdict = json!({
        "manifest": args.manifest.display().to_string(),
        "compared": compared,
        "mismatched": mismatched,
        "identical": mismatched.is_empty(),
    });
    let verdict_path = out_dir.join("replay.json");
    std::fs::write(
        &verdict_path,
        serde_json::to_string_pretty(&verdict).expect("json value serializes") + "\n",
    )
    .map_err(|e| Error::io(&verdict_path, e))?;
    if !mismatched.is_empty() {
        return Err(Error::invalid(
            "replay",
            format!("outputs differ from the recorded run: {}", mismatched.join(", ")),
        )
        .into());
    }
    report.summary = format!(
        "{}\nreplay identical: {compared} deterministic outputs match",
        report.summary.trim_end()
    );
    Ok(report)
}
