// Drives the command-line front end in process: predicts with the
// largest-gap strategy from a stored score matrix, then replays the run
// from its manifest and checks that every deterministic output matches.

use lextrace::cli::{run, RunManifest, MANIFEST_FILE};
use lextrace::linker::PredictionSet;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let out = tmp.path().join("delta");
    let matrix = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/delta_matrix.json");
    let out_arg = out.to_str().ok_or("non-UTF-8 temp path")?;
    let status = run(["lextrace", "predict", "--matrix", matrix, "--strategy", "delta", "--out-dir", out_arg]);
    if status != 0 {
        return Err(format!("predict exited with {status}").into());
    }
    let pred = PredictionSet::load(out.join("predictions.json"))?;
    println!("predicted {:?} at threshold {:?}", pred.codes_for("REQ"), pred.thresholds_used().get("REQ"));

    let manifest = RunManifest::load(&out.join(MANIFEST_FILE))?;
    println!("manifest records {} inputs and {} outputs", manifest.inputs.len(), manifest.outputs.len());

    let manifest_arg = out.join(MANIFEST_FILE);
    let replay_dir = tmp.path().join("replay");
    let status = run([
        "lextrace",
        "replay",
        "--manifest",
        manifest_arg.to_str().ok_or("non-UTF-8 temp path")?,
        "--out-dir",
        replay_dir.to_str().ok_or("non-UTF-8 temp path")?,
    ]);
    let verdict: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(replay_dir.join("replay.json"))?)?;
    println!("replay: {verdict}");
    if status != 0 || verdict["identical"] != true {
        return Err("replay did not reproduce the run".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
