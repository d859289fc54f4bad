mod cli;
mod failure;
mod params;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use graphcorr::io::{read_manifest, write_json, RunManifest, MANIFEST_FILE};

use crate::cli::{Cli, Command};
use crate::failure::{CmdResult, Failure};
use crate::params::Params;

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Executes `params` into `out` and writes the manifest. Returns the exit
/// code of the command.
fn run(params: &Params, out: &Path) -> CmdResult<u8> {
    let started_at = now();
    let done = params.execute(out)?;
    let tagged = serde_json::to_value(params).map_err(|e| Failure::input(e.to_string()))?;
    let manifest = RunManifest {
        command: params.name().to_string(),
        parameters: tagged["parameters"].clone(),
        root_seed: done.root_seed,
        artifact_version: graphcorr::ARTIFACT_VERSION.to_string(),
        started_at,
        finished_at: now(),
        outputs: done.outputs,
        extra: done.extra,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    if let Some(msg) = done.message {
        eprintln!("graphcorr {}: {msg}", params.name());
    }
    Ok(done.code)
}

fn replay_params(manifest: &Path) -> CmdResult<Params> {
    let m = read_manifest(manifest).map_err(|e| Failure::from(e).context(manifest.display()))?;
    let tagged = serde_json::json!({ "command": m.command, "parameters": m.parameters });
    cli::parse_json(&tagged.to_string(), manifest)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Replay(a) => replay_params(&a.manifest),
        other => other.to_params().map(|p| p.expect("non-replay commands carry parameters")),
    }
    .and_then(|params| run(&params, cli.command.out_dir()));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("graphcorr: error: {f}");
            ExitCode::from(f.code)
        }
    }
}
