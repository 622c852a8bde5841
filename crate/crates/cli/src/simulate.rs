use std::fs;
use std::io::Write;
use std::path::PathBuf;

use crossview::io::{write_calibration, write_frames, write_truth};
use crossview::simulator::{generate, scene_config, ScenarioSpec};

use crate::{open_output, Result};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario description (JSON); omitted keys take their defaults.
    #[arg(long, value_name = "FILE")]
    spec: PathBuf,
    /// Directory receiving calibration.jsonl, frames.jsonl, truth.jsonl, the
    /// fully expanded scenario.json and tracker.json, tracker parameters
    /// suited to synthetic scenes; created if missing.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let text = fs::read_to_string(&args.spec).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let spec = ScenarioSpec::parse(&text).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    let scene = generate(&spec).map_err(|e| format!("{}: {e}", args.spec.display()))?;
    fs::create_dir_all(&args.out_dir).map_err(|e| format!("{}: {e}", args.out_dir.display()))?;

    let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::result::Result<(), String>| -> Result<()> {
        let path = args.out_dir.join(name);
        let mut out = open_output(&path)?;
        f(&mut out)
            .and_then(|_| out.flush().map_err(|e| e.to_string()))
            .map_err(|e| format!("{}: {e}", path.display()))
    };
    write("calibration.jsonl", &|w| {
        write_calibration(w, &scene.calibration).map_err(|e| e.to_string())
    })?;
    write("frames.jsonl", &|w| {
        write_frames(w, &scene.frames, &scene.calibration).map_err(|e| e.to_string())
    })?;
    write("truth.jsonl", &|w| {
        write_truth(w, &scene.truth, &scene.calibration).map_err(|e| e.to_string())
    })?;
    write("scenario.json", &|w| pretty(w, &spec))?;
    write("tracker.json", &|w| pretty(w, &scene_config()))
}

fn pretty(w: &mut dyn Write, value: &impl serde::Serialize) -> std::result::Result<(), String> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| e.to_string())?;
    w.write_all(b"\n").map_err(|e| e.to_string())
}
