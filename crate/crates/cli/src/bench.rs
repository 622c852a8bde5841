use std::path::PathBuf;

use crossview::bench::run_bench;

use crate::{load_config, open_output, Layout, List, Result};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Camera counts to measure.
    #[arg(long, value_name = "N1,N2,...")]
    cameras: List,
    /// Person counts to measure; each is run against every camera count.
    #[arg(long, value_name = "N1,N2,...")]
    people: List,
    /// Simulated seconds per case.
    #[arg(long, value_name = "S")]
    duration: f64,
    /// Also time the per-frame synchronized baseline on the same scenes.
    #[arg(long)]
    baseline: bool,
    /// Camera arrangement.
    #[arg(long, value_enum, default_value = "ring")]
    layout: Layout,
    /// Scene seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tracker parameters [default: built-in defaults].
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// CSV destination; `-` writes standard output.
    #[arg(long, value_name = "FILE", default_value = "-")]
    output: PathBuf,
}

pub fn run(args: Args) -> Result<()> {
    let cameras: Vec<usize> = args.cameras.0;
    let people: Vec<usize> = args.people.0;
    if cameras.is_empty() || cameras.contains(&0) {
        return Err("--cameras needs at least one positive count".into());
    }
    if people.is_empty() || people.contains(&0) {
        return Err("--people needs at least one positive count".into());
    }
    if !(args.duration > 0.0 && args.duration.is_finite()) {
        return Err("--duration must be positive".into());
    }
    let cfg = load_config(args.config.as_ref())?;
    let rows = run_bench(
        args.layout.into(),
        &cameras,
        &people,
        args.duration,
        args.seed,
        &cfg,
        args.baseline,
    )
    .map_err(|e| e.to_string())?;
    let mut w = csv::Writer::from_writer(open_output(&args.output)?);
    for r in &rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}
