//! `crossview`: track, simulate, evaluate and benchmark from the command line.

mod bench;
mod evaluate;
mod simulate;
mod track;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crossview::config::TrackerConfig;
use crossview::geometry::Calibration;

#[derive(Debug, Parser)]
#[command(name = "crossview", version, about = "Multi-camera 3D pose tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track people through a stream of per-camera detection frames.
    ///
    /// Reads one frame record per line and writes one track record per
    /// input line that leaves at least one live target.
    Track(track::Args),
    /// Generate a synthetic scene: calibration, detection frames and ground
    /// truth.
    Simulate(simulate::Args),
    /// Score a track stream against ground truth.
    Evaluate(evaluate::Args),
    /// Measure tracker throughput and latency on synthetic scenes; prints CSV.
    Bench(bench::Args),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Layout {
    /// Cameras on a 5 m ring, 2.5 m high.
    Ring,
    /// Ceiling cameras over an 8 × 6 m room.
    Grid,
}

impl From<Layout> for crossview::bench::RigLayout {
    fn from(l: Layout) -> Self {
        match l {
            Layout::Ring => crossview::bench::RigLayout::Ring,
            Layout::Grid => crossview::bench::RigLayout::Grid,
        }
    }
}

pub type Result<T> = std::result::Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Track(a) => track::run(a),
        Command::Simulate(a) => simulate::run(a),
        Command::Evaluate(a) => evaluate::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crossview: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Opens `path`, or standard input for `-`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let f = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Box::new(BufReader::new(f)))
    }
}

/// Creates `path`, or standard output for `-`.
pub fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(io::LineWriter::new(io::stdout())))
    } else {
        let f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Box::new(io::BufWriter::new(f)))
    }
}

pub fn load_calibration(path: &Path) -> Result<Calibration> {
    crossview::io::read_calibration(open_input(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_config(path: Option<&PathBuf>) -> Result<TrackerConfig> {
    match path {
        None => Ok(TrackerConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            TrackerConfig::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

/// Comma-separated counts such as `1,2,3`.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<usize>);

impl std::str::FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("`{x}` is not a non-negative integer"))
            })
            .collect::<std::result::Result<_, _>>()
            .map(List)
    }
}
