use std::path::PathBuf;

use crossview::io::{read_records, write_record, FrameRecord, TrackRecord};
use crossview::skeleton::JOINT_COUNT;
use crossview::tracker::Tracker;

use crate::{load_calibration, load_config, open_input, open_output, Result};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Camera calibration, one camera record per line.
    #[arg(long, value_name = "FILE")]
    calib: PathBuf,
    /// Tracker parameters as JSON or `key = value` lines; defaults apply to
    /// missing keys and to an absent file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Detection frames, one record per line; `-` reads standard input.
    #[arg(long, value_name = "FILE", default_value = "-")]
    input: PathBuf,
    /// Track records, one per input frame with live targets; `-` writes
    /// standard output.
    #[arg(long, value_name = "FILE", default_value = "-")]
    output: PathBuf,
    /// Joints per detection.
    #[arg(long, value_name = "K", default_value_t = JOINT_COUNT)]
    joints: usize,
}

pub fn run(args: Args) -> Result<()> {
    let calib = load_calibration(&args.calib)?;
    let cfg = load_config(args.config.as_ref())?;
    let input = open_input(&args.input)?;
    let mut output = open_output(&args.output)?;
    let mut tracker = Tracker::new(calib.clone(), cfg, args.joints).map_err(|e| e.to_string())?;
    let source = args.input.display();
    for rec in read_records::<FrameRecord>(input) {
        let (line, rec) = rec.map_err(|e| format!("{source}: {e}"))?;
        let frame = rec
            .to_frame(&calib, args.joints, line)
            .map_err(|e| format!("{source}: {e}"))?;
        let out = tracker
            .step(&frame)
            .map_err(|e| format!("{source}: line {line}: {e}"))?;
        if !out.targets.is_empty() {
            write_record(&mut output, &TrackRecord::from_output(&out, &calib)).map_err(|e| e.to_string())?;
        }
    }
    output.flush().map_err(|e| e.to_string())
}
