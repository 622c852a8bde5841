use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crossview::evaluation::{
    association_accuracy, framerate_sweep, mot_metrics, pcp, MotCameraReport, PcpReport, SweepRow, Tally,
};
use crossview::geometry::Calibration;
use crossview::io::{read_frames, read_tracks, read_truth};
use crossview::skeleton::JOINT_COUNT;
use serde::Serialize;

use crate::{load_calibration, load_config, open_input, open_output, List, Result};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Ground truth written by `simulate`.
    #[arg(long, value_name = "FILE")]
    truth: PathBuf,
    /// Track records written by `track`.
    #[arg(long, value_name = "FILE")]
    tracks: PathBuf,
    /// JSON report destination; `-` writes standard output. A frame-rate
    /// sweep also writes a tab-separated table next to it.
    #[arg(long, value_name = "FILE")]
    report: PathBuf,
    /// Also compute per-camera MOTA, IDF1 and ID switches on projected roots.
    #[arg(long)]
    mot: bool,
    /// Pixel distance under which a projected root matches a truth.
    #[arg(long, value_name = "PX", default_value_t = 50.0)]
    mot_threshold: f64,
    /// Re-run the tracker on every n-th frame per camera for each listed n,
    /// with time-weighted and with plain triangulation, and report PCP for
    /// both.
    #[arg(long, value_name = "N1,N2,...")]
    framerate_sweep: Option<List>,
    /// Camera calibration [default: calibration.jsonl next to the truth file].
    #[arg(long, value_name = "FILE")]
    calib: Option<PathBuf>,
    /// Detection frames replayed by the sweep [default: frames.jsonl next to
    /// the truth file].
    #[arg(long, value_name = "FILE")]
    frames: Option<PathBuf>,
    /// Tracker parameters for the sweep [default: tracker.json next to the
    /// truth file when present, built-in defaults otherwise].
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Joints per detection.
    #[arg(long, value_name = "K", default_value_t = JOINT_COUNT)]
    joints: usize,
    /// PCP threshold as a fraction of limb length.
    #[arg(long, value_name = "A", default_value_t = 0.5)]
    pcp_alpha: f64,
}

#[derive(Serialize)]
struct AssociationOut {
    overall: Tally,
    /// Keyed by camera id.
    per_camera: BTreeMap<String, Tally>,
}

#[derive(Serialize)]
struct MotOut {
    variant: &'static str,
    dist_threshold: f64,
    per_camera: BTreeMap<String, MotCameraReport>,
}

#[derive(Serialize)]
struct Report {
    pcp: PcpReport,
    association: AssociationOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    mot: Option<MotOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    framerate_sweep: Option<Vec<SweepRow>>,
}

fn beside(file: &Path, name: &str) -> PathBuf {
    file.parent().unwrap_or(Path::new(".")).join(name)
}

fn by_id<T: Clone>(calib: &Calibration, m: &BTreeMap<usize, T>) -> BTreeMap<String, T> {
    m.iter()
        .map(|(&c, v)| (calib.camera(c).id().to_string(), v.clone()))
        .collect()
}

pub fn run(args: Args) -> Result<()> {
    if !(args.mot_threshold > 0.0 && args.mot_threshold.is_finite()) {
        return Err("--mot-threshold must be positive".into());
    }
    if !(args.pcp_alpha > 0.0 && args.pcp_alpha.is_finite()) {
        return Err("--pcp-alpha must be positive".into());
    }
    let calib_path = args
        .calib
        .clone()
        .unwrap_or_else(|| beside(&args.truth, "calibration.jsonl"));
    let calib = load_calibration(&calib_path)?;
    let truth = read_truth(open_input(&args.truth)?, &calib).map_err(|e| format!("{}: {e}", args.truth.display()))?;
    let (estimates, associations) =
        read_tracks(open_input(&args.tracks)?, &calib).map_err(|e| format!("{}: {e}", args.tracks.display()))?;

    let assoc = association_accuracy(&associations, &truth);
    let mot = args.mot.then(|| {
        let m = mot_metrics(&estimates, &truth, &calib, args.mot_threshold);
        MotOut {
            variant: "simplified",
            dist_threshold: m.dist_threshold,
            per_camera: by_id(&calib, &m.per_camera),
        }
    });

    let sweep = match &args.framerate_sweep {
        None => None,
        Some(List(ns)) => {
            if ns.contains(&0) {
                return Err("--framerate-sweep values must be at least 1".into());
            }
            let frames_path = args
                .frames
                .clone()
                .unwrap_or_else(|| beside(&args.truth, "frames.jsonl"));
            let frames = read_frames(open_input(&frames_path)?, &calib, args.joints)
                .map_err(|e| format!("{}: {e}", frames_path.display()))?;
            let config_path = args.config.clone().or_else(|| {
                let p = beside(&args.truth, "tracker.json");
                p.exists().then_some(p)
            });
            let cfg = load_config(config_path.as_ref())?;
            Some(framerate_sweep(&calib, &frames, &truth, ns, &cfg, args.joints).map_err(|e| e.to_string())?)
        }
    };

    let report = Report {
        pcp: pcp(&estimates, &truth, args.pcp_alpha),
        association: AssociationOut {
            overall: assoc.overall,
            per_camera: by_id(&calib, &assoc.per_camera),
        },
        mot,
        framerate_sweep: sweep,
    };
    let mut out = open_output(&args.report)?;
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| e.to_string())?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| e.to_string())?;

    if let (Some(rows), true) = (&report.framerate_sweep, args.report != Path::new("-")) {
        let path = args.report.with_extension("sweep.tsv");
        write_sweep_table(&path, rows).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn write_sweep_table(path: &Path, rows: &[SweepRow]) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(fs::File::create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
