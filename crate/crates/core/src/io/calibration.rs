use std::collections::HashSet;
use std::io::{BufRead, Write};

use nalgebra::Matrix3x4;
use serde::{Deserialize, Serialize};

use super::{read_records, write_record, IoError};
use crate::geometry::{Calibration, CameraView, GeometryError};

/// One camera: id, row-major 3×4 projection matrix and image size in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub id: String,
    #[serde(rename = "P")]
    pub p: [f64; 12],
    pub image_size: [u32; 2],
}

impl From<&CameraView> for CameraRecord {
    fn from(cam: &CameraView) -> Self {
        let m = cam.projection();
        let mut p = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                p[r * 4 + c] = m[(r, c)];
            }
        }
        let (w, h) = cam.image_size();
        CameraRecord {
            id: cam.id().to_string(),
            p,
            image_size: [w, h],
        }
    }
}

pub fn read_calibration(reader: impl BufRead) -> Result<Calibration, IoError> {
    let mut cams = Vec::new();
    let mut seen = HashSet::new();
    for rec in read_records::<CameraRecord>(reader) {
        let (line, rec) = rec?;
        if !seen.insert(rec.id.clone()) {
            return Err(IoError::DuplicateCamera { line, id: rec.id });
        }
        let p = Matrix3x4::from_row_slice(&rec.p);
        let cam = CameraView::new(rec.id.clone(), p, (rec.image_size[0], rec.image_size[1])).map_err(|e| match e {
            GeometryError::RankDeficient(id) => IoError::RankDeficientP { line, id },
            other => IoError::parse(line, other.to_string()),
        })?;
        cams.push(cam);
    }
    Calibration::new(cams).map_err(|e| IoError::parse(0, e.to_string()))
}

pub fn write_calibration(mut writer: impl Write, calib: &Calibration) -> Result<(), IoError> {
    for cam in calib.cameras() {
        write_record(&mut writer, &CameraRecord::from(cam))?;
    }
    Ok(())
}
