//! Linear (DLT) triangulation and its time-weighted incremental variant.
//!
//! Both solve `C X̃ = 0` for the stacked rows `x·p³ᵀ − p¹ᵀ`, `y·p³ᵀ − p²ᵀ`
//! of every view. The null vector is taken from the eigen-decomposition of
//! the 4×4 normal matrix `CᵀW²C`, so nothing proportional to the number of
//! views is ever allocated.

use nalgebra::{DMatrix, Matrix4, RowVector4, SymmetricEigen, Vector4};
use thiserror::Error;

use crate::geometry::{Calibration, CameraView, Point2, Point3};

/// `|X̃₄|` of the unit-norm homogeneous solution below which the point is at infinity.
const INFINITY_TOLERANCE: f64 = 1e-12;
/// Camera centers closer than this count as one viewpoint.
const COINCIDENT_CENTERS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructionError {
    #[error("need views from at least two distinct camera centers, got {0}")]
    InsufficientViews(usize),
    #[error("triangulated point is at infinity")]
    NearDegenerate,
    #[error("unknown camera index {0}")]
    UnknownCamera(usize),
    #[error("camera {0} appears twice in one observation set")]
    DuplicateCamera(usize),
}

/// A 2D joint observed by one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewObservation {
    pub camera: usize,
    pub position: Point2,
    pub time: f64,
    pub confidence: f64,
}

/// Latest observation of one joint per camera.
#[derive(Debug, Clone, PartialEq)]
pub struct JointObservationSet {
    views: Vec<ViewObservation>,
}

impl JointObservationSet {
    pub fn new(views: Vec<ViewObservation>) -> Result<Self, ReconstructionError> {
        for (i, v) in views.iter().enumerate() {
            if views[..i].iter().any(|w| w.camera == v.camera) {
                return Err(ReconstructionError::DuplicateCamera(v.camera));
            }
        }
        if views.is_empty() {
            return Err(ReconstructionError::InsufficientViews(0));
        }
        Ok(JointObservationSet { views })
    }

    pub fn views(&self) -> &[ViewObservation] {
        &self.views
    }

    /// The newest timestamp; the instant the estimate refers to.
    pub fn reference_time(&self) -> f64 {
        self.views.iter().map(|v| v.time).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationResult {
    pub position: Point3,
    /// Mean reprojection distance in pixels over the contributing views.
    pub residual: f64,
    pub n_views: usize,
}

/// Row weight `exp(−λ_t·(t_now − t_i)) / ‖row‖`.
#[inline]
pub fn row_weight(t_now: f64, t_i: f64, lambda_t: f64, row_norm: f64) -> f64 {
    (-lambda_t * (t_now - t_i)).exp() / row_norm
}

#[inline]
fn view_rows(cam: &CameraView, x: &Point2) -> [RowVector4<f64>; 2] {
    let p = cam.projection();
    let p3 = p.row(2);
    [x.x * p3 - p.row(0), x.y * p3 - p.row(1)]
}

/// The `2n × 4` coefficient matrix, two rows per view in observation order.
pub fn build_coefficients(obs: &JointObservationSet, cams: &Calibration) -> Result<DMatrix<f64>, ReconstructionError> {
    let mut c = DMatrix::zeros(2 * obs.views.len(), 4);
    for (i, v) in obs.views.iter().enumerate() {
        let cam = camera(cams, v.camera)?;
        let [r1, r2] = view_rows(cam, &v.position);
        c.set_row(2 * i, &r1);
        c.set_row(2 * i + 1, &r2);
    }
    Ok(c)
}

fn camera(cams: &Calibration, index: usize) -> Result<&CameraView, ReconstructionError> {
    cams.cameras()
        .get(index)
        .ok_or(ReconstructionError::UnknownCamera(index))
}

/// How rows are scaled before solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowWeighting {
    /// Plain DLT: every row as is.
    Plain,
    /// Time decay towards `t_now` divided by the row norm, optionally scaled
    /// by detector confidence.
    Temporal {
        t_now: f64,
        lambda_t: f64,
        use_confidence: bool,
    },
}

/// Accumulates `Σ w² r rᵀ` over views and solves for the null vector.
///
/// Used directly by the tracker with its per-camera observation slots.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    normal: Matrix4<f64>,
    weighting: RowWeighting,
    n_views: usize,
    first_center: Option<Point3>,
    distinct_centers: bool,
}

impl NormalEquations {
    pub fn new(weighting: RowWeighting) -> Self {
        NormalEquations {
            normal: Matrix4::zeros(),
            weighting,
            n_views: 0,
            first_center: None,
            distinct_centers: false,
        }
    }

    pub fn add(&mut self, cam: &CameraView, x: &Point2, time: f64, confidence: f64) {
        for row in view_rows(cam, x) {
            let w = match self.weighting {
                RowWeighting::Plain => 1.0,
                RowWeighting::Temporal {
                    t_now,
                    lambda_t,
                    use_confidence,
                } => {
                    let w = row_weight(t_now, time, lambda_t, row.norm());
                    if use_confidence {
                        w * confidence
                    } else {
                        w
                    }
                }
            };
            let r = row * w;
            self.normal += r.transpose() * r;
        }
        self.n_views += 1;
        match self.first_center {
            None => self.first_center = Some(*cam.center()),
            Some(c) => {
                if (c - cam.center()).norm() >= COINCIDENT_CENTERS {
                    self.distinct_centers = true;
                }
            }
        }
    }

    pub fn n_views(&self) -> usize {
        self.n_views
    }

    /// Unit-norm homogeneous solution.
    pub fn solve_homogeneous(&self) -> Result<Vector4<f64>, ReconstructionError> {
        if self.n_views < 2 || !self.distinct_centers {
            return Err(ReconstructionError::InsufficientViews(self.n_views));
        }
        let scale = self.normal.trace();
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(ReconstructionError::NearDegenerate);
        }
        let eig = SymmetricEigen::new(self.normal / scale);
        let smallest = eig.eigenvalues.imin();
        Ok(eig.eigenvectors.column(smallest).normalize())
    }

    pub fn solve(&self) -> Result<Point3, ReconstructionError> {
        let h = self.solve_homogeneous()?;
        if h.w.abs() < INFINITY_TOLERANCE || !h.w.is_finite() {
            return Err(ReconstructionError::NearDegenerate);
        }
        Ok(Point3::from(h.xyz() / h.w))
    }
}

fn solve_set(
    obs: &JointObservationSet,
    cams: &Calibration,
    weighting: RowWeighting,
) -> Result<TriangulationResult, ReconstructionError> {
    let mut eq = NormalEquations::new(weighting);
    for v in &obs.views {
        eq.add(camera(cams, v.camera)?, &v.position, v.time, v.confidence);
    }
    let position = eq.solve()?;
    let residual = obs
        .views
        .iter()
        .map(|v| (cams.camera(v.camera).project_unchecked(&position).0 - v.position).norm())
        .sum::<f64>()
        / obs.views.len() as f64;
    Ok(TriangulationResult {
        position,
        residual,
        n_views: obs.views.len(),
    })
}

/// Plain linear triangulation.
pub fn triangulate(obs: &JointObservationSet, cams: &Calibration) -> Result<TriangulationResult, ReconstructionError> {
    solve_set(obs, cams, RowWeighting::Plain)
}

/// Triangulation with rows weighted by `exp(−λ_t(t − t_i)) / ‖row‖`, `t`
/// being the newest observation time.
pub fn triangulate_weighted(
    obs: &JointObservationSet,
    cams: &Calibration,
    lambda_t: f64,
) -> Result<TriangulationResult, ReconstructionError> {
    solve_set(
        obs,
        cams,
        RowWeighting::Temporal {
            t_now: obs.reference_time(),
            lambda_t,
            use_confidence: false,
        },
    )
}
