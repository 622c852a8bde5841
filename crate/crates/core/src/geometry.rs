//! Calibrated pinhole camera math: projection, back-projection to rays,
//! epipolar lines and the point/line distances used by the affinity terms.

use std::collections::HashMap;

use nalgebra::{Matrix3, Matrix3x4, Matrix4x3, Unit, Vector3, Vector4};
use thiserror::Error;

pub type Point2 = nalgebra::Point2<f64>;
pub type Point3 = nalgebra::Point3<f64>;

/// Relative singular-value floor below which a projection matrix is rank deficient.
const RANK_TOLERANCE: f64 = 1e-12;
/// Smallest homogeneous depth accepted by [`CameraView::project`].
const MIN_DEPTH: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("projection matrix of camera `{0}` is rank deficient")]
    RankDeficient(String),
    #[error("camera `{0}` has its center at infinity")]
    AffineCamera(String),
    #[error("degenerate projection (homogeneous depth {depth:e})")]
    DegenerateProjection { depth: f64 },
    #[error("camera centers coincide")]
    CoincidentCenters,
    #[error("point is the epipole, the epipolar line is undefined")]
    DegenerateLine,
    #[error("duplicate camera id `{0}`")]
    DuplicateCamera(String),
}

/// A ray with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray3 {
    pub origin: Point3,
    pub direction: Unit<Vector3<f64>>,
}

impl Ray3 {
    pub fn at(&self, s: f64) -> Point3 {
        self.origin + self.direction.into_inner() * s
    }
}

/// Homogeneous image line `(a, b, c)` scaled so that `a² + b² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line2(pub Vector3<f64>);

impl Line2 {
    /// Distance in pixels from `x` to the line.
    pub fn distance(&self, x: &Point2) -> f64 {
        (self.0.x * x.x + self.0.y * x.y + self.0.z).abs()
    }
}

/// Fundamental matrix of an ordered camera pair: `x2ᵀ F x1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix(pub Matrix3<f64>);

impl FundamentalMatrix {
    /// The fundamental matrix of the reversed pair.
    pub fn transpose(&self) -> Self {
        FundamentalMatrix(self.0.transpose())
    }

    /// Algebraic residual `x2ᵀ F x1`.
    pub fn residual(&self, x1: &Point2, x2: &Point2) -> f64 {
        x2.to_homogeneous().dot(&(self.0 * x1.to_homogeneous()))
    }
}

/// A calibrated camera with everything derived from its projection matrix.
///
/// Immutable after construction; the pseudo-inverse and center are computed
/// once so the per-frame path never factorizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    id: String,
    p: Matrix3x4<f64>,
    p_pinv: Matrix4x3<f64>,
    center: Point3,
    /// `sign(det M)` where `P = [M | p4]`; orients depth so that visible points are positive.
    depth_sign: f64,
    image_size: (u32, u32),
}

impl CameraView {
    pub fn new(id: impl Into<String>, p: Matrix3x4<f64>, image_size: (u32, u32)) -> Result<Self, GeometryError> {
        let id = id.into();
        let svd = p.svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if !(max > 0.0) || min <= RANK_TOLERANCE * max || !p.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::RankDeficient(id));
        }
        let p_pinv = p
            .svd(true, true)
            .pseudo_inverse(RANK_TOLERANCE * max)
            .map_err(|_| GeometryError::RankDeficient(id.clone()))?;

        // Right null vector of P by cofactor expansion along the columns.
        let minor = |skip: usize| {
            let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
            Matrix3::from_columns(&[p.column(cols[0]), p.column(cols[1]), p.column(cols[2])]).determinant()
        };
        let null = Vector4::new(minor(0), -minor(1), minor(2), -minor(3));
        let scale = null.xyz().norm().max(null.w.abs());
        if null.w.abs() <= 1e-12 * scale {
            return Err(GeometryError::AffineCamera(id));
        }
        let center = Point3::from(null.xyz() / null.w);
        let det_m = p.fixed_view::<3, 3>(0, 0).determinant();

        Ok(CameraView {
            id,
            p,
            p_pinv,
            center,
            depth_sign: det_m.signum(),
            image_size,
        })
    }

    /// Builds `K [R | -R·eye]` for a camera at `eye` looking at `target` with
    /// square pixels and the principal point at the image center.
    pub fn look_at(
        id: impl Into<String>,
        eye: Point3,
        target: Point3,
        focal_px: f64,
        image_size: (u32, u32),
    ) -> Result<Self, GeometryError> {
        let z = (target - eye).normalize();
        let mut up = Vector3::z();
        if z.cross(&up).norm() < 1e-6 {
            up = Vector3::y();
        }
        let x = z.cross(&up).normalize();
        let y = z.cross(&x);
        let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let t = -(r * eye.coords);
        let k = Matrix3::new(
            focal_px,
            0.0,
            image_size.0 as f64 / 2.0,
            0.0,
            focal_px,
            image_size.1 as f64 / 2.0,
            0.0,
            0.0,
            1.0,
        );
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        rt.set_column(3, &t);
        Self::new(id, k * rt, image_size)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn projection(&self) -> &Matrix3x4<f64> {
        &self.p
    }

    pub fn pseudo_inverse(&self) -> &Matrix4x3<f64> {
        &self.p_pinv
    }

    pub fn center(&self) -> &Point3 {
        &self.center
    }

    pub fn image_size(&self) -> (u32, u32) {
        self.image_size
    }

    /// Projection without cheirality checks: pixel coordinates and the
    /// oriented depth (positive in front of the camera).
    pub fn project_unchecked(&self, x: &Point3) -> (Point2, f64) {
        let h = self.p * x.to_homogeneous();
        (Point2::new(h.x / h.z, h.y / h.z), h.z * self.depth_sign)
    }

    pub fn project(&self, x: &Point3) -> Result<Point2, GeometryError> {
        let (uv, depth) = self.project_unchecked(x);
        if depth <= MIN_DEPTH {
            return Err(GeometryError::DegenerateProjection { depth });
        }
        Ok(uv)
    }

    /// Whether a pixel lies inside the image rectangle.
    pub fn contains(&self, x: &Point2) -> bool {
        x.x >= 0.0 && x.y >= 0.0 && x.x < self.image_size.0 as f64 && x.y < self.image_size.1 as f64
    }

    /// Back-projects a pixel to the ray `P⁺x̃ + μ·C̃` through the camera center,
    /// oriented towards the visible half-space.
    pub fn back_project(&self, x: &Point2) -> Ray3 {
        let through = self.p_pinv * x.to_homogeneous();
        // Point at infinity of the projective line spanned by P⁺x̃ and C̃.
        let mut dir = through.xyz() - self.center.coords * through.w;
        let m = self.p.fixed_view::<3, 3>(0, 0);
        if (m * dir).z * self.depth_sign < 0.0 {
            dir = -dir;
        }
        Ray3 {
            origin: self.center,
            direction: Unit::new_normalize(dir),
        }
    }
}

/// Distance from a point to the infinite line carrying `ray`.
pub fn point_to_ray_distance(x: &Point3, ray: &Ray3) -> f64 {
    (x - ray.origin).cross(ray.direction.as_ref()).norm()
}

/// Epipolar line `F x̃` in the second image, normalized to pixel units.
pub fn epipolar_line(f: &FundamentalMatrix, x: &Point2) -> Result<Line2, GeometryError> {
    let l = f.0 * x.to_homogeneous();
    let n = l.x.hypot(l.y);
    if n <= f64::MIN_POSITIVE || !n.is_finite() {
        return Err(GeometryError::DegenerateLine);
    }
    Ok(Line2(l / n))
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `F = [e₂]ₓ P₂ P₁⁺` with `e₂ = P₂ C̃₁`, scaled to unit Frobenius norm.
pub fn fundamental_from_projections(cam1: &CameraView, cam2: &CameraView) -> Result<FundamentalMatrix, GeometryError> {
    if (cam1.center - cam2.center).norm() < 1e-9 {
        return Err(GeometryError::CoincidentCenters);
    }
    let e2 = cam2.p * cam1.center.to_homogeneous();
    let f = skew(&e2) * cam2.p * cam1.p_pinv;
    let norm = f.norm();
    if !(norm > 0.0) {
        return Err(GeometryError::CoincidentCenters);
    }
    Ok(FundamentalMatrix(f / norm))
}

/// A set of cameras with unique ids and all pairwise fundamental matrices.
#[derive(Debug, Clone)]
pub struct Calibration {
    cameras: Vec<CameraView>,
    index: HashMap<String, usize>,
    fundamentals: Vec<Option<FundamentalMatrix>>,
}

impl Calibration {
    pub fn new(cameras: Vec<CameraView>) -> Result<Self, GeometryError> {
        let mut index = HashMap::with_capacity(cameras.len());
        for (i, cam) in cameras.iter().enumerate() {
            if index.insert(cam.id.clone(), i).is_some() {
                return Err(GeometryError::DuplicateCamera(cam.id.clone()));
            }
        }
        let n = cameras.len();
        let mut fundamentals = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    // Coincident centers leave the pair without epipolar geometry.
                    fundamentals[i * n + j] = fundamental_from_projections(&cameras[i], &cameras[j]).ok();
                }
            }
        }
        Ok(Calibration {
            cameras,
            index,
            fundamentals,
        })
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[CameraView] {
        &self.cameras
    }

    pub fn camera(&self, index: usize) -> &CameraView {
        &self.cameras[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Fundamental matrix mapping points of camera `from` to lines in camera `to`.
    pub fn fundamental(&self, from: usize, to: usize) -> Option<&FundamentalMatrix> {
        self.fundamentals[from * self.cameras.len() + to].as_ref()
    }
}
