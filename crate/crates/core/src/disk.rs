//! The hyperbolic plane as the unit disk, with `SU(1,1)` acting on lifts
//! `(z, 1)` of points through the form `diag(1, -1)`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{cx, real, HermitianSpace, Isometry, Mat3, C64};
use crate::json;

pub type Mat2 = Matrix2<C64>;
pub type Vec2 = Vector2<C64>;

/// `<x, y> = x0·conj(y0) - x1·conj(y1)`.
pub fn inner2(x: &Vec2, y: &Vec2) -> C64 {
    x[0] * y[0].conj() - x[1] * y[1].conj()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiskPoint {
    #[serde(with = "json::complex")]
    z: C64,
}

impl DiskPoint {
    pub fn new(z: C64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 {
            return Err(Error::OutsideDisk(z.norm()));
        }
        Ok(Self { z })
    }

    pub fn origin() -> Self {
        Self { z: real(0.0) }
    }

    pub fn polar(radius: f64, angle: f64) -> Result<Self> {
        Self::new(C64::from_polar(radius, angle))
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn lift(&self) -> Vec2 {
        Vec2::new(self.z, real(1.0))
    }
}

/// Hyperbolic distance (curvature -1).
pub fn dist(a: &DiskPoint, b: &DiskPoint) -> f64 {
    let num = (a.z - b.z).norm();
    let den = ((1.0 - a.z.norm_sqr()) * (1.0 - b.z.norm_sqr())).sqrt();
    2.0 * (num / den).asinh()
}

/// An element of `SU(1,1)` acting by `z ↦ (az + b)/(cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11 {
    m: Mat2,
}

impl Su11 {
    pub fn certify(m: Mat2, tol: f64) -> Result<Self> {
        let g = Mat2::new(real(1.0), real(0.0), real(0.0), real(-1.0));
        let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        let form = (m.transpose() * g * m.conjugate() - g)
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
            / (scale * scale);
        if form >= tol {
            return Err(Error::FormNotPreserved(form));
        }
        let det = (m.determinant() - real(1.0)).norm() / (scale * scale);
        if det >= tol {
            return Err(Error::DetNotOne(det));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn identity() -> Self {
        Self {
            m: Mat2::identity(),
        }
    }

    /// The element moving `a` to the origin: `z ↦ (z - a)/(1 - conj(a) z)`.
    pub fn to_origin(a: &DiskPoint) -> Self {
        let s = 1.0 / (1.0 - a.z.norm_sqr()).sqrt();
        Self {
            m: Mat2::new(real(s), -a.z * s, -a.z.conj() * s, real(s)),
        }
    }

    pub fn rotation(angle: f64) -> Self {
        let h = C64::from_polar(1.0, angle / 2.0);
        Self {
            m: Mat2::new(h, real(0.0), real(0.0), h.conj()),
        }
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        Self {
            m: Mat2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]),
        }
    }

    pub fn compose(&self, other: &Su11) -> Self {
        Self {
            m: self.m * other.m,
        }
    }

    fn mobius(&self, z: C64) -> C64 {
        (self.m[(0, 0)] * z + self.m[(0, 1)]) / (self.m[(1, 0)] * z + self.m[(1, 1)])
    }

    pub fn apply(&self, p: &DiskPoint) -> DiskPoint {
        let w = self.mobius(p.z);
        // Möbius images of interior points stay interior; clamp rounding.
        DiskPoint::new(w).unwrap_or_else(|_| DiskPoint {
            z: w / w.norm() * (1.0 - f64::EPSILON),
        })
    }

    /// Image of the boundary point `e^{iθ}`, as an angle in `[0, 2π)`.
    pub fn apply_boundary(&self, theta: f64) -> f64 {
        wrap(self.mobius(C64::from_polar(1.0, theta)).arg())
    }
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Hyperbolic midpoint of the segment `[a, b]`.
pub fn midpoint(a: &DiskPoint, b: &DiskPoint) -> Result<DiskPoint> {
    if (a.z - b.z).norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let t = Su11::to_origin(a);
    let w = t.apply(b).z;
    let d = dist(a, b);
    let m = DiskPoint::new(w / w.norm() * (d / 4.0).tanh())?;
    Ok(t.inverse().apply(&m))
}

/// Gauss–Bonnet: area of a geodesic triangle with the given interior angles.
pub fn triangle_area(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let sum = alpha + beta + gamma;
    if alpha < 0.0 || beta < 0.0 || gamma < 0.0 || sum >= PI {
        return Err(Error::NonHyperbolicAngles(sum));
    }
    Ok(PI - sum)
}

/// Interior angle at `v` of the geodesic triangle/polygon corner `(p, v, q)`.
pub fn angle_at(v: &DiskPoint, p: &DiskPoint, q: &DiskPoint) -> f64 {
    let t = Su11::to_origin(v);
    let a = t.apply(p).z.arg();
    let b = t.apply(q).z.arg();
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Area of a convex geodesic polygon via its angle defect.
pub fn polygon_area(vertices: &[DiskPoint]) -> f64 {
    let n = vertices.len();
    let sum: f64 = (0..n)
        .map(|k| {
            angle_at(
                &vertices[k],
                &vertices[(k + n - 1) % n],
                &vertices[(k + 1) % n],
            )
        })
        .sum();
    (n as f64 - 2.0) * PI - sum
}

/// Regular pentagon with vertex angle `2π/5` together with its side
/// midpoints; `midpoints[k]` lies on the side `vertices[k]–vertices[k+1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pentagon {
    pub vertices: [DiskPoint; 5],
    pub midpoints: [DiskPoint; 5],
}

/// Geometry checks of a [`Pentagon`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PentagonCheck {
    pub angles: [f64; 5],
    pub area: f64,
    /// `max |d(m, v_k) - d(m, v_{k+1})|` over the sides.
    pub midpoint_residual: f64,
    /// Angles of the ten triangles (center, vertex, adjacent midpoint),
    /// listed as (at center, at vertex, at midpoint).
    pub triangles: Vec<[f64; 3]>,
}

impl Pentagon {
    pub fn map(&self, t: &Su11) -> Pentagon {
        Pentagon {
            vertices: self.vertices.map(|p| t.apply(&p)),
            midpoints: self.midpoints.map(|p| t.apply(&p)),
        }
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn check(&self, center: &DiskPoint) -> PentagonCheck {
        let v = &self.vertices;
        let angles = [0, 1, 2, 3, 4].map(|k| angle_at(&v[k], &v[(k + 4) % 5], &v[(k + 1) % 5]));
        let midpoint_residual = (0..5)
            .map(|k| {
                (dist(&self.midpoints[k], &v[k]) - dist(&self.midpoints[k], &v[(k + 1) % 5])).abs()
            })
            .fold(0.0, f64::max);
        let mut triangles = Vec::with_capacity(10);
        for k in 0..5 {
            let m = &self.midpoints[k];
            for vert in [&v[k], &v[(k + 1) % 5]] {
                triangles.push([
                    angle_at(center, vert, m),
                    angle_at(vert, center, m),
                    angle_at(m, center, vert),
                ]);
            }
        }
        PentagonCheck {
            angles,
            area: self.area(),
            midpoint_residual,
            triangles,
        }
    }
}

/// Regular pentagon with interior angles `2π/5` (area `π`) centred at
/// `center`; vertices at angles `phase + 2πk/5`, midpoints at
/// `phase + π/5 + 2πk/5` as seen from the centre.
pub fn regular_pentagon(center: &DiskPoint, phase: f64) -> Pentagon {
    let a = PI / 5.0;
    let cot = 1.0 / a.tan();
    // right triangle (center, vertex, midpoint) with angles π/5, π/5, π/2
    let circumradius = (cot * cot).acosh();
    let apothem = cot.acosh();
    let back = Su11::to_origin(center).inverse();
    let at = |r: f64, theta: f64| {
        let p = DiskPoint::polar((r / 2.0).tanh(), theta).expect("inside the disk");
        back.apply(&p)
    };
    Pentagon {
        vertices: [0, 1, 2, 3, 4].map(|k| at(circumradius, phase + 2.0 * a * k as f64)),
        midpoints: [0, 1, 2, 3, 4].map(|k| at(apothem, phase + a + 2.0 * a * k as f64)),
    }
}

/// Matrix of `x ↦ i(x - 2<x,q>/<q,q> q)` on `C^{1,1}`: the half-turn about
/// `q`, squaring to `-I`.
pub fn reflect_matrix(q: &DiskPoint) -> Result<Su11> {
    let lq = q.lift();
    let qq = inner2(&lq, &lq);
    if qq.re >= 0.0 {
        return Err(Error::OutsideDisk(q.z.norm()));
    }
    let i = cx(0.0, 1.0);
    let column = |x: Vec2| (x - lq * (inner2(&x, &lq) * 2.0 / qq)) * i;
    let c0 = column(Vec2::new(real(1.0), real(0.0)));
    let c1 = column(Vec2::new(real(0.0), real(1.0)));
    Su11::certify(Mat2::from_columns(&[c0, c1]), 1e-10)
}

/// Geodesic of the disk, stored by its two boundary angles in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskGeodesic {
    pub theta1: f64,
    pub theta2: f64,
}

impl DiskGeodesic {
    pub fn new(theta1: f64, theta2: f64, tol_geo: f64) -> Result<Self> {
        let (t1, t2) = (wrap(theta1), wrap(theta2));
        if circular_gap(t1, t2) <= tol_geo {
            return Err(Error::CoincidentPoints);
        }
        Ok(Self {
            theta1: t1,
            theta2: t2,
        })
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

pub fn geodesic_through(a: &DiskPoint, b: &DiskPoint, tol_geo: f64) -> Result<DiskGeodesic> {
    if (a.z - b.z).norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let t = Su11::to_origin(a);
    let dir = t.apply(b).z.arg();
    let back = t.inverse();
    DiskGeodesic::new(
        back.apply_boundary(dir),
        back.apply_boundary(dir + PI),
        tol_geo,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicRelation {
    Intersecting,
    Asymptotic,
    Ultraparallel,
}

/// Relation of two geodesics together with the interleaving margin: the
/// smallest angular gap between an endpoint of one and an endpoint of the
/// other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPair {
    pub relation: GeodesicRelation,
    pub margin: f64,
}

fn on_open_arc(start: f64, end: f64, x: f64) -> bool {
    let span = (end - start).rem_euclid(2.0 * PI);
    let off = (x - start).rem_euclid(2.0 * PI);
    off > 0.0 && off < span
}

pub fn ultraparallel(g1: &DiskGeodesic, g2: &DiskGeodesic, tol_geo: f64) -> Result<GeodesicPair> {
    let gaps = [
        circular_gap(g1.theta1, g2.theta1),
        circular_gap(g1.theta1, g2.theta2),
        circular_gap(g1.theta2, g2.theta1),
        circular_gap(g1.theta2, g2.theta2),
    ];
    let margin = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let shared = gaps.iter().filter(|&&g| g <= tol_geo).count();
    if (gaps[0] <= tol_geo && gaps[3] <= tol_geo) || (gaps[1] <= tol_geo && gaps[2] <= tol_geo) {
        return Err(Error::CoincidentGeodesics);
    }
    let relation = if shared > 0 {
        GeodesicRelation::Asymptotic
    } else {
        let a = on_open_arc(g1.theta1, g1.theta2, g2.theta1);
        let b = on_open_arc(g1.theta1, g1.theta2, g2.theta2);
        if a != b {
            GeodesicRelation::Intersecting
        } else {
            GeodesicRelation::Ultraparallel
        }
    };
    Ok(GeodesicPair { relation, margin })
}

/// Block embedding `diag(u, A)` into `SU(2,1)` in the ball basis
/// `diag(1, 1, -1)`.
pub fn block_embed(u: C64, a: &Mat2) -> Mat3 {
    let o = real(0.0);
    Mat3::new(u, o, o, o, a[(0, 0)], a[(0, 1)], o, a[(1, 0)], a[(1, 1)])
}

pub fn embed_su21(a: &Su11) -> Result<Isometry> {
    Isometry::certify(block_embed(real(1.0), &a.m), &HermitianSpace::ball(), 1e-10)
}

/// `Q(q) = diag(-1) ⊕ (-i·R(q))`: an involution of `SU(2,1)` preserving the
/// complex geodesic of the block and fixing its polar point `e0`.
pub fn q_involution(q: &DiskPoint) -> Result<Isometry> {
    let r = reflect_matrix(q)?;
    let block = r.m * cx(0.0, -1.0);
    Isometry::certify(
        block_embed(real(-1.0), &block),
        &HermitianSpace::ball(),
        1e-10,
    )
}
