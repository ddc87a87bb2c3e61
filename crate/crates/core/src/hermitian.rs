//! Hermitian linear algebra on `C^3`.
//!
//! The form is linear in the first slot and conjugate-linear in the second:
//! `<u, v> = Σ_ij G_ij u_i conj(v_j)`. With this convention a matrix `M`
//! preserves the form iff `Mᵀ G conj(M) = G`; for the real symmetric Gram
//! matrices used throughout this is the familiar `Mᴴ G M = G`.

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, Classification};

pub use num_complex::Complex64 as C64;

pub type Mat3 = Matrix3<C64>;
pub type Vec3 = Vector3<C64>;

pub const HERMITIAN_TOL: f64 = 1e-14;

pub fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat3, b: &Mat3) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn diag(a: C64, b: C64, c: C64) -> Mat3 {
    Mat3::from_diagonal(&Vec3::new(a, b, c))
}

pub fn real_diag(a: f64, b: f64, c: f64) -> Mat3 {
    diag(real(a), real(b), real(c))
}

/// Euclidean (coordinate) norm squared.
pub fn coord_norm_sq(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointType {
    Positive,
    Negative,
    Isotropic,
}

/// A hermitian form of signature `++-` on `C^3`, given by its Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianSpace {
    gram: Mat3,
}

impl HermitianSpace {
    pub fn new(gram: Mat3) -> Result<Self> {
        let scale = max_abs(&gram).max(1.0);
        let asym = max_abs_diff(&gram, &gram.adjoint());
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        let space = Self { gram };
        let (pos, neg, zero) = space.inertia();
        if (pos, neg, zero) != (2, 1, 0) {
            return Err(Error::WrongSignature(format!("(+{pos}, -{neg}, 0×{zero})")));
        }
        Ok(space)
    }

    /// `diag(1, 1, -1)`.
    pub fn ball() -> Self {
        Self {
            gram: real_diag(1.0, 1.0, -1.0),
        }
    }

    /// `[[1,0,0],[0,0,1],[0,1,0]]`: a positive vector and two isotropic ones
    /// pairing to 1.
    pub fn null() -> Self {
        let o = real(0.0);
        let l = real(1.0);
        Self {
            gram: Mat3::new(l, o, o, o, o, l, o, l, o),
        }
    }

    pub fn gram(&self) -> &Mat3 {
        &self.gram
    }

    fn inertia(&self) -> (usize, usize, usize) {
        let roots = spectral::char_poly_roots(&self.gram);
        let scale = roots
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()))
            .max(1e-300);
        let mut counts = (0, 0, 0);
        for z in roots {
            if z.re > 1e-12 * scale {
                counts.0 += 1;
            } else if z.re < -1e-12 * scale {
                counts.1 += 1;
            } else {
                counts.2 += 1;
            }
        }
        counts
    }

    pub fn inner(&self, u: &Vec3, v: &Vec3) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc += self.gram[(i, j)] * u[i] * v[j].conj();
            }
        }
        acc
    }

    pub fn norm_sq(&self, v: &Vec3) -> f64 {
        self.inner(v, v).re
    }

    /// Sign of `<v, v>`; values with `|<v,v>| < tol·|v|²` count as isotropic.
    pub fn point_type(&self, v: &Vec3, tol: f64) -> Result<PointType> {
        let e = coord_norm_sq(v);
        if e == 0.0 {
            return Err(Error::ZeroVector);
        }
        let n = self.norm_sq(v);
        Ok(if n.abs() < tol * e {
            PointType::Isotropic
        } else if n > 0.0 {
            PointType::Positive
        } else {
            PointType::Negative
        })
    }

    /// Gram matrix of the basis formed by the columns of `b`.
    pub fn transported_gram(&self, b: &Mat3) -> Mat3 {
        b.transpose() * self.gram * b.conjugate()
    }

    /// `max |Mᵀ G conj(M) - G|`, scaled by `max(1, max|M|²)` so that long
    /// products are judged by relative rounding error.
    pub fn form_residual(&self, m: &Mat3) -> f64 {
        let scale = max_abs(m).max(1.0);
        max_abs_diff(&self.transported_gram(m), &self.gram) / (scale * scale)
    }

    /// Inverse of a form-preserving matrix: `conj(G)⁻¹ Mᴴ conj(G)`. Exact
    /// (no division) for the real diagonal and null Gram matrices.
    pub fn isometry_inverse(&self, m: &Mat3) -> Mat3 {
        let gbar = self.gram.conjugate();
        let ginv = gbar.try_inverse().expect("gram matrix is invertible");
        ginv * m.adjoint() * gbar
    }
}

/// A certified element of `SU(2,1)`.
#[derive(Debug, Clone)]
pub struct Isometry {
    matrix: Mat3,
    space: HermitianSpace,
    form_residual: f64,
    det_residual: f64,
    class: OnceLock<(f64, Classification)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuResiduals {
    pub form: f64,
    pub det: f64,
}

/// Certifies `m` as an element of `SU(space)`.
pub fn su_check(m: Mat3, space: &HermitianSpace, tol: f64) -> Result<Isometry> {
    Isometry::certify(m, space, tol)
}

impl Isometry {
    pub fn certify(m: Mat3, space: &HermitianSpace, tol: f64) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        let iso = Self::unchecked(m, space);
        if iso.form_residual >= tol {
            return Err(Error::FormNotPreserved(iso.form_residual));
        }
        if iso.det_residual >= tol {
            return Err(Error::DetNotOne(iso.det_residual));
        }
        Ok(iso)
    }

    /// Wraps a product of certified isometries; residuals are recorded, not
    /// checked.
    pub(crate) fn unchecked(m: Mat3, space: &HermitianSpace) -> Self {
        let scale = max_abs(&m).max(1.0);
        let det_residual = (m.determinant() - C64::new(1.0, 0.0)).norm() / scale.powi(3);
        Self {
            form_residual: space.form_residual(&m),
            det_residual,
            matrix: m,
            space: *space,
            class: OnceLock::new(),
        }
    }

    pub fn identity(space: &HermitianSpace) -> Self {
        Self::unchecked(Mat3::identity(), space)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    pub fn space(&self) -> &HermitianSpace {
        &self.space
    }

    pub fn residuals(&self) -> SuResiduals {
        SuResiduals {
            form: self.form_residual,
            det: self.det_residual,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn compose(&self, rhs: &Isometry) -> Isometry {
        Self::unchecked(self.matrix * rhs.matrix, &self.space)
    }

    pub fn inverse(&self) -> Isometry {
        Self::unchecked(self.space.isometry_inverse(&self.matrix), &self.space)
    }

    /// Multiplies by a scalar of unit modulus whose cube is 1.
    pub fn scaled(&self, delta: C64) -> Isometry {
        Self::unchecked(self.matrix * delta, &self.space)
    }

    pub fn pow(&self, n: i32) -> Isometry {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Mat3::identity();
        for _ in 0..n.unsigned_abs() {
            acc *= base.matrix;
        }
        Self::unchecked(acc, &self.space)
    }

    /// Classification, cached on first use for the tolerance it was computed
    /// with.
    pub fn classify(&self, tol_class: f64) -> Result<Classification> {
        if let Some((t, c)) = self.class.get() {
            if *t == tol_class {
                return Ok(c.clone());
            }
        }
        let c = spectral::classify(&self.matrix, tol_class)?;
        let _ = self.class.set((tol_class, c.clone()));
        Ok(c)
    }
}

/// Change of basis: the columns of `matrix` are the new basis vectors in
/// old coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    matrix: Mat3,
    inverse: Mat3,
    source: HermitianSpace,
    target_gram: Mat3,
}

impl BasisChange {
    pub fn new(matrix: Mat3, source: &HermitianSpace) -> Result<Self> {
        let col_norms: f64 = (0..3)
            .map(|j| coord_norm_sq(&matrix.column(j).into_owned()).sqrt())
            .product();
        let det = matrix.determinant().norm();
        if col_norms == 0.0 || det < 1e-14 * col_norms {
            return Err(Error::SingularChange);
        }
        let inverse = matrix.try_inverse().ok_or(Error::SingularChange)?;
        Ok(Self {
            target_gram: source.transported_gram(&matrix),
            matrix,
            inverse,
            source: *source,
        })
    }

    /// Like [`BasisChange::new`], additionally checking that the transported
    /// Gram matrix equals `target` within `tol`.
    pub fn with_target(
        matrix: Mat3,
        source: &HermitianSpace,
        target: &Mat3,
        tol: f64,
    ) -> Result<Self> {
        let change = Self::new(matrix, source)?;
        let res = change.gram_residual(target);
        if res >= tol {
            return Err(Error::FormNotPreserved(res));
        }
        Ok(change)
    }

    pub fn identity(space: &HermitianSpace) -> Self {
        Self {
            matrix: Mat3::identity(),
            inverse: Mat3::identity(),
            source: *space,
            target_gram: *space.gram(),
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.matrix
    }

    pub fn inverse(&self) -> &Mat3 {
        &self.inverse
    }

    pub fn source(&self) -> &HermitianSpace {
        &self.source
    }

    pub fn target_gram(&self) -> &Mat3 {
        &self.target_gram
    }

    pub fn target_space(&self) -> Result<HermitianSpace> {
        HermitianSpace::new(self.target_gram)
    }

    pub fn gram_residual(&self, expected: &Mat3) -> f64 {
        max_abs_diff(&self.target_gram, expected)
    }

    pub fn vector(&self, v: &Vec3) -> Vec3 {
        self.inverse * v
    }

    pub fn matrix_of(&self, m: &Mat3) -> Mat3 {
        self.inverse * m * self.matrix
    }

    /// Transports a certified isometry into the target basis and
    /// re-certifies it there.
    pub fn isometry(&self, iso: &Isometry, tol: f64) -> Result<Isometry> {
        let space = self.target_space()?;
        Isometry::certify(self.matrix_of(iso.matrix()), &space, tol)
    }

    pub fn then(&self, next: &BasisChange) -> Result<BasisChange> {
        BasisChange::new(self.matrix * next.matrix, &self.source)
    }
}
