//! Eigenstructure of 3×3 complex matrices and of `SU(2,1)` elements.
//!
//! Eigenvalues come from the characteristic cubic solved by Cardano's
//! formula in complex arithmetic, each root polished by Newton steps on the
//! cubic. Eigenvectors are cross products of rows of `M - λI`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    cx, max_abs, max_abs_diff, real, BasisChange, Isometry, Mat3, PointType, Vec3, C64,
};
use crate::json;
use crate::tol::Tolerances;

/// Relative gap below which two roots are treated as one repeated root.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative residual `‖Mv - λv‖ / ‖M‖` expected of eigenvectors.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;
/// `max|λ| - 1` above this floor but below `tol_class` is reported as
/// indeterminate.
pub const INDETERMINATE_FLOOR: f64 = 1e-9;
const SCALAR_TOL: f64 = 1e-9;

/// Coefficients `(t, s, d)` of `λ³ - tλ² + sλ - d`.
pub fn char_poly(m: &Mat3) -> (C64, C64, C64) {
    let t = m.trace();
    let s = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (t, s, m.determinant())
}

fn eval(t: C64, s: C64, d: C64, x: C64) -> (C64, C64) {
    let f = ((x - t) * x + s) * x - d;
    let df = (x * 3.0 - t * 2.0) * x + s;
    (f, df)
}

fn polish(t: C64, s: C64, d: C64, mut x: C64) -> C64 {
    let (mut f, mut df) = eval(t, s, d, x);
    for _ in 0..8 {
        if f == C64::new(0.0, 0.0) || df.norm() == 0.0 {
            break;
        }
        let next = x - f / df;
        let (nf, ndf) = eval(t, s, d, next);
        // also stops on NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let stalled = !(nf.norm() < f.norm());
        if stalled {
            break;
        }
        x = next;
        f = nf;
        df = ndf;
    }
    x
}

/// Roots of `λ³ - tλ² + sλ - d`, sorted by decreasing modulus.
pub fn cubic_roots(t: C64, s: C64, d: C64) -> [C64; 3] {
    // monic λ³ + aλ² + bλ + c
    let a = -t;
    let b = s;
    let c = -d;
    let shift = t / 3.0;
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + c;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let sq = disc.sqrt();
    let w1 = -q / 2.0 + sq;
    let w2 = -q / 2.0 - sq;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut roots = [shift; 3];
    if w.norm() > 0.0 {
        let u = w.powf(1.0 / 3.0);
        let mut uk = u;
        for root in roots.iter_mut() {
            *root = uk - p / (uk * 3.0) + shift;
            uk *= omega;
        }
    }
    for root in roots.iter_mut() {
        *root = polish(t, s, d, *root);
    }
    roots.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    // The smallest root is recovered multiplicatively when the spread is
    // large; the additive Cardano route loses it to cancellation.
    let prod = roots[0] * roots[1];
    if prod.norm() > 0.0 && roots[2].norm() < 1e-3 * roots[0].norm() {
        let cand = polish(t, s, d, d / prod);
        if eval(t, s, d, cand).0.norm() <= eval(t, s, d, roots[2]).0.norm() {
            roots[2] = cand;
        }
    }
    roots
}

pub fn char_poly_roots(m: &Mat3) -> [C64; 3] {
    let (t, s, d) = char_poly(m);
    cubic_roots(t, s, d)
}

/// Eigen-decomposition of a 3×3 complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigen {
    #[serde(with = "json::complex3")]
    pub values: [C64; 3],
    #[serde(with = "json::vectors3")]
    pub vectors: [Vec3; 3],
    /// Algebraic multiplicity of the cluster each value belongs to.
    pub multiplicity: [usize; 3],
    /// Smallest relative gap between raw roots.
    pub separation: f64,
    /// Some repeated eigenvalue lacks a full eigenspace.
    pub defective: bool,
    /// `max ‖Mv - λv‖ / max(1, ‖M‖)`.
    pub residual: f64,
}

fn rel_gap(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    Vec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

fn norm(v: &Vec3) -> f64 {
    crate::hermitian::coord_norm_sq(v).sqrt()
}

/// Unit coordinate norm, largest component real and positive.
fn canonical(v: Vec3) -> Vec3 {
    let mut k = 0;
    for i in 1..3 {
        if v[i].norm() > v[k].norm() * (1.0 + 1e-12) {
            k = i;
        }
    }
    let phase = v[k].conj() / v[k].norm();
    v * (phase / norm(&v))
}

fn rows(a: &Mat3) -> [Vec3; 3] {
    [0, 1, 2].map(|i| Vec3::new(a[(i, 0)], a[(i, 1)], a[(i, 2)]))
}

/// Null vector of a rank-2 matrix, or `None` if every 2×2 cross product
/// vanishes.
fn null_vector(a: &Mat3) -> Option<Vec3> {
    let r = rows(a);
    let cands = [
        cross(&r[0], &r[1]),
        cross(&r[1], &r[2]),
        cross(&r[2], &r[0]),
    ];
    let best = cands
        .into_iter()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .expect("three candidates");
    (norm(&best) > 0.0).then(|| canonical(best))
}

/// Basis of `{v : row·v = 0}` for the largest row of a rank-1 matrix.
fn null_plane(a: &Mat3) -> Option<[Vec3; 2]> {
    let r = rows(a);
    let row = r.into_iter().max_by(|x, y| norm(x).total_cmp(&norm(y)))?;
    let j = (0..3).max_by(|&x, &y| row[x].norm().total_cmp(&row[y].norm()))?;
    if row[j].norm() == 0.0 {
        return None;
    }
    let others: Vec<usize> = (0..3).filter(|&i| i != j).collect();
    let mk = |i: usize| {
        let mut v = Vec3::zeros();
        v[i] = real(1.0);
        v[j] = -row[i] / row[j];
        v
    };
    let v1 = canonical(mk(others[0]));
    let w = mk(others[1]);
    let proj = v1.dotc(&w);
    let v2 = canonical(w - v1 * proj);
    Some([v1, v2])
}

fn residual_of(m: &Mat3, lambda: C64, v: &Vec3) -> f64 {
    norm(&(m * v - v * lambda)) / norm(v)
}

/// A repeated root is a root of the derivative too, which pins it down far
/// better than the split Cardano roots (error `~√ε` for a double root).
fn refine_cluster(m: &Mat3, mean: C64, n: usize) -> C64 {
    let (t, s, _) = char_poly(m);
    if n == 3 {
        return t / 3.0;
    }
    // 3λ² - 2tλ + s = 0
    let disc = (t * t - s * 3.0).sqrt();
    let (a, b) = ((t + disc) / 3.0, (t - disc) / 3.0);
    if (a - mean).norm() <= (b - mean).norm() {
        a
    } else {
        b
    }
}

pub fn eigen3(m: &Mat3) -> Result<Eigen> {
    let raw = char_poly_roots(m);
    let scale = max_abs(m).max(1.0);
    let mut separation = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            separation = separation.min(rel_gap(raw[i], raw[j]));
        }
    }

    // cluster labels
    let mut label = [0usize, 1, 2];
    for i in 0..3 {
        for j in (i + 1)..3 {
            if rel_gap(raw[i], raw[j]) < CLUSTER_TOL {
                let (lo, hi) = (label[i].min(label[j]), label[i].max(label[j]));
                for l in label.iter_mut() {
                    if *l == hi {
                        *l = lo;
                    }
                }
            }
        }
    }
    let mut values = raw;
    let mut multiplicity = [1usize; 3];
    for i in 0..3 {
        let members: Vec<usize> = (0..3).filter(|&k| label[k] == label[i]).collect();
        multiplicity[i] = members.len();
        if members.len() > 1 {
            let mean = members.iter().map(|&k| raw[k]).sum::<C64>() / members.len() as f64;
            values[i] = refine_cluster(m, mean, members.len());
        }
    }

    let mut vectors = [Vec3::zeros(); 3];
    let mut defective = false;
    let mut done = [false; 3];
    for i in 0..3 {
        if done[i] {
            continue;
        }
        let members: Vec<usize> = (0..3).filter(|&k| label[k] == label[i]).collect();
        let a = m - Mat3::identity() * values[i];
        let rank_tol = 1e-7 * scale;
        let basis: Vec<Vec3> = match members.len() {
            1 => match null_vector(&a) {
                Some(v) => vec![v],
                None => null_plane(&a)
                    .map(|p| p.to_vec())
                    .unwrap_or_else(|| vec![Vec3::x()]),
            },
            n => {
                if max_abs(&a) < rank_tol {
                    vec![Vec3::x(), Vec3::y(), Vec3::z()]
                } else {
                    let plane = null_plane(&a)
                        .filter(|p| p.iter().all(|v| residual_of(m, values[i], v) < rank_tol));
                    match plane {
                        Some(p) if n == 2 => p.to_vec(),
                        Some(p) => {
                            defective = true;
                            vec![p[0], p[1], p[1]]
                        }
                        None => {
                            defective = true;
                            let v = null_vector(&a).unwrap_or_else(Vec3::x);
                            vec![v; n]
                        }
                    }
                }
            }
        };
        for (slot, &k) in members.iter().enumerate() {
            vectors[k] = basis[slot.min(basis.len() - 1)];
            done[k] = true;
        }
    }

    let residual = (0..3)
        .map(|i| residual_of(m, values[i], &vectors[i]))
        .fold(0.0, f64::max)
        / scale;
    if residual > EIGEN_RESIDUAL_TOL && separation < CLUSTER_TOL {
        return Err(Error::IllConditioned {
            separation,
            residual,
        });
    }
    Ok(Eigen {
        values,
        vectors,
        multiplicity,
        separation,
        defective,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Loxodromic,
    Elliptic,
    Parabolic,
    Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    #[serde(with = "json::complex3")]
    pub eigenvalues: [C64; 3],
    /// Modulus of the expanding eigenvalue (loxodromic only).
    pub r: Option<f64>,
    /// Unit factor of the expanding eigenvalue, `λ = rα` (loxodromic only).
    #[serde(with = "json::opt_complex")]
    pub alpha: Option<C64>,
    /// `max|λ|` lies in `(1, 1 + tol_class]`.
    pub indeterminate: bool,
    /// Residual category reached with poorly separated eigenvalues.
    pub low_confidence: bool,
    pub separation: f64,
    pub residual: f64,
}

impl Classification {
    pub fn is_loxodromic(&self) -> bool {
        self.kind == Kind::Loxodromic
    }
}

pub fn classify(m: &Mat3, tol_class: f64) -> Result<Classification> {
    let e = eigen3(m)?;
    let (imax, max_mod) = e
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
    let mut out = Classification {
        kind: Kind::Parabolic,
        eigenvalues: e.values,
        r: None,
        alpha: None,
        indeterminate: false,
        low_confidence: false,
        separation: e.separation,
        residual: e.residual,
    };
    let scale = max_abs(m).max(1.0);
    if CubeRoot::ALL
        .iter()
        .any(|d| max_abs_diff(m, &(Mat3::identity() * d.value())) < SCALAR_TOL * scale)
    {
        out.kind = Kind::Scalar;
        return Ok(out);
    }
    if max_mod > 1.0 + tol_class {
        out.kind = Kind::Loxodromic;
        out.r = Some(max_mod);
        out.alpha = Some(e.values[imax] / max_mod);
        return Ok(out);
    }
    out.indeterminate = max_mod - 1.0 > INDETERMINATE_FLOOR;
    let on_circle = e.values.iter().all(|z| (z.norm() - 1.0).abs() <= tol_class);
    if on_circle && !e.defective {
        out.kind = Kind::Elliptic;
    } else {
        out.kind = Kind::Parabolic;
        out.low_confidence = e.separation < CLUSTER_TOL;
    }
    Ok(out)
}

/// Cube roots of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CubeRoot {
    One,
    Omega,
    OmegaBar,
}

impl CubeRoot {
    pub const ALL: [CubeRoot; 3] = [CubeRoot::One, CubeRoot::Omega, CubeRoot::OmegaBar];

    pub fn value(self) -> C64 {
        let h = 3f64.sqrt() / 2.0;
        match self {
            CubeRoot::One => real(1.0),
            CubeRoot::Omega => cx(-0.5, h),
            CubeRoot::OmegaBar => cx(-0.5, -h),
        }
    }

    pub fn conj(self) -> CubeRoot {
        match self {
            CubeRoot::One => CubeRoot::One,
            CubeRoot::Omega => CubeRoot::OmegaBar,
            CubeRoot::OmegaBar => CubeRoot::Omega,
        }
    }

    /// `|Im(t·conj δ)|`: distance of `t` from the real line `Rδ`.
    pub fn line_distance(self, t: C64) -> f64 {
        (t * self.value().conj()).im.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceType {
    pub delta: CubeRoot,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRejection {
    #[serde(with = "json::complex")]
    pub trace: C64,
    pub closest: CubeRoot,
    pub residual: f64,
    pub threshold: f64,
}

/// The cube root `δ` with `t ∈ Rδ`, accepted when `|Im(t·conj δ)|` is below
/// `tol·(1 + |t|)`. At `t = 0` every line qualifies and `δ = 1` is returned.
pub fn trace_type(t: C64, tol: f64) -> std::result::Result<TraceType, TraceRejection> {
    let mut best = CubeRoot::One;
    let mut best_res = f64::INFINITY;
    for d in CubeRoot::ALL {
        let res = d.line_distance(t);
        if res < best_res {
            best = d;
            best_res = res;
        }
    }
    let threshold = tol * (1.0 + t.norm());
    if best_res < threshold {
        Ok(TraceType {
            delta: best,
            residual: best_res,
        })
    } else {
        Err(TraceRejection {
            trace: t,
            closest: best,
            residual: best_res,
            threshold,
        })
    }
}

/// Eigenbasis `e0, e1, e2` of a real-trace loxodromic `g` in which the Gram
/// matrix is `[[1,0,0],[0,0,1],[0,1,0]]` and `g = diag(1, 1/r, r)`.
///
/// The basis is determined up to `e0 ↦ e^{iψ}e0` and
/// `(e1, e2) ↦ (s·e^{iθ}e1, s⁻¹·e^{iθ}e2)` with `s > 0`; see
/// [`NormalForm::rephased`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub basis: BasisChange,
    /// Expanding eigenvalue; real, `|r| > 1`, negative when the elliptic
    /// part is `-1`.
    pub r: f64,
    /// `<e1, e2>` of the raw eigenvectors before rescaling.
    pub c: C64,
    pub gram_residual: f64,
    pub diag_residual: f64,
}

impl NormalForm {
    pub fn e(&self, k: usize) -> Vec3 {
        self.basis.matrix().column(k).into_owned()
    }

    /// Multiplies `e1` and `e2` by `e^{iθ}`; this keeps `<e1,e2> = 1` and the
    /// diagonal form of `g`.
    pub fn rephased(&self, theta: f64) -> Result<NormalForm> {
        let ph = C64::from_polar(1.0, theta);
        let b = self.basis.matrix() * crate::hermitian::diag(real(1.0), ph, ph);
        Ok(NormalForm {
            basis: BasisChange::new(b, self.basis.source())?,
            ..self.clone()
        })
    }

    /// `h` written in this basis.
    pub fn transport(&self, h: &Mat3) -> Mat3 {
        self.basis.matrix_of(h)
    }
}

pub fn loxodromic_normal_form(g: &Isometry, tol: &Tolerances) -> Result<NormalForm> {
    let class = g.classify(tol.class)?;
    if !class.is_loxodromic() {
        return Err(Error::NotLoxodromic);
    }
    let tr = g.trace();
    match trace_type(tr, tol.trace) {
        Ok(tt) if tt.delta == CubeRoot::One => {}
        _ => return Err(Error::NonRealTrace(tr)),
    }
    let space = g.space();
    let e = eigen3(g.matrix())?;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| e.values[b].norm().total_cmp(&e.values[a].norm()));
    let (i_big, i_unit, i_small) = (order[0], order[1], order[2]);
    let r = e.values[i_big].re;

    let mut e0 = e.vectors[i_unit];
    let n0 = space.norm_sq(&e0);
    if space.point_type(&e0, 1e-9)? != PointType::Positive {
        return Err(Error::IllConditioned {
            separation: e.separation,
            residual: n0,
        });
    }
    e0 /= real(n0.sqrt());
    let mut e1 = e.vectors[i_small];
    let mut e2 = e.vectors[i_big];
    let c = space.inner(&e1, &e2);
    if c.norm() == 0.0 {
        return Err(Error::IllConditioned {
            separation: e.separation,
            residual: 0.0,
        });
    }
    let m = c.norm().sqrt();
    e1 *= c.conj() / (c.norm() * m);
    e2 /= real(m);

    let b = Mat3::from_columns(&[e0, e1, e2]);
    let basis = BasisChange::new(b, space)?;
    let gram_residual = basis.gram_residual(crate::hermitian::HermitianSpace::null().gram());
    let target = crate::hermitian::real_diag(1.0, 1.0 / r, r);
    let diag_residual = max_abs_diff(&basis.matrix_of(g.matrix()), &target) / r.abs();
    Ok(NormalForm {
        basis,
        r,
        c,
        gram_residual,
        diag_residual,
    })
}

/// The pairings `<he0,e0>`, `<he1,e2>`, `<he2,e1>` and the assembled
/// `tr(gⁿh) = <he0,e0> + r⁻ⁿ<he1,e2> + rⁿ<he2,e1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceExpansion {
    #[serde(with = "json::complex3")]
    pub pairings: [C64; 3],
    #[serde(with = "json::complex")]
    pub trace: C64,
}

pub fn pairings(nf: &NormalForm, h: &Mat3) -> [C64; 3] {
    let space = nf.basis.source();
    let (e0, e1, e2) = (nf.e(0), nf.e(1), nf.e(2));
    [
        space.inner(&(h * e0), &e0),
        space.inner(&(h * e1), &e2),
        space.inner(&(h * e2), &e1),
    ]
}

pub fn trace_expansion(nf: &NormalForm, h: &Mat3, n: i32) -> TraceExpansion {
    let p = pairings(nf, h);
    TraceExpansion {
        pairings: p,
        trace: p[0] + p[1] * nf.r.powi(-n) + p[2] * nf.r.powi(n),
    }
}

/// What ruled out every cube root in [`pair_trace_type`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRejection {
    /// `"<he0,e0>"`, `"<he1,e2>"`, `"<he2,e1>"`, `"<h²e1,e2>"` or
    /// `"tr(g^n h)"`.
    pub pairing: String,
    pub n: Option<i32>,
    #[serde(with = "json::complex")]
    pub value: C64,
}

const PAIRING_NAMES: [&str; 3] = ["<he0,e0>", "<he1,e2>", "<he2,e1>"];

/// The common cube root `δ` with all three pairings of `h` in `Rδ` (zero
/// pairings impose nothing), cross-checked against `tr(gⁿh)` for
/// `|n| ≤ n_max`. If both off-diagonal pairings vanish, `h` has the special
/// antidiagonal shape and `δ` is read off `<h²e1,e2> = ε² ∈ R·conj(δ)`.
pub fn pair_trace_type(
    nf: &NormalForm,
    h: &Mat3,
    n_max: i32,
    tol: f64,
) -> std::result::Result<TraceType, PairRejection> {
    let p = pairings(nf, h);
    let zero = tol * max_abs(&nf.transport(h)).max(1.0);
    let on_line = |d: CubeRoot, z: C64| d.line_distance(z) < tol * (1.0 + z.norm());

    let mut allowed: Vec<CubeRoot> = CubeRoot::ALL.to_vec();
    if p[1].norm() < zero && p[2].norm() < zero {
        let h2 = h * h;
        let eps2 = pairings(nf, &h2)[1];
        if eps2.norm() >= zero {
            match trace_type(eps2, tol) {
                Ok(tt) => allowed = vec![tt.delta.conj()],
                Err(_) => {
                    return Err(PairRejection {
                        pairing: "<h²e1,e2>".into(),
                        n: None,
                        value: eps2,
                    })
                }
            }
        }
    }
    for (k, &z) in p.iter().enumerate() {
        if z.norm() < zero {
            continue;
        }
        allowed.retain(|&d| on_line(d, z));
        if allowed.is_empty() {
            return Err(PairRejection {
                pairing: PAIRING_NAMES[k].into(),
                n: None,
                value: z,
            });
        }
    }
    let delta = allowed[0];
    let mut residual: f64 = 0.0;
    for n in -n_max..=n_max {
        let t = trace_expansion(nf, h, n).trace;
        if !on_line(delta, t) {
            return Err(PairRejection {
                pairing: "tr(g^n h)".into(),
                n: Some(n),
                value: t,
            });
        }
        residual = residual.max(delta.line_distance(t) / (1.0 + t.norm()));
    }
    Ok(TraceType { delta, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{real_diag, su_check, HermitianSpace};
    use crate::sample;

    fn sorted_by_re(mut v: [C64; 3]) -> [C64; 3] {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn eigen_of_diagonal() {
        let e = eigen3(&real_diag(1.0, 0.5, 2.0)).unwrap();
        let vals = sorted_by_re(e.values);
        for (v, want) in vals.iter().zip([0.5, 1.0, 2.0]) {
            assert!((v - real(want)).norm() < 1e-14);
        }
        for (i, v) in e.vectors.iter().enumerate() {
            let k = (0..3)
                .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
                .unwrap();
            assert!(
                (v[k] - real(1.0)).norm() < 1e-14,
                "vector {i} not a basis vector"
            );
        }
        assert!(e.residual < 1e-15);
    }

    #[test]
    fn eigen_repeated_root_reports_multiplicity() {
        let m = crate::hermitian::diag(real(-1.0), cx(0.0, -1.0), cx(0.0, -1.0));
        let e = eigen3(&m).unwrap();
        let two = e.multiplicity.iter().filter(|&&k| k == 2).count();
        assert_eq!(two, 2);
        assert!(!e.defective);
        for v in e.values {
            assert!((v - real(-1.0)).norm() < 1e-12 || (v - cx(0.0, -1.0)).norm() < 1e-12);
        }
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn eigen_detects_jordan_block() {
        let o = real(0.0);
        let l = real(1.0);
        let m = Mat3::new(l, l, o, o, l, o, o, o, real(2.0));
        let e = eigen3(&m).unwrap();
        assert!(e.defective);
    }

    #[test]
    fn conjugated_spectrum_is_recovered() {
        let null = HermitianSpace::null();
        let mut r = sample::rng(11);
        let ball = HermitianSpace::ball();
        for _ in 0..50 {
            let u = sample::random_su21(&mut r, 1.0);
            let g = sample::null_to_ball_matrix(&real_diag(1.0, 1.0 / 3.0, 3.0));
            let m = sample::conjugate(&u, &g, &ball);
            let e = eigen3(&m).unwrap();
            let vals = sorted_by_re(e.values);
            for (v, want) in vals.iter().zip([1.0 / 3.0, 1.0, 3.0]) {
                assert!((v - real(want)).norm() < 1e-9, "{v} vs {want}");
            }
            assert!(e.residual < 1e-9);
        }
        let _ = null;
    }

    #[test]
    fn classify_examples() {
        let c = classify(&real_diag(1.0, 0.5, 2.0), 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Loxodromic);
        assert!((c.r.unwrap() - 2.0).abs() < 1e-14);
        assert!((c.alpha.unwrap() - real(1.0)).norm() < 1e-14);

        let w = CubeRoot::Omega.value();
        let c = classify(&(Mat3::identity() * w), 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Scalar);
        assert!(((Mat3::identity() * w).trace() - w * 3.0).norm() < 1e-15);

        let m = real_diag(1.0, -0.5, -2.0);
        let c = classify(&m, 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Loxodromic);
        assert!((c.alpha.unwrap() - real(-1.0)).norm() < 1e-14);
        assert!((m.trace() - real(-1.5)).norm() < 1e-15);

        let c = classify(&sample::phase_rotation(0.4, 1.1), 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Elliptic);
    }

    #[test]
    fn classify_unipotent_as_parabolic() {
        // 1 + N with N nilpotent of rank 1 preserving diag(1,1,-1)
        let ball = HermitianSpace::ball();
        let i = cx(0.0, 1.0);
        let o = real(0.0);
        let n = Mat3::new(o, o, o, o, i, -i, o, i, -i);
        let m = Mat3::identity() + n;
        su_check(m, &ball, 1e-12).unwrap();
        let c = classify(&m, 1e-6).unwrap();
        assert_eq!(c.kind, Kind::Parabolic);
    }

    #[test]
    fn trace_type_examples() {
        assert_eq!(trace_type(real(3.5), 1e-8).unwrap().delta, CubeRoot::One);
        let w = CubeRoot::Omega.value();
        assert_eq!(trace_type(w * 3.0, 1e-8).unwrap().delta, CubeRoot::Omega);
        assert_eq!(trace_type(real(0.0), 1e-8).unwrap().delta, CubeRoot::One);
        // Oracle: distances of 1+i from the three lines, computed directly.
        let t = cx(1.0, 1.0);
        let direct: Vec<f64> = [0.0f64, 120.0, 240.0]
            .iter()
            .map(|deg| {
                let d = C64::from_polar(1.0, deg.to_radians());
                (t * d.conj()).im.abs()
            })
            .collect();
        let min = direct.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let rej = trace_type(t, 1e-8).unwrap_err();
        assert!((rej.residual - min).abs() < 1e-15);
    }

    #[test]
    fn trace_type_rejects_below_threshold_boundary() {
        // a trace just off the real line by more than tol·(1+|t|)
        assert!(trace_type(cx(2.0, 1e-6), 1e-8).is_err());
        assert!(trace_type(cx(2.0, 1e-9), 1e-8).is_ok());
    }

    #[test]
    fn normal_form_of_diagonal_is_identity() {
        let null = HermitianSpace::null();
        let g = su_check(real_diag(1.0, 0.5, 2.0), &null, 1e-12).unwrap();
        let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
        assert!((nf.r - 2.0).abs() < 1e-14);
        assert!(max_abs_diff(nf.basis.matrix(), &Mat3::identity()) < 1e-14);
    }

    #[test]
    fn normal_form_negative_r_relabels() {
        let null = HermitianSpace::null();
        let g = su_check(real_diag(1.0, -2.0, -0.5), &null, 1e-12).unwrap();
        let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
        assert!((nf.r + 2.0).abs() < 1e-14);
        assert!(nf.diag_residual < 1e-14);
        assert!(nf.gram_residual < 1e-14);
    }

    #[test]
    fn normal_form_recovers_conjugated_r() {
        let ball = HermitianSpace::ball();
        let mut rng = sample::rng(5);
        for _ in 0..30 {
            let u = sample::random_su21(&mut rng, 1.0);
            let d = sample::null_to_ball_matrix(&real_diag(1.0, 1.0 / 3.0, 3.0));
            let g = su_check(sample::conjugate(&u, &d, &ball), &ball, 1e-9).unwrap();
            let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
            assert!((nf.r - 3.0).abs() < 1e-9);
            assert!(nf.gram_residual < 1e-9);
            assert!(nf.diag_residual < 1e-9);
        }
    }

    #[test]
    fn normal_form_errors() {
        let ball = HermitianSpace::ball();
        let e = su_check(sample::phase_rotation(0.3, 0.2), &ball, 1e-12).unwrap();
        assert_eq!(
            loxodromic_normal_form(&e, &Tolerances::default()),
            Err(Error::NotLoxodromic)
        );
        let h = su_check(
            sample::loxodromic_with_trace(cx(1.0, 1.0)).unwrap(),
            &HermitianSpace::null(),
            1e-12,
        )
        .unwrap();
        assert!(matches!(
            loxodromic_normal_form(&h, &Tolerances::default()),
            Err(Error::NonRealTrace(_))
        ));
    }

    fn special_form(eps: C64, a: f64) -> Mat3 {
        let o = real(0.0);
        Mat3::new(-(eps * eps).inv(), o, o, o, o, eps * a, o, eps / a, o)
    }

    #[test]
    fn trace_expansion_examples() {
        let null = HermitianSpace::null();
        let g = su_check(real_diag(1.0, 0.5, 2.0), &null, 1e-12).unwrap();
        let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
        let te = trace_expansion(&nf, &Mat3::identity(), 0);
        assert!((te.trace - real(3.0)).norm() < 1e-15);

        let eps = C64::from_polar(1.0, 0.3);
        let h = special_form(eps, 2.0);
        su_check(h, &null, 1e-12).unwrap();
        for n in -4..=4 {
            let te = trace_expansion(&nf, &h, n);
            assert!((te.pairings[0] + (eps * eps).inv()).norm() < 1e-15);
            assert_eq!(te.pairings[1], real(0.0));
            assert_eq!(te.pairings[2], real(0.0));
            assert!((te.trace + (eps * eps).inv()).norm() < 1e-15);
        }
    }

    #[test]
    fn trace_expansion_matches_direct_power() {
        let ball = HermitianSpace::ball();
        let mut rng = sample::rng(17);
        let u = sample::random_su21(&mut rng, 0.8);
        let d = sample::null_to_ball_matrix(&real_diag(1.0, 1.0 / 1.7, 1.7));
        let g = su_check(sample::conjugate(&u, &d, &ball), &ball, 1e-9).unwrap();
        let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
        for _ in 0..10 {
            let h = sample::random_su21(&mut rng, 0.8);
            for n in -8..=8 {
                let direct = (g.pow(n).matrix() * h).trace();
                let te = trace_expansion(&nf, &h, n);
                let scale = max_abs(&h) * nf.r.abs().powi(n.abs());
                assert!((direct - te.trace).norm() < 1e-9 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn pair_trace_type_examples() {
        let null = HermitianSpace::null();
        let g = su_check(real_diag(1.0, 0.5, 2.0), &null, 1e-12).unwrap();
        let nf = loxodromic_normal_form(&g, &Tolerances::default()).unwrap();
        let h = real_diag(1.0, 1.0 / 3.0, 3.0);
        assert_eq!(
            pair_trace_type(&nf, &h, 8, 1e-8).unwrap().delta,
            CubeRoot::One
        );
        let w = CubeRoot::Omega.value();
        assert_eq!(
            pair_trace_type(&nf, &(h * w), 8, 1e-8).unwrap().delta,
            CubeRoot::Omega
        );

        // ε = e^{iπ/4}: ε² = i lies on none of the three lines.
        let eps = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let rej = pair_trace_type(&nf, &special_form(eps, 2.0), 8, 1e-8).unwrap_err();
        assert_eq!(rej.pairing, "<h²e1,e2>");
        assert!((rej.value - cx(0.0, 1.0)).norm() < 1e-15);
        // brute force: i·conj(conj δ) is off every line
        for d in CubeRoot::ALL {
            assert!(d.conj().line_distance(cx(0.0, 1.0)) > 0.4);
        }

        // ε² = ω̄ is accepted with δ = ω, and <he0,e0> = -ε⁻² = -ω ∈ Rω.
        let eps = C64::from_polar(1.0, -std::f64::consts::PI / 3.0);
        let tt = pair_trace_type(&nf, &special_form(eps, 0.5), 8, 1e-8).unwrap();
        assert_eq!(tt.delta, CubeRoot::Omega);
    }
}
