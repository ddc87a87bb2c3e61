//! Deterministic construction of test groups: elementary `SU(2,1)` matrices
//! in the ball basis, random conjugators and planted configurations.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hermitian::{cx, max_abs, real, HermitianSpace, Isometry, Mat3, C64};
use crate::spectral;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hyperbolic boost mixing coordinate `axis` (0 or 1) with the negative
/// coordinate 2.
pub fn boost(axis: usize, t: f64) -> Mat3 {
    assert!(axis < 2, "boost axis must be 0 or 1");
    let mut m = Mat3::identity();
    m[(axis, axis)] = real(t.cosh());
    m[(2, 2)] = real(t.cosh());
    m[(axis, 2)] = real(t.sinh());
    m[(2, axis)] = real(t.sinh());
    m
}

/// `diag(e^{ia}, e^{ib}, e^{-i(a+b)})`.
pub fn phase_rotation(a: f64, b: f64) -> Mat3 {
    crate::hermitian::diag(
        C64::from_polar(1.0, a),
        C64::from_polar(1.0, b),
        C64::from_polar(1.0, -a - b),
    )
}

/// Unitary rotation of the positive 2-plane, `SU(2)` block with phase `psi`.
pub fn plane_rotation(phi: f64, psi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    let mut m = Mat3::identity();
    m[(0, 0)] = real(c);
    m[(1, 1)] = real(c);
    m[(0, 1)] = -C64::from_polar(s, psi);
    m[(1, 0)] = C64::from_polar(s, -psi);
    m
}

/// Random element of `SU(2,1)` (ball basis) with boost parameters bounded by
/// `spread`.
pub fn random_su21<R: Rng>(rng: &mut R, spread: f64) -> Mat3 {
    let tau = std::f64::consts::TAU;
    let angle = |r: &mut R| r.gen_range(0.0..tau);
    let a = phase_rotation(angle(rng), angle(rng));
    let b = plane_rotation(angle(rng), angle(rng));
    let t = rng.gen_range(-spread..spread);
    let c = boost(0, t);
    let d = plane_rotation(angle(rng), angle(rng));
    let t2 = rng.gen_range(-spread..spread);
    let e = boost(1, t2);
    let f = phase_rotation(angle(rng), angle(rng));
    a * b * c * d * e * f
}

/// Random element of `SO(2,1)`: real, preserving `diag(1,1,-1)`.
pub fn random_so21<R: Rng>(rng: &mut R, spread: f64) -> Mat3 {
    let tau = std::f64::consts::TAU;
    let r1 = plane_rotation(rng.gen_range(0.0..tau), 0.0);
    let b = boost(0, rng.gen_range(-spread..spread));
    let r2 = plane_rotation(rng.gen_range(0.0..tau), 0.0);
    let b2 = boost(1, rng.gen_range(-spread..spread));
    r1 * b * r2 * b2
}

/// Columns: `f1`, `(f2+f3)/√2`, `(f2-f3)/√2`, i.e. the null basis expressed in
/// the ball basis.
pub fn ball_to_null() -> Mat3 {
    let s = real(FRAC_1_SQRT_2);
    let o = real(0.0);
    Mat3::new(real(1.0), o, o, o, s, s, o, s, -s)
}

/// Rewrites a null-basis matrix in the ball basis.
pub fn null_to_ball_matrix(m: &Mat3) -> Mat3 {
    let b = ball_to_null();
    let binv = b.try_inverse().expect("invertible");
    b * m * binv
}

/// A diagonal loxodromic element of `SU(2,1)` in the null basis whose trace
/// is `tau`. Fails if `tau` is not a loxodromic trace.
pub fn loxodromic_with_trace(tau: C64) -> Result<Mat3> {
    let roots = spectral::cubic_roots(tau, tau.conj(), real(1.0));
    let mut sorted = roots;
    sorted.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let big = sorted[0];
    if big.norm() <= 1.0 + 1e-6 {
        return Err(Error::NotLoxodromic);
    }
    let small = C64::new(1.0, 0.0) / big.conj();
    let unit = C64::new(1.0, 0.0) / (big * small);
    Ok(crate::hermitian::diag(unit, small, big))
}

/// `U M U⁻¹` with the inverse taken through the form.
pub fn conjugate(u: &Mat3, m: &Mat3, space: &HermitianSpace) -> Mat3 {
    u * m * space.isometry_inverse(u)
}

/// A planted R-Fuchsian generator set: `count` real `SO(2,1)` elements
/// conjugated by one random `SU(2,1)` element. Returns the generators and
/// the conjugator.
pub fn planted_real_group(seed: u64, count: usize) -> (Vec<Mat3>, Mat3) {
    let mut r = rng(seed);
    let ball = HermitianSpace::ball();
    let u = random_su21(&mut r, 0.6);
    let gens = (0..count)
        .map(|_| {
            let g = random_so21(&mut r, 1.2);
            conjugate(&u, &g, &ball)
        })
        .collect();
    (gens, u)
}

/// A pair violating the cube-root trace hypothesis: a real-trace loxodromic
/// and a loxodromic with trace `1 + i`, conjugated apart.
pub fn planted_violator(seed: u64) -> Vec<Mat3> {
    let mut r = rng(seed);
    let ball = HermitianSpace::ball();
    let g = null_to_ball_matrix(&crate::hermitian::real_diag(1.0, 0.5, 2.0));
    let h = null_to_ball_matrix(&loxodromic_with_trace(cx(1.0, 1.0)).expect("1+i is loxodromic"));
    let u = random_su21(&mut r, 0.5);
    vec![g, conjugate(&u, &h, &ball)]
}

/// Two loxodromics with non-real traces in general position.
pub fn generic_pair(seed: u64) -> Vec<Mat3> {
    let mut r = rng(seed);
    let ball = HermitianSpace::ball();
    let a = null_to_ball_matrix(&loxodromic_with_trace(cx(1.0, 1.0)).expect("loxodromic"));
    let b = null_to_ball_matrix(&loxodromic_with_trace(cx(2.5, -0.75)).expect("loxodromic"));
    let u = random_su21(&mut r, 0.5);
    let v = random_su21(&mut r, 0.5);
    vec![conjugate(&u, &a, &ball), conjugate(&v, &b, &ball)]
}

pub fn certify_all(ms: &[Mat3], space: &HermitianSpace, tol: f64) -> Result<Vec<Isometry>> {
    ms.iter()
        .map(|m| Isometry::certify(*m, space, tol))
        .collect()
}

/// Scale used by relative tolerances: `max(1, max|M|)`.
pub fn scale(m: &Mat3) -> f64 {
    max_abs(m).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::su_check;

    #[test]
    fn elementary_matrices_are_in_su21() {
        let ball = HermitianSpace::ball();
        su_check(boost(0, 1.3), &ball, 1e-12).unwrap();
        su_check(boost(1, -0.4), &ball, 1e-12).unwrap();
        su_check(phase_rotation(0.3, 2.0), &ball, 1e-12).unwrap();
        su_check(plane_rotation(0.7, -1.2), &ball, 1e-12).unwrap();
        let mut r = rng(3);
        for _ in 0..20 {
            su_check(random_su21(&mut r, 1.0), &ball, 1e-12).unwrap();
            let m = random_so21(&mut r, 1.0);
            su_check(m, &ball, 1e-12).unwrap();
            assert!(m.iter().all(|z| z.im == 0.0));
        }
    }

    #[test]
    fn trace_is_planted() {
        let m = loxodromic_with_trace(cx(1.0, 1.0)).unwrap();
        su_check(m, &HermitianSpace::null(), 1e-12).unwrap();
        assert!((m.trace() - cx(1.0, 1.0)).norm() < 1e-12);
        // 0 is an elliptic trace
        assert!(loxodromic_with_trace(cx(0.0, 0.0)).is_err());
    }
}
