//! JSON shapes shared by every report: a complex number is `[re, im]`, a
//! 3×3 matrix is three rows of three complex numbers, a vector is a list of
//! complex numbers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hermitian::{Mat3, Vec3, C64};

pub type ComplexRepr = [f64; 2];
pub type MatrixRepr = [[ComplexRepr; 3]; 3];

pub fn complex_repr(z: C64) -> ComplexRepr {
    [z.re, z.im]
}

pub fn complex_from(r: ComplexRepr) -> C64 {
    C64::new(r[0], r[1])
}

pub fn matrix_repr(m: &Mat3) -> MatrixRepr {
    let mut out = [[[0.0; 2]; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = complex_repr(m[(i, j)]);
        }
    }
    out
}

pub fn matrix_from(r: &MatrixRepr) -> Mat3 {
    Mat3::from_fn(|i, j| complex_from(r[i][j]))
}

pub fn vector_repr(v: &Vec3) -> [ComplexRepr; 3] {
    [complex_repr(v[0]), complex_repr(v[1]), complex_repr(v[2])]
}

pub fn vector_from(r: &[ComplexRepr; 3]) -> Vec3 {
    Vec3::new(complex_from(r[0]), complex_from(r[1]), complex_from(r[2]))
}

fn check_finite<E: serde::de::Error>(vals: impl IntoIterator<Item = f64>) -> Result<(), E> {
    if vals.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(E::custom("non-finite number"))
    }
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        complex_repr(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let r = ComplexRepr::deserialize(d)?;
        check_finite::<D::Error>(r)?;
        Ok(complex_from(r))
    }
}

pub mod opt_complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(complex_repr).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        let r = Option::<ComplexRepr>::deserialize(d)?;
        if let Some(r) = r {
            check_finite::<D::Error>(r)?;
        }
        Ok(r.map(complex_from))
    }
}

pub mod complex3 {
    use super::*;

    pub fn serialize<S: Serializer>(z: &[C64; 3], s: S) -> Result<S::Ok, S::Error> {
        [complex_repr(z[0]), complex_repr(z[1]), complex_repr(z[2])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[C64; 3], D::Error> {
        let r = <[ComplexRepr; 3]>::deserialize(d)?;
        check_finite::<D::Error>(r.iter().flatten().copied())?;
        Ok([complex_from(r[0]), complex_from(r[1]), complex_from(r[2])])
    }
}

pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat3, s: S) -> Result<S::Ok, S::Error> {
        matrix_repr(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat3, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        check_finite::<D::Error>(r.iter().flatten().flatten().copied())?;
        Ok(matrix_from(&r))
    }
}

pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[Mat3], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_repr).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat3>, D::Error> {
        let rs = Vec::<MatrixRepr>::deserialize(d)?;
        rs.iter()
            .map(|r| {
                check_finite::<D::Error>(r.iter().flatten().flatten().copied())?;
                Ok(matrix_from(r))
            })
            .collect()
    }
}

pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
        vector_repr(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec3, D::Error> {
        let r = <[ComplexRepr; 3]>::deserialize(d)?;
        check_finite::<D::Error>(r.iter().flatten().copied())?;
        Ok(vector_from(&r))
    }
}

pub mod vectors3 {
    use super::*;

    pub fn serialize<S: Serializer>(vs: &[Vec3; 3], s: S) -> Result<S::Ok, S::Error> {
        [
            vector_repr(&vs[0]),
            vector_repr(&vs[1]),
            vector_repr(&vs[2]),
        ]
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Vec3; 3], D::Error> {
        let r = <[[ComplexRepr; 3]; 3]>::deserialize(d)?;
        check_finite::<D::Error>(r.iter().flatten().flatten().copied())?;
        Ok([vector_from(&r[0]), vector_from(&r[1]), vector_from(&r[2])])
    }
}

/// `HermitianSpace` on the wire: `{"gram": matrix}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceRepr {
    #[serde(with = "matrix")]
    pub gram: Mat3,
}

/// A generator file: a hermitian space plus a list of matrices in its basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub space: SpaceRepr,
    #[serde(default)]
    pub names: Vec<String>,
    #[serde(with = "matrices")]
    pub generators: Vec<Mat3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}
