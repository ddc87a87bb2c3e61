use thiserror::Error;

use crate::hermitian::C64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gram matrix is not hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("gram matrix has signature {0}, expected ++-")]
    WrongSignature(String),
    #[error("zero vector has no point type")]
    ZeroVector,
    #[error("matrix does not preserve the form (residual {0:e})")]
    FormNotPreserved(f64),
    #[error("determinant differs from 1 (residual {0:e})")]
    DetNotOne(f64),
    #[error("basis change matrix is singular")]
    SingularChange,
    #[error("eigenproblem is ill-conditioned (separation {separation:e}, residual {residual:e})")]
    IllConditioned { separation: f64, residual: f64 },
    #[error("element is not loxodromic")]
    NotLoxodromic,
    #[error("trace {0} is not real")]
    NonRealTrace(C64),
    #[error("point is not inside the unit disk (|z| = {0})")]
    OutsideDisk(f64),
    #[error("points coincide")]
    CoincidentPoints,
    #[error("geodesics coincide")]
    CoincidentGeodesics,
    #[error("angle sum {0} is not hyperbolic")]
    NonHyperbolicAngles(f64),
    #[error("relation {name} failed: residual {residual:e} exceeds {tolerance:e}")]
    RelationFailed {
        name: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("no loxodromic element among words of length <= {0}")]
    NoLoxodromic(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}
