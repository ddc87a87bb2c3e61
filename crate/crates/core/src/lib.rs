//! Computational toolkit for the complex hyperbolic plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`hermitian`]: hermitian forms of signature `++-` on `C^3`, isometry
//!   certification and basis changes.
//! * [`spectral`]: closed-form 3×3 eigen-solver, isometry classification,
//!   loxodromic normal form and cube-root trace types.
//! * [`disk`]: Poincaré disk / `SU(1,1)` geometry, point reflections and the
//!   block embedding into `SU(2,1)`.
//! * [`pentagon`]: the four-pentagon configuration built from a regular
//!   right-angled-at-midpoints pentagon, together with its relation
//!   certificates.
//! * [`words`]: breadth-first enumeration of group words with deduplication
//!   and the spectral scan of the even-word subgroup.
//! * [`detector`]: decision procedure returning a stable complex line, a
//!   stable totally real subspace, or a trace-hypothesis violation.
//! * [`plot`]: SVG rendering of disk configurations.

pub mod detector;
pub mod disk;
pub mod error;
pub mod hermitian;
pub mod json;
pub mod pentagon;
pub mod plot;
pub mod sample;
pub mod spectral;
pub mod tol;
pub mod words;

pub use error::{Error, Result};
pub use hermitian::{HermitianSpace, Isometry, Mat3, Vec3, C64};
pub use tol::Tolerances;
