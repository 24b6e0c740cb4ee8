//! Numerical laboratory for dressing orbits of SU(2) and SU(3).
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; every group is type A with n = 2 or 3.

pub mod cluster;
pub mod error;
pub mod iwasawa;
pub mod lie;
pub mod linalg;
pub mod su2;
pub mod tropical;
pub mod verify;

pub use error::{Error, Result};
pub use nalgebra::Complex;

pub type C64 = nalgebra::Complex<f64>;
pub type CMat = nalgebra::DMatrix<C64>;
