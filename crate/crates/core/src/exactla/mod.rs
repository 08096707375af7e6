//! Exact linear algebra: dense elimination over any field, a bit-packed F_2
//! kernel, and sparse graded echelon spaces of polynomials.

mod dense;
pub mod gf2;
pub mod sparse;
mod space;

pub use dense::{FieldMatrix, LinearSolution, Rref};
pub use gf2::BitMatrix;
pub(crate) use space::with_engine;
pub use space::{mul_prov_var, mul_row_var, poly_to_row, row_to_poly, Engine, PolySpace};

use crate::error::Result;
use crate::fields::Field;
use crate::polys::Polynomial;

/// Row-reduced span of `polys`.
pub fn space_from(field: &Field, nvars: usize, polys: &[Polynomial]) -> Result<PolySpace> {
    PolySpace::space_from(field, nvars, polys)
}
