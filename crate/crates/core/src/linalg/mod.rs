//! Dense matrices and Smith-normal-form based linear algebra.

mod matrix;
mod smith;

pub use matrix::{Matrix, MatrixJson};
pub use smith::{
    cokernel_invariants, image_basis, kernel_basis, rank, smith_normal_form, solve_linear, CokernelInvariants,
    SmithDecomposition,
};
#[allow(unused_imports)]
pub(crate) use smith::elem_strings;
