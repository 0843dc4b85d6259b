//! Duality on finite-length modules, symmetric forms on modules and on
//! complexes, and the reduction of complex forms to module forms.
//!
//! `d` is the dimension of the ring: 0 for fields, 1 for ℤ[1/2] and ℤ₍p₎.
//! The dual of a module is `Ext^d(M, A)`, read off a resolution of length
//! `d`; the dual of a complex is `T^d E^#`.

mod duality;
mod forms;
mod invariants;
mod object;
mod reduction;

pub use duality::*;
pub use forms::*;
pub use invariants::*;
pub use object::*;
pub use reduction::*;
