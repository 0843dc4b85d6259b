pub mod complexes;
pub mod error;
pub mod linalg;
pub mod modules;
pub mod resolution;
pub mod rings;
pub mod witt;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rings::{Elem, Ring, RingKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
