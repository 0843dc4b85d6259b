use thiserror::Error;

/// Every failure the engine can report. Variants map one-to-one onto the
/// error names used in reports and CLI output.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported ring: {0}")]
    UnsupportedRing(String),
    #[error("zero element has no valuation")]
    ZeroElement,
    #[error("element {value} does not belong to {ring}")]
    NotInRing { value: String, ring: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ill-formed morphism: {0}")]
    IllFormedMorphism(String),
    #[error("pullback legs have different targets")]
    TargetMismatch,
    #[error("module is not of finite length (free rank {free_rank})")]
    NotFiniteLength { free_rank: usize },
    #[error("not a complex: composite of differentials {upper} and {lower} is nonzero")]
    NotAComplex { upper: i64, lower: i64 },
    #[error("augmentations are incompatible with the given module morphism: {0}")]
    IncompatibleAugmentations(String),
    #[error("chain map is not a quasi-isomorphism")]
    NotQuasiIso,
    #[error("homology in degree {degree} is not in the duality subcategory")]
    HomologyNotInA { degree: i64 },
    #[error("not a lagrangian: {0}")]
    NotALagrangian(String),
    #[error("homology window already has width zero")]
    WindowAlreadyMinimal,
    #[error("reduction step {step} failed: {reason}")]
    ReductionStepFailed { step: usize, reason: String },
    #[error("unknown instance kind: {0}")]
    UnknownKind(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
