use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use devissage::{Error, Ring};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Duality,
    ExtBoundary,
    ZetaFunctoriality,
    WittMap,
    Devissage,
    DevissageSpread,
    Decomposition,
    WittBase,
    Membership,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Duality,
        Suite::ExtBoundary,
        Suite::ZetaFunctoriality,
        Suite::WittMap,
        Suite::Devissage,
        Suite::DevissageSpread,
        Suite::Decomposition,
        Suite::WittBase,
        Suite::Membership,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::ExtBoundary => "ext-boundary",
            Suite::ZetaFunctoriality => "zeta-functoriality",
            Suite::WittMap => "witt-map",
            Suite::Devissage => "devissage",
            Suite::DevissageSpread => "devissage-spread",
            Suite::Decomposition => "decomposition",
            Suite::WittBase => "witt-base",
            Suite::Membership => "membership",
        }
    }

    /// The property each trial instantiates.
    pub fn anchor(self) -> &'static str {
        match self {
            Suite::Duality => "homology of E^# is Ext^d of the shifted homology of E, naturally",
            Suite::ExtBoundary => "Ext^i of boundaries shifts against cycles and homology",
            Suite::ZetaFunctoriality => "lifts to resolutions are unique up to homotopy and compose",
            Suite::WittMap => "hyperbolic module forms lift to neutral complex forms",
            Suite::Devissage => "support reduction returns a module form isometric to the seed",
            Suite::DevissageSpread => "surgery on split hyperbolic summands preserves the Witt class",
            Suite::Decomposition => "finite-length forms split orthogonally into p-primary parts",
            Suite::WittBase => "rank parity and discriminant classify Witt classes over F_p",
            Suite::Membership => "boundaries, cycles and quotients of complexes in A stay in A",
        }
    }

    /// Decomposition needs `d = 1`, the base case a prime field; everything
    /// else needs `2` to be a unit.
    pub fn accepts(self, ring: Ring) -> bool {
        match self {
            Suite::Decomposition => ring.d() == 1,
            Suite::WittBase => ring.is_field() && ring.prime().is_some(),
            _ => ring.prime() != Some(2),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite, Error> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownKind(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Module,
    Morphism,
    ComplexInA,
    ModuleForm,
    ComplexForm,
    NeutralForm,
}

impl Kind {
    pub const ALL: [Kind; 6] =
        [Kind::Module, Kind::Morphism, Kind::ComplexInA, Kind::ModuleForm, Kind::ComplexForm, Kind::NeutralForm];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Module => "module",
            Kind::Morphism => "morphism",
            Kind::ComplexInA => "complex-in-a",
            Kind::ModuleForm => "module-form",
            Kind::ComplexForm => "complex-form",
            Kind::NeutralForm => "neutral-form",
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind, Error> {
        let s = s.to_ascii_lowercase();
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(format!("unknown instance kind {s:?}")))
    }
}

/// Size caps bound generated instances; all are positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_rank: usize,
    pub max_width: usize,
    pub max_entry: i64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { max_rank: 6, max_width: 8, max_entry: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub ring: Ring,
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub caps: Caps,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(ring: Ring, suite: Suite, trials: usize, seed: u64) -> SuiteConfig {
        SuiteConfig { ring, suite, trials, seed, caps: Caps::default(), output: None }
    }

    pub fn with_caps(mut self, caps: Caps) -> SuiteConfig {
        self.caps = caps;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        let Caps { max_rank, max_width, max_entry } = self.caps;
        if max_rank == 0 || max_width == 0 || max_entry <= 0 {
            return Err(Error::Parse("size caps must be positive".into()));
        }
        if !self.suite.accepts(self.ring) {
            return Err(Error::UnsupportedRing(format!("suite {} does not run over {}", self.suite, self.ring)));
        }
        Ok(())
    }
}
