use serde::{Deserialize, Serialize};

use crate::complexes::{ChainMap, Complex, HomologyData, ModuleComplex};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, CokernelInvariants, Matrix};
use crate::modules::{ext, Module, Morphism};
use crate::resolution::{lift_morphism, Resolution};

use super::object::{dual_morphism, in_a, AObject};

/// `H_k(E)` as an object of the duality subcategory, presented on the cycle
/// basis.
pub fn homology_object(e: &Complex, k: i64) -> Result<(HomologyData, AObject)> {
    let h = e.homology(k);
    let obj = in_a(&h.module).map_err(|_| Error::HomologyNotInA { degree: k })?;
    Ok((h, obj))
}

/// Fails on the first degree whose homology is outside the subcategory.
pub fn check_homology_in_a(e: &Complex) -> Result<()> {
    let (lo, hi) = e.bounds();
    for k in lo..=hi {
        homology_object(e, k)?;
    }
    Ok(())
}

/// `η: H_{-r}(E^#) -> H_{r-d}(E)^∨` as a morphism of presented modules.
#[derive(Clone, Debug)]
pub struct HomologyDuality {
    pub degree: i64,
    /// `H_{-r}(E^#)` on its cycle basis.
    pub dual_homology: HomologyData,
    /// `H_{r-d}(E)` on its cycle basis, with its dual.
    pub homology: HomologyData,
    pub object: AObject,
    pub eta: Morphism,
}

impl HomologyDuality {
    pub fn is_iso(&self) -> bool {
        self.eta.is_iso()
    }
}

/// With `k = r - d`, `H_k` is resolved by `Q = [B_k -> Z_k]` (cycle and
/// boundary bases, length `d`), and `X: Q -> E` is the inclusion of cycles
/// in degree `k` together with a preimage `S` of the boundaries under `∂_r`
/// when `d = 1`. A cycle `ξ` of `E^#` in degree `-r` vanishes on the torsion
/// group `H_r`, hence on `Z_r`, so `X_rᵀ ξ` is a well-defined class in
/// `Ext^d(H_k)`; the comparison lift `C: ζ(H_k) -> Q` moves it to the chosen
/// presentation of the dual.
pub fn homology_duality(e: &Complex, r: i64) -> Result<HomologyDuality> {
    check_homology_in_a(e)?;
    let ring = e.ring();
    let d = ring.d() as i64;
    let k = r - d;
    let (h, object) = homology_object(e, k)?;
    let rel = h.module.relations().clone();
    let q_complex = if rel.cols() == 0 {
        Complex::concentrated(ring, 0, rel.rows())
    } else {
        Complex::two_term(0, rel.clone())
    };
    let q = Resolution {
        module: h.module.clone(),
        complex: q_complex,
        augmentation: Morphism::new_unchecked(
            Module::free(ring, rel.rows()),
            h.module.clone(),
            Matrix::identity(ring, rel.rows()),
        ),
    };
    let c = lift_morphism(&Morphism::identity(&h.module), &object.resolution, &q)?;
    let x_top = if d == 0 {
        h.cycles.clone()
    } else if h.boundaries.cols() == 0 {
        Matrix::zeros(ring, e.rank(r), 0)
    } else {
        solve_linear(&e.d(r), &h.boundaries)?.expect("boundaries are images")
    };
    let dual_homology = e.dual().homology(-r);
    let m = c.at(d).transpose().mul(&x_top.transpose()).mul(&dual_homology.cycles);
    let eta = Morphism::new(dual_homology.module.clone(), object.dual().module, m)?;
    Ok(HomologyDuality { degree: r, dual_homology, homology: h, object, eta })
}

/// The naturality square of `η` in degree `r` for `f: E -> F`:
/// `H(f)^∨ ∘ η_F = η_E ∘ H_{-r}(f^#)`.
pub fn duality_naturality(f: &ChainMap, r: i64) -> Result<bool> {
    let (ee, ff) = (homology_duality(f.source(), r)?, homology_duality(f.target(), r)?);
    let hf = f.homology_map_between(&ee.homology, &ff.homology);
    let hf_dual = dual_morphism(&hf, &ee.object, &ff.object)?;
    let f_sharp = f.dual().homology_map_between(&ff.dual_homology, &ee.dual_homology);
    Ok(hf_dual.after(&ff.eta).equals(&ee.eta.after(&f_sharp)))
}

/// Both sides of `Ext^i(E_r / B_r) ≅ Ext^d(H_{r+i-d})` for `1 <= i <= d`,
/// and `Ext^i(E_r / B_r) = 0` for `i > d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtBoundaryRecord {
    pub degree: i64,
    pub index: usize,
    pub lhs: CokernelInvariants,
    pub rhs: CokernelInvariants,
    pub agrees: bool,
}

pub fn ext_boundary_check(e: &Complex, r: i64, i: usize) -> Result<ExtBoundaryRecord> {
    if i == 0 {
        return Err(Error::ShapeMismatch("the Ext formula starts at i = 1".into()));
    }
    check_homology_in_a(e)?;
    let ring = e.ring();
    let d = ring.d() as usize;
    let quotient = Module::new(e.d(r + 1));
    let lhs = ext(&quotient, i).invariants();
    let rhs = if i <= d {
        ext(&e.homology(r + i as i64 - d as i64).module, d).invariants()
    } else {
        Module::zero(ring).invariants()
    };
    Ok(ExtBoundaryRecord { degree: r, index: i, agrees: lhs == rhs, lhs, rhs })
}

/// Whether `B_r`, `Z_r` and `E_r / B_r` of a complex of modules lie in the
/// duality subcategory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipRecord {
    pub degree: i64,
    pub boundaries: bool,
    pub cycles: bool,
    pub quotient: bool,
}

impl MembershipRecord {
    pub fn passes(&self) -> bool {
        self.boundaries && self.cycles && self.quotient
    }
}

pub fn membership_check(c: &ModuleComplex) -> Vec<MembershipRecord> {
    let (lo, hi) = c.bounds();
    (lo..=hi)
        .map(|r| MembershipRecord {
            degree: r,
            boundaries: in_a(&c.boundaries(r).object).is_ok(),
            cycles: in_a(&c.cycles(r).object).is_ok(),
            quotient: in_a(&c.cokernel_of_boundaries(r).object).is_ok(),
        })
        .collect()
}
