use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complexes::Complex;
use crate::error::{Error, Result};
use crate::linalg::{CokernelInvariants, Matrix};
use crate::modules::{ext, Module, Morphism};
use crate::resolution::{lift_morphism, zeta_object, Resolution};
use crate::rings::{Elem, Ring};

/// A module with `Ext^i(M, A) = 0` for `i < d`, certified by a resolution of
/// length at most `d` and the computed groups `Ext^i` below `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AObject {
    pub module: Module,
    pub resolution: Arc<Resolution>,
    /// `Ext^i(M, A)` for `0 <= i < d`, all zero.
    pub ext_below: Vec<CokernelInvariants>,
}

/// Why a module is not in the duality subcategory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotInA {
    pub degree: usize,
    pub ext: CokernelInvariants,
}

impl std::fmt::Display for NotInA {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ext^{} is nonzero (free rank {}, {} torsion factors)", self.degree, self.ext.free_rank, self.ext.factors.len())
    }
}

fn ext_records(m: &Module) -> std::result::Result<Vec<CokernelInvariants>, NotInA> {
    let d = m.ring().d() as usize;
    let mut out = Vec::with_capacity(d);
    for i in 0..d {
        let e = ext(m, i).invariants();
        if !e.is_zero() {
            return Err(NotInA { degree: i, ext: e });
        }
        out.push(e);
    }
    Ok(out)
}

/// Membership test with the memoized minimal resolution as certificate.
pub fn in_a(m: &Module) -> std::result::Result<AObject, NotInA> {
    let ext_below = ext_records(m)?;
    Ok(AObject { module: m.clone(), resolution: zeta_object(m), ext_below })
}

impl AObject {
    /// Membership certified on a caller-chosen resolution of length `<= d`.
    pub fn with_resolution(res: Resolution) -> Result<AObject> {
        let d = res.ring().d() as usize;
        if res.length() > d {
            return Err(Error::ShapeMismatch(format!("resolution of length {} exceeds d = {d}", res.length())));
        }
        let ext_below = ext_records(&res.module).map_err(|_| Error::HomologyNotInA { degree: 0 })?;
        Ok(AObject { module: res.module.clone(), resolution: Arc::new(res), ext_below })
    }

    pub fn zero(ring: Ring) -> AObject {
        in_a(&Module::zero(ring)).expect("zero is in every duality subcategory")
    }

    pub fn ring(&self) -> Ring {
        self.module.ring()
    }

    pub fn d(&self) -> i64 {
        self.ring().d() as i64
    }

    pub fn complex(&self) -> &Complex {
        &self.resolution.complex
    }

    /// `M^∨ = coker(∂_dᵀ)` on the basis of `P_d^*`, resolved by `T^d P^#`.
    pub fn dual(&self) -> AObject {
        let d = self.d();
        let p = self.complex();
        let module = Module::new(p.d(d).transpose());
        let complex = p.dual().translate(d, false);
        let aug = Morphism::new_unchecked(
            Module::free(self.ring(), complex.rank(0)),
            module.clone(),
            Matrix::identity(self.ring(), complex.rank(0)),
        );
        let res = Resolution { module: module.clone(), complex, augmentation: aug };
        debug_assert!(res.comparison().is_iso());
        let ext_below = vec![CokernelInvariants { free_rank: 0, factors: vec![] }; d as usize];
        AObject { module, resolution: Arc::new(res), ext_below }
    }

    /// `ϖ̃: M -> M^∨∨`. The double dual is `coker ∂_1 = H_0(P)` on `P_0`, so
    /// `ϖ̃` is the inverse of the augmentation's identification.
    pub fn double_dual_iso(&self) -> Morphism {
        let dd = self.dual().dual();
        let inv = self.resolution.comparison_inverse();
        Morphism::new_unchecked(self.module.clone(), dd.module, inv.matrix().clone())
    }

    /// For cyclic `M` on one generator whose double dual also has one
    /// generator: the scalar by which `ϖ̃` acts.
    pub fn double_dual_unit(&self) -> Option<Elem> {
        let w = self.double_dual_iso();
        (w.matrix().shape() == (1, 1)).then(|| w.matrix().get(0, 0).clone())
    }

    pub fn direct_sum(&self, other: &AObject) -> AObject {
        let module = self.module.direct_sum(&other.module);
        let complex = self.complex().direct_sum(other.complex());
        let aug = self.resolution.augmentation.matrix().block_diag(other.resolution.augmentation.matrix());
        let res = Resolution {
            module: module.clone(),
            complex: complex.clone(),
            augmentation: Morphism::new_unchecked(Module::free(self.ring(), complex.rank(0)), module.clone(), aug),
        };
        AObject { module, resolution: Arc::new(res), ext_below: self.ext_below.clone() }
    }
}

/// `g^∨: N^∨ -> M^∨` for `g: M -> N`, the transpose of the degree-`d`
/// component of a lift of `g`.
pub fn dual_morphism(g: &Morphism, x: &AObject, y: &AObject) -> Result<Morphism> {
    let lift = lift_morphism(g, &x.resolution, &y.resolution)?;
    let d = x.d();
    Ok(Morphism::new_unchecked(y.dual().module, x.dual().module, lift.at(d).transpose()))
}
