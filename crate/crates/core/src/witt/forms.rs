use serde::{Deserialize, Serialize};

use crate::complexes::{cone, find_homotopy, homotopy_inverse, null_homotopy, ChainMap, Complex, Homotopy};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::modules::Morphism;
use crate::resolution::lift_morphism;
use crate::rings::Ring;

use super::object::{dual_morphism, in_a, AObject};

/// Which translation builds `X* = T^d X^#`. The whole sign table lives in
/// the four functions below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Unsigned,
    Standard,
}

fn parity(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 { 1 } else { -1 }
}

/// `(-1)^{d(d-1)/2}`: the factor on `ϖ̃` for module forms in the standard
/// convention, and the factor by which standardizing multiplies `ε`.
pub fn standard_sign(d: i64) -> i64 {
    parity(d * (d - 1) / 2)
}

/// `(-1)^{d(d+1)/2}`: `ϖ` on `T_s^d E^#` in the standard convention.
pub fn signed_evaluation_sign(d: i64) -> i64 {
    parity(d * (d + 1) / 2)
}

/// `(-1)^{dr}`: degree-`r` component of `θ: T_u^d E^# -> T_s^d E^#`.
pub fn translation_twist(d: i64, r: i64) -> i64 {
    parity(d * r)
}

pub fn standardize_epsilon(epsilon: i64, d: i64) -> i64 {
    epsilon * standard_sign(d)
}

/// `T^d E^#` under `convention`.
pub fn dual_complex(e: &Complex, d: i64, convention: Convention) -> Complex {
    e.dual().translate(d, convention == Convention::Standard)
}

/// `f*: F* -> E*` for `f: E -> F`, components `(f_{d-r})ᵀ`.
pub fn dual_map(f: &ChainMap, d: i64, convention: Convention) -> ChainMap {
    f.dual().translate(d, convention == Convention::Standard)
}

/// `h*` witnessing `f* - g*` whenever `h` witnesses `f - g`.
pub fn dual_homotopy(h: &Homotopy, d: i64, convention: Convention) -> Homotopy {
    h.dual().translate(d, convention == Convention::Standard)
}

fn check_epsilon(epsilon: i64) -> Result<()> {
    if epsilon == 1 || epsilon == -1 {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("symmetry sign must be ±1, got {epsilon}")))
    }
}

fn transpose(phi: &ChainMap, convention: Convention) -> ChainMap {
    let e = phi.source();
    let d = e.ring().d() as i64;
    let t = dual_map(phi, d, convention);
    let t = ChainMap::from_fn(e, &dual_complex(e, d, convention), |r| t.at(r));
    match convention {
        Convention::Unsigned => t,
        Convention::Standard => t.scale(&e.ring().int(signed_evaluation_sign(d))),
    }
}

/// `transpose(φ) - εφ`.
fn symmetry_defect(phi: &ChainMap, epsilon: i64, convention: Convention) -> ChainMap {
    transpose(phi, convention).sub(&phi.scale(&phi.ring().int(epsilon)))
}

/// `φ: M -> M^∨` with `φ^∨ ϖ̃ = ε φ` (times `standard_sign(d)` in the
/// standard convention).
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleForm {
    pub object: AObject,
    pub phi: Morphism,
    pub epsilon: i64,
    pub convention: Convention,
}

impl ModuleForm {
    /// Validates well-definedness, nondegeneracy and symmetry.
    pub fn new(object: AObject, phi: Matrix, epsilon: i64, convention: Convention) -> Result<ModuleForm> {
        check_epsilon(epsilon)?;
        let phi = Morphism::new(object.module.clone(), object.dual().module, phi)?;
        let f = ModuleForm { object, phi, epsilon, convention };
        if !f.phi.is_iso() {
            return Err(Error::IllFormedMorphism("form is degenerate".into()));
        }
        if !f.is_symmetric() {
            return Err(Error::IllFormedMorphism(format!("form is not {}-symmetric", f.epsilon)));
        }
        Ok(f)
    }

    pub fn ring(&self) -> Ring {
        self.object.ring()
    }

    pub fn d(&self) -> i64 {
        self.object.d()
    }

    /// `φ^∨ ϖ̃`, with the convention's sign.
    pub fn transpose(&self) -> Morphism {
        let x = &self.object;
        let t = dual_morphism(&self.phi, x, &x.dual()).expect("φ lifts between resolutions");
        let t = t.after(&x.double_dual_iso());
        match self.convention {
            Convention::Unsigned => t,
            Convention::Standard => t.scale(&self.ring().int(standard_sign(self.d()))),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.transpose().equals(&self.phi.scale(&self.ring().int(self.epsilon)))
    }

    pub fn orthogonal_sum(&self, other: &ModuleForm) -> Result<ModuleForm> {
        if self.epsilon != other.epsilon || self.convention != other.convention {
            return Err(Error::ShapeMismatch("orthogonal sum of forms with different symmetry".into()));
        }
        let object = self.object.direct_sum(&other.object);
        let phi = Morphism::new(
            object.module.clone(),
            object.dual().module,
            self.phi.matrix().block_diag(other.phi.matrix()),
        )?;
        Ok(ModuleForm { object, phi, epsilon: self.epsilon, convention: self.convention })
    }

    /// `(M, -φ)`.
    pub fn neg(&self) -> ModuleForm {
        ModuleForm { phi: self.phi.scale(&self.ring().int(-1)), ..self.clone() }
    }

    /// `g^∨ φ g` along an isomorphism `g: N -> M`, `N` certified by `n`.
    pub fn transport(&self, g: &Morphism, n: &AObject) -> Result<ModuleForm> {
        let gd = dual_morphism(g, n, &self.object)?;
        let phi = gd.after(&self.phi).after(g);
        ModuleForm::new(n.clone(), phi.matrix().clone(), self.epsilon, self.convention)
    }

    /// The same form on the minimal presentation, with `from_min`.
    pub fn minimal(&self) -> Result<(ModuleForm, Morphism)> {
        let min = self.object.module.minimize();
        let n = in_a(&min.module).map_err(|_| Error::HomologyNotInA { degree: 0 })?;
        Ok((self.transport(&min.from_min, &n)?, min.from_min))
    }
}

/// `α: G -> F` with `α^∨ φ α = 0` and `0 -> G -> F -> G^∨ -> 0` exact.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleLagrangian {
    pub sub: AObject,
    pub alpha: Morphism,
}

impl ModuleLagrangian {
    /// `β = α^∨ φ: F -> G^∨`.
    pub fn beta(&self, form: &ModuleForm) -> Result<Morphism> {
        let ad = dual_morphism(&self.alpha, &self.sub, &form.object)?;
        Ok(ad.after(&form.phi))
    }

    pub fn validate(&self, form: &ModuleForm) -> Result<()> {
        if self.alpha.target() != &form.object.module || self.alpha.source() != &self.sub.module {
            return Err(Error::NotALagrangian("α does not map into the form's module".into()));
        }
        if !self.alpha.is_mono() {
            return Err(Error::NotALagrangian("α is not injective".into()));
        }
        let beta = self.beta(form)?;
        if !beta.is_epi() {
            return Err(Error::NotALagrangian("α^∨φ is not surjective".into()));
        }
        if !beta.after(&self.alpha).is_zero() {
            return Err(Error::NotALagrangian("α^∨φα is nonzero".into()));
        }
        // Exactness in the middle: α: G -> ker β is an isomorphism.
        let k = beta.kernel();
        let gens = k.object.generators();
        let system = k.map.matrix().hstack(form.object.module.relations());
        let into_kernel = crate::linalg::solve_linear(&system, self.alpha.matrix())?.and_then(|x| {
            let top = x.submatrix(0..gens, 0..x.cols());
            Morphism::new(self.sub.module.clone(), k.object.clone(), top).ok()
        });
        match into_kernel {
            Some(m) if m.is_iso() => Ok(()),
            _ => Err(Error::NotALagrangian("image of α is not the kernel of α^∨φ".into())),
        }
    }
}

/// `H(M) = M ⊕ M^∨` with `φ(m, ξ) = (ξ, ε ϖ̃ m)` and lagrangian `M ⊕ 0`.
pub fn hyperbolic(m: &AObject, epsilon: i64) -> Result<(ModuleForm, ModuleLagrangian)> {
    check_epsilon(epsilon)?;
    let ring = m.ring();
    let md = m.dual();
    let object = m.direct_sum(&md);
    let (a, b) = (m.module.generators(), md.module.generators());
    let w = m.double_dual_iso().matrix().scale(&ring.int(epsilon));
    let phi = Matrix::blocks(&Matrix::zeros(ring, b, a), &Matrix::identity(ring, b), &w, &Matrix::zeros(ring, w.rows(), b));
    let form = ModuleForm::new(object.clone(), phi, epsilon, Convention::Unsigned)?;
    let alpha = Morphism::new(m.module.clone(), object.module.clone(), Matrix::identity(ring, a).vstack(&Matrix::zeros(ring, b, a)))?;
    Ok((form, ModuleLagrangian { sub: m.clone(), alpha }))
}

/// `H(L) = L ⊕ L*` with `φ(l, λ) = (λ, εl)`, strictly symmetric, with
/// lagrangian `L ⊕ 0`.
pub fn hyperbolic_complex(l: &Complex, epsilon: i64) -> Result<(ComplexForm, ComplexLagrangian)> {
    check_epsilon(epsilon)?;
    let ring = l.ring();
    let d = ring.d() as i64;
    let ld = dual_complex(l, d, Convention::Unsigned);
    let e = l.direct_sum(&ld);
    let t = dual_complex(&e, d, Convention::Unsigned);
    let eps = ring.int(epsilon);
    let phi = ChainMap::from_fn(&e, &t, |r| {
        let (a, b) = (l.rank(r), ld.rank(r));
        Matrix::blocks(&Matrix::zeros(ring, b, a), &Matrix::identity(ring, b), &Matrix::scalar(ring, a, &eps), &Matrix::zeros(ring, a, b))
    });
    let form = ComplexForm::new_unchecked(phi, epsilon, Convention::Unsigned, Homotopy::zero(&e, &t));
    let alpha = ChainMap::from_fn(l, &e, |r| Matrix::identity(ring, l.rank(r)).vstack(&Matrix::zeros(ring, ld.rank(r), l.rank(r))));
    let null = Homotopy::zero(l, &dual_complex(l, d, Convention::Unsigned));
    Ok((form, ComplexLagrangian { alpha, null }))
}

/// `φ: E -> E*` with a homotopy `φ* ≃ ε φ` (times
/// `signed_evaluation_sign(d)` in the standard convention).
#[derive(Clone, Debug)]
pub struct ComplexForm {
    pub complex: Complex,
    pub phi: ChainMap,
    pub epsilon: i64,
    pub convention: Convention,
    /// `h` with `transpose - εφ = ∂h + h∂`.
    pub symmetry: Homotopy,
}

impl ComplexForm {
    /// Validates the target, nondegeneracy and symmetry; a witness is found
    /// when none is given.
    pub fn new(phi: ChainMap, epsilon: i64, convention: Convention, symmetry: Option<Homotopy>) -> Result<ComplexForm> {
        check_epsilon(epsilon)?;
        let complex = phi.source().clone();
        let d = complex.ring().d() as i64;
        if phi.target() != &dual_complex(&complex, d, convention) {
            return Err(Error::ShapeMismatch("form must map into the dual complex".into()));
        }
        if !phi.is_chain_map() {
            return Err(Error::IllFormedMorphism("form is not a chain map".into()));
        }
        if !phi.is_quasi_iso() {
            return Err(Error::NotQuasiIso);
        }
        let defect = symmetry_defect(&phi, epsilon, convention);
        let h = match symmetry {
            Some(h) if h.witnesses(&defect, &ChainMap::zero(defect.source(), defect.target())) => h,
            Some(_) => return Err(Error::IllFormedMorphism("symmetry homotopy does not witness φ* ≃ εφ".into())),
            None => null_homotopy(&defect)?
                .ok_or_else(|| Error::IllFormedMorphism(format!("form is not {epsilon}-symmetric up to homotopy")))?,
        };
        Ok(ComplexForm { complex, phi, epsilon, convention, symmetry: h })
    }

    pub(crate) fn new_unchecked(phi: ChainMap, epsilon: i64, convention: Convention, symmetry: Homotopy) -> ComplexForm {
        ComplexForm { complex: phi.source().clone(), phi, epsilon, convention, symmetry }
    }

    pub fn ring(&self) -> Ring {
        self.complex.ring()
    }

    pub fn d(&self) -> i64 {
        self.ring().d() as i64
    }

    pub fn target(&self) -> Complex {
        dual_complex(&self.complex, self.d(), self.convention)
    }

    /// `φ*` composed with `ϖ`.
    pub fn transpose(&self) -> ChainMap {
        transpose(&self.phi, self.convention)
    }

    pub fn symmetry_defect(&self) -> ChainMap {
        symmetry_defect(&self.phi, self.epsilon, self.convention)
    }

    pub fn is_strictly_symmetric(&self) -> bool {
        let t = self.symmetry_defect();
        let (lo, hi) = self.complex.bounds();
        (lo..=hi).all(|r| t.at(r).is_zero())
    }

    pub fn homology_window(&self) -> Option<(i64, i64)> {
        self.complex.homology_window()
    }

    /// `q*φq` along `q: E' -> E`, with the pulled-back symmetry witness.
    pub fn pullback(&self, q: &ChainMap) -> ComplexForm {
        let d = self.d();
        let qd = dual_map(q, d, self.convention);
        let phi = qd.after(&self.phi).after(q);
        let phi = ChainMap::from_fn(q.source(), &dual_complex(q.source(), d, self.convention), |r| phi.at(r));
        let h = self.symmetry.pre(q).post(&qd);
        let h = Homotopy::from_fn(q.source(), phi.target(), |r| h.at(r));
        ComplexForm::new_unchecked(phi, self.epsilon, self.convention, h)
    }

    pub fn orthogonal_sum(&self, other: &ComplexForm) -> Result<ComplexForm> {
        if self.epsilon != other.epsilon || self.convention != other.convention {
            return Err(Error::ShapeMismatch("orthogonal sum of forms with different symmetry".into()));
        }
        let e = self.complex.direct_sum(&other.complex);
        let t = dual_complex(&e, self.d(), self.convention);
        let phi = ChainMap::from_fn(&e, &t, |r| self.phi.at(r).block_diag(&other.phi.at(r)));
        let h = Homotopy::from_fn(&e, &t, |r| self.symmetry.at(r).block_diag(&other.symmetry.at(r)));
        Ok(ComplexForm::new_unchecked(phi, self.epsilon, self.convention, h))
    }

    pub fn neg(&self) -> ComplexForm {
        let m1 = self.ring().int(-1);
        ComplexForm::new_unchecked(self.phi.scale(&m1), self.epsilon, self.convention, self.symmetry.scale(&m1))
    }

    /// `(φ + ε φ*)/2`, strictly symmetric; `2` is a unit in every ring with
    /// `d = 1` and in the supported fields of odd characteristic.
    pub fn strictify(&self) -> Result<(ComplexForm, Isometry)> {
        let ring = self.ring();
        let half = ring
            .inv(&ring.int(2))
            .ok_or_else(|| Error::UnsupportedRing("2 is not invertible".into()))?;
        let eps = ring.int(self.epsilon);
        let t = self.transpose();
        let phi = self.phi.add(&t.scale(&eps)).scale(&half);
        let strict = ComplexForm::new_unchecked(phi, self.epsilon, self.convention, Homotopy::zero(&self.complex, &self.target()));
        // φ - φ_s = -(ε/2)(φ* - εφ).
        let h = self.symmetry.scale(&ring.neg(&ring.mul(&eps, &half)));
        let iso = Isometry { map: ChainMap::identity(&self.complex), homotopy: h };
        Ok((strict, iso))
    }

    pub fn to_json(&self) -> ComplexFormJson {
        ComplexFormJson {
            complex: self.complex.clone(),
            phi: self.phi.to_json(),
            epsilon: self.epsilon,
            convention: self.convention,
        }
    }

    pub fn from_json(j: &ComplexFormJson) -> Result<ComplexForm> {
        let d = j.complex.ring().d() as i64;
        let target = dual_complex(&j.complex, d, j.convention);
        let phi = ChainMap::from_json(j.complex.clone(), target, &j.phi)?;
        ComplexForm::new(phi, j.epsilon, j.convention, None)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexFormJson {
    pub complex: Complex,
    pub phi: crate::complexes::ChainMapJson,
    pub epsilon: i64,
    pub convention: Convention,
}

/// A quasi-isomorphism `q: E' -> E` between the carriers of two forms with
/// `q*φq - φ' = ∂h + h∂`.
#[derive(Clone, Debug)]
pub struct Isometry {
    pub map: ChainMap,
    pub homotopy: Homotopy,
}

impl Isometry {
    pub fn validate(&self, source: &ComplexForm, target: &ComplexForm) -> bool {
        if self.map.source() != &source.complex || self.map.target() != &target.complex {
            return false;
        }
        let pulled = target.pullback(&self.map);
        self.map.is_quasi_iso() && self.homotopy.witnesses(&pulled.phi, &source.phi)
    }

    /// `(q ∘ p)` with the composed witness `p*(h_q)p + h_p`.
    pub fn then(&self, outer: &Isometry, middle: &ComplexForm) -> Isometry {
        let d = middle.d();
        let p = &self.map;
        let pd = dual_map(p, d, middle.convention);
        let h = outer.homotopy.pre(p).post(&pd);
        let h = Homotopy::from_fn(p.source(), self.homotopy.target(), |r| h.at(r)).add(&self.homotopy);
        Isometry { map: outer.map.after(p), homotopy: h }
    }
}

/// Direction for [`signed_standardize`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToStandard,
    ToUnsigned,
}

/// Forms that can be moved between the two conventions.
pub trait SignedStandardize: Sized {
    fn signed_standardize(&self, direction: Direction) -> Self;
}

pub fn signed_standardize<T: SignedStandardize>(form: &T, direction: Direction) -> T {
    form.signed_standardize(direction)
}

fn target_convention(direction: Direction) -> Convention {
    match direction {
        Direction::ToStandard => Convention::Standard,
        Direction::ToUnsigned => Convention::Unsigned,
    }
}

impl SignedStandardize for ModuleForm {
    /// The module `M^∨` does not depend on the convention; only `ε` moves.
    fn signed_standardize(&self, direction: Direction) -> ModuleForm {
        let convention = target_convention(direction);
        if convention == self.convention {
            return self.clone();
        }
        ModuleForm { epsilon: standardize_epsilon(self.epsilon, self.d()), convention, ..self.clone() }
    }
}

impl SignedStandardize for ComplexForm {
    /// `φ_s = θφ` with `θ_r = (-1)^{dr}`; `θ` is an involution, so the
    /// round trip returns the original components.
    fn signed_standardize(&self, direction: Direction) -> ComplexForm {
        let convention = target_convention(direction);
        if convention == self.convention {
            return self.clone();
        }
        let d = self.d();
        let ring = self.ring();
        let target = dual_complex(&self.complex, d, convention);
        let tw = |r: i64| ring.int(translation_twist(d, r));
        let phi = ChainMap::from_fn(&self.complex, &target, |r| self.phi.at(r).scale(&tw(r)));
        // θ is a chain map T_u^d E^# -> T_s^d E^# and the new defect is
        // standard_sign(d)·θ·(old defect), so the witness moves the same way.
        let c = ring.int(standard_sign(d));
        let h = Homotopy::from_fn(&self.complex, &target, |r| self.symmetry.at(r).scale(&tw(r + 1)).scale(&c));
        let eps = standardize_epsilon(self.epsilon, d);
        let f = ComplexForm::new_unchecked(phi, eps, convention, h);
        debug_assert!(f.symmetry.witnesses(&f.symmetry_defect(), &ChainMap::zero(&f.complex, &f.target())));
        f
    }
}

/// `ζ(φ)`: the lift of a module form to the chosen resolutions, symmetric
/// up to a computed homotopy.
pub fn zeta_form(form: &ModuleForm) -> Result<ComplexForm> {
    let unsigned = form.signed_standardize(Direction::ToUnsigned);
    let x = &unsigned.object;
    let xd = x.dual();
    let lift = lift_morphism(&unsigned.phi, &x.resolution, &xd.resolution)?;
    let c = ComplexForm::new(lift, unsigned.epsilon, Convention::Unsigned, None)?;
    Ok(match form.convention {
        Convention::Unsigned => c,
        Convention::Standard => c.signed_standardize(Direction::ToStandard),
    })
}

/// `α: L -> E` with a null homotopy of `α*φα`.
#[derive(Clone, Debug)]
pub struct ComplexLagrangian {
    pub alpha: ChainMap,
    pub null: Homotopy,
}

/// `L -α-> E -j-> V -k-> T_s L` with `s: V -> L*` a quasi-isomorphism and
/// `w = -T_s^{-1}(k s^{-1})`, self-dual up to `symmetry`.
#[derive(Clone, Debug)]
pub struct LagrangianTriangle {
    pub lagrangian: ComplexLagrangian,
    pub cone: Complex,
    pub j: ChainMap,
    pub k: ChainMap,
    pub s: ChainMap,
    pub s_inverse: ChainMap,
    pub w: ChainMap,
    /// `T_s^{-1}(w*) - w = ∂h + h∂`.
    pub symmetry: Homotopy,
}

impl ComplexLagrangian {
    /// `s = [α*φ, h]: cone(α) -> L*`, checked to be a quasi-isomorphism.
    pub fn check(&self, form: &ComplexForm) -> Result<(ChainMap, crate::complexes::Cone)> {
        let form = form.signed_standardize(Direction::ToUnsigned);
        let d = form.d();
        let alpha = &self.alpha;
        if alpha.target() != &form.complex {
            return Err(Error::NotALagrangian("α does not map into the form's complex".into()));
        }
        let l = alpha.source();
        let ad_phi = dual_map(alpha, d, Convention::Unsigned).after(&form.phi);
        let mu = ad_phi.after(alpha);
        let ld = dual_complex(l, d, Convention::Unsigned);
        let mu = ChainMap::from_fn(l, &ld, |r| mu.at(r));
        if !self.null.witnesses(&mu, &ChainMap::zero(l, &ld)) {
            return Err(Error::NotALagrangian("homotopy does not witness α*φα ≃ 0".into()));
        }
        let c = cone(alpha);
        let s = ChainMap::from_fn(&c.complex, &ld, |r| ad_phi.at(r).hstack(&self.null.at(r - 1)));
        if !s.is_chain_map() || !s.is_quasi_iso() {
            return Err(Error::NotALagrangian("cone(α) -> L* is not a quasi-isomorphism".into()));
        }
        Ok((s, c))
    }

    pub fn triangle(&self, form: &ComplexForm) -> Result<LagrangianTriangle> {
        let d = form.d();
        let (s, c) = self.check(form)?;
        let l = self.alpha.source();
        let v = c.complex.clone();
        let sigma = homotopy_inverse(&s)?.inverse;
        let w = c.projection.after(&sigma).translate(-1, true).neg();
        let w = ChainMap::from_fn(w.source(), l, |r| w.at(r));
        let wd = dual_map(&w, d, Convention::Unsigned).translate(-1, true);
        let wd = ChainMap::from_fn(w.source(), l, |r| wd.at(r));
        let h = find_homotopy(&wd, &w)?
            .ok_or_else(|| Error::NotALagrangian("connecting map is not self-dual up to homotopy".into()))?;
        Ok(LagrangianTriangle {
            lagrangian: self.clone(),
            cone: v,
            j: c.inclusion,
            k: c.projection,
            s,
            s_inverse: sigma,
            w,
            symmetry: h,
        })
    }
}

/// Lifts a module lagrangian to a complex lagrangian of `ζ(φ)` and builds
/// its triangle.
pub fn build_lagrangian_lift(form: &ModuleForm, lag: &ModuleLagrangian) -> Result<LagrangianTriangle> {
    lag.validate(form)?;
    let unsigned = form.signed_standardize(Direction::ToUnsigned);
    let zf = zeta_form(&unsigned)?;
    let alpha = lift_morphism(&lag.alpha, &lag.sub.resolution, &unsigned.object.resolution)?;
    let d = zf.d();
    let l = alpha.source().clone();
    let ld = dual_complex(&l, d, Convention::Unsigned);
    let mu = dual_map(&alpha, d, Convention::Unsigned).after(&zf.phi).after(&alpha);
    let mu = ChainMap::from_fn(&l, &ld, |r| mu.at(r));
    let null = null_homotopy(&mu)?.ok_or_else(|| Error::NotALagrangian("α*φα is not null-homotopic".into()))?;
    ComplexLagrangian { alpha, null }.triangle(&zf)
}
