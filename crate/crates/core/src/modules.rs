//! Finitely generated modules as cokernels of relation matrices, and the
//! morphisms between them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{cokernel_invariants, image_basis, kernel_basis, smith_normal_form, solve_linear, CokernelInvariants, Matrix};
use crate::rings::{Elem, Ring, RingKind};

/// `coker(relations: A^q -> A^g)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Module {
    ring: Ring,
    relations: Matrix,
}

impl Module {
    pub fn new(relations: Matrix) -> Module {
        Module { ring: relations.ring(), relations }
    }

    pub fn free(ring: Ring, rank: usize) -> Module {
        Module::new(Matrix::zeros(ring, rank, 0))
    }

    pub fn zero(ring: Ring) -> Module {
        Module::free(ring, 0)
    }

    /// `A/(a)`.
    pub fn cyclic(ring: Ring, a: &Elem) -> Module {
        Module::new(Matrix::from_fn(ring, 1, 1, |_, _| a.clone()))
    }

    /// `A^free_rank ⊕ ⊕ A/(fᵢ)`.
    pub fn from_invariants(ring: Ring, inv: &CokernelInvariants) -> Module {
        let t = inv.factors.len();
        let g = t + inv.free_rank;
        Module::new(Matrix::from_fn(ring, g, t, |i, j| if i == j { inv.factors[i].clone() } else { Elem::ZERO }))
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn generators(&self) -> usize {
        self.relations.rows()
    }

    pub fn relations(&self) -> &Matrix {
        &self.relations
    }

    pub fn direct_sum(&self, other: &Module) -> Module {
        Module::new(self.relations.block_diag(&other.relations))
    }

    pub fn invariants(&self) -> CokernelInvariants {
        cokernel_invariants(&self.relations)
    }

    pub fn is_zero(&self) -> bool {
        self.invariants().is_zero()
    }

    pub fn is_finite_length(&self) -> bool {
        self.invariants().is_finite_length()
    }

    pub fn is_free(&self) -> bool {
        self.invariants().factors.is_empty()
    }

    pub fn is_isomorphic(&self, other: &Module) -> bool {
        self.invariants() == other.invariants()
    }

    /// True iff every column of `v` (vectors in `A^g`) vanishes in the module.
    pub fn kills(&self, v: &Matrix) -> bool {
        v.is_zero() || solve_linear(&self.relations, v).expect("generator count matches").is_some()
    }

    /// Same module over another ring containing this one (e.g. ℤ[1/2] ⊂ ℤ₍p₎).
    pub fn extend_scalars(&self, ring: Ring) -> Result<Module> {
        Ok(Module::new(self.relations.over(ring)?))
    }

    /// Diagonal presentation with no unit relations, plus the isomorphisms
    /// to and from it.
    pub fn minimize(&self) -> Minimized {
        let ring = self.ring;
        let g = self.generators();
        let s = smith_normal_form(&self.relations);
        let t = s.invariant_factors.iter().take_while(|f| ring.is_unit(f)).count();
        let r = s.rank();
        let rels = Matrix::from_fn(ring, g - t, r - t, |i, j| {
            if i == j { s.invariant_factors[t + i].clone() } else { Elem::ZERO }
        });
        let module = Module::new(rels);
        let keep: Vec<usize> = (t..g).collect();
        let to_min = Morphism::new_unchecked(self.clone(), module.clone(), s.u.select_rows(&keep));
        let from_min = Morphism::new_unchecked(module.clone(), self.clone(), s.u_inv.select_columns(&keep));
        Minimized { module, to_min, from_min }
    }
}

/// A minimal presentation together with the comparison isomorphisms.
#[derive(Clone, Debug)]
pub struct Minimized {
    pub module: Module,
    pub to_min: Morphism,
    pub from_min: Morphism,
}

#[derive(Serialize, Deserialize)]
struct ModuleJson {
    ring: Ring,
    generators: usize,
    relations: Matrix,
}

impl Serialize for Module {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModuleJson { ring: self.ring, generators: self.generators(), relations: self.relations.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Module {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Module, D::Error> {
        use serde::de::Error as _;
        let j = ModuleJson::deserialize(d)?;
        if j.relations.rows() != j.generators {
            return Err(D::Error::custom("relation rows must equal the generator count"));
        }
        let rel = j.relations.over(j.ring).map_err(D::Error::custom)?;
        Ok(Module::new(rel))
    }
}

/// `matrix: A^{source.g} -> A^{target.g}` respecting relations.
#[derive(Clone, Debug, Serialize)]
pub struct Morphism {
    source: Module,
    target: Module,
    matrix: Matrix,
}

impl Morphism {
    /// Checks shapes and that source relations map into target relations.
    pub fn new(source: Module, target: Module, matrix: Matrix) -> Result<Morphism> {
        if matrix.shape() != (target.generators(), source.generators()) {
            return Err(Error::IllFormedMorphism(format!(
                "matrix is {}x{} but target has {} and source {} generators",
                matrix.rows(),
                matrix.cols(),
                target.generators(),
                source.generators()
            )));
        }
        if !target.kills(&matrix.mul(source.relations())) {
            return Err(Error::IllFormedMorphism("a source relation does not map to a target relation".into()));
        }
        Ok(Morphism { source, target, matrix })
    }

    pub(crate) fn new_unchecked(source: Module, target: Module, matrix: Matrix) -> Morphism {
        debug_assert_eq!(matrix.shape(), (target.generators(), source.generators()));
        Morphism { source, target, matrix }
    }

    pub fn identity(m: &Module) -> Morphism {
        Morphism::new_unchecked(m.clone(), m.clone(), Matrix::identity(m.ring(), m.generators()))
    }

    pub fn zero(source: &Module, target: &Module) -> Morphism {
        Morphism::new_unchecked(
            source.clone(),
            target.clone(),
            Matrix::zeros(source.ring(), target.generators(), source.generators()),
        )
    }

    pub fn source(&self) -> &Module {
        &self.source
    }

    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn ring(&self) -> Ring {
        self.source.ring()
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &Morphism) -> Morphism {
        debug_assert_eq!(f.target.generators(), self.source.generators());
        Morphism::new_unchecked(f.source.clone(), self.target.clone(), self.matrix.mul(&f.matrix))
    }

    pub fn add(&self, other: &Morphism) -> Morphism {
        Morphism::new_unchecked(self.source.clone(), self.target.clone(), self.matrix.add(&other.matrix))
    }

    pub fn sub(&self, other: &Morphism) -> Morphism {
        Morphism::new_unchecked(self.source.clone(), self.target.clone(), self.matrix.sub(&other.matrix))
    }

    pub fn scale(&self, c: &Elem) -> Morphism {
        Morphism::new_unchecked(self.source.clone(), self.target.clone(), self.matrix.scale(c))
    }

    /// Equality modulo the target relations.
    pub fn equals(&self, other: &Morphism) -> bool {
        self.matrix.shape() == other.matrix.shape() && self.target.kills(&self.matrix.sub(&other.matrix))
    }

    pub fn is_zero(&self) -> bool {
        self.target.kills(&self.matrix)
    }

    pub fn is_epi(&self) -> bool {
        self.cokernel().object.is_zero()
    }

    pub fn is_mono(&self) -> bool {
        self.kernel().object.is_zero()
    }

    pub fn is_iso(&self) -> bool {
        self.is_epi() && self.is_mono()
    }

    /// Basis of `{x in A^{source.g} : f x ∈ span(target relations)}`; it
    /// contains the source relations.
    fn preimage_of_relations(&self) -> Matrix {
        let ring = self.ring();
        let gs = self.source.generators();
        let big = self.matrix.hstack(&self.target.relations().neg());
        let k = kernel_basis(&big);
        let top = k.submatrix(0..gs, 0..k.cols());
        if top.cols() == 0 {
            return Matrix::zeros(ring, gs, 0);
        }
        image_basis(&top)
    }

    /// The inverse of an isomorphism, `None` otherwise.
    pub fn inverse(&self) -> Option<Morphism> {
        if !self.is_iso() {
            return None;
        }
        let ring = self.ring();
        let gs = self.source.generators();
        let sys = self.matrix.hstack(self.target.relations());
        let x = solve_linear(&sys, &Matrix::identity(ring, self.target.generators())).ok()??;
        Some(Morphism::new_unchecked(self.target.clone(), self.source.clone(), x.submatrix(0..gs, 0..x.cols())))
    }

    pub fn kernel(&self) -> Subquotient {
        let s = self.preimage_of_relations();
        let rel = solve_linear(&s, self.source.relations())
            .expect("shapes agree")
            .expect("source relations lie in the preimage");
        let raw = Module::new(rel);
        let incl = Morphism::new_unchecked(raw.clone(), self.source.clone(), s);
        let min = raw.minimize();
        Subquotient { kind: SubquotientKind::Kernel, object: min.module, map: incl.after(&min.from_min) }
    }

    pub fn image(&self) -> Subquotient {
        let s = self.preimage_of_relations();
        let raw = Module::new(s);
        let incl = Morphism::new_unchecked(raw.clone(), self.target.clone(), self.matrix.clone());
        let min = raw.minimize();
        Subquotient { kind: SubquotientKind::Image, object: min.module, map: incl.after(&min.from_min) }
    }

    pub fn cokernel(&self) -> Subquotient {
        let raw = Module::new(self.target.relations().hstack(&self.matrix));
        let proj = Morphism::new_unchecked(
            self.target.clone(),
            raw.clone(),
            Matrix::identity(self.ring(), self.target.generators()),
        );
        let min = raw.minimize();
        Subquotient { kind: SubquotientKind::Cokernel, object: min.module.clone(), map: min.to_min.after(&proj) }
    }

    pub fn subquotient(&self, kind: SubquotientKind) -> Subquotient {
        match kind {
            SubquotientKind::Kernel => self.kernel(),
            SubquotientKind::Image => self.image(),
            SubquotientKind::Cokernel => self.cokernel(),
        }
    }

    /// The map `f` restricted to its image and co-restricted: `source ↠ im f`.
    pub fn onto_image(&self) -> (Morphism, Subquotient) {
        let im = self.image();
        let m = solve_linear(
            &im.map.matrix.hstack(self.target.relations()),
            &self.matrix,
        )
        .expect("shapes agree")
        .expect("f factors through its image");
        let epi = Morphism::new_unchecked(
            self.source.clone(),
            im.object.clone(),
            m.submatrix(0..im.object.generators(), 0..m.cols()),
        );
        (epi, im)
    }
}

/// Morphisms are compared for structural identity only; use
/// [`Morphism::equals`] for equality in the category.
impl PartialEq for Morphism {
    fn eq(&self, other: &Morphism) -> bool {
        self.source == other.source && self.target == other.target && self.matrix == other.matrix
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubquotientKind {
    Kernel,
    Image,
    Cokernel,
}

/// Kernel and image come with their inclusion, cokernel with its projection.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub kind: SubquotientKind,
    pub object: Module,
    pub map: Morphism,
}

#[derive(Clone, Debug)]
pub struct Pullback {
    pub object: Module,
    pub proj1: Morphism,
    pub proj2: Morphism,
}

/// `{(x, y) : f x = g y}` for `f: M -> T`, `g: N -> T`.
pub fn pullback(f: &Morphism, g: &Morphism) -> Result<Pullback> {
    if f.target() != g.target() {
        return Err(Error::TargetMismatch);
    }
    let ring = f.ring();
    let (gm, gn) = (f.source().generators(), g.source().generators());
    let big = f.matrix().hstack(&g.matrix().neg()).hstack(f.target().relations());
    let k = kernel_basis(&big);
    let top = k.submatrix(0..gm + gn, 0..k.cols());
    let s = if top.cols() == 0 { Matrix::zeros(ring, gm + gn, 0) } else { image_basis(&top) };
    let rel_sum = f.source().relations().block_diag(g.source().relations());
    let rel = solve_linear(&s, &rel_sum).expect("shapes agree").expect("relations lie in the pullback");
    let raw = Module::new(rel);
    let min = raw.minimize();
    let p1 = Morphism::new_unchecked(raw.clone(), f.source().clone(), s.submatrix(0..gm, 0..s.cols()));
    let p2 = Morphism::new_unchecked(raw, g.source().clone(), s.submatrix(gm..gm + gn, 0..s.cols()));
    Ok(Pullback { object: min.module, proj1: p1.after(&min.from_min), proj2: p2.after(&min.from_min) })
}

/// `Hom(M, A)` as a free module, with the basis `K` of `ker(Rᵀ)` that
/// identifies its elements with functionals `φ = (K c)ᵀ`.
#[derive(Clone, Debug)]
pub struct HomDual {
    pub module: Module,
    pub basis: Matrix,
}

pub fn hom_to_omega(m: &Module) -> HomDual {
    let k = kernel_basis(&m.relations().transpose());
    HomDual { module: Module::free(m.ring(), k.cols()), basis: k }
}

/// `Hom(f, A): Hom(N, A) -> Hom(M, A)` for `f: M -> N`.
pub fn hom_to_omega_map(f: &Morphism, src: &HomDual, tgt: &HomDual) -> Morphism {
    // φ ↦ φ∘f, i.e. K_N c ↦ Fᵀ K_N c = K_M y.
    let rhs = f.matrix().transpose().mul(&tgt.basis);
    let y = solve_linear(&src.basis, &rhs).expect("shapes agree").expect("precomposition lands in the dual");
    Morphism::new_unchecked(tgt.module.clone(), src.module.clone(), y)
}

/// `Ext^i(M, A)` from the minimal resolution `0 -> A^r -D-> A^g -> M`:
/// `Ext⁰ = ker Dᵀ`, `Ext¹ = coker Dᵀ`, zero beyond.
pub fn ext(m: &Module, i: usize) -> Module {
    let ring = m.ring();
    let d = m.minimize().module.relations().clone();
    match i {
        0 => Module::free(ring, kernel_basis(&d.transpose()).cols()),
        1 => Module::new(d.transpose()).minimize().module,
        _ => Module::zero(ring),
    }
}

/// One local summand of a finite-length ℤ[1/2]-module.
#[derive(Clone, Debug)]
pub struct PrimaryPart {
    pub prime: u64,
    /// The summand as a ℤ₍p₎-module, minimally presented.
    pub local: Module,
    /// Integer `e` with `e ≡ 1 mod p^a` and `e ≡ 0` modulo the other
    /// primary parts of the annihilator; multiplication by `e` projects onto
    /// this summand.
    pub idempotent: Elem,
    /// `M -> local`, defined over ℤ₍p₎ on the original generators.
    pub projection: Matrix,
}

/// Chinese-remainder splitting `M ≅ ⊕ₚ M₍p₎` over ℤ[1/2].
pub fn primary_decompose(m: &Module) -> Result<Vec<PrimaryPart>> {
    if !matches!(m.ring().kind(), RingKind::IntegersTwoInverted) {
        return Err(Error::UnsupportedRing(format!(
            "primary decomposition runs over z-half, not {}",
            m.ring().descriptor()
        )));
    }
    let inv = m.invariants();
    if inv.free_rank > 0 {
        return Err(Error::NotFiniteLength { free_rank: inv.free_rank });
    }
    let Some(ann) = inv.factors.last() else { return Ok(vec![]) };
    let ann = ann.numer();
    let mut out = vec![];
    for (p, a) in crate::rings::factor_integer(&ann) {
        let pa = p.pow(a);
        let rest = &ann / &pa;
        let e = if rest.is_one() {
            BigInt::one()
        } else {
            let inv_rest = rest.extended_gcd(&pa).x.mod_floor(&pa);
            (rest * inv_rest).mod_floor(&ann)
        };
        let p64 = p.to_u64().expect("generator entries are small");
        let local_ring = Ring::local_at(p64)?;
        let lm = m.extend_scalars(local_ring)?;
        let min = lm.minimize();
        out.push(PrimaryPart {
            prime: p64,
            local: min.module,
            idempotent: Elem::from_big(num_rational::BigRational::from_integer(e)),
            projection: min.to_min.matrix().clone(),
        });
    }
    Ok(out)
}
