//! Free resolutions of modules, lifts of module maps to chain maps, and the
//! memoized functor ζ from modules to bounded free complexes.
//!
//! Every object of the category of free modules is projective here, so lifts
//! are honest chain maps and a roof `E <-τ- L -γ-> Q` is turned into a single
//! map `E -> Q` by inverting `τ` up to homotopy.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock};

use parking_lot::RwLock;

use crate::complexes::{find_homotopy, homotopy_inverse, ChainMap, Complex, Homotopy, ModuleComplex};
use crate::error::{Error, Result};
use crate::linalg::{image_basis, kernel_basis, solve_linear, Matrix};
use crate::modules::{pullback, Module, Morphism};
use crate::rings::Ring;

/// A free complex `P` in degrees `[0, len]` with `H_0(P) ≅ module` and no
/// higher homology.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution {
    pub module: Module,
    pub complex: Complex,
    /// `P_0 -> module`, surjective with kernel `im ∂_1`.
    pub augmentation: Morphism,
}

impl Resolution {
    /// Validates exactness in positive degrees and that the augmentation
    /// identifies `coker ∂_1` with the module.
    pub fn new(module: Module, complex: Complex, augmentation: Matrix) -> Result<Resolution> {
        let ring = module.ring();
        if let Some((lo, _)) = complex.support() {
            if lo < 0 {
                return Err(Error::ShapeMismatch("a resolution lives in nonnegative degrees".into()));
            }
        }
        let (_, hi) = complex.bounds();
        for r in 1..=hi {
            if !complex.homology_invariants(r).is_zero() {
                return Err(Error::ShapeMismatch(format!("resolution has homology in degree {r}")));
            }
        }
        let p0 = Module::free(ring, complex.rank(0));
        let aug = Morphism::new(p0, module.clone(), augmentation)?;
        let res = Resolution { module, complex, augmentation: aug };
        if !res.comparison().is_iso() {
            return Err(Error::IllFormedMorphism("augmentation does not identify H_0 with the module".into()));
        }
        Ok(res)
    }

    pub fn ring(&self) -> Ring {
        self.module.ring()
    }

    /// `H_0(P) = coker ∂_1`, presented on the basis of `P_0`.
    pub fn h0(&self) -> Module {
        Module::new(self.complex.d(1))
    }

    /// The isomorphism `H_0(P) -> module` induced by the augmentation.
    pub fn comparison(&self) -> Morphism {
        Morphism::new_unchecked(self.h0(), self.module.clone(), self.augmentation.matrix().clone())
    }

    /// `module -> H_0(P)`.
    pub fn comparison_inverse(&self) -> Morphism {
        self.comparison().inverse().expect("the comparison is an isomorphism")
    }

    pub fn length(&self) -> usize {
        self.complex.support().map_or(0, |(_, hi)| hi.max(0) as usize)
    }
}

/// Minimal resolution: `∂_1` is the diagonal of nonunit invariant factors,
/// so its length is 0 over fields and at most 1 otherwise.
pub fn resolve_module(m: &Module) -> Resolution {
    let min = m.minimize();
    let d = min.module.relations().clone();
    let complex = if d.cols() == 0 {
        Complex::concentrated(m.ring(), 0, d.rows())
    } else {
        Complex::two_term(0, d)
    };
    let augmentation = Morphism::new_unchecked(
        Module::free(m.ring(), complex.rank(0)),
        m.clone(),
        min.from_min.matrix().clone(),
    );
    Resolution { module: m.clone(), complex, augmentation }
}

/// `0 -> im R -> A^g -> M`: the relation module replaced by a basis of its
/// image, generators kept as they are.
pub fn resolve_presentation(m: &Module) -> Resolution {
    let ring = m.ring();
    let g = m.generators();
    let rel = m.relations();
    let basis = if rel.cols() == 0 || rel.is_zero() { Matrix::zeros(ring, g, 0) } else { image_basis(rel) };
    let complex = if basis.cols() == 0 { Complex::concentrated(ring, 0, g) } else { Complex::two_term(0, basis) };
    let augmentation = Morphism::new_unchecked(Module::free(ring, g), m.clone(), Matrix::identity(ring, g));
    Resolution { module: m.clone(), complex, augmentation }
}

/// A chain map `P -> Q` over `g`, built degreewise from projectivity.
pub fn lift_morphism(g: &Morphism, p: &Resolution, q: &Resolution) -> Result<ChainMap> {
    if g.source() != &p.module || g.target() != &q.module {
        return Err(Error::IncompatibleAugmentations("lift needs resolutions of the source and target".into()));
    }
    let ring = g.ring();
    let (pc, qc) = (&p.complex, &q.complex);
    let rhs = g.matrix().mul(p.augmentation.matrix());
    let eq = q.augmentation.matrix();
    let f0 = match solve_linear(eq, &rhs)? {
        Some(x) => x,
        None => {
            let sys = eq.hstack(q.module.relations());
            let x = solve_linear(&sys, &rhs)?.expect("P_0 is free and ε_Q is onto");
            x.submatrix(0..qc.rank(0), 0..x.cols())
        }
    };
    let (_, hi) = pc.bounds();
    let mut comps = BTreeMap::new();
    comps.insert(0, f0);
    for r in 1..=hi {
        let prev = comps[&(r - 1)].mul(&pc.d(r));
        let f = if qc.rank(r) == 0 {
            debug_assert!(prev.is_zero());
            Matrix::zeros(ring, 0, pc.rank(r))
        } else {
            solve_linear(&qc.d(r), &prev)?.expect("Q is exact in positive degrees")
        };
        comps.insert(r, f);
    }
    Ok(ChainMap::from_fn(pc, qc, |r| comps.get(&r).cloned().unwrap_or_else(|| Matrix::zeros(ring, qc.rank(r), pc.rank(r)))))
}

/// A free complex `L` with a degreewise surjective quasi-isomorphism onto a
/// complex of presented modules.
#[derive(Clone, Debug)]
pub struct QuasiResolution {
    pub complex: Complex,
    pub target: ModuleComplex,
    /// `g_r: L_r -> G_r` on the generators of `G_r`.
    pub components: BTreeMap<i64, Matrix>,
}

impl QuasiResolution {
    pub fn component(&self, r: i64) -> Morphism {
        let src = Module::free(self.complex.ring(), self.complex.rank(r));
        let tgt = self.target.object(r);
        let m = self
            .components
            .get(&r)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.complex.ring(), tgt.generators(), src.generators()));
        Morphism::new_unchecked(src, tgt, m)
    }

    fn degrees(&self) -> (i64, i64) {
        let (a, b) = self.complex.bounds();
        let (c, e) = self.target.bounds();
        (a.min(c), b.max(e) + 1)
    }

    pub fn is_chain_map(&self) -> bool {
        let (lo, hi) = self.degrees();
        (lo..=hi).all(|r| {
            let lhs = self.target.d(r).after(&self.component(r));
            let dl = Morphism::new_unchecked(
                Module::free(self.complex.ring(), self.complex.rank(r)),
                Module::free(self.complex.ring(), self.complex.rank(r - 1)),
                self.complex.d(r),
            );
            lhs.equals(&self.component(r - 1).after(&dl))
        })
    }

    pub fn is_degreewise_epi(&self) -> bool {
        let (lo, hi) = self.degrees();
        (lo..=hi).all(|r| self.component(r).is_epi())
    }

    /// The induced map `H_r(L) -> H_r(G)`.
    pub fn homology_map(&self, r: i64) -> Morphism {
        let hl = self.complex.homology(r);
        let hg = self.target.homology_data(r);
        let images = self.component(r).matrix().mul(&hl.cycles);
        let coords = self.target.cycle_coordinates(&hg, &images).expect("chain maps send cycles to cycles");
        let m = hg.projection.matrix().mul(&coords);
        Morphism::new_unchecked(hl.module, hg.module, m)
    }

    pub fn induces_homology_isos(&self) -> bool {
        let (lo, hi) = self.degrees();
        (lo..=hi).all(|r| self.homology_map(r).is_iso())
    }
}

/// Degreewise-epi free replacement of a bounded complex of presented modules,
/// built upward by pullbacks.
///
/// With `K_n = ker ∂^L_n`, the next term covers
/// `Γ = {(y, z) ∈ G_{n+1} × K_n : d y = g_n z}`, `g_{n+1}` is the first
/// projection and `∂^L_{n+1}` the second. Each step keeps `g_n(K_n) ⊇ Z_n(G)`,
/// which makes `g` epi and `H(g)` injective then surjective degree by degree.
/// Above the top of `G` the pullback is `ker(g|K)`, a free module, and `L`
/// stops there.
pub fn resolve_quasi(g: &ModuleComplex) -> Result<QuasiResolution> {
    let ring = g.ring();
    let (lo, hi) = g.bounds();
    if hi < lo {
        return Ok(QuasiResolution { complex: Complex::zero(ring), target: g.clone(), components: BTreeMap::new() });
    }
    if (lo..=hi).all(|r| g.object(r).relations().cols() == 0) {
        let c = Complex::from_fn(ring, lo, hi, |r| g.object(r).generators(), |r| g.d(r).matrix().clone());
        let components = (lo..=hi).map(|r| (r, Matrix::identity(ring, c.rank(r)))).collect();
        return Ok(QuasiResolution { complex: c, target: g.clone(), components });
    }

    let mut ranks = vec![g.object(lo).generators()];
    let mut diffs: Vec<Matrix> = vec![];
    let mut comps = BTreeMap::new();
    comps.insert(lo, Matrix::identity(ring, ranks[0]));
    let mut kernel = Matrix::identity(ring, ranks[0]);
    for n in lo..=hi {
        let k = kernel.cols();
        let gk = Morphism::new_unchecked(Module::free(ring, k), g.object(n), comps[&n].mul(&kernel));
        let (next_rank, g_next, d_next) = if n < hi {
            let pb = pullback(&g.d(n + 1), &gk)?;
            let m = pb.object.generators();
            (m, pb.proj1.matrix().clone(), kernel.mul(pb.proj2.matrix()))
        } else {
            let basis = gk.kernel().map.matrix().clone();
            (basis.cols(), Matrix::zeros(ring, 0, basis.cols()), kernel.mul(&basis))
        };
        if n < hi {
            comps.insert(n + 1, g_next);
        }
        ranks.push(next_rank);
        kernel = if next_rank == 0 { Matrix::zeros(ring, 0, 0) } else { kernel_basis(&d_next) };
        diffs.push(d_next);
        if n == hi {
            break;
        }
    }
    let complex = Complex::new_unchecked(ring, lo, ranks, diffs);
    Ok(QuasiResolution { complex, target: g.clone(), components: comps })
}

/// `E <-τ- L -γ-> Q` with `τ` a quasi-isomorphism.
#[derive(Clone, Debug)]
pub struct LiftTriple {
    pub l: Complex,
    pub tau: ChainMap,
    pub gamma: ChainMap,
}

/// The degreewise pullback `Γ` of resolutions `F` of `M` and `G` of `N` over
/// `g: M -> N`: `Γ_0 = {(x, y) : g ε_F x = ε_G y}` (free, as a submodule of a
/// free module) and `Γ_i = F_i ⊕ G_i` above.
pub fn pullback_complexes(f: &Resolution, gr: &Resolution, g: &Morphism) -> Result<LiftTriple> {
    if g.source() != &f.module || g.target() != &gr.module {
        return Err(Error::IncompatibleAugmentations("g must map the first resolved module to the second".into()));
    }
    let ring = g.ring();
    let (fc, gc) = (&f.complex, &gr.complex);
    let pb = pullback(&g.after(&f.augmentation), &gr.augmentation)?;
    debug_assert!(pb.object.is_free());
    let (p1, p2) = (pb.proj1.matrix().clone(), pb.proj2.matrix().clone());
    let basis = p1.vstack(&p2);
    let n0 = basis.cols();
    let hi = fc.bounds().1.max(gc.bounds().1).max(0);
    let rank = |r: i64| if r == 0 { n0 } else { fc.rank(r) + gc.rank(r) };
    let d1 = solve_linear(&basis, &fc.d(1).block_diag(&gc.d(1)))?
        .ok_or_else(|| Error::IncompatibleAugmentations("∂_1 does not land in the pullback".into()))?;
    let l = Complex::from_fn(ring, 0, hi, rank, |r| if r == 1 { d1.clone() } else { fc.d(r).block_diag(&gc.d(r)) });
    let tau = ChainMap::from_fn(&l, fc, |r| {
        if r == 0 {
            p1.clone()
        } else {
            Matrix::identity(ring, fc.rank(r)).hstack(&Matrix::zeros(ring, fc.rank(r), gc.rank(r)))
        }
    });
    let gamma = ChainMap::from_fn(&l, gc, |r| {
        if r == 0 {
            p2.clone()
        } else {
            Matrix::zeros(ring, gc.rank(r), fc.rank(r)).hstack(&Matrix::identity(ring, gc.rank(r)))
        }
    });
    Ok(LiftTriple { l, tau, gamma })
}

/// The lift of `g` as a roof through the pullback of the two resolutions.
pub fn lift_triple(g: &Morphism, p: &Resolution, q: &Resolution) -> Result<LiftTriple> {
    pullback_complexes(p, q, g)
}

/// A chain map `E -> Q` standing for the roof, with `map ∘ τ - γ = ∂h + h∂`.
#[derive(Clone, Debug)]
pub struct NormalizedRoof {
    pub map: ChainMap,
    pub witness: Homotopy,
}

pub fn normalize_roof(tau: &ChainMap, gamma: &ChainMap) -> Result<NormalizedRoof> {
    if tau.source() != gamma.source() {
        return Err(Error::ShapeMismatch("roof legs need a common source".into()));
    }
    let inv = homotopy_inverse(tau)?;
    let map = gamma.after(&inv.inverse);
    let witness = find_homotopy(&map.after(tau), gamma)?.ok_or(Error::NotQuasiIso)?;
    Ok(NormalizedRoof { map, witness })
}

/// The global choice of resolutions: one minimal resolution per presented
/// module, computed once.
#[derive(Default)]
pub struct Zeta {
    table: RwLock<HashMap<Module, Arc<Resolution>>>,
}

impl Zeta {
    pub fn new() -> Zeta {
        Zeta::default()
    }

    /// The process-wide table used by [`zeta_object`] and [`zeta_morphism`].
    pub fn global() -> &'static Zeta {
        static GLOBAL: OnceLock<Zeta> = OnceLock::new();
        GLOBAL.get_or_init(Zeta::new)
    }

    pub fn object(&self, m: &Module) -> Arc<Resolution> {
        if let Some(r) = self.table.read().get(m) {
            return Arc::clone(r);
        }
        let fresh = Arc::new(resolve_module(m));
        // A concurrent insert computed the same deterministic value.
        Arc::clone(self.table.write().entry(m.clone()).or_insert(fresh))
    }

    pub fn morphism(&self, g: &Morphism) -> ChainMap {
        let (p, q) = (self.object(g.source()), self.object(g.target()));
        lift_morphism(g, &p, &q).expect("ζ resolves both ends")
    }

    pub fn len(&self) -> usize {
        self.table.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn zeta_object(m: &Module) -> Arc<Resolution> {
    Zeta::global().object(m)
}

pub fn zeta_morphism(g: &Morphism) -> ChainMap {
    Zeta::global().morphism(g)
}
