mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::*;
use devissage::complexes::{are_homotopic, find_homotopy, ChainMap, Complex, ModuleComplex};
use devissage::linalg::CokernelInvariants;
use devissage::modules::{Module, Morphism};
use devissage::resolution::*;
use devissage::{Elem, Error, Matrix, Ring};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn zh() -> Ring {
    Ring::two_inverted()
}

fn cyc(r: Ring, a: i64) -> Module {
    Module::cyclic(r, &r.int(a))
}

fn mul(m: &Module, n: &Module, c: i64) -> Morphism {
    Morphism::new(m.clone(), n.clone(), Matrix::from_i64(m.ring(), 1, 1, &[c])).unwrap()
}

/// `ε_Q f_0 ≡ g ε_P` modulo the relations of the target.
fn augmentation_compatible(f: &ChainMap, g: &Morphism, p: &Resolution, q: &Resolution) -> bool {
    let lhs = q.augmentation.matrix().mul(&f.at(0));
    let rhs = g.matrix().mul(p.augmentation.matrix());
    q.module.kills(&lhs.sub(&rhs))
}

#[test]
fn resolve_module_examples() {
    let m = cyc(zh(), 3);
    let p = resolve_module(&m);
    assert_eq!(p.complex, Complex::two_term(0, Matrix::from_i64(zh(), 1, 1, &[3])));
    // Kernel oracle: ker(A -> A/3) computed in the module category is 3A.
    let eps = Morphism::new(Module::free(zh(), 1), m.clone(), Matrix::from_i64(zh(), 1, 1, &[1])).unwrap();
    let k = eps.kernel();
    assert_eq!(k.object.invariants(), CokernelInvariants { free_rank: 1, factors: vec![] });
    assert!(Module::new(k.map.matrix().clone()).is_isomorphic(&Module::new(p.complex.d(1))));

    let free = resolve_module(&Module::free(zh(), 1));
    assert_eq!(free.complex, Complex::concentrated(zh(), 0, 1));
    assert_eq!(free.length(), 0);

    let mixed = Module::new(Matrix::from_i64(zh(), 2, 1, &[3, 0]));
    let p = resolve_module(&mixed);
    assert_eq!((p.complex.rank(0), p.complex.rank(1)), (2, 1));
    assert_eq!(Module::new(p.complex.d(1)).invariants(), mixed.invariants());
    assert!(p.comparison().is_iso());
    assert!(Resolution::new(mixed.clone(), p.complex.clone(), p.augmentation.matrix().clone()).is_ok());
}

#[test]
fn resolutions_over_fields_have_length_zero() {
    let f5 = Ring::prime_field(5).unwrap();
    let m = Module::new(Matrix::from_i64(f5, 2, 2, &[1, 2, 2, 4]));
    let p = resolve_module(&m);
    assert_eq!(p.length(), 0);
    assert_eq!(p.complex.rank(0), 1);
}

#[test]
fn resolution_validation_rejects_bad_augmentations() {
    let m = cyc(zh(), 3);
    let c = Complex::two_term(0, Matrix::from_i64(zh(), 1, 1, &[3]));
    assert!(Resolution::new(m.clone(), c.clone(), Matrix::from_i64(zh(), 1, 1, &[0])).is_err());
    let nine = Complex::two_term(0, Matrix::from_i64(zh(), 1, 1, &[9]));
    assert!(Resolution::new(m, nine, Matrix::from_i64(zh(), 1, 1, &[1])).is_err());
}

#[test]
fn lift_examples() {
    let m = cyc(zh(), 3);
    let p = resolve_module(&m);
    let two = lift_morphism(&mul(&m, &m, 2), &p, &p).unwrap();
    // Direct lift: ε = 1, so f_0 = 2, and 3 f_1 = f_0 3 forces f_1 = 2.
    assert_eq!(two.at(0), Matrix::from_i64(zh(), 1, 1, &[2]));
    assert_eq!(two.at(1), Matrix::from_i64(zh(), 1, 1, &[2]));

    let id = lift_morphism(&Morphism::identity(&m), &p, &p).unwrap();
    assert_eq!(id, ChainMap::identity(&p.complex));

    let zero = lift_morphism(&Morphism::zero(&m, &m), &p, &p).unwrap();
    assert!(are_homotopic(&zero, &ChainMap::zero(&p.complex, &p.complex)));

    let n = cyc(zh(), 5);
    let err = lift_morphism(&Morphism::identity(&m), &p, &resolve_module(&n)).unwrap_err();
    assert!(matches!(err, Error::IncompatibleAugmentations(_)));
}

#[test]
fn lift_of_three_into_nine() {
    let (a3, a9) = (cyc(zh(), 3), cyc(zh(), 9));
    let g = mul(&a3, &a9, 3);
    let (p, q) = (resolve_module(&a3), resolve_module(&a9));
    let f = lift_morphism(&g, &p, &q).unwrap();
    // 9 f_1 = f_0 3 with f_0 = 3 gives f_1 = 1.
    assert_eq!(f.at(0), Matrix::from_i64(zh(), 1, 1, &[3]));
    assert_eq!(f.at(1), Matrix::from_i64(zh(), 1, 1, &[1]));
    assert!(augmentation_compatible(&f, &g, &p, &q));
}

#[test]
fn resolve_quasi_examples() {
    let m = cyc(zh(), 3);
    let g = ModuleComplex::new(zh(), 0, vec![m.clone()], vec![]).unwrap();
    let q = resolve_quasi(&g).unwrap();
    assert_eq!(q.complex.homology(0).invariants, m.invariants());
    assert!(q.complex.homology_invariants(1).is_zero());
    assert!(q.is_chain_map() && q.is_degreewise_epi() && q.induces_homology_isos());
    assert_eq!((q.complex.rank(0), q.complex.rank(1)), (1, 1));

    let free = Complex::two_term(0, Matrix::from_i64(zh(), 1, 1, &[3]));
    let q = resolve_quasi(&ModuleComplex::from_free(&free)).unwrap();
    assert_eq!(q.complex, free);
    assert_eq!(q.components[&0], Matrix::identity(zh(), 1));

    let exact = ModuleComplex::new(zh(), 0, vec![m.clone(), m.clone()], vec![Morphism::identity(&m)]).unwrap();
    let q = resolve_quasi(&exact).unwrap();
    assert!(q.complex.is_exact());
    assert!(q.is_chain_map() && q.induces_homology_isos());
}

#[test]
fn pullback_examples() {
    let m = cyc(zh(), 3);
    let p = resolve_module(&m);
    let t = pullback_complexes(&p, &p, &Morphism::identity(&m)).unwrap();
    assert!(t.tau.is_quasi_iso() && t.gamma.is_quasi_iso());

    let z = pullback_complexes(&p, &p, &Morphism::zero(&m, &m)).unwrap();
    assert!(z.tau.is_quasi_iso());
    assert!(z.gamma.homology_map(0).is_zero());

    // ·3: A/3 -> A/9. Γ_0 = {(x, y) : 3x ≡ y mod 9}; oracle: the lattice
    // spanned by (1, 3) and (0, 9) in A².
    let (a3, a9) = (cyc(zh(), 3), cyc(zh(), 9));
    let (f, g) = (resolve_module(&a3), resolve_module(&a9));
    let trip = pullback_complexes(&f, &g, &mul(&a3, &a9, 3)).unwrap();
    let basis = trip.tau.at(0).vstack(&trip.gamma.at(0));
    let oracle = Matrix::from_i64(zh(), 2, 2, &[1, 0, 3, 9]);
    assert!(Module::new(basis.clone()).is_isomorphic(&Module::new(oracle.clone())));
    let both = |a: &Matrix, b: &Matrix| devissage::linalg::solve_linear(a, b).unwrap().is_some();
    assert!(both(&basis, &oracle) && both(&oracle, &basis));
    assert!(trip.tau.is_quasi_iso());
    assert_eq!((trip.l.rank(0), trip.l.rank(1)), (2, 2));

    let bad = pullback_complexes(&f, &f, &mul(&a3, &a9, 3)).unwrap_err();
    assert!(matches!(bad, Error::IncompatibleAugmentations(_)));
}

#[test]
fn normalize_roof_examples() {
    let c = Complex::two_term(0, Matrix::from_i64(zh(), 1, 1, &[3]));
    let id = ChainMap::identity(&c);
    let two = id.scale(&Elem::int(2));
    let r = normalize_roof(&id, &two).unwrap();
    assert!(r.witness.witnesses(&r.map.after(&id), &two));
    assert!(are_homotopic(&r.map, &two));

    let r = normalize_roof(&two, &two).unwrap();
    assert!(are_homotopic(&r.map, &id));

    let zero = ChainMap::zero(&c, &c);
    assert_eq!(normalize_roof(&zero, &zero).unwrap_err(), Error::NotQuasiIso);
}

#[test]
fn zeta_memoizes() {
    let z = Zeta::new();
    let m = cyc(zh(), 15);
    let a = z.object(&m);
    let b = z.object(&m);
    assert!(Arc::ptr_eq(&a, &b));
    assert_eq!(z.len(), 1);
    let id = z.morphism(&Morphism::identity(&m));
    assert!(are_homotopic(&id, &ChainMap::identity(&a.complex)));
}

#[test]
fn zeta_concurrent_inserts_agree() {
    use rayon::prelude::*;
    let z = Zeta::new();
    let mods: Vec<Module> = (0..8).map(|i| cyc(zh(), [3, 5, 9, 15][i % 4])).collect();
    let got: Vec<Arc<Resolution>> = mods.par_iter().map(|m| z.object(m)).collect();
    assert_eq!(z.len(), 4);
    for (m, r) in mods.iter().zip(&got) {
        assert!(Arc::ptr_eq(r, &z.object(m)));
    }
}

#[test]
fn zeta_of_zero_composite_is_null_homotopic() {
    let (a3, a9) = (cyc(zh(), 3), cyc(zh(), 9));
    let g0 = mul(&a3, &a9, 3);
    let g1 = mul(&a9, &a3, 1);
    assert!(g1.after(&g0).is_zero());
    let comp = zeta_morphism(&g1).after(&zeta_morphism(&g0));
    assert!(are_homotopic(&comp, &ChainMap::zero(comp.source(), comp.target())));
}

fn random_pair(ring: Ring, r: &mut ChaCha8Rng) -> (Module, Module, Morphism) {
    let torsion = ring.d() == 1 && r.gen_bool(0.7);
    let m = random_module(ring, 3, torsion, r);
    let n = random_module(ring, 3, torsion, r);
    let g = random_morphism(&m, &n, r);
    (m, n, g)
}

/// `C / nC` for a random free complex `C`: a complex of presented modules.
fn random_module_complex(ring: Ring, r: &mut ChaCha8Rng) -> ModuleComplex {
    let c = random_complex(ring, 0, 3, 2, r);
    let n = if ring.is_field() { 0 } else { [0, 3, 9, 5][r.gen_range(0..4)] };
    let (lo, hi) = c.bounds();
    let objects: Vec<Module> = (lo..=hi)
        .map(|k| {
            let rk = c.rank(k);
            if n == 0 {
                Module::free(ring, rk)
            } else {
                Module::new(Matrix::scalar(ring, rk, &ring.int(n)))
            }
        })
        .collect();
    let diffs = (lo + 1..=hi)
        .map(|k| Morphism::new(objects[(k - lo) as usize].clone(), objects[(k - lo - 1) as usize].clone(), c.d(k)).unwrap())
        .collect();
    ModuleComplex::new(ring, lo, objects, diffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn independent_lifts_are_homotopic(seed in any::<u64>(), ri in 0usize..4) {
        let ring = test_rings()[ri];
        let mut r = rng(seed);
        let (m, n, g) = random_pair(ring, &mut r);
        let (p, q) = (resolve_module(&m), resolve_module(&n));
        let f = lift_morphism(&g, &p, &q).unwrap();
        prop_assert!(f.is_chain_map());
        prop_assert!(augmentation_compatible(&f, &g, &p, &q));
        // Second route: the roof through the pullback of the two resolutions.
        let t = lift_triple(&g, &p, &q).unwrap();
        prop_assert!(t.tau.is_quasi_iso());
        let roof = normalize_roof(&t.tau, &t.gamma).unwrap();
        prop_assert!(roof.witness.witnesses(&roof.map.after(&t.tau), &t.gamma));
        prop_assert!(find_homotopy(&f, &roof.map).unwrap().is_some());
    }

    #[test]
    fn lifts_through_other_resolutions_agree(seed in any::<u64>(), ri in 0usize..4) {
        let ring = test_rings()[ri];
        let mut r = rng(seed);
        let (m, n, g) = random_pair(ring, &mut r);
        let (p, q) = (resolve_module(&m), resolve_module(&n));
        let (p2, q2) = (resolve_presentation(&m), resolve_presentation(&n));
        // ζ(g) ≃ c_Q ∘ lift(g; P', Q') ∘ c_P with comparison lifts of the identity.
        let direct = lift_morphism(&g, &p, &q).unwrap();
        let cp = lift_morphism(&Morphism::identity(&m), &p, &p2).unwrap();
        let cq = lift_morphism(&Morphism::identity(&n), &q2, &q).unwrap();
        let via = cq.after(&lift_morphism(&g, &p2, &q2).unwrap()).after(&cp);
        prop_assert!(are_homotopic(&direct, &via));
        prop_assert!(cp.is_quasi_iso() && cq.is_quasi_iso());
    }

    #[test]
    fn zeta_is_functorial(seed in any::<u64>(), ri in 0usize..4) {
        let ring = test_rings()[ri];
        let mut r = rng(seed);
        let (_, n, g0) = random_pair(ring, &mut r);
        let l = random_module(ring, 3, n.is_finite_length(), &mut r);
        let g1 = random_morphism(&n, &l, &mut r);
        let z = Zeta::new();
        let lhs = z.morphism(&g1.after(&g0));
        let rhs = z.morphism(&g1).after(&z.morphism(&g0));
        prop_assert!(are_homotopic(&lhs, &rhs));
        let id = z.morphism(&Morphism::identity(&n));
        prop_assert!(are_homotopic(&id, &ChainMap::identity(&z.object(&n).complex)));
    }

    #[test]
    fn two_resolutions_are_linked_by_quasi_isos(seed in any::<u64>(), ri in 0usize..4) {
        let ring = test_rings()[ri];
        let mut r = rng(seed);
        let m = random_module(ring, 3, false, &mut r);
        let (p, p2) = (resolve_module(&m), resolve_presentation(&m));
        let t = pullback_complexes(&p, &p2, &Morphism::identity(&m)).unwrap();
        prop_assert!(t.tau.is_quasi_iso() && t.gamma.is_quasi_iso());
        // Both squares over the augmentations commute.
        let lhs = p2.augmentation.matrix().mul(&t.gamma.at(0));
        let rhs = p.augmentation.matrix().mul(&t.tau.at(0));
        prop_assert!(m.kills(&lhs.sub(&rhs)));
    }

    #[test]
    fn resolve_quasi_is_a_degreewise_epi_quasi_iso(seed in any::<u64>(), ri in 0usize..4) {
        let ring = test_rings()[ri];
        let mut r = rng(seed);
        let g = random_module_complex(ring, &mut r);
        let q = resolve_quasi(&g).unwrap();
        prop_assert!(q.is_chain_map());
        prop_assert!(q.is_degreewise_epi());
        prop_assert!(q.induces_homology_isos());
        let (lo, hi) = g.bounds();
        for k in lo..=hi + 1 {
            prop_assert_eq!(q.complex.homology_invariants(k), g.homology_invariants(k));
        }
        let comps: BTreeMap<i64, Matrix> = q.components.clone();
        prop_assert!(comps.keys().all(|k| *k >= lo));
    }
}
