use devissage::linalg::{solve_linear, CokernelInvariants};
use devissage::modules::{ext, hom_to_omega, hom_to_omega_map, primary_decompose, pullback, Module, Morphism};
use devissage::{Elem, Error, Matrix, Ring};
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;

fn zh() -> Ring {
    Ring::two_inverted()
}

fn inv(free_rank: usize, factors: &[i64]) -> CokernelInvariants {
    CokernelInvariants { free_rank, factors: factors.iter().map(|&f| Elem::int(f)).collect() }
}

fn cyc(r: Ring, a: i64) -> Module {
    Module::cyclic(r, &r.int(a))
}

fn order(c: &CokernelInvariants) -> BigInt {
    c.factors.iter().map(|f| f.numer()).product::<BigInt>()
}

#[test]
fn cokernel_of_three() {
    let a = Module::free(zh(), 1);
    let f = Morphism::new(a.clone(), a, Matrix::from_i64(zh(), 1, 1, &[3])).unwrap();
    assert_eq!(f.cokernel().object.invariants(), inv(0, &[3]));
}

#[test]
fn kernel_of_identity_is_zero() {
    let m = cyc(zh(), 9).direct_sum(&Module::free(zh(), 2));
    let k = Morphism::identity(&m).kernel();
    assert_eq!(k.object.generators(), 0);
}

#[test]
fn kernel_of_canonical_epi() {
    let f = Morphism::new(Module::free(zh(), 1), cyc(zh(), 3), Matrix::identity(zh(), 1)).unwrap();
    let k = f.kernel();
    assert_eq!(k.object.invariants(), inv(1, &[]));
    // The inclusion is multiplication by 3 up to a unit.
    let (_, normal) = zh().unit_normal(k.map.matrix().get(0, 0));
    assert_eq!(normal, Elem::int(3));
}

#[test]
fn ill_formed_morphism_rejected() {
    let r = Morphism::new(cyc(zh(), 3), Module::free(zh(), 1), Matrix::identity(zh(), 1));
    assert!(matches!(r, Err(Error::IllFormedMorphism(_))));
    let r = Morphism::new(cyc(zh(), 3), cyc(zh(), 3), Matrix::identity(zh(), 2));
    assert!(matches!(r, Err(Error::IllFormedMorphism(_))));
}

#[test]
fn pullback_examples() {
    let m = cyc(zh(), 5).direct_sum(&Module::free(zh(), 1));
    let id = Morphism::identity(&m);
    let pb = pullback(&id, &id).unwrap();
    assert!(pb.object.is_isomorphic(&m));
    assert!(pb.proj1.is_iso() && pb.proj2.is_iso());

    // {(x, y) : x ≡ y mod 3} is spanned by (1,1) and (0,3): free of rank 2.
    let oracle = Module::new(Matrix::from_i64(zh(), 2, 2, &[1, 0, 1, 3])).invariants();
    assert_eq!(oracle, inv(0, &[3]));
    let epi = Morphism::new(Module::free(zh(), 1), cyc(zh(), 3), Matrix::identity(zh(), 1)).unwrap();
    let pb = pullback(&epi, &epi).unwrap();
    assert_eq!(pb.object.invariants(), inv(2, &[]));
    assert!(pb.proj1.is_epi() && pb.proj2.is_epi());

    let n = Module::free(zh(), 2);
    let g = Morphism::new(n.clone(), m.clone(), Matrix::from_i64(zh(), 2, 2, &[1, 0, 0, 0])).unwrap();
    let z = Morphism::zero(&Module::zero(zh()), &m);
    let pb = pullback(&z, &g).unwrap();
    assert!(pb.object.is_isomorphic(&g.kernel().object));

    let other = Morphism::identity(&n);
    assert_eq!(pullback(&g, &other).unwrap_err(), Error::TargetMismatch);
}

#[test]
fn hom_examples() {
    assert_eq!(hom_to_omega(&Module::free(zh(), 1)).module.invariants(), inv(1, &[]));
    assert_eq!(hom_to_omega(&cyc(zh(), 3)).module.generators(), 0);
    assert_eq!(hom_to_omega(&Module::free(zh(), 2)).module.invariants(), inv(2, &[]));
    let f = Module::free(zh(), 3);
    let h = hom_to_omega(&f);
    assert!(hom_to_omega(&h.module).module.is_isomorphic(&f));
}

#[test]
fn ext_examples() {
    let m = cyc(zh(), 3);
    assert_eq!(ext(&m, 1).invariants(), inv(0, &[3]));
    assert!(ext(&m, 0).is_zero());
    let a = Module::free(zh(), 1);
    assert_eq!(ext(&a, 0).invariants(), inv(1, &[]));
    assert!(ext(&a, 1).is_zero());
    assert!(ext(&a, 2).is_zero());
    assert!(ext(&m, 2).is_zero());
}

#[test]
fn primary_examples() {
    let parts = primary_decompose(&cyc(zh(), 15)).unwrap();
    let got: Vec<(u64, CokernelInvariants)> = parts.iter().map(|p| (p.prime, p.local.invariants())).collect();
    assert_eq!(got, vec![(3, inv(0, &[3])), (5, inv(0, &[5]))]);

    let parts = primary_decompose(&cyc(zh(), 9)).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!((parts[0].prime, parts[0].local.invariants()), (3, inv(0, &[9])));

    let m = cyc(zh(), 3).direct_sum(&cyc(zh(), 5)).direct_sum(&cyc(zh(), 9));
    // Invariant-factor oracle: 3 | 45 is the chain, so 3-part is (3, 9), 5-part is (5).
    assert_eq!(m.invariants(), inv(0, &[3, 45]));
    let parts = primary_decompose(&m).unwrap();
    let got: Vec<(u64, CokernelInvariants)> = parts.iter().map(|p| (p.prime, p.local.invariants())).collect();
    assert_eq!(got, vec![(3, inv(0, &[3, 9])), (5, inv(0, &[5]))]);

    assert_eq!(
        primary_decompose(&Module::free(zh(), 1)).unwrap_err(),
        Error::NotFiniteLength { free_rank: 1 }
    );
}

#[test]
fn zero_module_round_trips_json() {
    let z = Module::zero(zh());
    let s = serde_json::to_string(&z).unwrap();
    assert_eq!(s, r#"{"ring":"z-half","generators":0,"relations":{"rows":0,"cols":0,"entries":[]}}"#);
    assert_eq!(serde_json::from_str::<Module>(&s).unwrap(), z);
    let m = cyc(Ring::local_at(3).unwrap(), 9);
    let back: Module = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

fn rings() -> Vec<Ring> {
    vec![Ring::rationals(), Ring::prime_field(5).unwrap(), zh(), Ring::local_at(3).unwrap()]
}

/// A random well-defined morphism: the source relations are pulled back
/// from the target relations through F, plus extra random relations that F
/// kills modulo the target.
fn morphism() -> impl Strategy<Value = Morphism> {
    (0usize..4, 0usize..4, 0usize..4, 0usize..3, 0usize..3).prop_flat_map(|(ri, gm, gn, qn, qm)| {
        let ring = rings()[ri];
        (
            prop::collection::vec(-6i64..7, gn * qn),
            prop::collection::vec(-4i64..5, gn * gm),
            prop::collection::vec(-4i64..5, 9),
        )
            .prop_map(move |(rn, f, mix)| {
                let rel_n = Matrix::from_i64(ring, gn, qn, &rn);
                let fm = Matrix::from_i64(ring, gn, gm, &f);
                let n = Module::new(rel_n.clone());
                // Relations of M: a basis of the preimage of span(rel_n), mixed.
                let pre = devissage::linalg::kernel_basis(&fm.hstack(&rel_n.neg()));
                let pre_top = pre.submatrix(0..gm, 0..pre.cols());
                let rel_m = if pre_top.cols() == 0 || qm == 0 {
                    Matrix::zeros(ring, gm, 0)
                } else {
                    let mixm = Matrix::from_fn(ring, pre_top.cols(), qm, |i, j| ring.int(mix[(i * qm + j) % 9] + (i == j) as i64));
                    pre_top.mul(&mixm)
                };
                Morphism::new(Module::new(rel_m), n, fm).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn exactness_of_subquotients(f in morphism()) {
        let k = f.kernel();
        let (epi, im) = f.onto_image();
        let c = f.cokernel();
        prop_assert!(f.after(&k.map).is_zero());
        prop_assert!(k.map.is_mono());
        prop_assert!(epi.is_epi());
        prop_assert!(im.map.is_mono());
        prop_assert!(im.map.after(&epi).equals(&f));
        prop_assert!(c.map.after(&f).is_zero());
        prop_assert!(c.map.is_epi());
        // Rank and order bookkeeping on 0 -> ker -> M -> im -> 0 and im -> N -> coker -> 0.
        let (si, ki, ii, ti, ci) = (
            f.source().invariants(),
            k.object.invariants(),
            im.object.invariants(),
            f.target().invariants(),
            c.object.invariants(),
        );
        prop_assert_eq!(si.free_rank, ki.free_rank + ii.free_rank);
        prop_assert_eq!(ti.free_rank, ii.free_rank + ci.free_rank);
        if si.free_rank == 0 {
            prop_assert_eq!(order(&si), order(&ki) * order(&ii));
        }
        if ti.free_rank == 0 {
            prop_assert_eq!(order(&ti), order(&ii) * order(&ci));
        }
    }

    #[test]
    fn kernel_is_maximal(f in morphism(), v in prop::collection::vec(-5i64..6, 4)) {
        let ring = f.ring();
        let gm = f.source().generators();
        let x = Matrix::from_fn(ring, gm, 1, |i, _| ring.int(v[i]));
        if f.target().kills(&f.matrix().mul(&x)) {
            let k = f.kernel();
            let sys = k.map.matrix().hstack(f.source().relations());
            prop_assert!(solve_linear(&sys, &x).unwrap().is_some());
        }
    }

    #[test]
    fn pullback_square_commutes_and_epi_pulls_back(f in morphism(), extra in 0usize..3, w in prop::collection::vec(-4i64..5, 12)) {
        let ring = f.ring();
        let n = f.target().clone();
        let gn = n.generators();
        // An epi onto N: identity on its generators plus random extra columns.
        let e = Matrix::identity(ring, gn).hstack(&Matrix::from_fn(ring, gn, extra, |i, j| ring.int(w[(i * 3 + j) % 12])));
        let epi = Morphism::new(Module::free(ring, gn + extra), n, e).unwrap();
        let pb = pullback(&epi, &f).unwrap();
        prop_assert!(epi.after(&pb.proj1).equals(&f.after(&pb.proj2)));
        prop_assert!(pb.proj2.is_epi());
    }

    #[test]
    fn minimize_is_an_isomorphism(f in morphism()) {
        let m = f.target();
        let min = m.minimize();
        prop_assert!(min.from_min.after(&min.to_min).equals(&Morphism::identity(m)));
        prop_assert!(min.to_min.after(&min.from_min).equals(&Morphism::identity(&min.module)));
        prop_assert_eq!(min.module.invariants(), m.invariants());
    }

    #[test]
    fn hom_ext_long_sequence_bookkeeping(f in morphism()) {
        // 0 -> ker f -> M -> im f -> 0.
        let (m1, m, m2) = (f.kernel().object, f.source().clone(), f.image().object);
        let h = |x: &Module| hom_to_omega(x).module.invariants().free_rank;
        prop_assert_eq!(h(&m2) + h(&m1), h(&m));
        for x in [&m1, &m, &m2] {
            prop_assert_eq!(ext(x, 1).invariants().free_rank, 0);
            prop_assert_eq!(ext(x, 0).invariants().free_rank, h(x));
            prop_assert!(ext(x, 2).is_zero());
        }
        if m.is_finite_length() {
            let o = |x: &Module| order(&ext(x, 1).invariants());
            prop_assert_eq!(o(&m), o(&m1) * o(&m2));
        }
    }

    #[test]
    fn hom_is_contravariant(f in morphism()) {
        let g = f.cokernel().map;
        let (hm, hn, hc) = (hom_to_omega(f.source()), hom_to_omega(f.target()), hom_to_omega(&g.target().clone()));
        let hf = hom_to_omega_map(&f, &hm, &hn);
        let hg = hom_to_omega_map(&g, &hn, &hc);
        let composite = hom_to_omega_map(&g.after(&f), &hm, &hc);
        prop_assert!(hf.after(&hg).equals(&composite));
    }

    #[test]
    fn primary_parts_split_the_module(a in prop::collection::vec(1i64..80, 1..4)) {
        let ring = zh();
        let mut m = Module::zero(ring);
        for &x in &a {
            m = m.direct_sum(&cyc(ring, 2 * x + 1));
        }
        let parts = primary_decompose(&m).unwrap();
        let total: BigInt = parts.iter().map(|p| order(&p.local.invariants())).product();
        prop_assert_eq!(total, order(&m.invariants()));
        let ann = m.invariants().factors.last().map(|f| f.numer()).unwrap_or_else(BigInt::one);
        let sum: BigInt = parts.iter().map(|p| p.idempotent.numer()).sum();
        prop_assert_eq!((sum - BigInt::one()) % &ann, BigInt::from(0));
        for p in &parts {
            let e = p.idempotent.numer();
            prop_assert_eq!((&e * &e - &e) % &ann, BigInt::from(0));
        }
    }
}
