//! Test-local instance builders, independent of the library's generators.
#![allow(dead_code)]

use std::collections::BTreeMap;

use devissage::complexes::{ChainMap, Complex};
use devissage::linalg::kernel_basis;
use devissage::{Matrix, Ring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Product of random elementary matrices: invertible over every ring.
pub fn unimodular(ring: Ring, n: usize, r: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::identity(ring, n);
    if n < 2 {
        return m;
    }
    for _ in 0..3 * n {
        let i = r.gen_range(0..n);
        let j = (i + r.gen_range(1..n)) % n;
        let mut e = Matrix::identity(ring, n);
        e.set(i, j, ring.int(r.gen_range(-2..=2)));
        m = e.mul(&m);
    }
    m
}

/// Inverse of a unimodular matrix via the solver.
pub fn inverse(m: &Matrix) -> Matrix {
    devissage::linalg::solve_linear(m, &Matrix::identity(m.ring(), m.rows())).unwrap().unwrap()
}

/// Entries that are nonunits often enough to give torsion homology.
pub fn torsion_entry(ring: Ring, r: &mut ChaCha8Rng) -> i64 {
    let pool: &[i64] = match ring.prime() {
        Some(3) => &[3, 9, 1, 6, 0],
        Some(5) => &[5, 25, 1, 10, 0],
        _ => &[3, 5, 9, 15, 1, 0, 7],
    };
    pool[r.gen_range(0..pool.len())]
}

/// Direct sum of shifted blocks `[A^k -D-> A^k]` and free pieces in
/// `[lo, lo + width)`, then conjugated by random basis changes.
pub fn random_complex(ring: Ring, lo: i64, width: usize, max_rank: usize, r: &mut ChaCha8Rng) -> Complex {
    let mut c = Complex::zero(ring);
    let blocks = r.gen_range(1..=width.max(1) + 1);
    for _ in 0..blocks {
        let deg = lo + r.gen_range(0..width.max(1)) as i64;
        let k = r.gen_range(1..=max_rank.clamp(1, 2));
        if r.gen_bool(0.25) || deg == lo + width as i64 - 1 {
            c = c.direct_sum(&Complex::concentrated(ring, deg, k));
        } else {
            let d = Matrix::from_fn(ring, k, k, |i, j| if i == j { ring.int(torsion_entry(ring, r)) } else { ring.zero() });
            c = c.direct_sum(&Complex::two_term(deg, d));
        }
    }
    conjugate(&c, r)
}

pub fn conjugate(c: &Complex, r: &mut ChaCha8Rng) -> Complex {
    let ring = c.ring();
    let (lo, hi) = c.bounds();
    let p: BTreeMap<i64, Matrix> = (lo..=hi).map(|k| (k, unimodular(ring, c.rank(k), r))).collect();
    let ranks = (lo..=hi).map(|k| c.rank(k)).collect();
    let diffs = (lo + 1..=hi).map(|k| p[&(k - 1)].mul(&c.d(k)).mul(&inverse(&p[&k]))).collect();
    Complex::new(ring, lo, ranks, diffs).unwrap()
}

/// Random chain map: a random combination of a basis of the solution
/// space of `∂f = f∂`.
pub fn random_chain_map(e: &Complex, f: &Complex, r: &mut ChaCha8Rng) -> ChainMap {
    let ring = e.ring();
    let (lo, hi) = e.bounds();
    let mut offs = BTreeMap::new();
    let mut n = 0;
    for k in lo..=hi {
        offs.insert(k, n);
        n += f.rank(k) * e.rank(k);
    }
    let eqs: usize = (lo..=hi + 1).map(|k| f.rank(k - 1) * e.rank(k)).sum();
    let mut sys = Matrix::zeros(ring, eqs, n);
    let mut row = 0;
    for k in lo..=hi + 1 {
        let (m, c) = (f.rank(k - 1), e.rank(k));
        // ∂^F_k f_k - f_{k-1} ∂^E_k, entries (i, j), f blocks row-major.
        if let Some(&o) = offs.get(&k) {
            let df = f.d(k);
            for i in 0..m {
                for j in 0..c {
                    for t in 0..f.rank(k) {
                        let v = ring.add(sys.get(row + i * c + j, o + t * c + j), df.get(i, t));
                        sys.set(row + i * c + j, o + t * c + j, v);
                    }
                }
            }
        }
        if let Some(&o) = offs.get(&(k - 1)) {
            let de = e.d(k);
            let cols_prev = e.rank(k - 1);
            for i in 0..m {
                for j in 0..c {
                    for t in 0..cols_prev {
                        let v = ring.sub(sys.get(row + i * c + j, o + i * cols_prev + t), de.get(t, j));
                        sys.set(row + i * c + j, o + i * cols_prev + t, v);
                    }
                }
            }
        }
        row += m * c;
    }
    let basis = kernel_basis(&sys);
    let coeffs = Matrix::from_fn(ring, basis.cols(), 1, |_, _| ring.int(r.gen_range(-2..=2)));
    let x = basis.mul(&coeffs);
    let comps = (lo..=hi)
        .map(|k| {
            let o = offs[&k];
            (k, Matrix::from_fn(ring, f.rank(k), e.rank(k), |i, j| x.get(o + i * e.rank(k) + j, 0).clone()))
        })
        .collect();
    ChainMap::new(e.clone(), f.clone(), comps).unwrap()
}

pub fn test_rings() -> Vec<Ring> {
    vec![
        Ring::two_inverted(),
        Ring::local_at(3).unwrap(),
        Ring::prime_field(5).unwrap(),
        Ring::rationals(),
    ]
}

/// Dense oracle: all homotopy components solved as one linear system
/// `∂_{r+1} h_r + h_{r-1} ∂_r = φ_r`, unknowns vectorized column-major.
pub fn dense_null_homotopy(phi: &ChainMap) -> Option<devissage::complexes::Homotopy> {
    let ring = phi.ring();
    let (e, t) = (phi.source(), phi.target());
    let (lo, hi) = e.bounds();
    let mut offsets = BTreeMap::new();
    let mut n_unknowns = 0usize;
    for r in lo..=hi {
        offsets.insert(r, n_unknowns);
        n_unknowns += t.rank(r + 1) * e.rank(r);
    }
    let n_eq: usize = (lo..=hi).map(|r| t.rank(r) * e.rank(r)).sum();
    let mut sys = Matrix::zeros(ring, n_eq, n_unknowns);
    let mut rhs = Matrix::zeros(ring, n_eq, 1);
    let mut row0 = 0usize;
    for r in lo..=hi {
        let (m, n) = (t.rank(r), e.rank(r));
        let pr = phi.at(r);
        for j in 0..n {
            for i in 0..m {
                rhs.set(row0 + j * m + i, 0, pr.get(i, j).clone());
            }
        }
        let p = t.rank(r + 1);
        let dt = t.d(r + 1);
        for j in 0..n {
            for i in 0..m {
                for k in 0..p {
                    let idx = (row0 + j * m + i, offsets[&r] + j * p + k);
                    let v = ring.add(sys.get(idx.0, idx.1), dt.get(i, k));
                    sys.set(idx.0, idx.1, v);
                }
            }
        }
        if r > lo {
            let q = e.rank(r - 1);
            let de = e.d(r);
            for j in 0..n {
                for i in 0..m {
                    for k in 0..q {
                        let idx = (row0 + j * m + i, offsets[&(r - 1)] + k * m + i);
                        let v = ring.add(sys.get(idx.0, idx.1), de.get(k, j));
                        sys.set(idx.0, idx.1, v);
                    }
                }
            }
        }
        row0 += m * n;
    }
    let x = devissage::linalg::solve_linear(&sys, &rhs).unwrap()?;
    let comps: BTreeMap<i64, Matrix> = (lo..=hi)
        .map(|r| {
            let (p, n) = (t.rank(r + 1), e.rank(r));
            let off = offsets[&r];
            (r, Matrix::from_fn(ring, p, n, |i, j| x.get(off + j * p + i, 0).clone()))
        })
        .collect();
    Some(devissage::complexes::Homotopy::new(e, t, &comps).unwrap())
}

/// Finite-length or mixed module: random relations conjugated on both sides.
pub fn random_module(ring: Ring, max_gens: usize, torsion_only: bool, r: &mut ChaCha8Rng) -> devissage::modules::Module {
    let g = r.gen_range(1..=max_gens.max(1));
    let free = if torsion_only || ring.is_field() { 0 } else { r.gen_range(0..=1.min(g)) };
    let cols = g - free;
    let mut d = Matrix::zeros(ring, g, cols);
    for i in 0..cols {
        let e = match torsion_entry(ring, r) {
            0 => 1,
            e => e,
        };
        d.set(i, i, ring.int(e));
    }
    let rel = unimodular(ring, g, r).mul(&d).mul(&unimodular(ring, cols, r));
    devissage::modules::Module::new(rel)
}

/// Random element of `Hom(M, N)`: a combination of a basis of the solutions
/// of `F R_M = R_N Y`.
pub fn random_morphism(
    m: &devissage::modules::Module,
    n: &devissage::modules::Module,
    r: &mut ChaCha8Rng,
) -> devissage::modules::Morphism {
    let ring = m.ring();
    let (gm, gn) = (m.generators(), n.generators());
    let (rm, rn) = (m.relations(), n.relations());
    let (qm, qn) = (rm.cols(), rn.cols());
    // Unknowns: F (gn x gm) column-major, then Y (qn x qm) column-major.
    let nf = gn * gm;
    let mut sys = Matrix::zeros(ring, gn * qm, nf + qn * qm);
    for j in 0..qm {
        for i in 0..gn {
            let row = j * gn + i;
            for t in 0..gm {
                sys.set(row, t * gn + i, rm.get(t, j).clone());
            }
            for t in 0..qn {
                sys.set(row, nf + j * qn + t, ring.neg(rn.get(i, t)));
            }
        }
    }
    let basis = kernel_basis(&sys);
    let coeffs = Matrix::from_fn(ring, basis.cols(), 1, |_, _| ring.int(r.gen_range(-2..=2)));
    let x = basis.mul(&coeffs);
    let f = Matrix::from_fn(ring, gn, gm, |i, j| x.get(j * gn + i, 0).clone());
    devissage::modules::Morphism::new(m.clone(), n.clone(), f).unwrap()
}

/// Nonzero diagonal entry: a nonunit most of the time, over fields a
/// random nonzero residue.
pub fn form_entry(ring: Ring, r: &mut ChaCha8Rng) -> i64 {
    if ring.is_field() {
        let p = ring.prime().unwrap_or(7) as i64;
        return r.gen_range(1..p.min(7));
    }
    let pool: &[i64] = match ring.prime() {
        Some(3) => &[3, 9, 6, 1, 27, 2],
        _ => &[3, 5, 9, 15, 7, 1, 25],
    };
    pool[r.gen_range(0..pool.len())] * if r.gen_bool(0.5) { 1 } else { -1 }
}

/// `S = QᵀΔQ` with `Δ` diagonal (symmetric) or a sum of `[[0, a], [-a, 0]]`
/// (skew); `n` is rounded up to even for skew forms.
pub fn random_gram(ring: Ring, n: usize, skew: bool, r: &mut ChaCha8Rng) -> Matrix {
    let n = if skew { n + n % 2 } else { n };
    let mut delta = Matrix::zeros(ring, n, n);
    if skew {
        for k in 0..n / 2 {
            let a = ring.int(form_entry(ring, r));
            delta.set(2 * k, 2 * k + 1, a.clone());
            delta.set(2 * k + 1, 2 * k, ring.neg(&a));
        }
    } else {
        for k in 0..n {
            delta.set(k, k, ring.int(form_entry(ring, r)));
        }
    }
    let q = unimodular(ring, n, r);
    q.transpose().mul(&delta).mul(&q)
}

/// Module form from a nonsingular `S` with `Sᵀ = εS`: over a field the form
/// `S` on `A^n`; for `d = 1` the identity on `coker S` presented by `[S]`.
pub fn form_from_gram(s: &Matrix, epsilon: i64) -> devissage::witt::ModuleForm {
    use devissage::resolution::Resolution;
    use devissage::witt::{in_a, AObject, Convention, ModuleForm};
    let ring = s.ring();
    let n = s.rows();
    if ring.d() == 0 {
        let obj = in_a(&devissage::modules::Module::free(ring, n)).unwrap();
        ModuleForm::new(obj, s.clone(), epsilon, Convention::Unsigned).unwrap()
    } else {
        let m = devissage::modules::Module::new(s.clone());
        let res = Resolution::new(m, Complex::two_term(0, s.clone()), Matrix::identity(ring, n)).unwrap();
        let obj = AObject::with_resolution(res).unwrap();
        ModuleForm::new(obj, Matrix::identity(ring, n), epsilon, Convention::Unsigned).unwrap()
    }
}

pub fn random_module_form(ring: Ring, max_rank: usize, r: &mut ChaCha8Rng) -> devissage::witt::ModuleForm {
    let skew = r.gen_bool(0.3);
    let n = r.gen_range(1..=max_rank.max(1));
    form_from_gram(&random_gram(ring, n, skew, r), if skew { -1 } else { 1 })
}

/// Complex whose homology is of finite length when `d = 1`: sums of
/// `[A^k -D-> A^k]` with `D` nonsingular diagonal, conjugated. Over fields
/// free pieces are allowed.
pub fn random_a_complex(ring: Ring, lo: i64, width: usize, max_rank: usize, r: &mut ChaCha8Rng) -> Complex {
    let mut c = Complex::zero(ring);
    let blocks = r.gen_range(1..=width.max(1) + 1);
    for _ in 0..blocks {
        let deg = lo + r.gen_range(0..width.max(1)) as i64;
        let k = r.gen_range(1..=max_rank.clamp(1, 2));
        if ring.is_field() && r.gen_bool(0.3) {
            c = c.direct_sum(&Complex::concentrated(ring, deg, k));
        } else {
            let d = Matrix::from_fn(ring, k, k, |i, j| {
                if i != j {
                    return ring.zero();
                }
                match torsion_entry(ring, r) {
                    0 => ring.one(),
                    e => ring.int(e),
                }
            });
            c = c.direct_sum(&Complex::two_term(deg, d));
        }
    }
    conjugate(&c, r)
}
