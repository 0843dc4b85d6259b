//! Seeded instance generators. Trial `t` of a run with seed `s` draws from
//! ChaCha stream `t` of key `s`, so trials are independent of scheduling.

use std::collections::BTreeMap;

use devissage::complexes::{ChainMap, Complex, ModuleComplex};
use devissage::linalg::kernel_basis;
use devissage::modules::{Module, Morphism};
use devissage::resolution::resolve_module;
use devissage::witt::{hyperbolic, hyperbolic_complex, in_a, zeta_form, AObject, ComplexForm, Convention, ModuleForm};
use devissage::{Matrix, Result, Ring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Caps, Kind, Suite};
use crate::instance::{FormJson, Instance, LagrangianJson, ModuleComplexJson, ObjectJson};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

/// `(U, U^{-1})` for a product of elementary matrices.
pub fn unimodular(ring: Ring, n: usize, r: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let (mut u, mut v) = (Matrix::identity(ring, n), Matrix::identity(ring, n));
    if n < 2 {
        return (u, v);
    }
    for _ in 0..3 * n {
        let i = r.gen_range(0..n);
        let j = (i + r.gen_range(1..n)) % n;
        let c = r.gen_range(-2..=2);
        let (mut e, mut e_inv) = (Matrix::identity(ring, n), Matrix::identity(ring, n));
        e.set(i, j, ring.int(c));
        e_inv.set(i, j, ring.int(-c));
        u = e.mul(&u);
        v = v.mul(&e_inv);
    }
    (u, v)
}

/// Nonunits of bounded size, or nonzero residues over a field.
fn nonunits(ring: Ring, caps: &Caps) -> Vec<i64> {
    let pool: Vec<i64> = match (ring.is_field(), ring.prime()) {
        (true, p) => (1..p.unwrap_or(7) as i64).collect(),
        (false, Some(p)) => {
            let p = p as i64;
            vec![p, p * p, 2 * p, p * p * p]
        }
        (false, None) => vec![3, 5, 7, 9, 15, 25, 27, 45],
    };
    let kept: Vec<i64> = pool.iter().copied().filter(|e| *e <= caps.max_entry).collect();
    if kept.is_empty() {
        vec![pool[0]]
    } else {
        kept
    }
}

fn entry(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> i64 {
    let pool = nonunits(ring, caps);
    pool[r.gen_range(0..pool.len())]
}

fn diagonal(ring: Ring, v: &[i64]) -> Matrix {
    Matrix::from_fn(ring, v.len(), v.len(), |i, j| if i == j { ring.int(v[i]) } else { ring.zero() })
}

fn conjugate(c: &Complex, r: &mut ChaCha8Rng) -> (Complex, BTreeMap<i64, Matrix>) {
    let ring = c.ring();
    let (lo, hi) = c.bounds();
    let mut u = BTreeMap::new();
    let mut u_inv = BTreeMap::new();
    for k in lo..=hi {
        let (a, b) = unimodular(ring, c.rank(k), r);
        u.insert(k, a);
        u_inv.insert(k, b);
    }
    let ranks = (lo..=hi).map(|k| c.rank(k)).collect();
    let diffs = (lo + 1..=hi).map(|k| u[&(k - 1)].mul(&c.d(k)).mul(&u_inv[&k])).collect();
    let out = Complex::new(ring, lo, ranks, diffs).expect("conjugation preserves ∂∂ = 0");
    (out, u_inv)
}

/// A module presented by `U D V`; unit entries make some generators vanish.
pub fn module(ring: Ring, caps: &Caps, torsion_only: bool, r: &mut ChaCha8Rng) -> Module {
    let g = r.gen_range(1..=caps.max_rank.min(4));
    let free = if torsion_only || ring.is_field() { 0 } else { r.gen_range(0..=1) };
    let cols = g - free.min(g);
    let mut d = Matrix::zeros(ring, g, cols);
    for i in 0..cols {
        let e = if r.gen_bool(0.25) { 1 } else { entry(ring, caps, r) };
        d.set(i, i, ring.int(if ring.is_field() { 0 } else { e }));
    }
    let (u, _) = unimodular(ring, g, r);
    let (v, _) = unimodular(ring, cols, r);
    Module::new(u.mul(&d).mul(&v))
}

/// A nonzero module of `𝒜`: a vector space over a field, finite length otherwise.
pub fn nonzero_a_module(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Module {
    if ring.is_field() {
        return Module::free(ring, r.gen_range(1..=caps.max_rank.min(2)));
    }
    Module::cyclic(ring, &ring.int(entry(ring, caps, r)))
}

/// A random element of `Hom(M, N)` from a basis of the solutions of
/// `F R_M = R_N Y`.
pub fn morphism(m: &Module, n: &Module, r: &mut ChaCha8Rng) -> Morphism {
    let ring = m.ring();
    let (gm, gn) = (m.generators(), n.generators());
    let (rm, rn) = (m.relations(), n.relations());
    let (qm, qn) = (rm.cols(), rn.cols());
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
    Morphism::new(m.clone(), n.clone(), f).expect("solutions of the relation system are well defined")
}

/// Sums of `[A^k -D-> A^k]` with `D` nonsingular diagonal (and free pieces
/// over fields) in degrees `[lo, lo + width)`, conjugated.
pub fn a_complex(ring: Ring, caps: &Caps, lo: i64, r: &mut ChaCha8Rng) -> Complex {
    let width = caps.max_width.min(4);
    let mut c = Complex::zero(ring);
    let mut load: BTreeMap<i64, usize> = BTreeMap::new();
    for _ in 0..r.gen_range(1..=width + 1) {
        let deg = lo + r.gen_range(0..width) as i64;
        let k = r.gen_range(1..=caps.max_rank.min(2));
        let top = load.get(&(deg + 1)).copied().unwrap_or(0);
        if load.get(&deg).copied().unwrap_or(0).max(top) + k > caps.max_rank {
            continue;
        }
        if ring.is_field() && r.gen_bool(0.3) {
            *load.entry(deg).or_default() += k;
            c = c.direct_sum(&Complex::concentrated(ring, deg, k));
        } else {
            *load.entry(deg).or_default() += k;
            *load.entry(deg + 1).or_default() += k;
            let v: Vec<i64> = (0..k).map(|_| if r.gen_bool(0.2) { 1 } else { entry(ring, caps, r) }).collect();
            c = c.direct_sum(&Complex::two_term(deg, diagonal(ring, &v)));
        }
    }
    conjugate(&c, r).0
}

/// A random chain map from a basis of the solutions of `∂f = f∂`.
pub fn chain_map(e: &Complex, f: &Complex, r: &mut ChaCha8Rng) -> ChainMap {
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
            let prev = e.rank(k - 1);
            for i in 0..m {
                for j in 0..c {
                    for t in 0..prev {
                        let v = ring.sub(sys.get(row + i * c + j, o + i * prev + t), de.get(t, j));
                        sys.set(row + i * c + j, o + i * prev + t, v);
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
    ChainMap::new(e.clone(), f.clone(), comps).expect("kernel vectors solve the chain map equations")
}

/// `QᵀΔQ` with `Δ` diagonal, or a sum of `[[0, a], [-a, 0]]` when skew.
pub fn gram(ring: Ring, caps: &Caps, n: usize, skew: bool, r: &mut ChaCha8Rng) -> Matrix {
    let n = if skew { n + n % 2 } else { n };
    let mut delta = Matrix::zeros(ring, n, n);
    let pick = |r: &mut ChaCha8Rng| {
        let e = if ring.is_field() || r.gen_bool(0.8) { entry(ring, caps, r) } else { 1 };
        ring.int(if r.gen_bool(0.5) { e } else { -e })
    };
    if skew {
        for k in 0..n / 2 {
            let a = pick(r);
            delta.set(2 * k, 2 * k + 1, a.clone());
            delta.set(2 * k + 1, 2 * k, ring.neg(&a));
        }
    } else {
        for k in 0..n {
            delta.set(k, k, pick(r));
        }
    }
    let (q, _) = unimodular(ring, n, r);
    q.transpose().mul(&delta).mul(&q)
}

/// Over a field the form `S` on `A^n`; for `d = 1` the identity
/// `coker S -> (coker S)^∨` on the resolution `[S]`.
pub fn form_from_gram(s: &Matrix, epsilon: i64) -> Result<ModuleForm> {
    let ring = s.ring();
    let n = s.rows();
    if ring.d() == 0 {
        let obj = in_a(&Module::free(ring, n)).map_err(|e| devissage::Error::Parse(e.to_string()))?;
        return ModuleForm::new(obj, s.clone(), epsilon, Convention::Unsigned);
    }
    let m = Module::new(s.clone());
    let res = devissage::resolution::Resolution::new(m, Complex::two_term(0, s.clone()), Matrix::identity(ring, n))?;
    ModuleForm::new(AObject::with_resolution(res)?, Matrix::identity(ring, n), epsilon, Convention::Unsigned)
}

pub fn module_form(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Result<ModuleForm> {
    let skew = r.gen_bool(0.3);
    let n = r.gen_range(1..=caps.max_rank.min(4));
    form_from_gram(&gram(ring, caps, n, skew, r), if skew { -1 } else { 1 })
}

/// `f` pulled back along `π U^{-1}: U(P ⊕ C)U^{-1} -> P`, with `C` a sum of
/// contractible `[A^k -I-> A^k]` kept inside a window of width
/// `min(2d + 4, max_width)` starting at `-2`.
pub fn conjugate_and_pad(f: &ComplexForm, caps: &Caps, r: &mut ChaCha8Rng) -> (ComplexForm, ChainMap) {
    let ring = f.ring();
    let d = ring.d() as i64;
    let p = &f.complex;
    let width = (2 * d + 4).min(caps.max_width as i64).max(2);
    let (lo, hi) = (-2, -2 + width - 1);
    let mut c = Complex::zero(ring);
    for _ in 0..r.gen_range(0..=3) {
        let deg = r.gen_range(lo..hi);
        let k = r.gen_range(1..=caps.max_rank.min(2));
        c = c.direct_sum(&Complex::two_term(deg, Matrix::identity(ring, k)));
    }
    let padded = p.direct_sum(&c);
    let (conj, u_inv) = conjugate(&padded, r);
    let (clo, chi) = conj.bounds();
    let comps = (clo..=chi)
        .map(|k| {
            let pi = Matrix::identity(ring, p.rank(k)).hstack(&Matrix::zeros(ring, p.rank(k), c.rank(k)));
            (k, pi.mul(&u_inv[&k]))
        })
        .collect();
    let q = ChainMap::new(conj, p.clone(), comps).expect("projection off a contractible summand is a chain map");
    (f.pullback(&q), q)
}

pub fn complex_form(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Result<(ModuleForm, ComplexForm, ChainMap)> {
    let seed = module_form(ring, caps, r)?;
    let z = zeta_form(&seed)?;
    let (form, q) = conjugate_and_pad(&z, caps, r);
    Ok((seed, form, q))
}

/// `ζ(seed) ⊥ H(T^n ζ(N))` for `n ∈ {1, 2}` and nonzero `N`, conjugated and padded.
pub fn spread_form(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Result<(ModuleForm, ComplexForm)> {
    let seed = module_form(ring, caps, r)?;
    let z = zeta_form(&seed)?;
    let n = r.gen_range(1..=2);
    let p = resolve_module(&nonzero_a_module(ring, caps, r)).complex.translate(n, false);
    let (h, _) = hyperbolic_complex(&p, seed.epsilon)?;
    let (form, _) = conjugate_and_pad(&z.orthogonal_sum(&h)?, caps, r);
    Ok((seed, form))
}

pub fn neutral_form(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Result<Instance> {
    let m = if ring.d() == 1 { module(ring, caps, true, r) } else { nonzero_a_module(ring, caps, r) };
    let x = in_a(&m).map_err(|e| devissage::Error::Parse(e.to_string()))?;
    let eps = if r.gen_bool(0.5) { 1 } else { -1 };
    let (h, w) = hyperbolic(&x, eps)?;
    Ok(Instance::NeutralForm {
        form: FormJson::from_form(&h),
        lagrangian: LagrangianJson { sub: ObjectJson::from_object(&w.sub), alpha: w.alpha.matrix().to_json() },
    })
}

/// `C / nC` for a random free complex `C`: degreewise finite length when `n` is a nonunit.
pub fn module_complex(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> ModuleComplex {
    let c = a_complex(ring, caps, 0, r);
    let n = if ring.is_field() { 0 } else { entry(ring, caps, r) };
    let (lo, hi) = c.bounds();
    let objects: Vec<Module> = (lo..=hi)
        .map(|k| {
            if n == 0 {
                Module::free(ring, c.rank(k))
            } else {
                Module::new(Matrix::scalar(ring, c.rank(k), &ring.int(n)))
            }
        })
        .collect();
    let diffs = (lo + 1..=hi)
        .map(|k| {
            let (s, t) = (objects[(k - lo) as usize].clone(), objects[(k - lo - 1) as usize].clone());
            Morphism::new(s, t, c.d(k)).expect("∂ preserves nC")
        })
        .collect();
    ModuleComplex::new(ring, lo, objects, diffs).expect("reductions of a complex are complexes")
}

fn diagonal_form(ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Vec<i64> {
    let p = ring.prime().unwrap_or(5) as i64;
    (0..r.gen_range(0..=caps.max_rank.min(4))).map(|_| r.gen_range(1..p)).collect()
}

pub fn generate(kind: Kind, ring: Ring, caps: &Caps, r: &mut ChaCha8Rng) -> Result<Instance> {
    Ok(match kind {
        Kind::Module => Instance::Module { module: module(ring, caps, ring.d() == 1, r) },
        Kind::Morphism => {
            let (m, n) = (module(ring, caps, false, r), module(ring, caps, false, r));
            let g = morphism(&m, &n, r);
            Instance::Morphism { source: m, target: n, matrix: g.matrix().to_json() }
        }
        Kind::ComplexInA => Instance::ComplexInA { complex: a_complex(ring, caps, -1, r).to_json(), target: None, map: None },
        Kind::ModuleForm => Instance::ModuleForm { form: FormJson::from_form(&module_form(ring, caps, r)?) },
        Kind::ComplexForm => {
            let (seed, form, q) = complex_form(ring, caps, r)?;
            Instance::ComplexForm { seed: FormJson::from_form(&seed), form: form.to_json(), quasi_iso: q.to_json() }
        }
        Kind::NeutralForm => neutral_form(ring, caps, r)?,
    })
}

/// The instance a suite checks at one trial.
pub fn suite_instance(suite: Suite, ring: Ring, caps: &Caps, trial: u64, r: &mut ChaCha8Rng) -> Result<Instance> {
    Ok(match suite {
        Suite::Duality => {
            let e = a_complex(ring, caps, -1, r);
            // Every other trial also carries a chain map for naturality.
            if trial % 2 == 0 {
                let f = a_complex(ring, caps, -1, r);
                let g = chain_map(&e, &f, r);
                Instance::ComplexInA { complex: e.to_json(), target: Some(f.to_json()), map: Some(g.to_json()) }
            } else {
                Instance::ComplexInA { complex: e.to_json(), target: None, map: None }
            }
        }
        Suite::ExtBoundary => generate(Kind::ComplexInA, ring, caps, r)?,
        Suite::ZetaFunctoriality => {
            let torsion = ring.d() == 1 && r.gen_bool(0.7);
            let m = module(ring, caps, torsion, r);
            let n = module(ring, caps, torsion, r);
            let l = module(ring, caps, torsion, r);
            let (g0, g1) = (morphism(&m, &n, r), morphism(&n, &l, r));
            Instance::MorphismPair { m, n, l, g0: g0.matrix().to_json(), g1: g1.matrix().to_json() }
        }
        Suite::WittMap => generate(Kind::NeutralForm, ring, caps, r)?,
        Suite::Devissage => generate(Kind::ComplexForm, ring, caps, r)?,
        Suite::DevissageSpread => {
            let (seed, form) = spread_form(ring, caps, r)?;
            Instance::SpreadForm { seed: FormJson::from_form(&seed), form: form.to_json() }
        }
        Suite::Decomposition => generate(Kind::ModuleForm, ring, caps, r)?,
        Suite::WittBase => Instance::DiagonalPair { ring, left: diagonal_form(ring, caps, r), right: diagonal_form(ring, caps, r) },
        Suite::Membership => Instance::ModuleComplex { ring, complex: ModuleComplexJson::from_complex(&module_complex(ring, caps, r)) },
    })
}
