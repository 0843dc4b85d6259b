use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve_linear, Matrix};
use crate::modules::{primary_decompose, Morphism};
use crate::resolution::Resolution;
use crate::rings::{big_mod, factor_integer, mod_pow, valuation_big, Elem, Ring, RingKind};

use super::forms::ModuleForm;
use super::object::{in_a, AObject};

mod elem_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rings::Elem;

    pub fn serialize<S: Serializer>(x: &Elem, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Elem, D::Error> {
        let s = String::deserialize(d)?;
        Elem::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad element {s}")))
    }
}

/// `1` or `-1` by Euler's criterion; `0` when `p | x`.
pub fn legendre(x: &BigInt, p: u64) -> i8 {
    let r = big_mod(x, p);
    if r == 0 {
        0
    } else if mod_pow(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn least_nonresidue(p: u64) -> u64 {
    (2..p).find(|&a| legendre(&BigInt::from(a), p) == -1).expect("odd primes have nonresidues")
}

/// `x` read in `F_p`; `x` must be a `p`-adic unit.
fn residue(x: &BigRational, p: u64) -> BigInt {
    let pb = BigInt::from(p);
    let den = x.denom().mod_floor(&pb);
    let inv = den.extended_gcd(&pb).x.mod_floor(&pb);
    (x.numer() * inv).mod_floor(&pb)
}

/// Canonical representative of the square class of a nonzero field
/// element: `1` or the least nonresidue over `F_p`, the squarefree integer
/// over `ℚ`.
pub fn square_class(ring: Ring, x: &Elem) -> Result<Elem> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    match ring.kind() {
        RingKind::PrimeField(p) => {
            let l = legendre(&residue(&x.to_big(), p), p);
            Ok(if l == 1 { ring.one() } else { ring.int(least_nonresidue(p) as i64) })
        }
        RingKind::RationalField => {
            let n = x.numer() * x.denom();
            let mut out = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
            for (q, e) in factor_integer(&n.abs()) {
                if e % 2 == 1 {
                    out *= q;
                }
            }
            Ok(Elem::from_big(BigRational::from_integer(out)))
        }
        _ => Err(Error::UnsupportedRing(format!("square classes need a field, not {}", ring.descriptor()))),
    }
}

fn determinant(m: &Matrix) -> Elem {
    let ring = m.ring();
    let n = m.rows();
    let mut a = m.clone();
    let mut det = ring.one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a.get(r, c).is_zero()) else { return ring.zero() };
        if piv != c {
            for j in 0..n {
                let (x, y) = (a.get(c, j).clone(), a.get(piv, j).clone());
                a.set(c, j, y);
                a.set(piv, j, x);
            }
            det = ring.neg(&det);
        }
        let pv = a.get(c, c).clone();
        det = ring.mul(&det, &pv);
        let inv = ring.inv(&pv).expect("fields invert nonzero pivots");
        for r in c + 1..n {
            let f = ring.mul(a.get(r, c), &inv);
            if f.is_zero() {
                continue;
            }
            for j in c..n {
                let v = ring.sub(a.get(r, j), &ring.mul(&f, a.get(c, j)));
                a.set(r, j, v);
            }
        }
    }
    det
}

/// Gram matrix `b(e_i, e_j)` of a form over a field on a basis of `M`.
pub fn gram_matrix(f: &ModuleForm) -> Result<Matrix> {
    if f.d() != 0 {
        return Err(Error::UnsupportedRing(format!("gram matrices need d = 0, not {}", f.ring().descriptor())));
    }
    let (m, _) = f.minimal()?;
    Ok(m.phi.matrix().mul(m.object.resolution.augmentation.matrix()))
}

/// Rank parity and signed discriminant `(-1)^{r(r-1)/2} det` of a form over
/// a field; the discriminant of a skew form is the square class of its
/// determinant, always `1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldInvariants {
    pub rank: usize,
    pub rank_parity: usize,
    #[serde(with = "elem_string")]
    pub determinant: Elem,
    #[serde(with = "elem_string")]
    pub discriminant: Elem,
}

impl FieldInvariants {
    /// Over `F_p` the pair classifies Witt classes; over `ℚ` it is only a
    /// necessary condition.
    pub fn is_zero_class(&self) -> bool {
        self.rank_parity == 0 && self.discriminant.is_one()
    }
}

pub fn witt_invariants_d0(f: &ModuleForm) -> Result<FieldInvariants> {
    let ring = f.ring();
    if !ring.is_field() {
        return Err(Error::UnsupportedRing(format!("d = 0 invariants need a field, not {}", ring.descriptor())));
    }
    let g = gram_matrix(f)?;
    let r = g.rows();
    let det = if r == 0 { ring.one() } else { determinant(&g) };
    let determinant = square_class(ring, &det)?;
    let signed = if f.epsilon == 1 && (r * (r.saturating_sub(1)) / 2) % 2 == 1 { ring.neg(&det) } else { det };
    Ok(FieldInvariants { rank: r, rank_parity: r % 2, determinant, discriminant: square_class(ring, &signed)? })
}

/// One level of the Jordan splitting of a `p`-primary linking form:
/// `rank` copies of `A/p^level`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JordanBlock {
    pub prime: u64,
    pub level: u32,
    pub rank: usize,
    pub skew: bool,
    /// Legendre symbol of the product of the unit parts `p^level b(x, x)`;
    /// `0` for skew blocks.
    pub det_legendre: i8,
}

/// `b(x, y) = xᵀ G y ∈ Frac(A)/A` on the generators of the minimal
/// presentation `coker D`: with `Φ = φ ε` the lift `P_0 -> P_1^*`,
/// `G = Φᵀ D^{-1}` over `ℚ`.
pub fn linking_matrix(f: &ModuleForm) -> Result<Matrix> {
    if f.d() != 1 {
        return Err(Error::UnsupportedRing(format!("linking forms need d = 1, not {}", f.ring().descriptor())));
    }
    let inv = f.object.module.invariants();
    if inv.free_rank > 0 {
        return Err(Error::NotFiniteLength { free_rank: inv.free_rank });
    }
    let (m, _) = f.minimal()?;
    let q = Ring::rationals();
    let res = &m.object.resolution;
    let phi = m.phi.matrix().mul(res.augmentation.matrix()).over(q)?;
    let d = res.complex.d(1).over(q)?;
    let n = d.rows();
    let dinv = solve_linear(&d, &Matrix::identity(q, n))?.expect("finite length makes D invertible over ℚ");
    Ok(phi.transpose().mul(&dinv))
}

fn valuation(x: &BigRational, p: u64) -> Option<i64> {
    (!x.is_zero()).then(|| valuation_big(x.numer(), p) as i64 - valuation_big(x.denom(), p) as i64)
}

/// Valuation when negative, i.e. when `x` is nonzero in `Frac/A₍p₎`.
fn polar(x: &BigRational, p: u64) -> Option<i64> {
    valuation(x, p).filter(|&v| v < 0)
}

/// Replace `x_l` by `x_l - c x_i` in a bilinear Gram matrix.
fn reduce_against(g: &mut [Vec<BigRational>], l: usize, i: usize, c: &BigRational) {
    if c.is_zero() {
        return;
    }
    let n = g.len();
    for b in 0..n {
        let t = &g[i][b] * c;
        g[l][b] -= t;
    }
    for a in 0..n {
        let t = &g[a][i] * c;
        g[a][l] -= t;
    }
}

/// Replace `x_i` by `x_i + x_j`.
fn add_into(g: &mut [Vec<BigRational>], i: usize, j: usize) {
    reduce_against(g, i, j, &-BigRational::one());
}

/// Jordan splitting of the `p`-part by pivoting on entries of least
/// valuation; `2` is a unit, so an off-diagonal pivot of a symmetric form
/// becomes diagonal after `x_i += x_j`.
fn jordan_at(gram: &Matrix, p: u64) -> Result<Vec<JordanBlock>> {
    let n = gram.rows();
    let mut g: Vec<Vec<BigRational>> = (0..n).map(|i| (0..n).map(|j| gram.get(i, j).to_big()).collect()).collect();
    let sym = (0..n).all(|i| (0..n).all(|j| polar(&(&g[i][j] - &g[j][i]), p).is_none()));
    let skew = (0..n).all(|i| (0..n).all(|j| polar(&(&g[i][j] + &g[j][i]), p).is_none()));
    if !sym && !skew {
        return Err(Error::IllFormedMorphism(format!("linking form at {p} is neither symmetric nor skew")));
    }
    let skew = skew && !sym;
    let mut active = vec![true; n];
    let mut levels: BTreeMap<u32, (usize, i8)> = BTreeMap::new();
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (0..n).filter(|&j| active[j]) {
                if let Some(v) = polar(&g[i][j], p) {
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        let k = (-v) as u32;
        if skew {
            for l in (0..n).filter(|&l| active[l] && l != i && l != j) {
                let beta = &g[l][i] / &g[j][i];
                let alpha = &g[l][j] / &g[i][j];
                reduce_against(&mut g, l, i, &alpha);
                reduce_against(&mut g, l, j, &beta);
            }
            active[i] = false;
            active[j] = false;
            let e = levels.entry(k).or_insert((0, 0));
            e.0 += 2;
        } else {
            if i != j {
                add_into(&mut g, i, j);
            }
            for l in (0..n).filter(|&l| active[l] && l != i) {
                let c = &g[l][i] / &g[i][i];
                reduce_against(&mut g, l, i, &c);
            }
            active[i] = false;
            let unit = &g[i][i] * BigRational::from_integer(BigInt::from(p).pow(k));
            let l = legendre(&residue(&unit, p), p);
            let e = levels.entry(k).or_insert((0, 1));
            e.0 += 1;
            e.1 *= l;
        }
    }
    Ok(levels
        .into_iter()
        .map(|(level, (rank, det))| JordanBlock { prime: p, level, rank, skew, det_legendre: if skew { 0 } else { det } })
        .collect())
}

/// Primes dividing the annihilator of a finite-length module.
fn support_primes(f: &ModuleForm) -> Result<Vec<u64>> {
    let ring = f.ring();
    let inv = f.object.module.invariants();
    if inv.free_rank > 0 {
        return Err(Error::NotFiniteLength { free_rank: inv.free_rank });
    }
    let Some(ann) = inv.factors.last() else { return Ok(vec![]) };
    match ring.kind() {
        RingKind::LocalIntegersAt(p) => Ok(vec![p]),
        RingKind::IntegersTwoInverted => Ok(factor_integer(&ann.numer().abs())
            .into_iter()
            .map(|(q, _)| q.to_u64().expect("generator entries are small"))
            .filter(|&q| q != 2)
            .collect()),
        _ => Err(Error::UnsupportedRing(ring.descriptor())),
    }
}

/// Jordan invariants at every prime of the support, sorted.
pub fn jordan_invariants(f: &ModuleForm) -> Result<Vec<JordanBlock>> {
    let g = linking_matrix(f)?;
    let mut out = Vec::new();
    for p in support_primes(f)? {
        out.extend(jordan_at(&g, p)?);
    }
    out.sort();
    Ok(out)
}

/// Complete isometry invariants for the supported rings: `(rank, det)`
/// over a field (complete over `F_p`), Jordan data for linking forms at
/// odd primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IsometryInvariants {
    Field { rank: usize, #[serde(with = "elem_string")] determinant: Elem },
    Torsion { blocks: Vec<JordanBlock> },
}

pub fn isometry_invariants(f: &ModuleForm) -> Result<IsometryInvariants> {
    if f.d() == 0 {
        let w = witt_invariants_d0(f)?;
        Ok(IsometryInvariants::Field { rank: w.rank, determinant: w.determinant })
    } else {
        Ok(IsometryInvariants::Torsion { blocks: jordan_invariants(f)? })
    }
}

/// Residue-field class of the `p`-part: the odd levels combined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalWittClass {
    pub prime: u64,
    pub rank_parity: usize,
    /// Legendre symbol of `(-1)^{r(r-1)/2} det`.
    pub discriminant: i8,
}

impl LocalWittClass {
    pub fn is_zero(&self) -> bool {
        self.rank_parity == 0 && self.discriminant == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WittClass {
    Field(FieldInvariants),
    /// Nonzero local components only.
    Torsion { components: Vec<LocalWittClass> },
}

impl WittClass {
    pub fn is_zero(&self) -> bool {
        match self {
            WittClass::Field(f) => f.is_zero_class(),
            WittClass::Torsion { components } => components.is_empty(),
        }
    }
}

/// Even levels carry the lagrangian `p^{k/2} M`, and skew forms are
/// neutral, so only odd symmetric levels contribute.
pub fn local_witt_classes(blocks: &[JordanBlock]) -> Vec<LocalWittClass> {
    let mut per: BTreeMap<u64, (usize, i8)> = BTreeMap::new();
    for b in blocks.iter().filter(|b| !b.skew && b.level % 2 == 1) {
        let e = per.entry(b.prime).or_insert((0, 1));
        e.0 += b.rank;
        e.1 *= b.det_legendre;
    }
    per.into_iter()
        .map(|(p, (r, det))| {
            let minus_one = legendre(&BigInt::from(-1), p);
            let s = if (r * r.saturating_sub(1) / 2) % 2 == 1 { minus_one } else { 1 };
            LocalWittClass { prime: p, rank_parity: r % 2, discriminant: s * det }
        })
        .filter(|c| !c.is_zero())
        .collect()
}

pub fn witt_class(f: &ModuleForm) -> Result<WittClass> {
    if f.d() == 0 {
        Ok(WittClass::Field(witt_invariants_d0(f)?))
    } else {
        Ok(WittClass::Torsion { components: local_witt_classes(&jordan_invariants(f)?) })
    }
}

/// The `p`-part of a form over ℤ[1/2] as a form over ℤ₍p₎.
#[derive(Clone, Debug)]
pub struct LocalPart {
    pub prime: u64,
    /// Multiplication by this integer projects `M` onto its `p`-part.
    pub idempotent: Elem,
    pub form: ModuleForm,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub parts: Vec<LocalPart>,
    /// `e_p e_q φ = 0` for `p ≠ q`.
    pub orthogonal: bool,
    /// `Σ e_p = 1` on `M`.
    pub complete: bool,
    /// The dual of the localized object is the localized dual.
    pub localization_commutes: bool,
    /// Jordan data of `f` is the union of the parts' Jordan data.
    pub invariants_match: bool,
}

impl Decomposition {
    pub fn verified(&self) -> bool {
        self.orthogonal && self.complete && self.localization_commutes && self.invariants_match
    }
}

/// Orthogonal splitting `f ≅ ⊥ₚ f₍p₎` by the Chinese remainder idempotents.
pub fn decompose_form(f: &ModuleForm) -> Result<Decomposition> {
    let ring = f.ring();
    let primary = primary_decompose(&f.object.module)?;
    let m = &f.object.module;
    let res = &f.object.resolution;
    let dual = f.object.dual();
    let mut parts = Vec::new();
    let mut localization_commutes = true;
    for part in &primary {
        let local = Ring::local_at(part.prime)?;
        let m_loc = m.extend_scalars(local)?;
        let lres = Resolution::new(m_loc.clone(), res.complex.extend_scalars(local)?, res.augmentation.matrix().over(local)?)?;
        let obj = AObject::with_resolution(lres)?;
        let dual_loc = dual.module.extend_scalars(local)?;
        localization_commutes &= obj.dual().module == dual_loc && obj.dual().module.invariants() == dual_loc.invariants();
        let phi = Morphism::new(m_loc, obj.dual().module, f.phi.matrix().over(local)?)?;
        let loc_form = ModuleForm { object: obj, phi, epsilon: f.epsilon, convention: f.convention };
        let min = loc_form.object.module.minimize();
        let target = in_a(&min.module).map_err(|_| Error::HomologyNotInA { degree: 0 })?;
        let form = loc_form.transport(&min.from_min, &target)?;
        parts.push(LocalPart { prime: part.prime, idempotent: part.idempotent.clone(), form });
    }
    let mut orthogonal = true;
    for (a, pa) in parts.iter().enumerate() {
        for pb in parts.iter().skip(a + 1) {
            let e = ring.mul(&pa.idempotent, &pb.idempotent);
            orthogonal &= f.phi.scale(&e).is_zero();
        }
    }
    let total = parts.iter().fold(ring.zero(), |acc, p| ring.add(&acc, &p.idempotent));
    let id = Morphism::identity(m);
    let complete = parts.is_empty() && m.is_zero() || id.scale(&total).equals(&id);
    let mut joined = Vec::new();
    for p in &parts {
        joined.extend(jordan_invariants(&p.form)?);
    }
    joined.sort();
    let invariants_match = joined == jordan_invariants(f)?;
    Ok(Decomposition { parts, orthogonal, complete, localization_commutes, invariants_match })
}
