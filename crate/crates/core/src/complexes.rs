//! Bounded chain complexes of free modules, chain maps, homotopies, and
//! complexes of presented modules.
//!
//! Degree conventions: `∂_r: E_r -> E_{r-1}`; `(T^n E)_r = E_{r-n}`, with
//! the signed translation multiplying differentials by `(-1)^n`;
//! `(E^#)_r = (E_{-r})^*` with `∂^#_r = (∂_{1-r})ᵀ`. Under these conventions
//! `E^## = E` on the nose and the evaluation map has identity components.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::error::{Error, Result};
use crate::linalg::{cokernel_invariants, rank, smith_normal_form, solve_linear, CokernelInvariants, Matrix, MatrixJson};
use crate::modules::{Module, Morphism};
use crate::rings::{Elem, Ring};

/// Free complex stored densely over `[lo, lo + ranks.len())`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Complex {
    ring: Ring,
    lo: i64,
    ranks: Vec<usize>,
    /// `diffs[i] = ∂_{lo+i+1}`.
    diffs: Vec<Matrix>,
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 { 1 } else { -1 }
}

impl Complex {
    /// `diffs[i]` is `∂_{lo+i+1}: E_{lo+i+1} -> E_{lo+i}`; validates shapes
    /// and `∂∂ = 0`. Zero ranks at either end are trimmed.
    pub fn new(ring: Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Complex> {
        if ranks.is_empty() {
            if !diffs.is_empty() {
                return Err(Error::ShapeMismatch("differentials given for an empty support".into()));
            }
            return Ok(Complex::zero(ring));
        }
        if diffs.len() + 1 != ranks.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} degrees need {} differentials, got {}",
                ranks.len(),
                ranks.len() - 1,
                diffs.len()
            )));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.shape() != (ranks[i], ranks[i + 1]) {
                return Err(Error::ShapeMismatch(format!(
                    "differential in degree {} is {}x{}, expected {}x{}",
                    lo + i as i64 + 1,
                    d.rows(),
                    d.cols(),
                    ranks[i],
                    ranks[i + 1]
                )));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i].mul(&diffs[i + 1]).is_zero() {
                let lower = lo + i as i64 + 1;
                return Err(Error::NotAComplex { upper: lower + 1, lower });
            }
        }
        let diffs = diffs.into_iter().map(|d| d.over(ring)).collect::<Result<Vec<_>>>()?;
        Ok(Complex { ring, lo, ranks, diffs }.trimmed())
    }

    pub(crate) fn new_unchecked(ring: Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Complex {
        debug_assert_eq!(diffs.len() + 1, ranks.len().max(1));
        Complex { ring, lo, ranks, diffs }.trimmed()
    }

    /// Builds from a differential lookup over `[lo, hi]`.
    pub(crate) fn from_fn(ring: Ring, lo: i64, hi: i64, rank: impl Fn(i64) -> usize, d: impl Fn(i64) -> Matrix) -> Complex {
        if hi < lo {
            return Complex::zero(ring);
        }
        let ranks: Vec<usize> = (lo..=hi).map(&rank).collect();
        let diffs = (lo + 1..=hi).map(d).collect();
        Complex::new_unchecked(ring, lo, ranks, diffs)
    }

    fn trimmed(mut self) -> Complex {
        while self.ranks.last() == Some(&0) {
            self.ranks.pop();
            self.diffs.pop();
        }
        let lead = self.ranks.iter().take_while(|&&r| r == 0).count();
        if lead == self.ranks.len() {
            return Complex::zero(self.ring);
        }
        if lead > 0 {
            self.ranks.drain(..lead);
            self.diffs.drain(..lead);
            self.lo += lead as i64;
        }
        self
    }

    pub fn zero(ring: Ring) -> Complex {
        Complex { ring, lo: 0, ranks: vec![], diffs: vec![] }
    }

    /// `A^rank` placed in a single degree.
    pub fn concentrated(ring: Ring, degree: i64, rank: usize) -> Complex {
        Complex::new_unchecked(ring, degree, vec![rank], vec![])
    }

    /// `A^{cols} -∂-> A^{rows}` in degrees `degree+1, degree`.
    pub fn two_term(degree: i64, d: Matrix) -> Complex {
        let ring = d.ring();
        Complex::new_unchecked(ring, degree, vec![d.rows(), d.cols()], vec![d])
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// `[lo, hi]`, or `None` for the zero complex.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.ranks.is_empty() { None } else { Some((self.lo, self.lo + self.ranks.len() as i64 - 1)) }
    }

    pub fn is_zero_complex(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Support bounds with an empty range `(0, -1)` for the zero complex.
    pub fn bounds(&self) -> (i64, i64) {
        self.support().unwrap_or((0, -1))
    }

    pub fn rank(&self, r: i64) -> usize {
        if r < self.lo {
            return 0;
        }
        self.ranks.get((r - self.lo) as usize).copied().unwrap_or(0)
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// `∂_r`, zero outside the support.
    pub fn d(&self, r: i64) -> Matrix {
        let i = r - self.lo - 1;
        if i >= 0 && (i as usize) < self.diffs.len() {
            self.diffs[i as usize].clone()
        } else {
            Matrix::zeros(self.ring, self.rank(r - 1), self.rank(r))
        }
    }

    pub fn d_ref(&self, r: i64) -> Option<&Matrix> {
        let i = r - self.lo - 1;
        if i >= 0 { self.diffs.get(i as usize) } else { None }
    }

    pub fn direct_sum(&self, other: &Complex) -> Complex {
        let (a, b) = (self.bounds(), other.bounds());
        let lo = a.0.min(b.0);
        let hi = a.1.max(b.1);
        if self.is_zero_complex() {
            return other.clone();
        }
        if other.is_zero_complex() {
            return self.clone();
        }
        Complex::from_fn(self.ring, lo, hi, |r| self.rank(r) + other.rank(r), |r| self.d(r).block_diag(&other.d(r)))
    }

    /// `(T^n E)_r = E_{r-n}`; the signed variant scales every differential
    /// by `(-1)^n`.
    pub fn translate(&self, n: i64, signed: bool) -> Complex {
        if self.is_zero_complex() {
            return self.clone();
        }
        let s = if signed { sign(n) } else { 1 };
        let c = self.ring.int(s);
        Complex {
            ring: self.ring,
            lo: self.lo + n,
            ranks: self.ranks.clone(),
            diffs: self.diffs.iter().map(|d| if s == 1 { d.clone() } else { d.scale(&c) }).collect(),
        }
    }

    /// The same differentials read over `ring` (localization).
    pub fn extend_scalars(&self, ring: Ring) -> Result<Complex> {
        let diffs = self.diffs.iter().map(|d| d.over(ring)).collect::<Result<Vec<_>>>()?;
        Ok(Complex { ring, lo: self.lo, ranks: self.ranks.clone(), diffs })
    }

    /// `(E^#)_r = (E_{-r})^*`, `∂^#_r = (∂_{1-r})ᵀ`.
    pub fn dual(&self) -> Complex {
        let Some((lo, hi)) = self.support() else { return self.clone() };
        Complex::from_fn(self.ring, -hi, -lo, |r| self.rank(-r), |r| self.d(1 - r).transpose())
    }

    /// Invariants of `H_r` from the Smith forms of `∂_r` and `∂_{r+1}`:
    /// cycles are a direct summand, so the torsion of `H_r` is the nonunit
    /// part of `∂_{r+1}`.
    pub fn homology_invariants(&self, r: i64) -> CokernelInvariants {
        let n = self.rank(r);
        if n == 0 {
            return CokernelInvariants { free_rank: 0, factors: vec![] };
        }
        let rk_out = self.d_ref(r).map_or(0, rank);
        match self.d_ref(r + 1) {
            Some(up) => {
                let c = cokernel_invariants(up);
                CokernelInvariants { free_rank: c.free_rank - rk_out, factors: c.factors }
            }
            None => CokernelInvariants { free_rank: n - rk_out, factors: vec![] },
        }
    }

    pub fn is_exact(&self) -> bool {
        let (lo, hi) = self.bounds();
        (lo..=hi).all(|r| self.homology_invariants(r).is_zero())
    }

    /// Boundaries, cycles and homology in degree `r`.
    pub fn homology(&self, r: i64) -> HomologyData {
        let ring = self.ring;
        let cycles = crate::linalg::kernel_basis(&self.d(r));
        let up = self.d(r + 1);
        let boundaries = if up.cols() == 0 || up.is_zero() {
            Matrix::zeros(ring, self.rank(r), 0)
        } else {
            crate::linalg::image_basis(&up)
        };
        let rel = solve_linear(&cycles, &boundaries).expect("shapes agree").expect("boundaries are cycles");
        let module = Module::new(rel);
        let invariants = module.invariants();
        HomologyData { degree: r, boundaries, cycles, module, invariants }
    }

    /// Degrees with nonzero homology.
    pub fn homology_window(&self) -> Option<(i64, i64)> {
        let (lo, hi) = self.bounds();
        let nz: Vec<i64> = (lo..=hi).filter(|&r| !self.homology_invariants(r).is_zero()).collect();
        Some((*nz.first()?, *nz.last()?))
    }

    /// `s` with `∂s + s∂ = 1`, built degreewise from the bottom; `None`
    /// when the complex is not split exact.
    pub fn contraction(&self) -> Option<Homotopy> {
        let ring = self.ring;
        let (lo, hi) = self.bounds();
        let mut comps: Vec<Matrix> = Vec::new();
        for r in lo..=hi {
            let n = self.rank(r);
            let prev = if r > lo {
                comps.last().unwrap().mul(&self.d(r))
            } else {
                Matrix::zeros(ring, n, n)
            };
            let rhs = Matrix::identity(ring, n).sub(&prev);
            let s = solve_linear(&self.d(r + 1), &rhs).ok()??;
            comps.push(s);
        }
        Some(Homotopy { source: self.clone(), target: self.clone(), lo, comps })
    }
}

/// `B_r ⊆ Z_r ⊆ E_r` as column bases and `H_r = Z_r / B_r` presented on the
/// cycle basis.
#[derive(Clone, Debug)]
pub struct HomologyData {
    pub degree: i64,
    pub boundaries: Matrix,
    pub cycles: Matrix,
    pub module: Module,
    pub invariants: CokernelInvariants,
}

/// Degree keys are JSON strings; they parse back inside buffered (tagged) input too.
#[serde_as]
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub ring: Ring,
    pub support: Option<(i64, i64)>,
    #[serde_as(as = "BTreeMap<DisplayFromStr, _>")]
    pub ranks: BTreeMap<i64, usize>,
    #[serde_as(as = "BTreeMap<DisplayFromStr, _>")]
    pub differentials: BTreeMap<i64, MatrixJson>,
}

impl Complex {
    pub fn to_json(&self) -> ComplexJson {
        let (lo, hi) = self.bounds();
        ComplexJson {
            ring: self.ring,
            support: self.support(),
            ranks: (lo..=hi).map(|r| (r, self.rank(r))).collect(),
            differentials: (lo + 1..=hi).map(|r| (r, self.d(r).to_json())).collect(),
        }
    }

    pub fn from_json(j: &ComplexJson) -> Result<Complex> {
        let Some((lo, hi)) = j.support else { return Ok(Complex::zero(j.ring)) };
        if hi < lo {
            return Err(Error::ShapeMismatch("support interval is reversed".into()));
        }
        let ranks: Vec<usize> = (lo..=hi).map(|r| j.ranks.get(&r).copied().unwrap_or(0)).collect();
        let mut diffs = Vec::new();
        for r in lo + 1..=hi {
            let d = match j.differentials.get(&r) {
                Some(m) => Matrix::from_json(j.ring, m)?,
                None => Matrix::zeros(j.ring, ranks[(r - 1 - lo) as usize], ranks[(r - lo) as usize]),
            };
            diffs.push(d);
        }
        Complex::new(j.ring, lo, ranks, diffs)
    }
}

impl Serialize for Complex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Complex, D::Error> {
        let j = ComplexJson::deserialize(d)?;
        Complex::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Degree-preserving map; `comps[i] = f_{lo+i}` over the source support.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainMap {
    source: Complex,
    target: Complex,
    lo: i64,
    comps: Vec<Matrix>,
}

impl ChainMap {
    /// Validates shapes and `∂f = f∂`.
    pub fn new(source: Complex, target: Complex, comps: BTreeMap<i64, Matrix>) -> Result<ChainMap> {
        let (lo, hi) = source.bounds();
        let mut v = Vec::new();
        for r in lo..=hi {
            let m = match comps.get(&r) {
                Some(m) => m.over(source.ring())?,
                None => Matrix::zeros(source.ring(), target.rank(r), source.rank(r)),
            };
            if m.shape() != (target.rank(r), source.rank(r)) {
                return Err(Error::ShapeMismatch(format!("component in degree {r} has the wrong shape")));
            }
            v.push(m);
        }
        if let Some(r) = comps.keys().find(|&&r| r < lo || r > hi) {
            if !comps[r].is_zero() {
                return Err(Error::ShapeMismatch(format!("component in degree {r} lies outside the source support")));
            }
        }
        let f = ChainMap { source, target, lo, comps: v };
        if let Some(r) = f.first_noncommuting_degree() {
            return Err(Error::IllFormedMorphism(format!("chain map fails to commute with the differential in degree {r}")));
        }
        Ok(f)
    }

    pub(crate) fn from_fn(source: &Complex, target: &Complex, f: impl Fn(i64) -> Matrix) -> ChainMap {
        let (lo, hi) = source.bounds();
        let comps: Vec<Matrix> = (lo..=hi).map(f).collect();
        for (i, c) in comps.iter().enumerate() {
            debug_assert_eq!(c.shape(), (target.rank(lo + i as i64), source.rank(lo + i as i64)), "degree {}", lo + i as i64);
        }
        ChainMap { source: source.clone(), target: target.clone(), lo, comps }
    }

    fn first_noncommuting_degree(&self) -> Option<i64> {
        let (lo, hi) = self.source.bounds();
        (lo..=hi + 1).find(|&r| self.target.d(r).mul(&self.at(r)) != self.at(r - 1).mul(&self.source.d(r)))
    }

    pub fn is_chain_map(&self) -> bool {
        self.first_noncommuting_degree().is_none()
    }

    pub fn identity(c: &Complex) -> ChainMap {
        ChainMap::from_fn(c, c, |r| Matrix::identity(c.ring(), c.rank(r)))
    }

    pub fn zero(source: &Complex, target: &Complex) -> ChainMap {
        ChainMap::from_fn(source, target, |r| Matrix::zeros(source.ring(), target.rank(r), source.rank(r)))
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    pub fn ring(&self) -> Ring {
        self.source.ring()
    }

    /// `f_r`, zero outside the source support.
    pub fn at(&self, r: i64) -> Matrix {
        let i = r - self.lo;
        if i >= 0 && (i as usize) < self.comps.len() {
            self.comps[i as usize].clone()
        } else {
            Matrix::zeros(self.ring(), self.target.rank(r), self.source.rank(r))
        }
    }

    pub fn components(&self) -> BTreeMap<i64, Matrix> {
        self.comps.iter().enumerate().map(|(i, m)| (self.lo + i as i64, m.clone())).collect()
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &ChainMap) -> ChainMap {
        ChainMap::from_fn(&f.source, &self.target, |r| self.at(r).mul(&f.at(r)))
    }

    pub fn add(&self, other: &ChainMap) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |r| self.at(r).add(&other.at(r)))
    }

    pub fn sub(&self, other: &ChainMap) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |r| self.at(r).sub(&other.at(r)))
    }

    pub fn neg(&self) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |r| self.at(r).neg())
    }

    pub fn scale(&self, c: &Elem) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |r| self.at(r).scale(c))
    }

    /// `f^#: F^# -> E^#`, `(f^#)_r = (f_{-r})ᵀ`.
    pub fn dual(&self) -> ChainMap {
        let (s, t) = (self.target.dual(), self.source.dual());
        ChainMap::from_fn(&s, &t, |r| self.at(-r).transpose())
    }

    /// `T^n f`; components move with the degrees and carry no sign.
    pub fn translate(&self, n: i64, signed: bool) -> ChainMap {
        let (s, t) = (self.source.translate(n, signed), self.target.translate(n, signed));
        ChainMap::from_fn(&s, &t, |r| self.at(r - n))
    }

    pub fn direct_sum(&self, other: &ChainMap) -> ChainMap {
        let (s, t) = (self.source.direct_sum(&other.source), self.target.direct_sum(&other.target));
        ChainMap::from_fn(&s, &t, |r| self.at(r).block_diag(&other.at(r)))
    }

    /// Induced map on `H_r` between the presentations of [`Complex::homology`].
    pub fn homology_map(&self, r: i64) -> Morphism {
        let hs = self.source.homology(r);
        let ht = self.target.homology(r);
        self.homology_map_between(&hs, &ht)
    }

    pub fn homology_map_between(&self, hs: &HomologyData, ht: &HomologyData) -> Morphism {
        let img = self.at(hs.degree).mul(&hs.cycles);
        let x = solve_linear(&ht.cycles, &img).expect("shapes agree").expect("cycles map to cycles");
        Morphism::new(hs.module.clone(), ht.module.clone(), x).expect("chain maps preserve boundaries")
    }

    pub fn is_quasi_iso(&self) -> bool {
        cone(self).complex.is_exact()
    }

    /// Quasi-iso test through the induced homology maps.
    pub fn induces_homology_isos(&self) -> bool {
        let (a, b) = (self.source.bounds(), self.target.bounds());
        (a.0.min(b.0)..=a.1.max(b.1)).all(|r| self.homology_map(r).is_iso())
    }

    pub fn to_json(&self) -> ChainMapJson {
        ChainMapJson { components: self.components().into_iter().map(|(r, m)| (r, m.to_json())).collect() }
    }

    pub fn from_json(source: Complex, target: Complex, j: &ChainMapJson) -> Result<ChainMap> {
        let ring = source.ring();
        let comps = j
            .components
            .iter()
            .map(|(r, m)| Ok((*r, Matrix::from_json(ring, m)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        ChainMap::new(source, target, comps)
    }
}

#[serde_as]
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainMapJson {
    #[serde_as(as = "BTreeMap<DisplayFromStr, _>")]
    pub components: BTreeMap<i64, MatrixJson>,
}

/// `h_r: E_r -> F_{r+1}` over the source support.
#[derive(Clone, Debug)]
pub struct Homotopy {
    source: Complex,
    target: Complex,
    lo: i64,
    comps: Vec<Matrix>,
}

impl Homotopy {
    /// Components `h_r: E_r -> F_{r+1}` keyed by `r`; absent degrees are zero.
    pub fn new(source: &Complex, target: &Complex, comps: &BTreeMap<i64, Matrix>) -> Result<Homotopy> {
        let h = Homotopy::from_fn(source, target, |r| {
            comps.get(&r).cloned().unwrap_or_else(|| Matrix::zeros(source.ring(), target.rank(r + 1), source.rank(r)))
        });
        for (r, m) in comps {
            if m.shape() != (target.rank(r + 1), source.rank(*r)) {
                return Err(Error::ShapeMismatch(format!("homotopy component in degree {r} has the wrong shape")));
            }
        }
        Ok(h)
    }

    pub(crate) fn from_fn(source: &Complex, target: &Complex, h: impl Fn(i64) -> Matrix) -> Homotopy {
        let (lo, hi) = source.bounds();
        Homotopy { source: source.clone(), target: target.clone(), lo, comps: (lo..=hi).map(h).collect() }
    }

    pub fn zero(source: &Complex, target: &Complex) -> Homotopy {
        Homotopy::from_fn(source, target, |r| Matrix::zeros(source.ring(), target.rank(r + 1), source.rank(r)))
    }

    pub fn at(&self, r: i64) -> Matrix {
        let i = r - self.lo;
        if i >= 0 && (i as usize) < self.comps.len() {
            self.comps[i as usize].clone()
        } else {
            Matrix::zeros(self.source.ring(), self.target.rank(r + 1), self.source.rank(r))
        }
    }

    pub fn components(&self) -> BTreeMap<i64, Matrix> {
        self.comps.iter().enumerate().map(|(i, m)| (self.lo + i as i64, m.clone())).collect()
    }

    /// The chain map `∂h + h∂`.
    pub fn boundary(&self) -> ChainMap {
        ChainMap::from_fn(&self.source, &self.target, |r| {
            self.target.d(r + 1).mul(&self.at(r)).add(&self.at(r - 1).mul(&self.source.d(r)))
        })
    }

    /// True iff `f - g = ∂h + h∂`.
    pub fn witnesses(&self, f: &ChainMap, g: &ChainMap) -> bool {
        let b = self.boundary();
        let (lo, hi) = self.source.bounds();
        (lo..=hi).all(|r| f.at(r).sub(&g.at(r)) == b.at(r))
    }

    pub fn add(&self, other: &Homotopy) -> Homotopy {
        Homotopy::from_fn(&self.source, &self.target, |r| self.at(r).add(&other.at(r)))
    }

    pub fn neg(&self) -> Homotopy {
        Homotopy::from_fn(&self.source, &self.target, |r| self.at(r).neg())
    }

    pub fn scale(&self, c: &Elem) -> Homotopy {
        Homotopy::from_fn(&self.source, &self.target, |r| self.at(r).scale(c))
    }

    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    /// `g ∘ h`.
    pub fn post(&self, g: &ChainMap) -> Homotopy {
        Homotopy::from_fn(&self.source, g.target(), |r| g.at(r + 1).mul(&self.at(r)))
    }

    /// `h ∘ f`.
    pub fn pre(&self, f: &ChainMap) -> Homotopy {
        Homotopy::from_fn(f.source(), &self.target, |r| self.at(r).mul(&f.at(r)))
    }

    /// `h^#: F^# -> E^#` with `(h^#)_r = (h_{-r-1})ᵀ`; it witnesses
    /// `f^# - g^#` whenever `h` witnesses `f - g`.
    pub fn dual(&self) -> Homotopy {
        let (s, t) = (self.target.dual(), self.source.dual());
        Homotopy::from_fn(&s, &t, |r| self.at(-r - 1).transpose())
    }

    /// `T^n h`; the signed translation scales by `(-1)^n`.
    pub fn translate(&self, n: i64, signed: bool) -> Homotopy {
        let (s, t) = (self.source.translate(n, signed), self.target.translate(n, signed));
        let c = self.source.ring().int(if signed { sign(n) } else { 1 });
        Homotopy::from_fn(&s, &t, |r| self.at(r - n).scale(&c))
    }
}

/// Cone with its structure maps.
#[derive(Clone, Debug)]
pub struct Cone {
    pub complex: Complex,
    /// `F -> cone(f)`.
    pub inclusion: ChainMap,
    /// `cone(f) -> T_s E`.
    pub projection: ChainMap,
}

/// `cone_r = F_r ⊕ E_{r-1}` with `∂ = [[∂_F, f], [0, -∂_E]]`.
pub fn cone(f: &ChainMap) -> Cone {
    let ring = f.ring();
    let (e, fc) = (f.source(), f.target());
    let (elo, ehi) = e.bounds();
    let (flo, fhi) = fc.bounds();
    let lo = flo.min(elo + 1);
    let hi = fhi.max(ehi + 1);
    let c = Complex::from_fn(
        ring,
        lo,
        hi,
        |r| fc.rank(r) + e.rank(r - 1),
        |r| Matrix::blocks(&fc.d(r), &f.at(r - 1), &Matrix::zeros(ring, e.rank(r - 2), fc.rank(r)), &e.d(r - 1).neg()),
    );
    let inclusion = ChainMap::from_fn(fc, &c, |r| {
        Matrix::identity(ring, fc.rank(r)).vstack(&Matrix::zeros(ring, e.rank(r - 1), fc.rank(r)))
    });
    let te = e.translate(1, true);
    let projection = ChainMap::from_fn(&c, &te, |r| {
        Matrix::zeros(ring, e.rank(r - 1), fc.rank(r)).hstack(&Matrix::identity(ring, e.rank(r - 1)))
    });
    Cone { complex: c, inclusion, projection }
}

/// Some `h` with `f - g = ∂h + h∂`, decided as one linear system over all
/// components at once.
pub fn find_homotopy(f: &ChainMap, g: &ChainMap) -> Result<Option<Homotopy>> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::ShapeMismatch("homotopy needs maps with a common source and target".into()));
    }
    let phi = f.sub(g);
    null_homotopy(&phi)
}

/// Some `h` with `φ = ∂h + h∂`.
///
/// Both complexes are brought to split form, where every differential is a
/// partial matching; each equation then involves at most two unknowns and
/// each unknown at most two equations, so the system falls apart into tiny
/// independent blocks that are solved separately.
pub fn null_homotopy(phi: &ChainMap) -> Result<Option<Homotopy>> {
    let ring = phi.ring();
    let (e, t) = (phi.source(), phi.target());
    if phi.comps.iter().all(Matrix::is_zero) {
        return Ok(Some(Homotopy::zero(e, t)));
    }
    let (se, st) = (split_form(e), split_form(t));
    let (lo, hi) = e.bounds();
    let phi_s: BTreeMap<i64, Matrix> =
        (lo..=hi).map(|r| (r, st.q(r).mul(&phi.at(r)).mul(&se.q_inv(r)))).collect();
    let (es, ts) = (&se.complex, &st.complex);

    // Matchings: column k of ∂_{r+1} on the target hits row `hit[r][i] = k`;
    // column j of ∂_r on the source lands in row `down[r][j]`.
    let matching_rows = |c: &Complex, r: i64| -> Vec<Option<(usize, Elem)>> {
        let d = c.d(r + 1);
        let mut out = vec![None; c.rank(r)];
        for i in 0..d.rows() {
            for k in 0..d.cols() {
                if !d.get(i, k).is_zero() {
                    out[i] = Some((k, d.get(i, k).clone()));
                }
            }
        }
        out
    };
    let matching_cols = |c: &Complex, r: i64| -> Vec<Option<(usize, Elem)>> {
        let d = c.d(r);
        let mut out = vec![None; c.rank(r)];
        for k in 0..d.rows() {
            for j in 0..d.cols() {
                if !d.get(k, j).is_zero() {
                    out[j] = Some((k, d.get(k, j).clone()));
                }
            }
        }
        out
    };

    // Unknown (r, k, j) is entry (k, j) of h_r; equation (r, i, j) is entry
    // (i, j) of φ_r.
    let mut unknown_id: BTreeMap<(i64, usize, usize), usize> = BTreeMap::new();
    let mut equations: Vec<(Elem, Vec<(usize, Elem)>)> = Vec::new();
    for r in lo..=hi {
        let hit = matching_rows(ts, r);
        let down = matching_cols(es, r);
        for i in 0..ts.rank(r) {
            for j in 0..es.rank(r) {
                let mut terms = Vec::new();
                if let Some((k, c)) = &hit[i] {
                    let n = unknown_id.len();
                    let id = *unknown_id.entry((r, *k, j)).or_insert(n);
                    terms.push((id, c.clone()));
                }
                if let Some((k, c)) = &down[j] {
                    let n = unknown_id.len();
                    let id = *unknown_id.entry((r - 1, i, *k)).or_insert(n);
                    terms.push((id, c.clone()));
                }
                let rhs = phi_s[&r].get(i, j).clone();
                if terms.is_empty() {
                    if !rhs.is_zero() {
                        return Ok(None);
                    }
                    continue;
                }
                equations.push((rhs, terms));
            }
        }
    }

    // Connected components of the equation/unknown incidence graph.
    let n = unknown_id.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (_, terms) in &equations {
        if let [(a, _), (b, _)] = terms.as_slice() {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            parent[ra] = rb;
        }
    }
    let mut blocks: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for u in 0..n {
        let root = find(&mut parent, u);
        blocks.entry(root).or_default().0.push(u);
    }
    for (idx, (_, terms)) in equations.iter().enumerate() {
        let root = find(&mut parent, terms[0].0);
        blocks.get_mut(&root).expect("every unknown has a block").1.push(idx);
    }
    let mut value = vec![Elem::ZERO; n];
    for (unknowns, eqs) in blocks.values() {
        if eqs.iter().all(|&q| equations[q].0.is_zero()) {
            continue;
        }
        let pos: BTreeMap<usize, usize> = unknowns.iter().enumerate().map(|(p, &u)| (u, p)).collect();
        let mut sys = Matrix::zeros(ring, eqs.len(), unknowns.len());
        let mut rhs = Matrix::zeros(ring, eqs.len(), 1);
        for (row, &q) in eqs.iter().enumerate() {
            let (b, terms) = &equations[q];
            rhs.set(row, 0, b.clone());
            for (u, c) in terms {
                let col = pos[u];
                let v = ring.add(sys.get(row, col), c);
                sys.set(row, col, v);
            }
        }
        let Some(x) = solve_linear(&sys, &rhs)? else { return Ok(None) };
        for (p, &u) in unknowns.iter().enumerate() {
            value[u] = x.get(p, 0).clone();
        }
    }
    let h = Homotopy::from_fn(e, t, |r| {
        let hs = Matrix::from_fn(ring, t.rank(r + 1), e.rank(r), |k, j| {
            unknown_id.get(&(r, k, j)).map_or(Elem::ZERO, |&u| value[u].clone())
        });
        st.q_inv(r + 1).mul(&hs).mul(&se.q(r))
    });
    debug_assert!(h.witnesses(phi, &ChainMap::zero(e, t)));
    Ok(Some(h))
}

/// A complex isomorphic to `E` whose differentials are partial matchings,
/// with the degreewise basis changes `q_r` (`∂'_r = q_{r-1} ∂_r q_r^{-1}`).
#[derive(Clone, Debug)]
pub struct SplitForm {
    pub complex: Complex,
    lo: i64,
    q: Vec<Matrix>,
    q_inv: Vec<Matrix>,
}

impl SplitForm {
    pub fn q(&self, r: i64) -> Matrix {
        self.pick(&self.q, r)
    }

    pub fn q_inv(&self, r: i64) -> Matrix {
        self.pick(&self.q_inv, r)
    }

    fn pick(&self, v: &[Matrix], r: i64) -> Matrix {
        let i = r - self.lo;
        if i >= 0 && (i as usize) < v.len() {
            v[i as usize].clone()
        } else {
            Matrix::zeros(self.complex.ring(), 0, 0)
        }
    }

    /// The isomorphism `E -> E'`.
    pub fn to_split(&self, e: &Complex) -> ChainMap {
        ChainMap::from_fn(e, &self.complex, |r| self.q(r))
    }

    /// The isomorphism `E' -> E`.
    pub fn from_split(&self, e: &Complex) -> ChainMap {
        ChainMap::from_fn(&self.complex, e, |r| self.q_inv(r))
    }
}

/// Splits differentials top-down: Smith form of `∂_r` on the columns not hit
/// by `∂_{r+1}`; the row change leaves the already-split `∂_{r+1}` intact
/// because the rows it touches are zero there.
pub fn split_form(e: &Complex) -> SplitForm {
    let ring = e.ring();
    let (lo, hi) = e.bounds();
    let mut q: Vec<Matrix> = (lo..=hi).map(|r| Matrix::identity(ring, e.rank(r))).collect();
    let mut q_inv = q.clone();
    let idx = |r: i64| (r - lo) as usize;
    let mut hit: Vec<bool> = vec![false; e.rank(hi)];
    for r in (lo + 1..=hi).rev() {
        let cur = q[idx(r - 1)].mul(&e.d(r)).mul(&q_inv[idx(r)]);
        let free: Vec<usize> = (0..e.rank(r)).filter(|&j| !hit[j]).collect();
        let m = cur.select_columns(&free);
        let s = smith_normal_form(&m);
        // Rows of E_{r-1}: u. Columns `free` of E_r: v^{-1}.
        q[idx(r - 1)] = s.u.mul(&q[idx(r - 1)]);
        q_inv[idx(r - 1)] = q_inv[idx(r - 1)].mul(&s.u_inv);
        let n = e.rank(r);
        let mut emb = Matrix::identity(ring, n);
        let mut emb_inv = Matrix::identity(ring, n);
        for (a, &fa) in free.iter().enumerate() {
            for (b, &fb) in free.iter().enumerate() {
                emb.set(fa, fb, s.v_inv.get(a, b).clone());
                emb_inv.set(fa, fb, s.v.get(a, b).clone());
            }
        }
        q[idx(r)] = emb.mul(&q[idx(r)]);
        q_inv[idx(r)] = q_inv[idx(r)].mul(&emb_inv);
        hit = vec![false; e.rank(r - 1)];
        for k in 0..s.rank() {
            hit[k] = true;
        }
    }
    let complex = Complex::from_fn(ring, lo, hi, |r| e.rank(r), |r| q[idx(r - 1)].mul(&e.d(r)).mul(&q_inv[idx(r)]));
    SplitForm { complex, lo, q, q_inv }
}

pub fn are_homotopic(f: &ChainMap, g: &ChainMap) -> bool {
    matches!(find_homotopy(f, g), Ok(Some(_)))
}

/// Evaluation `E -> E^##`; identity components in the unsigned convention.
pub fn evaluation_map(c: &Complex) -> ChainMap {
    let dd = c.dual().dual();
    ChainMap::from_fn(c, &dd, |r| Matrix::identity(c.ring(), c.rank(r)))
}

/// A homotopy inverse of a quasi-isomorphism between bounded free
/// complexes, read off a contraction of its cone.
#[derive(Clone, Debug)]
pub struct HomotopyInverse {
    pub inverse: ChainMap,
    /// `τσ - 1 = ∂a + a∂` on the target.
    pub target_homotopy: Homotopy,
}

pub fn homotopy_inverse(tau: &ChainMap) -> Result<HomotopyInverse> {
    let c = cone(tau);
    let s = c.complex.contraction().ok_or(Error::NotQuasiIso)?;
    let (l, e) = (tau.source(), tau.target());
    // s_r: E_r ⊕ L_{r-1} -> E_{r+1} ⊕ L_r; σ_r is the L_r ← E_r block.
    let sigma = ChainMap::from_fn(e, l, |r| {
        let b = s.at(r);
        b.submatrix(e.rank(r + 1)..e.rank(r + 1) + l.rank(r), 0..e.rank(r))
    });
    let a = Homotopy::from_fn(e, e, |r| s.at(r).submatrix(0..e.rank(r + 1), 0..e.rank(r)).neg());
    debug_assert!(sigma.is_chain_map());
    Ok(HomotopyInverse { inverse: sigma, target_homotopy: a })
}

/// Bounded complex of presented modules.
#[derive(Clone, Debug)]
pub struct ModuleComplex {
    ring: Ring,
    lo: i64,
    objects: Vec<Module>,
    /// `diffs[i] = d_{lo+i+1}`.
    diffs: Vec<Morphism>,
}

impl ModuleComplex {
    pub fn new(ring: Ring, lo: i64, objects: Vec<Module>, diffs: Vec<Morphism>) -> Result<ModuleComplex> {
        if objects.is_empty() {
            return Ok(ModuleComplex { ring, lo, objects, diffs: vec![] });
        }
        if diffs.len() + 1 != objects.len() {
            return Err(Error::ShapeMismatch("need one differential between consecutive objects".into()));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.source() != &objects[i + 1] || d.target() != &objects[i] {
                return Err(Error::ShapeMismatch(format!("differential {} has the wrong endpoints", lo + i as i64 + 1)));
            }
        }
        for i in 0..diffs.len().saturating_sub(1) {
            if !diffs[i].after(&diffs[i + 1]).is_zero() {
                let lower = lo + i as i64 + 1;
                return Err(Error::NotAComplex { upper: lower + 1, lower });
            }
        }
        Ok(ModuleComplex { ring, lo, objects, diffs })
    }

    /// A free complex viewed as a complex of free modules.
    pub fn from_free(c: &Complex) -> ModuleComplex {
        let (lo, hi) = c.bounds();
        let objects: Vec<Module> = (lo..=hi).map(|r| Module::free(c.ring(), c.rank(r))).collect();
        let diffs = (lo + 1..=hi)
            .map(|r| Morphism::new_unchecked(objects[(r - lo) as usize].clone(), objects[(r - lo - 1) as usize].clone(), c.d(r)))
            .collect();
        ModuleComplex { ring: c.ring(), lo, objects, diffs }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.lo + self.objects.len() as i64 - 1)
    }

    pub fn object(&self, r: i64) -> Module {
        let (lo, hi) = self.bounds();
        if r < lo || r > hi { Module::zero(self.ring) } else { self.objects[(r - lo) as usize].clone() }
    }

    /// `d_r: G_r -> G_{r-1}`, zero outside the support.
    pub fn d(&self, r: i64) -> Morphism {
        let i = r - self.lo - 1;
        if i >= 0 && (i as usize) < self.diffs.len() {
            self.diffs[i as usize].clone()
        } else {
            Morphism::zero(&self.object(r), &self.object(r - 1))
        }
    }

    /// Boundaries `B_r = im d_{r+1}` with their inclusion into `G_r`.
    pub fn boundaries(&self, r: i64) -> crate::modules::Subquotient {
        self.d(r + 1).image()
    }

    /// Cycles `Z_r = ker d_r` with their inclusion into `G_r`.
    pub fn cycles(&self, r: i64) -> crate::modules::Subquotient {
        self.d(r).kernel()
    }

    /// `G_r / B_r` with its projection from `G_r`.
    pub fn cokernel_of_boundaries(&self, r: i64) -> crate::modules::Subquotient {
        self.d(r + 1).cokernel()
    }

    /// `H_r = Z_r / B_r`.
    pub fn homology(&self, r: i64) -> Module {
        self.homology_data(r).module
    }

    /// `H_r` together with the cycles and the projection `Z_r ↠ H_r`.
    pub fn homology_data(&self, r: i64) -> ModuleHomology {
        let z = self.cycles(r);
        let up = self.d(r + 1);
        // d_{r+1} factors through Z_r: solve incl · X ≡ d_{r+1} modulo G_r's relations.
        let sys = z.map.matrix().hstack(self.object(r).relations());
        let x = solve_linear(&sys, up.matrix()).expect("shapes agree").expect("boundaries are cycles");
        let into_z = x.submatrix(0..z.object.generators(), 0..x.cols());
        let f = Morphism::new_unchecked(up.source().clone(), z.object.clone(), into_z);
        let c = f.cokernel();
        ModuleHomology { degree: r, cycles: z, module: c.object, projection: c.map }
    }

    /// Coordinates on the cycle generators of vectors of `G_r` that are cycles.
    pub fn cycle_coordinates(&self, data: &ModuleHomology, v: &Matrix) -> Option<Matrix> {
        let sys = data.cycles.map.matrix().hstack(self.object(data.degree).relations());
        let x = solve_linear(&sys, v).ok()??;
        Some(x.submatrix(0..data.cycles.object.generators(), 0..x.cols()))
    }

    pub fn homology_invariants(&self, r: i64) -> CokernelInvariants {
        self.homology(r).invariants()
    }
}

/// Homology of a [`ModuleComplex`] in one degree.
#[derive(Clone, Debug)]
pub struct ModuleHomology {
    pub degree: i64,
    pub cycles: crate::modules::Subquotient,
    pub module: Module,
    /// `Z_r ↠ H_r`.
    pub projection: Morphism,
}
