//! Smith normal form and the solvers built on it.
//!
//! Pivot rule: the nonzero entry of minimal [`Norm`](Norm) in
//! the active submatrix, first in row-major order on ties. Over fields and
//! ℤ₍p₎ that pivot divides every remaining entry, so only ℤ[1/2] ever needs
//! Euclidean remainders and the divisibility sweep; there the size is the
//! integer absolute value after denominators are cleared.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};
use crate::rings::{Elem, Norm, Ring, RingKind};

/// `U·M·V = D` with `U`, `V` invertible and their inverses recorded.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: Matrix,
    pub u_inv: Matrix,
    pub d: Matrix,
    pub v: Matrix,
    pub v_inv: Matrix,
    /// Nonzero diagonal entries of `D`, unit-normalized, each dividing the next.
    pub invariant_factors: Vec<Elem>,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

/// Isomorphism class of a cokernel: `A^free_rank ⊕ ⊕ A/(fᵢ)` with unit
/// factors omitted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CokernelInvariants {
    pub free_rank: usize,
    #[serde(with = "elem_strings")]
    pub factors: Vec<Elem>,
}

impl CokernelInvariants {
    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.factors.is_empty()
    }

    pub fn is_finite_length(&self) -> bool {
        self.free_rank == 0
    }
}

pub(crate) mod elem_strings {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rings::Elem;

    pub fn serialize<S: Serializer>(v: &[Elem], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(Elem::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Elem>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| Elem::parse(s).ok_or_else(|| serde::de::Error::custom(format!("bad element {s}"))))
            .collect()
    }
}

/// Working state: `d` plus optional companions that record the transforms.
struct Reducer {
    ring: Ring,
    d: Matrix,
    u: Option<Matrix>,
    u_inv: Option<Matrix>,
    v: Option<Matrix>,
    v_inv: Option<Matrix>,
    /// ℤ[1/2] is reduced as ℤ after clearing denominators: 2 is a unit, so
    /// integer elimination is valid and keeps coefficients from mixing
    /// numerator and denominator growth.
    integral: bool,
}

impl Reducer {
    fn new(d: Matrix, u: Option<Matrix>, u_inv: Option<Matrix>, v: Option<Matrix>, v_inv: Option<Matrix>) -> Reducer {
        let ring = d.ring();
        let integral = matches!(ring.kind(), RingKind::IntegersTwoInverted);
        Reducer { ring, d, u, u_inv, v, v_inv, integral }
    }

    fn size(&self, x: &Elem) -> Norm {
        if !self.integral {
            return self.ring.norm(x);
        }
        let n = x.numer().magnitude().clone();
        match n.to_u64() {
            Some(v) => Norm::Small(v),
            None => Norm::Big(n.into()),
        }
    }

    /// `q` with `b - q·a` of smaller size than `a`, or zero.
    fn quotient(&self, b: &Elem, a: &Elem) -> Elem {
        if !self.integral {
            return self.ring.euclidean_quotient(b, a);
        }
        let (a, b) = (a.numer(), b.numer());
        let two = BigInt::from(2);
        let q = (&b * &two + &a).div_floor(&(&a * &two));
        Elem::from_big(BigRational::from_integer(q))
    }

    /// Scales each row by its denominator, a power of two.
    fn clear_denominators(&mut self) {
        for i in 0..self.d.rows() {
            let l = self.d.row(i).iter().fold(BigInt::one(), |l, x| l.lcm(&x.denom()));
            if !l.is_one() {
                let c = Elem::from_big(BigRational::from_integer(l.clone()));
                let c_inv = Elem::from_big(BigRational::new(BigInt::one(), l));
                self.scale_row(i, &c, &c_inv);
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        self.d.swap_rows(a, b);
        if let Some(u) = &mut self.u {
            u.swap_rows(a, b);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.swap_cols(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.d.swap_cols(a, b);
        if let Some(v) = &mut self.v {
            v.swap_cols(a, b);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.swap_rows(a, b);
        }
    }

    /// `row[dst] += c · row[src]`.
    fn row_addmul(&mut self, dst: usize, src: usize, c: &Elem) {
        self.d.add_row_multiple(dst, src, c);
        if let Some(u) = &mut self.u {
            u.add_row_multiple(dst, src, c);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.add_col_multiple(src, dst, &self.ring.neg(c));
        }
    }

    /// `col[dst] += c · col[src]`.
    fn col_addmul(&mut self, dst: usize, src: usize, c: &Elem) {
        self.d.add_col_multiple(dst, src, c);
        if let Some(v) = &mut self.v {
            v.add_col_multiple(dst, src, c);
        }
        if let Some(vi) = &mut self.v_inv {
            vi.add_row_multiple(src, dst, &self.ring.neg(c));
        }
    }

    fn scale_row(&mut self, i: usize, c: &Elem, c_inv: &Elem) {
        self.d.scale_row(i, c);
        if let Some(u) = &mut self.u {
            u.scale_row(i, c);
        }
        if let Some(ui) = &mut self.u_inv {
            ui.scale_col(i, c_inv);
        }
    }

    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let (rows, cols) = self.d.shape();
        let mut best: Option<(usize, usize, Norm)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = self.d.get(i, j);
                if x.is_zero() {
                    continue;
                }
                if self.ring.is_field() {
                    return Some((i, j));
                }
                let n = self.size(x);
                let better = match &best {
                    None => true,
                    Some((_, _, b)) => n < *b,
                };
                if better {
                    let zero = matches!(n, Norm::Small(0));
                    best = Some((i, j, n));
                    if zero {
                        return Some((i, j));
                    }
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    /// Moves the minimal-norm entry of row `t` and column `t` (from `t` on)
    /// to the pivot position.
    fn pivot_from_cross(&mut self, t: usize) {
        let (rows, cols) = self.d.shape();
        let mut best: Option<(usize, usize, Norm)> = None;
        let cand = (t..rows).map(|i| (i, t)).chain((t + 1..cols).map(|j| (t, j)));
        for (i, j) in cand {
            let x = self.d.get(i, j);
            if x.is_zero() {
                continue;
            }
            let n = self.size(x);
            if best.as_ref().is_none_or(|(_, _, b)| n < *b) {
                best = Some((i, j, n));
            }
        }
        if let Some((i, j, _)) = best {
            self.swap_rows(t, i);
            self.swap_cols(t, j);
        }
    }

    /// Zeroes column `t` below and row `t` right of the pivot by Euclidean
    /// reduction: each pass either clears the cross or leaves a remainder of
    /// strictly smaller norm, which becomes the next pivot.
    fn clear_cross(&mut self, t: usize) {
        let (rows, cols) = self.d.shape();
        loop {
            let mut residue = false;
            for i in t + 1..rows {
                let b = self.d.get(i, t).clone();
                if b.is_zero() {
                    continue;
                }
                let a = self.d.get(t, t).clone();
                let q = self.quotient(&b, &a);
                self.row_addmul(i, t, &self.ring.neg(&q));
                residue |= !self.d.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                let b = self.d.get(t, j).clone();
                if b.is_zero() {
                    continue;
                }
                let a = self.d.get(t, t).clone();
                let q = self.quotient(&b, &a);
                self.col_addmul(j, t, &self.ring.neg(&q));
                residue |= !self.d.get(t, j).is_zero();
            }
            if !residue {
                return;
            }
            self.pivot_from_cross(t);
        }
    }

    fn run(&mut self) -> usize {
        let (rows, cols) = self.d.shape();
        let needs_sweep = self.integral;
        if self.integral {
            self.clear_denominators();
        }
        let mut t = 0;
        while t < rows.min(cols) {
            let Some((pi, pj)) = self.find_pivot(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                self.clear_cross(t);
                if !needs_sweep {
                    break;
                }
                let a = self.d.get(t, t).clone();
                let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !self.ring.divides(&a, self.d.get(i, j))));
                match offender {
                    Some(i) => self.row_addmul(t, i, &Elem::ONE),
                    None => break,
                }
            }
            t += 1;
        }
        for k in 0..t {
            let (unit, _) = self.ring.unit_normal(self.d.get(k, k));
            if !unit.is_one() {
                let inv = self.ring.inv(&unit).expect("unit");
                self.scale_row(k, &inv, &unit);
            }
        }
        t
    }
}

/// Full decomposition with all four transforms.
pub fn smith_normal_form(m: &Matrix) -> SmithDecomposition {
    let ring = m.ring();
    let (r, c) = m.shape();
    let mut red = Reducer::new(
        m.clone(),
        Some(Matrix::identity(ring, r)),
        Some(Matrix::identity(ring, r)),
        Some(Matrix::identity(ring, c)),
        Some(Matrix::identity(ring, c)),
    );
    let rank = red.run();
    let invariant_factors = (0..rank).map(|k| red.d.get(k, k).clone()).collect();
    SmithDecomposition {
        u: red.u.unwrap(),
        u_inv: red.u_inv.unwrap(),
        d: red.d,
        v: red.v.unwrap(),
        v_inv: red.v_inv.unwrap(),
        invariant_factors,
    }
}

/// Cokernel isomorphism class; no transforms are tracked.
pub fn cokernel_invariants(m: &Matrix) -> CokernelInvariants {
    let mut red = Reducer::new(m.clone(), None, None, None, None);
    let rank = red.run();
    let factors = (0..rank)
        .map(|k| red.d.get(k, k).clone())
        .filter(|x| !m.ring().is_unit(x))
        .collect();
    CokernelInvariants { free_rank: m.rows() - rank, factors }
}

/// Some `X` with `M·X = B`, or `None` when no solution exists over the ring.
/// Solvability is decided columnwise on `U·B` against the diagonal of `D`.
pub fn solve_linear(m: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if m.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "system has {} equations but right-hand side has {} rows",
            m.rows(),
            b.rows()
        )));
    }
    let ring = m.ring();
    let (r, c) = m.shape();
    let mut red = Reducer::new(m.clone(), Some(b.clone()), None, Some(Matrix::identity(ring, c)), None);
    let rank = red.run();
    let ub = red.u.unwrap();
    let mut y = Matrix::zeros(ring, c, b.cols());
    for col in 0..b.cols() {
        for i in 0..r {
            let ci = ub.get(i, col);
            if i < rank {
                match ring.div(ci, red.d.get(i, i)) {
                    Some(q) => y.set(i, col, q),
                    None => return Ok(None),
                }
            } else if !ci.is_zero() {
                return Ok(None);
            }
        }
    }
    Ok(Some(red.v.unwrap().mul(&y)))
}

/// Columns generating `ker M`; over the supported rings they form a basis.
pub fn kernel_basis(m: &Matrix) -> Matrix {
    let ring = m.ring();
    let c = m.cols();
    let mut red = Reducer::new(m.clone(), None, None, Some(Matrix::identity(ring, c)), None);
    let rank = red.run();
    let idx: Vec<usize> = (rank..c).collect();
    red.v.unwrap().select_columns(&idx)
}

/// Columns forming a basis of the column span of `M`.
pub fn image_basis(m: &Matrix) -> Matrix {
    let ring = m.ring();
    let r = m.rows();
    let mut red = Reducer::new(m.clone(), None, Some(Matrix::identity(ring, r)), None, None);
    let rank = red.run();
    let ui = red.u_inv.unwrap();
    Matrix::from_fn(ring, r, rank, |i, k| ring.mul(ui.get(i, k), red.d.get(k, k)))
}

/// Rank over the fraction field.
pub fn rank(m: &Matrix) -> usize {
    let mut red = Reducer::new(m.clone(), None, None, None, None);
    red.run()
}
