use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rings::{Elem, Ring};

/// Dense row-major matrix over a [`Ring`]; all entries are canonical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Matrix {
        Matrix { ring, rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(ring: Ring, n: usize) -> Matrix {
        let mut m = Matrix::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = Elem::ONE;
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar(ring: Ring, n: usize, c: &Elem) -> Matrix {
        let mut m = Matrix::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn diagonal(ring: Ring, diag: &[Elem]) -> Matrix {
        let n = diag.len();
        let mut m = Matrix::zeros(ring, n, n);
        for (i, x) in diag.iter().enumerate() {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn from_fn(ring: Ring, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { ring, rows, cols, data }
    }

    /// Builds a matrix from integer rows (reduced into the ring).
    pub fn from_i64(ring: Ring, rows: usize, cols: usize, vals: &[i64]) -> Matrix {
        assert_eq!(vals.len(), rows * cols, "entry count");
        Matrix { ring, rows, cols, data: vals.iter().map(|&v| ring.int(v)).collect() }
    }

    pub fn from_rows(ring: Ring, rows: Vec<Vec<Elem>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            for x in row {
                data.push(ring.canonical(&x)?);
            }
        }
        Ok(Matrix { ring, rows: r, cols: c, data })
    }

    pub fn column_vector(ring: Ring, v: Vec<Elem>) -> Matrix {
        Matrix { ring, rows: v.len(), cols: 1, data: v }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Elem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Elem::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ring, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn neg(&self) -> Matrix {
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| self.ring.neg(x)).collect() }
    }

    pub fn scale(&self, c: &Elem) -> Matrix {
        Matrix {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| self.ring.mul(c, x)).collect(),
        }
    }

    fn check_same_shape(&self, other: &Matrix, what: &str) {
        assert_eq!(self.shape(), other.shape(), "{what}: shape mismatch");
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.check_same_shape(other, "add");
        Matrix {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| self.ring.add(a, b)).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.check_same_shape(other, "sub");
        Matrix {
            ring: self.ring,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| self.ring.sub(a, b)).collect(),
        }
    }

    /// Matrix product; panics on incompatible inner dimensions.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "mul: inner dimension {}x{} * {}x{}", self.rows, self.cols, other.rows, other.cols);
        let ring = self.ring;
        let mut out = Matrix::zeros(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let brow = other.row(k);
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    if !b.is_zero() {
                        *o = ring.mul_add(o, a, b);
                    }
                }
            }
        }
        out
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul(other))
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack rows");
        Matrix::from_fn(self.ring, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols { self.get(i, j).clone() } else { other.get(i, j - self.cols).clone() }
        })
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack cols");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.ring, self.rows + other.rows, self.cols + other.cols, |i, j| {
            match (i < self.rows, j < self.cols) {
                (true, true) => self.get(i, j).clone(),
                (false, false) => other.get(i - self.rows, j - self.cols).clone(),
                _ => Elem::ZERO,
            }
        })
    }

    /// 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
        a.hstack(b).vstack(&c.hstack(d))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Matrix {
        Matrix::from_fn(self.ring, rows.len(), cols.len(), |i, j| self.get(rows.start + i, cols.start + j).clone())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.ring, self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.ring, idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Column-major vectorization.
    pub fn vec_columns(&self) -> Vec<Elem> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self.get(i, j).clone());
            }
        }
        v
    }

    pub fn from_vec_columns(ring: Ring, rows: usize, cols: usize, v: &[Elem]) -> Matrix {
        assert_eq!(v.len(), rows * cols);
        Matrix::from_fn(ring, rows, cols, |i, j| v[j * rows + i].clone())
    }

    // Elementary operations used by the normal-form algorithms.

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] += c * row[src]`.
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, c: &Elem) {
        if c.is_zero() {
            return;
        }
        let ring = self.ring;
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if s.is_zero() {
                continue;
            }
            let v = ring.mul_add(&self.data[dst * self.cols + j], c, s);
            self.data[dst * self.cols + j] = v;
        }
    }

    /// `col[dst] += c * col[src]`.
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, c: &Elem) {
        if c.is_zero() {
            return;
        }
        let ring = self.ring;
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if s.is_zero() {
                continue;
            }
            let v = ring.mul_add(&self.data[i * self.cols + dst], c, s);
            self.data[i * self.cols + dst] = v;
        }
    }

    pub(crate) fn scale_row(&mut self, i: usize, c: &Elem) {
        for j in 0..self.cols {
            let v = self.ring.mul(c, &self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    pub(crate) fn scale_col(&mut self, j: usize, c: &Elem) {
        for i in 0..self.rows {
            let v = self.ring.mul(c, &self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

/// Wire form: `{"rows":r,"cols":c,"entries":[["num","num/den",...],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
}

impl Matrix {
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows).map(|i| self.row(i).iter().map(Elem::to_string).collect()).collect(),
        }
    }

    pub fn from_json(ring: Ring, j: &MatrixJson) -> Result<Matrix> {
        if j.entries.len() != j.rows || j.entries.iter().any(|r| r.len() != j.cols) {
            return Err(Error::ShapeMismatch(format!("declared {}x{} does not match entries", j.rows, j.cols)));
        }
        let mut data = Vec::with_capacity(j.rows * j.cols);
        for row in &j.entries {
            for s in row {
                data.push(ring.parse_elem(s)?);
            }
        }
        Ok(Matrix { ring, rows: j.rows, cols: j.cols, data })
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Deserializes entries over ℚ; callers re-home the matrix with
/// [`Matrix::over`] once the ring is known.
impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Matrix, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        Matrix::from_json(Ring::rationals(), &j).map_err(D::Error::custom)
    }
}

impl Matrix {
    /// Reinterprets the entries in another ring (canonicalizing each).
    pub fn over(&self, ring: Ring) -> Result<Matrix> {
        let data = self.data.iter().map(|x| ring.canonical(x)).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { ring, rows: self.rows, cols: self.cols, data })
    }
}
