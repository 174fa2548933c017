//! Dense linear algebra over a prime field `F_p`.
//!
//! Every limit, colimit and Hom computation in the crate reduces to kernels,
//! cokernels and linear solves over these matrices, so all rank decisions are
//! exact. Matrices are small (a few thousand rows at most) and stored row-major.

use std::fmt;

use crate::error::{Error, Result};

/// A prime modulus. Shared by every matrix taking part in one computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    p: u32,
}

impl Field {
    /// The field with two elements, the default throughout the crate.
    pub const F2: Field = Field { p: 2 };

    pub fn new(p: u32) -> Result<Field> {
        if !(2..=(1 << 31)).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidField(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % self.p as u64) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Multiplicative inverse via Fermat. Panics on zero.
    pub fn inv(self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in F_{}", self.p);
        self.pow(a, self.p - 2)
    }

    pub fn pow(self, mut a: u32, mut e: u32) -> u32 {
        let mut acc = 1 % self.p;
        a %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    pub fn element(self, v: i64) -> FieldElement {
        FieldElement {
            value: self.reduce(v),
            field: self,
        }
    }
}

impl Default for Field {
    fn default() -> Self {
        Field::F2
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p as u64 {
        if (p as u64).is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A residue `0 <= value < p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: Field,
}

impl FieldElement {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn field(self) -> Field {
        self.field
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dense row-major matrix over `F_p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}x{} over F_{}](", self.rows, self.cols, self.field.p)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, ")")
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            field,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % field.p;
        }
        m
    }

    /// Builds a matrix from integer rows, reducing mod p. All rows must have
    /// length `cols`.
    pub fn from_rows(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Result<Matrix> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix {
            rows,
            cols,
            field,
            data: entries.iter().map(|&v| field.reduce(v)).collect(),
        })
    }

    pub fn from_nested(field: Field, cols: usize, nested: &[Vec<i64>]) -> Result<Matrix> {
        let mut flat = Vec::with_capacity(nested.len() * cols);
        for row in nested {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row of length {} in a matrix with {} columns",
                    row.len(),
                    cols
                )));
            }
            flat.extend_from_slice(row);
        }
        Matrix::from_rows(field, nested.len(), cols, &flat)
    }

    /// Column vector.
    pub fn column(field: Field, v: &[u32]) -> Matrix {
        Matrix {
            rows: v.len(),
            cols: 1,
            field,
            data: v.iter().map(|&x| x % field.p).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.field.p;
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn to_nested(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) as i64).collect())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn col_vec(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    fn check_field(&self, other: &Matrix) {
        assert_eq!(self.field, other.field, "mixing matrices over different fields");
    }

    /// Matrix product. Panics on shape mismatch (an internal invariant).
    pub fn mul(&self, other: &Matrix) -> Matrix {
        self.check_field(other);
        assert_eq!(
            self.cols, other.rows,
            "product of {}x{} and {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let f = self.field;
        let p = f.p as u64;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * other.cols..(r + 1) * other.cols];
            let mut acc = vec![0u64; other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (slot, &b) in acc.iter_mut().zip(brow) {
                    *slot = (*slot + a as u64 * b as u64) % p;
                }
            }
            for (o, a) in orow.iter_mut().zip(acc) {
                *o = a as u32;
            }
        }
        out
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul(other))
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.check_field(other);
        assert_eq!(self.shape(), other.shape());
        let f = self.field;
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: f,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(self.field.neg(1 % self.field.p)))
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = self.field;
        Matrix {
            rows: self.rows,
            cols: self.cols,
            field: f,
            data: self.data.iter().map(|&a| f.mul(a, s)).collect(),
        }
    }

    /// Kronecker product; row index of the result is `i * other.rows + k`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        self.check_field(other);
        let f = self.field;
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Matrix::zeros(f, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let v = f.mul(a, other.get(k, l));
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] = v;
                    }
                }
            }
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn put_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.data[(r0 + r) * self.cols + c0 + c] = block.get(r, c);
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.data[r * cols + c] = self.get(r0 + r, c0 + c);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols]
                .copy_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        out
    }

    pub fn hstack(field: Field, rows: usize, parts: &[&Matrix]) -> Matrix {
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut c0 = 0;
        for m in parts {
            assert_eq!(m.rows, rows);
            out.put_block(0, c0, m);
            c0 += m.cols;
        }
        out
    }

    pub fn vstack(field: Field, cols: usize, parts: &[&Matrix]) -> Matrix {
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Matrix::zeros(field, rows, cols);
        let mut r0 = 0;
        for m in parts {
            assert_eq!(m.cols, cols);
            out.put_block(r0, 0, m);
            r0 += m.rows;
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..self.cols {
                    self.data.swap(pr * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col));
            if inv != 1 {
                for c in col..self.cols {
                    let v = self.get(row, c);
                    self.data[row * self.cols + c] = f.mul(v, inv);
                }
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in col..self.cols {
                    let pv = self.data[row * self.cols + c];
                    if pv == 0 {
                        continue;
                    }
                    let idx = r * self.cols + c;
                    self.data[idx] = f.sub(self.data[idx], f.mul(factor, pv));
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let p = m.rref_in_place();
        (m, p)
    }
}

/// Rank by exact Gaussian elimination.
pub fn rank(m: &Matrix) -> usize {
    if m.rows == 0 || m.cols == 0 {
        return 0;
    }
    m.rref().1.len()
}

/// Columns form a basis of the null space of `m`.
pub fn kernel_basis(m: &Matrix) -> Matrix {
    let f = m.field;
    let (r, pivots) = m.rref();
    let mut is_pivot = vec![false; m.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..m.cols).filter(|&c| !is_pivot[c]).collect();
    let mut out = Matrix::zeros(f, m.cols, free.len());
    for (j, &fc) in free.iter().enumerate() {
        out.set(fc, j, 1);
        for (i, &pc) in pivots.iter().enumerate() {
            let v = r.get(i, fc);
            if v != 0 {
                out.set(pc, j, f.neg(v));
            }
        }
    }
    out
}

/// A surjection `q` out of the codomain of `m` with `ker q = im m`.
pub fn cokernel_projection(m: &Matrix) -> Matrix {
    kernel_basis(&m.transpose()).transpose()
}

/// Some `x` with `m x = b`, or `None` when the system is inconsistent.
pub fn solve(m: &Matrix, b: &[u32]) -> Result<Option<Vec<u32>>> {
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for a {}x{} system",
            b.len(),
            m.rows,
            m.cols
        )));
    }
    let rhs = Matrix::column(m.field, b);
    Ok(solve_matrix(m, &rhs)?.map(|x| x.col_vec(0)))
}

/// Some `X` with `m X = b`, or `None` when any column is inconsistent.
pub fn solve_matrix(m: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if b.rows != m.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side with {} rows for a {}x{} system",
            b.rows, m.rows, m.cols
        )));
    }
    let f = m.field;
    let aug = Matrix::hstack(f, m.rows, &[m, b]);
    let (r, pivots) = aug.rref();
    if pivots.iter().any(|&p| p >= m.cols) {
        return Ok(None);
    }
    let mut x = Matrix::zeros(f, m.cols, b.cols);
    for (i, &pc) in pivots.iter().enumerate() {
        for j in 0..b.cols {
            x.set(pc, j, r.get(i, m.cols + j));
        }
    }
    Ok(Some(x))
}

/// Solve where consistency is an internal invariant (e.g. expressing a vector
/// known to lie in a subspace in terms of that subspace's basis).
pub(crate) fn solve_exact(m: &Matrix, b: &Matrix) -> Matrix {
    solve_matrix(m, b)
        .expect("shapes checked by caller")
        .expect("vector outside the expected subspace")
}

/// A right inverse of a surjective matrix.
pub(crate) fn right_inverse(q: &Matrix) -> Matrix {
    solve_exact(q, &Matrix::identity(q.field, q.rows))
}

/// A left inverse of an injective matrix.
pub(crate) fn left_inverse(s: &Matrix) -> Matrix {
    right_inverse(&s.transpose()).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> Field {
        Field::new(5).unwrap()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Matrix::identity(Field::F2, 2)), 2);
        assert_eq!(rank(&Matrix::zeros(Field::F2, 1, 1)), 0);
        let m = Matrix::from_rows(f5(), 2, 2, &[1, 2, 2, 4]).unwrap();
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&Matrix::identity(Field::F2, 2)).cols(), 0);
        assert_eq!(kernel_basis(&Matrix::zeros(Field::F2, 1, 1)).cols(), 1);
        let m = Matrix::from_rows(f5(), 2, 2, &[1, 2, 2, 4]).unwrap();
        let k = kernel_basis(&m);
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).is_zero());
        // spanned by (3, 1)
        assert_eq!(k.col_vec(0), vec![3, 1]);
    }

    #[test]
    fn cokernel_examples() {
        assert_eq!(cokernel_projection(&Matrix::identity(Field::F2, 2)).rows(), 0);
        let q = cokernel_projection(&Matrix::zeros(Field::F2, 1, 1));
        assert_eq!(q, Matrix::identity(Field::F2, 1));
        let m = Matrix::from_rows(f5(), 2, 1, &[1, 2]).unwrap();
        let q = cokernel_projection(&m);
        assert_eq!(q.rows(), 1);
        assert!(q.mul(&m).is_zero());
        assert_eq!(rank(&q), 1);
    }

    #[test]
    fn solve_examples() {
        let id = Matrix::identity(Field::F2, 3);
        assert_eq!(solve(&id, &[1, 0, 1]).unwrap(), Some(vec![1, 0, 1]));
        let z = Matrix::zeros(Field::F2, 2, 2);
        assert_eq!(solve(&z, &[1, 0]).unwrap(), None);
        let two = Matrix::from_rows(f5(), 1, 1, &[2]).unwrap();
        assert_eq!(solve(&two, &[3]).unwrap(), Some(vec![4]));
        assert!(matches!(solve(&two, &[1, 2]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn field_rejects_composites() {
        assert!(Field::new(4).is_err());
        assert!(Field::new(1).is_err());
        assert_eq!(Field::new(7).unwrap().inv(3), 5);
    }

    fn arb_matrix() -> impl Strategy<Value = Matrix> {
        (prop::sample::select(vec![2u32, 3, 5, 7]), 0usize..6, 0usize..6).prop_flat_map(
            |(p, r, c)| {
                prop::collection::vec(0i64..7, r * c).prop_map(move |v| {
                    Matrix::from_rows(Field::new(p).unwrap(), r, c, &v).unwrap()
                })
            },
        )
    }

    proptest! {
        #[test]
        fn rank_nullity(m in arb_matrix()) {
            let k = kernel_basis(&m);
            prop_assert_eq!(rank(&m) + k.cols(), m.cols());
            prop_assert!(m.mul(&k).is_zero());
        }

        #[test]
        fn cokernel_kills_image(m in arb_matrix()) {
            let q = cokernel_projection(&m);
            prop_assert!(q.mul(&m).is_zero());
            prop_assert_eq!(rank(&q), m.rows() - rank(&m));
            prop_assert_eq!(q.rows(), m.rows() - rank(&m));
        }

        #[test]
        fn solve_is_sound(m in arb_matrix(), seed in prop::collection::vec(0u32..7, 6)) {
            let b: Vec<u32> = (0..m.rows()).map(|i| seed[i] % m.field().modulus()).collect();
            match solve(&m, &b).unwrap() {
                Some(x) => {
                    let mx = m.mul(&Matrix::column(m.field(), &x));
                    prop_assert_eq!(mx.col_vec(0), b);
                }
                None => {
                    let aug = Matrix::hstack(m.field(), m.rows(), &[&m, &Matrix::column(m.field(), &b)]);
                    prop_assert!(rank(&aug) > rank(&m));
                }
            }
        }
    }
}
