//! Dense linear algebra over any field implementing [`FieldOps`].
//!
//! Elimination always pivots on the first nonzero entry found scanning rows
//! top-down within the current column, so bases returned here are reproducible.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use super::{FieldCtx, FieldElem};

pub trait FieldOps {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

impl FieldOps for FieldCtx {
    type Elem = FieldElem;

    fn zero(&self) -> FieldElem {
        FieldCtx::zero(self)
    }
    fn one(&self) -> FieldElem {
        FieldCtx::one(self)
    }
    fn is_zero(&self, a: &FieldElem) -> bool {
        FieldCtx::is_zero(self, a)
    }
    fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldCtx::add(self, a, b)
    }
    fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldCtx::sub(self, a, b)
    }
    fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldCtx::neg(self, a)
    }
    fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldCtx::mul(self, a, b)
    }
    fn inv(&self, a: &FieldElem) -> Option<FieldElem> {
        FieldCtx::inv(self, a)
    }
}

/// GF(p) with plain `u64` residues; used for large linearized systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl FieldOps for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.p - a) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| super::gfp_poly::inv_u64(*a, self.p))
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors, each of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<T>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn submatrix_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }
}

pub fn identity<F: FieldOps>(field: &F, n: usize) -> Matrix<F::Elem> {
    Matrix::from_fn(n, n, |i, j| if i == j { field.one() } else { field.zero() })
}

pub fn zeros<F: FieldOps>(field: &F, rows: usize, cols: usize) -> Matrix<F::Elem> {
    Matrix::filled(rows, cols, field.zero())
}

pub fn mat_mul<F: FieldOps>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    assert_eq!(a.cols, b.rows, "dimension mismatch in matrix product");
    let mut out = zeros(field, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k);
            if field.is_zero(x) {
                continue;
            }
            for j in 0..b.cols {
                let y = b.get(k, j);
                if field.is_zero(y) {
                    continue;
                }
                let cur = out.get(i, j);
                let v = field.add(cur, &field.mul(x, y));
                out.set(i, j, v);
            }
        }
    }
    out
}

pub fn mat_vec<F: FieldOps>(field: &F, a: &Matrix<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    assert_eq!(a.cols, v.len(), "dimension mismatch in matrix-vector product");
    (0..a.rows)
        .map(|i| {
            a.row(i).iter().zip(v).fold(field.zero(), |acc, (x, y)| {
                if field.is_zero(x) || field.is_zero(y) {
                    acc
                } else {
                    field.add(&acc, &field.mul(x, y))
                }
            })
        })
        .collect()
}

pub fn mat_add<F: FieldOps>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Matrix::from_fn(a.rows, a.cols, |i, j| field.add(a.get(i, j), b.get(i, j)))
}

pub fn mat_sub<F: FieldOps>(field: &F, a: &Matrix<F::Elem>, b: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Matrix::from_fn(a.rows, a.cols, |i, j| field.sub(a.get(i, j), b.get(i, j)))
}

pub fn mat_pow<F: FieldOps>(field: &F, a: &Matrix<F::Elem>, mut e: u64) -> Matrix<F::Elem> {
    assert!(a.is_square());
    let mut acc = identity(field, a.rows);
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(field, &acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(field, &base, &base);
        }
    }
    acc
}

pub fn is_zero_vec<F: FieldOps>(field: &F, v: &[F::Elem]) -> bool {
    v.iter().all(|x| field.is_zero(x))
}

pub fn is_zero_matrix<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> bool {
    is_zero_vec(field, &m.data)
}

pub fn scale_vec<F: FieldOps>(field: &F, c: &F::Elem, v: &[F::Elem]) -> Vec<F::Elem> {
    v.iter().map(|x| field.mul(c, x)).collect()
}

pub fn sub_vec<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    a.iter().zip(b).map(|(x, y)| field.sub(x, y)).collect()
}

pub fn add_vec<F: FieldOps>(field: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    a.iter().zip(b).map(|(x, y)| field.add(x, y)).collect()
}

/// Reduced row echelon form together with the pivot columns.
#[derive(Clone, Debug)]
pub struct Rref<T> {
    pub matrix: Matrix<T>,
    pub pivots: Vec<usize>,
}

pub fn rref<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Rref<F::Elem> {
    let mut a = m.clone();
    let (rows, cols) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !field.is_zero(a.get(i, c))) else {
            continue;
        };
        if pr != r {
            for j in 0..cols {
                a.data.swap(pr * cols + j, r * cols + j);
            }
        }
        let inv = field.inv(a.get(r, c)).expect("pivot is nonzero");
        for j in c..cols {
            let v = field.mul(&inv, a.get(r, j));
            a.set(r, j, v);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = a.get(i, c).clone();
            if field.is_zero(&factor) {
                continue;
            }
            for j in c..cols {
                let rv = a.get(r, j);
                if field.is_zero(rv) {
                    continue;
                }
                let v = field.sub(a.get(i, j), &field.mul(&factor, rv));
                a.set(i, j, v);
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref { matrix: a, pivots }
}

pub fn rank<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> usize {
    rref(field, m).pivots.len()
}

/// Basis of the null space `{x : m x = 0}`, one vector per free column.
pub fn kernel<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    let Rref { matrix: r, pivots } = rref(field, m);
    let cols = m.cols;
    let mut is_pivot = vec![false; cols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![field.zero(); cols];
        v[free] = field.one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = field.neg(r.get(row, free));
        }
        basis.push(v);
    }
    basis
}

/// Basis of the column space, taken from the original columns at pivot positions.
pub fn column_space<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Vec<Vec<F::Elem>> {
    rref(field, m).pivots.iter().map(|&c| m.column(c)).collect()
}

/// Outcome of solving `m x = b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult<T> {
    pub rank: usize,
    /// `None` when `b` is not in the column space.
    pub particular: Option<Vec<T>>,
    pub kernel: Vec<Vec<T>>,
}

impl<T> SolveResult<T> {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }
}

pub fn solve_linear_system<F: FieldOps>(
    field: &F,
    m: &Matrix<F::Elem>,
    b: &[F::Elem],
) -> SolveResult<F::Elem> {
    assert_eq!(m.rows, b.len(), "right-hand side has the wrong length");
    let cols = m.cols;
    let aug = Matrix::from_fn(m.rows, cols + 1, |i, j| {
        if j < cols {
            m.get(i, j).clone()
        } else {
            b[i].clone()
        }
    });
    let Rref { matrix: r, pivots } = rref(field, &aug);
    let consistent = pivots.last() != Some(&cols);
    let rank = pivots.iter().filter(|&&c| c < cols).count();
    let particular = consistent.then(|| {
        let mut x = vec![field.zero(); cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, cols).clone();
        }
        x
    });
    SolveResult { rank, particular, kernel: kernel(field, m) }
}

/// Rank of the span of `vectors` (all of the same length).
pub fn span_rank<F: FieldOps>(field: &F, vectors: &[Vec<F::Elem>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    rank(field, &Matrix::from_rows(vectors.to_vec()))
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span<F: FieldOps>(field: &F, basis: &[Vec<F::Elem>], v: &[F::Elem]) -> bool {
    if is_zero_vec(field, v) {
        return true;
    }
    let mut all = basis.to_vec();
    let r0 = span_rank(field, &all);
    all.push(v.to_vec());
    span_rank(field, &all) == r0
}

/// A basis of the span of `vectors`, chosen greedily in input order.
pub fn independent_subset<F: FieldOps>(field: &F, vectors: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let m = Matrix::from_columns(n, vectors);
    rref(field, &m).pivots.iter().map(|&c| vectors[c].clone()).collect()
}

/// Basis of the intersection of two subspaces of the same ambient space.
pub fn intersect<F: FieldOps>(
    field: &F,
    dim: usize,
    a: &[Vec<F::Elem>],
    b: &[Vec<F::Elem>],
) -> Vec<Vec<F::Elem>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve sum x_i a_i - sum y_j b_j = 0, map kernel vectors through the a side.
    let m = Matrix::from_fn(dim, a.len() + b.len(), |i, j| {
        if j < a.len() {
            a[j][i].clone()
        } else {
            field.neg(&b[j - a.len()][i])
        }
    });
    let vecs: Vec<Vec<F::Elem>> = kernel(field, &m)
        .into_iter()
        .map(|k| {
            let mut v = vec![field.zero(); dim];
            for (i, ai) in a.iter().enumerate() {
                if field.is_zero(&k[i]) {
                    continue;
                }
                for (t, x) in ai.iter().enumerate() {
                    v[t] = field.add(&v[t], &field.mul(&k[i], x));
                }
            }
            v
        })
        .collect();
    independent_subset(field, &vecs)
}

/// Vectors of `sub` that extend a basis of `base` to a basis of `base + sub`.
///
/// When `base` is a subspace of `sub`, these represent a basis of `sub / base`.
pub fn complement_in<F: FieldOps>(
    field: &F,
    base: &[Vec<F::Elem>],
    sub: &[Vec<F::Elem>],
) -> Vec<Vec<F::Elem>> {
    let base = independent_subset(field, base);
    let mut all = base.clone();
    all.extend(sub.iter().cloned());
    if all.is_empty() {
        return Vec::new();
    }
    let n = all[0].len();
    let m = Matrix::from_columns(n, &all);
    rref(field, &m)
        .pivots
        .into_iter()
        .filter(|&c| c >= base.len())
        .map(|c| all[c].clone())
        .collect()
}

pub fn inverse<F: FieldOps>(field: &F, m: &Matrix<F::Elem>) -> Option<Matrix<F::Elem>> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows;
    let aug = Matrix::from_fn(n, 2 * n, |i, j| {
        if j < n {
            m.get(i, j).clone()
        } else if j - n == i {
            field.one()
        } else {
            field.zero()
        }
    });
    let Rref { matrix: r, pivots } = rref(field, &aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(Matrix::from_fn(n, n, |i, j| r.get(i, n + j).clone()))
}

/// Coordinates of `v` in the given basis (which must span a space containing `v`).
pub fn coordinates<F: FieldOps>(
    field: &F,
    basis: &[Vec<F::Elem>],
    v: &[F::Elem],
) -> Option<Vec<F::Elem>> {
    let n = v.len();
    if basis.is_empty() {
        return is_zero_vec(field, v).then(Vec::new);
    }
    let m = Matrix::from_columns(n, basis);
    solve_linear_system(field, &m, v).particular
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;

    fn gf5(rows: &[&[u64]]) -> Matrix<u64> {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn identity_system_has_unique_solution() {
        let f = PrimeField { p: 7 };
        let m = identity(&f, 3);
        let res = solve_linear_system(&f, &m, &[3, 5, 6]);
        assert_eq!(res.rank, 3);
        assert_eq!(res.particular, Some(vec![3, 5, 6]));
        assert!(res.kernel.is_empty());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let f = PrimeField { p: 5 };
        let m = zeros(&f, 2, 3);
        let res = solve_linear_system(&f, &m, &[0, 0]);
        assert_eq!(res.rank, 0);
        assert_eq!(res.kernel.len(), 3);
    }

    #[test]
    fn rank_one_example_over_gf5() {
        // Row reduction by hand: [[1,2],[2,4]] -> [[1,2],[0,0]], x0 = -2 x1 = 3 x1.
        let f = PrimeField { p: 5 };
        let m = gf5(&[&[1, 2], &[2, 4]]);
        let res = solve_linear_system(&f, &m, &[0, 0]);
        assert_eq!(res.rank, 1);
        assert_eq!(res.kernel, vec![vec![3, 1]]);
    }

    #[test]
    fn inconsistent_system_is_flagged() {
        let f = PrimeField { p: 5 };
        let m = gf5(&[&[1, 2], &[2, 4]]);
        let res = solve_linear_system(&f, &m, &[1, 0]);
        assert!(!res.is_consistent());
        assert_eq!(res.rank, 1);
    }

    #[test]
    fn works_over_extension_fields() {
        let ctx = make_field(3, 2).unwrap();
        let t = ctx.generator();
        let m = Matrix::from_rows(vec![vec![ctx.one(), t.clone()], vec![t.clone(), ctx.mul(&t, &t)]]);
        assert_eq!(rank(&ctx, &m), 1);
        let k = kernel(&ctx, &m);
        assert_eq!(k.len(), 1);
        assert!(is_zero_vec(&ctx, &mat_vec(&ctx, &m, &k[0])));
        let inv = inverse(&ctx, &identity(&ctx, 2)).unwrap();
        assert_eq!(inv, identity(&ctx, 2));
        assert!(inverse(&ctx, &m).is_none());
    }

    #[test]
    fn intersection_and_complement() {
        let f = PrimeField { p: 3 };
        let a = vec![vec![1, 0, 0], vec![0, 1, 0]];
        let b = vec![vec![0, 1, 0], vec![0, 0, 1]];
        let i = intersect(&f, 3, &a, &b);
        assert_eq!(i.len(), 1);
        assert!(in_span(&f, &[vec![0, 1, 0]], &i[0]));
        let c = complement_in(&f, &i, &a);
        assert_eq!(c.len(), 1);
    }
}
