//! Sparse exact matrices with fraction-free elimination.
//!
//! Every dimension claim in the crate bottoms out here: `rref` runs a
//! Bareiss-style forward pass (cross-multiplication, division by the previous
//! pivot) followed by a normalization pass to reduced row echelon form.
//! Pivoting always picks the least row index with a nonzero entry, so the
//! output is deterministic down to the bit.

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major sparse matrix; absent entries are zero, stored entries never are.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, T>>,
}

/// Result of `rref`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rref<T> {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub reduced: Matrix<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![BTreeMap::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i].get(&j).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: T) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, &T)> {
        self.data[i].iter().map(|(j, v)| (*j, v))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, v) in self.data[i].iter() {
                t.set(*j, i, v.clone());
            }
        }
        t
    }

    pub fn scale(&self, s: &T) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.data[i].iter() {
                out.set(i, *j, v.clone() * s.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for i in 0..other.rows {
            for (j, v) in other.data[i].iter() {
                out.add_to(i, *j, v.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        self.add(&other.scale(&(T::zero() - T::one())))
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * vec[{}]",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let out = self
            .data
            .iter()
            .map(|row| {
                let mut acc = T::zero();
                for (j, a) in row.iter() {
                    acc = acc + a.clone() * v[*j].clone();
                }
                acc
            })
            .collect();
        Ok(out)
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let mut row: BTreeMap<usize, T> = BTreeMap::new();
            for (k, a) in self.data[i].iter() {
                for (j, b) in other.data[*k].iter() {
                    let term = a.clone() * b.clone();
                    match row.get_mut(j) {
                        Some(acc) => *acc = acc.clone() + term,
                        None => {
                            row.insert(*j, term);
                        }
                    }
                }
            }
            row.retain(|_, v| !v.is_zero());
            out.data[i] = row;
        }
        Ok(out)
    }

    /// Reduced row echelon form. Forward pass is fraction-free with the
    /// Bareiss divisor; the pivot is always the least-index nonzero row.
    pub fn rref(&self) -> Rref<T> {
        let mut m = self.data.clone();
        let mut pivot_cols = Vec::new();
        let mut row = 0usize;
        let mut prev = T::one();
        for col in 0..self.cols {
            let pivot_row = (row..self.rows).find(|r| m[*r].contains_key(&col));
            let Some(pr) = pivot_row else { continue };
            m.swap(row, pr);
            let pivot = m[row].get(&col).cloned().unwrap();
            for r in (row + 1)..self.rows {
                let factor = match m[r].get(&col) {
                    Some(f) => f.clone(),
                    None if m[r].is_empty() => continue,
                    None => T::zero(),
                };
                let mut new_row: BTreeMap<usize, T> = BTreeMap::new();
                let keys: Vec<usize> = m[r]
                    .keys()
                    .chain(m[row].keys())
                    .copied()
                    .collect::<std::collections::BTreeSet<_>>()
                    .into_iter()
                    .collect();
                for j in keys {
                    let a = m[r].get(&j).cloned().unwrap_or_else(T::zero);
                    let b = m[row].get(&j).cloned().unwrap_or_else(T::zero);
                    let v = (pivot.clone() * a - factor.clone() * b) / prev.clone();
                    if !v.is_zero() {
                        new_row.insert(j, v);
                    }
                }
                m[r] = new_row;
            }
            pivot_cols.push(col);
            prev = pivot;
            row += 1;
            if row == self.rows {
                break;
            }
        }
        let rank = pivot_cols.len();
        // Normalize pivots to one and clear entries above them.
        for (i, &col) in pivot_cols.iter().enumerate().rev() {
            let pivot = m[i].get(&col).cloned().unwrap();
            if pivot != T::one() {
                for v in m[i].values_mut() {
                    *v = v.clone() / pivot.clone();
                }
            }
            for r in 0..i {
                let Some(factor) = m[r].get(&col).cloned() else {
                    continue;
                };
                let pivot_row = m[i].clone();
                for (j, b) in pivot_row {
                    let a = m[r].get(&j).cloned().unwrap_or_else(T::zero);
                    let v = a - factor.clone() * b;
                    if v.is_zero() {
                        m[r].remove(&j);
                    } else {
                        m[r].insert(j, v);
                    }
                }
            }
        }
        Rref {
            rank,
            pivot_cols,
            reduced: Matrix {
                rows: self.rows,
                cols: self.cols,
                data: m,
            },
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of the right kernel. Each vector is normalized so its first
    /// nonzero entry is one; the count is `cols - rank`.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let Rref {
            pivot_cols,
            reduced,
            ..
        } = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivot_cols.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (i, &pc) in pivot_cols.iter().enumerate() {
                let c = reduced.get(i, free);
                if !c.is_zero() {
                    v[pc] = T::zero() - c;
                }
            }
            normalize_leading(&mut v);
            basis.push(v);
        }
        basis
    }
}

/// Scales a vector so its first nonzero entry is one.
pub fn normalize_leading<T: Scalar>(v: &mut [T]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        if lead != T::one() {
            for x in v.iter_mut() {
                *x = x.clone() / lead.clone();
            }
        }
    }
}

/// Rank of the span of a set of vectors, stacked as rows.
pub fn span_rank<T: Scalar>(vectors: &[Vec<T>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(vectors.to_vec()).rank()
}

/// True when the two sets of vectors span the same space (exact ranks).
pub fn same_span<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> bool {
    let ra = span_rank(a);
    let rb = span_rank(b);
    if ra != rb {
        return false;
    }
    let mut all: Vec<Vec<T>> = a.to_vec();
    all.extend(b.to_vec());
    span_rank(&all) == ra
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num::Zero;

    fn rat(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    fn int_matrix(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x, 1)).collect())
                .collect(),
        )
    }

    #[test]
    fn rref_identity() {
        let m: Matrix<Rational> = Matrix::identity(3);
        let r = m.rref();
        assert_eq!(r.rank, 3);
        assert_eq!(r.pivot_cols, vec![0, 1, 2]);
        assert_eq!(r.reduced, Matrix::identity(3));
    }

    #[test]
    fn rref_rank_one() {
        let m = int_matrix(&[&[1, 1], &[1, 1]]);
        assert_eq!(m.rref().rank, 1);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![rat(1, 1), rat(-1, 1)]);
    }

    #[test]
    fn nullspace_of_identity_is_empty() {
        let m: Matrix<Rational> = Matrix::identity(4);
        assert!(m.nullspace().is_empty());
    }

    #[test]
    fn nullspace_vectors_are_in_the_kernel() {
        let m = int_matrix(&[&[2, 4, 6, 1], &[1, 2, 3, 0], &[0, 0, 0, 1]]);
        for v in m.nullspace() {
            let image = m.matvec(&v).unwrap();
            assert!(image.iter().all(|x| x.is_zero()));
        }
        assert_eq!(m.nullspace().len(), 4 - m.rank());
    }

    #[test]
    fn matvec_identity_and_zero() {
        let v = vec![rat(3, 2), rat(-1, 7)];
        let id: Matrix<Rational> = Matrix::identity(2);
        assert_eq!(id.matvec(&v).unwrap(), v);
        let z: Matrix<Rational> = Matrix::zeros(2, 2);
        assert_eq!(z.matvec(&v).unwrap(), vec![rat(0, 1), rat(0, 1)]);
    }

    #[test]
    fn matmul_dimension_mismatch() {
        let a: Matrix<Rational> = Matrix::zeros(2, 3);
        let b: Matrix<Rational> = Matrix::zeros(2, 3);
        assert!(a.matmul(&b).is_err());
        assert!(a.matvec(&[rat(1, 1)]).is_err());
    }

    #[test]
    fn rref_is_deterministic() {
        let m = int_matrix(&[&[0, 2, 1], &[3, 6, 0], &[3, 8, 1]]);
        let a = m.rref();
        let b = m.rref();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let m = int_matrix(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn works_for_f64_as_well() {
        let m = Matrix::from_rows(vec![vec![2.0f64, 0.0], vec![0.0, 4.0]]);
        let r = m.rref();
        assert_eq!(r.rank, 2);
        assert_eq!(m.matvec(&[1.0, 0.5]).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn same_span_detects_reordering() {
        let a = vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]];
        let b = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(-1, 1)]];
        assert!(same_span(&a, &b));
        let c = vec![vec![rat(1, 1), rat(1, 1)]];
        assert!(!same_span(&a, &c));
    }
}
