//! Dense matrices over a finite field.

use crate::gf::{FieldCtx, Felt};

/// Row-major dense matrix. Field context is passed to each operation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Felt>,
}

/// Reduced row echelon form with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    /// Nonzero rows only, each with a leading 1 in its pivot column.
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds from row vectors; all rows must share a length. An empty list gives a 0 x `cols` matrix.
    pub fn from_rows(rows: &[Vec<Felt>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Felt {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Felt) {
        self.data[i * self.cols + j] = v;
    }
    #[inline]
    pub fn row(&self, i: usize) -> &[Felt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Felt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Felt]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn to_rows(&self) -> Vec<Vec<Felt>> {
        self.row_iter().map(|r| r.to_vec()).collect()
    }

    pub fn push_row(&mut self, r: &[Felt]) {
        assert_eq!(r.len(), self.cols);
        self.data.extend_from_slice(r);
        self.rows += 1;
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                m.set(i, k, self.get(i, c));
            }
        }
        m
    }

    pub fn mul(&self, f: &FieldCtx, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let mut acc = vec![0; other.cols];
            for k in 0..self.cols {
                f.axpy(&mut acc, self.get(i, k), other.row(k));
            }
            out.row_mut(i).copy_from_slice(&acc);
        }
        out
    }

    /// M v
    pub fn mul_vec(&self, f: &FieldCtx, v: &[Felt]) -> Vec<Felt> {
        assert_eq!(self.cols, v.len());
        self.row_iter().map(|r| f.dot(r, v)).collect()
    }

    /// v^T M, i.e. the combination of rows with coefficients v.
    pub fn combine_rows(&self, f: &FieldCtx, v: &[Felt]) -> Vec<Felt> {
        assert_eq!(self.rows, v.len());
        let mut acc = vec![0; self.cols];
        for (i, &c) in v.iter().enumerate() {
            f.axpy(&mut acc, c, self.row(i));
        }
        acc
    }

    /// Gauss-Jordan elimination in place. Returns the pivot columns; rows past the rank are zero.
    pub fn rref_in_place(&mut self, f: &FieldCtx) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        let mut pivot_row = vec![0; self.cols];
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c));
            f.scale(self.row_mut(r), inv);
            pivot_row.copy_from_slice(self.row(r));
            for i in 0..self.rows {
                if i != r {
                    let v = self.get(i, c);
                    if v != 0 {
                        f.axpy(self.row_mut(i), f.neg(v), &pivot_row);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self, f: &FieldCtx) -> Rref {
        let mut m = self.clone();
        let pivots = m.rref_in_place(f);
        m.data.truncate(pivots.len() * m.cols);
        m.rows = pivots.len();
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        self.clone().rref_in_place(f).len()
    }

    /// Basis (as rows) of the right kernel {x : M x = 0}.
    pub fn nullspace(&self, f: &FieldCtx) -> Matrix {
        self.rref(f).nullspace(f)
    }

    /// Some x with M x = b, or `None` if inconsistent.
    pub fn solve(&self, f: &FieldCtx, b: &[Felt]) -> Option<Vec<Felt>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            aug.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.rref_in_place(f);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (j, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(j, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self, f: &FieldCtx) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            aug.row_mut(i)[..n].copy_from_slice(self.row(i));
            aug.set(i, n + i, 1);
        }
        let pivots = aug.rref_in_place(f);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Some(aug.select_columns(&cols))
    }

    pub fn determinant(&self, f: &FieldCtx) -> Felt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| m.get(i, c) != 0) else { return 0 };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let inv = f.inv(piv);
            let pr: Vec<Felt> = m.row(c).to_vec();
            for i in c + 1..n {
                let v = m.get(i, c);
                if v != 0 {
                    f.axpy(m.row_mut(i), f.neg(f.mul(v, inv)), &pr);
                }
            }
        }
        det
    }
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Basis of {x : R x = 0}, one vector per non-pivot column.
    pub fn nullspace(&self, f: &FieldCtx) -> Matrix {
        let n = self.matrix.cols();
        let mut is_pivot = vec![false; n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let mut out = Matrix::zeros(0, n);
        let mut v = vec![0; n];
        for c in (0..n).filter(|&c| !is_pivot[c]) {
            v.iter_mut().for_each(|x| *x = 0);
            v[c] = 1;
            for (j, &p) in self.pivots.iter().enumerate() {
                v[p] = f.neg(self.matrix.get(j, c));
            }
            out.push_row(&v);
        }
        out
    }

    /// Reduces `v` against the basis; the result is zero iff `v` is in the row space.
    pub fn reduce(&self, f: &FieldCtx, v: &[Felt]) -> Vec<Felt> {
        let mut w = v.to_vec();
        for (j, &p) in self.pivots.iter().enumerate() {
            let c = w[p];
            if c != 0 {
                f.axpy(&mut w, f.neg(c), self.matrix.row(j));
            }
        }
        w
    }

    pub fn contains(&self, f: &FieldCtx, v: &[Felt]) -> bool {
        self.reduce(f, v).iter().all(|&x| x == 0)
    }

    /// Coefficients of `v` in the RREF basis, assuming membership.
    pub fn coordinates(&self, v: &[Felt]) -> Vec<Felt> {
        self.pivots.iter().map(|&p| v[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_matrix(f: &FieldCtx, rows: usize, cols: usize, seed: &[u32]) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, seed[(i * cols + j) % seed.len()] % f.q());
            }
        }
        m
    }

    #[test]
    fn rank_and_nullspace_small() {
        let f = FieldCtx::new(7, 1).unwrap();
        let m = Matrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]], 3);
        assert_eq!(m.rank(&f), 2);
        let ns = m.nullspace(&f);
        assert_eq!(ns.rows(), 1);
        assert!(m.mul_vec(&f, ns.row(0)).iter().all(|&x| x == 0));
    }

    #[test]
    fn inverse_and_determinant() {
        let f = FieldCtx::new(13, 1).unwrap();
        let m = Matrix::from_rows(&[vec![1, 1, 1], vec![1, 3, 9], vec![1, 9, 3]], 3);
        // Vandermonde determinant (3-1)(9-1)(9-3) = 96 = 5 mod 13
        assert_eq!(m.determinant(&f), 5);
        let inv = m.inverse(&f).unwrap();
        assert_eq!(m.mul(&f, &inv), Matrix::identity(3));
        let sing = Matrix::from_rows(&[vec![1, 2], vec![2, 4]], 2);
        assert!(sing.inverse(&f).is_none());
        assert_eq!(sing.determinant(&f), 0);
    }

    proptest! {
        #[test]
        fn rank_nullity(seed in proptest::collection::vec(0u32..16, 1..40), rows in 1usize..6, cols in 1usize..7) {
            let f = FieldCtx::new(2, 4).unwrap();
            let m = rand_matrix(&f, rows, cols, &seed);
            let ns = m.nullspace(&f);
            prop_assert_eq!(m.rank(&f) + ns.rows(), cols);
            for v in ns.row_iter() {
                prop_assert!(m.mul_vec(&f, v).iter().all(|&x| x == 0));
            }
        }

        #[test]
        fn solve_finds_solutions(seed in proptest::collection::vec(0u32..11, 1..40), x in proptest::collection::vec(0u32..11, 5)) {
            let f = FieldCtx::new(11, 1).unwrap();
            let m = rand_matrix(&f, 4, 5, &seed);
            let b = m.mul_vec(&f, &x);
            let y = m.solve(&f, &b).unwrap();
            prop_assert_eq!(m.mul_vec(&f, &y), b);
        }
    }
}
