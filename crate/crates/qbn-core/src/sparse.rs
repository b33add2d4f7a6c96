//! Column-sparse complex matrix used for operators and superoperators.
//!
//! Columns hold `(row, value)` pairs sorted by row with exact zeros dropped.
//! The operators built here (ladder operators, their products, diagonal
//! operators, Lindblad superoperators) have very few entries per column, so
//! per-column merge is cheap and products never densify.

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SparseMatrix {
    dim: usize,
    cols: Vec<Vec<(u32, Complex64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim as u64 <= u32::MAX as u64 + 1, "dimension exceeds u32 indexing");
        SparseMatrix { dim, cols: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for c in 0..dim {
            m.cols[c].push((c as u32, Complex64::ONE));
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (c, &z) in diag.iter().enumerate() {
            if z != Complex64::ZERO {
                m.cols[c].push((c as u32, z));
            }
        }
        m
    }

    /// Builds from raw triplets; duplicate positions are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut m = Self::zeros(dim);
        for (r, c, z) in triplets {
            debug_assert!(r < dim && c < dim);
            m.cols[c].push((r as u32, z));
        }
        for col in &mut m.cols {
            normalize_col(col);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match self.cols[col].binary_search_by_key(&(row as u32), |e| e.0) {
            Ok(i) => self.cols[col][i].1,
            Err(_) => Complex64::ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, z) in col {
                m.cols[r as usize].push((c as u32, z.conj()));
            }
        }
        // Gathered in increasing source-column order, so each target column
        // is already sorted by row.
        m
    }

    pub fn scale(&self, z: Complex64) -> Self {
        if z == Complex64::ZERO {
            return Self::zeros(self.dim);
        }
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, v * z)).collect())
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| merge_cols(a, b, Complex64::ONE))
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| merge_cols(a, b, -Complex64::ONE))
            .collect();
        SparseMatrix { dim: self.dim, cols }
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut cols = Vec::with_capacity(self.dim);
        let mut scratch: Vec<(u32, Complex64)> = Vec::new();
        for bcol in &other.cols {
            scratch.clear();
            for &(t, bz) in bcol {
                for &(r, az) in &self.cols[t as usize] {
                    scratch.push((r, az * bz));
                }
            }
            let mut col = scratch.clone();
            normalize_col(&mut col);
            cols.push(col);
        }
        SparseMatrix { dim: self.dim, cols }
    }

    /// `y = self · x` for a dense vector.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex64::ZERO; self.dim];
        for (c, &xc) in x.iter().enumerate() {
            if xc == Complex64::ZERO {
                continue;
            }
            for &(r, z) in &self.cols[c] {
                y[r as usize] += z * xc;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|col| col.iter().map(|(_, z)| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.entry(i, i)).collect()
    }

    pub fn max_offdiagonal_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, z) in col {
                if r as usize != c {
                    m = m.max(z.norm());
                }
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, z)| (r as usize, c, z)))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (r, c, z) in self.iter_entries() {
            m[(r, c)] = z;
        }
        m
    }

    pub fn from_dense(m: &nalgebra::DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for c in 0..dim {
            for r in 0..dim {
                let z = m[(r, c)];
                if z != Complex64::ZERO {
                    out.cols[c].push((r as u32, z));
                }
            }
        }
        out
    }
}

/// Sorts by row, sums duplicates, drops exact zeros.
fn normalize_col(col: &mut Vec<(u32, Complex64)>) {
    if col.len() > 1 {
        col.sort_unstable_by_key(|e| e.0);
        let mut out = 0usize;
        for i in 0..col.len() {
            let (row, val) = col[i];
            if out > 0 && col[out - 1].0 == row {
                col[out - 1].1 += val;
            } else {
                col[out] = (row, val);
                out += 1;
            }
        }
        col.truncate(out);
    }
    col.retain(|&(_, z)| z != Complex64::ZERO);
}

/// Merges two sorted columns as `a + factor·b`.
fn merge_cols(
    a: &[(u32, Complex64)],
    b: &[(u32, Complex64)],
    factor: Complex64,
) -> Vec<(u32, Complex64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, factor * b[j].1));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let z = a[i].1 + factor * b[j].1;
                if z != Complex64::ZERO {
                    out.push((a[i].0, z));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend(b[j..].iter().map(|&(r, z)| (r, factor * z)));
    out.retain(|&(_, z)| z != Complex64::ZERO);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_product() {
        let id = SparseMatrix::identity(4);
        let a = SparseMatrix::from_triplets(4, vec![(0, 1, c(2.0, 0.0)), (3, 2, c(0.0, 1.0))]);
        assert_eq!(id.matmul(&a), a);
        assert_eq!(a.matmul(&id), a);
        assert_eq!(a.entry(0, 1), c(2.0, 0.0));
        assert_eq!(a.entry(1, 0), Complex64::ZERO);
    }

    #[test]
    fn adjoint_involution_and_conjugation() {
        let a = SparseMatrix::from_triplets(3, vec![(0, 1, c(2.0, 3.0)), (2, 2, c(1.0, -1.0))]);
        let ad = a.adjoint();
        assert_eq!(ad.entry(1, 0), c(2.0, -3.0));
        assert_eq!(ad.adjoint(), a);
    }

    #[test]
    fn exact_cancellation_drops_entries() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, c(1.5, 0.0))]);
        let d = a.sub(&a);
        assert_eq!(d.nnz(), 0);
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let a = SparseMatrix::from_triplets(2, vec![(1, 0, c(1.0, 0.0)), (1, 0, c(2.0, 0.0))]);
        assert_eq!(a.entry(1, 0), c(3.0, 0.0));
        assert_eq!(a.nnz(), 1);
    }

    #[test]
    fn apply_matches_dense() {
        let a = SparseMatrix::from_triplets(
            3,
            vec![(0, 1, c(2.0, 0.0)), (2, 0, c(0.0, 1.0)), (1, 1, c(-1.0, 0.5))],
        );
        let x = vec![c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)];
        let y = a.apply(&x);
        let dense = a.to_dense();
        let xv = nalgebra::DVector::from_vec(x);
        let yd = &dense * &xv;
        for i in 0..3 {
            assert!((y[i] - yd[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn dense_roundtrip() {
        let a = SparseMatrix::from_triplets(3, vec![(0, 2, c(1.0, 2.0)), (1, 1, c(3.0, 0.0))]);
        assert_eq!(SparseMatrix::from_dense(&a.to_dense()), a);
    }
}
