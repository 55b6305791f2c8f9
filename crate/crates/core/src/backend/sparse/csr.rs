use crate::backend::LinearOperator;
use crate::scalar::Scalar;
use num_complex::Complex64;

/// Zero-based compressed sparse rows with every stored entry explicit
/// (no implied symmetric half), column indices sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    n: usize,
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    /// Builds from zero-based `(row, col, value)` triplets; duplicates are
    /// summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut ptr = vec![0usize; n + 1];
        let mut idx = Vec::with_capacity(triplets.len());
        let mut val: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *val.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((i, j));
            ptr[i + 1] += 1;
            idx.push(j);
            val.push(v);
        }
        for i in 0..n {
            ptr[i + 1] += ptr[i];
        }
        Self { n, ptr, idx, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.idx
    }

    pub fn values(&self) -> &[T] {
        &self.val
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.ptr[i]..self.ptr[i + 1];
        self.idx[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.ptr[i]..self.ptr[i + 1];
        match self.idx[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => T::zero(),
        }
    }

    /// Position of `(i, j)` in the value array.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.ptr[i]..self.ptr[i + 1];
        self.idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

impl<T: Scalar> LinearOperator<T> for Csr<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], y: &mut [T], ncols: usize) {
        let n = self.n;
        for c in 0..ncols {
            let xc = &x[c * n..(c + 1) * n];
            for i in 0..n {
                y[c * n + i] = self.row(i).map(|(j, a)| a * xc[j]).sum();
            }
        }
    }
}

/// `y = (z B - A) x` for one complex column; `b = None` is the identity.
pub(crate) fn shifted_apply<T: Scalar>(a: &Csr<T>, b: Option<&Csr<T>>, z: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = match b {
            Some(b) => z * b.row(i).map(|(j, v)| v.to_complex() * x[j]).sum::<Complex64>(),
            None => z * x[i],
        };
        s -= a.row(i).map(|(j, v)| v.to_complex() * x[j]).sum::<Complex64>();
        *yi = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_rows_sorted() {
        let m = Csr::from_triplets(3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 0, 3.0), (1, 2, 4.0), (2, 2, 1.0)]);
        assert_eq!(m.row_ptr(), &[0, 1, 3, 4]);
        assert_eq!(m.col_idx(), &[0, 0, 2, 2]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(2, 0), 0.0);
    }

    #[test]
    fn matvec_handles_empty_rows() {
        let m = Csr::from_triplets(3, vec![(0, 1, 2.0), (2, 0, -1.0)]);
        let mut y = vec![9.0; 6];
        m.apply(&[1.0, 2.0, 3.0, 0.0, 1.0, 0.0], &mut y, 2);
        assert_eq!(y, vec![4.0, 0.0, -1.0, 2.0, 0.0, 0.0]);
    }
}
