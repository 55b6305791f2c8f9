use super::csr::Csr;
use super::ordering::fill_reducing_order;
use crate::backend::{ShiftedFactor, SolverError};
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pattern-only part of the factorization of `z B - A`, shared by all shifts.
///
/// The permuted matrix `M(i, j) = (z B - A)(perm[i], perm[j])` is held by
/// columns together with, for each entry, its position in `A` and `B`. The
/// factor patterns are those of the symmetric elimination: `L(:, j)` holds
/// the rows `k > j` whose elimination reach contains `j`, and `U(:, j)` the
/// transpose.
#[derive(Debug, Clone)]
pub struct SymbolicLu {
    n: usize,
    perm: Vec<usize>,
    mp: Vec<usize>,
    mi: Vec<usize>,
    a_pos: Vec<Option<usize>>,
    b_pos: Vec<Option<usize>>,
    lp: Vec<usize>,
    li: Vec<usize>,
    up: Vec<usize>,
    ui: Vec<usize>,
}

impl SymbolicLu {
    pub fn analyze<T: Scalar>(a: &Csr<T>, b: Option<&Csr<T>>) -> Self {
        let n = a.dim();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 1.0));
            triplets.extend(a.row(i).map(|(j, _)| (i, j, 1.0)));
            if let Some(b) = b {
                triplets.extend(b.row(i).map(|(j, _)| (i, j, 1.0)));
            }
        }
        // Symmetrize in case a caller's pattern is not.
        let mirrored: Vec<_> = triplets.iter().map(|&(i, j, v)| (j, i, v)).collect();
        triplets.extend(mirrored);
        let pattern = Csr::from_triplets(n, triplets);
        let perm = fill_reducing_order(&pattern);
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }

        // Permuted pattern by columns; symmetric so rows of the original
        // pattern serve as columns.
        let mut mp = vec![0usize];
        let mut mi = Vec::with_capacity(pattern.nnz());
        let mut a_pos = Vec::with_capacity(pattern.nnz());
        let mut b_pos = Vec::with_capacity(pattern.nnz());
        for j in 0..n {
            let old_j = perm[j];
            let mut rows: Vec<(usize, usize)> = pattern.row(old_j).map(|(old_i, _)| (pinv[old_i], old_i)).collect();
            rows.sort_unstable();
            for (i, old_i) in rows {
                mi.push(i);
                a_pos.push(a.position(old_i, old_j));
                b_pos.push(b.and_then(|b| b.position(old_i, old_j)));
            }
            mp.push(mi.len());
        }

        let parent = etree(n, &mp, &mi);

        // Row k of L is the reach of the upper part of column k in the tree.
        let mut lcols: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut ucols: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            mark[k] = k;
            for &i in &mi[mp[k]..mp[k + 1]] {
                let mut j = i;
                while j < k && mark[j] != k {
                    mark[j] = k;
                    ucols[k].push(j);
                    lcols[j].push(k);
                    j = parent[j];
                }
            }
            ucols[k].sort_unstable();
        }
        let flatten = |cols: Vec<Vec<usize>>| {
            let mut p = vec![0usize];
            let mut idx = Vec::new();
            for c in cols {
                idx.extend(c);
                p.push(idx.len());
            }
            (p, idx)
        };
        let (lp, li) = flatten(lcols);
        let (up, ui) = flatten(ucols);
        Self { n, perm, mp, mi, a_pos, b_pos, lp, li, up, ui }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Entries of `L` below the diagonal.
    pub fn factor_nnz(&self) -> usize {
        self.li.len()
    }
}

/// Elimination tree of a symmetric pattern given by columns
/// (`usize::MAX` marks roots).
fn etree(n: usize, cp: &[usize], ci: &[usize]) -> Vec<usize> {
    let mut parent = vec![usize::MAX; n];
    let mut ancestor = vec![usize::MAX; n];
    for k in 0..n {
        for &i in &ci[cp[k]..cp[k + 1]] {
            let mut i = i;
            while i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == usize::MAX {
                    parent[i] = k;
                    break;
                }
                if next == k {
                    break;
                }
                i = next;
            }
        }
    }
    parent
}

/// Numeric `M = L U` (unit `L`) on a [`SymbolicLu`] pattern, without
/// pivoting.
///
/// For `z` off the real axis `-i (z B - A)` has Hermitian part
/// `Im(z) B`, definite for positive definite `B`, so every leading minor is
/// nonzero and no pivoting is needed.
#[derive(Debug, Clone)]
pub struct SparseLu {
    symbolic: Arc<SymbolicLu>,
    m: Vec<Complex64>,
    l: Vec<Complex64>,
    u: Vec<Complex64>,
    diag: Vec<Complex64>,
    refinement_steps: usize,
}

impl SparseLu {
    pub fn factor<T: Scalar>(
        symbolic: Arc<SymbolicLu>,
        a: &Csr<T>,
        b: Option<&Csr<T>>,
        z: Complex64,
        refinement_steps: usize,
    ) -> Result<Self, SolverError> {
        let s = &*symbolic;
        let n = s.n;
        let mut m = vec![ZERO; s.mi.len()];
        for (k, mk) in m.iter_mut().enumerate() {
            let j = col_of(&s.mp, k);
            let i = s.mi[k];
            let bij = match b {
                Some(b) => s.b_pos[k].map_or(ZERO, |p| b.values()[p].to_complex()),
                None if i == j => Complex64::new(1.0, 0.0),
                None => ZERO,
            };
            let aij = s.a_pos[k].map_or(ZERO, |p| a.values()[p].to_complex());
            *mk = z * bij - aij;
        }

        let mut l = vec![ZERO; s.li.len()];
        let mut u = vec![ZERO; s.ui.len()];
        let mut diag = vec![ZERO; n];
        let mut x = vec![ZERO; n];
        for j in 0..n {
            for k in s.mp[j]..s.mp[j + 1] {
                x[s.mi[k]] = m[k];
            }
            for q in s.up[j]..s.up[j + 1] {
                let k = s.ui[q];
                let ukj = x[k];
                u[q] = ukj;
                if ukj != ZERO {
                    for r in s.lp[k]..s.lp[k + 1] {
                        x[s.li[r]] -= l[r] * ukj;
                    }
                }
            }
            let pivot = x[j];
            if pivot == ZERO || !pivot.is_finite() {
                return Err(SolverError::ZeroPivot(j));
            }
            diag[j] = pivot;
            for r in s.lp[j]..s.lp[j + 1] {
                l[r] = x[s.li[r]] / pivot;
            }
            for k in s.mp[j]..s.mp[j + 1] {
                x[s.mi[k]] = ZERO;
            }
            for q in s.up[j]..s.up[j + 1] {
                x[s.ui[q]] = ZERO;
            }
            for r in s.lp[j]..s.lp[j + 1] {
                x[s.li[r]] = ZERO;
            }
            x[j] = ZERO;
        }
        Ok(Self { symbolic, m, l, u, diag, refinement_steps })
    }

    fn lu_solve(&self, x: &mut [Complex64]) {
        let s = &*self.symbolic;
        for j in 0..s.n {
            let xj = x[j];
            if xj != ZERO {
                for r in s.lp[j]..s.lp[j + 1] {
                    x[s.li[r]] -= self.l[r] * xj;
                }
            }
        }
        for j in (0..s.n).rev() {
            x[j] /= self.diag[j];
            let xj = x[j];
            for q in s.up[j]..s.up[j + 1] {
                x[s.ui[q]] -= self.u[q] * xj;
            }
        }
    }

    fn lu_solve_adjoint(&self, x: &mut [Complex64]) {
        let s = &*self.symbolic;
        for j in 0..s.n {
            let mut v = x[j];
            for q in s.up[j]..s.up[j + 1] {
                v -= self.u[q].conj() * x[s.ui[q]];
            }
            x[j] = v / self.diag[j].conj();
        }
        for j in (0..s.n).rev() {
            let mut v = x[j];
            for r in s.lp[j]..s.lp[j + 1] {
                v -= self.l[r].conj() * x[s.li[r]];
            }
            x[j] = v;
        }
    }

    // r = c - M x (or M^H x)
    fn residual(&self, c: &[Complex64], x: &[Complex64], adjoint: bool, r: &mut [Complex64]) {
        let s = &*self.symbolic;
        r.copy_from_slice(c);
        for j in 0..s.n {
            for k in s.mp[j]..s.mp[j + 1] {
                let i = s.mi[k];
                if adjoint {
                    r[j] -= self.m[k].conj() * x[i];
                } else {
                    r[i] -= self.m[k] * x[j];
                }
            }
        }
    }

    fn solve_column(&self, rhs: &mut [Complex64], adjoint: bool) {
        let s = &*self.symbolic;
        let n = s.n;
        let c: Vec<Complex64> = s.perm.iter().map(|&p| rhs[p]).collect();
        let mut x = c.clone();
        let run = |v: &mut [Complex64]| if adjoint { self.lu_solve_adjoint(v) } else { self.lu_solve(v) };
        run(&mut x);
        let mut r = vec![ZERO; n];
        for _ in 0..self.refinement_steps {
            self.residual(&c, &x, adjoint, &mut r);
            run(&mut r);
            for (xi, di) in x.iter_mut().zip(&r) {
                *xi += di;
            }
        }
        for (k, &p) in s.perm.iter().enumerate() {
            rhs[p] = x[k];
        }
    }
}

fn col_of(cp: &[usize], k: usize) -> usize {
    cp.partition_point(|&p| p <= k) - 1
}

impl ShiftedFactor for SparseLu {
    fn solve(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.symbolic.n;
        for c in rhs[..n * ncols].chunks_mut(n.max(1)) {
            self.solve_column(c, false);
        }
        Ok(())
    }

    fn solve_adjoint(&self, rhs: &mut [Complex64], ncols: usize) -> Result<(), SolverError> {
        let n = self.symbolic.n;
        for c in rhs[..n * ncols].chunks_mut(n.max(1)) {
            self.solve_column(c, true);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pencil(n: usize) -> (Csr<f64>, Csr<f64>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..n {
            a.push((i, i, 2.0 + i as f64 * 0.1));
            b.push((i, i, 3.0));
            let j = (i * 5 + 3) % n;
            if j != i {
                a.push((i, j, -0.7));
                a.push((j, i, -0.7));
                b.push((i, j, 0.4));
                b.push((j, i, 0.4));
            }
            if i + 1 < n {
                a.push((i, i + 1, -1.0));
                a.push((i + 1, i, -1.0));
            }
        }
        (Csr::from_triplets(n, a), Csr::from_triplets(n, b))
    }

    #[test]
    fn solves_match_the_shifted_operator() {
        let n = 40;
        let (a, b) = pencil(n);
        let sym = Arc::new(SymbolicLu::analyze(&a, Some(&b)));
        let z = c(0.8, 0.6);
        let lu = SparseLu::factor(sym, &a, Some(&b), z, 0).unwrap();
        let rhs: Vec<Complex64> = (0..n).map(|i| c((i % 7) as f64 - 3.0, (i % 3) as f64)).collect();

        let mut x = rhs.clone();
        lu.solve(&mut x, 1).unwrap();
        let mut y = vec![ZERO; n];
        super::super::csr::shifted_apply(&a, Some(&b), z, &x, &mut y);
        for (r, e) in y.iter().zip(&rhs) {
            assert!((r - e).norm() < 1e-11);
        }

        let mut x = rhs.clone();
        lu.solve_adjoint(&mut x, 1).unwrap();
        super::super::csr::shifted_apply(&a, Some(&b), z.conj(), &x, &mut y);
        for (r, e) in y.iter().zip(&rhs) {
            assert!((r - e).norm() < 1e-11);
        }
    }

    #[test]
    fn tridiagonal_has_no_fill() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let sym = SymbolicLu::analyze(&Csr::from_triplets(n, t), None);
        assert_eq!(sym.factor_nnz(), n - 1);
    }

    #[test]
    fn etree_of_arrow_points_to_last() {
        // Lower arrow: every column connects to the last one.
        let n = 5;
        let mut cp = vec![0];
        let mut ci = vec![];
        for k in 0..n {
            if k == n - 1 {
                ci.extend(0..n);
            } else {
                ci.extend([k, n - 1]);
            }
            cp.push(ci.len());
        }
        assert_eq!(etree(n, &cp, &ci), vec![4, 4, 4, 4, usize::MAX]);
    }
}
