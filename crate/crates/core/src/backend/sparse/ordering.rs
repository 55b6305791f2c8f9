use super::csr::Csr;
use crate::scalar::Scalar;

/// Fill-reducing symmetric permutation of the pattern of `a + a^T`.
/// Returns `perm` with new index `k` holding old index `perm[k]`.
pub fn fill_reducing_order<T: Scalar>(a: &Csr<T>) -> Vec<usize> {
    let n = a.dim();
    if n == 0 {
        return Vec::new();
    }
    // Column pointers of the symmetric pattern; rows are sorted by the Csr.
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            cols[j].push(i);
            if i != j {
                cols[i].push(j);
            }
        }
    }
    let mut ap = Vec::with_capacity(n + 1);
    let mut ai = Vec::new();
    ap.push(0usize);
    for c in &mut cols {
        c.sort_unstable();
        c.dedup();
        ai.extend_from_slice(c);
        ap.push(ai.len());
    }
    match amd::order(n, &ap, &ai, &amd::Control::default()) {
        Ok((perm, _, _)) => perm,
        Err(_) => (0..n).collect(),
    }
}
