use alloc::vec::Vec;

/// Solves `a · x = b` for a dense square system by Gaussian elimination
/// with partial pivoting. `None` if the matrix is (numerically) singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let prow = &upper[col];
        for (offset, row) in lower.iter_mut().enumerate() {
            let factor = row[col] / prow[col];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                row[c] -= factor * prow[c];
            }
            b[col + 1 + offset] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for c in i + 1..n {
            acc -= a[i][c] * x[c];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}
