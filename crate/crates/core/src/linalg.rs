//! Singular values, null spaces, full-spark tests and subset enumeration.
//!
//! The decompositions are delegated to nalgebra's bidiagonal SVD; everything
//! here is about ordering, thresholds and combinatorics around it.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative rank tolerance (relative to the largest singular value).
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Default cap on the number of column subsets any exhaustive routine visits.
pub const DEFAULT_SUBSET_BUDGET: u128 = 2_000_000;

/// Singular values of `a`, sorted non-increasingly; length `min(rows, cols)`.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = a
        .to_nalgebra()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Left singular vectors and singular values of `a`, ordered by
/// non-increasing singular value. Column `i` of the returned `rows x rows'`
/// matrix pairs with `values[i]`, where `rows' = min(rows, cols)`.
pub fn left_singular_pairs(a: &Matrix) -> (Vec<f64>, Matrix) {
    let svd = a.to_nalgebra().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = Matrix::from_fn(a.rows(), order.len(), |r, c| u[(r, order[c])])
        .expect("finite singular vectors");
    (values, u_sorted)
}

/// Orthonormal basis of the null space of `m` (`rows x cols`), as a list of
/// length-`cols` vectors. A direction counts as null when its singular value
/// is at most `abs_tol`. Vectors come ordered by increasing singular value.
pub fn null_space_basis(m: &nalgebra::DMatrix<f64>, abs_tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = m.shape();
    // Pad wide systems so the thin SVD still returns a full set of right vectors.
    let padded;
    let target = if rows < cols {
        let mut p = nalgebra::DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = target.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut null: Vec<(f64, Vec<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= abs_tol)
        .map(|(i, &s)| (s, v_t.row(i).iter().copied().collect()))
        .collect();
    null.sort_by(|a, b| a.0.total_cmp(&b.0));
    null.into_iter().map(|(_, v)| v).collect()
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Advances `idx` (a strictly increasing k-subset of `0..n`) to the next
/// subset in lexicographic order. Returns `false` once exhausted.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        if k == 0 || !next_combination(&mut idx, n) {
            break;
        }
    }
}

/// Whether every `d`-column subset of the `d x D` matrix `a` is invertible,
/// judged by `sigma_min > tol * sigma_max` on each subset.
pub fn is_full_spark(a: &Matrix, tol: f64, budget: u128) -> Result<bool> {
    let (d, cols) = (a.rows(), a.cols());
    if cols < d {
        return Err(Error::InvalidInput(alloc::format!(
            "full spark needs at least as many columns as rows, got {d}x{cols}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let required = binomial(cols, d);
    if required > budget {
        return Err(Error::BudgetExceeded {
            required,
            budget,
            hint: "raise the budget to enumerate every column subset",
        });
    }
    let mut full = true;
    for_each_combination(cols, d, |subset| {
        if !full {
            return;
        }
        let s = singular_values(&a.select_columns(subset));
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if !(hi > 0.0 && lo > tol * hi) {
            full = false;
        }
    });
    Ok(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_singular_values() {
        let s = singular_values(&Matrix::identity(2).unwrap());
        assert_eq!(s.len(), 2);
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duplicated_direction_is_not_full_spark() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(!is_full_spark(&a, DEFAULT_RANK_TOL, DEFAULT_SUBSET_BUDGET).unwrap());
        assert!(is_full_spark(&Matrix::identity(2).unwrap(), DEFAULT_RANK_TOL, 10).unwrap());
    }

    #[test]
    fn full_spark_budget_is_enforced() {
        let a = Matrix::from_fn(3, 7, |i, j| (i * 7 + j) as f64).unwrap();
        let err = is_full_spark(&a, DEFAULT_RANK_TOL, 34).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 35, .. }));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 2), 45);
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn combination_walk_is_lexicographic_and_complete() {
        let mut seen = vec![];
        for_each_combination(5, 3, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn null_space_of_wide_system() {
        // x + y + z = 0 has a two-dimensional null space.
        let m = nalgebra::DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let basis = null_space_basis(&m, 1e-12);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(v.iter().sum::<f64>().abs() < 1e-12);
            assert!((crate::matrix::norm(v) - 1.0).abs() < 1e-12);
        }
    }
}
