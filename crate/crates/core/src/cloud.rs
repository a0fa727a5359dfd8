//! Point clouds, the row-permutation action, and sorting.

use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};
use crate::matrix::Matrix;
use crate::perm::Permutation;
use crate::rng::normal_vec;

/// `n` points in `R^d`, one per row.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud(Matrix);

impl PointCloud {
    pub fn new(data: Matrix) -> Self {
        Self(data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Matrix::from_rows(rows).map(Self)
    }

    /// Cloud with i.i.d. `N(0, scale^2)` coordinates.
    pub fn gaussian(n: usize, d: usize, scale: f64, rng: &mut impl rand::Rng) -> Result<Self> {
        let data = normal_vec(rng, n * d)
            .into_iter()
            .map(|v| v * scale)
            .collect();
        Matrix::new(n, d, data).map(Self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(self.0.scale(t))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }
}

impl From<Matrix> for PointCloud {
    fn from(m: Matrix) -> Self {
        Self(m)
    }
}

/// Sorts non-decreasingly. Ties are value-identical, so the result does not
/// depend on the input order of equal entries (`-0.0` orders before `0.0`).
pub fn sort_ascending(v: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(invalid(alloc::format!(
            "non-finite entry at position {}",
            i + 1
        )));
    }
    let mut out = v.to_vec();
    sort_finite(&mut out);
    Ok(out)
}

#[inline]
pub(crate) fn sort_finite(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

/// Row `i` of the result is row `sigma(i)` of `x`.
pub fn permute_rows(x: &PointCloud, sigma: &Permutation) -> Result<PointCloud> {
    check_dim("permutation length", x.n(), sigma.len())?;
    let mut data = Vec::with_capacity(x.n() * x.d());
    for i in 0..x.n() {
        data.extend_from_slice(x.point(sigma.apply(i)));
    }
    Ok(PointCloud(Matrix::from_parts(x.n(), x.d(), data)))
}

/// Column-major flattening: index `k * rows + i` holds `m[i, k]`.
pub fn flatten_columns(m: &Matrix) -> Vec<f64> {
    m.transpose().into_vec()
}
