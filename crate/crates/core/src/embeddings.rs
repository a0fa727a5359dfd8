//! Sorting-based permutation-invariant embeddings.
//!
//! * [`beta`]: project the cloud onto each direction and sort, giving an
//!   `n x D` matrix with non-decreasing columns.
//! * [`delta`]: pair each sorted column with a weight vector, one scalar per
//!   direction.
//! * [`beta_sketch`]: apply a linear sketch to the column-major flattening
//!   of [`beta`].
//!
//! Sorting exactly-tied values gives identical output regardless of tie
//! order, so permutation invariance holds bit-for-bit, not just to tolerance.

use alloc::vec::Vec;

use crate::cloud::{flatten_columns, sort_finite, PointCloud};
use crate::error::{check_dim, Result};
use crate::linalg::singular_values;
use crate::matrix::{dot, Matrix};

/// Projection directions: the columns of a `d x D` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet(Matrix);

impl DirectionSet {
    pub fn new(a: Matrix) -> Self {
        Self(a)
    }

    /// Ambient dimension `d`.
    pub fn d(&self) -> usize {
        self.0.rows()
    }

    /// Number of directions `D`.
    pub fn count(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn direction(&self, k: usize) -> Vec<f64> {
        self.0.column(k)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.0)
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(self.0.scale(t))
    }
}

impl From<Matrix> for DirectionSet {
    fn from(m: Matrix) -> Self {
        Self(m)
    }
}

/// Weight vectors `b_k` (columns of an `n x D` matrix) for [`delta`].
#[derive(Clone, Debug, PartialEq)]
pub struct RowProjector(Matrix);

impl RowProjector {
    pub fn new(b: Matrix) -> Self {
        Self(b)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Linear sketch `L` with `n * D` columns, applied to flattened embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct SketchOperator(Matrix);

impl SketchOperator {
    pub fn new(l: Matrix) -> Self {
        Self(l)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn output_dim(&self) -> usize {
        self.0.rows()
    }
}

/// An `n x D` matrix whose columns are sorted non-decreasingly.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedEmbedding(Matrix);

impl SortedEmbedding {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Column-major flattening; entry `k * n + i` is `E[i, k]`.
    pub fn flatten(&self) -> Vec<f64> {
        flatten_columns(&self.0)
    }

    pub fn columns_sorted(&self) -> bool {
        (0..self.0.cols())
            .all(|k| (1..self.0.rows()).all(|i| self.0.get(i - 1, k) <= self.0.get(i, k)))
    }
}

/// Column-major flattening of a sorted embedding (fixed contract for sketch
/// operators).
pub fn flatten_embedding(e: &SortedEmbedding) -> Vec<f64> {
    e.flatten()
}

/// Sorted projections of `x` onto one direction.
fn sorted_projection(x: &PointCloud, dir: &[f64]) -> Vec<f64> {
    let mut col: Vec<f64> = (0..x.n()).map(|i| dot(x.point(i), dir)).collect();
    sort_finite(&mut col);
    col
}

fn directions(a: &DirectionSet) -> Vec<Vec<f64>> {
    (0..a.count()).map(|k| a.direction(k)).collect()
}

/// `beta_A(X)`: column `k` is `sort(X a_k)`.
pub fn beta(a: &DirectionSet, x: &PointCloud) -> Result<SortedEmbedding> {
    check_dim("point dimension", a.d(), x.d())?;
    let (n, dcount) = (x.n(), a.count());
    let mut data = alloc::vec![0.0; n * dcount];
    for (k, dir) in directions(a).iter().enumerate() {
        for (i, v) in sorted_projection(x, dir).into_iter().enumerate() {
            data[i * dcount + k] = v;
        }
    }
    Ok(SortedEmbedding(Matrix::from_parts(n, dcount, data)))
}

/// `delta_{A,B}(X)`: entry `k` is `<b_k, sort(X a_k)>`.
pub fn delta(a: &DirectionSet, b: &RowProjector, x: &PointCloud) -> Result<Vec<f64>> {
    check_dim("point dimension", a.d(), x.d())?;
    check_dim("projector rows (points)", x.n(), b.0.rows())?;
    check_dim("projector columns (directions)", a.count(), b.0.cols())?;
    Ok(directions(a)
        .iter()
        .enumerate()
        .map(|(k, dir)| dot(&b.0.column(k), &sorted_projection(x, dir)))
        .collect())
}

/// `beta_{A,L}(X) = L vec(beta_A(X))`.
pub fn beta_sketch(a: &DirectionSet, l: &SketchOperator, x: &PointCloud) -> Result<Vec<f64>> {
    check_dim("sketch columns (n * D)", x.n() * a.count(), l.0.cols())?;
    let e = beta(a, x)?;
    l.0.mul_vec(&e.flatten())
}

/// `beta_A(1_n z^T)`: every entry of column `k` is `z . a_k`.
pub fn translation_offset(a: &DirectionSet, z: &[f64], n: usize) -> Result<SortedEmbedding> {
    check_dim("translation vector length", a.d(), z.len())?;
    let rows: Vec<Vec<f64>> = (0..n).map(|_| z.to_vec()).collect();
    beta(a, &PointCloud::from_rows(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dirs(rows: &[Vec<f64>]) -> DirectionSet {
        DirectionSet::new(Matrix::from_rows(rows).unwrap())
    }

    #[test]
    fn single_point_needs_no_sorting() {
        let a = dirs(&[vec![1.0, 2.0, -1.0], vec![0.5, 0.0, 3.0]]);
        let x = PointCloud::from_rows(&[vec![2.0, -4.0]]).unwrap();
        let e = beta(&a, &x).unwrap();
        assert_eq!(e.matrix(), &x.matrix().matmul(a.matrix()).unwrap());
    }

    #[test]
    fn coordinate_sorting() {
        let a = DirectionSet::new(Matrix::identity(2).unwrap());
        let x = PointCloud::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let e = beta(&a, &x).unwrap();
        assert_eq!(e.matrix().column(0), vec![0.0, 1.0]);
        assert_eq!(e.matrix().column(1), vec![0.0, 1.0]);
    }

    #[test]
    fn all_ones_weights_sum_projections() {
        let a = dirs(&[vec![1.0, -2.0], vec![3.0, 0.5]]);
        let x =
            PointCloud::from_rows(&[vec![1.0, 2.0], vec![-3.0, 0.25], vec![0.5, -1.0]]).unwrap();
        let b = RowProjector::new(Matrix::from_fn(3, 2, |_, _| 1.0).unwrap());
        let got = delta(&a, &b, &x).unwrap();
        let xa = x.matrix().matmul(a.matrix()).unwrap();
        for k in 0..2 {
            let expect: f64 = xa.column(k).iter().sum();
            assert!((got[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_of_single_point() {
        let a = dirs(&[vec![1.0, 2.0], vec![0.0, -1.0]]);
        let b = RowProjector::new(Matrix::from_rows(&[vec![3.0, -2.0]]).unwrap());
        let x = PointCloud::from_rows(&[vec![1.5, 4.0]]).unwrap();
        let got = delta(&a, &b, &x).unwrap();
        assert_eq!(got, vec![3.0 * 1.5, -2.0 * (3.0 - 4.0)]);
    }

    #[test]
    fn identity_and_zero_sketches() {
        let a = dirs(&[vec![1.0, 0.3], vec![-0.2, 1.0]]);
        let x = PointCloud::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0]]).unwrap();
        let id = SketchOperator::new(Matrix::identity(6).unwrap());
        assert_eq!(
            beta_sketch(&a, &id, &x).unwrap(),
            beta(&a, &x).unwrap().flatten()
        );
        let zero = SketchOperator::new(Matrix::zeros(1, 6).unwrap());
        assert_eq!(beta_sketch(&a, &zero, &x).unwrap(), vec![0.0]);
        let wrong = SketchOperator::new(Matrix::zeros(1, 5).unwrap());
        assert!(beta_sketch(&a, &wrong, &x).is_err());
    }

    #[test]
    fn translation_offsets() {
        let a = dirs(&[vec![1.0, -1.0], vec![2.0, 0.5]]);
        let zero = translation_offset(&a, &[0.0, 0.0], 3).unwrap();
        assert_eq!(zero.matrix(), &Matrix::zeros(3, 2).unwrap());
        let one_d = dirs(&[vec![1.0]]);
        let t = translation_offset(&one_d, &[3.0], 2).unwrap();
        assert_eq!(t.matrix().column(0), vec![3.0, 3.0]);
    }

    #[test]
    fn dimension_mismatches() {
        let a = dirs(&[vec![1.0, 0.0]]);
        let x = PointCloud::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(beta(&a, &x).is_err());
        let b = RowProjector::new(Matrix::zeros(2, 2).unwrap());
        let x1 = PointCloud::from_rows(&[vec![1.0]]).unwrap();
        assert!(delta(&a, &b, &x1).is_err());
    }
}
