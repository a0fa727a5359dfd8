//! Orbit distance and the Wasserstein distances built on it.
//!
//! `dist(X, Y) = min_sigma ||X - sigma Y||_F` is an assignment problem on the
//! squared-distance cost matrix; [`orbit_distance`] solves it exactly with
//! the shortest-augmenting-path Hungarian method in `O(n^3)`.

use alloc::vec::Vec;

use crate::cloud::PointCloud;
use crate::embeddings::{beta, DirectionSet};
use crate::error::{check_dim, Error, Result};
use crate::matrix::Matrix;
use crate::perm::{factorial, next_lex, Permutation};

/// Largest `n` accepted by the `n!` brute-force oracle.
pub const BRUTE_FORCE_MAX_N: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitDistanceResult {
    pub distance: f64,
    /// Row `i` of `X` is matched with row `sigma(i)` of `Y`.
    pub sigma: Permutation,
}

/// Minimum-cost perfect matching on a square cost matrix (row-major,
/// `n * n` entries). Returns `assignment[row] = column`.
pub fn solve_assignment(costs: &[f64], n: usize) -> Vec<usize> {
    debug_assert_eq!(costs.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    // 1-based potentials; column 0 is the virtual source.
    let mut u = alloc::vec![0.0f64; n + 1];
    let mut v = alloc::vec![0.0f64; n + 1];
    let mut owner = alloc::vec![0usize; n + 1];
    let mut way = alloc::vec![0usize; n + 1];
    let mut minv = alloc::vec![0.0f64; n + 1];
    let mut used = alloc::vec![false; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|u| *u = false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = costs[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = alloc::vec![0usize; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

fn squared_cost_matrix(x: &PointCloud, y: &PointCloud) -> Result<Vec<f64>> {
    check_dim("point count", x.n(), y.n())?;
    check_dim("point dimension", x.d(), y.d())?;
    let n = x.n();
    let mut costs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            costs.push(sq_dist(x.point(i), y.point(j)));
        }
    }
    Ok(costs)
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Exact orbit distance with an optimal matching.
pub fn orbit_distance(x: &PointCloud, y: &PointCloud) -> Result<OrbitDistanceResult> {
    let costs = squared_cost_matrix(x, y)?;
    let n = x.n();
    let assignment = solve_assignment(&costs, n);
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * n + j])
        .sum();
    Ok(OrbitDistanceResult {
        distance: libm::sqrt(total),
        sigma: Permutation::new(assignment).expect("assignment is a bijection"),
    })
}

/// Orbit distance by enumerating all `n!` matchings. Oracle for
/// [`orbit_distance`]; refuses `n > BRUTE_FORCE_MAX_N`.
pub fn orbit_distance_bruteforce(x: &PointCloud, y: &PointCloud) -> Result<OrbitDistanceResult> {
    let costs = squared_cost_matrix(x, y)?;
    let n = x.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::BudgetExceeded {
            required: factorial(n),
            budget: factorial(BRUTE_FORCE_MAX_N),
            hint: "use the Hungarian solver for larger clouds",
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    let mut best_perm = perm.clone();
    loop {
        let total: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| costs[i * n + j])
            .sum();
        if total < best {
            best = total;
            best_perm.copy_from_slice(&perm);
        }
        if !next_lex(&mut perm) {
            break;
        }
    }
    Ok(OrbitDistanceResult {
        distance: libm::sqrt(best),
        sigma: Permutation::new(best_perm).expect("enumerated permutation"),
    })
}

/// 2-Wasserstein distance between the uniform empirical measures on the rows.
pub fn wasserstein2(x: &PointCloud, y: &PointCloud) -> Result<f64> {
    Ok(orbit_distance(x, y)?.distance / libm::sqrt(x.n() as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlicedW2 {
    pub value: f64,
    /// `false` when some direction deviates from unit norm by more than 1e-9;
    /// the value is then not a Monte-Carlo estimate of the sliced distance.
    pub unit_directions: bool,
}

/// Sampled sliced 2-Wasserstein distance over the columns of `theta`:
/// `||beta(X) - beta(Y)||_F / sqrt(n D)`.
pub fn sliced_w2_sampled(x: &PointCloud, y: &PointCloud, theta: &DirectionSet) -> Result<SlicedW2> {
    check_dim("point count", x.n(), y.n())?;
    let diff = beta(theta, x)?.matrix().sub(beta(theta, y)?.matrix())?;
    let unit_directions = (0..theta.count())
        .all(|k| libm::fabs(crate::matrix::norm(&theta.direction(k)) - 1.0) <= 1e-9);
    Ok(SlicedW2 {
        value: diff.frobenius_norm() / libm::sqrt((x.n() * theta.count()) as f64),
        unit_directions,
    })
}

/// `||beta_A(X) - beta_A(Y)||_F`.
pub fn embedding_gap(a: &DirectionSet, x: &PointCloud, y: &PointCloud) -> Result<f64> {
    Ok(beta(a, x)?
        .matrix()
        .sub(beta(a, y)?.matrix())?
        .frobenius_norm())
}

/// Rows sorted lexicographically; two clouds are in the same orbit exactly
/// when these agree.
pub fn sorted_rows(x: &PointCloud) -> Matrix {
    let mut rows: Vec<&[f64]> = (0..x.n()).map(|i| x.point(i)).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let data = rows.concat();
    Matrix::new(x.n(), x.d(), data).expect("rows of a valid cloud")
}
