//! Direction matrices with known properties, and point-cloud pairs that
//! witness non-injectivity or poor lower Lipschitz behaviour.
//!
//! Constructions never certify themselves: every pair is re-checked with
//! [`crate::metrics::orbit_distance`] before it is returned, and tests
//! re-verify the embedding claims with [`crate::embeddings::beta`].

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::cloud::PointCloud;
use crate::embeddings::DirectionSet;
use crate::error::{invalid, Error, Result};
use crate::linalg::{left_singular_pairs, null_space_basis};
use crate::matrix::{norm, Matrix};
use crate::metrics::orbit_distance;
use crate::rng::{normal_vec, unit_vector, RngSeed};

/// Maximum number of coefficient draws in [`matousek_counterexample`].
pub const MAX_ALPHA_ATTEMPTS: usize = 100;

/// Odd-subset sums must exceed this absolute norm.
pub const MIN_ODD_NORM: f64 = 1e-9;

/// Odd-subset sums must also exceed this fraction of the largest subset sum,
/// which keeps `dist(X, Y)` well away from zero relative to the cloud scale.
pub const MIN_ODD_NORM_RATIO: f64 = 1e-2;

/// Default cap on the number of rows of a generated counterexample.
pub const DEFAULT_MAX_POINTS: usize = 1 << 12;

/// How a [`CounterexamplePair`] was built.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Subset-sum construction over a partition of the directions.
    SubsetSums {
        /// Consecutive index blocks partitioning `0..D`, each of size `<= d - 1`.
        blocks: Vec<Vec<usize>>,
        /// Unit vectors orthogonal to every direction of the matching block.
        null_vectors: Vec<Vec<f64>>,
        alphas: Vec<f64>,
        seed: RngSeed,
        attempts: usize,
    },
    /// Points on a circle with one point moved to the origin.
    AdversarialCircle {
        n: usize,
        d: usize,
        /// Whether the circle lies in the span of the two weakest left
        /// singular directions of a given matrix (otherwise the last two
        /// coordinate axes).
        aligned: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexamplePair {
    pub x: PointCloud,
    pub y: PointCloud,
    /// `dist(X, Y)`, recomputed with the assignment solver.
    pub distance: f64,
    pub certificate: Certificate,
}

impl CounterexamplePair {
    fn verified(x: PointCloud, y: PointCloud, certificate: Certificate) -> Result<Self> {
        let distance = orbit_distance(&x, &y)?.distance;
        if distance.is_nan() || distance <= 0.0 {
            return Err(Error::ConstructionImpossible(
                "constructed clouds lie in the same orbit".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            distance,
            certificate,
        })
    }

    /// Largest row norm over both clouds.
    pub fn scale(&self) -> f64 {
        (0..self.x.n())
            .flat_map(|i| [norm(self.x.point(i)), norm(self.y.point(i))])
            .fold(0.0, f64::max)
    }
}

/// `d x D` matrix with i.i.d. standard normal entries, drawn column by column.
pub fn gaussian_directions(d: usize, count: usize, seed: RngSeed) -> Result<DirectionSet> {
    if d == 0 || count == 0 {
        return Err(invalid("need d >= 1 and D >= 1"));
    }
    let draws = normal_vec(&mut seed.rng(), d * count);
    Matrix::from_fn(d, count, |i, k| draws[k * d + i]).map(DirectionSet::new)
}

/// Columns drawn independently and uniformly from the unit sphere.
pub fn sphere_directions(d: usize, count: usize, seed: RngSeed) -> Result<DirectionSet> {
    if d == 0 || count == 0 {
        return Err(invalid("need d >= 1 and D >= 1"));
    }
    let mut rng = seed.rng();
    let cols: Vec<Vec<f64>> = (0..count).map(|_| unit_vector(&mut rng, d)).collect();
    Matrix::from_fn(d, count, |i, k| cols[k][i]).map(DirectionSet::new)
}

/// `a_k = (cos(2 pi k / D), sin(2 pi k / D))` for `k = 1..=D`.
pub fn circle_directions(count: usize) -> Result<DirectionSet> {
    if count < 2 {
        return Err(invalid(format!(
            "circle construction needs D >= 2, got {count}"
        )));
    }
    let angle = |k: usize| 2.0 * PI * (k + 1) as f64 / count as f64;
    Matrix::from_fn(2, count, |i, k| {
        if i == 0 {
            libm::cos(angle(k))
        } else {
            libm::sin(angle(k))
        }
    })
    .map(DirectionSet::new)
}

/// `(I_d | tail)` for a `d x (D - d)` tail.
pub fn identity_augmented(tail: &Matrix) -> Result<DirectionSet> {
    Matrix::identity(tail.rows())?
        .hcat(tail)
        .map(DirectionSet::new)
}

/// `(I_d | T)` with `T` uniform on `[0, 1)`, entrywise.
pub fn random_identity_augmented(d: usize, count: usize, seed: RngSeed) -> Result<DirectionSet> {
    if d == 0 || count <= d {
        return Err(invalid(format!(
            "need D > d >= 1, got d = {d}, D = {count}"
        )));
    }
    let mut rng = seed.rng();
    let tail = Matrix::from_fn(d, count - d, |_, _| rng.random::<f64>())?;
    identity_augmented(&tail)
}

/// Unit vector orthogonal to all columns of `block` (a `d x |J|` matrix with
/// `|J| < d`): the right singular vector of `block^T` with the smallest
/// singular value, signed so its first nonzero entry is positive.
fn block_null_vector(block: &Matrix) -> Result<Vec<f64>> {
    let bt = block.transpose().to_nalgebra();
    let scale = bt.norm().max(1.0);
    let basis = null_space_basis(&bt, 1e-10 * scale);
    let Some(mut v) = basis.into_iter().next() else {
        return Err(Error::ConstructionImpossible(format!(
            "directions {:?} have full column rank {}",
            block.cols(),
            block.rows()
        )));
    };
    if let Some(&first) = v.iter().find(|c| libm::fabs(**c) > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    Ok(v)
}

/// Two clouds in different orbits with identical sorted embeddings under `a`.
///
/// Partition the directions into `k = ceil(D / (d - 1))` consecutive blocks,
/// take a unit vector `v_j` orthogonal to block `j`, and form the subset sums
/// `v(I) = sum_{j in I} alpha_j v_j`. `X` holds the even subsets and `Y` the
/// odd ones (`2^(k-1)` rows each); flipping membership of the block owning a
/// direction pairs even with odd subsets without changing the projection.
pub fn matousek_counterexample(
    a: &DirectionSet,
    seed: RngSeed,
    max_points: usize,
) -> Result<CounterexamplePair> {
    let (d, count) = (a.d(), a.count());
    if d < 2 {
        return Err(invalid("counterexample needs d >= 2"));
    }
    let block_size = d - 1;
    let k = count.div_ceil(block_size);
    if k > 63 || (1usize << (k - 1)) > max_points {
        return Err(Error::BudgetExceeded {
            required: if k > 127 { u128::MAX } else { 1u128 << (k - 1) },
            budget: max_points as u128,
            hint: "the construction needs 2^(ceil(D/(d-1)) - 1) points per cloud",
        });
    }
    let blocks: Vec<Vec<usize>> = (0..k)
        .map(|j| (j * block_size..((j + 1) * block_size).min(count)).collect())
        .collect();
    let null_vectors = blocks
        .iter()
        .map(|b| block_null_vector(&a.matrix().select_columns(b)))
        .collect::<Result<Vec<_>>>()?;

    let mut rng = seed.rng();
    for attempt in 1..=MAX_ALPHA_ATTEMPTS {
        let alphas: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
        let sums: Vec<Vec<f64>> = (0..1usize << k)
            .map(|mask| {
                let mut v = alloc::vec![0.0; d];
                for j in (0..k).filter(|j| mask >> j & 1 == 1) {
                    for (acc, c) in v.iter_mut().zip(&null_vectors[j]) {
                        *acc += alphas[j] * c;
                    }
                }
                v
            })
            .collect();
        let largest = sums.iter().map(|v| norm(v)).fold(0.0, f64::max);
        let floor = MIN_ODD_NORM.max(MIN_ODD_NORM_RATIO * largest);
        let odd = |mask: &usize| mask.count_ones() % 2 == 1;
        if (0..1usize << k)
            .filter(odd)
            .any(|m| norm(&sums[m]) <= floor)
        {
            continue;
        }
        let pick = |want_odd: bool| -> Vec<Vec<f64>> {
            (0..1usize << k)
                .filter(|m| odd(m) == want_odd)
                .map(|m| sums[m].clone())
                .collect()
        };
        let x = PointCloud::from_rows(&pick(false))?;
        let y = PointCloud::from_rows(&pick(true))?;
        return CounterexamplePair::verified(
            x,
            y,
            Certificate::SubsetSums {
                blocks,
                null_vectors,
                alphas,
                seed,
                attempts: attempt,
            },
        );
    }
    Err(Error::ConstructionImpossible(format!(
        "no well-conditioned coefficients after {MAX_ALPHA_ATTEMPTS} draws"
    )))
}

fn circle_pair(
    n: usize,
    d: usize,
    embed: impl Fn(f64, f64) -> Vec<f64>,
    aligned: bool,
) -> Result<CounterexamplePair> {
    let rows: Vec<Vec<f64>> = (1..=n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            embed(libm::cos(t), libm::sin(t))
        })
        .collect();
    let mut y_rows = rows.clone();
    y_rows[0] = alloc::vec![0.0; d];
    CounterexamplePair::verified(
        PointCloud::from_rows(&rows)?,
        PointCloud::from_rows(&y_rows)?,
        Certificate::AdversarialCircle { n, d, aligned },
    )
}

/// `x_i = (0, ..., 0, cos(2 pi i / n), sin(2 pi i / n))`, `Y = X` with its
/// first row set to zero. `dist(X, Y) = 1`, yet for every `A` the embedding
/// gap is `O(sqrt((s_1^2 + s_2^2) / n))`.
pub fn adversarial_circle_pair(n: usize, d: usize) -> Result<CounterexamplePair> {
    if n < 2 || d < 2 {
        return Err(invalid(format!(
            "need n >= 2 and d >= 2, got n = {n}, d = {d}"
        )));
    }
    circle_pair(
        n,
        d,
        |c, s| {
            let mut row = alloc::vec![0.0; d];
            row[d - 2] = c;
            row[d - 1] = s;
            row
        },
        false,
    )
}

/// Same circle pair, but placed in the plane of the two left singular
/// vectors of `a` with the smallest singular values.
pub fn aligned_adversarial_pair(a: &DirectionSet, n: usize) -> Result<CounterexamplePair> {
    let d = a.d();
    if n < 2 || d < 2 {
        return Err(invalid(format!(
            "need n >= 2 and d >= 2, got n = {n}, d = {d}"
        )));
    }
    let padded;
    let m = if a.count() < d {
        padded = a.matrix().hcat(&Matrix::zeros(d, d - a.count())?)?;
        &padded
    } else {
        a.matrix()
    };
    let (_, u) = left_singular_pairs(m);
    let (u1, u2) = (u.column(d - 2), u.column(d - 1));
    circle_pair(
        n,
        d,
        |c, s| u1.iter().zip(&u2).map(|(p, q)| c * p + s * q).collect(),
        true,
    )
}
