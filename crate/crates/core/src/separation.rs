//! Exact orbit-separation tests for `beta_A` with `A = (I_d | T)`.
//!
//! Write `X` as `d` coordinate vectors `x_1..x_d` in `R^n`. `beta_A` fails to
//! separate at `X` exactly when there are permutations `P_1..P_d` (acting on
//! the identity columns) and `Q_1..Q_{D-d}` (acting on the tail columns) with
//!
//! 1. `sum_i T[i, j] (P_i - Q_j) x_i = 0` for every tail column `j`, and
//! 2. no single `P` satisfies `P x_i = P_i x_i` for all `i`.
//!
//! The cloud `Y` with `y_i = P_i x_i` then shares every sorted projection
//! with `X` while lying in a different orbit. Multiplying every permutation
//! by a common `sigma` preserves both conditions, so `P_1 = id` can be fixed.
//!
//! Tuples `(P_2..P_d, Q_1..Q_{D-d})` are indexed in mixed radix `n!`, most
//! significant digit first, and searched depth-first. Condition 1 is linear
//! in `X`, so each fixed `Q_j` shrinks a null space carried down the tree.
//! Condition 2 fails on a subspace exactly when the subspace lies inside one
//! of the finitely many subspaces `{X : P x_i = P_i x_i}`, which a generic
//! element detects; a subtree whose null space has no generic witness is
//! skipped whole, since deeper null spaces are contained in it.
//!
//! Permutations act as `(P x)[k] = x[p(k)]`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use nalgebra::DMatrix;

use crate::cloud::PointCloud;
use crate::constructions::matousek_counterexample;
use crate::embeddings::{beta, beta_sketch, delta, DirectionSet, RowProjector, SketchOperator};
use crate::error::{invalid, Error, Result};
use crate::linalg::null_space_basis;
use crate::matrix::{norm, Matrix};
use crate::metrics::orbit_distance;
use crate::perm::{factorial, Permutation};
use crate::rng::{normal_vec, RngSeed};

/// Largest `n` accepted by the certifier.
pub const MAX_CERTIFY_N: usize = 6;

/// Random null-space elements tested per search node.
pub const NULL_SPACE_SAMPLES: usize = 8;

/// Singular values below this multiple of `||M_j||_F` count as zero.
pub const NULL_SPACE_REL_TOL: f64 = 1e-10;

/// Relative tolerance for both witness conditions.
pub const WITNESS_TOL: f64 = 1e-8;

/// Default tuple budget for [`certify_separation`].
pub const DEFAULT_CERTIFY_BUDGET: u128 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationStatus {
    Separating,
    WitnessFound,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// `P_1..P_d`.
    pub p: Vec<Permutation>,
    /// `Q_1..Q_{D-d}`.
    pub q: Vec<Permutation>,
    /// `d x n`; row `i` is the coordinate vector `x_i`.
    pub x: Matrix,
    pub tuple_index: u128,
}

impl Witness {
    /// The two clouds (`n x d`, one point per row) the witness describes:
    /// `X` itself and `Y` with `y_i = P_i x_i`.
    pub fn clouds(&self) -> (PointCloud, PointCloud) {
        let (d, n) = (self.x.rows(), self.x.cols());
        let x = Matrix::from_fn(n, d, |p, i| self.x.get(i, p)).expect("finite witness");
        let y = Matrix::from_fn(n, d, |p, i| self.x.get(i, self.p[i].apply(p)))
            .expect("finite witness");
        (PointCloud::new(x), PointCloud::new(y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationVerdict {
    pub status: SeparationStatus,
    pub witness: Option<Witness>,
    /// Tuples covered, counting skipped subtrees in full.
    pub tuples_examined: u128,
    pub budget: u128,
    pub total_tuples: u128,
}

/// Outcome of scanning a contiguous range of tuple indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanOutcome {
    /// First verified witness in the range, by index.
    pub witness: Option<Witness>,
    /// Tuples covered; when a witness is found, those up to and including it.
    pub covered: u128,
    /// Search nodes at which null-space samples were tested.
    pub nodes: u64,
}

/// A fixed `(A, n)` instance with its search tree.
#[derive(Clone, Debug)]
pub struct SeparationProblem {
    a: DirectionSet,
    tail: Matrix,
    n: usize,
    d: usize,
    perms: Vec<Permutation>,
    /// Number of leading `P` digits: `d - 1` reduced, `d` unreduced.
    p_digits: usize,
    digits: usize,
    /// `radix^k` for `k = 0..=digits`.
    powers: Vec<u128>,
    seed: RngSeed,
}

/// Returns `T` when `a` is `(I_d | T)` up to `1e-12`.
pub fn identity_tail(a: &DirectionSet) -> Result<Matrix> {
    let (d, count) = (a.d(), a.count());
    if count < d {
        return Err(Error::UnsupportedForm(format!(
            "need D >= d, got d = {d}, D = {count}"
        )));
    }
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            if libm::fabs(a.matrix().get(i, j) - want) > 1e-12 {
                return Err(Error::UnsupportedForm(format!(
                    "leading {d} x {d} block is not the identity (entry ({}, {}))",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let cols: Vec<usize> = (d..count).collect();
    Ok(a.matrix().select_columns(&cols))
}

impl SeparationProblem {
    /// `reduced` fixes `P_1 = id`; the unreduced search enumerates it too.
    pub fn new(a: &DirectionSet, n: usize, seed: RngSeed, reduced: bool) -> Result<Self> {
        if n == 0 || n > MAX_CERTIFY_N {
            return Err(invalid(format!(
                "the certifier supports 1 <= n <= {MAX_CERTIFY_N}, got {n}"
            )));
        }
        let tail = identity_tail(a)?;
        let d = a.d();
        let p_digits = if reduced { d - 1 } else { d };
        let digits = p_digits + (a.count() - d);
        let radix = factorial(n);
        let mut powers = alloc::vec![1u128];
        for _ in 0..digits {
            let next = powers
                .last()
                .unwrap()
                .checked_mul(radix)
                .ok_or(Error::BudgetExceeded {
                    required: u128::MAX,
                    budget: u128::MAX,
                    hint: "the tuple space does not fit in 128 bits",
                })?;
            powers.push(next);
        }
        Ok(Self {
            a: a.clone(),
            tail,
            n,
            d,
            perms: Permutation::all(n),
            p_digits,
            digits,
            powers,
            seed,
        })
    }

    pub fn total_tuples(&self) -> u128 {
        self.powers[self.digits]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.a
    }

    /// `P_1..P_d` selected by the leading digits.
    fn p_tuple<'a>(&'a self, digits: &[usize]) -> Vec<&'a Permutation> {
        let mut out = Vec::with_capacity(self.d);
        if self.p_digits < self.d {
            out.push(&self.perms[0]);
        }
        out.extend(digits[..self.p_digits].iter().map(|&k| &self.perms[k]));
        out
    }

    /// Decodes tuple index `idx` into `(P_1..P_d, Q_1..Q_{D-d})`.
    pub fn decode(&self, idx: u128) -> (Vec<Permutation>, Vec<Permutation>) {
        let radix = self.powers.get(1).copied().unwrap_or(1);
        let mut digits = alloc::vec![0usize; self.digits];
        let mut rest = idx;
        for slot in digits.iter_mut().rev() {
            *slot = (rest % radix) as usize;
            rest /= radix;
        }
        let p = self.p_tuple(&digits).into_iter().cloned().collect();
        let q = digits[self.p_digits..]
            .iter()
            .map(|&k| self.perms[k].clone())
            .collect();
        (p, q)
    }

    /// `K = M_j N`, where `M_j z = sum_i T[i, j] (P_i - Q_j) x_i` and the
    /// columns of `N` span the current null space. Also returns `||M_j||_F`.
    fn constrain(
        &self,
        ps: &[&Permutation],
        q: &Permutation,
        j: usize,
        basis: &DMatrix<f64>,
    ) -> (DMatrix<f64>, f64) {
        let n = self.n;
        let r = basis.ncols();
        let mut k = DMatrix::<f64>::zeros(n, r);
        let mut frob2 = 0.0;
        for (i, p) in ps.iter().enumerate() {
            let t = self.tail.get(i, j);
            if t == 0.0 {
                continue;
            }
            for row in 0..n {
                let (a, b) = (p.apply(row), q.apply(row));
                if a == b {
                    continue;
                }
                frob2 += 2.0 * t * t;
                for c in 0..r {
                    k[(row, c)] += t * (basis[(i * n + a, c)] - basis[(i * n + b, c)]);
                }
            }
        }
        (k, libm::sqrt(frob2))
    }

    /// Whether `z` (stacked `x_1..x_d`) satisfies condition 2 for `ps`.
    fn condition_two(&self, ps: &[&Permutation], z: &[f64]) -> bool {
        let (n, d) = (self.n, self.d);
        let x = Matrix::from_fn(n, d, |p, i| z[i * n + p]).expect("finite sample");
        let y = Matrix::from_fn(n, d, |p, i| z[i * n + ps[i].apply(p)]).expect("finite sample");
        let dist = orbit_distance(&PointCloud::new(x), &PointCloud::new(y))
            .expect("matching shapes")
            .distance;
        dist > WITNESS_TOL * norm(z)
    }

    /// First of `NULL_SPACE_SAMPLES` random unit elements of `span(basis)`
    /// satisfying condition 2, drawn from a stream fixed by the node.
    fn generic_witness(
        &self,
        ps: &[&Permutation],
        basis: &DMatrix<f64>,
        depth: usize,
        prefix: u128,
    ) -> Option<Vec<f64>> {
        let r = basis.ncols();
        let node_seed = self
            .seed
            .derive(depth as u64)
            .derive((prefix as u64) ^ ((prefix >> 64) as u64));
        let mut rng = node_seed.rng();
        for _ in 0..NULL_SPACE_SAMPLES {
            let g = normal_vec(&mut rng, r);
            let mut z: Vec<f64> = (0..basis.nrows())
                .map(|row| (0..r).map(|c| basis[(row, c)] * g[c]).sum())
                .collect();
            let len = norm(&z);
            if len.is_nan() || len <= 0.0 {
                continue;
            }
            z.iter_mut().for_each(|v| *v /= len);
            if self.condition_two(ps, &z) {
                return Some(z);
            }
        }
        None
    }

    fn witness_from(&self, digits: &[usize], z: &[f64], tuple_index: u128) -> Witness {
        let p = self.p_tuple(digits).into_iter().cloned().collect();
        let q = digits[self.p_digits..]
            .iter()
            .map(|&k| self.perms[k].clone())
            .collect();
        let x = Matrix::new(self.d, self.n, z.to_vec()).expect("finite witness");
        Witness {
            p,
            q,
            x,
            tuple_index,
        }
    }

    /// Depth-first scan of the leaves with index in `[lo, hi)`.
    pub fn scan(&self, lo: u128, hi: u128) -> ScanOutcome {
        let hi = hi.min(self.total_tuples());
        let mut out = ScanOutcome {
            witness: None,
            covered: 0,
            nodes: 0,
        };
        if lo >= hi {
            return out;
        }
        let mut digits = alloc::vec![0usize; self.digits];
        let _ = self.visit(0, 0, &mut digits, None, (lo, hi), &mut out);
        out
    }

    fn visit(
        &self,
        depth: usize,
        prefix: u128,
        digits: &mut Vec<usize>,
        parent: Option<&DMatrix<f64>>,
        (lo, hi): (u128, u128),
        out: &mut ScanOutcome,
    ) -> ControlFlow<()> {
        let size = self.powers[self.digits - depth];
        let start = prefix * size;
        let overlap = hi.min(start + size).saturating_sub(lo.max(start));
        if overlap == 0 {
            return ControlFlow::Continue(());
        }

        let mut basis_here = None;
        if depth >= self.p_digits {
            let ps = self.p_tuple(digits);
            let basis = if depth == self.p_digits {
                DMatrix::identity(self.d * self.n, self.d * self.n)
            } else {
                let j = depth - self.p_digits - 1;
                let parent = parent.expect("parent basis below the P digits");
                let (k, scale) = self.constrain(&ps, &self.perms[digits[depth - 1]], j, parent);
                if scale == 0.0 {
                    parent.clone()
                } else {
                    let null = null_space_basis(&k, NULL_SPACE_REL_TOL * scale);
                    if null.is_empty() {
                        out.covered += overlap;
                        return ControlFlow::Continue(());
                    }
                    let v = DMatrix::from_fn(parent.ncols(), null.len(), |r, c| null[c][r]);
                    parent * v
                }
            };
            out.nodes += 1;
            let Some(z) = self.generic_witness(&ps, &basis, depth, prefix) else {
                out.covered += overlap;
                return ControlFlow::Continue(());
            };
            if depth == self.digits {
                let w = self.witness_from(digits, &z, prefix);
                out.covered += 1;
                if verify_witness(&self.a, &w) {
                    out.witness = Some(w);
                    return ControlFlow::Break(());
                }
                return ControlFlow::Continue(());
            }
            basis_here = Some(basis);
        }

        let radix = self.powers[1];
        for c in 0..radix as usize {
            digits[depth] = c;
            self.visit(
                depth + 1,
                prefix * radix + c as u128,
                digits,
                basis_here.as_ref().or(parent),
                (lo, hi),
                out,
            )?;
        }
        digits[depth] = 0;
        ControlFlow::Continue(())
    }
}

/// Re-checks both conditions for `w` against `a = (I_d | T)`: condition 1
/// with residual at most `1e-8 ||X||_F ||A||_F`, condition 2 with orbit
/// distance above `1e-8 ||X||_F`.
pub fn verify_witness(a: &DirectionSet, w: &Witness) -> bool {
    let Ok(tail) = identity_tail(a) else {
        return false;
    };
    let (d, n) = (w.x.rows(), w.x.cols());
    if d != a.d() || w.p.len() != d || w.q.len() != tail.cols() {
        return false;
    }
    if w.p.iter().chain(&w.q).any(|p| p.len() != n) {
        return false;
    }
    let x_norm = w.x.frobenius_norm();
    let tol = WITNESS_TOL * x_norm * a.matrix().frobenius_norm();
    let mut residual2 = 0.0;
    for (j, q) in w.q.iter().enumerate() {
        for k in 0..n {
            let r: f64 = (0..d)
                .map(|i| tail.get(i, j) * (w.x.get(i, w.p[i].apply(k)) - w.x.get(i, q.apply(k))))
                .sum();
            residual2 += r * r;
        }
    }
    if libm::sqrt(residual2) > tol {
        return false;
    }
    let (x, y) = w.clouds();
    orbit_distance(&x, &y).is_ok_and(|r| r.distance > WITNESS_TOL * x_norm)
}

/// Decides whether `beta_A` separates orbits of `n`-point clouds, scanning
/// at most `budget` tuples.
pub fn certify_separation(
    a: &DirectionSet,
    n: usize,
    budget: u128,
    seed: RngSeed,
) -> Result<SeparationVerdict> {
    certify_with(&SeparationProblem::new(a, n, seed, true)?, budget)
}

/// [`certify_separation`] on a prepared problem (reduced or not).
pub fn certify_with(problem: &SeparationProblem, budget: u128) -> Result<SeparationVerdict> {
    let total = problem.total_tuples();
    let scan = problem.scan(0, total.min(budget));
    Ok(verdict_from_scan(scan, total, budget))
}

/// Verdict after scanning `[0, min(total, budget))`.
pub fn verdict_from_scan(scan: ScanOutcome, total: u128, budget: u128) -> SeparationVerdict {
    let status = if scan.witness.is_some() {
        SeparationStatus::WitnessFound
    } else if total <= budget {
        SeparationStatus::Separating
    } else {
        SeparationStatus::Inconclusive
    };
    SeparationVerdict {
        status,
        witness: scan.witness,
        tuples_examined: scan.covered,
        budget,
        total_tuples: total,
    }
}

/// `n (d - 1) + 1`: every full-spark `A` with at least this many columns
/// makes `beta_A` injective. A single point needs only one direction.
pub fn min_injective_d_upper(n: usize, d: usize) -> Result<usize> {
    if d < 2 || n == 0 {
        return Err(invalid(format!(
            "need n >= 1 and d >= 2, got n = {n}, d = {d}"
        )));
    }
    Ok(if n == 1 { 1 } else { n * (d - 1) + 1 })
}

/// `(d - 1) (floor(log2 n) + 1)`: the largest `D` at which `beta_A` fails to
/// be injective for every `A`.
pub fn non_injective_d_threshold(n: usize, d: usize) -> Result<usize> {
    if d < 2 || n < 2 {
        return Err(invalid(format!(
            "need n >= 2 and d >= 2, got n = {n}, d = {d}"
        )));
    }
    Ok((d - 1) * (n.ilog2() as usize + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingKind {
    Beta,
    Delta,
    /// Gaussian sketch with `m` rows.
    Sketch {
        m: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpotCheckParams {
    pub kind: EmbeddingKind,
    pub n: usize,
    pub d: usize,
    pub count: usize,
    pub trials: u64,
    pub seed: RngSeed,
    /// Also inject the subset-sum counterexample for the drawn `A`
    /// (`beta` only; silently skipped when it cannot be built).
    pub inject_counterexample: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpotCheckReport {
    /// Random pairs at orbit distance `>= 0.1` with embedding gap `<= 1e-8`.
    pub collisions: u64,
    /// Same-orbit pairs whose embeddings differ by more than `1e-9` relative.
    pub false_separations: u64,
    pub pairs_tested: u64,
    /// Random pairs discarded for being closer than `0.1`.
    pub skipped: u64,
    /// Whether the injected pair collided, if one was injected.
    pub injected_collision: Option<bool>,
}

/// Minimum orbit distance for random spot-check pairs.
pub const SPOT_CHECK_MIN_DIST: f64 = 0.1;

enum Embedder {
    Beta(DirectionSet),
    Delta(DirectionSet, RowProjector),
    Sketch(DirectionSet, SketchOperator),
}

impl Embedder {
    fn apply(&self, x: &PointCloud) -> Result<Vec<f64>> {
        match self {
            Embedder::Beta(a) => Ok(beta(a, x)?.flatten()),
            Embedder::Delta(a, b) => delta(a, b, x),
            Embedder::Sketch(a, l) => beta_sketch(a, l, x),
        }
    }

    fn gap(&self, x: &PointCloud, y: &PointCloud) -> Result<(f64, f64)> {
        let (ex, ey) = (self.apply(x)?, self.apply(y)?);
        let diff: Vec<f64> = ex.iter().zip(&ey).map(|(p, q)| p - q).collect();
        Ok((norm(&diff), norm(&ex)))
    }
}

/// Randomized injectivity check: draws the embedding's random matrices,
/// then `trials` Gaussian pairs and `trials` same-orbit pairs.
pub fn spot_check_injectivity(params: &SpotCheckParams) -> Result<SpotCheckReport> {
    let SpotCheckParams {
        kind,
        n,
        d,
        count,
        trials,
        seed,
        ..
    } = *params;
    if n == 0 || d == 0 || count == 0 {
        return Err(invalid("need n, d, D >= 1"));
    }
    if kind == EmbeddingKind::Delta && count < (2 * n - 1) * d {
        return Err(Error::Inapplicable(format!(
            "delta needs D >= (2n - 1) d = {}, got {count}",
            (2 * n - 1) * d
        )));
    }
    let a = crate::constructions::gaussian_directions(d, count, seed.derive(0))?;
    let embedder = match kind {
        EmbeddingKind::Beta => Embedder::Beta(a.clone()),
        EmbeddingKind::Delta => {
            let b = crate::constructions::gaussian_directions(n, count, seed.derive(1))?;
            Embedder::Delta(a.clone(), RowProjector::new(b.matrix().clone()))
        }
        EmbeddingKind::Sketch { m } => {
            let l = crate::audit::gaussian_sketch(n, count, m, seed.derive(2))?;
            Embedder::Sketch(a.clone(), l)
        }
    };
    let mut report = SpotCheckReport::default();
    let pair_seed = seed.derive(3);
    for t in 0..trials {
        let mut rng = pair_seed.derive(t).rng();
        let x = PointCloud::gaussian(n, d, 1.0, &mut rng)?;
        let y = PointCloud::gaussian(n, d, 1.0, &mut rng)?;
        if orbit_distance(&x, &y)?.distance < SPOT_CHECK_MIN_DIST {
            report.skipped += 1;
        } else {
            report.pairs_tested += 1;
            if embedder.gap(&x, &y)?.0 <= 1e-8 {
                report.collisions += 1;
            }
        }
        let sigma = Permutation::new(crate::rng::shuffled(&mut rng, n))?;
        let same = crate::cloud::permute_rows(&x, &sigma)?;
        let (gap, scale) = embedder.gap(&x, &same)?;
        if gap > 1e-9 * scale {
            report.false_separations += 1;
        }
    }
    if params.inject_counterexample && kind == EmbeddingKind::Beta {
        if let Ok(pair) =
            matousek_counterexample(&a, seed.derive(4), crate::constructions::DEFAULT_MAX_POINTS)
        {
            // Adding the same points to both clouds keeps the projections
            // equal and the orbits distinct.
            if pair.x.n() <= n {
                let pad = |c: &PointCloud| -> Result<PointCloud> {
                    let extra = Matrix::zeros(n - c.n(), d)?;
                    let data = [c.matrix().as_slice(), extra.as_slice()].concat();
                    Matrix::new(n, d, data).map(PointCloud::new)
                };
                let (x, y) = if pair.x.n() == n {
                    (pair.x, pair.y)
                } else {
                    (pad(&pair.x)?, pad(&pair.y)?)
                };
                let (gap, scale) = embedder.gap(&x, &y)?;
                report.injected_collision = Some(gap <= 1e-8 * scale.max(1.0));
            }
        }
    }
    Ok(report)
}
