//! Lipschitz bounds for the sorted embedding: exact, certified, empirical.
//!
//! Certified quantities ([`upper_lipschitz`], the exhaustive
//! [`subset_sigma_lower_bound`], the 2-D [`PuMethod::Exact2dSweep`]) are kept
//! apart from estimates (sampled subsets, sphere sampling, the empirical
//! pair pool), and every estimate says so in its type.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_bigint::BigUint;
use rand::Rng;

use crate::cloud::{permute_rows, PointCloud};
use crate::constructions::{adversarial_circle_pair, aligned_adversarial_pair};
use crate::embeddings::{beta, DirectionSet, SketchOperator};
use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{binomial, for_each_combination, singular_values};
use crate::matrix::{dot, Matrix};
use crate::metrics::{embedding_gap, orbit_distance};
use crate::perm::Permutation;
use crate::rng::{normal_vec, shuffled, unit_vector, RngSeed};

/// Pairs closer than this (in orbit distance) are left out of ratio estimates.
pub const MIN_PAIR_DISTANCE: f64 = 1e-8;

/// Sphere directions per ambient dimension for [`PuMethod::SphereSampling`].
pub const SPHERE_SAMPLES_PER_DIM: usize = 10_000;

/// Grid angles per direction in the 2-D sweep.
pub const SWEEP_ANGLES_PER_DIRECTION: usize = 256;

/// Default constant in [`ose_dimension`].
pub const DEFAULT_OSE_CONSTANT: f64 = 4.0;

/// `sigma_1(A)`: the optimal upper Lipschitz constant of `beta_A`.
pub fn upper_lipschitz(a: &DirectionSet) -> f64 {
    a.singular_values()[0]
}

/// `sigma_1 .. sigma_d` of `a`, padded with zeros when `D < d`.
fn padded_singular_values(a: &DirectionSet) -> Vec<f64> {
    let mut s = a.singular_values();
    s.resize(a.d().max(2), 0.0);
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetBound {
    pub value: f64,
    pub r: usize,
    pub subsets_examined: u128,
    /// `true` for the exhaustive minimum. Sampled values only bound the true
    /// minimum from above.
    pub certified: bool,
}

/// `D >= r d ((n - 1)^2 + 1)`: when this holds the subset minimum bounds
/// the lower Lipschitz constant for `n`-point clouds.
pub fn subset_hypothesis_holds(count: usize, d: usize, r: usize, n: usize) -> bool {
    let need = (r as u128) * (d as u128) * ((n.saturating_sub(1) as u128).pow(2) + 1);
    count as u128 >= need
}

fn subset_sigma(a: &Matrix, cols: &[usize], d: usize) -> f64 {
    singular_values(&a.select_columns(cols))[d - 1]
}

fn check_subset_size(a: &DirectionSet, r: usize) -> Result<usize> {
    let size = r * a.d();
    if r == 0 || size > a.count() {
        return Err(invalid(format!(
            "subset size r d = {size} must lie in 1..=D = {}",
            a.count()
        )));
    }
    Ok(size)
}

/// `min over |I| = r d of sigma_d(A(I))`, exhaustively.
pub fn subset_sigma_lower_bound(a: &DirectionSet, r: usize, budget: u128) -> Result<SubsetBound> {
    let size = check_subset_size(a, r)?;
    let required = binomial(a.count(), size);
    if required > budget {
        return Err(Error::BudgetExceeded {
            required,
            budget,
            hint: "use the sampled subset estimate (not certified)",
        });
    }
    let mut value = f64::INFINITY;
    for_each_combination(a.count(), size, |cols| {
        value = value.min(subset_sigma(a.matrix(), cols, a.d()));
    });
    Ok(SubsetBound {
        value,
        r,
        subsets_examined: required,
        certified: true,
    })
}

/// Minimum over `samples` uniformly drawn subsets. An upper estimate of the
/// exhaustive minimum, so never a certified bound.
pub fn subset_sigma_sampled(
    a: &DirectionSet,
    r: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<SubsetBound> {
    let size = check_subset_size(a, r)?;
    if samples == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut rng = seed.rng();
    let mut value = f64::INFINITY;
    for _ in 0..samples {
        let mut cols = shuffled(&mut rng, a.count());
        cols.truncate(size);
        cols.sort_unstable();
        value = value.min(subset_sigma(a.matrix(), &cols, a.d()));
    }
    Ok(SubsetBound {
        value,
        r,
        subsets_examined: samples as u128,
        certified: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PuMethod {
    /// `d = 2` only: grid of `256 D` angles in `[0, pi)` plus every critical
    /// direction, which makes the result the exact minimum.
    Exact2dSweep,
    /// Minimum over `directions` random unit vectors; an upper estimate.
    SphereSampling { directions: usize, seed: RngSeed },
}

impl PuMethod {
    pub fn sphere(d: usize, seed: RngSeed) -> Self {
        PuMethod::SphereSampling {
            directions: SPHERE_SAMPLES_PER_DIM * d,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuEstimate {
    pub m: usize,
    pub delta: f64,
    pub method: PuMethod,
    pub direction_count: usize,
}

/// `m`-th smallest of `|a_k . e|`.
fn mth_smallest_projection(cols: &[Vec<f64>], e: &[f64], m: usize, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend(cols.iter().map(|c| libm::fabs(dot(c, e))));
    *buf.select_nth_unstable_by(m - 1, f64::total_cmp).1
}

/// Critical directions of the 2-D sweep: unit vectors orthogonal to some
/// `a_k`, or to some `a_j +- a_k` (where two projections cross).
fn critical_directions(cols: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let orth = |v: [f64; 2]| -> Option<[f64; 2]> {
        let len = libm::hypot(v[0], v[1]);
        (len > 0.0).then(|| [-v[1] / len, v[0] / len])
    };
    let mut out = Vec::new();
    for (j, a) in cols.iter().enumerate() {
        out.extend(orth([a[0], a[1]]));
        for b in &cols[j + 1..] {
            out.extend(orth([a[0] - b[0], a[1] - b[1]]));
            out.extend(orth([a[0] + b[0], a[1] + b[1]]));
        }
    }
    out
}

/// `(m, delta)`-projective uniformity: `min_e` of the `m`-th smallest
/// `|a_k . e|` over unit `e`.
pub fn projective_uniformity(a: &DirectionSet, m: usize, method: PuMethod) -> Result<PuEstimate> {
    let count = a.count();
    if m == 0 || m > count {
        return Err(invalid(format!("m must lie in 1..={count}, got {m}")));
    }
    let cols: Vec<Vec<f64>> = (0..count).map(|k| a.direction(k)).collect();
    let mut buf = Vec::with_capacity(count);
    let mut delta = f64::INFINITY;
    let direction_count = match method {
        PuMethod::Exact2dSweep => {
            if a.d() != 2 {
                return Err(invalid(format!(
                    "the exact sweep needs d = 2, got {}",
                    a.d()
                )));
            }
            let grid = SWEEP_ANGLES_PER_DIRECTION * count;
            let directions = (0..grid)
                .map(|j| {
                    let t = PI * j as f64 / grid as f64;
                    [libm::cos(t), libm::sin(t)]
                })
                .chain(critical_directions(&cols));
            let mut evaluated = 0;
            for e in directions {
                delta = delta.min(mth_smallest_projection(&cols, &e, m, &mut buf));
                evaluated += 1;
            }
            evaluated
        }
        PuMethod::SphereSampling { directions, seed } => {
            if directions == 0 {
                return Err(invalid("need at least one sampled direction"));
            }
            let mut rng = seed.rng();
            for _ in 0..directions {
                let e = unit_vector(&mut rng, a.d());
                delta = delta.min(mth_smallest_projection(&cols, &e, m, &mut buf));
            }
            directions
        }
    };
    Ok(PuEstimate {
        m,
        delta,
        method,
        direction_count,
    })
}

/// `delta sqrt(D - n^2 (m - 1))`, a lower Lipschitz bound for
/// `(m, delta)`-projectively uniform `A`.
pub fn blueprint_lower_bound(delta: f64, m: usize, count: usize, n: usize) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 || m == 0 {
        return Err(invalid("need delta >= 0 and m >= 1"));
    }
    let excluded = (n as u128).pow(2) * (m as u128 - 1);
    if excluded > count as u128 {
        return Err(Error::Inapplicable(format!(
            "n^2 (m - 1) = {excluded} exceeds D = {count}"
        )));
    }
    Ok(delta * libm::sqrt((count as u128 - excluded) as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqrtnCeiling {
    /// Uses `sigma_{d-1}, sigma_d`; bounds the gap of the pair aligned with
    /// the weakest singular directions of this `A`.
    pub aligned: f64,
    /// Uses `sigma_1, sigma_2`; bounds the gap of the fixed coordinate-plane
    /// pair for every `A`.
    pub universal: f64,
}

fn ceiling_formula(n: usize, s: f64, t: f64) -> f64 {
    let n = n as f64;
    libm::sqrt(2.0 + 1.0 / n) * PI / libm::sqrt(n) * libm::sqrt(s * s + t * t)
}

/// Upper bound on `||beta_A(X) - beta_A(Y)||_F` for the unit-distance
/// circle pairs, hence on the lower Lipschitz constant.
pub fn sqrtn_ceiling(a: &DirectionSet, n: usize) -> Result<SqrtnCeiling> {
    let d = a.d();
    if d < 2 || n == 0 {
        return Err(invalid(format!(
            "need d >= 2 and n >= 1, got d = {d}, n = {n}"
        )));
    }
    let s = padded_singular_values(a);
    Ok(SqrtnCeiling {
        aligned: ceiling_formula(n, s[d - 2], s[d - 1]),
        universal: ceiling_formula(n, s[0], s[1]),
    })
}

/// Sketch dimension `ceil(c eps^-2 (2nd ln(1/eps) + ln(1/eta) + 2nd ln(D n^2)))`.
pub fn ose_dimension(
    n: usize,
    d: usize,
    count: usize,
    epsilon: f64,
    eta: f64,
    c: f64,
) -> Result<usize> {
    let open_unit = |v: f64| v > 0.0 && v < 1.0;
    if !open_unit(epsilon)
        || !open_unit(eta)
        || c.is_nan()
        || c <= 0.0
        || n == 0
        || d == 0
        || count == 0
    {
        return Err(invalid(
            "need n, d, D >= 1, epsilon and eta in (0, 1), c > 0",
        ));
    }
    let nd2 = 2.0 * (n * d) as f64;
    let dn2 = count as f64 * (n as f64) * (n as f64);
    let m = c / (epsilon * epsilon)
        * (nd2 * libm::log(1.0 / epsilon) + libm::log(1.0 / eta) + nd2 * libm::log(dn2));
    if m.is_nan() || m >= 1e12 {
        return Err(invalid(format!("sketch dimension {m:e} is out of range")));
    }
    Ok((libm::ceil(m) as usize).max(1))
}

/// `M x (n D)` matrix with i.i.d. `N(0, 1/M)` entries (standard deviation
/// `1/sqrt(M)`), so `E ||L v||^2 = ||v||^2`.
pub fn gaussian_sketch(n: usize, count: usize, m: usize, seed: RngSeed) -> Result<SketchOperator> {
    if m == 0 || n == 0 || count == 0 {
        return Err(invalid("need M, n, D >= 1"));
    }
    let sd = 1.0 / libm::sqrt(m as f64);
    let data = normal_vec(&mut seed.rng(), m * n * count)
        .into_iter()
        .map(|v| v * sd)
        .collect();
    Matrix::new(m, n * count, data).map(SketchOperator::new)
}

/// Upper bound on the number of regions on which `beta_A` is linear.
pub fn region_count_bound(n: usize, d: usize, count: usize) -> BigUint {
    let base = BigUint::from(count) * BigUint::from(n) * BigUint::from(n);
    base.pow((2 * n * d) as u32)
}

/// One pair from the empirical pool. Index 0 and 1 hold the circle pairs
/// (when `d >= 2`, `n >= 2`); the rest alternate between independent Gaussian
/// clouds and perturbed permutations, at scales `10^-2 .. 10^2`.
pub fn pool_pair(
    a: &DirectionSet,
    n: usize,
    seed: RngSeed,
    index: u64,
) -> Result<(PointCloud, PointCloud)> {
    let d = a.d();
    if d >= 2 && n >= 2 {
        match index {
            0 => return adversarial_circle_pair(n, d).map(|p| (p.x, p.y)),
            1 => return aligned_adversarial_pair(a, n).map(|p| (p.x, p.y)),
            _ => {}
        }
    }
    let mut rng = seed.derive(index).rng();
    let scale = libm::pow(10.0, rng.random_range(-2.0..=2.0));
    let x = PointCloud::gaussian(n, d, scale, &mut rng)?;
    if index.is_multiple_of(2) {
        let y = PointCloud::gaussian(n, d, scale, &mut rng)?;
        return Ok((x, y));
    }
    let sigma = Permutation::new(shuffled(&mut rng, n))?;
    let noise = scale * libm::pow(10.0, rng.random_range(-4.0..=-1.0));
    let jitter = PointCloud::gaussian(n, d, noise, &mut rng)?;
    let y = permute_rows(&x, &sigma)?.matrix().add(jitter.matrix())?;
    Ok((x, PointCloud::new(y)))
}

/// `(||beta_A(X) - beta_A(Y)||_F / dist(X, Y), dist)`, or `None` below the
/// distance floor.
pub fn pair_ratio(a: &DirectionSet, x: &PointCloud, y: &PointCloud) -> Result<Option<f64>> {
    let dist = orbit_distance(x, y)?.distance;
    if dist < MIN_PAIR_DISTANCE {
        return Ok(None);
    }
    Ok(Some(embedding_gap(a, x, y)? / dist))
}

/// Running min/max of embedding ratios. Merging is order-independent, so
/// parallel reductions give the same result as a sequential fold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionEstimate {
    pub c1: f64,
    pub c2: f64,
    /// Pool index attaining `c1` (smallest index on ties).
    pub c1_index: u64,
    pub used: u64,
    pub skipped: u64,
}

impl Default for DistortionEstimate {
    fn default() -> Self {
        Self {
            c1: f64::INFINITY,
            c2: 0.0,
            c1_index: u64::MAX,
            used: 0,
            skipped: 0,
        }
    }
}

impl DistortionEstimate {
    pub fn record(&mut self, index: u64, ratio: Option<f64>) {
        let Some(r) = ratio else {
            self.skipped += 1;
            return;
        };
        self.used += 1;
        self.c2 = self.c2.max(r);
        if r < self.c1 || (r == self.c1 && index < self.c1_index) {
            self.c1 = r;
            self.c1_index = index;
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.used += other.used;
        self.skipped += other.skipped;
        self.c2 = self.c2.max(other.c2);
        if other.c1 < self.c1 || (other.c1 == self.c1 && other.c1_index < self.c1_index) {
            self.c1 = other.c1;
            self.c1_index = other.c1_index;
        }
        self
    }

    pub fn distortion(&self) -> f64 {
        self.c2 / self.c1
    }
}

/// Sequential scan of pool indices `0..trials`.
pub fn estimate_distortion(
    a: &DirectionSet,
    n: usize,
    trials: u64,
    seed: RngSeed,
) -> Result<DistortionEstimate> {
    let mut est = DistortionEstimate::default();
    for i in 0..trials {
        let (x, y) = pool_pair(a, n, seed, i)?;
        est.record(i, pair_ratio(a, &x, &y)?);
    }
    Ok(est)
}

/// What to include in an [`AuditReport`] beyond the always-present fields.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRequest {
    pub n: usize,
    pub trials: u64,
    pub seed: RngSeed,
    pub subset_r: Option<usize>,
    pub subset_budget: u128,
    pub pu_m: Option<usize>,
    /// `None` picks the exact sweep for `d = 2`, sphere sampling otherwise.
    pub pu_method: Option<PuMethod>,
}

impl AuditRequest {
    pub fn new(n: usize, trials: u64, seed: RngSeed) -> Self {
        Self {
            n,
            trials,
            seed,
            subset_r: None,
            subset_budget: crate::linalg::DEFAULT_SUBSET_BUDGET,
            pu_m: None,
            pu_method: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub n: usize,
    pub sigma1: f64,
    pub subset_bound: Option<SubsetBound>,
    /// Whether `D >= r d ((n-1)^2 + 1)`, i.e. the subset value is a lower
    /// Lipschitz bound for this `n`.
    pub subset_hypothesis: Option<bool>,
    pub pu: Option<PuEstimate>,
    pub blueprint_bound: Option<f64>,
    pub empirical: DistortionEstimate,
    pub ceiling: Option<SqrtnCeiling>,
    pub seed: RngSeed,
    pub trials: u64,
    /// Requested parts that could not be computed, with the reason.
    pub skipped: Vec<(&'static str, String)>,
}

impl AuditReport {
    pub fn empirical_c1(&self) -> f64 {
        self.empirical.c1
    }

    pub fn empirical_c2(&self) -> f64 {
        self.empirical.c2
    }

    /// Whether some requested part was skipped for exceeding its budget.
    pub fn budget_exceeded(&self) -> bool {
        !self.skipped.is_empty()
    }
}

/// Combines a finished empirical estimate with the requested bounds.
/// Budget and applicability failures are recorded in `skipped`; other errors
/// propagate.
pub fn assemble_report(
    a: &DirectionSet,
    req: &AuditRequest,
    empirical: DistortionEstimate,
) -> Result<AuditReport> {
    if empirical.used == 0 {
        return Err(invalid("every sampled pair fell below the distance floor"));
    }
    let mut skipped = Vec::new();
    let mut subset_bound = None;
    let mut subset_hypothesis = None;
    if let Some(r) = req.subset_r {
        subset_hypothesis = Some(subset_hypothesis_holds(a.count(), a.d(), r, req.n));
        match subset_sigma_lower_bound(a, r, req.subset_budget) {
            Ok(b) => subset_bound = Some(b),
            Err(e @ Error::BudgetExceeded { .. }) => skipped.push(("subset_bound", format!("{e}"))),
            Err(e) => return Err(e),
        }
    }
    let mut pu = None;
    let mut blueprint_bound = None;
    if let Some(m) = req.pu_m {
        let method = req.pu_method.unwrap_or(if a.d() == 2 {
            PuMethod::Exact2dSweep
        } else {
            PuMethod::sphere(a.d(), req.seed.derive(u64::MAX))
        });
        let est = projective_uniformity(a, m, method)?;
        // Sampled deltas are optimistic, so only the sweep feeds the bound.
        if method == PuMethod::Exact2dSweep {
            match blueprint_lower_bound(est.delta, m, a.count(), req.n) {
                Ok(b) => blueprint_bound = Some(b),
                Err(e @ Error::Inapplicable(_)) => {
                    skipped.push(("blueprint_bound", format!("{e}")))
                }
                Err(e) => return Err(e),
            }
        }
        pu = Some(est);
    }
    Ok(AuditReport {
        n: req.n,
        sigma1: upper_lipschitz(a),
        subset_bound,
        subset_hypothesis,
        pu,
        blueprint_bound,
        empirical,
        ceiling: sqrtn_ceiling(a, req.n).ok(),
        seed: req.seed,
        trials: req.trials,
        skipped,
    })
}

/// Full audit with the empirical part computed sequentially.
pub fn audit(a: &DirectionSet, req: &AuditRequest) -> Result<AuditReport> {
    let est = estimate_distortion(a, req.n, req.trials, req.seed)?;
    assemble_report(a, req, est)
}

/// Empirical lower/upper Lipschitz estimates over `trials` pool pairs, with
/// `sigma_1` and the ceilings filled in.
pub fn empirical_distortion(
    a: &DirectionSet,
    n: usize,
    trials: u64,
    seed: RngSeed,
) -> Result<AuditReport> {
    if trials == 0 || n == 0 {
        return Err(invalid("need n >= 1 and trials >= 1"));
    }
    audit(a, &AuditRequest::new(n, trials, seed))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OseReport {
    pub violations: u64,
    pub max_ratio_error: f64,
    pub evaluated: u64,
    pub skipped: u64,
}

impl OseReport {
    pub fn merge(self, o: Self) -> Self {
        Self {
            violations: self.violations + o.violations,
            max_ratio_error: self.max_ratio_error.max(o.max_ratio_error),
            evaluated: self.evaluated + o.evaluated,
            skipped: self.skipped + o.skipped,
        }
    }
}

impl Default for OseReport {
    fn default() -> Self {
        Self {
            violations: 0,
            max_ratio_error: 0.0,
            evaluated: 0,
            skipped: 0,
        }
    }
}

/// Precomputed `L^T L`, so `||L v||^2 = v^T (L^T L) v` costs `(nD)^2`
/// instead of `M n D` per pair.
#[derive(Clone, Debug)]
pub struct SketchGram {
    gram: Matrix,
}

impl SketchGram {
    pub fn new(l: &SketchOperator) -> Self {
        let m = l.matrix();
        Self {
            gram: m.transpose().matmul(m).expect("L^T L is always defined"),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn sketched_norm(&self, v: &[f64]) -> f64 {
        let gv = self.gram.mul_vec(v).expect("caller checks the length");
        libm::sqrt(dot(v, &gv).max(0.0))
    }
}

/// Adds the ose check of pool pair `index` to `report`.
pub fn ose_check_pair(
    a: &DirectionSet,
    gram: &SketchGram,
    n: usize,
    epsilon: f64,
    seed: RngSeed,
    index: u64,
    report: &mut OseReport,
) -> Result<()> {
    check_dim("sketch columns (n * D)", n * a.count(), gram.dim())?;
    let (x, y) = pool_pair(a, n, seed, index)?;
    let diff: Vec<f64> = beta(a, &x)?
        .flatten()
        .iter()
        .zip(beta(a, &y)?.flatten())
        .map(|(p, q)| p - q)
        .collect();
    let denom = crate::matrix::norm(&diff);
    if denom < 1e-10 {
        report.skipped += 1;
        return Ok(());
    }
    let rho = gram.sketched_norm(&diff) / denom;
    report.evaluated += 1;
    report.max_ratio_error = report.max_ratio_error.max(libm::fabs(rho - 1.0));
    if rho < 1.0 - epsilon || rho > 1.0 + epsilon {
        report.violations += 1;
    }
    Ok(())
}

/// Counts pool pairs whose sketched embedding difference leaves
/// `[1 - eps, 1 + eps]` times the unsketched one.
pub fn ose_check(
    a: &DirectionSet,
    l: &SketchOperator,
    n: usize,
    epsilon: f64,
    trials: u64,
    seed: RngSeed,
) -> Result<OseReport> {
    check_dim("sketch columns (n * D)", n * a.count(), l.matrix().cols())?;
    let gram = SketchGram::new(l);
    let mut report = OseReport::default();
    for i in 0..trials {
        ose_check_pair(a, &gram, n, epsilon, seed, i, &mut report)?;
    }
    Ok(report)
}
