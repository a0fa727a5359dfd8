//! Acceptance suite: one line per criterion, tolerances pinned below.
//!
//! Reference values are recomputed here with independent routines (Heap's
//! enumeration and bitmask DP for orbit distances, plain-loop sorted
//! embeddings, Jacobi eigenvalues for singular values, hand-copied tables).
//!
//! A criterion can be a known failure: its literal statement does not hold,
//! and the suite instead asserts the exact reason. Such lines print
//! `FAIL (known)` and do not fail the run; any other failure does.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use permorb::runners;
use permorb_core::audit::{
    estimate_distortion, gaussian_sketch, ose_check, ose_dimension, pool_pair,
    projective_uniformity, subset_sigma_lower_bound, upper_lipschitz, PuMethod,
};
use permorb_core::constructions::{
    adversarial_circle_pair, circle_directions, gaussian_directions, identity_augmented,
    matousek_counterexample, random_identity_augmented, sphere_directions, DEFAULT_MAX_POINTS,
};
use permorb_core::embeddings::SketchOperator;
use permorb_core::metrics::orbit_distance;
use permorb_core::rng::normal_vec;
use permorb_core::separation::{
    spot_check_injectivity, EmbeddingKind, SeparationProblem, SeparationStatus, SeparationVerdict,
    SpotCheckParams,
};
use permorb_core::{DirectionSet, Matrix, PointCloud, RngSeed};

// Pinned tolerances.
const AC1_REL: f64 = 1e-9;
const AC2_REL: f64 = 1e-9;
const AC3_SIGMA_ABS: f64 = 1e-9;
const AC4_COLLIDE_REL: f64 = 1e-8;
const AC4_SEPARATE_REL: f64 = 1e-3;
const AC5_DIST_ABS: f64 = 1e-9;
const AC6_MATCH_REL: f64 = 1e-12;
const CEILING_SLACK: f64 = 1e-9;
const WITNESS_GAP_REL: f64 = 1e-8;
const WITNESS_DIST_MIN: f64 = 1e-6;

// Pinned runtime limits.
const LIMIT_AC1: u64 = 60;
const LIMIT_AC2: u64 = 120;
const LIMIT_AC3: u64 = 300;
const LIMIT_AC4: u64 = 30;
const LIMIT_AC5: u64 = 60;
const LIMIT_AC6: u64 = 60;
const LIMIT_AC7: u64 = 600;
const LIMIT_AC8: f64 = 1.0;
const LIMIT_AC9: u64 = 60;
const LIMIT_AC10: u64 = 120;

enum Verdict {
    Pass,
    Fail,
    /// The literal criterion fails for the stated, verified reason.
    KnownFail(String),
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Outcome {
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }
}

// ---------------------------------------------------------------- oracles

/// Columns of `X A`, each sorted ascending, flattened column by column.
fn beta_ref(a: &Matrix, x: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.rows() * a.cols());
    for k in 0..a.cols() {
        let mut col: Vec<f64> = (0..x.rows())
            .map(|i| (0..x.cols()).map(|j| x.get(i, j) * a.get(j, k)).sum())
            .collect();
        col.sort_by(f64::total_cmp);
        out.extend(col);
    }
    out
}

fn gap_ref(a: &Matrix, x: &Matrix, y: &Matrix) -> f64 {
    beta_ref(a, x)
        .iter()
        .zip(beta_ref(a, y))
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

fn sq_dist(x: &Matrix, i: usize, y: &Matrix, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(y.row(j))
        .map(|(p, q)| (p - q) * (p - q))
        .sum()
}

/// Orbit distance by enumerating all `n!` matchings (Heap's algorithm).
fn dist_heap(x: &Matrix, y: &Matrix) -> f64 {
    let n = x.rows();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sq_dist(x, i, y, j)).collect())
        .collect();
    let eval = |p: &[usize]| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>();
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut best = eval(&p);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            best = best.min(eval(&p));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best.sqrt()
}

/// Orbit distance by dynamic programming over subsets of matched rows.
fn dist_dp(x: &Matrix, y: &Matrix) -> f64 {
    let n = x.rows();
    assert!(n <= 20);
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 0usize..(1 << n) {
        let i = mask.count_ones() as usize;
        if i == n || best[mask].is_infinite() {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                best[next] = best[next].min(best[mask] + sq_dist(x, i, y, j));
            }
        }
    }
    best[(1 << n) - 1].sqrt()
}

/// Singular values (descending) from the Jacobi eigenvalues of `A A^T`.
fn singular_values_ref(a: &Matrix) -> Vec<f64> {
    let d = a.rows();
    let mut g: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| a.row(i).iter().zip(a.row(j)).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| g[i][j] * g[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if g[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (g[q][q] - g[p][p]) / (2.0 * g[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (gkp, gkq) = (g[k][p], g[k][q]);
                    g[k][p] = c * gkp - s * gkq;
                    g[k][q] = s * gkp + c * gkq;
                }
                for k in 0..d {
                    let (gpk, gqk) = (g[p][k], g[q][k]);
                    g[p][k] = c * gpk - s * gqk;
                    g[q][k] = s * gpk + c * gqk;
                }
            }
        }
    }
    let mut s: Vec<f64> = (0..d).map(|i| g[i][i].max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn gaussian_cloud(seed: RngSeed, n: usize, d: usize) -> Matrix {
    Matrix::new(n, d, normal_vec(&mut seed.rng(), n * d)).unwrap()
}

// ------------------------------------------------------------- criteria

/// Hungarian orbit distance against `n!` enumeration.
fn ac1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n in 2..=7usize {
        for d in [1usize, 2, 5] {
            for t in 0..500u64 {
                let seed = RngSeed(1).derive((n * 10 + d) as u64).derive(t);
                let x = gaussian_cloud(seed.derive(0), n, d);
                // Every other pair is a perturbed permutation of x, where
                // the optimum is close to zero and easy to get wrong.
                let y = if t % 2 == 0 {
                    gaussian_cloud(seed.derive(1), n, d)
                } else {
                    let noise = gaussian_cloud(seed.derive(1), n, d).scale(1e-3);
                    let shifted = Matrix::from_fn(n, d, |i, j| x.get((i + 1) % n, j)).unwrap();
                    shifted.add(&noise).unwrap()
                };
                let fast = orbit_distance(&PointCloud::new(x.clone()), &PointCloud::new(y.clone()))
                    .unwrap()
                    .distance;
                let slow = dist_heap(&x, &y);
                worst = worst.max((fast - slow).abs() / slow.max(f64::MIN_POSITIVE));
                checked += 1;
            }
        }
    }
    Outcome::check(
        worst <= AC1_REL,
        format!("{checked} pairs, worst relative error {worst:.2e} (limit {AC1_REL:e})"),
    )
}

/// Embedding gap over orbit distance never exceeds sigma_1.
fn ac2() -> Outcome {
    let shapes = [
        (2, 3, 3),
        (2, 8, 4),
        (3, 3, 5),
        (3, 10, 2),
        (4, 6, 3),
        (5, 5, 4),
        (2, 40, 6),
        (6, 9, 3),
        (1, 4, 5),
        (3, 1, 4),
    ];
    let mut worst_ratio: f64 = 0.0;
    let mut pairs = 0;
    for (s, &(d, count, n)) in shapes.iter().enumerate() {
        let a = gaussian_directions(d, count, RngSeed(2).derive(s as u64)).unwrap();
        let sigma1 = singular_values_ref(a.matrix())[0];
        for i in 0..10_000u64 {
            let (x, y) = pool_pair(&a, n, RngSeed(20).derive(s as u64), i).unwrap();
            let dist = dist_dp(x.matrix(), y.matrix());
            if dist < 1e-8 {
                continue;
            }
            let ratio = gap_ref(a.matrix(), x.matrix(), y.matrix()) / dist / sigma1;
            worst_ratio = worst_ratio.max(ratio);
            pairs += 1;
        }
    }
    Outcome::check(
        worst_ratio <= 1.0 + AC2_REL,
        format!("10 matrices, {pairs} pairs, max gap/(sigma1 dist) = {worst_ratio:.12}"),
    )
}

/// Circle construction: sigma_1, projective uniformity, distortion <= 2n^2.
fn ac3() -> Outcome {
    let mut sigma_ok = true;
    let mut distortion_ok = true;
    let mut window_ok = true;
    let mut analysis_ok = true;
    let mut parts = Vec::new();
    let tp = runners::pool(None).unwrap();
    for n in [3usize, 4, 6, 8] {
        let count = 4 * n * n;
        let df = count as f64;
        let a = circle_directions(count).unwrap();
        let s = singular_values_ref(a.matrix());
        let want = (df / 2.0).sqrt();
        sigma_ok &= (s[0] - want).abs() <= AC3_SIGMA_ABS
            && (upper_lipschitz(&a) - want).abs() <= AC3_SIGMA_ABS;

        let delta = projective_uniformity(&a, 3, PuMethod::Exact2dSweep)
            .unwrap()
            .delta;
        window_ok &= delta >= 2.0 / df && delta <= 2.2 / df;
        // The third smallest |a_k . e| is smallest when e is perpendicular to
        // a bisector of neighbouring columns: sin(pi / D) ~ pi / D.
        analysis_ok &= (delta - (PI / df).sin()).abs() <= 1e-12 && delta >= 2.0 / df;

        let est = runners::estimate_distortion(&tp, &a, n, 10_000, RngSeed(3)).unwrap();
        let includes_adversarial = est.used + est.skipped == 10_000;
        let dist = est.distortion();
        distortion_ok &= includes_adversarial && dist <= 2.0 * (n * n) as f64;
        parts.push(format!(
            "n={n}: delta*D={:.4}, distortion={dist:.3}<= {}",
            delta * df,
            2 * n * n
        ));
    }
    let detail = parts.join("; ");
    if !(sigma_ok && distortion_ok) {
        return Outcome::check(
            false,
            format!("sigma1 ok={sigma_ok}, distortion ok={distortion_ok}; {detail}"),
        );
    }
    if window_ok {
        return Outcome::check(true, detail);
    }
    if analysis_ok {
        return Outcome {
            verdict: Verdict::KnownFail(
                "exact delta is sin(pi/D) ~ 3.14/D, above the 2.2/D window; 2/D is only a lower bound (verified)".into(),
            ),
            detail,
        };
    }
    Outcome::check(
        false,
        format!("delta outside window and not sin(pi/D); {detail}"),
    )
}

/// Subset-sum counterexamples collide under beta while staying apart.
fn ac4() -> Outcome {
    let mut worst_gap: f64 = 0.0;
    let mut min_dist = f64::INFINITY;
    let mut built = 0;
    for (d, count) in [(2, 3), (2, 4), (3, 4), (4, 6)] {
        for s in 0..20u64 {
            let a = gaussian_directions(d, count, RngSeed(4).derive(s)).unwrap();
            let Ok(p) = matousek_counterexample(&a, RngSeed(40).derive(s), DEFAULT_MAX_POINTS)
            else {
                return Outcome::check(
                    false,
                    format!("construction failed at d={d}, D={count}, seed {s}"),
                );
            };
            let scale = p.scale();
            worst_gap = worst_gap.max(gap_ref(a.matrix(), p.x.matrix(), p.y.matrix()) / scale);
            min_dist = min_dist.min(dist_heap(p.x.matrix(), p.y.matrix()) / scale);
            built += 1;
        }
    }
    Outcome::check(
        worst_gap <= AC4_COLLIDE_REL && min_dist >= AC4_SEPARATE_REL,
        format!("{built} pairs, max gap/scale {worst_gap:.2e}, min dist/scale {min_dist:.3e}"),
    )
}

/// The unit-distance circle pair has an embedding gap of order n^-1/2.
fn ac5() -> Outcome {
    let mut dist_err: f64 = 0.0;
    let mut worst: f64 = 0.0;
    let mut tested = 0;
    for d in [2usize, 3, 5] {
        for n in [4usize, 8, 16] {
            let p = adversarial_circle_pair(n, d).unwrap();
            dist_err = dist_err.max((dist_dp(p.x.matrix(), p.y.matrix()) - 1.0).abs());
            dist_err = dist_err.max((p.distance - 1.0).abs());
            for s in 0..20u64 {
                let count = [d, 2 * d, 7, 30][s as usize % 4].max(2);
                let a = gaussian_directions(
                    d,
                    count,
                    RngSeed(5).derive((d * 100 + n) as u64).derive(s),
                )
                .unwrap();
                let sv = singular_values_ref(a.matrix());
                let (s1, s2) = (sv[0], sv.get(1).copied().unwrap_or(0.0));
                let nf = n as f64;
                let ceiling = (2.0 + 1.0 / nf).sqrt() * PI / nf.sqrt() * (s1 * s1 + s2 * s2).sqrt();
                worst = worst.max(gap_ref(a.matrix(), p.x.matrix(), p.y.matrix()) / ceiling);
                tested += 1;
            }
        }
    }
    Outcome::check(
        dist_err <= AC5_DIST_ABS && worst <= 1.0 + CEILING_SLACK,
        format!("dist error {dist_err:.1e}, {tested} matrices, max gap/ceiling {worst:.4}"),
    )
}

/// sigma_min of a 2 x 2 matrix in closed form.
fn sigma_min_2x2(p: f64, q: f64, r: f64, s: f64) -> f64 {
    let fro2 = p * p + q * q + r * r + s * s;
    let det = p * s - q * r;
    let s1 = ((fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    if s1 == 0.0 {
        0.0
    } else {
        det.abs() / s1
    }
}

/// Certified subset bound: exhaustive recomputation and empirical C_1.
fn ac6() -> Outcome {
    let a = gaussian_directions(2, 10, RngSeed(6)).unwrap();
    let bound = subset_sigma_lower_bound(&a, 1, u128::MAX).unwrap();
    let m = a.matrix();
    let mut oracle = f64::INFINITY;
    let mut subsets = 0;
    for i in 0..10 {
        for j in i + 1..10 {
            oracle = oracle.min(sigma_min_2x2(
                m.get(0, i),
                m.get(0, j),
                m.get(1, i),
                m.get(1, j),
            ));
            subsets += 1;
        }
    }
    let matches = bound.certified
        && bound.subsets_examined == subsets
        && (bound.value - oracle).abs() <= AC6_MATCH_REL * oracle;
    let c1 = estimate_distortion(&a, 3, 10_000, RngSeed(60)).unwrap().c1;
    Outcome::check(
        matches && bound.value <= c1,
        format!(
            "bound {:.12} vs oracle {oracle:.12} over {subsets} subsets; empirical C1 {c1:.6}",
            bound.value
        ),
    )
}

fn dirs(rows: &[&[f64]]) -> DirectionSet {
    DirectionSet::new(
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap(),
    )
}

fn certify(a: &DirectionSet, n: usize) -> SeparationVerdict {
    let problem = SeparationProblem::new(a, n, RngSeed(0), true).unwrap();
    let tp = runners::pool(None).unwrap();
    runners::certify(&tp, &problem, u128::MAX, 0, None).unwrap()
}

/// A reported witness must be a genuine collision of distinct orbits.
fn witness_is_genuine(a: &DirectionSet, v: &SeparationVerdict) -> bool {
    let Some(w) = &v.witness else { return false };
    let (x, y) = w.clouds();
    let scale = x.frobenius_norm().max(1.0);
    gap_ref(a.matrix(), x.matrix(), y.matrix())
        <= WITNESS_GAP_REL * scale * a.matrix().frobenius_norm()
        && dist_dp(x.matrix(), y.matrix()) >= WITNESS_DIST_MIN * scale
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Certifier on the reference matrices and on random tails.
fn ac7() -> Outcome {
    let a336 = dirs(&[
        &[1., 0., 0., 0.56, 0.66, 0.21],
        &[0., 1., 0., 0.24, 0.58, 0.],
        &[0., 0., 1., 0.71, 0.53, 0.45],
    ]);
    let a348 = dirs(&[
        &[1., 0., 0., 0., 0.32, 0.38, 0.49, 0.75],
        &[0., 1., 0., 0., 0.95, 0.77, 0.45, 0.28],
        &[0., 0., 1., 0., 0.03, 0.80, 0.65, 0.68],
        &[0., 0., 0., 1., 0.44, 0.19, 0.71, 0.66],
    ]);
    let a424 = dirs(&[&[1., 0., 0.83, 0.16], &[0., 1., 0.95, 0.78]]);
    let a525 = dirs(&[
        &[1., 0., 0.814724, 0.126987, 0.632359],
        &[0., 1., 0.905792, 0.913376, 0.097540],
    ]);

    let mut parts = Vec::new();
    let mut others_ok = true;
    for (name, a, n) in [
        ("n3d4D8", &a348, 3),
        ("n4d2D4", &a424, 4),
        ("n5d2D5", &a525, 5),
    ] {
        let v = certify(a, n);
        others_ok &=
            v.status == SeparationStatus::Separating && v.tuples_examined == v.total_tuples;
        parts.push(format!("{name}: {:?}", v.status));
    }

    let mut random_ok = true;
    for (n, d, count) in [(3, 2, 3), (3, 3, 5), (3, 4, 7)] {
        let mut found = 0;
        for s in 0..10u64 {
            let a = random_identity_augmented(d, count, RngSeed(7).derive(s)).unwrap();
            let v = certify(&a, n);
            if v.status == SeparationStatus::WitnessFound && witness_is_genuine(&a, &v) {
                found += 1;
            }
        }
        random_ok &= found >= 9;
        parts.push(format!("random n{n}d{d}D{count}: {found}/10 witnesses"));
    }

    let v336 = certify(&a336, 3);
    parts.push(format!("n3d3D6: {:?}", v336.status));
    let detail = parts.join("; ");
    if !(others_ok && random_ok) {
        return Outcome::check(false, detail);
    }
    if v336.status == SeparationStatus::Separating {
        return Outcome::check(true, detail);
    }
    // The printed tail has an exact zero, so e1, e3 and its third column are
    // linearly dependent (not full spark). Any small nonzero value there
    // separates.
    let m = a336.matrix();
    let dependent = det3([
        [1., 0., m.get(0, 5)],
        [0., 0., m.get(1, 5)],
        [0., 1., m.get(2, 5)],
    ]) == 0.0;
    let genuine = v336.status == SeparationStatus::WitnessFound && witness_is_genuine(&a336, &v336);
    let tail = Matrix::from_rows(&[
        vec![0.56, 0.66, 0.21],
        vec![0.24, 0.58, 0.001],
        vec![0.71, 0.53, 0.45],
    ])
    .unwrap();
    let perturbed = certify(&identity_augmented(&tail).unwrap(), 3).status;
    let detail = format!("{detail}; with 0 -> 0.001: {perturbed:?}");
    if dependent && genuine && perturbed == SeparationStatus::Separating {
        Outcome {
            verdict: Verdict::KnownFail(
                "printed n=3,d=3,D=6 matrix is not full spark (exact 0 entry); its witness collides under beta, the perturbed matrix separates (verified)"
                    .into(),
            ),
            detail,
        }
    } else {
        Outcome::check(false, detail)
    }
}

const MINIMAL: [[usize; 5]; 5] = [
    [6, 10, 14, 18, 22],
    [12, 21, 30, 39, 48],
    [20, 36, 52, 68, 84],
    [30, 55, 80, 105, 130],
    [42, 78, 114, 150, 186],
];
const MAXIMAL: [[usize; 5]; 5] = [
    [4, 8, 12, 16, 20],
    [6, 12, 18, 24, 30],
    [12, 24, 36, 48, 60],
    [15, 30, 45, 60, 75],
    [18, 36, 54, 72, 90],
];

fn parse_table(text: &str) -> Vec<Vec<usize>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("n\\d"))
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect()
}

/// The CLI regenerates both tables cell for cell.
fn ac8() -> (Outcome, Duration) {
    let dir = std::env::temp_dir().join(format!("permorb-ac8-{}", std::process::id()));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_permorb"))
        .args(["reproduce", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    let read = |f: &str| parse_table(&std::fs::read_to_string(dir.join(f)).unwrap_or_default());
    let (min, max) = (read("minimal.csv"), read("maximal.csv"));
    let _ = std::fs::remove_dir_all(&dir);
    let mut wrong = 0;
    for i in 0..5 {
        for j in 0..5 {
            wrong += usize::from(min.get(i).and_then(|r| r.get(j)) != Some(&MINIMAL[i][j]));
            wrong += usize::from(max.get(i).and_then(|r| r.get(j)) != Some(&MAXIMAL[i][j]));
        }
    }
    let ok = status.code() == Some(0) && wrong == 0 && elapsed.as_secs_f64() < LIMIT_AC8;
    (
        Outcome::check(
            ok,
            format!(
                "exit {:?}, {wrong} differing cells, minimal(3,3)={:?}, maximal(4,2)={:?}",
                status.code(),
                min.get(1).map(|r| r[1]),
                max.get(2).map(|r| r[0])
            ),
        ),
        elapsed,
    )
}

/// Random delta embeddings at D = (2n-1)d show no collisions.
fn ac9() -> Outcome {
    let mut clean = 0;
    let mut tested = 0;
    for s in 0..20u64 {
        let r = spot_check_injectivity(&SpotCheckParams {
            kind: EmbeddingKind::Delta,
            n: 3,
            d: 2,
            count: 10,
            trials: 10_000,
            seed: RngSeed(9).derive(s),
            inject_counterexample: false,
        })
        .unwrap();
        tested += r.pairs_tested;
        clean += usize::from(r.collisions == 0 && r.false_separations == 0);
    }
    // The detector itself must fire on a known collision.
    let probe = spot_check_injectivity(&SpotCheckParams {
        kind: EmbeddingKind::Beta,
        n: 4,
        d: 2,
        count: 3,
        trials: 10,
        seed: RngSeed(9),
        inject_counterexample: true,
    })
    .unwrap();
    let detector = probe.injected_collision == Some(true);
    Outcome::check(
        clean >= 19 && detector,
        format!("{clean}/20 seeds collision-free over {tested} pairs; detector fires on injected pair: {detector}"),
    )
}

/// Sketch of the stated dimension preserves all pool differences.
fn ac10() -> Outcome {
    let (n, d, count, eps, eta, c) = (3, 2, 7, 0.25, 0.1, 4.0);
    let m = ose_dimension(n, d, count, eps, eta, c).unwrap();
    let tp = runners::pool(None).unwrap();
    let mut clean = 0;
    let mut agree = true;
    for s in 0..10u64 {
        let seed = RngSeed(10).derive(s);
        let a = gaussian_directions(d, count, seed.derive(0)).unwrap();
        let l = gaussian_sketch(n, count, m, seed.derive(1)).unwrap();
        let r = runners::ose_check(&tp, &a, &l, n, eps, 10_000, seed.derive(2)).unwrap();
        clean += usize::from(r.violations == 0);
        if s == 0 {
            agree = r == ose_check(&a, &l, n, eps, 10_000, seed.derive(2)).unwrap()
                && direct_violations(&a, &l, n, eps, 2_000, seed.derive(2))
                    == sampled_violations(&a, &l, n, eps, 2_000, seed.derive(2));
        }
    }
    Outcome::check(
        clean >= 9 && agree,
        format!("M={m}; {clean}/10 seeds without violations; routes agree: {agree}"),
    )
}

fn direct_violations(
    a: &DirectionSet,
    l: &SketchOperator,
    n: usize,
    eps: f64,
    trials: u64,
    seed: RngSeed,
) -> u64 {
    let mut v = 0;
    for i in 0..trials {
        let (x, y) = pool_pair(a, n, seed, i).unwrap();
        let diff: Vec<f64> = beta_ref(a.matrix(), x.matrix())
            .iter()
            .zip(beta_ref(a.matrix(), y.matrix()))
            .map(|(p, q)| p - q)
            .collect();
        let norm = diff.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm < 1e-10 {
            continue;
        }
        let sk = l.matrix().mul_vec(&diff).unwrap();
        let rho = sk.iter().map(|t| t * t).sum::<f64>().sqrt() / norm;
        v += u64::from(rho < 1.0 - eps || rho > 1.0 + eps);
    }
    v
}

fn sampled_violations(
    a: &DirectionSet,
    l: &SketchOperator,
    n: usize,
    eps: f64,
    trials: u64,
    seed: RngSeed,
) -> u64 {
    ose_check(a, l, n, eps, trials, seed).unwrap().violations
}

/// Random directions at D = 16 n^2 d have distortion within 4 n^2.
fn ac11() -> Outcome {
    let (n, d) = (4usize, 3usize);
    let count = 16 * n * n * d;
    let limit = 4.0 * (n * n) as f64;
    let tp = runners::pool(None).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, sphere) in [("gaussian", false), ("sphere", true)] {
        let mut good = 0;
        let mut worst: f64 = 0.0;
        for s in 0..10u64 {
            let seed = RngSeed(11).derive(s);
            let a = if sphere {
                sphere_directions(d, count, seed)
            } else {
                gaussian_directions(d, count, seed)
            }
            .unwrap();
            let est = runners::estimate_distortion(&tp, &a, n, 10_000, seed.derive(1)).unwrap();
            worst = worst.max(est.distortion());
            good += usize::from(est.distortion() <= limit);
        }
        ok &= good >= 9;
        parts.push(format!(
            "{name}: {good}/10 within {limit}, worst {worst:.3}"
        ));
    }
    Outcome::check(ok, parts.join("; "))
}

fn timed(f: fn() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

type Runner = Box<dyn Fn() -> (Outcome, Duration)>;

fn main() -> ExitCode {
    let criteria: [(&str, Runner, Option<u64>); 11] = [
        (
            "AC1 oracle equivalence",
            Box::new(|| timed(ac1)),
            Some(LIMIT_AC1),
        ),
        (
            "AC2 upper Lipschitz",
            Box::new(|| timed(ac2)),
            Some(LIMIT_AC2),
        ),
        (
            "AC3 circle construction",
            Box::new(|| timed(ac3)),
            Some(LIMIT_AC3),
        ),
        (
            "AC4 counterexample generator",
            Box::new(|| timed(ac4)),
            Some(LIMIT_AC4),
        ),
        (
            "AC5 sqrt(n) ceiling",
            Box::new(|| timed(ac5)),
            Some(LIMIT_AC5),
        ),
        ("AC6 subset bound", Box::new(|| timed(ac6)), Some(LIMIT_AC6)),
        (
            "AC7 separation certifier",
            Box::new(|| timed(ac7)),
            Some(LIMIT_AC7),
        ),
        ("AC8 table reproduction", Box::new(ac8), None),
        (
            "AC9 delta genericity",
            Box::new(|| timed(ac9)),
            Some(LIMIT_AC9),
        ),
        (
            "AC10 sketch embedding",
            Box::new(|| timed(ac10)),
            Some(LIMIT_AC10),
        ),
        ("AC11 random directions", Box::new(|| timed(ac11)), None),
    ];
    let (mut pass, mut known, mut fail) = (0, 0, 0);
    for (name, run, limit) in criteria {
        let (outcome, elapsed) = run();
        let slow = limit.is_some_and(|l| elapsed.as_secs() >= l);
        let secs = elapsed.as_secs_f64();
        match (&outcome.verdict, slow) {
            (Verdict::Pass, false) => {
                pass += 1;
                println!("{name}: PASS [{secs:.2}s] {}", outcome.detail);
            }
            (Verdict::KnownFail(why), false) => {
                known += 1;
                println!(
                    "{name}: FAIL (known) [{secs:.2}s] {why}; {}",
                    outcome.detail
                );
            }
            (_, true) => {
                fail += 1;
                println!(
                    "{name}: FAIL [{secs:.2}s over {}s limit] {}",
                    limit.unwrap_or(0),
                    outcome.detail
                );
            }
            (Verdict::Fail, false) => {
                fail += 1;
                println!("{name}: FAIL [{secs:.2}s] {}", outcome.detail);
            }
        }
    }
    println!("acceptance: {pass} passed, {known} known failures, {fail} failed");
    if fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
