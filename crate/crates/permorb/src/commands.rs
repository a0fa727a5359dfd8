//! Subcommand implementations. Each returns the process exit code.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use permorb_core::audit::{
    self, gaussian_sketch, ose_dimension, AuditRequest, PuMethod, DEFAULT_OSE_CONSTANT,
};
use permorb_core::constructions::{
    self, adversarial_circle_pair, aligned_adversarial_pair, circle_directions,
    gaussian_directions, identity_augmented, matousek_counterexample, random_identity_augmented,
    sphere_directions, CounterexamplePair, DEFAULT_MAX_POINTS,
};
use permorb_core::embeddings::{beta_sketch, delta, RowProjector, SketchOperator};
use permorb_core::metrics::{embedding_gap, orbit_distance, sliced_w2_sampled, wasserstein2};
use permorb_core::rng::normal_vec;
use permorb_core::separation::{SeparationProblem, SeparationStatus, DEFAULT_CERTIFY_BUDGET};
use permorb_core::tables::{
    self, build_table, compare_with_reference, gap_grid, injectivity_summary, TableKind,
};
use permorb_core::{beta, DirectionSet, Matrix, PointCloud, RngSeed};

use crate::checkpoint::Checkpoint;
use crate::csv_io::{read_matrix, write_matrix, write_text};
use crate::error::{exit, CliError};
use crate::json::{self, big, VERSION};
use crate::runners::{self, CheckpointSink};

#[derive(Parser, Debug)]
#[command(
    name = "permorb",
    version,
    about = "Sorted permutation-invariant embeddings of point clouds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance for reported collision flags.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Enumeration budget: tuples for `certify`, subsets for `audit`.
    #[arg(long, global = true, env = "PERMORB_BUDGET")]
    pub budget: Option<u128>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file, or directory for commands writing several files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build direction matrices or counterexample pairs.
    Construct(ConstructArgs),
    /// Evaluate an embedding of a point cloud.
    Embed(EmbedArgs),
    /// Orbit distance between two clouds.
    Distance(DistanceArgs),
    /// Distortion report for a direction matrix.
    Audit(AuditArgs),
    /// Decide whether an identity-augmented matrix separates orbits.
    Certify(CertifyArgs),
    /// Colliding pair for a matrix with too few directions.
    Counterexample(CounterexampleArgs),
    /// Regenerate the dimension tables and check them.
    Reproduce(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ConstructKind {
    Gaussian,
    Sphere,
    Circle,
    MatousekPair,
    AdversarialPair,
    IdentityAugmented,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    pub kind: ConstructKind,
    /// Ambient dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of directions.
    #[arg(long = "D")]
    pub count: Option<usize>,
    /// Points per cloud (adversarial pair).
    #[arg(long)]
    pub n: Option<usize>,
    /// Direction matrix CSV (matousek-pair; aligned adversarial pair).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// d x (D - d) tail CSV for identity-augmented; random when absent.
    #[arg(long)]
    pub tail: Option<PathBuf>,
    /// Largest cloud the subset-sum construction may emit.
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    pub max_points: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum EmbedKind {
    Beta,
    Delta,
    Sketch,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    pub kind: EmbedKind,
    #[arg(long)]
    pub matrix: PathBuf,
    /// n x d point cloud CSV.
    #[arg(long)]
    pub cloud: PathBuf,
    /// n x D projector for delta; Gaussian from the seed when absent.
    #[arg(long)]
    pub projector: Option<PathBuf>,
    /// M x nD sketch CSV; Gaussian with `--m` rows when absent.
    #[arg(long)]
    pub sketch: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Also report the embedding gap for this direction matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Also report sliced W2 over this many random unit directions.
    #[arg(long)]
    pub sliced: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum PuChoice {
    Exact,
    Sphere,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Pool pairs for the empirical estimate.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Subset size for the deterministic lower bound.
    #[arg(long)]
    pub subset_r: Option<usize>,
    /// Rank for projective uniformity and the blueprint bound.
    #[arg(long)]
    pub pu_m: Option<usize>,
    /// Exact sweep needs d = 2; defaults to exact there, sphere otherwise.
    #[arg(long)]
    pub pu_method: Option<PuChoice>,
    /// Also check a Gaussian sketch as a subspace embedding.
    #[arg(long)]
    pub check_ose: bool,
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = DEFAULT_OSE_CONSTANT)]
    pub c: f64,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub n: usize,
    /// Progress file; an existing one is resumed.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Enumerate the first permutation too instead of fixing it.
    #[arg(long)]
    pub unreduced: bool,
}

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Direction matrix CSV; Gaussian from `--d`, `--D` and the seed when absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long = "D")]
    pub count: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_POINTS)]
    pub max_points: usize,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    #[arg(long, default_value_t = 6)]
    pub d_max: usize,
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol < 0.0 {
        return Err(CliError::invalid("--tol must be non-negative"));
    }
    if g.threads == Some(0) {
        return Err(CliError::invalid("--threads must be positive"));
    }
    match &cli.command {
        Command::Construct(a) => construct(g, a),
        Command::Embed(a) => embed(g, a),
        Command::Distance(a) => distance(g, a),
        Command::Audit(a) => run_audit(g, a),
        Command::Certify(a) => certify(g, a),
        Command::Counterexample(a) => counterexample(g, a),
        Command::Reproduce(a) => reproduce(g, a),
    }
}

fn need(v: Option<usize>, flag: &str) -> Result<usize, CliError> {
    match v {
        Some(0) => Err(CliError::invalid(format!("{flag} must be positive"))),
        Some(v) => Ok(v),
        None => Err(CliError::invalid(format!("{flag} is required"))),
    }
}

fn positive(v: usize, flag: &str) -> Result<usize, CliError> {
    need(Some(v), flag)
}

fn directions(path: &Path) -> Result<DirectionSet, CliError> {
    Ok(DirectionSet::new(read_matrix(path)?))
}

fn cloud(path: &Path) -> Result<PointCloud, CliError> {
    Ok(PointCloud::new(read_matrix(path)?))
}

/// Writes to `--out` when given, stdout otherwise.
fn emit(g: &Global, text: &str) -> Result<(), CliError> {
    match &g.out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn header(command: &str, g: &Global) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(VERSION));
    m.insert("seed".into(), json!(g.seed));
    m
}

fn out_dir(g: &Global) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn directions_certificate(kind: &str, a: &DirectionSet, extra: Value) -> Value {
    let sv = a.singular_values();
    let mut v = json!({
        "kind": kind,
        "d": a.d(),
        "D": a.count(),
        "sigma1": sv.first().copied().unwrap_or(0.0),
        "singular_values": sv,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn write_pair(
    dir: &Path,
    pair: &CounterexamplePair,
    a: Option<&DirectionSet>,
    tol: f64,
) -> Result<Value, CliError> {
    write_matrix(&dir.join("X.csv"), pair.x.matrix())?;
    write_matrix(&dir.join("Y.csv"), pair.y.matrix())?;
    let mut v = json::pair(pair);
    if let (Some(a), Value::Object(m)) = (a, &mut v) {
        let gap = embedding_gap(a, &pair.x, &pair.y)?;
        m.insert("embedding_gap".into(), json!(gap));
        m.insert("collides".into(), json!(gap <= tol * pair.scale().max(1.0)));
    }
    Ok(v)
}

fn construct(g: &Global, args: &ConstructArgs) -> Result<u8, CliError> {
    let dir = out_dir(g);
    let seed = RngSeed(g.seed);
    let mut cert = header("construct", g);
    let body = match args.kind {
        ConstructKind::Gaussian | ConstructKind::Sphere | ConstructKind::Circle => {
            let (name, a) = match args.kind {
                ConstructKind::Gaussian => (
                    "gaussian",
                    gaussian_directions(need(args.d, "--d")?, need(args.count, "--D")?, seed)?,
                ),
                ConstructKind::Sphere => (
                    "sphere",
                    sphere_directions(need(args.d, "--d")?, need(args.count, "--D")?, seed)?,
                ),
                _ => {
                    if let Some(d) = args.d.filter(|&d| d != 2) {
                        return Err(CliError::invalid(format!(
                            "circle directions live in d = 2, got d = {d}"
                        )));
                    }
                    ("circle", circle_directions(need(args.count, "--D")?)?)
                }
            };
            write_matrix(&dir.join("A.csv"), a.matrix())?;
            directions_certificate(name, &a, json!({}))
        }
        ConstructKind::IdentityAugmented => {
            let a = match &args.tail {
                Some(p) => identity_augmented(&read_matrix(p)?)?,
                None => {
                    random_identity_augmented(need(args.d, "--d")?, need(args.count, "--D")?, seed)?
                }
            };
            write_matrix(&dir.join("A.csv"), a.matrix())?;
            directions_certificate(
                "identity-augmented",
                &a,
                json!({ "random_tail": args.tail.is_none() }),
            )
        }
        ConstructKind::AdversarialPair => {
            let n = need(args.n, "--n")?;
            match &args.matrix {
                Some(p) => {
                    let a = directions(p)?;
                    let pair = aligned_adversarial_pair(&a, n)?;
                    write_pair(&dir, &pair, Some(&a), g.tol)?
                }
                None => write_pair(
                    &dir,
                    &adversarial_circle_pair(n, need(args.d, "--d")?)?,
                    None,
                    g.tol,
                )?,
            }
        }
        ConstructKind::MatousekPair => {
            let a = match &args.matrix {
                Some(p) => directions(p)?,
                None => gaussian_directions(
                    need(args.d, "--d")?,
                    need(args.count, "--D")?,
                    seed.derive(1),
                )?,
            };
            let pair =
                matousek_counterexample(&a, seed, positive(args.max_points, "--max-points")?)?;
            write_matrix(&dir.join("A.csv"), a.matrix())?;
            write_pair(&dir, &pair, Some(&a), g.tol)?
        }
    };
    cert.insert("certificate".into(), body);
    write_text(
        &dir.join("certificate.json"),
        &json::to_string(&Value::Object(cert)),
    )?;
    Ok(exit::OK)
}

fn embed(g: &Global, args: &EmbedArgs) -> Result<u8, CliError> {
    let a = directions(&args.matrix)?;
    let x = cloud(&args.cloud)?;
    let seed = RngSeed(g.seed);
    let out = match args.kind {
        EmbedKind::Beta => beta(&a, &x)?.into_matrix(),
        EmbedKind::Delta => {
            let b = match &args.projector {
                Some(p) => read_matrix(p)?,
                None => Matrix::new(
                    x.n(),
                    a.count(),
                    normal_vec(&mut seed.rng(), x.n() * a.count()),
                )?,
            };
            row(delta(&a, &RowProjector::new(b), &x)?)?
        }
        EmbedKind::Sketch => {
            let l = match (&args.sketch, args.m) {
                (Some(p), _) => SketchOperator::new(read_matrix(p)?),
                (None, m) => {
                    gaussian_sketch(x.n(), a.count(), need(m, "--m (or --sketch)")?, seed)?
                }
            };
            row(beta_sketch(&a, &l, &x)?)?
        }
    };
    emit(g, &crate::csv_io::format_matrix(&out))?;
    Ok(exit::OK)
}

fn row(v: Vec<f64>) -> Result<Matrix, CliError> {
    Ok(Matrix::new(1, v.len(), v)?)
}

fn distance(g: &Global, args: &DistanceArgs) -> Result<u8, CliError> {
    let x = cloud(&args.x)?;
    let y = cloud(&args.y)?;
    let od = orbit_distance(&x, &y)?;
    let mut v = header("distance", g);
    v.insert("n".into(), json!(x.n()));
    v.insert("d".into(), json!(x.d()));
    v.insert("orbit_distance".into(), json!(od.distance));
    v.insert("sigma".into(), json::perm(&od.sigma));
    v.insert("w2".into(), json!(wasserstein2(&x, &y)?));
    if let Some(p) = &args.matrix {
        let a = directions(p)?;
        let gap = embedding_gap(&a, &x, &y)?;
        let scale = x.frobenius_norm().max(y.frobenius_norm()).max(1.0);
        v.insert("embedding_gap".into(), json!(gap));
        v.insert(
            "ratio".into(),
            if od.distance > 0.0 {
                json!(gap / od.distance)
            } else {
                Value::Null
            },
        );
        v.insert("collides".into(), json!(gap <= g.tol * scale));
    }
    if let Some(k) = args.sliced {
        let theta =
            constructions::sphere_directions(x.d(), positive(k, "--sliced")?, RngSeed(g.seed))?;
        let s = sliced_w2_sampled(&x, &y, &theta)?;
        v.insert(
            "sliced_w2".into(),
            json!({ "value": s.value, "directions": k, "unit_directions": s.unit_directions }),
        );
    }
    emit(g, &json::to_string(&Value::Object(v)))?;
    Ok(exit::OK)
}

fn run_audit(g: &Global, args: &AuditArgs) -> Result<u8, CliError> {
    let a = directions(&args.matrix)?;
    let n = positive(args.n, "--n")?;
    let trials = args.trials;
    if trials == 0 {
        return Err(CliError::invalid("--trials must be positive"));
    }
    let seed = RngSeed(g.seed);
    let mut req = AuditRequest::new(n, trials, seed);
    req.subset_r = args.subset_r;
    req.pu_m = args.pu_m;
    if let Some(b) = g.budget {
        req.subset_budget = b;
    }
    req.pu_method = match args.pu_method {
        Some(PuChoice::Exact) => Some(PuMethod::Exact2dSweep),
        Some(PuChoice::Sphere) => Some(PuMethod::sphere(a.d(), seed.derive(7))),
        None => None,
    };
    let tp = runners::pool(g.threads)?;
    let est = runners::estimate_distortion(&tp, &a, n, trials, seed)?;
    let report = audit::assemble_report(&a, &req, est)?;

    let mut v = header("audit", g);
    v.insert(
        "parameters".into(),
        json!({
            "n": n,
            "d": a.d(),
            "D": a.count(),
            "trials": trials,
            "subset_r": args.subset_r,
            "subset_budget": big(req.subset_budget),
            "pu_m": args.pu_m,
        }),
    );
    v.insert("report".into(), json::audit_report(&report));
    if args.check_ose {
        let m = ose_dimension(n, a.d(), a.count(), args.epsilon, args.eta, args.c)?;
        let l = gaussian_sketch(n, a.count(), m, seed.derive(8))?;
        let r = runners::ose_check(&tp, &a, &l, n, args.epsilon, trials, seed.derive(9))?;
        let mut block = json::ose(&r);
        if let Value::Object(b) = &mut block {
            b.insert("m".into(), json!(m));
            b.insert("epsilon".into(), json!(args.epsilon));
            b.insert("eta".into(), json!(args.eta));
            b.insert("c".into(), json!(args.c));
        }
        v.insert("ose_check".into(), block);
    }
    emit(g, &json::to_string(&Value::Object(v)))?;
    Ok(if report.budget_exceeded() {
        exit::BUDGET_PARTIAL
    } else {
        exit::OK
    })
}

fn certify(g: &Global, args: &CertifyArgs) -> Result<u8, CliError> {
    let a = directions(&args.matrix)?;
    let n = positive(args.n, "--n")?;
    let reduced = !args.unreduced;
    let problem = SeparationProblem::new(&a, n, RngSeed(g.seed), reduced)?;
    let budget = g.budget.unwrap_or(DEFAULT_CERTIFY_BUDGET);
    let start = match &args.checkpoint {
        Some(p) if p.exists() => Checkpoint::load(p)?.resume_index(&problem, g.seed, reduced)?,
        _ => 0,
    };
    let sink = args.checkpoint.as_deref().map(|path| CheckpointSink {
        path,
        seed: g.seed,
        reduced,
    });
    let tp = runners::pool(g.threads)?;
    let verdict = runners::certify(&tp, &problem, budget, start, sink.as_ref())?;

    let mut v = header("certify", g);
    v.insert(
        "parameters".into(),
        json!({ "n": n, "d": a.d(), "D": a.count(), "reduced": reduced, "resumed_from": big(start) }),
    );
    v.insert("verdict".into(), json::verdict(&verdict));
    emit(g, &json::to_string(&Value::Object(v)))?;
    Ok(match verdict.status {
        SeparationStatus::Separating => exit::OK,
        SeparationStatus::WitnessFound => exit::WITNESS_FOUND,
        SeparationStatus::Inconclusive => exit::INCONCLUSIVE,
    })
}

fn counterexample(g: &Global, args: &CounterexampleArgs) -> Result<u8, CliError> {
    let seed = RngSeed(g.seed);
    let a = match &args.matrix {
        Some(p) => directions(p)?,
        None => gaussian_directions(
            need(args.d, "--d")?,
            need(args.count, "--D")?,
            seed.derive(1),
        )?,
    };
    let pair = matousek_counterexample(&a, seed, positive(args.max_points, "--max-points")?)?;
    let dir = out_dir(g);
    let mut v = header("counterexample", g);
    v.insert("d".into(), json!(a.d()));
    v.insert("D".into(), json!(a.count()));
    v.insert("n".into(), json!(pair.x.n()));
    v.insert("pair".into(), write_pair(&dir, &pair, Some(&a), g.tol)?);
    write_matrix(&dir.join("A.csv"), a.matrix())?;
    write_text(
        &dir.join("certificate.json"),
        &json::to_string(&Value::Object(v)),
    )?;
    Ok(exit::OK)
}

fn table_text(t: &tables::Table) -> String {
    let mut s = format!(
        "# {} embedding dimension nD; rows n, columns d\nn\\d",
        t.kind.name()
    );
    for d in &t.ds {
        s += &format!(",{d}");
    }
    s.push('\n');
    for (n, row) in t.ns.iter().zip(&t.cells) {
        s += &n.to_string();
        for c in row {
            s += &format!(",{c}");
        }
        s.push('\n');
    }
    s
}

fn reproduce(g: &Global, args: &ReproduceArgs) -> Result<u8, CliError> {
    if !(2..=16).contains(&args.n_max) || !(2..=16).contains(&args.d_max) {
        return Err(CliError::invalid("--n-max and --d-max must lie in 2..=16"));
    }
    let ns: Vec<usize> = (2..=args.n_max).collect();
    let ds: Vec<usize> = (2..=args.d_max).collect();
    let minimal = build_table(TableKind::Minimal, &ns, &ds)?;
    let maximal = build_table(TableKind::Maximal, &ns, &ds)?;

    let mut summary = String::from("n,d,embedding,dimension,sufficient,necessary\n");
    for &n in &ns {
        for &d in &ds {
            for b in injectivity_summary(n, d)? {
                summary += &format!(
                    "{n},{d},{},{},{},{}\n",
                    b.embedding, b.dimension, b.sufficient, b.necessary
                );
            }
        }
    }
    let gaps = |n: usize| -> Result<String, CliError> {
        let mut s = String::from("d,D,region\n");
        for (d, count, r) in gap_grid(n, &(2..=6).collect::<Vec<_>>(), 4 * n * 6)? {
            s += &format!("{d},{count},{}\n", r.name());
        }
        Ok(s)
    };

    let text = format!("{}\n{}", table_text(&minimal), table_text(&maximal));
    if let Some(dir) = &g.out {
        write_text(&dir.join("minimal.csv"), &table_text(&minimal))?;
        write_text(&dir.join("maximal.csv"), &table_text(&maximal))?;
        write_text(&dir.join("injectivity.csv"), &summary)?;
        write_text(&dir.join("gaps_n4.csv"), &gaps(4)?)?;
        write_text(&dir.join("gaps_n16.csv"), &gaps(16)?)?;
    } else {
        print!("{text}");
    }

    let mismatches = compare_with_reference()?;
    for m in &mismatches {
        eprintln!(
            "mismatch: {} table at n = {}, d = {}: expected {}, got {}",
            m.kind.name(),
            m.n,
            m.d,
            m.expected,
            m.actual
        );
    }
    Ok(if mismatches.is_empty() {
        exit::OK
    } else {
        exit::REPRODUCE_MISMATCH
    })
}
