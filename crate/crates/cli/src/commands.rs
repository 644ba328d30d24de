use std::path::{Path, PathBuf};
use std::time::Instant;

use ppclust_core::bench::{self, BenchConfig, DatasetLadder, Experiment};
use ppclust_core::clustering::{self, Clustering, Init, KMeansConfig};
use ppclust_core::dataset::{self, NormMethod, NormalizationSpec};
use ppclust_core::transform::{self, ClientSecrets, ReleaseOutcome, TransformedDataset};
use ppclust_core::{Angle, Error, ReleaseLedger, Seed};

use crate::exit;
use crate::{
    BenchArgs, ClusterArgs, Command, GenArgs, InitArg, KMeansArgs, Method, NormalizeArgs,
    ReleaseArgs, Scheme, TransformArgs, UnifyArgs,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: exit::USAGE_OR_IO,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_precondition() {
            exit::PRECONDITION
        } else {
            exit::USAGE_OR_IO
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Gen(args) => gen(args),
        Command::Normalize(args) => normalize(args),
        Command::Transform(args) => transform(args),
        Command::Release(args) => release(args),
        Command::Unify(args) => unify(args),
        Command::Cluster(args) => cluster(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn gen(args: GenArgs) -> CmdResult {
    if args.var.is_nan() || args.var <= 0.0 {
        return Err(Failure::usage(format!("--var must be positive, got {}", args.var)));
    }
    if args.n == 0 || args.a == 0 {
        return Err(Failure::usage("--n and --a must be positive"));
    }
    let d = dataset::gen_synthetic(args.n, args.a, args.mu, args.var, args.seed)?;
    dataset::save_csv(&d, &args.out)?;
    Ok(())
}

fn normalize(args: NormalizeArgs) -> CmdResult {
    let d = dataset::load_csv(&args.input)?;
    let method = match args.method {
        Method::MinMax => NormMethod::MinMax,
        Method::ZScore => NormMethod::ZScore,
        Method::UnaryMax => NormMethod::UnaryMax,
    };
    let out = NormalizationSpec::fit(&d, method).apply(&d)?;
    dataset::save_csv(&out, &args.out)?;
    Ok(())
}

fn absolute(path: &Path) -> PathBuf {
    let path = std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf());
    // resolve symlinks in the existing prefix
    match (path.parent(), path.file_name()) {
        (Some(parent), Some(name)) => parent
            .canonicalize()
            .map(|p| p.join(name))
            .unwrap_or(path.clone()),
        _ => path,
    }
}

fn transform(args: TransformArgs) -> CmdResult {
    let d = dataset::load_csv(&args.input)?;
    let padded = d.attributes() % 2 == 1;
    let d = d.pad_to_even();
    if padded {
        eprintln!(
            "note: odd attribute count, appended a zero attribute ({} total)",
            d.attributes()
        );
    }

    let y = match args.scheme {
        Scheme::Rbt => {
            if args.m != 1 {
                return Err(Failure::usage("--m applies to mrbt and arbt only"));
            }
            transform::rbt(&d, Seed(args.seed))?
        }
        Scheme::Mrbt | Scheme::Arbt => {
            let secrets_path = args
                .secrets
                .as_ref()
                .ok_or_else(|| Failure::usage("--secrets is required for mrbt and arbt"))?;
            std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
                path: args.out.clone(),
                source: e,
            })?;
            let out_dir = absolute(&args.out);
            if absolute(secrets_path).starts_with(&out_dir) {
                return Err(Failure::usage(
                    "--secrets must not lie inside the output directory released to the miner",
                ));
            }
            let secrets = ClientSecrets::generate(Seed(args.seed), args.m)?;
            let y = transform::mrbt_with_secrets(&d, &secrets)?;
            secrets.save(secrets_path)?;
            if args.scheme == Scheme::Arbt {
                let ledger_path = args.ledger.clone().unwrap_or_else(|| {
                    let mut p = secrets_path.as_os_str().to_owned();
                    p.push(".ledger");
                    PathBuf::from(p)
                });
                if absolute(&ledger_path).starts_with(&out_dir) {
                    return Err(Failure::usage("--ledger must not lie inside the output directory"));
                }
                ReleaseLedger::new(args.m)?.save(ledger_path)?;
            }
            y
        }
    };
    y.save(&args.out)?;
    println!("wrote {} block(s) of widths {:?} to {}", y.m(), y.widths(), args.out.display());
    Ok(())
}

fn release(args: ReleaseArgs) -> CmdResult {
    if args.i == args.j {
        return Err(Failure::usage("--i and --j must name two different subsets"));
    }
    let secrets = ClientSecrets::load(&args.secrets)?;
    let mut ledger = if args.ledger.exists() {
        ReleaseLedger::load(&args.ledger)?
    } else {
        ReleaseLedger::new(secrets.m())?
    };
    match transform::arbt_client_release(&secrets, args.i, args.j, &mut ledger)? {
        ReleaseOutcome::Released(theta) => {
            ledger.save(&args.ledger)?;
            println!("{theta}");
            Ok(())
        }
        ReleaseOutcome::Refused(check) => Err(Failure {
            code: exit::POLICY_REFUSAL,
            message: format!("release of ({}, {}) refused: {check}", args.i, args.j),
        }),
    }
}

fn kmeans_config(args: &KMeansArgs) -> KMeansConfig {
    let init = match args.init {
        InitArg::Random => Init::Random,
        InitArg::Sequential => Init::Sequential,
    };
    KMeansConfig::new(args.k)
        .with_init(init)
        .with_seed(args.seed)
        .with_max_iterations(args.max_iter)
        .with_epsilon(args.epsilon)
}

fn write_clustering(c: &Clustering, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.into(),
        source: e,
    })?;
    c.save_assignments(dir.join("clusters.csv"))?;
    c.save_centroids(dir.join("centroids.csv"))
}

fn summary(c: &Clustering, elapsed_ms: f64) {
    println!(
        "iterations={} wcss={} time_ms={elapsed_ms:.3}",
        c.iterations_used, c.wcss
    );
}

fn cluster(args: ClusterArgs) -> CmdResult {
    let d = dataset::load_csv(&args.input)?;
    let cfg = kmeans_config(&args.kmeans);
    let start = Instant::now();
    let c = clustering::kmeans(d.values(), &cfg)?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    write_clustering(&c, &args.out)?;
    summary(&c, elapsed);
    Ok(())
}

fn unify(args: UnifyArgs) -> CmdResult {
    let y = TransformedDataset::load(&args.blocks)?;
    let theta = Angle::new(args.theta)?;
    let cfg = kmeans_config(&args.kmeans);

    let unified = transform::server_unify(&y, args.i, args.j, theta)?;
    let warm = match &args.warm_start {
        Some(dirs) => {
            let load = |dir: &Path, subset: usize| -> Result<Clustering, Error> {
                Clustering::load(
                    dir.join("clusters.csv"),
                    dir.join("centroids.csv"),
                    &y.block(subset)?.to_matrix(),
                )
            };
            let ci = load(&dirs[0], args.i)?
                .rotated(&transform::unification_rotation(theta, y.dim())?)?;
            let cj = load(&dirs[1], args.j)?;
            Some((ci, cj))
        }
        None => None,
    };

    let start = Instant::now();
    let c = match &warm {
        Some((ci, cj)) => clustering::warm_start_merge(ci, cj, &unified, &cfg)?,
        None => clustering::kmeans(&unified.merged, &cfg)?,
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    let merged = ppclust_core::Dataset::new(unified.merged.clone())?;
    dataset::save_csv(&merged, args.out.join("unified.csv"))?;
    write_clustering(&c, &args.out)?;
    summary(&c, elapsed);
    Ok(())
}

fn run_bench(args: BenchArgs) -> CmdResult {
    let experiment = Experiment::from_id(args.experiment).map_err(|e| Failure::usage(e.to_string()))?;
    let ladder = DatasetLadder::parse(&args.ladder, args.attrs).map_err(|e| Failure::usage(e.to_string()))?;
    if args.reps < 3 || args.filter_reps < 3 {
        return Err(Failure::usage("outlier filtering needs at least 3 repetitions"));
    }
    let cfg = BenchConfig {
        repetitions: args.reps,
        filtering_repetitions: args.filter_reps,
        warmup: args.warmup,
        ladder,
        m: args.m,
        k: args.k,
        synthetic_records: args.synthetic_n,
        synthetic_attributes: args.synthetic_a,
        seed: args.seed,
    };
    let report = bench::run_experiment(experiment, &cfg)?;
    report.save(&args.out)?;
    for row in &report.rows {
        println!(
            "exp {:>2} {:<10} n={:<8} {:<13} mean={:.3} ms sd={:.3} ms outliers={}{}",
            row.experiment,
            row.dataset,
            row.records,
            row.scheme,
            row.filtered_mean_ms,
            row.filtered_stddev_ms,
            row.outliers,
            row.mean_iterations
                .map(|i| format!(" iterations={i:.2}"))
                .unwrap_or_default()
        );
    }
    Ok(())
}
