//! Timing harness behind the `bench` command.
//!
//! Measurements are wall-clock, taken on the calling thread, in
//! milliseconds. Timings that exceed three times the median are treated as
//! interference from other processes and replaced by the mean of the rest.

use std::fmt::Write as _;
use std::hint::black_box;
use std::path::Path;
use std::time::Instant;

use crate::clustering::{self, Init, KMeansConfig};
use crate::dataset::{self, Dataset, NormMethod, NormalizationSpec};
use crate::ledger::ReleaseLedger;
use crate::rotation::Seed;
use crate::transform::{self, ClientSecrets, ReleaseOutcome};
use crate::{Error, Result};

/// Replaces every timing above `3 × median` by the mean of the remaining
/// timings. Returns the filtered list (original order) and the number of
/// replaced entries.
pub fn outlier_filter(timings: &[f64]) -> Result<(Vec<f64>, usize)> {
    if timings.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "outlier filtering needs at least 3 measurements, got {}",
            timings.len()
        )));
    }
    let threshold = 3.0 * median(timings);
    let kept: Vec<f64> = timings.iter().copied().filter(|&t| t <= threshold).collect();
    let outliers = timings.len() - kept.len();
    if outliers == 0 {
        return Ok((timings.to_vec(), 0));
    }
    let replacement = mean(&kept);
    let filtered = timings
        .iter()
        .map(|&t| if t <= threshold { t } else { replacement })
        .collect();
    Ok((filtered, outliers))
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn stddev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Runs `f` `warmup` times unmeasured, then `reps` times measured.
pub fn time_ms<T>(warmup: usize, reps: usize, mut f: impl FnMut() -> T) -> Vec<f64> {
    for _ in 0..warmup {
        black_box(f());
    }
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect()
}

/// Bytes written between repetitions by [`time_cold_ms`]; several times the
/// size of a typical per-core cache.
const EVICTION_BYTES: usize = 8 << 20;

/// Like [`time_ms`], but overwrites an unrelated buffer before every run so
/// that each one starts with its input outside the per-core caches. Without
/// this, inputs small enough to stay cached between repetitions are timed
/// faster per record than large ones, bending the cost curve.
pub fn time_cold_ms<T>(warmup: usize, reps: usize, mut f: impl FnMut() -> T) -> Vec<f64> {
    time_cold_interleaved_ms(warmup, reps, 1, |_| f()).pop().unwrap_or_default()
}

/// Times `cases` operations cold, visiting them round-robin so that drift in
/// machine load lands on every case alike instead of on whichever one
/// happened to be running. `f(c)` runs case `c`; result `c` holds its samples.
pub fn time_cold_interleaved_ms<T>(
    warmup: usize,
    reps: usize,
    cases: usize,
    mut f: impl FnMut(usize) -> T,
) -> Vec<Vec<f64>> {
    let mut scratch = vec![0u8; EVICTION_BYTES];
    let mut evict = |round: usize| {
        scratch.fill(round as u8);
        black_box(&scratch);
    };
    for round in 0..warmup {
        for c in 0..cases {
            evict(round);
            black_box(f(c));
        }
    }
    let mut times = vec![Vec::with_capacity(reps); cases];
    for round in 0..reps {
        for (c, samples) in times.iter_mut().enumerate() {
            evict(round);
            let start = Instant::now();
            black_box(f(c));
            samples.push(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    times
}

/// Measures two operations in alternation, swapping which goes first on
/// every repetition, so that drift in machine load and any state one run
/// leaves behind for the next affect both equally.
pub fn time_paired_ms<A, B>(
    warmup: usize,
    reps: usize,
    mut first: impl FnMut() -> A,
    mut second: impl FnMut() -> B,
) -> (Vec<f64>, Vec<f64>) {
    for _ in 0..warmup {
        black_box(first());
        black_box(second());
    }
    let mut a = Vec::with_capacity(reps);
    let mut b = Vec::with_capacity(reps);
    let mut time_first = || {
        let start = Instant::now();
        black_box(first());
        start.elapsed().as_secs_f64() * 1e3
    };
    let mut time_second = || {
        let start = Instant::now();
        black_box(second());
        start.elapsed().as_secs_f64() * 1e3
    };
    for rep in 0..reps {
        if rep % 2 == 0 {
            a.push(time_first());
            b.push(time_second());
        } else {
            b.push(time_second());
            a.push(time_first());
        }
    }
    (a, b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub experiment: u32,
    pub dataset: String,
    pub records: usize,
    pub scheme: String,
    pub raw_ms: Vec<f64>,
    pub outliers: usize,
    pub filtered_mean_ms: f64,
    pub filtered_stddev_ms: f64,
    pub mean_iterations: Option<f64>,
}

impl BenchRow {
    /// Filters `raw_ms` and fills in the statistics.
    pub fn from_timings(
        experiment: u32,
        dataset: impl Into<String>,
        records: usize,
        scheme: impl Into<String>,
        raw_ms: Vec<f64>,
    ) -> Result<Self> {
        let (filtered, outliers) = outlier_filter(&raw_ms)?;
        Ok(BenchRow {
            experiment,
            dataset: dataset.into(),
            records,
            scheme: scheme.into(),
            filtered_mean_ms: mean(&filtered),
            filtered_stddev_ms: stddev(&filtered),
            raw_ms,
            outliers,
            mean_iterations: None,
        })
    }

    pub fn repetitions(&self) -> usize {
        self.raw_ms.len()
    }

    pub fn with_iterations(mut self, mean_iterations: f64) -> Self {
        self.mean_iterations = Some(mean_iterations);
        self
    }
}

const REPORT_HEADER: &str = "experiment,dataset,records,scheme,repetitions,outliers,filtered_mean_ms,filtered_stddev_ms,mean_iterations,raw_ms";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// CSV with raw timings joined by `;` in the last column. All times are
    /// printed with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let raw: Vec<String> = r.raw_ms.iter().map(|t| format!("{t:.6}")).collect();
            let iterations = r.mean_iterations.map(|i| format!("{i:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6},{},{}",
                r.experiment,
                r.dataset,
                r.records,
                r.scheme,
                r.repetitions(),
                r.outliers,
                r.filtered_mean_ms,
                r.filtered_stddev_ms,
                iterations,
                raw.join(";")
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let origin = Path::new("<report>");
        let bad = |line: usize, message: &str| Error::Parse {
            path: origin.into(),
            line,
            column: 0,
            message: message.into(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == REPORT_HEADER => {}
            _ => return Err(bad(1, "missing report header")),
        }
        let mut rows = Vec::new();
        for (k, line) in lines {
            let line_no = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(bad(line_no, "expected 10 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line_no, "bad number"));
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(line_no, "bad integer"));
            let raw_ms = if f[9].is_empty() {
                Vec::new()
            } else {
                f[9].split(';').map(num).collect::<Result<Vec<_>>>()?
            };
            if raw_ms.len() != int(f[4])? {
                return Err(bad(line_no, "repetition count does not match raw timings"));
            }
            rows.push(BenchRow {
                experiment: f[0].parse().map_err(|_| bad(line_no, "bad experiment id"))?,
                dataset: f[1].to_owned(),
                records: int(f[2])?,
                scheme: f[3].to_owned(),
                outliers: int(f[5])?,
                filtered_mean_ms: num(f[6])?,
                filtered_stddev_ms: num(f[7])?,
                mean_iterations: if f[8].is_empty() { None } else { Some(num(f[8])?) },
                raw_ms,
            });
        }
        Ok(BenchReport { rows })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn find(&self, experiment: u32, dataset: &str, scheme: &str) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.experiment == experiment && r.dataset == dataset && r.scheme == scheme)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rung {
    pub label: String,
    pub records: usize,
    pub attributes: usize,
}

/// Dataset sizes swept by the scaling experiments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetLadder {
    rungs: Vec<Rung>,
}

impl DatasetLadder {
    /// `s1 … s15`: 3,125 to 46,875 records in steps of 3,125, four attributes.
    pub fn standard() -> Self {
        Self::stepped(3_125, 46_875, 3_125, 4).expect("valid ladder")
    }

    pub fn new(rungs: Vec<Rung>) -> Result<Self> {
        if rungs.is_empty() {
            return Err(Error::InvalidParameter("ladder needs at least one rung".into()));
        }
        if rungs.windows(2).any(|w| w[1].records <= w[0].records) {
            return Err(Error::InvalidParameter(
                "ladder record counts must be strictly increasing".into(),
            ));
        }
        if rungs.iter().any(|r| r.records == 0 || r.attributes == 0) {
            return Err(Error::InvalidParameter("ladder rungs must be non-empty".into()));
        }
        Ok(DatasetLadder { rungs })
    }

    pub fn stepped(start: usize, end: usize, step: usize, attributes: usize) -> Result<Self> {
        if step == 0 || start == 0 || end < start {
            return Err(Error::InvalidParameter(format!(
                "bad ladder range {start}:{end}:{step}"
            )));
        }
        let rungs = (start..=end)
            .step_by(step)
            .enumerate()
            .map(|(k, records)| Rung {
                label: format!("s{}", k + 1),
                records,
                attributes,
            })
            .collect();
        Self::new(rungs)
    }

    /// Parses `start:end:step` or a comma-separated list of record counts.
    pub fn parse(spec: &str, attributes: usize) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad ladder spec {spec:?}"));
        if spec.contains(':') {
            let parts: Vec<usize> = spec
                .split(':')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let [start, end, step] = parts[..] else {
                return Err(bad());
            };
            return Self::stepped(start, end, step, attributes);
        }
        let rungs = spec
            .split(',')
            .enumerate()
            .map(|(k, p)| {
                Ok(Rung {
                    label: format!("s{}", k + 1),
                    records: p.trim().parse().map_err(|_| bad())?,
                    attributes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rungs)
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    /// The rung used by the single-size experiments: `s10` when present,
    /// otherwise the largest.
    pub fn reference(&self) -> &Rung {
        self.rungs
            .iter()
            .find(|r| r.label == "s10")
            .unwrap_or_else(|| self.rungs.last().expect("non-empty ladder"))
    }
}

/// Min-max normalized Gaussian data (`μ = σ² = 100`) of the rung's shape.
pub fn stand_in(rung: &Rung, seed: u64) -> Result<Dataset> {
    let raw = dataset::gen_synthetic(rung.records, rung.attributes, 100.0, 100.0, seed)?;
    NormalizationSpec::fit(&raw, NormMethod::MinMax).apply(&raw)
}

/// Well-separated clusters in `attributes` dimensions: `k` centers placed on
/// the coordinate axes at multiples of 10, radius 1.
pub fn blob_instance(records: usize, attributes: usize, k: usize, seed: u64) -> Result<(Dataset, Vec<usize>)> {
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            (0..attributes)
                .map(|i| if i == c % attributes { 10.0 * (1 + c / attributes) as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    dataset::gen_blobs(&centers, records.div_ceil(k), 1.0, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares fit `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "linear fit needs at least two paired points".into(),
        ));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// One paired comparison of warm-start merging against cold k-means on the
/// same unified pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WarmStartTrial {
    pub cold_iterations: usize,
    pub warm_iterations: usize,
    pub cold_ms: f64,
    pub warm_ms: f64,
    pub cold_wcss: f64,
    pub warm_wcss: f64,
}

impl WarmStartTrial {
    pub fn saving(&self) -> f64 {
        1.0 - self.warm_ms / self.cold_ms
    }
}

/// Splits `d` into two subsets under ARBT, clusters each on the miner side,
/// unifies them and compares the warm-start merge with cold k-means (same
/// `cfg`) on the unified data. Times are the minimum over `timing_reps` runs.
pub fn warm_start_trial(
    d: &Dataset,
    cfg: &KMeansConfig,
    seed: u64,
    timing_reps: usize,
) -> Result<WarmStartTrial> {
    let secrets = ClientSecrets::generate(Seed(seed), 2)?;
    let y = transform::mrbt_with_secrets(d, &secrets)?;
    let mut ledger = ReleaseLedger::new(2)?;
    let ReleaseOutcome::Released(theta) = transform::arbt_client_release(&secrets, 1, 2, &mut ledger)?
    else {
        unreachable!("a fresh two-subset ledger always allows (1, 2)");
    };
    let ci = clustering::kmeans(&y.block(1)?.to_matrix(), cfg)?;
    let cj = clustering::kmeans(&y.block(2)?.to_matrix(), cfg)?;
    let unified = transform::server_unify(&y, 1, 2, theta)?;
    let ci = ci.rotated(&transform::unification_rotation(theta, y.dim())?)?;

    let reps = timing_reps.max(1);
    let mut warm = None;
    let mut cold = None;
    let (warm_times, cold_times) = time_paired_ms(
        0,
        reps,
        || warm = Some(clustering::warm_start_merge(&ci, &cj, &unified, cfg)),
        || cold = Some(clustering::kmeans(&unified.merged, cfg)),
    );
    let warm = warm.expect("measured at least once")?;
    let cold = cold.expect("measured at least once")?;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(WarmStartTrial {
        cold_iterations: cold.iterations_used,
        warm_iterations: warm.iterations_used,
        cold_ms: min(&cold_times),
        warm_ms: min(&warm_times),
        cold_wcss: cold.wcss,
        warm_wcss: warm.wcss,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// RBT time over the ladder.
    Linearity = 1,
    /// Repeated MRBT on the reference rung, raw and filtered.
    OutlierFiltering = 2,
    /// RBT against MRBT on the reference rung.
    MrbtOverhead = 3,
    /// RBT against MRBT on a large Gaussian dataset.
    Synthetic = 4,
    /// Client and server costs of ARBT with two subsets.
    ArbtOverhead = 5,
    /// k-means time and iterations, random against sequential initialization.
    Initialization = 7,
    /// Warm-start merge against cold k-means.
    WarmStart = 10,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Linearity,
        Experiment::OutlierFiltering,
        Experiment::MrbtOverhead,
        Experiment::Synthetic,
        Experiment::ArbtOverhead,
        Experiment::Initialization,
        Experiment::WarmStart,
    ];

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == id)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown experiment {id}; available: 1, 2, 3, 4, 5, 7, 10"
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub repetitions: usize,
    /// Repetitions for the outlier-filtering experiment.
    pub filtering_repetitions: usize,
    pub warmup: usize,
    pub ladder: DatasetLadder,
    pub m: usize,
    pub k: usize,
    pub synthetic_records: usize,
    pub synthetic_attributes: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repetitions: 50,
            filtering_repetitions: 500,
            warmup: 3,
            ladder: DatasetLadder::standard(),
            m: 100,
            k: 7,
            synthetic_records: 1_000_000,
            synthetic_attributes: 10,
            seed: 1,
        }
    }
}

fn seeds_for(master: u64, m: usize) -> Result<Vec<Seed>> {
    Ok(ClientSecrets::generate(Seed(master), m)?.seeds().to_vec())
}

/// Runs one experiment on the calling thread.
pub fn run_experiment(exp: Experiment, cfg: &BenchConfig) -> Result<BenchReport> {
    let id = exp.id();
    let mut rows = Vec::new();
    let reference = cfg.ladder.reference();
    match exp {
        Experiment::Linearity => {
            let rungs = cfg.ladder.rungs();
            let data = rungs
                .iter()
                .enumerate()
                .map(|(k, rung)| Ok(stand_in(rung, cfg.seed + k as u64)?.pad_to_even()))
                .collect::<Result<Vec<_>>>()?;
            let times = time_cold_interleaved_ms(cfg.warmup, cfg.repetitions, data.len(), |k| {
                transform::rbt(&data[k], Seed(cfg.seed))
            });
            for (rung, times) in rungs.iter().zip(times) {
                rows.push(BenchRow::from_timings(id, &rung.label, rung.records, "rbt", times)?);
            }
        }
        Experiment::OutlierFiltering => {
            let d = stand_in(reference, cfg.seed)?.pad_to_even();
            let seeds = seeds_for(cfg.seed, cfg.m)?;
            let times = time_ms(cfg.warmup, cfg.filtering_repetitions, || {
                transform::mrbt(&d, cfg.m, &seeds)
            });
            rows.push(BenchRow::from_timings(id, &reference.label, reference.records, "mrbt", times)?);
        }
        Experiment::MrbtOverhead | Experiment::Synthetic => {
            let (label, d) = if exp == Experiment::MrbtOverhead {
                (reference.label.clone(), stand_in(reference, cfg.seed)?)
            } else {
                (
                    "synthetic".to_owned(),
                    dataset::gen_synthetic(
                        cfg.synthetic_records,
                        cfg.synthetic_attributes,
                        100.0,
                        100.0,
                        cfg.seed,
                    )?,
                )
            };
            let d = d.pad_to_even();
            // keys are derived once up front, as a data owner would hold them
            let secrets = ClientSecrets::generate(Seed(cfg.seed), cfg.m)?;
            let (rbt, mrbt) = time_paired_ms(
                cfg.warmup,
                cfg.repetitions,
                || transform::rbt(&d, Seed(cfg.seed)),
                || transform::mrbt_with_secrets(&d, &secrets),
            );
            rows.push(BenchRow::from_timings(id, &label, d.records(), "rbt", rbt)?);
            rows.push(BenchRow::from_timings(id, &label, d.records(), "mrbt", mrbt)?);
        }
        Experiment::ArbtOverhead => {
            let d = stand_in(reference, cfg.seed)?.pad_to_even();
            let secrets = ClientSecrets::generate(Seed(cfg.seed), 2)?;
            let y = transform::mrbt_with_secrets(&d, &secrets)?;
            let theta = crate::rotation::unification_angle(secrets.angles()[0], secrets.angles()[1]);
            let n = d.records();
            let mut push = |scheme: &str, times: Vec<f64>| -> Result<()> {
                rows.push(BenchRow::from_timings(id, &reference.label, n, scheme, times)?);
                Ok(())
            };
            push("rbt", time_ms(cfg.warmup, cfg.repetitions, || transform::rbt(&d, Seed(cfg.seed))))?;
            push(
                "arbt-rotate",
                time_ms(cfg.warmup, cfg.repetitions, || transform::mrbt_with_secrets(&d, &secrets)),
            )?;
            push(
                "arbt-release",
                time_ms(cfg.warmup, cfg.repetitions, || {
                    let mut ledger = ReleaseLedger::new(2).expect("m = 2");
                    transform::arbt_client_release(&secrets, 1, 2, &mut ledger)
                }),
            )?;
            push(
                "arbt-unify",
                time_ms(cfg.warmup, cfg.repetitions, || transform::server_unify(&y, 1, 2, theta)),
            )?;
        }
        Experiment::Initialization => {
            for (k, rung) in cfg.ladder.rungs().iter().enumerate() {
                let d = stand_in(rung, cfg.seed + k as u64)?;
                for (scheme, init) in [("random", Init::Random), ("sequential", Init::Sequential)] {
                    let kcfg = KMeansConfig::new(cfg.k).with_init(init).with_seed(cfg.seed);
                    let iterations = clustering::kmeans(d.values(), &kcfg)?.iterations_used;
                    let times = time_ms(0, cfg.repetitions, || clustering::kmeans(d.values(), &kcfg));
                    rows.push(
                        BenchRow::from_timings(id, &rung.label, rung.records, scheme, times)?
                            .with_iterations(iterations as f64),
                    );
                }
            }
        }
        Experiment::WarmStart => {
            let a = reference.attributes + reference.attributes % 2;
            let (d, _) = blob_instance(reference.records, a, cfg.k, cfg.seed)?;
            let kcfg = KMeansConfig::new(cfg.k).with_seed(cfg.seed);
            let mut cold_times = Vec::with_capacity(cfg.repetitions);
            let mut warm_times = Vec::with_capacity(cfg.repetitions);
            let (mut cold_it, mut warm_it) = (0usize, 0usize);
            for rep in 0..cfg.repetitions {
                let trial = warm_start_trial(&d, &kcfg, cfg.seed + rep as u64, 1)?;
                cold_times.push(trial.cold_ms);
                warm_times.push(trial.warm_ms);
                cold_it += trial.cold_iterations;
                warm_it += trial.warm_iterations;
            }
            let reps = cfg.repetitions.max(1) as f64;
            rows.push(
                BenchRow::from_timings(id, &reference.label, d.records(), "cold", cold_times)?
                    .with_iterations(cold_it as f64 / reps),
            );
            rows.push(
                BenchRow::from_timings(id, &reference.label, d.records(), "warm", warm_times)?
                    .with_iterations(warm_it as f64 / reps),
            );
        }
    }
    Ok(BenchReport { rows })
}
