//! Lloyd k-means over column records, plus the warm-start merge used after
//! ARBT unification.
//!
//! Cluster labels are 0-based. Ties go to the lowest-indexed centroid, and a
//! cluster that loses all its records keeps its previous centroid.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rotation::{self, RotationMatrix};
use crate::transform::UnifiedPair;
use crate::{Error, Result};

/// Largest `k` accepted by [`label_agreement`]'s exhaustive search.
pub const MAX_AGREEMENT_K: usize = 8;

pub fn euclidean_dist(r1: &[f64], r2: &[f64]) -> Result<f64> {
    if r1.len() != r2.len() {
        return Err(Error::Dimension(format!(
            "records of length {} and {}",
            r1.len(),
            r2.len()
        )));
    }
    Ok(squared_dist(r1, r2).sqrt())
}

#[inline]
fn squared_dist(r1: &[f64], r2: &[f64]) -> f64 {
    r1.iter().zip(r2).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// `k` distinct records drawn uniformly with the configured seed.
    Random,
    /// The first `k` records in storage order.
    Sequential,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Init::Random),
            "sequential" => Ok(Init::Sequential),
            other => Err(Error::InvalidParameter(format!("unknown init strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub init: Init,
    pub max_iterations: usize,
    /// Stop once at most this fraction of records changed cluster in an
    /// iteration.
    pub epsilon: f64,
    pub rng_seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            init: Init::Random,
            max_iterations: 100,
            epsilon: 0.0,
            rng_seed: 0,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if self.k > n {
            return Err(Error::InvalidParameter(format!(
                "k = {} exceeds the {n} records",
                self.k
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// `a × k`, one centroid per column.
    pub centroids: DMatrix<f64>,
    pub iterations_used: usize,
    pub wcss: f64,
    /// WCSS after each iteration's centroid update.
    pub wcss_history: Vec<f64>,
}

impl Clustering {
    pub fn centroid(&self, cluster: usize) -> &[f64] {
        let a = self.centroids.nrows();
        &self.centroids.as_slice()[cluster * a..(cluster + 1) * a]
    }

    /// The same clustering expressed in a rotated frame: centroids become
    /// `r · centroid`; assignments and WCSS are unchanged.
    pub fn rotated(&self, r: &RotationMatrix) -> Result<Clustering> {
        Ok(Clustering {
            centroids: rotation::apply(r, &self.centroids)?,
            ..self.clone()
        })
    }

    /// Whether every record sits in a nearest cluster and every non-empty
    /// cluster's centroid is the mean of its records, both within `tol`.
    pub fn is_fixed_point(&self, data: &DMatrix<f64>, tol: f64) -> bool {
        let a = data.nrows();
        if self.assignments.len() != data.ncols() || self.centroids.nrows() != a {
            return false;
        }
        for (record, &label) in data.as_slice().chunks_exact(a).zip(&self.assignments) {
            let own = squared_dist(record, self.centroid(label));
            let best = (0..self.k)
                .map(|c| squared_dist(record, self.centroid(c)))
                .fold(f64::INFINITY, f64::min);
            if own > best + tol {
                return false;
            }
        }
        let (sums, counts) = cluster_sums(data, &self.assignments, self.k);
        (0..self.k).filter(|&c| counts[c] > 0).all(|c| {
            (0..a).all(|i| (sums[c * a + i] / counts[c] as f64 - self.centroids[(i, c)]).abs() <= tol)
        })
    }

    /// Writes `record,cluster` lines (with that header).
    pub fn save_assignments(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("record,cluster\n");
        for (r, c) in self.assignments.iter().enumerate() {
            out.push_str(&format!("{r},{c}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Writes one centroid per line.
    pub fn save_centroids(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        crate::dataset::write_matrix_csv(
            std::io::BufWriter::new(file),
            self.centroids.nrows(),
            self.centroids.as_slice(),
            None,
        )
            .map_err(|e| Error::io(path, e))
    }

    /// Reads a clustering back from its assignment and centroid files and
    /// recomputes its WCSS over `data`.
    pub fn load(
        assignments: impl AsRef<std::path::Path>,
        centroids: impl AsRef<std::path::Path>,
        data: &DMatrix<f64>,
    ) -> Result<Clustering> {
        let path = assignments.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut labels = Vec::new();
        for (line, row) in text.lines().enumerate().skip(1) {
            if row.trim().is_empty() {
                continue;
            }
            let parsed = row
                .split(',')
                .map(|f| f.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>();
            match parsed.as_deref() {
                Ok([r, c]) if *r == labels.len() => labels.push(*c),
                _ => {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: line + 1,
                        column: 0,
                        message: format!("expected `{},<cluster>`", labels.len()),
                    })
                }
            }
        }
        let centroids = crate::dataset::load_csv(centroids.as_ref())?.into_values();
        let k = centroids.ncols();
        if labels.len() != data.ncols() || centroids.nrows() != data.nrows() {
            return Err(Error::Shape(format!(
                "clustering of {} records in {} dimensions does not match {}×{} data",
                labels.len(),
                centroids.nrows(),
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&c| c >= k) {
            return Err(Error::format(path, format!("label {bad} but only {k} centroids")));
        }
        let wcss = wcss(data, &labels, &centroids);
        Ok(Clustering {
            k,
            assignments: labels,
            centroids,
            iterations_used: 0,
            wcss,
            wcss_history: Vec::new(),
        })
    }
}

fn cluster_sums(data: &DMatrix<f64>, assignments: &[usize], k: usize) -> (Vec<f64>, Vec<usize>) {
    let a = data.nrows();
    let mut sums = vec![0.0; k * a];
    let mut counts = vec![0usize; k];
    for (record, &c) in data.as_slice().chunks_exact(a).zip(assignments) {
        counts[c] += 1;
        for (s, v) in sums[c * a..(c + 1) * a].iter_mut().zip(record) {
            *s += v;
        }
    }
    (sums, counts)
}

fn update_centroids(data: &DMatrix<f64>, assignments: &[usize], centroids: &mut DMatrix<f64>) {
    let k = centroids.ncols();
    let a = data.nrows();
    let (sums, counts) = cluster_sums(data, assignments, k);
    for c in 0..k {
        if counts[c] == 0 {
            continue;
        }
        for i in 0..a {
            centroids[(i, c)] = sums[c * a + i] / counts[c] as f64;
        }
    }
}

fn nearest(record: &[f64], centroids: &[f64], a: usize) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.chunks_exact(a).enumerate() {
        let d = squared_dist(record, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn wcss(data: &DMatrix<f64>, assignments: &[usize], centroids: &DMatrix<f64>) -> f64 {
    let a = data.nrows();
    data.as_slice()
        .chunks_exact(a)
        .zip(assignments)
        .map(|(r, &c)| squared_dist(r, &centroids.as_slice()[c * a..(c + 1) * a]))
        .sum()
}

/// Lloyd iterations from the given centroids. `previous` holds the labels
/// records start with (used to count moves in the first iteration); `None`
/// counts every record as moved.
pub fn lloyd(
    data: &DMatrix<f64>,
    mut centroids: DMatrix<f64>,
    previous: Option<Vec<usize>>,
    cfg: &KMeansConfig,
) -> Result<Clustering> {
    let (a, n) = (data.nrows(), data.ncols());
    cfg.validate(n)?;
    if centroids.nrows() != a || centroids.ncols() != cfg.k {
        return Err(Error::Shape(format!(
            "expected {a}×{} centroids, got {}×{}",
            cfg.k,
            centroids.nrows(),
            centroids.ncols()
        )));
    }
    let mut assignments = match previous {
        Some(p) if p.len() == n => p,
        Some(p) => {
            return Err(Error::Shape(format!(
                "{} prior labels for {n} records",
                p.len()
            )))
        }
        None => vec![usize::MAX; n],
    };

    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut moved = 0usize;
        for (record, label) in data.as_slice().chunks_exact(a).zip(assignments.iter_mut()) {
            let best = nearest(record, centroids.as_slice(), a);
            if best != *label {
                *label = best;
                moved += 1;
            }
        }
        update_centroids(data, &assignments, &mut centroids);
        history.push(wcss(data, &assignments, &centroids));
        if moved as f64 <= cfg.epsilon * n as f64 {
            break;
        }
    }

    Ok(Clustering {
        k: cfg.k,
        wcss: *history.last().expect("at least one iteration"),
        assignments,
        centroids,
        iterations_used: iterations,
        wcss_history: history,
    })
}

/// Indices of the records used as initial centroids.
pub fn initial_indices(n: usize, cfg: &KMeansConfig) -> Result<Vec<usize>> {
    cfg.validate(n)?;
    Ok(match cfg.init {
        Init::Sequential => (0..cfg.k).collect(),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
            rand::seq::index::sample(&mut rng, n, cfg.k).into_vec()
        }
    })
}

/// Cold-start k-means over the columns of `data`.
pub fn kmeans(data: &DMatrix<f64>, cfg: &KMeansConfig) -> Result<Clustering> {
    let n = data.ncols();
    if n == 0 || data.nrows() == 0 {
        return Err(Error::Shape("cannot cluster an empty dataset".into()));
    }
    let picks = initial_indices(n, cfg)?;
    let centroids = data.select_columns(picks.iter());
    lloyd(data, centroids, None, cfg)
}

/// Clusters a unified pair starting from the clusterings of its two halves.
///
/// `ci` must describe the first `unified.widths.0` records of the merged
/// matrix in the unified frame (see [`Clustering::rotated`]), `cj` the rest.
/// Each cluster of `ci` is folded wholesale into the `cj` cluster with the
/// nearest centroid; Lloyd iterations then run to the stopping rule of
/// `cfg`.
pub fn warm_start_merge(
    ci: &Clustering,
    cj: &Clustering,
    unified: &UnifiedPair,
    cfg: &KMeansConfig,
) -> Result<Clustering> {
    if ci.k != cj.k || cfg.k != cj.k {
        return Err(Error::InvalidParameter(format!(
            "cluster counts differ: {} vs {} (config {})",
            ci.k, cj.k, cfg.k
        )));
    }
    let data = &unified.merged;
    let a = data.nrows();
    if ci.assignments.len() != unified.widths.0
        || cj.assignments.len() != unified.widths.1
        || ci.centroids.nrows() != a
        || cj.centroids.nrows() != a
    {
        return Err(Error::Shape(
            "clusterings do not cover the records of the unified pair".into(),
        ));
    }

    let target: Vec<usize> = (0..ci.k)
        .map(|c| nearest(ci.centroid(c), cj.centroids.as_slice(), a))
        .collect();
    let merged: Vec<usize> = ci
        .assignments
        .iter()
        .map(|&c| target[c])
        .chain(cj.assignments.iter().copied())
        .collect();

    let mut centroids = cj.centroids.clone();
    update_centroids(data, &merged, &mut centroids);
    lloyd(data, centroids, Some(merged), cfg)
}

/// Best fraction of matching labels over all relabelings of `c2`.
pub fn label_agreement(c1: &Clustering, c2: &Clustering) -> Result<f64> {
    agreement(&c1.assignments, &c2.assignments, c1.k.max(c2.k))
}

/// [`label_agreement`] on raw label vectors with labels in `0..k`.
pub fn agreement(l1: &[usize], l2: &[usize], k: usize) -> Result<f64> {
    if l1.len() != l2.len() {
        return Err(Error::Shape(format!(
            "label vectors of length {} and {}",
            l1.len(),
            l2.len()
        )));
    }
    if k > MAX_AGREEMENT_K {
        return Err(Error::InvalidParameter(format!(
            "k = {k} is too large for exhaustive permutation search (max {MAX_AGREEMENT_K}); \
             use a matching-based score instead"
        )));
    }
    if l1.is_empty() {
        return Ok(1.0);
    }
    if let Some(&bad) = l1.iter().chain(l2).find(|&&l| l >= k) {
        return Err(Error::InvalidParameter(format!("label {bad} outside 0..{k}")));
    }
    let mut confusion = vec![0usize; k * k];
    for (&x, &y) in l1.iter().zip(l2) {
        confusion[x * k + y] += 1;
    }
    let best = (0..k)
        .permutations(k)
        .map(|perm| (0..k).map(|x| confusion[x * k + perm[x]]).sum::<usize>())
        .max()
        .unwrap_or(0);
    Ok(best as f64 / l1.len() as f64)
}
