//! Numeric datasets stored as `a × n` matrices, one record per column.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    attribute_names: Option<Vec<String>>,
}

impl Dataset {
    /// Wraps an `a × n` matrix. Requires `a, n ≥ 1` and finite entries.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Shape(format!(
                "dataset must have at least one attribute and one record, got {}×{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let a = values.nrows();
            return Err(Error::InvalidParameter(format!(
                "non-finite value at attribute {}, record {}",
                pos % a,
                pos / a
            )));
        }
        Ok(Dataset {
            values,
            attribute_names: None,
        })
    }

    /// Builds a dataset from records given as rows (the on-disk layout).
    pub fn from_records(records: &[Vec<f64>]) -> Result<Self> {
        let a = records.first().map_or(0, Vec::len);
        if let Some(bad) = records.iter().position(|r| r.len() != a) {
            return Err(Error::Shape(format!(
                "record {bad} has {} values, expected {a}",
                records[bad].len()
            )));
        }
        let flat: Vec<f64> = records.iter().flatten().copied().collect();
        Self::new(DMatrix::from_column_slice(a, records.len(), &flat))
    }

    pub fn with_attribute_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.attributes() {
            return Err(Error::Shape(format!(
                "{} attribute names for {} attributes",
                names.len(),
                self.attributes()
            )));
        }
        self.attribute_names = Some(names);
        Ok(self)
    }

    pub fn attributes(&self) -> usize {
        self.values.nrows()
    }

    pub fn records(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn attribute_names(&self) -> Option<&[String]> {
        self.attribute_names.as_deref()
    }

    /// The `index`-th record as a slice of `a` values.
    pub fn record(&self, index: usize) -> &[f64] {
        let a = self.attributes();
        &self.values.as_slice()[index * a..(index + 1) * a]
    }

    /// Appends a zero attribute when the attribute count is odd.
    ///
    /// Zero coordinates contribute nothing to any distance, so pairwise record
    /// distances are unchanged bit for bit.
    pub fn pad_to_even(&self) -> Dataset {
        if self.attributes().is_multiple_of(2) {
            return self.clone();
        }
        let a = self.attributes();
        let values = self.values.clone().insert_row(a, 0.0);
        let attribute_names = self.attribute_names.as_ref().map(|names| {
            let mut names = names.clone();
            names.push(format!("pad{}", a + 1));
            names
        });
        Dataset {
            values,
            attribute_names,
        }
    }

    /// Owned copy of `width` records starting at `start`. Records are
    /// contiguous in column-major storage, so this is a single slice copy.
    pub(crate) fn column_block(&self, start: usize, width: usize) -> DMatrix<f64> {
        let a = self.attributes();
        DMatrix::from_column_slice(a, width, &self.values.as_slice()[start * a..(start + width) * a])
    }

    /// `(first record, record count)` of each block `partition(m)` would build.
    pub(crate) fn partition_bounds(&self, m: usize) -> Result<Vec<(usize, usize)>> {
        if m == 0 {
            return Err(Error::InvalidParameter("partition count must be positive".into()));
        }
        let (a, n) = (self.attributes(), self.records());
        let per_part = n / m;
        if per_part <= a {
            return Err(Error::Partition {
                records: n,
                parts: m,
                per_part,
                attributes: a,
            });
        }
        Ok((0..m)
            .map(|i| {
                let start = i * per_part;
                (start, if i + 1 == m { n - start } else { per_part })
            })
            .collect())
    }

    /// Splits the records into `m` contiguous blocks of `floor(n/m)` records,
    /// the last block absorbing the remainder. Every block must hold more
    /// records than there are attributes.
    pub fn partition(&self, m: usize) -> Result<PartitionedDataset> {
        let blocks = self
            .partition_bounds(m)?
            .into_iter()
            .map(|(start, width)| Dataset {
                values: self.column_block(start, width),
                attribute_names: self.attribute_names.clone(),
            })
            .collect();
        Ok(PartitionedDataset { blocks })
    }
}

/// Record-wise split `A = [A_1, …, A_m]` of one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedDataset {
    blocks: Vec<Dataset>,
}

impl PartitionedDataset {
    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Dataset] {
        &self.blocks
    }

    pub fn widths(&self) -> Vec<usize> {
        self.blocks.iter().map(Dataset::records).collect()
    }

    /// Concatenates the blocks back into one dataset.
    pub fn concat(&self) -> Dataset {
        let a = self.blocks[0].attributes();
        let flat: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| b.values.as_slice().iter().copied())
            .collect();
        let n = flat.len() / a;
        Dataset {
            values: DMatrix::from_column_slice(a, n, &flat),
            attribute_names: self.blocks[0].attribute_names.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    /// `(x - min) / (max - min)`
    MinMax,
    /// `(x - mean) / stddev`, population standard deviation.
    ZScore,
    /// `x / max|x|`
    UnaryMax,
}

impl std::str::FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-max" | "min_max" | "minmax" => Ok(NormMethod::MinMax),
            "z-score" | "z_score" | "zscore" => Ok(NormMethod::ZScore),
            "unary-max" | "unary_max" | "unary" => Ok(NormMethod::UnaryMax),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization method {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttributeStats {
    MinMax { min: f64, max: f64 },
    ZScore { mean: f64, stddev: f64 },
    UnaryMax { max_abs: f64 },
}

impl AttributeStats {
    fn map(self, x: f64) -> f64 {
        // Degenerate (constant or all-zero) attributes map to 0.
        match self {
            AttributeStats::MinMax { min, max } if max > min => (x - min) / (max - min),
            AttributeStats::ZScore { mean, stddev } if stddev > 0.0 => (x - mean) / stddev,
            AttributeStats::UnaryMax { max_abs } if max_abs > 0.0 => x / max_abs,
            _ => 0.0,
        }
    }
}

/// Per-attribute statistics captured from a dataset, applied later to the
/// same or other datasets with the same attribute count.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationSpec {
    method: NormMethod,
    stats: Vec<AttributeStats>,
}

impl NormalizationSpec {
    pub fn fit(d: &Dataset, method: NormMethod) -> Self {
        let n = d.records() as f64;
        let stats = d
            .values
            .row_iter()
            .map(|row| match method {
                NormMethod::MinMax => AttributeStats::MinMax {
                    min: row.iter().copied().fold(f64::INFINITY, f64::min),
                    max: row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                },
                NormMethod::ZScore => {
                    let mean = row.iter().sum::<f64>() / n;
                    let var = row.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                    AttributeStats::ZScore {
                        mean,
                        stddev: var.sqrt(),
                    }
                }
                NormMethod::UnaryMax => AttributeStats::UnaryMax {
                    max_abs: row.iter().map(|x| x.abs()).fold(0.0, f64::max),
                },
            })
            .collect();
        NormalizationSpec { method, stats }
    }

    pub fn method(&self) -> NormMethod {
        self.method
    }

    pub fn stats(&self) -> &[AttributeStats] {
        &self.stats
    }

    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.attributes() != self.stats.len() {
            return Err(Error::Shape(format!(
                "normalizer fitted on {} attributes applied to {}",
                self.stats.len(),
                d.attributes()
            )));
        }
        let values = DMatrix::from_fn(d.attributes(), d.records(), |i, j| {
            self.stats[i].map(d.values[(i, j)])
        });
        Ok(Dataset {
            values,
            attribute_names: d.attribute_names.clone(),
        })
    }
}

/// Reads a comma-separated file with one record per line. A first line that
/// does not parse as numbers is taken as attribute names.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut names: Option<Vec<String>> = None;
    let mut flat = Vec::new();
    let mut width: Option<usize> = None;
    let mut records = 0usize;

    for (row, result) in reader.records().enumerate() {
        let line = row + 1;
        let record = result.map_err(|e| Error::Parse {
            path: path.into(),
            line,
            column: 0,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(w) = width {
            if record.len() != w {
                return Err(Error::Parse {
                    path: path.into(),
                    line,
                    column: record.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", record.len()),
                });
            }
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if row == 0 && parsed.iter().any(|p| p.is_err()) {
            width = Some(record.len());
            names = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        width = Some(record.len());
        for (col, value) in parsed.into_iter().enumerate() {
            let value = value
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    path: path.into(),
                    line,
                    column: col + 1,
                    message: format!("not a finite number: {:?}", &record[col]),
                })?;
            flat.push(value);
        }
        records += 1;
    }

    let a = width.unwrap_or(0);
    if records == 0 {
        return Err(Error::format(path, "no data records"));
    }
    let d = Dataset::new(DMatrix::from_column_slice(a, records, &flat))?;
    match names {
        Some(names) => d.with_attribute_names(names),
        None => Ok(d),
    }
}

/// Writes one record per line; attribute names, if any, become a header.
///
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn save_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix_csv(
        BufWriter::new(file),
        d.values.nrows(),
        d.values.as_slice(),
        d.attribute_names.as_deref(),
    )
    .map_err(|e| Error::io(path, e))
}

/// Writes column-major `values` of height `rows` as one CSV line per column.
pub(crate) fn write_matrix_csv<W: Write>(
    mut out: W,
    rows: usize,
    values: &[f64],
    header: Option<&[String]>,
) -> std::io::Result<()> {
    if let Some(names) = header {
        writeln!(out, "{}", names.join(","))?;
    }
    let mut line = String::new();
    for column in values.chunks_exact(rows.max(1)) {
        line.clear();
        for (k, v) in column.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// `n` records of `a` i.i.d. Gaussian attributes with mean `mu` and variance
/// `sigma_sq`, reproducible from `seed`.
pub fn gen_synthetic(n: usize, a: usize, mu: f64, sigma_sq: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || a == 0 {
        return Err(Error::InvalidParameter(format!(
            "need at least one record and one attribute, got n={n}, a={a}"
        )));
    }
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive and finite, got {sigma_sq}"
        )));
    }
    let normal = Normal::new(mu, sigma_sq.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flat: Vec<f64> = (0..n * a).map(|_| normal.sample(&mut rng)).collect();
    Dataset::new(DMatrix::from_column_slice(a, n, &flat))
}

/// Well-separated clusters: `per_cluster` points drawn uniformly from the
/// axis-aligned cube of half-width `radius / sqrt(a)` around each center, so
/// every point lies within `radius` of its center.
///
/// Records are interleaved (record `r` belongs to cluster `r % k`), so the
/// first `k` records hold one point from each cluster and every contiguous
/// block of records samples all clusters. Returns the generating labels.
pub fn gen_blobs(
    centers: &[Vec<f64>],
    per_cluster: usize,
    radius: f64,
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    let k = centers.len();
    let a = centers.first().map_or(0, Vec::len);
    if k == 0 || a == 0 || per_cluster == 0 || centers.iter().any(|c| c.len() != a) {
        return Err(Error::InvalidParameter(
            "blob centers must be non-empty and of equal dimension".into(),
        ));
    }
    let half = radius / (a as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = k * per_cluster;
    let mut flat = Vec::with_capacity(n * a);
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let label = r % k;
        labels.push(label);
        for &c in &centers[label] {
            flat.push(c + rng.random_range(-half..half));
        }
    }
    Ok((Dataset::new(DMatrix::from_column_slice(a, n, &flat))?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE2: [[f64; 5]; 4] = [
        [13.70, 48.13, 84.63, 41.19, 66.25],
        [26.26, 49.01, 121.37, 45.79, 81.87],
        [20.76, 44.98, 108.12, 56.59, 93.31],
        [15.19, 50.53, 63.30, 42.19, 60.88],
    ];

    const TABLE2_CSV: &str = "13.70,48.13,084.63,41.19,66.25\n\
                              26.26,49.01,121.37,45.79,81.87\n\
                              20.76,44.98,108.12,56.59,93.31\n\
                              15.19,50.53,063.30,42.19,60.88\n";

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn table2() -> Dataset {
        Dataset::from_records(&TABLE2.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn dist(d: &Dataset, p: usize, q: usize) -> f64 {
        d.record(p)
            .iter()
            .zip(d.record(q))
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn load_table2() {
        let f = write_tmp(TABLE2_CSV);
        let d = load_csv(f.path()).unwrap();
        assert_eq!((d.attributes(), d.records()), (5, 4));
        assert_eq!(d.values()[(0, 0)], 13.70);
        assert_eq!(d.values()[(2, 1)], 121.37);
        assert_eq!(d, table2());
        assert!(d.attribute_names().is_none());
    }

    #[test]
    fn load_with_header() {
        let f = write_tmp(&format!("A1,A2,A3,A4,A5\n{TABLE2_CSV}"));
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.values(), table2().values());
        assert_eq!(d.attribute_names().unwrap(), ["A1", "A2", "A3", "A4", "A5"]);
    }

    #[test]
    fn load_single_cell() {
        let f = write_tmp("42.0\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!((d.attributes(), d.records()), (1, 1));
        assert_eq!(d.values()[(0, 0)], 42.0);
    }

    #[test]
    fn load_errors_name_location() {
        let f = write_tmp("1,2\n3,4,5\n");
        match load_csv(f.path()) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("1,2\n3,x\n");
        match load_csv(f.path()) {
            Err(Error::Parse { line: 2, column: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("1,nan\n");
        assert!(matches!(load_csv(f.path()), Err(Error::Parse { .. })));
        assert!(matches!(
            load_csv("/definitely/not/here.csv"),
            Err(Error::Io { .. })
        ));
        let f = write_tmp("");
        assert!(load_csv(f.path()).is_err());
    }

    #[test]
    fn save_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t2.csv");
        let d = table2();
        save_csv(&d, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(load_csv(&path).unwrap(), d);

        let named = d
            .clone()
            .with_attribute_names((1..=5).map(|i| format!("A{i}")).collect())
            .unwrap();
        save_csv(&named, &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("A1,A2"));
        assert_eq!(load_csv(&path).unwrap(), named);

        let one = Dataset::new(DMatrix::from_element(1, 1, 0.1)).unwrap();
        save_csv(&one, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "0.1\n");
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(Dataset::new(DMatrix::from_element(2, 2, f64::NAN)).is_err());
        assert!(Dataset::new(DMatrix::zeros(0, 3)).is_err());
        assert!(Dataset::new(DMatrix::zeros(3, 0)).is_err());
    }

    #[test]
    fn min_max_fit_and_apply() {
        let d = Dataset::from_records(&[vec![0.0], vec![10.0], vec![5.0]]).unwrap();
        let spec = NormalizationSpec::fit(&d, NormMethod::MinMax);
        assert_eq!(spec.stats(), [AttributeStats::MinMax { min: 0.0, max: 10.0 }]);
        let out = spec.apply(&d).unwrap();
        assert_eq!(out.values().as_slice(), [0.0, 1.0, 0.5]);
    }

    #[test]
    fn z_score_uses_population_stddev() {
        let d = Dataset::from_records(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let spec = NormalizationSpec::fit(&d, NormMethod::ZScore);
        let AttributeStats::ZScore { mean, stddev } = spec.stats()[0] else {
            panic!()
        };
        assert_eq!(mean, 2.0);
        // hand oracle: ((1-2)^2 + 0 + (3-2)^2) / 3 = 2/3
        assert!((stddev - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let out = spec.apply(&d).unwrap();
        assert!((out.values()[(0, 2)] - 1.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unary_max_divides_by_max_abs() {
        let d = Dataset::from_records(&[vec![-4.0], vec![2.0]]).unwrap();
        let spec = NormalizationSpec::fit(&d, NormMethod::UnaryMax);
        assert_eq!(spec.stats(), [AttributeStats::UnaryMax { max_abs: 4.0 }]);
        assert_eq!(spec.apply(&d).unwrap().values().as_slice(), [-1.0, 0.5]);
    }

    #[test]
    fn constant_attribute_maps_to_zero() {
        let d = Dataset::from_records(&[vec![3.0, 1.0], vec![3.0, 2.0]]).unwrap();
        let out = NormalizationSpec::fit(&d, NormMethod::MinMax).apply(&d).unwrap();
        assert_eq!(out.values().row(0).iter().copied().collect::<Vec<_>>(), [0.0, 0.0]);
    }

    #[test]
    fn normalizer_rejects_wrong_width() {
        let spec = NormalizationSpec::fit(&table2(), NormMethod::MinMax);
        let d = Dataset::from_records(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(spec.apply(&d), Err(Error::Shape(_))));
    }

    #[test]
    fn partition_even_and_remainder() {
        let make = |n: usize| {
            Dataset::new(DMatrix::from_fn(2, n, |i, j| (10 * j + i) as f64)).unwrap()
        };
        let p = make(10).partition(2).unwrap();
        assert_eq!(p.widths(), [5, 5]);

        let d = make(11);
        let p = d.partition(2).unwrap();
        assert_eq!(p.widths(), [5, 6]);
        assert_eq!(p.concat(), d);
        assert_eq!(p.blocks()[1].values()[(0, 0)], 50.0);
    }

    #[test]
    fn partition_requires_more_records_than_attributes() {
        let d = Dataset::new(DMatrix::zeros(5, 10)).unwrap();
        assert!(matches!(
            d.partition(2),
            Err(Error::Partition { per_part: 5, attributes: 5, .. })
        ));
        assert!(d.partition(0).is_err());
    }

    #[test]
    fn padding() {
        let d = table2();
        let p = d.pad_to_even();
        assert_eq!(p.attributes(), 6);
        assert!(p.values().row(5).iter().all(|&v| v == 0.0));
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(dist(&d, a, b).to_bits(), dist(&p, a, b).to_bits());
            }
        }
        let even = p.pad_to_even();
        assert_eq!(even, p);
    }

    #[test]
    fn synthetic_is_reproducible() {
        let a = gen_synthetic(100, 3, 100.0, 100.0, 9).unwrap();
        let b = gen_synthetic(100, 3, 100.0, 100.0, 9).unwrap();
        assert_eq!(a, b);
        let c = gen_synthetic(100, 3, 100.0, 100.0, 10).unwrap();
        assert_ne!(a, c);
        let one = gen_synthetic(1, 1, 100.0, 100.0, 1).unwrap();
        assert!(one.values()[(0, 0)].is_finite());
        assert!(gen_synthetic(10, 2, 0.0, 0.0, 1).is_err());
        assert!(gen_synthetic(10, 2, 0.0, -1.0, 1).is_err());
        assert!(gen_synthetic(0, 2, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn blobs_stay_within_radius() {
        let centers = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]];
        let (d, labels) = gen_blobs(&centers, 100, 0.9, 3).unwrap();
        assert_eq!(d.records(), 300);
        for (r, &l) in labels.iter().enumerate() {
            assert_eq!(l, r % 3);
            let c = &centers[l];
            let dd: f64 = d.record(r).iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
            assert!(dd.sqrt() < 0.9);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dataset() -> impl Strategy<Value = Dataset> {
            (1usize..5, 1usize..30).prop_flat_map(|(a, n)| {
                proptest::collection::vec(-1e6..1e6f64, a * n).prop_map(move |v| {
                    Dataset::new(DMatrix::from_column_slice(a, n, &v)).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn csv_round_trip(d in dataset()) {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("d.csv");
                save_csv(&d, &path).unwrap();
                prop_assert_eq!(load_csv(&path).unwrap(), d);
            }

            #[test]
            fn min_max_lands_in_unit_interval(d in dataset()) {
                let spec = NormalizationSpec::fit(&d, NormMethod::MinMax);
                let out = spec.apply(&d).unwrap();
                prop_assert!(out.values().iter().all(|v| (0.0..=1.0).contains(v)));
                for (i, s) in spec.stats().iter().enumerate() {
                    let AttributeStats::MinMax { min, max } = *s else { unreachable!() };
                    if max > min {
                        for j in 0..d.records() {
                            if d.values()[(i, j)] == min { prop_assert_eq!(out.values()[(i, j)], 0.0); }
                            if d.values()[(i, j)] == max { prop_assert_eq!(out.values()[(i, j)], 1.0); }
                        }
                    }
                }
            }

            #[test]
            fn partition_concat_identity(n in 12usize..80, m in 1usize..4) {
                let d = Dataset::new(DMatrix::from_fn(2, n, |i, j| (i * 1000 + j) as f64)).unwrap();
                if n / m > 2 {
                    let p = d.partition(m).unwrap();
                    prop_assert_eq!(p.widths().iter().sum::<usize>(), n);
                    prop_assert_eq!(p.concat(), d);
                }
            }
        }
    }
}
