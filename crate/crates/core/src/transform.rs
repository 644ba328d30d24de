//! RBT, MRBT and the two halves of ARBT.
//!
//! Subset indices in this module are 1-based, matching the ledger and the
//! on-disk formats.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DMatrixView};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{self, Dataset};
use crate::ledger::{ReleaseCheck, ReleaseLedger};
use crate::rotation::{self, Angle, RotationMatrix, Seed};
use crate::{Error, Result};

/// The owner's per-subset keys. Never leaves the client.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientSecrets {
    seeds: Vec<Seed>,
    angles: Vec<Angle>,
}

impl ClientSecrets {
    pub fn from_seeds(seeds: Vec<Seed>) -> Result<Self> {
        let angles = seeds.iter().map(|&s| rotation::seed_to_angle(s)).collect();
        Self::from_parts(seeds, angles)
    }

    /// Secrets with explicitly chosen angles; the seeds are kept for the
    /// record only.
    pub fn from_parts(seeds: Vec<Seed>, angles: Vec<Angle>) -> Result<Self> {
        if seeds.is_empty() || seeds.len() != angles.len() {
            return Err(Error::InvalidParameter(format!(
                "need one angle per seed and at least one subset, got {} seeds and {} angles",
                seeds.len(),
                angles.len()
            )));
        }
        Ok(ClientSecrets { seeds, angles })
    }

    /// `m` distinct seeds drawn from a generator keyed by `master`.
    pub fn generate(master: Seed, m: usize) -> Result<Self> {
        Self::from_seeds(derive_seeds(master, m)?)
    }

    pub fn m(&self) -> usize {
        self.seeds.len()
    }

    pub fn seeds(&self) -> &[Seed] {
        &self.seeds
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn angle(&self, subset: usize) -> Result<Angle> {
        check_subset(subset, self.m())?;
        Ok(self.angles[subset - 1])
    }

    /// Text form: `m <m>` then `<subset> <seed> <angle>` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("m {}\n", self.m());
        for (k, (s, a)) in self.seeds.iter().zip(&self.angles).enumerate() {
            out.push_str(&format!("{} {} {}\n", k + 1, s, a));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: &str| Error::Parse {
            path: path.into(),
            line: line + 1,
            column: 0,
            message: message.into(),
        };
        let (line, header) = lines.next().ok_or_else(|| Error::format(path, "empty secrets file"))?;
        let m: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["m", v] => v.parse().map_err(|_| bad(line, "bad subset count"))?,
            _ => return Err(bad(line, "expected header `m <count>`")),
        };
        let mut seeds = Vec::with_capacity(m);
        let mut angles = Vec::with_capacity(m);
        for (line, text) in lines {
            let fields: Vec<&str> = text.split_whitespace().collect();
            let [index, seed, angle] = fields[..] else {
                return Err(bad(line, "expected `subset seed angle`"));
            };
            if index.parse::<usize>().ok() != Some(seeds.len() + 1) {
                return Err(bad(line, "subset indices must run 1..=m in order"));
            }
            seeds.push(Seed(seed.parse().map_err(|_| bad(line, "bad seed"))?));
            let angle = angle
                .parse::<f64>()
                .ok()
                .and_then(|a| Angle::new(a).ok())
                .ok_or_else(|| bad(line, "bad angle"))?;
            angles.push(angle);
        }
        if seeds.len() != m {
            return Err(Error::format(
                path,
                format!("header declares {m} subsets but {} are listed", seeds.len()),
            ));
        }
        Self::from_parts(seeds, angles)
    }
}

fn derive_seeds(master: Seed, m: usize) -> Result<Vec<Seed>> {
    if m == 0 {
        return Err(Error::InvalidParameter("subset count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master.0);
    let mut seen = HashSet::with_capacity(m);
    let mut seeds = Vec::with_capacity(m);
    while seeds.len() < m {
        let s = rng.next_u64();
        if seen.insert(s) {
            seeds.push(Seed(s));
        }
    }
    Ok(seeds)
}

fn check_subset(index: usize, m: usize) -> Result<()> {
    if index == 0 || index > m {
        return Err(Error::SubsetIndex { index, m });
    }
    Ok(())
}

/// One rotated block as released to the miner, borrowed from its
/// [`TransformedDataset`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformedBlock<'a> {
    pub subset_index: usize,
    dim: usize,
    data: &'a [f64],
}

impl<'a> TransformedBlock<'a> {
    pub fn records(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Column-major values, one record per column.
    pub fn as_slice(&self) -> &'a [f64] {
        self.data
    }

    pub fn values(&self) -> DMatrixView<'a, f64> {
        DMatrixView::from_slice(self.data, self.dim, self.records())
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.dim, self.records(), self.data)
    }
}

/// What the miner receives: rotated blocks and their shapes, nothing else.
/// Blocks are stored back to back in subset order.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedDataset {
    values: DMatrix<f64>,
    widths: Vec<usize>,
}

const MANIFEST: &str = "manifest.txt";

impl TransformedDataset {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.widths.clone()
    }

    pub fn blocks(&self) -> Vec<TransformedBlock<'_>> {
        let dim = self.dim();
        let mut rest = self.values.as_slice();
        self.widths
            .iter()
            .enumerate()
            .map(|(k, &width)| {
                let (data, tail) = rest.split_at(width * dim);
                rest = tail;
                TransformedBlock {
                    subset_index: k + 1,
                    dim,
                    data,
                }
            })
            .collect()
    }

    pub fn block(&self, subset: usize) -> Result<TransformedBlock<'_>> {
        check_subset(subset, self.m())?;
        let dim = self.dim();
        let start: usize = self.widths[..subset - 1].iter().sum();
        let width = self.widths[subset - 1];
        Ok(TransformedBlock {
            subset_index: subset,
            dim,
            data: &self.values.as_slice()[start * dim..(start + width) * dim],
        })
    }

    /// All blocks side by side, in subset order.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn concat(&self) -> DMatrix<f64> {
        self.values.clone()
    }

    fn block_file(subset: usize) -> String {
        format!("block_{subset}.csv")
    }

    /// Manifest text: `m`, `a`, then `block <subset> <width> <file>` lines.
    pub fn manifest(&self) -> String {
        let mut out = format!("m {}\na {}\n", self.m(), self.dim());
        for (k, width) in self.widths.iter().enumerate() {
            out.push_str(&format!("block {} {width} {}\n", k + 1, Self::block_file(k + 1)));
        }
        out
    }

    /// Writes `manifest.txt` and one CSV per block into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for b in self.blocks() {
            let path = dir.join(Self::block_file(b.subset_index));
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            dataset::write_matrix_csv(BufWriter::new(file), b.dim, b.as_slice(), None)
                .map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join(MANIFEST);
        fs::write(&path, self.manifest()).map_err(|e| Error::io(path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let bad = |line: usize, message: String| Error::Parse {
            path: path.clone(),
            line: line + 1,
            column: 0,
            message,
        };
        let (mut m, mut dim) = (None, None);
        let mut entries: Vec<(usize, usize, PathBuf)> = Vec::new();
        for (line, text) in text.lines().enumerate() {
            let fields: Vec<&str> = text.split_whitespace().collect();
            let number = |s: &str| s.parse::<usize>().map_err(|_| bad(line, format!("bad number {s:?}")));
            match fields[..] {
                [] => {}
                ["m", v] => m = Some(number(v)?),
                ["a", v] => dim = Some(number(v)?),
                ["block", subset, width, file] => {
                    entries.push((number(subset)?, number(width)?, dir.join(file)))
                }
                _ => return Err(bad(line, format!("unrecognized manifest line {text:?}"))),
            }
        }
        let (m, dim) = match (m, dim) {
            (Some(m), Some(dim)) => (m, dim),
            _ => return Err(Error::format(&path, "manifest lacks `m` or `a`")),
        };
        if entries.len() != m || m == 0 {
            return Err(Error::format(
                &path,
                format!("manifest declares {m} blocks but lists {}", entries.len()),
            ));
        }
        let mut flat = Vec::new();
        let mut widths = Vec::with_capacity(m);
        for (k, (subset, width, file)) in entries.into_iter().enumerate() {
            if subset != k + 1 {
                return Err(Error::format(&path, "block subsets must run 1..=m in order"));
            }
            let values = dataset::load_csv(&file)?.into_values();
            if values.nrows() != dim || values.ncols() != width {
                return Err(Error::format(
                    &file,
                    format!(
                        "expected {dim}×{width} block, found {}×{}",
                        values.nrows(),
                        values.ncols()
                    ),
                ));
            }
            flat.extend_from_slice(values.as_slice());
            widths.push(width);
        }
        let n = widths.iter().sum();
        Ok(TransformedDataset {
            values: DMatrix::from_vec(dim, n, flat),
            widths,
        })
    }
}

/// Block `i` rotated into block `j`'s frame, placed next to block `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnifiedPair {
    pub merged: DMatrix<f64>,
    pub source_subsets: (usize, usize),
    /// Record counts of the two parts; the first `widths.0` columns of
    /// `merged` come from subset `i`.
    pub widths: (usize, usize),
}

fn require_even(d: &Dataset) -> Result<()> {
    if !d.attributes().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "{} attributes; pad to an even count first",
            d.attributes()
        )));
    }
    Ok(())
}

/// Single-rotation transform `Y = f(θ)·A` with `θ = seed_to_angle(seed)`.
pub fn rbt(d: &Dataset, seed: Seed) -> Result<TransformedDataset> {
    require_even(d)?;
    let mut values = d.values().clone();
    rotation::rotate_records_in_place(rotation::seed_to_angle(seed), d.attributes(), values.as_mut_slice())?;
    Ok(TransformedDataset {
        widths: vec![d.records()],
        values,
    })
}

/// Partitions `d` into `m` record blocks and rotates block `i` by
/// `seed_to_angle(seeds[i])`.
pub fn mrbt(d: &Dataset, m: usize, seeds: &[Seed]) -> Result<(TransformedDataset, ClientSecrets)> {
    if seeds.len() != m {
        return Err(Error::InvalidParameter(format!(
            "{} seeds supplied for m = {m} subsets",
            seeds.len()
        )));
    }
    let secrets = ClientSecrets::from_seeds(seeds.to_vec())?;
    let y = mrbt_with_secrets(d, &secrets)?;
    Ok((y, secrets))
}

/// MRBT using the angles held in `secrets`, one subset per angle.
pub fn mrbt_with_secrets(d: &Dataset, secrets: &ClientSecrets) -> Result<TransformedDataset> {
    require_even(d)?;
    let a = d.attributes();
    let bounds = d.partition_bounds(secrets.m())?;
    // one copy of the data, each block rotated where it lies
    let mut values = d.values().clone();
    for (&(start, width), &angle) in bounds.iter().zip(secrets.angles()) {
        let block = &mut values.as_mut_slice()[start * a..(start + width) * a];
        rotation::rotate_records_in_place(angle, a, block)?;
    }
    Ok(TransformedDataset {
        values,
        widths: bounds.into_iter().map(|(_, width)| width).collect(),
    })
}

/// `Y_A^T Y_B` split into `m × m` blocks `Y_{A_i}^T Y_{B_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGram {
    m: usize,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockGram {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Block `(i, j)`, 1-based.
    pub fn block(&self, i: usize, j: usize) -> Result<&DMatrix<f64>> {
        check_subset(i, self.m)?;
        check_subset(j, self.m)?;
        Ok(&self.blocks[(i - 1) * self.m + (j - 1)])
    }
}

/// Block inner products of two transformed datasets. Diagonal blocks equal
/// the plaintext products when both used the same per-subset rotations.
pub fn inner_product_blocks(ya: &TransformedDataset, yb: &TransformedDataset) -> Result<BlockGram> {
    if ya.dim() != yb.dim() || ya.widths != yb.widths {
        return Err(Error::Shape(format!(
            "transformed datasets differ in shape: a={} m={} vs a={} m={}",
            ya.dim(),
            ya.m(),
            yb.dim(),
            yb.m()
        )));
    }
    let m = ya.m();
    let right = yb.blocks();
    let blocks = ya
        .blocks()
        .into_iter()
        .flat_map(|a| right.iter().map(move |b| a.values().tr_mul(&b.values())))
        .collect();
    Ok(BlockGram { m, blocks })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReleaseOutcome {
    Released(Angle),
    Refused(ReleaseCheck),
}

/// Client side of ARBT: hands out `θ_ij` if the ledger allows it, recording
/// the release. A refusal reveals nothing about the angles.
pub fn arbt_client_release(
    secrets: &ClientSecrets,
    i: usize,
    j: usize,
    ledger: &mut ReleaseLedger,
) -> Result<ReleaseOutcome> {
    if ledger.m() != secrets.m() {
        return Err(Error::Shape(format!(
            "ledger tracks {} subsets but secrets hold {}",
            ledger.m(),
            secrets.m()
        )));
    }
    let check = ledger.can_release(i, j)?;
    if !check.is_allowed() {
        return Ok(ReleaseOutcome::Refused(check));
    }
    let theta = rotation::unification_angle(secrets.angle(i)?, secrets.angle(j)?);
    ledger.record_release(i, j, theta)?;
    Ok(ReleaseOutcome::Released(theta))
}

/// Server side of ARBT: `Y_i* = f(θ_ij)·Y_i`, merged as `[Y_i*, Y_j]`.
pub fn server_unify(y: &TransformedDataset, i: usize, j: usize, theta_ij: Angle) -> Result<UnifiedPair> {
    if i == j {
        return Err(Error::InvalidParameter(format!("cannot unify subset {i} with itself")));
    }
    let bi = y.block(i)?;
    let bj = y.block(j)?;
    let (ci, cj) = (bi.records(), bj.records());
    let mut flat = Vec::with_capacity(y.dim() * (ci + cj));
    flat.extend_from_slice(bi.as_slice());
    rotation::rotate_records_in_place(theta_ij, y.dim(), &mut flat)?;
    flat.extend_from_slice(bj.as_slice());
    Ok(UnifiedPair {
        merged: DMatrix::from_vec(y.dim(), ci + cj, flat),
        source_subsets: (i, j),
        widths: (ci, cj),
    })
}

/// Re-keys the whole dataset with fresh seeds derived from `master`,
/// returning an empty ledger. Angles released under the old keys say nothing
/// about the new ones.
pub fn refresh_parameters(
    secrets: &ClientSecrets,
    d: &Dataset,
    master: Seed,
) -> Result<(TransformedDataset, ClientSecrets, ReleaseLedger)> {
    let fresh = ClientSecrets::generate(master, secrets.m())?;
    let y = mrbt_with_secrets(d, &fresh)?;
    let ledger = ReleaseLedger::new(fresh.m())?;
    Ok((y, fresh, ledger))
}

/// Rotation matrix for a released angle, for callers that need to move
/// other objects (e.g. centroids) into the unified frame.
pub fn unification_rotation(theta_ij: Angle, dim: usize) -> Result<RotationMatrix> {
    rotation::build_rotation(theta_ij, dim)
}
