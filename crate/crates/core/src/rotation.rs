//! Orthonormal block-diagonal rotation matrices.
//!
//! Every matrix here is built from a single angle θ: an `a × a` block-diagonal
//! matrix whose `a/2` diagonal blocks are all
//!
//! ```text
//! [  cos θ  sin θ ]
//! [ -sin θ  cos θ ]
//! ```
//!
//! Such matrices form a commutative group under multiplication with
//! `f(θ1)·f(θ2) = f(θ1 + θ2)`, which is what makes unification of two
//! differently rotated subsets possible.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// An angle in degrees, always normalized into `[0, 360)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Normalizes `degrees` into `[0, 360)`. Non-finite input is rejected.
    pub fn new(degrees: f64) -> Result<Self> {
        if !degrees.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "angle must be finite, got {degrees}"
            )));
        }
        Ok(Angle(normalize_degrees(degrees)))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

fn normalize_degrees(degrees: f64) -> f64 {
    let r = degrees.rem_euclid(360.0);
    // rem_euclid of a tiny negative value rounds up to exactly 360.
    if r >= 360.0 {
        0.0
    } else {
        // folds -0.0 into +0.0
        r + 0.0
    }
}

/// Seed of the per-subset rotation key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Maps a seed to a rotation angle: one uniform draw in `[0, 360)` from a
/// ChaCha8 generator seeded with `seed` (via `SeedableRng::seed_from_u64`).
pub fn seed_to_angle(seed: Seed) -> Angle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    Angle(normalize_degrees(rng.random_range(0.0..360.0)))
}

/// An `a × a` orthonormal block-diagonal rotation.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationMatrix {
    entries: DMatrix<f64>,
    // Row-major copy of the (identical) 2×2 diagonal block.
    block: [f64; 4],
    source_angle: Angle,
}

impl RotationMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn source_angle(&self) -> Angle {
        self.source_angle
    }

    pub fn transpose(&self) -> DMatrix<f64> {
        self.entries.transpose()
    }

    fn from_entries(entries: DMatrix<f64>, source_angle: Angle) -> Self {
        let block = [
            entries[(0, 0)],
            entries[(0, 1)],
            entries[(1, 0)],
            entries[(1, 1)],
        ];
        RotationMatrix {
            entries,
            block,
            source_angle,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "rotation dimension must be even and positive, got {dim}"
        )));
    }
    Ok(())
}

/// Builds the block-diagonal rotation `f(theta)` of size `dim × dim`.
pub fn build_rotation(theta: Angle, dim: usize) -> Result<RotationMatrix> {
    check_dim(dim)?;
    let (sin, cos) = theta.radians().sin_cos();
    let mut entries = DMatrix::zeros(dim, dim);
    for b in (0..dim).step_by(2) {
        entries[(b, b)] = cos;
        entries[(b, b + 1)] = sin;
        entries[(b + 1, b)] = -sin;
        entries[(b + 1, b + 1)] = cos;
    }
    Ok(RotationMatrix::from_entries(entries, theta))
}

/// Matrix product `r1 · r2`, tagged with the angle `θ1 + θ2 (mod 360)`.
pub fn compose(r1: &RotationMatrix, r2: &RotationMatrix) -> Result<RotationMatrix> {
    if r1.dim() != r2.dim() {
        return Err(Error::Dimension(format!(
            "cannot compose {0}×{0} with {1}×{1} rotation",
            r1.dim(),
            r2.dim()
        )));
    }
    let angle = Angle(normalize_degrees(
        r1.source_angle.degrees() + r2.source_angle.degrees(),
    ));
    Ok(RotationMatrix::from_entries(&r1.entries * &r2.entries, angle))
}

/// Returns `r · block` without modifying `block`.
pub fn apply(r: &RotationMatrix, block: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut out = block.clone();
    apply_in_place(r, &mut out)?;
    Ok(out)
}

/// Overwrites `block` with `r · block`.
///
/// Only the 2×2 diagonal blocks of `r` are read; every other entry is zero by
/// construction, so this is the full product at `O(a·c)` cost.
pub fn apply_in_place(r: &RotationMatrix, block: &mut DMatrix<f64>) -> Result<()> {
    if block.nrows() != r.dim() {
        return Err(Error::Dimension(format!(
            "rotation is {0}×{0} but block has {1} rows",
            r.dim(),
            block.nrows()
        )));
    }
    rotate_pairs(r.block, block.as_mut_slice());
    Ok(())
}

/// Rotates every record of the column-major `values` (records of height
/// `rows`) by `f(theta)` in place, without materializing the matrix.
pub fn rotate_records_in_place(theta: Angle, rows: usize, values: &mut [f64]) -> Result<()> {
    check_dim(rows)?;
    if !values.len().is_multiple_of(rows) {
        return Err(Error::Shape(format!(
            "{} values do not form records of {rows} attributes",
            values.len()
        )));
    }
    let (sin, cos) = theta.radians().sin_cos();
    rotate_pairs([cos, sin, -sin, cos], values);
    Ok(())
}

// Records have even height, so consecutive value pairs never straddle two
// records and the whole buffer can be walked pairwise.
fn rotate_pairs([m00, m01, m10, m11]: [f64; 4], values: &mut [f64]) {
    for pair in values.chunks_exact_mut(2) {
        let (x0, x1) = (pair[0], pair[1]);
        pair[0] = m00 * x0 + m01 * x1;
        pair[1] = m10 * x0 + m11 * x1;
    }
}

/// The angle `θ_ij` such that rotating by `θ_ij` after `θ_i` lands in the
/// frame of `θ_j`.
pub fn unification_angle(theta_i: Angle, theta_j: Angle) -> Angle {
    let (ti, tj) = (theta_i.degrees(), theta_j.degrees());
    let raw = if tj > ti {
        tj - ti
    } else if ti > tj {
        360.0 - (ti - tj)
    } else {
        0.0
    };
    Angle(normalize_degrees(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> Angle {
        Angle::new(d).unwrap()
    }

    #[test]
    fn in_place_rotation_matches_matrix_product() {
        let m = DMatrix::from_fn(6, 9, |i, j| (i * 9 + j) as f64 * 0.37 - 4.0);
        let r = build_rotation(deg(123.4), 6).unwrap();
        let mut flat = m.as_slice().to_vec();
        rotate_records_in_place(deg(123.4), 6, &mut flat).unwrap();
        assert_eq!(flat, apply(&r, &m).unwrap().as_slice());
        assert!(max_abs_diff(&DMatrix::from_vec(6, 9, flat), &(r.entries() * &m)) < 1e-12);
        assert!(rotate_records_in_place(deg(1.0), 3, &mut [0.0; 6]).is_err());
        assert!(rotate_records_in_place(deg(1.0), 4, &mut [0.0; 6]).is_err());
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(deg(0.0).degrees(), 0.0);
        assert_eq!(deg(360.0).degrees(), 0.0);
        assert_eq!(deg(-90.0).degrees(), 270.0);
        assert_eq!(deg(725.0).degrees(), 5.0);
        assert_eq!(deg(-1e-20).degrees(), 0.0);
        assert!(deg(-0.0).degrees().is_sign_positive());
        assert!(Angle::new(f64::NAN).is_err());
        assert!(Angle::new(f64::INFINITY).is_err());
    }

    #[test]
    fn zero_angle_is_identity() {
        let r = build_rotation(Angle::ZERO, 4).unwrap();
        assert_eq!(r.entries(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn quarter_turn_2x2() {
        let r = build_rotation(deg(90.0), 2).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(max_abs_diff(r.entries(), &expected) < 1e-15);
    }

    #[test]
    fn thirty_degrees_six_dims() {
        let r = build_rotation(deg(30.0), 6).unwrap();
        let (c, s) = (3f64.sqrt() / 2.0, 0.5);
        for b in (0..6).step_by(2) {
            assert!((r.entries()[(b, b)] - c).abs() < 1e-15);
            assert!((r.entries()[(b, b + 1)] - s).abs() < 1e-15);
            assert!((r.entries()[(b + 1, b)] + s).abs() < 1e-15);
            assert!((r.entries()[(b + 1, b + 1)] - c).abs() < 1e-15);
        }
        for i in 0..6 {
            for j in 0..6 {
                if i / 2 != j / 2 {
                    assert_eq!(r.entries()[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(build_rotation(Angle::ZERO, 0), Err(Error::Dimension(_))));
        assert!(matches!(build_rotation(Angle::ZERO, 3), Err(Error::Dimension(_))));
        let r2 = build_rotation(Angle::ZERO, 2).unwrap();
        let r4 = build_rotation(Angle::ZERO, 4).unwrap();
        assert!(compose(&r2, &r4).is_err());
        assert!(apply(&r4, &DMatrix::zeros(2, 3)).is_err());
    }

    /// Hand-expanded 2×2 product, independent of nalgebra's multiplication.
    fn product_2x2(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
        [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ]
    }

    fn block_of(theta: f64) -> [f64; 4] {
        let (s, c) = theta.to_radians().sin_cos();
        [c, s, -s, c]
    }

    #[test]
    fn compose_thirty_and_sixty_is_ninety() {
        let oracle = product_2x2(block_of(30.0), block_of(60.0));
        let target = build_rotation(deg(90.0), 2).unwrap();
        for (k, v) in oracle.iter().enumerate() {
            assert!((v - target.entries()[(k / 2, k % 2)]).abs() < 1e-12);
        }
        let composed = compose(
            &build_rotation(deg(30.0), 4).unwrap(),
            &build_rotation(deg(60.0), 4).unwrap(),
        )
        .unwrap();
        assert_eq!(composed.source_angle(), deg(90.0));
        let target4 = build_rotation(deg(90.0), 4).unwrap();
        assert!(max_abs_diff(composed.entries(), target4.entries()) < 1e-12);
    }

    #[test]
    fn compose_wraps_past_360() {
        let oracle = product_2x2(block_of(350.0), block_of(20.0));
        let target = build_rotation(deg(10.0), 2).unwrap();
        for (k, v) in oracle.iter().enumerate() {
            assert!((v - target.entries()[(k / 2, k % 2)]).abs() < 1e-12);
        }
        let composed = compose(
            &build_rotation(deg(350.0), 2).unwrap(),
            &build_rotation(deg(20.0), 2).unwrap(),
        )
        .unwrap();
        assert!((composed.source_angle().degrees() - 10.0).abs() < 1e-12);
        assert!(max_abs_diff(composed.entries(), target.entries()) < 1e-12);
    }

    #[test]
    fn compose_with_identity() {
        let r = build_rotation(deg(123.4), 6).unwrap();
        let id = build_rotation(Angle::ZERO, 6).unwrap();
        let c = compose(&r, &id).unwrap();
        assert_eq!(c.source_angle(), r.source_angle());
        assert!(max_abs_diff(c.entries(), r.entries()) < 1e-15);
    }

    #[test]
    fn apply_quarter_turn_to_unit_vector() {
        let r = build_rotation(deg(90.0), 2).unwrap();
        let y = apply(&r, &DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        assert!(y[(0, 0)].abs() < 1e-15);
        assert!((y[(1, 0)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_identity_is_exact() {
        let a = DMatrix::from_fn(4, 7, |i, j| (i * 7 + j) as f64 * 0.37 - 3.0);
        let y = apply(&build_rotation(Angle::ZERO, 4).unwrap(), &a).unwrap();
        assert_eq!(y, a);
    }

    #[test]
    fn apply_matches_dense_product() {
        let a = DMatrix::from_fn(6, 5, |i, j| ((i + 1) * (j + 3)) as f64).map(f64::sin);
        let r = build_rotation(deg(211.0), 6).unwrap();
        let dense = r.entries() * &a;
        assert!(max_abs_diff(&apply(&r, &a).unwrap(), &dense) < 1e-14);
    }

    #[test]
    fn unification_examples() {
        assert_eq!(unification_angle(deg(100.0), deg(250.0)), deg(150.0));
        assert_eq!(unification_angle(deg(250.0), deg(100.0)), deg(210.0));
        assert_eq!(unification_angle(deg(42.0), deg(42.0)), Angle::ZERO);
    }

    #[test]
    fn seed_to_angle_is_deterministic_and_uniform() {
        assert_eq!(seed_to_angle(Seed(7)), seed_to_angle(Seed(7)));

        let mut deciles = [0usize; 10];
        for s in 0..10_000u64 {
            let a = seed_to_angle(Seed(s)).degrees();
            assert!((0.0..360.0).contains(&a));
            deciles[(a / 36.0) as usize] += 1;
        }
        for (d, count) in deciles.iter().enumerate() {
            assert!(
                (850..=1150).contains(count),
                "decile {d} holds {count} angles"
            );
        }
    }

    #[test]
    fn distinct_test_seeds_give_distinct_angles() {
        let seeds = [0u64, 1, 2, 3, 7, 42, 1000, u64::MAX];
        let angles: Vec<f64> = seeds.iter().map(|&s| seed_to_angle(Seed(s)).degrees()).collect();
        for i in 0..angles.len() {
            for j in i + 1..angles.len() {
                assert_ne!(angles[i], angles[j], "seeds {} and {}", seeds[i], seeds[j]);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dims() -> impl Strategy<Value = usize> {
            (1usize..=6).prop_map(|h| 2 * h)
        }

        proptest! {
            #[test]
            fn orthonormal(theta in 0.0..360.0f64, dim in dims()) {
                let r = build_rotation(deg(theta), dim).unwrap();
                let prod = r.entries() * r.transpose();
                prop_assert!(max_abs_diff(&prod, &DMatrix::identity(dim, dim)) < 1e-12);
            }

            #[test]
            fn inverse_angle(theta in 0.0..360.0f64, dim in dims()) {
                let r = build_rotation(deg(theta), dim).unwrap();
                let inv = build_rotation(deg(360.0 - theta), dim).unwrap();
                let c = compose(&r, &inv).unwrap();
                prop_assert!(max_abs_diff(c.entries(), &DMatrix::identity(dim, dim)) < 1e-12);
            }

            #[test]
            fn unification_frame_equation(ti in 0.0..360.0f64, tj in 0.0..360.0f64) {
                let (ti, tj) = (deg(ti), deg(tj));
                let tij = unification_angle(ti, tj);
                let lhs = compose(
                    &build_rotation(tij, 4).unwrap(),
                    &build_rotation(ti, 4).unwrap(),
                ).unwrap();
                let rhs = build_rotation(tj, 4).unwrap();
                prop_assert!(max_abs_diff(lhs.entries(), rhs.entries()) < 1e-12);
            }
        }
    }
}
