//! Equal-frequency quantization of continuous features.
//!
//! A feature with `L` binning levels is mapped onto `B = 2^L` finite bins
//! numbered `1..=B`. Bin `0` is reserved for NaN (missing values that carry
//! no information). Negative and positive infinity land in the underflow bin
//! `1` and the overflow bin `B` respectively, so they can still be separated
//! from finite values by a cut.
//!
//! Boundaries are actual training values, which makes the inverse map from a
//! cut bin to a float threshold exact: for every value `v`,
//! `to_bin(v) <= cut_bin` holds iff `v < threshold(cut_bin)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Bin index of a single feature value. `0` means missing.
pub type BinIndex = u16;

/// Bin reserved for NaN.
pub const MISSING_BIN: BinIndex = 0;

/// Largest supported number of binning levels (`2^15` bins still fit a `u16`
/// together with the missing bin).
pub const MAX_BINNING_LEVELS: u32 = 15;

/// Default number of binning levels (256 bins).
pub const DEFAULT_BINNING_LEVELS: u32 = 8;

/// Sorted bin boundaries of one feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBinning {
    levels: u32,
    boundaries: Vec<f64>,
}

impl FeatureBinning {
    /// Fits boundaries on the finite entries of `values`.
    ///
    /// With `M` finite values sorted ascending and `B = 2^levels`, boundary
    /// `k` (for `k = 1..B`) is the order statistic at index `floor(k * M / B)`.
    pub fn fit(values: &[f64], levels: u32) -> Result<Self> {
        check_levels(levels)?;
        let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Err(Error::NoFiniteValues);
        }
        finite.sort_unstable_by(f64::total_cmp);

        let n_bins = 1usize << levels;
        let m = finite.len();
        let boundaries = (1..n_bins)
            .map(|k| finite[k * m / n_bins])
            // -0.0 and 0.0 compare equal; normalize so thresholds serialize the same
            .map(|b| if b == 0.0 { 0.0 } else { b })
            .collect();
        Ok(Self { levels, boundaries })
    }

    /// Builds a binning from explicit boundaries, validating the invariants.
    pub fn from_boundaries(levels: u32, boundaries: Vec<f64>) -> Result<Self> {
        check_levels(levels)?;
        let expected = (1usize << levels) - 1;
        if boundaries.len() != expected {
            return Err(invalid(format!(
                "expected {expected} boundaries for {levels} binning levels, got {}",
                boundaries.len()
            )));
        }
        if let Some(i) = boundaries.iter().position(|b| !b.is_finite()) {
            return Err(invalid(format!("boundary {i} is not finite")));
        }
        if let Some(i) = boundaries.windows(2).position(|w| w[0] > w[1]) {
            return Err(invalid(format!(
                "boundaries are not sorted at position {}",
                i + 1
            )));
        }
        Ok(Self { levels, boundaries })
    }

    /// Placeholder binning for a feature that only ever holds NaN. Every
    /// training value maps to the missing bin, so no cut is ever placed on it.
    pub fn all_missing(levels: u32) -> Result<Self> {
        check_levels(levels)?;
        Ok(Self {
            levels,
            boundaries: vec![0.0; (1usize << levels) - 1],
        })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Number of finite bins `B`.
    pub fn n_bins(&self) -> usize {
        1 << self.levels
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Maps a value to its bin.
    #[inline]
    pub fn to_bin(&self, v: f64) -> BinIndex {
        if v.is_nan() {
            return MISSING_BIN;
        }
        (1 + self.boundaries.partition_point(|&b| b <= v)) as BinIndex
    }

    /// Float threshold equivalent to the cut "bin <= cut_bin".
    pub fn threshold(&self, cut_bin: BinIndex) -> Result<f64> {
        let cut = cut_bin as usize;
        if cut == 0 || cut >= self.n_bins() {
            return Err(invalid(format!(
                "cut bin {cut} outside [1, {}]",
                self.n_bins() - 1
            )));
        }
        Ok(self.boundaries[cut - 1])
    }
}

fn check_levels(levels: u32) -> Result<()> {
    if !(1..=MAX_BINNING_LEVELS).contains(&levels) {
        return Err(invalid(format!(
            "binning levels must be in [1, {MAX_BINNING_LEVELS}], got {levels}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent order-statistic oracle.
    fn oracle_boundaries(values: &[f64], levels: u32) -> Vec<f64> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let b = 1usize << levels;
        (1..b).map(|k| v[(k * v.len()) / b]).collect()
    }

    #[test]
    fn boundaries_of_eight_values() {
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(oracle_boundaries(&values, 2), vec![3.0, 5.0, 7.0]);
        let b = FeatureBinning::fit(&values, 2).unwrap();
        assert_eq!(b.boundaries(), &[3.0, 5.0, 7.0]);
    }

    #[test]
    fn ties_collapse() {
        let b = FeatureBinning::fit(&[5.0; 4], 1).unwrap();
        assert_eq!(b.boundaries(), &[5.0]);
    }

    #[test]
    fn non_finite_values_are_ignored_for_boundaries() {
        let values = [1.0, 2.0, f64::NAN, f64::INFINITY, 3.0, 4.0];
        assert_eq!(oracle_boundaries(&values, 1), vec![3.0]);
        assert_eq!(
            FeatureBinning::fit(&values, 1).unwrap().boundaries(),
            &[3.0]
        );
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            FeatureBinning::fit(&[f64::NAN, f64::INFINITY], 2),
            Err(Error::NoFiniteValues)
        ));
        assert!(matches!(
            FeatureBinning::fit(&[1.0], 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(FeatureBinning::fit(&[1.0], MAX_BINNING_LEVELS + 1).is_err());
    }

    #[test]
    fn to_bin_examples() {
        let b = FeatureBinning::from_boundaries(2, vec![3.0, 5.0, 7.0]).unwrap();
        assert_eq!(b.to_bin(2.9), 1);
        assert_eq!(b.to_bin(f64::NAN), 0);
        assert_eq!(b.to_bin(f64::INFINITY), 4);
        assert_eq!(b.to_bin(f64::NEG_INFINITY), 1);
        assert_eq!(b.to_bin(3.0), 2);
        assert_eq!(b.to_bin(7.0), 4);
    }

    #[test]
    fn threshold_examples() {
        let b = FeatureBinning::from_boundaries(2, vec![3.0, 5.0, 7.0]).unwrap();
        assert_eq!(b.threshold(2).unwrap(), 5.0);
        assert_eq!(b.threshold(1).unwrap(), 3.0);
        assert!(b.threshold(0).is_err());
        assert!(b.threshold(4).is_err());
        let single = FeatureBinning::from_boundaries(1, vec![5.0]).unwrap();
        assert_eq!(single.threshold(1).unwrap(), 5.0);
    }

    #[test]
    fn threshold_matches_bins_on_a_grid() {
        let b = FeatureBinning::from_boundaries(2, vec![3.0, 5.0, 7.0]).unwrap();
        for cut in 1..4u16 {
            let t = b.threshold(cut).unwrap();
            for i in -20..=100 {
                let v = i as f64 * 0.1;
                assert_eq!(v < t, b.to_bin(v) <= cut, "v={v} cut={cut}");
            }
        }
    }

    #[test]
    fn from_boundaries_validates() {
        assert!(FeatureBinning::from_boundaries(2, vec![3.0, 2.0, 7.0]).is_err());
        assert!(FeatureBinning::from_boundaries(2, vec![3.0, 5.0]).is_err());
        assert!(FeatureBinning::from_boundaries(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn equal_frequency_without_ties() {
        let values: Vec<f64> = (0..64).map(|i| (i * 37 % 64) as f64).collect();
        let b = FeatureBinning::fit(&values, 3).unwrap();
        let mut counts = vec![0usize; 9];
        for &v in &values {
            counts[b.to_bin(v) as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        assert!(counts[1..].iter().all(|&c| c == 8), "{counts:?}");
    }

    proptest! {
        #[test]
        fn fit_matches_oracle(values in prop::collection::vec(-1e6f64..1e6, 1..200), levels in 1u32..6) {
            let b = FeatureBinning::fit(&values, levels).unwrap();
            prop_assert_eq!(b.boundaries(), &oracle_boundaries(&values, levels)[..]);
        }

        #[test]
        fn bins_are_monotone(values in prop::collection::vec(-1e3f64..1e3, 1..100), a in -2e3f64..2e3, d in 0f64..1e3) {
            let b = FeatureBinning::fit(&values, 3).unwrap();
            prop_assert!(b.to_bin(a) <= b.to_bin(a + d));
        }

        #[test]
        fn inverse_consistency(values in prop::collection::vec(-1e3f64..1e3, 1..100), levels in 1u32..5) {
            let b = FeatureBinning::fit(&values, levels).unwrap();
            for cut in 1..b.n_bins() as u16 {
                let t = b.threshold(cut).unwrap();
                for &v in &values {
                    prop_assert_eq!(b.to_bin(v) <= cut, v < t);
                }
            }
        }

        #[test]
        fn order_statistic_invariance(values in prop::collection::vec(-5f64..5.0, 1..100), levels in 1u32..5) {
            // x -> 2x + 1 is strictly increasing and exact in floating point here
            let mapped: Vec<f64> = values.iter().map(|v| v * 2.0 + 1.0).collect();
            let b = FeatureBinning::fit(&values, levels).unwrap();
            let bm = FeatureBinning::fit(&mapped, levels).unwrap();
            for (&v, &w) in values.iter().zip(&mapped) {
                prop_assert_eq!(b.to_bin(v), bm.to_bin(w));
            }
        }
    }
}
