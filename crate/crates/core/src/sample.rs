//! Binned training events in a record-major, class-separated layout.
//!
//! All feature bins of one event are contiguous, and signal and background
//! events live in two separate regions. A layer of the tree is fitted with a
//! single linear pass over each region.

use rand::Rng;

use crate::binning::{BinIndex, FeatureBinning};
use crate::data::{Dataset, Label};
use crate::error::{invalid, Result};
use crate::gbdt::{boost_weight_of_event, residual};

/// Events of one class together with their per-event fitting state.
#[derive(Debug, Clone)]
pub struct ClassRegion {
    label: Label,
    n_features: usize,
    pub(crate) bins: Vec<BinIndex>,
    pub(crate) user_weights: Vec<f64>,
    pub(crate) boost_weights: Vec<f64>,
    pub(crate) residuals: Vec<f64>,
    pub(crate) scores: Vec<f64>,
    pub(crate) node_index: Vec<u32>,
    pub(crate) parked: Vec<bool>,
    pub(crate) active: Vec<bool>,
    source_rows: Vec<usize>,
}

impl ClassRegion {
    fn new(label: Label, n_features: usize) -> Self {
        Self {
            label,
            n_features,
            bins: Vec::new(),
            user_weights: Vec::new(),
            boost_weights: Vec::new(),
            residuals: Vec::new(),
            scores: Vec::new(),
            node_index: Vec::new(),
            parked: Vec::new(),
            active: Vec::new(),
            source_rows: Vec::new(),
        }
    }

    fn push(&mut self, bins: impl Iterator<Item = BinIndex>, weight: f64, row: usize) {
        self.bins.extend(bins);
        self.user_weights.push(weight);
        self.boost_weights.push(1.0);
        // residual at F = 0
        self.residuals.push(self.label.sign());
        self.scores.push(0.0);
        self.node_index.push(0);
        self.parked.push(false);
        self.active.push(true);
        self.source_rows.push(row);
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn len(&self) -> usize {
        self.user_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.user_weights.is_empty()
    }

    /// Record-major bins: event `i` occupies `bins()[i*d..(i+1)*d]`.
    pub fn bins(&self) -> &[BinIndex] {
        &self.bins
    }

    pub fn event_bins(&self, i: usize) -> &[BinIndex] {
        &self.bins[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn user_weights(&self) -> &[f64] {
        &self.user_weights
    }

    pub fn boost_weights(&self) -> &[f64] {
        &self.boost_weights
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn node_index(&self) -> &[u32] {
        &self.node_index
    }

    pub fn parked(&self) -> &[bool] {
        &self.parked
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// Row of each event in the dataset the sample was built from.
    pub fn source_rows(&self) -> &[usize] {
        &self.source_rows
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Weight entering the histograms: user weight times boost weight.
    #[inline]
    pub fn effective_weight(&self, i: usize) -> f64 {
        self.user_weights[i] * self.boost_weights[i]
    }

    fn select(&mut self, rate: f64, rng: &mut impl Rng) {
        let n = self.len();
        let k = (rate * n as f64).floor() as usize;
        if k >= n {
            self.active.fill(true);
            return;
        }
        self.active.fill(false);
        for i in rand::seq::index::sample(rng, n, k) {
            self.active[i] = true;
        }
    }

    fn refresh_boost_weights(&mut self) {
        let y = self.label.sign();
        for ((r, w), &f) in self
            .residuals
            .iter_mut()
            .zip(&mut self.boost_weights)
            .zip(&self.scores)
        {
            *r = residual(y, f);
            *w = boost_weight_of_event(*r);
        }
    }
}

/// Integer-binned training sample.
#[derive(Debug, Clone)]
pub struct BinnedEventSample {
    n_features: usize,
    n_bins: Vec<usize>,
    pub(crate) signal: ClassRegion,
    pub(crate) background: ClassRegion,
}

impl BinnedEventSample {
    /// Bins every event of `data` and partitions events by class.
    pub fn build(data: &Dataset, binnings: &[FeatureBinning]) -> Result<Self> {
        let d = data.n_features();
        if binnings.len() != d {
            return Err(invalid(format!(
                "{} binnings for {d} features",
                binnings.len()
            )));
        }
        if let Some(i) = data.weights().iter().position(|w| !w.is_finite()) {
            return Err(invalid(format!("user weight of row {i} is not finite")));
        }
        let mut signal = ClassRegion::new(Label::Signal, d);
        let mut background = ClassRegion::new(Label::Background, d);
        for (i, row) in data.rows().enumerate() {
            let region = match data.labels()[i] {
                Label::Signal => &mut signal,
                Label::Background => &mut background,
            };
            let bins = row.iter().zip(binnings).map(|(&v, b)| b.to_bin(v));
            region.push(bins, data.weights()[i], i);
        }
        Ok(Self {
            n_features: d,
            n_bins: binnings.iter().map(FeatureBinning::n_bins).collect(),
            signal,
            background,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Number of finite bins `B` of each feature.
    pub fn n_bins(&self) -> &[usize] {
        &self.n_bins
    }

    pub fn signal(&self) -> &ClassRegion {
        &self.signal
    }

    pub fn background(&self) -> &ClassRegion {
        &self.background
    }

    pub fn region(&self, label: Label) -> &ClassRegion {
        match label {
            Label::Signal => &self.signal,
            Label::Background => &self.background,
        }
    }

    pub fn regions(&self) -> [&ClassRegion; 2] {
        [&self.signal, &self.background]
    }

    pub(crate) fn regions_mut(&mut self) -> [&mut ClassRegion; 2] {
        [&mut self.signal, &mut self.background]
    }

    pub fn len(&self) -> usize {
        self.signal.len() + self.background.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Activates exactly `floor(rate * n)` events of each class, drawn
    /// uniformly without replacement; deactivates the rest.
    pub fn subsample(&mut self, rate: f64, rng: &mut impl Rng) -> Result<()> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(invalid(format!(
                "subsampling rate must be in (0, 1], got {rate}"
            )));
        }
        self.signal.select(rate, rng);
        self.background.select(rate, rng);
        Ok(())
    }

    pub fn set_all_active(&mut self) {
        for region in self.regions_mut() {
            region.active.fill(true);
        }
    }

    /// Sets every event's score.
    pub fn set_scores(&mut self, score: f64) {
        for region in self.regions_mut() {
            region.scores.fill(score);
        }
    }

    /// Sets per-event scores of one class, in region order.
    pub fn set_event_scores(&mut self, label: Label, scores: &[f64]) -> Result<()> {
        let region = match label {
            Label::Signal => &mut self.signal,
            Label::Background => &mut self.background,
        };
        if scores.len() != region.len() || scores.iter().any(|s| !s.is_finite()) {
            return Err(invalid("scores must be finite, one per event"));
        }
        region.scores.copy_from_slice(scores);
        Ok(())
    }

    pub fn set_user_weights(&mut self, label: Label, weights: &[f64]) -> Result<()> {
        let region = match label {
            Label::Signal => &mut self.signal,
            Label::Background => &mut self.background,
        };
        if weights.len() != region.len() || weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("user weights must be finite, one per event"));
        }
        region.user_weights.copy_from_slice(weights);
        Ok(())
    }

    /// Recomputes residuals and boost weights of all events from their scores.
    pub fn refresh_boost_weights(&mut self) {
        for region in self.regions_mut() {
            region.refresh_boost_weights();
        }
    }

    /// Returns every event to the root before fitting a new tree.
    pub(crate) fn reset_nodes(&mut self) {
        for region in self.regions_mut() {
            region.node_index.fill(0);
            region.parked.fill(false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binnings(d: usize) -> Vec<FeatureBinning> {
        (0..d)
            .map(|_| FeatureBinning::from_boundaries(2, vec![3.0, 5.0, 7.0]).unwrap())
            .collect()
    }

    #[test]
    fn regions_are_record_major() {
        let ds = Dataset::from_rows(
            &[vec![1.0, 4.0], vec![6.0, 8.0], vec![f64::NAN, 2.0]],
            &[Label::Signal, Label::Background, Label::Signal],
        )
        .unwrap();
        let s = BinnedEventSample::build(&ds, &binnings(2)).unwrap();
        assert_eq!(s.signal().bins(), &[1, 2, 0, 1]);
        assert_eq!(s.background().bins(), &[3, 4]);
        assert_eq!(s.signal().source_rows(), &[0, 2]);
        assert_eq!(s.signal().boost_weights(), &[1.0, 1.0]);
        assert_eq!(s.background().residuals(), &[-1.0]);
        assert!(s.signal().active().iter().all(|&a| a));
    }

    #[test]
    fn negative_weights_are_kept() {
        let ds = Dataset::from_rows(&[vec![1.0], vec![2.0]], &[Label::Signal, Label::Background])
            .unwrap()
            .with_weights(vec![-0.5, 1.0])
            .unwrap();
        let s = BinnedEventSample::build(&ds, &binnings(1)).unwrap();
        assert_eq!(s.signal().user_weights(), &[-0.5]);
    }

    #[test]
    fn build_errors() {
        let ds = Dataset::from_rows(&[vec![1.0, 2.0]], &[Label::Signal]).unwrap();
        assert!(BinnedEventSample::build(&ds, &binnings(1)).is_err());
        let ds = ds.with_weights(vec![f64::NAN]).unwrap();
        assert!(BinnedEventSample::build(&ds, &binnings(2)).is_err());
    }

    fn big_sample(n_sig: usize, n_bkg: usize) -> BinnedEventSample {
        let rows: Vec<Vec<f64>> = (0..n_sig + n_bkg).map(|i| vec![i as f64]).collect();
        let labels: Vec<Label> = (0..n_sig + n_bkg)
            .map(|i| Label::from_signal(i < n_sig))
            .collect();
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        BinnedEventSample::build(&ds, &binnings(1)).unwrap()
    }

    #[test]
    fn subsample_counts() {
        let mut s = big_sample(1000, 301);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        s.subsample(0.5, &mut rng).unwrap();
        assert_eq!(s.signal().n_active(), 500);
        assert_eq!(s.background().n_active(), 150);
        s.subsample(1.0, &mut rng).unwrap();
        assert_eq!(s.signal().n_active(), 1000);
        assert_eq!(s.background().n_active(), 301);
        assert!(s.subsample(0.0, &mut rng).is_err());
        assert!(s.subsample(1.5, &mut rng).is_err());
        assert!(s.subsample(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn subsample_is_deterministic() {
        let mut a = big_sample(200, 200);
        let mut b = big_sample(200, 200);
        a.subsample(0.3, &mut ChaCha8Rng::seed_from_u64(11))
            .unwrap();
        b.subsample(0.3, &mut ChaCha8Rng::seed_from_u64(11))
            .unwrap();
        assert_eq!(a.signal().active(), b.signal().active());
        assert_eq!(a.background().active(), b.background().active());
        let mut c = big_sample(200, 200);
        c.subsample(0.3, &mut ChaCha8Rng::seed_from_u64(12))
            .unwrap();
        assert_ne!(a.signal().active(), c.signal().active());
    }

    proptest::proptest! {
        #[test]
        fn stratified_counts(n_sig in 1usize..300, n_bkg in 1usize..300, rate in 0.01f64..=1.0, seed in 0u64..1000) {
            let mut s = big_sample(n_sig, n_bkg);
            s.subsample(rate, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            proptest::prop_assert_eq!(s.signal().n_active(), (rate * n_sig as f64).floor() as usize);
            proptest::prop_assert_eq!(s.background().n_active(), (rate * n_bkg as f64).floor() as usize);
        }
    }
}
