//! Layer-wise fitting of a single decision tree.
//!
//! Nodes are heap-indexed: the root is node `0` and the children of node `i`
//! are `2i + 1` (left) and `2i + 2` (right). Layer `l` (1-based) holds nodes
//! `2^(l-1) - 1 .. 2^l - 1`. A tree of depth `D` has `2^D - 1` cut nodes and
//! `2^(D+1) - 1` nodes in total, each carrying a boost weight.
//!
//! Every layer is fitted with one linear pass over the sample: each active
//! event adds its effective weight to the histogram of its current node for
//! every feature at once. The histograms are then prefix-summed over bins and
//! scanned for the cut with the highest separation gain.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::binning::{BinIndex, FeatureBinning, MISSING_BIN};
use crate::data::Label;
use crate::error::{invalid, Result};
use crate::gbdt::boost_weight_of_event;
use crate::sample::{BinnedEventSample, ClassRegion};

/// Deepest tree the fitter accepts.
pub const MAX_DEPTH: usize = 16;

/// Denominators below this magnitude yield a zero node weight.
const WEIGHT_EPSILON: f64 = 1e-12;

/// Node indices of a 1-based layer.
pub fn layer_nodes(layer: usize) -> Range<usize> {
    ((1usize << (layer - 1)) - 1)..((1usize << layer) - 1)
}

/// Best cut of a node in bin space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinCut {
    pub feature: usize,
    pub cut_bin: BinIndex,
    pub gain: f64,
}

impl BinCut {
    pub fn with_threshold(self, binning: &FeatureBinning) -> Result<Cut> {
        Ok(Cut {
            feature: self.feature,
            cut_bin: self.cut_bin,
            threshold: binning.threshold(self.cut_bin)?,
            gain: self.gain,
        })
    }
}

/// A fitted cut: events go left iff `value < threshold` (equivalently
/// `bin <= cut_bin`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub feature: usize,
    pub cut_bin: BinIndex,
    pub threshold: f64,
    pub gain: f64,
}

/// Separation gain of splitting `(sL + sR, bL + bR)` into two children.
///
/// Uses `G(s, b) = s^2 / (s + b)`, taken as zero whenever `s + b <= 0`.
#[inline]
pub fn separation_gain(s_left: f64, b_left: f64, s_right: f64, b_right: f64) -> f64 {
    #[inline]
    fn g(s: f64, b: f64) -> f64 {
        let t = s + b;
        if t > 0.0 {
            s * s / t
        } else {
            0.0
        }
    }
    g(s_left, b_left) + g(s_right, b_right) - g(s_left + s_right, b_left + b_right)
}

/// Signal and background histograms of every node of one layer.
///
/// For each `(node, feature)` pair the stored slice has `B + 1` entries:
/// entry `0` is the weight of events whose value is missing, entries
/// `1..=B` are cumulative sums over bins `1..=b`.
#[derive(Debug, Clone)]
pub struct CumulativeHistogramSet {
    layer: usize,
    n_nodes: usize,
    n_bins: Vec<usize>,
    offsets: Vec<usize>,
    stride: usize,
    signal: Vec<f64>,
    background: Vec<f64>,
}

impl CumulativeHistogramSet {
    fn zeroed(layer: usize, n_bins: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(n_bins.len());
        let mut stride = 0;
        for &b in n_bins {
            offsets.push(stride);
            stride += b + 1;
        }
        let n_nodes = layer_nodes(layer).len();
        // one extra block absorbs inactive and parked events
        let len = (n_nodes + 1) * stride;
        Self {
            layer,
            n_nodes,
            n_bins: n_bins.to_vec(),
            offsets,
            stride,
            signal: vec![0.0; len],
            background: vec![0.0; len],
        }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Number of nodes in the layer; `slot` arguments index into them.
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_bins.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.n_bins[feature]
    }

    fn range(&self, slot: usize, feature: usize) -> Range<usize> {
        assert!(slot < self.n_nodes, "slot {slot} outside layer");
        let start = slot * self.stride + self.offsets[feature];
        start..start + self.n_bins[feature] + 1
    }

    pub fn signal(&self, slot: usize, feature: usize) -> &[f64] {
        &self.signal[self.range(slot, feature)]
    }

    pub fn background(&self, slot: usize, feature: usize) -> &[f64] {
        &self.background[self.range(slot, feature)]
    }

    pub fn histogram(&self, label: Label, slot: usize, feature: usize) -> &[f64] {
        match label {
            Label::Signal => self.signal(slot, feature),
            Label::Background => self.background(slot, feature),
        }
    }

    /// Signal and background totals of non-missing events.
    pub fn totals(&self, slot: usize, feature: usize) -> (f64, f64) {
        let b = self.n_bins[feature];
        (
            self.signal(slot, feature)[b],
            self.background(slot, feature)[b],
        )
    }

    fn prefix_sum(&mut self) {
        for slot in 0..self.n_nodes {
            for f in 0..self.n_bins.len() {
                let r = self.range(slot, f);
                for hist in [&mut self.signal, &mut self.background] {
                    let mut acc = 0.0;
                    for v in &mut hist[r.start + 1..r.end] {
                        acc += *v;
                        *v = acc;
                    }
                }
            }
        }
    }
}

/// Builds the cumulative histograms of `layer` in one pass over the sample.
pub fn accumulate_layer_histograms(
    sample: &BinnedEventSample,
    layer: usize,
) -> CumulativeHistogramSet {
    accumulate_layer_histograms_traced(sample, layer, |_, _| {})
}

/// As [`accumulate_layer_histograms`], reporting every event read as
/// `(class, position in region)` to `trace`.
pub fn accumulate_layer_histograms_traced(
    sample: &BinnedEventSample,
    layer: usize,
    mut trace: impl FnMut(Label, usize),
) -> CumulativeHistogramSet {
    let mut hists = CumulativeHistogramSet::zeroed(layer, sample.n_bins());
    let first = layer_nodes(layer).start as u32;
    let (sink, stride) = (hists.n_nodes, hists.stride);
    fill(
        &mut hists.signal,
        sample.signal(),
        first,
        sink,
        stride,
        &hists.offsets,
        &mut trace,
    );
    fill(
        &mut hists.background,
        sample.background(),
        first,
        sink,
        stride,
        &hists.offsets,
        &mut trace,
    );
    hists.prefix_sum();
    hists
}

fn fill(
    hist: &mut [f64],
    region: &ClassRegion,
    first: u32,
    sink: usize,
    stride: usize,
    offsets: &[usize],
    trace: &mut impl FnMut(Label, usize),
) {
    let d = offsets.len();
    let label = region.label();
    let events = region
        .bins
        .chunks_exact(d)
        .zip(&region.node_index)
        .zip(region.active.iter().zip(&region.parked))
        .zip(region.user_weights.iter().zip(&region.boost_weights));
    for (e, (((record, &node), (&active, &parked)), (&user, &boost))) in events.enumerate() {
        trace(label, e);
        // events outside this layer land in the sink too
        let rel = node.wrapping_sub(first) as usize;
        let slot = if active & !parked & (rel < sink) {
            rel
        } else {
            sink
        };
        let weight = user * boost;
        let block = &mut hist[slot * stride..(slot + 1) * stride];
        for (&bin, &offset) in record.iter().zip(offsets) {
            block[offset + bin as usize] += weight;
        }
    }
}

/// Picks the cut with the largest separation gain for every node of the layer.
///
/// Only cuts leaving a positive effective weight on both sides are
/// considered. Ties go to the lowest feature, then the lowest bin. Nodes
/// without a cut of positive gain get `None`.
pub fn find_best_cuts(hists: &CumulativeHistogramSet) -> Vec<Option<BinCut>> {
    (0..hists.n_nodes())
        .map(|slot| {
            let mut best: Option<BinCut> = None;
            let mut best_gain = 0.0;
            for f in 0..hists.n_features() {
                let n_bins = hists.n_bins(f);
                let sig = hists.signal(slot, f);
                let bkg = hists.background(slot, f);
                let (s_total, b_total) = (sig[n_bins], bkg[n_bins]);
                for cut in 1..n_bins {
                    let (s_left, b_left) = (sig[cut], bkg[cut]);
                    let (s_right, b_right) = (s_total - s_left, b_total - b_left);
                    if s_left + b_left <= 0.0 || s_right + b_right <= 0.0 {
                        continue;
                    }
                    let gain = separation_gain(s_left, b_left, s_right, b_right);
                    if gain > best_gain {
                        best_gain = gain;
                        best = Some(BinCut {
                            feature: f,
                            cut_bin: cut as BinIndex,
                            gain,
                        });
                    }
                }
            }
            best
        })
        .collect()
}

/// Moves every active event of `layer` to the child selected by its node's
/// cut. Events stay parked at their node when the node has no cut or the
/// cut feature is missing.
pub fn advance_node_indices(sample: &mut BinnedEventSample, cuts: &[Option<BinCut>], layer: usize) {
    let first = layer_nodes(layer).start as u32;
    let d = sample.n_features();
    for region in sample.regions_mut() {
        let events = region
            .bins
            .chunks_exact(d)
            .zip(&mut region.node_index)
            .zip(region.parked.iter_mut().zip(&region.active));
        for ((record, node), (parked, &active)) in events {
            if !active || *parked {
                continue;
            }
            match cuts[(*node - first) as usize] {
                Some(cut) if record[cut.feature] != MISSING_BIN => {
                    let right = record[cut.feature] > cut.cut_bin;
                    *node = 2 * *node + 1 + right as u32;
                }
                _ => *parked = true,
            }
        }
    }
}

/// A fitted decision tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    depth: usize,
    cuts: Vec<Option<Cut>>,
    node_weights: Vec<f64>,
    node_purities: Vec<f64>,
}

impl Tree {
    /// Assembles a tree, checking the heap sizes for `depth`.
    pub fn from_parts(
        depth: usize,
        cuts: Vec<Option<Cut>>,
        node_weights: Vec<f64>,
        node_purities: Vec<f64>,
    ) -> Result<Self> {
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(invalid(format!(
                "tree depth must be in [1, {MAX_DEPTH}], got {depth}"
            )));
        }
        let n_cuts = (1usize << depth) - 1;
        let n_nodes = (1usize << (depth + 1)) - 1;
        if cuts.len() != n_cuts || node_weights.len() != n_nodes || node_purities.len() != n_nodes {
            return Err(invalid(format!(
                "depth {depth} tree needs {n_cuts} cuts and {n_nodes} node weights"
            )));
        }
        if node_weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("node weights must be finite"));
        }
        Ok(Self {
            depth,
            cuts,
            node_weights,
            node_purities,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Cuts of the internal nodes `0 .. 2^D - 1`.
    pub fn cuts(&self) -> &[Option<Cut>] {
        &self.cuts
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weights
    }

    pub fn node_purities(&self) -> &[f64] {
        &self.node_purities
    }

    pub fn n_nodes(&self) -> usize {
        self.node_weights.len()
    }

    /// Node at which `x` stops: a terminal node, a node without a cut, or a
    /// node whose cut feature is NaN in `x`.
    #[inline]
    pub fn node_for(&self, x: &[f64]) -> usize {
        let mut node = 0;
        while let Some(Some(cut)) = self.cuts.get(node) {
            let v = x[cut.feature];
            if v.is_nan() {
                break;
            }
            node = 2 * node + 1 + usize::from(v >= cut.threshold);
        }
        node
    }

    /// Same as [`Tree::node_for`] on binned values.
    #[inline]
    pub fn node_for_bins(&self, bins: &[BinIndex]) -> usize {
        let mut node = 0;
        while let Some(Some(cut)) = self.cuts.get(node) {
            let b = bins[cut.feature];
            if b == MISSING_BIN {
                break;
            }
            node = 2 * node + 1 + usize::from(b > cut.cut_bin);
        }
        node
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        self.node_weights[self.node_for(x)]
    }

    /// Cuts traversed by `x` on its way down.
    pub fn path(&self, x: &[f64]) -> Vec<&Cut> {
        let mut out = Vec::with_capacity(self.depth);
        let mut node = 0;
        while let Some(Some(cut)) = self.cuts.get(node) {
            let v = x[cut.feature];
            if v.is_nan() {
                break;
            }
            out.push(cut);
            node = 2 * node + 1 + usize::from(v >= cut.threshold);
        }
        out
    }

    pub(crate) fn scale_weights(&mut self, factor: f64) {
        for w in &mut self.node_weights {
            *w *= factor;
        }
    }
}

/// Fits a tree of the given depth on the active events of `sample`.
///
/// Node weights use the events' residuals; purities are the signal fraction
/// of effective weight. Both are computed for every node from the active
/// events that reached it.
pub fn fit_tree(
    sample: &mut BinnedEventSample,
    depth: usize,
    binnings: &[FeatureBinning],
) -> Result<Tree> {
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(invalid(format!(
            "tree depth must be in [1, {MAX_DEPTH}], got {depth}"
        )));
    }
    if binnings.len() != sample.n_features() {
        return Err(invalid(format!(
            "{} binnings for {} features",
            binnings.len(),
            sample.n_features()
        )));
    }
    sample.reset_nodes();
    let mut cuts = vec![None; (1usize << depth) - 1];
    for layer in 1..=depth {
        let hists = accumulate_layer_histograms(sample, layer);
        let best = find_best_cuts(&hists);
        advance_node_indices(sample, &best, layer);
        for (node, cut) in layer_nodes(layer).zip(&best) {
            cuts[node] = cut
                .map(|c| c.with_threshold(&binnings[c.feature]))
                .transpose()?;
        }
    }

    let n_nodes = (1usize << (depth + 1)) - 1;
    let mut stats = vec![NodeStats::default(); n_nodes];
    for region in sample.regions() {
        let is_signal = region.label().is_signal();
        for i in 0..region.len() {
            if region.active[i] {
                stats[region.node_index[i] as usize].add(region, i, is_signal);
            }
        }
    }
    for node in (0..(1usize << depth) - 1).rev() {
        let (l, r) = (stats[2 * node + 1], stats[2 * node + 2]);
        stats[node].merge(&l);
        stats[node].merge(&r);
    }
    let node_weights = stats.iter().map(NodeStats::weight).collect();
    let node_purities = stats.iter().map(NodeStats::purity).collect();
    Tree::from_parts(depth, cuts, node_weights, node_purities)
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeStats {
    // sum of u * r
    numerator: f64,
    // sum of u * |r| * (2 - |r|)
    denominator: f64,
    signal_weight: f64,
    total_weight: f64,
}

impl NodeStats {
    fn add(&mut self, region: &ClassRegion, i: usize, is_signal: bool) {
        let u = region.user_weights[i];
        let r = region.residuals[i];
        self.numerator += u * r;
        self.denominator += u * boost_weight_of_event(r);
        let w = region.effective_weight(i);
        self.total_weight += w;
        if is_signal {
            self.signal_weight += w;
        }
    }

    fn merge(&mut self, other: &NodeStats) {
        self.numerator += other.numerator;
        self.denominator += other.denominator;
        self.signal_weight += other.signal_weight;
        self.total_weight += other.total_weight;
    }

    fn weight(&self) -> f64 {
        if self.denominator.abs() < WEIGHT_EPSILON {
            0.0
        } else {
            self.numerator / self.denominator
        }
    }

    fn purity(&self) -> f64 {
        if self.total_weight > 0.0 {
            self.signal_weight / self.total_weight
        } else {
            0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    fn identity_binning(levels: u32) -> FeatureBinning {
        // boundaries 1.5, 2.5, ... so that value k maps to bin k
        let b = 1usize << levels;
        FeatureBinning::from_boundaries(levels, (1..b).map(|k| k as f64 + 0.5).collect()).unwrap()
    }

    fn sample(
        rows: &[Vec<f64>],
        labels: &[Label],
        levels: u32,
    ) -> (BinnedEventSample, Vec<FeatureBinning>) {
        let ds = Dataset::from_rows(rows, labels).unwrap();
        let binnings = vec![identity_binning(levels); ds.n_features()];
        (BinnedEventSample::build(&ds, &binnings).unwrap(), binnings)
    }

    #[test]
    fn gain_examples() {
        assert_eq!(separation_gain(3.0, 1.0, 1.0, 3.0), 0.5);
        assert_eq!(separation_gain(2.0, 2.0, 2.0, 2.0), 0.0);
        assert_eq!(separation_gain(4.0, 0.0, 0.0, 4.0), 2.0);
        // guarded sides
        assert_eq!(separation_gain(0.0, 0.0, 0.0, 0.0), 0.0);
        assert!(separation_gain(-1.0, -1.0, 2.0, 1.0).is_finite());
    }

    #[test]
    fn layer_ranges() {
        assert_eq!(layer_nodes(1), 0..1);
        assert_eq!(layer_nodes(2), 1..3);
        assert_eq!(layer_nodes(3), 3..7);
    }

    #[test]
    fn single_event_histogram() {
        let ds = Dataset::from_rows(&[vec![3.0]], &[Label::Signal])
            .unwrap()
            .with_weights(vec![2.0])
            .unwrap();
        let binnings = vec![identity_binning(3)];
        let s = BinnedEventSample::build(&ds, &binnings).unwrap();
        let h = accumulate_layer_histograms(&s, 1);
        assert_eq!(
            &h.signal(0, 0)[1..],
            &[0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0]
        );
        assert!(h.background(0, 0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_bin_only_skips_that_feature() {
        let (s, _) = sample(&[vec![f64::NAN, 2.0]], &[Label::Signal], 2);
        let h = accumulate_layer_histograms(&s, 1);
        assert_eq!(h.signal(0, 0), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(h.signal(0, 1), &[0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(h.totals(0, 0), (0.0, 0.0));
    }

    #[test]
    fn events_in_different_nodes_share_a_pass() {
        let (mut s, _) = sample(
            &[vec![1.0, 3.0], vec![4.0, 2.0]],
            &[Label::Signal, Label::Signal],
            2,
        );
        advance_node_indices(
            &mut s,
            &[Some(BinCut {
                feature: 0,
                cut_bin: 2,
                gain: 1.0,
            })],
            1,
        );
        assert_eq!(s.signal().node_index(), &[1, 2]);
        let h = accumulate_layer_histograms(&s, 2);
        assert_eq!(&h.signal(0, 1)[1..], &[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(&h.signal(1, 1)[1..], &[0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn access_is_linear_and_single_pass() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 4 + 1) as f64, 1.0]).collect();
        let labels: Vec<Label> = (0..20).map(|i| Label::from_signal(i % 3 == 0)).collect();
        let (mut s, b) = sample(&rows, &labels, 2);
        fit_tree(&mut s, 1, &b).unwrap();
        let mut seen = Vec::new();
        accumulate_layer_histograms_traced(&s, 2, |l, e| seen.push((l, e)));
        let n_sig = s.signal().len();
        let expected: Vec<(Label, usize)> = (0..n_sig)
            .map(|e| (Label::Signal, e))
            .chain((0..s.background().len()).map(|e| (Label::Background, e)))
            .collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn xor_has_no_profitable_cut() {
        let (s, _) = sample(
            &[
                vec![2.0, 2.0],
                vec![2.0, 1.0],
                vec![1.0, 2.0],
                vec![1.0, 1.0],
            ],
            &[
                Label::Background,
                Label::Signal,
                Label::Signal,
                Label::Background,
            ],
            1,
        );
        let cuts = find_best_cuts(&accumulate_layer_histograms(&s, 1));
        assert_eq!(cuts, vec![None]);
    }

    #[test]
    fn perfect_separation() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 2.0, 3.0, 4.0, 4.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let labels = [
            Label::Signal,
            Label::Signal,
            Label::Signal,
            Label::Background,
            Label::Background,
            Label::Background,
        ];
        let (s, _) = sample(&rows, &labels, 3);
        let cuts = find_best_cuts(&accumulate_layer_histograms(&s, 1));
        // brute force over every bin
        let mut best = (0, f64::MIN);
        for cut in 1..8u16 {
            let sl = rows
                .iter()
                .zip(&labels)
                .filter(|(r, l)| l.is_signal() && r[0] as u16 <= cut)
                .count() as f64;
            let bl = rows
                .iter()
                .zip(&labels)
                .filter(|(r, l)| !l.is_signal() && r[0] as u16 <= cut)
                .count() as f64;
            if sl + bl == 0.0 || sl + bl == 6.0 {
                continue;
            }
            let g = separation_gain(sl, bl, 3.0 - sl, 3.0 - bl);
            if g > best.1 {
                best = (cut, g);
            }
        }
        assert_eq!(best.0, 2);
        assert_eq!(
            cuts,
            vec![Some(BinCut {
                feature: 0,
                cut_bin: 2,
                gain: best.1
            })]
        );
    }

    #[test]
    fn tie_goes_to_lowest_feature() {
        let rows = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let (s, _) = sample(&rows, &[Label::Signal, Label::Background], 1);
        let cuts = find_best_cuts(&accumulate_layer_histograms(&s, 1));
        assert_eq!(cuts[0].unwrap().feature, 0);
    }

    #[test]
    fn advance_rules() {
        let (mut s, _) = sample(
            &[vec![1.0], vec![3.0], vec![f64::NAN]],
            &[Label::Signal, Label::Signal, Label::Signal],
            2,
        );
        advance_node_indices(
            &mut s,
            &[Some(BinCut {
                feature: 0,
                cut_bin: 2,
                gain: 1.0,
            })],
            1,
        );
        assert_eq!(s.signal().node_index(), &[1, 2, 0]);
        assert_eq!(s.signal().parked(), &[false, false, true]);
        advance_node_indices(
            &mut s,
            &[
                None,
                Some(BinCut {
                    feature: 0,
                    cut_bin: 3,
                    gain: 1.0,
                }),
            ],
            2,
        );
        assert_eq!(s.signal().node_index(), &[1, 5, 0]);
        assert_eq!(s.signal().parked(), &[true, false, true]);
    }

    #[test]
    fn depth_one_purities() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 4.0].iter().map(|&v| vec![v]).collect();
        let labels = [
            Label::Signal,
            Label::Signal,
            Label::Background,
            Label::Background,
        ];
        let (mut s, b) = sample(&rows, &labels, 2);
        let tree = fit_tree(&mut s, 1, &b).unwrap();
        let cut = tree.cuts()[0].unwrap();
        assert_eq!((cut.feature, cut.cut_bin, cut.threshold), (0, 2, 2.5));
        assert_eq!(tree.node_purities(), &[0.5, 1.0, 0.0]);
        assert_eq!(tree.node_weights(), &[0.0, 1.0, -1.0]);
    }

    #[test]
    fn zero_weights_give_an_empty_tree() {
        let ds = Dataset::from_rows(&[vec![1.0], vec![2.0]], &[Label::Signal, Label::Background])
            .unwrap()
            .with_weights(vec![0.0, 0.0])
            .unwrap();
        let b = vec![identity_binning(2)];
        let mut s = BinnedEventSample::build(&ds, &b).unwrap();
        let tree = fit_tree(&mut s, 2, &b).unwrap();
        assert!(tree.cuts().iter().all(Option::is_none));
        assert!(tree.node_weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn figure_one_traversal() {
        let cut = |feature, threshold| {
            Some(Cut {
                feature,
                cut_bin: 1,
                threshold,
                gain: 1.0,
            })
        };
        // x = 0, y = 1, z = 2
        let cuts = vec![
            cut(0, 3.0),
            cut(1, 1.0),
            cut(2, 4.0),
            cut(0, 1.0),
            cut(2, 5.0),
            cut(0, 9.0),
            cut(1, 2.0),
        ];
        let mut weights = vec![0.0; 7];
        weights.extend([0.1, 0.2, 0.3, 0.8, 0.4, 0.7, 0.5, 0.9]);
        let tree = Tree::from_parts(3, cuts, weights, vec![0.5; 15]).unwrap();
        assert_eq!(tree.node_for(&[2.0, 0.0, 6.0]), 8);
        assert_eq!(tree.value(&[2.0, 0.0, 6.0]), 0.2);
        assert_eq!(tree.path(&[2.0, 0.0, 6.0]).len(), 3);
        assert_eq!(tree.node_for(&[f64::NAN, 0.0, 6.0]), 0);
        assert_eq!(tree.node_for(&[2.0, f64::NAN, 6.0]), 1);
    }

    #[test]
    fn from_parts_checks_sizes() {
        assert!(Tree::from_parts(1, vec![None], vec![0.0; 3], vec![0.5; 3]).is_ok());
        assert!(Tree::from_parts(1, vec![None, None], vec![0.0; 3], vec![0.5; 3]).is_err());
        assert!(Tree::from_parts(0, vec![], vec![0.0], vec![0.5]).is_err());
        assert!(Tree::from_parts(1, vec![None], vec![f64::NAN, 0.0, 0.0], vec![0.5; 3]).is_err());
    }
}
