//! Stochastic gradient boosting with the binomial log-likelihood loss.
//!
//! Labels are `y = +1` (signal) and `y = -1` (background). The model score is
//! `F(x) = F0 + sum of tree outputs` and the signal probability is
//! `p(x) = 1 / (1 + exp(-2 F(x)))`.
//!
//! Each boosting step recomputes the residual `r = 2y / (1 + exp(2yF))` of
//! every event, reweights the sample by `|r| (2 - |r|)`, draws a stratified
//! subsample without replacement and fits one tree on it. Node outputs
//! `sum(u r) / sum(u |r| (2 - |r|))` are scaled by the shrinkage before the
//! tree is stored, so applying the forest is a plain sum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{FeatureBinning, DEFAULT_BINNING_LEVELS, MAX_BINNING_LEVELS};
use crate::data::{default_feature_names, Dataset, Label};
use crate::error::{invalid, Error, Result};
use crate::sample::BinnedEventSample;
use crate::tree::{fit_tree, Tree, MAX_DEPTH};

/// Hyper-parameters of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_trees: usize,
    pub depth: usize,
    pub shrinkage: f64,
    pub subsample: f64,
    pub binning_levels: u32,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            depth: 3,
            shrinkage: 0.1,
            subsample: 0.5,
            binning_levels: DEFAULT_BINNING_LEVELS,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(invalid("number of trees must be at least 1"));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return Err(invalid(format!("depth must be in [1, {MAX_DEPTH}]")));
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(invalid("shrinkage must be in (0, 1]"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(invalid("subsampling rate must be in (0, 1]"));
        }
        if !(1..=MAX_BINNING_LEVELS).contains(&self.binning_levels) {
            return Err(invalid(format!(
                "binning levels must be in [1, {MAX_BINNING_LEVELS}]"
            )));
        }
        Ok(())
    }
}

/// `F0 = ln(W_s / W_b) / 2` over user weights; `0` unless both sums are positive.
pub fn prior(sample: &BinnedEventSample) -> f64 {
    let ws: f64 = sample.signal().user_weights().iter().sum();
    let wb: f64 = sample.background().user_weights().iter().sum();
    if ws <= 0.0 || wb <= 0.0 {
        return 0.0;
    }
    0.5 * (ws.ln() - wb.ln())
}

/// Negative gradient of the binomial log-likelihood for label `y = +-1`.
#[inline]
pub fn residual(y: f64, score: f64) -> f64 {
    2.0 * y / (1.0 + (2.0 * y * score).exp())
}

/// Event weight `|r| (2 - |r|)` used when fitting the next tree.
#[inline]
pub fn boost_weight_of_event(r: f64) -> f64 {
    let a = r.abs();
    a * (2.0 - a)
}

/// Newton step `sum(u r) / sum(u |r| (2 - |r|))`, or `0` for a vanishing
/// denominator.
pub fn leaf_weight(residuals: &[f64], user_weights: &[f64]) -> f64 {
    let (num, den) = residuals
        .iter()
        .zip(user_weights)
        .fold((0.0, 0.0), |(n, d), (&r, &u)| {
            (n + u * r, d + u * boost_weight_of_event(r))
        });
    if den.abs() < 1e-12 {
        0.0
    } else {
        num / den
    }
}

#[inline]
pub fn sigmoid_probability(score: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * score).exp())
}

/// Positional decimal with 17 significant digits, enough to recover the
/// exact `f64`. `0.5` becomes `0.50000000000000000`.
pub fn format_probability(p: f64) -> String {
    if !p.is_finite() {
        return p.to_string();
    }
    let sci = format!("{:.16e}", p.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if p.is_sign_negative() && p != 0.0 {
        "-"
    } else {
        ""
    };
    if p == 0.0 {
        return format!("0.{}", "0".repeat(16));
    }
    if exp < 0 {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{sign}{digits}{}", "0".repeat(split - digits.len()))
        } else {
            format!("{sign}{}.{}", &digits[..split], &digits[split..])
        }
    }
}

/// A fitted boosted forest.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub(crate) config: FitConfig,
    pub(crate) f0: f64,
    pub(crate) trees: Vec<Tree>,
    pub(crate) binnings: Vec<FeatureBinning>,
    pub(crate) feature_names: Vec<String>,
}

impl Forest {
    /// Assembles a forest from parts, validating feature references.
    pub fn from_parts(
        config: FitConfig,
        f0: f64,
        trees: Vec<Tree>,
        binnings: Vec<FeatureBinning>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if binnings.is_empty() {
            return Err(invalid("forest needs at least one feature"));
        }
        if feature_names.len() != binnings.len() {
            return Err(invalid("one feature name per binning required"));
        }
        if !f0.is_finite() {
            return Err(invalid("prior score must be finite"));
        }
        let d = binnings.len();
        for (t, tree) in trees.iter().enumerate() {
            if let Some(cut) = tree.cuts().iter().flatten().find(|c| c.feature >= d) {
                return Err(invalid(format!(
                    "tree {t} cuts on feature {} but the forest has {d} features",
                    cut.feature
                )));
            }
        }
        Ok(Self {
            config,
            f0,
            trees,
            binnings,
            feature_names,
        })
    }

    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    pub fn shrinkage(&self) -> f64 {
        self.config.shrinkage
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn binnings(&self) -> &[FeatureBinning] {
        &self.binnings
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.binnings.len()
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(invalid(format!(
                "expected {} features, got {}",
                self.n_features(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Raw score `F(x)`; assumes `x` has the right length.
    #[inline]
    fn score_unchecked(&self, x: &[f64]) -> f64 {
        let mut f = self.f0;
        for tree in &self.trees {
            f += tree.value(x);
        }
        f
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        Ok(self.score_unchecked(x))
    }

    /// Signal probability of one event. Float thresholds are compared
    /// directly; no binning happens here.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.score(x).map(sigmoid_probability)
    }

    /// Probabilities for many rows, optionally on `threads` worker threads.
    /// The result does not depend on `threads`.
    pub fn predict_batch<R>(&self, rows: &[R], threads: usize) -> Result<Vec<f64>>
    where
        R: AsRef<[f64]> + Sync,
    {
        if let Some((i, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.as_ref().len() != self.n_features())
        {
            return Err(invalid(format!(
                "row {i} has {} features, expected {}",
                r.as_ref().len(),
                self.n_features()
            )));
        }
        let apply = |r: &R| sigmoid_probability(self.score_unchecked(r.as_ref()));
        if threads <= 1 || rows.len() < 2 {
            return Ok(rows.iter().map(apply).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| invalid(format!("cannot start {threads} threads: {e}")))?;
        Ok(pool.install(|| rows.par_iter().map(apply).collect()))
    }

    /// Probabilities for every row of a dataset.
    pub fn predict_dataset(&self, data: &Dataset, threads: usize) -> Result<Vec<f64>> {
        let rows: Vec<&[f64]> = data.rows().collect();
        self.predict_batch(&rows, threads)
    }
}

/// Fits a forest on `data`.
pub fn fit_forest(data: &Dataset, config: &FitConfig) -> Result<Forest> {
    config.validate()?;
    let n_signal = data.labels().iter().filter(|l| l.is_signal()).count();
    if n_signal == 0 || n_signal == data.n_rows() {
        return Err(Error::Data(
            "training data needs at least one signal and one background event".into(),
        ));
    }

    let binnings = (0..data.n_features())
        .map(
            |f| match FeatureBinning::fit(&data.column(f), config.binning_levels) {
                Err(Error::NoFiniteValues) => FeatureBinning::all_missing(config.binning_levels),
                other => other,
            },
        )
        .collect::<Result<Vec<_>>>()?;
    let mut sample = BinnedEventSample::build(data, &binnings)?;
    let f0 = prior(&sample);
    sample.set_scores(f0);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trees = Vec::with_capacity(config.n_trees);
    for _ in 0..config.n_trees {
        sample.refresh_boost_weights();
        sample.subsample(config.subsample, &mut rng)?;
        let mut tree = fit_tree(&mut sample, config.depth, &binnings)?;
        tree.scale_weights(config.shrinkage);
        update_scores(&mut sample, &tree);
        trees.push(tree);
    }

    Forest::from_parts(*config, f0, trees, binnings, data.feature_names().to_vec())
}

/// Adds the tree output to the score of every event, active or not.
fn update_scores(sample: &mut BinnedEventSample, tree: &Tree) {
    let d = sample.n_features();
    for region in sample.regions_mut() {
        for (record, score) in region.bins.chunks_exact(d).zip(&mut region.scores) {
            *score += tree.node_weights()[tree.node_for_bins(record)];
        }
    }
}

/// Fits from a row-major matrix with `0/1` labels, as handed over by
/// array-oriented callers. `weights` defaults to one per row.
pub fn fit_matrix(
    values: &[f64],
    n_rows: usize,
    n_features: usize,
    labels: &[f64],
    weights: Option<&[f64]>,
    config: &FitConfig,
) -> Result<Forest> {
    if values.len() != n_rows * n_features {
        return Err(invalid(format!(
            "feature matrix of {} values does not have shape ({n_rows}, {n_features})",
            values.len()
        )));
    }
    if labels.len() != n_rows {
        return Err(invalid(format!(
            "labels have shape ({},) but the feature matrix has {n_rows} rows",
            labels.len()
        )));
    }
    let labels = labels
        .iter()
        .map(|&y| {
            if y == 1.0 {
                Ok(Label::Signal)
            } else if y == 0.0 {
                Ok(Label::Background)
            } else {
                Err(invalid(format!("label {y} is not 0 or 1")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = match weights {
        Some(w) if w.len() != n_rows => {
            return Err(invalid(format!(
                "weights have shape ({},) but the feature matrix has {n_rows} rows",
                w.len()
            )))
        }
        Some(w) => w.to_vec(),
        None => vec![1.0; n_rows],
    };
    let data = Dataset::new(
        default_feature_names(n_features),
        values.to_vec(),
        labels,
        weights,
    )?;
    fit_forest(&data, config)
}
