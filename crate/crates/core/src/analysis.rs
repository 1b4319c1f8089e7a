//! ROC AUC and feature importance.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Label};
use crate::error::{invalid, Error, Result};
use crate::gbdt::{fit_forest, FitConfig, Forest};

/// Weighted rank-based area under the ROC curve: the probability that a
/// signal event outscores a background event, counting ties as one half.
pub fn roc_auc(scores: &[f64], labels: &[Label], weights: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() || scores.len() != weights.len() {
        return Err(invalid("scores, labels and weights must have equal length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(invalid("scores must not be NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let (mut below_bkg, mut total_sig, mut area) = (0.0, 0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let (mut sig, mut bkg) = (0.0, 0.0);
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            let k = order[j];
            match labels[k] {
                Label::Signal => sig += weights[k],
                Label::Background => bkg += weights[k],
            }
            j += 1;
        }
        area += sig * (below_bkg + 0.5 * bkg);
        below_bkg += bkg;
        total_sig += sig;
        i = j;
    }
    if total_sig <= 0.0 || below_bkg <= 0.0 {
        return Err(Error::Data(
            "AUC needs signal and background events with positive total weight".into(),
        ));
    }
    Ok(area / (total_sig * below_bkg))
}

/// AUC of a forest on a labelled dataset.
pub fn forest_auc(forest: &Forest, data: &Dataset) -> Result<f64> {
    let p = forest.predict_dataset(data, 1)?;
    roc_auc(&p, data.labels(), data.weights())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImportanceMethod {
    Gain,
    Individual,
    Elimination,
}

/// One round of recursive elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRound {
    /// Features present at the start of the round.
    pub remaining: Vec<usize>,
    /// Validation AUC of the forest using all remaining features.
    pub baseline_auc: f64,
    /// `(feature, AUC drop when it is left out)` for every remaining feature.
    pub drops: Vec<(usize, f64)>,
    pub removed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationTrace {
    pub removal_order: Vec<usize>,
    pub rounds: Vec<EliminationRound>,
    /// AUC of the single-feature forest left at the end.
    pub final_auc: f64,
    pub fits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub method: ImportanceMethod,
    pub feature_names: Vec<String>,
    /// One score per feature, in feature order.
    pub scores: Vec<f64>,
    pub elimination: Option<EliminationTrace>,
}

/// Sum of separation gains of every cut, per feature.
pub fn gain_importance(forest: &Forest) -> ImportanceReport {
    let mut scores = vec![0.0; forest.n_features()];
    for cut in forest
        .trees()
        .iter()
        .flat_map(|t| t.cuts().iter().flatten())
    {
        scores[cut.feature] += cut.gain;
    }
    ImportanceReport {
        method: ImportanceMethod::Gain,
        feature_names: forest.feature_names().to_vec(),
        scores,
        elimination: None,
    }
}

/// Sum of separation gains along the path of one event through every tree.
pub fn individual_importance(forest: &Forest, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != forest.n_features() {
        return Err(invalid(format!(
            "expected {} features, got {}",
            forest.n_features(),
            x.len()
        )));
    }
    let mut scores = vec![0.0; forest.n_features()];
    for tree in forest.trees() {
        for cut in tree.path(x) {
            scores[cut.feature] += cut.gain;
        }
    }
    Ok(scores)
}

/// Seeded 50/50 split into (training, validation) rows.
pub fn split_halves(data: &Dataset, seed: u64) -> (Dataset, Dataset) {
    let mut idx: Vec<usize> = (0..data.n_rows()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let half = idx.len() / 2;
    let (train, valid) = idx.split_at(half);
    (data.select_rows(train), data.select_rows(valid))
}

/// Recursive feature elimination on a seeded 50/50 split of `data`.
pub fn elimination_importance(data: &Dataset, config: &FitConfig) -> Result<ImportanceReport> {
    let (train, valid) = split_halves(data, config.seed);
    elimination_importance_split(&train, &valid, config)
}

/// Recursive feature elimination with an explicit validation set.
///
/// A forest on all features is fitted first. Each round then fits one forest
/// per remaining feature with that feature left out and removes the feature
/// whose absence lowers the validation AUC the most; its score is that drop.
/// The forest without the removed feature becomes the next round's baseline,
/// so `N` features cost `1 + N + (N-1) + ... + 2 = N(N+1)/2` fits. The last
/// feature standing scores its single-feature AUC minus one half.
///
/// Fit `k` (0-based) uses seed `config.seed + k`.
pub fn elimination_importance_split(
    train: &Dataset,
    valid: &Dataset,
    config: &FitConfig,
) -> Result<ImportanceReport> {
    let d = train.n_features();
    if d < 2 {
        return Err(invalid(
            "elimination importance needs at least two features",
        ));
    }
    if valid.n_features() != d {
        return Err(invalid("training and validation data differ in features"));
    }
    config.validate()?;

    let mut fits = 0usize;
    let mut fit_auc = |features: &[usize]| -> Result<f64> {
        let cfg = FitConfig {
            seed: config.seed.wrapping_add(fits as u64),
            ..*config
        };
        fits += 1;
        let forest = fit_forest(&train.select_features(features)?, &cfg)?;
        forest_auc(&forest, &valid.select_features(features)?)
    };

    let mut scores = vec![0.0; d];
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut baseline = fit_auc(&remaining)?;
    let mut rounds = Vec::new();
    let mut order = Vec::new();
    while remaining.len() > 1 {
        let mut drops = Vec::with_capacity(remaining.len());
        let mut best: Option<(usize, f64, f64)> = None;
        for (pos, &f) in remaining.iter().enumerate() {
            let subset: Vec<usize> = remaining.iter().copied().filter(|&g| g != f).collect();
            let auc = fit_auc(&subset)?;
            let drop = baseline - auc;
            drops.push((f, drop));
            if best.is_none_or(|(_, d, _)| drop > d) {
                best = Some((pos, drop, auc));
            }
        }
        let (pos, drop, auc) = best.expect("at least two features remain");
        let removed = remaining[pos];
        scores[removed] = drop;
        rounds.push(EliminationRound {
            remaining: remaining.clone(),
            baseline_auc: baseline,
            drops,
            removed,
        });
        order.push(removed);
        remaining.remove(pos);
        baseline = auc;
    }
    let last = remaining[0];
    scores[last] = baseline - 0.5;
    order.push(last);

    Ok(ImportanceReport {
        method: ImportanceMethod::Elimination,
        feature_names: train.feature_names().to_vec(),
        scores,
        elimination: Some(EliminationTrace {
            removal_order: order,
            rounds,
            final_auc: baseline,
            fits,
        }),
    })
}
