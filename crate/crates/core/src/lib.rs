//! Gradient-boosted decision trees on equal-frequency binned features.
//!
//! Features are mapped to `2^L` integer bins once, before boosting. Trees are
//! grown one layer at a time from cumulative per-node histograms, and every
//! tree is fitted on a stratified random subsample of the training events.
//!
//! ```no_run
//! use cphboost::{fit_forest, load_csv, FitConfig};
//!
//! let data = load_csv("train.csv", "label", None)?;
//! let forest = fit_forest(&data, &FitConfig::default())?;
//! let p = forest.predict(data.row(0))?;
//! # Ok::<(), cphboost::Error>(())
//! ```

pub mod analysis;
pub mod bench;
pub mod binning;
pub mod data;
pub mod error;
pub mod gbdt;
pub mod model_store;
pub mod sample;
pub mod synthetic;
pub mod tree;

pub use analysis::{
    elimination_importance, elimination_importance_split, forest_auc, gain_importance,
    individual_importance, roc_auc, ImportanceMethod, ImportanceReport,
};
pub use binning::{
    BinIndex, FeatureBinning, DEFAULT_BINNING_LEVELS, MAX_BINNING_LEVELS, MISSING_BIN,
};
pub use data::{load_csv, CsvTable, Dataset, Label};
pub use error::{Error, Result};
pub use gbdt::{fit_forest, fit_matrix, format_probability, FitConfig, Forest};
pub use sample::BinnedEventSample;
pub use tree::{fit_tree, Cut, Tree};
