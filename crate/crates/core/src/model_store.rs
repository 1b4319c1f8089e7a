//! JSON model documents.
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "config": { "n_trees", "depth", "shrinkage", "subsample", "binning_levels", "seed" },
//!   "f0": <prior score>,
//!   "binnings": [ { "name", "levels", "boundaries": [...] }, ... ],
//!   "trees": [ { "depth", "nodes": [ { "index", "valid", "feature", "cut_bin",
//!                                       "threshold", "gain", "weight", "purity" } ] } ]
//! }
//! ```
//!
//! Every tree lists all `2^(D+1) - 1` nodes in heap order. Terminal nodes and
//! nodes without a cut have `valid = false` and zeroed cut fields. Floats are
//! written in shortest round-trip form, so parsing a document reproduces the
//! forest bit for bit. Thresholds are what prediction uses; binnings are kept
//! for provenance.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binning::FeatureBinning;
use crate::error::{Error, Result};
use crate::gbdt::{FitConfig, Forest};
use crate::tree::{Cut, Tree};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format_version: u64,
    config: FitConfig,
    f0: f64,
    binnings: Vec<BinningRecord>,
    trees: Vec<TreeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinningRecord {
    name: String,
    levels: u32,
    boundaries: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeRecord {
    depth: usize,
    nodes: Vec<NodeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    index: usize,
    valid: bool,
    feature: usize,
    cut_bin: u16,
    threshold: f64,
    gain: f64,
    weight: f64,
    purity: f64,
}

/// Renders a forest as a JSON document with deterministic layout.
pub fn serialize(forest: &Forest) -> String {
    let doc = ModelDocument {
        format_version: FORMAT_VERSION,
        config: FitConfig {
            n_trees: forest.trees().len(),
            ..*forest.config()
        },
        f0: forest.f0(),
        binnings: forest
            .binnings()
            .iter()
            .zip(forest.feature_names())
            .map(|(b, name)| BinningRecord {
                name: name.clone(),
                levels: b.levels(),
                boundaries: b.boundaries().to_vec(),
            })
            .collect(),
        trees: forest.trees().iter().map(tree_record).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model document is serializable");
    text.push('\n');
    text
}

fn tree_record(tree: &Tree) -> TreeRecord {
    let nodes = (0..tree.n_nodes())
        .map(|i| {
            let cut = tree.cuts().get(i).copied().flatten();
            NodeRecord {
                index: i,
                valid: cut.is_some(),
                feature: cut.map_or(0, |c| c.feature),
                cut_bin: cut.map_or(0, |c| c.cut_bin),
                threshold: cut.map_or(0.0, |c| c.threshold),
                gain: cut.map_or(0.0, |c| c.gain),
                weight: tree.node_weights()[i],
                purity: tree.node_purities()[i],
            }
        })
        .collect();
    TreeRecord {
        depth: tree.depth(),
        nodes,
    }
}

fn validation(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses and validates a model document.
pub fn parse(text: &str) -> Result<Forest> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let version = value
        .get("format_version")
        .ok_or_else(|| validation("format_version", "missing"))?;
    let version = version
        .as_u64()
        .ok_or_else(|| validation("format_version", "not an unsigned integer"))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let doc: ModelDocument =
        serde_json::from_value(value).map_err(|e| validation("document", e.to_string()))?;
    from_document(doc)
}

fn from_document(doc: ModelDocument) -> Result<Forest> {
    let config = doc.config;
    let check = |ok: bool, field: &str, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(validation(field, msg))
        }
    };
    check(config.depth >= 1, "config.depth", "must be at least 1")?;
    check(
        config.shrinkage > 0.0 && config.shrinkage <= 1.0,
        "config.shrinkage",
        "must be in (0, 1]",
    )?;
    check(
        config.subsample > 0.0 && config.subsample <= 1.0,
        "config.subsample",
        "must be in (0, 1]",
    )?;
    check(
        config.n_trees == doc.trees.len(),
        "config.n_trees",
        "does not match the number of trees",
    )?;
    check(doc.f0.is_finite(), "f0", "must be finite")?;
    check(
        !doc.binnings.is_empty(),
        "binnings",
        "at least one feature required",
    )?;

    let mut names = Vec::with_capacity(doc.binnings.len());
    let mut binnings = Vec::with_capacity(doc.binnings.len());
    for (f, rec) in doc.binnings.into_iter().enumerate() {
        let b = FeatureBinning::from_boundaries(rec.levels, rec.boundaries)
            .map_err(|e| validation(format!("binnings[{f}]"), e.to_string()))?;
        binnings.push(b);
        names.push(rec.name);
    }
    let d = binnings.len();

    let mut trees = Vec::with_capacity(doc.trees.len());
    for (t, rec) in doc.trees.into_iter().enumerate() {
        let field = |what: &str| format!("trees[{t}].{what}");
        check(
            rec.depth == config.depth,
            &field("depth"),
            "differs from config.depth",
        )?;
        let n_cuts = (1usize << rec.depth.min(31)) - 1;
        let mut cuts = Vec::with_capacity(n_cuts);
        let mut weights = Vec::with_capacity(rec.nodes.len());
        let mut purities = Vec::with_capacity(rec.nodes.len());
        for (i, node) in rec.nodes.into_iter().enumerate() {
            let nf = |what: &str| format!("trees[{t}].nodes[{i}].{what}");
            check(
                node.index == i,
                &nf("index"),
                "nodes must be listed in heap order",
            )?;
            check(node.weight.is_finite(), &nf("weight"), "must be finite")?;
            check(node.purity.is_finite(), &nf("purity"), "must be finite")?;
            if i < n_cuts {
                let cut = if node.valid {
                    check(node.feature < d, &nf("feature"), "out of range")?;
                    let n_bins = binnings[node.feature].n_bins();
                    check(
                        node.cut_bin >= 1 && (node.cut_bin as usize) < n_bins,
                        &nf("cut_bin"),
                        "out of range",
                    )?;
                    check(
                        node.threshold.is_finite(),
                        &nf("threshold"),
                        "must be finite",
                    )?;
                    check(
                        node.gain.is_finite() && node.gain >= 0.0,
                        &nf("gain"),
                        "must be finite and non-negative",
                    )?;
                    Some(Cut {
                        feature: node.feature,
                        cut_bin: node.cut_bin,
                        threshold: node.threshold,
                        gain: node.gain,
                    })
                } else {
                    None
                };
                cuts.push(cut);
            } else {
                check(
                    !node.valid,
                    &nf("valid"),
                    "terminal nodes cannot hold a cut",
                )?;
            }
            weights.push(node.weight);
            purities.push(node.purity);
        }
        let tree = Tree::from_parts(rec.depth, cuts, weights, purities)
            .map_err(|e| validation(field("nodes"), e.to_string()))?;
        trees.push(tree);
    }
    Forest::from_parts(config, doc.f0, trees, binnings, names)
        .map_err(|e| validation("trees", e.to_string()))
}

pub fn save(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize(forest))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
    parse(&std::fs::read_to_string(path)?)
}
