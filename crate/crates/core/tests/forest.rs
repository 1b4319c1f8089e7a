use cphboost::analysis::{forest_auc, roc_auc};
use cphboost::gbdt::sigmoid_probability;
use cphboost::synthetic::gaussian_dataset;
use cphboost::{fit_forest, fit_matrix, model_store, BinnedEventSample, Dataset, FitConfig, Label};
use proptest::prelude::*;

fn config(n_trees: usize) -> FitConfig {
    FitConfig {
        n_trees,
        ..FitConfig::default()
    }
}

fn log_loss(p: &[f64], labels: &[Label]) -> f64 {
    p.iter()
        .zip(labels)
        .map(|(&p, l)| {
            if l.is_signal() {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / p.len() as f64
}

#[test]
fn same_seed_same_forest() {
    let data = gaussian_dataset(1000, 4, 1);
    let a = fit_forest(&data, &config(20)).unwrap();
    let b = fit_forest(&data, &config(20)).unwrap();
    assert_eq!(a, b);
    assert_eq!(model_store::serialize(&a), model_store::serialize(&b));
    let c = fit_forest(
        &data,
        &FitConfig {
            seed: 1,
            ..config(20)
        },
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn training_loss_falls_with_more_trees() {
    let data = gaussian_dataset(2000, 3, 2);
    let full = FitConfig {
        subsample: 1.0,
        ..config(1)
    };
    let mut last = f64::INFINITY;
    for n in [1, 5, 20, 80] {
        let forest = fit_forest(&data, &FitConfig { n_trees: n, ..full }).unwrap();
        let loss = log_loss(&forest.predict_dataset(&data, 1).unwrap(), data.labels());
        assert!(loss < last, "{n} trees: loss {loss} after {last}");
        last = loss;
    }
}

#[test]
fn swapping_labels_mirrors_probabilities() {
    let data = gaussian_dataset(1500, 3, 3);
    let swapped = data
        .with_labels(data.labels().iter().map(|l| l.flipped()).collect())
        .unwrap();
    let cfg = FitConfig {
        subsample: 1.0,
        ..config(30)
    };
    let p = fit_forest(&data, &cfg)
        .unwrap()
        .predict_dataset(&data, 1)
        .unwrap();
    let q = fit_forest(&swapped, &cfg)
        .unwrap()
        .predict_dataset(&data, 1)
        .unwrap();
    for (a, b) in p.iter().zip(&q) {
        assert!((a + b - 1.0).abs() < 1e-9, "{a} + {b}");
    }
}

#[test]
fn forest_separates_gaussians() {
    let train = gaussian_dataset(5000, 5, 4);
    let test = gaussian_dataset(5000, 5, 5);
    let forest = fit_forest(&train, &config(100)).unwrap();
    assert!(forest_auc(&forest, &test).unwrap() > 0.75);
}

#[test]
fn prior_only_forest_predicts_class_balance() {
    // 3 signal, 1 background, unit weights: p = Ws / (Ws + Wb)
    let data = Dataset::from_rows(
        &[vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
        &[
            Label::Signal,
            Label::Signal,
            Label::Signal,
            Label::Background,
        ],
    )
    .unwrap();
    let forest = fit_forest(
        &data,
        &FitConfig {
            n_trees: 1,
            depth: 1,
            shrinkage: 1e-9,
            ..config(1)
        },
    )
    .unwrap();
    assert!((forest.f0() - 0.5 * 3f64.ln()).abs() < 1e-15);
    assert!((sigmoid_probability(forest.f0()) - 0.75).abs() < 1e-15);
}

#[test]
fn all_missing_feature_is_never_cut() {
    let data = gaussian_dataset(500, 2, 6);
    let data = data.with_column("empty", &vec![f64::NAN; 500]).unwrap();
    let forest = fit_forest(&data, &config(20)).unwrap();
    assert!(forest.binnings()[2].boundaries().iter().all(|&b| b == 0.0));
    let used = forest
        .trees()
        .iter()
        .flat_map(|t| t.cuts().iter().flatten());
    assert!(used.clone().count() > 0);
    assert!(used.into_iter().all(|c| c.feature != 2));
}

#[test]
fn fit_matrix_matches_dataset_fit() {
    let data = gaussian_dataset(800, 3, 7);
    let y: Vec<f64> = data
        .labels()
        .iter()
        .map(|l| if l.is_signal() { 1.0 } else { 0.0 })
        .collect();
    let cfg = config(15);
    let a = fit_forest(&data, &cfg).unwrap();
    let b = fit_matrix(data.values(), 800, 3, &y, None, &cfg).unwrap();
    assert_eq!(a.trees(), b.trees());
    assert_eq!(
        a.predict_dataset(&data, 1).unwrap(),
        b.predict_dataset(&data, 1).unwrap()
    );
}

#[test]
fn fit_matrix_reports_shapes() {
    let cfg = config(1);
    let err = fit_matrix(&[1.0, 2.0, 3.0], 2, 2, &[0.0, 1.0], None, &cfg).unwrap_err();
    assert!(err.to_string().contains("(2, 2)"), "{err}");
    let err = fit_matrix(&[1.0, 2.0], 2, 1, &[0.0, 1.0], Some(&[1.0]), &cfg).unwrap_err();
    assert!(err.to_string().contains("(1,)"), "{err}");
    assert!(fit_matrix(&[1.0, 2.0], 2, 1, &[0.0, 2.0], None, &cfg).is_err());
}

#[test]
fn save_and_load_through_a_file() {
    let data = gaussian_dataset(300, 2, 8);
    let forest = fit_forest(&data, &config(5)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model_store::save(&forest, &path).unwrap();
    assert_eq!(model_store::load(&path).unwrap(), forest);
    assert!(model_store::load(dir.path().join("missing.json")).is_err());
}

#[test]
fn negative_weights_stay_finite() {
    let data = gaussian_dataset(1000, 3, 9);
    let w: Vec<f64> = (0..1000)
        .map(|i| if i % 10 == 0 { -2.0 } else { 1.0 })
        .collect();
    let data = data.with_weights(w).unwrap();
    let forest = fit_forest(&data, &config(30)).unwrap();
    let p = forest.predict_dataset(&data, 1).unwrap();
    assert!(p.iter().all(|p| p.is_finite()));
    assert!(roc_auc(&p, data.labels(), data.weights())
        .unwrap()
        .is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn binned_and_threshold_traversal_agree(seed in 0u64..1000, depth in 1usize..5, levels in 1u32..7) {
        let data = gaussian_dataset(300, 3, seed)
            .map_column(1, |v| if v > 1.0 { f64::NAN } else { v });
        let cfg = FitConfig { depth, binning_levels: levels, seed, ..config(5) };
        let forest = fit_forest(&data, &cfg).unwrap();
        let sample = BinnedEventSample::build(&data, forest.binnings()).unwrap();
        for region in sample.regions() {
            for (i, &row) in region.source_rows().iter().enumerate() {
                for tree in forest.trees() {
                    prop_assert_eq!(tree.node_for_bins(region.event_bins(i)), tree.node_for(data.row(row)));
                }
            }
        }
    }

    #[test]
    fn probabilities_are_valid_and_thread_independent(seed in 0u64..1000, threads in 2usize..6) {
        let data = gaussian_dataset(400, 2, seed);
        let forest = fit_forest(&data, &FitConfig { seed, ..config(10) }).unwrap();
        let one = forest.predict_dataset(&data, 1).unwrap();
        let many = forest.predict_dataset(&data, threads).unwrap();
        prop_assert!(one.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert_eq!(
            one.iter().map(|p| p.to_bits()).collect::<Vec<_>>(),
            many.iter().map(|p| p.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn strictly_increasing_maps_do_not_change_predictions(seed in 0u64..1000, scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let data = gaussian_dataset(300, 2, seed);
        let cfg = FitConfig { seed, ..config(10) };
        let p = fit_forest(&data, &cfg).unwrap().predict_dataset(&data, 1).unwrap();
        let mapped = data.map_column(1, |v| scale * v + shift);
        let q = fit_forest(&mapped, &cfg).unwrap().predict_dataset(&mapped, 1).unwrap();
        prop_assert_eq!(p, q);
    }
}
