//! Seeded synthetic datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{default_feature_names, Dataset, Label};

/// Unit-variance Gaussian features whose mean is shifted by `+-shift_f` for
/// signal and background. Shifts shrink with the feature index so that later
/// features carry less information. Classes are drawn with probability 1/2.
pub fn gaussian_dataset(n_events: usize, n_features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<f64> = (0..n_features)
        .map(|f| 0.5 / (1.0 + f as f64).sqrt())
        .collect();
    let mut values = Vec::with_capacity(n_events * n_features);
    let mut labels = Vec::with_capacity(n_events);
    for _ in 0..n_events {
        let label = Label::from_signal(rng.random_bool(0.5));
        for &shift in &shifts {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(z + label.sign() * shift);
        }
        labels.push(label);
    }
    Dataset::new(
        default_feature_names(n_features),
        values,
        labels,
        vec![1.0; n_events],
    )
    .expect("generated dataset is rectangular")
}

/// The exclusive-or truth table, each of its four rows repeated `copies`
/// times. Target is `x xor y`.
pub fn xor_dataset(copies: usize) -> Dataset {
    let table = [
        ([1.0, 1.0], false),
        ([1.0, 0.0], true),
        ([0.0, 1.0], true),
        ([0.0, 0.0], false),
    ];
    let mut values = Vec::with_capacity(copies * 8);
    let mut labels = Vec::with_capacity(copies * 4);
    for _ in 0..copies {
        for (x, y) in table {
            values.extend(x);
            labels.push(Label::from_signal(y));
        }
    }
    Dataset::new(
        vec!["x".into(), "y".into()],
        values,
        labels,
        vec![1.0; copies * 4],
    )
    .expect("xor table is rectangular")
}
