use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fuzzymon::data::{FeatureDef, FeatureSchema};
use fuzzymon::engine::{extend, load_state, save_state, Consequent, FuzzyMonitorModel, Hyperparameters, Label};

fn schema(dim: usize) -> FeatureSchema {
    FeatureSchema::new((0..dim).map(|i| FeatureDef::numeric(&format!("x{i}"), 0.0, 1.0)).collect())
}

/// Two labelled blobs plus uniform background noise.
fn stream(seed: u64, n: usize) -> Vec<(Vec<f64>, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let pick = rng.gen_range(0..3);
            let o: Vec<f64> = match pick {
                0 => vec![0.2 + rng.gen_range(-0.05..0.05), 0.3 + rng.gen_range(-0.05..0.05)],
                1 => vec![0.8 + rng.gen_range(-0.05..0.05), 0.7 + rng.gen_range(-0.05..0.05)],
                _ => vec![rng.gen(), rng.gen()],
            };
            let mp = match pick {
                0 => rng.gen_bool(0.02),
                1 => rng.gen_bool(0.9),
                _ => rng.gen_bool(0.3),
            };
            (o, mp)
        })
        .collect()
}

fn trained(seed: u64, n: usize, params: Hyperparameters) -> (FuzzyMonitorModel, Vec<(Vec<f64>, bool)>) {
    let data = stream(seed, n);
    let mut m = FuzzyMonitorModel::new(schema(2), params, seed).unwrap();
    for (o, mp) in &data {
        m.learn_one(o, Label::new(*mp, false)).unwrap();
    }
    (m, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn support_accounting_holds_at_every_step(seed in 0u64..1000, min_support in 1u64..30) {
        let params = Hyperparameters { min_support_eval: min_support, util_threshold: 0.05, ..Hyperparameters::default() };
        let mut m = FuzzyMonitorModel::new(schema(2), params, seed).unwrap();
        for (o, mp) in stream(seed, 600) {
            m.learn_one(&o, Label::new(mp, false)).unwrap();
            prop_assert_eq!(m.total_support() + m.dropped_by_prune, m.global.n_seen);
            let mps: u64 = m.clouds.iter().map(|c| c.mp_count).sum();
            prop_assert!(mps <= m.total_support());
        }
    }

    #[test]
    fn covariance_stays_symmetric_positive_definite(seed in 0u64..1000, weights in prop::collection::vec(0.0f64..1.0, 50..200)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Consequent::new(4, 0.0, 1000.0);
        for w in weights {
            let x = extend(&[rng.gen(), rng.gen(), rng.gen()]);
            c.update(&x, w, rng.gen_range(0.0..1.0));
        }
        let m = DMatrix::from_row_slice(4, 4, &c.cov);
        let asym = (&m - m.transpose()).abs().max();
        prop_assert!(asym < 1e-9 * m.abs().max().max(1.0));
        let sym = (&m + m.transpose()) / 2.0;
        prop_assert!(sym.cholesky().is_some());
    }
}

#[test]
fn prequential_accuracy_matches_a_replayed_tally() {
    let params = Hyperparameters { window: 100, ..Hyperparameters::default() };
    let mut m = FuzzyMonitorModel::new(schema(2), params, 5).unwrap();
    let mut hits = Vec::new();
    for (o, mp) in stream(5, 3000) {
        let before = (!m.is_empty()).then(|| m.predict(&o).unwrap().label);
        let out = m.learn_one(&o, Label::new(mp, false)).unwrap();
        assert_eq!(out.predicted, before);
        if let Some(p) = before {
            assert_eq!(out.correct, Some(p == mp));
            hits.push(p == mp);
        }
        let acc = out.accuracy;
        if hits.is_empty() {
            assert_eq!(acc.cumulative, None);
            continue;
        }
        let cum = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
        let tail = &hits[hits.len().saturating_sub(100)..];
        let win = tail.iter().filter(|h| **h).count() as f64 / tail.len() as f64;
        assert_eq!(acc.cumulative, Some(cum));
        assert_eq!(acc.windowed, Some(win));
        assert_eq!(acc.window_full, hits.len() >= 100);
    }
}

#[test]
fn saved_state_predicts_identically() {
    let (m, _) = trained(9, 2000, Hyperparameters::default());
    let text = save_state(&m);
    let back = load_state(&text).unwrap();
    assert_eq!(back, m);
    assert_eq!(save_state(&back), text);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let o = [rng.gen::<f64>(), rng.gen::<f64>()];
        assert_eq!(m.predict(&o).unwrap(), back.predict(&o).unwrap());
    }
}

#[test]
fn learned_model_separates_the_blobs() {
    let (m, _) = trained(3, 4000, Hyperparameters::default());
    assert!(!m.predict(&[0.2, 0.3]).unwrap().label);
    assert!(m.predict(&[0.8, 0.7]).unwrap().label);
    let acc = m.rolling_accuracy();
    assert!(acc.window_full);
}

#[test]
fn training_is_deterministic() {
    let (a, _) = trained(21, 1500, Hyperparameters::default());
    let (b, _) = trained(21, 1500, Hyperparameters::default());
    assert_eq!(save_state(&a), save_state(&b));
}
