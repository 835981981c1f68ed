use proptest::prelude::*;

use fuzzymon::data::{encode_all, RawRecord};
use fuzzymon::engine::{FuzzyMonitorModel, Hyperparameters};
use fuzzymon::evidence::shortlist_clouds;
use fuzzymon::odd::{derive_odd, emit, filter_records, parse, DeriveOptions, ExcludeBlock, OddSpecification};
use fuzzymon::sim::{generate, records, SimConfig};

fn scenario(episodes: u32, seed: u64) -> (SimConfig, Vec<RawRecord>) {
    let mut cfg = SimConfig::driving_default();
    cfg.episodes = episodes;
    cfg.seed = seed;
    let recs = records(&generate(&cfg).unwrap());
    (cfg, recs)
}

const WEATHER: [&str; 5] = ["clear", "snowy", "overcast", "partly cloudy", "rainy"];

fn block(trigger: [&str; 3], values: [f64; 3], spread: f64) -> ExcludeBlock {
    ExcludeBlock {
        attributes: vec!["brightness".into(), "clearness_score".into(), "contrast_score".into()],
        group: "visibility".into(),
        trigger: trigger.iter().map(|s| s.to_string()).collect(),
        values: values.to_vec(),
        source: None,
        spread: Some(spread),
        threshold: 0.5,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn narrowing_a_spec_never_admits_more(
        keep in prop::collection::vec(any::<bool>(), 5),
        drop in 0usize..5,
        spread in 0.001f64..0.1,
        brightness in 0.0f64..255.0,
    ) {
        let (cfg, recs) = scenario(40, 3);
        let mut wide = OddSpecification::default();
        let values: Vec<&str> = WEATHER.iter().zip(&keep).filter(|(_, k)| **k).map(|(w, _)| *w).collect();
        wide.include("weather", values.clone());
        let mut narrow = wide.clone();
        narrow.include("weather", values.iter().copied().filter(|w| *w != WEATHER[drop]).collect::<Vec<_>>());
        narrow.excludes.push(block(["clear", "city-street", "daytime"], [brightness, 0.7, 5.0], spread));

        let a = filter_records(&wide, &recs, &cfg.schema).unwrap();
        let b = filter_records(&narrow, &recs, &cfg.schema).unwrap();
        for (w, n) in a.within.iter().zip(&b.within) {
            prop_assert!(!n || *w);
        }
    }
}

#[test]
fn unconstrained_spec_admits_everything() {
    let (cfg, recs) = scenario(20, 4);
    let f = filter_records(&OddSpecification::default(), &recs, &cfg.schema).unwrap();
    assert_eq!(f.retained(), recs.len());
    assert_eq!(f.retention(), 1.0);
}

#[test]
fn derived_spec_round_trips_and_validates() {
    let (cfg, recs) = scenario(400, 5);
    let (obs, _) = encode_all(&recs, &cfg.schema);
    let mut m = FuzzyMonitorModel::new(cfg.schema.clone(), Hyperparameters::default(), 5).unwrap();
    for o in &obs {
        m.learn(o).unwrap();
    }
    let sl = shortlist_clouds(&m, 99.0, 0.1).unwrap();
    let spec = derive_odd(&m, &sl, &cfg.schema, &DeriveOptions::default()).unwrap();
    spec.validate(&cfg.schema).unwrap();
    assert!(!spec.excludes.is_empty());
    for b in &spec.excludes {
        let id = b.source.unwrap();
        assert!(sl.excluded.contains(&id));
    }
    let text = emit(&spec);
    assert_eq!(parse(&text).unwrap(), spec);
    assert_eq!(emit(&parse(&text).unwrap()), text);
}
