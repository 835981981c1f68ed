//! Synthetic driving scenarios with planted operating-condition clusters,
//! plus the stopped-car-ahead crash detector.
//!
//! Each frame draws a cluster by weight; categorical and boolean fields come
//! straight from the cluster, numeric fields are the cluster centre plus
//! bounded uniform noise. A misperception is drawn with the cluster's rate
//! and, if it happens, lands in the region of interest with
//! `roi_probability`; a hazardous misperception is exactly that conjunction.

mod crash;

use indexmap::IndexMap;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureKind, FeatureSchema, RawRecord, RawValue};

pub use crash::{detect_crashes, DEFAULT_K_CRASH, DEFAULT_K_TRACK};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// A planted region of the operating-condition space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCluster {
    pub name: String,
    /// One value per categorical feature, in schema order.
    pub categories: Vec<String>,
    /// One value per boolean feature, in schema order.
    pub flags: Vec<bool>,
    /// Raw-unit centre per numeric feature, in schema order.
    pub center: Vec<f64>,
    /// Half-width of the uniform noise per numeric feature.
    pub spread: Vec<f64>,
    pub mp_probability: f64,
    pub weight: f64,
}

impl PlantedCluster {
    pub fn new(
        name: &str,
        categories: &[&str],
        flags: &[bool],
        center: &[f64],
        spread: &[f64],
        mp_probability: f64,
        weight: f64,
    ) -> Self {
        Self {
            name: name.to_string(),
            categories: categories.iter().map(|s| s.to_string()).collect(),
            flags: flags.to_vec(),
            center: center.to_vec(),
            spread: spread.to_vec(),
            mp_probability,
            weight,
        }
    }

    /// Noise-free record at the cluster centre.
    pub fn prototype_record(&self, schema: &FeatureSchema) -> RawRecord {
        let values = field_values(schema, self, &self.center);
        RawRecord::new(values, false, false, 0, 0).expect("mp=hmp=false is consistent")
    }
}

fn field_values(schema: &FeatureSchema, c: &PlantedCluster, numerics: &[f64]) -> IndexMap<String, RawValue> {
    let (mut ci, mut bi, mut ni) = (0, 0, 0);
    let mut values = IndexMap::new();
    for f in &schema.features {
        let v = match f.kind {
            FeatureKind::Categorical { .. } => {
                ci += 1;
                RawValue::Text(c.categories[ci - 1].clone())
            }
            FeatureKind::Boolean => {
                bi += 1;
                RawValue::Bool(c.flags[bi - 1])
            }
            FeatureKind::Numeric { .. } => {
                ni += 1;
                RawValue::Number(numerics[ni - 1])
            }
        };
        values.insert(f.name.clone(), v);
    }
    values
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub schema: FeatureSchema,
    pub clusters: Vec<PlantedCluster>,
    /// Chance that a misperception falls inside the region of interest.
    pub roi_probability: f64,
    /// Inclusive `[min, max]` episode length in frames.
    pub episode_length: [u32; 2],
    pub episodes: u32,
    pub seed: u64,
    pub k_track: u32,
    pub k_crash: u32,
}

impl SimConfig {
    /// Five planted clusters on the driving schema: three where perception is
    /// reliable and two (night-time glare, dull overcast daylight) where it
    /// mostly misses objects.
    pub fn driving_default() -> Self {
        let schema = FeatureSchema::driving_default();
        let clusters = vec![
            PlantedCluster::new(
                "clear-city-day",
                &["clear", "city-street", "daytime"],
                &[false, false],
                &[140.0, 0.70, 5.0],
                &[15.0, 0.08, 0.6],
                0.02,
                0.25,
            ),
            PlantedCluster::new(
                "snowy-highway-day",
                &["snowy", "highway", "daytime"],
                &[false, false],
                &[170.0, 0.55, 4.0],
                &[15.0, 0.08, 0.6],
                0.01,
                0.15,
            ),
            PlantedCluster::new(
                "overcast-city-dusk",
                &["overcast", "city-street", "dawn/dusk"],
                &[false, false],
                &[90.0, 0.45, 3.5],
                &[15.0, 0.08, 0.6],
                0.02,
                0.20,
            ),
            PlantedCluster::new(
                "clear-city-night",
                &["clear", "city-street", "night"],
                &[true, true],
                &[18.167, 0.12, 2.18],
                &[8.0, 0.06, 0.5],
                0.85,
                0.20,
            ),
            PlantedCluster::new(
                "overcast-city-day",
                &["overcast", "city-street", "daytime"],
                &[false, true],
                &[111.2, 0.48, 3.284],
                &[15.0, 0.08, 0.6],
                0.80,
                0.20,
            ),
        ];
        Self {
            schema,
            clusters,
            roi_probability: 0.3,
            episode_length: [10, 30],
            episodes: 1500,
            seed: 2024,
            k_track: DEFAULT_K_TRACK,
            k_crash: DEFAULT_K_CRASH,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| SimError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        if let Some(v) = self.schema.validate().first() {
            return bad(v.to_string());
        }
        if self.clusters.is_empty() {
            return bad("no clusters".into());
        }
        let cats: Vec<_> = self.schema.categorical_features().collect();
        let n_bool = self
            .schema
            .features
            .iter()
            .filter(|f| matches!(f.kind, FeatureKind::Boolean))
            .count();
        let nums: Vec<_> = self.schema.numeric_features().collect();
        for c in &self.clusters {
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return bad(format!("cluster {}: weight must be positive", c.name));
            }
            if !(0.0..=1.0).contains(&c.mp_probability) {
                return bad(format!("cluster {}: mp_probability outside [0, 1]", c.name));
            }
            if c.categories.len() != cats.len() || c.flags.len() != n_bool {
                return bad(format!("cluster {}: field counts do not match the schema", c.name));
            }
            for (v, (_, f)) in c.categories.iter().zip(&cats) {
                if let FeatureKind::Categorical { values } = &f.kind {
                    if !values.contains(v) {
                        return bad(format!("cluster {}: \"{v}\" is not a {} value", c.name, f.name));
                    }
                }
            }
            if c.center.len() != nums.len() || c.spread.len() != nums.len() {
                return bad(format!("cluster {}: numeric counts do not match the schema", c.name));
            }
            for ((x, s), (_, f)) in c.center.iter().zip(&c.spread).zip(&nums) {
                if let FeatureKind::Numeric { range: [lo, hi] } = f.kind {
                    if !(lo..=hi).contains(x) {
                        return bad(format!("cluster {}: centre of {} outside its range", c.name, f.name));
                    }
                }
                if !(*s >= 0.0) {
                    return bad(format!("cluster {}: negative spread", c.name));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.roi_probability) {
            return bad("roi_probability outside [0, 1]".into());
        }
        let [lo, hi] = self.episode_length;
        if lo == 0 || lo > hi {
            return bad("episode_length must satisfy 1 <= min <= max".into());
        }
        if self.k_track == 0 || self.k_crash == 0 {
            return bad("k_track and k_crash must be at least 1".into());
        }
        Ok(())
    }

    /// Index of the cluster a generated record came from, parsed from its
    /// exemplar tag.
    pub fn cluster_of(&self, record: &RawRecord) -> Option<usize> {
        let tag = record.exemplar.as_deref()?.strip_prefix("sim://")?;
        let name = tag.split('/').next()?;
        self.clusters.iter().position(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: u64,
    pub frames: Vec<RawRecord>,
    /// Whether each frame's miss (if any) fell in the region of interest.
    pub in_roi: Vec<bool>,
    /// Planted cluster index per frame.
    pub cluster: Vec<usize>,
}

impl Episode {
    pub fn hazard_flags(&self) -> Vec<bool> {
        self.frames
            .iter()
            .zip(&self.in_roi)
            .map(|(f, roi)| f.mp && *roi)
            .collect()
    }

    pub fn crashes(&self, k_track: u32, k_crash: u32) -> Vec<usize> {
        detect_crashes(&self.hazard_flags(), k_track, k_crash)
    }
}

/// Generates every episode of the scenario from its seed.
pub fn generate(config: &SimConfig) -> Result<Vec<Episode>, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pick = WeightedIndex::new(config.clusters.iter().map(|c| c.weight))
        .map_err(|e| SimError::Invalid(e.to_string()))?;
    let ranges: Vec<(f64, f64)> = config
        .schema
        .numeric_features()
        .map(|(_, f)| match f.kind {
            FeatureKind::Numeric { range: [lo, hi] } => (lo, hi),
            _ => unreachable!(),
        })
        .collect();
    let [lmin, lmax] = config.episode_length;

    let mut out = Vec::with_capacity(config.episodes as usize);
    for e in 0..u64::from(config.episodes) {
        let len = rng.gen_range(lmin..=lmax);
        let mut ep = Episode {
            id: e,
            frames: Vec::with_capacity(len as usize),
            in_roi: Vec::with_capacity(len as usize),
            cluster: Vec::with_capacity(len as usize),
        };
        for frame in 0..u64::from(len) {
            let k = pick.sample(&mut rng);
            let c = &config.clusters[k];
            let numerics: Vec<f64> = c
                .center
                .iter()
                .zip(&c.spread)
                .zip(&ranges)
                .map(|((x, s), (lo, hi))| {
                    let noise = if *s > 0.0 { rng.gen_range(-*s..=*s) } else { 0.0 };
                    (x + noise).clamp(*lo, *hi)
                })
                .collect();
            let mp = rng.gen_bool(c.mp_probability);
            let roi = mp && rng.gen_bool(config.roi_probability);
            let values = field_values(&config.schema, c, &numerics);
            let rec = RawRecord::new(values, mp, roi, e, frame)
                .expect("hmp is derived from mp")
                .with_exemplar(format!("sim://{}/{e}/{frame}", c.name));
            ep.frames.push(rec);
            ep.in_roi.push(roi);
            ep.cluster.push(k);
        }
        out.push(ep);
    }
    Ok(out)
}

/// Flattens episodes into the record stream written to disk.
pub fn records(episodes: &[Episode]) -> Vec<RawRecord> {
    episodes.iter().flat_map(|e| e.frames.iter().cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(clusters: Vec<PlantedCluster>, roi: f64) -> SimConfig {
        let mut cfg = SimConfig::driving_default();
        cfg.clusters = clusters;
        cfg.roi_probability = roi;
        cfg.episodes = 50;
        cfg
    }

    #[test]
    fn default_is_valid_and_deterministic() {
        let cfg = SimConfig::driving_default();
        cfg.validate().unwrap();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        for ep in &a {
            for (i, f) in ep.frames.iter().enumerate() {
                assert_eq!(f.frame, i as u64);
                assert!(!f.hmp || f.mp);
                assert_eq!(f.hmp, f.mp && ep.in_roi[i]);
                assert_eq!(cfg.cluster_of(f), Some(ep.cluster[i]));
            }
        }
    }

    #[test]
    fn zero_rate_cluster_never_misses() {
        let mut c = SimConfig::driving_default().clusters[0].clone();
        c.mp_probability = 0.0;
        let eps = generate(&small(vec![c], 1.0)).unwrap();
        assert!(records(&eps).iter().all(|r| !r.mp && !r.hmp));
    }

    #[test]
    fn certain_hazard_cluster() {
        let mut c = SimConfig::driving_default().clusters[3].clone();
        c.mp_probability = 1.0;
        let eps = generate(&small(vec![c], 1.0)).unwrap();
        assert!(records(&eps).iter().all(|r| r.mp && r.hmp));
    }

    #[test]
    fn numerics_stay_in_range() {
        let eps = generate(&SimConfig::driving_default()).unwrap();
        let schema = FeatureSchema::driving_default();
        for r in records(&eps).iter().take(5000) {
            let o = schema.encode_values(r).unwrap();
            assert!(o.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = SimConfig::driving_default();
        cfg.clusters[0].weight = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::driving_default();
        cfg.clusters[1].categories[0] = "fog".into();
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::driving_default();
        cfg.clusters[2].center[0] = 300.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::driving_default();
        cfg.k_track = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SimConfig::driving_default();
        let back = SimConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
