//! Versioned JSON model documents.

use serde::{Deserialize, Serialize};

use super::model::FuzzyMonitorModel;
use super::EngineError;

pub const FORMAT_NAME: &str = "fuzzymon-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct DocumentRef<'a> {
    format: &'a str,
    version: u32,
    model: &'a FuzzyMonitorModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Document {
    model: FuzzyMonitorModel,
}

/// Serializes the full training state. Floats are written in shortest
/// round-trip form, so loading restores every field bit for bit.
pub fn save_state(model: &FuzzyMonitorModel) -> String {
    let doc = DocumentRef {
        format: FORMAT_NAME,
        version: FORMAT_VERSION,
        model,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model serializes");
    s.push('\n');
    s
}

pub fn load_state(text: &str) -> Result<FuzzyMonitorModel, EngineError> {
    let header: Header = serde_json::from_str(text).map_err(|e| EngineError::Corrupt(e.to_string()))?;
    if header.format != FORMAT_NAME {
        return Err(EngineError::Corrupt(format!("unexpected format \"{}\"", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(EngineError::VersionMismatch {
            expected: FORMAT_VERSION,
            found: header.version,
        });
    }
    let doc: Document = serde_json::from_str(text).map_err(|e| EngineError::Corrupt(e.to_string()))?;
    check(&doc.model)?;
    Ok(doc.model)
}

fn check(m: &FuzzyMonitorModel) -> Result<(), EngineError> {
    let bad = |msg: String| Err(EngineError::Corrupt(msg));
    let dim = m.schema.dim();
    if m.global.mean.len() != dim {
        return bad(format!("global mean has {} components, schema needs {dim}", m.global.mean.len()));
    }
    m.params.validate()?;
    let mut last = None;
    for c in &m.clouds {
        if c.prototype.len() != dim || c.dim_mean_sq.len() != dim {
            return bad(format!("cloud {} has wrong dimensionality", c.id));
        }
        if c.consequent.coef.len() != dim + 1 || c.consequent.cov.len() != (dim + 1) * (dim + 1) {
            return bad(format!("cloud {} consequent has wrong shape", c.id));
        }
        if c.support == 0 || c.mp_count > c.support || c.hmp_count > c.mp_count {
            return bad(format!("cloud {} has inconsistent counts", c.id));
        }
        if last.is_some_and(|l| l >= c.id) || c.id >= m.next_id {
            return bad(format!("cloud ids out of order at {}", c.id));
        }
        last = Some(c.id);
    }
    if m.prequential.recent.len() > m.params.window {
        return bad("accuracy window longer than configured".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureSchema;
    use crate::engine::{Hyperparameters, Label};

    fn trained() -> FuzzyMonitorModel {
        let s = FeatureSchema::new(vec![
            crate::data::FeatureDef::numeric("a", 0.0, 1.0),
            crate::data::FeatureDef::numeric("b", 0.0, 1.0),
        ]);
        let mut m = FuzzyMonitorModel::new(s, Hyperparameters::default(), 7).unwrap();
        for i in 0..300u32 {
            let t = f64::from(i);
            let o = [(t * 0.731).sin().abs(), (t * 0.117).cos().abs()];
            m.learn_one(&o, Label::new(o[0] > 0.6, i % 5 == 0)).unwrap();
        }
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = trained();
        let text = save_state(&m);
        let back = load_state(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(save_state(&back), text);
    }

    #[test]
    fn empty_model_round_trip() {
        let m = FuzzyMonitorModel::new(FeatureSchema::driving_default(), Hyperparameters::default(), 0).unwrap();
        let back = load_state(&save_state(&m)).unwrap();
        assert!(back.is_empty());
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_is_corrupt() {
        let text = save_state(&trained());
        let cut = &text[..text.len() / 2];
        assert!(matches!(load_state(cut), Err(EngineError::Corrupt(_))));
    }

    #[test]
    fn version_mismatch() {
        let text = save_state(&trained()).replacen("\"version\": 1", "\"version\": 99", 1);
        assert!(matches!(
            load_state(&text),
            Err(EngineError::VersionMismatch { expected: 1, found: 99 })
        ));
    }
}
