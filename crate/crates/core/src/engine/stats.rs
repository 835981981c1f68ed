use serde::{Deserialize, Serialize};

use super::cloud::{membership_value, sq_norm};
use super::EngineError;

/// Smallest variance ever used in a density.
pub const MIN_VARIANCE: f64 = 1e-6;

/// Running mean and mean-square over every training sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalStats {
    pub n_seen: u64,
    pub mean: Vec<f64>,
    pub mean_sq_norm: f64,
}

impl GlobalStats {
    pub fn new(dim: usize) -> Self {
        Self {
            n_seen: 0,
            mean: vec![0.0; dim],
            mean_sq_norm: 0.0,
        }
    }

    pub fn update(&mut self, o: &[f64]) {
        self.n_seen += 1;
        let n = self.n_seen as f64;
        for (m, x) in self.mean.iter_mut().zip(o) {
            *m += (x - *m) / n;
        }
        self.mean_sq_norm += (sq_norm(o) - self.mean_sq_norm) / n;
    }

    /// `G - ||g||^2`, clamped at [`MIN_VARIANCE`].
    pub fn variance(&self) -> f64 {
        (self.mean_sq_norm - sq_norm(&self.mean)).max(MIN_VARIANCE)
    }

    /// Global unimodal density of `o`.
    pub fn density(&self, o: &[f64]) -> Result<f64, EngineError> {
        if self.n_seen == 0 {
            return Err(EngineError::NoSamples);
        }
        Ok(membership_value(o, &self.mean, self.variance()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_examples() {
        let mut g = GlobalStats::new(2);
        assert!(matches!(g.density(&[0.0, 0.0]), Err(EngineError::NoSamples)));
        g.update(&[0.4, 0.6]);
        assert_eq!(g.variance(), MIN_VARIANCE);
        assert_eq!(g.density(&[0.4, 0.6]).unwrap(), 1.0);

        // mean (0,0), variance 1
        let g = GlobalStats {
            n_seen: 2,
            mean: vec![0.0, 0.0],
            mean_sq_norm: 1.0,
        };
        assert_eq!(g.density(&[0.0, 0.0]).unwrap(), 1.0);
        assert!((g.density(&[2.0, 0.0]).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn recursive_matches_batch() {
        let pts: Vec<[f64; 3]> = (0..257)
            .map(|i| {
                let t = i as f64;
                [(t * 0.37).sin().abs(), (t * 1.3).cos().abs(), (t % 7.0) / 7.0]
            })
            .collect();
        let mut g = GlobalStats::new(3);
        for p in &pts {
            g.update(p);
        }
        let n = pts.len() as f64;
        for d in 0..3 {
            let batch: f64 = pts.iter().map(|p| p[d]).sum::<f64>() / n;
            assert!((g.mean[d] - batch).abs() < 1e-12);
        }
        let batch_sq: f64 = pts.iter().map(|p| sq_norm(p)).sum::<f64>() / n;
        assert!((g.mean_sq_norm - batch_sq).abs() < 1e-12);
    }
}
