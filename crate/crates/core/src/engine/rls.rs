//! Fuzzily weighted recursive least squares for rule consequents.

use serde::{Deserialize, Serialize};

/// Affine consequent `a` of one rule together with its RLS covariance `C`.
///
/// The covariance is stored row-major as an `n x n` matrix where `n` is the
/// extended input length `1 + dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consequent {
    pub coef: Vec<f64>,
    pub cov: Vec<f64>,
}

impl Consequent {
    /// `a = (intercept, 0, ..., 0)`, `C = omega0 * I`.
    pub fn new(len: usize, intercept: f64, omega0: f64) -> Self {
        let mut coef = vec![0.0; len];
        coef[0] = intercept;
        let mut cov = vec![0.0; len * len];
        for i in 0..len {
            cov[i * len + i] = omega0;
        }
        Self { coef, cov }
    }

    pub fn len(&self) -> usize {
        self.coef.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coef.is_empty()
    }

    /// Rule output `[1, o] . a`.
    pub fn output(&self, o: &[f64]) -> f64 {
        debug_assert_eq!(o.len() + 1, self.coef.len());
        self.coef[0] + self.coef[1..].iter().zip(o).map(|(a, x)| a * x).sum::<f64>()
    }

    /// One weighted RLS step on extended input `x` (leading 1 included):
    ///
    /// `C <- C - w C x x' C / (1 + w x' C x)`, `a <- a + w C_new x (y - x' a)`.
    ///
    /// A zero weight leaves both `a` and `C` untouched.
    pub fn update(&mut self, x: &[f64], weight: f64, target: f64) {
        let n = self.coef.len();
        debug_assert_eq!(x.len(), n);
        if weight <= 0.0 {
            return;
        }
        let cx: Vec<f64> = (0..n)
            .map(|i| {
                let row = &self.cov[i * n..(i + 1) * n];
                row.iter().zip(x).map(|(c, v)| c * v).sum()
            })
            .collect();
        let quad: f64 = x.iter().zip(&cx).map(|(a, b)| a * b).sum();
        // x'Cx >= 0 for positive definite C, so the denominator stays >= 1
        let denom = 1.0 + weight * quad.max(0.0);
        let k = weight / denom;
        for i in 0..n {
            let ci = cx[i];
            let row = &mut self.cov[i * n..(i + 1) * n];
            for (c, cj) in row.iter_mut().zip(&cx) {
                *c -= k * ci * cj;
            }
        }
        let err = target - x.iter().zip(&self.coef).map(|(a, b)| a * b).sum::<f64>();
        // C_new x = C x / (1 + w x'Cx)
        for (a, ci) in self.coef.iter_mut().zip(&cx) {
            *a += weight * (ci / denom) * err;
        }
    }
}

/// Builds the extended input `[1, o]`.
pub fn extend(o: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(o.len() + 1);
    x.push(1.0);
    x.extend_from_slice(o);
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_is_identity() {
        let mut c = Consequent::new(3, 0.3, 1000.0);
        let before = c.clone();
        c.update(&[1.0, 0.2, 0.9], 0.0, 1.0);
        assert_eq!(c, before);
    }

    #[test]
    fn single_hand_step() {
        let mut c = Consequent::new(2, 0.0, 1.0);
        c.update(&[1.0, 0.0], 1.0, 1.0);
        assert_eq!(c.coef, vec![0.5, 0.0]);
        assert_eq!(c.cov, vec![0.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn output_is_affine() {
        let c = Consequent {
            coef: vec![0.1, 2.0, -1.0],
            cov: vec![0.0; 9],
        };
        assert!((c.output(&[0.5, 0.25]) - (0.1 + 1.0 - 0.25)).abs() < 1e-15);
    }
}
