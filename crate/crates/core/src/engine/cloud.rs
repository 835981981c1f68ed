use serde::{Deserialize, Serialize};

use super::rls::Consequent;

/// Unimodal density `1 / (1 + ||o - p||^2 / variance)`.
pub fn membership_value(o: &[f64], prototype: &[f64], variance: f64) -> f64 {
    1.0 / (1.0 + sq_dist(o, prototype) / variance)
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn sq_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Discovered,
    UserSeeded,
}

/// One fuzzy rule: a prototype-centred antecedent and an affine consequent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datacloud {
    pub id: u64,
    /// Mean of the assigned members.
    pub prototype: Vec<f64>,
    /// Mean of `||o||^2` over the assigned members.
    pub mean_sq_norm: f64,
    /// Per-component mean of `o_d^2`; sums to `mean_sq_norm`.
    pub dim_mean_sq: Vec<f64>,
    pub support: u64,
    pub mp_count: u64,
    pub hmp_count: u64,
    pub consequent: Consequent,
    /// Value of the model's sample counter when the cloud was created.
    pub creation_index: u64,
    pub accumulated_firing: f64,
    pub origin: Origin,
}

impl Datacloud {
    pub fn new(id: u64, o: &[f64], consequent: Consequent, creation_index: u64, origin: Origin) -> Self {
        Self {
            id,
            prototype: o.to_vec(),
            mean_sq_norm: sq_norm(o),
            dim_mean_sq: o.iter().map(|x| x * x).collect(),
            support: 1,
            mp_count: 0,
            hmp_count: 0,
            consequent,
            creation_index,
            accumulated_firing: 0.0,
            origin,
        }
    }

    /// `X - ||p||^2` without flooring; may be marginally negative from rounding.
    pub fn raw_variance(&self) -> f64 {
        self.mean_sq_norm - sq_norm(&self.prototype)
    }

    /// Variance clamped at `floor`.
    pub fn variance(&self, floor: f64) -> f64 {
        self.raw_variance().max(floor)
    }

    /// Variance restricted to the given components, clamped at `floor`.
    pub fn restricted_variance(&self, dims: &[usize], floor: f64) -> f64 {
        let v: f64 = dims
            .iter()
            .map(|&d| self.dim_mean_sq[d] - self.prototype[d] * self.prototype[d])
            .sum();
        v.max(floor)
    }

    pub fn membership(&self, o: &[f64], floor: f64) -> f64 {
        membership_value(o, &self.prototype, self.variance(floor))
    }

    /// Recursive mean / mean-square update with one more member.
    pub fn absorb(&mut self, o: &[f64], mp: bool, hmp: bool) {
        self.support += 1;
        let n = self.support as f64;
        for ((p, m), x) in self.prototype.iter_mut().zip(self.dim_mean_sq.iter_mut()).zip(o) {
            *p += (x - *p) / n;
            *m += (x * x - *m) / n;
        }
        self.mean_sq_norm += (sq_norm(o) - self.mean_sq_norm) / n;
        self.count_label(mp, hmp);
    }

    pub(crate) fn count_label(&mut self, mp: bool, hmp: bool) {
        if mp {
            self.mp_count += 1;
            if hmp {
                self.hmp_count += 1;
            }
        }
    }

    /// Support-weighted pooling of two clouds; the consequent, id and origin
    /// come from the higher-support cloud (`self` on ties).
    pub fn merged_with(&self, other: &Datacloud) -> Datacloud {
        let (major, _) = if other.support > self.support {
            (other, self)
        } else {
            (self, other)
        };
        let (ws, wo) = (self.support as f64, other.support as f64);
        let total = ws + wo;
        let pool = |a: f64, b: f64| (ws * a + wo * b) / total;
        Datacloud {
            id: major.id,
            prototype: self.prototype.iter().zip(&other.prototype).map(|(a, b)| pool(*a, *b)).collect(),
            mean_sq_norm: pool(self.mean_sq_norm, other.mean_sq_norm),
            dim_mean_sq: self.dim_mean_sq.iter().zip(&other.dim_mean_sq).map(|(a, b)| pool(*a, *b)).collect(),
            support: self.support + other.support,
            mp_count: self.mp_count + other.mp_count,
            hmp_count: self.hmp_count + other.hmp_count,
            consequent: major.consequent.clone(),
            creation_index: self.creation_index.min(other.creation_index),
            accumulated_firing: self.accumulated_firing + other.accumulated_firing,
            origin: major.origin,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(p: &[f64]) -> Datacloud {
        Datacloud::new(0, p, Consequent::new(p.len() + 1, 0.0, 1000.0), 1, Origin::Discovered)
    }

    #[test]
    fn membership_examples() {
        assert_eq!(membership_value(&[0.3, 0.7], &[0.3, 0.7], 0.01), 1.0);
        assert_eq!(membership_value(&[1.0, 0.0], &[0.0, 0.0], 1.0), 0.5);
        assert!((membership_value(&[1.0, 1.0], &[0.0, 0.0], 0.5) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn singleton_variance_is_floored() {
        let c = cloud(&[0.2, 0.4]);
        assert!(c.raw_variance().abs() < 1e-15);
        assert_eq!(c.variance(1e-6), 1e-6);
    }

    #[test]
    fn identical_member_keeps_prototype() {
        let mut c = cloud(&[0.2, 0.4]);
        c.absorb(&[0.2, 0.4], true, false);
        assert_eq!(c.prototype, vec![0.2, 0.4]);
        assert_eq!((c.support, c.mp_count, c.hmp_count), (2, 1, 0));
    }

    #[test]
    fn merge_pools_by_support() {
        let mut a = cloud(&[0.0, 0.0]);
        a.absorb(&[0.0, 0.0], false, false);
        a.absorb(&[0.0, 0.0], false, false);
        let mut b = cloud(&[1.0, 1.0]);
        b.id = 5;
        b.count_label(true, true);
        let m = a.merged_with(&b);
        assert_eq!(m.id, 0);
        assert_eq!(m.support, 4);
        assert_eq!(m.prototype, vec![0.25, 0.25]);
        assert_eq!((m.mp_count, m.hmp_count), (1, 1));
        assert!((m.mean_sq_norm - 0.5).abs() < 1e-15);
    }
}
