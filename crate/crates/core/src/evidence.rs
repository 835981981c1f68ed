//! Per-cloud reliability evidence and the bottom-up safety-case bound.
//!
//! Rates are crisp counts over the instances assigned to each cloud. The
//! shortlist treats `rate + delta_q` as a one-sided upper bound.

use std::fmt::Write as _;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{FeatureKind, FeatureSchema, ObservationVector};
use crate::engine::{Datacloud, EngineError, FuzzyMonitorModel};

pub const DEFAULT_CONFIDENCE: f64 = 99.0;
pub const DEFAULT_MAX_MP_RATE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum EvidenceError {
    #[error("cloud {0} has no supporting instances")]
    EmptyCloud(u64),
    #[error("total instance count must be positive")]
    EmptyDataset,
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn domain(msg: impl Into<String>) -> EvidenceError {
    EvidenceError::Domain(msg.into())
}

/// `P(mP | D_k) = mp_count / S_k`.
pub fn misperception_rate(cloud: &Datacloud) -> Result<f64, EvidenceError> {
    ratio(cloud.mp_count, cloud.support).ok_or(EvidenceError::EmptyCloud(cloud.id))
}

/// Frame-level hazardous-misperception rate `hmp_count / S_k`.
pub fn hmp_rate(cloud: &Datacloud) -> Result<f64, EvidenceError> {
    ratio(cloud.hmp_count, cloud.support).ok_or(EvidenceError::EmptyCloud(cloud.id))
}

/// Share of all instances that fall in the cloud, `S_k / |Omega|`.
pub fn exposure(cloud: &Datacloud, total: u64) -> Result<f64, EvidenceError> {
    if total == 0 {
        return Err(EvidenceError::EmptyDataset);
    }
    if cloud.support > total {
        return Err(domain(format!("cloud {} support exceeds |Omega| = {total}", cloud.id)));
    }
    Ok(cloud.support as f64 / total as f64)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Standard normal quantile, Wichura's AS241 (PPND16), relative accuracy
/// about 1e-16.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let v = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_854_561,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

/// Two-sided `q`% normal-approximation error of a rate `gamma` estimated
/// from `n` instances: `z * sqrt(gamma (1 - gamma) / n)` with
/// `z = Phi^-1((100 + q) / 200)`.
pub fn sampling_error(gamma: f64, n: u64, q: f64) -> Result<f64, EvidenceError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain(format!("rate {gamma} outside [0, 1]")));
    }
    if n == 0 {
        return Err(domain("sampling error needs n >= 1"));
    }
    if !(q > 0.0 && q < 100.0) {
        return Err(domain(format!("confidence {q} outside (0, 100)")));
    }
    let z = normal_quantile((100.0 + q) / 200.0);
    Ok(z * (gamma * (1.0 - gamma) / n as f64).sqrt())
}

/// Crisp per-cloud counts, either the training counts kept by the model or
/// a recount over some dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub id: u64,
    pub support: u64,
    pub mp_count: u64,
    pub hmp_count: u64,
}

impl From<&Datacloud> for Tally {
    fn from(c: &Datacloud) -> Self {
        Self {
            id: c.id,
            support: c.support,
            mp_count: c.mp_count,
            hmp_count: c.hmp_count,
        }
    }
}

pub fn model_tally(model: &FuzzyMonitorModel) -> Vec<Tally> {
    model.clouds.iter().map(Tally::from).collect()
}

/// Recounts a dataset by assigning each observation to its highest-membership
/// cloud (lowest id on ties).
pub fn dataset_tally(model: &FuzzyMonitorModel, data: &[ObservationVector]) -> Result<Vec<Tally>, EvidenceError> {
    if model.is_empty() {
        return Err(EngineError::Untrained.into());
    }
    let mut tally: Vec<Tally> = model
        .clouds
        .iter()
        .map(|c| Tally {
            id: c.id,
            support: 0,
            mp_count: 0,
            hmp_count: 0,
        })
        .collect();
    for o in data {
        let firing = model.predict(o.as_slice())?.firing;
        let mut best = 0;
        for (i, f) in firing.iter().enumerate() {
            if *f > firing[best] {
                best = i;
            }
        }
        let t = &mut tally[best];
        t.support += 1;
        if o.mp() {
            t.mp_count += 1;
            if o.hmp() {
                t.hmp_count += 1;
            }
        }
    }
    Ok(tally)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudEvidence {
    pub id: u64,
    pub support: u64,
    pub mp_rate: f64,
    /// `Delta_q` of `mp_rate`.
    pub mp_delta: f64,
    pub hmp_rate: f64,
    /// `Delta_q` of `hmp_rate`.
    pub hmp_delta: f64,
    pub exposure: f64,
    /// Rule output at the cloud's own prototype.
    pub rule_output: f64,
    pub reliable: bool,
    /// Unreliability is established: the rule maps the prototype to 0.5 or
    /// above, or `mp_rate - Delta_q > max_mp_rate`. Excluded clouds that are
    /// not unreliable are merely inconclusive.
    pub unreliable: bool,
    /// Encoded prototype.
    pub prototype: Vec<f64>,
}

/// Evidence for every cloud of `model` from the given counts.
///
/// A cloud is reliable iff its rule maps its prototype below 0.5 and
/// `mp_rate + Delta_q <= max_mp_rate`. Clouds with no instances in the
/// tally carry no evidence and are never reliable; they are unreliable
/// only through their rule.
pub fn collect_evidence(
    model: &FuzzyMonitorModel,
    tally: &[Tally],
    total: u64,
    q: f64,
    max_mp_rate: f64,
) -> Result<Vec<CloudEvidence>, EvidenceError> {
    if model.is_empty() {
        return Err(EngineError::Untrained.into());
    }
    if total == 0 {
        return Err(EvidenceError::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&max_mp_rate) {
        return Err(domain(format!("max_mp_rate {max_mp_rate} outside [0, 1]")));
    }
    let counted: u64 = tally.iter().map(|t| t.support).sum();
    if counted > total {
        return Err(domain(format!("tally covers {counted} instances, more than |Omega| = {total}")));
    }
    let mut out = Vec::with_capacity(model.clouds.len());
    for cloud in &model.clouds {
        let t = tally
            .iter()
            .find(|t| t.id == cloud.id)
            .ok_or_else(|| domain(format!("no tally for cloud {}", cloud.id)))?;
        let rule_output = cloud.consequent.output(&cloud.prototype);
        let ev = if t.support == 0 {
            CloudEvidence {
                id: cloud.id,
                support: 0,
                mp_rate: 0.0,
                mp_delta: 0.0,
                hmp_rate: 0.0,
                hmp_delta: 0.0,
                exposure: 0.0,
                rule_output,
                reliable: false,
                unreliable: rule_output >= 0.5,
                prototype: cloud.prototype.clone(),
            }
        } else {
            let mp_rate = t.mp_count as f64 / t.support as f64;
            let hmp_rate = t.hmp_count as f64 / t.support as f64;
            let mp_delta = sampling_error(mp_rate, t.support, q)?;
            CloudEvidence {
                id: cloud.id,
                support: t.support,
                mp_rate,
                mp_delta,
                hmp_rate,
                hmp_delta: sampling_error(hmp_rate, t.support, q)?,
                exposure: t.support as f64 / total as f64,
                rule_output,
                reliable: rule_output < 0.5 && mp_rate + mp_delta <= max_mp_rate,
                unreliable: rule_output >= 0.5 || mp_rate - mp_delta > max_mp_rate,
                prototype: cloud.prototype.clone(),
            }
        };
        out.push(ev);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shortlist {
    pub included: Vec<u64>,
    pub excluded: Vec<u64>,
    pub evidence: Vec<CloudEvidence>,
}

impl Shortlist {
    pub fn from_evidence(evidence: Vec<CloudEvidence>) -> Self {
        let (inc, exc): (Vec<_>, Vec<_>) = evidence.iter().partition(|e| e.reliable);
        Self {
            included: inc.iter().map(|e| e.id).collect(),
            excluded: exc.iter().map(|e| e.id).collect(),
            evidence,
        }
    }

    pub fn is_included(&self, id: u64) -> bool {
        self.included.contains(&id)
    }
}

/// Shortlist on the model's own training counts, with `|Omega| = n_seen`.
pub fn shortlist_clouds(model: &FuzzyMonitorModel, q: f64, max_mp_rate: f64) -> Result<Shortlist, EvidenceError> {
    let evidence = collect_evidence(model, &model_tally(model), model.global.n_seen, q, max_mp_rate)?;
    Ok(Shortlist::from_evidence(evidence))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCaseParams {
    /// Acceptable top-level hazard rate.
    pub gamma_c: f64,
    /// Probability that a hazardous misperception ends in a crash.
    pub gamma_cr: f64,
    pub speed_kmh: f64,
    pub frame_rate: f64,
    /// Distance between stopped-car-ahead encounters.
    pub spacing_m: f64,
    pub q: f64,
}

impl Default for SafetyCaseParams {
    fn default() -> Self {
        Self {
            gamma_c: 1e-3,
            gamma_cr: 1.0,
            speed_kmh: 40.0,
            frame_rate: 10.0,
            spacing_m: 500.0,
            q: DEFAULT_CONFIDENCE,
        }
    }
}

impl SafetyCaseParams {
    pub fn validate(&self) -> Result<(), EvidenceError> {
        for (name, v) in [("gamma_c", self.gamma_c), ("gamma_cr", self.gamma_cr)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (name, v) in [
            ("speed", self.speed_kmh),
            ("frame rate", self.frame_rate),
            ("spacing", self.spacing_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive")));
            }
        }
        if !(self.q > 0.0 && self.q < 100.0) {
            return Err(domain(format!("confidence {} outside (0, 100)", self.q)));
        }
        Ok(())
    }

    /// Per-frame scenario rate: metres travelled per frame over the spacing.
    pub fn gamma_sca(&self) -> f64 {
        self.speed_kmh / 3.6 / self.frame_rate / self.spacing_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Acceptable,
    Unacceptable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCase {
    pub included: Vec<CloudEvidence>,
    pub excluded: Vec<u64>,
    pub gamma_b: f64,
    pub gamma_sca: f64,
    pub gamma_cr: f64,
    pub gamma_a: f64,
    pub gamma_c: f64,
    pub gamma_res: f64,
    pub verdict: Verdict,
}

impl SafetyCase {
    /// Case for an already accumulated `gamma_b`.
    pub fn from_gamma_b(gamma_b: f64, params: &SafetyCaseParams) -> Result<Self, EvidenceError> {
        params.validate()?;
        if !(0.0..=1.0).contains(&gamma_b) {
            return Err(domain(format!("gamma_b = {gamma_b} outside [0, 1]")));
        }
        let gamma_sca = params.gamma_sca();
        let gamma_a = params.gamma_cr * gamma_b * gamma_sca;
        let gamma_res = params.gamma_c - gamma_a;
        Ok(Self {
            included: Vec::new(),
            excluded: Vec::new(),
            gamma_b,
            gamma_sca,
            gamma_cr: params.gamma_cr,
            gamma_a,
            gamma_c: params.gamma_c,
            gamma_res,
            verdict: if gamma_res >= 0.0 {
                Verdict::Acceptable
            } else {
                Verdict::Unacceptable
            },
        })
    }
}

/// Accumulates `gamma_B = sum_k gamma_mu(k) * gamma_o(k)` over the reliable
/// clouds and derives the scenario-level bound.
pub fn assemble_safety_case(evidence: &[CloudEvidence], params: &SafetyCaseParams) -> Result<SafetyCase, EvidenceError> {
    let (included, excluded): (Vec<&CloudEvidence>, Vec<&CloudEvidence>) = evidence.iter().partition(|e| e.reliable);
    if included.is_empty() {
        warn!("no cloud passed the shortlist; gamma_B is vacuously 0");
    }
    let gamma_b: f64 = included.iter().map(|e| e.hmp_rate * e.exposure).sum();
    let mut case = SafetyCase::from_gamma_b(gamma_b.min(1.0), params)?;
    case.included = included.into_iter().cloned().collect();
    case.excluded = excluded.iter().map(|e| e.id).collect();
    Ok(case)
}

/// One row of the accumulated-evidence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub bound: String,
    pub description: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub q: f64,
    pub max_mp_rate: f64,
    pub total_instances: u64,
    pub clouds: Vec<CloudReport>,
    pub included: Vec<u64>,
    pub excluded: Vec<u64>,
    pub bounds: Vec<BoundRow>,
    pub gamma_c: f64,
    pub gamma_res: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudReport {
    #[serde(flatten)]
    pub evidence: CloudEvidence,
    /// Prototype decoded to raw feature values.
    pub conditions: Vec<String>,
}

impl EvidenceReport {
    pub fn new(
        schema: &FeatureSchema,
        evidence: &[CloudEvidence],
        case: &SafetyCase,
        params: &SafetyCaseParams,
        max_mp_rate: f64,
        total_instances: u64,
    ) -> Self {
        let bounds = vec![
            BoundRow {
                bound: "mP occurrence rate".into(),
                description: "gamma_B = sum_k (gamma_mu * gamma_o)".into(),
                value: case.gamma_b,
            },
            BoundRow {
                bound: "SCA occurrence rate".into(),
                description: format!(
                    "gamma_SCA = ({} [km/h] / {} [fps]) / {} [m]",
                    params.speed_kmh, params.frame_rate, params.spacing_m
                ),
                value: case.gamma_sca,
            },
            BoundRow {
                bound: "crash rate".into(),
                description: "gamma_cr".into(),
                value: case.gamma_cr,
            },
            BoundRow {
                bound: "HmP_SCA rate".into(),
                description: "gamma_A = gamma_cr * gamma_B * gamma_SCA".into(),
                value: case.gamma_a,
            },
        ];
        Self {
            q: params.q,
            max_mp_rate,
            total_instances,
            clouds: evidence
                .iter()
                .map(|e| CloudReport {
                    evidence: e.clone(),
                    conditions: describe_prototype(schema, &e.prototype),
                })
                .collect(),
            included: case.included.iter().map(|e| e.id).collect(),
            excluded: case.excluded.clone(),
            bounds,
            gamma_c: case.gamma_c,
            gamma_res: case.gamma_res,
            verdict: case.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ids: Vec<String> = self.included.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "Accumulated evidence (included clouds: {})", ids.join(","));
        let _ = writeln!(s, "{:<20} | {:<46} | {:>12}", "Safety Bound", "Description", "Value");
        let _ = writeln!(s, "{}", "-".repeat(84));
        for r in &self.bounds {
            let _ = writeln!(s, "{:<20} | {:<46} | {:>12.4e}", r.bound, r.description, r.value);
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "gamma_C   = {:.4e}", self.gamma_c);
        let _ = writeln!(s, "gamma_res = {:.4e}", self.gamma_res);
        let _ = writeln!(
            s,
            "verdict   = {}",
            match self.verdict {
                Verdict::Acceptable => "acceptable",
                Verdict::Unacceptable => "unacceptable",
            }
        );
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>5} {:>7} {:>8} {:>8} {:>8} {:>8} {:>7}  {:<8} prototype",
            "cloud", "support", "P(mP)", "Delta", "gamma_mu", "gamma_o", "rule", "status"
        );
        for c in &self.clouds {
            let e = &c.evidence;
            let _ = writeln!(
                s,
                "{:>5} {:>7} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>7.3}  {:<8} [{}]",
                e.id,
                e.support,
                e.mp_rate,
                e.mp_delta,
                e.hmp_rate,
                e.exposure,
                e.rule_output,
                match (e.reliable, e.unreliable) {
                    (true, _) => "include",
                    (false, true) => "exclude",
                    (false, false) => "unknown",
                },
                c.conditions.join(", ")
            );
        }
        s
    }
}

/// Raw-unit rendering of an encoded prototype, one entry per feature.
pub fn describe_prototype(schema: &FeatureSchema, prototype: &[f64]) -> Vec<String> {
    schema
        .features
        .iter()
        .enumerate()
        .map(|(i, f)| match &f.kind {
            FeatureKind::Categorical { .. } => schema.decode_category(i, prototype).unwrap_or("?").to_string(),
            FeatureKind::Boolean => {
                let v = prototype[schema.offset(i)];
                format!("{}={:.2}", f.name, v)
            }
            FeatureKind::Numeric { .. } => {
                let v = schema.decode_numeric(i, prototype).unwrap_or(f64::NAN);
                format!("{}={}", f.name, round3(v))
            }
        })
        .collect()
}

pub(crate) fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Consequent, Origin};

    fn cloud(support: u64, mp: u64, hmp: u64) -> Datacloud {
        let mut c = Datacloud::new(3, &[0.0], Consequent::new(2, 0.0, 1000.0), 0, Origin::Discovered);
        c.support = support;
        c.mp_count = mp;
        c.hmp_count = hmp;
        c
    }

    #[test]
    fn rate_examples() {
        assert_eq!(misperception_rate(&cloud(100, 0, 0)).unwrap(), 0.0);
        assert_eq!(misperception_rate(&cloud(100, 100, 0)).unwrap(), 1.0);
        assert_eq!(misperception_rate(&cloud(100, 13, 0)).unwrap(), 0.13);
        assert!(matches!(misperception_rate(&cloud(0, 0, 0)), Err(EvidenceError::EmptyCloud(3))));
        assert_eq!(hmp_rate(&cloud(200, 0, 0)).unwrap(), 0.0);
        assert_eq!(hmp_rate(&cloud(200, 200, 200)).unwrap(), 1.0);
        assert_eq!(hmp_rate(&cloud(200, 10, 5)).unwrap(), 0.025);
    }

    #[test]
    fn exposure_examples() {
        assert_eq!(exposure(&cloud(250, 0, 0), 1000).unwrap(), 0.25);
        assert_eq!(exposure(&cloud(0, 0, 0), 1000).unwrap(), 0.0);
        assert_eq!(exposure(&cloud(1000, 0, 0), 1000).unwrap(), 1.0);
        assert!(matches!(exposure(&cloud(0, 0, 0), 0), Err(EvidenceError::EmptyDataset)));
    }

    #[test]
    fn sampling_error_examples() {
        assert_eq!(sampling_error(0.0, 10, 99.0).unwrap(), 0.0);
        assert_eq!(sampling_error(1.0, 10, 99.0).unwrap(), 0.0);
        assert!((sampling_error(0.5, 100, 99.0).unwrap() - 0.12879).abs() < 1e-4);
        assert!((sampling_error(0.1, 1000, 95.0).unwrap() - 0.018594).abs() < 1e-5);
        assert!(sampling_error(1.2, 10, 99.0).is_err());
        assert!(sampling_error(0.5, 0, 99.0).is_err());
        assert!(sampling_error(0.5, 10, 100.0).is_err());
    }

    #[test]
    fn quantile_reference_points() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.995) - 2.575_829_303_548_901).abs() < 1e-12);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(0.025) + 1.959_963_984_540_054).abs() < 1e-12);
        assert!((normal_quantile(1e-20) + 9.262_340_089_798_409).abs() < 1e-9);
        assert!((normal_quantile(1e-300) + 37.047_096_299_361_2).abs() < 1e-8);
    }

    #[test]
    fn table_arithmetic() {
        let params = SafetyCaseParams::default();
        let case = SafetyCase::from_gamma_b(0.23185, &params).unwrap();
        assert!((case.gamma_sca - 2.222e-3).abs() < 1e-6);
        assert!((case.gamma_a - 5.152e-4).abs() < 1e-6);
        assert_eq!(case.verdict, Verdict::Acceptable);
        let strict = SafetyCaseParams {
            gamma_c: 1e-4,
            ..params
        };
        assert_eq!(
            SafetyCase::from_gamma_b(0.23185, &strict).unwrap().verdict,
            Verdict::Unacceptable
        );
    }

    fn ev(id: u64, hmp_rate: f64, exposure: f64, reliable: bool) -> CloudEvidence {
        CloudEvidence {
            id,
            support: 10,
            mp_rate: hmp_rate,
            mp_delta: 0.0,
            hmp_rate,
            hmp_delta: 0.0,
            exposure,
            rule_output: 0.0,
            reliable,
            unreliable: !reliable,
            prototype: vec![0.0],
        }
    }

    #[test]
    fn gamma_b_sums_included_only() {
        let params = SafetyCaseParams::default();
        let list = [ev(0, 0.1, 0.5, true), ev(1, 0.2, 0.25, true), ev(2, 0.9, 0.25, false)];
        let case = assemble_safety_case(&list, &params).unwrap();
        assert!((case.gamma_b - 0.1).abs() < 1e-15);
        assert_eq!(case.excluded, vec![2]);
        assert_eq!(case.gamma_a, case.gamma_cr * case.gamma_b * case.gamma_sca);

        let none = assemble_safety_case(&[ev(0, 0.5, 1.0, false)], &params).unwrap();
        assert_eq!(none.gamma_b, 0.0);
        assert_eq!(none.gamma_a, 0.0);
        assert_eq!(none.verdict, Verdict::Acceptable);
    }
}
