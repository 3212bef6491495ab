use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::Element;
use crate::majorization::MajorizationVerdict;
use crate::spectral::JordanFrame;
use crate::transforms::{LinearMap, SchurMatrix};

/// One inequality inside a check. `holds ⇔ worst_slack ≥ −threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub name: String,
    pub holds: bool,
    pub worst_slack: f64,
    pub threshold: f64,
}

impl Leg {
    pub fn from_verdict(name: &str, v: &MajorizationVerdict) -> Self {
        Self { name: name.into(), holds: v.holds, worst_slack: v.worst_slack, threshold: v.threshold }
    }

    /// Passes when the majorization in `v` does NOT hold.
    pub fn expect_failure(name: &str, v: &MajorizationVerdict) -> Self {
        let slack = -v.worst_slack - v.threshold;
        Self { name: name.into(), holds: slack >= 0.0, worst_slack: slack, threshold: 0.0 }
    }

    /// `lhs ≤ rhs` up to `threshold`.
    pub fn le(name: &str, lhs: f64, rhs: f64, threshold: f64) -> Self {
        let slack = rhs - lhs;
        Self { name: name.into(), holds: slack >= -threshold, worst_slack: slack, threshold }
    }

    /// `|got − want| ≤ tol` entrywise.
    pub fn close(name: &str, got: &[f64], want: &[f64], tol: f64) -> Self {
        let gap = if got.len() == want.len() {
            got.iter().zip(want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
        } else {
            f64::INFINITY
        };
        Self::le(name, gap, tol, 0.0)
    }

    /// `lhs_i ≤ rhs_i` for every `i`, threshold `atol + rtol·scale`.
    pub fn componentwise(name: &str, lhs: &[f64], rhs: &[f64], atol: f64, rtol: f64) -> Self {
        let scale = lhs.iter().chain(rhs).fold(0.0_f64, |m, x| m.max(x.abs()));
        let slack = lhs.iter().zip(rhs).fold(f64::INFINITY, |m, (a, b)| m.min(b - a));
        Self::le(name, 0.0, slack, atol + rtol * scale)
    }
}

/// Inputs needed to replay a failing check.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Witness {
    pub elements: BTreeMap<String, Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<SchurMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<JordanFrame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<LinearMap>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_seed: Option<u64>,
}

impl Witness {
    pub fn with(mut self, name: &str, x: &Element) -> Self {
        self.elements.insert(name.into(), x.clone());
        self
    }

    pub fn param(mut self, name: &str, v: f64) -> Self {
        self.params.insert(name.into(), v);
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub descriptor: String,
    pub seed: Option<u64>,
    pub samples: usize,
    pub pass: bool,
    pub worst_slack: f64,
    pub legs: Vec<Leg>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl VerificationReport {
    /// Single-instance report; the witness is built only on failure.
    pub fn single(check: &str, descriptor: String, legs: Vec<Leg>, witness: impl FnOnce() -> Witness) -> Self {
        let pass = legs.iter().all(|l| l.holds);
        let worst_slack = legs.iter().fold(f64::INFINITY, |m, l| m.min(l.worst_slack));
        Self {
            check: check.into(),
            descriptor,
            seed: None,
            samples: 1,
            pass,
            worst_slack,
            legs,
            stats: BTreeMap::new(),
            witness: if pass { None } else { Some(witness()) },
        }
    }

    pub fn leg(&self, name: &str) -> Option<&Leg> {
        self.legs.iter().find(|l| l.name == name)
    }

    /// Folds per-sample reports (in sample order) into one sweep report:
    /// legs are merged by name keeping the worst slack, the witness is the
    /// first failing sample's.
    pub fn merge(check: &str, descriptor: String, seed: u64, reports: Vec<VerificationReport>) -> Self {
        let mut legs: Vec<Leg> = Vec::new();
        let mut witness = None;
        let mut pass = true;
        let mut worst = f64::INFINITY;
        let mut stats: BTreeMap<String, f64> = BTreeMap::new();
        let samples = reports.len();
        for r in reports {
            pass &= r.pass;
            worst = worst.min(r.worst_slack);
            for l in r.legs {
                match legs.iter_mut().find(|m| m.name == l.name) {
                    Some(m) => {
                        m.holds &= l.holds;
                        if l.worst_slack < m.worst_slack {
                            m.worst_slack = l.worst_slack;
                            m.threshold = l.threshold;
                        }
                    }
                    None => legs.push(l),
                }
            }
            for (k, v) in r.stats {
                *stats.entry(k).or_insert(0.0) += v;
            }
            if witness.is_none() && !r.pass {
                witness = r.witness;
            }
        }
        if samples == 0 {
            worst = 0.0;
        }
        Self { check: check.into(), descriptor, seed: Some(seed), samples, pass, worst_slack: worst, legs, stats, witness }
    }
}
