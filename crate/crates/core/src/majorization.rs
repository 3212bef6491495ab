//! Majorization predicates on real vectors.
//!
//! Slack at `k` is `Q_k − P_k`, where `P_k` and `Q_k` are the partial sums
//! (or partial products) of the decreasing rearrangements of `p` and `q`.
//! A check passes iff the smallest slack is at least `−(atol + rtol·scale)`,
//! with `scale` the largest partial magnitude on either side.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { atol: 1e-9, rtol: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorizationKind {
    Weak,
    Strong,
    WeakLog,
    Log,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorizationVerdict {
    pub kind: MajorizationKind,
    pub holds: bool,
    /// Most negative margin over all `k` (and the total-equality leg for
    /// strong variants).
    pub worst_slack: f64,
    /// The threshold the slack was compared against: `holds ⇔ worst_slack ≥ −threshold`.
    pub threshold: f64,
    /// First failing `k` (1-based).
    pub failing_k: Option<usize>,
}

pub fn sort_desc(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn compwise(p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    check_len(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| a * b).collect())
}

pub fn abs_vec(p: &[f64]) -> Vec<f64> {
    p.iter().map(|x| x.abs()).collect()
}

fn check_len(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch(format!("vectors of length {} and {}", p.len(), q.len())));
    }
    Ok(())
}

fn partials(v: &[f64], product: bool) -> Vec<f64> {
    let mut acc = if product { 1.0 } else { 0.0 };
    v.iter()
        .map(|x| {
            if product {
                acc *= x;
            } else {
                acc += x;
            }
            acc
        })
        .collect()
}

fn verdict(kind: MajorizationKind, pp: &[f64], qq: &[f64], total_equality: bool, tol: Tolerance) -> MajorizationVerdict {
    let scale = pp.iter().chain(qq).fold(0.0_f64, |m, x| m.max(x.abs()));
    let threshold = tol.threshold(scale);
    let mut worst = f64::INFINITY;
    let mut failing_k = None;
    for (k, (a, b)) in pp.iter().zip(qq).enumerate() {
        let slack = b - a;
        worst = worst.min(slack);
        if failing_k.is_none() && !(slack >= -threshold) {
            failing_k = Some(k + 1);
        }
    }
    if total_equality {
        if let (Some(a), Some(b)) = (pp.last(), qq.last()) {
            let slack = -(a - b).abs();
            worst = worst.min(slack);
            if failing_k.is_none() && !(slack >= -threshold) {
                failing_k = Some(pp.len());
            }
        }
    }
    if pp.is_empty() {
        worst = 0.0;
    }
    MajorizationVerdict { kind, holds: worst >= -threshold, worst_slack: worst, threshold, failing_k }
}

/// `p ≺_w q`.
pub fn weak_major(p: &[f64], q: &[f64], tol: Tolerance) -> Result<MajorizationVerdict> {
    check_len(p, q)?;
    let (pp, qq) = (partials(&sort_desc(p), false), partials(&sort_desc(q), false));
    Ok(verdict(MajorizationKind::Weak, &pp, &qq, false, tol))
}

/// `p ≺ q`: weak majorization plus equal totals.
pub fn major(p: &[f64], q: &[f64], tol: Tolerance) -> Result<MajorizationVerdict> {
    check_len(p, q)?;
    let (pp, qq) = (partials(&sort_desc(p), false), partials(&sort_desc(q), false));
    Ok(verdict(MajorizationKind::Strong, &pp, &qq, true, tol))
}

fn clamp_nonneg(p: &[f64], atol: f64) -> Result<Vec<f64>> {
    p.iter()
        .map(|&x| {
            if x >= 0.0 {
                Ok(x)
            } else if x >= -atol {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!("log-majorization needs nonnegative entries, got {x}")))
            }
        })
        .collect()
}

fn product_partials(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (ps, qs) = (sort_desc(p), sort_desc(q));
    let (pp, qq) = (partials(&ps, true), partials(&qs, true));
    if pp.iter().chain(&qq).all(|x| x.is_finite()) {
        return (pp, qq);
    }
    // Overflow: rescale both sides by the same positive constant.
    let m = ps.iter().chain(&qs).fold(0.0_f64, |m, x| m.max(*x));
    let ps: Vec<f64> = ps.iter().map(|x| x / m).collect();
    let qs: Vec<f64> = qs.iter().map(|x| x / m).collect();
    (partials(&ps, true), partials(&qs, true))
}

/// Weak log-majorization of nonnegative vectors (partial products, no logs).
pub fn weak_log_major(p: &[f64], q: &[f64], tol: Tolerance) -> Result<MajorizationVerdict> {
    check_len(p, q)?;
    let (p, q) = (clamp_nonneg(p, tol.atol)?, clamp_nonneg(q, tol.atol)?);
    let (pp, qq) = product_partials(&p, &q);
    Ok(verdict(MajorizationKind::WeakLog, &pp, &qq, false, tol))
}

/// Log-majorization: weak log-majorization plus equal full products.
pub fn log_major(p: &[f64], q: &[f64], tol: Tolerance) -> Result<MajorizationVerdict> {
    check_len(p, q)?;
    let (p, q) = (clamp_nonneg(p, tol.atol)?, clamp_nonneg(q, tol.atol)?);
    let (pp, qq) = product_partials(&p, &q);
    Ok(verdict(MajorizationKind::Log, &pp, &qq, true, tol))
}
