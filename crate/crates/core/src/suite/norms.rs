//! Operator norms `‖T‖_{r→s} = sup ‖T x‖_s / ‖x‖_r` of Schur-type maps.
//!
//! With `d` the multiplier diagonal aligned with the frame,
//! `‖D_A‖_{r→s} = ‖d‖_∞` for `r ≤ s` and `‖d‖_t`, `t = rs/(r−s)`, for `s < r`.
//! At `r = ∞` the relation `1/s = 1/t + 1/r` gives `t = s`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_same, Descriptor, Element};
use crate::error::{Error, Result};
use crate::spectral::{pnorm, spectral_decompose, vec_pnorm, JordanFrame};
use crate::transforms::{lyap, quad_rep, schur, LinearMap, SchurMatrix};

/// `L_a`, `P_a`, or `D_A` relative to a frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormTarget {
    Lyapunov(Element),
    Quadratic(Element),
    Schur { matrix: SchurMatrix, frame: JordanFrame },
}

impl NormTarget {
    pub fn descriptor(&self) -> &Descriptor {
        match self {
            NormTarget::Lyapunov(a) | NormTarget::Quadratic(a) => a.descriptor(),
            NormTarget::Schur { frame, .. } => frame.descriptor(),
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        match self {
            NormTarget::Lyapunov(a) => lyap(a, x),
            NormTarget::Quadratic(a) => quad_rep(a, x),
            NormTarget::Schur { matrix, frame } => schur(matrix, frame, x),
        }
    }

    pub fn to_map(&self) -> LinearMap {
        match self {
            NormTarget::Lyapunov(a) => LinearMap::Lyapunov(a.clone()),
            NormTarget::Quadratic(a) => LinearMap::Quadratic(a.clone()),
            NormTarget::Schur { matrix, frame } => LinearMap::Schur { matrix: matrix.clone(), frame: frame.clone() },
        }
    }

    /// Multiplier diagonal and the frame it is aligned with:
    /// `λ(a)` for `L_a`, `λ(a)²` for `P_a`, `diag A` for `D_A`.
    pub fn diagonal(&self) -> Result<(Vec<f64>, JordanFrame)> {
        match self {
            NormTarget::Lyapunov(a) => {
                let sd = spectral_decompose(a)?;
                Ok((sd.eigenvalues, sd.frame))
            }
            NormTarget::Quadratic(a) => {
                let sd = spectral_decompose(a)?;
                Ok((sd.eigenvalues.iter().map(|l| l * l).collect(), sd.frame))
            }
            NormTarget::Schur { matrix, frame } => {
                if matrix.n() != frame.len() {
                    return Err(Error::SizeMismatch(format!(
                        "{}x{} multiplier for a frame of size {}",
                        matrix.n(),
                        matrix.n(),
                        frame.len()
                    )));
                }
                Ok((matrix.diag(), frame.clone()))
            }
        }
    }
}

fn check_exponent(v: f64) -> Result<()> {
    if v.is_nan() || v < 1.0 {
        return Err(Error::Domain(format!("norm exponents must lie in [1, inf], got {v}")));
    }
    Ok(())
}

/// `t` with `1/s = 1/t + 1/r` for `s < r`; `None` when `r ≤ s`.
pub fn dual_exponent(r: f64, s: f64) -> Result<Option<f64>> {
    check_exponent(r)?;
    check_exponent(s)?;
    if r <= s {
        return Ok(None);
    }
    Ok(Some(if r.is_infinite() { s } else { r * s / (r - s) }))
}

/// `‖T‖_{r→s}` from the diagonal.
pub fn norm_closed_form(target: &NormTarget, r: f64, s: f64) -> Result<f64> {
    let (d, _) = target.diagonal()?;
    match dual_exponent(r, s)? {
        None => vec_pnorm(&d, f64::INFINITY),
        Some(t) => vec_pnorm(&d, t),
    }
}

/// The extremal element: `e_{i*}` with `i* = argmax |d_i|` when `r ≤ s`,
/// otherwise `Σ |d_i|^{t/r} sgn(d_i) e_i` (with `0^0 = 1` and `sgn 0 = 1`).
pub fn documented_witness(target: &NormTarget, r: f64, s: f64) -> Result<Element> {
    let (d, frame) = target.diagonal()?;
    let weights: Vec<f64> = match dual_exponent(r, s)? {
        None => {
            let best = (0..d.len()).fold(0, |b, i| if d[i].abs() > d[b].abs() { i } else { b });
            (0..d.len()).map(|i| if i == best { 1.0 } else { 0.0 }).collect()
        }
        Some(t) => {
            let power = if r.is_infinite() { 0.0 } else { t / r };
            d.iter()
                .map(|&v| {
                    let sign = if v < 0.0 { -1.0 } else { 1.0 };
                    sign * if power == 0.0 { 1.0 } else { v.abs().powf(power) }
                })
                .collect()
        }
    };
    if weights.iter().all(|w| *w == 0.0) {
        return Ok(frame.idempotents()[0].clone());
    }
    frame.combine(&weights)
}

/// `‖T x‖_s / ‖x‖_r`, zero for `x = 0`.
pub fn norm_ratio(target: &NormTarget, x: &Element, r: f64, s: f64) -> Result<f64> {
    check_same(target.descriptor(), x.descriptor())?;
    let den = pnorm(x, r)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(pnorm(&target.apply(x)?, s)? / den)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Best ratio found.
    pub value: f64,
    pub witness: Element,
    pub evaluations: usize,
    /// Ratio at the documented extremal element.
    pub documented_ratio: f64,
}

/// Lower estimate of `‖T‖_{r→s}`: the documented witness first, then
/// Gaussian samples for half the remaining budget, then coordinate ascent
/// from the best point in the orthonormal basis.
pub fn norm_empirical<R: Rng + ?Sized>(
    target: &NormTarget,
    r: f64,
    s: f64,
    budget: usize,
    rng: &mut R,
) -> Result<NormEstimate> {
    if budget == 0 {
        return Err(Error::Domain("norm_empirical needs a budget of at least 1".into()));
    }
    dual_exponent(r, s)?;
    let desc = target.descriptor().clone();
    let witness = documented_witness(target, r, s)?;
    let documented_ratio = norm_ratio(target, &witness, r, s)?;
    let mut best = (documented_ratio, witness.to_orthonormal());
    let mut used = 1;

    let random_budget = (budget - used) / 2;
    for _ in 0..random_budget {
        let v: Vec<f64> = (0..desc.dim()).map(|_| rng.sample(StandardNormal)).collect();
        let ratio = norm_ratio(target, &Element::from_orthonormal(&desc, &v)?, r, s)?;
        used += 1;
        if ratio > best.0 {
            best = (ratio, v);
        }
    }

    let mut step = 0.5 * best.1.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-3);
    'ascent: while used < budget && step > 1e-9 {
        let mut improved = false;
        for i in 0..desc.dim() {
            for dir in [1.0, -1.0] {
                if used >= budget {
                    break 'ascent;
                }
                let mut v = best.1.clone();
                v[i] += dir * step;
                let ratio = norm_ratio(target, &Element::from_orthonormal(&desc, &v)?, r, s)?;
                used += 1;
                if ratio > best.0 {
                    best = (ratio, v);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }

    Ok(NormEstimate {
        value: best.0,
        witness: Element::from_orthonormal(&desc, &best.1)?,
        evaluations: used,
        documented_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::with_spectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const INF: f64 = f64::INFINITY;

    fn diag21() -> NormTarget {
        let d: Descriptor = "sym:2".parse().unwrap();
        NormTarget::Lyapunov(with_spectrum(&JordanFrame::standard(&d), &[2.0, 1.0]).unwrap())
    }

    #[test]
    fn dual_exponent_branches() {
        assert_eq!(dual_exponent(2.0, 2.0).unwrap(), None);
        assert_eq!(dual_exponent(1.0, INF).unwrap(), None);
        assert_eq!(dual_exponent(INF, 1.0).unwrap(), Some(1.0));
        assert_eq!(dual_exponent(INF, 2.0).unwrap(), Some(2.0));
        assert_eq!(dual_exponent(3.0, 2.0).unwrap(), Some(6.0));
        assert!(dual_exponent(0.5, 2.0).is_err());
    }

    #[test]
    fn closed_forms() {
        let t = diag21();
        assert_eq!(norm_closed_form(&t, 2.0, 2.0).unwrap(), 2.0);
        assert_eq!(norm_closed_form(&t, INF, 1.0).unwrap(), 3.0);
        assert!((norm_closed_form(&t, INF, 2.0).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        let a = Element::unit(t.descriptor()).scale(2.0);
        assert_eq!(norm_closed_form(&NormTarget::Quadratic(a), 3.0, 3.0).unwrap(), 4.0);
    }

    #[test]
    fn witness_attains_closed_form() {
        let t = diag21();
        for (r, s) in [(1.0, 1.0), (2.0, 3.0), (INF, 1.0), (INF, 2.0), (3.0, 2.0), (1.0, INF)] {
            let w = documented_witness(&t, r, s).unwrap();
            let ratio = norm_ratio(&t, &w, r, s).unwrap();
            assert!((ratio - norm_closed_form(&t, r, s).unwrap()).abs() < 1e-12, "({r},{s})");
        }
    }

    #[test]
    fn empirical_respects_bound() {
        let t = diag21();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = norm_empirical(&t, 2.0, 1.0, 200, &mut rng).unwrap();
        let closed = norm_closed_form(&t, 2.0, 1.0).unwrap();
        assert!(est.value <= closed + 1e-9 * closed);
        assert!(est.value >= closed - 1e-6 * closed);
        assert_eq!(est.evaluations, 200);
        assert!(norm_empirical(&t, 2.0, 1.0, 0, &mut rng).is_err());
    }

    #[test]
    fn zero_diagonal_norm_is_zero() {
        let d: Descriptor = "sym:2".parse().unwrap();
        let m = SchurMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let t = NormTarget::Schur { matrix: m, frame: JordanFrame::standard(&d) };
        assert_eq!(norm_closed_form(&t, 3.0, 1.0).unwrap(), 0.0);
        let w = documented_witness(&t, 3.0, 1.0).unwrap();
        assert_eq!(norm_ratio(&t, &w, 3.0, 1.0).unwrap(), 0.0);
    }
}
