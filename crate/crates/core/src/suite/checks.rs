use crate::algebra::{check_same, commutator_defect, jordan_product, Element};
use crate::error::{Error, Result};
use crate::majorization::{compwise, log_major, major, sort_desc, weak_major, Tolerance};
use crate::spectral::{
    abs_el, det, eigvals, lambda_min, pnorm, spectral_decompose, sqrt_el, trace, JordanFrame,
};
use crate::transforms::{apply_sublinear, quad_rep, quad_rep_sqrt, schur, LinearMap, SchurMatrix, SublinearFn};

use super::report::{Leg, VerificationReport, Witness};

/// Relative tolerance of the determinant identities.
pub const DET_RTOL: f64 = 1e-8;

/// Slack at or below which a passing weak-majorization is counted as
/// near-equality.
pub const NEAR_EQUALITY: f64 = 1e-6;

fn require_cone(x: &Element, name: &str, tol: Tolerance) -> Result<()> {
    let low = lambda_min(x)?;
    if low < -tol.threshold(x.norm()) {
        return Err(Error::Domain(format!("{name} must lie in the symmetric cone (smallest eigenvalue {low})")));
    }
    Ok(())
}

fn pair(a: &Element, b: &Element) -> Witness {
    Witness::default().with("a", a).with("b", b)
}

fn phi_params(w: Witness, phi: SublinearFn) -> Witness {
    w.param("phi_alpha", phi.alpha()).param("phi_beta", phi.beta())
}

/// `λ(P_√a(b)) ≺_log λ(a)*λ(b)` for `a, b ≥ 0`, plus its weak consequence
/// and `det P_√a(b) = det a · det b`.
pub fn check_log_major_quadrep(a: &Element, b: &Element, tol: Tolerance) -> Result<VerificationReport> {
    check_same(a.descriptor(), b.descriptor())?;
    require_cone(a, "a", tol)?;
    require_cone(b, "b", tol)?;
    let lhs = eigvals(&quad_rep_sqrt(a, b, tol.threshold(a.norm()))?)?;
    let rhs = compwise(&eigvals(a)?, &eigvals(b)?)?;
    let log = log_major(&lhs, &rhs, tol)?;
    let weak = weak_major(&lhs, &rhs, tol)?;

    let (d_lhs, d_rhs) = (lhs.iter().product::<f64>(), rhs.iter().product::<f64>());
    // First-order error of a determinant computed from eigenvalues is
    // ε·Π_{i<n} q_i, so near-singular inputs get that as a floor.
    let sorted = sort_desc(&rhs);
    let floor = tol.atol * sorted[..sorted.len() - 1].iter().product::<f64>();
    let det_leg = Leg::le("det", (d_lhs - d_rhs).abs(), DET_RTOL * d_rhs.abs() + floor, 0.0);

    Ok(VerificationReport::single(
        "log_major_quadrep",
        a.descriptor().to_string(),
        vec![Leg::from_verdict("log", &log), Leg::from_verdict("weak", &weak), det_leg],
        || pair(a, b),
    ))
}

/// `λ(P_√a(b)) ≤ ‖a‖_∞ λ(b)` componentwise, `a, b ≥ 0`.
pub fn check_lemma32(a: &Element, b: &Element, tol: Tolerance) -> Result<VerificationReport> {
    check_same(a.descriptor(), b.descriptor())?;
    require_cone(a, "a", tol)?;
    require_cone(b, "b", tol)?;
    let lhs = eigvals(&quad_rep_sqrt(a, b, tol.threshold(a.norm()))?)?;
    let na = pnorm(a, f64::INFINITY)?;
    let rhs: Vec<f64> = eigvals(b)?.iter().map(|l| na * l).collect();
    Ok(VerificationReport::single(
        "lemma32",
        a.descriptor().to_string(),
        vec![Leg::componentwise("componentwise", &lhs, &rhs, tol.atol, tol.rtol)],
        || pair(a, b),
    ))
}

/// Elements built from an invertible `a` and an index `k`.
#[derive(Clone, Debug)]
pub struct Lemma33 {
    pub x: Element,
    pub y: Element,
    pub report: VerificationReport,
}

/// Builds `x`, `y` from the spectral decomposition of `a` ordered by
/// decreasing `|a_i|`, and checks `x ≥ e`, operator commutation,
/// `P_√x(y) = a`, `P_x(y²) = a²`, `det(x)·‖y‖_∞^k = Π_{i≤k} |a_i|`.
pub fn lemma33_construct(a: &Element, k: usize, tol: Tolerance) -> Result<Lemma33> {
    let desc = a.descriptor();
    let n = desc.rank();
    if k == 0 || k > n {
        return Err(Error::OutOfRange { index: k, max: n });
    }
    let sd = spectral_decompose(a)?;
    if let Some(l) = sd.eigenvalues.iter().find(|l| l.abs() <= tol.atol) {
        return Err(Error::Domain(format!("a must be invertible (eigenvalue {l})")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sd.eigenvalues[j].abs().partial_cmp(&sd.eigenvalues[i].abs()).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| sd.eigenvalues[i]).collect();
    let frame = JordanFrame::new(order.iter().map(|&i| sd.frame.idempotents()[i].clone()).collect())?;

    let ak = vals[k - 1].abs();
    let xw: Vec<f64> = (0..n).map(|i| if i < k { vals[i].abs() / ak } else { 1.0 }).collect();
    let yw: Vec<f64> = (0..n).map(|i| if i < k { ak * vals[i].signum() } else { vals[i] }).collect();
    let x = frame.combine(&xw)?;
    let y = frame.combine(&yw)?;
    let e = Element::unit(desc);

    let scale = a.norm().max(1.0);
    let ge = Leg::le("x_ge_e", 0.0, lambda_min(&x.try_sub(&e)?)?, tol.threshold(x.norm()));
    let commute = Leg::le("commute", commutator_defect(&x, &y)?, 0.0, tol.threshold(x.norm() * y.norm()));
    let p1 = quad_rep(&sqrt_el(&x, tol.atol)?, &y)?.try_sub(a)?.norm();
    let p2 = quad_rep(&x, &y.square())?.try_sub(&a.square())?.norm();
    let recon = Leg::le("sqrt_x_y", p1, 0.0, tol.threshold(scale));
    let recon2 = Leg::le("x_y2", p2, 0.0, tol.threshold(scale * scale));
    let lhs = det(&x)? * pnorm(&y, f64::INFINITY)?.powi(k as i32);
    let rhs: f64 = vals[..k].iter().map(|v| v.abs()).product();
    let det_leg = Leg::le("det", (lhs - rhs).abs(), DET_RTOL * rhs.abs(), 0.0);

    let report = VerificationReport::single(
        "lemma33",
        desc.to_string(),
        vec![ge, commute, recon, recon2, det_leg],
        || Witness::default().with("a", a).param("k", k as f64),
    );
    Ok(Lemma33 { x, y, report })
}

/// `φ(P(x)) ≺_w P(φ(x))` for a positive linear map `P`.
pub fn check_positive_map_sublinear(
    map: &LinearMap,
    x: &Element,
    phi: SublinearFn,
    tol: Tolerance,
) -> Result<VerificationReport> {
    if let Some(d) = map.descriptor() {
        check_same(&d, x.descriptor())?;
    }
    map.certify_positive(tol.atol.max(1e-9))?;
    let lhs = eigvals(&apply_sublinear(phi, &map.apply(x)?)?)?;
    let rhs = eigvals(&map.apply(&apply_sublinear(phi, x)?)?)?;
    let v = weak_major(&lhs, &rhs, tol)?;
    Ok(VerificationReport::single(
        "positive_map_sublinear",
        x.descriptor().to_string(),
        vec![Leg::from_verdict("weak", &v)],
        || {
            let mut w = phi_params(Witness::default().with("x", x), phi);
            w.map = Some(map.clone());
            w
        },
    ))
}

/// `λ(φ(P_a(b))) ≺_w λ(a²)*λ(φ(b))` for nonnegative sublinear `φ`.
pub fn check_pa_sublinear(a: &Element, b: &Element, phi: SublinearFn, tol: Tolerance) -> Result<VerificationReport> {
    check_same(a.descriptor(), b.descriptor())?;
    if !phi.is_nonnegative() {
        return Err(Error::Domain("check_pa_sublinear needs a nonnegative sublinear function".into()));
    }
    let lhs = eigvals(&apply_sublinear(phi, &quad_rep(a, b)?)?)?;
    let rhs = compwise(&eigvals(&a.square())?, &eigvals(&apply_sublinear(phi, b)?)?)?;
    let v = weak_major(&lhs, &rhs, tol)?;
    Ok(VerificationReport::single(
        "pa_sublinear",
        a.descriptor().to_string(),
        vec![Leg::from_verdict("weak", &v)],
        || phi_params(pair(a, b), phi),
    ))
}

/// For PSD `A`: `λ(φ(A•b)) ≺_w λ(diag A)*λ(φ(b))` and `φ(A•b) ≺_w A•φ(b)`.
pub fn check_schur_diag(
    matrix: &SchurMatrix,
    frame: &JordanFrame,
    b: &Element,
    phi: SublinearFn,
    tol: Tolerance,
) -> Result<VerificationReport> {
    check_same(frame.descriptor(), b.descriptor())?;
    if !phi.is_nonnegative() {
        return Err(Error::Domain("check_schur_diag needs a nonnegative sublinear function".into()));
    }
    if !matrix.is_psd(tol.atol)? {
        return Err(Error::NotPositive("multiplier matrix must be positive semidefinite".into()));
    }
    let ab = schur(matrix, frame, b)?;
    let lhs = eigvals(&apply_sublinear(phi, &ab)?)?;
    let phib = apply_sublinear(phi, b)?;
    let diag_rhs = compwise(&sort_desc(&matrix.diag()), &eigvals(&phib)?)?;
    let schur_rhs = eigvals(&schur(matrix, frame, &phib)?)?;
    let legs = vec![
        Leg::from_verdict("diag", &weak_major(&lhs, &diag_rhs, tol)?),
        Leg::from_verdict("schur", &weak_major(&lhs, &schur_rhs, tol)?),
    ];
    Ok(VerificationReport::single("schur_diag", b.descriptor().to_string(), legs, || {
        let mut w = phi_params(Witness::default().with("b", b), phi);
        w.matrix = Some(matrix.clone());
        w.frame = Some(frame.clone());
        w
    }))
}

/// `λ(|a∘b|) ≺_w λ(|a|)*λ(|b|)`. Records near-equality (slack ≤ 1e-6) as
/// the `near_equality` statistic without asserting anything about it.
pub fn check_jordan_weak(a: &Element, b: &Element, tol: Tolerance) -> Result<VerificationReport> {
    let lhs = eigvals(&abs_el(&jordan_product(a, b)?)?)?;
    let rhs = compwise(&eigvals(&abs_el(a)?)?, &eigvals(&abs_el(b)?)?)?;
    let v = weak_major(&lhs, &rhs, tol)?;
    let mut report =
        VerificationReport::single("jordan_weak", a.descriptor().to_string(), vec![Leg::from_verdict("weak", &v)], || {
            pair(a, b)
        });
    let near = if v.holds && v.worst_slack <= NEAR_EQUALITY { 1.0 } else { 0.0 };
    report.stats.insert("near_equality".into(), near);
    Ok(report)
}

/// The 2×2 matrices of the worked example.
pub fn example_47() -> (Element, Element) {
    let a = Element::from_sym_rows(&[vec![8.0, 3.0], vec![3.0, 0.0]]).expect("symmetric");
    let b = Element::from_sym_rows(&[vec![0.0, 3.0], vec![3.0, 8.0]]).expect("symmetric");
    (a, b)
}

pub const EXAMPLE_47_ABS_JORDAN: [f64; 2] = [33.0, 15.0];
pub const EXAMPLE_47_JORDAN_ABS: [f64; 2] = [44.52, -3.48];

/// Eigenvalue pairs of the worked example: `(λ(|A∘B|), λ(|A|∘|B|))`.
pub fn example_47_values() -> Result<(Vec<f64>, Vec<f64>)> {
    let (a, b) = example_47();
    let lhs = eigvals(&abs_el(&jordan_product(&a, &b)?)?)?;
    let rhs = eigvals(&jordan_product(&abs_el(&a)?, &abs_el(&b)?)?)?;
    Ok((lhs, rhs))
}

/// Reproduces the worked example: `λ(|A∘B|) = (33, 15)`,
/// `λ(|A|∘|B|) ≈ (44.52, −3.48)`, and neither weak majorization between
/// them holds. Also confirms the bound `λ(|A|)*λ(|B|) = (81, 1)`.
pub fn check_example_47(tol: Tolerance) -> Result<VerificationReport> {
    let (a, b) = example_47();
    let (lhs, rhs) = example_47_values()?;
    let bound = compwise(&eigvals(&abs_el(&a)?)?, &eigvals(&abs_el(&b)?)?)?;
    let legs = vec![
        Leg::close("abs_jordan", &lhs, &EXAMPLE_47_ABS_JORDAN, 1e-9),
        Leg::close("jordan_abs", &rhs, &EXAMPLE_47_JORDAN_ABS, 1e-2),
        Leg::expect_failure("forward_fails", &weak_major(&lhs, &rhs, tol)?),
        Leg::expect_failure("reverse_fails", &weak_major(&rhs, &lhs, tol)?),
        Leg::from_verdict("theorem_bound", &weak_major(&lhs, &bound, tol)?),
    ];
    Ok(VerificationReport::single("example_47", a.descriptor().to_string(), legs, || pair(&a, &b)))
}

/// `λ(P_√a(b)) ≺ λ(a∘b)` for `a ≥ 0` (with the trace equality it forces),
/// and optionally `A•b ≺ P_√a'(b)` with `a' = Σ a_ii e_i` for a PSD `A`.
pub fn check_remark_pinch(
    a: &Element,
    b: &Element,
    schur_leg: Option<(&SchurMatrix, &JordanFrame)>,
    tol: Tolerance,
) -> Result<VerificationReport> {
    check_same(a.descriptor(), b.descriptor())?;
    require_cone(a, "a", tol)?;
    let p = quad_rep_sqrt(a, b, tol.threshold(a.norm()))?;
    let ab = jordan_product(a, b)?;
    let (tp, tab) = (trace(&p), trace(&ab));
    let mut legs = vec![
        Leg::from_verdict("pinch", &major(&eigvals(&p)?, &eigvals(&ab)?, tol)?),
        Leg::le("trace", (tp - tab).abs(), 0.0, tol.threshold(tp.abs().max(tab.abs()))),
    ];
    if let Some((m, frame)) = schur_leg {
        check_same(frame.descriptor(), b.descriptor())?;
        if !m.is_psd(tol.atol)? {
            return Err(Error::NotPositive("multiplier matrix must be positive semidefinite".into()));
        }
        let diag_el = frame.combine(&m.diag())?;
        let lhs = eigvals(&schur(m, frame, b)?)?;
        let rhs = eigvals(&quad_rep_sqrt(&diag_el, b, tol.atol)?)?;
        legs.push(Leg::from_verdict("schur_pinch", &major(&lhs, &rhs, tol)?));
    }
    Ok(VerificationReport::single("remark_pinch", a.descriptor().to_string(), legs, || {
        let mut w = pair(a, b);
        if let Some((m, frame)) = schur_leg {
            w.matrix = Some(m.clone());
            w.frame = Some(frame.clone());
        }
        w
    }))
}

/// `p` with `1/p = 1/r + 1/s` (`1/∞ = 0`); rejects `p < 1`.
pub fn holder_exponent(r: f64, s: f64) -> Result<f64> {
    for v in [r, s] {
        if v.is_nan() || v < 1.0 {
            return Err(Error::Domain(format!("exponents must lie in [1, inf], got {v}")));
        }
    }
    let inv = 1.0 / r + 1.0 / s;
    let p = if inv == 0.0 { f64::INFINITY } else { 1.0 / inv };
    if p < 1.0 {
        return Err(Error::Domain(format!("1/p = 1/{r} + 1/{s} gives p = {p} < 1")));
    }
    Ok(p)
}

/// `‖a∘b‖_p ≤ ‖a‖_r ‖b‖_s` with `1/p = 1/r + 1/s`.
pub fn check_holder(a: &Element, b: &Element, r: f64, s: f64, tol: Tolerance) -> Result<VerificationReport> {
    check_same(a.descriptor(), b.descriptor())?;
    let p = holder_exponent(r, s)?;
    let lhs = pnorm(&jordan_product(a, b)?, p)?;
    let rhs = pnorm(a, r)? * pnorm(b, s)?;
    let leg = Leg::le("holder", lhs, rhs, tol.threshold(rhs));
    Ok(VerificationReport::single("holder", a.descriptor().to_string(), vec![leg], || {
        pair(a, b).param("r", r).param("s", s)
    }))
}
