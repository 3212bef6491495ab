//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use eja_core::algebra::{inner, Descriptor, Element};
use eja_core::dense::Matrix;
use eja_core::exec::{map_indexed, sample_rng, Execution};
use eja_core::majorization::Tolerance;
use eja_core::prospector::{self, Family, FamilySpec, SearchRecord, Variant};
use eja_core::spectral::{abs_el, eigvals, sym_eigen, with_spectrum, JordanFrame, JACOBI_MAX_SWEEPS, JACOBI_TOL};
use eja_core::suite::{
    check_example_47, check_positive_map_sublinear, documented_witness, example_47_values,
    norm_closed_form, norm_empirical, norm_ratio, sample_general, sample_psd_matrix,
    standard_descriptors, sweep, sweep_positive_map, CheckKind, NormTarget, PositiveMapFamily, VerificationReport,
};
use eja_core::transforms::{peirce_project, quad_rep, SublinearFn};
use rand::Rng;
use rand_distr::StandardNormal;

const ATOL: f64 = 1e-9;
const RTOL: f64 = 1e-8;
const TOL: Tolerance = Tolerance { atol: ATOL, rtol: RTOL };
const SEED: u64 = 20_240_917;

const EXAMPLE_EXACT_TOL: f64 = 1e-9;
const EXAMPLE_PRINTED_TOL: f64 = 1e-2;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);

const SWEEP_SAMPLES: usize = 10_000;
const SWEEP_BUDGET: Duration = Duration::from_secs(120);
const DET_RTOL: f64 = 1e-8;

const POSITIVE_MAP_SAMPLES: usize = 1_000;
const LINEAR_SLACK: f64 = 1e-10;

const LEMMA33_SAMPLES: usize = 1_000;

const NORM_OPERANDS: usize = 100;
const NORM_BUDGET: usize = 200;
const NORM_UPPER_TOL: f64 = 1e-9;
const NORM_ATTAIN_RTOL: f64 = 1e-6;

const PROSPECT_A: usize = 1_000;
const PROSPECT_B: usize = 100;
const ZERO_DIAG_SAMPLES: usize = 100;

const KERNEL_TOL: f64 = 1e-10;
const PEIRCE_TOL: f64 = 1e-9;
const KERNEL_SAMPLES: usize = 1_000;
const FTVN_PAIRS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn descriptors_line(reports: &[VerificationReport]) -> String {
    let worst = reports.iter().fold(f64::INFINITY, |m, r| m.min(r.worst_slack));
    let failing: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.descriptor.as_str()).collect();
    format!("{} descriptors, worst slack {worst:.3e}, failing {failing:?}", reports.len())
}

fn example_47() -> Outcome {
    let start = Instant::now();
    let report = check_example_47(TOL).expect("example runs");
    let (lhs, rhs) = example_47_values().expect("example runs");
    let exact = (lhs[0] - 33.0).abs() <= EXAMPLE_EXACT_TOL && (lhs[1] - 15.0).abs() <= EXAMPLE_EXACT_TOL;
    let printed = (rhs[0] - 44.52).abs() <= EXAMPLE_PRINTED_TOL && (rhs[1] + 3.48).abs() <= EXAMPLE_PRINTED_TOL;
    let both_fail = report.leg("forward_fails").unwrap().holds && report.leg("reverse_fails").unwrap().holds;
    let elapsed = start.elapsed();
    outcome(
        exact && printed && both_fail && elapsed < EXAMPLE_BUDGET,
        format!(
            "λ(|A∘B|)=({:.12}, {:.12}), λ(|A|∘|B|)=({:.4}, {:.4}), both directions fail: {both_fail}, {:.3}s",
            lhs[0],
            lhs[1],
            rhs[0],
            rhs[1],
            elapsed.as_secs_f64()
        ),
    )
}

fn full_sweep(kind: CheckKind, samples: usize) -> (Vec<VerificationReport>, Duration) {
    let start = Instant::now();
    let reports = standard_descriptors()
        .iter()
        .map(|d| sweep(kind, d, samples, SEED, TOL, Execution::default()).expect("sweep runs"))
        .collect();
    (reports, start.elapsed())
}

fn log_majorization() -> Outcome {
    let (reports, elapsed) = full_sweep(CheckKind::LogMajorQuadrep, SWEEP_SAMPLES);
    let pass = reports.iter().all(|r| r.pass) && elapsed < SWEEP_BUDGET;
    let det_ok = reports.iter().all(|r| r.leg("det").is_some_and(|l| l.holds));
    outcome(
        pass && det_ok,
        format!("{SWEEP_SAMPLES} cone pairs each, {}, det rtol {DET_RTOL:e} ok: {det_ok}, {:.1}s", descriptors_line(&reports), elapsed.as_secs_f64()),
    )
}

fn jordan_weak() -> Outcome {
    let (reports, elapsed) = full_sweep(CheckKind::JordanWeak, SWEEP_SAMPLES);
    let near: f64 = reports.iter().map(|r| r.stats.get("near_equality").copied().unwrap_or(0.0)).sum();
    let pass = reports.iter().all(|r| r.pass) && elapsed < SWEEP_BUDGET;
    outcome(
        pass,
        format!(
            "{SWEEP_SAMPLES} general pairs each, {}, near-equality samples {near}, {:.1}s",
            descriptors_line(&reports),
            elapsed.as_secs_f64()
        ),
    )
}

fn sublinear_positive_maps() -> Outcome {
    let descs: Vec<Descriptor> = ["sym:3", "spin:5", "sum:sym:2+spin:3"].iter().map(|s| s.parse().unwrap()).collect();
    let mut reports = Vec::new();
    for desc in &descs {
        for phi in [SublinearFn::ABS, SublinearFn::PLUS, SublinearFn::MINUS] {
            for family in PositiveMapFamily::ALL {
                reports.push(sweep_positive_map(desc, phi, family, POSITIVE_MAP_SAMPLES, SEED, TOL, Execution::default()).unwrap());
            }
        }
    }
    let sublinear_ok = reports.iter().all(|r| r.pass);
    let worst = reports.iter().fold(f64::INFINITY, |m, r| m.min(r.worst_slack));

    // Slack is measured against the magnitude of the partial sums, which
    // reach 1e4 for composed maps.
    let mut linear_max = 0.0_f64;
    let mut linear_abs = 0.0_f64;
    for desc in &descs {
        for family in PositiveMapFamily::ALL {
            let slacks = map_indexed(POSITIVE_MAP_SAMPLES, Execution::default(), |i| {
                let mut rng = sample_rng(SEED ^ 0x11, i as u64);
                let map = family.sample(desc, &mut rng);
                let x = sample_general(desc, &mut rng);
                let r = check_positive_map_sublinear(&map, &x, SublinearFn::IDENTITY, TOL).unwrap();
                let scale = ((r.legs[0].threshold - ATOL) / RTOL).max(1.0);
                (r.worst_slack.abs() / scale, r.worst_slack.abs())
            });
            for (rel, abs) in slacks {
                linear_max = linear_max.max(rel);
                linear_abs = linear_abs.max(abs);
            }
        }
    }
    outcome(
        sublinear_ok && linear_max <= LINEAR_SLACK,
        format!(
            "{} sweeps of {POSITIVE_MAP_SAMPLES}, worst slack {worst:.3e}; linear φ max |slack|/scale {linear_max:.3e} (absolute {linear_abs:.3e})",
            reports.len()
        ),
    )
}

fn lemma33() -> Outcome {
    let start = Instant::now();
    let (reports, _) = full_sweep(CheckKind::Lemma33, LEMMA33_SAMPLES);
    let det_ok = reports.iter().all(|r| r.leg("det").is_some_and(|l| l.holds));
    outcome(
        reports.iter().all(|r| r.pass) && det_ok,
        format!(
            "{LEMMA33_SAMPLES} invertible a each, all k, {}, det rtol {DET_RTOL:e} ok: {det_ok}, {:.1}s",
            descriptors_line(&reports),
            start.elapsed().as_secs_f64()
        ),
    )
}

const INF: f64 = f64::INFINITY;
const NORM_PAIRS: [(f64, f64); 7] = [(1.0, 1.0), (2.0, 2.0), (INF, INF), (1.0, INF), (INF, 1.0), (3.0, 2.0), (2.0, 3.0)];

fn norm_target(kind: usize, desc: &Descriptor, rng: &mut impl Rng) -> NormTarget {
    match kind {
        0 => NormTarget::Lyapunov(sample_general(desc, rng)),
        1 => NormTarget::Quadratic(sample_general(desc, rng)),
        _ => NormTarget::Schur { matrix: sample_psd_matrix(desc.rank(), rng), frame: JordanFrame::random(desc, rng) },
    }
}

/// The witness with `t = 1` at `r = ∞` is the same sign vector, so its
/// ratio is `‖d‖_s`; the claimed value `‖d‖_1` is not attained unless `s = 1`.
fn t_one_is_falsified() -> (bool, String) {
    let desc = Descriptor::sym(2).unwrap();
    let a = with_spectrum(&JordanFrame::standard(&desc), &[2.0, 1.0]).unwrap();
    let target = NormTarget::Lyapunov(a);
    let mut detail = Vec::new();
    let mut ok = true;
    for s in [2.0, 3.0] {
        let w = documented_witness(&target, INF, s).unwrap();
        let attained = norm_ratio(&target, &w, INF, s).unwrap();
        let with_t_s = norm_closed_form(&target, INF, s).unwrap();
        let with_t_one = 3.0;
        let mut rng = sample_rng(SEED, s as u64);
        let best = norm_empirical(&target, INF, s, 2_000, &mut rng).unwrap().value;
        let t_s_attains = (attained - with_t_s).abs() <= NORM_ATTAIN_RTOL * with_t_s;
        let t_one_attains = (attained - with_t_one).abs() <= NORM_ATTAIN_RTOL * with_t_one;
        let t_one_unreachable = best < with_t_one - NORM_ATTAIN_RTOL * with_t_one;
        ok &= t_s_attains && !t_one_attains && t_one_unreachable;
        detail.push(format!("(∞,{s}): witness {attained:.6}, t=s {with_t_s:.6}, t=1 {with_t_one}, search max {best:.6}"));
    }
    (ok, detail.join("; "))
}

fn norms() -> Outcome {
    let descs: Vec<Descriptor> = ["sym:3", "spin:4", "sum:sym:2+spin:3"].iter().map(|s| s.parse().unwrap()).collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_attain = 0.0_f64;
    for (pi, &(r, s)) in NORM_PAIRS.iter().enumerate() {
        for kind in 0..3 {
            let results = map_indexed(NORM_OPERANDS, Execution::default(), |i| {
                let desc = &descs[i % descs.len()];
                let mut rng = sample_rng(SEED + (pi * 3 + kind) as u64, i as u64);
                let target = norm_target(kind, desc, &mut rng);
                let closed = norm_closed_form(&target, r, s).unwrap();
                let est = norm_empirical(&target, r, s, NORM_BUDGET, &mut rng).unwrap();
                let scale = closed.abs().max(1.0);
                ((est.value - closed) / scale, (est.documented_ratio - closed).abs() / closed.abs().max(f64::MIN_POSITIVE))
            });
            for (i, (excess, attain)) in results.into_iter().enumerate() {
                checked += 1;
                worst_excess = worst_excess.max(excess);
                worst_attain = worst_attain.max(attain);
                if excess > NORM_UPPER_TOL || attain > NORM_ATTAIN_RTOL {
                    failures.push(format!("(r,s)=({r},{s}) kind {kind} operand {i}"));
                }
            }
        }
    }
    let (t_ok, t_detail) = t_one_is_falsified();
    outcome(
        failures.is_empty() && t_ok,
        format!(
            "{checked} operands, max (empirical − closed)/scale {worst_excess:.3e}, max witness rel gap {worst_attain:.3e}, failures {:?}; t=1 falsified: {t_ok} [{t_detail}]",
            failures.iter().take(5).collect::<Vec<_>>()
        ),
    )
}

fn prospector() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for family in [Family::PsdGram, Family::LyapunovForm, Family::QuadraticForm] {
        for n in 2..=4 {
            let spec = FamilySpec::new(family.clone(), n).unwrap();
            let out = prospector::sweep(&spec, Variant::Abs, PROSPECT_A, PROSPECT_B, SEED, TOL, Execution::default()).unwrap();
            ok &= out.summary.violations == 0;
            lines.push(format!("{}@{n}:{}", spec.family, out.summary.violations));
        }
    }
    for n in 2..=4 {
        let spec = FamilySpec::new(Family::RandomSym { zero_diag: true }, n).unwrap();
        let out = prospector::sweep(&spec, Variant::Abs, 1, ZERO_DIAG_SAMPLES, SEED, TOL, Execution::default()).unwrap();
        let replayed = out.records.first().is_some_and(|rec| {
            let text = serde_json::to_string(rec).unwrap();
            let back: SearchRecord = serde_json::from_str(&text).unwrap();
            back.violated && back.replay(TOL).unwrap()
        });
        ok &= replayed;
        lines.push(format!("zero_diag@{n}: replayable violation {replayed}"));
    }
    outcome(
        ok,
        format!("{PROSPECT_A}×{PROSPECT_B} per family, violations [{}], {:.1}s", lines.join(", "), start.elapsed().as_secs_f64()),
    )
}

fn random_sym(n: usize, rng: &mut impl Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.sample(StandardNormal);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn closed_2x2(m: &Matrix) -> Vec<f64> {
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    vec![mid + rad, mid - rad]
}

/// Trigonometric solution of the characteristic cubic.
fn closed_3x3(m: &Matrix) -> Vec<f64> {
    let q = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
    let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
    let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[(i, j)] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    vec![l1, 3.0 * q - l1 - l3, l3]
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn kernel() -> Outcome {
    let mut rng = sample_rng(SEED, 8);
    let (mut jac2, mut jac3) = (0.0_f64, 0.0_f64);
    for _ in 0..KERNEL_SAMPLES {
        let m2 = random_sym(2, &mut rng);
        jac2 = jac2.max(max_gap(&sym_eigen(&m2, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap().values, &closed_2x2(&m2)));
        let m3 = random_sym(3, &mut rng);
        jac3 = jac3.max(max_gap(&sym_eigen(&m3, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap().values, &closed_3x3(&m3)));
    }

    let mut axa = 0.0_f64;
    for n in 2..=5 {
        let desc = Descriptor::sym(n).unwrap();
        for _ in 0..KERNEL_SAMPLES {
            let a = sample_general(&desc, &mut rng);
            let x = sample_general(&desc, &mut rng);
            let (am, xm) = (a.to_matrix().unwrap(), x.to_matrix().unwrap());
            let oracle = am.matmul(&xm).unwrap().matmul(&am).unwrap();
            let got = quad_rep(&a, &x).unwrap().to_matrix().unwrap();
            let scale = oracle.frobenius_norm().max(1.0);
            axa = axa.max(max_gap(got.as_slice(), oracle.as_slice()) / scale);
        }
    }

    let mut peirce_recon = 0.0_f64;
    let mut peirce_orth = 0.0_f64;
    for desc in standard_descriptors() {
        for _ in 0..KERNEL_SAMPLES / 10 {
            let frame = JordanFrame::random(&desc, &mut rng);
            let x = sample_general(&desc, &mut rng);
            let comps = peirce_project(&frame, &x).unwrap();
            peirce_recon = peirce_recon.max(comps.sum().try_sub(&x).unwrap().norm());
            let parts: Vec<&Element> = comps.iter().map(|(_, _, c)| c).collect();
            for (i, p) in parts.iter().enumerate() {
                for q in &parts[i + 1..] {
                    peirce_orth = peirce_orth.max(inner(p, q).unwrap().abs());
                }
            }
        }
    }

    let descs = standard_descriptors();
    let ftvn = map_indexed(FTVN_PAIRS, Execution::default(), |i| {
        let desc = &descs[i % descs.len()];
        let mut rng = sample_rng(SEED ^ 0xf7, i as u64);
        let x = sample_general(desc, &mut rng);
        let y = sample_general(desc, &mut rng);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        let lhs = inner(&x, &y).unwrap();
        let mid = dot(&eigvals(&x).unwrap(), &eigvals(&y).unwrap());
        let rhs = dot(&eigvals(&abs_el(&x).unwrap()).unwrap(), &eigvals(&abs_el(&y).unwrap()).unwrap());
        let thr = TOL.threshold(rhs.abs());
        (mid - lhs).min(rhs - mid) >= -thr
    });
    let ftvn_ok = ftvn.iter().all(|b| *b);

    let pass = jac2 <= KERNEL_TOL && jac3 <= KERNEL_TOL && axa <= KERNEL_TOL && peirce_recon <= PEIRCE_TOL && peirce_orth <= PEIRCE_TOL && ftvn_ok;
    outcome(
        pass,
        format!(
            "Jacobi vs closed form 2×2 {jac2:.2e}, 3×3 {jac3:.2e}; P_a vs AXA {axa:.2e}; Peirce recon {peirce_recon:.2e}, orth {peirce_orth:.2e}; FTvN {FTVN_PAIRS} pairs ok: {ftvn_ok}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("worked example reproduction", example_47),
        ("log-majorization sweep", log_majorization),
        ("Jordan-product weak-majorization sweep", jordan_weak),
        ("sublinear functions under positive maps", sublinear_positive_maps),
        ("x/y construction from an invertible element", lemma33),
        ("operator norm formulas", norms),
        ("multiplier prospector soundness", prospector),
        ("kernel oracle checks", kernel),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.pass;
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
