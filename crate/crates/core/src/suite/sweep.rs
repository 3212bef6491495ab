//! Seeded sweeps: each sample draws its inputs from `sample_rng(seed, i)`,
//! runs one check, and the per-sample reports are merged in index order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{random_element, Descriptor, Element};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed, sample_rng, Execution};
use crate::majorization::Tolerance;
use crate::spectral::{eigvals, with_spectrum, JordanFrame};
use crate::transforms::{LinearMap, SchurMatrix, SublinearFn};

use super::checks::*;
use super::report::VerificationReport;

/// Upper end of the uniform eigenvalue range for cone samples.
pub const CONE_SCALE: f64 = 10.0;
/// Standard deviation for general samples.
pub const GENERAL_SCALE: f64 = 3.0;
/// Smallest `|λ|` accepted for an invertible sample.
pub const INVERTIBLE_GAP: f64 = 1e-6;

/// Cone element with eigenvalues `U[0, 10]` on a random frame.
pub fn sample_cone<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R) -> Element {
    let frame = JordanFrame::random(desc, rng);
    let eigs: Vec<f64> = (0..desc.rank()).map(|_| rng.random_range(0.0..CONE_SCALE)).collect();
    with_spectrum(&frame, &eigs).expect("weights match frame")
}

pub fn sample_general<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R) -> Element {
    random_element(desc, rng, GENERAL_SCALE)
}

/// General sample, redrawn until every `|λ_i| > 1e-6`.
pub fn sample_invertible<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R) -> Result<Element> {
    loop {
        let x = sample_general(desc, rng);
        if eigvals(&x)?.iter().all(|l| l.abs() > INVERTIBLE_GAP) {
            return Ok(x);
        }
    }
}

/// Gram matrix `B Bᵀ` with standard normal `B`.
pub fn sample_psd_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SchurMatrix {
    let b: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    let b = Matrix::from_row_major(n, n, b).expect("square");
    SchurMatrix::from_fn(n, |i, j| (0..n).map(|k| b[(i, k)] * b[(j, k)]).sum())
}

pub const NONNEGATIVE_SUBLINEAR: [SublinearFn; 3] = [SublinearFn::ABS, SublinearFn::PLUS, SublinearFn::MINUS];

/// Positive maps exercised by the sublinear lemma sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PositiveMapFamily {
    /// `P_c`, `c` a cone sample.
    Quadratic,
    /// `x ↦ A•x`, `A` a Gram matrix, random frame.
    PsdSchur,
    /// `P_c ∘ P_d`.
    ComposedQuadratic,
}

impl PositiveMapFamily {
    pub const ALL: [PositiveMapFamily; 3] =
        [PositiveMapFamily::Quadratic, PositiveMapFamily::PsdSchur, PositiveMapFamily::ComposedQuadratic];

    pub fn sample<R: Rng + ?Sized>(self, desc: &Descriptor, rng: &mut R) -> LinearMap {
        match self {
            PositiveMapFamily::Quadratic => LinearMap::Quadratic(sample_cone(desc, rng)),
            PositiveMapFamily::PsdSchur => {
                let matrix = sample_psd_matrix(desc.rank(), rng);
                LinearMap::Schur { matrix, frame: JordanFrame::random(desc, rng) }
            }
            PositiveMapFamily::ComposedQuadratic => {
                let c = sample_cone(desc, rng);
                let d = sample_cone(desc, rng);
                LinearMap::compose(LinearMap::Quadratic(c), LinearMap::Quadratic(d))
            }
        }
    }
}

/// Exponent pairs used by the Hölder sweep.
pub const HOLDER_PAIRS: [(f64, f64); 6] =
    [(2.0, 2.0), (3.0, 1.5), (f64::INFINITY, 2.0), (1.0, f64::INFINITY), (4.0, 4.0), (f64::INFINITY, f64::INFINITY)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    LogMajorQuadrep,
    Lemma32,
    Lemma33,
    PositiveMapSublinear,
    PaSublinear,
    SchurDiag,
    JordanWeak,
    RemarkPinch,
    Holder,
}

impl CheckKind {
    pub const ALL: [CheckKind; 9] = [
        CheckKind::LogMajorQuadrep,
        CheckKind::Lemma32,
        CheckKind::Lemma33,
        CheckKind::PositiveMapSublinear,
        CheckKind::PaSublinear,
        CheckKind::SchurDiag,
        CheckKind::JordanWeak,
        CheckKind::RemarkPinch,
        CheckKind::Holder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::LogMajorQuadrep => "log_major_quadrep",
            CheckKind::Lemma32 => "lemma32",
            CheckKind::Lemma33 => "lemma33",
            CheckKind::PositiveMapSublinear => "positive_map_sublinear",
            CheckKind::PaSublinear => "pa_sublinear",
            CheckKind::SchurDiag => "schur_diag",
            CheckKind::JordanWeak => "jordan_weak",
            CheckKind::RemarkPinch => "remark_pinch",
            CheckKind::Holder => "holder",
        }
    }

    /// Runs one seeded sample of this check.
    pub fn run_sample<R: Rng + ?Sized>(self, desc: &Descriptor, index: usize, rng: &mut R, tol: Tolerance) -> Result<VerificationReport> {
        match self {
            CheckKind::LogMajorQuadrep => {
                let (a, b) = (sample_cone(desc, rng), sample_cone(desc, rng));
                check_log_major_quadrep(&a, &b, tol)
            }
            CheckKind::Lemma32 => {
                let (a, b) = (sample_cone(desc, rng), sample_cone(desc, rng));
                check_lemma32(&a, &b, tol)
            }
            CheckKind::Lemma33 => {
                let a = sample_invertible(desc, rng)?;
                let reports = (1..=desc.rank())
                    .map(|k| lemma33_construct(&a, k, tol).map(|l| l.report))
                    .collect::<Result<Vec<_>>>()?;
                let mut r = VerificationReport::merge("lemma33", desc.to_string(), 0, reports);
                r.seed = None;
                r.samples = 1;
                Ok(r)
            }
            CheckKind::PositiveMapSublinear => {
                let phi = NONNEGATIVE_SUBLINEAR[index % 3];
                let family = PositiveMapFamily::ALL[(index / 3) % 3];
                let map = family.sample(desc, rng);
                let x = sample_general(desc, rng);
                check_positive_map_sublinear(&map, &x, phi, tol)
            }
            CheckKind::PaSublinear => {
                let (a, b) = (sample_general(desc, rng), sample_general(desc, rng));
                check_pa_sublinear(&a, &b, NONNEGATIVE_SUBLINEAR[index % 3], tol)
            }
            CheckKind::SchurDiag => {
                let m = sample_psd_matrix(desc.rank(), rng);
                let frame = JordanFrame::random(desc, rng);
                let b = sample_general(desc, rng);
                check_schur_diag(&m, &frame, &b, NONNEGATIVE_SUBLINEAR[index % 3], tol)
            }
            CheckKind::JordanWeak => {
                let (a, b) = (sample_general(desc, rng), sample_general(desc, rng));
                check_jordan_weak(&a, &b, tol)
            }
            CheckKind::RemarkPinch => {
                let a = sample_cone(desc, rng);
                let b = sample_general(desc, rng);
                let m = sample_psd_matrix(desc.rank(), rng);
                let frame = JordanFrame::random(desc, rng);
                check_remark_pinch(&a, &b, Some((&m, &frame)), tol)
            }
            CheckKind::Holder => {
                let (a, b) = (sample_general(desc, rng), sample_general(desc, rng));
                let (r, s) = HOLDER_PAIRS[index % HOLDER_PAIRS.len()];
                check_holder(&a, &b, r, s, tol)
            }
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check '{s}'")))
    }
}

/// Runs `f(index, rng)` for every sample and merges the reports; the
/// merged witness is the first failing sample's, tagged with its index
/// and derived seed.
pub fn sweep_with<F>(check: &str, desc: &Descriptor, samples: usize, seed: u64, exec: Execution, f: F) -> Result<VerificationReport>
where
    F: Fn(usize, &mut rand_chacha::ChaCha8Rng) -> Result<VerificationReport> + Sync + Send,
{
    let reports = map_indexed(samples, exec, |i| {
        let mut rng = sample_rng(seed, i as u64);
        f(i, &mut rng).map(|mut r| {
            if let Some(w) = r.witness.as_mut() {
                w.sample_index = Some(i as u64);
                w.sample_seed = Some(derive_seed(seed, i as u64));
            }
            r
        })
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport::merge(check, desc.to_string(), seed, reports))
}

pub fn sweep(kind: CheckKind, desc: &Descriptor, samples: usize, seed: u64, tol: Tolerance, exec: Execution) -> Result<VerificationReport> {
    sweep_with(kind.name(), desc, samples, seed, exec, |i, rng| kind.run_sample(desc, i, rng, tol))
}

/// Sublinear lemma sweep for one `φ` and one map family.
pub fn sweep_positive_map(
    desc: &Descriptor,
    phi: SublinearFn,
    family: PositiveMapFamily,
    samples: usize,
    seed: u64,
    tol: Tolerance,
    exec: Execution,
) -> Result<VerificationReport> {
    sweep_with("positive_map_sublinear", desc, samples, seed, exec, |_, rng| {
        let map = family.sample(desc, rng);
        let x = sample_general(desc, rng);
        check_positive_map_sublinear(&map, &x, phi, tol)
    })
}

/// Descriptors covered by the full sweeps.
pub fn standard_descriptors() -> Vec<Descriptor> {
    let mut out: Vec<Descriptor> = (2..=5).map(|n| Descriptor::sym(n).expect("n >= 1")).collect();
    out.extend((3..=8).map(|n| Descriptor::spin(n).expect("n >= 2")));
    out.push("sum:sym:2+spin:3".parse().expect("valid"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::lambda_min;

    #[test]
    fn check_names_round_trip() {
        for k in CheckKind::ALL {
            assert_eq!(k.name().parse::<CheckKind>().unwrap(), k);
        }
        assert!("nope".parse::<CheckKind>().is_err());
    }

    #[test]
    fn samplers_respect_preconditions() {
        let mut rng = sample_rng(1, 0);
        for desc in standard_descriptors() {
            assert!(lambda_min(&sample_cone(&desc, &mut rng)).unwrap() >= -1e-12);
            let x = sample_invertible(&desc, &mut rng).unwrap();
            assert!(eigvals(&x).unwrap().iter().all(|l| l.abs() > INVERTIBLE_GAP));
            assert!(sample_psd_matrix(desc.rank(), &mut rng).is_psd(1e-12).unwrap());
        }
    }

    #[test]
    fn every_check_passes_a_short_sweep() {
        for desc in ["sym:3", "spin:4", "sum:sym:2+spin:3"] {
            let desc: Descriptor = desc.parse().unwrap();
            for kind in CheckKind::ALL {
                let r = sweep(kind, &desc, 30, 11, Tolerance::default(), Execution::default()).unwrap();
                assert!(r.pass, "{kind} on {desc}: {r:#?}");
                assert_eq!(r.samples, 30);
            }
        }
    }

    #[test]
    fn sweep_is_identical_across_execution_modes() {
        let desc: Descriptor = "sym:3".parse().unwrap();
        let a = sweep(CheckKind::JordanWeak, &desc, 64, 5, Tolerance::default(), Execution::Parallel).unwrap();
        let b = sweep(CheckKind::JordanWeak, &desc, 64, 5, Tolerance::default(), Execution::Sequential).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn failing_sweep_records_first_witness() {
        let desc: Descriptor = "sym:2".parse().unwrap();
        let r = sweep_with("always_fails", &desc, 5, 9, Execution::default(), |i, _| {
            let leg = super::super::report::Leg::le("x", 1.0, 0.0, 0.0);
            let a = Element::unit(&desc).scale(i as f64);
            Ok(VerificationReport::single("always_fails", desc.to_string(), vec![leg], || {
                super::super::report::Witness::default().with("a", &a)
            }))
        })
        .unwrap();
        assert!(!r.pass);
        let w = r.witness.unwrap();
        assert_eq!(w.sample_index, Some(0));
        assert_eq!(w.sample_seed, Some(derive_seed(9, 0)));
    }
}
