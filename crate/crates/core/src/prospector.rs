//! Search over Schur multiplier matrices `A` for the inequality
//! `λ(|A•b|) ≺_w λ(|diag A|)*λ(|b|)`, and its cone variant
//! `λ(A•b) ≺_w λ(|diag A|)*λ(b)` for `b ≥ 0`.
//!
//! Products are taken relative to the standard frame of the descriptor.
//! Sampling can certify a violation (the record replays it) but can only
//! gather evidence that none exists.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{Descriptor, Element};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, map_indexed, sample_rng, Execution};
use crate::majorization::{abs_vec, compwise, sort_desc, weak_major, Tolerance};
use crate::spectral::{abs_el, eigvals, plus_part, random_orthogonal, JordanFrame};
use crate::suite::{sample_cone, sample_general, sample_psd_matrix, GENERAL_SCALE};
use crate::transforms::{schur, SchurMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    PsdGram,
    LyapunovForm,
    QuadraticForm,
    RandomSym {
        #[serde(default)]
        zero_diag: bool,
    },
    RankOnePerturbed {
        sigma: f64,
    },
    UserFile {
        matrix: SchurMatrix,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PsdGram => "psd_gram",
            Family::LyapunovForm => "lyapunov_form",
            Family::QuadraticForm => "quadratic_form",
            Family::RandomSym { .. } => "random_sym",
            Family::RankOnePerturbed { .. } => "rank_one_perturbed",
            Family::UserFile { .. } => "user_file",
        }
    }

    /// Families whose members satisfy the inequality by theorem.
    pub fn is_known_satisfying(&self) -> bool {
        matches!(self, Family::PsdGram | Family::LyapunovForm | Family::QuadraticForm)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::RandomSym { zero_diag: true } => write!(f, "random_sym(zero_diag)"),
            Family::RankOnePerturbed { sigma } => write!(f, "rank_one_perturbed(sigma={sigma})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Parses `psd`, `psd_gram`, `lyapunov`, `quadratic`, `random_sym`,
/// `zero_diag`, `rank_one[:sigma]`.
impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let no_arg = |f: Family| match arg {
            None => Ok(f),
            Some(_) => Err(Error::Parse(format!("family '{head}' takes no parameter"))),
        };
        match head {
            "psd" | "psd_gram" => no_arg(Family::PsdGram),
            "lyapunov" | "lyapunov_form" => no_arg(Family::LyapunovForm),
            "quadratic" | "quadratic_form" => no_arg(Family::QuadraticForm),
            "random_sym" => no_arg(Family::RandomSym { zero_diag: false }),
            "zero_diag" | "random_sym_zero_diag" => no_arg(Family::RandomSym { zero_diag: true }),
            "rank_one" | "rank_one_perturbed" => {
                let sigma = match arg {
                    None => 1.0,
                    Some(a) => a.parse().map_err(|_| Error::Parse(format!("bad sigma '{a}'")))?,
                };
                if !(sigma >= 0.0 && f64::is_finite(sigma)) {
                    return Err(Error::Parse(format!("sigma must be finite and nonnegative, got {sigma}")));
                }
                Ok(Family::RankOnePerturbed { sigma })
            }
            _ => Err(Error::Parse(format!("unknown family '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `λ(|A•b|) ≺_w λ(|diag A|)*λ(|b|)` for all `b`.
    Abs,
    /// `λ(A•b) ≺_w λ(|diag A|)*λ(b)` for `b ≥ 0`.
    Cone,
}

#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub family: Family,
    pub descriptor: Descriptor,
}

impl FamilySpec {
    /// Family over `sym:n`.
    pub fn new(family: Family, n: usize) -> Result<Self> {
        Self::with_descriptor(family, Descriptor::sym(n)?)
    }

    pub fn with_descriptor(family: Family, descriptor: Descriptor) -> Result<Self> {
        if let Family::UserFile { matrix } = &family {
            if matrix.n() != descriptor.rank() {
                return Err(Error::SizeMismatch(format!(
                    "{}x{} multiplier for an algebra of rank {}",
                    matrix.n(),
                    matrix.n(),
                    descriptor.rank()
                )));
            }
        }
        Ok(Self { family, descriptor })
    }

    pub fn n(&self) -> usize {
        self.descriptor.rank()
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> SchurMatrix {
        let n = self.n();
        let mut normal = |s: f64| -> Vec<f64> { (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect() };
        match &self.family {
            Family::PsdGram => sample_psd_matrix(n, rng),
            Family::LyapunovForm => SchurMatrix::lyapunov_form(&normal(GENERAL_SCALE)),
            Family::QuadraticForm => SchurMatrix::quadratic_form(&normal(GENERAL_SCALE)),
            Family::RandomSym { zero_diag } => {
                let upper: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
                let zd = *zero_diag;
                SchurMatrix::from_fn(n, |i, j| if zd && i == j { 0.0 } else { upper[i * n + j] })
            }
            Family::RankOnePerturbed { sigma } => {
                let g = sample_psd_matrix(n, rng);
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                SchurMatrix::from_fn(n, |i, j| g.get(i, j) - sigma * v[i] * v[j])
            }
            Family::UserFile { matrix } => matrix.clone(),
        }
    }

    fn sample_b<R: Rng + ?Sized>(&self, variant: Variant, rng: &mut R) -> Element {
        match variant {
            Variant::Abs => sample_general(&self.descriptor, rng),
            Variant::Cone => sample_cone(&self.descriptor, rng),
        }
    }
}

/// Margin (min over `k` of RHS − LHS partial sums) and verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub margin: f64,
    pub violated: bool,
}

fn evaluate(matrix: &SchurMatrix, frame: &JordanFrame, b: &Element, variant: Variant, tol: Tolerance) -> Result<Candidate> {
    let ab = schur(matrix, frame, b)?;
    let d = sort_desc(&abs_vec(&matrix.diag()));
    let (lhs, rhs) = match variant {
        Variant::Abs => (eigvals(&abs_el(&ab)?)?, compwise(&d, &eigvals(&abs_el(b)?)?)?),
        Variant::Cone => (eigvals(&ab)?, compwise(&d, &eigvals(b)?)?),
    };
    let v = weak_major(&lhs, &rhs, tol)?;
    Ok(Candidate { margin: v.worst_slack, violated: !v.holds })
}

/// `λ(|A•b|) ≺_w λ(|diag A|)*λ(|b|)` for one `b`.
pub fn test_candidate(matrix: &SchurMatrix, frame: &JordanFrame, b: &Element, tol: Tolerance) -> Result<Candidate> {
    evaluate(matrix, frame, b, Variant::Abs, tol)
}

/// `λ(A•b) ≺_w λ(|diag A|)*λ(b)` for one `b ≥ 0`.
pub fn test_candidate_cone(matrix: &SchurMatrix, frame: &JordanFrame, b: &Element, tol: Tolerance) -> Result<Candidate> {
    let low = crate::spectral::lambda_min(b)?;
    if low < -tol.threshold(b.norm()) {
        return Err(Error::Domain(format!("cone variant needs b >= 0 (smallest eigenvalue {low})")));
    }
    evaluate(matrix, frame, b, Variant::Cone, tol)
}

/// One tested `(A, b)` pair, replayable from its serialized form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchRecord {
    pub family: String,
    pub n: usize,
    pub seed: u64,
    pub variant: Variant,
    pub descriptor: String,
    pub matrix: SchurMatrix,
    pub b: Element,
    pub margin: f64,
    pub violated: bool,
}

impl SearchRecord {
    pub fn build(family: &str, seed: u64, variant: Variant, matrix: SchurMatrix, b: Element, tol: Tolerance) -> Result<Self> {
        let desc = b.descriptor().clone();
        let frame = JordanFrame::standard(&desc);
        let c = evaluate(&matrix, &frame, &b, variant, tol)?;
        Ok(Self {
            family: family.into(),
            n: desc.rank(),
            seed,
            variant,
            descriptor: desc.to_string(),
            matrix,
            b,
            margin: c.margin,
            violated: c.violated,
        })
    }

    /// Re-runs the verifier; `Ok(true)` when margin (to 1e-10) and verdict
    /// match the stored ones.
    pub fn replay(&self, tol: Tolerance) -> Result<bool> {
        let desc: Descriptor = self.descriptor.parse()?;
        if &desc != self.b.descriptor() {
            return Err(Error::DescriptorMismatch { left: self.descriptor.clone(), right: self.b.descriptor().to_string() });
        }
        let c = evaluate(&self.matrix, &JordanFrame::standard(&desc), &self.b, self.variant, tol)?;
        Ok(c.violated == self.violated && (c.margin - self.margin).abs() <= 1e-10)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: String,
    pub n: usize,
    /// Number of `(A, b)` pairs tested.
    pub samples: usize,
    /// Number of violating pairs.
    pub violations: usize,
    /// `None` when nothing was tested.
    pub min_margin: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    /// Worst violating `b` for each violating `A`, in `A` order.
    pub records: Vec<SearchRecord>,
    pub summary: SweepSummary,
}

/// Tests `n_a` matrices from the family against `n_b` samples of `b`
/// each. Matrix `i` and its `b`'s come from `sample_rng(seed, i)`.
pub fn sweep(
    spec: &FamilySpec,
    variant: Variant,
    n_a: usize,
    n_b: usize,
    seed: u64,
    tol: Tolerance,
    exec: Execution,
) -> Result<SweepOutcome> {
    let frame = JordanFrame::standard(&spec.descriptor);
    let per_a = map_indexed(if n_b == 0 { 0 } else { n_a }, exec, |i| -> Result<(Option<SearchRecord>, usize, f64)> {
        let a_seed = derive_seed(seed, i as u64);
        let mut rng = sample_rng(seed, i as u64);
        let matrix = spec.generate(&mut rng);
        let mut worst: Option<(f64, Element)> = None;
        let mut violations = 0;
        let mut min_margin = f64::INFINITY;
        for _ in 0..n_b {
            let b = spec.sample_b(variant, &mut rng);
            let c = evaluate(&matrix, &frame, &b, variant, tol)?;
            min_margin = min_margin.min(c.margin);
            if c.violated {
                violations += 1;
                if worst.as_ref().is_none_or(|(m, _)| c.margin < *m) {
                    worst = Some((c.margin, b));
                }
            }
        }
        let record = match worst {
            Some((_, b)) => Some(SearchRecord::build(&spec.family.to_string(), a_seed, variant, matrix, b, tol)?),
            None => None,
        };
        Ok((record, violations, min_margin))
    });
    let mut records = Vec::new();
    let mut violations = 0;
    let mut min_margin: Option<f64> = None;
    for r in per_a {
        let (rec, v, m) = r?;
        records.extend(rec);
        violations += v;
        min_margin = Some(min_margin.map_or(m, |x| x.min(m)));
    }
    let summary = SweepSummary {
        family: spec.family.to_string(),
        n: spec.n(),
        samples: if n_b == 0 { 0 } else { n_a * n_b },
        violations,
        min_margin,
    };
    Ok(SweepOutcome { records, summary })
}

fn renormalize(x: &Element, norm: f64) -> Element {
    let cur = x.norm();
    if cur == 0.0 {
        x.clone()
    } else {
        x.scale(norm / cur)
    }
}

fn frobenius(m: &SchurMatrix) -> f64 {
    m.entries().frobenius_norm()
}

/// Random-direction descent on the margin, alternating between `b` and
/// (for `random_sym` records) the off-diagonal or full entries of `A`.
/// Only steps that lower the margin and stay violated are accepted; `b`
/// and `A` keep their original norms, a zero diagonal stays zero.
pub fn refine(record: &SearchRecord, steps: usize, tol: Tolerance) -> Result<SearchRecord> {
    if !record.violated {
        return Err(Error::Domain("refine needs a violated record".into()));
    }
    let desc: Descriptor = record.descriptor.parse()?;
    let frame = JordanFrame::standard(&desc);
    let perturb_a = record.family.starts_with("random_sym");
    let keep_zero_diag = perturb_a && record.matrix.diag().iter().all(|d| *d == 0.0);
    let (b_norm, a_norm) = (record.b.norm(), frobenius(&record.matrix));
    let mut rng: ChaCha8Rng = sample_rng(record.seed, u64::MAX);
    let mut best = record.clone();
    let (mut b_step, mut a_step) = (0.1, 0.1);
    for step in 0..steps {
        let on_a = perturb_a && step % 2 == 1;
        let (matrix, b) = if on_a {
            let n = best.matrix.n();
            let noise: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
            let m = SchurMatrix::from_fn(n, |i, j| {
                if keep_zero_diag && i == j {
                    0.0
                } else {
                    best.matrix.get(i, j) + a_step * a_norm * noise[i * n + j] / n as f64
                }
            });
            let f = frobenius(&m);
            let m = if f == 0.0 { m } else { SchurMatrix::from_fn(n, |i, j| m.get(i, j) * a_norm / f) };
            (m, best.b.clone())
        } else {
            let dir = sample_general(&desc, &mut rng);
            let mut b = best.b.axpy(b_step * b_norm / dir.norm().max(f64::MIN_POSITIVE), &dir)?;
            if record.variant == Variant::Cone {
                b = plus_part(&b)?;
            }
            (best.matrix.clone(), renormalize(&b, b_norm))
        };
        let c = evaluate(&matrix, &frame, &b, record.variant, tol)?;
        if c.violated && c.margin < best.margin {
            best.matrix = matrix;
            best.b = b;
            best.margin = c.margin;
        } else if on_a {
            a_step *= 0.7;
        } else {
            b_step *= 0.7;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundarySummary {
    pub min_margin: f64,
    pub violated: bool,
    /// `violated (certified by witness)` or `no violation found (budget N)`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<SearchRecord>,
}

/// Samples `n_b` elements `b` against one matrix and refines the worst
/// violation found. A reported violation is certified by its witness;
/// its absence is only evidence.
pub fn classify_boundary(
    matrix: &SchurMatrix,
    desc: &Descriptor,
    variant: Variant,
    n_b: usize,
    refine_steps: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<BoundarySummary> {
    let spec = FamilySpec::with_descriptor(Family::UserFile { matrix: matrix.clone() }, desc.clone())?;
    let out = sweep(&spec, variant, 1, n_b, seed, tol, Execution::Sequential)?;
    let mut min_margin = out.summary.min_margin.unwrap_or(f64::INFINITY);
    match out.records.into_iter().next() {
        Some(rec) => {
            let refined = refine(&rec, refine_steps, tol)?;
            min_margin = min_margin.min(refined.margin);
            Ok(BoundarySummary {
                min_margin,
                violated: true,
                status: "violated (certified by witness)".into(),
                witness: Some(refined),
            })
        }
        None => Ok(BoundarySummary {
            min_margin,
            violated: false,
            status: format!("no violation found (budget {n_b})"),
            witness: None,
        }),
    }
}

/// Largest margin change under random orthogonal conjugation of the frame
/// (and of `b` with it) in `sym:n`. The inequality is invariant under
/// this, so the result should be round-off sized.
pub fn frame_robustness(matrix: &SchurMatrix, variant: Variant, samples: usize, seed: u64, tol: Tolerance) -> Result<f64> {
    let n = matrix.n();
    let desc = Descriptor::sym(n)?;
    let standard = JordanFrame::standard(&desc);
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let q = random_orthogonal(n, &mut rng);
        let conj = standard.conjugate_sym(&q)?;
        let b = match variant {
            Variant::Abs => sample_general(&desc, &mut rng),
            Variant::Cone => sample_cone(&desc, &mut rng),
        };
        let bm = b.to_matrix().expect("sym");
        let qb = Element::from_sym_matrix(&{
            let mut m = q.matmul(&bm)?.matmul(&q.transpose())?;
            m.symmetrize();
            m
        })?;
        let m0 = evaluate(matrix, &standard, &b, variant, tol)?.margin;
        let m1 = evaluate(matrix, &conj, &qb, variant, tol)?.margin;
        worst = worst.max((m0 - m1).abs());
    }
    Ok(worst)
}

/// Writes one JSON record per line.
pub fn write_archive<W: Write>(mut w: W, records: &[SearchRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_archive<R: BufRead>(r: R) -> Result<Vec<SearchRecord>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

/// CSV summary with header `family,n,samples,violations,min_margin`.
pub fn write_summary_csv<W: Write>(w: W, rows: &[SweepSummary]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["family", "n", "samples", "violations", "min_margin"])?;
    for s in rows {
        wr.write_record([
            s.family.clone(),
            s.n.to_string(),
            s.samples.to_string(),
            s.violations.to_string(),
            s.min_margin.map(|m| format!("{m:e}")).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
