//! Eigenvalues, Jordan frames and Löwner maps.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_same, pack_sym, unpack_sym, Descriptor, Element, Kind};
use crate::dense::Matrix;
use crate::error::{Error, Result};

/// Off-diagonal Frobenius mass (relative to `‖M‖_F`) at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues in `[-SQRT_CLAMP, 0)` are treated as zero by [`sqrt_el`].
pub const SQRT_CLAMP: f64 = 1e-10;

/// Tolerance used when validating caller-supplied frames.
pub const FRAME_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Decreasing.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
pub fn sym_eigen(m: &Matrix, tol: f64, max_sweeps: usize) -> Result<SymEigen> {
    if !m.is_square() {
        return Err(Error::SizeMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
    }
    if let Some((i, j, gap)) = m.max_asymmetry() {
        if gap > 0.0 {
            return Err(Error::NotSymmetric { i, j, gap });
        }
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let total = m.frobenius_norm();
    let target = tol * total;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NotConverged { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| desc_cmp(a[(i, i)], a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let tau = s / (1.0 + c);

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let g = a[(r, p)];
            let h = a[(r, q)];
            a[(r, p)] = g - s * (h + g * tau);
            a[(r, q)] = h + s * (g - h * tau);
            a[(p, r)] = a[(r, p)];
            a[(q, r)] = a[(r, q)];
        }
    }
    for r in 0..n {
        let g = v[(r, p)];
        let h = v[(r, q)];
        v[(r, p)] = g - s * (h + g * tau);
        v[(r, q)] = h + s * (g - h * tau);
    }
}

fn desc_cmp(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// A complete system of orthogonal primitive idempotents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Element>", into = "Vec<Element>")]
pub struct JordanFrame {
    idempotents: Vec<Element>,
}

impl JordanFrame {
    /// Validates the frame invariants at [`FRAME_TOL`].
    pub fn new(idempotents: Vec<Element>) -> Result<Self> {
        let frame = Self { idempotents };
        frame.validate(FRAME_TOL)?;
        Ok(frame)
    }

    pub(crate) fn from_trusted(idempotents: Vec<Element>) -> Self {
        Self { idempotents }
    }

    /// Idempotency and orthonormality are checked at `tol`; the sum to `e`
    /// accumulates rank terms and gets `10·tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let first = self
            .idempotents
            .first()
            .ok_or_else(|| Error::InvalidFrame("empty frame".into()))?;
        let desc = first.descriptor();
        if self.idempotents.len() != desc.rank() {
            return Err(Error::InvalidFrame(format!(
                "{} idempotents for an algebra of rank {}",
                self.idempotents.len(),
                desc.rank()
            )));
        }
        let mut total = Element::zeros(desc);
        for (i, e) in self.idempotents.iter().enumerate() {
            check_same(desc, e.descriptor())?;
            let gap = e.square().try_sub(e)?.norm();
            if gap > tol {
                return Err(Error::InvalidFrame(format!("element {i} is not idempotent ({gap:e})")));
            }
            for (j, f) in self.idempotents.iter().enumerate().skip(i) {
                let ip = e.inner(f)?;
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip - want).abs() > tol {
                    return Err(Error::InvalidFrame(format!("<e{i}, e{j}> = {ip}")));
                }
            }
            total = total.try_add(e)?;
        }
        let gap = total.try_sub(&Element::unit(desc))?.norm();
        if gap > 10.0 * tol {
            return Err(Error::InvalidFrame(format!("idempotents sum to e only within {gap:e}")));
        }
        Ok(())
    }

    pub fn idempotents(&self) -> &[Element] {
        &self.idempotents
    }

    pub fn len(&self) -> usize {
        self.idempotents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idempotents.is_empty()
    }

    pub fn descriptor(&self) -> &Descriptor {
        self.idempotents[0].descriptor()
    }

    /// `Σ w_i e_i`.
    pub fn combine(&self, weights: &[f64]) -> Result<Element> {
        if weights.len() != self.len() {
            return Err(Error::SizeMismatch(format!(
                "{} weights for a frame of size {}",
                weights.len(),
                self.len()
            )));
        }
        let mut out = vec![0.0; self.descriptor().dim()];
        for (w, e) in weights.iter().zip(&self.idempotents) {
            for (o, c) in out.iter_mut().zip(e.coords()) {
                *o += w * c;
            }
        }
        Element::new(self.descriptor(), out)
    }

    /// The diagonal frame of `sym:n`, `(1/2)(1, ±u₁)` for spin factors,
    /// concatenated over direct sums.
    pub fn standard(desc: &Descriptor) -> Self {
        Self::from_trusted(build_frame(desc, &mut |f| standard_factor_frame(f)))
    }

    /// A random frame: Haar-orthogonal eigenbasis for `sym:n`, uniform
    /// direction for spin factors.
    pub fn random<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R) -> Self {
        Self::from_trusted(build_frame(desc, &mut |f| random_factor_frame(f, rng)))
    }

    /// Frame obtained by conjugating a `sym:n` frame with an orthogonal matrix.
    pub fn conjugate_sym(&self, q: &Matrix) -> Result<Self> {
        let n = match self.descriptor().kind() {
            Kind::Sym(n) => *n,
            _ => return Err(Error::InvalidFrame("orthogonal conjugation needs sym:n".into())),
        };
        let qt = q.transpose();
        let idempotents = self
            .idempotents
            .iter()
            .map(|e| {
                let m = unpack_sym(n, e.coords());
                let mut c = q.matmul(&m)?.matmul(&qt)?;
                c.symmetrize();
                Element::new(e.descriptor(), pack_sym(&c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_trusted(idempotents))
    }
}

impl TryFrom<Vec<Element>> for JordanFrame {
    type Error = Error;

    fn try_from(idempotents: Vec<Element>) -> Result<Self> {
        Self::new(idempotents)
    }
}

impl From<JordanFrame> for Vec<Element> {
    fn from(f: JordanFrame) -> Self {
        f.idempotents
    }
}

fn build_frame(desc: &Descriptor, per_factor: &mut dyn FnMut(&Descriptor) -> Vec<Element>) -> Vec<Element> {
    match desc.kind() {
        Kind::Sum(fs) => fs
            .iter()
            .enumerate()
            .flat_map(|(i, f)| {
                per_factor(f)
                    .into_iter()
                    .map(|e| Element::embed(desc, i, &e).expect("factor element"))
                    .collect::<Vec<_>>()
            })
            .collect(),
        _ => per_factor(desc),
    }
}

fn spin_pair(desc: &Descriptor, dir: &[f64]) -> Vec<Element> {
    let plus = std::iter::once(0.5).chain(dir.iter().map(|u| 0.5 * u)).collect();
    let minus = std::iter::once(0.5).chain(dir.iter().map(|u| -0.5 * u)).collect();
    vec![Element::from_parts(desc, plus), Element::from_parts(desc, minus)]
}

fn standard_factor_frame(desc: &Descriptor) -> Vec<Element> {
    match desc.kind() {
        Kind::Sym(n) => (0..*n)
            .map(|i| {
                let mut m = Matrix::zeros(*n, *n);
                m[(i, i)] = 1.0;
                Element::from_parts(desc, pack_sym(&m))
            })
            .collect(),
        Kind::Spin(n) => {
            let mut u = vec![0.0; n - 1];
            u[0] = 1.0;
            spin_pair(desc, &u)
        }
        Kind::Sum(_) => unreachable!("nested direct sums are flattened by the parser"),
    }
}

fn random_factor_frame<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R) -> Vec<Element> {
    match desc.kind() {
        Kind::Sym(n) => {
            let q = random_orthogonal(*n, rng);
            (0..*n).map(|i| Element::from_parts(desc, outer_packed(&q.column(i)))).collect()
        }
        Kind::Spin(n) => {
            let u = random_unit(n - 1, rng);
            spin_pair(desc, &u)
        }
        Kind::Sum(_) => unreachable!("nested direct sums are flattened by the parser"),
    }
}

fn random_unit<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Haar-distributed orthogonal matrix: the eigenbasis of a GOE sample.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z: f64 = rng.sample(StandardNormal);
            let z = if i == j { z } else { z * std::f64::consts::FRAC_1_SQRT_2 };
            g[(i, j)] = z;
            g[(j, i)] = z;
        }
    }
    sym_eigen(&g, JACOBI_TOL, JACOBI_MAX_SWEEPS).expect("GOE sample diagonalizes").vectors
}

fn outer_packed(q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let mut c = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            c.push(q[i] * q[j]);
        }
    }
    c
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Decreasing, ties in stable order.
    pub eigenvalues: Vec<f64>,
    pub frame: JordanFrame,
}

impl SpectralDecomposition {
    /// `Σ f(λ_i) e_i`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Element {
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.frame.combine(&w).expect("weights match frame")
    }

    pub fn reconstruct(&self) -> Element {
        self.map(|l| l)
    }
}

pub fn spectral_decompose(x: &Element) -> Result<SpectralDecomposition> {
    let desc = x.descriptor();
    let pairs = match desc.kind() {
        Kind::Sum(_) => {
            let mut pairs = Vec::with_capacity(desc.rank());
            for (i, part) in x.split().iter().enumerate() {
                for (l, e) in simple_pairs(part)? {
                    pairs.push((l, Element::embed(desc, i, &e)?));
                }
            }
            pairs.sort_by(|a, b| desc_cmp(a.0, b.0));
            pairs
        }
        _ => simple_pairs(x)?,
    };
    let (eigenvalues, idempotents) = pairs.into_iter().unzip();
    Ok(SpectralDecomposition { eigenvalues, frame: JordanFrame::from_trusted(idempotents) })
}

fn simple_pairs(x: &Element) -> Result<Vec<(f64, Element)>> {
    let desc = x.descriptor();
    match desc.kind() {
        Kind::Sym(n) => {
            let eig = sym_eigen(&unpack_sym(*n, x.coords()), JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
            Ok(eig
                .values
                .iter()
                .enumerate()
                .map(|(i, &l)| (l, Element::from_parts(desc, outer_packed(&eig.vectors.column(i)))))
                .collect())
        }
        Kind::Spin(n) => {
            let c = x.coords();
            let bar = &c[1..];
            let r = bar.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dir: Vec<f64> = if r > 0.0 {
                bar.iter().map(|v| v / r).collect()
            } else {
                let mut u = vec![0.0; n - 1];
                u[0] = 1.0;
                u
            };
            let frame = spin_pair(desc, &dir);
            Ok(vec![(c[0] + r, frame[0].clone()), (c[0] - r, frame[1].clone())])
        }
        Kind::Sum(_) => unreachable!("handled by the caller"),
    }
}

/// Decreasing eigenvalue vector `λ(x)`.
pub fn eigvals(x: &Element) -> Result<Vec<f64>> {
    Ok(spectral_decompose(x)?.eigenvalues)
}

/// Löwner map `Σ φ(λ_i) e_i`; fails if `φ` is non-finite on the spectrum.
pub fn lowner(x: &Element, f: impl Fn(f64) -> f64) -> Result<Element> {
    let sd = spectral_decompose(x)?;
    if let Some(&bad) = sd.eigenvalues.iter().find(|&&l| !f(l).is_finite()) {
        return Err(Error::Domain(format!("function is not finite at eigenvalue {bad}")));
    }
    Ok(sd.map(f))
}

pub fn abs_el(x: &Element) -> Result<Element> {
    lowner(x, f64::abs)
}

/// Square root of a cone element; eigenvalues down to `-tol` are clamped to 0.
pub fn sqrt_el(x: &Element, tol: f64) -> Result<Element> {
    let sd = spectral_decompose(x)?;
    let min = sd.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::Domain(format!("square root of an element with eigenvalue {min}")));
    }
    Ok(sd.map(|l| l.max(0.0).sqrt()))
}

pub fn plus_part(x: &Element) -> Result<Element> {
    lowner(x, |t| t.max(0.0))
}

pub fn minus_part(x: &Element) -> Result<Element> {
    lowner(x, |t| (-t).max(0.0))
}

/// `tr(x) = <x, e>`, computed directly from the coordinates.
pub fn trace(x: &Element) -> f64 {
    x.split()
        .iter()
        .map(|part| match part.descriptor().kind() {
            Kind::Sym(n) => (0..*n).map(|i| part.coords()[crate::algebra::packed_index(*n, i, i)]).sum(),
            Kind::Spin(_) => 2.0 * part.coords()[0],
            Kind::Sum(_) => unreachable!(),
        })
        .sum()
}

pub fn det(x: &Element) -> Result<f64> {
    Ok(eigvals(x)?.iter().product())
}

/// `‖λ‖_p` of a plain vector, `p ∈ [1, ∞]`.
pub fn vec_pnorm(v: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("p-norm needs p in [1, inf], got {p}")));
    }
    if p.is_infinite() {
        return Ok(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    if p == 1.0 {
        return Ok(v.iter().map(|x| x.abs()).sum());
    }
    // Scale by the max entry so large p does not overflow.
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Spectral p-norm `‖λ(x)‖_p`.
pub fn pnorm(x: &Element, p: f64) -> Result<f64> {
    vec_pnorm(&eigvals(x)?, p)
}

/// `S_k(x)`: sum of the `k` largest eigenvalues, `1 ≤ k ≤ rank`.
pub fn sk(x: &Element, k: usize) -> Result<f64> {
    let rank = x.descriptor().rank();
    if k == 0 || k > rank {
        return Err(Error::OutOfRange { index: k, max: rank });
    }
    Ok(eigvals(x)?[..k].iter().sum())
}

/// Smallest eigenvalue.
pub fn lambda_min(x: &Element) -> Result<f64> {
    Ok(*eigvals(x)?.last().expect("rank >= 1"))
}

/// Idempotent `Σ_{i∈subset} e_i` of a frame.
pub fn frame_idempotent(frame: &JordanFrame, subset: &[usize]) -> Result<Element> {
    let mut w = vec![0.0; frame.len()];
    for &i in subset {
        *w.get_mut(i).ok_or(Error::OutOfRange { index: i + 1, max: frame.len() })? = 1.0;
    }
    frame.combine(&w)
}

/// Element with the given eigenvalues on a frame (`x = Σ w_i e_i`).
pub fn with_spectrum(frame: &JordanFrame, eigenvalues: &[f64]) -> Result<Element> {
    frame.combine(eigenvalues)
}

/// `x ∘ x` is always ≥ 0; used to sanity-check sampled elements.
pub fn is_in_cone(x: &Element, tol: f64) -> Result<bool> {
    Ok(lambda_min(x)? >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{inner, random_cone_element, random_element};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sym(rows: &[&[f64]]) -> Element {
        Element::from_sym_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn descriptors() -> Vec<Descriptor> {
        ["sym:1", "sym:2", "sym:4", "spin:2", "spin:3", "spin:6", "sum:sym:2+spin:3", "sum:spin:4+sym:3+spin:2"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    #[test]
    fn jacobi_two_by_two_closed_form() {
        let m = Matrix::from_rows(&[vec![9.0, 24.0], vec![24.0, 9.0]]).unwrap();
        let eig = sym_eigen(&m, JACOBI_TOL, JACOBI_MAX_SWEEPS).unwrap();
        assert!((eig.values[0] - 33.0).abs() < 1e-12);
        assert!((eig.values[1] + 15.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_and_identity() {
        let d = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(sym_eigen(&d, JACOBI_TOL, 64).unwrap().values, vec![3.0, 2.0, 1.0]);
        let eig = sym_eigen(&Matrix::identity(4), JACOBI_TOL, 64).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);
        let qtq = eig.vectors.transpose().matmul(&eig.vectors).unwrap();
        assert!((0..4).all(|i| (0..4).all(|j| (qtq[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14)));
    }

    #[test]
    fn jacobi_reports_non_convergence() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 5.0, 1.0], vec![3.0, 1.0, -2.0]]).unwrap();
        match sym_eigen(&m, JACOBI_TOL, 0) {
            Err(Error::NotConverged { sweeps: 0, residual }) => assert!(residual > 0.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(sym_eigen(&m, JACOBI_TOL, 64).is_ok());
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m, JACOBI_TOL, 64), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn spin_closed_form_decomposition() {
        let x = Element::spin(vec![3.0, 4.0, 0.0]).unwrap();
        let sd = spectral_decompose(&x).unwrap();
        assert_eq!(sd.eigenvalues, vec![7.0, -1.0]);
        assert_eq!(sd.frame.idempotents()[0].coords(), &[0.5, 0.5, 0.0]);
        assert_eq!(sd.frame.idempotents()[1].coords(), &[0.5, -0.5, 0.0]);
        assert_eq!(abs_el(&x).unwrap().coords(), &[4.0, 3.0, 0.0]);
        assert_eq!(det(&x).unwrap(), -7.0);
    }

    #[test]
    fn spin_zero_bar_uses_first_direction() {
        let x = Element::spin(vec![2.0, 0.0, 0.0, 0.0]).unwrap();
        let sd = spectral_decompose(&x).unwrap();
        assert_eq!(sd.eigenvalues, vec![2.0, 2.0]);
        assert_eq!(sd.frame.idempotents()[0].coords(), &[0.5, 0.5, 0.0, 0.0]);
        sd.frame.validate(1e-14).unwrap();
    }

    #[test]
    fn sym_two_by_two_examples() {
        let a = sym(&[&[8.0, 3.0], &[3.0, 0.0]]);
        let l = eigvals(&a).unwrap();
        assert!((l[0] - 9.0).abs() < 1e-12 && (l[1] + 1.0).abs() < 1e-12);
        let b = sym(&[&[0.0, 3.0], &[3.0, 8.0]]);
        let l = eigvals(&b).unwrap();
        assert!((l[0] - 9.0).abs() < 1e-12 && (l[1] + 1.0).abs() < 1e-12);
        let ab = sym(&[&[9.0, 24.0], &[24.0, 9.0]]);
        let l = eigvals(&abs_el(&ab).unwrap()).unwrap();
        assert!((l[0] - 33.0).abs() < 1e-12 && (l[1] - 15.0).abs() < 1e-12);
    }

    #[test]
    fn unit_and_scaled_unit_spectra() {
        for d in descriptors() {
            let e = Element::unit(&d);
            assert_eq!(eigvals(&e).unwrap(), vec![1.0; d.rank()]);
            assert_eq!(trace(&e), d.rank() as f64);
            assert_eq!(pnorm(&e, f64::INFINITY).unwrap(), 1.0);
            let l = eigvals(&e.scale(-2.5)).unwrap();
            assert!(l.iter().all(|v| (v + 2.5).abs() < 1e-14));
            assert!((sqrt_el(&e, SQRT_CLAMP).unwrap().try_sub(&e).unwrap()).norm() < 1e-14);
            assert!(plus_part(&e.scale(-1.0)).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn negation_reverses_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in descriptors() {
            let x = random_element(&d, &mut rng, 2.0);
            let l = eigvals(&x).unwrap();
            let mut ln = eigvals(&x.scale(-1.0)).unwrap();
            ln.reverse();
            for (a, b) in l.iter().zip(&ln) {
                assert!((a + b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn decomposition_invariants_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in descriptors() {
            for _ in 0..50 {
                let x = random_element(&d, &mut rng, 3.0);
                let sd = spectral_decompose(&x).unwrap();
                sd.frame.validate(1e-10).unwrap();
                assert!(sd.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
                let gap = sd.reconstruct().try_sub(&x).unwrap().norm();
                assert!(gap <= 1e-9 * (1.0 + x.norm()), "{d}: {gap}");
            }
        }
    }

    #[test]
    fn abs_plus_minus_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in descriptors() {
            let x = random_element(&d, &mut rng, 2.0);
            let (p, m, a) = (plus_part(&x).unwrap(), minus_part(&x).unwrap(), abs_el(&x).unwrap());
            assert!((&(&p + &m) - &a).norm() < 1e-10);
            assert!((&(&p - &m) - &x).norm() < 1e-10);
            let r = sqrt_el(&x.square(), SQRT_CLAMP).unwrap();
            assert!((&r - &a).norm() < 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn sqrt_rejects_negative_and_clamps_tiny() {
        let e = Element::unit(&Descriptor::sym(2).unwrap());
        assert!(matches!(sqrt_el(&e.scale(-1.0), SQRT_CLAMP), Err(Error::Domain(_))));
        let tiny = Element::from_sym_rows(&[vec![1.0, 0.0], vec![0.0, -1e-12]]).unwrap();
        let r = sqrt_el(&tiny, SQRT_CLAMP).unwrap();
        assert_eq!(eigvals(&r).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn lowner_domain_error() {
        let x = Element::spin(vec![0.0, 1.0]).unwrap();
        assert!(matches!(lowner(&x, f64::ln), Err(Error::Domain(_))));
        let id = lowner(&x, |t| t).unwrap();
        assert!((&id - &x).norm() < 1e-15);
    }

    #[test]
    fn cone_samples_are_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in descriptors() {
            for _ in 0..20 {
                let z = random_cone_element(&d, &mut rng, 2.0);
                assert!(lambda_min(&z).unwrap() >= -1e-12);
            }
        }
    }

    #[test]
    fn sk_range_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = Descriptor::sym(4).unwrap();
        let x = random_element(&d, &mut rng, 1.0);
        assert!((sk(&x, 4).unwrap() - trace(&x)).abs() < 1e-10);
        assert!(matches!(sk(&x, 0), Err(Error::OutOfRange { .. })));
        assert!(matches!(sk(&x, 5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn pnorm_domain() {
        assert!(vec_pnorm(&[1.0], 0.5).is_err());
        assert_eq!(vec_pnorm(&[3.0, -4.0], 2.0).unwrap(), 5.0);
        assert_eq!(vec_pnorm(&[3.0, -4.0], 1.0).unwrap(), 7.0);
        assert_eq!(vec_pnorm(&[3.0, -4.0], f64::INFINITY).unwrap(), 4.0);
    }

    #[test]
    fn frame_validation_errors() {
        let d = Descriptor::sym(2).unwrap();
        let e = Element::unit(&d);
        assert!(JordanFrame::new(vec![e.clone(), Element::zeros(&d)]).is_err());
        assert!(JordanFrame::new(vec![e]).is_err());
        assert!(JordanFrame::new(vec![]).is_err());
        JordanFrame::new(JordanFrame::standard(&d).idempotents().to_vec()).unwrap();
    }

    #[test]
    fn random_and_standard_frames_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for d in descriptors() {
            JordanFrame::standard(&d).validate(1e-14).unwrap();
            JordanFrame::random(&d, &mut rng).validate(1e-12).unwrap();
        }
    }

    #[test]
    fn primitive_idempotents_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in descriptors() {
            for c in JordanFrame::random(&d, &mut rng).idempotents() {
                assert!((inner(c, c).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}
