//! Euclidean Jordan algebras: descriptors, elements, the Jordan product and
//! the trace inner product.
//!
//! Three families are supported: real symmetric matrices `sym:n`, spin
//! factors `spin:n` and finite direct sums of those. Coordinates use a fixed
//! packed layout:
//!
//! * `sym:n` stores the upper triangle row by row, `(0,0), (0,1), …, (0,n-1),
//!   (1,1), …`, each off-diagonal entry once.
//! * `spin:n` stores `(x0, x̄)` with `x̄` of length `n - 1`.
//! * a direct sum concatenates its factors' coordinates.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Sym(usize),
    Spin(usize),
    Sum(Vec<Descriptor>),
}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    kind: Kind,
    rank: usize,
    dim: usize,
}

/// Identifies an algebra together with its rank and dimension.
///
/// Cloning is cheap; elements share their descriptor.
#[derive(Clone, Debug)]
pub struct Descriptor(Arc<Inner>);

impl PartialEq for Descriptor {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Descriptor {}

impl Descriptor {
    pub fn sym(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDescriptor("sym requires n >= 1".into()));
        }
        Ok(Self(Arc::new(Inner { kind: Kind::Sym(n), rank: n, dim: n * (n + 1) / 2 })))
    }

    pub fn spin(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDescriptor("spin requires n >= 2".into()));
        }
        Ok(Self(Arc::new(Inner { kind: Kind::Spin(n), rank: 2, dim: n })))
    }

    pub fn sum(factors: Vec<Descriptor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDescriptor("direct sum needs at least one factor".into()));
        }
        let rank = factors.iter().map(Descriptor::rank).sum();
        let dim = factors.iter().map(Descriptor::dim).sum();
        Ok(Self(Arc::new(Inner { kind: Kind::Sum(factors), rank, dim })))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    pub fn rank(&self) -> usize {
        self.0.rank
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Factors of a direct sum, or `[self]` for a simple algebra.
    pub fn factors(&self) -> Vec<Descriptor> {
        match &self.0.kind {
            Kind::Sum(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Weights `w_k` with `<x, y> = Σ w_k x_k y_k` in packed coordinates.
    pub fn coordinate_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.dim());
        self.push_weights(&mut w);
        w
    }

    fn push_weights(&self, w: &mut Vec<f64>) {
        match &self.0.kind {
            Kind::Sym(n) => {
                for i in 0..*n {
                    for j in i..*n {
                        w.push(if i == j { 1.0 } else { 2.0 });
                    }
                }
            }
            Kind::Spin(n) => w.extend(std::iter::repeat_n(2.0, *n)),
            Kind::Sum(fs) => fs.iter().for_each(|f| f.push_weights(w)),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            Kind::Sym(n) => write!(f, "sym:{n}"),
            Kind::Spin(n) => write!(f, "spin:{n}"),
            Kind::Sum(fs) => {
                f.write_str("sum:")?;
                for (i, d) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Descriptor {
    type Err = Error;

    /// Parses `sym:n`, `spin:n` or `sum:<simple>+<simple>+…`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("sum:") {
            let factors = rest.split('+').map(parse_simple).collect::<Result<Vec<_>>>()?;
            return Descriptor::sum(factors);
        }
        parse_simple(s)
    }
}

fn parse_simple(s: &str) -> Result<Descriptor> {
    let (name, n) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("expected <kind>:<n>, got {s:?}")))?;
    let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad size in {s:?}")))?;
    match name.trim() {
        "sym" => Descriptor::sym(n),
        "spin" => Descriptor::spin(n),
        other => Err(Error::Parse(format!("unknown algebra kind {other:?}"))),
    }
}

/// Position of entry `(i, j)` of a `sym:n` matrix in packed coordinates.
#[inline]
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    desc: Descriptor,
    coords: Vec<f64>,
}

impl Element {
    pub fn new(desc: &Descriptor, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != desc.dim() {
            return Err(Error::DimensionMismatch { expected: desc.dim(), got: coords.len() });
        }
        Ok(Self { desc: desc.clone(), coords })
    }

    pub(crate) fn from_parts(desc: &Descriptor, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), desc.dim());
        Self { desc: desc.clone(), coords }
    }

    pub fn zeros(desc: &Descriptor) -> Self {
        Self::from_parts(desc, vec![0.0; desc.dim()])
    }

    /// The unit element `e`.
    pub fn unit(desc: &Descriptor) -> Self {
        let mut coords = Vec::with_capacity(desc.dim());
        push_unit(desc, &mut coords);
        Self::from_parts(desc, coords)
    }

    /// A `sym:n` element from a full matrix, which must be exactly symmetric.
    pub fn from_sym_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        Self::from_sym_matrix(&m)
    }

    pub fn from_sym_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::SizeMismatch("symmetric element needs a non-empty square matrix".into()));
        }
        if let Some((i, j, gap)) = m.max_asymmetry() {
            if gap > 0.0 {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
        let desc = Descriptor::sym(m.rows())?;
        Ok(Self::from_parts(&desc, pack_sym(m)))
    }

    pub fn spin(coords: Vec<f64>) -> Result<Self> {
        let desc = Descriptor::spin(coords.len())?;
        Ok(Self::from_parts(&desc, coords))
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.desc
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Full matrix of a `sym:n` element.
    pub fn to_matrix(&self) -> Option<Matrix> {
        match self.desc.kind() {
            Kind::Sym(n) => Some(unpack_sym(*n, &self.coords)),
            _ => None,
        }
    }

    /// Per-factor views of a direct sum (a single view for simple algebras).
    pub fn split(&self) -> Vec<Element> {
        match self.desc.kind() {
            Kind::Sum(fs) => {
                let mut off = 0;
                fs.iter()
                    .map(|f| {
                        let e = Element::from_parts(f, self.coords[off..off + f.dim()].to_vec());
                        off += f.dim();
                        e
                    })
                    .collect()
            }
            _ => vec![self.clone()],
        }
    }

    /// Places factor `index`'s element into the direct sum, zero elsewhere.
    pub fn embed(desc: &Descriptor, index: usize, part: &Element) -> Result<Element> {
        match desc.kind() {
            Kind::Sum(fs) => {
                let factor = fs.get(index).ok_or(Error::OutOfRange { index: index + 1, max: fs.len() })?;
                check_same(factor, part.descriptor())?;
                let off: usize = fs[..index].iter().map(Descriptor::dim).sum();
                let mut coords = vec![0.0; desc.dim()];
                coords[off..off + factor.dim()].copy_from_slice(&part.coords);
                Ok(Element::from_parts(desc, coords))
            }
            _ if index == 0 => {
                check_same(desc, part.descriptor())?;
                Ok(part.clone())
            }
            _ => Err(Error::OutOfRange { index: index + 1, max: 1 }),
        }
    }

    pub fn jordan(&self, other: &Element) -> Result<Element> {
        jordan_product(self, other)
    }

    pub fn square(&self) -> Element {
        let mut out = vec![0.0; self.coords.len()];
        jordan_into(&self.desc, &self.coords, &self.coords, &mut out);
        Element::from_parts(&self.desc, out)
    }

    pub fn inner(&self, other: &Element) -> Result<f64> {
        inner(self, other)
    }

    /// `sqrt(<x, x>)`, the Frobenius norm of the trace inner product.
    pub fn norm(&self) -> f64 {
        weighted_dot(&self.desc, &self.coords, &self.coords).sqrt()
    }

    pub fn scale(&self, s: f64) -> Element {
        Element::from_parts(&self.desc, self.coords.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Element) -> Result<Element> {
        check_same(&self.desc, &other.desc)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + s * b).collect();
        Ok(Element::from_parts(&self.desc, coords))
    }

    pub fn try_add(&self, other: &Element) -> Result<Element> {
        self.axpy(1.0, other)
    }

    pub fn try_sub(&self, other: &Element) -> Result<Element> {
        self.axpy(-1.0, other)
    }

    /// Coordinates in an orthonormal basis of the trace inner product.
    pub fn to_orthonormal(&self) -> Vec<f64> {
        self.desc
            .coordinate_weights()
            .iter()
            .zip(&self.coords)
            .map(|(w, c)| w.sqrt() * c)
            .collect()
    }

    pub fn from_orthonormal(desc: &Descriptor, coords: &[f64]) -> Result<Element> {
        if coords.len() != desc.dim() {
            return Err(Error::DimensionMismatch { expected: desc.dim(), got: coords.len() });
        }
        let c = desc.coordinate_weights().iter().zip(coords).map(|(w, c)| c / w.sqrt()).collect();
        Ok(Element::from_parts(desc, c))
    }

    /// Elements whose packed coordinates are the standard unit vectors.
    pub fn coordinate_basis(desc: &Descriptor) -> Vec<Element> {
        (0..desc.dim())
            .map(|k| {
                let mut c = vec![0.0; desc.dim()];
                c[k] = 1.0;
                Element::from_parts(desc, c)
            })
            .collect()
    }
}

fn push_unit(desc: &Descriptor, out: &mut Vec<f64>) {
    match desc.kind() {
        Kind::Sym(n) => {
            for i in 0..*n {
                for j in i..*n {
                    out.push(if i == j { 1.0 } else { 0.0 });
                }
            }
        }
        Kind::Spin(n) => {
            out.push(1.0);
            out.extend(std::iter::repeat_n(0.0, n - 1));
        }
        Kind::Sum(fs) => fs.iter().for_each(|f| push_unit(f, out)),
    }
}

pub(crate) fn pack_sym(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut c = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            c.push(m[(i, j)]);
        }
    }
    c
}

pub(crate) fn unpack_sym(n: usize, coords: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = coords[k];
            m[(j, i)] = coords[k];
            k += 1;
        }
    }
    m
}

pub(crate) fn check_same(a: &Descriptor, b: &Descriptor) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DescriptorMismatch { left: a.to_string(), right: b.to_string() })
    }
}

fn weighted_dot(desc: &Descriptor, x: &[f64], y: &[f64]) -> f64 {
    match desc.kind() {
        Kind::Sym(n) => {
            let mut acc = 0.0;
            let mut k = 0;
            for i in 0..*n {
                for j in i..*n {
                    let w = if i == j { 1.0 } else { 2.0 };
                    acc += w * x[k] * y[k];
                    k += 1;
                }
            }
            acc
        }
        Kind::Spin(_) => 2.0 * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>(),
        Kind::Sum(fs) => {
            let mut off = 0;
            let mut acc = 0.0;
            for f in fs {
                let d = f.dim();
                acc += weighted_dot(f, &x[off..off + d], &y[off..off + d]);
                off += d;
            }
            acc
        }
    }
}

fn jordan_into(desc: &Descriptor, x: &[f64], y: &[f64], out: &mut [f64]) {
    match desc.kind() {
        Kind::Sym(n) => {
            let n = *n;
            // XY then symmetrize: YX = (XY)ᵀ for symmetric X, Y.
            let xm = unpack_sym(n, x);
            let ym = unpack_sym(n, y);
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += xm[(i, l)] * ym[(l, j)] + ym[(i, l)] * xm[(l, j)];
                    }
                    out[k] = 0.5 * s;
                    k += 1;
                }
            }
        }
        Kind::Spin(_) => {
            let (x0, xb) = (x[0], &x[1..]);
            let (y0, yb) = (y[0], &y[1..]);
            out[0] = x0 * y0 + xb.iter().zip(yb).map(|(a, b)| a * b).sum::<f64>();
            for (o, (a, b)) in out[1..].iter_mut().zip(xb.iter().zip(yb)) {
                *o = x0 * b + y0 * a;
            }
        }
        Kind::Sum(fs) => {
            let mut off = 0;
            for f in fs {
                let d = f.dim();
                jordan_into(f, &x[off..off + d], &y[off..off + d], &mut out[off..off + d]);
                off += d;
            }
        }
    }
}

/// `x ∘ y`.
pub fn jordan_product(x: &Element, y: &Element) -> Result<Element> {
    check_same(&x.desc, &y.desc)?;
    let mut out = vec![0.0; x.coords.len()];
    jordan_into(&x.desc, &x.coords, &y.coords, &mut out);
    Ok(Element::from_parts(&x.desc, out))
}

/// Trace inner product `<x, y> = tr(x ∘ y)`.
pub fn inner(x: &Element, y: &Element) -> Result<f64> {
    check_same(&x.desc, &y.desc)?;
    Ok(weighted_dot(&x.desc, &x.coords, &y.coords))
}

pub fn unit(desc: &Descriptor) -> Element {
    Element::unit(desc)
}

/// Element with iid Gaussian coordinates of standard deviation `scale`.
///
/// Symmetric matrices get the orthogonal-ensemble fill: off-diagonal entries
/// have half the variance of the diagonal ones.
pub fn random_element<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R, scale: f64) -> Element {
    assert!(scale >= 0.0, "scale must be nonnegative");
    let mut coords = Vec::with_capacity(desc.dim());
    fill_random(desc, rng, scale, &mut coords);
    Element::from_parts(desc, coords)
}

fn fill_random<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R, scale: f64, out: &mut Vec<f64>) {
    match desc.kind() {
        Kind::Sym(n) => {
            for i in 0..*n {
                for j in i..*n {
                    let z: f64 = rng.sample(StandardNormal);
                    let sd = if i == j { scale } else { scale * std::f64::consts::FRAC_1_SQRT_2 };
                    out.push(sd * z);
                }
            }
        }
        Kind::Spin(n) => {
            for _ in 0..*n {
                let z: f64 = rng.sample(StandardNormal);
                out.push(scale * z);
            }
        }
        Kind::Sum(fs) => fs.iter().for_each(|f| fill_random(f, rng, scale, out)),
    }
}

/// `x ∘ x` for a random `x`; always lies in the symmetric cone.
pub fn random_cone_element<R: Rng + ?Sized>(desc: &Descriptor, rng: &mut R, scale: f64) -> Element {
    random_element(desc, rng, scale).square()
}

/// Whether `L_a` and `L_b` commute, tested on the coordinate basis.
pub fn operator_commutes(a: &Element, b: &Element, tol: f64) -> Result<bool> {
    Ok(commutator_defect(a, b)? <= tol)
}

/// `max_z ‖a∘(b∘z) − b∘(a∘z)‖` over the coordinate basis.
pub fn commutator_defect(a: &Element, b: &Element) -> Result<f64> {
    check_same(&a.desc, &b.desc)?;
    let mut worst = 0.0_f64;
    for z in Element::coordinate_basis(&a.desc) {
        let ab = jordan_product(a, &jordan_product(b, &z)?)?;
        let ba = jordan_product(b, &jordan_product(a, &z)?)?;
        worst = worst.max(ab.try_sub(&ba)?.norm());
    }
    Ok(worst)
}

impl Add for &Element {
    type Output = Element;

    /// Panics on descriptor mismatch; use [`Element::try_add`] otherwise.
    fn add(self, rhs: &Element) -> Element {
        self.try_add(rhs).expect("descriptor mismatch in +")
    }
}

impl Sub for &Element {
    type Output = Element;

    fn sub(self, rhs: &Element) -> Element {
        self.try_sub(rhs).expect("descriptor mismatch in -")
    }
}

impl Mul<f64> for &Element {
    type Output = Element;

    fn mul(self, rhs: f64) -> Element {
        self.scale(rhs)
    }
}

impl Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}

// ── JSON interchange ────────────────────────────────────────────────

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DescriptorJson {
    Sym { n: usize },
    Spin { n: usize },
    Sum { factors: Vec<DescriptorJson> },
}

impl From<&Descriptor> for DescriptorJson {
    fn from(d: &Descriptor) -> Self {
        match d.kind() {
            Kind::Sym(n) => DescriptorJson::Sym { n: *n },
            Kind::Spin(n) => DescriptorJson::Spin { n: *n },
            Kind::Sum(fs) => DescriptorJson::Sum { factors: fs.iter().map(Into::into).collect() },
        }
    }
}

impl TryFrom<DescriptorJson> for Descriptor {
    type Error = Error;

    fn try_from(d: DescriptorJson) -> Result<Self> {
        match d {
            DescriptorJson::Sym { n } => Descriptor::sym(n),
            DescriptorJson::Spin { n } => Descriptor::spin(n),
            DescriptorJson::Sum { factors } => {
                Descriptor::sum(factors.into_iter().map(Descriptor::try_from).collect::<Result<_>>()?)
            }
        }
    }
}

/// `{kind, n | factors, coords}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct ElementJson {
    #[serde(flatten)]
    descriptor: DescriptorJson,
    coords: Vec<f64>,
}

impl Serialize for Element {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementJson { descriptor: (&self.desc).into(), coords: self.coords.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ElementJson::deserialize(d)?;
        let desc = Descriptor::try_from(raw.descriptor).map_err(serde::de::Error::custom)?;
        Element::new(&desc, raw.coords).map_err(serde::de::Error::custom)
    }
}
