//! Linear transformations on an algebra: Lyapunov maps `L_a`, quadratic
//! representations `P_a`, Peirce projections, frame-relative Schur products,
//! and their dense operator matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_same, jordan_product, Descriptor, Element};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::spectral::{lambda_min, lowner, spectral_decompose, sqrt_el, sym_eigen, JordanFrame, JACOBI_MAX_SWEEPS, JACOBI_TOL};

/// Asymmetry accepted when loading a multiplier matrix from a file.
pub const LOAD_SYMMETRY_TOL: f64 = 1e-12;

/// `L_a(x) = a ∘ x`.
pub fn lyap(a: &Element, x: &Element) -> Result<Element> {
    jordan_product(a, x)
}

/// `P_a(x) = 2 a∘(a∘x) − a²∘x`.
pub fn quad_rep(a: &Element, x: &Element) -> Result<Element> {
    let ax = jordan_product(a, x)?;
    let a_ax = jordan_product(a, &ax)?;
    let a2x = jordan_product(&a.square(), x)?;
    a_ax.scale(2.0).try_sub(&a2x)
}

/// `P_√a(b)` for `a` in the symmetric cone (eigenvalues down to `-tol`
/// are clamped).
pub fn quad_rep_sqrt(a: &Element, b: &Element, tol: f64) -> Result<Element> {
    check_same(a.descriptor(), b.descriptor())?;
    let root = sqrt_el(a, tol).map_err(|_| Error::Domain("quad_rep_sqrt needs a >= 0".into()))?;
    quad_rep(&root, b)
}

/// Peirce components `x_ij` (`i ≤ j`) of an element relative to a frame.
#[derive(Clone, Debug)]
pub struct PeirceComponents {
    rank: usize,
    comps: Vec<Element>,
}

impl PeirceComponents {
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.rank - i * i.saturating_sub(1) / 2 + (j - i)
    }

    /// Component `x_ij` (symmetric in `i`, `j`; zero-based).
    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.comps[self.slot(i, j)]
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Iterates `(i, j, x_ij)` with `i ≤ j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Element)> {
        let n = self.rank;
        (0..n).flat_map(move |i| (i..n).map(move |j| (i, j))).map(move |(i, j)| (i, j, self.get(i, j)))
    }

    pub fn sum(&self) -> Element {
        let mut out = Element::zeros(self.comps[0].descriptor());
        for c in &self.comps {
            out = out.try_add(c).expect("components share a descriptor");
        }
        out
    }
}

/// `x_ii = <x, e_i> e_i`, `x_ij = 4 e_i∘(e_j∘x)` for `i < j`.
pub fn peirce_project(frame: &JordanFrame, x: &Element) -> Result<PeirceComponents> {
    check_same(frame.descriptor(), x.descriptor())?;
    let es = frame.idempotents();
    let n = es.len();
    let ejx: Vec<Element> = es.iter().map(|e| jordan_product(e, x)).collect::<Result<_>>()?;
    let mut comps = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            let c = if i == j {
                es[i].scale(x.inner(&es[i])?)
            } else {
                jordan_product(&es[i], &ejx[j])?.scale(4.0)
            };
            comps.push(c);
        }
    }
    Ok(PeirceComponents { rank: n, comps })
}

/// Real symmetric multiplier matrix for Schur products.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurMatrix {
    entries: Matrix,
}

impl SchurMatrix {
    /// Requires exact symmetry.
    pub fn new(entries: Matrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::SizeMismatch("Schur multiplier must be a non-empty square matrix".into()));
        }
        if let Some((i, j, gap)) = entries.max_asymmetry() {
            if gap > 0.0 {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Accepts asymmetry up to `tol`, then symmetrizes.
    pub fn from_rows_tolerant(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let mut m = Matrix::from_rows(rows)?;
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::SizeMismatch("Schur multiplier must be a non-empty square matrix".into()));
        }
        if let Some((i, j, gap)) = m.max_asymmetry() {
            if gap > tol {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
        m.symmetrize();
        Ok(Self { entries: m })
    }

    pub fn ones(n: usize) -> Self {
        Self { entries: Matrix::from_row_major(n, n, vec![1.0; n * n]).expect("n*n entries") }
    }

    pub fn identity(n: usize) -> Self {
        Self { entries: Matrix::identity(n) }
    }

    /// `[(a_i + a_j) / 2]`: the multiplier of `L_a` in `a`'s frame.
    pub fn lyapunov_form(a: &[f64]) -> Self {
        Self::from_fn(a.len(), |i, j| 0.5 * (a[i] + a[j]))
    }

    /// `[a_i a_j]`: the multiplier of `P_a` in `a`'s frame.
    pub fn quadratic_form(a: &[f64]) -> Self {
        Self::from_fn(a.len(), |i, j| a[i] * a[j])
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { entries: m }
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.to_rows()
    }

    pub fn diag(&self) -> Vec<f64> {
        self.entries.diagonal()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = sym_eigen(&self.entries, JACOBI_TOL, JACOBI_MAX_SWEEPS)?;
        Ok(*eig.values.last().expect("n >= 1"))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

impl Serialize for SchurMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SchurMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SchurMatrix::from_rows_tolerant(&rows, LOAD_SYMMETRY_TOL).map_err(serde::de::Error::custom)
    }
}

/// `A • x = Σ_{i≤j} a_ij x_ij` relative to `frame`.
pub fn schur(a: &SchurMatrix, frame: &JordanFrame, x: &Element) -> Result<Element> {
    if a.n() != frame.len() {
        return Err(Error::SizeMismatch(format!(
            "{}x{} multiplier for a frame of size {}",
            a.n(),
            a.n(),
            frame.len()
        )));
    }
    let comps = peirce_project(frame, x)?;
    let mut out = vec![0.0; x.descriptor().dim()];
    for (i, j, c) in comps.iter() {
        let w = a.get(i, j);
        if w == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(c.coords()) {
            *o += w * v;
        }
    }
    Element::new(x.descriptor(), out)
}

/// Schur product relative to the decomposition frame of `anchor`.
pub fn schur_in_frame_of(a: &SchurMatrix, anchor: &Element, x: &Element) -> Result<Element> {
    let frame = spectral_decompose(anchor)?.frame;
    schur(a, &frame, x)
}

/// A linear map on an algebra built from the transformations above.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMap {
    Lyapunov(Element),
    Quadratic(Element),
    Schur { matrix: SchurMatrix, frame: JordanFrame },
    /// `outer ∘ inner`.
    Compose(Box<LinearMap>, Box<LinearMap>),
    Combination(Vec<(f64, LinearMap)>),
}

impl LinearMap {
    pub fn compose(outer: LinearMap, inner: LinearMap) -> Self {
        LinearMap::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn descriptor(&self) -> Option<Descriptor> {
        match self {
            LinearMap::Lyapunov(a) | LinearMap::Quadratic(a) => Some(a.descriptor().clone()),
            LinearMap::Schur { frame, .. } => Some(frame.descriptor().clone()),
            LinearMap::Compose(outer, _) => outer.descriptor(),
            LinearMap::Combination(terms) => terms.first().and_then(|(_, m)| m.descriptor()),
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        match self {
            LinearMap::Lyapunov(a) => lyap(a, x),
            LinearMap::Quadratic(a) => quad_rep(a, x),
            LinearMap::Schur { matrix, frame } => schur(matrix, frame, x),
            LinearMap::Compose(outer, inner) => outer.apply(&inner.apply(x)?),
            LinearMap::Combination(terms) => {
                let mut out = Element::zeros(x.descriptor());
                for (w, m) in terms {
                    out = out.axpy(*w, &m.apply(x)?)?;
                }
                Ok(out)
            }
        }
    }

    /// Positive by construction: every `P_c`, Schur products with PSD
    /// multipliers, compositions and nonnegative combinations of those.
    pub fn is_positive_by_construction(&self, tol: f64) -> Result<bool> {
        Ok(match self {
            LinearMap::Lyapunov(_) => false,
            LinearMap::Quadratic(_) => true,
            LinearMap::Schur { matrix, .. } => matrix.is_psd(tol)?,
            LinearMap::Compose(a, b) => a.is_positive_by_construction(tol)? && b.is_positive_by_construction(tol)?,
            LinearMap::Combination(terms) => {
                for (w, m) in terms {
                    if *w < 0.0 || !m.is_positive_by_construction(tol)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }

    /// Accepts maps positive by construction; otherwise checks that the
    /// map sends sampled primitive idempotents (extreme rays of the cone)
    /// into the cone.
    pub fn certify_positive(&self, tol: f64) -> Result<()> {
        if self.is_positive_by_construction(tol)? {
            return Ok(());
        }
        let desc = self.descriptor().ok_or_else(|| Error::NotPositive("empty combination".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut frames = vec![JordanFrame::standard(&desc)];
        frames.extend((0..16).map(|_| JordanFrame::random(&desc, &mut rng)));
        for frame in &frames {
            for c in frame.idempotents() {
                let img = self.apply(c)?;
                let low = lambda_min(&img)?;
                if low < -tol * (1.0 + img.norm()) {
                    return Err(Error::NotPositive(format!("image of a primitive idempotent has eigenvalue {low}")));
                }
            }
        }
        Ok(())
    }
}

/// Dense matrix of a linear map in an orthonormal basis of the trace
/// inner product: entry `(i, j)` is `<b_i, T b_j>`.
pub fn as_matrix(map: &LinearMap, desc: &Descriptor) -> Result<Matrix> {
    let d = desc.dim();
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        let mut unit = vec![0.0; d];
        unit[j] = 1.0;
        let bj = Element::from_orthonormal(desc, &unit)?;
        let col = map.apply(&bj)?.to_orthonormal();
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Sublinear `φ(t) = α t` for `t ≥ 0`, `β t` for `t ≤ 0`, with `β ≤ α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublinearFn {
    alpha: f64,
    beta: f64,
}

impl SublinearFn {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || beta > alpha {
            return Err(Error::Domain(format!("sublinear needs finite beta <= alpha, got ({alpha}, {beta})")));
        }
        Ok(Self { alpha, beta })
    }

    pub const ABS: Self = Self { alpha: 1.0, beta: -1.0 };
    pub const PLUS: Self = Self { alpha: 1.0, beta: 0.0 };
    pub const MINUS: Self = Self { alpha: 0.0, beta: -1.0 };
    pub const IDENTITY: Self = Self { alpha: 1.0, beta: 1.0 };

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_nonnegative(&self) -> bool {
        self.alpha >= 0.0 && self.beta <= 0.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= 0.0 {
            self.alpha * t
        } else {
            self.beta * t
        }
    }
}

pub fn apply_sublinear(phi: SublinearFn, x: &Element) -> Result<Element> {
    lowner(x, |t| phi.eval(t))
}
