//! Dense complex matrices and the validated operator types built on them.
//!
//! Everything here is small and dense: the algebras of interest live in
//! `B(ℂ^d)` with `d` at most around 16, so all kernels are plain `O(d³)`
//! loops over a row-major `Vec<Complex64>`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Shape(format!(
                "expected {} entries for a {dim}×{dim} matrix, found {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / dim, col: k % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Shape(format!(
                "row of length {} in a matrix with {dim} rows",
                bad.len()
            )));
        }
        Self::new(dim, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The rank-one operator `|v⟩⟨w|`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        let dim = v.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in w {
                data.push(a * b.conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.data[r * self.dim + col]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        Self { dim: d, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖self − other‖_F; panics on a dimension mismatch.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "distance between matrices of different size");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    pub fn ensure_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "product of matrices of different size");
        let d = self.dim;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        ComplexMatrix { dim: d, data }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sum of matrices of different size");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "difference of matrices of different size");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}×{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> =
                row.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

// Matrix literal: row-major nested arrays of [re, im] pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            self.rows().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        ComplexMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}

/// Self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::DEFAULT)
    }

    pub fn new_with(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let deviation = matrix.hermiticity_defect();
        if deviation > tol.hermitian * matrix.dim() as f64 {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self { matrix: ComplexMatrix::diagonal(values) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

impl From<Projection> for HermitianOperator {
    fn from(p: Projection) -> Self {
        Self { matrix: p.matrix }
    }
}

/// Orthogonal projection: Hermitian and idempotent.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projection {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::DEFAULT)
    }

    pub fn new_with(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianOperator::new_with(matrix, tol)
            .map_err(|e| Error::NotProjection(e.to_string()))?;
        let m = h.matrix;
        let idem = m.distance(&(&m * &m));
        if idem > tol.projection {
            return Err(Error::NotProjection(format!("‖M² − M‖_F = {idem:e}")));
        }
        let tr = m.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() > tol.projection || rank < 0.0 {
            return Err(Error::NotProjection(format!("trace {tr} is not an integer rank")));
        }
        Ok(Self { matrix: m, rank: rank as usize })
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim), rank: 0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim), rank: dim }
    }

    /// Projection onto the line spanned by `v` (normalized here).
    pub fn onto_vector(v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::NotProjection("cannot project onto a zero vector".into()));
        }
        let u: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&u, &u))
    }

    /// Projection onto the span of orthonormal vectors.
    pub fn onto_orthonormal(vectors: &[Vec<Complex64>], dim: usize) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(dim);
        for v in vectors {
            m = &m + &ComplexMatrix::outer(v, v);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0
    }

    pub fn complement(&self) -> Self {
        Self {
            matrix: &ComplexMatrix::identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && self.rank == other.rank && self.matrix.distance(&other.matrix) <= tol
    }

    /// ‖PQ‖_F.
    pub fn overlap(&self, other: &Self) -> f64 {
        (&self.matrix * &other.matrix).frobenius_norm()
    }

    pub fn conjugated(&self, u: &UnitaryOperator) -> Result<Self> {
        let m = conjugate(u, &self.matrix)?;
        Ok(Self { matrix: m.hermitian_part(), rank: self.rank })
    }

    /// Sum of pairwise orthogonal projections, as in a block sum of a context.
    pub(crate) fn sum_orthogonal<'a>(dim: usize, parts: impl IntoIterator<Item = &'a Projection>) -> Self {
        let mut matrix = ComplexMatrix::zeros(dim);
        let mut rank = 0;
        for p in parts {
            matrix = &matrix + &p.matrix;
            rank += p.rank;
        }
        Self { matrix, rank }
    }

    /// Projection onto range(P) + range(Q).
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.matrix.ensure_same_dim(&other.matrix)?;
        let sum = HermitianOperator { matrix: (&self.matrix + &other.matrix).hermitian_part() };
        let tol = Tolerances::DEFAULT;
        let parts: Vec<Projection> = spectral_decompose(&sum)
            .into_iter()
            .filter(|(lambda, _)| *lambda > tol.cluster.max(1e-6))
            .map(|(_, p)| p)
            .collect();
        Ok(Self::sum_orthogonal(self.dim(), &parts))
    }

    /// Projection onto range(P) ∩ range(Q).
    pub fn meet(&self, other: &Self) -> Result<Self> {
        Ok(self.complement().join(&other.complement())?.complement())
    }
}

/// Unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::DEFAULT)
    }

    pub fn new_with(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let deviation = (&matrix * &matrix.adjoint()).distance(&ComplexMatrix::identity(matrix.dim()));
        if deviation > tol.unitary {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim) }
    }

    /// The central unitary e^{iθ}·1.
    pub fn phase(dim: usize, theta: f64) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale(Complex64::from_polar(1.0, theta)) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.matrix.ensure_same_dim(&other.matrix)?;
        Ok(Self { matrix: &self.matrix * &other.matrix })
    }
}

/// Density matrix of a normal state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityState {
    matrix: ComplexMatrix,
}

impl DensityState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::DEFAULT)
    }

    pub fn new_with(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let h = HermitianOperator::new_with(matrix, tol)
            .map_err(|e| Error::NotDensity(e.to_string()))?;
        let tr = h.matrix.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let smallest = spectral_decompose_with(&h, tol).first().map(|(l, _)| *l).unwrap_or(0.0);
        if smallest < -tol.positivity {
            return Err(Error::NotDensity(format!("negative eigenvalue {smallest:e}")));
        }
        Ok(Self { matrix: h.matrix })
    }

    /// The pure state |v⟩⟨v| (v normalized here).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let p = Projection::onto_vector(v).map_err(|e| Error::NotDensity(e.to_string()))?;
        Ok(Self { matrix: p.matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// tr(ρA), real part.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for i in 0..d {
            for k in 0..d {
                acc += (self.matrix[(i, k)] * a[(k, i)]).re;
            }
        }
        acc
    }

    /// The convex combination `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        self.matrix.ensure_same_dim(&other.matrix)?;
        Self::new(&self.matrix.scale_real(weight) + &other.matrix.scale_real(1.0 - weight))
    }

    /// The state `U ρ U†`.
    pub fn evolved(&self, u: &UnitaryOperator) -> Result<Self> {
        let m = conjugate(u, &self.matrix)?;
        Ok(Self { matrix: m.hermitian_part() })
    }
}

/// Eigenvalues and eigenvectors (as columns) of a Hermitian matrix by cyclic
/// complex Jacobi rotations. Eigenvalues are returned unsorted.
pub fn jacobi_eigen(h: &HermitianOperator) -> (Vec<f64>, ComplexMatrix) {
    let d = h.dim();
    let mut a = h.matrix.data.clone();
    let mut v = ComplexMatrix::identity(d).data;
    let scale = h.matrix.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let b = a[p * d + q];
                let abs_b = b.norm();
                if abs_b <= 1e-300 {
                    continue;
                }
                let e = b / abs_b;
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                let tau = (aqq - app) / (2.0 * abs_b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let ec = e.conj();

                // A ← A·G with G = [[c, s], [−s·ē, c·ē]] on the (p, q) plane.
                for r in 0..d {
                    let x = a[r * d + p];
                    let y = a[r * d + q];
                    a[r * d + p] = x * c - y * ec * s;
                    a[r * d + q] = x * s + y * ec * c;
                }
                // A ← G†·A.
                for r in 0..d {
                    let x = a[p * d + r];
                    let y = a[q * d + r];
                    a[p * d + r] = x * c - y * e * s;
                    a[q * d + r] = x * s + y * e * c;
                }
                a[p * d + q] = ZERO;
                a[q * d + p] = ZERO;
                a[p * d + p] = Complex64::new(a[p * d + p].re, 0.0);
                a[q * d + q] = Complex64::new(a[q * d + q].re, 0.0);
                for r in 0..d {
                    let x = v[r * d + p];
                    let y = v[r * d + q];
                    v[r * d + p] = x * c - y * ec * s;
                    v[r * d + q] = x * s + y * ec * c;
                }
            }
        }
    }
    let values = (0..d).map(|i| a[i * d + i].re).collect();
    (values, ComplexMatrix { dim: d, data: v })
}

/// Spectral decomposition with eigenvalue clustering at the default threshold.
pub fn spectral_decompose(h: &HermitianOperator) -> Vec<(f64, Projection)> {
    spectral_decompose_with(h, &Tolerances::DEFAULT)
}

/// Spectral decomposition `H = Σ λ_k P_k` with strictly increasing `λ_k`.
///
/// Eigenvalues whose consecutive gaps are at most `tol.cluster` are merged and
/// reported by their mean, with the sum of their eigenvectors' projections.
pub fn spectral_decompose_with(h: &HermitianOperator, tol: &Tolerances) -> Vec<(f64, Projection)> {
    let d = h.dim();
    let (values, vectors) = jacobi_eigen(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if values[k] - values[*c.last().unwrap()] <= tol.cluster => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    clusters
        .into_iter()
        .map(|cluster| {
            let lambda = cluster.iter().map(|&k| values[k]).sum::<f64>() / cluster.len() as f64;
            let mut m = ComplexMatrix::zeros(d);
            for &k in &cluster {
                let col = vectors.column(k);
                m = &m + &ComplexMatrix::outer(&col, &col);
            }
            (lambda, Projection { matrix: m.hermitian_part(), rank: cluster.len() })
        })
        .collect()
}

/// `exp(itH)`, assembled from the spectral decomposition.
pub fn unitary_exp(h: &HermitianOperator, t: f64) -> UnitaryOperator {
    unitary_from_spectrum(&spectral_decompose(h), h.dim(), t)
}

pub(crate) fn unitary_from_spectrum(spectrum: &[(f64, Projection)], dim: usize, t: f64) -> UnitaryOperator {
    if t == 0.0 {
        return UnitaryOperator::identity(dim);
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (lambda, p) in spectrum {
        m = &m + &p.matrix.scale(Complex64::from_polar(1.0, t * lambda));
    }
    UnitaryOperator { matrix: m }
}

/// `U A U†`.
pub fn conjugate(u: &UnitaryOperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    u.matrix.ensure_same_dim(a)?;
    Ok(&(&u.matrix * a) * &u.matrix.adjoint())
}

/// `P ≤ Q`, i.e. range(P) ⊆ range(Q).
pub fn projection_leq(p: &Projection, q: &Projection) -> Result<bool> {
    p.matrix.ensure_same_dim(&q.matrix)?;
    Ok((&q.matrix * &p.matrix).distance(&p.matrix) <= Tolerances::DEFAULT.projection)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
pub(crate) fn real_vector(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}
