//! Finite-dimensional complex inner-product arithmetic.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, C64};

/// Default relative rank threshold for kernels and ranks.
pub const RANK_TOL: f64 = 1e-10;

/// Element of the truncated space `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertVector(pub DVector<C64>);

impl HilbertVector {
    pub fn from_vec(coords: Vec<C64>) -> Self {
        Self(DVector::from_vec(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    /// Standard basis vector `e_index` (zero based).
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// Complex normal entries, `E|x_i|² = 1`.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self(DVector::from_fn(dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `self + c·other`
    pub fn axpy(&self, c: C64, other: &Self) -> Self {
        Self(&self.0 + &other.0 * c)
    }

    /// Returns `self / ‖self‖`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0).then(|| Self(&self.0 / C64::new(n, 0.0)))
    }
}

/// Inner product, linear in the first argument and conjugate-linear in the
/// second.
pub fn inner(u: &HilbertVector, v: &HilbertVector) -> Result<C64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(inner_unchecked(u, v))
}

pub(crate) fn inner_unchecked(u: &HilbertVector, v: &HilbertVector) -> C64 {
    u.0.iter().zip(v.0.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Dense `d×d` operator.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator(pub DMatrix<C64>);

impl LinearOperator {
    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, u: &HilbertVector) -> HilbertVector {
        HilbertVector(&self.0 * &u.0)
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        singular_values(&self.0).into_iter().fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Ratio of extreme singular values; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let s = singular_values(&self.0);
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn rank(&self, rank_tol: f64) -> usize {
        numerical_rank(&self.0, rank_tol)
    }
}

/// Orthonormal family spanning a subspace; possibly empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    dim: usize,
    basis: Vec<HilbertVector>,
}

impl Subspace {
    /// Caller guarantees orthonormality.
    pub fn from_orthonormal(dim: usize, basis: Vec<HilbertVector>) -> Self {
        Self { dim, basis }
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            basis: Vec::new(),
        }
    }

    pub fn whole(dim: usize) -> Self {
        Self {
            dim,
            basis: (0..dim).map(|i| HilbertVector::basis(dim, i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[HilbertVector] {
        &self.basis
    }

    /// Basis as the columns of a `d×k` matrix.
    pub fn matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.basis.len());
        for (j, b) in self.basis.iter().enumerate() {
            m.set_column(j, &b.0);
        }
        m
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        if self.basis.is_empty() {
            return Subspace::whole(self.dim);
        }
        // The complement is the kernel of the adjoint of the basis matrix.
        let bt = self.matrix().adjoint();
        Subspace::from_orthonormal(self.dim, null_space(&bt, RANK_TOL))
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.matrix();
        let g = m.adjoint() * &m;
        let id = DMatrix::<C64>::identity(g.nrows(), g.ncols());
        (g - id).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Orthonormal basis of `∩ ker(ops)`.
///
/// Singular values of the stacked matrix below `rank_tol·σ_max` count as
/// zero. An all-zero stack has the whole space as kernel.
pub fn joint_kernel(ops: &[LinearOperator], rank_tol: f64) -> Result<Subspace> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidInput("joint_kernel needs at least one operator".into()))?;
    let d = first.dim();
    if let Some(bad) = ops.iter().find(|op| op.dim() != d || op.0.nrows() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    let mut stacked = DMatrix::zeros(d * ops.len(), d);
    for (k, op) in ops.iter().enumerate() {
        stacked.view_mut((k * d, 0), (d, d)).copy_from(&op.0);
    }
    Ok(Subspace::from_orthonormal(d, null_space(&stacked, rank_tol)))
}

/// Columns of the unitary factor of a complex Gaussian matrix.
pub fn random_orthonormal_basis(dim: usize, rng: &mut impl Rng) -> Vec<HilbertVector> {
    let cols: Vec<DVector<C64>> = (0..dim).map(|_| HilbertVector::random(dim, rng).0).collect();
    let q = DMatrix::from_columns(&cols).qr().q();
    (0..dim).map(|i| HilbertVector(q.column(i).into_owned())).collect()
}

/// Orthogonal projection of `u` onto `s`.
pub fn project(u: &HilbertVector, s: &Subspace) -> Result<HilbertVector> {
    if u.dim() != s.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: s.ambient_dim(),
            found: u.dim(),
        });
    }
    Ok(s.basis()
        .iter()
        .fold(HilbertVector::zeros(u.dim()), |acc, b| {
            acc.axpy(inner_unchecked(u, b), b)
        }))
}

pub(crate) fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().singular_values().iter().cloned().collect()
}

pub(crate) fn numerical_rank(m: &DMatrix<C64>, rank_tol: f64) -> usize {
    let s = singular_values(m);
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rank_tol * max).count()
}

/// Orthonormal basis of the right null space of an `m×n` matrix.
pub(crate) fn null_space(m: &DMatrix<C64>, rank_tol: f64) -> Vec<HilbertVector> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    // Pad to at least n rows so the SVD returns a full set of right vectors.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| max == 0.0 || s <= rank_tol * max)
        .map(|(i, _)| HilbertVector(v_t.row(i).adjoint()))
        .collect()
}

/// Minimum-norm least-squares solution of `m x = b` via SVD.
///
/// Returns the solution and the numerical rank of `m`.
pub(crate) fn lstsq(m: &DMatrix<C64>, b: &DVector<C64>, rank_tol: f64) -> (DVector<C64>, usize) {
    let svd = m.clone().svd(true, true);
    let max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return (DVector::zeros(m.ncols()), 0);
    }
    let u = svd.u.as_ref().expect("requested u");
    let v_t = svd.v_t.as_ref().expect("requested v_t");
    let mut x = DVector::zeros(m.ncols());
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= rank_tol * max {
            continue;
        }
        rank += 1;
        let coeff = u.column(i).dotc(b) / C64::new(s, 0.0);
        x += v_t.row(i).adjoint() * coeff;
    }
    (x, rank)
}
