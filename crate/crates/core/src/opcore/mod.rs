//! Dense complex matrix algebra.
//!
//! [`CMat`] is the carrier for every operator in the crate. All validation
//! residuals are measured in the operator (spectral) norm, written `‖·‖∞`
//! throughout the docs.

mod spectral;
pub mod random;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub use spectral::{annihilation_witness, is_positive, spectral_decompose, SpectralResolution};

pub type C64 = Complex<f64>;

/// Validation tolerance and eigenvalue clustering gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub tol: f64,
    pub cluster_gap: f64,
}

impl Tolerances {
    pub const DEFAULT_TOL: f64 = 1e-9;
    pub const DEFAULT_CLUSTER_GAP: f64 = 1e-8;

    pub fn new(tol: f64, cluster_gap: f64) -> Self {
        Self { tol, cluster_gap }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(Self::DEFAULT_TOL, Self::DEFAULT_CLUSTER_GAP)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

impl CMat {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        for col in 0..m.ncols() {
            for row in 0..m.nrows() {
                let z = m[(row, col)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self(m))
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| c(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) }))
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn ray_projector(v: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(v);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroOperator { norm });
        }
        let u = v / c(norm, 0.0);
        Self::new(&u * u.adjoint())
    }

    /// Projector onto the span of the given orthonormal columns.
    pub fn column_projector(q: &DMatrix<C64>) -> Self {
        Self(q * q.adjoint())
    }

    /// Unit basis vector `e_k` as a rank-one projector.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = c(1.0, 0.0);
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * c(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn kron(&self, other: &CMat) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn commutator(&self, other: &CMat) -> Self {
        self * other - other * self
    }

    /// Operator norm, `sqrt(λ_max(M†M))`.
    pub fn op_norm(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        let lmax = gram
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, &x| acc.max(x));
        lmax.max(0.0).sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    pub fn normality_residual(&self) -> f64 {
        let a = self.adjoint();
        (self * &a - &a * self).op_norm()
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(0.5)
    }

    /// `(M − M†)/(2i)`
    pub fn antihermitian_part(&self) -> Self {
        (self - &self.adjoint()).scale_c(c(0.0, -0.5))
    }

    pub fn distance(&self, other: &CMat) -> f64 {
        (self - other).op_norm()
    }

    pub(crate) fn check_same_dim(&self, other: &CMat) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMat{}", self.0)
    }
}

/// `tr[DB]`.
pub fn trace_inner(d: &CMat, b: &CMat) -> Result<C64> {
    d.check_same_dim(b)?;
    let (dm, bm) = (d.as_matrix(), b.as_matrix());
    let n = d.dim();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += dm[(i, k)] * bm[(k, i)];
        }
    }
    Ok(acc)
}

/// `‖AB − BA‖∞`.
pub fn commutator_norm(a: &CMat, b: &CMat) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(a.commutator(b).op_norm())
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&CMat> for &CMat {
            type Output = CMat;
            fn $method(self, rhs: &CMat) -> CMat {
                CMat(&self.0 $op &rhs.0)
            }
        }
        impl $tr<CMat> for CMat {
            type Output = CMat;
            fn $method(self, rhs: CMat) -> CMat {
                CMat(self.0 $op rhs.0)
            }
        }
        impl $tr<&CMat> for CMat {
            type Output = CMat;
            fn $method(self, rhs: &CMat) -> CMat {
                CMat(self.0 $op &rhs.0)
            }
        }
        impl $tr<CMat> for &CMat {
            type Output = CMat;
            fn $method(self, rhs: CMat) -> CMat {
                CMat(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat(-&self.0)
    }
}

impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        CMat(-self.0)
    }
}
