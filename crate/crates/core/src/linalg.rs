//! Dense complex matrix helpers and Hermitian matrix functions.
//!
//! Every operator function used by the toolkit (square roots, inverse square
//! roots, the sign function, energies) goes through [`HermitianEigen`], so
//! there is exactly one place where spectral calculus happens.

use faer::{Col, Mat, Scale, Side};

use crate::error::{FwError, Result};

pub type C64 = num_complex::Complex64;

/// Dense complex square matrix acting on the truncated Hilbert space.
pub type OperatorMatrix = Mat<C64>;

/// Dense complex column vector.
pub type StateVector = Col<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> OperatorMatrix {
    Mat::identity(n, n)
}

pub fn zeros(n: usize) -> OperatorMatrix {
    Mat::zeros(n, n)
}

pub fn scaled(a: &OperatorMatrix, s: C64) -> OperatorMatrix {
    Scale(s) * a
}

pub fn adjoint(a: &OperatorMatrix) -> OperatorMatrix {
    a.adjoint().to_owned()
}

pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a * b + b * a
}

/// Frobenius norm.
pub fn norm(a: &OperatorMatrix) -> f64 {
    a.norm_l2()
}

pub fn distance(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    (a - b).norm_l2()
}

/// `‖A − A†‖`, Frobenius.
pub fn hermiticity_defect(a: &OperatorMatrix) -> f64 {
    (a - a.adjoint()).norm_l2()
}

/// `‖U U† − I‖`, Frobenius.
pub fn unitarity_defect(u: &OperatorMatrix) -> f64 {
    let n = u.nrows();
    (u * u.adjoint() - identity(n)).norm_l2()
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: &OperatorMatrix) -> OperatorMatrix {
    Scale(c(0.5)) * (a + a.adjoint())
}

pub fn diagonal(values: &[C64]) -> OperatorMatrix {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
}

pub fn real_diagonal(values: &[f64]) -> OperatorMatrix {
    let n = values.len();
    Mat::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { ZERO })
}

pub fn inner(a: &StateVector, b: &StateVector) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn vector_norm(a: &StateVector) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn apply(a: &OperatorMatrix, v: &StateVector) -> StateVector {
    a * v
}

pub fn check_square(a: &OperatorMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(FwError::Dimension {
            expected: n,
            found: if a.nrows() != n { a.nrows() } else { a.ncols() },
        });
    }
    Ok(())
}

/// Spectral decomposition `A = V diag(values) V†` of a Hermitian matrix,
/// eigenvalues in nondecreasing order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    /// Decomposes the Hermitian part of `a`; the anti-Hermitian remainder of a
    /// Hermitian input is pure roundoff and is discarded.
    pub fn new(a: &OperatorMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(FwError::Dimension {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let h = hermitian_part(a);
        let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| FwError::Eigen)?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok(Self {
            values,
            vectors: evd.U().to_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(values)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> OperatorMatrix {
        let weights: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        self.reassemble(&weights)
    }

    /// Like [`map`](Self::map) but the function may refuse an eigenvalue.
    pub fn try_map(&self, f: impl Fn(f64) -> Result<f64>) -> Result<OperatorMatrix> {
        let weights = self.values.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(self.reassemble(&weights))
    }

    fn reassemble(&self, weights: &[f64]) -> OperatorMatrix {
        let n = self.dim();
        let v = &self.vectors;
        let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * weights[j]);
        scaled * v.adjoint()
    }

    /// Largest eigenvalue magnitude (spectral norm of the decomposed matrix).
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// `f(A)` for Hermitian `A`.
pub fn hermitian_function(a: &OperatorMatrix, f: impl Fn(f64) -> f64) -> Result<OperatorMatrix> {
    Ok(HermitianEigen::new(a)?.map(f))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues below `-tol` are rejected; those in `[-tol, 0)` are clamped.
pub fn sqrt_psd(a: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    HermitianEigen::new(a)?.try_map(|x| {
        if x < -tol {
            Err(FwError::Singular(format!(
                "square root of an operator with negative eigenvalue {x:e}"
            )))
        } else {
            Ok(x.max(0.0).sqrt())
        }
    })
}

/// Inverse square root of a positive definite Hermitian matrix.
pub fn inv_sqrt_pd(a: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    HermitianEigen::new(a)?.try_map(|x| {
        if x <= tol {
            Err(FwError::Singular(format!(
                "inverse square root of an operator with eigenvalue {x:e}"
            )))
        } else {
            Ok(1.0 / x.sqrt())
        }
    })
}

/// Kronecker product `a ⊗ b` (row index of `a` slow).
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Least-squares slope and coefficient of determination of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}
