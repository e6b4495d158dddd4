//! Dirac-representation matrices, Kronecker lifting and upper/lower block
//! decomposition.
//!
//! Index convention for every lattice operator in the crate: a bispinor
//! vector of `n` sites has length `4n` and component `a` at site `j` lives at
//! index `a * n + j` (spinor index slow, site index fast). The upper
//! (β = +1) components therefore occupy the first `2n` indices.

use std::ops::{Add, Mul, Neg, Sub};

use faer::Mat;

use crate::error::{FwError, Result};
use crate::linalg::{c, OperatorMatrix, StateVector, C64, I, ONE, ZERO};

/// A 4×4 complex matrix acting on spinor indices only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMatrix(pub [[C64; 4]; 4]);

/// A 2×2 complex matrix acting on Pauli spinors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliMatrix(pub [[C64; 2]; 2]);

impl SpinMatrix {
    pub fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_blocks(
            PauliMatrix::identity(),
            PauliMatrix::zero(),
            PauliMatrix::zero(),
            PauliMatrix::identity(),
        )
    }

    /// `[[a, b], [c, d]]` in 2×2 blocks.
    pub fn from_blocks(a: PauliMatrix, b: PauliMatrix, cc: PauliMatrix, d: PauliMatrix) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a.0[i][j];
                m[i][j + 2] = b.0[i][j];
                m[i + 2][j] = cc.0[i][j];
                m[i + 2][j + 2] = d.0[i][j];
            }
        }
        Self(m)
    }

    pub fn block(&self, row: usize, col: usize) -> PauliMatrix {
        let mut b = [[ZERO; 2]; 2];
        for (i, r) in b.iter_mut().enumerate() {
            for (j, v) in r.iter_mut().enumerate() {
                *v = self.0[2 * row + i][2 * col + j];
            }
        }
        PauliMatrix(b)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, r) in m.iter_mut().enumerate() {
            for (j, v) in r.iter_mut().enumerate() {
                *v = self.0[j][i].conj();
            }
        }
        Self(m)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        Self(m)
    }

    pub fn to_mat(&self) -> OperatorMatrix {
        Mat::from_fn(4, 4, |i, j| self.0[i][j])
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }
}

impl Mul for SpinMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Self(m)
    }
}

impl Add for SpinMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.0;
        m.iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a += b);
        Self(m)
    }
}

impl Sub for SpinMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for SpinMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(c(-1.0))
    }
}

impl PauliMatrix {
    pub fn zero() -> Self {
        Self([[ZERO; 2]; 2])
    }

    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    /// σ1, σ2, σ3.
    pub fn sigma(axis: usize) -> Self {
        match axis {
            0 => Self([[ZERO, ONE], [ONE, ZERO]]),
            1 => Self([[ZERO, -I], [I, ZERO]]),
            2 => Self([[ONE, ZERO], [ZERO, -ONE]]),
            _ => panic!("Pauli axis out of range: {axis}"),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = self.0;
        m.iter_mut().flatten().for_each(|v| *v *= s);
        Self(m)
    }

    pub fn to_mat(&self) -> OperatorMatrix {
        Mat::from_fn(2, 2, |i, j| self.0[i][j])
    }

    pub fn apply(&self, v: &[C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
}

impl Add for PauliMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut m = self.0;
        m.iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a += b);
        Self(m)
    }
}

/// The Dirac-representation constants, β = diag(I, −I).
#[derive(Debug, Clone, Copy)]
pub struct DiracBasis {
    pub alpha: [SpinMatrix; 3],
    pub beta: SpinMatrix,
    pub gamma5: SpinMatrix,
    /// Σ^i = diag(σ^i, σ^i).
    pub spin: [SpinMatrix; 3],
    /// Polarization Π^i = βΣ^i.
    pub polarization: [SpinMatrix; 3],
    pub identity: SpinMatrix,
}

pub fn dirac_basis() -> DiracBasis {
    let z = PauliMatrix::zero();
    let id = PauliMatrix::identity();
    let alpha = [0, 1, 2].map(|k| {
        let s = PauliMatrix::sigma(k);
        SpinMatrix::from_blocks(z, s, s, z)
    });
    let beta = SpinMatrix::from_blocks(id, z, z, id.scale(c(-1.0)));
    let spin = [0, 1, 2].map(|k| {
        let s = PauliMatrix::sigma(k);
        SpinMatrix::from_blocks(s, z, z, s)
    });
    let polarization = spin.map(|s| beta * s);
    let gamma5 = (alpha[0] * alpha[1] * alpha[2]).scale(I);
    DiracBasis {
        alpha,
        beta,
        gamma5,
        spin,
        polarization,
        identity: SpinMatrix::identity(),
    }
}

/// `M ⊗ S`: spinor matrix `m` combined with an `n × n` site operator `s`.
pub fn spin_kron(m: &SpinMatrix, s: &OperatorMatrix) -> OperatorMatrix {
    let n = s.nrows();
    Mat::from_fn(4 * n, 4 * n, |i, j| {
        let a = m.0[i / n][j / n];
        if a == ZERO {
            ZERO
        } else {
            a * s[(i % n, j % n)]
        }
    })
}

/// `σ ⊗ S` on two-component fields (length `2n`).
pub fn pauli_kron(m: &PauliMatrix, s: &OperatorMatrix) -> OperatorMatrix {
    let n = s.nrows();
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        let a = m.0[i / n][j / n];
        if a == ZERO {
            ZERO
        } else {
            a * s[(i % n, j % n)]
        }
    })
}

/// Acts as `m` on spinor indices and as the identity on `sites` lattice sites.
pub fn lift(m: &SpinMatrix, sites: usize) -> OperatorMatrix {
    assert!(sites >= 1, "lift needs at least one site");
    let n = sites;
    Mat::from_fn(
        4 * n,
        4 * n,
        |i, j| {
            if i % n == j % n {
                m.0[i / n][j / n]
            } else {
                ZERO
            }
        },
    )
}

/// The four 2n×2n blocks of a bispinor operator relative to β = ±1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSplit {
    pub upper_upper: OperatorMatrix,
    pub upper_lower: OperatorMatrix,
    pub lower_upper: OperatorMatrix,
    pub lower_lower: OperatorMatrix,
}

pub fn block_split(m: &OperatorMatrix) -> Result<BlockSplit> {
    let dim = m.nrows();
    if m.ncols() != dim {
        return Err(FwError::Dimension {
            expected: dim,
            found: m.ncols(),
        });
    }
    if dim == 0 || !dim.is_multiple_of(4) {
        return Err(FwError::NotBispinor(dim));
    }
    let h = dim / 2;
    let take = |r0: usize, c0: usize| m.submatrix(r0, c0, h, h).to_owned();
    Ok(BlockSplit {
        upper_upper: take(0, 0),
        upper_lower: take(0, h),
        lower_upper: take(h, 0),
        lower_lower: take(h, h),
    })
}

impl BlockSplit {
    pub fn reassemble(&self) -> OperatorMatrix {
        let h = self.upper_upper.nrows();
        Mat::from_fn(2 * h, 2 * h, |i, j| match (i < h, j < h) {
            (true, true) => self.upper_upper[(i, j)],
            (true, false) => self.upper_lower[(i, j - h)],
            (false, true) => self.lower_upper[(i - h, j)],
            (false, false) => self.lower_lower[(i - h, j - h)],
        })
    }

    /// Frobenius norm of the two odd (off-diagonal) blocks.
    pub fn off_diagonal_norm(&self) -> f64 {
        (self.upper_lower.squared_norm_l2() + self.lower_upper.squared_norm_l2()).sqrt()
    }
}

/// Upper (β = +1) half of a bispinor vector.
pub fn upper(v: &StateVector) -> StateVector {
    let h = v.nrows() / 2;
    StateVector::from_fn(h, |i| v[i])
}

/// Lower (β = −1) half of a bispinor vector.
pub fn lower(v: &StateVector) -> StateVector {
    let h = v.nrows() / 2;
    StateVector::from_fn(h, |i| v[h + i])
}

/// Concatenates upper and lower halves.
pub fn join(upper: &StateVector, lower: &StateVector) -> StateVector {
    let h = upper.nrows();
    StateVector::from_fn(h + lower.nrows(), |i| if i < h { upper[i] } else { lower[i - h] })
}

/// Projectors `(1 ± β)/2` lifted to `sites`.
pub fn branch_projector(positive: bool, sites: usize) -> OperatorMatrix {
    let b = dirac_basis();
    let sign = if positive { 1.0 } else { -1.0 };
    lift(&(b.identity + b.beta.scale(c(sign))).scale(c(0.5)), sites)
}
