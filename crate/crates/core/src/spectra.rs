//! Eigenstates, the operator sign function and two-component reductions.

use serde::{Deserialize, Serialize};

use crate::clifford::{dirac_basis, pauli_kron, PauliMatrix};
use crate::error::{FwError, Result};
use crate::hamiltonians::{kinetic_momenta, FieldSet, HamiltonianCase};
use crate::lattice::{symmetrized_product, BispinorField, Lattice, TwoComponentField};
use crate::linalg::{self, c, HermitianEigen, OperatorMatrix, StateVector, C64, ONE, ZERO};

/// Default zero-mode threshold, relative to the spectral radius of `H`.
pub const ZERO_MODE_REL_TOL: f64 = 1e-8;

/// Eigenvalues closer than this (relative to the spectral radius) are
/// treated as one degenerate level.
const DEGENERACY_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn of(energy: f64) -> Self {
        if energy > 0.0 {
            Branch::Positive
        } else {
            Branch::Negative
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub energy: f64,
    pub state: BispinorField,
    pub branch: Branch,
}

impl EigenSolution {
    pub fn spinors(&self) -> SpinorPair {
        SpinorPair {
            phi: self.state.upper(),
            chi: self.state.lower(),
        }
    }
}

/// Upper and lower halves of a bispinor field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorPair {
    pub phi: TwoComponentField,
    pub chi: TwoComponentField,
}

impl SpinorPair {
    pub fn join(&self) -> BispinorField {
        BispinorField {
            values: crate::clifford::join(&self.phi.values, &self.chi.values),
            cell_volume: self.phi.cell_volume,
        }
    }

    /// The component that survives the FW map on `branch`.
    pub fn large(&self, branch: Branch) -> &TwoComponentField {
        match branch {
            Branch::Positive => &self.phi,
            Branch::Negative => &self.chi,
        }
    }

    pub fn small(&self, branch: Branch) -> &TwoComponentField {
        match branch {
            Branch::Positive => &self.chi,
            Branch::Negative => &self.phi,
        }
    }
}

/// Full canonicalized eigendecomposition of a Dirac Hamiltonian.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigen: HermitianEigen,
    pub zero_mode_tolerance: f64,
}

impl Spectrum {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        Self::with_tolerance(h, ZERO_MODE_REL_TOL)
    }

    pub fn with_tolerance(h: &OperatorMatrix, rel_tol: f64) -> Result<Self> {
        if !h.nrows().is_multiple_of(4) {
            return Err(FwError::NotBispinor(h.nrows()));
        }
        let mut eigen = HermitianEigen::new(h)?;
        let radius = eigen.spectral_radius();
        let tol = rel_tol * radius;
        if let Some(&e) = eigen.values.iter().find(|e| e.abs() < tol) {
            return Err(FwError::ZeroMode {
                energy: e,
                tolerance: tol,
            });
        }
        canonicalize(h, &mut eigen, radius);
        Ok(Self {
            eigen,
            zero_mode_tolerance: tol,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    /// `λ = H/(H²)^{1/2}`.
    pub fn sign_operator(&self) -> OperatorMatrix {
        self.eigen.map(f64::signum)
    }

    /// `(H²)^{1/2}`.
    pub fn energy_operator(&self) -> OperatorMatrix {
        self.eigen.map(f64::abs)
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.eigen.vectors.col(k).to_owned()
    }

    pub fn solution(&self, k: usize, lattice: &Lattice) -> EigenSolution {
        let energy = self.eigen.values[k];
        EigenSolution {
            energy,
            state: BispinorField::from_unit_vector(&self.vector(k), lattice),
            branch: Branch::of(energy),
        }
    }

    pub fn solutions(&self, lattice: &Lattice) -> Vec<EigenSolution> {
        (0..self.eigen.dim()).map(|k| self.solution(k, lattice)).collect()
    }

    /// Indices of the `count` states of `branch` closest to zero energy.
    pub fn lowest(&self, branch: Branch, count: usize) -> Vec<usize> {
        let v = &self.eigen.values;
        let mut idx: Vec<usize> = (0..v.len()).filter(|&k| Branch::of(v[k]) == branch).collect();
        idx.sort_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(a.cmp(&b)));
        idx.truncate(count);
        idx
    }
}

/// Complete orthonormal eigenbasis sorted by energy, with branch tags.
pub fn eigensolve(h: &OperatorMatrix, lattice: &Lattice) -> Result<Vec<EigenSolution>> {
    linalg::check_square(h, lattice.bispinor_dim())?;
    Ok(Spectrum::new(h)?.solutions(lattice))
}

/// The operator sign function of `H`.
pub fn sign_operator(h: &OperatorMatrix) -> Result<OperatorMatrix> {
    Ok(Spectrum::new(h)?.sign_operator())
}

/// Fixes the basis inside degenerate levels: diagonalize `Σ3` where it
/// commutes with `H`, then lexicographic Gram-Schmidt, then the phase.
fn canonicalize(h: &OperatorMatrix, eigen: &mut HermitianEigen, radius: f64) {
    let dim = eigen.dim();
    let sites = dim / 4;
    let scale = radius.max(f64::MIN_POSITIVE);
    let sigma3 = linalg::hermitian_part(&crate::clifford::lift(&dirac_basis().spin[2], sites));
    let use_spin = linalg::norm(&linalg::commutator(&sigma3, h)) < 1e-10 * linalg::norm(h).max(1e-300);
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && eigen.values[end] - eigen.values[end - 1] < DEGENERACY_REL_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let block = eigen.vectors.subcols(start, end - start).to_owned();
            let fixed = canonical_block(&block, use_spin.then_some(&sigma3));
            eigen.vectors.subcols_mut(start, end - start).copy_from(&fixed);
        }
        start = end;
    }
    for k in 0..dim {
        let col = eigen.vectors.col(k).to_owned();
        let phase = pivot_phase(&col);
        for i in 0..dim {
            eigen.vectors[(i, k)] *= phase;
        }
    }
}

fn canonical_block(block: &OperatorMatrix, spin: Option<&OperatorMatrix>) -> OperatorMatrix {
    let k = block.ncols();
    let Some(s) = spin else {
        return gram_schmidt(block).unwrap_or_else(|| block.clone());
    };
    let reduced = block.adjoint() * s * block;
    let Ok(e) = HermitianEigen::new(&reduced) else {
        return gram_schmidt(block).unwrap_or_else(|| block.clone());
    };
    let rotated = block * &e.vectors;
    // descending spin: +1 first
    let mut out = OperatorMatrix::zeros(block.nrows(), k);
    let mut col = 0;
    let mut j = k;
    while j > 0 {
        let hi = j;
        let mut lo = j - 1;
        while lo > 0 && (e.values[hi - 1] - e.values[lo - 1]).abs() < 1e-6 {
            lo -= 1;
        }
        let sub = rotated.subcols(lo, hi - lo).to_owned();
        let fixed = gram_schmidt(&sub).unwrap_or(sub);
        out.subcols_mut(col, hi - lo).copy_from(&fixed);
        col += hi - lo;
        j = lo;
    }
    out
}

/// Orthonormal basis of `span(block)` obtained by projecting `e_0, e_1, …`
/// in turn; `None` if the projections never fill the span.
fn gram_schmidt(block: &OperatorMatrix) -> Option<OperatorMatrix> {
    let (n, k) = (block.nrows(), block.ncols());
    // coordinates of P e_i in the block basis are conj(block[i, :])
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(k);
    for i in 0..n {
        if accepted.len() == k {
            break;
        }
        let mut v: Vec<C64> = (0..k).map(|j| block[(i, j)].conj()).collect();
        for _ in 0..2 {
            for a in &accepted {
                let ov: C64 = a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(a).for_each(|(y, x)| *y -= ov * x);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            v.iter_mut().for_each(|z| *z /= norm);
            accepted.push(v);
        }
    }
    if accepted.len() < k {
        return None;
    }
    let coeffs = OperatorMatrix::from_fn(k, k, |r, col| accepted[col][r]);
    Some(block * coeffs)
}

/// Unit phase making the largest-magnitude entry real positive; near-ties
/// (1e-6 relative) go to the lowest index.
fn pivot_phase(v: &StateVector) -> C64 {
    let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return ONE;
    }
    let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-6)).unwrap_or(0);
    v[pivot].conj() / v[pivot].norm()
}

/// Free plane-wave spinors `(Dirac, FW)` for momentum `p`, Pauli basis
/// spinor `s ∈ {1, 2}` and branch.
pub fn free_spinors(p: [f64; 3], m: f64, s: usize, branch: Branch) -> Result<([C64; 4], [C64; 4])> {
    if !(s == 1 || s == 2) {
        return Err(FwError::InvalidParameter(format!("spin index must be 1 or 2, got {s}")));
    }
    if m.is_nan() || m <= 0.0 {
        return Err(FwError::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    let e = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
    let norm = ((e + m) / (2.0 * e)).sqrt();
    let mut sp = PauliMatrix::zero();
    for (k, pk) in p.iter().enumerate() {
        sp = sp + PauliMatrix::sigma(k).scale(c(*pk / (e + m)));
    }
    let basis = if s == 1 { [ONE, ZERO] } else { [ZERO, ONE] };
    let small = sp.apply(&basis);
    Ok(match branch {
        Branch::Positive => (
            [basis[0], basis[1], small[0], small[1]].map(|z| z * norm),
            [basis[0], basis[1], ZERO, ZERO],
        ),
        Branch::Negative => (
            [-small[0], -small[1], basis[0], basis[1]].map(|z| z * norm),
            [ZERO, ZERO, basis[0], basis[1]],
        ),
    })
}

/// `σ·π` on two-component fields.
fn sigma_dot(momenta: &[(usize, OperatorMatrix)], sites: usize) -> OperatorMatrix {
    let mut out = linalg::zeros(2 * sites);
    for (axis, pi) in momenta {
        out += pauli_kron(&PauliMatrix::sigma(*axis), pi);
    }
    out
}

/// Relative residual `‖Rφ‖/‖φ‖` of the exact two-component equation
/// `[ε − eA0 − βm − σ·π (ε − eA0 + βm)^{-1} σ·π] φ = 0`, on the upper
/// component for the positive branch and the lower one for the negative.
pub fn two_component_residual(sol: &EigenSolution, case: &HamiltonianCase, lattice: &Lattice) -> Result<f64> {
    match case.fields {
        FieldSet::Free | FieldSet::Electric { .. } | FieldSet::Magnetic { .. } => {}
        _ => {
            return Err(FwError::NotApplicable {
                transform: "two-component reduction".into(),
                reason: format!("{} case", case.kind().name()),
            })
        }
    }
    let (e, a0, a) = case.electromagnetic(lattice);
    let n = lattice.sites();
    let beta = sol.branch.sign();
    let m = case.mass;
    let sp = sigma_dot(&kinetic_momenta(e, &a, lattice)?, n);
    let mut inv = Vec::with_capacity(2 * n);
    let mut diag = Vec::with_capacity(2 * n);
    for _ in 0..2 {
        for &v in &a0.values {
            let d = sol.energy - e * v + beta * m;
            if d.abs() < 1e-12 * (sol.energy.abs() + m) {
                return Err(FwError::Singular(format!(
                    "reduced denominator ε − eA0 + βm vanishes (ε = {})",
                    sol.energy
                )));
            }
            inv.push(1.0 / d);
            diag.push(sol.energy - e * v - beta * m);
        }
    }
    let pair = sol.spinors();
    let phi = &pair.large(sol.branch).values;
    let middle = linalg::real_diagonal(&inv);
    let r = linalg::real_diagonal(&diag) * phi - &sp * (&middle * (&sp * phi));
    let norm = linalg::vector_norm(phi);
    if norm == 0.0 {
        return Err(FwError::Singular("empty large component".into()));
    }
    Ok(linalg::vector_norm(&r) / norm)
}

/// Small component reconstructed from the large one in the static
/// gravitational field: `(σ·p/2m + (1/4m){F − V, σ·p})` acting on `φ` for the
/// positive branch, the same operator with an overall minus on `χ` for the
/// negative branch. `order = 0` keeps only the free term.
pub fn gravity_lower_from_upper(
    large: &TwoComponentField,
    branch: Branch,
    case: &HamiltonianCase,
    lattice: &Lattice,
    order: usize,
) -> Result<TwoComponentField> {
    let FieldSet::Gravity { v, w } = &case.fields else {
        return Err(FwError::NotApplicable {
            transform: "gravity reconstruction".into(),
            reason: format!("{} case", case.kind().name()),
        });
    };
    let k = gravity_small_operator(case.mass, v, w, lattice, order)?;
    let out = &k * &large.values;
    Ok(TwoComponentField {
        values: StateVector::from_fn(out.nrows(), |i| out[i] * branch.sign()),
        cell_volume: large.cell_volume,
    })
}

pub(crate) fn gravity_small_operator(
    m: f64,
    v: &crate::lattice::ScalarField,
    w: &crate::lattice::ScalarField,
    lattice: &Lattice,
    order: usize,
) -> Result<OperatorMatrix> {
    let n = lattice.sites();
    let momenta: Vec<_> = lattice
        .axes()
        .iter()
        .map(|&axis| (axis, lattice.momentum_sites(axis)))
        .collect();
    let sp = sigma_dot(&momenta, n);
    let mut k = linalg::scaled(&sp, c(0.5 / m));
    if order >= 1 {
        let fv = lattice.multiplier_sites(&v.zip(w, |a, b| a / b - a))?;
        let fv2 = pauli_kron(&PauliMatrix::identity(), &fv);
        k += linalg::scaled(&symmetrized_product(&fv2, &sp)?, c(0.5 / m));
    }
    Ok(k)
}

/// Normalized, phase-fixed large component of the Eriksen image of `sol`:
/// upper half for the positive branch, lower half for the negative one.
pub fn reference_phi(sol: &EigenSolution, eriksen: &OperatorMatrix) -> Result<TwoComponentField> {
    linalg::check_square(eriksen, sol.state.values.nrows())?;
    let image = sol.state.transformed(eriksen);
    let pair = match sol.branch {
        Branch::Positive => image.upper(),
        Branch::Negative => image.lower(),
    };
    Ok(pair.normalized()?.phase_fixed())
}
