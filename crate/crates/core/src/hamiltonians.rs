//! Dirac Hamiltonians for the five interaction cases.
//!
//! All builders share one kinetic routine, `Σ_k α_k ⊗ π_k + β ⊗ (mass term)`,
//! so zeroing an interaction reproduces [`build_free`] bit for bit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clifford::{dirac_basis, pauli_kron, spin_kron, PauliMatrix, SpinMatrix};
use crate::error::{FwError, Result};
use crate::lattice::{symmetrized_product, Lattice, ScalarField, VectorField};
use crate::linalg::{self, c, OperatorMatrix, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Free,
    Magnetic,
    Electric,
    Susy,
    Gravity,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Free => "free",
            CaseKind::Magnetic => "magnetic",
            CaseKind::Electric => "electric",
            CaseKind::Susy => "susy",
            CaseKind::Gravity => "gravity",
        }
    }
}

/// Background fields of the supersymmetric form, `C_I = A_I − iE_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SusyFields {
    pub a: VectorField,
    pub e: VectorField,
    pub a5: ScalarField,
    pub e5: ScalarField,
}

impl SusyFields {
    pub fn zero(lattice: &Lattice) -> Self {
        Self {
            a: VectorField::zero(lattice),
            e: VectorField::zero(lattice),
            a5: ScalarField::constant(lattice, 0.0),
            e5: ScalarField::constant(lattice, 0.0),
        }
    }

    /// Periodic Dirac-oscillator surrogate: `E = (L/2π) sin(2πx/L)` along
    /// every lattice axis, which is `x` near the origin.
    pub fn oscillator(lattice: &Lattice, strength: f64) -> Result<Self> {
        let spec = lattice
            .spec()
            .ok_or_else(|| FwError::InvalidField("the oscillator needs a spatial lattice".into()))?;
        let l = spec.box_length;
        let mut fields = Self::zero(lattice);
        for &axis in lattice.axes() {
            let s = lattice.sample(|x| strength * l / (2.0 * PI) * (2.0 * PI * x[axis] / l).sin());
            fields.e.components[axis] = s.values;
        }
        Ok(fields)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSet {
    Free,
    Magnetic { charge: f64, potential: VectorField },
    Electric { charge: f64, potential: ScalarField },
    Susy(SusyFields),
    Gravity { v: ScalarField, w: ScalarField },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianCase {
    pub mass: f64,
    pub fields: FieldSet,
}

impl HamiltonianCase {
    pub fn free(mass: f64) -> Self {
        Self {
            mass,
            fields: FieldSet::Free,
        }
    }

    pub fn magnetic(mass: f64, charge: f64, potential: VectorField) -> Self {
        Self {
            mass,
            fields: FieldSet::Magnetic { charge, potential },
        }
    }

    pub fn electric(mass: f64, charge: f64, potential: ScalarField) -> Self {
        Self {
            mass,
            fields: FieldSet::Electric { charge, potential },
        }
    }

    pub fn susy(mass: f64, fields: SusyFields) -> Self {
        Self {
            mass,
            fields: FieldSet::Susy(fields),
        }
    }

    pub fn gravity(mass: f64, v: ScalarField, w: ScalarField) -> Self {
        Self {
            mass,
            fields: FieldSet::Gravity { v, w },
        }
    }

    pub fn kind(&self) -> CaseKind {
        match self.fields {
            FieldSet::Free => CaseKind::Free,
            FieldSet::Magnetic { .. } => CaseKind::Magnetic,
            FieldSet::Electric { .. } => CaseKind::Electric,
            FieldSet::Susy(_) => CaseKind::Susy,
            FieldSet::Gravity { .. } => CaseKind::Gravity,
        }
    }

    pub fn build(&self, lattice: &Lattice) -> Result<OperatorMatrix> {
        let m = self.mass;
        match &self.fields {
            FieldSet::Free => build_free(m, lattice),
            FieldSet::Magnetic { charge, potential } => build_magnetic(m, *charge, potential, lattice),
            FieldSet::Electric { charge, potential } => build_electric(m, *charge, potential, lattice),
            FieldSet::Susy(f) => Ok(build_susy(m, f, lattice)?.0),
            FieldSet::Gravity { v, w } => build_gravity(m, v, w, lattice),
        }
    }

    /// Charge and vector potential seen by the two-component reduction;
    /// zero for cases without electromagnetic coupling.
    pub fn electromagnetic(&self, lattice: &Lattice) -> (f64, ScalarField, VectorField) {
        let zero_s = ScalarField::constant(lattice, 0.0);
        let zero_v = VectorField::zero(lattice);
        match &self.fields {
            FieldSet::Magnetic { charge, potential } => (*charge, zero_s, potential.clone()),
            FieldSet::Electric { charge, potential } => (*charge, potential.clone(), zero_v),
            _ => (0.0, zero_s, zero_v),
        }
    }
}

fn check_mass(m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(FwError::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

/// Site-space kinetic momenta `π_k = p_k − e A_k` along the lattice axes.
pub fn kinetic_momenta(e: f64, a: &VectorField, lattice: &Lattice) -> Result<Vec<(usize, OperatorMatrix)>> {
    lattice
        .axes()
        .iter()
        .map(|&axis| {
            let p = lattice.momentum_sites(axis);
            let ak = lattice.multiplier_sites(&a.component(axis).map(|v| e * v))?;
            Ok((axis, p - ak))
        })
        .collect()
}

/// `β ⊗ mass + Σ_k α_k ⊗ odd_k`.
fn dirac_operator(m_profile: &OperatorMatrix, odd: &[(usize, OperatorMatrix)]) -> OperatorMatrix {
    let b = dirac_basis();
    let mut h = spin_kron(&b.beta, m_profile);
    for (axis, op) in odd {
        h += spin_kron(&b.alpha[*axis], op);
    }
    h
}

fn constant_mass(m: f64, lattice: &Lattice) -> OperatorMatrix {
    linalg::scaled(&linalg::identity(lattice.sites()), c(m))
}

pub fn build_free(m: f64, lattice: &Lattice) -> Result<OperatorMatrix> {
    check_mass(m)?;
    let momenta: Vec<_> = lattice
        .axes()
        .iter()
        .map(|&axis| (axis, lattice.momentum_sites(axis)))
        .collect();
    Ok(dirac_operator(&constant_mass(m, lattice), &momenta))
}

/// `α·(p − eA) + βm`. A periodic potential carries no net flux; the
/// scenario-level flux-tube amplitude is validated by [`check_flux_quantization`].
pub fn build_magnetic(m: f64, e: f64, a: &VectorField, lattice: &Lattice) -> Result<OperatorMatrix> {
    check_mass(m)?;
    let momenta = kinetic_momenta(e, a, lattice)?;
    Ok(dirac_operator(&constant_mass(m, lattice), &momenta))
}

/// `α·p + βm + eA0`.
pub fn build_electric(m: f64, e: f64, a0: &ScalarField, lattice: &Lattice) -> Result<OperatorMatrix> {
    let mut h = build_free(m, lattice)?;
    let v = lattice.position_multiplier(&a0.map(|x| e * x))?;
    h += v;
    Ok(h)
}

/// `βmV + ½{α·p, V/W}`.
pub fn build_gravity(m: f64, v: &ScalarField, w: &ScalarField, lattice: &Lattice) -> Result<OperatorMatrix> {
    check_mass(m)?;
    check_metric(v, w)?;
    let f = lattice.multiplier_sites(&v.zip(w, |a, b| a / b))?;
    let mv = lattice.multiplier_sites(&v.map(|x| m * x))?;
    let odd = lattice
        .axes()
        .iter()
        .map(|&axis| Ok((axis, symmetrized_product(&f, &lattice.momentum_sites(axis))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(dirac_operator(&mv, &odd))
}

pub fn check_metric(v: &ScalarField, w: &ScalarField) -> Result<()> {
    for (name, f) in [("V", v), ("W", w)] {
        if let Some((i, x)) = f.values.iter().enumerate().find(|(_, x)| x.is_nan() || **x <= 0.0) {
            return Err(FwError::InvalidField(format!(
                "metric function {name} must be positive, got {x} at grid point {i}"
            )));
        }
    }
    Ok(())
}

/// Odd supercharges: `Q` has the single lower-left block `M`, `Q†` the
/// upper-right block `M†`.
#[derive(Debug, Clone)]
pub struct SusyPair {
    pub q: OperatorMatrix,
    pub q_dag: OperatorMatrix,
    /// `M = σ·(p + C) − iC5`, acting on two-component fields.
    pub m_block: OperatorMatrix,
}

impl SusyPair {
    /// `{Q, Q†} = diag(M†M, MM†)`.
    pub fn anticommutator(&self) -> OperatorMatrix {
        linalg::anticommutator(&self.q, &self.q_dag)
    }
}

/// `H = Q + Q† + βm`, i.e. `[[m, M†], [M, −m]]` with `M = σ·(p + C) − iC5`,
/// `C_I = A_I − iE_I`.
pub fn build_susy(m: f64, f: &SusyFields, lattice: &Lattice) -> Result<(OperatorMatrix, SusyPair)> {
    check_mass(m)?;
    let n = lattice.sites();
    let c5 = lattice.multiplier_sites(&f.a5)? - linalg::scaled(&lattice.multiplier_sites(&f.e5)?, I);
    let mut mb = pauli_kron(&PauliMatrix::identity(), &linalg::scaled(&c5, -I));
    for &axis in lattice.axes() {
        let ck = lattice.multiplier_sites(&f.a.component(axis))?
            - linalg::scaled(&lattice.multiplier_sites(&f.e.component(axis))?, I);
        let pi = lattice.momentum_sites(axis) + ck;
        mb += pauli_kron(&PauliMatrix::sigma(axis), &pi);
    }
    let mut q = linalg::zeros(4 * n);
    q.as_mut().submatrix_mut(2 * n, 0, 2 * n, 2 * n).copy_from(&mb);
    let q_dag = linalg::adjoint(&q);
    let mut h = spin_kron(&dirac_basis().beta, &constant_mass(m, lattice));
    h += &q;
    h += &q_dag;
    Ok((h, SusyPair { q, q_dag, m_block: mb }))
}

/// How the `−eΣ·B` term of the squared magnetic Hamiltonian is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldStrength {
    /// `(i/2) ε_ijk Σ_k [π_i, π_j]`; exact on the lattice.
    Commutator,
    /// Multiplier by the spectral curl of `A`; differs from the commutator
    /// form by aliasing at the grid edge.
    SpectralCurl,
}

/// `(π² − eΣ·B + m²)`, block-diagonal in β.
pub fn magnetic_square_operator(
    m: f64,
    e: f64,
    a: &VectorField,
    lattice: &Lattice,
    strength: FieldStrength,
) -> Result<OperatorMatrix> {
    check_mass(m)?;
    let b = dirac_basis();
    let momenta = kinetic_momenta(e, a, lattice)?;
    let n = lattice.sites();
    let mut sq = constant_mass(m * m, lattice);
    for (_, pi) in &momenta {
        sq += pi * pi;
    }
    let mut out = spin_kron(&SpinMatrix::identity(), &sq);
    match strength {
        FieldStrength::Commutator => {
            for (ia, (ai, pi)) in momenta.iter().enumerate() {
                for (aj, pj) in momenta.iter().skip(ia + 1) {
                    let k = 3 - ai - aj;
                    let sign = if (aj + 3 - ai) % 3 == 1 { 1.0 } else { -1.0 };
                    let comm = linalg::scaled(&linalg::commutator(pi, pj), I * sign);
                    out += spin_kron(&b.spin[k], &comm);
                }
            }
        }
        FieldStrength::SpectralCurl => {
            let field = lattice.curl(a)?;
            for k in 0..3 {
                let bk = lattice.multiplier_sites(&field.component(k).map(|x| -e * x))?;
                out += spin_kron(&b.spin[k], &bk);
            }
        }
    }
    debug_assert_eq!(out.nrows(), 4 * n);
    Ok(out)
}

/// Flux of the tube potential `A_y = B0 (L/2π) sin(2πx/L)` through half
/// the cell, in units of the flux quantum: `e·B0·L²/(2π)`.
pub fn flux_quanta(e: f64, b0: f64, box_length: f64) -> f64 {
    e * b0 * box_length * box_length / (2.0 * PI)
}

pub fn check_flux_quantization(e: f64, b0: f64, box_length: f64) -> Result<()> {
    let q = flux_quanta(e, b0, box_length);
    if (q - q.round()).abs() > 1e-9 * q.abs().max(1.0) {
        let nearest = q.round() * 2.0 * PI / (e * box_length * box_length);
        return Err(FwError::InvalidField(format!(
            "magnetic flux e·B·L²/2π = {q} is not an integer; nearest quantized amplitude B = {nearest}"
        )));
    }
    Ok(())
}

/// `A = (0, B0 (L/2π) sin(2πx/L), 0)`, so `B_z = B0 cos(2πx/L)`.
pub fn flux_tube_potential(lattice: &Lattice, b0: f64) -> Result<VectorField> {
    let spec = lattice
        .spec()
        .filter(|s| s.dimension >= 2)
        .ok_or_else(|| FwError::InvalidField("a flux tube needs a 2-D or 3-D lattice".into()))?;
    let l = spec.box_length;
    let mut a = VectorField::zero(lattice);
    a.components[1] = lattice
        .sample(|x| b0 * l / (2.0 * PI) * (2.0 * PI * x[0] / l).sin())
        .values;
    Ok(a)
}
