//! The necessary (block-diagonal) and sufficient (wave-function law)
//! conditions as numbers, plus FW observables and the two-component
//! expectation shortcut.

use serde::{Deserialize, Serialize};

use crate::clifford::{block_split, dirac_basis};
use crate::error::{FwError, Result};
use crate::hamiltonians::HamiltonianCase;
use crate::lattice::{Lattice, TwoComponentField};
use crate::linalg::{self, OperatorMatrix, C64};
use crate::spectra::{free_spinors, reference_phi, Branch, EigenSolution, Spectrum};
use crate::transforms::UnitaryMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub block_tol: f64,
    pub lower_tol: f64,
    pub match_tol: f64,
    pub unitarity_tol: f64,
    pub norm_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            block_tol: 1e-10,
            lower_tol: 1e-10,
            match_tol: 1e-10,
            unitarity_tol: 1e-11,
            norm_tol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.entries() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(FwError::InvalidParameter(format!(
                    "tolerance {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("block_tol", self.block_tol),
            ("lower_tol", self.lower_tol),
            ("match_tol", self.match_tol),
            ("unitarity_tol", self.unitarity_tol),
            ("norm_tol", self.norm_tol),
        ]
    }

    /// Overrides one tolerance by name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "block_tol" => &mut self.block_tol,
            "lower_tol" => &mut self.lower_tol,
            "match_tol" => &mut self.match_tol,
            "unitarity_tol" => &mut self.unitarity_tol,
            "norm_tol" => &mut self.norm_tol,
            _ => return Err(FwError::InvalidParameter(format!("unknown tolerance key {key:?}"))),
        };
        *slot = value;
        self.validate()
    }
}

/// `‖offdiag(U H U†)‖ / ‖H‖`, Frobenius norms.
pub fn necessary_residual(u: &OperatorMatrix, h: &OperatorMatrix) -> Result<f64> {
    linalg::check_square(u, h.nrows())?;
    let hn = linalg::norm(h);
    if hn == 0.0 {
        return Err(FwError::Singular("zero Hamiltonian".into()));
    }
    let t = u * h * u.adjoint();
    Ok(block_split(&t)?.off_diagonal_norm() / hn)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sufficiency {
    /// Norm of the component that must vanish.
    pub lower: f64,
    /// Distance from the reference after aligning the global phase.
    #[serde(rename = "match")]
    pub match_: f64,
    /// Phase-insensitive overlap `|⟨ref, φ⟩| / ‖φ‖`.
    pub fidelity: f64,
    /// `‖Uψ‖`.
    pub norm: f64,
}

/// Residuals of the wave-function law for `Uψ`: the wrong-half norm, and the
/// surviving half against `reference` (upper half on the positive branch,
/// lower half on the negative one).
pub fn sufficiency_residual(
    u: &OperatorMatrix,
    sol: &EigenSolution,
    reference: &TwoComponentField,
) -> Result<Sufficiency> {
    linalg::check_square(u, sol.state.values.nrows())?;
    let image = sol.state.transformed(u);
    let (kept, dropped) = match sol.branch {
        Branch::Positive => (image.upper(), image.lower()),
        Branch::Negative => (image.lower(), image.upper()),
    };
    let aligned = kept.aligned_to(reference);
    let kept_norm = kept.norm();
    let fidelity = if kept_norm == 0.0 {
        0.0
    } else {
        reference.inner(&kept).norm() / kept_norm
    };
    Ok(Sufficiency {
        lower: dropped.norm(),
        match_: aligned.sub(reference).norm(),
        fidelity,
        norm: image.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinorRelations {
    pub orthonormality: f64,
    pub cross_orthogonality: f64,
    pub completeness_positive: f64,
    pub completeness_negative: f64,
    /// Dirac spinors: orthonormality and `Σ uu† + vv† = 1`.
    pub dirac_orthonormality: f64,
    pub dirac_completeness: f64,
}

impl SpinorRelations {
    pub fn max(&self) -> f64 {
        [
            self.orthonormality,
            self.cross_orthogonality,
            self.completeness_positive,
            self.completeness_negative,
            self.dirac_orthonormality,
            self.dirac_completeness,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Worst deviations of the plane-wave spinor relations over `(p, m)` samples.
pub fn spinor_relations_check(samples: &[([f64; 3], f64)]) -> Result<SpinorRelations> {
    let dot = |a: &[C64; 4], b: &[C64; 4]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let outer_sum = |vs: &[[C64; 4]]| -> [[C64; 4]; 4] {
        let mut out = [[C64::new(0.0, 0.0); 4]; 4];
        for v in vs {
            for i in 0..4 {
                for j in 0..4 {
                    out[i][j] += v[i] * v[j].conj();
                }
            }
        }
        out
    };
    let dev = |a: &[[C64; 4]; 4], b: &[[C64; 4]; 4]| -> f64 {
        (0..16)
            .map(|k| (a[k / 4][k % 4] - b[k / 4][k % 4]).norm())
            .fold(0.0, f64::max)
    };
    let b = dirac_basis();
    let half = |s: f64| (b.identity + b.beta.scale(linalg::c(s))).scale(linalg::c(0.5)).0;
    let mut r = SpinorRelations {
        orthonormality: 0.0,
        cross_orthogonality: 0.0,
        completeness_positive: 0.0,
        completeness_negative: 0.0,
        dirac_orthonormality: 0.0,
        dirac_completeness: 0.0,
    };
    for &(p, m) in samples {
        let mut fw_u = Vec::new();
        let mut fw_v = Vec::new();
        let mut dirac = Vec::new();
        for s in [1, 2] {
            let (du, fu) = free_spinors(p, m, s, Branch::Positive)?;
            let (dv, fv) = free_spinors(p, m, s, Branch::Negative)?;
            fw_u.push(fu);
            fw_v.push(fv);
            dirac.push(du);
            dirac.push(dv);
        }
        for (i, a) in fw_u.iter().enumerate() {
            for (j, bb) in fw_u.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                r.orthonormality = r.orthonormality.max((dot(a, bb) - target).norm());
                r.orthonormality = r.orthonormality.max((dot(&fw_v[i], &fw_v[j]) - target).norm());
            }
            for v in &fw_v {
                r.cross_orthogonality = r.cross_orthogonality.max(dot(a, v).norm().max(dot(v, a).norm()));
            }
        }
        r.completeness_positive = r.completeness_positive.max(dev(&outer_sum(&fw_u), &half(1.0)));
        r.completeness_negative = r.completeness_negative.max(dev(&outer_sum(&fw_v), &half(-1.0)));
        for (i, a) in dirac.iter().enumerate() {
            for (j, bb) in dirac.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                r.dirac_orthonormality = r.dirac_orthonormality.max((dot(a, bb) - target).norm());
            }
        }
        r.dirac_completeness = r.dirac_completeness.max(dev(&outer_sum(&dirac), &b.identity.0));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwExpectation {
    pub full: C64,
    pub shortcut: C64,
}

/// `⟨U_Er ψ| O |U_Er ψ⟩` against the two-component shortcut `⟨φ| O₁₁ |φ⟩`
/// (lower block and `χ` on the negative branch).
pub fn fw_expectation(op_fw: &OperatorMatrix, sol: &EigenSolution, eriksen: &OperatorMatrix) -> Result<FwExpectation> {
    linalg::check_square(op_fw, sol.state.values.nrows())?;
    let image = sol.state.transformed(eriksen);
    let applied = image.transformed(op_fw);
    let full = image.inner(&applied);
    let phi = reference_phi(sol, eriksen)?;
    let split = block_split(op_fw)?;
    let block = match sol.branch {
        Branch::Positive => &split.upper_upper,
        Branch::Negative => &split.lower_lower,
    };
    let moved = TwoComponentField {
        values: block * &phi.values,
        cell_volume: phi.cell_volume,
    };
    Ok(FwExpectation {
        full,
        shortcut: phi.inner(&moved),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Position,
    Velocity,
    Polarization,
}

/// Canonical FW-representation observables along `axis`: the coordinate
/// multiplier, `p/E` with the free `E = √(p² + m²)`, and `βΣ`.
pub fn observable_fw(
    kind: ObservableKind,
    axis: usize,
    case: &HamiltonianCase,
    lattice: &Lattice,
) -> Result<OperatorMatrix> {
    if axis > 2 {
        return Err(FwError::InvalidParameter(format!("axis must be 0, 1 or 2, got {axis}")));
    }
    match kind {
        ObservableKind::Position => lattice.position_multiplier(&lattice.coordinate(axis)),
        ObservableKind::Velocity => {
            let m = case.mass;
            lattice.apply_momentum_function(|p| p[axis] / (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt())
        }
        ObservableKind::Polarization => Ok(lattice.lift(&dirac_basis().polarization[axis])),
    }
}

/// Which eigenstates enter a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSample {
    /// The `n` states closest to zero energy on each branch.
    Lowest(usize),
    Full,
}

impl Default for StateSample {
    fn default() -> Self {
        StateSample::Lowest(8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateReport {
    pub epsilon: f64,
    pub branch: Branch,
    pub lower: f64,
    #[serde(rename = "match")]
    pub match_: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub kind: String,
    pub necessary: f64,
    pub unitarity: f64,
    /// Largest `|‖Uψ‖ − 1|` over the sampled states; not part of the JSON schema.
    #[serde(skip)]
    pub normalization: f64,
    pub states: Vec<StateReport>,
    pub is_fw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport<S> {
    pub scenario: S,
    pub tolerances: Tolerances,
    pub per_transform: Vec<TransformReport>,
}

/// Sampled eigenstates with their Eriksen references, shared by every
/// transform of one Hamiltonian.
pub struct ReferenceStates {
    pub states: Vec<(EigenSolution, TwoComponentField)>,
}

impl ReferenceStates {
    pub fn new(spectrum: &Spectrum, eriksen: &OperatorMatrix, lattice: &Lattice, sample: StateSample) -> Result<Self> {
        let mut idx: Vec<usize> = match sample {
            StateSample::Full => (0..spectrum.energies().len()).collect(),
            StateSample::Lowest(n) => {
                let mut v = spectrum.lowest(Branch::Negative, n);
                v.extend(spectrum.lowest(Branch::Positive, n));
                v
            }
        };
        idx.sort_unstable();
        let states = idx
            .into_iter()
            .map(|k| {
                let sol = spectrum.solution(k, lattice);
                let r = reference_phi(&sol, eriksen)?;
                Ok((sol, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { states })
    }
}

/// Residuals and verdict of one transform.
pub fn transform_report(
    label: &str,
    u: &UnitaryMap,
    h: &OperatorMatrix,
    refs: &ReferenceStates,
    tol: &Tolerances,
) -> Result<TransformReport> {
    let necessary = necessary_residual(&u.matrix, h)?;
    let mut states = Vec::with_capacity(refs.states.len());
    let mut normalization: f64 = 0.0;
    for (sol, r) in &refs.states {
        let s = sufficiency_residual(&u.matrix, sol, r)?;
        normalization = normalization.max((s.norm - 1.0).abs());
        states.push(StateReport {
            epsilon: sol.energy,
            branch: sol.branch,
            lower: s.lower,
            match_: s.match_,
            fidelity: s.fidelity,
        });
    }
    let max_lower = states.iter().map(|s| s.lower).fold(0.0, f64::max);
    let max_match = states.iter().map(|s| s.match_).fold(0.0, f64::max);
    let is_fw = necessary < tol.block_tol && max_lower < tol.lower_tol && max_match < tol.match_tol;
    Ok(TransformReport {
        kind: label.to_string(),
        necessary,
        unitarity: u.unitarity_defect(),
        normalization,
        states,
        is_fw,
    })
}

/// Report over every requested transform of one scenario.
pub fn assemble_report<S>(
    scenario: S,
    transforms: &[(String, UnitaryMap)],
    h: &OperatorMatrix,
    refs: &ReferenceStates,
    tolerances: Tolerances,
) -> Result<VerificationReport<S>> {
    tolerances.validate()?;
    let per_transform = transforms
        .iter()
        .map(|(label, u)| {
            transform_report(label, u, h, refs, &tolerances).map_err(|e| match e {
                FwError::NotApplicable { .. } => e,
                other => FwError::NotApplicable {
                    transform: label.clone(),
                    reason: other.to_string(),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        scenario,
        tolerances,
        per_transform,
    })
}
