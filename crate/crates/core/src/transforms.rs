//! Unitary maps from the Dirac representation: exact FW (free, Eriksen,
//! closed form), the Eriksen-Kolsrud map and its corrector, the SU(2)
//! super-algebra map, and the truncated perturbative series.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clifford::{dirac_basis, lift, spin_kron, SpinMatrix};
use crate::error::{FwError, Result};
use crate::hamiltonians::{check_metric, SusyPair};
use crate::lattice::{symmetrized_product, Lattice, ScalarField, VectorField};
use crate::linalg::{self, c, HermitianEigen, OperatorMatrix, I};
use crate::spectra::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// Free-particle FW map built spectrally from `p`.
    Fw,
    Eriksen,
    /// `(E + m + βO)/√(2E(E+m))` for `H = O + βm` with `O` odd.
    ClosedForm,
    Ek,
    /// Eriksen-Kolsrud followed by the free corrector.
    EkCorrected,
    Su2Plus,
    Su2Minus,
    Perturbative,
    EkPerturbative,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Fw => "fw",
            TransformKind::Eriksen => "eriksen",
            TransformKind::ClosedForm => "closed_form",
            TransformKind::Ek => "ek",
            TransformKind::EkCorrected => "ek_corrected",
            TransformKind::Su2Plus => "su2_plus",
            TransformKind::Su2Minus => "su2_minus",
            TransformKind::Perturbative => "perturbative",
            TransformKind::EkPerturbative => "ek_perturbative",
        }
    }

    /// Exact kinds are unitary to roundoff; the rest carry truncation error.
    pub fn is_exact(self) -> bool {
        !matches!(self, TransformKind::Perturbative | TransformKind::EkPerturbative)
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryMap {
    pub matrix: OperatorMatrix,
    pub kind: TransformKind,
    pub metadata: BTreeMap<String, String>,
}

impl UnitaryMap {
    pub fn new(matrix: OperatorMatrix, kind: TransformKind) -> Self {
        Self {
            matrix,
            kind,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitarity_defect(&self.matrix)
    }

    /// `U H U†`.
    pub fn conjugate(&self, h: &OperatorMatrix) -> OperatorMatrix {
        &self.matrix * h * self.matrix.adjoint()
    }

    /// `self ∘ first`, i.e. the matrix `self · first`.
    pub fn after(&self, first: &UnitaryMap, kind: TransformKind) -> UnitaryMap {
        UnitaryMap::new(&self.matrix * &first.matrix, kind)
            .with("first", first.kind.name())
            .with("then", self.kind.name())
    }
}

/// Named summands of a truncated series; [`sum`](Self::sum) is the assembled matrix.
#[derive(Debug, Clone)]
pub struct PerturbativeTerms {
    pub terms: Vec<(String, OperatorMatrix)>,
}

impl PerturbativeTerms {
    fn new() -> Self {
        Self { terms: Vec::new() }
    }

    fn push(&mut self, name: &str, m: OperatorMatrix) {
        self.terms.push((name.to_string(), m));
    }

    pub fn get(&self, name: &str) -> Option<&OperatorMatrix> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn sum(&self) -> OperatorMatrix {
        let mut it = self.terms.iter();
        let mut acc = it.next().map(|(_, m)| m.clone()).unwrap_or_else(|| linalg::zeros(0));
        for (_, m) in it {
            acc += m;
        }
        acc
    }

    /// Sum of the named subset, in series order.
    pub fn partial_sum(&self, names: &[&str]) -> OperatorMatrix {
        let dim = self.terms.first().map_or(0, |(_, m)| m.nrows());
        let mut acc = linalg::zeros(dim);
        for (n, m) in &self.terms {
            if names.contains(&n.as_str()) {
                acc += m;
            }
        }
        acc
    }
}

fn energy(m: f64) -> impl Fn([f64; 3]) -> f64 {
    move |p| (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt()
}

fn p_squared(p: [f64; 3]) -> f64 {
    p.iter().map(|x| x * x).sum()
}

/// `Σ_k M_k ⊗ p_k` over the lattice axes, with the site factor `p_k·g(p)`.
fn spin_dot_momentum(ms: &[SpinMatrix; 3], lattice: &Lattice, g: impl Fn([f64; 3]) -> f64) -> Result<OperatorMatrix> {
    let mut out = linalg::zeros(lattice.bispinor_dim());
    for &axis in lattice.axes() {
        let site = lattice.momentum_function_sites(|p| p[axis] * g(p))?;
        out += spin_kron(&ms[axis], &site);
    }
    Ok(out)
}

/// `Σ_k M_k ⊗ f_k(x)`.
fn spin_dot_field(ms: &[SpinMatrix; 3], f: &VectorField, lattice: &Lattice) -> Result<OperatorMatrix> {
    let mut out = linalg::zeros(lattice.bispinor_dim());
    for &axis in lattice.axes() {
        out += spin_kron(&ms[axis], &lattice.multiplier_sites(&f.component(axis))?);
    }
    Ok(out)
}

/// `Σ·(f × p)`, symmetrized in each product `f_i p_j`.
fn spin_cross(f: &VectorField, lattice: &Lattice) -> Result<OperatorMatrix> {
    let b = dirac_basis();
    let mut out = linalg::zeros(lattice.bispinor_dim());
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let mut site = linalg::zeros(lattice.sites());
        for (a, bb, sign) in [(i, j, 1.0), (j, i, -1.0)] {
            if lattice.axes().contains(&bb) {
                let fa = lattice.multiplier_sites(&f.component(a))?;
                let pb = lattice.momentum_sites(bb);
                site += linalg::scaled(&symmetrized_product(&fa, &pb)?, c(sign));
            }
        }
        out += spin_kron(&b.spin[k], &site);
    }
    Ok(out)
}

/// `U_0 = √((E+m)/2E)(1 + βα·p/(E+m))`, exact for the free Hamiltonian.
pub fn u_free_fw(m: f64, lattice: &Lattice) -> Result<UnitaryMap> {
    check_mass(m)?;
    let b = dirac_basis();
    let e = energy(m);
    let cpart = lattice.apply_momentum_function(|p| ((e(p) + m) / (2.0 * e(p))).sqrt())?;
    let ba = b.alpha.map(|a| b.beta * a);
    let spart = spin_dot_momentum(&ba, lattice, |p| 1.0 / (2.0 * e(p) * (e(p) + m)).sqrt())?;
    Ok(UnitaryMap::new(cpart + spart, TransformKind::Fw).with("mass", m))
}

/// `U_{E-K→FW} = √((E+m)/2E)(1 − iβΣ·p/(E+m))`.
pub fn ek_to_fw_corrector(m: f64, lattice: &Lattice) -> Result<UnitaryMap> {
    check_mass(m)?;
    let b = dirac_basis();
    let e = energy(m);
    let cpart = lattice.apply_momentum_function(|p| ((e(p) + m) / (2.0 * e(p))).sqrt())?;
    let bs = b.spin.map(|s| (b.beta * s).scale(-I));
    let spart = spin_dot_momentum(&bs, lattice, |p| 1.0 / (2.0 * e(p) * (e(p) + m)).sqrt())?;
    Ok(UnitaryMap::new(cpart + spart, TransformKind::EkCorrected).with("mass", m))
}

fn check_mass(m: f64) -> Result<()> {
    if !(m.is_finite() && m > 0.0) {
        return Err(FwError::InvalidParameter(format!("mass must be positive, got {m}")));
    }
    Ok(())
}

/// Which side of Eriksen's product carries the normalization factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorOrder {
    #[default]
    ProjectorFirst,
    NormFirst,
}

/// Eriksen's exact FW map `½(1 + βλ)(½ + (βλ + λβ)/4)^{−1/2}`.
pub fn u_eriksen(h: &OperatorMatrix) -> Result<UnitaryMap> {
    u_eriksen_with(&Spectrum::new(h)?, FactorOrder::ProjectorFirst)
}

pub fn u_eriksen_with(spectrum: &Spectrum, order: FactorOrder) -> Result<UnitaryMap> {
    let lambda = spectrum.sign_operator();
    let n = lambda.nrows();
    let id = linalg::identity(n);
    let beta = lift(&dirac_basis().beta, n / 4);
    let lambda_defect = linalg::distance(&(&lambda * &lambda), &id);
    let bl = &beta * &lambda;
    let even = &bl + &lambda * &beta;
    let even_defect = linalg::norm(&linalg::commutator(&beta, &even));
    let tol = 1e-9 * (n as f64).sqrt();
    if lambda_defect > tol {
        return Err(FwError::Identity(format!("λ² ≠ 1 (defect {lambda_defect:e})")));
    }
    if even_defect > tol {
        return Err(FwError::Identity(format!(
            "βλ + λβ is not even (defect {even_defect:e})"
        )));
    }
    let x = linalg::scaled(&id, c(0.5)) + linalg::scaled(&even, c(0.25));
    let norm = linalg::inv_sqrt_pd(&x, 1e-12)?;
    let proj = linalg::scaled(&(&id + &bl), c(0.5));
    let u = match order {
        FactorOrder::ProjectorFirst => &proj * &norm,
        FactorOrder::NormFirst => &norm * &proj,
    };
    Ok(UnitaryMap::new(u, TransformKind::Eriksen)
        .with("lambda_squared_defect", format!("{lambda_defect:e}"))
        .with("even_commutator_defect", format!("{even_defect:e}"))
        .with(
            "factor_order",
            match order {
                FactorOrder::ProjectorFirst => "projector_first",
                FactorOrder::NormFirst => "norm_first",
            },
        ))
}

/// `C(K) + s·βO·S(K)` with `K = O²`, `E = √(K + m²)`, `C = √((E+m)/2E)`,
/// `S = 1/√(2E(E+m))`.
fn half_angle_map(odd: &OperatorMatrix, m: f64, sign: f64) -> Result<OperatorMatrix> {
    let n = odd.nrows();
    let k = linalg::hermitian_part(&(odd * odd));
    let eig = HermitianEigen::new(&k)?;
    let radius = eig.spectral_radius().max(m * m);
    let e = |x: f64| {
        if x < -1e-10 * radius {
            Err(FwError::Singular(format!("O² has negative eigenvalue {x:e}")))
        } else {
            Ok((x.max(0.0) + m * m).sqrt())
        }
    };
    let cpart = eig.try_map(|x| Ok(((e(x)? + m) / (2.0 * e(x)?)).sqrt()))?;
    let spart = eig.try_map(|x| Ok(1.0 / (2.0 * e(x)? * (e(x)? + m)).sqrt()))?;
    let beta = lift(&dirac_basis().beta, n / 4);
    Ok(cpart + linalg::scaled(&(&beta * odd * spart), c(sign)))
}

fn odd_part(h: &OperatorMatrix, m: f64, transform: &str) -> Result<OperatorMatrix> {
    let n = h.nrows();
    if !n.is_multiple_of(4) {
        return Err(FwError::NotBispinor(n));
    }
    let beta = lift(&dirac_basis().beta, n / 4);
    let odd = h - linalg::scaled(&beta, c(m));
    let defect = linalg::norm(&linalg::anticommutator(&odd, &beta));
    if defect > 1e-12 * linalg::norm(h) {
        return Err(FwError::NotApplicable {
            transform: transform.into(),
            reason: format!("H − βm is not odd (‖{{H − βm, β}}‖ = {defect:e})"),
        });
    }
    Ok(odd)
}

/// Closed-form FW map for `H = O + βm` with odd `O`; equals Eriksen's map there.
pub fn u_closed_form(h: &OperatorMatrix, m: f64) -> Result<UnitaryMap> {
    check_mass(m)?;
    let odd = odd_part(h, m, "closed form")?;
    Ok(UnitaryMap::new(half_angle_map(&odd, m, 1.0)?, TransformKind::ClosedForm).with("mass", m))
}

/// SU(2) map `cos(θ/2) ± 2iJ₂ sin(θ/2)`; on `H = Q + Q† + βm` the rotation
/// term is `β(Q + Q†)/√(2E(E+m))`. `positive = true` is the exponent sign
/// that yields the FW representation.
pub fn u_su2(pair: &SusyPair, m: f64, positive: bool) -> Result<UnitaryMap> {
    check_mass(m)?;
    let odd = &pair.q + &pair.q_dag;
    let sign = if positive { 1.0 } else { -1.0 };
    let kind = if positive {
        TransformKind::Su2Plus
    } else {
        TransformKind::Su2Minus
    };
    Ok(UnitaryMap::new(half_angle_map(&odd, m, sign)?, kind).with("exponent_sign", if positive { "+" } else { "-" }))
}

/// `J = iγ5β`, lifted.
pub fn ek_involution(sites: usize) -> OperatorMatrix {
    let b = dirac_basis();
    lift(&(b.gamma5 * b.beta).scale(I), sites)
}

/// Eriksen-Kolsrud map `½(1 + βJ)(1 + JΛ)`, `J = iγ5β`, `Λ = sign(H)`.
/// Unitary only when `J` anticommutes with `H`.
pub fn u_eriksen_kolsrud(h: &OperatorMatrix) -> Result<UnitaryMap> {
    u_eriksen_kolsrud_with(&Spectrum::new(h)?)
}

pub fn u_eriksen_kolsrud_with(spectrum: &Spectrum) -> Result<UnitaryMap> {
    let lambda = spectrum.sign_operator();
    let n = lambda.nrows();
    let j = ek_involution(n / 4);
    let anti = linalg::norm(&linalg::anticommutator(&j, &lambda));
    if anti > 1e-8 * (n as f64).sqrt() {
        return Err(FwError::NotApplicable {
            transform: "eriksen-kolsrud".into(),
            reason: format!("iγ5β does not anticommute with H (‖{{J, Λ}}‖ = {anti:e})"),
        });
    }
    let id = linalg::identity(n);
    let beta = lift(&dirac_basis().beta, n / 4);
    let left = &id + &beta * &j;
    let right = &id + &j * &lambda;
    Ok(
        UnitaryMap::new(linalg::scaled(&(left * right), c(0.5)), TransformKind::Ek)
            .with("anticommutator_defect", format!("{anti:e}")),
    )
}

/// Electric series map, linear in `e` and through `(v/c)²`:
/// `1 + βα·p/2m − p²/8m² − (ie/4m²)α·∇A0 − (ieβ/16m³)[α·p, α·∇A0]`.
pub fn u_perturbative_electric(
    m: f64,
    e: f64,
    a0: &ScalarField,
    lattice: &Lattice,
) -> Result<(UnitaryMap, PerturbativeTerms)> {
    check_mass(m)?;
    let b = dirac_basis();
    let n = lattice.bispinor_dim();
    let beta = lattice.lift(&b.beta);
    let ap = spin_dot_momentum(&b.alpha, lattice, |_| 1.0)?;
    let agrad = spin_dot_field(&b.alpha, &lattice.gradient(a0)?, lattice)?;
    let mut t = PerturbativeTerms::new();
    t.push("identity", linalg::identity(n));
    t.push("kinetic", linalg::scaled(&(&beta * &ap), c(0.5 / m)));
    t.push(
        "kinetic_norm",
        lattice.apply_momentum_function(|p| -p_squared(p) / (8.0 * m * m))?,
    );
    t.push("field", linalg::scaled(&agrad, -I * e / (4.0 * m * m)));
    t.push(
        "commutator",
        linalg::scaled(&(&beta * linalg::commutator(&ap, &agrad)), -I * e / (16.0 * m.powi(3))),
    );
    let u = UnitaryMap::new(t.sum(), TransformKind::Perturbative)
        .with("case", "electric")
        .with("orders", "e^1, (v/c)^2");
    Ok((u, t))
}

/// Electric series Hamiltonian
/// `βm + βp²/2m + e(A0 + (i/8m²)[α·p, α·∇A0])`.
pub fn h_fw_perturbative_electric(
    m: f64,
    e: f64,
    a0: &ScalarField,
    lattice: &Lattice,
) -> Result<(OperatorMatrix, PerturbativeTerms)> {
    check_mass(m)?;
    let b = dirac_basis();
    let beta = lattice.lift(&b.beta);
    let ap = spin_dot_momentum(&b.alpha, lattice, |_| 1.0)?;
    let agrad = spin_dot_field(&b.alpha, &lattice.gradient(a0)?, lattice)?;
    let mut t = PerturbativeTerms::new();
    t.push("rest", linalg::scaled(&beta, c(m)));
    t.push(
        "kinetic",
        &beta * lattice.apply_momentum_function(|p| p_squared(p) / (2.0 * m))?,
    );
    t.push("potential", lattice.position_multiplier(&a0.map(|x| e * x))?);
    t.push(
        "darwin_spin_orbit",
        linalg::scaled(&linalg::commutator(&ap, &agrad), I * e / (8.0 * m * m)),
    );
    Ok((t.sum(), t))
}

struct GravityFields {
    fv: ScalarField,
    f_grad: VectorField,
    phi_grad: VectorField,
    f_lap: ScalarField,
    phi_lap: ScalarField,
}

fn gravity_fields(v: &ScalarField, w: &ScalarField, lattice: &Lattice) -> Result<GravityFields> {
    check_metric(v, w)?;
    let f = v.zip(w, |a, b| a / b);
    Ok(GravityFields {
        fv: f.zip(v, |a, b| a - b),
        f_grad: lattice.gradient(&f)?,
        phi_grad: lattice.gradient(v)?,
        f_lap: lattice.laplacian(&f)?,
        phi_lap: lattice.laplacian(v)?,
    })
}

/// Gravitational series map, first order in `V − 1`, `F − 1`:
/// `1 + βα·p/2m − p²/8m² + (β/4m){F − V, α·p}
///  − (1/16m²)((F−V)p² + 2α·p(F−V)α·p + p²(F−V))`.
pub fn u_perturbative_gravity(
    m: f64,
    v: &ScalarField,
    w: &ScalarField,
    lattice: &Lattice,
) -> Result<(UnitaryMap, PerturbativeTerms)> {
    check_mass(m)?;
    let g = gravity_fields(v, w, lattice)?;
    let b = dirac_basis();
    let n = lattice.bispinor_dim();
    let beta = lattice.lift(&b.beta);
    let ap = spin_dot_momentum(&b.alpha, lattice, |_| 1.0)?;
    let p2 = lattice.apply_momentum_function(p_squared)?;
    let fv = lattice.position_multiplier(&g.fv)?;
    let mut t = PerturbativeTerms::new();
    t.push("identity", linalg::identity(n));
    t.push("kinetic", linalg::scaled(&(&beta * &ap), c(0.5 / m)));
    t.push("kinetic_norm", linalg::scaled(&p2, c(-1.0 / (8.0 * m * m))));
    t.push(
        "field_odd",
        linalg::scaled(&(&beta * linalg::anticommutator(&fv, &ap)), c(0.25 / m)),
    );
    let sandwich = &fv * &p2 + linalg::scaled(&(&ap * &fv * &ap), c(2.0)) + &p2 * &fv;
    t.push("field_norm", linalg::scaled(&sandwich, c(-1.0 / (16.0 * m * m))));
    let u = UnitaryMap::new(t.sum(), TransformKind::Perturbative)
        .with("case", "gravity")
        .with("orders", "(V-1)^1, (F-1)^1, (v/c)^2");
    Ok((u, t))
}

/// Gravitational FW Hamiltonian, first order in the potentials:
/// `βm + βp²/2m + βm(V−1) − (β/4m){p², V−1} + (β/2m){p², F−1}
///  + (β/4m)(2Σ·(f×p) + ∇·f) − (β/8m)(2Σ·(Φ×p) + ∇·Φ)`.
pub fn h_fw_perturbative_gravity(
    m: f64,
    v: &ScalarField,
    w: &ScalarField,
    lattice: &Lattice,
) -> Result<(OperatorMatrix, PerturbativeTerms)> {
    check_mass(m)?;
    let g = gravity_fields(v, w, lattice)?;
    let b = dirac_basis();
    let beta = lattice.lift(&b.beta);
    let p2 = lattice.apply_momentum_function(p_squared)?;
    let v1 = lattice.position_multiplier(&v.map(|x| x - 1.0))?;
    let f1 = lattice.position_multiplier(&v.zip(w, |a, b| a / b - 1.0))?;
    let mut t = PerturbativeTerms::new();
    t.push("rest", linalg::scaled(&beta, c(m)));
    t.push("kinetic", linalg::scaled(&(&beta * &p2), c(0.5 / m)));
    t.push("mass_potential", linalg::scaled(&(&beta * &v1), c(m)));
    t.push(
        "kinetic_v",
        linalg::scaled(&(&beta * linalg::anticommutator(&p2, &v1)), c(-0.25 / m)),
    );
    t.push(
        "kinetic_f",
        linalg::scaled(&(&beta * linalg::anticommutator(&p2, &f1)), c(0.5 / m)),
    );
    let f_term = linalg::scaled(&spin_cross(&g.f_grad, lattice)?, c(2.0)) + lattice.position_multiplier(&g.f_lap)?;
    t.push("spin_orbit_f", linalg::scaled(&(&beta * f_term), c(0.25 / m)));
    let phi_term =
        linalg::scaled(&spin_cross(&g.phi_grad, lattice)?, c(2.0)) + lattice.position_multiplier(&g.phi_lap)?;
    t.push("spin_orbit_phi", linalg::scaled(&(&beta * phi_term), c(-0.125 / m)));
    Ok((t.sum(), t))
}

/// Names of the field-linear summands of [`h_fw_perturbative_gravity`].
pub const GRAVITY_LINEAR_TERMS: [&str; 5] = [
    "mass_potential",
    "kinetic_v",
    "kinetic_f",
    "spin_orbit_f",
    "spin_orbit_phi",
];

/// Names of the charge-linear summands of [`h_fw_perturbative_electric`].
pub const ELECTRIC_LINEAR_TERMS: [&str; 2] = ["potential", "darwin_spin_orbit"];

/// Truncated Eriksen-Kolsrud map in a static gravitational field:
/// `½(1 + iγ5 + X)(1 − iγ5)` with the first-order corrections `X`.
pub fn u_ek_perturbative_gravity(m: f64, v: &ScalarField, w: &ScalarField, lattice: &Lattice) -> Result<UnitaryMap> {
    check_mass(m)?;
    let g = gravity_fields(v, w, lattice)?;
    let b = dirac_basis();
    let n = lattice.bispinor_dim();
    let id = linalg::identity(n);
    let beta = lattice.lift(&b.beta);
    let g5 = lattice.lift(&b.gamma5);
    let ig5 = linalg::scaled(&g5, I);
    let sp = spin_dot_momentum(&b.spin, lattice, |_| 1.0)?;
    let p2 = lattice.apply_momentum_function(p_squared)?;
    let f = lattice.position_multiplier(&v.zip(w, |a, b| a / b))?;
    let inv_v = lattice.position_multiplier(&v.map(|x| 1.0 / x))?;
    let inv_w = lattice.position_multiplier(&w.map(|x| 1.0 / x))?;
    let s_phi = spin_dot_field(&b.spin, &g.phi_grad, lattice)?;
    let sp_f = linalg::anticommutator(&sp, &f);
    let m2 = m * m;

    let mut x = &id + &ig5;
    x -= linalg::scaled(&(&beta * &g5 * &sp_f * &inv_v), c(0.5 / m));
    let kin = &inv_w * &p2 * &f + &f * &p2 * &inv_w;
    x -= linalg::scaled(&(&ig5 * kin * &inv_v), c(0.25 / m2));
    let spin_orbit =
        lattice.position_multiplier(&g.f_lap)? + linalg::scaled(&spin_cross_ordered(&g.f_grad, lattice)?, c(2.0));
    x -= linalg::scaled(&(&ig5 * spin_orbit), c(0.25 / m2));
    x -= linalg::scaled(&(&ig5 * &beta * &s_phi), c(0.5 / m));
    x -= linalg::scaled(&(&g5 * &sp_f * &s_phi), c(0.25 / m2));
    let u = linalg::scaled(&(x * (&id - &ig5)), c(0.5));
    Ok(UnitaryMap::new(u, TransformKind::EkPerturbative)
        .with("case", "gravity")
        .with("orders", "(V-1)^1, (F-1)^1, 1/m^2"))
}

/// `Σ·(f × p)` with `f` to the left of `p` (operator order kept).
fn spin_cross_ordered(f: &VectorField, lattice: &Lattice) -> Result<OperatorMatrix> {
    let b = dirac_basis();
    let mut out = linalg::zeros(lattice.bispinor_dim());
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let mut site = linalg::zeros(lattice.sites());
        for (a, bb, sign) in [(i, j, 1.0), (j, i, -1.0)] {
            if lattice.axes().contains(&bb) {
                let fa = lattice.multiplier_sites(&f.component(a))?;
                site += linalg::scaled(&(fa * lattice.momentum_sites(bb)), c(sign));
            }
        }
        out += spin_kron(&b.spin[k], &site);
    }
    Ok(out)
}

/// Richardson-extrapolated central difference `dF/dg` at `g = 0`.
#[derive(Debug, Clone)]
pub struct CouplingDerivative {
    pub derivative: OperatorMatrix,
    /// `‖D(h/2) − D(h)‖ / 3`, the Richardson error estimate.
    pub error_estimate: f64,
    pub step: f64,
}

pub fn coupling_derivative(f: impl Fn(f64) -> Result<OperatorMatrix>, step: f64) -> Result<CouplingDerivative> {
    let central = |h: f64| -> Result<OperatorMatrix> {
        let d = f(h)? - f(-h)?;
        Ok(linalg::scaled(&d, c(0.5 / h)))
    };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    let derivative = linalg::scaled(&(linalg::scaled(&fine, c(4.0)) - &coarse), c(1.0 / 3.0));
    Ok(CouplingDerivative {
        error_estimate: linalg::distance(&fine, &coarse) / 3.0,
        derivative,
        step,
    })
}

/// Spectral projector onto modes with `|p| ≤ cutoff`, lifted to bispinors.
pub fn low_momentum_projector(lattice: &Lattice, cutoff: f64) -> Result<OperatorMatrix> {
    lattice.apply_momentum_function(|p| if p_squared(p).sqrt() <= cutoff { 1.0 } else { 0.0 })
}
