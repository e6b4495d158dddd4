//! Periodic spectral lattices.
//!
//! Functions of the momentum operator are exact on the grid: they are
//! diagonal in the discrete Fourier basis `e^{i p_k x_j} / √n` with
//! `p_k = 2πk/L`, `k ∈ {−N/2, …, N/2−1}` per axis. Position-dependent fields
//! are diagonal multipliers in the site basis.
//!
//! A one-dimensional lattice runs along the z axis, a two-dimensional one
//! spans x and y. A [`Lattice::plane_wave`] is the degenerate one-site
//! lattice carrying a single momentum vector, which turns every builder in
//! the crate into its 4×4 single-mode form.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::clifford::{lift, spin_kron, SpinMatrix};
use crate::error::{FwError, Result};
use crate::linalg::{self, c, OperatorMatrix, StateVector, C64, I, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub sites_per_axis: usize,
    pub box_length: f64,
}

impl LatticeSpec {
    pub fn new(dimension: usize, sites_per_axis: usize, box_length: f64) -> Result<Self> {
        let spec = Self {
            dimension,
            sites_per_axis,
            box_length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimension) {
            return Err(FwError::InvalidLattice(format!(
                "dimension must be 1, 2 or 3, got {}",
                self.dimension
            )));
        }
        if self.sites_per_axis < 2 || !self.sites_per_axis.is_multiple_of(2) {
            return Err(FwError::InvalidLattice(format!(
                "sites per axis must be even and at least 2, got {}",
                self.sites_per_axis
            )));
        }
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(FwError::InvalidLattice(format!(
                "box length must be positive, got {}",
                self.box_length
            )));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.sites_per_axis.pow(self.dimension as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.sites_per_axis as f64
    }

    /// Physical axes (0 = x, 1 = y, 2 = z) spanned by the lattice.
    pub fn axes(&self) -> &'static [usize] {
        match self.dimension {
            1 => &[2],
            2 => &[0, 1],
            _ => &[0, 1, 2],
        }
    }

    /// Largest momentum modulus on one axis, `πN/L`.
    pub fn max_momentum(&self) -> f64 {
        PI * self.sites_per_axis as f64 / self.box_length
    }
}

/// Real samples of a scalar field at the lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

/// Real samples of a three-component field; components along axes the
/// lattice does not span are still stored (usually zero).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: [Vec<f64>; 3],
}

impl ScalarField {
    pub fn constant(lattice: &Lattice, value: f64) -> Self {
        Self {
            values: vec![value; lattice.sites()],
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    fn check(&self, lattice: &Lattice) -> Result<()> {
        if self.values.len() != lattice.sites() {
            return Err(FwError::Dimension {
                expected: lattice.sites(),
                found: self.values.len(),
            });
        }
        if let Some((index, &value)) = self.values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FwError::NonFinite { index, value });
        }
        Ok(())
    }
}

impl VectorField {
    pub fn zero(lattice: &Lattice) -> Self {
        let n = lattice.sites();
        Self {
            components: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn component(&self, axis: usize) -> ScalarField {
        ScalarField {
            values: self.components[axis].clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(|&v| v == 0.0)
    }

    /// Pointwise divergence-free check helper: sum of the spanned components' derivatives.
    pub fn divergence(&self, lattice: &Lattice) -> Result<ScalarField> {
        let mut out = vec![0.0; lattice.sites()];
        for &axis in lattice.axes() {
            let d = lattice.derivative(&self.component(axis), axis)?;
            out.iter_mut().zip(&d.values).for_each(|(o, v)| *o += v);
        }
        Ok(ScalarField { values: out })
    }
}

/// A periodic lattice with its discrete Fourier machinery precomputed.
#[derive(Debug, Clone)]
pub struct Lattice {
    spec: Option<LatticeSpec>,
    axes: Vec<usize>,
    coords: Vec<[f64; 3]>,
    momenta: Vec<[f64; 3]>,
    /// Unitary map from site amplitudes to Fourier-mode amplitudes.
    fourier: OperatorMatrix,
    cell_volume: f64,
}

impl Lattice {
    pub fn new(spec: LatticeSpec) -> Result<Self> {
        spec.validate()?;
        let n_axis = spec.sites_per_axis;
        let d = spec.dimension;
        let n = spec.sites();
        let axes = spec.axes().to_vec();
        let h = spec.spacing();
        let dp = 2.0 * PI / spec.box_length;
        let multi = |idx: usize| -> Vec<usize> {
            let mut rest = idx;
            let mut out = vec![0; d];
            for k in (0..d).rev() {
                out[k] = rest % n_axis;
                rest /= n_axis;
            }
            out
        };
        let mut coords = Vec::with_capacity(n);
        let mut momenta = Vec::with_capacity(n);
        for idx in 0..n {
            let m = multi(idx);
            let mut x = [0.0; 3];
            let mut p = [0.0; 3];
            for (k, &axis) in axes.iter().enumerate() {
                x[axis] = m[k] as f64 * h;
                p[axis] = (m[k] as f64 - (n_axis / 2) as f64) * dp;
            }
            coords.push(x);
            momenta.push(p);
        }
        let norm = 1.0 / (n as f64).sqrt();
        let fourier = Mat::from_fn(n, n, |k, j| {
            let phase: f64 = (0..3).map(|a| momenta[k][a] * coords[j][a]).sum();
            C64::from_polar(norm, -phase)
        });
        Ok(Self {
            spec: Some(spec),
            axes,
            coords,
            momenta,
            fourier,
            cell_volume: h.powi(d as i32),
        })
    }

    /// One-site lattice carrying the single plane-wave momentum `p`.
    pub fn plane_wave(p: [f64; 3]) -> Self {
        Self {
            spec: None,
            axes: vec![0, 1, 2],
            coords: vec![[0.0; 3]],
            momenta: vec![p],
            fourier: linalg::identity(1),
            cell_volume: 1.0,
        }
    }

    pub fn spec(&self) -> Option<&LatticeSpec> {
        self.spec.as_ref()
    }

    pub fn sites(&self) -> usize {
        self.coords.len()
    }

    /// Dimension of bispinor operators, `4n`.
    pub fn bispinor_dim(&self) -> usize {
        4 * self.sites()
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn momenta(&self) -> &[[f64; 3]] {
        &self.momenta
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn fourier(&self) -> &OperatorMatrix {
        &self.fourier
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> ScalarField {
        ScalarField {
            values: self.coords.iter().map(|&x| f(x)).collect(),
        }
    }

    /// The coordinate along `axis` at each site, in `[0, L)`.
    pub fn coordinate(&self, axis: usize) -> ScalarField {
        self.sample(|x| x[axis])
    }

    /// Site amplitudes to Fourier amplitudes.
    pub fn forward(&self, values: &StateVector) -> StateVector {
        &self.fourier * values
    }

    pub fn inverse(&self, modes: &StateVector) -> StateVector {
        self.fourier.adjoint() * modes
    }

    /// Site-space (`n × n`) operator `f(p̂)`, diagonal in the Fourier basis.
    pub fn momentum_function_sites(&self, f: impl Fn([f64; 3]) -> f64) -> Result<OperatorMatrix> {
        let mut diag = Vec::with_capacity(self.sites());
        for (index, &p) in self.momenta.iter().enumerate() {
            let value = f(p);
            if !value.is_finite() {
                return Err(FwError::NonFinite { index, value });
            }
            diag.push(value);
        }
        let n = self.sites();
        let f_adj = linalg::adjoint(&self.fourier);
        let left = Mat::from_fn(n, n, |i, k| f_adj[(i, k)] * diag[k]);
        // symmetrized so the result is Hermitian bit for bit
        Ok(linalg::hermitian_part(&(left * &self.fourier)))
    }

    /// Site-space momentum component along physical `axis`.
    pub fn momentum_sites(&self, axis: usize) -> OperatorMatrix {
        self.momentum_function_sites(|p| p[axis])
            .expect("momentum grid is finite")
    }

    /// Momentum component acting identically on the four spinor components.
    pub fn momentum_operator(&self, axis: usize) -> OperatorMatrix {
        spin_kron(&SpinMatrix::identity(), &self.momentum_sites(axis))
    }

    /// `f(p̂)` lifted to bispinors.
    pub fn apply_momentum_function(&self, f: impl Fn([f64; 3]) -> f64) -> Result<OperatorMatrix> {
        Ok(spin_kron(&SpinMatrix::identity(), &self.momentum_function_sites(f)?))
    }

    /// Site-space diagonal multiplier.
    pub fn multiplier_sites(&self, field: &ScalarField) -> Result<OperatorMatrix> {
        field.check(self)?;
        Ok(linalg::real_diagonal(&field.values))
    }

    /// Bispinor multiplier by a position-dependent field.
    pub fn position_multiplier(&self, field: &ScalarField) -> Result<OperatorMatrix> {
        Ok(spin_kron(&SpinMatrix::identity(), &self.multiplier_sites(field)?))
    }

    /// Spectral derivative `∂f/∂x_axis`; the unpaired Nyquist mode is dropped
    /// so real fields stay real.
    pub fn derivative(&self, field: &ScalarField, axis: usize) -> Result<ScalarField> {
        field.check(self)?;
        if !self.axes.contains(&axis) {
            return Ok(ScalarField::constant(self, 0.0));
        }
        let nyquist = self.spec.map(|s| -(s.max_momentum()));
        let v = StateVector::from_fn(self.sites(), |i| c(field.values[i]));
        let mut modes = self.forward(&v);
        for (k, p) in self.momenta.iter().enumerate() {
            let pk = p[axis];
            let drop = nyquist.is_some_and(|ny| (pk - ny).abs() < 1e-12 * ny.abs().max(1.0));
            modes[k] = if drop { ZERO } else { modes[k] * I * pk };
        }
        let back = self.inverse(&modes);
        Ok(ScalarField {
            values: back.iter().map(|z| z.re).collect(),
        })
    }

    pub fn gradient(&self, field: &ScalarField) -> Result<VectorField> {
        let mut g = VectorField::zero(self);
        for &axis in &self.axes {
            g.components[axis] = self.derivative(field, axis)?.values;
        }
        Ok(g)
    }

    /// Spectral curl of a vector field.
    pub fn curl(&self, a: &VectorField) -> Result<VectorField> {
        let d = |comp: usize, axis: usize| self.derivative(&a.component(comp), axis);
        let mut b = VectorField::zero(self);
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let dij = d(j, i)?;
            let dji = d(i, j)?;
            b.components[k] = dij.values.iter().zip(&dji.values).map(|(x, y)| x - y).collect();
        }
        Ok(b)
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, field: &ScalarField) -> Result<ScalarField> {
        let mut out = vec![0.0; self.sites()];
        for &axis in &self.axes {
            let d2 = self.derivative(&self.derivative(field, axis)?, axis)?;
            out.iter_mut().zip(&d2.values).for_each(|(o, v)| *o += v);
        }
        Ok(ScalarField { values: out })
    }

    /// Lifts a spinor constant to this lattice.
    pub fn lift(&self, m: &SpinMatrix) -> OperatorMatrix {
        lift(m, self.sites())
    }
}

/// `½(FG + GF)`.
pub fn symmetrized_product(f: &OperatorMatrix, g: &OperatorMatrix) -> Result<OperatorMatrix> {
    linalg::check_square(g, f.nrows())?;
    linalg::check_square(f, f.nrows())?;
    Ok(linalg::scaled(&linalg::anticommutator(f, g), c(0.5)))
}

/// Four complex components per site, normalized with the cell volume:
/// `Σ ψ†ψ · (L/N)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BispinorField {
    pub values: StateVector,
    pub cell_volume: f64,
}

/// Two complex components per site (an upper or lower half of a bispinor).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentField {
    pub values: StateVector,
    pub cell_volume: f64,
}

fn field_norm(v: &StateVector, dv: f64) -> f64 {
    (linalg::vector_norm(v).powi(2) * dv).sqrt()
}

impl BispinorField {
    /// Wraps a unit ℓ² vector as a normalized field.
    pub fn from_unit_vector(v: &StateVector, lattice: &Lattice) -> Self {
        let s = 1.0 / lattice.cell_volume().sqrt();
        Self {
            values: StateVector::from_fn(v.nrows(), |i| v[i] * s),
            cell_volume: lattice.cell_volume(),
        }
    }

    pub fn norm(&self) -> f64 {
        field_norm(&self.values, self.cell_volume)
    }

    pub fn upper(&self) -> TwoComponentField {
        TwoComponentField {
            values: crate::clifford::upper(&self.values),
            cell_volume: self.cell_volume,
        }
    }

    pub fn lower(&self) -> TwoComponentField {
        TwoComponentField {
            values: crate::clifford::lower(&self.values),
            cell_volume: self.cell_volume,
        }
    }

    pub fn transformed(&self, u: &OperatorMatrix) -> Self {
        Self {
            values: u * &self.values,
            cell_volume: self.cell_volume,
        }
    }

    pub fn inner(&self, other: &Self) -> C64 {
        linalg::inner(&self.values, &other.values) * self.cell_volume
    }
}

impl TwoComponentField {
    pub fn norm(&self) -> f64 {
        field_norm(&self.values, self.cell_volume)
    }

    pub fn inner(&self, other: &Self) -> C64 {
        linalg::inner(&self.values, &other.values) * self.cell_volume
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            values: StateVector::from_fn(self.values.nrows(), |i| self.values[i] * s),
            cell_volume: self.cell_volume,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            values: &self.values - &other.values,
            cell_volume: self.cell_volume,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(FwError::Singular("cannot normalize a null field".into()));
        }
        Ok(self.scaled(c(1.0 / n)))
    }

    /// Global phase fixed so that the largest-magnitude sample is real and
    /// positive. Near-ties (within 1e-6 relative) go to the lowest index.
    pub fn phase_fixed(&self) -> Self {
        let v = &self.values;
        let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        if max == 0.0 {
            return self.clone();
        }
        let pivot = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-6)).unwrap_or(0);
        let phase = v[pivot].conj() / v[pivot].norm();
        self.scaled(phase)
    }

    /// Global phase chosen so that `⟨reference, self⟩` is real and non-negative.
    pub fn aligned_to(&self, reference: &Self) -> Self {
        let overlap = reference.inner(self);
        if overlap.norm() == 0.0 {
            return self.clone();
        }
        self.scaled(overlap.conj() / overlap.norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{distance, hermiticity_defect, HermitianEigen};

    fn line(n: usize, l: f64) -> Lattice {
        Lattice::new(LatticeSpec::new(1, n, l).unwrap()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(1, 7, 1.0).is_err());
        assert!(LatticeSpec::new(4, 8, 1.0).is_err());
        assert!(LatticeSpec::new(1, 8, -1.0).is_err());
        assert_eq!(LatticeSpec::new(3, 4, 1.0).unwrap().sites(), 64);
    }

    #[test]
    fn momentum_eigenvalues_on_small_grid() {
        let lat = line(4, 2.0 * PI);
        let p = lat.momentum_operator(2);
        let mut ev = HermitianEigen::new(&p).unwrap().values;
        ev.iter_mut().for_each(|v| *v = (*v * 1e9).round() / 1e9);
        let mut expected: Vec<f64> = [-2.0, -1.0, 0.0, 1.0].repeat(4);
        expected.sort_by(f64::total_cmp);
        assert_eq!(ev, expected);
        assert!(hermiticity_defect(&p) < 1e-14);
    }

    #[test]
    fn momentum_kills_constants_and_squares_cosine() {
        let l = 7.0;
        let lat = line(16, l);
        let p = lat.momentum_sites(2);
        let one = StateVector::from_fn(16, |_| c(1.0));
        assert!(linalg::vector_norm(&(&p * &one)) < 1e-13);
        let q = 2.0 * PI / l;
        let cosv = StateVector::from_fn(16, |j| c((q * lat.coords()[j][2]).cos()));
        let p2 = &p * &p;
        let r = &p2 * &cosv - StateVector::from_fn(16, |j| cosv[j] * q * q);
        assert!(linalg::vector_norm(&r) < 1e-12);
    }

    #[test]
    fn momentum_functions() {
        let lat = Lattice::plane_wave([0.0, 0.0, 4.0]);
        let e = lat
            .momentum_function_sites(|p| (p.iter().map(|x| x * x).sum::<f64>() + 9.0).sqrt())
            .unwrap();
        assert!((e[(0, 0)].re - 5.0).abs() < 1e-15);
        let lat = line(8, 3.0);
        let one = lat.apply_momentum_function(|_| 1.0).unwrap();
        assert!(distance(&one, &linalg::identity(32)) < 1e-13);
        assert!(lat.momentum_function_sites(|p| 1.0 / p[2]).is_err());
        let e = lat.apply_momentum_function(|p| (p[2] * p[2] + 1.0).sqrt()).unwrap();
        let pz = lat.momentum_operator(2);
        assert!(linalg::commutator(&e, &pz).norm_l2() < 1e-12);
    }

    #[test]
    fn multipliers() {
        let lat = line(8, 3.0);
        let m = lat.position_multiplier(&ScalarField::constant(&lat, 2.5)).unwrap();
        assert!(distance(&m, &linalg::scaled(&linalg::identity(32), c(2.5))) == 0.0);
        let f = lat.sample(|x| x[2].sin());
        let g = lat.sample(|x| 1.0 + x[2]);
        let prod = lat.position_multiplier(&f.zip(&g, |a, b| a * b)).unwrap();
        let mf = lat.position_multiplier(&f).unwrap();
        let mg = lat.position_multiplier(&g).unwrap();
        assert!(distance(&(&mf * &mg), &prod) < 1e-15);
        assert!(lat.position_multiplier(&ScalarField { values: vec![1.0; 3] }).is_err());
    }

    #[test]
    fn commutator_with_momentum_is_gradient() {
        let l = 10.0;
        let lat = line(32, l);
        let q = 2.0 * PI / l;
        let a0 = lat.sample(|x| (q * x[2]).cos());
        let grad = lat.sample(|x| -q * (q * x[2]).sin());
        let a = lat.multiplier_sites(&a0).unwrap();
        let p = lat.momentum_sites(2);
        let k = 3.0 * q;
        let wave = StateVector::from_fn(32, |j| C64::from_polar(1.0, k * lat.coords()[j][2]));
        let lhs = linalg::commutator(&a, &p) * &wave;
        let rhs = StateVector::from_fn(32, |j| I * grad.values[j] * wave[j]);
        assert!(linalg::vector_norm(&(lhs - rhs)) < 1e-11);
    }

    #[test]
    fn symmetrized_product_identities() {
        let l = 9.0;
        let lat = line(32, l);
        let q = 2.0 * PI / l;
        let p = lat.momentum_operator(2);
        let id = linalg::identity(lat.bispinor_dim());
        assert!(distance(&symmetrized_product(&id, &p).unwrap(), &p) < 1e-14);
        let x = lat.position_multiplier(&lat.coordinate(2)).unwrap();
        assert!(hermiticity_defect(&symmetrized_product(&x, &p).unwrap()) < 1e-12);
        // ½{F, p} = F p − (i/2) F′
        let f = lat.sample(|x| 1.0 + 0.1 * (q * x[2]).cos());
        let fp = lat.sample(|x| -0.1 * q * (q * x[2]).sin());
        let fm = lat.position_multiplier(&f).unwrap();
        let lhs = symmetrized_product(&fm, &p).unwrap();
        let rhs = &fm * &p - linalg::scaled(&lat.position_multiplier(&fp).unwrap(), I * 0.5);
        // exact apart from the Nyquist row, where the product rule aliases
        let lat_modes = lat.fourier();
        let f4 = spin_kron(&SpinMatrix::identity(), lat_modes);
        let diff = &f4 * (lhs - rhs) * f4.adjoint();
        let n = lat.sites();
        let mut worst: f64 = 0.0;
        for i in 0..4 * n {
            for j in 0..4 * n {
                let (ki, kj) = (i % n, j % n);
                if ki > 1 && kj > 1 {
                    worst = worst.max(diff[(i, j)].norm());
                }
            }
        }
        assert!(worst < 1e-12, "{worst}");
        assert!(symmetrized_product(&fm, &linalg::identity(3)).is_err());
    }

    #[test]
    fn fourier_round_trip_and_parseval() {
        let lat = Lattice::new(LatticeSpec::new(2, 6, 4.0).unwrap()).unwrap();
        let v = StateVector::from_fn(36, |j| C64::new((j as f64).sin(), (j as f64 * 0.3).cos()));
        let back = lat.inverse(&lat.forward(&v));
        assert!(linalg::vector_norm(&(&back - &v)) < 1e-13 * linalg::vector_norm(&v));
        let nv = linalg::vector_norm(&v);
        assert!((linalg::vector_norm(&lat.forward(&v)) - nv).abs() < 1e-13 * nv);
    }

    #[test]
    fn spectral_derivative_and_curl() {
        let l = 5.0;
        let lat = Lattice::new(LatticeSpec::new(2, 16, l).unwrap()).unwrap();
        let q = 2.0 * PI / l;
        let ay = lat.sample(|x| (q * x[0]).sin());
        let mut a = VectorField::zero(&lat);
        a.components[1] = ay.values;
        let b = lat.curl(&a).unwrap();
        for (j, x) in lat.coords().iter().enumerate() {
            assert!((b.components[2][j] - q * (q * x[0]).cos()).abs() < 1e-12);
            assert!(b.components[0][j].abs() < 1e-12);
        }
    }

    #[test]
    fn phase_conventions() {
        let f = TwoComponentField {
            values: StateVector::from_fn(2, |i| {
                if i == 0 {
                    C64::new(0.0, 0.3)
                } else {
                    C64::new(-0.8, 0.0)
                }
            }),
            cell_volume: 1.0,
        };
        let g = f.phase_fixed();
        assert!((g.values[1] - c(0.8)).norm() < 1e-15);
        let r = TwoComponentField {
            values: StateVector::from_fn(2, |_| c(1.0)),
            cell_volume: 1.0,
        };
        let a = f.aligned_to(&r);
        let ov = r.inner(&a);
        assert!(ov.im.abs() < 1e-15 && ov.re > 0.0);
    }
}
