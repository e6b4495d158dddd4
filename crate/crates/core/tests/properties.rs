use std::f64::consts::PI;

use faer::Mat;
use fw_core::clifford::{block_split, dirac_basis, SpinMatrix};
use fw_core::hamiltonians::{build_electric, build_free, build_gravity, HamiltonianCase};
use fw_core::lattice::{Lattice, LatticeSpec, ScalarField};
use fw_core::linalg::{self, HermitianEigen, OperatorMatrix, StateVector, C64};
use fw_core::transforms::{u_eriksen, u_free_fw};
use fw_core::verify::{necessary_residual, spinor_relations_check};
use proptest::prelude::*;

fn momentum() -> impl Strategy<Value = [f64; 3]> {
    // direction on the sphere, magnitude up to 10
    (0.0..PI, 0.0..2.0 * PI, 0.0..10.0f64)
        .prop_map(|(t, f, r)| [r * t.sin() * f.cos(), r * t.sin() * f.sin(), r * t.cos()])
}

fn beta_energy(m: f64, p: [f64; 3]) -> OperatorMatrix {
    let e = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
    Mat::from_fn(4, 4, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i < 2 {
            C64::new(e, 0.0)
        } else {
            C64::new(-e, 0.0)
        }
    })
}

fn anti(a: &SpinMatrix, b: &SpinMatrix) -> f64 {
    let ab = *a * *b + *b * *a;
    ab.max_deviation(&SpinMatrix::zero())
}

#[test]
fn clifford_relations_hold_exactly() {
    let b = dirac_basis();
    for i in 0..3 {
        assert_eq!(anti(&b.alpha[i], &b.beta), 0.0);
        for j in 0..3 {
            let ab = b.alpha[i] * b.alpha[j] + b.alpha[j] * b.alpha[i];
            let expected = if i == j {
                b.identity.scale(C64::new(2.0, 0.0))
            } else {
                SpinMatrix::zero()
            };
            assert_eq!(ab.max_deviation(&expected), 0.0);
        }
        assert_eq!(b.gamma5.commutator(&b.alpha[i]).max_deviation(&SpinMatrix::zero()), 0.0);
    }
    assert_eq!((b.beta * b.beta).max_deviation(&b.identity), 0.0);
    assert_eq!((b.gamma5 * b.gamma5).max_deviation(&b.identity), 0.0);
    assert_eq!(anti(&b.gamma5, &b.beta), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_mode_is_diagonalized_by_u0(m in 0.5..5.0f64, p in momentum()) {
        let lat = Lattice::plane_wave(p);
        let h = build_free(m, &lat).unwrap();
        let u0 = u_free_fw(m, &lat).unwrap();
        let hfw = u0.conjugate(&h);
        prop_assert!(linalg::distance(&hfw, &beta_energy(m, p)) / linalg::norm(&h) < 1e-12);
        prop_assert!(u0.unitarity_defect() < 1e-12);
    }

    #[test]
    fn eriksen_collapses_to_u0(m in 0.5..5.0f64, p in momentum()) {
        let lat = Lattice::plane_wave(p);
        let h = build_free(m, &lat).unwrap();
        let er = u_eriksen(&h).unwrap();
        let u0 = u_free_fw(m, &lat).unwrap();
        prop_assert!(linalg::distance(&er.matrix, &u0.matrix) < 1e-12);
    }

    #[test]
    fn free_spinors_are_orthonormal_and_complete(m in 0.5..5.0f64, p in momentum()) {
        let r = spinor_relations_check(&[(p, m)]).unwrap();
        prop_assert!(r.max() < 1e-12, "{r:?}");
    }

    #[test]
    fn fourier_round_trip(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16)) {
        let lat = Lattice::new(LatticeSpec::new(1, 16, 7.0).unwrap()).unwrap();
        let v = StateVector::from_fn(16, |i| C64::new(values[i].0, values[i].1));
        let back = lat.inverse(&lat.forward(&v));
        let err = (0..16).map(|i| (back[i] - v[i]).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
        let parseval = linalg::vector_norm(&lat.forward(&v)) - linalg::vector_norm(&v);
        prop_assert!(parseval.abs() < 1e-13);
    }

    #[test]
    fn interacting_builders_are_hermitian(m in 0.5..3.0f64, amp in -0.5..0.5f64, k in 1usize..=2) {
        let lat = Lattice::new(LatticeSpec::new(1, 8, 6.0).unwrap()).unwrap();
        let f = lat.sample(|x| amp * (2.0 * PI * k as f64 * x[2] / 6.0).cos());
        let h = build_electric(m, 1.0, &f, &lat).unwrap();
        prop_assert!(linalg::hermiticity_defect(&h) < 1e-13);
        let v = f.map(|x| 1.0 + x);
        let w = ScalarField::constant(&lat, 1.0 - amp / 2.0);
        let g = build_gravity(m, &v, &w, &lat).unwrap();
        prop_assert!(linalg::hermiticity_defect(&g) < 1e-13);
    }

    #[test]
    fn eriksen_block_diagonalizes_electric(m in 0.5..3.0f64, amp in -0.5..0.5f64) {
        let lat = Lattice::new(LatticeSpec::new(1, 8, 6.0).unwrap()).unwrap();
        let a0 = lat.sample(|x| amp * (2.0 * PI * x[2] / 6.0).cos());
        let case = HamiltonianCase::electric(m, 1.0, a0);
        let h = case.build(&lat).unwrap();
        let er = u_eriksen(&h).unwrap();
        prop_assert!(er.unitarity_defect() < 1e-11);
        prop_assert!(necessary_residual(&er.matrix, &h).unwrap() < 1e-10);
        // positive energies land in the upper block
        let blocks = block_split(&er.conjugate(&h)).unwrap();
        let upper = HermitianEigen::new(&blocks.upper_upper).unwrap();
        let lower = HermitianEigen::new(&blocks.lower_lower).unwrap();
        prop_assert!(upper.values.iter().all(|&x| x > 0.0));
        prop_assert!(lower.values.iter().all(|&x| x < 0.0));
    }
}
