//! Exit criteria. Every check prints one PASS/FAIL line; the test fails if
//! any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use faer::Mat;
use fw_core::clifford::{block_split, dirac_basis, lift};
use fw_core::hamiltonians::{
    build_electric, build_free, build_gravity, build_susy, flux_tube_potential, magnetic_square_operator,
    FieldStrength, HamiltonianCase, SusyFields,
};
use fw_core::lattice::{BispinorField, Lattice, LatticeSpec, ScalarField};
use fw_core::linalg::{self, HermitianEigen, OperatorMatrix, StateVector, C64};
use fw_core::spectra::{
    gravity_lower_from_upper, reference_phi, two_component_residual, Branch, EigenSolution, Spectrum,
};
use fw_core::transforms::{
    coupling_derivative, ek_to_fw_corrector, h_fw_perturbative_electric, h_fw_perturbative_gravity,
    low_momentum_projector, u_closed_form, u_ek_perturbative_gravity, u_eriksen, u_eriksen_kolsrud, u_free_fw,
    u_perturbative_gravity, u_su2, FactorOrder, ELECTRIC_LINEAR_TERMS,
};
use fw_core::verify::{
    fw_expectation, necessary_residual, observable_fw, spinor_relations_check, sufficiency_residual, transform_report,
    ObservableKind, ReferenceStates, StateSample, Tolerances,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn line(n: usize, l: f64) -> Lattice {
    Lattice::new(LatticeSpec::new(1, n, l).unwrap()).unwrap()
}

fn random_samples(count: usize, seed: u64) -> Vec<([f64; 3], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(0.5..=5.0);
            let r = rng.gen_range(0.0..=10.0);
            let cz: f64 = rng.gen_range(-1.0..=1.0);
            let phi = rng.gen_range(0.0..2.0 * PI);
            let s = (1.0 - cz * cz).sqrt();
            ([r * s * phi.cos(), r * s * phi.sin(), r * cz], m)
        })
        .collect()
}

fn beta_energy(m: f64, p: [f64; 3]) -> OperatorMatrix {
    let e = (p.iter().map(|x| x * x).sum::<f64>() + m * m).sqrt();
    Mat::from_fn(4, 4, |i, j| match (i == j, i < 2) {
        (false, _) => C64::new(0.0, 0.0),
        (true, true) => C64::new(e, 0.0),
        (true, false) => C64::new(-e, 0.0),
    })
}

fn criterion_1() -> Outcome {
    let (mut diag, mut suff) = (0.0f64, 0.0f64);
    for (p, m) in random_samples(100, 1) {
        let lat = Lattice::plane_wave(p);
        let h = build_free(m, &lat).unwrap();
        let u0 = u_free_fw(m, &lat).unwrap();
        diag = diag.max(linalg::distance(&u0.conjugate(&h), &beta_energy(m, p)) / linalg::norm(&h));
        let spec = Spectrum::new(&h).unwrap();
        let er = u_eriksen(&h).unwrap();
        for sol in spec.solutions(&lat) {
            let r = reference_phi(&sol, &er.matrix).unwrap();
            let s = sufficiency_residual(&u0.matrix, &sol, &r).unwrap();
            suff = suff.max(s.lower).max(s.match_);
        }
    }
    (
        diag < 1e-12 && suff < 1e-12,
        format!("max ‖U0HU0† − βE‖/‖H‖ = {diag:.2e}, max lower/match = {suff:.2e} (< 1e-12)"),
    )
}

fn criterion_2() -> Outcome {
    let (mut collapse, mut lam, mut even) = (0.0f64, 0.0f64, 0.0f64);
    for (p, m) in random_samples(100, 1) {
        let lat = Lattice::plane_wave(p);
        let h = build_free(m, &lat).unwrap();
        let er = u_eriksen(&h).unwrap();
        collapse = collapse.max(linalg::distance(&er.matrix, &u_free_fw(m, &lat).unwrap().matrix));
        let l = Spectrum::new(&h).unwrap().sign_operator();
        let beta = lift(&dirac_basis().beta, 1);
        lam = lam.max(linalg::distance(&(&l * &l), &linalg::identity(4)));
        let e = &beta * &l + &l * &beta;
        even = even.max(linalg::norm(&linalg::commutator(&beta, &e)));
    }
    (
        collapse < 1e-12 && lam < 1e-12 && even < 1e-12,
        format!("max ‖U_Er − U0‖ = {collapse:.2e}, ‖λ² − 1‖ = {lam:.2e}, ‖[β, βλ+λβ]‖ = {even:.2e} (< 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let r = spinor_relations_check(&random_samples(50, 3)).unwrap();
    (
        r.max() < 1e-12,
        format!("max orthonormality/completeness deviation = {:.2e} (< 1e-12)", r.max()),
    )
}

fn criterion_4() -> Outcome {
    let l = 2.0 * PI;
    let (m, e) = (2.0, 1.0);
    let b0 = 2.0 * PI / (e * l * l);
    let lat = Lattice::new(LatticeSpec::new(2, 16, l).unwrap()).unwrap();
    let a = flux_tube_potential(&lat, b0).unwrap();
    let case = HamiltonianCase::magnetic(m, e, a.clone());
    let h = case.build(&lat).unwrap();
    let spec = Spectrum::new(&h).unwrap();
    let er = fw_core::transforms::u_eriksen_with(&spec, FactorOrder::ProjectorFirst).unwrap();
    let sq = magnetic_square_operator(m, e, &a, &lat, FieldStrength::Commutator).unwrap();
    let target = lift(&dirac_basis().beta, lat.sites()) * linalg::sqrt_psd(&sq, 1e-9).unwrap();
    let closed = linalg::distance(&er.conjugate(&h), &target) / linalg::norm(&h);
    let refs = ReferenceStates::new(&spec, &er.matrix, &lat, StateSample::default()).unwrap();
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    for u in [er.clone(), u_closed_form(&h, m).unwrap()] {
        let r = transform_report(u.kind.name(), &u, &h, &refs, &tol).unwrap();
        for s in &r.states {
            worst = worst.max(s.lower).max(s.match_);
        }
    }
    (
        closed < 1e-8 && worst < 1e-10,
        format!(
            "‖U_Er H U_Er† − β√(π² − eΣ·B + m²)‖/‖H‖ = {closed:.2e} (< 1e-8), sufficiency max = {worst:.2e} (< 1e-10)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let (m, pz): (f64, f64) = (3.0, 4.0);
    let e = (m * m + pz * pz).sqrt();
    let lat = Lattice::plane_wave([0.0, 0.0, pz]);
    let h = build_free(m, &lat).unwrap();
    let ek = u_eriksen_kolsrud(&h).unwrap();
    let necessary = necessary_residual(&ek.matrix, &h).unwrap();

    // positive-energy state with φ = (1, 1)/√2, χ = σ3 p φ/(E + m)
    let s = 1.0 / 2f64.sqrt();
    let k = pz / (e + m);
    let norm = 1.0 / (1.0 + k * k).sqrt();
    let v = StateVector::from_fn(4, |i| C64::new([s, s, k * s, -k * s][i] * norm, 0.0));
    let sol = EigenSolution {
        energy: e,
        state: BispinorField::from_unit_vector(&v, &lat),
        branch: Branch::Positive,
    };
    let er = u_eriksen(&h).unwrap();
    let r = reference_phi(&sol, &er.matrix).unwrap();
    let got = sufficiency_residual(&ek.matrix, &sol, &r).unwrap();

    // oracle: upper block of the E-K image is √((E+m)/2E)(1 + iσ3 p/(E+m)) φ
    let c = ((e + m) / (2.0 * e)).sqrt();
    let img = [C64::new(c * s, c * s * k), C64::new(c * s, -c * s * k)];
    let img_norm = (img[0].norm_sqr() + img[1].norm_sqr()).sqrt();
    let overlap = (img[0] * s + img[1] * s).norm();
    let fid = overlap / img_norm;
    let match_oracle = (img_norm * img_norm + 1.0 - 2.0 * overlap).sqrt();

    let corrected = ek_to_fw_corrector(m, &lat)
        .unwrap()
        .after(&ek, fw_core::transforms::TransformKind::EkCorrected);
    let fixed = sufficiency_residual(&corrected.matrix, &sol, &r).unwrap();
    let ok = necessary < 1e-10
        && (got.match_ - match_oracle).abs() < 1e-6
        && (got.fidelity - 0.894427).abs() < 1e-6
        && (fid - 0.894427).abs() < 1e-6
        && fixed.match_ < 1e-11;
    (
        ok,
        format!(
            "necessary = {necessary:.2e}, match = {:.6} (closed form {match_oracle:.6}), fidelity = {:.6} (0.894427), corrected match = {:.2e}",
            got.match_, got.fidelity, fixed.match_
        ),
    )
}

fn susy_setup() -> (Lattice, OperatorMatrix, fw_core::hamiltonians::SusyPair, f64) {
    let m = 1.0;
    let lat = line(32, 10.0);
    let f = SusyFields::oscillator(&lat, 1.0).unwrap();
    let (h, pair) = build_susy(m, &f, &lat).unwrap();
    (lat, h, pair, m)
}

fn criterion_6() -> Outcome {
    let (lat, h, pair, m) = susy_setup();
    let spec = Spectrum::new(&h).unwrap();
    let er = fw_core::transforms::u_eriksen_with(&spec, FactorOrder::ProjectorFirst).unwrap();
    let refs = ReferenceStates::new(&spec, &er.matrix, &lat, StateSample::default()).unwrap();
    let tol = Tolerances::default();
    let plus = u_su2(&pair, m, true).unwrap();
    let rp = transform_report("su2_plus", &plus, &h, &refs, &tol).unwrap();
    let plus_max = rp
        .states
        .iter()
        .map(|s| s.lower.max(s.match_))
        .fold(rp.necessary, f64::max);

    // spectrum of the transformed blocks against ±√(eig{Q,Q†} + m²)
    let hfw = block_split(&plus.conjugate(&h)).unwrap();
    let k = block_split(&pair.anticommutator()).unwrap();
    let mut spec_err = 0.0f64;
    for (block, kblock, sign) in [
        (&hfw.upper_upper, &k.upper_upper, 1.0),
        (&hfw.lower_lower, &k.lower_lower, -1.0),
    ] {
        let mut got = HermitianEigen::new(block).unwrap().values.clone();
        let mut want: Vec<f64> = HermitianEigen::new(kblock)
            .unwrap()
            .values
            .iter()
            .map(|x| sign * (x.max(0.0) + m * m).sqrt())
            .collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            spec_err = spec_err.max((a - b).abs());
        }
    }

    let minus = u_su2(&pair, m, false).unwrap();
    let rm = transform_report("su2_minus", &minus, &h, &refs, &tol).unwrap();
    let min_lower = rm.states.iter().map(|s| s.lower).fold(f64::INFINITY, f64::min);
    let ok = rp.is_fw && plus_max < 1e-10 && spec_err < 1e-10 && min_lower >= 0.1 && rm.necessary < 1e-10;
    (
        ok,
        format!(
            "sign+: is_fw = {}, max residual = {plus_max:.2e}, spectrum error = {spec_err:.2e}; sign−: min lower = {min_lower:.2e} (≥ 0.1), necessary = {:.2e} (< 1e-10)",
            rp.is_fw, rm.necessary
        ),
    )
}

/// `‖P(D − T)P‖ / ‖P T P‖`.
fn projected_rel(d: &OperatorMatrix, t: &OperatorMatrix, p: &OperatorMatrix) -> f64 {
    linalg::norm(&(p * (d - t) * p)) / linalg::norm(&(p * t * p))
}

const PERT_N: usize = 64;
const PERT_L: f64 = 40.0;
const PERT_M: f64 = 2.0;
const PERT_TOL: f64 = 5.0 * 0.25 * 0.25;

fn criterion_7() -> Outcome {
    let lat = line(PERT_N, PERT_L);
    let a0 = lat.sample(|x| (2.0 * PI * x[2] / PERT_L).cos());
    let (_, terms) = h_fw_perturbative_electric(PERT_M, 1.0, &a0, &lat).unwrap();
    let linear = terms.partial_sum(&ELECTRIC_LINEAR_TERMS);
    let d = coupling_derivative(
        |e| {
            let h = build_electric(PERT_M, e, &a0, &lat)?;
            Ok(u_eriksen(&h)?.conjugate(&h))
        },
        1e-3,
    )
    .unwrap();
    let p = low_momentum_projector(&lat, 0.25 * PERT_M).unwrap();
    let rel = projected_rel(&d.derivative, &linear, &p);
    let full = linalg::distance(&d.derivative, &linear) / linalg::norm(&linear);
    (
        rel < PERT_TOL,
        format!(
            "relative error on |p| ≤ 0.25m = {rel:.2e} (< {PERT_TOL}), full grid {full:.2e}, Richardson estimate {:.1e}",
            d.error_estimate
        ),
    )
}

fn gravity_fields(lat: &Lattice, l: f64, lam: f64, vary_v: bool) -> (ScalarField, ScalarField) {
    let g = lat.sample(|x| 1.0 + lam * (2.0 * PI * x[2] / l).cos());
    let one = ScalarField::constant(lat, 1.0);
    if vary_v {
        (g, one)
    } else {
        (one, g)
    }
}

const SLOPE_N: usize = 32;
const SLOPE_L: f64 = 10.0;
const SLOPE_M: f64 = 1.0;

fn lambdas() -> Vec<f64> {
    (0..5).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect()
}

struct GroundState {
    fw_match: f64,
    ek_match: f64,
    reconstruction: f64,
}

fn gravity_ground_state(lam: f64, vary_v: bool) -> GroundState {
    let lat = line(SLOPE_N, SLOPE_L);
    let (v, w) = gravity_fields(&lat, SLOPE_L, lam, vary_v);
    let case = HamiltonianCase::gravity(SLOPE_M, v.clone(), w.clone());
    let h = case.build(&lat).unwrap();
    let spec = Spectrum::new(&h).unwrap();
    let er = fw_core::transforms::u_eriksen_with(&spec, FactorOrder::ProjectorFirst).unwrap();
    let k = spec.lowest(Branch::Positive, 1)[0];
    let sol = spec.solution(k, &lat);
    let r = reference_phi(&sol, &er.matrix).unwrap();
    let (upert, _) = u_perturbative_gravity(SLOPE_M, &v, &w, &lat).unwrap();
    let uek = u_ek_perturbative_gravity(SLOPE_M, &v, &w, &lat).unwrap();
    let upper = sol.state.upper();
    let scale = C64::new(1.0 / upper.norm(), 0.0);
    let chi = gravity_lower_from_upper(&upper.scaled(scale), Branch::Positive, &case, &lat, 1).unwrap();
    GroundState {
        fw_match: sufficiency_residual(&upert.matrix, &sol, &r).unwrap().match_,
        ek_match: sufficiency_residual(&uek.matrix, &sol, &r).unwrap().match_,
        reconstruction: chi.sub(&sol.state.lower().scaled(scale)).norm(),
    }
}

fn criterion_8() -> Outcome {
    let lat = line(PERT_N, PERT_L);
    let p = low_momentum_projector(&lat, 0.25 * PERT_M).unwrap();
    let mut derivative_ok = true;
    let mut parts = Vec::new();
    for (name, vary_v) in [("V", true), ("W", false)] {
        let series = coupling_derivative(
            |lam| {
                let (v, w) = gravity_fields(&lat, PERT_L, lam, vary_v);
                Ok(h_fw_perturbative_gravity(PERT_M, &v, &w, &lat)?.0)
            },
            1e-3,
        )
        .unwrap();
        let exact = coupling_derivative(
            |lam| {
                let (v, w) = gravity_fields(&lat, PERT_L, lam, vary_v);
                let h = build_gravity(PERT_M, &v, &w, &lat)?;
                Ok(u_eriksen(&h)?.conjugate(&h))
            },
            1e-3,
        )
        .unwrap();
        let rel = projected_rel(&exact.derivative, &series.derivative, &p);
        derivative_ok &= rel < PERT_TOL;
        parts.push(format!("d/dλ_{name} rel {rel:.2e}"));
    }

    let lams = lambdas();
    let mut slope_ok = true;
    for vary_v in [true, false] {
        let free = gravity_ground_state(0.0, vary_v);
        let rows: Vec<GroundState> = lams.iter().map(|&l| gravity_ground_state(l, vary_v)).collect();
        let fw: Vec<f64> = rows.iter().map(|r| r.fw_match).collect();
        let ek: Vec<f64> = rows.iter().map(|r| (r.ek_match - free.ek_match).abs()).collect();
        let (fw_slope, _) = linalg::log_log_slope(&lams, &fw);
        let (ek_slope, _) = linalg::log_log_slope(&lams, &ek);
        if vary_v {
            slope_ok = fw_slope >= 2.0 - 0.15 && (ek_slope - 1.0).abs() <= 0.15;
            parts.push(format!(
                "λ_V slopes: FW {fw_slope:.3} (≥ 1.85), E-K − free {ek_slope:.3} (1 ± 0.15)"
            ));
        } else {
            parts.push(format!("[λ_W info: FW {fw_slope:.3}, E-K − free {ek_slope:.3}]"));
        }
    }
    (
        derivative_ok && slope_ok,
        format!("{} (< {PERT_TOL}); {}", parts[..2].join(", "), parts[2..].join("; ")),
    )
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    let electric = {
        let lat = line(32, 20.0);
        let a0 = lat.sample(|x| 0.5 * (2.0 * PI * x[2] / 20.0).cos());
        (lat.clone(), HamiltonianCase::electric(1.0, 1.0, a0))
    };
    let magnetic = {
        let l = 2.0 * PI;
        let lat = Lattice::new(LatticeSpec::new(2, 8, l).unwrap()).unwrap();
        let a = flux_tube_potential(&lat, 2.0 * PI / (l * l)).unwrap();
        (lat, HamiltonianCase::magnetic(2.0, 1.0, a))
    };
    let mut count = 0;
    for (lat, case) in [electric, magnetic] {
        let h = case.build(&lat).unwrap();
        for sol in Spectrum::new(&h).unwrap().solutions(&lat) {
            worst = worst.max(two_component_residual(&sol, &case, &lat).unwrap());
            count += 1;
        }
    }
    let lams = lambdas();
    let rec: Vec<f64> = lams
        .iter()
        .map(|&l| gravity_ground_state(l, true).reconstruction)
        .collect();
    let (slope, r2) = linalg::log_log_slope(&lams, &rec);
    (
        worst < 1e-9 && (slope - 2.0).abs() <= 0.15,
        format!(
            "max reduction residual over {count} states = {worst:.2e} (< 1e-9); gravity reconstruction slope = {slope:.3} (2 ± 0.15, R² {r2:.4})"
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    let free = (line(16, 2.0 * PI), HamiltonianCase::free(1.0));
    let electric = {
        let lat = line(32, 20.0);
        let a0 = lat.sample(|x| 0.5 * (2.0 * PI * x[2] / 20.0).cos());
        (lat.clone(), HamiltonianCase::electric(1.0, 1.0, a0))
    };
    for (lat, case) in [free, electric] {
        let h = case.build(&lat).unwrap();
        let spec = Spectrum::new(&h).unwrap();
        let er = fw_core::transforms::u_eriksen_with(&spec, FactorOrder::ProjectorFirst).unwrap();
        let ops: Vec<OperatorMatrix> = [
            ObservableKind::Position,
            ObservableKind::Velocity,
            ObservableKind::Polarization,
        ]
        .iter()
        .map(|&k| observable_fw(k, 2, &case, &lat).unwrap())
        .collect();
        let mut idx = spec.lowest(Branch::Positive, 8);
        idx.extend(spec.lowest(Branch::Negative, 8));
        for k in idx {
            let sol: EigenSolution = spec.solution(k, &lat);
            for op in &ops {
                let x = fw_expectation(op, &sol, &er.matrix).unwrap();
                worst = worst.max((x.full - x.shortcut).norm());
            }
        }
    }
    let lat = Lattice::plane_wave([0.0, 0.0, 4.0]);
    let v = observable_fw(ObservableKind::Velocity, 2, &HamiltonianCase::free(3.0), &lat).unwrap();
    let velocity = linalg::distance(&v, &linalg::scaled(&linalg::identity(4), C64::new(0.8, 0.0)));
    (
        worst < 1e-10 && velocity < 1e-12,
        format!("max |full − shortcut| = {worst:.2e} (< 1e-10), ‖v − 4/5‖ = {velocity:.2e} (< 1e-12)"),
    )
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn fwcheck(scenario: &Path, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_fwcheck"))
        .args([
            "run",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn criterion_11() -> Outcome {
    let golden = ["free", "magnetic", "electric", "susy", "gravity"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    let mut flips = 0;
    for name in golden {
        let path = scenario_dir().join(format!("{name}.json"));
        if fwcheck(&path, a.path()) != 0 || fwcheck(&path, b.path()) != 0 {
            failures.push(format!("{name} exit ≠ 0"));
        }
        let report = format!("{name}.report.json");
        if fs::read(a.path().join(&report)).ok() != fs::read(b.path().join(&report)).ok() {
            failures.push(format!("{name} report differs between runs"));
        }
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        let n = value["transforms"].as_array().unwrap().len();
        for k in 0..n {
            let mut flipped = value.clone();
            let t = &mut flipped["transforms"][k];
            let Some(e) = t.get("expect_fw").and_then(|e| e.as_bool()) else {
                continue;
            };
            t["expect_fw"] = serde_json::Value::Bool(!e);
            let fpath = a.path().join(format!("{name}_flip{k}.json"));
            fs::write(&fpath, flipped.to_string()).unwrap();
            flips += 1;
            if fwcheck(&fpath, b.path()) != 1 {
                failures.push(format!("{name} flip {k} did not exit 1"));
            }
        }
    }
    (
        failures.is_empty(),
        format!(
            "5 golden scenarios, {flips} flipped expectations, byte-identical reruns; failures: {:?}",
            failures
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 11] = [
        ("free-case exactness", criterion_1),
        ("Eriksen collapse", criterion_2),
        ("spinor relations", criterion_3),
        ("magnetic closed form", criterion_4),
        ("E-K impostor, free", criterion_5),
        ("SU(2) signs", criterion_6),
        ("electric perturbative order", criterion_7),
        ("gravity perturbative order", criterion_8),
        ("two-component reduction", criterion_9),
        ("expectation shortcut", criterion_10),
        ("CLI fixtures", criterion_11),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(f) {
            Ok(r) => r,
            Err(e) => (
                false,
                format!(
                    "panicked: {}",
                    e.downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default()
                ),
            ),
        };
        writeln!(
            out,
            "{} {:>2} {name}: {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        )
        .unwrap();
        if !ok {
            failed.push(i + 1);
        }
    }
    out.flush().unwrap();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
