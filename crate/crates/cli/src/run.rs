use std::fs;
use std::path::{Path, PathBuf};

use fw_core::hamiltonians::{build_susy, FieldSet};
use fw_core::linalg::log_log_slope;
use fw_core::spectra::Spectrum;
use fw_core::transforms::{
    ek_to_fw_corrector, u_closed_form, u_ek_perturbative_gravity, u_eriksen_kolsrud_with, u_eriksen_with, u_free_fw,
    u_perturbative_electric, u_perturbative_gravity, u_su2, FactorOrder, TransformKind, UnitaryMap,
};
use fw_core::verify::{assemble_report, ReferenceStates, StateSample, VerificationReport};
use fw_core::FwError;

use crate::scenario::{parse_batch, Scenario, Sign, TransformName, TransformOptions};

pub type Report = VerificationReport<Scenario>;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub tol_overrides: Vec<(String, f64)>,
    pub tables: bool,
    pub full_spectrum: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Result of one scenario: the report plus any verdicts that differ from
/// the declared expectations.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub report: Report,
    pub mismatches: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn config(context: &str, e: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{context}: {e}"))
}

fn sample_of(scenario: &Scenario, full_spectrum: bool) -> StateSample {
    match (full_spectrum, scenario.states) {
        (false, Some(n)) => StateSample::Lowest(n),
        _ => StateSample::Full,
    }
}

fn build_map(
    o: &TransformOptions,
    scenario: &Scenario,
    lattice: &fw_core::lattice::Lattice,
    case: &fw_core::hamiltonians::HamiltonianCase,
    h: &fw_core::linalg::OperatorMatrix,
    spectrum: &Spectrum,
) -> fw_core::Result<UnitaryMap> {
    let m = scenario.m;
    match o.kind {
        TransformName::Fw => u_free_fw(m, lattice),
        TransformName::Eriksen => u_eriksen_with(spectrum, o.factor_order.unwrap_or_default()),
        TransformName::ClosedForm => u_closed_form(h, m),
        TransformName::Ek => u_eriksen_kolsrud_with(spectrum),
        TransformName::EkCorrected => {
            let ek = u_eriksen_kolsrud_with(spectrum)?;
            Ok(ek_to_fw_corrector(m, lattice)?.after(&ek, TransformKind::EkCorrected))
        }
        TransformName::Su2 => {
            let FieldSet::Susy(f) = &case.fields else {
                return Err(not_defined(o, scenario));
            };
            let (_, pair) = build_susy(m, f, lattice)?;
            u_su2(&pair, m, o.sign.unwrap_or(Sign::Plus) == Sign::Plus)
        }
        TransformName::Perturbative => {
            let (u, terms) = match &case.fields {
                FieldSet::Electric { charge, potential } => u_perturbative_electric(m, *charge, potential, lattice)?,
                FieldSet::Gravity { v, w } => u_perturbative_gravity(m, v, w, lattice)?,
                _ => return Err(not_defined(o, scenario)),
            };
            match o.order.unwrap_or(1) {
                0 => Ok(UnitaryMap::new(
                    terms.partial_sum(&["identity", "kinetic", "kinetic_norm"]),
                    TransformKind::Perturbative,
                )
                .with("order", 0)),
                _ => Ok(u),
            }
        }
        TransformName::EkPerturbative => match &case.fields {
            FieldSet::Gravity { v, w } => u_ek_perturbative_gravity(m, v, w, lattice),
            _ => Err(not_defined(o, scenario)),
        },
    }
}

fn not_defined(o: &TransformOptions, scenario: &Scenario) -> FwError {
    FwError::NotApplicable {
        transform: o.label(),
        reason: format!("{} case", scenario.case.name()),
    }
}

/// Builds the case, runs every requested transform and assembles the report.
pub fn evaluate(scenario: &Scenario, sample: StateSample) -> Result<Report, RunError> {
    let (lattice, case) = scenario.build().map_err(|e| config("build", e))?;
    let h = case.build(&lattice).map_err(|e| config("hamiltonian", e))?;
    let spectrum = Spectrum::new(&h).map_err(|e| config("spectrum", e))?;
    let eriksen = u_eriksen_with(&spectrum, FactorOrder::ProjectorFirst).map_err(|e| config("eriksen reference", e))?;
    let refs = ReferenceStates::new(&spectrum, &eriksen.matrix, &lattice, sample)
        .map_err(|e| config("reference states", e))?;
    let maps = scenario
        .transform_options()
        .iter()
        .map(|o| {
            build_map(o, scenario, &lattice, &case, &h, &spectrum)
                .map(|u| (o.label(), u))
                .map_err(|e| config(&format!("transform {}", o.label()), e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    assemble_report(scenario.clone(), &maps, &h, &refs, scenario.tolerances).map_err(|e| config("report", e))
}

/// Declared expectations that the report contradicts.
pub fn mismatches(report: &Report) -> Vec<String> {
    let options = report.scenario.transform_options();
    options
        .iter()
        .zip(&report.per_transform)
        .filter_map(|(o, t)| match o.expect_fw {
            Some(expected) if expected != t.is_fw => Some(format!(
                "{}: {} expected is_fw = {expected}, measured {} (necessary {:e})",
                report.scenario.name, t.kind, t.is_fw, t.necessary
            )),
            _ => None,
        })
        .collect()
}

/// Canonical report text: pretty JSON with a trailing newline.
pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn write(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<(), RunError> {
    fs::write(&path, text).map_err(|e| RunError::io(&path, e))?;
    files.push(path);
    Ok(())
}

/// Runs one parsed scenario and writes its report (and tables when asked).
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome, RunError> {
    let mut scenario = scenario.clone();
    for (k, v) in &opts.tol_overrides {
        scenario
            .tolerances
            .set(k, *v)
            .map_err(|e| config("--tol-override", e))?;
    }
    let sample = sample_of(&scenario, opts.full_spectrum);
    let report = evaluate(&scenario, sample)?;
    fs::create_dir_all(&opts.out_dir).map_err(|e| RunError::io(&opts.out_dir, e))?;
    let mut files = Vec::new();
    write(
        opts.out_dir.join(format!("{}.report.json", scenario.name)),
        &report_json(&report),
        &mut files,
    )?;
    if opts.tables {
        files.extend(emit_tables(&scenario, &report, &opts.out_dir, sample)?);
    }
    Ok(ScenarioOutcome {
        mismatches: mismatches(&report),
        report,
        files,
    })
}

fn max_of(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, f64::max)
}

/// Writes the CSV tables for a finished run: the per-state residual listing
/// and, when the scenario declares a sweep, residual-vs-amplitude rows and
/// their log-log slope fits. No transforms means no tables.
pub fn emit_tables(
    scenario: &Scenario,
    report: &Report,
    dir: &Path,
    sample: StateSample,
) -> Result<Vec<PathBuf>, RunError> {
    let mut files = Vec::new();
    if report.per_transform.is_empty() {
        return Ok(files);
    }
    let mut modes = String::from("transform,index,epsilon,branch,lower,match,fidelity\n");
    for t in &report.per_transform {
        for (i, s) in t.states.iter().enumerate() {
            modes.push_str(&format!(
                "{},{i},{:e},{},{:e},{:e},{:e}\n",
                t.kind,
                s.epsilon,
                if s.branch.sign() > 0.0 { "positive" } else { "negative" },
                s.lower,
                s.match_,
                s.fidelity
            ));
        }
    }
    write(dir.join(format!("{}.modes.csv", scenario.name)), &modes, &mut files)?;

    let Some(sweep) = &scenario.sweep else {
        return Ok(files);
    };
    let mut rows: Vec<(f64, Report)> = Vec::with_capacity(sweep.lambdas.len());
    for &lambda in &sweep.lambdas {
        rows.push((lambda, evaluate(&scenario.with_amplitude(lambda), sample)?));
    }
    let mut table = String::from("lambda,transform,necessary,lower,match\n");
    for (lambda, r) in &rows {
        for t in &r.per_transform {
            table.push_str(&format!(
                "{lambda:e},{},{:e},{:e},{:e}\n",
                t.kind,
                t.necessary,
                max_of(t.states.iter().map(|s| s.lower)),
                max_of(t.states.iter().map(|s| s.match_))
            ));
        }
    }
    write(dir.join(format!("{}.sweep.csv", scenario.name)), &table, &mut files)?;

    let mut slopes = String::from("transform,quantity,exponent,r2\n");
    for (k, t) in report.per_transform.iter().enumerate() {
        let series: [(&str, Vec<f64>); 3] = [
            (
                "necessary",
                rows.iter().map(|(_, r)| r.per_transform[k].necessary).collect(),
            ),
            (
                "lower",
                rows.iter()
                    .map(|(_, r)| max_of(r.per_transform[k].states.iter().map(|s| s.lower)))
                    .collect(),
            ),
            (
                "match",
                rows.iter()
                    .map(|(_, r)| max_of(r.per_transform[k].states.iter().map(|s| s.match_)))
                    .collect(),
            ),
        ];
        for (quantity, ys) in series {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|(l, _)| *l).zip(ys).filter(|(_, y)| *y > 0.0).unzip();
            let (slope, r2) = if xs.len() >= 2 {
                log_log_slope(&xs, &ys)
            } else {
                (f64::NAN, f64::NAN)
            };
            slopes.push_str(&format!("{},{quantity},{slope},{r2}\n", t.kind));
        }
    }
    write(dir.join(format!("{}.slopes.csv", scenario.name)), &slopes, &mut files)?;
    Ok(files)
}

/// Reads, validates and runs a scenario file (one scenario or a batch);
/// returns the process exit code. Diagnostics go to stderr.
pub fn run(path: &Path, opts: &RunOptions) -> i32 {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read scenario {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let scenarios = match parse_batch(&text) {
        Ok(s) => s,
        Err(e) => {
            for line in &e.0 {
                eprintln!("error: {line}");
            }
            return EXIT_CONFIG;
        }
    };
    let outcomes: Vec<Result<ScenarioOutcome, RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || run_scenario(s, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(RunError::Config("scenario worker panicked".into())))
            })
            .collect()
    });
    let mut code = EXIT_OK;
    for (s, outcome) in scenarios.iter().zip(outcomes) {
        match outcome {
            Err(e) => {
                eprintln!("error: {}: {e}", s.name);
                code = EXIT_CONFIG;
            }
            Ok(o) => {
                for t in &o.report.per_transform {
                    eprintln!(
                        "{}: {} is_fw = {} (necessary {:e})",
                        s.name, t.kind, t.is_fw, t.necessary
                    );
                }
                for m in &o.mismatches {
                    eprintln!("mismatch: {m}");
                }
                if !o.mismatches.is_empty() && code == EXIT_OK {
                    code = EXIT_MISMATCH;
                }
            }
        }
    }
    code
}
