//! Scenario files: strict JSON describing one lattice problem, the
//! transforms to run on it and the verdict each one is expected to reach.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use fw_core::hamiltonians::{
    check_flux_quantization, check_metric, flux_tube_potential, CaseKind, HamiltonianCase, SusyFields,
};
use fw_core::lattice::{Lattice, LatticeSpec, ScalarField};
use fw_core::transforms::FactorOrder;
use fw_core::verify::Tolerances;

/// Largest bispinor dimension a scenario may request.
pub const MAX_BISPINOR_DIM: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Used for output file names.
    pub name: String,
    pub case: CaseKind,
    pub m: f64,
    /// Charge for the electric and magnetic cases.
    #[serde(default = "unit")]
    pub e: f64,
    pub lattice: LatticeConfig,
    #[serde(default, skip_serializing_if = "Fields::is_empty")]
    pub fields: Fields,
    #[serde(default)]
    pub transforms: Vec<TransformSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// States per branch closest to zero energy; `null` means the full spectrum.
    #[serde(default = "default_states")]
    pub states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

fn unit() -> f64 {
    1.0
}

fn default_states() -> Option<usize> {
    Some(8)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

/// An analytic profile `f(x)` along one lattice axis (the last one when unset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    Cosine {
        amplitude: f64,
        wavenumber: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<usize>,
    },
    Sine {
        amplitude: f64,
        wavenumber: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<usize>,
    },
    /// Periodic stand-in for a linear ramp, `a·(L/2π)·sin(2πx/L)`;
    /// equals `a·x` near the origin.
    Sawtooth {
        amplitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<usize>,
    },
}

impl Profile {
    fn wavenumber(&self) -> u32 {
        match self {
            Profile::Constant { .. } => 0,
            Profile::Cosine { wavenumber, .. } | Profile::Sine { wavenumber, .. } => *wavenumber,
            Profile::Sawtooth { .. } => 1,
        }
    }

    fn axis(&self) -> Option<usize> {
        match self {
            Profile::Constant { .. } => None,
            Profile::Cosine { axis, .. } | Profile::Sine { axis, .. } | Profile::Sawtooth { axis, .. } => *axis,
        }
    }

    /// Same family with the amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = *self;
        match &mut out {
            Profile::Constant { value } => *value *= s,
            Profile::Cosine { amplitude, .. }
            | Profile::Sine { amplitude, .. }
            | Profile::Sawtooth { amplitude, .. } => *amplitude *= s,
        }
        out
    }

    /// Samples the profile, reading the coordinate along `axis` unless the
    /// profile names its own.
    pub fn sample(&self, lattice: &Lattice, l: f64, axis: usize) -> ScalarField {
        let axis = self.axis().unwrap_or(axis);
        let k = 2.0 * PI / l;
        match *self {
            Profile::Constant { value } => ScalarField::constant(lattice, value),
            Profile::Cosine {
                amplitude, wavenumber, ..
            } => lattice.sample(|x| amplitude * (k * wavenumber as f64 * x[axis]).cos()),
            Profile::Sine {
                amplitude, wavenumber, ..
            } => lattice.sample(|x| amplitude * (k * wavenumber as f64 * x[axis]).sin()),
            Profile::Sawtooth { amplitude, .. } => lattice.sample(|x| amplitude * (k * x[axis]).sin() / k),
        }
    }
}

/// Field specification; which entries apply depends on the case.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fields {
    /// Electric scalar potential `A0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<Profile>,
    /// Magnetic flux-tube amplitude: `A_y = b0 (L/2π) sin(2πx/L)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    /// Gravity: `V = 1 + v(x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Profile>,
    /// Gravity: `W = 1 + w(x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Profile>,
    /// Susy `E_i`, sampled along axis `i` on every lattice axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_vec: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a5: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e5: Option<Profile>,
}

impl Fields {
    fn is_empty(&self) -> bool {
        *self == Fields::default()
    }

    fn profiles(&self) -> [(&'static str, Option<&Profile>); 6] {
        [
            ("a0", self.a0.as_ref()),
            ("v", self.v.as_ref()),
            ("w", self.w.as_ref()),
            ("e_vec", self.e_vec.as_ref()),
            ("a5", self.a5.as_ref()),
            ("e5", self.e5.as_ref()),
        ]
    }

    /// Every profile amplitude multiplied by `s`; `b0` is left alone.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |p: &Option<Profile>| p.map(|p| p.scaled(s));
        Fields {
            a0: f(&self.a0),
            b0: self.b0,
            v: f(&self.v),
            w: f(&self.w),
            e_vec: f(&self.e_vec),
            a5: f(&self.a5),
            e5: f(&self.e5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformName {
    Fw,
    Eriksen,
    ClosedForm,
    Ek,
    EkCorrected,
    Su2,
    Perturbative,
    EkPerturbative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

/// A transform entry: either a bare name or an object with options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransformSpec {
    Name(TransformName),
    Detailed(TransformOptions),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformOptions {
    pub kind: TransformName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_fw: Option<bool>,
    /// SU(2) exponent sign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    /// Perturbative series: 0 keeps the free terms only, 1 the full first-order series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u8>,
    /// Eriksen factor order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_order: Option<FactorOrder>,
}

impl TransformSpec {
    pub fn options(&self) -> TransformOptions {
        match self {
            TransformSpec::Name(kind) => TransformOptions {
                kind: *kind,
                expect_fw: None,
                sign: None,
                order: None,
                factor_order: None,
            },
            TransformSpec::Detailed(o) => o.clone(),
        }
    }
}

impl TransformOptions {
    /// Report label, e.g. `su2_minus`.
    pub fn label(&self) -> String {
        match self.kind {
            TransformName::Fw => "fw".into(),
            TransformName::Eriksen => match self.factor_order.unwrap_or_default() {
                FactorOrder::ProjectorFirst => "eriksen".into(),
                FactorOrder::NormFirst => "eriksen_norm_first".into(),
            },
            TransformName::ClosedForm => "closed_form".into(),
            TransformName::Ek => "ek".into(),
            TransformName::EkCorrected => "ek_corrected".into(),
            TransformName::Su2 => match self.sign.unwrap_or(Sign::Plus) {
                Sign::Plus => "su2_plus".into(),
                Sign::Minus => "su2_minus".into(),
            },
            TransformName::Perturbative => match self.order.unwrap_or(1) {
                1 => "perturbative".into(),
                o => format!("perturbative_order{o}"),
            },
            TransformName::EkPerturbative => "ek_perturbative".into(),
        }
    }
}

/// Field-amplitude sweep: every profile amplitude is multiplied by each `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub lambdas: Vec<f64>,
}

/// Configuration problems, each prefixed with the offending field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", .0.join("\n"))]
pub struct ScenarioError(pub Vec<String>);

/// Parses and validates a single scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError(vec![format!("{path}: {}", e.inner())])
    })?;
    s.validate()?;
    Ok(s)
}

/// Parses a file holding one scenario object or an array of them.
pub fn parse_batch(text: &str) -> Result<Vec<Scenario>, ScenarioError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ScenarioError(vec![format!("scenario file: {e}")]))?;
    let serde_json::Value::Array(items) = value else {
        return parse_scenario(text).map(|s| vec![s]);
    };
    let mut out = Vec::with_capacity(items.len());
    let mut errors = Vec::new();
    for (i, item) in items.iter().enumerate() {
        match parse_scenario(&item.to_string()) {
            Ok(s) => out.push(s),
            Err(ScenarioError(es)) => errors.extend(es.into_iter().map(|e| format!("[{i}].{e}"))),
        }
    }
    let mut names: Vec<&str> = out.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    for pair in names.windows(2) {
        if pair[0] == pair[1] {
            errors.push(format!("name: duplicate scenario name {:?} in batch", pair[0]));
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ScenarioError(errors))
    }
}

impl Scenario {
    pub fn lattice_spec(&self) -> Result<LatticeSpec, String> {
        LatticeSpec::new(self.lattice.dim, self.lattice.n, self.lattice.l).map_err(|e| e.to_string())
    }

    pub fn transform_options(&self) -> Vec<TransformOptions> {
        self.transforms.iter().map(TransformSpec::options).collect()
    }

    /// Checks every invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut errs = Vec::new();
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        {
            errs.push(format!(
                "name: must be non-empty ASCII letters, digits, '-', '_' or '.', got {:?}",
                self.name
            ));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            errs.push(format!("m: mass must be positive, got {}", self.m));
        }
        if !self.e.is_finite() {
            errs.push(format!("e: charge must be finite, got {}", self.e));
        }
        match self.lattice_spec() {
            Err(e) => errs.push(format!("lattice: {e}")),
            Ok(spec) => {
                if 4 * spec.sites() > MAX_BISPINOR_DIM {
                    errs.push(format!(
                        "lattice: bispinor dimension 4·N^dim = {} exceeds {MAX_BISPINOR_DIM}",
                        4 * spec.sites()
                    ));
                }
            }
        }
        if let Err(e) = self.tolerances.validate() {
            errs.push(format!("tolerances: {e}"));
        }
        if self.states == Some(0) {
            errs.push("states: must be at least 1 (use null for the full spectrum)".into());
        }
        self.validate_fields(&mut errs);
        self.validate_transforms(&mut errs);
        if let Some(sweep) = &self.sweep {
            if sweep.lambdas.len() < 2 {
                errs.push("sweep.lambdas: need at least two amplitudes for a slope fit".into());
            }
            for (i, l) in sweep.lambdas.iter().enumerate() {
                if !(l.is_finite() && *l > 0.0) {
                    errs.push(format!("sweep.lambdas[{i}]: must be positive, got {l}"));
                }
            }
            if self.case == CaseKind::Magnetic {
                errs.push("sweep: amplitude sweeps would break flux quantization in the magnetic case".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError(errs))
        }
    }

    fn validate_fields(&self, errs: &mut Vec<String>) {
        let f = &self.fields;
        let allowed: &[&str] = match self.case {
            CaseKind::Free => &[],
            CaseKind::Electric => &["a0"],
            CaseKind::Magnetic => &["b0"],
            CaseKind::Gravity => &["v", "w"],
            CaseKind::Susy => &["e_vec", "a5", "e5"],
        };
        let present = f
            .profiles()
            .into_iter()
            .filter(|(_, p)| p.is_some())
            .map(|(n, _)| n)
            .chain(f.b0.map(|_| "b0"));
        for name in present {
            if !allowed.contains(&name) {
                errs.push(format!("fields.{name}: not used by the {} case", self.case.name()));
            }
        }
        let n = self.lattice.n as u32;
        for (name, p) in f.profiles() {
            let Some(p) = p else { continue };
            if p.wavenumber() > n / 4 {
                errs.push(format!(
                    "fields.{name}.wavenumber: {} exceeds the band limit N/4 = {}",
                    p.wavenumber(),
                    n / 4
                ));
            }
            if let Some(axis) = p.axis() {
                let ok = self.lattice_spec().map(|s| s.axes().contains(&axis)).unwrap_or(true);
                if !ok {
                    errs.push(format!("fields.{name}.axis: {axis} is not a lattice axis"));
                }
            }
        }
        match self.case {
            CaseKind::Electric if f.a0.is_none() => errs.push("fields.a0: required for the electric case".into()),
            CaseKind::Magnetic => match f.b0 {
                None => errs.push("fields.b0: required for the magnetic case".into()),
                Some(b0) => {
                    if self.lattice.dim < 2 {
                        errs.push("lattice.dim: the magnetic case needs at least two dimensions".into());
                    }
                    if let Err(e) = check_flux_quantization(self.e, b0, self.lattice.l) {
                        errs.push(format!("fields.b0: {e}"));
                    }
                }
            },
            CaseKind::Gravity => {
                if let Ok(spec) = self.lattice_spec() {
                    if let Ok(lat) = Lattice::new(spec) {
                        let (v, w) = self.metric(&lat);
                        if let Err(e) = check_metric(&v, &w) {
                            errs.push(format!("fields.v/w: {e}"));
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn validate_transforms(&self, errs: &mut Vec<String>) {
        let mut labels = Vec::new();
        for (i, o) in self.transform_options().iter().enumerate() {
            let path = format!("transforms[{i}]");
            if o.sign.is_some() && o.kind != TransformName::Su2 {
                errs.push(format!("{path}.sign: only the su2 transform takes a sign"));
            }
            if o.factor_order.is_some() && o.kind != TransformName::Eriksen {
                errs.push(format!(
                    "{path}.factor_order: only the eriksen transform takes a factor order"
                ));
            }
            if let Some(order) = o.order {
                if o.kind != TransformName::Perturbative {
                    errs.push(format!("{path}.order: only the perturbative transform takes an order"));
                } else if order > 1 {
                    errs.push(format!(
                        "{path}.order: series are available through order 1, got {order}"
                    ));
                }
            }
            let case_ok = match o.kind {
                TransformName::Su2 => self.case == CaseKind::Susy,
                TransformName::Perturbative => matches!(self.case, CaseKind::Electric | CaseKind::Gravity),
                TransformName::EkPerturbative => self.case == CaseKind::Gravity,
                _ => true,
            };
            if !case_ok {
                errs.push(format!(
                    "{path}.kind: {} is not defined for the {} case",
                    o.label(),
                    self.case.name()
                ));
            }
            let label = o.label();
            if labels.contains(&label) {
                errs.push(format!("{path}: duplicate transform {label}"));
            }
            labels.push(label);
        }
    }

    /// `(V, W)` for the gravity case.
    pub fn metric(&self, lattice: &Lattice) -> (ScalarField, ScalarField) {
        let axis = *lattice.axes().last().unwrap_or(&2);
        let one = |p: &Option<Profile>| match p {
            Some(p) => p.sample(lattice, self.lattice.l, axis).map(|x| 1.0 + x),
            None => ScalarField::constant(lattice, 1.0),
        };
        (one(&self.fields.v), one(&self.fields.w))
    }

    /// Builds the lattice and the Hamiltonian case.
    pub fn build(&self) -> Result<(Lattice, HamiltonianCase), String> {
        let lattice = Lattice::new(self.lattice_spec()?).map_err(|e| e.to_string())?;
        let axis = *lattice.axes().last().unwrap_or(&2);
        let l = self.lattice.l;
        let zero = |p: &Option<Profile>, axis: usize| match p {
            Some(p) => p.sample(&lattice, l, axis),
            None => ScalarField::constant(&lattice, 0.0),
        };
        let case = match self.case {
            CaseKind::Free => HamiltonianCase::free(self.m),
            CaseKind::Electric => HamiltonianCase::electric(self.m, self.e, zero(&self.fields.a0, axis)),
            CaseKind::Magnetic => {
                let b0 = self.fields.b0.unwrap_or(0.0);
                let a = flux_tube_potential(&lattice, b0).map_err(|e| e.to_string())?;
                HamiltonianCase::magnetic(self.m, self.e, a)
            }
            CaseKind::Gravity => {
                let (v, w) = self.metric(&lattice);
                HamiltonianCase::gravity(self.m, v, w)
            }
            CaseKind::Susy => {
                let mut f = SusyFields::zero(&lattice);
                if let Some(p) = &self.fields.e_vec {
                    for &ax in lattice.axes() {
                        f.e.components[ax] = p.sample(&lattice, l, ax).values;
                    }
                }
                f.a5 = zero(&self.fields.a5, axis);
                f.e5 = zero(&self.fields.e5, axis);
                HamiltonianCase::susy(self.m, f)
            }
        };
        Ok((lattice, case))
    }

    /// Copy with every field amplitude multiplied by `s`.
    pub fn with_amplitude(&self, s: f64) -> Scenario {
        let mut out = self.clone();
        out.fields = self.fields.scaled(s);
        out
    }
}
