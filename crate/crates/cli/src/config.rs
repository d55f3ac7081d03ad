//! Run configuration: a TOML file and command-line flags deserialize into the
//! same [`RunConfig`]; flags are overlaid on the file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thz_orient::propagator::PropagationConfig;
use thz_orient::scans::{Axis, ScanGrid};
use thz_orient::thermal::DEFAULT_CUTOFF;
use thz_orient::units::{molecule, to_reduced, PhysicalField, PhysicalMolecule, ReducedParams};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// cm^-1
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// debye
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
}

/// Laboratory pulse: MV/cm, ps, THz.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
}

impl FieldSection {
    fn is_empty(&self) -> bool {
        self.e_peak.is_none() && self.delta.is_none() && self.f.is_none()
    }

    fn resolve(&self) -> PhysicalField {
        let r = PhysicalField::reference();
        PhysicalField {
            e_peak: self.e_peak.unwrap_or(r.e_peak),
            delta: self.delta.unwrap_or(r.delta),
            f: self.f.unwrap_or(r.f),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

impl ReducedSection {
    fn is_empty(&self) -> bool {
        self.a.is_none() && self.f.is_none() && self.d.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    /// Post-pulse window in rotational periods.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<f64>,
    /// Post-pulse samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Highest J whose line is reported.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScanKindName {
    /// rotational constant versus temperature
    #[value(name = "b-t")]
    BT,
    /// field amplitude versus temperature
    #[value(name = "e0-t")]
    E0T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
}

impl AxisSpec {
    /// `lo:hi:n` or `lo:hi:n:log`
    pub fn parse(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("expected lo:hi:n[:log], got {text:?}"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
        let spacing = match parts.get(3).map(|s| s.trim()) {
            None | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => return Err(format!("unknown spacing {other:?}")),
        };
        Ok(AxisSpec {
            values: None,
            min: Some(num(parts[0])?),
            max: Some(num(parts[1])?),
            n: Some(parts[2].trim().parse().map_err(|e| format!("{:?}: {e}", parts[2]))?),
            spacing: Some(spacing),
        })
    }

    fn build(&self, key: &str, name: &str, unit: &str, default: &AxisSpec) -> Result<Axis, CliError> {
        let usage = |e: thz_orient::Error| CliError::Usage(format!("{key}: {e}"));
        if let Some(values) = &self.values {
            if self.min.is_some() || self.max.is_some() || self.n.is_some() {
                return Err(CliError::Usage(format!(
                    "{key}: give either values or min/max/n"
                )));
            }
            return Axis::new(name, unit, values.clone()).map_err(usage);
        }
        let min = self.min.or(default.min).unwrap_or(0.0);
        let max = self.max.or(default.max).unwrap_or(min);
        let n = self.n.or(default.n).unwrap_or(1);
        if n == 0 {
            return Err(CliError::Usage(format!("{key}.n must be >= 1")));
        }
        match self.spacing.or(default.spacing).unwrap_or(Spacing::Linear) {
            Spacing::Linear => Axis::linear(name, unit, min, max, n),
            Spacing::Log => Axis::logarithmic(name, unit, min, max, n),
        }
        .map_err(usage)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ScanKindName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis1: Option<AxisSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub molecule: Option<MoleculeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedSection>,
    /// K
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_tilde: Option<f64>,
    /// Boltzmann tail mass left out of the ensemble.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub propagation: Option<PropagationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

pub const WORKERS_ENV: &str = "THZ_ORIENT_WORKERS";

fn deep_merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => deep_merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `other` wins wherever it sets a key.
    pub fn overlay(&self, other: &RunConfig) -> Result<Self, CliError> {
        let mut base = serde_json::to_value(self).expect("config serializes");
        deep_merge(&mut base, serde_json::to_value(other).expect("config serializes"));
        serde_json::from_value(base).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn propagation(&self) -> PropagationConfig {
        self.propagation.unwrap_or_default()
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(DEFAULT_CUTOFF)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .as_ref()
            .and_then(|o| o.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn svg(&self) -> bool {
        self.output.as_ref().and_then(|o| o.svg).unwrap_or(true)
    }

    /// Flag or config value, then the environment variable.
    pub fn workers(&self) -> Result<Option<usize>, CliError> {
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(CliError::Usage("workers must be >= 1".into()));
            }
            return Ok(Some(w));
        }
        match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
            Err(_) => Ok(None),
        }
    }

    /// The settings that determine results; output location and worker count
    /// are excluded.
    pub fn effective(&self) -> RunConfig {
        RunConfig {
            output: None,
            workers: None,
            ..self.clone()
        }
    }

    /// Short content hash of the result-determining settings.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.effective()).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..6])
    }

    fn molecule_spec(&self) -> Result<Option<PhysicalMolecule>, CliError> {
        let Some(m) = &self.molecule else {
            return Ok(None);
        };
        match (&m.name, m.b, m.mu0) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::Usage(
                "molecule.name conflicts with molecule.b / molecule.mu0; give one or the other".into(),
            )),
            (Some(name), None, None) => molecule(name).map(Some).map_err(|e| CliError::Usage(format!("molecule.name: {e}"))),
            (None, Some(b), Some(mu0)) => PhysicalMolecule::new("custom", b, mu0)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("molecule: {e}"))),
            (None, Some(_), None) => Err(CliError::Usage("missing key molecule.mu0".into())),
            (None, None, Some(_)) => Err(CliError::Usage("missing key molecule.b".into())),
            (None, None, None) => Ok(None),
        }
    }

    /// Resolve a single parameter point for `convert`, `trace` and `spectrum`.
    pub fn resolve_point(&self) -> Result<Point, CliError> {
        let mol = self.molecule_spec()?;
        let field = self.field.clone().unwrap_or_default();
        let reduced = self.reduced.clone().unwrap_or_default();
        if !field.is_empty() && !reduced.is_empty() {
            return Err(CliError::Usage(
                "give either a physical field ([field]) or a reduced one ([reduced]), not both".into(),
            ));
        }
        if self.temperature.is_some() && self.t_tilde.is_some() {
            return Err(CliError::Usage("give either temperature or t_tilde, not both".into()));
        }
        if !reduced.is_empty() {
            let a = reduced.a.ok_or_else(|| CliError::Usage("missing key reduced.a".into()))?;
            let f = reduced.f.ok_or_else(|| CliError::Usage("missing key reduced.f".into()))?;
            let d = reduced.d.ok_or_else(|| CliError::Usage("missing key reduced.d".into()))?;
            let t_tilde = match (self.t_tilde, self.temperature, &mol) {
                (Some(t), _, _) => t,
                (None, Some(t), Some(m)) => to_reduced(m, &PhysicalField::reference(), t)
                    .map_err(|e| CliError::Usage(format!("temperature: {e}")))?
                    .t_tilde,
                (None, Some(_), None) => {
                    return Err(CliError::Usage(
                        "temperature in K needs a molecule; use t_tilde in reduced mode".into(),
                    ))
                }
                (None, None, _) => 0.0,
            };
            let params = ReducedParams::new(a, f, d, t_tilde).map_err(|e| CliError::Usage(format!("reduced: {e}")))?;
            return Ok(Point {
                params,
                molecule: mol,
                field: None,
                temperature: self.temperature,
            });
        }
        let mol = mol.ok_or_else(|| {
            CliError::Usage("missing key molecule (name, or b and mu0) or reduced parameters".into())
        })?;
        if self.t_tilde.is_some() {
            return Err(CliError::Usage(
                "t_tilde belongs to reduced mode; give temperature in K with a molecule".into(),
            ));
        }
        let field = field.resolve();
        let temperature = self.temperature.unwrap_or(0.0);
        let params = to_reduced(&mol, &field, temperature).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Point {
            params,
            molecule: Some(mol),
            field: Some(field),
            temperature: Some(temperature),
        })
    }

    /// Resolve the grid for `scan`.
    pub fn resolve_scan(&self) -> Result<ScanGrid, CliError> {
        if self.reduced.as_ref().is_some_and(|r| !r.is_empty()) {
            return Err(CliError::Usage("scan works in physical units; remove [reduced]".into()));
        }
        if self.temperature.is_some() || self.t_tilde.is_some() {
            return Err(CliError::Usage("temperature is a scan axis; remove temperature / t_tilde".into()));
        }
        let scan = self.scan.clone().unwrap_or_default();
        let field = self.field.clone().unwrap_or_default();
        let t_default = AxisSpec {
            min: Some(0.0),
            max: Some(300.0),
            n: Some(64),
            spacing: Some(Spacing::Linear),
            values: None,
        };
        let axis2 = scan.axis2.clone().unwrap_or_default().build("scan.axis2", "T", "K", &t_default)?;
        let usage = |e: thz_orient::Error| CliError::Usage(e.to_string());
        match scan.kind.unwrap_or(ScanKindName::BT) {
            ScanKindName::BT => {
                let m = self.molecule.clone().unwrap_or_default();
                if m.name.is_some() || m.b.is_some() {
                    return Err(CliError::Usage(
                        "a (B, T) scan sweeps B; only molecule.mu0 may be set".into(),
                    ));
                }
                let b_default = AxisSpec {
                    min: Some(0.1),
                    max: Some(21.0),
                    n: Some(64),
                    spacing: Some(Spacing::Log),
                    values: None,
                };
                let axis1 = scan.axis1.clone().unwrap_or_default().build("scan.axis1", "B", "cm^-1", &b_default)?;
                ScanGrid::b_t(axis1, axis2, field.resolve(), m.mu0.unwrap_or(1.0)).map_err(usage)
            }
            ScanKindName::E0T => {
                if field.e_peak.is_some() {
                    return Err(CliError::Usage("an (E0, T) scan sweeps field.e_peak; remove it".into()));
                }
                let mol = match self.molecule_spec()? {
                    Some(m) => m,
                    None => molecule("LiCl").expect("built-in"),
                };
                let e_default = AxisSpec {
                    min: Some(0.0),
                    max: Some(2.0),
                    n: Some(64),
                    spacing: Some(Spacing::Linear),
                    values: None,
                };
                let axis1 = scan.axis1.clone().unwrap_or_default().build("scan.axis1", "E0", "MV/cm", &e_default)?;
                let f = field.resolve();
                ScanGrid::e0_t(axis1, axis2, mol, f.delta, f.f).map_err(usage)
            }
        }
    }
}

/// One resolved parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub params: ReducedParams,
    pub molecule: Option<PhysicalMolecule>,
    pub field: Option<PhysicalField>,
    pub temperature: Option<f64>,
}
