//! TOML experiment configuration.
//!
//! ```toml
//! [instance]
//! family = "rotating-projector"
//! total_angle = 1.5707963267948966
//!
//! [protocol]
//! epsilon = 0.1
//! delta = 0.05
//! mode = "both"
//! trajectories = 2000
//! seed = 7
//!
//! [protocol.repetition]
//! mode = "adaptive"
//! k_max = 10000
//!
//! [outputs]
//! directory = "out"
//! formats = ["json", "csv"]
//! ```
//!
//! `[instance]` is either a generated family (see [`InstanceSpec`]), `family = "custom"`
//! with explicit term lists, or `file = "..."` naming a TOML file holding such a table or a
//! DIMACS `.cnf` formula. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FrustrationFreeHamiltonian;
use crate::instances::pauli::PauliString;
use crate::instances::{CheckedPath, InstanceSpec, SatPath, FF_CHECK_SAMPLES, FF_CHECK_TOL};
use crate::path::{verify_frustration_free, InterpolationPath};
use crate::protocol::ProtocolConfig;
use crate::spectral::HermitianOperator;
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub verbosity: Verbosity,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
            verbosity: Verbosity::default(),
        }
    }
}

/// One term of a custom Hamiltonian. Weights default to 1 and are normalized per list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TermSpec {
    /// `(I - S) / 2` for a signed Pauli string `S` over all qubits.
    PauliProjector {
        pauli: String,
        #[serde(default)]
        weight: Option<f64>,
    },
    /// `|bits><bits|` on the listed qubits.
    ComputationalProjector {
        qubits: Vec<usize>,
        bits: String,
        #[serde(default)]
        weight: Option<f64>,
    },
    /// Hermitian matrix on the listed qubits, normalized to spectrum `[0, 1]`.
    CustomMatrix {
        qubits: Vec<usize>,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        weight: Option<f64>,
    },
}

impl TermSpec {
    fn weight(&self) -> f64 {
        match self {
            TermSpec::PauliProjector { weight, .. }
            | TermSpec::ComputationalProjector { weight, .. }
            | TermSpec::CustomMatrix { weight, .. } => weight.unwrap_or(1.0),
        }
    }

    fn build(&self, n_qubits: usize) -> Result<(Vec<usize>, HermitianOperator)> {
        match self {
            TermSpec::PauliProjector { pauli, .. } => {
                let s: PauliString = pauli.parse()?;
                if s.n_qubits() != n_qubits {
                    return Err(Error::DimensionMismatch {
                        expected: n_qubits,
                        found: s.n_qubits(),
                    });
                }
                s.violation_projector()
            }
            TermSpec::ComputationalProjector { qubits, bits, .. } => {
                if bits.len() != qubits.len() {
                    return Err(Error::Parse(format!(
                        "bits {bits:?} must have one character per qubit in {qubits:?}"
                    )));
                }
                let index = bits.chars().try_fold(0usize, |acc, c| match c {
                    '0' => Ok(acc << 1),
                    '1' => Ok((acc << 1) | 1),
                    other => Err(Error::Parse(format!("invalid bit {other:?} in {bits:?}"))),
                })?;
                let mut diag = vec![0.0; 1 << qubits.len()];
                diag[index] = 1.0;
                Ok((qubits.clone(), HermitianOperator::from_real_diagonal(&diag)))
            }
            TermSpec::CustomMatrix { qubits, re, im, .. } => {
                let dim = 1 << qubits.len();
                let shape_ok =
                    |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|r| r.len() == dim);
                if !shape_ok(re) || im.as_ref().is_some_and(|m| !shape_ok(m)) {
                    return Err(Error::Parse(format!(
                        "custom-matrix on {} qubits needs {dim}x{dim} `re`/`im` arrays",
                        qubits.len()
                    )));
                }
                let m = CMatrix::from_fn(dim, dim, |i, j| {
                    Complex64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j]))
                });
                let raw = HermitianOperator::new(m)?;
                Ok((qubits.clone(), crate::hamiltonian::normalize_term(&raw)))
            }
        }
    }
}

/// Hamiltonian or linear path given by explicit term lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomInstance {
    pub n_qubits: usize,
    pub initial: Vec<TermSpec>,
    /// Target term list; a constant path when absent.
    #[serde(default, rename = "final")]
    pub target: Option<Vec<TermSpec>>,
}

fn build_hamiltonian(n_qubits: usize, terms: &[TermSpec]) -> Result<FrustrationFreeHamiltonian> {
    if terms.is_empty() {
        return Err(Error::InvalidParameter("term list is empty".into()));
    }
    let parts = terms
        .iter()
        .map(|t| t.build(n_qubits))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = terms.iter().map(TermSpec::weight).collect();
    FrustrationFreeHamiltonian::with_weights(n_qubits, parts, &weights)
}

impl CustomInstance {
    pub fn build(&self) -> Result<CheckedPath> {
        let initial = build_hamiltonian(self.n_qubits, &self.initial)?;
        let path = match &self.target {
            Some(terms) => {
                InterpolationPath::linear(initial, build_hamiltonian(self.n_qubits, terms)?)?
            }
            None => InterpolationPath::constant(initial),
        };
        let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
        Ok(CheckedPath { path, report })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Family(InstanceSpec),
    Custom(CustomInstance),
}

impl InstanceSource {
    pub fn label(&self) -> &'static str {
        match self {
            InstanceSource::Family(spec) => spec.family(),
            InstanceSource::Custom(_) => "custom",
        }
    }

    pub fn build(&self) -> Result<CheckedPath> {
        match self {
            InstanceSource::Family(spec) => spec.build(),
            InstanceSource::Custom(custom) => custom.build(),
        }
    }

    /// Interpret an `[instance]` table; `base` resolves relative file names.
    pub fn from_table(table: toml::Table, base: &Path) -> Result<Self> {
        if let Some(file) = table.get("file") {
            if table.len() != 1 {
                return Err(Error::Parse(
                    "instance: `file` cannot be combined with other fields".into(),
                ));
            }
            let file = file
                .as_str()
                .ok_or_else(|| Error::Parse("instance.file must be a string".into()))?;
            return Self::from_file(&base.join(file));
        }
        let family = table
            .get("family")
            .and_then(toml::Value::as_str)
            .ok_or_else(|| Error::Parse("instance: missing `family` (or `file`)".into()))?
            .to_string();
        if family == "custom" {
            let mut table = table;
            table.remove("family");
            let custom: CustomInstance = toml::Value::Table(table)
                .try_into()
                .map_err(|e| Error::Parse(format!("instance: {e}")))?;
            return Ok(InstanceSource::Custom(custom));
        }
        let mut spec: InstanceSpec = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Parse(format!("instance: {e}")))?;
        if let InstanceSpec::SatProjector {
            dimacs: Some(path), ..
        } = &mut spec
        {
            *path = base.join(&*path);
        }
        Ok(InstanceSource::Family(spec))
    }

    /// A DIMACS `.cnf` file or a TOML file holding an instance table.
    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Parse(format!(
                "instance file {} not found",
                path.display()
            )));
        }
        if path.extension().is_some_and(|e| e == "cnf") {
            return Ok(InstanceSource::Family(InstanceSpec::SatProjector {
                n_vars: None,
                clauses: None,
                dimacs: Some(path.to_path_buf()),
                path: SatPath::default(),
            }));
        }
        let text = read(path)?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        // Accept either a bare instance table or one nested under `[instance]`.
        let table = match table.get("instance") {
            Some(toml::Value::Table(inner)) => inner.clone(),
            _ => table,
        };
        if table.contains_key("file") {
            return Err(Error::Parse(format!(
                "{}: nested instance files are not supported",
                path.display()
            )));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_table(table, base)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    instance: toml::Table,
    #[serde(default)]
    protocol: ProtocolConfig,
    #[serde(default)]
    outputs: OutputsConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSource,
    pub protocol: ProtocolConfig,
    pub outputs: OutputsConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            instance: InstanceSource::from_table(raw.instance, base)?,
            protocol: raw.protocol,
            outputs: raw.outputs,
        })
    }

    /// Load a config file. A file with no `[protocol]`/`[outputs]` section and no
    /// `[instance]` table is read as a bare instance description with default settings.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if path.extension().is_some_and(|e| e == "cnf") {
            return Ok(Self {
                instance: InstanceSource::from_file(path)?,
                protocol: ProtocolConfig::default(),
                outputs: OutputsConfig::default(),
            });
        }
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if !table.contains_key("instance") {
            return Ok(Self {
                instance: InstanceSource::from_table(table, base)?,
                protocol: ProtocolConfig::default(),
                outputs: OutputsConfig::default(),
            });
        }
        Self::parse(&text, base).map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}
