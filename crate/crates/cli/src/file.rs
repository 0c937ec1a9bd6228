//! Problem-file model: exact-rational Hamiltonians plus named states
//! and channels, parsed strictly by default and emitted canonically.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use asymcat::rational::{format_rational, parse_rational};
use asymcat::{validate_state, CMatrix, Channel, DensityMatrix, Hamiltonian};

/// Format version accepted and emitted by this build.
pub const FORMAT_VERSION: &str = "1";
/// Reserved name resolving to the file's top-level Hamiltonian.
pub const SYSTEM_HAMILTONIAN: &str = "system";
/// Validation tolerance applied to state matrices unless overridden.
pub const DEFAULT_STATE_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("problem file is not valid for this format: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported problem-file version {found:?}; this build reads version {expected:?}")]
    Version { found: String, expected: &'static str },
    #[error("no {kind} named {name:?} in the problem file")]
    Missing { kind: &'static str, name: String },
    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: asymcat::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, FileError>;

/// An exact rational carried as a `"p/q"` string in the file.
///
/// Plain JSON numbers are rejected so that binary floating point never
/// leaks into the energy lattice; irrational energies are out of scope
/// (the README notes the planned rational-basis extension).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rational(pub BigRational);

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match value {
            serde_json::Value::String(s) => parse_rational(&s)
                .map(Rational)
                .map_err(|e| D::Error::custom(format!("{e}"))),
            serde_json::Value::Number(n) => Err(D::Error::custom(format!(
                "found the number {n} where an exact rational string was expected; \
                 write it as \"p/q\", an integer, or a finite decimal \
                 (irrational values are unsupported)"
            ))),
            other => Err(D::Error::custom(format!(
                "expected a rational string like \"3/2\", found {other}"
            ))),
        }
    }
}

/// A complex matrix entry, serialized as a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEntry(pub Complex64);

impl Serialize for ComplexEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexEntry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(deserializer)?;
        if !re.is_finite() || !im.is_finite() {
            return Err(D::Error::custom("matrix entries must be finite numbers"));
        }
        Ok(ComplexEntry(Complex64::new(re, im)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    /// Square complex matrix, rows of `[re, im]` pairs.
    pub matrix: Vec<Vec<ComplexEntry>>,
    /// Name of the Hamiltonian the state lives on; defaults to the
    /// file's top-level `hamiltonian`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    /// Choi matrix of the channel, rows of `[re, im]` pairs.
    pub choi: Vec<Vec<ComplexEntry>>,
    /// Input Hamiltonian name; defaults to the top-level Hamiltonian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Output Hamiltonian name; defaults to the top-level Hamiltonian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity / trace / positivity slack when validating states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<f64>,
    /// Entry-magnitude threshold when reading off available coherences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<f64>,
    /// Violation threshold for covariance and Gibbs-preservation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<f64>,
    /// Feasibility threshold for the convertibility solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    /// Format version; this build reads and writes "1".
    pub version: String,
    /// Energies of the default system Hamiltonian, as rational strings.
    pub hamiltonian: Vec<Rational>,
    /// Additional named Hamiltonians referenced by states or channels.
    /// The name "system" is reserved for the top-level list.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hamiltonians: BTreeMap<String, Vec<Rational>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, StateEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub channels: BTreeMap<String, ChannelEntry>,
    /// Inverse temperature used when a command needs one and no flag
    /// overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Keeps only the keys this format defines, so files carrying extra
/// annotations can still be read under `--lenient`.
fn strip_unknown_fields(value: &mut serde_json::Value) {
    let Some(top) = value.as_object_mut() else {
        return;
    };
    const TOP: &[&str] = &[
        "version",
        "hamiltonian",
        "hamiltonians",
        "states",
        "channels",
        "beta",
        "tolerances",
    ];
    top.retain(|k, _| TOP.contains(&k.as_str()));
    if let Some(states) = top.get_mut("states").and_then(|v| v.as_object_mut()) {
        for entry in states.values_mut() {
            if let Some(obj) = entry.as_object_mut() {
                obj.retain(|k, _| ["matrix", "hamiltonian"].contains(&k.as_str()));
            }
        }
    }
    if let Some(channels) = top.get_mut("channels").and_then(|v| v.as_object_mut()) {
        for entry in channels.values_mut() {
            if let Some(obj) = entry.as_object_mut() {
                obj.retain(|k, _| ["choi", "input", "output"].contains(&k.as_str()));
            }
        }
    }
    if let Some(tols) = top.get_mut("tolerances").and_then(|v| v.as_object_mut()) {
        tols.retain(|k, _| ["state", "coherence", "channel", "feasibility"].contains(&k.as_str()));
    }
}

/// Parses a problem file. Strict mode rejects unknown fields; lenient
/// mode drops them before parsing.
pub fn parse_problem_file(text: &str, lenient: bool) -> Result<ProblemFile> {
    let file: ProblemFile = if lenient {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        strip_unknown_fields(&mut value);
        serde_json::from_value(value)?
    } else {
        serde_json::from_str(text)?
    };
    file.validate()?;
    Ok(file)
}

fn check_tol(name: &str, value: Option<f64>) -> Result<()> {
    if let Some(t) = value {
        if !(t > 0.0) || !t.is_finite() {
            return Err(FileError::Invalid(format!(
                "tolerances.{name} must be a positive finite number, got {t}"
            )));
        }
    }
    Ok(())
}

fn to_matrix(rows: &[Vec<ComplexEntry>], what: &str) -> Result<CMatrix> {
    let d = rows.len();
    if d == 0 {
        return Err(FileError::Invalid(format!("{what} matrix is empty")));
    }
    if rows.iter().any(|row| row.len() != d) {
        return Err(FileError::Invalid(format!(
            "{what} matrix must be square with {d} columns per row"
        )));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| rows[i][j].0))
}

impl ProblemFile {
    /// Structural checks beyond what the serde model enforces.
    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(FileError::Version {
                found: self.version.clone(),
                expected: FORMAT_VERSION,
            });
        }
        if self.hamiltonian.is_empty() {
            return Err(FileError::Invalid(
                "the top-level hamiltonian needs at least one energy".into(),
            ));
        }
        if self.hamiltonians.contains_key(SYSTEM_HAMILTONIAN) {
            return Err(FileError::Invalid(format!(
                "the hamiltonian name {SYSTEM_HAMILTONIAN:?} is reserved for the top-level list"
            )));
        }
        if let Some(list) = self
            .hamiltonians
            .iter()
            .find(|(_, energies)| energies.is_empty())
        {
            return Err(FileError::Invalid(format!(
                "hamiltonian {:?} needs at least one energy",
                list.0
            )));
        }
        if let Some(beta) = self.beta {
            if !(beta >= 0.0) || !beta.is_finite() {
                return Err(FileError::Invalid(format!(
                    "beta must be a finite nonnegative number, got {beta}"
                )));
            }
        }
        if let Some(t) = self.tolerances {
            check_tol("state", t.state)?;
            check_tol("coherence", t.coherence)?;
            check_tol("channel", t.channel)?;
            check_tol("feasibility", t.feasibility)?;
        }
        Ok(())
    }

    fn build_hamiltonian(&self, name: &str, energies: &[Rational]) -> Result<Hamiltonian> {
        Hamiltonian::new(energies.iter().map(|r| r.0.clone()).collect()).map_err(|source| {
            FileError::Engine {
                context: format!("hamiltonian {name:?}"),
                source,
            }
        })
    }

    /// Resolves a Hamiltonian by name; `None` and `"system"` both refer
    /// to the top-level list.
    pub fn hamiltonian_named(&self, name: Option<&str>) -> Result<Hamiltonian> {
        match name {
            None | Some(SYSTEM_HAMILTONIAN) => {
                self.build_hamiltonian(SYSTEM_HAMILTONIAN, &self.hamiltonian)
            }
            Some(other) => {
                let energies = self
                    .hamiltonians
                    .get(other)
                    .ok_or_else(|| FileError::Missing {
                        kind: "hamiltonian",
                        name: other.to_string(),
                    })?;
                self.build_hamiltonian(other, energies)
            }
        }
    }

    /// Tolerance for state validation after applying file overrides.
    pub fn state_tolerance(&self) -> f64 {
        self.tolerances
            .and_then(|t| t.state)
            .unwrap_or(DEFAULT_STATE_TOL)
    }

    /// Builds and validates the named state.
    pub fn state(&self, name: &str) -> Result<DensityMatrix> {
        let entry = self.states.get(name).ok_or_else(|| FileError::Missing {
            kind: "state",
            name: name.to_string(),
        })?;
        let matrix = to_matrix(&entry.matrix, &format!("state {name:?}"))?;
        let h = self.hamiltonian_named(entry.hamiltonian.as_deref())?;
        validate_state(&matrix, &h, self.state_tolerance()).map_err(|source| FileError::Engine {
            context: format!("state {name:?}"),
            source,
        })
    }

    /// Builds and validates the named channel from its Choi matrix.
    pub fn channel(&self, name: &str) -> Result<Channel> {
        let entry = self.channels.get(name).ok_or_else(|| FileError::Missing {
            kind: "channel",
            name: name.to_string(),
        })?;
        let choi = to_matrix(&entry.choi, &format!("channel {name:?}"))?;
        let h_in = self.hamiltonian_named(entry.input.as_deref())?;
        let h_out = self.hamiltonian_named(entry.output.as_deref())?;
        Channel::new(choi, h_in, h_out).map_err(|source| FileError::Engine {
            context: format!("channel {name:?}"),
            source,
        })
    }

    /// Canonical serialization: sorted maps, reduced rationals,
    /// shortest round-trip floats, trailing newline.
    pub fn emit(&self) -> String {
        let mut text = serde_json::to_string_pretty(self)
            .expect("problem files hold only finite numbers and string keys");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn minimal() -> ProblemFile {
        ProblemFile {
            version: FORMAT_VERSION.into(),
            hamiltonian: vec![
                Rational(BigRational::from_integer(0.into())),
                Rational(BigRational::one()),
            ],
            hamiltonians: BTreeMap::new(),
            states: BTreeMap::new(),
            channels: BTreeMap::new(),
            beta: None,
            tolerances: None,
        }
    }

    #[test]
    fn emitted_files_parse_back_to_the_same_model() {
        let mut file = minimal();
        file.states.insert(
            "plus".into(),
            StateEntry {
                matrix: vec![
                    vec![
                        ComplexEntry(Complex64::new(0.5, 0.0)),
                        ComplexEntry(Complex64::new(0.5, 0.0)),
                    ],
                    vec![
                        ComplexEntry(Complex64::new(0.5, 0.0)),
                        ComplexEntry(Complex64::new(0.5, 0.0)),
                    ],
                ],
                hamiltonian: None,
            },
        );
        file.beta = Some(0.3);
        let text = file.emit();
        let back = parse_problem_file(&text, false).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.emit(), text);
    }

    #[test]
    fn strict_mode_rejects_unknown_fields_and_lenient_drops_them() {
        let text = r#"{
            "version": "1",
            "hamiltonian": ["0", "1"],
            "comment": "scratch",
            "states": {
                "mixed": {
                    "matrix": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
                    "note": "extra"
                }
            }
        }"#;
        let err = parse_problem_file(text, false).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
        let file = parse_problem_file(text, true).unwrap();
        assert!(file.states.contains_key("mixed"));
        file.state("mixed").unwrap();
    }

    #[test]
    fn numeric_energies_are_rejected_with_guidance() {
        let text = r#"{"version": "1", "hamiltonian": [0, 1]}"#;
        let err = parse_problem_file(text, false).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("exact rational"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn zero_denominators_surface_as_parse_errors() {
        let text = r#"{"version": "1", "hamiltonian": ["1/0"]}"#;
        let err = parse_problem_file(text, false).unwrap_err();
        assert!(matches!(err, FileError::Json(_)), "{err}");
        assert!(err.to_string().contains("denominator"), "{err}");
    }

    #[test]
    fn states_reference_named_hamiltonians() {
        let mut file = minimal();
        file.hamiltonians.insert(
            "triple".into(),
            vec![
                Rational(BigRational::from_integer(0.into())),
                Rational(BigRational::one()),
                Rational(BigRational::from_integer(2.into())),
            ],
        );
        file.states.insert(
            "ground".into(),
            StateEntry {
                matrix: vec![
                    vec![
                        ComplexEntry(Complex64::new(1.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                    ],
                    vec![
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                    ],
                    vec![
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                    ],
                ],
                hamiltonian: Some("triple".into()),
            },
        );
        let state = file.state("ground").unwrap();
        assert_eq!(state.dimension(), 3);
        let missing = file.state("absent").unwrap_err();
        assert!(matches!(
            missing,
            FileError::Missing {
                kind: "state",
                ..
            }
        ));
    }

    #[test]
    fn version_and_beta_are_validated() {
        let mut wrong = minimal();
        wrong.version = "2".into();
        assert!(matches!(
            wrong.validate().unwrap_err(),
            FileError::Version { .. }
        ));
        let mut bad_beta = minimal();
        bad_beta.beta = Some(-1.0);
        assert!(bad_beta.validate().is_err());
    }

    #[test]
    fn non_square_matrices_are_rejected() {
        let mut file = minimal();
        file.states.insert(
            "ragged".into(),
            StateEntry {
                matrix: vec![
                    vec![ComplexEntry(Complex64::new(1.0, 0.0))],
                    vec![
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                        ComplexEntry(Complex64::new(0.0, 0.0)),
                    ],
                ],
                hamiltonian: None,
            },
        );
        assert!(matches!(
            file.state("ragged").unwrap_err(),
            FileError::Invalid(_)
        ));
    }
}
