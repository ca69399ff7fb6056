//! Scenario files and the commands run on them.
//!
//! A scenario is one JSON document:
//!
//! ```json
//! {
//!   "schema": "spectral-topos/scenario/v1",
//!   "dimension": 2,
//!   "observables": [{ "name": "Z", "matrix": [[1, 0], [0, -1]] },
//!                   { "name": "P", "ray": [1, [0, 1]] }],
//!   "hamiltonian": "Z",
//!   "state": { "ray": [1, 0] },
//!   "propositions": [{ "name": "up", "observable": "Z", "window": [0.5, 1.5] }],
//!   "context_seeds": [["Z"], ["P"]],
//!   "times": [0, 1.5],
//!   "seed": 7
//! }
//! ```
//!
//! Matrix and vector entries are either reals or `[re, im]` pairs. A `ray`
//! observable is the projection onto the normalized vector; a `ray` state is
//! the corresponding pure state. Each context seed is a group of commuting
//! observables whose joint spectral projections form one context.

mod commands;
pub mod fixtures;

use std::collections::HashSet;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::context::{close_family, context_from_operators, Context, ContextFamily};
use crate::error::Error;
use crate::matrix::{spectral_decompose, ComplexMatrix, DensityState, HermitianOperator, Projection};

pub use commands::{run, CheckKind, Command, CommandOutput, OutputFile, RunOptions, RunReport, Status};

pub const SCHEMA: &str = "spectral-topos/scenario/v1";

/// Slack on both ends of a proposition window.
pub const WINDOW_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{path}: unknown observable `{name}`")]
    UnknownObservable { path: String, name: String },
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("scenario has no hamiltonian")]
    MissingHamiltonian,
    #[error("scenario has no state")]
    MissingState,
    #[error(transparent)]
    Math(#[from] Error),
}

fn field(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Field { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(x) => Complex64::new(x, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    #[serde(default)]
    matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    ray: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObservable {
    name: String,
    #[serde(default)]
    matrix: Option<Vec<Vec<Entry>>>,
    #[serde(default)]
    ray: Option<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProposition {
    name: String,
    observable: String,
    window: [f64; 2],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub context: usize,
    pub block: usize,
    pub delta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: String,
    dimension: usize,
    #[serde(default)]
    observables: Vec<RawObservable>,
    #[serde(default)]
    hamiltonian: Option<String>,
    #[serde(default)]
    state: Option<RawOperator>,
    #[serde(default)]
    propositions: Vec<RawProposition>,
    #[serde(default)]
    context_seeds: Vec<Vec<String>>,
    #[serde(default)]
    times: Vec<f64>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    perturb_section: Vec<Perturbation>,
}

#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub operator: HermitianOperator,
}

/// "The value of `observable` lies in `window`".
#[derive(Debug, Clone)]
pub struct Proposition {
    pub name: String,
    pub observable: String,
    pub window: [f64; 2],
    pub projection: Projection,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub dimension: usize,
    pub observables: Vec<Observable>,
    pub hamiltonian: Option<Observable>,
    pub state: Option<DensityState>,
    pub propositions: Vec<Proposition>,
    pub seeds: Vec<Context>,
    pub times: Vec<f64>,
    pub seed: u64,
    /// Deliberate edits applied to the state section by the axioms check.
    pub perturb_section: Vec<Perturbation>,
}

/// Spectral projection of `a` for eigenvalues in `[lo − slack, hi + slack]`;
/// the zero projection when the window misses the spectrum.
pub fn window_projection(a: &HermitianOperator, window: [f64; 2]) -> Projection {
    let [lo, hi] = window;
    let parts: Vec<Projection> = spectral_decompose(a)
        .into_iter()
        .filter(|(lambda, _)| *lambda >= lo - WINDOW_SLACK && *lambda <= hi + WINDOW_SLACK)
        .map(|(_, p)| p)
        .collect();
    Projection::sum_orthogonal(a.dim(), parts.iter())
}

fn matrix_literal(path: &str, dim: usize, rows: Vec<Vec<Entry>>) -> Result<ComplexMatrix, ScenarioError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(field(path, format!("expected a {dim}×{dim} matrix")));
    }
    ComplexMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(Complex64::from).collect()).collect())
        .map_err(|e| field(path, e))
}

fn ray_literal(path: &str, dim: usize, entries: Vec<Entry>) -> Result<Vec<Complex64>, ScenarioError> {
    if entries.len() != dim {
        return Err(field(path, format!("expected {dim} entries, found {}", entries.len())));
    }
    let v: Vec<Complex64> = entries.into_iter().map(Complex64::from).collect();
    if v.iter().any(|z| !z.is_finite()) || v.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(field(path, "ray must be a finite nonzero vector"));
    }
    Ok(v)
}

enum OperatorLiteral {
    Matrix(ComplexMatrix),
    Ray(Vec<Complex64>),
}

fn operator_literal(
    path: &str,
    dim: usize,
    matrix: Option<Vec<Vec<Entry>>>,
    ray: Option<Vec<Entry>>,
) -> Result<OperatorLiteral, ScenarioError> {
    match (matrix, ray) {
        (Some(m), None) => Ok(OperatorLiteral::Matrix(matrix_literal(&format!("{path}.matrix"), dim, m)?)),
        (None, Some(r)) => Ok(OperatorLiteral::Ray(ray_literal(&format!("{path}.ray"), dim, r)?)),
        _ => Err(field(path, "exactly one of `matrix` or `ray` is required")),
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawScenario) -> Result<Self, ScenarioError> {
        if raw.schema != SCHEMA {
            return Err(field("schema", format!("expected `{SCHEMA}`, found `{}`", raw.schema)));
        }
        let dim = raw.dimension;
        if !(1..=32).contains(&dim) {
            return Err(field("dimension", "must be between 1 and 32"));
        }

        let mut observables = Vec::with_capacity(raw.observables.len());
        let mut names = HashSet::new();
        for (i, o) in raw.observables.into_iter().enumerate() {
            let path = format!("observables[{i}]");
            if !names.insert(o.name.clone()) {
                return Err(field(format!("{path}.name"), format!("duplicate observable `{}`", o.name)));
            }
            let operator = match operator_literal(&path, dim, o.matrix, o.ray)? {
                OperatorLiteral::Matrix(m) => HermitianOperator::new(m).map_err(|e| field(format!("{path}.matrix"), e))?,
                OperatorLiteral::Ray(v) => {
                    Projection::onto_vector(&v).map_err(|e| field(format!("{path}.ray"), e))?.into()
                }
            };
            observables.push(Observable { name: o.name, operator });
        }
        let lookup = |path: String, name: &str| -> Result<Observable, ScenarioError> {
            observables
                .iter()
                .find(|o| o.name == name)
                .cloned()
                .ok_or(ScenarioError::UnknownObservable { path, name: name.to_string() })
        };

        let hamiltonian = raw.hamiltonian.as_deref().map(|h| lookup("hamiltonian".into(), h)).transpose()?;

        let state = match raw.state {
            None => None,
            Some(s) => Some(match operator_literal("state", dim, s.matrix, s.ray)? {
                OperatorLiteral::Matrix(m) => DensityState::new(m).map_err(|e| field("state.matrix", e))?,
                OperatorLiteral::Ray(v) => DensityState::pure(&v).map_err(|e| field("state.ray", e))?,
            }),
        };

        let mut propositions = Vec::with_capacity(raw.propositions.len());
        let mut prop_names = HashSet::new();
        for (i, p) in raw.propositions.into_iter().enumerate() {
            let path = format!("propositions[{i}]");
            if !prop_names.insert(p.name.clone()) {
                return Err(field(format!("{path}.name"), format!("duplicate proposition `{}`", p.name)));
            }
            let [lo, hi] = p.window;
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(field(format!("{path}.window"), "window must be finite with a ≤ b"));
            }
            let obs = lookup(format!("{path}.observable"), &p.observable)?;
            let projection = window_projection(&obs.operator, p.window);
            propositions.push(Proposition { name: p.name, observable: p.observable, window: p.window, projection });
        }

        if raw.context_seeds.is_empty() {
            return Err(field("context_seeds", "at least one seed group is required"));
        }
        let mut seeds = Vec::with_capacity(raw.context_seeds.len());
        for (i, group) in raw.context_seeds.iter().enumerate() {
            let path = format!("context_seeds[{i}]");
            if group.is_empty() {
                return Err(field(path, "seed group is empty"));
            }
            let ops = group
                .iter()
                .enumerate()
                .map(|(j, name)| lookup(format!("{path}[{j}]"), name).map(|o| o.operator))
                .collect::<Result<Vec<_>, _>>()?;
            seeds.push(context_from_operators(&ops).map_err(|e| field(path, e))?);
        }

        if let Some(i) = raw.times.iter().position(|t| !t.is_finite()) {
            return Err(field(format!("times[{i}]"), "time must be finite"));
        }
        if let Some(i) = raw.perturb_section.iter().position(|p| !p.delta.is_finite()) {
            return Err(field(format!("perturb_section[{i}].delta"), "delta must be finite"));
        }

        Ok(Self {
            dimension: dim,
            observables,
            hamiltonian,
            state,
            propositions,
            seeds,
            times: raw.times,
            seed: raw.seed.unwrap_or(0),
            perturb_section: raw.perturb_section,
        })
    }

    pub fn family(&self) -> Result<ContextFamily, ScenarioError> {
        close_family(&self.seeds).map_err(|e| field("context_seeds", e))
    }

    pub fn proposition(&self, name: &str) -> Result<&Proposition, ScenarioError> {
        self.propositions
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ScenarioError::UnknownProposition(name.to_string()))
    }

    /// The named proposition, or all of them.
    pub fn select_propositions(&self, name: Option<&str>) -> Result<Vec<&Proposition>, ScenarioError> {
        match name {
            Some(n) => Ok(vec![self.proposition(n)?]),
            None if self.propositions.is_empty() => Err(field("propositions", "no propositions defined")),
            None => Ok(self.propositions.iter().collect()),
        }
    }
}
