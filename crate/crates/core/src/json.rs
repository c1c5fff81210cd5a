//! JSON schemas for models, experiments, weights, and derivation reports.
//!
//! Every rational crosses the boundary as a decimal-free `"p/q"` (or `"p"`)
//! string, so float formatting can never corrupt exact inputs. A model mixes
//! exact and float amplitudes never: the first offending entry is rejected
//! with its JSON pointer. Serialization is deterministic: struct fields keep
//! declaration order and maps are sorted, so identical inputs give
//! byte-identical output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::model::{
    ExperimentalModel, ModelError, MultipleChannelExperiment, PayoffMap, RealizationReport,
    WeightVector,
};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::solver::DerivationReport;
use crate::state::{Isometry, IsometryKind, Observable, StateVector};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SchemaError {
    #[error("malformed input at {pointer}: {message}")]
    At { pointer: String, message: String },
    #[error("malformed input: {0}")]
    Json(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn at(pointer: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::At {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn parse_rat_at(s: &str, pointer: &str) -> Result<Rat, SchemaError> {
    parse_rat(s).map_err(|e| at(pointer, e))
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum AmplitudeSchema {
    Exact { mag2: String, phase_turns: String },
    Float { re: f64, im: f64 },
}

impl AmplitudeSchema {
    fn to_amplitude(&self, pointer: &str) -> Result<Amplitude, SchemaError> {
        match self {
            AmplitudeSchema::Exact { mag2, phase_turns } => {
                let m = parse_rat_at(mag2, &format!("{pointer}/mag2"))?;
                let p = parse_rat_at(phase_turns, &format!("{pointer}/phase_turns"))?;
                Amplitude::exact(m, p).map_err(|e| at(pointer, e.to_string()))
            }
            AmplitudeSchema::Float { re, im } => {
                Amplitude::float(*re, *im).map_err(|e| at(pointer, e.to_string()))
            }
        }
    }

    fn from_amplitude(a: &Amplitude) -> Self {
        match a {
            Amplitude::Exact { mag2, phase } => AmplitudeSchema::Exact {
                mag2: format_rat(mag2),
                phase_turns: format_rat(phase),
            },
            Amplitude::Float { re, im } => AmplitudeSchema::Float { re: *re, im: *im },
        }
    }
}

fn amplitudes_to_coeffs(
    amplitudes: &[AmplitudeSchema],
    pointer: &str,
) -> Result<Vec<Amplitude>, SchemaError> {
    let exact = matches!(
        amplitudes.first(),
        Some(AmplitudeSchema::Exact { .. }) | None
    );
    let mut coeffs = Vec::with_capacity(amplitudes.len());
    for (k, schema) in amplitudes.iter().enumerate() {
        let entry_pointer = format!("{pointer}/{k}");
        if matches!(schema, AmplitudeSchema::Exact { .. }) != exact {
            return Err(at(
                entry_pointer,
                "exact and float amplitudes cannot be mixed in one model",
            ));
        }
        coeffs.push(schema.to_amplitude(&entry_pointer)?);
    }
    Ok(coeffs)
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PayoffEntrySchema {
    pub lambda: String,
    pub outcome: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ModelSchema {
    pub dim: usize,
    #[serde(default = "default_basis_tag", skip_serializing_if = "is_default_tag")]
    pub basis_tag: String,
    pub amplitudes: Vec<AmplitudeSchema>,
    pub eigenvalues: Vec<String>,
    pub payoff: Vec<PayoffEntrySchema>,
}

fn default_basis_tag() -> String {
    "phi".into()
}

fn is_default_tag(tag: &String) -> bool {
    tag == "phi"
}

impl ModelSchema {
    pub fn to_model(&self) -> Result<ExperimentalModel, SchemaError> {
        if self.amplitudes.len() != self.dim {
            return Err(at(
                "/amplitudes",
                format!("{} amplitudes for dim {}", self.amplitudes.len(), self.dim),
            ));
        }
        if self.eigenvalues.len() != self.dim {
            return Err(at(
                "/eigenvalues",
                format!("{} eigenvalues for dim {}", self.eigenvalues.len(), self.dim),
            ));
        }
        let coeffs = amplitudes_to_coeffs(&self.amplitudes, "/amplitudes")?;
        let psi = StateVector::new(self.basis_tag.clone(), coeffs)
            .map_err(|e| at("/amplitudes", e.to_string()))?;
        let eigenvalues = self
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, s)| parse_rat_at(s, &format!("/eigenvalues/{k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let observable =
            Observable::new(eigenvalues).map_err(|e| at("/eigenvalues", e.to_string()))?;
        let mut pairs = Vec::with_capacity(self.payoff.len());
        for (k, entry) in self.payoff.iter().enumerate() {
            let l = parse_rat_at(&entry.lambda, &format!("/payoff/{k}/lambda"))?;
            let u = parse_rat_at(&entry.outcome, &format!("/payoff/{k}/outcome"))?;
            pairs.push((l, u));
        }
        let payoff = PayoffMap::from_pairs(pairs).map_err(|e| at("/payoff", e.to_string()))?;
        Ok(ExperimentalModel::new(psi, observable, payoff)?)
    }

    pub fn from_model(g: &ExperimentalModel) -> Self {
        ModelSchema {
            dim: g.dim(),
            basis_tag: g.psi().basis_tag().to_string(),
            amplitudes: g
                .psi()
                .coeffs()
                .iter()
                .map(AmplitudeSchema::from_amplitude)
                .collect(),
            eigenvalues: g
                .observable()
                .eigenvalues()
                .iter()
                .map(format_rat)
                .collect(),
            payoff: g
                .payoff()
                .entries()
                .iter()
                .map(|(l, u)| PayoffEntrySchema {
                    lambda: format_rat(l),
                    outcome: format_rat(u),
                })
                .collect(),
        }
    }
}

pub fn parse_model_str(text: &str) -> Result<ExperimentalModel, SchemaError> {
    let schema: ModelSchema =
        serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    schema.to_model()
}

pub fn model_to_string(g: &ExperimentalModel) -> String {
    serde_json::to_string_pretty(&ModelSchema::from_model(g)).expect("schema serializes")
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageSchema {
    Permutation { pi: Vec<usize> },
    Phase { turns: Vec<String> },
    Refinement { z: Vec<u64> },
}

impl StageSchema {
    fn to_isometry(&self, pointer: &str) -> Result<Isometry, SchemaError> {
        match self {
            StageSchema::Permutation { pi } => {
                Isometry::permutation(pi.clone()).map_err(|e| at(pointer, e.to_string()))
            }
            StageSchema::Phase { turns } => {
                let parsed = turns
                    .iter()
                    .enumerate()
                    .map(|(k, s)| parse_rat_at(s, &format!("{pointer}/turns/{k}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Isometry::phase_rotation(parsed).map_err(|e| at(pointer, e.to_string()))
            }
            StageSchema::Refinement { z } => {
                Isometry::refinement(z.clone()).map_err(|e| at(pointer, e.to_string()))
            }
        }
    }

    fn from_isometry(u: &Isometry) -> Self {
        match u.kind() {
            IsometryKind::Permutation(pi) => StageSchema::Permutation { pi: pi.clone() },
            IsometryKind::PhaseRotation(turns) => StageSchema::Phase {
                turns: turns.iter().map(format_rat).collect(),
            },
            IsometryKind::Refinement(z) => StageSchema::Refinement { z: z.clone() },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExperimentSchema {
    pub d: usize,
    #[serde(default = "default_basis_tag", skip_serializing_if = "is_default_tag")]
    pub basis_tag: String,
    pub channel_states: Vec<Vec<AmplitudeSchema>>,
    pub channel_outcomes: Vec<String>,
    pub superposition_coeffs: Vec<AmplitudeSchema>,
    #[serde(default)]
    pub stages: Vec<StageSchema>,
}

impl ExperimentSchema {
    pub fn to_experiment(&self) -> Result<MultipleChannelExperiment, SchemaError> {
        if self.channel_states.len() != self.d {
            return Err(at(
                "/channel_states",
                format!("{} channel states for d = {}", self.channel_states.len(), self.d),
            ));
        }
        let mut states = Vec::with_capacity(self.d);
        for (k, amps) in self.channel_states.iter().enumerate() {
            let pointer = format!("/channel_states/{k}");
            let coeffs = amplitudes_to_coeffs(amps, &pointer)?;
            states.push(
                StateVector::new(self.basis_tag.clone(), coeffs)
                    .map_err(|e| at(pointer, e.to_string()))?,
            );
        }
        let outcomes = self
            .channel_outcomes
            .iter()
            .enumerate()
            .map(|(k, s)| parse_rat_at(s, &format!("/channel_outcomes/{k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let coeffs = amplitudes_to_coeffs(&self.superposition_coeffs, "/superposition_coeffs")?;
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(k, s)| s.to_isometry(&format!("/stages/{k}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MultipleChannelExperiment::new(
            states, outcomes, coeffs, stages,
        )?)
    }

    pub fn from_experiment(m: &MultipleChannelExperiment) -> Self {
        ExperimentSchema {
            d: m.channel_count(),
            basis_tag: m
                .channels_at(0)
                .expect("region 0 always exists")[0]
                .basis_tag()
                .to_string(),
            channel_states: m
                .channels_at(0)
                .expect("region 0 always exists")
                .iter()
                .map(|s| s.coeffs().iter().map(AmplitudeSchema::from_amplitude).collect())
                .collect(),
            channel_outcomes: m.channel_outcomes().iter().map(format_rat).collect(),
            superposition_coeffs: m
                .superposition_coeffs()
                .iter()
                .map(AmplitudeSchema::from_amplitude)
                .collect(),
            stages: m.stages().iter().map(StageSchema::from_isometry).collect(),
        }
    }
}

pub fn parse_experiment_str(text: &str) -> Result<MultipleChannelExperiment, SchemaError> {
    let schema: ExperimentSchema =
        serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    schema.to_experiment()
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum WeightEntrySchema {
    Exact(String),
    Float(f64),
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct WeightsSchema {
    pub weights: Vec<WeightEntrySchema>,
}

impl WeightsSchema {
    pub fn to_weights(&self) -> Result<WeightVector, SchemaError> {
        let all_exact = self
            .weights
            .iter()
            .all(|w| matches!(w, WeightEntrySchema::Exact(_)));
        if all_exact {
            let parsed = self
                .weights
                .iter()
                .enumerate()
                .map(|(k, w)| match w {
                    WeightEntrySchema::Exact(s) => parse_rat_at(s, &format!("/weights/{k}")),
                    WeightEntrySchema::Float(_) => unreachable!(),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(WeightVector::exact(parsed)?)
        } else if self
            .weights
            .iter()
            .all(|w| matches!(w, WeightEntrySchema::Float(_)))
        {
            let parsed = self
                .weights
                .iter()
                .map(|w| match w {
                    WeightEntrySchema::Float(x) => *x,
                    WeightEntrySchema::Exact(_) => unreachable!(),
                })
                .collect();
            Ok(WeightVector::float(parsed)?)
        } else {
            Err(at("/weights", "exact and float weights cannot be mixed"))
        }
    }

    pub fn from_weights(w: &WeightVector) -> Self {
        WeightsSchema {
            weights: w.iter().map(weight_entry).collect(),
        }
    }
}

fn weight_entry(v: &Value) -> WeightEntrySchema {
    match v {
        Value::Exact(r) => WeightEntrySchema::Exact(format_rat(r)),
        Value::Float(x) => WeightEntrySchema::Float(*x),
    }
}

pub fn parse_weights_str(text: &str) -> Result<WeightVector, SchemaError> {
    let schema: WeightsSchema =
        serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    schema.to_weights()
}

/// Serialized derivation report. Field order is part of the contract.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ReportSchema {
    pub method: String,
    pub weights: Option<Vec<WeightEntrySchema>>,
    pub outcome_probs: Option<BTreeMap<String, String>>,
    pub unique: bool,
    pub gauge_dim: usize,
    pub constraints_used: u64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub gauge_note: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub refined_dim: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<u32>,
    /// Tolerance the caller ran with, echoed for provenance.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
}

impl ReportSchema {
    pub fn from_report(report: &DerivationReport, tol: Option<f64>) -> Self {
        ReportSchema {
            method: report.method.to_string(),
            weights: report
                .weights
                .as_ref()
                .map(|w| w.iter().map(weight_entry).collect()),
            outcome_probs: report.outcome_probs.as_ref().map(|probs| {
                probs
                    .iter()
                    .map(|(u, p)| (format_rat(u), format_rat(p)))
                    .collect()
            }),
            unique: report.unique,
            gauge_dim: report.gauge_dim,
            constraints_used: report.constraints_used,
            gauge_note: report.gauge_note.clone(),
            refined_dim: report.refined_dim,
            iterations: report.iterations,
            tol,
        }
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Serialized realization witness report.
#[derive(Serialize, Clone, Debug, PartialEq)]
pub struct RealizationSchema {
    pub region: usize,
    pub realized: bool,
    pub failing_clause: Option<String>,
    pub detail: String,
}

impl RealizationSchema {
    pub fn from_report(report: &RealizationReport) -> Self {
        RealizationSchema {
            region: report.region,
            realized: report.realized,
            failing_clause: report.failing_clause.map(|c| c.to_string()),
            detail: report.detail.clone(),
        }
    }
}
