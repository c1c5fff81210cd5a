//! Experimental models, multiple-channel experiments, the realization
//! relation between them, and the two expectation evaluators.
//!
//! A model is the schematic description an expectation rule consumes: initial
//! state, diagonal observable, and payoff map from eigenvalues to macroscopic
//! outcomes. An experiment is the operational object: d channels, each
//! deterministic in isolation, recombined and evolved through staged
//! norm-preserving maps. `realizes` decides whether an experiment is
//! faithfully described by a model at a given region, reporting the first
//! violated clause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::error::CoreError;
use crate::rational::Rat;
use crate::state::{apply_isometry, inner_product, Isometry, Observable, StateVector};
use crate::value::Value;

const FLOAT_TOL: f64 = 1e-12;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("state has zero norm")]
    ZeroState,
    #[error("payoff outcome for eigenvalue {0} is zero")]
    ZeroOutcome(String),
    #[error("payoff map does not cover eigenvalue {0}")]
    PayoffDomain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("region {region} not reached (experiment has {stages} stages)")]
    RegionOutOfRange { region: usize, stages: usize },
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
}

/// Finite map from eigenvalues to nonzero outcome numerals.
#[derive(Clone, Debug, PartialEq)]
pub struct PayoffMap {
    entries: BTreeMap<Rat, Rat>,
}

impl PayoffMap {
    pub fn new(entries: BTreeMap<Rat, Rat>) -> Result<Self, ModelError> {
        for (lambda, outcome) in &entries {
            if outcome.is_zero() {
                return Err(ModelError::ZeroOutcome(lambda.to_string()));
            }
        }
        Ok(PayoffMap { entries })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Rat, Rat)>) -> Result<Self, ModelError> {
        Self::new(pairs.into_iter().collect())
    }

    /// Ω(x) = a·x restricted to the given eigenvalues (a ≠ 0).
    pub fn linear(a: &Rat, eigenvalues: &[Rat]) -> Result<Self, ModelError> {
        Self::from_pairs(
            eigenvalues
                .iter()
                .map(|l| (l.clone(), a * l))
                .collect::<Vec<_>>(),
        )
    }

    pub fn get(&self, lambda: &Rat) -> Option<&Rat> {
        self.entries.get(lambda)
    }

    pub fn entries(&self) -> &BTreeMap<Rat, Rat> {
        &self.entries
    }

    /// The outcome set U (range of the map).
    pub fn outcomes(&self) -> BTreeSet<Rat> {
        self.entries.values().cloned().collect()
    }

    pub fn negate(&self) -> PayoffMap {
        PayoffMap {
            entries: self
                .entries
                .iter()
                .map(|(l, u)| (l.clone(), -u))
                .collect(),
        }
    }

    /// The slope a when the map is the restriction of x ↦ a·x, else None.
    pub fn linear_slope(&self) -> Option<Rat> {
        let mut slope: Option<Rat> = None;
        for (lambda, outcome) in &self.entries {
            if lambda.is_zero() {
                return None; // would force the zero outcome
            }
            let a = outcome / lambda;
            match &slope {
                None => slope = Some(a),
                Some(s) if *s == a => {}
                Some(_) => return None,
            }
        }
        slope
    }
}

/// The triple ⟨ψ, X̂, Ω⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentalModel {
    psi: StateVector,
    observable: Observable,
    payoff: PayoffMap,
}

impl ExperimentalModel {
    pub fn new(
        psi: StateVector,
        observable: Observable,
        payoff: PayoffMap,
    ) -> Result<Self, ModelError> {
        if psi.dim() != observable.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: psi.dim(),
                got: observable.dim(),
            });
        }
        for lambda in observable.eigenvalues() {
            if payoff.get(lambda).is_none() {
                return Err(ModelError::PayoffDomain(lambda.to_string()));
            }
        }
        let model = ExperimentalModel {
            psi,
            observable,
            payoff,
        };
        if model.norm2().is_zero() {
            return Err(ModelError::ZeroState);
        }
        Ok(model)
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn payoff(&self) -> &PayoffMap {
        &self.payoff
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn is_exact(&self) -> bool {
        self.psi.is_exact()
    }

    pub fn norm2(&self) -> Value {
        self.psi.norm2()
    }

    /// Payoff of channel k, i.e. Ω(λ_k).
    pub fn channel_payoff(&self, k: usize) -> Result<&Rat, ModelError> {
        let lambda = self.observable.eigenvalue(k).map_err(ModelError::Core)?;
        self.payoff
            .get(lambda)
            .ok_or_else(|| ModelError::PayoffDomain(lambda.to_string()))
    }

    /// Squared magnitudes |c_k|² of the state coefficients.
    pub fn mag2s(&self) -> Vec<Value> {
        self.psi.coeffs().iter().map(Amplitude::mag2).collect()
    }

    /// Same model with the state multiplied by a nonzero amplitude.
    pub fn scale_state(&self, a: &Amplitude) -> Result<Self, ModelError> {
        if a.is_zero() {
            return Err(ModelError::ZeroState);
        }
        ExperimentalModel::new(self.psi.scale(a), self.observable.clone(), self.payoff.clone())
    }

    pub fn with_state(&self, psi: StateVector) -> Result<Self, ModelError> {
        ExperimentalModel::new(psi, self.observable.clone(), self.payoff.clone())
    }

    /// Born weights |c_k|² / Σ_j |c_j|².
    pub fn born_weights(&self) -> WeightVector {
        let norm = self.norm2();
        let weights = self
            .mag2s()
            .iter()
            .map(|m| m.div(&norm))
            .collect::<Vec<_>>();
        WeightVector { weights }
    }
}

/// ⟨ψ, Ω(X̂)ψ⟩ / ⟨ψ, ψ⟩ = Σ_k |c_k|² Ω(λ_k) / Σ_j |c_j|²; exact in exact mode.
pub fn born_value(g: &ExperimentalModel) -> Result<Value, ModelError> {
    let norm = g.norm2();
    if norm.is_zero() {
        return Err(ModelError::ZeroState);
    }
    let mut acc = Value::zero();
    for (k, m) in g.mag2s().iter().enumerate() {
        let payoff = Value::Exact(g.channel_payoff(k)?.clone());
        acc = acc.add(&m.mul(&payoff));
    }
    Ok(acc.div(&norm))
}

/// Channel weights w_k with Σ w_k = 1, each in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    weights: Vec<Value>,
}

impl WeightVector {
    pub fn exact(weights: Vec<Rat>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::InvalidWeights("empty weight vector".into()));
        }
        let one = Rat::from_integer(1.into());
        for w in &weights {
            if w < &Rat::zero() || w > &one {
                return Err(ModelError::InvalidWeights(format!("{w} outside [0, 1]")));
            }
        }
        let total: Rat = weights.iter().sum();
        if total != one {
            return Err(ModelError::InvalidWeights(format!("sum is {total}, not 1")));
        }
        Ok(WeightVector {
            weights: weights.into_iter().map(Value::Exact).collect(),
        })
    }

    pub fn float(weights: Vec<f64>) -> Result<Self, ModelError> {
        if weights.is_empty() {
            return Err(ModelError::InvalidWeights("empty weight vector".into()));
        }
        for w in &weights {
            if !w.is_finite() || *w < -1e-12 || *w > 1.0 + 1e-12 {
                return Err(ModelError::InvalidWeights(format!("{w} outside [0, 1]")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(ModelError::InvalidWeights(format!("sum is {total}, not 1")));
        }
        Ok(WeightVector {
            weights: weights.into_iter().map(Value::Float).collect(),
        })
    }

    /// Builds from scalar values, validating range and unit sum (exactly for
    /// exact values, within 1e-9 otherwise).
    pub fn from_values(values: Vec<Value>) -> Result<Self, ModelError> {
        if values.iter().all(Value::is_exact) {
            Self::exact(
                values
                    .into_iter()
                    .map(|v| v.as_exact().cloned().expect("checked exact"))
                    .collect(),
            )
        } else {
            Self::float(values.into_iter().map(|v| v.to_f64()).collect())
        }
    }

    /// All mass on channel k.
    pub fn point_mass(dim: usize, k: usize) -> Result<Self, ModelError> {
        if k >= dim {
            return Err(ModelError::InvalidWeights(format!(
                "channel {k} out of range for dimension {dim}"
            )));
        }
        let mut weights = vec![Rat::zero(); dim];
        weights[k] = Rat::from_integer(1.into());
        Self::exact(weights)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn get(&self, k: usize) -> &Value {
        &self.weights[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.weights.iter()
    }

    pub fn as_exact(&self) -> Option<Vec<Rat>> {
        self.weights
            .iter()
            .map(|w| w.as_exact().cloned())
            .collect()
    }

    pub fn max_abs_diff(&self, rhs: &WeightVector) -> f64 {
        self.weights
            .iter()
            .zip(rhs.weights.iter())
            .map(|(a, b)| a.abs_diff_f64(b))
            .fold(0.0, f64::max)
    }
}

/// V = Σ_k w_k Ω(λ_k).
pub fn weight_value(g: &ExperimentalModel, w: &WeightVector) -> Result<Value, ModelError> {
    if w.dim() != g.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: g.dim(),
            got: w.dim(),
        });
    }
    let mut acc = Value::zero();
    for (k, wk) in w.iter().enumerate() {
        acc = acc.add(&wk.mul(&Value::Exact(g.channel_payoff(k)?.clone())));
    }
    Ok(acc)
}

/// Groups weights by payoff value: p_j = Σ_{k : Ω(λ_k) = u_j} w_k.
pub fn outcome_probs(
    g: &ExperimentalModel,
    w: &WeightVector,
) -> Result<BTreeMap<Rat, Value>, ModelError> {
    if w.dim() != g.dim() {
        return Err(ModelError::DimensionMismatch {
            expected: g.dim(),
            got: w.dim(),
        });
    }
    let mut probs: BTreeMap<Rat, Value> = BTreeMap::new();
    for (k, wk) in w.iter().enumerate() {
        let outcome = g.channel_payoff(k)?.clone();
        probs
            .entry(outcome)
            .and_modify(|p| *p = p.add(wk))
            .or_insert_with(|| wk.clone());
    }
    Ok(probs)
}

/// Checks Σ_k f(P̂_k) = 1 with f(P̂) = ⟨ψ, P̂ψ⟩/⟨ψ, ψ⟩ for each supplied
/// resolution of the identity, given as a partition of the basis indices.
pub fn check_frame_additivity(
    g: &ExperimentalModel,
    resolutions: &[Vec<Vec<usize>>],
) -> Result<bool, ModelError> {
    let dim = g.dim();
    let norm = g.norm2();
    let mag2s = g.mag2s();
    for partition in resolutions {
        let mut seen = vec![false; dim];
        for block in partition {
            if block.is_empty() {
                return Err(ModelError::InvalidPartition("empty block".into()));
            }
            for &k in block {
                if k >= dim {
                    return Err(ModelError::InvalidPartition(format!(
                        "index {k} out of range for dimension {dim}"
                    )));
                }
                if seen[k] {
                    return Err(ModelError::InvalidPartition(format!(
                        "index {k} appears in two blocks"
                    )));
                }
                seen[k] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            let missing: Vec<usize> =
                (0..dim).filter(|&k| !seen[k]).collect();
            return Err(ModelError::InvalidPartition(format!(
                "indices {missing:?} not covered"
            )));
        }
        let mut total = Value::zero();
        for block in partition {
            let mut f = Value::zero();
            for &k in block {
                f = f.add(&mag2s[k]);
            }
            total = total.add(&f.div(&norm));
        }
        let one = Value::Exact(Rat::from_integer(1.into()));
        if !total.approx_eq(&one, FLOAT_TOL) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Clause of the realization relation that a check can fail on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// (i) the model state is the superposition of the evolved channel states.
    SuperpositionState,
    /// (ii) each evolved channel state is an eigenvector of the observable.
    Eigenstates,
    /// (iii) the payoff of each channel eigenvalue is the channel's outcome.
    Outcomes,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::SuperpositionState => write!(f, "(i)"),
            Clause::Eigenstates => write!(f, "(ii)"),
            Clause::Outcomes => write!(f, "(iii)"),
        }
    }
}

/// Witness report of a realization check.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationReport {
    pub realized: bool,
    pub region: usize,
    pub failing_clause: Option<Clause>,
    pub detail: String,
}

impl RealizationReport {
    fn pass(region: usize) -> Self {
        RealizationReport {
            realized: true,
            region,
            failing_clause: None,
            detail: "all clauses hold".into(),
        }
    }

    fn fail(region: usize, clause: Clause, detail: String) -> Self {
        RealizationReport {
            realized: false,
            region,
            failing_clause: Some(clause),
            detail,
        }
    }
}

impl fmt::Display for RealizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.realized {
            write!(f, "realized at region r{}", self.region + 1)
        } else {
            write!(
                f,
                "not realized at region r{}: clause {} fails: {}",
                self.region + 1,
                self.failing_clause.expect("failing report carries a clause"),
                self.detail
            )
        }
    }
}

/// A d-channel experiment: per-channel deterministic states and outcomes at
/// the first region, superposition coefficients of the full experiment, and
/// staged evolutions to later regions.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipleChannelExperiment {
    channel_states: Vec<StateVector>,
    channel_outcomes: Vec<Rat>,
    superposition_coeffs: Vec<Amplitude>,
    stages: Vec<Isometry>,
}

impl MultipleChannelExperiment {
    pub fn new(
        channel_states: Vec<StateVector>,
        channel_outcomes: Vec<Rat>,
        superposition_coeffs: Vec<Amplitude>,
        stages: Vec<Isometry>,
    ) -> Result<Self, ModelError> {
        let d = channel_states.len();
        if d == 0 {
            return Err(ModelError::InvalidExperiment("no channels".into()));
        }
        if channel_outcomes.len() != d || superposition_coeffs.len() != d {
            return Err(ModelError::DimensionMismatch {
                expected: d,
                got: channel_outcomes.len().min(superposition_coeffs.len()),
            });
        }
        for u in &channel_outcomes {
            if u.is_zero() {
                return Err(ModelError::ZeroOutcome("channel outcome".into()));
            }
        }
        // pairwise orthonormality of the channel states
        for i in 0..d {
            for j in 0..d {
                let ip = inner_product(&channel_states[i], &channel_states[j])
                    .map_err(ModelError::Core)?;
                let expected = if i == j {
                    Amplitude::one_exact()
                } else {
                    Amplitude::zero_exact()
                };
                if !ip.approx_eq(&expected, FLOAT_TOL) {
                    return Err(ModelError::InvalidExperiment(format!(
                        "channel states {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        // stage dimensions must chain from the channel dimension
        let mut dim = channel_states[0].dim();
        for (n, stage) in stages.iter().enumerate() {
            if stage.source_dim() != dim {
                return Err(ModelError::InvalidExperiment(format!(
                    "stage {n} expects dimension {}, previous region has {dim}",
                    stage.source_dim()
                )));
            }
            dim = stage.target_dim();
        }
        Ok(MultipleChannelExperiment {
            channel_states,
            channel_outcomes,
            superposition_coeffs,
            stages,
        })
    }

    /// Canonical experiment realizing `g` at the first region: channel k is
    /// prepared in the k-th basis vector with outcome Ω(λ_k).
    pub fn from_model(g: &ExperimentalModel) -> Result<Self, ModelError> {
        let d = g.dim();
        let tag = g.psi().basis_tag();
        let mut channel_states = Vec::with_capacity(d);
        let mut outcomes = Vec::with_capacity(d);
        for k in 0..d {
            channel_states.push(StateVector::unit(tag, d, k).map_err(ModelError::Core)?);
            outcomes.push(g.channel_payoff(k)?.clone());
        }
        MultipleChannelExperiment::new(
            channel_states,
            outcomes,
            g.psi().coeffs().to_vec(),
            Vec::new(),
        )
    }

    pub fn channel_count(&self) -> usize {
        self.channel_states.len()
    }

    /// Number of distinct outcomes D.
    pub fn outcome_count(&self) -> usize {
        self.channel_outcomes.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn channel_outcomes(&self) -> &[Rat] {
        &self.channel_outcomes
    }

    pub fn superposition_coeffs(&self) -> &[Amplitude] {
        &self.superposition_coeffs
    }

    pub fn stages(&self) -> &[Isometry] {
        &self.stages
    }

    /// Appends an evolution stage, validating the dimension chain.
    pub fn with_stage(&self, stage: Isometry) -> Result<Self, ModelError> {
        let mut stages = self.stages.clone();
        stages.push(stage);
        MultipleChannelExperiment::new(
            self.channel_states.clone(),
            self.channel_outcomes.clone(),
            self.superposition_coeffs.clone(),
            stages,
        )
    }

    /// Region count: region 0 is r1, each stage reaches one more region.
    pub fn region_count(&self) -> usize {
        self.stages.len() + 1
    }

    /// Channel states evolved to the given region (0-based).
    pub fn channels_at(&self, region: usize) -> Result<Vec<StateVector>, ModelError> {
        if region >= self.region_count() {
            return Err(ModelError::RegionOutOfRange {
                region,
                stages: self.stages.len(),
            });
        }
        let mut states = self.channel_states.clone();
        for stage in &self.stages[..region] {
            states = states
                .iter()
                .map(|s| apply_isometry(stage, s))
                .collect::<Result<_, _>>()
                .map_err(ModelError::Core)?;
        }
        Ok(states)
    }

    /// State of the full experiment at the given region: Σ c_k φ_k^(region).
    pub fn state_at(&self, region: usize) -> Result<StateVector, ModelError> {
        let channels = self.channels_at(region)?;
        StateVector::linear_combination(&self.superposition_coeffs, &channels)
            .map_err(ModelError::Core)
    }

    /// Does this experiment realize `g` at the given region?
    ///
    /// Checks, in order: (i) the model state equals the superposition of the
    /// evolved channel states, (ii) every evolved channel state is an
    /// eigenvector of the model observable, (iii) the payoff of each
    /// channel's eigenvalue is that channel's deterministic outcome. The
    /// report names the first clause that fails.
    pub fn realizes(
        &self,
        g: &ExperimentalModel,
        region: usize,
    ) -> Result<RealizationReport, ModelError> {
        let channels = self.channels_at(region)?;
        let dim = channels[0].dim();
        if g.dim() != dim {
            return Err(ModelError::DimensionMismatch {
                expected: dim,
                got: g.dim(),
            });
        }

        // (i) state comparison
        let combined = self.state_at(region)?;
        let state_matches = if g.psi().is_exact() && combined.is_exact() {
            g.psi() == &combined
        } else {
            g.psi().approx_eq(&combined, FLOAT_TOL)
        };
        if !state_matches {
            return Ok(RealizationReport::fail(
                region,
                Clause::SuperpositionState,
                "model state differs from the superposition of evolved channel states".into(),
            ));
        }

        // (ii) eigenvector check, extracting each channel's eigenvalue
        let mut channel_eigenvalues = Vec::with_capacity(channels.len());
        for (k, phi) in channels.iter().enumerate() {
            let mut lambda: Option<&Rat> = None;
            for (slot, c) in phi.coeffs().iter().enumerate() {
                if c.mag2().to_f64().abs() <= 1e-24 {
                    continue;
                }
                let ev = g.observable().eigenvalue(slot).map_err(ModelError::Core)?;
                match lambda {
                    None => lambda = Some(ev),
                    Some(l) if l == ev => {}
                    Some(l) => {
                        return Ok(RealizationReport::fail(
                            region,
                            Clause::Eigenstates,
                            format!(
                                "channel {k} mixes eigenvalues {l} and {ev}, so it is no eigenvector"
                            ),
                        ));
                    }
                }
            }
            match lambda {
                Some(l) => channel_eigenvalues.push(l.clone()),
                None => {
                    return Ok(RealizationReport::fail(
                        region,
                        Clause::Eigenstates,
                        format!("channel {k} has an all-zero evolved state"),
                    ));
                }
            }
        }

        // (iii) payoffs against deterministic outcomes
        for (k, lambda) in channel_eigenvalues.iter().enumerate() {
            let Some(payoff) = g.payoff().get(lambda) else {
                return Ok(RealizationReport::fail(
                    region,
                    Clause::Outcomes,
                    format!("payoff undefined for channel {k} eigenvalue {lambda}"),
                ));
            };
            if payoff != &self.channel_outcomes[k] {
                return Ok(RealizationReport::fail(
                    region,
                    Clause::Outcomes,
                    format!(
                        "payoff of eigenvalue {lambda} is {payoff} but channel {k} deterministically yields {}",
                        self.channel_outcomes[k]
                    ),
                ));
            }
        }

        Ok(RealizationReport::pass(region))
    }
}
