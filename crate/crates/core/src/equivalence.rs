//! The five model transformations that generate consistency constraints.
//!
//! Each transformation maps a model to another model that is provably
//! realized by the same experiment, so any consistent expectation rule must
//! give both the same value. A [`ConstraintEdge`] packages source, target,
//! and the structural relation between their channel weights; the solvers
//! turn families of edges into linear constraints.
//!
//! The transformation families:
//! - `Relabel`: push an invertible function through the eigenvalues and pull
//!   its inverse through the payoff map — same state, same outcomes.
//! - `Coarsen`: merge rank-1 projectors into the spectral projectors of
//!   repeated eigenvalues. On the diagonal spectral data this engine stores,
//!   both descriptions are literally the same model, so the edge is the
//!   identity edge.
//! - `Phase`: rotate each channel's phase — the evolved experiment realizes
//!   the rotated model with the same observable and payoffs.
//! - `Permute`: permute the channels and conjugate the observable so each
//!   channel keeps its eigenvalue.
//! - `Refine`: split channel k into z_k equal-amplitude sub-channels on a
//!   fresh basis, repeating its eigenvalue across the block.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{ExperimentalModel, ModelError, MultipleChannelExperiment, WeightVector};
use crate::rational::{wrap_turns, Rat};
use crate::solver::linalg::{LinearEquation, LinearSystem};
use crate::state::{apply_isometry, Isometry, Observable};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TransformError {
    #[error("incompatible transformation: {0}")]
    IncompatibleTransformation(String),
    #[error("magnitudes are not all equal and nonzero")]
    NotEqualNorm,
    #[error("experiment does not witness the edge: {0}")]
    NotRealized(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Transformation {
    /// Invertible relabeling of the eigenvalue set; eigenvalues absent from
    /// the map stay fixed.
    Relabel(BTreeMap<Rat, Rat>),
    /// Merge rank-1 projectors into spectral projectors (identity on the
    /// stored diagonal data).
    Coarsen,
    /// Phase rotation by the given turns, one per channel.
    Phase(Vec<Rat>),
    /// Channel permutation: coefficient k moves to slot π(k).
    Permute(Vec<usize>),
    /// Refinement multiplicities, one per channel.
    Refine(Vec<u64>),
}

impl Transformation {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Transformation::Relabel(_) => "relabel",
            Transformation::Coarsen => "coarsen",
            Transformation::Phase(_) => "phase",
            Transformation::Permute(_) => "permute",
            Transformation::Refine(_) => "refine",
        }
    }

    /// The unitary stage the experiment must evolve through to witness the
    /// edge, when one is needed (relabel and coarsen re-describe the same
    /// region).
    pub fn isometry(&self) -> Option<Result<Isometry, TransformError>> {
        match self {
            Transformation::Phase(turns) => Some(
                Isometry::phase_rotation(turns.clone())
                    .map_err(|e| TransformError::IncompatibleTransformation(e.to_string())),
            ),
            Transformation::Permute(pi) => Some(
                Isometry::permutation(pi.clone())
                    .map_err(|e| TransformError::IncompatibleTransformation(e.to_string())),
            ),
            Transformation::Refine(z) => Some(
                Isometry::refinement(z.clone())
                    .map_err(|e| TransformError::IncompatibleTransformation(e.to_string())),
            ),
            _ => None,
        }
    }

    /// Inverse transformation, when the family is invertible (refinement is
    /// not, within these five families).
    pub fn inverse(&self, g_source: &ExperimentalModel) -> Option<Transformation> {
        match self {
            Transformation::Relabel(f) => {
                let mut inv = BTreeMap::new();
                for lambda in g_source.observable().eigenvalues() {
                    let image = f.get(lambda).unwrap_or(lambda);
                    inv.insert(image.clone(), lambda.clone());
                }
                Some(Transformation::Relabel(inv))
            }
            Transformation::Coarsen => Some(Transformation::Coarsen),
            Transformation::Phase(turns) => Some(Transformation::Phase(
                turns.iter().map(|t| wrap_turns(&-t)).collect(),
            )),
            Transformation::Permute(pi) => {
                let mut inv = vec![0; pi.len()];
                for (k, &image) in pi.iter().enumerate() {
                    inv[image] = k;
                }
                Some(Transformation::Permute(inv))
            }
            Transformation::Refine(_) => None,
        }
    }
}

/// Structural relation between source and target channel weights along an
/// edge.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightPushforward {
    Identity,
    /// Target weight at slot π(k) is the source weight at k.
    Permutation(Vec<usize>),
    /// Source channel k fans out into a block of z_k target slots; pulling
    /// back sums the block, pushing forward splits the weight equally.
    Split(Vec<u64>),
}

impl WeightPushforward {
    pub fn push(&self, w: &WeightVector) -> Result<WeightVector, ModelError> {
        match self {
            WeightPushforward::Identity => Ok(w.clone()),
            WeightPushforward::Permutation(pi) => {
                let mut out = vec![Value::zero(); w.dim()];
                for (k, wk) in w.iter().enumerate() {
                    out[pi[k]] = wk.clone();
                }
                WeightVector::from_values(out)
            }
            WeightPushforward::Split(z) => {
                let mut out = Vec::new();
                for (k, wk) in w.iter().enumerate() {
                    let share = wk.div(&Value::Exact(Rat::from_integer(BigInt::from(z[k]))));
                    for _ in 0..z[k] {
                        out.push(share.clone());
                    }
                }
                WeightVector::from_values(out)
            }
        }
    }

    pub fn pull(&self, w_target: &WeightVector) -> Result<WeightVector, ModelError> {
        match self {
            WeightPushforward::Identity => Ok(w_target.clone()),
            WeightPushforward::Permutation(pi) => {
                let values: Vec<Value> =
                    pi.iter().map(|&image| w_target.get(image).clone()).collect();
                WeightVector::from_values(values)
            }
            WeightPushforward::Split(z) => {
                let mut out = Vec::with_capacity(z.len());
                let mut offset = 0usize;
                for &m in z {
                    let mut acc = Value::zero();
                    for j in 0..m as usize {
                        acc = acc.add(w_target.get(offset + j));
                    }
                    out.push(acc);
                    offset += m as usize;
                }
                WeightVector::from_values(out)
            }
        }
    }
}

/// A consistency constraint: two models realized by the same experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintEdge {
    pub source: ExperimentalModel,
    pub target: ExperimentalModel,
    pub via: Transformation,
    pub pushforward: WeightPushforward,
}

impl ConstraintEdge {
    /// Extends an experiment that realizes the source at its last region into
    /// one witnessing the whole edge, returning it with the region at which
    /// the target is realized. Fails if either realization check fails.
    pub fn witness_experiment(
        &self,
        m: &MultipleChannelExperiment,
        region: usize,
    ) -> Result<(MultipleChannelExperiment, usize), TransformError> {
        let source_report = m.realizes(&self.source, region)?;
        if !source_report.realized {
            return Err(TransformError::NotRealized(source_report.to_string()));
        }
        let (witness, target_region) = match self.via.isometry() {
            None => (m.clone(), region),
            Some(iso) => {
                if region + 1 != m.region_count() {
                    return Err(TransformError::NotRealized(
                        "stage can only be appended after the last region".into(),
                    ));
                }
                (m.with_stage(iso?)?, region + 1)
            }
        };
        let target_report = witness.realizes(&self.target, target_region)?;
        if !target_report.realized {
            return Err(TransformError::NotRealized(target_report.to_string()));
        }
        Ok((witness, target_region))
    }
}

/// Applies a transformation to a model, producing the constraint edge.
pub fn transform(
    g: &ExperimentalModel,
    t: &Transformation,
) -> Result<ConstraintEdge, TransformError> {
    let target = match t {
        Transformation::Relabel(f) => relabel(g, f)?,
        Transformation::Coarsen => g.clone(),
        Transformation::Phase(_) => {
            let iso = t.isometry().expect("phase has an isometry")?;
            check_dim(g, iso.source_dim())?;
            let psi = apply_isometry(&iso, g.psi()).map_err(ModelError::Core)?;
            ExperimentalModel::new(psi, g.observable().clone(), g.payoff().clone())?
        }
        Transformation::Permute(pi) => {
            let iso = t.isometry().expect("permute has an isometry")?;
            check_dim(g, iso.source_dim())?;
            let psi = apply_isometry(&iso, g.psi()).map_err(ModelError::Core)?;
            // conjugate the observable: slot π(k) keeps eigenvalue λ_k
            let mut eigenvalues = vec![Rat::zero(); g.dim()];
            for (k, lambda) in g.observable().eigenvalues().iter().enumerate() {
                eigenvalues[pi[k]] = lambda.clone();
            }
            let observable = Observable::new(eigenvalues).map_err(ModelError::Core)?;
            ExperimentalModel::new(psi, observable, g.payoff().clone())?
        }
        Transformation::Refine(z) => {
            let iso = t.isometry().expect("refine has an isometry")?;
            check_dim(g, iso.source_dim())?;
            let psi = apply_isometry(&iso, g.psi()).map_err(ModelError::Core)?;
            let mut eigenvalues = Vec::with_capacity(iso.target_dim());
            for (k, lambda) in g.observable().eigenvalues().iter().enumerate() {
                for _ in 0..z[k] {
                    eigenvalues.push(lambda.clone());
                }
            }
            let observable = Observable::new(eigenvalues).map_err(ModelError::Core)?;
            ExperimentalModel::new(psi, observable, g.payoff().clone())?
        }
    };
    let pushforward = match t {
        Transformation::Permute(pi) => WeightPushforward::Permutation(pi.clone()),
        Transformation::Refine(z) => WeightPushforward::Split(z.clone()),
        _ => WeightPushforward::Identity,
    };
    Ok(ConstraintEdge {
        source: g.clone(),
        target,
        via: t.clone(),
        pushforward,
    })
}

fn check_dim(g: &ExperimentalModel, expected: usize) -> Result<(), TransformError> {
    if g.dim() != expected {
        return Err(TransformError::IncompatibleTransformation(format!(
            "transformation is sized for dimension {expected}, model has {}",
            g.dim()
        )));
    }
    Ok(())
}

fn relabel(
    g: &ExperimentalModel,
    f: &BTreeMap<Rat, Rat>,
) -> Result<ExperimentalModel, TransformError> {
    let mut image_of: BTreeMap<Rat, Rat> = BTreeMap::new();
    for lambda in g.observable().eigenvalues() {
        let image = f.get(lambda).unwrap_or(lambda).clone();
        image_of.insert(lambda.clone(), image);
    }
    // injectivity on the eigenvalue set
    let distinct_images: std::collections::BTreeSet<&Rat> = image_of.values().collect();
    if distinct_images.len() != image_of.len() {
        return Err(TransformError::IncompatibleTransformation(
            "relabeling function is not injective on the eigenvalue set".into(),
        ));
    }
    let eigenvalues: Vec<Rat> = g
        .observable()
        .eigenvalues()
        .iter()
        .map(|l| image_of[l].clone())
        .collect();
    // payoff ∘ f⁻¹: the image of λ pays what λ paid
    let payoff = crate::model::PayoffMap::from_pairs(
        image_of
            .iter()
            .map(|(lambda, image)| {
                let u = g
                    .payoff()
                    .get(lambda)
                    .expect("model payoff covers its spectrum")
                    .clone();
                (image.clone(), u)
            })
            .collect::<Vec<_>>(),
    )?;
    let observable = Observable::new(eigenvalues).map_err(ModelError::Core)?;
    Ok(ExperimentalModel::new(g.psi().clone(), observable, payoff)?)
}

/// Linear constraints forced by channel permutations on an equal-norm model:
/// for every pair (j, k) with Ω(λ_j) ≠ Ω(λ_k) the transposition edge forces
/// w_j = w_k, plus the normalization Σ w_k = 1.
pub fn equal_norm_permutation_constraints(
    g: &ExperimentalModel,
) -> Result<LinearSystem, TransformError> {
    require_equal_norms(g)?;
    let d = g.dim();
    let unknowns: Vec<String> = (0..d).map(|k| format!("w{k}")).collect();
    let mut equations = Vec::new();
    for j in 0..d {
        for k in (j + 1)..d {
            if g.channel_payoff(j)? != g.channel_payoff(k)? {
                let mut coeffs = vec![Rat::zero(); d];
                coeffs[j] = Rat::one();
                coeffs[k] = -Rat::one();
                equations.push(LinearEquation {
                    coeffs,
                    rhs: Rat::zero(),
                    label: format!("transposition ({j} {k})"),
                });
            }
        }
    }
    equations.push(LinearEquation {
        coeffs: vec![Rat::one(); d],
        rhs: Rat::one(),
        label: "normalization".into(),
    });
    Ok(LinearSystem {
        unknowns,
        equations,
    })
}

pub(crate) fn require_equal_norms(g: &ExperimentalModel) -> Result<(), TransformError> {
    let mag2s = g.mag2s();
    let first = &mag2s[0];
    if first.is_zero() {
        return Err(TransformError::NotEqualNorm);
    }
    for m in &mag2s[1..] {
        if !match (first, m) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => a.to_f64() == b.to_f64(),
        } {
            return Err(TransformError::NotEqualNorm);
        }
    }
    Ok(())
}

/// Phase edge rotating each coefficient's phase to the given target turns;
/// magnitudes are untouched. Exact-mode models only.
pub fn phase_compensation(
    g: &ExperimentalModel,
    target_phases: &[Rat],
) -> Result<ConstraintEdge, TransformError> {
    if target_phases.len() != g.dim() {
        return Err(TransformError::IncompatibleTransformation(format!(
            "{} target phases for dimension {}",
            target_phases.len(),
            g.dim()
        )));
    }
    if !g.is_exact() {
        return Err(TransformError::IncompatibleTransformation(
            "phase compensation needs exact phases".into(),
        ));
    }
    let turns: Vec<Rat> = g
        .psi()
        .coeffs()
        .iter()
        .zip(target_phases.iter())
        .map(|(c, target)| match c {
            crate::amplitude::Amplitude::Exact { phase, .. } => wrap_turns(&(target - phase)),
            crate::amplitude::Amplitude::Float { .. } => unreachable!("exact mode checked"),
        })
        .collect();
    transform(g, &Transformation::Phase(turns))
}
