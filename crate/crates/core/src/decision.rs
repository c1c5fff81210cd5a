//! Decision-theoretic derivation path: the zero-sum rule and payoff
//! additivity replace the probability assumption.
//!
//! Read the payoff map as a game: Ω(λ) is the payout when channel λ fires,
//! and V(g) is the value an agent puts on playing g. Two game rules then
//! substitute for probabilities:
//! - zero-sum: V[ψ, X̂, Ω] = −V[ψ, X̂, −Ω] (the banker values the game as
//!   the negative of the gambler's value);
//! - additivity: V[ψ, X̂, Ω∘f_k] = V[ψ, X̂, Ω] + Ω(k) for the shift
//!   f_k(x) = x + k, available when the payoff map is additive.
//!
//! Additive payoff maps are represented as linear maps Ω(x) = a·x with
//! rational a ≠ 0: over the rationals additivity forces linearity, and it
//! makes Ω computable off the stored eigenvalue set. Combined with the
//! permutation/relabel/phase consistency chain, these rules pin the value of
//! every equal-magnitude two-channel game without ever mentioning weights.

use num_traits::Zero;
use thiserror::Error;

use crate::equivalence::{phase_compensation, transform, TransformError, Transformation};
use crate::model::{weight_value, ExperimentalModel, ModelError, PayoffMap, WeightVector};
use crate::rational::{rat, Rat};
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DecisionError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("payoff map is not additive: {0}")]
    NonAdditivePayoff(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// A game rule applied to a model, with the equation it induces.
#[derive(Clone, Debug, PartialEq)]
pub struct GameValueConstraint {
    pub kind: ConstraintKind,
    pub applied_to: ExperimentalModel,
    pub induced_equation: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintKind {
    ZeroSum,
    PayoffShift(Rat),
}

/// A derived game value together with the constraint chain that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionDerivation {
    pub value: Value,
    pub chain: Vec<String>,
    pub constraints: Vec<GameValueConstraint>,
}

fn require(cond: bool, msg: &str) -> Result<(), DecisionError> {
    if cond {
        Ok(())
    } else {
        Err(DecisionError::PreconditionViolated(msg.into()))
    }
}

fn equal_nonzero_magnitudes(g: &ExperimentalModel) -> bool {
    let mag2 = g.mag2s();
    !mag2[0].is_zero()
        && mag2[1..].iter().all(|m| match (&mag2[0], m) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => a.to_f64() == b.to_f64(),
        })
}

/// Consistency chain from g = ⟨ψ, X̂, Ω⟩ to ⟨ψ, X̂, Ω∘π⟩ for the spectrum
/// transposition π, available for equal magnitudes: permute the channels,
/// relabel the eigenvalues back, compensate the phases.
fn swap_payoff_model(
    g: &ExperimentalModel,
    chain: &mut Vec<String>,
) -> Result<ExperimentalModel, DecisionError> {
    let permuted = transform(g, &Transformation::Permute(vec![1, 0]))?;
    chain.push("permute channels (0 1): same experiment, conjugated observable".into());
    let l0 = g.observable().eigenvalues()[0].clone();
    let l1 = g.observable().eigenvalues()[1].clone();
    let relabeled = transform(
        &permuted.target,
        &Transformation::Relabel([(l1.clone(), l0.clone()), (l0, l1)].into_iter().collect()),
    )?;
    chain.push("relabel eigenvalues by the transposition: payoff becomes Omega∘pi".into());
    let phases: Vec<Rat> = g
        .psi()
        .coeffs()
        .iter()
        .map(|c| match c {
            crate::amplitude::Amplitude::Exact { phase, .. } => phase.clone(),
            crate::amplitude::Amplitude::Float { .. } => Rat::zero(),
        })
        .collect();
    let aligned = phase_compensation(&relabeled.target, &phases)?;
    chain.push("compensate phases: equal magnitudes restore the original state".into());
    let result = aligned.target;
    debug_assert_eq!(result.psi(), g.psi());
    debug_assert_eq!(result.observable(), g.observable());
    Ok(result)
}

/// Value of the symmetric two-channel spin game: equal magnitudes, opposite
/// eigenvalues, payoff numerically equal to the eigenvalue. The consistency
/// chain turns the game into its own negation, and the zero-sum rule forces
/// V = −V = 0.
pub fn derive_spin_value(g: &ExperimentalModel) -> Result<DecisionDerivation, DecisionError> {
    require(g.dim() == 2, "the spin game has two channels")?;
    require(g.is_exact(), "the spin game is derived in exact mode")?;
    require(
        equal_nonzero_magnitudes(g),
        "the two magnitudes must be equal and nonzero",
    )?;
    let l0 = &g.observable().eigenvalues()[0];
    let l1 = &g.observable().eigenvalues()[1];
    require(
        *l1 == -l0 && !l0.is_zero(),
        "the spectrum must be symmetric: lambda_1 = -lambda_0 != 0",
    )?;
    for (k, lambda) in [l0, l1].into_iter().enumerate() {
        let payoff = g.channel_payoff(k)?;
        require(
            payoff == lambda,
            "the payoff must equal the eigenvalue numerically",
        )?;
    }

    let mut chain = Vec::new();
    let swapped = swap_payoff_model(g, &mut chain)?;
    // with Ω = id on a symmetric spectrum, Ω∘π = −Ω
    debug_assert_eq!(swapped.payoff(), &g.payoff().negate());
    chain.push("consistency: V[psi, X, Omega] = V[psi, X, -Omega]".into());

    let zero_sum = GameValueConstraint {
        kind: ConstraintKind::ZeroSum,
        applied_to: g.clone(),
        induced_equation: "V[psi, X, Omega] = -V[psi, X, -Omega]".into(),
    };
    chain.push("zero-sum rule: V = -V, hence V = 0".into());

    Ok(DecisionDerivation {
        value: Value::Exact(Rat::zero()),
        chain,
        constraints: vec![zero_sum],
    })
}

/// Value of a general equal-magnitude two-channel game with an additive
/// payoff map: ½[Ω(λ_0) + Ω(λ_1)].
///
/// The consistency chain gives V[Ω] = V[Ω∘π]; writing π = (−I)∘f_k with
/// k = −λ_0−λ_1, additivity peels off the shift, the zero-sum rule absorbs
/// the negation, and the two equations solve to the average payoff.
pub fn derive_equal_norm_d2(g: &ExperimentalModel) -> Result<DecisionDerivation, DecisionError> {
    require(g.dim() == 2, "the game has two channels")?;
    require(g.is_exact(), "the game is derived in exact mode")?;
    require(
        equal_nonzero_magnitudes(g),
        "the two magnitudes must be equal and nonzero",
    )?;
    let l0 = g.observable().eigenvalues()[0].clone();
    let l1 = g.observable().eigenvalues()[1].clone();
    require(l0 != l1, "the eigenvalues must be distinct")?;
    let slope = g.payoff().linear_slope().ok_or_else(|| {
        DecisionError::NonAdditivePayoff(
            "payoff map is not the restriction of an additive (linear) map".into(),
        )
    })?;

    let mut chain = Vec::new();
    let swapped = swap_payoff_model(g, &mut chain)?;
    debug_assert_eq!(
        swapped.payoff().get(&l0),
        g.payoff().get(&l1),
        "payoff after the chain is Omega∘pi"
    );

    // π = (−I)∘f_k on the spectrum, with k = −λ0−λ1
    let shift = -(&l0 + &l1);
    chain.push(format!(
        "decompose the transposition: Omega∘pi = Omega∘(-I)∘f_k with k = {shift}"
    ));
    let additivity = GameValueConstraint {
        kind: ConstraintKind::PayoffShift(shift.clone()),
        applied_to: g.clone(),
        induced_equation: "V[psi, X, (Omega∘-I)∘f_k] = V[psi, X, Omega∘-I] + (Omega∘-I)(k)".into(),
    };
    // Ω additive ⇒ Ω∘−I = −Ω and (Ω∘−I)(k) = Ω(λ0) + Ω(λ1)
    let payoff_sum = &slope * (&l0 + &l1);
    chain.push(format!(
        "additivity: V[Omega∘pi] = V[-Omega] + {payoff_sum}"
    ));
    let zero_sum = GameValueConstraint {
        kind: ConstraintKind::ZeroSum,
        applied_to: g.clone(),
        induced_equation: "V[psi, X, -Omega] = -V[psi, X, Omega]".into(),
    };
    chain.push("zero-sum rule: V = -V + Omega(lambda_0) + Omega(lambda_1)".into());

    let value = payoff_sum / rat(2, 1);
    chain.push(format!("solve: V = {value}"));

    Ok(DecisionDerivation {
        value: Value::Exact(value),
        chain,
        constraints: vec![additivity, zero_sum],
    })
}

/// Witness of a zero-sum violation.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumWitness {
    pub model_index: usize,
    pub value: Value,
    pub negated_value: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSumCheck {
    pub holds: bool,
    pub witness: Option<ZeroSumWitness>,
}

/// Checks V[g] = −V[g with −Ω] for a weight rule across the given models,
/// where V is the rule's weighted payoff sum. Reports the first violating
/// model.
pub fn check_zero_sum(
    rule: impl Fn(&ExperimentalModel) -> WeightVector,
    models: &[ExperimentalModel],
) -> Result<ZeroSumCheck, DecisionError> {
    for (index, g) in models.iter().enumerate() {
        let value = weight_value(g, &rule(g))?;
        let negated = ExperimentalModel::new(
            g.psi().clone(),
            g.observable().clone(),
            g.payoff().negate(),
        )?;
        let negated_value = weight_value(&negated, &rule(&negated))?;
        if !value.approx_eq(&negated_value.neg(), 1e-12) {
            return Ok(ZeroSumCheck {
                holds: false,
                witness: Some(ZeroSumWitness {
                    model_index: index,
                    value,
                    negated_value,
                }),
            });
        }
    }
    Ok(ZeroSumCheck {
        holds: true,
        witness: None,
    })
}

/// Shifted payoff map Ω∘f_k for a linear payoff, used to exercise the
/// additivity rule: (Ω∘f_k)(λ) = Ω(λ + k).
pub fn shifted_payoff(g: &ExperimentalModel, k: &Rat) -> Result<PayoffMap, DecisionError> {
    let slope = g.payoff().linear_slope().ok_or_else(|| {
        DecisionError::NonAdditivePayoff("shift needs an additive payoff map".into())
    })?;
    let entries: Vec<(Rat, Rat)> = g
        .observable()
        .eigenvalues()
        .iter()
        .map(|l| (l.clone(), &slope * (l + k)))
        .collect();
    Ok(PayoffMap::from_pairs(entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::model::{born_value, outcome_probs, PayoffMap};
    use crate::rational::rat_int;
    use crate::solver::solve_equal_norm;
    use crate::state::{Observable, StateVector};

    fn equal_pair(phase1: Rat) -> StateVector {
        StateVector::new(
            "phi",
            vec![
                Amplitude::exact(rat(1, 2), Rat::zero()).unwrap(),
                Amplitude::exact(rat(1, 2), phase1).unwrap(),
            ],
        )
        .unwrap()
    }

    fn spin_game() -> ExperimentalModel {
        let obs = Observable::new(vec![rat(1, 2), rat(-1, 2)]).unwrap();
        let payoff =
            PayoffMap::from_pairs([(rat(1, 2), rat(1, 2)), (rat(-1, 2), rat(-1, 2))]).unwrap();
        ExperimentalModel::new(equal_pair(rat(1, 8)), obs, payoff).unwrap()
    }

    #[test]
    fn spin_game_value_is_exactly_zero() {
        let d = derive_spin_value(&spin_game()).unwrap();
        assert_eq!(d.value, Value::Exact(Rat::zero()));
        assert!(!d.chain.is_empty());
        assert_eq!(d.constraints.len(), 1);
    }

    #[test]
    fn spin_game_rejects_unequal_magnitudes() {
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::from_mag2(rat(1, 3)).unwrap(),
                Amplitude::from_mag2(rat(2, 3)).unwrap(),
            ],
        )
        .unwrap();
        let g = spin_game().with_state(psi).unwrap();
        assert!(matches!(
            derive_spin_value(&g),
            Err(DecisionError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn spin_game_with_unit_eigenvalues() {
        let obs = Observable::new(vec![rat_int(1), rat_int(-1)]).unwrap();
        let payoff =
            PayoffMap::from_pairs([(rat_int(1), rat_int(1)), (rat_int(-1), rat_int(-1))]).unwrap();
        let g = ExperimentalModel::new(equal_pair(Rat::zero()), obs, payoff).unwrap();
        assert_eq!(
            derive_spin_value(&g).unwrap().value,
            Value::Exact(Rat::zero())
        );
    }

    #[test]
    fn asymmetric_spectrum_rejected() {
        let obs = Observable::new(vec![rat_int(1), rat_int(-2)]).unwrap();
        let payoff =
            PayoffMap::from_pairs([(rat_int(1), rat_int(1)), (rat_int(-2), rat_int(-2))]).unwrap();
        let g = ExperimentalModel::new(equal_pair(Rat::zero()), obs, payoff).unwrap();
        assert!(matches!(
            derive_spin_value(&g),
            Err(DecisionError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn equal_norm_d2_averages_the_payoffs() {
        // λ = (1, 3), Ω = id ⇒ ½(1 + 3) = 2
        let obs = Observable::new(vec![rat_int(1), rat_int(3)]).unwrap();
        let payoff = PayoffMap::linear(&rat_int(1), obs.eigenvalues()).unwrap();
        let g = ExperimentalModel::new(equal_pair(rat(1, 4)), obs, payoff).unwrap();
        let d = derive_equal_norm_d2(&g).unwrap();
        assert_eq!(d.value, Value::Exact(rat_int(2)));
        assert_eq!(d.constraints.len(), 2);
    }

    #[test]
    fn equal_norm_d2_agrees_with_spin_case() {
        // λ = (1/2, −1/2), Ω = id ⇒ 0
        let obs = Observable::new(vec![rat(1, 2), rat(-1, 2)]).unwrap();
        let payoff = PayoffMap::linear(&rat_int(1), obs.eigenvalues()).unwrap();
        let g = ExperimentalModel::new(equal_pair(Rat::zero()), obs, payoff).unwrap();
        assert_eq!(
            derive_equal_norm_d2(&g).unwrap().value,
            Value::Exact(Rat::zero())
        );
    }

    #[test]
    fn equal_norm_d2_with_doubled_payoff() {
        // Ω(x) = 2x, λ = (1, 3) ⇒ ½(2 + 6) = 4
        let obs = Observable::new(vec![rat_int(1), rat_int(3)]).unwrap();
        let payoff = PayoffMap::linear(&rat_int(2), obs.eigenvalues()).unwrap();
        let g = ExperimentalModel::new(equal_pair(rat(3, 8)), obs, payoff).unwrap();
        assert_eq!(
            derive_equal_norm_d2(&g).unwrap().value,
            Value::Exact(rat_int(4))
        );
    }

    #[test]
    fn equal_norm_d2_matches_the_solver() {
        let obs = Observable::new(vec![rat_int(2), rat_int(5)]).unwrap();
        let payoff = PayoffMap::linear(&rat(3, 7), obs.eigenvalues()).unwrap();
        let g = ExperimentalModel::new(equal_pair(rat(2, 5)), obs, payoff).unwrap();
        let decision = derive_equal_norm_d2(&g).unwrap();
        let report = solve_equal_norm(&g).unwrap();
        let solver_value = weight_value(&g, report.weights.as_ref().unwrap()).unwrap();
        assert_eq!(decision.value, solver_value);
    }

    #[test]
    fn non_additive_payoff_rejected() {
        let obs = Observable::new(vec![rat_int(1), rat_int(3)]).unwrap();
        let payoff =
            PayoffMap::from_pairs([(rat_int(1), rat_int(1)), (rat_int(3), rat_int(4))]).unwrap();
        let g = ExperimentalModel::new(equal_pair(Rat::zero()), obs, payoff).unwrap();
        assert!(matches!(
            derive_equal_norm_d2(&g),
            Err(DecisionError::NonAdditivePayoff(_))
        ));
    }

    #[test]
    fn born_rule_satisfies_zero_sum() {
        let models: Vec<ExperimentalModel> = vec![spin_game(), {
            let obs = Observable::new(vec![rat_int(1), rat_int(2), rat_int(3)]).unwrap();
            let payoff = PayoffMap::from_pairs([
                (rat_int(1), rat_int(7)),
                (rat_int(2), rat(-1, 3)),
                (rat_int(3), rat_int(7)),
            ])
            .unwrap();
            let psi = StateVector::new(
                "phi",
                vec![
                    Amplitude::from_mag2(rat(1, 6)).unwrap(),
                    Amplitude::from_mag2(rat(1, 2)).unwrap(),
                    Amplitude::from_mag2(rat(1, 3)).unwrap(),
                ],
            )
            .unwrap();
            ExperimentalModel::new(psi, obs, payoff).unwrap()
        }];
        let check = check_zero_sum(|g| g.born_weights(), &models).unwrap();
        assert!(check.holds);
    }

    #[test]
    fn fixed_point_mass_satisfies_zero_sum() {
        let check = check_zero_sum(
            |g| WeightVector::point_mass(g.dim(), 0).unwrap(),
            &[spin_game()],
        )
        .unwrap();
        assert!(check.holds);
    }

    #[test]
    fn payoff_favoring_rule_violates_zero_sum() {
        // all weight on the channel with the largest payoff
        let greedy = |g: &ExperimentalModel| {
            let best = (0..g.dim())
                .max_by(|&a, &b| {
                    g.channel_payoff(a)
                        .unwrap()
                        .cmp(g.channel_payoff(b).unwrap())
                })
                .unwrap();
            WeightVector::point_mass(g.dim(), best).unwrap()
        };
        let check = check_zero_sum(greedy, &[spin_game()]).unwrap();
        assert!(!check.holds);
        let w = check.witness.unwrap();
        assert_eq!(w.model_index, 0);
    }

    #[test]
    fn spin_value_is_antisymmetric_under_payoff_negation() {
        let g = spin_game();
        let v = derive_spin_value(&g).unwrap().value;
        assert_eq!(v.neg(), v); // V = −V forces 0
    }

    #[test]
    fn born_value_is_additive_under_payoff_shifts() {
        let obs = Observable::new(vec![rat_int(1), rat_int(3)]).unwrap();
        let payoff = PayoffMap::linear(&rat_int(2), obs.eigenvalues()).unwrap();
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::from_mag2(rat(1, 5)).unwrap(),
                Amplitude::from_mag2(rat(4, 5)).unwrap(),
            ],
        )
        .unwrap();
        let g = ExperimentalModel::new(psi, obs, payoff).unwrap();
        let k = rat(5, 2);
        let shifted = ExperimentalModel::new(
            g.psi().clone(),
            g.observable().clone(),
            shifted_payoff(&g, &k).unwrap(),
        )
        .unwrap();
        let lhs = born_value(&shifted).unwrap();
        let omega_k = Value::Exact(rat_int(2) * &k);
        let rhs = born_value(&g).unwrap().add(&omega_k);
        assert_eq!(lhs, rhs);
        // grouping stays coherent under the shift as well
        let w = g.born_weights();
        assert_eq!(
            outcome_probs(&g, &w).unwrap().len(),
            outcome_probs(&shifted, &w).unwrap().len()
        );
    }
}
