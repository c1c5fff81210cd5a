//! Weight solvers: assemble the consistency constraints and solve for the
//! channel weights.
//!
//! Three derivation routes, in increasing generality:
//! - `solve_equal_norm`: all |c_k|² equal — channel permutations force every
//!   weight to 1/d.
//! - `solve_rational`: all |c_k|² positive rationals — a refinement stage
//!   splits channel k into z_k equal sub-channels (z ∝ |c_k|² with cleared
//!   denominators), the equal-norm solution on the refined experiment pulls
//!   back to the squared-magnitude weights.
//! - `solve_continuity`: arbitrary magnitudes — rational approximants
//!   (decimal truncations of |c_k|²) are solved exactly and iterated until
//!   successive weight vectors agree in max norm.
//!
//! When several channels share a payoff value only the per-outcome
//! probabilities are observable; the per-channel weights then carry a gauge
//! freedom of dimension d − D (channels minus distinct payoffs), reported in
//! every derivation. `lp_weights` is the falsification harness for the l^p
//! variants of the rule, which is exact only at p = 2.

pub mod linalg;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::equivalence::{
    equal_norm_permutation_constraints, require_equal_norms, transform, TransformError,
    Transformation,
};
use crate::model::{ExperimentalModel, ModelError, WeightVector};
use crate::rational::{rat_from_f64, truncate_decimal, Rat};
use crate::value::Value;

pub use linalg::{uniqueness_analysis, LinearEquation, LinearSystem, RankReport};

/// Refined dimensions above this are rejected by [`solve_rational`]; callers
/// are expected to move to [`solve_continuity`].
pub const REFINEMENT_GUARD: u64 = 1_000_000;

/// Maximum number of decimal-truncation iterates in the continuity limit.
pub const MAX_CONTINUITY_ITERATES: u32 = 18;

/// Cross-check the analytic equal-norm solution against the eliminated
/// constraint system only up to this dimension.
const SYSTEM_CROSS_CHECK_LIMIT: usize = 64;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SolverError {
    #[error("magnitudes are not all equal and nonzero")]
    NotEqualNorm,
    #[error("channel {channel} has zero amplitude")]
    ZeroAmplitude { channel: usize },
    #[error("model is not in exact rational mode")]
    NotRational,
    #[error("state has zero norm")]
    ZeroState,
    #[error("no convergence within {iterates} iterates (last step {last_diff:e})")]
    NoConvergence { iterates: u32, last_diff: f64 },
    #[error("refined dimension {s} exceeds the guard {limit}; use the continuity solver")]
    RefinementTooLarge { s: u64, limit: u64 },
    #[error("l^p weights need p >= 1, got {p}")]
    InvalidP { p: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("constraint system admits no solution")]
    Inconsistent,
    #[error("malformed linear system: {0}")]
    MalformedSystem(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Derivation route that produced a report.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    EqualNorm,
    Rational,
    Continuity,
    Lp(f64),
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::EqualNorm => write!(f, "EqualNorm"),
            Method::Rational => write!(f, "Rational"),
            Method::Continuity => write!(f, "Continuity"),
            Method::Lp(p) => write!(f, "Lp({p})"),
        }
    }
}

/// Outcome of a derivation.
///
/// `weights` always carries the canonical solution (the squared-magnitude
/// weights); `unique` is true only when the constraints pin every individual
/// channel weight, i.e. when no payoff value repeats. With repeated payoffs
/// the outcome probabilities stay unique while the weights float inside
/// payoff groups; `gauge_dim` and `gauge_note` describe that freedom.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationReport {
    pub method: Method,
    pub weights: Option<WeightVector>,
    pub outcome_probs: Option<BTreeMap<Rat, Rat>>,
    pub unique: bool,
    pub gauge_dim: usize,
    pub gauge_note: String,
    pub constraints_used: u64,
    /// Dimension of the refinement construction, when one was used and fits u64.
    pub refined_dim: Option<u64>,
    /// Decimal digits of the final continuity iterate.
    pub iterations: Option<u32>,
}

/// The linear system tying channel weights to outcome probabilities:
/// one group-sum equation per distinct payoff value. Its solution space is
/// the weight gauge.
pub fn weight_gauge_system(
    g: &ExperimentalModel,
    probs: &BTreeMap<Rat, Rat>,
) -> Result<LinearSystem, SolverError> {
    let d = g.dim();
    let unknowns: Vec<String> = (0..d).map(|k| format!("w{k}")).collect();
    let mut equations = Vec::new();
    for (outcome, prob) in probs {
        let mut coeffs = vec![Rat::zero(); d];
        for k in 0..d {
            if g.channel_payoff(k)? == outcome {
                coeffs[k] = Rat::one();
            }
        }
        equations.push(LinearEquation {
            coeffs,
            rhs: prob.clone(),
            label: format!("group sum for outcome {outcome}"),
        });
    }
    Ok(LinearSystem {
        unknowns,
        equations,
    })
}

/// Channel indices grouped by payoff value.
fn payoff_groups(g: &ExperimentalModel) -> Result<BTreeMap<Rat, Vec<usize>>, SolverError> {
    let mut groups: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
    for k in 0..g.dim() {
        groups
            .entry(g.channel_payoff(k)?.clone())
            .or_default()
            .push(k);
    }
    Ok(groups)
}

fn gauge_note(gauge_dim: usize, groups: &BTreeMap<Rat, Vec<usize>>) -> String {
    if gauge_dim == 0 {
        return String::new();
    }
    let repeated: Vec<String> = groups
        .iter()
        .filter(|(_, ks)| ks.len() > 1)
        .map(|(u, ks)| format!("outcome {u} over channels {ks:?}"))
        .collect();
    format!(
        "weights are fixed only up to group sums within equal-payoff groups ({}); gauge dimension {gauge_dim}",
        repeated.join(", ")
    )
}

/// Number of independent constraints pinning the equal-norm solution: the
/// rank of the transposition-plus-normalization system. With at least two
/// distinct payoffs a spanning set of d−1 transpositions plus the
/// normalization pins every weight (rank d); with a single payoff value only
/// the normalization constrains anything.
fn equal_norm_constraint_rank(d: &BigInt, distinct_payoffs: usize) -> u64 {
    if distinct_payoffs >= 2 {
        d.to_u64().unwrap_or(u64::MAX)
    } else {
        1
    }
}

/// Equal-norm derivation: every channel weight is 1/d.
pub fn solve_equal_norm(g: &ExperimentalModel) -> Result<DerivationReport, SolverError> {
    require_equal_norms(g).map_err(|_| SolverError::NotEqualNorm)?;
    let d = g.dim();
    let groups = payoff_groups(g)?;
    let distinct = groups.len();

    let uniform = Rat::new(BigInt::one(), BigInt::from(d));
    let weights = WeightVector::exact(vec![uniform.clone(); d])?;
    let probs: BTreeMap<Rat, Rat> = groups
        .iter()
        .map(|(u, ks)| (u.clone(), &uniform * Rat::from_integer(BigInt::from(ks.len()))))
        .collect();

    let constraints_used = equal_norm_constraint_rank(&BigInt::from(d), distinct);

    if d <= SYSTEM_CROSS_CHECK_LIMIT {
        // dual route: eliminate the transposition system and compare
        let sys = equal_norm_permutation_constraints(g)?;
        let report = uniqueness_analysis(&sys)?;
        debug_assert_eq!(report.rank as u64, constraints_used);
        if distinct >= 2 {
            debug_assert!(report.unique(), "transposition system should pin all weights");
            debug_assert_eq!(report.particular, vec![uniform.clone(); d]);
        }
    }

    let gauge_dim = d - distinct;
    Ok(DerivationReport {
        method: Method::EqualNorm,
        weights: Some(weights),
        outcome_probs: Some(probs),
        unique: gauge_dim == 0,
        gauge_dim,
        gauge_note: gauge_note(gauge_dim, &groups),
        constraints_used,
        refined_dim: None,
        iterations: None,
    })
}

/// Exact squared magnitudes of an exact-mode model.
fn exact_mag2s(g: &ExperimentalModel) -> Result<Vec<Rat>, SolverError> {
    if !g.is_exact() {
        return Err(SolverError::NotRational);
    }
    Ok(g.mag2s()
        .iter()
        .map(|m| m.as_exact().cloned().expect("exact mode"))
        .collect())
}

/// Analytic core of the rational derivation for positive rational
/// magnitudes: the refinement multiplicities z ∝ mag2 with denominators
/// cleared and common factors removed, the refined dimension s = Σ z, and
/// the pulled-back weights z_k / s = mag2_k / Σ mag2.
struct RationalCore {
    z: Vec<BigInt>,
    s: BigInt,
    weights: Vec<Rat>,
}

fn rational_core(mag2: &[Rat]) -> RationalCore {
    let lcm = crate::rational::denominator_lcm(mag2);
    let cleared: Vec<BigInt> = mag2
        .iter()
        .map(|m| (m * Rat::from_integer(lcm.clone())).to_integer())
        .collect();
    let gcd = cleared
        .iter()
        .fold(BigInt::zero(), |acc, n| acc.gcd(n));
    let z: Vec<BigInt> = cleared.iter().map(|n| n / &gcd).collect();
    let s: BigInt = z.iter().sum();
    let weights: Vec<Rat> = z
        .iter()
        .map(|n| Rat::new(n.clone(), s.clone()))
        .collect();
    RationalCore { z, s, weights }
}

fn rational_report(
    g: &ExperimentalModel,
    guard: Option<u64>,
) -> Result<DerivationReport, SolverError> {
    let mag2 = exact_mag2s(g)?;
    for (channel, m) in mag2.iter().enumerate() {
        if m.is_zero() {
            return Err(SolverError::ZeroAmplitude { channel });
        }
        debug_assert!(m.is_positive());
    }
    let core = rational_core(&mag2);
    let d = g.dim();
    let groups = payoff_groups(g)?;
    let distinct = groups.len();

    let mut constraints_used: u64;
    let weights: Vec<Rat>;
    if let Some(limit) = guard {
        let s = core
            .s
            .to_u64()
            .ok_or(SolverError::RefinementTooLarge {
                s: u64::MAX,
                limit,
            })?;
        if s > limit {
            return Err(SolverError::RefinementTooLarge { s, limit });
        }
        // build the refinement edge and solve the refined equal-norm
        // experiment for real, then pull the weights back through the edge
        let z: Vec<u64> = core.z.iter().map(|n| n.to_u64().expect("z <= s")).collect();
        let edge = transform(g, &Transformation::Refine(z))?;
        let refined = solve_equal_norm(&edge.target)?;
        let pulled = edge.pushforward.pull(
            refined
                .weights
                .as_ref()
                .expect("equal-norm reports carry weights"),
        )?;
        weights = pulled
            .as_exact()
            .expect("pullback of exact weights is exact");
        debug_assert_eq!(weights, core.weights);
        constraints_used = refined.constraints_used.saturating_add(1);
    } else {
        // size-unbounded route used inside the continuity iteration: same
        // construction evaluated analytically, never materialized
        weights = core.weights;
        constraints_used = equal_norm_constraint_rank(&core.s, distinct).saturating_add(1);
    }

    let probs: BTreeMap<Rat, Rat> = groups
        .iter()
        .map(|(u, ks)| (u.clone(), ks.iter().map(|&k| &weights[k]).sum()))
        .collect();
    let gauge_dim = d - distinct;
    constraints_used = constraints_used.max(1);
    Ok(DerivationReport {
        method: Method::Rational,
        weights: Some(WeightVector::exact(weights)?),
        outcome_probs: Some(probs),
        unique: gauge_dim == 0,
        gauge_dim,
        gauge_note: gauge_note(gauge_dim, &groups),
        constraints_used,
        refined_dim: core.s.to_u64(),
        iterations: None,
    })
}

/// Rational-magnitude derivation via the refinement construction. All
/// squared magnitudes must be positive rationals; refined dimensions above
/// [`REFINEMENT_GUARD`] are rejected.
pub fn solve_rational(g: &ExperimentalModel) -> Result<DerivationReport, SolverError> {
    rational_report(g, Some(REFINEMENT_GUARD))
}

/// Continuity-limit derivation for arbitrary magnitudes.
///
/// Builds exact rational approximants of |c_k|² (decimal truncation to
/// denominator 10^i at iterate i), solves each with the rational route, and
/// stops when two successive weight vectors differ by less than `tol` in max
/// norm. Channels with exactly zero amplitude keep weight zero throughout;
/// exact rational inputs converge at the first iterate.
pub fn solve_continuity(
    g: &ExperimentalModel,
    tol: f64,
) -> Result<DerivationReport, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    if g.norm2().is_zero() {
        return Err(SolverError::ZeroState);
    }

    let groups = payoff_groups(g)?;
    let d = g.dim();
    let gauge_dim = d - groups.len();

    let mag2: Vec<Value> = g.mag2s();
    let nonzero: Vec<usize> = (0..d).filter(|&k| !mag2[k].is_zero()).collect();

    let assemble = |sub: DerivationReport, iterations: u32| -> Result<DerivationReport, SolverError> {
        let sub_weights = sub.weights.as_ref().expect("rational reports carry weights");
        let sub_exact = sub_weights.as_exact().expect("rational weights are exact");
        let mut weights = vec![Rat::zero(); d];
        for (i, &k) in nonzero.iter().enumerate() {
            weights[k] = sub_exact[i].clone();
        }
        let probs: BTreeMap<Rat, Rat> = groups
            .iter()
            .map(|(u, ks)| (u.clone(), ks.iter().map(|&k| &weights[k]).sum()))
            .collect();
        Ok(DerivationReport {
            method: Method::Continuity,
            weights: Some(WeightVector::exact(weights)?),
            outcome_probs: Some(probs),
            unique: gauge_dim == 0,
            gauge_dim,
            gauge_note: gauge_note(gauge_dim, &groups),
            constraints_used: sub.constraints_used,
            refined_dim: sub.refined_dim,
            iterations: Some(iterations),
        })
    };

    // a model restricted to the channels actually carrying amplitude
    let sub_model = |mag2: &[Rat]| -> Result<ExperimentalModel, SolverError> {
        let coeffs: Vec<crate::amplitude::Amplitude> = mag2
            .iter()
            .map(|m| crate::amplitude::Amplitude::from_mag2(m.clone()))
            .collect::<Result<_, _>>()
            .map_err(ModelError::Core)?;
        let psi = crate::state::StateVector::new(g.psi().basis_tag(), coeffs)
            .map_err(ModelError::Core)?;
        let eigenvalues: Vec<Rat> = nonzero
            .iter()
            .map(|&k| g.observable().eigenvalues()[k].clone())
            .collect();
        let observable = crate::state::Observable::new(eigenvalues).map_err(ModelError::Core)?;
        Ok(ExperimentalModel::new(psi, observable, g.payoff().clone())?)
    };

    if g.is_exact() {
        // the approximating sequence is constant
        let exact: Vec<Rat> = nonzero
            .iter()
            .map(|&k| mag2[k].as_exact().cloned().expect("exact mode"))
            .collect();
        let sub = rational_report(&sub_model(&exact)?, None)?;
        return assemble(sub, 1);
    }

    let float_mag2: Vec<Rat> = nonzero
        .iter()
        .map(|&k| {
            rat_from_f64(mag2[k].to_f64()).ok_or_else(|| {
                SolverError::Model(ModelError::InvalidWeights(format!(
                    "magnitude of channel {k} is not finite"
                )))
            })
        })
        .collect::<Result<_, _>>()?;

    let mut previous: Option<Vec<Rat>> = None;
    let mut last_diff = f64::INFINITY;
    for digits in 1..=MAX_CONTINUITY_ITERATES {
        let truncated: Vec<Rat> = float_mag2
            .iter()
            .map(|m| truncate_decimal(m, digits))
            .collect();
        // denominators bounded below: wait until every live channel survives
        // truncation (the limit magnitudes are fixed and positive)
        if truncated.iter().any(|m| m.is_zero()) {
            continue;
        }
        let sub = rational_report(&sub_model(&truncated)?, None)?;
        let current = sub
            .weights
            .as_ref()
            .and_then(WeightVector::as_exact)
            .expect("rational weights are exact");
        if let Some(prev_weights) = &previous {
            last_diff = prev_weights
                .iter()
                .zip(current.iter())
                .map(|(a, b)| crate::rational::rat_to_f64(&(a - b)).abs())
                .fold(0.0, f64::max);
            if last_diff < tol {
                return assemble(sub, digits);
            }
        }
        previous = Some(current);
    }
    Err(SolverError::NoConvergence {
        iterates: MAX_CONTINUITY_ITERATES,
        last_diff,
    })
}

/// w_k = |c_k|^p / Σ_j |c_j|^p. Exact at p = 2 on exact models; float
/// evaluation otherwise.
pub fn lp_weights(g: &ExperimentalModel, p: f64) -> Result<WeightVector, SolverError> {
    if !(p >= 1.0) {
        return Err(SolverError::InvalidP { p });
    }
    if g.norm2().is_zero() {
        return Err(SolverError::ZeroState);
    }
    if p == 2.0 && g.is_exact() {
        return Ok(g.born_weights());
    }
    let pow: Vec<f64> = g
        .mag2s()
        .iter()
        .map(|m| m.to_f64().sqrt().powf(p))
        .collect();
    let total: f64 = pow.iter().sum();
    Ok(WeightVector::float(
        pow.into_iter().map(|x| x / total).collect(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::model::{born_value, weight_value, PayoffMap};
    use crate::rational::{rat, rat_int, sqrt_exact};
    use crate::state::{Observable, StateVector};

    fn amp(m: Rat) -> Amplitude {
        Amplitude::from_mag2(m).unwrap()
    }

    fn model(mag2: Vec<Rat>, eigen: Vec<Rat>, payoff: Vec<(Rat, Rat)>) -> ExperimentalModel {
        let psi = StateVector::new("phi", mag2.into_iter().map(amp).collect()).unwrap();
        let obs = Observable::new(eigen).unwrap();
        let pay = PayoffMap::from_pairs(payoff).unwrap();
        ExperimentalModel::new(psi, obs, pay).unwrap()
    }

    fn spin_equal() -> ExperimentalModel {
        model(
            vec![rat(1, 2), rat(1, 2)],
            vec![rat(1, 2), rat(-1, 2)],
            vec![(rat(1, 2), rat_int(1)), (rat(-1, 2), rat_int(-1))],
        )
    }

    #[test]
    fn equal_norm_d2_distinct_payoffs() {
        let report = solve_equal_norm(&spin_equal()).unwrap();
        assert!(report.unique);
        assert_eq!(report.gauge_dim, 0);
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 2), rat(1, 2)]
        );
        // V = ½Ω(+) + ½Ω(−) = 0
        assert_eq!(report.constraints_used, 2);
    }

    #[test]
    fn equal_norm_d4_all_distinct() {
        let g = model(
            vec![rat(1, 4); 4],
            (1..=4).map(rat_int).collect(),
            (1..=4).map(|k| (rat_int(k), rat_int(10 + k))).collect(),
        );
        let report = solve_equal_norm(&g).unwrap();
        assert!(report.unique);
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 4); 4]
        );
    }

    #[test]
    fn equal_norm_with_repeated_payoffs_reports_gauge() {
        let g = model(
            vec![rat(1, 3); 3],
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![
                (rat_int(1), rat_int(7)),
                (rat_int(2), rat_int(7)),
                (rat_int(3), rat_int(9)),
            ],
        );
        let report = solve_equal_norm(&g).unwrap();
        assert!(!report.unique);
        assert_eq!(report.gauge_dim, 1);
        let probs = report.outcome_probs.clone().unwrap();
        assert_eq!(probs[&rat_int(7)], rat(2, 3));
        assert_eq!(probs[&rat_int(9)], rat(1, 3));
        assert!(!report.gauge_note.is_empty());
        // the gauge system itself has solution dimension 1
        let sys = weight_gauge_system(&g, &probs).unwrap();
        let rank = uniqueness_analysis(&sys).unwrap();
        assert_eq!(rank.solution_dim, 1);
    }

    #[test]
    fn equal_norm_rejects_unequal_magnitudes() {
        let g = model(
            vec![rat(1, 3), rat(2, 3)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(1)), (rat_int(2), rat_int(2))],
        );
        assert!(matches!(
            solve_equal_norm(&g),
            Err(SolverError::NotEqualNorm)
        ));
    }

    #[test]
    fn rational_m_n_split() {
        // ψ = √m φ0 + √n φ1 (unnormalized), m = 1, n = 2 ⇒ w = (1/3, 2/3)
        let g = model(
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let report = solve_rational(&g).unwrap();
        assert!(report.unique);
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 3), rat(2, 3)]
        );
        assert_eq!(report.refined_dim, Some(3));
    }

    #[test]
    fn rational_unnormalized_2_4() {
        let g = model(
            vec![rat_int(2), rat_int(4)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let report = solve_rational(&g).unwrap();
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 3), rat(2, 3)]
        );
    }

    #[test]
    fn rational_1_2_3_refines_to_six() {
        let g = model(
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![
                (rat_int(1), rat_int(4)),
                (rat_int(2), rat_int(5)),
                (rat_int(3), rat_int(6)),
            ],
        );
        let report = solve_rational(&g).unwrap();
        assert_eq!(report.refined_dim, Some(6));
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 6), rat(1, 3), rat(1, 2)]
        );
        // brute-force check of the refined formula: m_k / s
        assert_eq!(rat(1, 6) + rat(2, 6) + rat(3, 6), rat_int(1));
    }

    #[test]
    fn rational_rejects_zero_amplitude_and_float_mode() {
        let g = model(
            vec![rat_int(0), rat_int(2)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        assert!(matches!(
            solve_rational(&g),
            Err(SolverError::ZeroAmplitude { channel: 0 })
        ));

        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::float(0.6, 0.0).unwrap(),
                Amplitude::float(0.8, 0.0).unwrap(),
            ],
        )
        .unwrap();
        let obs = Observable::new(vec![rat_int(1), rat_int(2)]).unwrap();
        let pay =
            PayoffMap::from_pairs([(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))]).unwrap();
        let g = ExperimentalModel::new(psi, obs, pay).unwrap();
        assert!(matches!(solve_rational(&g), Err(SolverError::NotRational)));
    }

    #[test]
    fn refinement_guard_rejects_oversized_constructions() {
        // mag2 = (1, 10^7) needs s > 10^6
        let g = model(
            vec![rat_int(1), rat_int(10_000_000)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        assert!(matches!(
            solve_rational(&g),
            Err(SolverError::RefinementTooLarge { .. })
        ));
        // the continuity solver handles it (rational input: first iterate)
        let report = solve_continuity(&g, 1e-9).unwrap();
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat(1, 10_000_001), rat(10_000_000, 10_000_001)]
        );
    }

    #[test]
    fn continuity_matches_rational_on_rational_input() {
        let g = model(
            vec![rat(1, 3), rat(2, 3)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let rational = solve_rational(&g).unwrap();
        let continuity = solve_continuity(&g, 1e-9).unwrap();
        assert_eq!(rational.weights, continuity.weights);
        assert_eq!(rational.outcome_probs, continuity.outcome_probs);
        assert_eq!(continuity.iterations, Some(1));
        assert_eq!(continuity.method, Method::Continuity);
    }

    #[test]
    fn continuity_converges_on_irrational_split() {
        // |c|² = (1/√2, 1 − 1/√2)
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::float(a.sqrt(), 0.0).unwrap(),
                Amplitude::float((1.0 - a).sqrt(), 0.0).unwrap(),
            ],
        )
        .unwrap();
        let obs = Observable::new(vec![rat_int(1), rat_int(2)]).unwrap();
        let pay =
            PayoffMap::from_pairs([(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))]).unwrap();
        let g = ExperimentalModel::new(psi, obs, pay).unwrap();
        let report = solve_continuity(&g, 1e-9).unwrap();
        let w = report.weights.unwrap();
        // direct evaluation of the squared-magnitude rule
        assert!((w.get(0).to_f64() - a).abs() < 1e-9);
        assert!((w.get(1).to_f64() - (1.0 - a)).abs() < 1e-9);
        assert!(report.iterations.unwrap() <= MAX_CONTINUITY_ITERATES);
    }

    #[test]
    fn continuity_keeps_zero_channels_at_zero() {
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::float(1.0, 0.0).unwrap(),
                Amplitude::float(0.0, 0.0).unwrap(),
            ],
        )
        .unwrap();
        let obs = Observable::new(vec![rat_int(1), rat_int(2)]).unwrap();
        let pay =
            PayoffMap::from_pairs([(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))]).unwrap();
        let g = ExperimentalModel::new(psi, obs, pay).unwrap();
        let report = solve_continuity(&g, 1e-9).unwrap();
        assert_eq!(
            report.weights.unwrap().as_exact().unwrap(),
            vec![rat_int(1), rat_int(0)]
        );
    }

    #[test]
    fn lp_weights_examples() {
        let g = model(
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        // p = 2 coincides with the squared-magnitude weights, exactly
        let w2 = lp_weights(&g, 2.0).unwrap();
        assert_eq!(w2.as_exact().unwrap(), vec![rat(1, 3), rat(2, 3)]);

        // p = 1 with |c| = (1, 2): mag2 = (1, 4)
        let g1 = model(
            vec![rat_int(1), rat_int(4)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let w1 = lp_weights(&g1, 1.0).unwrap();
        assert!((w1.get(0).to_f64() - 1.0 / 3.0).abs() < 1e-12);
        assert!((w1.get(1).to_f64() - 2.0 / 3.0).abs() < 1e-12);

        // p = 4 on equal magnitudes stays symmetric
        let g4 = model(
            vec![rat_int(1), rat_int(1)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let w4 = lp_weights(&g4, 4.0).unwrap();
        assert!((w4.get(0).to_f64() - 0.5).abs() < 1e-12);

        assert!(matches!(
            lp_weights(&g, 0.5),
            Err(SolverError::InvalidP { .. })
        ));
    }

    #[test]
    fn rational_weights_match_born_oracle() {
        let g = model(
            vec![rat(3, 4), rat(5, 6), rat(1, 12)],
            vec![rat_int(1), rat_int(2), rat_int(3)],
            vec![
                (rat_int(1), rat_int(4)),
                (rat_int(2), rat_int(4)),
                (rat_int(3), rat_int(6)),
            ],
        );
        let report = solve_rational(&g).unwrap();
        let w = report.weights.clone().unwrap();
        assert_eq!(w, g.born_weights());
        assert_eq!(
            weight_value(&g, &w).unwrap(),
            born_value(&g).unwrap()
        );
        // collision ⇒ gauge dimension 1, outcome probabilities still unique
        assert_eq!(report.gauge_dim, 1);
        assert!(!report.unique);
        let probs = report.outcome_probs.unwrap();
        assert_eq!(probs[&rat_int(4)], rat(3, 4) / rat(5, 3) + rat(5, 6) / rat(5, 3));
    }

    #[test]
    fn scale_invariance_of_rational_solver() {
        let g = model(
            vec![rat(1, 4), rat(5, 8)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        let scaled = g
            .scale_state(&Amplitude::exact(rat(9, 2), rat(3, 7)).unwrap())
            .unwrap();
        let a = solve_rational(&g).unwrap();
        let b = solve_rational(&scaled).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.outcome_probs, b.outcome_probs);
        assert_eq!(a.unique, b.unique);
        assert_eq!(a.gauge_dim, b.gauge_dim);
    }

    #[test]
    fn monotone_refinement_pullback() {
        // refining with z and with t·z pulls back to the same weights
        let g = model(
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(1), rat_int(2)],
            vec![(rat_int(1), rat_int(5)), (rat_int(2), rat_int(6))],
        );
        for t in [1u64, 2, 3] {
            let z: Vec<u64> = vec![1 * t, 2 * t];
            let edge = transform(&g, &Transformation::Refine(z)).unwrap();
            let refined = solve_equal_norm(&edge.target).unwrap();
            let pulled = edge
                .pushforward
                .pull(refined.weights.as_ref().unwrap())
                .unwrap();
            assert_eq!(pulled.as_exact().unwrap(), vec![rat(1, 3), rat(2, 3)], "t = {t}");
        }
    }

    #[test]
    fn sqrt_helper_guards_oracle_assumptions() {
        // the m/(m+n) family used in the acceptance checks stays rational
        assert_eq!(sqrt_exact(&rat(4, 9)), Some(rat(2, 3)));
        assert_eq!(sqrt_exact(&rat(1, 2)), None);
    }
}
