//! Seeded Monte Carlo realization of experiments and the hidden-variable
//! counterexample.
//!
//! Sampling is bit-reproducible: the generator is ChaCha12 keyed from a
//! 64-bit seed (`SeedableRng::seed_from_u64`), outcomes are drawn by
//! inverse-CDF over the outcome values in ascending order, and uniform
//! doubles take the 53 high bits of each 64-bit word. Identical inputs give
//! identical records on every platform. Trials may be sharded: shard i uses
//! seed + i, and merging counts is order-independent.
//!
//! The pilot-wave run models a two-channel experiment completed by a binary
//! hidden variable: the particle sits on one side of the symmetry plane, and
//! the side alone determines the outcome. With the sides distributed by the
//! squared magnitudes the statistics reproduce the weight-rule frequencies;
//! any other bias is detectable against them.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::model::{outcome_probs, ExperimentalModel, ModelError, WeightVector};
use crate::rational::Rat;
use crate::value::Value;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SimError {
    #[error("expected probability of outcome {0} is zero or missing")]
    ZeroExpectedProbability(String),
    #[error("bias must lie in [0, 1], got {0}")]
    InvalidBias(f64),
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("invalid pilot-wave configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome counts of a batch of trials.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub counts: BTreeMap<Rat, u64>,
    pub trials: u64,
    pub rule_tag: String,
    pub seed: u64,
}

impl TrialRecord {
    pub fn frequency(&self, outcome: &Rat) -> f64 {
        *self.counts.get(outcome).unwrap_or(&0) as f64 / self.trials as f64
    }

    /// Merges shard records; counts add, so the merge order is irrelevant.
    pub fn merge(mut self, other: &TrialRecord) -> TrialRecord {
        for (outcome, n) in &other.counts {
            *self.counts.entry(outcome.clone()).or_insert(0) += n;
        }
        self.trials += other.trials;
        self
    }
}

/// Inverse-CDF sampler over outcomes ordered by value.
struct OutcomeSampler {
    outcomes: Vec<Rat>,
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    fn new(probs: &BTreeMap<Rat, Value>) -> Self {
        let mut outcomes = Vec::with_capacity(probs.len());
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for (outcome, p) in probs {
            acc += p.to_f64();
            outcomes.push(outcome.clone());
            cumulative.push(acc);
        }
        // guard the tail against float round-off
        if let Some(last) = cumulative.last_mut() {
            *last = f64::max(*last, 1.0);
        }
        OutcomeSampler {
            outcomes,
            cumulative,
        }
    }

    fn draw(&self, u: f64) -> &Rat {
        let idx = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.outcomes.len() - 1);
        &self.outcomes[idx]
    }
}

/// Samples `trials` i.i.d. outcomes of the model under the given weights.
pub fn sample(
    g: &ExperimentalModel,
    w: &WeightVector,
    trials: u64,
    seed: u64,
) -> Result<TrialRecord, SimError> {
    sample_tagged(g, w, trials, seed, "weights")
}

pub fn sample_tagged(
    g: &ExperimentalModel,
    w: &WeightVector,
    trials: u64,
    seed: u64,
    rule_tag: &str,
) -> Result<TrialRecord, SimError> {
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let probs = outcome_probs(g, w)?;
    let sampler = OutcomeSampler::new(&probs);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<Rat, u64> = BTreeMap::new();
    for _ in 0..trials {
        let u: f64 = rng.random();
        *counts.entry(sampler.draw(u).clone()).or_insert(0) += 1;
    }
    Ok(TrialRecord {
        counts,
        trials,
        rule_tag: rule_tag.to_string(),
        seed,
    })
}

/// Shards the trials across `shards` independent streams (shard i seeded
/// with seed + i) and merges the counts.
pub fn sample_sharded(
    g: &ExperimentalModel,
    w: &WeightVector,
    trials: u64,
    seed: u64,
    shards: u64,
) -> Result<TrialRecord, SimError> {
    if shards == 0 || trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let per_shard = trials / shards;
    let remainder = trials % shards;
    let mut merged: Option<TrialRecord> = None;
    for i in 0..shards {
        let n = per_shard + if i < remainder { 1 } else { 0 };
        if n == 0 {
            continue;
        }
        let record = sample(g, w, n, seed + i)?;
        merged = Some(match merged {
            None => record,
            Some(acc) => acc.merge(&record),
        });
    }
    let mut record = merged.expect("at least one shard ran");
    record.seed = seed;
    Ok(record)
}

/// Two-channel hidden-variable configuration: an equal-magnitude model and
/// the probability that the hidden variable sits on the first channel's side.
#[derive(Clone, Debug)]
pub struct PilotWaveConfig {
    model: ExperimentalModel,
    bias: f64,
}

impl PilotWaveConfig {
    pub fn new(model: ExperimentalModel, bias: f64) -> Result<Self, SimError> {
        if !(0.0..=1.0).contains(&bias) {
            return Err(SimError::InvalidBias(bias));
        }
        if model.dim() != 2 {
            return Err(SimError::InvalidConfig(
                "the hidden-variable run needs exactly two channels".into(),
            ));
        }
        let mag2 = model.mag2s();
        let equal = match (&mag2[0], &mag2[1]) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (a, b) => (a.to_f64() - b.to_f64()).abs() <= 1e-12,
        };
        if !equal || mag2[0].is_zero() {
            return Err(SimError::InvalidConfig(
                "the superposition must have equal nonzero magnitudes".into(),
            ));
        }
        Ok(PilotWaveConfig { model, bias })
    }

    pub fn model(&self) -> &ExperimentalModel {
        &self.model
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

/// Runs the hidden-variable model: each trial draws the side of the symmetry
/// plane (first channel with probability `bias`), and the side alone
/// determines the outcome.
pub fn pilot_wave_run(
    cfg: &PilotWaveConfig,
    trials: u64,
    seed: u64,
) -> Result<TrialRecord, SimError> {
    if trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let plus = cfg.model.channel_payoff(0)?.clone();
    let minus = cfg.model.channel_payoff(1)?.clone();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<Rat, u64> = BTreeMap::new();
    counts.insert(plus.clone(), 0);
    counts.insert(minus.clone(), 0);
    for _ in 0..trials {
        let u: f64 = rng.random();
        let outcome = if u < cfg.bias { &plus } else { &minus };
        *counts.get_mut(outcome).expect("outcome preinserted") += 1;
    }
    Ok(TrialRecord {
        counts,
        trials,
        rule_tag: format!("pilotwave(bias={})", cfg.bias),
        seed,
    })
}

/// Pearson chi-square and per-outcome binomial z-scores of a record against
/// expected outcome probabilities.
#[derive(Clone, Debug)]
pub struct GoodnessOfFit {
    pub chi_square: f64,
    /// Degrees of freedom: outcomes − 1.
    pub dof: usize,
    pub z_scores: BTreeMap<Rat, f64>,
}

pub fn goodness_of_fit(
    record: &TrialRecord,
    expected: &BTreeMap<Rat, f64>,
) -> Result<GoodnessOfFit, SimError> {
    for (outcome, p) in expected {
        if *p <= 0.0 {
            return Err(SimError::ZeroExpectedProbability(outcome.to_string()));
        }
    }
    for outcome in record.counts.keys() {
        if !expected.contains_key(outcome) {
            return Err(SimError::ZeroExpectedProbability(outcome.to_string()));
        }
    }
    let n = record.trials as f64;
    let mut chi_square = 0.0;
    let mut z_scores = BTreeMap::new();
    for (outcome, p) in expected {
        let observed = *record.counts.get(outcome).unwrap_or(&0) as f64;
        let expected_count = p * n;
        let delta = observed - expected_count;
        chi_square += delta * delta / expected_count;
        let sigma = (p * (1.0 - p) / n).sqrt();
        let z = if sigma > 0.0 {
            (observed / n - p) / sigma
        } else {
            0.0
        };
        z_scores.insert(outcome.clone(), z);
    }
    Ok(GoodnessOfFit {
        chi_square,
        dof: expected.len().saturating_sub(1),
        z_scores,
    })
}

/// Writes the record as CSV: `outcome,count,frequency,expected,z` rows in
/// ascending outcome order, then the closing `chi_square,<value>,,,,` row.
pub fn write_csv(
    record: &TrialRecord,
    expected: &BTreeMap<Rat, f64>,
    out: &mut dyn Write,
) -> Result<GoodnessOfFit, SimError> {
    let fit = goodness_of_fit(record, expected)?;
    let mut text = String::from("outcome,count,frequency,expected,z\n");
    for (outcome, p) in expected {
        let count = record.counts.get(outcome).unwrap_or(&0);
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::rational::format_rat(outcome),
            count,
            record.frequency(outcome),
            p,
            fit.z_scores[outcome],
        ));
    }
    text.push_str(&format!("chi_square,{},,,,\n", fit.chi_square));
    out.write_all(text.as_bytes())
        .map_err(|e| SimError::InvalidConfig(format!("write failed: {e}")))?;
    Ok(fit)
}

/// Expected outcome probabilities as f64, for the statistics layer.
pub fn expected_probs_f64(
    g: &ExperimentalModel,
    w: &WeightVector,
) -> Result<BTreeMap<Rat, f64>, SimError> {
    Ok(outcome_probs(g, w)?
        .into_iter()
        .map(|(u, p)| (u, p.to_f64()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::Amplitude;
    use crate::model::PayoffMap;
    use crate::rational::{rat, rat_int};
    use crate::state::{Observable, StateVector};

    fn spin_model() -> ExperimentalModel {
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::from_mag2(rat(1, 2)).unwrap(),
                Amplitude::from_mag2(rat(1, 2)).unwrap(),
            ],
        )
        .unwrap();
        let obs = Observable::new(vec![rat(1, 2), rat(-1, 2)]).unwrap();
        let payoff =
            PayoffMap::from_pairs([(rat(1, 2), rat_int(1)), (rat(-1, 2), rat_int(-1))]).unwrap();
        ExperimentalModel::new(psi, obs, payoff).unwrap()
    }

    #[test]
    fn point_mass_sampling_is_deterministic() {
        let g = spin_model();
        let w = WeightVector::point_mass(2, 0).unwrap();
        let record = sample(&g, &w, 1000, 7).unwrap();
        assert_eq!(record.counts[&rat_int(1)], 1000);
        assert_eq!(record.counts.get(&rat_int(-1)), None);
    }

    #[test]
    fn identical_seeds_reproduce_records() {
        let g = spin_model();
        let w = g.born_weights();
        let a = sample(&g, &w, 10_000, 42).unwrap();
        let b = sample(&g, &w, 10_000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample(&g, &w, 10_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn born_sampling_stays_within_three_sigma() {
        let g = spin_model();
        let record = sample(&g, &g.born_weights(), 100_000, 1).unwrap();
        let sigma = (0.25f64 / 100_000.0).sqrt();
        let freq = record.frequency(&rat_int(1));
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn sharded_sampling_merges_order_independently() {
        let g = spin_model();
        let w = g.born_weights();
        let merged = sample_sharded(&g, &w, 10_000, 5, 4).unwrap();
        assert_eq!(merged.trials, 10_000);
        // manual merge in the opposite order gives the same counts
        let shards: Vec<TrialRecord> = (0..4)
            .map(|i| sample(&g, &w, 2500, 5 + i).unwrap())
            .collect();
        let mut reverse = shards[3].clone();
        for r in shards[..3].iter().rev() {
            reverse = reverse.merge(r);
        }
        assert_eq!(merged.counts, reverse.counts);
    }

    #[test]
    fn pilot_wave_extremes() {
        let cfg = PilotWaveConfig::new(spin_model(), 1.0).unwrap();
        let record = pilot_wave_run(&cfg, 1000, 7).unwrap();
        assert_eq!(record.counts[&rat_int(1)], 1000);
        assert_eq!(record.counts[&rat_int(-1)], 0);
    }

    #[test]
    fn pilot_wave_balanced_bias_matches_weights() {
        let cfg = PilotWaveConfig::new(spin_model(), 0.5).unwrap();
        let record = pilot_wave_run(&cfg, 100_000, 3).unwrap();
        let sigma = (0.25f64 / 100_000.0).sqrt();
        assert!((record.frequency(&rat_int(1)) - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn pilot_wave_biased_run_deviates() {
        let cfg = PilotWaveConfig::new(spin_model(), 0.7).unwrap();
        let record = pilot_wave_run(&cfg, 100_000, 11).unwrap();
        let g = spin_model();
        let expected = expected_probs_f64(&g, &g.born_weights()).unwrap();
        let fit = goodness_of_fit(&record, &expected).unwrap();
        assert!(fit.z_scores[&rat_int(1)].abs() > 5.0);
    }

    #[test]
    fn pilot_wave_validation() {
        assert!(matches!(
            PilotWaveConfig::new(spin_model(), 1.5),
            Err(SimError::InvalidBias(_))
        ));
        let psi = StateVector::new(
            "phi",
            vec![
                Amplitude::from_mag2(rat(1, 3)).unwrap(),
                Amplitude::from_mag2(rat(2, 3)).unwrap(),
            ],
        )
        .unwrap();
        let unequal = spin_model().with_state(psi).unwrap();
        assert!(matches!(
            PilotWaveConfig::new(unequal, 0.5),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn chi_square_zero_on_exact_proportions() {
        let record = TrialRecord {
            counts: [(rat_int(1), 500u64), (rat_int(-1), 500u64)]
                .into_iter()
                .collect(),
            trials: 1000,
            rule_tag: "test".into(),
            seed: 0,
        };
        let expected: BTreeMap<Rat, f64> =
            [(rat_int(1), 0.5), (rat_int(-1), 0.5)].into_iter().collect();
        let fit = goodness_of_fit(&record, &expected).unwrap();
        assert_eq!(fit.chi_square, 0.0);
        assert_eq!(fit.dof, 1);
    }

    #[test]
    fn z_score_matches_binomial_oracle() {
        // counts (70000, 30000) vs (1/2, 1/2): z = 0.2/√(0.25/1e5) ≈ 126.49
        let record = TrialRecord {
            counts: [(rat_int(1), 70_000u64), (rat_int(-1), 30_000u64)]
                .into_iter()
                .collect(),
            trials: 100_000,
            rule_tag: "test".into(),
            seed: 0,
        };
        let expected: BTreeMap<Rat, f64> =
            [(rat_int(1), 0.5), (rat_int(-1), 0.5)].into_iter().collect();
        let fit = goodness_of_fit(&record, &expected).unwrap();
        let oracle = 0.2 / (0.25f64 / 100_000.0).sqrt();
        assert!((fit.z_scores[&rat_int(1)] - oracle).abs() < 1e-9);
        assert!((oracle - 126.49110640673517).abs() < 1e-9);
    }

    #[test]
    fn zero_expected_probability_rejected() {
        let record = TrialRecord {
            counts: [(rat_int(1), 10u64)].into_iter().collect(),
            trials: 10,
            rule_tag: "test".into(),
            seed: 0,
        };
        let expected: BTreeMap<Rat, f64> = [(rat_int(1), 0.0)].into_iter().collect();
        assert!(matches!(
            goodness_of_fit(&record, &expected),
            Err(SimError::ZeroExpectedProbability(_))
        ));
    }

    #[test]
    fn csv_layout_is_stable() {
        let g = spin_model();
        let w = g.born_weights();
        let record = sample(&g, &w, 100, 1).unwrap();
        let expected = expected_probs_f64(&g, &w).unwrap();
        let mut buf: Vec<u8> = Vec::new();
        write_csv(&record, &expected, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("outcome,count,frequency,expected,z"));
        let body: Vec<&str> = lines.collect();
        assert_eq!(body.len(), 3);
        assert!(body[0].starts_with("-1,"));
        assert!(body[1].starts_with("1,"));
        assert!(body[2].starts_with("chi_square,"));
        assert!(body[2].ends_with(",,,,"));
    }
}
