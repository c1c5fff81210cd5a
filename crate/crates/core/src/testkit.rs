//! Deterministic generators of random models and transformations.
//!
//! Everything is driven by a caller-supplied ChaCha stream so suites are
//! reproducible. Magnitudes are rationals with bounded numerators and
//! denominators, phases are rationals with small denominators, payoffs may
//! collide when the options ask for it.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::amplitude::Amplitude;
use crate::equivalence::Transformation;
use crate::model::{ExperimentalModel, PayoffMap};
use crate::rational::{rat, Rat};
use crate::state::{Observable, StateVector};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct ModelOptions {
    pub max_dim: usize,
    /// Numerators of |c_k|² are drawn from 1..=max_numerator.
    pub max_numerator: i64,
    /// Denominators of |c_k|² are drawn from 1..=max_denominator.
    pub max_denominator: i64,
    /// Allow zero-amplitude channels (with this probability per channel).
    pub zero_probability: f64,
    /// Allow several channels to share a payoff value.
    pub allow_payoff_collisions: bool,
    /// Draw nonzero phases.
    pub random_phases: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            max_dim: 6,
            max_numerator: 12,
            max_denominator: 12,
            zero_probability: 0.0,
            allow_payoff_collisions: true,
            random_phases: true,
        }
    }
}

pub fn random_rational(rng: &mut ChaCha12Rng, opts: &ModelOptions) -> Rat {
    rat(
        rng.random_range(1..=opts.max_numerator),
        rng.random_range(1..=opts.max_denominator),
    )
}

pub fn random_phase(rng: &mut ChaCha12Rng) -> Rat {
    rat(rng.random_range(0..16), 16)
}

pub fn random_nonzero_amplitude(rng: &mut ChaCha12Rng, opts: &ModelOptions) -> Amplitude {
    let phase = if opts.random_phases {
        random_phase(rng)
    } else {
        Rat::from_integer(0.into())
    };
    Amplitude::exact(random_rational(rng, opts), phase).expect("positive mag2")
}

/// A random exact model honoring the options. Eigenvalues are distinct
/// rationals; payoffs are nonzero and may collide.
pub fn random_exact_model(rng: &mut ChaCha12Rng, opts: &ModelOptions) -> ExperimentalModel {
    let dim = rng.random_range(1..=opts.max_dim);
    let mut coeffs = Vec::with_capacity(dim);
    for _ in 0..dim {
        if rng.random::<f64>() < opts.zero_probability {
            coeffs.push(Amplitude::zero_exact());
        } else {
            coeffs.push(random_nonzero_amplitude(rng, opts));
        }
    }
    if coeffs.iter().all(Amplitude::is_zero) {
        coeffs[0] = random_nonzero_amplitude(rng, opts);
    }
    let psi = StateVector::new("phi", coeffs).expect("nonempty exact coefficients");

    // distinct eigenvalues k + 1/(d+1) spread, shuffled payoff targets
    let eigenvalues: Vec<Rat> = (0..dim).map(|k| rat(k as i64 + 1, 1)).collect();
    let observable = Observable::new(eigenvalues.clone()).expect("nonempty");

    let payoff_pool: Vec<Rat> = if opts.allow_payoff_collisions {
        let distinct = rng.random_range(1..=dim);
        (0..distinct).map(|j| rat(7 * (j as i64 + 1), 2)).collect()
    } else {
        (0..dim).map(|j| rat(7 * (j as i64 + 1), 2)).collect()
    };
    let entries: Vec<(Rat, Rat)> = eigenvalues
        .iter()
        .map(|l| {
            let u = payoff_pool[rng.random_range(0..payoff_pool.len())].clone();
            (l.clone(), u)
        })
        .collect();
    let payoff = PayoffMap::from_pairs(entries).expect("nonzero payoffs");

    ExperimentalModel::new(psi, observable, payoff).expect("valid random model")
}

/// An equal-magnitude variant: same construction with all |c_k|² equal.
pub fn random_equal_norm_model(rng: &mut ChaCha12Rng, opts: &ModelOptions) -> ExperimentalModel {
    let g = random_exact_model(rng, opts);
    let shared = random_rational(rng, opts);
    let coeffs: Vec<Amplitude> = (0..g.dim())
        .map(|_| {
            let phase = if opts.random_phases {
                random_phase(rng)
            } else {
                Rat::from_integer(0.into())
            };
            Amplitude::exact(shared.clone(), phase).expect("positive mag2")
        })
        .collect();
    let psi = StateVector::new("phi", coeffs).expect("nonempty");
    g.with_state(psi).expect("nonzero state")
}

/// A random transformation compatible with the model.
pub fn random_transformation(rng: &mut ChaCha12Rng, g: &ExperimentalModel) -> Transformation {
    let d = g.dim();
    match rng.random_range(0..5) {
        0 => {
            // invertible relabeling: λ ↦ a·λ + b with a ≠ 0
            let a = rat(rng.random_range(1..=5), 1);
            let b = rat(rng.random_range(-5..=5), rng.random_range(1..=3));
            let map: BTreeMap<Rat, Rat> = g
                .observable()
                .eigenvalues()
                .iter()
                .map(|l| (l.clone(), &a * l + &b))
                .collect();
            Transformation::Relabel(map)
        }
        1 => Transformation::Coarsen,
        2 => Transformation::Phase((0..d).map(|_| random_phase(rng)).collect()),
        3 => {
            let mut pi: Vec<usize> = (0..d).collect();
            // Fisher-Yates with the shared stream
            for k in (1..d).rev() {
                let j = rng.random_range(0..=k);
                pi.swap(k, j);
            }
            Transformation::Permute(pi)
        }
        _ => Transformation::Refine((0..d).map(|_| rng.random_range(1..=3)).collect()),
    }
}
