//! State vectors over labeled orthonormal bases, diagonal observables, and
//! the norm-preserving maps the derivation uses.
//!
//! Observables are kept in spectral form: a list of rational eigenvalues
//! aligned with the basis of the associated state vector (repetitions
//! allowed). General self-adjoint matrices and non-orthogonal bases are out
//! of scope. Vectors are not required to be normalized anywhere; every
//! consistency argument survives rescaling.

use crate::amplitude::{sum_exact, sum_with_fallback, Amplitude};
use crate::error::CoreError;
use crate::rational::{wrap_turns, Rat};
use crate::value::Value;

/// A vector over an orthonormal family identified by `basis_tag`.
/// All coefficients share a mode: exact or float, never mixed.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis_tag: String,
    coeffs: Vec<Amplitude>,
}

impl StateVector {
    pub fn new(basis_tag: impl Into<String>, coeffs: Vec<Amplitude>) -> Result<Self, CoreError> {
        if coeffs.is_empty() {
            return Err(CoreError::InvalidAmplitude(
                "state vector needs at least one coefficient".into(),
            ));
        }
        let exact = coeffs[0].is_exact();
        if coeffs.iter().any(|c| c.is_exact() != exact) {
            return Err(CoreError::MixedMode);
        }
        Ok(StateVector {
            basis_tag: basis_tag.into(),
            coeffs,
        })
    }

    /// The k-th basis vector (exact mode).
    pub fn unit(basis_tag: impl Into<String>, dim: usize, k: usize) -> Result<Self, CoreError> {
        if k >= dim {
            return Err(CoreError::IndexOutOfRange { index: k, dim });
        }
        let mut coeffs = vec![Amplitude::zero_exact(); dim];
        coeffs[k] = Amplitude::one_exact();
        StateVector::new(basis_tag, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn basis_tag(&self) -> &str {
        &self.basis_tag
    }

    pub fn coeffs(&self) -> &[Amplitude] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Result<&Amplitude, CoreError> {
        self.coeffs.get(k).ok_or(CoreError::IndexOutOfRange {
            index: k,
            dim: self.dim(),
        })
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs[0].is_exact()
    }

    /// ⟨v, v⟩ = Σ |c_k|², computed directly (always representable).
    pub fn norm2(&self) -> Value {
        self.coeffs
            .iter()
            .fold(Value::zero(), |acc, c| acc.add(&c.mag2()))
    }

    /// Multiplies every coefficient by `a`.
    pub fn scale(&self, a: &Amplitude) -> StateVector {
        StateVector {
            basis_tag: self.basis_tag.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(a)).collect(),
        }
    }

    pub fn to_float(&self) -> StateVector {
        StateVector {
            basis_tag: self.basis_tag.clone(),
            coeffs: self.coeffs.iter().map(Amplitude::to_float).collect(),
        }
    }

    pub fn approx_eq(&self, rhs: &StateVector, tol: f64) -> bool {
        self.basis_tag == rhs.basis_tag
            && self.dim() == rhs.dim()
            && self
                .coeffs
                .iter()
                .zip(rhs.coeffs.iter())
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Σ c_k v_k over a common basis. Exact mode errors with `ExactClosure`
    /// when some component sum leaves the representation.
    pub fn linear_combination(
        coeffs: &[Amplitude],
        vectors: &[StateVector],
    ) -> Result<StateVector, CoreError> {
        if coeffs.len() != vectors.len() || vectors.is_empty() {
            return Err(CoreError::DimensionMismatch {
                expected: vectors.len(),
                got: coeffs.len(),
            });
        }
        let dim = vectors[0].dim();
        let tag = vectors[0].basis_tag.clone();
        for v in vectors {
            if v.dim() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
            if v.basis_tag != tag {
                return Err(CoreError::BasisMismatch {
                    left: tag,
                    right: v.basis_tag.clone(),
                });
            }
        }
        let exact = coeffs.iter().all(Amplitude::is_exact)
            && vectors.iter().all(StateVector::is_exact);
        let mut out = Vec::with_capacity(dim);
        for slot in 0..dim {
            let terms: Vec<Amplitude> = coeffs
                .iter()
                .zip(vectors.iter())
                .map(|(c, v)| c.mul(&v.coeffs[slot]))
                .collect();
            out.push(if exact {
                sum_exact(&terms)?
            } else {
                sum_with_fallback(&terms)
            });
        }
        StateVector::new(tag, out)
    }
}

/// Observable in spectral form, diagonal in the declared basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    eigenvalues: Vec<Rat>,
}

impl Observable {
    pub fn new(eigenvalues: Vec<Rat>) -> Result<Self, CoreError> {
        if eigenvalues.is_empty() {
            return Err(CoreError::InvalidAmplitude(
                "observable needs at least one eigenvalue".into(),
            ));
        }
        Ok(Observable { eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Rat] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> Result<&Rat, CoreError> {
        self.eigenvalues.get(k).ok_or(CoreError::IndexOutOfRange {
            index: k,
            dim: self.dim(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IsometryKind {
    /// Coefficient at slot k moves to slot π(k).
    Permutation(Vec<usize>),
    /// Coefficient at slot k picks up phase θ_k (in turns).
    PhaseRotation(Vec<Rat>),
    /// Slot k fans out into z_k consecutive target slots, each carrying
    /// c_k/√z_k; the target is a fresh orthonormal family.
    Refinement(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    kind: IsometryKind,
}

impl Isometry {
    pub fn permutation(pi: Vec<usize>) -> Result<Self, CoreError> {
        let d = pi.len();
        let mut seen = vec![false; d];
        for &image in &pi {
            if image >= d || seen[image] {
                return Err(CoreError::InvalidIsometry(format!(
                    "{pi:?} is not a bijection on 0..{d}"
                )));
            }
            seen[image] = true;
        }
        Ok(Isometry {
            kind: IsometryKind::Permutation(pi),
        })
    }

    pub fn phase_rotation(turns: Vec<Rat>) -> Result<Self, CoreError> {
        if turns.is_empty() {
            return Err(CoreError::InvalidIsometry("empty phase list".into()));
        }
        Ok(Isometry {
            kind: IsometryKind::PhaseRotation(turns.into_iter().map(|t| wrap_turns(&t)).collect()),
        })
    }

    pub fn refinement(z: Vec<u64>) -> Result<Self, CoreError> {
        if z.is_empty() || z.contains(&0) {
            return Err(CoreError::InvalidIsometry(
                "refinement multiplicities must be positive".into(),
            ));
        }
        if z.iter().try_fold(0u64, |acc, &m| acc.checked_add(m)).is_none() {
            return Err(CoreError::InvalidIsometry(
                "refinement target dimension overflows".into(),
            ));
        }
        Ok(Isometry {
            kind: IsometryKind::Refinement(z),
        })
    }

    pub fn kind(&self) -> &IsometryKind {
        &self.kind
    }

    pub fn source_dim(&self) -> usize {
        match &self.kind {
            IsometryKind::Permutation(pi) => pi.len(),
            IsometryKind::PhaseRotation(t) => t.len(),
            IsometryKind::Refinement(z) => z.len(),
        }
    }

    pub fn target_dim(&self) -> usize {
        match &self.kind {
            IsometryKind::Permutation(pi) => pi.len(),
            IsometryKind::PhaseRotation(t) => t.len(),
            IsometryKind::Refinement(z) => z.iter().map(|&m| m as usize).sum(),
        }
    }

    /// Basis tag of the image of a vector tagged `tag`: permutations and
    /// phase rotations stay in the family, refinement moves to a fresh one.
    pub fn target_tag(&self, tag: &str) -> String {
        match &self.kind {
            IsometryKind::Refinement(_) => format!("{tag}'"),
            _ => tag.to_string(),
        }
    }
}

/// Applies a norm-preserving map to a state vector.
pub fn apply_isometry(u: &Isometry, v: &StateVector) -> Result<StateVector, CoreError> {
    if v.dim() != u.source_dim() {
        return Err(CoreError::DimensionMismatch {
            expected: u.source_dim(),
            got: v.dim(),
        });
    }
    match u.kind() {
        IsometryKind::Permutation(pi) => {
            // π is a bijection, so every slot is written exactly once
            let mut out = vec![Amplitude::zero_exact(); v.dim()];
            for (k, c) in v.coeffs().iter().enumerate() {
                out[pi[k]] = c.clone();
            }
            StateVector::new(v.basis_tag().to_string(), out)
        }
        IsometryKind::PhaseRotation(turns) => StateVector::new(
            v.basis_tag().to_string(),
            v.coeffs()
                .iter()
                .zip(turns.iter())
                .map(|(c, t)| c.rotate(t))
                .collect(),
        ),
        IsometryKind::Refinement(z) => {
            let mut out = Vec::with_capacity(u.target_dim());
            for (c, &m) in v.coeffs().iter().zip(z.iter()) {
                let piece = c.split(m);
                for _ in 0..m {
                    out.push(piece.clone());
                }
            }
            StateVector::new(u.target_tag(v.basis_tag()), out)
        }
    }
}

/// ⟨a, b⟩ = Σ conj(a_k)·b_k.
///
/// In exact mode the result stays exact whenever all pairwise phase
/// differences and magnitude products of the summands are rationally
/// representable; otherwise the computation fails over to a float result
/// (the degraded mode of the returned amplitude is the flag).
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude, CoreError> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.basis_tag() != b.basis_tag() {
        return Err(CoreError::BasisMismatch {
            left: a.basis_tag().to_string(),
            right: b.basis_tag().to_string(),
        });
    }
    let terms: Vec<Amplitude> = a
        .coeffs()
        .iter()
        .zip(b.coeffs().iter())
        .map(|(x, y)| x.conj().mul(y))
        .collect();
    Ok(sum_with_fallback(&terms))
}

/// ⟨v, P̂_k v⟩ = |c_k|²; exact in exact mode.
pub fn projector_expectation(v: &StateVector, k: usize) -> Result<Value, CoreError> {
    Ok(v.coeff(k)?.mag2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use num_traits::Zero;

    fn amp(m: Rat, p: Rat) -> Amplitude {
        Amplitude::exact(m, p).unwrap()
    }

    #[test]
    fn unit_vectors_are_orthonormal() {
        let e1 = StateVector::unit("phi", 3, 0).unwrap();
        let e2 = StateVector::unit("phi", 3, 1).unwrap();
        assert_eq!(inner_product(&e1, &e1).unwrap(), Amplitude::one_exact());
        assert_eq!(inner_product(&e1, &e2).unwrap(), Amplitude::zero_exact());
    }

    #[test]
    fn norm_of_two_thirds_split_is_one() {
        // ψ = √(1/3) φ1 + √(2/3) φ2 ⇒ ⟨ψ,ψ⟩ = 1/3 + 2/3 = 1
        let v = StateVector::new(
            "phi",
            vec![amp(rat(1, 3), Rat::zero()), amp(rat(2, 3), Rat::zero())],
        )
        .unwrap();
        assert_eq!(inner_product(&v, &v).unwrap(), Amplitude::one_exact());
        assert_eq!(v.norm2(), Value::Exact(rat_int(1)));
    }

    #[test]
    fn basis_and_dimension_mismatches_are_errors() {
        let a = StateVector::unit("phi", 2, 0).unwrap();
        let b = StateVector::unit("chi", 2, 0).unwrap();
        let c = StateVector::unit("phi", 3, 0).unwrap();
        assert!(matches!(
            inner_product(&a, &b),
            Err(CoreError::BasisMismatch { .. })
        ));
        assert!(matches!(
            inner_product(&a, &c),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permutation_swaps_coefficients() {
        // transposition on c₊φ0 + c₋φ1
        let v = StateVector::new(
            "phi",
            vec![amp(rat(1, 3), rat(1, 8)), amp(rat(2, 3), Rat::zero())],
        )
        .unwrap();
        let u = Isometry::permutation(vec![1, 0]).unwrap();
        let w = apply_isometry(&u, &v).unwrap();
        assert_eq!(w.coeff(1).unwrap(), v.coeff(0).unwrap());
        assert_eq!(w.coeff(0).unwrap(), v.coeff(1).unwrap());
        assert_eq!(w.norm2(), v.norm2());
    }

    #[test]
    fn refinement_splits_channels_into_equal_blocks() {
        // z = (1, 2): c1 φ0 + c2 φ1 → c1 χ0 + (c2/√2) χ1 + (c2/√2) χ2
        let c1 = amp(rat(1, 3), Rat::zero());
        let c2 = amp(rat(2, 3), rat(1, 4));
        let v = StateVector::new("phi", vec![c1.clone(), c2.clone()]).unwrap();
        let u = Isometry::refinement(vec![1, 2]).unwrap();
        let w = apply_isometry(&u, &v).unwrap();
        assert_eq!(w.dim(), 3);
        assert_eq!(w.basis_tag(), "phi'");
        assert_eq!(w.coeff(0).unwrap(), &c1);
        assert_eq!(w.coeff(1).unwrap(), &amp(rat(1, 3), rat(1, 4)));
        assert_eq!(w.coeff(2).unwrap(), &amp(rat(1, 3), rat(1, 4)));
        assert_eq!(w.norm2(), v.norm2());
    }

    #[test]
    fn zero_phase_rotation_is_identity() {
        let v = StateVector::new(
            "phi",
            vec![amp(rat(1, 2), rat(1, 8)), amp(rat(1, 2), rat(3, 8))],
        )
        .unwrap();
        let u = Isometry::phase_rotation(vec![Rat::zero(), Rat::zero()]).unwrap();
        assert_eq!(apply_isometry(&u, &v).unwrap(), v);
    }

    #[test]
    fn refinement_images_of_distinct_basis_vectors_are_orthogonal() {
        let u = Isometry::refinement(vec![2, 3]).unwrap();
        let e1 = apply_isometry(&u, &StateVector::unit("phi", 2, 0).unwrap()).unwrap();
        let e2 = apply_isometry(&u, &StateVector::unit("phi", 2, 1).unwrap()).unwrap();
        assert_eq!(inner_product(&e1, &e2).unwrap(), Amplitude::zero_exact());
        assert_eq!(inner_product(&e1, &e1).unwrap(), Amplitude::one_exact());
    }

    #[test]
    fn projector_expectation_reads_mag2() {
        let v = StateVector::new(
            "phi",
            vec![amp(rat(1, 3), Rat::zero()), amp(rat(2, 3), rat(1, 2))],
        )
        .unwrap();
        assert_eq!(projector_expectation(&v, 1).unwrap(), Value::Exact(rat(2, 3)));
        assert!(projector_expectation(&v, 2).is_err());
        let e = StateVector::unit("phi", 2, 0).unwrap();
        assert_eq!(projector_expectation(&e, 0).unwrap(), Value::Exact(rat_int(1)));
        // (1/√2)(φ0+φ1), slot 1 ⇒ 1/2
        let h = StateVector::new(
            "phi",
            vec![amp(rat(1, 2), Rat::zero()), amp(rat(1, 2), Rat::zero())],
        )
        .unwrap();
        assert_eq!(projector_expectation(&h, 1).unwrap(), Value::Exact(rat(1, 2)));
    }

    #[test]
    fn invalid_isometries_rejected() {
        assert!(Isometry::permutation(vec![0, 0]).is_err());
        assert!(Isometry::permutation(vec![0, 2]).is_err());
        assert!(Isometry::refinement(vec![1, 0]).is_err());
    }

    #[test]
    fn mixed_mode_vectors_rejected() {
        let e = Amplitude::one_exact();
        let f = Amplitude::float(1.0, 0.0).unwrap();
        assert!(matches!(
            StateVector::new("phi", vec![e, f]),
            Err(CoreError::MixedMode)
        ));
    }
}
