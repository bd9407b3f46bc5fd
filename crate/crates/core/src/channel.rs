//! Kraus decompositions of the cascade, Λ and V spontaneous-decay maps.
//!
//! Level 1 is the ground state. The cascade decays 3→2→1, Λ decays 3→{1,2}
//! and V decays {2,3}→1. Operators are stored in a fixed order (K0 first)
//! so serialized channels are reproducible.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::state::{all_finite, ComplexMatrix, DensityMatrix, InitialState};

/// Tolerance on the completeness residual ‖Σ K†K − I‖_max.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Slack allowed on p31 + p32 ≤ 1 to absorb rounding in derived probabilities.
const SUM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecayType {
    Cascade,
    Lambda,
    V,
}

impl DecayType {
    pub const ALL: [DecayType; 3] = [DecayType::Cascade, DecayType::Lambda, DecayType::V];

    pub fn name(self) -> &'static str {
        match self {
            DecayType::Cascade => "cascade",
            DecayType::Lambda => "lambda",
            DecayType::V => "v",
        }
    }

    /// Number of Kraus operators in the decomposition.
    pub fn kraus_count(self) -> usize {
        match self {
            DecayType::Cascade => 4,
            DecayType::Lambda | DecayType::V => 3,
        }
    }
}

impl fmt::Display for DecayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecayType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cascade" => Ok(DecayType::Cascade),
            "lambda" | "λ" => Ok(DecayType::Lambda),
            "v" => Ok(DecayType::V),
            other => Err(Error::InputContract(format!("unknown decay type '{other}'"))),
        }
    }
}

/// Jump probabilities (p21, p31, p32); p_ij is the probability that level i decayed to j.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpProbabilities {
    pub p21: f64,
    pub p31: f64,
    pub p32: f64,
}

impl JumpProbabilities {
    pub fn new(p21: f64, p31: f64, p32: f64) -> Result<Self> {
        let probs = Self { p21, p31, p32 };
        probs.check_range()?;
        Ok(probs)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p21, self.p31, self.p32]
    }

    fn check_range(&self) -> Result<()> {
        check_range("p21", self.p21, 0.0, 1.0)?;
        check_range("p31", self.p31, 0.0, 1.0)?;
        check_range("p32", self.p32, 0.0, 1.0)
    }

    /// Checks ranges and, for Λ, the shared-depletion constraint p31 + p32 ≤ 1.
    pub fn validate_for(&self, decay_type: DecayType) -> Result<()> {
        self.check_range()?;
        if decay_type == DecayType::Lambda && self.p31 + self.p32 > 1.0 + SUM_SLACK {
            return Err(Error::Constraint(format!("Λ decay requires p31 + p32 ≤ 1, got {}", self.p31 + self.p32)));
        }
        Ok(())
    }

    /// Remaining Λ amplitude factor 1 − p31 − p32, clamped at zero.
    fn lambda_survival(&self) -> f64 {
        (1.0 - self.p31 - self.p32).max(0.0)
    }
}

/// An ordered Kraus decomposition for one decay configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
    decay_type: DecayType,
    probs: JumpProbabilities,
}

impl KrausSet {
    /// Wraps arbitrary operators without checking completeness.
    ///
    /// [`apply_channel`] rejects sets whose residual exceeds [`COMPLETENESS_TOL`].
    pub fn from_operators(operators: Vec<ComplexMatrix>, decay_type: DecayType, probs: JumpProbabilities) -> Self {
        Self { operators, decay_type, probs }
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn decay_type(&self) -> DecayType {
        self.decay_type
    }

    pub fn probs(&self) -> JumpProbabilities {
        self.probs
    }

    /// max-entry |Σ_i K_i† K_i − I|.
    pub fn completeness_residual(&self) -> f64 {
        let sum = self.operators.iter().fold(ComplexMatrix::zeros(), |acc, k| acc + k.adjoint() * k);
        (sum - ComplexMatrix::identity()).iter().fold(0.0, |worst, z| worst.max(z.norm()))
    }

    pub fn is_complete(&self) -> bool {
        self.completeness_residual() <= COMPLETENESS_TOL
    }
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn diag(a: f64, b: f64, c: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&nalgebra::Vector3::new(real(a), real(b), real(c)))
}

/// √amp · |to⟩⟨from| with 1-based levels.
fn jump(amp: f64, to: usize, from: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros();
    m[(to - 1, from - 1)] = real(amp.sqrt());
    m
}

/// Kraus operators for the requested decay configuration.
///
/// Cascade reads (p21, p32), Λ reads (p31, p32), V reads (p21, p31); the
/// remaining probability is ignored.
pub fn build_kraus(decay_type: DecayType, probs: JumpProbabilities) -> Result<KrausSet> {
    probs.validate_for(decay_type)?;
    let JumpProbabilities { p21, p31, p32 } = probs;
    let operators = match decay_type {
        DecayType::Cascade => vec![
            diag(1.0, (1.0 - p21).sqrt(), (1.0 - p32).sqrt()),
            jump(p21, 1, 2),
            jump(p32 * (1.0 - p21), 2, 3),
            jump(p32 * p21, 1, 3),
        ],
        DecayType::Lambda => vec![diag(1.0, 1.0, probs.lambda_survival().sqrt()), jump(p32, 2, 3), jump(p31, 1, 3)],
        DecayType::V => vec![diag(1.0, (1.0 - p21).sqrt(), (1.0 - p31).sqrt()), jump(p21, 1, 2), jump(p31, 1, 3)],
    };
    Ok(KrausSet { operators, decay_type, probs })
}

/// ρ ↦ Σ_i K_i ρ K_i†.
pub fn apply_channel(kraus: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let residual = kraus.completeness_residual();
    if residual.is_nan() || residual > COMPLETENESS_TOL || kraus.operators.iter().any(|k| !all_finite(k)) {
        return Err(Error::Precondition(format!("Kraus set is not trace preserving (residual {residual:.3e})")));
    }
    let m = rho.matrix();
    let out = kraus.operators.iter().fold(ComplexMatrix::zeros(), |acc, k| acc + k * m * k.adjoint());
    Ok(DensityMatrix::from_raw(hermitize(out)))
}

/// Unnormalized conditional state K ρ K† for a single branch, with its weight Tr(K ρ K†).
pub fn branch_state(k: &ComplexMatrix, rho: &DensityMatrix) -> (ComplexMatrix, f64) {
    let out = hermitize(k * rho.matrix() * k.adjoint());
    let w = out.trace().re;
    (out, w)
}

fn hermitize(m: ComplexMatrix) -> ComplexMatrix {
    let mut h = (m + m.adjoint()) * real(0.5);
    for i in 0..3 {
        h[(i, i)].im = 0.0;
    }
    h
}

/// Closed-form evolved density matrix for a zero-phase pure initial state.
///
/// Evaluates the analytic matrices for each configuration and divides by I_T.
/// States with nonzero phases must go through [`apply_channel`].
pub fn closed_form_evolve(
    decay_type: DecayType,
    probs: JumpProbabilities,
    state: &InitialState,
) -> Result<DensityMatrix> {
    probs.validate_for(decay_type)?;
    if !state.has_zero_phases() {
        return Err(Error::Unsupported("closed forms assume zero phases; use apply_channel for phased states".into()));
    }
    let [i1, i2, i3] = state.intensities();
    let total = state.total_intensity();
    let (s12, s13, s23) = ((i1 * i2).sqrt(), (i1 * i3).sqrt(), (i2 * i3).sqrt());
    let JumpProbabilities { p21, p31, p32 } = probs;

    let m: Matrix3<f64> = match decay_type {
        DecayType::Cascade => {
            let (a21, a32) = ((1.0 - p21).sqrt(), (1.0 - p32).sqrt());
            Matrix3::new(
                i1 + i2 * p21 + i3 * p32 * p21,
                s12 * a21,
                s13 * a32,
                s12 * a21,
                i2 * (1.0 - p21) + i3 * p32 * (1.0 - p21),
                s23 * a21 * a32,
                s13 * a32,
                s23 * a21 * a32,
                i3 * (1.0 - p32),
            )
        }
        DecayType::Lambda => {
            let surv = probs.lambda_survival();
            let a3 = surv.sqrt();
            Matrix3::new(i1 + i3 * p31, s12, s13 * a3, s12, i2 + i3 * p32, s23 * a3, s13 * a3, s23 * a3, i3 * surv)
        }
        DecayType::V => {
            let (a21, a31) = ((1.0 - p21).sqrt(), (1.0 - p31).sqrt());
            Matrix3::new(
                i1 + i2 * p21 + i3 * p31,
                s12 * a21,
                s13 * a31,
                s12 * a21,
                i2 * (1.0 - p21),
                s23 * a21 * a31,
                s13 * a31,
                s23 * a21 * a31,
                i3 * (1.0 - p31),
            )
        }
    };
    Ok(DensityMatrix::from_raw(m.map(|x| real(x / total))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::pure_density;
    use approx::assert_abs_diff_eq;

    fn assert_mat_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= tol, "{a} != {b}");
        }
    }

    #[test]
    fn zero_probabilities_give_identity_channel() {
        let k = build_kraus(DecayType::Cascade, JumpProbabilities::zero()).unwrap();
        assert_eq!(k.operators().len(), 4);
        assert_mat_eq(&k.operators()[0], &ComplexMatrix::identity(), 0.0);
        for op in &k.operators()[1..] {
            assert_mat_eq(op, &ComplexMatrix::zeros(), 0.0);
        }
    }

    #[test]
    fn cascade_full_decay_operators() {
        let k = build_kraus(DecayType::Cascade, JumpProbabilities::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        let ops = k.operators();
        assert_mat_eq(&ops[0], &diag(1.0, 0.0, 0.0), 0.0);
        assert_mat_eq(&ops[1], &jump(1.0, 1, 2), 0.0);
        assert_mat_eq(&ops[2], &ComplexMatrix::zeros(), 0.0);
        assert_mat_eq(&ops[3], &jump(1.0, 1, 3), 0.0);
    }

    #[test]
    fn lambda_operators() {
        let k = build_kraus(DecayType::Lambda, JumpProbabilities::new(0.0, 0.5, 0.25).unwrap()).unwrap();
        let ops = k.operators();
        assert_eq!(ops.len(), 3);
        assert_mat_eq(&ops[0], &diag(1.0, 1.0, 0.5), 1e-15);
        assert_abs_diff_eq!(ops[1][(1, 2)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ops[2][(0, 2)].re, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn probability_errors() {
        let p = JumpProbabilities { p21: 0.0, p31: 0.7, p32: 0.4 };
        assert!(matches!(build_kraus(DecayType::Lambda, p), Err(Error::Constraint(_))));
        // only Λ couples p31 and p32
        assert!(build_kraus(DecayType::V, p).is_ok());
        let p = JumpProbabilities { p21: 1.5, p31: 0.0, p32: 0.0 };
        assert!(matches!(build_kraus(DecayType::V, p), Err(Error::Range { .. })));
        assert!(JumpProbabilities::new(-0.1, 0.0, 0.0).is_err());
        assert!(JumpProbabilities::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn incomplete_set_is_rejected() {
        let mut ops =
            build_kraus(DecayType::V, JumpProbabilities::new(0.3, 0.3, 0.0).unwrap()).unwrap().operators().to_vec();
        ops.pop();
        let bad = KrausSet::from_operators(ops, DecayType::V, JumpProbabilities::zero());
        let rho = pure_density(&InitialState::equal());
        assert!(matches!(apply_channel(&bad, &rho), Err(Error::Precondition(_))));
    }

    #[test]
    fn cascade_full_decay_on_mixed_diagonal() {
        let k = build_kraus(DecayType::Cascade, JumpProbabilities::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        let rho = DensityMatrix::diagonal([1.0 / 3.0; 3]).unwrap();
        let out = apply_channel(&k, &rho).unwrap();
        assert_mat_eq(out.matrix(), &diag(1.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn cascade_quarter_closed_form_values() {
        let p = JumpProbabilities::new(0.25, 0.0, 0.25).unwrap();
        let rho = closed_form_evolve(DecayType::Cascade, p, &InitialState::equal()).unwrap();
        let [r11, r22, r33] = rho.populations();
        assert_abs_diff_eq!(r11, 0.4375, epsilon = 1e-15);
        assert_abs_diff_eq!(r22, 0.3125, epsilon = 1e-15);
        assert_abs_diff_eq!(r33, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(1, 2).re, 0.75f64.sqrt() / 3.0, epsilon = 1e-15);
        let via_kraus =
            apply_channel(&build_kraus(DecayType::Cascade, p).unwrap(), &pure_density(&InitialState::equal())).unwrap();
        assert_mat_eq(rho.matrix(), via_kraus.matrix(), 1e-12);
    }

    #[test]
    fn v_full_decay_closed_form() {
        let p = JumpProbabilities::new(1.0, 1.0, 0.0).unwrap();
        let rho = closed_form_evolve(DecayType::V, p, &InitialState::equal()).unwrap();
        assert_mat_eq(rho.matrix(), &diag(1.0, 0.0, 0.0), 1e-15);
    }

    #[test]
    fn closed_form_rejects_phases() {
        let s = InitialState::new([1.0; 3], [0.0, 0.1, 0.0]).unwrap();
        assert!(matches!(closed_form_evolve(DecayType::V, JumpProbabilities::zero(), &s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn decay_type_round_trips_through_names() {
        for t in DecayType::ALL {
            assert_eq!(t.name().parse::<DecayType>().unwrap(), t);
            assert_eq!(build_kraus(t, JumpProbabilities::zero()).unwrap().operators().len(), t.kraus_count());
        }
        assert!("ladder".parse::<DecayType>().is_err());
    }
}
