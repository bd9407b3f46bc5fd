//! Qutrit density matrices, pure initial states and two-level projections.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense 3×3 complex matrix used for states and Kraus operators.
pub type ComplexMatrix = Matrix3<Complex64>;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Number of levels of the simulated system.
pub const LEVELS: usize = 3;

pub(crate) fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermitian_defect<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    let (rows, cols) = m.shape();
    let mut worst: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols.min(rows) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of a Hermitian 3×3 matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    m.symmetric_eigenvalues().min()
}

/// A validated qutrit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !all_finite(&mat) {
            return Err(Error::InputContract("density matrix has non-finite entries".into()));
        }
        let herm = hermitian_defect(&mat);
        if herm > HERMITIAN_TOL {
            return Err(Error::InputContract(format!("density matrix is not Hermitian (defect {herm:.3e})")));
        }
        let trace = mat.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InputContract(format!("density matrix trace {trace} differs from 1")));
        }
        let lowest = min_eigenvalue(&mat);
        if lowest < -PSD_TOL {
            return Err(Error::InputContract(format!("density matrix has negative eigenvalue {lowest:.3e}")));
        }
        Ok(Self(mat))
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: [f64; 3]) -> Result<Self> {
        let m = ComplexMatrix::from_diagonal(&nalgebra::Vector3::from_iterator(
            populations.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(m)
    }

    pub(crate) fn from_raw(mat: ComplexMatrix) -> Self {
        Self(mat)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// Element ρ_ij with 1-based level indices.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i - 1, j - 1)]
    }

    /// Populations (ρ11, ρ22, ρ33).
    pub fn populations(&self) -> [f64; 3] {
        [self.0[(0, 0)].re, self.0[(1, 1)].re, self.0[(2, 2)].re]
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        crate::error::check_range("mixing weight", w, 0.0, 1.0)?;
        Ok(Self(self.0 * Complex64::from(w) + other.0 * Complex64::from(1.0 - w)))
    }
}

/// Pure qutrit state given by beam intensities and path phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    intensities: [f64; 3],
    phases: [f64; 3],
}

impl InitialState {
    pub fn new(intensities: [f64; 3], phases: [f64; 3]) -> Result<Self> {
        for (k, &i) in intensities.iter().enumerate() {
            if !i.is_finite() || i < 0.0 {
                return Err(Error::InputContract(format!("intensity I{} = {i} must be finite and nonnegative", k + 1)));
            }
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InputContract("phases must be finite".into()));
        }
        if intensities.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Degenerate("total intensity I_T is zero".into()));
        }
        Ok(Self { intensities, phases })
    }

    /// Zero-phase state.
    pub fn from_intensities(intensities: [f64; 3]) -> Result<Self> {
        Self::new(intensities, [0.0; 3])
    }

    /// Equal superposition of the three levels.
    pub fn equal() -> Self {
        Self { intensities: [1.0; 3], phases: [0.0; 3] }
    }

    pub fn intensities(&self) -> [f64; 3] {
        self.intensities
    }

    pub fn phases(&self) -> [f64; 3] {
        self.phases
    }

    pub fn total_intensity(&self) -> f64 {
        self.intensities.iter().sum()
    }

    pub fn has_zero_phases(&self) -> bool {
        self.phases.iter().all(|&p| p == 0.0)
    }

    /// Normalized amplitudes √(I_i/I_T)·e^{iφ_i}.
    pub fn amplitudes(&self) -> [Complex64; 3] {
        let total = self.total_intensity();
        std::array::from_fn(|k| Complex64::from_polar((self.intensities[k] / total).sqrt(), self.phases[k]))
    }
}

/// |ψ0⟩⟨ψ0| for the given initial state.
pub fn pure_density(state: &InitialState) -> DensityMatrix {
    let a = state.amplitudes();
    let mut m = ComplexMatrix::from_fn(|i, j| a[i] * a[j].conj());
    // exact real diagonal, exact Hermitian pairing
    for i in 0..3 {
        m[(i, i)] = Complex64::new(a[i].norm_sqr(), 0.0);
    }
    DensityMatrix::from_raw(m)
}

/// Renormalized projection of ρ onto the span of two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubspaceState {
    sigma: Matrix2<Complex64>,
    pair: (usize, usize),
    renorm: f64,
}

impl SubspaceState {
    /// Builds a subspace state from a 2×2 matrix, validating density-matrix invariants.
    pub fn new(sigma: Matrix2<Complex64>, pair: (usize, usize), renorm: f64) -> Result<Self> {
        check_pair(pair.0, pair.1)?;
        if pair.0 >= pair.1 {
            return Err(Error::InputContract("pair must satisfy i < j".into()));
        }
        if hermitian_defect(&sigma) > HERMITIAN_TOL {
            return Err(Error::InputContract("subspace matrix is not Hermitian".into()));
        }
        if (sigma.trace() - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InputContract("subspace matrix trace differs from 1".into()));
        }
        let lowest = sigma.symmetric_eigenvalues().min();
        if lowest < -PSD_TOL {
            return Err(Error::InputContract(format!("subspace matrix has negative eigenvalue {lowest:.3e}")));
        }
        Ok(Self { sigma, pair, renorm })
    }

    pub fn sigma(&self) -> &Matrix2<Complex64> {
        &self.sigma
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    /// Pre-normalization trace ρ_ii + ρ_jj.
    pub fn renorm(&self) -> f64 {
        self.renorm
    }

    /// The pre-normalization trace expressed in intensity units, I_r = (ρ_ii + ρ_jj)·I_T.
    pub fn renorm_intensity(&self, total_intensity: f64) -> f64 {
        self.renorm * total_intensity
    }

    /// The coherence σ_ij.
    pub fn coherence(&self) -> Complex64 {
        self.sigma[(0, 1)]
    }
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if !(1..=LEVELS).contains(&i) || !(1..=LEVELS).contains(&j) {
        return Err(Error::InputContract(format!("levels ({i}, {j}) must lie in 1..=3")));
    }
    if i == j {
        return Err(Error::InputContract(format!("levels must differ, got ({i}, {j})")));
    }
    Ok(())
}

/// Projects ρ onto the {|i⟩,|j⟩} subspace and renormalizes it.
///
/// The pair is reordered so the result always carries `i < j`.
pub fn project_subspace(rho: &DensityMatrix, i: usize, j: usize) -> Result<SubspaceState> {
    check_pair(i, j)?;
    let (i, j) = (i.min(j), i.max(j));
    let m = rho.matrix();
    let (a, b) = (i - 1, j - 1);
    let trace = m[(a, a)].re + m[(b, b)].re;
    if trace <= 0.0 {
        return Err(Error::Degenerate(format!("levels {i} and {j} carry no population")));
    }
    let scale = Complex64::from(1.0 / trace);
    let sigma =
        Matrix2::new(Complex64::new(m[(a, a)].re, 0.0), m[(a, b)], m[(a, b)].conj(), Complex64::new(m[(b, b)].re, 0.0))
            * scale;
    Ok(SubspaceState { sigma, pair: (i, j), renorm: trace })
}

/// Two-beam fringe visibility 2|σ_ij|.
pub fn visibility(sub: &SubspaceState) -> f64 {
    (2.0 * sub.coherence().norm()).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn single_level_state() {
        let rho = pure_density(&InitialState::from_intensities([1.0, 0.0, 0.0]).unwrap());
        assert_eq!(rho.populations(), [1.0, 0.0, 0.0]);
        assert_eq!(rho.element(1, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn equal_superposition_entries() {
        let rho = pure_density(&InitialState::equal());
        for z in rho.matrix().iter() {
            assert_abs_diff_eq!(z.re, 1.0 / 3.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn phased_outer_product() {
        let s = InitialState::new([2.0, 1.0, 1.0], [0.0, 0.0, PI]).unwrap();
        let rho = pure_density(&s);
        let r2 = 2f64.sqrt();
        assert_abs_diff_eq!(rho.element(1, 2).re, r2 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(1, 3).re, -r2 / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(2, 3).re, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(1, 3).im, 0.0, epsilon = 1e-15);
        DensityMatrix::new(*rho.matrix()).unwrap();
    }

    #[test]
    fn zero_intensity_is_degenerate() {
        assert!(matches!(InitialState::from_intensities([0.0; 3]), Err(Error::Degenerate(_))));
        assert!(InitialState::from_intensities([-1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        let mut m = *pure_density(&InitialState::equal()).matrix();
        m[(0, 1)] += Complex64::new(0.0, 1e-6);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::diagonal([0.5, 0.6, 0.0]).is_err());
        assert!(DensityMatrix::diagonal([1.2, -0.2, 0.0]).is_err());
    }

    #[test]
    fn projection_of_equal_state_is_maximally_coherent() {
        let sub = project_subspace(&pure_density(&InitialState::equal()), 1, 2).unwrap();
        for z in sub.sigma().iter() {
            assert_abs_diff_eq!(z.re, 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(visibility(&sub), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn projection_of_mixed_state_has_no_coherence() {
        let rho = DensityMatrix::diagonal([0.5, 0.0, 0.5]).unwrap();
        let sub = project_subspace(&rho, 3, 1).unwrap();
        assert_eq!(sub.pair(), (1, 3));
        assert_abs_diff_eq!(sub.sigma()[(0, 0)].re, 0.5);
        assert_abs_diff_eq!(sub.sigma()[(1, 1)].re, 0.5);
        assert_eq!(visibility(&sub), 0.0);
    }

    #[test]
    fn projection_errors() {
        let rho = DensityMatrix::diagonal([1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(project_subspace(&rho, 2, 3), Err(Error::Degenerate(_))));
        assert!(project_subspace(&rho, 2, 2).is_err());
        assert!(project_subspace(&rho, 0, 2).is_err());
        assert!(project_subspace(&rho, 1, 4).is_err());
    }
}
