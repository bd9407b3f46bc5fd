use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, SubspaceState};

/// Beam geometry shared by the image-plane and Fourier-plane models.
///
/// Lengths share one unit (millimetres in the defaults); `wavenumber` is in
/// inverse length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    /// Spacing between neighbouring mode centres; mode `i` sits at `i·d`.
    pub d: f64,
    /// Gaussian mode width σ in exp(−(y − i·d)²/σ²).
    pub sigma_g: f64,
    /// Focal length of the Fourier lens.
    pub focal_length: f64,
    /// Wavenumber k = 2π/λ.
    pub wavenumber: f64,
}

impl Default for ModeGeometry {
    fn default() -> Self {
        Self { d: 1.0, sigma_g: 0.08, focal_length: 300.0, wavenumber: 2.0 * PI / 632.8e-6 }
    }
}

impl ModeGeometry {
    pub fn new(d: f64, sigma_g: f64, focal_length: f64, wavenumber: f64) -> Result<Self> {
        for (name, v) in [("d", d), ("sigma_g", sigma_g), ("focal_length", focal_length), ("wavenumber", wavenumber)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InputContract(format!("{name} = {v} must be finite and positive")));
            }
        }
        Ok(Self { d, sigma_g, focal_length, wavenumber })
    }

    /// Centre of mode `level` (1-based) in the image plane.
    pub fn mode_center(&self, level: usize) -> f64 {
        level as f64 * self.d
    }

    /// Separation of the two beams of a pair.
    pub fn pair_separation(&self, pair: (usize, usize)) -> f64 {
        pair.1.abs_diff(pair.0) as f64 * self.d
    }

    /// Fringe period 2πf/(kD) in the Fourier plane for a pair separated by D.
    pub fn fringe_period(&self, pair: (usize, usize)) -> f64 {
        2.0 * PI * self.focal_length / (self.wavenumber * self.pair_separation(pair))
    }

    /// 1/e half-width f/(σk) of the Fourier-plane envelope.
    pub fn envelope_width(&self) -> f64 {
        self.focal_length / (self.sigma_g * self.wavenumber)
    }

    /// Fourier-plane envelope exp(−σ²k²y²/f²).
    pub fn envelope(&self, y: f64) -> f64 {
        let w = self.envelope_width();
        (-(y * y) / (w * w)).exp()
    }
}

/// Image-plane detection probability Σ_i ρ_ii·exp(−(y − i·d)²/σ²).
pub fn image_intensity(rho: &DensityMatrix, geom: &ModeGeometry, y: f64) -> f64 {
    image_intensity_from_populations(&rho.populations(), geom, y)
}

pub(crate) fn image_intensity_from_populations(pops: &[f64; 3], geom: &ModeGeometry, y: f64) -> f64 {
    let s2 = geom.sigma_g * geom.sigma_g;
    pops.iter()
        .enumerate()
        .map(|(i, &p)| {
            let dy = y - geom.mode_center(i + 1);
            p * (-(dy * dy) / s2).exp()
        })
        .sum()
}

/// Fourier-plane two-beam pattern E(y)·[1 + 2|σ_ij|·cos(k·y·D/f + φ_ij)].
pub fn fringe_intensity(sub: &SubspaceState, geom: &ModeGeometry, y: f64) -> f64 {
    let c = sub.coherence();
    let phase = geom.wavenumber * y * geom.pair_separation(sub.pair()) / geom.focal_length + c.arg();
    let value = geom.envelope(y) * (1.0 + 2.0 * c.norm() * phase.cos());
    value.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{project_subspace, pure_density, InitialState};
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;
    use num_complex::Complex64;

    fn geom() -> ModeGeometry {
        ModeGeometry::new(1.0, 0.25, 300.0, 1e4).unwrap()
    }

    #[test]
    fn single_mode_peak() {
        let rho = DensityMatrix::diagonal([1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(image_intensity(&rho, &geom(), 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn midpoint_between_modes() {
        let rho = DensityMatrix::diagonal([1.0 / 3.0; 3]).unwrap();
        let g = geom();
        let expected = 2.0 / 3.0 * (-4f64).exp();
        let got = image_intensity(&rho, &g, 1.5 * g.d);
        // third mode contributes e^{-36}/3
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(got, 0.0122, epsilon = 1e-4);
    }

    #[test]
    fn full_visibility_dark_fringe() {
        let sub = project_subspace(&pure_density(&InitialState::equal()), 1, 2).unwrap();
        let g = geom();
        // cos(k·y·d/f) = −1 at y = π f/(k d)
        let y = PI * g.focal_length / (g.wavenumber * g.d);
        assert_abs_diff_eq!(fringe_intensity(&sub, &g, y), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fringe_intensity(&sub, &g, 0.0), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn incoherent_pair_is_envelope_only() {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let sub = SubspaceState::new(Matrix2::new(half, zero, zero, half), (1, 2), 1.0).unwrap();
        let g = geom();
        for y in [-0.03, 0.0, 0.011, 0.05] {
            assert_abs_diff_eq!(fringe_intensity(&sub, &g, y), g.envelope(y), epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_geometry() {
        assert!(ModeGeometry::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModeGeometry::new(1.0, f64::NAN, 1.0, 1.0).is_err());
    }
}
