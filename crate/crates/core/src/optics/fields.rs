//! Two-dimensional intensity fields built from the 1D beam models.
//!
//! The mode axis is world `y`; the orthogonal axis `x` carries a fixed
//! Gaussian exp(−x²/σ²) with the mode width.

use super::detector::Field;
use super::geometry::{fringe_intensity, image_intensity_from_populations, ModeGeometry};
use crate::state::{DensityMatrix, SubspaceState};

fn transverse(geom: &ModeGeometry, x: f64) -> f64 {
    (-(x * x) / (geom.sigma_g * geom.sigma_g)).exp()
}

/// Image-plane field of a state's populations.
///
/// Populations need not sum to one; unnormalized branch states render with
/// their weight.
#[derive(Debug, Clone, Copy)]
pub struct ImageField {
    pub populations: [f64; 3],
    pub geom: ModeGeometry,
}

impl ImageField {
    pub fn new(rho: &DensityMatrix, geom: ModeGeometry) -> Self {
        Self { populations: rho.populations(), geom }
    }
}

impl Field for ImageField {
    fn intensity(&self, x: f64, y: f64) -> f64 {
        transverse(&self.geom, x) * image_intensity_from_populations(&self.populations, &self.geom, y)
    }

    fn feature_scale(&self) -> f64 {
        self.geom.sigma_g
    }
}

/// Fourier-plane two-beam interference field of a subspace state.
#[derive(Debug, Clone, Copy)]
pub struct FringeField {
    pub sub: SubspaceState,
    pub geom: ModeGeometry,
}

impl Field for FringeField {
    fn intensity(&self, x: f64, y: f64) -> f64 {
        transverse(&self.geom, x) * fringe_intensity(&self.sub, &self.geom, y)
    }

    fn feature_scale(&self) -> f64 {
        self.geom.fringe_period(self.sub.pair()).min(self.geom.sigma_g)
    }
}
