//! Synthetic photon-counting detector.
//!
//! Pixel `(r, c)` covers `[ox + c·pitch, ox + (c+1)·pitch] × [oy + r·pitch, oy + (r+1)·pitch]`
//! in detector coordinates `(u, v)`, where `(ox, oy)` is `origin`. Rows run
//! along `v`. World coordinates are the detector coordinates rotated by
//! `axis_rotation` about the world origin; fields are evaluated in world
//! coordinates.
//!
//! Poisson draws use one ChaCha8 stream per pixel keyed by the frame seed,
//! so the output does not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Intensity distribution in the world plane.
pub trait Field: Sync {
    fn intensity(&self, x: f64, y: f64) -> f64;

    /// Smallest length scale of the field, used to pick the pixel quadrature.
    fn feature_scale(&self) -> f64;
}

/// Adapter for closures.
pub struct FnField<F> {
    pub func: F,
    pub scale: f64,
}

impl<F: Fn(f64, f64) -> f64 + Sync> Field for FnField<F> {
    fn intensity(&self, x: f64, y: f64) -> f64 {
        (self.func)(x, y)
    }

    fn feature_scale(&self) -> f64 {
        self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    /// Detector coordinates of the outer corner of pixel (0, 0).
    pub origin: (f64, f64),
    /// Rotation of the detector axes relative to the world axes, radians.
    pub axis_rotation: f64,
    /// Expected total counts per frame.
    pub mean_photons: f64,
    pub seed: u64,
    /// Report expected counts instead of Poisson draws.
    pub noiseless: bool,
}

impl DetectorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InputContract("detector needs at least one row and column".into()));
        }
        if !(self.pitch.is_finite() && self.pitch > 0.0) {
            return Err(Error::InputContract(format!("pitch {} must be positive", self.pitch)));
        }
        if !(self.mean_photons.is_finite() && self.mean_photons >= 0.0) {
            return Err(Error::InputContract(format!(
                "mean_photons {} must be finite and nonnegative",
                self.mean_photons
            )));
        }
        if !(self.origin.0.is_finite() && self.origin.1.is_finite() && self.axis_rotation.is_finite()) {
            return Err(Error::InputContract("origin and rotation must be finite".into()));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Detector coordinates (u, v) of a pixel centre.
    pub fn pixel_center(&self, r: usize, c: usize) -> (f64, f64) {
        (self.origin.0 + (c as f64 + 0.5) * self.pitch, self.origin.1 + (r as f64 + 0.5) * self.pitch)
    }

    /// Maps detector coordinates to world coordinates.
    pub fn to_world(&self, u: f64, v: f64) -> (f64, f64) {
        if self.axis_rotation == 0.0 {
            return (u, v);
        }
        let (s, c) = self.axis_rotation.sin_cos();
        (u * c - v * s, u * s + v * c)
    }

    /// Detector of `rows × cols` pixels centred on `center`.
    pub fn centered(rows: usize, cols: usize, pitch: f64, center: (f64, f64)) -> Self {
        Self {
            rows,
            cols,
            pitch,
            origin: (center.0 - cols as f64 * pitch / 2.0, center.1 - rows as f64 * pitch / 2.0),
            axis_rotation: 0.0,
            mean_photons: 0.0,
            seed: 0,
            noiseless: false,
        }
    }
}

/// A detector image: per-pixel counts in row-major order.
///
/// Counts are integers for Poisson frames and expected values for noiseless frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorFrame {
    counts: Vec<f64>,
    spec: DetectorSpec,
}

impl DetectorFrame {
    pub fn new(counts: Vec<f64>, spec: DetectorSpec) -> Result<Self> {
        spec.validate()?;
        if counts.len() != spec.pixel_count() {
            return Err(Error::InputContract(format!("expected {} pixels, got {}", spec.pixel_count(), counts.len())));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InputContract("counts must be finite and nonnegative".into()));
        }
        Ok(Self { counts, spec })
    }

    pub fn zeros(spec: DetectorSpec) -> Self {
        Self { counts: vec![0.0; spec.pixel_count()], spec }
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn spec(&self) -> &DetectorSpec {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.spec.rows
    }

    pub fn cols(&self) -> usize {
        self.spec.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.counts[r * self.spec.cols + c]
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Pixelwise sum with a frame of the same shape.
    pub fn accumulate(&mut self, other: &DetectorFrame) -> Result<()> {
        if other.counts.len() != self.counts.len() {
            return Err(Error::InputContract("frame shapes differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

// 2-point Gauss–Legendre nodes on [-1/2, 1/2]
const GAUSS_NODE: f64 = 0.288_675_134_594_812_9;

/// Field integral over every pixel, row-major.
///
/// Midpoint rule when `pitch ≤ scale/4`, otherwise a 2×2 Gauss–Legendre rule.
pub fn pixel_integrals<F: Field + ?Sized>(field: &F, spec: &DetectorSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let midpoint = spec.pitch <= field.feature_scale() / 4.0;
    let area = spec.pitch * spec.pitch;
    let offsets: &[(f64, f64)] = if midpoint {
        &[(0.0, 0.0)]
    } else {
        &[(-GAUSS_NODE, -GAUSS_NODE), (-GAUSS_NODE, GAUSS_NODE), (GAUSS_NODE, -GAUSS_NODE), (GAUSS_NODE, GAUSS_NODE)]
    };
    let weight = area / offsets.len() as f64;
    (0..spec.pixel_count())
        .into_par_iter()
        .map(|idx| {
            let (r, c) = (idx / spec.cols, idx % spec.cols);
            let (u, v) = spec.pixel_center(r, c);
            let mut acc = 0.0;
            for &(du, dv) in offsets {
                let (x, y) = spec.to_world(u + du * spec.pitch, v + dv * spec.pitch);
                let value = field.intensity(x, y);
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::InputContract(format!("field returned {value} at ({x}, {y})")));
                }
                acc += value;
            }
            Ok(acc * weight)
        })
        .collect()
}

/// Turns expected counts into frame counts.
///
/// `stream_base` offsets the per-pixel RNG streams so that several exposures
/// sharing one seed stay independent.
pub(crate) fn sample_counts(expected: &[f64], spec: &DetectorSpec, stream_base: u64) -> Vec<f64> {
    if spec.noiseless {
        return expected.to_vec();
    }
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    expected
        .par_iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            if lambda <= 0.0 {
                return 0.0;
            }
            let mut rng = base.clone();
            rng.set_stream(stream_base + idx as u64);
            Poisson::new(lambda).map(|d| d.sample(&mut rng)).unwrap_or(0.0)
        })
        .collect()
}

/// Expected counts after scaling pixel integrals so their sum equals `mean_photons`.
pub fn expected_counts<F: Field + ?Sized>(field: &F, spec: &DetectorSpec) -> Result<Vec<f64>> {
    let mut integrals = pixel_integrals(field, spec)?;
    let total: f64 = integrals.iter().sum();
    if total > 0.0 {
        let scale = spec.mean_photons / total;
        integrals.iter_mut().for_each(|v| *v *= scale);
    } else {
        integrals.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(integrals)
}

/// Renders a field onto the detector, normalized to `mean_photons` expected
/// counts, then applies Poisson noise unless the spec is noiseless.
pub fn render_frame<F: Field + ?Sized>(field: &F, spec: &DetectorSpec) -> Result<DetectorFrame> {
    let expected = expected_counts(field, spec)?;
    let counts = sample_counts(&expected, spec, 0);
    Ok(DetectorFrame { counts, spec: *spec })
}
