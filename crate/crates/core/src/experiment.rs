//! Synthetic reproduction of the measurement: repeated image-plane and
//! two-beam exposures at one sweep sample, followed by estimation.
//!
//! Frame seeds come from a counter scheme: starting from the master seed,
//! the sample index, repetition index and exposure index (0 = image plane,
//! 1..=3 = pairs 12, 13, 23) are folded in one after another with a
//! SplitMix64 finalizer. Changing the repetition count never perturbs the
//! frames of earlier repetitions.

use rayon::prelude::*;

use crate::channel::{apply_channel, build_kraus, DecayType, JumpProbabilities};
use crate::error::{Error, Result};
use crate::estimate::{
    fit_fringe, fit_populations, reconstruct_elements, AggregatedEstimate, ElementEstimate, FringeHint, PairMeasurement,
};
use crate::optics::{
    frame_sequence, itop, render_frame, DetectorFrame, DetectorSpec, FringeField, ModeGeometry, ProfileAxis,
};
use crate::state::{project_subspace, pure_density, InitialState};
use crate::timecourse::PAIRS;

/// Number of exposures per repetition: one image plane plus one per pair.
pub const EXPOSURES: usize = 4;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one exposure.
pub fn frame_seed(master: u64, sample: usize, repetition: usize, exposure: usize) -> u64 {
    let h = splitmix(master);
    let h = splitmix(h ^ sample as u64);
    let h = splitmix(h ^ repetition as u64);
    splitmix(h ^ exposure as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSetup {
    pub geometry: ModeGeometry,
    pub image_detector: DetectorSpec,
    pub fringe_detector: DetectorSpec,
    pub repetitions: usize,
    pub master_seed: u64,
}

impl ExperimentSetup {
    /// Detectors sized from the geometry with the given photon budget.
    pub fn new(
        geometry: ModeGeometry,
        mean_photons: f64,
        repetitions: usize,
        master_seed: u64,
        noiseless: bool,
    ) -> Self {
        let mut image_detector = default_image_detector(&geometry);
        let mut fringe_detector = default_fringe_detector(&geometry);
        for d in [&mut image_detector, &mut fringe_detector] {
            d.mean_photons = mean_photons;
            d.noiseless = noiseless;
        }
        Self { geometry, image_detector, fringe_detector, repetitions, master_seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.image_detector.validate()?;
        self.fringe_detector.validate()?;
        if self.repetitions == 0 {
            return Err(Error::InputContract("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Image-plane detector covering all three modes with four pixels per σ.
pub fn default_image_detector(g: &ModeGeometry) -> DetectorSpec {
    let pitch = g.sigma_g / 4.0;
    let rows = ((4.0 * g.d) / pitch).ceil() as usize;
    DetectorSpec::centered(rows, 16, pitch, (0.0, 2.0 * g.d))
}

/// Fourier-plane detector spanning ±3 envelope widths, four pixels per
/// shortest fringe period.
pub fn default_fringe_detector(g: &ModeGeometry) -> DetectorSpec {
    let pitch = g.fringe_period((1, 3)).min(g.sigma_g) / 4.0;
    let rows = ((6.0 * g.envelope_width()) / pitch).ceil() as usize;
    DetectorSpec::centered(rows, 16, pitch, (0.0, 0.0))
}

/// Frames of one repetition: the image plane and the three pair exposures.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionFrames {
    pub image: DetectorFrame,
    /// `None` for pairs without population.
    pub fringes: [Option<DetectorFrame>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub estimate: AggregatedEstimate,
    /// One message per failed repetition.
    pub failures: Vec<String>,
    /// Frames of the first repetition.
    pub first_frames: Option<RepetitionFrames>,
}

impl SampleOutcome {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Renders the exposures of one repetition.
pub fn render_repetition(
    decay_type: DecayType,
    probs: JumpProbabilities,
    state: &InitialState,
    setup: &ExperimentSetup,
    sample: usize,
    repetition: usize,
) -> Result<RepetitionFrames> {
    let kraus = build_kraus(decay_type, probs)?;
    let seed = |exposure| frame_seed(setup.master_seed, sample, repetition, exposure);
    let image_spec = DetectorSpec { seed: seed(0), ..setup.image_detector };
    let image = frame_sequence(&kraus, state, &setup.geometry, &image_spec)?;

    let rho = apply_channel(&kraus, &pure_density(state))?;
    let mut fringes: [Option<DetectorFrame>; 3] = Default::default();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        fringes[k] = match project_subspace(&rho, i, j) {
            Ok(sub) => {
                let spec = DetectorSpec { seed: seed(k + 1), ..setup.fringe_detector };
                Some(render_frame(&FringeField { sub, geom: setup.geometry }, &spec)?)
            }
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(RepetitionFrames { image, fringes })
}

/// Estimates the six plotted quantities from one repetition.
pub fn estimate_repetition(frames: &RepetitionFrames, geometry: &ModeGeometry) -> Result<ElementEstimate> {
    let image = itop(&frames.image, ProfileAxis::Rows);
    if image.empty {
        return Err(Error::FitDegeneracy { found: 0 });
    }
    let peaks = fit_populations(&image.profile, Some(geometry))?;
    let mut measurements = [PairMeasurement::NoLight; 3];
    for (k, frame) in frames.fringes.iter().enumerate() {
        if let Some(frame) = frame {
            let profile = itop(frame, ProfileAxis::Rows);
            let hint = FringeHint::new(geometry, PAIRS[k]);
            measurements[k] = PairMeasurement::Fitted(fit_fringe(&profile.profile, Some(&hint))?);
        }
    }
    reconstruct_elements(&peaks, [Some(&measurements[0]), Some(&measurements[1]), Some(&measurements[2])])
}

/// Runs every repetition of one sweep sample and aggregates the estimates.
pub fn simulate_sample(
    decay_type: DecayType,
    probs: JumpProbabilities,
    state: &InitialState,
    setup: &ExperimentSetup,
    sample: usize,
) -> Result<SampleOutcome> {
    setup.validate()?;
    let reps: Vec<Result<(ElementEstimate, Option<RepetitionFrames>)>> = (0..setup.repetitions)
        .into_par_iter()
        .map(|r| {
            let frames = render_repetition(decay_type, probs, state, setup, sample, r)?;
            let est = estimate_repetition(&frames, &setup.geometry)?;
            Ok((est, (r == 0).then_some(frames)))
        })
        .collect();

    let mut estimates = Vec::with_capacity(reps.len());
    let mut failures = Vec::new();
    let mut first_frames = None;
    for (r, outcome) in reps.into_iter().enumerate() {
        match outcome {
            Ok((est, frames)) => {
                estimates.push(est);
                if frames.is_some() {
                    first_frames = frames;
                }
            }
            Err(e) => failures.push(format!("repetition {r}: {e}")),
        }
    }
    if first_frames.is_none() {
        first_frames = render_repetition(decay_type, probs, state, setup, sample, 0).ok();
    }
    Ok(SampleOutcome { estimate: AggregatedEstimate::from_estimates(&estimates), failures, first_frames })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a = frame_seed(1, 0, 0, 0);
        assert_eq!(a, frame_seed(1, 0, 0, 0));
        let mut all = vec![];
        for s in 0..3 {
            for r in 0..3 {
                for e in 0..EXPOSURES {
                    all.push(frame_seed(42, s, r, e));
                }
            }
        }
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), n);
    }

    #[test]
    fn default_detectors_resolve_features() {
        let g = ModeGeometry::default();
        let img = default_image_detector(&g);
        assert!(img.pitch <= g.sigma_g / 4.0 + 1e-15);
        let fr = default_fringe_detector(&g);
        assert!(fr.pitch * 4.0 <= g.fringe_period((1, 3)) + 1e-15);
        // at least three periods of the widest fringe inside ±w
        assert!(2.0 * g.envelope_width() / g.fringe_period((1, 2)) >= 3.0);
    }
}
