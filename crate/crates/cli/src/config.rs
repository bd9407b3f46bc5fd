//! Scenario configuration: a flat TOML table.
//!
//! Every key is optional; unknown keys are rejected. See the README for the
//! full key list.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use qjump_core::experiment::ExperimentSetup;
use qjump_core::optics::{DetectorSpec, ModeGeometry};
use qjump_core::{DecayRates, DecayType, InitialState, Samples, SweepSpec};

use crate::error::{io_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Progress,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaveFrames {
    None,
    First,
    All,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub decay_type: String,
    pub intensities: [f64; 3],
    pub phases: [f64; 3],
    pub gamma21: Option<f64>,
    pub gamma31: Option<f64>,
    pub gamma32: Option<f64>,
    pub sweep: SweepMode,
    pub step: f64,
    pub samples: Option<Vec<f64>>,
    pub d: f64,
    pub sigma_g: f64,
    pub focal_length: f64,
    pub wavelength: f64,
    pub image_rows: Option<usize>,
    pub image_cols: Option<usize>,
    pub image_pitch: Option<f64>,
    pub fringe_rows: Option<usize>,
    pub fringe_cols: Option<usize>,
    pub fringe_pitch: Option<f64>,
    pub axis_rotation: f64,
    pub mean_photons: f64,
    pub seed: u64,
    pub repetitions: usize,
    pub noiseless: bool,
    pub output_dir: Option<PathBuf>,
    pub save_frames: SaveFrames,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let g = ModeGeometry::default();
        Self {
            decay_type: "cascade".into(),
            intensities: [1.0; 3],
            phases: [0.0; 3],
            gamma21: None,
            gamma31: None,
            gamma32: None,
            sweep: SweepMode::Progress,
            step: 0.125,
            samples: None,
            d: g.d,
            sigma_g: g.sigma_g,
            focal_length: g.focal_length,
            wavelength: 2.0 * PI / g.wavenumber,
            image_rows: None,
            image_cols: None,
            image_pitch: None,
            fringe_rows: None,
            fringe_cols: None,
            fringe_pitch: None,
            axis_rotation: 0.0,
            mean_photons: 1e5,
            seed: 0,
            repetitions: 64,
            noiseless: false,
            output_dir: None,
            save_frames: SaveFrames::First,
        }
    }
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub sweep: SweepSpec,
    pub state: InitialState,
    pub setup: ExperimentSetup,
    pub output_dir: Option<PathBuf>,
    pub save_frames: SaveFrames,
}

fn field(field: &'static str) -> impl Fn(qjump_core::Error) -> CliError {
    move |e| CliError::Field { field, message: e.to_string() }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text).map_err(|message| CliError::Config { path: path.to_owned(), message })
    }

    /// Parse errors carry the line and the offending key.
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_owned())
    }

    pub fn validate(&self) -> CliResult<Scenario> {
        let decay_type: DecayType = self.decay_type.parse().map_err(field("decay_type"))?;
        let state = InitialState::new(self.intensities, self.phases).map_err(field("intensities"))?;

        let reference = DecayRates::reference(decay_type);
        let rates = DecayRates::new(
            self.gamma21.unwrap_or(reference.gamma21),
            self.gamma31.unwrap_or(reference.gamma31),
            self.gamma32.unwrap_or(reference.gamma32),
        )
        .map_err(field("gamma"))?;

        let sweep = match (self.sweep, &self.samples) {
            (SweepMode::Progress, None) => {
                SweepSpec::progress_grid(decay_type, rates, self.step).map_err(field("step"))?
            }
            (SweepMode::Progress, Some(s)) => {
                SweepSpec::new(decay_type, rates, Samples::Progress(s.clone())).map_err(field("samples"))?
            }
            (SweepMode::Time, Some(s)) => {
                SweepSpec::new(decay_type, rates, Samples::Times(s.clone())).map_err(field("samples"))?
            }
            (SweepMode::Time, None) => {
                return Err(CliError::Field { field: "samples", message: "time sweeps need explicit samples".into() })
            }
        };
        sweep.probabilities().map_err(field("samples"))?;

        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(CliError::Field {
                field: "wavelength",
                message: format!("{} must be positive", self.wavelength),
            });
        }
        let geometry = ModeGeometry::new(self.d, self.sigma_g, self.focal_length, 2.0 * PI / self.wavelength)
            .map_err(field("geometry"))?;

        if !(self.mean_photons.is_finite() && self.mean_photons >= 0.0) {
            return Err(CliError::Field {
                field: "mean_photons",
                message: format!("{} must be finite and nonnegative", self.mean_photons),
            });
        }
        if self.repetitions == 0 {
            return Err(CliError::Field { field: "repetitions", message: "must be at least 1".into() });
        }

        let mut setup = ExperimentSetup::new(geometry, self.mean_photons, self.repetitions, self.seed, self.noiseless);
        setup.image_detector =
            resize(setup.image_detector, (self.image_rows, self.image_cols, self.image_pitch), (0.0, 2.0 * geometry.d));
        setup.fringe_detector =
            resize(setup.fringe_detector, (self.fringe_rows, self.fringe_cols, self.fringe_pitch), (0.0, 0.0));
        setup.fringe_detector.axis_rotation = self.axis_rotation;
        setup.image_detector.validate().map_err(field("image"))?;
        setup.fringe_detector.validate().map_err(field("fringe"))?;

        Ok(Scenario { sweep, state, setup, output_dir: self.output_dir.clone(), save_frames: self.save_frames })
    }
}

fn resize(
    base: DetectorSpec,
    (rows, cols, pitch): (Option<usize>, Option<usize>, Option<f64>),
    center: (f64, f64),
) -> DetectorSpec {
    if rows.is_none() && cols.is_none() && pitch.is_none() {
        return base;
    }
    let fresh = DetectorSpec::centered(
        rows.unwrap_or(base.rows),
        cols.unwrap_or(base.cols),
        pitch.unwrap_or(base.pitch),
        center,
    );
    DetectorSpec { mean_photons: base.mean_photons, noiseless: base.noiseless, ..fresh }
}
